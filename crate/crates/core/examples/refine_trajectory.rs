//! Refines a behavior plan into a dense quintic trajectory and writes it as CSV.
//!
//! cargo run --example refine_trajectory -- [scenario.json] [out.csv]
use std::path::PathBuf;

use behavior_planner::behavior_graph::BranchingMode;
use behavior_planner::scenario::{comfort_metrics, load_scenario};
use behavior_planner::search::Heuristic;
use behavior_planner::traffic_sim::plan_open_loop;

fn main() -> behavior_planner::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/basic/overtake.json")));
    let sc = load_scenario(&path)?;
    let (r, traj) = plan_open_loop(&sc.setup, Heuristic::HAll, BranchingMode::Proposed)?;
    let Some(traj) = traj else {
        println!("no plan: {:?}", r.status);
        return Ok(());
    };
    let (a2, j2) = comfort_metrics(&traj)?;
    println!("{} samples over {:.2} s, mean a² {a2:.4}, mean jerk² {j2:.4}", traj.samples.len(), traj.duration());
    match args.next() {
        Some(out) => traj.write_csv(std::fs::File::create(&out)?)?,
        None => traj.write_csv(std::io::stdout().lock())?,
    }
    Ok(())
}
