//! A* behavior planning on a scenario file, comparing the two heuristics.
//!
//! cargo run --example plan_search -- crates/core/fixtures/basic/overtake.json
use std::path::PathBuf;

use behavior_planner::behavior_graph::BranchingMode;
use behavior_planner::scenario::load_scenario;
use behavior_planner::search::Heuristic;
use behavior_planner::traffic_sim::plan_open_loop;

fn main() -> behavior_planner::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/basic/overtake.json")));
    let sc = load_scenario(&path)?;
    for h in [Heuristic::H0, Heuristic::HAll] {
        let (r, _) = plan_open_loop(&sc.setup, h, BranchingMode::Proposed)?;
        println!("{h:>4}: {:?} cost {:.6} expansions {} generated {}", r.status, r.total_cost, r.expansions, r.generated);
        if h == Heuristic::HAll {
            for n in &r.path[1..] {
                let st = &n.state;
                let act = n.action_in.expect("non-root node");
                println!(
                    "    k {:2} lane {} s {:7.2} v {:5.2} a {:5.2}  {:?}/{:?}  cost {:.4}",
                    st.k, st.lane, st.s, st.v, st.a, act.lon, act.lat, n.cost_breakdown.total
                );
            }
        }
    }
    Ok(())
}
