//! Closed-loop simulation: replan every step against seeded random traffic.
use std::path::PathBuf;

use behavior_planner::behavior_graph::BranchingMode;
use behavior_planner::scenario::load_scenario;
use behavior_planner::search::Heuristic;
use behavior_planner::traffic_sim::run_closed_loop;

fn main() -> behavior_planner::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/basic/slow_leader.json")));
    let sc = load_scenario(&path)?;
    let log = run_closed_loop(&sc.setup, Heuristic::HAll, BranchingMode::Proposed, sc.steps, sc.seed)?;
    for s in &log.steps {
        let lead = s.agents.first().map(|a| format!("{} s {:7.2} v {:5.2}", a.id, a.s, a.v)).unwrap_or_default();
        println!(
            "t {:5.1} {} s {:7.2} v {:5.2} a {:5.2} | {lead} | expansions {:4} {}",
            s.t,
            s.ego_lane,
            s.ego.s,
            s.ego.v,
            s.ego.a,
            s.plan.expansions,
            if s.fallback { "fallback" } else { "" }
        );
    }
    println!("total cost {:.4}, collision {}, fallbacks {}", log.total_cost, log.collision, log.fallbacks);
    Ok(())
}
