//! Generates a small randomized battery and runs the heuristic/mode matrix on it.
use behavior_planner::behavior_graph::BranchingMode;
use behavior_planner::scenario::{generate_battery, run_battery, write_metrics_csv, BatteryConfig, Scenario};
use behavior_planner::search::Heuristic;

fn main() -> behavior_planner::Result<()> {
    let count = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(8);
    let scenarios = generate_battery(count, 42, &[])
        .into_iter()
        .map(Scenario::from_file)
        .collect::<behavior_planner::Result<Vec<_>>>()?;
    let cfg = BatteryConfig {
        modes: vec![BranchingMode::Proposed, BranchingMode::Baseline],
        heuristics: vec![Heuristic::H0, Heuristic::HAll],
        ..Default::default()
    };
    let report = run_battery(&scenarios, &cfg)?;
    write_metrics_csv(&report.aggregates, std::io::stdout().lock())?;
    for v in &report.violations {
        println!("violation: {v}");
    }
    println!("{} cells, cross-checks {}", report.rows.len(), if report.passed() { "passed" } else { "FAILED" });
    Ok(())
}
