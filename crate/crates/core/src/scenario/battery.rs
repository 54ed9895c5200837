use rayon::prelude::*;

use crate::behavior_graph::BranchingMode;
use crate::error::{Error, Result};
use crate::search::Heuristic;
use crate::traffic_sim::{run_closed_loop, SimLog};

use super::metrics::{aggregate_rows, comfort_metrics, MetricsRow};
use super::Scenario;

/// The ablation matrix of a battery run.
#[derive(Debug, Clone, PartialEq)]
pub struct BatteryConfig {
    pub modes: Vec<BranchingMode>,
    pub heuristics: Vec<Heuristic>,
    /// Offsets added to each scenario's own seed.
    pub seeds: Vec<u64>,
    /// Overrides each scenario's step count.
    pub steps: Option<usize>,
    pub jobs: usize,
    pub keep_logs: bool,
}

impl Default for BatteryConfig {
    fn default() -> Self {
        Self {
            modes: vec![BranchingMode::Proposed],
            heuristics: vec![Heuristic::H0, Heuristic::HAll],
            seeds: vec![0],
            steps: None,
            jobs: 1,
            keep_logs: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CellResult {
    pub row: MetricsRow,
    pub log: Option<SimLog>,
}

#[derive(Debug, Clone, Default)]
pub struct BatteryReport {
    pub rows: Vec<MetricsRow>,
    pub aggregates: Vec<MetricsRow>,
    /// Per-cell logs, aligned with `rows` (only with `keep_logs`).
    pub logs: Vec<Option<SimLog>>,
    pub violations: Vec<String>,
}

impl BatteryReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

fn summarize(sc: &Scenario, mode: BranchingMode, heuristic: Heuristic, seed: u64, log: &SimLog) -> Result<MetricsRow> {
    let n = log.steps.len();
    if n == 0 {
        return Err(Error::InvalidInput("simulation produced no steps".into()));
    }
    let (mean_sq_accel, mean_sq_jerk) = comfort_metrics(&log.driven)?;
    let wall: Vec<f64> = log.steps.iter().map(|s| s.plan.wall_ms).collect();
    let exp: Vec<f64> = log.steps.iter().map(|s| s.plan.expansions as f64).collect();
    let gen: Vec<f64> = log.steps.iter().map(|s| s.plan.generated as f64).collect();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let max = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
    Ok(MetricsRow {
        scenario: sc.id.clone(),
        mode: mode.to_string(),
        heuristic: heuristic.to_string(),
        seed,
        steps: n,
        mean_wall_ms: mean(&wall),
        max_wall_ms: max(&wall),
        mean_expansions: mean(&exp),
        max_expansions: max(&exp),
        total_expansions: exp.iter().sum(),
        mean_generated: mean(&gen),
        max_generated: max(&gen),
        total_generated: gen.iter().sum(),
        mean_sq_accel,
        mean_sq_jerk,
        total_cost: log.total_cost,
        collisions: usize::from(log.collision),
        fallbacks: log.fallbacks,
        error: String::new(),
    })
}

/// Runs one closed-loop cell. Failures become failed rows.
pub fn run_cell(sc: &Scenario, mode: BranchingMode, heuristic: Heuristic, seed_offset: u64, steps: Option<usize>) -> CellResult {
    let seed = sc.seed.wrapping_add(seed_offset);
    let steps = steps.unwrap_or(sc.steps);
    let outcome = run_closed_loop(&sc.setup, heuristic, mode, steps, seed).and_then(|log| summarize(sc, mode, heuristic, seed, &log).map(|row| (row, log)));
    match outcome {
        Ok((row, log)) => CellResult { row, log: Some(log) },
        Err(e) => CellResult {
            row: MetricsRow::failed(&sc.id, &mode.to_string(), &heuristic.to_string(), seed, e.to_string()),
            log: None,
        },
    }
}

/// Violations of the battery invariants: failed cells, collisions, and any
/// `h0` / `hall` cost difference above 1e-9 (relative) for the same cell.
pub fn cross_check(rows: &[MetricsRow], logs: &[Option<SimLog>]) -> Vec<String> {
    let mut out = vec![];
    for r in rows {
        if !r.is_ok() {
            out.push(format!("{} [{} {} seed {}] failed: {}", r.scenario, r.mode, r.heuristic, r.seed, r.error));
        } else if r.collisions > 0 {
            out.push(format!("{} [{} {} seed {}] collided", r.scenario, r.mode, r.heuristic, r.seed));
        }
    }
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0);
    let h0 = Heuristic::H0.to_string();
    let hall = Heuristic::HAll.to_string();
    for (i, a) in rows.iter().enumerate() {
        if a.heuristic != h0 || !a.is_ok() {
            continue;
        }
        for (j, b) in rows.iter().enumerate() {
            if b.heuristic != hall || !b.is_ok() || b.scenario != a.scenario || b.mode != a.mode || b.seed != a.seed {
                continue;
            }
            if !close(a.total_cost, b.total_cost) {
                out.push(format!("{} [{} seed {}] total cost differs: h0 {} vs hall {}", a.scenario, a.mode, a.seed, a.total_cost, b.total_cost));
            }
            if let (Some(Some(la)), Some(Some(lb))) = (logs.get(i), logs.get(j)) {
                for (sa, sb) in la.steps.iter().zip(&lb.steps) {
                    if sa.plan.status != sb.plan.status || !close(sa.plan.total_cost, sb.plan.total_cost) {
                        out.push(format!(
                            "{} [{} seed {}] step {} plan cost differs: h0 {} vs hall {}",
                            a.scenario, a.mode, a.seed, sa.step, sa.plan.total_cost, sb.plan.total_cost
                        ));
                        break;
                    }
                }
            }
        }
    }
    out
}

/// Runs every `(scenario, mode, heuristic, seed)` cell on up to `jobs` threads.
/// Row order follows the loop nesting, independent of scheduling.
pub fn run_battery(scenarios: &[Scenario], cfg: &BatteryConfig) -> Result<BatteryReport> {
    if scenarios.is_empty() {
        return Err(Error::InvalidInput("battery needs at least one scenario".into()));
    }
    let mut cells = vec![];
    for sc in scenarios {
        for &mode in &cfg.modes {
            for &seed in &cfg.seeds {
                for &h in &cfg.heuristics {
                    cells.push((sc, mode, h, seed));
                }
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
    let results: Vec<CellResult> = pool.install(|| cells.par_iter().map(|&(sc, mode, h, seed)| run_cell(sc, mode, h, seed, cfg.steps)).collect());

    // per-step comparison needs the logs even when the caller does not keep them
    let (rows, logs): (Vec<_>, Vec<_>) = results.into_iter().map(|c| (c.row, c.log)).unzip();
    let violations = cross_check(&rows, &logs);
    Ok(BatteryReport {
        aggregates: aggregate_rows(&rows),
        logs: if cfg.keep_logs { logs } else { vec![] },
        rows,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::parse_scenario;

    fn follow() -> Scenario {
        parse_scenario(
            r#"{"schema": "bplan-scenario", "version": 1, "id": "follow", "seed": 5, "steps": 8,
                "lanes": [{"id": "r", "waypoints": [[0, 0], [1500, 0]]}],
                "ego": {"lane": "r", "s": 20, "v": 11},
                "agents": [{"id": "a", "lane": "r", "s": 60, "v": 8}]}"#,
        )
        .unwrap()
    }

    #[test]
    fn heuristic_pair_agrees() {
        let rep = run_battery(&[follow()], &BatteryConfig::default()).unwrap();
        assert_eq!(rep.rows.len(), 2);
        assert!(rep.passed(), "{:?}", rep.violations);
        assert!((rep.rows[0].total_cost - rep.rows[1].total_cost).abs() < 1e-9);
        assert!(rep.rows[1].total_expansions <= rep.rows[0].total_expansions);
    }

    #[test]
    fn deterministic_rows() {
        let cfg = BatteryConfig {
            modes: vec![BranchingMode::Proposed, BranchingMode::Baseline],
            heuristics: vec![Heuristic::HAll],
            ..Default::default()
        };
        let a = run_battery(&[follow()], &cfg).unwrap();
        let b = run_battery(&[follow()], &BatteryConfig { jobs: 2, ..cfg }).unwrap();
        let strip = |r: &BatteryReport| r.rows.iter().map(|x| x.without_wall_time()).collect::<Vec<_>>();
        assert_eq!(strip(&a), strip(&b));
    }

    #[test]
    fn detects_cost_mismatch() {
        let rep = run_battery(&[follow()], &BatteryConfig::default()).unwrap();
        let mut rows = rep.rows.clone();
        rows[1].total_cost += 1e-3;
        assert_eq!(cross_check(&rows, &[]).len(), 1);
        rows[0].error = "boom".into();
        assert!(cross_check(&rows, &[]).iter().any(|v| v.contains("boom")));
    }
}
