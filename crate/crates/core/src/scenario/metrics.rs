use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trajectory::Trajectory;

/// Time-weighted `(mean a², mean jerk²)` using trapezoidal integration.
pub fn comfort_metrics(traj: &Trajectory) -> Result<(f64, f64)> {
    let s = &traj.samples;
    if s.len() < 2 {
        return Err(Error::InvalidInput(format!("comfort metrics need >= 2 samples, got {}", s.len())));
    }
    let duration = s[s.len() - 1].t - s[0].t;
    if !(duration > 0.0) {
        return Err(Error::InvalidInput("trajectory has zero duration".into()));
    }
    let (mut a2, mut j2) = (0.0, 0.0);
    for w in s.windows(2) {
        let h = w[1].t - w[0].t;
        a2 += 0.5 * h * (w[0].a * w[0].a + w[1].a * w[1].a);
        j2 += 0.5 * h * (w[0].jerk * w[0].jerk + w[1].jerk * w[1].jerk);
    }
    Ok((a2 / duration, j2 / duration))
}

/// One battery cell, or one aggregate over cells (`scenario == "ALL"`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub scenario: String,
    pub mode: String,
    pub heuristic: String,
    pub seed: u64,
    pub steps: usize,
    pub mean_wall_ms: f64,
    pub max_wall_ms: f64,
    pub mean_expansions: f64,
    pub max_expansions: f64,
    pub total_expansions: f64,
    pub mean_generated: f64,
    pub max_generated: f64,
    pub total_generated: f64,
    pub mean_sq_accel: f64,
    pub mean_sq_jerk: f64,
    pub total_cost: f64,
    pub collisions: usize,
    pub fallbacks: usize,
    /// Empty on success, otherwise the failure message.
    pub error: String,
}

impl MetricsRow {
    pub fn failed(scenario: &str, mode: &str, heuristic: &str, seed: u64, error: String) -> Self {
        Self {
            scenario: scenario.into(),
            mode: mode.into(),
            heuristic: heuristic.into(),
            seed,
            steps: 0,
            mean_wall_ms: 0.0,
            max_wall_ms: 0.0,
            mean_expansions: 0.0,
            max_expansions: 0.0,
            total_expansions: 0.0,
            mean_generated: 0.0,
            max_generated: 0.0,
            total_generated: 0.0,
            mean_sq_accel: 0.0,
            mean_sq_jerk: 0.0,
            total_cost: 0.0,
            collisions: 0,
            fallbacks: 0,
            error,
        }
    }

    pub fn is_ok(&self) -> bool {
        self.error.is_empty()
    }

    /// The row with wall-time columns zeroed, for reproducibility checks.
    pub fn without_wall_time(&self) -> Self {
        Self {
            mean_wall_ms: 0.0,
            max_wall_ms: 0.0,
            ..self.clone()
        }
    }
}

const HEADER: &str = "scenario,mode,heuristic,seed,steps,mean_wall_ms,max_wall_ms,mean_expansions,max_expansions,total_expansions,mean_generated,max_generated,total_generated,mean_sq_accel,mean_sq_jerk,total_cost,collisions,fallbacks,error";

pub fn write_metrics_csv<W: Write>(rows: &[MetricsRow], mut w: W) -> Result<()> {
    writeln!(w, "{HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},\"{}\"",
            r.scenario,
            r.mode,
            r.heuristic,
            r.seed,
            r.steps,
            r.mean_wall_ms,
            r.max_wall_ms,
            r.mean_expansions,
            r.max_expansions,
            r.total_expansions,
            r.mean_generated,
            r.max_generated,
            r.total_generated,
            r.mean_sq_accel,
            r.mean_sq_jerk,
            r.total_cost,
            r.collisions,
            r.fallbacks,
            r.error.replace('"', "'")
        )?;
    }
    Ok(())
}

/// One row per `(mode, heuristic)` over the successful cells, in first-seen
/// order: means of the mean columns, maxima of the max columns, sums of
/// totals and counts.
pub fn aggregate_rows(rows: &[MetricsRow]) -> Vec<MetricsRow> {
    let mut keys: Vec<(String, String)> = vec![];
    for r in rows {
        let k = (r.mode.clone(), r.heuristic.clone());
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    keys.into_iter()
        .map(|(mode, heuristic)| {
            let cells: Vec<&MetricsRow> = rows.iter().filter(|r| r.is_ok() && r.mode == mode && r.heuristic == heuristic).collect();
            let n = cells.len().max(1) as f64;
            let mean = |f: fn(&MetricsRow) -> f64| cells.iter().map(|r| f(r)).sum::<f64>() / n;
            let max = |f: fn(&MetricsRow) -> f64| cells.iter().map(|r| f(r)).fold(0.0, f64::max);
            let sum = |f: fn(&MetricsRow) -> f64| cells.iter().map(|r| f(r)).sum::<f64>();
            MetricsRow {
                scenario: "ALL".into(),
                seed: 0,
                steps: cells.iter().map(|r| r.steps).sum(),
                mean_wall_ms: mean(|r| r.mean_wall_ms),
                max_wall_ms: max(|r| r.max_wall_ms),
                mean_expansions: mean(|r| r.mean_expansions),
                max_expansions: max(|r| r.max_expansions),
                total_expansions: sum(|r| r.total_expansions),
                mean_generated: mean(|r| r.mean_generated),
                max_generated: max(|r| r.max_generated),
                total_generated: sum(|r| r.total_generated),
                mean_sq_accel: mean(|r| r.mean_sq_accel),
                mean_sq_jerk: mean(|r| r.mean_sq_jerk),
                total_cost: mean(|r| r.total_cost),
                collisions: cells.iter().map(|r| r.collisions).sum(),
                fallbacks: cells.iter().map(|r| r.fallbacks).sum(),
                error: String::new(),
                mode,
                heuristic,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::CartesianPose;
    use crate::trajectory::TrajectorySample;

    fn traj(f: impl Fn(f64) -> (f64, f64), t_end: f64, dt: f64) -> Trajectory {
        let n = (t_end / dt).round() as usize;
        Trajectory {
            samples: (0..=n)
                .map(|i| {
                    let t = i as f64 * dt;
                    let (a, jerk) = f(t);
                    TrajectorySample {
                        t,
                        pose: CartesianPose::default(),
                        v: 10.0,
                        a,
                        jerk,
                        lane: 0,
                        s: 0.0,
                        d: 0.0,
                    }
                })
                .collect(),
            dt_fine: dt,
        }
    }

    #[test]
    fn comfort_examples() {
        assert_eq!(comfort_metrics(&traj(|_| (0.0, 0.0), 10.0, 0.05)).unwrap(), (0.0, 0.0));
        let (a2, j2) = comfort_metrics(&traj(|_| (1.0, 0.0), 10.0, 0.05)).unwrap();
        assert!((a2 - 1.0).abs() < 1e-12 && j2 == 0.0);
        // trapezoid error on t² is h²/6 * (mean of f'') which vanishes as h -> 0
        let (a2, j2) = comfort_metrics(&traj(|t| (0.2 * t, 0.2), 10.0, 0.001)).unwrap();
        assert!((a2 - 4.0 / 3.0).abs() < 1e-6, "{a2}");
        assert!((j2 - 0.04).abs() < 1e-12);
        assert!(comfort_metrics(&Trajectory::default()).is_err());
    }

    #[test]
    fn aggregates_recompute() {
        let mut rows = vec![];
        for (i, m) in ["proposed", "proposed", "passive"].iter().enumerate() {
            let mut r = MetricsRow::failed(&format!("s{i}"), m, "hall", 0, String::new());
            r.mean_sq_jerk = i as f64 + 0.5;
            r.max_expansions = 10.0 * i as f64;
            r.collisions = i;
            rows.push(r);
        }
        rows.push(MetricsRow::failed("bad", "proposed", "hall", 0, "boom".into()));
        let agg = aggregate_rows(&rows);
        assert_eq!(agg.len(), 2);
        assert!((agg[0].mean_sq_jerk - 1.0).abs() < 1e-12);
        assert_eq!(agg[0].max_expansions, 10.0);
        assert_eq!(agg[0].collisions, 1);
        assert_eq!(agg[1].mean_sq_jerk, 2.5);
        let mut buf = vec![];
        write_metrics_csv(&agg, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 3);
    }
}
