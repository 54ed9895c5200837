use serde::{Deserialize, Serialize};

use crate::traffic_sim::{collision, Footprint};

use super::{PlannerConfig, World};

/// Ego pose and kinematics at the end of one sub-step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubSample {
    /// Time since the start of the plan (s).
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    /// Curvature driven during the sub-step.
    pub kappa: f64,
    pub v: f64,
    pub a: f64,
    /// Speed at the start of the sub-step.
    pub v_prev: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Violation {
    #[error("curvature {0:.4} exceeds the limit")]
    Kappa(f64),
    #[error("curvature rate {0:.4} exceeds the limit")]
    KappaDot(f64),
    #[error("absolute acceleration {0:.3} exceeds the limit")]
    AbsAccel(f64),
    #[error("negative speed {0:.3}")]
    NegativeSpeed(f64),
    #[error("collision with agent `{0}`")]
    Collision(String),
}

/// Classifies the sub-samples of one step (`k -> k + 1`). `kappa_prev` is the
/// curvature at the step start; without a `world` only kinematics are checked.
pub fn check_feasibility(samples: &[SubSample], kappa_prev: f64, world: Option<&World>, k: usize, cfg: &PlannerConfig) -> Result<(), Violation> {
    let mut kappa_last = kappa_prev;
    let mut t_last = samples.first().map_or(0.0, |s| s.t - cfg.sub_step);
    for s in samples {
        if s.kappa.abs() > cfg.kappa_max + 1e-12 {
            return Err(Violation::Kappa(s.kappa));
        }
        let rate = (s.kappa - kappa_last) / (s.t - t_last);
        if rate.abs() > cfg.kappa_dot_max + 1e-12 {
            return Err(Violation::KappaDot(rate));
        }
        let v = s.v.max(s.v_prev);
        let lat = v * v * s.kappa;
        let total = s.a.hypot(lat);
        if total > cfg.a_abs_max + 1e-12 {
            return Err(Violation::AbsAccel(total));
        }
        if s.v < -1e-9 {
            return Err(Violation::NegativeSpeed(s.v));
        }
        kappa_last = s.kappa;
        t_last = s.t;
    }
    if let Some(world) = world {
        for (j, s) in samples.iter().enumerate() {
            let ego = Footprint {
                x: s.x,
                y: s.y,
                theta: s.theta,
                length: world.ego_length,
                width: world.ego_width,
            };
            let idx = world.substep_index(k, j + 1);
            for agent in world.agents.iter().filter(|a| !a.collision_exempt) {
                if let Some(fp) = agent.footprint(idx) {
                    if collision(&ego, fp) {
                        return Err(Violation::Collision(agent.id.clone()));
                    }
                }
            }
        }
    }
    Ok(())
}
