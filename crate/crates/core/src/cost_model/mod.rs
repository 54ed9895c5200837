//! Edge costs and admissible cost-to-go bounds.

mod heuristic;

use serde::{Deserialize, Serialize};

use crate::behavior_graph::{Action, LatAction, LonAction, PlannerConfig, VehicleState, World};
use crate::driver_models::idm::idm_unclamped;
use crate::driver_models::{time_optimal_velocity_profile, IdmParams, Leader};
use crate::error::{Error, Result};

pub use heuristic::{heuristic_h0, heuristic_h_all, HeuristicBound, SpeedEnvelope};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostWeights {
    pub w_f: f64,
    pub w_c: f64,
    pub w_v: f64,
    pub w_a: f64,
    pub w_adot: f64,
    pub w_lc: f64,
}

impl Default for CostWeights {
    fn default() -> Self {
        Self {
            w_f: 1.0,
            w_c: 2.0,
            w_v: 1.0,
            w_a: 0.2,
            w_adot: 0.2,
            w_lc: 0.5,
        }
    }
}

impl CostWeights {
    pub fn validate(&self) -> Result<()> {
        let all = [self.w_f, self.w_c, self.w_v, self.w_a, self.w_adot, self.w_lc];
        if all.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
            return Err(Error::InvalidInput("cost weights must be finite and >= 0".into()));
        }
        Ok(())
    }
}

/// Per-term values of one edge (or per-term bounds of one step).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CostBreakdown {
    /// Following distance.
    pub j_f: f64,
    /// Courtesy toward vehicles behind.
    pub j_c: f64,
    pub j_v: f64,
    pub j_a: f64,
    pub j_adot: f64,
    pub j_lc: f64,
    pub total: f64,
}

impl CostBreakdown {
    /// Fills `total` with the weighted sum of the terms.
    pub fn weighted(mut self, w: &CostWeights) -> Self {
        self.total = w.w_f * self.j_f + w.w_c * self.j_c + w.w_v * self.j_v + w.w_a * self.j_a + w.w_adot * self.j_adot + w.w_lc * self.j_lc;
        self
    }
}

/// Following-distance penalty for one hypothesis.
pub(crate) fn follow_term(gap: f64, v_ego: f64, min_gap: f64, tau: f64) -> f64 {
    let x = (1.0 - gap / (min_gap + v_ego * tau)).max(0.0);
    x * x
}

/// Deceleration a follower at `v_rear`, `gap` behind an ego at `v_ego`,
/// needs (IDM without free-road term), capped at `b_hard`.
pub(crate) fn required_braking(v_rear: f64, gap: f64, v_ego: f64, traffic: &IdmParams) -> f64 {
    if gap <= 0.0 {
        return traffic.b_hard;
    }
    let p = traffic.with_desired_speed(f64::INFINITY);
    let a = idm_unclamped(v_rear, Some(Leader::new(gap, v_ego)), &p).unwrap_or(-traffic.b_hard);
    (-a).clamp(0.0, traffic.b_hard)
}

pub(crate) fn courtesy_term(v_rear: f64, gap: f64, v_ego: f64, cfg: &PlannerConfig) -> f64 {
    let b = required_braking(v_rear, gap, v_ego, &cfg.traffic_idm) / cfg.mobil.b_safe;
    b * b
}

/// Mean squared jerk over the step. Constant-jerk steps give
/// `((a' - a) / dt)^2`; velocity targets integrate their jerk profile, which
/// is never less than that.
fn mean_sq_jerk(parent: &VehicleState, child: &VehicleState, action: &Action, cfg: &PlannerConfig) -> f64 {
    let constant = ((child.a - parent.a) / cfg.dt).powi(2);
    if let LonAction::Velocity { target } = action.lon {
        if let Ok(p) = time_optimal_velocity_profile(parent.v, parent.a, target, cfg.j_max, cfg.a_lim) {
            if p.total_time <= cfg.dt + 1e-9 {
                let integral: f64 = p.phases.iter().map(|(d, j)| j * j * d).sum();
                return (integral / cfg.dt).max(constant);
            }
        }
    }
    constant
}

/// Cost of the edge `parent -> child` taken with `action`.
pub fn edge_cost(world: &World, parent: &VehicleState, child: &VehicleState, action: &Action, w: &CostWeights, cfg: &PlannerConfig) -> Result<CostBreakdown> {
    if child.k != parent.k + 1 {
        return Err(Error::InvalidInput(format!("edge from step {} to step {}", parent.k, child.k)));
    }
    let dv = (child.v - cfg.v_desired) / cfg.v_desired;
    let mut c = CostBreakdown {
        j_v: dv * dv,
        j_a: child.a * child.a,
        j_adot: mean_sq_jerk(parent, child, action, cfg),
        j_lc: if action.lat == LatAction::Keep { 0.0 } else { 1.0 },
        ..CostBreakdown::default()
    };
    let min_gap = cfg.ego_idm().min_gap;
    for agent in &world.agents {
        for (m, p) in agent.probabilities.iter().enumerate() {
            let Some(slot) = agent.slot(m, child.k, child.lane) else { continue };
            let gap = world.gap_to(agent, child.s, &slot);
            if slot.s > child.s {
                c.j_f += p * follow_term(gap, child.v, min_gap, cfg.follow_time_gap);
            } else {
                c.j_c += p * courtesy_term(slot.v, gap, child.v, cfg);
            }
        }
    }
    Ok(c.weighted(w))
}
