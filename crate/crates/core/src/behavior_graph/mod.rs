//! Search-tree nodes, actions, branching and state expansion.

mod expansion;
mod feasibility;
mod selection;
mod world;

use serde::{Deserialize, Serialize};

use crate::cost_model::CostBreakdown;
use crate::driver_models::{IdmParams, MobilParams};
use crate::error::{Error, Result};
use crate::geometry::{normalize_angle, FrenetPose, LaneId, LaneNetwork};

pub use expansion::{expand, expand_accel_target, expand_lane_change, expand_velocity_target, Expansion, LonMotion};
pub use feasibility::{check_feasibility, SubSample, Violation};
pub(crate) use expansion::is_centered;
pub use selection::{children, select_actions};
pub use world::{AgentTrack, LaneSlot, World};
pub(crate) use world::project_onto;

/// Lane-relative kinematic state at time step `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VehicleState {
    pub s: f64,
    pub d: f64,
    /// Global heading (rad).
    pub theta: f64,
    pub kappa: f64,
    pub v: f64,
    pub a: f64,
    pub k: usize,
    pub lane: LaneId,
}

impl VehicleState {
    /// State on `lane` from Frenet coordinates; heading and curvature come
    /// from the lane geometry.
    #[allow(clippy::too_many_arguments)]
    pub fn on_lane(lanes: &LaneNetwork, lane: LaneId, s: f64, d: f64, theta_rel: f64, v: f64, a: f64, k: usize) -> Result<Self> {
        let c = lanes.lane(lane).frenet_to_cartesian(FrenetPose::new(s, d, theta_rel))?;
        Ok(Self {
            s,
            d,
            theta: c.theta,
            kappa: c.kappa,
            v,
            a,
            k,
            lane,
        })
    }

    pub fn theta_rel(&self, lanes: &LaneNetwork) -> f64 {
        normalize_angle(self.theta - lanes.lane(self.lane).heading_at(self.s))
    }
}

/// Kind of an acceleration target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AccelKind {
    /// Drawn from the configured set.
    Fixed,
    /// Suggested by the IDM.
    Idm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LonAction {
    Accel { target: f64, kind: AccelKind },
    Velocity { target: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LatAction {
    Keep,
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Action {
    pub lon: LonAction,
    pub lat: LatAction,
}

impl Action {
    pub fn keep(lon: LonAction) -> Self {
        Self { lon, lat: LatAction::Keep }
    }

    pub fn accel(target: f64) -> Self {
        Self::keep(LonAction::Accel {
            target,
            kind: AccelKind::Fixed,
        })
    }
}

/// Which branching strategy generates children.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BranchingMode {
    /// Model-gated branching: IDM similarity pruning and MOBIL lane-change gate.
    #[default]
    Proposed,
    /// Same action universe, lane changes gated only by free gaps.
    Passive,
    /// Fixed accelerations only.
    Baseline,
}

impl std::str::FromStr for BranchingMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "proposed" => Ok(Self::Proposed),
            "passive" => Ok(Self::Passive),
            "baseline" => Ok(Self::Baseline),
            _ => Err(Error::InvalidInput(format!("unknown mode `{s}` (proposed, passive, baseline)"))),
        }
    }
}

impl std::fmt::Display for BranchingMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Proposed => "proposed",
            Self::Passive => "passive",
            Self::Baseline => "baseline",
        })
    }
}

/// Search-tree node.
#[derive(Debug, Clone, PartialEq)]
pub struct BehaviorNode {
    pub state: VehicleState,
    pub parent: Option<usize>,
    pub action_in: Option<Action>,
    pub g: f64,
    pub h: f64,
    pub cost_breakdown: CostBreakdown,
}

/// Planner parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerConfig {
    pub dt: f64,
    pub horizon_steps: usize,
    pub accel_set: Vec<f64>,
    /// Fixed targets closer than this to the IDM suggestion are pruned.
    pub idm_gate_margin: f64,
    pub max_accel_step: f64,
    pub v_desired: f64,
    pub kappa_max: f64,
    pub kappa_dot_max: f64,
    pub a_abs_max: f64,
    /// Jerk and acceleration limits of velocity-target profiles.
    pub j_max: f64,
    pub a_lim: f64,
    pub sub_step: f64,
    pub lookahead_min: f64,
    /// Lookahead time gain (s): lookahead = max(min, gain * v).
    pub lookahead_gain: f64,
    pub lane_half_width: f64,
    /// Agent rectangles are grown by `lon + min(growth * t², lon_max)` at
    /// each end and `lat` at each side during collision checks.
    pub margin_lon: f64,
    pub margin_growth: f64,
    pub margin_lon_max: f64,
    pub margin_lat: f64,
    /// Time gap of the following-distance cost (s).
    pub follow_time_gap: f64,
    pub max_expansions: usize,
    /// Ego IDM used for the model action and MOBIL. Softer than the traffic
    /// defaults so that following a leader does not chase every fluctuation;
    /// the standstill gap stays clear of the longitudinal collision margin.
    pub idm: IdmParams,
    pub traffic_idm: IdmParams,
    pub mobil: MobilParams,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            dt: 1.0,
            horizon_steps: 10,
            accel_set: vec![-2.0, -1.0, 0.0, 1.0, 2.0],
            idm_gate_margin: 0.5,
            max_accel_step: 1.9,
            v_desired: 13.9,
            kappa_max: 0.25,
            kappa_dot_max: 1.0,
            a_abs_max: 3.0,
            j_max: 2.0,
            a_lim: 2.0,
            sub_step: 0.1,
            lookahead_min: 8.0,
            lookahead_gain: 2.5,
            lane_half_width: 1.75,
            margin_lon: 0.5,
            margin_growth: 0.25,
            margin_lon_max: 2.0,
            margin_lat: 0.2,
            follow_time_gap: 1.5,
            max_expansions: 200_000,
            idm: IdmParams {
                min_gap: 3.5,
                a_max: 0.5,
                b_comf: 1.0,
                ..IdmParams::default()
            },
            traffic_idm: IdmParams::default(),
            mobil: MobilParams::default(),
        }
    }
}

impl PlannerConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("dt", self.dt),
            ("v_desired", self.v_desired),
            ("kappa_max", self.kappa_max),
            ("kappa_dot_max", self.kappa_dot_max),
            ("a_abs_max", self.a_abs_max),
            ("j_max", self.j_max),
            ("a_lim", self.a_lim),
            ("sub_step", self.sub_step),
            ("lookahead_min", self.lookahead_min),
            ("lane_half_width", self.lane_half_width),
            ("max_accel_step", self.max_accel_step),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidInput(format!("planner.{name} must be > 0, got {v}")));
            }
        }
        if self.horizon_steps == 0 {
            return Err(Error::InvalidInput("planner.horizon_steps must be >= 1".into()));
        }
        if self.accel_set.is_empty() || self.accel_set.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidInput("planner.accel_set must be non-empty and strictly increasing".into()));
        }
        let n = (self.dt / self.sub_step).round();
        if (n * self.sub_step - self.dt).abs() > 1e-9 {
            return Err(Error::InvalidInput("planner.sub_step must divide dt".into()));
        }
        self.idm.validate()?;
        self.traffic_idm.validate()?;
        self.mobil.validate()
    }

    /// Sub-steps per planning step.
    pub fn substeps(&self) -> usize {
        (self.dt / self.sub_step).round() as usize
    }

    /// Ego IDM parameters with the planner's desired speed.
    pub fn ego_idm(&self) -> IdmParams {
        self.idm.with_desired_speed(self.v_desired)
    }

    pub(crate) fn lookahead(&self, v: f64) -> f64 {
        crate::driver_models::lookahead_distance(v, self.lookahead_min, self.lookahead_gain)
    }

    pub(crate) fn a_min(&self) -> f64 {
        self.accel_set[0].min(-self.idm.b_hard)
    }

    pub(crate) fn a_max(&self) -> f64 {
        self.accel_set[self.accel_set.len() - 1].max(self.idm.a_max)
    }
}
