use crate::driver_models::{pure_pursuit::pure_pursuit_near, time_optimal_velocity_profile, JerkProfile};
use crate::error::{Error, Result};
use crate::geometry::{CartesianPose, FrenetPose, LaneId, LaneNetwork};

use super::feasibility::{check_feasibility, SubSample};
use super::{Action, LatAction, LonAction, PlannerConfig, VehicleState, World};

/// A state within this lateral tolerance of its lane centre is expanded in
/// the Frenet frame; anything else is steered back by Pure Pursuit.
pub(crate) const CENTER_D_TOL: f64 = 0.05;
pub(crate) const CENTER_THETA_TOL: f64 = 0.01;

/// Longitudinal motion over one step.
#[derive(Debug, Clone, PartialEq)]
pub enum LonMotion {
    /// Constant jerk from `a0`; when the speed would turn negative the
    /// vehicle stops at `t_stop` and holds.
    Cubic { v0: f64, a0: f64, jerk: f64, t_stop: Option<f64> },
    /// Time-optimal velocity-target profile followed by cruising.
    Profile(JerkProfile),
}

impl LonMotion {
    /// Constant-jerk motion from `(v0, a0)` to `a_target` over `dt`.
    pub fn cubic(v0: f64, a0: f64, a_target: f64, dt: f64) -> Self {
        let jerk = (a_target - a0) / dt;
        Self::Cubic {
            v0,
            a0,
            jerk,
            t_stop: first_stop(v0, a0, jerk, dt),
        }
    }

    /// Distance travelled, speed and acceleration at time `t`.
    pub fn at(&self, t: f64) -> (f64, f64, f64) {
        match self {
            Self::Cubic { v0, a0, jerk, t_stop } => {
                let cubic = |t: f64| {
                    (
                        v0 * t + a0 * t * t / 2.0 + jerk * t * t * t / 6.0,
                        v0 + a0 * t + jerk * t * t / 2.0,
                        a0 + jerk * t,
                    )
                };
                match t_stop {
                    Some(ts) if t >= *ts => (cubic(*ts).0, 0.0, 0.0),
                    _ => cubic(t),
                }
            }
            Self::Profile(p) => p.sample(t),
        }
    }

    pub fn stops(&self) -> bool {
        matches!(self, Self::Cubic { t_stop: Some(_), .. })
    }
}

/// First time in `[0, dt]` at which `v0 + a0 t + j t²/2` drops below zero.
fn first_stop(v0: f64, a0: f64, j: f64, dt: f64) -> Option<f64> {
    let v = |t: f64| v0 + a0 * t + j * t * t / 2.0;
    let t_min = if j > 0.0 { (-a0 / j).clamp(0.0, dt) } else { dt };
    let dips = v(dt) < -1e-12 || v(t_min) < -1e-12;
    if !dips {
        return None;
    }
    if v0 <= 0.0 {
        return Some(0.0);
    }
    if j.abs() < 1e-12 {
        return Some(-v0 / a0);
    }
    let disc = (a0 * a0 - 2.0 * j * v0).max(0.0).sqrt();
    let roots = [(-a0 - disc) / j, (-a0 + disc) / j];
    roots
        .into_iter()
        .filter(|&t| t >= 0.0 && t <= dt + 1e-12)
        .min_by(f64::total_cmp)
        .map(|t| t.min(dt))
}

/// Result of simulating one action.
#[derive(Debug, Clone, PartialEq)]
pub struct Expansion {
    pub state: VehicleState,
    pub samples: Vec<SubSample>,
    pub motion: LonMotion,
}

fn check_step(state: &VehicleState, a_target: f64, cfg: &PlannerConfig) -> Result<()> {
    if (a_target - state.a).abs() > cfg.max_accel_step + 1e-12 {
        return Err(Error::InvalidAction(format!(
            "acceleration step {:.3} -> {:.3} exceeds {}",
            state.a, a_target, cfg.max_accel_step
        )));
    }
    Ok(())
}

/// Constant-jerk step along the lane toward acceleration `a_i`.
pub fn expand_accel_target(lanes: &LaneNetwork, state: &VehicleState, a_i: f64, cfg: &PlannerConfig) -> Result<VehicleState> {
    check_step(state, a_i, cfg)?;
    let motion = LonMotion::cubic(state.v, state.a, a_i, cfg.dt);
    Ok(frenet_step(lanes, state, &motion, a_i, cfg)?.state)
}

/// Step that reaches `v_t` with zero acceleration within `dt` and cruises.
pub fn expand_velocity_target(lanes: &LaneNetwork, state: &VehicleState, v_t: f64, cfg: &PlannerConfig) -> Result<VehicleState> {
    let motion = velocity_motion(state, v_t, cfg)?;
    Ok(frenet_step(lanes, state, &motion, 0.0, cfg)?.state)
}

/// Pure Pursuit forward simulation toward `target_lane`.
pub fn expand_lane_change(lanes: &LaneNetwork, state: &VehicleState, target_lane: LaneId, a_i: f64, cfg: &PlannerConfig) -> Result<VehicleState> {
    check_step(state, a_i, cfg)?;
    let motion = LonMotion::cubic(state.v, state.a, a_i, cfg.dt);
    let exp = pursuit_step(lanes, state, target_lane, &motion, a_i, cfg)?;
    check_feasibility(&exp.samples, state.kappa, None, state.k, cfg).map_err(|v| Error::InvalidAction(format!("infeasible lane change: {v}")))?;
    Ok(exp.state)
}

pub(crate) fn velocity_motion(state: &VehicleState, v_t: f64, cfg: &PlannerConfig) -> Result<LonMotion> {
    check_step(state, 0.0, cfg)?;
    if state.a.abs() > cfg.a_lim {
        return Err(Error::InvalidAction(format!("|a| = {:.3} exceeds the profile limit", state.a.abs())));
    }
    let p = time_optimal_velocity_profile(state.v, state.a, v_t, cfg.j_max, cfg.a_lim)?;
    if p.total_time > cfg.dt + 1e-9 {
        return Err(Error::InvalidAction(format!(
            "velocity target {v_t:.2} needs {:.2} s > dt",
            p.total_time
        )));
    }
    Ok(LonMotion::Profile(p))
}

/// Whether `state` is close enough to its lane centre for Frenet expansion.
pub(crate) fn is_centered(lanes: &LaneNetwork, state: &VehicleState) -> bool {
    state.d.abs() <= CENTER_D_TOL && state.theta_rel(lanes).abs() <= CENTER_THETA_TOL
}

/// Simulates `action` from `state` and checks feasibility against `world`.
pub fn expand(world: &World, state: &VehicleState, action: &Action, cfg: &PlannerConfig) -> Result<Expansion> {
    let lanes = world.lanes;
    let (motion, a_end) = match action.lon {
        LonAction::Accel { target, .. } => {
            check_step(state, target, cfg)?;
            (LonMotion::cubic(state.v, state.a, target, cfg.dt), target)
        }
        LonAction::Velocity { target } => (velocity_motion(state, target, cfg)?, 0.0),
    };
    let target_lane = match action.lat {
        LatAction::Keep => Some(state.lane),
        LatAction::Left => lanes.left_of(state.lane),
        LatAction::Right => lanes.right_of(state.lane),
    }
    .ok_or_else(|| Error::InvalidAction(format!("no {:?} neighbour", action.lat)))?;

    let exp = if action.lat == LatAction::Keep && is_centered(lanes, state) {
        frenet_step(lanes, state, &motion, a_end, cfg)?
    } else {
        pursuit_step(lanes, state, target_lane, &motion, a_end, cfg)?
    };
    check_feasibility(&exp.samples, state.kappa, Some(world), state.k, cfg).map_err(|v| Error::InvalidAction(v.to_string()))?;
    Ok(exp)
}

fn end_kinematics(motion: &LonMotion, a_end: f64, dt: f64) -> (f64, f64, f64) {
    let (ds, v, a) = motion.at(dt);
    // stopping ends at rest; otherwise land exactly on the commanded target
    let a = if motion.stops() { 0.0 } else if matches!(motion, LonMotion::Profile(_)) { a } else { a_end };
    (ds, v.max(0.0), if a.abs() < 1e-15 { 0.0 } else { a })
}

fn frenet_step(
    lanes: &LaneNetwork,
    state: &VehicleState,
    motion: &LonMotion,
    a_end: f64,
    cfg: &PlannerConfig,
) -> Result<Expansion> {
    let lane = lanes.lane(state.lane);
    let theta_rel = state.theta_rel(lanes);
    let n = cfg.substeps();
    let h = cfg.dt / n as f64;
    let t0 = state.k as f64 * cfg.dt;
    let mut samples = Vec::with_capacity(n);
    for j in 1..=n {
        let t = j as f64 * h;
        let (ds, v, a) = motion.at(t);
        let s = state.s + ds;
        let pose = lane
            .frenet_to_cartesian(FrenetPose::new(s, state.d, theta_rel))
            .map_err(|e| Error::InvalidAction(format!("leaves lane domain: {e}")))?;
        samples.push(SubSample {
            t: t0 + t,
            x: pose.x,
            y: pose.y,
            theta: pose.theta,
            kappa: pose.kappa,
            v,
            a,
            v_prev: motion.at(t - h).1,
        });
    }
    let (ds, v, a) = end_kinematics(motion, a_end, cfg.dt);
    let last = samples.last().expect("at least one sub-step");
    let child = VehicleState {
        s: state.s + ds,
        d: state.d,
        theta: last.theta,
        kappa: last.kappa,
        v,
        a,
        k: state.k + 1,
        lane: state.lane,
    };
    Ok(Expansion {
        state: child,
        samples,
        motion: motion.clone(),
    })
}

fn pursuit_step(
    lanes: &LaneNetwork,
    state: &VehicleState,
    target_lane: LaneId,
    motion: &LonMotion,
    a_end: f64,
    cfg: &PlannerConfig,
) -> Result<Expansion> {
    let domain = |e: Error| Error::InvalidAction(format!("lateral simulation failed: {e}"));
    let target = lanes.lane(target_lane);
    let start = lanes
        .lane(state.lane)
        .frenet_to_cartesian(FrenetPose::new(state.s, state.d, 0.0))
        .map_err(domain)?;
    let (mut x, mut y, mut theta) = (start.x, start.y, state.theta);
    let mut hint = if target_lane == state.lane {
        state.s
    } else {
        target
            .cartesian_to_frenet_near(&start, state.s)
            .map_err(domain)?
            .s
    };

    let n = cfg.substeps();
    let h = cfg.dt / n as f64;
    let t0 = state.k as f64 * cfg.dt;
    let mut samples = Vec::with_capacity(n);
    let mut kappa = state.kappa;
    let (mut dist, mut v, _) = motion.at(0.0);
    for j in 0..n {
        let pose = CartesianPose::new(x, y, theta, kappa);
        let (k_cmd, foot) = pure_pursuit_near(&pose, target, cfg.lookahead(v), cfg.kappa_max, hint).map_err(domain)?;
        hint = foot.s;
        kappa = k_cmd;
        let t = (j + 1) as f64 * h;
        let (dist1, v1, a1) = motion.at(t);
        let step = dist1 - dist;
        let dtheta = kappa * step;
        let half = dtheta / 2.0;
        let sinc = if half.abs() < 1e-9 { 1.0 - half * half / 6.0 } else { half.sin() / half };
        x += step * sinc * (theta + half).cos();
        y += step * sinc * (theta + half).sin();
        theta += dtheta;
        samples.push(SubSample {
            t: t0 + t,
            x,
            y,
            theta,
            kappa,
            v: v1,
            a: a1,
            v_prev: v,
        });
        dist = dist1;
        v = v1;
    }

    let end = CartesianPose::new(x, y, theta, kappa);
    let f = target.cartesian_to_frenet_near(&end, hint).map_err(domain)?;
    let (_, v_end, a) = end_kinematics(motion, a_end, cfg.dt);
    let child = VehicleState {
        s: f.s,
        d: f.d,
        theta: end.theta,
        kappa,
        v: v_end,
        a,
        k: state.k + 1,
        lane: target_lane,
    };
    Ok(Expansion {
        state: child,
        samples,
        motion: motion.clone(),
    })
}
