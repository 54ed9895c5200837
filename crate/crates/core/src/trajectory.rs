//! Quintic refinement of behavior paths into densely sampled trajectories.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::behavior_graph::{BehaviorNode, VehicleState};
use crate::error::{Error, Result};
use crate::geometry::{normalize_angle, CartesianPose, FrenetPose, LaneId, LaneNetwork};

/// Position, velocity and acceleration of one coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Boundary {
    pub p: f64,
    pub v: f64,
    pub a: f64,
}

impl Boundary {
    pub fn new(p: f64, v: f64, a: f64) -> Self {
        Self { p, v, a }
    }
}

/// `p(t) = Σ c_i t^i` on `[0, duration]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quintic {
    pub c: [f64; 6],
}

impl Quintic {
    /// Value and first three derivatives at `t`.
    pub fn eval(&self, t: f64) -> [f64; 4] {
        let c = &self.c;
        [
            c[0] + t * (c[1] + t * (c[2] + t * (c[3] + t * (c[4] + t * c[5])))),
            c[1] + t * (2.0 * c[2] + t * (3.0 * c[3] + t * (4.0 * c[4] + t * 5.0 * c[5]))),
            2.0 * c[2] + t * (6.0 * c[3] + t * (12.0 * c[4] + t * 20.0 * c[5])),
            6.0 * c[3] + t * (24.0 * c[4] + t * 60.0 * c[5]),
        ]
    }
}

/// The quintic matching position, velocity and acceleration at both ends.
pub fn fit_segment(b0: Boundary, b1: Boundary, duration: f64) -> Result<Quintic> {
    if !(duration > 0.0) {
        return Err(Error::InvalidInput(format!("segment duration must be > 0, got {duration}")));
    }
    let t = duration;
    let h = b1.p - (b0.p + b0.v * t + b0.a * t * t / 2.0);
    let dv = b1.v - (b0.v + b0.a * t);
    let da = b1.a - b0.a;
    Ok(Quintic {
        c: [
            b0.p,
            b0.v,
            b0.a / 2.0,
            (10.0 * h - 4.0 * dv * t + da * t * t / 2.0) / t.powi(3),
            (-15.0 * h + 7.0 * dv * t - da * t * t) / t.powi(4),
            (6.0 * h - 3.0 * dv * t + da * t * t / 2.0) / t.powi(5),
        ],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub pose: CartesianPose,
    pub v: f64,
    pub a: f64,
    pub jerk: f64,
    pub lane: LaneId,
    pub s: f64,
    pub d: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    pub dt_fine: f64,
}

impl Trajectory {
    /// CSV with header `t,x,y,theta,v,a,jerk`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,x,y,theta,v,a,jerk")?;
        for s in &self.samples {
            writeln!(w, "{},{},{},{},{},{},{}", s.t, s.pose.x, s.pose.y, s.pose.theta, s.v, s.a, s.jerk)?;
        }
        Ok(())
    }

    pub fn duration(&self) -> f64 {
        match (self.samples.first(), self.samples.last()) {
            (Some(a), Some(b)) => b.t - a.t,
            _ => 0.0,
        }
    }
}

/// Frenet boundary conditions `(s, d)` of a state in `lane`'s frame.
fn boundaries(lanes: &LaneNetwork, state: &VehicleState, lane: LaneId) -> Result<(Boundary, Boundary)> {
    let path = lanes.lane(lane);
    let (s, d, theta_rel) = if lane == state.lane {
        (state.s, state.d, state.theta_rel(lanes))
    } else {
        let here = lanes
            .lane(state.lane)
            .frenet_to_cartesian(FrenetPose::new(state.s, state.d, 0.0))?;
        let pose = CartesianPose::new(here.x, here.y, state.theta, state.kappa);
        let f = path.cartesian_to_frenet_near(&pose, state.s)?;
        (f.s, f.d, f.theta_rel)
    };
    let kc = path.curvature_at(s);
    let omega = state.v * (state.kappa - kc / (1.0 - d * kc));
    let (sin, cos) = theta_rel.sin_cos();
    Ok((
        Boundary::new(s, state.v * cos, state.a * cos - state.v * sin * omega),
        Boundary::new(d, state.v * sin, state.a * sin + state.v * cos * omega),
    ))
}

/// Samples of one segment at local times `taus`.
fn sample_segment(lanes: &LaneNetwork, lane: LaneId, qs: &Quintic, qd: &Quintic, t0: f64, taus: impl Iterator<Item = f64>, out: &mut Vec<TrajectorySample>) -> Result<()> {
    let path = lanes.lane(lane);
    for tau in taus {
        let [s, sd, sdd, sddd] = qs.eval(tau);
        let [d, dd, ddd, dddd] = qd.eval(tau);
        let v = sd.hypot(dd);
        let (a, jerk) = if v > 1e-6 {
            let a = (sd * sdd + dd * ddd) / v;
            (a, (sdd * sdd + ddd * ddd + sd * sddd + dd * dddd - a * a) / v)
        } else {
            (sdd, sddd)
        };
        let s_c = s.clamp(0.0, path.length());
        let base = path
            .frenet_to_cartesian(FrenetPose::new(s_c, d, 0.0))
            .map_err(|e| Error::InvalidInput(format!("refined sample off lane `{}`: {e}", path.id)))?;
        let rel = if v > 1e-6 { dd.atan2(sd) } else { 0.0 };
        let kappa = if v > 1e-6 { base.kappa + (sd * ddd - dd * sdd) / v.powi(3) } else { base.kappa };
        out.push(TrajectorySample {
            t: t0 + tau,
            pose: CartesianPose::new(base.x, base.y, normalize_angle(base.theta + rel), kappa),
            v,
            a,
            jerk,
            lane,
            s,
            d,
        });
    }
    Ok(())
}

/// Fits per-step quintics in `s` and `d` (in the frame of each step's end
/// lane) and samples them every `dt_fine`. Knots are shared between steps, so
/// each sample time appears once.
pub fn refine(path: &[BehaviorNode], lanes: &LaneNetwork, dt: f64, dt_fine: f64) -> Result<Trajectory> {
    if path.is_empty() {
        return Err(Error::InvalidInput("cannot refine an empty path".into()));
    }
    if !(dt_fine > 0.0 && dt_fine <= 0.1 + 1e-12) {
        return Err(Error::InvalidInput(format!("dt_fine must be in (0, 0.1], got {dt_fine}")));
    }
    let per_step = (dt / dt_fine).round() as usize;
    if per_step == 0 || (per_step as f64 * dt_fine - dt).abs() > 1e-9 {
        return Err(Error::InvalidInput("dt_fine must divide dt".into()));
    }
    for n in path {
        if n.state.lane >= lanes.len() {
            return Err(Error::InvalidInput(format!("state on unknown lane index {}", n.state.lane)));
        }
    }
    let mut samples = Vec::with_capacity(per_step * path.len() + 1);
    let mut last_fit = None;
    for pair in path.windows(2) {
        let (a, b) = (&pair[0].state, &pair[1].state);
        let lane = b.lane;
        let (s0, d0) = boundaries(lanes, a, lane)?;
        let (s1, d1) = boundaries(lanes, b, lane)?;
        let qs = fit_segment(s0, s1, dt)?;
        let qd = fit_segment(d0, d1, dt)?;
        let t0 = a.k as f64 * dt;
        sample_segment(lanes, lane, &qs, &qd, t0, (0..per_step).map(|j| j as f64 * dt_fine), &mut samples)?;
        last_fit = Some((lane, qs, qd, t0));
    }
    // closing sample: the end of the last segment, or the lone state held
    match last_fit {
        Some((lane, qs, qd, t0)) => sample_segment(lanes, lane, &qs, &qd, t0, std::iter::once(dt), &mut samples)?,
        None => {
            let st = &path[0].state;
            let (sb, db) = boundaries(lanes, st, st.lane)?;
            let hold = |b: Boundary| Quintic { c: [b.p, b.v, b.a / 2.0, 0.0, 0.0, 0.0] };
            sample_segment(lanes, st.lane, &hold(sb), &hold(db), st.k as f64 * dt, std::iter::once(0.0), &mut samples)?;
        }
    }
    Ok(Trajectory { samples, dt_fine })
}
