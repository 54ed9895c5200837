use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Piecewise-constant-jerk profile that ends at rest acceleration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JerkProfile {
    /// `(duration s, jerk m/s³)` in order.
    pub phases: Vec<(f64, f64)>,
    pub total_time: f64,
    pub distance: f64,
    pub v_end: f64,
    pub a_end: f64,
    pub v0: f64,
    pub a0: f64,
}

impl JerkProfile {
    /// Distance, velocity and acceleration `t` seconds into the profile. Past
    /// the end the final state is held (constant velocity, zero acceleration).
    pub fn sample(&self, t: f64) -> (f64, f64, f64) {
        let (mut s, mut v, mut a) = (0.0, self.v0, self.a0);
        let mut rem = t.max(0.0);
        for &(dur, j) in &self.phases {
            let h = dur.min(rem);
            s += v * h + a * h * h / 2.0 + j * h * h * h / 6.0;
            v += a * h + j * h * h / 2.0;
            a += j * h;
            rem -= h;
            if rem <= 0.0 {
                return (s, v, a);
            }
        }
        (s + v * rem, v, a)
    }
}

/// Minimum-time jerk-limited transition from `(v0, a0)` to `v_target` with
/// zero final acceleration: jerk `±j_max`, optionally with a constant
/// acceleration phase at `±a_lim`.
pub fn time_optimal_velocity_profile(v0: f64, a0: f64, v_target: f64, j_max: f64, a_lim: f64) -> Result<JerkProfile> {
    if !(v0 >= 0.0 && v_target >= 0.0) {
        return Err(Error::InvalidInput(format!("speeds must be >= 0 (v0 = {v0}, target = {v_target})")));
    }
    if !(j_max > 0.0 && a_lim > 0.0) {
        return Err(Error::InvalidInput("j_max and a_lim must be > 0".into()));
    }
    if a0.abs() > a_lim + 1e-12 {
        return Err(Error::InvalidInput(format!("|a0| = {} exceeds a_lim = {a_lim}", a0.abs())));
    }

    let dv = v_target - v0;
    // velocity change caused by ramping a0 straight to zero
    let ramp_gain = a0 * a0.abs() / (2.0 * j_max);
    let mut phases = Vec::with_capacity(3);
    let gap = dv - ramp_gain;
    if gap.abs() <= 1e-12 {
        if a0 != 0.0 {
            phases.push((a0.abs() / j_max, -a0.signum() * j_max));
        }
    } else {
        let sigma = gap.signum();
        let peak_sq = (2.0 * sigma * j_max * dv + a0 * a0) / 2.0;
        let mut peak = sigma * peak_sq.max(0.0).sqrt();
        let mut cruise = 0.0;
        if peak.abs() > a_lim {
            peak = sigma * a_lim;
            let ramps = (peak * peak - a0 * a0) / (2.0 * sigma * j_max) + peak * peak / (2.0 * sigma * j_max);
            cruise = ((dv - ramps) / peak).max(0.0);
        }
        let t_up = ((peak - a0) / (sigma * j_max)).max(0.0);
        let t_down = peak.abs() / j_max;
        for (dur, jerk) in [(t_up, sigma * j_max), (cruise, 0.0), (t_down, -sigma * j_max)] {
            if dur > 0.0 {
                phases.push((dur, jerk));
            }
        }
    }

    let total_time = phases.iter().map(|p| p.0).sum();
    let mut profile = JerkProfile {
        phases,
        total_time,
        distance: 0.0,
        v_end: v0,
        a_end: a0,
        v0,
        a0,
    };
    let (s, v, a) = profile.sample(total_time);
    profile.distance = s;
    profile.v_end = v;
    profile.a_end = if a.abs() < 1e-12 { 0.0 } else { a };
    Ok(profile)
}
