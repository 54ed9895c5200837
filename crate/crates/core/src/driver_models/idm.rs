use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IdmParams {
    /// Desired speed `v0` (m/s). `f64::INFINITY` disables the free-road term.
    pub v_desired: f64,
    pub time_headway: f64,
    pub min_gap: f64,
    pub a_max: f64,
    pub b_comf: f64,
    pub delta: f64,
    /// Lower clamp of the returned acceleration (m/s², positive).
    pub b_hard: f64,
}

impl Default for IdmParams {
    fn default() -> Self {
        Self {
            v_desired: 13.9,
            time_headway: 1.5,
            min_gap: 2.0,
            a_max: 2.0,
            b_comf: 1.5,
            delta: 4.0,
            b_hard: 4.0,
        }
    }
}

impl IdmParams {
    pub fn with_desired_speed(self, v_desired: f64) -> Self {
        Self { v_desired, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("v_desired", self.v_desired),
            ("time_headway", self.time_headway),
            ("min_gap", self.min_gap),
            ("a_max", self.a_max),
            ("b_comf", self.b_comf),
            ("b_hard", self.b_hard),
        ];
        for (name, v) in positive {
            if !(v > 0.0) {
                return Err(Error::InvalidInput(format!("IDM {name} must be > 0, got {v}")));
            }
        }
        if !(self.delta >= 1.0) {
            return Err(Error::InvalidInput(format!("IDM delta must be >= 1, got {}", self.delta)));
        }
        Ok(())
    }

    /// Desired dynamic gap `s*`.
    pub fn desired_gap(&self, v: f64, v_lead: f64) -> f64 {
        let dv = v - v_lead;
        let dynamic = v * self.time_headway + v * dv / (2.0 * (self.a_max * self.b_comf).sqrt());
        self.min_gap + dynamic.max(0.0)
    }
}

/// Bumper-to-bumper gap to, and speed of, the vehicle ahead.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Leader {
    pub gap: f64,
    pub speed: f64,
}

impl Leader {
    pub fn new(gap: f64, speed: f64) -> Self {
        Self { gap, speed }
    }
}

/// IDM acceleration, clamped to `[-b_hard, a_max]`.
pub fn idm_acceleration(v_ego: f64, leader: Option<Leader>, p: &IdmParams) -> Result<f64> {
    Ok(idm_unclamped(v_ego, leader, p)?.clamp(-p.b_hard, p.a_max))
}

/// IDM law without the `b_hard` clamp; lane-change safety needs the raw demand.
pub(crate) fn idm_unclamped(v_ego: f64, leader: Option<Leader>, p: &IdmParams) -> Result<f64> {
    if v_ego < 0.0 || !v_ego.is_finite() {
        return Err(Error::InvalidInput(format!("ego speed must be >= 0, got {v_ego}")));
    }
    let free = if p.v_desired.is_infinite() {
        1.0
    } else {
        1.0 - (v_ego / p.v_desired).powf(p.delta)
    };
    let interaction = match leader {
        None => 0.0,
        Some(l) => {
            if !(l.gap > 0.0) {
                return Err(Error::InvalidInput(format!("leader gap must be > 0, got {}", l.gap)));
            }
            let ratio = p.desired_gap(v_ego, l.speed) / l.gap;
            ratio * ratio
        }
    };
    Ok(p.a_max * (free - interaction))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn free_road_cases() {
        let p = IdmParams::default().with_desired_speed(15.0);
        assert_eq!(idm_acceleration(15.0, None, &p).unwrap(), 0.0);
        assert_eq!(idm_acceleration(0.0, None, &p).unwrap(), p.a_max);
    }

    #[test]
    fn leader_at_desired_gap() {
        let p = IdmParams {
            v_desired: 15.0,
            a_max: 1.5,
            delta: 4.0,
            ..IdmParams::default()
        };
        let s_star = p.desired_gap(10.0, 10.0);
        let a = idm_acceleration(10.0, Some(Leader::new(s_star, 10.0)), &p).unwrap();
        let expected = -1.5 * (10.0f64 / 15.0).powi(4);
        assert!((a - expected).abs() < 1e-12);
        assert!((a + 0.296).abs() < 1e-3);
    }

    #[test]
    fn rejects_bad_gap() {
        let p = IdmParams::default();
        assert!(idm_acceleration(5.0, Some(Leader::new(0.0, 3.0)), &p).is_err());
        assert!(idm_acceleration(5.0, Some(Leader::new(-1.0, 3.0)), &p).is_err());
    }

    proptest! {
        #[test]
        fn monotone_in_speed_and_gap(v in 0.0f64..30.0, dv in 0.0f64..5.0, gap in 0.5f64..200.0,
                                     dg in 0.0f64..50.0, vl in 0.0f64..30.0) {
            let p = IdmParams::default();
            let l = Some(Leader::new(gap, vl));
            let a = idm_acceleration(v, l, &p).unwrap();
            prop_assert!(idm_acceleration(v + dv, l, &p).unwrap() <= a + 1e-12);
            prop_assert!(idm_acceleration(v, Some(Leader::new(gap + dg, vl)), &p).unwrap() >= a - 1e-12);
            prop_assert!(idm_acceleration(v + dv, None, &p).unwrap() <= idm_acceleration(v, None, &p).unwrap() + 1e-12);
        }
    }
}
