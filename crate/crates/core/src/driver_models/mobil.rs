use serde::{Deserialize, Serialize};

use super::idm::{idm_unclamped, IdmParams, Leader};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MobilParams {
    pub politeness: f64,
    pub a_threshold: f64,
    pub b_safe: f64,
}

impl Default for MobilParams {
    fn default() -> Self {
        Self {
            politeness: 0.5,
            a_threshold: 0.1,
            b_safe: 4.0,
        }
    }
}

impl MobilParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.politeness) {
            return Err(Error::InvalidInput(format!("politeness must be in [0, 1], got {}", self.politeness)));
        }
        if !(self.a_threshold >= 0.0) {
            return Err(Error::InvalidInput(format!("a_threshold must be >= 0, got {}", self.a_threshold)));
        }
        if !(self.b_safe > 0.0) {
            return Err(Error::InvalidInput(format!("b_safe must be > 0, got {}", self.b_safe)));
        }
        Ok(())
    }
}

/// A vehicle adjacent to the ego: bumper-to-bumper gap (m) and speed (m/s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub gap: f64,
    pub speed: f64,
}

impl Neighbor {
    pub fn new(gap: f64, speed: f64) -> Self {
        Self { gap, speed }
    }
}

/// Leader and follower of the ego position on one lane; `None` marks absence.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LaneContext {
    pub leader: Option<Neighbor>,
    pub follower: Option<Neighbor>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LaneChangeDecision {
    Change,
    Stay,
}

/// MOBIL lane-change rule.
///
/// `ego_idm` drives the ego's own accelerations, `traffic_idm` those of the
/// old and new followers. Accelerations are the raw IDM demands (no `b_hard`
/// clamp) so the safety bound sees the full braking a follower would need.
pub fn mobil_decision(
    ego_speed: f64,
    ego_length: f64,
    current: &LaneContext,
    target: &LaneContext,
    ego_idm: &IdmParams,
    traffic_idm: &IdmParams,
    p: &MobilParams,
) -> Result<LaneChangeDecision> {
    for (name, n) in [
        ("current leader", current.leader),
        ("current follower", current.follower),
        ("target leader", target.leader),
        ("target follower", target.follower),
    ] {
        if let Some(n) = n {
            if !(n.gap > 0.0) {
                return Err(Error::InvalidInput(format!("{name} gap must be > 0, got {}", n.gap)));
            }
        }
    }
    let as_leader = |n: Neighbor| Leader::new(n.gap, n.speed);
    // leader of a follower once the ego is out of the way
    let bridged = |follower: Neighbor, leader: Option<Neighbor>| {
        leader.map(|l| Leader::new(follower.gap + ego_length + l.gap, l.speed))
    };

    let a_e = idm_unclamped(ego_speed, current.leader.map(as_leader), ego_idm)?;
    let a_e_new = idm_unclamped(ego_speed, target.leader.map(as_leader), ego_idm)?;

    let (mut d_new_follower, mut safe) = (0.0, true);
    if let Some(n) = target.follower {
        let before = idm_unclamped(n.speed, bridged(n, target.leader), traffic_idm)?;
        let after = idm_unclamped(n.speed, Some(Leader::new(n.gap, ego_speed)), traffic_idm)?;
        safe = after >= -p.b_safe;
        d_new_follower = after - before;
    }
    let mut d_old_follower = 0.0;
    if let Some(o) = current.follower {
        let before = idm_unclamped(o.speed, Some(Leader::new(o.gap, ego_speed)), traffic_idm)?;
        let after = idm_unclamped(o.speed, bridged(o, current.leader), traffic_idm)?;
        d_old_follower = after - before;
    }

    let incentive = a_e_new - a_e + p.politeness * (d_new_follower + d_old_follower);
    Ok(if safe && incentive > p.a_threshold {
        LaneChangeDecision::Change
    } else {
        LaneChangeDecision::Stay
    })
}
