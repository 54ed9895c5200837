use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::behavior_graph::PlannerConfig;
use crate::driver_models::{idm_acceleration, IdmParams, Leader};
use crate::error::{Error, Result};
use crate::geometry::{CartesianPose, FrenetPose, LaneId, LaneNetwork};

use super::prediction::rollout;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum AgentBehavior {
    /// Uniform random acceleration in `[lo, hi]` each step, capped so the
    /// agent does not run into whatever is ahead of it.
    RandomAccel { lo: f64, hi: f64 },
    IdmFollow,
}

impl Default for AgentBehavior {
    fn default() -> Self {
        AgentBehavior::RandomAccel { lo: -1.0, hi: 1.0 }
    }
}

/// A traffic participant driving along its lane centerline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Agent {
    pub id: String,
    pub lane: LaneId,
    pub s: f64,
    pub v: f64,
    /// Acceleration applied during the last step.
    pub a: f64,
    pub length: f64,
    pub width: f64,
    pub behavior: AgentBehavior,
}

impl Agent {
    pub fn validate(&self) -> Result<()> {
        if !(self.length > 0.0 && self.width > 0.0) {
            return Err(Error::InvalidInput(format!("agent `{}` needs a positive footprint", self.id)));
        }
        if !(self.v >= 0.0 && self.v.is_finite()) {
            return Err(Error::InvalidInput(format!("agent `{}` speed must be >= 0, got {}", self.id, self.v)));
        }
        if let AgentBehavior::RandomAccel { lo, hi } = self.behavior {
            if !(lo <= hi && lo.is_finite() && hi.is_finite()) {
                return Err(Error::InvalidInput(format!("agent `{}` has an empty acceleration range [{lo}, {hi}]", self.id)));
            }
        }
        Ok(())
    }

    /// Whether the agent is still on its lane (agents past the end have left the map).
    pub fn active(&self, lanes: &LaneNetwork) -> bool {
        lanes.lane(self.lane).contains(self.s)
    }

    pub fn pose(&self, lanes: &LaneNetwork) -> Option<CartesianPose> {
        pose_at(lanes, self.lane, self.s)
    }
}

pub(crate) fn pose_at(lanes: &LaneNetwork, lane: LaneId, s: f64) -> Option<CartesianPose> {
    let path = lanes.lane(lane);
    if path.contains(s) {
        path.frenet_to_cartesian(FrenetPose::new(s, 0.0, 0.0)).ok()
    } else {
        None
    }
}

/// The ego as seen by traffic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EgoSnapshot {
    pub pose: CartesianPose,
    pub v: f64,
    pub length: f64,
    pub width: f64,
}

fn leader_of(i: usize, agents: &[Agent], lanes: &LaneNetwork, ego: Option<&EgoSnapshot>, cfg: &PlannerConfig) -> Option<Leader> {
    let me = &agents[i];
    let path = lanes.lane(me.lane);
    let mut best: Option<Leader> = None;
    let mut offer = |gap: f64, speed: f64| {
        if best.map_or(true, |b| gap < b.gap) {
            best = Some(Leader::new(gap.max(1e-3), speed));
        }
    };
    for (j, other) in agents.iter().enumerate() {
        if j != i && other.lane == me.lane && other.active(lanes) && (other.s > me.s || (other.s == me.s && j > i)) {
            offer(other.s - me.s - 0.5 * (me.length + other.length), other.v);
        }
    }
    if let Some(e) = ego {
        if let Some(slot) = crate::behavior_graph::project_onto(lanes, me.lane, &e.pose, e.v, e.length, e.width, Some(me.s), cfg) {
            if slot.s > me.s {
                offer(slot.s - me.s - 0.5 * (me.length + e.length), slot.v);
            }
        }
    }
    if path.dead_end {
        offer(path.length() - me.s - 0.5 * me.length, 0.0);
    }
    best
}

/// Draws this step's accelerations. Random draws happen for every random
/// agent in order, so the stream position depends only on the agent list.
pub fn choose_accelerations<R: Rng>(agents: &[Agent], lanes: &LaneNetwork, ego: Option<&EgoSnapshot>, cfg: &PlannerConfig, rng: &mut R) -> Result<Vec<f64>> {
    let traffic = cfg.traffic_idm;
    let cap_params = IdmParams {
        v_desired: f64::INFINITY,
        ..traffic
    };
    let mut out = Vec::with_capacity(agents.len());
    for (i, agent) in agents.iter().enumerate() {
        let drawn = match agent.behavior {
            AgentBehavior::RandomAccel { lo, hi } => Some(if lo < hi { rng.gen_range(lo..=hi) } else { lo }),
            AgentBehavior::IdmFollow => None,
        };
        if !agent.active(lanes) {
            out.push(drawn.unwrap_or(0.0).max(0.0));
            continue;
        }
        let leader = leader_of(i, agents, lanes, ego, cfg);
        let a = match drawn {
            Some(a) => match leader {
                Some(l) => a.min(idm_acceleration(agent.v, Some(l), &cap_params)?),
                None => a,
            },
            None => idm_acceleration(agent.v, leader, &traffic)?,
        };
        out.push(a);
    }
    Ok(out)
}

/// Constant-acceleration update over `dt`; speeds never go negative.
pub fn advance_agents(agents: &mut [Agent], accels: &[f64], dt: f64) {
    for (agent, &a) in agents.iter_mut().zip(accels) {
        let next = rollout(agent.s, agent.v, a, dt);
        agent.s = next.s;
        agent.v = next.v;
        agent.a = a;
    }
}

/// One traffic step: choose accelerations, then integrate.
pub fn step_agents<R: Rng>(agents: &mut [Agent], lanes: &LaneNetwork, ego: Option<&EgoSnapshot>, cfg: &PlannerConfig, rng: &mut R) -> Result<()> {
    let accels = choose_accelerations(agents, lanes, ego, cfg, rng)?;
    advance_agents(agents, &accels, cfg.dt);
    Ok(())
}
