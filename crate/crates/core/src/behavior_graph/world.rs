use crate::driver_models::{Leader, Neighbor};
use crate::geometry::{normalize_angle, CartesianPose, FrenetPose, LaneId, LaneNetwork};
use crate::traffic_sim::{Footprint, PredictionSet};

use super::{PlannerConfig, VehicleState};

/// An agent's position expressed in some lane's Frenet frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaneSlot {
    pub s: f64,
    pub d: f64,
    /// Speed component along the lane, floored at 0.
    pub v: f64,
}

/// Precomputed per-agent data for one planning cycle.
#[derive(Debug, Clone)]
pub struct AgentTrack {
    pub id: String,
    pub lane: LaneId,
    pub length: f64,
    pub width: f64,
    pub probabilities: Vec<f64>,
    /// Index of the most likely hypothesis.
    pub most_likely: usize,
    /// `slots[m][k][lane]`: hypothesis `m` at step `k` seen from `lane`.
    slots: Vec<Vec<Vec<Option<LaneSlot>>>>,
    /// Inflated most-likely footprints on the sub-step grid.
    footprints: Vec<Option<Footprint>>,
    /// Followers already behind the ego in its lane are not collision-checked.
    pub collision_exempt: bool,
}

impl AgentTrack {
    pub fn slot(&self, m: usize, k: usize, lane: LaneId) -> Option<LaneSlot> {
        self.slots[m].get(k).and_then(|row| row[lane])
    }

    pub fn hypotheses(&self) -> usize {
        self.slots.len()
    }

    pub(crate) fn footprint(&self, index: usize) -> Option<&Footprint> {
        self.footprints.get(index).and_then(|f| f.as_ref())
    }
}

/// Traffic context of one planning cycle; immutable during the search.
#[derive(Debug, Clone)]
pub struct World<'a> {
    pub lanes: &'a LaneNetwork,
    pub agents: Vec<AgentTrack>,
    pub ego_length: f64,
    pub ego_width: f64,
    pub steps: usize,
    pub dt: f64,
    pub substeps: usize,
    lane_kappa: Vec<f64>,
}

impl<'a> World<'a> {
    /// Builds the context for a search rooted at `ego`.
    pub fn new(lanes: &'a LaneNetwork, predictions: &PredictionSet, ego: &VehicleState, ego_length: f64, ego_width: f64, cfg: &PlannerConfig) -> Self {
        let steps = cfg.horizon_steps;
        let n = cfg.substeps();
        let h = cfg.dt / n as f64;
        let mut agents = Vec::with_capacity(predictions.agents.len());
        for p in &predictions.agents {
            let own = lanes.lane(p.lane);
            let pose_of = |s: f64| {
                if own.contains(s) {
                    own.frenet_to_cartesian(FrenetPose::new(s, 0.0, 0.0)).ok()
                } else {
                    None
                }
            };
            let mut slots = Vec::with_capacity(p.hypotheses.len());
            for hyp in &p.hypotheses {
                let mut hints: Vec<Option<f64>> = vec![None; lanes.len()];
                let mut per_k = Vec::with_capacity(steps + 1);
                for k in 0..=steps {
                    let st = hyp.state_at(k as f64 * cfg.dt);
                    let mut row = vec![None; lanes.len()];
                    if let Some(pose) = pose_of(st.s) {
                        for (l, cell) in row.iter_mut().enumerate() {
                            *cell = if l == p.lane {
                                Some(LaneSlot { s: st.s, d: 0.0, v: st.v })
                            } else {
                                project_onto(lanes, l, &pose, st.v, p.length, p.width, hints[l], cfg)
                            };
                            if let Some(c) = cell {
                                hints[l] = Some(c.s);
                            }
                        }
                    }
                    per_k.push(row);
                }
                slots.push(per_k);
            }

            let ml = p.most_likely();
            let hyp = &p.hypotheses[ml];
            let footprints = (0..=steps * n)
                .map(|i| {
                    let t = i as f64 * h;
                    pose_of(hyp.state_at(t).s).map(|pose| {
                        let lon = cfg.margin_lon + (cfg.margin_growth * t * t).min(cfg.margin_lon_max);
                        Footprint::new(&pose, p.length, p.width).inflated(lon, cfg.margin_lat)
                    })
                })
                .collect();

            let collision_exempt = slots[ml][0][ego.lane].is_some_and(|s| s.s < ego.s);
            agents.push(AgentTrack {
                id: p.agent_id.clone(),
                lane: p.lane,
                length: p.length,
                width: p.width,
                probabilities: p.hypotheses.iter().map(|h| h.probability).collect(),
                most_likely: ml,
                slots,
                footprints,
                collision_exempt,
            });
        }
        Self {
            lanes,
            agents,
            ego_length,
            ego_width,
            steps,
            dt: cfg.dt,
            substeps: n,
            lane_kappa: lanes.lanes().iter().map(|l| l.max_abs_curvature()).collect(),
        }
    }

    /// Bumper-to-bumper gap from an ego at `s_ego` to an agent slot.
    pub fn gap_to(&self, agent: &AgentTrack, s_ego: f64, slot: &LaneSlot) -> f64 {
        (slot.s - s_ego).abs() - 0.5 * (self.ego_length + agent.length)
    }

    /// Closest most-likely leader ahead of `s_ego` on `lane` at step `k`,
    /// including the end of a dead-end lane as a stationary obstacle.
    pub fn leader(&self, lane: LaneId, s_ego: f64, k: usize) -> Option<Neighbor> {
        let mut best: Option<Neighbor> = None;
        for a in &self.agents {
            if let Some(slot) = a.slot(a.most_likely, k, lane) {
                if slot.s > s_ego {
                    let gap = self.gap_to(a, s_ego, &slot);
                    if best.map_or(true, |b| gap < b.gap) {
                        best = Some(Neighbor::new(gap, slot.v));
                    }
                }
            }
        }
        let path = self.lanes.lane(lane);
        if path.dead_end {
            let gap = path.length() - s_ego - 0.5 * self.ego_length;
            if best.map_or(true, |b| gap < b.gap) {
                best = Some(Neighbor::new(gap, 0.0));
            }
        }
        best
    }

    /// Closest most-likely follower behind `s_ego` on `lane` at step `k`.
    pub fn follower(&self, lane: LaneId, s_ego: f64, k: usize) -> Option<Neighbor> {
        let mut best: Option<Neighbor> = None;
        for a in &self.agents {
            if let Some(slot) = a.slot(a.most_likely, k, lane) {
                if slot.s <= s_ego {
                    let gap = self.gap_to(a, s_ego, &slot);
                    if best.map_or(true, |b| gap < b.gap) {
                        best = Some(Neighbor::new(gap, slot.v));
                    }
                }
            }
        }
        best
    }

    /// IDM leader for the ego, with the gap floored so overlapping
    /// configurations still yield (maximal) braking.
    pub fn idm_leader(&self, lane: LaneId, s_ego: f64, k: usize) -> Option<Leader> {
        self.leader(lane, s_ego, k).map(|n| Leader::new(n.gap.max(1e-3), n.speed))
    }

    /// Ego arc position on another lane, if it projects within that lane's corridor.
    pub fn ego_s_on(&self, state: &VehicleState, lane: LaneId) -> Option<f64> {
        if lane == state.lane {
            return Some(state.s);
        }
        let here = self.lanes.lane(state.lane).frenet_to_cartesian(FrenetPose::new(state.s, state.d, 0.0)).ok()?;
        self.lanes.lane(lane).cartesian_to_frenet_near(&here, state.s).ok().map(|f| f.s)
    }

    pub fn lane_max_kappa(&self, lane: LaneId) -> f64 {
        self.lane_kappa[lane]
    }

    /// Index into the sub-step grid for step `k`, sub-step `j`.
    pub(crate) fn substep_index(&self, k: usize, j: usize) -> usize {
        k * self.substeps + j
    }
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn project_onto(
    lanes: &LaneNetwork,
    lane: LaneId,
    pose: &CartesianPose,
    v: f64,
    length: f64,
    width: f64,
    hint: Option<f64>,
    cfg: &PlannerConfig,
) -> Option<LaneSlot> {
    let path = lanes.lane(lane);
    let f = match hint {
        Some(s) => path.cartesian_to_frenet_near(pose, s),
        None => path.cartesian_to_frenet(pose),
    }
    .ok()?;
    let rel = normalize_angle(pose.theta - path.heading_at(f.s));
    let half_extent = 0.5 * (length * rel.sin().abs() + width * rel.cos().abs());
    if f.d.abs() > cfg.lane_half_width + half_extent {
        return None;
    }
    Some(LaneSlot {
        s: f.s,
        d: f.d,
        v: (v * rel.cos()).max(0.0),
    })
}
