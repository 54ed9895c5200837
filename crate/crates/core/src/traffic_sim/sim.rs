use std::io::Write;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::behavior_graph::{expand_accel_target, AccelKind, Action, BehaviorNode, BranchingMode, LonAction, PlannerConfig, VehicleState, World};
use crate::cost_model::{edge_cost, CostWeights};
use crate::error::{Error, Result};
use crate::geometry::{FrenetPose, LaneNetwork};
use crate::search::{plan, Heuristic, SearchResult, SearchStatus};
use crate::trajectory::{refine, Trajectory, TrajectorySample};

use super::agents::{advance_agents, choose_accelerations, pose_at, Agent, EgoSnapshot};
use super::collision::{collision, Footprint};
use super::prediction::{predict_agent, rollout, PredictionSet};

/// Braking target used when the planner finds no solution.
pub const FALLBACK_DECEL: f64 = -2.0;

/// Everything a closed-loop run needs besides the run parameters.
#[derive(Debug, Clone)]
pub struct SimSetup {
    pub lanes: LaneNetwork,
    pub ego: VehicleState,
    pub ego_length: f64,
    pub ego_width: f64,
    pub agents: Vec<Agent>,
    pub cfg: PlannerConfig,
    pub weights: CostWeights,
    pub dt_fine: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanSummary {
    pub status: SearchStatus,
    pub total_cost: f64,
    pub expansions: usize,
    pub generated: usize,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentSnapshot {
    pub id: String,
    pub lane: String,
    pub s: f64,
    pub v: f64,
    pub a: f64,
    pub x: Option<f64>,
    pub y: Option<f64>,
}

/// One simulated step: the state at its start and what happened during it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimStep {
    pub step: usize,
    pub t: f64,
    pub ego: VehicleState,
    pub ego_lane: String,
    pub agents: Vec<AgentSnapshot>,
    pub plan: PlanSummary,
    /// Executed action.
    pub action: Action,
    /// Cost of the executed edge.
    pub step_cost: f64,
    pub fallback: bool,
    pub collision: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SimLog {
    pub steps: Vec<SimStep>,
    /// Concatenation of the executed first steps of every refined plan.
    pub driven: Trajectory,
    pub collision: bool,
    pub fallbacks: usize,
    pub total_cost: f64,
}

impl SimLog {
    /// One JSON object per step.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        for s in &self.steps {
            serde_json::to_writer(&mut w, s).map_err(|e| Error::Io(e.to_string()))?;
            writeln!(w)?;
        }
        Ok(())
    }
}

fn ego_snapshot(lanes: &LaneNetwork, ego: &VehicleState, length: f64, width: f64) -> Result<EgoSnapshot> {
    let p = lanes.lane(ego.lane).frenet_to_cartesian(FrenetPose::new(ego.s, ego.d, 0.0))?;
    Ok(EgoSnapshot {
        pose: crate::geometry::CartesianPose::new(p.x, p.y, ego.theta, ego.kappa),
        v: ego.v,
        length,
        width,
    })
}

fn node(state: VehicleState) -> BehaviorNode {
    BehaviorNode {
        state,
        parent: None,
        action_in: None,
        g: 0.0,
        h: 0.0,
        cost_breakdown: Default::default(),
    }
}

/// Constant-velocity predictions of every agent still on its lane.
pub fn predict_all(agents: &[Agent], lanes: &LaneNetwork, cfg: &PlannerConfig) -> PredictionSet {
    PredictionSet {
        dt: cfg.dt,
        steps: cfg.horizon_steps,
        agents: agents
            .iter()
            .filter(|a| a.active(lanes))
            .map(|a| predict_agent(&a.id, a.lane, a.s, a.v, a.length, a.width, cfg.horizon_steps, cfg.dt))
            .collect(),
    }
}

/// One open-loop plan from the initial state, refined over the full horizon.
/// The trajectory is `None` when the search found no path.
pub fn plan_open_loop(setup: &SimSetup, heuristic: Heuristic, mode: BranchingMode) -> Result<(SearchResult, Option<Trajectory>)> {
    let cfg = &setup.cfg;
    cfg.validate()?;
    setup.weights.validate()?;
    let ego = VehicleState { k: 0, ..setup.ego };
    let predictions = predict_all(&setup.agents, &setup.lanes, cfg);
    let world = World::new(&setup.lanes, &predictions, &ego, setup.ego_length, setup.ego_width, cfg);
    let result = plan(ego, &world, cfg, &setup.weights, heuristic, mode);
    let traj = if result.is_ok() {
        Some(refine(&result.path, &setup.lanes, cfg.dt, setup.dt_fine)?)
    } else {
        None
    };
    Ok((result, traj))
}

/// Plans, executes the first step with perfect tracking and advances traffic,
/// `steps` times or until a collision.
pub fn run_closed_loop(setup: &SimSetup, heuristic: Heuristic, mode: BranchingMode, steps: usize, seed: u64) -> Result<SimLog> {
    let cfg = &setup.cfg;
    cfg.validate()?;
    setup.weights.validate()?;
    for a in &setup.agents {
        a.validate()?;
    }
    let lanes = &setup.lanes;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut agents = setup.agents.clone();
    let mut ego = VehicleState { k: 0, ..setup.ego };
    let mut log = SimLog {
        driven: Trajectory {
            samples: vec![],
            dt_fine: setup.dt_fine,
        },
        ..Default::default()
    };

    for step in 0..steps {
        let t0 = step as f64 * cfg.dt;
        let predictions = predict_all(&agents, lanes, cfg);
        let world = World::new(lanes, &predictions, &ego, setup.ego_length, setup.ego_width, cfg);
        let started = Instant::now();
        let result = plan(ego, &world, cfg, &setup.weights, heuristic, mode);
        let wall_ms = started.elapsed().as_secs_f64() * 1e3;

        let (next, action, step_cost, fallback) = if result.is_ok() {
            let n = &result.path[1];
            (n.state, n.action_in.expect("non-root nodes carry their action"), n.cost_breakdown.total, false)
        } else {
            let target = FALLBACK_DECEL.max(ego.a - cfg.max_accel_step).min(ego.a + cfg.max_accel_step);
            let next = expand_accel_target(lanes, &ego, target, cfg)?;
            let action = Action::keep(LonAction::Accel {
                target,
                kind: AccelKind::Fixed,
            });
            let c = edge_cost(&world, &ego, &next, &action, &setup.weights, cfg)?;
            (next, action, c.total, true)
        };

        let mut segment = refine(&[node(ego), node(next)], lanes, cfg.dt, setup.dt_fine)?;
        for s in &mut segment.samples {
            s.t += t0;
        }

        let accels = choose_accelerations(&agents, lanes, Some(&ego_snapshot(lanes, &ego, setup.ego_length, setup.ego_width)?), cfg, &mut rng)?;
        let hit = first_collision(&segment.samples, &agents, &accels, lanes, setup.ego_length, setup.ego_width, t0);

        log.steps.push(SimStep {
            step,
            t: t0,
            ego,
            ego_lane: lanes.lane(ego.lane).id.clone(),
            agents: agents
                .iter()
                .map(|a| {
                    let p = a.pose(lanes);
                    AgentSnapshot {
                        id: a.id.clone(),
                        lane: lanes.lane(a.lane).id.clone(),
                        s: a.s,
                        v: a.v,
                        a: a.a,
                        x: p.map(|p| p.x),
                        y: p.map(|p| p.y),
                    }
                })
                .collect(),
            plan: PlanSummary {
                status: result.status,
                total_cost: result.total_cost,
                expansions: result.expansions,
                generated: result.generated,
                wall_ms,
            },
            action,
            step_cost,
            fallback,
            collision: hit,
        });
        log.total_cost += step_cost;
        log.fallbacks += usize::from(fallback);

        let keep = segment.samples.len() - usize::from(step + 1 < steps && !hit);
        log.driven.samples.extend_from_slice(&segment.samples[..keep]);
        if hit {
            log.collision = true;
            break;
        }
        advance_agents(&mut agents, &accels, cfg.dt);
        ego = VehicleState { k: 0, ..next };
    }
    Ok(log)
}

fn first_collision(samples: &[TrajectorySample], agents: &[Agent], accels: &[f64], lanes: &LaneNetwork, ego_length: f64, ego_width: f64, t0: f64) -> bool {
    samples.iter().any(|smp| {
        let ego = Footprint::new(&smp.pose, ego_length, ego_width);
        agents.iter().zip(accels).any(|(a, &acc)| {
            let st = rollout(a.s, a.v, acc, smp.t - t0);
            pose_at(lanes, a.lane, st.s).is_some_and(|p| collision(&ego, &Footprint::new(&p, a.length, a.width)))
        })
    })
}
