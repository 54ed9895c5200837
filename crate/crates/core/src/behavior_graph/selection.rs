use crate::driver_models::{idm_acceleration, mobil_decision, LaneChangeDecision, LaneContext};
use crate::geometry::LaneId;

use super::expansion::{expand, velocity_motion, Expansion};
use super::{AccelKind, Action, BranchingMode, LatAction, LonAction, PlannerConfig, VehicleState, World};

/// Actions to expand at `state` under the given branching `mode`.
pub fn select_actions(world: &World, state: &VehicleState, cfg: &PlannerConfig, mode: BranchingMode) -> Vec<Action> {
    if state.k >= world.steps {
        return Vec::new();
    }
    let step_ok = |a: f64| (a - state.a).abs() <= cfg.max_accel_step + 1e-12;
    let ego_idm = cfg.ego_idm();

    // car-following context: a leader within the IDM interaction range
    let leader = world.idm_leader(state.lane, state.s, state.k);
    let range = ego_idm.min_gap + 3.0 * state.v * ego_idm.time_headway;
    let a_idm = match leader {
        Some(l) if l.gap <= range && mode != BranchingMode::Baseline => idm_acceleration(state.v, Some(l), &ego_idm)
            .ok()
            .map(|a| a.clamp(state.a - cfg.max_accel_step, state.a + cfg.max_accel_step)),
        _ => None,
    };

    let mut accel = Vec::new();
    for &a_i in &cfg.accel_set {
        if !step_ok(a_i) {
            continue;
        }
        if let (BranchingMode::Proposed, Some(ai)) = (mode, a_idm) {
            if (a_i - ai).abs() <= cfg.idm_gate_margin {
                continue;
            }
        }
        accel.push(LonAction::Accel {
            target: a_i,
            kind: AccelKind::Fixed,
        });
    }
    if let Some(target) = a_idm {
        accel.push(LonAction::Accel { target, kind: AccelKind::Idm });
    }

    let mut actions: Vec<Action> = accel.iter().map(|&lon| Action::keep(lon)).collect();
    if mode != BranchingMode::Baseline {
        for v_t in [cfg.v_desired, 0.0] {
            if velocity_motion(state, v_t, cfg).is_ok() {
                actions.push(Action::keep(LonAction::Velocity { target: v_t }));
            }
        }
    }

    let sides = [
        (LatAction::Left, world.lanes.left_of(state.lane)),
        (LatAction::Right, world.lanes.right_of(state.lane)),
    ];
    for (lat, target) in sides {
        let Some(target) = target else { continue };
        if !lane_change_allowed(world, state, target, cfg, mode) {
            continue;
        }
        actions.extend(accel.iter().map(|&lon| Action { lon, lat }));
    }
    actions
}

fn context(world: &World, lane: LaneId, s: f64, k: usize) -> LaneContext {
    LaneContext {
        leader: world.leader(lane, s, k),
        follower: world.follower(lane, s, k),
    }
}

fn lane_change_allowed(world: &World, state: &VehicleState, target: LaneId, cfg: &PlannerConfig, mode: BranchingMode) -> bool {
    let Some(s_target) = world.ego_s_on(state, target) else {
        return false;
    };
    let tgt = context(world, target, s_target, state.k);
    let free = |n: Option<crate::driver_models::Neighbor>| n.map_or(true, |n| n.gap > 0.0);
    if !free(tgt.leader) || !free(tgt.follower) {
        return false;
    }
    if mode != BranchingMode::Proposed {
        return true;
    }
    let cur = context(world, state.lane, state.s, state.k);
    // overlapping vehicles on the current lane leave MOBIL undefined
    let cur = LaneContext {
        leader: cur.leader.filter(|n| n.gap > 0.0),
        follower: cur.follower.filter(|n| n.gap > 0.0),
    };
    matches!(
        mobil_decision(state.v, world.ego_length, &cur, &tgt, &cfg.ego_idm(), &cfg.traffic_idm, &cfg.mobil),
        Ok(LaneChangeDecision::Change)
    )
}

/// Feasible children of `state`; actions producing identical states are
/// merged, keeping the first.
pub fn children(world: &World, state: &VehicleState, cfg: &PlannerConfig, mode: BranchingMode) -> Vec<(Action, Expansion)> {
    let mut out: Vec<(Action, Expansion)> = Vec::new();
    for action in select_actions(world, state, cfg, mode) {
        if let Ok(exp) = expand(world, state, &action, cfg) {
            if !out.iter().any(|(_, e)| e.state == exp.state) {
                out.push((action, exp));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_lane_path, LaneNetwork, Vec2};
    use crate::traffic_sim::{predict_agent, PredictionSet};

    fn road(two: bool) -> LaneNetwork {
        let mut r = build_lane_path(&[Vec2::new(0.0, 0.0), Vec2::new(2000.0, 0.0)], 1.0).unwrap().with_id("r");
        if !two {
            return LaneNetwork::new(vec![r]).unwrap();
        }
        let mut l = build_lane_path(&[Vec2::new(0.0, 3.5), Vec2::new(2000.0, 3.5)], 1.0).unwrap().with_id("l");
        r.left_neighbor = Some("l".into());
        l.right_neighbor = Some("r".into());
        LaneNetwork::new(vec![r, l]).unwrap()
    }

    fn lon_targets(actions: &[Action]) -> Vec<f64> {
        actions
            .iter()
            .filter(|a| a.lat == LatAction::Keep)
            .filter_map(|a| match a.lon {
                LonAction::Accel { target, kind: AccelKind::Fixed } => Some(target),
                _ => None,
            })
            .collect()
    }

    #[test]
    fn free_road_at_desired_speed() {
        let lanes = road(true);
        let cfg = PlannerConfig { v_desired: 10.0, ..PlannerConfig::default() };
        let ego = VehicleState::on_lane(&lanes, 0, 100.0, 0.0, 0.0, 10.0, 0.0, 0).unwrap();
        let world = World::new(&lanes, &PredictionSet::default(), &ego, 4.5, 2.0, &cfg);
        let acts = select_actions(&world, &ego, &cfg, BranchingMode::Proposed);
        assert_eq!(lon_targets(&acts), vec![-1.0, 0.0, 1.0]);
        assert!(acts.contains(&Action::keep(LonAction::Velocity { target: 10.0 })));
        assert!(acts.iter().all(|a| a.lat == LatAction::Keep), "MOBIL sees no incentive on an empty road");
        let passive = select_actions(&world, &ego, &cfg, BranchingMode::Passive);
        assert!(passive.iter().any(|a| a.lat == LatAction::Left));
    }

    #[test]
    fn car_following_prunes_near_idm() {
        let lanes = road(false);
        let cfg = PlannerConfig { v_desired: 15.0, ..PlannerConfig::default() };
        let mut ego = VehicleState::on_lane(&lanes, 0, 100.0, 0.0, 0.0, 10.0, 0.0, 0).unwrap();
        let ego_idm = cfg.ego_idm();
        // pick the leader gap so the IDM asks for -0.4 m/s²
        let gap = {
            let (mut lo, mut hi) = (1.0, 200.0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                let a = idm_acceleration(10.0, Some(crate::driver_models::Leader::new(mid, 10.0)), &ego_idm).unwrap();
                if a < -0.4 {
                    lo = mid
                } else {
                    hi = mid
                }
            }
            0.5 * (lo + hi)
        };
        let preds = PredictionSet {
            dt: 1.0,
            steps: 10,
            agents: vec![predict_agent("lead", 0, 100.0 + gap + 4.5, 10.0, 4.5, 2.0, 10, 1.0)],
        };
        ego.a = -0.3;
        let world = World::new(&lanes, &preds, &ego, 4.5, 2.0, &cfg);
        let acts = select_actions(&world, &ego, &cfg, BranchingMode::Proposed);
        assert_eq!(lon_targets(&acts), vec![-2.0, -1.0, 1.0]);
        assert!(acts.iter().any(|a| matches!(a.lon, LonAction::Accel { kind: AccelKind::Idm, target } if (target + 0.4).abs() < 1e-6)));
        let passive = select_actions(&world, &ego, &cfg, BranchingMode::Passive);
        assert_eq!(lon_targets(&passive), vec![-2.0, -1.0, 0.0, 1.0]);
    }

    #[test]
    fn baseline_fixed_only() {
        let lanes = road(false);
        let cfg = PlannerConfig::default();
        let ego = VehicleState::on_lane(&lanes, 0, 100.0, 0.0, 0.0, 10.0, 1.0, 0).unwrap();
        let world = World::new(&lanes, &PredictionSet::default(), &ego, 4.5, 2.0, &cfg);
        let acts = select_actions(&world, &ego, &cfg, BranchingMode::Baseline);
        assert_eq!(lon_targets(&acts), vec![-0.0f64.max(-0.0), 1.0, 2.0].iter().map(|&x| if x == 0.0 { 0.0 } else { x }).collect::<Vec<_>>());
        assert_eq!(acts.len(), 3);
    }

    #[test]
    fn slow_leader_triggers_mobil() {
        let lanes = road(true);
        let cfg = PlannerConfig { v_desired: 15.0, ..PlannerConfig::default() };
        let ego = VehicleState::on_lane(&lanes, 0, 100.0, 0.0, 0.0, 10.0, 0.0, 0).unwrap();
        let preds = PredictionSet {
            dt: 1.0,
            steps: 10,
            agents: vec![predict_agent("slow", 0, 100.0 + 5.0 + 4.5, 5.0, 4.5, 2.0, 10, 1.0)],
        };
        let world = World::new(&lanes, &preds, &ego, 4.5, 2.0, &cfg);
        let acts = select_actions(&world, &ego, &cfg, BranchingMode::Proposed);
        assert!(acts.iter().any(|a| a.lat == LatAction::Left));
        assert!(acts.iter().all(|a| a.lat != LatAction::Right));
    }
}
