use serde::{Deserialize, Serialize};

use crate::behavior_graph::{BehaviorNode, PlannerConfig, VehicleState, World};

use super::{courtesy_term, follow_term, CostBreakdown, CostWeights};

/// Lanes curvier than this skip the forced-braking bound: the arc-length
/// separation used there no longer bounds rectangle overlap reliably.
const BRAKING_BOUND_MAX_KAPPA: f64 = 0.02;
/// Shrink factor applied to the separation distance in the braking bound.
const SEPARATION_RELAXATION: f64 = 0.95;

/// Per-step cost-to-go lower bounds and their sum.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct HeuristicBound {
    /// Entry `n - 1` bounds the edge into step `k + n`.
    pub per_step: Vec<CostBreakdown>,
    pub value: f64,
}

pub fn heuristic_h0(_node: &BehaviorNode) -> f64 {
    0.0
}

/// Reachable speed, acceleration and (single-lane) position ranges for the
/// steps after a state, over every action any branching mode can take.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeedEnvelope {
    pub v_lo: Vec<f64>,
    pub v_hi: Vec<f64>,
    pub a_lo: Vec<f64>,
    pub a_hi: Vec<f64>,
    pub s_lo: Vec<f64>,
    pub s_hi: Vec<f64>,
}

impl SpeedEnvelope {
    pub fn new(state: &VehicleState, steps: usize, cfg: &PlannerConfig) -> Self {
        let dt = cfg.dt;
        let step = cfg.max_accel_step;
        let (a_min, a_max) = (cfg.a_min(), cfg.a_max());
        let vd = cfg.v_desired;
        let jm = cfg.j_max;
        let mut e = Self {
            v_lo: vec![state.v],
            v_hi: vec![state.v],
            a_lo: vec![state.a],
            a_hi: vec![state.a],
            s_lo: vec![state.s],
            s_hi: vec![state.s],
        };
        let pos = |x: f64| x.max(0.0);
        let neg = |x: f64| x.min(0.0);
        for n in 0..steps {
            let (vl, vh, al, ah) = (e.v_lo[n], e.v_hi[n], e.a_lo[n], e.a_hi[n]);
            // zero is always admitted: stops and velocity targets end there
            let ah1 = (ah + step).min(a_max).max(0.0);
            let al1 = (al - step).max(a_min).min(0.0);
            let gain_up = (cfg.a_lim * dt).min(pos(ah) * dt + jm * dt * dt / 4.0);
            let gain_down = (cfg.a_lim * dt).min(pos(-al) * dt + jm * dt * dt / 4.0);

            let mut vh1 = pos(vh + (ah + ah1) * dt / 2.0);
            let mut vl1 = vl + (al + al1) * dt / 2.0;
            if vd <= vh + gain_up && vd >= vl - gain_down {
                vh1 = vh1.max(vd);
                vl1 = vl1.min(vd);
            }
            let may_stop = vl1 <= 0.0 || vl <= 0.5 * step * dt || vl - gain_down <= 0.0;
            if may_stop {
                vl1 = 0.0;
            }
            let peak = (vh + (pos(ah) + pos(ah1)) * dt / 2.0).max(vh + pos(ah).powi(2) / (2.0 * jm)).max(vh1);
            let floor = (vl + (neg(al) + neg(al1)) * dt / 2.0).min(vl - neg(al).powi(2) / (2.0 * jm)).min(vl1).max(0.0);

            e.v_lo.push(vl1);
            e.v_hi.push(vh1);
            e.a_lo.push(al1);
            e.a_hi.push(ah1);
            e.s_lo.push(e.s_lo[n] + floor * dt);
            e.s_hi.push(e.s_hi[n] + peak * dt);
        }
        e
    }
}

/// Admissible bound on the cost-to-go of `state`.
///
/// Speed terms use the reachable-speed envelope. Gap and braking terms are
/// only bounded while the ego cannot leave its lane; otherwise they are 0.
pub fn heuristic_h_all(world: &World, state: &VehicleState, w: &CostWeights, cfg: &PlannerConfig) -> HeuristicBound {
    let remaining = world.steps.saturating_sub(state.k);
    if remaining == 0 {
        return HeuristicBound::default();
    }
    let env = SpeedEnvelope::new(state, remaining, cfg);
    let mut per_step = vec![CostBreakdown::default(); remaining];

    let vd = cfg.v_desired;
    for (n, c) in per_step.iter_mut().enumerate() {
        let (lo, hi) = (env.v_lo[n + 1], env.v_hi[n + 1]);
        let nearest = vd.clamp(lo, hi);
        let x = (nearest - vd) / vd;
        c.j_v = x * x;
    }

    // Gap and braking bounds need the ego pinned to its lane: no neighbour to
    // change to and already centred (so every descendant stays in the frame).
    let lanes = world.lanes;
    let pinned = lanes.left_of(state.lane).is_none()
        && lanes.right_of(state.lane).is_none()
        && crate::behavior_graph::is_centered(lanes, state);
    if pinned {
        gap_bounds(world, state, &env, &mut per_step, cfg);
        if world.lane_max_kappa(state.lane) <= BRAKING_BOUND_MAX_KAPPA {
            let (sa, sj) = forced_braking(world, state, &env, cfg);
            let share = 1.0 / remaining as f64;
            for c in per_step.iter_mut() {
                c.j_a = sa * share;
                c.j_adot = sj * share;
            }
        }
    }

    let mut value = 0.0;
    for c in per_step.iter_mut() {
        *c = c.weighted(w);
        value += c.total;
    }
    HeuristicBound { per_step, value }
}

fn gap_bounds(world: &World, state: &VehicleState, env: &SpeedEnvelope, per_step: &mut [CostBreakdown], cfg: &PlannerConfig) {
    let min_gap = cfg.ego_idm().min_gap;
    for (n, c) in per_step.iter_mut().enumerate() {
        let i = n + 1;
        for agent in &world.agents {
            let half = 0.5 * (world.ego_length + agent.length);
            for (m, p) in agent.probabilities.iter().enumerate() {
                let Some(slot) = agent.slot(m, state.k + i, state.lane) else { continue };
                if slot.s > env.s_hi[i] {
                    let gap = slot.s - env.s_lo[i] - half;
                    c.j_f += p * follow_term(gap, env.v_lo[i], min_gap, cfg.follow_time_gap);
                } else if slot.s <= env.s_lo[i] {
                    let gap = env.s_hi[i] - slot.s - half;
                    c.j_c += p * courtesy_term(slot.v, gap, env.v_hi[i], cfg);
                }
            }
        }
    }
}

/// Sum of squared position coefficients of the accelerations over `m` steps.
fn accel_coeff_sq(m: usize, dt: f64) -> f64 {
    let sq: f64 = (1..m).map(|q| (q * q) as f64).sum();
    dt.powi(4) * (1.0 / 36.0 + sq)
}

/// Same for acceleration increments.
fn increment_coeff_sq(m: usize, dt: f64) -> f64 {
    let sq: f64 = (0..m)
        .map(|q| {
            let c = 1.0 / 6.0 + (q * (q + 1)) as f64 / 2.0;
            c * c
        })
        .sum();
    dt.powi(4) * sq
}

/// Lower bounds on the remaining sums of `a²` and `(Δa/dt)²` forced by the
/// need to stay behind the most likely prediction of each vehicle ahead.
///
/// For a run of constant-jerk steps, the position after `m` steps is affine
/// in the chosen accelerations, so staying behind a limit that the zero-input
/// motion would cross needs, by Cauchy–Schwarz, at least `r² / Σc²`.
/// Velocity-target steps reset the state to `(s, v_d, 0)`, so each step also
/// considers a run restarting from the last such step at its least advanced
/// position. Steps after a possible stop are left out.
fn forced_braking(world: &World, state: &VehicleState, env: &SpeedEnvelope, cfg: &PlannerConfig) -> (f64, f64) {
    let dt = cfg.dt;
    let remaining = env.v_lo.len() - 1;
    let horizon = (1..=remaining).find(|&n| env.v_lo[n] <= 0.0).map_or(remaining, |n| n - 1);
    let vd = cfg.v_desired;
    let (mut best_a, mut best_j) = (0.0f64, 0.0f64);

    for agent in &world.agents {
        if agent.lane != state.lane || agent.collision_exempt {
            continue;
        }
        let ml = agent.most_likely;
        match agent.slot(ml, state.k, state.lane) {
            Some(now) if now.s > state.s => {}
            _ => continue,
        }
        for n in 1..=horizon {
            let Some(slot) = agent.slot(ml, state.k + n, state.lane) else { continue };
            let t = (state.k + n) as f64 * dt;
            let margin = cfg.margin_lon + (cfg.margin_growth * t * t).min(cfg.margin_lon_max);
            let limit = slot.s - SEPARATION_RELAXATION * (0.5 * (world.ego_length + agent.length) + margin);

            let nf = n as f64;
            let base_a = state.s + state.v * nf * dt + state.a * (dt * dt / 3.0 + (nf - 1.0) * dt * dt / 2.0);
            let base_j = state.s + state.v * nf * dt + state.a * nf * nf * dt * dt / 2.0;
            let bound = |r: f64, csq: f64| if r < 0.0 { r * r / csq } else { 0.0 };
            let mut case_a = bound(limit - base_a, accel_coeff_sq(n, dt));
            let mut case_j = bound(limit - base_j, increment_coeff_sq(n, dt)) / (dt * dt);

            for j in 1..=n {
                if !(env.v_lo[j] <= vd && vd <= env.v_hi[j]) {
                    continue;
                }
                let m = n - j;
                if m == 0 {
                    case_a = 0.0;
                    case_j = 0.0;
                    break;
                }
                let base = env.s_lo[j] + vd * m as f64 * dt;
                case_a = case_a.min(bound(limit - base, accel_coeff_sq(m, dt)));
                case_j = case_j.min(bound(limit - base, increment_coeff_sq(m, dt)) / (dt * dt));
            }
            best_a = best_a.max(case_a);
            best_j = best_j.max(case_j);
        }
    }
    (best_a, best_j)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::behavior_graph::LonMotion;
    use crate::driver_models::time_optimal_velocity_profile;
    use crate::geometry::{build_lane_path, LaneNetwork, Vec2};
    use crate::traffic_sim::PredictionSet;
    use proptest::prelude::*;

    fn single() -> LaneNetwork {
        LaneNetwork::new(vec![build_lane_path(&[Vec2::new(0.0, 0.0), Vec2::new(1000.0, 0.0)], 1.0).unwrap()]).unwrap()
    }

    fn cfg(vd: f64) -> PlannerConfig {
        PlannerConfig { v_desired: vd, ..PlannerConfig::default() }
    }

    #[test]
    fn zero_at_horizon_and_on_free_road() {
        let lanes = single();
        let c = cfg(10.0);
        let s = VehicleState::on_lane(&lanes, 0, 0.0, 0.0, 0.0, 10.0, 0.0, 0).unwrap();
        let world = World::new(&lanes, &PredictionSet::default(), &s, 4.5, 2.0, &c);
        assert_eq!(heuristic_h_all(&world, &s, &CostWeights::default(), &c).value, 0.0);
        let end = VehicleState { k: c.horizon_steps, ..s };
        let h = heuristic_h_all(&world, &end, &CostWeights::default(), &c);
        assert_eq!(h.value, 0.0);
        assert!(h.per_step.is_empty());
    }

    #[test]
    fn speed_deficit_first_step() {
        let lanes = single();
        let c = cfg(10.0);
        let s = VehicleState::on_lane(&lanes, 0, 0.0, 0.0, 0.0, 6.0, 0.0, 0).unwrap();
        let world = World::new(&lanes, &PredictionSet::default(), &s, 4.5, 2.0, &c);
        let w = CostWeights { w_v: 1.0, ..CostWeights::default() };
        let h = heuristic_h_all(&world, &s, &w, &c);
        // fastest first step: jerk to +1.9 m/s², 6 + 0.95 = 6.95 m/s
        assert!((h.per_step[0].j_v - 0.305f64.powi(2)).abs() < 1e-12);
    }

    /// Exhaustive speed enumeration over fixed, IDM-like and velocity-target
    /// transitions; the envelope must contain every reachable speed.
    fn reachable(v: f64, a: f64, depth: usize, max_depth: usize, c: &PlannerConfig, grid: &[f64], out: &mut [Vec<f64>]) {
        if depth == max_depth {
            return;
        }
        let mut next = Vec::new();
        for &a1 in grid {
            if (a1 - a).abs() > c.max_accel_step + 1e-12 {
                continue;
            }
            let m = LonMotion::cubic(v, a, a1, c.dt);
            let (_, v1, _) = m.at(c.dt);
            next.push((v1.max(0.0), if m.stops() { 0.0 } else { a1 }));
        }
        for vt in [c.v_desired, 0.0] {
            if a.abs() <= c.a_lim && a.abs() <= c.max_accel_step {
                if let Ok(p) = time_optimal_velocity_profile(v, a, vt, c.j_max, c.a_lim) {
                    if p.total_time <= c.dt + 1e-9 {
                        next.push((vt, 0.0));
                    }
                }
            }
        }
        for (v1, a1) in next {
            out[depth + 1].push(v1);
            reachable(v1, a1, depth + 1, max_depth, c, grid, out);
        }
    }

    proptest! {
        #[test]
        fn envelope_contains_enumerated_speeds(v in 0.0f64..15.0, a in -2.0f64..2.0, vd in 3.0f64..15.0) {
            let c = cfg(vd);
            let grid: Vec<f64> = (-8..=4).map(|i| i as f64 * 0.5).collect();
            let s = VehicleState { s: 0.0, d: 0.0, theta: 0.0, kappa: 0.0, v, a, k: 0, lane: 0 };
            let env = SpeedEnvelope::new(&s, 3, &c);
            let mut out = vec![Vec::new(); 4];
            reachable(v, a, 0, 3, &c, &grid, &mut out);
            for (n, speeds) in out.iter().enumerate().skip(1) {
                for &x in speeds {
                    prop_assert!(x >= env.v_lo[n] - 1e-9 && x <= env.v_hi[n] + 1e-9, "step {} speed {} not in [{}, {}]", n, x, env.v_lo[n], env.v_hi[n]);
                }
            }
        }
    }

    #[test]
    fn coefficient_sums_match_direct_rollout() {
        // position after m steps as a function of each acceleration, by finite differences
        let dt = 0.7;
        for m in 1..6 {
            let roll = |acc: &[f64]| {
                let (mut s, mut v, mut a) = (0.0, 0.0, 0.0);
                for &a1 in acc {
                    s += v * dt + dt * dt * (a / 3.0 + a1 / 6.0);
                    v += dt * (a + a1) / 2.0;
                    a = a1;
                }
                s
            };
            let mut sq_a = 0.0;
            let mut sq_j = 0.0;
            for l in 0..m {
                let mut e = vec![0.0; m];
                e[l] = 1.0;
                let c = roll(&e);
                sq_a += c * c;
                let step: Vec<f64> = (0..m).map(|q| if q >= l { 1.0 } else { 0.0 }).collect();
                let c = roll(&step);
                sq_j += c * c;
            }
            assert!((sq_a - accel_coeff_sq(m, dt)).abs() < 1e-12, "{m}");
            assert!((sq_j - increment_coeff_sq(m, dt)).abs() < 1e-12, "{m}");
        }
    }
}
