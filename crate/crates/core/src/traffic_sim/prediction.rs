use serde::{Deserialize, Serialize};

use crate::geometry::LaneId;

/// Default hypothesis set: constant velocity, mild braking, mild acceleration.
pub const DEFAULT_HYPOTHESES: [(f64, f64); 3] = [(0.0, 0.5), (-0.5, 0.25), (0.5, 0.25)];

/// Position and speed along the agent's own lane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictedState {
    pub s: f64,
    pub v: f64,
}

/// Constant-acceleration rollout along the agent's lane, stopping at `v = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub probability: f64,
    pub accel: f64,
    /// `states[k]` is the state at `t = k * dt`; index 0 is the current state.
    pub states: Vec<PredictedState>,
}

/// Piecewise constant-acceleration motion that holds once stopped.
pub fn rollout(s0: f64, v0: f64, accel: f64, t: f64) -> PredictedState {
    let t = t.max(0.0);
    if accel < 0.0 && v0 + accel * t < 0.0 {
        let t_stop = v0 / -accel;
        PredictedState {
            s: s0 + v0 * t_stop / 2.0,
            v: 0.0,
        }
    } else {
        PredictedState {
            s: s0 + v0 * t + accel * t * t / 2.0,
            v: v0 + accel * t,
        }
    }
}

impl Hypothesis {
    pub fn new(s0: f64, v0: f64, accel: f64, probability: f64, steps: usize, dt: f64) -> Self {
        Self {
            probability,
            accel,
            states: (0..=steps).map(|k| rollout(s0, v0, accel, k as f64 * dt)).collect(),
        }
    }

    /// State at an arbitrary time, evaluated analytically.
    pub fn state_at(&self, t: f64) -> PredictedState {
        let s0 = self.states[0];
        rollout(s0.s, s0.v, self.accel, t)
    }
}

/// All hypotheses for one agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentPrediction {
    pub agent_id: String,
    pub lane: LaneId,
    pub length: f64,
    pub width: f64,
    pub hypotheses: Vec<Hypothesis>,
}

impl AgentPrediction {
    /// Index of the most likely hypothesis (first one on ties).
    pub fn most_likely(&self) -> usize {
        let mut best = 0;
        for (i, h) in self.hypotheses.iter().enumerate() {
            if h.probability > self.hypotheses[best].probability {
                best = i;
            }
        }
        best
    }
}

/// Predictions for every agent over one planning horizon.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PredictionSet {
    pub dt: f64,
    pub steps: usize,
    pub agents: Vec<AgentPrediction>,
}

/// Rolls out the default three-hypothesis set for an agent at `(s, v)`.
#[allow(clippy::too_many_arguments)]
pub fn predict_agent(id: &str, lane: LaneId, s: f64, v: f64, length: f64, width: f64, steps: usize, dt: f64) -> AgentPrediction {
    AgentPrediction {
        agent_id: id.to_string(),
        lane,
        length,
        width,
        hypotheses: DEFAULT_HYPOTHESES
            .iter()
            .map(|&(a, p)| Hypothesis::new(s, v, a, p, steps, dt))
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_velocity_hypothesis() {
        let p = predict_agent("a", 0, 5.0, 10.0, 4.5, 2.0, 5, 1.0);
        let cv = &p.hypotheses[p.most_likely()];
        assert_eq!(cv.accel, 0.0);
        assert!((cv.states[3].s - 35.0).abs() < 1e-12);
    }

    #[test]
    fn braking_hypothesis_stops() {
        let p = predict_agent("a", 0, 0.0, 1.0, 4.5, 2.0, 4, 1.0);
        let brake = p.hypotheses.iter().find(|h| h.accel < 0.0).unwrap();
        assert!((brake.states[2].s - 1.0).abs() < 1e-12);
        assert_eq!(brake.states[2].v, 0.0);
        assert!((brake.states[4].s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn probabilities_sum_to_one() {
        let p = predict_agent("a", 0, 0.0, 7.0, 4.5, 2.0, 3, 1.0);
        let sum: f64 = p.hypotheses.iter().map(|h| h.probability).sum();
        assert!((sum - 1.0).abs() < 1e-12);
        assert!(p.hypotheses.iter().all(|h| h.states.len() == 4));
    }
}
