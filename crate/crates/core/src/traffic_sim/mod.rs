//! Traffic agents, predictions, collision checks and the closed loop.

mod agents;
mod collision;
mod prediction;
mod sim;

pub use agents::{advance_agents, choose_accelerations, step_agents, Agent, AgentBehavior, EgoSnapshot};
pub use collision::{collision, Footprint};
pub use prediction::{predict_agent, rollout, AgentPrediction, Hypothesis, PredictedState, PredictionSet, DEFAULT_HYPOTHESES};
pub use sim::{plan_open_loop, predict_all, run_closed_loop, AgentSnapshot, PlanSummary, SimLog, SimStep, SimSetup, FALLBACK_DECEL};
