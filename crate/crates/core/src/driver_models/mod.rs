//! Driver and control models used to generate and gate planner actions.

pub(crate) mod idm;
mod mobil;
pub(crate) mod pure_pursuit;
mod velocity_profile;

pub use idm::{idm_acceleration, IdmParams, Leader};
pub use mobil::{mobil_decision, LaneChangeDecision, LaneContext, MobilParams, Neighbor};
pub use pure_pursuit::{lookahead_distance, pure_pursuit_curvature};
pub use velocity_profile::{time_optimal_velocity_profile, JerkProfile};
