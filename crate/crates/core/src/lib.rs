//! Behavior planning for automated vehicles: a lane-graph search over
//! longitudinal/lateral action pairs guided by driver models.

pub mod behavior_graph;
pub mod cost_model;
pub mod driver_models;
pub mod error;
pub mod geometry;
pub mod scenario;
pub mod search;
pub mod traffic_sim;
pub mod trajectory;

pub use error::{Error, Result};
