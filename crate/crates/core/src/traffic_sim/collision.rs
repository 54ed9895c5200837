use serde::{Deserialize, Serialize};

use crate::geometry::{CartesianPose, Vec2};

/// Oriented rectangle centred on a vehicle pose.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Footprint {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub length: f64,
    pub width: f64,
}

impl Footprint {
    pub fn new(pose: &CartesianPose, length: f64, width: f64) -> Self {
        Self {
            x: pose.x,
            y: pose.y,
            theta: pose.theta,
            length,
            width,
        }
    }

    /// The same rectangle grown by `lon` at each end and `lat` at each side.
    pub fn inflated(self, lon: f64, lat: f64) -> Self {
        Self {
            length: self.length + 2.0 * lon,
            width: self.width + 2.0 * lat,
            ..self
        }
    }

    fn center(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    fn circumradius(&self) -> f64 {
        0.5 * self.length.hypot(self.width)
    }

    fn axes(&self) -> [Vec2; 2] {
        let u = Vec2::from_angle(self.theta);
        [u, u.perp()]
    }

    /// Half-extent of the projection onto unit axis `n`.
    fn radius_along(&self, n: Vec2) -> f64 {
        let [u, w] = self.axes();
        0.5 * self.length * u.dot(n).abs() + 0.5 * self.width * w.dot(n).abs()
    }
}

/// Separating-axis overlap test; touching rectangles count as colliding.
pub fn collision(a: &Footprint, b: &Footprint) -> bool {
    let delta = b.center() - a.center();
    let reach = a.circumradius() + b.circumradius();
    if delta.dot(delta) > reach * reach {
        return false;
    }
    for n in a.axes().into_iter().chain(b.axes()) {
        if delta.dot(n).abs() > a.radius_along(n) + b.radius_along(n) + 1e-12 {
            return false;
        }
    }
    true
}
