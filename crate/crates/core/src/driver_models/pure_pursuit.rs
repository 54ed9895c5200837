use crate::error::{Error, Result};
use crate::geometry::{CartesianPose, FrenetPose, LanePath};

/// Speed-scaled lookahead `max(min, gain * v)`.
pub fn lookahead_distance(v: f64, min: f64, gain: f64) -> f64 {
    (gain * v).max(min)
}

/// Pure Pursuit curvature command toward the point `lookahead` metres of arc
/// ahead of the pose's projection onto `target`.
///
/// `kappa = 2 * y_l / lookahead²`, with `y_l` the lateral coordinate of the
/// lookahead point in the vehicle frame, clamped to `±kappa_max`.
pub fn pure_pursuit_curvature(pose: &CartesianPose, target: &LanePath, lookahead: f64, kappa_max: f64) -> Result<f64> {
    let foot = target.cartesian_to_frenet(pose)?;
    pursuit_from_foot(pose, target, foot, lookahead, kappa_max)
}

/// Variant seeded with an arc-position hint; returns the command and the foot point.
pub(crate) fn pure_pursuit_near(
    pose: &CartesianPose,
    target: &LanePath,
    lookahead: f64,
    kappa_max: f64,
    s_hint: f64,
) -> Result<(f64, FrenetPose)> {
    let foot = target.cartesian_to_frenet_near(pose, s_hint)?;
    Ok((pursuit_from_foot(pose, target, foot, lookahead, kappa_max)?, foot))
}

fn pursuit_from_foot(pose: &CartesianPose, target: &LanePath, foot: FrenetPose, lookahead: f64, kappa_max: f64) -> Result<f64> {
    if !(lookahead > 0.0) {
        return Err(Error::InvalidInput(format!("lookahead must be > 0, got {lookahead}")));
    }
    let s_la = foot.s + lookahead;
    if s_la > target.length() + 1e-9 {
        return Err(Error::OutOfDomain(format!(
            "lookahead point at s = {s_la:.2} beyond end of lane `{}` ({:.2})",
            target.id,
            target.length()
        )));
    }
    let (p, _, _) = target.sample(s_la);
    let (sin, cos) = pose.theta.sin_cos();
    let (dx, dy) = (p.x - pose.x, p.y - pose.y);
    let y_l = -sin * dx + cos * dy;
    Ok((2.0 * y_l / (lookahead * lookahead)).clamp(-kappa_max, kappa_max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_lane_path, Vec2};

    fn lane() -> LanePath {
        build_lane_path(&[Vec2::new(0.0, 0.0), Vec2::new(100.0, 0.0)], 1.0).unwrap()
    }

    #[test]
    fn aligned_is_straight() {
        let k = pure_pursuit_curvature(&CartesianPose::new(10.0, 0.0, 0.0, 0.0), &lane(), 10.0, 0.5).unwrap();
        assert_eq!(k, 0.0);
    }

    #[test]
    fn one_metre_offset_at_ten_metres() {
        // vehicle 1 m right of the lane, heading along it
        let k = pure_pursuit_curvature(&CartesianPose::new(10.0, -1.0, 0.0, 0.0), &lane(), 10.0, 0.5).unwrap();
        assert!((k - 0.02).abs() < 1e-12);
        let clamped = pure_pursuit_curvature(&CartesianPose::new(10.0, -1.0, 0.0, 0.0), &lane(), 10.0, 0.01).unwrap();
        assert_eq!(clamped, 0.01);
    }

    #[test]
    fn lookahead_past_end() {
        let r = pure_pursuit_curvature(&CartesianPose::new(100.0, 0.0, 0.0, 0.0), &lane(), 5.0, 0.5);
        assert!(matches!(r, Err(Error::OutOfDomain(_))));
    }
}
