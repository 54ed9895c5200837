//! Builds a curved lane and converts poses between Frenet and Cartesian frames.
use behavior_planner::geometry::{arc_waypoints, build_lane_path, FrenetPose, Vec2};

fn main() -> behavior_planner::Result<()> {
    let mut pts = vec![Vec2::new(-50.0, 0.0), Vec2::new(0.0, 0.0)];
    pts.extend(arc_waypoints(Vec2::new(0.0, 30.0), 30.0, -std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2, 1.0).into_iter().skip(1));
    pts.push(Vec2::new(30.0, 100.0));
    let lane = build_lane_path(&pts, 0.5)?.with_id("bend");
    println!("lane length {:.2} m, max |kappa| {:.4} 1/m", lane.length(), lane.max_abs_curvature());

    for (s, d) in [(10.0, 0.0), (70.0, 1.2), (95.0, -0.8), (140.0, 0.5)] {
        let pose = lane.frenet_to_cartesian(FrenetPose::new(s, d, 0.1))?;
        let back = lane.cartesian_to_frenet(&pose)?;
        println!(
            "s {s:6.1} d {d:5.2} -> x {:8.3} y {:8.3} theta {:6.3} kappa {:7.4} -> s {:6.3} d {:6.3} (err {:.1e})",
            pose.x,
            pose.y,
            pose.theta,
            pose.kappa,
            back.s,
            back.d,
            (back.s - s).abs().max((back.d - d).abs())
        );
    }
    Ok(())
}
