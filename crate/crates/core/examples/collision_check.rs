//! Separating-axis overlap tests between oriented vehicle rectangles.
use behavior_planner::geometry::CartesianPose;
use behavior_planner::traffic_sim::{collision, Footprint};

fn main() {
    let ego = Footprint::new(&CartesianPose::new(0.0, 0.0, 0.0, 0.0), 4.5, 2.0);
    let cases = [
        ("same lane, 5 m ahead", CartesianPose::new(5.0, 0.0, 0.0, 0.0)),
        ("same lane, 4 m ahead", CartesianPose::new(4.0, 0.0, 0.0, 0.0)),
        ("next lane", CartesianPose::new(1.0, 3.5, 0.0, 0.0)),
        ("crossing at 45 deg", CartesianPose::new(3.2, 1.8, std::f64::consts::FRAC_PI_4, 0.0)),
    ];
    for (name, pose) in cases {
        let other = Footprint::new(&pose, 4.5, 2.0);
        println!(
            "{name:22} overlap {:5}  with 0.5 m margin {}",
            collision(&ego, &other),
            collision(&ego, &other.inflated(0.5, 0.2))
        );
    }
}
