//! IDM accelerations, a MOBIL decision and the pure-pursuit steering curvature.
use behavior_planner::driver_models::{
    idm_acceleration, lookahead_distance, mobil_decision, pure_pursuit_curvature, IdmParams, LaneContext, Leader, MobilParams, Neighbor,
};
use behavior_planner::geometry::{build_lane_path, CartesianPose, Vec2};

fn main() -> behavior_planner::Result<()> {
    let idm = IdmParams::default();
    println!("IDM (v0 = {} m/s):", idm.v_desired);
    for (v, lead) in [(0.0, None), (10.0, None), (10.0, Some(Leader::new(40.0, 10.0))), (10.0, Some(Leader::new(12.0, 4.0)))] {
        println!("  v {v:5.1} leader {lead:?} -> a {:.3}", idm_acceleration(v, lead, &idm)?);
    }

    // slow leader ahead, free target lane
    let current = LaneContext {
        leader: Some(Neighbor::new(15.0, 5.0)),
        follower: None,
    };
    let target = LaneContext {
        leader: Some(Neighbor::new(80.0, 13.0)),
        follower: Some(Neighbor::new(30.0, 11.0)),
    };
    let d = mobil_decision(11.0, 4.5, &current, &target, &idm, &idm, &MobilParams::default())?;
    println!("MOBIL with a slow leader and a free target lane: {d:?}");

    let lane = build_lane_path(&[Vec2::new(0.0, 3.5), Vec2::new(300.0, 3.5)], 1.0)?;
    let pose = CartesianPose::new(20.0, 0.0, 0.0, 0.0);
    let look = lookahead_distance(10.0, 8.0, 2.5);
    let kappa = pure_pursuit_curvature(&pose, &lane, look, 0.25)?;
    println!("pure pursuit towards a lane 3.5 m left, lookahead {look:.1} m: kappa {kappa:.4} 1/m");
    Ok(())
}
