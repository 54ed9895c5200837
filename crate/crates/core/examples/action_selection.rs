//! Actions expanded at one node under each branching mode.
use behavior_planner::behavior_graph::{children, select_actions, BranchingMode, PlannerConfig, VehicleState, World};
use behavior_planner::geometry::{build_lane_path, LaneNetwork, Vec2};
use behavior_planner::traffic_sim::{predict_agent, PredictionSet};

fn main() -> behavior_planner::Result<()> {
    let mut right = build_lane_path(&[Vec2::new(0.0, 0.0), Vec2::new(1000.0, 0.0)], 1.0)?.with_id("right");
    let mut left = build_lane_path(&[Vec2::new(0.0, 3.5), Vec2::new(1000.0, 3.5)], 1.0)?.with_id("left");
    right.left_neighbor = Some("left".into());
    left.right_neighbor = Some("right".into());
    let lanes = LaneNetwork::new(vec![right, left])?;
    let cfg = PlannerConfig::default();

    let ego = VehicleState::on_lane(&lanes, 0, 100.0, 0.0, 0.0, 11.0, 0.0, 0)?;
    let preds = PredictionSet {
        dt: cfg.dt,
        steps: cfg.horizon_steps,
        agents: vec![predict_agent("lead", 0, 125.0, 7.0, 4.5, 2.0, cfg.horizon_steps, cfg.dt)],
    };
    let world = World::new(&lanes, &preds, &ego, 4.5, 2.0, &cfg);

    for mode in [BranchingMode::Proposed, BranchingMode::Passive, BranchingMode::Baseline] {
        let acts = select_actions(&world, &ego, &cfg, mode);
        let kids = children(&world, &ego, &cfg, mode);
        println!("{mode}: {} actions, {} feasible children", acts.len(), kids.len());
        for a in &acts {
            println!("    {:?} / {:?}", a.lon, a.lat);
        }
    }
    Ok(())
}
