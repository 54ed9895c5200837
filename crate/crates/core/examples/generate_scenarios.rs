//! Generates one scenario per template and prints a short summary of each.
use behavior_planner::scenario::{generate_scenario, Scenario, Template};

fn main() -> behavior_planner::Result<()> {
    let templates = [Template::LaneChange, Template::OnRamp, Template::TwoLaneRoad, Template::LeftTurn, Template::CarFollowing];
    for (i, t) in templates.into_iter().enumerate() {
        let sc = Scenario::from_file(generate_scenario(t, &format!("{t}-demo"), i as u64))?;
        let lanes: Vec<String> = sc.setup.lanes.lanes().iter().map(|l| format!("{} ({:.0} m)", l.id, l.length())).collect();
        println!(
            "{:14} lanes [{}], ego s {:.1} v {:.1}, {} agents",
            sc.id,
            lanes.join(", "),
            sc.setup.ego.s,
            sc.setup.ego.v,
            sc.setup.agents.len()
        );
    }
    let sc = Scenario::from_file(generate_scenario(Template::CarFollowing, "car_following-demo", 0))?;
    println!("\n{}", sc.to_json());
    Ok(())
}
