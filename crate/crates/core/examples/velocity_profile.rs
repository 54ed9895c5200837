//! Time-optimal jerk-limited velocity profiles, sampled on a fine grid.
use behavior_planner::driver_models::time_optimal_velocity_profile;

fn main() -> behavior_planner::Result<()> {
    for (v0, a0, v1) in [(10.0, 0.0, 13.9), (13.9, 0.0, 0.0), (5.0, 1.0, 6.0), (8.0, -1.5, 8.0)] {
        let p = time_optimal_velocity_profile(v0, a0, v1, 2.0, 2.0)?;
        println!("v {v0} a {a0} -> v {v1}: T = {:.4} s, distance {:.4} m", p.total_time, p.distance);
        for (dur, jerk) in &p.phases {
            println!("    {dur:.4} s at jerk {jerk:+.1}");
        }
        let (s, v, a) = p.sample(0.5 * p.total_time);
        println!("    midpoint: s {s:.3} v {v:.3} a {a:.3}");
    }
    Ok(())
}
