use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::behavior_graph::PlannerConfig;
use crate::cost_model::CostWeights;
use crate::error::{Error, Result};
use crate::geometry::{arc_waypoints, Vec2};
use crate::traffic_sim::AgentBehavior;

use super::{AgentSpec, EgoSpec, LaneSpec, ScenarioFile, SCHEMA, SCHEMA_VERSION};

const LANE_WIDTH: f64 = 3.5;
const ROAD_LENGTH: f64 = 2000.0;
const V_LIMIT: f64 = 13.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Template {
    LaneChange,
    OnRamp,
    TwoLaneRoad,
    LeftTurn,
    /// Single lane behind one leader; used for branching comparisons.
    CarFollowing,
}

impl Template {
    /// The templates cycled through by [`generate_battery`].
    pub const BATTERY: [Template; 4] = [Template::LaneChange, Template::OnRamp, Template::TwoLaneRoad, Template::LeftTurn];
}

impl fmt::Display for Template {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Template::LaneChange => "lane_change",
            Template::OnRamp => "on_ramp",
            Template::TwoLaneRoad => "two_lane_road",
            Template::LeftTurn => "left_turn",
            Template::CarFollowing => "car_following",
        })
    }
}

impl FromStr for Template {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lane_change" => Ok(Template::LaneChange),
            "on_ramp" => Ok(Template::OnRamp),
            "two_lane_road" => Ok(Template::TwoLaneRoad),
            "left_turn" => Ok(Template::LeftTurn),
            "car_following" => Ok(Template::CarFollowing),
            _ => Err(Error::InvalidInput(format!("unknown template `{s}`"))),
        }
    }
}

fn lane(id: &str, waypoints: Vec<Vec2>, left: Option<&str>, right: Option<&str>) -> LaneSpec {
    LaneSpec {
        id: id.into(),
        waypoints: waypoints.iter().map(|p| [p.x, p.y]).collect(),
        resample_step: 1.0,
        left: left.map(Into::into),
        right: right.map(Into::into),
        speed_limit: V_LIMIT,
        dead_end: false,
        corridor: 5.0,
    }
}

fn straight(y: f64) -> Vec<Vec2> {
    vec![Vec2::new(0.0, y), Vec2::new(ROAD_LENGTH, y)]
}

fn two_lanes() -> Vec<LaneSpec> {
    vec![lane("right", straight(0.0), Some("left"), None), lane("left", straight(LANE_WIDTH), None, Some("right"))]
}

fn ego(lane: &str, s: f64, v: f64) -> EgoSpec {
    EgoSpec {
        lane: lane.into(),
        s,
        d: 0.0,
        theta_rel: 0.0,
        v,
        a: 0.0,
        length: 4.5,
        width: 2.0,
        v_desired: None,
    }
}

/// Places agents so that vehicles sharing a lane keep `min_spacing` between centres.
struct Placer {
    taken: Vec<(String, f64)>,
    agents: Vec<AgentSpec>,
    min_spacing: f64,
}

impl Placer {
    fn new(ego: &EgoSpec, min_spacing: f64) -> Self {
        Self {
            taken: vec![(ego.lane.clone(), ego.s)],
            agents: vec![],
            min_spacing,
        }
    }

    fn try_place(&mut self, rng: &mut ChaCha8Rng, lane: &str, s_range: (f64, f64), v_range: (f64, f64)) -> bool {
        for _ in 0..20 {
            let s = rng.gen_range(s_range.0..s_range.1);
            if self.taken.iter().all(|(l, t)| l != lane || (t - s).abs() >= self.min_spacing) {
                let v = rng.gen_range(v_range.0..v_range.1);
                let behavior = if rng.gen_bool(0.25) {
                    AgentBehavior::IdmFollow
                } else {
                    AgentBehavior::RandomAccel { lo: -1.0, hi: 1.0 }
                };
                self.taken.push((lane.to_string(), s));
                self.agents.push(AgentSpec {
                    id: format!("a{}", self.agents.len() + 1),
                    lane: lane.into(),
                    s,
                    v,
                    length: 4.5,
                    width: 2.0,
                    behavior,
                });
                return true;
            }
        }
        false
    }
}

/// One randomized scenario of the given template.
pub fn generate_scenario(template: Template, id: &str, seed: u64) -> ScenarioFile {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lanes, ego, agents) = match template {
        Template::LaneChange => {
            let e = ego("right", rng.gen_range(80.0..120.0), rng.gen_range(8.0..13.0));
            let mut p = Placer::new(&e, 14.0);
            let lead_gap = rng.gen_range(25.0..60.0);
            p.try_place(&mut rng, "right", (e.s + lead_gap, e.s + lead_gap + 1.0), (3.0, 8.0));
            for _ in 0..rng.gen_range(0..=2) {
                p.try_place(&mut rng, "left", (e.s - 60.0, e.s + 90.0), (9.0, V_LIMIT));
            }
            (two_lanes(), e, p.agents)
        }
        Template::OnRamp => {
            let ramp_len = rng.gen_range(180.0..260.0);
            // the ramp starts 200 m into the main road so traffic can approach from behind
            let x0 = 200.0;
            let mut ramp = lane("ramp", vec![Vec2::new(x0, -LANE_WIDTH), Vec2::new(x0 + ramp_len, -LANE_WIDTH)], Some("main"), None);
            ramp.dead_end = true;
            let lanes = vec![lane("main", straight(0.0), None, None), ramp];
            let e = ego("ramp", rng.gen_range(10.0..40.0), rng.gen_range(6.0..11.0));
            let mut p = Placer::new(&e, 15.0);
            for _ in 0..rng.gen_range(1..=3) {
                p.try_place(&mut rng, "main", (x0 + e.s - 50.0, x0 + e.s + 110.0), (9.0, V_LIMIT));
            }
            (lanes, e, p.agents)
        }
        Template::TwoLaneRoad => {
            let start = if rng.gen_bool(0.5) { "right" } else { "left" };
            let e = ego(start, rng.gen_range(60.0..100.0), rng.gen_range(6.0..V_LIMIT));
            let mut p = Placer::new(&e, 14.0);
            for _ in 0..rng.gen_range(1..=4) {
                let l = if rng.gen_bool(0.5) { "right" } else { "left" };
                p.try_place(&mut rng, l, (e.s - 40.0, e.s + 120.0), (6.0, V_LIMIT));
            }
            (two_lanes(), e, p.agents)
        }
        Template::LeftTurn => {
            let radius = rng.gen_range(15.0..25.0);
            let approach = rng.gen_range(80.0..150.0);
            let mut wp = vec![Vec2::new(-approach, 0.0)];
            wp.extend(arc_waypoints(Vec2::new(0.0, radius), radius, -std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2, 1.0));
            wp.push(Vec2::new(radius, radius + 400.0));
            let oncoming = vec![Vec2::new(600.0, LANE_WIDTH), Vec2::new(-600.0, LANE_WIDTH)];
            let lanes = vec![lane("ego", wp, None, None), lane("oncoming", oncoming, None, None)];
            let e = ego("ego", rng.gen_range(10.0..30.0), rng.gen_range(6.0..12.0));
            let mut p = Placer::new(&e, 15.0);
            for _ in 0..rng.gen_range(1..=3) {
                p.try_place(&mut rng, "oncoming", (420.0, 660.0), (6.0, V_LIMIT));
            }
            (lanes, e, p.agents)
        }
        Template::CarFollowing => {
            let e = ego("lane", rng.gen_range(20.0..60.0), rng.gen_range(6.0..V_LIMIT));
            let mut p = Placer::new(&e, 14.0);
            let gap = rng.gen_range(20.0..70.0);
            p.try_place(&mut rng, "lane", (e.s + gap, e.s + gap + 1.0), (3.0, 12.0));
            (vec![lane("lane", straight(0.0), None, None)], e, p.agents)
        }
    };
    ScenarioFile {
        schema: SCHEMA.into(),
        version: SCHEMA_VERSION,
        id: id.into(),
        template: template.to_string(),
        seed: Some(seed),
        lanes,
        ego,
        agents,
        weights: CostWeights::default(),
        planner: PlannerConfig::default(),
        steps: 20,
        dt_fine: 0.05,
    }
}

/// `count` scenarios cycling through the battery templates, reproducible from `seed`.
pub fn generate_battery(count: usize, seed: u64, templates: &[Template]) -> Vec<ScenarioFile> {
    let templates = if templates.is_empty() { &Template::BATTERY[..] } else { templates };
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let t = templates[i % templates.len()];
            let s: u64 = master.gen_range(0..1 << 48);
            generate_scenario(t, &format!("{t}-{i:03}"), s)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::Scenario;

    #[test]
    fn generated_scenarios_validate() {
        for f in generate_battery(40, 9, &[]) {
            let n = f.agents.len();
            let id = f.id.clone();
            let sc = Scenario::from_file(f).unwrap_or_else(|e| panic!("{id}: {e}"));
            assert!((1..=4).contains(&n), "{id} has {n} agents");
            assert_eq!(sc.setup.agents.len(), n);
        }
    }

    #[test]
    fn reproducible_and_cycling() {
        let a = generate_battery(8, 3, &[]);
        assert_eq!(a, generate_battery(8, 3, &[]));
        assert_ne!(a, generate_battery(8, 4, &[]));
        let kinds: Vec<&str> = a.iter().map(|f| f.template.as_str()).collect();
        assert_eq!(&kinds[..4], &["lane_change", "on_ramp", "two_lane_road", "left_turn"]);
        for t in ["lane_change", "car_following"] {
            assert_eq!(t.parse::<Template>().unwrap().to_string(), t);
        }
    }
}
