//! Scenario files, comfort metrics, benchmark batteries and the random generator.

mod battery;
mod generator;
mod metrics;

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::behavior_graph::{PlannerConfig, VehicleState};
use crate::cost_model::CostWeights;
use crate::error::{Error, Result};
use crate::geometry::{build_lane_path, LaneNetwork, Vec2};
use crate::traffic_sim::{Agent, AgentBehavior, SimSetup};

pub use battery::{cross_check, run_battery, run_cell, BatteryConfig, BatteryReport, CellResult};
pub use generator::{generate_battery, generate_scenario, Template};
pub use metrics::{aggregate_rows, comfort_metrics, write_metrics_csv, MetricsRow};

pub const SCHEMA: &str = "bplan-scenario";
pub const SCHEMA_VERSION: u32 = 1;

fn default_step() -> f64 {
    1.0
}
fn default_speed_limit() -> f64 {
    13.9
}
fn default_corridor() -> f64 {
    5.0
}
fn default_length() -> f64 {
    4.5
}
fn default_width() -> f64 {
    2.0
}
fn default_dt_fine() -> f64 {
    0.05
}
fn default_steps() -> usize {
    20
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaneSpec {
    pub id: String,
    pub waypoints: Vec<[f64; 2]>,
    #[serde(default = "default_step")]
    pub resample_step: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub left: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub right: Option<String>,
    #[serde(default = "default_speed_limit")]
    pub speed_limit: f64,
    #[serde(default)]
    pub dead_end: bool,
    #[serde(default = "default_corridor")]
    pub corridor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EgoSpec {
    pub lane: String,
    pub s: f64,
    #[serde(default)]
    pub d: f64,
    #[serde(default)]
    pub theta_rel: f64,
    pub v: f64,
    #[serde(default)]
    pub a: f64,
    #[serde(default = "default_length")]
    pub length: f64,
    #[serde(default = "default_width")]
    pub width: f64,
    /// Overrides `planner.v_desired` when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_desired: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentSpec {
    pub id: String,
    pub lane: String,
    pub s: f64,
    pub v: f64,
    #[serde(default = "default_length")]
    pub length: f64,
    #[serde(default = "default_width")]
    pub width: f64,
    #[serde(default)]
    pub behavior: AgentBehavior,
}

/// On-disk scenario format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema: String,
    pub version: u32,
    pub id: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub template: String,
    pub seed: Option<u64>,
    pub lanes: Vec<LaneSpec>,
    pub ego: EgoSpec,
    #[serde(default)]
    pub agents: Vec<AgentSpec>,
    #[serde(default)]
    pub weights: CostWeights,
    #[serde(default)]
    pub planner: PlannerConfig,
    /// Default number of closed-loop steps.
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default = "default_dt_fine")]
    pub dt_fine: f64,
}

/// A validated scenario ready for simulation.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub id: String,
    pub seed: u64,
    pub steps: usize,
    pub source: Option<PathBuf>,
    pub file: ScenarioFile,
    pub setup: SimSetup,
}

fn scenario_err(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Scenario {
        path: path.into(),
        message: message.into(),
    }
}

/// Parses and validates scenario JSON; errors name the offending field path.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let file: ScenarioFile = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        scenario_err(if path.is_empty() { ".".to_string() } else { path }, e.into_inner().to_string())
    })?;
    Scenario::from_file(file)
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut sc = parse_scenario(&text).map_err(|e| match e {
        Error::Scenario { path: p, message } => scenario_err(p, format!("{}: {message}", path.display())),
        other => other,
    })?;
    sc.source = Some(path.to_path_buf());
    Ok(sc)
}

/// Every `*.json` file in `dir`, sorted by file name.
pub fn load_dir(dir: &Path) -> Result<Vec<Scenario>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::InvalidInput(format!("no scenario files in {}", dir.display())));
    }
    paths.iter().map(|p| load_scenario(p)).collect()
}

impl Scenario {
    pub fn from_file(file: ScenarioFile) -> Result<Self> {
        if file.schema != SCHEMA {
            return Err(scenario_err("schema", format!("expected `{SCHEMA}`, got `{}`", file.schema)));
        }
        if file.version != SCHEMA_VERSION {
            return Err(scenario_err("version", format!("unsupported version {}", file.version)));
        }
        let seed = file.seed.ok_or_else(|| scenario_err("seed", "missing seed"))?;
        if file.lanes.is_empty() {
            return Err(scenario_err("lanes", "at least one lane is required"));
        }

        let mut paths = Vec::with_capacity(file.lanes.len());
        for (i, l) in file.lanes.iter().enumerate() {
            let pts: Vec<Vec2> = l.waypoints.iter().map(|p| Vec2::new(p[0], p[1])).collect();
            let mut path = build_lane_path(&pts, l.resample_step)
                .map_err(|e| scenario_err(format!("lanes[{i}].waypoints"), e.to_string()))?
                .with_id(l.id.clone())
                .with_corridor(l.corridor);
            path.left_neighbor = l.left.clone();
            path.right_neighbor = l.right.clone();
            path.speed_limit = l.speed_limit;
            path.dead_end = l.dead_end;
            paths.push(path);
        }
        let lanes = LaneNetwork::new(paths)?;
        let lane_ref = |name: &str, at: String| lanes.find(name).ok_or(Error::DanglingLane { lane: name.to_string(), path: at });

        let mut cfg = file.planner.clone();
        if let Some(v) = file.ego.v_desired {
            cfg.v_desired = v;
        }
        cfg.validate().map_err(|e| scenario_err("planner", e.to_string()))?;
        file.weights.validate().map_err(|e| scenario_err("weights", e.to_string()))?;
        if !(file.dt_fine > 0.0 && file.dt_fine <= 0.1) {
            return Err(scenario_err("dt_fine", format!("must be in (0, 0.1], got {}", file.dt_fine)));
        }

        let e = &file.ego;
        let ego_lane = lane_ref(&e.lane, "ego.lane".into())?;
        if !(e.length > 0.0 && e.width > 0.0) {
            return Err(scenario_err("ego", "footprint must be positive"));
        }
        if !lanes.lane(ego_lane).contains(e.s) {
            return Err(scenario_err("ego.s", format!("{} is outside lane `{}`", e.s, e.lane)));
        }
        if !(e.v >= 0.0) {
            return Err(scenario_err("ego.v", format!("speed must be >= 0, got {}", e.v)));
        }
        if e.a.abs() > cfg.a_lim {
            return Err(scenario_err("ego.a", format!("|a| must be <= {}, got {}", cfg.a_lim, e.a)));
        }
        let ego = VehicleState::on_lane(&lanes, ego_lane, e.s, e.d, e.theta_rel, e.v, e.a, 0).map_err(|err| scenario_err("ego", err.to_string()))?;

        let mut seen = HashSet::new();
        let mut agents = Vec::with_capacity(file.agents.len());
        for (i, a) in file.agents.iter().enumerate() {
            if !seen.insert(a.id.as_str()) {
                return Err(scenario_err(format!("agents[{i}].id"), format!("duplicate agent id `{}`", a.id)));
            }
            let lane = lane_ref(&a.lane, format!("agents[{i}].lane"))?;
            if !lanes.lane(lane).contains(a.s) {
                return Err(scenario_err(format!("agents[{i}].s"), format!("{} is outside lane `{}`", a.s, a.lane)));
            }
            let agent = Agent {
                id: a.id.clone(),
                lane,
                s: a.s,
                v: a.v,
                a: 0.0,
                length: a.length,
                width: a.width,
                behavior: a.behavior,
            };
            agent.validate().map_err(|err| scenario_err(format!("agents[{i}]"), err.to_string()))?;
            agents.push(agent);
        }

        Ok(Scenario {
            id: file.id.clone(),
            seed,
            steps: file.steps,
            source: None,
            setup: SimSetup {
                lanes,
                ego,
                ego_length: e.length,
                ego_width: e.width,
                agents,
                cfg,
                weights: file.weights,
                dt_fine: file.dt_fine,
            },
            file,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.file).expect("scenario files always serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "schema": "bplan-scenario", "version": 1, "id": "straight", "seed": 1,
        "lanes": [{"id": "L1", "waypoints": [[0, 0], [500, 0]]}],
        "ego": {"lane": "L1", "s": 10, "v": 10}
    }"#;

    #[test]
    fn minimal_file() {
        let sc = parse_scenario(MINIMAL).unwrap();
        assert_eq!(sc.setup.lanes.len(), 1);
        assert!(sc.setup.agents.is_empty());
        assert_eq!(sc.setup.weights, CostWeights::default());
        assert_eq!(sc.setup.weights.w_c, 2.0);
        assert_eq!(sc.steps, 20);
    }

    #[test]
    fn dangling_lane_is_named() {
        let text = MINIMAL.replace(r#""v": 10}"#, r#""v": 10}, "agents": [{"id": "a", "lane": "L9", "s": 50, "v": 5}]"#);
        match parse_scenario(&text).unwrap_err() {
            Error::DanglingLane { lane, path } => {
                assert_eq!(lane, "L9");
                assert_eq!(path, "agents[0].lane");
            }
            e => panic!("unexpected {e}"),
        }
        let text = MINIMAL.replace(r#""waypoints""#, r#""left": "L9", "waypoints""#);
        let err = parse_scenario(&text).unwrap_err().to_string();
        assert!(err.contains("L9"), "{err}");
    }

    #[test]
    fn missing_seed_and_bad_fields() {
        let err = parse_scenario(&MINIMAL.replace(r#""seed": 1,"#, "")).unwrap_err();
        assert!(matches!(err, Error::Scenario { ref path, .. } if path == "seed"), "{err}");
        let err = parse_scenario(&MINIMAL.replace(r#""v": 10}"#, r#""v": "fast"}"#)).unwrap_err();
        assert!(matches!(err, Error::Scenario { ref path, .. } if path == "ego.v"), "{err}");
        let err = parse_scenario(&MINIMAL.replace(r#""seed": 1,"#, r#""seed": 1, "planner": {"dt": 1, "bogus": 2},"#)).unwrap_err();
        assert!(matches!(err, Error::Scenario { ref path, .. } if path.starts_with("planner")), "{err}");
    }

    #[test]
    fn round_trips_through_json() {
        let sc = parse_scenario(MINIMAL).unwrap();
        let again = parse_scenario(&sc.to_json()).unwrap();
        assert_eq!(sc.file, again.file);
    }
}
