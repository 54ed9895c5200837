use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use behavior_planner::behavior_graph::BranchingMode;
use behavior_planner::scenario::{
    generate_battery, load_dir, load_scenario, run_battery, run_cell, write_metrics_csv, BatteryConfig, Scenario, Template,
};
use behavior_planner::search::Heuristic;
use behavior_planner::traffic_sim::plan_open_loop;
use behavior_planner::{Error, Result};

#[derive(Parser)]
#[command(name = "bplan", version, about = "Behavior planning on lane-structured scenarios")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Plan once from the initial state and write the refined trajectory CSV.
    Plan(PlanArgs),
    /// Run the closed loop and write the step log (JSONL) and driven trajectory (CSV).
    Simulate(SimArgs),
    /// Run a scenario battery and write per-cell and aggregate metrics.
    Bench(BenchArgs),
    /// Generate a randomized scenario battery as JSON files.
    Gen(GenArgs),
}

#[derive(Args)]
struct Source {
    /// A single scenario file.
    #[arg(long, conflicts_with = "dir")]
    scenario: Option<PathBuf>,
    /// A directory of scenario files (`*.json`).
    #[arg(long)]
    dir: Option<PathBuf>,
}

impl Source {
    fn load(&self) -> Result<Vec<Scenario>> {
        match (&self.scenario, &self.dir) {
            (Some(p), _) => Ok(vec![load_scenario(p)?]),
            (None, Some(d)) => load_dir(d),
            (None, None) => Err(Error::InvalidInput("pass --scenario or --dir".into())),
        }
    }

    fn load_one(&self) -> Result<Scenario> {
        let mut all = self.load()?;
        if all.len() != 1 {
            return Err(Error::InvalidInput(format!("expected one scenario, found {}", all.len())));
        }
        Ok(all.remove(0))
    }
}

#[derive(Args)]
struct PlanArgs {
    #[command(flatten)]
    src: Source,
    #[arg(long, default_value = "hall")]
    heuristic: Heuristic,
    #[arg(long, default_value = "proposed")]
    mode: BranchingMode,
    /// Output CSV path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimArgs {
    #[command(flatten)]
    src: Source,
    #[arg(long, default_value = "hall")]
    heuristic: Heuristic,
    #[arg(long, default_value = "proposed")]
    mode: BranchingMode,
    /// Offset added to the scenario's own seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Overrides the scenario's step count.
    #[arg(long)]
    steps: Option<usize>,
    /// Output directory for `sim.jsonl` and `trajectory.csv`.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    src: Source,
    /// Heuristics to compare (comma separated).
    #[arg(long, value_delimiter = ',', default_value = "h0,hall")]
    heuristic: Vec<Heuristic>,
    /// Branching modes (comma separated).
    #[arg(long, value_delimiter = ',', default_value = "proposed")]
    mode: Vec<BranchingMode>,
    /// Seed offsets (comma separated).
    #[arg(long, value_delimiter = ',', default_value = "0")]
    seed: Vec<u64>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Also write one JSONL step log per cell under `<out>/logs`.
    #[arg(long)]
    logs: bool,
    #[arg(long, default_value = "bench")]
    out: PathBuf,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 250)]
    count: usize,
    /// Master seed of the battery.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Templates to cycle through (comma separated); the mixed battery when omitted.
    #[arg(long, value_delimiter = ',')]
    template: Vec<Template>,
    #[arg(long, default_value = "scenarios")]
    out: PathBuf,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    Ok(BufWriter::new(File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?))
}

fn cmd_plan(args: &PlanArgs) -> Result<bool> {
    let sc = args.src.load_one()?;
    let (result, traj) = plan_open_loop(&sc.setup, args.heuristic, args.mode)?;
    let other = match args.heuristic {
        Heuristic::H0 => Heuristic::HAll,
        Heuristic::HAll => Heuristic::H0,
    };
    let (check, _) = plan_open_loop(&sc.setup, other, args.mode)?;
    eprintln!(
        "{}: status {:?}, cost {:.6}, expansions {}, generated {}",
        sc.id, result.status, result.total_cost, result.expansions, result.generated
    );
    let mut ok = result.is_ok();
    if check.status != result.status || (check.total_cost - result.total_cost).abs() > 1e-9 * result.total_cost.abs().max(1.0) {
        eprintln!("cross-check: {other} gives status {:?}, cost {:.12}", check.status, check.total_cost);
        ok = false;
    }
    if let Some(traj) = traj {
        match &args.out {
            Some(p) => traj.write_csv(create(p)?)?,
            None => traj.write_csv(std::io::stdout().lock())?,
        }
    }
    Ok(ok)
}

fn cmd_simulate(args: &SimArgs) -> Result<bool> {
    let sc = args.src.load_one()?;
    let cell = run_cell(&sc, args.mode, args.heuristic, args.seed, args.steps);
    let Some(log) = cell.log else {
        return Err(Error::InvalidInput(cell.row.error));
    };
    fs::create_dir_all(&args.out)?;
    log.write_jsonl(create(&args.out.join("sim.jsonl"))?)?;
    log.driven.write_csv(create(&args.out.join("trajectory.csv"))?)?;
    let r = &cell.row;
    eprintln!(
        "{}: {} steps, cost {:.4}, jerk² {:.4}, accel² {:.4}, fallbacks {}, collision {}",
        r.scenario, r.steps, r.total_cost, r.mean_sq_jerk, r.mean_sq_accel, r.fallbacks, log.collision
    );
    Ok(!log.collision)
}

fn cmd_bench(args: &BenchArgs) -> Result<bool> {
    let scenarios = args.src.load()?;
    let cfg = BatteryConfig {
        modes: args.mode.clone(),
        heuristics: args.heuristic.clone(),
        seeds: args.seed.clone(),
        steps: args.steps,
        jobs: args.jobs.max(1),
        keep_logs: args.logs,
    };
    let report = run_battery(&scenarios, &cfg)?;
    fs::create_dir_all(&args.out)?;
    write_metrics_csv(&report.rows, create(&args.out.join("metrics.csv"))?)?;
    write_metrics_csv(&report.aggregates, create(&args.out.join("aggregates.csv"))?)?;
    let mut v = create(&args.out.join("violations.txt"))?;
    for line in &report.violations {
        writeln!(v, "{line}")?;
    }
    v.flush()?;
    if args.logs {
        let dir = args.out.join("logs");
        for (row, log) in report.rows.iter().zip(&report.logs) {
            if let Some(log) = log {
                let name = format!("{}_{}_{}_{}.jsonl", row.scenario, row.mode, row.heuristic, row.seed);
                log.write_jsonl(create(&dir.join(name))?)?;
            }
        }
    }
    for a in &report.aggregates {
        eprintln!(
            "{:>8} {:>4}: expansions mean {:.1} max {:.0}, jerk² {:.4}, accel² {:.4}, collisions {}",
            a.mode, a.heuristic, a.mean_expansions, a.max_expansions, a.mean_sq_jerk, a.mean_sq_accel, a.collisions
        );
    }
    for line in &report.violations {
        eprintln!("violation: {line}");
    }
    eprintln!("{} cells, {} violations", report.rows.len(), report.violations.len());
    Ok(report.passed())
}

fn cmd_gen(args: &GenArgs) -> Result<bool> {
    fs::create_dir_all(&args.out)?;
    let files = generate_battery(args.count, args.seed, &args.template);
    for f in &files {
        // every generated file must load back cleanly
        let sc = Scenario::from_file(f.clone())?;
        let mut w = create(&args.out.join(format!("{}.json", f.id)))?;
        w.write_all(sc.to_json().as_bytes())?;
        w.flush()?;
    }
    eprintln!("wrote {} scenarios to {}", files.len(), args.out.display());
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.cmd {
        Command::Plan(a) => cmd_plan(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Gen(a) => cmd_gen(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
