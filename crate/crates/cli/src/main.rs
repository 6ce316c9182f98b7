use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::json;

use wheelsim_core::config::{RunConfig, Scenario, ScenarioOutput, CONFIG_ENV_VAR};
use wheelsim_core::cycle::{load_cycle, simulate_baseline_cycle, simulate_cycle, SpeedUnit};
use wheelsim_core::efficiency_map::{
    load_map, synthesize_braking_map, synthesize_motoring_map, EfficiencyMap, MapMode, MapSynthesisSpec,
};
use wheelsim_core::report::{curve_csv, Report, ScenarioResult};
use wheelsim_core::strategy::{SlopeScenario, SweepGrid};
use wheelsim_core::{case_study, Error};

#[derive(Parser)]
#[command(name = "wheelsim", version, about = "Energy model for in-wheel-motor autonomous EVs")]
struct Cli {
    /// Run configuration (JSON)
    #[arg(long, global = true, env = CONFIG_ENV_VAR, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Write outputs into this directory instead of stdout
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Override a config field, e.g. vehicle.rolling_coeff=0.012
    #[arg(long = "params", global = true, value_name = "KEY=VALUE")]
    params: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Efficiency map tools
    #[command(subcommand)]
    Map(MapCommand),
    /// Constant-speed energy on a grade
    #[command(subcommand)]
    Slope(SlopeCommand),
    /// Drive-cycle simulation
    #[command(subcommand)]
    Cycle(CycleCommand),
    /// Round-trip case study against the conventional EV
    Casestudy,
    /// Configuration tools
    #[command(subcommand)]
    Config(ConfigCommand),
    /// Run every scenario in the configuration and write a report
    Run {
        /// Worker threads; results keep scenario order
        #[arg(long, default_value_t = 1)]
        parallel: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Motoring,
    Braking,
}

impl From<ModeArg> for MapMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Motoring => MapMode::Motoring,
            ModeArg::Braking => MapMode::Braking,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum UnitArg {
    Mph,
    Kmh,
}

impl From<UnitArg> for SpeedUnit {
    fn from(u: UnitArg) -> Self {
        match u {
            UnitArg::Mph => SpeedUnit::Mph,
            UnitArg::Kmh => SpeedUnit::Kmh,
        }
    }
}

#[derive(Subcommand)]
enum MapCommand {
    /// Synthesize a map and write it as CSV
    Synth {
        #[arg(long, value_enum)]
        mode: ModeArg,
        /// Synthesis spec (JSON); defaults to the calibrated spec for the mode
        #[arg(long, value_name = "FILE")]
        spec: Option<PathBuf>,
    },
    /// Summary statistics of a map
    Stats {
        #[arg(long, value_enum)]
        mode: ModeArg,
        /// Map CSV; defaults to the configured map for the mode
        #[arg(long, value_name = "FILE")]
        map: Option<PathBuf>,
        #[arg(long, default_value_t = 0.60)]
        threshold: f64,
    },
    /// Check that a map CSV is well formed
    Validate {
        #[arg(long, value_enum)]
        mode: ModeArg,
        #[arg(long, value_name = "FILE")]
        map: PathBuf,
    },
}

#[derive(Args, Clone)]
struct SlopeArgs {
    /// Slope angle in degrees, positive uphill
    #[arg(long, allow_hyphen_values = true)]
    angle: f64,
    /// Speed used to judge the drive state on a downslope, km/h
    #[arg(long, default_value_t = 30.0)]
    initial_speed: f64,
    #[arg(long)]
    vmin: Option<f64>,
    #[arg(long)]
    vmax: Option<f64>,
    #[arg(long)]
    step: Option<f64>,
    /// Cargo mass in kg
    #[arg(long, default_value_t = 0.0)]
    cargo: f64,
}

#[derive(Subcommand)]
enum SlopeCommand {
    /// Energy per km over a speed grid, as CSV
    Sweep(SlopeArgs),
    /// Optimal constant speed, as JSON
    Optimum(SlopeArgs),
}

#[derive(Subcommand)]
enum CycleCommand {
    /// Simulate a speed trace
    Run {
        #[arg(long, value_name = "FILE")]
        cycle: PathBuf,
        #[arg(long, value_enum, default_value = "mph")]
        unit: UnitArg,
        /// Use the conventional baseline EV
        #[arg(long)]
        baseline: bool,
        /// Include the per-step trace
        #[arg(long)]
        trace: bool,
    },
}

#[derive(Subcommand)]
enum ConfigCommand {
    /// Load, apply overrides and check every scenario
    Validate,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Domain { .. } | Error::Calibration(_) => 2,
        Error::Infeasible(_)
        | Error::State { .. }
        | Error::NoFeasiblePoint
        | Error::ZeroDistance
        | Error::AboveRange { .. }
        | Error::BelowRange { .. } => 3,
        Error::Parse { .. } => 4,
        Error::Io { .. } => 5,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

struct Output {
    dir: Option<PathBuf>,
}

impl Output {
    /// Write `contents` to `<dir>/<name>`, or to stdout without a directory.
    fn emit(&self, name: &str, contents: &str) -> Result<(), Error> {
        match &self.dir {
            Some(dir) => {
                let path = dir.join(name);
                fs::create_dir_all(dir)
                    .and_then(|_| fs::write(&path, contents))
                    .map_err(|source| Error::Io {
                        path: path.clone(),
                        source,
                    })?;
                eprintln!("wrote {}", path.display());
                Ok(())
            }
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout.write_all(contents.as_bytes()).map_err(|source| Error::Io {
                    path: PathBuf::from("<stdout>"),
                    source,
                })
            }
        }
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig, Error> {
    let config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    config.with_overrides(&cli.params)
}

fn pretty(value: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("value serializes");
    s.push('\n');
    s
}

fn run(cli: Cli) -> Result<(), Error> {
    let config = load_config(&cli)?;
    let out = Output {
        dir: cli
            .out
            .clone()
            .or_else(|| config.output_dir.as_ref().map(|d| config.base_dir.join(d))),
    };

    match cli.command {
        Command::Map(cmd) => map_command(cmd, &config, &out),
        Command::Slope(cmd) => slope_command(cmd, &config, &out),
        Command::Cycle(CycleCommand::Run {
            cycle,
            unit,
            baseline,
            trace,
        }) => {
            let prepared = config.prepare()?;
            let trace_cycle = load_cycle(&cycle, unit.into())?;
            let options = wheelsim_core::cycle::CycleOptions { trace, ..config.cycle };
            let result = if baseline {
                simulate_baseline_cycle(&trace_cycle, &options)?
            } else {
                simulate_cycle(&trace_cycle, &prepared.model, &options)?
            };
            let report = Report::new(
                config.vehicle.clone(),
                config.environment.clone(),
                prepared.provenance,
                vec![ScenarioResult::Cycle { baseline, result }],
            );
            out.emit(&format!("cycle_{}.json", trace_cycle.name), &report.to_json())
        }
        Command::Casestudy => {
            let prepared = config.prepare()?;
            let result = case_study::run_case_study(&prepared.model, &config.case_study)?;
            let report = Report::new(
                config.vehicle.clone(),
                config.environment.clone(),
                prepared.provenance,
                vec![ScenarioResult::CaseStudy(Box::new(result))],
            );
            out.emit("casestudy.json", &report.to_json())
        }
        Command::Config(ConfigCommand::Validate) => {
            config.validate()?;
            println!("config ok: {} scenario(s)", config.scenarios.len());
            Ok(())
        }
        Command::Run { parallel } => run_all(&config, &out, parallel),
    }
}

fn map_for(mode: MapMode, path: Option<&Path>, config: &RunConfig) -> Result<EfficiencyMap, Error> {
    match path {
        Some(p) => load_map(p, mode),
        None => {
            let prepared = config.prepare()?;
            Ok(match mode {
                MapMode::Motoring => prepared.model.maps.motoring().clone(),
                MapMode::Braking => prepared.model.maps.braking().clone(),
            })
        }
    }
}

fn map_command(cmd: MapCommand, config: &RunConfig, out: &Output) -> Result<(), Error> {
    match cmd {
        MapCommand::Synth { mode, spec } => {
            let mode = MapMode::from(mode);
            let spec = match spec {
                Some(path) => {
                    let text = fs::read_to_string(&path).map_err(|source| Error::Io {
                        path: path.clone(),
                        source,
                    })?;
                    serde_json::from_str::<MapSynthesisSpec>(&text).map_err(|e| Error::Config(e.to_string()))?
                }
                None => match mode {
                    MapMode::Motoring => MapSynthesisSpec::motoring_default(),
                    MapMode::Braking => MapSynthesisSpec::braking_default(),
                },
            };
            let map = match mode {
                MapMode::Motoring => synthesize_motoring_map(&spec)?,
                MapMode::Braking => synthesize_braking_map(&spec)?,
            };
            let name = match mode {
                MapMode::Motoring => "motoring_map.csv",
                MapMode::Braking => "braking_map.csv",
            };
            out.emit(name, &map.to_csv())
        }
        MapCommand::Stats { mode, map, threshold } => {
            if !(0.0..=1.0).contains(&threshold) {
                return Err(Error::Config(format!("threshold {threshold} not in [0, 1]")));
            }
            let m = map_for(mode.into(), map.as_deref(), config)?;
            let (peak, pi, pj) = m.peak();
            let stats = json!({
                "mode": m.mode(),
                "speed_points": m.speed_axis().len(),
                "torque_points": m.torque_axis().len(),
                "max_rpm": m.max_rpm(),
                "max_torque_nm": m.max_torque_nm(),
                "peak_efficiency": peak,
                "peak_rpm": m.speed_axis()[pi],
                "peak_torque_nm": m.torque_axis()[pj],
                "floor_efficiency": m.floor(),
                "min_efficiency": m.min_value(),
                "area_threshold": threshold,
                "area_fraction_above": m.area_fraction_above(threshold),
                "grid_fingerprint": m.fingerprint(),
            });
            out.emit("map_stats.json", &pretty(&stats))
        }
        MapCommand::Validate { mode, map } => {
            let m = load_map(&map, mode.into())?;
            println!(
                "map ok: {}x{} nodes, peak {}",
                m.speed_axis().len(),
                m.torque_axis().len(),
                m.peak().0
            );
            Ok(())
        }
    }
}

fn slope_command(cmd: SlopeCommand, config: &RunConfig, out: &Output) -> Result<(), Error> {
    let (args, optimum_only) = match cmd {
        SlopeCommand::Sweep(a) => (a, false),
        SlopeCommand::Optimum(a) => (a, true),
    };
    let grid = SweepGrid {
        v_min_kmh: args.vmin.unwrap_or(config.sweep.v_min_kmh),
        v_max_kmh: args.vmax.unwrap_or(config.sweep.v_max_kmh),
        step_kmh: args.step.unwrap_or(config.sweep.step_kmh),
        refine_step_kmh: config
            .sweep
            .refine_step_kmh
            .filter(|&r| r <= args.step.unwrap_or(config.sweep.step_kmh)),
    };
    let scenario = SlopeScenario::new(args.angle)
        .with_initial_speed(args.initial_speed)
        .with_cargo(args.cargo);
    let prepared = config.prepare()?;
    let sweep = prepared.model.sweep_speeds(&scenario, &grid)?;
    if optimum_only {
        out.emit(
            &format!("optimum_{}.json", args.angle),
            &pretty(&serde_json::to_value(&sweep.optimum).expect("operating point serializes")),
        )
    } else {
        out.emit(&format!("curve_{}.csv", args.angle), &curve_csv(&sweep))
    }
}

fn run_all(config: &RunConfig, out: &Output, parallel: usize) -> Result<(), Error> {
    if parallel == 0 {
        return Err(Error::Config("--parallel must be at least 1".into()));
    }
    config.validate()?;
    let prepared = config.prepare()?;
    let run_one = |s: &Scenario| config.run_scenario(&prepared, s);
    let outputs: Vec<ScenarioOutput> = if parallel == 1 {
        config.scenarios.iter().map(run_one).collect::<Result<_, _>>()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(parallel)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        pool.install(|| config.scenarios.par_iter().map(run_one).collect::<Result<_, _>>())?
    };

    let mut results = Vec::with_capacity(outputs.len());
    for (i, o) in outputs.into_iter().enumerate() {
        if let (Some(sweep), Some(_)) = (&o.sweep, &out.dir) {
            out.emit(&format!("curve_{i:02}.csv"), &curve_csv(sweep))?;
        }
        results.push(o.result);
    }
    let report = Report::new(
        config.vehicle.clone(),
        config.environment.clone(),
        prepared.provenance,
        results,
    );
    out.emit("report.json", &report.to_json())
}
