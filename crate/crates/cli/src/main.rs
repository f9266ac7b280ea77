//! `dismantle`: plan, decompose, simulate and report on scenario files.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use dismantle_core::dspace::{build_graph, sample_sphere, DirectionSet};
use dismantle_core::exec::{
    load_faults, read_results, run_experiment, write_experiment, write_report, ExecConfig,
    FaultFileError, FaultSpec,
};
use dismantle_core::model::load_model;
use dismantle_core::planner::{plan_task, PlanEntry};
use dismantle_core::skill::{decompose_plan, ExecState};
use dismantle_core::{AssemblyModel, ModelError, PlanError};

#[derive(Parser)]
#[command(name = "dismantle", version, about = "Disassembly planning and skill execution in simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Plan the scenario's task and print the plan as JSON.
    Plan(Common),
    /// Print the skill primitives of the plan, one JSON object per line.
    Decompose(Common),
    /// Execute the plan on the simulated robot and write the metrics report.
    Simulate(Simulate),
    /// Rebuild the metrics report from a directory written by `simulate`.
    Report(ReportArgs),
}

#[derive(Args)]
struct Common {
    /// Scenario file.
    scenario: PathBuf,
    /// Number of sampled extraction directions.
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file (plan, decompose) or directory (simulate).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Simulate {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
    reps: u64,
    /// JSON file with faults to inject.
    #[arg(long)]
    faults: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// Directory written by `simulate`.
    dir: PathBuf,
    /// Where to write the rebuilt report (defaults to `dir`).
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failure with the process exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl Failure {
    fn new(code: u8, error: impl Into<anyhow::Error>) -> Self {
        Failure {
            code,
            error: error.into(),
        }
    }
}

const EXIT_PARSE: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        let code = match e {
            ModelError::Parse { .. } | ModelError::Io(_) => EXIT_PARSE,
            ModelError::Validation { .. } | ModelError::UnknownComponent(_) => EXIT_VALIDATION,
        };
        Failure::new(code, e)
    }
}

impl From<PlanError> for Failure {
    fn from(e: PlanError) -> Self {
        Failure::new(EXIT_INFEASIBLE, e)
    }
}

impl From<FaultFileError> for Failure {
    fn from(e: FaultFileError) -> Self {
        let code = match e {
            FaultFileError::Invalid(_) => EXIT_VALIDATION,
            _ => EXIT_PARSE,
        };
        Failure::new(code, e)
    }
}

fn io(e: impl Into<anyhow::Error>) -> Failure {
    Failure::new(EXIT_PARSE, e)
}

struct Loaded {
    model: AssemblyModel,
    dirs: DirectionSet,
    plan: Vec<PlanEntry>,
}

fn load(args: &Common) -> Result<Loaded, Failure> {
    let model = load_model(&args.scenario)?;
    let dirs = sample_sphere(args.samples as usize, args.seed);
    let plan = plan_task(&model, &dirs)?.entries();
    Ok(Loaded { model, dirs, plan })
}

/// Writes `text` to `out` if given, to stdout otherwise.
fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(io)?;
            }
            std::fs::write(path, text)
                .with_context(|| format!("cannot write {}", path.display()))
                .map_err(io)
        }
        None => std::io::stdout().write_all(text.as_bytes()).map_err(io),
    }
}

fn cmd_plan(args: &Common) -> Result<(), Failure> {
    let loaded = load(args)?;
    let graph = build_graph(&loaded.model, &loaded.dirs).map_err(|e| Failure::new(EXIT_INFEASIBLE, e))?;
    eprint!("{}", graph.summary());
    eprintln!("{} manipulation primitives", loaded.plan.len());
    let mut json = serde_json::to_string_pretty(&loaded.plan).map_err(io)?;
    json.push('\n');
    emit(args.out.as_deref(), &json)
}

fn cmd_decompose(args: &Common) -> Result<(), Failure> {
    let loaded = load(args)?;
    let model = &loaded.model;
    let poses = model.components.iter().map(|c| (c.id.clone(), c.pose)).collect();
    let aps = decompose_plan(&loaded.plan, &ExecState::new(model.home, poses), model)
        .map_err(|e| Failure::new(EXIT_VALIDATION, e))?;
    let text: String = aps.iter().map(|(_, ap)| format!("{}\n", ap.to_json_line())).collect();
    emit(args.out.as_deref(), &text)
}

fn default_out(scenario: &Path) -> PathBuf {
    let stem = scenario.file_stem().map_or("run".into(), |s| s.to_string_lossy().into_owned());
    PathBuf::from("out").join(stem)
}

fn cmd_simulate(args: &Simulate) -> Result<(), Failure> {
    let faults: Vec<FaultSpec> = match &args.faults {
        Some(p) => load_faults(p)?,
        None => Vec::new(),
    };
    let loaded = load(&args.common)?;
    let config = ExecConfig {
        seed: args.common.seed,
        ..ExecConfig::default()
    };
    let exp = run_experiment(&loaded.plan, &loaded.model, &loaded.dirs, &config, args.reps as usize, &faults);
    let out = args.common.out.clone().unwrap_or_else(|| default_out(&args.common.scenario));
    write_experiment(&out, &exp)
        .with_context(|| format!("cannot write results to {}", out.display()))
        .map_err(io)?;
    eprintln!("results written to {}", out.display());
    print!("{}", exp.report.to_table());
    Ok(())
}

fn cmd_report(args: &ReportArgs) -> Result<(), Failure> {
    let report = read_results(&args.dir).map_err(io)?;
    let out = args.out.as_deref().unwrap_or(&args.dir);
    std::fs::create_dir_all(out).map_err(io)?;
    write_report(out, &report).map_err(io)?;
    print!("{}", report.to_table());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Plan(a) => cmd_plan(a),
        Command::Decompose(a) => cmd_decompose(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Report(a) => cmd_report(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
