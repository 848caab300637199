use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::{info, warn};
use radscat::config::ExperimentConfig;
use radscat::runner::{run, sweep, RunOptions, RunSummary, Stage, SweepOptions, OUT_ROOT_ENV};
use radscat::{Error, Result};

/// Radial NLS / NLKG experiments: ground states, evolutions and audits.
#[derive(Parser, Debug)]
#[command(name = "radscat", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Experiment config (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; defaults to the config's `out`, then $RADSCAT_OUT/<run id>.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Concurrent sweep members.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Recompute even if the output directory holds a completed run.
    #[arg(long, global = true)]
    force: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve for the c = 1 ground state and check its identities.
    GroundState,
    /// Classify the initial data against the thresholds.
    Classify,
    /// Classify and evolve, writing monitor.csv and snapshots.
    Evolve,
    /// Evolve and run the Morawetz-type audits of the config.
    AuditMorawetz,
    /// Run the functional-inequality audits of the config.
    AuditInequalities,
    /// Evolve and run the scattering checks of the config.
    ScatterCheck,
    /// Every step the config asks for.
    Run,
    /// Repeat a stage over values of one config entry.
    Sweep(SweepArgs),
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Dotted config path, e.g. `nonlinearity.p` or `audits[0].radii`.
    #[arg(long)]
    axis: String,
    /// Comma-separated scalar values.
    #[arg(long, value_delimiter = ',')]
    values: Vec<String>,
    /// Extra value in TOML syntax (repeatable), for arrays and tables.
    #[arg(long = "value")]
    value: Vec<String>,
    /// Stage run for each member.
    #[arg(long, default_value = "run")]
    stage: String,
}

fn parse_stage(s: &str) -> Result<Stage> {
    Ok(match s {
        "ground-state" => Stage::GroundState,
        "classify" => Stage::Classify,
        "evolve" => Stage::Evolve,
        "audit-morawetz" => Stage::AuditMorawetz,
        "audit-inequalities" => Stage::AuditInequalities,
        "scatter-check" => Stage::ScatterCheck,
        "run" => Stage::Run,
        other => return Err(Error::InvalidArgument(format!("unknown stage `{other}`"))),
    })
}

fn config_path(g: &Global) -> Result<&Path> {
    g.config
        .as_deref()
        .ok_or_else(|| Error::InvalidArgument("--config <path> is required".into()))
}

fn report(summary: &RunSummary, dir: &Path, reused: bool) {
    let status = match &summary.error {
        None => "ok".to_string(),
        Some(e) => format!("{} (exit {})", e.class, e.exit_code),
    };
    println!("run {} [{}] -> {}: {status}", summary.run_id, summary.stage, dir.display());
    if reused {
        println!("  completed earlier; pass --force to recompute");
    }
    if let Some(r) = &summary.regime {
        println!("  regime: {r}");
    }
    for (k, v) in &summary.metrics {
        println!("  {k} = {v}");
    }
    if let Some(e) = &summary.error {
        println!("  error: {}", e.message);
    }
}

fn single(g: &Global, stage: Stage) -> Result<i32> {
    let cfg = ExperimentConfig::load(config_path(g)?)?;
    let out = run(
        &cfg,
        &RunOptions {
            stage,
            out: g.out.clone(),
            force: g.force,
        },
    )?;
    report(&out.summary, &out.dir, out.reused);
    Ok(out.summary.exit_code())
}

fn do_sweep(g: &Global, a: &SweepArgs) -> Result<i32> {
    let path = config_path(g)?;
    let text = std::fs::read_to_string(path)?;
    let base: toml::Value = toml::from_str(&text).map_err(|e| Error::ConfigInvalid {
        path: "<document>".into(),
        message: e.message().to_string(),
    })?;
    let out = match &g.out {
        Some(p) => p.clone(),
        None => {
            let root = std::env::var_os(OUT_ROOT_ENV)
                .filter(|r| !r.is_empty())
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from("runs"));
            root.join(format!("sweep-{}", a.axis.replace(['[', ']'], "_")))
        }
    };
    let mut values = a.values.clone();
    values.extend(a.value.iter().cloned());
    values.retain(|v| !v.trim().is_empty());
    let rows = sweep(
        &base,
        path.parent(),
        &SweepOptions {
            axis: a.axis.clone(),
            values,
            stage: parse_stage(&a.stage)?,
            out: out.clone(),
            jobs: g.jobs,
            force: g.force,
        },
    )?;
    println!("sweep over {} ({} members) -> {}", a.axis, rows.len(), out.join("sweep.csv").display());
    for r in &rows {
        let code = r.exit_code();
        if code != 0 {
            warn!("{} = {}: exit {code}", a.axis, r.value);
        }
        println!("  {} = {}: exit {code}", a.axis, r.value);
    }
    Ok(0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    info!("{:?}", cli.command);
    let result = match &cli.command {
        Command::GroundState => single(&cli.global, Stage::GroundState),
        Command::Classify => single(&cli.global, Stage::Classify),
        Command::Evolve => single(&cli.global, Stage::Evolve),
        Command::AuditMorawetz => single(&cli.global, Stage::AuditMorawetz),
        Command::AuditInequalities => single(&cli.global, Stage::AuditInequalities),
        Command::ScatterCheck => single(&cli.global, Stage::ScatterCheck),
        Command::Run => single(&cli.global, Stage::Run),
        Command::Sweep(a) => do_sweep(&cli.global, a),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
