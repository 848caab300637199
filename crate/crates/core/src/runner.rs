//! Config-driven experiment runs and parameter sweeps.
//!
//! A run directory holds `manifest.json`, `monitor.csv`, `snapshots/` and
//! `reports/*.json`. Data files never contain wall-clock values, so the same
//! config reproduces them bit for bit.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::config::{parse_value, set_path, AuditSpec, ExperimentConfig, InitialData};
use crate::diagnostics::{
    classify_initial_data, coercivity_report, gn_audit, radial_sobolev_audit, sample_fields, scattering_profile_cauchy,
    tm_audit, tm_family, ClassificationVerdict,
};
use crate::error::{Error, Result};
use crate::evolve::{evolve_partial, Trajectory, NLS_SIGN_CONVENTION};
use crate::functionals::{Equation, EvolutionState};
use crate::ground_state::{solve_ground_state, GroundState};
use crate::morawetz::{
    build_cutoff, identity_residual, virial_morawetz_audit, weighted_decay_integral, weighted_f_l1,
    window_smallness_search, BelowThreshold,
};
use crate::nonlinearity::Nonlinearity;
use crate::radial::io::load_field;
use crate::radial::{RadialField, RadialGrid};

pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Environment variable naming the default output root.
pub const OUT_ROOT_ENV: &str = "RADSCAT_OUT";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    GroundState,
    Classify,
    Evolve,
    AuditMorawetz,
    AuditInequalities,
    ScatterCheck,
    /// Every step the config asks for.
    Run,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::GroundState => "ground-state",
            Stage::Classify => "classify",
            Stage::Evolve => "evolve",
            Stage::AuditMorawetz => "audit-morawetz",
            Stage::AuditInequalities => "audit-inequalities",
            Stage::ScatterCheck => "scatter-check",
            Stage::Run => "run",
        })
    }
}

impl Stage {
    fn classifies(self) -> bool {
        !matches!(self, Stage::GroundState | Stage::AuditInequalities)
    }

    fn evolves(self) -> bool {
        matches!(self, Stage::Evolve | Stage::AuditMorawetz | Stage::ScatterCheck | Stage::Run)
    }

    fn wants(self, audit: &AuditSpec) -> bool {
        match self {
            Stage::Run => true,
            Stage::AuditMorawetz => audit.is_morawetz(),
            Stage::ScatterCheck => matches!(audit, AuditSpec::Scattering { .. }),
            Stage::AuditInequalities => !audit.needs_trajectory(),
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub class: String,
    pub exit_code: i32,
    pub message: String,
}

impl From<&Error> for ErrorRecord {
    fn from(e: &Error) -> Self {
        ErrorRecord {
            class: e.class().to_string(),
            exit_code: e.exit_code(),
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub run_id: String,
    pub stage: Stage,
    pub completed: bool,
    pub error: Option<ErrorRecord>,
    pub regime: Option<String>,
    /// Headline scalars keyed `section.name`.
    pub metrics: BTreeMap<String, f64>,
}

impl RunSummary {
    pub fn exit_code(&self) -> i32 {
        self.error.as_ref().map_or(0, |e| e.exit_code)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub run_id: String,
    pub stage: Stage,
    pub version: String,
    pub convention: String,
    pub config: ExperimentConfig,
    pub outputs: Vec<String>,
    pub summary: RunSummary,
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub stage: Stage,
    pub out: Option<PathBuf>,
    pub force: bool,
}

/// Result of [`run`]: where it went, what happened, and whether it was
/// served from a completed directory.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub summary: RunSummary,
    pub reused: bool,
}

pub fn run_id(cfg: &ExperimentConfig, stage: Stage) -> Result<String> {
    let mut h = Sha256::new();
    h.update(stage.to_string().as_bytes());
    h.update(b"\0");
    h.update(CODE_VERSION.as_bytes());
    h.update(b"\0");
    h.update(serde_json::to_vec(cfg)?);
    Ok(hex::encode(&h.finalize()[..8]))
}

/// `--out`, then the config's `out`, then `$RADSCAT_OUT/<id>`, then `runs/<id>`.
pub fn resolve_out_dir(cfg: &ExperimentConfig, explicit: Option<&Path>, id: &str) -> PathBuf {
    if let Some(p) = explicit {
        return p.to_path_buf();
    }
    if let Some(p) = &cfg.out {
        return p.clone();
    }
    match std::env::var_os(OUT_ROOT_ENV) {
        Some(root) if !root.is_empty() => PathBuf::from(root).join(id),
        _ => PathBuf::from("runs").join(id),
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let f = BufWriter::new(fs::File::create(path)?);
    serde_json::to_writer_pretty(f, value)?;
    Ok(())
}

struct Context {
    dir: PathBuf,
    outputs: Vec<String>,
    metrics: BTreeMap<String, f64>,
    regime: Option<String>,
}

impl Context {
    fn report<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let rel = format!("reports/{name}.json");
        write_json(&self.dir.join(&rel), value)?;
        self.outputs.push(rel);
        Ok(())
    }

    fn metric(&mut self, key: impl Into<String>, v: f64) {
        self.metrics.insert(key.into(), v);
    }
}

fn ground_state_for(nl: &Nonlinearity, cfg: &ExperimentConfig) -> Result<GroundState> {
    // thresholds and the G-N constant come from the focusing problem
    let focusing = match *nl {
        Nonlinearity::Power { p, .. } => Nonlinearity::power(p, 1.0)?,
        Nonlinearity::Exponential { kappa0, .. } => Nonlinearity::exponential(kappa0, 1.0)?,
        Nonlinearity::Free => return Err(Error::NoGroundState("the free equation has no ground state".into())),
    };
    solve_ground_state(&focusing, 1.0, &cfg.ground_state)
}

fn initial_state(cfg: &ExperimentConfig, grid: &Arc<RadialGrid>, q: Option<&GroundState>) -> Result<EvolutionState> {
    let u = match &cfg.initial {
        InitialData::Gaussian { amplitude, mu } => RadialField::gaussian(grid.clone(), *amplitude, *mu)?,
        InitialData::ScaledGroundState { epsilon } => {
            let q = q.ok_or_else(|| Error::MissingGroundState("scaled-ground-state data".into()))?;
            q.profile_on(grid).scale(*epsilon)
        }
        InitialData::File { path, .. } => {
            let u = load_field(path)?;
            if u.grid().spec() != grid.spec() {
                return Err(Error::config("initial.path", "field file grid differs from [grid]"));
            }
            u
        }
    };
    match cfg.equation {
        Equation::Nls => Ok(EvolutionState::nls(u, 0.0)),
        Equation::Nlkg => {
            let v = match &cfg.initial {
                InitialData::File { velocity: Some(p), .. } => {
                    let v = load_field(p)?;
                    if v.grid().spec() != grid.spec() {
                        return Err(Error::config("initial.velocity", "velocity file grid differs from [grid]"));
                    }
                    v
                }
                _ => RadialField::zeros(grid.clone()),
            };
            EvolutionState::nlkg(u, v, 0.0)
        }
    }
}

fn record_classification(ctx: &mut Context, v: &ClassificationVerdict) -> Result<()> {
    ctx.report("classification", v)?;
    ctx.regime = Some(v.regime.to_string());
    ctx.metric("classification.level", v.level);
    ctx.metric("classification.k_virial", v.k_virial);
    if let Some(m) = v.threshold {
        ctx.metric("classification.threshold", m);
    }
    Ok(())
}

fn run_audit(
    ctx: &mut Context,
    idx: usize,
    audit: &AuditSpec,
    cfg: &ExperimentConfig,
    grid: &Arc<RadialGrid>,
    traj: Option<&Trajectory>,
    q: Option<&GroundState>,
) -> Result<()> {
    let name = format!("{}-{idx}", audit.name());
    let below = q.filter(|_| cfg.nonlinearity.is_focusing()).map(|q| BelowThreshold { m: q.threshold().m });
    let traj = || traj.ok_or_else(|| Error::invalid(format!("{name} needs a trajectory")));
    match audit {
        AuditSpec::MorawetzIdentity { radius, window } => {
            let cw = build_cutoff(*radius, grid)?;
            let rep = identity_residual(traj()?, &cw, (window[0], window[1]))?;
            let mut f = BufWriter::new(fs::File::create(ctx.dir.join(format!("reports/{name}.csv")))?);
            rep.write_csv(&mut f)?;
            ctx.outputs.push(format!("reports/{name}.csv"));
            ctx.metric(format!("{name}.relative_residual"), rep.relative_residual());
            ctx.report(&name, &rep)?;
        }
        AuditSpec::VirialMorawetz { radii, windows } => {
            let w: Vec<(f64, f64)> = windows.iter().map(|w| (w[0], w[1])).collect();
            let rep = virial_morawetz_audit(traj()?, radii, &w, below)?;
            ctx.metric(format!("{name}.c_star"), rep.c_star);
            ctx.metric(format!("{name}.stable"), rep.stable as u8 as f64);
            ctx.report(&name, &rep)?;
        }
        AuditSpec::WeightedDecay { horizons, delta } => {
            let rows = horizons
                .iter()
                .map(|&t| weighted_decay_integral(traj()?, t, *delta))
                .collect::<Result<Vec<_>>>()?;
            if let Some(max) = rows.iter().map(|r| r.ratio).reduce(f64::max) {
                ctx.metric(format!("{name}.max_ratio"), max);
            }
            ctx.report(&name, &rows)?;
        }
        AuditSpec::WeightedForce { horizons, delta } => {
            let rows = horizons
                .iter()
                .map(|&t| weighted_f_l1(traj()?, t, *delta))
                .collect::<Result<Vec<_>>>()?;
            if let Some(max) = rows.iter().map(|r| r.ratio).reduce(f64::max) {
                ctx.metric(format!("{name}.max_ratio"), max);
            }
            ctx.report(&name, &rows)?;
        }
        AuditSpec::WindowSearch { epsilon, horizon, delta } => {
            let found = window_smallness_search(traj()?, *epsilon, *horizon, *delta)?;
            ctx.metric(format!("{name}.found"), found.is_some() as u8 as f64);
            ctx.report(&name, &found)?;
        }
        AuditSpec::Scattering { windows } => {
            let rep = scattering_profile_cauchy(traj()?, windows)?;
            ctx.metric(format!("{name}.consistent"), rep.consistent as u8 as f64);
            if let Some(d) = rep.deltas.last() {
                ctx.metric(format!("{name}.last_delta"), *d);
            }
            ctx.report(&name, &rep)?;
        }
        AuditSpec::Coercivity => {
            let rep = coercivity_report(traj()?, q)?;
            ctx.metric(format!("{name}.fitted_constant"), rep.fitted_constant);
            ctx.report(&name, &rep)?;
        }
        AuditSpec::GagliardoNirenberg { count } => {
            let q = q.ok_or_else(|| Error::MissingGroundState("G-N audit".into()))?;
            let Nonlinearity::Power { p, .. } = cfg.nonlinearity else {
                return Err(Error::invalid("G-N audit needs a power nonlinearity"));
            };
            let fields = sample_fields(grid, *count, cfg.seed)?;
            let rep = gn_audit(&fields, p, q)?;
            ctx.metric(format!("{name}.normalized_max"), rep.normalized_max);
            ctx.metric(format!("{name}.ground_state_ratio"), rep.ground_state_ratio);
            ctx.report(&name, &rep)?;
        }
        AuditSpec::TrudingerMoser {
            a,
            kappa0,
            gaussian_mu,
            moser_rho,
            fractions,
            grid: spec,
        } => {
            let g = spec.build()?;
            let fields = tm_family(&g, *a, *kappa0, gaussian_mu, moser_rho, fractions)?;
            let rep = tm_audit(&fields, *a, *kappa0)?;
            ctx.metric(format!("{name}.fitted_constant"), rep.fitted_constant);
            ctx.metric(format!("{name}.rejected"), rep.rejected as f64);
            ctx.report(&name, &rep)?;
        }
        AuditSpec::RadialSobolev { count, r0 } => {
            let fields = sample_fields(grid, *count, cfg.seed)?;
            let rep = radial_sobolev_audit(&fields, *r0)?;
            ctx.metric(format!("{name}.fitted_constant"), rep.fitted_constant);
            ctx.report(&name, &rep)?;
        }
    }
    Ok(())
}

fn execute(ctx: &mut Context, cfg: &ExperimentConfig, stage: Stage) -> Result<()> {
    let grid = cfg.grid.build()?;
    let want_gs = stage == Stage::GroundState
        || (stage.classifies() && cfg.needs_ground_state())
        || (stage == Stage::AuditInequalities
            && cfg.audits.iter().any(|a| matches!(a, AuditSpec::GagliardoNirenberg { .. })));
    let q = if want_gs {
        let q = ground_state_for(&cfg.nonlinearity, cfg)?;
        let s = q.summary();
        ctx.metric("ground_state.peak", s.peak);
        ctx.metric("ground_state.grad_mass_ratio", s.grad_sq / s.mass_sq);
        ctx.metric("ground_state.lp_mass_ratio", s.lp_norm / s.mass_sq);
        ctx.metric("ground_state.j_value", s.j_value);
        ctx.metric("ground_state.threshold", s.threshold);
        ctx.metric("ground_state.max_residual", s.residuals.max());
        ctx.report("ground_state", &s)?;
        q.save(ctx.dir.join("reports"), "ground_state")?;
        Some(q)
    } else {
        None
    };
    if stage == Stage::GroundState {
        return Ok(());
    }
    let mut traj = None;
    if stage.classifies() {
        let state = initial_state(cfg, &grid, q.as_ref())?;
        let verdict = classify_initial_data(&state, &cfg.nonlinearity, q.as_ref())?;
        record_classification(ctx, &verdict)?;
        if stage.evolves() {
            if let Some(int) = &cfg.integrator {
                let (t, abort) = evolve_partial(&state, &cfg.nonlinearity, int.t_final, &int.evolve_config())?;
                let mut f = BufWriter::new(fs::File::create(ctx.dir.join("monitor.csv"))?);
                t.write_monitor_csv(&mut f)?;
                drop(f);
                ctx.outputs.push("monitor.csv".into());
                fs::create_dir_all(ctx.dir.join("snapshots"))?;
                t.write_snapshots(ctx.dir.join("snapshots"))?;
                ctx.outputs.push("snapshots/".into());
                let (dm, de) = t.drifts();
                ctx.metric("evolve.t_end", t.t_end());
                ctx.metric("evolve.mass_drift", dm);
                ctx.metric("evolve.energy_drift", de);
                let rep = serde_json::json!({
                    "t_end": t.t_end(),
                    "snapshots": t.states.len(),
                    "monitor_rows": t.monitor.len(),
                    "mass_drift": dm,
                    "energy_drift": de,
                    "step": t.step_params,
                    "abort": abort.as_ref().map(ErrorRecord::from),
                });
                ctx.report("evolution", &rep)?;
                if let Some(e) = abort {
                    return Err(e);
                }
                traj = Some(t);
            }
        }
    }
    let mut first_err = None;
    for (i, audit) in cfg.audits.iter().enumerate() {
        if !stage.wants(audit) || (audit.needs_trajectory() && traj.is_none()) {
            continue;
        }
        if let Err(e) = run_audit(ctx, i, audit, cfg, &grid, traj.as_ref(), q.as_ref()) {
            let name = format!("{}-{i}", audit.name());
            ctx.report(&name, &serde_json::json!({ "error": ErrorRecord::from(&e) }))?;
            first_err.get_or_insert(e);
        }
    }
    first_err.map_or(Ok(()), Err)
}

/// Execute one stage of a config. Errors of the experiment itself end up
/// in the summary; only failures to write the directory are returned.
pub fn run(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunOutcome> {
    cfg.validate()?;
    let id = run_id(cfg, opts.stage)?;
    let dir = resolve_out_dir(cfg, opts.out.as_deref(), &id);
    let manifest_path = dir.join("manifest.json");
    if manifest_path.exists() && !opts.force {
        let old: Manifest = serde_json::from_slice(&fs::read(&manifest_path)?)?;
        if old.run_id != id {
            return Err(Error::invalid(format!(
                "{} holds run {} (this config is {id}); pass --force to replace it",
                dir.display(),
                old.run_id
            )));
        }
        if old.summary.completed {
            return Ok(RunOutcome {
                dir,
                summary: old.summary,
                reused: true,
            });
        }
    }
    if dir.exists() {
        fs::remove_dir_all(&dir)?;
    }
    fs::create_dir_all(dir.join("reports"))?;
    let mut ctx = Context {
        dir: dir.clone(),
        outputs: Vec::new(),
        metrics: BTreeMap::new(),
        regime: None,
    };
    let result = execute(&mut ctx, cfg, opts.stage);
    let summary = RunSummary {
        run_id: id.clone(),
        stage: opts.stage,
        completed: result.is_ok(),
        error: result.as_ref().err().map(ErrorRecord::from),
        regime: ctx.regime.clone(),
        metrics: ctx.metrics.clone(),
    };
    let mut outputs = ctx.outputs.clone();
    outputs.sort();
    outputs.dedup();
    let manifest = Manifest {
        run_id: id,
        stage: opts.stage,
        version: CODE_VERSION.to_string(),
        convention: NLS_SIGN_CONVENTION.to_string(),
        config: cfg.clone(),
        outputs,
        summary: summary.clone(),
    };
    write_json(&manifest_path, &manifest)?;
    Ok(RunOutcome {
        dir,
        summary,
        reused: false,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: String,
    pub dir: Option<PathBuf>,
    pub summary: Option<RunSummary>,
    /// Set when the member config itself was rejected.
    pub error: Option<ErrorRecord>,
}

impl SweepRow {
    pub fn exit_code(&self) -> i32 {
        match (&self.error, &self.summary) {
            (Some(e), _) => e.exit_code,
            (None, Some(s)) => s.exit_code(),
            _ => 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepOptions {
    pub axis: String,
    pub values: Vec<String>,
    pub stage: Stage,
    pub out: PathBuf,
    pub jobs: usize,
    pub force: bool,
}

fn member_dir_name(axis: &str, value: &str) -> String {
    let clean = |s: &str| -> String {
        s.chars()
            .map(|c| if c.is_ascii_alphanumeric() || "._-".contains(c) { c } else { '_' })
            .collect()
    };
    format!("{}={}", clean(axis), clean(value))
}

/// Run the base config once per axis value, `jobs` members at a time, and
/// write `sweep.csv` keyed by the value. Member failures become rows.
pub fn sweep(base: &toml::Value, base_dir: Option<&Path>, opts: &SweepOptions) -> Result<Vec<SweepRow>> {
    fs::create_dir_all(&opts.out)?;
    let member = |value: &String| -> SweepRow {
        let mut doc = base.clone();
        let parsed = set_path(&mut doc, &opts.axis, parse_value(value)).and_then(|_| {
            let mut cfg = ExperimentConfig::from_value(doc)?;
            if let Some(b) = base_dir {
                cfg.resolve_paths(b);
            }
            Ok(cfg)
        });
        let cfg = match parsed {
            Ok(c) => c,
            Err(e) => {
                return SweepRow {
                    value: value.clone(),
                    dir: None,
                    summary: None,
                    error: Some(ErrorRecord::from(&e)),
                }
            }
        };
        let dir = opts.out.join(member_dir_name(&opts.axis, value));
        let ro = RunOptions {
            stage: opts.stage,
            out: Some(dir.clone()),
            force: opts.force,
        };
        match run(&cfg, &ro) {
            Ok(o) => SweepRow {
                value: value.clone(),
                dir: Some(dir),
                summary: Some(o.summary),
                error: None,
            },
            Err(e) => SweepRow {
                value: value.clone(),
                dir: Some(dir),
                summary: None,
                error: Some(ErrorRecord::from(&e)),
            },
        }
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs.max(1))
        .build()
        .map_err(|e| Error::invalid(e.to_string()))?;
    let rows: Vec<SweepRow> = pool.install(|| {
        use rayon::prelude::*;
        opts.values.par_iter().map(member).collect()
    });
    write_sweep_csv(&opts.out.join("sweep.csv"), &opts.axis, &rows)?;
    write_json(&opts.out.join("sweep.json"), &rows)?;
    Ok(rows)
}

fn write_sweep_csv(path: &Path, axis: &str, rows: &[SweepRow]) -> Result<()> {
    let mut keys: Vec<String> = rows
        .iter()
        .filter_map(|r| r.summary.as_ref())
        .flat_map(|s| s.metrics.keys().cloned())
        .collect();
    keys.sort();
    keys.dedup();
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec![axis.to_string(), "exit_code".into(), "error_class".into(), "regime".into()];
    header.extend(keys.iter().cloned());
    w.write_record(&header)?;
    for r in rows {
        let s = r.summary.as_ref();
        let err = r.error.as_ref().or_else(|| s.and_then(|s| s.error.as_ref()));
        let mut rec = vec![
            r.value.clone(),
            r.exit_code().to_string(),
            err.map(|e| e.class.clone()).unwrap_or_default(),
            s.and_then(|s| s.regime.clone()).unwrap_or_default(),
        ];
        for k in &keys {
            rec.push(s.and_then(|s| s.metrics.get(k)).map(|v| v.to_string()).unwrap_or_default());
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Read back a run directory's manifest.
pub fn read_manifest(dir: impl AsRef<Path>) -> Result<Manifest> {
    Ok(serde_json::from_slice(&fs::read(dir.as_ref().join("manifest.json"))?)?)
}

/// Value-level view of a report, for tests and tooling.
pub fn read_report(dir: impl AsRef<Path>, name: &str) -> Result<Value> {
    let path = dir.as_ref().join("reports").join(format!("{name}.json"));
    Ok(serde_json::from_slice(&fs::read(path)?)?)
}
