//! Experiment configuration: a TOML document with typed sections.
//!
//! ```toml
//! equation = "nls"            # or "nlkg"
//! seed = 0
//!
//! [nonlinearity]
//! kind = "power"              # power | exponential | free
//! p = 4.0
//! lambda = -1.0
//!
//! [grid]
//! kind = "gauss-bessel"       # or "uniform"
//! r_max = 96.0
//! n = 512
//!
//! [initial]
//! kind = "gaussian"           # gaussian | scaled-ground-state | file
//! amplitude = 1.0
//! mu = 1.0
//!
//! [integrator]                # omit to skip the evolution
//! t_final = 5.0
//! dt = 1e-3
//! snapshot_stride = 100
//!
//! [[audits]]
//! kind = "scattering"
//! windows = [1.0, 2.0]
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::EvolveConfig;
use crate::functionals::Equation;
use crate::ground_state::ShootingConfig;
use crate::morawetz::DEFAULT_DELTA;
use crate::nonlinearity::Nonlinearity;
use crate::radial::{GridKind, GridSpec, MIN_NODES};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub equation: Equation,
    pub nonlinearity: Nonlinearity,
    pub grid: GridSpec,
    pub initial: InitialData,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integrator: Option<Integrator>,
    #[serde(default)]
    pub audits: Vec<AuditSpec>,
    #[serde(default)]
    pub ground_state: ShootingConfig,
    /// Output directory; `--out` takes precedence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialData {
    /// `A e^{−μ r²}`, zero velocity for NLKG.
    Gaussian {
        amplitude: f64,
        mu: f64,
    },
    /// `ε Q₀` with the c = 1 ground state of the configured nonlinearity.
    ScaledGroundState {
        epsilon: f64,
    },
    /// Radial-field files; relative paths resolve against the config file.
    File {
        path: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        velocity: Option<PathBuf>,
    },
}

/// Final time plus the stepper settings; omitted keys take the
/// [`EvolveConfig`] defaults.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Integrator {
    pub t_final: f64,
    pub dt: f64,
    pub snapshot_stride: usize,
    pub monitor_stride: usize,
    pub max_sup_norm: f64,
    pub max_grad_sq: f64,
    pub boundary_band: f64,
    pub boundary_tolerance: f64,
}

impl Default for Integrator {
    fn default() -> Self {
        let e = EvolveConfig::default();
        Integrator {
            t_final: 0.0,
            dt: e.dt,
            snapshot_stride: e.snapshot_stride,
            monitor_stride: e.monitor_stride,
            max_sup_norm: e.max_sup_norm,
            max_grad_sq: e.max_grad_sq,
            boundary_band: e.boundary_band,
            boundary_tolerance: e.boundary_tolerance,
        }
    }
}

impl Integrator {
    pub fn evolve_config(&self) -> EvolveConfig {
        EvolveConfig {
            dt: self.dt,
            snapshot_stride: self.snapshot_stride,
            monitor_stride: self.monitor_stride,
            max_sup_norm: self.max_sup_norm,
            max_grad_sq: self.max_grad_sq,
            boundary_band: self.boundary_band,
            boundary_tolerance: self.boundary_tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AuditSpec {
    /// Identity residual of `dM/dt` at one cutoff radius.
    MorawetzIdentity {
        radius: f64,
        window: [f64; 2],
    },
    VirialMorawetz {
        radii: Vec<f64>,
        windows: Vec<[f64; 2]>,
    },
    WeightedDecay {
        horizons: Vec<f64>,
        #[serde(default = "default_delta")]
        delta: f64,
    },
    /// `∫ t^{−β} ∫|f(u)|`, exponential runs only.
    WeightedForce {
        horizons: Vec<f64>,
        #[serde(default = "default_delta")]
        delta: f64,
    },
    WindowSearch {
        epsilon: f64,
        horizon: f64,
        #[serde(default = "default_delta")]
        delta: f64,
    },
    Scattering {
        windows: Vec<f64>,
    },
    /// `K(u(t)) / ‖∇u(t)‖₂²` along the snapshots.
    Coercivity,
    /// Sharp G-N quotient over `count` sampled fields.
    GagliardoNirenberg {
        count: usize,
    },
    TrudingerMoser {
        a: f64,
        kappa0: f64,
        #[serde(default = "default_tm_mu")]
        gaussian_mu: Vec<f64>,
        #[serde(default = "default_tm_rho")]
        moser_rho: Vec<f64>,
        #[serde(default = "default_tm_fractions")]
        fractions: Vec<f64>,
        #[serde(default = "default_tm_grid")]
        grid: GridSpec,
    },
    RadialSobolev {
        count: usize,
        #[serde(default)]
        r0: f64,
    },
}

fn default_delta() -> f64 {
    DEFAULT_DELTA
}

fn default_tm_mu() -> Vec<f64> {
    vec![0.5, 1.0, 2.0]
}

fn default_tm_rho() -> Vec<f64> {
    vec![0.3, 0.1]
}

fn default_tm_fractions() -> Vec<f64> {
    vec![0.2, 0.5, 0.8, 0.95]
}

fn default_tm_grid() -> GridSpec {
    GridSpec::new(GridKind::Uniform, 12.0, 24_000)
}

impl AuditSpec {
    pub fn name(&self) -> &'static str {
        match self {
            AuditSpec::MorawetzIdentity { .. } => "morawetz-identity",
            AuditSpec::VirialMorawetz { .. } => "virial-morawetz",
            AuditSpec::WeightedDecay { .. } => "weighted-decay",
            AuditSpec::WeightedForce { .. } => "weighted-force",
            AuditSpec::WindowSearch { .. } => "window-search",
            AuditSpec::Scattering { .. } => "scattering",
            AuditSpec::Coercivity => "coercivity",
            AuditSpec::GagliardoNirenberg { .. } => "gagliardo-nirenberg",
            AuditSpec::TrudingerMoser { .. } => "trudinger-moser",
            AuditSpec::RadialSobolev { .. } => "radial-sobolev",
        }
    }

    /// Whether the audit reads a trajectory.
    pub fn needs_trajectory(&self) -> bool {
        !matches!(
            self,
            AuditSpec::GagliardoNirenberg { .. } | AuditSpec::TrudingerMoser { .. } | AuditSpec::RadialSobolev { .. }
        )
    }

    pub fn is_morawetz(&self) -> bool {
        matches!(
            self,
            AuditSpec::MorawetzIdentity { .. }
                | AuditSpec::VirialMorawetz { .. }
                | AuditSpec::WeightedDecay { .. }
                | AuditSpec::WeightedForce { .. }
                | AuditSpec::WindowSearch { .. }
                | AuditSpec::Coercivity
        )
    }
}

fn bad(path: impl Into<String>, msg: impl Into<String>) -> Error {
    Error::config(path, msg)
}

fn positive(path: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(bad(path, format!("must be positive and finite, got {x}")))
    }
}

fn increasing(path: &str, xs: &[f64]) -> Result<()> {
    if xs.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(bad(path, "must be strictly increasing"));
    }
    Ok(())
}

impl ExperimentConfig {
    /// Parse and validate a TOML document.
    pub fn from_toml(text: &str) -> Result<Self> {
        let value: toml::Value = toml::from_str(text).map_err(|e| bad("<document>", e.message().to_string()))?;
        Self::from_value(value)
    }

    pub fn from_value(value: toml::Value) -> Result<Self> {
        let cfg: ExperimentConfig = serde_path_to_error::deserialize(value).map_err(|e| {
            let path = e.path().to_string();
            bad(if path == "." { "<document>".into() } else { path }, e.into_inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Read a config file; relative file paths inside it are resolved
    /// against its directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::from_toml(&text)?;
        if let Some(dir) = path.parent() {
            cfg.resolve_paths(dir);
        }
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        if let InitialData::File { path, velocity } = &mut self.initial {
            if path.is_relative() {
                *path = base.join(&*path);
            }
            if let Some(v) = velocity {
                if v.is_relative() {
                    *v = base.join(&*v);
                }
            }
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        match self.nonlinearity {
            Nonlinearity::Power { p, lambda } => {
                if !(p.is_finite() && p > 2.0) {
                    return Err(bad("nonlinearity.p", format!("p > 2 required, got {p}")));
                }
                if lambda.abs() != 1.0 {
                    return Err(bad("nonlinearity.lambda", format!("must be +1 or -1, got {lambda}")));
                }
            }
            Nonlinearity::Exponential { kappa0, lambda } => {
                positive("nonlinearity.kappa0", kappa0)?;
                if lambda.abs() != 1.0 {
                    return Err(bad("nonlinearity.lambda", format!("must be +1 or -1, got {lambda}")));
                }
            }
            Nonlinearity::Free => {}
        }
        positive("grid.r_max", self.grid.r_max)?;
        if self.grid.n < MIN_NODES {
            return Err(bad("grid.n", format!("at least {MIN_NODES} nodes required, got {}", self.grid.n)));
        }
        if self.equation == Equation::Nls && self.grid.kind != GridKind::GaussBessel && self.integrator.is_some() {
            return Err(bad("grid.kind", "NLS evolution needs a gauss-bessel grid"));
        }
        match &self.initial {
            InitialData::Gaussian { amplitude, mu } => {
                if !amplitude.is_finite() {
                    return Err(bad("initial.amplitude", "must be finite"));
                }
                positive("initial.mu", *mu)?;
            }
            InitialData::ScaledGroundState { epsilon } => {
                if !epsilon.is_finite() {
                    return Err(bad("initial.epsilon", "must be finite"));
                }
                if self.nonlinearity == Nonlinearity::Free {
                    return Err(bad("initial.kind", "the free equation has no ground state"));
                }
            }
            InitialData::File { velocity, .. } => {
                if velocity.is_some() && self.equation == Equation::Nls {
                    return Err(bad("initial.velocity", "NLS data has no velocity"));
                }
            }
        }
        if let Some(int) = &self.integrator {
            positive("integrator.t_final", int.t_final)?;
            int.evolve_config().validate().map_err(|e| bad("integrator", e.to_string()))?;
        }
        for (i, audit) in self.audits.iter().enumerate() {
            let at = |field: &str| format!("audits[{i}].{field}");
            if audit.needs_trajectory() && self.integrator.is_none() {
                return Err(bad(format!("audits[{i}]"), format!("{} needs an [integrator] section", audit.name())));
            }
            let t_final = self.integrator.map(|i| i.t_final).unwrap_or(f64::INFINITY);
            match audit {
                AuditSpec::MorawetzIdentity { radius, window } => {
                    positive(&at("radius"), *radius)?;
                    if 2.0 * radius >= self.grid.r_max {
                        return Err(bad(at("radius"), "cutoff support 2R must lie inside the grid"));
                    }
                    if !(window[0] >= 0.0 && window[1] > window[0] && window[1] <= t_final) {
                        return Err(bad(at("window"), "need 0 <= t1 < t2 <= t_final"));
                    }
                }
                AuditSpec::VirialMorawetz { radii, windows } => {
                    if radii.is_empty() {
                        return Err(bad(at("radii"), "must not be empty"));
                    }
                    for (j, r) in radii.iter().enumerate() {
                        positive(&format!("audits[{i}].radii[{j}]"), *r)?;
                        if 2.0 * r >= self.grid.r_max {
                            return Err(bad(format!("audits[{i}].radii[{j}]"), "cutoff support 2R must lie inside the grid"));
                        }
                    }
                    if windows.is_empty() {
                        return Err(bad(at("windows"), "must not be empty"));
                    }
                    for (j, w) in windows.iter().enumerate() {
                        if !(w[0] >= 0.0 && w[1] > w[0] && w[1] <= t_final) {
                            return Err(bad(format!("audits[{i}].windows[{j}]"), "need 0 <= t1 < t2 <= t_final"));
                        }
                    }
                }
                AuditSpec::WeightedDecay { horizons, delta } | AuditSpec::WeightedForce { horizons, delta } => {
                    positive(&at("delta"), *delta)?;
                    for (j, t) in horizons.iter().enumerate() {
                        if !(*t >= 1.0 && *t <= t_final) {
                            return Err(bad(format!("audits[{i}].horizons[{j}]"), "need 1 <= T <= t_final"));
                        }
                    }
                    if matches!(audit, AuditSpec::WeightedForce { .. })
                        && !matches!(self.nonlinearity, Nonlinearity::Exponential { .. })
                    {
                        return Err(bad(at("kind"), "weighted-force applies to exponential nonlinearities"));
                    }
                }
                AuditSpec::WindowSearch { epsilon, horizon, delta } => {
                    positive(&at("epsilon"), *epsilon)?;
                    positive(&at("delta"), *delta)?;
                    if !(*horizon >= 1.0 && *horizon <= t_final) {
                        return Err(bad(at("horizon"), "need 1 <= T <= t_final"));
                    }
                }
                AuditSpec::Scattering { windows } => {
                    if self.grid.kind != GridKind::GaussBessel {
                        return Err(bad(at("kind"), "scattering check needs a gauss-bessel grid"));
                    }
                    increasing(&at("windows"), windows)?;
                    for (j, t) in windows.iter().enumerate() {
                        if !(*t > 0.0 && 2.0 * t <= t_final * (1.0 + 1e-12)) {
                            return Err(bad(format!("audits[{i}].windows[{j}]"), "need 0 < T and 2T <= t_final"));
                        }
                    }
                }
                AuditSpec::Coercivity => {}
                AuditSpec::GagliardoNirenberg { .. } => {
                    if !matches!(self.nonlinearity, Nonlinearity::Power { .. }) {
                        return Err(bad(at("kind"), "G-N audit needs a power nonlinearity"));
                    }
                }
                AuditSpec::TrudingerMoser {
                    a,
                    kappa0,
                    gaussian_mu,
                    moser_rho,
                    fractions,
                    grid,
                } => {
                    if !(a.is_finite() && *a >= 1.0) {
                        return Err(bad(at("a"), format!("a >= 1 required, got {a}")));
                    }
                    positive(&at("kappa0"), *kappa0)?;
                    for (j, m) in gaussian_mu.iter().enumerate() {
                        positive(&format!("audits[{i}].gaussian_mu[{j}]"), *m)?;
                    }
                    for (j, r) in moser_rho.iter().enumerate() {
                        if !(*r > 0.0 && *r < 1.0) {
                            return Err(bad(format!("audits[{i}].moser_rho[{j}]"), "must lie in (0, 1)"));
                        }
                    }
                    for (j, f) in fractions.iter().enumerate() {
                        positive(&format!("audits[{i}].fractions[{j}]"), *f)?;
                    }
                    positive(&at("grid.r_max"), grid.r_max)?;
                    if grid.n < MIN_NODES {
                        return Err(bad(at("grid.n"), "too few nodes"));
                    }
                }
                AuditSpec::RadialSobolev { r0, .. } => {
                    if !(*r0 >= 0.0) {
                        return Err(bad(at("r0"), "must be non-negative"));
                    }
                }
            }
        }
        Ok(())
    }

    /// Whether the run needs the c = 1 ground state.
    pub fn needs_ground_state(&self) -> bool {
        matches!(self.initial, InitialData::ScaledGroundState { .. })
            || self.nonlinearity.is_focusing()
            || self.audits.iter().any(|a| matches!(a, AuditSpec::GagliardoNirenberg { .. }))
    }
}

/// Set the value at a dotted path (`nonlinearity.p`, `audits[0].radii`)
/// inside a TOML tree.
pub fn set_path(root: &mut toml::Value, path: &str, value: toml::Value) -> Result<()> {
    let mut cur = root;
    let parts: Vec<&str> = path.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let (key, index) = match part.find('[') {
            Some(b) if part.ends_with(']') => {
                let idx: usize = part[b + 1..part.len() - 1]
                    .parse()
                    .map_err(|_| bad(path, format!("bad index in `{part}`")))?;
                (&part[..b], Some(idx))
            }
            _ => (*part, None),
        };
        let last = i + 1 == parts.len();
        let table = cur
            .as_table_mut()
            .ok_or_else(|| bad(path, format!("`{key}` is not inside a table")))?;
        if last && index.is_none() {
            table.insert(key.to_string(), value);
            return Ok(());
        }
        let next = if last {
            table.get_mut(key)
        } else {
            Some(
                table
                    .entry(key.to_string())
                    .or_insert_with(|| toml::Value::Table(Default::default())),
            )
        }
        .ok_or_else(|| bad(path, format!("no key `{key}`")))?;
        cur = match index {
            Some(idx) => {
                let arr = next
                    .as_array_mut()
                    .ok_or_else(|| bad(path, format!("`{key}` is not an array")))?;
                let len = arr.len();
                arr.get_mut(idx)
                    .ok_or_else(|| bad(path, format!("index {idx} out of range for `{key}` (length {len})")))?
            }
            None => next,
        };
        if last {
            *cur = value;
            return Ok(());
        }
    }
    Err(bad(path, "empty path"))
}

/// Interpret a sweep value: TOML scalar or array syntax, bare words as strings.
pub fn parse_value(text: &str) -> toml::Value {
    let doc = format!("v = {text}");
    match toml::from_str::<toml::Table>(&doc) {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(text.into())),
        Err(_) => toml::Value::String(text.into()),
    }
}
