//! Time stepping for both equations, free propagators and trajectory records.
//!
//! NLS `i u_t − Δu = f(u)` uses Strang splitting: half nonlinear phase, the
//! exact linear flow `e^{+ik²dt}` on Hankel modes, half nonlinear phase.
//! NLKG `u_tt − Δu + u = f(u)` uses the impulse method: half kick with
//! `f(u)`, exact Klein–Gordon rotation with `ω = √(1+k²)`, half kick.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{abs_virial_integral, energy, Equation, EvolutionState};
use crate::nonlinearity::Nonlinearity;
use crate::radial::io::save_field;
use crate::radial::ops::{grad_sq, mass_sq};
use crate::radial::{GridSpec, RadialField, RadialGrid};

/// Recorded in run metadata: the linear symbol is `e^{+ik²t}` on Hankel
/// modes, i.e. the flow of `i u_t = Δu`.
pub const NLS_SIGN_CONVENTION: &str = "i u_t - Lap u = f(u); linear symbol exp(+i k^2 t)";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolveConfig {
    pub dt: f64,
    pub snapshot_stride: usize,
    pub monitor_stride: usize,
    /// Abort with blowup-suspected once `sup|u|` exceeds this.
    pub max_sup_norm: f64,
    /// Abort with blowup-suspected once `‖∇u‖²` exceeds this.
    pub max_grad_sq: f64,
    /// Width of the outer band, as a fraction of `r_max`.
    pub boundary_band: f64,
    /// Largest tolerated mass fraction inside the outer band.
    pub boundary_tolerance: f64,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        EvolveConfig {
            dt: 1e-3,
            snapshot_stride: 100,
            monitor_stride: 1,
            max_sup_norm: 1e3,
            max_grad_sq: 1e8,
            boundary_band: 0.1,
            boundary_tolerance: 1e-6,
        }
    }
}

impl EvolveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::invalid(format!("dt must be positive, got {}", self.dt)));
        }
        if self.monitor_stride == 0 || self.snapshot_stride == 0 {
            return Err(Error::invalid("strides must be at least 1"));
        }
        if self.monitor_stride > self.snapshot_stride {
            return Err(Error::invalid("monitor stride must not exceed snapshot stride"));
        }
        if !(self.boundary_band > 0.0 && self.boundary_band < 1.0) {
            return Err(Error::invalid("boundary band must lie in (0, 1)"));
        }
        if !(self.max_sup_norm > 0.0 && self.max_grad_sq > 0.0 && self.boundary_tolerance > 0.0) {
            return Err(Error::invalid("abort thresholds must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Strang,
    Impulse,
}

impl Scheme {
    pub fn for_equation(eq: Equation) -> Self {
        match eq {
            Equation::Nls => Scheme::Strang,
            Equation::Nlkg => Scheme::Impulse,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepParams {
    /// Step actually used: `T / round(T / dt)`.
    pub dt: f64,
    pub scheme: Scheme,
    pub grid: GridSpec,
}

/// One monitor sample. `f_l1 = ∫|f(u)|` is kept in memory only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonitorRow {
    pub t: f64,
    pub mass: f64,
    pub energy: f64,
    pub grad_sq: f64,
    /// `∫|G(u)| dx`.
    pub g_integral: f64,
    pub sup_norm: f64,
    #[serde(skip)]
    pub f_l1: f64,
}

pub const MONITOR_HEADER: [&str; 6] = ["t", "mass", "energy", "grad_sq", "g_integral", "sup_norm"];

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub states: Vec<EvolutionState>,
    pub monitor: Vec<MonitorRow>,
    pub nl: Nonlinearity,
    pub step_params: StepParams,
}

impl Trajectory {
    pub fn equation(&self) -> Equation {
        self.states[0].equation()
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        self.states[0].u.grid()
    }

    pub fn t_start(&self) -> f64 {
        self.monitor.first().map_or(0.0, |m| m.t)
    }

    pub fn t_end(&self) -> f64 {
        self.monitor.last().map_or(0.0, |m| m.t)
    }

    pub fn times(&self) -> Vec<f64> {
        self.monitor.iter().map(|m| m.t).collect()
    }

    /// Largest relative deviation of mass and energy from their initial values.
    pub fn drifts(&self) -> (f64, f64) {
        let first = self.monitor[0];
        let rel = |x: f64, x0: f64| if x0 == 0.0 { x.abs() } else { ((x - x0) / x0).abs() };
        self.monitor.iter().fold((0.0, 0.0), |(dm, de), m| {
            (dm.max(rel(m.mass, first.mass)), de.max(rel(m.energy, first.energy)))
        })
    }

    pub fn write_monitor_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(MONITOR_HEADER)?;
        for m in &self.monitor {
            wr.write_record([m.t, m.mass, m.energy, m.grad_sq, m.g_integral, m.sup_norm].map(|x| x.to_string()))?;
        }
        wr.flush()?;
        Ok(())
    }

    /// Snapshot files `snap_<index>_u.dat` (and `_ut.dat` for NLKG) under `dir`.
    pub fn write_snapshots(&self, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        for (i, s) in self.states.iter().enumerate() {
            let p = dir.join(format!("snap_{i:05}_u.dat"));
            save_field(&p, &s.u)?;
            written.push(p);
            if let Some(v) = &s.u_t {
                let p = dir.join(format!("snap_{i:05}_ut.dat"));
                save_field(&p, v)?;
                written.push(p);
            }
        }
        Ok(written)
    }
}

fn modes(u: &RadialField) -> Vec<Complex64> {
    let g = u.grid();
    g.basis().to_modes(u.values(), g.sqrt_weights())
}

fn nodal(grid: &Arc<RadialGrid>, c: &[Complex64]) -> RadialField {
    RadialField::from_parts(grid.clone(), grid.basis().from_modes(c, grid.sqrt_weights()))
}

fn kg_rotate(u: &RadialField, v: &RadialField, t: f64) -> (RadialField, RadialField) {
    let grid = u.grid();
    let cu = modes(u);
    let cv = modes(v);
    let mut nu = Vec::with_capacity(cu.len());
    let mut nv = Vec::with_capacity(cu.len());
    for ((a, b), k2) in cu.iter().zip(&cv).zip(grid.basis().k2()) {
        let w = (1.0 + k2).sqrt();
        let (s, c) = (w * t).sin_cos();
        nu.push(a * c + b * (s / w));
        nv.push(-a * (w * s) + b * c);
    }
    (nodal(grid, &nu), nodal(grid, &nv))
}

fn schrodinger_flow(u: &RadialField, t: f64) -> RadialField {
    let grid = u.grid();
    let c: Vec<Complex64> = modes(u)
        .iter()
        .zip(grid.basis().k2())
        .map(|(c, k2)| c * Complex64::from_polar(1.0, k2 * t))
        .collect();
    nodal(grid, &c)
}

/// Free flow over time `t`: `e^{+ik²t}` for NLS, the Klein–Gordon rotation
/// of `(u, u_t)` for NLKG. Gauss–Bessel grids only.
pub fn linear_propagate(state: &EvolutionState, t: f64) -> Result<EvolutionState> {
    state.u.grid().require_bessel("linear propagation")?;
    if t == 0.0 {
        return Ok(state.clone());
    }
    Ok(match &state.u_t {
        None => EvolutionState::nls(schrodinger_flow(&state.u, t), state.t + t),
        Some(v) => {
            let (u, v) = kg_rotate(&state.u, v, t);
            EvolutionState::nlkg(u, v, state.t + t)?
        }
    })
}

/// One Strang step of the NLS.
pub fn step_nls(state: &EvolutionState, dt: f64, nl: &Nonlinearity) -> Result<EvolutionState> {
    if state.u_t.is_some() {
        return Err(Error::invalid("step_nls needs an NLS state"));
    }
    state.u.grid().require_bessel("NLS stepping")?;
    nl.check_field(&state.u)?;
    let half = nl.phase_step(&state.u, 0.5 * dt);
    let lin = schrodinger_flow(&half, dt);
    nl.check_field(&lin)?;
    Ok(EvolutionState::nls(nl.phase_step(&lin, 0.5 * dt), state.t + dt))
}

fn kick(v: &RadialField, u: &RadialField, h: f64, nl: &Nonlinearity) -> RadialField {
    v.with_values(
        v.values()
            .iter()
            .zip(u.values())
            .map(|(&b, &a)| b + nl.force(a) * h)
            .collect(),
    )
}

/// One impulse step of the NLKG. Works on both grid kinds (uniform grids use
/// the finite-difference eigenbasis).
pub fn step_nlkg(state: &EvolutionState, dt: f64, nl: &Nonlinearity) -> Result<EvolutionState> {
    let v = state
        .u_t
        .as_ref()
        .ok_or_else(|| Error::invalid("step_nlkg needs an NLKG state"))?;
    nl.check_field(&state.u)?;
    let v = kick(v, &state.u, 0.5 * dt, nl);
    let (u, v) = kg_rotate(&state.u, &v, dt);
    nl.check_field(&u)?;
    let v = kick(&v, &u, 0.5 * dt, nl);
    EvolutionState::nlkg(u, v, state.t + dt)
}

fn fused_nls_step(
    u: &RadialField,
    carry: &mut Option<RadialField>,
    dt: f64,
    nl: &Nonlinearity,
    observed: bool,
) -> Result<(RadialField, Option<RadialField>)> {
    let lead = match carry.take() {
        Some(c) => c,
        None => {
            nl.check_field(u)?;
            nl.phase_step(u, 0.5 * dt)
        }
    };
    let lin = schrodinger_flow(&lead, dt);
    nl.check_field(&lin)?;
    if observed {
        Ok((nl.phase_step(&lin, 0.5 * dt), None))
    } else {
        *carry = Some(nl.phase_step(&lin, dt));
        // only `carry` is used while unobserved
        Ok((lin, None))
    }
}

pub fn step(state: &EvolutionState, dt: f64, nl: &Nonlinearity) -> Result<EvolutionState> {
    match state.equation() {
        Equation::Nls => step_nls(state, dt, nl),
        Equation::Nlkg => step_nlkg(state, dt, nl),
    }
}

pub fn monitor_row(state: &EvolutionState, nl: &Nonlinearity) -> Result<MonitorRow> {
    let u = &state.u;
    let row = MonitorRow {
        t: state.t,
        mass: mass_sq(u),
        energy: energy(state, nl)?,
        grad_sq: grad_sq(u),
        g_integral: abs_virial_integral(u, nl),
        sup_norm: u.sup_norm(),
        f_l1: nl.force_l1(u),
    };
    let finite = [row.mass, row.energy, row.grad_sq, row.g_integral, row.sup_norm, row.f_l1]
        .iter()
        .all(|x| x.is_finite());
    if !finite {
        return Err(Error::BlowupSuspected {
            t: state.t,
            reason: "non-finite monitor value".into(),
        });
    }
    Ok(row)
}

fn check_abort(state: &EvolutionState, row: &MonitorRow, cfg: &EvolveConfig) -> Result<()> {
    if row.sup_norm > cfg.max_sup_norm {
        return Err(Error::BlowupSuspected {
            t: row.t,
            reason: format!("sup norm {} exceeds {}", row.sup_norm, cfg.max_sup_norm),
        });
    }
    if row.grad_sq > cfg.max_grad_sq {
        return Err(Error::BlowupSuspected {
            t: row.t,
            reason: format!("gradient norm squared {} exceeds {}", row.grad_sq, cfg.max_grad_sq),
        });
    }
    let fraction = state.u.outer_mass_fraction(1.0 - cfg.boundary_band);
    if fraction > cfg.boundary_tolerance {
        return Err(Error::BoundaryContamination { t: row.t, fraction });
    }
    Ok(())
}

/// Evolve to `initial.t + t_final`, returning whatever was recorded together
/// with the abort reason, if any.
pub fn evolve_partial(
    initial: &EvolutionState,
    nl: &Nonlinearity,
    t_final: f64,
    cfg: &EvolveConfig,
) -> Result<(Trajectory, Option<Error>)> {
    cfg.validate()?;
    nl.validate()?;
    if !(t_final.is_finite() && t_final > 0.0) {
        return Err(Error::invalid(format!("final time must be positive, got {t_final}")));
    }
    let grid = initial.u.grid().clone();
    let eq = initial.equation();
    if eq == Equation::Nls {
        grid.require_bessel("NLS stepping")?;
    }
    let steps = ((t_final / cfg.dt).round() as usize).max(1);
    let dt = t_final / steps as f64;
    let t0 = initial.t;

    let mut traj = Trajectory {
        states: vec![initial.clone()],
        monitor: Vec::new(),
        nl: *nl,
        step_params: StepParams {
            dt,
            scheme: Scheme::for_equation(eq),
            grid: grid.spec(),
        },
    };
    let first = monitor_row(initial, nl)?;
    traj.monitor.push(first);
    if let Err(e) = check_abort(initial, &first, cfg) {
        return Ok((traj, Some(e)));
    }

    let mut state = initial.clone();
    // NLS: consecutive half phases between unobserved steps are merged, so
    // `carry` holds the field after the leading half phase of the next step.
    let mut carry = None;
    for k in 1..=steps {
        let last = k == steps;
        let observed = k % cfg.monitor_stride == 0 || k % cfg.snapshot_stride == 0 || last;
        let t = t0 + k as f64 * dt;
        let next = match eq {
            Equation::Nls => fused_nls_step(&state.u, &mut carry, dt, nl, observed),
            Equation::Nlkg => step_nlkg(&state, dt, nl).map(|s| (s.u, s.u_t)),
        };
        state = match next {
            Ok((u, u_t)) => EvolutionState { u, u_t, t },
            Err(e) => return Ok((traj, Some(e))),
        };
        if !observed {
            continue;
        }
        if k % cfg.monitor_stride == 0 || last {
            let row = match monitor_row(&state, nl) {
                Ok(r) => r,
                Err(e) => return Ok((traj, Some(e))),
            };
            traj.monitor.push(row);
            if let Err(e) = check_abort(&state, &row, cfg) {
                traj.states.push(state);
                return Ok((traj, Some(e)));
            }
        }
        if k % cfg.snapshot_stride == 0 || last {
            traj.states.push(state.clone());
        }
    }
    Ok((traj, None))
}

pub fn evolve(initial: &EvolutionState, nl: &Nonlinearity, t_final: f64, cfg: &EvolveConfig) -> Result<Trajectory> {
    match evolve_partial(initial, nl, t_final, cfg)? {
        (traj, None) => Ok(traj),
        (_, Some(e)) => Err(e),
    }
}
