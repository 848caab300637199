//! Classification of initial data, scattering checks, and audits of the
//! Gagliardo–Nirenberg, Trudinger–Moser and radial Sobolev inequalities.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::evolve::Trajectory;
use crate::functionals::{energy, static_energy, virial_k, Equation, EvolutionState};
use crate::ground_state::{gn_sharp_constant, moser_profile, GroundState};
use crate::nonlinearity::Nonlinearity;
use crate::radial::io::load_field;
use crate::radial::ops::{grad_sq, mass_sq};
use crate::radial::{RadialField, RadialGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    DefocusingGlobal,
    FocusingBelowThresholdKPositive,
    FocusingBelowThresholdKNegative,
    AboveThresholdUnknown,
    ExponentialSubcritical,
    ExponentialSupercriticalUnknown,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::DefocusingGlobal => "defocusing-global",
            Regime::FocusingBelowThresholdKPositive => "focusing-below-threshold-K-positive",
            Regime::FocusingBelowThresholdKNegative => "focusing-below-threshold-K-negative",
            Regime::AboveThresholdUnknown => "above-threshold-unknown",
            Regime::ExponentialSubcritical => "exponential-subcritical",
            Regime::ExponentialSupercriticalUnknown => "exponential-supercritical-unknown",
        })
    }
}

/// `‖u‖₂² ‖∇u‖₂^{p−2}` against the same product for `Q₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormProductTest {
    pub value: f64,
    pub ground_state_value: f64,
    pub below: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassificationVerdict {
    pub regime: Regime,
    /// The conserved level compared with the threshold: `E_S + M/2` (NLS),
    /// `E_K` (NLKG), or `E_S` for the defocusing exponential family.
    pub level: f64,
    pub threshold: Option<f64>,
    pub k_virial: f64,
    /// `threshold − level`.
    pub energy_gap: Option<f64>,
    pub norm_product: Option<NormProductTest>,
    /// Whether the K-sign test and the norm-product test agree (power
    /// focusing below threshold only).
    pub tests_agree: Option<bool>,
}

fn norm_product(u: &RadialField, p: f64) -> f64 {
    mass_sq(u) * grad_sq(u).powf(0.5 * (p - 2.0))
}

fn unit_ground_state<'a>(q: Option<&'a GroundState>, nl: &Nonlinearity) -> Result<&'a GroundState> {
    let q = q.ok_or_else(|| Error::MissingGroundState(format!("classifying {nl} data needs Q")))?;
    if q.nl != *nl {
        return Err(Error::invalid(format!("ground state solves {} but data uses {nl}", q.nl)));
    }
    if q.c != 1.0 {
        return Err(Error::invalid(format!("threshold needs the c = 1 ground state, got c = {}", q.c)));
    }
    Ok(q)
}

pub fn classify_initial_data(
    state: &EvolutionState,
    nl: &Nonlinearity,
    q: Option<&GroundState>,
) -> Result<ClassificationVerdict> {
    nl.validate()?;
    let u = &state.u;
    let k = virial_k(u, nl);
    // NLS compares E_S + M/2 = J(u); NLKG compares E_K
    let level = match state.equation() {
        Equation::Nls => static_energy(u, 1.0, nl)?,
        Equation::Nlkg => energy(state, nl)?,
    };
    let mut v = ClassificationVerdict {
        regime: Regime::DefocusingGlobal,
        level,
        threshold: None,
        k_virial: k,
        energy_gap: None,
        norm_product: None,
        tests_agree: None,
    };
    match *nl {
        Nonlinearity::Free => {}
        Nonlinearity::Power { .. } if nl.is_defocusing() => {}
        Nonlinearity::Exponential { kappa0, .. } if nl.is_defocusing() => {
            let level = match state.equation() {
                Equation::Nls => energy(state, nl)?,
                Equation::Nlkg => level,
            };
            let bound = 2.0 * PI / kappa0;
            v.level = level;
            v.threshold = Some(bound);
            v.energy_gap = Some(bound - level);
            v.regime = if level < bound {
                Regime::ExponentialSubcritical
            } else {
                Regime::ExponentialSupercriticalUnknown
            };
        }
        Nonlinearity::Power { p, .. } => {
            let q = unit_ground_state(q, nl)?;
            let m = q.threshold().m;
            v.threshold = Some(m);
            v.energy_gap = Some(m - level);
            let below = level < m;
            v.regime = match (below, k > 0.0) {
                (true, true) => Regime::FocusingBelowThresholdKPositive,
                (true, false) => Regime::FocusingBelowThresholdKNegative,
                (false, _) => Regime::AboveThresholdUnknown,
            };
            let np = NormProductTest {
                value: norm_product(u, p),
                ground_state_value: q.mass_sq * q.grad_sq.powf(0.5 * (p - 2.0)),
                below: false,
            };
            let np = NormProductTest {
                below: np.value < np.ground_state_value,
                ..np
            };
            v.norm_product = Some(np);
            if below {
                v.tests_agree = Some(np.below == (k > 0.0));
            }
        }
        Nonlinearity::Exponential { .. } => {
            let q = unit_ground_state(q, nl)?;
            let m = q.threshold().m;
            v.threshold = Some(m);
            v.energy_gap = Some(m - level);
            v.regime = match (level < m, k > 0.0) {
                (true, true) => Regime::FocusingBelowThresholdKPositive,
                (true, false) => Regime::FocusingBelowThresholdKNegative,
                (false, _) => Regime::AboveThresholdUnknown,
            };
        }
    }
    Ok(v)
}

/// Verdict at every snapshot of a trajectory.
pub fn classify_trajectory(traj: &Trajectory, q: Option<&GroundState>) -> Result<Vec<ClassificationVerdict>> {
    traj.states.iter().map(|s| classify_initial_data(s, &traj.nl, q)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatteringReport {
    pub windows: Vec<f64>,
    /// `max ‖w(t) − w(t')‖_{H¹}` over snapshot pairs in `[T, 2T]`,
    /// `w(t) = S(−t) u(t)`.
    pub deltas: Vec<f64>,
    pub snapshots_used: Vec<usize>,
    pub horizon: f64,
    pub consistent: bool,
    pub verdict: String,
}

/// H¹ Cauchy test of the backward-propagated profile.
pub fn scattering_profile_cauchy(traj: &Trajectory, windows: &[f64]) -> Result<ScatteringReport> {
    let grid = traj.grid().clone();
    grid.require_bessel("scattering profile")?;
    if windows.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid("window list must be increasing"));
    }
    let basis = grid.basis();
    let k2 = basis.k2();
    // profile modes, weighted so that the Euclidean norm is the H¹ (× L²) norm
    let profiles: Vec<(f64, Vec<Complex64>)> = traj
        .states
        .iter()
        .map(|s| {
            let cu = basis.to_modes(s.u.values(), grid.sqrt_weights());
            let t = s.t;
            let out = match &s.u_t {
                None => cu
                    .iter()
                    .zip(k2)
                    .map(|(c, k2)| c * Complex64::from_polar((1.0 + k2).sqrt(), -k2 * t))
                    .collect(),
                Some(v) => {
                    let cv = basis.to_modes(v.values(), grid.sqrt_weights());
                    let mut out = Vec::with_capacity(2 * cu.len());
                    let mut tail = Vec::with_capacity(cu.len());
                    for ((a, b), k2) in cu.iter().zip(&cv).zip(k2) {
                        let w = (1.0 + k2).sqrt();
                        let (sn, cs) = (w * t).sin_cos();
                        // inverse Klein–Gordon rotation
                        let a0 = a * cs - b * (sn / w);
                        let b0 = a * (w * sn) + b * cs;
                        out.push(a0 * w);
                        tail.push(b0);
                    }
                    out.extend(tail);
                    out
                }
            };
            (t, out)
        })
        .collect();
    let eps = 1e-9 * traj.t_end().abs().max(1.0);
    let mut deltas = Vec::new();
    let mut used = Vec::new();
    for &t in windows {
        let idx: Vec<usize> = (0..profiles.len())
            .filter(|&i| profiles[i].0 >= t - eps && profiles[i].0 <= 2.0 * t + eps)
            .collect();
        if idx.len() < 2 || t <= 0.0 {
            return Err(Error::invalid(format!("fewer than two snapshots in [{t}, {}]", 2.0 * t)));
        }
        let mut d = 0.0_f64;
        for (a, &i) in idx.iter().enumerate() {
            for &j in &idx[a + 1..] {
                let s: f64 = profiles[i].1.iter().zip(&profiles[j].1).map(|(x, y)| (x - y).norm_sqr()).sum();
                d = d.max(s.sqrt());
            }
        }
        deltas.push(d);
        used.push(idx.len());
    }
    let consistent = deltas.windows(2).all(|w| w[1] < w[0]);
    let horizon = traj.t_end();
    let verdict = if consistent {
        format!("scattering-consistent at horizon T={horizon}")
    } else {
        format!("not scattering-consistent at horizon T={horizon}")
    };
    Ok(ScatteringReport {
        windows: windows.to_vec(),
        deltas,
        snapshots_used: used,
        horizon,
        consistent,
        verdict,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoercivityReport {
    pub times: Vec<f64>,
    pub k_virial: Vec<f64>,
    pub grad_sq: Vec<f64>,
    /// Fitted constant `min_t K(u(t)) / ‖∇u(t)‖₂²`.
    pub fitted_constant: f64,
    /// `max_t κ₀‖∇u(t)‖₂²` against `4π` (exponential family only).
    pub max_scaled_gradient: Option<f64>,
    pub gradient_below_cap: Option<bool>,
    /// Regime recomputed at every snapshot (when a verdict could be formed).
    pub regimes: Vec<Regime>,
    pub regime_constant: bool,
}

/// `K(u(t)) ≥ C‖∇u(t)‖₂²` along the snapshots of a run.
pub fn coercivity_report(traj: &Trajectory, q: Option<&GroundState>) -> Result<CoercivityReport> {
    let mut rep = CoercivityReport {
        times: Vec::new(),
        k_virial: Vec::new(),
        grad_sq: Vec::new(),
        fitted_constant: f64::INFINITY,
        max_scaled_gradient: None,
        gradient_below_cap: None,
        regimes: Vec::new(),
        regime_constant: true,
    };
    for s in &traj.states {
        let k = virial_k(&s.u, &traj.nl);
        let g = grad_sq(&s.u);
        rep.times.push(s.t);
        rep.k_virial.push(k);
        rep.grad_sq.push(g);
        if g > 0.0 {
            rep.fitted_constant = rep.fitted_constant.min(k / g);
        }
        if let Nonlinearity::Exponential { kappa0, .. } = traj.nl {
            let x = rep.max_scaled_gradient.unwrap_or(0.0).max(kappa0 * g);
            rep.max_scaled_gradient = Some(x);
            rep.gradient_below_cap = Some(x < 4.0 * PI);
        }
        match classify_initial_data(s, &traj.nl, q) {
            Ok(v) => rep.regimes.push(v.regime),
            Err(Error::MissingGroundState(_)) => {}
            Err(e) => return Err(e),
        }
    }
    rep.regime_constant = rep.regimes.windows(2).all(|w| w[0] == w[1]);
    Ok(rep)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GnEntry {
    pub name: String,
    /// `‖g‖_{p+2}^{p+2} / (C ‖g‖₂² ‖∇g‖₂^p)`, `None` for skipped fields.
    pub ratio: Option<f64>,
    /// Same quotient through the norm-product form
    /// `(p+2)/p · (‖g‖₂²‖∇g‖₂^{p−2}) / (‖Q₀‖₂²‖∇Q₀‖₂^{p−2}) · ‖∇g‖₂²`.
    pub ratio_product_form: Option<f64>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GnReport {
    pub p: f64,
    pub constant: f64,
    pub ground_state_ratio: f64,
    pub entries: Vec<GnEntry>,
    pub max_ratio: f64,
    /// `max_ratio / ground_state_ratio`.
    pub normalized_max: f64,
    /// Largest relative disagreement between the two routes.
    pub route_discrepancy: f64,
}

fn lp_power(u: &RadialField, e: f64) -> f64 {
    let v: Vec<f64> = u.values().iter().map(|z| z.norm().powf(e)).collect();
    u.grid().integrate_slice(&v)
}

fn gn_ratios(u: &RadialField, p: f64, constant: f64, q: &GroundState) -> (f64, f64) {
    let (m, g) = (mass_sq(u), grad_sq(u));
    let lhs = lp_power(u, p + 2.0);
    let a = lhs / (constant * m * g.powf(0.5 * p));
    let product = m * g.powf(0.5 * (p - 2.0)) / (q.mass_sq * q.grad_sq.powf(0.5 * (p - 2.0)));
    let b = lhs / ((p + 2.0) / p * product * g);
    (a, b)
}

pub fn gn_audit(fields: &[(String, RadialField)], p: f64, q: &GroundState) -> Result<GnReport> {
    if q.c != 1.0 {
        return Err(Error::invalid("G-N audit needs the c = 1 ground state"));
    }
    let constant = gn_sharp_constant(p, q)?;
    let (q_ratio, q_ratio_b) = gn_ratios(&q.profile, p, constant, q);
    let mut discrepancy = ((q_ratio - q_ratio_b) / q_ratio).abs();
    let mut entries = Vec::new();
    let mut max_ratio = f64::NEG_INFINITY;
    for (name, u) in fields {
        if u.is_zero() || grad_sq(u) == 0.0 {
            entries.push(GnEntry {
                name: name.clone(),
                ratio: None,
                ratio_product_form: None,
                note: Some("zero field skipped".into()),
            });
            continue;
        }
        let (a, b) = gn_ratios(u, p, constant, q);
        discrepancy = discrepancy.max(((a - b) / a).abs());
        max_ratio = max_ratio.max(a);
        entries.push(GnEntry {
            name: name.clone(),
            ratio: Some(a),
            ratio_product_form: Some(b),
            note: None,
        });
    }
    Ok(GnReport {
        p,
        constant,
        ground_state_ratio: q_ratio,
        entries,
        max_ratio,
        normalized_max: max_ratio / q_ratio,
        route_discrepancy: discrepancy,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TmEntry {
    pub name: String,
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
    pub ratio: Option<f64>,
    /// Rejection or skip reason.
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TmReport {
    pub a: f64,
    pub kappa0: f64,
    pub entries: Vec<TmEntry>,
    pub fitted_constant: f64,
    pub evaluated: usize,
    pub rejected: usize,
}

/// `∫(e^{κ₀|φ|²} − 1)^a dx` against `κ₀‖φ‖₂² / (4π/a − κ₀‖∇φ‖₂²)`.
pub fn tm_entry(name: &str, u: &RadialField, a: f64, kappa0: f64) -> Result<(f64, f64)> {
    let g = kappa0 * grad_sq(u);
    let cap = 4.0 * PI / a;
    if !(g < cap) {
        return Err(Error::HypothesisViolation(format!(
            "{name}: kappa0 |grad phi|^2 = {g} is not below 4 pi / a = {cap}"
        )));
    }
    let vals: Vec<f64> = u
        .values()
        .iter()
        .map(|z| {
            let x = kappa0 * z.norm_sqr();
            x.exp_m1().powf(a)
        })
        .collect();
    let lhs = u.grid().integrate_slice(&vals);
    let rhs = kappa0 * mass_sq(u) / (cap - g);
    Ok((lhs, rhs))
}

pub fn tm_audit(fields: &[(String, RadialField)], a: f64, kappa0: f64) -> Result<TmReport> {
    if !(a >= 1.0) {
        return Err(Error::invalid(format!("exponent a must be >= 1, got {a}")));
    }
    if !(kappa0 > 0.0) {
        return Err(Error::invalid(format!("kappa0 must be positive, got {kappa0}")));
    }
    let probe = Nonlinearity::exponential(kappa0, 1.0)?;
    let mut entries = Vec::new();
    let (mut best, mut evaluated, mut rejected) = (0.0_f64, 0, 0);
    for (name, u) in fields {
        let mut e = TmEntry {
            name: name.clone(),
            lhs: None,
            rhs: None,
            ratio: None,
            note: None,
        };
        if u.is_zero() {
            e.lhs = Some(0.0);
            e.rhs = Some(0.0);
            e.note = Some("zero field skipped".into());
            entries.push(e);
            continue;
        }
        probe.check_field(u)?;
        match tm_entry(name, u, a, kappa0) {
            Ok((l, r)) => {
                e.lhs = Some(l);
                e.rhs = Some(r);
                e.ratio = Some(l / r);
                best = best.max(l / r);
                evaluated += 1;
            }
            Err(Error::HypothesisViolation(msg)) => {
                e.note = Some(msg);
                rejected += 1;
            }
            Err(other) => return Err(other),
        }
        entries.push(e);
    }
    Ok(TmReport {
        a,
        kappa0,
        entries,
        fitted_constant: best,
        evaluated,
        rejected,
    })
}

/// Gaussian and Moser shapes rescaled so that `κ₀‖∇φ‖₂²` hits each
/// requested fraction of `4π/a`. Fractions ≥ 1 produce members that the
/// audit must reject.
pub fn tm_family(
    grid: &Arc<RadialGrid>,
    a: f64,
    kappa0: f64,
    gaussian_mu: &[f64],
    moser_rho: &[f64],
    fractions: &[f64],
) -> Result<Vec<(String, RadialField)>> {
    let cap = 4.0 * PI / (a * kappa0);
    let mut shapes = Vec::new();
    for &mu in gaussian_mu {
        shapes.push((format!("gaussian(mu={mu})"), RadialField::gaussian(grid.clone(), 1.0, mu)?));
    }
    for &rho in moser_rho {
        if !(rho > 0.0 && rho < 1.0) {
            return Err(Error::invalid(format!("Moser scale must lie in (0, 1), got {rho}")));
        }
        let u = RadialField::from_real_fn(grid.clone(), |r| moser_profile(rho, r))?;
        shapes.push((format!("moser(rho={rho})"), u));
    }
    let mut out = Vec::new();
    for &frac in fractions {
        for (name, u) in &shapes {
            let s = (frac * cap / grad_sq(u)).sqrt();
            out.push((format!("{name}@{frac}"), u.scale(s)));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SobolevEntry {
    pub name: String,
    pub quotient: Option<f64>,
    pub argmax_r: Option<f64>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SobolevReport {
    pub r0: f64,
    pub entries: Vec<SobolevEntry>,
    pub fitted_constant: f64,
}

/// `max_{r ≥ r₀} |u(r)| r^{1/2} / (‖u‖₂^{1/2} ‖∇u‖₂^{1/2})` per field.
pub fn radial_sobolev_audit(fields: &[(String, RadialField)], r0: f64) -> Result<SobolevReport> {
    if !(r0 >= 0.0) {
        return Err(Error::invalid("r0 must be non-negative"));
    }
    let mut entries = Vec::new();
    let mut best = 0.0_f64;
    for (name, u) in fields {
        let scale = (mass_sq(u).sqrt() * grad_sq(u).sqrt()).sqrt();
        if u.is_zero() || scale == 0.0 {
            entries.push(SobolevEntry {
                name: name.clone(),
                quotient: None,
                argmax_r: None,
                note: Some("zero field skipped".into()),
            });
            continue;
        }
        let (q, r) = u
            .values()
            .iter()
            .zip(u.grid().nodes())
            .filter(|(_, &r)| r >= r0)
            .map(|(z, &r)| (z.norm() * r.sqrt() / scale, r))
            .fold((0.0, f64::NAN), |acc, x| if x.0 > acc.0 { x } else { acc });
        best = best.max(q);
        entries.push(SobolevEntry {
            name: name.clone(),
            quotient: Some(q),
            argmax_r: Some(r),
            note: None,
        });
    }
    Ok(SobolevReport {
        r0,
        entries,
        fitted_constant: best,
    })
}

/// Load every radial-field file in `dir`, sorted by file name.
pub fn load_family(dir: impl AsRef<Path>) -> Result<Vec<(String, RadialField)>> {
    let mut paths: Vec<_> = std::fs::read_dir(dir.as_ref())?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let name = p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            load_field(&p).map(|f| (name, f))
        })
        .collect()
}

/// Deterministic family of smooth, decaying, complex radial fields: sums of
/// up to three Gaussian bumps with polynomial modulation and a chirp.
pub fn sample_fields(grid: &Arc<RadialGrid>, count: usize, seed: u64) -> Result<Vec<(String, RadialField)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let terms = rng.gen_range(1..=3);
        let mut params = Vec::with_capacity(terms);
        for _ in 0..terms {
            let amp: f64 = rng.gen_range(-1.0..1.5);
            let mu: f64 = rng.gen_range(0.2..3.0);
            let shift: f64 = rng.gen_range(0.0..2.0);
            let chirp: f64 = rng.gen_range(-1.0..1.0);
            params.push((amp, mu, shift, chirp));
        }
        let u = RadialField::from_fn(grid.clone(), |r| {
            params
                .iter()
                .map(|&(a, mu, s, c)| Complex64::from_polar(a * (1.0 + s * r * r) * (-mu * r * r).exp(), c * r * r))
                .sum()
        })?;
        if u.is_zero() {
            continue;
        }
        out.push((format!("sample-{i:03}"), u));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolve::{evolve, EvolveConfig};
    use crate::ground_state::{solve_ground_state, ShootingConfig};
    use crate::radial::{make_grid, GridKind};
    use std::sync::OnceLock;

    fn q4() -> &'static GroundState {
        static Q: OnceLock<GroundState> = OnceLock::new();
        Q.get_or_init(|| {
            solve_ground_state(&Nonlinearity::power(4.0, 1.0).unwrap(), 1.0, &ShootingConfig::default()).unwrap()
        })
    }

    fn gb(r_max: f64, n: usize) -> Arc<RadialGrid> {
        make_grid(r_max, n, GridKind::GaussBessel).unwrap()
    }

    #[test]
    fn defocusing_is_global() {
        let grid = gb(20.0, 128);
        let u = RadialField::gaussian(grid, 5.0, 1.0).unwrap();
        let v = classify_initial_data(&EvolutionState::nls(u, 0.0), &Nonlinearity::power(3.0, -1.0).unwrap(), None).unwrap();
        assert_eq!(v.regime, Regime::DefocusingGlobal);
        assert_eq!(v.regime.to_string(), "defocusing-global");
    }

    #[test]
    fn small_multiple_of_ground_state() {
        let q = q4();
        let nl = q.nl;
        let u = q.profile.scale(0.3);
        let v = classify_initial_data(&EvolutionState::nls(u.clone(), 0.0), &nl, Some(q)).unwrap();
        assert_eq!(v.regime, Regime::FocusingBelowThresholdKPositive);
        assert_eq!(v.tests_agree, Some(true));
        assert!(v.norm_product.unwrap().below);
        let past = classify_initial_data(&EvolutionState::nls(q.profile.scale(1.5), 0.0), &nl, Some(q)).unwrap();
        assert_eq!(past.regime, Regime::FocusingBelowThresholdKNegative);
        assert_eq!(past.tests_agree, Some(true));
        let wide = RadialField::gaussian(gb(600.0, 512), 0.1, 2e-4).unwrap();
        let big = classify_initial_data(&EvolutionState::nls(wide, 0.0), &nl, Some(q)).unwrap();
        assert_eq!(big.regime, Regime::AboveThresholdUnknown);
        assert!(big.k_virial > 0.0 && big.energy_gap.unwrap() < 0.0);
        assert!(matches!(
            classify_initial_data(&EvolutionState::nls(u, 0.0), &nl, None),
            Err(Error::MissingGroundState(_))
        ));
    }

    #[test]
    fn exponential_defocusing_threshold() {
        let kappa0 = 1.0;
        let nl = Nonlinearity::exponential(kappa0, -1.0).unwrap();
        let grid = gb(30.0, 256);
        let shape = RadialField::gaussian(grid, 1.0, 1.0).unwrap();
        // E_S(s φ) grows monotonically in s for defocusing data; bisect for 2.1π/κ₀
        let target = 2.1 * PI / kappa0;
        let e = |s: f64| energy(&EvolutionState::nls(shape.scale(s), 0.0), &nl).unwrap();
        let (mut lo, mut hi) = (0.0, 1.0);
        while e(hi) < target {
            hi *= 2.0;
        }
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if e(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let v = classify_initial_data(&EvolutionState::nls(shape.scale(hi), 0.0), &nl, None).unwrap();
        assert!((v.level - target).abs() < 1e-9);
        assert_eq!(v.regime, Regime::ExponentialSupercriticalUnknown);
        let v = classify_initial_data(&EvolutionState::nls(shape.scale(0.5), 0.0), &nl, None).unwrap();
        assert_eq!(v.regime, Regime::ExponentialSubcritical);
    }

    #[test]
    fn gn_sharp_at_ground_state_and_below_elsewhere() {
        let q = q4();
        let grid = gb(30.0, 256);
        let g = RadialField::gaussian(grid.clone(), 1.0, 1.0).unwrap();
        let rescaled = RadialField::gaussian(grid.clone(), 3.7, 1.0 / 0.8f64.powi(2)).unwrap();
        let fields = vec![
            ("gauss".to_string(), g),
            ("rescaled".to_string(), rescaled),
            ("zero".to_string(), RadialField::zeros(grid)),
        ];
        let rep = gn_audit(&fields, 4.0, q).unwrap();
        assert!((rep.ground_state_ratio - 1.0).abs() < 1e-3);
        let a = rep.entries[0].ratio.unwrap();
        let b = rep.entries[1].ratio.unwrap();
        assert!(a < 1.0);
        assert!((a - b).abs() < 1e-8);
        assert!(rep.entries[2].ratio.is_none());
        assert!(rep.route_discrepancy < 1e-6, "{}", rep.route_discrepancy);
    }

    #[test]
    fn tm_gaussian_closed_form() {
        let grid = make_grid(8.0, 40_000, GridKind::Uniform).unwrap();
        let phi = RadialField::gaussian(grid.clone(), 1.0, 1.0).unwrap();
        let (lhs, rhs) = tm_entry("g", &phi, 1.0, 1.0).unwrap();
        // (π/2) Σ 1/(k·k!)
        let mut s = 0.0;
        let mut fact = 1.0;
        for k in 1..30 {
            fact *= k as f64;
            s += 1.0 / (k as f64 * fact);
        }
        assert!((lhs - 0.5 * PI * s).abs() < 1e-6, "{lhs}");
        assert!((rhs - 1.0 / 6.0).abs() < 1e-6, "{rhs}");
        let at_cap = phi.scale(2.1);
        assert!(matches!(tm_entry("cap", &at_cap, 1.0, 1.0), Err(Error::HypothesisViolation(_))));
        let rep = tm_audit(
            &[("g".into(), phi), ("z".into(), RadialField::zeros(grid.clone())), ("cap".into(), at_cap)],
            1.0,
            1.0,
        )
        .unwrap();
        assert_eq!((rep.evaluated, rep.rejected), (1, 1));
        assert_eq!(rep.entries[1].lhs, Some(0.0));
    }

    #[test]
    fn radial_sobolev_family() {
        let grid = gb(30.0, 512);
        let fields: Vec<(String, RadialField)> = [0.5, 1.0, 2.0, 4.0, 8.0]
            .iter()
            .map(|&mu| (format!("mu={mu}"), RadialField::gaussian(grid.clone(), 1.0, mu).unwrap()))
            .collect();
        let rep = radial_sobolev_audit(&fields, 0.0).unwrap();
        let qs: Vec<f64> = rep.entries.iter().map(|e| e.quotient.unwrap()).collect();
        // the quotient is dilation invariant, up to sampling
        let spread = qs.iter().cloned().fold(0.0, f64::max) / qs.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(spread < 1.05, "{qs:?}");
        let scaled = radial_sobolev_audit(&[("s".into(), fields[1].1.scale(7.0))], 0.0).unwrap();
        assert!((scaled.fitted_constant - qs[1]).abs() < 1e-12);
        let zero = radial_sobolev_audit(&[("z".into(), RadialField::zeros(grid))], 0.0).unwrap();
        assert!(zero.entries[0].quotient.is_none());
    }

    #[test]
    fn free_run_has_constant_profile() {
        let grid = gb(40.0, 256);
        let u = RadialField::from_fn(grid.clone(), |r| Complex64::from_polar((-r * r).exp(), 0.3 * r * r)).unwrap();
        let cfg = EvolveConfig {
            dt: 0.05,
            snapshot_stride: 2,
            ..Default::default()
        };
        let traj = evolve(&EvolutionState::nls(u, 0.0), &Nonlinearity::Free, 2.0, &cfg).unwrap();
        let rep = scattering_profile_cauchy(&traj, &[0.25, 0.5, 1.0]).unwrap();
        assert!(rep.deltas.iter().all(|&d| d < 1e-12), "{:?}", rep.deltas);
        let zero = EvolutionState::nls(RadialField::zeros(grid), 0.0);
        let traj = evolve(&zero, &Nonlinearity::power(4.0, -1.0).unwrap(), 2.0, &cfg).unwrap();
        let rep = scattering_profile_cauchy(&traj, &[0.25, 0.5]).unwrap();
        assert!(rep.deltas.iter().all(|&d| d == 0.0));
        assert!(scattering_profile_cauchy(&traj, &[5.0]).is_err());
    }

    #[test]
    fn sign_and_norm_product_agree_below_threshold() {
        let q = q4();
        let grid = gb(30.0, 256);
        let nl = q.nl;
        let m = q.threshold().m;
        let mut checked = 0;
        for (_, u) in sample_fields(&grid, 40, 7).unwrap() {
            for s in [0.2, 0.5, 0.8, 1.2, 2.0, 3.0] {
                let v = classify_initial_data(&EvolutionState::nls(u.scale(s), 0.0), &nl, Some(q)).unwrap();
                if v.level < m {
                    assert_eq!(v.tests_agree, Some(true));
                    checked += 1;
                }
            }
        }
        assert!(checked > 50);
    }

    #[test]
    fn samples_are_deterministic() {
        let grid = gb(20.0, 64);
        let a = sample_fields(&grid, 5, 11).unwrap();
        let b = sample_fields(&grid, 5, 11).unwrap();
        for ((_, x), (_, y)) in a.iter().zip(&b) {
            assert_eq!(x.values(), y.values());
        }
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(48))]
        #[test]
        fn gn_ratio_bounded_and_tests_agree(
            amp in 0.05f64..3.0,
            mu in 0.3f64..4.0,
            shift in 0.0f64..2.0,
            chirp in -1.0f64..1.0,
        ) {
            let q = q4();
            let grid = gb(30.0, 256);
            let u = RadialField::from_fn(grid, |r| {
                Complex64::from_polar(amp * (1.0 + shift * r * r) * (-mu * r * r).exp(), chirp * r * r)
            })
            .unwrap();
            let rep = gn_audit(&[("u".into(), u.clone())], 4.0, q).unwrap();
            proptest::prop_assert!(rep.normalized_max <= 1.0 + 1e-6);
            let v = classify_initial_data(&EvolutionState::nls(u.clone(), 0.0), &q.nl, Some(q)).unwrap();
            if v.level < q.threshold().m {
                proptest::prop_assert_eq!(v.tests_agree, Some(true));
            }
            let a = radial_sobolev_audit(&[("u".into(), u.clone())], 0.0).unwrap().fitted_constant;
            let b = radial_sobolev_audit(&[("u".into(), u.scale(3.0))], 0.0).unwrap().fitted_constant;
            proptest::prop_assert!((a - b).abs() <= 1e-12 * a);
        }
    }
}
