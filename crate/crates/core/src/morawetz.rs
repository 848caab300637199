//! Cutoff virial weights, the Morawetz quantity and its identity, and
//! space-time audits of `∫∫|G(u)|` along recorded trajectories.
//!
//! With `h = φ(r) x/r` and `q = div h / 2`, radial fields in the plane obey
//!
//! ```text
//! dM/dt = ∫φ'(|∂_r u|² − G)                       main
//!       − ¼∫(φ''' + 2φ''/r)|u|²                   laplacian
//!       + ∫(φ/r − φ')(|∇u|² − |∂_r u|²)           radial null, ≡ 0
//!       + ∫(φ/r − φ')(−|u|²/(4r²) − G/2)          exterior
//! ```
//!
//! for both `M = ½ Im∫u φ ∂_r ū` (NLS) and `M = −Re∫u_t(φ ∂_r ū + q ū)` (NLKG).

use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::Trajectory;
use crate::functionals::{energy, static_energy, virial_k, Equation, EvolutionState};
use crate::nonlinearity::Nonlinearity;
use crate::radial::ops::{gradient, grad_sq, mass_sq};
use crate::radial::{RadialField, RadialGrid};

/// Default `δ` for the weighted decay integrals.
pub const DEFAULT_DELTA: f64 = 0.05;

fn bump(x: f64) -> [f64; 3] {
    // e^{-1/x} and its first two derivatives
    if x <= 1e-3 {
        return [0.0; 3];
    }
    let e = (-1.0 / x).exp();
    let x2 = x * x;
    [e, e / x2, e * (1.0 / (x2 * x2) - 2.0 / (x2 * x))]
}

/// Smooth step `χ(s)`: 1 on `[0,1]`, 0 on `[2,∞)`, and
/// `ψ(2−s)/(ψ(2−s)+ψ(s−1))` with `ψ(x) = e^{−1/x}` in between.
/// Returns `(χ, χ', χ'')`.
pub fn smooth_step(s: f64) -> (f64, f64, f64) {
    if s <= 1.0 {
        return (1.0, 0.0, 0.0);
    }
    if s >= 2.0 {
        return (0.0, 0.0, 0.0);
    }
    let [a, da, d2a] = bump(2.0 - s);
    let [b, db, d2b] = bump(s - 1.0);
    // d/ds of a(2−s) flips the sign of the odd derivative
    let (da, d2a) = (-da, d2a);
    let sum = a + b;
    let num = da * b - a * db;
    let dnum = d2a * b - a * d2b;
    let dsum = da + db;
    let chi = a / sum;
    let d1 = num / (sum * sum);
    let d2 = (dnum * sum - 2.0 * num * dsum) / (sum * sum * sum);
    (chi, d1, d2)
}

fn gauss_legendre_16() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = 16;
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let k = k as f64;
                    let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
        }
        out
    })
}

/// `∫_a^b χ²` by composite 16-point Gauss–Legendre on 32 panels. The
/// weights are positive, so the result is never negative.
fn chi_sq_between(a: f64, b: f64) -> f64 {
    let (a, b) = (a.clamp(1.0, 2.0), b.clamp(1.0, 2.0));
    if b <= a {
        return 0.0;
    }
    let panels = 32;
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        for &(x, w) in gauss_legendre_16() {
            let c = smooth_step(mid + 0.5 * h * x).0;
            total += w * c * c;
        }
    }
    0.5 * h * total
}

fn chi_sq_integral(s: f64) -> f64 {
    chi_sq_between(1.0, s)
}

/// `φ(r) = ∫_0^r χ(s/R)² ds` and its first three derivatives.
pub fn virial_weight(radius: f64, r: f64) -> [f64; 4] {
    if r <= radius {
        return [r, 1.0, 0.0, 0.0];
    }
    let s = r / radius;
    let (c, c1, c2) = smooth_step(s);
    let phi = radius + radius * chi_sq_integral(s);
    [
        phi,
        c * c,
        2.0 * c * c1 / radius,
        2.0 * (c1 * c1 + c * c2) / (radius * radius),
    ]
}

/// The weights `φ, φ', φ'', φ''', φ/r` tabulated on a grid.
#[derive(Debug, Clone)]
pub struct CutoffWeights {
    pub radius: f64,
    pub profile: &'static str,
    pub phi: Vec<f64>,
    pub dphi: Vec<f64>,
    pub d2phi: Vec<f64>,
    pub d3phi: Vec<f64>,
    pub phi_over_r: Vec<f64>,
    grid: Arc<RadialGrid>,
}

pub fn build_cutoff(radius: f64, grid: &Arc<RadialGrid>) -> Result<CutoffWeights> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::invalid(format!("cutoff radius must be positive, got {radius}")));
    }
    if 2.0 * radius >= grid.r_max() {
        return Err(Error::DomainTooSmall(format!(
            "cutoff support 2R = {} reaches r_max = {}",
            2.0 * radius,
            grid.r_max()
        )));
    }
    let n = grid.len();
    let mut cw = CutoffWeights {
        radius,
        profile: "exp-ratio-smooth-step",
        phi: Vec::with_capacity(n),
        dphi: Vec::with_capacity(n),
        d2phi: Vec::with_capacity(n),
        d3phi: Vec::with_capacity(n),
        phi_over_r: Vec::with_capacity(n),
        grid: grid.clone(),
    };
    // φ accumulates node to node so that the table is monotone exactly
    let mut prev = (radius, radius);
    for &r in grid.nodes() {
        let [mut p, p1, p2, p3] = virial_weight(radius, r);
        if r > radius {
            p = prev.1 + radius * chi_sq_between(prev.0 / radius, r / radius);
            prev = (r, p);
        }
        cw.phi.push(p);
        cw.dphi.push(p1);
        cw.d2phi.push(p2);
        cw.d3phi.push(p3);
        cw.phi_over_r.push(if r <= radius { 1.0 } else { p / r });
    }
    Ok(cw)
}

impl CutoffWeights {
    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    /// `φ/r − φ'`, zero inside the plateau.
    pub fn excess(&self, j: usize) -> f64 {
        self.phi_over_r[j] - self.dphi[j]
    }

    fn check(&self, u: &RadialField) -> Result<()> {
        if *u.grid().as_ref() != *self.grid.as_ref() {
            return Err(Error::InvalidField("cutoff weights were built on a different grid".into()));
        }
        Ok(())
    }
}

/// `M(t)` for the state's equation.
pub fn morawetz_quantity(state: &EvolutionState, cw: &CutoffWeights) -> Result<f64> {
    cw.check(&state.u)?;
    let du = gradient(&state.u)?;
    let w = cw.grid.weights();
    let u = state.u.values();
    let d = du.values();
    Ok(match &state.u_t {
        None => (0..u.len())
            .map(|j| w[j] * 0.5 * (u[j] * d[j].conj()).im * cw.phi[j])
            .sum(),
        Some(v) => {
            let v = v.values();
            -(0..u.len())
                .map(|j| {
                    let q = 0.5 * (cw.dphi[j] + cw.phi_over_r[j]);
                    w[j] * (v[j] * (d[j].conj() * cw.phi[j] + u[j].conj() * q)).re
                })
                .sum::<f64>()
        }
    })
}

/// `|M| / (R E)` with `E = ‖u‖²_{H¹}` (plus `‖u_t‖²` for NLKG).
pub fn morawetz_bound_ratio(state: &EvolutionState, cw: &CutoffWeights) -> Result<f64> {
    let m = morawetz_quantity(state, cw)?;
    let mut e = mass_sq(&state.u) + grad_sq(&state.u);
    if let Some(v) = &state.u_t {
        e += mass_sq(v);
    }
    Ok(if e == 0.0 { 0.0 } else { m.abs() / (cw.radius * e) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityTerms {
    pub main: f64,
    pub laplacian: f64,
    pub radial_null: f64,
    pub exterior: f64,
}

impl IdentityTerms {
    pub fn total(&self) -> f64 {
        self.main + self.laplacian + self.radial_null + self.exterior
    }
}

/// The four terms of `dM/dt`, by quadrature at the state.
pub fn identity_terms(state: &EvolutionState, cw: &CutoffWeights, nl: &Nonlinearity) -> Result<IdentityTerms> {
    cw.check(&state.u)?;
    nl.check_field(&state.u)?;
    let du = gradient(&state.u)?;
    let grid = &cw.grid;
    let (w, r) = (grid.weights(), grid.nodes());
    let mut t = IdentityTerms {
        main: 0.0,
        laplacian: 0.0,
        radial_null: 0.0,
        exterior: 0.0,
    };
    for (j, (&z, dz)) in state.u.values().iter().zip(du.values()).enumerate() {
        let dr2 = dz.norm_sqr();
        // a radial field has no angular gradient
        let full2 = dr2;
        let g = nl.virial_density(z);
        let a2 = z.norm_sqr();
        t.main += w[j] * cw.dphi[j] * (dr2 - g);
        t.laplacian -= w[j] * 0.25 * (cw.d3phi[j] + 2.0 * cw.d2phi[j] / r[j]) * a2;
        t.radial_null += w[j] * cw.excess(j) * (full2 - dr2);
        t.exterior += w[j] * cw.excess(j) * (-0.25 * a2 / (r[j] * r[j]) - 0.5 * g);
    }
    Ok(t)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MorawetzRow {
    pub t: f64,
    pub m: f64,
    pub dm_dt: f64,
    pub rhs: f64,
    pub residual: f64,
    pub main: f64,
    pub laplacian: f64,
    pub radial_null: f64,
    pub exterior: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MorawetzReport {
    pub radius: f64,
    pub window: (f64, f64),
    pub rows: Vec<MorawetzRow>,
    pub max_residual: f64,
    pub max_abs_rhs: f64,
    /// Largest `|M(t)| / (R ‖u(t)‖²_{H¹})` seen in the window.
    pub m_bound_constant: f64,
    /// `M(t_last) − M(t_first)` over the interior rows.
    pub m_increment: f64,
    /// Trapezoid integral of the identity's right side over the same rows.
    pub rhs_integral: f64,
}

impl MorawetzReport {
    pub fn relative_residual(&self) -> f64 {
        if self.max_abs_rhs == 0.0 {
            self.max_residual
        } else {
            self.max_residual / self.max_abs_rhs
        }
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        for row in &self.rows {
            wr.serialize(row)?;
        }
        wr.flush()?;
        Ok(())
    }
}

fn check_window(traj: &Trajectory, t1: f64, t2: f64) -> Result<()> {
    let eps = 1e-9 * traj.t_end().abs().max(1.0);
    if !(t1 < t2 && t1 >= traj.t_start() - eps && t2 <= traj.t_end() + eps) {
        return Err(Error::invalid(format!(
            "window [{t1}, {t2}] is not inside the trajectory [{}, {}]",
            traj.t_start(),
            traj.t_end()
        )));
    }
    Ok(())
}

/// Centered-difference `dM/dt` against the identity's right side at every
/// interior snapshot inside `window`.
pub fn identity_residual(traj: &Trajectory, cw: &CutoffWeights, window: (f64, f64)) -> Result<MorawetzReport> {
    check_window(traj, window.0, window.1)?;
    let eps = 1e-9 * traj.t_end().abs().max(1.0);
    let inside: Vec<usize> = (0..traj.states.len())
        .filter(|&i| traj.states[i].t >= window.0 - eps && traj.states[i].t <= window.1 + eps)
        .collect();
    if inside.len() < 3 {
        return Err(Error::invalid("window holds fewer than three snapshots"));
    }
    let ms: Vec<f64> = inside
        .iter()
        .map(|&i| morawetz_quantity(&traj.states[i], cw))
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    let mut bound = 0.0_f64;
    for k in 1..inside.len() - 1 {
        let s = &traj.states[inside[k]];
        let (ta, tb) = (traj.states[inside[k - 1]].t, traj.states[inside[k + 1]].t);
        let dm = (ms[k + 1] - ms[k - 1]) / (tb - ta);
        let terms = identity_terms(s, cw, &traj.nl)?;
        let rhs = terms.total();
        bound = bound.max(morawetz_bound_ratio(s, cw)?);
        rows.push(MorawetzRow {
            t: s.t,
            m: ms[k],
            dm_dt: dm,
            rhs,
            residual: (dm - rhs).abs(),
            main: terms.main,
            laplacian: terms.laplacian,
            radial_null: terms.radial_null,
            exterior: terms.exterior,
        });
    }
    let rhs_integral = rows.windows(2).map(|w| 0.5 * (w[1].t - w[0].t) * (w[0].rhs + w[1].rhs)).sum();
    Ok(MorawetzReport {
        radius: cw.radius,
        window,
        max_residual: rows.iter().map(|r| r.residual).fold(0.0, f64::max),
        max_abs_rhs: rows.iter().map(|r| r.rhs.abs()).fold(0.0, f64::max),
        m_bound_constant: bound,
        m_increment: rows.last().unwrap().m - rows[0].m,
        rhs_integral,
        rows,
    })
}

/// Integral over `[a, b]` of the piecewise-linear interpolant of `(ts, ys)`.
fn window_integral(ts: &[f64], ys: &[f64], a: f64, b: f64) -> f64 {
    let lerp = |i: usize, x: f64| ys[i] + (ys[i + 1] - ys[i]) * (x - ts[i]) / (ts[i + 1] - ts[i]);
    let mut acc = 0.0;
    for i in 0..ts.len().saturating_sub(1) {
        let lo = ts[i].max(a);
        let hi = ts[i + 1].min(b);
        if hi > lo {
            acc += 0.5 * (hi - lo) * (lerp(i, lo) + lerp(i, hi));
        }
    }
    acc
}

/// `∫_{t1}^{t2} ∫|G(u)| dx dt` from the monitor series.
pub fn spacetime_g(traj: &Trajectory, t1: f64, t2: f64) -> Result<f64> {
    check_window(traj, t1, t2)?;
    let ts = traj.times();
    let ys: Vec<f64> = traj.monitor.iter().map(|m| m.g_integral).collect();
    Ok(window_integral(&ts, &ys, t1, t2))
}

/// Exponent `γ` of `R + ΔT R^{−γ}` in the plane: `min(p/2, 2)` for powers,
/// 2 for the exponential family.
pub fn virial_exponent(nl: &Nonlinearity) -> f64 {
    match *nl {
        Nonlinearity::Power { p, .. } => (0.5 * p).min(2.0),
        _ => 2.0,
    }
}

/// Time-weight exponent `max(2/(2+p), 1/3) + δ` (power) or `1/3 + δ`.
pub fn decay_weight_exponent(nl: &Nonlinearity, delta: f64) -> f64 {
    match *nl {
        Nonlinearity::Power { p, .. } => (2.0 / (2.0 + p)).max(1.0 / 3.0) + delta,
        _ => 1.0 / 3.0 + delta,
    }
}

/// `β = 1/2 + δ`.
pub fn force_weight_exponent(delta: f64) -> f64 {
    0.5 + delta
}

/// Threshold data needed to audit a focusing run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BelowThreshold {
    pub m: f64,
}

/// Refuses trajectories outside the estimate's hypotheses: focusing runs
/// need `E < m` (`E_S + M/2` for NLS, `E_K` for NLKG) and `K(u₀) > 0`.
pub fn check_hypotheses(traj: &Trajectory, threshold: Option<BelowThreshold>) -> Result<()> {
    let nl = &traj.nl;
    if !nl.is_focusing() {
        return Ok(());
    }
    let th = threshold.ok_or_else(|| {
        Error::HypothesisViolation("focusing run audited without a threshold".into())
    })?;
    let s0 = &traj.states[0];
    let level = match s0.equation() {
        Equation::Nls => static_energy(&s0.u, 1.0, nl)?,
        Equation::Nlkg => energy(s0, nl)?,
    };
    if !(level < th.m) {
        return Err(Error::HypothesisViolation(format!(
            "initial energy level {level} is not below the threshold {}",
            th.m
        )));
    }
    let k = virial_k(&s0.u, nl);
    if !(k > 0.0) {
        return Err(Error::HypothesisViolation(format!("K(u0) = {k} is not positive")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuditCell {
    pub radius: f64,
    pub t1: f64,
    pub t2: f64,
    pub value: f64,
    pub bound_shape: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VirialMorawetzAudit {
    pub gamma: f64,
    pub cells: Vec<AuditCell>,
    /// Per window: max over radii of `value / (R + ΔT R^{−γ})`.
    pub per_window: Vec<f64>,
    /// Constant fitted on the windows seen so far.
    pub running_max: Vec<f64>,
    pub c_star: f64,
    /// Final fitted constant within 2× of the one fitted on the first window.
    pub stable: bool,
}

pub fn virial_morawetz_audit(
    traj: &Trajectory,
    radii: &[f64],
    windows: &[(f64, f64)],
    threshold: Option<BelowThreshold>,
) -> Result<VirialMorawetzAudit> {
    check_hypotheses(traj, threshold)?;
    if radii.is_empty() || windows.is_empty() {
        return Err(Error::invalid("audit needs at least one radius and one window"));
    }
    if radii.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::invalid("radii must be positive"));
    }
    let gamma = virial_exponent(&traj.nl);
    let mut cells = Vec::new();
    let mut per_window = Vec::new();
    for &(t1, t2) in windows {
        let value = spacetime_g(traj, t1, t2)?;
        let mut best = 0.0_f64;
        for &r in radii {
            let shape = r + (t2 - t1) * r.powf(-gamma);
            let ratio = value / shape;
            best = best.max(ratio);
            cells.push(AuditCell {
                radius: r,
                t1,
                t2,
                value,
                bound_shape: shape,
                ratio,
            });
        }
        per_window.push(best);
    }
    let running_max: Vec<f64> = per_window
        .iter()
        .scan(0.0_f64, |m, &c| {
            *m = m.max(c);
            Some(*m)
        })
        .collect();
    let c_star = *running_max.last().unwrap();
    let stable = c_star <= 2.0 * running_max[0];
    Ok(VirialMorawetzAudit {
        gamma,
        cells,
        per_window,
        running_max,
        c_star,
        stable,
    })
}

/// A truncated weighted time integral `∫_T^{horizon} t^{−a} y(t) dt` and its
/// ratio to `T^{−δ}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedIntegral {
    pub exponent: f64,
    pub delta: f64,
    pub t_start: f64,
    pub horizon: f64,
    pub value: f64,
    pub ratio: f64,
}

fn weighted(traj: &Trajectory, t: f64, delta: f64, exponent: f64, y: impl Fn(usize) -> f64) -> Result<WeightedIntegral> {
    if !(t >= 1.0) {
        return Err(Error::invalid(format!("weighted integrals start at T >= 1, got {t}")));
    }
    if !(delta > 0.0) {
        return Err(Error::invalid(format!("delta must be positive, got {delta}")));
    }
    if t >= traj.t_end() || t < traj.t_start() {
        return Err(Error::invalid(format!(
            "T = {t} is outside the trajectory [{}, {}]",
            traj.t_start(),
            traj.t_end()
        )));
    }
    let ts = traj.times();
    let ys: Vec<f64> = (0..ts.len()).map(|i| ts[i].max(1e-300).powf(-exponent) * y(i)).collect();
    let value = window_integral(&ts, &ys, t, traj.t_end());
    Ok(WeightedIntegral {
        exponent,
        delta,
        t_start: t,
        horizon: traj.t_end(),
        value,
        ratio: value / t.powf(-delta),
    })
}

/// `∫_T^{horizon} t^{−α} ∫|G(u)| dx dt`.
pub fn weighted_decay_integral(traj: &Trajectory, t: f64, delta: f64) -> Result<WeightedIntegral> {
    let a = decay_weight_exponent(&traj.nl, delta);
    weighted(traj, t, delta, a, |i| traj.monitor[i].g_integral)
}

/// `∫_T^{horizon} t^{−β} ∫|f(u)| dx dt`, exponential family only.
pub fn weighted_f_l1(traj: &Trajectory, t: f64, delta: f64) -> Result<WeightedIntegral> {
    if !matches!(traj.nl, Nonlinearity::Exponential { .. }) {
        return Err(Error::Unsupported("weighted f(u) bound is specific to the exponential family".into()));
    }
    weighted(traj, t, delta, force_weight_exponent(delta), |i| traj.monitor[i].f_l1)
}

/// Width `T₀^{1−α}/(2α)` of the smallness window ending at `T₀`.
pub fn window_width(t0: f64, alpha: f64) -> f64 {
    t0.powf(1.0 - alpha) / (2.0 * alpha)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmallWindow {
    pub t0: f64,
    pub start: f64,
    pub value: f64,
}

/// First monitor time `T₀ > T` whose trailing window carries less than `ε`
/// of `∫∫|G|`. `None` when the trajectory ends first.
pub fn window_smallness_search(traj: &Trajectory, eps: f64, t: f64, delta: f64) -> Result<Option<SmallWindow>> {
    if !(eps > 0.0 && t >= 1.0 && delta > 0.0) {
        return Err(Error::invalid("window search needs eps > 0, T >= 1, delta > 0"));
    }
    let alpha = decay_weight_exponent(&traj.nl, delta);
    let ts = traj.times();
    let ys: Vec<f64> = traj.monitor.iter().map(|m| m.g_integral).collect();
    for &t0 in ts.iter().filter(|&&x| x > t) {
        let start = t0 - window_width(t0, alpha);
        if start < traj.t_start() {
            continue;
        }
        let value = window_integral(&ts, &ys, start, t0);
        if value < eps {
            return Ok(Some(SmallWindow { t0, start, value }));
        }
    }
    Ok(None)
}

/// `|∫(G(u) − G(χ_R u)) dx|`.
pub fn exterior_defect(u: &RadialField, radius: f64, nl: &Nonlinearity) -> f64 {
    let w = u.grid().weights();
    u.values()
        .iter()
        .zip(u.grid().nodes())
        .zip(w)
        .map(|((&z, &r), w)| {
            let c = smooth_step(r / radius).0;
            w * (nl.virial_density(z) - nl.virial_density(z * c))
        })
        .sum::<f64>()
        .abs()
}

/// Both sides of `Σ_{k≥2} a_k^{(2k−1)/(2k)} b_k^{1/(2k)} ≤ Σ (2k−1)/(2k) a_k + Σ b_k/(2k)`;
/// `a[0]`, `b[0]` carry index 2.
pub fn geometric_mean_sides(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut lhs = 0.0;
    let mut rhs = 0.0;
    for (i, (&x, &y)) in a.iter().zip(b).enumerate() {
        let k = (i + 2) as f64;
        let e = 1.0 / (2.0 * k);
        lhs += x.powf(1.0 - e) * y.powf(e);
        rhs += (1.0 - e) * x + e * y;
    }
    (lhs, rhs)
}
