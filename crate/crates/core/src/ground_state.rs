//! Positive radial ground states of `−ΔQ + cQ = f(Q)` by shooting on `Q(0)`.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{potential_integral, static_energy, virial_integral};
use crate::nonlinearity::{exp_tail3, Nonlinearity, EXP_LIMIT};
use crate::ode::{Control, Dopri5};
use crate::radial::bessel::{k0_large, k1_large};
use crate::radial::interp::resample;
use crate::radial::io::{load_field, save_field};
use crate::radial::ops::grad_sq;
use crate::radial::{make_grid, GridKind, GridSpec, RadialField, RadialGrid};

/// Residual tolerance above which a computed profile is rejected.
pub const IDENTITY_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ShootingConfig {
    /// Start radius of the integration; the series expansion covers `[0, r0]`.
    pub r0: f64,
    pub rtol: f64,
    pub atol: f64,
    /// Stop bisecting once the bracket on `Q(0)` is narrower than this.
    pub bracket_tol: f64,
    /// Upper cap for the doubling search of the overshooting end.
    pub b_cap: f64,
    /// Output grid. By default Gauss–Bessel with `r_max = 30/√c`, refined
    /// from 512 nodes until the norms settle to 1e-10.
    pub grid: Option<GridSpec>,
}

impl Default for ShootingConfig {
    fn default() -> Self {
        ShootingConfig {
            r0: 1e-3,
            rtol: 1e-13,
            atol: 1e-16,
            bracket_tol: 1e-12,
            b_cap: 65536.0,
            grid: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IdentityKind {
    /// Energy identity and gradient/mass ratio of the power family.
    Power,
    /// Zeros of the scaling derivatives along (1,−1) and (0,1), used where
    /// no closed-form identities are available.
    ScalingDerivatives,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PohozaevReport {
    pub kind: IdentityKind,
    /// Power: `|‖∇Q‖² + c‖Q‖² − ∫Re(Q̄f)| / ∫Re(Q̄f)`.
    /// Exponential: `|‖∇Q‖² − ∫G| / ‖∇Q‖²`.
    pub energy_identity_residual: f64,
    /// Power: `|‖∇Q‖² − (p/2) c ‖Q‖²| / ‖∇Q‖²`.
    /// Exponential: `|c‖Q‖² − ∫F| / (c‖Q‖²)`.
    pub pohozaev_residual: f64,
}

impl PohozaevReport {
    fn from_integrals(nl: &Nonlinearity, c: f64, mass: f64, grad: f64, pairing: f64, pot: f64, g: f64) -> Self {
        match *nl {
            Nonlinearity::Power { p, .. } => PohozaevReport {
                kind: IdentityKind::Power,
                energy_identity_residual: ((grad + c * mass - pairing) / pairing).abs(),
                pohozaev_residual: ((grad - 0.5 * p * c * mass) / grad).abs(),
            },
            _ => PohozaevReport {
                kind: IdentityKind::ScalingDerivatives,
                energy_identity_residual: ((grad - g) / grad).abs(),
                pohozaev_residual: ((c * mass - pot) / (c * mass)).abs(),
            },
        }
    }

    /// Residuals of an arbitrary profile (gradient by the grid's operator).
    pub fn for_profile(u: &RadialField, c: f64, nl: &Nonlinearity) -> Result<Self> {
        if u.is_zero() {
            return Err(Error::invalid("identity residuals of the zero field are undefined"));
        }
        nl.check_field(u)?;
        let mass = crate::radial::ops::mass_sq(u);
        let grad = grad_sq(u);
        let pairing = crate::functionals::pairing_integral(u, nl);
        Ok(Self::from_integrals(
            nl,
            c,
            mass,
            grad,
            pairing,
            potential_integral(u, nl),
            virial_integral(u, nl),
        ))
    }

    pub fn max(&self) -> f64 {
        self.energy_identity_residual.max(self.pohozaev_residual)
    }
}

/// Dense representation of the shooting solution: series near the origin,
/// quintic Hermite pieces in between, a K0 tail at large r.
#[derive(Debug, Clone)]
struct ProfileTable {
    c: f64,
    b: f64,
    a2: f64,
    a4: f64,
    r0: f64,
    r: Vec<f64>,
    q: Vec<f64>,
    dq: Vec<f64>,
    ddq: Vec<f64>,
    tail_amp: f64,
}

impl ProfileTable {
    fn r_match(&self) -> f64 {
        *self.r.last().expect("nonempty table")
    }

    /// `(Q(r), Q'(r))`.
    fn eval(&self, r: f64) -> (f64, f64) {
        if r <= self.r0 {
            let r2 = r * r;
            return (
                self.b + self.a2 * r2 + self.a4 * r2 * r2,
                2.0 * self.a2 * r + 4.0 * self.a4 * r2 * r,
            );
        }
        if r >= self.r_match() {
            let s = self.c.sqrt();
            return (self.tail_amp * k0_large(s * r), -self.tail_amp * s * k1_large(s * r));
        }
        let i = self.r.partition_point(|&x| x <= r).clamp(1, self.r.len() - 1) - 1;
        let h = self.r[i + 1] - self.r[i];
        let t = (r - self.r[i]) / h;
        let (t2, t3) = (t * t, t * t * t);
        let (t4, t5) = (t3 * t, t3 * t2);
        let basis = [
            1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5,
            t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5,
            0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5,
            0.5 * t3 - t4 + 0.5 * t5,
            -4.0 * t3 + 7.0 * t4 - 3.0 * t5,
            10.0 * t3 - 15.0 * t4 + 6.0 * t5,
        ];
        let dbasis = [
            -30.0 * t2 + 60.0 * t3 - 30.0 * t4,
            1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4,
            t - 4.5 * t2 + 6.0 * t3 - 2.5 * t4,
            1.5 * t2 - 4.0 * t3 + 2.5 * t4,
            -12.0 * t2 + 28.0 * t3 - 15.0 * t4,
            30.0 * t2 - 60.0 * t3 + 30.0 * t4,
        ];
        let coef = [
            self.q[i],
            h * self.dq[i],
            h * h * self.ddq[i],
            h * h * self.ddq[i + 1],
            h * self.dq[i + 1],
            self.q[i + 1],
        ];
        let v: f64 = coef.iter().zip(&basis).map(|(a, b)| a * b).sum();
        let d: f64 = coef.iter().zip(&dbasis).map(|(a, b)| a * b).sum::<f64>() / h;
        (v, d)
    }
}

#[derive(Debug, Clone)]
pub struct GroundState {
    pub profile: RadialField,
    pub c: f64,
    pub nl: Nonlinearity,
    /// `Q(0)`
    pub peak: f64,
    pub mass_sq: f64,
    pub grad_sq: f64,
    /// `∫Re(Q̄ f(Q))`; equals `‖Q‖_{p+2}^{p+2}` for the focusing power family.
    pub lp_norm: f64,
    pub j_value: f64,
    pub residuals: PohozaevReport,
    pub bracket_width: f64,
    table: Option<Arc<ProfileTable>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Shot {
    Overshoot,
    Undershoot,
}

struct Shooter<'a> {
    nl: &'a Nonlinearity,
    c: f64,
    cfg: &'a ShootingConfig,
    r_end: f64,
}

struct ShotRecord {
    shot: Shot,
    r_event: f64,
    r: Vec<f64>,
    y: Vec<[f64; 2]>,
}

impl Shooter<'_> {
    fn series(&self, b: f64) -> (f64, f64) {
        let (f, df) = self.nl.force_real(b);
        let a2 = (self.c * b - f) / 4.0;
        let a4 = (self.c - df) * a2 / 16.0;
        (a2, a4)
    }

    fn rhs(&self, r: f64, y: &[f64; 2]) -> [f64; 2] {
        let (f, _) = self.nl.force_real(y[0]);
        [y[1], -y[1] / r + self.c * y[0] - f]
    }

    fn shoot(&self, b: f64, record: bool) -> ShotRecord {
        if let Nonlinearity::Exponential { kappa0, .. } = *self.nl {
            if kappa0 * b * b > EXP_LIMIT {
                return ShotRecord {
                    shot: Shot::Overshoot,
                    r_event: 0.0,
                    r: vec![],
                    y: vec![],
                };
            }
        }
        let (a2, a4) = self.series(b);
        let r0 = self.cfg.r0;
        let y0 = [b + a2 * r0 * r0 + a4 * r0.powi(4), 2.0 * a2 * r0 + 4.0 * a4 * r0.powi(3)];
        let solver = Dopri5 {
            rtol: self.cfg.rtol,
            atol: self.cfg.atol,
            h_init: 1e-3,
            h_max: 0.01 / self.c.sqrt(),
            max_steps: 2_000_000,
        };
        let mut shot = None;
        let mut rs = vec![r0];
        let mut ys = vec![y0];
        let out = solver.integrate(
            |r, y| self.rhs(r, y),
            r0,
            y0,
            self.r_end,
            |r, y| {
                if y[0] < 0.0 {
                    shot = Some(Shot::Overshoot);
                    return Control::Stop;
                }
                if y[1] >= 0.0 {
                    shot = Some(Shot::Undershoot);
                    return Control::Stop;
                }
                if record {
                    rs.push(r);
                    ys.push(*y);
                }
                Control::Continue
            },
        );
        let shot = shot.unwrap_or(if out.y[1] + self.c.sqrt() * out.y[0] > 0.0 {
            Shot::Undershoot
        } else {
            Shot::Overshoot
        });
        ShotRecord {
            shot,
            r_event: out.t,
            r: rs,
            y: ys,
        }
    }
}

/// Solve for the positive ground state of `−ΔQ + cQ = f(Q)`.
pub fn solve_ground_state(nl: &Nonlinearity, c: f64, cfg: &ShootingConfig) -> Result<GroundState> {
    nl.validate()?;
    if !nl.is_focusing() {
        return Err(Error::NoGroundState(format!(
            "{nl} is not focusing; no positive decaying profile exists"
        )));
    }
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::invalid(format!("ground states need c > 0, got {c}")));
    }
    let shooter = Shooter {
        nl,
        c,
        cfg,
        r_end: 80.0 / c.sqrt(),
    };

    let mut lo = c.sqrt();
    let mut tries = 0;
    while shooter.shoot(lo, false).shot == Shot::Overshoot {
        lo *= 0.5;
        tries += 1;
        if tries > 60 {
            return Err(Error::NoGroundState("no undershooting initial value found".into()));
        }
    }
    let mut hi = 2.0 * lo;
    while shooter.shoot(hi, false).shot == Shot::Undershoot {
        lo = hi;
        hi *= 2.0;
        if hi > cfg.b_cap {
            return Err(Error::NoGroundState(format!(
                "no overshoot below Q(0) = {}",
                cfg.b_cap
            )));
        }
    }
    for _ in 0..200 {
        if hi - lo <= cfg.bracket_tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match shooter.shoot(mid, false).shot {
            Shot::Overshoot => hi = mid,
            Shot::Undershoot => lo = mid,
        }
    }
    let b = 0.5 * (lo + hi);
    let rec = shooter.shoot(b, true);
    log::debug!(
        "ground state {nl}, c={c}: Q(0)={b}, bracket {:.2e}, {:?} at r={:.2}",
        hi - lo,
        rec.shot,
        rec.r_event
    );

    // trust the trajectory up to a few decay lengths before it peels off
    let sc = c.sqrt();
    let r_cut = (rec.r_event - 6.0 / sc).max(4.0 / sc);
    let keep = rec.r.partition_point(|&r| r <= r_cut).max(2);
    let r: Vec<f64> = rec.r[..keep].to_vec();
    let q: Vec<f64> = rec.y[..keep].iter().map(|y| y[0]).collect();
    let dq: Vec<f64> = rec.y[..keep].iter().map(|y| y[1]).collect();
    let ddq: Vec<f64> = r
        .iter()
        .zip(&rec.y[..keep])
        .map(|(&ri, y)| shooter.rhs(ri, y)[1])
        .collect();
    let r_match = r[keep - 1];
    let x_match = sc * r_match;
    if x_match < 4.0 {
        return Err(Error::ValidationFailure(format!(
            "shooting trajectory left the separatrix too early (r = {r_match:.3})"
        )));
    }
    let (a2, a4) = shooter.series(b);
    let table = ProfileTable {
        c,
        b,
        a2,
        a4,
        r0: cfg.r0,
        tail_amp: q[keep - 1] / k0_large(x_match),
        r,
        q,
        dq,
        ddq,
    };

    let table = Arc::new(table);
    if let Some(spec) = cfg.grid {
        return GroundState::from_table(table, spec.build()?, nl, c, hi - lo);
    }
    // refine the default grid until the quadratures settle
    let mut n = 512;
    let mut prev = GroundState::from_table(table.clone(), make_grid(30.0 / sc, n, GridKind::GaussBessel)?, nl, c, hi - lo);
    loop {
        n *= 2;
        let next = GroundState::from_table(table.clone(), make_grid(30.0 / sc, n, GridKind::GaussBessel)?, nl, c, hi - lo);
        let settled = match (&prev, &next) {
            (Ok(a), Ok(b)) => {
                let d = |x: f64, y: f64| ((x - y) / y).abs();
                d(a.mass_sq, b.mass_sq).max(d(a.grad_sq, b.grad_sq)).max(d(a.lp_norm, b.lp_norm)) < 1e-10
            }
            _ => false,
        };
        if settled || n >= 4096 {
            return next;
        }
        prev = next;
    }
}

impl GroundState {
    fn from_table(
        table: Arc<ProfileTable>,
        grid: Arc<RadialGrid>,
        nl: &Nonlinearity,
        c: f64,
        bracket_width: f64,
    ) -> Result<Self> {
        let (vals, ders): (Vec<f64>, Vec<f64>) = grid.nodes().iter().map(|&r| table.eval(r)).unzip();
        let profile = RadialField::from_real(grid.clone(), &vals)?;
        let last = *vals.last().expect("nonempty grid");
        if last.abs() >= 1e-10 {
            return Err(Error::DomainTooSmall(format!(
                "ground state is {last:.3e} at r_max = {}; enlarge the grid",
                grid.r_max()
            )));
        }
        if vals.iter().any(|&v| v <= 0.0) || vals.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::ValidationFailure("profile is not positive and decreasing".into()));
        }
        let mass_sq = grid.integrate_slice(&vals.iter().map(|v| v * v).collect::<Vec<_>>());
        let grad = grid.integrate_slice(&ders.iter().map(|v| v * v).collect::<Vec<_>>());
        let pairing = crate::functionals::pairing_integral(&profile, nl);
        let pot = potential_integral(&profile, nl);
        let g = virial_integral(&profile, nl);
        let residuals = PohozaevReport::from_integrals(nl, c, mass_sq, grad, pairing, pot, g);
        if residuals.max() > IDENTITY_TOLERANCE {
            return Err(Error::ValidationFailure(format!(
                "identity residuals {:.3e} / {:.3e} exceed {IDENTITY_TOLERANCE:e}",
                residuals.energy_identity_residual, residuals.pohozaev_residual
            )));
        }
        Ok(GroundState {
            profile,
            c,
            nl: *nl,
            peak: table.b,
            mass_sq,
            grad_sq: grad,
            lp_norm: pairing,
            j_value: 0.5 * grad + 0.5 * c * mass_sq - 0.5 * pot,
            residuals,
            bracket_width,
            table: Some(table),
        })
    }

    /// The profile sampled on another grid (exact shooting solution when
    /// available, interpolation otherwise).
    pub fn profile_on(&self, grid: &Arc<RadialGrid>) -> RadialField {
        match &self.table {
            Some(t) => {
                let vals: Vec<f64> = grid.nodes().iter().map(|&r| t.eval(r).0).collect();
                RadialField::from_real(grid.clone(), &vals).expect("finite profile")
            }
            None => resample(&self.profile, grid),
        }
    }

    /// `(Q(r), Q'(r))` from the shooting solution.
    pub fn eval(&self, r: f64) -> Option<(f64, f64)> {
        self.table.as_ref().map(|t| t.eval(r))
    }

    /// `sup |ΔQ − cQ + f(Q)|` on the profile grid, using the grid Laplacian.
    pub fn pde_residual(&self) -> Result<f64> {
        let lap = crate::radial::laplacian(&self.profile)?;
        Ok(lap
            .values()
            .iter()
            .zip(self.profile.values())
            .map(|(l, q)| (l.re - self.c * q.re + self.nl.force_real(q.re).0).abs())
            .fold(0.0, f64::max))
    }

    pub fn summary(&self) -> GroundStateSummary {
        GroundStateSummary {
            nl: self.nl,
            c: self.c,
            peak: self.peak,
            mass_sq: self.mass_sq,
            grad_sq: self.grad_sq,
            lp_norm: self.lp_norm,
            j_value: self.j_value,
            threshold: self.threshold().m,
            residuals: self.residuals,
            bracket_width: self.bracket_width,
            grid: self.profile.grid().spec(),
        }
    }

    pub fn threshold(&self) -> Threshold {
        let exponential_bound = match self.nl {
            Nonlinearity::Exponential { kappa0, .. } => Some(2.0 * PI / kappa0),
            _ => None,
        };
        Threshold {
            m: exponential_bound.map_or(self.j_value, |e| e.min(self.j_value)),
            ground_state_energy: self.j_value,
            exponential_bound,
            c: self.c,
        }
    }

    /// Write `<stem>.field` and the `<stem>.json` sidecar into `dir`.
    pub fn save(&self, dir: impl AsRef<Path>, stem: &str) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        save_field(dir.join(format!("{stem}.field")), &self.profile)?;
        let json = serde_json::to_string_pretty(&self.summary())?;
        fs::write(dir.join(format!("{stem}.json")), json + "\n")?;
        Ok(())
    }

    /// Read back a saved ground state. The reloaded object resamples by
    /// interpolation since the shooting table is not persisted.
    pub fn load(dir: impl AsRef<Path>, stem: &str) -> Result<Self> {
        let dir = dir.as_ref();
        let profile = load_field(dir.join(format!("{stem}.field")))?;
        let s: GroundStateSummary = serde_json::from_str(&fs::read_to_string(dir.join(format!("{stem}.json")))?)?;
        Ok(GroundState {
            profile,
            c: s.c,
            nl: s.nl,
            peak: s.peak,
            mass_sq: s.mass_sq,
            grad_sq: s.grad_sq,
            lp_norm: s.lp_norm,
            j_value: s.j_value,
            residuals: s.residuals,
            bracket_width: s.bracket_width,
            table: None,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroundStateSummary {
    pub nl: Nonlinearity,
    pub c: f64,
    pub peak: f64,
    pub mass_sq: f64,
    pub grad_sq: f64,
    pub lp_norm: f64,
    pub j_value: f64,
    pub threshold: f64,
    pub residuals: PohozaevReport,
    pub bracket_width: f64,
    pub grid: GridSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    /// The threshold actually used for classification.
    pub m: f64,
    /// `J^(c)(Q)`.
    pub ground_state_energy: f64,
    /// `2π/κ₀` for the exponential family. Which of the two candidates is
    /// the true threshold depends on the Trudinger–Moser constant, which is
    /// not decided numerically; the smaller one is used.
    pub exponential_bound: Option<f64>,
    pub c: f64,
}

pub fn threshold_m(nl: &Nonlinearity, c: f64, cfg: &ShootingConfig) -> Result<Threshold> {
    Ok(solve_ground_state(nl, c, cfg)?.threshold())
}

/// Sharp constant `C` in `‖g‖_{p+2}^{p+2} ≤ C ‖g‖₂² ‖∇g‖₂^p`:
/// `C = ((p+2)/2) (p/2)^{−p/2} ‖Q₀‖₂^{−p}`, with `Q₀` the c = 1 ground state.
pub fn gn_sharp_constant(p: f64, q: &GroundState) -> Result<f64> {
    match q.nl {
        Nonlinearity::Power { p: pq, .. } if pq == p => {
            // Q_c(r) = c^{1/p} Q₀(√c r)  ⇒  ‖Q₀‖² = c^{1 − 2/p} ‖Q_c‖²
            let m0 = q.mass_sq * q.c.powf(1.0 - 2.0 / p);
            Ok(0.5 * (p + 2.0) * (0.5 * p).powf(-0.5 * p) * m0.powf(-0.5 * p))
        }
        Nonlinearity::Power { p: pq, .. } => Err(Error::invalid(format!(
            "ground state was computed for p = {pq}, not p = {p}"
        ))),
        _ => Err(Error::invalid("sharp G-N constant needs a power ground state")),
    }
}

/// Trial-function family for the Trudinger–Moser quotient.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TmFamily {
    /// Gaussian shapes `e^{−μ r²}` (the quotient is dilation invariant, so a
    /// single μ spans the family; extra values only refine quadrature checks).
    pub gaussian_mu: Vec<f64>,
    /// Moser profiles concentrated at scale ρ ∈ (0, 1).
    pub moser_rho: Vec<f64>,
    /// Target gradient energies as fractions of `4π/κ₀`, each in (0, 1).
    pub gradient_fractions: Vec<f64>,
}

impl Default for TmFamily {
    fn default() -> Self {
        TmFamily {
            gaussian_mu: vec![1.0],
            moser_rho: vec![0.5, 0.2, 0.05, 0.01],
            gradient_fractions: vec![0.1, 0.3, 0.5, 0.7, 0.9, 0.95, 0.99],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TmBound {
    pub value: f64,
    pub best_member: String,
    pub members: usize,
}

/// Moser function with unit Dirichlet energy, supported in the unit disk.
pub fn moser_profile(rho: f64, r: f64) -> f64 {
    let l = (1.0 / rho).ln();
    let s = 1.0 / (2.0 * PI).sqrt();
    if r <= rho {
        s * l.sqrt()
    } else if r < 1.0 {
        s * (1.0 / r).ln() / l.sqrt()
    } else {
        0.0
    }
}

fn tm_quotient(kappa0: f64, shape: &dyn Fn(f64) -> f64, grad_unit: f64, target_grad: f64, r_max: f64) -> f64 {
    // uniform midpoint quadrature; the kinks of the Moser profiles sit on cell faces
    let n = 20_000;
    let h = r_max / n as f64;
    let amp = (target_grad / grad_unit).sqrt();
    let (mut mass, mut pot) = (0.0, 0.0);
    for j in 0..n {
        let r = (j as f64 + 0.5) * h;
        let v = amp * shape(r);
        let w = 2.0 * PI * r * h;
        mass += w * v * v;
        pot += w * exp_tail3(kappa0 * v * v) / kappa0;
    }
    2.0 * pot / mass
}

/// Best value of `2∫F(φ)/‖φ‖₂²` over the family subject to
/// `κ₀‖∇φ‖₂² < 4π`: a lower bound on the Trudinger–Moser constant.
pub fn tm_constant_lower_bound(kappa0: f64, family: &TmFamily) -> Result<TmBound> {
    if !(kappa0.is_finite() && kappa0 > 0.0) {
        return Err(Error::invalid(format!("kappa0 must be positive, got {kappa0}")));
    }
    if family.gradient_fractions.is_empty() || family.gaussian_mu.is_empty() && family.moser_rho.is_empty() {
        return Err(Error::invalid("empty trial family"));
    }
    if let Some(f) = family.gradient_fractions.iter().find(|&&f| !(f > 0.0 && f < 1.0)) {
        return Err(Error::invalid(format!("gradient fraction {f} outside (0, 1)")));
    }
    let mut best = (f64::NEG_INFINITY, String::new());
    let mut members = 0;
    for &frac in &family.gradient_fractions {
        let target = frac * 4.0 * PI / kappa0;
        for &mu in &family.gaussian_mu {
            let shape = move |r: f64| (-mu * r * r).exp();
            // ‖∇e^{−μr²}‖² = π
            let q = tm_quotient(kappa0, &shape, PI, target, 12.0 / mu.sqrt());
            members += 1;
            if q > best.0 {
                best = (q, format!("gaussian(mu={mu}, grad_fraction={frac})"));
            }
        }
        for &rho in &family.moser_rho {
            let shape = move |r: f64| moser_profile(rho, r);
            let q = tm_quotient(kappa0, &shape, 1.0, target, 1.0);
            members += 1;
            if q > best.0 {
                best = (q, format!("moser(rho={rho}, grad_fraction={frac})"));
            }
        }
    }
    Ok(TmBound {
        value: best.0,
        best_member: best.1,
        members,
    })
}

/// `J^(c)` of an arbitrary field, re-exported for threshold comparisons.
pub fn energy_of(u: &RadialField, c: f64, nl: &Nonlinearity) -> Result<f64> {
    static_energy(u, c, nl)
}
