//! Gauge-invariant nonlinearities `f(u) = λ g(|u|²) u`.
//!
//! For each family three pointwise densities are provided:
//! the force `f(u)`, its potential `F(u)` normalised so that `F(0) = 0` and
//! `∂_ū F = f`, and the virial density `G(u) = Re(ū f(u)) − F(u)`.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::radial::RadialField;

/// Largest admissible `κ₀|u|²` before the exponential is declared to overflow.
pub const EXP_LIMIT: f64 = 700.0;

/// Below this `κ₀|u|²` the force uses its Taylor series.
pub const FORCE_SERIES_SWITCH: f64 = 1e-2;

/// Below this `κ₀|u|²` the potential and virial density use their Taylor
/// series. Their closed forms cancel three leading orders, so the series
/// is kept over a wider range than for the force.
pub const POTENTIAL_SERIES_SWITCH: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Nonlinearity {
    /// `λ|u|^p u`, p > 2.
    Power { p: f64, lambda: f64 },
    /// `λ(e^{κ₀|u|²} − 1 − κ₀|u|²) u`, κ₀ > 0.
    Exponential { kappa0: f64, lambda: f64 },
    /// `f ≡ 0`: the linear equation.
    Free,
}

impl fmt::Display for Nonlinearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Nonlinearity::Power { p, lambda } => write!(f, "power(p={p}, lambda={lambda})"),
            Nonlinearity::Exponential { kappa0, lambda } => write!(f, "exponential(kappa0={kappa0}, lambda={lambda})"),
            Nonlinearity::Free => f.write_str("free"),
        }
    }
}

fn check_sign(lambda: f64) -> Result<()> {
    if lambda == 1.0 || lambda == -1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("lambda must be +1 or -1, got {lambda}")))
    }
}

impl Nonlinearity {
    pub fn power(p: f64, lambda: f64) -> Result<Self> {
        let nl = Nonlinearity::Power { p, lambda };
        nl.validate()?;
        Ok(nl)
    }

    pub fn exponential(kappa0: f64, lambda: f64) -> Result<Self> {
        let nl = Nonlinearity::Exponential { kappa0, lambda };
        nl.validate()?;
        Ok(nl)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Nonlinearity::Power { p, lambda } => {
                if !(p.is_finite() && p > 2.0) {
                    return Err(Error::invalid(format!("power nonlinearity needs p > 2, got {p}")));
                }
                check_sign(lambda)
            }
            Nonlinearity::Exponential { kappa0, lambda } => {
                if !(kappa0.is_finite() && kappa0 > 0.0) {
                    return Err(Error::invalid(format!("exponential nonlinearity needs kappa0 > 0, got {kappa0}")));
                }
                check_sign(lambda)
            }
            Nonlinearity::Free => Ok(()),
        }
    }

    /// λ, or 0 for the free equation.
    pub fn lambda(&self) -> f64 {
        match *self {
            Nonlinearity::Power { lambda, .. } | Nonlinearity::Exponential { lambda, .. } => lambda,
            Nonlinearity::Free => 0.0,
        }
    }

    pub fn is_focusing(&self) -> bool {
        self.lambda() > 0.0
    }

    pub fn is_defocusing(&self) -> bool {
        self.lambda() < 0.0
    }

    /// Overflow guard for the exponential family: errors when
    /// `κ₀ max|u|² > 700`.
    pub fn check_amplitude(&self, max_abs_sq: f64) -> Result<()> {
        if let Nonlinearity::Exponential { kappa0, .. } = *self {
            let x = kappa0 * max_abs_sq;
            if !(x <= EXP_LIMIT) {
                return Err(Error::Overflow {
                    exponent: x,
                    limit: EXP_LIMIT,
                });
            }
        }
        Ok(())
    }

    pub fn check_field(&self, u: &RadialField) -> Result<()> {
        self.check_amplitude(u.values().iter().fold(0.0, |m, z| m.max(z.norm_sqr())))
    }

    /// Real multiplier `λ g(s)` with `f(u) = λ g(|u|²) u`.
    pub fn phase_rate(&self, s: f64) -> f64 {
        match *self {
            Nonlinearity::Power { p, lambda } => lambda * s.powf(0.5 * p),
            Nonlinearity::Exponential { kappa0, lambda } => lambda * exp_tail2(kappa0 * s),
            Nonlinearity::Free => 0.0,
        }
    }

    /// `f(z)`.
    pub fn force(&self, z: Complex64) -> Complex64 {
        z * self.phase_rate(z.norm_sqr())
    }

    /// `F(z)`.
    pub fn potential(&self, z: Complex64) -> f64 {
        let s = z.norm_sqr();
        match *self {
            Nonlinearity::Power { p, lambda } => 2.0 * lambda / (p + 2.0) * s.powf(0.5 * p + 1.0),
            Nonlinearity::Exponential { kappa0, lambda } => lambda / kappa0 * exp_tail3(kappa0 * s),
            Nonlinearity::Free => 0.0,
        }
    }

    /// `Re(z̄ f(z))`.
    pub fn pairing(&self, z: Complex64) -> f64 {
        let s = z.norm_sqr();
        self.phase_rate(s) * s
    }

    /// `G(z) = Re(z̄ f(z)) − F(z)`.
    pub fn virial_density(&self, z: Complex64) -> f64 {
        let s = z.norm_sqr();
        match *self {
            Nonlinearity::Power { p, lambda } => lambda * p / (p + 2.0) * s.powf(0.5 * p + 1.0),
            Nonlinearity::Exponential { kappa0, lambda } => lambda / kappa0 * virial_series(kappa0 * s),
            Nonlinearity::Free => 0.0,
        }
    }

    /// `f(q)` and `f'(q)` for real q, used by the profile ODE.
    pub fn force_real(&self, q: f64) -> (f64, f64) {
        match *self {
            Nonlinearity::Power { p, lambda } => {
                let a = q.abs().powf(p);
                (lambda * a * q, lambda * (p + 1.0) * a)
            }
            Nonlinearity::Exponential { kappa0, lambda } => {
                let x = kappa0 * q * q;
                let e2 = exp_tail2(x);
                (lambda * e2 * q, lambda * (e2 + 2.0 * x * x.exp_m1()))
            }
            Nonlinearity::Free => (0.0, 0.0),
        }
    }

    /// `∫|f(u)| dx`.
    pub fn force_l1(&self, u: &RadialField) -> f64 {
        let vals: Vec<f64> = u.values().iter().map(|&z| self.force(z).norm()).collect();
        u.grid().integrate_slice(&vals)
    }

    /// Exact flow of `i ∂_t u = f(u)` over `dt`: `u ↦ e^{−iλ g(|u|²) dt} u`.
    pub fn phase_step(&self, u: &RadialField, dt: f64) -> RadialField {
        u.with_values(
            u.values()
                .iter()
                .map(|&z| z * Complex64::from_polar(1.0, -self.phase_rate(z.norm_sqr()) * dt))
                .collect(),
        )
    }
}

/// Sum `Σ_{k≥k0} c_k x^k / k!` until the next term drops below 1e-16 of the sum.
fn series(x: f64, k0: u32, coeff: impl Fn(u32) -> f64) -> f64 {
    let mut pow_fact = 1.0; // x^k / k!
    for k in 1..=k0 {
        pow_fact *= x / k as f64;
    }
    let mut sum = 0.0;
    let mut k = k0;
    loop {
        let term = coeff(k) * pow_fact;
        sum += term;
        k += 1;
        pow_fact *= x / k as f64;
        let next = coeff(k) * pow_fact;
        if next.abs() < 1e-16 * sum.abs() || pow_fact == 0.0 || k > 200 {
            break;
        }
    }
    sum
}

/// `e^x − 1 − x`.
pub fn exp_tail2(x: f64) -> f64 {
    if x < FORCE_SERIES_SWITCH {
        series(x, 2, |_| 1.0)
    } else {
        x.exp_m1() - x
    }
}

/// `e^x − 1 − x − x²/2`.
pub fn exp_tail3(x: f64) -> f64 {
    if x < POTENTIAL_SERIES_SWITCH {
        series(x, 3, |_| 1.0)
    } else {
        x.exp_m1() - x - 0.5 * x * x
    }
}

/// `e^x (x − 1) + 1 − x²/2 = Σ_{j≥3} (j − 1) x^j / j!`.
pub fn virial_series(x: f64) -> f64 {
    if x < POTENTIAL_SERIES_SWITCH {
        series(x, 3, |j| j as f64 - 1.0)
    } else {
        x.exp_m1() * (x - 1.0) + x - 0.5 * x * x
    }
}

/// Closed forms without the series branch, exposed for cross-checks.
pub mod closed_form {
    pub fn exp_tail2(x: f64) -> f64 {
        x.exp_m1() - x
    }
    pub fn exp_tail3(x: f64) -> f64 {
        x.exp_m1() - x - 0.5 * x * x
    }
    pub fn virial(x: f64) -> f64 {
        x.exp_m1() * (x - 1.0) + x - 0.5 * x * x
    }
}

/// Series branch alone, exposed for cross-checks.
pub mod series_form {
    pub fn exp_tail2(x: f64) -> f64 {
        super::series(x, 2, |_| 1.0)
    }
    pub fn exp_tail3(x: f64) -> f64 {
        super::series(x, 3, |_| 1.0)
    }
    pub fn virial(x: f64) -> f64 {
        super::series(x, 3, |j| j as f64 - 1.0)
    }
}
