//! Conserved quantities and variational functionals on radial fields.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nonlinearity::Nonlinearity;
use crate::radial::ops::{grad_sq, mass_sq};
use crate::radial::RadialField;

/// Exponents of the scaling `u ↦ e^{αλ} u(e^{−βλ} x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingPair {
    pub alpha: f64,
    pub beta: f64,
}

impl ScalingPair {
    /// The pair whose derivative is the virial functional.
    pub const VIRIAL: ScalingPair = ScalingPair { alpha: 1.0, beta: -1.0 };

    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        let pair = ScalingPair { alpha, beta };
        pair.check()?;
        Ok(pair)
    }

    /// `α ≥ 0`, `α + β ≥ 0`, not both zero.
    pub fn is_admissible(&self) -> bool {
        self.alpha.is_finite()
            && self.beta.is_finite()
            && self.alpha >= 0.0
            && self.alpha + self.beta >= 0.0
            && (self.alpha, self.beta) != (0.0, 0.0)
    }

    pub fn check(&self) -> Result<()> {
        if self.is_admissible() {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "scaling pair ({}, {}) is not admissible: need alpha >= 0, alpha + beta >= 0, not both zero",
                self.alpha, self.beta
            )))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Equation {
    Nls,
    Nlkg,
}

impl fmt::Display for Equation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Equation::Nls => "nls",
            Equation::Nlkg => "nlkg",
        })
    }
}

/// Dynamical state: `u` for NLS, `(u, u_t)` for NLKG.
#[derive(Debug, Clone)]
pub struct EvolutionState {
    pub u: RadialField,
    pub u_t: Option<RadialField>,
    pub t: f64,
}

impl EvolutionState {
    pub fn nls(u: RadialField, t: f64) -> Self {
        EvolutionState { u, u_t: None, t }
    }

    pub fn nlkg(u: RadialField, u_t: RadialField, t: f64) -> Result<Self> {
        u.same_grid(&u_t)?;
        Ok(EvolutionState { u, u_t: Some(u_t), t })
    }

    pub fn equation(&self) -> Equation {
        if self.u_t.is_some() {
            Equation::Nlkg
        } else {
            Equation::Nls
        }
    }
}

/// Flat summary of a state, serialised with snake_case keys.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionalReport {
    pub mass: f64,
    pub energy: f64,
    pub j: f64,
    pub k_virial: f64,
    pub grad_sq: f64,
    pub g_integral: f64,
}

fn check_c(c: f64) -> Result<()> {
    if c.is_finite() && c >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("mass coefficient c must be >= 0, got {c}")))
    }
}

fn integrate_pointwise(u: &RadialField, g: impl Fn(num_complex::Complex64) -> f64) -> f64 {
    let vals: Vec<f64> = u.values().iter().map(|&z| g(z)).collect();
    u.grid().integrate_slice(&vals)
}

/// `∫F(u) dx`.
pub fn potential_integral(u: &RadialField, nl: &Nonlinearity) -> f64 {
    integrate_pointwise(u, |z| nl.potential(z))
}

/// `∫Re(ū f(u)) dx`.
pub fn pairing_integral(u: &RadialField, nl: &Nonlinearity) -> f64 {
    integrate_pointwise(u, |z| nl.pairing(z))
}

/// `∫G(u) dx`.
pub fn virial_integral(u: &RadialField, nl: &Nonlinearity) -> f64 {
    integrate_pointwise(u, |z| nl.virial_density(z))
}

/// `∫|G(u)| dx`.
pub fn abs_virial_integral(u: &RadialField, nl: &Nonlinearity) -> f64 {
    integrate_pointwise(u, |z| nl.virial_density(z).abs())
}

/// `∫|u|² dx`.
pub fn mass(state: &EvolutionState) -> f64 {
    mass_sq(&state.u)
}

/// Hamiltonian of the state's equation:
/// NLS `½‖∇u‖² − ½∫F`, NLKG additionally `+ ½‖u‖² + ½‖u_t‖²`.
pub fn energy(state: &EvolutionState, nl: &Nonlinearity) -> Result<f64> {
    nl.check_field(&state.u)?;
    let base = 0.5 * grad_sq(&state.u) - 0.5 * potential_integral(&state.u, nl);
    Ok(match &state.u_t {
        None => base,
        Some(v) => base + 0.5 * mass_sq(&state.u) + 0.5 * mass_sq(v),
    })
}

/// `½‖∇u‖² + (c/2)‖u‖² − ½∫F(u)`.
pub fn static_energy(u: &RadialField, c: f64, nl: &Nonlinearity) -> Result<f64> {
    check_c(c)?;
    nl.check_field(u)?;
    Ok(0.5 * grad_sq(u) + 0.5 * c * mass_sq(u) - 0.5 * potential_integral(u, nl))
}

/// Derivative at λ = 0 of the static energy along `e^{αλ} u(e^{−βλ} x)`:
/// `α‖∇u‖² + (α+β) c ‖u‖² − ∫(α Re(ū f) + β F)`.
pub fn functional_k(u: &RadialField, pair: ScalingPair, c: f64, nl: &Nonlinearity) -> Result<f64> {
    pair.check()?;
    check_c(c)?;
    nl.check_field(u)?;
    let (a, b) = (pair.alpha, pair.beta);
    let nonlinear: f64 = integrate_pointwise(u, |z| a * nl.pairing(z) + b * nl.potential(z));
    Ok(functional_k_quadratic(u, pair, c)? - nonlinear)
}

/// The quadratic part `α‖∇u‖² + (α+β) c ‖u‖²`.
pub fn functional_k_quadratic(u: &RadialField, pair: ScalingPair, c: f64) -> Result<f64> {
    pair.check()?;
    check_c(c)?;
    let (a, b) = (pair.alpha, pair.beta);
    let mut k = a * grad_sq(u);
    // exact zero for the virial pair, whatever the mass term
    if a + b != 0.0 {
        k += (a + b) * c * mass_sq(u);
    }
    Ok(k)
}

/// `‖∇u‖² − ∫G(u)`.
pub fn virial_k(u: &RadialField, nl: &Nonlinearity) -> f64 {
    grad_sq(u) - virial_integral(u, nl)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergySandwich {
    pub j: f64,
    pub half_h1: f64,
    pub upper: f64,
    pub holds: bool,
}

/// `J(u) ≤ ½‖u‖²_{H¹} ≤ 2 J(u)`. Necessary for membership in the
/// below-threshold set, not sufficient.
pub fn free_energy_sandwich(u: &RadialField, nl: &Nonlinearity) -> Result<EnergySandwich> {
    let j = static_energy(u, 1.0, nl)?;
    let half_h1 = 0.5 * (grad_sq(u) + mass_sq(u));
    let upper = 2.0 * j;
    Ok(EnergySandwich {
        j,
        half_h1,
        upper,
        holds: j <= half_h1 && half_h1 <= upper,
    })
}

pub fn report(state: &EvolutionState, nl: &Nonlinearity) -> Result<FunctionalReport> {
    let u = &state.u;
    let gs = grad_sq(u);
    let g_integral = virial_integral(u, nl);
    let out = FunctionalReport {
        mass: mass(state),
        energy: energy(state, nl)?,
        j: static_energy(u, 1.0, nl)?,
        k_virial: gs - g_integral,
        grad_sq: gs,
        g_integral,
    };
    for v in [out.mass, out.energy, out.j, out.k_virial, out.grad_sq, out.g_integral] {
        if !v.is_finite() {
            return Err(Error::InvalidField("non-finite functional value".into()));
        }
    }
    Ok(out)
}
