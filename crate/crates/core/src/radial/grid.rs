use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use super::basis::{DerivativeOp, ModalBasis};
use super::bessel;
use crate::error::{Error, Result};

pub const MIN_NODES: usize = 16;

/// Node placement / quadrature rule of a [`RadialGrid`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridKind {
    /// Cell-centred nodes `(j + 1/2) h` with the midpoint rule.
    Uniform,
    /// Scaled zeros of J0 with the discrete-Hankel quadrature weights.
    GaussBessel,
}

impl fmt::Display for GridKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GridKind::Uniform => "uniform",
            GridKind::GaussBessel => "gauss-bessel",
        })
    }
}

/// Serializable grid description.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub kind: GridKind,
    pub r_max: f64,
    pub n: usize,
}

impl GridSpec {
    pub fn new(kind: GridKind, r_max: f64, n: usize) -> Self {
        GridSpec { kind, r_max, n }
    }

    pub fn build(&self) -> Result<Arc<RadialGrid>> {
        make_grid(self.r_max, self.n, self.kind)
    }
}

/// Bessel-zero data attached to a Gauss–Bessel grid.
#[derive(Debug, Clone)]
pub(crate) struct BesselNodes {
    /// j_{0,1..n}
    pub zeros: Vec<f64>,
    /// j_{0,n+1}
    pub s: f64,
    /// |J1(j_{0,m})|
    pub j1_abs: Vec<f64>,
}

/// Radial grid on `(0, r_max]` with weights approximating `2π ∫ g(r) r dr`.
///
/// Grids are immutable and shared behind `Arc`; the dense spectral matrices
/// are built lazily on first use.
pub struct RadialGrid {
    kind: GridKind,
    r_max: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    sqrt_weights: Vec<f64>,
    pub(crate) bessel: Option<BesselNodes>,
    basis: OnceLock<ModalBasis>,
    derivative: OnceLock<DerivativeOp>,
}

impl fmt::Debug for RadialGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialGrid")
            .field("kind", &self.kind)
            .field("r_max", &self.r_max)
            .field("n", &self.nodes.len())
            .finish()
    }
}

impl PartialEq for RadialGrid {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.r_max == other.r_max && self.nodes.len() == other.nodes.len()
    }
}

/// Build a grid. `r_max > 0` and `n >= 16` are required.
pub fn make_grid(r_max: f64, n: usize, kind: GridKind) -> Result<Arc<RadialGrid>> {
    RadialGrid::new(r_max, n, kind).map(Arc::new)
}

impl RadialGrid {
    pub fn new(r_max: f64, n: usize, kind: GridKind) -> Result<Self> {
        if !(r_max.is_finite() && r_max > 0.0) {
            return Err(Error::invalid(format!("r_max must be positive, got {r_max}")));
        }
        if n < MIN_NODES {
            return Err(Error::invalid(format!("grid needs at least {MIN_NODES} nodes, got {n}")));
        }
        let (nodes, weights, bessel) = match kind {
            GridKind::Uniform => {
                let h = r_max / n as f64;
                let nodes: Vec<f64> = (0..n).map(|j| (j as f64 + 0.5) * h).collect();
                let weights: Vec<f64> = nodes.iter().map(|r| 2.0 * PI * r * h).collect();
                (nodes, weights, None)
            }
            GridKind::GaussBessel => {
                let mut zeros = bessel::j0_zeros(n + 1);
                let s = zeros.pop().expect("n + 1 zeros");
                let j1_abs: Vec<f64> = zeros.iter().map(|&z| bessel::j1(z).abs()).collect();
                let nodes = zeros.iter().map(|z| z * r_max / s).collect();
                let weights = j1_abs
                    .iter()
                    .map(|j1| 4.0 * PI * r_max * r_max / (s * s * j1 * j1))
                    .collect();
                (nodes, weights, Some(BesselNodes { zeros, s, j1_abs }))
            }
        };
        let sqrt_weights = weights.iter().map(|w: &f64| w.sqrt()).collect();
        Ok(RadialGrid {
            kind,
            r_max,
            nodes,
            weights,
            sqrt_weights,
            bessel,
            basis: OnceLock::new(),
            derivative: OnceLock::new(),
        })
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec::new(self.kind, self.r_max, self.len())
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn sqrt_weights(&self) -> &[f64] {
        &self.sqrt_weights
    }

    /// Uniform spacing (uniform grids only).
    pub fn spacing(&self) -> Option<f64> {
        match self.kind {
            GridKind::Uniform => Some(self.r_max / self.len() as f64),
            GridKind::GaussBessel => None,
        }
    }

    /// Wavenumbers `k_m = j_{0,m} / r_max` of the Hankel modes.
    pub fn wavenumbers(&self) -> Option<Vec<f64>> {
        self.bessel
            .as_ref()
            .map(|b| b.zeros.iter().map(|z| z / self.r_max).collect())
    }

    /// The grid on which forward Hankel transforms live: Gauss–Bessel with
    /// `r_max' = j_{0,n+1} / r_max`, whose nodes are exactly the `k_m`.
    pub fn dual(&self) -> Result<Arc<RadialGrid>> {
        let b = self.require_bessel("dual grid")?;
        make_grid(b.s / self.r_max, self.len(), GridKind::GaussBessel)
    }

    /// `Σ w_j g_j ≈ 2π ∫ g r dr`.
    pub fn integrate_slice(&self, g: &[f64]) -> f64 {
        debug_assert_eq!(g.len(), self.len());
        self.weights.iter().zip(g).map(|(w, v)| w * v).sum()
    }

    /// Integrate a closure sampled at the nodes.
    pub fn integrate_fn(&self, g: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&r, w)| w * g(r)).sum()
    }

    pub(crate) fn require_bessel(&self, what: &str) -> Result<&BesselNodes> {
        self.bessel
            .as_ref()
            .ok_or_else(|| Error::UnsupportedGrid(format!("{what} requires a gauss-bessel grid")))
    }

    /// Orthonormal modal basis diagonalising the discrete radial Laplacian
    /// (Hankel on Gauss–Bessel grids, finite-difference eigenbasis on uniform).
    pub fn basis(&self) -> &ModalBasis {
        self.basis.get_or_init(|| match &self.bessel {
            Some(b) => ModalBasis::hankel(b, self.r_max),
            None => ModalBasis::finite_difference(&self.nodes, self.r_max / self.len() as f64),
        })
    }

    pub(crate) fn derivative_op(&self) -> Option<&DerivativeOp> {
        let b = self.bessel.as_ref()?;
        Some(self.derivative.get_or_init(|| DerivativeOp::hankel(b, self.r_max)))
    }

    /// Index of the first node with `r >= r_cut`.
    pub fn first_index_at_or_beyond(&self, r_cut: f64) -> usize {
        self.nodes.partition_point(|&r| r < r_cut)
    }
}
