use std::sync::Arc;

use num_complex::Complex64;

use super::grid::{GridKind, RadialGrid};
use crate::error::{Error, Result};

/// Complex samples of a radial function on ℝ² at the nodes of a grid.
#[derive(Debug, Clone)]
pub struct RadialField {
    grid: Arc<RadialGrid>,
    values: Vec<Complex64>,
}

impl RadialField {
    /// Wrap samples, rejecting length mismatches and non-finite values.
    pub fn new(grid: Arc<RadialGrid>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidField(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(j) = values.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::InvalidField(format!(
                "non-finite value at node {j} (r = {})",
                grid.nodes()[j]
            )));
        }
        Ok(RadialField { grid, values })
    }

    pub fn from_real(grid: Arc<RadialGrid>, values: &[f64]) -> Result<Self> {
        Self::new(grid, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn zeros(grid: Arc<RadialGrid>) -> Self {
        let n = grid.len();
        RadialField {
            grid,
            values: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    /// Sample `g(r)` at every node.
    pub fn from_fn(grid: Arc<RadialGrid>, g: impl Fn(f64) -> Complex64) -> Result<Self> {
        let values = grid.nodes().iter().map(|&r| g(r)).collect();
        Self::new(grid, values)
    }

    pub fn from_real_fn(grid: Arc<RadialGrid>, g: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_fn(grid, |r| Complex64::new(g(r), 0.0))
    }

    /// `A e^{-μ r²}`.
    pub fn gaussian(grid: Arc<RadialGrid>, amplitude: f64, mu: f64) -> Result<Self> {
        Self::from_real_fn(grid, |r| amplitude * (-mu * r * r).exp())
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Same grid, new samples. Callers guarantee finiteness.
    pub(crate) fn with_values(&self, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), self.grid.len());
        RadialField {
            grid: Arc::clone(&self.grid),
            values,
        }
    }

    pub(crate) fn from_parts(grid: Arc<RadialGrid>, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        RadialField { grid, values }
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Result<Self> {
        Self::new(Arc::clone(&self.grid), self.values.iter().map(|&z| f(z)).collect())
    }

    pub fn scale(&self, s: f64) -> Self {
        self.with_values(self.values.iter().map(|z| z * s).collect())
    }

    pub fn re(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.re).collect()
    }

    pub fn abs_sq(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// True when every imaginary part is at most `tol` times the sup norm.
    pub fn is_real(&self, tol: f64) -> bool {
        let scale = self.sup_norm().max(f64::MIN_POSITIVE);
        self.values.iter().all(|z| z.im.abs() <= tol * scale)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    /// Value at r = 0: the Hankel series summed at the origin on
    /// Gauss–Bessel grids, even-extension extrapolation on uniform grids.
    pub fn value_at_origin(&self) -> Complex64 {
        match self.grid.kind() {
            GridKind::Uniform => (self.values[0] * 9.0 - self.values[1]) / 8.0,
            GridKind::GaussBessel => {
                let b = self.grid.bessel.as_ref().expect("gauss-bessel grid");
                let c = self.grid.basis().to_modes(&self.values, self.grid.sqrt_weights());
                let scale = 1.0 / (std::f64::consts::PI.sqrt() * self.grid.r_max());
                c.iter().zip(&b.j1_abs).map(|(c, j1)| c * (scale / j1)).sum()
            }
        }
    }

    /// Fraction of `∫|u|²` carried by nodes with `r > frac · r_max`.
    pub fn outer_mass_fraction(&self, frac: f64) -> f64 {
        let w = self.grid.weights();
        let start = self.grid.first_index_at_or_beyond(frac * self.grid.r_max());
        let total: f64 = self.values.iter().zip(w).map(|(z, w)| w * z.norm_sqr()).sum();
        if total == 0.0 {
            return 0.0;
        }
        let outer: f64 = self.values[start..]
            .iter()
            .zip(&w[start..])
            .map(|(z, w)| w * z.norm_sqr())
            .sum();
        outer / total
    }

    pub(crate) fn same_grid(&self, other: &RadialField) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid {
            Ok(())
        } else {
            Err(Error::InvalidField("fields live on different grids".into()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::grid::make_grid;

    #[test]
    fn rejects_nan_and_length_mismatch() {
        let g = make_grid(5.0, 32, GridKind::Uniform).unwrap();
        let mut v = vec![Complex64::new(1.0, 0.0); 32];
        v[3] = Complex64::new(f64::NAN, 0.0);
        assert!(matches!(RadialField::new(g.clone(), v), Err(Error::InvalidField(_))));
        assert!(RadialField::new(g, vec![Complex64::new(0.0, 0.0); 31]).is_err());
    }

    #[test]
    fn origin_value_of_gaussian() {
        for kind in [GridKind::Uniform, GridKind::GaussBessel] {
            let g = make_grid(8.0, 400, kind).unwrap();
            let u = RadialField::gaussian(g, 1.5, 1.0).unwrap();
            let tol = if kind == GridKind::Uniform { 1e-3 } else { 1e-10 };
            assert!((u.value_at_origin().re - 1.5).abs() < tol, "{kind}: {}", u.value_at_origin());
        }
    }

    #[test]
    fn outer_fraction_of_compact_gaussian_is_tiny() {
        let g = make_grid(10.0, 128, GridKind::GaussBessel).unwrap();
        let u = RadialField::gaussian(g, 1.0, 1.0).unwrap();
        assert!(u.outer_mass_fraction(0.9) < 1e-30);
    }
}
