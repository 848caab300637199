//! Quadrature, differential operators and the Hankel transform pair.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::field::RadialField;
use super::grid::{GridKind, RadialGrid};
use crate::error::{Error, Result};

/// `2π ∫ g r dr` of a real-valued field.
pub fn integrate(g: &RadialField) -> Result<f64> {
    if !g.is_real(1e-12) {
        return Err(Error::InvalidField("integrate expects a real-valued field".into()));
    }
    integrate_values(g.grid(), &g.re())
}

/// `2π ∫ g r dr` of raw node samples.
pub fn integrate_values(grid: &RadialGrid, g: &[f64]) -> Result<f64> {
    if g.len() != grid.len() {
        return Err(Error::InvalidField(format!("{} samples for {} nodes", g.len(), grid.len())));
    }
    if let Some(j) = g.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidField(format!("non-finite sample at node {j}")));
    }
    Ok(grid.integrate_slice(g))
}

/// Radial Laplacian `u'' + u'/r`.
///
/// Spectral on Gauss–Bessel grids. On uniform grids a conservative
/// second-order flux form with zero flux through r = 0 (the even extension)
/// and through `r_max`.
pub fn laplacian(u: &RadialField) -> Result<RadialField> {
    let grid = u.grid();
    let v = u.values();
    let out = match grid.kind() {
        GridKind::GaussBessel => {
            let basis = grid.basis();
            let mut c = basis.to_modes(v, grid.sqrt_weights());
            for (c, k2) in c.iter_mut().zip(basis.k2()) {
                *c *= -k2;
            }
            basis.from_modes(&c, grid.sqrt_weights())
        }
        GridKind::Uniform => fd_laplacian(grid.nodes(), grid.spacing().expect("uniform"), v),
    };
    Ok(u.with_values(out))
}

pub(crate) fn fd_laplacian(r: &[f64], h: f64, v: &[Complex64]) -> Vec<Complex64> {
    let n = v.len();
    (0..n)
        .map(|j| {
            let mut acc = Complex64::new(0.0, 0.0);
            if j + 1 < n {
                acc += (v[j + 1] - v[j]) * (r[j] + 0.5 * h);
            }
            if j > 0 {
                acc -= (v[j] - v[j - 1]) * (r[j] - 0.5 * h);
            }
            acc / (r[j] * h * h)
        })
        .collect()
}

/// `∂_r u` at the nodes.
pub fn gradient(u: &RadialField) -> Result<RadialField> {
    let grid = u.grid();
    let v = u.values();
    let out = match grid.kind() {
        GridKind::GaussBessel => {
            let c = grid.basis().to_modes(v, grid.sqrt_weights());
            grid.derivative_op().expect("gauss-bessel").apply(&c)
        }
        GridKind::Uniform => {
            let h = grid.spacing().expect("uniform");
            let n = v.len();
            (0..n)
                .map(|j| match j {
                    // even extension: u(-h/2) = u(h/2)
                    0 => (v[1] - v[0]) / (2.0 * h),
                    j if j + 1 == n => (v[j - 2] - v[j - 1] * 4.0 + v[j] * 3.0) / (2.0 * h),
                    j => (v[j + 1] - v[j - 1]) / (2.0 * h),
                })
                .collect()
        }
    };
    Ok(u.with_values(out))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct H1Norms {
    /// `∫|u|² dx`
    pub mass_sq: f64,
    /// `∫|∂_r u|² dx`
    pub grad_sq: f64,
}

pub fn h1_norms(u: &RadialField) -> H1Norms {
    H1Norms {
        mass_sq: mass_sq(u),
        grad_sq: grad_sq(u),
    }
}

pub fn mass_sq(u: &RadialField) -> f64 {
    u.grid().integrate_slice(&u.abs_sq())
}

/// `∫|∂_r u|² dx`, the quadratic form of `-Δ` on the grid.
///
/// Gauss–Bessel: `Σ k_m² |c_m|²`. Uniform: face differences, so that
/// `⟨-Δu, u⟩ = grad_sq` holds exactly for the flux-form Laplacian.
pub fn grad_sq(u: &RadialField) -> f64 {
    let grid = u.grid();
    match grid.kind() {
        GridKind::GaussBessel => {
            let basis = grid.basis();
            basis.dirichlet_energy(&basis.to_modes(u.values(), grid.sqrt_weights()))
        }
        GridKind::Uniform => {
            let h = grid.spacing().expect("uniform");
            let r = grid.nodes();
            u.values()
                .windows(2)
                .zip(r)
                .map(|(w, &rj)| 2.0 * PI * (rj + 0.5 * h) * (w[1] - w[0]).norm_sqr() / h)
                .sum()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    Forward,
    Inverse,
}

/// Order-zero Hankel pair with the 2D Fourier normalisation:
/// forward `û(k) = 2π ∫ u(r) J0(kr) r dr`, inverse `u(r) = (1/2π) ∫ û(k) J0(kr) k dk`.
///
/// The forward image lives on [`RadialGrid::dual`] (nodes at the Hankel
/// wavenumbers); the inverse maps back from that grid.
pub fn hankel_transform(u: &RadialField, direction: Direction) -> Result<RadialField> {
    let grid = u.grid();
    grid.require_bessel("hankel transform")?;
    let dual: Arc<RadialGrid> = grid.dual()?;
    let c = grid.basis().to_modes(u.values(), grid.sqrt_weights());
    let scale = match direction {
        Direction::Forward => 2.0 * PI,
        Direction::Inverse => 1.0 / (2.0 * PI),
    };
    let out = c
        .iter()
        .zip(dual.sqrt_weights())
        .map(|(c, s)| c * (scale / s))
        .collect();
    Ok(RadialField::from_parts(dual, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::bessel;
    use crate::radial::grid::make_grid;

    fn gauss(kind: GridKind, r_max: f64, n: usize, mu: f64) -> RadialField {
        RadialField::gaussian(make_grid(r_max, n, kind).unwrap(), 1.0, mu).unwrap()
    }

    #[test]
    fn integrate_closed_forms() {
        let g = make_grid(1.0, 1000, GridKind::Uniform).unwrap();
        let one = RadialField::from_real_fn(g, |_| 1.0).unwrap();
        assert!((integrate(&one).unwrap() - PI).abs() < 1e-10);
        for kind in [GridKind::Uniform, GridKind::GaussBessel] {
            let a = integrate(&gauss(kind, 10.0, 2000, 2.0)).unwrap();
            let b = integrate(&gauss(kind, 10.0, 2000, 6.0)).unwrap();
            let tol = if kind == GridKind::Uniform { 1e-5 } else { 1e-12 };
            assert!((a - PI / 2.0).abs() < tol);
            assert!((b - PI / 6.0).abs() < tol);
        }
    }

    #[test]
    fn integrate_rejects_nan_samples() {
        let g = make_grid(1.0, 32, GridKind::Uniform).unwrap();
        let mut v = vec![1.0; 32];
        v[5] = f64::NAN;
        assert!(matches!(integrate_values(&g, &v), Err(Error::InvalidField(_))));
    }

    #[test]
    fn laplacian_of_gaussian() {
        for (kind, n, tol) in [(GridKind::GaussBessel, 256, 1e-9), (GridKind::Uniform, 4000, 1e-4)] {
            let u = gauss(kind, 10.0, n, 1.0);
            let lap = laplacian(&u).unwrap();
            for (&r, z) in u.grid().nodes().iter().zip(lap.values()) {
                let exact = (4.0 * r * r - 4.0) * (-r * r).exp();
                assert!((z.re - exact).abs() < tol, "{kind} r={r}: {} vs {exact}", z.re);
            }
            // regular limit at the origin
            assert!((lap.value_at_origin().re + 4.0).abs() < 1e-3);
        }
    }

    #[test]
    fn laplacian_of_constant_vanishes_on_uniform_grid() {
        let g = make_grid(3.0, 64, GridKind::Uniform).unwrap();
        let u = RadialField::from_real_fn(g, |_| 2.5).unwrap();
        assert!(laplacian(&u).unwrap().sup_norm() < 1e-10);
    }

    #[test]
    fn bessel_eigenfunction() {
        // Gauss–Bessel: J0(k_m r) is an exact mode.
        let g = make_grid(20.0, 128, GridKind::GaussBessel).unwrap();
        let k = g.wavenumbers().unwrap()[6];
        let u = RadialField::from_real_fn(g, |r| bessel::j0(k * r)).unwrap();
        let lap = laplacian(&u).unwrap();
        let err = lap
            .values()
            .iter()
            .zip(u.values())
            .fold(0.0_f64, |m, (a, b)| m.max((a.re + k * k * b.re).abs()));
        assert!(err < 1e-8 * k * k, "gauss-bessel err {err}");
        // uniform: pick k with J0'(k r_max) = 0 so the Neumann boundary is natural
        let r_max = 20.0;
        let k = bessel::j0_zeros(8).iter().map(|z| z / r_max).nth(4).unwrap();
        let k = {
            // zero of J1 between consecutive zeros of J0 via bisection
            let (mut lo, mut hi) = (k, k + PI / r_max);
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if bessel::j1(lo * r_max) * bessel::j1(mid * r_max) <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        };
        let g = make_grid(r_max, 4000, GridKind::Uniform).unwrap();
        let u = RadialField::from_real_fn(g, |r| bessel::j0(k * r)).unwrap();
        let lap = laplacian(&u).unwrap();
        let err = lap
            .values()
            .iter()
            .zip(u.values())
            .fold(0.0_f64, |m, (a, b)| m.max((a.re + k * k * b.re).abs()));
        assert!(err < 1e-3 * k * k, "err {err}");
    }

    #[test]
    fn h1_norms_of_gaussians() {
        for kind in [GridKind::GaussBessel, GridKind::Uniform] {
            let n = if kind == GridKind::Uniform { 4000 } else { 256 };
            let tol = if kind == GridKind::Uniform { 1e-5 } else { 1e-11 };
            let u = gauss(kind, 10.0, n, 1.0);
            let h = h1_norms(&u);
            assert!((h.mass_sq - PI / 2.0).abs() < tol);
            assert!((h.grad_sq - PI).abs() < tol, "{kind}: {}", h.grad_sq);
            let h2 = h1_norms(&u.scale(2.0));
            assert!((h2.mass_sq - 2.0 * PI).abs() < 4.0 * tol);
            assert!((h2.grad_sq - 4.0 * PI).abs() < 4.0 * tol);
            let z = h1_norms(&RadialField::zeros(u.grid().clone()));
            assert_eq!((z.mass_sq, z.grad_sq), (0.0, 0.0));
        }
    }

    #[test]
    fn integration_by_parts() {
        for (kind, n) in [(GridKind::GaussBessel, 256), (GridKind::Uniform, 20000)] {
            let g = make_grid(12.0, n, kind).unwrap();
            let u = RadialField::from_fn(g.clone(), |r| Complex64::new(1.0, 0.5 * r) * (-r * r).exp()).unwrap();
            let v = RadialField::from_real_fn(g.clone(), |r| (1.0 + r * r) * (-0.5 * r * r).exp()).unwrap();
            let lap = laplacian(&u).unwrap();
            let lhs: Complex64 = lap
                .values()
                .iter()
                .zip(v.values())
                .zip(g.weights())
                .map(|((a, b), w)| a * b.conj() * w)
                .sum();
            let du = gradient(&u).unwrap();
            let dv = gradient(&v).unwrap();
            let rhs: Complex64 = du
                .values()
                .iter()
                .zip(dv.values())
                .zip(g.weights())
                .map(|((a, b), w)| -a * b.conj() * w)
                .sum();
            assert!((lhs - rhs).norm() < 1e-6 * rhs.norm().max(1e-3) + 1e-4 / n as f64, "{kind}: {lhs} {rhs}");
        }
    }

    #[test]
    fn gradient_matches_closed_form() {
        let u = gauss(GridKind::GaussBessel, 10.0, 256, 1.0);
        let du = gradient(&u).unwrap();
        for (&r, z) in u.grid().nodes().iter().zip(du.values()) {
            assert!((z.re + 2.0 * r * (-r * r).exp()).abs() < 1e-10);
        }
    }

    #[test]
    fn hankel_round_trip_and_self_transform() {
        let u = gauss(GridKind::GaussBessel, 12.0, 256, 1.0);
        let back = hankel_transform(&hankel_transform(&u, Direction::Forward).unwrap(), Direction::Inverse).unwrap();
        assert!(Arc::ptr_eq(back.grid(), u.grid()) || back.grid() == u.grid());
        for (a, b) in back.values().iter().zip(u.values()) {
            assert!((a - b).norm() < 1e-10);
        }
        let half = gauss(GridKind::GaussBessel, 12.0, 256, 0.5);
        let fw = hankel_transform(&half, Direction::Forward).unwrap();
        for (&k, z) in fw.grid().nodes().iter().zip(fw.values()) {
            assert!((z.re - 2.0 * PI * (-0.5 * k * k).exp()).abs() < 1e-9);
        }
        let zero = RadialField::zeros(u.grid().clone());
        assert!(hankel_transform(&zero, Direction::Forward).unwrap().is_zero());
    }

    #[test]
    fn hankel_round_trip_improves_with_n() {
        let mut errs = Vec::new();
        for n in [32, 64, 128] {
            let u = gauss(GridKind::GaussBessel, 8.0, n, 1.0);
            let back =
                hankel_transform(&hankel_transform(&u, Direction::Forward).unwrap(), Direction::Inverse).unwrap();
            let e = back.values().iter().zip(u.values()).fold(0.0_f64, |m, (a, b)| m.max((a - b).norm()));
            errs.push(e);
        }
        assert!(errs.iter().all(|&e| e < 1e-12), "{errs:?}");
    }

    #[test]
    fn hankel_requires_gauss_bessel() {
        let u = gauss(GridKind::Uniform, 5.0, 64, 1.0);
        assert!(matches!(hankel_transform(&u, Direction::Forward), Err(Error::UnsupportedGrid(_))));
    }

    #[test]
    fn quadrature_convergence_orders() {
        // ∫_{r<1} (1 + r²) dx = π + π/2, integrand with a kink at r=1 on a larger domain
        let exact = 1.5 * PI;
        let err = |n: usize| {
            let g = make_grid(1.0, n, GridKind::Uniform).unwrap();
            (integrate(&RadialField::from_real_fn(g, |r| 1.0 + r * r).unwrap()).unwrap() - exact).abs()
        };
        let (e1, e2) = (err(200), err(400));
        assert!(e1 / e2 > 3.5, "{e1} {e2}");
        assert!(err(4000) < 1e-8 * exact * 10.0);
    }
}
