//! Moving local barycentric interpolation between grids.
//!
//! Each target point uses the `ORDER` source nodes nearest to it, with the
//! source mirrored to negative r (radial fields are even). The error is
//! `O(h^ORDER · |u^(ORDER)|)` for local spacing h; beyond the source
//! `r_max` the field is taken as zero, consistent with the decay requirement
//! at the truncation radius.

use std::sync::Arc;

use num_complex::Complex64;

use super::field::RadialField;
use super::grid::RadialGrid;

const ORDER: usize = 8;

/// Evaluate `u` at arbitrary radii.
pub fn interpolate_at(u: &RadialField, radii: &[f64]) -> Vec<Complex64> {
    let src = u.grid();
    let r = src.nodes();
    let v = u.values();
    let half = ORDER / 2;
    radii
        .iter()
        .map(|&x| {
            let x = x.abs();
            if x > src.r_max() {
                return Complex64::new(0.0, 0.0);
            }
            let i = r.partition_point(|&ri| ri < x);
            // stencil indices in the mirrored sequence ..., -r1, -r0, r0, r1, ...
            let start = i as isize - half as isize;
            let start = start.min(r.len() as isize - ORDER as isize);
            let pts: Vec<(f64, Complex64)> = (start..start + ORDER as isize)
                .map(|k| {
                    if k >= 0 {
                        (r[k as usize], v[k as usize])
                    } else {
                        let m = (-k - 1) as usize;
                        (-r[m], v[m])
                    }
                })
                .collect();
            barycentric(&pts, x)
        })
        .collect()
}

/// Resample onto another grid.
pub fn resample(u: &RadialField, target: &Arc<RadialGrid>) -> RadialField {
    RadialField::from_parts(Arc::clone(target), interpolate_at(u, target.nodes()))
}

fn barycentric(pts: &[(f64, Complex64)], x: f64) -> Complex64 {
    let mut num = Complex64::new(0.0, 0.0);
    let mut den = 0.0;
    for (j, &(xj, yj)) in pts.iter().enumerate() {
        let d = x - xj;
        if d == 0.0 {
            return yj;
        }
        let mut w = 1.0;
        for (k, &(xk, _)) in pts.iter().enumerate() {
            if k != j {
                w /= xj - xk;
            }
        }
        num += yj * (w / d);
        den += w / d;
    }
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::grid::{make_grid, GridKind};

    #[test]
    fn gauss_bessel_to_uniform_and_back() {
        let gb = make_grid(10.0, 256, GridKind::GaussBessel).unwrap();
        let un = make_grid(10.0, 1000, GridKind::Uniform).unwrap();
        let u = RadialField::gaussian(gb.clone(), 1.0, 1.0).unwrap();
        let w = resample(&u, &un);
        for (&r, z) in un.nodes().iter().zip(w.values()) {
            assert!((z.re - (-r * r).exp()).abs() < 1e-9, "r={r}");
        }
        let back = resample(&w, &gb);
        for (a, b) in back.values().iter().zip(u.values()) {
            assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn reproduces_nodes_and_vanishes_outside() {
        let g = make_grid(4.0, 64, GridKind::Uniform).unwrap();
        let u = RadialField::gaussian(g.clone(), 2.0, 0.3).unwrap();
        let at = interpolate_at(&u, g.nodes());
        assert_eq!(at, u.values());
        assert_eq!(interpolate_at(&u, &[5.0])[0], Complex64::new(0.0, 0.0));
    }
}
