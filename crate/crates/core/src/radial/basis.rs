//! Dense orthonormal modal bases for the discrete radial Laplacian.
//!
//! In coordinates `v_j = sqrt(w_j) u_j` the quadrature inner product is the
//! Euclidean one, so each basis is stored as an orthogonal matrix acting on
//! `v`. Mode `m` has Laplacian eigenvalue `-k2[m]`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::bessel;
use super::grid::BesselNodes;

#[derive(Debug, Clone)]
pub struct ModalBasis {
    n: usize,
    /// Row-major; row m is mode m.
    forward: Vec<f64>,
    /// Row-major inverse; `None` when the forward matrix is its own inverse.
    inverse: Option<Vec<f64>>,
    k2: Vec<f64>,
    orthogonality_defect: f64,
}

impl ModalBasis {
    /// Discrete Hankel transform matrix
    /// `T_mj = 2 J0(j_m j_j / S) / (S |J1(j_m)| |J1(j_j)|)`,
    /// polished to exact orthogonality by Newton–Schulz iteration.
    pub(crate) fn hankel(b: &BesselNodes, r_max: f64) -> Self {
        let n = b.zeros.len();
        let mut t = DMatrix::<f64>::zeros(n, n);
        for m in 0..n {
            for j in m..n {
                let v = 2.0 * bessel::j0(b.zeros[m] * b.zeros[j] / b.s) / (b.s * b.j1_abs[m] * b.j1_abs[j]);
                t[(m, j)] = v;
                t[(j, m)] = v;
            }
        }
        let eye = DMatrix::<f64>::identity(n, n);
        let mut defect = max_abs(&(&t * &t - &eye));
        // T is symmetric, so X <- X (3I - X^2) / 2 keeps it symmetric and
        // converges quadratically to the orthogonal polar factor.
        for _ in 0..4 {
            if defect < 1e-14 {
                break;
            }
            let t2 = &t * &t;
            t = (&t * 1.5) - (&t * &t2) * 0.5;
            t = (&t + t.transpose()) * 0.5;
            defect = max_abs(&(&t * &t - &eye));
        }
        let k2 = b.zeros.iter().map(|z| (z / r_max).powi(2)).collect();
        ModalBasis {
            n,
            forward: row_major(&t),
            inverse: None,
            k2,
            orthogonality_defect: defect,
        }
    }

    /// Eigenbasis of the symmetrised cell-centred finite-difference
    /// Laplacian (zero flux at the origin and at `r_max`).
    pub(crate) fn finite_difference(nodes: &[f64], h: f64) -> Self {
        let n = nodes.len();
        let mut a = DMatrix::<f64>::zeros(n, n);
        for j in 0..n {
            let r = nodes[j];
            let r_in = r - 0.5 * h;
            let r_out = if j + 1 < n { r + 0.5 * h } else { 0.0 };
            a[(j, j)] = -(r_in + r_out) / (r * h * h);
            if j + 1 < n {
                let off = (r + 0.5 * h) / (h * h * (r * nodes[j + 1]).sqrt());
                a[(j, j + 1)] = off;
                a[(j + 1, j)] = off;
            }
        }
        let eig = SymmetricEigen::new(a);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&x, &y| eig.eigenvalues[y].total_cmp(&eig.eigenvalues[x]));
        let mut forward = vec![0.0; n * n];
        let mut inverse = vec![0.0; n * n];
        let mut k2 = Vec::with_capacity(n);
        for (m, &col) in order.iter().enumerate() {
            k2.push((-eig.eigenvalues[col]).max(0.0));
            for j in 0..n {
                let v = eig.eigenvectors[(j, col)];
                forward[m * n + j] = v;
                inverse[j * n + m] = v;
            }
        }
        let v = DMatrix::from_row_slice(n, n, &forward);
        let defect = max_abs(&(&v * v.transpose() - DMatrix::<f64>::identity(n, n)));
        ModalBasis {
            n,
            forward,
            inverse: Some(inverse),
            k2,
            orthogonality_defect: defect,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Squared wavenumbers (negated Laplacian eigenvalues), one per mode.
    pub fn k2(&self) -> &[f64] {
        &self.k2
    }

    /// `max |Q Qᵀ - I|` after construction.
    pub fn orthogonality_defect(&self) -> f64 {
        self.orthogonality_defect
    }

    /// Modal coefficients of nodal values `u` (grid weights `sqrt_w`).
    pub fn to_modes(&self, u: &[Complex64], sqrt_w: &[f64]) -> Vec<Complex64> {
        let v: Vec<Complex64> = u.iter().zip(sqrt_w).map(|(z, s)| z * s).collect();
        let mut out = vec![Complex64::new(0.0, 0.0); self.n];
        matvec(&self.forward, self.n, &v, &mut out);
        out
    }

    /// Nodal values from modal coefficients.
    pub fn from_modes(&self, c: &[Complex64], sqrt_w: &[f64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.n];
        matvec(self.inverse.as_deref().unwrap_or(&self.forward), self.n, c, &mut out);
        for (z, s) in out.iter_mut().zip(sqrt_w) {
            *z /= s;
        }
        out
    }

    /// `Σ k² |c|²`, the Dirichlet energy of a modal vector.
    pub fn dirichlet_energy(&self, c: &[Complex64]) -> f64 {
        c.iter().zip(&self.k2).map(|(z, k2)| k2 * z.norm_sqr()).sum()
    }
}

/// Spectral radial derivative on a Gauss–Bessel grid: `∂_r u = D c` with
/// `c` the modal coefficients.
#[derive(Debug, Clone)]
pub struct DerivativeOp {
    n: usize,
    matrix: Vec<f64>,
}

impl DerivativeOp {
    pub(crate) fn hankel(b: &BesselNodes, r_max: f64) -> Self {
        let n = b.zeros.len();
        let scale = 1.0 / (PI.sqrt() * r_max);
        let mut matrix = vec![0.0; n * n];
        for j in 0..n {
            for m in 0..n {
                let k = b.zeros[m] / r_max;
                matrix[j * n + m] = -bessel::j1(b.zeros[j] * b.zeros[m] / b.s) * k * scale / b.j1_abs[m];
            }
        }
        DerivativeOp { n, matrix }
    }

    pub fn apply(&self, c: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.n];
        matvec(&self.matrix, self.n, c, &mut out);
        out
    }
}

fn matvec(a: &[f64], n: usize, x: &[Complex64], out: &mut [Complex64]) {
    debug_assert_eq!(a.len(), n * n);
    let xr: Vec<f64> = x.iter().map(|z| z.re).collect();
    let xi: Vec<f64> = x.iter().map(|z| z.im).collect();
    for (row, o) in a.chunks_exact(n).zip(out.iter_mut()) {
        let mut sr = 0.0;
        let mut si = 0.0;
        for ((a, r), i) in row.iter().zip(&xr).zip(&xi) {
            sr += a * r;
            si += a * i;
        }
        *o = Complex64::new(sr, si);
    }
}

fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    let (r, c) = m.shape();
    let mut out = Vec::with_capacity(r * c);
    for i in 0..r {
        for j in 0..c {
            out.push(m[(i, j)]);
        }
    }
    out
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}
