//! Bessel-function helpers: J0/J1 (libm), positive zeros of J0, and a
//! large-argument K0 used to extend ground-state tails.

use std::f64::consts::PI;

#[inline]
pub fn j0(x: f64) -> f64 {
    libm::j0(x)
}

#[inline]
pub fn j1(x: f64) -> f64 {
    libm::j1(x)
}

/// First `count` positive zeros of J0, in increasing order.
///
/// McMahon's expansion seeds a Newton iteration on `J0' = -J1`.
pub fn j0_zeros(count: usize) -> Vec<f64> {
    (1..=count)
        .map(|m| {
            let beta = (m as f64 - 0.25) * PI;
            let b8 = 8.0 * beta;
            let mut x = beta + 1.0 / b8 - 124.0 / (3.0 * b8.powi(3)) + 120_928.0 / (15.0 * b8.powi(5));
            for _ in 0..8 {
                let dx = j0(x) / j1(x);
                x += dx;
                if dx.abs() <= 4.0 * f64::EPSILON * x {
                    break;
                }
            }
            x
        })
        .collect()
}

/// Modified Bessel K0 for moderately large arguments (x >= 4) via the
/// asymptotic series, truncated at its smallest term.
pub fn k0_large(x: f64) -> f64 {
    k_large(0.0, x)
}

/// Modified Bessel K1, same method as [`k0_large`].
pub fn k1_large(x: f64) -> f64 {
    k_large(4.0, x)
}

/// `K_ν(x)` with `mu = 4ν²`.
fn k_large(mu: f64, x: f64) -> f64 {
    debug_assert!(x >= 4.0);
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..40 {
        let kf = k as f64;
        let next = term * (mu - (2.0 * kf - 1.0).powi(2)) / (8.0 * kf * x);
        if next.abs() >= term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    (PI / (2.0 * x)).sqrt() * (-x).exp() * sum
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_zeros_match_tables() {
        let z = j0_zeros(5);
        let table = [
            2.404_825_557_695_773,
            5.520_078_110_286_311,
            8.653_727_912_911_013,
            11.791_534_439_014_281,
            14.930_917_708_487_787,
        ];
        for (a, b) in z.iter().zip(table) {
            assert!((a - b).abs() < 1e-13, "{a} vs {b}");
        }
    }

    #[test]
    fn large_zeros_are_roots() {
        let z = j0_zeros(2000);
        for w in z.windows(2) {
            assert!(w[1] > w[0]);
        }
        for w in z[10..].windows(2) {
            assert!((w[1] - w[0] - PI).abs() < 1e-3);
        }
        for &x in z.iter().step_by(97) {
            assert!(j0(x).abs() < 1e-14, "J0({x}) = {}", j0(x));
        }
    }

    #[test]
    fn k0_matches_reference() {
        // K0(5) and K0(10) from standard tables; the asymptotic series is
        // only good to about e^{-2x} relative.
        assert!((k0_large(5.0) / 3.691_098_334_042_594e-3 - 1.0).abs() < 1e-4);
        assert!((k0_large(10.0) / 1.778_006_231_616_765e-5 - 1.0).abs() < 1e-8);
        assert!((k1_large(10.0) / 1.864_877_345_382_558e-5 - 1.0).abs() < 1e-8);
    }
}
