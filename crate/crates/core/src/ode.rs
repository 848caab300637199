//! Adaptive Dormand–Prince 5(4) integrator for small fixed-size systems.

#[derive(Debug, Clone, Copy)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for Dopri5 {
    fn default() -> Self {
        Dopri5 {
            rtol: 1e-10,
            atol: 1e-12,
            h_init: 1e-3,
            h_max: 0.1,
            max_steps: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
    pub accepted: usize,
    pub rejected: usize,
    pub stopped: bool,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// b - b*, the embedded error weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        let mut s = 0.0;
        for (c, k) in terms {
            s += c * k[i];
        }
        out[i] += h * s;
    }
    out
}

impl Dopri5 {
    /// Integrate `y' = f(t, y)` from `t0` towards `t_end` (> t0). After every
    /// accepted step `observe(t, y)` may stop the integration.
    pub fn integrate<const N: usize>(
        &self,
        f: impl Fn(f64, &[f64; N]) -> [f64; N],
        t0: f64,
        y0: [f64; N],
        t_end: f64,
        mut observe: impl FnMut(f64, &[f64; N]) -> Control,
    ) -> Outcome<N> {
        let mut t = t0;
        let mut y = y0;
        let mut h = self.h_init.min(t_end - t0);
        let mut k1 = f(t, &y);
        let (mut accepted, mut rejected) = (0, 0);
        while t < t_end && accepted + rejected < self.max_steps {
            h = h.min(t_end - t).min(self.h_max);
            let k2 = f(t + C2 * h, &axpy(&y, h, &[(A21, &k1)]));
            let k3 = f(t + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]));
            let k4 = f(t + C4 * h, &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
            let k5 = f(t + C5 * h, &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
            let k6 = f(
                t + h,
                &axpy(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
            );
            let y_new = axpy(&y, h, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
            let k7 = f(t + h, &y_new);
            let mut err = 0.0_f64;
            for i in 0..N {
                let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sc = self.atol + self.rtol * y[i].abs().max(y_new[i].abs());
                err = err.max((e / sc).abs());
            }
            if err <= 1.0 {
                t += h;
                y = y_new;
                k1 = k7;
                accepted += 1;
                if observe(t, &y) == Control::Stop {
                    return Outcome {
                        t,
                        y,
                        accepted,
                        rejected,
                        stopped: true,
                    };
                }
            } else {
                rejected += 1;
            }
            let factor = if err == 0.0 {
                5.0
            } else if err.is_finite() {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            } else {
                0.2
            };
            h *= factor;
        }
        Outcome {
            t,
            y,
            accepted,
            rejected,
            stopped: false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator() {
        let s = Dopri5 {
            rtol: 1e-12,
            atol: 1e-14,
            ..Default::default()
        };
        let out = s.integrate(|_, y: &[f64; 2]| [y[1], -y[0]], 0.0, [1.0, 0.0], 10.0, |_, _| Control::Continue);
        assert!((out.t - 10.0).abs() < 1e-12);
        assert!((out.y[0] - 10f64.cos()).abs() < 1e-10);
        assert!((out.y[1] + 10f64.sin()).abs() < 1e-10);
    }

    #[test]
    fn fifth_order_convergence_under_tolerance() {
        let run = |tol: f64| {
            let s = Dopri5 {
                rtol: tol,
                atol: tol,
                ..Default::default()
            };
            let out = s.integrate(|_, y: &[f64; 1]| [-2.0 * y[0]], 0.0, [1.0], 3.0, |_, _| Control::Continue);
            ((out.y[0] - (-6f64).exp()).abs(), out.accepted)
        };
        let (e1, n1) = run(1e-6);
        let (e2, n2) = run(1e-10);
        assert!(e2 < e1 && n2 > n1);
        assert!(e2 < 1e-10);
    }

    #[test]
    fn observer_stops() {
        let s = Dopri5::default();
        let out = s.integrate(|_, _: &[f64; 1]| [1.0], 0.0, [0.0], 10.0, |_, y| {
            if y[0] > 2.0 {
                Control::Stop
            } else {
                Control::Continue
            }
        });
        assert!(out.stopped && out.y[0] > 2.0 && out.t < 3.0);
    }
}
