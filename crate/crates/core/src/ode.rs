//! Adaptive Dormand-Prince 5(4) integrator for small autonomous-size systems.

/// Step-size control settings.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rtol: 1e-9,
            atol: 1e-300,
            max_steps: 1_000_000,
        }
    }
}

/// Why an integration stopped early.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Halt {
    /// The user predicate rejected a state at `t`.
    Rejected { t: f64 },
    /// Step size underflow or step budget exhausted at `t`.
    StepFailure { t: f64 },
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
// Differences between the fifth- and fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

/// Integrates `y' = f(t, y)` from `t0` through each of the increasing `outputs`,
/// returning the state at every output time.
///
/// `accept` is called on every accepted state; returning `false` stops the run.
pub fn integrate<const N: usize>(
    f: impl Fn(f64, &[f64; N]) -> [f64; N],
    t0: f64,
    y0: [f64; N],
    outputs: &[f64],
    tol: Tolerances,
    accept: impl Fn(&[f64; N]) -> bool,
) -> Result<Vec<[f64; N]>, Halt> {
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    let mut out = Vec::with_capacity(outputs.len());
    let span = outputs.last().map_or(0.0, |&e| e - t0).abs();
    let mut h = (span * 1e-3).max(1e-12);
    let mut steps = 0usize;

    for &target in outputs {
        while t < target {
            if steps >= tol.max_steps {
                return Err(Halt::StepFailure { t });
            }
            steps += 1;
            let last = t + h >= target;
            let hs = if last { target - t } else { h };

            let k2 = f(t + C2 * hs, &axpy(&y, hs, &[(A21, &k1)]));
            let k3 = f(t + C3 * hs, &axpy(&y, hs, &[(A31, &k1), (A32, &k2)]));
            let k4 = f(t + C4 * hs, &axpy(&y, hs, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
            let k5 = f(
                t + C5 * hs,
                &axpy(&y, hs, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            );
            let k6 = f(
                t + hs,
                &axpy(&y, hs, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
            );
            let y_new = axpy(&y, hs, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
            let k7 = f(t + hs, &y_new);

            let mut err = 0.0f64;
            for i in 0..N {
                let e = hs * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sc = tol.atol + tol.rtol * y[i].abs().max(y_new[i].abs());
                err = err.max((e / sc).abs());
            }
            if !err.is_finite() {
                h = hs * 0.1;
                if h < 1e-14 * (1.0 + t.abs()) {
                    return Err(Halt::StepFailure { t });
                }
                continue;
            }
            if err <= 1.0 {
                t = if last { target } else { t + hs };
                y = y_new;
                k1 = k7;
                if !accept(&y) {
                    return Err(Halt::Rejected { t });
                }
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            // Keep the pre-clip step when the last step was shortened to hit a target.
            h = if last && err <= 1.0 {
                h.max(hs * factor)
            } else {
                hs * factor
            };
            if h < 1e-14 * (1.0 + t.abs()) {
                return Err(Halt::StepFailure { t });
            }
        }
        out.push(y);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator() {
        let ts: Vec<f64> = (1..=20).map(|i| i as f64 * 0.5).collect();
        let ys = integrate(
            |_, y: &[f64; 2]| [y[1], -y[0]],
            0.0,
            [0.0, 1.0],
            &ts,
            Tolerances::default(),
            |_| true,
        )
        .unwrap();
        for (t, y) in ts.iter().zip(&ys) {
            assert!((y[0] - t.sin()).abs() < 1e-8);
            assert!((y[1] - t.cos()).abs() < 1e-8);
        }
    }

    #[test]
    fn exponential_growth_relative_accuracy() {
        let ts = [5.0, 10.0];
        let ys = integrate(
            |_, y: &[f64; 1]| [3.0 * y[0]],
            0.0,
            [1e-12],
            &ts,
            Tolerances::default(),
            |_| true,
        )
        .unwrap();
        assert!((ys[1][0] / (1e-12 * 30f64.exp()) - 1.0).abs() < 1e-7);
    }

    #[test]
    fn rejection_stops_run() {
        let r = integrate(
            |_, y: &[f64; 1]| [y[0]],
            0.0,
            [1.0],
            &[10.0],
            Tolerances::default(),
            |y| y[0] < 100.0,
        );
        assert!(matches!(r, Err(Halt::Rejected { .. })));
    }
}
