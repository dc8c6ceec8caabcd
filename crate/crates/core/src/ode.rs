//! Adaptive Dormand-Prince 5(4) for complex vector ODEs `y' = f(t, y)`.

use nalgebra::ComplexField;

use crate::error::{invalid, Error, Result};
use crate::scalar::{cr, CVector, Scalar};

#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    /// Upper bound on any single step (same time units as the problem).
    pub max_step: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { rtol: 1e-9, atol: 1e-12, max_step: f64::INFINITY }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Stats {
    pub steps: usize,
    pub rejected: usize,
    pub evaluations: usize,
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
// fifth minus fourth order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// `y + h * sum(w_i k_i)`.
fn combo<T: Scalar>(y: &CVector<T>, h: T, terms: &[(f64, &CVector<T>)]) -> CVector<T> {
    let mut out = y.clone();
    for (w, k) in terms {
        out.axpy(cr(h * T::of(*w)), k, cr(T::one()));
    }
    out
}

/// Integrate from `(t0, y0)` and return the state at each of `outputs`
/// (ascending, all `>= t0`). Steps are clipped to land on output times.
pub fn integrate<T, F>(
    mut f: F,
    t0: T,
    y0: CVector<T>,
    outputs: &[T],
    tol: Tolerances,
) -> Result<(Vec<CVector<T>>, Stats)>
where
    T: Scalar,
    F: FnMut(T, &CVector<T>) -> CVector<T>,
{
    if outputs.windows(2).any(|w| w[1] < w[0]) || outputs.first().is_some_and(|&t| t < t0) {
        return Err(invalid("outputs", "output times must be ascending and after t0"));
    }
    let rtol = T::of(tol.rtol);
    let atol = T::of(tol.atol);
    let max_step = T::of(tol.max_step.min(f64::MAX));
    let mut stats = Stats::default();

    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    stats.evaluations += 1;
    let mut h = initial_step(&y, &k1, rtol, atol).min(max_step);
    let mut out = Vec::with_capacity(outputs.len());

    for &target in outputs {
        while t < target {
            let remaining = target - t;
            let clipped = h >= remaining;
            let step = if clipped { remaining } else { h };
            if step <= T::default_epsilon() * t.abs().max(T::one()) * T::of(16.0) {
                return Err(Error::StepUnderflow { t: t.to_f64_lossy(), step: step.to_f64_lossy() });
            }

            let k2 = f(t + step * T::of(C2), &combo(&y, step, &[(A21, &k1)]));
            let k3 = f(t + step * T::of(C3), &combo(&y, step, &[(A31, &k1), (A32, &k2)]));
            let k4 = f(t + step * T::of(C4), &combo(&y, step, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
            let k5 = f(
                t + step * T::of(C5),
                &combo(&y, step, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            );
            let k6 = f(
                t + step,
                &combo(&y, step, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
            );
            let y_new = combo(&y, step, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
            let k7 = f(t + step, &y_new);
            stats.evaluations += 6;

            let zero = CVector::<T>::zeros(y.len());
            let err = combo(
                &zero,
                step,
                &[(E1, &k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)],
            );
            let mut acc = T::zero();
            for i in 0..y.len() {
                let scale = atol + rtol * y[i].modulus().max(y_new[i].modulus());
                let r = err[i].modulus() / scale;
                acc += r * r;
            }
            let norm = (acc / T::of(y.len().max(1) as f64)).sqrt();

            let factor = if norm == T::zero() {
                T::of(5.0)
            } else {
                (T::of(0.9) * norm.powf(T::of(-0.2))).min(T::of(5.0)).max(T::of(0.2))
            };
            if norm <= T::one() {
                t = if clipped { target } else { t + step };
                y = y_new;
                k1 = k7;
                stats.steps += 1;
                // a clipped step says nothing about the natural step size
                if !clipped || factor < T::one() {
                    h = (step * factor).min(max_step);
                }
            } else {
                stats.rejected += 1;
                h = step * factor.min(T::one());
            }
        }
        out.push(y.clone());
    }
    Ok((out, stats))
}

fn initial_step<T: Scalar>(y: &CVector<T>, dy: &CVector<T>, rtol: T, atol: T) -> T {
    let n = T::of(y.len().max(1) as f64);
    let mut d0 = T::zero();
    let mut d1 = T::zero();
    for i in 0..y.len() {
        let s = atol + rtol * y[i].modulus();
        d0 += (y[i].modulus() / s).powi(2);
        d1 += (dy[i].modulus() / s).powi(2);
    }
    let (d0, d1) = ((d0 / n).sqrt(), (d1 / n).sqrt());
    if d0 < T::of(1e-5) || d1 < T::of(1e-5) {
        T::of(1e-6)
    } else {
        T::of(0.01) * d0 / d1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c;

    #[test]
    fn harmonic_oscillator() {
        // y' = -i w y
        let w = 3.0;
        let y0 = CVector::from_vec(vec![c(1.0, 0.0), c(0.5, -0.2)]);
        let outs: Vec<f64> = (1..=20).map(|k| k as f64 * 0.5).collect();
        let (ys, stats) = integrate(|_, y: &CVector<f64>| y * c(0.0, -w), 0.0, y0.clone(), &outs, Tolerances::default()).unwrap();
        for (t, y) in outs.iter().zip(&ys) {
            let want = &y0 * c((w * t).cos(), -(w * t).sin());
            assert!((y - want).norm() < 1e-8, "t = {t}");
        }
        assert!(stats.steps > 20);
    }

    #[test]
    fn driven_decay_reaches_fixed_point() {
        // y' = -(k/2) y + 1, fixed point 2/k
        let k = 0.4;
        let (ys, _) = integrate(
            |_, y: &CVector<f64>| y * c(-k / 2.0, 0.0) + CVector::from_element(1, c(1.0, 0.0)),
            0.0,
            CVector::zeros(1),
            &[100.0],
            Tolerances::default(),
        )
        .unwrap();
        let want = 2.0 / k * (1.0 - (-k / 2.0 * 100.0f64).exp());
        assert!((ys[0][0].re - want).abs() < 1e-8);
    }

    #[test]
    fn time_dependent_phase() {
        // y' = i cos(t) y  ->  y = exp(i sin t)
        let (ys, _) = integrate(
            |t: f64, y: &CVector<f64>| y * c(0.0, t.cos()),
            0.0,
            CVector::from_element(1, c(1.0, 0.0)),
            &[7.3],
            Tolerances::default(),
        )
        .unwrap();
        let want = c(7.3f64.sin().cos(), 7.3f64.sin().sin());
        assert!((ys[0][0] - want).norm() < 1e-8);
    }

    #[test]
    fn rejects_bad_outputs() {
        let f = |_: f64, y: &CVector<f64>| y.clone();
        assert!(integrate(f, 1.0, CVector::zeros(1), &[0.5], Tolerances::default()).is_err());
        assert!(integrate(f, 0.0, CVector::zeros(1), &[2.0, 1.0], Tolerances::default()).is_err());
    }

    #[test]
    fn underflow_is_reported() {
        // finite-time blow-up y' = y^2 at t = 1
        let r = integrate(
            |_, y: &CVector<f64>| y.map(|z| z * z),
            0.0,
            CVector::from_element(1, c(1.0, 0.0)),
            &[2.0],
            Tolerances::default(),
        );
        assert!(matches!(r, Err(Error::StepUnderflow { .. })), "{r:?}");
    }
}
