//! Adaptive Dormand-Prince 5(4) integration for matrix-valued linear ODEs,
//! plus adaptive Simpson quadrature.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Dormand-Prince coefficients.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
/// 5th-order weights (same as last row of A) and 4th-order embedded weights.
const B5: [f64; 7] = [
    35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0,
    187.0 / 2100.0, 1.0 / 40.0,
];

/// Integrates y' = rhs(t, y) from t0 to t1 with local error tolerance `local_tol`.
/// `max_step` additionally bounds |h| as a function of t (e.g. to respect a pole).
pub fn integrate<F>(
    rhs: F,
    t0: f64,
    t1: f64,
    y0: DMatrix<f64>,
    local_tol: f64,
    max_step: Option<&dyn Fn(f64) -> f64>,
) -> Result<DMatrix<f64>>
where
    F: Fn(f64, &DMatrix<f64>) -> DMatrix<f64>,
{
    let span = t1 - t0;
    if span == 0.0 {
        return Ok(y0);
    }
    let dir = span.signum();
    let mut t = t0;
    let mut y = y0;
    let mut h = (span.abs() / 16.0).min(0.1).max(1e-8) * dir;
    let mut k0 = rhs(t, &y);
    let mut steps: usize = 0;
    const MAX_STEPS: usize = 2_000_000;

    while (t1 - t) * dir > 0.0 {
        steps += 1;
        if steps > MAX_STEPS {
            return Err(Error::StepFailure(format!(
                "step budget exhausted at t = {t}"
            )));
        }
        if let Some(ms) = max_step {
            let cap = ms(t).abs().max(1e-14);
            if h.abs() > cap {
                h = cap * dir;
            }
        }
        if (t + h - t1) * dir > 0.0 {
            h = t1 - t;
        }
        let mut k = vec![k0.clone()];
        for i in 0..6 {
            let mut yi = y.clone();
            for (j, kj) in k.iter().enumerate() {
                let a = A[i][j];
                if a != 0.0 {
                    yi += kj * (a * h);
                }
            }
            k.push(rhs(t + C[i] * h, &yi));
        }
        let mut y5 = y.clone();
        let mut err = DMatrix::zeros(y.nrows(), y.ncols());
        for (i, ki) in k.iter().enumerate() {
            if B5[i] != 0.0 {
                y5 += ki * (B5[i] * h);
            }
            let d = B5[i] - B4[i];
            if d != 0.0 {
                err += ki * (d * h);
            }
        }
        let scale = y.abs().max().max(y5.abs().max()).max(1.0);
        let err_norm = err.abs().max() / (local_tol * scale);
        if err_norm <= 1.0 {
            t += h;
            y = y5;
            k0 = k.pop().expect("fsal stage");
        }
        let factor = if err_norm > 0.0 {
            (0.9 * err_norm.powf(-0.2)).clamp(0.2, 5.0)
        } else {
            5.0
        };
        h *= factor;
        if h.abs() < 1e-15 * (1.0 + t.abs()) {
            return Err(Error::StepFailure(format!("step underflow at t = {t}")));
        }
    }
    Ok(y)
}

/// Adaptive Simpson quadrature of `f` over [a, b].
pub fn quad<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        ((b - a) / 6.0 * (fa + 4.0 * fm + fb), m, fm)
    }
    fn rec<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        whole: f64,
        m: f64,
        fm: f64,
        tol: f64,
        depth: usize,
    ) -> f64 {
        let (left, lm, flm) = simpson(f, a, fa, m, fm);
        let (right, rm, frm) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            rec(f, a, fa, m, fm, left, lm, flm, tol / 2.0, depth - 1)
                + rec(f, m, fm, b, fb, right, rm, frm, tol / 2.0, depth - 1)
        }
    }
    let fa = f(a);
    let fb = f(b);
    let (whole, m, fm) = simpson(f, a, fa, b, fb);
    rec(f, a, fa, b, fb, whole, m, fm, tol, 48)
}
