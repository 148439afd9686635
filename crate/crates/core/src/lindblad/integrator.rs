//! Dormand-Prince 5(4) embedded Runge-Kutta with adaptive step control.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

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
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// fifth-order weights minus embedded fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
// Lund stabilisation exponents for the PI controller
const ALPHA: f64 = 0.2 - 0.04 * 0.75;
const BETA: f64 = 0.04;

/// Autonomous integrator for `y' = f(y)` over complex vectors.
///
/// The accepted step size carries over between calls so that stepping
/// through a sequence of output times does not restart the controller.
#[derive(Debug, Clone)]
pub struct Dopri5 {
    tol: Tolerances,
    max_steps: usize,
    h: Option<f64>,
    err_prev: f64,
    k: [Vec<Complex64>; 7],
    stage: Vec<Complex64>,
    fsal_valid: bool,
    stats: StepStats,
}

impl Dopri5 {
    pub fn new(tol: Tolerances, max_steps: usize) -> Self {
        Self {
            tol,
            max_steps,
            h: None,
            err_prev: 1e-4,
            k: Default::default(),
            stage: Vec::new(),
            fsal_valid: false,
            stats: StepStats::default(),
        }
    }

    pub fn stats(&self) -> StepStats {
        self.stats
    }

    /// Largest scaled component error, so every tracked element meets
    /// `atol + rtol·|y|` individually.
    fn error_norm(&self, y: &[Complex64], y_new: &[Complex64], err: &[Complex64]) -> f64 {
        y.iter()
            .zip(y_new)
            .zip(err)
            .map(|((a, b), e)| e.norm() / (self.tol.atol + self.tol.rtol * a.norm().max(b.norm())))
            .fold(0.0, f64::max)
    }

    fn initial_step<F>(&mut self, f: &mut F, y: &[Complex64], span: f64) -> f64
    where
        F: FnMut(&[Complex64], &mut [Complex64]),
    {
        let n = y.len();
        let scale: Vec<f64> = y.iter().map(|v| self.tol.atol + self.tol.rtol * v.norm()).collect();
        let rms = |v: &[Complex64]| -> f64 {
            (v.iter().zip(&scale).map(|(x, s)| (x.norm() / s).powi(2)).sum::<f64>() / n as f64).sqrt()
        };
        let mut f0 = vec![Complex64::new(0.0, 0.0); n];
        f(y, &mut f0);
        self.stats.evaluations += 1;
        let (d0, d1) = (rms(y), rms(&f0));
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let h0 = h0.min(span);
        let y1: Vec<Complex64> = y.iter().zip(&f0).map(|(a, b)| a + b * h0).collect();
        let mut f1 = vec![Complex64::new(0.0, 0.0); n];
        f(&y1, &mut f1);
        self.stats.evaluations += 1;
        let diff: Vec<Complex64> = f1.iter().zip(&f0).map(|(a, b)| a - b).collect();
        let d2 = rms(&diff) / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(1.0 / 5.0)
        };
        (100.0 * h0).min(h1).min(span)
    }

    /// Advances `y` from `t0` to exactly `t1`.
    pub fn integrate<F>(&mut self, mut f: F, y: &mut Vec<Complex64>, t0: f64, t1: f64) -> Result<()>
    where
        F: FnMut(&[Complex64], &mut [Complex64]),
    {
        let n = y.len();
        if self.stage.len() != n {
            for k in self.k.iter_mut() {
                *k = vec![Complex64::new(0.0, 0.0); n];
            }
            self.stage = vec![Complex64::new(0.0, 0.0); n];
        }
        // the caller may have touched y since the last call
        self.fsal_valid = false;
        let mut t = t0;
        let mut h = match self.h {
            Some(h) => h,
            None => self.initial_step(&mut f, y, t1 - t0),
        };
        let mut y_new = vec![Complex64::new(0.0, 0.0); n];
        let mut err = vec![Complex64::new(0.0, 0.0); n];
        let mut rejected_last = false;

        while t < t1 {
            if self.stats.accepted + self.stats.rejected >= self.max_steps {
                return Err(Error::Stiffness { time: t, step: h });
            }
            let remaining = t1 - t;
            let hitting_end = h >= remaining * (1.0 - 1e-12);
            let step = if hitting_end { remaining } else { h };
            if step < 1e-12 * t.abs().max(1.0) {
                return Err(Error::Stiffness { time: t, step });
            }

            if !self.fsal_valid {
                f(y, &mut self.k[0]);
                self.stats.evaluations += 1;
                self.fsal_valid = true;
            }
            self.stage_eval(&mut f, y, step, 1, &[A21]);
            self.stage_eval(&mut f, y, step, 2, &[A31, A32]);
            self.stage_eval(&mut f, y, step, 3, &[A41, A42, A43]);
            self.stage_eval(&mut f, y, step, 4, &[A51, A52, A53, A54]);
            self.stage_eval(&mut f, y, step, 5, &[A61, A62, A63, A64, A65]);
            {
                let k = &self.k;
                for i in 0..n {
                    y_new[i] = y[i]
                        + (k[0][i] * A71 + k[2][i] * A73 + k[3][i] * A74 + k[4][i] * A75 + k[5][i] * A76) * step;
                }
            }
            f(&y_new, &mut self.k[6]);
            self.stats.evaluations += 1;
            {
                let k = &self.k;
                for i in 0..n {
                    err[i] = (k[0][i] * E1 + k[2][i] * E3 + k[3][i] * E4 + k[4][i] * E5 + k[5][i] * E6 + k[6][i] * E7)
                        * step;
                }
            }
            let err_norm = self.error_norm(y, &y_new, &err);

            if err_norm <= 1.0 {
                self.stats.accepted += 1;
                t = if hitting_end { t1 } else { t + step };
                std::mem::swap(y, &mut y_new);
                self.k.swap(0, 6);
                let err_norm = err_norm.max(1e-10);
                let mut fac = SAFETY * err_norm.powf(-ALPHA) * self.err_prev.powf(BETA);
                fac = fac.clamp(FAC_MIN, FAC_MAX);
                if rejected_last {
                    fac = fac.min(1.0);
                }
                self.err_prev = err_norm;
                // a step shortened to land on t1 should not shrink the next one
                let base = if hitting_end { h.max(step) } else { step };
                h = base * fac;
                rejected_last = false;
            } else {
                self.stats.rejected += 1;
                let fac = (SAFETY * err_norm.powf(-0.2)).max(FAC_MIN);
                h = step * fac;
                rejected_last = true;
            }
        }
        self.h = Some(h);
        Ok(())
    }

    fn stage_eval<F>(&mut self, f: &mut F, y: &[Complex64], h: f64, index: usize, coeffs: &[f64])
    where
        F: FnMut(&[Complex64], &mut [Complex64]),
    {
        let n = y.len();
        for i in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, a) in coeffs.iter().enumerate() {
                acc += self.k[j][i] * *a;
            }
            self.stage[i] = y[i] + acc * h;
        }
        let (stage, k) = (&self.stage, &mut self.k);
        f(stage, &mut k[index]);
        self.stats.evaluations += 1;
    }
}
