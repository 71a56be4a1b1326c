//! Embedded Dormand–Prince 5(4) integrator with adaptive step control.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub atol: f64,
    pub rtol: f64,
    /// Upper bound on the step size, µs.
    pub max_step: Option<f64>,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { atol: 1e-10, rtol: 1e-9, max_step: None }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !ok(self.atol) || !ok(self.rtol) || self.max_step.is_some_and(|h| !ok(h)) {
            return Err(Error::Config(alloc::format!("integrator tolerances must be positive: {self:?}")));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct IntegratorStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// fifth-order weights equal the last row of A; E = b5 - b4
const E: [f64; 7] =
    [71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0, -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0];

/// Adaptive stepper that keeps its step-size estimate between calls.
#[derive(Clone, Debug)]
pub struct DormandPrince {
    tol: Tolerances,
    step: Option<f64>,
    stages: Vec<Vec<f64>>,
    scratch: Vec<f64>,
    candidate: Vec<f64>,
    pub stats: IntegratorStats,
}

impl DormandPrince {
    pub fn new(dim: usize, tol: Tolerances) -> Self {
        DormandPrince {
            tol,
            step: None,
            stages: vec![vec![0.0; dim]; 7],
            scratch: vec![0.0; dim],
            candidate: vec![0.0; dim],
            stats: IntegratorStats::default(),
        }
    }

    /// Advances `y` from `t0` to `t1` in place. `rhs(t, y, dydt)` must fill `dydt`.
    pub fn advance<F>(&mut self, rhs: &mut F, t0: f64, t1: f64, y: &mut [f64]) -> Result<()>
    where
        F: FnMut(f64, &[f64], &mut [f64]),
    {
        let span = t1 - t0;
        if span <= 0.0 {
            return Ok(());
        }
        let max_step = self.tol.max_step.unwrap_or(f64::INFINITY);
        let mut h = self.step.unwrap_or(span).min(max_step).min(span);
        let mut t = t0;
        let min_step = 1e-13 * libm::fmax(libm::fabs(t0), libm::fabs(t1)).max(1e-6);
        while t < t1 {
            let last = t + h >= t1 || (t1 - (t + h)) < min_step;
            if last {
                h = t1 - t;
            }
            let err = self.try_step(rhs, t, h, y);
            if err <= 1.0 {
                self.stats.accepted += 1;
                y.copy_from_slice(&self.candidate);
                t = if last { t1 } else { t + h };
                let grow = if err == 0.0 { 5.0 } else { (0.9 * libm::pow(err, -0.2)).clamp(0.2, 5.0) };
                let next = (h * grow).min(max_step);
                // a step clipped to the interval end says little about the next interval
                if !last || self.step.is_none() {
                    self.step = Some(next);
                }
                h = next;
            } else {
                self.stats.rejected += 1;
                h *= (0.9 * libm::pow(err, -0.2)).clamp(0.2, 1.0);
                if h < min_step {
                    return Err(Error::Numerical(alloc::format!(
                        "step size underflow at t = {t} µs (h = {h:e}, error ratio {err:e})"
                    )));
                }
            }
        }
        Ok(())
    }

    fn try_step<F>(&mut self, rhs: &mut F, t: f64, h: f64, y: &[f64]) -> f64
    where
        F: FnMut(f64, &[f64], &mut [f64]),
    {
        let dim = y.len();
        for s in 0..7 {
            for (i, (out, y0)) in self.scratch.iter_mut().zip(y).enumerate() {
                let mut acc = *y0;
                for (j, a) in A[s].iter().enumerate().take(s) {
                    acc += h * a * self.stages[j][i];
                }
                *out = acc;
            }
            rhs(t + C[s] * h, &self.scratch, &mut self.stages[s]);
            self.stats.evaluations += 1;
        }
        // stage 7 was evaluated at the fifth-order solution, which is scratch
        self.candidate.copy_from_slice(&self.scratch);
        let mut sum = 0.0;
        for (i, (y0, y1)) in y.iter().zip(&self.candidate).enumerate() {
            let err: f64 = (0..7).map(|s| E[s] * self.stages[s][i]).sum::<f64>() * h;
            let scale = self.tol.atol + self.tol.rtol * libm::fabs(*y0).max(libm::fabs(*y1));
            let r = err / scale;
            sum += r * r;
        }
        if dim == 0 {
            return 0.0;
        }
        let norm = libm::sqrt(sum / dim as f64);
        if norm.is_nan() {
            f64::INFINITY
        } else {
            norm
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let mut dp = DormandPrince::new(1, Tolerances::default());
        let mut y = [1.0];
        let mut rhs = |_t: f64, y: &[f64], d: &mut [f64]| d[0] = -2.0 * y[0];
        dp.advance(&mut rhs, 0.0, 3.0, &mut y).unwrap();
        assert!((y[0] - libm::exp(-6.0)).abs() < 1e-10);
        assert!(dp.stats.accepted > 1);
    }

    #[test]
    fn harmonic_oscillator_over_many_calls() {
        let mut dp = DormandPrince::new(2, Tolerances { atol: 1e-12, rtol: 1e-11, max_step: None });
        let mut y = [1.0, 0.0];
        let mut rhs = |_t: f64, y: &[f64], d: &mut [f64]| {
            d[0] = y[1];
            d[1] = -y[0];
        };
        let n = 1000;
        for k in 0..n {
            let t0 = k as f64 * 0.01;
            dp.advance(&mut rhs, t0, t0 + 0.01, &mut y).unwrap();
        }
        assert!((y[0] - libm::cos(10.0)).abs() < 1e-9);
        assert!((y[1] + libm::sin(10.0)).abs() < 1e-9);
    }

    #[test]
    fn blow_up_reports_underflow() {
        let mut dp = DormandPrince::new(1, Tolerances::default());
        let mut y = [1.0];
        let mut rhs = |_t: f64, y: &[f64], d: &mut [f64]| d[0] = y[0] * y[0];
        let err = dp.advance(&mut rhs, 0.0, 2.0, &mut y).unwrap_err();
        assert!(matches!(err, Error::Numerical(_)));
    }

    #[test]
    fn rejects_bad_tolerances() {
        assert!(Tolerances { atol: 0.0, rtol: 1e-9, max_step: None }.validate().is_err());
        assert!(Tolerances { atol: 1e-9, rtol: 1e-9, max_step: Some(-1.0) }.validate().is_err());
    }
}
