//! Closed-form lossless cascade and photon-number integral.
//!
//! With uniform couplings and no optical pumping the rate equations form a
//! directed Poisson chain in the pump area θ: the first `N` sublevels carry
//! `e^{-θ} θ^j / j!` and the last one holds the remainder.

use alloc::string::String;
use alloc::vec::Vec;

use crate::angular_momentum::HalfInt;
use crate::atom_model::{CouplingMode, Polarization};
use crate::dynamics::SimulationResult;
use crate::error::{domain_err, Result};
use crate::pulse::{PulseSchedule, ThetaAccumulator};
use crate::quadrature::adaptive_simpson;

/// Photon-number distribution `P_0..P_N` at a given pump area.
#[derive(Clone, Debug, PartialEq)]
pub struct FockDistribution {
    pub theta: f64,
    pub probabilities: Vec<f64>,
}

impl FockDistribution {
    pub fn mean(&self) -> f64 {
        self.probabilities.iter().enumerate().map(|(j, p)| j as f64 * p).sum()
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if !theta.is_finite() || theta < 0.0 {
        return Err(domain_err!("pump area must be finite and non-negative, got {theta}"));
    }
    Ok(())
}

/// `P_j` for a cascade of `steps` transitions starting from its first level.
pub fn cascade_distribution(theta: f64, steps: usize) -> Result<FockDistribution> {
    check_theta(theta)?;
    let mut probabilities = Vec::with_capacity(steps + 1);
    let mut term = libm::exp(-theta);
    let mut below = 0.0;
    for j in 0..steps {
        if j > 0 {
            term *= theta / j as f64;
        }
        probabilities.push(term);
        below += term;
    }
    probabilities.push(1.0 - below);
    Ok(FockDistribution { theta, probabilities })
}

/// Distribution for an atom starting in `m_F = -F`: `2F + 1` photon numbers.
pub fn closed_form_distribution(theta: f64, f: HalfInt) -> Result<FockDistribution> {
    f.check_magnitude()?;
    cascade_distribution(theta, f.twice() as usize)
}

/// Absolute tolerance of the photon-number quadrature.
pub const N_OUT_TOLERANCE: f64 = 1e-10;

/// `1 - P_N(θ)`, summed directly, which avoids cancellation near full transfer.
fn not_done(x: f64, steps: usize) -> f64 {
    let mut term = libm::exp(-x);
    let mut acc = term;
    for j in 1..steps {
        term *= x / j as f64;
        acc += term;
    }
    acc
}

/// `n_out(θ) = θ - ∫₀^θ P_N(θ') dθ'` for a cascade of `steps` transitions.
pub fn n_out_cascade(theta: f64, steps: usize) -> Result<f64> {
    check_theta(theta)?;
    if steps == 0 {
        return Ok(0.0);
    }
    let f = |x: f64| not_done(x, steps);
    // the integrand dies off within a few multiples of `steps`
    let knee = (4.0 * steps as f64 + 40.0).min(theta);
    let head = adaptive_simpson(&f, 0.0, knee, N_OUT_TOLERANCE);
    let tail = if theta > knee { adaptive_simpson(&f, knee, theta, N_OUT_TOLERANCE) } else { 0.0 };
    Ok((head + tail).min(steps as f64))
}

/// [`n_out_cascade`] along a non-decreasing sequence of pump areas,
/// accumulated interval by interval.
pub fn n_out_cascade_path(thetas: &[f64], steps: usize) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(thetas.len());
    let Some(&first) = thetas.first() else {
        return Ok(out);
    };
    let mut acc = n_out_cascade(first, steps)?;
    out.push(acc);
    let f = |x: f64| not_done(x, steps);
    for w in thetas.windows(2) {
        check_theta(w[1])?;
        if w[1] < w[0] {
            return Err(domain_err!("pump areas must not decrease ({} after {})", w[1], w[0]));
        }
        if steps > 0 {
            acc += adaptive_simpson(&f, w[0], w[1], N_OUT_TOLERANCE * 1e-3);
        }
        out.push(acc.min(steps as f64));
    }
    Ok(out)
}

pub fn n_out_closed_form(theta: f64, f: HalfInt) -> Result<f64> {
    f.check_magnitude()?;
    n_out_cascade(theta, f.twice() as usize)
}

/// Deviation of a numerical run from the lossless closed forms.
#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonReport {
    pub comparable: bool,
    pub reason: Option<String>,
    /// Largest `|P_j^num - P_j^closed|` per cascade level `j` over the grid.
    pub max_abs: Vec<f64>,
    /// Root-mean-square deviation per cascade level over the grid.
    pub rms: Vec<f64>,
    pub n_out_max_abs: f64,
}

impl ComparisonReport {
    fn incomparable(reason: &str) -> Self {
        ComparisonReport {
            comparable: false,
            reason: Some(reason.into()),
            max_abs: Vec::new(),
            rms: Vec::new(),
            n_out_max_abs: f64::NAN,
        }
    }

    pub fn max_deviation(&self) -> f64 {
        self.max_abs.iter().copied().fold(0.0, f64::max)
    }
}

/// Compares populations and photon number of `numeric` against the cascade
/// solution evaluated at `θ(t) = α ∫ f dt'` on the same time grid.
///
/// `alpha` is the uniform photon-generation rate and `start` the ascending
/// index the atom was prepared in.
pub fn compare(numeric: &SimulationResult, schedule: &PulseSchedule, alpha: f64, start: usize) -> ComparisonReport {
    if numeric.spontaneous_emission {
        return ComparisonReport::incomparable("numerical run includes spontaneous emission");
    }
    if numeric.mode != CouplingMode::Uniform {
        return ComparisonReport::incomparable("numerical run uses actual coupling coefficients");
    }
    let Some(first) = schedule.pulses().first() else {
        return ComparisonReport::incomparable("empty schedule");
    };
    let polarization = first.polarization;
    if schedule.pulses().iter().any(|p| p.polarization != polarization) {
        return ComparisonReport::incomparable("schedule mixes polarizations");
    }
    let n = numeric.sublevels.len();
    if start >= n {
        return ComparisonReport::incomparable("initial sublevel outside the manifold");
    }

    // cascade level j sits at ascending index start + jq
    let (steps, index_of): (usize, fn(usize, usize) -> usize) = match polarization {
        Polarization::SigmaPlus => (n - 1 - start, |s, j| s + j),
        Polarization::SigmaMinus => (start, |s, j| s - j),
    };
    let shapes: Vec<_> = schedule.pulses().iter().map(|p| (&p.shape, alpha)).collect();
    let theta = ThetaAccumulator::new(&shapes, &numeric.times);

    let mut max_abs = alloc::vec![0.0f64; steps + 1];
    let mut sum_sq = alloc::vec![0.0f64; steps + 1];
    let Ok(closed_n_out) = n_out_cascade_path(&theta.theta, steps) else {
        return ComparisonReport::incomparable("invalid pump area");
    };
    let mut n_out_max_abs = 0.0f64;
    for (sample, th) in theta.theta.iter().enumerate() {
        let row = numeric.population_row(sample);
        let Ok(dist) = cascade_distribution(*th, steps) else {
            return ComparisonReport::incomparable("invalid pump area");
        };
        for (j, p) in dist.probabilities.iter().enumerate() {
            let d = libm::fabs(row[index_of(start, j)] - p);
            max_abs[j] = max_abs[j].max(d);
            sum_sq[j] += d * d;
        }
        n_out_max_abs = n_out_max_abs.max(libm::fabs(numeric.n_out[sample] - closed_n_out[sample]));
    }
    let samples = theta.theta.len().max(1) as f64;
    ComparisonReport {
        comparable: true,
        reason: None,
        max_abs,
        rms: sum_sq.into_iter().map(|s| libm::sqrt(s / samples)).collect(),
        n_out_max_abs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two() -> HalfInt {
        HalfInt::from_int(2)
    }

    #[test]
    fn zero_area_is_vacuum() {
        let d = closed_form_distribution(0.0, two()).unwrap();
        assert_eq!(d.probabilities, [1.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(n_out_closed_form(0.0, two()).unwrap(), 0.0);
    }

    #[test]
    fn unit_area_values() {
        // e^{-1}{1, 1, 1/2, 1/6} and the complement
        let d = closed_form_distribution(1.0, two()).unwrap();
        let want = [
            0.367_879_441_171_442_3,
            0.367_879_441_171_442_3,
            0.183_939_720_585_721_2,
            0.061_313_240_195_240_39,
            0.018_988_156_876_153_81,
        ];
        for (p, w) in d.probabilities.iter().zip(want) {
            assert!((p - w).abs() < 1e-15);
        }
    }

    #[test]
    fn large_area_fills_top_level() {
        let d = closed_form_distribution(60.0, two()).unwrap();
        assert!(d.probabilities[4] > 1.0 - 1e-15);
        let d = closed_form_distribution(14.848_874_658_217_888, two()).unwrap();
        assert!(d.probabilities[4] > 0.999);
    }

    #[test]
    fn zero_f_is_single_flat_level() {
        for theta in [0.0, 1.0, 30.0] {
            assert_eq!(closed_form_distribution(theta, HalfInt::ZERO).unwrap().probabilities, [1.0]);
        }
    }

    #[test]
    fn negative_area_is_domain_error() {
        assert!(closed_form_distribution(-0.1, two()).is_err());
        assert!(n_out_closed_form(f64::NAN, two()).is_err());
    }

    // Oracle: Σ_{j<N} regularized lower incomplete gamma P(j+1, θ), evaluated with mpmath.
    #[test]
    fn photon_number_against_incomplete_gamma() {
        let cases = [
            (0.01, 0.009_999_999_999_172_202),
            (1.0, 0.995_651_230_433_221),
            (5.0, 3.563_156_436_225_958_9),
            (14.9, 3.999_722_091_109_366_6),
            (14.848_874_658_217_888, 3.999_710_121_531_572_1),
        ];
        for (theta, want) in cases {
            let got = n_out_closed_form(theta, two()).unwrap();
            assert!((got - want).abs() < 1e-9, "θ={theta}: {got} vs {want}");
        }
        let near = n_out_closed_form(14.9, two()).unwrap();
        assert!(4.0 - near < 0.01);
    }

    #[test]
    fn path_accumulation_matches_pointwise() {
        let thetas: Vec<f64> = (0..=300).map(|k| 0.05 * k as f64).collect();
        let path = n_out_cascade_path(&thetas, 4).unwrap();
        for (th, n) in thetas.iter().zip(&path) {
            assert!((n - n_out_cascade(*th, 4).unwrap()).abs() < 1e-9);
        }
        assert!(n_out_cascade_path(&[1.0, 0.5], 4).is_err());
    }
}
