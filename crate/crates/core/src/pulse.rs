//! Pump envelopes, pulse schedules and the accumulated pump area θ(t).

use alloc::vec::Vec;

use crate::atom_model::Polarization;
use crate::error::{config_err, Result};
use crate::quadrature::{adaptive_simpson, gauss_legendre};

/// Gaussian envelopes are truncated at `|t - t0| <= 6T`, where `f < 2.4e-16`.
pub const GAUSSIAN_HALF_WIDTH: f64 = 6.0;

#[derive(Clone, Debug, PartialEq)]
pub enum EnvelopeKind {
    /// `exp(-((t - t0)/T)²)`.
    Gaussian,
    /// 1 on `|t - t0| <= T/2`, 0 elsewhere.
    FlatTop,
    /// Piecewise-linear through `(t - t0, f)` samples, normalized to unit peak.
    Tabulated(Vec<(f64, f64)>),
}

/// Temporal intensity profile `f(t)` of one pump pulse, peak value 1.
#[derive(Clone, Debug, PartialEq)]
pub struct PulseShape {
    pub kind: EnvelopeKind,
    /// Duration `T`, µs.
    pub duration: f64,
    /// Center `t0`, µs.
    pub center: f64,
}

impl PulseShape {
    pub fn gaussian(duration: f64, center: f64) -> Result<Self> {
        check_duration(duration)?;
        Ok(PulseShape { kind: EnvelopeKind::Gaussian, duration, center })
    }

    pub fn flat_top(duration: f64, center: f64) -> Result<Self> {
        check_duration(duration)?;
        Ok(PulseShape { kind: EnvelopeKind::FlatTop, duration, center })
    }

    /// Tabulated envelope from `(t - t0, f)` samples. Times must increase
    /// strictly; values are rescaled so the largest is 1. The duration is the
    /// sample span.
    pub fn tabulated(samples: Vec<(f64, f64)>, center: f64) -> Result<Self> {
        if samples.len() < 2 {
            return Err(config_err!("tabulated envelope needs at least two samples"));
        }
        if samples.iter().any(|(t, f)| !t.is_finite() || !f.is_finite() || *f < 0.0) {
            return Err(config_err!("tabulated envelope samples must be finite with f >= 0"));
        }
        if samples.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(config_err!("tabulated envelope times must be strictly increasing"));
        }
        let peak = samples.iter().fold(0.0f64, |acc, (_, f)| acc.max(*f));
        if peak <= 0.0 {
            return Err(config_err!("tabulated envelope is identically zero"));
        }
        let duration = samples[samples.len() - 1].0 - samples[0].0;
        let samples = samples.into_iter().map(|(t, f)| (t, f / peak)).collect();
        Ok(PulseShape { kind: EnvelopeKind::Tabulated(samples), duration, center })
    }

    pub fn with_center(mut self, center: f64) -> Self {
        self.center = center;
        self
    }

    /// Envelope value `f(t) ∈ [0, 1]`; zero outside the support.
    pub fn envelope(&self, t: f64) -> f64 {
        let (start, end) = self.support();
        if t < start || t > end {
            return 0.0;
        }
        let x = t - self.center;
        match &self.kind {
            EnvelopeKind::Gaussian => {
                let u = x / self.duration;
                libm::exp(-u * u)
            }
            EnvelopeKind::FlatTop => 1.0,
            EnvelopeKind::Tabulated(samples) => interpolate(samples, x),
        }
    }

    /// Time window `[start, end]` outside of which the envelope is zero.
    pub fn support(&self) -> (f64, f64) {
        match &self.kind {
            EnvelopeKind::Gaussian => {
                let w = GAUSSIAN_HALF_WIDTH * self.duration;
                (self.center - w, self.center + w)
            }
            EnvelopeKind::FlatTop => (self.center - 0.5 * self.duration, self.center + 0.5 * self.duration),
            EnvelopeKind::Tabulated(s) => (self.center + s[0].0, self.center + s[s.len() - 1].0),
        }
    }

    /// Interior points where the envelope is not smooth (sample knots).
    pub fn kinks(&self) -> Vec<f64> {
        match &self.kind {
            EnvelopeKind::Tabulated(s) => s.iter().map(|(t, _)| self.center + t).collect(),
            _ => Vec::new(),
        }
    }

    /// `∫ f dt` over the whole support, in closed form where one exists.
    pub fn area(&self) -> f64 {
        match &self.kind {
            EnvelopeKind::Gaussian => self.duration * libm::sqrt(core::f64::consts::PI),
            EnvelopeKind::FlatTop => self.duration,
            EnvelopeKind::Tabulated(s) => s.windows(2).map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1)).sum(),
        }
    }
}

fn check_duration(duration: f64) -> Result<()> {
    if !(duration.is_finite() && duration > 0.0) {
        return Err(config_err!("pulse duration must be positive, got {duration}"));
    }
    Ok(())
}

fn interpolate(samples: &[(f64, f64)], x: f64) -> f64 {
    let i = samples.partition_point(|(t, _)| *t <= x);
    if i == 0 {
        return samples[0].1;
    }
    if i == samples.len() {
        return samples[samples.len() - 1].1;
    }
    let (t0, f0) = samples[i - 1];
    let (t1, f1) = samples[i];
    f0 + (f1 - f0) * (x - t0) / (t1 - t0)
}

/// Absolute tolerance of [`theta_of_t`] relative to `alpha · T`.
const THETA_RELATIVE_TOLERANCE: f64 = 1e-13;

/// Accumulated pump area `θ(t) = ∫_{-∞}^t α f(t') dt'`.
pub fn theta_of_t(shape: &PulseShape, alpha: f64, t: f64) -> f64 {
    if alpha == 0.0 {
        return 0.0;
    }
    let (start, end) = shape.support();
    let upper = t.min(end);
    if upper <= start {
        return 0.0;
    }
    let tol = THETA_RELATIVE_TOLERANCE * shape.duration;
    // integrate piecewise between kinks so the Simpson error estimate stays honest
    let mut edges = alloc::vec![start];
    edges.extend(shape.kinks().into_iter().filter(|k| *k > start && *k < upper));
    edges.push(upper);
    let f = |x: f64| shape.envelope(x);
    let area: f64 = edges.windows(2).map(|w| adaptive_simpson(&f, w[0], w[1], tol)).sum();
    alpha * area
}

/// θ(t) sampled on a time grid, accumulated interval by interval.
#[derive(Clone, Debug, PartialEq)]
pub struct ThetaAccumulator {
    pub grid: Vec<f64>,
    pub theta: Vec<f64>,
}

impl ThetaAccumulator {
    /// Accumulates θ over an ascending grid for a sequence of pulses with
    /// rates `alpha`; intervals are split at support edges and sample knots.
    pub fn new(pulses: &[(&PulseShape, f64)], grid: &[f64]) -> Self {
        let mut breaks: Vec<f64> = Vec::new();
        for (shape, _) in pulses {
            let (s, e) = shape.support();
            breaks.push(s);
            breaks.push(e);
            breaks.extend(shape.kinks());
        }
        breaks.sort_by(f64::total_cmp);
        let rate = |t: f64| pulses.iter().map(|(shape, alpha)| alpha * shape.envelope(t)).sum::<f64>();
        let mut theta = Vec::with_capacity(grid.len());
        let first = grid.first().copied().unwrap_or(0.0);
        let mut acc = pulses.iter().map(|(shape, alpha)| theta_of_t(shape, *alpha, first)).sum::<f64>();
        if !grid.is_empty() {
            theta.push(acc);
        }
        for w in grid.windows(2) {
            let (a, b) = (w[0], w[1]);
            let lo = breaks.partition_point(|x| *x <= a);
            let hi = breaks.partition_point(|x| *x < b);
            let mut left = a;
            for &x in &breaks[lo..hi] {
                acc += gauss_legendre(&rate, left, x);
                left = x;
            }
            acc += gauss_legendre(&rate, left, b);
            theta.push(acc);
        }
        ThetaAccumulator { grid: grid.to_vec(), theta }
    }

    pub fn for_pulse(shape: &PulseShape, alpha: f64, grid: &[f64]) -> Self {
        Self::new(&[(shape, alpha)], grid)
    }

    pub fn last(&self) -> f64 {
        self.theta.last().copied().unwrap_or(0.0)
    }
}

/// One pulse of a schedule.
#[derive(Clone, Debug, PartialEq)]
pub struct ScheduledPulse {
    pub shape: PulseShape,
    pub polarization: Polarization,
}

/// Ordered, time-disjoint sequence of pump pulses.
#[derive(Clone, Debug, PartialEq)]
pub struct PulseSchedule {
    pulses: Vec<ScheduledPulse>,
}

impl PulseSchedule {
    /// Validates ordering and spacing: each pulse must start after the
    /// previous one's support ends, with a gap of at least that pulse's `T`.
    pub fn new(pulses: Vec<ScheduledPulse>) -> Result<Self> {
        for (i, w) in pulses.windows(2).enumerate() {
            let (_, prev_end) = w[0].shape.support();
            let (next_start, _) = w[1].shape.support();
            let gap = next_start - prev_end;
            if gap < 0.0 {
                return Err(config_err!("pulses {i} and {} overlap", i + 1));
            }
            if gap < w[0].shape.duration {
                return Err(config_err!(
                    "delay {gap} µs before pulse {} is shorter than the preceding duration {} µs",
                    i + 1,
                    w[0].shape.duration
                ));
            }
        }
        Ok(PulseSchedule { pulses })
    }

    pub fn single(shape: PulseShape, polarization: Polarization) -> Self {
        PulseSchedule { pulses: alloc::vec![ScheduledPulse { shape, polarization }] }
    }

    /// `count` copies of `template` with alternating polarization, the first
    /// one at the template's center, separated by `delay` µs between supports.
    pub fn alternating(template: &PulseShape, first: Polarization, count: usize, delay: f64) -> Result<Self> {
        if !(delay.is_finite() && delay >= 0.0) {
            return Err(config_err!("pulse delay must be non-negative, got {delay}"));
        }
        let (start, end) = template.support();
        let period = (end - start) + delay;
        let mut polarization = first;
        let pulses = (0..count)
            .map(|i| {
                let pulse = ScheduledPulse {
                    shape: template.clone().with_center(template.center + i as f64 * period),
                    polarization,
                };
                polarization = polarization.opposite();
                pulse
            })
            .collect();
        Self::new(pulses)
    }

    pub fn pulses(&self) -> &[ScheduledPulse] {
        &self.pulses
    }

    pub fn is_empty(&self) -> bool {
        self.pulses.is_empty()
    }

    pub fn len(&self) -> usize {
        self.pulses.len()
    }

    pub fn is_alternating(&self) -> bool {
        self.pulses.windows(2).all(|w| w[0].polarization != w[1].polarization)
    }

    /// `[start of first support, end of last support]`.
    pub fn span(&self) -> Option<(f64, f64)> {
        let first = self.pulses.first()?.shape.support().0;
        let last = self.pulses.last()?.shape.support().1;
        Some((first, last))
    }

    /// Index of the pulse whose support contains `t`, preferring the later one at a shared edge.
    pub fn active_at(&self, t: f64) -> Option<usize> {
        self.pulses.iter().rposition(|p| {
            let (s, e) = p.shape.support();
            t >= s && t <= e
        })
    }

    pub fn shortest_duration(&self) -> Option<f64> {
        self.pulses.iter().map(|p| p.shape.duration).reduce(f64::min)
    }
}
