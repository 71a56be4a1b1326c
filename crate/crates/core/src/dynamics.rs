//! Zeeman-population rate equations, outgoing photon flux and pulse trains.
//!
//! Each pump pulse drives the cascade `m -> m + q` (`q = +1` for σ⁺, `-1` for
//! σ⁻). For a sublevel `m` the rates are
//!
//! ```text
//! A(m)      = f(t) α(m) + Γop(m, 1)
//! Γop(m, i) = f(t) Ω(m)²/Δ² γ(m+q -> m+iq),  i = 1, 2
//! dσ(m)/dt  = A(m-q) σ(m-q) + Γop(m-2q, 2) σ(m-2q) - [A(m) + Γop(m, 2)] σ(m)
//! dn/dt     = f(t) Σ α(m) σ(m)
//! ```
//!
//! and every ground coherence `(m, m+1)` decays at `f(t)[α + Γ₁]/2` of the
//! sublevel the pump excites. The coherences never feed back into the
//! populations.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::angular_momentum::HalfInt;
use crate::atom_model::{
    build_coupling_table, derived_rates, validity_report, AtomSpec, CouplingMode, CouplingTable, PhysicalParams,
    Polarization, ValidityReport,
};
use crate::error::{config_err, Result};
use crate::ode::{DormandPrince, IntegratorStats, Tolerances};
use crate::pulse::PulseSchedule;

/// Ground-state populations and nearest-neighbour coherences at one instant.
#[derive(Clone, Debug, PartialEq)]
pub struct PopulationState {
    /// Populations in ascending `m_F`.
    pub populations: Vec<f64>,
    /// Coherences `(m, m+1)` in ascending `m`.
    pub coherences: Vec<Complex64>,
    pub time: f64,
}

impl PopulationState {
    /// All population in the sublevel with ascending index `index`.
    pub fn pure(sublevels: usize, index: usize, time: f64) -> Self {
        let mut populations = vec![0.0; sublevels];
        populations[index] = 1.0;
        PopulationState { populations, coherences: vec![Complex64::new(0.0, 0.0); sublevels.saturating_sub(1)], time }
    }

    pub fn total(&self) -> f64 {
        self.populations.iter().sum()
    }
}

/// Peak rates of one pass, independent of the envelope.
#[derive(Clone, Debug, PartialEq)]
pub struct PassRates {
    pub q: i32,
    pub alpha: Vec<f64>,
    pub op_rate: Vec<[f64; 2]>,
    pub coherence_loss: Vec<f64>,
}

impl PassRates {
    /// Rates from a coupling table; `spontaneous_emission = false` drops all
    /// optical pumping and excitation loss.
    pub fn new(table: &CouplingTable, spontaneous_emission: bool) -> Self {
        let n = table.alpha.len();
        let (op_rate, coherence_loss) = if spontaneous_emission {
            (table.op_rate.clone(), table.coherence_loss.clone())
        } else {
            (vec![[0.0; 2]; n], vec![0.0; n])
        };
        PassRates { q: table.polarization.q(), alpha: table.alpha.clone(), op_rate, coherence_loss }
    }

    pub fn at(&self, envelope: f64) -> RateSet<'_> {
        RateSet {
            q: self.q,
            envelope,
            alpha: &self.alpha,
            op_rate: &self.op_rate,
            coherence_loss: &self.coherence_loss,
        }
    }
}

/// Instantaneous rates: peak values scaled by the envelope `f(t)`.
#[derive(Clone, Copy, Debug)]
pub struct RateSet<'a> {
    pub q: i32,
    pub envelope: f64,
    pub alpha: &'a [f64],
    pub op_rate: &'a [[f64; 2]],
    pub coherence_loss: &'a [f64],
}

impl RateSet<'_> {
    /// Combined transfer rate `A(m)` out of ascending index `i` to its neighbour.
    pub fn transfer(&self, i: usize) -> f64 {
        self.envelope * (self.alpha[i] + self.op_rate[i][0])
    }

    /// Optical-pumping rate out of index `i` skipping `hops ∈ {1, 2}` sublevels.
    pub fn optical_pumping(&self, i: usize, hops: usize) -> f64 {
        self.envelope * self.op_rate[i][hops - 1]
    }

    /// Total excitation loss `Γ₁(t)` from index `i`.
    pub fn gamma1(&self, i: usize) -> f64 {
        self.envelope * self.coherence_loss[i]
    }

    fn neighbour(&self, i: usize, hops: i32, n: usize) -> Option<usize> {
        let j = i as i64 + i64::from(self.q * hops);
        (0..n as i64).contains(&j).then_some(j as usize)
    }

    fn populations_into(&self, p: &[f64], dp: &mut [f64]) {
        let n = p.len();
        dp.iter_mut().for_each(|d| *d = 0.0);
        for i in 0..n {
            if p[i] == 0.0 {
                continue;
            }
            if let Some(j) = self.neighbour(i, 1, n) {
                let flow = self.transfer(i) * p[i];
                dp[i] -= flow;
                dp[j] += flow;
            }
            if let Some(j) = self.neighbour(i, 2, n) {
                let flow = self.optical_pumping(i, 2) * p[i];
                dp[i] -= flow;
                dp[j] += flow;
            }
        }
    }

    /// Index of the sublevel the pump excites within the pair `(i, i+1)`.
    fn pumped_of_pair(&self, i: usize) -> usize {
        if self.q > 0 {
            i
        } else {
            i + 1
        }
    }

    fn coherence_rate(&self, pair: usize) -> f64 {
        let s = self.pumped_of_pair(pair);
        0.5 * self.envelope * (self.alpha[s] + self.coherence_loss[s])
    }

    fn flux(&self, p: &[f64]) -> f64 {
        self.envelope * p.iter().zip(self.alpha).map(|(p, a)| a * p.max(0.0)).sum::<f64>()
    }
}

/// Time derivative of populations and coherences.
pub fn rate_derivatives(state: &PopulationState, rates: &RateSet<'_>) -> PopulationState {
    let mut populations = vec![0.0; state.populations.len()];
    rates.populations_into(&state.populations, &mut populations);
    let coherences = state.coherences.iter().enumerate().map(|(i, c)| c * -rates.coherence_rate(i)).collect();
    PopulationState { populations, coherences, time: state.time }
}

/// Outgoing photon flux, photons/µs.
pub fn flux_at(state: &PopulationState, rates: &RateSet<'_>) -> f64 {
    rates.flux(&state.populations)
}

/// Initial ground-state preparation.
#[derive(Clone, Debug, PartialEq, Default)]
pub enum InitialState {
    /// The start of the first pulse's cascade: `-F` for σ⁺, `+F` for σ⁻.
    #[default]
    ChainStart,
    Sublevel(HalfInt),
    /// Populations in ascending `m_F`; must sum to 1.
    Populations(Vec<f64>),
}

impl InitialState {
    pub fn resolve(&self, atom: &AtomSpec, first: Polarization) -> Result<Vec<f64>> {
        let n = atom.sublevel_count();
        match self {
            InitialState::ChainStart => {
                let index = if first == Polarization::SigmaPlus { 0 } else { n - 1 };
                Ok(PopulationState::pure(n, index, 0.0).populations)
            }
            InitialState::Sublevel(m) => Ok(PopulationState::pure(n, atom.sublevel_index(*m)?, 0.0).populations),
            InitialState::Populations(p) => {
                if p.len() != n {
                    return Err(config_err!("initial populations need {n} entries, got {}", p.len()));
                }
                if p.iter().any(|x| !x.is_finite() || *x < 0.0) {
                    return Err(config_err!("initial populations must be non-negative"));
                }
                let total: f64 = p.iter().sum();
                if libm::fabs(total - 1.0) > 1e-12 {
                    return Err(config_err!("initial populations sum to {total}, not 1"));
                }
                Ok(p.clone())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimulationOptions {
    pub mode: CouplingMode,
    pub spontaneous_emission: bool,
    pub initial: InitialState,
    pub tolerances: Tolerances,
    /// Output samples per shortest pulse duration.
    pub points_per_duration: usize,
}

impl Default for SimulationOptions {
    fn default() -> Self {
        SimulationOptions {
            mode: CouplingMode::Actual,
            spontaneous_emission: true,
            initial: InitialState::ChainStart,
            tolerances: Tolerances::default(),
            points_per_duration: 2000,
        }
    }
}

/// Photons emitted during one pulse.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PulseCount {
    pub index: usize,
    pub polarization: Polarization,
    pub photons: f64,
}

/// Sampled trajectories of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct SimulationResult {
    pub sublevels: Vec<HalfInt>,
    pub times: Vec<f64>,
    /// Row-major `times.len() × sublevels.len()`.
    pub populations: Vec<f64>,
    /// Outgoing flux, photons/µs.
    pub flux: Vec<f64>,
    /// Cumulative photon number.
    pub n_out: Vec<f64>,
    pub pulse_counts: Vec<PulseCount>,
    pub validity: ValidityReport,
    /// Largest |coherence| seen at any sample.
    pub max_coherence: f64,
    pub mode: CouplingMode,
    pub spontaneous_emission: bool,
    pub stats: IntegratorStats,
}

impl SimulationResult {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn population_row(&self, sample: usize) -> &[f64] {
        let n = self.sublevels.len();
        &self.populations[sample * n..(sample + 1) * n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.populations.chunks_exact(self.sublevels.len().max(1))
    }

    pub fn final_photons(&self) -> f64 {
        self.n_out.last().copied().unwrap_or(0.0)
    }

    pub fn peak_flux(&self) -> (f64, f64) {
        self.times
            .iter()
            .zip(&self.flux)
            .fold((f64::NAN, 0.0), |best, (t, f)| if *f > best.1 { (*t, *f) } else { best })
    }

    /// Largest `|Σ σ − 1|` over all samples.
    pub fn max_population_error(&self) -> f64 {
        self.rows().map(|r| libm::fabs(r.iter().sum::<f64>() - 1.0)).fold(0.0, f64::max)
    }
}

/// Uniform output grid over `[start, end]` with at least `per_duration` samples per `duration`.
pub fn uniform_grid(start: f64, end: f64, duration: f64, per_duration: usize) -> Vec<f64> {
    let span = end - start;
    if span <= 0.0 {
        return vec![start];
    }
    let intervals = libm::ceil(span / duration * per_duration.max(1) as f64).max(1.0) as usize;
    (0..=intervals).map(|k| if k == intervals { end } else { start + span * k as f64 / intervals as f64 }).collect()
}

/// Integrates the rate equations over a pulse schedule.
pub fn integrate(
    atom: &AtomSpec,
    params: &PhysicalParams,
    schedule: &PulseSchedule,
    options: &SimulationOptions,
) -> Result<SimulationResult> {
    if schedule.is_empty() {
        return Err(config_err!("pulse schedule is empty"));
    }
    options.tolerances.validate()?;
    if options.points_per_duration == 0 {
        return Err(config_err!("points_per_duration must be positive"));
    }
    atom.validate()?;
    params.validate()?;

    let polarizations = [Polarization::SigmaPlus, Polarization::SigmaMinus];
    let mut tables: Vec<Option<CouplingTable>> = vec![None, None];
    for pulse in schedule.pulses() {
        let slot = polarizations.iter().position(|p| *p == pulse.polarization).unwrap();
        if tables[slot].is_none() {
            tables[slot] = Some(build_coupling_table(atom, params, pulse.polarization, options.mode)?);
        }
    }
    let rates: Vec<Option<PassRates>> =
        tables.iter().map(|t| t.as_ref().map(|t| PassRates::new(t, options.spontaneous_emission))).collect();
    let pass_of = |p: Polarization| rates[polarizations.iter().position(|x| *x == p).unwrap()].as_ref().unwrap();

    let shortest = schedule.shortest_duration().unwrap();
    let validity = {
        let mut rates_all: Option<crate::atom_model::DerivedRates> = None;
        for table in tables.iter().flatten() {
            let r = derived_rates(table, params);
            rates_all = Some(match rates_all {
                None => r,
                Some(mut acc) => {
                    acc.effective_coupling.extend(r.effective_coupling);
                    acc
                }
            });
        }
        validity_report(params, &rates_all.unwrap(), shortest)
    };

    let n = atom.sublevel_count();
    let pairs = n.saturating_sub(1);
    let dim = n + 1 + 2 * pairs;
    let mut y = vec![0.0; dim];
    y[..n].copy_from_slice(&options.initial.resolve(atom, schedule.pulses()[0].polarization)?);

    let (start, end) = schedule.span().unwrap();
    let times = uniform_grid(start, end, shortest, options.points_per_duration);
    let mut breaks: Vec<f64> = Vec::new();
    for p in schedule.pulses() {
        let (s, e) = p.shape.support();
        breaks.extend([s, e]);
        breaks.extend(p.shape.kinks());
    }
    breaks.sort_by(f64::total_cmp);

    let mut stepper = DormandPrince::new(dim, options.tolerances);
    let mut populations = Vec::with_capacity(times.len() * n);
    let mut flux = Vec::with_capacity(times.len());
    let mut n_out = Vec::with_capacity(times.len());
    let mut counts: Vec<PulseCount> = schedule
        .pulses()
        .iter()
        .enumerate()
        .map(|(index, p)| PulseCount { index, polarization: p.polarization, photons: 0.0 })
        .collect();
    let mut max_coherence = 0.0f64;

    let mut record = |t: f64, y: &[f64], populations: &mut Vec<f64>, flux: &mut Vec<f64>, n_out: &mut Vec<f64>| {
        populations.extend_from_slice(&y[..n]);
        n_out.push(y[n]);
        let f = match schedule.active_at(t) {
            Some(i) => {
                let pulse = &schedule.pulses()[i];
                pass_of(pulse.polarization).at(pulse.shape.envelope(t)).flux(&y[..n])
            }
            None => 0.0,
        };
        flux.push(f);
        for c in y[n + 1..].chunks_exact(2) {
            max_coherence = max_coherence.max(libm::hypot(c[0], c[1]));
        }
    };

    record(times[0], &y, &mut populations, &mut flux, &mut n_out);
    for w in times.windows(2) {
        let (a, b) = (w[0], w[1]);
        let lo = breaks.partition_point(|x| *x <= a);
        let hi = breaks.partition_point(|x| *x < b);
        let mut left = a;
        for right in breaks[lo..hi].iter().copied().chain(core::iter::once(b)) {
            if right <= left {
                continue;
            }
            if let Some(i) = schedule.active_at(0.5 * (left + right)) {
                let pulse = &schedule.pulses()[i];
                let pass = pass_of(pulse.polarization);
                let shape = &pulse.shape;
                let before = y[n];
                let mut rhs = |t: f64, y: &[f64], d: &mut [f64]| {
                    let r = pass.at(shape.envelope(t));
                    r.populations_into(&y[..n], &mut d[..n]);
                    d[n] = r.flux(&y[..n]);
                    for (k, (c, dc)) in y[n + 1..].chunks_exact(2).zip(d[n + 1..].chunks_exact_mut(2)).enumerate() {
                        let rate = r.coherence_rate(k);
                        dc[0] = -rate * c[0];
                        dc[1] = -rate * c[1];
                    }
                };
                stepper.advance(&mut rhs, left, right, &mut y)?;
                // The flux is nonnegative; undo sub-tolerance dips from the negative solution weight.
                y[n] = y[n].max(before);
                counts[i].photons += y[n] - before;
            }
            left = right;
        }
        record(b, &y, &mut populations, &mut flux, &mut n_out);
    }

    Ok(SimulationResult {
        sublevels: atom.sublevels().collect(),
        times,
        populations,
        flux,
        n_out,
        pulse_counts: counts,
        validity,
        max_coherence,
        mode: options.mode,
        spontaneous_emission: options.spontaneous_emission,
        stats: stepper.stats,
    })
}

/// Integrates an alternating σ⁺/σ⁻ train; each pulse is one cycle and
/// starts from the state the previous one left behind.
pub fn run_train(
    atom: &AtomSpec,
    params: &PhysicalParams,
    schedule: &PulseSchedule,
    options: &SimulationOptions,
) -> Result<SimulationResult> {
    if schedule.is_empty() {
        return Err(config_err!("a train needs at least one cycle"));
    }
    if !schedule.is_alternating() {
        return Err(config_err!("train pulses must alternate between sigma_plus and sigma_minus"));
    }
    integrate(atom, params, schedule, options)
}
