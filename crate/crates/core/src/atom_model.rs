//! Atom description, Zeeman transition-coefficient tables and derived rates.
//!
//! Frequencies are angular frequencies in rad/µs throughout, times in µs.

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::TAU;
use core::fmt;

use crate::angular_momentum::{triangle, wigner_3j, wigner_6j, HalfInt, SymbolValue};
use crate::error::{config_err, Result};

/// Hyperfine transition chain `J, I -> F` (ground) and `J', I -> F'` (excited).
#[derive(Clone, Debug, PartialEq)]
pub struct AtomSpec {
    pub j_ground: HalfInt,
    pub j_excited: HalfInt,
    pub nuclear_spin: HalfInt,
    pub f_ground: HalfInt,
    pub f_excited: HalfInt,
    pub label: String,
}

impl AtomSpec {
    /// ⁸⁷Rb D2 cycling chain 5S½(F=2) ↔ 5P3/2(F'=3).
    pub fn rb87_d2() -> Self {
        Self::d2_line(HalfInt::from_twice(3), 2, 3, "87Rb 5S1/2(F=2) -> 5P3/2(F'=3)")
    }

    /// ¹³³Cs D2 cycling chain 6S½(F=4) ↔ 6P3/2(F'=5).
    pub fn cs133_d2_f4() -> Self {
        Self::d2_line(HalfInt::from_twice(7), 4, 5, "133Cs 6S1/2(F=4) -> 6P3/2(F'=5)")
    }

    /// ¹³³Cs D2 chain 6S½(F=3) ↔ 6P3/2(F'=2).
    pub fn cs133_d2_f3() -> Self {
        Self::d2_line(HalfInt::from_twice(7), 3, 2, "133Cs 6S1/2(F=3) -> 6P3/2(F'=2)")
    }

    fn d2_line(nuclear_spin: HalfInt, f: i32, f_excited: i32, label: &str) -> Self {
        AtomSpec {
            j_ground: HalfInt::HALF,
            j_excited: HalfInt::from_twice(3),
            nuclear_spin,
            f_ground: HalfInt::from_int(f),
            f_excited: HalfInt::from_int(f_excited),
            label: label.into(),
        }
    }

    /// Looks up a bundled atom by name.
    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "rb87_f2_f3" => Some(Self::rb87_d2()),
            "cs133_f4_f5" => Some(Self::cs133_d2_f4()),
            "cs133_f3_f2" => Some(Self::cs133_d2_f3()),
            _ => None,
        }
    }

    pub const PRESET_NAMES: [&'static str; 3] = ["rb87_f2_f3", "cs133_f4_f5", "cs133_f3_f2"];

    pub fn validate(&self) -> Result<()> {
        for (name, j) in [
            ("J", self.j_ground),
            ("J_excited", self.j_excited),
            ("I", self.nuclear_spin),
            ("F", self.f_ground),
            ("F_excited", self.f_excited),
        ] {
            if j.twice() < 0 {
                return Err(config_err!("atom.{name} = {j} is negative"));
            }
        }
        if !triangle(self.j_ground, self.nuclear_spin, self.f_ground) {
            return Err(config_err!(
                "atom.F = {} is not in the triangle of J = {} and I = {}",
                self.f_ground,
                self.j_ground,
                self.nuclear_spin
            ));
        }
        if !triangle(self.j_excited, self.nuclear_spin, self.f_excited) {
            return Err(config_err!(
                "atom.F_excited = {} is not in the triangle of J_excited = {} and I = {}",
                self.f_excited,
                self.j_excited,
                self.nuclear_spin
            ));
        }
        if !triangle(self.j_ground, self.j_excited, HalfInt::ONE) {
            return Err(config_err!(
                "J = {} -> J_excited = {} is not a dipole transition",
                self.j_ground,
                self.j_excited
            ));
        }
        if !triangle(self.f_ground, self.f_excited, HalfInt::ONE) {
            return Err(config_err!(
                "F = {} -> F_excited = {} is not a dipole transition",
                self.f_ground,
                self.f_excited
            ));
        }
        Ok(())
    }

    pub fn sublevel_count(&self) -> usize {
        self.f_ground.multiplicity() as usize
    }

    /// Ground sublevels in ascending order.
    pub fn sublevels(&self) -> impl DoubleEndedIterator<Item = HalfInt> + Clone {
        self.f_ground.projections()
    }

    /// Index of the ground sublevel `m` in ascending order.
    pub fn sublevel_index(&self, m: HalfInt) -> Result<usize> {
        self.f_ground
            .check_projection(m)
            .map_err(|_| config_err!("m_F = {m} is not a sublevel of F = {}", self.f_ground))?;
        Ok(((m.twice() + self.f_ground.twice()) / 2) as usize)
    }

    /// Largest photon number one pass can emit, `2F`.
    pub fn max_photons(&self) -> usize {
        self.f_ground.twice() as usize
    }
}

/// Circular polarization of a pump pulse.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Polarization {
    SigmaPlus,
    SigmaMinus,
}

impl Polarization {
    /// Change of `m_F` driven by the pump, `q = ±1`.
    pub fn q(self) -> i32 {
        match self {
            Polarization::SigmaPlus => 1,
            Polarization::SigmaMinus => -1,
        }
    }

    pub fn opposite(self) -> Self {
        match self {
            Polarization::SigmaPlus => Polarization::SigmaMinus,
            Polarization::SigmaMinus => Polarization::SigmaPlus,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Polarization::SigmaPlus => "sigma_plus",
            Polarization::SigmaMinus => "sigma_minus",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "sigma_plus" | "sigma+" | "s+" => Some(Polarization::SigmaPlus),
            "sigma_minus" | "sigma-" | "s-" => Some(Polarization::SigmaMinus),
            _ => None,
        }
    }
}

impl fmt::Display for Polarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Whether angular factors come from the 3-j/6-j coefficients or are all set to 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum CouplingMode {
    #[default]
    Actual,
    Uniform,
}

/// Scalar rates of the model, all in rad/µs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysicalParams {
    pub g: f64,
    pub k: f64,
    pub gamma_sp: f64,
    pub omega1: f64,
    /// Peak Rabi frequency of σ⁻ pulses; falls back to `omega1` when absent.
    pub omega2: Option<f64>,
    pub delta: f64,
}

impl PhysicalParams {
    /// Builds parameters from frequencies quoted in MHz. With `times_2pi` the
    /// values are ordinary frequencies ν and become 2πν; otherwise they are
    /// already angular frequencies in 10⁶ rad/s.
    pub fn from_mhz(
        g: f64,
        k: f64,
        gamma_sp: f64,
        omega1: f64,
        omega2: Option<f64>,
        delta: f64,
        times_2pi: bool,
    ) -> Self {
        let s = if times_2pi { TAU } else { 1.0 };
        PhysicalParams {
            g: g * s,
            k: k * s,
            gamma_sp: gamma_sp * s,
            omega1: omega1 * s,
            omega2: omega2.map(|w| w * s),
            delta: delta * s,
        }
    }

    /// Rejects non-positive or non-finite rates. A zero pump is allowed.
    pub fn validate(&self) -> Result<()> {
        let strictly = [("g", self.g), ("k", self.k), ("gamma_sp", self.gamma_sp), ("delta", self.delta)];
        for (name, v) in strictly {
            if !(v.is_finite() && v > 0.0) {
                return Err(config_err!("params.{name} must be positive, got {v}"));
            }
        }
        let pumps = [("omega1", Some(self.omega1)), ("omega2", self.omega2)];
        for (name, v) in pumps {
            if let Some(v) = v {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(config_err!("params.{name} must be non-negative, got {v}"));
                }
            }
        }
        Ok(())
    }

    /// Peak pump Rabi frequency for the given polarization.
    pub fn omega(&self, polarization: Polarization) -> f64 {
        match polarization {
            Polarization::SigmaPlus => self.omega1,
            Polarization::SigmaMinus => self.omega2.unwrap_or(self.omega1),
        }
    }

    /// `4g²/(kγ_sp)`.
    pub fn signal_to_noise(&self) -> f64 {
        4.0 * self.g * self.g / (self.k * self.gamma_sp)
    }
}

/// Pump coupling `|F, m> -> |F', m + q>`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PumpCoupling {
    pub ground: HalfInt,
    pub excited: HalfInt,
    /// Angular factor multiplying the peak Rabi frequency.
    pub factor: SymbolValue,
    /// Peak Rabi frequency of this transition, rad/µs.
    pub rabi: f64,
}

/// Cavity (π) coupling `|F', m> <-> |F, m>`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CavityCoupling {
    pub sublevel: HalfInt,
    pub factor: SymbolValue,
    pub coupling: f64,
}

/// Spontaneous-decay channel `|F', m'> -> |F, m>` with `q = m - m'`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayChannel {
    pub excited: HalfInt,
    pub ground: HalfInt,
    pub q: i32,
    /// Branching factor multiplying `γ_sp`.
    pub branching: f64,
    pub is_exact_zero: bool,
    pub rate: f64,
}

/// Coefficient table for one pump polarization.
///
/// Per-sublevel vectors are indexed by ground sublevel in ascending `m_F`.
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingTable {
    pub atom: AtomSpec,
    pub polarization: Polarization,
    pub mode: CouplingMode,
    /// Pump couplings for every ground sublevel whose excited partner exists.
    pub pump: Vec<PumpCoupling>,
    /// Cavity couplings for every ground sublevel (zero where `|m| > F'`).
    pub cavity: Vec<CavityCoupling>,
    /// All decay channels of the excited manifold with `q ∈ {-1, 0, +1}`.
    pub decay: Vec<DecayChannel>,
    /// Effective Raman coupling of the step `m -> m + q`.
    pub effective_coupling: Vec<f64>,
    /// Photon-generation rate `4G²/k` of the step `m -> m + q`.
    pub alpha: Vec<f64>,
    /// Peak optical-pumping rates from `m` into `m + q` and `m + 2q`.
    pub op_rate: Vec<[f64; 2]>,
    /// Peak excitation-loss rate `Ω_m²/Δ² γ_sp` entering the coherence decay.
    pub coherence_loss: Vec<f64>,
}

impl CouplingTable {
    pub fn sublevels(&self) -> impl DoubleEndedIterator<Item = HalfInt> + Clone {
        self.atom.sublevels()
    }

    /// Pump coupling starting from ground sublevel `m`, if it exists.
    pub fn pump_from(&self, m: HalfInt) -> Option<&PumpCoupling> {
        self.pump.iter().find(|p| p.ground == m)
    }

    /// Indices (ascending `m_F`) of the sublevels from which a Raman step emits a cavity photon.
    pub fn raman_steps(&self) -> impl Iterator<Item = usize> + '_ {
        self.alpha.iter().enumerate().filter(|(_, a)| **a > 0.0).map(|(i, _)| i)
    }

    /// Decay rate from excited `m'` into ground `m`, zero when the channel does not exist.
    pub fn decay_rate(&self, excited: HalfInt, ground: HalfInt) -> f64 {
        self.decay.iter().find(|d| d.excited == excited && d.ground == ground).map_or(0.0, |d| d.rate)
    }
}

fn in_manifold(f: HalfInt, m: HalfInt) -> bool {
    m.twice().abs() <= f.twice() && (f.twice() - m.twice()) % 2 == 0
}

struct AngularFactors<'a> {
    atom: &'a AtomSpec,
    six_j: SymbolValue,
    mode: CouplingMode,
}

impl AngularFactors<'_> {
    fn dipole(&self, m: HalfInt, q: i32, m_excited: HalfInt) -> Result<SymbolValue> {
        if !in_manifold(self.atom.f_excited, m_excited) || !in_manifold(self.atom.f_ground, m) {
            return Ok(SymbolValue::ZERO);
        }
        if self.mode == CouplingMode::Uniform {
            return Ok(SymbolValue { value: 1.0, is_exact_zero: false });
        }
        let a = self.atom;
        let three_j = wigner_3j(a.f_ground, HalfInt::ONE, a.f_excited, m, HalfInt::from_int(q), -m_excited)?;
        if three_j.is_exact_zero || self.six_j.is_exact_zero {
            return Ok(SymbolValue::ZERO);
        }
        let norm = f64::from(a.f_ground.multiplicity() * a.f_excited.multiplicity() * a.j_ground.multiplicity());
        // (-1)^(m + J + I); the exponent is an integer for a valid atom
        let phase = (m + a.j_ground + a.nuclear_spin).twice() / 2;
        let sign = if phase.rem_euclid(2) == 1 { -1.0 } else { 1.0 };
        Ok(SymbolValue { value: sign * libm::sqrt(norm) * three_j.value * self.six_j.value, is_exact_zero: false })
    }

    fn branching(&self, m_excited: HalfInt, m: HalfInt) -> Result<(f64, bool)> {
        let q = (m - m_excited).twice() / 2;
        if !in_manifold(self.atom.f_excited, m_excited) || !in_manifold(self.atom.f_ground, m) {
            return Ok((0.0, true));
        }
        if self.mode == CouplingMode::Uniform {
            return Ok((1.0, false));
        }
        let a = self.atom;
        let three_j = wigner_3j(a.f_ground, HalfInt::ONE, a.f_excited, m, HalfInt::from_int(-q), -m_excited)?;
        if three_j.is_exact_zero || self.six_j.is_exact_zero {
            return Ok((0.0, true));
        }
        let norm = f64::from(a.f_ground.multiplicity() * a.f_excited.multiplicity() * a.j_excited.multiplicity());
        let x = three_j.value * self.six_j.value;
        Ok((norm * x * x, false))
    }
}

/// Builds the coupling table for one pump polarization.
///
/// For σ⁻ the pump drives `q = -1`; the table is the mirror image of the σ⁺
/// table under `m -> -m`.
pub fn build_coupling_table(
    atom: &AtomSpec,
    params: &PhysicalParams,
    polarization: Polarization,
    mode: CouplingMode,
) -> Result<CouplingTable> {
    atom.validate()?;
    params.validate()?;
    let six_j =
        wigner_6j(atom.j_ground, atom.j_excited, HalfInt::ONE, atom.f_excited, atom.f_ground, atom.nuclear_spin)?;
    let factors = AngularFactors { atom, six_j, mode };
    let q = polarization.q();
    let step = HalfInt::from_int(q);
    let omega = params.omega(polarization);

    let mut pump = Vec::new();
    let mut cavity = Vec::new();
    for m in atom.sublevels() {
        let excited = m + step;
        if in_manifold(atom.f_excited, excited) {
            let factor = factors.dipole(m, q, excited)?;
            pump.push(PumpCoupling { ground: m, excited, factor, rabi: factor.value * omega });
        }
        let factor = factors.dipole(m, 0, m)?;
        cavity.push(CavityCoupling { sublevel: m, factor, coupling: factor.value * params.g });
    }

    let mut decay = Vec::new();
    for excited in atom.f_excited.projections() {
        for dq in [-1, 0, 1] {
            let ground = excited + HalfInt::from_int(dq);
            if !in_manifold(atom.f_ground, ground) {
                continue;
            }
            let (branching, is_exact_zero) = factors.branching(excited, ground)?;
            decay.push(DecayChannel {
                excited,
                ground,
                q: dq,
                branching,
                is_exact_zero,
                rate: branching * params.gamma_sp,
            });
        }
    }

    let n = atom.sublevel_count();
    let mut effective_coupling = alloc::vec![0.0; n];
    let mut alpha = alloc::vec![0.0; n];
    let mut op_rate = alloc::vec![[0.0; 2]; n];
    let mut coherence_loss = alloc::vec![0.0; n];
    let rabi_of = |m: HalfInt| pump.iter().find(|p| p.ground == m).map_or(0.0, |p| p.rabi);
    for (i, m) in atom.sublevels().enumerate() {
        let rabi = rabi_of(m);
        let excited = m + step;
        let pumped = rabi * rabi / (params.delta * params.delta);
        coherence_loss[i] = pumped * params.gamma_sp;

        let next = m + step;
        if in_manifold(atom.f_ground, next) {
            let g_next = cavity[atom.sublevel_index(next)?].coupling;
            let coupling = g_next * rabi / params.delta;
            effective_coupling[i] = coupling;
            alpha[i] = 4.0 * coupling * coupling / params.k;
        }
        for (slot, hops) in [(0usize, 1), (1, 2)] {
            let target = m + HalfInt::from_int(q * hops);
            if in_manifold(atom.f_ground, target) && in_manifold(atom.f_excited, excited) {
                let (branching, _) = factors.branching(excited, target)?;
                op_rate[i][slot] = pumped * branching * params.gamma_sp;
            }
        }
    }

    Ok(CouplingTable {
        atom: atom.clone(),
        polarization,
        mode,
        pump,
        cavity,
        decay,
        effective_coupling,
        alpha,
        op_rate,
        coherence_loss,
    })
}

/// Scalar summary of a coupling table.
#[derive(Clone, Debug, PartialEq)]
pub struct DerivedRates {
    /// Effective Raman coupling per ground sublevel, rad/µs.
    pub effective_coupling: Vec<f64>,
    /// Photon-generation rate per ground sublevel, rad/µs.
    pub alpha: Vec<f64>,
    /// `Ω²/Δ²` with the bare peak Rabi frequency; `Γ₁ = factor · γ_sp · f(t)`.
    pub gamma1_factor: f64,
    /// Signal-to-noise ratio `4g²/(kγ_sp)` from the bare couplings.
    pub signal_to_noise: f64,
}

pub fn derived_rates(table: &CouplingTable, params: &PhysicalParams) -> DerivedRates {
    let omega = params.omega(table.polarization);
    DerivedRates {
        effective_coupling: table.effective_coupling.clone(),
        alpha: table.alpha.clone(),
        gamma1_factor: omega * omega / (params.delta * params.delta),
        signal_to_noise: params.signal_to_noise(),
    }
}

/// Outcome of one regime-of-validity check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ValidityCheck {
    pub name: &'static str,
    pub ratio: f64,
    pub threshold: f64,
    /// `true` when `ratio` must stay at or above `threshold`, `false` for at or below.
    pub lower_bound: bool,
    pub passed: bool,
}

impl ValidityCheck {
    fn new(name: &'static str, ratio: f64, threshold: f64, lower_bound: bool) -> Self {
        let passed = if lower_bound { ratio >= threshold } else { ratio <= threshold };
        ValidityCheck { name, ratio, threshold, lower_bound, passed }
    }
}

/// Checks of the approximations behind the rate equations. Never fatal.
#[derive(Clone, Debug, PartialEq)]
pub struct ValidityReport {
    pub checks: Vec<ValidityCheck>,
}

impl ValidityReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&ValidityCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

pub const FAR_DETUNING_MIN: f64 = 10.0;
pub const ADIABATIC_COUPLING_MAX: f64 = 0.3;
pub const CAVITY_ELIMINATION_MIN: f64 = 10.0;
pub const SIGNAL_TO_NOISE_MIN: f64 = 10.0;

/// Evaluates the far-detuning, weak-coupling, cavity-elimination and
/// signal-to-noise conditions. `pulse_duration` is the shortest pulse `T` in µs.
pub fn validity_report(params: &PhysicalParams, rates: &DerivedRates, pulse_duration: f64) -> ValidityReport {
    let omega_max = params.omega1.max(params.omega2.unwrap_or(0.0));
    let fastest = params.k.max(params.gamma_sp).max(omega_max);
    let g_max = rates.effective_coupling.iter().fold(0.0f64, |acc, g| acc.max(g.abs()));
    ValidityReport {
        checks: alloc::vec![
            ValidityCheck::new("far_detuning", params.delta / fastest, FAR_DETUNING_MIN, true),
            ValidityCheck::new("adiabatic_coupling", g_max / params.k, ADIABATIC_COUPLING_MAX, false),
            ValidityCheck::new("cavity_elimination", params.k * pulse_duration, CAVITY_ELIMINATION_MIN, true),
            ValidityCheck::new("signal_to_noise", rates.signal_to_noise, SIGNAL_TO_NOISE_MIN, true),
        ],
    }
}
