//! JSON run configuration, bundled presets and dot-path overrides.

use std::fmt;
use std::path::{Path, PathBuf};

use fockpulse_core::pulse::ScheduledPulse;
use fockpulse_core::{
    AtomSpec, CouplingMode, HalfInt, InitialState, PhysicalParams, Polarization, PulseSchedule, PulseShape,
    SimulationOptions, Tolerances,
};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;

use crate::error::{CliError, Result};
use crate::io::read_envelope_csv;

pub const BUILTIN_PREFIX: &str = "builtin:";

pub const BUILTINS: [(&str, &str); 3] = [
    ("fig2.config", include_str!("../configs/fig2.config")),
    ("fig3.config", include_str!("../configs/fig3.config")),
    ("cs_f4.config", include_str!("../configs/cs_f4.config")),
];

/// An angular momentum or projection written as `"3/2"`, `"-2"`, `1.5` or `2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Spin(pub HalfInt);

impl Serialize for Spin {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.to_string())
    }
}

impl<'de> Deserialize<'de> for Spin {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        let text = match Raw::deserialize(d)? {
            Raw::Number(x) => x.to_string(),
            Raw::Text(s) => s,
        };
        text.parse::<HalfInt>().map(Spin).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolarizationName {
    #[default]
    SigmaPlus,
    SigmaMinus,
}

impl From<PolarizationName> for Polarization {
    fn from(p: PolarizationName) -> Self {
        match p {
            PolarizationName::SigmaPlus => Polarization::SigmaPlus,
            PolarizationName::SigmaMinus => Polarization::SigmaMinus,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PulseKind {
    Gaussian,
    FlatTop,
    Tabulated,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomConfig {
    #[serde(default)]
    pub preset: Option<String>,
    #[serde(default)]
    pub j_ground: Option<Spin>,
    #[serde(default)]
    pub j_excited: Option<Spin>,
    #[serde(default)]
    pub nuclear_spin: Option<Spin>,
    #[serde(default)]
    pub f_ground: Option<Spin>,
    #[serde(default)]
    pub f_excited: Option<Spin>,
    #[serde(default)]
    pub label: Option<String>,
}

/// Frequencies in MHz. `times_2pi` has no default on purpose.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub times_2pi: bool,
    pub g: f64,
    pub k: f64,
    pub gamma_sp: f64,
    pub omega1: f64,
    #[serde(default)]
    pub omega2: Option<f64>,
    pub delta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseConfig {
    pub kind: PulseKind,
    /// Duration, µs.
    #[serde(rename = "T")]
    pub duration: f64,
    #[serde(default)]
    pub center: f64,
    /// Gap between neighbouring pulse supports in a train, µs. Defaults to 3T.
    #[serde(default)]
    pub delay: Option<f64>,
    #[serde(default)]
    pub samples_path: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseEntry {
    pub kind: PulseKind,
    #[serde(rename = "T")]
    pub duration: f64,
    pub center: f64,
    pub polarization: PolarizationName,
    #[serde(default)]
    pub samples_path: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Modes {
    #[serde(default)]
    pub uniform_couplings: bool,
    #[serde(default = "yes")]
    pub spontaneous_emission: bool,
}

impl Default for Modes {
    fn default() -> Self {
        Modes { uniform_couplings: false, spontaneous_emission: true }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    #[serde(default = "default_atol")]
    pub atol: f64,
    #[serde(default = "default_rtol")]
    pub rtol: f64,
    #[serde(default)]
    pub max_step: Option<f64>,
    #[serde(default = "default_points")]
    pub points_per_duration: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            atol: default_atol(),
            rtol: default_rtol(),
            max_step: None,
            points_per_duration: default_points(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub dir: String,
    #[serde(default = "yes")]
    pub svg: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: default_dir(), svg: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub atom: AtomConfig,
    pub params: ParamsConfig,
    pub pulse: PulseConfig,
    /// Explicit schedule; when absent a single `pulse` is used.
    #[serde(default)]
    pub pulses: Option<Vec<PulseEntry>>,
    #[serde(default)]
    pub polarization: PolarizationName,
    #[serde(default)]
    pub modes: Modes,
    #[serde(default)]
    pub initial_m_f: Option<Spin>,
    #[serde(default)]
    pub initial_populations: Option<Vec<f64>>,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(default = "default_cycles")]
    pub cycles: usize,
    /// Pump area to rescale to in the `analytic` command; the configured
    /// pulse sets it when absent.
    #[serde(default)]
    pub theta_max: Option<f64>,
    #[serde(default)]
    pub outputs: OutputConfig,
    /// Directory relative paths inside the document are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn yes() -> bool {
    true
}

fn default_atol() -> f64 {
    Tolerances::default().atol
}

fn default_rtol() -> f64 {
    Tolerances::default().rtol
}

fn default_points() -> usize {
    SimulationOptions::default().points_per_duration
}

fn default_dir() -> String {
    "out".into()
}

fn default_cycles() -> usize {
    1
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let text = serde_json::to_string_pretty(self).map_err(|_| fmt::Error)?;
        f.write_str(&text)
    }
}

/// Reads a configuration document from a path or a `builtin:` name.
pub fn read_source(source: &str) -> Result<(String, PathBuf)> {
    if let Some(name) = source.strip_prefix(BUILTIN_PREFIX) {
        let text = builtin(name).ok_or_else(|| {
            let names: Vec<_> = BUILTINS.iter().map(|(n, _)| *n).collect();
            CliError::Config(format!("unknown builtin config {name:?}; available: {}", names.join(", ")))
        })?;
        return Ok((text.to_string(), PathBuf::from(".")));
    }
    let path = Path::new(source);
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok((text, base))
}

pub fn builtin(name: &str) -> Option<&'static str> {
    BUILTINS.iter().find(|(n, _)| *n == name || n.trim_end_matches(".config") == name).map(|(_, t)| *t)
}

/// Loads, applies `key=value` overrides and normalizes a configuration.
pub fn load(source: &str, overrides: &[String]) -> Result<RunConfig> {
    let (text, base) = read_source(source)?;
    parse(&text, &base, overrides)
}

pub fn parse(text: &str, base_dir: &Path, overrides: &[String]) -> Result<RunConfig> {
    let raw: Value = serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid JSON: {e}")))?;
    let first = from_value(raw)?;
    let mut value = serde_json::to_value(&first).expect("config serializes");
    for entry in overrides {
        let (path, raw) = entry
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("override {entry:?} is not of the form key=value")))?;
        set_path(&mut value, path.trim(), parse_scalar(raw.trim()))?;
    }
    let mut config = from_value(value)?;
    config.base_dir = base_dir.to_path_buf();
    config.normalize();
    config.validate()?;
    Ok(config)
}

fn from_value(value: Value) -> Result<RunConfig> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        CliError::Config(format!("{path}: {}", e.into_inner()))
    })
}

/// Interprets an override value as JSON, falling back to a bare string.
pub fn parse_scalar(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()))
}

/// Replaces the value at a dot-separated path. Every segment must already
/// exist in the normalized document, which catches misspelt keys.
pub fn set_path(root: &mut Value, path: &str, new: Value) -> Result<()> {
    let unknown = || CliError::Config(format!("unknown parameter path {path:?}"));
    let mut node = root;
    for segment in path.split('.') {
        node = match node {
            Value::Object(map) => map.get_mut(segment).ok_or_else(unknown)?,
            Value::Array(items) => {
                let i: usize = segment.parse().map_err(|_| unknown())?;
                items.get_mut(i).ok_or_else(unknown)?
            }
            _ => return Err(unknown()),
        };
    }
    *node = new;
    Ok(())
}

impl RunConfig {
    /// Fills defaults that depend on other fields.
    fn normalize(&mut self) {
        if self.pulse.delay.is_none() {
            self.pulse.delay = Some(3.0 * self.pulse.duration);
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.atom()?;
        self.physical_params().validate()?;
        self.schedule()?;
        self.options()?.tolerances.validate()?;
        if self.integrator.points_per_duration == 0 {
            return Err(CliError::Config("integrator.points_per_duration must be positive".into()));
        }
        if self.cycles == 0 {
            return Err(CliError::Config("cycles must be at least 1".into()));
        }
        if let Some(theta) = self.theta_max {
            if !(theta.is_finite() && theta > 0.0) {
                return Err(CliError::Config(format!("theta_max must be positive, got {theta}")));
            }
        }
        if self.initial_m_f.is_some() && self.initial_populations.is_some() {
            return Err(CliError::Config("give at most one of initial_m_f and initial_populations".into()));
        }
        Ok(())
    }

    pub fn atom(&self) -> Result<AtomSpec> {
        let a = &self.atom;
        let explicit = [a.j_ground, a.j_excited, a.nuclear_spin, a.f_ground, a.f_excited];
        let spec = match &a.preset {
            Some(name) => {
                if explicit.iter().any(Option::is_some) {
                    return Err(CliError::Config(
                        "atom: give either a preset or explicit quantum numbers, not both".into(),
                    ));
                }
                AtomSpec::preset(name).ok_or_else(|| {
                    CliError::Config(format!(
                        "atom.preset: unknown preset {name:?}; available: {}",
                        AtomSpec::PRESET_NAMES.join(", ")
                    ))
                })?
            }
            None => {
                let [Some(jg), Some(je), Some(i), Some(fg), Some(fe)] = explicit else {
                    return Err(CliError::Config(
                        "atom: give a preset or all of j_ground, j_excited, nuclear_spin, f_ground, f_excited".into(),
                    ));
                };
                AtomSpec {
                    j_ground: jg.0,
                    j_excited: je.0,
                    nuclear_spin: i.0,
                    f_ground: fg.0,
                    f_excited: fe.0,
                    label: a.label.clone().unwrap_or_else(|| "custom".into()),
                }
            }
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn physical_params(&self) -> PhysicalParams {
        let p = &self.params;
        PhysicalParams::from_mhz(p.g, p.k, p.gamma_sp, p.omega1, p.omega2, p.delta, p.times_2pi)
    }

    fn shape(
        &self,
        kind: PulseKind,
        duration: f64,
        center: f64,
        samples: Option<&str>,
        field: &str,
    ) -> Result<PulseShape> {
        let shape = match kind {
            PulseKind::Gaussian => PulseShape::gaussian(duration, center)?,
            PulseKind::FlatTop => PulseShape::flat_top(duration, center)?,
            PulseKind::Tabulated => {
                let path = samples.ok_or_else(|| {
                    CliError::Config(format!("{field}.samples_path is required for tabulated pulses"))
                })?;
                PulseShape::tabulated(read_envelope_csv(&self.base_dir.join(path))?, center)?
            }
        };
        Ok(shape)
    }

    /// Envelope of the configured `pulse`.
    pub fn template(&self) -> Result<PulseShape> {
        let p = &self.pulse;
        self.shape(p.kind, p.duration, p.center, p.samples_path.as_deref(), "pulse")
    }

    /// Pulse sequence for a plain simulation run.
    pub fn schedule(&self) -> Result<PulseSchedule> {
        match &self.pulses {
            Some(entries) => {
                if entries.is_empty() {
                    return Err(CliError::Config("pulses: schedule is empty".into()));
                }
                let pulses = entries
                    .iter()
                    .enumerate()
                    .map(|(i, e)| {
                        let shape = self.shape(
                            e.kind,
                            e.duration,
                            e.center,
                            e.samples_path.as_deref(),
                            &format!("pulses.{i}"),
                        )?;
                        Ok(ScheduledPulse { shape, polarization: e.polarization.into() })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(PulseSchedule::new(pulses)?)
            }
            None => Ok(PulseSchedule::single(self.template()?, self.polarization.into())),
        }
    }

    /// Alternating σ⁺/σ⁻ train built from `pulse`, one pulse per cycle.
    pub fn train_schedule(&self, cycles: usize) -> Result<PulseSchedule> {
        if cycles == 0 {
            return Err(CliError::Config("cycles must be at least 1".into()));
        }
        let delay = self.pulse.delay.unwrap_or(3.0 * self.pulse.duration);
        Ok(PulseSchedule::alternating(&self.template()?, self.polarization.into(), cycles, delay)?)
    }

    pub fn options(&self) -> Result<SimulationOptions> {
        let initial = match (&self.initial_m_f, &self.initial_populations) {
            (Some(m), _) => InitialState::Sublevel(m.0),
            (None, Some(p)) => InitialState::Populations(p.clone()),
            (None, None) => InitialState::ChainStart,
        };
        let i = &self.integrator;
        Ok(SimulationOptions {
            mode: if self.modes.uniform_couplings { CouplingMode::Uniform } else { CouplingMode::Actual },
            spontaneous_emission: self.modes.spontaneous_emission,
            initial,
            tolerances: Tolerances { atol: i.atol, rtol: i.rtol, max_step: i.max_step },
            points_per_duration: i.points_per_duration,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig3() -> RunConfig {
        load("builtin:fig3.config", &[]).unwrap()
    }

    #[test]
    fn builtins_parse() {
        for (name, _) in BUILTINS {
            let c = load(&format!("{BUILTIN_PREFIX}{name}"), &[]).unwrap();
            assert!(c.pulse.delay.is_some());
        }
        assert!(load("builtin:fig3", &[]).is_ok());
        assert!(matches!(load("builtin:nope", &[]), Err(CliError::Config(_))));
    }

    #[test]
    fn effective_config_round_trips() {
        let c = fig3();
        let again = parse(&c.to_string(), &c.base_dir, &[]).unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn overrides_reach_nested_fields() {
        let c =
            load("builtin:fig3.config", &["params.omega1=20".into(), "modes.uniform_couplings=true".into()]).unwrap();
        assert_eq!(c.params.omega1, 20.0);
        assert!(c.modes.uniform_couplings);
        let c = load("builtin:fig3.config", &["initial_m_f=\"-1\"".into(), "pulse.T=2".into()]).unwrap();
        assert_eq!(c.initial_m_f, Some(Spin(HalfInt::from_int(-1))));
        assert_eq!(c.pulse.duration, 2.0);
    }

    #[test]
    fn unknown_override_path_is_config_error() {
        let err = load("builtin:fig3.config", &["params.omega3=1".into()]).unwrap_err();
        assert!(err.to_string().contains("params.omega3"));
        assert!(load("builtin:fig3.config", &["params".into()]).is_err());
    }

    #[test]
    fn errors_name_the_field() {
        let mut v = serde_json::to_value(fig3()).unwrap();
        v["params"].as_object_mut().unwrap().remove("times_2pi");
        let err = parse(&v.to_string(), Path::new("."), &[]).unwrap_err();
        assert!(err.to_string().contains("params"), "{err}");
        let mut v = serde_json::to_value(fig3()).unwrap();
        v["pulse"]["T"] = serde_json::json!("three");
        let err = parse(&v.to_string(), Path::new("."), &[]).unwrap_err();
        assert!(err.to_string().contains("pulse.T"), "{err}");
    }

    #[test]
    fn atom_needs_exactly_one_form() {
        let mut c = fig3();
        c.atom.f_ground = Some(Spin(HalfInt::from_int(2)));
        assert!(c.atom().is_err());
        c.atom.preset = None;
        assert!(c.atom().is_err());
        c.atom = AtomConfig {
            preset: None,
            j_ground: Some(Spin(HalfInt::HALF)),
            j_excited: Some(Spin(HalfInt::from_twice(3))),
            nuclear_spin: Some(Spin(HalfInt::from_twice(3))),
            f_ground: Some(Spin(HalfInt::from_int(2))),
            f_excited: Some(Spin(HalfInt::from_int(3))),
            label: None,
        };
        assert_eq!(c.atom().unwrap().sublevel_count(), 5);
    }

    #[test]
    fn spins_accept_numbers_and_fractions() {
        let s: Spin = serde_json::from_str("\"3/2\"").unwrap();
        assert_eq!(s.0, HalfInt::from_twice(3));
        let s: Spin = serde_json::from_str("-1.5").unwrap();
        assert_eq!(s.0, HalfInt::from_twice(-3));
        let s: Spin = serde_json::from_str("2").unwrap();
        assert_eq!(s.0, HalfInt::from_int(2));
        assert!(serde_json::from_str::<Spin>("0.3").is_err());
    }

    #[test]
    fn empty_pulse_list_is_rejected() {
        assert!(matches!(load("builtin:fig3.config", &["pulses=[]".into()]), Err(CliError::Config(_))));
    }
}
