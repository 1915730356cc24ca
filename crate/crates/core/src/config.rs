//! Scenario file format.
//!
//! Scenarios are TOML documents in which every dimensional value is a string
//! `"<number> <unit>"`. Angular quantities (detunings, decay rates, jitter)
//! accept cyclic units (`Hz`, `kHz`, `MHz`, `GHz`, multiplied by 2π) or
//! `rad/s`. Carrier frequencies accept cyclic units only and stay in Hz.
//! Dimensionless values (ε, antenna gain, atom count, pilot count) are bare
//! numbers. See `configs/default.toml` and the README for the full grammar.
//!
//! [`ScenarioConfig::to_toml`] writes a canonical SI form whose floats use the
//! shortest round-trip representation, so parsing it back yields an identical
//! config. The SHA-256 of that canonical form is the provenance digest.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::constants::E_A0;
use crate::error::{Error, Result};
use crate::ladder::LadderConfig;
use crate::link::{CalibrationSettings, ConventionalRxSpec, PamLinkConfig, SymbolEnergyMode};
use crate::noise::NoiseSpec;
use crate::quantum::{DecaySpec, LevelScheme, PerField};
use crate::spectroscopy::{linear_grid, Engine};

/// Physical dimension of a quantity string.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    /// rad/s; cyclic units are scaled by 2π.
    Angular,
    /// Hz.
    Frequency,
    /// V/m.
    Field,
    /// C·m.
    Dipole,
    /// m.
    Length,
    /// s.
    Time,
    /// m⁻³.
    Density,
    /// K.
    Temperature,
    /// Ω.
    Impedance,
    /// dB.
    Decibel,
    /// Percent.
    Percent,
}

impl Dimension {
    fn units(self) -> &'static [(&'static str, f64)] {
        const TAU: f64 = 2.0 * PI;
        match self {
            Dimension::Angular => &[
                ("rad/s", 1.0),
                ("krad/s", 1e3),
                ("Mrad/s", 1e6),
                ("Grad/s", 1e9),
                ("Hz", TAU),
                ("kHz", TAU * 1e3),
                ("MHz", TAU * 1e6),
                ("GHz", TAU * 1e9),
            ],
            Dimension::Frequency => &[("Hz", 1.0), ("kHz", 1e3), ("MHz", 1e6), ("GHz", 1e9)],
            Dimension::Field => &[
                ("V/m", 1.0),
                ("kV/m", 1e3),
                ("mV/m", 1e-3),
                ("uV/m", 1e-6),
                ("μV/m", 1e-6),
                ("V/cm", 1e2),
                ("mV/cm", 1e-1),
                ("uV/cm", 1e-4),
                ("μV/cm", 1e-4),
                ("nV/cm", 1e-7),
            ],
            Dimension::Dipole => &[("C*m", 1.0), ("C·m", 1.0), ("ea0", E_A0)],
            Dimension::Length => &[
                ("m", 1.0),
                ("cm", 1e-2),
                ("mm", 1e-3),
                ("um", 1e-6),
                ("μm", 1e-6),
                ("nm", 1e-9),
            ],
            Dimension::Time => &[("s", 1.0), ("ms", 1e-3), ("us", 1e-6), ("μs", 1e-6), ("ns", 1e-9)],
            Dimension::Density => &[("m^-3", 1.0), ("cm^-3", 1e6)],
            Dimension::Temperature => &[("K", 1.0)],
            Dimension::Impedance => &[("ohm", 1.0), ("Ω", 1.0)],
            Dimension::Decibel => &[("dB", 1.0)],
            Dimension::Percent => &[("%", 1.0)],
        }
    }

    /// Unit written by the canonical serializer.
    pub fn si_unit(self) -> &'static str {
        self.units()[0].0
    }
}

/// Parses `"<number> <unit>"` into the SI value of `dim`.
pub fn parse_quantity(text: &str, dim: Dimension) -> std::result::Result<f64, String> {
    let text = text.trim();
    let split = text
        .find(char::is_whitespace)
        .ok_or_else(|| format!("`{text}` has no unit; expected e.g. `1 {}`", dim.si_unit()))?;
    let (num, unit) = (&text[..split], text[split..].trim());
    let value: f64 = num.parse().map_err(|_| format!("`{num}` is not a number"))?;
    if !value.is_finite() {
        return Err(format!("`{num}` is not finite"));
    }
    let factor = dim
        .units()
        .iter()
        .find(|(u, _)| *u == unit)
        .map(|(_, f)| *f)
        .ok_or_else(|| {
            let known: Vec<&str> = dim.units().iter().map(|(u, _)| *u).collect();
            format!("unknown unit `{unit}`; expected one of {}", known.join(", "))
        })?;
    Ok(value * factor)
}

/// Canonical SI rendering of a quantity.
pub fn format_quantity(value: f64, dim: Dimension) -> String {
    format!("{value:?} {}", dim.si_unit())
}

/// Uniform sweep grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn values(&self) -> Vec<f64> {
        linear_grid(self.min, self.max, self.points)
    }
}

/// Spectrum command settings.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSettings {
    /// Coupling detuning grid, rad/s.
    pub grid: GridSpec,
    /// Interference fields for the interference sweep, V/m.
    pub interference_sweep: Vec<f64>,
}

/// SER table settings.
#[derive(Debug, Clone, PartialEq)]
pub struct SerSettings {
    pub symbols: u64,
    /// Calibration accuracies for the Rydberg rows, percent.
    pub accuracies: Vec<f64>,
    /// Filter attenuations for the conventional rows, dB.
    pub attenuations: Vec<f64>,
}

/// Everything a command needs, in SI units.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub engine: Engine,
    pub ladder: LadderConfig,
    pub noise: NoiseSpec,
    pub link: PamLinkConfig,
    pub conventional: ConventionalRxSpec,
    pub calibration_grid: GridSpec,
    pub pilots: usize,
    pub jitter_sigma: Option<f64>,
    pub spectrum: SpectrumSettings,
    pub ser: SerSettings,
}

impl ScenarioConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::ConfigParse(e.to_string()))?;
        raw.into_config()
    }

    /// Canonical SI serialization.
    pub fn to_toml(&self) -> String {
        let raw = RawConfig::from_config(self);
        toml::to_string(&raw).expect("scenario serializes to TOML")
    }

    /// Hex SHA-256 of the canonical serialization.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }

    pub fn calibration_settings(&self) -> CalibrationSettings {
        CalibrationSettings {
            pilots: self.pilots,
            grid: self.calibration_grid.values(),
            jitter_sigma: self.jitter_sigma,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

fn invalid(path: &str, reason: impl Into<String>) -> Error {
    Error::ConfigValidation {
        path: path.to_string(),
        reason: reason.into(),
    }
}

fn quantity(path: &str, text: &str, dim: Dimension) -> Result<f64> {
    parse_quantity(text, dim).map_err(|r| invalid(path, r))
}

fn quantities(path: &str, texts: &[String], dim: Dimension) -> Result<Vec<f64>> {
    texts
        .iter()
        .enumerate()
        .map(|(i, t)| quantity(&format!("{path}[{i}]"), t, dim))
        .collect()
}

fn render(values: &[f64], dim: Dimension) -> Vec<String> {
    values.iter().map(|&v| format_quantity(v, dim)).collect()
}

/// Re-labels a module-level invariant error with the file path of the
/// offending table.
fn at_path(table: &'static str) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::InvalidParameter { name, reason } => invalid(&format!("{table}.{name}"), reason),
        other => invalid(table, other.to_string()),
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    seed: u64,
    #[serde(default)]
    engine: Option<String>,
    levels: RawLevels,
    decay: RawDecay,
    fields: RawPerField,
    detuning: RawPerField,
    cell: RawCell,
    noise: RawNoise,
    link: RawLink,
    conventional: RawConventional,
    calibration: RawCalibration,
    spectrum: RawSpectrum,
    ser: RawSer,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLevels {
    probe_wavelength: String,
    dipoles: RawDipoles,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDipoles {
    probe: Option<String>,
    coupling: Option<String>,
    rf: Option<String>,
    interference: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDecay {
    gamma: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPerField {
    probe: String,
    coupling: String,
    rf: String,
    interference: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCell {
    density: String,
    length: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNoise {
    epsilon: f64,
    n_rydberg: f64,
    integration_time: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dephasing_time: Option<String>,
    derivative_step: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLink {
    field_levels: Vec<String>,
    symbol_duration: String,
    rf_carrier: String,
    interference_carrier: String,
    calibration_accuracy: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConventional {
    filter_attenuation: String,
    antenna_gain: f64,
    temperature: String,
    impedance: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    energy_mode: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    min: String,
    max: String,
    points: usize,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCalibration {
    pilots: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    jitter: Option<String>,
    grid: RawGrid,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpectrum {
    grid: RawGrid,
    #[serde(default)]
    interference_sweep: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSer {
    symbols: u64,
    accuracies: Vec<String>,
    attenuations: Vec<String>,
}

const TRANSITIONS: [(&str, &str); 4] = [
    ("probe", "probe transition |1>-|2>"),
    ("coupling", "coupling transition |2>-|3>"),
    ("rf", "RF transition |3>-|4>"),
    ("interference", "interference transition |4>-|5>"),
];

impl RawGrid {
    fn parse(&self, path: &str) -> Result<GridSpec> {
        let min = quantity(&format!("{path}.min"), &self.min, Dimension::Angular)?;
        let max = quantity(&format!("{path}.max"), &self.max, Dimension::Angular)?;
        if self.points == 0 {
            return Err(invalid(&format!("{path}.points"), "grid needs at least one point"));
        }
        if self.points > 1 && !(max > min) {
            return Err(invalid(path, "max must exceed min"));
        }
        Ok(GridSpec {
            min,
            max,
            points: self.points,
        })
    }

    fn render(g: &GridSpec) -> Self {
        RawGrid {
            min: format_quantity(g.min, Dimension::Angular),
            max: format_quantity(g.max, Dimension::Angular),
            points: g.points,
        }
    }
}

impl RawPerField {
    fn parse(&self, table: &str, dim: Dimension) -> Result<PerField> {
        let q = |name: &str, t: &str| quantity(&format!("{table}.{name}"), t, dim);
        Ok(PerField::new(
            q("probe", &self.probe)?,
            q("coupling", &self.coupling)?,
            q("rf", &self.rf)?,
            q("interference", &self.interference)?,
        ))
    }

    fn render(p: &PerField, dim: Dimension) -> Self {
        RawPerField {
            probe: format_quantity(p.probe, dim),
            coupling: format_quantity(p.coupling, dim),
            rf: format_quantity(p.rf, dim),
            interference: format_quantity(p.interference, dim),
        }
    }
}

impl RawConfig {
    fn into_config(self) -> Result<ScenarioConfig> {
        let engine = match &self.engine {
            Some(s) => s
                .parse()
                .map_err(|_| invalid("engine", format!("unknown engine `{s}`")))?,
            None => Engine::default(),
        };

        let d = &self.levels.dipoles;
        let mut dipoles = Vec::with_capacity(4);
        for ((key, label), value) in TRANSITIONS.iter().zip([&d.probe, &d.coupling, &d.rf, &d.interference]) {
            let path = format!("levels.dipoles.{key}");
            let text = value
                .as_ref()
                .ok_or_else(|| invalid(&path, format!("missing dipole moment for the {label}")))?;
            dipoles.push(quantity(&path, text, Dimension::Dipole)?);
        }
        let wavelength = quantity(
            "levels.probe_wavelength",
            &self.levels.probe_wavelength,
            Dimension::Length,
        )?;
        let levels = LevelScheme::new(dipoles, wavelength).map_err(at_path("levels"))?;

        if self.decay.gamma.len() != 5 {
            return Err(invalid(
                "decay.gamma",
                format!("need five decay rates, got {}", self.decay.gamma.len()),
            ));
        }
        let decays = DecaySpec::new(quantities("decay.gamma", &self.decay.gamma, Dimension::Angular)?)
            .map_err(at_path("decay"))?;

        let ladder = LadderConfig {
            levels,
            fields: self.fields.parse("fields", Dimension::Field)?,
            detuning: self.detuning.parse("detuning", Dimension::Angular)?,
            decays,
            atomic_density: quantity("cell.density", &self.cell.density, Dimension::Density)?,
            cell_length: quantity("cell.length", &self.cell.length, Dimension::Length)?,
        };
        ladder.validate().map_err(|e| match e {
            Error::InvalidParameter { name, reason } => {
                let table = match name {
                    "fields" | "detuning" => name.to_string(),
                    "levels" => "levels".to_string(),
                    other => format!("cell.{other}"),
                };
                invalid(&table, reason)
            }
            other => invalid("cell", other.to_string()),
        })?;

        let n = &self.noise;
        let dephasing_time = match &n.dephasing_time {
            Some(t) => quantity("noise.dephasing_time", t, Dimension::Time)?,
            None => {
                let g = ladder.decays.gamma_levels();
                NoiseSpec::dephasing_time_from_rates(g[2], g[3])
            }
        };
        let noise = NoiseSpec {
            epsilon: n.epsilon,
            n_rydberg: n.n_rydberg,
            integration_time: quantity("noise.integration_time", &n.integration_time, Dimension::Time)?,
            dephasing_time,
            rf_dipole: ladder.rf_dipole(),
            derivative_step: quantity("noise.derivative_step", &n.derivative_step, Dimension::Field)?,
        };
        noise.validate().map_err(at_path("noise"))?;

        let l = &self.link;
        let link = PamLinkConfig {
            field_levels: quantities("link.field_levels", &l.field_levels, Dimension::Field)?,
            symbol_duration: quantity("link.symbol_duration", &l.symbol_duration, Dimension::Time)?,
            rf_carrier: quantity("link.rf_carrier", &l.rf_carrier, Dimension::Frequency)?,
            interference_carrier: quantity(
                "link.interference_carrier",
                &l.interference_carrier,
                Dimension::Frequency,
            )?,
            interference_field: ladder.fields.interference,
            calibration_accuracy: quantity("link.calibration_accuracy", &l.calibration_accuracy, Dimension::Percent)?,
        };
        link.validate().map_err(at_path("link"))?;

        let c = &self.conventional;
        let energy_mode = match &c.energy_mode {
            Some(s) => s
                .parse::<SymbolEnergyMode>()
                .map_err(|_| invalid("conventional.energy_mode", format!("unknown mode `{s}`")))?,
            None => SymbolEnergyMode::default(),
        };
        let conventional = ConventionalRxSpec {
            filter_attenuation_db: quantity(
                "conventional.filter_attenuation",
                &c.filter_attenuation,
                Dimension::Decibel,
            )?,
            antenna_gain: c.antenna_gain,
            temperature: quantity("conventional.temperature", &c.temperature, Dimension::Temperature)?,
            impedance: quantity("conventional.impedance", &c.impedance, Dimension::Impedance)?,
            energy_mode,
        };
        conventional.validate().map_err(at_path("conventional"))?;

        let cal = &self.calibration;
        if cal.pilots == 0 {
            return Err(invalid("calibration.pilots", "need at least one pilot"));
        }
        let calibration_grid = cal.grid.parse("calibration.grid")?;
        if calibration_grid.points < 5 {
            return Err(invalid(
                "calibration.grid.points",
                "extremum search needs at least 5 points",
            ));
        }
        let jitter_sigma = match &cal.jitter {
            Some(j) => {
                let s = quantity("calibration.jitter", j, Dimension::Angular)?;
                if s < 0.0 {
                    return Err(invalid("calibration.jitter", "must be non-negative"));
                }
                Some(s)
            }
            None => None,
        };

        let spectrum = SpectrumSettings {
            grid: self.spectrum.grid.parse("spectrum.grid")?,
            interference_sweep: quantities(
                "spectrum.interference_sweep",
                &self.spectrum.interference_sweep,
                Dimension::Field,
            )?,
        };
        if spectrum.interference_sweep.iter().any(|&e| e < 0.0) {
            return Err(invalid("spectrum.interference_sweep", "fields must be non-negative"));
        }

        let ser = SerSettings {
            symbols: self.ser.symbols,
            accuracies: quantities("ser.accuracies", &self.ser.accuracies, Dimension::Percent)?,
            attenuations: quantities("ser.attenuations", &self.ser.attenuations, Dimension::Decibel)?,
        };
        if ser.symbols == 0 {
            return Err(invalid("ser.symbols", "need at least one symbol"));
        }
        for (i, &a) in ser.accuracies.iter().enumerate() {
            if !(a > 0.0 && a <= 100.0) {
                return Err(invalid(&format!("ser.accuracies[{i}]"), "must be in (0, 100] %"));
            }
        }
        for (i, &a) in ser.attenuations.iter().enumerate() {
            if a < 0.0 {
                return Err(invalid(&format!("ser.attenuations[{i}]"), "must be >= 0 dB"));
            }
        }

        Ok(ScenarioConfig {
            seed: self.seed,
            engine,
            ladder,
            noise,
            link,
            conventional,
            calibration_grid,
            pilots: cal.pilots,
            jitter_sigma,
            spectrum,
            ser,
        })
    }

    fn from_config(c: &ScenarioConfig) -> Self {
        let mu = c.ladder.levels.dipoles();
        let dip = |i: usize| Some(format_quantity(mu[i], Dimension::Dipole));
        RawConfig {
            seed: c.seed,
            engine: Some(c.engine.as_str().to_string()),
            levels: RawLevels {
                probe_wavelength: format_quantity(c.ladder.levels.probe_wavelength(), Dimension::Length),
                dipoles: RawDipoles {
                    probe: dip(0),
                    coupling: dip(1),
                    rf: dip(2),
                    interference: dip(3),
                },
            },
            decay: RawDecay {
                gamma: render(c.ladder.decays.gamma_levels(), Dimension::Angular),
            },
            fields: RawPerField::render(&c.ladder.fields, Dimension::Field),
            detuning: RawPerField::render(&c.ladder.detuning, Dimension::Angular),
            cell: RawCell {
                density: format_quantity(c.ladder.atomic_density, Dimension::Density),
                length: format_quantity(c.ladder.cell_length, Dimension::Length),
            },
            noise: RawNoise {
                epsilon: c.noise.epsilon,
                n_rydberg: c.noise.n_rydberg,
                integration_time: format_quantity(c.noise.integration_time, Dimension::Time),
                dephasing_time: Some(format_quantity(c.noise.dephasing_time, Dimension::Time)),
                derivative_step: format_quantity(c.noise.derivative_step, Dimension::Field),
            },
            link: RawLink {
                field_levels: render(&c.link.field_levels, Dimension::Field),
                symbol_duration: format_quantity(c.link.symbol_duration, Dimension::Time),
                rf_carrier: format_quantity(c.link.rf_carrier, Dimension::Frequency),
                interference_carrier: format_quantity(c.link.interference_carrier, Dimension::Frequency),
                calibration_accuracy: format_quantity(c.link.calibration_accuracy, Dimension::Percent),
            },
            conventional: RawConventional {
                filter_attenuation: format_quantity(c.conventional.filter_attenuation_db, Dimension::Decibel),
                antenna_gain: c.conventional.antenna_gain,
                temperature: format_quantity(c.conventional.temperature, Dimension::Temperature),
                impedance: format_quantity(c.conventional.impedance, Dimension::Impedance),
                energy_mode: Some(c.conventional.energy_mode.as_str().to_string()),
            },
            calibration: RawCalibration {
                pilots: c.pilots,
                jitter: c.jitter_sigma.map(|j| format_quantity(j, Dimension::Angular)),
                grid: RawGrid::render(&c.calibration_grid),
            },
            spectrum: RawSpectrum {
                grid: RawGrid::render(&c.spectrum.grid),
                interference_sweep: render(&c.spectrum.interference_sweep, Dimension::Field),
            },
            ser: RawSer {
                symbols: c.ser.symbols,
                accuracies: render(&c.ser.accuracies, Dimension::Percent),
                attenuations: render(&c.ser.attenuations, Dimension::Decibel),
            },
        }
    }
}

/// Provenance attached to every output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Provenance {
    pub config_digest: String,
    pub seed: u64,
}

impl Provenance {
    pub fn of(config: &ScenarioConfig) -> Self {
        Provenance {
            config_digest: config.digest(),
            seed: config.seed,
        }
    }
}

/// The bundled default scenario.
pub const DEFAULT_CONFIG: &str = include_str!("../../../configs/default.toml");
