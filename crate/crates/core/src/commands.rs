//! Command implementations behind the `rydberg` binary.
//!
//! Commands render their output in memory; [`write_output`] persists it. All
//! outputs carry the config digest and the seed.

use std::fmt::Write as _;
use std::fs::OpenOptions;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{Provenance, ScenarioConfig};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::link::{calibrate, conventional_link_ser, estimate_ser_rydberg, CalibrationReport};
use crate::spectroscopy::{sweep_spectrum, Engine, SpectrumTrace};

/// CSV column header of spectrum files.
pub const SPECTRUM_HEADER: &str = "delta_c_rad_s,transmission";

/// Which family of traces `spectrum` produces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SpectrumSweep {
    /// One trace at the configured RF and interference fields.
    #[default]
    Single,
    /// One trace per PAM symbol field.
    PamLevels,
    /// One trace per interference field in the configured sweep.
    Interference,
}

impl std::str::FromStr for SpectrumSweep {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single" => Ok(Self::Single),
            "pam" => Ok(Self::PamLevels),
            "interference" => Ok(Self::Interference),
            other => Err(Error::Usage(format!(
                "unknown sweep `{other}`; expected single, pam or interference"
            ))),
        }
    }
}

/// One rendered CSV trace. `tag` is `None` for a single-trace run, otherwise
/// the suffix that distinguishes it from its siblings.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumFile {
    pub tag: Option<String>,
    pub rf_field: f64,
    pub interference_field: f64,
    pub csv: String,
}

fn render_trace(
    trace: &SpectrumTrace,
    prov: &Provenance,
    engine: Engine,
    rf_field: f64,
    interference_field: f64,
) -> String {
    let mut s = String::with_capacity(48 * trace.len() + 256);
    let _ = writeln!(s, "# config_digest={}", prov.config_digest);
    let _ = writeln!(s, "# seed={}", prov.seed);
    let _ = writeln!(s, "# engine={engine}");
    let _ = writeln!(s, "# rf_field_v_per_m={rf_field:?}");
    let _ = writeln!(s, "# interference_field_v_per_m={interference_field:?}");
    s.push_str(SPECTRUM_HEADER);
    s.push('\n');
    for (dc, t) in trace.samples() {
        let _ = writeln!(s, "{dc:?},{t:?}");
    }
    s
}

/// Probe transmission versus coupling detuning over `grid`.
pub fn cmd_spectrum(
    config: &ScenarioConfig,
    grid: &[f64],
    sweep: SpectrumSweep,
    engine: Engine,
    exec: Execution,
) -> Result<Vec<SpectrumFile>> {
    if grid.is_empty() {
        return Err(Error::Usage("spectrum grid is empty".into()));
    }
    let prov = Provenance::of(config);
    let base = &config.ladder;
    let cases: Vec<(Option<String>, f64, f64)> = match sweep {
        SpectrumSweep::Single => vec![(None, base.fields.rf, base.fields.interference)],
        SpectrumSweep::PamLevels => config
            .link
            .field_levels
            .iter()
            .enumerate()
            .map(|(k, &e)| (Some(format!("level{k}")), e, base.fields.interference))
            .collect(),
        SpectrumSweep::Interference => {
            if config.spectrum.interference_sweep.is_empty() {
                return Err(Error::Usage("spectrum.interference_sweep is empty".into()));
            }
            config
                .spectrum
                .interference_sweep
                .iter()
                .enumerate()
                .map(|(i, &e)| (Some(format!("interference{i}")), base.fields.rf, e))
                .collect()
        }
    };
    cases
        .into_iter()
        .map(|(tag, rf, ei)| {
            let ladder = base.with_rf_field(rf).with_interference_field(ei);
            let trace = sweep_spectrum(&ladder, grid, engine, exec)?;
            Ok(SpectrumFile {
                tag,
                rf_field: rf,
                interference_field: ei,
                csv: render_trace(&trace, &prov, engine, rf, ei),
            })
        })
        .collect()
}

/// Output path of a tagged trace: `out.csv` becomes `out_<tag>.csv`.
pub fn tagged_path(out: &Path, tag: Option<&str>) -> PathBuf {
    let Some(tag) = tag else {
        return out.to_path_buf();
    };
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = match out.extension() {
        Some(ext) => format!("{stem}_{tag}.{}", ext.to_string_lossy()),
        None => format!("{stem}_{tag}"),
    };
    out.with_file_name(name)
}

#[derive(Debug, Serialize)]
struct CalibrationOutput<'a> {
    config_digest: &'a str,
    seed: u64,
    engine: &'static str,
    jitter_sigma_rad_s: Option<f64>,
    #[serde(flatten)]
    report: &'a CalibrationReport,
}

/// Pilot calibration report as pretty-printed JSON.
pub fn cmd_calibrate(config: &ScenarioConfig, engine: Engine, exec: Execution) -> Result<(CalibrationReport, String)> {
    let prov = Provenance::of(config);
    let report = calibrate(
        &config.ladder,
        &config.link,
        &config.calibration_settings(),
        engine,
        config.seed,
        exec,
    )?;
    let out = CalibrationOutput {
        config_digest: &prov.config_digest,
        seed: prov.seed,
        engine: engine.as_str(),
        jitter_sigma_rad_s: config.jitter_sigma,
        report: &report,
    };
    let mut json = serde_json::to_string_pretty(&out).expect("report serializes");
    json.push('\n');
    Ok((report, json))
}

/// Which receiver rows `ser` emits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReceiverKind {
    Rydberg,
    Conventional,
    #[default]
    Both,
}

impl std::str::FromStr for ReceiverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rydberg" => Ok(Self::Rydberg),
            "conventional" => Ok(Self::Conventional),
            "both" => Ok(Self::Both),
            other => Err(Error::Usage(format!(
                "unknown receiver `{other}`; expected rydberg, conventional or both"
            ))),
        }
    }
}

/// One SER table row. Closed-form conventional rows have no counts or
/// confidence interval.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SerRow {
    pub receiver: &'static str,
    pub parameter: &'static str,
    pub value: f64,
    pub ser: f64,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub errors: Option<u64>,
    pub n_symbols: Option<u64>,
    pub method: &'static str,
    pub engine: Option<&'static str>,
    pub seed: u64,
    pub config_digest: String,
}

/// SER table rows: conventional receiver at each configured attenuation,
/// Rydberg receiver at each configured calibration accuracy.
///
/// Every Rydberg row reuses the same noise stream, so rows differ only
/// through the readout detuning.
pub fn cmd_ser(
    config: &ScenarioConfig,
    receiver: ReceiverKind,
    engine: Engine,
    n_symbols: u64,
    exec: Execution,
) -> Result<Vec<SerRow>> {
    if n_symbols == 0 {
        return Err(Error::Usage("--symbols must be at least 1".into()));
    }
    let prov = Provenance::of(config);
    let mut rows = Vec::new();
    if matches!(receiver, ReceiverKind::Conventional | ReceiverKind::Both) {
        for &db in &config.ser.attenuations {
            let ser = conventional_link_ser(&config.link, &config.conventional.with_attenuation(db))?;
            rows.push(SerRow {
                receiver: "conventional",
                parameter: "attenuation_db",
                value: db,
                ser,
                ci_low: None,
                ci_high: None,
                errors: None,
                n_symbols: None,
                method: "closed-form",
                engine: None,
                seed: prov.seed,
                config_digest: prov.config_digest.clone(),
            });
        }
    }
    if matches!(receiver, ReceiverKind::Rydberg | ReceiverKind::Both) {
        let calibration = config.calibration_settings();
        for &acc in &config.ser.accuracies {
            let mut link = config.link.clone();
            link.calibration_accuracy = acc;
            let est = estimate_ser_rydberg(
                &config.ladder,
                &config.noise,
                &link,
                &calibration,
                engine,
                n_symbols,
                config.seed,
                exec,
            )?;
            rows.push(SerRow {
                receiver: "rydberg",
                parameter: "accuracy_percent",
                value: acc,
                ser: est.ser,
                ci_low: Some(est.ci_low),
                ci_high: Some(est.ci_high),
                errors: Some(est.errors),
                n_symbols: Some(est.n_symbols),
                method: "monte-carlo",
                engine: Some(engine.as_str()),
                seed: prov.seed,
                config_digest: prov.config_digest.clone(),
            });
        }
    }
    Ok(rows)
}

/// Line-delimited JSON rendering of SER rows.
pub fn render_ser_rows(rows: &[SerRow]) -> String {
    rows.iter()
        .map(|r| serde_json::to_string(r).expect("row serializes") + "\n")
        .collect()
}

/// Writes `content` to `path`, truncating unless `append`.
pub fn write_output(path: &Path, content: &str, append: bool) -> Result<()> {
    let io = |source| Error::Io {
        path: path.display().to_string(),
        source,
    };
    let mut file = OpenOptions::new()
        .create(true)
        .write(true)
        .append(append)
        .truncate(!append)
        .open(path)
        .map_err(io)?;
    file.write_all(content.as_bytes()).map_err(io)
}
