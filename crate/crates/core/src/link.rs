//! 8-PAM link: Rydberg receiver calibration and Monte Carlo symbol error rate,
//! plus the closed-form baseline for a filtered conventional receiver.

use libm::erfc;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::constants::{BOLTZMANN, SPEED_OF_LIGHT};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::ladder::LadderConfig;
use crate::noise::{derive_seed, substream, transmission_slope, NoiseSpec};
use crate::spectroscopy::{find_amplitude_extremum, sweep_spectrum, transmission, Engine};
use crate::weakprobe::ac_stark_shift;

/// Modulation alphabet and link timing.
#[derive(Debug, Clone, PartialEq)]
pub struct PamLinkConfig {
    /// RF field amplitude of each symbol, V/m, strictly increasing.
    pub field_levels: Vec<f64>,
    /// Symbol duration, s.
    pub symbol_duration: f64,
    /// RF carrier, Hz.
    pub rf_carrier: f64,
    /// Interference carrier, Hz.
    pub interference_carrier: f64,
    /// Interference field amplitude, V/m.
    pub interference_field: f64,
    /// Calibration accuracy, percent in (0, 100].
    pub calibration_accuracy: f64,
}

impl PamLinkConfig {
    pub fn m_levels(&self) -> usize {
        self.field_levels.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.field_levels.len() < 2 {
            return Err(Error::invalid("field_levels", "need at least two symbols"));
        }
        if self.field_levels[0] < 0.0 || self.field_levels.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid(
                "field_levels",
                "must be non-negative and strictly increasing",
            ));
        }
        for (name, v) in [
            ("symbol_duration", self.symbol_duration),
            ("rf_carrier", self.rf_carrier),
            ("interference_carrier", self.interference_carrier),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::invalid(name, format!("must be positive, got {v}")));
            }
        }
        if !self.interference_field.is_finite() || self.interference_field < 0.0 {
            return Err(Error::invalid("interference_field", "must be non-negative"));
        }
        check_accuracy(self.calibration_accuracy)
    }

    /// Symbol used for pilot calibration.
    pub fn pilot_field(&self) -> f64 {
        self.field_levels[self.field_levels.len() / 2]
    }
}

fn check_accuracy(accuracy: f64) -> Result<()> {
    if !(accuracy > 0.0 && accuracy <= 100.0) {
        return Err(Error::invalid(
            "calibration_accuracy",
            format!("must be in (0, 100], got {accuracy}"),
        ));
    }
    Ok(())
}

/// How the average symbol energy is formed from the alphabet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SymbolEnergyMode {
    /// `mean(Ē)²`.
    #[default]
    SquareOfMean,
    /// `mean(Ē²)`.
    MeanOfSquares,
}

impl SymbolEnergyMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SymbolEnergyMode::SquareOfMean => "square-of-mean",
            SymbolEnergyMode::MeanOfSquares => "mean-of-squares",
        }
    }
}

impl std::str::FromStr for SymbolEnergyMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "square-of-mean" => Ok(Self::SquareOfMean),
            "mean-of-squares" => Ok(Self::MeanOfSquares),
            other => Err(Error::invalid("energy_mode", format!("unknown mode `{other}`"))),
        }
    }
}

/// Conventional (antenna + filter + demodulator) receiver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConventionalRxSpec {
    pub filter_attenuation_db: f64,
    pub antenna_gain: f64,
    pub temperature: f64,
    pub impedance: f64,
    pub energy_mode: SymbolEnergyMode,
}

impl ConventionalRxSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.filter_attenuation_db >= 0.0) {
            return Err(Error::invalid("filter_attenuation", "must be >= 0 dB"));
        }
        if !(self.antenna_gain > 0.0) || !self.antenna_gain.is_finite() {
            return Err(Error::invalid("antenna_gain", "must be positive"));
        }
        if !(self.temperature > 0.0) || !self.temperature.is_finite() {
            return Err(Error::invalid("temperature", "must be positive"));
        }
        if !(self.impedance > 0.0) || !self.impedance.is_finite() {
            return Err(Error::invalid("impedance", "must be positive"));
        }
        Ok(())
    }

    pub fn with_attenuation(self, db: f64) -> Self {
        Self {
            filter_attenuation_db: db,
            ..self
        }
    }
}

/// Readout detuning after calibrating to `accuracy` percent of the true
/// Stark-shifted extremum (0 % would be the interference-free point Δ_c = 0).
pub fn calibrated_readout_detuning(true_shift: f64, accuracy: f64) -> Result<f64> {
    check_accuracy(accuracy)?;
    Ok(accuracy / 100.0 * true_shift)
}

/// Noiseless transmission of every symbol at the readout detuning.
pub fn reference_levels(
    ladder: &LadderConfig,
    link: &PamLinkConfig,
    readout_delta_c: f64,
    engine: Engine,
) -> Result<Vec<f64>> {
    let base = ladder
        .with_interference_field(link.interference_field)
        .with_coupling_detuning(readout_delta_c);
    let levels = link
        .field_levels
        .iter()
        .map(|&e| transmission(&base.with_rf_field(e), engine))
        .collect::<Result<Vec<_>>>()?;
    level_order(&levels)?;
    Ok(levels)
}

/// Direction in which transmission moves with symbol index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LevelOrder {
    Increasing,
    Decreasing,
}

/// Order of a strictly monotone level sequence.
pub fn level_order(levels: &[f64]) -> Result<LevelOrder> {
    if levels.len() < 2 {
        return Err(Error::DemodulationInfeasible("need at least two levels".into()));
    }
    if levels.windows(2).all(|w| w[1] > w[0]) {
        Ok(LevelOrder::Increasing)
    } else if levels.windows(2).all(|w| w[1] < w[0]) {
        Ok(LevelOrder::Decreasing)
    } else {
        Err(Error::DemodulationInfeasible(format!(
            "reference levels are not strictly monotone: {levels:?}"
        )))
    }
}

/// Midpoints between adjacent reference levels.
pub fn decision_thresholds(levels: &[f64]) -> Result<Vec<f64>> {
    level_order(levels)?;
    Ok(levels.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect())
}

/// Symbol index for a received transmission. A value exactly on a threshold
/// goes to the lower index.
pub fn demodulate(t_noisy: f64, thresholds: &[f64], order: LevelOrder) -> usize {
    match order {
        LevelOrder::Increasing => thresholds.iter().take_while(|&&th| th < t_noisy).count(),
        LevelOrder::Decreasing => thresholds.iter().take_while(|&&th| th > t_noisy).count(),
    }
}

/// Error-rate estimate with a 95 % Wilson score interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SerEstimate {
    pub errors: u64,
    pub n_symbols: u64,
    pub ser: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

const Z_95: f64 = 1.959_963_984_540_054;

pub fn wilson_interval(errors: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n_f = n as f64;
    let p = errors as f64 / n_f;
    let z2 = Z_95 * Z_95;
    let denom = 1.0 + z2 / n_f;
    let centre = (p + z2 / (2.0 * n_f)) / denom;
    let half = Z_95 * (p * (1.0 - p) / n_f + z2 / (4.0 * n_f * n_f)).sqrt() / denom;
    let low = if errors == 0 { 0.0 } else { (centre - half).max(0.0) };
    let high = if errors == n { 1.0 } else { (centre + half).min(1.0) };
    (low, high)
}

impl SerEstimate {
    pub fn from_counts(errors: u64, n_symbols: u64) -> Self {
        let (ci_low, ci_high) = wilson_interval(errors, n_symbols);
        Self {
            errors,
            n_symbols,
            ser: errors as f64 / n_symbols as f64,
            ci_low,
            ci_high,
        }
    }
}

/// Per-symbol quantities of a calibrated Rydberg receiver: reference levels,
/// decision thresholds, transmission slopes and field-noise deviations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RydbergReceiver {
    pub readout_delta_c: f64,
    pub levels: Vec<f64>,
    pub thresholds: Vec<f64>,
    pub order: LevelOrder,
    pub slopes: Vec<f64>,
    pub sigmas: Vec<f64>,
}

impl RydbergReceiver {
    pub fn build(
        ladder: &LadderConfig,
        noise: &NoiseSpec,
        link: &PamLinkConfig,
        readout_delta_c: f64,
        engine: Engine,
        exec: Execution,
    ) -> Result<Self> {
        let levels = reference_levels(ladder, link, readout_delta_c, engine)?;
        let thresholds = decision_thresholds(&levels)?;
        let order = level_order(&levels)?;
        let with_interference = ladder.with_interference_field(link.interference_field);
        let slopes = exec.try_map_indexed(link.m_levels(), |k| {
            transmission_slope(
                &with_interference,
                link.field_levels[k],
                noise.derivative_step,
                readout_delta_c,
                engine,
            )
        })?;
        let sigmas = link.field_levels.iter().map(|&e| noise.total_noise_sigma(e)).collect();
        Ok(Self {
            readout_delta_c,
            levels,
            thresholds,
            order,
            slopes,
            sigmas,
        })
    }

    pub fn m_levels(&self) -> usize {
        self.levels.len()
    }

    /// Standard deviation of the received transmission for symbol `k`.
    pub fn transmission_sigma(&self, k: usize) -> f64 {
        (self.slopes[k] * self.sigmas[k]).abs()
    }

    /// Monte Carlo SER over `n_symbols` uniformly drawn symbols.
    ///
    /// Symbol index `i` draws from ChaCha sub-stream `i / SER_CHUNK` of
    /// `seed`, so the count does not depend on the execution mode.
    pub fn estimate_ser(&self, n_symbols: u64, seed: u64, exec: Execution) -> Result<SerEstimate> {
        if n_symbols == 0 {
            return Err(Error::invalid("n_symbols", "need at least one symbol"));
        }
        let m = self.m_levels();
        let chunks = n_symbols.div_ceil(SER_CHUNK) as usize;
        let errors = exec.sum_u64(chunks, |c| {
            let start = c as u64 * SER_CHUNK;
            let len = SER_CHUNK.min(n_symbols - start);
            let mut rng = substream(seed, c as u64);
            let mut errs = 0u64;
            for _ in 0..len {
                let k = rng.random_range(0..m);
                let n: f64 = rng.sample(StandardNormal);
                let received = self.levels[k] + self.slopes[k] * self.sigmas[k] * n;
                if demodulate(received, &self.thresholds, self.order) != k {
                    errs += 1;
                }
            }
            errs
        });
        Ok(SerEstimate::from_counts(errors, n_symbols))
    }
}

/// Symbols per RNG sub-stream in [`RydbergReceiver::estimate_ser`].
pub const SER_CHUNK: u64 = 1 << 16;

/// Optional pilot-frequency jitter and pilot count for calibration.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationSettings {
    pub pilots: usize,
    /// Coupling-detuning grid searched for the extremum, rad/s.
    pub grid: Vec<f64>,
    /// Gaussian jitter on each pilot's measured extremum, rad/s.
    pub jitter_sigma: Option<f64>,
}

/// Outcome of the pilot calibration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationReport {
    pub pilots: usize,
    pub pilot_field_v_per_m: f64,
    pub single_shot_delta_c: f64,
    pub single_shot_transmission: f64,
    pub pilot_extrema: Vec<f64>,
    pub mean_delta_c: f64,
    pub std_error: f64,
    pub analytic_shift: f64,
    pub relative_difference: f64,
}

const CALIBRATION_STAGE: u64 = 0xCA11;
const SER_STAGE: u64 = 0x5E12;

/// Locates the Stark-shifted extremum with pilot symbols at the mid-alphabet
/// field and averages the (optionally jittered) pilot results.
pub fn calibrate(
    ladder: &LadderConfig,
    link: &PamLinkConfig,
    settings: &CalibrationSettings,
    engine: Engine,
    seed: u64,
    exec: Execution,
) -> Result<CalibrationReport> {
    if settings.pilots == 0 {
        return Err(Error::invalid("pilots", "need at least one pilot"));
    }
    let pilot = ladder
        .with_interference_field(link.interference_field)
        .with_rf_field(link.pilot_field());
    let trace = sweep_spectrum(&pilot, &settings.grid, engine, exec)?;
    let (delta_star, t_star) = find_amplitude_extremum(&trace)?;

    let mut rng = substream(derive_seed(seed, CALIBRATION_STAGE), 0);
    let pilot_extrema: Vec<f64> = (0..settings.pilots)
        .map(|_| match settings.jitter_sigma {
            Some(s) if s > 0.0 => {
                let n: f64 = rng.sample(StandardNormal);
                delta_star + s * n
            }
            _ => delta_star,
        })
        .collect();
    let n = pilot_extrema.len() as f64;
    let mean = pilot_extrema.iter().sum::<f64>() / n;
    let std_error = if pilot_extrema.len() > 1 {
        let var = pilot_extrema.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    } else {
        0.0
    };

    let drives = pilot.drives()?;
    let analytic_shift = ac_stark_shift(drives.rabi.interference, drives.detuning.interference)?;
    let relative_difference = if analytic_shift != 0.0 {
        ((mean - analytic_shift) / analytic_shift).abs()
    } else {
        mean.abs()
    };
    Ok(CalibrationReport {
        pilots: settings.pilots,
        pilot_field_v_per_m: link.pilot_field(),
        single_shot_delta_c: delta_star,
        single_shot_transmission: t_star,
        pilot_extrema,
        mean_delta_c: mean,
        std_error,
        analytic_shift,
        relative_difference,
    })
}

/// Full Rydberg SER estimate: calibrate, build the receiver at the accuracy
/// in `link`, then run the Monte Carlo.
#[allow(clippy::too_many_arguments)]
pub fn estimate_ser_rydberg(
    ladder: &LadderConfig,
    noise: &NoiseSpec,
    link: &PamLinkConfig,
    calibration: &CalibrationSettings,
    engine: Engine,
    n_symbols: u64,
    seed: u64,
    exec: Execution,
) -> Result<SerEstimate> {
    let report = calibrate(ladder, link, calibration, engine, seed, exec)?;
    let readout = calibrated_readout_detuning(report.mean_delta_c, link.calibration_accuracy)?;
    let rx = RydbergReceiver::build(ladder, noise, link, readout, engine, exec)?;
    rx.estimate_ser(n_symbols, derive_seed(seed, SER_STAGE), exec)
}

/// Gaussian tail probability `Q(x) = erfc(x/√2)/2`.
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// M-PAM symbol error rate over AWGN with effective noise energy `n_eff`.
pub fn conventional_ser(m: usize, es: f64, n_eff: f64) -> Result<f64> {
    if m < 2 {
        return Err(Error::invalid("m", "need at least two levels"));
    }
    if !(n_eff > 0.0) || !n_eff.is_finite() {
        return Err(Error::invalid(
            "n_eff",
            format!("noise energy must be positive, got {n_eff}"),
        ));
    }
    if !(es >= 0.0) {
        return Err(Error::invalid("es", "symbol energy must be non-negative"));
    }
    let m_f = m as f64;
    let arg = (6.0 * es / ((m_f * m_f - 1.0) * n_eff)).sqrt();
    Ok(2.0 * (1.0 - 1.0 / m_f) * q_function(arg))
}

/// Effective aperture `λ²G/(4π)` at carrier `f`.
pub fn effective_antenna_area(f: f64, g: f64) -> f64 {
    let lambda = SPEED_OF_LIGHT / f;
    lambda * lambda * g / (4.0 * std::f64::consts::PI)
}

/// Energy collected over one symbol from a peak field `e`.
fn collected_energy(e: f64, f: f64, t_s: f64, rx: &ConventionalRxSpec) -> f64 {
    e * e / (2.0 * rx.impedance) * t_s * effective_antenna_area(f, rx.antenna_gain)
}

/// Average symbol energy of the alphabet at the RF carrier.
pub fn symbol_energy(link: &PamLinkConfig, rx: &ConventionalRxSpec) -> f64 {
    let n = link.field_levels.len() as f64;
    let field_sq = match rx.energy_mode {
        SymbolEnergyMode::SquareOfMean => (link.field_levels.iter().sum::<f64>() / n).powi(2),
        SymbolEnergyMode::MeanOfSquares => link.field_levels.iter().map(|e| e * e).sum::<f64>() / n,
    };
    collected_energy(field_sq.sqrt(), link.rf_carrier, link.symbol_duration, rx)
}

/// Interference energy per symbol after the receive filter.
pub fn interference_energy_after_filter(e_i: f64, f_i: f64, t_s: f64, rx: &ConventionalRxSpec) -> f64 {
    collected_energy(e_i, f_i, t_s, rx) * 10f64.powf(-rx.filter_attenuation_db / 10.0)
}

/// Thermal noise energy `kT`.
pub fn thermal_noise_energy(temperature: f64) -> Result<f64> {
    if !(temperature > 0.0) || !temperature.is_finite() {
        return Err(Error::invalid("temperature", "must be positive"));
    }
    Ok(BOLTZMANN * temperature)
}

/// Conventional-receiver SER with thermal noise plus filtered interference.
pub fn conventional_link_ser(link: &PamLinkConfig, rx: &ConventionalRxSpec) -> Result<f64> {
    let es = symbol_energy(link, rx);
    let n_eff = thermal_noise_energy(rx.temperature)?
        + interference_energy_after_filter(
            link.interference_field,
            link.interference_carrier,
            link.symbol_duration,
            rx,
        );
    conventional_ser(link.m_levels(), es, n_eff)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn link() -> PamLinkConfig {
        PamLinkConfig {
            field_levels: (0..8).map(|k| k as f64 * 1e-4).collect(),
            symbol_duration: 1e-4,
            rf_carrier: 14.2e9,
            interference_carrier: 3.5e9,
            interference_field: 1.0,
            calibration_accuracy: 100.0,
        }
    }

    fn rx(db: f64) -> ConventionalRxSpec {
        ConventionalRxSpec {
            filter_attenuation_db: db,
            antenna_gain: 1.5,
            temperature: 290.0,
            impedance: 377.0,
            energy_mode: SymbolEnergyMode::SquareOfMean,
        }
    }

    #[test]
    fn readout_detuning_interpolates() {
        assert_eq!(calibrated_readout_detuning(-1234.5, 100.0).unwrap(), -1234.5);
        assert_relative_eq!(calibrated_readout_detuning(10.0, 40.0).unwrap(), 4.0);
        assert!(calibrated_readout_detuning(10.0, 0.0).is_err());
        assert!(calibrated_readout_detuning(10.0, 100.5).is_err());
    }

    #[test]
    fn thresholds_are_midpoints() {
        assert_eq!(
            decision_thresholds(&[0.2, 0.4, 0.8]).unwrap(),
            vec![0.30000000000000004, 0.6000000000000001]
        );
        assert_eq!(decision_thresholds(&[0.9, 0.1]).unwrap().len(), 1);
        assert!(decision_thresholds(&[0.2, 0.5, 0.4]).is_err());
    }

    #[test]
    fn demodulation_regions() {
        let inc = [0.1, 0.3, 0.6, 0.9];
        let th = decision_thresholds(&inc).unwrap();
        for (k, &l) in inc.iter().enumerate() {
            assert_eq!(demodulate(l, &th, LevelOrder::Increasing), k);
        }
        assert_eq!(demodulate(-5.0, &th, LevelOrder::Increasing), 0);
        assert_eq!(demodulate(5.0, &th, LevelOrder::Increasing), 3);
        assert_eq!(demodulate(th[1], &th, LevelOrder::Increasing), 1);

        let dec = [0.9, 0.6, 0.3, 0.1];
        let th = decision_thresholds(&dec).unwrap();
        for (k, &l) in dec.iter().enumerate() {
            assert_eq!(demodulate(l, &th, LevelOrder::Decreasing), k);
        }
        assert_eq!(demodulate(2.0, &th, LevelOrder::Decreasing), 0);
        assert_eq!(demodulate(-2.0, &th, LevelOrder::Decreasing), 3);
        assert_eq!(demodulate(th[2], &th, LevelOrder::Decreasing), 2);
    }

    #[test]
    fn q_function_values() {
        assert_eq!(q_function(0.0), 0.5);
        for x in [0.3, 1.0, 2.5] {
            assert_relative_eq!(q_function(-x), 1.0 - q_function(x), max_relative = 1e-14);
        }
        // erfc(1/√2)/2 = 0.15865525393145707
        assert_relative_eq!(q_function(1.0), 0.158_655_253_931_457_07, max_relative = 1e-12);
    }

    #[test]
    fn conventional_ser_identities() {
        assert_relative_eq!(conventional_ser(8, 0.0, 1.0).unwrap(), 0.875);
        let es = 3.0;
        let n0 = 2.0;
        assert_relative_eq!(
            conventional_ser(2, es, n0).unwrap(),
            q_function((2.0 * es / n0).sqrt()),
            max_relative = 1e-14
        );
        let mut last = 1.0;
        for k in 1..30 {
            let s = conventional_ser(8, k as f64, 1.0).unwrap();
            assert!(s < last);
            last = s;
        }
        assert!(conventional_ser(8, 1.0, 0.0).is_err());
    }

    #[test]
    fn antenna_area() {
        let c = SPEED_OF_LIGHT;
        assert_relative_eq!(
            effective_antenna_area(c, 4.0 * std::f64::consts::PI),
            1.0,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            effective_antenna_area(1e9, 1.5) / effective_antenna_area(4e9, 1.5),
            16.0,
            max_relative = 1e-12
        );
        // (c / 14.2 GHz)² · 1.5 / (4π)
        assert_relative_eq!(
            effective_antenna_area(14.2e9, 1.5),
            5.320_422_386_136_349e-5,
            max_relative = 1e-12
        );
    }

    #[test]
    fn energy_scalings() {
        let l = link();
        let zero = PamLinkConfig {
            field_levels: vec![0.0, 0.0],
            ..l.clone()
        };
        assert_eq!(symbol_energy(&zero, &rx(0.0)), 0.0);
        let scaled = PamLinkConfig {
            field_levels: l.field_levels.iter().map(|e| 3.0 * e).collect(),
            ..l.clone()
        };
        assert_relative_eq!(
            symbol_energy(&scaled, &rx(0.0)),
            9.0 * symbol_energy(&l, &rx(0.0)),
            max_relative = 1e-12
        );
        let e70 = interference_energy_after_filter(1.0, 3.5e9, 1e-4, &rx(70.0));
        let e80 = interference_energy_after_filter(1.0, 3.5e9, 1e-4, &rx(80.0));
        assert_relative_eq!(e70 / e80, 10.0, max_relative = 1e-12);
        assert_relative_eq!(
            thermal_noise_energy(290.0).unwrap(),
            4.003_882_1e-21,
            max_relative = 1e-7
        );
        assert!(thermal_noise_energy(0.0).is_err());
        let mean_sq = ConventionalRxSpec {
            energy_mode: SymbolEnergyMode::MeanOfSquares,
            ..rx(0.0)
        };
        assert!(symbol_energy(&l, &mean_sq) > symbol_energy(&l, &rx(0.0)));
    }

    #[test]
    fn wilson_interval_contains_estimate() {
        let (lo, hi) = wilson_interval(0, 1000);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.005);
        let (lo, hi) = wilson_interval(50, 1000);
        assert!(lo < 0.05 && hi > 0.05);
    }

    #[test]
    fn noiseless_receiver_never_errs() {
        let rx = RydbergReceiver {
            readout_delta_c: 0.0,
            levels: vec![0.9, 0.7, 0.4, 0.2],
            thresholds: decision_thresholds(&[0.9, 0.7, 0.4, 0.2]).unwrap(),
            order: LevelOrder::Decreasing,
            slopes: vec![-100.0; 4],
            sigmas: vec![0.0; 4],
        };
        let est = rx.estimate_ser(200_000, 3, Execution::default()).unwrap();
        assert_eq!(est.errors, 0);
        assert_eq!(est.ser, 0.0);
    }

    #[test]
    fn monte_carlo_is_mode_independent() {
        let levels = vec![0.9, 0.7, 0.4, 0.2];
        let rx = RydbergReceiver {
            readout_delta_c: 0.0,
            thresholds: decision_thresholds(&levels).unwrap(),
            levels,
            order: LevelOrder::Decreasing,
            slopes: vec![-1.0; 4],
            sigmas: vec![0.1; 4],
        };
        let a = rx.estimate_ser(300_001, 11, Execution::Sequential).unwrap();
        let b = rx.estimate_ser(300_001, 11, Execution::Parallel).unwrap();
        assert_eq!(a, b);
        assert!(a.errors > 0);
    }
}
