//! Probe transmission and spectral feature extraction.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::constants::{EPSILON_0, HBAR};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::ladder::LadderConfig;
use crate::quantum::{build_interaction_matrix, steady_state};
use crate::weakprobe::{rho21_exact_weakprobe, rho21_stark_approx};

/// Coherences with `Im ρ₂₁` above this are rejected as gain.
pub const GAIN_TOLERANCE: f64 = 1e-9;

/// Vapor-cell parameters entering the absorption coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellSpec {
    pub atomic_density: f64,
    pub cell_length: f64,
    pub probe_dipole: f64,
    pub probe_wavelength: f64,
}

impl CellSpec {
    pub fn new(atomic_density: f64, cell_length: f64, probe_dipole: f64, probe_wavelength: f64) -> Result<Self> {
        for (name, v) in [
            ("atomic_density", atomic_density),
            ("cell_length", cell_length),
            ("probe_dipole", probe_dipole),
            ("probe_wavelength", probe_wavelength),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::invalid(name, format!("must be positive and finite, got {v}")));
            }
        }
        Ok(Self {
            atomic_density,
            cell_length,
            probe_dipole,
            probe_wavelength,
        })
    }

    /// Prefactor multiplying `Im ρ₂₁ / Ω_p` in the exponent.
    fn absorption_prefactor(&self) -> f64 {
        4.0 * std::f64::consts::PI * self.atomic_density * self.cell_length * self.probe_dipole.powi(2)
            / (HBAR * EPSILON_0 * self.probe_wavelength)
    }
}

/// Beer–Lambert probe transmission for a given coherence.
///
/// Extremely thick media underflow; the result is floored at the smallest
/// positive normal `f64` so it stays in (0, 1].
pub fn beer_lambert_transmission(rho21: Complex64, cell: &CellSpec, omega_p: f64) -> Result<f64> {
    if !omega_p.is_finite() || omega_p <= 0.0 {
        return Err(Error::invalid("omega_p", "probe Rabi frequency must be positive"));
    }
    if rho21.im > GAIN_TOLERANCE || !rho21.im.is_finite() {
        return Err(Error::InvalidCoherence(rho21.im));
    }
    let exponent = cell.absorption_prefactor() / omega_p * rho21.im.min(0.0);
    Ok(exponent.exp().max(f64::MIN_POSITIVE))
}

/// Which model produces ρ₂₁.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Engine {
    /// Full master-equation steady state.
    #[default]
    Numeric,
    /// Weak-probe continued fraction.
    ExactWeakProbe,
    /// Weak-probe fraction with the interference folded into an RF detuning shift.
    StarkApprox,
}

impl Engine {
    pub fn as_str(self) -> &'static str {
        match self {
            Engine::Numeric => "numeric",
            Engine::ExactWeakProbe => "weakprobe",
            Engine::StarkApprox => "stark",
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "numeric" => Ok(Engine::Numeric),
            "weakprobe" | "exact-weakprobe" => Ok(Engine::ExactWeakProbe),
            "stark" | "stark-approx" => Ok(Engine::StarkApprox),
            other => Err(Error::Usage(format!(
                "unknown engine `{other}` (numeric|weakprobe|stark)"
            ))),
        }
    }
}

/// Probe coherence for a scenario.
pub fn coherence(config: &LadderConfig, engine: Engine) -> Result<Complex64> {
    let drives = config.drives()?;
    match engine {
        Engine::Numeric => Ok(steady_state(&build_interaction_matrix(&drives), &config.decays)?.rho21()),
        Engine::ExactWeakProbe => rho21_exact_weakprobe(&drives, &config.decays),
        Engine::StarkApprox => Ok(rho21_stark_approx(&drives, &config.decays)?.rho21),
    }
}

/// Noiseless probe transmission for a scenario.
pub fn transmission(config: &LadderConfig, engine: Engine) -> Result<f64> {
    let rho21 = coherence(config, engine)?;
    let omega_p = config.drives()?.rabi.probe;
    beer_lambert_transmission(rho21, &config.cell()?, omega_p)
}

/// Transmission sampled on a strictly increasing coupling-detuning grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumTrace {
    delta_c: Vec<f64>,
    transmission: Vec<f64>,
}

impl SpectrumTrace {
    pub fn new(delta_c: Vec<f64>, transmission: Vec<f64>) -> Result<Self> {
        if delta_c.len() != transmission.len() {
            return Err(Error::invalid("trace", "grid and transmission lengths differ"));
        }
        validate_grid(&delta_c)?;
        if let Some(t) = transmission.iter().find(|t| !(**t > 0.0 && **t <= 1.0)) {
            return Err(Error::invalid("trace", format!("transmission {t} outside (0, 1]")));
        }
        Ok(Self { delta_c, transmission })
    }

    pub fn len(&self) -> usize {
        self.delta_c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.delta_c.is_empty()
    }

    pub fn delta_c(&self) -> &[f64] {
        &self.delta_c
    }

    pub fn transmission(&self) -> &[f64] {
        &self.transmission
    }

    pub fn samples(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.delta_c.iter().copied().zip(self.transmission.iter().copied())
    }
}

fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Usage("detuning grid is empty".into()));
    }
    if grid.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("grid", "detuning grid has non-finite entries"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("grid", "detuning grid must be strictly increasing"));
    }
    Ok(())
}

/// `points` evenly spaced detunings from `min` to `max` inclusive.
pub fn linear_grid(min: f64, max: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.5 * (min + max)],
        _ => {
            let step = (max - min) / (points - 1) as f64;
            (0..points).map(|k| min + step * k as f64).collect()
        }
    }
}

/// Transmission at every coupling detuning in `grid`.
pub fn sweep_spectrum(config: &LadderConfig, grid: &[f64], engine: Engine, exec: Execution) -> Result<SpectrumTrace> {
    validate_grid(grid)?;
    let values = exec.try_map_indexed(grid.len(), |k| {
        transmission(&config.with_coupling_detuning(grid[k]), engine).map_err(|e| e.at_detuning(grid[k]))
    })?;
    SpectrumTrace::new(grid.to_vec(), values)
}

fn local_maxima(t: &[f64]) -> Vec<usize> {
    (1..t.len().saturating_sub(1))
        .filter(|&i| t[i] > t[i - 1] && t[i] >= t[i + 1])
        .collect()
}

fn local_minima(t: &[f64]) -> Vec<usize> {
    (1..t.len().saturating_sub(1))
        .filter(|&i| t[i] < t[i - 1] && t[i] <= t[i + 1])
        .collect()
}

/// Vertex of the parabola through three samples around index `i`.
fn parabolic_vertex(x: &[f64], y: &[f64], i: usize) -> (f64, f64) {
    let (x0, x1, x2) = (x[i - 1], x[i], x[i + 1]);
    let (y0, y1, y2) = (y[i - 1], y[i], y[i + 1]);
    let d01 = (y1 - y0) / (x1 - x0);
    let d12 = (y2 - y1) / (x2 - x1);
    let curvature = (d12 - d01) / (x2 - x0);
    if curvature == 0.0 || !curvature.is_finite() {
        return (x1, y1);
    }
    // y = y1 + b (x − x1) + a (x − x1)², b from the divided differences.
    let b = d01 + curvature * (x1 - x0);
    let dx = (-b / (2.0 * curvature)).clamp(x0 - x1, x2 - x1);
    (x1 + dx, y1 + b * dx + curvature * dx * dx)
}

/// A sampled peak: grid index and refined `(Δ_c, T)` vertex.
type Peak = (usize, (f64, f64));

/// The two dominant interior peaks, ordered by detuning. Ties in height go to
/// the widest pair.
fn dominant_peak_pair(trace: &SpectrumTrace) -> Option<(Peak, Peak)> {
    let (x, y) = (trace.delta_c(), trace.transmission());
    let peaks: Vec<Peak> = local_maxima(y)
        .into_iter()
        .map(|i| (i, parabolic_vertex(x, y, i)))
        .collect();
    let mut best: Option<(f64, f64, usize, usize)> = None;
    for a in 0..peaks.len() {
        for b in (a + 1)..peaks.len() {
            let low = peaks[a].1 .1.min(peaks[b].1 .1);
            let sep = (peaks[b].1 .0 - peaks[a].1 .0).abs();
            let better = match best {
                None => true,
                Some((bl, bs, _, _)) => {
                    let tol = 1e-12 * bl.abs().max(low.abs());
                    low > bl + tol || ((low - bl).abs() <= tol && sep > bs)
                }
            };
            if better {
                best = Some((low, sep, a, b));
            }
        }
    }
    best.map(|(_, _, a, b)| (peaks[a], peaks[b]))
}

/// Amplitude-regime readout point: the transmission minimum between the two
/// dominant peaks, or the deepest interior well when there are fewer than two
/// peaks.
pub fn find_amplitude_extremum(trace: &SpectrumTrace) -> Result<(f64, f64)> {
    if trace.len() < 3 {
        return Err(Error::NoSplitting("need at least 3 samples".into()));
    }
    let (x, y) = (trace.delta_c(), trace.transmission());
    let range = match dominant_peak_pair(trace) {
        Some(((lo, _), (hi, _))) => (lo + 1)..hi,
        None => 1..trace.len() - 1,
    };
    let well = local_minima(y)
        .into_iter()
        .filter(|i| range.contains(i))
        .min_by(|&a, &b| y[a].total_cmp(&y[b]))
        .ok_or_else(|| Error::NoSplitting("no interior transmission minimum".into()))?;
    Ok(parabolic_vertex(x, y, well))
}

/// Frequency-regime readout: distance between the two dominant peaks.
pub fn find_ats_splitting(trace: &SpectrumTrace) -> Result<f64> {
    if trace.len() < 5 {
        return Err(Error::NoSplitting("need at least 5 samples".into()));
    }
    let ((_, left), (_, right)) =
        dominant_peak_pair(trace).ok_or_else(|| Error::NoSplitting("fewer than two transmission peaks".into()))?;
    Ok(right.0 - left.0)
}
