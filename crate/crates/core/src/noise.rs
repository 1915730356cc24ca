//! Intrinsic receiver noise: photodetection uncertainty plus quantum
//! projection noise, mapped into transmission through the local slope
//! `dT/dE`.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::constants::HBAR;
use crate::error::{Error, Result};
use crate::ladder::LadderConfig;
use crate::spectroscopy::{transmission, Engine};

/// Parameters of the two intrinsic noise sources.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    /// Uncertainty scaling ε (fraction, not percent).
    pub epsilon: f64,
    /// Number of participating Rydberg atoms.
    pub n_rydberg: f64,
    /// Integration time, s.
    pub integration_time: f64,
    /// RF-transition dephasing time, s.
    pub dephasing_time: f64,
    /// RF transition dipole, C·m.
    pub rf_dipole: f64,
    /// Field step for the finite-difference slope, V/m.
    pub derivative_step: f64,
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.epsilon) {
            return Err(Error::invalid(
                "epsilon",
                format!("must lie in [0, 1), got {}", self.epsilon),
            ));
        }
        if !(self.n_rydberg >= 1.0) || !self.n_rydberg.is_finite() {
            return Err(Error::invalid("n_rydberg", "need at least one Rydberg atom"));
        }
        for (name, v) in [
            ("integration_time", self.integration_time),
            ("dephasing_time", self.dephasing_time),
            ("rf_dipole", self.rf_dipole),
            ("derivative_step", self.derivative_step),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::invalid(name, format!("must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Dephasing time `1 / ((Γ₃ + Γ₄)/2)` of the RF coherence.
    pub fn dephasing_time_from_rates(gamma_3: f64, gamma_4: f64) -> f64 {
        1.0 / (0.5 * (gamma_3 + gamma_4))
    }

    /// Measurement-uncertainty variance `ε Ē²`, (V/m)².
    pub fn uncertainty_variance(&self, e_rf: f64) -> f64 {
        self.epsilon * e_rf * e_rf
    }

    /// Projection-noise-limited field `2πħ / (|μ| √(N_R T_i T₂))`, V/m.
    pub fn projection_min_field(&self) -> f64 {
        2.0 * std::f64::consts::PI * HBAR
            / (self.rf_dipole.abs() * (self.n_rydberg * self.integration_time * self.dephasing_time).sqrt())
    }

    /// Combined standard deviation of the field-domain noise, V/m.
    pub fn total_noise_sigma(&self, e_rf: f64) -> f64 {
        let qpn = self.projection_min_field();
        (self.uncertainty_variance(e_rf) + qpn * qpn).sqrt()
    }
}

/// `dT/dE` at the RF field `e_rf` and fixed coupling detuning, by central
/// difference (forward difference at `e_rf = 0`).
pub fn transmission_slope(
    config: &LadderConfig,
    e_rf: f64,
    delta_e: f64,
    readout_delta_c: f64,
    engine: Engine,
) -> Result<f64> {
    if !delta_e.is_finite() || delta_e <= 0.0 {
        return Err(Error::invalid("delta_e", "finite-difference step must be positive"));
    }
    if !e_rf.is_finite() || e_rf < 0.0 {
        return Err(Error::invalid("e_rf", "RF field must be non-negative"));
    }
    let at = |e: f64| transmission(&config.with_rf_field(e).with_coupling_detuning(readout_delta_c), engine);
    if e_rf < delta_e {
        let (lo, hi) = (at(e_rf)?, at(e_rf + delta_e)?);
        Ok((hi - lo) / delta_e)
    } else {
        let (lo, hi) = (at(e_rf - delta_e)?, at(e_rf + delta_e)?);
        Ok((hi - lo) / (2.0 * delta_e))
    }
}

/// One draw of `T + slope · n`, `n ~ N(0, σ²)`. Not clamped to [0, 1].
pub fn sample_noisy_transmission<R: Rng + ?Sized>(t: f64, slope: f64, sigma: f64, rng: &mut R) -> f64 {
    let n: f64 = rng.sample(StandardNormal);
    t + slope * sigma * n
}

/// Generator for sub-stream `stream` of `seed`.
///
/// The generator is ChaCha8 keyed by `seed` (expanded with SplitMix64 as in
/// `SeedableRng::seed_from_u64`) with the ChaCha stream id set to `stream`, so
/// sub-streams never overlap and are independent of evaluation order.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Seed for a named stage of a run, derived from the run seed.
pub fn derive_seed(seed: u64, stage: u64) -> u64 {
    // SplitMix64 finaliser over seed ⊕ golden-ratio multiple of the stage tag.
    let mut z = seed ^ stage.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn spec() -> NoiseSpec {
        NoiseSpec {
            epsilon: 0.005,
            n_rydberg: 0.5e5,
            integration_time: 1e-4,
            dephasing_time: NoiseSpec::dephasing_time_from_rates(2.0 * PI * 3e3, 2.0 * PI * 2e3),
            rf_dipole: 1.9e-26,
            derivative_step: 1e-11,
        }
    }

    #[test]
    fn uncertainty_examples() {
        let s = spec();
        assert_eq!(s.uncertainty_variance(0.0), 0.0);
        assert_relative_eq!(s.uncertainty_variance(7e-4), 2.45e-9, max_relative = 1e-12);
        assert_relative_eq!(
            s.uncertainty_variance(2.0e-4),
            4.0 * s.uncertainty_variance(1.0e-4),
            max_relative = 1e-12
        );
    }

    #[test]
    fn projection_noise_scaling() {
        let s = spec();
        let base = s.projection_min_field();
        let more = NoiseSpec {
            n_rydberg: 4.0 * s.n_rydberg,
            ..s
        };
        assert_relative_eq!(more.projection_min_field(), 0.5 * base, max_relative = 1e-12);
        let stronger = NoiseSpec {
            rf_dipole: 2.0 * s.rf_dipole,
            ..s
        };
        assert_relative_eq!(stronger.projection_min_field(), 0.5 * base, max_relative = 1e-12);
    }

    #[test]
    fn total_sigma_limits() {
        let s = NoiseSpec { epsilon: 0.0, ..spec() };
        assert_relative_eq!(
            s.total_noise_sigma(5e-4),
            s.projection_min_field(),
            max_relative = 1e-12
        );
        let huge = NoiseSpec {
            n_rydberg: 1e40,
            ..spec()
        };
        assert_relative_eq!(
            huge.total_noise_sigma(5e-4),
            0.005f64.sqrt() * 5e-4,
            max_relative = 1e-9
        );
    }

    #[test]
    fn zero_sigma_is_noiseless() {
        let mut rng = substream(1, 0);
        assert_eq!(sample_noisy_transmission(0.4, -300.0, 0.0, &mut rng), 0.4);
    }

    #[test]
    fn substreams_are_reproducible_and_distinct() {
        let a: Vec<u64> = (0..4).map(|_| substream(9, 3).random()).collect();
        let mut r1 = substream(9, 3);
        let mut r2 = substream(9, 3);
        let mut r3 = substream(9, 4);
        let x: Vec<u64> = (0..8).map(|_| r1.random()).collect();
        let y: Vec<u64> = (0..8).map(|_| r2.random()).collect();
        let z: Vec<u64> = (0..8).map(|_| r3.random()).collect();
        assert_eq!(x, y);
        assert_ne!(x, z);
        assert_eq!(a.len(), 4);
        assert_ne!(derive_seed(1, 1), derive_seed(1, 2));
    }

    #[test]
    fn validation() {
        assert!(spec().validate().is_ok());
        assert!(NoiseSpec { epsilon: 1.0, ..spec() }.validate().is_err());
        assert!(NoiseSpec {
            n_rydberg: 0.5,
            ..spec()
        }
        .validate()
        .is_err());
        assert!(NoiseSpec {
            derivative_step: 0.0,
            ..spec()
        }
        .validate()
        .is_err());
    }
}
