//! Physical scenario of the five-level receiver.

use crate::error::{Error, Result};
use crate::quantum::{rabi_from_field, DecaySpec, DriveSet, LevelScheme, PerField};
use crate::spectroscopy::CellSpec;

/// Dipoles, field amplitudes (V/m), detunings (rad/s), decay rates and cell
/// geometry. The dipole scheme carries the probe, coupling, RF and
/// interference transitions in ladder order.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderConfig {
    pub levels: LevelScheme,
    pub fields: PerField,
    pub detuning: PerField,
    pub decays: DecaySpec,
    pub atomic_density: f64,
    pub cell_length: f64,
}

impl LadderConfig {
    pub fn validate(&self) -> Result<()> {
        if self.levels.n_levels() != 5 || self.decays.n_levels() != 5 {
            return Err(Error::invalid("levels", "the receiver model is a five-level ladder"));
        }
        for f in self.fields.to_array() {
            if !f.is_finite() || f < 0.0 {
                return Err(Error::invalid(
                    "fields",
                    format!("field amplitude {f} must be finite and >= 0"),
                ));
            }
        }
        if self.detuning.to_array().iter().any(|d| !d.is_finite()) {
            return Err(Error::invalid("detuning", "detunings must be finite"));
        }
        self.cell().map(|_| ())
    }

    /// Rabi frequencies from the field amplitudes.
    pub fn drives(&self) -> Result<DriveSet> {
        let mu = self.levels.dipoles();
        let f = self.fields;
        let rabi = PerField::new(
            rabi_from_field(mu[0], f.probe)?,
            rabi_from_field(mu[1], f.coupling)?,
            rabi_from_field(mu[2], f.rf)?,
            rabi_from_field(mu[3], f.interference)?,
        );
        DriveSet::new(rabi, self.detuning)
    }

    pub fn cell(&self) -> Result<CellSpec> {
        CellSpec::new(
            self.atomic_density,
            self.cell_length,
            self.levels.dipoles()[0],
            self.levels.probe_wavelength(),
        )
    }

    pub fn probe_dipole(&self) -> f64 {
        self.levels.dipoles()[0]
    }

    pub fn rf_dipole(&self) -> f64 {
        self.levels.dipoles()[2]
    }

    pub fn with_rf_field(&self, e_rf: f64) -> Self {
        let mut c = self.clone();
        c.fields.rf = e_rf;
        c
    }

    pub fn with_interference_field(&self, e_i: f64) -> Self {
        let mut c = self.clone();
        c.fields.interference = e_i;
        c
    }

    pub fn with_coupling_detuning(&self, delta_c: f64) -> Self {
        let mut c = self.clone();
        c.detuning.coupling = delta_c;
        c
    }
}
