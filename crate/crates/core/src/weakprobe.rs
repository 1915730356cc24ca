//! Closed-form probe coherence in the weak-probe limit.
//!
//! With the ground state fully populated and the Rydberg-Rydberg coherences
//! neglected, the four coherences `ρ₂₁…ρ₅₁` obey a tridiagonal 4×4 system.
//! Eliminating from the top gives a nested continued fraction for ρ₂₁.
//! Replacing the far-detuned interference branch by its leading-order effect
//! turns it into a shift of the RF detuning (AC Stark shift).

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quantum::{DecaySpec, DriveSet};

/// Denominators smaller than this (rad/s) are treated as zero.
pub const DENOMINATOR_FLOOR: f64 = 1e-30;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Probe coherence, plus the effective RF detuning when the Stark form is used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakProbeResult {
    pub rho21: Complex64,
    pub effective_rf_detuning: f64,
}

fn check_five_levels(decays: &DecaySpec) -> Result<()> {
    if decays.n_levels() != 5 {
        return Err(Error::invalid("decays", "weak-probe formulas need exactly five levels"));
    }
    Ok(())
}

fn guarded_div(num: Complex64, den: Complex64, what: &'static str) -> Result<Complex64> {
    if den.norm() < DENOMINATOR_FLOOR {
        return Err(Error::Singularity(what));
    }
    Ok(num / den)
}

/// Bare denominators `-i(cumulative detuning) + γ_k1` for levels 2..5.
fn bare_denominators(drives: &DriveSet, decays: &DecaySpec) -> [Complex64; 4] {
    let d = drives.detuning;
    let sums = [
        d.probe,
        d.probe + d.coupling,
        d.probe + d.coupling + d.rf,
        d.probe + d.coupling + d.rf + d.interference,
    ];
    std::array::from_fn(|k| -I * sums[k] + decays.gamma_pair(k + 1, 0))
}

/// Folds `base - (iΩ/2)²/inner` from the inside out. A vanishing coupling
/// truncates the fraction, so the deeper levels are never evaluated.
fn fold_level(base: Complex64, rabi: f64, inner: Option<Complex64>, what: &'static str) -> Result<Complex64> {
    match inner {
        Some(den) if rabi != 0.0 => {
            let half = 0.5 * I * rabi;
            Ok(base - guarded_div(half * half, den, what)?)
        }
        _ => Ok(base),
    }
}

fn probe_response(drives: &DriveSet, outer: Complex64) -> Result<Complex64> {
    let half_p = 0.5 * I * drives.rabi.probe;
    Ok(-guarded_div(half_p, outer, "rho21 outer denominator")?)
}

/// ρ₂₁ from the full four-level continued fraction.
pub fn rho21_exact_weakprobe(drives: &DriveSet, decays: &DecaySpec) -> Result<Complex64> {
    check_five_levels(decays)?;
    let [d2, d3, d4, d5] = bare_denominators(drives, decays);
    let r = drives.rabi;
    let l4 = fold_level(d4, r.interference, Some(d5), "rho51 denominator")?;
    let l3 = fold_level(d3, r.rf, Some(l4), "rho41 denominator")?;
    let l2 = fold_level(d2, r.coupling, Some(l3), "rho31 denominator")?;
    probe_response(drives, l2)
}

/// Magnitude of the interference-induced level shift, `Ω_I²/(4Δ_I)`.
pub fn ac_stark_shift(omega_i: f64, delta_i: f64) -> Result<f64> {
    if delta_i == 0.0 || !delta_i.is_finite() {
        return Err(Error::invalid(
            "delta_i",
            "AC Stark shift needs a finite non-zero detuning",
        ));
    }
    Ok(omega_i * omega_i / (4.0 * delta_i))
}

/// ρ₂₁ with the interference branch replaced by the shifted RF detuning
/// `Δ′_RF = Δ_RF − Ω_I²/(4Δ_I)`.
pub fn rho21_stark_approx(drives: &DriveSet, decays: &DecaySpec) -> Result<WeakProbeResult> {
    check_five_levels(decays)?;
    let shift = ac_stark_shift(drives.rabi.interference, drives.detuning.interference)?;
    let effective_rf_detuning = drives.detuning.rf - shift;
    let d = drives.detuning;
    let [d2, d3, _, _] = bare_denominators(drives, decays);
    let d4 = -I * (d.probe + d.coupling + effective_rf_detuning) + decays.gamma_pair(3, 0);
    let r = drives.rabi;
    let l3 = fold_level(d3, r.rf, Some(d4), "rho41 denominator")?;
    let l2 = fold_level(d2, r.coupling, Some(l3), "rho31 denominator")?;
    Ok(WeakProbeResult {
        rho21: probe_response(drives, l2)?,
        effective_rf_detuning,
    })
}

/// Solves the weak-probe system directly for `(ρ₂₁, ρ₃₁, ρ₄₁, ρ₅₁)`.
pub fn solve_weakprobe_linear_system(drives: &DriveSet, decays: &DecaySpec) -> Result<[Complex64; 4]> {
    check_five_levels(decays)?;
    let den = bare_denominators(drives, decays);
    let r = drives.rabi;
    let off = [0.5 * I * r.coupling, 0.5 * I * r.rf, 0.5 * I * r.interference];
    let mut a = Matrix4::<Complex64>::zeros();
    for k in 0..4 {
        a[(k, k)] = den[k];
    }
    for k in 0..3 {
        a[(k, k + 1)] = off[k];
        a[(k + 1, k)] = off[k];
    }
    let b = Vector4::new(-0.5 * I * r.probe, Complex64::ZERO, Complex64::ZERO, Complex64::ZERO);
    let lu = a.lu();
    if (0..4).any(|k| lu.u()[(k, k)].norm() < DENOMINATOR_FLOOR) {
        return Err(Error::Singularity("weak-probe linear system"));
    }
    let x = lu.solve(&b).ok_or(Error::Singularity("weak-probe linear system"))?;
    Ok([x[0], x[1], x[2], x[3]])
}
