//! Physical constants (CODATA 2018 exact/recommended values) and unit factors.

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Vacuum permittivity, F/m.
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;
/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 2.997_924_58e8;
/// Free-space impedance used by the link budget, Ω (rounded, not μ₀c).
pub const FREE_SPACE_IMPEDANCE: f64 = 377.0;
/// Elementary charge times Bohr radius, C·m.
pub const E_A0: f64 = 1.602_176_634e-19 * 5.291_772_109_03e-11;

/// 1 μV/cm expressed in V/m.
pub const MICROVOLT_PER_CM: f64 = 1e-4;

/// Converts a cyclic frequency in Hz to angular frequency in rad/s.
#[inline]
pub fn hz_to_rad_s(f: f64) -> f64 {
    2.0 * std::f64::consts::PI * f
}

/// Converts an angular frequency in rad/s to a cyclic frequency in Hz.
#[inline]
pub fn rad_s_to_hz(w: f64) -> f64 {
    w / (2.0 * std::f64::consts::PI)
}
