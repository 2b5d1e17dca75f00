//! Physical constants in the unit system used throughout the crate
//! (cm, s, V, eV, cm⁻³).

/// Elementary charge (C).
pub const Q: f64 = 1.602_176_634e-19;

/// Boltzmann constant (eV/K).
pub const K_B_EV: f64 = 8.617_333_262_145e-5;

/// Vacuum permittivity (F/cm).
pub const EPS0: f64 = 8.854_187_812_8e-14;

/// Planck constant (J·s).
pub const H_PLANCK: f64 = 6.626_070_15e-34;

/// Speed of light (m/s).
pub const C_LIGHT: f64 = 2.997_924_58e8;

/// h·c/q expressed in eV·nm, so that E(eV) = HC_EV_NM / λ(nm).
pub const HC_EV_NM: f64 = 1_239.841_984;

/// Micrometres to centimetres.
pub const UM_TO_CM: f64 = 1e-4;

/// Thermal voltage kT/q in volts.
pub fn thermal_voltage(temperature_k: f64) -> f64 {
    K_B_EV * temperature_k
}
