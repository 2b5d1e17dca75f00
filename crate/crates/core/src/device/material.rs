use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Single-level bulk defect used for Shockley–Read–Hall recombination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrapSpec {
    /// Trap level relative to the intrinsic level (eV).
    #[serde(rename = "energy_level_eV")]
    pub energy_level: f64,
    /// Trap density (cm⁻³).
    #[serde(rename = "density_cm3")]
    pub density: f64,
    /// Electron capture cross-section (cm²).
    #[serde(rename = "sigma_e_cm2")]
    pub sigma_e: f64,
    /// Hole capture cross-section (cm²).
    #[serde(rename = "sigma_p_cm2")]
    pub sigma_p: f64,
}

impl Default for TrapSpec {
    /// Neutral midgap level, Nt = 1e14 cm⁻³ and σ = 1e-15 cm² for both carriers.
    fn default() -> Self {
        TrapSpec {
            energy_level: 0.0,
            density: 1e14,
            sigma_e: 1e-15,
            sigma_p: 1e-15,
        }
    }
}

impl TrapSpec {
    pub fn validate(&self) -> std::result::Result<(), String> {
        if !(self.density >= 0.0) {
            return Err(format!("trap density must be >= 0, got {}", self.density));
        }
        if !(self.sigma_e > 0.0 && self.sigma_p > 0.0) {
            return Err("trap capture cross-sections must be > 0".into());
        }
        if !self.energy_level.is_finite() {
            return Err("trap energy level must be finite".into());
        }
        Ok(())
    }

    /// Electron lifetime 1/(σe·vth·Nt) in seconds; infinite without traps.
    pub fn tau_n(&self, vth_e: f64) -> f64 {
        1.0 / (self.sigma_e * vth_e * self.density)
    }

    /// Hole lifetime 1/(σp·vth·Nt) in seconds; infinite without traps.
    pub fn tau_p(&self, vth_h: f64) -> f64 {
        1.0 / (self.sigma_p * vth_h * self.density)
    }
}

/// Electronic parameter set of one semiconductor.
#[derive(Debug, Clone, PartialEq)]
pub struct Material {
    pub name: String,
    /// Eg (eV).
    pub bandgap: f64,
    /// χ (eV).
    pub electron_affinity: f64,
    pub rel_permittivity: f64,
    /// Conduction band effective density of states (cm⁻³).
    pub nc: f64,
    /// Valence band effective density of states (cm⁻³).
    pub nv: f64,
    /// Electron thermal velocity (cm/s).
    pub vth_e: f64,
    /// Hole thermal velocity (cm/s).
    pub vth_h: f64,
    /// Electron mobility (cm²/V·s).
    pub mu_e: f64,
    /// Hole mobility (cm²/V·s).
    pub mu_h: f64,
    /// Radiative recombination coefficient (cm³/s).
    pub radiative_coeff: f64,
    pub trap: Option<TrapSpec>,
}

impl Material {
    pub fn validate(&self) -> Result<()> {
        let fail = |reason: String| Error::InvalidMaterial {
            name: self.name.clone(),
            reason,
        };
        let positive = [
            ("bandgap", self.bandgap),
            ("Nc", self.nc),
            ("Nv", self.nv),
            ("mu_e", self.mu_e),
            ("mu_h", self.mu_h),
            ("vth_e", self.vth_e),
            ("vth_h", self.vth_h),
        ];
        for (field, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(fail(format!("{field} must be > 0, got {value}")));
            }
        }
        if !(self.rel_permittivity >= 1.0) {
            return Err(fail(format!(
                "rel_permittivity must be >= 1, got {}",
                self.rel_permittivity
            )));
        }
        if !self.electron_affinity.is_finite() {
            return Err(fail("electron_affinity must be finite".into()));
        }
        if !(self.radiative_coeff >= 0.0) {
            return Err(fail("radiative_coeff must be >= 0".into()));
        }
        if let Some(trap) = &self.trap {
            trap.validate().map_err(fail)?;
        }
        Ok(())
    }
}

/// Materials keyed by name.
pub type MaterialLibrary = BTreeMap<String, Material>;

#[allow(clippy::too_many_arguments)]
fn table_row(
    name: &str,
    bandgap: f64,
    electron_affinity: f64,
    rel_permittivity: f64,
    nc: f64,
    nv: f64,
    vth: f64,
    mu_e: f64,
    mu_h: f64,
) -> Material {
    Material {
        name: name.to_string(),
        bandgap,
        electron_affinity,
        rel_permittivity,
        nc,
        nv,
        vth_e: vth,
        vth_h: vth,
        mu_e,
        mu_h,
        radiative_coeff: 0.0,
        trap: Some(TrapSpec::default()),
    }
}

/// The four layer materials of the GaAs/CIGS/CdS/ZnO cell.
pub fn default_materials() -> MaterialLibrary {
    [
        table_row("p-GaAs", 1.420, 4.070, 12.900, 2e18, 1e19, 1e7, 1e3, 1e2),
        table_row(
            "p-CIGS", 1.100, 4.500, 13.600, 2.2e18, 1.8e19, 1e7, 1e2, 1e1,
        ),
        table_row("n-CdS", 2.450, 4.400, 10.000, 2.2e18, 1.8e19, 1e7, 1e2, 1e1),
        table_row(
            "n-ZnO", 3.300, 4.600, 9.000, 2.2e18, 1.8e19, 1e7, 1e2, 2.5e1,
        ),
    ]
    .into_iter()
    .map(|m| (m.name.clone(), m))
    .collect()
}
