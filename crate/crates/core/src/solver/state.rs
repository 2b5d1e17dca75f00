use std::sync::Arc;

use super::model::DeviceModel;
use crate::constants::thermal_voltage;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Newton update norm at which the inner Poisson solve stops (V).
    pub potential_tol: f64,
    /// Gummel residual (max of |Δψ|/Vt and relative carrier updates) at convergence.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub max_poisson_iterations: usize,
    /// Gummel iterations after which a coupled Newton solve takes over from
    /// the current iterate. 0 disables the handoff.
    pub newton_handoff: usize,
    pub max_newton_iterations: usize,
    /// Largest potential change a single Newton update may apply (V).
    pub damping_clamp: f64,
    /// Largest bias step taken in one continuation solve (V).
    pub voltage_step: f64,
    /// Current density treated as zero (mA/cm²).
    pub j_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            potential_tol: 1e-11,
            tolerance: 1e-9,
            max_iterations: 3000,
            max_poisson_iterations: 200,
            newton_handoff: 40,
            max_newton_iterations: 60,
            damping_clamp: 2.0 * thermal_voltage(300.0),
            voltage_step: 0.02,
            j_tol: 1e-6,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> crate::Result<()> {
        let fields = [
            ("potential_tol", self.potential_tol),
            ("tolerance", self.tolerance),
            ("damping_clamp", self.damping_clamp),
            ("voltage_step", self.voltage_step),
            ("j_tol", self.j_tol),
        ];
        for (name, v) in fields {
            if !(v > 0.0 && v.is_finite()) {
                return Err(crate::Error::Usage(format!("solver {name} must be > 0")));
            }
        }
        if self.max_iterations == 0
            || self.max_poisson_iterations == 0
            || self.max_newton_iterations == 0
        {
            return Err(crate::Error::Usage(
                "solver iteration limits must be > 0".into(),
            ));
        }
        Ok(())
    }
}

/// Mesh-resolved solution at one operating point.
#[derive(Debug, Clone)]
pub struct SimState {
    pub model: Arc<DeviceModel>,
    /// Electrostatic potential (V).
    pub psi: Vec<f64>,
    /// Electron density (cm⁻³).
    pub n: Vec<f64>,
    /// Hole density (cm⁻³).
    pub p: Vec<f64>,
    /// Terminal current density (mA/cm²), positive for conventional current
    /// flowing from the back contact to the front contact.
    pub current: f64,
    /// Bias applied to the back contact (V).
    pub voltage: f64,
    pub illuminated: bool,
    pub converged: bool,
    pub iterations: usize,
    pub residual: f64,
}

impl SimState {
    /// Electron quasi-Fermi level per node (eV).
    pub fn efn(&self) -> Vec<f64> {
        (0..self.psi.len())
            .map(|i| self.model.efn(i, self.psi[i], self.n[i]))
            .collect()
    }

    /// Hole quasi-Fermi level per node (eV).
    pub fn efp(&self) -> Vec<f64> {
        (0..self.psi.len())
            .map(|i| self.model.efp(i, self.psi[i], self.p[i]))
            .collect()
    }

    /// Conduction band edge per node (eV).
    pub fn ec(&self) -> Vec<f64> {
        self.psi
            .iter()
            .zip(&self.model.affinity)
            .map(|(psi, chi)| -chi - psi)
            .collect()
    }

    /// Valence band edge per node (eV).
    pub fn ev(&self) -> Vec<f64> {
        self.ec()
            .iter()
            .zip(&self.model.bandgap)
            .map(|(ec, eg)| ec - eg)
            .collect()
    }
}
