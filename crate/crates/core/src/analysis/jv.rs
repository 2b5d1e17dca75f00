use crate::analysis::metrics::IVCurve;
use crate::device::{generate_mesh, DeviceStack, MeshConfig};
use crate::error::{Error, Result};
use crate::numeric::tidy;
use crate::optics::{generation_profile, OpticsConfig, SolarSpectrum};
use crate::solver::{solve_bias, solve_equilibrium, walk_to, SolverConfig};

/// Everything needed to turn a stack into curves.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub mesh: MeshConfig,
    pub solver: SolverConfig,
    pub optics: OpticsConfig,
    /// Upper end of the bias sweep (V).
    pub vmax: f64,
    /// Bias increment (V).
    pub vstep: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            mesh: MeshConfig::default(),
            solver: SolverConfig::default(),
            optics: OpticsConfig::default(),
            vmax: 1.3,
            vstep: 0.02,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.vstep > 0.0 && self.vstep.is_finite()) {
            return Err(Error::Usage(format!(
                "voltage step must be > 0, got {}",
                self.vstep
            )));
        }
        if !(self.vmax >= 2.0 * self.vstep && self.vmax.is_finite()) {
            return Err(Error::Usage(format!(
                "vmax = {} leaves fewer than 3 bias points",
                self.vmax
            )));
        }
        self.solver.validate()
    }

    /// Bias points 0, vstep, 2·vstep … ≤ vmax.
    pub fn voltages(&self) -> Vec<f64> {
        let n = (self.vmax / self.vstep + 1e-9).floor() as usize;
        (0..=n).map(|k| tidy(k as f64 * self.vstep)).collect()
    }
}

/// J-V curve from 0 to `cfg.vmax`. `spectrum = None` gives the dark curve.
///
/// Illuminated curves must cross J = 0 before `vmax`. Once past the crossing
/// a bias point the solver cannot reach ends the curve instead of failing it.
pub fn compute_jv(
    stack: &DeviceStack,
    cfg: &SimConfig,
    spectrum: Option<&SolarSpectrum>,
) -> Result<IVCurve> {
    cfg.validate()?;
    stack.validate()?;
    let mesh = generate_mesh(stack, &cfg.mesh)?;
    let eq = solve_equilibrium(stack, &mesh, &cfg.solver)?;
    let (gen, pin) = match spectrum {
        Some(s) => (
            Some(generation_profile(stack, &mesh, s, &cfg.optics)?),
            s.total_power(),
        ),
        None => (None, 0.0),
    };
    let gen = gen.filter(|g| !g.is_dark());
    let illuminated = gen.is_some();

    let mut state = match &gen {
        Some(g) => solve_bias(&eq, 0.0, Some(g), &cfg.solver)?,
        None => eq,
    };
    let mut samples = Vec::new();
    let mut crossed = false;
    for v in cfg.voltages() {
        match walk_to(&state, v, gen.as_ref(), &cfg.solver) {
            Ok(s) => state = s,
            Err(e) if crossed => {
                log::warn!("J-V curve truncated at {v:.3} V: {e}");
                break;
            }
            Err(e) => return Err(e),
        }
        let j = -state.current;
        crossed |= j <= 0.0;
        samples.push((v, j));
    }
    if illuminated && !crossed {
        return Err(Error::VocOutOfRange { vmax: cfg.vmax });
    }
    IVCurve::new(samples, pin)
}
