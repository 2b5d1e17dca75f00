use std::fmt::Write as _;
use std::sync::Arc;

use rayon::prelude::*;

use crate::analysis::jv::SimConfig;
use crate::constants::Q;
use crate::device::{generate_mesh, DeviceStack};
use crate::error::{Error, Result};
use crate::optics::profile_for_lines;
use crate::optics::SpectralLine;
use crate::solver::{equilibrium_for, solve_bias, DeviceModel};

/// Probe photon flux (photons/cm²/s).
pub const PROBE_FLUX: f64 = 1e16;

/// Accepted wavelength window (nm).
pub const QE_WINDOW: (f64, f64) = (300.0, 1300.0);

#[derive(Debug, Clone, PartialEq, Default)]
pub struct QECurve {
    /// (wavelength nm, EQE fraction) for every wavelength that solved.
    pub samples: Vec<(f64, f64)>,
    /// Wavelengths whose solve failed, with the reason.
    pub gaps: Vec<(f64, String)>,
}

impl QECurve {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("wavelength_nm,EQE\n");
        for (wl, qe) in &self.samples {
            let _ = writeln!(out, "{wl},{qe}");
        }
        out
    }

    pub fn gap_log(&self) -> String {
        let mut out = String::new();
        for (wl, msg) in &self.gaps {
            let _ = writeln!(out, "{wl} nm: {msg}");
        }
        out
    }

    pub fn at(&self, wavelength_nm: f64) -> Option<f64> {
        self.samples
            .iter()
            .find(|(wl, _)| (wl - wavelength_nm).abs() < 1e-9)
            .map(|s| s.1)
    }
}

/// Short-circuit external quantum efficiency at each wavelength, computed
/// with the probe flux. Wavelengths run on the current rayon pool.
pub fn compute_qe(stack: &DeviceStack, wavelengths: &[f64], cfg: &SimConfig) -> Result<QECurve> {
    compute_qe_with_flux(stack, wavelengths, cfg, PROBE_FLUX)
}

pub fn compute_qe_with_flux(
    stack: &DeviceStack,
    wavelengths: &[f64],
    cfg: &SimConfig,
    flux: f64,
) -> Result<QECurve> {
    if let Some(wl) = wavelengths
        .iter()
        .find(|wl| !(QE_WINDOW.0..=QE_WINDOW.1).contains(*wl))
    {
        return Err(Error::Usage(format!(
            "wavelength {wl} nm outside {}-{} nm",
            QE_WINDOW.0, QE_WINDOW.1
        )));
    }
    if !(flux > 0.0 && flux.is_finite()) {
        return Err(Error::Usage(format!("probe flux must be > 0, got {flux}")));
    }
    cfg.solver.validate()?;
    let mesh = generate_mesh(stack, &cfg.mesh)?;
    let model = Arc::new(DeviceModel::new(stack, &mesh)?);
    let eq = equilibrium_for(model, &cfg.solver)?;
    let j_dark = eq.current;
    let unit = Q * flux * 1e3;

    let results: Vec<(f64, Result<f64>)> = wavelengths
        .par_iter()
        .map(|&wl| {
            let line = SpectralLine {
                wavelength_nm: wl,
                photon_flux: flux,
            };
            let gen = profile_for_lines(stack, &mesh, &[line], &cfg.optics);
            let qe = if gen.is_dark() {
                Ok(0.0)
            } else {
                solve_bias(&eq, 0.0, Some(&gen), &cfg.solver)
                    .map(|s| (s.current - j_dark).abs() / unit)
            };
            (wl, qe)
        })
        .collect();

    let mut curve = QECurve::default();
    for (wl, r) in results {
        match r {
            Ok(qe) => curve.samples.push((wl, qe)),
            Err(e) => curve.gaps.push((wl, e.to_string())),
        }
    }
    Ok(curve)
}
