//! Curves and figures of merit derived from solved device states.

pub mod band;
pub mod jv;
pub mod metrics;
pub mod qe;

pub use band::{band_diagram, BandDiagram};
pub use jv::{compute_jv, SimConfig};
pub use metrics::{extract_metrics, pce_from, CellMetrics, IVCurve};
pub use qe::{compute_qe, compute_qe_with_flux, QECurve, PROBE_FLUX, QE_WINDOW};

use std::fmt::Write as _;

/// `V_volt,J_mA_cm2` table.
pub fn jv_csv(curve: &IVCurve) -> String {
    let mut out = String::from("V_volt,J_mA_cm2\n");
    for (v, j) in &curve.samples {
        let _ = writeln!(out, "{v},{j}");
    }
    out
}

/// `V_volt,P_mW_cm2` table.
pub fn pv_csv(curve: &IVCurve) -> String {
    let mut out = String::from("V_volt,P_mW_cm2\n");
    for (v, p) in curve.power() {
        let _ = writeln!(out, "{v},{p}");
    }
    out
}
