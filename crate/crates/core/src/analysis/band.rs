use std::fmt::Write as _;

use crate::constants::UM_TO_CM;
use crate::error::{Error, Result};
use crate::solver::SimState;

/// Band edges and quasi-Fermi levels (eV) against position (µm).
#[derive(Debug, Clone, PartialEq)]
pub struct BandDiagram {
    pub x_um: Vec<f64>,
    pub ec: Vec<f64>,
    pub ev: Vec<f64>,
    pub efn: Vec<f64>,
    pub efp: Vec<f64>,
}

pub fn band_diagram(state: &SimState) -> Result<BandDiagram> {
    if !state.converged {
        return Err(Error::Unconverged);
    }
    Ok(BandDiagram {
        x_um: state
            .model
            .mesh
            .nodes
            .iter()
            .map(|x| x / UM_TO_CM)
            .collect(),
        ec: state.ec(),
        ev: state.ev(),
        efn: state.efn(),
        efp: state.efp(),
    })
}

impl BandDiagram {
    pub fn len(&self) -> usize {
        self.x_um.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x_um.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("x_um,Ec_eV,Ev_eV,EFn_eV,EFp_eV\n");
        for i in 0..self.len() {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                self.x_um[i], self.ec[i], self.ev[i], self.efn[i], self.efp[i]
            );
        }
        out
    }
}
