//! One-dimensional drift-diffusion simulation of layered thin-film solar cells.
//!
//! The crate is organised bottom-up:
//!
//! * [`device`] – materials, layers, contacts and the discretisation mesh.
//! * [`optics`] – solar spectrum handling and Beer–Lambert photogeneration.
//! * [`transport`] – carrier statistics, recombination and Scharfetter–Gummel fluxes.
//! * [`solver`] – Gummel iteration, with a coupled Newton finish, for the Poisson / continuity system.
//! * [`analysis`] – J-V and QE characteristics, cell metrics and band diagrams.
//! * [`sweep`] – two-parameter grid sweeps producing metric heatmaps.
//! * [`cli`] – command implementations behind the `thinfilm` binary.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod constants;
pub mod device;
pub mod error;
pub mod linalg;
mod numeric;
pub mod optics;
pub mod solver;
pub mod sweep;
pub mod transport;

pub use error::{Error, Result};
