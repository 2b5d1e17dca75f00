//! Two-parameter grid sweeps over a template stack.

pub mod axis;
pub mod grid;

pub use axis::{SweepAxis, SweepParam};
pub use grid::{
    best_cell, run_grid_sweep, BestCell, CellFailure, HeatmapResult, Metric, SweepConfig,
};
