use std::fmt::{self, Write as _};
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{compute_jv, extract_metrics, CellMetrics, SimConfig};
use crate::device::DeviceStack;
use crate::error::{Error, Result};
use crate::numeric::axis_text;
use crate::optics::SolarSpectrum;
use crate::sweep::axis::SweepAxis;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Pce,
    Ff,
    Voc,
    Jsc,
}

impl Metric {
    pub const ALL: [Metric; 4] = [Metric::Pce, Metric::Ff, Metric::Jsc, Metric::Voc];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Pce => "pce",
            Metric::Ff => "ff",
            Metric::Voc => "voc",
            Metric::Jsc => "jsc",
        }
    }

    /// Value as written to heatmaps: PCE and FF in percent, Voc in V,
    /// Jsc in mA/cm².
    pub fn value(self, m: &CellMetrics) -> f64 {
        match self {
            Metric::Pce => m.pce * 100.0,
            Metric::Ff => m.ff * 100.0,
            Metric::Voc => m.voc,
            Metric::Jsc => m.jsc,
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pce" => Ok(Metric::Pce),
            "ff" => Ok(Metric::Ff),
            "voc" => Ok(Metric::Voc),
            "jsc" => Ok(Metric::Jsc),
            _ => Err(Error::Usage(format!(
                "unknown metric '{s}' (expected pce, ff, voc or jsc)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct SweepConfig {
    pub sim: SimConfig,
    /// Worker threads; 0 means one per available core.
    pub jobs: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellFailure {
    pub i: usize,
    pub j: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeatmapResult {
    pub axis1: SweepAxis,
    pub axis2: SweepAxis,
    /// Row i = axis1 value i, column j = axis2 value j.
    pub cells: Vec<Vec<Option<CellMetrics>>>,
    pub failures: Vec<CellFailure>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BestCell {
    pub i: usize,
    pub j: usize,
    pub axis1_value: f64,
    pub axis2_value: f64,
    pub metrics: CellMetrics,
}

/// Solves the J-V curve of every grid cell. Cell failures are recorded, not
/// raised; invalid axes fail before any solve.
pub fn run_grid_sweep(
    template: &DeviceStack,
    axis1: &SweepAxis,
    axis2: &SweepAxis,
    spectrum: &SolarSpectrum,
    cfg: &SweepConfig,
) -> Result<HeatmapResult> {
    axis1.validate()?;
    axis2.validate()?;
    template.validate()?;
    axis1.check_target(template)?;
    axis2.check_target(template)?;
    let same_layer = template.find_layer(&axis1.layer)? == template.find_layer(&axis2.layer)?;
    if same_layer && axis1.param == axis2.param {
        return Err(Error::Axis(format!(
            "{} and {} target the same layer parameter",
            axis1.label(),
            axis2.label()
        )));
    }
    cfg.sim.validate()?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| Error::Sweep(format!("cannot start worker pool: {e}")))?;
    let (rows, cols) = (axis1.len(), axis2.len());
    let outcomes: Vec<Result<CellMetrics>> = pool.install(|| {
        (0..rows * cols)
            .into_par_iter()
            .map(|k| {
                let (i, j) = (k / cols, k % cols);
                let mut stack = template.clone();
                axis1.apply(&mut stack, axis1.values[i])?;
                axis2.apply(&mut stack, axis2.values[j])?;
                stack.validate()?;
                let curve = compute_jv(&stack, &cfg.sim, Some(spectrum))?;
                extract_metrics(&curve)
            })
            .collect()
    });

    let mut cells = vec![vec![None; cols]; rows];
    let mut failures = Vec::new();
    for (k, outcome) in outcomes.into_iter().enumerate() {
        let (i, j) = (k / cols, k % cols);
        match outcome {
            Ok(m) => cells[i][j] = Some(m),
            Err(e) => failures.push(CellFailure {
                i,
                j,
                message: e.to_string(),
            }),
        }
    }
    Ok(HeatmapResult {
        axis1: axis1.clone(),
        axis2: axis2.clone(),
        cells,
        failures,
    })
}

/// Argmax of `metric` over successful cells. Ties go to the smaller axis1
/// value, then the smaller axis2 value.
pub fn best_cell(result: &HeatmapResult, metric: Metric) -> Result<BestCell> {
    let mut best: Option<BestCell> = None;
    for (i, row) in result.cells.iter().enumerate() {
        for (j, cell) in row.iter().enumerate() {
            let Some(m) = cell else { continue };
            let v = metric.value(m);
            if v.is_nan() {
                continue;
            }
            if best.is_none_or(|b| v > metric.value(&b.metrics)) {
                best = Some(BestCell {
                    i,
                    j,
                    axis1_value: result.axis1.values[i],
                    axis2_value: result.axis2.values[j],
                    metrics: *m,
                });
            }
        }
    }
    best.ok_or_else(|| Error::Sweep("every cell of the sweep failed".into()))
}

impl HeatmapResult {
    pub fn successes(&self) -> usize {
        self.cells.iter().flatten().filter(|c| c.is_some()).count()
    }

    /// Matrix of `metric`; first row holds axis2 values, first column axis1
    /// values. Failed cells are left empty.
    pub fn metric_csv(&self, metric: Metric) -> String {
        let mut out = format!("{}\\{}", self.axis1.label(), self.axis2.label());
        for v in &self.axis2.values {
            let _ = write!(out, ",{}", axis_text(*v));
        }
        out.push('\n');
        for (i, row) in self.cells.iter().enumerate() {
            out.push_str(&axis_text(self.axis1.values[i]));
            for cell in row {
                match cell {
                    Some(m) => {
                        let _ = write!(out, ",{}", metric.value(m));
                    }
                    None => out.push(','),
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn failures_csv(&self) -> String {
        let mut out = format!("i,j,{},{},error\n", self.axis1.label(), self.axis2.label());
        for f in &self.failures {
            let _ = writeln!(
                out,
                "{},{},{},{},\"{}\"",
                f.i,
                f.j,
                axis_text(self.axis1.values[f.i]),
                axis_text(self.axis2.values[f.j]),
                f.message.replace('"', "\"\"")
            );
        }
        out
    }
}
