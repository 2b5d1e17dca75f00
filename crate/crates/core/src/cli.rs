//! Command-line front end.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::analysis::{
    band_diagram, compute_jv, compute_qe, extract_metrics, jv_csv, pv_csv, CellMetrics, SimConfig,
};
use crate::device::{generate_mesh, load_device, DeviceStack, Preset};
use crate::error::{Error, Result};
use crate::numeric::tidy;
use crate::optics::{generation_profile, load_spectrum, SolarSpectrum, SpectrumMode};
use crate::solver::{equilibrium_for, solve_bias, DeviceModel};
use crate::sweep::{best_cell, run_grid_sweep, BestCell, Metric, SweepAxis, SweepConfig};

#[derive(Debug, Parser)]
#[command(
    name = "thinfilm",
    version,
    about = "1D drift-diffusion thin-film solar cell simulator"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Device description (JSON).
    #[arg(long, global = true, conflicts_with = "preset")]
    pub device: Option<PathBuf>,
    /// Built-in stack: pn-baseline, pn-optimized or ppn-optimized.
    #[arg(long, global = true)]
    pub preset: Option<Preset>,
    /// Two-column spectrum file (nm, W/m²/nm). Defaults to the bundled AM1.5G table.
    #[arg(long, global = true)]
    pub spectrum: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Worker threads for qe and sweep (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
    /// Temperature in kelvin; overrides the device file.
    #[arg(long = "temp-K", global = true)]
    pub temp_k: Option<f64>,
    /// More log output (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Equilibrium and short-circuit working point with band diagrams.
    Simulate,
    /// Current-voltage and power-voltage curves with cell metrics.
    Jv(JvArgs),
    /// External quantum efficiency spectrum.
    Qe(QeArgs),
    /// Two-parameter grid sweep producing metric heatmaps.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct JvArgs {
    #[arg(long, default_value_t = 1.3)]
    pub vmax: f64,
    #[arg(long, default_value_t = 0.02)]
    pub vstep: f64,
    /// Dark curve only.
    #[arg(long)]
    pub dark: bool,
}

#[derive(Debug, Args)]
pub struct QeArgs {
    #[arg(long, default_value_t = 300.0)]
    pub wl_start: f64,
    #[arg(long, default_value_t = 1200.0)]
    pub wl_stop: f64,
    #[arg(long, default_value_t = 10.0)]
    pub wl_step: f64,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// LAYER.PARAM=start:stop:step or LAYER.PARAM=1eA:1eB
    #[arg(long)]
    pub axis1: SweepAxis,
    #[arg(long)]
    pub axis2: SweepAxis,
    #[arg(long, default_value = "pce")]
    pub metric: Metric,
}

/// Metrics in report units (FF and PCE in percent).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricsReport {
    #[serde(rename = "Jsc_mA_cm2")]
    pub jsc: Option<f64>,
    #[serde(rename = "Voc_V")]
    pub voc: Option<f64>,
    #[serde(rename = "FF_percent")]
    pub ff: Option<f64>,
    #[serde(rename = "PCE_percent")]
    pub pce: Option<f64>,
    #[serde(rename = "Vmp_V")]
    pub vmp: Option<f64>,
    #[serde(rename = "Jmp_mA_cm2")]
    pub jmp: Option<f64>,
    #[serde(rename = "Pmax_mW_cm2")]
    pub pmax: Option<f64>,
    #[serde(rename = "Pin_mW_cm2")]
    pub pin: Option<f64>,
}

impl MetricsReport {
    pub fn empty() -> Self {
        MetricsReport {
            jsc: None,
            voc: None,
            ff: None,
            pce: None,
            vmp: None,
            jmp: None,
            pmax: None,
            pin: None,
        }
    }
}

impl From<&CellMetrics> for MetricsReport {
    fn from(m: &CellMetrics) -> Self {
        MetricsReport {
            jsc: Some(m.jsc),
            voc: Some(m.voc),
            ff: Some(m.ff * 100.0),
            pce: Some(m.pce * 100.0),
            vmp: Some(m.vmp),
            jmp: Some(m.jmp),
            pmax: Some(m.pmax),
            pin: Some(m.pin),
        }
    }
}

#[derive(Debug, Serialize)]
struct BestEntry {
    i: usize,
    j: usize,
    axis1_value: f64,
    axis2_value: f64,
    metrics: MetricsReport,
}

impl From<&BestCell> for BestEntry {
    fn from(b: &BestCell) -> Self {
        BestEntry {
            i: b.i,
            j: b.j,
            axis1_value: b.axis1_value,
            axis2_value: b.axis2_value,
            metrics: MetricsReport::from(&b.metrics),
        }
    }
}

#[derive(Debug, Serialize)]
struct BestReport {
    metric: Metric,
    axis1: String,
    axis2: String,
    cells: usize,
    failures: usize,
    best: BestEntry,
    per_metric: PerMetric,
}

#[derive(Debug, Serialize)]
struct PerMetric {
    pce: BestEntry,
    ff: BestEntry,
    jsc: BestEntry,
    voc: BestEntry,
}

pub fn run_cli<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    init_logging(cli.global.verbose);
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::NonConvergence { history, .. } = &e {
                let tail: Vec<String> = history
                    .iter()
                    .rev()
                    .take(10)
                    .rev()
                    .map(|r| format!("{r:.3e}"))
                    .collect();
                eprintln!("residual trace (last {}): {}", tail.len(), tail.join(" "));
            }
            match e {
                Error::Usage(_) | Error::Axis(_) => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => "warn",
        1 => "info",
        2 => "debug",
        _ => "trace",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .try_init();
}

pub fn run(cli: &Cli) -> Result<()> {
    let g = &cli.global;
    // Flag checks come before any file is read or solve started.
    match &cli.command {
        Command::Simulate => {}
        Command::Jv(a) => jv_config(a).validate()?,
        Command::Qe(a) => {
            wavelengths(a)?;
        }
        Command::Sweep(a) => {
            if a.axis1.label() == a.axis2.label() {
                return Err(Error::Usage("--axis1 and --axis2 must differ".into()));
            }
        }
    }
    let stack = load_stack(g)?;
    let spectrum = load_spectrum(g.spectrum.as_deref(), SpectrumMode::Continuous)?;
    fs::create_dir_all(&g.out).map_err(|e| Error::io(&g.out, e))?;
    match &cli.command {
        Command::Simulate => cmd_simulate(&stack, &spectrum, g),
        Command::Jv(a) => cmd_jv(&stack, &spectrum, a, g),
        Command::Qe(a) => cmd_qe(&stack, a, g),
        Command::Sweep(a) => cmd_sweep(&stack, &spectrum, a, g),
    }
}

fn load_stack(g: &GlobalArgs) -> Result<DeviceStack> {
    let temperature = g.temp_k;
    if let Some(t) = temperature {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::Usage(format!("--temp-K must be > 0, got {t}")));
        }
    }
    let mut stack = match (&g.device, g.preset) {
        (Some(path), _) => load_device(path)?,
        (None, Some(p)) => p.build(temperature.unwrap_or(300.0))?,
        (None, None) => return Err(Error::Usage("give --device FILE or --preset NAME".into())),
    };
    if let Some(t) = temperature {
        stack.temperature_k = t;
        stack.validate()?;
    }
    Ok(stack)
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write(path, &text)
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Usage(format!("cannot start {jobs} worker threads: {e}")))
}

fn print_layers(stack: &DeviceStack) {
    println!("layers (back -> front):");
    for (k, l) in stack.layers.iter().enumerate() {
        println!(
            "  {k}: {:<8} {:>7.3} um  {:?} {:.3e} cm^-3",
            l.name, l.thickness_um, l.doping_type, l.doping
        );
    }
}

pub fn cmd_simulate(stack: &DeviceStack, spectrum: &SolarSpectrum, g: &GlobalArgs) -> Result<()> {
    let cfg = SimConfig::default();
    let mesh = generate_mesh(stack, &cfg.mesh)?;
    let model = Arc::new(DeviceModel::new(stack, &mesh)?);
    let eq = equilibrium_for(model, &cfg.solver)?;
    let gen = generation_profile(stack, &mesh, spectrum, &cfg.optics)?;
    let sc = solve_bias(&eq, 0.0, Some(&gen), &cfg.solver)?;
    write(
        &g.out.join("band_diagram_eq.csv"),
        &band_diagram(&eq)?.to_csv(),
    )?;
    write(
        &g.out.join("band_diagram.csv"),
        &band_diagram(&sc)?.to_csv(),
    )?;
    let jsc = -sc.current;
    let report = MetricsReport {
        jsc: Some(jsc),
        pin: Some(spectrum.total_power()),
        ..MetricsReport::empty()
    };
    write_json(&g.out.join("metrics.json"), &report)?;
    print_layers(stack);
    println!(
        "temperature {} K, {} mesh nodes",
        stack.temperature_k,
        mesh.len()
    );
    println!(
        "Jsc = {jsc:.4} mA/cm^2 ({} Gummel iterations)",
        sc.iterations
    );
    Ok(())
}

fn jv_config(a: &JvArgs) -> SimConfig {
    SimConfig {
        vmax: a.vmax,
        vstep: a.vstep,
        ..SimConfig::default()
    }
}

pub fn cmd_jv(
    stack: &DeviceStack,
    spectrum: &SolarSpectrum,
    a: &JvArgs,
    g: &GlobalArgs,
) -> Result<()> {
    let cfg = jv_config(a);
    let light = (!a.dark).then_some(spectrum);
    let curve = compute_jv(stack, &cfg, light)?;
    write(&g.out.join("jv.csv"), &jv_csv(&curve))?;
    write(&g.out.join("pv.csv"), &pv_csv(&curve))?;
    let report = if a.dark {
        MetricsReport::empty()
    } else {
        MetricsReport::from(&extract_metrics(&curve)?)
    };
    write_json(&g.out.join("metrics.json"), &report)?;
    println!(
        "{} bias points written to {}",
        curve.samples.len(),
        g.out.display()
    );
    if let (Some(jsc), Some(voc), Some(ff), Some(pce)) =
        (report.jsc, report.voc, report.ff, report.pce)
    {
        println!("Jsc = {jsc:.3} mA/cm^2  Voc = {voc:.4} V  FF = {ff:.2} %  PCE = {pce:.3} %");
    }
    Ok(())
}

fn wavelengths(a: &QeArgs) -> Result<Vec<f64>> {
    if !(a.wl_step > 0.0 && a.wl_step.is_finite()) {
        return Err(Error::Usage(format!(
            "--wl-step must be > 0, got {}",
            a.wl_step
        )));
    }
    if !(a.wl_start < a.wl_stop) {
        return Err(Error::Usage(format!(
            "--wl-start ({}) must be below --wl-stop ({})",
            a.wl_start, a.wl_stop
        )));
    }
    let n = ((a.wl_stop - a.wl_start) / a.wl_step + 1e-9).floor() as usize;
    Ok((0..=n)
        .map(|k| tidy(a.wl_start + k as f64 * a.wl_step))
        .collect())
}

pub fn cmd_qe(stack: &DeviceStack, a: &QeArgs, g: &GlobalArgs) -> Result<()> {
    let wl = wavelengths(a)?;
    let cfg = SimConfig::default();
    let curve = pool(g.jobs)?.install(|| compute_qe(stack, &wl, &cfg))?;
    write(&g.out.join("qe.csv"), &curve.to_csv())?;
    write(&g.out.join("qe_gaps.log"), &curve.gap_log())?;
    for (wl, msg) in &curve.gaps {
        log::warn!("no QE at {wl} nm: {msg}");
    }
    println!(
        "{} wavelengths solved, {} gaps, written to {}",
        curve.samples.len(),
        curve.gaps.len(),
        g.out.display()
    );
    Ok(())
}

pub fn cmd_sweep(
    stack: &DeviceStack,
    spectrum: &SolarSpectrum,
    a: &SweepArgs,
    g: &GlobalArgs,
) -> Result<()> {
    let cfg = SweepConfig {
        sim: SimConfig::default(),
        jobs: g.jobs,
    };
    let result = run_grid_sweep(stack, &a.axis1, &a.axis2, spectrum, &cfg)?;
    for m in Metric::ALL {
        write(
            &g.out.join(format!("{}.csv", m.name())),
            &result.metric_csv(m),
        )?;
    }
    write(&g.out.join("failures.csv"), &result.failures_csv())?;
    let best = best_cell(&result, a.metric)?;
    let entry = |m| best_cell(&result, m).map(|b| BestEntry::from(&b));
    let per_metric = PerMetric {
        pce: entry(Metric::Pce)?,
        ff: entry(Metric::Ff)?,
        jsc: entry(Metric::Jsc)?,
        voc: entry(Metric::Voc)?,
    };
    let report = BestReport {
        metric: a.metric,
        axis1: a.axis1.label(),
        axis2: a.axis2.label(),
        cells: result.axis1.len() * result.axis2.len(),
        failures: result.failures.len(),
        best: BestEntry::from(&best),
        per_metric,
    };
    write_json(&g.out.join("best.json"), &report)?;
    for f in &result.failures {
        log::warn!("cell ({}, {}) failed: {}", f.i, f.j, f.message);
    }
    println!(
        "{}x{} grid, {} failed; best {} at {} = {}, {} = {}: {:.4}",
        result.axis1.len(),
        result.axis2.len(),
        result.failures.len(),
        a.metric,
        a.axis1.label(),
        best.axis1_value,
        a.axis2.label(),
        best.axis2_value,
        a.metric.value(&best.metrics)
    );
    Ok(())
}
