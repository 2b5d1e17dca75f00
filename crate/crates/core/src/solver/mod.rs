//! Steady-state solution of the coupled Poisson / drift-diffusion system.
//!
//! The equilibrium solution is a pure nonlinear Poisson problem with a flat
//! Fermi level. Biased and illuminated points use Gummel iteration
//! (see [`gummel`]) warm-started from a neighbouring solution. When Gummel
//! has not converged after `newton_handoff` iterations its iterate seeds a
//! coupled Newton solve ([`newton`]); if that fails Gummel resumes. Bias
//! sweeps walk outward from 0 V in bounded steps.

pub mod gummel;
mod model;
pub mod newton;
mod state;

use std::sync::Arc;

pub use model::DeviceModel;
pub use state::{SimState, SolverConfig};

use crate::device::{DeviceStack, Mesh};
use crate::error::{Error, Result};
use crate::optics::GenerationProfile;

/// Dark, zero-bias solution: Poisson's equation with EFn = EFp = 0.
pub fn solve_equilibrium(stack: &DeviceStack, mesh: &Mesh, cfg: &SolverConfig) -> Result<SimState> {
    let model = Arc::new(DeviceModel::new(stack, mesh)?);
    equilibrium_for(model, cfg)
}

pub fn equilibrium_for(model: Arc<DeviceModel>, cfg: &SolverConfig) -> Result<SimState> {
    cfg.validate()?;
    let len = model.len();
    let mut psi = model.neutral_potential();
    psi[0] = model.contact_psi[0];
    psi[len - 1] = model.contact_psi[1];
    let mut n: Vec<f64> = (0..len)
        .map(|i| model.electron_density(i, psi[i], 0.0))
        .collect();
    let mut p: Vec<f64> = (0..len)
        .map(|i| model.hole_density(i, psi[i], 0.0))
        .collect();
    let iterations =
        gummel::solve_poisson(&model, &mut psi, &mut n, &mut p, cfg).map_err(|e| match e {
            Error::NonConvergence {
                iterations,
                history,
                ..
            } => Error::NonConvergence {
                voltage: 0.0,
                iterations,
                residual: f64::NAN,
                history,
            },
            other => other,
        })?;
    // Recompute densities from the flat Fermi level so that n·p = ni² holds
    // to rounding rather than to the accumulated Newton rescaling.
    for i in 0..len {
        n[i] = model.electron_density(i, psi[i], 0.0);
        p[i] = model.hole_density(i, psi[i], 0.0);
    }
    let dark = GenerationProfile::dark(len);
    let current = gummel::terminal_current(&model, &psi, &n, &p, &dark);
    Ok(SimState {
        model,
        psi,
        n,
        p,
        current,
        voltage: 0.0,
        illuminated: false,
        converged: true,
        iterations,
        residual: 0.0,
    })
}

/// Solves the operating point at bias `voltage`, warm-started from `prev`.
/// `gen = None` means dark.
pub fn solve_bias(
    prev: &SimState,
    voltage: f64,
    gen: Option<&GenerationProfile>,
    cfg: &SolverConfig,
) -> Result<SimState> {
    if !prev.converged {
        return Err(Error::Unconverged);
    }
    cfg.validate()?;
    let model = &prev.model;
    let dark;
    let gen = match gen {
        Some(g) => {
            if g.volume_rate.len() != model.len() {
                return Err(Error::MeshMismatch(format!(
                    "generation profile has {} nodes, mesh has {}",
                    g.volume_rate.len(),
                    model.len()
                )));
            }
            g
        }
        None => {
            dark = GenerationProfile::dark(model.len());
            &dark
        }
    };
    let illuminated = !gen.is_dark();
    let attempt = |from: &SimState, g: &GenerationProfile| gummel_from(from, voltage, g, cfg);
    match attempt(prev, gen) {
        Ok(mut s) => {
            s.illuminated = illuminated;
            Ok(s)
        }
        Err(_) if illuminated && !prev.illuminated => {
            // Switch the light on gradually.
            let mut state = prev.clone();
            for scale in [1e-4, 1e-3, 1e-2, 1e-1, 0.3] {
                state = attempt(&state, &gen.scaled(scale))?;
            }
            let mut s = attempt(&state, gen)?;
            s.illuminated = true;
            Ok(s)
        }
        Err(e) => Err(e),
    }
}

fn gummel_from(
    prev: &SimState,
    voltage: f64,
    gen: &GenerationProfile,
    cfg: &SolverConfig,
) -> Result<SimState> {
    let model = prev.model.clone();
    let mut psi = prev.psi.clone();
    let mut n = prev.n.clone();
    let mut p = prev.p.clone();
    let mut limited = *cfg;
    let mut spent = 0;
    let mut finished = None;
    if cfg.newton_handoff > 0 && cfg.newton_handoff < cfg.max_iterations {
        limited.max_iterations = cfg.newton_handoff;
        match gummel::gummel(&model, &mut psi, &mut n, &mut p, gen, voltage, &limited) {
            Ok(outcome) => finished = Some((outcome.iterations, outcome.residual)),
            Err(Error::NonConvergence { .. }) => {
                spent = cfg.newton_handoff;
                let (mut a, mut b, mut c) = (psi.clone(), n.clone(), p.clone());
                match newton::newton(&model, &mut a, &mut b, &mut c, gen, voltage, cfg) {
                    Ok(k) => {
                        (psi, n, p) = (a, b, c);
                        finished = Some((spent + k, 0.0));
                    }
                    Err(e) => {
                        log::debug!("coupled Newton at {voltage} V failed ({e}); resuming Gummel")
                    }
                }
            }
            Err(e) => return Err(e),
        }
        limited.max_iterations = cfg.max_iterations - spent;
    }
    let (iterations, residual) = match finished {
        Some(f) => f,
        None => {
            let outcome = gummel::gummel(&model, &mut psi, &mut n, &mut p, gen, voltage, &limited)?;
            (spent + outcome.iterations, outcome.residual)
        }
    };
    let current = gummel::terminal_current(&model, &psi, &n, &p, gen);
    Ok(SimState {
        model,
        psi,
        n,
        p,
        current,
        voltage,
        illuminated: !gen.is_dark(),
        converged: true,
        iterations,
        residual,
    })
}

/// Smallest fraction of `cfg.voltage_step` a continuation step may shrink to
/// after repeated failures.
const MIN_STEP_FRACTION: f64 = 1.0 / 256.0;

/// Walks from `from` to `target`, subdividing the path into steps of at most
/// `cfg.voltage_step` and halving a step whenever it fails.
pub fn walk_to(
    from: &SimState,
    target: f64,
    gen: Option<&GenerationProfile>,
    cfg: &SolverConfig,
) -> Result<SimState> {
    let mut state = from.clone();
    let mut step = cfg.voltage_step;
    let min_step = cfg.voltage_step * MIN_STEP_FRACTION;
    let mut last_err = None;
    while (target - state.voltage).abs() > 1e-12 {
        let remaining = target - state.voltage;
        let dv = remaining.signum() * step.min(remaining.abs());
        let v = if (remaining - dv).abs() < 1e-12 {
            target
        } else {
            state.voltage + dv
        };
        match solve_bias(&state, v, gen, cfg) {
            Ok(next) => {
                state = next;
                step = (step * 2.0).min(cfg.voltage_step);
            }
            Err(e) => {
                step *= 0.5;
                if step < min_step {
                    return Err(last_err.unwrap_or(e));
                }
                last_err = Some(e);
            }
        }
    }
    if state.voltage != target || state.illuminated != gen.is_some_and(|g| !g.is_dark()) {
        state = solve_bias(&state, target, gen, cfg)?;
    }
    Ok(state)
}

/// Warm-started bias sweep over `targets` (sorted outward from 0 V).
pub fn continuation_sweep(
    stack: &DeviceStack,
    mesh: &Mesh,
    targets: &[f64],
    gen: Option<&GenerationProfile>,
    cfg: &SolverConfig,
) -> Result<Vec<SimState>> {
    let eq = solve_equilibrium(stack, mesh, cfg)?;
    sweep_from(&eq, targets, gen, cfg)
}

/// Same as [`continuation_sweep`] starting from an existing equilibrium state.
pub fn sweep_from(
    equilibrium: &SimState,
    targets: &[f64],
    gen: Option<&GenerationProfile>,
    cfg: &SolverConfig,
) -> Result<Vec<SimState>> {
    let mut state = match gen {
        Some(g) if !g.is_dark() => solve_bias(equilibrium, 0.0, Some(g), cfg)?,
        _ => equilibrium.clone(),
    };
    let mut out = Vec::with_capacity(targets.len());
    for &v in targets {
        state = walk_to(&state, v, gen, cfg)?;
        out.push(state.clone());
    }
    Ok(out)
}
