//! Discrete Poisson and continuity operators and the Gummel fixed-point loop.

use super::model::DeviceModel;
use super::state::SolverConfig;
use crate::constants::Q;
use crate::error::{Error, Result};
use crate::linalg::solve_tridiagonal;
use crate::optics::GenerationProfile;
use crate::transport::bernoulli;

/// Poisson residual per node (cm⁻²): flux divergence plus enclosed charge.
/// Contact rows are zero.
pub fn poisson_residual(model: &DeviceModel, psi: &[f64], n: &[f64], p: &[f64]) -> Vec<f64> {
    let len = psi.len();
    let mut f = vec![0.0; len];
    for i in 1..len - 1 {
        let right = model.eps_over_q[i] * (psi[i + 1] - psi[i]) / model.spacing[i];
        let left = model.eps_over_q[i - 1] * (psi[i] - psi[i - 1]) / model.spacing[i - 1];
        f[i] = right - left + model.volume[i] * (p[i] - n[i]) + model.doping_charge[i];
    }
    f
}

/// Newton iteration on Poisson's equation with quasi-Fermi levels frozen:
/// every potential update δ rescales n by e^(δ/Vt) and p by e^(−δ/Vt).
/// Contact potentials must already be set in `psi`.
pub fn solve_poisson(
    model: &DeviceModel,
    psi: &mut [f64],
    n: &mut [f64],
    p: &mut [f64],
    cfg: &SolverConfig,
) -> Result<usize> {
    let len = psi.len();
    let vt = model.vt;
    let mut lower = vec![0.0; len];
    let mut diag = vec![1.0; len];
    let mut upper = vec![0.0; len];
    for it in 1..=cfg.max_poisson_iterations {
        let f = poisson_residual(model, psi, n, p);
        for i in 1..len - 1 {
            let a = model.eps_over_q[i - 1] / model.spacing[i - 1];
            let b = model.eps_over_q[i] / model.spacing[i];
            lower[i] = a;
            upper[i] = b;
            diag[i] = -a - b - model.volume[i] * (n[i] + p[i]) / vt;
        }
        let rhs: Vec<f64> = f.iter().map(|v| -v).collect();
        let delta = solve_tridiagonal(&lower, &diag, &upper, &rhs)?;
        let mut largest: f64 = 0.0;
        for i in 1..len - 1 {
            let d = delta[i].clamp(-cfg.damping_clamp, cfg.damping_clamp);
            largest = largest.max(d.abs());
            psi[i] += d;
            n[i] *= (d / vt).exp();
            p[i] *= (-d / vt).exp();
        }
        if largest < cfg.potential_tol {
            return Ok(it);
        }
    }
    Err(Error::NonConvergence {
        voltage: f64::NAN,
        iterations: cfg.max_poisson_iterations,
        residual: f64::NAN,
        history: Vec::new(),
    })
}

/// Electron particle flux (cm⁻² s⁻¹) on edge `e` in the direction of
/// conventional current, i.e. q times this is the electron current density.
pub fn electron_flux(model: &DeviceModel, psi: &[f64], n: &[f64], e: usize) -> f64 {
    let (b_fwd, b_bwd, k) = electron_weights(model, psi, e);
    k * (b_fwd * n[e + 1] - b_bwd * n[e])
}

pub fn hole_flux(model: &DeviceModel, psi: &[f64], p: &[f64], e: usize) -> f64 {
    let (b_fwd, b_bwd, k) = hole_weights(model, psi, e);
    k * (b_fwd * p[e] - b_bwd * p[e + 1])
}

fn electron_weights(model: &DeviceModel, psi: &[f64], e: usize) -> (f64, f64, f64) {
    let vt = model.vt;
    let d = (psi[e + 1] + model.chi_n[e + 1] - psi[e] - model.chi_n[e]) / vt;
    let k = model.mu_n[e] * vt / model.spacing[e];
    (bernoulli(d), bernoulli(-d), k)
}

fn hole_weights(model: &DeviceModel, psi: &[f64], e: usize) -> (f64, f64, f64) {
    let vt = model.vt;
    let d = (psi[e + 1] + model.chi_p[e + 1] - psi[e] - model.chi_p[e]) / vt;
    let k = model.mu_p[e] * vt / model.spacing[e];
    (bernoulli(d), bernoulli(-d), k)
}

fn check_positive(values: &[f64], voltage: f64) -> Result<()> {
    match values.iter().position(|&v| !(v > 0.0 && v.is_finite())) {
        Some(node) => Err(Error::NegativeDensity { node, voltage }),
        None => Ok(()),
    }
}

/// Solves the linear electron continuity equation for fixed ψ and p, with
/// SRH linearised around the current n. Contact densities are Dirichlet.
pub fn solve_electrons(
    model: &DeviceModel,
    psi: &[f64],
    n: &mut [f64],
    p: &[f64],
    gen: &GenerationProfile,
    voltage: f64,
) -> Result<()> {
    let len = psi.len();
    let mut lower = vec![0.0; len];
    let mut diag = vec![1.0; len];
    let mut upper = vec![0.0; len];
    let mut rhs = vec![0.0; len];
    rhs[0] = model.contact_n[0];
    rhs[len - 1] = model.contact_n[1];
    for i in 1..len - 1 {
        let (bf_l, bb_l, k_l) = electron_weights(model, psi, i - 1);
        let (bf_r, bb_r, k_r) = electron_weights(model, psi, i);
        let c = model.recombination_coefficient(i, n[i], p[i]);
        let w = model.volume[i];
        lower[i] = k_l * bb_l;
        diag[i] = -k_r * bb_r - k_l * bf_l - w * c * p[i];
        upper[i] = k_r * bf_r;
        rhs[i] = -w * c * model.ni[i] * model.ni[i] - gen.volume_rate[i];
    }
    let sol = solve_tridiagonal(&lower, &diag, &upper, &rhs)?;
    check_positive(&sol, voltage)?;
    n.copy_from_slice(&sol);
    Ok(())
}

pub fn solve_holes(
    model: &DeviceModel,
    psi: &[f64],
    n: &[f64],
    p: &mut [f64],
    gen: &GenerationProfile,
    voltage: f64,
) -> Result<()> {
    let len = psi.len();
    let mut lower = vec![0.0; len];
    let mut diag = vec![1.0; len];
    let mut upper = vec![0.0; len];
    let mut rhs = vec![0.0; len];
    rhs[0] = model.contact_p[0];
    rhs[len - 1] = model.contact_p[1];
    for i in 1..len - 1 {
        let (bf_l, bb_l, k_l) = hole_weights(model, psi, i - 1);
        let (bf_r, bb_r, k_r) = hole_weights(model, psi, i);
        let c = model.recombination_coefficient(i, n[i], p[i]);
        let w = model.volume[i];
        lower[i] = -k_l * bf_l;
        diag[i] = k_r * bf_r + k_l * bb_l + w * c * n[i];
        upper[i] = -k_r * bb_r;
        rhs[i] = gen.volume_rate[i] + w * c * model.ni[i] * model.ni[i];
    }
    let sol = solve_tridiagonal(&lower, &diag, &upper, &rhs)?;
    check_positive(&sol, voltage)?;
    p.copy_from_slice(&sol);
    Ok(())
}

/// Total current density (mA/cm²) on every edge, evaluated directly from the
/// Scharfetter–Gummel fluxes.
pub fn edge_currents(model: &DeviceModel, psi: &[f64], n: &[f64], p: &[f64]) -> Vec<f64> {
    (0..psi.len() - 1)
        .map(|e| Q * 1e3 * (electron_flux(model, psi, n, e) + hole_flux(model, psi, p, e)))
        .collect()
}

/// Terminal current density (mA/cm²).
///
/// Majority-carrier fluxes at a heavily doped contact are differences of
/// nearly equal large numbers, so each carrier's current is taken at the
/// contact where it is the minority carrier and carried across the device
/// with the discrete continuity balance.
pub fn terminal_current(
    model: &DeviceModel,
    psi: &[f64],
    n: &[f64],
    p: &[f64],
    gen: &GenerationProfile,
) -> f64 {
    let len = psi.len();
    let last = len - 2;
    // Σ over interior nodes of (G − R)·w: electrons lose it, holes gain it, left to right.
    let net_generation: f64 = (1..len - 1)
        .map(|i| gen.volume_rate[i] - model.volume[i] * model.recombination(i, n[i], p[i]))
        .sum();
    let electrons_minority_back = model.electrons_minority(0);
    let holes_minority_back = !electrons_minority_back;
    let electrons_minority_front = model.electrons_minority(1);
    let holes_minority_front = !electrons_minority_front;
    // Jn(last) − Jn(0) = −Σ(G − R) and Jp(last) − Jp(0) = Σ(G − R).
    let jn_back = if !electrons_minority_back && electrons_minority_front {
        electron_flux(model, psi, n, last) + net_generation
    } else {
        electron_flux(model, psi, n, 0)
    };
    let jp_back = if !holes_minority_back && holes_minority_front {
        hole_flux(model, psi, p, last) - net_generation
    } else {
        hole_flux(model, psi, p, 0)
    };
    Q * 1e3 * (jn_back + jp_back)
}

/// Result of one Gummel run.
pub struct GummelOutcome {
    pub iterations: usize,
    pub residual: f64,
    pub history: Vec<f64>,
}

/// Gummel iteration: nonlinear Poisson, then electron and hole continuity,
/// repeated until the updates stall below `cfg.tolerance`.
pub fn gummel(
    model: &DeviceModel,
    psi: &mut [f64],
    n: &mut [f64],
    p: &mut [f64],
    gen: &GenerationProfile,
    voltage: f64,
    cfg: &SolverConfig,
) -> Result<GummelOutcome> {
    let len = psi.len();
    psi[0] = model.contact_psi[0] + voltage;
    psi[len - 1] = model.contact_psi[1];
    n[0] = model.contact_n[0];
    n[len - 1] = model.contact_n[1];
    p[0] = model.contact_p[0];
    p[len - 1] = model.contact_p[1];

    let vt = model.vt;
    let mut history = Vec::new();
    let mut psi_old = psi.to_vec();
    let mut n_old = n.to_vec();
    let mut p_old = p.to_vec();
    for it in 1..=cfg.max_iterations {
        psi_old.copy_from_slice(psi);
        n_old.copy_from_slice(n);
        p_old.copy_from_slice(p);

        solve_poisson(model, psi, n, p, cfg).map_err(|e| with_context(e, voltage, it, &history))?;
        solve_electrons(model, psi, n, p, gen, voltage)?;
        solve_holes(model, psi, n, p, gen, voltage)?;

        let dpsi = max_abs_diff(psi, &psi_old) / vt;
        let dn = max_rel_diff(n, &n_old);
        let dp = max_rel_diff(p, &p_old);
        let residual = dpsi.max(dn).max(dp);
        history.push(residual);
        if !residual.is_finite() {
            break;
        }
        if residual < cfg.tolerance {
            return Ok(GummelOutcome {
                iterations: it,
                residual,
                history,
            });
        }
    }
    let residual = history.last().copied().unwrap_or(f64::NAN);
    Err(Error::NonConvergence {
        voltage,
        iterations: history.len(),
        residual,
        history,
    })
}

fn with_context(err: Error, voltage: f64, iteration: usize, history: &[f64]) -> Error {
    match err {
        Error::NonConvergence { residual, .. } => Error::NonConvergence {
            voltage,
            iterations: iteration,
            residual,
            history: history.to_vec(),
        },
        other => other,
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Largest relative update, with a floor of 1 cm⁻³ so that vanishing
/// minority densities in wide-gap layers do not dominate.
fn max_rel_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / (y.abs() + 1.0))
        .fold(0.0, f64::max)
}
