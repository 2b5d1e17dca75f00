//! Fully coupled Newton solve in (ψ, EFn, EFp).
//!
//! Unknowns are interleaved per node as `[ψ, EFn, EFp]`, so the Jacobian of
//! the three-point stencil is a band matrix with five sub- and
//! super-diagonals. Contact nodes are Dirichlet rows.

use super::gummel::{electron_flux, hole_flux, poisson_residual};
use super::model::DeviceModel;
use super::state::SolverConfig;
use crate::error::{Error, Result};
use crate::linalg::BandedMatrix;
use crate::optics::GenerationProfile;
use crate::transport::{bernoulli, bernoulli_derivative};

const BAND: usize = 5;

/// Partial derivatives of one edge flux with respect to the unknowns of its
/// two end nodes, ordered `[ψ_i, EF_i, ψ_j, EF_j]`.
struct EdgeFlux {
    d: [f64; 4],
}

fn electron_edge(model: &DeviceModel, psi: &[f64], n: &[f64], e: usize) -> EdgeFlux {
    let vt = model.vt;
    let (i, j) = (e, e + 1);
    let delta = (psi[j] + model.chi_n[j] - psi[i] - model.chi_n[i]) / vt;
    let k = model.mu_n[e] * vt / model.spacing[e];
    let (bf, bb) = (bernoulli(delta), bernoulli(-delta));
    let (dbf, dbb) = (bernoulli_derivative(delta), bernoulli_derivative(-delta));
    // f = k·(B(Δ)·n_j − B(−Δ)·n_i); ∂n/∂ψ = ∂n/∂EFn = n/Vt.
    let via_delta = k * (dbf * n[j] + dbb * n[i]) / vt;
    let dni = -k * bb * n[i] / vt;
    let dnj = k * bf * n[j] / vt;
    EdgeFlux {
        d: [-via_delta + dni, dni, via_delta + dnj, dnj],
    }
}

fn hole_edge(model: &DeviceModel, psi: &[f64], p: &[f64], e: usize) -> EdgeFlux {
    let vt = model.vt;
    let (i, j) = (e, e + 1);
    let delta = (psi[j] + model.chi_p[j] - psi[i] - model.chi_p[i]) / vt;
    let k = model.mu_p[e] * vt / model.spacing[e];
    let (bf, bb) = (bernoulli(delta), bernoulli(-delta));
    let (dbf, dbb) = (bernoulli_derivative(delta), bernoulli_derivative(-delta));
    // f = k·(B(Δ)·p_i − B(−Δ)·p_j); ∂p/∂ψ = ∂p/∂EFp = −p/Vt.
    let via_delta = k * (dbf * p[i] + dbb * p[j]) / vt;
    let dpi = -k * bf * p[i] / vt;
    let dpj = k * bb * p[j] / vt;
    EdgeFlux {
        d: [-via_delta + dpi, dpi, via_delta + dpj, dpj],
    }
}

/// Residuals of the three discrete equations at every node. Contact rows are zero.
pub fn coupled_residual(
    model: &DeviceModel,
    psi: &[f64],
    n: &[f64],
    p: &[f64],
    gen: &GenerationProfile,
) -> Vec<f64> {
    let len = psi.len();
    let fpsi = poisson_residual(model, psi, n, p);
    let mut f = vec![0.0; 3 * len];
    for i in 1..len - 1 {
        let r = model.volume[i] * model.recombination(i, n[i], p[i]);
        let g = gen.volume_rate[i];
        f[3 * i] = fpsi[i];
        f[3 * i + 1] =
            electron_flux(model, psi, n, i) - electron_flux(model, psi, n, i - 1) - r + g;
        f[3 * i + 2] = hole_flux(model, psi, p, i) - hole_flux(model, psi, p, i - 1) + r - g;
    }
    f
}

fn assemble(
    model: &DeviceModel,
    psi: &[f64],
    n: &[f64],
    p: &[f64],
    gen: &GenerationProfile,
) -> (BandedMatrix, Vec<f64>) {
    let len = psi.len();
    let vt = model.vt;
    let mut jac = BandedMatrix::zeros(3 * len, BAND, BAND);
    let f = coupled_residual(model, psi, n, p, gen);
    for c in [0, len - 1] {
        for k in 0..3 {
            jac.set(3 * c + k, 3 * c + k, 1.0);
        }
    }
    for i in 1..len - 1 {
        let (row_psi, row_n, row_p) = (3 * i, 3 * i + 1, 3 * i + 2);

        let a = model.eps_over_q[i - 1] / model.spacing[i - 1];
        let b = model.eps_over_q[i] / model.spacing[i];
        let w = model.volume[i];
        jac.add(row_psi, 3 * (i - 1), a);
        jac.add(row_psi, 3 * (i + 1), b);
        jac.add(row_psi, row_psi, -a - b - w * (n[i] + p[i]) / vt);
        jac.add(row_psi, row_n, -w * n[i] / vt);
        jac.add(row_psi, row_p, -w * p[i] / vt);

        let (_, drn, drp) = model.recombination_with_derivatives(i, n[i], p[i]);
        let dr_dpsi = w * (drn * n[i] - drp * p[i]) / vt;
        let dr_defn = w * drn * n[i] / vt;
        let dr_defp = -w * drp * p[i] / vt;

        // Electron row: f(i) − f(i−1) − wR.
        let right = electron_edge(model, psi, n, i);
        let left = electron_edge(model, psi, n, i - 1);
        jac.add(row_n, 3 * i, right.d[0] - left.d[2] - dr_dpsi);
        jac.add(row_n, 3 * i + 1, right.d[1] - left.d[3] - dr_defn);
        jac.add(row_n, 3 * i + 2, -dr_defp);
        jac.add(row_n, 3 * (i + 1), right.d[2]);
        jac.add(row_n, 3 * (i + 1) + 1, right.d[3]);
        jac.add(row_n, 3 * (i - 1), -left.d[0]);
        jac.add(row_n, 3 * (i - 1) + 1, -left.d[1]);

        // Hole row: f(i) − f(i−1) + wR.
        let right = hole_edge(model, psi, p, i);
        let left = hole_edge(model, psi, p, i - 1);
        jac.add(row_p, 3 * i, right.d[0] - left.d[2] + dr_dpsi);
        jac.add(row_p, 3 * i + 2, right.d[1] - left.d[3] + dr_defp);
        jac.add(row_p, 3 * i + 1, dr_defn);
        jac.add(row_p, 3 * (i + 1), right.d[2]);
        jac.add(row_p, 3 * (i + 1) + 2, right.d[3]);
        jac.add(row_p, 3 * (i - 1), -left.d[0]);
        jac.add(row_p, 3 * (i - 1) + 2, -left.d[1]);
    }
    (jac, f)
}

/// Newton iteration on the coupled system starting from (ψ, n, p), which
/// must already satisfy the contact conditions. Returns the iteration count.
pub fn newton(
    model: &DeviceModel,
    psi: &mut [f64],
    n: &mut [f64],
    p: &mut [f64],
    gen: &GenerationProfile,
    voltage: f64,
    cfg: &SolverConfig,
) -> Result<usize> {
    let len = psi.len();
    let vt = model.vt;
    let mut efn: Vec<f64> = (0..len).map(|i| model.efn(i, psi[i], n[i])).collect();
    let mut efp: Vec<f64> = (0..len).map(|i| model.efp(i, psi[i], p[i])).collect();
    if efn.iter().chain(&efp).any(|v| !v.is_finite()) {
        return Err(Error::NegativeDensity { node: 0, voltage });
    }
    let mut history = Vec::new();
    for it in 1..=cfg.max_newton_iterations {
        let (mut jac, f) = assemble(model, psi, n, p, gen);
        let mut rhs: Vec<f64> = f.iter().map(|v| -v).collect();
        for (row, r) in rhs.iter_mut().enumerate() {
            let s = jac.row_max(row);
            if s > 0.0 {
                jac.scale_row(row, 1.0 / s);
                *r /= s;
            }
        }
        let delta = jac.solve(&rhs)?;
        let mut largest: f64 = 0.0;
        for i in 1..len - 1 {
            let d = &delta[3 * i..3 * i + 3];
            largest = largest.max(d[0].abs()).max(d[1].abs()).max(d[2].abs());
            psi[i] += d[0].clamp(-cfg.damping_clamp, cfg.damping_clamp);
            efn[i] += d[1].clamp(-cfg.damping_clamp, cfg.damping_clamp);
            efp[i] += d[2].clamp(-cfg.damping_clamp, cfg.damping_clamp);
            n[i] = model.electron_density(i, psi[i], efn[i]);
            p[i] = model.hole_density(i, psi[i], efp[i]);
        }
        let residual = largest / vt;
        history.push(residual);
        if !residual.is_finite() {
            break;
        }
        if residual < cfg.tolerance {
            return Ok(it);
        }
    }
    Err(Error::NonConvergence {
        voltage,
        iterations: history.len(),
        residual: history.last().copied().unwrap_or(f64::NAN),
        history,
    })
}
