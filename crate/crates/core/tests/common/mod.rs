#![allow(dead_code)]

use thinfilm::device::{build_stack, default_materials, DeviceStack, DopingType, LayerSpec};

/// CIGS homojunction with NA = ND = `doping` and `half_um` on each side.
pub fn cigs_homojunction(doping: f64, half_um: f64) -> DeviceStack {
    build_stack(
        &[
            LayerSpec::new("p-CIGS", half_um, DopingType::Acceptor, doping),
            LayerSpec::new("p-CIGS", half_um, DopingType::Donor, doping),
        ],
        &default_materials(),
        300.0,
    )
    .unwrap()
}

/// Nonlinear least-squares fit of J = J0·(exp(V/(n·Vt)) − 1) on the
/// current values. Returns (J0, n, R²).
pub fn fit_diode(points: &[(f64, f64)], vt: f64) -> (f64, f64, f64) {
    let sse = |ideality: f64| {
        let f: Vec<f64> = points
            .iter()
            .map(|&(v, _)| (v / (ideality * vt)).exp_m1())
            .collect();
        // J0 is linear in the model, so it has a closed form for fixed n.
        let j0 = points.iter().zip(&f).map(|(p, fi)| p.1 * fi).sum::<f64>()
            / f.iter().map(|fi| fi * fi).sum::<f64>();
        let err: f64 = points
            .iter()
            .zip(&f)
            .map(|(p, fi)| (p.1 - j0 * fi).powi(2))
            .sum();
        (err, j0)
    };
    // Golden-section search on the ideality factor.
    let (mut a, mut b) = (0.5f64, 4.0f64);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if sse(c).0 < sse(d).0 {
            b = d;
        } else {
            a = c;
        }
    }
    let n = 0.5 * (a + b);
    let (err, j0) = sse(n);
    let mean = points.iter().map(|p| p.1).sum::<f64>() / points.len() as f64;
    let total: f64 = points.iter().map(|p| (p.1 - mean).powi(2)).sum();
    (j0, n, 1.0 - err / total)
}
