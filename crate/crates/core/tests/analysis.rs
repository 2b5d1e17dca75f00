use thinfilm::analysis::{
    band_diagram, compute_jv, compute_qe, compute_qe_with_flux, extract_metrics, SimConfig,
    PROBE_FLUX,
};
use thinfilm::device::{default_materials, generate_mesh, MeshConfig, Preset};
use thinfilm::optics::{generation_profile, OpticsConfig, SolarSpectrum};
use thinfilm::solver::{solve_bias, solve_equilibrium, SolverConfig};

const Q: f64 = 1.602176634e-19;

#[test]
fn illuminated_jv_crosses_zero_once() {
    let stack = Preset::PnOptimized.build(300.0).unwrap();
    let curve = compute_jv(&stack, &SimConfig::default(), Some(&SolarSpectrum::am15g())).unwrap();
    let changes = curve
        .samples
        .windows(2)
        .filter(|w| (w[0].1 > 0.0) != (w[1].1 > 0.0))
        .count();
    assert_eq!(changes, 1);
    let m = extract_metrics(&curve).unwrap();
    assert!(m.jsc > 0.0 && m.voc > 0.0);
    assert!((0.0..=1.0).contains(&m.ff));
    assert!((m.pce - m.pce_identity()).abs() < 1e-6);
    assert!((m.pin - 100.037).abs() < 0.01, "{}", m.pin);
}

#[test]
fn dark_curve_starts_at_zero() {
    let stack = Preset::PnBaseline.build(300.0).unwrap();
    let cfg = SimConfig {
        vmax: 0.6,
        ..SimConfig::default()
    };
    let dark = compute_jv(&stack, &cfg, None).unwrap();
    assert_eq!(dark.samples[0].0, 0.0);
    assert!(dark.samples[0].1.abs() < 1e-6);
    // Light convention: forward dark current is negative and grows.
    for w in dark.samples.windows(2) {
        assert!(w[1].1 < w[0].1);
    }
}

#[test]
fn zero_irradiance_matches_dark() {
    let stack = Preset::PnBaseline.build(300.0).unwrap();
    let cfg = SimConfig {
        vmax: 0.6,
        ..SimConfig::default()
    };
    let off = SolarSpectrum::am15g().scaled(0.0).unwrap();
    let a = compute_jv(&stack, &cfg, Some(&off)).unwrap();
    let b = compute_jv(&stack, &cfg, None).unwrap();
    assert_eq!(a.samples.len(), b.samples.len());
    for (x, y) in a.samples.iter().zip(&b.samples) {
        assert!((x.1 - y.1).abs() <= 1e-9 * y.1.abs().max(1e-6));
    }
}

#[test]
fn band_diagram_geometry() {
    let stack = Preset::PnBaseline.build(300.0).unwrap();
    let mesh = generate_mesh(&stack, &MeshConfig::default()).unwrap();
    let cfg = SolverConfig::default();
    let eq = solve_equilibrium(&stack, &mesh, &cfg).unwrap();
    let band = band_diagram(&eq).unwrap();
    assert_eq!(band.len(), mesh.len());
    for i in 0..band.len() {
        let eg = stack.layers[mesh.layer_of_node[i]].material.bandgap;
        assert!((band.ec[i] - band.ev[i] - eg).abs() < 1e-12);
        assert!(band.efn[i].abs() < 1e-12 && band.efp[i].abs() < 1e-12);
    }
    // First node past the CIGS/CdS interface.
    let lib = default_materials();
    let offset = lib["p-CIGS"].electron_affinity - lib["n-CdS"].electron_affinity;
    let i = mesh.layer_of_node.iter().position(|&l| l == 1).unwrap();
    let step = band.ec[i] - band.ec[i - 1];
    assert!((offset - 0.1).abs() < 1e-12);
    assert!((step - offset).abs() < 5e-3, "ΔEc = {step}");
    let csv = band.to_csv();
    assert!(csv.starts_with("x_um,Ec_eV,Ev_eV,EFn_eV,EFp_eV\n"));
    assert_eq!(csv.lines().count(), band.len() + 1);
}

#[test]
fn quasi_fermi_levels_split_under_light() {
    let stack = Preset::PnBaseline.build(300.0).unwrap();
    let mesh = generate_mesh(&stack, &MeshConfig::default()).unwrap();
    let cfg = SolverConfig::default();
    let gen = generation_profile(
        &stack,
        &mesh,
        &SolarSpectrum::am15g(),
        &OpticsConfig::default(),
    )
    .unwrap();
    let eq = solve_equilibrium(&stack, &mesh, &cfg).unwrap();
    let lit = solve_bias(&eq, 0.0, Some(&gen), &cfg).unwrap();
    let band = band_diagram(&lit).unwrap();
    let split = band
        .efn
        .iter()
        .zip(&band.efp)
        .map(|(n, p)| n - p)
        .fold(f64::MIN, f64::max);
    assert!(split > 0.0);
}

fn wavelengths(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let n = ((stop - start) / step).round() as usize;
    (0..=n).map(|k| start + k as f64 * step).collect()
}

#[test]
fn qe_bounds_and_cutoff() {
    let stack = Preset::PnOptimized.build(300.0).unwrap();
    let qe = compute_qe(
        &stack,
        &wavelengths(300.0, 1300.0, 20.0),
        &SimConfig::default(),
    )
    .unwrap();
    assert!(qe.gaps.is_empty(), "{:?}", qe.gaps);
    // CIGS absorption edge.
    let cutoff = 1239.841984 / 1.1;
    for &(wl, v) in &qe.samples {
        assert!((0.0..=1.0).contains(&v), "{wl} nm: {v}");
        if wl > cutoff {
            assert_eq!(v, 0.0, "{wl} nm");
        }
    }
    assert!(qe.at(700.0).unwrap() > 0.0);
}

#[test]
fn qe_is_linear_in_probe_flux() {
    let stack = Preset::PpnOptimized.build(300.0).unwrap();
    let wl = [500.0, 800.0, 1020.0];
    let cfg = SimConfig::default();
    let full = compute_qe_with_flux(&stack, &wl, &cfg, PROBE_FLUX).unwrap();
    let half = compute_qe_with_flux(&stack, &wl, &cfg, PROBE_FLUX / 2.0).unwrap();
    for (a, b) in full.samples.iter().zip(&half.samples) {
        assert!(
            (a.1 / b.1 - 1.0).abs() < 0.005,
            "{} nm: {} vs {}",
            a.0,
            a.1,
            b.1
        );
    }
}

#[test]
fn qe_rejects_wavelengths_outside_window() {
    let stack = Preset::PnBaseline.build(300.0).unwrap();
    assert!(compute_qe(&stack, &[250.0], &SimConfig::default()).is_err());
    assert!(compute_qe(&stack, &[1400.0], &SimConfig::default()).is_err());
}

#[test]
fn short_circuit_current_below_photon_bound() {
    let spectrum = SolarSpectrum::am15g();
    let optics = OpticsConfig::default();
    for preset in Preset::ALL {
        let stack = preset.build(300.0).unwrap();
        let curve = compute_jv(&stack, &SimConfig::default(), Some(&spectrum)).unwrap();
        let jsc = curve.samples[0].1;
        // Every above-gap photon in the optical window collected.
        let eg = stack
            .layers
            .iter()
            .map(|l| l.material.bandgap)
            .fold(f64::INFINITY, f64::min);
        let bound = Q
            * 1e3
            * photon_flux_below(
                &spectrum,
                optics.wl_min,
                (1239.841984 / eg).min(optics.wl_max),
            );
        assert!(jsc > 0.0 && jsc <= bound, "{preset}: {jsc} vs {bound}");
    }
}

/// Trapezoidal photon flux (cm⁻² s⁻¹) of the table between two wavelengths.
fn photon_flux_below(spectrum: &SolarSpectrum, lo: f64, hi: f64) -> f64 {
    const HC: f64 = 6.62607015e-34 * 299792458.0;
    let density = |wl: f64, e: f64| e * wl * 1e-9 / HC * 1e-4;
    let s = spectrum.samples();
    let mut total = 0.0;
    for w in s.windows(2) {
        let (a, b) = (w[0].0.max(lo), w[1].0.min(hi));
        if b <= a {
            continue;
        }
        let at = |x: f64| {
            let t = (x - w[0].0) / (w[1].0 - w[0].0);
            density(x, w[0].1 + t * (w[1].1 - w[0].1))
        };
        total += 0.5 * (at(a) + at(b)) * (b - a);
    }
    total
}
