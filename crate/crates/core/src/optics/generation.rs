use super::spectrum::{SolarSpectrum, SpectralLine};
use crate::constants::HC_EV_NM;
use crate::device::{DeviceStack, IlluminationSide, Material, Mesh};
use crate::error::Result;

/// Direct-gap absorption prefactor (cm⁻¹ eV^-1/2).
pub const DEFAULT_ABSORPTION_PREFACTOR: f64 = 1e5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpticsConfig {
    /// Wavelength window used for photogeneration (nm).
    pub wl_min: f64,
    pub wl_max: f64,
    pub absorption_prefactor: f64,
}

impl Default for OpticsConfig {
    fn default() -> Self {
        OpticsConfig {
            wl_min: 300.0,
            wl_max: 1300.0,
            absorption_prefactor: DEFAULT_ABSORPTION_PREFACTOR,
        }
    }
}

/// Photon energy (eV) at `wavelength_nm`.
pub fn photon_energy(wavelength_nm: f64) -> f64 {
    HC_EV_NM / wavelength_nm
}

/// α(λ) = A·sqrt(E − Eg) above the gap and zero below (cm⁻¹), with the
/// default prefactor.
pub fn absorption_coefficient(m: &Material, wavelength_nm: f64) -> f64 {
    absorption_with_prefactor(m, wavelength_nm, DEFAULT_ABSORPTION_PREFACTOR)
}

pub fn absorption_with_prefactor(m: &Material, wavelength_nm: f64, prefactor: f64) -> f64 {
    let excess = photon_energy(wavelength_nm) - m.bandgap;
    if excess > 0.0 {
        prefactor * excess.sqrt()
    } else {
        0.0
    }
}

/// Photogeneration on a mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationProfile {
    /// Point generation rate at each node (cm⁻³ s⁻¹).
    pub rate: Vec<f64>,
    /// Generation integrated over each node's control volume (cm⁻² s⁻¹).
    pub volume_rate: Vec<f64>,
    /// Incident photon flux inside the wavelength window (cm⁻² s⁻¹).
    pub incident_flux: f64,
    /// Flux leaving through the far contact (cm⁻² s⁻¹).
    pub transmitted_flux: f64,
}

impl GenerationProfile {
    pub fn dark(nodes: usize) -> Self {
        GenerationProfile {
            rate: vec![0.0; nodes],
            volume_rate: vec![0.0; nodes],
            incident_flux: 0.0,
            transmitted_flux: 0.0,
        }
    }

    /// Photons absorbed in the device per unit area and time (cm⁻² s⁻¹).
    pub fn absorbed_flux(&self) -> f64 {
        self.volume_rate.iter().sum()
    }

    pub fn is_dark(&self) -> bool {
        self.volume_rate.iter().all(|&g| g == 0.0)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        GenerationProfile {
            rate: self.rate.iter().map(|g| g * factor).collect(),
            volume_rate: self.volume_rate.iter().map(|g| g * factor).collect(),
            incident_flux: self.incident_flux * factor,
            transmitted_flux: self.transmitted_flux * factor,
        }
    }
}

/// Beer–Lambert generation for the spectrum entering from the stack's
/// illuminated side, with unit quantum yield and no front reflection.
pub fn generation_profile(
    stack: &DeviceStack,
    mesh: &Mesh,
    spectrum: &SolarSpectrum,
    cfg: &OpticsConfig,
) -> Result<GenerationProfile> {
    mesh.check_matches(stack)?;
    let lines = spectrum.lines(cfg.wl_min, cfg.wl_max);
    Ok(profile_for_lines(stack, mesh, &lines, cfg))
}

pub(crate) fn profile_for_lines(
    stack: &DeviceStack,
    mesh: &Mesh,
    lines: &[SpectralLine],
    cfg: &OpticsConfig,
) -> GenerationProfile {
    let n = mesh.len();
    let front = stack.illumination_side == IlluminationSide::Front;

    // Node and edge-midpoint positions in increasing depth are walked
    // per line; the optical depth between two points inside one edge is
    // α_edge times their distance.
    let mut rate = vec![0.0; n];
    let mut volume_rate = vec![0.0; n];
    let mut incident_flux = 0.0;
    let mut transmitted_flux = 0.0;
    let edges = n - 1;

    let mut alpha_edge = vec![0.0; edges];
    let mut tau_node = vec![0.0; n];
    for line in lines {
        if line.photon_flux == 0.0 {
            continue;
        }
        incident_flux += line.photon_flux;
        for (e, a) in alpha_edge.iter_mut().enumerate() {
            let m = &stack.layers[mesh.layer_of_edge[e]].material;
            *a = absorption_with_prefactor(m, line.wavelength_nm, cfg.absorption_prefactor);
        }
        // Optical depth at every node, accumulated from the illuminated side.
        if front {
            tau_node[n - 1] = 0.0;
            for e in (0..edges).rev() {
                tau_node[e] = tau_node[e + 1] + alpha_edge[e] * mesh.spacing(e);
            }
        } else {
            tau_node[0] = 0.0;
            for e in 0..edges {
                tau_node[e + 1] = tau_node[e] + alpha_edge[e] * mesh.spacing(e);
            }
        }
        let phi0 = line.photon_flux;
        // Photons absorbed between optical depths t0 < t1.
        let absorbed = |t0: f64, t1: f64| -phi0 * (-t0).exp() * (-(t1 - t0)).exp_m1();
        for e in 0..edges {
            let (t_a, t_b) = (tau_node[e], tau_node[e + 1]);
            let t_mid = 0.5 * (t_a + t_b);
            let (shallow, deep) = if front { (t_b, t_a) } else { (t_a, t_b) };
            let half_deep = absorbed(t_mid, deep);
            let half_shallow = absorbed(shallow, t_mid);
            if front {
                volume_rate[e] += half_deep;
                volume_rate[e + 1] += half_shallow;
            } else {
                volume_rate[e] += half_shallow;
                volume_rate[e + 1] += half_deep;
            }
        }
        for i in 0..n {
            let m = &stack.layers[mesh.layer_of_node[i]].material;
            let a = absorption_with_prefactor(m, line.wavelength_nm, cfg.absorption_prefactor);
            rate[i] += a * phi0 * (-tau_node[i]).exp();
        }
        let far = if front { tau_node[0] } else { tau_node[n - 1] };
        transmitted_flux += phi0 * (-far).exp();
    }

    GenerationProfile {
        rate,
        volume_rate,
        incident_flux,
        transmitted_flux,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::{
        build_stack, default_materials, generate_mesh, DopingType, LayerSpec, MeshConfig, Preset,
    };
    use crate::optics::SpectrumMode;

    fn single(material: &str, thickness_um: f64) -> (DeviceStack, Mesh) {
        let stack = build_stack(
            &[LayerSpec::new(
                material,
                thickness_um,
                DopingType::Acceptor,
                1e16,
            )],
            &default_materials(),
            300.0,
        )
        .unwrap();
        let mesh = generate_mesh(&stack, &MeshConfig::default()).unwrap();
        (stack, mesh)
    }

    #[test]
    fn absorption_examples() {
        let lib = default_materials();
        assert_eq!(absorption_coefficient(&lib["p-CIGS"], 1200.0), 0.0);
        assert_eq!(absorption_coefficient(&lib["p-CIGS"], HC_EV_NM / 1.1), 0.0);
        let a = absorption_coefficient(&lib["p-GaAs"], 620.0);
        let oracle = 1e5 * (1239.841984f64 / 620.0 - 1.42).sqrt();
        assert!((a - oracle).abs() < 1e-9 * oracle);
        assert!((a / 7.61e4 - 1.0).abs() < 2e-3, "{a}");
    }

    #[test]
    fn zero_irradiance_gives_zero_generation() {
        let stack = Preset::PnBaseline.build(300.0).unwrap();
        let mesh = generate_mesh(&stack, &MeshConfig::default()).unwrap();
        let dark = SolarSpectrum::am15g().scaled(0.0).unwrap();
        let g = generation_profile(&stack, &mesh, &dark, &OpticsConfig::default()).unwrap();
        assert!(g.rate.iter().all(|&r| r == 0.0));
        assert!(g.is_dark());
    }

    #[test]
    fn transparent_stack_transmits_everything() {
        let (stack, mesh) = single("n-ZnO", 1.0);
        // 400 nm = 3.1 eV < 3.3 eV gap.
        let s = SolarSpectrum::parse("390 1\n400 1\n", SpectrumMode::Continuous).unwrap();
        let g = generation_profile(&stack, &mesh, &s, &OpticsConfig::default()).unwrap();
        assert!(g.rate.iter().all(|&r| r == 0.0));
        assert!((g.transmitted_flux - g.incident_flux).abs() <= 1e-12 * g.incident_flux);
    }

    #[test]
    fn thick_absorber_collects_above_gap_flux() {
        let (stack, mesh) = single("p-CIGS", 200.0);
        let s = SolarSpectrum::am15g();
        let cfg = OpticsConfig::default();
        let g = generation_profile(&stack, &mesh, &s, &cfg).unwrap();
        let above = s.photon_flux_above(1.1, cfg.wl_min, cfg.wl_max);
        let absorbed = g.absorbed_flux();
        assert!(
            (absorbed / above - 1.0).abs() < 0.01,
            "{absorbed} vs {above}"
        );
        // Trapezoid integral of the point rate agrees with the exact
        // control-volume integral on a fine mesh.
        let h = mesh.spacings();
        let trap: f64 = (0..h.len())
            .map(|i| 0.5 * h[i] * (g.rate[i] + g.rate[i + 1]))
            .sum();
        assert!((trap / absorbed - 1.0).abs() < 0.02, "{trap} vs {absorbed}");
    }

    #[test]
    fn photon_conservation_per_stack() {
        for p in Preset::ALL {
            let stack = p.build(300.0).unwrap();
            let mesh = generate_mesh(&stack, &MeshConfig::default()).unwrap();
            let g = generation_profile(
                &stack,
                &mesh,
                &SolarSpectrum::am15g(),
                &OpticsConfig::default(),
            )
            .unwrap();
            let sum = g.absorbed_flux() + g.transmitted_flux;
            assert!((sum / g.incident_flux - 1.0).abs() < 1e-6);
            assert!(g.absorbed_flux() <= g.incident_flux);
            assert!(g.rate.iter().all(|&r| r >= 0.0));
        }
    }

    #[test]
    fn generation_is_linear_in_irradiance() {
        let stack = Preset::PnBaseline.build(300.0).unwrap();
        let mesh = generate_mesh(&stack, &MeshConfig::default()).unwrap();
        let cfg = OpticsConfig::default();
        let s = SolarSpectrum::am15g();
        let g1 = generation_profile(&stack, &mesh, &s, &cfg).unwrap();
        let g2 = generation_profile(&stack, &mesh, &s.scaled(2.0).unwrap(), &cfg).unwrap();
        for (a, b) in g1.rate.iter().zip(&g2.rate) {
            assert!((b - 2.0 * a).abs() <= 1e-12 * b.abs());
        }
    }

    #[test]
    fn back_layers_see_only_what_front_layers_pass() {
        // Changing the back layer must leave generation in the front layers unchanged.
        let lib = default_materials();
        let build = |back: &str| {
            build_stack(
                &[
                    LayerSpec::new(back, 1.0, DopingType::Acceptor, 1e16),
                    LayerSpec::new("n-CdS", 0.5, DopingType::Donor, 1e16),
                ],
                &lib,
                300.0,
            )
            .unwrap()
        };
        let cfg = OpticsConfig::default();
        let s = SolarSpectrum::am15g();
        let a = build("p-CIGS");
        let b = build("p-GaAs");
        let ma = generate_mesh(&a, &MeshConfig::default()).unwrap();
        let mb = generate_mesh(&b, &MeshConfig::default()).unwrap();
        let ga = generation_profile(&a, &ma, &s, &cfg).unwrap();
        let gb = generation_profile(&b, &mb, &s, &cfg).unwrap();
        let start = ma.boundaries[1] + 1;
        for i in start..ma.len() {
            assert!((ga.rate[i] - gb.rate[i]).abs() <= 1e-12 * ga.rate[i].abs());
        }
    }

    #[test]
    fn mesh_mismatch_rejected() {
        let a = Preset::PnBaseline.build(300.0).unwrap();
        let b = Preset::PnOptimized.build(300.0).unwrap();
        let mb = generate_mesh(&b, &MeshConfig::default()).unwrap();
        assert!(
            generation_profile(&a, &mb, &SolarSpectrum::am15g(), &OpticsConfig::default()).is_err()
        );
    }
}
