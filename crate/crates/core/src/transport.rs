//! Carrier statistics, recombination and Scharfetter–Gummel fluxes.
//!
//! All kernels are pure functions. Densities are in cm⁻³, potentials in V,
//! energies in eV and current densities in mA/cm².

use crate::constants::{thermal_voltage, Q};
use crate::device::{DopingType, Material, TrapSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Carrier {
    Electron,
    Hole,
}

/// Bernoulli function B(x) = x / (eˣ − 1).
pub fn bernoulli(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - 0.5 * x + x2 / 12.0 - x2 * x2 / 720.0
    } else {
        x / x.exp_m1()
    }
}

/// dB/dx.
pub fn bernoulli_derivative(x: f64) -> f64 {
    if x.abs() < 1e-2 {
        let x2 = x * x;
        -0.5 + x / 6.0 - x * x2 / 180.0
    } else {
        let b = bernoulli(x);
        b * (1.0 - b) / x - b
    }
}

/// Intrinsic density ni = sqrt(Nc·Nv)·exp(−Eg / 2kT).
pub fn intrinsic_density(m: &Material, temperature_k: f64) -> f64 {
    let kt = thermal_voltage(temperature_k);
    (m.nc * m.nv).sqrt() * (-m.bandgap / (2.0 * kt)).exp()
}

/// Charge-neutral equilibrium densities (n₀, p₀) under Boltzmann statistics.
pub fn equilibrium_carriers(
    m: &Material,
    doping_type: DopingType,
    doping: f64,
    temperature_k: f64,
) -> (f64, f64) {
    let ni = intrinsic_density(m, temperature_k);
    let net = match doping_type {
        DopingType::Donor => doping,
        DopingType::Acceptor => -doping,
    };
    neutral_densities(net, ni)
}

/// (n₀, p₀) solving n − p = net and n·p = ni², evaluated without cancellation.
pub fn neutral_densities(net: f64, ni: f64) -> (f64, f64) {
    let root = (net * net + 4.0 * ni * ni).sqrt();
    if net >= 0.0 {
        let n = 0.5 * (net + root);
        (n, ni * ni / n)
    } else {
        let p = 0.5 * (-net + root);
        (ni * ni / p, p)
    }
}

/// Shockley–Read–Hall rate (cm⁻³ s⁻¹); positive for net recombination.
pub fn srh_recombination(
    n: f64,
    p: f64,
    ni: f64,
    trap: &TrapSpec,
    vth_e: f64,
    vth_p: f64,
    temperature_k: f64,
) -> f64 {
    if trap.density == 0.0 {
        return 0.0;
    }
    let kt = thermal_voltage(temperature_k);
    let tau_n = trap.tau_n(vth_e);
    let tau_p = trap.tau_p(vth_p);
    let n1 = ni * (trap.energy_level / kt).exp();
    let p1 = ni * (-trap.energy_level / kt).exp();
    (n * p - ni * ni) / (tau_p * (n + n1) + tau_n * (p + p1))
}

/// Scharfetter–Gummel current density on the edge from node i to node j
/// (mA/cm²), positive when conventional current flows from i towards j.
///
/// For electrons `psi` is the potential felt by electrons (the negated
/// conduction band edge), for holes the potential whose increase repels
/// holes. In a homogeneous material both reduce to the electrostatic
/// potential.
#[allow(clippy::too_many_arguments)]
pub fn sg_flux(
    psi_i: f64,
    psi_j: f64,
    c_i: f64,
    c_j: f64,
    mobility: f64,
    spacing: f64,
    carrier: Carrier,
    temperature_k: f64,
) -> f64 {
    let vt = thermal_voltage(temperature_k);
    let k = Q * mobility * vt / spacing * 1e3;
    let d = (psi_j - psi_i) / vt;
    match carrier {
        Carrier::Electron => k * (bernoulli(d) * c_j - bernoulli(-d) * c_i),
        Carrier::Hole => k * (bernoulli(d) * c_i - bernoulli(-d) * c_j),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::default_materials;
    use proptest::prelude::*;

    const T: f64 = 300.0;

    #[test]
    fn bernoulli_values() {
        assert_eq!(bernoulli(0.0), 1.0);
        let oracle = 2.0 / (2.0f64.exp() - 1.0);
        assert!((bernoulli(2.0) - oracle).abs() < 1e-15);
        assert!((bernoulli(2.0) - 0.313035).abs() < 1e-6);
        assert!((bernoulli(1e-8) - 1.0 + 0.5e-8).abs() < 1e-12);
        for x in [0.1, 1.0, 10.0] {
            assert!((bernoulli(-x) - bernoulli(x) - x).abs() < 1e-12);
        }
        // No overflow in the tails.
        assert_eq!(bernoulli(800.0), 0.0);
        assert!((bernoulli(-800.0) - 800.0).abs() < 1e-9);
    }

    #[test]
    fn bernoulli_continuous_across_branch() {
        let below = bernoulli(0.999_999e-4);
        let above = bernoulli(1.000_001e-4);
        assert!((below - above).abs() < 1e-9);
    }

    #[test]
    fn intrinsic_density_examples() {
        let lib = default_materials();
        let ni = intrinsic_density(&lib["p-CIGS"], T);
        // Oracle: sqrt(2.2e18 * 1.8e19) * exp(-1.1 / (2 * 0.025852))
        let oracle = (2.2e18f64 * 1.8e19).sqrt() * (-1.1f64 / (2.0 * 0.025852)).exp();
        assert!((ni / oracle - 1.0).abs() < 1e-3);
        assert!((ni / 3.6e9 - 1.0).abs() < 0.02, "{ni}");
        let ni_cds = intrinsic_density(&lib["n-CdS"], T);
        assert!((ni_cds / 1.6e-2 - 1.0).abs() < 0.05, "{ni_cds}");
    }

    #[test]
    fn intrinsic_density_vanishes_when_cold() {
        let m = &default_materials()["p-GaAs"];
        let mut last = f64::INFINITY;
        for t in [300.0, 200.0, 100.0, 50.0, 20.0] {
            let ni = intrinsic_density(m, t);
            assert!(ni < last);
            last = ni;
        }
        assert!(last < 1e-100);
        assert_eq!(intrinsic_density(m, 1.0), 0.0);
    }

    #[test]
    fn equilibrium_limits() {
        let m = &default_materials()["p-CIGS"];
        let ni = intrinsic_density(m, T);
        let (n, p) = equilibrium_carriers(m, DopingType::Donor, 1e17, T);
        assert!((n / 1e17 - 1.0).abs() < 1e-12);
        assert!((p / (ni * ni / 1e17) - 1.0).abs() < 1e-12);
        let (n, p) = equilibrium_carriers(m, DopingType::Acceptor, 0.0, T);
        assert!((n / ni - 1.0).abs() < 1e-12 && (p / ni - 1.0).abs() < 1e-12);
    }

    #[test]
    fn srh_examples() {
        let trap = TrapSpec::default();
        let ni = 3.6e9;
        assert_eq!(srh_recombination(ni, ni, ni, &trap, 1e7, 1e7, T), 0.0);
        let n = 1e16;
        let r = srh_recombination(n, n, ni, &trap, 1e7, 1e7, T);
        let tau = trap.tau_n(1e7);
        assert!((r / (n / (2.0 * tau)) - 1.0).abs() < 1e-5);
        let none = TrapSpec {
            density: 0.0,
            ..trap
        };
        assert_eq!(srh_recombination(1e16, 1e16, ni, &none, 1e7, 1e7, T), 0.0);
    }

    #[test]
    fn sg_zero_field_is_central_difference() {
        let (ci, cj, mu, h) = (1e15, 3e15, 100.0, 1e-6);
        let vt = thermal_voltage(T);
        let expect = Q * mu * vt / h * (cj - ci) * 1e3;
        let got = sg_flux(0.3, 0.3, ci, cj, mu, h, Carrier::Electron, T);
        assert!(((got - expect) / expect).abs() < 1e-12);
        let got = sg_flux(0.3, 0.3, ci, cj, mu, h, Carrier::Hole, T);
        assert!(((got + expect) / expect).abs() < 1e-12);
    }

    #[test]
    fn sg_drift_limit() {
        let (c, mu, h, dpsi) = (1e16, 100.0, 1e-6, 1e-6);
        let got = sg_flux(0.0, dpsi, c, c, mu, h, Carrier::Electron, T);
        let expect = -Q * mu * c * dpsi / h * 1e3;
        assert!(((got - expect) / expect).abs() < 1e-6);
    }

    #[test]
    fn sg_exact_for_boltzmann_profiles() {
        let vt = thermal_voltage(T);
        for dpsi in [-0.5, -0.01, 0.0, 0.02, 0.3] {
            let ci = 1e12;
            let cj = ci * (dpsi / vt).exp();
            let j = sg_flux(0.1, 0.1 + dpsi, ci, cj, 100.0, 1e-6, Carrier::Electron, T);
            assert!(j.abs() <= 1e-12 * (Q * 100.0 * vt / 1e-6 * ci.max(cj) * 1e3));
            let pj = ci * (-dpsi / vt).exp();
            let j = sg_flux(0.1, 0.1 + dpsi, ci, pj, 100.0, 1e-6, Carrier::Hole, T);
            assert!(j.abs() <= 1e-12 * (Q * 100.0 * vt / 1e-6 * ci.max(pj) * 1e3));
        }
    }

    proptest! {
        #[test]
        fn sg_antisymmetric(
            psi_i in -1.0f64..1.0, psi_j in -1.0f64..1.0,
            ci in 1.0f64..1e18, cj in 1.0f64..1e18,
            hole in any::<bool>(),
        ) {
            let carrier = if hole { Carrier::Hole } else { Carrier::Electron };
            let a = sg_flux(psi_i, psi_j, ci, cj, 50.0, 1e-6, carrier, T);
            let b = sg_flux(psi_j, psi_i, cj, ci, 50.0, 1e-6, carrier, T);
            prop_assert!((a + b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1e-300));
        }

        #[test]
        fn bernoulli_derivative_matches_central_difference(x in -50.0f64..50.0) {
            let h = 1e-5 * x.abs().max(1.0);
            let fd = (bernoulli(x + h) - bernoulli(x - h)) / (2.0 * h);
            prop_assert!((bernoulli_derivative(x) - fd).abs() < 1e-7);
            // B(−x) = B(x) + x differentiates to −B'(−x) = B'(x) + 1.
            prop_assert!((bernoulli_derivative(-x) + bernoulli_derivative(x) + 1.0).abs() < 1e-12);
        }

        #[test]
        fn srh_sign_follows_np(n in 1e2f64..1e18, p in 1e2f64..1e18) {
            let ni = 3.6e9;
            let r = srh_recombination(n, p, ni, &TrapSpec::default(), 1e7, 1e7, T);
            prop_assert_eq!(r > 0.0, n * p > ni * ni);
        }

        #[test]
        fn mass_action_holds(net in -1e20f64..1e20) {
            let ni = 3.6e9;
            let (n, p) = neutral_densities(net, ni);
            prop_assert!((n * p / (ni * ni) - 1.0).abs() < 1e-9);
            prop_assert!(((n - p) - net).abs() <= 1e-9 * net.abs().max(ni));
        }

        #[test]
        fn ni_monotone(eg in 0.5f64..3.0, t in 200.0f64..400.0) {
            let mut m = default_materials()["p-CIGS"].clone();
            m.bandgap = eg;
            let base = intrinsic_density(&m, t);
            prop_assert!(intrinsic_density(&m, t + 1.0) > base);
            m.bandgap = eg + 0.01;
            prop_assert!(intrinsic_density(&m, t) < base);
        }
    }
}
