use crate::constants::{thermal_voltage, EPS0, Q};
use crate::device::{DeviceStack, Mesh};
use crate::error::Result;
use crate::transport::{intrinsic_density, neutral_densities};

/// Stack and mesh flattened into per-node and per-edge coefficient arrays.
///
/// Energies are referenced to the equilibrium Fermi level (0 eV), so that
/// E_c = −χ − ψ and the Boltzmann closures read
/// `n = exp((ψ + χn + EFn) / Vt)` and `p = exp(−(ψ + χp + EFp) / Vt)`
/// with the band offsets `χn = χ + Vt·ln Nc` and `χp = χ + Eg − Vt·ln Nv`.
#[derive(Debug, Clone)]
pub struct DeviceModel {
    pub stack: DeviceStack,
    pub mesh: Mesh,
    pub vt: f64,
    /// Control-volume widths (cm).
    pub volume: Vec<f64>,
    /// Edge spacings (cm).
    pub spacing: Vec<f64>,
    pub affinity: Vec<f64>,
    pub bandgap: Vec<f64>,
    pub chi_n: Vec<f64>,
    pub chi_p: Vec<f64>,
    pub ni: Vec<f64>,
    /// N_D − N_A integrated over each control volume (cm⁻²).
    pub doping_charge: Vec<f64>,
    /// ε/q on each edge (cm⁻¹ V⁻¹).
    pub eps_over_q: Vec<f64>,
    pub mu_n: Vec<f64>,
    pub mu_p: Vec<f64>,
    pub tau_n: Vec<f64>,
    pub tau_p: Vec<f64>,
    pub n1: Vec<f64>,
    pub p1: Vec<f64>,
    pub radiative: Vec<f64>,
    /// Equilibrium potential and densities at the back (index 0) and front contacts.
    pub contact_psi: [f64; 2],
    pub contact_n: [f64; 2],
    pub contact_p: [f64; 2],
}

impl DeviceModel {
    pub fn new(stack: &DeviceStack, mesh: &Mesh) -> Result<Self> {
        stack.validate()?;
        mesh.check_matches(stack)?;
        let t = stack.temperature_k;
        let vt = thermal_voltage(t);
        let n = mesh.len();
        let spacing = mesh.spacings();
        let volume = mesh.volumes();

        let node_mat = |i: usize| &stack.layers[mesh.layer_of_node[i]].material;
        let edge_layer = |e: usize| &stack.layers[mesh.layer_of_edge[e]];

        let mut m = DeviceModel {
            stack: stack.clone(),
            mesh: mesh.clone(),
            vt,
            volume,
            spacing: spacing.clone(),
            affinity: Vec::with_capacity(n),
            bandgap: Vec::with_capacity(n),
            chi_n: Vec::with_capacity(n),
            chi_p: Vec::with_capacity(n),
            ni: Vec::with_capacity(n),
            doping_charge: vec![0.0; n],
            eps_over_q: Vec::with_capacity(n - 1),
            mu_n: Vec::with_capacity(n - 1),
            mu_p: Vec::with_capacity(n - 1),
            tau_n: Vec::with_capacity(n),
            tau_p: Vec::with_capacity(n),
            n1: Vec::with_capacity(n),
            p1: Vec::with_capacity(n),
            radiative: Vec::with_capacity(n),
            contact_psi: [0.0; 2],
            contact_n: [0.0; 2],
            contact_p: [0.0; 2],
        };

        for i in 0..n {
            let mat = node_mat(i);
            m.affinity.push(mat.electron_affinity);
            m.bandgap.push(mat.bandgap);
            m.chi_n.push(mat.electron_affinity + vt * mat.nc.ln());
            m.chi_p
                .push(mat.electron_affinity + mat.bandgap - vt * mat.nv.ln());
            let ni = intrinsic_density(mat, t);
            m.ni.push(ni);
            m.radiative.push(mat.radiative_coeff);
            match &mat.trap {
                Some(trap) if trap.density > 0.0 => {
                    m.tau_n.push(trap.tau_n(mat.vth_e));
                    m.tau_p.push(trap.tau_p(mat.vth_h));
                    m.n1.push(ni * (trap.energy_level / vt).exp());
                    m.p1.push(ni * (-trap.energy_level / vt).exp());
                }
                _ => {
                    m.tau_n.push(f64::INFINITY);
                    m.tau_p.push(f64::INFINITY);
                    m.n1.push(ni);
                    m.p1.push(ni);
                }
            }
        }
        for (e, &h) in spacing.iter().enumerate() {
            let layer = edge_layer(e);
            m.eps_over_q
                .push(layer.material.rel_permittivity * EPS0 / Q);
            m.mu_n.push(layer.material.mu_e);
            m.mu_p.push(layer.material.mu_h);
            let half = 0.5 * h * layer.net_doping();
            m.doping_charge[e] += half;
            m.doping_charge[e + 1] += half;
        }

        for (k, node) in [0, n - 1].into_iter().enumerate() {
            let layer = &stack.layers[mesh.layer_of_node[node]];
            let (n0, p0) = neutral_densities(layer.net_doping(), m.ni[node]);
            m.contact_psi[k] = vt * n0.ln() - m.chi_n[node];
            m.contact_n[k] = n0;
            m.contact_p[k] = p0;
        }
        Ok(m)
    }

    pub fn len(&self) -> usize {
        self.mesh.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mesh.is_empty()
    }

    /// Charge-neutral potential at every node, used to seed the equilibrium solve.
    pub fn neutral_potential(&self) -> Vec<f64> {
        (0..self.len())
            .map(|i| {
                let net = self.doping_charge[i] / self.volume[i];
                let (n0, _) = neutral_densities(net, self.ni[i]);
                self.vt * n0.ln() - self.chi_n[i]
            })
            .collect()
    }

    /// Electron density for potential `psi` and quasi-Fermi level `efn`.
    pub fn electron_density(&self, i: usize, psi: f64, efn: f64) -> f64 {
        ((psi + self.chi_n[i] + efn) / self.vt).exp()
    }

    pub fn hole_density(&self, i: usize, psi: f64, efp: f64) -> f64 {
        (-(psi + self.chi_p[i] + efp) / self.vt).exp()
    }

    pub fn efn(&self, i: usize, psi: f64, n: f64) -> f64 {
        self.vt * n.ln() - psi - self.chi_n[i]
    }

    pub fn efp(&self, i: usize, psi: f64, p: f64) -> f64 {
        -self.vt * p.ln() - psi - self.chi_p[i]
    }

    /// Net recombination rate at node `i` (cm⁻³ s⁻¹).
    pub fn recombination(&self, i: usize, n: f64, p: f64) -> f64 {
        let excess = n * p - self.ni[i] * self.ni[i];
        let srh = if self.tau_n[i].is_finite() {
            excess / (self.tau_p[i] * (n + self.n1[i]) + self.tau_n[i] * (p + self.p1[i]))
        } else {
            0.0
        };
        srh + self.radiative[i] * excess
    }

    /// Net recombination with its partial derivatives (R, ∂R/∂n, ∂R/∂p).
    pub fn recombination_with_derivatives(&self, i: usize, n: f64, p: f64) -> (f64, f64, f64) {
        let excess = n * p - self.ni[i] * self.ni[i];
        let b = self.radiative[i];
        let (mut r, mut dn, mut dp) = (b * excess, b * p, b * n);
        if self.tau_n[i].is_finite() {
            let d = self.tau_p[i] * (n + self.n1[i]) + self.tau_n[i] * (p + self.p1[i]);
            let srh = excess / d;
            r += srh;
            dn += (p - srh * self.tau_p[i]) / d;
            dp += (n - srh * self.tau_n[i]) / d;
        }
        (r, dn, dp)
    }

    /// Coefficient `k` in `R ≈ k·(n·p − ni²)` with the SRH denominator frozen at (n, p).
    pub fn recombination_coefficient(&self, i: usize, n: f64, p: f64) -> f64 {
        let srh = if self.tau_n[i].is_finite() {
            1.0 / (self.tau_p[i] * (n + self.n1[i]) + self.tau_n[i] * (p + self.p1[i]))
        } else {
            0.0
        };
        srh + self.radiative[i]
    }

    /// Whether electrons are the minority carrier at the back / front contact.
    pub fn electrons_minority(&self, contact: usize) -> bool {
        self.contact_n[contact] <= self.contact_p[contact]
    }
}
