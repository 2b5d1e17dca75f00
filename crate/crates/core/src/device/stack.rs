use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::material::{default_materials, Material, MaterialLibrary};
use crate::constants::UM_TO_CM;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DopingType {
    Donor,
    Acceptor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ContactKind {
    Ohmic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContactSpec {
    pub kind: ContactKind,
    #[serde(rename = "surface_recomb_e_cm_s")]
    pub surface_recomb_e: f64,
    #[serde(rename = "surface_recomb_p_cm_s")]
    pub surface_recomb_p: f64,
}

impl Default for ContactSpec {
    fn default() -> Self {
        ContactSpec {
            kind: ContactKind::Ohmic,
            surface_recomb_e: 1e7,
            surface_recomb_p: 1e7,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IlluminationSide {
    #[default]
    Front,
    Back,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    /// Short label used to address the layer in sweeps ("CIGS", "CdS", ...).
    pub name: String,
    pub material: Material,
    pub thickness_um: f64,
    pub doping_type: DopingType,
    /// Ionised dopant density (cm⁻³).
    pub doping: f64,
}

impl Layer {
    pub fn thickness_cm(&self) -> f64 {
        self.thickness_um * UM_TO_CM
    }

    /// N_D − N_A (cm⁻³).
    pub fn net_doping(&self) -> f64 {
        match self.doping_type {
            DopingType::Donor => self.doping,
            DopingType::Acceptor => -self.doping,
        }
    }

    /// Whether `label` addresses this layer, either by its short name or its
    /// material name (case-insensitive).
    pub fn matches(&self, label: &str) -> bool {
        self.name.eq_ignore_ascii_case(label) || self.material.name.eq_ignore_ascii_case(label)
    }
}

/// Derives the short layer label from a material name: "p-CIGS" → "CIGS".
pub fn short_name(material: &str) -> String {
    match material.split_once('-') {
        Some((prefix, rest)) if prefix.len() == 1 && !rest.is_empty() => rest.to_string(),
        _ => material.to_string(),
    }
}

/// Layers ordered from the back contact (index 0) to the front contact.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviceStack {
    pub layers: Vec<Layer>,
    pub back_contact: ContactSpec,
    pub front_contact: ContactSpec,
    pub temperature_k: f64,
    pub illumination_side: IlluminationSide,
}

impl DeviceStack {
    pub fn validate(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(Error::InvalidDevice("stack has no layers".into()));
        }
        if !(self.temperature_k > 0.0 && self.temperature_k.is_finite()) {
            return Err(Error::InvalidDevice(format!(
                "temperature must be > 0 K, got {}",
                self.temperature_k
            )));
        }
        for (index, layer) in self.layers.iter().enumerate() {
            if !(layer.thickness_um > 0.0 && layer.thickness_um.is_finite()) {
                return Err(Error::InvalidLayer {
                    index,
                    reason: format!("thickness must be > 0, got {} um", layer.thickness_um),
                });
            }
            if !(layer.doping >= 0.0 && layer.doping.is_finite()) {
                return Err(Error::InvalidLayer {
                    index,
                    reason: format!("doping must be >= 0, got {} cm^-3", layer.doping),
                });
            }
            layer.material.validate()?;
        }
        for (side, c) in [("back", &self.back_contact), ("front", &self.front_contact)] {
            if !(c.surface_recomb_e >= 0.0 && c.surface_recomb_p >= 0.0) {
                return Err(Error::InvalidDevice(format!(
                    "{side} contact recombination velocities must be >= 0"
                )));
            }
        }
        Ok(())
    }

    pub fn total_thickness_um(&self) -> f64 {
        self.layers.iter().map(|l| l.thickness_um).sum()
    }

    pub fn total_thickness_cm(&self) -> f64 {
        self.total_thickness_um() * UM_TO_CM
    }

    /// Index of the unique layer addressed by `label`.
    pub fn find_layer(&self, label: &str) -> Result<usize> {
        let hits: Vec<usize> = self
            .layers
            .iter()
            .enumerate()
            .filter(|(_, l)| l.matches(label))
            .map(|(i, _)| i)
            .collect();
        match hits.as_slice() {
            [i] => Ok(*i),
            [] => Err(Error::InvalidDevice(format!("no layer named '{label}'"))),
            _ => Err(Error::InvalidDevice(format!(
                "layer name '{label}' is ambiguous ({} layers match)",
                hits.len()
            ))),
        }
    }

    /// Smallest bandgap over all layers (eV).
    pub fn min_bandgap(&self) -> f64 {
        self.layers
            .iter()
            .map(|l| l.material.bandgap)
            .fold(f64::INFINITY, f64::min)
    }
}

/// One entry of a stack description.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerSpec {
    pub material: String,
    pub thickness_um: f64,
    pub doping_type: DopingType,
    pub doping: f64,
}

impl LayerSpec {
    pub fn new(material: &str, thickness_um: f64, doping_type: DopingType, doping: f64) -> Self {
        LayerSpec {
            material: material.to_string(),
            thickness_um,
            doping_type,
            doping,
        }
    }
}

/// Resolves material names against `library` and assembles a validated stack
/// with default ohmic contacts and front illumination.
pub fn build_stack(
    spec: &[LayerSpec],
    library: &MaterialLibrary,
    temperature_k: f64,
) -> Result<DeviceStack> {
    let mut layers = Vec::with_capacity(spec.len());
    for (index, s) in spec.iter().enumerate() {
        let material = library
            .get(&s.material)
            .ok_or_else(|| Error::UnknownMaterial(s.material.clone()))?;
        if !(s.thickness_um > 0.0 && s.thickness_um.is_finite()) {
            return Err(Error::InvalidLayer {
                index,
                reason: format!("thickness must be > 0, got {} um", s.thickness_um),
            });
        }
        layers.push(Layer {
            name: short_name(&s.material),
            material: material.clone(),
            thickness_um: s.thickness_um,
            doping_type: s.doping_type,
            doping: s.doping,
        });
    }
    let stack = DeviceStack {
        layers,
        back_contact: ContactSpec::default(),
        front_contact: ContactSpec::default(),
        temperature_k,
        illumination_side: IlluminationSide::Front,
    };
    stack.validate()?;
    Ok(stack)
}

/// The three reference stacks: the unoptimised PN cell, the PN cell after
/// thickness optimisation, and the optimised GaAs-backed PPN cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    PnBaseline,
    PnOptimized,
    PpnOptimized,
}

impl Preset {
    pub const ALL: [Preset; 3] = [
        Preset::PnBaseline,
        Preset::PnOptimized,
        Preset::PpnOptimized,
    ];

    pub fn layer_specs(self) -> Vec<LayerSpec> {
        use DopingType::*;
        let base = 1e10;
        match self {
            Preset::PnBaseline => vec![
                LayerSpec::new("p-CIGS", 0.5, Acceptor, base),
                LayerSpec::new("n-CdS", 0.5, Donor, base),
                LayerSpec::new("n-ZnO", 0.5, Donor, base),
            ],
            Preset::PnOptimized => vec![
                LayerSpec::new("p-CIGS", 5.0, Acceptor, base),
                LayerSpec::new("n-CdS", 0.5, Donor, base),
                LayerSpec::new("n-ZnO", 0.5, Donor, base),
            ],
            Preset::PpnOptimized => vec![
                LayerSpec::new("p-GaAs", 5.0, Acceptor, 1e20),
                LayerSpec::new("p-CIGS", 5.0, Acceptor, base),
                LayerSpec::new("n-CdS", 0.5, Donor, base),
                LayerSpec::new("n-ZnO", 0.5, Donor, base),
            ],
        }
    }

    pub fn build(self, temperature_k: f64) -> Result<DeviceStack> {
        build_stack(&self.layer_specs(), &default_materials(), temperature_k)
    }

    pub fn name(self) -> &'static str {
        match self {
            Preset::PnBaseline => "pn-baseline",
            Preset::PnOptimized => "pn-optimized",
            Preset::PpnOptimized => "ppn-optimized",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                Error::Usage(format!(
                    "unknown preset '{s}' (expected pn-baseline, pn-optimized or ppn-optimized)"
                ))
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn baseline_preset_layout() {
        let s = Preset::PnBaseline.build(300.0).unwrap();
        assert_eq!(s.layers.len(), 3);
        for l in &s.layers {
            assert_eq!(l.thickness_um, 0.5);
            assert_eq!(l.doping, 1e10);
        }
        let names: Vec<_> = s.layers.iter().map(|l| l.material.name.as_str()).collect();
        assert_eq!(names, ["p-CIGS", "n-CdS", "n-ZnO"]);
    }

    #[test]
    fn ppn_preset_order_back_to_front() {
        let s = Preset::PpnOptimized.build(300.0).unwrap();
        let names: Vec<_> = s.layers.iter().map(|l| l.name.as_str()).collect();
        assert_eq!(names, ["GaAs", "CIGS", "CdS", "ZnO"]);
        assert!((s.total_thickness_um() - 11.0).abs() < 1e-12);
    }

    #[test]
    fn negative_thickness_names_layer() {
        let spec = [
            LayerSpec::new("p-CIGS", -1.0, DopingType::Acceptor, 1e16),
            LayerSpec::new("n-CdS", 0.5, DopingType::Donor, 1e16),
        ];
        match build_stack(&spec, &default_materials(), 300.0) {
            Err(Error::InvalidLayer { index, .. }) => assert_eq!(index, 0),
            other => panic!("expected layer error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_material_rejected() {
        let spec = [LayerSpec::new("p-Si", 1.0, DopingType::Acceptor, 1e16)];
        assert!(matches!(
            build_stack(&spec, &default_materials(), 300.0),
            Err(Error::UnknownMaterial(name)) if name == "p-Si"
        ));
    }

    #[test]
    fn layer_lookup_by_short_or_material_name() {
        let s = Preset::PpnOptimized.build(300.0).unwrap();
        assert_eq!(s.find_layer("CdS").unwrap(), 2);
        assert_eq!(s.find_layer("p-gaas").unwrap(), 0);
        assert!(s.find_layer("Foo").is_err());
    }

    #[test]
    fn preset_names_round_trip() {
        for p in Preset::ALL {
            assert_eq!(p.name().parse::<Preset>().unwrap(), p);
        }
    }
}
