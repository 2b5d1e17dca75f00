//! JSON device description.
//!
//! ```json
//! {
//!   "temperature_K": 300,
//!   "layers": [
//!     {"material": "p-CIGS", "thickness_um": 5.0, "doping_type": "acceptor", "doping_cm3": 1e10}
//!   ],
//!   "contacts": {"back": {...}, "front": {...}},
//!   "illumination_side": "front",
//!   "materials": {"my-absorber": {"bandgap_eV": 1.2, ...}}
//! }
//! ```
//!
//! Materials defined inline under `materials` take precedence over the
//! built-in library.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::material::{default_materials, Material, MaterialLibrary, TrapSpec};
use super::stack::{short_name, ContactSpec, DeviceStack, DopingType, IlluminationSide, Layer};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialEntry {
    #[serde(rename = "bandgap_eV")]
    pub bandgap: f64,
    #[serde(rename = "electron_affinity_eV")]
    pub electron_affinity: f64,
    pub rel_permittivity: f64,
    #[serde(rename = "Nc_cm3")]
    pub nc: f64,
    #[serde(rename = "Nv_cm3")]
    pub nv: f64,
    #[serde(rename = "vth_e_cm_s")]
    pub vth_e: f64,
    #[serde(rename = "vth_h_cm_s")]
    pub vth_h: f64,
    #[serde(rename = "mu_e_cm2_Vs")]
    pub mu_e: f64,
    #[serde(rename = "mu_h_cm2_Vs")]
    pub mu_h: f64,
    #[serde(rename = "radiative_coeff_cm3_s", default)]
    pub radiative_coeff: f64,
    /// Absent means the default midgap trap; `null` disables SRH.
    #[serde(default = "default_trap")]
    pub trap: Option<TrapSpec>,
}

fn default_trap() -> Option<TrapSpec> {
    Some(TrapSpec::default())
}

impl MaterialEntry {
    fn into_material(self, name: &str) -> Material {
        Material {
            name: name.to_string(),
            bandgap: self.bandgap,
            electron_affinity: self.electron_affinity,
            rel_permittivity: self.rel_permittivity,
            nc: self.nc,
            nv: self.nv,
            vth_e: self.vth_e,
            vth_h: self.vth_h,
            mu_e: self.mu_e,
            mu_h: self.mu_h,
            radiative_coeff: self.radiative_coeff,
            trap: self.trap,
        }
    }

    fn from_material(m: &Material) -> Self {
        MaterialEntry {
            bandgap: m.bandgap,
            electron_affinity: m.electron_affinity,
            rel_permittivity: m.rel_permittivity,
            nc: m.nc,
            nv: m.nv,
            vth_e: m.vth_e,
            vth_h: m.vth_h,
            mu_e: m.mu_e,
            mu_h: m.mu_h,
            radiative_coeff: m.radiative_coeff,
            trap: m.trap,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub material: String,
    pub thickness_um: f64,
    pub doping_type: DopingType,
    pub doping_cm3: f64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContactsEntry {
    #[serde(default)]
    pub back: ContactSpec,
    #[serde(default)]
    pub front: ContactSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceFile {
    #[serde(rename = "temperature_K", default = "default_temperature")]
    pub temperature_k: f64,
    pub layers: Vec<LayerEntry>,
    #[serde(default)]
    pub contacts: ContactsEntry,
    #[serde(default)]
    pub illumination_side: IlluminationSide,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub materials: BTreeMap<String, MaterialEntry>,
}

fn default_temperature() -> f64 {
    300.0
}

impl DeviceFile {
    pub fn from_stack(stack: &DeviceStack) -> Self {
        let mut materials = BTreeMap::new();
        for layer in &stack.layers {
            materials
                .entry(layer.material.name.clone())
                .or_insert_with(|| MaterialEntry::from_material(&layer.material));
        }
        DeviceFile {
            temperature_k: stack.temperature_k,
            layers: stack
                .layers
                .iter()
                .map(|l| LayerEntry {
                    name: (l.name != short_name(&l.material.name)).then(|| l.name.clone()),
                    material: l.material.name.clone(),
                    thickness_um: l.thickness_um,
                    doping_type: l.doping_type,
                    doping_cm3: l.doping,
                })
                .collect(),
            contacts: ContactsEntry {
                back: stack.back_contact,
                front: stack.front_contact,
            },
            illumination_side: stack.illumination_side,
            materials,
        }
    }

    pub fn into_stack(self) -> Result<DeviceStack> {
        let mut library: MaterialLibrary = default_materials();
        for (name, entry) in self.materials {
            library.insert(name.clone(), entry.into_material(&name));
        }
        let mut layers = Vec::with_capacity(self.layers.len());
        for entry in self.layers {
            let material = library
                .get(&entry.material)
                .cloned()
                .ok_or_else(|| Error::UnknownMaterial(entry.material.clone()))?;
            layers.push(Layer {
                name: entry.name.unwrap_or_else(|| short_name(&entry.material)),
                material,
                thickness_um: entry.thickness_um,
                doping_type: entry.doping_type,
                doping: entry.doping_cm3,
            });
        }
        let stack = DeviceStack {
            layers,
            back_contact: self.contacts.back,
            front_contact: self.contacts.front,
            temperature_k: self.temperature_k,
            illumination_side: self.illumination_side,
        };
        stack.validate()?;
        Ok(stack)
    }
}

pub fn parse_device(text: &str) -> Result<DeviceStack> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let file: DeviceFile = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path == "." {
            Error::DeviceFile(inner.to_string())
        } else {
            Error::DeviceFile(format!("{path}: {inner}"))
        }
    })?;
    file.into_stack()
}

pub fn device_to_json(stack: &DeviceStack) -> Result<String> {
    Ok(serde_json::to_string_pretty(&DeviceFile::from_stack(
        stack,
    ))?)
}

pub fn load_device(path: &Path) -> Result<DeviceStack> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_device(&text).map_err(|e| match e {
        Error::DeviceFile(msg) => Error::DeviceFile(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn save_device(stack: &DeviceStack, path: &Path) -> Result<()> {
    std::fs::write(path, device_to_json(stack)?).map_err(|e| Error::io(path, e))
}
