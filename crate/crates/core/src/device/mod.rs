//! Materials, layer stacks, contacts and the discretisation mesh.

mod file;
mod material;
mod mesh;
mod stack;

pub use file::{device_to_json, load_device, parse_device, save_device, DeviceFile};
pub use material::{default_materials, Material, MaterialLibrary, TrapSpec};
pub use mesh::{generate_mesh, Mesh, MeshConfig, MeshPolicy, MIN_INTERIOR_NODES};
pub use stack::{
    build_stack, short_name, ContactKind, ContactSpec, DeviceStack, DopingType, IlluminationSide,
    Layer, LayerSpec, Preset,
};
