//! Solar spectrum handling and Beer–Lambert photogeneration.

mod generation;
mod spectrum;

pub(crate) use generation::profile_for_lines;
pub use generation::{
    absorption_coefficient, absorption_with_prefactor, generation_profile, photon_energy,
    GenerationProfile, OpticsConfig, DEFAULT_ABSORPTION_PREFACTOR,
};
pub use spectrum::{load_spectrum, photons_per_joule, SolarSpectrum, SpectralLine, SpectrumMode};
