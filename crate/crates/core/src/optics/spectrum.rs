use std::path::Path;

use crate::constants::{C_LIGHT, H_PLANCK};
use crate::error::{Error, Result};

const BUNDLED_AM15G: &str = include_str!("../../data/am15g.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SpectrumMode {
    /// Sampled spectral irradiance (W/m²/nm), integrated with the trapezoid rule.
    #[default]
    Continuous,
    /// A single line; the irradiance column is the total power in W/m².
    Monochromatic,
}

/// Spectral irradiance samples `(wavelength nm, W/m²/nm)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolarSpectrum {
    samples: Vec<(f64, f64)>,
    mode: SpectrumMode,
}

/// One quadrature line: wavelength and photon flux (cm⁻² s⁻¹) it carries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralLine {
    pub wavelength_nm: f64,
    pub photon_flux: f64,
}

/// Photons per second per watt at `wavelength_nm`: λ/(h·c).
pub fn photons_per_joule(wavelength_nm: f64) -> f64 {
    wavelength_nm * 1e-9 / (H_PLANCK * C_LIGHT)
}

impl SolarSpectrum {
    pub fn new(samples: Vec<(f64, f64)>, mode: SpectrumMode) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Spectrum("no samples".into()));
        }
        for (i, &(wl, irr)) in samples.iter().enumerate() {
            if !(wl > 0.0 && wl.is_finite()) {
                return Err(Error::Spectrum(format!(
                    "sample {i}: wavelength must be > 0"
                )));
            }
            if !(irr >= 0.0 && irr.is_finite()) {
                return Err(Error::Spectrum(format!(
                    "sample {i}: negative irradiance {irr} at {wl} nm"
                )));
            }
        }
        if let Some(i) = samples.windows(2).position(|w| w[1].0 <= w[0].0) {
            return Err(Error::Spectrum(format!(
                "wavelengths not strictly increasing at sample {} ({} nm after {} nm)",
                i + 1,
                samples[i + 1].0,
                samples[i].0
            )));
        }
        match mode {
            SpectrumMode::Continuous if samples.len() < 2 => Err(Error::Spectrum(
                "a continuous spectrum needs at least two samples (use monochromatic mode for a single line)".into(),
            )),
            SpectrumMode::Monochromatic if samples.len() != 1 => Err(Error::Spectrum(format!(
                "monochromatic mode expects exactly one line, got {}",
                samples.len()
            ))),
            _ => Ok(SolarSpectrum { samples, mode }),
        }
    }

    /// Single line carrying `photon_flux` photons cm⁻² s⁻¹.
    pub fn monochromatic(wavelength_nm: f64, photon_flux: f64) -> Result<Self> {
        let watts_m2 = photon_flux * 1e4 / photons_per_joule(wavelength_nm);
        SolarSpectrum::new(vec![(wavelength_nm, watts_m2)], SpectrumMode::Monochromatic)
    }

    /// The bundled AM1.5G (ASTM G173 global tilt) reference spectrum.
    pub fn am15g() -> Self {
        SolarSpectrum::parse(BUNDLED_AM15G, SpectrumMode::Continuous)
            .expect("bundled spectrum is valid")
    }

    /// Parses two whitespace-separated columns; `#` starts a comment.
    pub fn parse(text: &str, mode: SpectrumMode) -> Result<Self> {
        let mut samples = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut cols = line.split_whitespace();
            let mut next = |what: &str| -> Result<f64> {
                let tok = cols.next().ok_or_else(|| {
                    Error::Spectrum(format!("line {}: missing {what} column", lineno + 1))
                })?;
                tok.parse::<f64>().map_err(|_| {
                    Error::Spectrum(format!("line {}: cannot parse {what} '{tok}'", lineno + 1))
                })
            };
            let wl = next("wavelength")?;
            let irr = next("irradiance")?;
            samples.push((wl, irr));
        }
        if samples.is_empty() {
            return Err(Error::Spectrum("file contains no samples".into()));
        }
        SolarSpectrum::new(samples, mode)
    }

    pub fn load(path: &Path, mode: SpectrumMode) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        SolarSpectrum::parse(&text, mode)
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    pub fn mode(&self) -> SpectrumMode {
        self.mode
    }

    /// Returns a copy with every irradiance multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        SolarSpectrum::new(
            self.samples.iter().map(|&(w, e)| (w, e * factor)).collect(),
            self.mode,
        )
    }

    /// Total incident power (mW/cm²) over the whole sampled range.
    pub fn total_power(&self) -> f64 {
        let watts_m2 = match self.mode {
            SpectrumMode::Monochromatic => self.samples[0].1,
            SpectrumMode::Continuous => self
                .samples
                .windows(2)
                .map(|w| 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0))
                .sum(),
        };
        watts_m2 * 0.1
    }

    /// Quadrature lines restricted to `[wl_min, wl_max]` nm. Trapezoid weights
    /// are used; window edges falling between samples are interpolated.
    pub fn lines(&self, wl_min: f64, wl_max: f64) -> Vec<SpectralLine> {
        let flux = |wl: f64, irr: f64| irr * photons_per_joule(wl) * 1e-4;
        if self.mode == SpectrumMode::Monochromatic {
            let (wl, irr) = self.samples[0];
            return if (wl_min..=wl_max).contains(&wl) {
                vec![SpectralLine {
                    wavelength_nm: wl,
                    photon_flux: flux(wl, irr),
                }]
            } else {
                Vec::new()
            };
        }
        let lo = wl_min.max(self.samples[0].0);
        let hi = wl_max.min(self.samples[self.samples.len() - 1].0);
        if lo >= hi {
            return Vec::new();
        }
        let mut pts: Vec<(f64, f64)> = vec![(lo, self.interpolate(lo))];
        pts.extend(
            self.samples
                .iter()
                .copied()
                .filter(|&(w, _)| w > lo && w < hi),
        );
        pts.push((hi, self.interpolate(hi)));

        let m = pts.len();
        (0..m)
            .map(|k| {
                let left = if k > 0 { pts[k].0 - pts[k - 1].0 } else { 0.0 };
                let right = if k + 1 < m {
                    pts[k + 1].0 - pts[k].0
                } else {
                    0.0
                };
                let (wl, irr) = pts[k];
                SpectralLine {
                    wavelength_nm: wl,
                    photon_flux: flux(wl, irr) * 0.5 * (left + right),
                }
            })
            .collect()
    }

    /// Total photon flux (cm⁻² s⁻¹) at photon energies ≥ `energy_ev` within the window.
    pub fn photon_flux_above(&self, energy_ev: f64, wl_min: f64, wl_max: f64) -> f64 {
        let cutoff = crate::constants::HC_EV_NM / energy_ev;
        self.lines(wl_min, wl_max.min(cutoff))
            .iter()
            .map(|l| l.photon_flux)
            .sum()
    }

    fn interpolate(&self, wl: f64) -> f64 {
        let s = &self.samples;
        let idx = s.partition_point(|&(w, _)| w < wl);
        if idx == 0 {
            return s[0].1;
        }
        if idx >= s.len() {
            return s[s.len() - 1].1;
        }
        let (w0, e0) = s[idx - 1];
        let (w1, e1) = s[idx];
        e0 + (e1 - e0) * (wl - w0) / (w1 - w0)
    }
}

/// Loads a spectrum file, or the bundled AM1.5G table when `path` is `None`.
pub fn load_spectrum(path: Option<&Path>, mode: SpectrumMode) -> Result<SolarSpectrum> {
    match path {
        Some(p) => SolarSpectrum::load(p, mode),
        None => Ok(SolarSpectrum::am15g()),
    }
}
