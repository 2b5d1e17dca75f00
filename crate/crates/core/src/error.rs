use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown material '{0}'")]
    UnknownMaterial(String),

    #[error("layer {index}: {reason}")]
    InvalidLayer { index: usize, reason: String },

    #[error("invalid material '{name}': {reason}")]
    InvalidMaterial { name: String, reason: String },

    #[error("invalid device: {0}")]
    InvalidDevice(String),

    #[error("mesh: {0}")]
    Mesh(String),

    #[error("device file: {0}")]
    DeviceFile(String),

    #[error("spectrum: {0}")]
    Spectrum(String),

    #[error("mesh does not match stack: {0}")]
    MeshMismatch(String),

    #[error("solver did not converge after {iterations} iterations (last residual {residual:.3e}) at V = {voltage} V")]
    NonConvergence {
        voltage: f64,
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },

    #[error("negative carrier density at node {node} (V = {voltage} V)")]
    NegativeDensity { node: usize, voltage: f64 },

    #[error("linear solve failed: {0}")]
    Singular(String),

    #[error("state is not converged")]
    Unconverged,

    #[error("Voc out of range: J never crosses zero below V_max = {vmax} V (raise --vmax)")]
    VocOutOfRange { vmax: f64 },

    #[error("I-V curve: {0}")]
    Curve(String),

    #[error("sweep axis: {0}")]
    Axis(String),

    #[error("sweep: {0}")]
    Sweep(String),

    #[error("{0}")]
    Usage(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
