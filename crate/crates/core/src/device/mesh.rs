use super::stack::DeviceStack;
use crate::constants::UM_TO_CM;
use crate::error::{Error, Result};

/// Every layer carries at least this many interior nodes.
pub const MIN_INTERIOR_NODES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeshPolicy {
    /// Geometric grading away from every interface and contact.
    Graded {
        min_spacing_um: f64,
        ratio: f64,
        max_spacing_um: f64,
    },
    /// Equal spacing inside each layer.
    Uniform { cells_per_layer: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshConfig {
    pub policy: MeshPolicy,
    pub node_budget: usize,
}

impl Default for MeshConfig {
    fn default() -> Self {
        MeshConfig {
            policy: MeshPolicy::Graded {
                min_spacing_um: 1e-3,
                ratio: 1.25,
                max_spacing_um: 0.05,
            },
            node_budget: 20_000,
        }
    }
}

impl MeshConfig {
    pub fn uniform(cells_per_layer: usize) -> Self {
        MeshConfig {
            policy: MeshPolicy::Uniform { cells_per_layer },
            ..Default::default()
        }
    }

    /// Same policy with every spacing scale divided by `factor`.
    pub fn refined(&self, factor: f64) -> Self {
        let policy = match self.policy {
            MeshPolicy::Graded {
                min_spacing_um,
                ratio,
                max_spacing_um,
            } => MeshPolicy::Graded {
                min_spacing_um: min_spacing_um / factor,
                ratio,
                max_spacing_um: max_spacing_um / factor,
            },
            MeshPolicy::Uniform { cells_per_layer } => MeshPolicy::Uniform {
                cells_per_layer: (cells_per_layer as f64 * factor).ceil() as usize,
            },
        };
        MeshConfig { policy, ..*self }
    }
}

/// Node positions (cm) with layer bookkeeping.
///
/// Nodes sitting on a layer interface are attributed to the layer on their
/// back (left) side. Edge `i` joins node `i` and `i + 1` and always lies
/// inside a single layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub nodes: Vec<f64>,
    pub layer_of_node: Vec<usize>,
    pub layer_of_edge: Vec<usize>,
    /// Node index of every layer boundary, contacts included (`layers + 1` entries).
    pub boundaries: Vec<usize>,
    pub policy: MeshPolicy,
}

impl Mesh {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Spacing of edge `i` (cm).
    pub fn spacing(&self, i: usize) -> f64 {
        self.nodes[i + 1] - self.nodes[i]
    }

    pub fn spacings(&self) -> Vec<f64> {
        self.nodes.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Control-volume width of each node (cm).
    pub fn volumes(&self) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let left = if i > 0 { self.spacing(i - 1) } else { 0.0 };
                let right = if i + 1 < n { self.spacing(i) } else { 0.0 };
                0.5 * (left + right)
            })
            .collect()
    }

    pub fn thickness_cm(&self) -> f64 {
        self.nodes.last().copied().unwrap_or(0.0)
    }

    pub fn layer_count(&self) -> usize {
        self.boundaries.len().saturating_sub(1)
    }

    /// Checks that the mesh was generated for `stack`.
    pub fn check_matches(&self, stack: &DeviceStack) -> Result<()> {
        if self.layer_count() != stack.layers.len() {
            return Err(Error::MeshMismatch(format!(
                "mesh has {} layers, stack has {}",
                self.layer_count(),
                stack.layers.len()
            )));
        }
        let mut x = 0.0;
        for (k, layer) in stack.layers.iter().enumerate() {
            x += layer.thickness_cm();
            let node = self.nodes[self.boundaries[k + 1]];
            if (node - x).abs() > 1e-9 * x.max(1e-12) {
                return Err(Error::MeshMismatch(format!(
                    "interface {} at {node} cm, stack expects {x} cm",
                    k + 1
                )));
            }
        }
        Ok(())
    }
}

fn graded_spacings(thickness: f64, min: f64, ratio: f64, max: f64) -> Vec<f64> {
    let half = 0.5 * thickness;
    let mut side = Vec::new();
    let mut sum = 0.0;
    let mut h = min;
    while sum < half {
        let step = h.min(max);
        side.push(step);
        sum += step;
        h *= ratio;
    }
    let scale = half / sum;
    let mut all: Vec<f64> = side.iter().map(|s| s * scale).collect();
    all.extend(side.iter().rev().map(|s| s * scale));
    all
}

/// Builds the discretisation mesh for `stack`.
pub fn generate_mesh(stack: &DeviceStack, cfg: &MeshConfig) -> Result<Mesh> {
    stack.validate()?;
    let min_cells = MIN_INTERIOR_NODES + 1;

    // Per-layer spacing lists in µm.
    let mut per_layer: Vec<Vec<f64>> = Vec::with_capacity(stack.layers.len());
    for layer in &stack.layers {
        let t = layer.thickness_um;
        let spacings = match cfg.policy {
            MeshPolicy::Graded {
                min_spacing_um,
                ratio,
                max_spacing_um,
            } => {
                if !(min_spacing_um > 0.0 && ratio >= 1.0 && max_spacing_um >= min_spacing_um) {
                    return Err(Error::Mesh(format!(
                        "invalid grading (min {min_spacing_um} um, ratio {ratio}, max {max_spacing_um} um)"
                    )));
                }
                // Guard the node budget before allocating: even the coarsest
                // possible grading needs t / max cells.
                if t / max_spacing_um > cfg.node_budget as f64 {
                    return Err(Error::Mesh(format!(
                        "mesh exceeds node budget of {}",
                        cfg.node_budget
                    )));
                }
                let s = graded_spacings(t, min_spacing_um, ratio, max_spacing_um);
                if s.len() < min_cells {
                    vec![t / (min_cells + 1) as f64; min_cells + 1]
                } else {
                    s
                }
            }
            MeshPolicy::Uniform { cells_per_layer } => {
                if cells_per_layer < min_cells {
                    return Err(Error::Mesh(format!(
                        "uniform mesh needs at least {min_cells} cells per layer, got {cells_per_layer}"
                    )));
                }
                vec![t / cells_per_layer as f64; cells_per_layer]
            }
        };
        per_layer.push(spacings);
    }

    let total_nodes = 1 + per_layer.iter().map(Vec::len).sum::<usize>();
    if total_nodes > cfg.node_budget {
        return Err(Error::Mesh(format!(
            "mesh needs {total_nodes} nodes, budget is {}",
            cfg.node_budget
        )));
    }

    let mut nodes = Vec::with_capacity(total_nodes);
    let mut layer_of_node = Vec::with_capacity(total_nodes);
    let mut layer_of_edge = Vec::with_capacity(total_nodes - 1);
    let mut boundaries = vec![0];
    nodes.push(0.0);
    layer_of_node.push(0);
    let mut start_um = 0.0;
    for (k, (layer, spacings)) in stack.layers.iter().zip(&per_layer).enumerate() {
        let end_um = start_um + layer.thickness_um;
        let mut x = start_um;
        for (j, h) in spacings.iter().enumerate() {
            x += h;
            let pos = if j + 1 == spacings.len() { end_um } else { x };
            nodes.push(pos * UM_TO_CM);
            layer_of_node.push(k);
            layer_of_edge.push(k);
        }
        boundaries.push(nodes.len() - 1);
        start_um = end_um;
    }

    if nodes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Mesh(
            "node positions are not strictly increasing".into(),
        ));
    }
    Ok(Mesh {
        nodes,
        layer_of_node,
        layer_of_edge,
        boundaries,
        policy: cfg.policy,
    })
}
