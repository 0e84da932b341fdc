//! Multipatch NURBS surfaces: patch evaluation, interface detection, and the
//! built-in test geometries.

mod builtin;
mod io;
mod patch;

pub use builtin::{builtin, builtin_fichera, builtin_sphere, flat_square, BUILTIN_NAMES};
pub use io::{load_geometry, parse_geometry, save_geometry, write_geometry};
pub use patch::{NurbsPatch, DEGENERATE_MEASURE};

use nalgebra::Vector3;

use crate::error::{Error, Result};

/// Samples per edge used when matching patch boundaries.
pub const EDGE_SAMPLES: usize = 11;

/// Default absolute tolerance for interface detection.
pub const DEFAULT_TOPOLOGY_TOL: f64 = 1e-10;

/// A side of the unit square. Every edge is traversed with its free parameter increasing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Edge {
    /// `u = 0`, parametrized by `v`.
    U0,
    /// `u = 1`, parametrized by `v`.
    U1,
    /// `v = 0`, parametrized by `u`.
    V0,
    /// `v = 1`, parametrized by `u`.
    V1,
}

impl Edge {
    pub const ALL: [Edge; 4] = [Edge::U0, Edge::U1, Edge::V0, Edge::V1];

    /// Reference-square point at edge parameter `t`.
    pub fn point(self, t: f64) -> (f64, f64) {
        match self {
            Edge::U0 => (0.0, t),
            Edge::U1 => (1.0, t),
            Edge::V0 => (t, 0.0),
            Edge::V1 => (t, 1.0),
        }
    }

    /// Vector component normal to this edge (0 for `u`-edges, 1 for `v`-edges).
    pub fn normal_component(self) -> usize {
        match self {
            Edge::U0 | Edge::U1 => 0,
            Edge::V0 | Edge::V1 => 1,
        }
    }

    /// Whether the edge sits at the upper end of its normal coordinate.
    pub fn is_upper(self) -> bool {
        matches!(self, Edge::U1 | Edge::V1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Orientation {
    Same,
    Reversed,
}

impl Orientation {
    pub fn apply(self, t: f64) -> f64 {
        match self {
            Orientation::Same => t,
            Orientation::Reversed => 1.0 - t,
        }
    }
}

/// Two glued patch edges: `F_a(edge_a(t)) = F_b(edge_b(orientation(t)))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Interface {
    pub patch_a: usize,
    pub edge_a: Edge,
    pub patch_b: usize,
    pub edge_b: Edge,
    pub orientation: Orientation,
}

/// A closed or open surface made of glued NURBS patches.
#[derive(Debug, Clone)]
pub struct MultipatchGeometry {
    patches: Vec<NurbsPatch>,
    interfaces: Vec<Interface>,
    boundary: Vec<(usize, Edge)>,
}

impl MultipatchGeometry {
    /// Builds the geometry and detects its interfaces with the default tolerance.
    pub fn new(patches: Vec<NurbsPatch>) -> Result<Self> {
        build_topology(patches, DEFAULT_TOPOLOGY_TOL)
    }

    pub fn patches(&self) -> &[NurbsPatch] {
        &self.patches
    }

    pub fn patch(&self, i: usize) -> &NurbsPatch {
        &self.patches[i]
    }

    pub fn num_patches(&self) -> usize {
        self.patches.len()
    }

    pub fn interfaces(&self) -> &[Interface] {
        &self.interfaces
    }

    /// Patch edges without a partner.
    pub fn boundary_edges(&self) -> &[(usize, Edge)] {
        &self.boundary
    }

    pub fn is_closed(&self) -> bool {
        self.boundary.is_empty()
    }

    /// The edge glued to `(patch, edge)`, if any, with the orientation relating them.
    pub fn partner(&self, patch: usize, edge: Edge) -> Option<(usize, Edge, Orientation)> {
        self.interfaces.iter().find_map(|i| {
            if i.patch_a == patch && i.edge_a == edge {
                Some((i.patch_b, i.edge_b, i.orientation))
            } else if i.patch_b == patch && i.edge_b == edge {
                Some((i.patch_a, i.edge_a, i.orientation))
            } else {
                None
            }
        })
    }

    /// Surface area by tensor Gauss quadrature of the surface measure.
    pub fn area(&self, order: usize) -> Result<f64> {
        let rule = crate::quadrature::gauss_rule(order)?;
        let mut total = 0.0;
        for patch in &self.patches {
            for (&u, &wu) in rule.nodes.iter().zip(&rule.weights) {
                for (&v, &wv) in rule.nodes.iter().zip(&rule.weights) {
                    total += wu * wv * patch.surface_measure(u[0], v[0])?;
                }
            }
        }
        Ok(total)
    }

    /// Largest distance of any sampled patch point from the origin.
    pub fn bounding_radius(&self) -> f64 {
        let mut r: f64 = 0.0;
        for p in &self.patches {
            for i in 0..=8 {
                for j in 0..=8 {
                    r = r.max(p.eval(i as f64 / 8.0, j as f64 / 8.0).norm());
                }
            }
        }
        r
    }
}

fn sample_edge(patch: &NurbsPatch, edge: Edge) -> Vec<Vector3<f64>> {
    (0..EDGE_SAMPLES)
        .map(|s| {
            let t = s as f64 / (EDGE_SAMPLES - 1) as f64;
            let (u, v) = edge.point(t);
            patch.eval(u, v)
        })
        .collect()
}

fn edges_match(a: &[Vector3<f64>], b: &[Vector3<f64>], orientation: Orientation, tol: f64) -> bool {
    let n = a.len();
    (0..n).all(|s| {
        let t = match orientation {
            Orientation::Same => s,
            Orientation::Reversed => n - 1 - s,
        };
        (a[s] - b[t]).norm() <= tol
    })
}

/// Detects glued edges by comparing sampled boundary curves under every
/// edge/orientation pairing. Unmatched edges become open boundary.
pub fn build_topology(patches: Vec<NurbsPatch>, tol: f64) -> Result<MultipatchGeometry> {
    let samples: Vec<[Vec<Vector3<f64>>; 4]> = patches
        .iter()
        .map(|p| Edge::ALL.map(|e| sample_edge(p, e)))
        .collect();

    let mut interfaces = Vec::new();
    let mut boundary = Vec::new();
    for (pa, sa) in samples.iter().enumerate() {
        for (ea_idx, ea) in Edge::ALL.iter().enumerate() {
            let mut found: Vec<(usize, Edge, Orientation)> = Vec::new();
            for (pb, sb) in samples.iter().enumerate() {
                for (eb_idx, eb) in Edge::ALL.iter().enumerate() {
                    if pa == pb && ea_idx == eb_idx {
                        continue;
                    }
                    for o in [Orientation::Same, Orientation::Reversed] {
                        if edges_match(&sa[ea_idx], &sb[eb_idx], o, tol) {
                            found.push((pb, *eb, o));
                        }
                    }
                }
            }
            match found.as_slice() {
                [] => boundary.push((pa, *ea)),
                [(pb, eb, o)] => {
                    if (pa, *ea) < (*pb, *eb) {
                        interfaces.push(Interface {
                            patch_a: pa,
                            edge_a: *ea,
                            patch_b: *pb,
                            edge_b: *eb,
                            orientation: *o,
                        });
                    }
                }
                _ => {
                    return Err(Error::Topology(format!(
                        "edge {ea:?} of patch {pa} matches {} partner edges",
                        found.len()
                    )))
                }
            }
        }
    }
    Ok(MultipatchGeometry {
        patches,
        interfaces,
        boundary,
    })
}
