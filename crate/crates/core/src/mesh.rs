//! Dyadic element grid on a multipatch surface with global vertex numbering.

use nalgebra::{Matrix3x2, Vector3};

use crate::geometry::{Edge, MultipatchGeometry, Orientation, DEFAULT_TOPOLOGY_TOL};

/// Corner `k` of the reference square sits at `(k & 1, k >> 1)`.
pub const CORNERS: [(f64, f64); 4] = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)];

/// Corners at the start and end of an edge, in its parameter direction.
pub fn edge_corners(edge: Edge) -> (usize, usize) {
    match edge {
        Edge::U0 => (0, 2),
        Edge::U1 => (1, 3),
        Edge::V0 => (0, 1),
        Edge::V1 => (2, 3),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Element {
    pub patch: usize,
    pub i1: usize,
    pub i2: usize,
    /// Global vertex ids of the four corners, ordered as [`CORNERS`].
    pub vertices: [usize; 4],
}

/// A mesh edge with the elements on either side (one side on open boundaries).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeshEdge {
    pub vertices: (usize, usize),
    pub sides: Vec<(usize, Edge)>,
}

#[derive(Debug, Clone)]
pub struct Mesh<'g> {
    geometry: &'g MultipatchGeometry,
    level: u32,
    n: usize,
    elements: Vec<Element>,
    num_vertices: usize,
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

impl<'g> Mesh<'g> {
    /// Splits every patch into `2^level x 2^level` elements.
    pub fn new(geometry: &'g MultipatchGeometry, level: u32) -> Self {
        let n = 1usize << level;
        let per_patch = (n + 1) * (n + 1);
        let local = |patch: usize, a: usize, b: usize| patch * per_patch + a * (n + 1) + b;
        let on_edge = |edge: Edge, s: usize| match edge {
            Edge::U0 => (0, s),
            Edge::U1 => (n, s),
            Edge::V0 => (s, 0),
            Edge::V1 => (s, n),
        };

        let mut parent: Vec<usize> = (0..geometry.num_patches() * per_patch).collect();
        for i in geometry.interfaces() {
            for s in 0..=n {
                let t = match i.orientation {
                    Orientation::Same => s,
                    Orientation::Reversed => n - s,
                };
                let (a1, b1) = on_edge(i.edge_a, s);
                let (a2, b2) = on_edge(i.edge_b, t);
                let ra = find(&mut parent, local(i.patch_a, a1, b1));
                let rb = find(&mut parent, local(i.patch_b, a2, b2));
                if ra != rb {
                    parent[ra.max(rb)] = ra.min(rb);
                }
            }
        }
        // patches touching only at a corner have no interface to glue them
        let corners: Vec<(usize, Vector3<f64>)> = (0..geometry.num_patches())
            .flat_map(|patch| {
                CORNERS.map(|(a, b)| (local(patch, a as usize * n, b as usize * n), geometry.patch(patch).eval(a, b)))
            })
            .collect();
        for (k, (va, xa)) in corners.iter().enumerate() {
            for (vb, xb) in &corners[k + 1..] {
                if (xa - xb).norm() <= DEFAULT_TOPOLOGY_TOL {
                    let (ra, rb) = (find(&mut parent, *va), find(&mut parent, *vb));
                    if ra != rb {
                        parent[ra.max(rb)] = ra.min(rb);
                    }
                }
            }
        }
        let mut id = vec![usize::MAX; parent.len()];
        let mut num_vertices = 0;
        for v in 0..parent.len() {
            let r = find(&mut parent, v);
            if id[r] == usize::MAX {
                id[r] = num_vertices;
                num_vertices += 1;
            }
            id[v] = id[r];
        }

        let mut elements = Vec::with_capacity(geometry.num_patches() * n * n);
        for patch in 0..geometry.num_patches() {
            for i1 in 0..n {
                for i2 in 0..n {
                    let vertices = CORNERS.map(|(a, b)| {
                        id[local(patch, i1 + a as usize, i2 + b as usize)]
                    });
                    elements.push(Element {
                        patch,
                        i1,
                        i2,
                        vertices,
                    });
                }
            }
        }
        Self {
            geometry,
            level,
            n,
            elements,
            num_vertices,
        }
    }

    pub fn geometry(&self) -> &'g MultipatchGeometry {
        self.geometry
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// Elements per patch and direction.
    pub fn elements_per_direction(&self) -> usize {
        self.n
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn element(&self, e: usize) -> &Element {
        &self.elements[e]
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn element_index(&self, patch: usize, i1: usize, i2: usize) -> usize {
        (patch * self.n + i1) * self.n + i2
    }

    /// Patch parameters of element-local coordinates `(s, t)`.
    pub fn to_patch(&self, e: usize, s: f64, t: f64) -> (f64, f64) {
        let el = &self.elements[e];
        let h = 1.0 / self.n as f64;
        ((el.i1 as f64 + s) * h, (el.i2 as f64 + t) * h)
    }

    /// Point and Jacobian of the element map `s -> F(patch coordinates)`.
    pub fn eval(&self, e: usize, s: f64, t: f64) -> (Vector3<f64>, Matrix3x2<f64>) {
        let (u, v) = self.to_patch(e, s, t);
        let (x, j) = self.geometry.patch(self.elements[e].patch).eval_with_jacobian(u, v);
        (x, j / self.n as f64)
    }

    /// Number of corners two elements have in common, as `(corner in e1, corner in e2)` pairs.
    pub fn shared_corners(&self, e1: usize, e2: usize) -> Vec<(usize, usize)> {
        let (a, b) = (&self.elements[e1].vertices, &self.elements[e2].vertices);
        let mut out = Vec::new();
        for (i, va) in a.iter().enumerate() {
            if let Some(j) = b.iter().position(|vb| vb == va) {
                out.push((i, j));
            }
        }
        out
    }

    /// All mesh edges, in order of first appearance when scanning elements.
    pub fn edges(&self) -> Vec<MeshEdge> {
        let mut index = std::collections::HashMap::new();
        let mut edges: Vec<MeshEdge> = Vec::new();
        for (e, el) in self.elements.iter().enumerate() {
            for edge in Edge::ALL {
                let (c0, c1) = edge_corners(edge);
                let (v0, v1) = (el.vertices[c0], el.vertices[c1]);
                let key = (v0.min(v1), v0.max(v1));
                let k = *index.entry(key).or_insert_with(|| {
                    edges.push(MeshEdge {
                        vertices: (v0, v1),
                        sides: Vec::new(),
                    });
                    edges.len() - 1
                });
                edges[k].sides.push((e, edge));
            }
        }
        edges
    }

    /// Physical centre and a radius enclosing each element, from corner and mid-point samples.
    pub fn bounding_spheres(&self) -> Vec<(Vector3<f64>, f64)> {
        (0..self.num_elements())
            .map(|e| {
                let c = self.eval(e, 0.5, 0.5).0;
                let mut r: f64 = 0.0;
                for i in 0..=4 {
                    for j in 0..=4 {
                        let x = self.eval(e, i as f64 / 4.0, j as f64 / 4.0).0;
                        r = r.max((x - c).norm());
                    }
                }
                (c, r)
            })
            .collect()
    }
}
