//! Element-local polynomial superspace and the divergence-conforming spline
//! and Raviart–Thomas spaces expressed in it through a sparse matrix `T`.
//!
//! Both spaces come out of one construction. A *cell* is a rectangle of
//! elements carrying a tensor B-spline basis of type `(p, p-1) x (p-1, p)`
//! in its own coordinates: a whole patch on the dyadic knot vector for
//! splines, a single element on the Bézier knot vector for Raviart–Thomas.
//! Functions with a normal component on a glued cell edge are paired with
//! their counterpart across the edge, and the pair becomes one degree of
//! freedom.
//!
//! Superspace coefficients store the reference field of a function in the
//! coordinates of the cell it came from. The physical current of element `e`
//! is `dF_e b / xi_e`; since all cells of one space have equal size this only
//! rescales the basis uniformly.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix3x2, Vector3};

use crate::error::{Error, Result};
use crate::geometry::{Edge, Orientation};
use crate::mesh::{edge_corners, Mesh};
use crate::quadrature::gauss_rule;
use crate::sparse::SparseRows;
use crate::splines::{KnotVector, MAX_DEGREE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SpaceKind {
    Spline,
    RaviartThomas,
}

impl SpaceKind {
    pub fn name(self) -> &'static str {
        match self {
            SpaceKind::Spline => "spline",
            SpaceKind::RaviartThomas => "rt",
        }
    }
}

impl fmt::Display for SpaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SpaceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "spline" | "s" => Ok(SpaceKind::Spline),
            "rt" | "raviart-thomas" | "raviart_thomas" => Ok(SpaceKind::RaviartThomas),
            other => Err(Error::Argument(format!("unknown space kind '{other}'"))),
        }
    }
}

/// Reference vector field value and divergence.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LocalValue {
    pub v: [f64; 2],
    pub div: f64,
}

/// Lagrange basis at Gauss–Legendre nodes.
#[derive(Debug, Clone)]
struct Lagrange {
    nodes: Vec<f64>,
}

impl Lagrange {
    fn new(m: usize) -> Result<Self> {
        Ok(Self {
            nodes: gauss_rule(m)?.nodes.iter().map(|x| x[0]).collect(),
        })
    }

    fn eval(&self, x: f64, values: &mut [f64], derivatives: &mut [f64]) {
        let m = self.nodes.len();
        for a in 0..m {
            let xa = self.nodes[a];
            let mut value = 1.0;
            let mut deriv = 0.0;
            for j in (0..m).filter(|&j| j != a) {
                let d = xa - self.nodes[j];
                deriv = (deriv * (x - self.nodes[j]) + value) / d;
                value *= (x - self.nodes[j]) / d;
            }
            values[a] = value;
            derivatives[a] = deriv;
        }
    }
}

/// Discontinuous vector polynomials of type `(p, p-1) x (p-1, p)` on every
/// element, in an interpolatory tensor basis.
///
/// Local index `a * p + b` is the first component at Gauss node `a` of `p + 1`
/// in `s` and node `b` of `p` in `t`; index `p (p + 1) + a (p + 1) + b` is the
/// second component with the roles of the node sets exchanged.
#[derive(Debug, Clone)]
pub struct Superspace {
    p: usize,
    num_elements: usize,
    long: Lagrange,
    short: Lagrange,
}

impl Superspace {
    pub fn new(p: usize, num_elements: usize) -> Result<Self> {
        if p == 0 || p > MAX_DEGREE {
            return Err(Error::Argument(format!("degree must be in 1..={MAX_DEGREE}, got {p}")));
        }
        Ok(Self {
            p,
            num_elements,
            long: Lagrange::new(p + 1)?,
            short: Lagrange::new(p)?,
        })
    }

    pub fn degree(&self) -> usize {
        self.p
    }

    pub fn num_elements(&self) -> usize {
        self.num_elements
    }

    pub fn local_dim(&self) -> usize {
        2 * self.p * (self.p + 1)
    }

    pub fn dim(&self) -> usize {
        self.num_elements * self.local_dim()
    }

    pub fn global_index(&self, e: usize, k: usize) -> usize {
        e * self.local_dim() + k
    }

    /// Component and interpolation node of local function `k`.
    pub fn node(&self, k: usize) -> (usize, f64, f64) {
        let p = self.p;
        if k < p * (p + 1) {
            (0, self.long.nodes[k / p], self.short.nodes[k % p])
        } else {
            let k = k - p * (p + 1);
            (1, self.short.nodes[k / (p + 1)], self.long.nodes[k % (p + 1)])
        }
    }

    /// All local functions at `(s, t)`.
    pub fn eval(&self, s: f64, t: f64, out: &mut [LocalValue]) {
        let p = self.p;
        let mut ls = [0.0; MAX_DEGREE + 1];
        let mut dls = [0.0; MAX_DEGREE + 1];
        let mut lt = [0.0; MAX_DEGREE + 1];
        let mut dlt = [0.0; MAX_DEGREE + 1];
        let mut ss = [0.0; MAX_DEGREE + 1];
        let mut st = [0.0; MAX_DEGREE + 1];
        let mut scratch = [0.0; MAX_DEGREE + 1];
        self.long.eval(s, &mut ls, &mut dls);
        self.long.eval(t, &mut lt, &mut dlt);
        self.short.eval(s, &mut ss, &mut scratch);
        self.short.eval(t, &mut st, &mut scratch);
        for a in 0..=p {
            for b in 0..p {
                out[a * p + b] = LocalValue {
                    v: [ls[a] * st[b], 0.0],
                    div: dls[a] * st[b],
                };
            }
        }
        let off = p * (p + 1);
        for a in 0..p {
            for b in 0..=p {
                out[off + a * (p + 1) + b] = LocalValue {
                    v: [0.0, ss[a] * lt[b]],
                    div: ss[a] * dlt[b],
                };
            }
        }
    }

    /// Coefficients of the interpolant of `f` on one element. The basis is
    /// interpolatory, so these are point values at the component nodes.
    pub fn interpolate(&self, mut f: impl FnMut(f64, f64) -> [f64; 2]) -> Vec<f64> {
        (0..self.local_dim())
            .map(|k| {
                let (c, s, t) = self.node(k);
                f(s, t)[c]
            })
            .collect()
    }
}

/// Builds the superspace on a mesh.
pub fn build_superspace(mesh: &Mesh, p: usize) -> Result<Superspace> {
    Superspace::new(p, mesh.num_elements())
}

/// A block of `n x n` elements of one patch with its own tensor spline basis.
#[derive(Debug, Clone)]
struct Cell {
    patch: usize,
    i1: usize,
    i2: usize,
    n: usize,
}

/// Cell spline bases shared by all cells of a space.
#[derive(Debug, Clone)]
struct CellBasis {
    long: KnotVector,
    short: KnotVector,
}

impl CellBasis {
    fn shape(&self, component: usize) -> (usize, usize) {
        let (l, s) = (self.long.len(), self.short.len());
        if component == 0 {
            (l, s)
        } else {
            (s, l)
        }
    }

    fn len(&self) -> usize {
        2 * self.long.len() * self.short.len()
    }

    fn function_id(&self, component: usize, j1: usize, j2: usize) -> usize {
        let (_, k2) = self.shape(component);
        component * self.long.len() * self.short.len() + j1 * k2 + j2
    }

    fn function(&self, id: usize) -> (usize, usize, usize) {
        let half = self.long.len() * self.short.len();
        let component = id / half;
        let (_, k2) = self.shape(component);
        let r = id % half;
        (component, r / k2, r % k2)
    }

    fn knots(&self, component: usize) -> (&KnotVector, &KnotVector) {
        if component == 0 {
            (&self.long, &self.short)
        } else {
            (&self.short, &self.long)
        }
    }

    /// One function at cell coordinates, with derivatives in cell coordinates.
    fn eval(&self, id: usize, c1: f64, c2: f64) -> LocalValue {
        let (component, j1, j2) = self.function(id);
        let (k1, k2) = self.knots(component);
        let (b1, d1) = (k1.value(j1, c1).unwrap(), k1.derivative(j1, c1).unwrap());
        let (b2, d2) = (k2.value(j2, c2).unwrap(), k2.derivative(j2, c2).unwrap());
        let mut v = [0.0; 2];
        v[component] = b1 * b2;
        let div = if component == 0 { d1 * b2 } else { b1 * d2 };
        LocalValue { v, div }
    }
}

/// One degree of freedom: a cell function, possibly glued to a partner.
#[derive(Debug, Clone, PartialEq)]
pub struct DofInfo {
    pub cell: usize,
    pub component: usize,
    pub index: (usize, usize),
    /// Partner cell, its tensor index and the gluing sign.
    pub partner: Option<(usize, (usize, usize), f64)>,
}

impl DofInfo {
    pub fn is_interface(&self) -> bool {
        self.partner.is_some()
    }
}

/// A divergence-conforming space given by its rows in the superspace.
#[derive(Debug, Clone)]
pub struct DiscreteSpace {
    kind: SpaceKind,
    p: usize,
    level: u32,
    superspace: Superspace,
    transformation: SparseRows,
    dofs: Vec<DofInfo>,
    cells: Vec<Cell>,
    basis: CellBasis,
    /// For every cell function, its DOF and scale.
    function_dofs: Vec<Vec<(usize, f64)>>,
    element_cell: Vec<usize>,
    mesh_n: usize,
}

struct Glue {
    cell: usize,
    edge: Edge,
    orientation: Orientation,
}

/// Samples used to fix a gluing sign, and extra points to confirm it.
const SIGN_SAMPLES: usize = 21;
const SIGN_CHECKS: usize = 10;

impl DiscreteSpace {
    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn degree(&self) -> usize {
        self.p
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// Number of degrees of freedom `l`.
    pub fn dim(&self) -> usize {
        self.dofs.len()
    }

    pub fn superspace(&self) -> &Superspace {
        &self.superspace
    }

    /// The `l x dim(P)` matrix whose rows are the basis functions in the superspace.
    pub fn transformation(&self) -> &SparseRows {
        &self.transformation
    }

    pub fn dofs(&self) -> &[DofInfo] {
        &self.dofs
    }

    /// Every basis function with support on element `e`, evaluated directly
    /// from its B-spline definition at element coordinates `(s, t)`.
    pub fn eval_on_element(&self, mesh: &Mesh, e: usize, s: f64, t: f64) -> Vec<(usize, LocalValue)> {
        let c = self.element_cell[e];
        let cell = &self.cells[c];
        let el = mesh.element(e);
        let n = cell.n as f64;
        let c1 = ((el.i1 - cell.i1) as f64 + s) / n;
        let c2 = ((el.i2 - cell.i2) as f64 + t) / n;
        let mut out: Vec<(usize, LocalValue)> = Vec::new();
        for component in 0..2 {
            let (k1, k2) = self.basis.knots(component);
            let mut v1 = [0.0; MAX_DEGREE + 1];
            let mut v2 = [0.0; MAX_DEGREE + 1];
            let f1 = k1.nonzero_into(c1, &mut v1);
            let f2 = k2.nonzero_into(c2, &mut v2);
            for a in 0..=k1.degree() {
                for b in 0..=k2.degree() {
                    let id = self.basis.function_id(component, f1 + a, f2 + b);
                    let mut value = self.basis.eval(id, c1, c2);
                    // derivatives in element coordinates
                    value.div /= n;
                    let (dof, scale) = self.function_dofs[c][id];
                    let scaled = LocalValue {
                        v: [value.v[0] * scale, value.v[1] * scale],
                        div: value.div * scale,
                    };
                    match out.iter_mut().find(|(d, _)| *d == dof) {
                        Some((_, acc)) => {
                            acc.v[0] += scaled.v[0];
                            acc.v[1] += scaled.v[1];
                            acc.div += scaled.div;
                        }
                        None => out.push((dof, scaled)),
                    }
                }
            }
        }
        out
    }
}

fn patch_frame(mesh: &Mesh, patch: usize, u: f64, v: f64) -> Matrix3x2<f64> {
    mesh.geometry().patch(patch).jacobian(u, v)
}

/// Physical outward flux density of a reference field across a cell edge.
fn edge_flux(mesh: &Mesh, cell: &Cell, edge: Edge, t: f64, value: &LocalValue) -> f64 {
    let (c1, c2) = edge.point(t);
    let h = 1.0 / mesh.elements_per_direction() as f64;
    let u = (cell.i1 as f64 + c1 * cell.n as f64) * h;
    let v = (cell.i2 as f64 + c2 * cell.n as f64) * h;
    let j = patch_frame(mesh, cell.patch, u, v);
    let (du, dv): (Vector3<f64>, Vector3<f64>) = (j.column(0).into(), j.column(1).into());
    let xi = du.cross(&dv).norm();
    let (across, along) = if edge.normal_component() == 0 { (du, dv) } else { (dv, du) };
    let tau = along.normalize();
    let mut nu = (across - tau * across.dot(&tau)).normalize();
    if !edge.is_upper() {
        nu = -nu;
    }
    let phi = (du * value.v[0] + dv * value.v[1]) / xi;
    phi.dot(&nu)
}

fn glue_sign(
    mesh: &Mesh,
    cells: &[Cell],
    basis: &CellBasis,
    (ca, ea, ida): (usize, Edge, usize),
    glue: &Glue,
    idb: usize,
) -> Result<f64> {
    let (component, j1, j2) = basis.function(ida);
    let (k1, k2) = basis.knots(component);
    // support of the tangential factor along the edge
    let (kt, j) = if component == 0 { (k2, j2) } else { (k1, j1) };
    let lo = kt.knots()[j];
    let hi = kt.knots()[j + kt.degree() + 1];
    let flux = |t: f64| {
        let (a1, a2) = ea.point(t);
        let fa = edge_flux(mesh, &cells[ca], ea, t, &basis.eval(ida, a1, a2));
        let tb = glue.orientation.apply(t);
        let (b1, b2) = glue.edge.point(tb);
        let fb = edge_flux(mesh, &cells[glue.cell], glue.edge, tb, &basis.eval(idb, b1, b2));
        (fa, fb)
    };
    let at = |i: usize, n: usize, shift: f64| lo + (hi - lo) * (i as f64 + shift) / n as f64;
    let (fa, fb) = (0..SIGN_SAMPLES)
        .map(|i| flux(at(i, SIGN_SAMPLES, 0.5)))
        .max_by(|x, y| x.0.abs().total_cmp(&y.0.abs()))
        .unwrap();
    if fb == 0.0 || fa == 0.0 {
        return Err(Error::Conformity(format!(
            "cell {ca} edge {ea:?}: vanishing normal trace on the glued edge"
        )));
    }
    let dir = -fa / fb;
    if (dir.abs() - 1.0).abs() > 1e-8 {
        return Err(Error::Conformity(format!(
            "cell {ca} edge {ea:?}: normal traces differ in magnitude (ratio {dir})"
        )));
    }
    let dir = dir.signum();
    for i in 0..SIGN_CHECKS {
        let (a, b) = flux(at(i, SIGN_CHECKS, 0.37));
        if (a + dir * b).abs() > 1e-10 * fa.abs().max(1.0) {
            return Err(Error::Conformity(format!(
                "cell {ca} edge {ea:?}: normal traces disagree by {:e}",
                (a + dir * b).abs()
            )));
        }
    }
    Ok(dir)
}

/// Superspace columns of every function of one cell, in increasing order.
fn cell_columns(mesh: &Mesh, superspace: &Superspace, basis: &CellBasis, cell: &Cell) -> Vec<Vec<(usize, f64)>> {
    let mut cols = vec![Vec::new(); basis.len()];
    for di1 in 0..cell.n {
        for di2 in 0..cell.n {
            let e = mesh.element_index(cell.patch, cell.i1 + di1, cell.i2 + di2);
            for k in 0..superspace.local_dim() {
                let (component, s, t) = superspace.node(k);
                let (k1, k2) = basis.knots(component);
                let mut v1 = [0.0; MAX_DEGREE + 1];
                let mut v2 = [0.0; MAX_DEGREE + 1];
                let f1 = k1.nonzero_on_element_into(di1, s, &mut v1);
                let f2 = k2.nonzero_on_element_into(di2, t, &mut v2);
                for a in 0..=k1.degree() {
                    for b in 0..=k2.degree() {
                        let value = v1[a] * v2[b];
                        if value != 0.0 {
                            let id = basis.function_id(component, f1 + a, f2 + b);
                            cols[id].push((superspace.global_index(e, k), value));
                        }
                    }
                }
            }
        }
    }
    cols
}

fn merge_rows(a: &[(usize, f64)], b: &[(usize, f64)], scale: f64) -> Vec<(usize, f64)> {
    let mut out: Vec<(usize, f64)> = a.iter().copied().chain(b.iter().map(|&(c, v)| (c, v * scale))).collect();
    out.sort_by_key(|&(c, _)| c);
    let mut merged: Vec<(usize, f64)> = Vec::with_capacity(out.len());
    for (c, v) in out {
        match merged.last_mut() {
            Some((lc, lv)) if *lc == c => *lv += v,
            _ => merged.push((c, v)),
        }
    }
    merged
}

/// Normal-trace functions of a cell edge: function ids ordered along the edge.
fn edge_functions(basis: &CellBasis, edge: Edge) -> Vec<usize> {
    let component = edge.normal_component();
    let (k1, k2) = basis.shape(component);
    let (kn, kt) = if component == 0 { (k1, k2) } else { (k2, k1) };
    let normal = if edge.is_upper() { kn - 1 } else { 0 };
    (0..kt)
        .map(|j| {
            if component == 0 {
                basis.function_id(0, normal, j)
            } else {
                basis.function_id(1, j, normal)
            }
        })
        .collect()
}

fn build_space(
    kind: SpaceKind,
    mesh: &Mesh,
    p: usize,
    cells: Vec<Cell>,
    basis: CellBasis,
    glues: Vec<(usize, Edge, usize, Edge, Orientation)>,
    element_cell: Vec<usize>,
) -> Result<DiscreteSpace> {
    let superspace = build_superspace(mesh, p)?;
    let mut partner: HashMap<(usize, Edge), Glue> = HashMap::new();
    for &(ca, ea, cb, eb, orientation) in &glues {
        partner.insert((ca, ea), Glue { cell: cb, edge: eb, orientation });
        partner.insert((cb, eb), Glue { cell: ca, edge: ea, orientation });
    }

    // which glued edge, if any, each function's normal trace lives on
    let mut on_edge: Vec<HashMap<usize, (Edge, usize)>> = vec![HashMap::new(); cells.len()];
    for (c, map) in on_edge.iter_mut().enumerate() {
        for edge in Edge::ALL {
            if partner.contains_key(&(c, edge)) {
                for (j, id) in edge_functions(&basis, edge).into_iter().enumerate() {
                    map.insert(id, (edge, j));
                }
            }
        }
    }

    let columns: Vec<Vec<Vec<(usize, f64)>>> = cells
        .iter()
        .map(|cell| cell_columns(mesh, &superspace, &basis, cell))
        .collect();

    let unassigned = (usize::MAX, 0.0);
    let mut function_dofs = vec![vec![unassigned; basis.len()]; cells.len()];
    let mut dofs = Vec::new();
    let mut rows = Vec::new();
    for c in 0..cells.len() {
        for id in 0..basis.len() {
            if function_dofs[c][id].0 != usize::MAX {
                continue;
            }
            let dof = dofs.len();
            let (component, j1, j2) = basis.function(id);
            function_dofs[c][id] = (dof, 1.0);
            let mut info = DofInfo {
                cell: c,
                component,
                index: (j1, j2),
                partner: None,
            };
            let mut row = columns[c][id].clone();
            if let Some(&(edge, j)) = on_edge[c].get(&id) {
                let glue = &partner[&(c, edge)];
                let along = edge_functions(&basis, glue.edge);
                if along.len() != edge_functions(&basis, edge).len() {
                    return Err(Error::Conformity(format!(
                        "cell {c} edge {edge:?} and its partner carry different trace spaces"
                    )));
                }
                let jb = match glue.orientation {
                    Orientation::Same => j,
                    Orientation::Reversed => along.len() - 1 - j,
                };
                let idb = along[jb];
                if function_dofs[glue.cell][idb].0 != usize::MAX {
                    return Err(Error::Topology(format!(
                        "partner of cell {c} function {id} was already assigned"
                    )));
                }
                let dir = glue_sign(mesh, &cells, &basis, (c, edge, id), glue, idb)?;
                function_dofs[glue.cell][idb] = (dof, dir);
                let (_, b1, b2) = basis.function(idb);
                info.partner = Some((glue.cell, (b1, b2), dir));
                row = merge_rows(&row, &columns[glue.cell][idb], dir);
            }
            dofs.push(info);
            rows.push(row);
        }
    }
    // number DOFs patch by patch in tensor order, whatever the cell size
    let key = |d: &DofInfo| {
        let cell = &cells[d.cell];
        (cell.patch, d.component, cell.i1 * p + d.index.0, cell.i2 * p + d.index.1)
    };
    let mut order: Vec<usize> = (0..dofs.len()).collect();
    order.sort_by_key(|&d| key(&dofs[d]));
    let mut renumber = vec![0; order.len()];
    for (new, &old) in order.iter().enumerate() {
        renumber[old] = new;
    }
    for entry in function_dofs.iter_mut().flatten() {
        entry.0 = renumber[entry.0];
    }
    let dofs: Vec<DofInfo> = order.iter().map(|&d| dofs[d].clone()).collect();
    let rows: Vec<Vec<(usize, f64)>> = order.iter().map(|&d| std::mem::take(&mut rows[d])).collect();
    let transformation = SparseRows::new(superspace.dim(), rows)?;
    Ok(DiscreteSpace {
        kind,
        p,
        level: mesh.level(),
        superspace,
        transformation,
        dofs,
        cells,
        basis,
        function_dofs,
        element_cell,
        mesh_n: mesh.elements_per_direction(),
    })
}

/// Divergence-conforming multipatch splines of maximal smoothness.
pub fn build_spline_space(mesh: &Mesh, p: usize) -> Result<DiscreteSpace> {
    check_degree(p)?;
    let n = mesh.elements_per_direction();
    let geometry = mesh.geometry();
    let cells = (0..geometry.num_patches())
        .map(|patch| Cell { patch, i1: 0, i2: 0, n })
        .collect();
    let basis = CellBasis {
        long: KnotVector::uniform(p, n)?,
        short: KnotVector::uniform(p - 1, n)?,
    };
    let glues = geometry
        .interfaces()
        .iter()
        .map(|i| (i.patch_a, i.edge_a, i.patch_b, i.edge_b, i.orientation))
        .collect();
    let element_cell = mesh.elements().iter().map(|e| e.patch).collect();
    build_space(SpaceKind::Spline, mesh, p, cells, basis, glues, element_cell)
}

/// Raviart–Thomas elements: one Bézier cell per element, glued across every mesh edge.
pub fn build_rt_space(mesh: &Mesh, p: usize) -> Result<DiscreteSpace> {
    check_degree(p)?;
    let cells = mesh
        .elements()
        .iter()
        .map(|e| Cell {
            patch: e.patch,
            i1: e.i1,
            i2: e.i2,
            n: 1,
        })
        .collect();
    let basis = CellBasis {
        long: KnotVector::bezier(p),
        short: KnotVector::bezier(p - 1),
    };
    let mut glues = Vec::new();
    for edge in mesh.edges() {
        match edge.sides.as_slice() {
            [_] => {}
            [(ea, sa), (eb, sb)] => {
                let start_a = mesh.element(*ea).vertices[edge_corners(*sa).0];
                let start_b = mesh.element(*eb).vertices[edge_corners(*sb).0];
                let orientation = if start_a == start_b {
                    Orientation::Same
                } else {
                    Orientation::Reversed
                };
                glues.push((*ea, *sa, *eb, *sb, orientation));
            }
            sides => {
                return Err(Error::Topology(format!(
                    "mesh edge {:?} is shared by {} elements",
                    edge.vertices,
                    sides.len()
                )))
            }
        }
    }
    let element_cell = (0..mesh.num_elements()).collect();
    build_space(SpaceKind::RaviartThomas, mesh, p, cells, basis, glues, element_cell)
}

pub fn build_discrete_space(kind: SpaceKind, mesh: &Mesh, p: usize) -> Result<DiscreteSpace> {
    match kind {
        SpaceKind::Spline => build_spline_space(mesh, p),
        SpaceKind::RaviartThomas => build_rt_space(mesh, p),
    }
}

/// The transformation matrix of a space kind on a mesh.
pub fn assemble_transformation(kind: SpaceKind, mesh: &Mesh, p: usize) -> Result<SparseRows> {
    Ok(build_discrete_space(kind, mesh, p)?.transformation)
}

fn check_degree(p: usize) -> Result<()> {
    if p == 0 || p > MAX_DEGREE {
        return Err(Error::Argument(format!("degree must be in 1..={MAX_DEGREE}, got {p}")));
    }
    Ok(())
}

impl DiscreteSpace {
    /// Elements per patch direction of the underlying mesh.
    pub fn mesh_resolution(&self) -> usize {
        self.mesh_n
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{builtin_fichera, builtin_sphere, flat_square, MultipatchGeometry, NurbsPatch};
    use nalgebra::DMatrix;

    #[test]
    fn superspace_dimensions_and_interpolation() {
        let sphere = builtin_sphere();
        assert_eq!(build_superspace(&Mesh::new(&sphere, 0), 1).unwrap().dim(), 24);
        assert_eq!(build_superspace(&Mesh::new(&sphere, 1), 2).unwrap().dim(), 288);
        for p in 1..=4 {
            let ss = Superspace::new(p, 1).unwrap();
            let mut vals = vec![LocalValue::default(); ss.local_dim()];
            for k in 0..ss.local_dim() {
                let (c, s, t) = ss.node(k);
                ss.eval(s, t, &mut vals);
                for (m, v) in vals.iter().enumerate() {
                    let (cm, _, _) = ss.node(m);
                    let expect = if m == k { 1.0 } else { 0.0 };
                    if cm == c {
                        assert!((v.v[c] - expect).abs() < 1e-12);
                    }
                    assert_eq!(v.v[1 - cm], 0.0);
                }
            }
            // interpolating a basis function gives a unit vector
            let coeffs = ss.interpolate(|s, t| {
                ss.eval(s, t, &mut vals);
                vals[1].v
            });
            for (k, c) in coeffs.iter().enumerate() {
                assert!((c - if k == 1 { 1.0 } else { 0.0 }).abs() < 1e-12);
            }
            let ones = ss.interpolate(|_, _| [1.0, 0.0]);
            for (k, c) in ones.iter().enumerate() {
                assert_eq!(*c, if ss.node(k).0 == 0 { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn lagrange_derivatives_match_differences() {
        let l = Lagrange::new(4).unwrap();
        let (mut v, mut d) = ([0.0; 4], [0.0; 4]);
        let (mut vp, mut vm) = ([0.0; 4], [0.0; 4]);
        let h = 1e-6;
        l.eval(0.3, &mut v, &mut d);
        l.eval(0.3 + h, &mut vp, &mut [0.0; 4]);
        l.eval(0.3 - h, &mut vm, &mut [0.0; 4]);
        for a in 0..4 {
            assert!((d[a] - (vp[a] - vm[a]) / (2.0 * h)).abs() < 1e-7);
        }
        assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn dimension_counts() {
        let square = flat_square();
        assert_eq!(build_spline_space(&Mesh::new(&square, 0), 2).unwrap().dim(), 12);
        let sphere = builtin_sphere();
        assert_eq!(build_spline_space(&Mesh::new(&sphere, 1), 2).unwrap().dim(), 108);
        let m3 = Mesh::new(&sphere, 3);
        assert_eq!(m3.num_elements(), 384);
        assert_eq!(build_rt_space(&m3, 1).unwrap().dim(), 768);
        for (g, level) in [(&sphere, 0), (&sphere, 2), (&builtin_fichera(), 1)] {
            let m = Mesh::new(g, level);
            let n = m.elements_per_direction();
            let edges = m.edges().len();
            for p in 1..=3 {
                let s = build_spline_space(&m, p).unwrap();
                let expect = 2 * g.num_patches() * (n + p) * (n + p - 1) - g.interfaces().len() * (n + p - 1);
                assert_eq!(s.dim(), expect);
                let rt = build_rt_space(&m, p).unwrap();
                assert_eq!(rt.dim(), 2 * p * (p + 1) * m.num_elements() - p * edges);
            }
        }
    }

    fn rank(m: &DMatrix<f64>) -> usize {
        let sv = m.clone().svd(false, false).singular_values;
        let tol = sv.max() * 1e-10;
        sv.iter().filter(|&&s| s > tol).count()
    }

    #[test]
    fn transformation_has_full_row_rank() {
        let sphere = builtin_sphere();
        let m = Mesh::new(&sphere, 1);
        for p in 1..=2 {
            for space in [build_spline_space(&m, p).unwrap(), build_rt_space(&m, p).unwrap()] {
                let t = space.transformation().to_dense();
                assert_eq!(rank(&t), space.dim());
                let max_row = (p + 1) * (p + 1) * 2 * (p + 1) * (p + 1) * 2;
                assert!(space.transformation().rows().iter().all(|r| r.len() <= max_row));
            }
        }
    }

    /// Two unit squares side by side, optionally with the second one's
    /// parameter directions reversed.
    fn two_squares(reversed: bool) -> MultipatchGeometry {
        let a = NurbsPatch::bilinear([
            Vector3::new(0.0, 0.0, 0.0),
            Vector3::new(1.0, 0.0, 0.0),
            Vector3::new(0.0, 1.0, 0.0),
            Vector3::new(1.0, 1.0, 0.0),
        ]);
        let b = if reversed {
            // rotated by 180 degrees in parameter space, same normal
            NurbsPatch::bilinear([
                Vector3::new(2.0, 1.0, 0.0),
                Vector3::new(1.0, 1.0, 0.0),
                Vector3::new(2.0, 0.0, 0.0),
                Vector3::new(1.0, 0.0, 0.0),
            ])
        } else {
            NurbsPatch::bilinear([
                Vector3::new(1.0, 0.0, 0.0),
                Vector3::new(2.0, 0.0, 0.0),
                Vector3::new(1.0, 1.0, 0.0),
                Vector3::new(2.0, 1.0, 0.0),
            ])
        };
        MultipatchGeometry::new(vec![a, b]).unwrap()
    }

    /// Physical current of a DOF on element `e` at element coordinates.
    fn current(space: &DiscreteSpace, mesh: &Mesh, dof: usize, e: usize, s: f64, t: f64) -> Vector3<f64> {
        let (_, j) = mesh.eval(e, s, t);
        let xi = j.column(0).cross(&j.column(1)).norm();
        space
            .eval_on_element(mesh, e, s, t)
            .into_iter()
            .filter(|(d, _)| *d == dof)
            .map(|(_, v)| (j.column(0) * v.v[0] + j.column(1) * v.v[1]) / xi)
            .sum()
    }

    #[test]
    fn two_squares_glue_with_matching_normal_trace() {
        for reversed in [false, true] {
            let g = two_squares(reversed);
            let m = Mesh::new(&g, 0);
            let space = build_spline_space(&m, 1).unwrap();
            // 4 + 4 functions, one pair identified
            assert_eq!(space.dim(), 7);
            let glued: Vec<_> = space.dofs().iter().enumerate().filter(|(_, d)| d.is_interface()).collect();
            assert_eq!(glued.len(), 1);
            let (dof, info) = glued[0];
            let dir = info.partner.unwrap().2;
            assert_eq!(dir, if reversed { -1.0 } else { 1.0 });
            let cells: Vec<usize> = space.transformation().row(dof).iter().map(|&(c, _)| c / 4).collect();
            assert!(cells.contains(&0) && cells.contains(&1));
            for i in 0..11 {
                let y = i as f64 / 10.0;
                let left = current(&space, &m, dof, 0, 1.0, y);
                let (s, t) = if reversed { (1.0, 1.0 - y) } else { (0.0, y) };
                let right = current(&space, &m, dof, 1, s, t);
                assert!((left.x - right.x).abs() < 1e-12, "y={y}: {left} vs {right}");
            }
        }
    }

    #[test]
    fn normal_traces_are_continuous_across_interfaces() {
        for g in [builtin_sphere(), builtin_fichera()] {
            let m = Mesh::new(&g, 1);
            for space in [build_spline_space(&m, 2).unwrap(), build_rt_space(&m, 2).unwrap()] {
                let glued: Vec<usize> = (0..space.dim()).filter(|&d| space.dofs()[d].is_interface()).collect();
                for &dof in glued.iter().step_by((glued.len() / 20).max(1)) {
                    check_trace_continuity(&space, &m, dof);
                }
            }
        }
    }

    /// Unit vector tangent to the surface, normal to the edge, pointing out of the element.
    fn outward_conormal(j: &Matrix3x2<f64>, edge: Edge) -> Vector3<f64> {
        let (across, along): (Vector3<f64>, Vector3<f64>) = if edge.normal_component() == 0 {
            (j.column(0).into(), j.column(1).into())
        } else {
            (j.column(1).into(), j.column(0).into())
        };
        let tau = along.normalize();
        let nu = (across - tau * across.dot(&tau)).normalize();
        if edge.is_upper() { nu } else { -nu }
    }

    fn check_trace_continuity(space: &DiscreteSpace, m: &Mesh, dof: usize) {
        // every pair of elements in the support that share an edge
        let support: Vec<usize> = space
            .transformation()
            .row(dof)
            .iter()
            .map(|&(c, _)| c / space.superspace().local_dim())
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect();
        for edge in m.edges() {
            let [(ea, sa), (eb, sb)] = edge.sides[..] else { continue };
            if !support.contains(&ea) && !support.contains(&eb) {
                continue;
            }
            let same = m.element(ea).vertices[edge_corners(sa).0] == m.element(eb).vertices[edge_corners(sb).0];
            for i in 0..5 {
                let t = (i as f64 + 0.5) / 5.0;
                let (s1, t1) = sa.point(t);
                let (s2, t2) = sb.point(if same { t } else { 1.0 - t });
                let (xa, ja) = m.eval(ea, s1, t1);
                let (xb, jb) = m.eval(eb, s2, t2);
                assert!((xa - xb).norm() < 1e-12);
                let fa = current(space, m, dof, ea, s1, t1).dot(&outward_conormal(&ja, sa));
                let fb = current(space, m, dof, eb, s2, t2).dot(&outward_conormal(&jb, sb));
                assert!((fa + fb).abs() < 1e-10, "{} dof {dof}: normal jump {:e}", space.kind(), (fa + fb).abs());
            }
        }
    }

    #[test]
    fn superspace_expansion_reproduces_basis() {
        let sphere = builtin_sphere();
        let m = Mesh::new(&sphere, 1);
        let space = build_spline_space(&m, 3).unwrap();
        let ss = space.superspace();
        let mut vals = vec![LocalValue::default(); ss.local_dim()];
        for dof in (0..space.dim()).step_by(7) {
            let row = space.transformation().row(dof);
            let e = row[0].0 / ss.local_dim();
            for i in 0..25 {
                let (s, t) = (((i * 7) % 25) as f64 / 25.0 + 0.02, (i as f64 + 0.3) / 25.0);
                ss.eval(s, t, &mut vals);
                let mut expanded = LocalValue::default();
                for &(c, v) in row.iter().filter(|(c, _)| c / ss.local_dim() == e) {
                    let b = vals[c % ss.local_dim()];
                    expanded.v[0] += v * b.v[0];
                    expanded.v[1] += v * b.v[1];
                    expanded.div += v * b.div;
                }
                let direct = space
                    .eval_on_element(&m, e, s, t)
                    .into_iter()
                    .find(|(d, _)| *d == dof)
                    .map(|(_, v)| v)
                    .unwrap_or_default();
                assert!((expanded.v[0] - direct.v[0]).abs() < 1e-12);
                assert!((expanded.v[1] - direct.v[1]).abs() < 1e-12);
                assert!((expanded.div - direct.div).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn lowest_order_spaces_coincide() {
        for g in [builtin_sphere(), builtin_fichera()] {
            for level in 0..=1 {
                let m = Mesh::new(&g, level);
                let s = build_spline_space(&m, 1).unwrap();
                let r = build_rt_space(&m, 1).unwrap();
                assert_eq!(s.dim(), r.dim());
                let mut rt_rows: HashMap<Vec<usize>, (usize, &Vec<(usize, f64)>)> = HashMap::new();
                for (i, row) in r.transformation().rows().iter().enumerate() {
                    rt_rows.insert(row.iter().map(|&(c, _)| c).collect(), (i, row));
                }
                for row in s.transformation().rows() {
                    let key: Vec<usize> = row.iter().map(|&(c, _)| c).collect();
                    let (_, other) = rt_rows.get(&key).expect("spline row has an RT counterpart");
                    let sign = other[0].1.signum() * row[0].1.signum();
                    for (a, b) in row.iter().zip(other.iter()) {
                        assert_eq!(a.1, sign * b.1);
                    }
                }
            }
        }
    }

    #[test]
    fn splines_lie_in_raviart_thomas_space() {
        for (g, level) in [(builtin_sphere(), 1), (builtin_fichera(), 0)] {
            let m = Mesh::new(&g, level);
            for p in 1..=3 {
                let spline = build_spline_space(&m, p).unwrap().transformation().to_dense();
                let rt = build_rt_space(&m, p).unwrap().transformation().to_dense();
                let q = rt.transpose().qr().q();
                for i in 0..spline.nrows() {
                    let row = spline.row(i).transpose();
                    let residual = (&row - &q * (q.transpose() * &row)).norm();
                    assert!(residual < 1e-10 * row.norm(), "p={p} row {i}: {residual:e}");
                }
            }
        }
    }

    #[test]
    fn lowest_order_spaces_share_numbering() {
        for g in [builtin_sphere(), builtin_fichera()] {
            let m = Mesh::new(&g, 1);
            let spline = build_spline_space(&m, 1).unwrap();
            let rt = build_rt_space(&m, 1).unwrap();
            assert_eq!(spline.dim(), rt.dim());
            for (a, b) in spline.transformation().rows().iter().zip(rt.transformation().rows()) {
                assert_eq!(a.len(), b.len());
                let sign = a[0].1.signum() * b[0].1.signum();
                for (x, y) in a.iter().zip(b) {
                    assert_eq!(x.0, y.0);
                    assert_eq!(x.1, sign * y.1);
                }
            }
        }
    }

    #[test]
    fn kind_parsing() {
        assert_eq!("spline".parse::<SpaceKind>().unwrap(), SpaceKind::Spline);
        assert_eq!("RT".parse::<SpaceKind>().unwrap(), SpaceKind::RaviartThomas);
        assert!("nedelec".parse::<SpaceKind>().is_err());
        assert_eq!(SpaceKind::RaviartThomas.to_string(), "rt");
    }
}
