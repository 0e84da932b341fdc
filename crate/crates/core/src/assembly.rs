//! Dense Galerkin matrices of the electric field integral equation.
//!
//! Entries pair two reference fields `b_i`, `b_j` on elements `e1`, `e2`:
//!
//! ```text
//! A_ij = -kappa ∫∫ G(x, y) (dF b_j)·(dF b_i) + 1/kappa ∫∫ G(x, y) div b_j div b_i
//! ```
//!
//! with all integrals over element coordinates. The surface measures cancel
//! the `1/xi` of the divergence-conforming pullback, so no `xi` appears.

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, Vector3};
use num_complex::Complex64;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::quadrature::{align_pair, gauss_rule_2d, regularized_rule, PairAlignment, PairCase, QuadratureConfig, QuadratureRule};
use crate::spaces::{DiscreteSpace, LocalValue, Superspace};
use crate::sparse::SparseRows;

const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;

/// Element pairs processed between two sequential scatter phases.
const PAIRS_PER_CHUNK: usize = 1 << 14;

/// `e^{i kappa r} / (4 pi r)` with `r = |x - y|`.
pub fn greens_function(kappa: f64, x: &Vector3<f64>, y: &Vector3<f64>) -> Result<Complex64> {
    let r = (x - y).norm();
    if r == 0.0 {
        return Err(Error::Singularity);
    }
    Ok(Complex64::from_polar(1.0 / (FOUR_PI * r), kappa * r))
}

/// Gradient of [`greens_function`] in `x`.
pub fn greens_gradient(kappa: f64, x: &Vector3<f64>, y: &Vector3<f64>) -> Result<Vector3<Complex64>> {
    let d = x - y;
    let r = d.norm();
    let g = greens_function(kappa, x, y)?;
    let factor = g * Complex64::new(-1.0 / r, kappa) / r;
    Ok(d.map(|c| factor * c))
}

/// Functions with support on one element, evaluated in element coordinates.
pub trait ElementBasis: Sync {
    fn num_functions(&self, e: usize) -> usize;
    fn eval(&self, e: usize, s: f64, t: f64, out: &mut [LocalValue]);
}

impl ElementBasis for Superspace {
    fn num_functions(&self, _e: usize) -> usize {
        self.local_dim()
    }

    fn eval(&self, _e: usize, s: f64, t: f64, out: &mut [LocalValue]) {
        Superspace::eval(self, s, t, out)
    }
}

/// The basis of a discrete space evaluated from its B-spline definition,
/// without going through the superspace.
pub struct DirectBasis<'a, 'g> {
    space: &'a DiscreteSpace,
    mesh: &'a Mesh<'g>,
    dofs: Vec<Vec<usize>>,
}

impl<'a, 'g> DirectBasis<'a, 'g> {
    pub fn new(space: &'a DiscreteSpace, mesh: &'a Mesh<'g>) -> Self {
        let width = space.superspace().local_dim();
        let dofs = space
            .transformation()
            .column_blocks(width)
            .into_iter()
            .map(|b| b.rows)
            .collect();
        Self { space, mesh, dofs }
    }

    /// Global DOFs with support on element `e`, in increasing order.
    pub fn dofs(&self, e: usize) -> &[usize] {
        &self.dofs[e]
    }
}

impl ElementBasis for DirectBasis<'_, '_> {
    fn num_functions(&self, e: usize) -> usize {
        self.dofs[e].len()
    }

    fn eval(&self, e: usize, s: f64, t: f64, out: &mut [LocalValue]) {
        out.fill(LocalValue::default());
        for (dof, value) in self.space.eval_on_element(self.mesh, e, s, t) {
            if let Ok(k) = self.dofs[e].binary_search(&dof) {
                out[k] = value;
            }
        }
    }
}

/// Scaled basis values at the points of a tensor rule on one element.
///
/// For point `a`, component `c` and function `k`, `values[(a * 4 + c) * n + k]`
/// holds `w_a sqrt(kappa) (dF b_k)_c` for `c < 3` and `w_a div b_k / sqrt(kappa)`
/// for `c = 3`, so that an entry is a kernel-weighted sum of products.
struct ElementTable {
    n: usize,
    points: Vec<Vector3<f64>>,
    values: Vec<f64>,
}

fn scaled_values(jac: &nalgebra::Matrix3x2<f64>, vals: &[LocalValue], weight: f64, kappa: f64, out: &mut [f64]) {
    let n = vals.len();
    let sv = weight * kappa.sqrt();
    let sd = weight / kappa.sqrt();
    for (k, v) in vals.iter().enumerate() {
        let phys = jac.column(0) * v.v[0] + jac.column(1) * v.v[1];
        out[k] = sv * phys.x;
        out[n + k] = sv * phys.y;
        out[2 * n + k] = sv * phys.z;
        out[3 * n + k] = sd * v.div;
    }
}

fn element_table<B: ElementBasis + ?Sized>(mesh: &Mesh, basis: &B, e: usize, rule: &QuadratureRule<2>, kappa: f64) -> ElementTable {
    let n = basis.num_functions(e);
    let mut vals = vec![LocalValue::default(); n];
    let mut points = Vec::with_capacity(rule.len());
    let mut values = vec![0.0; rule.len() * 4 * n];
    for (a, (node, &w)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
        let (x, jac) = mesh.eval(e, node[0], node[1]);
        basis.eval(e, node[0], node[1], &mut vals);
        scaled_values(&jac, &vals, w, kappa, &mut values[a * 4 * n..(a + 1) * 4 * n]);
        points.push(x);
    }
    ElementTable { n, points, values }
}

/// Block for a pair without common points, by tensor quadrature on both elements.
fn regular_block(t1: &ElementTable, t2: &ElementTable, kappa: f64) -> DMatrix<Complex64> {
    let (n1, n2) = (t1.n, t2.n);
    let mut bre = vec![0.0; n1 * n2];
    let mut bim = vec![0.0; n1 * n2];
    let mut hre = vec![0.0; 4 * n2];
    let mut him = vec![0.0; 4 * n2];
    for (a, x) in t1.points.iter().enumerate() {
        hre.fill(0.0);
        him.fill(0.0);
        for (b, y) in t2.points.iter().enumerate() {
            let r = (x - y).norm();
            let (sin, cos) = (kappa * r).sin_cos();
            let f = 1.0 / (FOUR_PI * r);
            let (gr, gi) = (cos * f, sin * f);
            let row = &t2.values[b * 4 * n2..(b + 1) * 4 * n2];
            // the vector part enters with a minus sign
            for m in 0..3 * n2 {
                hre[m] -= gr * row[m];
                him[m] -= gi * row[m];
            }
            for m in 3 * n2..4 * n2 {
                hre[m] += gr * row[m];
                him[m] += gi * row[m];
            }
        }
        let xrow = &t1.values[a * 4 * n1..(a + 1) * 4 * n1];
        for c in 0..4 {
            let (hr, hi) = (&hre[c * n2..(c + 1) * n2], &him[c * n2..(c + 1) * n2]);
            for i in 0..n1 {
                let xv = xrow[c * n1 + i];
                if xv == 0.0 {
                    continue;
                }
                let (orow, irow) = (&mut bre[i * n2..(i + 1) * n2], &mut bim[i * n2..(i + 1) * n2]);
                for j in 0..n2 {
                    orow[j] += xv * hr[j];
                    irow[j] += xv * hi[j];
                }
            }
        }
    }
    DMatrix::from_fn(n1, n2, |i, j| Complex64::new(bre[i * n2 + j], bim[i * n2 + j]))
}

/// Block for a pair with common points, by a regularized 4D rule.
fn singular_block<B: ElementBasis + ?Sized>(
    mesh: &Mesh,
    basis: &B,
    (e1, e2): (usize, usize),
    align: &PairAlignment,
    rule: &QuadratureRule<4>,
    kappa: f64,
) -> Result<DMatrix<Complex64>> {
    let (n1, n2) = (basis.num_functions(e1), basis.num_functions(e2));
    let mut v1 = vec![LocalValue::default(); n1];
    let mut v2 = vec![LocalValue::default(); n2];
    let mut x1 = vec![0.0; 4 * n1];
    let mut x2 = vec![0.0; 4 * n2];
    let mut bre = vec![0.0; n1 * n2];
    let mut bim = vec![0.0; n1 * n2];
    for (node, &w) in rule.nodes.iter().zip(&rule.weights) {
        let (s1, t1) = align.test.apply(node[0], node[1]);
        let (s2, t2) = align.trial.apply(node[2], node[3]);
        let (x, j1) = mesh.eval(e1, s1, t1);
        let (y, j2) = mesh.eval(e2, s2, t2);
        let r = (x - y).norm();
        if r == 0.0 {
            return Err(Error::Singularity);
        }
        basis.eval(e1, s1, t1, &mut v1);
        basis.eval(e2, s2, t2, &mut v2);
        scaled_values(&j1, &v1, 1.0, kappa, &mut x1);
        scaled_values(&j2, &v2, 1.0, kappa, &mut x2);
        for m in 0..3 * n2 {
            x2[m] = -x2[m];
        }
        let (sin, cos) = (kappa * r).sin_cos();
        let f = w / (FOUR_PI * r);
        let (gr, gi) = (cos * f, sin * f);
        for i in 0..n1 {
            for j in 0..n2 {
                let s = x1[i] * x2[j] + x1[n1 + i] * x2[n2 + j] + x1[2 * n1 + i] * x2[2 * n2 + j] + x1[3 * n1 + i] * x2[3 * n2 + j];
                bre[i * n2 + j] += gr * s;
                bim[i * n2 + j] += gi * s;
            }
        }
    }
    Ok(DMatrix::from_fn(n1, n2, |i, j| Complex64::new(bre[i * n2 + j], bim[i * n2 + j])))
}

/// Rules and per-element tables shared by all pair computations.
struct PairIntegrator<'m, 'g, B: ?Sized> {
    mesh: &'m Mesh<'g>,
    basis: &'m B,
    kappa: f64,
    far: Vec<ElementTable>,
    near: Vec<ElementTable>,
    spheres: Vec<(Vector3<f64>, f64)>,
    near_ratio: f64,
    singular: [QuadratureRule<4>; 3],
}

impl<'m, 'g, B: ElementBasis + ?Sized> PairIntegrator<'m, 'g, B> {
    fn new(mesh: &'m Mesh<'g>, basis: &'m B, kappa: f64, quad: &QuadratureConfig) -> Result<Self> {
        quad.validate()?;
        if !(kappa > 0.0) {
            return Err(Error::Domain {
                value: kappa,
                domain: "wavenumber must be positive".into(),
            });
        }
        let far_rule = gauss_rule_2d(quad.far)?;
        let near_rule = gauss_rule_2d(quad.near)?;
        let tables = |rule: &QuadratureRule<2>| -> Vec<ElementTable> {
            (0..mesh.num_elements())
                .into_par_iter()
                .map(|e| element_table(mesh, basis, e, rule, kappa))
                .collect()
        };
        Ok(Self {
            mesh,
            basis,
            kappa,
            far: tables(&far_rule),
            near: tables(&near_rule),
            spheres: mesh.bounding_spheres(),
            near_ratio: quad.near_ratio,
            singular: [
                regularized_rule(PairCase::Identical, quad.singular)?,
                regularized_rule(PairCase::CommonEdge, quad.singular)?,
                regularized_rule(PairCase::CommonVertex, quad.singular)?,
            ],
        })
    }

    fn is_near(&self, e1: usize, e2: usize) -> bool {
        let (c1, r1) = self.spheres[e1];
        let (c2, r2) = self.spheres[e2];
        (c1 - c2).norm() - r1 - r2 < self.near_ratio * r1.max(r2)
    }

    fn block(&self, e1: usize, e2: usize) -> Result<DMatrix<Complex64>> {
        let align = align_pair(e1, e2, self.mesh);
        let rule = match align.case {
            PairCase::Far if self.is_near(e1, e2) => return Ok(regular_block(&self.near[e1], &self.near[e2], self.kappa)),
            PairCase::Far => return Ok(regular_block(&self.far[e1], &self.far[e2], self.kappa)),
            PairCase::Identical => &self.singular[0],
            PairCase::CommonEdge => &self.singular[1],
            PairCase::CommonVertex => &self.singular[2],
        };
        let mut b = singular_block(self.mesh, self.basis, (e1, e2), &align, rule, self.kappa)?;
        if e1 == e2 {
            // the identical-case rule is symmetric only up to rounding
            b = (&b + b.transpose()) * Complex64::new(0.5, 0.0);
        }
        Ok(b)
    }
}

/// Computes the block of every element pair `e1 <= e2`, maps it with
/// `prepare` in parallel and hands the results to `consume` in a fixed order.
fn for_each_pair<B, X, P, C>(mesh: &Mesh, basis: &B, kappa: f64, quad: &QuadratureConfig, prepare: P, mut consume: C) -> Result<()>
where
    B: ElementBasis + ?Sized,
    X: Send,
    P: Fn(usize, usize, DMatrix<Complex64>) -> X + Sync,
    C: FnMut(usize, usize, X),
{
    let integrator = PairIntegrator::new(mesh, basis, kappa, quad)?;
    let ne = mesh.num_elements();
    let mut start = 0;
    while start < ne {
        let mut end = start;
        let mut count = 0;
        while end < ne && (count == 0 || count + (ne - end) <= PAIRS_PER_CHUNK) {
            count += ne - end;
            end += 1;
        }
        let pairs: Vec<(usize, usize)> = (start..end).flat_map(|e1| (e1..ne).map(move |e2| (e1, e2))).collect();
        let results: Vec<X> = pairs
            .par_iter()
            .map(|&(e1, e2)| integrator.block(e1, e2).map(|b| prepare(e1, e2, b)))
            .collect::<Result<_>>()?;
        for (&(e1, e2), x) in pairs.iter().zip(results) {
            consume(e1, e2, x);
        }
        start = end;
    }
    Ok(())
}

/// Scatters a block to rows `r1`, columns `r2` and, unless the pair is on
/// the diagonal, its transpose to the mirrored position.
fn scatter(a: &mut DMatrix<Complex64>, r1: &[usize], r2: &[usize], block: &DMatrix<Complex64>, mirror: bool) {
    for (i, &gi) in r1.iter().enumerate() {
        for (j, &gj) in r2.iter().enumerate() {
            let v = block[(i, j)];
            a[(gi, gj)] += v;
            if mirror {
                a[(gj, gi)] += v;
            }
        }
    }
}

/// The superspace matrix `A*`, of size `dim(P) x dim(P)`.
pub fn assemble_matrix(mesh: &Mesh, superspace: &Superspace, kappa: f64, quad: &QuadratureConfig) -> Result<DMatrix<Complex64>> {
    check_superspace(mesh, superspace)?;
    let nl = superspace.local_dim();
    let mut a = DMatrix::zeros(superspace.dim(), superspace.dim());
    let index: Vec<usize> = (0..nl).collect();
    for_each_pair(
        mesh,
        superspace,
        kappa,
        quad,
        |_, _, b| b,
        |e1, e2, b| {
            let r1: Vec<usize> = index.iter().map(|k| e1 * nl + k).collect();
            let r2: Vec<usize> = index.iter().map(|k| e2 * nl + k).collect();
            scatter(&mut a, &r1, &r2, &b, e1 != e2);
        },
    )?;
    Ok(a)
}

/// `T A* T^T` without forming `A*`: each element-pair block is projected onto
/// the rows of `T` touching the two elements and accumulated in place.
pub fn assemble_projected(mesh: &Mesh, space: &DiscreteSpace, kappa: f64, quad: &QuadratureConfig) -> Result<DMatrix<Complex64>> {
    let superspace = space.superspace();
    check_superspace(mesh, superspace)?;
    let blocks: Vec<(Vec<usize>, DMatrix<Complex64>)> = space
        .transformation()
        .column_blocks(superspace.local_dim())
        .into_iter()
        .map(|b| (b.rows, b.values.map(|v| Complex64::new(v, 0.0))))
        .collect();
    let mut a = DMatrix::zeros(space.dim(), space.dim());
    for_each_pair(
        mesh,
        superspace,
        kappa,
        quad,
        |e1, e2, b| &blocks[e1].1 * b * blocks[e2].1.transpose(),
        |e1, e2, c| scatter(&mut a, &blocks[e1].0, &blocks[e2].0, &c, e1 != e2),
    )?;
    Ok(a)
}

/// The Galerkin matrix assembled with the space's own basis functions,
/// evaluated directly on every element. Slow; a reference for the superspace path.
pub fn assemble_direct(mesh: &Mesh, space: &DiscreteSpace, kappa: f64, quad: &QuadratureConfig) -> Result<DMatrix<Complex64>> {
    check_superspace(mesh, space.superspace())?;
    let basis = DirectBasis::new(space, mesh);
    let mut a = DMatrix::zeros(space.dim(), space.dim());
    for_each_pair(
        mesh,
        &basis,
        kappa,
        quad,
        |_, _, b| b,
        |e1, e2, b| scatter(&mut a, basis.dofs(e1), basis.dofs(e2), &b, e1 != e2),
    )?;
    Ok(a)
}

fn check_superspace(mesh: &Mesh, superspace: &Superspace) -> Result<()> {
    if superspace.num_elements() != mesh.num_elements() {
        return Err(Error::Dimension(format!(
            "superspace on {} elements, mesh has {}",
            superspace.num_elements(),
            mesh.num_elements()
        )));
    }
    Ok(())
}

/// `g*_k = -∫ (n × g(x)) · dF b_k` over every element, with `n` the unit normal.
pub fn assemble_excitation<F>(mesh: &Mesh, superspace: &Superspace, g: F, q: usize) -> Result<Vec<Complex64>>
where
    F: Fn(&Vector3<f64>) -> Vector3<Complex64> + Sync,
{
    excitation(mesh, superspace, q, |x, n| -n.map(|c| Complex64::new(c, 0.0)).cross(&g(x)))
}

/// Right-hand side for an incident field `e`: [`assemble_excitation`] with
/// `g = n × e`, which reduces to `∫ e · dF b_k`.
pub fn assemble_excitation_from_field<F>(mesh: &Mesh, superspace: &Superspace, e: F, q: usize) -> Result<Vec<Complex64>>
where
    F: Fn(&Vector3<f64>) -> Vector3<Complex64> + Sync,
{
    excitation(mesh, superspace, q, |x, n| {
        let nc = n.map(|c| Complex64::new(c, 0.0));
        let g = nc.cross(&e(x));
        -nc.cross(&g)
    })
}

/// `∫ f(x, n) · dF b_k` for every superspace function.
fn excitation<F>(mesh: &Mesh, superspace: &Superspace, q: usize, f: F) -> Result<Vec<Complex64>>
where
    F: Fn(&Vector3<f64>, &Vector3<f64>) -> Vector3<Complex64> + Sync,
{
    check_superspace(mesh, superspace)?;
    let rule = gauss_rule_2d(q)?;
    let nl = superspace.local_dim();
    let per_element: Vec<Vec<Complex64>> = (0..mesh.num_elements())
        .into_par_iter()
        .map(|e| {
            let mut vals = vec![LocalValue::default(); nl];
            let mut out = vec![Complex64::new(0.0, 0.0); nl];
            for (node, &w) in rule.nodes.iter().zip(&rule.weights) {
                let (x, jac) = mesh.eval(e, node[0], node[1]);
                let (du, dv) = (jac.column(0), jac.column(1));
                let n = du.cross(&dv).normalize();
                let fx = f(&x, &n);
                superspace.eval(node[0], node[1], &mut vals);
                for (o, v) in out.iter_mut().zip(&vals) {
                    let phys = du * v.v[0] + dv * v.v[1];
                    *o += (fx[0] * phys.x + fx[1] * phys.y + fx[2] * phys.z) * w;
                }
            }
            out
        })
        .collect();
    Ok(per_element.concat())
}

/// `(T A* T^T, T g*)`.
pub fn transform_system(t: &SparseRows, a_star: &DMatrix<Complex64>, g_star: &[Complex64]) -> Result<(DMatrix<Complex64>, Vec<Complex64>)> {
    let p = t.ncols();
    if a_star.nrows() != p || a_star.ncols() != p || g_star.len() != p {
        return Err(Error::Dimension(format!(
            "T has {p} columns, A* is {}x{}, g* has {}",
            a_star.nrows(),
            a_star.ncols(),
            g_star.len()
        )));
    }
    let l = t.nrows();
    // W = A* T^T, column by column
    let mut w = DMatrix::zeros(p, l);
    for (j, row) in t.rows().iter().enumerate() {
        for &(c, v) in row {
            let src = a_star.column(c);
            let mut dst = w.column_mut(j);
            dst.axpy(Complex64::new(v, 0.0), &src, Complex64::new(1.0, 0.0));
        }
    }
    let mut a = DMatrix::zeros(l, l);
    for (i, row) in t.rows().iter().enumerate() {
        for j in 0..l {
            a[(i, j)] = row.iter().map(|&(c, v)| w[(c, j)] * v).sum();
        }
    }
    Ok((a, t.mul_vec(g_star)?))
}

/// A discretized EFIE.
#[derive(Debug, Clone)]
pub struct EfieSystem {
    pub kappa: f64,
    /// Superspace matrix; only kept by the explicit assembly path.
    pub a_star: Option<DMatrix<Complex64>>,
    pub g_star: Vec<Complex64>,
    pub a: DMatrix<Complex64>,
    pub g: Vec<Complex64>,
}

/// How the transformed matrix is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AssemblyPath {
    /// Assemble `A*` and multiply by `T` afterwards.
    Explicit,
    /// Project every element-pair block immediately.
    #[default]
    Projected,
}

/// Assembles the system for a space and an incident field.
pub fn assemble_system<F>(mesh: &Mesh, space: &DiscreteSpace, kappa: f64, quad: &QuadratureConfig, path: AssemblyPath, incident: F) -> Result<EfieSystem>
where
    F: Fn(&Vector3<f64>) -> Vector3<Complex64> + Sync,
{
    let g_star = assemble_excitation_from_field(mesh, space.superspace(), incident, quad.excitation)?;
    let t = space.transformation();
    match path {
        AssemblyPath::Explicit => {
            let a_star = assemble_matrix(mesh, space.superspace(), kappa, quad)?;
            let (a, g) = transform_system(t, &a_star, &g_star)?;
            Ok(EfieSystem {
                kappa,
                a_star: Some(a_star),
                g_star,
                a,
                g,
            })
        }
        AssemblyPath::Projected => {
            let a = assemble_projected(mesh, space, kappa, quad)?;
            let g = t.mul_vec(&g_star)?;
            Ok(EfieSystem {
                kappa,
                a_star: None,
                g_star,
                a,
                g,
            })
        }
    }
}

/// Largest entry of `A - A^T` relative to the largest entry of `A`.
pub fn symmetry_defect(a: &DMatrix<Complex64>) -> f64 {
    let scale = a.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut defect: f64 = 0.0;
    for j in 0..a.ncols() {
        for i in 0..j {
            defect = defect.max((a[(i, j)] - a[(j, i)]).norm());
        }
    }
    if scale == 0.0 {
        0.0
    } else {
        defect / scale
    }
}

const DUMP_MAGIC: &[u8; 8] = b"EFIESYS1";

/// Writes `A` and `g`: magic, `l` (u64), `kappa` (f64), SHA-256 of `descriptor`,
/// then `A` column-major and `g`, every complex number as two little-endian f64.
pub fn write_system_dump(path: impl AsRef<Path>, system: &EfieSystem, descriptor: &str) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    out.write_all(DUMP_MAGIC)?;
    out.write_all(&(system.g.len() as u64).to_le_bytes())?;
    out.write_all(&system.kappa.to_le_bytes())?;
    out.write_all(&Sha256::digest(descriptor.as_bytes()))?;
    for z in system.a.iter().chain(&system.g) {
        out.write_all(&z.re.to_le_bytes())?;
        out.write_all(&z.im.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

/// Contents of a system dump.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemDump {
    pub kappa: f64,
    pub descriptor_hash: [u8; 32],
    pub a: DMatrix<Complex64>,
    pub g: Vec<Complex64>,
}

pub fn read_system_dump(path: impl AsRef<Path>) -> Result<SystemDump> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    let bad = |m: &str| Error::Parse {
        line: 0,
        message: format!("system dump: {m}"),
    };
    if bytes.len() < 56 || &bytes[..8] != DUMP_MAGIC {
        return Err(bad("missing header"));
    }
    let l = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
    let kappa = f64::from_le_bytes(bytes[16..24].try_into().unwrap());
    let descriptor_hash: [u8; 32] = bytes[24..56].try_into().unwrap();
    let body = &bytes[56..];
    if body.len() != 16 * (l * l + l) {
        return Err(bad(&format!("expected {} bytes of data, found {}", 16 * (l * l + l), body.len())));
    }
    let mut values = body.chunks_exact(16).map(|c| {
        Complex64::new(
            f64::from_le_bytes(c[..8].try_into().unwrap()),
            f64::from_le_bytes(c[8..].try_into().unwrap()),
        )
    });
    let a = DMatrix::from_iterator(l, l, values.by_ref().take(l * l));
    let g = values.collect();
    Ok(SystemDump {
        kappa,
        descriptor_hash,
        a,
        g,
    })
}
