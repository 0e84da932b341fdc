//! Hertz dipoles as manufactured solutions and exterior evaluation of a
//! computed surface current.

use std::path::Path;

use nalgebra::Vector3;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::quadrature::gauss_rule_2d;
use crate::spaces::{LocalValue, Superspace};

pub type CVector3 = Vector3<Complex64>;

/// A time-harmonic point dipole at `x0` with moment `p0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dipole {
    pub x0: Vector3<f64>,
    pub p0: Vector3<f64>,
    pub kappa: f64,
}

impl Dipole {
    pub fn new(x0: Vector3<f64>, p0: Vector3<f64>, kappa: f64) -> Result<Self> {
        if !(kappa > 0.0) {
            return Err(Error::Domain {
                value: kappa,
                domain: "wavenumber must be positive".into(),
            });
        }
        Ok(Self { x0, p0, kappa })
    }
}

fn real(v: &Vector3<f64>) -> CVector3 {
    v.map(|c| Complex64::new(c, 0.0))
}

/// Electric field of a dipole, without the conventional `1 / (4 pi)`:
///
/// `e^{i kappa r} (kappa^2 / r (n x p0) x n + (1/r^3 - i kappa / r^2)(3 n (n · p0) - p0))`
pub fn dipole_field(d: &Dipole, x: &Vector3<f64>) -> Result<CVector3> {
    let diff = x - d.x0;
    let r = diff.norm();
    if r == 0.0 {
        return Err(Error::Singularity);
    }
    let n = diff / r;
    let kappa = d.kappa;
    let phase = Complex64::from_polar(1.0, kappa * r);
    let transverse = n.cross(&d.p0).cross(&n) * (kappa * kappa / r);
    let near = n * (3.0 * n.dot(&d.p0)) - d.p0;
    let radial = Complex64::new(1.0 / (r * r * r), -kappa / (r * r));
    Ok((real(&transverse) + real(&near) * radial) * phase)
}

/// `|curl curl e - kappa^2 e|_max` at `x` with central differences of step `h`.
pub fn verify_maxwell(d: &Dipole, x: &Vector3<f64>, h: f64) -> Result<f64> {
    let e = |dx: [f64; 3]| dipole_field(d, &(x + Vector3::from(dx)));
    // second derivatives d_i d_j e
    let mut hess = [[CVector3::zeros(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let shift = |a: f64, b: f64| {
                let mut s = [0.0; 3];
                s[i] += a * h;
                s[j] += b * h;
                s
            };
            hess[i][j] = if i == j {
                (e(shift(1.0, 0.0))? - e([0.0; 3])? * Complex64::new(2.0, 0.0) + e(shift(-1.0, 0.0))?) / Complex64::new(h * h, 0.0)
            } else {
                (e(shift(1.0, 1.0))? - e(shift(1.0, -1.0))? - e(shift(-1.0, 1.0))? + e(shift(-1.0, -1.0))?) / Complex64::new(4.0 * h * h, 0.0)
            };
        }
    }
    // curl curl e = grad div e - laplace e
    let value = e([0.0; 3])?;
    let mut worst: f64 = 0.0;
    for k in 0..3 {
        let grad_div: Complex64 = (0..3).map(|j| hess[k][j][j]).sum();
        let laplace: Complex64 = (0..3).map(|j| hess[j][j][k]).sum();
        let residual = grad_div - laplace - value[k] * d.kappa * d.kappa;
        worst = worst.max(residual.norm());
    }
    Ok(worst)
}

/// Quadrature data of a surface current for evaluating its field off the surface.
pub struct PotentialEvaluator {
    kappa: f64,
    points: Vec<Vector3<f64>>,
    /// `w dF w_hat` at every point.
    currents: Vec<CVector3>,
    /// `w div w_hat` at every point.
    charges: Vec<Complex64>,
    /// Surface samples used to detect points too close to the surface.
    samples: Vec<Vector3<f64>>,
    min_diameter: f64,
}

/// Samples per element direction for the proximity check.
const PROXIMITY_SAMPLES: usize = 9;

impl PotentialEvaluator {
    /// Prepares evaluation of the current with superspace coefficients `w_star`
    /// using `q x q` Gauss points per element.
    pub fn new(mesh: &Mesh, superspace: &Superspace, w_star: &[Complex64], kappa: f64, q: usize) -> Result<Self> {
        if w_star.len() != superspace.dim() || superspace.num_elements() != mesh.num_elements() {
            return Err(Error::Dimension(format!(
                "{} coefficients for a superspace of dimension {} on {} elements",
                w_star.len(),
                superspace.dim(),
                mesh.num_elements()
            )));
        }
        if !(kappa > 0.0) {
            return Err(Error::Domain {
                value: kappa,
                domain: "wavenumber must be positive".into(),
            });
        }
        let rule = gauss_rule_2d(q)?;
        let nl = superspace.local_dim();
        let per_element: Vec<Vec<(Vector3<f64>, CVector3, Complex64)>> = (0..mesh.num_elements())
            .into_par_iter()
            .map(|e| {
                let mut vals = vec![LocalValue::default(); nl];
                let coeffs = &w_star[e * nl..(e + 1) * nl];
                rule.nodes
                    .iter()
                    .zip(&rule.weights)
                    .map(|(node, &w)| {
                        let (x, jac) = mesh.eval(e, node[0], node[1]);
                        superspace.eval(node[0], node[1], &mut vals);
                        let mut v = [Complex64::new(0.0, 0.0); 2];
                        let mut div = Complex64::new(0.0, 0.0);
                        for (c, b) in coeffs.iter().zip(&vals) {
                            v[0] += c * b.v[0];
                            v[1] += c * b.v[1];
                            div += c * b.div;
                        }
                        let current = real(&jac.column(0).into()) * v[0] + real(&jac.column(1).into()) * v[1];
                        (x, current * Complex64::new(w, 0.0), div * w)
                    })
                    .collect()
            })
            .collect();
        let min_diameter = mesh.bounding_spheres().iter().map(|s| 2.0 * s.1).fold(f64::INFINITY, f64::min);
        let step = 1.0 / (PROXIMITY_SAMPLES - 1) as f64;
        let samples = (0..mesh.num_elements())
            .flat_map(|e| {
                (0..PROXIMITY_SAMPLES * PROXIMITY_SAMPLES)
                    .map(move |k| mesh.eval(e, (k / PROXIMITY_SAMPLES) as f64 * step, (k % PROXIMITY_SAMPLES) as f64 * step).0)
            })
            .collect();
        let (mut points, mut currents, mut charges) = (Vec::new(), Vec::new(), Vec::new());
        for (x, c, d) in per_element.into_iter().flatten() {
            points.push(x);
            currents.push(c);
            charges.push(d);
        }
        Ok(Self {
            kappa,
            points,
            currents,
            charges,
            samples,
            min_diameter,
        })
    }

    /// `-kappa ∫ G w - 1/kappa grad_x ∫ G div w` at an exterior point.
    pub fn eval(&self, x: &Vector3<f64>) -> Result<CVector3> {
        let distance = self.samples.iter().map(|y| (x - y).norm()).fold(f64::INFINITY, f64::min);
        let minimum = 0.1 * self.min_diameter;
        if distance < minimum {
            return Err(Error::TooClose { distance, minimum });
        }
        let kappa = self.kappa;
        let mut vector = CVector3::zeros();
        let mut scalar = CVector3::zeros();
        for ((y, current), charge) in self.points.iter().zip(&self.currents).zip(&self.charges) {
            let d = x - y;
            let r = d.norm();
            let g = Complex64::from_polar(1.0 / (4.0 * std::f64::consts::PI * r), kappa * r);
            vector += current * g;
            let grad = g * Complex64::new(-1.0 / r, kappa) / r;
            scalar += real(&d) * (grad * charge);
        }
        Ok(-(vector * Complex64::new(kappa, 0.0) + scalar / Complex64::new(kappa, 0.0)))
    }

    pub fn eval_many(&self, points: &[Vector3<f64>]) -> Result<Vec<CVector3>> {
        points.par_iter().map(|x| self.eval(x)).collect()
    }
}

/// Field of a surface current at one exterior point.
pub fn evaluate_potential(mesh: &Mesh, superspace: &Superspace, w_star: &[Complex64], kappa: f64, x: &Vector3<f64>, q: usize) -> Result<CVector3> {
    PotentialEvaluator::new(mesh, superspace, w_star, kappa, q)?.eval(x)
}

/// Fibonacci lattice of `count` points on the sphere of radius `radius` about the origin.
pub fn evaluation_sphere(radius: f64, count: usize) -> Vec<Vector3<f64>> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / count as f64;
            let rho = (1.0 - z * z).sqrt();
            let phi = golden * i as f64;
            Vector3::new(rho * phi.cos(), rho * phi.sin(), z) * radius
        })
        .collect()
}

/// Largest Euclidean distance between computed and reference field vectors.
pub fn max_pointwise_error(computed: &[CVector3], reference: &[CVector3]) -> Result<f64> {
    if computed.len() != reference.len() {
        return Err(Error::Dimension(format!(
            "{} computed values against {} reference values",
            computed.len(),
            reference.len()
        )));
    }
    Ok(computed.iter().zip(reference).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
}

/// Writes `x,y,z,Re(e1),Im(e1),Re(e2),Im(e2),Re(e3),Im(e3)` rows.
pub fn write_field_csv(path: impl AsRef<Path>, points: &[Vector3<f64>], fields: &[CVector3]) -> Result<()> {
    if points.len() != fields.len() {
        return Err(Error::Dimension(format!("{} points but {} field values", points.len(), fields.len())));
    }
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Io(e.into()))?;
    w.write_record(["x", "y", "z", "Re(e1)", "Im(e1)", "Re(e2)", "Im(e2)", "Re(e3)", "Im(e3)"])
        .map_err(|e| Error::Io(e.into()))?;
    for (x, f) in points.iter().zip(fields) {
        let row = [x.x, x.y, x.z, f.x.re, f.x.im, f.y.re, f.y.im, f.z.re, f.z.im];
        w.write_record(row.iter().map(|v| format!("{v:e}"))).map_err(|e| Error::Io(e.into()))?;
    }
    w.flush()?;
    Ok(())
}
