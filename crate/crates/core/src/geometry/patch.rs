use nalgebra::{Matrix3x2, Vector3};

use crate::error::{Error, Result};
use crate::splines::{KnotVector, MAX_DEGREE};

/// Below this surface measure a parametrization is treated as degenerate.
pub const DEGENERATE_MEASURE: f64 = 1e-14;

/// Rational tensor-product surface patch on the unit square.
///
/// Control points are stored row-major with the `v` index running fastest,
/// i.e. `c[j1 * k2 + j2]`. They are Euclidean points, not pre-multiplied by
/// their weights.
#[derive(Debug, Clone, PartialEq)]
pub struct NurbsPatch {
    knots_u: KnotVector,
    knots_v: KnotVector,
    control_points: Vec<Vector3<f64>>,
    weights: Vec<f64>,
}

impl NurbsPatch {
    pub fn new(
        knots_u: KnotVector,
        knots_v: KnotVector,
        control_points: Vec<Vector3<f64>>,
        weights: Vec<f64>,
    ) -> Result<Self> {
        let n = knots_u.len() * knots_v.len();
        if control_points.len() != n || weights.len() != n {
            return Err(Error::Argument(format!(
                "control net has {} points and {} weights, expected {} x {} = {n}",
                control_points.len(),
                weights.len(),
                knots_u.len(),
                knots_v.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0)) {
            return Err(Error::Argument(format!("weight {w} is not strictly positive")));
        }
        if knots_u.degree() == 0 || knots_v.degree() == 0 {
            return Err(Error::Argument("patch degrees must be positive".into()));
        }
        Ok(Self {
            knots_u,
            knots_v,
            control_points,
            weights,
        })
    }

    /// Polynomial patch with unit weights.
    pub fn polynomial(
        knots_u: KnotVector,
        knots_v: KnotVector,
        control_points: Vec<Vector3<f64>>,
    ) -> Result<Self> {
        let n = control_points.len();
        Self::new(knots_u, knots_v, control_points, vec![1.0; n])
    }

    /// Bilinear patch through four corners `F(0,0), F(1,0), F(0,1), F(1,1)`.
    pub fn bilinear(corners: [Vector3<f64>; 4]) -> Self {
        let [c00, c10, c01, c11] = corners;
        Self::polynomial(
            KnotVector::bezier(1),
            KnotVector::bezier(1),
            vec![c00, c01, c10, c11],
        )
        .expect("bilinear patch is well formed")
    }

    pub fn degrees(&self) -> (usize, usize) {
        (self.knots_u.degree(), self.knots_v.degree())
    }

    pub fn knots_u(&self) -> &KnotVector {
        &self.knots_u
    }

    pub fn knots_v(&self) -> &KnotVector {
        &self.knots_v
    }

    pub fn control_points(&self) -> &[Vector3<f64>] {
        &self.control_points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `(k1, k2)`, the shape of the control net.
    pub fn shape(&self) -> (usize, usize) {
        (self.knots_u.len(), self.knots_v.len())
    }

    pub fn eval(&self, u: f64, v: f64) -> Vector3<f64> {
        let (p1, p2) = self.degrees();
        let k2 = self.knots_v.len();
        let mut bu = [0.0; MAX_DEGREE + 1];
        let mut bv = [0.0; MAX_DEGREE + 1];
        let fu = self.knots_u.nonzero_into(u, &mut bu);
        let fv = self.knots_v.nonzero_into(v, &mut bv);
        let mut num = Vector3::zeros();
        let mut den = 0.0;
        for a in 0..=p1 {
            for b in 0..=p2 {
                let idx = (fu + a) * k2 + fv + b;
                let w = self.weights[idx] * bu[a] * bv[b];
                num += self.control_points[idx] * w;
                den += w;
            }
        }
        num / den
    }

    /// Point and Jacobian, whose columns are the partial derivatives in `u` and `v`.
    pub fn eval_with_jacobian(&self, u: f64, v: f64) -> (Vector3<f64>, Matrix3x2<f64>) {
        let (p1, p2) = self.degrees();
        let k2 = self.knots_v.len();
        let mut bu = [0.0; MAX_DEGREE + 1];
        let mut du = [0.0; MAX_DEGREE + 1];
        let mut bv = [0.0; MAX_DEGREE + 1];
        let mut dv = [0.0; MAX_DEGREE + 1];
        let fu = self.knots_u.nonzero_with_derivatives_into(u, &mut bu, &mut du);
        let fv = self.knots_v.nonzero_with_derivatives_into(v, &mut bv, &mut dv);
        let mut s = Vector3::zeros();
        let mut su = Vector3::zeros();
        let mut sv = Vector3::zeros();
        let (mut w, mut wu, mut wv) = (0.0, 0.0, 0.0);
        for a in 0..=p1 {
            for b in 0..=p2 {
                let idx = (fu + a) * k2 + fv + b;
                let wt = self.weights[idx];
                let c = &self.control_points[idx];
                let n = wt * bu[a] * bv[b];
                let nu = wt * du[a] * bv[b];
                let nv = wt * bu[a] * dv[b];
                s += c * n;
                su += c * nu;
                sv += c * nv;
                w += n;
                wu += nu;
                wv += nv;
            }
        }
        let x = s / w;
        let xu = (su - x * wu) / w;
        let xv = (sv - x * wv) / w;
        (x, Matrix3x2::from_columns(&[xu, xv]))
    }

    pub fn jacobian(&self, u: f64, v: f64) -> Matrix3x2<f64> {
        self.eval_with_jacobian(u, v).1
    }

    /// Norm of the cross product of the two partial derivatives.
    pub fn surface_measure(&self, u: f64, v: f64) -> Result<f64> {
        let j = self.jacobian(u, v);
        let measure = j.column(0).cross(&j.column(1)).norm();
        if measure <= DEGENERATE_MEASURE {
            return Err(Error::Degenerate { u, v, measure });
        }
        Ok(measure)
    }

    pub fn unit_normal(&self, u: f64, v: f64) -> Result<Vector3<f64>> {
        let j = self.jacobian(u, v);
        let n = j.column(0).cross(&j.column(1));
        let measure = n.norm();
        if measure <= DEGENERATE_MEASURE {
            return Err(Error::Degenerate { u, v, measure });
        }
        Ok(n / measure)
    }

    /// Applies an affine map `x -> m x + t` to the control points.
    pub fn transformed(&self, m: &nalgebra::Matrix3<f64>, t: &Vector3<f64>) -> Self {
        let mut out = self.clone();
        for c in &mut out.control_points {
            *c = m * *c + t;
        }
        out
    }
}
