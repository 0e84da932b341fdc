use nalgebra::{Matrix3, Vector3};

use super::{MultipatchGeometry, NurbsPatch};
use crate::error::{Error, Result};
use crate::splines::KnotVector;

pub const BUILTIN_NAMES: [&str; 3] = ["sphere", "fichera", "square"];

/// Looks up a built-in geometry by name.
pub fn builtin(name: &str) -> Result<MultipatchGeometry> {
    match name {
        "sphere" => Ok(builtin_sphere()),
        "fichera" => Ok(builtin_fichera()),
        "square" => Ok(flat_square()),
        other => Err(Error::Argument(format!(
            "unknown built-in geometry '{other}' (expected one of {BUILTIN_NAMES:?})"
        ))),
    }
}

/// The unit square in the `z = 0` plane, normal `+z`.
pub fn flat_square() -> MultipatchGeometry {
    let patch = NurbsPatch::bilinear([
        Vector3::new(0.0, 0.0, 0.0),
        Vector3::new(1.0, 0.0, 0.0),
        Vector3::new(0.0, 1.0, 0.0),
        Vector3::new(1.0, 1.0, 0.0),
    ]);
    MultipatchGeometry::new(vec![patch]).expect("single patch has no ambiguous edges")
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Product of two tensor Bernstein polynomials of degree (2, 2), as degree (4, 4).
fn bernstein_product(f: &[[f64; 3]; 3], g: &[[f64; 3]; 3]) -> [[f64; 5]; 5] {
    let mut out = [[0.0; 5]; 5];
    for a in 0..3 {
        for b in 0..3 {
            for c in 0..3 {
                for d in 0..3 {
                    let su = binomial(2, a) * binomial(2, c) / binomial(4, a + c);
                    let sv = binomial(2, b) * binomial(2, d) / binomial(4, b + d);
                    out[a + c][b + d] += su * sv * f[a][b] * g[c][d];
                }
            }
        }
    }
    out
}

/// One face of the six-patch sphere, centred on the `+z` axis.
///
/// A rational biquadratic patch maps the square onto the planar region bounded
/// by the stereographic images (from the south pole) of the four great circles
/// that bound the cube face. Composing with the inverse stereographic
/// projection `(x, y) -> (2x, 2y, 1 - x^2 - y^2) / (1 + x^2 + y^2)` gives an
/// exact rational patch of degree (4, 4) on the unit sphere.
fn sphere_face() -> NurbsPatch {
    let s3 = 3f64.sqrt();
    let corner = (s3 - 1.0) / 2.0;
    let mid = 2.0 * s3 - 3.0;
    // cos(15 deg): each boundary arc spans 30 degrees of its circle
    let w = (6f64.sqrt() + 2f64.sqrt()) / 4.0;

    let px = [[-corner, -corner, -corner], [0.0, 0.0, 0.0], [corner, corner, corner]];
    let py = [[-corner, 0.0, corner], [-corner, 0.0, corner], [-corner, 0.0, corner]];
    let mut hx = [[0.0; 3]; 3];
    let mut hy = [[0.0; 3]; 3];
    let mut hw = [[0.0; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            let weight = match (a == 1, b == 1) {
                (true, true) => w * w,
                (true, false) | (false, true) => w,
                (false, false) => 1.0,
            };
            let (x, y) = match (a, b) {
                (1, 0) => (0.0, -mid),
                (1, 2) => (0.0, mid),
                (0, 1) => (-mid, 0.0),
                (2, 1) => (mid, 0.0),
                _ => (px[a][b], py[a][b]),
            };
            hx[a][b] = weight * x;
            hy[a][b] = weight * y;
            hw[a][b] = weight;
        }
    }
    let xw = bernstein_product(&hx, &hw);
    let yw = bernstein_product(&hy, &hw);
    let ww = bernstein_product(&hw, &hw);
    let xx = bernstein_product(&hx, &hx);
    let yy = bernstein_product(&hy, &hy);

    let mut cps = Vec::with_capacity(25);
    let mut weights = Vec::with_capacity(25);
    for a in 0..5 {
        for b in 0..5 {
            let den = ww[a][b] + xx[a][b] + yy[a][b];
            let z = ww[a][b] - xx[a][b] - yy[a][b];
            cps.push(Vector3::new(2.0 * xw[a][b], 2.0 * yw[a][b], z) / den);
            weights.push(den);
        }
    }
    NurbsPatch::new(KnotVector::bezier(4), KnotVector::bezier(4), cps, weights)
        .expect("sphere face is well formed")
}

/// Exact unit sphere from six rational Bézier patches of degree (4, 4) with
/// exterior orientation, one per face of the circumscribed cube.
pub fn builtin_sphere() -> MultipatchGeometry {
    let face = sphere_face();
    let rotations = [
        Matrix3::identity(),
        Matrix3::new(1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, -1.0),
        Matrix3::new(0.0, 0.0, 1.0, 0.0, 1.0, 0.0, -1.0, 0.0, 0.0),
        Matrix3::new(0.0, 0.0, -1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0),
        Matrix3::new(1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, -1.0, 0.0),
        Matrix3::new(1.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 1.0, 0.0),
    ];
    let patches = rotations
        .iter()
        .map(|r| face.transformed(r, &Vector3::zeros()))
        .collect();
    MultipatchGeometry::new(patches).expect("sphere patches glue uniquely")
}

/// Fichera corner: the unit cube `[0, 1]^3` without the octant `[0.5, 1]^3`,
/// tiled by 24 flat squares of side 0.5 with outward normals.
pub fn builtin_fichera() -> MultipatchGeometry {
    let h = 0.5;
    let inside = |c: [i32; 3]| c.iter().all(|&x| (0..2).contains(&x)) && c != [1, 1, 1];
    let mut patches = Vec::new();
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                let cell = [i, j, k];
                if !inside(cell) {
                    continue;
                }
                for axis in 0..3 {
                    for sign in [-1i32, 1] {
                        let mut nb = cell;
                        nb[axis] += sign;
                        if inside(nb) {
                            continue;
                        }
                        // in-plane axes ordered so that e_b x e_c = sign * e_axis
                        let (mut b, mut c) = ((axis + 1) % 3, (axis + 2) % 3);
                        if sign < 0 {
                            std::mem::swap(&mut b, &mut c);
                        }
                        let mut origin = Vector3::new(i as f64, j as f64, k as f64) * h;
                        if sign > 0 {
                            origin[axis] += h;
                        }
                        let eb = Vector3::ith(b, h);
                        let ec = Vector3::ith(c, h);
                        patches.push(NurbsPatch::bilinear([
                            origin,
                            origin + eb,
                            origin + ec,
                            origin + eb + ec,
                        ]));
                    }
                }
            }
        }
    }
    MultipatchGeometry::new(patches).expect("fichera patches glue uniquely")
}
