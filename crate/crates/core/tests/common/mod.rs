#![allow(dead_code)]

pub mod oracle;

use efie::assembly::{assemble_matrix, symmetry_defect};
use efie::geometry::{MultipatchGeometry, NurbsPatch};
use efie::mesh::Mesh;
use efie::quadrature::QuadratureConfig;
use efie::spaces::{LocalValue, Superspace};
use num_complex::Complex64;
use oracle::{helmholtz_flat_pair, Rect};

pub fn rect_patch(r: &Rect) -> NurbsPatch {
    NurbsPatch::bilinear([r.origin, r.origin + r.a, r.origin + r.b, r.origin + r.a + r.b])
}

/// Two flat elements, compared block by block against the oracle.
pub struct FlatPairCheck {
    /// Largest entry difference over the largest entry, per requested block.
    pub relative_mismatch: Vec<f64>,
    pub symmetry_defect: f64,
}

/// Assembles the two-element matrix with `quad` and compares the requested
/// blocks (`(0, 0)` identical on `x`, `(0, 1)` the pair, `(1, 1)` identical on
/// `y`) with [`helmholtz_flat_pair`].
pub fn flat_pair_check(kappa: f64, p: usize, x: Rect, y: Rect, blocks: &[(usize, usize)], quads: &[QuadratureConfig]) -> Vec<FlatPairCheck> {
    let geometry = MultipatchGeometry::new(vec![rect_patch(&x), rect_patch(&y)]).unwrap();
    let mesh = Mesh::new(&geometry, 0);
    let ss = Superspace::new(p, 2).unwrap();
    let n = ss.local_dim();
    let basis = |s: f64, t: f64| {
        let mut vals = vec![LocalValue::default(); n];
        ss.eval(s, t, &mut vals);
        vals.into_iter().map(|v| (v.v, v.div)).collect::<Vec<_>>()
    };
    let rects = [x, y];
    let references: Vec<_> = blocks
        .iter()
        .map(|&(e1, e2)| helmholtz_flat_pair(kappa, &rects[e1], &rects[e2], &basis, n, 1.0 / 6.0, 1e-12))
        .collect();
    quads
        .iter()
        .map(|quad| {
            let a = assemble_matrix(&mesh, &ss, kappa, quad).unwrap();
            let relative_mismatch = blocks
                .iter()
                .zip(&references)
                .map(|(&(e1, e2), reference)| {
                    let mut worst: f64 = 0.0;
                    let mut scale: f64 = 0.0;
                    for i in 0..n {
                        for j in 0..n {
                            let v: Complex64 = a[(e1 * n + i, e2 * n + j)];
                            worst = worst.max((v - reference[(i, j)]).norm());
                            scale = scale.max(reference[(i, j)].norm());
                        }
                    }
                    worst / scale
                })
                .collect();
            FlatPairCheck {
                relative_mismatch,
                symmetry_defect: symmetry_defect(&a),
            }
        })
        .collect()
}
