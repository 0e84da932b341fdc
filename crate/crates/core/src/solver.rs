//! Restarted GMRES for dense complex systems, without preconditioning.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Loss of orthogonality after one Gram–Schmidt sweep that triggers a second.
const REORTHOGONALIZE_ABOVE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmresOptions {
    /// Relative residual `|b - A x| / |b|` at which to stop.
    pub tol: f64,
    /// Krylov dimension before a restart.
    pub restart: usize,
    /// Cap on inner iterations summed over all cycles.
    pub max_total: usize,
}

impl Default for GmresOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            restart: 1500,
            max_total: 200_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub solution: DVector<Complex64>,
    /// Inner iterations (operator applications inside Arnoldi) over all cycles.
    pub total_iterations: usize,
    pub restarts: usize,
    /// `|b - A x| / |b|`, recomputed from the returned solution.
    pub final_relative_residual: f64,
    /// Estimated relative residual after every inner iteration.
    pub history: Vec<f64>,
}

/// Rotation `[c s; -conj(s) c]` that zeroes `b` below `a`.
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    let (na, nb) = (a.norm(), b.norm());
    if nb == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    if na == 0.0 {
        return (0.0, b.conj() / nb);
    }
    let t = na.hypot(nb);
    (na / t, (a / na) * b.conj() / t)
}

fn rotate(c: f64, s: Complex64, x: Complex64, y: Complex64) -> (Complex64, Complex64) {
    (x * c + s * y, -s.conj() * x + y * c)
}

/// Solves `A x = b` with GMRES(m) from a zero initial guess.
pub fn gmres<F>(mut apply: F, b: &DVector<Complex64>, options: &GmresOptions) -> Result<SolveReport>
where
    F: FnMut(&DVector<Complex64>) -> DVector<Complex64>,
{
    if !(options.tol > 0.0) || options.restart == 0 {
        return Err(Error::Argument(format!(
            "GMRES needs a positive tolerance and restart length, got {} and {}",
            options.tol, options.restart
        )));
    }
    let n = b.len();
    let zero = Complex64::new(0.0, 0.0);
    let bnorm = b.norm();
    let mut x = DVector::from_element(n, zero);
    if bnorm == 0.0 {
        return Ok(SolveReport {
            solution: x,
            total_iterations: 0,
            restarts: 0,
            final_relative_residual: 0.0,
            history: Vec::new(),
        });
    }
    let m = options.restart.min(n.max(1));
    let mut total = 0;
    let mut restarts = 0;
    let mut history = Vec::new();
    let mut r = b.clone();
    let mut rel = 1.0;
    let mut best = (x.clone(), rel);

    loop {
        let beta = r.norm();
        let mut basis: Vec<DVector<Complex64>> = vec![r.unscale(beta)];
        let mut h: Vec<Vec<Complex64>> = Vec::with_capacity(m);
        let mut cs: Vec<(f64, Complex64)> = Vec::with_capacity(m);
        let mut g = vec![Complex64::new(beta, 0.0)];
        let mut converged = false;
        for k in 0..m {
            if total >= options.max_total {
                break;
            }
            total += 1;
            let mut w = apply(&basis[k]);
            let mut col = vec![zero; k + 2];
            let before = w.norm();
            for (j, v) in basis.iter().enumerate() {
                let hj = v.dotc(&w);
                w.axpy(-hj, v, Complex64::new(1.0, 0.0));
                col[j] = hj;
            }
            let after = w.norm();
            let loss = basis.iter().map(|v| v.dotc(&w).norm()).fold(0.0, f64::max) / after.max(f64::MIN_POSITIVE);
            if loss > REORTHOGONALIZE_ABOVE || after < 1e-3 * before {
                for (j, v) in basis.iter().enumerate() {
                    let hj = v.dotc(&w);
                    w.axpy(-hj, v, Complex64::new(1.0, 0.0));
                    col[j] += hj;
                }
            }
            let hnext = w.norm();
            col[k + 1] = Complex64::new(hnext, 0.0);
            for (j, &(c, s)) in cs.iter().enumerate() {
                let (a, bb) = rotate(c, s, col[j], col[j + 1]);
                col[j] = a;
                col[j + 1] = bb;
            }
            let (c, s) = givens(col[k], col[k + 1]);
            let (a, _) = rotate(c, s, col[k], col[k + 1]);
            col[k] = a;
            col[k + 1] = zero;
            let (gk, gnext) = rotate(c, s, g[k], zero);
            g[k] = gk;
            g.push(gnext);
            cs.push((c, s));
            h.push(col);
            rel = gnext.norm() / bnorm;
            history.push(rel);
            if rel < options.tol || hnext == 0.0 {
                converged = true;
                break;
            }
            basis.push(w.unscale(hnext));
        }

        // back substitution on the triangular factor
        let k = h.len();
        let mut y = vec![zero; k];
        for i in (0..k).rev() {
            let mut acc = g[i];
            for j in i + 1..k {
                acc -= h[j][i] * y[j];
            }
            y[i] = acc / h[i][i];
        }
        for (yi, v) in y.iter().zip(&basis) {
            x.axpy(*yi, v, Complex64::new(1.0, 0.0));
        }
        r = b - apply(&x);
        rel = r.norm() / bnorm;
        if rel < best.1 {
            best = (x.clone(), rel);
        }
        if converged && rel < options.tol {
            return Ok(SolveReport {
                solution: x,
                total_iterations: total,
                restarts,
                final_relative_residual: rel,
                history,
            });
        }
        if total >= options.max_total {
            return Err(Error::NonConvergence {
                iterations: total,
                residual: best.1,
                best: best.0.as_slice().to_vec(),
            });
        }
        restarts += 1;
    }
}

/// GMRES for a dense matrix.
pub fn gmres_dense(a: &nalgebra::DMatrix<Complex64>, b: &DVector<Complex64>, options: &GmresOptions) -> Result<SolveReport> {
    if a.nrows() != b.len() || a.ncols() != b.len() {
        return Err(Error::Dimension(format!(
            "{}x{} matrix with right-hand side of length {}",
            a.nrows(),
            a.ncols(),
            b.len()
        )));
    }
    gmres(|v| a * v, b, options)
}
