//! Restarted GMRES on a normal matrix whose eigenvalues circle close to the
//! origin, where a short restart length visibly stalls.

use efie::solver::{gmres, GmresOptions};
use nalgebra::DVector;
use num_complex::Complex64;

fn main() -> efie::Result<()> {
    let n = 400;
    let diag: Vec<Complex64> = (0..n)
        .map(|k| Complex64::new(1.05, 0.0) + Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / n as f64))
        .collect();
    let b = DVector::from_element(n, Complex64::new(1.0, 0.0));
    for restart in [20, 100, 1500] {
        let options = GmresOptions {
            restart,
            ..GmresOptions::default()
        };
        let report = gmres(|v| DVector::from_fn(n, |i, _| diag[i] * v[i]), &b, &options)?;
        println!(
            "restart {restart:>4}: {:>5} iterations, {:>3} restarts, residual {:.2e}",
            report.total_iterations, report.restarts, report.final_relative_residual
        );
    }
    Ok(())
}
