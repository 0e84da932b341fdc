//! The Hertz dipole used as manufactured solution: its field on the
//! evaluation sphere and a finite-difference check of the wave equation.

use efie::field::{dipole_field, evaluation_sphere, verify_maxwell, Dipole};
use nalgebra::Vector3;

fn main() -> efie::Result<()> {
    for kappa in [1.0, 5.0] {
        let d = Dipole::new(Vector3::new(0.1, 0.1, 0.0), Vector3::new(0.0, 0.1, 0.1), kappa)?;
        let points = evaluation_sphere(3.0, 100);
        let largest = points
            .iter()
            .map(|x| dipole_field(&d, x).map(|e| e.norm()))
            .collect::<efie::Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        println!("kappa {kappa}: largest |e| on the radius-3 sphere {largest:.4e}");
        let x = Vector3::new(0.7, -0.4, 0.5);
        for h in [4e-3, 2e-3, 1e-3] {
            println!("  h = {h:.0e}: |curl curl e - kappa^2 e| = {:.3e}", verify_maxwell(&d, &x, h)?);
        }
    }
    Ok(())
}
