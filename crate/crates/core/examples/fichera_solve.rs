//! One solve on the Fichera body, with the computed field dumped next to the
//! reference at a few exterior points.

use efie::cli::{solve_cell, StudyConfig};
use efie::field::{dipole_field, CVector3};
use efie::spaces::SpaceKind;

fn show(v: &CVector3) -> String {
    let parts: Vec<String> = v.iter().map(|c| format!("{:+.5}{:+.5}i", c.re, c.im)).collect();
    parts.join("  ")
}

fn main() -> efie::Result<()> {
    let mut config = StudyConfig::builtin("fichera")?;
    config.evaluation = efie::cli::Evaluation::Points {
        points: vec![[2.0, 0.5, 0.5], [0.5, -2.0, 0.5], [-1.5, -1.5, 2.0]],
    };
    let geometry = config.load_geometry()?;
    let out = solve_cell(&config, &geometry, SpaceKind::Spline, 2, 1)?;
    let r = &out.record;
    println!("{} dofs, {} iterations, max error {:.3e}", r.dofs, r.iterations, r.max_pw_error);
    let dipole = config.dipole()?;
    for (x, e) in out.points.iter().zip(&out.fields) {
        let reference = dipole_field(&dipole, x)?;
        println!("x = {:?}\n  computed  {}\n  reference {}", x.as_slice(), show(e), show(&reference));
    }
    Ok(())
}
