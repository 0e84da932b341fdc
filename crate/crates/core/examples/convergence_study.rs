//! A small convergence study on the sphere in both discretizations, written
//! as CSV the same way `efie study` does.

use efie::cli::{run_study, Discretization, StudyConfig};

fn main() -> efie::Result<()> {
    let mut config = StudyConfig::builtin("sphere")?;
    config.discretization = Discretization::Both;
    config.degrees = vec![1, 2];
    config.levels = vec![0, 1, 2];
    let out = std::env::temp_dir().join("efie_sphere_study.csv");
    config.output = Some(out.clone());

    for outcome in run_study(&config)? {
        match outcome {
            Ok(r) => println!(
                "{:<6} p={} level={} dofs {:>4} iterations {:>4} error {:.3e} order {}",
                r.kind.name(),
                r.p,
                r.level,
                r.dofs,
                r.iterations,
                r.max_pw_error,
                r.observed_order.map_or("-".to_string(), |o| format!("{o:.2}"))
            ),
            Err(f) => println!("failed: {f}"),
        }
    }
    println!("rows in {}", out.display());
    Ok(())
}
