//! Assembles the EFIE system for the spline space on the sphere and checks
//! it against the slow path that integrates the spline basis directly.

use std::time::Instant;

use efie::assembly::{assemble_direct, assemble_system, symmetry_defect, write_system_dump, AssemblyPath};
use efie::field::{dipole_field, Dipole};
use efie::geometry::builtin_sphere;
use efie::mesh::Mesh;
use efie::quadrature::QuadratureConfig;
use efie::spaces::{build_discrete_space, SpaceKind};
use nalgebra::Vector3;

fn main() -> efie::Result<()> {
    let sphere = builtin_sphere();
    let mesh = Mesh::new(&sphere, 1);
    let p = 2;
    let space = build_discrete_space(SpaceKind::Spline, &mesh, p)?;
    let quad = QuadratureConfig::for_degree(p);
    let dipole = Dipole::new(Vector3::new(0.1, 0.1, 0.0), Vector3::new(0.0, 0.1, 0.1), 1.0)?;

    let start = Instant::now();
    let system = assemble_system(&mesh, &space, 1.0, &quad, AssemblyPath::Explicit, |x| dipole_field(&dipole, x).unwrap())?;
    println!(
        "A* {}x{} -> A {}x{} in {:.2}s",
        system.g_star.len(),
        system.g_star.len(),
        system.a.nrows(),
        system.a.ncols(),
        start.elapsed().as_secs_f64()
    );
    println!("symmetry defect {:.1e}", symmetry_defect(&system.a));

    let start = Instant::now();
    let direct = assemble_direct(&mesh, &space, 1.0, &quad)?;
    let diff = (&direct - &system.a).iter().map(|z| z.norm()).fold(0.0, f64::max);
    println!("direct assembly in {:.2}s, max difference {diff:.1e}", start.elapsed().as_secs_f64());

    let path = std::env::temp_dir().join("efie_sphere_p2_l1.bin");
    write_system_dump(&path, &system, "sphere spline p=2 level=1 kappa=1")?;
    println!("dump written to {}", path.display());
    Ok(())
}
