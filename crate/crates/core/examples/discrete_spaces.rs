//! Spline and Raviart–Thomas spaces on the sphere and their sparse maps into
//! the element-local superspace.

use efie::geometry::builtin_sphere;
use efie::mesh::Mesh;
use efie::spaces::{build_discrete_space, SpaceKind};

fn main() -> efie::Result<()> {
    let sphere = builtin_sphere();
    println!("{:<7} {:>2} {:>5} {:>6} {:>10} {:>8}", "kind", "p", "level", "dofs", "superspace", "nnz(T)");
    for p in 1..=3 {
        for level in 0..=2 {
            let mesh = Mesh::new(&sphere, level);
            for kind in [SpaceKind::Spline, SpaceKind::RaviartThomas] {
                let space = build_discrete_space(kind, &mesh, p)?;
                println!(
                    "{:<7} {:>2} {:>5} {:>6} {:>10} {:>8}",
                    kind.name(),
                    p,
                    level,
                    space.dim(),
                    space.superspace().dim(),
                    space.transformation().nnz()
                );
            }
        }
    }

    // at p = 1 both constructions give the same functions
    let mesh = Mesh::new(&sphere, 1);
    let s = build_discrete_space(SpaceKind::Spline, &mesh, 1)?;
    let rt = build_discrete_space(SpaceKind::RaviartThomas, &mesh, 1)?;
    let interface = s.dofs().iter().filter(|d| d.is_interface()).count();
    println!("p=1 level 1: {} spline and {} RT functions, {interface} of them cross patch interfaces", s.dim(), rt.dim());
    Ok(())
}
