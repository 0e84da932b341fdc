//! Built-in multipatch bodies: topology, area, normals, and a round trip
//! through the text geometry format.

use efie::geometry::{builtin_fichera, builtin_sphere, parse_geometry, write_geometry};

fn main() -> efie::Result<()> {
    for (name, g) in [("sphere", builtin_sphere()), ("fichera", builtin_fichera())] {
        println!(
            "{name}: {} patches, {} interfaces, closed {}, area {:.12}",
            g.num_patches(),
            g.interfaces().len(),
            g.is_closed(),
            g.area(20)?
        );
        let patch = g.patch(0);
        let (x, n) = (patch.eval(0.5, 0.5), patch.unit_normal(0.5, 0.5)?);
        println!("  patch 0 centre {x:.4?}, normal {n:.4?}, measure {:.5}", patch.surface_measure(0.5, 0.5)?);
    }

    let sphere = builtin_sphere();
    let text = write_geometry(&sphere);
    let back = parse_geometry(&text)?;
    let same = sphere
        .patches()
        .iter()
        .zip(back.patches())
        .all(|(a, b)| a.control_points() == b.control_points() && a.weights() == b.weights());
    println!("text format: {} lines, bit-exact round trip {same}", text.lines().count());
    Ok(())
}
