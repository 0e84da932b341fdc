//! Regularized four-dimensional rules for touching element pairs, applied to
//! `1 / (4 pi |x - y|)` on the unit square, where the identical-pair integral
//! is known in closed form.

use std::f64::consts::PI;

use efie::quadrature::{regularized_rule, PairCase};

fn main() -> efie::Result<()> {
    let exact = (4.0 * (1.0 + 2f64.sqrt()).ln() + 4.0 / 3.0 * (1.0 - 2f64.sqrt())) / (4.0 * PI);
    println!("identical unit squares, exact {exact:.15}");
    for q in 2..=8 {
        let rule = regularized_rule(PairCase::Identical, q)?;
        let v = rule.integrate(|n| 1.0 / (4.0 * PI * ((n[0] - n[2]).powi(2) + (n[1] - n[3]).powi(2)).sqrt()));
        println!("  q = {q}: {:>5} nodes, error {:.2e}", rule.len(), (v - exact).abs());
    }

    // squares sharing the edge y = 0 (trial square mirrored below) and the
    // corner at the origin; the rules put the shared part at the origin
    println!("self-convergence for touching squares:");
    for (case, name) in [(PairCase::CommonEdge, "edge"), (PairCase::CommonVertex, "vertex")] {
        let value = |q| {
            regularized_rule(case, q).map(|r| {
                r.integrate(|n| {
                    let (dx, dy) = match case {
                        PairCase::CommonEdge => (n[0] - n[2], n[1] + n[3]),
                        _ => (n[0] + n[2], n[1] + n[3]),
                    };
                    1.0 / (4.0 * PI * (dx * dx + dy * dy).sqrt())
                })
            })
        };
        let reference = value(16)?;
        for q in [3, 5, 7] {
            println!("  {name:<6} q = {q}: {:.2e}", (value(q)? - reference).abs());
        }
    }
    Ok(())
}
