//! Cubic B-splines on a refined open knot vector: values, derivatives and
//! the partition of unity.

use efie::splines::KnotVector;

fn main() -> efie::Result<()> {
    let kv = KnotVector::uniform(3, 4)?;
    println!("knots {:?}", kv.knots());
    println!("{} functions on {} elements", kv.len(), kv.num_elements());

    for x in [0.0, 0.1, 0.375, 0.8, 1.0] {
        let (first, values) = kv.nonzero(x)?;
        let sum: f64 = values.iter().sum();
        let derivs: Vec<f64> = (first..first + values.len())
            .map(|i| kv.derivative(i, x))
            .collect::<efie::Result<_>>()?;
        println!("x = {x:<5} first {first}  values {values:.4?}  sum {sum:.15}  derivatives {derivs:.3?}");
    }

    let fine = kv.dyadic_refine(2)?;
    println!("two dyadic refinements: {} elements, breakpoints {:?}", fine.num_elements(), fine.breakpoints());
    Ok(())
}
