//! Growth of the Petermichl operator norm along a ladder of power weights.

use sparsedom::dyadic::build_dyadic_system;
use sparsedom::harness::{build_operator, build_weight, verify_a2_scaling, OperatorSpec, WeightSpec};
use sparsedom::space::{dyadic_metric, DyadicTree};

fn main() -> sparsedom::Result<()> {
    let space = dyadic_metric(&DyadicTree::uniform(2, 8));
    let sys = build_dyadic_system(&space, 0.5, 0)?;
    let t = build_operator(&OperatorSpec::Petermichl, &sys, &space, 0)?;
    for dim in [1, 2] {
        let ladder = (0..7)
            .map(|i| {
                let a = 0.5 * i as f64;
                let spec = if dim == 1 { WeightSpec::Power { exponents: vec![a] } } else { WeightSpec::Rotating { exponent: a, turns: 1.0 } };
                Ok((a, build_weight(&spec, dim, &space, 0)?))
            })
            .collect::<sparsedom::Result<Vec<_>>>()?;
        let scaling = verify_a2_scaling(&t, &ladder, &space)?;
        println!("n = {dim}");
        for p in &scaling.points {
            println!("  a = {:.1}: [W]_A2 = {:10.3}, norm = {:8.4}", p.parameter, p.a2, p.norm);
        }
        println!("  slope {:.4} over {:.2} decades", scaling.slope, scaling.decades());
    }
    Ok(())
}
