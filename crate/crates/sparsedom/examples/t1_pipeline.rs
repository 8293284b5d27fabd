//! Sparse domination from the Hörmander and testing hypotheses, and a
//! planted operator that violates the testing condition.

use sparsedom::convex_body::VectorField;
use sparsedom::dyadic::build_dyadic_system;
use sparsedom::operators::{build_haar_system, kernel_from_haar, EtaSymbol};
use sparsedom::space::{dyadic_metric, DyadicTree};
use sparsedom::sparse_engine::{t1_sparse, T1Limits};

fn main() -> sparsedom::Result<()> {
    let space = dyadic_metric(&DyadicTree::uniform(2, 6));
    let sys = build_dyadic_system(&space, 0.5, 0)?;
    let haar = build_haar_system(&sys, &space)?;
    let t = kernel_from_haar(&haar, &EtaSymbol::petermichl(&haar, &sys)?, &sys, &space, None)?.operator;
    let f = VectorField::random(2, space.len(), 3);
    let limits = T1Limits::default();

    let out = t1_sparse(&f, &t, &sys, &space, 6.0, 2.0, &limits)?;
    let h = &out.hypotheses;
    println!("H_r,1 = {:.4}, adjoint H_1,1 = {:.4}, testing ratio = {:.4}", h.hormander, h.adjoint_hormander, h.testing.ratio);
    println!("{} cubes, kappa = {:.4e}, certified {}", out.decomposition.cubes.len(), out.decomposition.kappa, out.decomposition.certified());

    let mut planted = t.clone();
    planted.set(0, 0, 1e9);
    match t1_sparse(&f, &planted, &sys, &space, 6.0, 2.0, &limits) {
        Err(e) => println!("planted operator: {e}"),
        Ok(_) => println!("planted operator unexpectedly accepted"),
    }
    Ok(())
}
