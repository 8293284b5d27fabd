//! Sparse domination of the Petermichl operator applied to a vector field,
//! and the same decomposition over an adjacent family.

use sparsedom::convex_body::VectorField;
use sparsedom::dyadic::{build_adjacent_family, build_dyadic_system};
use sparsedom::operators::{build_haar_system, kernel_from_haar, EtaSymbol};
use sparsedom::space::{dyadic_metric, DyadicTree};
use sparsedom::sparse_engine::{dominate, to_multi_system_form, Instance};

fn main() -> sparsedom::Result<()> {
    let space = dyadic_metric(&DyadicTree::uniform(2, 6));
    let sys = build_dyadic_system(&space, 0.5, 0)?;
    let haar = build_haar_system(&sys, &space)?;
    let t = kernel_from_haar(&haar, &EtaSymbol::petermichl(&haar, &sys)?, &sys, &space, None)?.operator;
    let f = VectorField::random(2, space.len(), 4);
    let alpha = 3.0 * space.quasi_triangle_constant().powi(2) / sys.delta;

    let inst = Instance::new(&t, &sys, &space, &f, 1.0, alpha)?;
    let dec = dominate(&inst, 1.0, 1.0)?;
    let c = &dec.config;
    println!("c1 = {}, c2 = {}, rho = {:.4e}, psi = {:.4}, phi = {:.4}", c.c1, c.c2, c.rho, c.psi_rho, c.phi_rho);
    println!(
        "{} cubes, kappa = {:.4e}, sparse {}, packing {:.3}, mixed norm {:.3e}, reconstruction {:.2e}, certified {}",
        dec.cubes.len(),
        dec.kappa,
        dec.sparse.is_sparse(),
        dec.max_packing,
        dec.max_mixed_norm,
        dec.reconstruction_error,
        dec.certified()
    );

    let adj = build_adjacent_family(&space, 0.5, 4, 50.0, 1)?;
    let tf = t.apply_vec(&f).values;
    let form = to_multi_system_form(&dec, &adj, &space, &f, &tf)?;
    println!("over {} systems: c = {}, certified {}", form.m, form.c, form.certified());
    Ok(())
}
