//! Dyadic systems on a random planar space and a tree, an adjacent family
//! and a sparseness certificate.

use sparsedom::dyadic::{build_adjacent_family, build_dyadic_system, carleson_constant, certify_sparse, CubeFamily};
use sparsedom::space::{dyadic_metric, DyadicTree, FiniteSpace};

fn main() -> sparsedom::Result<()> {
    let space = FiniteSpace::random_planar(48, 1.0, 7);
    let (c_mu, d_mu) = space.doubling_constants();
    println!("planar: N = {}, c_d = {:.3}, c_mu = {:.3}, D_mu = {:.3}", space.len(), space.quasi_triangle_constant(), c_mu, d_mu);

    let sys = build_dyadic_system(&space, 0.5, 0)?;
    sys.validate(&space)?;
    println!("system: {} cubes on levels {:?}, c0 = {:.3}, C0 = {:.3}", sys.len(), sys.levels(), sys.c0, sys.big_c0);

    let adj = build_adjacent_family(&space, 0.5, 8, 50.0, 1)?;
    println!("adjacent family: m = {}, gamma = {:.3}", adj.m(), adj.gamma);

    let tree = dyadic_metric(&DyadicTree::random(40, 3, true, 2));
    let tsys = build_dyadic_system(&tree, 0.5, 0)?;
    // the root and every child of the root
    let mut cubes = vec![tsys.root];
    cubes.extend(tsys.cube(tsys.root).children.iter().copied());
    let family = CubeFamily::new(cubes);
    let carleson = carleson_constant(&tsys, &family);
    for eta in [0.25, 0.5, 0.75] {
        println!("eta = {eta}: sparse {} (Carleson constant {carleson:.3})", certify_sparse(&tsys, &tree, &family, eta).is_sparse());
    }
    Ok(())
}
