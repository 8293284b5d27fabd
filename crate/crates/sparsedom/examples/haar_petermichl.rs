//! The Haar system of a binary tree, Parseval, and the Petermichl kernel.

use sparsedom::dyadic::build_dyadic_system;
use sparsedom::operators::{build_haar_system, eta_regularity_check, haar_multiplier, kernel_from_haar, EtaSymbol};
use sparsedom::space::{dyadic_metric, DyadicTree};

fn main() -> sparsedom::Result<()> {
    let space = dyadic_metric(&DyadicTree::uniform(2, 8));
    let sys = build_dyadic_system(&space, 0.5, 0)?;
    let haar = build_haar_system(&sys, &space)?;
    println!("{} points, {} Haar functions", space.len(), haar.len());

    let f: Vec<f64> = (0..space.len()).map(|x| ((x * 37) % 11) as f64 - 5.0).collect();
    let coeffs = haar.coefficients(&f);
    let g = haar.synthesize(&coeffs, haar.mean(&f));
    let err = f.iter().zip(&g).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!("Parseval reconstruction error {err:.2e}");

    let eta = EtaSymbol::petermichl(&haar, &sys)?;
    let (ka, kb, ok) = eta_regularity_check(&eta, &haar, &sys, &space);
    println!("eta: K_a = {ka}, K_b = {kb}, regular {ok}");
    let kernel = kernel_from_haar(&haar, &eta, &sys, &space, None)?;
    println!("sup |N(x,y)| mu(Q(x,y)) = {:.6} at {:?}", kernel.bound, kernel.witness);
    let tf = haar_multiplier(&haar, &eta, &f);
    let direct = kernel.operator.apply(&f);
    let diff = tf.iter().zip(&direct).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!("multiplier vs kernel {diff:.2e}");
    Ok(())
}
