//! Reducing matrices of a random matrix weight and the two computations of
//! its A_p constant.

use nalgebra::DVector;
use sparsedom::harness::{build_weight, WeightSpec};
use sparsedom::matrix_weight::{ap_report, reducing_matrix, BallNorm, Side};
use sparsedom::space::FiniteSpace;

fn main() -> sparsedom::Result<()> {
    let space = FiniteSpace::random_planar(24, 1.0, 3);
    let w = build_weight(&WeightSpec::Random { spread: 0.7 }, 3, &space, 11)?;
    let ball = space.ball(0, 0.4);
    for p in [1.5, 2.0, 3.0] {
        let red = reducing_matrix(&w, &ball, p, Side::Primal, &space)?;
        let norm = BallNorm::new(&w, &ball, p, Side::Primal, &space)?;
        let e = DVector::from_vec(vec![1.0, -2.0, 0.5]);
        println!(
            "p = {p}: |We| = {:.5}, rho(e) = {:.5}, probed ratio {:.5} (<= sqrt 3)",
            (&red.matrix * &e).norm(),
            norm.eval(&e),
            red.ratio
        );
        let rep = ap_report(&w, p, &space)?;
        println!("        [W]_Ap = {:.5}, via reducing matrices {:.5}", rep.definition, rep.via_reducing);
    }
    Ok(())
}
