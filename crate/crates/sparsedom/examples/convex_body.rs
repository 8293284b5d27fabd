//! A convex-body average, its John ellipsoid and a kernel representation.

use nalgebra::DVector;
use sparsedom::convex_body::{kernel_representation, ConvexBodyAvg, VectorField};
use sparsedom::space::FiniteSpace;

fn main() -> sparsedom::Result<()> {
    let space = FiniteSpace::uniform_line(20);
    let f = VectorField::random(2, space.len(), 5);
    let region: Vec<usize> = (0..space.len()).collect();
    for s in [1.0, 2.0, 3.0] {
        let body = ConvexBodyAvg::new(&f, s, &region, &space)?;
        let john = body.john()?;
        println!("s = {s}: semi-axes {:?}, K inside {:.4} E", john.semi_axes, john.ratio);
        let x = &john.axes[0] * (0.5 * john.semi_axes[0]);
        println!("        gauge of half the first axis {:.4}, axis criterion {}", body.gauge(&x), body.axis_membership_criterion(&x)?);
    }
    let body = ConvexBodyAvg::new(&f, 2.0, &region, &space)?;
    let g: Vec<DVector<f64>> = (0..4).map(|i| DVector::from_vec(vec![0.1 * i as f64, -0.05])).collect();
    let k = kernel_representation(&[0, 1, 2, 3], &g, &body)?;
    let back = k.apply(&f);
    let err = back.iter().zip(&g).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    println!("kernel mixed norm {:.4}, reconstruction error {err:.2e}", k.mixed_norm());
    Ok(())
}
