//! Library quantities against brute-force evaluations written from the
//! definitions.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use sparsedom::dyadic::build_dyadic_system;
use sparsedom::matrix_weight::{a1_constant, ap_constant, MatrixWeight};
use sparsedom::operators::{build_haar_system, kernel_from_haar, maximal, sharp_grand_maximal, EtaSymbol, KernelOperator};
use sparsedom::space::{dyadic_metric, DyadicTree, FiniteSpace};

fn spaces() -> Vec<FiniteSpace> {
    vec![
        FiniteSpace::random_planar(12, 1.0, 1),
        FiniteSpace::random_planar(15, 2.0, 2),
        FiniteSpace::uniform_line(9),
        FiniteSpace::from_line(&[0.0, 0.1, 0.5, 2.0, 2.2, 7.0], vec![1.0, 3.0, 0.5, 2.0, 1.0, 4.0]).unwrap(),
        dyadic_metric(&DyadicTree::random(14, 3, true, 3)),
    ]
}

/// Member lists of every open ball `B(c, r)`, with `r` ranging over the
/// distances from `c` plus one radius past the diameter.
fn all_open_balls(space: &FiniteSpace) -> Vec<Vec<usize>> {
    let n = space.len();
    let mut out = Vec::new();
    for c in 0..n {
        let mut radii: Vec<f64> = (0..n).map(|y| space.dist(c, y)).filter(|&d| d > 0.0).collect();
        radii.push(f64::INFINITY);
        for r in radii {
            out.push((0..n).filter(|&y| space.dist(c, y) < r).collect());
        }
    }
    out
}

fn random_vec(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

#[test]
fn quasi_triangle_constant_by_triples() {
    for space in spaces() {
        let n = space.len();
        let mut c: f64 = 1.0;
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    let s = space.dist(x, z) + space.dist(z, y);
                    if s > 0.0 {
                        c = c.max(space.dist(x, y) / s);
                    }
                }
            }
        }
        assert!((space.quasi_triangle_constant() - c).abs() <= 1e-12 * c);
    }
}

#[test]
fn doubling_constant_by_radius_scan() {
    for space in spaces() {
        let n = space.len();
        let open = |x: usize, r: f64| (0..n).filter(|&y| space.dist(x, y) < r).map(|y| space.mass(y)).sum::<f64>();
        let mut c: f64 = 1.0;
        for x in 0..n {
            // μ(B(x, 2ρ))/μ(B(x, ρ)) only changes where ρ or 2ρ crosses a distance
            let mut cuts: Vec<f64> = (0..n).flat_map(|y| [space.dist(x, y), space.dist(x, y) / 2.0]).filter(|&d| d > 0.0).collect();
            cuts.sort_by(|a, b| a.total_cmp(b));
            cuts.dedup();
            let mut probes = cuts.clone();
            probes.extend(cuts.windows(2).map(|w| 0.5 * (w[0] + w[1])));
            probes.push(cuts.last().unwrap() * 1.5);
            for r in probes {
                c = c.max(open(x, 2.0 * r) / open(x, r));
            }
        }
        let (got, d) = space.doubling_constants();
        assert!((got - c).abs() <= 1e-12 * c, "{got} vs {c}");
        assert!((d - c.log2()).abs() <= 1e-12);
    }
}

#[test]
fn maximal_function_by_ball_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for space in spaces() {
        let balls = all_open_balls(&space);
        for _ in 0..5 {
            let g = random_vec(space.len(), &mut rng);
            let m = maximal(&g, &space);
            for x in 0..space.len() {
                let want = balls
                    .iter()
                    .filter(|b| b.contains(&x))
                    .map(|b| b.iter().map(|&y| g[y].abs() * space.mass(y)).sum::<f64>() / b.iter().map(|&y| space.mass(y)).sum::<f64>())
                    .fold(0.0, f64::max);
                assert!((m[x] - want).abs() <= 1e-12 * want.max(1.0));
            }
        }
    }
}

#[test]
fn scalar_ap_and_a1_by_definition() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for space in spaces() {
        let n = space.len();
        let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..10.0)).collect();
        let weight = MatrixWeight::new(w.iter().map(|&v| DMatrix::from_element(1, 1, v)).collect()).unwrap();
        let avg = |b: &[usize], h: &dyn Fn(usize) -> f64| b.iter().map(|&y| h(y) * space.mass(y)).sum::<f64>() / b.iter().map(|&y| space.mass(y)).sum::<f64>();
        let balls = all_open_balls(&space);
        for p in [1.5, 2.0, 3.0] {
            let want = balls.iter().map(|b| avg(b, &|y| w[y]) * avg(b, &|y| w[y].powf(-1.0 / (p - 1.0))).powf(p - 1.0)).fold(0.0, f64::max);
            let got = ap_constant(&weight, p, &space).unwrap();
            assert!((got - want).abs() <= 1e-10 * want, "p {p}: {got} vs {want}");
        }
        let want = balls.iter().map(|b| avg(b, &|y| w[y]) / b.iter().map(|&y| w[y]).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max);
        let got = a1_constant(&weight, &space).unwrap();
        assert!((got - want).abs() <= 1e-10 * want);
    }
}

#[test]
fn haar_coefficients_are_inner_products() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for tree in [DyadicTree::uniform(2, 4), DyadicTree::random(30, 4, true, 5)] {
        let space = dyadic_metric(&tree);
        let sys = build_dyadic_system(&space, 0.5, 0).unwrap();
        let haar = build_haar_system(&sys, &space).unwrap();
        let n = space.len();
        assert_eq!(haar.len(), n - 1);
        let f = random_vec(n, &mut rng);
        let c = haar.coefficients(&f);
        for (h, ch) in haar.functions.iter().zip(&c) {
            let d = h.dense(n);
            let ip: f64 = (0..n).map(|x| f[x] * d[x] * space.mass(x)).sum();
            assert!((ip - ch).abs() <= 1e-12 * (1.0 + ip.abs()));
        }
        let mean = (0..n).map(|x| f[x] * space.mass(x)).sum::<f64>() / space.total_mass();
        assert!((haar.mean(&f) - mean).abs() <= 1e-12);
    }
}

/// `M^#_{T,α} f(x)` from the definition: every open ball `B(c, r) ∋ x` with
/// `r` between consecutive breakpoints `d(c, y)` and `d(c, y)/α`.
fn sharp_oracle(t: &KernelOperator, alpha: f64, f: &[f64], space: &FiniteSpace) -> Vec<f64> {
    let n = space.len();
    let mut out = vec![0.0f64; n];
    for c in 0..n {
        let mut cuts: Vec<f64> = (0..n).flat_map(|y| [space.dist(c, y), space.dist(c, y) / alpha]).filter(|&d| d > 0.0).collect();
        cuts.sort_by(|a, b| a.total_cmp(b));
        cuts.dedup();
        let mut radii = cuts.clone();
        radii.extend(cuts.windows(2).map(|w| 0.5 * (w[0] + w[1])));
        radii.push(cuts.last().unwrap() * 2.0);
        for r in radii {
            let b: Vec<usize> = (0..n).filter(|&y| space.dist(c, y) < r).collect();
            let tf: Vec<f64> = b.iter().map(|&y| (0..n).filter(|&z| space.dist(c, z) >= alpha * r).map(|z| t.at(y, z) * f[z] * space.mass(z)).sum()).collect();
            let osc = tf.iter().fold(f64::MIN, |a, &v| a.max(v)) - tf.iter().fold(f64::MAX, |a, &v| a.min(v));
            for &x in &b {
                out[x] = out[x].max(osc);
            }
        }
    }
    out
}

#[test]
fn sharp_grand_maximal_by_definition() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let space = FiniteSpace::random_planar(14, 1.0, 6);
    let n = space.len();
    let k: Vec<f64> = (0..n * n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let t = KernelOperator::new(k, &space).unwrap();
    let tree_space = dyadic_metric(&DyadicTree::uniform(2, 4));
    let sys = build_dyadic_system(&tree_space, 0.5, 0).unwrap();
    let haar = build_haar_system(&sys, &tree_space).unwrap();
    let pm = kernel_from_haar(&haar, &EtaSymbol::petermichl(&haar, &sys).unwrap(), &sys, &tree_space, None).unwrap().operator;
    for (t, space) in [(&t, &space), (&pm, &tree_space)] {
        for alpha in [1.0, 1.7, 3.0] {
            let f = random_vec(space.len(), &mut rng);
            let got = sharp_grand_maximal(t, alpha, &f, space);
            let want = sharp_oracle(t, alpha, &f, space);
            for (a, b) in got.iter().zip(&want) {
                assert!((a - b).abs() <= 1e-10 * b.max(1.0), "alpha {alpha}: {a} vs {b}");
            }
        }
    }
}
