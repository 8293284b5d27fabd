//! The acceptance suite: one test per criterion, each printing a single
//! pass/fail line. Tolerances and budgets are pinned below.

use std::io::Write;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use sparsedom::convex_body::VectorField;
use sparsedom::dyadic::{build_dyadic_system, carleson_constant, certify_sparse, CubeFamily, DyadicSystem, SparseCertificate};
use sparsedom::harness::{campaign_scenarios, run_scenarios, verify_a2_scaling, Check, RunFlags, WeightSpec};
use sparsedom::matrix_weight::{a1_constant, ap_constant, ap_via_reducing, reducing_matrix, scalar_slice_ap, MatrixWeight, Side};
use sparsedom::operators::{build_haar_system, kernel_from_haar, maximal_r, sharp_grand_maximal, testing_search_on, EtaSymbol, HaarSystem, KernelOperator};
use sparsedom::space::{dyadic_metric, DyadicTree, FiniteSpace};
use sparsedom::sparse_engine::{check_t1_hypotheses, dominate, Instance, T1Limits};
use sparsedom::{Error, Hypothesis};

const SANDWICH_SLACK: f64 = 1e-4;
/// Rounding allowance on the lower side, an identity at p = 2.
const SANDWICH_ROUNDING: f64 = 1e-9;
const AP_SCALAR_TOL: f64 = 1e-9;
const SLICE_TOL: f64 = 1e-10;
const HAAR_TOL: f64 = 1e-10;
const PARSEVAL_TOL: f64 = 1e-8;
const MIXED_NORM_TOL: f64 = 1e-9;
const RECONSTRUCTION_TOL: f64 = 1e-7;
const DOMINATION_TOL: f64 = 1e-9;
const SHARP_TOL: f64 = 1e-9;
const TESTING_TOL: f64 = 1e-12;
const GOLDEN_TOL: f64 = 0.05;
const A2_SLOPE_MAX: f64 = 1.5 + 0.1;

/// Written to the process stderr directly so the line survives output capture.
fn line(k: usize, ok: bool, elapsed: Duration, detail: String) {
    let verdict = if ok { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "criterion {k:2}: {verdict} ({:.1} s) {detail}", elapsed.as_secs_f64());
}

fn random_spd(n: usize, spread: f64, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| -> f64 { StandardNormal.sample(rng) });
    let q = g.qr().q();
    let d = DMatrix::from_diagonal(&DVector::from_fn(n, |_, _| (spread * rng.sample::<f64, _>(StandardNormal)).exp()));
    let m = &q * d * q.transpose();
    (&m + m.transpose()) * 0.5
}

fn random_weight(n: usize, points: usize, rng: &mut ChaCha8Rng) -> MatrixWeight {
    let spread = rng.gen_range(0.1..1.2);
    MatrixWeight::new((0..points).map(|_| random_spd(n, spread, rng)).collect()).unwrap()
}

/// `M^t` for symmetric positive definite `M`, via its own eigendecomposition.
fn spd_pow(m: &DMatrix<f64>, t: f64) -> DMatrix<f64> {
    let e = m.clone().symmetric_eigen();
    let d = DMatrix::from_diagonal(&e.eigenvalues.map(|v| v.powf(t)));
    &e.eigenvectors * d * e.eigenvectors.transpose()
}

fn tree_space(t: &DyadicTree) -> (FiniteSpace, DyadicSystem) {
    let space = dyadic_metric(t);
    let sys = build_dyadic_system(&space, 0.5, 0).unwrap();
    (space, sys)
}

// ---------------------------------------------------------------- 1

/// Brute-force check of partition, nestedness and the ball sandwich, from
/// the raw distances.
fn dyadic_properties_hold(sys: &DyadicSystem, space: &FiniteSpace) -> Result<(), String> {
    let n = space.len();
    for k in sys.k_min..=sys.k_max {
        let mut count = vec![0usize; n];
        for c in &sys.cubes {
            if c.level <= k && k <= c.last_level {
                for &x in &c.members {
                    count[x] += 1;
                }
            }
        }
        if count.iter().any(|&c| c != 1) {
            return Err(format!("level {k} is not a partition"));
        }
    }
    for c in &sys.cubes {
        if !(c.measure - c.members.iter().map(|&x| space.mass(x)).sum::<f64>()).abs().le(&(1e-12 * c.measure)) {
            return Err(format!("cube {} measure", c.id));
        }
        if !c.members.contains(&c.center) {
            return Err(format!("cube {} center", c.id));
        }
        if let Some(p) = c.parent {
            let parent = &sys.cubes[p];
            if parent.last_level + 1 != c.level || !c.members.iter().all(|x| parent.members.contains(x)) {
                return Err(format!("cube {} not nested", c.id));
            }
        }
        for k in c.level..=c.last_level {
            let side = sys.delta.powi(k);
            for y in 0..n {
                let d = space.dist(c.center, y);
                let member = c.members.contains(&y);
                if d < sys.c0 * side && !member {
                    return Err(format!("cube {} misses inner ball point {y} at level {k}", c.id));
                }
                if member && d >= sys.big_c0 * side {
                    return Err(format!("cube {} exceeds outer ball at level {k}", c.id));
                }
            }
        }
    }
    if !(sys.c0 > 0.0 && sys.c0 <= sys.big_c0 && sys.big_c0.is_finite()) {
        return Err("parameters".into());
    }
    Ok(())
}

#[test]
fn criterion_01_dyadic_validity() {
    let t0 = Instant::now();
    let mut failures = Vec::new();
    let mut checked = 0;
    for seed in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(2..=256);
        let space = match seed % 3 {
            0 => FiniteSpace::random_planar(n, 1.0, seed),
            1 => FiniteSpace::random_planar(n, *[1.5, 2.0].get(rng.gen_range(0..2)).unwrap(), seed),
            _ => {
                let coords: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..100.0)).collect();
                let mut coords = coords;
                coords.sort_by(|a, b| a.total_cmp(b));
                coords.dedup();
                let m = coords.len();
                FiniteSpace::from_line(&coords, (0..m).map(|_| rng.gen_range(0.5..2.0)).collect()).unwrap()
            }
        };
        let delta = [0.5, 0.25, 0.7][seed as usize % 3];
        match build_dyadic_system(&space, delta, seed % 5) {
            Ok(sys) => {
                if let Err(e) = dyadic_properties_hold(&sys, &space) {
                    failures.push(format!("space {seed}: {e}"));
                }
            }
            Err(e) => failures.push(format!("space {seed}: {e}")),
        }
        checked += 1;
    }
    let mut trees: Vec<DyadicTree> = (1..=8).map(|d| DyadicTree::uniform(2, d)).collect();
    trees.extend((1..=5).map(|d| DyadicTree::uniform(3, d)));
    trees.push(DyadicTree::uniform(4, 4));
    trees.extend((0..10).map(|s| DyadicTree::random(16 + 24 * s as usize, 2 + s as usize % 3, s % 2 == 0, s)));
    for (i, t) in trees.iter().enumerate() {
        let (space, sys) = tree_space(t);
        if let Err(e) = dyadic_properties_hold(&sys, &space) {
            failures.push(format!("tree {i}: {e}"));
        }
        checked += 1;
    }
    let el = t0.elapsed();
    let ok = failures.is_empty() && el <= Duration::from_secs(60);
    line(1, ok, el, format!("{checked} systems, failures {failures:?}"));
    assert!(ok);
}

// ---------------------------------------------------------------- 2

fn oracle_carleson(sys: &DyadicSystem, family: &[usize]) -> f64 {
    let mut best: f64 = 0.0;
    for q in &sys.cubes {
        let s: f64 = family.iter().filter(|&&p| sys.cubes[p].members.iter().all(|x| q.members.binary_search(x).is_ok())).map(|&p| sys.cubes[p].measure).sum();
        best = best.max(s / q.measure);
    }
    best
}

fn witnesses_valid(sys: &DyadicSystem, space: &FiniteSpace, family: &[usize], eta: f64, witnesses: &[Vec<(usize, f64)>]) -> bool {
    let mut used = vec![0.0; space.len()];
    for (&q, w) in family.iter().zip(witnesses) {
        let c = &sys.cubes[q];
        let mut got = 0.0;
        for &(x, m) in w {
            if c.members.binary_search(&x).is_err() || m < 0.0 {
                return false;
            }
            used[x] += m;
            got += m;
        }
        if got < eta * c.measure * (1.0 - 1e-9) {
            return false;
        }
    }
    used.iter().enumerate().all(|(x, &u)| u <= space.mass(x) * (1.0 + 1e-9))
}

#[test]
fn criterion_02_sparse_iff_carleson() {
    let t0 = Instant::now();
    let mut mismatches = 0;
    let mut bad_witness = 0;
    let mut sparse_count = 0;
    let mut trials = 0;
    for seed in 0..200u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let space = if seed % 2 == 0 {
            dyadic_metric(&DyadicTree::random(rng.gen_range(2..=512), rng.gen_range(2..=4), true, seed))
        } else {
            FiniteSpace::random_planar(rng.gen_range(2..=160), 1.0, seed)
        };
        let sys = build_dyadic_system(&space, 0.5, 0).unwrap();
        let prob = rng.gen_range(0.02..0.6);
        let mut family: Vec<usize> = (0..sys.len()).filter(|_| rng.gen_bool(prob)).collect();
        if rng.gen_bool(0.2) && !family.is_empty() {
            let extra = family[rng.gen_range(0..family.len())];
            family.push(extra);
        }
        let fam = CubeFamily::new(family.clone());
        let lambda = carleson_constant(&sys, &fam);
        let oracle = oracle_carleson(&sys, &family);
        if (lambda - oracle).abs() > 1e-9 * oracle.max(1.0) {
            mismatches += 1;
        }
        let mut etas = vec![0.1, 0.25, 0.5, 0.75, 0.9, rng.gen_range(0.05..1.0)];
        if lambda > 0.0 {
            etas.push(1.0 / lambda);
        }
        for eta in etas {
            trials += 1;
            let cert = certify_sparse(&sys, &space, &fam, eta);
            let carleson = lambda <= (1.0 / eta) * (1.0 + 1e-9);
            if cert.is_sparse() != carleson {
                mismatches += 1;
            }
            if let SparseCertificate::Sparse { witnesses, .. } = &cert {
                sparse_count += 1;
                if !witnesses_valid(&sys, &space, &family, eta, witnesses) {
                    bad_witness += 1;
                }
            }
        }
    }
    let el = t0.elapsed();
    let ok = mismatches == 0 && bad_witness == 0 && el <= Duration::from_secs(120);
    line(2, ok, el, format!("{trials} decisions ({sparse_count} sparse), mismatches {mismatches}, invalid witnesses {bad_witness}"));
    assert!(ok);
}

// ---------------------------------------------------------------- 3 and 4

struct ReducingCampaign {
    worst_low: f64,
    worst_high: f64,
    ap_ratio_range: (f64, f64),
    ap_violations: usize,
    scalar_error: f64,
    instances: usize,
    balls: usize,
    elapsed: Duration,
}

fn reducing_campaign() -> ReducingCampaign {
    let t0 = Instant::now();
    let mut out = ReducingCampaign { worst_low: 0.0, worst_high: 0.0, ap_ratio_range: (f64::INFINITY, 0.0), ap_violations: 0, scalar_error: 0.0, instances: 0, balls: 0, elapsed: Duration::ZERO };
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(3000 + seed);
        let n = 1 + (seed as usize % 4);
        let p = [1.5, 2.0, 3.0, 4.0][(seed as usize / 4) % 4];
        let points = rng.gen_range(4..=16);
        let space = FiniteSpace::random_planar(points, 1.0, seed);
        let w = random_weight(n, points, &mut rng);
        let dirs: Vec<DVector<f64>> = (0..1000)
            .map(|_| {
                let v = DVector::from_fn(n, |_, _| -> f64 { StandardNormal.sample(&mut rng) });
                &v / v.norm()
            })
            .collect();
        for side in [Side::Primal, Side::Dual] {
            let (t, q) = match side {
                Side::Primal => (1.0 / p, p),
                Side::Dual => (-1.0 / p, p / (p - 1.0)),
            };
            let pw: Vec<DMatrix<f64>> = w.values().iter().map(|m| spd_pow(m, t)).collect();
            for b in space.balls() {
                let red = reducing_matrix(&w, b, p, side, &space).unwrap();
                for e in &dirs {
                    let rho = (b.members.iter().map(|&x| space.mass(x) * (&pw[x] * e).norm().powf(q)).sum::<f64>() / b.measure).powf(1.0 / q);
                    let we = (&red.matrix * e).norm();
                    out.worst_low = out.worst_low.max(we / rho);
                    out.worst_high = out.worst_high.max(rho / (we * (n as f64).sqrt()));
                }
                out.balls += 1;
            }
        }
        let def = ap_constant(&w, p, &space).unwrap();
        let via = ap_via_reducing(&w, p, &space).unwrap();
        let ratio = via / def;
        let nf = n as f64;
        out.ap_ratio_range = (out.ap_ratio_range.0.min(ratio), out.ap_ratio_range.1.max(ratio));
        if n == 1 {
            out.scalar_error = out.scalar_error.max((ratio - 1.0).abs());
        } else if !(ratio >= nf.powf(-p) && ratio <= nf.powf(p)) {
            out.ap_violations += 1;
        }
        out.instances += 1;
    }
    out.elapsed = t0.elapsed();
    out
}

#[test]
fn criteria_03_04_reducing_matrices() {
    let c = reducing_campaign();
    let ok3 = c.worst_low <= 1.0 + SANDWICH_ROUNDING && c.worst_high <= 1.0 + SANDWICH_SLACK && c.elapsed <= Duration::from_secs(300);
    line(3, ok3, c.elapsed, format!("{} weights, {} balls: max |We|/rho = {:.12}, max rho/(sqrt(n)|We|) = {:.6}", c.instances, c.balls, c.worst_low, c.worst_high));
    let ok4 = c.ap_violations == 0 && c.scalar_error <= AP_SCALAR_TOL;
    line(4, ok4, c.elapsed, format!("ratio range [{:.4}, {:.4}], outside [n^-p, n^p]: {}, n = 1 error {:.2e}", c.ap_ratio_range.0, c.ap_ratio_range.1, c.ap_violations, c.scalar_error));
    assert!(ok3 && ok4);
}

// ---------------------------------------------------------------- 5

#[test]
fn criterion_05_scalar_slice_at_one() {
    let t0 = Instant::now();
    let mut worst: f64 = 0.0;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(5000 + seed);
        let n = 1 + (seed as usize % 4);
        let points = rng.gen_range(3..=24);
        let space = FiniteSpace::random_planar(points, 1.0, seed);
        let w = random_weight(n, points, &mut rng);
        let a1 = a1_constant(&w, &space).unwrap();
        for _ in 0..100 {
            let e = DVector::from_fn(n, |_, _| -> f64 { StandardNormal.sample(&mut rng) });
            worst = worst.max(scalar_slice_ap(&w, 1.0, &e, &space).unwrap() / a1);
        }
    }
    let el = t0.elapsed();
    let ok = worst <= 1.0 + SLICE_TOL;
    line(5, ok, el, format!("max slice/A_1 = {worst:.15}"));
    assert!(ok);
}

// ---------------------------------------------------------------- 6

fn haar_errors(t: &DyadicTree, rng: &mut ChaCha8Rng) -> (f64, f64, f64, usize) {
    let (space, sys) = tree_space(t);
    let haar = build_haar_system(&sys, &space).unwrap();
    let n = space.len();
    let m = space.masses();
    let dense: Vec<Vec<f64>> = haar.functions.iter().map(|h| h.dense(n)).collect();
    let mut mean_err: f64 = 0.0;
    for h in &dense {
        mean_err = mean_err.max(h.iter().zip(m).map(|(a, b)| a * b).sum::<f64>().abs());
    }
    // Gram matrix over pairs with overlapping supports; others vanish
    let mut gram_err: f64 = 0.0;
    for (i, hi) in haar.functions.iter().enumerate() {
        for (j, hj) in haar.functions.iter().enumerate().skip(i) {
            let (small, big) = if hi.support.len() <= hj.support.len() { (hi, &dense[j]) } else { (hj, &dense[i]) };
            let ip: f64 = small.support.iter().zip(&small.values).map(|(&x, v)| v * big[x] * m[x]).sum();
            let target = if i == j { 1.0 } else { 0.0 };
            gram_err = gram_err.max((ip - target).abs());
        }
    }
    let mut recon_err: f64 = 0.0;
    for _ in 0..100 {
        let f: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        let c = haar.coefficients(&f);
        let g = haar.synthesize(&c, haar.mean(&f));
        let scale = f.iter().fold(1.0f64, |a, v| a.max(v.abs()));
        recon_err = recon_err.max(f.iter().zip(&g).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / scale);
        // Parseval: ‖f‖² = μ(X)⟨f⟩² + Σ c_h²
        let l2: f64 = f.iter().zip(m).map(|(a, b)| a * a * b).sum();
        let coeff: f64 = c.iter().map(|v| v * v).sum::<f64>() + haar.total_mass * haar.mean(&f).powi(2);
        recon_err = recon_err.max((l2 - coeff).abs() / l2);
    }
    (mean_err, gram_err, recon_err, haar.len())
}

#[test]
fn criterion_06_haar_exactness() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6000);
    let trees = vec![
        DyadicTree::uniform(2, 10),
        DyadicTree::uniform(2, 6),
        DyadicTree::uniform(3, 5),
        DyadicTree::random(1024, 4, true, 1),
        DyadicTree::random(1000, 3, true, 2),
        DyadicTree::random(777, 5, false, 3),
        DyadicTree::random(200, 2, true, 4),
    ];
    let (mut me, mut ge, mut re, mut funcs) = (0.0f64, 0.0f64, 0.0f64, 0);
    for t in &trees {
        let (a, b, c, k) = haar_errors(t, &mut rng);
        me = me.max(a);
        ge = ge.max(b);
        re = re.max(c);
        funcs += k;
    }
    let el = t0.elapsed();
    let ok = me <= HAAR_TOL && ge <= HAAR_TOL && re <= PARSEVAL_TOL && el <= Duration::from_secs(60);
    line(6, ok, el, format!("{funcs} functions: mean {me:.2e}, orthonormality {ge:.2e}, Parseval/reconstruction {re:.2e}"));
    assert!(ok);
}

// ---------------------------------------------------------------- 7

/// `max_{x≠y} |N(x,y)| μ(Q(x,y))` summed directly from the Haar functions,
/// with `Q(x,y)` found by an ancestor walk.
fn oracle_kernel_bound(haar: &HaarSystem, eta: &EtaSymbol, sys: &DyadicSystem, n: usize) -> (f64, Vec<f64>) {
    let mut k = vec![0.0; n * n];
    for (i, h) in haar.functions.iter().enumerate() {
        let dense = h.dense(n);
        for &x in &h.support {
            for &y in &h.support {
                k[x * n + y] += eta.eval(haar, x, i) * dense[x] * dense[y];
            }
        }
    }
    let mut best: f64 = 0.0;
    for x in 0..n {
        let mut chain = vec![sys.leaf_of[x]];
        while let Some(p) = sys.cubes[*chain.last().unwrap()].parent {
            chain.push(p);
        }
        for y in 0..n {
            if x != y {
                let q = chain.iter().find(|&&c| sys.cubes[c].members.binary_search(&y).is_ok()).unwrap();
                best = best.max(k[x * n + y].abs() * sys.cubes[*q].measure);
            }
        }
    }
    (best, k)
}

#[test]
fn criterion_07_petermichl_kernel_bound() {
    let t0 = Instant::now();
    let trees = vec![DyadicTree::uniform(2, 8), DyadicTree::random(256, 2, true, 7), DyadicTree::random(256, 2, false, 8)];
    let mut details = Vec::new();
    let mut ok = true;
    for t in &trees {
        let mut values = Vec::new();
        for seed in [0u64, 1, 2] {
            let space = dyadic_metric(t);
            let sys = build_dyadic_system(&space, 0.5, seed).unwrap();
            let haar = build_haar_system(&sys, &space).unwrap();
            let eta = EtaSymbol::petermichl(&haar, &sys).unwrap();
            let kern = kernel_from_haar(&haar, &eta, &sys, &space, None).unwrap();
            let (oracle, k) = oracle_kernel_bound(&haar, &eta, &sys, space.len());
            let n = space.len();
            let kernel_match = (0..n * n).all(|i| (k[i] - kern.operator.at(i / n, i % n)).abs() <= 1e-10 * (1.0 + k[i].abs()));
            ok &= kern.bound.is_finite() && (kern.bound - oracle).abs() <= 1e-12 * oracle && kernel_match;
            // the certified bound is exactly the measured one
            ok &= kernel_from_haar(&haar, &eta, &sys, &space, Some(kern.bound)).is_ok();
            values.push(kern.bound);
        }
        ok &= values.iter().all(|v| v.to_bits() == values[0].to_bits());
        details.push(format!("{:.6}", values[0]));
    }
    let el = t0.elapsed();
    ok &= el <= Duration::from_secs(60);
    line(7, ok, el, format!("K_measured per tree {details:?}, identical across seeds"));
    assert!(ok);
}

// ---------------------------------------------------------------- 8

struct DominationRun {
    label: String,
    ok: bool,
    detail: String,
}

fn dominate_and_check(label: String, t: &KernelOperator, sys: &DyadicSystem, space: &FiniteSpace, dim: usize, s: f64, seed: u64) -> DominationRun {
    let f = VectorField::random(dim, space.len(), seed);
    let alpha = 3.0 * space.quasi_triangle_constant().powi(2) / sys.delta;
    let (q, r) = if s == 1.0 { (1.0, 1.0) } else { (s, 1.0) };
    let res = Instance::new(t, sys, space, &f, s, alpha).and_then(|inst| dominate(&inst, q, r));
    let dec = match res {
        Ok(d) => d,
        Err(e) => return DominationRun { label, ok: false, detail: e.to_string() },
    };
    let sparse_ok = match &dec.sparse {
        SparseCertificate::Sparse { eta, witnesses } => *eta == 0.5 && witnesses_valid(sys, space, &dec.family.cubes, 0.5, witnesses),
        _ => false,
    };
    let tf = t.apply_vec(&f);
    let back = dec.evaluate(&f);
    let scale = tf.values.iter().fold(1.0f64, |a, v| a.max(v.norm()));
    let recon = tf.values.iter().zip(&back).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max) / scale;
    let mixed = dec.cubes.iter().map(|c| c.kernel.mixed_norm()).fold(0.0, f64::max);
    let packing = dec.cubes.iter().map(|c| c.selected.iter().map(|&p| sys.cubes[p].measure).sum::<f64>() / sys.cubes[c.cube].measure).fold(0.0, f64::max);
    let mut pointwise = true;
    if dim == 1 {
        let sp = dec.sparse_operator(&f);
        pointwise = tf.values.iter().zip(&sp).all(|(a, b)| a.norm() <= b * (1.0 + DOMINATION_TOL) + 1e-14);
    }
    let ok = sparse_ok && mixed <= 1.0 + MIXED_NORM_TOL && recon <= RECONSTRUCTION_TOL && packing <= 0.5 && pointwise;
    DominationRun { label, ok, detail: format!("cubes {} sparse {sparse_ok} mixed {mixed:.3e} recon {recon:.1e} packing {packing:.3} pointwise {pointwise}", dec.cubes.len()) }
}

#[test]
fn criterion_08_sparse_domination_end_to_end() {
    let t0 = Instant::now();
    let mut runs = Vec::new();
    for op in 0..21u64 {
        let tree = if op == 0 { DyadicTree::uniform(2, 6) } else { DyadicTree::random(16 + (op as usize * 53) % 113, 2 + op as usize % 2, op % 3 != 0, op) };
        let (space, sys) = tree_space(&tree);
        let haar = build_haar_system(&sys, &space).unwrap();
        let eta = if op == 0 { EtaSymbol::petermichl(&haar, &sys).unwrap() } else { EtaSymbol::random(&haar, &sys, 1.0, op) };
        let t = kernel_from_haar(&haar, &eta, &sys, &space, None).unwrap().operator;
        for dim in 1..=3usize {
            let s = if (op as usize + dim) % 2 == 0 { 1.0 } else { 2.0 };
            let label = format!("op {op} N {} n {dim} s {s}", space.len());
            runs.push(dominate_and_check(label, &t, &sys, &space, dim, s, 100 * op + dim as u64));
        }
    }
    let el = t0.elapsed();
    let failed: Vec<String> = runs.iter().filter(|r| !r.ok).map(|r| format!("{}: {}", r.label, r.detail)).collect();
    let ok = failed.is_empty() && el <= Duration::from_secs(600);
    line(8, ok, el, format!("{} runs, failed {failed:?}", runs.len()));
    assert!(ok);
}

// ---------------------------------------------------------------- 9

fn random_input(n: usize, kind: u64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    match kind % 3 {
        0 => (0..n).map(|_| StandardNormal.sample(rng)).collect(),
        1 => (0..n).map(|_| if rng.gen_bool(0.1) { rng.gen_range(-5.0..5.0) } else { 0.0 }).collect(),
        _ => {
            let a = rng.gen_range(0..n);
            let b = rng.gen_range(a..n);
            (0..n).map(|x| if (a..=b).contains(&x) { 1.0 } else { 0.0 }).collect()
        }
    }
}

#[test]
fn criterion_09_sharp_maximal_domination() {
    let t0 = Instant::now();
    // bounded kernels with the smoothness of r = ∞, so r' = 1
    let rp = 1.0;
    let mut ops: Vec<(String, KernelOperator, FiniteSpace, f64)> = Vec::new();
    for (i, tree) in [DyadicTree::uniform(2, 6), DyadicTree::random(80, 3, true, 9)].into_iter().enumerate() {
        let (space, sys) = tree_space(&tree);
        let haar = build_haar_system(&sys, &space).unwrap();
        let eta = if i == 0 { EtaSymbol::petermichl(&haar, &sys).unwrap() } else { EtaSymbol::random(&haar, &sys, 1.0, 9) };
        let alpha = 3.0 * space.quasi_triangle_constant().powi(2) / sys.delta;
        ops.push((format!("tree {i}"), kernel_from_haar(&haar, &eta, &sys, &space, None).unwrap().operator, space, alpha));
    }
    // first Riesz kernel (x₁ − y₁)/|x − y|³ on a 7 × 7 grid
    let side = 7;
    let n = side * side;
    let pt = |i: usize| ((i % side) as f64, (i / side) as f64);
    let mut dist = vec![0.0; n * n];
    let mut k = vec![0.0; n * n];
    for x in 0..n {
        for y in 0..n {
            let (a, b) = (pt(x), pt(y));
            let d = ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt();
            dist[x * n + y] = d;
            if x != y {
                k[x * n + y] = (a.0 - b.0) / d.powi(3);
            }
        }
    }
    let space = FiniteSpace::new(vec![1.0; n], dist).unwrap();
    let sys = build_dyadic_system(&space, 0.5, 0).unwrap();
    let alpha = 3.0 * space.quasi_triangle_constant().powi(2) / sys.delta;
    ops.push(("grid riesz".into(), KernelOperator::new(k, &space).unwrap(), space, alpha));
    let mut details = Vec::new();
    let mut ok = true;
    for (name, t, space, alpha) in &ops {
        let mut rng = ChaCha8Rng::seed_from_u64(9000);
        let ratio = |f: &[f64]| {
            let sharp = sharp_grand_maximal(t, *alpha, f, space);
            let m = maximal_r(f, rp, space);
            sharp.iter().zip(&m).map(|(a, b)| if *b > 0.0 { a / b } else if *a > 0.0 { f64::INFINITY } else { 0.0 }).fold(0.0, f64::max)
        };
        // C is fitted as a supremum: each calibration input is a local
        // maximizer of the ratio over {-1, 0, 1}-valued f
        let mut c: f64 = 0.0;
        for i in 0..10u64 {
            let mut crng = ChaCha8Rng::seed_from_u64(9100 + i);
            let mut f: Vec<f64> = (0..space.len()).map(|_| crng.gen_range(-1i32..=1) as f64).collect();
            let mut v = ratio(&f);
            loop {
                let mut moved = false;
                for x in 0..f.len() {
                    for val in [-1.0, 0.0, 1.0] {
                        if val == f[x] {
                            continue;
                        }
                        let old = std::mem::replace(&mut f[x], val);
                        let w = ratio(&f);
                        if w > v {
                            v = w;
                            moved = true;
                        } else {
                            f[x] = old;
                        }
                    }
                }
                if !moved {
                    break;
                }
            }
            c = c.max(v);
        }
        let mut violations = 0;
        let mut worst: f64 = 0.0;
        for i in 0..50 {
            let r = ratio(&random_input(space.len(), i, &mut rng));
            worst = worst.max(r);
            if r > c * (1.0 + SHARP_TOL) {
                violations += 1;
            }
        }
        ok &= violations == 0 && c.is_finite();
        details.push(format!("{name} (alpha {alpha}): C {c:.4} test max {worst:.4} violations {violations}"));
    }
    let el = t0.elapsed();
    line(9, ok, el, format!("r' {rp}: {details:?}"));
    assert!(ok);
}

// ---------------------------------------------------------------- 10

/// `max_{E ⊆ B} ∫_B |T*χ_E| dμ` by enumeration of every subset.
fn oracle_testing(t: &KernelOperator, ball: &[usize], space: &FiniteSpace) -> f64 {
    let b = ball.len();
    let mut best: f64 = 0.0;
    for mask in 0u32..(1 << b) {
        let mut total = 0.0;
        for &x in ball {
            let v: f64 = ball.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &y)| t.at(y, x) * space.mass(y)).sum();
            total += v.abs() * space.mass(x);
        }
        best = best.max(total);
    }
    best
}

#[test]
fn criterion_10_t1_pipeline() {
    let t0 = Instant::now();
    let mut compared = 0;
    let mut misses = 0;
    for (i, tree) in [DyadicTree::uniform(2, 6), DyadicTree::random(96, 2, true, 10)].into_iter().enumerate() {
        let (space, sys) = tree_space(&tree);
        let haar = build_haar_system(&sys, &space).unwrap();
        let t = kernel_from_haar(&haar, &EtaSymbol::petermichl(&haar, &sys).unwrap(), &sys, &space, None).unwrap().operator;
        for b in space.balls() {
            if b.members.len() > 12 {
                continue;
            }
            let (v, set) = testing_search_on(&t, &b.members, &space, 8, i as u64);
            let exact = oracle_testing(&t, &b.members, &space);
            // the returned set attains the returned value
            let attained: f64 = b.members.iter().map(|&x| set.iter().map(|&y| t.at(y, x) * space.mass(y)).sum::<f64>().abs() * space.mass(x)).sum();
            if (v - exact).abs() > TESTING_TOL * exact.max(1.0) || (attained - v).abs() > TESTING_TOL * v.max(1.0) {
                misses += 1;
            }
            compared += 1;
        }
    }
    let (space, sys) = tree_space(&DyadicTree::uniform(2, 5));
    let haar = build_haar_system(&sys, &space).unwrap();
    let mut planted = kernel_from_haar(&haar, &EtaSymbol::petermichl(&haar, &sys).unwrap(), &sys, &space, None).unwrap().operator;
    planted.set(3, 3, 1e9);
    let refuted = matches!(check_t1_hypotheses(&planted, &space, 2.0, &T1Limits::default()), Err(Error::HypothesisFailed(ref h)) if h.as_slice() == [Hypothesis::TestingCondition]);
    let el = t0.elapsed();
    let ok = misses == 0 && compared > 0 && refuted && el <= Duration::from_secs(120);
    line(10, ok, el, format!("{compared} balls compared with enumeration, misses {misses}, planted violator refuted {refuted}"));
    assert!(ok);
}

// ---------------------------------------------------------------- 11

/// Campaign maxima frozen from the first run (seed 0, 200 instances).
const GOLDEN: [(&str, f64); 6] = [
    ("maximal-campaign/maximal-ap", 1.287375),
    ("maximal-campaign/maximal-aq", 1.306802),
    ("cz-campaign/cz-apr", 1.024010),
    ("cz-campaign/cz-aq", 0.648589),
    ("endpoint-campaign/endpoint-t", 0.605603),
    ("endpoint-campaign/endpoint-m", 1.004897),
];

#[test]
fn criterion_11_weighted_bound_campaigns() {
    let t0 = Instant::now();
    let mut scenarios = Vec::new();
    for check in [Check::Maximal, Check::Cz, Check::Endpoint] {
        scenarios.extend(campaign_scenarios(check, 200, 0));
    }
    let summary = run_scenarios(&scenarios, &RunFlags::default());
    let finite = summary.reports.iter().all(|r| r.ratio.is_finite() && r.ratio >= 0.0);
    let mut ok = summary.passed() && finite && summary.instances == 600;
    let mut details = Vec::new();
    for (key, golden) in GOLDEN {
        let got = summary.campaign_maxima.get(key).copied().unwrap_or(f64::NAN);
        let close = (got - golden).abs() <= GOLDEN_TOL * golden;
        ok &= close;
        details.push(format!("{key} {got:.6} (golden {golden:.6})"));
    }
    let el = t0.elapsed();
    ok &= el <= Duration::from_secs(1200);
    line(11, ok, el, format!("{} reports, all finite {finite}, first failure {:?}: {details:?}", summary.reports.len(), summary.first_failure));
    assert!(ok);
}

// ---------------------------------------------------------------- 12

#[test]
fn criterion_12_a2_scaling() {
    let t0 = Instant::now();
    let (space, sys) = tree_space(&DyadicTree::uniform(2, 8));
    let haar = build_haar_system(&sys, &space).unwrap();
    let t = kernel_from_haar(&haar, &EtaSymbol::petermichl(&haar, &sys).unwrap(), &sys, &space, None).unwrap().operator;
    let ladder: Vec<(f64, MatrixWeight)> = (0..=6)
        .map(|i| {
            let a = 0.5 * i as f64;
            (a, sparsedom::harness::build_weight(&WeightSpec::Power { exponents: vec![a] }, 1, &space, 0).unwrap())
        })
        .collect();
    let sc = verify_a2_scaling(&t, &ladder, &space).unwrap();
    let el = t0.elapsed();
    let ok = sc.decades() >= 3.0 && sc.slope <= A2_SLOPE_MAX && el <= Duration::from_secs(300);
    line(12, ok, el, format!("slope {:.4} over {:.2} decades of [W]_A2 (max {A2_SLOPE_MAX})", sc.slope, sc.decades()));
    assert!(ok);
}
