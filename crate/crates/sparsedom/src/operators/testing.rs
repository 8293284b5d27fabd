//! The testing condition `∫_B |T*χ_E| ≤ c μ(B)` for `E ⊆ B`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::operators::kernel::KernelOperator;
use crate::space::FiniteSpace;

/// Ball size up to which the local search is checked against full
/// enumeration.
pub const EXHAUSTIVE_LIMIT: usize = 12;

#[derive(Debug, Clone, Serialize)]
pub struct TestingReport {
    /// Largest `∫_B |T*χ_E| / μ(B)` found.
    pub ratio: f64,
    pub center: usize,
    pub radius: f64,
    pub ball: Vec<usize>,
    pub set: Vec<usize>,
    /// Balls where enumeration beat the local search (should stay 0).
    pub search_misses: usize,
}

/// `a[i][j] = K(b_j, b_i) μ(b_j)`, so `T*χ_E(b_i) = Σ_{j ∈ E} a[i][j]`.
fn local_matrix(t: &KernelOperator, ball: &[usize], space: &FiniteSpace) -> Vec<Vec<f64>> {
    ball.iter().map(|&x| ball.iter().map(|&y| t.at(y, x) * space.mass(y)).collect()).collect()
}

fn objective(a: &[Vec<f64>], w: &[f64], e: &[bool]) -> f64 {
    a.iter()
        .zip(w)
        .map(|(row, m)| m * row.iter().zip(e).filter(|(_, &b)| b).map(|(v, _)| v).sum::<f64>().abs())
        .sum()
}

/// Sign-greedy alternation plus single flips, from the full set, every
/// singleton (up to 16) and `restarts` random subsets. Returns the best
/// value of `∫_B |T*χ_E|` and its set as local indices.
pub fn local_search(a: &[Vec<f64>], w: &[f64], restarts: usize, seed: u64) -> (f64, Vec<bool>) {
    let m = a.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut starts: Vec<Vec<bool>> = vec![vec![true; m]];
    for j in 0..m.min(16) {
        let mut e = vec![false; m];
        e[j] = true;
        starts.push(e);
    }
    for _ in 0..restarts {
        starts.push((0..m).map(|_| rng.gen_bool(0.5)).collect());
    }
    let mut best = (0.0, vec![false; m]);
    for mut e in starts {
        let mut vals: Vec<f64> = a.iter().map(|row| row.iter().zip(&e).filter(|(_, &b)| b).map(|(v, _)| v).sum()).collect();
        let mut cur: f64 = vals.iter().zip(w).map(|(v, m)| m * v.abs()).sum();
        loop {
            let mut improved = false;
            // best response: given signs of T*χ_E, keep the columns with positive gain
            let sigma: Vec<f64> = vals.iter().map(|v| if *v >= 0.0 { 1.0 } else { -1.0 }).collect();
            let cand: Vec<bool> = (0..m).map(|j| (0..m).map(|i| w[i] * sigma[i] * a[i][j]).sum::<f64>() > 0.0).collect();
            let cv = objective(a, w, &cand);
            if cv > cur * (1.0 + 1e-14) + 1e-300 {
                e = cand;
                vals = a.iter().map(|row| row.iter().zip(&e).filter(|(_, &b)| b).map(|(v, _)| v).sum()).collect();
                cur = cv;
                improved = true;
            }
            for j in 0..m {
                let s = if e[j] { -1.0 } else { 1.0 };
                let nv: f64 = (0..m).map(|i| w[i] * (vals[i] + s * a[i][j]).abs()).sum();
                if nv > cur * (1.0 + 1e-14) + 1e-300 {
                    e[j] = !e[j];
                    for i in 0..m {
                        vals[i] += s * a[i][j];
                    }
                    cur = nv;
                    improved = true;
                }
            }
            if !improved {
                break;
            }
        }
        if cur > best.0 {
            best = (cur, e);
        }
    }
    best
}

/// Full enumeration of `E ⊆ B` in Gray-code order.
pub fn exhaustive(a: &[Vec<f64>], w: &[f64]) -> (f64, Vec<bool>) {
    let m = a.len();
    let mut e = vec![false; m];
    let mut vals = vec![0.0; m];
    let mut best = (0.0, e.clone());
    for step in 1u64..(1u64 << m) {
        let j = step.trailing_zeros() as usize;
        let s = if e[j] { -1.0 } else { 1.0 };
        e[j] = !e[j];
        for i in 0..m {
            vals[i] += s * a[i][j];
        }
        let v: f64 = vals.iter().zip(w).map(|(v, m)| m * v.abs()).sum();
        if v > best.0 {
            best = (v, e.clone());
        }
    }
    best
}

/// Largest testing ratio over all balls. Balls of at most
/// [`EXHAUSTIVE_LIMIT`] points are also enumerated; larger balls rely on
/// the local search with `restarts` random starts.
pub fn t1_testing_condition(t: &KernelOperator, space: &FiniteSpace, restarts: usize, seed: u64) -> TestingReport {
    let mut report = TestingReport { ratio: 0.0, center: 0, radius: 0.0, ball: Vec::new(), set: Vec::new(), search_misses: 0 };
    for (bi, b) in space.balls().iter().enumerate() {
        let a = local_matrix(t, &b.members, space);
        let w: Vec<f64> = b.members.iter().map(|&x| space.mass(x)).collect();
        let (mut val, mut set) = local_search(&a, &w, restarts, seed ^ bi as u64);
        if b.members.len() <= EXHAUSTIVE_LIMIT {
            let (ev, es) = exhaustive(&a, &w);
            if ev > val * (1.0 + 1e-12) + 1e-300 {
                report.search_misses += 1;
                val = ev;
                set = es;
            }
        }
        let ratio = val / b.measure;
        if ratio > report.ratio {
            report.ratio = ratio;
            report.center = b.center;
            report.radius = b.radius;
            report.ball = b.members.clone();
            report.set = b.members.iter().zip(&set).filter(|(_, &s)| s).map(|(&x, _)| x).collect();
        }
    }
    report
}

/// Local search on one ball, without enumeration. Returns the value of
/// `∫_B |T*χ_E|` and `E`.
pub fn testing_search_on(t: &KernelOperator, ball: &[usize], space: &FiniteSpace, restarts: usize, seed: u64) -> (f64, Vec<usize>) {
    let a = local_matrix(t, ball, space);
    let w: Vec<f64> = ball.iter().map(|&x| space.mass(x)).collect();
    let (v, e) = local_search(&a, &w, restarts, seed);
    (v, ball.iter().zip(&e).filter(|(_, &s)| s).map(|(&x, _)| x).collect())
}
