//! L^r-Hörmander constants of a kernel.

use std::collections::HashSet;

use crate::operators::kernel::KernelOperator;
use crate::space::{set_key, FiniteSpace};

type Key = (u64, usize, usize);

/// `(H_{r,1}, H_{r,2})`: the supremum over balls `B` and
/// `x, z ∈ (1/(2c_d))B` of
/// `Σ_{k≥1} μ(2^k B) ⟨(K(x,·) − K(z,·)) χ_{2^k B ∖ 2^{k−1} B}⟩_{r, 2^k B}`,
/// for `K` and for `K*`. The average is over the whole of `2^k B`; the
/// sum stops once `2^k B = X`. `r = f64::INFINITY` takes the maximum.
pub fn hormander_constants(t: &KernelOperator, r: f64, space: &FiniteSpace) -> (f64, f64) {
    let configs = configurations(space);
    let adj = t.adjoint();
    (sweep(t, r, space, &configs), sweep(&adj, r, space, &configs))
}

/// A ball configuration: the points of `(1/(2c_d))B` and the annuli
/// `2^k B ∖ 2^{k−1} B` with the measure of `2^k B`.
struct Config {
    small: Vec<usize>,
    annuli: Vec<(Vec<usize>, f64)>,
}

fn configurations(space: &FiniteSpace) -> Vec<Config> {
    let n = space.len();
    let cd = space.quasi_triangle_constant();
    let shrink = 1.0 / (2.0 * cd);
    let diam = space.diameter();
    let mut seen: HashSet<Vec<Key>> = HashSet::new();
    let mut out = Vec::new();
    for c in 0..n {
        let row = space.row(c);
        let mut pos: Vec<f64> = row.iter().copied().filter(|&d| d > 0.0).collect();
        pos.sort_by(|a, b| a.total_cmp(b));
        pos.dedup();
        let Some(&d1) = pos.first() else { continue };
        // the small ball needs a second point
        let floor = d1 / shrink;
        let mut radii: Vec<f64> = Vec::new();
        for &d in &pos {
            radii.push(d / shrink);
            let mut k = 0;
            loop {
                let r = d / 2f64.powi(k);
                if r <= floor {
                    break;
                }
                radii.push(r);
                k += 1;
            }
        }
        radii.retain(|&r| r > floor);
        radii.sort_by(|a, b| a.total_cmp(b));
        radii.dedup();
        for &rho in &radii {
            let small: Vec<usize> = (0..n).filter(|&y| row[y] < shrink * rho).collect();
            if small.len() < 2 {
                continue;
            }
            let mut annuli = Vec::new();
            let mut keys = vec![set_key(&small)];
            let mut k = 1;
            loop {
                let outer = 2f64.powi(k) * rho;
                let inner = outer / 2.0;
                let ring: Vec<usize> = (0..n).filter(|&y| row[y] < outer && row[y] >= inner).collect();
                let big: Vec<usize> = (0..n).filter(|&y| row[y] < outer).collect();
                keys.push(set_key(&big));
                if !ring.is_empty() {
                    annuli.push((ring, space.measure(&big)));
                }
                if big.len() == n || outer > 2.0 * diam {
                    break;
                }
                k += 1;
            }
            if annuli.is_empty() {
                continue;
            }
            if seen.insert(keys) {
                out.push(Config { small, annuli });
            }
        }
    }
    out
}

fn sweep(t: &KernelOperator, r: f64, space: &FiniteSpace, configs: &[Config]) -> f64 {
    let mut best: f64 = 0.0;
    for cfg in configs {
        for (i, &x) in cfg.small.iter().enumerate() {
            let kx = t.row(x);
            for &z in &cfg.small[i + 1..] {
                let kz = t.row(z);
                let mut total = 0.0;
                for (ring, big) in &cfg.annuli {
                    let term = if r.is_infinite() {
                        ring.iter().map(|&y| (kx[y] - kz[y]).abs()).fold(0.0, f64::max) * big
                    } else {
                        let s: f64 = ring.iter().map(|&y| (kx[y] - kz[y]).abs().powf(r) * space.mass(y)).sum();
                        big.powf(1.0 - 1.0 / r) * s.powf(1.0 / r)
                    };
                    total += term;
                }
                best = best.max(total);
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_kernel() {
        let s = FiniteSpace::uniform_line(6);
        assert_eq!(hormander_constants(&KernelOperator::zero(&s), 2.0, &s), (0.0, 0.0));
    }

    #[test]
    fn kernel_constant_in_second_slot() {
        let s = FiniteSpace::uniform_line(6);
        let g = [1.0, -2.0, 0.5, 3.0, 1.5, -1.0];
        let k: Vec<f64> = (0..36).map(|i| g[i / 6]).collect();
        let t = KernelOperator::new(k, &s).unwrap();
        let (h1, h2) = hormander_constants(&t, f64::INFINITY, &s);
        assert!(h1 > 0.0);
        assert_eq!(h2, 0.0);
    }
}
