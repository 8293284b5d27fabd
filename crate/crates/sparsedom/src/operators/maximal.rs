//! Maximal functions. Suprema over balls run over the distinct balls of the
//! space, which exhausts every (center, radius) pair.

use std::collections::HashSet;

use nalgebra::DVector;

use crate::convex_body::VectorField;
use crate::dyadic::DyadicSystem;
use crate::matrix_weight::MatrixWeight;
use crate::operators::kernel::KernelOperator;
use crate::space::{set_key, FiniteSpace};

/// `M g(x) = sup_{B ∋ x} ⟨|g|⟩_B`.
pub fn maximal(g: &[f64], space: &FiniteSpace) -> Vec<f64> {
    let mut out = vec![0.0f64; space.len()];
    for b in space.balls() {
        let avg = b.members.iter().map(|&y| g[y].abs() * space.mass(y)).sum::<f64>() / b.measure;
        for &x in &b.members {
            out[x] = out[x].max(avg);
        }
    }
    out
}

/// `M_r g = (M |g|^r)^{1/r}`.
pub fn maximal_r(g: &[f64], r: f64, space: &FiniteSpace) -> Vec<f64> {
    let gr: Vec<f64> = g.iter().map(|v| v.abs().powf(r)).collect();
    maximal(&gr, space).into_iter().map(|v| v.powf(1.0 / r)).collect()
}

/// Dyadic maximal function over the cubes inside `within` (all cubes when
/// `None`); zero outside `within`.
pub fn dyadic_maximal(g: &[f64], sys: &DyadicSystem, within: Option<usize>, space: &FiniteSpace) -> Vec<f64> {
    let mut out = vec![0.0f64; space.len()];
    let cubes = sys.subcubes(within.unwrap_or(sys.root));
    for &c in &cubes {
        let q = sys.cube(c);
        let avg = q.members.iter().map(|&y| g[y].abs() * space.mass(y)).sum::<f64>() / q.measure;
        for &x in &q.members {
            out[x] = out[x].max(avg);
        }
    }
    out
}

fn cg_sweep<'a>(w: &MatrixWeight, p: f64, f: &VectorField, sets: impl Iterator<Item = (&'a [usize], f64)>, n_points: usize, space: &FiniteSpace) -> Vec<f64> {
    let pos = w.powers(1.0 / p);
    let neg = w.powers(-1.0 / p);
    let v: Vec<DVector<f64>> = (0..n_points).map(|y| &neg[y] * f.at(y)).collect();
    let mut out = vec![0.0f64; n_points];
    for (members, measure) in sets {
        for &x in members {
            let s: f64 = members.iter().map(|&y| (&pos[x] * &v[y]).norm() * space.mass(y)).sum();
            out[x] = out[x].max(s / measure);
        }
    }
    out
}

/// `M_{p,W} f(x) = sup_{B ∋ x} ⟨|W^{1/p}(x) W^{-1/p} f|⟩_B`.
pub fn christ_goldberg_maximal(w: &MatrixWeight, p: f64, f: &VectorField, space: &FiniteSpace) -> Vec<f64> {
    cg_sweep(w, p, f, space.balls().iter().map(|b| (b.members.as_slice(), b.measure)), space.len(), space)
}

/// The dyadic variant, supremum over the cubes of `sys`.
pub fn christ_goldberg_dyadic(w: &MatrixWeight, p: f64, f: &VectorField, sys: &DyadicSystem, space: &FiniteSpace) -> Vec<f64> {
    cg_sweep(w, p, f, sys.cubes.iter().map(|q| (q.members.as_slice(), q.measure)), space.len(), space)
}

/// Every distinct pair `(B, αB)` of open balls with a common center, as
/// sorted member lists. The pair only changes when the radius crosses some
/// `d(c,y)` or `d(c,y)/α`, so one radius per gap between those breakpoints
/// suffices.
pub fn ball_dilation_pairs(space: &FiniteSpace, alpha: f64) -> Vec<(Vec<usize>, Vec<usize>)> {
    let n = space.len();
    let mut seen: HashSet<((u64, usize, usize), (u64, usize, usize))> = HashSet::new();
    let mut out = Vec::new();
    for c in 0..n {
        let row = space.row(c);
        let mut radii: Vec<f64> = row.iter().filter(|&&d| d > 0.0).flat_map(|&d| [d, d / alpha]).collect();
        radii.sort_by(|a, b| a.total_cmp(b));
        radii.dedup();
        for &r in &radii {
            let small: Vec<usize> = (0..n).filter(|&y| row[y] < r).collect();
            let big: Vec<usize> = (0..n).filter(|&y| row[y] < alpha * r).collect();
            if big.len() == n {
                continue;
            }
            if seen.insert((set_key(&small), set_key(&big))) {
                out.push((small, big));
            }
        }
    }
    out
}

/// `M^#_{T,α} f(x) = sup_{B ∋ x} max_{y,z ∈ B} |T(f χ_{X∖αB})(y) − T(f χ_{X∖αB})(z)|`.
pub fn sharp_grand_maximal(t: &KernelOperator, alpha: f64, f: &[f64], space: &FiniteSpace) -> Vec<f64> {
    sharp_grand_maximal_with(t, &ball_dilation_pairs(space, alpha), f, space)
}

/// [`sharp_grand_maximal`] over precomputed [`ball_dilation_pairs`].
pub fn sharp_grand_maximal_with(t: &KernelOperator, pairs: &[(Vec<usize>, Vec<usize>)], f: &[f64], space: &FiniteSpace) -> Vec<f64> {
    let n = space.len();
    let mut out = vec![0.0f64; n];
    let mut inside = vec![false; n];
    let support: Vec<usize> = (0..n).filter(|&y| f[y] != 0.0).collect();
    for (small, big) in pairs {
        for &y in big {
            inside[y] = true;
        }
        let outside: Vec<usize> = support.iter().copied().filter(|&y| !inside[y]).collect();
        for &y in big {
            inside[y] = false;
        }
        if outside.is_empty() {
            continue;
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &y in small {
            let row = t.row(y);
            let v: f64 = outside.iter().map(|&w| row[w] * f[w] * space.mass(w)).sum();
            lo = lo.min(v);
            hi = hi.max(v);
        }
        let osc = hi - lo;
        for &x in small {
            out[x] = out[x].max(osc);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn maximal_on_line() {
        let s = FiniteSpace::uniform_line(3);
        let m = maximal(&[3.0, 0.0, 0.0], &s);
        assert_eq!(m, vec![3.0, 1.5, 1.0]);
    }

    #[test]
    fn local_kernel_has_zero_sharp_function() {
        let s = FiniteSpace::uniform_line(5);
        let mut k = vec![0.0; 25];
        for i in 0..5 {
            k[i * 5 + i] = 2.0;
        }
        let t = KernelOperator::new(k, &s).unwrap();
        let out = sharp_grand_maximal(&t, 2.0, &[1.0, -2.0, 3.0, 0.5, 1.0], &s);
        assert!(out.iter().all(|&v| v == 0.0));
    }
}
