use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::convex_body::VectorField;
use crate::error::{Error, Result};
use crate::space::{Ball, FiniteSpace};

/// `Tf(x) = Σ_y K(x,y) f(y) μ_y`. The diagonal carries the part of the
/// operator local to each atom.
#[derive(Debug, Clone, Serialize)]
pub struct KernelOperator {
    n: usize,
    /// Row-major `K(x, y)`.
    k: Vec<f64>,
    mass: Vec<f64>,
}

impl KernelOperator {
    pub fn new(k: Vec<f64>, space: &FiniteSpace) -> Result<Self> {
        let n = space.len();
        if k.len() != n * n {
            return Err(Error::InvalidArgument(format!("kernel has {} entries, expected {}", k.len(), n * n)));
        }
        if k.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite kernel entry".into()));
        }
        Ok(KernelOperator { n, k, mass: space.masses().to_vec() })
    }

    pub fn zero(space: &FiniteSpace) -> Self {
        let n = space.len();
        KernelOperator { n, k: vec![0.0; n * n], mass: space.masses().to_vec() }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn at(&self, x: usize, y: usize) -> f64 {
        self.k[x * self.n + y]
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.k[x * self.n..(x + 1) * self.n]
    }

    pub fn set(&mut self, x: usize, y: usize, v: f64) {
        self.k[x * self.n + y] = v;
    }

    /// Kernel of the adjoint, `K*(x, y) = K(y, x)`.
    pub fn adjoint(&self) -> Self {
        let n = self.n;
        let mut k = vec![0.0; n * n];
        for x in 0..n {
            for y in 0..n {
                k[x * n + y] = self.k[y * n + x];
            }
        }
        KernelOperator { n, k, mass: self.mass.clone() }
    }

    pub fn is_zero(&self) -> bool {
        self.k.iter().all(|&v| v == 0.0)
    }

    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        let wf: Vec<f64> = f.iter().zip(&self.mass).map(|(a, m)| a * m).collect();
        (0..self.n).map(|x| self.row(x).iter().zip(&wf).map(|(k, v)| k * v).sum()).collect()
    }

    /// `T(f χ_S)` evaluated at every point.
    pub fn apply_on(&self, f: &[f64], set: &[usize]) -> Vec<f64> {
        (0..self.n)
            .map(|x| {
                let row = self.row(x);
                set.iter().map(|&y| row[y] * self.mass[y] * f[y]).sum()
            })
            .collect()
    }

    /// `T*g`.
    pub fn apply_adjoint(&self, g: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for y in 0..self.n {
            let c = g[y] * self.mass[y];
            if c != 0.0 {
                for (o, k) in out.iter_mut().zip(self.row(y)) {
                    *o += c * k;
                }
            }
        }
        out
    }

    /// Componentwise action on a vector field.
    pub fn apply_vec(&self, f: &VectorField) -> VectorField {
        let coords: Vec<Vec<f64>> = (0..f.dim).map(|i| self.apply(&f.coordinate(i))).collect();
        VectorField::from_coordinates(&coords)
    }

    /// `T(f χ_S)` for a vector field.
    pub fn apply_vec_on(&self, f: &VectorField, set: &[usize]) -> Vec<DVector<f64>> {
        (0..self.n)
            .map(|x| {
                let row = self.row(x);
                let mut out = DVector::zeros(f.dim);
                for &y in set {
                    let c = row[y] * self.mass[y];
                    if c != 0.0 {
                        out += f.at(y) * c;
                    }
                }
                out
            })
            .collect()
    }

    /// `max_{x≠y} |K(x,y)| μ(B(x, d(x,y)))` together with the pair.
    pub fn size_constant(&self, space: &FiniteSpace) -> (f64, (usize, usize)) {
        let mut best = (0.0, (0, 0));
        for x in 0..self.n {
            let ball = |r: f64| space.row(x).iter().zip(space.masses()).filter(|(d, _)| **d < r).map(|(_, m)| m).sum::<f64>();
            for y in 0..self.n {
                if x != y {
                    let v = self.at(x, y).abs() * ball(space.dist(x, y)).max(space.mass(x));
                    if v > best.0 {
                        best = (v, (x, y));
                    }
                }
            }
        }
        best
    }
}

/// `‖h‖_{L^{1,∞}} = sup_t t μ{|h| > t}`, exact on a finite space.
pub fn weak_l1_norm(h: &[f64], space: &FiniteSpace) -> f64 {
    let mut pairs: Vec<(f64, f64)> = h.iter().map(|v| v.abs()).zip(space.masses().iter().copied()).collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut acc = 0.0;
    let mut best: f64 = 0.0;
    let mut i = 0;
    while i < pairs.len() {
        let v = pairs[i].0;
        while i < pairs.len() && pairs[i].0 == v {
            acc += pairs[i].1;
            i += 1;
        }
        best = best.max(v * acc);
    }
    best
}

/// Largest `‖Tg‖_{L^{1,∞}} / ‖g‖_{L^1}` over point masses, indicators of
/// balls and `extra` seeded random inputs.
pub fn measured_weak_11(t: &KernelOperator, space: &FiniteSpace, extra: usize, seed: u64) -> f64 {
    let n = space.len();
    let l1 = |g: &[f64]| g.iter().zip(space.masses()).map(|(a, m)| a.abs() * m).sum::<f64>();
    let mut best: f64 = 0.0;
    let mut probe = |g: &[f64]| {
        let norm = l1(g);
        if norm > 0.0 {
            best = best.max(weak_l1_norm(&t.apply(g), space) / norm);
        }
    };
    for x in 0..n {
        let mut g = vec![0.0; n];
        g[x] = 1.0;
        probe(&g);
    }
    for b in space.balls() {
        let mut g = vec![0.0; n];
        for &x in &b.members {
            g[x] = 1.0;
        }
        probe(&g);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..extra {
        let g: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        probe(&g);
    }
    best
}

/// `∫_{X∖kB} |Tf| ≤ c ∫_B |f|` for mean-zero `f` supported in `B`: returns
/// both sides and the ratio (0 when `f = 0`).
pub fn cancellation_tail_check(t: &KernelOperator, ball: &Ball, f: &[f64], k: f64, space: &FiniteSpace) -> Result<(f64, f64, f64)> {
    let cd = space.quasi_triangle_constant();
    if k < 2.0 * cd {
        return Err(Error::PreconditionViolated(format!("k = {k} below 2 c_d = {}", 2.0 * cd)));
    }
    let l1: f64 = f.iter().zip(space.masses()).map(|(a, m)| a.abs() * m).sum();
    if (0..space.len()).any(|x| f[x] != 0.0 && !ball.contains(x)) {
        return Err(Error::PreconditionViolated("f is not supported in the ball".into()));
    }
    let mean: f64 = f.iter().zip(space.masses()).map(|(a, m)| a * m).sum();
    if mean.abs() > 1e-10 * l1 {
        return Err(Error::PreconditionViolated(format!("f has mean {mean}")));
    }
    let tf = t.apply(f);
    let big = space.ball(ball.center, k * ball.radius);
    let lhs: f64 = (0..space.len()).filter(|&x| !big.contains(x)).map(|x| space.mass(x) * tf[x].abs()).sum();
    let ratio = if l1 == 0.0 { 0.0 } else { lhs / l1 };
    Ok((lhs, l1, ratio))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weak_norm_of_indicator() {
        let s = FiniteSpace::uniform_line(4);
        assert_eq!(weak_l1_norm(&[2.0, 0.0, 0.0, 0.0], &s), 2.0);
        assert_eq!(weak_l1_norm(&[1.0, 1.0, 0.5, 0.0], &s), 2.0);
    }

    #[test]
    fn adjoint_pairing() {
        let s = FiniteSpace::uniform_line(3);
        let t = KernelOperator::new((0..9).map(|i| i as f64 - 4.0).collect(), &s).unwrap();
        let f = [1.0, -2.0, 0.5];
        let g = [0.3, 1.0, -1.0];
        let m = s.masses();
        let lhs: f64 = (0..3).map(|x| t.apply(&f)[x] * g[x] * m[x]).sum();
        let rhs: f64 = (0..3).map(|x| f[x] * t.apply_adjoint(&g)[x] * m[x]).sum();
        assert!((lhs - rhs).abs() < 1e-12);
    }
}
