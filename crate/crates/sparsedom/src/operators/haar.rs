//! Haar systems of a dyadic system and Haar multipliers with variable symbol.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::convex_body::VectorField;
use crate::dyadic::DyadicSystem;
use crate::error::{Error, Result};
use crate::operators::kernel::KernelOperator;
use crate::space::FiniteSpace;

#[derive(Debug, Clone, Serialize)]
pub struct HaarFunction {
    pub cube: usize,
    /// Points of the support cube, ascending.
    pub support: Vec<usize>,
    /// Values on `support`.
    pub values: Vec<f64>,
    /// Children of the cube in Gram–Schmidt order and the value on each.
    pub children: Vec<usize>,
    pub child_values: Vec<f64>,
}

impl HaarFunction {
    pub fn value(&self, x: usize) -> f64 {
        match self.support.binary_search(&x) {
            Ok(i) => self.values[i],
            Err(_) => 0.0,
        }
    }

    pub fn dense(&self, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n];
        for (&x, &v) in self.support.iter().zip(&self.values) {
            out[x] = v;
        }
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HaarSystem {
    pub functions: Vec<HaarFunction>,
    /// Functions attached to each cube.
    pub index: Vec<Vec<usize>>,
    pub masses: Vec<f64>,
    pub total_mass: f64,
}

impl HaarSystem {
    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    pub fn num_points(&self) -> usize {
        self.masses.len()
    }

    /// `⟨f, h⟩` for every Haar function.
    pub fn coefficients(&self, f: &[f64]) -> Vec<f64> {
        self.functions
            .iter()
            .map(|h| h.support.iter().zip(&h.values).map(|(&x, v)| f[x] * v * self.masses[x]).sum())
            .collect()
    }

    /// The mean `⟨f⟩_X`; the projection onto constants is this value everywhere.
    pub fn mean(&self, f: &[f64]) -> f64 {
        f.iter().zip(&self.masses).map(|(a, m)| a * m).sum::<f64>() / self.total_mass
    }

    /// `mean + Σ_h c_h h`.
    pub fn synthesize(&self, coeffs: &[f64], mean: f64) -> Vec<f64> {
        let mut out = vec![mean; self.num_points()];
        for (h, c) in self.functions.iter().zip(coeffs) {
            for (&x, v) in h.support.iter().zip(&h.values) {
                out[x] += c * v;
            }
        }
        out
    }
}

/// Orthonormal Haar functions of every cube with at least two children.
/// Children are ordered by lowest point and orthonormalized against the
/// constant on the cube by modified Gram–Schmidt.
pub fn build_haar_system(sys: &DyadicSystem, space: &FiniteSpace) -> Result<HaarSystem> {
    let masses = space.masses().to_vec();
    let mut functions = Vec::new();
    let mut index = vec![Vec::new(); sys.len()];
    for q in &sys.cubes {
        let m = q.children.len();
        if m < 2 {
            continue;
        }
        let mut children = q.children.clone();
        children.sort_by_key(|&c| sys.cube(c).members[0]);
        let w: Vec<f64> = children.iter().map(|&c| sys.cube(c).measure).collect();
        if w.iter().any(|&v| v <= 0.0) {
            return Err(Error::DegenerateCube { cube: q.id });
        }
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).zip(&w).map(|((x, y), m)| x * y * m).sum::<f64>();
        let mut basis: Vec<Vec<f64>> = vec![vec![1.0 / q.measure.sqrt(); m]];
        for j in 0..m - 1 {
            let mut v = vec![0.0; m];
            v[j] = 1.0;
            for _ in 0..2 {
                for b in &basis {
                    let c = dot(&v, b);
                    for (vi, bi) in v.iter_mut().zip(b) {
                        *vi -= c * bi;
                    }
                }
            }
            let norm = dot(&v, &v).sqrt();
            if norm <= 1e-300 {
                return Err(Error::DegenerateCube { cube: q.id });
            }
            v.iter_mut().for_each(|a| *a /= norm);
            basis.push(v);
        }
        for cv in basis.into_iter().skip(1) {
            let mut pairs: Vec<(usize, f64)> = Vec::with_capacity(q.members.len());
            for (&c, &v) in children.iter().zip(&cv) {
                pairs.extend(sys.cube(c).members.iter().map(|&x| (x, v)));
            }
            pairs.sort_by_key(|p| p.0);
            index[q.id].push(functions.len());
            functions.push(HaarFunction {
                cube: q.id,
                support: pairs.iter().map(|p| p.0).collect(),
                values: pairs.iter().map(|p| p.1).collect(),
                children: children.clone(),
                child_values: cv,
            });
        }
    }
    let total_mass = space.total_mass();
    Ok(HaarSystem { functions, index, masses, total_mass })
}

/// A symbol `η(x, h)`, stored on the support of each Haar function and 0
/// outside it.
#[derive(Debug, Clone, Serialize)]
pub struct EtaSymbol {
    pub values: Vec<Vec<f64>>,
}

impl EtaSymbol {
    pub fn from_fn(haar: &HaarSystem, mut eta: impl FnMut(usize, usize) -> f64) -> Self {
        let values = haar
            .functions
            .iter()
            .enumerate()
            .map(|(i, h)| h.support.iter().map(|&x| eta(x, i)).collect())
            .collect();
        EtaSymbol { values }
    }

    pub fn constant(haar: &HaarSystem, c: f64) -> Self {
        Self::from_fn(haar, |_, _| c)
    }

    pub fn eval(&self, haar: &HaarSystem, x: usize, h: usize) -> f64 {
        match haar.functions[h].support.binary_search(&x) {
            Ok(i) => self.values[h][i],
            Err(_) => 0.0,
        }
    }

    /// The ±1 quarter pattern: `+1` on the first grandchild of each child of
    /// `Q(h)`, `-1` on the second, `+1` on children that are leaves.
    pub fn petermichl(haar: &HaarSystem, sys: &DyadicSystem) -> Result<Self> {
        let quarters = |h: &HaarFunction| -> Result<Vec<(usize, f64)>> {
            let mut out = Vec::new();
            if h.children.len() != 2 {
                return Err(Error::NotBinary { cube: h.cube });
            }
            for &c in &h.children {
                let cube = sys.cube(c);
                match cube.children.len() {
                    0 => out.extend(cube.members.iter().map(|&x| (x, 1.0))),
                    2 => {
                        let mut g = cube.children.clone();
                        g.sort_by_key(|&q| sys.cube(q).members[0]);
                        out.extend(sys.cube(g[0]).members.iter().map(|&x| (x, 1.0)));
                        out.extend(sys.cube(g[1]).members.iter().map(|&x| (x, -1.0)));
                    }
                    _ => return Err(Error::NotBinary { cube: c }),
                }
            }
            out.sort_by_key(|p| p.0);
            Ok(out)
        };
        let mut values = Vec::with_capacity(haar.len());
        for h in &haar.functions {
            values.push(quarters(h)?.into_iter().map(|p| p.1).collect());
        }
        Ok(EtaSymbol { values })
    }

    /// Values drawn uniformly from `[-amplitude, amplitude]`, constant on the
    /// grandchildren of `Q(h)` (on children without grandchildren).
    pub fn random(haar: &HaarSystem, sys: &DyadicSystem, amplitude: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut values = Vec::with_capacity(haar.len());
        for h in &haar.functions {
            let mut pairs = Vec::new();
            for &c in &h.children {
                let cube = sys.cube(c);
                if cube.children.is_empty() {
                    let v = rng.gen_range(-amplitude..=amplitude);
                    pairs.extend(cube.members.iter().map(|&x| (x, v)));
                } else {
                    for &g in &cube.children {
                        let v = rng.gen_range(-amplitude..=amplitude);
                        pairs.extend(sys.cube(g).members.iter().map(|&x| (x, v)));
                    }
                }
            }
            pairs.sort_by_key(|p| p.0);
            values.push(pairs.into_iter().map(|p| p.1).collect());
        }
        EtaSymbol { values }
    }
}

/// `T_η f(x) = Σ_h η(x,h) ⟨f,h⟩ h(x)`.
pub fn haar_multiplier(haar: &HaarSystem, eta: &EtaSymbol, f: &[f64]) -> Vec<f64> {
    let coeffs = haar.coefficients(f);
    let mut out = vec![0.0; haar.num_points()];
    for (i, (h, c)) in haar.functions.iter().zip(&coeffs).enumerate() {
        if *c == 0.0 {
            continue;
        }
        for ((&x, v), e) in h.support.iter().zip(&h.values).zip(&eta.values[i]) {
            out[x] += e * c * v;
        }
    }
    out
}

/// Componentwise `T_η` on a vector field.
pub fn haar_multiplier_vec(haar: &HaarSystem, eta: &EtaSymbol, f: &VectorField) -> VectorField {
    let coords: Vec<Vec<f64>> = (0..f.dim).map(|i| haar_multiplier(haar, eta, &f.coordinate(i))).collect();
    VectorField::from_coordinates(&coords)
}

/// Smallest constants in `|η(x,h)| ≤ K_a` and
/// `|η(x',h) − η(x,h)| ≤ K_b δ(x,x')/μ(Q(h))`, where `space` carries the
/// dyadic metric `δ`. Pairs range over `Q(h)`: extending `η(·,h)` by a
/// constant value of it outside `Q(h)` never increases `K_b`, since points
/// outside are farther than `μ(Q(h))` from every point inside.
pub fn eta_regularity_check(eta: &EtaSymbol, haar: &HaarSystem, sys: &DyadicSystem, space: &FiniteSpace) -> (f64, f64, bool) {
    let mut ka: f64 = 0.0;
    let mut kb: f64 = 0.0;
    for (i, h) in haar.functions.iter().enumerate() {
        let mq = sys.cube(h.cube).measure;
        let vals = &eta.values[i];
        for (a, &x) in h.support.iter().enumerate() {
            ka = ka.max(vals[a].abs());
            for (b, &xp) in h.support.iter().enumerate().skip(a + 1) {
                let diff = (vals[a] - vals[b]).abs();
                if diff > 0.0 {
                    kb = kb.max(diff * mq / space.dist(x, xp));
                }
            }
        }
    }
    (ka, kb, ka.is_finite() && kb.is_finite())
}

/// A Haar multiplier as a kernel operator together with the measured
/// `max_{x≠y} |N(x,y)| μ(Q(x,y))`.
#[derive(Debug, Clone, Serialize)]
pub struct HaarKernel {
    pub operator: KernelOperator,
    pub bound: f64,
    pub witness: (usize, usize),
}

/// `N(x,y) = Σ_h η(x,h) h(x) h(y)`. With `bound = Some(K)`, fails when
/// `|N(x,y)| μ(Q(x,y)) > K` for some `x ≠ y`.
pub fn kernel_from_haar(haar: &HaarSystem, eta: &EtaSymbol, sys: &DyadicSystem, space: &FiniteSpace, bound: Option<f64>) -> Result<HaarKernel> {
    let n = space.len();
    let mut k = vec![0.0; n * n];
    for (i, h) in haar.functions.iter().enumerate() {
        for ((&x, &hx), &e) in h.support.iter().zip(&h.values).zip(&eta.values[i]) {
            let a = e * hx;
            if a == 0.0 {
                continue;
            }
            let row = &mut k[x * n..(x + 1) * n];
            for (&y, &hy) in h.support.iter().zip(&h.values) {
                row[y] += a * hy;
            }
        }
    }
    let chains: Vec<Vec<usize>> = (0..n).map(|x| sys.chain(x)).collect();
    let mut best = (0.0, (0, 0));
    for x in 0..n {
        for y in 0..n {
            if x == y {
                continue;
            }
            let v = k[x * n + y].abs();
            if v == 0.0 {
                continue;
            }
            let q = chains[x].iter().find(|&&c| sys.contains(c, y)).copied().unwrap_or(sys.root);
            let r = v * sys.cube(q).measure;
            if r > best.0 {
                best = (r, (x, y));
            }
        }
    }
    if let Some(b) = bound {
        if best.0 > b * (1.0 + 1e-12) {
            let (x, y) = best.1;
            return Err(Error::BoundViolated { x, y, ratio: best.0 / b });
        }
    }
    Ok(HaarKernel { operator: KernelOperator::new(k, space)?, bound: best.0, witness: best.1 })
}
