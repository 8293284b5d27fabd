//! The weighted bilinear sparse form and the stopping family of the
//! weighted maximal function.

use nalgebra::DVector;
use serde::Serialize;

use crate::convex_body::VectorField;
use crate::dyadic::DyadicSystem;
use crate::error::Result;
use crate::matrix_weight::{reducing_matrix, MatrixWeight, Side};
use crate::space::{Ball, FiniteSpace};
use crate::sparse_engine::decompose::SparseDecomposition;

/// `Σ_Q κ/μ(αQ) Σ_{x∈Q} Σ_{y∈αQ} μ_x μ_y |k_Q(x,y)| |⟨W^{-1/p}(y) f(y), W^{1/p}(x) g(x)⟩|`,
/// an upper bound for `|∫ ⟨W^{1/p} T(W^{-1/p} f), g⟩|` when the
/// decomposition was built for `W^{-1/p} f`.
pub fn bilinear_sparse_form(dec: &SparseDecomposition, w: &MatrixWeight, p: f64, f: &VectorField, g: &VectorField, space: &FiniteSpace) -> f64 {
    let pos = w.powers(1.0 / p);
    let neg = w.powers(-1.0 / p);
    let wf: Vec<DVector<f64>> = (0..f.len()).map(|y| &neg[y] * f.at(y)).collect();
    let wg: Vec<DVector<f64>> = (0..g.len()).map(|x| &pos[x] * g.at(x)).collect();
    let mut total = 0.0;
    for c in &dec.cubes {
        let k = &c.kernel;
        let mut sum = 0.0;
        for (&x, row) in k.rows.iter().zip(&k.values) {
            for ((&y, &wy), &kv) in k.region.iter().zip(&k.weights).zip(row) {
                if kv != 0.0 {
                    sum += space.mass(x) * wy * kv.abs() * wf[y].dot(&wg[x]).abs();
                }
            }
        }
        total += dec.kappa * sum;
    }
    total
}

#[derive(Debug, Clone, Serialize)]
pub struct StoppingNode {
    pub cube: usize,
    pub generation: usize,
    /// Maximal `L ⊆ J` with `⟨v_J⟩_L > 4⟨v_J⟩_J`.
    pub children: Vec<usize>,
    /// `Σ μ(L) / μ(J)`.
    pub packing: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct StoppingFamily {
    pub nodes: Vec<StoppingNode>,
    pub max_packing: f64,
}

impl StoppingFamily {
    pub fn cubes(&self) -> Vec<usize> {
        self.nodes.iter().map(|n| n.cube).collect()
    }

    pub fn certified(&self) -> bool {
        self.max_packing <= 0.25 * (1.0 + 1e-12)
    }
}

/// The ball of a cube's members, centered at the cube's center with radius
/// `C₀ δ^k`.
fn cube_ball(sys: &DyadicSystem, q: usize) -> Ball {
    let c = sys.cube(q);
    Ball { center: c.center, radius: sys.big_c0 * sys.side(q), members: c.members.clone(), measure: c.measure }
}

/// One generation below `J`: with `v = |𝒲_J W^{-1/p} f|`, where `𝒲_J`
/// reduces the `p`-average norm of `W^{1/p}` on `J`, the maximal cubes with
/// `⟨v⟩_L > 4⟨v⟩_J`.
pub fn stopping_children(w: &MatrixWeight, p: f64, f: &VectorField, j: usize, sys: &DyadicSystem, space: &FiniteSpace) -> Result<(Vec<usize>, f64)> {
    let cube = sys.cube(j);
    let red = reducing_matrix(w, &cube_ball(sys, j), p, Side::Primal, space)?;
    let neg = w.powers(-1.0 / p);
    let mut v = vec![0.0; space.len()];
    for &y in &cube.members {
        v[y] = (&red.matrix * (&neg[y] * f.at(y))).norm();
    }
    let avg = |q: usize| {
        let c = sys.cube(q);
        c.members.iter().map(|&y| v[y] * space.mass(y)).sum::<f64>() / c.measure
    };
    let top = avg(j);
    let mut out = Vec::new();
    if top == 0.0 {
        return Ok((out, 0.0));
    }
    let mut stack: Vec<usize> = cube.children.iter().rev().copied().collect();
    while let Some(q) = stack.pop() {
        if avg(q) > 4.0 * top {
            out.push(q);
        } else {
            stack.extend(sys.cube(q).children.iter().rev().copied());
        }
    }
    let packing = out.iter().fold(0.0, |a, &q| a + sys.cube(q).measure) / cube.measure;
    Ok((out, packing))
}

/// Iterates [`stopping_children`] from `J` and records the packing of every
/// generation.
pub fn maximal_stopping_family(w: &MatrixWeight, p: f64, f: &VectorField, j: usize, sys: &DyadicSystem, space: &FiniteSpace) -> Result<StoppingFamily> {
    let mut nodes = Vec::new();
    if sys.cube(j).members.iter().all(|&y| f.at(y).iter().all(|&v| v == 0.0)) {
        return Ok(StoppingFamily { nodes, max_packing: 0.0 });
    }
    let mut stack = vec![(j, 0usize)];
    let mut max_packing: f64 = 0.0;
    while let Some((q, gen)) = stack.pop() {
        let (children, packing) = stopping_children(w, p, f, q, sys, space)?;
        max_packing = max_packing.max(packing);
        for &c in children.iter().rev() {
            stack.push((c, gen + 1));
        }
        nodes.push(StoppingNode { cube: q, generation: gen, children, packing });
    }
    Ok(StoppingFamily { nodes, max_packing })
}
