//! The decomposition rewritten over cubes of an adjacent family that contain
//! the dilated balls.

use nalgebra::DVector;
use serde::Serialize;

use crate::convex_body::{RepresentationKernel, VectorField};
use crate::dyadic::{certify_sparse, AdjacentFamily, CubeFamily, SparseCertificate};
use crate::error::{Error, Result};
use crate::space::FiniteSpace;
use crate::sparse_engine::decompose::SparseDecomposition;

#[derive(Debug, Clone, Serialize)]
pub struct MultiEntry {
    pub system: usize,
    /// The cube `P'` containing `αP`.
    pub cube: usize,
    /// Index of `P` in the decomposition.
    pub source: usize,
    /// `k_{P'}` on `P × P'`.
    pub kernel: RepresentationKernel,
}

#[derive(Debug, Clone, Serialize)]
pub struct MultiSystemForm {
    pub m: usize,
    /// `max_P μ(P')/μ(P)`.
    pub c: f64,
    /// `κ c^{1/s}`.
    pub scale: f64,
    pub entries: Vec<MultiEntry>,
    /// Families `𝒮_j` as multisets of cubes of system `j`.
    pub families: Vec<CubeFamily>,
    /// `1/(2c)`-sparseness of each `𝒮_j`.
    pub sparse: Vec<SparseCertificate>,
    pub max_mixed_norm: f64,
    pub reconstruction_error: f64,
}

impl MultiSystemForm {
    /// `κ c^{1/s} Σ avg_{P'} k_{P'}(x,·) f χ_P(x)`.
    pub fn evaluate(&self, f: &VectorField) -> Vec<DVector<f64>> {
        let mut out = vec![DVector::zeros(f.dim); f.len()];
        for e in &self.entries {
            for (&x, v) in e.kernel.rows.iter().zip(e.kernel.apply(f)) {
                out[x] += v * self.scale;
            }
        }
        out
    }

    pub fn certified(&self) -> bool {
        self.sparse.iter().all(|s| s.is_sparse()) && self.max_mixed_norm <= 1.0 + 1e-9 && self.reconstruction_error <= 1e-7
    }
}

/// For each `P`, picks the cube of least diameter (then measure) among the
/// systems that contains `αP`, and rescales `k_P` by
/// `μ(P')/μ(αP) c^{-1/s}` with zero extension to `P'`.
pub fn to_multi_system_form(dec: &SparseDecomposition, adj: &AdjacentFamily, space: &FiniteSpace, f: &VectorField, tf: &[DVector<f64>]) -> Result<MultiSystemForm> {
    let m = adj.m();
    if dec.cubes.is_empty() {
        return Ok(MultiSystemForm {
            m,
            c: 1.0,
            scale: dec.kappa,
            entries: Vec::new(),
            families: vec![CubeFamily::default(); m],
            sparse: vec![SparseCertificate::Sparse { eta: 0.5, witnesses: Vec::new() }; m],
            max_mixed_norm: 0.0,
            reconstruction_error: 0.0,
        });
    }
    let diams: Vec<Vec<f64>> = adj.systems.iter().map(|s| s.diameters(space)).collect();
    let s = dec.config.s;
    let mut picks = Vec::with_capacity(dec.cubes.len());
    let mut c: f64 = 1.0;
    for sc in &dec.cubes {
        let region = &sc.kernel.region;
        // αP as a closed ball: radius of its farthest member
        let radius = region.iter().map(|&y| space.dist(sc.center, y)).fold(0.0, f64::max);
        let mut best: Option<(usize, usize, f64, f64)> = None;
        for (j, sys) in adj.systems.iter().enumerate() {
            let q = sys.smallest_containing(region);
            let key = (diams[j][q], sys.cube(q).measure);
            if best.map_or(true, |b| key.0 < b.2 || (key.0 == b.2 && key.1 < b.3)) {
                best = Some((j, q, key.0, key.1));
            }
        }
        let (j, q, diam, measure) = best.expect("at least one system");
        if diam > adj.gamma * radius * (1.0 + 1e-9) {
            return Err(Error::CoverageFailed { m_max: m });
        }
        let own = space.measure(&sc.kernel.rows);
        c = c.max(measure / own);
        picks.push((j, q, measure));
    }
    let damp = c.powf(-1.0 / s);
    let mut entries = Vec::with_capacity(picks.len());
    let mut families = vec![CubeFamily::default(); m];
    for (i, (sc, &(j, q, measure))) in dec.cubes.iter().zip(&picks).enumerate() {
        let members = &adj.systems[j].cube(q).members;
        let pos: std::collections::HashMap<usize, usize> = members.iter().enumerate().map(|(k, &y)| (y, k)).collect();
        let factor = measure / sc.region_measure * damp;
        let values = sc
            .kernel
            .values
            .iter()
            .map(|row| {
                let mut out = vec![0.0; members.len()];
                for (&y, &v) in sc.kernel.region.iter().zip(row) {
                    out[pos[&y]] = factor * v;
                }
                out
            })
            .collect();
        let weights = members.iter().map(|&y| space.mass(y) / measure).collect();
        let kernel = RepresentationKernel { s, rows: sc.kernel.rows.clone(), region: members.clone(), weights, values };
        families[j].cubes.push(q);
        entries.push(MultiEntry { system: j, cube: q, source: i, kernel });
    }
    let sparse = families.iter().zip(&adj.systems).map(|(fam, sys)| certify_sparse(sys, space, fam, 1.0 / (2.0 * c))).collect();
    let max_mixed_norm = entries.iter().map(|e| e.kernel.mixed_norm()).fold(0.0, f64::max);
    let mut form = MultiSystemForm { m, c, scale: dec.kappa * c.powf(1.0 / s), entries, families, sparse, max_mixed_norm, reconstruction_error: 0.0 };
    form.reconstruction_error = crate::sparse_engine::decompose::reconstruction_error(tf, &form.evaluate(f));
    Ok(form)
}
