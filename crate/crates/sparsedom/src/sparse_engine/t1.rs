//! Sparse domination from Hörmander and testing hypotheses.

use serde::Serialize;

use crate::convex_body::VectorField;
use crate::dyadic::DyadicSystem;
use crate::error::{Error, Hypothesis, Result};
use crate::operators::hormander::hormander_constants;
use crate::operators::kernel::KernelOperator;
use crate::operators::testing::{t1_testing_condition, TestingReport};
use crate::space::FiniteSpace;
use crate::sparse_engine::config::{base_config, power_tail, sharp_family, sharp_ratios, t_family, t_ratios, Instance, LevelSource};
use crate::sparse_engine::decompose::{sparse_dominate, SparseDecomposition};

/// Largest values accepted as finite for each hypothesis.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct T1Limits {
    pub hormander: f64,
    pub adjoint_hormander: f64,
    pub testing: f64,
    /// Random restarts of the testing search.
    pub restarts: usize,
    pub seed: u64,
}

impl Default for T1Limits {
    fn default() -> Self {
        T1Limits { hormander: 1e6, adjoint_hormander: 1e6, testing: 1e6, restarts: 8, seed: 0 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct T1Hypotheses {
    pub r: f64,
    /// `H_{r,1}` of the kernel.
    pub hormander: f64,
    /// `H_{1,1}` of the adjoint kernel.
    pub adjoint_hormander: f64,
    pub testing: TestingReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct T1Decomposition {
    pub hypotheses: T1Hypotheses,
    pub decomposition: SparseDecomposition,
}

/// Measures the three hypotheses and reports every one above its limit.
pub fn check_t1_hypotheses(t: &KernelOperator, space: &FiniteSpace, r: f64, limits: &T1Limits) -> Result<T1Hypotheses> {
    if !(r > 1.0) {
        return Err(Error::InvalidArgument(format!("r = {r} must exceed 1")));
    }
    let hormander = hormander_constants(t, r, space).0;
    let adjoint_hormander = hormander_constants(t, 1.0, space).1;
    let testing = t1_testing_condition(t, space, limits.restarts, limits.seed);
    let mut failed = Vec::new();
    if !(hormander <= limits.hormander) {
        failed.push(Hypothesis::HormanderFirstSlot);
    }
    if !(adjoint_hormander <= limits.adjoint_hormander) {
        failed.push(Hypothesis::AdjointHormander);
    }
    if !(testing.ratio <= limits.testing) {
        failed.push(Hypothesis::TestingCondition);
    }
    if !failed.is_empty() {
        return Err(Error::HypothesisFailed(failed));
    }
    Ok(T1Hypotheses { r, hormander, adjoint_hormander, testing })
}

/// Checks the hypotheses, measures `c'` and `C'` on the instance family
/// (`q = 1`, `r'`-averages for the sharp function) and decomposes with
/// `ψ(λ) = (2cc'/λ)²`, `φ(λ) = C'/λ`.
pub fn t1_sparse(f: &VectorField, t: &KernelOperator, sys: &DyadicSystem, space: &FiniteSpace, alpha: f64, r: f64, limits: &T1Limits) -> Result<T1Decomposition> {
    let hyp = check_t1_hypotheses(t, space, r, limits)?;
    let rp = if r.is_infinite() { 1.0 } else { r / (r - 1.0) };
    let inst = Instance::new(t, sys, space, f, rp, alpha)?;
    let mut cfg = base_config(&inst, 1.0, rp)?;
    let c = hyp.testing.ratio;
    // sup_α α^{1/2} μ{|T(gχ_B)| > α⟨|g|⟩_B}/μ(B) = 2cc'
    let mut a: f64 = 0.0;
    for tp in t_family(&inst)? {
        if let Some(mut v) = t_ratios(&inst, &tp, 1.0) {
            a = a.max(power_tail(&mut v, 0.5, tp.ball.measure));
        }
    }
    let mut big: f64 = 0.0;
    for tp in sharp_family(&inst)? {
        if let Some(mut v) = sharp_ratios(&inst, &tp, rp) {
            big = big.max(power_tail(&mut v, 1.0, tp.ball.measure));
        }
    }
    let c_prime = if c > 0.0 { a / (2.0 * c) } else { 0.0 };
    cfg.psi_rho = (a / cfg.rho).powi(2);
    cfg.phi_rho = big / cfg.rho;
    cfg.source = LevelSource::T1 { c, c_prime, big_c_prime: big };
    let cfg = cfg.finish()?;
    let decomposition = sparse_dominate(&inst, &cfg)?;
    Ok(T1Decomposition { hypotheses: hyp, decomposition })
}
