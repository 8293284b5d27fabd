//! Empirical checks of the weighted norm inequalities.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::convex_body::VectorField;
use crate::error::{Error, Result};
use crate::harness::scenario::{build_weight, fingerprint, Built, Scenario, WeightSpec};
use crate::matrix_weight::{a1_constant, ap_constant, sc_ainfty_constant, MatrixWeight};
use crate::operators::{christ_goldberg_maximal, hormander_constants, weak_l1_norm, KernelOperator};
use crate::space::FiniteSpace;

/// One inequality on one instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub scenario_id: String,
    pub inequality_id: String,
    pub n: usize,
    #[serde(rename = "N")]
    pub points: usize,
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs / rhs`, and 0 when `lhs = 0`.
    pub ratio: f64,
    pub weight_constants: BTreeMap<String, f64>,
    pub seed: u64,
    pub fingerprint: String,
}

impl BoundReport {
    pub fn passes(&self) -> bool {
        self.ratio.is_finite() && self.ratio >= 0.0
    }

    /// `weight_constants` as `key=value;…`.
    pub fn flat_constants(&self) -> String {
        self.weight_constants.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(";")
    }
}

fn conj(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else {
        p / (p - 1.0)
    }
}

pub fn lp_norm(v: &[f64], p: f64, space: &FiniteSpace) -> f64 {
    v.iter().zip(space.masses()).map(|(a, m)| m * a.abs().powf(p)).sum::<f64>().powf(1.0 / p)
}

fn field_norms(f: &VectorField) -> Vec<f64> {
    f.values.iter().map(|v| v.norm()).collect()
}

fn apply_pointwise(m: &[DMatrix<f64>], f: &VectorField) -> VectorField {
    VectorField { dim: f.dim, values: f.values.iter().zip(m).map(|(v, a)| a * v).collect() }
}

fn negative_power_weight(w: &MatrixWeight, t: f64) -> Result<MatrixWeight> {
    MatrixWeight::new(w.powers(t).as_ref().clone())
}

/// Lazily computed weight and operator constants of one instance.
pub struct Context<'a> {
    pub scenario: &'a Scenario,
    pub built: &'a Built,
    pub fingerprint: String,
    cache: BTreeMap<String, f64>,
}

impl<'a> Context<'a> {
    pub fn new(scenario: &'a Scenario, built: &'a Built) -> Self {
        Context { scenario, built, fingerprint: fingerprint(built), cache: BTreeMap::new() }
    }

    fn memo(&mut self, key: String, f: impl FnOnce(&Built) -> Result<f64>) -> Result<(String, f64)> {
        if let Some(&v) = self.cache.get(&key) {
            return Ok((key, v));
        }
        let v = f(self.built)?;
        if !v.is_finite() {
            return Err(Error::NumericalFailure(format!("{key} is not finite")));
        }
        self.cache.insert(key.clone(), v);
        Ok((key, v))
    }

    /// `[W]_{A_q}`, with `q = 1` the `A_1` constant.
    pub fn aq(&mut self, q: f64) -> Result<(String, f64)> {
        if q == 1.0 {
            self.memo("A_1".into(), |b| a1_constant(&b.weight, &b.space))
        } else {
            self.memo(format!("A_{q}"), |b| ap_constant(&b.weight, q, &b.space))
        }
    }

    /// `[W]_{A^{sc}_{∞,q}}`.
    pub fn sc(&mut self, q: f64) -> Result<(String, f64)> {
        self.memo(format!("sc_{q}(W)"), |b| {
            let n = b.weight.dim();
            Ok(sc_ainfty_constant(&b.weight, q, &b.space, 2 * n * n)?.value)
        })
    }

    /// `[W^{-1/(q-1)}]_{A^{sc}_{∞,q'}}`.
    pub fn sc_dual(&mut self, q: f64) -> Result<(String, f64)> {
        self.memo(format!("sc_{}(W^-1/{})", conj(q), q - 1.0), |b| {
            let v = negative_power_weight(&b.weight, -1.0 / (q - 1.0))?;
            let n = v.dim();
            Ok(sc_ainfty_constant(&v, conj(q), &b.space, 2 * n * n)?.value)
        })
    }

    /// First-slot `L^{r'}`-Hörmander constant of the operator.
    pub fn hormander(&mut self, r: f64) -> Result<(String, f64)> {
        let rp = conj(r);
        self.memo(format!("H_{rp}"), |b| Ok(hormander_constants(&b.operator, rp, &b.space).0))
    }

    fn report(&self, id: &str, lhs: f64, rhs: f64, used: &[(String, f64)]) -> BoundReport {
        let s = self.scenario;
        BoundReport {
            scenario_id: s.id.clone(),
            inequality_id: id.into(),
            n: self.built.f.dim,
            points: self.built.space.len(),
            p: s.p,
            q: s.q,
            r: s.r,
            lhs,
            rhs,
            ratio: if lhs == 0.0 { 0.0 } else { lhs / rhs },
            weight_constants: used.iter().cloned().collect(),
            seed: s.seed,
            fingerprint: self.fingerprint.clone(),
        }
    }
}

/// `‖M_{p,W} f‖_p` against `[W]_{A_p}^{1/p} [W^{-1/(p-1)}]_{A^{sc}_{∞,p'}}^{1/p} ‖f‖_p`
/// (`maximal-ap`) and, when `q < p`, against `[W]_{A_q}^{1/p} ‖f‖_p`
/// (`maximal-aq`).
pub fn verify_maximal_bound(ctx: &mut Context) -> Result<Vec<BoundReport>> {
    let (p, q) = (ctx.scenario.p, ctx.scenario.q);
    let b = ctx.built;
    let lhs = lp_norm(&christ_goldberg_maximal(&b.weight, p, &b.f, &b.space), p, &b.space);
    let fp = lp_norm(&field_norms(&b.f), p, &b.space);
    let ap = ctx.aq(p)?;
    let dual = ctx.sc_dual(p)?;
    let rhs = ap.1.powf(1.0 / p) * dual.1.powf(1.0 / p) * fp;
    let mut out = vec![ctx.report("maximal-ap", lhs, rhs, &[ap, dual])];
    if q < p {
        let aq = ctx.aq(q)?;
        let rhs = aq.1.powf(1.0 / p) * fp;
        out.push(ctx.report("maximal-aq", lhs, rhs, &[aq]));
    }
    Ok(out)
}

/// `‖W^{1/p} T(W^{-1/p} f)‖_p` against the `A_{p/r}` bound (`cz-apr`, when
/// `r < p`) and the `A_q` bound with factor `(p/(rq))'` (`cz-aq`, when
/// `q < p/r`). Fails when the `L^{r'}`-Hörmander constant is not finite.
pub fn verify_cz_bound(ctx: &mut Context) -> Result<Vec<BoundReport>> {
    let (p, q, r) = (ctx.scenario.p, ctx.scenario.q, ctx.scenario.r);
    let b = ctx.built;
    let h = ctx.hormander(r)?;
    let g = apply_pointwise(&b.weight.powers(-1.0 / p), &b.f);
    let tg = b.operator.apply_vec(&g);
    let lhs = lp_norm(&field_norms(&apply_pointwise(&b.weight.powers(1.0 / p), &tg)), p, &b.space);
    let fp = lp_norm(&field_norms(&b.f), p, &b.space);
    let mut out = Vec::new();
    if r < p {
        let pr = p / r;
        let a = ctx.aq(pr)?;
        let dual = ctx.sc_dual(pr)?;
        let sc = ctx.sc(pr)?;
        let rhs = a.1.powf(1.0 / p) * dual.1.powf(1.0 / p) * sc.1.powf(1.0 / conj(p)) * fp;
        out.push(ctx.report("cz-apr", lhs, rhs, &[a, dual, sc, h.clone()]));
    }
    if q < p / r {
        let a = ctx.aq(q)?;
        let sc = ctx.sc(q)?;
        let factor = conj(p / (r * q));
        let rhs = factor * a.1.powf(1.0 / p) * sc.1.powf(1.0 / conj(p)) * fp;
        out.push(ctx.report("cz-aq", lhs, rhs, &[a, sc, h]));
    }
    Ok(out)
}

/// Weak-type endpoint: `sup_t t μ{|W T(W^{-1} f)| > t}` (`endpoint-t`) and
/// the same for `M_{W,1} f` (`endpoint-m`), both against
/// `[W]_{A_1} [W]_{A^{sc}_{∞,1}} ‖f‖_1`.
pub fn verify_endpoint(ctx: &mut Context) -> Result<Vec<BoundReport>> {
    let b = ctx.built;
    let g = apply_pointwise(&b.weight.powers(-1.0), &b.f);
    let tg = b.operator.apply_vec(&g);
    let h = field_norms(&apply_pointwise(&b.weight.powers(1.0), &tg));
    let lhs_t = weak_l1_norm(&h, &b.space);
    let lhs_m = weak_l1_norm(&christ_goldberg_maximal(&b.weight, 1.0, &b.f, &b.space), &b.space);
    let f1 = lp_norm(&field_norms(&b.f), 1.0, &b.space);
    let a1 = ctx.aq(1.0)?;
    let sc = ctx.sc(1.0)?;
    let rhs = a1.1 * sc.1 * f1;
    let used = [a1, sc];
    Ok(vec![ctx.report("endpoint-t", lhs_t, rhs, &used), ctx.report("endpoint-m", lhs_m, rhs, &used)])
}

/// `‖W^{1/2} T W^{-1/2}‖_{L² → L²}` with `T` acting componentwise: the
/// largest singular value of `√μ_x √μ_y K(x,y) W^{1/2}(x) W^{-1/2}(y)`.
pub fn weighted_operator_norm(t: &KernelOperator, w: &MatrixWeight, space: &FiniteSpace) -> f64 {
    let n = w.dim();
    let big = space.len();
    let pos = w.powers(0.5);
    let neg = w.powers(-0.5);
    let mut m = DMatrix::zeros(n * big, n * big);
    for x in 0..big {
        for y in 0..big {
            let k = t.at(x, y);
            if k == 0.0 {
                continue;
            }
            let block = (&pos[x] * &neg[y]) * (k * (space.mass(x) * space.mass(y)).sqrt());
            m.view_mut((x * n, y * n), (n, n)).copy_from(&block);
        }
    }
    m.singular_values().max()
}

#[derive(Debug, Clone, Serialize)]
pub struct LadderPoint {
    pub parameter: f64,
    pub a2: f64,
    pub norm: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct A2Scaling {
    pub points: Vec<LadderPoint>,
    /// Least-squares slope of `log norm` against `log [W]_{A_2}`; 0 when
    /// the constants do not vary.
    pub slope: f64,
    pub bound: f64,
}

/// Largest fitted slope accepted.
pub const A2_SLOPE_BOUND: f64 = 1.6;

impl A2Scaling {
    pub fn passes(&self) -> bool {
        self.slope.is_finite() && self.slope <= self.bound
    }

    /// Decades of `[W]_{A_2}` spanned by the ladder.
    pub fn decades(&self) -> f64 {
        let (lo, hi) = self.points.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), p| (lo.min(p.a2), hi.max(p.a2)));
        (hi / lo).log10()
    }
}

pub fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx <= 1e-24 * k {
        0.0
    } else {
        sxy / sxx
    }
}

/// Measures `[W]_{A_2}` and the weighted norm of `T` over a ladder of
/// weights and fits the growth exponent.
pub fn verify_a2_scaling(t: &KernelOperator, ladder: &[(f64, MatrixWeight)], space: &FiniteSpace) -> Result<A2Scaling> {
    let mut points = Vec::with_capacity(ladder.len());
    for (parameter, w) in ladder {
        let a2 = ap_constant(w, 2.0, space)?;
        let norm = weighted_operator_norm(t, w, space);
        points.push(LadderPoint { parameter: *parameter, a2, norm });
    }
    let used: Vec<&LadderPoint> = points.iter().filter(|p| p.norm > 0.0).collect();
    let xs: Vec<f64> = used.iter().map(|p| p.a2.ln()).collect();
    let ys: Vec<f64> = used.iter().map(|p| p.norm.ln()).collect();
    let slope = if used.len() < 2 { 0.0 } else { fit_slope(&xs, &ys) };
    Ok(A2Scaling { points, slope, bound: A2_SLOPE_BOUND })
}

/// Scalar power weights `t^a` (or rotating ones for `dim ≥ 2`) for each
/// exponent of the scenario's ladder.
pub fn ladder_weights(s: &Scenario, space: &FiniteSpace) -> Result<Vec<(f64, MatrixWeight)>> {
    s.ladder
        .iter()
        .map(|&a| {
            let spec = if s.dim == 1 { WeightSpec::Power { exponents: vec![a] } } else { WeightSpec::Rotating { exponent: a, turns: 1.0 } };
            Ok((a, build_weight(&spec, s.dim, space, s.seed)?))
        })
        .collect()
}

/// The ladder as bound reports: `lhs` the weighted norm, `rhs = [W]_{A_2}^{3/2}`.
pub fn a2_reports(ctx: &Context, scaling: &A2Scaling) -> Vec<BoundReport> {
    scaling
        .points
        .iter()
        .map(|pt| {
            let mut r = ctx.report("a2-ladder", pt.norm, pt.a2.powf(1.5), &[("A_2".into(), pt.a2), ("ladder".into(), pt.parameter)]);
            r.p = 2.0;
            r
        })
        .collect()
}

/// `e₁` everywhere, as a field of dimension `dim`.
pub fn constant_field(dim: usize, len: usize) -> VectorField {
    let mut e = DVector::zeros(dim);
    e[0] = 1.0;
    VectorField { dim, values: vec![e; len] }
}
