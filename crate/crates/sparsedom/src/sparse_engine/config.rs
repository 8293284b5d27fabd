//! Stopping parameters and their calibration on an instance.

use std::sync::OnceLock;

use nalgebra::DVector;
use serde::Serialize;

use crate::convex_body::{ConvexBodyAvg, VectorField};
use crate::dyadic::DyadicSystem;
use crate::error::{Error, Result};
use crate::operators::kernel::{weak_l1_norm, KernelOperator};
use crate::operators::maximal::{ball_dilation_pairs, maximal, sharp_grand_maximal_with};
use crate::space::{Ball, FiniteSpace};

/// How the level functions were obtained.
#[derive(Debug, Clone, Serialize)]
pub enum LevelSource {
    /// Exact level-set envelopes over the instance family.
    Measured,
    /// `ψ(λ) = (2cc'/λ)²`, `φ(λ) = C'/λ` from measured constants.
    T1 { c: f64, c_prime: f64, big_c_prime: f64 },
}

#[derive(Debug, Clone, Serialize)]
pub struct StoppingConfig {
    pub n: usize,
    pub alpha: f64,
    pub q: f64,
    pub r: f64,
    pub s: f64,
    pub rho: f64,
    /// `max_P μ(αP)/μ(P)`.
    pub c1: f64,
    pub c2: f64,
    pub psi_rho: f64,
    pub phi_rho: f64,
    /// `B(ρ) = ψ(ρ) + φ(ρ)`.
    pub b_rho: f64,
    /// Weak (1,1) norm of the ball maximal function on the instance; the
    /// `L^s → L^{s,∞}` norm of `M_s` is its `1/s` power.
    pub maximal_weak_norm: f64,
    /// `n (3B + B (‖M‖/ρ)^{1/s})`.
    pub kappa: f64,
    pub source: LevelSource,
}

impl StoppingConfig {
    /// Threshold factor of the `M_s` test, `(‖M‖/ρ)^{1/s}`.
    pub fn maximal_factor(&self) -> f64 {
        (self.maximal_weak_norm / self.rho).powf(1.0 / self.s)
    }

    pub(crate) fn finish(mut self) -> Result<Self> {
        self.b_rho = self.psi_rho + self.phi_rho;
        if !self.b_rho.is_finite() || !self.maximal_weak_norm.is_finite() {
            return Err(Error::NotDominatable(format!("psi = {}, phi = {}, |M| = {}", self.psi_rho, self.phi_rho, self.maximal_weak_norm)));
        }
        self.kappa = self.n as f64 * (3.0 * self.b_rho + self.b_rho * self.maximal_factor());
        Ok(self)
    }
}

/// Per-cube data: the dilated ball, the body `⟨⟨f⟩⟩_{s,αQ}`, its John
/// axes, the averages `h(e_i)` and the components `⟨f, e_i⟩` (zero for axes
/// outside the span of `f` on `αQ`).
pub struct CubeData {
    pub region: Ball,
    pub body: ConvexBodyAvg,
    pub axes: Vec<DVector<f64>>,
    pub avgs: Vec<f64>,
    pub comps: Vec<Vec<f64>>,
}

/// Operator, system, input and exponent of one decomposition, with lazily
/// built per-cube data.
pub struct Instance<'a> {
    pub t: &'a KernelOperator,
    pub sys: &'a DyadicSystem,
    pub space: &'a FiniteSpace,
    pub f: &'a VectorField,
    pub alpha: f64,
    pub s: f64,
    cubes: Vec<OnceLock<CubeData>>,
    pairs: OnceLock<Vec<(Vec<usize>, Vec<usize>)>>,
}

impl<'a> Instance<'a> {
    pub fn new(t: &'a KernelOperator, sys: &'a DyadicSystem, space: &'a FiniteSpace, f: &'a VectorField, s: f64, alpha: f64) -> Result<Self> {
        if f.len() != space.len() || t.len() != space.len() {
            return Err(Error::InvalidArgument("operator, field and space sizes differ".into()));
        }
        if !(s >= 1.0 && s.is_finite()) {
            return Err(Error::InvalidArgument(format!("s = {s}")));
        }
        if !(alpha >= 1.0) {
            return Err(Error::InvalidArgument(format!("alpha = {alpha}")));
        }
        Ok(Instance { t, sys, space, f, alpha, s, cubes: (0..sys.len()).map(|_| OnceLock::new()).collect(), pairs: OnceLock::new() })
    }

    pub fn cube(&self, q: usize) -> Result<&CubeData> {
        if let Some(d) = self.cubes[q].get() {
            return Ok(d);
        }
        let region = self.sys.dilate(self.space, q, self.alpha);
        let body = ConvexBodyAvg::new(self.f, self.s, &region.members, self.space)?;
        let john = body.john()?;
        let axes = john.axes.clone();
        let avgs: Vec<f64> = axes.iter().map(|e| body.support(e)).collect();
        let comps = axes
            .iter()
            .zip(&john.semi_axes)
            .map(|(e, &sa)| {
                let mut g = vec![0.0; self.space.len()];
                if sa > 0.0 {
                    for &y in &region.members {
                        g[y] = self.f.at(y).dot(e);
                    }
                }
                g
            })
            .collect();
        let d = CubeData { region, body, axes, avgs, comps };
        Ok(self.cubes[q].get_or_init(|| d))
    }

    pub fn pairs(&self) -> &[(Vec<usize>, Vec<usize>)] {
        self.pairs.get_or_init(|| ball_dilation_pairs(self.space, self.alpha))
    }

    /// `M^#_{T,α} g`.
    pub fn sharp(&self, g: &[f64]) -> Vec<f64> {
        sharp_grand_maximal_with(self.t, self.pairs(), g, self.space)
    }

    /// `T(g χ_B)(x)` for `x` in `B`, aligned with the members of `B`.
    pub fn local_apply(&self, g: &[f64], b: &[usize]) -> Vec<f64> {
        b.iter()
            .map(|&x| {
                let row = self.t.row(x);
                b.iter().map(|&y| row[y] * g[y] * self.space.mass(y)).sum()
            })
            .collect()
    }

    pub fn average(&self, g: &[f64], b: &Ball, q: f64) -> f64 {
        let s: f64 = b.members.iter().map(|&y| g[y].abs().powf(q) * self.space.mass(y)).sum();
        (s / b.measure).powf(1.0 / q)
    }

    pub fn c1(&self) -> f64 {
        (0..self.sys.len())
            .map(|p| self.sys.dilate(self.space, p, self.alpha).measure / self.sys.cube(p).measure)
            .fold(1.0, f64::max)
    }

    /// Smallest power of two at least twice every parent/child mass ratio,
    /// so a maximal CZ cube keeps half its mass outside the exceptional set.
    pub fn c2(&self) -> f64 {
        let ratio = self
            .sys
            .cubes
            .iter()
            .filter_map(|c| c.parent.map(|p| self.sys.cube(p).measure / c.measure))
            .fold(1.0, f64::max);
        let mut c2 = 2.0;
        while c2 < 2.0 * ratio {
            c2 *= 2.0;
        }
        c2
    }
}

/// Smallest `t ≥ 0` with `Σ_{v_i > t} m_i ≤ budget`.
pub fn level_envelope(vals: &mut [(f64, f64)], budget: f64) -> f64 {
    vals.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut cum = 0.0;
    let mut ans = 0.0;
    let mut i = 0;
    while i < vals.len() {
        let v = vals[i].0;
        if cum > budget {
            return ans;
        }
        ans = v;
        while i < vals.len() && vals[i].0 == v {
            cum += vals[i].1;
            i += 1;
        }
    }
    if cum > budget {
        ans
    } else {
        0.0
    }
}

/// `sup_t t^a μ{v > t} / μ(B)` over the values `v` with masses.
pub fn power_tail(vals: &mut [(f64, f64)], a: f64, measure: f64) -> f64 {
    vals.sort_by(|x, y| y.0.total_cmp(&x.0));
    let mut cum = 0.0;
    let mut best: f64 = 0.0;
    let mut i = 0;
    while i < vals.len() {
        let v = vals[i].0;
        while i < vals.len() && vals[i].0 == v {
            cum += vals[i].1;
            i += 1;
        }
        best = best.max(v.powf(a) * cum / measure);
    }
    best
}

/// One `(B, g)` test pair of the level-set conditions.
pub(crate) struct TestPair<'b> {
    pub ball: &'b Ball,
    pub g: std::borrow::Cow<'b, [f64]>,
}

/// Inputs for the `|T|` condition: every cube's `αP` with the axis
/// components of `P` and all its ancestors, plus the indicator of `αP`.
pub(crate) fn t_family<'b>(inst: &'b Instance) -> Result<Vec<TestPair<'b>>> {
    let mut out = Vec::new();
    for p in 0..inst.sys.len() {
        let ball = &inst.cube(p)?.region;
        let mut c = Some(p);
        while let Some(a) = c {
            for g in &inst.cube(a)?.comps {
                out.push(TestPair { ball, g: std::borrow::Cow::Borrowed(g.as_slice()) });
            }
            c = inst.sys.cube(a).parent;
        }
        let mut one = vec![0.0; inst.space.len()];
        for &y in &ball.members {
            one[y] = 1.0;
        }
        out.push(TestPair { ball, g: std::borrow::Cow::Owned(one) });
    }
    Ok(out)
}

/// Inputs for the `M^#` condition: `αQ` with the axis components of `Q`,
/// plus the indicator of `αQ`.
pub(crate) fn sharp_family<'b>(inst: &'b Instance) -> Result<Vec<TestPair<'b>>> {
    let mut out = Vec::new();
    for q in 0..inst.sys.len() {
        let d = inst.cube(q)?;
        for g in &d.comps {
            out.push(TestPair { ball: &d.region, g: std::borrow::Cow::Borrowed(g.as_slice()) });
        }
        let mut one = vec![0.0; inst.space.len()];
        for &y in &d.region.members {
            one[y] = 1.0;
        }
        out.push(TestPair { ball: &d.region, g: std::borrow::Cow::Owned(one) });
    }
    Ok(out)
}

/// `v(x) = |T(gχ_B)(x)| / ⟨g⟩_{q,B}` on `B` with masses, `None` when `g`
/// vanishes on `B`.
pub(crate) fn t_ratios(inst: &Instance, tp: &TestPair, q: f64) -> Option<Vec<(f64, f64)>> {
    let avg = inst.average(&tp.g, tp.ball, q);
    if avg == 0.0 {
        return None;
    }
    let tg = inst.local_apply(&tp.g, &tp.ball.members);
    Some(tp.ball.members.iter().zip(tg).map(|(&x, v)| (v.abs() / avg, inst.space.mass(x))).collect())
}

/// `v(x) = M^#(gχ_B)(x) / ⟨g⟩_{r,B}` on `B`.
pub(crate) fn sharp_ratios(inst: &Instance, tp: &TestPair, r: f64) -> Option<Vec<(f64, f64)>> {
    let avg = inst.average(&tp.g, tp.ball, r);
    if avg == 0.0 {
        return None;
    }
    let mut g = vec![0.0; inst.space.len()];
    for &y in &tp.ball.members {
        g[y] = tp.g[y];
    }
    let m = inst.sharp(&g);
    Some(tp.ball.members.iter().map(|&x| (m[x] / avg, inst.space.mass(x))).collect())
}

/// Weak (1,1) norm of `M` over point masses, ball indicators and the inputs
/// `|⟨f, e_i⟩|^s χ_{αQ}`.
pub fn maximal_weak_norm(inst: &Instance) -> Result<f64> {
    let space = inst.space;
    let n = space.len();
    let mut best: f64 = 0.0;
    let mut probe = |g: &[f64]| {
        let l1: f64 = g.iter().zip(space.masses()).map(|(a, m)| a.abs() * m).sum();
        if l1 > 0.0 {
            best = best.max(weak_l1_norm(&maximal(g, space), space) / l1);
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
    for q in 0..inst.sys.len() {
        let d = inst.cube(q)?;
        for c in &d.comps {
            let g: Vec<f64> = c.iter().map(|v| v.abs().powf(inst.s)).collect();
            probe(&g);
        }
    }
    Ok(best)
}

fn check_exponents(q: f64, r: f64, s: f64) -> Result<()> {
    if !(q >= 1.0 && r >= 1.0 && q.is_finite() && r.is_finite()) {
        return Err(Error::InvalidArgument(format!("q = {q}, r = {r}")));
    }
    if (q.max(r) - s).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!("s = {s} differs from max(q, r) = {}", q.max(r))));
    }
    Ok(())
}

pub(crate) fn base_config(inst: &Instance, q: f64, r: f64) -> Result<StoppingConfig> {
    check_exponents(q, r, inst.s)?;
    let n = inst.f.dim;
    let c1 = inst.c1();
    let c2 = inst.c2();
    Ok(StoppingConfig {
        n,
        alpha: inst.alpha,
        q,
        r,
        s: inst.s,
        rho: 1.0 / (6.0 * n as f64 * c1 * c2),
        c1,
        c2,
        psi_rho: 0.0,
        phi_rho: 0.0,
        b_rho: 0.0,
        maximal_weak_norm: maximal_weak_norm(inst)?,
        kappa: 0.0,
        source: LevelSource::Measured,
    })
}

/// Measures `ψ(ρ)` and `φ(ρ)` as exact level-set envelopes: `ψ(ρ)` is the
/// least `t` with `μ{x ∈ B : |T(gχ_B)(x)| > t⟨g⟩_{q,B}} ≤ ρμ(B)` over the
/// test pairs, and likewise `φ(ρ)` for `M^#_{T,α}` and `r`-averages.
pub fn calibrate_config(inst: &Instance, q: f64, r: f64) -> Result<StoppingConfig> {
    let mut cfg = base_config(inst, q, r)?;
    let rho = cfg.rho;
    let mut psi: f64 = 0.0;
    for tp in t_family(inst)? {
        if let Some(mut v) = t_ratios(inst, &tp, q) {
            psi = psi.max(level_envelope(&mut v, rho * tp.ball.measure));
        }
    }
    let mut phi: f64 = 0.0;
    for tp in sharp_family(inst)? {
        if let Some(mut v) = sharp_ratios(inst, &tp, r) {
            phi = phi.max(level_envelope(&mut v, rho * tp.ball.measure));
        }
    }
    cfg.psi_rho = psi;
    cfg.phi_rho = phi;
    cfg.finish()
}
