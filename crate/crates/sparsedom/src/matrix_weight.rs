//! Matrix weights and their Muckenhoupt-type constants.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{fit_gauge, maximize_on_sphere, op_norm, random_unit, Spd};
use crate::space::{Ball, FiniteSpace};

pub use crate::linalg::psd_power_check;

/// Symmetric positive-definite matrix per point.
#[derive(Debug)]
pub struct MatrixWeight {
    n: usize,
    values: Vec<DMatrix<f64>>,
    spectra: Vec<Spd>,
    cache: Mutex<HashMap<u64, Arc<Vec<DMatrix<f64>>>>>,
}

impl Clone for MatrixWeight {
    fn clone(&self) -> Self {
        MatrixWeight {
            n: self.n,
            values: self.values.clone(),
            spectra: self.spectra.clone(),
            cache: Mutex::new(HashMap::new()),
        }
    }
}

impl MatrixWeight {
    pub fn new(values: Vec<DMatrix<f64>>) -> Result<Self> {
        let n = values.first().map(|m| m.nrows()).ok_or_else(|| Error::InvalidArgument("empty weight".into()))?;
        let mut spectra = Vec::with_capacity(values.len());
        for m in &values {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::InvalidArgument("weight values of mixed size".into()));
            }
            spectra.push(Spd::new(m)?);
        }
        Ok(MatrixWeight { n, values, spectra, cache: Mutex::new(HashMap::new()) })
    }

    pub fn identity(n: usize, points: usize) -> Self {
        Self::new(vec![DMatrix::identity(n, n); points]).unwrap()
    }

    /// `1 × 1` weight from a positive scalar weight.
    pub fn scalar(w: &[f64]) -> Result<Self> {
        Self::new(w.iter().map(|&v| DMatrix::from_element(1, 1, v)).collect())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn at(&self, x: usize) -> &DMatrix<f64> {
        &self.values[x]
    }

    pub fn values(&self) -> &[DMatrix<f64>] {
        &self.values
    }

    /// `W(x)^t` for every point, cached per exponent.
    pub fn powers(&self, t: f64) -> Arc<Vec<DMatrix<f64>>> {
        let mut cache = self.cache.lock().unwrap();
        cache
            .entry(t.to_bits())
            .or_insert_with(|| Arc::new(self.spectra.iter().map(|s| s.power(t)).collect()))
            .clone()
    }

    /// Condition number `max λ / min λ` over all points.
    pub fn condition(&self) -> f64 {
        let hi = self.spectra.iter().map(|s| s.max_eigenvalue()).fold(0.0, f64::max);
        let lo = self.spectra.iter().map(|s| s.min_eigenvalue()).fold(f64::INFINITY, f64::min);
        hi / lo
    }

    /// The scalar weight `x ↦ |W^{1/p}(x) e|^p`.
    pub fn slice(&self, p: f64, e: &DVector<f64>) -> Vec<f64> {
        let wp = self.powers(1.0 / p);
        wp.iter().map(|m| (m * e).norm().powf(p)).collect()
    }
}

fn conj(p: f64) -> f64 {
    p / (p - 1.0)
}

/// Pairwise `|A(y) B(x)|_op^q`, stored row `x`, column `y`.
fn pair_norms(a: &[DMatrix<f64>], b: &[DMatrix<f64>], q: f64) -> Vec<f64> {
    let n = a.len();
    let mut out = vec![0.0; n * n];
    for x in 0..n {
        for y in 0..n {
            out[x * n + y] = op_norm(&(&a[y] * &b[x])).powf(q);
        }
    }
    out
}

/// `[W]_{A_p}` by its definition, with the maximizing ball.
pub fn ap_constant_with_ball(w: &MatrixWeight, p: f64, space: &FiniteSpace) -> Result<(f64, usize)> {
    if !(p > 1.0) {
        return Err(Error::InvalidArgument(format!("p = {p} must exceed 1")));
    }
    let pp = conj(p);
    let n = space.len();
    let norms = pair_norms(&w.powers(-1.0 / p), &w.powers(1.0 / p), pp);
    let mut best = (0.0, 0);
    for (bi, b) in space.balls().iter().enumerate() {
        let mut outer = 0.0;
        for &x in &b.members {
            let inner: f64 = b.members.iter().map(|&y| space.mass(y) * norms[x * n + y]).sum::<f64>() / b.measure;
            outer += space.mass(x) * inner.powf(p / pp);
        }
        let v = outer / b.measure;
        if !v.is_finite() {
            return Err(Error::NumericalFailure("non-finite A_p average".into()));
        }
        if v > best.0 {
            best = (v, bi);
        }
    }
    Ok(best)
}

pub fn ap_constant(w: &MatrixWeight, p: f64, space: &FiniteSpace) -> Result<f64> {
    Ok(ap_constant_with_ball(w, p, space)?.0)
}

/// `[W]_{A_1} = sup_B sup_{y∈B} avg_B |W(x) W^{-1}(y)|_op`.
pub fn a1_constant(w: &MatrixWeight, space: &FiniteSpace) -> Result<f64> {
    let n = space.len();
    let norms = pair_norms(&w.powers(-1.0), &w.powers(1.0), 1.0);
    let mut best: f64 = 0.0;
    for b in space.balls() {
        for &y in &b.members {
            let avg: f64 = b.members.iter().map(|&x| space.mass(x) * norms[x * n + y]).sum::<f64>() / b.measure;
            best = best.max(avg);
        }
    }
    Ok(best)
}

/// Classical scalar `[w]_{A_p}`; `p = 1` gives `sup_B avg_B w / min_B w`.
pub fn scalar_ap(w: &[f64], p: f64, space: &FiniteSpace) -> f64 {
    let mut best: f64 = 0.0;
    for b in space.balls() {
        let avg = |f: &dyn Fn(f64) -> f64| b.members.iter().map(|&x| space.mass(x) * f(w[x])).sum::<f64>() / b.measure;
        let v = if p == 1.0 {
            avg(&|t| t) / b.members.iter().map(|&x| w[x]).fold(f64::INFINITY, f64::min)
        } else {
            avg(&|t| t) * avg(&|t| t.powf(-1.0 / (p - 1.0))).powf(p - 1.0)
        };
        best = best.max(v);
    }
    best
}

/// `[|W^{1/p}(·) e|^p]_{A_p}`.
pub fn scalar_slice_ap(w: &MatrixWeight, p: f64, e: &DVector<f64>, space: &FiniteSpace) -> Result<f64> {
    if e.norm() == 0.0 {
        return Err(Error::InvalidArgument("zero direction".into()));
    }
    Ok(scalar_ap(&w.slice(p, e), p, space))
}

/// Fujii–Wilson `[w]_{A_∞} = sup_B w(B)^{-1} ∫_B M(w χ_B)`, exact.
pub fn a_infty_constant(w: &[f64], space: &FiniteSpace) -> f64 {
    let balls = space.balls();
    let wb: Vec<f64> = balls.iter().map(|b| b.members.iter().map(|&x| space.mass(x) * w[x]).sum()).collect();
    if let Some(chains) = space.ball_chains() {
        // nested balls: only sub-balls of B matter, and along each chain the
        // maximal average is a running maximum
        let mut integral = vec![0.0; balls.len()];
        for (x, chain) in chains.iter().enumerate() {
            let mut run: f64 = 0.0;
            for &b in chain {
                run = run.max(wb[b] / balls[b].measure);
                integral[b] += space.mass(x) * run;
            }
        }
        return (0..balls.len()).map(|b| integral[b] / wb[b]).fold(1.0, f64::max);
    }
    let n = space.len();
    let mut best: f64 = 1.0;
    let mut inside = vec![false; n];
    let mut m = vec![0.0; n];
    for (bi, b) in balls.iter().enumerate() {
        for &x in &b.members {
            inside[x] = true;
            m[x] = 0.0;
        }
        for b2 in balls {
            let local: f64 = b2.members.iter().filter(|&&y| inside[y]).map(|&y| space.mass(y) * w[y]).sum();
            if local == 0.0 {
                continue;
            }
            let avg = local / b2.measure;
            for &x in &b2.members {
                if inside[x] && avg > m[x] {
                    m[x] = avg;
                }
            }
        }
        let integral: f64 = b.members.iter().map(|&x| space.mass(x) * m[x]).sum();
        best = best.max(integral / wb[bi]);
        for &x in &b.members {
            inside[x] = false;
        }
    }
    best
}

/// Lower bound for `[W]_{A^{sc}_{∞,p}}`.
#[derive(Debug, Clone, Serialize)]
pub struct ScAinfty {
    pub value: f64,
    pub direction: Vec<f64>,
    pub directions_used: usize,
}

/// Sup over directions of the `A_∞` constant of the scalar slices. The
/// coordinate axes come first, then seeded random directions; every
/// direction is refined by local search on its own, so the estimate is
/// non-decreasing in `m_dirs`.
pub fn sc_ainfty_constant(w: &MatrixWeight, p: f64, space: &FiniteSpace, m_dirs: usize) -> Result<ScAinfty> {
    let n = w.dim();
    if m_dirs < 2 * n * n {
        return Err(Error::InvalidArgument(format!("need at least {} directions", 2 * n * n)));
    }
    let f = |e: &DVector<f64>| a_infty_constant(&w.slice(p, e), space);
    if n == 1 {
        let e = DVector::from_element(1, 1.0);
        return Ok(ScAinfty { value: f(&e), direction: vec![1.0], directions_used: m_dirs });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0xa11f);
    let mut best = (f64::MIN, DVector::zeros(n));
    for k in 0..m_dirs {
        let start = if k < n {
            let mut e = DVector::zeros(n);
            e[k] = 1.0;
            e
        } else {
            random_unit(n, &mut rng)
        };
        let (v, e) = maximize_on_sphere(n, &f, std::slice::from_ref(&start));
        if v > best.0 {
            best = (v, e);
        }
    }
    Ok(ScAinfty { value: best.0, direction: best.1.iter().copied().collect(), directions_used: m_dirs })
}

/// Upper bound `1 + 1/(6 (32 c_d² (4c_d² + c_d)²)^{D_μ} [w]_{A_∞})` for the
/// reverse Hölder exponent, and the constant `2 (4 c_d)^{D_μ}`.
pub fn rh_exponent(cd: f64, d_mu: f64, a_infty: f64) -> (f64, f64) {
    let tau = 6.0 * (32.0 * cd * cd * (4.0 * cd * cd + cd).powi(2)).powf(d_mu);
    (1.0 + 1.0 / (tau * a_infty), 2.0 * (4.0 * cd).powf(d_mu))
}

pub fn rh_exponent_for(w: &[f64], space: &FiniteSpace) -> (f64, f64) {
    let (_, d_mu) = space.doubling_constants();
    rh_exponent(space.quasi_triangle_constant(), d_mu, a_infty_constant(w, space))
}

/// Which norm a reducing matrix represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Side {
    /// `ρ(e) = (avg_B |W^{1/p} e|^p)^{1/p}`.
    Primal,
    /// `ρ*(e) = (avg_B |W^{-1/p} e|^{p'})^{1/p'}`.
    Dual,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReducingMatrix {
    pub center: usize,
    pub radius: f64,
    pub members: Vec<usize>,
    pub p: f64,
    pub side: Side,
    #[serde(skip)]
    pub matrix: DMatrix<f64>,
    /// Largest probed `ρ(e)/|𝒲 e|`.
    pub ratio: f64,
}

/// The norm represented by a reducing matrix, evaluated exactly.
pub struct BallNorm {
    mats: Vec<DMatrix<f64>>,
    weights: Vec<f64>,
    q: f64,
}

impl BallNorm {
    pub fn new(w: &MatrixWeight, ball: &Ball, p: f64, side: Side, space: &FiniteSpace) -> Result<Self> {
        let (t, q) = match side {
            Side::Primal if p >= 1.0 => (1.0 / p, p),
            Side::Dual if p > 1.0 => (-1.0 / p, conj(p)),
            _ => return Err(Error::InvalidArgument(format!("p = {p} out of range for {side:?}"))),
        };
        if !(ball.measure > 0.0) {
            return Err(Error::InvalidArgument("ball of zero measure".into()));
        }
        let pw = w.powers(t);
        Ok(BallNorm {
            mats: ball.members.iter().map(|&x| pw[x].clone()).collect(),
            weights: ball.members.iter().map(|&x| space.mass(x) / ball.measure).collect(),
            q,
        })
    }

    pub fn eval(&self, e: &DVector<f64>) -> f64 {
        let s: f64 = self.mats.iter().zip(&self.weights).map(|(m, &c)| c * (m * e).norm().powf(self.q)).sum();
        s.powf(1.0 / self.q)
    }

    /// Closed form when the exponent is 2: the square root of the averaged
    /// Gram matrix.
    fn quadratic(&self) -> Option<DMatrix<f64>> {
        if self.q != 2.0 {
            return None;
        }
        let n = self.mats[0].nrows();
        let mut g = DMatrix::zeros(n, n);
        for (m, &c) in self.mats.iter().zip(&self.weights) {
            g += c * m.transpose() * m;
        }
        Spd::new(&g).ok().map(|s| s.power(0.5))
    }
}

/// Reducing matrix `𝒲` with `|𝒲e| ≤ ρ(e) ≤ √n (1+tol) |𝒲e|`. Exact for
/// exponent 2 and for `n = 1`; otherwise an ellipsoid fitted to the unit
/// ball of `ρ` and certified on probe directions.
pub fn reducing_matrix(w: &MatrixWeight, ball: &Ball, p: f64, side: Side, space: &FiniteSpace) -> Result<ReducingMatrix> {
    let norm = BallNorm::new(w, ball, p, side, space)?;
    let (matrix, ratio) = match norm.quadratic() {
        Some(m) => (m, 1.0),
        None => {
            let h = |e: &DVector<f64>| norm.eval(e);
            let fit = fit_gauge(w.dim(), &h, 7)?;
            (fit.matrix, fit.ratio)
        }
    };
    Ok(ReducingMatrix {
        center: ball.center,
        radius: ball.radius,
        members: ball.members.clone(),
        p,
        side,
        matrix,
        ratio,
    })
}

/// `sup_B |𝒲_{B,p} 𝒲'_{B,p}|_op^p` and the maximizing ball.
pub fn ap_via_reducing_with_ball(w: &MatrixWeight, p: f64, space: &FiniteSpace) -> Result<(f64, usize)> {
    if !(p > 1.0) {
        return Err(Error::InvalidArgument(format!("p = {p} must exceed 1")));
    }
    let mut best = (0.0, 0);
    for (bi, b) in space.balls().iter().enumerate() {
        let a = reducing_matrix(w, b, p, Side::Primal, space)?;
        let d = reducing_matrix(w, b, p, Side::Dual, space)?;
        let v = op_norm(&(&a.matrix * &d.matrix)).powf(p);
        if v > best.0 {
            best = (v, bi);
        }
    }
    Ok(best)
}

pub fn ap_via_reducing(w: &MatrixWeight, p: f64, space: &FiniteSpace) -> Result<f64> {
    Ok(ap_via_reducing_with_ball(w, p, space)?.0)
}

#[derive(Debug, Clone, Serialize)]
pub struct ApReport {
    pub p: f64,
    pub definition: f64,
    pub via_reducing: f64,
    /// Center and radius of the ball attaining the definition value.
    pub maximizer: (usize, f64),
}

pub fn ap_report(w: &MatrixWeight, p: f64, space: &FiniteSpace) -> Result<ApReport> {
    let (definition, bi) = ap_constant_with_ball(w, p, space)?;
    let via_reducing = ap_via_reducing(w, p, space)?;
    let b = &space.balls()[bi];
    Ok(ApReport { p, definition, via_reducing, maximizer: (b.center, b.radius) })
}

/// Both sides of the reverse Hölder inequality for `|W^{1/p} A|_op^p` on `B`
/// against its `2 c_d` dilation: `(avg_B |·|^{pr})^{1/r}` and
/// `avg_{2c_d B} |·|^p`.
pub fn reverse_holder_check(
    w: &MatrixWeight,
    p: f64,
    a: &DMatrix<f64>,
    ball: &Ball,
    r: f64,
    space: &FiniteSpace,
) -> (f64, f64, f64) {
    let wp = w.powers(1.0 / p);
    let v = |x: usize| op_norm(&(&wp[x] * a)).powf(p);
    let lhs = (ball.members.iter().map(|&x| space.mass(x) * v(x).powf(r)).sum::<f64>() / ball.measure).powf(1.0 / r);
    let big = space.ball(ball.center, 2.0 * space.quasi_triangle_constant() * ball.radius);
    let rhs = big.members.iter().map(|&x| space.mass(x) * v(x)).sum::<f64>() / big.measure;
    (lhs, rhs, lhs / rhs)
}
