//! Convex-body averages `⟨⟨f⟩⟩_{s,R}`.
//!
//! The body is `{ avg_R φ f : ‖φ‖_{L^{s'}(R, dμ/μ(R))} ≤ 1 }`. Its support
//! function is the `L^s` average of `⟨f, u⟩`; its gauge is the smallest
//! `L^{s'}` norm of a representer `φ`, computed exactly (a dual Newton solve
//! for `s > 1`, the zonotope structure for `s = 1`).

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::fit_gauge;
use crate::space::FiniteSpace;

/// An `R^n`-valued function on the points.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub dim: usize,
    pub values: Vec<DVector<f64>>,
}

impl VectorField {
    pub fn new(dim: usize, values: Vec<DVector<f64>>) -> Result<Self> {
        if values.iter().any(|v| v.len() != dim || v.iter().any(|c| !c.is_finite())) {
            return Err(Error::InvalidArgument("vector field values of wrong size or non-finite".into()));
        }
        Ok(VectorField { dim, values })
    }

    pub fn zeros(dim: usize, len: usize) -> Self {
        VectorField { dim, values: vec![DVector::zeros(dim); len] }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(1, |r| r.len());
        Self::new(dim, rows.iter().map(|r| DVector::from_vec(r.clone())).collect())
    }

    pub fn from_scalar(values: &[f64]) -> Self {
        VectorField { dim: 1, values: values.iter().map(|&v| DVector::from_element(1, v)).collect() }
    }

    /// Standard normal entries.
    pub fn random(dim: usize, len: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = (0..len).map(|_| DVector::from_fn(dim, |_, _| StandardNormal.sample(&mut rng))).collect();
        VectorField { dim, values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn at(&self, x: usize) -> &DVector<f64> {
        &self.values[x]
    }

    /// The scalar function `⟨f, e⟩`.
    pub fn component(&self, e: &DVector<f64>) -> Vec<f64> {
        self.values.iter().map(|v| v.dot(e)).collect()
    }

    pub fn coordinate(&self, i: usize) -> Vec<f64> {
        self.values.iter().map(|v| v[i]).collect()
    }

    /// Assembles a field from one scalar function per coordinate.
    pub fn from_coordinates(coords: &[Vec<f64>]) -> Self {
        let dim = coords.len();
        let len = coords.first().map_or(0, |c| c.len());
        VectorField { dim, values: (0..len).map(|x| DVector::from_fn(dim, |i, _| coords[i][x])).collect() }
    }

    /// `f χ_set`.
    pub fn restrict(&self, set: &[usize]) -> Self {
        let mut out = VectorField::zeros(self.dim, self.len());
        for &x in set {
            out.values[x] = self.values[x].clone();
        }
        out
    }

    pub fn max_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// `E = { Σ c_i e_i : Σ c_i²/σ_i² ≤ 1 }`, semi-axes in decreasing order.
#[derive(Debug, Clone, Serialize)]
pub struct JohnEllipsoid {
    #[serde(skip)]
    pub axes: Vec<DVector<f64>>,
    pub semi_axes: Vec<f64>,
    /// Largest probed `h_K(u)/h_E(u)`.
    pub ratio: f64,
}

impl JohnEllipsoid {
    pub fn support(&self, u: &DVector<f64>) -> f64 {
        self.axes.iter().zip(&self.semi_axes).map(|(e, s)| (s * e.dot(u)).powi(2)).sum::<f64>().sqrt()
    }
}

/// The body `⟨⟨f⟩⟩_{s,R}`.
#[derive(Debug)]
pub struct ConvexBodyAvg {
    pub n: usize,
    pub s: f64,
    pub region: Vec<usize>,
    /// `μ_y / μ(R)` for `y` in `region`.
    pub weights: Vec<f64>,
    /// `f(y)` for `y` in `region`.
    pub vecs: Vec<DVector<f64>>,
    /// Orthonormal basis (columns) of the span of the values.
    basis: DMatrix<f64>,
    scale: f64,
    polar: OnceLock<Vec<DVector<f64>>>,
    john: OnceLock<JohnEllipsoid>,
}

impl ConvexBodyAvg {
    pub fn new(f: &VectorField, s: f64, region: &[usize], space: &FiniteSpace) -> Result<Self> {
        if !(s >= 1.0) || !s.is_finite() {
            return Err(Error::InvalidArgument(format!("s = {s} must be a finite exponent >= 1")));
        }
        if region.is_empty() {
            return Err(Error::InvalidArgument("empty region".into()));
        }
        let mu = space.measure(region);
        let n = f.dim;
        let weights: Vec<f64> = region.iter().map(|&y| space.mass(y) / mu).collect();
        let vecs: Vec<DVector<f64>> = region.iter().map(|&y| f.at(y).clone()).collect();
        let mut moment = DMatrix::zeros(n, n);
        for (v, &w) in vecs.iter().zip(&weights) {
            moment += w * v * v.transpose();
        }
        let eig = SymmetricEigen::new(moment);
        let top = eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b));
        let keep: Vec<usize> = (0..n).filter(|&i| top > 0.0 && eig.eigenvalues[i] > 1e-13 * top).collect();
        let mut basis = DMatrix::zeros(n, keep.len());
        for (j, &i) in keep.iter().enumerate() {
            basis.set_column(j, &eig.eigenvectors.column(i));
        }
        let scale = vecs.iter().map(|v| v.norm()).fold(0.0, f64::max);
        Ok(ConvexBodyAvg { n, s, region: region.to_vec(), weights, vecs, basis, scale, polar: OnceLock::new(), john: OnceLock::new() })
    }

    /// Dimension of the body's span.
    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }

    pub fn is_zero(&self) -> bool {
        self.rank() == 0
    }

    /// `h(u) = (Σ w_y |⟨f(y), u⟩|^s)^{1/s}`.
    pub fn support(&self, u: &DVector<f64>) -> f64 {
        let sum: f64 = self.vecs.iter().zip(&self.weights).map(|(v, &w)| w * v.dot(u).abs().powf(self.s)).sum();
        sum.powf(1.0 / self.s)
    }

    /// Coordinates in the span basis, or `None` if `x` leaves the span.
    fn reduce(&self, x: &DVector<f64>) -> Option<DVector<f64>> {
        let c = self.basis.transpose() * x;
        let back = &self.basis * &c;
        let tol = 1e-10 * (x.norm() + self.scale).max(f64::MIN_POSITIVE);
        ((x - back).norm() <= tol).then_some(c)
    }

    fn reduced_vecs(&self) -> Vec<DVector<f64>> {
        self.vecs.iter().map(|v| self.basis.transpose() * v).collect()
    }

    /// Minkowski gauge: the least `‖φ‖_{s'}` with `avg φ f = x`; infinite
    /// off the span.
    pub fn gauge(&self, x: &DVector<f64>) -> f64 {
        match self.represent_inner(x) {
            Ok(Some((_, g))) => g,
            Ok(None) => f64::INFINITY,
            Err(_) => f64::NAN,
        }
    }

    pub fn membership(&self, x: &DVector<f64>, tol: f64) -> bool {
        self.gauge(x) <= 1.0 + tol
    }

    /// A representer `φ` on the region with `Σ w_y φ_y f(y) = x` and least
    /// `L^{s'}` norm, together with that norm.
    pub fn represent(&self, x: &DVector<f64>) -> Result<(Vec<f64>, f64)> {
        self.represent_inner(x)?
            .ok_or(Error::Infeasible { point: usize::MAX, gauge: f64::INFINITY })
    }

    fn represent_inner(&self, x: &DVector<f64>) -> Result<Option<(Vec<f64>, f64)>> {
        let Some(xr) = self.reduce(x) else { return Ok(None) };
        let m = self.vecs.len();
        if self.rank() == 0 || xr.norm() == 0.0 {
            return Ok(Some((vec![0.0; m], 0.0)));
        }
        let fr = self.reduced_vecs();
        let mut phi = if self.s == 1.0 {
            let a: Vec<DVector<f64>> = fr.iter().zip(&self.weights).map(|(v, &w)| v * w).collect();
            let polar = self.polar.get_or_init(|| polar_vertices(&a));
            zonotope_repr(&a, &xr, Some(polar))
        } else {
            dual_newton(&fr, &self.weights, self.s, &xr)?
        };
        polish(&fr, &self.weights, &xr, &mut phi);
        let g = self.norm_of(&phi);
        Ok(Some((phi, g)))
    }

    /// `‖φ‖_{L^{s'}(w)}`.
    pub fn norm_of(&self, phi: &[f64]) -> f64 {
        lsp_norm(phi, &self.weights, self.s)
    }

    /// `Σ w_y φ_y f(y)`.
    pub fn average(&self, phi: &[f64]) -> DVector<f64> {
        let mut out = DVector::zeros(self.n);
        for ((v, &w), &p) in self.vecs.iter().zip(&self.weights).zip(phi) {
            out += v * (w * p);
        }
        out
    }

    /// John ellipsoid, computed on the span and padded with zero axes.
    pub fn john(&self) -> Result<&JohnEllipsoid> {
        if let Some(j) = self.john.get() {
            return Ok(j);
        }
        let r = self.rank();
        let mut pairs: Vec<(f64, DVector<f64>)> = Vec::with_capacity(self.n);
        let mut ratio = 1.0;
        if r > 0 {
            let matrix = if self.s == 2.0 {
                // the body is the ellipsoid of the second-moment matrix
                let mut m = DMatrix::zeros(r, r);
                for (v, &w) in self.reduced_vecs().iter().zip(&self.weights) {
                    m += w * v * v.transpose();
                }
                crate::linalg::spd_power(&m, 0.5)?
            } else {
                let h = |v: &DVector<f64>| self.support(&(&self.basis * v));
                let fit = fit_gauge(r, &h, 11)?;
                ratio = fit.ratio;
                fit.matrix
            };
            let eig = SymmetricEigen::new(matrix);
            for i in 0..r {
                pairs.push((eig.eigenvalues[i], &self.basis * eig.eigenvectors.column(i)));
            }
        }
        // complete with the orthogonal complement of the span
        let proj = DMatrix::identity(self.n, self.n) - &self.basis * self.basis.transpose();
        let comp = SymmetricEigen::new(proj);
        for i in 0..self.n {
            if comp.eigenvalues[i] > 0.5 {
                pairs.push((0.0, comp.eigenvectors.column(i).into_owned()));
            }
        }
        pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
        let j = JohnEllipsoid {
            semi_axes: pairs.iter().map(|p| p.0).collect(),
            axes: pairs.into_iter().map(|p| p.1).collect(),
            ratio,
        };
        Ok(self.john.get_or_init(|| j))
    }

    /// Sufficient test `|⟨e_i, x⟩| ≤ h(e_i)/n` along the John axes.
    pub fn axis_membership_criterion(&self, x: &DVector<f64>) -> Result<bool> {
        let j = self.john()?;
        let n = self.n as f64;
        Ok(j.axes.iter().all(|e| e.dot(x).abs() <= self.support(e) / n))
    }
}

pub fn support_function(body: &ConvexBodyAvg, u: &DVector<f64>) -> f64 {
    body.support(u)
}

pub fn membership(body: &ConvexBodyAvg, x: &DVector<f64>, tol: f64) -> bool {
    body.membership(x, tol)
}

pub fn john_ellipsoid(body: &ConvexBodyAvg) -> Result<&JohnEllipsoid> {
    body.john()
}

pub fn axis_membership_criterion(body: &ConvexBodyAvg, x: &DVector<f64>) -> Result<bool> {
    body.axis_membership_criterion(x)
}

fn lsp_norm(phi: &[f64], w: &[f64], s: f64) -> f64 {
    if s == 1.0 {
        return phi.iter().map(|p| p.abs()).fold(0.0, f64::max);
    }
    let sp = s / (s - 1.0);
    phi.iter().zip(w).map(|(p, &c)| c * p.abs().powf(sp)).sum::<f64>().powf(1.0 / sp)
}

/// Least-squares correction so that `Σ w φ f` reproduces `x` to rounding.
fn polish(f: &[DVector<f64>], w: &[f64], x: &DVector<f64>, phi: &mut [f64]) {
    let r = x.len();
    for _ in 0..2 {
        let mut res = x.clone();
        for ((v, &c), &p) in f.iter().zip(w).zip(phi.iter()) {
            res -= v * (c * p);
        }
        if res.norm() == 0.0 {
            return;
        }
        let mut g = DMatrix::zeros(r, r);
        for (v, &c) in f.iter().zip(w) {
            g += c * v * v.transpose();
        }
        let Some(lam) = g.lu().solve(&res) else { return };
        for (v, p) in f.iter().zip(phi.iter_mut()) {
            *p += v.dot(&lam);
        }
    }
}

/// Maximizer of `⟨x,u⟩ - (1/s) Σ w |⟨f,u⟩|^s`; the representer is
/// `φ = sign(t)|t|^{s-1}` with `t = ⟨f, u⟩`.
fn dual_newton(f: &[DVector<f64>], w: &[f64], s: f64, x: &DVector<f64>) -> Result<Vec<f64>> {
    let r = x.len();
    let mut gram = DMatrix::zeros(r, r);
    for (v, &c) in f.iter().zip(w) {
        gram += c * v * v.transpose();
    }
    let u0 = gram.clone().lu().solve(x).ok_or_else(|| Error::NumericalFailure("singular moment matrix".into()))?;
    let obj = |u: &DVector<f64>| x.dot(u) - f.iter().zip(w).map(|(v, &c)| c * v.dot(u).abs().powf(s)).sum::<f64>() / s;
    let ts: f64 = f.iter().zip(w).map(|(v, &c)| c * v.dot(&u0).abs().powf(s)).sum();
    let mut u = &u0 * (x.dot(&u0) / ts).powf(1.0 / (s - 1.0));
    let xn = x.norm();
    for _ in 0..500 {
        let t: Vec<f64> = f.iter().map(|v| v.dot(&u)).collect();
        let tmax = t.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        let mut grad = x.clone();
        let mut hess = DMatrix::zeros(r, r);
        let floor = (tmax * 1e-6).max(f64::MIN_POSITIVE);
        for ((v, &c), &ti) in f.iter().zip(w).zip(&t) {
            grad -= v * (c * ti.signum() * ti.abs().powf(s - 1.0));
            let curv = (s - 1.0) * ti.abs().max(floor).powf(s - 2.0);
            hess += (c * curv) * v * v.transpose();
        }
        if grad.norm() <= 1e-13 * xn {
            break;
        }
        let dir = match hess.clone().cholesky() {
            Some(ch) => ch.solve(&grad),
            None => grad.clone(),
        };
        let g0 = obj(&u);
        let slope = grad.dot(&dir);
        let mut step = 1.0;
        let mut moved = false;
        for _ in 0..60 {
            let cand = &u + &dir * step;
            if obj(&cand) >= g0 + 1e-4 * step * slope {
                u = cand;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if !moved {
            break;
        }
    }
    Ok(f.iter()
        .map(|v| {
            let t = v.dot(&u);
            t.signum() * t.abs().powf(s - 1.0)
        })
        .collect())
}

/// Null vector of `d - 1` vectors in `R^d` by cofactor expansion.
fn null_vector(rows: &[&DVector<f64>], d: usize) -> DVector<f64> {
    if d == 1 {
        return DVector::from_element(1, 1.0);
    }
    let m = DMatrix::from_fn(d - 1, d, |i, j| rows[i][j]);
    DVector::from_fn(d, |j, _| {
        let minor = m.clone().remove_column(j);
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        sign * minor.determinant()
    })
}

/// Vertices of the polar of the zonotope `Σ [-a_y, a_y]`: directions
/// orthogonal to `d - 1` independent generators, scaled to
/// `Σ |⟨a_y, v⟩| = 1`. The gauge is `max |⟨x, v⟩|` over them.
fn polar_vertices(a: &[DVector<f64>]) -> Vec<DVector<f64>> {
    let d = a[0].len();
    let gens: Vec<&DVector<f64>> = a.iter().filter(|v| v.norm() > 0.0).collect();
    let mut out = Vec::new();
    let k = d - 1;
    let m = gens.len();
    if m < k {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        let rows: Vec<&DVector<f64>> = idx.iter().map(|&i| gens[i]).collect();
        let v = null_vector(&rows, d);
        let scale: f64 = rows.iter().map(|r| r.norm()).product::<f64>().max(1.0);
        if v.norm() > 1e-12 * scale {
            let v = &v / v.norm();
            let tot: f64 = gens.iter().map(|g| g.dot(&v).abs()).sum();
            if tot > 0.0 {
                out.push(v / tot);
            }
        }
        // next combination
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + m - k {
                idx[i] += 1;
                for j in i + 1..k {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
        if k == 0 {
            return out;
        }
    }
}

/// Representer with `Σ φ_y a_y = x` and `max|φ| = gauge(x)`: scale `x` to
/// the boundary, saturate the generators not parallel to the exposing face,
/// and recurse on the face.
fn zonotope_repr(a: &[DVector<f64>], x: &DVector<f64>, polar: Option<&Vec<DVector<f64>>>) -> Vec<f64> {
    let m = a.len();
    let mut phi = vec![0.0; m];
    if x.norm() == 0.0 {
        return phi;
    }
    let owned;
    let polar = match polar {
        Some(p) => p,
        None => {
            owned = polar_vertices(a);
            &owned
        }
    };
    let mut best = (0.0, None);
    for v in polar {
        let t = x.dot(v);
        if t.abs() > best.0 {
            best = (t.abs(), Some(if t >= 0.0 { v.clone() } else { -v }));
        }
    }
    let (gamma, Some(v)) = best else { return phi };
    let y = x / gamma;
    let vn = v.norm();
    let mut rest = y.clone();
    let mut face = Vec::new();
    for (i, ai) in a.iter().enumerate() {
        let t = ai.dot(&v);
        if t.abs() > 1e-9 * ai.norm() * vn {
            phi[i] = t.signum();
            rest -= ai * t.signum();
        } else if ai.norm() > 0.0 {
            face.push(i);
        }
    }
    if !face.is_empty() && rest.norm() > 1e-14 * y.norm() {
        // coordinates on the span of the face generators
        let d = x.len();
        let mut g = DMatrix::zeros(d, d);
        for &i in &face {
            g += &a[i] * a[i].transpose();
        }
        let eig = SymmetricEigen::new(g);
        let top = eig.eigenvalues.iter().fold(0.0f64, |p, &q| p.max(q));
        let cols: Vec<usize> = (0..d).filter(|&i| eig.eigenvalues[i] > 1e-12 * top).collect();
        let basis = DMatrix::from_fn(d, cols.len(), |r, c| eig.eigenvectors[(r, cols[c])]);
        let sub_a: Vec<DVector<f64>> = face.iter().map(|&i| basis.transpose() * &a[i]).collect();
        let sub_x = basis.transpose() * &rest;
        let sub = zonotope_repr(&sub_a, &sub_x, None);
        for (k, &i) in face.iter().enumerate() {
            phi[i] = sub[k];
        }
    }
    for p in phi.iter_mut() {
        *p *= gamma;
    }
    phi
}

/// Kernel `k(x, y)` on `rows × region` with `avg_R k(x,·) f = g(x)`.
#[derive(Debug, Clone, Serialize)]
pub struct RepresentationKernel {
    pub s: f64,
    pub rows: Vec<usize>,
    pub region: Vec<usize>,
    /// `μ_y / μ(R)`.
    pub weights: Vec<f64>,
    /// One row per entry of `rows`, one column per entry of `region`.
    pub values: Vec<Vec<f64>>,
}

impl RepresentationKernel {
    /// `max_x ‖k(x,·)‖_{L^{s'}(R, dμ/μ(R))}`.
    pub fn mixed_norm(&self) -> f64 {
        self.values.iter().map(|row| lsp_norm(row, &self.weights, self.s)).fold(0.0, f64::max)
    }

    /// `avg_R k(x,·) f` for each row.
    pub fn apply(&self, f: &VectorField) -> Vec<DVector<f64>> {
        self.values
            .iter()
            .map(|row| {
                let mut out = DVector::zeros(f.dim);
                for ((&y, &w), &k) in self.region.iter().zip(&self.weights).zip(row) {
                    out += f.at(y) * (w * k);
                }
                out
            })
            .collect()
    }

    pub fn zero(s: f64, rows: Vec<usize>, region: Vec<usize>, weights: Vec<f64>) -> Self {
        let values = vec![vec![0.0; region.len()]; rows.len()];
        RepresentationKernel { s, rows, region, weights, values }
    }
}

/// Solves for each row point its least-norm representer of `g(x)` in the
/// body. Fails with `Infeasible` when `g(x)` is outside the body beyond
/// `1e-6`.
pub fn kernel_representation(rows: &[usize], g: &[DVector<f64>], body: &ConvexBodyAvg) -> Result<RepresentationKernel> {
    let mut values = Vec::with_capacity(rows.len());
    for (&x, gx) in rows.iter().zip(g) {
        let gauge = body.gauge(gx);
        if !(gauge <= 1.0 + 1e-6) {
            return Err(Error::Infeasible { point: x, gauge });
        }
        let (phi, _) = body.represent(gx)?;
        values.push(phi);
    }
    Ok(RepresentationKernel { s: body.s, rows: rows.to_vec(), region: body.region.clone(), weights: body.weights.clone(), values })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_vec(x.to_vec())
    }

    #[test]
    fn interval_body() {
        let s = FiniteSpace::uniform_line(3);
        let f = VectorField::from_scalar(&[1.0, 1.0, 1.0]);
        let b = ConvexBodyAvg::new(&f, 1.0, &[0, 1, 2], &s).unwrap();
        assert_eq!(b.support(&v(&[1.0])), 1.0);
        assert!((b.gauge(&v(&[0.5])) - 0.5).abs() < 1e-14);
        let (phi, g) = b.represent(&v(&[1.0])).unwrap();
        assert!((g - 1.0).abs() < 1e-14);
        assert!(phi.iter().all(|p| (p - 1.0).abs() < 1e-12));
    }

    #[test]
    fn zero_body_only_contains_origin() {
        let s = FiniteSpace::uniform_line(2);
        let f = VectorField::zeros(2, 2);
        let b = ConvexBodyAvg::new(&f, 2.0, &[0, 1], &s).unwrap();
        assert!(b.membership(&v(&[0.0, 0.0]), 1e-6));
        assert!(!b.membership(&v(&[1e-3, 0.0]), 1e-6));
    }

    #[test]
    fn two_point_support_value() {
        let s = FiniteSpace::uniform_line(2);
        let f = VectorField::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let b = ConvexBodyAvg::new(&f, 2.0, &[0, 1], &s).unwrap();
        let u = v(&[1.0, 1.0]) / 2f64.sqrt();
        assert!((b.support(&u) - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn square_has_round_john_ellipsoid() {
        let s = FiniteSpace::uniform_line(2);
        let f = VectorField::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let b = ConvexBodyAvg::new(&f, 1.0, &[0, 1], &s).unwrap();
        let j = b.john().unwrap();
        assert!((j.semi_axes[0] - j.semi_axes[1]).abs() < 1e-4);
        assert!((j.semi_axes[0] - 0.5).abs() < 1e-4);
    }
}
