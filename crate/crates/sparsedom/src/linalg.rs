//! Small dense linear algebra: SPD powers, operator norms, direction sets and
//! a gauge-fitted ellipsoid.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Spectral data of a symmetric positive-definite matrix.
#[derive(Debug, Clone)]
pub struct Spd {
    pub vectors: DMatrix<f64>,
    pub values: DVector<f64>,
}

impl Spd {
    pub fn new(m: &DMatrix<f64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::InvalidArgument("matrix is not square".into()));
        }
        let sym = (m + m.transpose()) * 0.5;
        let scale = sym.abs().max().max(f64::MIN_POSITIVE);
        if (m - &sym).abs().max() > 1e-10 * scale {
            return Err(Error::InvalidArgument("matrix is not symmetric".into()));
        }
        let eig = SymmetricEigen::try_new(sym, f64::EPSILON, 0)
            .ok_or_else(|| Error::NumericalFailure("eigendecomposition did not converge".into()))?;
        if eig.eigenvalues.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
            return Err(Error::InvalidArgument("matrix is not positive definite".into()));
        }
        Ok(Spd { vectors: eig.eigenvectors, values: eig.eigenvalues })
    }

    pub fn power(&self, t: f64) -> DMatrix<f64> {
        let d = DMatrix::from_diagonal(&self.values.map(|v| v.powf(t)));
        &self.vectors * d * self.vectors.transpose()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.values.min()
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.values.max()
    }
}

/// `A^t` for SPD `A`.
pub fn spd_power(a: &DMatrix<f64>, t: f64) -> Result<DMatrix<f64>> {
    Ok(Spd::new(a)?.power(t))
}

/// Largest singular value.
pub fn op_norm(a: &DMatrix<f64>) -> f64 {
    if a.nrows() == 1 && a.ncols() == 1 {
        return a[(0, 0)].abs();
    }
    let ata = a.transpose() * a;
    let eig = SymmetricEigen::new(ata);
    eig.eigenvalues.max().max(0.0).sqrt()
}

/// `|A^α B^α|_op`, `|AB|_op^α` and their ratio.
pub fn psd_power_check(a: &DMatrix<f64>, b: &DMatrix<f64>, alpha: f64) -> Result<(f64, f64, f64)> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!("alpha = {alpha} not in (0,1)")));
    }
    let lhs = op_norm(&(spd_power(a, alpha)? * spd_power(b, alpha)?));
    let rhs = op_norm(&(a * b)).powf(alpha);
    Ok((lhs, rhs, lhs / rhs))
}

pub fn random_unit(n: usize, rng: &mut ChaCha8Rng) -> DVector<f64> {
    loop {
        let v: DVector<f64> = DVector::from_fn(n, |_, _| StandardNormal.sample(rng));
        let norm = v.norm();
        if norm > 1e-12 {
            return v / norm;
        }
    }
}

/// Unit directions for polytope approximations: evenly spaced angles for
/// `n = 2`, a Fibonacci sphere for `n = 3`, otherwise the axes followed by
/// random orthonormal batches.
pub fn directions(n: usize, m: usize, seed: u64) -> Vec<DVector<f64>> {
    match n {
        0 => Vec::new(),
        1 => vec![DVector::from_element(1, 1.0)],
        2 => (0..m)
            .map(|k| {
                let t = std::f64::consts::PI * k as f64 / m as f64;
                DVector::from_vec(vec![t.cos(), t.sin()])
            })
            .collect(),
        3 => {
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..m)
                .map(|k| {
                    let z = 1.0 - (2.0 * k as f64 + 1.0) / m as f64;
                    let r = (1.0 - z * z).max(0.0).sqrt();
                    let t = golden * k as f64;
                    DVector::from_vec(vec![r * t.cos(), r * t.sin(), z])
                })
                .collect()
        }
        _ => {
            let mut out: Vec<DVector<f64>> = (0..n)
                .map(|i| {
                    let mut v = DVector::zeros(n);
                    v[i] = 1.0;
                    v
                })
                .collect();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            while out.len() < m {
                let g: DMatrix<f64> = DMatrix::from_fn(n, n, |_, _| StandardNormal.sample(&mut rng));
                let q = g.qr().q();
                for j in 0..n {
                    if out.len() < m {
                        out.push(q.column(j).into_owned());
                    }
                }
            }
            out
        }
    }
}

/// Centered minimum-volume enclosing ellipsoid of `±points`, returned as the
/// matrix `A` with `{x : xᵀ A x ≤ 1}`. Khachiyan's iteration with
/// Todd–Yildirim away steps.
///
/// Stops when both optimality conditions hold to `rel_tol`. When the
/// iteration budget runs out, the last iterate with `max g ≤ n(1 + rel_tol)`
/// is returned: it already encloses the points and its `1/√(n(1+rel_tol))`
/// shrink lies inside their hull.
pub fn mvee_centered(points: &[DVector<f64>], rel_tol: f64, max_iter: usize) -> Result<DMatrix<f64>> {
    let n = points[0].len();
    let m = points.len();
    let nf = n as f64;
    let mut u = vec![1.0 / m as f64; m];
    let mut g = vec![0.0; m];
    let mut inv = DMatrix::zeros(n, n);
    let mut enclosing: Option<DMatrix<f64>> = None;
    for it in 0..max_iter {
        // X⁻¹ and g follow rank-one updates; refresh against drift
        if it % 64 == 0 {
            let mut x = DMatrix::zeros(n, n);
            for (p, &w) in points.iter().zip(&u) {
                if w > 0.0 {
                    x += w * p * p.transpose();
                }
            }
            inv = x.try_inverse().ok_or_else(|| Error::NumericalFailure("degenerate point set for ellipsoid".into()))?;
            for (k, p) in points.iter().enumerate() {
                g[k] = (p.transpose() * &inv * p)[(0, 0)];
            }
        }
        let (jmax, gmax) = g.iter().enumerate().fold((0, f64::MIN), |b, (k, &v)| if v > b.1 { (k, v) } else { b });
        let (jmin, gmin) = g
            .iter()
            .enumerate()
            .filter(|(k, _)| u[*k] > 0.0)
            .fold((0, f64::MAX), |b, (k, &v)| if v < b.1 { (k, v) } else { b });
        if gmax <= nf * (1.0 + rel_tol) {
            if gmin >= nf * (1.0 - rel_tol) {
                return Ok(inv / nf);
            }
            enclosing = Some(&inv / nf);
        }
        let (j, lam, drop) = if gmax - nf >= nf - gmin {
            (jmax, (gmax - nf) / (nf * (gmax - 1.0)), false)
        } else {
            let lam = (gmin - nf) / (nf * (gmin - 1.0));
            let limit = -u[jmin] / (1.0 - u[jmin]);
            (jmin, lam.max(limit), lam <= limit)
        };
        // X' = (1-λ)X + λ p pᵀ
        let v = &inv * &points[j];
        let gj = g[j];
        let denom = (1.0 - lam) + lam * gj;
        if !(denom > 0.0) {
            return Err(Error::NumericalFailure("ellipsoid update lost definiteness".into()));
        }
        let c = lam / denom;
        for (k, p) in points.iter().enumerate() {
            let d = v.dot(p);
            g[k] = (g[k] - c * d * d) / (1.0 - lam);
        }
        inv = (&inv - (&v * v.transpose()) * c) / (1.0 - lam);
        for w in u.iter_mut() {
            *w *= 1.0 - lam;
        }
        u[j] += lam;
        if drop {
            u[j] = 0.0;
        }
    }
    enclosing.ok_or(Error::EllipsoidNotConverged { iterations: max_iter })
}

/// SPD matrix `G` with `|G u| ≤ h(u) ≤ ratio · |G u|`.
#[derive(Debug, Clone)]
pub struct EllipsoidFit {
    pub matrix: DMatrix<f64>,
    /// Largest sampled `h(u)/|Gu|`.
    pub ratio: f64,
}

/// Fits an ellipsoidal norm below a gauge `h` (a norm on `R^n`): the
/// minimum-volume ellipsoid around the unit ball of `h`, estimated from
/// sampled boundary points, refined by adding the worst directions found,
/// then scaled so `|Gu| ≤ h(u)` on every probe.
pub fn fit_gauge(n: usize, h: &dyn Fn(&DVector<f64>) -> f64, seed: u64) -> Result<EllipsoidFit> {
    if n == 1 {
        let v = h(&DVector::from_element(1, 1.0));
        return Ok(EllipsoidFit { matrix: DMatrix::from_element(1, 1, v), ratio: 1.0 });
    }
    let m = (2 * n * n).max(64);
    let mut dirs = directions(n, m, seed);
    let probes = directions(n, 1000 * n, seed ^ 0x5eed);
    let mut best: Option<(DMatrix<f64>, f64, f64)> = None;
    for _round in 0..6 {
        let pts: Vec<DVector<f64>> = dirs.iter().map(|u| u / h(u)).collect();
        // a (1 + ε)-enclosing ellipsoid costs a factor √(1 + ε) in the
        // sandwich, about 5e-5 here
        let a = mvee_centered(&pts, 1e-4, 20_000)?;
        let g = Spd::new(&a)?.power(0.5);
        let lo = |u: &DVector<f64>| (&g * u).norm() / h(u);
        let (mut lo_max, lo_dir) = maximize_on_sphere(n, &lo, &probes);
        // the contact points of the enclosing ellipsoid are where `lo` peaks
        lo_max = dirs.iter().map(|u| lo(u)).fold(lo_max, f64::max);
        let hi = |u: &DVector<f64>| h(u) / (&g * u).norm();
        let (hi_max, hi_dir) = maximize_on_sphere(n, &hi, &probes);
        let ratio = lo_max * hi_max;
        let better = best.as_ref().map_or(true, |b| ratio < b.2);
        if better {
            best = Some((g.clone() / lo_max, lo_max, ratio));
        }
        if ratio <= (n as f64).sqrt() * (1.0 + 1e-6) {
            break;
        }
        dirs.push(lo_dir);
        dirs.push(hi_dir);
    }
    let (g, _, ratio) = best.unwrap();
    let g = g / (1.0 + 1e-9);
    Ok(EllipsoidFit { matrix: g, ratio: ratio * (1.0 + 1e-9) })
}

/// Maximizes a positive, even function on the unit sphere: best sampled
/// probes followed by a shrinking coordinate search.
pub fn maximize_on_sphere(n: usize, f: &dyn Fn(&DVector<f64>) -> f64, probes: &[DVector<f64>]) -> (f64, DVector<f64>) {
    let mut scored: Vec<(f64, usize)> = probes.iter().enumerate().map(|(i, u)| (f(u), i)).collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut best = (f64::MIN, probes[0].clone());
    for &(v0, i) in scored.iter().take(12) {
        let mut u = probes[i].clone();
        let mut v = v0;
        let mut step = 0.25;
        while step > 1e-7 {
            let mut moved = false;
            for k in 0..n {
                for sgn in [1.0, -1.0] {
                    let mut w = u.clone();
                    w[k] += sgn * step;
                    let norm = w.norm();
                    if norm < 1e-12 {
                        continue;
                    }
                    w /= norm;
                    let fw = f(&w);
                    if fw > v {
                        v = fw;
                        u = w;
                        moved = true;
                    }
                }
            }
            if !moved {
                step *= 0.5;
            }
        }
        if v > best.0 {
            best = (v, u);
        }
    }
    best
}
