//! One stopping step and its iteration into a sparse family.

use std::fmt::Write as _;

use nalgebra::DVector;
use serde::Serialize;

use crate::convex_body::{RepresentationKernel, VectorField};
use crate::dyadic::{carleson_constant, certify_sparse, covering_partition, CubeFamily, SparseCertificate};
use crate::error::{Error, Result};
use crate::operators::maximal::maximal_r;
use crate::sparse_engine::config::{Instance, StoppingConfig};

/// Gauge slack accepted for residual membership.
pub const MEMBERSHIP_TOL: f64 = 1e-6;

/// Relative slack on the stopping thresholds. The envelopes are attained by
/// the values they bound, recomputed here in a different summation order.
pub const THRESHOLD_TOL: f64 = 1e-12;

/// `inf_{P_j ∖ Ω} |T(⟨f,e_i⟩ χ_{αP_j})|` against its bound.
#[derive(Debug, Clone, Serialize)]
pub struct InfBound {
    pub cube: usize,
    pub axis: usize,
    pub value: f64,
    pub bound: f64,
}

impl InfBound {
    pub fn holds(&self) -> bool {
        self.value <= self.bound * (1.0 + 1e-9) + 1e-300
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OneStepResult {
    pub cube: usize,
    pub selected: Vec<usize>,
    pub omega: Vec<usize>,
    /// `T(fχ_{αQ})χ_Q − Σ_j T(fχ_{αP_j})χ_{P_j}`, zero off `Q`.
    #[serde(skip)]
    pub residual: VectorField,
    /// The formula value of `κ` the residual was tested against.
    pub kappa: f64,
    /// Least-norm representers of `residual/κ` on `Q × αQ`.
    pub kernel: RepresentationKernel,
    pub max_gauge: f64,
    /// `Σ μ(P_j) / μ(Q)`.
    pub packing: f64,
    /// Points of `Q` passing the per-axis test `|⟨e_i, y⟩| ≤ h(e_i)/n`.
    pub axis_certified: usize,
    pub inf_bounds: Vec<InfBound>,
}

/// Points of `Q` where some axis test exceeds its threshold.
fn exceptional_set(inst: &Instance, q: usize, cfg: &StoppingConfig) -> Result<Vec<usize>> {
    let d = inst.cube(q)?;
    let members = &inst.sys.cube(q).members;
    let n = inst.space.len();
    let mut hit = vec![false; n];
    let mfac = cfg.maximal_factor() * (1.0 + THRESHOLD_TOL);
    let b = cfg.b_rho * (1.0 + THRESHOLD_TOL);
    for (g, &avg) in d.comps.iter().zip(&d.avgs) {
        if g.iter().all(|&v| v == 0.0) {
            continue;
        }
        let ms = maximal_r(g, cfg.s, inst.space);
        let tg = inst.t.apply_on(g, &d.region.members);
        let sh = inst.sharp(g);
        for &x in members {
            if ms[x] > mfac * avg || tg[x].abs() > b * avg || sh[x] > b * avg {
                hit[x] = true;
            }
        }
    }
    Ok(members.iter().copied().filter(|&x| hit[x]).collect())
}

/// Maximal cubes `P ∈ 𝒟(Q)` with `μ(P ∩ Ω) > μ(P)/c₂`.
fn cz_cubes(inst: &Instance, q: usize, omega: &[usize], c2: f64) -> Vec<usize> {
    let mut in_omega = vec![false; inst.space.len()];
    for &x in omega {
        in_omega[x] = true;
    }
    let mut out = Vec::new();
    let mut stack = vec![q];
    while let Some(p) = stack.pop() {
        let c = inst.sys.cube(p);
        let m: f64 = c.members.iter().filter(|&&x| in_omega[x]).map(|&x| inst.space.mass(x)).sum();
        if m == 0.0 {
            continue;
        }
        if m > c.measure / c2 {
            out.push(p);
        } else {
            stack.extend(c.children.iter().rev().copied());
        }
    }
    out
}

/// The stopping step on `Q`: exceptional set, CZ cubes, residual and its
/// representation in `κ⟨⟨f⟩⟩_{s,αQ}`.
pub fn one_step_decompose(inst: &Instance, q: usize, cfg: &StoppingConfig) -> Result<OneStepResult> {
    let d = inst.cube(q)?;
    let cube = inst.sys.cube(q);
    let omega = exceptional_set(inst, q, cfg)?;
    let selected = cz_cubes(inst, q, &omega, cfg.c2);
    let packing = selected.iter().fold(0.0, |a, &p| a + inst.sys.cube(p).measure) / cube.measure;
    if packing > 0.5 * (1.0 + 1e-12) {
        return Err(Error::ConstructionFailed { cube: q, reason: format!("packing {packing} exceeds 1/2") });
    }

    let mut in_omega = vec![false; inst.space.len()];
    for &x in &omega {
        in_omega[x] = true;
    }
    let mfac = cfg.maximal_factor();
    let mut inf_bounds = Vec::new();
    for &p in &selected {
        let pd = inst.cube(p)?;
        let outside: Vec<usize> = inst.sys.cube(p).members.iter().copied().filter(|&x| !in_omega[x]).collect();
        for (i, g) in d.comps.iter().enumerate() {
            let tg = inst.t.apply_on(g, &pd.region.members);
            let value = outside.iter().map(|&x| tg[x].abs()).fold(f64::INFINITY, f64::min);
            inf_bounds.push(InfBound { cube: p, axis: i, value, bound: cfg.b_rho * mfac * d.avgs[i] });
        }
    }

    let big = inst.t.apply_vec_on(inst.f, &d.region.members);
    let mut residual = VectorField::zeros(inst.f.dim, inst.space.len());
    for &x in &cube.members {
        residual.values[x] = big[x].clone();
    }
    for &p in &selected {
        let pd = inst.cube(p)?;
        let part = inst.t.apply_vec_on(inst.f, &pd.region.members);
        for &x in &inst.sys.cube(p).members {
            residual.values[x] -= &part[x];
        }
    }

    let rows = cube.members.clone();
    let mut kernel = RepresentationKernel::zero(inst.s, rows.clone(), d.body.region.clone(), d.body.weights.clone());
    let mut max_gauge: f64 = 0.0;
    let mut axis_certified = 0;
    let nf = inst.f.dim as f64;
    for (row, &x) in rows.iter().enumerate() {
        let res = &residual.values[x];
        if res.iter().all(|&v| v == 0.0) {
            axis_certified += 1;
            continue;
        }
        if cfg.kappa == 0.0 {
            return Err(Error::MembershipFailed { point: x, cube: q, reason: "nonzero residual with kappa = 0".into() });
        }
        let y: DVector<f64> = res / cfg.kappa;
        if d.axes.iter().zip(&d.avgs).all(|(e, &h)| e.dot(&y).abs() <= h / nf) {
            axis_certified += 1;
        }
        let (phi, gauge) = d.body.represent(&y).map_err(|_| Error::MembershipFailed {
            point: x,
            cube: q,
            reason: "residual leaves the span of the body".into(),
        })?;
        if !(gauge <= 1.0 + MEMBERSHIP_TOL) {
            return Err(Error::MembershipFailed { point: x, cube: q, reason: format!("gauge {gauge}") });
        }
        max_gauge = max_gauge.max(gauge);
        kernel.values[row] = phi;
    }

    Ok(OneStepResult { cube: q, selected, omega, residual, kappa: cfg.kappa, kernel, max_gauge, packing, axis_certified, inf_bounds })
}

#[derive(Debug, Clone, Serialize)]
pub struct SparseCube {
    pub cube: usize,
    /// Center of `αQ`.
    pub center: usize,
    pub generation: usize,
    /// Kernel on `Q × αQ`, rescaled to mixed norm at most 1.
    pub kernel: RepresentationKernel,
    pub region_measure: f64,
    pub selected: Vec<usize>,
    pub packing: f64,
    pub max_gauge: f64,
    pub axis_certified: usize,
    pub inf_bounds_hold: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SparseDecomposition {
    pub config: StoppingConfig,
    /// `κ` actually used: the formula value times `max(1, max gauge)`.
    pub kappa: f64,
    pub kappa_formula: f64,
    pub partition: Vec<usize>,
    pub cubes: Vec<SparseCube>,
    pub family: CubeFamily,
    pub sparse: SparseCertificate,
    pub carleson: f64,
    pub max_mixed_norm: f64,
    pub max_packing: f64,
    pub reconstruction_error: f64,
}

/// Relative reconstruction tolerance of the kernel identity.
pub const RECONSTRUCTION_TOL: f64 = 1e-7;
/// Slack on the unit mixed-norm bound.
pub const MIXED_NORM_TOL: f64 = 1e-9;

impl SparseDecomposition {
    /// `κ Σ_Q avg_{αQ} k_Q(x,·) f χ_Q(x)`.
    pub fn evaluate(&self, f: &VectorField) -> Vec<DVector<f64>> {
        let mut out = vec![DVector::zeros(f.dim); f.len()];
        for c in &self.cubes {
            for (&x, v) in c.kernel.rows.iter().zip(c.kernel.apply(f)) {
                out[x] += v * self.kappa;
            }
        }
        out
    }

    /// `κ Σ_Q ⟨|f|⟩_{s,αQ} χ_Q`.
    pub fn sparse_operator(&self, f: &VectorField) -> Vec<f64> {
        let s = self.config.s;
        let mut out = vec![0.0; f.len()];
        for c in &self.cubes {
            let avg: f64 = c.kernel.region.iter().zip(&c.kernel.weights).map(|(&y, &w)| w * f.at(y).norm().powf(s)).sum::<f64>().powf(1.0 / s);
            for &x in &c.kernel.rows {
                out[x] += self.kappa * avg;
            }
        }
        out
    }

    /// All certificates: ½-sparse, Carleson ≤ 2, mixed norms, packing,
    /// inf-bounds and reconstruction.
    pub fn certified(&self) -> bool {
        self.sparse.is_sparse()
            && self.carleson <= 2.0 * (1.0 + 1e-9)
            && self.max_mixed_norm <= 1.0 + MIXED_NORM_TOL
            && self.max_packing <= 0.5 * (1.0 + 1e-12)
            && self.cubes.iter().all(|c| c.inf_bounds_hold)
            && self.reconstruction_error <= RECONSTRUCTION_TOL
    }

    pub fn dump(&self) -> String {
        let mut s = String::new();
        let c = &self.config;
        let _ = writeln!(s, "kappa {:.12e}", self.kappa);
        let _ = writeln!(s, "kappa_formula {:.12e}", self.kappa_formula);
        let _ = writeln!(
            s,
            "config n={} alpha={} q={} r={} s={} rho={:.6e} c1={:.6} c2={} psi={:.6e} phi={:.6e} maximal_weak_norm={:.6}",
            c.n, c.alpha, c.q, c.r, c.s, c.rho, c.c1, c.c2, c.psi_rho, c.phi_rho, c.maximal_weak_norm
        );
        let _ = writeln!(s, "partition {:?}", self.partition);
        let _ = writeln!(s, "cubes {}", self.cubes.len());
        let _ = writeln!(s, "sparse {}", self.sparse.is_sparse());
        let _ = writeln!(s, "carleson {:.12}", self.carleson);
        let _ = writeln!(s, "max_mixed_norm {:.12}", self.max_mixed_norm);
        let _ = writeln!(s, "max_packing {:.12}", self.max_packing);
        let _ = writeln!(s, "reconstruction_error {:.6e}", self.reconstruction_error);
        let witnesses = match &self.sparse {
            SparseCertificate::Sparse { witnesses, .. } => Some(witnesses),
            SparseCertificate::NotSparse { .. } => None,
        };
        for (i, q) in self.cubes.iter().enumerate() {
            let _ = write!(
                s,
                "cube {} gen {} size {} region {} norm {:.9} gauge {:.9} packing {:.6} selected {:?}",
                q.cube,
                q.generation,
                q.kernel.rows.len(),
                q.kernel.region.len(),
                q.kernel.mixed_norm(),
                q.max_gauge,
                q.packing,
                q.selected
            );
            if let Some(w) = witnesses {
                let pts: Vec<usize> = w[i].iter().map(|p| p.0).collect();
                let _ = write!(s, " witness {pts:?}");
            }
            s.push('\n');
        }
        s
    }
}

/// Iterates the stopping step from a covering partition of `supp f` down to
/// singletons and certifies the result.
pub fn sparse_dominate(inst: &Instance, cfg: &StoppingConfig) -> Result<SparseDecomposition> {
    let space = inst.space;
    let support: Vec<usize> = (0..space.len()).filter(|&x| inst.f.at(x).iter().any(|&v| v != 0.0)).collect();
    if support.is_empty() {
        return Ok(SparseDecomposition {
            config: cfg.clone(),
            kappa: cfg.kappa,
            kappa_formula: cfg.kappa,
            partition: Vec::new(),
            cubes: Vec::new(),
            family: CubeFamily::default(),
            sparse: SparseCertificate::Sparse { eta: 0.5, witnesses: Vec::new() },
            carleson: 0.0,
            max_mixed_norm: 0.0,
            max_packing: 0.0,
            reconstruction_error: 0.0,
        });
    }
    let partition = covering_partition(inst.sys, space, &support, inst.alpha)?;
    let mut steps: Vec<(OneStepResult, usize)> = Vec::new();
    let mut stack: Vec<(usize, usize)> = partition.iter().rev().map(|&q| (q, 0)).collect();
    while let Some((q, gen)) = stack.pop() {
        let step = one_step_decompose(inst, q, cfg)?;
        for &p in step.selected.iter().rev() {
            stack.push((p, gen + 1));
        }
        steps.push((step, gen));
    }

    let max_gauge = steps.iter().map(|s| s.0.max_gauge).fold(0.0, f64::max);
    let scale = max_gauge.max(1.0);
    let kappa = cfg.kappa * scale;
    let cubes: Vec<SparseCube> = steps
        .into_iter()
        .map(|(st, generation)| {
            let mut kernel = st.kernel;
            if scale != 1.0 {
                for row in &mut kernel.values {
                    for v in row.iter_mut() {
                        *v /= scale;
                    }
                }
            }
            SparseCube {
                cube: st.cube,
                center: inst.sys.cube(st.cube).center,
                generation,
                region_measure: inst.cube(st.cube).map(|d| d.region.measure).unwrap_or(f64::NAN),
                kernel,
                selected: st.selected,
                packing: st.packing,
                max_gauge: st.max_gauge,
                axis_certified: st.axis_certified,
                inf_bounds_hold: st.inf_bounds.iter().all(|b| b.holds()),
            }
        })
        .collect();
    let family = CubeFamily::new(cubes.iter().map(|c| c.cube).collect());
    let sparse = certify_sparse(inst.sys, space, &family, 0.5);
    let carleson = carleson_constant(inst.sys, &family);
    let max_mixed_norm = cubes.iter().map(|c| c.kernel.mixed_norm()).fold(0.0, f64::max);
    let max_packing = cubes.iter().map(|c| c.packing).fold(0.0, f64::max);
    let mut dec = SparseDecomposition {
        config: cfg.clone(),
        kappa,
        kappa_formula: cfg.kappa,
        partition,
        cubes,
        family,
        sparse,
        carleson,
        max_mixed_norm,
        max_packing,
        reconstruction_error: 0.0,
    };
    dec.reconstruction_error = reconstruction_error(&inst.t.apply_vec(inst.f).values, &dec.evaluate(inst.f));
    Ok(dec)
}

/// `max_x |a(x) − b(x)| / max_x |a(x)|`, zero when both vanish.
pub fn reconstruction_error(a: &[DVector<f64>], b: &[DVector<f64>]) -> f64 {
    let diff = a.iter().zip(b).map(|(u, v)| (u - v).norm()).fold(0.0, f64::max);
    if diff == 0.0 {
        return 0.0;
    }
    let scale = a.iter().map(|u| u.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        f64::INFINITY
    } else {
        diff / scale
    }
}

/// Calibrates on the instance and decomposes.
pub fn dominate(inst: &Instance, q: f64, r: f64) -> Result<SparseDecomposition> {
    let cfg = crate::sparse_engine::config::calibrate_config(inst, q, r)?;
    sparse_dominate(inst, &cfg)
}
