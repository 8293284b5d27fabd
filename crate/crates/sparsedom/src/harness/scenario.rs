//! Scenario files and the instances they describe.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::convex_body::VectorField;
use crate::dyadic::{build_dyadic_system, DyadicSystem};
use crate::error::{Error, Result};
use crate::matrix_weight::MatrixWeight;
use crate::operators::{build_haar_system, kernel_from_haar, EtaSymbol, KernelOperator};
use crate::space::{dyadic_metric, DyadicTree, FiniteSpace, Nested};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointSpec {
    pub id: usize,
    pub mass: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricSpec {
    /// Row-major `N × N` distances.
    Matrix(Vec<f64>),
    /// Nested lists of point ids; the dyadic metric of the tree.
    Tree(Nested),
    /// One coordinate per point.
    Line(Vec<f64>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Generator {
    UniformTree { arity: usize, depth: usize },
    RandomTree {
        leaves: usize,
        #[serde(default = "default_arity")]
        max_arity: usize,
        #[serde(default)]
        random_mass: bool,
        seed: Option<u64>,
    },
    UniformLine { n: usize },
    Planar {
        n: usize,
        #[serde(default = "one")]
        power: f64,
        seed: Option<u64>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpaceSpec {
    Explicit { points: Vec<PointSpec>, metric: MetricSpec },
    Generated { generate: Generator },
}

/// Matrix weights. `t(x)` below is the distance from point 0, shifted by
/// half the smallest positive distance and divided by the diameter.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightSpec {
    #[default]
    Identity,
    /// `U diag(t^{a_i}) Uᵀ` with a seeded rotation `U`; a single exponent is
    /// repeated.
    Power { exponents: Vec<f64> },
    /// `R(θ) diag(t^a, t^{-a}, 1, …) R(θ)ᵀ` with `θ = 2π · turns · t`.
    Rotating { exponent: f64, turns: f64 },
    /// `U_x diag(exp(spread g)) U_xᵀ` with independent rotations and normal `g`.
    Random { spread: f64 },
    /// `R(θ) diag(1, …, 1/condition) R(θ)ᵀ` with `θ = angle · t`.
    Degenerate { condition: f64, angle: f64 },
    /// Row-major `n × n` matrices, one per point.
    Explicit { values: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OperatorSpec {
    #[default]
    Petermichl,
    /// Haar multiplier with `η` uniform in `[-amplitude, amplitude]`.
    Haar { amplitude: f64 },
    Identity,
    Zero,
    /// Row-major kernel `K(x, y)`.
    Kernel { values: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    Maximal,
    Cz,
    Endpoint,
    A2,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    #[default]
    Measured,
    T1,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub id: String,
    pub space: SpaceSpec,
    #[serde(default)]
    pub weight: WeightSpec,
    #[serde(default)]
    pub operator: OperatorSpec,
    #[serde(default = "two")]
    pub p: f64,
    #[serde(default = "one")]
    pub q: f64,
    #[serde(default = "one")]
    pub r: f64,
    /// Defaults to `max(q, r)` for the measured route and `r'` for the T(1)
    /// route.
    #[serde(default)]
    pub s: Option<f64>,
    /// Defaults to `3 c_d² / δ`.
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default = "half")]
    pub delta: f64,
    #[serde(default = "one_usize")]
    pub dim: usize,
    #[serde(default)]
    pub seed: u64,
    /// Number of instances, with seeds `seed, seed + 1, …`.
    #[serde(default = "one_usize")]
    pub campaign: usize,
    #[serde(default = "default_checks")]
    pub checks: Vec<Check>,
    #[serde(default)]
    pub route: Route,
    /// Run the sparse decomposition.
    #[serde(default = "yes")]
    pub decompose: bool,
    /// Exponents of the scalar power-weight ladder for the A₂ check.
    #[serde(default)]
    pub ladder: Vec<f64>,
    /// Explicit input rows; random normal entries otherwise.
    #[serde(default)]
    pub input: Option<Vec<Vec<f64>>>,
}

fn one() -> f64 {
    1.0
}
fn two() -> f64 {
    2.0
}
fn half() -> f64 {
    0.5
}
fn one_usize() -> usize {
    1
}
fn yes() -> bool {
    true
}
fn default_arity() -> usize {
    2
}
fn default_checks() -> Vec<Check> {
    vec![Check::Maximal, Check::Cz, Check::Endpoint]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum ScenarioFile {
    List { scenarios: Vec<Scenario> },
    Single(Box<Scenario>),
}

/// Parses one scenario object or `{"scenarios": [...]}`.
pub fn parse_scenarios(text: &str) -> Result<Vec<Scenario>> {
    let file: ScenarioFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let list = match file {
        ScenarioFile::List { scenarios } => scenarios,
        ScenarioFile::Single(s) => vec![*s],
    };
    for s in &list {
        s.validate()?;
    }
    Ok(list)
}

pub fn load_scenarios(path: &Path) -> Result<Vec<Scenario>> {
    let text = std::fs::read_to_string(path)?;
    parse_scenarios(&text)
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Parse(format!("scenario {}: {m}", self.id)));
        if !(self.p > 1.0) || !self.p.is_finite() {
            return bad(format!("p = {} must be finite and exceed 1", self.p));
        }
        if !(self.q >= 1.0) || !(self.r >= 1.0) {
            return bad("q and r must be at least 1".into());
        }
        if self.route == Route::T1 && !(self.r > 1.0) {
            return bad("the T(1) route needs r > 1".into());
        }
        if let Some(s) = self.s {
            if !(s >= 1.0) || !s.is_finite() {
                return bad(format!("s = {s} must be finite and at least 1"));
            }
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return bad(format!("delta = {} must lie in (0, 1)", self.delta));
        }
        if self.dim == 0 || self.campaign == 0 {
            return bad("dim and campaign must be positive".into());
        }
        if let WeightSpec::Rotating { .. } = self.weight {
            if self.dim < 2 {
                return bad("rotating weights need dim >= 2".into());
            }
        }
        if let Some(rows) = &self.input {
            if rows.iter().any(|r| r.len() != self.dim) {
                return bad("input rows must have dim entries".into());
            }
        }
        Ok(())
    }

    /// The scenario for instance `i` of its campaign.
    pub fn instance(&self, i: usize) -> Scenario {
        let mut s = self.clone();
        s.seed = self.seed.wrapping_add(i as u64);
        s.campaign = 1;
        s
    }

    pub fn s_exponent(&self) -> f64 {
        match (self.s, self.route) {
            (Some(s), _) => s,
            (None, Route::Measured) => self.q.max(self.r),
            (None, Route::T1) => self.r / (self.r - 1.0),
        }
    }
}

/// A scenario turned into concrete objects.
#[derive(Debug, Clone)]
pub struct Built {
    pub space: FiniteSpace,
    pub sys: DyadicSystem,
    pub weight: MatrixWeight,
    pub operator: KernelOperator,
    pub f: VectorField,
    pub alpha: f64,
}

pub fn build_space(spec: &SpaceSpec, seed: u64) -> Result<FiniteSpace> {
    match spec {
        SpaceSpec::Explicit { points, metric } => {
            let n = points.len();
            let mut mass = vec![f64::NAN; n];
            for p in points {
                if p.id >= n || !mass[p.id].is_nan() {
                    return Err(Error::Parse(format!("point ids must be a permutation of 0..{n}")));
                }
                mass[p.id] = p.mass;
            }
            match metric {
                MetricSpec::Matrix(d) => {
                    if d.len() != n * n {
                        return Err(Error::Parse(format!("distance matrix needs {} entries", n * n)));
                    }
                    FiniteSpace::new(mass, d.clone())
                }
                MetricSpec::Tree(shape) => Ok(dyadic_metric(&DyadicTree::from_nested(shape, &mass)?)),
                MetricSpec::Line(c) => {
                    if c.len() != n {
                        return Err(Error::Parse(format!("line metric needs {n} coordinates")));
                    }
                    FiniteSpace::from_line(c, mass)
                }
            }
        }
        SpaceSpec::Generated { generate } => Ok(match *generate {
            Generator::UniformTree { arity, depth } => dyadic_metric(&DyadicTree::uniform(arity, depth)),
            Generator::RandomTree { leaves, max_arity, random_mass, seed: s } => {
                dyadic_metric(&DyadicTree::random(leaves, max_arity, random_mass, s.unwrap_or(seed)))
            }
            Generator::UniformLine { n } => FiniteSpace::uniform_line(n),
            Generator::Planar { n, power, seed: s } => FiniteSpace::random_planar(n, power, s.unwrap_or(seed)),
        }),
    }
}

/// Normalized distance from point 0, bounded away from 0.
pub fn position(space: &FiniteSpace) -> Vec<f64> {
    let row = space.row(0);
    let gap = row.iter().copied().filter(|&d| d > 0.0).fold(f64::INFINITY, f64::min);
    let gap = if gap.is_finite() { gap } else { 1.0 };
    let diam = space.diameter().max(gap);
    row.iter().map(|&d| (d + gap / 2.0) / (diam + gap / 2.0)).collect()
}

fn rotation(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| StandardNormal.sample(rng));
    g.qr().q()
}

fn plane_rotation(n: usize, theta: f64) -> DMatrix<f64> {
    let mut r = DMatrix::identity(n, n);
    let (s, c) = theta.sin_cos();
    r[(0, 0)] = c;
    r[(0, 1)] = -s;
    r[(1, 0)] = s;
    r[(1, 1)] = c;
    r
}

fn conjugate(u: &DMatrix<f64>, diag: &[f64]) -> DMatrix<f64> {
    let d = DMatrix::from_diagonal(&DVector::from_column_slice(diag));
    let m = u * d * u.transpose();
    (&m + m.transpose()) * 0.5
}

pub fn build_weight(spec: &WeightSpec, dim: usize, space: &FiniteSpace, seed: u64) -> Result<MatrixWeight> {
    let n = space.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0001);
    let t = position(space);
    match spec {
        WeightSpec::Identity => Ok(MatrixWeight::identity(dim, n)),
        WeightSpec::Power { exponents } => {
            if exponents.is_empty() {
                return Err(Error::Parse("power weight needs an exponent".into()));
            }
            let a: Vec<f64> = (0..dim).map(|i| exponents[i.min(exponents.len() - 1)]).collect();
            let u = rotation(dim, &mut rng);
            MatrixWeight::new(t.iter().map(|&tx| conjugate(&u, &a.iter().map(|&e| tx.powf(e)).collect::<Vec<_>>())).collect())
        }
        WeightSpec::Rotating { exponent, turns } => MatrixWeight::new(
            t.iter()
                .map(|&tx| {
                    let mut d = vec![1.0; dim];
                    d[0] = tx.powf(*exponent);
                    d[1] = tx.powf(-exponent);
                    conjugate(&plane_rotation(dim, std::f64::consts::TAU * turns * tx), &d)
                })
                .collect(),
        ),
        WeightSpec::Random { spread } => MatrixWeight::new(
            (0..n)
                .map(|_| {
                    let u = rotation(dim, &mut rng);
                    let d: Vec<f64> = (0..dim).map(|_| (spread * rng.sample::<f64, _>(StandardNormal)).exp()).collect();
                    conjugate(&u, &d)
                })
                .collect(),
        ),
        WeightSpec::Degenerate { condition, angle } => {
            if !(*condition >= 1.0) {
                return Err(Error::Parse("condition must be at least 1".into()));
            }
            let mut d = vec![1.0; dim];
            d[dim - 1] = 1.0 / condition;
            MatrixWeight::new(
                t.iter()
                    .map(|&tx| if dim >= 2 { conjugate(&plane_rotation(dim, angle * tx), &d) } else { DMatrix::from_element(1, 1, 1.0 + (condition - 1.0) * tx) })
                    .collect(),
            )
        }
        WeightSpec::Explicit { values } => {
            if values.len() != n || values.iter().any(|v| v.len() != dim * dim) {
                return Err(Error::Parse(format!("explicit weight needs {n} matrices of {dim}x{dim}")));
            }
            MatrixWeight::new(values.iter().map(|v| DMatrix::from_row_slice(dim, dim, v)).collect())
        }
    }
}

pub fn build_operator(spec: &OperatorSpec, sys: &DyadicSystem, space: &FiniteSpace, seed: u64) -> Result<KernelOperator> {
    let n = space.len();
    match spec {
        OperatorSpec::Petermichl => {
            let haar = build_haar_system(sys, space)?;
            let eta = EtaSymbol::petermichl(&haar, sys)?;
            Ok(kernel_from_haar(&haar, &eta, sys, space, None)?.operator)
        }
        OperatorSpec::Haar { amplitude } => {
            let haar = build_haar_system(sys, space)?;
            let eta = EtaSymbol::random(&haar, sys, *amplitude, seed ^ 0x5eed_0002);
            Ok(kernel_from_haar(&haar, &eta, sys, space, None)?.operator)
        }
        OperatorSpec::Identity => {
            let mut k = vec![0.0; n * n];
            for x in 0..n {
                k[x * n + x] = 1.0 / space.mass(x);
            }
            KernelOperator::new(k, space)
        }
        OperatorSpec::Zero => Ok(KernelOperator::zero(space)),
        OperatorSpec::Kernel { values } => {
            if values.len() != n * n {
                return Err(Error::Parse(format!("kernel needs {} entries", n * n)));
            }
            KernelOperator::new(values.clone(), space)
        }
    }
}

/// Builds every object of a single-instance scenario.
pub fn build(s: &Scenario) -> Result<Built> {
    let space = build_space(&s.space, s.seed)?;
    let sys = build_dyadic_system(&space, s.delta, 0)?;
    let weight = build_weight(&s.weight, s.dim, &space, s.seed)?;
    let operator = build_operator(&s.operator, &sys, &space, s.seed)?;
    let f = match &s.input {
        Some(rows) => {
            if rows.len() != space.len() {
                return Err(Error::Parse(format!("input needs {} rows", space.len())));
            }
            VectorField::from_rows(rows)?
        }
        None => VectorField::random(s.dim, space.len(), s.seed ^ 0x5eed_0003),
    };
    let cd = space.quasi_triangle_constant();
    let alpha = s.alpha.unwrap_or(3.0 * cd * cd / sys.delta);
    Ok(Built { space, sys, weight, operator, f, alpha })
}

/// FNV-1a over the bits of every number defining the instance.
pub fn fingerprint(b: &Built) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut eat = |v: f64| {
        for byte in v.to_bits().to_le_bytes() {
            h ^= byte as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    };
    let n = b.space.len();
    for x in 0..n {
        eat(b.space.mass(x));
        b.space.row(x).iter().for_each(|&d| eat(d));
        b.weight.at(x).iter().for_each(|&v| eat(v));
        b.operator.row(x).iter().for_each(|&v| eat(v));
        b.f.at(x).iter().for_each(|&v| eat(v));
    }
    eat(b.alpha);
    format!("{h:016x}")
}
