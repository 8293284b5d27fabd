//! The scenario pipeline: constants, decomposition, verifications, reports.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::harness::scenario::{build, load_scenarios, Built, Check, Route, Scenario};
use crate::harness::verify::{a2_reports, ladder_weights, verify_a2_scaling, verify_cz_bound, verify_endpoint, verify_maximal_bound, A2Scaling, BoundReport, Context};
use crate::operators::{t1_testing_condition, KernelOperator};
use crate::sparse_engine::{dominate, t1_sparse, Instance, SparseDecomposition, T1Limits};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Pipeline {
    Constants,
    Decompose,
    Verify,
}

#[derive(Debug, Clone)]
pub struct RunFlags {
    pub pipeline: Pipeline,
    /// Replaces every scenario's seed.
    pub seed: Option<u64>,
    /// Replaces every scenario's campaign size.
    pub campaign: Option<usize>,
    /// Stop at the first failed certificate.
    pub certify: bool,
    pub out: Option<PathBuf>,
    /// Worker threads; 0 uses the available parallelism.
    pub threads: usize,
}

impl Default for RunFlags {
    fn default() -> Self {
        RunFlags { pipeline: Pipeline::Verify, seed: None, campaign: None, certify: false, out: None, threads: 0 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Certificate {
    pub scenario_id: String,
    pub seed: u64,
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct InstanceConstants {
    pub scenario_id: String,
    pub seed: u64,
    pub fingerprint: String,
    pub points: usize,
    pub dim: usize,
    pub quasi_triangle: f64,
    pub doubling: f64,
    pub doubling_dimension: f64,
    pub alpha: f64,
    pub cubes: usize,
    pub weight_constants: BTreeMap<String, f64>,
    pub kernel_size: f64,
    pub testing_ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecompositionSummary {
    pub scenario_id: String,
    pub seed: u64,
    pub route: Route,
    pub cubes: usize,
    pub kappa: f64,
    pub kappa_formula: f64,
    pub sparse: bool,
    pub carleson: f64,
    pub max_packing: f64,
    pub max_mixed_norm: f64,
    pub reconstruction_error: f64,
    pub certified: bool,
}

impl DecompositionSummary {
    fn new(s: &Scenario, d: &SparseDecomposition) -> Self {
        DecompositionSummary {
            scenario_id: s.id.clone(),
            seed: s.seed,
            route: s.route,
            cubes: d.cubes.len(),
            kappa: d.kappa,
            kappa_formula: d.kappa_formula,
            sparse: d.sparse.is_sparse(),
            carleson: d.carleson,
            max_packing: d.max_packing,
            max_mixed_norm: d.max_mixed_norm,
            reconstruction_error: d.reconstruction_error,
            certified: d.certified(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingSummary {
    pub scenario_id: String,
    pub seed: u64,
    pub decades: f64,
    pub scaling: A2Scaling,
}

/// Everything one instance produced.
#[derive(Debug, Clone, Default, Serialize)]
pub struct InstanceOutcome {
    pub constants: Option<InstanceConstants>,
    pub decomposition: Option<DecompositionSummary>,
    pub scaling: Option<ScalingSummary>,
    pub reports: Vec<BoundReport>,
    pub certificates: Vec<Certificate>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub pipeline: Pipeline,
    pub scenarios: usize,
    pub instances: usize,
    pub constants: Vec<InstanceConstants>,
    pub decompositions: Vec<DecompositionSummary>,
    pub scalings: Vec<ScalingSummary>,
    pub reports: Vec<BoundReport>,
    pub certificates: Vec<Certificate>,
    /// Largest ratio per `scenario_id/inequality_id`.
    pub campaign_maxima: BTreeMap<String, f64>,
    pub first_failure: Option<String>,
}

impl RunSummary {
    pub fn passed(&self) -> bool {
        self.first_failure.is_none()
    }

    pub fn max_ratio(&self, scenario_id: &str, inequality_id: &str) -> Option<f64> {
        self.campaign_maxima.get(&format!("{scenario_id}/{inequality_id}")).copied()
    }
}

fn cert(s: &Scenario, name: &str, pass: bool, detail: String) -> Certificate {
    Certificate { scenario_id: s.id.clone(), seed: s.seed, name: name.into(), pass, detail }
}

fn constants(s: &Scenario, b: &Built, ctx: &mut Context) -> Result<InstanceConstants> {
    let (cmu, dmu) = b.space.doubling_constants();
    let mut used = BTreeMap::new();
    let (k, v) = ctx.aq(s.p)?;
    used.insert(k, v);
    let (k, v) = ctx.aq(1.0)?;
    used.insert(k, v);
    let (k, v) = ctx.sc(s.p)?;
    used.insert(k, v);
    let (k, v) = ctx.sc_dual(s.p)?;
    used.insert(k, v);
    Ok(InstanceConstants {
        scenario_id: s.id.clone(),
        seed: s.seed,
        fingerprint: ctx.fingerprint.clone(),
        points: b.space.len(),
        dim: b.f.dim,
        quasi_triangle: b.space.quasi_triangle_constant(),
        doubling: cmu,
        doubling_dimension: dmu,
        alpha: b.alpha,
        cubes: b.sys.len(),
        weight_constants: used,
        kernel_size: b.operator.size_constant(&b.space).0,
        testing_ratio: testing_ratio(&b.operator, b),
    })
}

fn testing_ratio(t: &KernelOperator, b: &Built) -> f64 {
    t1_testing_condition(t, &b.space, 2, 0).ratio
}

fn decompose(s: &Scenario, b: &Built) -> Result<SparseDecomposition> {
    match s.route {
        Route::Measured => {
            let inst = Instance::new(&b.operator, &b.sys, &b.space, &b.f, s.s_exponent(), b.alpha)?;
            dominate(&inst, s.q, s.r)
        }
        Route::T1 => Ok(t1_sparse(&b.f, &b.operator, &b.sys, &b.space, b.alpha, s.r, &T1Limits { seed: s.seed, ..T1Limits::default() })?.decomposition),
    }
}

/// Runs the pipeline on one single-instance scenario. Errors of a stage
/// become failed certificates; later stages still run unless `certify`.
pub fn run_instance(s: &Scenario, pipeline: Pipeline, certify: bool) -> InstanceOutcome {
    let mut out = InstanceOutcome::default();
    let b = match build(s) {
        Ok(b) => b,
        Err(e) => {
            out.certificates.push(cert(s, "build", false, e.to_string()));
            return out;
        }
    };
    let stop = |out: &InstanceOutcome| certify && out.certificates.iter().any(|c| !c.pass);
    let mut ctx = Context::new(s, &b);
    if let Err(e) = b.sys.validate(&b.space) {
        out.certificates.push(cert(s, "dyadic-system", false, e.to_string()));
    } else {
        out.certificates.push(cert(s, "dyadic-system", true, format!("{} cubes", b.sys.len())));
    }
    match constants(s, &b, &mut ctx) {
        Ok(c) => {
            out.certificates.push(cert(s, "constants", true, String::new()));
            out.constants = Some(c);
        }
        Err(e) => out.certificates.push(cert(s, "constants", false, e.to_string())),
    }
    if stop(&out) || pipeline == Pipeline::Constants {
        return out;
    }
    if s.decompose {
        match decompose(s, &b) {
            Ok(d) => {
                let sum = DecompositionSummary::new(s, &d);
                out.certificates.push(cert(
                    s,
                    "decomposition",
                    sum.certified,
                    format!("cubes {} packing {} mixed {} reconstruction {:e}", sum.cubes, sum.max_packing, sum.max_mixed_norm, sum.reconstruction_error),
                ));
                out.decomposition = Some(sum);
            }
            Err(e) => out.certificates.push(cert(s, "decomposition", false, e.to_string())),
        }
    }
    if stop(&out) || pipeline == Pipeline::Decompose {
        return out;
    }
    for check in &s.checks {
        let res = match check {
            Check::Maximal => verify_maximal_bound(&mut ctx),
            Check::Cz => verify_cz_bound(&mut ctx),
            Check::Endpoint => verify_endpoint(&mut ctx),
            Check::A2 => ladder_weights(s, &b.space).and_then(|l| verify_a2_scaling(&b.operator, &l, &b.space)).map(|sc| {
                out.certificates.push(cert(s, "a2-slope", sc.passes(), format!("slope {} over {:.3} decades", sc.slope, sc.decades())));
                let reps = a2_reports(&ctx, &sc);
                out.scaling = Some(ScalingSummary { scenario_id: s.id.clone(), seed: s.seed, decades: sc.decades(), scaling: sc });
                reps
            }),
        };
        match res {
            Ok(reps) => {
                for r in reps {
                    out.certificates.push(cert(s, &format!("bound:{}", r.inequality_id), r.passes(), format!("ratio {}", r.ratio)));
                    out.reports.push(r);
                }
            }
            Err(e) => out.certificates.push(cert(s, &format!("bound:{check:?}").to_lowercase(), false, e.to_string())),
        }
        if stop(&out) {
            break;
        }
    }
    out
}

/// Expands campaigns, runs every instance in parallel and assembles the
/// outcomes ordered by scenario id, then seed.
pub fn run_scenarios(scenarios: &[Scenario], flags: &RunFlags) -> RunSummary {
    let mut jobs: Vec<Scenario> = Vec::new();
    for s in scenarios {
        let mut s = s.clone();
        if let Some(seed) = flags.seed {
            s.seed = seed;
        }
        let k = flags.campaign.unwrap_or(s.campaign);
        jobs.extend((0..k).map(|i| s.instance(i)));
    }
    let mut order: Vec<usize> = (0..jobs.len()).collect();
    order.sort_by(|&a, &b| jobs[a].id.cmp(&jobs[b].id).then(a.cmp(&b)));
    let outcomes = parallel_map(&jobs, flags.threads, |s| run_instance(s, flags.pipeline, flags.certify));
    let mut summary = RunSummary {
        pipeline: flags.pipeline,
        scenarios: scenarios.len(),
        instances: 0,
        constants: Vec::new(),
        decompositions: Vec::new(),
        scalings: Vec::new(),
        reports: Vec::new(),
        certificates: Vec::new(),
        campaign_maxima: BTreeMap::new(),
        first_failure: None,
    };
    let mut outcomes: Vec<Option<InstanceOutcome>> = outcomes.into_iter().map(Some).collect();
    for i in order {
        let o = outcomes[i].take().expect("each outcome is used once");
        summary.instances += 1;
        summary.constants.extend(o.constants);
        summary.decompositions.extend(o.decomposition);
        summary.scalings.extend(o.scaling);
        for r in &o.reports {
            let key = format!("{}/{}", r.scenario_id, r.inequality_id);
            let m = summary.campaign_maxima.entry(key).or_insert(0.0);
            *m = m.max(r.ratio);
        }
        summary.reports.extend(o.reports);
        let failed = o.certificates.iter().find(|c| !c.pass).map(|c| format!("{} (scenario {}, seed {}): {}", c.name, c.scenario_id, c.seed, c.detail));
        summary.certificates.extend(o.certificates);
        if summary.first_failure.is_none() {
            summary.first_failure = failed;
            if flags.certify && summary.first_failure.is_some() {
                break;
            }
        }
    }
    summary
}

/// Maps `f` over `items` on scoped worker threads, keeping the order.
pub fn parallel_map<T: Sync, U: Send>(items: &[T], threads: usize, f: impl Fn(&T) -> U + Sync) -> Vec<U> {
    let threads = if threads == 0 { std::thread::available_parallelism().map_or(1, |n| n.get()) } else { threads };
    let threads = threads.min(items.len()).max(1);
    let next = std::sync::atomic::AtomicUsize::new(0);
    let mut slots: Vec<Option<U>> = (0..items.len()).map(|_| None).collect();
    let results = std::sync::Mutex::new(&mut slots);
    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let u = f(&items[i]);
                results.lock().expect("no worker panicked")[i] = Some(u);
            });
        }
    });
    slots.into_iter().map(|u| u.expect("every item was processed")).collect()
}

pub const CSV_COLUMNS: [&str; 12] = ["scenario_id", "inequality_id", "n", "N", "p", "q", "r", "lhs", "rhs", "ratio", "weight_constants", "seed"];

pub fn write_csv(reports: &[BoundReport], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Io(e.into()))?;
    let io = |e: csv::Error| Error::Io(e.into());
    w.write_record(CSV_COLUMNS).map_err(io)?;
    for r in reports {
        w.write_record([
            r.scenario_id.clone(),
            r.inequality_id.clone(),
            r.n.to_string(),
            r.points.to_string(),
            r.p.to_string(),
            r.q.to_string(),
            r.r.to_string(),
            r.lhs.to_string(),
            r.rhs.to_string(),
            r.ratio.to_string(),
            r.flat_constants(),
            r.seed.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `report.csv` and `summary.json` into `dir`.
pub fn write_outputs(summary: &RunSummary, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_csv(&summary.reports, &dir.join("report.csv"))?;
    let json = serde_json::to_string_pretty(summary).map_err(|e| Error::NumericalFailure(e.to_string()))?;
    std::fs::write(dir.join("summary.json"), json + "\n")?;
    Ok(())
}

/// Loads a scenario file, runs it and writes the reports when `flags.out`
/// is set.
pub fn run_scenario(path: &Path, flags: &RunFlags) -> Result<RunSummary> {
    let scenarios = load_scenarios(path)?;
    let summary = run_scenarios(&scenarios, flags);
    if let Some(dir) = &flags.out {
        write_outputs(&summary, dir)?;
    }
    Ok(summary)
}
