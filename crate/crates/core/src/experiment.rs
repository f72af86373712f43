//! Experiment runner: configuration schema, seed splitting, and the fit,
//! eval, compare, sweep and gen-points pipelines behind the CLI.
//!
//! Every pipeline writes plain CSV/JSON into an output directory. Each JSON
//! output embeds the fully resolved configuration, so re-running from the
//! echoed config reproduces the same files.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::basis::{total_degree_indices_with_limit, Limits, MultiIndexSet};
use crate::error::{Error, Result};
use crate::functions::{
    chebyshev_nodes, equidistant, tensor_grid, uniform_random, FunctionKind, Generator, SampleSet, TestFunction,
};
use crate::io::{fmt_f64, write_atomic};
use crate::metrics::{first_below, l2_error_estimate, negative_fraction, EvaluationReport};
use crate::problem::{
    assemble_dual, bound_constraints, lower_bound_constraints, max_violation, ApproximationProblem, ConstraintMode,
    ConstraintSet, DualModel, PolynomialModel, PolynomialModelFile, DEFAULT_ALPHA, DEFAULT_EPSILON,
};
use crate::solvers::{solve, solve_observed, Method, SolverConfig, SolverResult, Status};

/// Iterations of the r-FISTA run that defines the reference minimizer in comparisons.
pub const REFERENCE_ITERATIONS: usize = 5000;

/// Default test-point counts: equispaced in 1-D, uniform random otherwise.
pub const DEFAULT_TEST_POINTS_1D: usize = 10_000;
pub const DEFAULT_TEST_POINTS_ND: usize = 5_000;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;
pub const EXIT_CAPACITY: i32 = 3;

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Converged => EXIT_OK,
            Status::MaxIter | Status::Stalled => EXIT_NOT_CONVERGED,
        }
    }
}

impl Error {
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Capacity { .. } => EXIT_CAPACITY,
            Error::Divergence { .. } => EXIT_NOT_CONVERGED,
            _ => EXIT_ERROR,
        }
    }
}

// ---------------------------------------------------------------------------
// seeds

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

fn fnv1a64(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Per-component seed: `splitmix64(global ^ fnv1a64(component))`.
///
/// Components are named by their config path (`fit_samples`,
/// `constraints.points`, `evaluation`), so adding a sampler never shifts the
/// streams of the others.
pub fn derive_seed(global: u64, component: &str) -> u64 {
    splitmix64(global ^ fnv1a64(component))
}

// ---------------------------------------------------------------------------
// configuration

/// A per-dimension parameter given either as one value for every coordinate or
/// as an explicit list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamSpec {
    Scalar(f64),
    Vector(Vec<f64>),
}

impl ParamSpec {
    fn expand(&self, d: usize) -> Result<Vec<f64>> {
        match self {
            ParamSpec::Scalar(v) => Ok(vec![*v; d]),
            ParamSpec::Vector(v) if v.len() == d => Ok(v.clone()),
            ParamSpec::Vector(v) => Err(Error::Config(format!(
                "parameter list has {} entries for dimension {d}",
                v.len()
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionSpec {
    pub kind: FunctionKind,
    #[serde(default = "one")]
    pub dim: usize,
    #[serde(default)]
    pub sigma: Option<ParamSpec>,
    #[serde(default)]
    pub omega: Option<ParamSpec>,
}

fn one() -> usize {
    1
}

impl FunctionSpec {
    pub fn build(&self) -> Result<TestFunction> {
        let d = self.dim;
        if d == 0 {
            return Err(Error::Config("function.dim must be positive".into()));
        }
        if self.kind.is_univariate() {
            if d != 1 {
                return Err(Error::Config(format!("{:?} is univariate; function.dim must be 1", self.kind)));
            }
            return TestFunction::new(self.kind, None, None);
        }
        let (sigma, omega) = match TestFunction::with_defaults(self.kind, d)? {
            TestFunction::GaussianPeak { sigma, omega } | TestFunction::ContinuousPeak { sigma, omega } => {
                (sigma, Some(omega))
            }
            TestFunction::CornerPeak { sigma } => (sigma, None),
            _ => unreachable!("peak kinds only"),
        };
        let sigma = match &self.sigma {
            Some(p) => p.expand(d)?,
            None => sigma,
        };
        let omega = match (&self.omega, omega) {
            (Some(_), None) => return Err(Error::Config("corner_peak takes no omega".into())),
            (Some(p), Some(_)) => Some(p.expand(d)?),
            (None, o) => o,
        };
        TestFunction::new(self.kind, Some(sigma), omega)
    }

    /// Same spec with the parameters the function was built with written out.
    fn materialized(&self, tf: &TestFunction) -> FunctionSpec {
        let (sigma, omega) = match tf {
            TestFunction::GaussianPeak { sigma, omega } | TestFunction::ContinuousPeak { sigma, omega } => {
                (Some(sigma.clone()), Some(omega.clone()))
            }
            TestFunction::CornerPeak { sigma } => (Some(sigma.clone()), None),
            _ => (None, None),
        };
        FunctionSpec {
            kind: self.kind,
            dim: self.dim,
            sigma: sigma.map(ParamSpec::Vector),
            omega: omega.map(ParamSpec::Vector),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisSpec {
    pub degree: usize,
}

/// How to draw a point set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerSpec {
    pub kind: Generator,
    #[serde(default)]
    pub count: Option<usize>,
    #[serde(default)]
    pub per_dim: Option<usize>,
    /// Explicit seed; derived from the global seed when absent.
    #[serde(default)]
    pub seed: Option<u64>,
    /// CSV file for `kind = "external"`.
    #[serde(default)]
    pub path: Option<PathBuf>,
}

impl SamplerSpec {
    pub fn new(kind: Generator, count: usize) -> Self {
        SamplerSpec {
            kind,
            count: Some(count),
            per_dim: None,
            seed: None,
            path: None,
        }
    }

    pub fn with_explicit_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    fn count(&self, what: &str) -> Result<usize> {
        self.count
            .ok_or_else(|| Error::Config(format!("{what}: sampler '{}' needs count", self.kind)))
    }

    /// Draw the point set; `seed` must already be resolved for random kinds.
    pub fn build(&self, dim: usize, limits: &Limits, what: &str) -> Result<SampleSet> {
        let univariate = |name: &str| -> Result<()> {
            if dim != 1 {
                return Err(Error::Config(format!("{what}: sampler '{name}' is one-dimensional, dimension is {dim}")));
            }
            Ok(())
        };
        let set = match self.kind {
            Generator::Chebyshev => {
                univariate("chebyshev")?;
                chebyshev_nodes(self.count(what)?)?
            }
            Generator::Equidistant => {
                univariate("equidistant")?;
                equidistant(self.count(what)?)?
            }
            Generator::UniformRandom => {
                let count = self.count(what)?;
                limits.check_entries("random sample coordinates", count, dim)?;
                let seed = self
                    .seed
                    .ok_or_else(|| Error::Config(format!("{what}: unresolved seed")))?;
                uniform_random(count, dim, seed)?
            }
            Generator::TensorGrid => {
                let per_dim = self
                    .per_dim
                    .ok_or_else(|| Error::Config(format!("{what}: tensor_grid needs per_dim")))?;
                tensor_grid(per_dim, dim, limits.max_matrix_entries)?
            }
            Generator::External => {
                let path = self
                    .path
                    .as_ref()
                    .ok_or_else(|| Error::Config(format!("{what}: external sampler needs path")))?;
                let set = SampleSet::from_csv(&fs::read_to_string(path)?)?;
                if set.dim() != dim {
                    return Err(Error::dim("external points", dim, set.dim()));
                }
                set
            }
        };
        Ok(set)
    }

    fn with_seed(&self, global: u64, component: &str) -> SamplerSpec {
        let mut out = self.clone();
        if out.kind == Generator::UniformRandom && out.seed.is_none() {
            out.seed = Some(derive_seed(global, component));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintSpec {
    #[serde(default = "nonneg")]
    pub mode: ConstraintMode,
    pub points: SamplerSpec,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// Lower bound; `b = lower + epsilon`.
    #[serde(default)]
    pub lower: f64,
    /// Upper bound, bounded mode only.
    #[serde(default)]
    pub upper: Option<f64>,
}

fn nonneg() -> ConstraintMode {
    ConstraintMode::Nonneg
}

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}

fn default_alpha() -> f64 {
    DEFAULT_ALPHA
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Weight on the least-squares term.
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// Relative singular-value cutoff for the pseudo-inverse.
    #[serde(default)]
    pub rcond: Option<f64>,
    pub function: FunctionSpec,
    pub basis: BasisSpec,
    pub fit_samples: SamplerSpec,
    pub constraints: ConstraintSpec,
    #[serde(default)]
    pub solver: SolverConfig,
    /// Test points for the error report; equispaced (1-D) or uniform random.
    #[serde(default)]
    pub evaluation: Option<SamplerSpec>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Load a `.json` file as JSON and anything else as TOML.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
            Self::from_json(&text)
        } else {
            Self::from_toml(&text)
        }
    }

    /// Materialize defaults and sub-seeds. Solver defaults that depend on the
    /// assembled model are filled in after assembly.
    pub fn resolved(&self) -> ExperimentConfig {
        let mut out = self.clone();
        out.fit_samples = self.fit_samples.with_seed(self.seed, "fit_samples");
        out.constraints.points = self.constraints.points.with_seed(self.seed, "constraints.points");
        let eval = self.evaluation.clone().unwrap_or_else(|| {
            if self.function.dim == 1 {
                SamplerSpec::new(Generator::Equidistant, DEFAULT_TEST_POINTS_1D)
            } else {
                SamplerSpec::new(Generator::UniformRandom, DEFAULT_TEST_POINTS_ND)
            }
        });
        out.evaluation = Some(eval.with_seed(self.seed, "evaluation"));
        out
    }
}

/// Flags that modify a run without being part of the experiment itself.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Lift the capacity ceiling.
    pub force: bool,
}

impl RunOptions {
    pub fn limits(&self) -> Limits {
        if self.force {
            Limits::unlimited()
        } else {
            Limits::default()
        }
    }
}

// ---------------------------------------------------------------------------
// assembly

/// Everything a solve needs, built from one resolved config.
pub struct Prepared {
    pub config: ExperimentConfig,
    pub function: TestFunction,
    pub index_set: MultiIndexSet,
    pub problem: ApproximationProblem,
    pub constraints: ConstraintSet,
    pub model: DualModel,
    pub test_points: SampleSet,
}

pub fn prepare(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Prepared> {
    let limits = opts.limits();
    let mut config = cfg.resolved();
    let function = cfg.function.build()?;
    config.function = cfg.function.materialized(&function);
    let d = cfg.function.dim;
    let index_set = total_degree_indices_with_limit(d, cfg.basis.degree, limits.max_basis_size)?;
    let n = index_set.len();

    let fit = config.fit_samples.build(d, &limits, "fit_samples")?;
    limits.check_entries("approximation matrix", fit.len(), n)?;
    let problem = ApproximationProblem::from_function(&index_set, &function, &fit, cfg.alpha, &limits)?;

    let cs = &config.constraints;
    let points = cs.points.build(d, &limits, "constraints.points")?;
    let rows = match cs.mode {
        ConstraintMode::Nonneg => points.len(),
        ConstraintMode::Bounded => 2 * points.len(),
    };
    limits.check_entries("constraint matrix", rows, n)?;
    let constraints = match cs.mode {
        ConstraintMode::Nonneg => {
            if cs.upper.is_some() {
                return Err(Error::Config("constraints.upper is only valid with mode = \"bounded\"".into()));
            }
            if cs.epsilon < 0.0 {
                return Err(Error::Config(format!("constraints.epsilon must be >= 0, got {}", cs.epsilon)));
            }
            lower_bound_constraints(&index_set, &points, cs.lower, cs.epsilon, &limits)?
        }
        ConstraintMode::Bounded => {
            let upper = cs
                .upper
                .ok_or_else(|| Error::Config("bounded constraints need constraints.upper".into()))?;
            bound_constraints(&index_set, &points, cs.lower, upper, cs.epsilon, &limits)?
        }
    };
    let model = assemble_dual(&problem, &constraints, cfg.rcond)?;

    let eval_spec = config.evaluation.as_ref().expect("resolved");
    let test_points = eval_spec.build(d, &limits, "evaluation")?;

    Ok(Prepared {
        config,
        function,
        index_set,
        problem,
        constraints,
        model,
        test_points,
    })
}

impl Prepared {
    pub fn evaluate(&self, c: &DVector<f64>) -> Result<EvaluationReport> {
        let poly = PolynomialModel::new(self.index_set.clone(), c.clone())?;
        let eval_seed = self.config.evaluation.as_ref().and_then(|e| e.seed);
        Ok(EvaluationReport {
            l2_error: l2_error_estimate(&self.function, &poly, &self.test_points)?,
            negative_fraction: negative_fraction(&poly, &self.test_points)?,
            max_violation: max_violation(&self.constraints, c)?,
            n_test_points: self.test_points.len(),
            seed: eval_seed,
        })
    }

    fn summary(&self) -> ProblemSummary {
        ProblemSummary {
            num_samples: self.problem.num_samples(),
            num_basis: self.problem.num_basis(),
            num_constraints: self.model.num_constraints(),
            rank: self.model.rank(),
            lambda_max: self.model.lambda_max(),
            lambda_min: self.model.lambda_min(),
        }
    }

    fn provenance(&self, result: &SolverResult) -> serde_json::Value {
        serde_json::json!({
            "function": self.config.function,
            "fit_samples": self.config.fit_samples,
            "constraints": self.constraints.provenance(),
            "method": result.config.method.name(),
            "status": result.status.to_string(),
            "iterations": result.iterations,
        })
    }
}

// ---------------------------------------------------------------------------
// fit

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSummary {
    pub num_samples: usize,
    pub num_basis: usize,
    pub num_constraints: usize,
    pub rank: usize,
    pub lambda_max: f64,
    pub lambda_min: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitReport {
    pub config: ExperimentConfig,
    pub status: String,
    pub iterations: usize,
    pub evaluation: EvaluationReport,
    /// The same metrics for the plain least-squares fit.
    pub unconstrained: EvaluationReport,
    pub problem: ProblemSummary,
    pub warnings: Vec<String>,
    pub files: Vec<String>,
}

pub struct FitOutcome {
    pub status: Status,
    pub report: FitReport,
    pub result: SolverResult,
    pub model: PolynomialModel,
}

impl FitOutcome {
    pub fn exit_code(&self) -> i32 {
        self.status.exit_code()
    }
}

pub const MODEL_FILE: &str = "model.json";
pub const TRACE_FILE: &str = "trace.csv";
pub const REPORT_FILE: &str = "report.json";

fn to_json<T: Serialize>(v: &T) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(v)?;
    out.push(b'\n');
    Ok(out)
}

/// Assemble, solve, evaluate, and write `model.json`, `trace.csv` and `report.json`.
pub fn run_fit(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<FitOutcome> {
    let prep = prepare(cfg, opts)?;
    let result = solve(&prep.model, &cfg.solver)?;
    let mut config = prep.config.clone();
    config.solver = result.config.clone();

    let evaluation = prep.evaluate(&result.c_star)?;
    let unconstrained = prep.evaluate(&prep.model.unconstrained_solution())?;
    let mut warnings = prep.problem.warnings().to_vec();
    warnings.extend(result.warnings.iter().cloned());

    let model = PolynomialModel::new(prep.index_set.clone(), result.c_star.clone())?;
    let file = model.to_file(Some(cfg.alpha), prep.provenance(&result));

    let report = FitReport {
        config,
        status: result.status.to_string(),
        iterations: result.iterations,
        evaluation,
        unconstrained,
        problem: prep.summary(),
        warnings,
        files: vec![MODEL_FILE.into(), TRACE_FILE.into()],
    };

    let dir = &cfg.output_dir;
    write_atomic(&dir.join(MODEL_FILE), &to_json(&file)?)?;
    write_atomic(&dir.join(TRACE_FILE), result.trace.to_csv().as_bytes())?;
    write_atomic(&dir.join(REPORT_FILE), &to_json(&report)?)?;

    Ok(FitOutcome {
        status: result.status,
        report,
        result,
        model,
    })
}

// ---------------------------------------------------------------------------
// eval

pub fn load_model(path: &Path) -> Result<PolynomialModel> {
    let text = fs::read_to_string(path)?;
    let file: PolynomialModelFile = serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
    PolynomialModel::from_file(&file)
}

/// Evaluate a saved model at every row of a points CSV; writes one `value` column.
pub fn run_eval(model_path: &Path, points_path: &Path, out_path: &Path) -> Result<Vec<f64>> {
    let model = load_model(model_path)?;
    let points = SampleSet::from_csv(&fs::read_to_string(points_path)?)?;
    let values = model.eval_samples(&points)?;
    let mut out = String::from("value\n");
    for v in &values {
        out.push_str(&fmt_f64(*v));
        out.push('\n');
    }
    write_atomic(out_path, out.as_bytes())?;
    Ok(values)
}

// ---------------------------------------------------------------------------
// compare

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: String,
    pub status: String,
    pub iterations: Option<usize>,
    pub final_distance: Option<f64>,
    /// First iteration with `||c_k - c*|| <= 1e-10`.
    pub first_below_1e_10: Option<usize>,
    pub trace_file: Option<String>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompareSummary {
    pub config: ExperimentConfig,
    pub reference_iterations: usize,
    pub reference_max_violation: f64,
    pub methods: Vec<MethodSummary>,
}

pub struct CompareOutcome {
    pub summary: CompareSummary,
    pub reference: DVector<f64>,
    /// Distance curve per requested method; `None` where the method failed.
    pub distances: Vec<Option<Vec<f64>>>,
}

impl CompareOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.summary.methods.iter().any(|m| m.error.is_none()) {
            EXIT_OK
        } else {
            EXIT_ERROR
        }
    }
}

pub const DISTANCE_THRESHOLD: f64 = 1e-10;

/// Reference run (r-FISTA, fixed length), then each method with the shared
/// solver settings; writes `trace_<method>.csv`, `distances.csv` and `summary.json`.
pub fn run_compare(cfg: &ExperimentConfig, methods: &[Method], opts: &RunOptions) -> Result<CompareOutcome> {
    if methods.len() < 2 {
        return Err(Error::Config("compare needs at least two methods".into()));
    }
    let prep = prepare(cfg, opts)?;
    let reference_cfg = SolverConfig {
        method: Method::Rfista,
        max_iter: REFERENCE_ITERATIONS,
        fixed_iterations: true,
        ..cfg.solver.clone()
    };
    let reference = solve(&prep.model, &reference_cfg)?;
    let c_ref = reference.c_star.clone();
    let every = cfg.solver.trace_every.max(1);

    let dir = &cfg.output_dir;
    let mut summaries = Vec::new();
    let mut curves = Vec::new();
    let mut distances_csv = String::from("method,k,distance\n");
    for (i, &method) in methods.iter().enumerate() {
        // repeated methods get a numeric suffix so their files do not collide
        let earlier = methods[..i].iter().filter(|&&m| m == method).count();
        let name = match earlier {
            0 => method.name().to_string(),
            e => format!("{}_{}", method.name(), e + 1),
        };

        let mut dist = Vec::new();
        let mut observer = |_k: usize, c: &DVector<f64>| dist.push((c - &c_ref).norm());
        let run_cfg = SolverConfig {
            method,
            ..cfg.solver.clone()
        };
        match solve_observed(&prep.model, &run_cfg, Some(&mut observer)) {
            Ok(res) => {
                let trace_file = format!("trace_{name}.csv");
                write_atomic(&dir.join(&trace_file), res.trace.to_csv().as_bytes())?;
                for (i, d) in dist.iter().enumerate() {
                    let k = i + 1;
                    if k % every == 0 || k == dist.len() {
                        distances_csv.push_str(&format!("{name},{k},{}\n", fmt_f64(*d)));
                    }
                }
                summaries.push(MethodSummary {
                    method: name,
                    status: res.status.to_string(),
                    iterations: Some(res.iterations),
                    final_distance: dist.last().copied(),
                    first_below_1e_10: first_below(&dist, DISTANCE_THRESHOLD).map(|i| i + 1),
                    trace_file: Some(trace_file),
                    error: None,
                });
                curves.push(Some(dist));
            }
            Err(e) => {
                summaries.push(MethodSummary {
                    method: name,
                    status: "error".into(),
                    iterations: None,
                    final_distance: None,
                    first_below_1e_10: None,
                    trace_file: None,
                    error: Some(e.to_string()),
                });
                curves.push(None);
            }
        }
    }

    let mut config = prep.config.clone();
    config.solver = cfg.solver.clone();
    let summary = CompareSummary {
        config,
        reference_iterations: reference.iterations,
        reference_max_violation: prep.model.max_violation(&c_ref),
        methods: summaries,
    };
    write_atomic(&dir.join("distances.csv"), distances_csv.as_bytes())?;
    write_atomic(&dir.join("summary.json"), &to_json(&summary)?)?;
    Ok(CompareOutcome {
        summary,
        reference: c_ref,
        distances: curves,
    })
}

// ---------------------------------------------------------------------------
// sweep

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepParam {
    /// Number of constraint points.
    C,
    /// Number of fit samples.
    K,
    /// Polynomial degree.
    #[serde(rename = "n")]
    N,
    /// Dimension.
    #[serde(rename = "d")]
    D,
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepParam::C => "C",
            SweepParam::K => "K",
            SweepParam::N => "n",
            SweepParam::D => "d",
        })
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "C" => Ok(SweepParam::C),
            "K" => Ok(SweepParam::K),
            "n" => Ok(SweepParam::N),
            "d" => Ok(SweepParam::D),
            other => Err(Error::Config(format!("unknown sweep parameter '{other}' (expected C, K, n or d)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: usize,
    pub l2_error: f64,
    pub negative_fraction: f64,
    pub iterations: usize,
    pub status: String,
    pub error: Option<String>,
}

pub const SWEEP_HEADER: &str = "param,value,l2_error,negative_fraction,iterations,status";

fn set_count(spec: &mut SamplerSpec, value: usize) {
    match spec.kind {
        Generator::TensorGrid => spec.per_dim = Some(value),
        _ => spec.count = Some(value),
    }
}

fn sweep_point(base: &ExperimentConfig, param: SweepParam, value: usize) -> Result<ExperimentConfig> {
    let mut cfg = base.clone();
    match param {
        SweepParam::C => set_count(&mut cfg.constraints.points, value),
        SweepParam::K => set_count(&mut cfg.fit_samples, value),
        SweepParam::N => cfg.basis.degree = value,
        SweepParam::D => {
            if cfg.function.kind.is_univariate() {
                return Err(Error::Config(format!("{:?} cannot be swept over d", cfg.function.kind)));
            }
            cfg.function.dim = value;
        }
    }
    // fresh sub-seeds per row, independent of the row's position in the list
    cfg.seed = derive_seed(base.seed, &format!("sweep.{param}={value}"));
    Ok(cfg)
}

/// One fit per value, everything else fixed; failures become rows with status `error`.
pub fn run_sweep(
    cfg: &ExperimentConfig,
    param: SweepParam,
    values: &[usize],
    opts: &RunOptions,
) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(Error::Config("sweep needs at least one value".into()));
    }
    if values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config("sweep values must be strictly ascending".into()));
    }
    let mut rows = Vec::new();
    let mut csv = format!("{SWEEP_HEADER}\n");
    for &value in values {
        let row = match sweep_point(cfg, param, value).and_then(|c| {
            let prep = prepare(&c, opts)?;
            let res = solve(&prep.model, &c.solver)?;
            let ev = prep.evaluate(&res.c_star)?;
            Ok((res, ev))
        }) {
            Ok((res, ev)) => SweepRow {
                value,
                l2_error: ev.l2_error,
                negative_fraction: ev.negative_fraction,
                iterations: res.iterations,
                status: res.status.to_string(),
                error: None,
            },
            Err(e) => SweepRow {
                value,
                l2_error: f64::NAN,
                negative_fraction: f64::NAN,
                iterations: 0,
                status: "error".into(),
                error: Some(e.to_string()),
            },
        };
        csv.push_str(&format!(
            "{param},{},{},{},{},{}\n",
            row.value,
            fmt_f64(row.l2_error),
            fmt_f64(row.negative_fraction),
            row.iterations,
            row.status
        ));
        rows.push(row);
    }
    write_atomic(&cfg.output_dir.join("sweep.csv"), csv.as_bytes())?;
    Ok(rows)
}

/// Exit status of a sweep: 0 only if every row converged.
pub fn sweep_exit_code(rows: &[SweepRow]) -> i32 {
    if rows.iter().all(|r| r.status == "converged") {
        EXIT_OK
    } else {
        EXIT_NOT_CONVERGED
    }
}

// ---------------------------------------------------------------------------
// gen-points

/// Write a point set as CSV plus a `.json` metadata sidecar next to it.
pub fn run_gen_points(spec: &SamplerSpec, dim: usize, out: &Path, opts: &RunOptions) -> Result<SampleSet> {
    if spec.kind == Generator::UniformRandom && spec.seed.is_none() {
        return Err(Error::Config("uniform_random needs a seed".into()));
    }
    let set = spec.build(dim, &opts.limits(), "gen-points")?;
    write_atomic(out, set.to_csv().as_bytes())?;
    write_atomic(&out.with_extension("json"), &to_json(&set.meta())?)?;
    Ok(set)
}
