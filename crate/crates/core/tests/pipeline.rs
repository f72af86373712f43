//! End-to-end runs of the experiment pipelines on small configurations.

mod common;

use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use posapprox::experiment::{
    run_compare, run_eval, run_fit, run_gen_points, run_sweep, sweep_exit_code, ExperimentConfig, RunOptions,
    SamplerSpec, SweepParam, SWEEP_HEADER,
};
use posapprox::prelude::*;

use common::legendre_explicit;

const RUNGE: &str = r#"
[function]
kind = "runge"
[basis]
degree = 20
[fit_samples]
kind = "chebyshev"
count = 50
[constraints]
points = { kind = "equidistant", count = 201 }
epsilon = 1e-5
"#;

fn config(text: &str, dir: &Path) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::from_toml(text).unwrap();
    cfg.output_dir = dir.to_path_buf();
    cfg
}

fn runge(x: f64) -> f64 {
    1.01 * (1.0 / (1.0 + 100.0 * x * x) - 1.0 / 101.0)
}

fn write_model(path: &Path, ms: MultiIndexSet, coeffs: Vec<f64>) {
    let model = PolynomialModel::new(ms, DVector::from_vec(coeffs)).unwrap();
    let file = model.to_file(None, serde_json::Value::Null);
    fs::write(path, serde_json::to_string(&file).unwrap()).unwrap();
}

fn values(path: &Path) -> Vec<f64> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("value"));
    lines.map(|l| l.parse().unwrap()).collect()
}

#[test]
fn inactive_bounds_reproduce_least_squares() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = config(RUNGE, tmp.path());
    cfg.constraints.lower = -1e6;
    let out = run_fit(&cfg, &RunOptions::default()).unwrap();
    assert_eq!(out.status, Status::Converged);

    // least squares by QR on a Vandermonde matrix built from the explicit sum
    let nodes = chebyshev_nodes(50).unwrap();
    let xs = nodes.as_flat();
    let psi = DMatrix::from_fn(50, 21, |i, k| ((2 * k + 1) as f64).sqrt() * legendre_explicit(k, xs[i]));
    let f = DVector::from_iterator(50, xs.iter().map(|&x| runge(x)));
    let qr = psi.qr();
    let c_ls = qr.r().solve_upper_triangular(&(qr.q().transpose() * f)).unwrap();
    let d = (out.model.coefficients() - &c_ls).amax();
    assert!(d <= 1e-10, "|c - c_ls|_inf = {d:e}");
    assert!(out.result.u_star.iter().all(|&u| u == 0.0));
}

#[test]
fn runge_fit_is_positive_at_its_constraint_points() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(RUNGE, tmp.path());
    let out = run_fit(&cfg, &RunOptions::default()).unwrap();
    assert_eq!(out.status, Status::Converged);
    assert_eq!(out.report.evaluation.max_violation, 0.0);
    assert!(out.report.unconstrained.negative_fraction > out.report.evaluation.negative_fraction);

    let pts = tmp.path().join("pts.csv");
    run_gen_points(&SamplerSpec::new(Generator::Equidistant, 201), 1, &pts, &RunOptions::default()).unwrap();
    let vals = run_eval(&tmp.path().join("model.json"), &pts, &tmp.path().join("values.csv")).unwrap();
    assert_eq!(vals, values(&tmp.path().join("values.csv")));
    assert!(vals.iter().all(|&v| v >= 1e-5 - 1e-12), "min {}", vals.iter().cloned().fold(f64::INFINITY, f64::min));
}

#[test]
fn eval_of_trivial_models() {
    let tmp = tempfile::tempdir().unwrap();
    let pts = tmp.path().join("pts.csv");
    run_gen_points(&SamplerSpec::new(Generator::UniformRandom, 40).with_explicit_seed(3), 2, &pts, &RunOptions::default())
        .unwrap();

    let ms = total_degree_indices(2, 3).unwrap();
    let zero = tmp.path().join("zero.json");
    write_model(&zero, ms.clone(), vec![0.0; ms.len()]);
    let v = run_eval(&zero, &pts, &tmp.path().join("z.csv")).unwrap();
    assert!(v.iter().all(|&x| x == 0.0));

    let mut c = vec![0.0; ms.len()];
    c[0] = 2.5;
    let constant = tmp.path().join("one.json");
    write_model(&constant, ms, c);
    let v = run_eval(&constant, &pts, &tmp.path().join("c.csv")).unwrap();
    assert_eq!(v.len(), 40);
    assert!(v.iter().all(|&x| x == 2.5));

    let wrong = tmp.path().join("wrong.json");
    let ms1 = total_degree_indices(1, 3).unwrap();
    write_model(&wrong, ms1.clone(), vec![1.0; ms1.len()]);
    assert!(matches!(
        run_eval(&wrong, &pts, &tmp.path().join("w.csv")),
        Err(Error::DimensionMismatch { .. })
    ));
}

#[test]
fn echoed_config_is_a_fixed_point() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(RUNGE, &tmp.path().join("a"));
    let first = run_fit(&cfg, &RunOptions::default()).unwrap();
    let text = serde_json::to_string(&first.report.config).unwrap();
    let mut echoed = ExperimentConfig::from_json(&text).unwrap();
    echoed.output_dir = tmp.path().join("b");
    let second = run_fit(&echoed, &RunOptions::default()).unwrap();

    let read = |d: &str, f: &str| fs::read_to_string(tmp.path().join(d).join(f)).unwrap();
    assert!(read("a", "model.json") == read("b", "model.json"));
    assert!(read("a", "trace.csv") == read("b", "trace.csv"));
    let mut again = second.report.config.clone();
    again.output_dir = first.report.config.output_dir.clone();
    assert_eq!(again, first.report.config);
}

#[test]
fn compare_truncated_sine_restarted_fista_first() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(&RUNGE.replace("runge", "truncated_sine"), tmp.path());
    let methods = [
        Method::Fista,
        Method::Rfista,
        Method::ProjectedGradient,
        Method::DouglasRachford,
        Method::Pdhg,
        Method::Vfista,
    ];
    let out = run_compare(&cfg, &methods, &RunOptions::default()).unwrap();
    assert_eq!(out.exit_code(), 0);
    let ms = &out.summary.methods;
    assert_eq!(ms.len(), 6);
    // v-FISTA is refused on a singular dual, recorded rather than fatal
    assert!(ms[5].error.is_some() && out.distances[5].is_none());
    let rfista = ms[1].first_below_1e_10.expect("r-FISTA reaches 1e-10");
    for (i, m) in ms.iter().enumerate() {
        if i != 1 {
            assert!(m.first_below_1e_10.is_none_or(|k| k > rfista), "{} at {:?}", m.method, m.first_below_1e_10);
        }
    }
    for f in ["distances.csv", "summary.json", "trace_rfista.csv", "trace_pdhg.csv"] {
        assert!(tmp.path().join(f).exists(), "{f}");
    }
    assert!(!tmp.path().join("trace_vfista.csv").exists());
}

#[test]
fn compare_duplicated_method_gives_identical_curves() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(RUNGE, tmp.path());
    let out = run_compare(&cfg, &[Method::Fista, Method::Fista], &RunOptions::default()).unwrap();
    assert_eq!(out.summary.methods[0].method, "fista");
    assert_eq!(out.summary.methods[1].method, "fista_2");
    assert_eq!(out.distances[0], out.distances[1]);
    assert!(run_compare(&cfg, &[Method::Fista], &RunOptions::default()).is_err());
}

fn sweep(text: &str, dir: &Path, param: SweepParam, values: &[usize]) -> Vec<(usize, usize, String)> {
    let cfg = config(text, dir);
    let rows = run_sweep(&cfg, param, values, &RunOptions::default()).unwrap();
    let csv = fs::read_to_string(dir.join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some(SWEEP_HEADER));
    assert_eq!(csv.lines().count(), values.len() + 1);
    rows.into_iter().map(|r| (r.value, r.iterations, r.status)).collect()
}

#[test]
fn constraint_sweep_iterations_trend_upward() {
    let tmp = tempfile::tempdir().unwrap();
    let text = RUNGE.replace("runge", "truncated_sine").replace("degree = 20", "degree = 5");
    let values = [10, 20, 50, 100, 200, 400, 700, 1000];
    let rows = sweep(&text, tmp.path(), SweepParam::C, &values);
    assert!(rows.iter().all(|r| r.2 == "converged"));
    let its: Vec<f64> = rows.iter().map(|r| r.1 as f64).collect();
    let smoothed: Vec<f64> = its.windows(3).map(|w| w.iter().sum::<f64>() / 3.0).collect();
    assert!(smoothed.windows(2).all(|w| w[0] <= w[1]), "{its:?}");
}

#[test]
fn degree_sweep_iterations_stay_flat() {
    let tmp = tempfile::tempdir().unwrap();
    let text = RUNGE.replace("runge", "truncated_sine");
    let rows = sweep(&text, tmp.path(), SweepParam::N, &[5, 10, 15, 20, 25, 30]);
    assert!(rows.iter().all(|r| r.2 == "converged"));
    let max = rows.iter().map(|r| r.1).max().unwrap() as f64;
    let min = rows.iter().map(|r| r.1).min().unwrap() as f64;
    assert!(max / min <= 5.0, "{rows:?}");
}

const PEAK_2D: &str = r#"
seed = 11
[function]
kind = "gaussian_peak"
dim = 2
[basis]
degree = 4
[fit_samples]
kind = "uniform_random"
count = 80
[constraints]
points = { kind = "uniform_random", count = 100 }
[evaluation]
kind = "uniform_random"
count = 300
"#;

#[test]
fn sweep_rows_do_not_depend_on_their_neighbours() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(PEAK_2D, tmp.path());
    let rows = run_sweep(&cfg, SweepParam::K, &[60, 90, 120], &RunOptions::default()).unwrap();
    let alone = run_sweep(&cfg, SweepParam::K, &[90], &RunOptions::default()).unwrap();
    assert_eq!(rows[1], alone[0]);
    assert_eq!(sweep_exit_code(&rows), 0);
}

#[test]
fn sweep_rejects_bad_value_lists_and_records_failures() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(PEAK_2D, tmp.path());
    let opts = RunOptions::default();
    assert!(run_sweep(&cfg, SweepParam::C, &[], &opts).is_err());
    assert!(run_sweep(&cfg, SweepParam::C, &[50, 50], &opts).is_err());
    // d = 0 is not a dimension; that row fails and the sweep finishes
    let rows = run_sweep(&cfg, SweepParam::D, &[0, 2], &opts).unwrap();
    assert_eq!(rows[0].status, "error");
    assert!(rows[0].error.is_some() && rows[0].l2_error.is_nan());
    assert_eq!(rows[1].status, "converged");
    assert_eq!(sweep_exit_code(&rows), 2);
}

#[test]
fn dimension_sweep_completes() {
    let tmp = tempfile::tempdir().unwrap();
    let text = r#"
seed = 3
[function]
kind = "gaussian_peak"
dim = 2
[basis]
degree = 2
[fit_samples]
kind = "uniform_random"
count = 2000
[constraints]
points = { kind = "uniform_random", count = 2000 }
"#;
    let rows = sweep(text, tmp.path(), SweepParam::D, &[2, 5, 10, 25, 50]);
    assert!(rows.iter().all(|r| r.2 == "converged"), "{rows:?}");
}

#[test]
fn gen_points_examples() {
    let tmp = tempfile::tempdir().unwrap();
    let opts = RunOptions::default();
    let mut grid = SamplerSpec::new(Generator::TensorGrid, 0);
    grid.count = None;
    grid.per_dim = Some(31);
    let set = run_gen_points(&grid, 2, &tmp.path().join("g.csv"), &opts).unwrap();
    assert_eq!(set.len(), 961);
    let text = fs::read_to_string(tmp.path().join("g.csv")).unwrap();
    assert_eq!(text.lines().count(), 962);

    let set = run_gen_points(&SamplerSpec::new(Generator::Equidistant, 3), 1, &tmp.path().join("e.csv"), &opts).unwrap();
    assert_eq!(set.as_flat(), &[-1.0, 0.0, 1.0]);

    let unseeded = SamplerSpec::new(Generator::UniformRandom, 10);
    assert!(run_gen_points(&unseeded, 2, &tmp.path().join("u.csv"), &opts).is_err());
    let seeded = unseeded.with_explicit_seed(42);
    let a = run_gen_points(&seeded, 2, &tmp.path().join("u1.csv"), &opts).unwrap();
    let b = run_gen_points(&seeded, 2, &tmp.path().join("u2.csv"), &opts).unwrap();
    assert_eq!(a.as_flat(), b.as_flat());
    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("u1.json")).unwrap()).unwrap();
    assert_eq!(meta["seed"], 42);
}
