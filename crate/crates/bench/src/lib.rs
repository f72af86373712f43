//! Fixed problem instances shared by the benchmarks.

use posapprox::prelude::*;

/// A 1-D instance: degree `n`, 50 Chebyshev fit points, `c` equispaced constraints.
pub fn univariate(tf: &TestFunction, n: usize, c: usize) -> (ApproximationProblem, ConstraintSet) {
    let limits = Limits::default();
    let ms = total_degree_indices(1, n).unwrap();
    let prob = ApproximationProblem::from_function(&ms, tf, &chebyshev_nodes(50).unwrap(), 100.0, &limits).unwrap();
    let cons = nonneg_constraints(&ms, &equidistant(c).unwrap(), 1e-5, &limits).unwrap();
    (prob, cons)
}

/// Gaussian peak in `d` dimensions on `k` random fit points and `c` random constraints.
pub fn gaussian(d: usize, n: usize, k: usize, c: usize) -> (ApproximationProblem, ConstraintSet) {
    let limits = Limits::default();
    let ms = total_degree_indices(d, n).unwrap();
    let tf = TestFunction::with_defaults(FunctionKind::GaussianPeak, d).unwrap();
    let fit = uniform_random(k, d, 1).unwrap();
    let prob = ApproximationProblem::from_function(&ms, &tf, &fit, 100.0, &limits).unwrap();
    let cons = nonneg_constraints(&ms, &uniform_random(c, d, 2).unwrap(), 1e-5, &limits).unwrap();
    (prob, cons)
}

pub fn model(pair: &(ApproximationProblem, ConstraintSet)) -> DualModel {
    assemble_dual(&pair.0, &pair.1, None).unwrap()
}

/// `iterations` steps of `method`, with the stopping test disabled.
pub fn fixed_run(method: Method, iterations: usize) -> SolverConfig {
    let mut cfg = SolverConfig::with_method(method);
    cfg.max_iter = iterations;
    cfg.fixed_iterations = true;
    cfg.trace_every = iterations;
    cfg
}
