//! Least-squares polynomial approximation under pointwise non-negativity or
//! bound constraints.
//!
//! The constrained quadratic program is solved through its Fenchel dual, an
//! optimization over one multiplier per constraint point, with first-order
//! splitting methods. FISTA with adaptive restart is the default solver.
//!
//! ```no_run
//! use posapprox::prelude::*;
//!
//! let limits = Limits::default();
//! let ms = total_degree_indices(1, 20)?;
//! let fit = chebyshev_nodes(50)?;
//! let prob = ApproximationProblem::from_function(&ms, &TestFunction::Runge, &fit, 100.0, &limits)?;
//! let cons = nonneg_constraints(&ms, &equidistant(201)?, 1e-5, &limits)?;
//! let model = assemble_dual(&prob, &cons, None)?;
//! let result = solve(&model, &SolverConfig::default())?;
//! assert!(model.max_violation(&result.c_star) == 0.0);
//! # Ok::<(), posapprox::Error>(())
//! ```

// `!(x > 0.0)` is how NaN gets rejected along with the out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod basis;
pub mod error;
pub mod experiment;
pub mod functions;
pub mod io;
pub mod metrics;
pub mod problem;
pub mod solvers;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::basis::{
        basis_eval, legendre_eval_1d, subspace_dim, total_degree_indices, vandermonde, Limits, MultiIndex,
        MultiIndexSet,
    };
    pub use crate::functions::{
        chebyshev_nodes, equidistant, tensor_grid, uniform_random, FunctionKind, Generator, SampleSet, TestFunction,
    };
    pub use crate::metrics::{convergence_distance, l2_error_estimate, negative_fraction, EvaluationReport};
    pub use crate::problem::{
        assemble_dual, assemble_dual_with, bound_constraints, lower_bound_constraints, nonneg_constraints, primal_objective, prox_hstar,
        ApproximationProblem, ConstraintSet, DualModel, DualOptions, PolynomialModel,
    };
    pub use crate::solvers::{solve, solve_observed, Method, RestartRule, SolverConfig, SolverResult, Status};
    pub use crate::Error;
}
