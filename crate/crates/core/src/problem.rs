//! The constrained least-squares problem, its Fenchel dual, and the cached
//! factorizations behind every gradient, proximal map, and primal recovery.
//!
//! Primal:  `min_c (alpha/2) ||Psi_a c - f||^2  s.t.  B c >= b`
//!
//! Dual:    `min_{u <= 0} G*(u)`, with
//! `G*(u) = (1/2 alpha) (z - B^T u)^T K^+ (z - B^T u) - (alpha/2) f^T f + b^T u`,
//! `z = alpha Psi_a^T f` and `K = Psi_a^T Psi_a`.
//!
//! `K^+` is never formed. With the thin SVD `Psi_a = U S V^T` truncated to rank
//! `r`, define `W = B V_r S_r^{-1}` (C x r) and `s = U_r^T f`. Then
//! `M = B K^+ B^T = W W^T`, `S_r^{-1} V_r^T z = alpha s`, and
//!
//! * `G*(u) = (1/2 alpha) ||alpha s - W^T u||^2 - (alpha/2) f^T f + b^T u`
//! * `grad G*(u) = (1/alpha) M u - q` with `q = W s - b = (1/alpha) B K^+ z - b`
//! * `c(u) = V_r S_r^{-1} (s - W^T u / alpha)`
//!
//! The spectrum of `M` comes from the SVD of `W`, so `M` is only materialized
//! when that makes the per-iteration product cheaper (`C <= r`).
//!
//! Active constraints of the optimum satisfy `(Bc)_i = b_i`, which a computed
//! `c` only meets up to round-off of either sign. By default the dual is
//! therefore posed against `b + delta` with `delta_i = (N + 8) eps` times the
//! row scale `|b_i| + sum_j |B_ij| |c_ls,j|` (`c_ls` the unconstrained fit),
//! so that the recovered `c` satisfies `B c >= b` exactly in floating point.
//! Feasibility is always measured against the unshifted `b`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::basis::{basis_eval, vandermonde, BasisMeta, Limits, MultiIndexSet};
use crate::error::{Error, Result};
use crate::functions::{Generator, SampleSet, TestFunction};

/// Default weight on the least-squares term.
pub const DEFAULT_ALPHA: f64 = 100.0;

/// Default constraint margin: `b = lower + epsilon`.
pub const DEFAULT_EPSILON: f64 = 1e-5;

#[derive(Debug, Clone)]
pub struct ApproximationProblem {
    psi_a: DMatrix<f64>,
    f: DVector<f64>,
    alpha: f64,
    warnings: Vec<String>,
}

impl ApproximationProblem {
    pub fn new(psi_a: DMatrix<f64>, f: DVector<f64>, alpha: f64) -> Result<Self> {
        let (k, n) = psi_a.shape();
        if k == 0 || n == 0 {
            return Err(Error::InvalidArgument("empty approximation matrix".into()));
        }
        if f.len() != k {
            return Err(Error::dim("sample values", k, f.len()));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")));
        }
        let mut warnings = Vec::new();
        if k <= n {
            warnings.push(format!(
                "under-determined fit: K={k} samples for N={n} basis functions; using the pseudo-inverse"
            ));
        }
        Ok(ApproximationProblem {
            psi_a,
            f,
            alpha,
            warnings,
        })
    }

    /// Sample `tf` at `samples` and build `Psi_a`.
    pub fn from_function(
        ms: &MultiIndexSet,
        tf: &TestFunction,
        samples: &SampleSet,
        alpha: f64,
        limits: &Limits,
    ) -> Result<Self> {
        if samples.dim() != ms.dim() {
            return Err(Error::dim("fit samples", ms.dim(), samples.dim()));
        }
        let f = DVector::from_vec(tf.sample(samples)?);
        let psi_a = vandermonde(ms, samples.as_flat(), limits)?;
        Self::new(psi_a, f, alpha)
    }

    pub fn psi_a(&self) -> &DMatrix<f64> {
        &self.psi_a
    }

    pub fn f(&self) -> &DVector<f64> {
        &self.f
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn num_samples(&self) -> usize {
        self.psi_a.nrows()
    }

    pub fn num_basis(&self) -> usize {
        self.psi_a.ncols()
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintMode {
    /// `f~(y_i) >= lower + epsilon`
    Nonneg,
    /// `lower + epsilon <= f~(y_i) <= upper - epsilon`
    Bounded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintProvenance {
    pub mode: ConstraintMode,
    pub n_points: usize,
    pub generator: Generator,
    pub seed: Option<u64>,
    pub epsilon: f64,
    pub lower: f64,
    pub upper: Option<f64>,
}

/// `B c >= b`.
#[derive(Debug, Clone)]
pub struct ConstraintSet {
    matrix: DMatrix<f64>,
    rhs: DVector<f64>,
    provenance: Option<ConstraintProvenance>,
}

impl ConstraintSet {
    pub fn new(matrix: DMatrix<f64>, rhs: DVector<f64>) -> Result<Self> {
        if matrix.nrows() == 0 {
            return Err(Error::InvalidArgument("at least one constraint is required".into()));
        }
        if matrix.nrows() != rhs.len() {
            return Err(Error::dim("constraint right-hand side", matrix.nrows(), rhs.len()));
        }
        Ok(ConstraintSet {
            matrix,
            rhs,
            provenance: None,
        })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn rhs(&self) -> &DVector<f64> {
        &self.rhs
    }

    pub fn len(&self) -> usize {
        self.rhs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rhs.is_empty()
    }

    pub fn provenance(&self) -> Option<&ConstraintProvenance> {
        self.provenance.as_ref()
    }
}

fn check_points(ms: &MultiIndexSet, points: &SampleSet) -> Result<()> {
    if points.is_empty() {
        return Err(Error::InvalidArgument("constraint point list is empty".into()));
    }
    if points.dim() != ms.dim() {
        return Err(Error::dim("constraint points", ms.dim(), points.dim()));
    }
    Ok(())
}

/// `B = Psi_p`, `b = epsilon * 1`.
pub fn nonneg_constraints(
    ms: &MultiIndexSet,
    points: &SampleSet,
    epsilon: f64,
    limits: &Limits,
) -> Result<ConstraintSet> {
    if epsilon < 0.0 {
        return Err(Error::InvalidArgument(format!("epsilon must be >= 0, got {epsilon}")));
    }
    lower_bound_constraints(ms, points, 0.0, epsilon, limits)
}

/// `B = Psi_p`, `b = (lower + epsilon) * 1`.
pub fn lower_bound_constraints(
    ms: &MultiIndexSet,
    points: &SampleSet,
    lower: f64,
    epsilon: f64,
    limits: &Limits,
) -> Result<ConstraintSet> {
    check_points(ms, points)?;
    let matrix = vandermonde(ms, points.as_flat(), limits)?;
    let rhs = DVector::from_element(points.len(), lower + epsilon);
    Ok(ConstraintSet {
        matrix,
        rhs,
        provenance: Some(ConstraintProvenance {
            mode: ConstraintMode::Nonneg,
            n_points: points.len(),
            generator: points.generator(),
            seed: points.seed(),
            epsilon,
            lower,
            upper: None,
        }),
    })
}

/// `B = [Psi_p; -Psi_p]`, `b = [lower + eps; -upper + eps]`.
pub fn bound_constraints(
    ms: &MultiIndexSet,
    points: &SampleSet,
    lower: f64,
    upper: f64,
    epsilon: f64,
    limits: &Limits,
) -> Result<ConstraintSet> {
    check_points(ms, points)?;
    if !(lower < upper) {
        return Err(Error::InvalidArgument(format!("inverted bounds: lower={lower}, upper={upper}")));
    }
    if epsilon < 0.0 || 2.0 * epsilon >= upper - lower {
        return Err(Error::InvalidArgument(format!(
            "epsilon={epsilon} must satisfy 0 <= 2 eps < upper - lower"
        )));
    }
    let m = points.len();
    limits.check_entries("constraint matrix", 2 * m, ms.len())?;
    let psi_p = vandermonde(ms, points.as_flat(), limits)?;
    let mut matrix = DMatrix::zeros(2 * m, ms.len());
    matrix.rows_mut(0, m).copy_from(&psi_p);
    matrix.rows_mut(m, m).copy_from(&(-psi_p));
    let mut rhs = DVector::zeros(2 * m);
    rhs.rows_mut(0, m).fill(lower + epsilon);
    rhs.rows_mut(m, m).fill(-upper + epsilon);
    Ok(ConstraintSet {
        matrix,
        rhs,
        provenance: Some(ConstraintProvenance {
            mode: ConstraintMode::Bounded,
            n_points: m,
            generator: points.generator(),
            seed: points.seed(),
            epsilon,
            lower,
            upper: Some(upper),
        }),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrimalObjective {
    pub lsq: f64,
    pub feasible: bool,
    pub max_violation: f64,
}

/// `max(0, max_i (b_i - (Bc)_i))`, evaluated with a direct product.
pub fn max_violation(cons: &ConstraintSet, c: &DVector<f64>) -> Result<f64> {
    if c.len() != cons.matrix.ncols() {
        return Err(Error::dim("coefficients", cons.matrix.ncols(), c.len()));
    }
    Ok(violation(&cons.matrix, &cons.rhs, c))
}

pub(crate) fn violation(b_mat: &DMatrix<f64>, rhs: &DVector<f64>, c: &DVector<f64>) -> f64 {
    let bc = b_mat * c;
    bc.iter()
        .zip(rhs.iter())
        .fold(0.0f64, |acc, (&lhs, &r)| acc.max(r - lhs))
}

pub fn primal_objective(
    prob: &ApproximationProblem,
    cons: &ConstraintSet,
    c: &DVector<f64>,
) -> Result<PrimalObjective> {
    if c.len() != prob.num_basis() {
        return Err(Error::dim("coefficients", prob.num_basis(), c.len()));
    }
    let r = &prob.psi_a * c - &prob.f;
    let lsq = 0.5 * prob.alpha * r.norm_squared();
    let max_violation = max_violation(cons, c)?;
    Ok(PrimalObjective {
        lsq,
        feasible: max_violation == 0.0,
        max_violation,
    })
}

/// Cut-off operator: projection onto the non-positive orthant.
pub fn prox_hstar(u: &DVector<f64>) -> DVector<f64> {
    u.map(|v| v.min(0.0))
}

/// Cached dual quantities; immutable after assembly.
#[derive(Debug, Clone)]
pub struct DualModel {
    alpha: f64,
    b_mat: DMatrix<f64>,
    b: DVector<f64>,
    // b + margin, the right-hand side the dual is posed against
    b_shifted: DVector<f64>,
    z: DVector<f64>,
    f_norm_sq: f64,
    // thin SVD of Psi_a, truncated to rank r
    v_r: DMatrix<f64>,
    sigma_r: DVector<f64>,
    s: DVector<f64>,
    rcond: f64,
    // W = B V_r S_r^{-1}
    w: DMatrix<f64>,
    // M = W W^T, kept only when C <= r
    m_dense: Option<DMatrix<f64>>,
    // non-zero spectrum of M: M = Q diag(lambda) Q^T
    eig_vectors: DMatrix<f64>,
    eig_values: DVector<f64>,
    lambda_max: f64,
    lambda_min: f64,
    q: DVector<f64>,
}

/// Multiple of machine epsilon used for the feasibility margin, on top of the
/// length of the row sums.
pub const MARGIN_ULPS: f64 = 8.0;

/// Margin in ulps for rows of length `n`: the usual `n eps` bound on the
/// rounding of a dot product, plus a few ulps for the recovery itself.
pub fn margin_ulps(n: usize) -> f64 {
    MARGIN_ULPS + n as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualOptions {
    /// Singular values at or below `rcond * sigma_max` are dropped.
    pub rcond: Option<f64>,
    /// Pose the dual against `b + delta` (see module docs).
    pub feasibility_margin: bool,
}

impl Default for DualOptions {
    fn default() -> Self {
        DualOptions {
            rcond: None,
            feasibility_margin: true,
        }
    }
}

/// Default truncation threshold relative to the largest singular value.
pub fn default_rcond(k: usize, n: usize) -> f64 {
    f64::EPSILON * k.max(n) as f64
}

pub fn assemble_dual(prob: &ApproximationProblem, cons: &ConstraintSet, rcond: Option<f64>) -> Result<DualModel> {
    assemble_dual_with(
        prob,
        cons,
        &DualOptions {
            rcond,
            ..Default::default()
        },
    )
}

pub fn assemble_dual_with(prob: &ApproximationProblem, cons: &ConstraintSet, opts: &DualOptions) -> Result<DualModel> {
    let rcond = opts.rcond;
    let (k, n) = prob.psi_a.shape();
    let (c, nb) = cons.matrix.shape();
    if nb != n {
        return Err(Error::dim("constraint matrix columns", n, nb));
    }
    let rcond = rcond.unwrap_or_else(|| default_rcond(k, n));
    if !(rcond > 0.0 && rcond < 1.0) {
        return Err(Error::InvalidArgument(format!("rcond must lie in (0, 1), got {rcond}")));
    }
    for (i, row) in cons.matrix.row_iter().enumerate() {
        if row.iter().all(|&v| v == 0.0) {
            return Err(Error::Degenerate(format!("constraint row {i} is identically zero")));
        }
    }

    let svd = prob.psi_a.clone().svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^T");
    let sv = &svd.singular_values;
    let sigma_max = sv.iter().cloned().fold(0.0f64, f64::max);
    if sigma_max == 0.0 {
        return Err(Error::Degenerate("approximation matrix has rank 0".into()));
    }
    let keep: Vec<usize> = (0..sv.len()).filter(|&j| sv[j] > rcond * sigma_max).collect();
    let r = keep.len();
    let mut v_r = DMatrix::zeros(n, r);
    let mut u_r = DMatrix::zeros(k, r);
    let mut sigma_r = DVector::zeros(r);
    for (col, &j) in keep.iter().enumerate() {
        v_r.column_mut(col).copy_from(&v_t.row(j).transpose());
        u_r.column_mut(col).copy_from(&u.column(j));
        sigma_r[col] = sv[j];
    }

    let s = u_r.tr_mul(&prob.f);
    let z = prob.psi_a.tr_mul(&prob.f) * prob.alpha;

    let mut w = &cons.matrix * &v_r;
    for (j, mut col) in w.column_iter_mut().enumerate() {
        col /= sigma_r[j];
    }
    let margin = if opts.feasibility_margin {
        let c_ls = &v_r * s.component_div(&sigma_r);
        let c_abs = c_ls.abs();
        let scale = cons.matrix.abs() * c_abs + cons.rhs.abs();
        scale * (margin_ulps(n) * f64::EPSILON)
    } else {
        DVector::zeros(c)
    };
    let shifted = &cons.rhs + &margin;
    let q = &w * &s - &shifted;

    // spectrum of M from the SVD of W
    let w_svd = w.clone().svd(true, false);
    let q_full = w_svd.u.expect("requested U");
    let eig_values = w_svd.singular_values.map(|x| x * x);
    let lambda_max = eig_values.iter().cloned().fold(0.0f64, f64::max);
    let lambda_min = if eig_values.len() == c {
        eig_values.iter().cloned().fold(f64::INFINITY, f64::min)
    } else {
        0.0
    };
    let m_dense = (c <= r).then(|| &w * w.transpose());

    Ok(DualModel {
        alpha: prob.alpha,
        b_mat: cons.matrix.clone(),
        b: cons.rhs.clone(),
        b_shifted: shifted,
        z,
        f_norm_sq: prob.f.norm_squared(),
        v_r,
        sigma_r,
        s,
        rcond,
        w,
        m_dense,
        eig_vectors: q_full,
        eig_values,
        lambda_max,
        lambda_min,
        q,
    })
}

impl DualModel {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Number of constraints `C`.
    pub fn num_constraints(&self) -> usize {
        self.b.len()
    }

    /// Number of basis functions `N`.
    pub fn num_basis(&self) -> usize {
        self.v_r.nrows()
    }

    /// Effective rank of `Psi_a` after truncation.
    pub fn rank(&self) -> usize {
        self.sigma_r.len()
    }

    pub fn rcond(&self) -> f64 {
        self.rcond
    }

    pub fn constraint_matrix(&self) -> &DMatrix<f64> {
        &self.b_mat
    }

    pub fn rhs(&self) -> &DVector<f64> {
        &self.b
    }

    /// `z = alpha Psi_a^T f`.
    pub fn z(&self) -> &DVector<f64> {
        &self.z
    }

    /// Right-hand side the dual is posed against (`b` plus the feasibility margin).
    pub fn shifted_rhs(&self) -> &DVector<f64> {
        &self.b_shifted
    }

    /// `q = (1/alpha) B K^+ z - b`, with `b` the shifted right-hand side.
    pub fn q(&self) -> &DVector<f64> {
        &self.q
    }

    /// Retained singular values of `Psi_a`.
    pub fn singular_values(&self) -> &DVector<f64> {
        &self.sigma_r
    }

    /// Non-zero eigenvalues of `M = B K^+ B^T` and their eigenvectors.
    pub fn spectrum(&self) -> (&DVector<f64>, &DMatrix<f64>) {
        (&self.eig_values, &self.eig_vectors)
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }

    /// Smallest eigenvalue of `M`; exactly 0 when `rank(W) < C`.
    pub fn lambda_min(&self) -> f64 {
        self.lambda_min
    }

    /// `lambda_max / lambda_min`, or `None` when `M` is numerically singular.
    pub fn condition_number(&self) -> Option<f64> {
        let c = self.num_constraints();
        let rel = (c.max(self.rank()) as f64 * f64::EPSILON).powi(2);
        if self.lambda_max > 0.0 && self.lambda_min > rel * self.lambda_max {
            Some(self.lambda_max / self.lambda_min)
        } else {
            None
        }
    }

    /// Lipschitz constant of `grad G*`: `lambda_max / alpha`.
    pub fn lipschitz(&self) -> f64 {
        self.lambda_max / self.alpha
    }

    /// Default step `alpha / lambda_max`.
    pub fn default_step(&self) -> Result<f64> {
        if self.lambda_max > 0.0 && self.lambda_max.is_finite() {
            Ok(self.alpha / self.lambda_max)
        } else {
            Err(Error::Degenerate("M = B K^+ B^T has no positive eigenvalue".into()))
        }
    }

    fn check_dual(&self, u: &DVector<f64>) -> Result<()> {
        if u.len() != self.num_constraints() {
            return Err(Error::dim("dual vector", self.num_constraints(), u.len()));
        }
        Ok(())
    }

    /// `M u`.
    pub fn apply_m(&self, u: &DVector<f64>) -> DVector<f64> {
        match &self.m_dense {
            Some(m) => m * u,
            None => &self.w * self.w.tr_mul(u),
        }
    }

    pub fn gstar(&self, u: &DVector<f64>) -> Result<f64> {
        self.check_dual(u)?;
        Ok(self.gstar_unchecked(u))
    }

    pub(crate) fn gstar_unchecked(&self, u: &DVector<f64>) -> f64 {
        let a = self.alpha;
        let r = &self.s * a - self.w.tr_mul(u);
        r.norm_squared() / (2.0 * a) - 0.5 * a * self.f_norm_sq + self.b_shifted.dot(u)
    }

    /// `G*(v) - G*(u)`, evaluated without the cancellation that differencing
    /// two objective values suffers once the step is small.
    pub fn gstar_difference(&self, u: &DVector<f64>, v: &DVector<f64>) -> Result<f64> {
        self.check_dual(u)?;
        self.check_dual(v)?;
        Ok(self.gstar_difference_unchecked(u, v))
    }

    pub(crate) fn gstar_difference_unchecked(&self, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
        // ||r_v||^2 - ||r_u||^2 = (r_v - r_u).(r_v + r_u), r_v - r_u = -W^T (v - u)
        let a = self.alpha;
        let d = v - u;
        let wd = self.w.tr_mul(&d);
        let sum = &self.s * (2.0 * a) - self.w.tr_mul(&(u + v));
        -wd.dot(&sum) / (2.0 * a) + self.b_shifted.dot(&d)
    }

    /// `(1/alpha)(M u - B K^+ z) + b`.
    pub fn grad_gstar(&self, u: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_dual(u)?;
        Ok(self.grad_unchecked(u))
    }

    pub(crate) fn grad_unchecked(&self, u: &DVector<f64>) -> DVector<f64> {
        let mut g = self.apply_m(u);
        g /= self.alpha;
        g -= &self.q;
        g
    }

    /// `(I + (gamma/alpha) M)^{-1} [u + gamma q]`.
    pub fn prox_gstar(&self, u: &DVector<f64>, gamma: f64) -> Result<DVector<f64>> {
        self.check_dual(u)?;
        if !(gamma > 0.0) {
            return Err(Error::InvalidArgument(format!("prox step must be positive, got {gamma}")));
        }
        Ok(self.prox_gstar_unchecked(u, gamma))
    }

    pub(crate) fn prox_gstar_unchecked(&self, u: &DVector<f64>, gamma: f64) -> DVector<f64> {
        let t = gamma / self.alpha;
        let v = u + &self.q * gamma;
        let mut coeff = self.eig_vectors.tr_mul(&v);
        for (c, &lam) in coeff.iter_mut().zip(self.eig_values.iter()) {
            *c *= t * lam / (1.0 + t * lam);
        }
        v - &self.eig_vectors * coeff
    }

    /// `argmin_x gamma (alpha/2) ||Psi_a x - f||^2 + (1/2) ||x - c||^2
    ///  = (I + gamma alpha K)^{-1} (c + gamma z)`.
    pub fn prox_g(&self, c: &DVector<f64>, gamma: f64) -> Result<DVector<f64>> {
        if c.len() != self.num_basis() {
            return Err(Error::dim("coefficients", self.num_basis(), c.len()));
        }
        if !(gamma > 0.0) {
            return Err(Error::InvalidArgument(format!("prox step must be positive, got {gamma}")));
        }
        Ok(self.prox_g_unchecked(c, gamma))
    }

    pub(crate) fn prox_g_unchecked(&self, c: &DVector<f64>, gamma: f64) -> DVector<f64> {
        let ga = gamma * self.alpha;
        let v = c + &self.z * gamma;
        let mut coeff = self.v_r.tr_mul(&v);
        for (x, &sig) in coeff.iter_mut().zip(self.sigma_r.iter()) {
            let k = ga * sig * sig;
            *x *= k / (1.0 + k);
        }
        v - &self.v_r * coeff
    }

    /// `c = K^+ (z - B^T u) / alpha`.
    pub fn recover_primal(&self, u: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_dual(u)?;
        Ok(self.recover_unchecked(u))
    }

    pub(crate) fn recover_unchecked(&self, u: &DVector<f64>) -> DVector<f64> {
        let mut t = self.w.tr_mul(u);
        t /= -self.alpha;
        t += &self.s;
        t.component_div_assign(&self.sigma_r);
        &self.v_r * t
    }

    /// Minimum-norm unconstrained least-squares coefficients.
    pub fn unconstrained_solution(&self) -> DVector<f64> {
        let t = self.s.component_div(&self.sigma_r);
        &self.v_r * t
    }

    pub fn max_violation(&self, c: &DVector<f64>) -> f64 {
        violation(&self.b_mat, &self.b, c)
    }

    /// Largest singular value of `B`.
    pub fn constraint_norm(&self) -> f64 {
        let sv = if self.b_mat.nrows() <= self.b_mat.ncols() {
            (&self.b_mat * self.b_mat.transpose()).symmetric_eigenvalues()
        } else {
            (self.b_mat.transpose() * &self.b_mat).symmetric_eigenvalues()
        };
        sv.iter().cloned().fold(0.0f64, f64::max).sqrt()
    }
}

/// A fitted polynomial `f~(x) = <c, Psi(x)>`.
#[derive(Debug, Clone)]
pub struct PolynomialModel {
    index_set: MultiIndexSet,
    coefficients: DVector<f64>,
}

/// On-disk form of a [`PolynomialModel`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolynomialModelFile {
    pub basis: BasisMeta,
    pub coefficients: Vec<f64>,
    pub alpha: Option<f64>,
    #[serde(default)]
    pub provenance: serde_json::Value,
}

impl PolynomialModel {
    pub fn new(index_set: MultiIndexSet, coefficients: DVector<f64>) -> Result<Self> {
        if coefficients.len() != index_set.len() {
            return Err(Error::dim("coefficients", index_set.len(), coefficients.len()));
        }
        Ok(PolynomialModel {
            index_set,
            coefficients,
        })
    }

    pub fn index_set(&self) -> &MultiIndexSet {
        &self.index_set
    }

    pub fn coefficients(&self) -> &DVector<f64> {
        &self.coefficients
    }

    pub fn dim(&self) -> usize {
        self.index_set.dim()
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        Ok(basis_eval(&self.index_set, x)?.dot(&self.coefficients))
    }

    pub fn eval_samples(&self, samples: &SampleSet) -> Result<Vec<f64>> {
        if samples.dim() != self.dim() {
            return Err(Error::dim("evaluation points", self.dim(), samples.dim()));
        }
        samples.iter().map(|x| self.eval(x)).collect()
    }

    pub fn to_file(&self, alpha: Option<f64>, provenance: serde_json::Value) -> PolynomialModelFile {
        PolynomialModelFile {
            basis: self.index_set.meta(),
            coefficients: self.coefficients.iter().cloned().collect(),
            alpha,
            provenance,
        }
    }

    pub fn from_file(file: &PolynomialModelFile) -> Result<Self> {
        let set = MultiIndexSet::from_meta(&file.basis)?;
        Self::new(set, DVector::from_column_slice(&file.coefficients))
    }
}
