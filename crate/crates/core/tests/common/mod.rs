//! Reference computations shared by the integration suites. Nothing here calls
//! the library's dual machinery: everything is formed densely from the
//! definitions.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use posapprox::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A small dense constrained least-squares instance.
#[derive(Debug, Clone)]
pub struct Qp {
    pub psi: DMatrix<f64>,
    pub f: DVector<f64>,
    pub alpha: f64,
    pub b_mat: DMatrix<f64>,
    pub rhs: DVector<f64>,
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.random_range(-1.0..=1.0))
}

pub fn uniform_vector(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.random_range(-1.0..=1.0))
}

impl Qp {
    /// `K > N` samples, `C <= N` generic constraints (so `B K^-1 B^T` is
    /// positive definite), with `b` placed around the unconstrained fit so
    /// that roughly half the constraints bind. The interior is non-empty.
    pub fn random(rng: &mut ChaCha8Rng, k: usize, n: usize, c: usize, alpha: f64) -> Qp {
        assert!(k > n && c <= n);
        let psi = uniform_matrix(rng, k, n);
        let f = uniform_vector(rng, k);
        let b_mat = uniform_matrix(rng, c, n);
        let offsets = uniform_vector(rng, c);
        let mut qp = Qp {
            psi,
            f,
            alpha,
            b_mat,
            rhs: DVector::zeros(c),
        };
        qp.rhs = &qp.b_mat * qp.c_ls() + offsets * 0.5;
        qp
    }

    pub fn k(&self) -> DMatrix<f64> {
        self.psi.tr_mul(&self.psi)
    }

    pub fn k_inv(&self) -> DMatrix<f64> {
        self.k().try_inverse().expect("full column rank")
    }

    pub fn z(&self) -> DVector<f64> {
        self.psi.tr_mul(&self.f) * self.alpha
    }

    pub fn c_ls(&self) -> DVector<f64> {
        self.k_inv() * self.psi.tr_mul(&self.f)
    }

    pub fn m(&self) -> DMatrix<f64> {
        &self.b_mat * self.k_inv() * self.b_mat.transpose()
    }

    /// `(1/alpha) B K^-1 z - b`.
    pub fn q(&self) -> DVector<f64> {
        &self.b_mat * self.k_inv() * self.z() / self.alpha - &self.rhs
    }

    /// `G*(u)` straight from its definition.
    pub fn gstar(&self, u: &DVector<f64>) -> f64 {
        let r = self.z() - self.b_mat.tr_mul(u);
        (r.transpose() * self.k_inv() * &r)[0] / (2.0 * self.alpha) - 0.5 * self.alpha * self.f.norm_squared()
            + self.rhs.dot(u)
    }

    pub fn lsq(&self, c: &DVector<f64>) -> f64 {
        0.5 * self.alpha * (&self.psi * c - &self.f).norm_squared()
    }

    pub fn problem(&self) -> ApproximationProblem {
        ApproximationProblem::new(self.psi.clone(), self.f.clone(), self.alpha).unwrap()
    }

    pub fn constraints(&self) -> ConstraintSet {
        ConstraintSet::new(self.b_mat.clone(), self.rhs.clone()).unwrap()
    }

    pub fn model(&self) -> DualModel {
        assemble_dual(&self.problem(), &self.constraints(), None).unwrap()
    }

    /// Model posed against the exact `b`, for formula checks.
    pub fn exact_model(&self) -> DualModel {
        let opts = DualOptions {
            rcond: None,
            feasibility_margin: false,
        };
        assemble_dual_with(&self.problem(), &self.constraints(), &opts).unwrap()
    }
}

#[derive(Debug, Clone)]
pub struct OracleSolution {
    pub c: DVector<f64>,
    /// Dual optimum in the solver's sign convention (`u <= 0`).
    pub u: DVector<f64>,
    /// Primal optimum `(alpha/2) ||Psi c - f||^2`.
    pub objective: f64,
    pub active: Vec<usize>,
}

/// Exhaustive active-set solve: for every subset `A`, solve the
/// equality-constrained least squares `B_A c = b_A`, keep candidates that are
/// feasible with non-negative multipliers, and return the best.
pub fn active_set_oracle(qp: &Qp) -> OracleSolution {
    let c_count = qp.rhs.len();
    let k_inv = qp.k_inv();
    let c_ls = qp.c_ls();
    let tol = 1e-10;
    let mut best: Option<OracleSolution> = None;
    for mask in 0u32..(1 << c_count) {
        let active: Vec<usize> = (0..c_count).filter(|i| mask & (1 << i) != 0).collect();
        let mut lambda = DVector::zeros(c_count);
        let c = if active.is_empty() {
            c_ls.clone()
        } else {
            let b_a = qp.b_mat.select_rows(active.iter());
            let r_a = qp.rhs.select_rows(active.iter());
            let s = &b_a * &k_inv * b_a.transpose();
            let Some(s_inv) = s.try_inverse() else { continue };
            let lam_a = s_inv * (r_a - &b_a * &c_ls) * qp.alpha;
            for (j, &i) in active.iter().enumerate() {
                lambda[i] = lam_a[j];
            }
            &c_ls + &k_inv * b_a.tr_mul(&lam_a) / qp.alpha
        };
        // relative to the scale of the multipliers and of the rows
        let lam_tol = tol * (1.0 + lambda.amax());
        if lambda.iter().any(|&l| l < -lam_tol) {
            continue;
        }
        let slack = &qp.b_mat * &c - &qp.rhs;
        let row_tol = tol * (1.0 + qp.rhs.amax() + (&qp.b_mat * &c).amax());
        if slack.iter().any(|&s| s < -row_tol) {
            continue;
        }
        let objective = qp.lsq(&c);
        if best.as_ref().is_none_or(|b| objective < b.objective) {
            best = Some(OracleSolution {
                c,
                u: -lambda,
                objective,
                active,
            });
        }
    }
    best.expect("a feasible instance has a KKT point")
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` (weights sum to 2), by Newton
/// iteration on the three-term recurrence of the classical `P_n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pn1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// Number of `alpha in N^d` with `|alpha| <= n`, by direct recursion.
pub fn count_total_degree(d: usize, n: usize) -> usize {
    if d == 0 {
        return 1;
    }
    (0..=n).map(|first| count_total_degree(d - 1, n - first)).sum()
}

/// Classical `P_k` from the explicit sum `2^-k sum_j C(k,j)^2 (x-1)^(k-j) (x+1)^j`.
pub fn legendre_explicit(k: usize, x: f64) -> f64 {
    let mut binom = 1.0;
    let mut sum = 0.0;
    for j in 0..=k {
        sum += binom * binom * (x - 1.0).powi((k - j) as i32) * (x + 1.0).powi(j as i32);
        binom = binom * (k - j) as f64 / (j + 1) as f64;
    }
    sum / 2f64.powi(k as i32)
}
