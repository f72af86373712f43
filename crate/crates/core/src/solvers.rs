//! First-order methods on the dual (or primal-dual) problem.
//!
//! Every dual method starts from `u_0 = 0`, keeps its returned iterate in the
//! non-positive orthant, and shares one stopping harness: every
//! `primal_check_interval` iterations the primal coefficients are recovered and
//! the run is declared converged once `||c_k - c_prev|| <= primal_change_tol`
//! and `B c_k >= b` hold at the same check.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io;
use crate::problem::{prox_hstar, DualModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Fista,
    Rfista,
    FistaFixedRestart,
    Vfista,
    ProjectedGradient,
    DouglasRachford,
    Pdhg,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::Fista,
        Method::Rfista,
        Method::FistaFixedRestart,
        Method::Vfista,
        Method::ProjectedGradient,
        Method::DouglasRachford,
        Method::Pdhg,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Fista => "fista",
            Method::Rfista => "rfista",
            Method::FistaFixedRestart => "fista_fixed_restart",
            Method::Vfista => "vfista",
            Method::ProjectedGradient => "projected_gradient",
            Method::DouglasRachford => "douglas_rachford",
            Method::Pdhg => "pdhg",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown method '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RestartRule {
    /// Restart when `G*(u_{k+1}) > G*(u_k)`.
    FunctionValue,
    /// Restart when `grad G*(y_k)^T (u_{k+1} - u_k) > 0`.
    GradientMapping,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub method: Method,
    /// Gradient step; `alpha / lambda_max(M)` when unset.
    pub step: Option<f64>,
    pub max_iter: usize,
    pub restart_rule: RestartRule,
    /// Period for fixed-frequency restart; `ceil(sqrt(8 kappa) - 1)` when unset.
    pub restart_period: Option<usize>,
    pub dr_lambda: f64,
    pub dr_gamma: Option<f64>,
    pub pdhg_mu: Option<f64>,
    pub pdhg_tau0: Option<f64>,
    pub pdhg_eta0: Option<f64>,
    pub primal_check_interval: usize,
    pub primal_change_tol: f64,
    pub trace_every: usize,
    /// Consecutive feasible checks without a new smallest primal change before
    /// the run is reported as stalled.
    pub stall_checks: usize,
    /// Run exactly `max_iter` iterations, ignoring the stopping criteria.
    pub fixed_iterations: bool,
    /// Record wall-clock time in the trace; off keeps traces reproducible.
    pub record_timing: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            method: Method::Rfista,
            step: None,
            max_iter: 100_000,
            restart_rule: RestartRule::FunctionValue,
            restart_period: None,
            dr_lambda: 1.0,
            dr_gamma: None,
            pdhg_mu: None,
            pdhg_tau0: None,
            pdhg_eta0: None,
            primal_check_interval: 1,
            primal_change_tol: 1e-14,
            trace_every: 1,
            stall_checks: 5000,
            fixed_iterations: false,
            record_timing: false,
        }
    }
}

/// `ceil(sqrt(8 kappa) - 1)`, at least 1.
pub fn default_restart_period(kappa: f64) -> usize {
    ((8.0 * kappa).sqrt() - 1.0).ceil().max(1.0) as usize
}

/// `(sqrt(kappa) - 1) / (sqrt(kappa) + 1)`.
pub fn vfista_momentum(kappa: f64) -> f64 {
    let s = kappa.sqrt();
    (s - 1.0) / (s + 1.0)
}

/// `t_{k+1} = (1 + sqrt(1 + 4 t_k^2)) / 2`.
pub fn next_t(t: f64) -> f64 {
    (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0
}

/// `theta = 1 / sqrt(1 + 2 mu eta)`.
pub fn pdhg_theta(mu: f64, eta: f64) -> f64 {
    1.0 / (1.0 + 2.0 * mu * eta).sqrt()
}

impl SolverConfig {
    pub fn with_method(method: Method) -> Self {
        SolverConfig {
            method,
            ..Default::default()
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::SolverConfig(msg));
        if let Some(s) = self.step {
            if !(s > 0.0 && s.is_finite()) {
                return bad(format!("step must be positive, got {s}"));
            }
        }
        if self.max_iter == 0 {
            return bad("max_iter must be positive".into());
        }
        if !(self.dr_lambda > 0.0 && self.dr_lambda <= 2.0) {
            return bad(format!("dr_lambda must lie in (0, 2], got {}", self.dr_lambda));
        }
        if self.restart_period == Some(0) {
            return bad("restart_period must be positive".into());
        }
        for (name, v) in [
            ("dr_gamma", self.dr_gamma),
            ("pdhg_mu", self.pdhg_mu),
            ("pdhg_tau0", self.pdhg_tau0),
            ("pdhg_eta0", self.pdhg_eta0),
        ] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return bad(format!("{name} must be positive, got {v}"));
                }
            }
        }
        if self.primal_check_interval == 0 || self.trace_every == 0 || self.stall_checks == 0 {
            return bad("primal_check_interval, trace_every and stall_checks must be positive".into());
        }
        Ok(())
    }

    /// Fill every model-dependent default and check method preconditions.
    pub fn resolve(&self, model: &DualModel) -> Result<SolverConfig> {
        self.validate()?;
        let mut cfg = self.clone();
        let step = match cfg.step {
            Some(s) => s,
            None => model.default_step()?,
        };
        cfg.step = Some(step);
        let kappa = model.condition_number();
        match cfg.method {
            Method::FistaFixedRestart if cfg.restart_period.is_none() => {
                let kappa = kappa.ok_or_else(|| {
                    Error::SolverConfig(
                        "fixed restart needs restart_period: M is singular so the condition number is unavailable".into(),
                    )
                })?;
                cfg.restart_period = Some(default_restart_period(kappa));
            }
            Method::Vfista if kappa.is_none() => {
                return Err(Error::SolverConfig(
                    "v-FISTA needs a strongly convex dual (lambda_min(M) > 0); M is singular or too ill-conditioned".into(),
                ));
            }
            Method::DouglasRachford => {
                cfg.dr_gamma.get_or_insert(step);
                if cfg.dr_lambda == 2.0 && kappa.is_none() {
                    return Err(Error::SolverConfig(
                        "dr_lambda = 2 requires lambda_min(M) > 0".into(),
                    ));
                }
            }
            Method::Pdhg => {
                let mu = match cfg.pdhg_mu {
                    Some(mu) => mu,
                    None => {
                        let smin = model.singular_values().iter().cloned().fold(f64::INFINITY, f64::min);
                        model.alpha() * smin * smin
                    }
                };
                if !(mu > 0.0 && mu.is_finite()) {
                    return Err(Error::SolverConfig(format!("pdhg_mu must be positive, got {mu}")));
                }
                cfg.pdhg_mu = Some(mu);
                let bnorm = model.constraint_norm();
                let tau0 = *cfg.pdhg_tau0.get_or_insert(1.0 / bnorm);
                let eta0 = *cfg.pdhg_eta0.get_or_insert(1.0 / bnorm);
                if tau0 * eta0 * bnorm * bnorm > 1.0 + 1e-12 {
                    return Err(Error::SolverConfig(format!(
                        "pdhg step product tau0*eta0*||B||^2 = {} exceeds 1",
                        tau0 * eta0 * bnorm * bnorm
                    )));
                }
            }
            _ => {}
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub k: usize,
    pub dual_objective: f64,
    pub primal_change: f64,
    pub max_violation: f64,
    pub restarted: bool,
    pub elapsed_s: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolverTrace {
    pub records: Vec<TraceRecord>,
    /// Number of primal checks performed.
    pub primal_checks: usize,
}

pub const TRACE_HEADER: &str = "k,dual_objective,primal_change,max_violation,restarted,elapsed_s";

impl SolverTrace {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(TRACE_HEADER);
        out.push('\n');
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.k,
                io::fmt_f64(r.dual_objective),
                io::fmt_f64(r.primal_change),
                io::fmt_f64(r.max_violation),
                u8::from(r.restarted),
                io::fmt_f64(r.elapsed_s)
            ));
        }
        out
    }

    pub fn restarts(&self) -> impl Iterator<Item = &TraceRecord> {
        self.records.iter().filter(|r| r.restarted)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Converged,
    MaxIter,
    Stalled,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Converged => "converged",
            Status::MaxIter => "max_iter",
            Status::Stalled => "stalled",
        })
    }
}

#[derive(Debug, Clone)]
pub struct SolverResult {
    pub u_star: DVector<f64>,
    pub c_star: DVector<f64>,
    pub iterations: usize,
    pub status: Status,
    pub trace: SolverTrace,
    /// Fully resolved configuration the run used.
    pub config: SolverConfig,
    pub warnings: Vec<String>,
}

/// Callback receiving the primal iterate `c_k` after every iteration.
pub type Observer<'a> = &'a mut dyn FnMut(usize, &DVector<f64>);

struct Monitor<'a, 'o> {
    model: &'a DualModel,
    cfg: &'a SolverConfig,
    method: Method,
    trace: SolverTrace,
    last_c: DVector<f64>,
    last_change: f64,
    last_violation: f64,
    best_change: f64,
    stall: usize,
    start: Instant,
    observer: Option<Observer<'o>>,
}

enum Verdict {
    Continue,
    Stop(Status),
}

impl<'a, 'o> Monitor<'a, 'o> {
    fn new(model: &'a DualModel, cfg: &'a SolverConfig, c0: DVector<f64>, observer: Option<Observer<'o>>) -> Self {
        let last_violation = model.max_violation(&c0);
        Monitor {
            model,
            cfg,
            method: cfg.method,
            trace: SolverTrace::default(),
            last_c: c0,
            last_change: f64::INFINITY,
            last_violation,
            best_change: f64::INFINITY,
            stall: 0,
            start: Instant::now(),
            observer,
        }
    }

    /// Called once per iteration with the post-prox dual iterate, and the
    /// primal iterate for methods that carry one.
    fn step(&mut self, k: usize, u: &DVector<f64>, c: Option<&DVector<f64>>, restarted: bool) -> Result<Verdict> {
        if u.iter().any(|v| !v.is_finite()) || c.is_some_and(|c| c.iter().any(|v| !v.is_finite())) {
            return Err(Error::Divergence {
                method: self.method.name(),
                iteration: k,
                trace: Box::new(std::mem::take(&mut self.trace)),
            });
        }
        let check = k.is_multiple_of(self.cfg.primal_check_interval);
        let mut verdict = Verdict::Continue;
        if check || self.observer.is_some() {
            let recovered;
            let c = match c {
                Some(c) => c,
                None => {
                    recovered = self.model.recover_unchecked(u);
                    &recovered
                }
            };
            if let Some(obs) = self.observer.as_mut() {
                obs(k, c);
            }
            if check {
                self.trace.primal_checks += 1;
                let change = (c - &self.last_c).norm();
                let viol = self.model.max_violation(c);
                self.last_c.copy_from(c);
                self.last_change = change;
                self.last_violation = viol;
                if !self.cfg.fixed_iterations {
                    if change <= self.cfg.primal_change_tol && viol == 0.0 {
                        verdict = Verdict::Stop(Status::Converged);
                    } else if viol == 0.0 {
                        if change < self.best_change {
                            self.best_change = change;
                            self.stall = 0;
                        } else {
                            self.stall += 1;
                            if self.stall >= self.cfg.stall_checks {
                                verdict = Verdict::Stop(Status::Stalled);
                            }
                        }
                    } else {
                        self.stall = 0;
                    }
                }
            }
        }
        if matches!(verdict, Verdict::Continue) && k >= self.cfg.max_iter {
            verdict = Verdict::Stop(Status::MaxIter);
        }
        if k.is_multiple_of(self.cfg.trace_every) || restarted || matches!(verdict, Verdict::Stop(_)) {
            let elapsed_s = if self.cfg.record_timing {
                self.start.elapsed().as_secs_f64()
            } else {
                0.0
            };
            self.trace.records.push(TraceRecord {
                k,
                dual_objective: self.model.gstar_unchecked(u),
                primal_change: self.last_change,
                max_violation: self.last_violation,
                restarted,
                elapsed_s,
            });
        }
        Ok(verdict)
    }

    fn finish(
        self,
        k: usize,
        status: Status,
        u: DVector<f64>,
        c: Option<DVector<f64>>,
        warnings: Vec<String>,
    ) -> SolverResult {
        let c_star = c.unwrap_or_else(|| self.model.recover_unchecked(&u));
        SolverResult {
            u_star: u,
            c_star,
            iterations: k,
            status,
            trace: self.trace,
            config: self.cfg.clone(),
            warnings,
        }
    }
}

#[derive(Clone, Copy)]
enum Momentum {
    Nesterov,
    Constant(f64),
    Zero,
}

#[derive(Clone, Copy)]
enum Restart {
    Never,
    Adaptive(RestartRule),
    Every(usize),
}

/// Run the configured method.
pub fn solve(model: &DualModel, cfg: &SolverConfig) -> Result<SolverResult> {
    solve_observed(model, cfg, None)
}

/// Run the configured method, reporting every primal iterate to `observer`.
pub fn solve_observed(model: &DualModel, cfg: &SolverConfig, observer: Option<Observer<'_>>) -> Result<SolverResult> {
    let cfg = cfg.resolve(model)?;
    let step = cfg.step.expect("resolved");
    let mut warnings = Vec::new();
    let limit = model.default_step()?;
    if step > limit * (1.0 + 1e-12) {
        warnings.push(format!(
            "step {step} exceeds alpha/lambda_max = {limit}; convergence is not guaranteed"
        ));
    }
    match cfg.method {
        Method::Fista => run_accelerated(model, &cfg, Momentum::Nesterov, Restart::Never, observer, warnings),
        Method::Rfista => run_accelerated(
            model,
            &cfg,
            Momentum::Nesterov,
            Restart::Adaptive(cfg.restart_rule),
            observer,
            warnings,
        ),
        Method::FistaFixedRestart => {
            let period = cfg.restart_period.expect("resolved");
            run_accelerated(model, &cfg, Momentum::Nesterov, Restart::Every(period), observer, warnings)
        }
        Method::Vfista => {
            let kappa = model.condition_number().expect("checked in resolve");
            let beta = vfista_momentum(kappa);
            run_accelerated(model, &cfg, Momentum::Constant(beta), Restart::Never, observer, warnings)
        }
        Method::ProjectedGradient => {
            run_accelerated(model, &cfg, Momentum::Zero, Restart::Never, observer, warnings)
        }
        Method::DouglasRachford => run_douglas_rachford(model, &cfg, observer, warnings),
        Method::Pdhg => run_pdhg(model, &cfg, observer, warnings),
    }
}

fn with_method(cfg: &SolverConfig, method: Method) -> SolverConfig {
    SolverConfig {
        method,
        ..cfg.clone()
    }
}

/// Plain FISTA on the dual.
pub fn solve_fista(model: &DualModel, cfg: &SolverConfig) -> Result<SolverResult> {
    solve(model, &with_method(cfg, Method::Fista))
}

/// FISTA with adaptive restart.
pub fn solve_rfista(model: &DualModel, cfg: &SolverConfig) -> Result<SolverResult> {
    solve(model, &with_method(cfg, Method::Rfista))
}

/// FISTA restarted every `restart_period` iterations.
pub fn solve_fista_fixed_restart(model: &DualModel, cfg: &SolverConfig) -> Result<SolverResult> {
    solve(model, &with_method(cfg, Method::FistaFixedRestart))
}

/// FISTA with constant momentum `(sqrt(kappa) - 1) / (sqrt(kappa) + 1)`.
pub fn solve_vfista(model: &DualModel, cfg: &SolverConfig) -> Result<SolverResult> {
    solve(model, &with_method(cfg, Method::Vfista))
}

pub fn solve_projected_gradient(model: &DualModel, cfg: &SolverConfig) -> Result<SolverResult> {
    solve(model, &with_method(cfg, Method::ProjectedGradient))
}

pub fn solve_douglas_rachford(model: &DualModel, cfg: &SolverConfig) -> Result<SolverResult> {
    solve(model, &with_method(cfg, Method::DouglasRachford))
}

/// Accelerated primal-dual hybrid gradient on the saddle-point form.
pub fn solve_pdhg_accel(model: &DualModel, cfg: &SolverConfig) -> Result<SolverResult> {
    solve(model, &with_method(cfg, Method::Pdhg))
}

fn run_accelerated(
    model: &DualModel,
    cfg: &SolverConfig,
    momentum: Momentum,
    restart: Restart,
    observer: Option<Observer<'_>>,
    warnings: Vec<String>,
) -> Result<SolverResult> {
    let step = cfg.step.expect("resolved");
    let c = model.num_constraints();
    let mut u = DVector::zeros(c);
    let mut y = u.clone();
    let mut t = 1.0;
    let mut mon = Monitor::new(model, cfg, model.recover_unchecked(&u), observer);
    let mut k = 0;
    loop {
        k += 1;
        let grad_y = model.grad_unchecked(&y);
        let u_new = prox_hstar(&(&y - &grad_y * step));
        let mut t_new = next_t(t);
        let beta = match momentum {
            Momentum::Nesterov => (t - 1.0) / t_new,
            Momentum::Constant(b) => b,
            Momentum::Zero => 0.0,
        };
        let delta = &u_new - &u;
        let restarted = match restart {
            Restart::Never => false,
            Restart::Adaptive(RestartRule::FunctionValue) => model.gstar_difference_unchecked(&u, &u_new) > 0.0,
            Restart::Adaptive(RestartRule::GradientMapping) => grad_y.dot(&delta) > 0.0,
            Restart::Every(p) => k % p == 0,
        };
        if restarted {
            t_new = 1.0;
            y.copy_from(&u_new);
        } else if beta == 0.0 {
            y.copy_from(&u_new);
        } else {
            y = &u_new + delta * beta;
        }
        u = u_new;
        t = t_new;
        if let Verdict::Stop(status) = mon.step(k, &u, None, restarted)? {
            return Ok(mon.finish(k, status, u, None, warnings));
        }
    }
}

fn run_douglas_rachford(
    model: &DualModel,
    cfg: &SolverConfig,
    observer: Option<Observer<'_>>,
    warnings: Vec<String>,
) -> Result<SolverResult> {
    let gamma = cfg.dr_gamma.expect("resolved");
    let lambda = cfg.dr_lambda;
    let c = model.num_constraints();
    let mut p: DVector<f64> = DVector::zeros(c);
    let mut mon = Monitor::new(model, cfg, model.recover_unchecked(&p), observer);
    let mut k = 0;
    loop {
        k += 1;
        // R_h(p) = 2 min(p, 0) - p
        let r_h = p.map(|v| 2.0 * v.min(0.0) - v);
        let r_g = model.prox_gstar_unchecked(&r_h, gamma) * 2.0 - &r_h;
        p = p * (1.0 - lambda / 2.0) + r_g * (lambda / 2.0);
        let u = prox_hstar(&p);
        if let Verdict::Stop(status) = mon.step(k, &u, None, false)? {
            return Ok(mon.finish(k, status, u, None, warnings));
        }
    }
}

fn run_pdhg(
    model: &DualModel,
    cfg: &SolverConfig,
    observer: Option<Observer<'_>>,
    warnings: Vec<String>,
) -> Result<SolverResult> {
    let mu = cfg.pdhg_mu.expect("resolved");
    let mut tau = cfg.pdhg_tau0.expect("resolved");
    let mut eta = cfg.pdhg_eta0.expect("resolved");
    let b_mat = model.constraint_matrix();
    let b = model.shifted_rhs();
    let mut u: DVector<f64> = DVector::zeros(model.num_constraints());
    let mut c = model.recover_unchecked(&u);
    let mut c_bar = c.clone();
    let mut mon = Monitor::new(model, cfg, c.clone(), observer);
    let mut k = 0;
    loop {
        k += 1;
        let residual = b_mat * &c_bar - b;
        u = prox_hstar(&(u + residual * tau));
        let c_new = model.prox_g_unchecked(&(&c - b_mat.tr_mul(&u) * eta), eta);
        let theta = pdhg_theta(mu, eta);
        eta *= theta;
        tau /= theta;
        c_bar = &c_new + (&c_new - &c) * theta;
        c = c_new;
        if let Verdict::Stop(status) = mon.step(k, &u, Some(&c), false)? {
            return Ok(mon.finish(k, status, u, Some(c), warnings));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{assemble_dual, ApproximationProblem, ConstraintSet};
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// K = 12, N = 5, C = 4 with B of full row rank, so lambda_min(M) > 0.
    /// About half the constraints are active at the optimum.
    fn instance(seed: u64) -> DualModel {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = |r: usize, c: usize| DMatrix::from_fn(r, c, |_, _| rng.random_range(-1.0..=1.0));
        let psi = draw(12, 5);
        let f = draw(12, 1).column(0).into_owned();
        let b_mat = draw(4, 5);
        let offsets = draw(4, 1).column(0).into_owned();
        let prob = ApproximationProblem::new(psi, f, 2.0).unwrap();
        let tmp = ConstraintSet::new(b_mat.clone(), DVector::zeros(4)).unwrap();
        let c_ls = assemble_dual(&prob, &tmp, None).unwrap().unconstrained_solution();
        let rhs = &b_mat * c_ls + offsets * 0.5;
        let cons = ConstraintSet::new(b_mat, rhs).unwrap();
        assemble_dual(&prob, &cons, None).unwrap()
    }

    fn inactive() -> DualModel {
        let prob = ApproximationProblem::new(
            DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]),
            DVector::from_vec(vec![1.0, 2.0, 3.0]),
            1.0,
        )
        .unwrap();
        let cons = ConstraintSet::new(DMatrix::identity(2, 2), DVector::from_element(2, -1e6)).unwrap();
        assemble_dual(&prob, &cons, None).unwrap()
    }

    fn collect(model: &DualModel, cfg: &SolverConfig) -> (SolverResult, Vec<DVector<f64>>) {
        let mut snaps = Vec::new();
        let mut obs = |_k: usize, c: &DVector<f64>| snaps.push(c.clone());
        let res = solve_observed(model, cfg, Some(&mut obs)).unwrap();
        (res, snaps)
    }

    fn run(model: &DualModel, method: Method) -> SolverResult {
        let mut cfg = SolverConfig::with_method(method);
        if method == Method::Pdhg {
            // O(1/k^2) only; a 1e-14 primal change would take ~1e6 steps
            cfg.max_iter = 20_000;
        }
        solve(model, &cfg).unwrap()
    }

    #[test]
    fn formula_values() {
        assert!((next_t(1.0) - 1.618_034).abs() < 1e-6);
        assert_eq!(default_restart_period(4.0), 5);
        assert_eq!(vfista_momentum(9.0), 0.5);
        assert_eq!(vfista_momentum(1.0), 0.0);
        // mu * eta = 0.375
        assert!((pdhg_theta(0.375, 1.0) - 0.755_929).abs() < 1e-6);
        for (mu, eta) in [(1e-6, 1.0), (1.0, 1.0), (100.0, 0.3)] {
            let th = pdhg_theta(mu, eta);
            assert!(th > 0.0 && th < 1.0);
            assert!(eta * th < eta && eta / th > eta);
        }
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!("nesterov".parse::<Method>().is_err());
    }

    #[test]
    fn invalid_configs() {
        let model = instance(1);
        let cases = [
            SolverConfig {
                step: Some(-1.0),
                ..Default::default()
            },
            SolverConfig {
                dr_lambda: 2.5,
                ..Default::default()
            },
            SolverConfig {
                restart_period: Some(0),
                ..Default::default()
            },
            SolverConfig {
                primal_check_interval: 0,
                ..Default::default()
            },
            SolverConfig {
                method: Method::Pdhg,
                pdhg_tau0: Some(10.0),
                pdhg_eta0: Some(10.0),
                ..Default::default()
            },
            SolverConfig {
                method: Method::Pdhg,
                pdhg_mu: Some(0.0),
                ..Default::default()
            },
        ];
        for cfg in cases {
            assert!(matches!(solve(&model, &cfg), Err(Error::SolverConfig(_))), "{cfg:?}");
        }
    }

    #[test]
    fn singular_dual_refuses_kappa_methods() {
        // three constraints on a two-dimensional coefficient space
        let prob = ApproximationProblem::new(DMatrix::identity(2, 2), DVector::from_vec(vec![1.0, -1.0]), 1.0).unwrap();
        let b = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let model = assemble_dual(&prob, &ConstraintSet::new(b, DVector::zeros(3)).unwrap(), None).unwrap();
        assert!(model.condition_number().is_none());
        for cfg in [
            SolverConfig::with_method(Method::Vfista),
            SolverConfig::with_method(Method::FistaFixedRestart),
            SolverConfig {
                method: Method::DouglasRachford,
                dr_lambda: 2.0,
                ..Default::default()
            },
        ] {
            assert!(matches!(solve(&model, &cfg), Err(Error::SolverConfig(_))));
        }
        // an explicit period is fine
        let cfg = SolverConfig {
            method: Method::FistaFixedRestart,
            restart_period: Some(10),
            ..Default::default()
        };
        let res = solve(&model, &cfg).unwrap();
        assert_eq!(res.status, Status::Converged);
        // c* = (1, 0): projection of (1, -1) onto y >= 0, x + y >= 0
        assert!((res.c_star[0] - 1.0).abs() < 1e-10 && res.c_star[1].abs() < 1e-10);
    }

    #[test]
    fn inactive_constraints_give_least_squares() {
        let model = inactive();
        let c_ls = model.unconstrained_solution();
        for m in Method::ALL {
            let res = run(&model, m);
            assert_eq!(res.status, Status::Converged, "{m}");
            assert!((&res.c_star - &c_ls).amax() < 1e-10, "{m}");
            if m != Method::Pdhg {
                assert_eq!(res.u_star.amax(), 0.0, "{m}");
            }
        }
    }

    #[test]
    fn all_methods_agree_with_rfista() {
        for seed in 0..3 {
            let model = instance(seed);
            let reference = run(&model, Method::Rfista);
            assert_eq!(reference.status, Status::Converged);
            for m in Method::ALL {
                let res = run(&model, m);
                assert!((&res.c_star - &reference.c_star).amax() < 1e-6, "seed {seed} {m}");
                assert!(res.u_star.iter().all(|&v| v <= 0.0));
                if res.status == Status::Converged {
                    assert_eq!(model.max_violation(&res.c_star), 0.0, "seed {seed} {m}");
                }
            }
        }
    }

    #[test]
    fn fixed_restart_period_one_is_projected_gradient() {
        let model = instance(4);
        let base = SolverConfig {
            max_iter: 300,
            fixed_iterations: true,
            ..Default::default()
        };
        let (_, a) = collect(
            &model,
            &SolverConfig {
                method: Method::FistaFixedRestart,
                restart_period: Some(1),
                ..base.clone()
            },
        );
        let (_, b) = collect(
            &model,
            &SolverConfig {
                method: Method::ProjectedGradient,
                ..base
            },
        );
        assert_eq!(a.len(), 300);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).amax() <= 1e-12);
        }
    }

    #[test]
    fn rfista_matches_fista_until_first_restart() {
        let model = instance(5);
        let base = SolverConfig {
            max_iter: 200,
            fixed_iterations: true,
            ..Default::default()
        };
        let (r, a) = collect(&model, &SolverConfig::with_method(Method::Rfista).tap(&base));
        let (_, b) = collect(&model, &SolverConfig::with_method(Method::Fista).tap(&base));
        let first = r.trace.restarts().next().map_or(200, |rec| rec.k);
        for k in 0..first {
            assert_eq!(a[k], b[k], "iteration {}", k + 1);
        }
    }

    impl SolverConfig {
        fn tap(mut self, base: &SolverConfig) -> SolverConfig {
            self.max_iter = base.max_iter;
            self.fixed_iterations = base.fixed_iterations;
            self
        }
    }

    #[test]
    fn vfista_beats_fista_when_well_conditioned() {
        let model = instance(6);
        let kappa = model.condition_number().unwrap();
        assert!(kappa.is_finite());
        let reference = run(&model, Method::Rfista).c_star;
        let first_hit = |m: Method| {
            let cfg = SolverConfig {
                method: m,
                max_iter: 20_000,
                fixed_iterations: true,
                ..Default::default()
            };
            let (_, snaps) = collect(&model, &cfg);
            snaps.iter().position(|c| (c - &reference).norm() <= 1e-10).unwrap()
        };
        assert!(first_hit(Method::Vfista) < first_hit(Method::Fista));
    }

    #[test]
    fn projected_gradient_descends_and_is_stationary() {
        let model = instance(7);
        let res = run(&model, Method::ProjectedGradient);
        for w in res.trace.records.windows(2) {
            let slack = 1e-12 * (1.0 + w[0].dual_objective.abs());
            assert!(w[1].dual_objective <= w[0].dual_objective + slack);
        }
        let star = run(&model, Method::Rfista);
        let step = star.config.step.unwrap();
        let next = prox_hstar(&(&star.u_star - model.grad_gstar(&star.u_star).unwrap() * step));
        assert!((next - &star.u_star).norm() < 1e-10);
    }

    #[test]
    fn restart_only_on_objective_increase() {
        let model = instance(8);
        let res = run(&model, Method::Rfista);
        let recs = &res.trace.records;
        for (i, r) in recs.iter().enumerate().skip(1) {
            if r.restarted {
                let prev = recs[i - 1].dual_objective;
                assert!(r.dual_objective >= prev - 1e-12 * (1.0 + prev.abs()));
            }
        }
    }

    #[test]
    fn fixed_restart_default_period() {
        let model = instance(9);
        let kappa = model.condition_number().unwrap();
        let res = run(&model, Method::FistaFixedRestart);
        let p = res.config.restart_period.unwrap();
        assert_eq!(p, default_restart_period(kappa));
        assert!(res.trace.restarts().all(|r| r.k % p == 0));
    }

    #[test]
    fn stopping_needs_both_criteria() {
        let model = instance(10);
        let res = run(&model, Method::Fista);
        assert_eq!(res.status, Status::Converged);
        let tol = res.config.primal_change_tol;
        let (last, earlier) = res.trace.records.split_last().unwrap();
        assert!(last.primal_change <= tol && last.max_violation == 0.0);
        for r in earlier {
            assert!(r.primal_change > tol || r.max_violation > 0.0, "k = {}", r.k);
        }
    }

    #[test]
    fn check_interval_limits_recoveries() {
        let model = instance(11);
        let cfg = SolverConfig {
            primal_check_interval: 10,
            ..Default::default()
        };
        let res = solve(&model, &cfg).unwrap();
        assert_eq!(res.status, Status::Converged);
        assert!(res.trace.primal_checks <= res.iterations.div_ceil(10));
        assert_eq!(res.iterations % 10, 0);
    }

    #[test]
    fn stall_and_max_iter() {
        let model = instance(12);
        // an unreachable tolerance can only end in a stall
        let cfg = SolverConfig {
            primal_change_tol: -1.0,
            stall_checks: 20,
            ..Default::default()
        };
        assert_eq!(solve(&model, &cfg).unwrap().status, Status::Stalled);
        let cfg = SolverConfig {
            max_iter: 3,
            ..Default::default()
        };
        let res = solve(&model, &cfg).unwrap();
        assert_eq!((res.status, res.iterations), (Status::MaxIter, 3));
    }

    #[test]
    fn divergence_is_reported() {
        let model = instance(13);
        let cfg = SolverConfig {
            method: Method::Fista,
            step: Some(1e200),
            ..Default::default()
        };
        match solve(&model, &cfg) {
            Err(Error::Divergence { method, trace, .. }) => {
                assert_eq!(method, "fista");
                assert!(!trace.records.is_empty());
            }
            other => panic!("expected divergence, got {:?}", other.map(|r| r.status)),
        }
    }

    #[test]
    fn oversized_step_warns() {
        let model = instance(14);
        let cfg = SolverConfig {
            step: Some(1.5 * model.default_step().unwrap()),
            max_iter: 50,
            ..Default::default()
        };
        assert_eq!(solve(&model, &cfg).unwrap().warnings.len(), 1);
    }

    #[test]
    fn traces_are_deterministic() {
        let model = instance(15);
        for m in [Method::Rfista, Method::DouglasRachford, Method::Pdhg] {
            let a = run(&model, m).trace.to_csv();
            let b = run(&model, m).trace.to_csv();
            assert_eq!(a, b);
            assert!(a.starts_with(TRACE_HEADER));
        }
    }

    #[test]
    fn trace_every_thins_records() {
        let model = instance(16);
        let cfg = SolverConfig {
            trace_every: 7,
            ..Default::default()
        };
        let res = solve(&model, &cfg).unwrap();
        let recs = &res.trace.records;
        assert!(recs.windows(2).all(|w| w[0].k < w[1].k));
        assert_eq!(recs.last().unwrap().k, res.iterations);
        assert!(recs.iter().all(|r| r.k % 7 == 0 || r.restarted || r.k == res.iterations));
    }
}
