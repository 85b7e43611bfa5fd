//! Joint tri-factorization of an interaction matrix `A ≈ U Hu Uᵀ` and an
//! engagement matrix `C ≈ U Hs Vᵀ` with soft orthogonality on `U`, `V` and
//! Laplacian smoothness penalties on both factor matrices.
//!
//! Every factor is updated with a square-root multiplicative rule
//! `F ← F ∘ sqrt(num / den)`. The orthogonality multipliers `λ` can be of
//! either sign; their positive part goes to the denominator and the
//! magnitude of the negative part to the numerator, which keeps every
//! ratio non-negative and leaves fixed points unchanged.
//!
//! Either data term may be absent. The baselines reuse this core: symmetric
//! NMF is the `A`-only problem, ONMTF/DMCC the `C`-only problem.

use log::warn;
use ndarray::{Array1, Array2, ArrayView2, Zip};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{EngagementMatrix, InteractionMatrix};
use crate::error::{Error, Result};
use crate::graph::{affinity_cols, affinity_rows, laplacian, AffinityMatrix};

/// Solver hyper-parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub k: usize,
    pub alpha: f64,
    pub beta: f64,
    pub max_iters: usize,
    pub rel_tol: f64,
    pub seed: u64,
    pub eps: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            k: 2,
            alpha: 0.0,
            beta: 0.0,
            max_iters: 500,
            rel_tol: 1e-6,
            seed: 0,
            eps: 1e-12,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if self.k == 0 {
            return bad("k must be at least 1");
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return bad("alpha must be finite and >= 0");
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return bad("beta must be finite and >= 0");
        }
        if self.max_iters == 0 {
            return bad("max_iters must be at least 1");
        }
        if !(self.rel_tol > 0.0) {
            return bad("rel_tol must be > 0");
        }
        if !(self.eps > 0.0) {
            return bad("eps must be > 0");
        }
        Ok(())
    }
}

/// Latent factors: user factor `U` (n×k), source factor `V` (m×k) and the
/// two k×k association matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorSet {
    pub u: Array2<f64>,
    pub v: Array2<f64>,
    pub hu: Array2<f64>,
    pub hs: Array2<f64>,
}

impl FactorSet {
    pub fn k(&self) -> usize {
        self.hu.nrows()
    }

    pub fn n(&self) -> usize {
        self.u.nrows()
    }

    pub fn m(&self) -> usize {
        self.v.nrows()
    }

    /// Smallest entry across all four factors.
    pub fn min_entry(&self) -> f64 {
        [&self.u, &self.v, &self.hu, &self.hs]
            .iter()
            .flat_map(|m| m.iter().copied())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn all_finite(&self) -> bool {
        [&self.u, &self.v, &self.hu, &self.hs]
            .iter()
            .all(|m| m.iter().all(|x| x.is_finite()))
    }

    /// Swaps latent dimensions `i` and `j` consistently in all factors.
    pub fn swap_axes(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for f in [&mut self.u, &mut self.v] {
            for mut row in f.rows_mut() {
                row.swap(i, j);
            }
        }
        for h in [&mut self.hu, &mut self.hs] {
            for mut row in h.rows_mut() {
                row.swap(i, j);
            }
            for mut col in h.columns_mut() {
                col.swap(i, j);
            }
        }
    }
}

/// Uniform[0,1) `U` and `V` drawn from the seeded stream (U first, row
/// major), identity `Hu` and `Hs`.
pub fn init_factors(n: usize, m: usize, config: &SolverConfig) -> FactorSet {
    let k = config.k;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let u = Array2::from_shape_fn((n, k), |_| rng.random::<f64>());
    let v = Array2::from_shape_fn((m, k), |_| rng.random::<f64>());
    FactorSet {
        u,
        v,
        hu: Array2::eye(k),
        hs: Array2::eye(k),
    }
}

/// A weighted Laplacian smoothness penalty `weight · tr(Fᵀ L F)` with
/// `L = D − S`.
#[derive(Debug, Clone)]
pub struct GraphPenalty {
    pub weight: f64,
    pub affinity: Array2<f64>,
    pub degree: Array1<f64>,
    pub laplacian: Array2<f64>,
}

impl GraphPenalty {
    pub fn new(affinity: &AffinityMatrix, weight: f64) -> Result<Self> {
        let lap = laplacian(affinity.entries().view())?;
        Ok(GraphPenalty {
            weight,
            affinity: affinity.entries().clone(),
            degree: lap.degree().clone(),
            laplacian: lap.entries().clone(),
        })
    }

    fn active(&self) -> bool {
        self.weight > 0.0
    }

    // D·F for diagonal D
    fn degree_times(&self, f: &Array2<f64>) -> Array2<f64> {
        let mut out = f.clone();
        for (mut row, &d) in out.rows_mut().into_iter().zip(self.degree.iter()) {
            row *= d;
        }
        out
    }
}

/// The data and penalties of one factorization problem.
#[derive(Debug, Clone, Copy, Default)]
pub struct Problem<'a> {
    /// n×n interaction matrix, fitted as `U Hu Uᵀ`.
    pub a: Option<ArrayView2<'a, f64>>,
    /// n×m engagement matrix, fitted as `U Hs Vᵀ`.
    pub c: Option<ArrayView2<'a, f64>>,
    pub user_penalty: Option<&'a GraphPenalty>,
    pub source_penalty: Option<&'a GraphPenalty>,
}

impl<'a> Problem<'a> {
    fn user_reg(&self) -> Option<&'a GraphPenalty> {
        self.user_penalty.filter(|p| p.active())
    }

    fn source_reg(&self) -> Option<&'a GraphPenalty> {
        self.source_penalty.filter(|p| p.active())
    }

    fn check_shapes(&self, f: &FactorSet) -> Result<()> {
        let (n, m, k) = (f.n(), f.m(), f.k());
        let mismatch = |what: String| Err(Error::DimensionMismatch(what));
        if f.u.ncols() != k || f.v.ncols() != k || f.hs.dim() != (k, k) || f.hu.dim() != (k, k) {
            return mismatch(format!("inconsistent latent dimension k={k}"));
        }
        if let Some(a) = self.a {
            if a.dim() != (n, n) {
                return mismatch(format!("A is {:?}, expected {n}x{n}", a.dim()));
            }
        }
        if let Some(c) = self.c {
            if c.dim() != (n, m) {
                return mismatch(format!("C is {:?}, expected {n}x{m}", c.dim()));
            }
        }
        if let Some(p) = self.user_penalty {
            if p.degree.len() != n {
                return mismatch(format!("user affinity has size {}, expected {n}", p.degree.len()));
            }
        }
        if let Some(p) = self.source_penalty {
            if p.degree.len() != m {
                return mismatch(format!("source affinity has size {}, expected {m}", p.degree.len()));
            }
        }
        Ok(())
    }
}

/// The four objective terms, unweighted reconstruction plus weighted penalties.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ObjectiveTerms {
    pub interaction: f64,
    pub engagement: f64,
    pub user_smoothness: f64,
    pub source_smoothness: f64,
}

impl ObjectiveTerms {
    pub fn total(&self) -> f64 {
        self.interaction + self.engagement + self.user_smoothness + self.source_smoothness
    }
}

fn frobenius_sq_residual(x: ArrayView2<f64>, approx: &Array2<f64>) -> f64 {
    Zip::from(x)
        .and(approx)
        .fold(0.0, |acc, &a, &b| acc + (a - b) * (a - b))
}

/// `‖A − U Hu Uᵀ‖² + ‖C − U Hs Vᵀ‖² + α tr(UᵀL_uU) + β tr(VᵀL_sV)`, absent
/// terms counted as zero.
pub fn objective(problem: &Problem<'_>, f: &FactorSet) -> ObjectiveTerms {
    let mut terms = ObjectiveTerms::default();
    if let Some(a) = problem.a {
        let approx = f.u.dot(&f.hu).dot(&f.u.t());
        terms.interaction = frobenius_sq_residual(a, &approx);
    }
    if let Some(c) = problem.c {
        let approx = f.u.dot(&f.hs).dot(&f.v.t());
        terms.engagement = frobenius_sq_residual(c, &approx);
    }
    if let Some(p) = problem.user_reg() {
        terms.user_smoothness = p.weight * (&f.u * &p.laplacian.dot(&f.u)).sum();
    }
    if let Some(p) = problem.source_reg() {
        terms.source_smoothness = p.weight * (&f.v * &p.laplacian.dot(&f.v)).sum();
    }
    terms
}

/// Splits `λ` into entrywise non-negative parts with `λ = pos − neg`.
fn split_sign(lambda: &Array2<f64>) -> (Array2<f64>, Array2<f64>) {
    (lambda.mapv(|x| x.max(0.0)), lambda.mapv(|x| (-x).max(0.0)))
}

fn apply_ratio(
    base: &Array2<f64>,
    num: &Array2<f64>,
    den: &Array2<f64>,
    eps: f64,
    factor: &'static str,
    iteration: usize,
) -> Result<Array2<f64>> {
    let mut out = base.clone();
    Zip::from(&mut out)
        .and(num)
        .and(den)
        .for_each(|x, &n, &d| *x *= (n.max(0.0) / d.max(eps)).sqrt());
    if out.iter().all(|x| x.is_finite()) {
        Ok(out)
    } else {
        Err(Error::NumericAbort { factor, iteration })
    }
}

/// One multiplicative step for `U`.
///
/// `num = A U Huᵀ + C V Hsᵀ + α S_u U + U λ⁻`,
/// `den = U Hu UᵀU Huᵀ + U Hs VᵀV Hsᵀ + α D_u U + U λ⁺`, with
/// `λ = UᵀA U Huᵀ + UᵀC V Hsᵀ − α UᵀL_u U − Hu UᵀU Huᵀ − Hs VᵀV Hsᵀ`.
pub fn update_u(problem: &Problem<'_>, f: &FactorSet, eps: f64, iteration: usize) -> Result<Array2<f64>> {
    let u = &f.u;
    let (n, k) = u.dim();
    let utu = u.t().dot(u);
    let mut num = Array2::<f64>::zeros((n, k));
    let mut den = Array2::<f64>::zeros((n, k));
    let mut lambda = Array2::<f64>::zeros((k, k));

    if let Some(a) = problem.a {
        let au_hut = a.dot(u).dot(&f.hu.t());
        let hu_utu_hut = f.hu.dot(&utu).dot(&f.hu.t());
        lambda += &u.t().dot(&au_hut);
        lambda -= &hu_utu_hut;
        den += &u.dot(&hu_utu_hut);
        num += &au_hut;
    }
    if let Some(c) = problem.c {
        let cv_hst = c.dot(&f.v).dot(&f.hs.t());
        let hs_vtv_hst = f.hs.dot(&f.v.t().dot(&f.v)).dot(&f.hs.t());
        lambda += &u.t().dot(&cv_hst);
        lambda -= &hs_vtv_hst;
        den += &u.dot(&hs_vtv_hst);
        num += &cv_hst;
    }
    if let Some(p) = problem.user_reg() {
        num += &(p.affinity.dot(u) * p.weight);
        den += &(p.degree_times(u) * p.weight);
        lambda -= &(u.t().dot(&p.laplacian.dot(u)) * p.weight);
    }
    let (pos, neg) = split_sign(&lambda);
    num += &u.dot(&neg);
    den += &u.dot(&pos);
    apply_ratio(u, &num, &den, eps, "U", iteration)
}

/// One multiplicative step for `V`.
///
/// `num = Cᵀ U Hs + β S_s V + V λ⁻`, `den = β D_s V + V Hs UᵀU Hs + V λ⁺`,
/// `λ = VᵀCᵀ U Hs − β VᵀL_s V − Hs UᵀU Hs`.
pub fn update_v(problem: &Problem<'_>, f: &FactorSet, eps: f64, iteration: usize) -> Result<Array2<f64>> {
    let v = &f.v;
    let Some(c) = problem.c else {
        return Ok(v.clone());
    };
    let (m, k) = v.dim();
    let mut num = Array2::<f64>::zeros((m, k));
    let mut den = Array2::<f64>::zeros((m, k));

    let ctu_hs = c.t().dot(&f.u).dot(&f.hs);
    let hs_utu_hs = f.hs.dot(&f.u.t().dot(&f.u)).dot(&f.hs);
    let mut lambda = v.t().dot(&ctu_hs) - &hs_utu_hs;
    num += &ctu_hs;
    den += &v.dot(&hs_utu_hs);
    if let Some(p) = problem.source_reg() {
        num += &(p.affinity.dot(v) * p.weight);
        den += &(p.degree_times(v) * p.weight);
        lambda -= &(v.t().dot(&p.laplacian.dot(v)) * p.weight);
    }
    let (pos, neg) = split_sign(&lambda);
    num += &v.dot(&neg);
    den += &v.dot(&pos);
    apply_ratio(v, &num, &den, eps, "V", iteration)
}

/// `Hu ← Hu ∘ sqrt(UᵀA U / UᵀU Hu UᵀU)`.
pub fn update_hu(problem: &Problem<'_>, f: &FactorSet, eps: f64, iteration: usize) -> Result<Array2<f64>> {
    let Some(a) = problem.a else {
        return Ok(f.hu.clone());
    };
    let utu = f.u.t().dot(&f.u);
    let num = f.u.t().dot(&a.dot(&f.u));
    let den = utu.dot(&f.hu).dot(&utu);
    apply_ratio(&f.hu, &num, &den, eps, "Hu", iteration)
}

/// `Hs ← Hs ∘ sqrt(UᵀC V / UᵀU Hs VᵀV)`.
pub fn update_hs(problem: &Problem<'_>, f: &FactorSet, eps: f64, iteration: usize) -> Result<Array2<f64>> {
    let Some(c) = problem.c else {
        return Ok(f.hs.clone());
    };
    let num = f.u.t().dot(&c.dot(&f.v));
    let den = f.u.t().dot(&f.u).dot(&f.hs).dot(&f.v.t().dot(&f.v));
    apply_ratio(&f.hs, &num, &den, eps, "Hs", iteration)
}

/// Convergence bookkeeping for one fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    /// Objective before the first update followed by one value per iteration.
    pub objective_trace: Vec<f64>,
    pub iterations_run: usize,
    pub converged: bool,
    pub final_objective: f64,
    pub term_breakdown: ObjectiveTerms,
}

/// Runs the update loop U → V → Hu → Hs from `init` until the relative
/// objective change drops below `rel_tol` or `max_iters` is reached.
pub fn run_updates(
    problem: &Problem<'_>,
    init: FactorSet,
    max_iters: usize,
    rel_tol: f64,
    eps: f64,
) -> Result<(FactorSet, FitReport)> {
    problem.check_shapes(&init)?;
    let mut f = init;
    let mut terms = objective(problem, &f);
    let mut trace = vec![terms.total()];
    let mut converged = false;
    let mut iterations = 0;

    for it in 1..=max_iters {
        f.u = update_u(problem, &f, eps, it)?;
        f.v = update_v(problem, &f, eps, it)?;
        f.hu = update_hu(problem, &f, eps, it)?;
        f.hs = update_hs(problem, &f, eps, it)?;
        iterations = it;

        terms = objective(problem, &f);
        let obj = terms.total();
        if !obj.is_finite() {
            return Err(Error::NumericAbort {
                factor: "objective",
                iteration: it,
            });
        }
        let prev = trace[trace.len() - 1];
        trace.push(obj);
        if obj > prev * 1.01 {
            warn!("objective rose from {prev:e} to {obj:e} at iteration {it}");
        }
        if (obj - prev).abs() / prev.max(eps) < rel_tol {
            converged = true;
            break;
        }
    }
    let report = FitReport {
        final_objective: trace[trace.len() - 1],
        objective_trace: trace,
        iterations_run: iterations,
        converged,
        term_breakdown: terms,
    };
    Ok((f, report))
}

/// Fits the joint problem on dense views, with user and source affinities
/// taken from the rows and columns of `C`.
pub fn fit_dense(
    a: ArrayView2<'_, f64>,
    c: ArrayView2<'_, f64>,
    config: &SolverConfig,
) -> Result<(FactorSet, FitReport)> {
    let su = affinity_rows(c);
    let ss = affinity_cols(c);
    fit_dense_with_affinities(a, c, &su, &ss, config)
}

/// As [`fit_dense`] with caller-supplied affinities.
pub fn fit_dense_with_affinities(
    a: ArrayView2<'_, f64>,
    c: ArrayView2<'_, f64>,
    user_affinity: &AffinityMatrix,
    source_affinity: &AffinityMatrix,
    config: &SolverConfig,
) -> Result<(FactorSet, FitReport)> {
    config.validate()?;
    let (n, m) = c.dim();
    if a.dim() != (n, n) {
        return Err(Error::DimensionMismatch(format!(
            "A is {:?} but C has {n} rows",
            a.dim()
        )));
    }
    if user_affinity.size() != n || source_affinity.size() != m {
        return Err(Error::DimensionMismatch(format!(
            "affinities are {}x{} / {}x{} for n={n}, m={m}",
            user_affinity.size(),
            user_affinity.size(),
            source_affinity.size(),
            source_affinity.size()
        )));
    }
    let up = GraphPenalty::new(user_affinity, config.alpha)?;
    let sp = GraphPenalty::new(source_affinity, config.beta)?;
    let problem = Problem {
        a: Some(a),
        c: Some(c),
        user_penalty: Some(&up),
        source_penalty: Some(&sp),
    };
    let init = init_factors(n, m, config);
    run_updates(&problem, init, config.max_iters, config.rel_tol, config.eps)
}

/// Fits the joint problem on `A` and `C`. Users must be aligned.
pub fn fit(
    a: &InteractionMatrix,
    c: &EngagementMatrix,
    config: &SolverConfig,
) -> Result<(FactorSet, FitReport)> {
    if a.users().ids() != c.users().ids() {
        return Err(Error::DimensionMismatch(format!(
            "A has {} users and C has {}; user order must match",
            a.n(),
            c.n()
        )));
    }
    fit_dense(a.entries().view(), c.entries().view(), config)
}

/// `‖FᵀF − diag(FᵀF)‖_F / ‖FᵀF‖_F`, zero for orthogonal columns.
pub fn off_diagonal_ratio(f: ArrayView2<'_, f64>) -> f64 {
    let g = f.t().dot(&f);
    let total = g.iter().map(|x| x * x).sum::<f64>();
    if total == 0.0 {
        return 0.0;
    }
    let diag = g.diag().iter().map(|x| x * x).sum::<f64>();
    ((total - diag).max(0.0) / total).sqrt()
}
