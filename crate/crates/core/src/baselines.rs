//! Comparison factorizations built on the same multiplicative core as the
//! joint solver: symmetric NMF, ONMTF co-clustering, dual-manifold
//! co-clustering (DMCC) and the joint model without graph penalties.

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::data::{EngagementMatrix, InteractionMatrix};
use crate::error::{Error, Result};
use crate::graph::{affinity_cols, affinity_rows, check_symmetric};
use crate::solver::{self, FitReport, GraphPenalty, Problem, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Ifd,
    IfdNgr,
    NmfSymm,
    Onmtf,
    Dmcc,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Ifd => "ifd",
            Method::IfdNgr => "ifd-ngr",
            Method::NmfSymm => "nmf-symm",
            Method::Onmtf => "onmtf",
            Method::Dmcc => "dmcc",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ifd" => Ok(Method::Ifd),
            "ifd-ngr" => Ok(Method::IfdNgr),
            "nmf-symm" => Ok(Method::NmfSymm),
            "onmtf" => Ok(Method::Onmtf),
            "dmcc" => Ok(Method::Dmcc),
            other => Err(Error::InvalidConfig(format!("unknown method `{other}`"))),
        }
    }
}

/// Factors of a single-view fit. `col_factors` is absent for symmetric NMF.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineResult {
    pub method: Method,
    pub row_factors: Array2<f64>,
    pub col_factors: Option<Array2<f64>>,
    pub mid_factor: Option<Array2<f64>>,
    pub objective_trace: Vec<f64>,
    pub report: FitReport,
}

fn with_k(config: &SolverConfig, k: usize) -> Result<SolverConfig> {
    let cfg = SolverConfig {
        k,
        ..config.clone()
    };
    cfg.validate()?;
    Ok(cfg)
}

fn check_non_negative(x: ArrayView2<'_, f64>) -> Result<()> {
    if x.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
        return Err(Error::InvalidInput("input matrix must be finite and non-negative".into()));
    }
    Ok(())
}

/// `X ≈ W H Wᵀ` for a symmetric non-negative `X`.
pub fn fit_nmf_symm(x: ArrayView2<'_, f64>, k: usize, config: &SolverConfig) -> Result<BaselineResult> {
    check_non_negative(x)?;
    check_symmetric(x)?;
    let cfg = with_k(config, k)?;
    let problem = Problem {
        a: Some(x),
        ..Problem::default()
    };
    let init = solver::init_factors(x.nrows(), 0, &cfg);
    let (f, report) = solver::run_updates(&problem, init, cfg.max_iters, cfg.rel_tol, cfg.eps)?;
    Ok(BaselineResult {
        method: Method::NmfSymm,
        row_factors: f.u,
        col_factors: None,
        mid_factor: Some(f.hu),
        objective_trace: report.objective_trace.clone(),
        report,
    })
}

/// Source–source relationship matrix `CᵀC` for symmetric NMF on sources,
/// with the diagonal kept.
pub fn source_cooccurrence(c: &EngagementMatrix) -> Array2<f64> {
    let x = c.entries();
    let mut g = x.t().dot(x);
    let m = g.nrows();
    for i in 0..m {
        for j in (i + 1)..m {
            let v = 0.5 * (g[[i, j]] + g[[j, i]]);
            g[[i, j]] = v;
            g[[j, i]] = v;
        }
    }
    g
}

fn fit_cocluster(
    x: ArrayView2<'_, f64>,
    k: usize,
    alpha: f64,
    beta: f64,
    config: &SolverConfig,
    method: Method,
) -> Result<BaselineResult> {
    check_non_negative(x)?;
    let cfg = with_k(config, k)?;
    let (p, q) = x.dim();
    let (row_pen, col_pen);
    let mut problem = Problem {
        c: Some(x),
        ..Problem::default()
    };
    if alpha > 0.0 || beta > 0.0 {
        row_pen = GraphPenalty::new(&affinity_rows(x), alpha)?;
        col_pen = GraphPenalty::new(&affinity_cols(x), beta)?;
        problem.user_penalty = Some(&row_pen);
        problem.source_penalty = Some(&col_pen);
    }
    let init = solver::init_factors(p, q, &cfg);
    let (f, report) = solver::run_updates(&problem, init, cfg.max_iters, cfg.rel_tol, cfg.eps)?;
    Ok(BaselineResult {
        method,
        row_factors: f.u,
        col_factors: Some(f.v),
        mid_factor: Some(f.hs),
        objective_trace: report.objective_trace.clone(),
        report,
    })
}

/// `X ≈ W H Zᵀ` with soft bi-orthogonality on `W` and `Z`.
pub fn fit_onmtf(x: ArrayView2<'_, f64>, k: usize, config: &SolverConfig) -> Result<BaselineResult> {
    fit_cocluster(x, k, 0.0, 0.0, config, Method::Onmtf)
}

/// ONMTF plus `α tr(WᵀL_wW) + β tr(ZᵀL_zZ)` with Laplacians of the row and
/// column cosine affinities of `X`.
pub fn fit_dmcc(
    x: ArrayView2<'_, f64>,
    k: usize,
    alpha: f64,
    beta: f64,
    config: &SolverConfig,
) -> Result<BaselineResult> {
    if !(alpha >= 0.0 && beta >= 0.0) {
        return Err(Error::InvalidConfig("alpha and beta must be >= 0".into()));
    }
    fit_cocluster(x, k, alpha, beta, config, Method::Dmcc)
}

/// The joint model with both graph penalties switched off.
pub fn fit_ifd_ngr(
    a: &InteractionMatrix,
    c: &EngagementMatrix,
    k: usize,
    config: &SolverConfig,
) -> Result<BaselineResult> {
    let cfg = SolverConfig {
        k,
        alpha: 0.0,
        beta: 0.0,
        ..config.clone()
    };
    let (f, report) = solver::fit(a, c, &cfg)?;
    Ok(BaselineResult {
        method: Method::IfdNgr,
        row_factors: f.u,
        col_factors: Some(f.v),
        mid_factor: Some(f.hs),
        objective_trace: report.objective_trace.clone(),
        report,
    })
}
