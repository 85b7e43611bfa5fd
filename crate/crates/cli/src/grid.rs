//! `gridsearch`: pick (alpha, beta) by validation purity.

use std::cmp::Ordering;

use ideofactor::io::{parse_truth, read_text};
use ideofactor::metrics::{evaluate, ScoreSeries};
use ideofactor::scoring::{hard_clusters, orient, score_all, ScoringOptions};
use ideofactor::solver::{fit, SolverConfig};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CliError, Context};
use crate::inputs::{load_inputs, Inputs};
use crate::views::Target;
use crate::GridArgs;

pub const THREADS_ENV: &str = "IDEOFACTOR_THREADS";

#[derive(Debug, Clone, Serialize)]
pub struct GridCell {
    pub alpha: f64,
    pub beta: f64,
    pub purity: Option<f64>,
    pub corr_i: Option<f64>,
    pub final_objective: Option<f64>,
    pub iterations: Option<usize>,
    /// Set when the fit diverged; such cells are never selected.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct GridReport {
    pub target: &'static str,
    pub best: GridCell,
    pub cells: Vec<GridCell>,
}

fn evaluate_cell(inputs: &Inputs, truth: &ScoreSeries, target: Target, threshold: f64, cfg: &SolverConfig) -> Result<GridCell, CliError> {
    let (a, c) = match (&inputs.a, &inputs.c) {
        (Some(a), Some(c)) => (a, c),
        _ => return Err(CliError::Usage("gridsearch needs --edges and --engagement".into())),
    };
    let (mut f, report) = match fit(a, c, cfg) {
        Ok(x) => x,
        Err(e @ ideofactor::Error::NumericAbort { .. }) => {
            log::warn!("alpha={} beta={}: {e}", cfg.alpha, cfg.beta);
            return Ok(GridCell {
                alpha: cfg.alpha,
                beta: cfg.beta,
                purity: None,
                corr_i: None,
                final_objective: None,
                iterations: None,
                failure: Some(e.to_string()),
            });
        }
        Err(e) => return Err(e).context(format!("fit alpha={} beta={}", cfg.alpha, cfg.beta)),
    };
    let users = inputs.users.ids();
    orient(&mut f, users, &inputs.sources, truth).context("orient")?;
    let (ids, factor) = match target {
        Target::Users => (users, &f.u),
        Target::Sources => (&inputs.sources[..], &f.v),
    };
    let labels = hard_clusters(factor.view());
    let ideology: Option<Vec<f64>> = if cfg.k == 2 {
        let (u, s) = score_all(&f, users, &inputs.sources, ScoringOptions::default()).context("score")?;
        let rows = if target == Target::Users { u } else { s };
        rows.iter().map(|e| e.ideology).collect()
    } else {
        None
    };
    // A cell whose scores have no variance still has a purity.
    let r = match evaluate("ifd", target.as_str(), ids, &labels, ideology.as_deref(), truth, threshold) {
        Err(ideofactor::Error::ZeroVariance { .. }) => evaluate("ifd", target.as_str(), ids, &labels, None, truth, threshold),
        other => other,
    }
    .context("evaluate")?;
    Ok(GridCell {
        alpha: cfg.alpha,
        beta: cfg.beta,
        purity: Some(r.purity),
        corr_i: r.corr_i,
        final_objective: Some(report.final_objective),
        iterations: Some(report.iterations_run),
        failure: None,
    })
}

/// Higher purity, then higher correlation, then smaller alpha + beta.
pub fn better(x: &GridCell, y: &GridCell) -> Ordering {
    let corr = |c: &GridCell| c.corr_i.unwrap_or(f64::NEG_INFINITY);
    let purity = |c: &GridCell| c.purity.unwrap_or(f64::NEG_INFINITY);
    purity(x)
        .total_cmp(&purity(y))
        .then(corr(x).total_cmp(&corr(y)))
        .then((y.alpha + y.beta).total_cmp(&(x.alpha + x.beta)))
        .then(y.alpha.total_cmp(&x.alpha))
}

fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .parse()
            .ok()
            .filter(|&n| n >= 1)
            .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?;
        b = b.num_threads(n);
    }
    b.build().map_err(|e| CliError::Usage(format!("thread pool: {e}")))
}

pub fn cmd_gridsearch(args: &GridArgs) -> Result<(), CliError> {
    for &x in args.alphas.iter().chain(&args.betas) {
        if !(x >= 0.0 && x.is_finite()) {
            return Err(CliError::Usage(format!("grid values must be finite and >= 0, got {x}")));
        }
    }
    if args.alphas.is_empty() || args.betas.is_empty() {
        return Err(CliError::Usage("grid is empty".into()));
    }
    let truth = parse_truth(&read_text(&args.truth).in_file(&args.truth)?).in_file(&args.truth)?;
    let inputs = load_inputs(&args.inputs)?;
    let base = SolverConfig {
        k: args.k,
        max_iters: args.max_iters,
        rel_tol: args.rel_tol,
        seed: args.seed,
        ..SolverConfig::default()
    };
    base.validate().context("configuration")?;
    let grid: Vec<(f64, f64)> = args
        .alphas
        .iter()
        .flat_map(|&a| args.betas.iter().map(move |&b| (a, b)))
        .collect();
    let results: Vec<Result<GridCell, CliError>> = thread_pool()?.install(|| {
        grid.par_iter()
            .map(|&(alpha, beta)| {
                let cfg = SolverConfig {
                    alpha,
                    beta,
                    ..base.clone()
                };
                evaluate_cell(&inputs, &truth, args.target, args.threshold, &cfg)
            })
            .collect()
    });
    let mut cells = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    cells.sort_by(|x, y| x.alpha.total_cmp(&y.alpha).then(x.beta.total_cmp(&y.beta)));
    let best = cells
        .iter()
        .filter(|c| c.failure.is_none())
        .max_by(|x, y| better(x, y))
        .cloned()
        .ok_or_else(|| CliError::Core {
            context: "gridsearch".into(),
            source: ideofactor::Error::NumericAbort {
                factor: "every grid cell",
                iteration: 0,
            },
        })?;
    let report = GridReport {
        target: args.target.as_str(),
        best,
        cells,
    };
    let json = ideofactor::export::to_json(&report);
    match &args.out {
        Some(p) => ideofactor::io::write_text(p, &json).in_file(p),
        None => {
            print!("{json}");
            Ok(())
        }
    }
}
