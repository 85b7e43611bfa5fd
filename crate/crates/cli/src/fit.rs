//! `fit` and `replay`.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use ideofactor::baselines::{fit_dmcc, fit_nmf_symm, fit_onmtf, source_cooccurrence, Method};
use ideofactor::data::GraphMode;
use ideofactor::export::{from_json, to_json, FactorExport, IdManifest};
use ideofactor::io::{read_text, write_text};
use ideofactor::solver::{fit, FactorSet, FitReport, SolverConfig};
use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Context};
use crate::inputs::{load_inputs, read_hashed, sha256_hex, Inputs};
use crate::{FitArgs, InputArgs, ReplayArgs};

pub const FACTORS_FILE: &str = "factors.json";
pub const IDS_FILE: &str = "ids.json";
pub const REPORT_FILE: &str = "report.json";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HashedFile {
    pub role: String,
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub method: Method,
    pub config: SolverConfig,
    pub graph_mode: GraphMode,
    pub inputs: Vec<HashedFile>,
    pub outputs: Vec<HashedFile>,
    pub wall_seconds: f64,
}

#[derive(Debug, Serialize)]
struct RunReport<'a> {
    method: Method,
    n_users: usize,
    m_sources: usize,
    fit: &'a FitReport,
    /// Symmetric NMF on sources runs as a second fit.
    #[serde(skip_serializing_if = "Option::is_none")]
    source_fit: Option<&'a FitReport>,
}

fn need<'a, T>(x: &'a Option<T>, method: Method, flag: &str) -> Result<&'a T, CliError> {
    x.as_ref()
        .ok_or_else(|| CliError::Usage(format!("--method {method} needs {flag}")))
}

/// Runs `method` on the loaded inputs. Symmetric NMF factorizes `A` for users
/// and `CᵀC` for sources, whichever is available.
pub fn run_method(
    method: Method,
    inputs: &Inputs,
    cfg: &SolverConfig,
) -> Result<(FactorSet, FitReport, Option<FitReport>), CliError> {
    let k = cfg.k;
    let n = inputs.users.len();
    Ok(match method {
        Method::Ifd => {
            let (f, r) = fit(need(&inputs.a, method, "--edges")?, need(&inputs.c, method, "--engagement")?, cfg)
                .context("fit")?;
            (f, r, None)
        }
        Method::IfdNgr => {
            // Same computation as `fit_ifd_ngr`, keeping Hu for the export.
            let plain = SolverConfig {
                alpha: 0.0,
                beta: 0.0,
                ..cfg.clone()
            };
            let (f, r) = fit(need(&inputs.a, method, "--edges")?, need(&inputs.c, method, "--engagement")?, &plain)
                .context("fit")?;
            (f, r, None)
        }
        Method::NmfSymm => {
            if inputs.a.is_none() && inputs.c.is_none() {
                return Err(CliError::Usage("--method nmf-symm needs --edges or --engagement".into()));
            }
            let (u, hu, user_report) = match &inputs.a {
                Some(a) => {
                    let r = fit_nmf_symm(a.entries().view(), k, cfg).context("fit users")?;
                    (r.row_factors, r.mid_factor.expect("symmetric fit has H"), Some(r.report))
                }
                None => (Array2::zeros((n, k)), Array2::eye(k), None),
            };
            let (v, hs, source_report) = match &inputs.c {
                Some(c) => {
                    let g = source_cooccurrence(c);
                    let r = fit_nmf_symm(g.view(), k, cfg).context("fit sources")?;
                    (r.row_factors, r.mid_factor.expect("symmetric fit has H"), Some(r.report))
                }
                None => (Array2::zeros((0, k)), Array2::eye(k), None),
            };
            let f = FactorSet { u, v, hu, hs };
            match user_report {
                Some(r) => (f, r, source_report),
                None => (f, source_report.expect("one of the fits ran"), None),
            }
        }
        Method::Onmtf | Method::Dmcc => {
            let c = need(&inputs.c, method, "--engagement")?;
            let b = if method == Method::Onmtf {
                fit_onmtf(c.entries().view(), k, cfg)
            } else {
                fit_dmcc(c.entries().view(), k, cfg.alpha, cfg.beta, cfg)
            }
            .context("fit")?;
            let f = FactorSet {
                u: b.row_factors,
                v: b.col_factors.expect("co-clustering has column factors"),
                hu: Array2::eye(k),
                hs: b.mid_factor.expect("co-clustering has H"),
            };
            (f, b.report, None)
        }
    })
}

fn write_output(dir: &Path, name: &str, contents: &str, outputs: &mut Vec<HashedFile>) -> Result<(), CliError> {
    let path = dir.join(name);
    write_text(&path, contents).in_file(&path)?;
    outputs.push(HashedFile {
        role: name.trim_end_matches(".json").to_string(),
        path: path.display().to_string(),
        sha256: sha256_hex(contents.as_bytes()),
    });
    Ok(())
}

fn execute(method: Method, cfg: &SolverConfig, input_args: &InputArgs, out: &Path) -> Result<(), CliError> {
    cfg.validate().context("configuration")?;
    // Record the weights that actually apply.
    let unpenalized = SolverConfig {
        alpha: 0.0,
        beta: 0.0,
        ..cfg.clone()
    };
    let cfg = match method {
        Method::IfdNgr | Method::Onmtf | Method::NmfSymm => &unpenalized,
        Method::Ifd | Method::Dmcc => cfg,
    };
    let start = Instant::now();
    let inputs = load_inputs(input_args)?;
    let (f, report, source_report) = run_method(method, &inputs, cfg)?;
    let wall_seconds = start.elapsed().as_secs_f64();

    fs::create_dir_all(out).map_err(|e| CliError::Usage(format!("{}: {e}", out.display())))?;
    let mut outputs = Vec::new();
    let export = FactorExport::new(&f, cfg, &report.objective_trace, method);
    write_output(out, FACTORS_FILE, &to_json(&export), &mut outputs)?;
    let ids = IdManifest {
        users: inputs.users.ids().to_vec(),
        sources: inputs.sources.clone(),
    };
    write_output(out, IDS_FILE, &to_json(&ids), &mut outputs)?;
    let run_report = RunReport {
        method,
        n_users: f.n(),
        m_sources: f.m(),
        fit: &report,
        source_fit: source_report.as_ref(),
    };
    write_output(out, REPORT_FILE, &to_json(&run_report), &mut outputs)?;

    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        method,
        config: cfg.clone(),
        graph_mode: input_args.graph_mode,
        inputs: inputs
            .files
            .into_iter()
            .map(|(role, path, sha256)| HashedFile { role, path, sha256 })
            .collect(),
        outputs,
        wall_seconds,
    };
    let path = out.join(MANIFEST_FILE);
    write_text(&path, &to_json(&manifest)).in_file(&path)?;
    log::info!(
        "{method}: {} iterations, objective {:e}, {wall_seconds:.3}s",
        report.iterations_run,
        report.final_objective
    );
    Ok(())
}

pub fn cmd_fit(args: &FitArgs) -> Result<(), CliError> {
    let s = &args.solver;
    let cfg = SolverConfig {
        k: s.k,
        alpha: s.alpha,
        beta: s.beta,
        max_iters: s.max_iters,
        rel_tol: s.rel_tol,
        seed: s.seed,
        ..SolverConfig::default()
    };
    execute(args.method, &cfg, &args.inputs, &args.out)
}

/// Re-runs the fit recorded in a manifest after checking the input hashes.
pub fn cmd_replay(args: &ReplayArgs) -> Result<(), CliError> {
    let text = read_text(&args.manifest).in_file(&args.manifest)?;
    let m: RunManifest = from_json(&text).in_file(&args.manifest)?;
    let mut input_args = InputArgs {
        edges: None,
        graph_mode: m.graph_mode,
        engagement: None,
    };
    for f in &m.inputs {
        let path = PathBuf::from(&f.path);
        let (_, hash) = read_hashed(&path)?;
        if hash != f.sha256 {
            return Err(CliError::Usage(format!(
                "{}: content hash {hash} does not match manifest ({})",
                f.path, f.sha256
            )));
        }
        match f.role.as_str() {
            "edges" => input_args.edges = Some(path),
            "engagement" => input_args.engagement = Some(path),
            other => return Err(CliError::Usage(format!("unknown input role `{other}` in manifest"))),
        }
    }
    execute(m.method, &m.config, &input_args, &args.out)
}

/// Factors and ids written by `fit` in `dir`.
pub fn load_run(dir: &Path) -> Result<(FactorExport, FactorSet, IdManifest), CliError> {
    let fp = dir.join(FACTORS_FILE);
    let export: FactorExport = from_json(&read_text(&fp).in_file(&fp)?).in_file(&fp)?;
    let f = export.factor_set().in_file(&fp)?;
    let ip = dir.join(IDS_FILE);
    let ids: IdManifest = from_json(&read_text(&ip).in_file(&ip)?).in_file(&ip)?;
    if ids.users.len() != f.n() || ids.sources.len() != f.m() {
        return Err(CliError::Usage(format!(
            "{}: {} users / {} sources for factors with {} / {} rows",
            ip.display(),
            ids.users.len(),
            ids.sources.len(),
            f.n(),
            f.m()
        )));
    }
    Ok((export, f, ids))
}
