//! `score`, `eval` and `recommend`.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use ideofactor::export::{format_scores, from_json, parse_scores, to_json, IdManifest, Space, SCORES_HEADER};
use ideofactor::io::{parse_truth, read_text, write_text};
use ideofactor::metrics::{evaluate, pearson_slices, threshold_labels, ScoreSeries};
use ideofactor::recommender::{RecommendOptions, ToleranceBox};
use ideofactor::scoring::{orient, score_all, EntityKind, Orientation, ScoringOptions};
use ideofactor::solver::FactorSet;

use crate::error::{CliError, Context};
use crate::fit::load_run;
use crate::inputs::load_engagement;
use crate::{EvalArgs, RecommendArgs, RunArgs, ScoreArgs, SpaceSource};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Target {
    Users,
    Sources,
}

impl Target {
    pub fn as_str(&self) -> &'static str {
        match self {
            Target::Users => "users",
            Target::Sources => "sources",
        }
    }

    pub fn kind(&self) -> EntityKind {
        match self {
            Target::Users => EntityKind::User,
            Target::Sources => EntityKind::Source,
        }
    }
}

/// Concatenation of one or more `id,score` files.
pub fn load_truths(paths: &[PathBuf]) -> Result<Option<ScoreSeries>, CliError> {
    if paths.is_empty() {
        return Ok(None);
    }
    let mut ids = Vec::new();
    let mut values = Vec::new();
    for p in paths {
        let s = parse_truth(&read_text(p).in_file(p)?).in_file(p)?;
        ids.extend_from_slice(s.ids());
        values.extend_from_slice(s.values());
    }
    Ok(Some(ScoreSeries::new(ids, values).context("anchor scores")?))
}

/// Factors from a run directory, oriented against anchors when given.
pub fn oriented_run(run: &Path, truths: &[PathBuf]) -> Result<(FactorSet, IdManifest), CliError> {
    let (_, mut f, ids) = load_run(run)?;
    if let Some(anchors) = load_truths(truths)? {
        let o = orient(&mut f, &ids.users, &ids.sources, &anchors).context("orient")?;
        if o == Orientation::Arbitrary {
            log::warn!("anchors could not fix the axis order; it is arbitrary");
        }
        log::info!("orientation: {o:?}");
    }
    Ok((f, ids))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => write_text(p, text).in_file(p),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn cmd_score(args: &ScoreArgs) -> Result<(), CliError> {
    let RunArgs { run, truth, normalize } = &args.run;
    let (f, ids) = oriented_run(run, truth)?;
    let (users, sources) =
        score_all(&f, &ids.users, &ids.sources, ScoringOptions { normalize: *normalize }).context("score")?;
    emit(args.out.as_deref(), &format_scores(&users, &sources))
}

struct Prediction {
    ids: Vec<String>,
    labels: Vec<usize>,
    ideology: Option<Vec<f64>>,
    popularity: Option<Vec<f64>>,
}

fn load_prediction(path: &Path, target: Target, threshold: f64) -> Result<Prediction, CliError> {
    let text = read_text(path).in_file(path)?;
    let first = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
    if first == SCORES_HEADER || first.contains('\t') {
        let rows: Vec<_> = parse_scores(&text)
            .in_file(path)?
            .into_iter()
            .filter(|e| e.kind == target.kind())
            .collect();
        let ideology: Option<Vec<f64>> = rows.iter().map(|e| e.ideology).collect();
        let popularity: Option<Vec<f64>> = rows.iter().map(|e| e.popularity).collect();
        Ok(Prediction {
            ids: rows.iter().map(|e| e.id.clone()).collect(),
            labels: rows.iter().map(|e| e.cluster).collect(),
            ideology,
            popularity,
        })
    } else {
        let s = parse_truth(&text).in_file(path)?;
        Ok(Prediction {
            ids: s.ids().to_vec(),
            labels: threshold_labels(&s, threshold).labels().to_vec(),
            ideology: Some(s.values().to_vec()),
            popularity: None,
        })
    }
}

pub fn cmd_eval(args: &EvalArgs) -> Result<(), CliError> {
    let pred = load_prediction(&args.pred, args.target, args.threshold)?;
    let truth = parse_truth(&read_text(&args.truth).in_file(&args.truth)?).in_file(&args.truth)?;
    let mut report = evaluate(
        &args.method,
        args.target.as_str(),
        &pred.ids,
        &pred.labels,
        pred.ideology.as_deref(),
        &truth,
        args.threshold,
    )
    .context("evaluate")?;
    if let (Some(path), Some(pop)) = (&args.engagement, &pred.popularity) {
        let c = load_engagement(path)?;
        let (ids, totals) = match args.target {
            Target::Users => (c.users().ids(), c.entries().sum_axis(ndarray::Axis(1))),
            Target::Sources => (c.sources().ids(), c.entries().sum_axis(ndarray::Axis(0))),
        };
        let volume: HashMap<&str, f64> = ids.iter().map(|s| s.as_str()).zip(totals.iter().copied()).collect();
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        for (id, &p) in pred.ids.iter().zip(pop) {
            if let Some(&v) = volume.get(id.as_str()) {
                xs.push(p);
                ys.push(v);
            }
        }
        report.corr_rho = Some(pearson_slices(&xs, &ys).context("popularity correlation")?);
    }
    emit(args.out.as_deref(), &to_json(&report))
}

/// The space named by `--space`, or built from `--run` and `--engagement`.
pub fn load_space(src: &SpaceSource) -> Result<Space, CliError> {
    if let Some(p) = &src.space {
        return from_json(&read_text(p).in_file(p)?).in_file(p);
    }
    let (Some(run), Some(engagement)) = (&src.run, &src.engagement) else {
        return Err(CliError::Usage("give --space, or --run together with --engagement".into()));
    };
    let (f, ids) = oriented_run(run, &src.truth)?;
    let c = load_engagement(engagement)?;
    Space::build(&f, &ids, &c, ScoringOptions { normalize: src.normalize }).context("space")
}

pub fn cmd_recommend(args: &RecommendArgs) -> Result<(), CliError> {
    let space = load_space(&args.source)?;
    let tolerance = ToleranceBox::new(args.theta, args.delta).context("tolerance")?;
    let options = RecommendOptions {
        count: args.count,
        exclude_consumed: args.exclude_consumed,
        truncate: !args.no_truncate,
        seed: args.seed,
    };
    let response = space.recommend(&args.user, tolerance, &options).context("recommend")?;
    emit(args.out.as_deref(), &to_json(&response))
}
