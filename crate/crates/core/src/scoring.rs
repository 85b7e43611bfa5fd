//! Ideology and popularity scores from two-dimensional latent vectors, and
//! hard clusters from factor rows.

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{pearson_slices, ScoreSeries};
use crate::solver::FactorSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntityKind {
    User,
    Source,
}

impl std::fmt::Display for EntityKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EntityKind::User => "user",
            EntityKind::Source => "source",
        })
    }
}

/// A user or source placed in the latent and ideology–popularity spaces.
///
/// `ideology` and `popularity` are only present for k = 2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredEntity {
    pub id: String,
    pub kind: EntityKind,
    pub latent: Vec<f64>,
    pub ideology: Option<f64>,
    pub popularity: Option<f64>,
    pub cluster: usize,
    pub degenerate: bool,
}

fn check_components(x: f64, y: f64) -> Result<()> {
    for c in [x, y] {
        if !(c >= 0.0) {
            return Err(Error::NegativeComponent(c));
        }
    }
    Ok(())
}

/// Angle of `(x, y)` from the first axis scaled to `[0, 1]`; the zero vector
/// scores 0.5.
pub fn ideology_score(x: f64, y: f64) -> Result<f64> {
    check_components(x, y)?;
    if x == 0.0 && y == 0.0 {
        return Ok(0.5);
    }
    Ok(y.atan2(x) / std::f64::consts::FRAC_PI_2)
}

/// Euclidean length of `(x, y)`.
pub fn popularity_score(x: f64, y: f64) -> Result<f64> {
    check_components(x, y)?;
    Ok(x.hypot(y))
}

/// Row-wise argmax; ties go to the lowest index.
pub fn hard_clusters(f: ArrayView2<'_, f64>) -> Vec<usize> {
    f.rows()
        .into_iter()
        .map(|row| {
            let mut best = 0;
            for (j, &x) in row.iter().enumerate() {
                if x > row[best] {
                    best = j;
                }
            }
            best
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ScoringOptions {
    /// Scale each factor column to unit L1 mass before scoring.
    pub normalize: bool,
}

fn l1_columns(f: &Array2<f64>) -> Array2<f64> {
    let mut out = f.clone();
    for mut col in out.columns_mut() {
        let s = col.sum();
        if s > 0.0 {
            col /= s;
        }
    }
    out
}

fn score_rows(f: &Array2<f64>, ids: &[String], kind: EntityKind) -> Result<Vec<ScoredEntity>> {
    let k = f.ncols();
    let clusters = hard_clusters(f.view());
    f.rows()
        .into_iter()
        .zip(ids)
        .zip(clusters)
        .map(|((row, id), cluster)| {
            let degenerate = row.iter().all(|&x| x == 0.0);
            let (ideology, popularity) = if k == 2 {
                (
                    Some(ideology_score(row[0], row[1])?),
                    Some(popularity_score(row[0], row[1])?),
                )
            } else {
                (None, None)
            };
            Ok(ScoredEntity {
                id: id.clone(),
                kind,
                latent: row.to_vec(),
                ideology,
                popularity,
                cluster,
                degenerate,
            })
        })
        .collect()
}

/// Scores every row of `U` (users) and `V` (sources).
pub fn score_all(
    f: &FactorSet,
    user_ids: &[String],
    source_ids: &[String],
    options: ScoringOptions,
) -> Result<(Vec<ScoredEntity>, Vec<ScoredEntity>)> {
    if user_ids.len() != f.n() || source_ids.len() != f.m() {
        return Err(Error::DimensionMismatch(format!(
            "{} user ids / {} source ids for factors with {} / {} rows",
            user_ids.len(),
            source_ids.len(),
            f.n(),
            f.m()
        )));
    }
    let (u, v) = if options.normalize {
        (l1_columns(&f.u), l1_columns(&f.v))
    } else {
        (f.u.clone(), f.v.clone())
    };
    Ok((
        score_rows(&u, user_ids, EntityKind::User)?,
        score_rows(&v, source_ids, EntityKind::Source)?,
    ))
}

/// Outcome of [`orient`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Kept,
    Flipped,
    /// No usable anchors; axis order is whatever the fit produced.
    Arbitrary,
}

/// Swaps the two latent axes if ideology scores of the anchored users and
/// sources correlate negatively with the anchor scores. Only meaningful
/// for k = 2.
pub fn orient(
    f: &mut FactorSet,
    user_ids: &[String],
    source_ids: &[String],
    anchors: &ScoreSeries,
) -> Result<Orientation> {
    if f.k() != 2 {
        return Ok(Orientation::Arbitrary);
    }
    let anchor_map = anchors.to_map();
    let mut ours = Vec::new();
    let mut theirs = Vec::new();
    for (ids, factor) in [(user_ids, &f.u), (source_ids, &f.v)] {
        for (id, row) in ids.iter().zip(factor.rows()) {
            if let Some(&a) = anchor_map.get(id.as_str()) {
                ours.push(ideology_score(row[0], row[1])?);
                theirs.push(a);
            }
        }
    }
    match pearson_slices(&ours, &theirs) {
        Ok(r) if r < 0.0 => {
            f.swap_axes(0, 1);
            Ok(Orientation::Flipped)
        }
        Ok(_) => Ok(Orientation::Kept),
        Err(_) => Ok(Orientation::Arbitrary),
    }
}
