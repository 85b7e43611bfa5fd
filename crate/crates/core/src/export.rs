//! JSON and tabular artifacts: factor sets, id manifests, score tables, the
//! ideology–popularity space consumed by the explorer, and recommendation
//! responses.

use std::collections::HashMap;

use ndarray::Array2;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::baselines::Method;
use crate::data::EngagementMatrix;
use crate::error::{Error, Result};
use crate::recommender::{self, Recommendation, RecommendOptions, ToleranceBox};
use crate::scoring::{score_all, EntityKind, ScoredEntity, ScoringOptions};
use crate::solver::{FactorSet, SolverConfig};

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        message: e.to_string(),
    })
}

fn rows(m: &Array2<f64>) -> Vec<Vec<f64>> {
    m.rows().into_iter().map(|r| r.to_vec()).collect()
}

fn matrix(name: &str, rows: &[Vec<f64>], r: usize, c: usize) -> Result<Array2<f64>> {
    if rows.len() != r || rows.iter().any(|row| row.len() != c) {
        return Err(Error::DimensionMismatch(format!("{name} is not {r}x{c}")));
    }
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    if flat.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(Error::InvalidInput(format!("{name} has a negative or non-finite entry")));
    }
    Ok(Array2::from_shape_vec((r, c), flat).expect("length checked"))
}

/// Serialized factor set with the configuration and trace that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorExport {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    #[serde(rename = "U")]
    pub u: Vec<Vec<f64>>,
    #[serde(rename = "V")]
    pub v: Vec<Vec<f64>>,
    #[serde(rename = "Hu")]
    pub hu: Vec<Vec<f64>>,
    #[serde(rename = "Hs")]
    pub hs: Vec<Vec<f64>>,
    pub config: SolverConfig,
    pub objective_trace: Vec<f64>,
    pub method: Method,
}

impl FactorExport {
    pub fn new(f: &FactorSet, config: &SolverConfig, objective_trace: &[f64], method: Method) -> Self {
        FactorExport {
            n: f.n(),
            m: f.m(),
            k: f.k(),
            u: rows(&f.u),
            v: rows(&f.v),
            hu: rows(&f.hu),
            hs: rows(&f.hs),
            config: config.clone(),
            objective_trace: objective_trace.to_vec(),
            method,
        }
    }

    pub fn factor_set(&self) -> Result<FactorSet> {
        Ok(FactorSet {
            u: matrix("U", &self.u, self.n, self.k)?,
            v: matrix("V", &self.v, self.m, self.k)?,
            hu: matrix("Hu", &self.hu, self.k, self.k)?,
            hs: matrix("Hs", &self.hs, self.k, self.k)?,
        })
    }
}

/// Row order of the users and sources behind a factor set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdManifest {
    pub users: Vec<String>,
    pub sources: Vec<String>,
}

pub const SCORES_HEADER: &str = "id\tkind\tideology\tpopularity\tcluster\tdegenerate";

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Tab-separated score table, users then sources.
pub fn format_scores(users: &[ScoredEntity], sources: &[ScoredEntity]) -> String {
    let mut s = format!("{SCORES_HEADER}\n");
    for e in users.iter().chain(sources) {
        s.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\n",
            e.id,
            e.kind,
            opt(e.ideology),
            opt(e.popularity),
            e.cluster,
            e.degenerate
        ));
    }
    s
}

fn parse_opt(field: &str, line: usize) -> Result<Option<f64>> {
    if field.is_empty() {
        return Ok(None);
    }
    field.parse().map(Some).map_err(|_| Error::Parse {
        line,
        message: format!("`{field}` is not a number"),
    })
}

/// Reads a table written by [`format_scores`]. Latent vectors are not part
/// of the table and come back empty.
pub fn parse_scores(text: &str) -> Result<Vec<ScoredEntity>> {
    let mut out = Vec::new();
    for (i, l) in text.lines().enumerate() {
        let line = i + 1;
        let l = l.trim_end_matches('\r');
        if l.is_empty() || (line == 1 && l == SCORES_HEADER) {
            continue;
        }
        let bad = |message: String| Error::Parse { line, message };
        let f: Vec<&str> = l.split('\t').collect();
        if f.len() != 6 {
            return Err(bad(format!("expected 6 tab-separated fields, found {}", f.len())));
        }
        let kind = match f[1] {
            "user" => EntityKind::User,
            "source" => EntityKind::Source,
            other => return Err(bad(format!("unknown kind `{other}`"))),
        };
        out.push(ScoredEntity {
            id: f[0].to_string(),
            kind,
            latent: Vec::new(),
            ideology: parse_opt(f[2], line)?,
            popularity: parse_opt(f[3], line)?,
            cluster: f[4].parse().map_err(|_| bad(format!("cluster `{}` is not an integer", f[4])))?,
            degenerate: f[5].parse().map_err(|_| bad(format!("`{}` is not true/false", f[5])))?,
        });
    }
    Ok(out)
}

/// Users and sources in the ideology–popularity plane plus the engagement
/// edges between them.
///
/// User popularity is the engagement-weighted mean popularity of the
/// sources the user consumes; users without engagement sit at the median
/// source popularity and are listed in `unplaced_users`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Space {
    pub users: Vec<ScoredEntity>,
    pub sources: Vec<ScoredEntity>,
    pub edges: Vec<(String, String, f64)>,
    pub unplaced_users: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecommendationResponse {
    pub user_id: String,
    #[serde(rename = "box")]
    pub tolerance: ToleranceBox,
    pub items: Vec<Recommendation>,
}

impl Space {
    /// Scores `f` (which must have k = 2) and places users using `c`.
    /// Users absent from `c` count as having no engagement.
    pub fn build(f: &FactorSet, ids: &IdManifest, c: &EngagementMatrix, options: ScoringOptions) -> Result<Space> {
        if f.k() != 2 {
            return Err(Error::InvalidInput(format!(
                "the ideology-popularity space needs k = 2, factors have k = {}",
                f.k()
            )));
        }
        let (users, sources) = score_all(f, &ids.users, &ids.sources, options)?;
        let source_pos: HashMap<&str, usize> = ids.sources.iter().enumerate().map(|(j, s)| (s.as_str(), j)).collect();
        let mut col_map = Vec::with_capacity(c.m());
        for s in c.sources().ids() {
            let j = *source_pos.get(s.as_str()).ok_or_else(|| Error::UnknownId(s.clone()))?;
            col_map.push(j);
        }
        let mut edges = Vec::new();
        let mut placed = Vec::with_capacity(users.len());
        let mut unplaced = Vec::new();
        for u in &users {
            let mut row = vec![0.0; sources.len()];
            if let Some(i) = c.users().get(&u.id) {
                for (cj, &j) in col_map.iter().enumerate() {
                    row[j] += c.entries()[[i, cj]];
                }
            }
            for (j, &w) in row.iter().enumerate() {
                if w > 0.0 {
                    edges.push((u.id.clone(), sources[j].id.clone(), w));
                }
            }
            let (p, fallback) = recommender::place_user(u, &row, &sources)?;
            if fallback {
                unplaced.push(u.id.clone());
            }
            placed.push(p);
        }
        Ok(Space {
            users: placed,
            sources,
            edges,
            unplaced_users: unplaced,
        })
    }

    /// The user's engagement counts aligned to `self.sources`.
    pub fn engagement_row(&self, user_id: &str) -> Vec<f64> {
        let pos: HashMap<&str, usize> = self.sources.iter().enumerate().map(|(j, s)| (s.id.as_str(), j)).collect();
        let mut row = vec![0.0; self.sources.len()];
        for (u, s, w) in &self.edges {
            if u == user_id {
                if let Some(&j) = pos.get(s.as_str()) {
                    row[j] += w;
                }
            }
        }
        row
    }

    pub fn recommend(&self, user_id: &str, tolerance: ToleranceBox, options: &RecommendOptions) -> Result<RecommendationResponse> {
        let user = self
            .users
            .iter()
            .find(|u| u.id == user_id)
            .ok_or_else(|| Error::UnknownId(user_id.to_string()))?;
        let row = self.engagement_row(user_id);
        let items = recommender::recommend(user, &self.sources, tolerance, Some(&row), options)?;
        Ok(RecommendationResponse {
            user_id: user_id.to_string(),
            tolerance,
            items,
        })
    }
}
