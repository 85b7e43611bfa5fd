//! Input matrices: the user–user interaction matrix and the user–source
//! engagement matrix, built from pre-aggregated edge records.

use std::collections::{BTreeSet, HashMap};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How interaction records are turned into matrix weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GraphMode {
    /// Entry (u, v) counts the followees shared by u and v. Symmetric.
    FollowCommonNeighbors,
    /// Entry (u, v) is the summed retweet weight from u to v.
    RetweetCount,
    /// Entry (u, v) is the summed edge weight as given.
    Raw,
}

impl std::str::FromStr for GraphMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "follow" | "follow-common-neighbors" => Ok(GraphMode::FollowCommonNeighbors),
            "retweet" | "retweet-count" => Ok(GraphMode::RetweetCount),
            "raw" => Ok(GraphMode::Raw),
            other => Err(Error::InvalidConfig(format!("unknown graph mode `{other}`"))),
        }
    }
}

/// A weighted directed record `src -> dst`.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub src: String,
    pub dst: String,
    pub weight: f64,
}

impl Edge {
    pub fn new(src: impl Into<String>, dst: impl Into<String>, weight: f64) -> Self {
        Edge {
            src: src.into(),
            dst: dst.into(),
            weight,
        }
    }
}

/// Ordered list of opaque ids with a reverse lookup.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IdIndex {
    ids: Vec<String>,
    lookup: HashMap<String, usize>,
}

impl IdIndex {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds an index from ids in order; duplicates are rejected.
    pub fn from_ids<I, S>(ids: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut index = IdIndex::new();
        for id in ids {
            let id = id.into();
            if index.lookup.contains_key(&id) {
                return Err(Error::InvalidInput(format!("duplicate id `{id}`")));
            }
            index.insert(id);
        }
        Ok(index)
    }

    /// Returns the index of `id`, inserting it at the end if absent.
    pub fn insert(&mut self, id: impl Into<String>) -> usize {
        let id = id.into();
        if let Some(&i) = self.lookup.get(&id) {
            return i;
        }
        let i = self.ids.len();
        self.lookup.insert(id.clone(), i);
        self.ids.push(id);
        i
    }

    pub fn get(&self, id: &str) -> Option<usize> {
        self.lookup.get(id).copied()
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    fn resolve(&mut self, id: &str, fixed: bool) -> Result<usize> {
        match self.get(id) {
            Some(i) => Ok(i),
            None if fixed => Err(Error::UnknownId(id.to_string())),
            None => Ok(self.insert(id)),
        }
    }
}

/// Square user–user interaction matrix `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionMatrix {
    entries: Array2<f64>,
    users: IdIndex,
    mode: GraphMode,
}

impl InteractionMatrix {
    /// Wraps a dense matrix, zeroing the diagonal.
    pub fn from_dense(mut entries: Array2<f64>, users: IdIndex, mode: GraphMode) -> Result<Self> {
        let (r, c) = entries.dim();
        if r != c || r != users.len() {
            return Err(Error::DimensionMismatch(format!(
                "interaction matrix is {r}x{c} for {} users",
                users.len()
            )));
        }
        if entries.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
            return Err(Error::InvalidInput(
                "interaction entries must be finite and non-negative".into(),
            ));
        }
        entries.diag_mut().fill(0.0);
        Ok(InteractionMatrix {
            entries,
            users,
            mode,
        })
    }

    pub fn entries(&self) -> &Array2<f64> {
        &self.entries
    }

    pub fn users(&self) -> &IdIndex {
        &self.users
    }

    pub fn mode(&self) -> GraphMode {
        self.mode
    }

    pub fn n(&self) -> usize {
        self.users.len()
    }
}

/// Builds `A` from edge records.
///
/// With a declared `universe` the user set and order are fixed and unknown
/// ids are rejected. Without one, users are indexed in order of first
/// appearance. In follow mode only the follower column names users; the
/// followee column is an opaque account set.
pub fn build_interaction_matrix(
    edges: &[Edge],
    mode: GraphMode,
    universe: Option<&IdIndex>,
) -> Result<InteractionMatrix> {
    for e in edges {
        if !(e.weight >= 0.0) || !e.weight.is_finite() {
            return Err(Error::NegativeWeight {
                src: e.src.clone(),
                dst: e.dst.clone(),
                weight: e.weight,
            });
        }
    }
    let fixed = universe.is_some();
    let mut users = universe.cloned().unwrap_or_default();

    match mode {
        GraphMode::FollowCommonNeighbors => {
            let mut followees: Vec<BTreeSet<&str>> = vec![BTreeSet::new(); users.len()];
            for e in edges {
                let u = users.resolve(&e.src, fixed)?;
                if u >= followees.len() {
                    followees.resize_with(u + 1, BTreeSet::new);
                }
                followees[u].insert(e.dst.as_str());
            }
            followees.resize_with(users.len(), BTreeSet::new);
            let n = users.len();
            let mut a = Array2::zeros((n, n));
            for u in 0..n {
                for v in (u + 1)..n {
                    let common = followees[u].intersection(&followees[v]).count() as f64;
                    a[[u, v]] = common;
                    a[[v, u]] = common;
                }
            }
            InteractionMatrix::from_dense(a, users, mode)
        }
        GraphMode::RetweetCount | GraphMode::Raw => {
            let mut triples = Vec::with_capacity(edges.len());
            for e in edges {
                let u = users.resolve(&e.src, fixed)?;
                let v = users.resolve(&e.dst, fixed)?;
                triples.push((u, v, e.weight));
            }
            let n = users.len();
            let mut a = Array2::zeros((n, n));
            for (u, v, w) in triples {
                a[[u, v]] += w;
            }
            InteractionMatrix::from_dense(a, users, mode)
        }
    }
}

/// Ids that name users in an edge list under `mode`, in first-appearance order.
pub fn edge_user_ids(edges: &[Edge], mode: GraphMode) -> Vec<String> {
    let mut index = IdIndex::new();
    for e in edges {
        index.insert(e.src.as_str());
        if mode != GraphMode::FollowCommonNeighbors {
            index.insert(e.dst.as_str());
        }
    }
    index.ids
}

/// User–source engagement matrix `C`.
#[derive(Debug, Clone, PartialEq)]
pub struct EngagementMatrix {
    entries: Array2<f64>,
    users: IdIndex,
    sources: IdIndex,
}

impl EngagementMatrix {
    pub fn from_dense(entries: Array2<f64>, users: IdIndex, sources: IdIndex) -> Result<Self> {
        let (r, c) = entries.dim();
        if r != users.len() || c != sources.len() {
            return Err(Error::DimensionMismatch(format!(
                "engagement matrix is {r}x{c} for {} users and {} sources",
                users.len(),
                sources.len()
            )));
        }
        if r == 0 || c == 0 {
            return Err(Error::InvalidInput(
                "engagement matrix needs at least one user and one source".into(),
            ));
        }
        if entries.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
            return Err(Error::InvalidInput(
                "engagement counts must be finite and non-negative".into(),
            ));
        }
        Ok(EngagementMatrix {
            entries,
            users,
            sources,
        })
    }

    /// Builds `C` from `(user, source, count)` records; duplicate records are summed.
    pub fn from_records(records: &[Edge], user_universe: Option<&IdIndex>) -> Result<Self> {
        let fixed = user_universe.is_some();
        let mut users = user_universe.cloned().unwrap_or_default();
        let mut sources = IdIndex::new();
        let mut triples = Vec::with_capacity(records.len());
        for r in records {
            if !(r.weight >= 0.0) || !r.weight.is_finite() {
                return Err(Error::NegativeWeight {
                    src: r.src.clone(),
                    dst: r.dst.clone(),
                    weight: r.weight,
                });
            }
            let u = users.resolve(&r.src, fixed)?;
            let s = sources.insert(r.dst.as_str());
            triples.push((u, s, r.weight));
        }
        let mut c = Array2::zeros((users.len(), sources.len()));
        for (u, s, w) in triples {
            c[[u, s]] += w;
        }
        EngagementMatrix::from_dense(c, users, sources)
    }

    pub fn entries(&self) -> &Array2<f64> {
        &self.entries
    }

    pub fn users(&self) -> &IdIndex {
        &self.users
    }

    pub fn sources(&self) -> &IdIndex {
        &self.sources
    }

    pub fn n(&self) -> usize {
        self.users.len()
    }

    pub fn m(&self) -> usize {
        self.sources.len()
    }
}
