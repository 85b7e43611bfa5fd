//! Plain-text input formats.
//!
//! Edge lists are `src<TAB>dst<TAB>weight`, follow lists `user<TAB>followee`,
//! engagement files `user<TAB>source<TAB>count`. Blank lines and lines
//! starting with `#` are skipped. Ground-truth files are `id,score` CSV with
//! an optional `id,score` header.

use std::fs;
use std::path::Path;

use crate::data::{EngagementMatrix, Edge, InteractionMatrix};
use crate::error::{Error, Result};
use crate::metrics::ScoreSeries;
use crate::synthetic::{source_id, user_id, SyntheticInstance};

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#')
        })
}

fn parse_number(field: &str, line: usize, what: &str) -> Result<f64> {
    let v: f64 = field
        .trim()
        .parse()
        .map_err(|_| parse_err(line, format!("{what} `{field}` is not a number")))?;
    if !v.is_finite() {
        return Err(parse_err(line, format!("{what} `{field}` is not finite")));
    }
    Ok(v)
}

fn parse_id(field: &str, line: usize) -> Result<String> {
    let id = field.trim();
    if id.is_empty() {
        return Err(parse_err(line, "empty id"));
    }
    Ok(id.to_string())
}

fn parse_tab_records(text: &str, min_fields: usize, max_fields: usize, what: &str) -> Result<Vec<Edge>> {
    let mut out = Vec::new();
    for (line, l) in data_lines(text) {
        let fields: Vec<&str> = l.split('\t').collect();
        if fields.len() < min_fields || fields.len() > max_fields {
            let expected = if min_fields == max_fields {
                format!("{min_fields}")
            } else {
                format!("{min_fields} or {max_fields}")
            };
            return Err(parse_err(
                line,
                format!("expected {expected} tab-separated fields, found {}", fields.len()),
            ));
        }
        let weight = match fields.get(2) {
            Some(f) => parse_number(f, line, what)?,
            None => 1.0,
        };
        out.push(Edge::new(parse_id(fields[0], line)?, parse_id(fields[1], line)?, weight));
    }
    Ok(out)
}

/// `src<TAB>dst<TAB>weight`; a missing weight column means 1.
pub fn parse_edge_list(text: &str) -> Result<Vec<Edge>> {
    parse_tab_records(text, 2, 3, "weight")
}

/// `user<TAB>followee`.
pub fn parse_follow_list(text: &str) -> Result<Vec<Edge>> {
    parse_tab_records(text, 2, 2, "weight")
}

/// `user<TAB>source<TAB>count`.
pub fn parse_engagement(text: &str) -> Result<Vec<Edge>> {
    parse_tab_records(text, 3, 3, "count")
}

/// `id,score` rows.
pub fn parse_truth(text: &str) -> Result<ScoreSeries> {
    let mut ids = Vec::new();
    let mut values = Vec::new();
    for (line, l) in data_lines(text) {
        let fields: Vec<&str> = l.split(',').collect();
        if fields.len() != 2 {
            return Err(parse_err(line, format!("expected `id,score`, found {} fields", fields.len())));
        }
        if ids.is_empty() && fields[0].trim() == "id" && fields[1].trim() == "score" {
            continue;
        }
        ids.push(parse_id(fields[0], line)?);
        values.push(parse_number(fields[1], line, "score")?);
    }
    ScoreSeries::new(ids, values)
}

pub fn format_edge_list(edges: &[Edge]) -> String {
    let mut s = String::new();
    for e in edges {
        s.push_str(&format!("{}\t{}\t{}\n", e.src, e.dst, e.weight));
    }
    s
}

pub fn format_truth(series: &ScoreSeries) -> String {
    let mut s = String::from("id,score\n");
    for (id, v) in series.ids().iter().zip(series.values()) {
        s.push_str(&format!("{id},{v}\n"));
    }
    s
}

/// Every nonzero entry of `A` as a directed edge, row-major.
pub fn interaction_edges(a: &InteractionMatrix) -> Vec<Edge> {
    let ids = a.users().ids();
    let mut out = Vec::new();
    for ((i, j), &w) in a.entries().indexed_iter() {
        if w != 0.0 {
            out.push(Edge::new(ids[i].as_str(), ids[j].as_str(), w));
        }
    }
    out
}

/// Every nonzero entry of `C` as a `(user, source, count)` record, row-major.
pub fn engagement_records(c: &EngagementMatrix) -> Vec<Edge> {
    let users = c.users().ids();
    let sources = c.sources().ids();
    let mut out = Vec::new();
    for ((i, j), &w) in c.entries().indexed_iter() {
        if w != 0.0 {
            out.push(Edge::new(users[i].as_str(), sources[j].as_str(), w));
        }
    }
    out
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

pub fn write_text(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// File names written by [`write_instance`].
pub const INSTANCE_FILES: [&str; 5] = [
    "edges.tsv",
    "engagement.tsv",
    "users_truth.csv",
    "sources_truth.csv",
    "blocks.csv",
];

/// Writes a synthetic instance as edge list, engagement file, planted
/// ideology ground truth for users and sources, and planted block labels.
pub fn write_instance(inst: &SyntheticInstance, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.display().to_string(),
        message: e.to_string(),
    })?;
    let users: Vec<String> = (0..inst.user_blocks.len()).map(user_id).collect();
    let sources: Vec<String> = (0..inst.source_blocks.len()).map(source_id).collect();
    write_text(&dir.join(INSTANCE_FILES[0]), &format_edge_list(&interaction_edges(&inst.a)))?;
    write_text(&dir.join(INSTANCE_FILES[1]), &format_edge_list(&engagement_records(&inst.c)))?;
    write_text(
        &dir.join(INSTANCE_FILES[2]),
        &format_truth(&ScoreSeries::new(users.clone(), inst.user_ideology_true.clone())?),
    )?;
    write_text(
        &dir.join(INSTANCE_FILES[3]),
        &format_truth(&ScoreSeries::new(sources.clone(), inst.source_ideology_true.clone())?),
    )?;
    let mut blocks = String::from("id,kind,block\n");
    for (id, b) in users.iter().zip(&inst.user_blocks) {
        blocks.push_str(&format!("{id},user,{b}\n"));
    }
    for (id, b) in sources.iter().zip(&inst.source_blocks) {
        blocks.push_str(&format!("{id},source,{b}\n"));
    }
    write_text(&dir.join(INSTANCE_FILES[4]), &blocks)
}
