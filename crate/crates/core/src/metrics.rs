//! External clustering-agreement metrics, Pearson correlation over partially
//! overlapping score series, and ground-truth derivation helpers.
//!
//! NMI and AMI use the arithmetic mean of the two entropies as the
//! normalizer; AMI is adjusted under the permutation (hypergeometric) model.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::data::EngagementMatrix;
use crate::error::{Error, Result};

/// Name of the MI normalization used by [`mutual_information_scores`].
pub const MI_NORMALIZATION: &str = "arithmetic";

/// Cluster labels, densely numbered from zero.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledPartition {
    labels: Vec<usize>,
    n_clusters: usize,
}

impl LabeledPartition {
    /// Renumbers arbitrary labels densely in order of first appearance.
    pub fn new(raw: &[usize]) -> Self {
        let mut remap = HashMap::new();
        let labels = raw
            .iter()
            .map(|l| {
                let next = remap.len();
                *remap.entry(*l).or_insert(next)
            })
            .collect();
        LabeledPartition {
            labels,
            n_clusters: remap.len(),
        }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn n_items(&self) -> usize {
        self.labels.len()
    }

    pub fn n_clusters(&self) -> usize {
        self.n_clusters
    }
}

struct Contingency {
    table: Vec<Vec<u64>>,
    pred_sizes: Vec<u64>,
    truth_sizes: Vec<u64>,
    n: u64,
}

fn contingency(pred: &LabeledPartition, truth: &LabeledPartition) -> Result<Contingency> {
    if pred.n_items() != truth.n_items() {
        return Err(Error::DimensionMismatch(format!(
            "partitions have {} and {} items",
            pred.n_items(),
            truth.n_items()
        )));
    }
    let mut table = vec![vec![0u64; truth.n_clusters()]; pred.n_clusters()];
    for (&p, &t) in pred.labels().iter().zip(truth.labels()) {
        table[p][t] += 1;
    }
    let pred_sizes = table.iter().map(|r| r.iter().sum()).collect();
    let truth_sizes = (0..truth.n_clusters())
        .map(|t| table.iter().map(|r| r[t]).sum())
        .collect();
    Ok(Contingency {
        table,
        pred_sizes,
        truth_sizes,
        n: pred.n_items() as u64,
    })
}

/// Fraction of items that fall in the majority truth class of their
/// predicted cluster.
pub fn purity(pred: &LabeledPartition, truth: &LabeledPartition) -> Result<f64> {
    let ct = contingency(pred, truth)?;
    if ct.n == 0 {
        return Ok(1.0);
    }
    let hits: u64 = ct
        .table
        .iter()
        .map(|row| row.iter().copied().max().unwrap_or(0))
        .sum();
    Ok(hits as f64 / ct.n as f64)
}

fn pairs(x: u64) -> i128 {
    let x = x as i128;
    x * (x - 1) / 2
}

/// Adjusted Rand index. Evaluated in exact integer arithmetic up to one
/// final division.
pub fn adjusted_rand_index(pred: &LabeledPartition, truth: &LabeledPartition) -> Result<f64> {
    let ct = contingency(pred, truth)?;
    let index: i128 = ct.table.iter().flatten().map(|&x| pairs(x)).sum();
    let sum_pred: i128 = ct.pred_sizes.iter().map(|&x| pairs(x)).sum();
    let sum_truth: i128 = ct.truth_sizes.iter().map(|&x| pairs(x)).sum();
    let total = pairs(ct.n);
    // ARI = (index - E) / (max - E) with E = sp*st/total, max = (sp+st)/2;
    // scaled by 2*total to stay integral.
    let num = 2 * total * index - 2 * sum_pred * sum_truth;
    let den = total * (sum_pred + sum_truth) - 2 * sum_pred * sum_truth;
    if den == 0 {
        return Ok(1.0);
    }
    Ok(num as f64 / den as f64)
}

fn entropy(sizes: &[u64], n: f64) -> f64 {
    sizes
        .iter()
        .filter(|&&s| s > 0)
        .map(|&s| {
            let p = s as f64 / n;
            -p * p.ln()
        })
        .sum()
}

fn log_factorials(n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    for i in 1..=n {
        out[i] = out[i - 1] + (i as f64).ln();
    }
    out
}

// Expected MI between random partitions with the given marginals.
fn expected_mutual_information(a: &[u64], b: &[u64], n: u64) -> f64 {
    let lf = log_factorials(n as usize);
    let nf = n as f64;
    let mut emi = 0.0;
    for &ai in a {
        for &bj in b {
            let lo = (ai + bj).saturating_sub(n).max(1);
            let hi = ai.min(bj);
            for nij in lo..=hi {
                let x = nij as f64;
                let term = (x / nf) * ((nf * x) / (ai as f64 * bj as f64)).ln();
                let log_p = lf[ai as usize] + lf[bj as usize] + lf[(n - ai) as usize] + lf[(n - bj) as usize]
                    - lf[n as usize]
                    - lf[nij as usize]
                    - lf[(ai - nij) as usize]
                    - lf[(bj - nij) as usize]
                    - lf[(n + nij - ai - bj) as usize];
                emi += term * log_p.exp();
            }
        }
    }
    emi
}

/// Normalized and adjusted mutual information.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MutualInformation {
    pub nmi: f64,
    pub ami: f64,
}

pub fn mutual_information_scores(
    pred: &LabeledPartition,
    truth: &LabeledPartition,
) -> Result<MutualInformation> {
    let ct = contingency(pred, truth)?;
    let kp = ct.pred_sizes.len();
    let kt = ct.truth_sizes.len();
    // Both trivial, or both maximally split: perfect agreement by convention.
    if (kp == kt && (kp <= 1 || kp as u64 == ct.n)) || ct.n == 0 {
        return Ok(MutualInformation { nmi: 1.0, ami: 1.0 });
    }
    let n = ct.n as f64;
    let mut mi = 0.0;
    for (i, row) in ct.table.iter().enumerate() {
        for (j, &nij) in row.iter().enumerate() {
            if nij == 0 {
                continue;
            }
            let x = nij as f64;
            mi += (x / n) * ((n * x) / (ct.pred_sizes[i] as f64 * ct.truth_sizes[j] as f64)).ln();
        }
    }
    let mi = mi.max(0.0);
    let hp = entropy(&ct.pred_sizes, n);
    let ht = entropy(&ct.truth_sizes, n);
    let mean = 0.5 * (hp + ht);

    let nmi = if mean > 0.0 { (mi / mean).min(1.0) } else { 1.0 };

    let emi = expected_mutual_information(&ct.pred_sizes, &ct.truth_sizes, ct.n);
    let mut denom = mean - emi;
    if denom.abs() < f64::EPSILON {
        denom = f64::EPSILON.copysign(denom);
    }
    let ami = (mi - emi) / denom;
    Ok(MutualInformation { nmi, ami })
}

/// Identifier-keyed real values; may cover a subset of a population.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ScoreSeries {
    ids: Vec<String>,
    values: Vec<f64>,
}

impl ScoreSeries {
    pub fn new(ids: Vec<String>, values: Vec<f64>) -> Result<Self> {
        if ids.len() != values.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} ids for {} values",
                ids.len(),
                values.len()
            )));
        }
        let mut seen = std::collections::HashSet::new();
        for id in &ids {
            if !seen.insert(id.as_str()) {
                return Err(Error::InvalidInput(format!("duplicate id `{id}` in score series")));
            }
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite score {v}")));
        }
        Ok(ScoreSeries { ids, values })
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn to_map(&self) -> HashMap<&str, f64> {
        self.ids
            .iter()
            .map(String::as_str)
            .zip(self.values.iter().copied())
            .collect()
    }

    /// Values of both series on their common ids, in this series' order.
    pub fn align(&self, other: &ScoreSeries) -> (Vec<String>, Vec<f64>, Vec<f64>) {
        let theirs = other.to_map();
        let mut ids = Vec::new();
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (id, &x) in self.ids.iter().zip(&self.values) {
            if let Some(&y) = theirs.get(id.as_str()) {
                ids.push(id.clone());
                xs.push(x);
                ys.push(y);
            }
        }
        (ids, xs, ys)
    }
}

/// Pearson correlation of two equal-length slices.
pub fn pearson_slices(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} vs {} values",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(Error::InsufficientOverlap { found: xs.len() });
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(Error::ZeroVariance { which: "first" });
    }
    if syy == 0.0 {
        return Err(Error::ZeroVariance { which: "second" });
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Pearson r over the ids the two series share.
pub fn pearson(xs: &ScoreSeries, ys: &ScoreSeries) -> Result<f64> {
    let (_, a, b) = xs.align(ys);
    pearson_slices(&a, &b)
}

/// Label 0 below `threshold`, 1 at or above it.
pub fn threshold_labels(scores: &ScoreSeries, threshold: f64) -> LabeledPartition {
    let raw: Vec<usize> = scores
        .values()
        .iter()
        .map(|&s| usize::from(s >= threshold))
        .collect();
    // keep 0/1 semantic labels rather than first-appearance renumbering
    LabeledPartition {
        n_clusters: raw.iter().max().map_or(0, |&m| m + 1),
        labels: raw,
    }
}

/// Engagement-weighted mean of scored sources per user. Users without any
/// engagement on a scored source are left out.
pub fn avg_content_truth(c: &EngagementMatrix, source_scores: &ScoreSeries) -> ScoreSeries {
    let scored: BTreeMap<usize, f64> = source_scores
        .ids()
        .iter()
        .zip(source_scores.values())
        .filter_map(|(id, &v)| c.sources().get(id).map(|j| (j, v)))
        .collect();
    let mut ids = Vec::new();
    let mut values = Vec::new();
    for (u, row) in c.entries().rows().into_iter().enumerate() {
        let (mut num, mut den) = (0.0, 0.0);
        for (&j, &score) in &scored {
            num += row[j] * score;
            den += row[j];
        }
        if den > 0.0 {
            ids.push(c.users().ids()[u].clone());
            values.push(num / den);
        }
    }
    ScoreSeries { ids, values }
}

/// Item counts behind an evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coverage {
    pub predicted: usize,
    pub truth: usize,
    pub common: usize,
}

/// Clustering and correlation summary for one target population.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub method: String,
    pub target: String,
    pub purity: f64,
    pub ari: f64,
    pub ami: f64,
    pub nmi: f64,
    pub corr_i: Option<f64>,
    pub corr_rho: Option<f64>,
    pub coverage: Coverage,
    pub mi_normalization: String,
}

/// Compares predicted clusters (and optionally continuous scores) against a
/// ground-truth score series thresholded at `threshold`.
pub fn evaluate(
    method: &str,
    target: &str,
    pred_ids: &[String],
    pred_labels: &[usize],
    pred_ideology: Option<&[f64]>,
    truth: &ScoreSeries,
    threshold: f64,
) -> Result<EvaluationReport> {
    if pred_ids.len() != pred_labels.len() {
        return Err(Error::DimensionMismatch("ids and labels differ in length".into()));
    }
    let truth_map = truth.to_map();
    let mut labels = Vec::new();
    let mut truth_scores = Vec::new();
    let mut pred_scores = Vec::new();
    for (i, id) in pred_ids.iter().enumerate() {
        if let Some(&t) = truth_map.get(id.as_str()) {
            labels.push(pred_labels[i]);
            truth_scores.push(t);
            if let Some(p) = pred_ideology {
                pred_scores.push(p[i]);
            }
        }
    }
    let common = labels.len();
    if common < 2 {
        return Err(Error::InsufficientOverlap { found: common });
    }
    let pred = LabeledPartition::new(&labels);
    let truth_part = LabeledPartition::new(
        &truth_scores
            .iter()
            .map(|&s| usize::from(s >= threshold))
            .collect::<Vec<_>>(),
    );
    let mi = mutual_information_scores(&pred, &truth_part)?;
    let corr_i = match pred_ideology {
        Some(_) => Some(pearson_slices(&pred_scores, &truth_scores)?),
        None => None,
    };
    Ok(EvaluationReport {
        method: method.to_string(),
        target: target.to_string(),
        purity: purity(&pred, &truth_part)?,
        ari: adjusted_rand_index(&pred, &truth_part)?,
        ami: mi.ami,
        nmi: mi.nmi,
        corr_i,
        corr_rho: None,
        coverage: Coverage {
            predicted: pred_ids.len(),
            truth: truth.len(),
            common,
        },
        mi_normalization: MI_NORMALIZATION.to_string(),
    })
}
