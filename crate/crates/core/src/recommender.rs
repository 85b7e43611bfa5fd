//! Tolerance-box content recommendation in the ideology–popularity plane.
//!
//! A user is placed at `(ideology, popularity)`. Sources inside the box
//! `|Δideology| ≤ θ`, `|Δpopularity| ≤ δ` are weighted by the product of two
//! independent Gaussian densities centred on the user and drawn without
//! replacement.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scoring::ScoredEntity;

/// Standard deviation of each Gaussian as a fraction of its tolerance, so the
/// box edge sits at two standard deviations.
pub const SIGMA_FACTOR: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceBox {
    pub theta: f64,
    pub delta: f64,
}

impl ToleranceBox {
    pub fn new(theta: f64, delta: f64) -> Result<Self> {
        for (name, v) in [("theta", theta), ("delta", delta)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        Ok(ToleranceBox { theta, delta })
    }

    pub fn contains(&self, center: (f64, f64), point: (f64, f64)) -> bool {
        (point.0 - center.0).abs() <= self.theta && (point.1 - center.1).abs() <= self.delta
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub source_id: String,
    pub ideology: f64,
    pub popularity: f64,
    pub sample_weight: f64,
    /// The user has never engaged with this source.
    pub novel: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecommendOptions {
    pub count: usize,
    pub exclude_consumed: bool,
    /// When false every source is a candidate and only the Gaussian weights
    /// matter. Requires positive tolerances.
    pub truncate: bool,
    pub seed: u64,
}

impl Default for RecommendOptions {
    fn default() -> Self {
        RecommendOptions {
            count: 10,
            exclude_consumed: true,
            truncate: true,
            seed: 0,
        }
    }
}

fn normal_pdf(x: f64, mean: f64, sigma: f64) -> f64 {
    let z = (x - mean) / sigma;
    (-0.5 * z * z).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
}

// A zero tolerance collapses the box onto the user's coordinate; every
// surviving candidate then sits at the mode, so the axis contributes a
// constant factor.
fn axis_density(x: f64, mean: f64, tolerance: f64) -> f64 {
    if tolerance == 0.0 {
        1.0
    } else {
        normal_pdf(x, mean, SIGMA_FACTOR * tolerance)
    }
}

fn position(e: &ScoredEntity) -> Result<(f64, f64)> {
    match (e.ideology, e.popularity) {
        (Some(i), Some(p)) => Ok((i, p)),
        _ => Err(Error::InvalidInput(format!(
            "{} `{}` has no ideology/popularity score",
            e.kind, e.id
        ))),
    }
}

/// Sources eligible for sampling and their unnormalized weights, in source
/// order.
pub fn candidate_weights(
    user: &ScoredEntity,
    sources: &[ScoredEntity],
    tolerance: ToleranceBox,
    consumed: Option<&[f64]>,
    options: &RecommendOptions,
) -> Result<Vec<(usize, f64)>> {
    let center = position(user)?;
    if let Some(row) = consumed {
        if row.len() != sources.len() {
            return Err(Error::DimensionMismatch(format!(
                "engagement row has {} entries for {} sources",
                row.len(),
                sources.len()
            )));
        }
    }
    if !options.truncate && (tolerance.theta == 0.0 || tolerance.delta == 0.0) {
        return Err(Error::InvalidConfig(
            "untruncated sampling needs positive theta and delta".into(),
        ));
    }
    let mut out = Vec::new();
    for (j, s) in sources.iter().enumerate() {
        let p = position(s)?;
        if options.exclude_consumed && consumed.is_some_and(|row| row[j] > 0.0) {
            continue;
        }
        if options.truncate && !tolerance.contains(center, p) {
            continue;
        }
        let w = axis_density(p.0, center.0, tolerance.theta) * axis_density(p.1, center.1, tolerance.delta);
        if w > 0.0 {
            out.push((j, w));
        }
    }
    Ok(out)
}

/// Draws up to `options.count` sources without replacement, each draw
/// proportional to the remaining weights. Returns every candidate when there
/// are fewer than `count`.
pub fn recommend(
    user: &ScoredEntity,
    sources: &[ScoredEntity],
    tolerance: ToleranceBox,
    consumed: Option<&[f64]>,
    options: &RecommendOptions,
) -> Result<Vec<Recommendation>> {
    if options.count == 0 {
        return Err(Error::InvalidConfig("count must be at least 1".into()));
    }
    let candidates = candidate_weights(user, sources, tolerance, consumed, options)?;
    if candidates.is_empty() {
        return Ok(Vec::new());
    }
    let draws = options.count.min(candidates.len());
    let weights: Vec<f64> = candidates.iter().map(|c| c.1).collect();
    let mut dist = WeightedIndex::new(&weights).map_err(|e| Error::InvalidInput(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut picked = Vec::with_capacity(draws);
    for d in 0..draws {
        let i = dist.sample(&mut rng);
        picked.push(candidates[i]);
        if d + 1 < draws {
            dist.update_weights(&[(i, &0.0)])
                .map_err(|e| Error::InvalidInput(e.to_string()))?;
        }
    }
    picked
        .into_iter()
        .map(|(j, w)| {
            let s = &sources[j];
            let (ideology, popularity) = position(s)?;
            Ok(Recommendation {
                source_id: s.id.clone(),
                ideology,
                popularity,
                sample_weight: w,
                novel: consumed.is_none_or(|row| row[j] == 0.0),
            })
        })
        .collect()
}

/// Engagement-weighted mean popularity of the scored sources a user has
/// consumed.
pub fn user_popularity_position(c_row: &[f64], sources: &[ScoredEntity]) -> Result<f64> {
    if c_row.len() != sources.len() {
        return Err(Error::DimensionMismatch(format!(
            "engagement row has {} entries for {} sources",
            c_row.len(),
            sources.len()
        )));
    }
    let (mut num, mut den) = (0.0, 0.0);
    for (&c, s) in c_row.iter().zip(sources) {
        if let Some(p) = s.popularity {
            if c > 0.0 {
                num += c * p;
                den += c;
            }
        }
    }
    if den == 0.0 {
        return Err(Error::Unplaceable("no engagement with a scored source".into()));
    }
    Ok(num / den)
}

/// Median popularity over scored sources; the fallback position for users
/// without engagement.
pub fn median_source_popularity(sources: &[ScoredEntity]) -> Option<f64> {
    let mut p: Vec<f64> = sources.iter().filter_map(|s| s.popularity).collect();
    if p.is_empty() {
        return None;
    }
    p.sort_by(f64::total_cmp);
    let mid = p.len() / 2;
    Some(if p.len() % 2 == 1 {
        p[mid]
    } else {
        0.5 * (p[mid - 1] + p[mid])
    })
}

/// Copy of `user` with its popularity replaced by its position among the
/// sources it consumes (or the median fallback). The flag reports whether
/// the fallback was used.
pub fn place_user(user: &ScoredEntity, c_row: &[f64], sources: &[ScoredEntity]) -> Result<(ScoredEntity, bool)> {
    let (popularity, fallback) = match user_popularity_position(c_row, sources) {
        Ok(p) => (p, false),
        Err(Error::Unplaceable(_)) => (median_source_popularity(sources).unwrap_or(0.0), true),
        Err(e) => return Err(e),
    };
    let mut placed = user.clone();
    placed.popularity = Some(popularity);
    Ok((placed, fallback))
}
