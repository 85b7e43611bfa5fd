//! Planted two-block instances with known user/source sides and continuous
//! ideologies.

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::data::{EngagementMatrix, GraphMode, IdIndex, InteractionMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n_users: usize,
    pub m_sources: usize,
    /// Share of users and sources on the block-0 (liberal) side.
    pub block_fraction: f64,
    pub p_in: f64,
    pub p_out: f64,
    pub lambda_in: f64,
    pub lambda_out: f64,
    /// Half-width of the uniform noise around the block centers.
    pub ideology_spread: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            n_users: 200,
            m_sources: 60,
            block_fraction: 0.5,
            p_in: 0.10,
            p_out: 0.01,
            lambda_in: 3.0,
            lambda_out: 0.2,
            ideology_spread: 0.15,
            seed: 0,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if self.n_users < 1 || self.m_sources < 1 {
            return bad("need at least one user and one source");
        }
        if !(self.block_fraction > 0.0 && self.block_fraction < 1.0) {
            return bad("block_fraction must lie in (0, 1)");
        }
        if !(0.0 <= self.p_out && self.p_out <= self.p_in && self.p_in <= 1.0) {
            return bad("need 0 <= p_out <= p_in <= 1");
        }
        if !(0.0 <= self.lambda_out && self.lambda_out <= self.lambda_in && self.lambda_in.is_finite()) {
            return bad("need 0 <= lambda_out <= lambda_in");
        }
        if !(0.0 <= self.ideology_spread && self.ideology_spread < 0.5) {
            return bad("ideology_spread must lie in [0, 0.5)");
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticInstance {
    pub a: InteractionMatrix,
    pub c: EngagementMatrix,
    pub user_blocks: Vec<usize>,
    pub source_blocks: Vec<usize>,
    pub user_ideology_true: Vec<f64>,
    pub source_ideology_true: Vec<f64>,
}

pub const BLOCK_CENTERS: [f64; 2] = [0.25, 0.75];

fn assign_blocks(count: usize, fraction: f64, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let zeros = ((count as f64) * fraction).round() as usize;
    let mut blocks: Vec<usize> = (0..count).map(|i| usize::from(i >= zeros)).collect();
    blocks.shuffle(rng);
    blocks
}

fn planted_ideology(blocks: &[usize], spread: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    blocks
        .iter()
        .map(|&b| {
            let noise = if spread > 0.0 {
                rng.random_range(-spread..spread)
            } else {
                0.0
            };
            BLOCK_CENTERS[b] + noise
        })
        .collect()
}

fn poisson_draw(lambda: f64, rng: &mut ChaCha8Rng) -> f64 {
    if lambda <= 0.0 {
        return 0.0;
    }
    Poisson::new(lambda).expect("positive finite rate").sample(rng)
}

pub fn user_id(i: usize) -> String {
    format!("u{i:05}")
}

pub fn source_id(j: usize) -> String {
    format!("s{j:04}")
}

/// Draws an instance. Undirected user–user edges of weight 1 appear with
/// probability `p_in` inside a block and `p_out` across; engagement counts
/// are Poisson with rate `lambda_in` for same-side user–source pairs and
/// `lambda_out` otherwise.
pub fn generate(spec: &SyntheticSpec) -> Result<SyntheticInstance> {
    spec.validate()?;
    let (n, m) = (spec.n_users, spec.m_sources);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let user_blocks = assign_blocks(n, spec.block_fraction, &mut rng);
    let source_blocks = assign_blocks(m, spec.block_fraction, &mut rng);
    let user_ideology_true = planted_ideology(&user_blocks, spec.ideology_spread, &mut rng);
    let source_ideology_true = planted_ideology(&source_blocks, spec.ideology_spread, &mut rng);

    let mut a = Array2::zeros((n, n));
    for i in 0..n {
        for j in (i + 1)..n {
            let p = if user_blocks[i] == user_blocks[j] {
                spec.p_in
            } else {
                spec.p_out
            };
            if rng.random_bool(p) {
                a[[i, j]] = 1.0;
                a[[j, i]] = 1.0;
            }
        }
    }

    let mut c = Array2::zeros((n, m));
    for i in 0..n {
        for j in 0..m {
            let lambda = if user_blocks[i] == source_blocks[j] {
                spec.lambda_in
            } else {
                spec.lambda_out
            };
            c[[i, j]] = poisson_draw(lambda, &mut rng);
        }
    }

    let users = IdIndex::from_ids((0..n).map(user_id))?;
    let sources = IdIndex::from_ids((0..m).map(source_id))?;
    Ok(SyntheticInstance {
        a: InteractionMatrix::from_dense(a, users.clone(), GraphMode::Raw)?,
        c: EngagementMatrix::from_dense(c, users, sources)?,
        user_blocks,
        source_blocks,
        user_ideology_true,
        source_ideology_true,
    })
}

/// Empirical edge density of `A` inside blocks and across blocks.
pub fn block_densities(a: &Array2<f64>, blocks: &[usize]) -> (f64, f64) {
    let n = blocks.len();
    let (mut within, mut within_pairs, mut across, mut across_pairs) = (0.0, 0usize, 0.0, 0usize);
    for i in 0..n {
        for j in (i + 1)..n {
            let edge = if a[[i, j]] > 0.0 { 1.0 } else { 0.0 };
            if blocks[i] == blocks[j] {
                within += edge;
                within_pairs += 1;
            } else {
                across += edge;
                across_pairs += 1;
            }
        }
    }
    (
        within / within_pairs.max(1) as f64,
        across / across_pairs.max(1) as f64,
    )
}
