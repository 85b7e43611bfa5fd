//! Reading input files into aligned matrices.

use std::collections::BTreeSet;
use std::path::Path;

use ideofactor::data::{build_interaction_matrix, edge_user_ids, EngagementMatrix, GraphMode, IdIndex, InteractionMatrix};
use ideofactor::io::{parse_edge_list, parse_engagement, parse_follow_list, read_text, write_instance};
use ideofactor::synthetic::{generate, SyntheticSpec};
use ndarray::Array2;
use sha2::{Digest, Sha256};

use crate::error::{CliError, Context};
use crate::{GenerateArgs, InputArgs};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// File contents and their hash.
pub fn read_hashed(path: &Path) -> Result<(String, String), CliError> {
    let text = read_text(path).in_file(path)?;
    let hash = sha256_hex(text.as_bytes());
    Ok((text, hash))
}

pub struct Inputs {
    pub a: Option<InteractionMatrix>,
    pub c: Option<EngagementMatrix>,
    pub users: IdIndex,
    pub sources: Vec<String>,
    /// `(role, path, sha256)` for each file read.
    pub files: Vec<(String, String, String)>,
}

// Re-indexes C so its sources are in sorted order.
fn sort_sources(c: EngagementMatrix) -> Result<EngagementMatrix, CliError> {
    let ids = c.sources().ids().to_vec();
    let mut order: Vec<usize> = (0..ids.len()).collect();
    order.sort_by(|&x, &y| ids[x].cmp(&ids[y]));
    let old = c.entries();
    let sorted = Array2::from_shape_fn(old.dim(), |(i, j)| old[[i, order[j]]]);
    let index = IdIndex::from_ids(order.iter().map(|&j| ids[j].clone()))?;
    Ok(EngagementMatrix::from_dense(sorted, c.users().clone(), index)?)
}

/// Loads whichever of the edge and engagement files are given. Users are the
/// sorted union of ids from both files and sources are sorted, so the row
/// order does not depend on record order.
pub fn load_inputs(args: &InputArgs) -> Result<Inputs, CliError> {
    let mut files = Vec::new();
    let mut user_set = BTreeSet::new();
    let edges = match &args.edges {
        Some(p) => {
            let (text, hash) = read_hashed(p)?;
            files.push(("edges".into(), p.display().to_string(), hash));
            let e = match args.graph_mode {
                GraphMode::FollowCommonNeighbors => parse_follow_list(&text),
                _ => parse_edge_list(&text),
            }
            .in_file(p)?;
            user_set.extend(edge_user_ids(&e, args.graph_mode));
            Some(e)
        }
        None => None,
    };
    let records = match &args.engagement {
        Some(p) => {
            let (text, hash) = read_hashed(p)?;
            files.push(("engagement".into(), p.display().to_string(), hash));
            let r = parse_engagement(&text).in_file(p)?;
            user_set.extend(r.iter().map(|e| e.src.clone()));
            Some(r)
        }
        None => None,
    };
    if edges.is_none() && records.is_none() {
        return Err(CliError::Usage("at least one of --edges and --engagement is required".into()));
    }
    let users = IdIndex::from_ids(user_set)?;
    let a = match (&edges, &args.edges) {
        (Some(e), Some(p)) => Some(build_interaction_matrix(e, args.graph_mode, Some(&users)).in_file(p)?),
        _ => None,
    };
    let c = match (&records, &args.engagement) {
        (Some(r), Some(p)) => Some(sort_sources(EngagementMatrix::from_records(r, Some(&users)).in_file(p)?)?),
        _ => None,
    };
    let sources = c.as_ref().map(|c| c.sources().ids().to_vec()).unwrap_or_default();
    Ok(Inputs {
        a,
        c,
        users,
        sources,
        files,
    })
}

/// Engagement matrix from a file, users in sorted order.
pub fn load_engagement(path: &Path) -> Result<EngagementMatrix, CliError> {
    let args = InputArgs {
        edges: None,
        graph_mode: GraphMode::RetweetCount,
        engagement: Some(path.to_path_buf()),
    };
    Ok(load_inputs(&args)?.c.expect("engagement given"))
}

pub fn cmd_generate(args: &GenerateArgs) -> Result<(), CliError> {
    let spec = SyntheticSpec {
        n_users: args.n_users,
        m_sources: args.m_sources,
        block_fraction: args.block_fraction,
        p_in: args.p_in,
        p_out: args.p_out,
        lambda_in: args.lambda_in,
        lambda_out: args.lambda_out,
        ideology_spread: args.ideology_spread,
        seed: args.seed,
    };
    let inst = generate(&spec).context("generate")?;
    write_instance(&inst, &args.out).in_file(&args.out)
}
