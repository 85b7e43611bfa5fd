//! Joint non-negative tri-factorization of a user–user interaction matrix and
//! a user–source engagement matrix into a shared two-sided latent space, with
//! ideology/popularity scoring, clustering metrics, planted-instance
//! generation and tolerance-box recommendation sampling.

pub mod baselines;
pub mod data;
pub mod error;
pub mod export;
pub mod graph;
pub mod io;
pub mod metrics;
pub mod recommender;
pub mod scoring;
pub mod solver;
pub mod synthetic;

pub use error::{Error, Result};
