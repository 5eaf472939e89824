//! Phylogenetic signal statistics.
//!
//! [`blomberg_k`] scales the observed ratio of tip-space to
//! phylogenetically-whitened mean squared error against its Brownian-motion
//! expectation; its significance test compares the variance of independent
//! contrasts against tip-shuffled permutations. [`fritz_purvis_d`] places an
//! observed sum of sister differences for a binary character between two
//! simulated baselines: random shuffles (D = 1) and threshold-binarized
//! Brownian evolution (D = 0).

mod d;
mod k;

pub use d::{classify_d, fritz_purvis_d, sum_of_differences, DClass, DResult};
pub use k::{blomberg_k, k_permutation_test, phylo_mean, KEngine, KResult, PermutationOptions};

use thiserror::Error;

use crate::evolve::EvolveError;
use crate::tree::TreeError;

#[derive(Debug, Error)]
pub enum SignalError {
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Evolve(#[from] EvolveError),
    #[error("values are constant; the statistic is undefined")]
    ConstantValues,
    #[error("binary values must be 0 or 1, found {0}")]
    NonBinary(f64),
    #[error("binary values must include at least one 0 and one 1")]
    NoVariation,
    #[error("need at least one permutation")]
    NoPermutations,
    #[error("tip labels do not match between tree and covariance matrix")]
    LabelMismatch,
    #[error("the two null distributions coincide; D is undefined")]
    DegenerateNull,
}
