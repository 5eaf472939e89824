//! Phonotactic characters and phylogenetic signal.
//!
//! This crate extracts phonotactic characters (biphone presence, segment
//! transition frequencies, natural-class transition frequencies) from
//! segmented wordlists and quantifies how strongly those characters track a
//! reference phylogeny:
//!
//! - [`tree`] — rooted trees with branch lengths: Newick parsing/writing,
//!   pruning, and the tip variance-covariance matrix.
//! - [`chars`] — wordlist ingestion and character matrix construction,
//!   filtering, skew and power-transform utilities.
//! - [`evolve`] — Brownian-motion trait simulation, signal/noise mixing,
//!   threshold binarization, and phylogenetic independent contrasts.
//! - [`signal`] — Blomberg's K with its contrast-variance randomization test
//!   and Fritz & Purvis' D with its dual permutation nulls.
//! - [`stats`] — the comparison statistics used to summarize and contrast
//!   result distributions (Welch t, KS, one-way ANOVA, Anderson-Darling
//!   k-sample, Pearson r, Shapiro-Wilk W).
//! - [`synth`] — deterministic generators for trees and wordlist corpora
//!   used by the calibration harnesses and benchmarks.
//!
//! All stochastic operations take an explicit seed and are reproducible
//! bit-for-bit; parallel sweeps derive one RNG stream per job so results do
//! not depend on scheduling.

pub mod chars;
pub mod evolve;
pub mod signal;
pub mod stats;
pub mod synth;
pub mod tree;

pub use chars::{CharKey, CharKind, CharacterMatrix, ClassMap, Doculect, Scheme, SegmentedForm};
pub use evolve::{Contrasts, TipValues};
pub use signal::{DClass, DResult, KResult};
pub use tree::{PhyloTree, VcvMatrix};
