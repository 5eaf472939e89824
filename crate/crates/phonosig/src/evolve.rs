//! Trait evolution on trees and phylogenetic independent contrasts.
//!
//! Simulation draws are made in a fixed preorder traversal, so every
//! operation is reproducible bit-for-bit given its seed. Sweeps should give
//! each job its own stream via [`derive_seed`] so results do not depend on
//! scheduling or worker count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::tree::{NodeId, PhyloTree};

#[derive(Debug, Error)]
pub enum EvolveError {
    #[error("values carry {found} tips but the tree has {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("tip order does not match the tree at position {0}")]
    TipOrderMismatch(usize),
    #[error("value for tip {label:?} is not finite")]
    NonFinite { label: String },
    #[error("node {0} is a polytomy; contrasts require a bifurcating tree")]
    Polytomy(NodeId),
    #[error("both daughter branches of node {0} have zero length")]
    ZeroBranchPair(NodeId),
    #[error("no contrasts (tree has fewer than two tips)")]
    NoContrasts,
    #[error("sigma2 must be positive, got {0}")]
    BadSigma(f64),
    #[error("mixing proportion must lie in [0, 1], got {0}")]
    BadProportion(f64),
    #[error("n_ones {n_ones} exceeds tip count {tips}")]
    TooManyOnes { n_ones: usize, tips: usize },
}

/// One value per tip, in the tree's tip order.
#[derive(Debug, Clone, PartialEq)]
pub struct TipValues {
    labels: Vec<String>,
    values: Vec<f64>,
}

impl TipValues {
    /// Values aligned to `tree`'s left-to-right tip order.
    pub fn for_tree(tree: &PhyloTree, values: Vec<f64>) -> Result<Self, EvolveError> {
        if values.len() != tree.n_tips() {
            return Err(EvolveError::LengthMismatch {
                expected: tree.n_tips(),
                found: values.len(),
            });
        }
        let labels: Vec<String> = tree.tip_labels().iter().map(|s| s.to_string()).collect();
        for (label, v) in labels.iter().zip(values.iter()) {
            if !v.is_finite() {
                return Err(EvolveError::NonFinite {
                    label: label.clone(),
                });
            }
        }
        Ok(TipValues { labels, values })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn check_tree(&self, tree: &PhyloTree) -> Result<(), EvolveError> {
        if self.len() != tree.n_tips() {
            return Err(EvolveError::LengthMismatch {
                expected: tree.n_tips(),
                found: self.len(),
            });
        }
        for (i, (label, tip)) in self.labels.iter().zip(tree.tip_labels()).enumerate() {
            if label != tip {
                return Err(EvolveError::TipOrderMismatch(i));
            }
        }
        Ok(())
    }
}

/// Standardized contrasts, one per bifurcating internal node.
#[derive(Debug, Clone, PartialEq)]
pub struct Contrasts(pub Vec<f64>);

impl Contrasts {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// splitmix64 step; derives independent streams from (master seed, index).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Brownian motion along the tree: each node's value is its parent's plus a
/// Normal(0, sigma2 * branch length) step; tip values are returned.
pub fn simulate_bm(
    tree: &PhyloTree,
    sigma2: f64,
    root_value: f64,
    seed: u64,
) -> Result<TipValues, EvolveError> {
    simulate_bm_with(tree, sigma2, root_value, &mut seeded_rng(seed))
}

pub fn simulate_bm_with<R: Rng>(
    tree: &PhyloTree,
    sigma2: f64,
    root_value: f64,
    rng: &mut R,
) -> Result<TipValues, EvolveError> {
    if !(sigma2 > 0.0) {
        return Err(EvolveError::BadSigma(sigma2));
    }
    let mut node_values = vec![0.0f64; tree.n_nodes()];
    node_values[tree.root()] = root_value;
    // Preorder, children in stored order, so the draw sequence is fixed.
    let mut stack = vec![tree.root()];
    let mut visit = Vec::with_capacity(tree.n_nodes());
    while let Some(id) = stack.pop() {
        visit.push(id);
        for &c in tree.node(id).children.iter().rev() {
            stack.push(c);
        }
    }
    for &id in &visit {
        if id == tree.root() {
            continue;
        }
        let parent = tree.node(id).parent.expect("non-root has parent");
        let sd = (sigma2 * tree.node(id).branch_length).sqrt();
        let step: f64 = rng.sample(StandardNormal);
        node_values[id] = node_values[parent] + sd * step;
    }
    let values = tree.tip_ids().iter().map(|&t| node_values[t]).collect();
    TipValues::for_tree(tree, values)
}

fn standardize(xs: &[f64]) -> Vec<f64> {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let sd = if xs.len() > 1 {
        (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    if sd == 0.0 {
        return vec![0.0; xs.len()];
    }
    xs.iter().map(|x| (x - mean) / sd).collect()
}

/// Mix a standardized Brownian draw with standardized i.i.d. noise:
/// z = sqrt(p) * bm + sqrt(1 - p) * noise, so p is the Brownian share of
/// the variance. p = 1 is a pure (rank-preserved) Brownian trait, p = 0 is
/// pure tip-level noise.
pub fn simulate_mixed(
    tree: &PhyloTree,
    p_brownian: f64,
    seed: u64,
) -> Result<TipValues, EvolveError> {
    simulate_mixed_with(tree, p_brownian, &mut seeded_rng(seed))
}

pub fn simulate_mixed_with<R: Rng>(
    tree: &PhyloTree,
    p_brownian: f64,
    rng: &mut R,
) -> Result<TipValues, EvolveError> {
    if !(0.0..=1.0).contains(&p_brownian) {
        return Err(EvolveError::BadProportion(p_brownian));
    }
    let bm = simulate_bm_with(tree, 1.0, 0.0, rng)?;
    let noise: Vec<f64> = (0..tree.n_tips()).map(|_| rng.sample(StandardNormal)).collect();
    let bm_std = standardize(bm.values());
    let noise_std = standardize(&noise);
    let w_signal = p_brownian.sqrt();
    let w_noise = (1.0 - p_brownian).sqrt();
    let values = bm_std
        .iter()
        .zip(noise_std.iter())
        .map(|(s, e)| w_signal * s + w_noise * e)
        .collect();
    TipValues::for_tree(tree, values)
}

/// Binarize so that exactly the `n_ones` largest values become 1. Ties at
/// the threshold break by tip order (earlier tips win), so the output is
/// deterministic.
pub fn threshold_binarize(values: &TipValues, n_ones: usize) -> Result<TipValues, EvolveError> {
    let n = values.len();
    if n_ones > n {
        return Err(EvolveError::TooManyOnes { n_ones, tips: n });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values.values()[b].partial_cmp(&values.values()[a]).unwrap());
    let mut out = vec![0.0; n];
    for &i in order.iter().take(n_ones) {
        out[i] = 1.0;
    }
    Ok(TipValues {
        labels: values.labels.clone(),
        values: out,
    })
}

/// Felsenstein's independent contrasts. At each bifurcating node with
/// daughter values v1, v2 on (pruned) branches b1, b2:
/// contrast = (v1 - v2) / sqrt(b1 + b2), the node takes the weighted mean
/// (v1/b1 + v2/b2) / (1/b1 + 1/b2), and its own branch is extended by
/// b1*b2 / (b1 + b2). Unary pass-through nodes accumulate branch length;
/// polytomies are an error.
pub fn pic(tree: &PhyloTree, values: &TipValues) -> Result<Contrasts, EvolveError> {
    values.check_tree(tree)?;
    let mut val = vec![0.0f64; tree.n_nodes()];
    let mut blen = vec![0.0f64; tree.n_nodes()];
    for (&tip, &v) in tree.tip_ids().iter().zip(values.values()) {
        val[tip] = v;
    }
    let mut contrasts = Vec::with_capacity(tree.n_tips().saturating_sub(1));
    for id in tree.postorder() {
        let node = tree.node(id);
        blen[id] += node.branch_length;
        match node.children.len() {
            0 => {}
            1 => {
                let c = node.children[0];
                val[id] = val[c];
                blen[id] += blen[c];
            }
            2 => {
                let (c1, c2) = (node.children[0], node.children[1]);
                let (b1, b2) = (blen[c1], blen[c2]);
                if b1 == 0.0 && b2 == 0.0 {
                    return Err(EvolveError::ZeroBranchPair(id));
                }
                contrasts.push((val[c1] - val[c2]) / (b1 + b2).sqrt());
                // weighted mean, written to stay finite when one branch is 0
                let (w1, w2) = (b2 / (b1 + b2), b1 / (b1 + b2));
                val[id] = w1 * val[c1] + w2 * val[c2];
                blen[id] += b1 * b2 / (b1 + b2);
            }
            _ => return Err(EvolveError::Polytomy(id)),
        }
    }
    if contrasts.is_empty() {
        return Err(EvolveError::NoContrasts);
    }
    Ok(Contrasts(contrasts))
}

/// Mean squared contrast (variance around zero, not around the mean).
pub fn pic_variance(contrasts: &Contrasts) -> Result<f64, EvolveError> {
    if contrasts.is_empty() {
        return Err(EvolveError::NoContrasts);
    }
    Ok(contrasts.values().iter().map(|c| c * c).sum::<f64>() / contrasts.len() as f64)
}
