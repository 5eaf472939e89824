//! Deterministic generators for trees and wordlist corpora.
//!
//! These feed the calibration sweeps and benchmark fixtures: a pure-birth
//! (Yule) tree simulator, perfectly balanced trees, and a synthetic
//! wordlist corpus whose lexicon-size distribution mimics field wordlists
//! (a few hundred to a few thousand entries, strongly right-skewed).

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::chars::{Doculect, SegmentedForm};
use crate::evolve::seeded_rng;
use crate::tree::{Node, PhyloTree};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("need at least 2 tips, asked for {0}")]
    TooFewTips(usize),
    #[error("birth rate must be positive, got {0}")]
    BadRate(f64),
    #[error("expected {expected} labels, got {found}")]
    BadLabelCount { expected: usize, found: usize },
    #[error("tree construction failed: {0}")]
    Tree(#[from] crate::tree::TreeError),
}

/// Default tip labels `t001`, `t002`, ...
pub fn tip_labels(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("t{i:03}")).collect()
}

/// Doculect ids `d001`, `d002`, ...
pub fn doculect_ids(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("d{i:03}")).collect()
}

/// A pure-birth tree: lineages split at rate `birth_rate` per lineage, and
/// the process runs one extra waiting time past the last split so every tip
/// branch has positive length. The tree is ultrametric and bifurcating.
pub fn yule_tree(
    n_tips: usize,
    birth_rate: f64,
    seed: u64,
    labels: Option<&[String]>,
) -> Result<PhyloTree, SynthError> {
    if n_tips < 2 {
        return Err(SynthError::TooFewTips(n_tips));
    }
    if !(birth_rate > 0.0) {
        return Err(SynthError::BadRate(birth_rate));
    }
    if let Some(ls) = labels {
        if ls.len() != n_tips {
            return Err(SynthError::BadLabelCount {
                expected: n_tips,
                found: ls.len(),
            });
        }
    }
    let mut rng = seeded_rng(seed);

    let mut nodes = vec![Node {
        parent: None,
        children: Vec::new(),
        branch_length: 0.0,
        label: None,
    }];
    // Active lineages: (node id awaiting its length, time its edge began).
    let mut active: Vec<(usize, f64)> = Vec::new();
    let mut time = 0.0f64;
    for _ in 0..2 {
        let id = nodes.len();
        nodes.push(Node {
            parent: Some(0),
            children: Vec::new(),
            branch_length: 0.0,
            label: None,
        });
        nodes[0].children.push(id);
        active.push((id, 0.0));
    }

    while active.len() < n_tips {
        let k = active.len() as f64;
        let wait = -rng.random::<f64>().ln() / (birth_rate * k);
        time += wait;
        let pick = rng.random_range(0..active.len());
        let (node, start) = active.swap_remove(pick);
        nodes[node].branch_length = time - start;
        for _ in 0..2 {
            let id = nodes.len();
            nodes.push(Node {
                parent: Some(node),
                children: Vec::new(),
                branch_length: 0.0,
                label: None,
            });
            nodes[node].children.push(id);
            active.push((id, time));
        }
    }
    // One more epoch so no tip sits exactly at the last split.
    let k = active.len() as f64;
    time += -rng.random::<f64>().ln() / (birth_rate * k);

    // swap_remove scrambled the order; fix tip order by node id.
    active.sort_by_key(|&(id, _)| id);
    let default_labels;
    let labels = match labels {
        Some(ls) => ls,
        None => {
            default_labels = tip_labels(n_tips);
            &default_labels
        }
    };
    for ((node, start), label) in active.into_iter().zip(labels) {
        nodes[node].branch_length = time - start;
        nodes[node].label = Some(label.clone());
    }

    Ok(PhyloTree::from_nodes(nodes, 0)?)
}

/// A birth tree observed under incomplete sampling: run the pure-birth
/// process out to `n_lineages` tips, then keep a uniform random subset of
/// `n_tips`. Sampling prunes away most of the process's newest sister
/// pairs, which is how study phylogenies relate to the underlying birth
/// process and keeps terminal branches bounded away from zero.
pub fn sampled_yule_tree(
    n_tips: usize,
    n_lineages: usize,
    birth_rate: f64,
    seed: u64,
    labels: Option<&[String]>,
) -> Result<PhyloTree, SynthError> {
    if n_lineages < n_tips {
        return Err(SynthError::BadLabelCount {
            expected: n_tips,
            found: n_lineages,
        });
    }
    let full = yule_tree(n_lineages, birth_rate, seed, None)?;
    let mut rng = seeded_rng(seed ^ 0x5A5A_5A5A);
    let mut pool: Vec<String> = full.tip_labels().iter().map(|s| s.to_string()).collect();
    let mut keep = std::collections::BTreeSet::new();
    for _ in 0..n_tips {
        let i = rng.random_range(0..pool.len());
        keep.insert(pool.swap_remove(i));
    }
    let pruned = full.prune_to_tips(&keep)?;
    let default_labels;
    let labels = match labels {
        Some(ls) => {
            if ls.len() != n_tips {
                return Err(SynthError::BadLabelCount {
                    expected: n_tips,
                    found: ls.len(),
                });
            }
            ls
        }
        None => {
            default_labels = tip_labels(n_tips);
            &default_labels
        }
    };
    Ok(pruned.with_tip_labels(labels)?)
}

/// A perfectly balanced bifurcating tree with 2^depth tips and unit-ish
/// branch lengths everywhere.
pub fn balanced_tree(
    depth: u32,
    branch_length: f64,
    labels: Option<&[String]>,
) -> Result<PhyloTree, SynthError> {
    let n_tips = 1usize << depth;
    if n_tips < 2 {
        return Err(SynthError::TooFewTips(n_tips));
    }
    if let Some(ls) = labels {
        if ls.len() != n_tips {
            return Err(SynthError::BadLabelCount {
                expected: n_tips,
                found: ls.len(),
            });
        }
    }
    let default_labels;
    let labels = match labels {
        Some(ls) => ls,
        None => {
            default_labels = tip_labels(n_tips);
            &default_labels
        }
    };

    let mut nodes = vec![Node {
        parent: None,
        children: Vec::new(),
        branch_length: 0.0,
        label: None,
    }];
    let mut frontier = vec![0usize];
    for level in 0..depth {
        let mut next = Vec::with_capacity(frontier.len() * 2);
        for &parent in &frontier {
            for _ in 0..2 {
                let id = nodes.len();
                nodes.push(Node {
                    parent: Some(parent),
                    children: Vec::new(),
                    branch_length,
                    label: None,
                });
                nodes[parent].children.push(id);
                next.push(id);
            }
        }
        frontier = next;
        let _ = level;
    }
    for (tip, label) in frontier.iter().zip(labels) {
        nodes[*tip].label = Some(label.clone());
    }
    Ok(PhyloTree::from_nodes(nodes, 0)?)
}

/// Knobs for [`synthetic_corpus`].
#[derive(Debug, Clone)]
pub struct CorpusOptions {
    /// Size of the shared segment pool.
    pub pool_size: usize,
    /// Inventory size range per doculect (inclusive).
    pub inventory_range: (usize, usize),
    /// Form length range in segments (inclusive).
    pub form_length_range: (usize, usize),
    /// Lexicon sizes are drawn from exp(Normal(mu, sigma)) and clipped.
    pub log_size_mu: f64,
    pub log_size_sigma: f64,
    pub size_range: (u64, u64),
}

impl Default for CorpusOptions {
    fn default() -> Self {
        // Size parameters tuned so the clipped lognormal lands near
        // mean 1112 / SD 916 with min 250 and max 4955.
        CorpusOptions {
            pool_size: 30,
            inventory_range: (14, 26),
            form_length_range: (2, 8),
            log_size_mu: 6.7192,
            log_size_sigma: 0.7863,
            size_range: (250, 4955),
        }
    }
}

/// Segment pool used by the synthetic corpus (plausible one- and
/// two-character tokens).
fn segment_pool(n: usize) -> Vec<String> {
    const BASE: [&str; 30] = [
        "p", "t", "k", "c", "th", "m", "n", "ng", "ny", "nh", "l", "ly", "r", "rr", "rt", "rn",
        "rl", "w", "y", "a", "i", "u", "e", "o", "aa", "ii", "uu", "b", "d", "g",
    ];
    BASE.iter().take(n).map(|s| s.to_string()).collect()
}

/// Deterministic synthetic wordlists: each doculect gets a random subset of
/// the segment pool as its inventory and draws forms from it. Ids come from
/// [`doculect_ids`] unless supplied.
pub fn synthetic_corpus(
    n_doculects: usize,
    seed: u64,
    opts: &CorpusOptions,
    ids: Option<&[String]>,
) -> Vec<Doculect> {
    let mut rng = seeded_rng(seed);
    let pool = segment_pool(opts.pool_size);
    let default_ids;
    let ids = match ids {
        Some(list) => list,
        None => {
            default_ids = doculect_ids(n_doculects);
            &default_ids
        }
    };

    let mut out = Vec::with_capacity(n_doculects);
    for id in ids.iter().take(n_doculects) {
        let inv_size = rng.random_range(opts.inventory_range.0..=opts.inventory_range.1);
        let mut inventory: Vec<String> = Vec::with_capacity(inv_size);
        let mut candidates: Vec<&String> = pool.iter().collect();
        for _ in 0..inv_size.min(candidates.len()) {
            let i = rng.random_range(0..candidates.len());
            inventory.push(candidates.swap_remove(i).clone());
        }

        let z: f64 = rng.sample(StandardNormal);
        let size = (opts.log_size_mu + opts.log_size_sigma * z).exp() as u64;
        let size = size.clamp(opts.size_range.0, opts.size_range.1) as usize;

        let mut forms = Vec::with_capacity(size);
        for _ in 0..size {
            let len = rng.random_range(opts.form_length_range.0..=opts.form_length_range.1);
            let segments: Vec<String> = (0..len)
                .map(|_| inventory.choose(&mut rng).unwrap().clone())
                .collect();
            forms.push(SegmentedForm::new(segments));
        }
        out.push(Doculect {
            id: id.clone(),
            forms,
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::write_newick;

    #[test]
    fn yule_shape() {
        let t = yule_tree(111, 1.0, 42, None).unwrap();
        assert_eq!(t.n_tips(), 111);
        assert_eq!(t.n_nodes(), 2 * 111 - 1);
        // ultrametric: all root-to-tip distances equal
        let d0 = t.root_to_tip_distance("t001").unwrap();
        for label in t.tip_labels() {
            let d = t.root_to_tip_distance(label).unwrap();
            assert!((d - d0).abs() < 1e-9, "{label}: {d} vs {d0}");
        }
    }

    #[test]
    fn yule_is_deterministic() {
        let a = yule_tree(20, 1.0, 7, None).unwrap();
        let b = yule_tree(20, 1.0, 7, None).unwrap();
        assert_eq!(write_newick(&a), write_newick(&b));
        let c = yule_tree(20, 1.0, 8, None).unwrap();
        assert_ne!(write_newick(&a), write_newick(&c));
    }

    #[test]
    fn yule_round_trips_through_newick() {
        let t = yule_tree(111, 1.0, 9, None).unwrap();
        let text = write_newick(&t);
        let back = crate::tree::parse_newick(&text).unwrap();
        assert_eq!(write_newick(&back), text);
        assert_eq!(back.n_tips(), 111);
    }

    #[test]
    fn sampled_yule_shape() {
        let t = sampled_yule_tree(40, 120, 1.0, 11, None).unwrap();
        assert_eq!(t.n_tips(), 40);
        assert!(t.is_binary());
        assert_eq!(t.tip_labels()[0], "t001");
        // ultrametric survives pruning
        let d0 = t.root_to_tip_distance("t001").unwrap();
        for label in t.tip_labels() {
            assert!((t.root_to_tip_distance(label).unwrap() - d0).abs() < 1e-9);
        }
        assert!(sampled_yule_tree(40, 30, 1.0, 11, None).is_err());
    }

    #[test]
    fn balanced_shape() {
        let t = balanced_tree(6, 1.0, None).unwrap();
        assert_eq!(t.n_tips(), 64);
        assert!(t.is_binary());
        assert_eq!(t.root_to_tip_distance("t001").unwrap(), 6.0);
    }

    #[test]
    fn corpus_is_deterministic_and_in_range() {
        let ds = synthetic_corpus(20, 1, &CorpusOptions::default(), None);
        let ds2 = synthetic_corpus(20, 1, &CorpusOptions::default(), None);
        assert_eq!(ds.len(), 20);
        for (a, b) in ds.iter().zip(&ds2) {
            assert_eq!(a.id, b.id);
            assert_eq!(a.forms, b.forms);
        }
        for d in &ds {
            assert!((250..=4955).contains(&d.forms.len()));
        }
    }
}
