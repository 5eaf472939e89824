//! Fritz & Purvis' D for binary characters.

use crate::evolve::{seeded_rng, simulate_bm_with, threshold_binarize, TipValues};
use crate::tree::{NodeId, PhyloTree};

use super::SignalError;

/// The six possible readings of a D test at a given threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DClass {
    /// Significantly below 0: clumped even tighter than Brownian evolution.
    OverClumped,
    /// Significantly below 1, not distinguishable from 0: phylogenetic signal.
    Phylogenetic,
    /// Significantly above 0 and below 1.
    Intermediate,
    /// Significantly above 0, not distinguishable from 1: random.
    Random,
    /// Significantly above 1: more dispersed than random.
    OverDispersed,
    /// Distinguishable from neither 0 nor 1.
    Indeterminate,
}

impl DClass {
    pub fn as_str(self) -> &'static str {
        match self {
            DClass::OverClumped => "over-clumped",
            DClass::Phylogenetic => "phylogenetic",
            DClass::Intermediate => "intermediate",
            DClass::Random => "random",
            DClass::OverDispersed => "over-dispersed",
            DClass::Indeterminate => "indeterminate",
        }
    }
}

/// D with the two permutation nulls for one character. The stored sums
/// reproduce D exactly:
/// D = (sum_d_obs - mean_sum_d_brownian) / (mean_sum_d_random - mean_sum_d_brownian).
#[derive(Debug, Clone)]
pub struct DResult {
    pub key: String,
    pub d: f64,
    pub sum_d_obs: f64,
    pub mean_sum_d_random: f64,
    pub mean_sum_d_brownian: f64,
    /// Fraction of Brownian-derived D scores greater than observed D.
    pub p_d_eq_0: f64,
    /// Fraction of shuffle-derived D scores smaller than observed D.
    pub p_d_eq_1: f64,
    pub n_used: usize,
    pub n_perm: usize,
    pub classification: DClass,
}

/// Sum of sister differences for binary tip values: every internal node
/// takes the mean of its two daughters and contributes |left - right|.
/// Polytomies are rejected; a unary root (as produced by pruning) passes
/// its daughter's value through without a contribution.
pub fn sum_of_differences(tree: &PhyloTree, values: &TipValues) -> Result<f64, SignalError> {
    if values.labels() != tree.tip_labels().as_slice() {
        return Err(SignalError::LabelMismatch);
    }
    for &v in values.values() {
        if v != 0.0 && v != 1.0 {
            return Err(SignalError::NonBinary(v));
        }
    }
    sum_d_raw(tree, values.values(), &tree.postorder())
}

fn sum_d_raw(tree: &PhyloTree, values: &[f64], postorder: &[NodeId]) -> Result<f64, SignalError> {
    let mut val = vec![0.0f64; tree.n_nodes()];
    for (&tip, &v) in tree.tip_ids().iter().zip(values) {
        val[tip] = v;
    }
    let mut sum = 0.0;
    for &id in postorder {
        let children = &tree.node(id).children;
        match children.len() {
            0 => {}
            1 => val[id] = val[children[0]],
            2 => {
                let (a, b) = (val[children[0]], val[children[1]]);
                sum += (a - b).abs();
                val[id] = 0.5 * (a + b);
            }
            _ => return Err(SignalError::Evolve(crate::evolve::EvolveError::Polytomy(id))),
        }
    }
    Ok(sum)
}

/// D via its two permutation nulls: `n_perm` tip shuffles give the random
/// baseline, `n_perm` threshold-binarized Brownian simulations (sigma2 = 1;
/// the threshold keeps the observed count of 1s) give the Brownian
/// baseline. Each arm consumes its own stream derived from `seed`.
pub fn fritz_purvis_d(
    tree: &PhyloTree,
    values: &TipValues,
    n_perm: usize,
    seed: u64,
    alpha: f64,
) -> Result<DResult, SignalError> {
    if n_perm == 0 {
        return Err(SignalError::NoPermutations);
    }
    if values.labels() != tree.tip_labels().as_slice() {
        return Err(SignalError::LabelMismatch);
    }
    let n_ones = values.values().iter().filter(|&&v| v == 1.0).count();
    let n_zeros = values.values().iter().filter(|&&v| v == 0.0).count();
    if n_ones + n_zeros != values.len() {
        let bad = values
            .values()
            .iter()
            .find(|&&v| v != 0.0 && v != 1.0)
            .copied()
            .unwrap_or(f64::NAN);
        return Err(SignalError::NonBinary(bad));
    }
    if n_ones == 0 || n_zeros == 0 {
        return Err(SignalError::NoVariation);
    }

    let postorder = tree.postorder();
    let sum_d_obs = sum_d_raw(tree, values.values(), &postorder)?;

    let mut shuffle_rng = seeded_rng(seed);
    shuffle_rng.set_stream(1);
    let mut shuffled = values.clone();
    let mut sums_random = Vec::with_capacity(n_perm);
    for _ in 0..n_perm {
        shuffled.shuffle_values(&mut shuffle_rng);
        sums_random.push(sum_d_raw(tree, shuffled.values(), &postorder)?);
    }

    let mut bm_rng = seeded_rng(seed);
    bm_rng.set_stream(2);
    let mut sums_brownian = Vec::with_capacity(n_perm);
    for _ in 0..n_perm {
        let sim = simulate_bm_with(tree, 1.0, 0.0, &mut bm_rng)?;
        let binarized = threshold_binarize(&sim, n_ones)?;
        sums_brownian.push(sum_d_raw(tree, binarized.values(), &postorder)?);
    }

    let mean_sum_d_random = sums_random.iter().sum::<f64>() / n_perm as f64;
    let mean_sum_d_brownian = sums_brownian.iter().sum::<f64>() / n_perm as f64;
    let denom = mean_sum_d_random - mean_sum_d_brownian;
    if denom == 0.0 {
        return Err(SignalError::DegenerateNull);
    }
    let scale = |sum: f64| (sum - mean_sum_d_brownian) / denom;
    let d = scale(sum_d_obs);
    let p_d_eq_1 =
        sums_random.iter().filter(|&&s| scale(s) < d).count() as f64 / n_perm as f64;
    let p_d_eq_0 =
        sums_brownian.iter().filter(|&&s| scale(s) > d).count() as f64 / n_perm as f64;

    Ok(DResult {
        key: String::new(),
        d,
        sum_d_obs,
        mean_sum_d_random,
        mean_sum_d_brownian,
        p_d_eq_0,
        p_d_eq_1,
        n_used: values.len(),
        n_perm,
        classification: classify_d(d, p_d_eq_0, p_d_eq_1, alpha),
    })
}

/// Map D and its two permutation p-values onto the six outcomes. A null is
/// rejected when its p-value falls in either tail (below `alpha` or above
/// 1 - alpha); the position of D relative to 0 and 1 picks the direction.
pub fn classify_d(d: f64, p_d_eq_0: f64, p_d_eq_1: f64, alpha: f64) -> DClass {
    let reject0 = p_d_eq_0 < alpha || p_d_eq_0 > 1.0 - alpha;
    let reject1 = p_d_eq_1 < alpha || p_d_eq_1 > 1.0 - alpha;
    if reject0 && d < 0.0 {
        return DClass::OverClumped;
    }
    if reject1 && d > 1.0 {
        return DClass::OverDispersed;
    }
    match (reject0, reject1) {
        (false, true) => DClass::Phylogenetic,
        (true, true) => DClass::Intermediate,
        (true, false) => DClass::Random,
        (false, false) => DClass::Indeterminate,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::balanced_tree;
    use crate::tree::parse_newick;

    fn four_tip() -> PhyloTree {
        parse_newick("((A:1,B:1):1,(C:1,D:1):1);").unwrap()
    }

    #[test]
    fn sum_d_hand_values() {
        let t = four_tip();
        let tv = TipValues::for_tree(&t, vec![1.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(sum_of_differences(&t, &tv).unwrap(), 1.0);

        let tv = TipValues::for_tree(&t, vec![1.0, 0.0, 1.0, 0.0]).unwrap();
        assert_eq!(sum_of_differences(&t, &tv).unwrap(), 2.0);

        let tv = TipValues::for_tree(&t, vec![0.0; 4]).unwrap();
        assert_eq!(sum_of_differences(&t, &tv).unwrap(), 0.0);
    }

    #[test]
    fn sum_d_rejects_polytomies_and_nonbinary() {
        let poly = parse_newick("(A:1,B:1,C:1);").unwrap();
        let tv = TipValues::for_tree(&poly, vec![1.0, 0.0, 1.0]).unwrap();
        assert!(sum_of_differences(&poly, &tv).is_err());

        let t = four_tip();
        let tv = TipValues::for_tree(&t, vec![1.0, 0.5, 0.0, 0.0]).unwrap();
        assert!(matches!(
            sum_of_differences(&t, &tv),
            Err(SignalError::NonBinary(_))
        ));
    }

    #[test]
    fn sum_d_invariant_under_daughter_swap() {
        let a = parse_newick("((A:1,B:1):1,(C:1,D:1):1);").unwrap();
        let b = parse_newick("((B:1,A:1):1,(D:1,C:1):1);").unwrap();
        // same assignment by label
        let va = TipValues::for_tree(&a, vec![1.0, 0.0, 1.0, 0.0]).unwrap();
        let vb = TipValues::for_tree(&b, vec![0.0, 1.0, 0.0, 1.0]).unwrap();
        assert_eq!(
            sum_of_differences(&a, &va).unwrap(),
            sum_of_differences(&b, &vb).unwrap()
        );
    }

    #[test]
    fn d_formula_identity_from_stored_sums() {
        let t = balanced_tree(4, 1.0, None).unwrap();
        let values: Vec<f64> = (0..16).map(|i| if i % 3 == 0 { 1.0 } else { 0.0 }).collect();
        let tv = TipValues::for_tree(&t, values).unwrap();
        let r = fritz_purvis_d(&t, &tv, 200, 42, 0.025).unwrap();
        let want = (r.sum_d_obs - r.mean_sum_d_brownian)
            / (r.mean_sum_d_random - r.mean_sum_d_brownian);
        assert!((r.d - want).abs() < 1e-12);
        // D = 0 at the Brownian mean and 1 at the random mean, by construction
        let at_brownian = (r.mean_sum_d_brownian - r.mean_sum_d_brownian)
            / (r.mean_sum_d_random - r.mean_sum_d_brownian);
        let at_random = (r.mean_sum_d_random - r.mean_sum_d_brownian)
            / (r.mean_sum_d_random - r.mean_sum_d_brownian);
        assert_eq!(at_brownian, 0.0);
        assert_eq!(at_random, 1.0);
    }

    #[test]
    fn d_requires_variation() {
        let t = four_tip();
        let tv = TipValues::for_tree(&t, vec![1.0; 4]).unwrap();
        assert!(matches!(
            fritz_purvis_d(&t, &tv, 10, 1, 0.025),
            Err(SignalError::NoVariation)
        ));
    }

    #[test]
    fn d_is_reproducible() {
        let t = balanced_tree(4, 1.0, None).unwrap();
        let values: Vec<f64> = (0..16).map(|i| if i < 8 { 1.0 } else { 0.0 }).collect();
        let tv = TipValues::for_tree(&t, values).unwrap();
        let a = fritz_purvis_d(&t, &tv, 100, 7, 0.025).unwrap();
        let b = fritz_purvis_d(&t, &tv, 100, 7, 0.025).unwrap();
        assert_eq!(a.d, b.d);
        assert_eq!(a.p_d_eq_0, b.p_d_eq_0);
        assert_eq!(a.p_d_eq_1, b.p_d_eq_1);
    }

    #[test]
    fn maximally_clumped_can_go_below_zero() {
        // all 1s in one half of a balanced tree: a single transition at the
        // root, tighter than Brownian evolution tends to produce
        let t = balanced_tree(6, 1.0, None).unwrap();
        let values: Vec<f64> = (0..64).map(|i| if i < 32 { 1.0 } else { 0.0 }).collect();
        let tv = TipValues::for_tree(&t, values).unwrap();
        let r = fritz_purvis_d(&t, &tv, 500, 3, 0.025).unwrap();
        assert!(r.sum_d_obs == 1.0);
        assert!(r.d < 0.0, "D = {} should be negative", r.d);
        assert_eq!(r.classification, DClass::OverClumped);
    }

    #[test]
    fn classify_examples() {
        assert_eq!(
            classify_d(0.1, 0.40, 0.001, 0.025),
            DClass::Phylogenetic
        );
        assert_eq!(
            classify_d(-0.5, 0.001, 0.001, 0.025),
            DClass::OverClumped
        );
        assert_eq!(
            classify_d(0.5, 0.30, 0.30, 0.025),
            DClass::Indeterminate
        );
        // one-sided tails: an over-clumped result shows up as p0 near 1
        assert_eq!(
            classify_d(-0.5, 0.999, 0.001, 0.025),
            DClass::OverClumped
        );
        assert_eq!(classify_d(1.4, 0.001, 0.999, 0.025), DClass::OverDispersed);
        assert_eq!(classify_d(0.5, 0.001, 0.001, 0.025), DClass::Intermediate);
        assert_eq!(classify_d(0.95, 0.001, 0.40, 0.025), DClass::Random);
    }
}
