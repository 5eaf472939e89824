//! Blomberg's K and its contrast-variance randomization test.

use nalgebra::{Cholesky, DVector, Dyn};
use rand::seq::SliceRandom;

use crate::evolve::{pic, pic_variance, seeded_rng, TipValues};
use crate::tree::{PhyloTree, VcvMatrix};

use super::SignalError;

/// K with its permutation test outcome for one character.
#[derive(Debug, Clone)]
pub struct KResult {
    pub key: String,
    pub k: f64,
    /// Fraction of permutations whose contrast variance was <= observed.
    pub p_value: f64,
    pub n_used: usize,
    pub n_perm: usize,
    pub pic_variance: f64,
}

/// Knobs for [`KEngine::permutation_test`].
#[derive(Debug, Clone, Copy)]
pub struct PermutationOptions {
    pub n_perm: usize,
    pub seed: u64,
    /// Report (r+1)/(n+1) instead of the literal fraction r/n.
    pub pseudocount: bool,
}

/// Per-tree context for K: the covariance factorization is computed once
/// and shared across characters and permutations.
pub struct KEngine {
    tree: PhyloTree,
    chol: Cholesky<f64, Dyn>,
    inv_c_one: DVector<f64>,
    one_inv_one: f64,
    trace: f64,
    n: usize,
}

impl KEngine {
    pub fn new(tree: &PhyloTree) -> Result<Self, SignalError> {
        let vcv = tree.vcv();
        Self::with_vcv(tree, &vcv)
    }

    pub fn with_vcv(tree: &PhyloTree, vcv: &VcvMatrix) -> Result<Self, SignalError> {
        if vcv.labels() != tree.tip_labels().as_slice() {
            return Err(SignalError::LabelMismatch);
        }
        let chol = vcv.cholesky()?;
        let n = vcv.n();
        let ones = DVector::from_element(n, 1.0);
        let inv_c_one = chol.solve(&ones);
        let one_inv_one = inv_c_one.sum();
        let trace = vcv.matrix().trace();
        Ok(KEngine {
            tree: tree.clone(),
            chol,
            inv_c_one,
            one_inv_one,
            trace,
            n,
        })
    }

    pub fn n_tips(&self) -> usize {
        self.n
    }

    /// GLS mean under the tree covariance: (1'C^-1 x) / (1'C^-1 1).
    pub fn phylo_mean(&self, values: &[f64]) -> f64 {
        let x = DVector::from_column_slice(values);
        self.inv_c_one.dot(&x) / self.one_inv_one
    }

    /// K = [MSE0/MSE]_observed / [MSE0/MSE]_expected with
    /// MSE0 = (x-a)'(x-a)/(n-1), MSE = (x-a)'C^-1(x-a)/(n-1), and the
    /// Brownian expectation (trace(C) - n/(1'C^-1 1)) / (n-1).
    pub fn blomberg_k(&self, values: &[f64]) -> Result<f64, SignalError> {
        assert_eq!(values.len(), self.n);
        if values.windows(2).all(|w| w[0] == w[1]) {
            return Err(SignalError::ConstantValues);
        }
        let a = self.phylo_mean(values);
        let resid = DVector::from_iterator(self.n, values.iter().map(|v| v - a));
        let mse0 = resid.dot(&resid);
        let mse = self.chol.solve(&resid).dot(&resid);
        let observed = mse0 / mse;
        let expected = (self.trace - self.n as f64 / self.one_inv_one) / (self.n as f64 - 1.0);
        Ok(observed / expected)
    }

    /// Observed contrast variance against `n_perm` tip shuffles. Requires a
    /// bifurcating tree (the contrasts do).
    pub fn permutation_test(
        &self,
        values: &TipValues,
        opts: PermutationOptions,
        key: impl Into<String>,
    ) -> Result<KResult, SignalError> {
        if opts.n_perm == 0 {
            return Err(SignalError::NoPermutations);
        }
        let k = self.blomberg_k(values.values())?;
        let observed = pic_variance(&pic(&self.tree, values)?)?;

        let mut rng = seeded_rng(opts.seed);
        let mut shuffled = values.clone();
        let mut at_or_below = 0usize;
        for _ in 0..opts.n_perm {
            shuffled.shuffle_values(&mut rng);
            let var = pic_variance(&pic(&self.tree, &shuffled)?)?;
            if var <= observed {
                at_or_below += 1;
            }
        }
        let p_value = if opts.pseudocount {
            (at_or_below as f64 + 1.0) / (opts.n_perm as f64 + 1.0)
        } else {
            at_or_below as f64 / opts.n_perm as f64
        };
        Ok(KResult {
            key: key.into(),
            k,
            p_value,
            n_used: self.n,
            n_perm: opts.n_perm,
            pic_variance: observed,
        })
    }
}

impl TipValues {
    pub(crate) fn shuffle_values(&mut self, rng: &mut impl rand::Rng) {
        self.values_mut().shuffle(rng);
    }
}

/// GLS mean of `values` under an explicit covariance matrix.
pub fn phylo_mean(values: &TipValues, vcv: &VcvMatrix) -> Result<f64, SignalError> {
    if vcv.labels() != values.labels() {
        return Err(SignalError::LabelMismatch);
    }
    let chol = vcv.cholesky()?;
    let ones = DVector::from_element(vcv.n(), 1.0);
    let inv_c_one = chol.solve(&ones);
    let x = DVector::from_column_slice(values.values());
    Ok(inv_c_one.dot(&x) / inv_c_one.sum())
}

/// One-shot K for a single character.
pub fn blomberg_k(tree: &PhyloTree, values: &TipValues) -> Result<f64, SignalError> {
    let engine = KEngine::new(tree)?;
    values_match(tree, values)?;
    engine.blomberg_k(values.values())
}

/// One-shot K plus its randomization test.
pub fn k_permutation_test(
    tree: &PhyloTree,
    values: &TipValues,
    n_perm: usize,
    seed: u64,
) -> Result<KResult, SignalError> {
    let engine = KEngine::new(tree)?;
    values_match(tree, values)?;
    engine.permutation_test(
        values,
        PermutationOptions {
            n_perm,
            seed,
            pseudocount: false,
        },
        "",
    )
}

fn values_match(tree: &PhyloTree, values: &TipValues) -> Result<(), SignalError> {
    if values.labels() != tree.tip_labels().as_slice() {
        return Err(SignalError::LabelMismatch);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolve::{derive_seed, simulate_bm};
    use crate::tree::parse_newick;
    use approx::assert_relative_eq;
    use rand::Rng;

    #[test]
    fn phylo_mean_star_tree_is_arithmetic_mean() {
        let t = parse_newick("(A:1,B:1,C:1,D:1);").unwrap();
        let tv = TipValues::for_tree(&t, vec![1.0, 2.0, 3.0, 10.0]).unwrap();
        let m = phylo_mean(&tv, &t.vcv()).unwrap();
        assert_relative_eq!(m, 4.0, epsilon = 1e-12);
    }

    #[test]
    fn phylo_mean_downweights_clades() {
        // (A,B) share history and both sit at 1; the GLS mean discounts the
        // duplicated information, landing above the arithmetic mean of 2.
        let t = parse_newick("((A:1,B:1):1,C:2);").unwrap();
        let tv = TipValues::for_tree(&t, vec![1.0, 1.0, 4.0]).unwrap();
        let m = phylo_mean(&tv, &t.vcv()).unwrap();
        // hand 3x3 solve: C^-1 rows sum to (1/3, 1/3, 1/2), so
        // a = (1/3 + 1/3 + 4/2) / (7/6) = 16/7
        assert_relative_eq!(m, 16.0 / 7.0, epsilon = 1e-12);
        assert!(m > 2.0);
    }

    #[test]
    fn phylo_mean_of_constant_is_that_constant() {
        let t = parse_newick("((A:1,B:1):1,C:2);").unwrap();
        let tv = TipValues::for_tree(&t, vec![3.5, 3.5, 3.5]).unwrap();
        assert_relative_eq!(phylo_mean(&tv, &t.vcv()).unwrap(), 3.5, epsilon = 1e-12);
    }

    #[test]
    fn k_is_one_on_equal_branch_star_trees() {
        let t = parse_newick("(A:2,B:2,C:2,D:2,E:2);").unwrap();
        let engine = KEngine::new(&t).unwrap();
        let mut rng = seeded_rng(5);
        for _ in 0..100 {
            let values: Vec<f64> = (0..5).map(|_| rng.random_range(-3.0..3.0)).collect();
            if values.windows(2).all(|w| w[0] == w[1]) {
                continue;
            }
            let k = engine.blomberg_k(&values).unwrap();
            assert_relative_eq!(k, 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn k_affine_invariance() {
        let t = crate::synth::yule_tree(30, 1.0, 12, None).unwrap();
        let engine = KEngine::new(&t).unwrap();
        let tv = simulate_bm(&t, 1.0, 0.0, 3).unwrap();
        let k = engine.blomberg_k(tv.values()).unwrap();
        let scaled: Vec<f64> = tv.values().iter().map(|x| -2.5 * x + 7.0).collect();
        let k2 = engine.blomberg_k(&scaled).unwrap();
        assert_relative_eq!(k, k2, epsilon = 1e-9);
    }

    #[test]
    fn k_constant_values_error() {
        let t = parse_newick("(A:1,B:1);").unwrap();
        let engine = KEngine::new(&t).unwrap();
        assert!(matches!(
            engine.blomberg_k(&[2.0, 2.0]),
            Err(SignalError::ConstantValues)
        ));
    }

    #[test]
    fn shuffled_traits_lose_signal() {
        let t = crate::synth::yule_tree(64, 1.0, 99, None).unwrap();
        let engine = KEngine::new(&t).unwrap();
        let mut rng = seeded_rng(6);
        let (mut k_bm, mut k_shuf) = (0.0, 0.0);
        let reps = 50;
        for i in 0..reps {
            let tv = simulate_bm(&t, 1.0, 0.0, derive_seed(1000, i)).unwrap();
            k_bm += engine.blomberg_k(tv.values()).unwrap();
            let mut shuffled = tv.clone();
            shuffled.shuffle_values(&mut rng);
            k_shuf += engine.blomberg_k(shuffled.values()).unwrap();
        }
        let (mean_bm, mean_shuf) = (k_bm / reps as f64, k_shuf / reps as f64);
        assert!(
            mean_shuf < mean_bm,
            "shuffling should push K down: bm {mean_bm} vs shuffled {mean_shuf}"
        );
    }

    #[test]
    fn permutation_test_on_polytomy_errors() {
        let t = parse_newick("(A:1,B:1,C:1);").unwrap();
        let tv = TipValues::for_tree(&t, vec![1.0, 2.0, 3.0]).unwrap();
        assert!(k_permutation_test(&t, &tv, 10, 1).is_err());
    }

    #[test]
    fn permutation_test_rejects_zero_perms() {
        let t = parse_newick("((A:1,B:1):1,(C:1,D:1):1);").unwrap();
        let tv = TipValues::for_tree(&t, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!(matches!(
            k_permutation_test(&t, &tv, 0, 1),
            Err(SignalError::NoPermutations)
        ));
    }

    #[test]
    fn permutation_test_detects_strong_signal() {
        let t = crate::synth::yule_tree(64, 1.0, 101, None).unwrap();
        let tv = simulate_bm(&t, 1.0, 0.0, 7).unwrap();
        let r = k_permutation_test(&t, &tv, 200, 11).unwrap();
        assert!(r.p_value < 0.05, "BM trait should test significant");
        assert_eq!(r.n_perm, 200);
        assert_eq!(r.n_used, 64);
    }

    #[test]
    fn permutation_test_is_reproducible() {
        let t = crate::synth::yule_tree(16, 1.0, 55, None).unwrap();
        let tv = simulate_bm(&t, 1.0, 0.0, 8).unwrap();
        let a = k_permutation_test(&t, &tv, 100, 9).unwrap();
        let b = k_permutation_test(&t, &tv, 100, 9).unwrap();
        assert_eq!(a.p_value, b.p_value);
        assert_eq!(a.k, b.k);
        assert_eq!(a.pic_variance, b.pic_variance);
    }
}
