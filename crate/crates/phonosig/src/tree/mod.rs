//! Rooted phylogenetic trees with branch lengths.
//!
//! Nodes live in a flat arena (`Vec<Node>`) and are referenced by index.
//! Trees are immutable once constructed, so they can be shared freely
//! across concurrent per-character tests.

mod newick;

pub use newick::{parse_newick, parse_newick_opts, write_newick, NewickError, NewickOptions};

use std::collections::{BTreeSet, HashMap};

use nalgebra::{Cholesky, DMatrix, Dyn};
use thiserror::Error;

/// Index into the tree's node arena.
pub type NodeId = usize;

#[derive(Debug, Error)]
pub enum TreeError {
    #[error("tree has no nodes")]
    Empty,
    #[error("tree must have at least {required} tips, found {found}")]
    TooFewTips { required: usize, found: usize },
    #[error("duplicate tip label {0:?}")]
    DuplicateTipLabel(String),
    #[error("tip label is empty")]
    EmptyTipLabel,
    #[error("branch length {length} on node {node} is invalid (must be finite and >= 0)")]
    InvalidBranchLength { node: NodeId, length: f64 },
    #[error("unknown tip label {0:?}")]
    UnknownTip(String),
    #[error("node arena is not a single rooted tree")]
    Malformed,
    #[error("covariance matrix is not positive definite (even after jitter)")]
    NotPositiveDefinite,
}

/// A single node: tips carry a label, internal nodes do not.
#[derive(Debug, Clone)]
pub struct Node {
    pub parent: Option<NodeId>,
    pub children: Vec<NodeId>,
    /// Branch length to the parent; 0.0 for the root.
    pub branch_length: f64,
    pub label: Option<String>,
}

/// A rooted tree with branch lengths and uniquely labelled tips.
#[derive(Debug, Clone)]
pub struct PhyloTree {
    nodes: Vec<Node>,
    root: NodeId,
    /// Tip node ids in left-to-right order as encountered at construction.
    tips: Vec<NodeId>,
    tip_index: HashMap<String, NodeId>,
}

impl PhyloTree {
    /// Build a tree from an arena, validating all structural invariants:
    /// exactly one root, full connectivity, no cycles, finite nonnegative
    /// branch lengths, and unique nonempty tip labels.
    pub fn from_nodes(nodes: Vec<Node>, root: NodeId) -> Result<Self, TreeError> {
        if nodes.is_empty() {
            return Err(TreeError::Empty);
        }
        if root >= nodes.len() || nodes[root].parent.is_some() {
            return Err(TreeError::Malformed);
        }
        for (id, node) in nodes.iter().enumerate() {
            if id != root && node.parent.is_none() {
                return Err(TreeError::Malformed);
            }
            if !node.branch_length.is_finite() || node.branch_length < 0.0 {
                return Err(TreeError::InvalidBranchLength {
                    node: id,
                    length: node.branch_length,
                });
            }
            for &c in &node.children {
                if c >= nodes.len() || nodes[c].parent != Some(id) {
                    return Err(TreeError::Malformed);
                }
            }
        }

        // Walk from the root: every node must be visited exactly once.
        let mut seen = vec![false; nodes.len()];
        let mut tips = Vec::new();
        let mut stack = vec![root];
        while let Some(id) = stack.pop() {
            if seen[id] {
                return Err(TreeError::Malformed);
            }
            seen[id] = true;
            if nodes[id].children.is_empty() {
                tips.push(id);
            }
            // Push children reversed so the leftmost child is visited first.
            for &c in nodes[id].children.iter().rev() {
                stack.push(c);
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(TreeError::Malformed);
        }

        let mut tip_index = HashMap::new();
        for &t in &tips {
            let label = match &nodes[t].label {
                Some(l) if !l.is_empty() => l.clone(),
                Some(_) | None => return Err(TreeError::EmptyTipLabel),
            };
            if tip_index.insert(label.clone(), t).is_some() {
                return Err(TreeError::DuplicateTipLabel(label));
            }
        }

        Ok(PhyloTree {
            nodes,
            root,
            tips,
            tip_index,
        })
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_tips(&self) -> usize {
        self.tips.len()
    }

    /// Tip node ids in left-to-right order.
    pub fn tip_ids(&self) -> &[NodeId] {
        &self.tips
    }

    /// Tip labels in left-to-right order.
    pub fn tip_labels(&self) -> Vec<&str> {
        self.tips
            .iter()
            .map(|&t| self.nodes[t].label.as_deref().unwrap_or(""))
            .collect()
    }

    pub fn tip_id(&self, label: &str) -> Option<NodeId> {
        self.tip_index.get(label).copied()
    }

    /// Node ids in postorder (children before parents).
    pub fn postorder(&self) -> Vec<NodeId> {
        let mut order = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![(self.root, false)];
        while let Some((id, expanded)) = stack.pop() {
            if expanded {
                order.push(id);
            } else {
                stack.push((id, true));
                for &c in self.nodes[id].children.iter().rev() {
                    stack.push((c, false));
                }
            }
        }
        order
    }

    /// Depth (sum of branch lengths from the root) of every node.
    pub fn depths(&self) -> Vec<f64> {
        let mut depth = vec![0.0; self.nodes.len()];
        let mut stack = vec![self.root];
        while let Some(id) = stack.pop() {
            for &c in &self.nodes[id].children {
                depth[c] = depth[id] + self.nodes[c].branch_length;
                stack.push(c);
            }
        }
        depth
    }

    pub fn root_to_tip_distance(&self, label: &str) -> Result<f64, TreeError> {
        let id = self
            .tip_id(label)
            .ok_or_else(|| TreeError::UnknownTip(label.to_string()))?;
        let mut d = 0.0;
        let mut cur = id;
        while let Some(p) = self.nodes[cur].parent {
            d += self.nodes[cur].branch_length;
            cur = p;
        }
        Ok(d)
    }

    /// True when no internal node has more than two children.
    pub fn is_binary(&self) -> bool {
        self.nodes.iter().all(|n| n.children.len() <= 2)
    }

    /// Same topology and lengths with tips relabeled in tip order.
    pub(crate) fn with_tip_labels(&self, labels: &[String]) -> Result<PhyloTree, TreeError> {
        assert_eq!(labels.len(), self.tips.len());
        let mut nodes = self.nodes.clone();
        for (&tip, label) in self.tips.iter().zip(labels) {
            nodes[tip].label = Some(label.clone());
        }
        PhyloTree::from_nodes(nodes, self.root)
    }

    /// Restrict the tree to `keep`, collapsing unary internal nodes by
    /// summing branch lengths. Root-to-tip distances of kept tips are
    /// unchanged; in particular a root that becomes unary is retained so
    /// that the stem shared by all remaining tips stays in the tree (the
    /// covariance matrix of the pruned tree is then exactly the original
    /// matrix restricted to `keep`).
    pub fn prune_to_tips(&self, keep: &BTreeSet<String>) -> Result<PhyloTree, TreeError> {
        for label in keep {
            if !self.tip_index.contains_key(label) {
                return Err(TreeError::UnknownTip(label.clone()));
            }
        }
        if keep.len() < 2 {
            return Err(TreeError::TooFewTips {
                required: 2,
                found: keep.len(),
            });
        }

        // Count kept tips per subtree.
        let mut kept = vec![0usize; self.nodes.len()];
        for id in self.postorder() {
            let n = &self.nodes[id];
            if n.children.is_empty() {
                if n.label.as_deref().is_some_and(|l| keep.contains(l)) {
                    kept[id] = 1;
                }
            } else {
                kept[id] = n.children.iter().map(|&c| kept[c]).sum();
            }
        }

        let mut nodes: Vec<Node> = vec![Node {
            parent: None,
            children: Vec::new(),
            branch_length: 0.0,
            label: None,
        }];

        // Copy the surviving topology; (old node, accumulated length, new parent).
        let mut stack: Vec<(NodeId, f64, NodeId)> = Vec::new();
        for &c in self.nodes[self.root].children.iter().rev() {
            if kept[c] > 0 {
                stack.push((c, self.nodes[c].branch_length, 0));
            }
        }
        while let Some((old, carry, parent)) = stack.pop() {
            let survivors: Vec<NodeId> = self.nodes[old]
                .children
                .iter()
                .copied()
                .filter(|&c| kept[c] > 0)
                .collect();
            if survivors.len() == 1 {
                // Unary after pruning: splice this node out.
                let c = survivors[0];
                stack.push((c, carry + self.nodes[c].branch_length, parent));
                continue;
            }
            let id = nodes.len();
            nodes.push(Node {
                parent: Some(parent),
                children: Vec::new(),
                branch_length: carry,
                label: self.nodes[old].label.clone(),
            });
            nodes[parent].children.push(id);
            for &c in survivors.iter().rev() {
                stack.push((c, self.nodes[c].branch_length, id));
            }
        }

        PhyloTree::from_nodes(nodes, 0)
    }

    /// Tip variance-covariance matrix: entry (i, j) is the branch length
    /// shared by the root-to-tip paths of tips i and j.
    pub fn vcv(&self) -> VcvMatrix {
        let n = self.tips.len();
        let depth = self.depths();
        let tip_pos: HashMap<NodeId, usize> =
            self.tips.iter().enumerate().map(|(i, &t)| (t, i)).collect();

        let mut m = DMatrix::<f64>::zeros(n, n);
        // Tips below each node, built bottom-up; the covariance of two tips
        // is the depth of their most recent common ancestor.
        let mut below: Vec<Vec<usize>> = vec![Vec::new(); self.nodes.len()];
        for id in self.postorder() {
            let node = &self.nodes[id];
            if node.children.is_empty() {
                below[id] = vec![tip_pos[&id]];
                m[(tip_pos[&id], tip_pos[&id])] = depth[id];
                continue;
            }
            let mut acc: Vec<usize> = Vec::new();
            for &c in &node.children {
                for &a in &acc {
                    for &b in &below[c] {
                        m[(a, b)] = depth[id];
                        m[(b, a)] = depth[id];
                    }
                }
                acc.extend(below[c].iter().copied());
            }
            below[id] = acc;
        }

        VcvMatrix {
            labels: self.tip_labels().iter().map(|s| s.to_string()).collect(),
            m,
        }
    }
}

/// Shared-path covariance matrix over a tree's tips.
#[derive(Debug, Clone)]
pub struct VcvMatrix {
    labels: Vec<String>,
    m: DMatrix<f64>,
}

impl VcvMatrix {
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn n(&self) -> usize {
        self.m.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.m[(i, j)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    /// Cholesky factorization with a single jitter retry: zero-length
    /// branches can make the matrix exactly singular, in which case
    /// 1e-10 * mean(diag) is added to the diagonal once before failing.
    pub fn cholesky(&self) -> Result<Cholesky<f64, Dyn>, TreeError> {
        if let Some(chol) = Cholesky::new(self.m.clone()) {
            return Ok(chol);
        }
        let jitter = 1e-10 * self.m.diagonal().mean();
        let mut jittered = self.m.clone();
        for i in 0..jittered.nrows() {
            jittered[(i, i)] += jitter;
        }
        Cholesky::new(jittered).ok_or(TreeError::NotPositiveDefinite)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn three_tip() -> PhyloTree {
        parse_newick("((A:1,B:1):1,C:2);").unwrap()
    }

    #[test]
    fn vcv_hand_matrix() {
        let vcv = three_tip().vcv();
        assert_eq!(vcv.labels(), &["A", "B", "C"]);
        let want = [[2.0, 1.0, 0.0], [1.0, 2.0, 0.0], [0.0, 0.0, 2.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(vcv.get(i, j), want[i][j], "entry ({i},{j})");
            }
        }
    }

    #[test]
    fn vcv_star_tree_is_diagonal() {
        let t = parse_newick("(A:0.5,B:0.5,C:0.5,D:0.5);").unwrap();
        let vcv = t.vcv();
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { 0.5 } else { 0.0 };
                assert_eq!(vcv.get(i, j), want);
            }
        }
    }

    #[test]
    fn vcv_two_tip_unequal() {
        let t = parse_newick("(A:1,B:3);").unwrap();
        let vcv = t.vcv();
        assert_eq!(vcv.get(0, 0), 1.0);
        assert_eq!(vcv.get(1, 1), 3.0);
        assert_eq!(vcv.get(0, 1), 0.0);
    }

    #[test]
    fn prune_sums_path_lengths() {
        let keep: BTreeSet<String> = ["A", "C"].iter().map(|s| s.to_string()).collect();
        let pruned = three_tip().prune_to_tips(&keep).unwrap();
        assert_eq!(pruned.n_tips(), 2);
        assert_eq!(pruned.root_to_tip_distance("A").unwrap(), 2.0);
        assert_eq!(pruned.root_to_tip_distance("C").unwrap(), 2.0);
        let vcv = pruned.vcv();
        assert_eq!(vcv.get(0, 1), 0.0);
    }

    #[test]
    fn prune_to_all_tips_is_identity() {
        let t = three_tip();
        let keep: BTreeSet<String> = t.tip_labels().iter().map(|s| s.to_string()).collect();
        let pruned = t.prune_to_tips(&keep).unwrap();
        assert_eq!(write_newick(&pruned), write_newick(&t));
    }

    #[test]
    fn prune_keeps_shared_stem() {
        // Dropping C leaves the root unary; the stem above (A,B) must stay
        // so the sub-VCV is preserved exactly.
        let keep: BTreeSet<String> = ["A", "B"].iter().map(|s| s.to_string()).collect();
        let pruned = three_tip().prune_to_tips(&keep).unwrap();
        let vcv = pruned.vcv();
        assert_eq!(vcv.get(0, 0), 2.0);
        assert_eq!(vcv.get(0, 1), 1.0);
    }

    #[test]
    fn prune_single_tip_errors() {
        let keep: BTreeSet<String> = ["A"].iter().map(|s| s.to_string()).collect();
        assert!(matches!(
            three_tip().prune_to_tips(&keep),
            Err(TreeError::TooFewTips { .. })
        ));
    }

    #[test]
    fn prune_unknown_tip_errors() {
        let keep: BTreeSet<String> = ["A", "Z"].iter().map(|s| s.to_string()).collect();
        assert!(matches!(
            three_tip().prune_to_tips(&keep),
            Err(TreeError::UnknownTip(_))
        ));
    }

    #[test]
    fn cholesky_jitter_handles_zero_branches() {
        // Two tips joined by zero-length branches duplicate rows in C.
        let t = parse_newick("((A:0,B:0):1,C:2);").unwrap();
        let chol = t.vcv().cholesky();
        assert!(chol.is_ok());
    }

    #[test]
    fn depths_accumulate() {
        let t = three_tip();
        assert_relative_eq!(t.root_to_tip_distance("A").unwrap(), 2.0);
        assert_relative_eq!(t.root_to_tip_distance("C").unwrap(), 2.0);
    }
}
