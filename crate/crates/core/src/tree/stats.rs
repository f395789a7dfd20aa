use serde::Serialize;

use super::{ObliqueTree, TreeNode};

/// Coefficients with magnitude at or below this count as zero.
pub const DEFAULT_SPARSE_EPS: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TreeStats {
    pub decision_nodes: usize,
    /// Regression and label leaves; pruned markers are counted separately.
    pub leaves: usize,
    pub pruned_leaves: usize,
    /// Decision nodes on the longest root-to-leaf path.
    pub max_depth: usize,
    /// Materialized hidden-level paths, i.e. realized activation patterns.
    pub patterns: usize,
    /// `log2(patterns)`.
    pub effective_depth: f64,
    /// Per decision node (pre-order): fraction of `|p_i| <= eps`.
    pub node_sparsity: Vec<f64>,
    pub mean_sparsity: f64,
}

pub fn stats(tree: &ObliqueTree, sparse_eps: f64) -> TreeStats {
    let mut decision_nodes = 0;
    let mut leaves = 0;
    let mut pruned_leaves = 0;
    let mut max_depth = 0;
    let mut patterns = 0;
    let mut node_sparsity = Vec::new();
    let hidden = tree.hidden_neurons;
    tree.root.walk(&mut |node, path| match node {
        TreeNode::Decision { p, .. } => {
            decision_nodes += 1;
            let zeros = p.iter().filter(|c| c.abs() <= sparse_eps).count();
            node_sparsity.push(if p.is_empty() { 1.0 } else { zeros as f64 / p.len() as f64 });
            if path.len() == hidden {
                patterns += 1;
            }
        }
        TreeNode::Pruned { .. } => {
            pruned_leaves += 1;
            max_depth = max_depth.max(path.len());
        }
        _ => {
            leaves += 1;
            max_depth = max_depth.max(path.len());
            if path.len() <= hidden {
                patterns += 1;
            }
        }
    });
    let mean_sparsity = if node_sparsity.is_empty() {
        0.0
    } else {
        node_sparsity.iter().sum::<f64>() / node_sparsity.len() as f64
    };
    TreeStats {
        decision_nodes,
        leaves,
        pruned_leaves,
        max_depth,
        patterns,
        effective_depth: (patterns.max(1) as f64).log2(),
        node_sparsity,
        mean_sparsity,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::netio::{ActivationPattern, TaskKind};
    use crate::translator::{translate, TranslateOptions};
    use crate::tree::{prune_unvisited, ActivationTrace, TreeMeta};

    #[test]
    fn full_relu3_tree_counts() {
        let tree = translate(&fixtures::relu3_network(), &TranslateOptions::full()).unwrap();
        let s = stats(&tree, DEFAULT_SPARSE_EPS);
        assert_eq!(s.decision_nodes, 7);
        assert_eq!(s.leaves, 8);
        assert_eq!(s.pruned_leaves, 0);
        assert_eq!(s.max_depth, 3);
        assert_eq!(s.patterns, 8);
        assert_eq!(s.effective_depth, 3.0);
    }

    #[test]
    fn two_leaf_pruned_tree_has_depth_one() {
        let net = fixtures::relu3_network();
        let tree = translate(&net, &TranslateOptions::full()).unwrap();
        let mut trace = ActivationTrace::new(net.hash());
        trace.add("001".parse::<ActivationPattern>().unwrap(), 4).unwrap();
        trace.add("011".parse::<ActivationPattern>().unwrap(), 1).unwrap();
        let s = stats(&prune_unvisited(&tree, &trace).unwrap(), DEFAULT_SPARSE_EPS);
        assert_eq!(s.leaves, 2);
        assert_eq!(s.effective_depth, 1.0);
    }

    #[test]
    fn binary_tree_counts_patterns_not_labels() {
        let mut rng = crate::rng::SeededRng::new(1);
        let mut cfg = crate::synth::RandomNetConfig::regression(2, vec![2, 1]);
        cfg.task = TaskKind::ClassificationBinary;
        let net = crate::synth::random_network(&mut rng, &cfg);
        let tree = translate(&net, &TranslateOptions::full()).unwrap();
        let s = stats(&tree, DEFAULT_SPARSE_EPS);
        assert_eq!(s.patterns, 8);
        assert_eq!(s.leaves, 16);
        assert_eq!(s.max_depth, 4);
    }

    #[test]
    fn sparsity_counts_small_coefficients() {
        let tree = ObliqueTree {
            input_dim: 4,
            output_dim: 1,
            task: TaskKind::Regression,
            hidden_neurons: 1,
            meta: TreeMeta::manual(),
            root: TreeNode::decision(
                vec![0.0, 1e-9, 0.5, -2.0],
                0.0,
                TreeNode::constant(4, &[0.0]),
                TreeNode::constant(4, &[1.0]),
            ),
        };
        let s = stats(&tree, DEFAULT_SPARSE_EPS);
        assert_eq!(s.node_sparsity, vec![0.5]);
        assert_eq!(stats(&tree, 0.0).node_sparsity, vec![0.25]);
    }
}
