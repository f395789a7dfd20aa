//! Trace-based pruning.
//!
//! `prune_unvisited` keeps exactly the hidden-level paths whose activation
//! pattern occurs in a trace; `prune_topk` keeps only the `k` most visited
//! ones. A removed subtree collapses to one `Pruned` marker at the highest
//! node that holds no kept pattern, so its sibling always holds at least one.
//! The marker's fallback is found by greedy descent from that sibling,
//! taking the child with more kept visits at each level (ties go left).

use super::{ActivationTrace, ObliqueTree, TreeMode, TreeNode};
use crate::error::{Error, Result};
use crate::netio::ActivationPattern;

/// Patterns sharing a common prefix, sorted lexicographically, with counts.
#[derive(Debug, Clone, Copy)]
pub struct PatternSet<'a> {
    items: &'a [(ActivationPattern, u64)],
}

impl<'a> PatternSet<'a> {
    /// `items` must be sorted by pattern.
    pub fn new(items: &'a [(ActivationPattern, u64)]) -> Self {
        debug_assert!(items.windows(2).all(|w| w[0].0 < w[1].0));
        PatternSet { items }
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn total(&self) -> u64 {
        self.items.iter().map(|(_, c)| c).sum()
    }

    /// Split on bit `level`; every member must agree on the bits before it.
    pub fn split(&self, level: usize) -> (PatternSet<'a>, PatternSet<'a>) {
        let cut = self.items.partition_point(|(p, _)| !p.0[level]);
        let (zeros, ones) = self.items.split_at(cut);
        (PatternSet { items: zeros }, PatternSet { items: ones })
    }

    /// Follow the heavier child from `level` down until one pattern is left.
    pub fn greedy_pattern(&self, mut level: usize) -> Option<ActivationPattern> {
        let mut set = *self;
        while set.len() > 1 {
            let (zeros, ones) = set.split(level);
            set = if ones.total() > zeros.total() { ones } else { zeros };
            level += 1;
        }
        set.items.first().map(|(p, _)| p.clone())
    }
}

pub(crate) fn pruned_marker(all_here: PatternSet<'_>, kept_sibling: PatternSet<'_>, next_level: usize) -> TreeNode {
    TreeNode::Pruned {
        fallback: kept_sibling.greedy_pattern(next_level),
        visit_hint: all_here.total(),
    }
}

fn prune_node(node: &TreeNode, level: usize, hidden: usize, all: PatternSet<'_>, kept: PatternSet<'_>) -> TreeNode {
    if level >= hidden {
        return node.clone();
    }
    match node {
        TreeNode::Decision { p, v, left, right } => {
            let (all0, all1) = all.split(level);
            let (kept0, kept1) = kept.split(level);
            let child = |n: &TreeNode, a: PatternSet<'_>, k: PatternSet<'_>, sib: PatternSet<'_>| {
                if k.is_empty() {
                    pruned_marker(a, sib, level + 1)
                } else {
                    prune_node(n, level + 1, hidden, a, k)
                }
            };
            TreeNode::Decision {
                p: p.clone(),
                v: *v,
                left: Box::new(child(left, all0, kept0, kept1)),
                right: Box::new(child(right, all1, kept1, kept0)),
            }
        }
        other => other.clone(),
    }
}

pub(crate) fn check_trace(hidden: usize, source_hash: Option<&str>, trace: &ActivationTrace) -> Result<()> {
    if let Some(h) = source_hash {
        if h != trace.network_hash() {
            return Err(Error::TraceMismatch(format!(
                "trace was recorded on network {} but the tree comes from {}",
                short(trace.network_hash()),
                short(h)
            )));
        }
    }
    match trace.pattern_len() {
        None => Err(Error::TraceMismatch("trace is empty".into())),
        Some(n) if n != hidden => Err(Error::TraceMismatch(format!(
            "trace patterns have {n} bits but the tree has {hidden} hidden levels"
        ))),
        Some(_) => Ok(()),
    }
}

fn short(h: &str) -> &str {
    &h[..h.len().min(12)]
}

fn apply(tree: &ObliqueTree, trace: &ActivationTrace, kept: &[(ActivationPattern, u64)], mode: TreeMode) -> ObliqueTree {
    let all: Vec<(ActivationPattern, u64)> = trace.iter().map(|(p, c)| (p.clone(), c)).collect();
    let root = prune_node(&tree.root, 0, tree.hidden_neurons, PatternSet::new(&all), PatternSet::new(kept));
    let mut meta = tree.meta.clone();
    meta.mode = mode;
    meta.trace_id = Some(trace.id());
    ObliqueTree {
        root,
        meta,
        ..tree.clone()
    }
}

/// Keep only hidden-level paths whose pattern appears in `trace`.
pub fn prune_unvisited(tree: &ObliqueTree, trace: &ActivationTrace) -> Result<ObliqueTree> {
    check_trace(tree.hidden_neurons, tree.meta.source_hash.as_deref(), trace)?;
    let kept: Vec<(ActivationPattern, u64)> = trace.iter().map(|(p, c)| (p.clone(), c)).collect();
    Ok(apply(tree, trace, &kept, TreeMode::Pruned))
}

/// Keep the `k` most visited paths of `trace` (ties by pattern order).
pub fn prune_topk(tree: &ObliqueTree, trace: &ActivationTrace, k: usize) -> Result<ObliqueTree> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    check_trace(tree.hidden_neurons, tree.meta.source_hash.as_deref(), trace)?;
    let mut kept: Vec<(ActivationPattern, u64)> = trace.top_k(k).into_iter().map(|(p, c)| (p.clone(), c)).collect();
    kept.sort();
    Ok(apply(tree, trace, &kept, TreeMode::TopK(k)))
}
