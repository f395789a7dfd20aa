//! Coefficient zeroing and per-term dominance reports.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::InputBox;
use crate::tree::{ObliqueTree, Prediction, TreeNode};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroOutReport {
    pub threshold: f64,
    /// Coefficients that were nonzero and are now exactly zero.
    pub zeroed: usize,
    pub samples: usize,
    pub max_output_change: f64,
    pub label_changes: usize,
}

/// Copy of `tree` with every input coefficient `|c| <= eps` set to 0,
/// plus the largest output change this causes on `samples`.
pub fn zero_out(tree: &ObliqueTree, eps: f64, samples: &[Vec<f64>]) -> Result<(ObliqueTree, ZeroOutReport)> {
    if eps.is_nan() || eps < 0.0 {
        return Err(Error::InvalidArgument(format!("zeroing threshold must be >= 0, got {eps}")));
    }
    let mut out = tree.clone();
    let mut zeroed = 0;
    let mut kill = |c: &mut f64| {
        if c.abs() <= eps {
            if *c != 0.0 {
                zeroed += 1;
            }
            *c = 0.0;
        }
    };
    out.root.walk_mut(&mut |n| match n {
        TreeNode::Decision { p, .. } => p.iter_mut().for_each(&mut kill),
        TreeNode::Regression { p_out, .. } => p_out.iter_mut().flatten().for_each(&mut kill),
        _ => {}
    });

    let mut max_output_change: f64 = 0.0;
    let mut label_changes = 0;
    for x in samples {
        match (tree.predict(x)?, out.predict(x)?) {
            (Prediction::Values(a), Prediction::Values(b)) => {
                for (u, v) in a.iter().zip(&b) {
                    max_output_change = max_output_change.max((u - v).abs());
                }
            }
            (Prediction::Label(a), Prediction::Label(b)) => label_changes += usize::from(a != b),
            (a, b) if a == b => {}
            // Routing moved between a pruned marker and a live leaf.
            _ => max_output_change = f64::INFINITY,
        }
    }
    let report = ZeroOutReport {
        threshold: eps,
        zeroed,
        samples: samples.len(),
        max_output_change,
        label_changes,
    };
    Ok((out, report))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TermContribution {
    pub index: usize,
    pub name: String,
    /// `|p_i| · max(|lo_i|, |hi_i|)`.
    pub contribution: f64,
    pub droppable: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "role")]
pub enum NodeRole {
    Decision,
    Output { index: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeDominance {
    /// Branch bits from the root, `1` = right.
    pub path: String,
    #[serde(flatten)]
    pub role: NodeRole,
    pub terms: Vec<TermContribution>,
    pub bias: f64,
    /// Term indices, largest contribution first (ties by index).
    pub ranking: Vec<usize>,
    /// `None` when every term contributes zero.
    pub dominant: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominanceReport {
    pub tau: f64,
    pub nodes: Vec<NodeDominance>,
}

impl DominanceReport {
    pub fn node(&self, path: &str, role: NodeRole) -> Option<&NodeDominance> {
        self.nodes.iter().find(|n| n.path == path && n.role == role)
    }
}

fn analyse(p: &[f64], v: f64, scale: &[f64], names: &[String], tau: f64, path: String, role: NodeRole) -> NodeDominance {
    let mut terms: Vec<TermContribution> = p
        .iter()
        .zip(scale)
        .enumerate()
        .map(|(i, (c, s))| TermContribution {
            index: i,
            name: names[i].clone(),
            contribution: c.abs() * s,
            droppable: false,
        })
        .collect();
    let max = terms.iter().fold(0.0f64, |m, t| m.max(t.contribution));
    for t in &mut terms {
        t.droppable = t.contribution < tau * max;
    }
    let mut ranking: Vec<usize> = (0..terms.len()).collect();
    ranking.sort_by(|a, b| terms[*b].contribution.total_cmp(&terms[*a].contribution).then(a.cmp(b)));
    NodeDominance {
        path,
        role,
        bias: v.abs(),
        dominant: ranking.first().copied().filter(|_| max > 0.0),
        ranking,
        terms,
    }
}

/// Per-term contributions over `input_box` for every decision node and every
/// regression output row.
pub fn dominance_report(tree: &ObliqueTree, input_box: &InputBox, names: &[String], tau: f64) -> Result<DominanceReport> {
    if input_box.dim() != tree.input_dim {
        return Err(Error::Dimension {
            expected: tree.input_dim,
            got: input_box.dim(),
        });
    }
    super::check_names(names, tree.input_dim)?;
    let mut scale = Vec::with_capacity(tree.input_dim);
    for &(lo, hi) in &input_box.bounds {
        if !lo.is_finite() || !hi.is_finite() || lo > hi {
            return Err(Error::InvalidArgument(format!("bad box interval [{lo}, {hi}]")));
        }
        scale.push(lo.abs().max(hi.abs()));
    }
    let mut nodes = Vec::new();
    tree.root.walk(&mut |n, path| {
        let bits: String = path.iter().map(|b| if *b { '1' } else { '0' }).collect();
        match n {
            TreeNode::Decision { p, v, .. } => nodes.push(analyse(p, *v, &scale, names, tau, bits, NodeRole::Decision)),
            TreeNode::Regression { p_out, v_out, .. } => {
                for (k, (p, v)) in p_out.iter().zip(v_out).enumerate() {
                    nodes.push(analyse(p, *v, &scale, names, tau, bits.clone(), NodeRole::Output { index: k }));
                }
            }
            _ => {}
        }
    });
    Ok(DominanceReport { tau, nodes })
}
