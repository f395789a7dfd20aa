//! Oblique decision trees: data model, inference and persistence.
//!
//! A decision node tests `p·x + v <= 0` and routes left when true, right
//! otherwise. The first `hidden_neurons` decision levels of a translated tree
//! correspond one-to-one to the network's hidden neurons, so the left/right
//! choices along those levels spell out the input's activation pattern
//! (right = active). Anything below that depth is output structure: the
//! regression leaf, the binary output test, or the multi-class argmax chain.
//!
//! Pruned subtrees are stored as a single [`TreeNode::Pruned`] marker. When
//! inference reaches one and the marker carries a fallback pattern, routing
//! restarts at the root and follows the fallback bits through the hidden
//! levels; the result is flagged so callers can count fallbacks.

mod prune;
mod stats;
mod trace;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netio::{dot, ActivationPattern, LeafActivation, TaskKind};

pub use prune::{prune_topk, prune_unvisited, PatternSet};
pub(crate) use prune::{check_trace, pruned_marker};
pub use stats::{stats, TreeStats, DEFAULT_SPARSE_EPS};
pub use trace::{load_trace, save_trace, ActivationTrace};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum TreeNode {
    #[serde(rename = "decision")]
    Decision {
        p: Vec<f64>,
        v: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    /// One linear model per output dimension: `activation(p_out · x + v_out)`.
    #[serde(rename = "leaf_reg")]
    Regression {
        p_out: Vec<Vec<f64>>,
        v_out: Vec<f64>,
        activation: LeafActivation,
    },
    #[serde(rename = "leaf_label")]
    Label { label: usize },
    #[serde(rename = "pruned")]
    Pruned {
        fallback: Option<ActivationPattern>,
        visit_hint: u64,
    },
}

impl TreeNode {
    pub fn decision(p: Vec<f64>, v: f64, left: TreeNode, right: TreeNode) -> Self {
        TreeNode::Decision {
            p,
            v,
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    pub fn constant(input_dim: usize, values: &[f64]) -> Self {
        TreeNode::Regression {
            p_out: vec![vec![0.0; input_dim]; values.len()],
            v_out: values.to_vec(),
            activation: LeafActivation::Identity,
        }
    }

    pub fn is_leaf(&self) -> bool {
        !matches!(self, TreeNode::Decision { .. })
    }

    pub fn is_pruned(&self) -> bool {
        matches!(self, TreeNode::Pruned { .. })
    }

    /// Pre-order walk; the callback receives each node and its path from the
    /// root (`true` = right).
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a TreeNode, &[bool])) {
        fn go<'a>(n: &'a TreeNode, path: &mut Vec<bool>, f: &mut impl FnMut(&'a TreeNode, &[bool])) {
            f(n, path);
            if let TreeNode::Decision { left, right, .. } = n {
                path.push(false);
                go(left, path, f);
                path.pop();
                path.push(true);
                go(right, path, f);
                path.pop();
            }
        }
        go(self, &mut Vec::new(), f)
    }

    pub fn walk_mut(&mut self, f: &mut impl FnMut(&mut TreeNode)) {
        f(self);
        if let TreeNode::Decision { left, right, .. } = self {
            left.walk_mut(f);
            right.walk_mut(f);
        }
    }
}

/// How a tree was produced.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeMode {
    Full,
    TraceDriven,
    Pruned,
    TopK(usize),
    Manual,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeMeta {
    pub source_hash: Option<String>,
    pub mode: TreeMode,
    pub trace_id: Option<String>,
}

impl TreeMeta {
    pub fn manual() -> Self {
        TreeMeta {
            source_hash: None,
            mode: TreeMode::Manual,
            trace_id: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObliqueTree {
    pub input_dim: usize,
    /// Regression: values per leaf. Classification: number of classes.
    pub output_dim: usize,
    pub task: TaskKind,
    /// Length of the activation patterns this tree's hidden levels encode.
    pub hidden_neurons: usize,
    pub meta: TreeMeta,
    pub root: TreeNode,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Prediction {
    Values(Vec<f64>),
    Label(usize),
    /// Reached a pruned subtree that has no fallback.
    Pruned { visit_hint: u64 },
}

impl Prediction {
    pub fn values(&self) -> Option<&[f64]> {
        match self {
            Prediction::Values(v) => Some(v),
            _ => None,
        }
    }

    pub fn label(&self) -> Option<usize> {
        match self {
            Prediction::Label(l) => Some(*l),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Inference {
    pub prediction: Prediction,
    /// Decisions taken from the root, `true` = right (`p·x + v > 0`).
    pub path: Vec<bool>,
    /// True when a pruned leaf was hit and the fallback route was used.
    pub fallback: bool,
}

impl Inference {
    /// The hidden-level prefix of the path.
    pub fn pattern(&self, hidden_neurons: usize) -> ActivationPattern {
        ActivationPattern(self.path.iter().copied().take(hidden_neurons).collect())
    }
}

impl ObliqueTree {
    pub fn infer(&self, x: &[f64]) -> Result<Inference> {
        if x.len() != self.input_dim {
            return Err(Error::Dimension {
                expected: self.input_dim,
                got: x.len(),
            });
        }
        let (leaf, path) = self.route(x, None);
        if let TreeNode::Pruned {
            fallback: Some(bits),
            visit_hint,
        } = leaf
        {
            let (leaf2, path2) = self.route(x, Some(bits.bits()));
            let prediction = match leaf2 {
                TreeNode::Pruned { .. } => Prediction::Pruned {
                    visit_hint: *visit_hint,
                },
                other => evaluate_leaf(other, x),
            };
            return Ok(Inference {
                prediction,
                path: path2,
                fallback: true,
            });
        }
        Ok(Inference {
            prediction: evaluate_leaf(leaf, x),
            path,
            fallback: false,
        })
    }

    /// Convenience for regression trees without pruned leaves.
    pub fn predict(&self, x: &[f64]) -> Result<Prediction> {
        self.infer(x).map(|i| i.prediction)
    }

    fn route<'a>(&'a self, x: &[f64], forced: Option<&[bool]>) -> (&'a TreeNode, Vec<bool>) {
        let mut node = &self.root;
        let mut path = Vec::new();
        while let TreeNode::Decision { p, v, left, right } = node {
            let right_side = match forced.and_then(|f| f.get(path.len())) {
                Some(&b) => b,
                None => dot(p, x) + v > 0.0,
            };
            path.push(right_side);
            node = if right_side { right } else { left };
        }
        (node, path)
    }

    pub fn node_at(&self, path: &[bool]) -> Option<&TreeNode> {
        let mut node = &self.root;
        for &b in path {
            match node {
                TreeNode::Decision { left, right, .. } => node = if b { right } else { left },
                _ => return None,
            }
        }
        Some(node)
    }

    pub fn node_at_mut(&mut self, path: &[bool]) -> Option<&mut TreeNode> {
        let mut node = &mut self.root;
        for &b in path {
            match node {
                TreeNode::Decision { left, right, .. } => node = if b { right } else { left },
                _ => return None,
            }
        }
        Some(node)
    }

    pub fn validate(&self) -> Result<()> {
        let mut problem: Option<String> = None;
        let classes = match self.task {
            TaskKind::Regression => 0,
            TaskKind::ClassificationBinary => 2,
            TaskKind::ClassificationMulti => self.output_dim,
        };
        let d = self.input_dim;
        let out = self.output_dim;
        let hidden = self.hidden_neurons;
        let task = self.task;
        self.root.walk(&mut |node, path| {
            if problem.is_some() {
                return;
            }
            let at = || path.iter().map(|b| if *b { '1' } else { '0' }).collect::<String>();
            let err = match node {
                TreeNode::Decision { p, v, .. } => {
                    if p.len() != d {
                        Some(format!("decision at `{}` has {} coefficients, expected {}", at(), p.len(), d))
                    } else if !v.is_finite() || p.iter().any(|c| !c.is_finite()) {
                        Some(format!("decision at `{}` has a non-finite coefficient", at()))
                    } else {
                        None
                    }
                }
                TreeNode::Regression { p_out, v_out, .. } => {
                    if task != TaskKind::Regression {
                        Some(format!("regression leaf at `{}` in a {} tree", at(), task))
                    } else if p_out.len() != out || v_out.len() != out {
                        Some(format!("leaf at `{}` has {} outputs, expected {}", at(), v_out.len(), out))
                    } else if p_out.iter().any(|r| r.len() != d) {
                        Some(format!("leaf at `{}` has a row of the wrong width", at()))
                    } else if p_out.iter().flatten().chain(v_out).any(|c| !c.is_finite()) {
                        Some(format!("leaf at `{}` has a non-finite coefficient", at()))
                    } else {
                        None
                    }
                }
                TreeNode::Label { label } => {
                    if task == TaskKind::Regression {
                        Some(format!("label leaf at `{}` in a regression tree", at()))
                    } else if *label >= classes {
                        Some(format!("label {} at `{}` out of range for {} classes", label, at(), classes))
                    } else {
                        None
                    }
                }
                TreeNode::Pruned { fallback, .. } => match fallback {
                    Some(f) if f.len() != hidden => Some(format!(
                        "pruned leaf at `{}` has a {}-bit fallback, expected {}",
                        at(),
                        f.len(),
                        hidden
                    )),
                    _ => None,
                },
            };
            problem = err;
        });
        match problem {
            Some(p) => Err(Error::InvalidTree(p)),
            None => Ok(()),
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("tree serializes")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let mut de = serde_json::Deserializer::from_str(s);
        de.disable_recursion_limit();
        let tree = ObliqueTree::deserialize(&mut de)?;
        de.end()?;
        tree.validate()?;
        Ok(tree)
    }
}

fn evaluate_leaf(node: &TreeNode, x: &[f64]) -> Prediction {
    match node {
        TreeNode::Regression {
            p_out,
            v_out,
            activation,
        } => Prediction::Values(
            p_out
                .iter()
                .zip(v_out)
                .map(|(row, v)| activation.apply(dot(row, x) + v))
                .collect(),
        ),
        TreeNode::Label { label } => Prediction::Label(*label),
        TreeNode::Pruned { visit_hint, .. } => Prediction::Pruned {
            visit_hint: *visit_hint,
        },
        TreeNode::Decision { .. } => unreachable!("routing stops at leaves"),
    }
}

pub fn load_tree(path: impl AsRef<Path>) -> Result<ObliqueTree> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ObliqueTree::from_json_str(&text)
}

pub fn save_tree(tree: &ObliqueTree, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, tree.to_json_string() + "\n").map_err(|e| Error::io(path, e))
}
