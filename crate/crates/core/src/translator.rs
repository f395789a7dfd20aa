//! Network-to-tree translation and equivalence checking.
//!
//! The translator walks hidden neurons in layer-major order. For neuron `k`
//! of hidden layer `l` it rewrites the pre-activation as an affine function
//! of the network input,
//!
//! ```text
//! p = Σ_j W[l][k][j] · feature_j.p        v = Σ_j W[l][k][j] · feature_j.v + B[l][k]
//! ```
//!
//! where the features are the rewritten outputs of the previous layer (or,
//! for dense nets, the input followed by every earlier hidden layer). The
//! first layer's rows are copied straight from `W¹`, `B¹`. The node tests
//! `p·x + v <= 0`; the right subtree sees the neuron's output as `(p, v)` and
//! the left subtree as `(a·p, a·v)` with `a` the leaky slope (0 for ReLU).
//! Each branch owns its copy of the rewrite state.
//!
//! Once every hidden neuron has been branched on, the output layer's rows
//! are rewritten the same way and become a regression leaf, a binary output
//! test with labels 0/1, or a multi-class argmax chain.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::netio::{ActivationPattern, NetworkSpec, TaskKind};
use crate::rng::InputBox;
use crate::tree::{ActivationTrace, ObliqueTree, PatternSet, Prediction, TreeMeta, TreeMode, TreeNode};

pub const DEFAULT_NODE_BUDGET: u64 = 1 << 20;

/// Largest class count whose argmax chain (2^(C-1) leaves per pattern) we build.
pub const MAX_CLASSES: usize = 21;

/// Subtrees with at least this many hidden levels below them are built in parallel.
const PARALLEL_LEVELS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TranslateMode {
    Full,
    TraceDriven,
}

#[derive(Debug, Clone, Copy)]
pub struct TranslateOptions<'a> {
    pub mode: TranslateMode,
    /// Upper bound on `2^hidden_neurons` in full mode.
    pub node_budget: u64,
    pub trace: Option<&'a ActivationTrace>,
}

impl<'a> TranslateOptions<'a> {
    pub fn full() -> Self {
        TranslateOptions {
            mode: TranslateMode::Full,
            node_budget: DEFAULT_NODE_BUDGET,
            trace: None,
        }
    }

    pub fn trace_driven(trace: &'a ActivationTrace) -> Self {
        TranslateOptions {
            mode: TranslateMode::TraceDriven,
            node_budget: DEFAULT_NODE_BUDGET,
            trace: Some(trace),
        }
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.node_budget = budget;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Affine {
    p: Vec<f64>,
    v: f64,
}

impl Affine {
    fn scaled(&self, a: f64) -> Affine {
        Affine {
            p: self.p.iter().map(|c| a * c).collect(),
            v: a * self.v,
        }
    }
}

#[derive(Debug, Clone)]
struct RewriteState {
    /// Inputs of the layer being processed, as affine functions of `x`.
    features: Vec<Affine>,
    /// Finished rows of the layer being processed.
    current: Vec<Affine>,
}

struct Builder<'n> {
    net: &'n NetworkSpec,
    /// (hidden layer, neuron) in layer-major order.
    neurons: Vec<(usize, usize)>,
}

impl<'n> Builder<'n> {
    fn new(net: &'n NetworkSpec) -> Self {
        let neurons = net
            .hidden_layers()
            .iter()
            .enumerate()
            .flat_map(|(l, layer)| (0..layer.width()).map(move |k| (l, k)))
            .collect();
        Builder { net, neurons }
    }

    fn initial_state(&self) -> RewriteState {
        let d = self.net.input_dim();
        let features = if self.net.dense() {
            (0..d)
                .map(|i| {
                    let mut p = vec![0.0; d];
                    p[i] = 1.0;
                    Affine { p, v: 0.0 }
                })
                .collect()
        } else {
            Vec::new()
        };
        RewriteState {
            features,
            current: Vec::new(),
        }
    }

    fn rewrite(&self, layer: usize, k: usize, state: &RewriteState) -> Affine {
        let spec = &self.net.layers()[layer];
        let (w, b) = (&spec.weights[k], spec.biases[k]);
        if layer == 0 {
            return Affine { p: w.clone(), v: b };
        }
        let d = self.net.input_dim();
        let mut p = vec![0.0; d];
        let mut wv = 0.0;
        for (wj, f) in w.iter().zip(&state.features) {
            for (pi, fi) in p.iter_mut().zip(&f.p) {
                *pi += wj * fi;
            }
            wv += wj * f.v;
        }
        Affine { p, v: wv + b }
    }

    fn push(&self, state: &mut RewriteState, layer: usize, row: Affine) {
        state.current.push(row);
        if state.current.len() == self.net.layers()[layer].width() {
            let done = std::mem::take(&mut state.current);
            if self.net.dense() {
                state.features.extend(done);
            } else {
                state.features = done;
            }
        }
    }

    fn build(&self, idx: usize, state: RewriteState, set: Option<PatternSet<'_>>) -> TreeNode {
        if idx == self.neurons.len() {
            return self.output_subtree(&state);
        }
        let (layer, k) = self.neurons[idx];
        let row = self.rewrite(layer, k, &state);
        let slope = self.net.layers()[layer].activation.negative_slope();

        let mut right_state = state.clone();
        self.push(&mut right_state, layer, row.clone());
        let mut left_state = state;
        self.push(&mut left_state, layer, row.scaled(slope));

        let (left_set, right_set) = match set {
            Some(s) => {
                let (z, o) = s.split(idx);
                (Some(z), Some(o))
            }
            None => (None, None),
        };
        let child = |st: RewriteState, mine: Option<PatternSet<'_>>, sibling: Option<PatternSet<'_>>| match (mine, sibling) {
            (Some(m), Some(s)) if m.is_empty() => crate::tree::pruned_marker(m, s, idx + 1),
            _ => self.build(idx + 1, st, mine),
        };
        let (left, right) = if self.neurons.len() - idx >= PARALLEL_LEVELS {
            rayon::join(
                || child(left_state, left_set, right_set),
                || child(right_state, right_set, left_set),
            )
        } else {
            (child(left_state, left_set, right_set), child(right_state, right_set, left_set))
        };
        TreeNode::Decision {
            p: row.p,
            v: row.v,
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    fn output_subtree(&self, state: &RewriteState) -> TreeNode {
        let out_layer = self.net.layers().len() - 1;
        let rows: Vec<Affine> = (0..self.net.output_dim())
            .map(|k| self.rewrite(out_layer, k, state))
            .collect();
        match self.net.task() {
            TaskKind::Regression => {
                let (p_out, v_out) = rows.into_iter().map(|a| (a.p, a.v)).unzip();
                TreeNode::Regression {
                    p_out,
                    v_out,
                    activation: self.net.leaf_activation(),
                }
            }
            TaskKind::ClassificationBinary => {
                let Affine { p, v } = rows.into_iter().next().expect("one logistic unit");
                TreeNode::decision(p, v, TreeNode::Label { label: 0 }, TreeNode::Label { label: 1 })
            }
            TaskKind::ClassificationMulti => argmax_chain(&rows, 0, 1),
        }
    }
}

/// Leader vs next candidate: `z_leader - z_candidate <= 0` hands the lead to
/// the candidate (left), otherwise the leader stays (right).
fn argmax_chain(rows: &[Affine], leader: usize, candidate: usize) -> TreeNode {
    if candidate == rows.len() {
        return TreeNode::Label { label: leader };
    }
    let (a, b) = (&rows[leader], &rows[candidate]);
    let p = a.p.iter().zip(&b.p).map(|(x, y)| x - y).collect();
    TreeNode::decision(
        p,
        a.v - b.v,
        argmax_chain(rows, candidate, candidate + 1),
        argmax_chain(rows, leader, candidate + 1),
    )
}

pub fn translate(net: &NetworkSpec, opts: &TranslateOptions<'_>) -> Result<ObliqueTree> {
    let n = net.hidden_neurons();
    if net.num_classes() > MAX_CLASSES {
        return Err(Error::InvalidNetwork(format!(
            "{} classes exceed the supported maximum of {}",
            net.num_classes(),
            MAX_CLASSES
        )));
    }
    let builder = Builder::new(net);
    let hash = net.hash();
    let (root, mode, trace_id) = match opts.mode {
        TranslateMode::Full => {
            let paths: Option<u128> = 1u128.checked_shl(n as u32).filter(|_| n < 128);
            match paths {
                Some(p) if p <= opts.node_budget as u128 => {}
                _ => {
                    return Err(Error::BudgetExceeded {
                        required_paths: paths.unwrap_or(u128::MAX),
                        required_nodes: required_nodes(net),
                        budget: opts.node_budget,
                    })
                }
            }
            (builder.build(0, builder.initial_state(), None), TreeMode::Full, None)
        }
        TranslateMode::TraceDriven => {
            let trace = opts
                .trace
                .ok_or_else(|| Error::InvalidArgument("trace-driven translation needs a trace".into()))?;
            crate::tree::check_trace(n, Some(&hash), trace)?;
            let items: Vec<(ActivationPattern, u64)> = trace.iter().map(|(p, c)| (p.clone(), c)).collect();
            let root = builder.build(0, builder.initial_state(), Some(PatternSet::new(&items)));
            (root, TreeMode::TraceDriven, Some(trace.id()))
        }
    };
    Ok(ObliqueTree {
        input_dim: net.input_dim(),
        output_dim: match net.task() {
            TaskKind::Regression => net.output_dim(),
            _ => net.num_classes(),
        },
        task: net.task(),
        hidden_neurons: n,
        meta: TreeMeta {
            source_hash: Some(hash),
            mode,
            trace_id,
        },
        root,
    })
}

/// Node count of the full tree, saturating.
pub fn required_nodes(net: &NetworkSpec) -> u128 {
    let n = net.hidden_neurons() as u32;
    let pow = |e: u32| 1u128.checked_shl(e).filter(|_| e < 128).unwrap_or(u128::MAX);
    let per_pattern = match net.task() {
        TaskKind::Regression => 1,
        TaskKind::ClassificationBinary => 3,
        TaskKind::ClassificationMulti => pow(net.num_classes() as u32).saturating_sub(1),
    };
    let paths = pow(n);
    (paths - 1).saturating_add(paths.saturating_mul(per_pattern))
}

/// Relative tolerance on output discrepancy for a passing verification.
pub const REL_TOLERANCE: f64 = 1e-6;

/// A classification input is ambiguous when the network's decision margin
/// is below this fraction of `max(1, |logits|∞)`.
pub const LABEL_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub samples: usize,
    pub max_abs_diff: f64,
    /// `|tree - net| / max(1, |net|)`, maximized over outputs and samples.
    pub max_rel_diff: f64,
    pub label_disagreements: usize,
    /// Disagreements (or agreements) on inputs within `LABEL_MARGIN` of a tie.
    pub ambiguous_labels: usize,
    /// Inputs that reached a pruned subtree (with or without fallback).
    pub pruned_hits: usize,
    pub fallback_hits: usize,
    pub pass: bool,
}

impl VerificationReport {
    fn empty() -> Self {
        VerificationReport {
            samples: 0,
            max_abs_diff: 0.0,
            max_rel_diff: 0.0,
            label_disagreements: 0,
            ambiguous_labels: 0,
            pruned_hits: 0,
            fallback_hits: 0,
            pass: true,
        }
    }

    /// Associative combination of two partial reports.
    pub fn merge(self, o: Self) -> Self {
        let mut r = VerificationReport {
            samples: self.samples + o.samples,
            max_abs_diff: self.max_abs_diff.max(o.max_abs_diff),
            max_rel_diff: self.max_rel_diff.max(o.max_rel_diff),
            label_disagreements: self.label_disagreements + o.label_disagreements,
            ambiguous_labels: self.ambiguous_labels + o.ambiguous_labels,
            pruned_hits: self.pruned_hits + o.pruned_hits,
            fallback_hits: self.fallback_hits + o.fallback_hits,
            pass: true,
        };
        r.pass = r.max_rel_diff <= REL_TOLERANCE && r.label_disagreements == 0;
        r
    }
}

fn check_pair(net: &NetworkSpec, tree: &ObliqueTree) -> Result<()> {
    if tree.input_dim != net.input_dim() {
        return Err(Error::Dimension {
            expected: net.input_dim(),
            got: tree.input_dim,
        });
    }
    if tree.task != net.task() {
        return Err(Error::InvalidTree(format!(
            "tree task {} does not match network task {}",
            tree.task,
            net.task()
        )));
    }
    Ok(())
}

fn verify_one(net: &NetworkSpec, tree: &ObliqueTree, x: &[f64]) -> Result<VerificationReport> {
    let mut r = VerificationReport::empty();
    r.samples = 1;
    let inf = tree.infer(x)?;
    if inf.fallback || matches!(inf.prediction, Prediction::Pruned { .. }) {
        r.pruned_hits = 1;
        r.fallback_hits = usize::from(inf.fallback);
        return Ok(r);
    }
    match inf.prediction {
        Prediction::Values(tv) => {
            let nv = net.forward(x)?;
            if tv.len() != nv.len() {
                return Err(Error::Dimension {
                    expected: nv.len(),
                    got: tv.len(),
                });
            }
            for (t, n) in tv.iter().zip(&nv) {
                let abs = (t - n).abs();
                r.max_abs_diff = r.max_abs_diff.max(abs);
                r.max_rel_diff = r.max_rel_diff.max(abs / n.abs().max(1.0));
            }
        }
        Prediction::Label(tl) => {
            let z = net.logits(x)?;
            let nl = net.label(x)?.expect("classification net has a label");
            let scale = z.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            if decision_margin(net.task(), &z) <= LABEL_MARGIN * scale {
                r.ambiguous_labels = 1;
            } else if tl != nl {
                r.label_disagreements = 1;
            }
        }
        Prediction::Pruned { .. } => unreachable!(),
    }
    r.pass = r.max_rel_diff <= REL_TOLERANCE && r.label_disagreements == 0;
    Ok(r)
}

fn decision_margin(task: TaskKind, z: &[f64]) -> f64 {
    match task {
        TaskKind::ClassificationBinary => z[0].abs(),
        _ => {
            let mut sorted = z.to_vec();
            sorted.sort_by(|a, b| b.total_cmp(a));
            sorted[0] - sorted[1]
        }
    }
}

/// Compare `tree` with `net` on explicit inputs.
pub fn verify_on_inputs(net: &NetworkSpec, tree: &ObliqueTree, inputs: &[Vec<f64>]) -> Result<VerificationReport> {
    check_pair(net, tree)?;
    inputs
        .par_chunks(256)
        .map(|chunk| {
            chunk
                .iter()
                .try_fold(VerificationReport::empty(), |acc, x| Ok(acc.merge(verify_one(net, tree, x)?)))
        })
        .try_reduce(VerificationReport::empty, |a, b| Ok(a.merge(b)))
}

/// Compare `tree` with `net` on `n_samples` uniform draws from `sampler`.
pub fn verify_equivalence(
    net: &NetworkSpec,
    tree: &ObliqueTree,
    sampler: &InputBox,
    n_samples: usize,
    seed: u64,
) -> Result<VerificationReport> {
    if sampler.dim() != net.input_dim() {
        return Err(Error::Dimension {
            expected: net.input_dim(),
            got: sampler.dim(),
        });
    }
    verify_on_inputs(net, tree, &sampler.samples(n_samples, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::netio::{Activation, LayerSpec, LeafActivation};
    use crate::rng::SeededRng;
    use crate::synth::{random_network, RandomNetConfig};

    fn regression_leaf(node: &TreeNode) -> (&Vec<Vec<f64>>, &Vec<f64>) {
        match node {
            TreeNode::Regression { p_out, v_out, .. } => (p_out, v_out),
            other => panic!("expected regression leaf, got {other:?}"),
        }
    }

    #[test]
    fn relu3_leaf_on_inference_path() {
        let tree = translate(&fixtures::relu3_network(), &TranslateOptions::full()).unwrap();
        let inf = tree.infer(&[0.5, -0.5]).unwrap();
        assert_eq!(inf.path, vec![false, false, true]);
        let (p, v) = regression_leaf(tree.node_at(&inf.path).unwrap());
        assert!((p[0][0] - 1.2).abs() < 1e-9);
        assert!((p[0][1] + 0.12).abs() < 1e-9);
        assert!((v[0] - 2.84).abs() < 1e-9);
        assert!((inf.prediction.values().unwrap()[0] - 3.5).abs() < 1e-9);
    }

    #[test]
    fn single_neuron_net() {
        let (w, b, w2, b2) = (1.7, -0.3, -2.5, 0.4);
        let net = NetworkSpec::new(
            1,
            TaskKind::Regression,
            false,
            LeafActivation::Identity,
            vec![
                LayerSpec::new(vec![vec![w]], vec![b], Activation::Relu),
                LayerSpec::new(vec![vec![w2]], vec![b2], Activation::Linear),
            ],
        )
        .unwrap();
        let tree = translate(&net, &TranslateOptions::full()).unwrap();
        let TreeNode::Decision { p, v, left, right } = &tree.root else { panic!() };
        assert_eq!((p.as_slice(), *v), (&[w][..], b));
        let (lp, lv) = regression_leaf(left);
        assert_eq!(lp[0][0], 0.0);
        assert_eq!(lv[0], b2);
        let (rp, rv) = regression_leaf(right);
        assert_eq!(rp[0][0], w2 * w);
        assert_eq!(rv[0], w2 * b + b2);
    }

    #[test]
    fn first_layer_rows_are_uniform_across_levels() {
        let mut rng = SeededRng::new(8);
        let net = random_network(&mut rng, &RandomNetConfig::regression(3, vec![3, 2]));
        let tree = translate(&net, &TranslateOptions::full()).unwrap();
        let w1 = &net.layers()[0];
        tree.root.walk(&mut |n, path| {
            if let TreeNode::Decision { p, v, .. } = n {
                if path.len() < 3 {
                    assert_eq!(p, &w1.weights[path.len()]);
                    assert_eq!(*v, w1.biases[path.len()]);
                }
            }
        });
    }

    #[test]
    fn leaky_slope_near_zero_approaches_relu_tree() {
        let mut rng = SeededRng::new(12);
        let relu = random_network(&mut rng, &RandomNetConfig::regression(2, vec![2, 2]));
        let layers = relu
            .layers()
            .iter()
            .map(|l| {
                let mut l = l.clone();
                if l.activation.is_hidden() {
                    l.activation = Activation::LeakyRelu(1e-12);
                }
                l
            })
            .collect();
        let leaky = NetworkSpec::new(2, TaskKind::Regression, false, LeafActivation::Identity, layers).unwrap();
        let a = translate(&relu, &TranslateOptions::full()).unwrap();
        let b = translate(&leaky, &TranslateOptions::full()).unwrap();
        let mut coeffs_a = Vec::new();
        let mut coeffs_b = Vec::new();
        let collect = |t: &ObliqueTree, out: &mut Vec<f64>| {
            t.root.walk(&mut |n, _| match n {
                TreeNode::Decision { p, v, .. } => {
                    out.extend(p);
                    out.push(*v);
                }
                TreeNode::Regression { p_out, v_out, .. } => {
                    out.extend(p_out.iter().flatten());
                    out.extend(v_out);
                }
                _ => {}
            })
        };
        collect(&a, &mut coeffs_a);
        collect(&b, &mut coeffs_b);
        assert_eq!(coeffs_a.len(), coeffs_b.len());
        for (x, y) in coeffs_a.iter().zip(&coeffs_b) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn multiclass_chain_shape_and_ties() {
        let rows = vec![
            Affine { p: vec![0.0], v: 1.0 },
            Affine { p: vec![0.0], v: 1.0 },
            Affine { p: vec![0.0], v: 0.0 },
        ];
        let chain = argmax_chain(&rows, 0, 1);
        let tree = ObliqueTree {
            input_dim: 1,
            output_dim: 3,
            task: TaskKind::ClassificationMulti,
            hidden_neurons: 0,
            meta: TreeMeta::manual(),
            root: chain,
        };
        // Classes 0 and 1 tie: the later index wins.
        assert_eq!(tree.predict(&[0.0]).unwrap(), Prediction::Label(1));
        let mut labels = Vec::new();
        tree.root.walk(&mut |n, _| {
            if let TreeNode::Label { label } = n {
                labels.push(*label)
            }
        });
        assert_eq!(labels.len(), 4);
    }

    #[test]
    fn budget_is_enforced() {
        let mut rng = SeededRng::new(4);
        let net = random_network(&mut rng, &RandomNetConfig::regression(2, vec![6, 6]));
        match translate(&net, &TranslateOptions::full().with_budget(1024)) {
            Err(Error::BudgetExceeded {
                required_paths,
                required_nodes,
                budget,
            }) => {
                assert_eq!(required_paths, 4096);
                assert_eq!(required_nodes, 8191);
                assert_eq!(budget, 1024);
            }
            other => panic!("{other:?}"),
        }
        assert!(translate(&net, &TranslateOptions::full().with_budget(4096)).is_ok());
    }

    #[test]
    fn trace_driven_needs_matching_trace() {
        let net = fixtures::relu3_network();
        let opts = TranslateOptions {
            mode: TranslateMode::TraceDriven,
            node_budget: DEFAULT_NODE_BUDGET,
            trace: None,
        };
        assert!(translate(&net, &opts).is_err());
        let mut other = ActivationTrace::new("someone-else");
        other.record("001".parse().unwrap()).unwrap();
        assert!(matches!(
            translate(&net, &TranslateOptions::trace_driven(&other)),
            Err(Error::TraceMismatch(_))
        ));
    }

    #[test]
    fn trace_driven_equals_pruned_full_tree() {
        let mut rng = SeededRng::new(31);
        for v in 0..12 {
            let cfg = RandomNetConfig::any(&mut rng, v);
            let net = random_network(&mut rng, &cfg);
            let mut trace = ActivationTrace::new(net.hash());
            for _ in 0..50 {
                let x: Vec<f64> = (0..net.input_dim()).map(|_| rng.uniform(-1.0, 1.0)).collect();
                trace.record(net.pattern(&x).unwrap()).unwrap();
            }
            let direct = translate(&net, &TranslateOptions::trace_driven(&trace)).unwrap();
            let full = translate(&net, &TranslateOptions::full()).unwrap();
            let pruned = crate::tree::prune_unvisited(&full, &trace).unwrap();
            assert_eq!(direct.root, pruned.root);
        }
    }

    #[test]
    fn relu3_verifies_and_mutation_is_caught() {
        let net = fixtures::relu3_network();
        let mut tree = translate(&net, &TranslateOptions::full()).unwrap();
        let sampler = InputBox::cube(2, -1.0, 1.0);
        let report = verify_equivalence(&net, &tree, &sampler, 1000, 7).unwrap();
        assert!(report.pass);
        assert!(report.max_abs_diff <= 1e-9);
        assert_eq!(report.samples, 1000);

        if let Some(TreeNode::Regression { v_out, .. }) = tree.node_at_mut(&[false, false, true]) {
            v_out[0] += 1.0;
        }
        let report = verify_equivalence(&net, &tree, &sampler, 1000, 7).unwrap();
        assert!(!report.pass);
        assert!(report.max_abs_diff >= 1.0);
    }

    #[test]
    fn trace_inputs_never_hit_pruned_leaves() {
        let net = fixtures::relu3_network();
        let inputs = InputBox::cube(2, -1.0, 1.0).samples(300, 5);
        let mut trace = ActivationTrace::new(net.hash());
        for x in &inputs {
            trace.record(net.pattern(x).unwrap()).unwrap();
        }
        let tree = translate(&net, &TranslateOptions::trace_driven(&trace)).unwrap();
        let report = verify_on_inputs(&net, &tree, &inputs).unwrap();
        assert_eq!(report.pruned_hits, 0);
        assert!(report.pass);
    }

    #[test]
    fn verify_rejects_mismatched_dimensions() {
        let net = fixtures::relu3_network();
        let tree = translate(&net, &TranslateOptions::full()).unwrap();
        assert!(matches!(
            verify_equivalence(&net, &tree, &InputBox::cube(3, -1.0, 1.0), 10, 1),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn report_merge_is_associative() {
        let net = fixtures::relu3_network();
        let tree = translate(&net, &TranslateOptions::full()).unwrap();
        let xs = InputBox::cube(2, -2.0, 2.0).samples(30, 3);
        let parts: Vec<VerificationReport> = xs.chunks(10).map(|c| verify_on_inputs(&net, &tree, c).unwrap()).collect();
        let left = parts[0].clone().merge(parts[1].clone()).merge(parts[2].clone());
        let right = parts[0].clone().merge(parts[1].clone().merge(parts[2].clone()));
        assert_eq!(left, right);
        assert_eq!(left, verify_on_inputs(&net, &tree, &xs).unwrap());
    }
}
