//! Network data model, interchange format and the reference forward pass.
//!
//! A network is a list of fully connected layers. Layer `i` (1-based, as in
//! error messages) maps the activations feeding it to `n_{i+1}` outputs with
//! a row-major weight matrix. Every layer but the last is a hidden layer and
//! uses `relu` or `leaky_relu(a)`; the last layer is `linear`, `logistic` or
//! `softmax` depending on the task.
//!
//! In a *dense* network each layer consumes the concatenation of the input
//! and all previous hidden activations, in layer order with the input first:
//! `[x, a_2, a_3, ..., a_i]`.
//!
//! Hidden neurons are numbered layer-major (all of the first hidden layer,
//! then the second, ...). That numbering is the bit order of an
//! [`ActivationPattern`]. A neuron is active iff its pre-activation is
//! strictly positive; `z == 0` counts as inactive.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    LeakyRelu(f64),
    Linear,
    Logistic,
    Softmax,
}

impl Activation {
    pub fn is_hidden(self) -> bool {
        matches!(self, Activation::Relu | Activation::LeakyRelu(_))
    }

    /// Slope applied on the inactive side: 0 for ReLU, `a` for LeakyReLU.
    pub fn negative_slope(self) -> f64 {
        match self {
            Activation::LeakyRelu(a) => a,
            _ => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    Regression,
    ClassificationBinary,
    ClassificationMulti,
}

impl TaskKind {
    pub fn is_classification(self) -> bool {
        !matches!(self, TaskKind::Regression)
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TaskKind::Regression => "regression",
            TaskKind::ClassificationBinary => "classification_binary",
            TaskKind::ClassificationMulti => "classification_multi",
        })
    }
}

/// Squashing applied after the linear output of a regression network
/// (and after a regression leaf's linear model).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeafActivation {
    #[default]
    Identity,
    Tanh,
}

impl LeafActivation {
    pub fn apply(self, v: f64) -> f64 {
        match self {
            LeafActivation::Identity => v,
            LeafActivation::Tanh => v.tanh(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<f64>,
    pub activation: Activation,
}

impl LayerSpec {
    pub fn new(weights: Vec<Vec<f64>>, biases: Vec<f64>, activation: Activation) -> Self {
        LayerSpec {
            weights,
            biases,
            activation,
        }
    }

    pub fn width(&self) -> usize {
        self.biases.len()
    }
}

/// A validated network. Construct with [`NetworkSpec::new`] or
/// [`load_network`]; the fields cannot be mutated afterwards.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NetworkDoc")]
pub struct NetworkSpec {
    input_dim: usize,
    task: TaskKind,
    dense: bool,
    leaf_activation: LeafActivation,
    layers: Vec<LayerSpec>,
}

#[derive(Deserialize)]
struct NetworkDoc {
    input_dim: usize,
    task: TaskKind,
    #[serde(default)]
    dense: bool,
    #[serde(default)]
    leaf_activation: LeafActivation,
    layers: Vec<LayerSpec>,
}

impl TryFrom<NetworkDoc> for NetworkSpec {
    type Error = Error;

    fn try_from(d: NetworkDoc) -> Result<Self> {
        NetworkSpec::new(d.input_dim, d.task, d.dense, d.leaf_activation, d.layers)
    }
}

impl NetworkSpec {
    pub fn new(
        input_dim: usize,
        task: TaskKind,
        dense: bool,
        leaf_activation: LeafActivation,
        layers: Vec<LayerSpec>,
    ) -> Result<Self> {
        let net = NetworkSpec {
            input_dim,
            task,
            dense,
            leaf_activation,
            layers,
        };
        net.validate()?;
        Ok(net)
    }

    fn validate(&self) -> Result<()> {
        if self.input_dim == 0 {
            return Err(Error::InvalidNetwork("input_dim must be positive".into()));
        }
        if self.layers.is_empty() {
            return Err(Error::InvalidNetwork("network has no layers".into()));
        }
        let last = self.layers.len() - 1;
        let mut fan_in = self.input_dim;
        for (i, layer) in self.layers.iter().enumerate() {
            let no = i + 1;
            let rows = layer.weights.len();
            if rows == 0 {
                return Err(Error::Shape {
                    layer: no,
                    detail: "layer has no neurons".into(),
                });
            }
            if rows != layer.biases.len() {
                return Err(Error::Shape {
                    layer: no,
                    detail: format!("{} weight rows but {} biases", rows, layer.biases.len()),
                });
            }
            if let Some((r, row)) = layer.weights.iter().enumerate().find(|(_, r)| r.len() != fan_in) {
                return Err(Error::Shape {
                    layer: no,
                    detail: format!("weight row {} has {} columns, expected {}", r + 1, row.len(), fan_in),
                });
            }
            let finite = layer.weights.iter().flatten().chain(&layer.biases).all(|v| v.is_finite());
            if !finite {
                return Err(Error::NonFinite { layer: no });
            }
            if i < last {
                match layer.activation {
                    Activation::Relu => {}
                    Activation::LeakyRelu(a) if a > 0.0 && a < 1.0 => {}
                    Activation::LeakyRelu(a) => {
                        return Err(Error::Activation {
                            layer: no,
                            detail: format!("leaky_relu slope {a} outside (0, 1)"),
                        })
                    }
                    other => {
                        return Err(Error::Activation {
                            layer: no,
                            detail: format!("hidden layers must be relu or leaky_relu, found {other:?}"),
                        })
                    }
                }
            } else {
                self.check_output_layer(no, layer)?;
            }
            fan_in = if self.dense { fan_in + rows } else { rows };
        }
        Ok(())
    }

    fn check_output_layer(&self, no: usize, layer: &LayerSpec) -> Result<()> {
        let width = layer.width();
        let err = |detail: String| Err(Error::Activation { layer: no, detail });
        match (self.task, layer.activation) {
            (TaskKind::Regression, Activation::Linear) => {}
            (TaskKind::ClassificationBinary, Activation::Logistic) => {
                if width != 1 {
                    return err(format!("logistic output needs exactly 1 unit, found {width}"));
                }
            }
            (TaskKind::ClassificationMulti, Activation::Softmax) => {
                if width < 2 {
                    return err(format!("softmax output needs at least 2 units, found {width}"));
                }
            }
            (task, act) => return err(format!("output activation {act:?} does not match task {task}")),
        }
        if self.leaf_activation == LeafActivation::Tanh && self.task != TaskKind::Regression {
            return err("tanh leaf activation only applies to regression".into());
        }
        Ok(())
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn task(&self) -> TaskKind {
        self.task
    }

    pub fn dense(&self) -> bool {
        self.dense
    }

    pub fn leaf_activation(&self) -> LeafActivation {
        self.leaf_activation
    }

    pub fn layers(&self) -> &[LayerSpec] {
        &self.layers
    }

    pub fn hidden_layers(&self) -> &[LayerSpec] {
        &self.layers[..self.layers.len() - 1]
    }

    pub fn output_layer(&self) -> &LayerSpec {
        self.layers.last().expect("validated network has layers")
    }

    pub fn output_dim(&self) -> usize {
        self.output_layer().width()
    }

    pub fn hidden_neurons(&self) -> usize {
        self.hidden_layers().iter().map(LayerSpec::width).sum()
    }

    /// Number of classes for classification nets (2 for binary), 0 for regression.
    pub fn num_classes(&self) -> usize {
        match self.task {
            TaskKind::Regression => 0,
            TaskKind::ClassificationBinary => 2,
            TaskKind::ClassificationMulti => self.output_dim(),
        }
    }

    /// SHA-256 of the compact JSON encoding, hex encoded.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("network serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("network serializes")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let doc: NetworkDoc = serde_json::from_str(s)?;
        NetworkSpec::try_from(doc)
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim {
            return Err(Error::Dimension {
                expected: self.input_dim,
                got: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("input contains a non-finite value".into()));
        }
        Ok(())
    }

    /// Pre-activations of the output layer. Hidden-neuron states are pushed
    /// onto `pattern` when given.
    fn output_logits(&self, x: &[f64], mut pattern: Option<&mut Vec<bool>>) -> Vec<f64> {
        let mut feed: Vec<f64> = x.to_vec();
        for layer in self.hidden_layers() {
            let slope = layer.activation.negative_slope();
            let acts: Vec<f64> = layer
                .weights
                .iter()
                .zip(&layer.biases)
                .map(|(row, b)| {
                    let z = dot(row, &feed) + b;
                    if let Some(p) = pattern.as_deref_mut() {
                        p.push(z > 0.0);
                    }
                    if z > 0.0 {
                        z
                    } else {
                        slope * z
                    }
                })
                .collect();
            if self.dense {
                feed.extend(acts);
            } else {
                feed = acts;
            }
        }
        let out = self.output_layer();
        out.weights.iter().zip(&out.biases).map(|(row, b)| dot(row, &feed) + b).collect()
    }

    fn apply_output(&self, logits: Vec<f64>) -> Vec<f64> {
        match self.output_layer().activation {
            Activation::Logistic => logits.into_iter().map(logistic).collect(),
            Activation::Softmax => softmax(&logits),
            _ => logits.into_iter().map(|z| self.leaf_activation.apply(z)).collect(),
        }
    }

    /// Output-layer pre-activations `Z^m`.
    pub fn logits(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        Ok(self.output_logits(x, None))
    }

    /// The network output `A^m`.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        Ok(self.apply_output(self.output_logits(x, None)))
    }

    pub fn forward_with_pattern(&self, x: &[f64]) -> Result<(Vec<f64>, ActivationPattern)> {
        self.check_input(x)?;
        let mut bits = Vec::with_capacity(self.hidden_neurons());
        let logits = self.output_logits(x, Some(&mut bits));
        Ok((self.apply_output(logits), ActivationPattern(bits)))
    }

    pub fn pattern(&self, x: &[f64]) -> Result<ActivationPattern> {
        self.forward_with_pattern(x).map(|(_, p)| p)
    }

    /// Predicted class for classification nets: `z > 0` for binary, argmax of
    /// the logits for multi-class with exact ties going to the later index.
    /// `None` for regression.
    pub fn label(&self, x: &[f64]) -> Result<Option<usize>> {
        let z = self.logits(x)?;
        Ok(match self.task {
            TaskKind::Regression => None,
            TaskKind::ClassificationBinary => Some(usize::from(z[0] > 0.0)),
            TaskKind::ClassificationMulti => Some(argmax_last(&z)),
        })
    }
}

/// Index of the maximum, preferring the later index on exact ties.
pub fn argmax_last(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x >= v[best] {
            best = i;
        }
    }
    best
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn logistic(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

fn softmax(z: &[f64]) -> Vec<f64> {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|v| (v - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

pub fn load_network(path: impl AsRef<Path>) -> Result<NetworkSpec> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    NetworkSpec::from_json_str(&text)
}

pub fn save_network(net: &NetworkSpec, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, net.to_json_string() + "\n").map_err(|e| Error::io(path, e))
}

/// Which hidden neurons are active, in layer-major order. Serialized as a
/// string of `0`/`1` characters.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct ActivationPattern(pub Vec<bool>);

impl ActivationPattern {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn active_count(&self) -> usize {
        self.0.iter().filter(|b| **b).count()
    }
}

impl fmt::Display for ActivationPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for ActivationPattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Parse(format!("invalid pattern character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(ActivationPattern)
    }
}

impl Serialize for ActivationPattern {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ActivationPattern {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
