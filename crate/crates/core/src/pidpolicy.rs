//! Discretized PID-controller policies.
//!
//! With stable point `ε`, current state `s` and a history `h` of the last
//! `k` states (oldest first):
//!
//! ```text
//! P = ε - s      I = Σ_{h'∈h} (ε - h')      D = last(h) - s
//! ```
//!
//! and action `a_j = θ_P·P + θ_I·I + θ_D·D`, where the θ blocks come from a
//! tree (or network) evaluated on the raw state. The θ vector is laid out per
//! action dimension as `[θ_P | θ_I | θ_D]`, each block `s_dim` long. When
//! `s_dim == d` the short form of `3·d` scalars is also accepted, giving one
//! independent scalar PID loop per state channel.
//!
//! The action is computed from the history *before* `s` is appended. Until the
//! history fills, `I` sums over what is there and `D` is zero on the very
//! first step.

use std::collections::VecDeque;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netio::{NetworkSpec, TaskKind};
use crate::tree::{ObliqueTree, Prediction};

pub const DEFAULT_HISTORY_LEN: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub enum ThetaSource {
    Tree(ObliqueTree),
    Network(NetworkSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PidDoc", into = "PidDoc")]
pub struct PidPolicySpec {
    epsilon: Vec<f64>,
    history_len: usize,
    action_dim: usize,
    theta: ThetaSource,
}

#[derive(Serialize, Deserialize)]
struct PidDoc {
    kind: String,
    epsilon: Vec<f64>,
    #[serde(default = "default_history_len")]
    history_len: usize,
    #[serde(default = "default_action_dim")]
    action_dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    theta_tree: Option<ObliqueTree>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    theta_network: Option<NetworkSpec>,
}

fn default_history_len() -> usize {
    DEFAULT_HISTORY_LEN
}

fn default_action_dim() -> usize {
    1
}

impl TryFrom<PidDoc> for PidPolicySpec {
    type Error = Error;

    fn try_from(doc: PidDoc) -> Result<Self> {
        if doc.kind != "pid" {
            return Err(Error::InvalidPolicy(format!("expected kind \"pid\", found {:?}", doc.kind)));
        }
        let theta = match (doc.theta_tree, doc.theta_network) {
            (Some(t), None) => {
                t.validate()?;
                ThetaSource::Tree(t)
            }
            (None, Some(n)) => ThetaSource::Network(n),
            _ => {
                return Err(Error::InvalidPolicy(
                    "exactly one of theta_tree and theta_network is required".into(),
                ))
            }
        };
        PidPolicySpec::new(doc.epsilon, doc.history_len, doc.action_dim, theta)
    }
}

impl From<PidPolicySpec> for PidDoc {
    fn from(p: PidPolicySpec) -> Self {
        let (theta_tree, theta_network) = match p.theta {
            ThetaSource::Tree(t) => (Some(t), None),
            ThetaSource::Network(n) => (None, Some(n)),
        };
        PidDoc {
            kind: "pid".into(),
            epsilon: p.epsilon,
            history_len: p.history_len,
            action_dim: p.action_dim,
            theta_tree,
            theta_network,
        }
    }
}

/// Which of the two θ layouts a source's output size selects.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThetaLayout {
    /// `3·d·s_dim` coefficients, `[θ_P | θ_I | θ_D]` per action.
    Full,
    /// `3·d` scalars, per-channel loops (`s_dim == d`).
    PerChannel,
}

impl PidPolicySpec {
    pub fn new(epsilon: Vec<f64>, history_len: usize, action_dim: usize, theta: ThetaSource) -> Result<Self> {
        if epsilon.is_empty() || epsilon.iter().any(|e| !e.is_finite()) {
            return Err(Error::InvalidPolicy("epsilon must be a non-empty finite vector".into()));
        }
        if history_len == 0 {
            return Err(Error::InvalidPolicy("history_len must be at least 1".into()));
        }
        if action_dim == 0 {
            return Err(Error::InvalidPolicy("action_dim must be at least 1".into()));
        }
        let (input_dim, out, task) = match &theta {
            ThetaSource::Tree(t) => (t.input_dim, t.output_dim, t.task),
            ThetaSource::Network(n) => (n.input_dim(), n.output_dim(), n.task()),
        };
        if task != TaskKind::Regression {
            return Err(Error::InvalidPolicy("theta source must be a regression model".into()));
        }
        if input_dim != epsilon.len() {
            return Err(Error::Dimension {
                expected: epsilon.len(),
                got: input_dim,
            });
        }
        let spec = PidPolicySpec {
            epsilon,
            history_len,
            action_dim,
            theta,
        };
        spec.layout_for(out)?;
        Ok(spec)
    }

    pub fn epsilon(&self) -> &[f64] {
        &self.epsilon
    }

    pub fn state_dim(&self) -> usize {
        self.epsilon.len()
    }

    pub fn history_len(&self) -> usize {
        self.history_len
    }

    pub fn action_dim(&self) -> usize {
        self.action_dim
    }

    pub fn theta(&self) -> &ThetaSource {
        &self.theta
    }

    pub fn theta_tree(&self) -> Option<&ObliqueTree> {
        match &self.theta {
            ThetaSource::Tree(t) => Some(t),
            ThetaSource::Network(_) => None,
        }
    }

    pub fn layout(&self) -> ThetaLayout {
        let out = match &self.theta {
            ThetaSource::Tree(t) => t.output_dim,
            ThetaSource::Network(n) => n.output_dim(),
        };
        self.layout_for(out).expect("checked at construction")
    }

    fn layout_for(&self, out: usize) -> Result<ThetaLayout> {
        let (d, s) = (self.action_dim, self.state_dim());
        if out == 3 * d * s {
            Ok(ThetaLayout::Full)
        } else if out == 3 * d && s == d {
            Ok(ThetaLayout::PerChannel)
        } else {
            Err(Error::ThetaShape(format!(
                "theta has {out} values; expected {} (3·d·s_dim){}",
                3 * d * s,
                if s == d { format!(" or {}", 3 * d) } else { String::new() }
            )))
        }
    }

    /// θ evaluated at `s`, in file layout.
    pub fn theta_at(&self, s: &[f64]) -> Result<Vec<f64>> {
        match &self.theta {
            ThetaSource::Tree(t) => match t.predict(s)? {
                Prediction::Values(v) => Ok(v),
                Prediction::Pruned { .. } => Err(Error::InvalidPolicy("theta tree reached a pruned leaf".into())),
                Prediction::Label(_) => unreachable!("regression tree"),
            },
            ThetaSource::Network(n) => n.forward(s),
        }
    }

    pub fn new_state(&self) -> PidState {
        PidState::new(self.history_len)
    }

    /// Action for state `s`; appends `s` to the history afterwards.
    pub fn act(&self, s: &[f64], state: &mut PidState) -> Result<Vec<f64>> {
        let f = pid_features(&self.epsilon, s, state)?;
        let theta = self.theta_at(s)?;
        let sd = self.state_dim();
        let action = match self.layout() {
            ThetaLayout::Full => theta
                .chunks(3 * sd)
                .map(|blk| {
                    let (tp, rest) = blk.split_at(sd);
                    let (ti, td) = rest.split_at(sd);
                    dot(tp, &f.p) + dot(ti, &f.i) + dot(td, &f.d)
                })
                .collect(),
            ThetaLayout::PerChannel => theta
                .chunks(3)
                .enumerate()
                .map(|(j, t)| t[0] * f.p[j] + t[1] * f.i[j] + t[2] * f.d[j])
                .collect(),
        };
        state.push(s.to_vec());
        Ok(action)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// The last `k` states, oldest first.
#[derive(Debug, Clone, PartialEq)]
pub struct PidState {
    capacity: usize,
    history: VecDeque<Vec<f64>>,
}

impl PidState {
    pub fn new(capacity: usize) -> Self {
        PidState {
            capacity,
            history: VecDeque::with_capacity(capacity + 1),
        }
    }

    pub fn push(&mut self, s: Vec<f64>) {
        self.history.push_back(s);
        while self.history.len() > self.capacity {
            self.history.pop_front();
        }
    }

    pub fn len(&self) -> usize {
        self.history.len()
    }

    pub fn is_empty(&self) -> bool {
        self.history.is_empty()
    }

    pub fn last(&self) -> Option<&[f64]> {
        self.history.back().map(Vec::as_slice)
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.history.iter().map(Vec::as_slice)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PidFeatures {
    pub p: Vec<f64>,
    pub i: Vec<f64>,
    pub d: Vec<f64>,
}

pub fn pid_features(eps: &[f64], s: &[f64], h: &PidState) -> Result<PidFeatures> {
    if s.len() != eps.len() {
        return Err(Error::Dimension {
            expected: eps.len(),
            got: s.len(),
        });
    }
    let p: Vec<f64> = eps.iter().zip(s).map(|(e, x)| e - x).collect();
    let mut i = vec![0.0; eps.len()];
    for past in h.iter() {
        if past.len() != eps.len() {
            return Err(Error::Dimension {
                expected: eps.len(),
                got: past.len(),
            });
        }
        for ((acc, e), x) in i.iter_mut().zip(eps).zip(past) {
            *acc += e - x;
        }
    }
    let d = match h.last() {
        Some(last) => last.iter().zip(s).map(|(a, b)| a - b).collect(),
        None => vec![0.0; eps.len()],
    };
    Ok(PidFeatures { p, i, d })
}

pub fn load_pid_policy(path: impl AsRef<Path>) -> Result<PidPolicySpec> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

pub fn save_pid_policy(spec: &PidPolicySpec, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = serde_json::to_string_pretty(spec)? + "\n";
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
