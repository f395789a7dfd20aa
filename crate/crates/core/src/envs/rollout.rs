use rayon::prelude::*;
use serde::Serialize;

use super::{env_step, EnvId};
use crate::error::{Error, Result};
use crate::netio::{NetworkSpec, TaskKind};
use crate::pidpolicy::PidPolicySpec;
use crate::rng::SeededRng;
use crate::tree::{ActivationTrace, ObliqueTree, Prediction};

#[derive(Debug, Clone, Copy)]
pub enum Policy<'a> {
    Network(&'a NetworkSpec),
    Tree(&'a ObliqueTree),
    Pid(&'a PidPolicySpec),
}

impl Policy<'_> {
    fn check(&self, env: EnvId) -> Result<()> {
        let (input, output, task) = match self {
            Policy::Network(n) => (n.input_dim(), n.output_dim(), n.task()),
            Policy::Tree(t) => (t.input_dim, t.output_dim, t.task),
            Policy::Pid(p) => (p.state_dim(), p.action_dim(), TaskKind::Regression),
        };
        if task != TaskKind::Regression {
            return Err(Error::InvalidPolicy("control policies must be regression models".into()));
        }
        if input != env.obs_dim() {
            return Err(Error::Dimension {
                expected: env.obs_dim(),
                got: input,
            });
        }
        if output != env.action_dim() {
            return Err(Error::Dimension {
                expected: env.action_dim(),
                got: output,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RolloutResult {
    pub env: EnvId,
    pub seed: u64,
    pub rewards: Vec<f64>,
    pub episode_steps: Vec<usize>,
    pub mean: f64,
    /// Population standard deviation of `rewards`.
    pub std: f64,
    pub steps: usize,
    /// Patterns visited, for network policies.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<ActivationTrace>,
    /// Steps that went through a pruned marker's fallback, for tree policies.
    pub fallback_count: usize,
}

struct Episode {
    reward: f64,
    steps: usize,
    trace: Option<ActivationTrace>,
    fallbacks: usize,
}

fn run_episode(policy: Policy<'_>, env: EnvId, seed: u64, index: u64) -> Result<Episode> {
    let mut rng = SeededRng::for_stream(seed, index);
    let mut state = env.reset(&mut rng);
    let mut pid = match policy {
        Policy::Pid(p) => Some(p.new_state()),
        _ => None,
    };
    let mut trace = match policy {
        Policy::Network(n) => Some(ActivationTrace::new(n.hash())),
        _ => None,
    };
    let mut ep = Episode {
        reward: 0.0,
        steps: 0,
        trace: None,
        fallbacks: 0,
    };
    for _ in 0..env.max_steps() {
        let obs = state.observe();
        let action = match policy {
            Policy::Network(n) => {
                let (out, pattern) = n.forward_with_pattern(&obs)?;
                trace.as_mut().expect("network trace").record(pattern)?;
                out
            }
            Policy::Tree(t) => {
                let inf = t.infer(&obs)?;
                ep.fallbacks += usize::from(inf.fallback);
                match inf.prediction {
                    Prediction::Values(v) => v,
                    _ => {
                        return Err(Error::InvalidPolicy(format!(
                            "tree reached a pruned leaf without fallback at state {obs:?}"
                        )))
                    }
                }
            }
            Policy::Pid(p) => p.act(&obs, pid.as_mut().expect("pid state"))?,
        };
        if action.iter().any(|a| !a.is_finite()) {
            return Err(Error::NonFiniteAction { state: obs });
        }
        let out = env_step(env, &state, &action)?;
        ep.reward += out.reward;
        ep.steps += 1;
        state = out.state;
        if out.done {
            break;
        }
    }
    ep.trace = trace;
    Ok(ep)
}

/// Run `episodes` episodes; episode `i` starts from `SeededRng::for_stream(seed, i)`.
pub fn rollout(policy: Policy<'_>, env: EnvId, episodes: usize, seed: u64) -> Result<RolloutResult> {
    policy.check(env)?;
    let eps: Vec<Episode> = (0..episodes as u64)
        .into_par_iter()
        .map(|i| run_episode(policy, env, seed, i))
        .collect::<Result<_>>()?;

    let rewards: Vec<f64> = eps.iter().map(|e| e.reward).collect();
    let n = rewards.len().max(1) as f64;
    let mean = rewards.iter().sum::<f64>() / n;
    let std = (rewards.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / n).sqrt();
    let trace = match policy {
        Policy::Network(net) => {
            let mut all = ActivationTrace::new(net.hash());
            for e in &eps {
                all.merge(e.trace.as_ref().expect("network trace"))?;
            }
            Some(all)
        }
        _ => None,
    };
    Ok(RolloutResult {
        env,
        seed,
        episode_steps: eps.iter().map(|e| e.steps).collect(),
        steps: eps.iter().map(|e| e.steps).sum(),
        fallback_count: eps.iter().map(|e| e.fallbacks).sum(),
        rewards,
        mean,
        std,
        trace,
    })
}

/// Activation patterns of `net` acting as the policy in `env`.
pub fn collect_trace(net: &NetworkSpec, env: EnvId, episodes: usize, seed: u64) -> Result<ActivationTrace> {
    Ok(rollout(Policy::Network(net), env, episodes, seed)?
        .trace
        .expect("network rollouts record a trace"))
}
