//! Seeded control environments and the rollout engine.
//!
//! Two environments are provided: continuous mountain car (observation
//! `[x, v_x]`) and pendulum (observation `[cos θ, sin θ, θ̇]`). Both take a
//! one-dimensional action that is clipped to the environment's bounds.
//!
//! Initial states are drawn from a per-episode generator
//! `SeededRng::for_stream(seed, episode)`: mountain car draws one uniform
//! position, pendulum draws θ then θ̇. See [`crate::rng`] for the exact
//! uniform mapping.

pub mod constants;
pub mod mountain_car;
pub mod pendulum;
mod rollout;

pub use rollout::{collect_trace, rollout, Policy, RolloutResult};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SeededRng;
use mountain_car::McState;
use pendulum::PendulumState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvId {
    MountainCar,
    Pendulum,
}

impl FromStr for EnvId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mountain_car" | "mountain-car" => Ok(EnvId::MountainCar),
            "pendulum" => Ok(EnvId::Pendulum),
            other => Err(Error::UnknownEnv(other.to_string())),
        }
    }
}

impl fmt::Display for EnvId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EnvId::MountainCar => "mountain_car",
            EnvId::Pendulum => "pendulum",
        })
    }
}

impl EnvId {
    pub fn obs_dim(self) -> usize {
        match self {
            EnvId::MountainCar => 2,
            EnvId::Pendulum => 3,
        }
    }

    pub fn action_dim(self) -> usize {
        1
    }

    pub fn max_steps(self) -> usize {
        match self {
            EnvId::MountainCar => constants::mountain_car::MAX_STEPS,
            EnvId::Pendulum => constants::pendulum::MAX_STEPS,
        }
    }

    pub fn action_bounds(self) -> (f64, f64) {
        match self {
            EnvId::MountainCar => (constants::mountain_car::MIN_ACTION, constants::mountain_car::MAX_ACTION),
            EnvId::Pendulum => (-constants::pendulum::MAX_TORQUE, constants::pendulum::MAX_TORQUE),
        }
    }

    pub fn reset(self, rng: &mut SeededRng) -> EnvState {
        match self {
            EnvId::MountainCar => EnvState::MountainCar(mountain_car::reset(rng)),
            EnvId::Pendulum => EnvState::Pendulum(pendulum::reset(rng)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnvState {
    MountainCar(McState),
    Pendulum(PendulumState),
}

impl EnvState {
    pub fn env(&self) -> EnvId {
        match self {
            EnvState::MountainCar(_) => EnvId::MountainCar,
            EnvState::Pendulum(_) => EnvId::Pendulum,
        }
    }

    pub fn observe(&self) -> Vec<f64> {
        match self {
            EnvState::MountainCar(s) => vec![s.position, s.velocity],
            EnvState::Pendulum(s) => pendulum::observe(*s).to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub state: EnvState,
    pub observation: Vec<f64>,
    pub reward: f64,
    pub done: bool,
    /// The action was outside the bounds and got clipped.
    pub clipped: bool,
}

pub fn env_step(env: EnvId, state: &EnvState, action: &[f64]) -> Result<StepOutcome> {
    if action.len() != env.action_dim() {
        return Err(Error::Dimension {
            expected: env.action_dim(),
            got: action.len(),
        });
    }
    let a = action[0];
    if !a.is_finite() {
        return Err(Error::NonFiniteAction {
            state: state.observe(),
        });
    }
    let (state, reward, done, clipped) = match (env, state) {
        (EnvId::MountainCar, EnvState::MountainCar(s)) => {
            let (n, r, d, c) = mountain_car::step(*s, a);
            (EnvState::MountainCar(n), r, d, c)
        }
        (EnvId::Pendulum, EnvState::Pendulum(s)) => {
            let (n, r, c) = pendulum::step(*s, a);
            (EnvState::Pendulum(n), r, false, c)
        }
        (env, s) => {
            return Err(Error::InvalidArgument(format!(
                "state of {} passed to {}",
                s.env(),
                env
            )))
        }
    };
    Ok(StepOutcome {
        observation: state.observe(),
        state,
        reward,
        done,
        clipped,
    })
}
