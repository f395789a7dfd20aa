//! Compile fully-connected ReLU / LeakyReLU policy networks into exactly
//! equivalent oblique decision trees, and render those trees as small
//! if-then-else programs.
//!
//! The pipeline is:
//!
//! * [`netio`] loads a network and provides the reference forward pass.
//! * [`translator`] rewrites every hidden neuron's pre-activation as an affine
//!   function of the input, one branch per activation state, producing an
//!   [`tree::ObliqueTree`].
//! * [`tree`] evaluates, prunes (by activation trace) and measures trees.
//! * [`emitter`] prints trees as programs and parses them back.
//! * [`pidpolicy`] wraps a θ-producing tree as a discretized PID controller.
//! * [`envs`] holds seeded control environments and the rollout engine.

pub mod emitter;
pub mod envs;
pub mod error;
pub mod fixtures;
pub mod netio;
pub mod pidpolicy;
pub mod rng;
pub mod synth;
pub mod translator;
pub mod tree;

pub use error::{Error, Result};
pub use netio::{Activation, ActivationPattern, LayerSpec, LeafActivation, NetworkSpec, TaskKind};
pub use tree::{ActivationTrace, ObliqueTree, Prediction, TreeNode};
