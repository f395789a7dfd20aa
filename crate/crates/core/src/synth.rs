//! Random network generation for property tests, benchmarks and the
//! pattern-census experiments.

use crate::netio::{Activation, LayerSpec, LeafActivation, NetworkSpec, TaskKind};
use crate::rng::SeededRng;

#[derive(Debug, Clone, PartialEq)]
pub struct RandomNetConfig {
    pub input_dim: usize,
    pub hidden: Vec<usize>,
    pub task: TaskKind,
    /// Output units: classes for multi-class, action dims for regression.
    pub outputs: usize,
    pub leaky: bool,
    pub dense: bool,
    pub tanh_leaf: bool,
    /// Weights and biases are drawn uniformly from `[-scale, scale]`.
    pub scale: f64,
}

impl RandomNetConfig {
    pub fn regression(input_dim: usize, hidden: Vec<usize>) -> Self {
        RandomNetConfig {
            input_dim,
            hidden,
            task: TaskKind::Regression,
            outputs: 1,
            leaky: false,
            dense: false,
            tanh_leaf: false,
            scale: 1.0,
        }
    }

    /// A small random architecture: 1 to 3 hidden layers of 1 to 4 neurons,
    /// 1 to 4 inputs. `variant` cycles through regression, binary and
    /// multi-class tasks, and relu/leaky and standard/dense wiring.
    pub fn any(rng: &mut SeededRng, variant: usize) -> Self {
        let depth = 1 + rng.below(3);
        let hidden = (0..depth).map(|_| 1 + rng.below(4)).collect();
        let task = match variant % 3 {
            0 => TaskKind::Regression,
            1 => TaskKind::ClassificationBinary,
            _ => TaskKind::ClassificationMulti,
        };
        let outputs = match task {
            TaskKind::Regression => 1 + rng.below(2),
            TaskKind::ClassificationBinary => 1,
            TaskKind::ClassificationMulti => 3 + rng.below(2),
        };
        RandomNetConfig {
            input_dim: 1 + rng.below(4),
            hidden,
            task,
            outputs,
            leaky: (variant / 3) % 2 == 1,
            dense: (variant / 6) % 2 == 1,
            tanh_leaf: false,
            scale: 1.0,
        }
    }
}

pub fn random_network(rng: &mut SeededRng, cfg: &RandomNetConfig) -> NetworkSpec {
    let mut layers = Vec::with_capacity(cfg.hidden.len() + 1);
    let mut fan_in = cfg.input_dim;
    let draw = |rows: usize, cols: usize, rng: &mut SeededRng| {
        let w = (0..rows)
            .map(|_| (0..cols).map(|_| rng.uniform(-cfg.scale, cfg.scale)).collect())
            .collect();
        let b = (0..rows).map(|_| rng.uniform(-cfg.scale, cfg.scale)).collect();
        (w, b)
    };
    for &width in &cfg.hidden {
        let (w, b) = draw(width, fan_in, rng);
        let act = if cfg.leaky {
            Activation::LeakyRelu(rng.uniform(0.01, 0.5))
        } else {
            Activation::Relu
        };
        layers.push(LayerSpec::new(w, b, act));
        fan_in = if cfg.dense { fan_in + width } else { width };
    }
    let (out_act, width) = match cfg.task {
        TaskKind::Regression => (Activation::Linear, cfg.outputs),
        TaskKind::ClassificationBinary => (Activation::Logistic, 1),
        TaskKind::ClassificationMulti => (Activation::Softmax, cfg.outputs.max(2)),
    };
    let (w, b) = draw(width, fan_in, rng);
    layers.push(LayerSpec::new(w, b, out_act));
    let leaf = if cfg.tanh_leaf && cfg.task == TaskKind::Regression {
        LeafActivation::Tanh
    } else {
        LeafActivation::Identity
    };
    NetworkSpec::new(cfg.input_dim, cfg.task, cfg.dense, leaf, layers).expect("random network is valid by construction")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generated_networks_match_config() {
        let mut rng = SeededRng::new(3);
        for v in 0..24 {
            let cfg = RandomNetConfig::any(&mut rng, v);
            let net = random_network(&mut rng, &cfg);
            assert_eq!(net.task(), cfg.task);
            assert_eq!(net.dense(), cfg.dense);
            assert_eq!(net.hidden_neurons(), cfg.hidden.iter().sum::<usize>());
            assert!(net.hidden_neurons() <= 12);
        }
    }
}
