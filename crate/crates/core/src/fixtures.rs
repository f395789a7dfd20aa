//! Hand-written example models shipped with the crate.

use crate::netio::NetworkSpec;
use crate::pidpolicy::PidPolicySpec;
use crate::tree::ObliqueTree;

pub const RELU3_NET_JSON: &str = include_str!("../fixtures/relu3.net.json");
pub const MCC_DEPTH1_JSON: &str = include_str!("../fixtures/mcc_depth1.tree.json");
pub const MCC_SIMPLIFIED_JSON: &str = include_str!("../fixtures/mcc_simplified.tree.json");
pub const PENDULUM_PID_JSON: &str = include_str!("../fixtures/pendulum_pid.json");

/// Two inputs, three ReLU neurons, one linear output.
pub fn relu3_network() -> NetworkSpec {
    NetworkSpec::from_json_str(RELU3_NET_JSON).expect("fixture is valid")
}

/// Depth-one mountain-car policy over `(x, v_x)`.
pub fn mcc_depth1_tree() -> ObliqueTree {
    ObliqueTree::from_json_str(MCC_DEPTH1_JSON).expect("fixture is valid")
}

/// Its hand-simplified form: push in the direction of motion.
pub fn mcc_simplified_tree() -> ObliqueTree {
    ObliqueTree::from_json_str(MCC_SIMPLIFIED_JSON).expect("fixture is valid")
}

/// Depth-one PID controller for pendulum, `ε = [1, 0, 0]`, `k = 5`.
pub fn pendulum_pid_policy() -> PidPolicySpec {
    serde_json::from_str(PENDULUM_PID_JSON).expect("fixture is valid")
}
