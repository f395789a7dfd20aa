//! Dynamics constants of the two benchmark environments, transcribed from
//! the standard published implementations.

/// Continuous mountain car.
pub mod mountain_car {
    pub const MIN_ACTION: f64 = -1.0;
    pub const MAX_ACTION: f64 = 1.0;
    pub const MIN_POSITION: f64 = -1.2;
    pub const MAX_POSITION: f64 = 0.6;
    pub const MAX_SPEED: f64 = 0.07;
    pub const GOAL_POSITION: f64 = 0.45;
    pub const GOAL_VELOCITY: f64 = 0.0;
    pub const POWER: f64 = 0.0015;
    /// Gravity term is `GRAVITY * cos(3 x)`.
    pub const GRAVITY: f64 = 0.0025;
    pub const GOAL_REWARD: f64 = 100.0;
    pub const ACTION_COST: f64 = 0.1;
    /// Initial position is uniform on this interval; initial velocity is 0.
    pub const START_LOW: f64 = -0.6;
    pub const START_HIGH: f64 = -0.4;
    pub const MAX_STEPS: usize = 999;
}

/// Pendulum swing-up.
pub mod pendulum {
    pub const G: f64 = 10.0;
    pub const M: f64 = 1.0;
    pub const L: f64 = 1.0;
    pub const DT: f64 = 0.05;
    pub const MAX_TORQUE: f64 = 2.0;
    pub const MAX_SPEED: f64 = 8.0;
    pub const SPEED_COST: f64 = 0.1;
    pub const TORQUE_COST: f64 = 0.001;
    /// Initial angle is uniform on `[-π, π]`, angular velocity on `[-1, 1]`.
    pub const START_SPEED: f64 = 1.0;
    pub const MAX_STEPS: usize = 200;
}
