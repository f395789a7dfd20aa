use std::f64::consts::PI;

use super::constants::pendulum::*;
use crate::rng::SeededRng;

/// `θ = 0` is upright.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PendulumState {
    pub theta: f64,
    pub theta_dot: f64,
}

pub fn reset(rng: &mut SeededRng) -> PendulumState {
    let theta = rng.uniform(-PI, PI);
    let theta_dot = rng.uniform(-START_SPEED, START_SPEED);
    PendulumState { theta, theta_dot }
}

/// Wrap an angle into `[-π, π)`.
pub fn normalize_angle(x: f64) -> f64 {
    (x + PI).rem_euclid(2.0 * PI) - PI
}

pub fn observe(s: PendulumState) -> [f64; 3] {
    [s.theta.cos(), s.theta.sin(), s.theta_dot]
}

/// One step; returns `(next, reward, clipped)`.
pub fn step(s: PendulumState, torque: f64) -> (PendulumState, f64, bool) {
    let u = torque.clamp(-MAX_TORQUE, MAX_TORQUE);
    let th = normalize_angle(s.theta);
    let cost = th * th + SPEED_COST * s.theta_dot * s.theta_dot + TORQUE_COST * u * u;
    let accel = 3.0 * G / (2.0 * L) * s.theta.sin() + 3.0 / (M * L * L) * u;
    let theta_dot = (s.theta_dot + accel * DT).clamp(-MAX_SPEED, MAX_SPEED);
    let theta = s.theta + theta_dot * DT;
    (PendulumState { theta, theta_dot }, -cost, u != torque)
}
