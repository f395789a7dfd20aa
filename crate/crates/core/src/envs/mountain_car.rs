use super::constants::mountain_car::*;
use crate::rng::SeededRng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McState {
    pub position: f64,
    pub velocity: f64,
}

pub fn reset(rng: &mut SeededRng) -> McState {
    McState {
        position: rng.uniform(START_LOW, START_HIGH),
        velocity: 0.0,
    }
}

/// One step; returns `(next, reward, done, clipped)`.
pub fn step(s: McState, action: f64) -> (McState, f64, bool, bool) {
    let force = action.clamp(MIN_ACTION, MAX_ACTION);
    let clipped = force != action;
    let mut velocity = s.velocity + force * POWER - GRAVITY * (3.0 * s.position).cos();
    velocity = velocity.clamp(-MAX_SPEED, MAX_SPEED);
    let position = (s.position + velocity).clamp(MIN_POSITION, MAX_POSITION);
    if position == MIN_POSITION && velocity < 0.0 {
        velocity = 0.0;
    }
    let done = position >= GOAL_POSITION && velocity >= GOAL_VELOCITY;
    let reward = (if done { GOAL_REWARD } else { 0.0 }) - ACTION_COST * force * force;
    (McState { position, velocity }, reward, done, clipped)
}
