//! Deterministic kinematic reaching task for a three-joint arm.
//!
//! The arm is a yaw joint followed by two pitch joints. The state carries the
//! tip position together with the joint angles that produce it; actions are
//! per-step joint increments bounded by `MAX_JOINT_DELTA`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Largest per-step change of any controlled joint, in radians.
pub const MAX_JOINT_DELTA: f64 = PI / 16.0;

/// Tip position and joint angles `(x, y, z, j1, j2, j4)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvState {
    pub tip: [f64; 3],
    pub joints: [f64; 3],
}

impl EnvState {
    pub const DIM: usize = 6;

    pub fn to_array(&self) -> [f64; 6] {
        let [x, y, z] = self.tip;
        let [j1, j2, j4] = self.joints;
        [x, y, z, j1, j2, j4]
    }

    pub fn from_array(v: [f64; 6]) -> Self {
        EnvState {
            tip: [v[0], v[1], v[2]],
            joints: [v[3], v[4], v[5]],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }
}

/// Joint increments `(d1, d2, d4)` in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Action {
    pub deltas: [f64; 3],
}

impl Action {
    pub const DIM: usize = 3;

    pub fn new(deltas: [f64; 3]) -> Self {
        Action { deltas }
    }

    /// Each component clamped to `±MAX_JOINT_DELTA`.
    pub fn clamped(&self) -> Action {
        Action {
            deltas: self
                .deltas
                .map(|d| d.clamp(-MAX_JOINT_DELTA, MAX_JOINT_DELTA)),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.deltas.iter().all(|d| d.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Terminal {
    None,
    Goal,
    Collision,
    Timeout,
}

impl Terminal {
    pub fn is_terminal(self) -> bool {
        self != Terminal::None
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub next_state: EnvState,
    pub reward: f64,
    pub terminal: Terminal,
    pub distance: f64,
    /// The action after clamping, i.e. what was actually applied.
    pub applied: Action,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvConfig {
    /// Upper-arm and forearm lengths in meters.
    pub link_lengths: [f64; 2],
    pub goal: [f64; 3],
    pub goal_tolerance: f64,
    /// `[low, high]` per controlled joint, radians.
    pub joint_limits: [[f64; 2]; 3],
    /// The tip colliding with the floor means `tip_z < floor_height`.
    pub floor_height: f64,
    pub max_steps: usize,
    pub gamma: f64,
}

impl Default for EnvConfig {
    fn default() -> Self {
        EnvConfig {
            link_lengths: [0.37, 0.52],
            goal: [0.0, 0.45, 0.45],
            goal_tolerance: 0.1,
            joint_limits: [[-1.5, 1.5]; 3],
            floor_height: -0.3,
            max_steps: 100,
            gamma: 0.99,
        }
    }
}

impl EnvConfig {
    pub fn validate(&self) -> Result<()> {
        let [l1, l2] = self.link_lengths;
        if !(l1 > 0.0 && l2 > 0.0 && l1.is_finite() && l2.is_finite()) {
            return Err(Error::Config(format!(
                "link lengths must be positive, got {:?}",
                self.link_lengths
            )));
        }
        if self.goal_tolerance.is_nan() || self.goal_tolerance <= 0.0 {
            return Err(Error::Config("goal tolerance must be positive".into()));
        }
        let reach = norm(self.goal);
        if !((l1 - l2).abs() + self.goal_tolerance < reach && reach < l1 + l2) {
            return Err(Error::Config(format!(
                "goal {:?} (|g| = {reach:.4}) is outside the reachable shell ({:.4}, {:.4})",
                self.goal,
                (l1 - l2).abs() + self.goal_tolerance,
                l1 + l2
            )));
        }
        for (i, [lo, hi]) in self.joint_limits.iter().enumerate() {
            if !(lo <= &0.0 && &0.0 <= hi) {
                return Err(Error::Config(format!(
                    "joint {i} limits [{lo}, {hi}] must contain the initial angle 0"
                )));
            }
        }
        if !self.floor_height.is_finite() {
            return Err(Error::Config("floor height must be finite".into()));
        }
        if self.max_steps == 0 {
            return Err(Error::Config("max_steps must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::Config(format!("gamma must lie in [0, 1], got {}", self.gamma)));
        }
        Ok(())
    }

    pub fn forward_kinematics(&self, joints: [f64; 3]) -> [f64; 3] {
        forward_kinematics(joints, self.link_lengths)
    }

    /// The fixed start pose: all joints at zero.
    pub fn reset(&self) -> EnvState {
        let joints = [0.0; 3];
        EnvState {
            tip: self.forward_kinematics(joints),
            joints,
        }
    }

    /// One deterministic transition; reward and termination are judged on the
    /// resulting state.
    pub fn step(&self, state: &EnvState, action: &Action, step_index: usize) -> Result<StepOutcome> {
        if step_index >= self.max_steps {
            return Err(Error::EpisodeOver(step_index));
        }
        if !action.is_finite() {
            return Err(Error::NonFinite(format!("action {:?}", action.deltas)));
        }
        let applied = action.clamped();
        let mut joints = state.joints;
        for ((j, d), [lo, hi]) in joints.iter_mut().zip(applied.deltas).zip(self.joint_limits) {
            *j = (*j + d).clamp(lo, hi);
        }
        let next_state = EnvState {
            tip: self.forward_kinematics(joints),
            joints,
        };
        let collided = next_state.tip[2] < self.floor_height;
        let dist = distance(next_state.tip, self.goal);
        let reward = env_reward(dist, collided, self.max_steps);
        let terminal = if collided {
            Terminal::Collision
        } else if dist < self.goal_tolerance {
            Terminal::Goal
        } else if step_index + 1 == self.max_steps {
            Terminal::Timeout
        } else {
            Terminal::None
        };
        Ok(StepOutcome {
            next_state,
            reward,
            terminal,
            distance: dist,
            applied,
        })
    }
}

/// Tip position of the yaw-pitch-pitch chain.
pub fn forward_kinematics(joints: [f64; 3], link_lengths: [f64; 2]) -> [f64; 3] {
    let [j1, j2, j4] = joints;
    let [l1, l2] = link_lengths;
    let (s1, c1) = j1.sin_cos();
    let (s2, c2) = j2.sin_cos();
    let (s24, c24) = (j2 + j4).sin_cos();
    let reach = l1 * c2 + l2 * c24;
    [c1 * reach, s1 * reach, -(l1 * s2 + l2 * s24)]
}

/// Banded distance reward; a collision costs `max_steps`.
pub fn env_reward(distance: f64, collided: bool, max_steps: usize) -> f64 {
    if collided {
        -(max_steps as f64)
    } else if distance < 0.1 {
        1.0
    } else if distance < 0.5 {
        -0.5
    } else if distance <= 1.5 {
        -1.0
    } else {
        -5.0
    }
}

pub fn distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    norm([a[0] - b[0], a[1] - b[1], a[2] - b[2]])
}

fn norm(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Stateful wrapper tracking the current state and step counter of one episode.
#[derive(Debug, Clone)]
pub struct ArmEnv {
    config: EnvConfig,
    state: EnvState,
    steps: usize,
    done: bool,
}

impl ArmEnv {
    pub fn new(config: EnvConfig) -> Result<Self> {
        config.validate()?;
        let state = config.reset();
        Ok(ArmEnv {
            config,
            state,
            steps: 0,
            done: false,
        })
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn state(&self) -> &EnvState {
        &self.state
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn reset(&mut self) -> EnvState {
        self.state = self.config.reset();
        self.steps = 0;
        self.done = false;
        self.state
    }

    pub fn step(&mut self, action: &Action) -> Result<StepOutcome> {
        if self.done {
            return Err(Error::EpisodeOver(self.steps));
        }
        let outcome = self.config.step(&self.state, action, self.steps)?;
        self.state = outcome.next_state;
        self.steps += 1;
        self.done = outcome.terminal.is_terminal();
        Ok(outcome)
    }
}
