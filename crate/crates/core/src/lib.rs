//! DDPG with an adaptive potential function (APF) for potential-based reward
//! shaping, trained on a kinematic three-joint reaching arm.
//!
//! * [`nn`]: dense networks with exact gradients and plain SGD.
//! * [`env`]: the reaching task.
//! * [`ddpg`]: actor, critic, targets and experience replay.
//! * [`apf`]: potential states, the trajectory buffer and the learned potential.
//! * [`harness`]: training loop, multi-seed experiments and statistics.

pub mod apf;
pub mod cli;
pub mod ddpg;
pub mod env;
pub mod error;
pub mod harness;
pub mod nn;
pub mod rng;

pub use error::{Error, Result};
