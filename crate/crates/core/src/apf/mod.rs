//! Adaptive potential function.
//!
//! The continuous arm state is reduced to a tip-position grid cell (a
//! *potential state*). Every finished episode is ranked by its episodic reward
//! in a [`TrajectoryBuffer`]; a network regresses, per cell, how much more
//! often the cell shows up in good than in bad trajectories. That network is
//! the potential used for shaping rewards.

mod buffer;
pub mod invariance;

use ndarray::{Array1, Array2, Axis};
use rand::seq::SliceRandom;
use rand::Rng;

pub use buffer::{Commit, Occurrence, OccurrenceCounts, TrajectoryBuffer};
pub use invariance::{verify_policy_invariance, InvarianceReport, Outcome, TabularMdp};

use crate::env::EnvState;
use crate::error::{Error, Result};
use crate::nn::{DenseNet, OutputActivation};

/// Default grid resolution of the potential-state space, meters.
pub const CELL_SIZE: f64 = 0.1;

/// Coordinates this close to a cell boundary count as lying on it.
const BOUNDARY_SNAP: f64 = 1e-12;

/// Integer grid cell containing the arm tip.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PotentialState {
    pub cx: i32,
    pub cy: i32,
    pub cz: i32,
}

impl PotentialState {
    pub fn new(cx: i32, cy: i32, cz: i32) -> Self {
        PotentialState { cx, cy, cz }
    }

    pub fn as_input(&self) -> [f64; 3] {
        [self.cx as f64, self.cy as f64, self.cz as f64]
    }
}

/// Cell index of each tip coordinate, `floor(coordinate / cell_size)`.
///
/// Joint angles are ignored.
pub fn map_state(state: &EnvState, cell_size: f64) -> PotentialState {
    let [x, y, z] = state.tip.map(|c| cell_index(c, cell_size));
    PotentialState::new(x, y, z)
}

fn cell_index(coordinate: f64, cell_size: f64) -> i32 {
    let scaled = coordinate / cell_size;
    let nearest = scaled.round();
    // 0.3 / 0.1 evaluates just below 3; exact boundaries belong to the upper cell
    if (nearest * cell_size - coordinate).abs() <= BOUNDARY_SNAP * coordinate.abs().max(1.0) {
        nearest as i32
    } else {
        scaled.floor() as i32
    }
}

/// Potential states visited during one episode, initial state included.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub states: Vec<PotentialState>,
    pub episodic_reward: f64,
}

impl Trajectory {
    pub fn new(states: Vec<PotentialState>, episodic_reward: f64) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::EmptyTrajectory);
        }
        Ok(Trajectory {
            states,
            episodic_reward,
        })
    }
}

/// Regression target for a cell: `(good - bad) / (good + bad)`, in `[-1, 1]`.
pub fn apf_target(n_good: u32, n_bad: u32) -> Result<f64> {
    let total = n_good as f64 + n_bad as f64;
    if total == 0.0 {
        return Err(Error::InsufficientData("cell was never visited".into()));
    }
    Ok((n_good as f64 - n_bad as f64) / total)
}

/// How the shaping term discounts the next potential.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShapingForm {
    /// `gamma * phi(s') - phi(s)`; preserves optimal policies.
    #[default]
    Discounted,
    /// `phi(s') - phi(s)`.
    Undiscounted,
}

/// `gamma * phi(Z(s')) - phi(Z(s))` (or the undiscounted variant).
pub fn shaping_reward(
    net: &DenseNet,
    state: &EnvState,
    next_state: &EnvState,
    gamma: f64,
    form: ShapingForm,
    cell_size: f64,
) -> Result<f64> {
    let here = potential(net, map_state(state, cell_size))?;
    let there = potential(net, map_state(next_state, cell_size))?;
    Ok(shaping_from_potentials(here, there, gamma, form))
}

pub fn shaping_from_potentials(here: f64, there: f64, gamma: f64, form: ShapingForm) -> f64 {
    match form {
        ShapingForm::Discounted => gamma * there - here,
        ShapingForm::Undiscounted => there - here,
    }
}

pub fn potential(net: &DenseNet, cell: PotentialState) -> Result<f64> {
    Ok(net.forward(&cell.as_input())?[0])
}

/// Mean squared error of `net` against the count targets.
pub fn apf_loss(net: &DenseNet, counts: &OccurrenceCounts) -> Result<f64> {
    if counts.is_empty() {
        return Ok(0.0);
    }
    let (inputs, targets) = training_rows(counts, counts.iter().map(|(s, _)| *s).collect())?;
    let out = net.forward_batch(inputs.view())?;
    Ok((&out.column(0) - &targets).mapv(|d| d * d).mean().unwrap())
}

fn training_rows(
    counts: &OccurrenceCounts,
    cells: Vec<PotentialState>,
) -> Result<(Array2<f64>, Array1<f64>)> {
    let mut inputs = Array2::zeros((cells.len(), 3));
    let mut targets = Array1::zeros(cells.len());
    for (i, cell) in cells.iter().enumerate() {
        let o = counts.get(cell).expect("cell drawn from counts");
        inputs.row_mut(i).assign(&Array1::from(cell.as_input().to_vec()));
        targets[i] = apf_target(o.good, o.bad)?;
    }
    Ok((inputs, targets))
}

/// One shuffled epoch of minibatch SGD over the distinct cells in `counts`.
/// Returns the mean minibatch loss measured before each step, or `None` for
/// empty counts.
pub fn update_apf<R: Rng + ?Sized>(
    net: &mut DenseNet,
    counts: &OccurrenceCounts,
    learning_rate: f64,
    batch_size: usize,
    rng: &mut R,
) -> Result<Option<f64>> {
    if counts.is_empty() {
        return Ok(None);
    }
    if batch_size == 0 {
        return Err(Error::Config("APF batch size must be positive".into()));
    }
    let mut cells: Vec<PotentialState> = counts.iter().map(|(s, _)| *s).collect();
    cells.shuffle(rng);
    let mut weighted_loss = 0.0;
    for chunk in cells.chunks(batch_size) {
        let (inputs, targets) = training_rows(counts, chunk.to_vec())?;
        let tape = net.forward_tape(inputs.view())?;
        let n = chunk.len() as f64;
        let diff = &tape.output().column(0) - &targets;
        let loss = diff.mapv(|d| d * d).sum() / n;
        if !loss.is_finite() {
            return Err(Error::NonFinite(format!("APF loss ({loss})")));
        }
        weighted_loss += loss * n;
        let upstream = (diff * (2.0 / n)).insert_axis(Axis(1));
        let grads = net.parameter_grads(&tape, upstream.view())?;
        net.sgd_step(&grads, learning_rate)?;
    }
    Ok(Some(weighted_loss / cells.len() as f64))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApfConfig {
    pub hidden: Vec<usize>,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub trajectory_capacity: usize,
    pub cell_size: f64,
    pub shaping: ShapingForm,
}

impl Default for ApfConfig {
    fn default() -> Self {
        ApfConfig {
            hidden: vec![512, 256],
            learning_rate: 0.02,
            batch_size: 64,
            trajectory_capacity: 2000,
            cell_size: CELL_SIZE,
            shaping: ShapingForm::Discounted,
        }
    }
}

impl ApfConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!(
                "APF learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.batch_size < 2 {
            return Err(Error::Config("APF batch size must be at least 2".into()));
        }
        if self.trajectory_capacity < 2 {
            return Err(Error::Config("trajectory capacity must be at least 2".into()));
        }
        if !(self.cell_size > 0.0 && self.cell_size.is_finite()) {
            return Err(Error::Config("cell size must be positive".into()));
        }
        Ok(())
    }
}

/// Result of the once-per-episode APF update attempt.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ApfUpdate {
    /// Either half of the buffer could not yet supply half a batch.
    Skipped,
    Applied { loss: f64, cells: usize },
}

/// The potential network together with its trajectory buffer.
#[derive(Debug, Clone)]
pub struct Apf {
    pub net: DenseNet,
    pub buffer: TrajectoryBuffer,
    pub config: ApfConfig,
}

impl Apf {
    pub fn new(config: ApfConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let sizes: Vec<usize> = std::iter::once(3)
            .chain(config.hidden.iter().copied())
            .chain(std::iter::once(1))
            .collect();
        Ok(Apf {
            net: DenseNet::init(&sizes, OutputActivation::Identity, seed)?,
            buffer: TrajectoryBuffer::new(config.trajectory_capacity)?,
            config,
        })
    }

    pub fn map(&self, state: &EnvState) -> PotentialState {
        map_state(state, self.config.cell_size)
    }

    pub fn potential(&self, cell: PotentialState) -> Result<f64> {
        potential(&self.net, cell)
    }

    pub fn shaping_reward(&self, state: &EnvState, next_state: &EnvState, gamma: f64) -> Result<f64> {
        shaping_reward(
            &self.net,
            state,
            next_state,
            gamma,
            self.config.shaping,
            self.config.cell_size,
        )
    }

    /// Stores the finished trajectory, then trains on a fresh good/bad sample.
    pub fn end_episode<R: Rng + ?Sized>(
        &mut self,
        trajectory: Trajectory,
        rng: &mut R,
    ) -> Result<ApfUpdate> {
        self.buffer.commit(trajectory)?;
        let Some(counts) = self.buffer.sample_and_count(self.config.batch_size, rng) else {
            return Ok(ApfUpdate::Skipped);
        };
        let loss = update_apf(
            &mut self.net,
            &counts,
            self.config.learning_rate,
            self.config.batch_size,
            rng,
        )?
        .expect("sampled trajectories are non-empty");
        Ok(ApfUpdate::Applied {
            loss,
            cells: counts.len(),
        })
    }
}
