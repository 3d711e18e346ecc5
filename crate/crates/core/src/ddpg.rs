//! Off-policy deterministic actor-critic with replay and soft target tracking.

use ndarray::{concatenate, s, Array1, Array2, ArrayView2, Axis};
use rand::Rng;

use crate::env::{Action, EnvState, MAX_JOINT_DELTA};
use crate::error::{Error, Result};
use crate::nn::{DenseNet, OutputActivation};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub state: EnvState,
    pub action: Action,
    /// Shaped reward when a potential function is active, raw otherwise.
    pub reward: f64,
    pub next_state: EnvState,
    pub terminal: bool,
}

impl Transition {
    pub fn is_finite(&self) -> bool {
        self.state.is_finite()
            && self.action.is_finite()
            && self.reward.is_finite()
            && self.next_state.is_finite()
    }
}

/// Fixed-capacity ring of the most recent transitions.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    items: Vec<Transition>,
    capacity: usize,
    // slot the next push overwrites once full
    head: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::Config("replay capacity must be at least 1".into()));
        }
        Ok(ReplayBuffer {
            items: Vec::with_capacity(capacity.min(1 << 16)),
            capacity,
            head: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn push(&mut self, transition: Transition) -> Result<()> {
        if !transition.is_finite() {
            return Err(Error::NonFinite("transition".into()));
        }
        if self.items.len() < self.capacity {
            self.items.push(transition);
        } else {
            self.items[self.head] = transition;
            self.head = (self.head + 1) % self.capacity;
        }
        Ok(())
    }

    /// Transitions from oldest to newest.
    pub fn iter(&self) -> impl Iterator<Item = &Transition> {
        let (newer, older) = self.items.split_at(self.head);
        older.iter().chain(newer)
    }

    /// Uniform indices, drawn with replacement, into the storage order.
    pub fn sample_indices<R: Rng + ?Sized>(&self, batch_size: usize, rng: &mut R) -> Vec<usize> {
        (0..batch_size)
            .map(|_| rng.gen_range(0..self.items.len()))
            .collect()
    }

    /// `None` while fewer than `batch_size` transitions are stored.
    pub fn sample<R: Rng + ?Sized>(&self, batch_size: usize, rng: &mut R) -> Option<Batch> {
        if batch_size == 0 || self.items.len() < batch_size {
            return None;
        }
        let picked: Vec<&Transition> = self
            .sample_indices(batch_size, rng)
            .into_iter()
            .map(|i| &self.items[i])
            .collect();
        Some(Batch::from_transitions(&picked))
    }
}

/// A minibatch laid out as row-major matrices.
#[derive(Debug, Clone)]
pub struct Batch {
    pub states: Array2<f64>,
    pub actions: Array2<f64>,
    pub rewards: Array1<f64>,
    pub next_states: Array2<f64>,
    pub terminal: Vec<bool>,
}

impl Batch {
    pub fn from_transitions(ts: &[&Transition]) -> Self {
        let n = ts.len();
        let mut states = Array2::zeros((n, EnvState::DIM));
        let mut next_states = Array2::zeros((n, EnvState::DIM));
        let mut actions = Array2::zeros((n, Action::DIM));
        for (i, t) in ts.iter().enumerate() {
            states.row_mut(i).assign(&Array1::from(t.state.to_array().to_vec()));
            next_states
                .row_mut(i)
                .assign(&Array1::from(t.next_state.to_array().to_vec()));
            actions.row_mut(i).assign(&Array1::from(t.action.deltas.to_vec()));
        }
        Batch {
            states,
            actions,
            rewards: ts.iter().map(|t| t.reward).collect(),
            next_states,
            terminal: ts.iter().map(|t| t.terminal).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DdpgConfig {
    pub actor_hidden: Vec<usize>,
    pub critic_hidden: Vec<usize>,
    pub lr_critic: f64,
    pub lr_actor: f64,
    pub gamma: f64,
    pub tau: f64,
    pub batch_size: usize,
    pub replay_capacity: usize,
}

impl Default for DdpgConfig {
    fn default() -> Self {
        DdpgConfig {
            actor_hidden: vec![512, 512],
            critic_hidden: vec![512, 512],
            lr_critic: 0.02,
            lr_actor: 0.01,
            gamma: 0.99,
            tau: 0.01,
            batch_size: 64,
            replay_capacity: 10_000,
        }
    }
}

impl DdpgConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, lr) in [("lr_critic", self.lr_critic), ("lr_actor", self.lr_actor)] {
            if !(lr > 0.0 && lr.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {lr}")));
            }
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::Config(format!("gamma must lie in [0, 1], got {}", self.gamma)));
        }
        if !(0.0..=1.0).contains(&self.tau) {
            return Err(Error::Config(format!("tau must lie in [0, 1], got {}", self.tau)));
        }
        if self.batch_size == 0 || self.replay_capacity == 0 {
            return Err(Error::Config("batch size and replay capacity must be positive".into()));
        }
        Ok(())
    }
}

/// Online and target copies of the actor and critic.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentNets {
    pub actor: DenseNet,
    pub critic: DenseNet,
    pub target_actor: DenseNet,
    pub target_critic: DenseNet,
}

impl AgentNets {
    pub fn init(config: &DdpgConfig, actor_seed: u64, critic_seed: u64) -> Result<Self> {
        let actor_sizes: Vec<usize> = std::iter::once(EnvState::DIM)
            .chain(config.actor_hidden.iter().copied())
            .chain(std::iter::once(Action::DIM))
            .collect();
        let critic_sizes: Vec<usize> = std::iter::once(EnvState::DIM + Action::DIM)
            .chain(config.critic_hidden.iter().copied())
            .chain(std::iter::once(1))
            .collect();
        let actor = DenseNet::init(
            &actor_sizes,
            OutputActivation::ScaledTanh {
                scale: MAX_JOINT_DELTA,
            },
            actor_seed,
        )?;
        let critic = DenseNet::init(&critic_sizes, OutputActivation::Identity, critic_seed)?;
        Self::from_parts(actor, critic)
    }

    /// Targets start as exact copies of the online networks.
    pub fn from_parts(actor: DenseNet, critic: DenseNet) -> Result<Self> {
        if actor.input_size() != EnvState::DIM || actor.output_size() != Action::DIM {
            return Err(Error::Config(format!(
                "actor must map {} -> {}, got {:?}",
                EnvState::DIM,
                Action::DIM,
                actor.layer_sizes()
            )));
        }
        if critic.input_size() != EnvState::DIM + Action::DIM || critic.output_size() != 1 {
            return Err(Error::Config(format!(
                "critic must map {} -> 1, got {:?}",
                EnvState::DIM + Action::DIM,
                critic.layer_sizes()
            )));
        }
        Ok(AgentNets {
            target_actor: actor.clone(),
            target_critic: critic.clone(),
            actor,
            critic,
        })
    }

    pub fn act_greedy(&self, state: &EnvState) -> Result<Action> {
        let out = self.actor.forward(&state.to_array())?;
        Ok(Action::new([out[0], out[1], out[2]]))
    }

    /// Epsilon-greedy: with probability `epsilon` every component is uniform
    /// in `±MAX_JOINT_DELTA`, otherwise the actor's action.
    pub fn select_action<R: Rng + ?Sized>(
        &self,
        state: &EnvState,
        epsilon: f64,
        rng: &mut R,
    ) -> Result<Action> {
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(Error::Config(format!("epsilon must lie in [0, 1], got {epsilon}")));
        }
        if rng.gen::<f64>() < epsilon {
            Ok(Action::new(std::array::from_fn(|_| {
                rng.gen_range(-MAX_JOINT_DELTA..=MAX_JOINT_DELTA)
            })))
        } else {
            self.act_greedy(state)
        }
    }

    /// Bootstrapped regression target `r + gamma * Q'(s', mu'(s'))`, or `r` at terminals.
    pub fn critic_target(
        &self,
        reward: f64,
        next_state: &EnvState,
        terminal: bool,
        gamma: f64,
    ) -> Result<f64> {
        if terminal {
            return Ok(reward);
        }
        let s = next_state.to_array();
        let a = self.target_actor.forward(&s)?;
        let input: Vec<f64> = s.iter().chain(&a).copied().collect();
        Ok(reward + gamma * self.target_critic.forward(&input)?[0])
    }

    fn critic_targets(&self, batch: &Batch, gamma: f64) -> Result<Array1<f64>> {
        let next_actions = self.target_actor.forward_batch(batch.next_states.view())?;
        let q_next = self
            .target_critic
            .forward_batch(state_action(batch.next_states.view(), next_actions.view()).view())?;
        Ok(batch
            .rewards
            .iter()
            .zip(&batch.terminal)
            .zip(q_next.column(0))
            .map(|((&r, &done), &q)| if done { r } else { r + gamma * q })
            .collect())
    }

    /// One SGD step on the mean squared Bellman error. Returns the loss
    /// before the step.
    pub fn critic_step(&mut self, batch: &Batch, gamma: f64, lr: f64) -> Result<f64> {
        let targets = self.critic_targets(batch, gamma)?;
        let tape = self
            .critic
            .forward_tape(state_action(batch.states.view(), batch.actions.view()).view())?;
        let n = batch.len() as f64;
        let diff = &tape.output().column(0) - &targets;
        let loss = diff.mapv(|d| d * d).sum() / n;
        if !loss.is_finite() {
            return Err(Error::NonFinite(format!("critic loss ({loss})")));
        }
        let upstream = (diff * (2.0 / n)).insert_axis(Axis(1));
        let grads = self.critic.parameter_grads(&tape, upstream.view())?;
        self.critic.sgd_step(&grads, lr)?;
        Ok(loss)
    }

    /// One gradient-ascent step of the actor on the mean of `Q(s, mu(s))`.
    /// The critic is only read. Returns the objective before the step.
    pub fn actor_step(&mut self, states: ArrayView2<'_, f64>, lr: f64) -> Result<f64> {
        let actor_tape = self.actor.forward_tape(states)?;
        let critic_tape = self
            .critic
            .forward_tape(state_action(states, actor_tape.output().view()).view())?;
        let n = states.nrows() as f64;
        let objective = critic_tape.output().sum() / n;
        if !objective.is_finite() {
            return Err(Error::NonFinite(format!("actor objective ({objective})")));
        }
        let upstream = Array2::from_elem((states.nrows(), 1), 1.0 / n);
        let input_grad = self.critic.input_grads(&critic_tape, upstream.view())?;
        let action_grad = input_grad.slice(s![.., EnvState::DIM..]);
        let mut grads = self.actor.parameter_grads(&actor_tape, action_grad)?;
        grads.scale(-1.0);
        self.actor.sgd_step(&grads, lr)?;
        Ok(objective)
    }

    pub fn soft_update_targets(&mut self, tau: f64) -> Result<()> {
        self.target_critic.soft_update_from(&self.critic, tau)?;
        self.target_actor.soft_update_from(&self.actor, tau)
    }
}

fn state_action(states: ArrayView2<'_, f64>, actions: ArrayView2<'_, f64>) -> Array2<f64> {
    concatenate![Axis(1), states, actions]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UpdateOutcome {
    /// Not enough transitions stored yet.
    Skipped,
    Applied { critic_loss: f64, actor_objective: f64 },
}

#[derive(Debug, Clone)]
pub struct DdpgAgent {
    pub nets: AgentNets,
    pub buffer: ReplayBuffer,
    pub config: DdpgConfig,
}

impl DdpgAgent {
    pub fn new(config: DdpgConfig, actor_seed: u64, critic_seed: u64) -> Result<Self> {
        config.validate()?;
        Ok(DdpgAgent {
            nets: AgentNets::init(&config, actor_seed, critic_seed)?,
            buffer: ReplayBuffer::new(config.replay_capacity)?,
            config,
        })
    }

    pub fn store(&mut self, transition: Transition) -> Result<()> {
        self.buffer.push(transition)
    }

    /// Critic step, actor step, then soft target update, on one uniformly
    /// sampled minibatch.
    pub fn update<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<UpdateOutcome> {
        let Some(batch) = self.buffer.sample(self.config.batch_size, rng) else {
            return Ok(UpdateOutcome::Skipped);
        };
        let critic_loss = self
            .nets
            .critic_step(&batch, self.config.gamma, self.config.lr_critic)?;
        let actor_objective = self
            .nets
            .actor_step(batch.states.view(), self.config.lr_actor)?;
        self.nets.soft_update_targets(self.config.tau)?;
        Ok(UpdateOutcome::Applied {
            critic_loss,
            actor_objective,
        })
    }
}
