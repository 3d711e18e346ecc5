use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::apf::{ApfConfig, ShapingForm};
use crate::ddpg::DdpgConfig;
use crate::env::EnvConfig;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AgentKind {
    Ddpg,
    ApfDdpg,
}

impl AgentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AgentKind::Ddpg => "ddpg",
            AgentKind::ApfDdpg => "apf-ddpg",
        }
    }
}

impl fmt::Display for AgentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AgentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ddpg" => Ok(AgentKind::Ddpg),
            "apf-ddpg" => Ok(AgentKind::ApfDdpg),
            other => Err(Error::Config(format!(
                "unknown agent `{other}` (expected `ddpg` or `apf-ddpg`)"
            ))),
        }
    }
}

/// Which episodic reward ranks trajectories in the APF buffer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RankBy {
    /// Sum of environment rewards only.
    #[default]
    Raw,
    /// Sum of environment plus shaping rewards.
    Shaped,
}

/// Everything one experiment needs. Every field is optional in a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub agent: AgentKind,
    pub episodes: usize,
    pub runs: usize,
    /// Run `k` is seeded with `seed + k`.
    pub seed: u64,
    pub out_dir: PathBuf,
    /// Write each run's actor (and APF) network next to the CSV.
    pub save_models: bool,

    pub gamma: f64,
    pub max_steps: usize,
    pub link_lengths: [f64; 2],
    pub goal: [f64; 3],
    pub goal_tolerance: f64,
    pub joint_limits: [[f64; 2]; 3],
    pub floor_height: f64,

    pub actor_hidden: Vec<usize>,
    pub critic_hidden: Vec<usize>,
    pub lr_critic: f64,
    pub lr_actor: f64,
    pub tau: f64,
    pub batch_size: usize,
    pub replay_capacity: usize,

    pub epsilon_start: f64,
    pub epsilon_end: f64,
    /// Fraction of all episodes over which epsilon decays linearly.
    pub epsilon_decay_fraction: f64,

    pub apf_hidden: Vec<usize>,
    pub lr_apf: f64,
    pub trajectory_capacity: usize,
    pub cell_size: f64,
    pub shaping: ShapingForm,
    pub rank_by: RankBy,

    /// A run whose final-100-episode mean reward is below this failed.
    pub failure_threshold: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let env = EnvConfig::default();
        let ddpg = DdpgConfig::default();
        let apf = ApfConfig::default();
        ExperimentConfig {
            agent: AgentKind::ApfDdpg,
            episodes: 2000,
            runs: 20,
            seed: 0,
            out_dir: PathBuf::from("results"),
            save_models: true,
            gamma: env.gamma,
            max_steps: env.max_steps,
            link_lengths: env.link_lengths,
            goal: env.goal,
            goal_tolerance: env.goal_tolerance,
            joint_limits: env.joint_limits,
            floor_height: env.floor_height,
            actor_hidden: ddpg.actor_hidden,
            critic_hidden: ddpg.critic_hidden,
            lr_critic: ddpg.lr_critic,
            lr_actor: ddpg.lr_actor,
            tau: ddpg.tau,
            batch_size: ddpg.batch_size,
            replay_capacity: ddpg.replay_capacity,
            epsilon_start: 1.0,
            epsilon_end: 0.05,
            epsilon_decay_fraction: 0.25,
            apf_hidden: apf.hidden,
            lr_apf: apf.learning_rate,
            trajectory_capacity: apf.trajectory_capacity,
            cell_size: apf.cell_size,
            shaping: apf.shaping,
            rank_by: RankBy::Raw,
            failure_threshold: -50.0,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn env_config(&self) -> EnvConfig {
        EnvConfig {
            link_lengths: self.link_lengths,
            goal: self.goal,
            goal_tolerance: self.goal_tolerance,
            joint_limits: self.joint_limits,
            floor_height: self.floor_height,
            max_steps: self.max_steps,
            gamma: self.gamma,
        }
    }

    pub fn ddpg_config(&self) -> DdpgConfig {
        DdpgConfig {
            actor_hidden: self.actor_hidden.clone(),
            critic_hidden: self.critic_hidden.clone(),
            lr_critic: self.lr_critic,
            lr_actor: self.lr_actor,
            gamma: self.gamma,
            tau: self.tau,
            batch_size: self.batch_size,
            replay_capacity: self.replay_capacity,
        }
    }

    pub fn apf_config(&self) -> ApfConfig {
        ApfConfig {
            hidden: self.apf_hidden.clone(),
            learning_rate: self.lr_apf,
            batch_size: self.batch_size,
            trajectory_capacity: self.trajectory_capacity,
            cell_size: self.cell_size,
            shaping: self.shaping,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.episodes == 0 || self.runs == 0 {
            return Err(Error::Config("episodes and runs must be at least 1".into()));
        }
        if self.seed.checked_add(self.runs as u64).is_none() {
            return Err(Error::Config("seed + runs overflows".into()));
        }
        for (name, eps) in [
            ("epsilon_start", self.epsilon_start),
            ("epsilon_end", self.epsilon_end),
            ("epsilon_decay_fraction", self.epsilon_decay_fraction),
        ] {
            if !(0.0..=1.0).contains(&eps) {
                return Err(Error::Config(format!("{name} must lie in [0, 1], got {eps}")));
            }
        }
        if !self.failure_threshold.is_finite() {
            return Err(Error::Config("failure threshold must be finite".into()));
        }
        self.env_config().validate()?;
        self.ddpg_config().validate()?;
        if self.agent == AgentKind::ApfDdpg {
            self.apf_config().validate()?;
        }
        Ok(())
    }

    /// Linear decay from `epsilon_start` to `epsilon_end` over the first
    /// `epsilon_decay_fraction` of the episodes, constant afterwards.
    pub fn epsilon(&self, episode: usize) -> f64 {
        let horizon = self.epsilon_decay_fraction * self.episodes as f64;
        if horizon <= 0.0 {
            return self.epsilon_end;
        }
        let progress = episode as f64 / horizon;
        if progress >= 1.0 {
            return self.epsilon_end;
        }
        self.epsilon_start + (self.epsilon_end - self.epsilon_start) * progress
    }

    pub fn episodes_csv_path(&self) -> PathBuf {
        self.out_dir.join(format!("{}_episodes.csv", self.agent))
    }

    pub fn actor_model_path(&self, run_id: usize) -> PathBuf {
        self.out_dir.join(format!("{}_run{run_id:02}_actor.net", self.agent))
    }

    pub fn apf_model_path(&self, run_id: usize) -> PathBuf {
        self.out_dir.join(format!("{}_run{run_id:02}_apf.net", self.agent))
    }
}
