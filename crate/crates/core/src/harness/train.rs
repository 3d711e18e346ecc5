use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{AgentKind, ExperimentConfig, RankBy};
use super::records::{write_records, EpisodeEnd, EpisodeRecord};
use crate::apf::{Apf, ApfUpdate, Trajectory};
use crate::ddpg::{DdpgAgent, Transition, UpdateOutcome};
use crate::env::ArmEnv;
use crate::error::{Error, Result};
use crate::rng::{init_seed, stream, Stream};

/// How often each part of the training loop ran.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ScheduleCounters {
    pub episodes: u64,
    pub env_steps: u64,
    pub ddpg_update_attempts: u64,
    pub ddpg_updates_applied: u64,
    pub apf_update_attempts: u64,
    pub apf_updates_applied: u64,
}

/// All state owned by one training run.
pub struct RunContext {
    pub run_id: usize,
    pub env: ArmEnv,
    pub agent: DdpgAgent,
    pub apf: Option<Apf>,
    pub counters: ScheduleCounters,
    config: ExperimentConfig,
    exploration_rng: ChaCha8Rng,
    replay_rng: ChaCha8Rng,
    trajectory_rng: ChaCha8Rng,
}

impl RunContext {
    pub fn new(config: &ExperimentConfig, run_id: usize) -> Result<Self> {
        config.validate()?;
        let seed = config.seed + run_id as u64;
        let agent = DdpgAgent::new(
            config.ddpg_config(),
            init_seed(seed, Stream::ActorInit),
            init_seed(seed, Stream::CriticInit),
        )?;
        let apf = match config.agent {
            AgentKind::Ddpg => None,
            AgentKind::ApfDdpg => Some(Apf::new(config.apf_config(), init_seed(seed, Stream::ApfInit))?),
        };
        Ok(RunContext {
            run_id,
            env: ArmEnv::new(config.env_config())?,
            agent,
            apf,
            counters: ScheduleCounters::default(),
            config: config.clone(),
            exploration_rng: stream(seed, Stream::Exploration),
            replay_rng: stream(seed, Stream::ReplaySampling),
            trajectory_rng: stream(seed, Stream::TrajectorySampling),
        })
    }

    /// One episode: act, step, shape, store, update DDPG every step; then one
    /// APF update attempt when the episode ends.
    pub fn run_episode(&mut self, episode: usize) -> Result<EpisodeRecord> {
        let epsilon = self.config.epsilon(episode);
        let gamma = self.config.gamma;
        let mut state = self.env.reset();

        let mut cells = Vec::new();
        let mut phi_here = 0.0;
        if let Some(apf) = &self.apf {
            let cell = apf.map(&state);
            cells.push(cell);
            phi_here = apf.potential(cell)?;
        }

        let mut raw_total = 0.0;
        let mut shaped_total = 0.0;
        let end = loop {
            let action = self
                .agent
                .nets
                .select_action(&state, epsilon, &mut self.exploration_rng)?;
            let outcome = self.env.step(&action)?;
            self.counters.env_steps += 1;

            let mut reward = outcome.reward;
            if let Some(apf) = &self.apf {
                // the potential network only changes between episodes
                let cell = apf.map(&outcome.next_state);
                let phi_next = apf.potential(cell)?;
                reward += crate::apf::shaping_from_potentials(phi_here, phi_next, gamma, apf.config.shaping);
                cells.push(cell);
                phi_here = phi_next;
            }
            raw_total += outcome.reward;
            shaped_total += reward;

            self.agent.store(Transition {
                state,
                action: outcome.applied,
                reward,
                next_state: outcome.next_state,
                terminal: outcome.terminal.is_terminal(),
            })?;
            self.counters.ddpg_update_attempts += 1;
            if let UpdateOutcome::Applied { .. } = self.agent.update(&mut self.replay_rng)? {
                self.counters.ddpg_updates_applied += 1;
            }

            state = outcome.next_state;
            if let Some(end) = EpisodeEnd::from_terminal(outcome.terminal) {
                break end;
            }
        };

        if let Some(apf) = &mut self.apf {
            let rank_reward = match self.config.rank_by {
                RankBy::Raw => raw_total,
                RankBy::Shaped => shaped_total,
            };
            self.counters.apf_update_attempts += 1;
            let trajectory = Trajectory::new(std::mem::take(&mut cells), rank_reward)?;
            if let ApfUpdate::Applied { .. } = apf.end_episode(trajectory, &mut self.trajectory_rng)? {
                self.counters.apf_updates_applied += 1;
            }
        }
        self.counters.episodes += 1;

        Ok(EpisodeRecord {
            run_id: self.run_id,
            episode,
            reward: raw_total,
            steps: self.env.steps(),
            terminal: end,
        })
    }
}

/// Outcome of one complete training run.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub run_id: usize,
    pub records: Vec<EpisodeRecord>,
    pub counters: ScheduleCounters,
    /// Set when training stopped on a non-finite value.
    pub divergence: Option<String>,
    pub actor: crate::nn::DenseNet,
    pub apf: Option<crate::nn::DenseNet>,
}

/// Trains one run for `config.episodes` episodes. A run that hits a
/// non-finite loss is stopped; its remaining episodes are recorded as
/// `diverged` with the worst possible reward.
pub fn run_single(
    config: &ExperimentConfig,
    run_id: usize,
    progress: &(dyn Fn(&EpisodeRecord) + Sync),
) -> Result<RunResult> {
    let mut ctx = RunContext::new(config, run_id)?;
    let mut records = Vec::with_capacity(config.episodes);
    let mut divergence = None;
    for episode in 0..config.episodes {
        match ctx.run_episode(episode) {
            Ok(record) => {
                progress(&record);
                records.push(record);
            }
            Err(Error::NonFinite(what)) => {
                divergence = Some(format!("run {run_id} diverged at episode {episode}: non-finite {what}"));
                records.extend((episode..config.episodes).map(|e| EpisodeRecord {
                    run_id,
                    episode: e,
                    reward: -(config.max_steps as f64),
                    steps: config.max_steps,
                    terminal: EpisodeEnd::Diverged,
                }));
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(RunResult {
        run_id,
        records,
        counters: ctx.counters,
        divergence,
        actor: ctx.agent.nets.actor,
        apf: ctx.apf.map(|a| a.net),
    })
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub records: Vec<EpisodeRecord>,
    pub runs: Vec<RunResult>,
    pub csv_path: std::path::PathBuf,
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    run_experiment_with_progress(config, &|_| {})
}

/// Runs every seed (concurrently where threads are available), then writes
/// the episode CSV and, if enabled, the trained networks.
pub fn run_experiment_with_progress(
    config: &ExperimentConfig,
    progress: &(dyn Fn(&EpisodeRecord) + Sync),
) -> Result<ExperimentOutput> {
    config.validate()?;
    std::fs::create_dir_all(&config.out_dir).map_err(|e| Error::io(&config.out_dir, e))?;

    let mut runs = (0..config.runs)
        .into_par_iter()
        .map(|run_id| run_single(config, run_id, progress))
        .collect::<Result<Vec<_>>>()?;
    runs.sort_by_key(|r| r.run_id);

    let records: Vec<EpisodeRecord> = runs.iter().flat_map(|r| r.records.iter().copied()).collect();
    let csv_path = config.episodes_csv_path();
    write_records(&csv_path, &records)?;
    if config.save_models {
        for run in &runs {
            run.actor.save(config.actor_model_path(run.run_id))?;
            if let Some(apf) = &run.apf {
                apf.save(config.apf_model_path(run.run_id))?;
            }
        }
    }
    Ok(ExperimentOutput {
        records,
        runs,
        csv_path,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(agent: AgentKind) -> ExperimentConfig {
        ExperimentConfig {
            agent,
            episodes: 3,
            runs: 1,
            actor_hidden: vec![16],
            critic_hidden: vec![16],
            apf_hidden: vec![8],
            batch_size: 8,
            trajectory_capacity: 20,
            max_steps: 20,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn plain_ddpg_has_no_apf_machinery() {
        let mut ctx = RunContext::new(&tiny(AgentKind::Ddpg), 0).unwrap();
        ctx.run_episode(0).unwrap();
        assert!(ctx.apf.is_none());
        assert_eq!(ctx.counters.apf_update_attempts, 0);
    }

    #[test]
    fn records_are_consistent() {
        let mut ctx = RunContext::new(&tiny(AgentKind::ApfDdpg), 0).unwrap();
        for e in 0..3 {
            let r = ctx.run_episode(e).unwrap();
            assert!((1..=20).contains(&r.steps));
            assert_eq!(r.episode, e);
            if r.terminal == EpisodeEnd::Timeout {
                assert_eq!(r.steps, 20);
            }
        }
        let trajectories = ctx.apf.as_ref().unwrap().buffer.trajectories();
        assert_eq!(trajectories.len(), 3);
        assert!(trajectories.iter().all(|t| t.states.len() <= 21));
    }

    #[test]
    fn diverging_runs_are_marked_failed() {
        let config = ExperimentConfig {
            lr_critic: 1e12,
            ..tiny(AgentKind::Ddpg)
        };
        let result = run_single(&config, 0, &|_| {}).unwrap();
        assert!(result.divergence.is_some());
        assert_eq!(result.records.len(), 3);
        assert_eq!(result.records.last().unwrap().terminal, EpisodeEnd::Diverged);
    }
}
