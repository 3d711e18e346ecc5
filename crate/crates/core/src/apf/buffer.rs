use std::collections::BTreeMap;

use rand::seq::index;
use rand::Rng;

use super::{PotentialState, Trajectory};
use crate::error::{Error, Result};

/// What happened to a trajectory offered to a full or partially full buffer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Commit {
    Inserted,
    /// Inserted; the lowest-ranked stored trajectory was dropped.
    Evicted,
    /// Ranked below everything in a full buffer.
    Rejected,
}

/// The best trajectories seen so far, ordered by episodic reward, highest first.
///
/// Among equal rewards the newer trajectory ranks first, so the entry dropped
/// on overflow is the oldest of the lowest reward.
#[derive(Debug, Clone)]
pub struct TrajectoryBuffer {
    entries: Vec<Trajectory>,
    capacity: usize,
}

impl TrajectoryBuffer {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::Config("trajectory capacity must be at least 1".into()));
        }
        Ok(TrajectoryBuffer {
            entries: Vec::new(),
            capacity,
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Stored trajectories in rank order.
    pub fn trajectories(&self) -> &[Trajectory] {
        &self.entries
    }

    pub fn commit(&mut self, trajectory: Trajectory) -> Result<Commit> {
        if trajectory.states.is_empty() {
            return Err(Error::EmptyTrajectory);
        }
        if !trajectory.episodic_reward.is_finite() {
            return Err(Error::NonFinite("episodic reward".into()));
        }
        let reward = trajectory.episodic_reward;
        let pos = self.entries.partition_point(|t| t.episodic_reward > reward);
        if pos == self.capacity {
            return Ok(Commit::Rejected);
        }
        self.entries.insert(pos, trajectory);
        if self.entries.len() > self.capacity {
            self.entries.pop();
            Ok(Commit::Evicted)
        } else {
            Ok(Commit::Inserted)
        }
    }

    /// The first `floor(n / 2)` trajectories are good, the rest bad.
    pub fn split_good_bad(&self) -> Result<(&[Trajectory], &[Trajectory])> {
        if self.entries.len() < 2 {
            return Err(Error::InsufficientData(format!(
                "good/bad split needs at least 2 trajectories, have {}",
                self.entries.len()
            )));
        }
        Ok(self.entries.split_at(self.entries.len() / 2))
    }

    /// Samples `batch_size / 2` trajectories without replacement from each
    /// half and counts every potential-state visit in them. `None` when either
    /// half is too small.
    pub fn sample_and_count<R: Rng + ?Sized>(
        &self,
        batch_size: usize,
        rng: &mut R,
    ) -> Option<OccurrenceCounts> {
        let half = batch_size / 2;
        let (good, bad) = self.split_good_bad().ok()?;
        if half == 0 || good.len() < half || bad.len() < half {
            return None;
        }
        let mut counts = OccurrenceCounts::default();
        for i in index::sample(rng, good.len(), half) {
            for &s in &good[i].states {
                counts.add_good(s);
            }
        }
        for i in index::sample(rng, bad.len(), half) {
            for &s in &bad[i].states {
                counts.add_bad(s);
            }
        }
        Some(counts)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Occurrence {
    pub good: u32,
    pub bad: u32,
}

/// Visit counts per potential state over the sampled good and bad sets.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OccurrenceCounts {
    counts: BTreeMap<PotentialState, Occurrence>,
}

impl OccurrenceCounts {
    pub fn add_good(&mut self, state: PotentialState) {
        self.counts.entry(state).or_default().good += 1;
    }

    pub fn add_bad(&mut self, state: PotentialState) {
        self.counts.entry(state).or_default().bad += 1;
    }

    pub fn get(&self, state: &PotentialState) -> Option<Occurrence> {
        self.counts.get(state).copied()
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Total number of visits counted, good and bad together.
    pub fn total(&self) -> u64 {
        self.counts
            .values()
            .map(|o| u64::from(o.good) + u64::from(o.bad))
            .sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PotentialState, &Occurrence)> {
        self.counts.iter()
    }
}
