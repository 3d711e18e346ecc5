use apf_ddpg::apf::{Commit, PotentialState, Trajectory, TrajectoryBuffer};
use apf_ddpg::ddpg::{ReplayBuffer, Transition};
use apf_ddpg::env::{Action, EnvState};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn transition(id: usize) -> Transition {
    let s = EnvState::from_array([id as f64, 0.0, 0.0, 0.0, 0.0, 0.0]);
    Transition {
        state: s,
        action: Action::new([0.01, 0.0, -0.01]),
        reward: id as f64,
        next_state: s,
        terminal: id.is_multiple_of(7),
    }
}

fn tagged(id: usize, reward: f64, len: usize) -> Trajectory {
    Trajectory::new(vec![PotentialState::new(id as i32, 0, 0); len], reward).unwrap()
}

proptest! {
    #[test]
    fn replay_keeps_the_most_recent(capacity in 1usize..64, n in 0usize..300) {
        let mut buf = ReplayBuffer::new(capacity).unwrap();
        for id in 0..n {
            buf.push(transition(id)).unwrap();
            prop_assert!(buf.len() <= capacity);
        }
        let ids: Vec<usize> = buf.iter().map(|t| t.reward as usize).collect();
        prop_assert_eq!(ids, (n.saturating_sub(capacity)..n).collect::<Vec<_>>());
    }

    #[test]
    fn trajectory_buffer_holds_the_best(capacity in 1usize..40, rewards in prop::collection::vec(-8i32..8, 0..200)) {
        let mut buf = TrajectoryBuffer::new(capacity).unwrap();
        for (id, &r) in rewards.iter().enumerate() {
            let before = buf.len();
            let commit = buf.commit(tagged(id, f64::from(r), 1)).unwrap();
            match commit {
                Commit::Inserted => prop_assert_eq!(buf.len(), before + 1),
                Commit::Evicted | Commit::Rejected => prop_assert_eq!(buf.len(), capacity),
            }
            let stored = buf.trajectories();
            prop_assert!(stored.windows(2).all(|w| w[0].episodic_reward >= w[1].episodic_reward));
        }
        let mut order: Vec<usize> = (0..rewards.len()).collect();
        order.sort_by(|&a, &b| rewards[b].cmp(&rewards[a]).then(b.cmp(&a)));
        order.truncate(capacity);
        let held: Vec<usize> = buf.trajectories().iter().map(|t| t.states[0].cx as usize).collect();
        prop_assert_eq!(held, order);
    }

    #[test]
    fn sampling_draws_half_from_each_side(n in 2usize..80, batch in 2usize..40, seed in any::<u64>()) {
        let mut buf = TrajectoryBuffer::new(100).unwrap();
        for id in 0..n {
            // trajectory `id` has id + 1 visits of its own cell
            buf.commit(tagged(id, -(id as f64), id + 1)).unwrap();
        }
        let half = batch / 2;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let counts = buf.sample_and_count(batch, &mut rng);
        let (good, bad) = (n / 2, n - n / 2);
        if good < half || bad < half {
            prop_assert!(counts.is_none());
        } else {
            let counts = counts.unwrap();
            prop_assert_eq!(counts.len(), 2 * half);
            for (cell, occ) in counts.iter() {
                let id = cell.cx as usize;
                let visits = id as u32 + 1;
                if id < good {
                    prop_assert_eq!((occ.good, occ.bad), (visits, 0));
                } else {
                    prop_assert_eq!((occ.good, occ.bad), (0, visits));
                }
            }
        }
    }
}

#[test]
fn full_size_capacities() {
    let mut replay = ReplayBuffer::new(10_000).unwrap();
    for id in 0..10_500 {
        replay.push(transition(id)).unwrap();
    }
    assert_eq!(replay.len(), 10_000);
    assert_eq!(replay.iter().next().unwrap().reward, 500.0);

    let mut trajectories = TrajectoryBuffer::new(2_000).unwrap();
    for id in 0..2_100 {
        trajectories.commit(tagged(id, (id % 50) as f64, 1)).unwrap();
    }
    assert_eq!(trajectories.len(), 2_000);
    let lowest = trajectories.trajectories().last().unwrap().episodic_reward;
    assert!(lowest >= 2.0);
}

#[test]
fn replay_sampling_is_uniform() {
    let n = 100;
    let mut buf = ReplayBuffer::new(n).unwrap();
    for id in 0..n {
        buf.push(transition(id)).unwrap();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let draws = 100_000;
    let mut hits = vec![0u32; n];
    for _ in 0..draws / 64 {
        let batch = buf.sample(64, &mut rng).unwrap();
        for r in batch.rewards.iter() {
            hits[*r as usize] += 1;
        }
    }
    let total = (draws / 64 * 64) as f64;
    let p = 1.0 / n as f64;
    let sigma = (total * p * (1.0 - p)).sqrt();
    for (id, &h) in hits.iter().enumerate() {
        let z = (h as f64 - total * p) / sigma;
        assert!(z.abs() < 5.0, "slot {id}: {h} hits, z = {z:.2}");
    }
}

#[test]
fn rejects_invalid_entries() {
    let mut replay = ReplayBuffer::new(4).unwrap();
    let mut bad = transition(1);
    bad.reward = f64::NAN;
    assert!(replay.push(bad).is_err());
    assert!(ReplayBuffer::new(0).is_err());
    assert!(Trajectory::new(vec![], 1.0).is_err());
    let mut traj = TrajectoryBuffer::new(4).unwrap();
    assert!(traj.commit(tagged(0, f64::INFINITY, 1)).is_err());
}
