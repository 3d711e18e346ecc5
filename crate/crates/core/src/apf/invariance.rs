//! Tabular check that potential-based shaping leaves greedy policies unchanged.

use crate::error::{Error, Result};

/// Value differences below this are treated as ties when taking argmax.
const TIE_TOLERANCE: f64 = 1e-7;
const MAX_SWEEPS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome {
    pub next: usize,
    pub probability: f64,
    pub reward: f64,
}

/// A finite MDP: `transitions[s][a]` lists the possible outcomes of taking
/// action `a` in state `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularMdp {
    transitions: Vec<Vec<Vec<Outcome>>>,
}

impl TabularMdp {
    pub fn new(transitions: Vec<Vec<Vec<Outcome>>>) -> Result<Self> {
        let n_states = transitions.len();
        if n_states == 0 {
            return Err(Error::MalformedMdp("no states".into()));
        }
        let n_actions = transitions[0].len();
        if n_actions == 0 {
            return Err(Error::MalformedMdp("no actions".into()));
        }
        for (s, row) in transitions.iter().enumerate() {
            if row.len() != n_actions {
                return Err(Error::MalformedMdp(format!(
                    "state {s} has {} actions, expected {n_actions}",
                    row.len()
                )));
            }
            for (a, outcomes) in row.iter().enumerate() {
                let mut total = 0.0;
                for o in outcomes {
                    if o.next >= n_states {
                        return Err(Error::MalformedMdp(format!(
                            "({s}, {a}) leads to unknown state {}",
                            o.next
                        )));
                    }
                    if o.probability.is_nan() || o.probability < 0.0 || !o.reward.is_finite() {
                        return Err(Error::MalformedMdp(format!("({s}, {a}) has an invalid outcome")));
                    }
                    total += o.probability;
                }
                if (total - 1.0).abs() > 1e-9 {
                    return Err(Error::MalformedMdp(format!(
                        "({s}, {a}) probabilities sum to {total}"
                    )));
                }
            }
        }
        Ok(TabularMdp { transitions })
    }

    /// The n-chain: action 1 moves right (reward 1 for staying at the far
    /// end, 0 otherwise); action 0 returns to state 0 for a reward of 0.2.
    pub fn chain(n_states: usize) -> Result<Self> {
        if n_states < 2 {
            return Err(Error::MalformedMdp("a chain needs at least 2 states".into()));
        }
        let last = n_states - 1;
        let transitions = (0..n_states)
            .map(|s| {
                let back = Outcome {
                    next: 0,
                    probability: 1.0,
                    reward: 0.2,
                };
                let forward = Outcome {
                    next: (s + 1).min(last),
                    probability: 1.0,
                    reward: if s == last { 1.0 } else { 0.0 },
                };
                vec![vec![back], vec![forward]]
            })
            .collect();
        TabularMdp::new(transitions)
    }

    pub fn n_states(&self) -> usize {
        self.transitions.len()
    }

    pub fn n_actions(&self) -> usize {
        self.transitions[0].len()
    }

    /// Every reward replaced by `r + gamma * phi(s') - phi(s)`.
    pub fn shaped(&self, potential: &[f64], gamma: f64) -> Result<Self> {
        if potential.len() != self.n_states() {
            return Err(Error::Dimension {
                context: "potential table",
                expected: self.n_states(),
                got: potential.len(),
            });
        }
        let transitions = self
            .transitions
            .iter()
            .enumerate()
            .map(|(s, row)| {
                row.iter()
                    .map(|outcomes| {
                        outcomes
                            .iter()
                            .map(|o| Outcome {
                                reward: o.reward + gamma * potential[o.next] - potential[s],
                                ..*o
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Ok(TabularMdp { transitions })
    }

    /// Action values after value iteration has moved no state value by more
    /// than `tolerance` in a sweep.
    pub fn optimal_q(&self, gamma: f64, tolerance: f64) -> Result<Vec<Vec<f64>>> {
        if !(0.0..1.0).contains(&gamma) {
            return Err(Error::Config(format!(
                "value iteration needs gamma in [0, 1), got {gamma}"
            )));
        }
        let mut values = vec![0.0; self.n_states()];
        for _ in 0..MAX_SWEEPS {
            let q = self.backup(&values, gamma);
            let next: Vec<f64> = q
                .iter()
                .map(|row| row.iter().copied().fold(f64::NEG_INFINITY, f64::max))
                .collect();
            let delta = next
                .iter()
                .zip(&values)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            values = next;
            if delta < tolerance {
                return Ok(self.backup(&values, gamma));
            }
        }
        Err(Error::InsufficientData("value iteration did not converge".into()))
    }

    fn backup(&self, values: &[f64], gamma: f64) -> Vec<Vec<f64>> {
        self.transitions
            .iter()
            .map(|row| {
                row.iter()
                    .map(|outcomes| {
                        outcomes
                            .iter()
                            .map(|o| o.probability * (o.reward + gamma * values[o.next]))
                            .sum()
                    })
                    .collect()
            })
            .collect()
    }
}

/// Argmax per state; near-ties go to the lowest action index.
pub fn greedy_policy(q: &[Vec<f64>]) -> Vec<usize> {
    q.iter()
        .map(|row| {
            let best = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            row.iter()
                .position(|&v| best - v <= TIE_TOLERANCE)
                .expect("at least one action")
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvarianceReport {
    pub raw_policy: Vec<usize>,
    pub shaped_policy: Vec<usize>,
    pub raw_q: Vec<Vec<f64>>,
    pub shaped_q: Vec<Vec<f64>>,
    pub greedy_policies_equal: bool,
}

/// Solves the MDP with raw and with potential-shaped rewards and compares
/// the greedy policies.
pub fn verify_policy_invariance(
    mdp: &TabularMdp,
    potential: &[f64],
    gamma: f64,
) -> Result<InvarianceReport> {
    const TOLERANCE: f64 = 1e-10;
    if potential.iter().any(|p| !p.is_finite()) {
        return Err(Error::NonFinite("potential table".into()));
    }
    let raw_q = mdp.optimal_q(gamma, TOLERANCE)?;
    let shaped_q = mdp.shaped(potential, gamma)?.optimal_q(gamma, TOLERANCE)?;
    let raw_policy = greedy_policy(&raw_q);
    let shaped_policy = greedy_policy(&shaped_q);
    Ok(InvarianceReport {
        greedy_policies_equal: raw_policy == shaped_policy,
        raw_policy,
        shaped_policy,
        raw_q,
        shaped_q,
    })
}
