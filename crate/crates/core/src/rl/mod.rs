//! Trajectory splitting as a Markov decision process, learned with a small
//! deep Q-network.
//!
//! The agent scans the data trajectory point by point. At each scanned point it
//! observes `(best, prefix, suffix)` similarities and chooses to continue (0),
//! split (1) or skip `j` points (`1 + j`, `j = 1..=k`).

mod env;
mod policy;
mod qnet;
mod replay;
mod search;
mod train;

use serde::{Deserialize, Serialize};

pub use env::{Decision, SplitEnv, Step};
pub use policy::{Policy, POLICY_VERSION, SIMILARITY_TAG};
pub use qnet::{Adam, QNetwork};
pub use replay::ReplayMemory;
pub use search::{rls_search, rls_search_traced, rls_skip_search, rls_skip_search_traced};
pub use train::{train, train_on_pairs, EpisodeLog, TrainConfig, TrainOutput};

pub const ACTION_CONTINUE: usize = 0;
pub const ACTION_SPLIT: usize = 1;

/// Similarity features are quantized to multiples of 2^-32, so rewards (their
/// differences) and reward sums are exact in binary floating point.
pub const SIM_QUANTUM: f64 = 1.0 / 4_294_967_296.0;

/// `1 / (1 + d)` rounded to the nearest multiple of [`SIM_QUANTUM`].
pub fn similarity(d: f64) -> f64 {
    ((1.0 / (1.0 + d)) / SIM_QUANTUM).round() * SIM_QUANTUM
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureConfig {
    /// `(best, prefix, suffix)`
    WithSuffix,
    /// `(best, prefix)`
    PrefixOnly,
}

impl FeatureConfig {
    pub fn dim(&self) -> usize {
        match self {
            FeatureConfig::WithSuffix => 3,
            FeatureConfig::PrefixOnly => 2,
        }
    }

    /// Default per measure: the grid embedding drops the suffix feature.
    pub fn default_for(measure: crate::Measure) -> Self {
        if measure.is_dp() {
            FeatureConfig::WithSuffix
        } else {
            FeatureConfig::PrefixOnly
        }
    }
}

/// Observation `(theta_best, theta_pre[, theta_suf])`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct State {
    values: [f64; 3],
    dim: usize,
}

impl State {
    pub fn new(best: f64, pre: f64, suf: f64, features: FeatureConfig) -> Self {
        State { values: [best, pre, suf], dim: features.dim() }
    }

    pub fn best(&self) -> f64 {
        self.values[0]
    }

    pub fn pre(&self) -> f64 {
        self.values[1]
    }

    pub fn suf(&self) -> Option<f64> {
        (self.dim == 3).then_some(self.values[2])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values[..self.dim]
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

/// Actions `0..2+k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionSpace {
    pub k: usize,
}

impl ActionSpace {
    pub fn len(&self) -> usize {
        2 + self.k
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Points skipped by `action`.
    pub fn skip_of(&self, action: usize) -> usize {
        action.saturating_sub(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Experience {
    pub state: State,
    pub action: usize,
    pub reward: f64,
    pub next: State,
    pub terminal: bool,
}

/// Index of the largest value; the lowest index wins ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn similarity_range() {
        assert_eq!(similarity(0.0), 1.0);
        assert_eq!(similarity(f64::INFINITY), 0.0);
        let s = similarity(3.7);
        assert!(s > 0.0 && s < 1.0);
        assert_eq!((s / SIM_QUANTUM).fract(), 0.0);
    }

    #[test]
    fn state_dims() {
        let s = State::new(0.0, 0.5, 0.25, FeatureConfig::PrefixOnly);
        assert_eq!(s.as_slice(), &[0.0, 0.5]);
        assert_eq!(s.suf(), None);
        assert_eq!(State::new(0.0, 0.5, 0.25, FeatureConfig::WithSuffix).suf(), Some(0.25));
    }

    #[test]
    fn argmax_ties_lowest() {
        assert_eq!(argmax(&[0.5, 0.5, 0.2]), 0);
        assert_eq!(argmax(&[0.1, 0.7, 0.7]), 1);
    }
}
