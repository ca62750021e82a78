use serde::{Deserialize, Serialize};

use super::{similarity, ActionSpace, FeatureConfig, State, ACTION_SPLIT};
use crate::error::{Error, Result};
use crate::measures::{suffix_table, Evaluator, Measure};
use crate::search::Best;
use crate::trajectory::{Interval, Point};

/// Result of one environment step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub state: State,
    pub reward: f64,
    pub terminal: bool,
}

/// A decided position in an episode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub position: usize,
    pub anchor: usize,
    pub action: usize,
}

/// Splitting environment over one `(T, Q)` pair.
///
/// `T[h, t]` is the current prefix. Points skipped by a skip action are left
/// out of the prefix evaluation, so with skips the prefix value is that of the
/// simplified prefix made of the scanned points only.
#[derive(Debug, Clone)]
pub struct SplitEnv<'a> {
    t: &'a [Point],
    features: FeatureConfig,
    actions: ActionSpace,
    suffix: Vec<f64>,
    ev: Evaluator,
    anchor: usize,
    position: usize,
    pre: f64,
    best: Best,
    theta_best: f64,
    done: bool,
    explored: u64,
    skipped: u64,
    trace: Vec<Decision>,
}

impl<'a> SplitEnv<'a> {
    /// Starts an episode at `p_1` with `theta_best = 0`.
    pub fn new(t: &'a [Point], q: &[Point], measure: Measure, features: FeatureConfig, k: usize) -> Self {
        assert!(!t.is_empty() && !q.is_empty(), "empty trajectory");
        let suffix = suffix_table(measure, t, q);
        let mut ev = Evaluator::new(measure, q);
        let pre = ev.start(&t[0]);
        SplitEnv {
            t,
            features,
            actions: ActionSpace { k },
            suffix,
            ev,
            anchor: 1,
            position: 1,
            pre,
            best: Best::new(),
            theta_best: 0.0,
            done: false,
            explored: 0,
            skipped: 0,
            trace: Vec::new(),
        }
    }

    pub fn state(&self) -> State {
        State::new(self.theta_best, similarity(self.pre), similarity(self.suffix[self.position - 1]), self.features)
    }

    pub fn actions(&self) -> ActionSpace {
        self.actions
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    pub fn position(&self) -> usize {
        self.position
    }

    pub fn anchor(&self) -> usize {
        self.anchor
    }

    pub fn step(&mut self, action: usize) -> Result<Step> {
        if self.done {
            return Err(Error::EpisodeFinished);
        }
        if action >= self.actions.len() {
            return Err(Error::InvalidParam(format!("action {action} outside 0..{}", self.actions.len())));
        }
        let n = self.t.len();
        let (h, i) = (self.anchor, self.position);
        let suf = self.suffix[i - 1];
        self.best.offer(Interval::new(h, i), self.pre);
        self.best.offer(Interval::new(i, n), suf);
        self.explored += 2;
        self.trace.push(Decision { position: i, anchor: h, action });

        let before = self.theta_best;
        self.theta_best = before.max(similarity(self.pre)).max(similarity(suf));

        let skip = self.actions.skip_of(action);
        let next = i + 1 + skip;
        self.skipped += skip.min(n - i) as u64;
        if action == ACTION_SPLIT {
            self.anchor = i + 1;
        }
        if next > n {
            self.done = true;
        } else {
            self.pre = if action == ACTION_SPLIT {
                self.ev.start(&self.t[next - 1])
            } else {
                self.ev.extend(&self.t[next - 1])
            };
            self.position = next;
        }
        Ok(Step { state: self.state(), reward: self.theta_best - before, terminal: self.done })
    }

    /// Best candidate seen so far with its internal (possibly simplified) value.
    pub fn best(&self) -> Option<(Interval, f64)> {
        self.best.interval.map(|iv| (iv, self.best.value))
    }

    pub fn explored(&self) -> u64 {
        self.explored
    }

    pub fn skipped(&self) -> u64 {
        self.skipped
    }

    pub fn trace(&self) -> &[Decision] {
        &self.trace
    }
}
