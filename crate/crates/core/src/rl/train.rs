use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{argmax, Adam, Experience, FeatureConfig, Policy, QNetwork, ReplayMemory, SplitEnv};
use crate::error::{Error, Result};
use crate::measures::Measure;
use crate::rng::{seeded, SimRng};
use crate::trajectory::{Dataset, Trajectory};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub episodes: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub gamma: f64,
    pub epsilon_start: f64,
    pub epsilon_min: f64,
    /// Multiplicative decay applied once per episode.
    pub epsilon_decay: f64,
    pub replay_capacity: usize,
    pub hidden: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            episodes: 1000,
            batch_size: 32,
            learning_rate: 0.001,
            gamma: 0.95,
            epsilon_start: 1.0,
            epsilon_min: 0.05,
            epsilon_decay: 0.99,
            replay_capacity: ReplayMemory::DEFAULT_CAPACITY,
            hidden: 20,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParam(msg));
        if !(0.0..1.0).contains(&self.gamma) {
            return bad(format!("gamma must be in [0, 1), got {}", self.gamma));
        }
        if !(0.0..=1.0).contains(&self.epsilon_min) || !(self.epsilon_min..=1.0).contains(&self.epsilon_start) {
            return bad(format!("epsilon range invalid: start {} min {}", self.epsilon_start, self.epsilon_min));
        }
        if !(0.0..=1.0).contains(&self.epsilon_decay) {
            return bad(format!("epsilon decay must be in [0, 1], got {}", self.epsilon_decay));
        }
        if self.batch_size == 0 || self.replay_capacity == 0 || self.hidden == 0 {
            return bad("batch size, replay capacity and hidden width must be positive".into());
        }
        if self.learning_rate <= 0.0 {
            return bad(format!("learning rate must be positive, got {}", self.learning_rate));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeLog {
    pub episode: usize,
    pub theta_best: f64,
    pub epsilon: f64,
    /// Mean minibatch loss over the episode; NaN when no gradient step ran.
    pub mean_loss: f64,
    pub steps: usize,
}

#[derive(Debug, Clone)]
pub struct TrainOutput {
    pub policy: Policy,
    pub log: Vec<EpisodeLog>,
}

/// Trains on `(T, Q)` drawn independently and uniformly from `data` and `queries`.
pub fn train(
    data: &Dataset,
    queries: &Dataset,
    measure: Measure,
    cfg: &TrainConfig,
    features: FeatureConfig,
    k: usize,
) -> Result<TrainOutput> {
    if data.is_empty() {
        return Err(Error::EmptyDataset("training data"));
    }
    if queries.is_empty() {
        return Err(Error::EmptyDataset("training queries"));
    }
    run(measure, cfg, features, k, |rng| {
        let t = &data.trajectories[rng.random_range(0..data.len())];
        let q = &queries.trajectories[rng.random_range(0..queries.len())];
        (t, q)
    })
}

/// Trains on uniformly drawn `(T, Q)` pairs.
pub fn train_on_pairs(
    pairs: &[(Trajectory, Trajectory)],
    measure: Measure,
    cfg: &TrainConfig,
    features: FeatureConfig,
    k: usize,
) -> Result<TrainOutput> {
    if pairs.is_empty() {
        return Err(Error::EmptyDataset("training pairs"));
    }
    run(measure, cfg, features, k, |rng| {
        let (t, q) = &pairs[rng.random_range(0..pairs.len())];
        (t, q)
    })
}

fn run<'a>(
    measure: Measure,
    cfg: &TrainConfig,
    features: FeatureConfig,
    k: usize,
    mut sample: impl FnMut(&mut SimRng) -> (&'a Trajectory, &'a Trajectory),
) -> Result<TrainOutput> {
    cfg.validate()?;
    let mut rng = seeded(cfg.seed);
    let n_actions = 2 + k;
    let mut net = QNetwork::init(features.dim(), cfg.hidden, n_actions, &mut rng);
    let mut target = net.clone();
    let mut adam = Adam::new(net.params.len(), cfg.learning_rate);
    let mut memory = ReplayMemory::new(cfg.replay_capacity);
    let mut epsilon = cfg.epsilon_start;
    let mut log = Vec::with_capacity(cfg.episodes);

    for episode in 0..cfg.episodes {
        let (t, q) = sample(&mut rng);
        let mut env = SplitEnv::new(t.points(), q.points(), measure, features, k);
        let mut state = env.state();
        let mut loss_sum = 0.0;
        let mut loss_steps = 0usize;
        let mut steps = 0usize;
        loop {
            let action = if rng.random::<f64>() < epsilon {
                rng.random_range(0..n_actions)
            } else {
                argmax(&net.forward(state.as_slice())?)
            };
            let step = env.step(action)?;
            steps += 1;
            memory.push(Experience {
                state,
                action,
                reward: step.reward,
                next: step.state,
                terminal: step.terminal,
            });
            if memory.len() >= cfg.batch_size {
                let batch = memory.sample(&mut rng, cfg.batch_size);
                loss_sum += net.train_step(&mut adam, &target, &batch, cfg.gamma);
                loss_steps += 1;
            }
            state = step.state;
            if step.terminal {
                break;
            }
        }
        target = net.clone();
        log.push(EpisodeLog {
            episode,
            theta_best: state.best(),
            epsilon,
            mean_loss: if loss_steps > 0 { loss_sum / loss_steps as f64 } else { f64::NAN },
            steps,
        });
        epsilon = (epsilon * cfg.epsilon_decay).max(cfg.epsilon_min);
    }

    Ok(TrainOutput { policy: Policy::new(measure, features, k, net)?, log })
}
