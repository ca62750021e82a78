//! Synthetic `(T, Q)` corpus of smooth random walks.
//!
//! Data and query trajectories are independent walks whose heading drifts by a
//! small random turn at every step, each starting at a uniform point of a
//! shared square region, so pairs resemble trips sampled from one city.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{seeded, SimRng};
use crate::trajectory::{Point, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub seed: u64,
    pub n_min: usize,
    pub n_max: usize,
    pub m_min: usize,
    pub m_max: usize,
    /// Largest heading change per step, radians.
    pub max_turn: f64,
    /// Half-width of the square the walks start in.
    pub region: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig { seed: 42, n_min: 30, n_max: 60, m_min: 5, m_max: 10, max_turn: 0.4, region: 10.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub train: Vec<(Trajectory, Trajectory)>,
    pub test: Vec<(Trajectory, Trajectory)>,
}

pub fn random_walk(rng: &mut SimRng, n: usize, max_turn: f64, origin: (f64, f64)) -> Vec<Point> {
    let mut heading = rng.random_range(0.0..std::f64::consts::TAU);
    let (mut x, mut y) = origin;
    let mut pts = Vec::with_capacity(n);
    for _ in 0..n {
        pts.push(Point::new(x, y));
        heading += rng.random_range(-max_turn..=max_turn);
        let step = rng.random_range(0.8..1.2);
        x += step * heading.cos();
        y += step * heading.sin();
    }
    pts
}

fn walk(rng: &mut SimRng, cfg: &SynthConfig, len: usize) -> Vec<Point> {
    let origin = (rng.random_range(-cfg.region..=cfg.region), rng.random_range(-cfg.region..=cfg.region));
    random_walk(rng, len, cfg.max_turn, origin)
}

pub fn pair(rng: &mut SimRng, cfg: &SynthConfig, index: usize) -> Result<(Trajectory, Trajectory)> {
    let n = rng.random_range(cfg.n_min..=cfg.n_max);
    let m = rng.random_range(cfg.m_min..=cfg.m_max);
    let data = walk(rng, cfg, n);
    let query = walk(rng, cfg, m);
    Ok((Trajectory::new(format!("t{index}"), data)?, Trajectory::new(format!("q{index}"), query)?))
}

pub fn corpus(cfg: &SynthConfig, n_train: usize, n_test: usize) -> Result<Corpus> {
    if cfg.n_min == 0 || cfg.n_min > cfg.n_max || cfg.m_min == 0 || cfg.m_min > cfg.m_max {
        return Err(Error::InvalidParam("synthetic size ranges must be nonempty and positive".into()));
    }
    let mut rng = seeded(cfg.seed);
    let mut all = (0..n_train + n_test).map(|i| pair(&mut rng, cfg, i)).collect::<Result<Vec<_>>>()?;
    let test = all.split_off(n_train);
    Ok(Corpus { train: all, test })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes_in_range_and_deterministic() {
        let cfg = SynthConfig::default();
        let c = corpus(&cfg, 20, 5).unwrap();
        assert_eq!((c.train.len(), c.test.len()), (20, 5));
        for (t, q) in c.train.iter().chain(&c.test) {
            assert!((30..=60).contains(&t.len()));
            assert!((5..=10).contains(&q.len()));
        }
        assert_eq!(corpus(&cfg, 20, 5).unwrap(), c);
    }

}
