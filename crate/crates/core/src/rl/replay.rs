use std::collections::VecDeque;

use rand::seq::index;

use super::Experience;
use crate::rng::SimRng;

/// FIFO experience buffer with uniform sampling.
#[derive(Debug, Clone)]
pub struct ReplayMemory {
    buf: VecDeque<Experience>,
    capacity: usize,
}

impl ReplayMemory {
    pub const DEFAULT_CAPACITY: usize = 2000;

    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        ReplayMemory { buf: VecDeque::with_capacity(capacity), capacity }
    }

    pub fn push(&mut self, e: Experience) {
        if self.buf.len() == self.capacity {
            self.buf.pop_front();
        }
        self.buf.push_back(e);
    }

    pub fn len(&self) -> usize {
        self.buf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buf.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// `size` distinct experiences chosen uniformly; `size` is clamped to `len`.
    pub fn sample(&self, rng: &mut SimRng, size: usize) -> Vec<Experience> {
        let size = size.min(self.buf.len());
        index::sample(rng, self.buf.len(), size).into_iter().map(|i| self.buf[i]).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Experience> {
        self.buf.iter()
    }
}
