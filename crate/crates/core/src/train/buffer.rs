use alloc::vec::Vec;
use core::ops::Range;

use crate::error::{Error, Result};
use crate::reward::VectorReward;

/// One decision: normalized observation, chosen server, vector reward and
/// the behavior policy's log-probability of that choice.
///
/// The successor observation is the next record of the same episode; see
/// [`RolloutBuffer::next_obs`].
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionRecord {
    pub obs: Vec<f64>,
    pub action: usize,
    pub reward: VectorReward,
    pub done: bool,
    pub log_prob: f64,
}

/// Bounded, episode-contiguous store of transitions.
#[derive(Debug, Clone, PartialEq)]
pub struct RolloutBuffer {
    capacity: usize,
    records: Vec<TransitionRecord>,
}

pub const DEFAULT_CAPACITY: usize = 100_000;

impl RolloutBuffer {
    pub fn new(capacity: usize) -> Self {
        RolloutBuffer {
            capacity,
            records: Vec::new(),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn push(&mut self, record: TransitionRecord) -> Result<()> {
        if self.records.len() >= self.capacity {
            return Err(Error::BufferFull(self.capacity));
        }
        self.records.push(record);
        Ok(())
    }

    pub fn records(&self) -> &[TransitionRecord] {
        &self.records
    }

    pub fn clear(&mut self) {
        self.records.clear();
    }

    /// Observation following record `i`, or `None` at an episode end.
    pub fn next_obs(&self, i: usize) -> Option<&[f64]> {
        if self.records[i].done {
            None
        } else {
            self.records.get(i + 1).map(|r| r.obs.as_slice())
        }
    }

    /// Index ranges of the stored episodes, in time order. A trailing
    /// unfinished episode is included.
    pub fn episodes(&self) -> Vec<Range<usize>> {
        let mut out = Vec::new();
        let mut start = 0;
        for (i, r) in self.records.iter().enumerate() {
            if r.done {
                out.push(start..i + 1);
                start = i + 1;
            }
        }
        if start < self.records.len() {
            out.push(start..self.records.len());
        }
        out
    }
}
