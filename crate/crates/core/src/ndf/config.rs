use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kv::KvConfig;

/// Sizes of the dual-mask network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetConfig {
    /// Microphone channels Q; the input has `2 Q` features per bin.
    pub channels: usize,
    /// Frequency bins F. Weights are shared across bins, so this only sizes defaults.
    pub bins: usize,
    /// Hidden size of each direction of the frequency BiLSTM.
    pub hidden_freq: usize,
    /// Hidden size of each temporal branch.
    pub hidden_time: usize,
    pub seed: u64,
}

impl NetConfig {
    /// Keys `hidden_freq` and `hidden_time`.
    pub fn apply(&mut self, cfg: &mut KvConfig) -> Result<()> {
        cfg.take_into("hidden_freq", &mut self.hidden_freq)?;
        cfg.take_into("hidden_time", &mut self.hidden_time)?;
        self.validate()
    }

    /// Desk-scale sizes for the default 512-point transform.
    pub fn desk(channels: usize) -> Self {
        Self {
            channels,
            bins: 257,
            hidden_freq: 32,
            hidden_time: 32,
            seed: 0,
        }
    }

    /// Larger frequency recurrence.
    pub fn full(channels: usize) -> Self {
        Self {
            hidden_freq: 64,
            ..Self::desk(channels)
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn input_size(&self) -> usize {
        2 * self.channels
    }

    pub fn validate(&self) -> Result<()> {
        if self.channels == 0 || self.bins == 0 || self.hidden_freq == 0 || self.hidden_time == 0 {
            return Err(Error::InvalidConfig(format!("all network sizes must be >= 1: {self:?}")));
        }
        Ok(())
    }

    /// Closed-form parameter count: `4 H (in + H + 1)` per recurrent direction or branch plus
    /// two `H_t -> 2` projections with bias.
    pub fn param_count(&self) -> usize {
        let lstm = |i: usize, h: usize| 4 * h * (i + h + 1);
        2 * lstm(self.input_size(), self.hidden_freq)
            + 2 * lstm(2 * self.hidden_freq, self.hidden_time)
            + 2 * (2 * self.hidden_time + 2)
    }
}
