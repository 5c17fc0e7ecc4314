//! Continuous-time edge/cloud simulator.
//!
//! Decisions happen at step boundaries `τ_t = t·Δt`; between them the
//! engine jumps from event to event (server arrivals, completions) and
//! depletes residual sizes linearly, so processor-sharing execution times
//! are exact rather than time-stepped.

mod channel;
mod env;
mod episode;
mod server;

pub use channel::{achievable_rate, channel_gain};
pub use env::{OffloadEnv, StepOutcome};
pub use episode::{init_episode, EpisodeState, TraceEvent, TraceKind};
pub use server::{PoolEntry, ServerState};

/// Residuals at or below this many bits count as finished. Absorbs the
/// rounding left by subtracting `rate·dt` from a residual.
pub const COMPLETION_EPS_BITS: f64 = 1e-6;

/// One offloadable task and its realized accounting.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskRecord {
    pub id: usize,
    pub user: usize,
    /// Bits.
    pub size: f64,
    /// Decision instant (seconds); `None` while queued.
    pub dispatch_instant: Option<f64>,
    pub server: Option<usize>,
    /// Uplink rate used for the offload (bits/s).
    pub rate: f64,
    pub offload_delay: f64,
    pub server_arrival_instant: Option<f64>,
    pub completion_instant: Option<f64>,
    /// Bits not yet executed.
    pub residual: f64,
    pub offload_energy: f64,
    pub exec_energy: f64,
}

impl TaskRecord {
    pub(crate) fn queued(id: usize, user: usize, size: f64) -> Self {
        TaskRecord {
            id,
            user,
            size,
            dispatch_instant: None,
            server: None,
            rate: 0.0,
            offload_delay: 0.0,
            server_arrival_instant: None,
            completion_instant: None,
            residual: size,
            offload_energy: 0.0,
            exec_energy: 0.0,
        }
    }

    /// Execution delay `T_exe`, once completed.
    pub fn exec_delay(&self) -> Option<f64> {
        Some(self.completion_instant? - self.server_arrival_instant?)
    }

    /// Total delay `T_off + T_exe`, once completed.
    pub fn total_delay(&self) -> Option<f64> {
        Some(self.offload_delay + self.exec_delay()?)
    }

    pub fn total_energy(&self) -> f64 {
        self.offload_energy + self.exec_energy
    }
}

/// Execution energy `κ·η·f²·L`; independent of contention.
pub fn exec_energy(cfg: &crate::SystemConfig, freq: f64, size: f64) -> f64 {
    cfg.capacitance * cfg.cycles_per_bit * freq * freq * size
}
