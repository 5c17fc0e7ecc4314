//! Multi-objective task offloading for mobile edge computing.
//!
//! The crate is `no_std` (with `alloc`) and holds every algorithmic piece:
//!
//! * [`sim`]: continuous-time edge/cloud simulator with processor-sharing
//!   execution and exact delay/energy accounting.
//! * [`obs`]: fixed-shape per-server observation with residual-size histogram.
//! * [`reward`]: two-objective immediate reward and preference scalarization.
//! * [`nn`]: actor/critic network with hand-written backpropagation.
//! * [`train`]: rollouts, per-objective GAE, clipped PPO and preference sweeps.
//! * [`pareto`]: performance points, Pareto filtering and 2-D hypervolume.
//! * [`baselines`]: LinUCB, greedy heuristic and random schedulers.
//!
//! IO, file formats and the command line live in the `mec-morl` crate.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod baselines;
pub mod config;
mod error;
pub mod math;
pub mod nn;
pub mod obs;
pub mod pareto;
pub mod policy;
pub mod reward;
pub mod rng;
pub mod sim;
pub mod stats;
pub mod train;

pub use config::{MeanTaskSize, SystemConfig};
pub use error::{Error, Result};
pub use obs::Observation;
pub use pareto::{PerformancePoint, ParetoFront};
pub use policy::{DecisionContext, Scheduler};
pub use reward::{Preference, RewardScales, VectorReward};
pub use sim::{EpisodeState, OffloadEnv, TaskRecord};
