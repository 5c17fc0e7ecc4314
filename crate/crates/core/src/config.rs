//! System parameters of the edge/cloud environment.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Mean task size: a fixed value in bits, or derived so that aggregate
/// service capacity equals aggregate demand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeanTaskSize {
    Bits(f64),
    Balanced,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub num_edge_servers: usize,
    pub num_users: usize,
    pub steps_per_episode: usize,
    /// Seconds.
    pub step_duration: f64,
    /// Expected task arrivals per step per user.
    pub poisson_rate: f64,
    pub mean_task_size: MeanTaskSize,
    /// Hz.
    pub bandwidth: f64,
    /// Watts.
    pub offload_power: f64,
    pub cycles_per_bit: f64,
    /// Effective switched capacitance per cycle.
    pub capacitance: f64,
    /// Cycles per second.
    pub cloud_freq: f64,
    /// Cycles per second.
    pub edge_freq: f64,
    /// Watts.
    pub noise_power: f64,
    pub pathloss_exponent: f64,
    /// Meters, `(min, max)`.
    pub cloud_radius_range: (f64, f64),
    /// Meters, `(min, max)`.
    pub edge_radius_range: (f64, f64),
    pub histogram_bins: usize,
    pub rng_seed: u64,
}

/// Config keys accepted by [`SystemConfig::set`], in canonical order.
pub const CONFIG_KEYS: &[&str] = &[
    "num_edge_servers",
    "num_users",
    "steps_per_episode",
    "step_duration",
    "poisson_rate",
    "mean_task_size",
    "bandwidth",
    "offload_power",
    "cycles_per_bit",
    "capacitance",
    "cloud_freq",
    "edge_freq",
    "noise_power",
    "pathloss_exponent",
    "cloud_radius_range",
    "edge_radius_range",
    "histogram_bins",
    "rng_seed",
];

impl Default for SystemConfig {
    fn default() -> Self {
        Self::table1(8)
    }
}

impl SystemConfig {
    /// Reference model parameters with `edges` edge servers and a balanced
    /// mean task size.
    pub fn table1(edges: usize) -> Self {
        SystemConfig {
            num_edge_servers: edges,
            num_users: 10,
            steps_per_episode: 100,
            step_duration: 1.0,
            poisson_rate: 0.1,
            mean_task_size: MeanTaskSize::Balanced,
            bandwidth: 16.6e6,
            offload_power: 10e-3,
            cycles_per_bit: 1e3,
            capacitance: 5e-31,
            cloud_freq: 4.0e9,
            edge_freq: 2.0e9,
            noise_power: 1e-13,
            pathloss_exponent: 3.0,
            cloud_radius_range: (1000.0, 2000.0),
            edge_radius_range: (50.0, 500.0),
            histogram_bins: 50,
            rng_seed: 0,
        }
    }

    /// Desk-scale configuration: two edges, four users, 50 steps. The
    /// arrival rate keeps one expected arrival per step.
    pub fn smoke() -> Self {
        SystemConfig {
            num_edge_servers: 2,
            num_users: 4,
            steps_per_episode: 50,
            poisson_rate: 0.25,
            ..Self::table1(2)
        }
    }

    pub fn num_servers(&self) -> usize {
        self.num_edge_servers + 1
    }

    /// CPU frequency of server `e` (0 is the cloud).
    pub fn server_freq(&self, e: usize) -> f64 {
        if e == 0 {
            self.cloud_freq
        } else {
            self.edge_freq
        }
    }

    pub fn radius_range(&self, e: usize) -> (f64, f64) {
        if e == 0 {
            self.cloud_radius_range
        } else {
            self.edge_radius_range
        }
    }

    pub fn validate(&self) -> Result<()> {
        fn positive(name: &str, v: f64) -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::config(format!("{name} must be finite and > 0, got {v}")))
            }
        }
        fn range(name: &str, (lo, hi): (f64, f64)) -> Result<()> {
            if lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi {
                Ok(())
            } else {
                Err(Error::config(format!("{name} must satisfy 0 < min <= max, got ({lo}, {hi})")))
            }
        }
        if self.num_users == 0 {
            return Err(Error::config("num_users must be >= 1"));
        }
        if self.steps_per_episode == 0 {
            return Err(Error::config("steps_per_episode must be >= 1"));
        }
        if self.histogram_bins < 2 {
            return Err(Error::config("histogram_bins must be >= 2"));
        }
        positive("step_duration", self.step_duration)?;
        positive("bandwidth", self.bandwidth)?;
        positive("noise_power", self.noise_power)?;
        positive("offload_power", self.offload_power)?;
        positive("cycles_per_bit", self.cycles_per_bit)?;
        positive("edge_freq", self.edge_freq)?;
        positive("cloud_freq", self.cloud_freq)?;
        if self.cloud_freq < self.edge_freq {
            return Err(Error::config("cloud_freq must be >= edge_freq"));
        }
        if !(self.capacitance.is_finite() && self.capacitance >= 0.0) {
            return Err(Error::config("capacitance must be finite and >= 0"));
        }
        if !(self.poisson_rate.is_finite() && self.poisson_rate >= 0.0) {
            return Err(Error::config("poisson_rate must be finite and >= 0"));
        }
        if !(self.pathloss_exponent.is_finite() && self.pathloss_exponent >= 0.0) {
            return Err(Error::config("pathloss_exponent must be finite and >= 0"));
        }
        range("cloud_radius_range", self.cloud_radius_range)?;
        range("edge_radius_range", self.edge_radius_range)?;
        match self.mean_task_size {
            MeanTaskSize::Bits(b) => positive("mean_task_size", b)?,
            MeanTaskSize::Balanced => {
                balanced_mean_task_size(self)?;
            }
        }
        Ok(())
    }

    /// Mean task size in bits, resolving the balanced sentinel.
    pub fn resolved_mean_task_size(&self) -> Result<f64> {
        match self.mean_task_size {
            MeanTaskSize::Bits(b) => Ok(b),
            MeanTaskSize::Balanced => balanced_mean_task_size(self),
        }
    }

    /// Set one field from its textual form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        fn num<T: core::str::FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse::<T>()
                .map_err(|_| Error::config(format!("bad value for {key}: {v:?}")))
        }
        fn pair(key: &str, v: &str) -> Result<(f64, f64)> {
            let mut it = v.split(',').map(str::trim);
            match (it.next(), it.next(), it.next()) {
                (Some(a), Some(b), None) => Ok((num(key, a)?, num(key, b)?)),
                _ => Err(Error::config(format!("{key} expects \"min,max\", got {v:?}"))),
            }
        }
        match key {
            "num_edge_servers" => self.num_edge_servers = num(key, value)?,
            "num_users" => self.num_users = num(key, value)?,
            "steps_per_episode" => self.steps_per_episode = num(key, value)?,
            "step_duration" => self.step_duration = num(key, value)?,
            "poisson_rate" => self.poisson_rate = num(key, value)?,
            "mean_task_size" => {
                self.mean_task_size = if value.eq_ignore_ascii_case("balanced") {
                    MeanTaskSize::Balanced
                } else {
                    MeanTaskSize::Bits(num(key, value)?)
                }
            }
            "bandwidth" => self.bandwidth = num(key, value)?,
            "offload_power" => self.offload_power = num(key, value)?,
            "cycles_per_bit" => self.cycles_per_bit = num(key, value)?,
            "capacitance" => self.capacitance = num(key, value)?,
            "cloud_freq" => self.cloud_freq = num(key, value)?,
            "edge_freq" => self.edge_freq = num(key, value)?,
            "noise_power" => self.noise_power = num(key, value)?,
            "pathloss_exponent" => self.pathloss_exponent = num(key, value)?,
            "cloud_radius_range" => self.cloud_radius_range = pair(key, value)?,
            "edge_radius_range" => self.edge_radius_range = pair(key, value)?,
            "histogram_bins" => self.histogram_bins = num(key, value)?,
            "rng_seed" => self.rng_seed = num(key, value)?,
            other => return Err(Error::config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    /// Canonical `key = value` lines; parsing them back yields an equal config.
    pub fn to_pairs(&self) -> Vec<(&'static str, String)> {
        let mts = match self.mean_task_size {
            MeanTaskSize::Balanced => "balanced".to_string(),
            MeanTaskSize::Bits(b) => format!("{b:?}"),
        };
        let r = |(a, b): (f64, f64)| format!("{a:?},{b:?}");
        alloc::vec![
            ("num_edge_servers", self.num_edge_servers.to_string()),
            ("num_users", self.num_users.to_string()),
            ("steps_per_episode", self.steps_per_episode.to_string()),
            ("step_duration", format!("{:?}", self.step_duration)),
            ("poisson_rate", format!("{:?}", self.poisson_rate)),
            ("mean_task_size", mts),
            ("bandwidth", format!("{:?}", self.bandwidth)),
            ("offload_power", format!("{:?}", self.offload_power)),
            ("cycles_per_bit", format!("{:?}", self.cycles_per_bit)),
            ("capacitance", format!("{:?}", self.capacitance)),
            ("cloud_freq", format!("{:?}", self.cloud_freq)),
            ("edge_freq", format!("{:?}", self.edge_freq)),
            ("noise_power", format!("{:?}", self.noise_power)),
            ("pathloss_exponent", format!("{:?}", self.pathloss_exponent)),
            ("cloud_radius_range", r(self.cloud_radius_range)),
            ("edge_radius_range", r(self.edge_radius_range)),
            ("histogram_bins", self.histogram_bins.to_string()),
            ("rng_seed", self.rng_seed.to_string()),
        ]
    }
}

/// Mean task size that equates service capacity `Δt·Σ f_e/η` with demand
/// `λ_p·L̄·U` (arrival rate read per step).
pub fn balanced_mean_task_size(cfg: &SystemConfig) -> Result<f64> {
    let demand_rate = cfg.poisson_rate * cfg.num_users as f64;
    if !(demand_rate > 0.0) {
        return Err(Error::config("balanced mean task size needs poisson_rate * num_users > 0"));
    }
    let capacity: f64 = (0..cfg.num_servers())
        .map(|e| cfg.server_freq(e) / cfg.cycles_per_bit)
        .sum();
    Ok(cfg.step_duration * capacity / demand_rate)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn balanced_table1_eight_edges_is_20_mbit() {
        let cfg = SystemConfig::table1(8);
        assert_eq!(balanced_mean_task_size(&cfg).unwrap(), 20e6);
    }

    #[test]
    fn balanced_cloud_only() {
        let mut cfg = SystemConfig::table1(0);
        cfg.poisson_rate = 0.1;
        cfg.num_users = 10;
        assert_eq!(balanced_mean_task_size(&cfg).unwrap(), 4e6);
    }

    #[test]
    fn balanced_four_edges() {
        let cfg = SystemConfig::table1(4);
        assert_eq!(balanced_mean_task_size(&cfg).unwrap(), 12e6);
    }

    #[test]
    fn balanced_zero_rate_is_error() {
        let mut cfg = SystemConfig::table1(4);
        cfg.poisson_rate = 0.0;
        assert!(matches!(balanced_mean_task_size(&cfg), Err(Error::InvalidConfig(_))));
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn validation_rejects_bad_fields() {
        let mut cfg = SystemConfig::smoke();
        cfg.validate().unwrap();
        cfg.histogram_bins = 1;
        assert!(cfg.validate().is_err());
        let mut cfg = SystemConfig::smoke();
        cfg.edge_freq = 5e9;
        assert!(cfg.validate().is_err());
        let mut cfg = SystemConfig::smoke();
        cfg.noise_power = 0.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn pairs_round_trip_through_set() {
        let mut cfg = SystemConfig::smoke();
        cfg.mean_task_size = MeanTaskSize::Bits(1.25e6);
        cfg.rng_seed = 99;
        let mut back = SystemConfig::table1(7);
        for (k, v) in cfg.to_pairs() {
            back.set(k, &v).unwrap();
        }
        assert_eq!(back, cfg);
        assert_eq!(cfg.to_pairs().len(), CONFIG_KEYS.len());
    }

    #[test]
    fn unknown_key_is_error() {
        let mut cfg = SystemConfig::smoke();
        assert!(cfg.set("num_servers", "3").is_err());
        assert!(cfg.set("edge_radius_range", "1,2,3").is_err());
    }
}
