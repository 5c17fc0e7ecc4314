use std::path::Path;

use mec_morl_core::pareto::PerformancePoint;
use mec_morl_core::sim::TraceEvent;
use mec_morl_core::train::CurvePoint;
use serde::{Deserialize, Serialize};

use crate::{Failure, Result};

/// One evaluated policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub scheme: String,
    /// Preference weight, cloud probability or checkpoint name.
    pub label: String,
    #[serde(rename = "omega_T")]
    pub omega_t: Option<f64>,
    #[serde(rename = "omega_E")]
    pub omega_e: Option<f64>,
    pub mean_delay_s: f64,
    #[serde(rename = "mean_energy_J")]
    pub mean_energy_j: f64,
    #[serde(rename = "stderr_T")]
    pub stderr_t: f64,
    #[serde(rename = "stderr_E")]
    pub stderr_e: f64,
    pub n_episodes: usize,
    /// Tasks per episode times mean task size, in Mbit.
    pub mbits_per_episode: f64,
    pub config_hash: String,
}

impl ResultRow {
    pub fn point(&self) -> PerformancePoint {
        PerformancePoint {
            delay: self.mean_delay_s,
            energy: self.mean_energy_j,
            stderr_delay: self.stderr_t,
            stderr_energy: self.stderr_e,
            n_episodes: self.n_episodes,
        }
    }
}

fn to_csv<T: Serialize>(rows: &[T]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner().map_err(|e| Failure::Data(e.to_string()))
}

pub fn results_csv(rows: &[ResultRow]) -> Result<Vec<u8>> {
    to_csv(rows)
}

pub fn read_results(path: &Path) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
    let expected = [
        "scheme",
        "label",
        "omega_T",
        "omega_E",
        "mean_delay_s",
        "mean_energy_J",
        "stderr_T",
        "stderr_E",
        "n_episodes",
        "mbits_per_episode",
        "config_hash",
    ];
    let headers = r.headers()?.clone();
    if headers.iter().ne(expected.iter().copied()) {
        return Err(Failure::Data(format!(
            "{}: unexpected columns {:?}",
            path.display(),
            headers.iter().collect::<Vec<_>>()
        )));
    }
    let rows: std::result::Result<Vec<ResultRow>, _> = r.deserialize().collect();
    rows.map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogRow {
    pub update_idx: usize,
    pub episodes_seen: usize,
    pub mean_scalarized_return: f64,
    #[serde(rename = "mean_rT")]
    pub mean_rt: f64,
    #[serde(rename = "mean_rE")]
    pub mean_re: f64,
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
}

pub fn training_log_csv(curve: &[CurvePoint]) -> Result<Vec<u8>> {
    let rows: Vec<LogRow> = curve
        .iter()
        .map(|c| LogRow {
            update_idx: c.update,
            episodes_seen: c.episodes_seen,
            mean_scalarized_return: c.mean_scalarized_return,
            mean_rt: c.mean_delay_return,
            mean_re: c.mean_energy_return,
            policy_loss: c.policy_loss,
            value_loss: c.value_loss,
            entropy: c.entropy,
        })
        .collect();
    to_csv(&rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontEntry {
    #[serde(rename = "omega_T")]
    pub omega_t: Option<f64>,
    pub label: String,
    pub y_t_s: f64,
    #[serde(rename = "y_E_J")]
    pub y_e_j: f64,
    #[serde(rename = "stderr_T")]
    pub stderr_t: f64,
    #[serde(rename = "stderr_E")]
    pub stderr_e: f64,
}

pub fn front_json(entries: &[FrontEntry]) -> Result<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(entries)?;
    v.push(b'\n');
    Ok(v)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypervolumeRow {
    pub scheme: String,
    pub hypervolume: f64,
    #[serde(rename = "ref_T")]
    pub ref_t: f64,
    #[serde(rename = "ref_E")]
    pub ref_e: f64,
}

pub fn hypervolume_csv(rows: &[HypervolumeRow]) -> Result<Vec<u8>> {
    to_csv(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GainRow {
    pub scheme: String,
    pub over: String,
    pub gain_pct: Option<f64>,
}

pub fn gains_csv(rows: &[GainRow]) -> Result<Vec<u8>> {
    to_csv(rows)
}

/// Two whitespace-separated columns `y_T y_E`, one point per line.
pub fn plot_data(points: &[PerformancePoint]) -> Vec<u8> {
    let mut s = String::from("# y_T_s y_E_J\n");
    for p in points {
        s.push_str(&format!("{:?} {:?}\n", p.delay, p.energy));
    }
    s.into_bytes()
}

/// Tab-separated `time_s kind task server`; `-` for no server.
pub fn trace_text(events: &[TraceEvent]) -> Vec<u8> {
    let mut s = String::from("time_s\tkind\ttask\tserver\n");
    for e in events {
        let server = e.server.map_or("-".to_string(), |v| v.to_string());
        s.push_str(&format!("{:?}\t{}\t{}\t{}\n", e.time, e.kind.as_str(), e.task, server));
    }
    s.into_bytes()
}
