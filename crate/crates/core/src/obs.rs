//! Fixed-shape observation: one information vector per server.
//!
//! Row `e` is `(L_m, C_{u,e}, f_e, n_exec_e, E, B_e)` where `B_e` is the
//! histogram of residual sizes on server `e` in 1-Mbit bins, the last bin
//! open-ended. Raw values are kept in SI units; [`Observation::normalized`]
//! rescales them for the network.

use alloc::vec;
use alloc::vec::Vec;

use crate::sim::EpisodeState;

/// Leading scalar features before the histogram.
pub const SCALAR_FEATURES: usize = 5;

pub const BITS_PER_MBIT: f64 = 1e6;
/// Divides task size (bits → Mbit).
pub const SIZE_SCALE: f64 = 1e6;
/// Divides rate (bit/s → Mbit/s).
pub const RATE_SCALE: f64 = 1e6;
/// Divides frequency (Hz → GHz).
pub const FREQ_SCALE: f64 = 1e9;

/// Count residuals into `bins` one-Mbit buckets; the last bucket holds
/// everything at or above `bins − 1` Mbit.
pub fn residual_histogram(residuals: &[f64], bins: usize) -> Vec<u32> {
    let mut out = vec![0u32; bins];
    for &r in residuals {
        let mbit = r.max(0.0) / BITS_PER_MBIT;
        let idx = if mbit >= (bins - 1) as f64 {
            bins - 1
        } else {
            mbit as usize
        };
        out[idx] += 1;
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    rows: usize,
    width: usize,
    data: Vec<f64>,
}

impl Observation {
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Features per row: `5 + N`.
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn row(&self, e: usize) -> &[f64] {
        &self.data[e * self.width..(e + 1) * self.width]
    }

    pub fn task_size(&self) -> f64 {
        self.data[0]
    }

    pub fn rate(&self, e: usize) -> f64 {
        self.row(e)[1]
    }

    pub fn freq(&self, e: usize) -> f64 {
        self.row(e)[2]
    }

    pub fn n_exec(&self, e: usize) -> usize {
        self.row(e)[3] as usize
    }

    pub fn histogram(&self, e: usize) -> &[f64] {
        &self.row(e)[SCALAR_FEATURES..]
    }

    pub fn raw(&self) -> &[f64] {
        &self.data
    }

    /// Row-major network input: sizes in Mbit, rates in Mbit/s, frequency
    /// in GHz, counts unscaled.
    pub fn normalized(&self) -> Vec<f64> {
        let mut out = self.data.clone();
        for row in out.chunks_mut(self.width) {
            normalize_row(row);
        }
        out
    }

    /// Normalized features of a single row.
    pub fn normalized_row(&self, e: usize) -> Vec<f64> {
        let mut r = self.row(e).to_vec();
        normalize_row(&mut r);
        r
    }
}

fn normalize_row(row: &mut [f64]) {
    row[0] /= SIZE_SCALE;
    row[1] /= RATE_SCALE;
    row[2] /= FREQ_SCALE;
}

/// Encode the decision state for the head task at the current step
/// boundary.
pub fn encode_state(episode: &EpisodeState, task: usize) -> Observation {
    let cfg = episode.config();
    let rows = cfg.num_servers();
    let bins = cfg.histogram_bins;
    let width = SCALAR_FEATURES + bins;
    let size = episode.task(task).size;
    let rates = episode.head_rates();
    let mut data = Vec::with_capacity(rows * width);
    for (e, srv) in episode.servers.iter().enumerate() {
        data.push(size);
        data.push(rates[e]);
        data.push(srv.freq);
        data.push(srv.n_exec() as f64);
        data.push(cfg.num_edge_servers as f64);
        let residuals = srv.residuals();
        data.extend(residual_histogram(&residuals, bins).into_iter().map(f64::from));
    }
    Observation { rows, width, data }
}
