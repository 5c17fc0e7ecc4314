use alloc::vec::Vec;

/// A task executing on a server with its remaining bits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoolEntry {
    pub task: usize,
    pub residual: f64,
}

/// One server's processor-sharing pool.
#[derive(Debug, Clone, PartialEq)]
pub struct ServerState {
    pub id: usize,
    /// Cycles per second.
    pub freq: f64,
    pub exec_pool: Vec<PoolEntry>,
    /// `(task, arrival instant)` for tasks still in wireless transit.
    pub pending_arrivals: Vec<(usize, f64)>,
}

impl ServerState {
    pub fn new(id: usize, freq: f64) -> Self {
        ServerState {
            id,
            freq,
            exec_pool: Vec::new(),
            pending_arrivals: Vec::new(),
        }
    }

    pub fn n_exec(&self) -> usize {
        self.exec_pool.len()
    }

    pub fn residuals(&self) -> Vec<f64> {
        self.exec_pool.iter().map(|p| p.residual).collect()
    }

    /// Bits per second each pooled task receives: `f / (n·η)`.
    pub fn per_task_rate(&self, cycles_per_bit: f64) -> f64 {
        if self.exec_pool.is_empty() {
            0.0
        } else {
            self.freq / (self.exec_pool.len() as f64 * cycles_per_bit)
        }
    }

    /// Time until the smallest residual finishes, with the pool unchanged.
    pub(crate) fn next_completion(&self, cycles_per_bit: f64) -> Option<(f64, usize)> {
        let (idx, min) = self
            .exec_pool
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.residual.total_cmp(&b.1.residual))
            .map(|(i, p)| (i, p.residual))?;
        Some((min / self.per_task_rate(cycles_per_bit), idx))
    }

    pub(crate) fn next_arrival(&self) -> Option<f64> {
        self.pending_arrivals
            .iter()
            .map(|&(_, t)| t)
            .min_by(|a, b| a.total_cmp(b))
    }

    /// Deplete every residual linearly for `dt` seconds.
    pub(crate) fn deplete(&mut self, dt: f64, cycles_per_bit: f64) {
        if dt <= 0.0 || self.exec_pool.is_empty() {
            return;
        }
        let served = self.per_task_rate(cycles_per_bit) * dt;
        for p in &mut self.exec_pool {
            p.residual -= served;
        }
    }
}
