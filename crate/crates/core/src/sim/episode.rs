use alloc::collections::VecDeque;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, Exp, Exp1, Poisson};

use super::server::{PoolEntry, ServerState};
use super::{achievable_rate, exec_energy, TaskRecord, COMPLETION_EPS_BITS};
use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::rng::{stream_rng, Stream, StreamRng};

/// Kind of a recorded simulator event.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceKind {
    Dispatch,
    ServerArrival,
    Completion,
    StepBoundary,
}

impl TraceKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            TraceKind::Dispatch => "dispatch",
            TraceKind::ServerArrival => "server_arrival",
            TraceKind::Completion => "completion",
            TraceKind::StepBoundary => "step_boundary",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEvent {
    pub time: f64,
    pub kind: TraceKind,
    /// Task index, or the step index for step boundaries.
    pub task: usize,
    pub server: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    Idle,
    Deciding,
    Finished,
}

/// Full simulator state for one episode.
#[derive(Debug, Clone)]
pub struct EpisodeState {
    cfg: SystemConfig,
    mean_task_size: f64,
    rng: StreamRng,
    pub clock: f64,
    step: usize,
    pub servers: Vec<ServerState>,
    queue: VecDeque<usize>,
    tasks: Vec<TaskRecord>,
    completed: Vec<usize>,
    /// Row-major `U × (E+1)` user-server distances in meters.
    distances: Vec<f64>,
    head_rates: Vec<f64>,
    forced_arrivals: usize,
    transit_overlaps: usize,
    trace: Option<Vec<TraceEvent>>,
    phase: Phase,
}

impl PartialEq for EpisodeState {
    fn eq(&self, other: &Self) -> bool {
        self.cfg == other.cfg
            && self.mean_task_size == other.mean_task_size
            && self.clock == other.clock
            && self.step == other.step
            && self.servers == other.servers
            && self.queue == other.queue
            && self.tasks == other.tasks
            && self.completed == other.completed
            && self.distances == other.distances
            && self.head_rates == other.head_rates
            && self.forced_arrivals == other.forced_arrivals
            && self.phase == other.phase
    }
}

/// Sample geometry and an empty system for one episode.
///
/// Each user-server distance is drawn uniformly from that server's radius
/// range; everything downstream (arrivals, sizes, fades) comes from the
/// same seeded stream.
pub fn init_episode(cfg: &SystemConfig, seed: u64) -> Result<EpisodeState> {
    cfg.validate()?;
    let mean_task_size = cfg.resolved_mean_task_size()?;
    let mut rng = stream_rng(seed, Stream::Environment, 0);
    let servers_n = cfg.num_servers();
    let mut distances = Vec::with_capacity(cfg.num_users * servers_n);
    for _u in 0..cfg.num_users {
        for e in 0..servers_n {
            let (lo, hi) = cfg.radius_range(e);
            let d = if hi > lo { rng.random_range(lo..=hi) } else { lo };
            distances.push(d);
        }
    }
    let servers = (0..servers_n)
        .map(|e| ServerState::new(e, cfg.server_freq(e)))
        .collect();
    Ok(EpisodeState {
        cfg: cfg.clone(),
        mean_task_size,
        rng,
        clock: 0.0,
        step: 0,
        servers,
        queue: VecDeque::new(),
        tasks: Vec::new(),
        completed: Vec::new(),
        distances,
        head_rates: Vec::new(),
        forced_arrivals: 0,
        transit_overlaps: 0,
        trace: None,
        phase: Phase::Idle,
    })
}

impl EpisodeState {
    pub fn config(&self) -> &SystemConfig {
        &self.cfg
    }

    pub fn mean_task_size(&self) -> f64 {
        self.mean_task_size
    }

    /// Current decision step (0-based).
    pub fn step_index(&self) -> usize {
        self.step
    }

    pub fn is_finished(&self) -> bool {
        self.phase == Phase::Finished
    }

    pub fn tasks(&self) -> &[TaskRecord] {
        &self.tasks
    }

    pub fn task(&self, id: usize) -> &TaskRecord {
        &self.tasks[id]
    }

    pub fn completed(&self) -> &[usize] {
        &self.completed
    }

    pub fn queue_len(&self) -> usize {
        self.queue.len()
    }

    pub fn head(&self) -> Option<usize> {
        self.queue.front().copied()
    }

    pub fn distance(&self, user: usize, server: usize) -> f64 {
        self.distances[user * self.cfg.num_servers() + server]
    }

    /// Uplink rates of the head task to every server, drawn at step start.
    pub fn head_rates(&self) -> &[f64] {
        &self.head_rates
    }

    /// Steps whose queue was empty and got a forced arrival.
    pub fn forced_arrivals(&self) -> usize {
        self.forced_arrivals
    }

    /// Decisions that targeted a server with a task still in transit.
    pub fn transit_overlaps(&self) -> usize {
        self.transit_overlaps
    }

    pub fn enable_trace(&mut self) {
        self.trace.get_or_insert_with(Vec::new);
    }

    pub fn trace(&self) -> Option<&[TraceEvent]> {
        self.trace.as_deref()
    }

    fn record(&mut self, kind: TraceKind, task: usize, server: Option<usize>) {
        let time = self.clock;
        if let Some(t) = self.trace.as_mut() {
            t.push(TraceEvent { time, kind, task, server });
        }
    }

    fn push_task(&mut self, user: usize) -> usize {
        let exp = Exp::new(1.0 / self.mean_task_size).expect("mean task size validated");
        let size: f64 = exp.sample(&mut self.rng);
        let id = self.tasks.len();
        self.tasks.push(TaskRecord::queued(id, user, size.max(1.0)));
        self.queue.push_back(id);
        id
    }

    /// Generate this step's arrivals and draw the head task's uplink rates.
    ///
    /// Arrivals are per-user Poisson. An empty queue gets one forced arrival
    /// from a uniformly chosen user so that exactly one task is decided per
    /// step.
    pub fn begin_step(&mut self) -> Result<usize> {
        if self.phase != Phase::Idle {
            return Err(Error::Contract("begin_step called twice or after finish"));
        }
        if self.step >= self.cfg.steps_per_episode {
            return Err(Error::Contract("episode has no steps left"));
        }
        let step = self.step;
        self.record(TraceKind::StepBoundary, step, None);
        if self.cfg.poisson_rate > 0.0 {
            let poisson = Poisson::new(self.cfg.poisson_rate).expect("rate validated");
            for u in 0..self.cfg.num_users {
                let n: f64 = poisson.sample(&mut self.rng);
                for _ in 0..n as usize {
                    self.push_task(u);
                }
            }
        }
        if self.queue.is_empty() {
            let u = self.rng.random_range(0..self.cfg.num_users);
            self.push_task(u);
            self.forced_arrivals += 1;
        }
        let head = self.queue[0];
        let user = self.tasks[head].user;
        self.head_rates.clear();
        for e in 0..self.cfg.num_servers() {
            let fade: f64 = Exp1.sample(&mut self.rng);
            let fade = fade.max(f64::MIN_POSITIVE);
            let d = self.distance(user, e);
            self.head_rates.push(achievable_rate(&self.cfg, d, fade));
        }
        self.phase = Phase::Deciding;
        Ok(head)
    }

    /// Offload the head task to server `e` at the current instant.
    pub fn offload_task(&mut self, task: usize, e: usize) -> Result<()> {
        if self.phase != Phase::Deciding {
            return Err(Error::Contract("no pending decision"));
        }
        if self.queue.front() != Some(&task) {
            return Err(Error::Contract("only the head of the queue can be offloaded"));
        }
        let servers = self.cfg.num_servers();
        if e >= servers {
            return Err(Error::InvalidAction { action: e, servers });
        }
        let rate = self.head_rates[e];
        let size = self.tasks[task].size;
        let offload_delay = if size == 0.0 {
            0.0
        } else if rate > 0.0 && rate.is_finite() {
            size / rate
        } else {
            return Err(Error::Contract("offload over a zero-rate link"));
        };
        if !self.servers[e].pending_arrivals.is_empty() {
            self.transit_overlaps += 1;
        }
        let now = self.clock;
        let arrival = now + offload_delay;
        let freq = self.servers[e].freq;
        let exe = exec_energy(&self.cfg, freq, size);
        let rec = &mut self.tasks[task];
        rec.dispatch_instant = Some(now);
        rec.server = Some(e);
        rec.rate = rate;
        rec.offload_delay = offload_delay;
        rec.offload_energy = self.cfg.offload_power * offload_delay;
        rec.exec_energy = exe;
        self.queue.pop_front();
        self.servers[e].pending_arrivals.push((task, arrival));
        self.phase = Phase::Idle;
        self.record(TraceKind::Dispatch, task, Some(e));
        // A zero-delay offload joins the pool at once.
        self.process_arrivals();
        Ok(())
    }

    fn process_arrivals(&mut self) {
        let now = self.clock;
        for s in 0..self.servers.len() {
            let mut i = 0;
            while i < self.servers[s].pending_arrivals.len() {
                let (task, t) = self.servers[s].pending_arrivals[i];
                if t <= now {
                    self.servers[s].pending_arrivals.swap_remove(i);
                    let residual = self.tasks[task].size;
                    self.tasks[task].server_arrival_instant = Some(now);
                    if residual <= COMPLETION_EPS_BITS {
                        self.complete(task, s);
                    } else {
                        self.servers[s].exec_pool.push(PoolEntry { task, residual });
                        self.record(TraceKind::ServerArrival, task, Some(s));
                    }
                } else {
                    i += 1;
                }
            }
        }
    }

    fn complete(&mut self, task: usize, server: usize) {
        let rec = &mut self.tasks[task];
        rec.residual = 0.0;
        rec.completion_instant = Some(self.clock);
        self.completed.push(task);
        self.record(TraceKind::Completion, task, Some(server));
    }

    fn sync_residuals(&mut self) {
        for s in &self.servers {
            for p in &s.exec_pool {
                self.tasks[p.task].residual = p.residual.max(0.0);
            }
        }
    }

    /// Earliest pending event time and, for completions, the server and
    /// pool slot that trigger it.
    fn next_event(&self) -> Option<(f64, Option<(usize, usize)>)> {
        let eta = self.cfg.cycles_per_bit;
        let mut best: Option<(f64, Option<(usize, usize)>)> = None;
        for (s, srv) in self.servers.iter().enumerate() {
            if let Some((dt, idx)) = srv.next_completion(eta) {
                let t = self.clock + dt;
                if best.map_or(true, |(bt, _)| t < bt) {
                    best = Some((t, Some((s, idx))));
                }
            }
            if let Some(t) = srv.next_arrival() {
                let t = t.max(self.clock);
                if best.map_or(true, |(bt, _)| t < bt) {
                    best = Some((t, None));
                }
            }
        }
        best
    }

    /// Run the event loop up to `target` (inclusive of events at `target`).
    pub fn advance_to(&mut self, target: f64) -> Result<()> {
        if target < self.clock {
            return Err(Error::Contract("advance_to target is in the past"));
        }
        let eta = self.cfg.cycles_per_bit;
        loop {
            match self.next_event() {
                Some((t, trigger)) if t <= target => {
                    let dt = t - self.clock;
                    for srv in &mut self.servers {
                        srv.deplete(dt, eta);
                    }
                    self.clock = t;
                    if let Some((s, idx)) = trigger {
                        self.servers[s].exec_pool[idx].residual = 0.0;
                    }
                    self.collect_completions();
                    self.process_arrivals();
                }
                _ => {
                    let dt = target - self.clock;
                    for srv in &mut self.servers {
                        srv.deplete(dt, eta);
                    }
                    self.clock = target;
                    self.collect_completions();
                    break;
                }
            }
        }
        self.sync_residuals();
        Ok(())
    }

    fn collect_completions(&mut self) {
        for s in 0..self.servers.len() {
            let mut i = 0;
            while i < self.servers[s].exec_pool.len() {
                let p = self.servers[s].exec_pool[i];
                if p.residual <= COMPLETION_EPS_BITS {
                    self.servers[s].exec_pool.remove(i);
                    self.complete(p.task, s);
                } else {
                    i += 1;
                }
            }
        }
    }

    /// Close the current step: advance to the next boundary, or drain all
    /// dispatched work if this was the last step.
    pub fn end_step(&mut self) -> Result<bool> {
        if self.phase != Phase::Idle {
            return Err(Error::Contract("end_step before the decision was made"));
        }
        self.step += 1;
        if self.step < self.cfg.steps_per_episode {
            self.advance_to(self.step as f64 * self.cfg.step_duration)?;
            Ok(false)
        } else {
            self.drain()?;
            self.phase = Phase::Finished;
            Ok(true)
        }
    }

    fn drain(&mut self) -> Result<()> {
        while let Some((t, _)) = self.next_event() {
            self.advance_to(t)?;
        }
        Ok(())
    }

    /// `(Σ T_off + T_exe, Σ E_off + E_exe)` over every dispatched task.
    pub fn episode_totals(&self) -> Result<(f64, f64)> {
        if self.phase != Phase::Finished {
            return Err(Error::Contract("episode totals queried before the episode finished"));
        }
        let mut delay = 0.0;
        let mut energy = 0.0;
        for t in self.tasks.iter().filter(|t| t.server.is_some()) {
            delay += t.total_delay().ok_or(Error::Contract("dispatched task never completed"))?;
            energy += t.total_energy();
        }
        Ok((delay, energy))
    }

    #[cfg(test)]
    pub(crate) fn test_insert_pool(&mut self, server: usize, residuals: &[f64]) {
        for &r in residuals {
            let id = self.tasks.len();
            let mut rec = TaskRecord::queued(id, 0, r);
            rec.server = Some(server);
            rec.dispatch_instant = Some(self.clock);
            rec.server_arrival_instant = Some(self.clock);
            self.tasks.push(rec);
            self.servers[server].exec_pool.push(PoolEntry { task: id, residual: r });
        }
    }
}
