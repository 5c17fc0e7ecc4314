//! Actor/critic network over per-server observation rows.
//!
//! ```text
//! row_e ──▶ shared encoder (Linear + SiLU) ──┐
//!                                            ├─ concat ─▶ Linear + SiLU ─▶ residual blocks ─┬─▶ policy logits (E+1)
//! row_0..row_E (same weights for every row) ─┘                                              └─▶ values (V_T, V_E)
//! ```
//!
//! Each residual block computes `x + W2·silu(W1·x + b1) + b2`. All parameters
//! live in one flat `Vec<f64>` whose layout is a pure function of
//! `(E, N, hidden sizes)`. Backpropagation is written out by hand.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::math;
use crate::obs::SCALAR_FEATURES;
use crate::rng::{stream_rng, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Architecture {
    pub encoder: usize,
    pub trunk: usize,
    pub blocks: usize,
}

impl Default for Architecture {
    fn default() -> Self {
        Architecture {
            encoder: 64,
            trunk: 256,
            blocks: 2,
        }
    }
}

impl Architecture {
    pub fn small() -> Self {
        Architecture {
            encoder: 32,
            trunk: 64,
            blocks: 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Linear {
    w: usize,
    b: usize,
    inp: usize,
    out: usize,
}

impl Linear {
    fn alloc(offset: &mut usize, inp: usize, out: usize) -> Self {
        let w = *offset;
        let b = w + inp * out;
        *offset = b + out;
        Linear { w, b, inp, out }
    }

    fn end(&self) -> usize {
        self.b + self.out
    }

    fn forward(&self, p: &[f64], x: &[f64], y: &mut [f64]) {
        let w = &p[self.w..self.b];
        let b = &p[self.b..self.end()];
        for (o, yo) in y.iter_mut().enumerate() {
            let row = &w[o * self.inp..(o + 1) * self.inp];
            let mut acc = b[o];
            for (wi, xi) in row.iter().zip(x) {
                acc += wi * xi;
            }
            *yo = acc;
        }
    }

    /// Accumulate parameter gradients for `dy` at input `x`; if `dx` is
    /// given, add `Wᵀ·dy` into it.
    fn backward(&self, p: &[f64], g: &mut [f64], x: &[f64], dy: &[f64], dx: Option<&mut [f64]>) {
        for (o, &d) in dy.iter().enumerate() {
            if d == 0.0 {
                continue;
            }
            g[self.b + o] += d;
            let gw = &mut g[self.w + o * self.inp..self.w + (o + 1) * self.inp];
            for (gi, xi) in gw.iter_mut().zip(x) {
                *gi += d * xi;
            }
        }
        if let Some(dx) = dx {
            let w = &p[self.w..self.b];
            for (o, &d) in dy.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                let row = &w[o * self.inp..(o + 1) * self.inp];
                for (dxi, wi) in dx.iter_mut().zip(row) {
                    *dxi += d * wi;
                }
            }
        }
    }
}

/// Offsets of every layer inside the flat parameter vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    pub edges: usize,
    pub bins: usize,
    pub arch: Architecture,
    encoder: Linear,
    trunk_in: Linear,
    blocks: Vec<(Linear, Linear)>,
    policy: Linear,
    value: Linear,
    len: usize,
}

impl Layout {
    pub fn new(edges: usize, bins: usize, arch: Architecture) -> Result<Self> {
        if arch.encoder == 0 || arch.trunk == 0 {
            return Err(Error::Layout(format!("hidden sizes must be positive: {arch:?}")));
        }
        let rows = edges + 1;
        let width = SCALAR_FEATURES + bins;
        let mut off = 0;
        let encoder = Linear::alloc(&mut off, width, arch.encoder);
        let trunk_in = Linear::alloc(&mut off, rows * arch.encoder, arch.trunk);
        let blocks = (0..arch.blocks)
            .map(|_| {
                let a = Linear::alloc(&mut off, arch.trunk, arch.trunk);
                let b = Linear::alloc(&mut off, arch.trunk, arch.trunk);
                (a, b)
            })
            .collect();
        let policy = Linear::alloc(&mut off, arch.trunk, rows);
        let value = Linear::alloc(&mut off, arch.trunk, 2);
        Ok(Layout {
            edges,
            bins,
            arch,
            encoder,
            trunk_in,
            blocks,
            policy,
            value,
            len: off,
        })
    }

    pub fn rows(&self) -> usize {
        self.edges + 1
    }

    pub fn width(&self) -> usize {
        SCALAR_FEATURES + self.bins
    }

    pub fn input_len(&self) -> usize {
        self.rows() * self.width()
    }

    pub fn num_params(&self) -> usize {
        self.len
    }

    /// Range of the shared per-row encoder weights and bias.
    pub fn encoder_range(&self) -> core::ops::Range<usize> {
        self.encoder.w..self.encoder.end()
    }

    pub fn policy_head_range(&self) -> core::ops::Range<usize> {
        self.policy.w..self.policy.end()
    }

    pub fn value_head_range(&self) -> core::ops::Range<usize> {
        self.value.w..self.value.end()
    }

    /// Index of the value-head bias for objective `i` (0 delay, 1 energy).
    pub fn value_bias(&self, i: usize) -> usize {
        self.value.b + i
    }
}

#[inline]
pub fn silu(x: f64) -> f64 {
    x * math::sigmoid(x)
}

#[inline]
pub fn silu_grad(x: f64) -> f64 {
    let s = math::sigmoid(x);
    s * (1.0 + x * (1.0 - s))
}

/// Max-subtracted log-softmax.
pub fn log_softmax(logits: &[f64], out: &mut [f64]) {
    let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut z = 0.0;
    for &l in logits {
        z += math::exp(l - m);
    }
    let lz = m + math::ln(z);
    for (o, &l) in out.iter_mut().zip(logits) {
        *o = l - lz;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyOutput {
    pub probs: Vec<f64>,
    pub log_probs: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValueOutput {
    pub delay: f64,
    pub energy: f64,
}

impl ValueOutput {
    pub fn scalarized(&self, omega_t: f64, omega_e: f64) -> f64 {
        omega_t * self.delay + omega_e * self.energy
    }
}

/// Intermediate activations of one forward pass, reused across samples.
#[derive(Debug, Clone)]
pub struct Cache {
    input: Vec<f64>,
    enc_pre: Vec<f64>,
    concat: Vec<f64>,
    trunk_pre: Vec<f64>,
    /// Block inputs; the last entry is the trunk output.
    xs: Vec<Vec<f64>>,
    block_pre: Vec<Vec<f64>>,
    block_act: Vec<Vec<f64>>,
    pub logits: Vec<f64>,
    pub log_probs: Vec<f64>,
    pub values: [f64; 2],
    // Backward scratch.
    dx: Vec<f64>,
    dtmp: Vec<f64>,
    dconcat: Vec<f64>,
    denc: Vec<f64>,
}

impl Cache {
    pub fn new(layout: &Layout) -> Self {
        let rows = layout.rows();
        let a = layout.arch;
        Cache {
            input: vec![0.0; layout.input_len()],
            enc_pre: vec![0.0; rows * a.encoder],
            concat: vec![0.0; rows * a.encoder],
            trunk_pre: vec![0.0; a.trunk],
            xs: vec![vec![0.0; a.trunk]; a.blocks + 1],
            block_pre: vec![vec![0.0; a.trunk]; a.blocks],
            block_act: vec![vec![0.0; a.trunk]; a.blocks],
            logits: vec![0.0; rows],
            log_probs: vec![0.0; rows],
            values: [0.0; 2],
            dx: vec![0.0; a.trunk],
            dtmp: vec![0.0; a.trunk],
            dconcat: vec![0.0; rows * a.encoder],
            denc: vec![0.0; a.encoder],
        }
    }

    pub fn probs(&self) -> impl Iterator<Item = f64> + '_ {
        self.log_probs.iter().map(|&l| math::exp(l))
    }
}

/// Actor/critic parameters together with their layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    layout: Layout,
    params: Vec<f64>,
}

impl Network {
    /// Fan-in scaled uniform weights, zero biases, zeroed policy head.
    pub fn init(edges: usize, bins: usize, arch: Architecture, seed: u64) -> Result<Self> {
        let layout = Layout::new(edges, bins, arch)?;
        let mut rng = stream_rng(seed, Stream::Init, 0);
        let mut params = vec![0.0; layout.len];
        let mut fill = |l: &Linear, gain: f64| {
            let bound = gain / math::sqrt(l.inp as f64);
            for w in &mut params[l.w..l.b] {
                *w = rng.random_range(-bound..bound);
            }
        };
        fill(&layout.encoder, 1.0);
        fill(&layout.trunk_in, 1.0);
        for (a, b) in &layout.blocks {
            fill(a, 1.0);
            fill(b, 0.5);
        }
        fill(&layout.value, 1.0);
        Ok(Network { layout, params })
    }

    pub fn from_params(layout: Layout, params: Vec<f64>) -> Result<Self> {
        if params.len() != layout.len {
            return Err(Error::Layout(format!(
                "expected {} parameters, got {}",
                layout.len,
                params.len()
            )));
        }
        if let Some(i) = params.iter().position(|p| !p.is_finite()) {
            return Err(Error::NonFinite {
                context: "parameters",
                index: i,
            });
        }
        Ok(Network { layout, params })
    }

    /// Exact copy of `src`, provided the layouts agree.
    pub fn warm_start(&self, src: &Network) -> Result<Network> {
        if self.layout != src.layout {
            return Err(Error::Layout(format!(
                "cannot warm start {:?} from {:?}",
                self.layout.arch, src.layout.arch
            )));
        }
        Ok(src.clone())
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn check_input(&self, input: &[f64]) -> Result<()> {
        if input.len() != self.layout.input_len() {
            return Err(Error::Layout(format!(
                "observation has {} values, network expects {}x{}",
                input.len(),
                self.layout.rows(),
                self.layout.width()
            )));
        }
        Ok(())
    }

    /// Full forward pass on a normalized observation, filling `cache`.
    pub fn forward(&self, input: &[f64], cache: &mut Cache) -> Result<()> {
        self.check_input(input)?;
        let l = &self.layout;
        let p = &self.params;
        let (w, h) = (l.width(), l.arch.encoder);
        cache.input.copy_from_slice(input);
        for r in 0..l.rows() {
            let pre = &mut cache.enc_pre[r * h..(r + 1) * h];
            l.encoder.forward(p, &input[r * w..(r + 1) * w], pre);
            for (c, &u) in cache.concat[r * h..(r + 1) * h].iter_mut().zip(pre.iter()) {
                *c = silu(u);
            }
        }
        l.trunk_in.forward(p, &cache.concat, &mut cache.trunk_pre);
        for (x, &u) in cache.xs[0].iter_mut().zip(&cache.trunk_pre) {
            *x = silu(u);
        }
        for (k, (a, b)) in l.blocks.iter().enumerate() {
            a.forward(p, &cache.xs[k], &mut cache.block_pre[k]);
            for (y, &u) in cache.block_act[k].iter_mut().zip(&cache.block_pre[k]) {
                *y = silu(u);
            }
            let (head, tail) = cache.xs.split_at_mut(k + 1);
            let next = &mut tail[0];
            b.forward(p, &cache.block_act[k], next);
            for (n, &x) in next.iter_mut().zip(&head[k]) {
                *n += x;
            }
        }
        let top = &cache.xs[l.blocks.len()];
        l.policy.forward(p, top, &mut cache.logits);
        l.value.forward(p, top, &mut cache.values);
        log_softmax(&cache.logits, &mut cache.log_probs);
        Ok(())
    }

    pub fn forward_policy(&self, input: &[f64]) -> Result<PolicyOutput> {
        let mut c = Cache::new(&self.layout);
        self.forward(input, &mut c)?;
        Ok(PolicyOutput {
            probs: c.probs().collect(),
            log_probs: c.log_probs.clone(),
        })
    }

    pub fn forward_value(&self, input: &[f64]) -> Result<ValueOutput> {
        let mut c = Cache::new(&self.layout);
        self.forward(input, &mut c)?;
        Ok(ValueOutput {
            delay: c.values[0],
            energy: c.values[1],
        })
    }

    /// Accumulate into `grad` the gradient of a loss whose derivatives with
    /// respect to the logits and values at the cached forward pass are
    /// `dlogits` and `dvalues`.
    pub fn backward(&self, cache: &mut Cache, dlogits: &[f64], dvalues: &[f64; 2], grad: &mut [f64]) {
        let l = &self.layout;
        let p = &self.params;
        let nb = l.blocks.len();
        let h = l.arch.encoder;
        let w = l.width();
        let dx = &mut cache.dx;
        dx.iter_mut().for_each(|d| *d = 0.0);
        l.policy.backward(p, grad, &cache.xs[nb], dlogits, Some(dx));
        l.value.backward(p, grad, &cache.xs[nb], dvalues, Some(dx));
        for k in (0..nb).rev() {
            let (a, b) = &l.blocks[k];
            // dx holds d/d(x_{k+1}); the skip path passes it straight through.
            let da = &mut cache.dtmp;
            da.iter_mut().for_each(|d| *d = 0.0);
            b.backward(p, grad, &cache.block_act[k], dx, Some(da));
            for (d, &u) in da.iter_mut().zip(&cache.block_pre[k]) {
                *d *= silu_grad(u);
            }
            a.backward(p, grad, &cache.xs[k], da, Some(dx));
        }
        for (d, &u) in dx.iter_mut().zip(&cache.trunk_pre) {
            *d *= silu_grad(u);
        }
        cache.dconcat.iter_mut().for_each(|d| *d = 0.0);
        l.trunk_in
            .backward(p, grad, &cache.concat, dx, Some(&mut cache.dconcat));
        for r in 0..l.rows() {
            for j in 0..h {
                cache.denc[j] = cache.dconcat[r * h + j] * silu_grad(cache.enc_pre[r * h + j]);
            }
            l.encoder
                .backward(p, grad, &cache.input[r * w..(r + 1) * w], &cache.denc, None);
        }
    }
}

/// A loss defined per sample on the network outputs.
pub trait SampleLoss {
    /// Loss of sample `index` at the cached outputs; writes its derivatives
    /// with respect to the logits and the two values.
    fn sample(&self, index: usize, cache: &Cache, dlogits: &mut [f64], dvalues: &mut [f64; 2]) -> f64;

    /// Extra term depending on the parameters directly; adds its gradient.
    fn params_term(&self, _params: &[f64], _grad: &mut [f64]) -> f64 {
        0.0
    }
}

/// Mean batch loss and its exact gradient.
pub fn gradient<I: AsRef<[f64]>>(
    net: &Network,
    batch: &[I],
    loss: &dyn SampleLoss,
) -> Result<(f64, Vec<f64>)> {
    let mut grad = vec![0.0; net.layout.len];
    let mut cache = Cache::new(&net.layout);
    let rows = net.layout.rows();
    let mut dl = vec![0.0; rows];
    let mut total = 0.0;
    let n = batch.len().max(1) as f64;
    for (i, x) in batch.iter().enumerate() {
        net.forward(x.as_ref(), &mut cache)?;
        dl.iter_mut().for_each(|d| *d = 0.0);
        let mut dv = [0.0; 2];
        let li = loss.sample(i, &cache, &mut dl, &mut dv);
        if !li.is_finite() {
            return Err(Error::NonFinite {
                context: "sample loss",
                index: i,
            });
        }
        total += li;
        dl.iter_mut().for_each(|d| *d /= n);
        dv[0] /= n;
        dv[1] /= n;
        net.backward(&mut cache, &dl, &dv, &mut grad);
    }
    let mut mean = total / n;
    mean += loss.params_term(&net.params, &mut grad);
    if !mean.is_finite() {
        return Err(Error::NonFinite {
            context: "batch loss",
            index: 0,
        });
    }
    if let Some(i) = grad.iter().position(|g| !g.is_finite()) {
        return Err(Error::NonFinite {
            context: "gradient",
            index: i,
        });
    }
    Ok((mean, grad))
}

/// Scale `grad` so its Euclidean norm is at most `max_norm`; returns the
/// norm before clipping.
pub fn clip_global_norm(grad: &mut [f64], max_norm: f64) -> f64 {
    let norm = math::sqrt(grad.iter().map(|g| g * g).sum());
    if norm > max_norm && norm > 0.0 {
        let s = max_norm / norm;
        grad.iter_mut().for_each(|g| *g *= s);
    }
    norm
}

#[derive(Debug, Clone, PartialEq)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    pub fn new(n: usize, lr: f64) -> Self {
        Adam {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        self.t += 1;
        let c1 = 1.0 - math::powi(self.beta1, self.t);
        let c2 = 1.0 - math::powi(self.beta2, self.t);
        for i in 0..params.len() {
            let g = grad[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let mh = self.m[i] / c1;
            let vh = self.v[i] / c2;
            params[i] -= self.lr * mh / (math::sqrt(vh) + self.eps);
        }
    }
}
