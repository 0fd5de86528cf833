//! Multi-edge-type density evolution for the quantized offset Min-Sum
//! decoder with faulty check-to-variable memories.
//!
//! One message pmf is tracked per protograph edge type `(j, i)`; parallel
//! edges of the same type share their distribution. Each flooding iteration
//! runs the check update, applies the fault operator to every check output
//! and then runs the variable update.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::channel::{channel_pmf, ChannelParams, QuantSpec, QuantizedPmf};
use crate::decoder::{decode_sign_magnitude, encode_sign_magnitude, DecoderConfig, FaultModel};
use crate::error::{Error, Result};
use crate::protograph::Protograph;

/// Bumped whenever a change alters DE output; part of every cache key.
pub const ENGINE_VERSION: u32 = 1;

/// Below this error probability a trace counts as converged.
pub const CONVERGED_PE: f64 = 1e-12;
/// Iteration-to-iteration change that counts as a fixed point.
pub const STALL_DELTA: f64 = 1e-14;

/// Transition matrix of a faulty `q`-bit sign-magnitude read, on values.
#[derive(Debug, Clone, PartialEq)]
pub struct FaultOperator {
    q: u32,
    epsilon: f64,
    dim: usize,
    matrix: Vec<f64>,
}

impl FaultOperator {
    pub fn new(q: u32, epsilon: f64) -> Result<Self> {
        if !(2..=16).contains(&q) {
            return Err(Error::InvalidParameter(format!("q = {q} outside 2..=16")));
        }
        if !(0.0..=0.5).contains(&epsilon) {
            return Err(Error::InvalidParameter(format!(
                "fault probability {epsilon} outside [0, 1/2]"
            )));
        }
        let max = (1i32 << (q - 1)) - 1;
        let dim = (2 * max + 1) as usize;
        let mut matrix = vec![0.0; dim * dim];
        for v in -max..=max {
            let from = encode_sign_magnitude(v, q);
            for pattern in 0..(1u32 << q) {
                let h = (from ^ pattern).count_ones() as i32;
                let p = epsilon.powi(h) * (1.0 - epsilon).powi(q as i32 - h);
                let w = decode_sign_magnitude(pattern, q);
                matrix[(v + max) as usize * dim + (w + max) as usize] += p;
            }
        }
        Ok(FaultOperator {
            q,
            epsilon,
            dim,
            matrix,
        })
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn max_value(&self) -> i32 {
        (self.dim as i32 - 1) / 2
    }

    /// `P(read = w | stored = v)`.
    pub fn entry(&self, v: i32, w: i32) -> f64 {
        let m = self.max_value();
        self.matrix[(v + m) as usize * self.dim + (w + m) as usize]
    }

    pub fn row(&self, v: i32) -> &[f64] {
        let r = (v + self.max_value()) as usize;
        &self.matrix[r * self.dim..(r + 1) * self.dim]
    }

    /// Distribution of a faulty read of a value drawn from `pmf`.
    pub fn apply(&self, pmf: &QuantizedPmf) -> QuantizedPmf {
        let m = self.max_value();
        let mut out = vec![0.0; self.dim];
        for (v, &p) in pmf.values().zip(pmf.probs()) {
            if p == 0.0 {
                continue;
            }
            for (o, &t) in out.iter_mut().zip(self.row(v)) {
                *o += p * t;
            }
        }
        QuantizedPmf::symmetric(m, out)
    }
}

/// Applies the fault channel to a pmf on `{-Q, .., Q}` in place, one bit
/// at a time over the `2^q` sign-magnitude patterns.
pub fn apply_faults(probs: &mut [f64], q: u32, epsilon: f64, patterns: &mut Vec<f64>) {
    if epsilon == 0.0 {
        return;
    }
    let max = (1i32 << (q - 1)) - 1;
    debug_assert_eq!(probs.len(), (2 * max + 1) as usize);
    patterns.clear();
    patterns.resize(1 << q, 0.0);
    for (k, &p) in probs.iter().enumerate() {
        patterns[encode_sign_magnitude(k as i32 - max, q) as usize] = p;
    }
    let keep = 1.0 - epsilon;
    for bit in 0..q {
        let stride = 1usize << bit;
        for base in (0..patterns.len()).step_by(2 * stride) {
            for x in base..base + stride {
                let a = patterns[x];
                let b = patterns[x + stride];
                patterns[x] = keep * a + epsilon * b;
                patterns[x + stride] = keep * b + epsilon * a;
            }
        }
    }
    probs.iter_mut().for_each(|p| *p = 0.0);
    for (pattern, &p) in patterns.iter().enumerate() {
        let v = decode_sign_magnitude(pattern as u32, q);
        probs[(v + max) as usize] += p;
    }
}

/// Linear convolution; `out[k]` has value offset `a_min + b_min`.
pub fn convolve(a: &[f64], b: &[f64], out: &mut Vec<f64>) {
    out.clear();
    out.resize(a.len() + b.len() - 1, 0.0);
    for (i, &x) in a.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        for (o, &y) in out[i..].iter_mut().zip(b) {
            *o += x * y;
        }
    }
}

fn saturate_into(src: &[f64], src_min: i32, max: i32, out: &mut [f64]) {
    out.iter_mut().for_each(|o| *o = 0.0);
    for (k, &p) in src.iter().enumerate() {
        let v = (src_min + k as i32).clamp(-max, max);
        out[(v + max) as usize] += p;
    }
}

/// Clamps negative round-off and rescales to unit mass.
fn clean(p: &mut [f64]) {
    let mut worst = 0.0f64;
    let mut total = 0.0;
    for x in p.iter_mut() {
        if *x < 0.0 {
            worst = worst.max(-*x);
            *x = 0.0;
        }
        total += *x;
    }
    if worst > 1e-10 {
        log::warn!("density evolution clamped a negative mass of {worst:e}");
    }
    if total > 0.0 && total != 1.0 {
        p.iter_mut().for_each(|x| *x /= total);
    }
}

/// Variable-node update on explicit per-edge pmfs.
///
/// Returns the extrinsic outputs (saturated to `{-Q, .., Q}`) and the
/// posterior pmf on the `(q + q_s)`-bit alphabet.
pub fn vn_update_pmfs(
    channel: &QuantizedPmf,
    incoming: &[QuantizedPmf],
    spec: &QuantSpec,
) -> (Vec<QuantizedPmf>, QuantizedPmf) {
    let q_max = spec.max_msg();
    let p_max = spec.max_posterior();
    let mut buf = Vec::new();
    let fold = |parts: &mut dyn Iterator<Item = &QuantizedPmf>| -> (Vec<f64>, i32) {
        let mut acc = channel.probs().to_vec();
        let mut min = channel.min_value();
        for pmf in parts {
            let mut next = Vec::new();
            convolve(&acc, pmf.probs(), &mut next);
            min += pmf.min_value();
            acc = next;
        }
        (acc, min)
    };
    let mut extrinsic = Vec::with_capacity(incoming.len());
    for skip in 0..incoming.len() {
        let (acc, min) = fold(&mut incoming.iter().enumerate().filter(|(k, _)| *k != skip).map(|(_, p)| p));
        buf.resize((2 * q_max + 1) as usize, 0.0);
        saturate_into(&acc, min, q_max, &mut buf);
        extrinsic.push(QuantizedPmf::symmetric(q_max, buf.clone()));
    }
    let (acc, min) = fold(&mut incoming.iter());
    let mut post = vec![0.0; (2 * p_max + 1) as usize];
    saturate_into(&acc, min, p_max, &mut post);
    (extrinsic, QuantizedPmf::symmetric(p_max, post))
}

/// Magnitude survival functions split by sign: `plus[m] = P(|X| >= m, X >= 0)`,
/// `minus[m] = P(|X| >= m, X < 0)` for `m = 0..=Q+1`.
#[derive(Debug, Clone)]
struct Survival {
    plus: Vec<f64>,
    minus: Vec<f64>,
}

impl Survival {
    fn identity(max: usize) -> Self {
        Survival {
            plus: vec![1.0; max + 2],
            minus: vec![0.0; max + 2],
        }
        .with_tail()
    }

    fn with_tail(mut self) -> Self {
        // |X| >= Q + 1 is impossible
        let n = self.plus.len();
        self.plus[n - 1] = 0.0;
        self.minus[n - 1] = 0.0;
        self
    }

    fn from_pmf(p: &[f64]) -> Self {
        let max = (p.len() - 1) / 2;
        let mut plus = vec![0.0; max + 2];
        let mut minus = vec![0.0; max + 2];
        for m in (1..=max).rev() {
            plus[m] = plus[m + 1] + p[max + m];
            minus[m] = minus[m + 1] + p[max - m];
        }
        plus[0] = plus[1] + p[max];
        minus[0] = minus[1];
        Survival { plus, minus }
    }

    fn combine(&mut self, other: &Survival) {
        for m in 0..self.plus.len() {
            let (a1, b1) = (self.plus[m], self.minus[m]);
            let (a2, b2) = (other.plus[m], other.minus[m]);
            self.plus[m] = a1 * a2 + b1 * b2;
            self.minus[m] = a1 * b2 + b1 * a2;
        }
    }

    /// Pmf of `sign * max(min - lambda, 0)` on `{-Q, .., Q}`.
    fn to_pmf(&self, lambda: usize, out: &mut [f64]) {
        let max = self.plus.len() - 2;
        out.iter_mut().for_each(|o| *o = 0.0);
        for m in 0..=max {
            let pp = (self.plus[m] - self.plus[m + 1]).max(0.0);
            let pm = (self.minus[m] - self.minus[m + 1]).max(0.0);
            let mag = m.saturating_sub(lambda);
            out[max + mag] += pp;
            out[max - mag] += pm;
        }
    }
}

/// Check-node update on explicit per-edge pmfs (all on `{-Q, .., Q}`).
pub fn cn_update_pmfs(incoming: &[QuantizedPmf], lambda: u32) -> Vec<QuantizedPmf> {
    let Some(first) = incoming.first() else {
        return Vec::new();
    };
    let max = first.max_value();
    let surv: Vec<Survival> = incoming
        .iter()
        .map(|p| Survival::from_pmf(&p.saturate(max).into_probs()))
        .collect();
    (0..incoming.len())
        .map(|skip| {
            let mut acc = Survival::identity(max as usize);
            for (k, s) in surv.iter().enumerate() {
                if k != skip {
                    acc.combine(s);
                }
            }
            let mut out = vec![0.0; (2 * max + 1) as usize];
            acc.to_pmf(lambda as usize, &mut out);
            QuantizedPmf::symmetric(max, out)
        })
        .collect()
}

/// Decoder parameters seen by density evolution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeParams {
    pub q: u32,
    pub epsilon: f64,
    pub alpha: f64,
    pub lambda: u32,
}

impl DeParams {
    pub fn new(q: u32, epsilon: f64, alpha: f64, lambda: u32) -> Self {
        DeParams {
            q,
            epsilon,
            alpha,
            lambda,
        }
    }
}

impl From<&DecoderConfig> for DeParams {
    fn from(cfg: &DecoderConfig) -> Self {
        let epsilon = if cfg.fault_model == FaultModel::None {
            0.0
        } else {
            cfg.epsilon
        };
        DeParams::new(cfg.quant.q, epsilon, cfg.alpha, cfg.lambda)
    }
}

/// Per-iteration infinite-length error probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeTrace {
    pub params: DeParams,
    pub snr_db: f64,
    /// `p_e[l]` for flooding iterations `l = 0..=L_flood`.
    pub p_e: Vec<f64>,
    /// Error probability fell below [`CONVERGED_PE`].
    pub converged: bool,
    /// Iterations actually computed before the trace was padded.
    pub iterations_run: usize,
}

impl DeTrace {
    pub fn l_flood(&self) -> usize {
        self.p_e.len() - 1
    }

    pub fn final_pe(&self) -> f64 {
        *self.p_e.last().unwrap()
    }
}

#[derive(Debug, Clone, Copy)]
struct EdgeType {
    mult: usize,
}

/// FFT machinery for one variable node.
struct VnFft {
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    len: usize,
}

/// Reusable density-evolution state for one protograph and parameter set.
pub struct DeEngine {
    params: DeParams,
    spec: QuantSpec,
    n_cols: usize,
    types: Vec<EdgeType>,
    by_row: Vec<Vec<usize>>,
    by_col: Vec<Vec<usize>>,
    c2v: Vec<Vec<f64>>,
    v2c: Vec<Vec<f64>>,
    vn_fft: Vec<Option<VnFft>>,
    patterns: Vec<f64>,
}

/// Alphabets at or above this size use FFT convolutions at the variable nodes.
const FFT_MIN_ALPHABET: usize = 127;

impl DeEngine {
    pub fn new(p: &Protograph, params: DeParams) -> Result<Self> {
        let profile = p.degree_profile();
        let spec = QuantSpec::new(params.q, profile.guard_bits)?;
        if !(0.0..=0.5).contains(&params.epsilon) {
            return Err(Error::InvalidParameter(format!(
                "fault probability {} outside [0, 1/2]",
                params.epsilon
            )));
        }
        if !(params.alpha >= 0.0) || !params.alpha.is_finite() {
            return Err(Error::InvalidParameter(format!("alpha = {}", params.alpha)));
        }
        let mut types = Vec::new();
        let mut by_row = vec![Vec::new(); p.rows()];
        let mut by_col = vec![Vec::new(); p.cols()];
        for row in 0..p.rows() {
            for col in 0..p.cols() {
                let mult = p.get(row, col) as usize;
                if mult > 0 {
                    by_row[row].push(types.len());
                    by_col[col].push(types.len());
                    types.push(EdgeType { mult });
                }
            }
        }
        let alphabet = (2 * spec.max_msg() + 1) as usize;
        let mut planner = FftPlanner::new();
        let vn_fft = (0..p.cols())
            .map(|col| {
                if alphabet < FFT_MIN_ALPHABET {
                    return None;
                }
                let dv = profile.var_degrees[col] as usize;
                let len = ((dv + 1) * (alphabet - 1) + 1).next_power_of_two();
                Some(VnFft {
                    fwd: planner.plan_fft_forward(len),
                    inv: planner.plan_fft_inverse(len),
                    len,
                })
            })
            .collect();
        Ok(DeEngine {
            params,
            spec,
            n_cols: p.cols(),
            c2v: vec![vec![0.0; alphabet]; types.len()],
            v2c: vec![vec![0.0; alphabet]; types.len()],
            types,
            by_row,
            by_col,
            vn_fft,
            patterns: Vec::new(),
        })
    }

    pub fn params(&self) -> &DeParams {
        &self.params
    }

    pub fn quant(&self) -> &QuantSpec {
        &self.spec
    }

    /// Channel pmf at `snr_db` with this engine's scaling.
    pub fn channel(&self, snr_db: f64) -> Result<QuantizedPmf> {
        channel_pmf(&ChannelParams::new(snr_db, self.params.alpha), &self.spec)
    }

    /// Runs `l_flood` flooding iterations at `snr_db`.
    pub fn run(&mut self, snr_db: f64, l_flood: usize) -> Result<DeTrace> {
        let channel = self.channel(snr_db)?;
        self.run_with_channel(&channel, snr_db, l_flood)
    }

    /// Runs from an explicit channel pmf on `{-Q, .., Q}`.
    pub fn run_with_channel(
        &mut self,
        channel: &QuantizedPmf,
        snr_db: f64,
        l_flood: usize,
    ) -> Result<DeTrace> {
        let q_max = self.spec.max_msg();
        if channel.min_value() != -q_max || channel.max_value() != q_max {
            return Err(Error::DimensionMismatch {
                expected: (2 * q_max + 1) as usize,
                got: channel.probs().len(),
            });
        }
        let ch = channel.probs();
        for t in 0..self.types.len() {
            self.v2c[t].copy_from_slice(ch);
            self.c2v[t].iter_mut().for_each(|x| *x = 0.0);
            self.c2v[t][q_max as usize] = 1.0;
        }
        let ch_fft: Vec<Option<Vec<Complex64>>> = (0..self.n_cols)
            .map(|col| self.vn_fft[col].as_ref().map(|f| forward(f, ch)))
            .collect();

        let mut p_e = Vec::with_capacity(l_flood + 1);
        p_e.push(channel.error_prob());
        let mut converged = p_e[0] < CONVERGED_PE;
        let mut iterations_run = 0;
        while p_e.len() <= l_flood && !converged {
            self.check_update();
            let mut total = 0.0;
            for col in 0..self.n_cols {
                total += self.variable_update(col, ch, ch_fft[col].as_deref());
            }
            let pe = total / self.n_cols as f64;
            iterations_run += 1;
            let prev = *p_e.last().unwrap();
            p_e.push(pe);
            if pe < CONVERGED_PE {
                converged = true;
            } else if (pe - prev).abs() < STALL_DELTA {
                break;
            }
        }
        let last = *p_e.last().unwrap();
        p_e.resize(l_flood + 1, last);
        Ok(DeTrace {
            params: self.params,
            snr_db,
            p_e,
            converged,
            iterations_run,
        })
    }

    fn check_update(&mut self) {
        let max = self.spec.max_msg() as usize;
        let lambda = self.params.lambda as usize;
        for row in 0..self.by_row.len() {
            let ids = &self.by_row[row];
            let surv: Vec<Survival> = ids.iter().map(|&t| Survival::from_pmf(&self.v2c[t])).collect();
            for (k, &t) in ids.iter().enumerate() {
                let mut acc = Survival::identity(max);
                for (k2, s) in surv.iter().enumerate() {
                    let times = self.types[ids[k2]].mult - usize::from(k2 == k);
                    for _ in 0..times {
                        acc.combine(s);
                    }
                }
                let out = &mut self.c2v[t];
                acc.to_pmf(lambda, out);
                apply_faults(out, self.spec.q, self.params.epsilon, &mut self.patterns);
                clean(out);
            }
        }
    }

    /// Updates the outgoing pmfs of column `col`; returns its posterior error
    /// probability.
    fn variable_update(&mut self, col: usize, ch: &[f64], ch_fft: Option<&[Complex64]>) -> f64 {
        let q_max = self.spec.max_msg();
        let ids = self.by_col[col].clone();
        if let (Some(fft), Some(ch_fft)) = (self.vn_fft[col].as_ref(), ch_fft) {
            return self.variable_update_fft(col, &ids, fft_len(fft), ch_fft);
        }
        // base = channel * prod_t c2v[t]^(mult_t - 1)
        let mut base = ch.to_vec();
        let mut min = -q_max;
        let mut tmp = Vec::new();
        for &t in &ids {
            for _ in 1..self.types[t].mult {
                convolve(&base, &self.c2v[t], &mut tmp);
                std::mem::swap(&mut base, &mut tmp);
                min -= q_max;
            }
        }
        let mut ext = Vec::new();
        let mut post_err = 0.0;
        for (k, &t) in ids.iter().enumerate() {
            ext.clear();
            ext.extend_from_slice(&base);
            let mut ext_min = min;
            for (k2, &t2) in ids.iter().enumerate() {
                if k2 != k {
                    convolve(&ext, &self.c2v[t2], &mut tmp);
                    std::mem::swap(&mut ext, &mut tmp);
                    ext_min -= q_max;
                }
            }
            if k == 0 {
                post_err = sum_error(&ext, ext_min, &self.c2v[t], q_max);
            }
            let out = &mut self.v2c[t];
            saturate_into(&ext, ext_min, q_max, out);
            clean(out);
        }
        post_err
    }

    fn variable_update_fft(
        &mut self,
        col: usize,
        ids: &[usize],
        len: usize,
        ch_fft: &[Complex64],
    ) -> f64 {
        let q_max = self.spec.max_msg();
        let fft = self.vn_fft[col].as_ref().unwrap();
        let spectra: Vec<Vec<Complex64>> = ids.iter().map(|&t| forward(fft, &self.c2v[t])).collect();
        let mut base = ch_fft.to_vec();
        let mut terms = 1;
        for (k, &t) in ids.iter().enumerate() {
            for _ in 1..self.types[t].mult {
                base.iter_mut().zip(&spectra[k]).for_each(|(b, s)| *b *= s);
                terms += 1;
            }
        }
        let mut post_err = 0.0;
        let mut buf = vec![Complex64::new(0.0, 0.0); len];
        let mut real = vec![0.0; len];
        for (k, &t) in ids.iter().enumerate() {
            buf.copy_from_slice(&base);
            let mut ext_terms = terms;
            for (k2, s) in spectra.iter().enumerate() {
                if k2 != k {
                    buf.iter_mut().zip(s).for_each(|(b, x)| *b *= x);
                    ext_terms += 1;
                }
            }
            fft.inv.process(&mut buf);
            let scale = 1.0 / len as f64;
            let width = ext_terms * (2 * q_max as usize) + 1;
            for (r, b) in real.iter_mut().zip(&buf).take(width) {
                *r = b.re * scale;
            }
            let ext = &mut real[..width];
            ext.iter_mut().for_each(|x| *x = x.max(0.0));
            let ext_min = -(ext_terms as i32) * q_max;
            if k == 0 {
                post_err = sum_error(ext, ext_min, &self.c2v[t], q_max);
            }
            let out = &mut self.v2c[t];
            saturate_into(ext, ext_min, q_max, out);
            clean(out);
        }
        post_err
    }
}

fn fft_len(f: &VnFft) -> usize {
    f.len
}

fn forward(f: &VnFft, p: &[f64]) -> Vec<Complex64> {
    let mut buf = vec![Complex64::new(0.0, 0.0); f.len];
    for (b, &x) in buf.iter_mut().zip(p) {
        b.re = x;
    }
    f.fwd.process(&mut buf);
    buf
}

/// Error probability of `X + Y` with `X ~ a` (offset `a_min`) and `Y ~ b` on
/// `{-Q, .., Q}`, without forming the convolution.
fn sum_error(a: &[f64], a_min: i32, b: &[f64], q_max: i32) -> f64 {
    // g[k] = P(Y < k - Q... ) expressed through cumulative sums of b
    let n = b.len();
    let mut below = vec![0.0; n + 1]; // below[k] = P(Y_index < k)
    for k in 0..n {
        below[k + 1] = below[k] + b[k];
    }
    let mut e = 0.0;
    for (i, &x) in a.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        let v = a_min + i as i32;
        // need Y < -v, plus half of Y = -v; Y index = y + Q
        let idx = -v + q_max;
        let (lt, eq) = if idx <= 0 {
            (0.0, if idx == 0 { b[0] } else { 0.0 })
        } else if idx as usize >= n {
            (1.0, 0.0)
        } else {
            (below[idx as usize], b[idx as usize])
        };
        e += x * (lt + 0.5 * eq);
    }
    e.clamp(0.0, 1.0)
}

/// Runs density evolution for `p` under `cfg` at `snr_db`.
pub fn de_run(p: &Protograph, cfg: &DecoderConfig, snr_db: f64, l_flood: usize) -> Result<DeTrace> {
    DeEngine::new(p, DeParams::from(cfg))?.run(snr_db, l_flood)
}

/// Smallest SNR (dB, to `resolution`) with `p_e[l_flood] <= target`,
/// searched by bisection inside `[lo_db, hi_db]`.
pub fn de_threshold(
    p: &Protograph,
    params: DeParams,
    target: f64,
    l_flood: usize,
    (lo_db, hi_db): (f64, f64),
    resolution: f64,
) -> Result<f64> {
    if !(lo_db < hi_db) || !(resolution > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "empty SNR bracket [{lo_db}, {hi_db}]"
        )));
    }
    let mut engine = DeEngine::new(p, params)?;
    let mut ok = |db: f64| -> Result<bool> { Ok(engine.run(db, l_flood)?.final_pe() <= target) };
    if !ok(hi_db)? {
        return Err(Error::Unbracketed(format!(
            "target {target:e} not reached at {hi_db} dB"
        )));
    }
    if ok(lo_db)? {
        return Err(Error::Unbracketed(format!(
            "target {target:e} already met at {lo_db} dB"
        )));
    }
    let (mut lo, mut hi) = (lo_db, hi_db);
    while hi - lo > resolution {
        let mid = 0.5 * (lo + hi);
        if ok(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}
