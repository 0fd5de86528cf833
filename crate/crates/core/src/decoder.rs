//! Bit-exact fixed-point offset Min-Sum decoder with memory read faults.
//!
//! Posteriors `beta_i` live in a `(q + q_s)`-bit memory, check-to-variable
//! messages `gamma_{j->i}` in a `q`-bit memory, both in sign-magnitude. The
//! hardware fault model XORs every read with an i.i.d. Bernoulli(eps) bit
//! pattern. The simplified model corrupts each freshly computed `gamma` once
//! and reads memories without faults.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{quantize_to, QuantSpec};
use crate::error::{Error, Result};
use crate::protograph::LiftedCode;

/// Where memory faults are injected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaultModel {
    /// Every read of `beta_i` and `gamma_{j->i}` is corrupted.
    Hardware,
    /// Each new `gamma_{j->i}` is corrupted once, reads are clean.
    Simplified,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schedule {
    RowLayered,
    Flooding,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecoderConfig {
    pub quant: QuantSpec,
    pub alpha: f64,
    pub lambda: u32,
    pub epsilon: f64,
    pub max_iters: usize,
    pub fault_model: FaultModel,
    pub schedule: Schedule,
}

impl DecoderConfig {
    pub fn validate(&self) -> Result<()> {
        QuantSpec::new(self.quant.q, self.quant.guard_bits)?;
        if self.lambda as i32 >= self.quant.max_msg() && !(self.lambda == 0) {
            return Err(Error::InvalidParameter(format!(
                "offset lambda = {} must be below Q = {}",
                self.lambda,
                self.quant.max_msg()
            )));
        }
        if !(0.0..=0.5).contains(&self.epsilon) {
            return Err(Error::InvalidParameter(format!(
                "fault probability {} outside [0, 1/2]",
                self.epsilon
            )));
        }
        if !(self.alpha >= 0.0) || !self.alpha.is_finite() {
            return Err(Error::InvalidParameter(format!("alpha = {}", self.alpha)));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("max_iters must be >= 1".into()));
        }
        Ok(())
    }

    fn faults_active(&self) -> bool {
        self.epsilon > 0.0 && self.fault_model != FaultModel::None
    }
}

/// Sign-magnitude pattern of `v` on `width` bits (sign is the top bit).
pub fn encode_sign_magnitude(v: i32, width: u32) -> u32 {
    let mag = v.unsigned_abs();
    debug_assert!(mag < (1 << (width - 1)));
    if v < 0 {
        (1 << (width - 1)) | mag
    } else {
        mag
    }
}

/// Inverse of [`encode_sign_magnitude`]; the `-0` pattern decodes to `0`.
pub fn decode_sign_magnitude(pattern: u32, width: u32) -> i32 {
    let mag = (pattern & ((1 << (width - 1)) - 1)) as i32;
    if pattern >> (width - 1) & 1 == 1 {
        -mag
    } else {
        mag
    }
}

/// Bernoulli(eps) bit-flip source for one memory.
///
/// Reads consume bits from a single i.i.d. stream; the distance to the next
/// flipped bit is drawn from a geometric law, so the cost is proportional to
/// the number of flips rather than the number of bits read.
#[derive(Debug, Clone)]
pub struct FaultChannel {
    epsilon: f64,
    log_keep: f64,
    gap: u64,
    rng: ChaCha8Rng,
}

impl FaultChannel {
    pub fn new(epsilon: f64, rng: ChaCha8Rng) -> Self {
        let mut fc = FaultChannel {
            epsilon,
            log_keep: (-epsilon).ln_1p(),
            gap: u64::MAX,
            rng,
        };
        fc.gap = fc.draw_gap();
        fc
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    fn draw_gap(&mut self) -> u64 {
        if self.epsilon <= 0.0 {
            return u64::MAX;
        }
        // number of clean bits before the next flip
        let u: f64 = 1.0 - self.rng.gen::<f64>(); // (0, 1]
        let g = (u.ln() / self.log_keep).floor();
        if g >= u64::MAX as f64 {
            u64::MAX
        } else {
            g as u64
        }
    }

    /// XOR mask for the next `width` bits of the stream.
    pub fn next_mask(&mut self, width: u32) -> u32 {
        let mut mask = 0u32;
        let mut pos = 0u64;
        let width = u64::from(width);
        while self.gap < width - pos {
            pos += self.gap;
            mask |= 1 << pos;
            pos += 1;
            self.gap = self.draw_gap();
        }
        if self.gap != u64::MAX {
            self.gap -= width - pos;
        }
        mask
    }

    /// Reads `v` from a `width`-bit sign-magnitude memory through the fault
    /// channel.
    pub fn read(&mut self, v: i32, width: u32) -> i32 {
        let mask = self.next_mask(width);
        if mask == 0 {
            return v;
        }
        decode_sign_magnitude(encode_sign_magnitude(v, width) ^ mask, width)
    }
}

/// [`FaultChannel::read`] as a free function.
pub fn faulty_read(v: i32, width: u32, fc: &mut FaultChannel) -> i32 {
    fc.read(v, width)
}

/// Memory identifiers used when deriving random streams.
pub mod memory {
    pub const CHANNEL_NOISE: u64 = 0;
    pub const VN_MEMORY: u64 = 1;
    pub const CN_MEMORY: u64 = 2;
}

/// Random stream for `(master seed, frame, memory)`.
///
/// The ChaCha key comes from the master seed, the stream id is the frame
/// index and each memory starts at word position `memory << 64`, so streams
/// never overlap.
pub fn stream_rng(seed: u64, frame: u64, memory: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(frame);
    rng.set_word_pos(u128::from(memory) << 64);
    rng
}

/// Fault sources of the two decoder memories.
#[derive(Debug, Clone)]
pub struct FaultStreams {
    pub vn: FaultChannel,
    pub cn: FaultChannel,
}

impl FaultStreams {
    pub fn new(epsilon: f64, seed: u64, frame: u64) -> Self {
        FaultStreams {
            vn: FaultChannel::new(epsilon, stream_rng(seed, frame, memory::VN_MEMORY)),
            cn: FaultChannel::new(epsilon, stream_rng(seed, frame, memory::CN_MEMORY)),
        }
    }
}

/// Offset Min-Sum check update.
///
/// Each output carries the product of the other inputs' signs (with
/// `sign(0) = +1`) and magnitude `max(min_other |x| - lambda, 0)`.
pub fn check_update(inputs: &[i32], lambda: u32, out: &mut [i32]) -> Result<()> {
    if inputs.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "check update needs at least 2 inputs, got {}",
            inputs.len()
        )));
    }
    if out.len() != inputs.len() {
        return Err(Error::DimensionMismatch {
            expected: inputs.len(),
            got: out.len(),
        });
    }
    min_sum(inputs, lambda as i32, out);
    Ok(())
}

#[inline]
fn min_sum(inputs: &[i32], lambda: i32, out: &mut [i32]) {
    let mut min1 = i32::MAX;
    let mut min2 = i32::MAX;
    let mut arg = 0;
    let mut neg = false;
    for (k, &x) in inputs.iter().enumerate() {
        let m = x.abs();
        neg ^= x < 0;
        if m < min1 {
            min2 = min1;
            min1 = m;
            arg = k;
        } else if m < min2 {
            min2 = m;
        }
    }
    let mag1 = (min1 - lambda).max(0);
    let mag2 = (min2 - lambda).max(0);
    for (k, (&x, o)) in inputs.iter().zip(out.iter_mut()).enumerate() {
        let mag = if k == arg { mag2 } else { mag1 };
        let negative = neg ^ (x < 0);
        *o = if negative { -mag } else { mag };
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodeResult {
    pub hard_bits: Vec<u8>,
    /// Zero syndrome reached.
    pub converged: bool,
    pub iterations: usize,
    /// Errors against the all-zero codeword.
    pub bit_errors: usize,
    pub bits_written: u64,
}

/// Reusable decoder state for one code and configuration.
pub struct Decoder<'a> {
    code: &'a LiftedCode,
    cfg: DecoderConfig,
    posterior: Vec<i32>,
    gamma: Vec<i32>,
    ext: Vec<i32>,
    old_read: Vec<i32>,
    fresh: Vec<i32>,
    // flooding only
    edge_old: Vec<i32>,
    edge_new: Vec<i32>,
    delta: Vec<i32>,
    hard: Vec<u8>,
}

impl<'a> Decoder<'a> {
    pub fn new(code: &'a LiftedCode, cfg: DecoderConfig) -> Result<Self> {
        cfg.validate()?;
        let max_dc = (0..code.n_checks())
            .map(|c| code.check_degree(c))
            .max()
            .unwrap_or(0);
        if (0..code.n_checks()).any(|c| code.check_degree(c) < 2) {
            return Err(Error::InvalidParameter("every check needs degree >= 2".into()));
        }
        let flooding = cfg.schedule == Schedule::Flooding;
        let fl = |n: usize| if flooding { vec![0; n] } else { Vec::new() };
        Ok(Decoder {
            code,
            cfg,
            posterior: vec![0; code.n_vars()],
            gamma: vec![0; code.n_edges()],
            ext: vec![0; max_dc],
            old_read: vec![0; max_dc],
            fresh: vec![0; max_dc],
            edge_old: fl(code.n_edges()),
            edge_new: fl(code.n_edges()),
            delta: fl(code.n_vars()),
            hard: vec![0; code.n_vars()],
        })
    }

    pub fn config(&self) -> &DecoderConfig {
        &self.cfg
    }

    /// Current posteriors (after the last [`Decoder::decode`] call).
    pub fn posteriors(&self) -> &[i32] {
        &self.posterior
    }

    /// Bits written to memory by one full iteration of the row-layered
    /// schedule.
    pub fn bits_per_iteration(&self) -> u64 {
        let q = u64::from(self.cfg.quant.q);
        let qs = u64::from(self.cfg.quant.guard_bits);
        (0..self.code.n_checks())
            .map(|c| {
                let dc = self.code.check_degree(c) as u64;
                dc * (q + qs) + 2 * (q - 1) + dc
            })
            .sum()
    }

    /// Decodes the channel outputs `y` (all-zero codeword sent as `+1`).
    pub fn decode(
        &mut self,
        y: &[f64],
        sigma2: f64,
        faults: &mut FaultStreams,
    ) -> Result<DecodeResult> {
        self.decode_with(y, sigma2, faults, false)
    }

    /// Like [`Decoder::decode`] but always runs `max_iters` iterations.
    pub fn decode_fixed_iterations(
        &mut self,
        y: &[f64],
        sigma2: f64,
        faults: &mut FaultStreams,
    ) -> Result<DecodeResult> {
        self.decode_with(y, sigma2, faults, true)
    }

    fn decode_with(
        &mut self,
        y: &[f64],
        sigma2: f64,
        faults: &mut FaultStreams,
        forced: bool,
    ) -> Result<DecodeResult> {
        if y.len() != self.code.n_vars() {
            return Err(Error::DimensionMismatch {
                expected: self.code.n_vars(),
                got: y.len(),
            });
        }
        if !(sigma2 > 0.0) {
            return Err(Error::InvalidParameter("noise variance must be positive".into()));
        }
        let q_max = self.cfg.quant.max_msg();
        let scale = 2.0 * self.cfg.alpha / sigma2;
        for (b, &yi) in self.posterior.iter_mut().zip(y) {
            *b = quantize_to(scale * yi, q_max);
        }
        self.gamma.iter_mut().for_each(|g| *g = 0);

        let mut bits_written = 0u64;
        let mut iterations = 0;
        let mut converged = false;
        for _ in 0..self.cfg.max_iters {
            iterations += 1;
            bits_written += match self.cfg.schedule {
                Schedule::RowLayered => self.layered_iteration(faults),
                Schedule::Flooding => self.flooding_iteration(faults),
            };
            for (h, &b) in self.hard.iter_mut().zip(&self.posterior) {
                *h = u8::from(b < 0);
            }
            converged = self.code.syndrome_is_zero(&self.hard);
            if converged && !forced {
                break;
            }
        }
        let bit_errors = self.hard.iter().filter(|&&b| b == 1).count();
        Ok(DecodeResult {
            hard_bits: self.hard.clone(),
            converged,
            iterations,
            bit_errors,
            bits_written,
        })
    }

    #[inline]
    fn store_posterior(&self, v: i64) -> i32 {
        let p_max = self.cfg.quant.max_posterior() as i64;
        debug_assert!(
            self.cfg.faults_active() || v.abs() <= p_max,
            "posterior overflow: {v}"
        );
        v.clamp(-p_max, p_max) as i32
    }

    fn layered_iteration(&mut self, faults: &mut FaultStreams) -> u64 {
        let q = self.cfg.quant.q;
        let w_post = self.cfg.quant.posterior_bits();
        let q_max = self.cfg.quant.max_msg();
        let lambda = self.cfg.lambda as i32;
        let model = if self.cfg.faults_active() {
            self.cfg.fault_model
        } else {
            FaultModel::None
        };
        let mut bits = 0u64;
        for c in 0..self.code.n_checks() {
            let edges = self.code.check_edges(c);
            let dc = edges.len();
            for (k, e) in edges.clone().enumerate() {
                let v = self.code.edge_var(e);
                let (b, g) = match model {
                    FaultModel::Hardware => (
                        faults.vn.read(self.posterior[v], w_post),
                        faults.cn.read(self.gamma[e], q),
                    ),
                    _ => (self.posterior[v], self.gamma[e]),
                };
                self.old_read[k] = g;
                self.ext[k] = (b - g).clamp(-q_max, q_max);
            }
            min_sum(&self.ext[..dc], lambda, &mut self.fresh[..dc]);
            for (k, e) in edges.enumerate() {
                let v = self.code.edge_var(e);
                let new = match model {
                    FaultModel::Simplified => faults.cn.read(self.fresh[k], q),
                    _ => self.fresh[k],
                };
                let updated = self.posterior[v] as i64 + new as i64 - self.old_read[k] as i64;
                self.posterior[v] = self.store_posterior(updated);
                self.gamma[e] = new;
            }
            bits += dc as u64 * u64::from(w_post) + 2 * u64::from(q - 1) + dc as u64;
        }
        bits
    }

    fn flooding_iteration(&mut self, faults: &mut FaultStreams) -> u64 {
        let q = self.cfg.quant.q;
        let w_post = self.cfg.quant.posterior_bits();
        let q_max = self.cfg.quant.max_msg();
        let lambda = self.cfg.lambda as i32;
        let model = if self.cfg.faults_active() {
            self.cfg.fault_model
        } else {
            FaultModel::None
        };
        let mut bits = 0u64;
        for c in 0..self.code.n_checks() {
            let edges = self.code.check_edges(c);
            let dc = edges.len();
            let base = edges.start;
            for (k, e) in edges.clone().enumerate() {
                let v = self.code.edge_var(e);
                let (b, g) = match model {
                    FaultModel::Hardware => (
                        faults.vn.read(self.posterior[v], w_post),
                        faults.cn.read(self.gamma[e], q),
                    ),
                    _ => (self.posterior[v], self.gamma[e]),
                };
                self.edge_old[e] = g;
                self.ext[k] = (b - g).clamp(-q_max, q_max);
            }
            min_sum(&self.ext[..dc], lambda, &mut self.edge_new[base..base + dc]);
            bits += 2 * u64::from(q - 1) + dc as u64;
        }
        self.delta.iter_mut().for_each(|d| *d = 0);
        for e in 0..self.code.n_edges() {
            let v = self.code.edge_var(e);
            let new = match model {
                FaultModel::Simplified => faults.cn.read(self.edge_new[e], q),
                _ => self.edge_new[e],
            };
            self.delta[v] += new - self.edge_old[e];
            self.gamma[e] = new;
        }
        for v in 0..self.code.n_vars() {
            let updated = self.posterior[v] as i64 + self.delta[v] as i64;
            self.posterior[v] = self.store_posterior(updated);
        }
        bits + self.code.n_vars() as u64 * u64::from(w_post)
    }
}

/// One-shot decode with a fresh decoder.
pub fn decode(
    y: &[f64],
    sigma2: f64,
    code: &LiftedCode,
    cfg: &DecoderConfig,
    faults: &mut FaultStreams,
) -> Result<DecodeResult> {
    Decoder::new(code, *cfg)?.decode(y, sigma2, faults)
}

/// One-shot decode with the simplified fault model, other settings as in
/// `cfg`.
pub fn decode_simplified(
    y: &[f64],
    sigma2: f64,
    code: &LiftedCode,
    cfg: &DecoderConfig,
    faults: &mut FaultStreams,
) -> Result<DecodeResult> {
    let cfg = DecoderConfig {
        fault_model: FaultModel::Simplified,
        ..*cfg
    };
    Decoder::new(code, cfg)?.decode(y, sigma2, faults)
}
