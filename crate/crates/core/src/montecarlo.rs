//! Monte-Carlo BER/FER and iteration-count estimation of the bit-true
//! decoder on a lifted code.
//!
//! Frame `f` draws its channel noise from stream `(seed, f, CHANNEL_NOISE)`
//! and its memory faults from the per-memory streams of the same frame, so
//! results depend only on the seed, never on the thread count.

use std::time::Instant;

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::db_to_linear;
use crate::decoder::{memory, stream_rng, Decoder, DecoderConfig, FaultStreams};
use crate::error::{Error, Result};
use crate::protograph::LiftedCode;

/// Frames decoded between two checks of the stopping rule.
pub const BATCH_FRAMES: u64 = 64;

/// When to stop simulating one SNR point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StopRule {
    pub min_frame_errors: u64,
    pub max_frames: u64,
}

impl Default for StopRule {
    fn default() -> Self {
        StopRule {
            min_frame_errors: 100,
            max_frames: 10_000_000,
        }
    }
}

/// Counts gathered at one SNR.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McPoint {
    pub snr_db: f64,
    pub frames: u64,
    pub frame_errors: u64,
    pub bit_errors: u64,
    /// Code bits simulated (`frames × N`).
    pub bits: u64,
    /// Layered iterations summed over frames.
    pub iterations: u64,
    pub bits_written: u64,
    pub wall_time_s: f64,
}

impl McPoint {
    pub fn ber(&self) -> f64 {
        ratio(self.bit_errors, self.bits)
    }

    pub fn fer(&self) -> f64 {
        ratio(self.frame_errors, self.frames)
    }

    pub fn avg_iterations(&self) -> f64 {
        ratio(self.iterations, self.frames)
    }

    /// Bits written per frame.
    pub fn avg_bits_written(&self) -> f64 {
        ratio(self.bits_written, self.frames)
    }
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Channel outputs of frame `frame`: BPSK `+1` plus Gaussian noise of
/// variance `sigma2`.
pub fn channel_frame(n: usize, sigma2: f64, seed: u64, frame: u64) -> Vec<f64> {
    let mut rng = stream_rng(seed, frame, memory::CHANNEL_NOISE);
    let sigma = sigma2.sqrt();
    (0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            1.0 + sigma * z
        })
        .collect()
}

/// Simulates frames at `snr_db` until the stopping rule fires.
pub fn simulate(code: &LiftedCode, cfg: &DecoderConfig, snr_db: f64, seed: u64, stop: StopRule) -> Result<McPoint> {
    cfg.validate()?;
    if !snr_db.is_finite() {
        return Err(Error::InvalidParameter(format!("SNR {snr_db}")));
    }
    let sigma2 = 1.0 / db_to_linear(snr_db);
    let start = Instant::now();
    let mut acc = McPoint {
        snr_db,
        frames: 0,
        frame_errors: 0,
        bit_errors: 0,
        bits: 0,
        iterations: 0,
        bits_written: 0,
        wall_time_s: 0.0,
    };
    let n = code.n_vars();
    while acc.frames < stop.max_frames && acc.frame_errors < stop.min_frame_errors {
        let first = acc.frames;
        let count = BATCH_FRAMES.min(stop.max_frames - first);
        let batch = (first..first + count)
            .into_par_iter()
            .map_init(
                || Decoder::new(code, *cfg),
                |dec, f| -> Result<(u64, u64, u64, u64)> {
                    let dec = dec.as_mut().map_err(|e| Error::InvalidParameter(e.to_string()))?;
                    let y = channel_frame(n, sigma2, seed, f);
                    let mut faults = FaultStreams::new(cfg.epsilon, seed, f);
                    let r = dec.decode(&y, sigma2, &mut faults)?;
                    Ok((
                        u64::from(r.bit_errors > 0),
                        r.bit_errors as u64,
                        r.iterations as u64,
                        r.bits_written,
                    ))
                },
            )
            .collect::<Result<Vec<_>>>()?;
        for (fe, be, it, bw) in batch {
            acc.frame_errors += fe;
            acc.bit_errors += be;
            acc.iterations += it;
            acc.bits_written += bw;
        }
        acc.frames += count;
        acc.bits += count * n as u64;
    }
    acc.wall_time_s = start.elapsed().as_secs_f64();
    Ok(acc)
}

/// SNR (dB) at which `curve` (pairs of SNR and error rate, any order)
/// first falls to `level`, interpolating linearly in `log10` of the rate.
pub fn crossing_snr(curve: &[(f64, f64)], level: f64) -> Option<f64> {
    let mut pts: Vec<(f64, f64)> = curve.iter().copied().filter(|p| p.0.is_finite()).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    if pts.first()?.1 <= level {
        return None;
    }
    for w in pts.windows(2) {
        let ((s0, v0), (s1, v1)) = (w[0], w[1]);
        if v0 > level && v1 <= level {
            if v1 <= 0.0 {
                return Some(s1);
            }
            let (l0, l1, lt) = (v0.log10(), v1.log10(), level.log10());
            return Some(s0 + (s1 - s0) * (l0 - lt) / (l0 - l1));
        }
    }
    None
}
