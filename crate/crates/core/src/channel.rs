//! BPSK/AWGN channel, scaled LLRs and the saturating message quantizer.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special;

/// Channel operating point: SNR `xi = 1/sigma^2` and the LLR scale `alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    pub snr_db: f64,
    pub sigma2: f64,
    pub alpha: f64,
}

impl ChannelParams {
    pub fn new(snr_db: f64, alpha: f64) -> Self {
        ChannelParams {
            snr_db,
            sigma2: 10f64.powf(-snr_db / 10.0),
            alpha,
        }
    }

    /// From a linear SNR; `0` maps to `-inf` dB and infinite noise variance.
    pub fn from_linear(snr: f64, alpha: f64) -> Self {
        ChannelParams {
            snr_db: 10.0 * snr.log10(),
            sigma2: 1.0 / snr,
            alpha,
        }
    }

    pub fn snr_linear(&self) -> f64 {
        1.0 / self.sigma2
    }

    /// LLR scale factor `2 alpha / sigma^2`.
    pub fn llr_scale(&self) -> f64 {
        2.0 * self.alpha / self.sigma2
    }
}

/// Message and posterior widths.
///
/// Exchanged messages use `q` bits in sign-magnitude and take values in
/// `{-Q, .., Q}` with `Q = 2^(q-1) - 1`. Posteriors carry `guard_bits` extra
/// bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuantSpec {
    pub q: u32,
    pub guard_bits: u32,
}

impl QuantSpec {
    pub const MIN_BITS: u32 = 2;
    pub const MAX_BITS: u32 = 8;

    pub fn new(q: u32, guard_bits: u32) -> Result<Self> {
        if !(Self::MIN_BITS..=Self::MAX_BITS).contains(&q) {
            return Err(Error::InvalidParameter(format!(
                "q = {q} outside [{}, {}]",
                Self::MIN_BITS,
                Self::MAX_BITS
            )));
        }
        if q + guard_bits > 24 {
            return Err(Error::InvalidParameter("posterior width too large".into()));
        }
        Ok(QuantSpec { q, guard_bits })
    }

    /// Saturation magnitude `Q` of exchanged messages.
    pub fn max_msg(&self) -> i32 {
        (1 << (self.q - 1)) - 1
    }

    /// Saturation magnitude of posteriors, `2^(q + q_s - 1) - 1`.
    pub fn max_posterior(&self) -> i32 {
        (1 << (self.q + self.guard_bits - 1)) - 1
    }

    pub fn posterior_bits(&self) -> u32 {
        self.q + self.guard_bits
    }
}

/// Round-half-up magnitude quantizer with saturation at `max`; `sign(0) = +1`.
pub fn quantize_to(x: f64, max: i32) -> i32 {
    let mag = (x.abs() + 0.5).floor();
    let mag = if mag >= max as f64 { max } else { mag as i32 };
    if x >= 0.0 {
        mag
    } else {
        -mag
    }
}

pub fn quantize(x: f64, spec: &QuantSpec) -> i32 {
    quantize_to(x, spec.max_msg())
}

/// Scaled channel LLR `2 alpha y / sigma^2`.
pub fn llr(y: f64, ch: &ChannelParams) -> f64 {
    ch.llr_scale() * y
}

/// Probability mass function over a contiguous integer range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantizedPmf {
    min: i32,
    probs: Vec<f64>,
}

impl QuantizedPmf {
    pub fn new(min: i32, probs: Vec<f64>) -> Self {
        assert!(!probs.is_empty());
        QuantizedPmf { min, probs }
    }

    /// Symmetric support `{-max, .., max}`.
    pub fn symmetric(max: i32, probs: Vec<f64>) -> Self {
        assert_eq!(probs.len(), (2 * max + 1) as usize);
        QuantizedPmf { min: -max, probs }
    }

    pub fn point(max: i32, value: i32) -> Self {
        let mut probs = vec![0.0; (2 * max + 1) as usize];
        probs[(value + max) as usize] = 1.0;
        QuantizedPmf { min: -max, probs }
    }

    pub fn min_value(&self) -> i32 {
        self.min
    }

    pub fn max_value(&self) -> i32 {
        self.min + self.probs.len() as i32 - 1
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn probs_mut(&mut self) -> &mut [f64] {
        &mut self.probs
    }

    pub fn into_probs(self) -> Vec<f64> {
        self.probs
    }

    pub fn prob(&self, v: i32) -> f64 {
        if v < self.min || v > self.max_value() {
            0.0
        } else {
            self.probs[(v - self.min) as usize]
        }
    }

    pub fn values(&self) -> impl Iterator<Item = i32> + '_ {
        (0..self.probs.len()).map(move |k| self.min + k as i32)
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.values().zip(&self.probs).map(|(v, p)| v as f64 * p).sum()
    }

    /// `P(X < 0) + P(X = 0) / 2`.
    pub fn error_prob(&self) -> f64 {
        let mut neg = 0.0;
        for (v, &p) in self.values().zip(&self.probs) {
            if v < 0 {
                neg += p;
            } else {
                break;
            }
        }
        neg + 0.5 * self.prob(0)
    }

    /// Clips the support to `{-max, .., max}`, piling clipped mass on the
    /// end points.
    pub fn saturate(&self, max: i32) -> QuantizedPmf {
        let mut out = vec![0.0; (2 * max + 1) as usize];
        for (v, &p) in self.values().zip(&self.probs) {
            let c = v.clamp(-max, max);
            out[(c + max) as usize] += p;
        }
        QuantizedPmf { min: -max, probs: out }
    }

    /// Clamps tiny negative masses produced by floating-point cancellation
    /// and rescales to unit total. Returns the largest clamped magnitude.
    pub fn renormalize(&mut self) -> f64 {
        let mut worst = 0.0f64;
        for p in self.probs.iter_mut() {
            if *p < 0.0 {
                worst = worst.max(-*p);
                *p = 0.0;
            }
        }
        let total: f64 = self.probs.iter().sum();
        if total > 0.0 {
            for p in self.probs.iter_mut() {
                *p /= total;
            }
        }
        worst
    }
}

/// Exact pmf of `quantize(llr(y))` for `y ~ N(1, sigma^2)`.
///
/// Value `k` with `0 < |k| < Q` collects LLRs in a unit-width bin around `k`,
/// `0` collects `(-1/2, 1/2)` and `+-Q` absorb the tails.
pub fn channel_pmf(ch: &ChannelParams, spec: &QuantSpec) -> Result<QuantizedPmf> {
    if !(ch.sigma2 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "noise variance must be positive, got {}",
            ch.sigma2
        )));
    }
    if !(ch.alpha >= 0.0) {
        return Err(Error::InvalidParameter(format!("alpha must be >= 0, got {}", ch.alpha)));
    }
    let max = spec.max_msg();
    let scale = ch.llr_scale();
    if scale == 0.0 {
        return Ok(QuantizedPmf::point(max, 0));
    }
    let sigma = ch.sigma2.sqrt();
    // z-score of the channel output y at LLR value t
    let z = |t: f64| -> f64 {
        if t.is_infinite() {
            t
        } else {
            (t / scale - 1.0) / sigma
        }
    };
    let mut probs = Vec::with_capacity((2 * max + 1) as usize);
    for k in -max..=max {
        let lo = if k == -max { f64::NEG_INFINITY } else { k as f64 - 0.5 };
        let hi = if k == max { f64::INFINITY } else { k as f64 + 0.5 };
        probs.push(special::normal_interval(z(lo), z(hi)));
    }
    let mut pmf = QuantizedPmf::symmetric(max, probs);
    pmf.renormalize();
    Ok(pmf)
}

/// Hard-decision crossover probability `1/2 - erf(sqrt(xi/2))/2` for an SNR
/// given in dB.
pub fn p0_of_snr(snr_db: f64) -> f64 {
    let xi = 10f64.powf(snr_db / 10.0);
    0.5 * special::erfc((xi / 2.0).sqrt())
}

/// Linear SNR whose crossover probability is `x`: `2 erfinv(1 - 2x)^2`.
pub fn snr_of_p0(x: f64) -> Result<f64> {
    if !(x > 0.0 && x < 0.5) {
        return Err(Error::InvalidParameter(format!(
            "crossover probability {x} outside (0, 1/2)"
        )));
    }
    let r = special::erfc_inv(2.0 * x);
    Ok(2.0 * r * r)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(lin: f64) -> f64 {
    10.0 * lin.log10()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spec(q: u32) -> QuantSpec {
        QuantSpec::new(q, 3).unwrap()
    }

    #[test]
    fn quantizer_examples() {
        assert_eq!(quantize(3.4, &spec(5)), 3);
        assert_eq!(quantize(-17.2, &spec(4)), -7);
        for q in 2..=8 {
            assert_eq!(quantize(0.49, &spec(q)), 0);
            assert_eq!(quantize(0.5, &spec(q)), 1);
            assert_eq!(quantize(0.0, &spec(q)), 0);
        }
        assert_eq!(quantize(-0.5, &spec(5)), -1);
        assert_eq!(quantize(-0.49, &spec(5)), 0);
    }

    #[test]
    fn quant_spec_bounds() {
        assert!(QuantSpec::new(1, 3).is_err());
        assert!(QuantSpec::new(9, 3).is_err());
        let s = QuantSpec::new(5, 3).unwrap();
        assert_eq!(s.max_msg(), 15);
        assert_eq!(s.max_posterior(), 127);
    }

    #[test]
    fn llr_examples() {
        let ch = ChannelParams { snr_db: 0.0, sigma2: 1.0, alpha: 1.0 };
        assert_eq!(llr(1.0, &ch), 2.0);
        assert_eq!(llr(0.0, &ch), 0.0);
        let ch = ChannelParams { snr_db: 0.0, sigma2: 0.716, alpha: 0.6 };
        assert!((llr(-0.5, &ch) + 0.838).abs() < 1e-3);
    }

    #[test]
    fn sigma2_from_db() {
        let ch = ChannelParams::new(1.45, 1.0);
        assert_eq!(ch.sigma2, 10f64.powf(-0.145));
    }

    #[test]
    fn channel_pmf_limits() {
        let s = spec(5);
        let pmf = channel_pmf(&ChannelParams::new(1.45, 1e-9), &s).unwrap();
        assert!((pmf.prob(0) - 1.0).abs() < 1e-12);
        let pmf = channel_pmf(&ChannelParams::new(1.45, 0.0), &s).unwrap();
        assert_eq!(pmf.prob(0), 1.0);
        let pmf = channel_pmf(&ChannelParams::new(60.0, 1.0), &s).unwrap();
        assert!((pmf.prob(15) - 1.0).abs() < 1e-12);
        let pmf = channel_pmf(&ChannelParams::from_linear(0.0, 1.0), &s).unwrap();
        assert_eq!(pmf.prob(0), 1.0);
        assert!(channel_pmf(&ChannelParams { snr_db: 0.0, sigma2: 0.0, alpha: 1.0 }, &s).is_err());
    }

    #[test]
    fn channel_pmf_normalized() {
        let pmf = channel_pmf(&ChannelParams::new(1.45, 1.0), &spec(5)).unwrap();
        assert!((pmf.total() - 1.0).abs() < 1e-12);
        assert!(pmf.probs().iter().all(|&p| p >= 0.0));
    }

    #[test]
    fn channel_pmf_matches_sampling_free_oracle() {
        // direct CDF of y at the bin edges, without the tail-aware helper
        let ch = ChannelParams::new(2.0, 0.8);
        let s = spec(4);
        let pmf = channel_pmf(&ch, &s).unwrap();
        let sigma = ch.sigma2.sqrt();
        let cdf = |t: f64| 0.5 * (1.0 + special::erf((t / ch.llr_scale() - 1.0) / sigma / 2f64.sqrt()));
        for k in -6..=6 {
            let expect = cdf(k as f64 + 0.5) - cdf(k as f64 - 0.5);
            assert!((pmf.prob(k) - expect).abs() < 1e-14, "k = {k}");
        }
        assert!((pmf.prob(7) - (1.0 - cdf(6.5))).abs() < 1e-14);
    }

    #[test]
    fn p0_values() {
        assert!((p0_of_snr(1.45) - 0.1188).abs() < 2e-4);
        assert!(p0_of_snr(80.0) < 1e-300);
        assert_eq!(p0_of_snr(f64::NEG_INFINITY), 0.5);
    }

    #[test]
    fn snr_of_p0_inverts() {
        for &db in &[0.5, 1.45, 3.0] {
            let lin = snr_of_p0(p0_of_snr(db)).unwrap();
            let expect = db_to_linear(db);
            assert!(((lin - expect) / expect).abs() < 1e-9, "db = {db}");
        }
        assert!(snr_of_p0(0.5 - 1e-12).unwrap() < 1e-20);
        assert!((snr_of_p0(0.1188).unwrap() - 1.396).abs() < 2e-3);
        assert!(snr_of_p0(0.0).is_err());
        assert!(snr_of_p0(0.5).is_err());
    }

    #[test]
    fn saturate_and_error_prob() {
        let pmf = QuantizedPmf::new(-3, vec![0.1, 0.1, 0.1, 0.2, 0.2, 0.2, 0.1]);
        let s = pmf.saturate(1);
        assert_eq!(s.probs(), &[0.30000000000000004, 0.2, 0.5]);
        assert!((pmf.error_prob() - 0.4).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn quantizer_is_odd_and_bounded(x in -300.0f64..300.0, q in 2u32..=8) {
            let s = spec(q);
            let frac = (x.abs() + 0.5).fract();
            prop_assume!(x != 0.0 && frac != 0.0);
            prop_assert_eq!(quantize(-x, &s), -quantize(x, &s));
            prop_assert!(quantize(x, &s).abs() <= s.max_msg());
        }

        #[test]
        fn channel_pmf_positive_mean(db in -5.0f64..8.0, alpha in 0.05f64..3.0, q in 2u32..=8) {
            let pmf = channel_pmf(&ChannelParams::new(db, alpha), &spec(q)).unwrap();
            prop_assert!((pmf.total() - 1.0).abs() < 1e-12);
            prop_assert!(pmf.mean() >= 0.0);
        }
    }
}
