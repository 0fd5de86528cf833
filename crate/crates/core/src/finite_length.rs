//! Finite-length error probability and expected iteration count obtained by
//! averaging infinite-length DE traces over the Gaussian law of the empirical
//! channel crossover probability.
//!
//! DE traces use flooding iterations; layered iteration `l` reads flooding
//! index `2 l`.

use std::num::NonZeroUsize;
use std::sync::Arc;

use gauss_quad::legendre::GaussLegendre;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cache::{DeCache, KeyBuilder};
use crate::channel::{linear_to_db, p0_of_snr, snr_of_p0};
use crate::density_evolution::{DeEngine, DeParams, DeTrace};
use crate::error::{Error, Result};
use crate::protograph::Protograph;
use crate::special::normal_pdf;

/// Default number of quadrature nodes.
pub const DEFAULT_NODES: usize = 64;
/// Default truncation of the Gaussian, in standard deviations.
pub const DEFAULT_K_SIGMA: f64 = 6.0;
/// Nodes are kept this far inside `(0, 1/2)`.
pub const EDGE_MARGIN: f64 = 1e-9;
/// Default number of nodes per panel of a composite grid.
pub const DEFAULT_PANEL_NODES: usize = 8;

/// Quadrature for `E[f(X)]`, `X ~ N(p0, p0 (1 - p0) / N)` restricted to
/// `(0, 1/2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegrationGrid {
    pub snr_db: f64,
    pub n: u64,
    pub p0: f64,
    pub sigma: f64,
    pub k_sigma: f64,
    /// Crossover probabilities.
    pub nodes: Vec<f64>,
    /// Quadrature weights times the Gaussian density.
    pub weights: Vec<f64>,
    /// Equivalent SNR of each node, in dB.
    pub node_snr_db: Vec<f64>,
}

impl IntegrationGrid {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Gauss-Legendre grid of `g` nodes on `p0 +- k_sigma s` clipped to
/// `(0, 1/2)`, with `s = sqrt(p0 (1 - p0) / n)`.
pub fn build_grid(snr_db: f64, n: u64, g: usize, k_sigma: f64) -> Result<IntegrationGrid> {
    if g < 8 {
        return Err(Error::InvalidParameter(format!("need at least 8 nodes, got {g}")));
    }
    grid_impl(snr_db, n, g, k_sigma, None)
}

/// Composite Gauss-Legendre grid: the interval of [`build_grid`] is split
/// at every breakpoint (given as SNRs in dB) that falls inside it and into
/// panels no wider than one standard deviation; each panel receives `g`
/// nodes.
pub fn build_panel_grid(snr_db: f64, n: u64, g: usize, k_sigma: f64, breaks_db: &[f64]) -> Result<IntegrationGrid> {
    grid_impl(snr_db, n, g, k_sigma, Some(breaks_db))
}

fn grid_impl(snr_db: f64, n: u64, g: usize, k_sigma: f64, breaks_db: Option<&[f64]>) -> Result<IntegrationGrid> {
    if n == 0 {
        return Err(Error::InvalidParameter("code length must be >= 1".into()));
    }
    if g < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 nodes per panel, got {g}")));
    }
    if !(k_sigma > 0.0) {
        return Err(Error::InvalidParameter(format!("k_sigma = {k_sigma}")));
    }
    let p0 = p0_of_snr(snr_db);
    let sigma = (p0 * (1.0 - p0) / n as f64).sqrt();
    let lo = (p0 - k_sigma * sigma).max(EDGE_MARGIN);
    let hi = (p0 + k_sigma * sigma).min(0.5 - EDGE_MARGIN);
    let (nodes, weights): (Vec<f64>, Vec<f64>) = if !(lo < hi) || sigma == 0.0 {
        (vec![p0], vec![1.0])
    } else {
        let composite = breaks_db.is_some();
        let mut cuts: Vec<f64> = breaks_db
            .unwrap_or(&[])
            .iter()
            .map(|&s| p0_of_snr(s))
            .filter(|&x| x > lo && x < hi)
            .collect();
        cuts.push(lo);
        cuts.push(hi);
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        // panels wider than one standard deviation are split evenly
        let cuts: Vec<f64> = cuts
            .windows(2)
            .flat_map(|w| {
                let k = if composite {
                    ((w[1] - w[0]) / sigma).ceil().max(1.0) as usize
                } else {
                    1
                };
                (0..k).map(move |j| w[0] + (w[1] - w[0]) * j as f64 / k as f64)
            })
            .chain(std::iter::once(hi))
            .collect();
        let rule = GaussLegendre::new(NonZeroUsize::new(g).unwrap());
        cuts.windows(2)
            .flat_map(|w| {
                let half = 0.5 * (w[1] - w[0]);
                let mid = 0.5 * (w[1] + w[0]);
                rule.as_node_weight_pairs()
                    .iter()
                    .map(move |&(t, wt)| {
                        let x = mid + half * t;
                        (x, wt * half * normal_pdf((x - p0) / sigma) / sigma)
                    })
                    .collect::<Vec<_>>()
            })
            .unzip()
    };
    let node_snr_db = nodes
        .iter()
        .map(|&x| {
            if x > 0.0 && x < 0.5 {
                snr_of_p0(x).map(linear_to_db)
            } else {
                Ok(snr_db)
            }
        })
        .collect::<Result<_>>()?;
    Ok(IntegrationGrid {
        snr_db,
        n,
        p0,
        sigma,
        k_sigma,
        nodes,
        weights,
        node_snr_db,
    })
}

/// Provides flooding DE traces (`p_e` per iteration) at arbitrary SNRs.
pub trait TraceSource: Sync {
    fn traces(&self, snr_db: &[f64]) -> Result<Vec<Arc<Vec<f64>>>>;

    /// SNRs (dB) where the traces may be non-smooth; composite grids put
    /// panel boundaries there.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }
}

/// Traces from a closure, mainly for tests and synthetic studies.
pub struct FnTraces<F>(pub F);

impl<F> TraceSource for FnTraces<F>
where
    F: Fn(f64) -> Vec<f64> + Sync,
{
    fn traces(&self, snr_db: &[f64]) -> Result<Vec<Arc<Vec<f64>>>> {
        Ok(snr_db.iter().map(|&s| Arc::new((self.0)(s))).collect())
    }
}

/// Runs density evolution at every requested SNR (through a cache).
pub struct DirectTraces<'a> {
    pub protograph: &'a Protograph,
    pub params: DeParams,
    pub l_flood: usize,
    pub cache: &'a DeCache,
}

impl TraceSource for DirectTraces<'_> {
    fn traces(&self, snr_db: &[f64]) -> Result<Vec<Arc<Vec<f64>>>> {
        snr_db
            .par_iter()
            .map(|&s| {
                let t = self.cache.trace(self.protograph, self.params, s, self.l_flood)?;
                Ok(Arc::new(t.p_e.clone()))
            })
            .collect()
    }
}

/// Lattice of SNR points on which a [`SnrProfile`] is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub lo_db: f64,
    pub hi_db: f64,
    /// Spacing of the initial uniform lattice.
    pub coarse_step_db: f64,
    /// Intervals narrower than this are never split.
    pub min_step_db: f64,
    /// Split an interval when some iteration's `ln p_e` changes by more
    /// than this across it.
    pub log_tol: f64,
    /// Split two neighbouring intervals when the slope of some iteration's
    /// `ln p_e` changes by more than this (per interval width).
    pub curvature_tol: f64,
}

impl LatticeSpec {
    /// Lattice covering every integration grid at `snr_db` for lengths
    /// `>= n_min`.
    pub fn covering(snr_db: f64, n_min: u64, k_sigma: f64) -> Result<Self> {
        let p0 = p0_of_snr(snr_db);
        let s = (p0 * (1.0 - p0) / n_min.max(1) as f64).sqrt();
        let hi_x = (p0 + k_sigma * s).min(0.5 - EDGE_MARGIN);
        let lo_x = (p0 - k_sigma * s).max(EDGE_MARGIN);
        let lo_db = linear_to_db(snr_of_p0(hi_x)?);
        let hi_db = linear_to_db(snr_of_p0(lo_x)?);
        Ok(LatticeSpec {
            lo_db: lo_db - 0.01,
            hi_db: hi_db + 0.01,
            coarse_step_db: 0.2,
            min_step_db: 0.01,
            log_tol: 1.0,
            curvature_tol: 0.1,
        })
    }

    fn key(&self, kb: KeyBuilder) -> KeyBuilder {
        kb.float("lo", self.lo_db)
            .float("hi", self.hi_db)
            .float("coarse", self.coarse_step_db)
            .float("min", self.min_step_db)
            .float("tol", self.log_tol)
            .float("curv", self.curvature_tol)
    }
}

/// Floor applied before taking logarithms of error probabilities.
const LOG_FLOOR: f64 = 1e-300;
/// Differences below this level do not trigger lattice refinement.
const REFINE_FLOOR: f64 = 1e-15;

/// DE traces on an SNR lattice, interpolated monotonically (PCHIP) in
/// `ln p_e` for each iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "ProfileData", into = "ProfileData")]
pub struct SnrProfile {
    pub params: DeParams,
    pub l_flood: usize,
    pub snr_db: Vec<f64>,
    /// `ln p_e` per lattice point, per flooding iteration.
    log_pe: Vec<Vec<f64>>,
    slopes: Vec<Vec<f64>>,
}

/// Stored form of [`SnrProfile`]; slopes are rebuilt on load.
#[derive(Serialize, Deserialize)]
struct ProfileData {
    params: DeParams,
    l_flood: usize,
    snr_db: Vec<f64>,
    log_pe: Vec<Vec<f64>>,
}

impl From<ProfileData> for SnrProfile {
    fn from(d: ProfileData) -> Self {
        let mut p = SnrProfile {
            params: d.params,
            l_flood: d.l_flood,
            snr_db: d.snr_db,
            log_pe: d.log_pe,
            slopes: Vec::new(),
        };
        p.prepare();
        p
    }
}

impl From<SnrProfile> for ProfileData {
    fn from(p: SnrProfile) -> Self {
        ProfileData {
            params: p.params,
            l_flood: p.l_flood,
            snr_db: p.snr_db,
            log_pe: p.log_pe,
        }
    }
}

impl SnrProfile {
    /// Builds the lattice by evaluating `eval` on a uniform grid and then
    /// bisecting intervals where the traces change fast.
    pub fn build<F>(params: DeParams, l_flood: usize, lattice: &LatticeSpec, mut eval: F) -> Result<Self>
    where
        F: FnMut(f64) -> Result<DeTrace>,
    {
        if !(lattice.lo_db < lattice.hi_db) || !(lattice.coarse_step_db > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "empty SNR lattice [{}, {}]",
                lattice.lo_db, lattice.hi_db
            )));
        }
        let steps = ((lattice.hi_db - lattice.lo_db) / lattice.coarse_step_db).ceil().max(1.0) as usize;
        let mut points: Vec<(f64, Vec<f64>)> = Vec::new();
        let mut add = |s: f64, points: &mut Vec<(f64, Vec<f64>)>| -> Result<()> {
            let t = eval(s)?;
            if t.p_e.len() != l_flood + 1 {
                return Err(Error::MissingTrace(format!(
                    "trace at {s} dB has {} iterations, expected {}",
                    t.p_e.len() - 1,
                    l_flood
                )));
            }
            points.push((s, t.p_e));
            Ok(())
        };
        for k in 0..=steps {
            let s = lattice.lo_db + (lattice.hi_db - lattice.lo_db) * k as f64 / steps as f64;
            add(s, &mut points)?;
        }
        let splittable = |a: f64, b: f64| b - a > 2.0 * lattice.min_step_db * (1.0 - 1e-9);
        let log = |x: f64| x.max(REFINE_FLOOR).ln();
        loop {
            let n = points.len();
            let mut split = vec![false; n - 1];
            for k in 0..n - 1 {
                let (a, b) = (&points[k], &points[k + 1]);
                let jump = a
                    .1
                    .iter()
                    .zip(&b.1)
                    .map(|(x, y)| (log(*x) - log(*y)).abs())
                    .fold(0.0, f64::max);
                split[k] |= jump > lattice.log_tol;
            }
            for k in 1..n - 1 {
                let (a, b, c) = (&points[k - 1], &points[k], &points[k + 1]);
                let (h1, h2) = (b.0 - a.0, c.0 - b.0);
                let bend = (0..=l_flood)
                    .map(|l| {
                        let m1 = (log(b.1[l]) - log(a.1[l])) / h1;
                        let m2 = (log(c.1[l]) - log(b.1[l])) / h2;
                        (m2 - m1).abs() * h1.max(h2)
                    })
                    .fold(0.0, f64::max);
                if bend > lattice.curvature_tol {
                    split[k - 1] = true;
                    split[k] = true;
                }
            }
            let mids: Vec<f64> = (0..n - 1)
                .filter(|&k| split[k] && splittable(points[k].0, points[k + 1].0))
                .map(|k| 0.5 * (points[k].0 + points[k + 1].0))
                .collect();
            if mids.is_empty() {
                break;
            }
            for m in mids {
                add(m, &mut points)?;
            }
            points.sort_by(|a, b| a.0.total_cmp(&b.0));
        }
        let snr_db = points.iter().map(|p| p.0).collect();
        let log_pe = points
            .into_iter()
            .map(|(_, p)| p.into_iter().map(|v| v.max(LOG_FLOOR).ln()).collect())
            .collect();
        let mut profile = SnrProfile {
            params,
            l_flood,
            snr_db,
            log_pe,
            slopes: Vec::new(),
        };
        profile.prepare();
        Ok(profile)
    }

    /// Profile computed with a fresh engine, stored in and served from
    /// `cache`.
    pub fn cached(
        p: &Protograph,
        params: DeParams,
        l_flood: usize,
        lattice: &LatticeSpec,
        cache: &DeCache,
    ) -> Result<Arc<SnrProfile>> {
        let key = lattice
            .key(KeyBuilder::new("profile").protograph(p).params(&params))
            .uint("l_flood", l_flood as u64)
            .finish();
        cache.get_or_insert_with("profile", &key, || {
            let mut engine = DeEngine::new(p, params)?;
            SnrProfile::build(params, l_flood, lattice, |s| engine.run(s, l_flood))
        })
    }

    pub fn lattice_len(&self) -> usize {
        self.snr_db.len()
    }

    /// Derivatives of the monotone cubic interpolant at every lattice point.
    fn prepare(&mut self) {
        let n = self.snr_db.len();
        let iters = self.l_flood + 1;
        self.slopes = vec![vec![0.0; iters]; n];
        if n < 2 {
            return;
        }
        let x = &self.snr_db;
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        for l in 0..iters {
            let y: Vec<f64> = self.log_pe.iter().map(|r| r[l]).collect();
            let d = pchip_slopes(&h, &y);
            for (k, v) in d.into_iter().enumerate() {
                self.slopes[k][l] = v;
            }
        }
    }

    /// Interpolated `p_e` after flooding iteration `index` at `snr_db`.
    pub fn interpolate_index(&self, snr_db: f64, index: usize) -> f64 {
        let x = &self.snr_db;
        let n = x.len();
        if n == 1 || snr_db <= x[0] {
            return self.log_pe[0][index].exp();
        }
        if snr_db >= x[n - 1] {
            return self.log_pe[n - 1][index].exp();
        }
        let k = x.partition_point(|&v| v <= snr_db) - 1;
        let h = x[k + 1] - x[k];
        let t = (snr_db - x[k]) / h;
        let (t2, t3) = (t * t, t * t * t);
        let y = (2.0 * t3 - 3.0 * t2 + 1.0) * self.log_pe[k][index]
            + (t3 - 2.0 * t2 + t) * h * self.slopes[k][index]
            + (-2.0 * t3 + 3.0 * t2) * self.log_pe[k + 1][index]
            + (t3 - t2) * h * self.slopes[k + 1][index];
        y.exp()
    }

    /// Interpolated `p_e` for every flooding iteration at `snr_db` (clamped
    /// to the lattice range).
    pub fn interpolate(&self, snr_db: f64) -> Vec<f64> {
        let x = &self.snr_db;
        let n = x.len();
        if n == 1 || snr_db <= x[0] {
            return self.log_pe[0].iter().map(|v| v.exp()).collect();
        }
        if snr_db >= x[n - 1] {
            return self.log_pe[n - 1].iter().map(|v| v.exp()).collect();
        }
        let k = x.partition_point(|&v| v <= snr_db) - 1;
        let h = x[k + 1] - x[k];
        let t = (snr_db - x[k]) / h;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        (0..=self.l_flood)
            .map(|l| {
                let y = h00 * self.log_pe[k][l]
                    + h10 * h * self.slopes[k][l]
                    + h01 * self.log_pe[k + 1][l]
                    + h11 * h * self.slopes[k + 1][l];
                y.exp()
            })
            .collect()
    }
}

impl TraceSource for SnrProfile {
    /// Fails for SNRs outside the lattice rather than extrapolating.
    fn traces(&self, snr_db: &[f64]) -> Result<Vec<Arc<Vec<f64>>>> {
        let (lo, hi) = (self.snr_db[0], self.snr_db[self.snr_db.len() - 1]);
        if let Some(s) = snr_db.iter().find(|&&s| !(s >= lo - 1e-9 && s <= hi + 1e-9)) {
            return Err(Error::MissingTrace(format!(
                "{s} dB is outside the profile lattice [{lo}, {hi}] dB"
            )));
        }
        Ok(snr_db.iter().map(|&s| Arc::new(self.interpolate(s))).collect())
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.snr_db.clone()
    }
}

/// Fritsch-Carlson derivatives with the shape-preserving three-point end
/// conditions.
fn pchip_slopes(h: &[f64], y: &[f64]) -> Vec<f64> {
    let n = y.len();
    let delta: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
    let mut d = vec![0.0; n];
    if n == 2 {
        d[0] = delta[0];
        d[1] = delta[0];
        return d;
    }
    for k in 1..n - 1 {
        let (a, b) = (delta[k - 1], delta[k]);
        if a == 0.0 || b == 0.0 || a.signum() != b.signum() {
            d[k] = 0.0;
        } else {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            d[k] = (w1 + w2) / (w1 / a + w2 / b);
        }
    }
    let end = |h0: f64, h1: f64, m0: f64, m1: f64| -> f64 {
        let d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
        if d.signum() != m0.signum() {
            0.0
        } else if m0.signum() != m1.signum() && d.abs() > 3.0 * m0.abs() {
            3.0 * m0
        } else {
            d
        }
    };
    d[0] = end(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = end(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    d
}

fn check_traces(traces: &[Arc<Vec<f64>>], grid: &IntegrationGrid, index: usize) -> Result<()> {
    if traces.len() != grid.len() {
        return Err(Error::MissingTrace(format!(
            "{} traces for {} grid nodes",
            traces.len(),
            grid.len()
        )));
    }
    if let Some(t) = traces.iter().find(|t| t.len() <= index) {
        return Err(Error::MissingTrace(format!(
            "trace covers {} iterations, need flooding iteration {index}",
            t.len().saturating_sub(1)
        )));
    }
    Ok(())
}

/// Finite-length error probability after `layered_iter` layered iterations.
pub fn p_en(traces: &[Arc<Vec<f64>>], grid: &IntegrationGrid, layered_iter: usize) -> Result<f64> {
    let idx = 2 * layered_iter;
    check_traces(traces, grid, idx)?;
    Ok(traces
        .iter()
        .zip(&grid.weights)
        .map(|(t, w)| w * t[idx])
        .sum())
}

/// Expected number of layered iterations with at most `l` iterations:
/// `sum_{l'=1..l} E[1 - (1 - p_e^(l'-1)(X))^N]`.
pub fn expected_iterations(traces: &[Arc<Vec<f64>>], grid: &IntegrationGrid, l: usize) -> Result<f64> {
    if l == 0 {
        return Ok(0.0);
    }
    check_traces(traces, grid, 2 * (l - 1))?;
    let n = grid.n as f64;
    Ok(traces
        .iter()
        .zip(&grid.weights)
        .map(|(t, w)| {
            let still_wrong: f64 = (0..l)
                .map(|li| {
                    let p = t[2 * li].clamp(0.0, 1.0);
                    -(n * (-p).ln_1p()).exp_m1()
                })
                .sum();
            w * still_wrong
        })
        .sum())
}

/// Finite-length prediction at one SNR and length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinitePerf {
    pub snr_db: f64,
    pub n: u64,
    /// Maximum number of layered iterations.
    pub l: usize,
    /// `p_eN` after each layered iteration `0..=l`.
    pub p_en: Vec<f64>,
    /// Expected layered iterations.
    pub l_n: f64,
    /// Gaussian mass captured by the grid.
    pub mass: f64,
}

impl FinitePerf {
    pub fn final_pe(&self) -> f64 {
        self.p_en[self.l]
    }
}

/// Evaluates `p_eN` and `L_N` from traces at the grid nodes.
pub fn finite_perf_from_traces(
    traces: &[Arc<Vec<f64>>],
    grid: &IntegrationGrid,
    l: usize,
) -> Result<FinitePerf> {
    let p_en = (0..=l).map(|li| p_en(traces, grid, li)).collect::<Result<_>>()?;
    Ok(FinitePerf {
        snr_db: grid.snr_db,
        n: grid.n,
        l,
        p_en,
        l_n: expected_iterations(traces, grid, l)?,
        mass: grid.mass(),
    })
}

/// Composite grid for `source`, split at its breakpoints.
pub fn grid_for(source: &dyn TraceSource, snr_db: f64, n: u64, panel_nodes: usize) -> Result<IntegrationGrid> {
    build_panel_grid(snr_db, n, panel_nodes, DEFAULT_K_SIGMA, &source.breakpoints())
}

/// Evaluates `p_eN` and `L_N` with traces from `source`.
pub fn finite_perf(source: &dyn TraceSource, grid: &IntegrationGrid, l: usize) -> Result<FinitePerf> {
    let traces = source.traces(&grid.node_snr_db)?;
    finite_perf_from_traces(&traces, grid, l)
}
