//! Minimum-energy search over quantization width `q`, code length `N` and
//! memory failure probability `ε` subject to `p_e,opt < p_e*` at a target
//! SNR, where `p_e,opt` is the finite-length error probability minimized
//! over the channel scaling `α` and the offset `λ`.
//!
//! Every `(q, ε)` cell is first screened with a few single-SNR DE runs.
//! Assuming `p_e` is non-decreasing in the channel crossover probability,
//! they give lower bounds on `p_eN` and `L_N` for every `(α, λ, N)`; pairs
//! and cells whose bounds cannot beat the incumbent are skipped. Setting
//! [`Optimizer::prune`] to `false` evaluates everything.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cache::{DeCache, KeyBuilder};
use crate::channel::{linear_to_db, p0_of_snr, snr_of_p0};
use crate::density_evolution::{DeEngine, DeParams};
use crate::energy::{energy_per_info_bit, per_iteration_factor, TechModel};
use crate::error::{Error, Result};
use crate::finite_length::{
    expected_iterations, grid_for, LatticeSpec, SnrProfile, DEFAULT_K_SIGMA, DEFAULT_PANEL_NODES, EDGE_MARGIN,
};
use crate::protograph::Protograph;
use crate::special::normal_interval;

/// Offsets of the screening points from `p0`, in units of the channel
/// standard deviation at the largest code length.
const SCREEN_OFFSETS: [f64; 5] = [-2.0, -1.0, 0.0, 1.0, 2.0];
/// Safety factor applied to screening bounds to absorb interpolation error.
const SCREEN_MARGIN: f64 = 0.95;

/// Error-rate constraint: `p_e,opt < pe_star` at `snr_db`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Target {
    pub pe_star: f64,
    pub snr_db: f64,
}

impl Target {
    pub fn new(pe_star: f64, snr_db: f64) -> Result<Self> {
        if !(pe_star > 0.0 && pe_star < 0.5) {
            return Err(Error::InvalidParameter(format!("target p_e* = {pe_star} outside (0, 1/2)")));
        }
        if !snr_db.is_finite() {
            return Err(Error::InvalidParameter(format!("target SNR {snr_db}")));
        }
        Ok(Target { pe_star, snr_db })
    }
}

/// Grids of the search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub q_min: u32,
    pub q_max: u32,
    /// Lifting factors `Z`; code lengths are `N = n Z`.
    pub lifting: Vec<usize>,
    /// Memory failure probabilities.
    pub epsilons: Vec<f64>,
    pub alphas: Vec<f64>,
    pub lambdas: Vec<u32>,
    /// Coordinate-descent rounds.
    pub rounds: usize,
    /// Maximum number of layered iterations `L`.
    pub max_iters: usize,
    /// Starting failure probability of the descent.
    pub eps_init: f64,
}

impl SearchSpace {
    /// Default grids: `q ∈ [3, 8]`, `Z ∈ {250, 260, …, 2500}`, 40 values of
    /// `ε` log-spaced between `ε(e_g = 1)` and `ε(e_g = 0.5)`,
    /// `α ∈ {0.1, 0.15, …, 2.0}`, `λ ∈ {0, 1, 2}`, 3 rounds, `L = 50`.
    pub fn standard(tech: &TechModel) -> Self {
        SearchSpace {
            q_min: 3,
            q_max: 8,
            lifting: (250..=2500).step_by(10).collect(),
            epsilons: eps_grid(tech, 0.5, 1.0, 40),
            alphas: (2..=40).map(|k| f64::from(k) / 20.0).collect(),
            lambdas: vec![0, 1, 2],
            rounds: 3,
            max_iters: 50,
            eps_init: tech.epsilon0 * (-tech.c).exp(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(2..=8).contains(&self.q_min) || !(self.q_min..=8).contains(&self.q_max) {
            return bad(format!("q range [{}, {}] not within [2, 8]", self.q_min, self.q_max));
        }
        if self.lifting.is_empty() || self.lifting.contains(&0) {
            return bad("lifting grid must be non-empty and positive".into());
        }
        if self.epsilons.is_empty() || self.epsilons.iter().any(|e| !(0.0..=0.5).contains(e)) {
            return bad("epsilon grid must be non-empty within [0, 1/2]".into());
        }
        if !(0.0..=0.5).contains(&self.eps_init) {
            return bad(format!("initial epsilon {} outside [0, 1/2]", self.eps_init));
        }
        if self.alphas.is_empty() || self.alphas.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
            return bad("alpha grid must be non-empty and positive".into());
        }
        if self.lambdas.is_empty() {
            return bad("lambda set must be non-empty".into());
        }
        if self.max_iters == 0 {
            return bad("at least one decoding iteration is required".into());
        }
        Ok(())
    }
}

/// `count` failure probabilities with `e_g` evenly spaced from `eg_hi` down
/// to `eg_lo` (ascending `ε`, log-spaced).
pub fn eps_grid(tech: &TechModel, eg_lo: f64, eg_hi: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|k| {
            let t = if count > 1 { k as f64 / (count - 1) as f64 } else { 0.0 };
            let e_g = eg_hi - (eg_hi - eg_lo) * t;
            tech.epsilon0 * (-tech.c * e_g).exp()
        })
        .collect()
}

/// Minimum of `p_eN` over the `(α, λ)` grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeOpt {
    pub p_e: f64,
    pub alpha: f64,
    pub lambda: u32,
    /// `false` for infeasible points where screening skipped pairs: `p_e`
    /// is then the best value found or, if no pair was evaluated, a lower
    /// bound; either way it is at least `p_e*`.
    pub exact: bool,
}

/// One evaluated `(q, N, ε)` point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub q: u32,
    pub z: usize,
    pub n: u64,
    pub epsilon: f64,
    pub e_g: f64,
    pub pe_opt: PeOpt,
    pub feasible: bool,
    /// Expected layered iterations (feasible points only).
    pub l_n: Option<f64>,
    /// Memory energy per information bit in pJ (feasible points only).
    pub energy_pj: Option<f64>,
}

impl OperatingPoint {
    fn energy_or_inf(&self) -> f64 {
        self.energy_pj.unwrap_or(f64::INFINITY)
    }
}

/// Energy order with ties broken towards smaller `q`, smaller `N`, then
/// larger `ε`.
fn prefer(a: &OperatingPoint, b: &OperatingPoint) -> Ordering {
    a.energy_or_inf()
        .total_cmp(&b.energy_or_inf())
        .then(a.q.cmp(&b.q))
        .then(a.n.cmp(&b.n))
        .then(b.epsilon.total_cmp(&a.epsilon))
}

/// Which coordinate a descent step optimized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stage {
    Init,
    Q,
    N,
    Epsilon,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DescentStep {
    pub round: usize,
    pub stage: Stage,
    pub point: OperatingPoint,
}

/// Result of a coordinate descent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationState {
    pub target: Target,
    pub point: OperatingPoint,
    pub history: Vec<DescentStep>,
}

impl OptimizationState {
    pub fn energy_pj(&self) -> f64 {
        self.point.energy_or_inf()
    }
}

/// Screening data of one `(q, ε)` cell.
struct Screen {
    /// Per `(α, λ)` pair, per screening point: `p_e` after layered
    /// iterations `0..=L` (`None` when the point was not needed).
    traces: Vec<Vec<Option<Vec<f64>>>>,
    /// Crossover probability of each screening point.
    xs: Vec<f64>,
}

/// Coordinate-descent and exhaustive solver over a [`SearchSpace`].
pub struct Optimizer<'a> {
    protograph: &'a Protograph,
    target: Target,
    space: SearchSpace,
    tech: TechModel,
    cache: &'a DeCache,
    lattice: LatticeSpec,
    /// Skip provably useless evaluations (see module docs).
    pub prune: bool,
    /// Gauss-Legendre nodes per panel of the finite-length integration.
    pub panel_nodes: usize,
    pairs: Vec<(f64, u32)>,
    screens: Mutex<HashMap<(u32, u64), Arc<Screen>>>,
    points: Mutex<HashMap<(u32, u64, usize), OperatingPoint>>,
}

impl std::fmt::Debug for Optimizer<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Optimizer")
            .field("protograph", &self.protograph.name())
            .field("target", &self.target)
            .field("space", &self.space)
            .field("prune", &self.prune)
            .finish()
    }
}

impl<'a> Optimizer<'a> {
    pub fn new(
        protograph: &'a Protograph,
        target: Target,
        space: SearchSpace,
        tech: TechModel,
        cache: &'a DeCache,
    ) -> Result<Self> {
        space.validate()?;
        tech.validate()?;
        let n_min = protograph.cols() as u64 * *space.lifting.iter().min().unwrap() as u64;
        let lattice = LatticeSpec::covering(target.snr_db, n_min, DEFAULT_K_SIGMA)?;
        Ok(Self::with_lattice(protograph, target, space, tech, cache, lattice))
    }

    /// Optimizer that evaluates profiles on a given SNR lattice (so that
    /// searches over different spaces share DE results).
    pub fn with_lattice(
        protograph: &'a Protograph,
        target: Target,
        space: SearchSpace,
        tech: TechModel,
        cache: &'a DeCache,
        lattice: LatticeSpec,
    ) -> Self {
        let pairs = space
            .alphas
            .iter()
            .flat_map(|&a| space.lambdas.iter().map(move |&l| (a, l)))
            .collect();
        Optimizer {
            protograph,
            target,
            space,
            tech,
            cache,
            lattice,
            prune: true,
            panel_nodes: DEFAULT_PANEL_NODES,
            pairs,
            screens: Mutex::default(),
            points: Mutex::default(),
        }
    }

    /// Same protograph, target, technology, cache and lattice over another
    /// space.
    pub fn restricted(&self, space: SearchSpace) -> Result<Optimizer<'a>> {
        space.validate()?;
        let mut o = Optimizer::with_lattice(self.protograph, self.target, space, self.tech, self.cache, self.lattice);
        o.prune = self.prune;
        o.panel_nodes = self.panel_nodes;
        Ok(o)
    }

    pub fn space(&self) -> &SearchSpace {
        &self.space
    }

    pub fn target(&self) -> &Target {
        &self.target
    }

    pub fn lattice(&self) -> &LatticeSpec {
        &self.lattice
    }

    fn l_flood(&self) -> usize {
        2 * self.space.max_iters
    }

    fn code_length(&self, z: usize) -> u64 {
        (self.protograph.cols() * z) as u64
    }

    fn e_g(&self, epsilon: f64) -> f64 {
        if epsilon == 0.0 {
            1.0
        } else {
            self.tech.eg_of_epsilon(epsilon)
        }
    }

    /// `p_eN` profile of one parameter set.
    pub fn profile(&self, q: u32, epsilon: f64, alpha: f64, lambda: u32) -> Result<Arc<SnrProfile>> {
        let params = DeParams::new(q, epsilon, alpha, lambda);
        SnrProfile::cached(self.protograph, params, self.l_flood(), &self.lattice, self.cache)
    }

    fn screen(&self, q: u32, epsilon: f64) -> Result<Arc<Screen>> {
        let key = (q, epsilon.to_bits());
        if let Some(s) = self.screens.lock().unwrap().get(&key) {
            return Ok(s.clone());
        }
        let p0 = p0_of_snr(self.target.snr_db);
        let n_max = self.code_length(*self.space.lifting.iter().max().unwrap());
        let s_ref = (p0 * (1.0 - p0) / n_max as f64).sqrt();
        let xs: Vec<f64> = SCREEN_OFFSETS
            .iter()
            .map(|&j| (p0 + j * s_ref).clamp(EDGE_MARGIN, 0.5 - EDGE_MARGIN))
            .collect();
        let snrs = xs
            .iter()
            .map(|&x| snr_of_p0(x).map(linear_to_db))
            .collect::<Result<Vec<_>>>()?;
        let centre = SCREEN_OFFSETS.iter().position(|&j| j == 0.0).unwrap();
        let l = self.space.max_iters;
        let l_flood = self.l_flood();
        let pe_star = self.target.pe_star;
        let traces = self
            .pairs
            .par_iter()
            .map(|&(alpha, lambda)| -> Result<Vec<Option<Vec<f64>>>> {
                let params = DeParams::new(q, epsilon, alpha, lambda);
                let mut key = KeyBuilder::new("screen")
                    .protograph(self.protograph)
                    .params(&params)
                    .uint("l_flood", l_flood as u64)
                    .float("pe_star", pe_star);
                for &s in &snrs {
                    key = key.float("snr_db", s);
                }
                let rec = self.cache.get_or_insert_with("screen", &key.finish(), || {
                    let mut engine = DeEngine::new(self.protograph, params)?;
                    let mut run = |s: f64| -> Result<Vec<f64>> {
                        let t = engine.run(s, l_flood)?;
                        Ok((0..=l).map(|li| t.p_e[2 * li]).collect())
                    };
                    let mut out = vec![None; xs.len()];
                    let mid = run(snrs[centre])?;
                    // half of the Gaussian mass lies above p0 for every N
                    let hopeless = SCREEN_MARGIN * 0.5 * mid[l] >= pe_star;
                    out[centre] = Some(mid);
                    if !hopeless {
                        for (j, &s) in snrs.iter().enumerate() {
                            if j != centre {
                                out[j] = Some(run(s)?);
                            }
                        }
                    }
                    Ok(out)
                })?;
                Ok(rec.as_ref().clone())
            })
            .collect::<Result<Vec<_>>>()?;
        let screen = Arc::new(Screen { traces, xs });
        self.screens.lock().unwrap().insert(key, screen.clone());
        Ok(screen)
    }

    /// Gaussian mass of the integration interval above `x` for length `n`.
    fn mass_above(&self, x: f64, n: u64) -> f64 {
        let p0 = p0_of_snr(self.target.snr_db);
        let s = (p0 * (1.0 - p0) / n as f64).sqrt();
        let hi = ((0.5 - EDGE_MARGIN - p0) / s).min(DEFAULT_K_SIGMA);
        let lo = ((x - p0) / s).max(-DEFAULT_K_SIGMA);
        if lo >= hi {
            0.0
        } else {
            normal_interval(lo, hi)
        }
    }

    /// Lower bounds on `p_eN` and `L_N` of every pair at length `n`.
    fn pair_bounds(&self, screen: &Screen, n: u64) -> Vec<(f64, f64)> {
        let p0 = p0_of_snr(self.target.snr_db);
        let l = self.space.max_iters;
        let masses: Vec<f64> = screen.xs.iter().map(|&x| self.mass_above(x, n)).collect();
        screen
            .traces
            .iter()
            .map(|pts| {
                let mut pe_lb: f64 = 0.0;
                let mut ln_lb: f64 = 0.0;
                for ((t, &x), &m) in pts.iter().zip(&screen.xs).zip(&masses) {
                    let Some(t) = t else { continue };
                    if x >= p0 {
                        pe_lb = pe_lb.max(m * t[l]);
                    }
                    let iters: f64 = t[..l]
                        .iter()
                        .map(|&p| -(n as f64 * (-p.clamp(0.0, 1.0)).ln_1p()).exp_m1())
                        .sum();
                    ln_lb = ln_lb.max(m * iters);
                }
                (SCREEN_MARGIN * pe_lb, SCREEN_MARGIN * ln_lb)
            })
            .collect()
    }

    /// Lower bound on the energy of `(q, ε)` at each requested lifting
    /// index (`+inf` when provably infeasible).
    fn energy_bounds(&self, q: u32, epsilon: f64, idxs: &[usize]) -> Result<Vec<f64>> {
        let screen = self.screen(q, epsilon)?;
        let scale = per_iteration_factor(self.protograph, q) * self.tech.e_bit_pj(self.e_g(epsilon));
        Ok(idxs
            .iter()
            .map(|&i| {
                let n = self.code_length(self.space.lifting[i]);
                self.pair_bounds(&screen, n)
                    .into_iter()
                    .filter(|&(pe, _)| pe < self.target.pe_star)
                    .map(|(_, ln)| ln * scale)
                    .fold(f64::INFINITY, f64::min)
            })
            .collect())
    }

    /// `p_eN` after `L` iterations with the traces of `profile`.
    fn p_en(&self, profile: &SnrProfile, n: u64) -> Result<f64> {
        let grid = grid_for(profile, self.target.snr_db, n, self.panel_nodes)?;
        let idx = self.l_flood();
        Ok(grid
            .node_snr_db
            .iter()
            .zip(&grid.weights)
            .map(|(&s, &w)| w * profile.interpolate_index(s, idx))
            .sum())
    }

    /// Evaluates `(q, ε)` at the given lifting indices.
    pub fn evaluate(&self, q: u32, epsilon: f64, idxs: &[usize]) -> Result<Vec<OperatingPoint>> {
        let eb = epsilon.to_bits();
        let todo: Vec<usize> = {
            let memo = self.points.lock().unwrap();
            let mut v: Vec<usize> = idxs.iter().copied().filter(|&i| !memo.contains_key(&(q, eb, i))).collect();
            v.sort_unstable();
            v.dedup();
            v
        };
        if !todo.is_empty() {
            let fresh = self.evaluate_fresh(q, epsilon, &todo)?;
            let mut memo = self.points.lock().unwrap();
            for (i, p) in todo.into_iter().zip(fresh) {
                memo.insert((q, eb, i), p);
            }
        }
        let memo = self.points.lock().unwrap();
        Ok(idxs.iter().map(|&i| memo[&(q, eb, i)]).collect())
    }

    fn evaluate_fresh(&self, q: u32, epsilon: f64, idxs: &[usize]) -> Result<Vec<OperatingPoint>> {
        let pe_star = self.target.pe_star;
        let ns: Vec<u64> = idxs.iter().map(|&i| self.code_length(self.space.lifting[i])).collect();
        let npairs = self.pairs.len();
        // bounds[i][k] for lifting i, pair k
        let (bounds, order): (Vec<Vec<(f64, f64)>>, Vec<usize>) = if self.prune {
            let screen = self.screen(q, epsilon)?;
            let bounds = ns.iter().map(|&n| self.pair_bounds(&screen, n)).collect();
            let l = self.space.max_iters;
            let centre = SCREEN_OFFSETS.iter().position(|&j| j == 0.0).unwrap();
            let mut order: Vec<usize> = (0..npairs).collect();
            let key = |k: usize| screen.traces[k][centre].as_ref().map_or(f64::INFINITY, |t| t[l]);
            order.sort_by(|&a, &b| key(a).total_cmp(&key(b)).then(a.cmp(&b)));
            (bounds, order)
        } else {
            (vec![vec![(0.0, 0.0); npairs]; ns.len()], (0..npairs).collect())
        };

        let mut best: Vec<Option<(f64, usize)>> = vec![None; ns.len()];
        let mut skipped = vec![false; ns.len()];
        let mut profiles: HashMap<usize, Arc<SnrProfile>> = HashMap::new();
        for &k in &order {
            let relevant: Vec<usize> = (0..ns.len())
                .filter(|&i| {
                    let lb = bounds[i][k].0;
                    let keep = lb < pe_star && best[i].map_or(true, |(b, _)| lb <= b);
                    if !keep {
                        skipped[i] = true;
                    }
                    keep
                })
                .collect();
            if relevant.is_empty() {
                continue;
            }
            let (alpha, lambda) = self.pairs[k];
            let profile = self.profile(q, epsilon, alpha, lambda)?;
            let values = relevant
                .par_iter()
                .map(|&i| self.p_en(&profile, ns[i]))
                .collect::<Result<Vec<_>>>()?;
            for (&i, p) in relevant.iter().zip(values) {
                let better = match best[i] {
                    None => true,
                    Some((b, bk)) => p < b || (p == b && k < bk),
                };
                if better {
                    best[i] = Some((p, k));
                }
            }
            profiles.insert(k, profile);
        }

        let e_g = self.e_g(epsilon);
        let mut out = Vec::with_capacity(ns.len());
        for (i, &n) in ns.iter().enumerate() {
            let (p_e, k) = match best[i] {
                Some(b) => b,
                None => {
                    // every pair was excluded by its bound; report the
                    // smallest bound
                    let k = (0..npairs)
                        .min_by(|&a, &b| bounds[i][a].0.total_cmp(&bounds[i][b].0).then(a.cmp(&b)))
                        .unwrap();
                    (bounds[i][k].0, k)
                }
            };
            let (alpha, lambda) = self.pairs[k];
            let feasible = best[i].is_some() && p_e < pe_star;
            let (l_n, energy) = if feasible {
                let profile = &profiles[&k];
                let grid = grid_for(profile.as_ref(), self.target.snr_db, n, self.panel_nodes)?;
                let traces: Vec<Arc<Vec<f64>>> = grid
                    .node_snr_db
                    .iter()
                    .map(|&s| Arc::new(profile.interpolate(s)))
                    .collect();
                let l_n = expected_iterations(&traces, &grid, self.space.max_iters)?;
                let e = energy_per_info_bit(self.protograph, q, e_g, l_n, &self.tech).total_pj;
                (Some(l_n), Some(e))
            } else {
                (None, None)
            };
            out.push(OperatingPoint {
                q,
                z: self.space.lifting[idxs[i]],
                n,
                epsilon,
                e_g,
                pe_opt: PeOpt {
                    p_e,
                    alpha,
                    lambda,
                    exact: feasible || (best[i].is_some() && !skipped[i]),
                },
                feasible,
                l_n,
                energy_pj: energy,
            });
        }
        Ok(out)
    }

    fn lifting_index(&self, n: u64) -> Result<usize> {
        self.space
            .lifting
            .iter()
            .position(|&z| self.code_length(z) == n)
            .ok_or_else(|| Error::InvalidParameter(format!("N = {n} is not on the lifting grid")))
    }

    /// `p_e,opt` at `(q, ε, N)`; `N` must lie on the lifting grid.
    pub fn p_e_opt(&self, q: u32, epsilon: f64, n: u64) -> Result<PeOpt> {
        let i = self.lifting_index(n)?;
        Ok(self.evaluate(q, epsilon, &[i])?[0].pe_opt)
    }

    /// Evaluates one operating point; `N` must lie on the lifting grid.
    pub fn point(&self, q: u32, epsilon: f64, n: u64) -> Result<OperatingPoint> {
        let i = self.lifting_index(n)?;
        Ok(self.evaluate(q, epsilon, &[i])?[0])
    }

    /// Best of `candidates` (each a `(q, ε)` cell at lifting index `i`),
    /// visiting cells in order of their energy lower bound.
    fn best_of_cells(
        &self,
        candidates: &[(u32, f64)],
        i: usize,
        incumbent: Option<OperatingPoint>,
    ) -> Result<Option<OperatingPoint>> {
        let mut order: Vec<(f64, usize)> = Vec::with_capacity(candidates.len());
        for (c, &(q, eps)) in candidates.iter().enumerate() {
            let lb = if self.prune { self.energy_bounds(q, eps, &[i])?[0] } else { 0.0 };
            order.push((lb, c));
        }
        order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut best = incumbent;
        for (lb, c) in order {
            if lb == f64::INFINITY {
                continue;
            }
            if let Some(b) = &best {
                if lb > b.energy_or_inf() {
                    break;
                }
            }
            let (q, eps) = candidates[c];
            let p = self.evaluate(q, eps, &[i])?[0];
            if p.feasible && best.as_ref().map_or(true, |b| prefer(&p, b) == Ordering::Less) {
                best = Some(p);
            }
        }
        Ok(best)
    }

    /// Best `q` at fixed `ε` and `N`.
    pub fn optimize_q(&self, epsilon: f64, n: u64) -> Result<OperatingPoint> {
        let i = self.lifting_index(n)?;
        let cells: Vec<(u32, f64)> = (self.space.q_min..=self.space.q_max).map(|q| (q, epsilon)).collect();
        self.best_of_cells(&cells, i, None)?
            .ok_or_else(|| Error::Infeasible(format!("no q meets p_e* at eps = {epsilon:e}, N = {n}")))
    }

    /// Best `ε` on the grid at fixed `q` and `N`.
    pub fn optimize_eps(&self, q: u32, n: u64) -> Result<OperatingPoint> {
        let i = self.lifting_index(n)?;
        let cells: Vec<(u32, f64)> = self.space.epsilons.iter().map(|&e| (q, e)).collect();
        self.best_of_cells(&cells, i, None)?
            .ok_or_else(|| Error::Infeasible(format!("no epsilon meets p_e* at q = {q}, N = {n}")))
    }

    /// Best `N` on the grid at fixed `q` and `ε`.
    pub fn optimize_n(&self, q: u32, epsilon: f64) -> Result<OperatingPoint> {
        let all: Vec<usize> = (0..self.space.lifting.len()).collect();
        self.evaluate(q, epsilon, &all)?
            .into_iter()
            .filter(|p| p.feasible)
            .min_by(prefer)
            .ok_or_else(|| Error::Infeasible(format!("no N meets p_e* at q = {q}, eps = {epsilon:e}")))
    }

    /// `rounds` passes of (optimize q, optimize N, optimize ε) from
    /// `(q_max, N_max, eps_init)`.
    pub fn coordinate_descent(&self) -> Result<OptimizationState> {
        let z_max = *self.space.lifting.iter().max().unwrap();
        let init = self.point(self.space.q_max, self.space.eps_init, self.code_length(z_max))?;
        if !init.feasible {
            return Err(Error::Infeasible(format!(
                "initial point q = {}, N = {}, eps = {:e} misses the target (p_e = {:e})",
                init.q, init.n, init.epsilon, init.pe_opt.p_e
            )));
        }
        let mut history = vec![DescentStep {
            round: 0,
            stage: Stage::Init,
            point: init,
        }];
        let mut cur = init;
        for round in 1..=self.space.rounds {
            cur = self.optimize_q(cur.epsilon, cur.n)?;
            history.push(DescentStep { round, stage: Stage::Q, point: cur });
            cur = self.optimize_n(cur.q, cur.epsilon)?;
            history.push(DescentStep { round, stage: Stage::N, point: cur });
            cur = self.optimize_eps(cur.q, cur.n)?;
            history.push(DescentStep {
                round,
                stage: Stage::Epsilon,
                point: cur,
            });
        }
        Ok(OptimizationState {
            target: self.target,
            point: cur,
            history,
        })
    }

    /// Minimum over the full `(q, N, ε)` grid.
    pub fn exhaustive(&self) -> Result<OperatingPoint> {
        let nz = self.space.lifting.len();
        let all: Vec<usize> = (0..nz).collect();
        let mut cells: Vec<(f64, u32, f64, Vec<f64>)> = Vec::new();
        for q in self.space.q_min..=self.space.q_max {
            for &eps in &self.space.epsilons {
                let lbs = if self.prune { self.energy_bounds(q, eps, &all)? } else { vec![0.0; nz] };
                let lo = lbs.iter().copied().fold(f64::INFINITY, f64::min);
                cells.push((lo, q, eps, lbs));
            }
        }
        cells.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(b.2.total_cmp(&a.2)));
        let mut best: Option<OperatingPoint> = None;
        for (lo, q, eps, lbs) in cells {
            if lo == f64::INFINITY {
                continue;
            }
            let cap = best.as_ref().map_or(f64::INFINITY, |b| b.energy_or_inf());
            if lo > cap {
                break;
            }
            let idxs: Vec<usize> = all.iter().copied().filter(|&i| lbs[i] <= cap).collect();
            for p in self.evaluate(q, eps, &idxs)? {
                if p.feasible && best.as_ref().map_or(true, |b| prefer(&p, b) == Ordering::Less) {
                    best = Some(p);
                }
            }
        }
        best.ok_or_else(|| Error::Infeasible("no grid point meets the target".into()))
    }
}
