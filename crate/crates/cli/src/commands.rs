//! Subcommand implementations. Each returns report rows; emission is left
//! to the caller.

use std::path::PathBuf;

use ldpc_energy::cache::DeCache;
use ldpc_energy::channel::QuantSpec;
use ldpc_energy::decoder::{DecoderConfig, FaultModel};
use ldpc_energy::density_evolution::{de_threshold, DeParams};
use ldpc_energy::energy::{energy_per_info_bit, measured_energy_per_info_bit, TechModel};
use ldpc_energy::finite_length::{
    finite_perf, grid_for, FinitePerf, LatticeSpec, SnrProfile, DEFAULT_K_SIGMA, DEFAULT_PANEL_NODES,
};
use ldpc_energy::montecarlo::simulate;
use ldpc_energy::optimizer::{OptimizationState, Optimizer, SearchSpace};
use ldpc_energy::protograph::{guard_bits_for, lift, Protograph};
use ldpc_energy::Error;
use rayon::prelude::*;

use crate::config::{load_protograph, ExperimentConfig, ParamSet};
use crate::error::CliError;
use crate::report::{BerRow, EnergyCurveRow, OptimizeRow, ThresholdRow};

const FAULT_MODELS: [FaultModel; 2] = [FaultModel::Hardware, FaultModel::Simplified];

fn route_name(m: FaultModel) -> &'static str {
    match m {
        FaultModel::Hardware => "hardware",
        FaultModel::Simplified => "simplified",
        FaultModel::None => "none",
    }
}

fn e_g_of(tech: &TechModel, epsilon: f64) -> f64 {
    if epsilon == 0.0 {
        1.0
    } else {
        tech.eg_of_epsilon(epsilon)
    }
}

fn lifting_of(p: &Protograph, n: u64) -> Result<usize, CliError> {
    let cols = p.cols() as u64;
    if n == 0 || n % cols != 0 {
        return Err(CliError::Config(format!(
            "code length {n} is not a positive multiple of the {} protograph width {cols}",
            p.name()
        )));
    }
    Ok((n / cols) as usize)
}

/// `(α, λ)` candidates: the fixed decoder values or the search grids.
fn pairs(cfg: &ExperimentConfig) -> Result<Vec<(f64, u32)>, CliError> {
    let alphas = match cfg.decoder.alpha {
        Some(a) => vec![a],
        None => cfg.search.alphas()?,
    };
    let lambdas = match cfg.decoder.lambda {
        Some(l) => vec![l],
        None => cfg.search.lambdas.clone(),
    };
    Ok(alphas
        .iter()
        .flat_map(|&a| lambdas.iter().map(move |&l| (a, l)))
        .collect())
}

/// Fixed `(α, λ)` or the pair minimizing `p_eN` at the target SNR.
pub fn resolve_pair(
    cfg: &ExperimentConfig,
    p: &Protograph,
    q: u32,
    epsilon: f64,
    n: u64,
    cache: &DeCache,
) -> Result<(f64, u32), CliError> {
    if let (Some(a), Some(l)) = (cfg.decoder.alpha, cfg.decoder.lambda) {
        return Ok((a, l));
    }
    let candidates = pairs(cfg)?;
    let mut alphas: Vec<f64> = candidates.iter().map(|c| c.0).collect();
    alphas.dedup();
    let mut lambdas: Vec<u32> = candidates.iter().map(|c| c.1).collect();
    lambdas.sort_unstable();
    lambdas.dedup();
    let space = SearchSpace {
        q_min: q,
        q_max: q,
        lifting: vec![lifting_of(p, n)?],
        epsilons: vec![epsilon],
        alphas,
        lambdas,
        rounds: 0,
        max_iters: cfg.decoder.iters,
        eps_init: epsilon,
    };
    let opt = Optimizer::new(p, cfg.target()?, space, cfg.tech.model()?, cache)?;
    let pe = opt.p_e_opt(q, epsilon, n)?;
    log::info!(
        "{} q={q} eps={epsilon:e} N={n}: alpha={} lambda={} (p_eN {:.3e} at {} dB)",
        p.name(),
        pe.alpha,
        pe.lambda,
        pe.p_e,
        cfg.target.snr_db
    );
    Ok((pe.alpha, pe.lambda))
}

/// Finite-length predictions at each SNR from one cached profile spanning
/// the sweep.
pub fn predict(
    p: &Protograph,
    params: DeParams,
    n: u64,
    snrs: &[f64],
    iters: usize,
    cache: &DeCache,
) -> Result<Vec<FinitePerf>, CliError> {
    if snrs.is_empty() {
        return Ok(Vec::new());
    }
    let mut lattice: Option<LatticeSpec> = None;
    for &s in snrs {
        let c = LatticeSpec::covering(s, n, DEFAULT_K_SIGMA)?;
        lattice = Some(match lattice {
            None => c,
            Some(l) => LatticeSpec {
                lo_db: l.lo_db.min(c.lo_db),
                hi_db: l.hi_db.max(c.hi_db),
                ..l
            },
        });
    }
    let profile = SnrProfile::cached(p, params, 2 * iters, &lattice.unwrap(), cache)?;
    snrs.iter()
        .map(|&s| {
            let grid = grid_for(profile.as_ref(), s, n, DEFAULT_PANEL_NODES)?;
            Ok(finite_perf(profile.as_ref(), &grid, iters)?)
        })
        .collect()
}

fn decoder_config(p: &Protograph, q: u32, alpha: f64, lambda: u32, epsilon: f64, cfg: &ExperimentConfig, model: FaultModel) -> Result<DecoderConfig, CliError> {
    let guard = guard_bits_for(p.degree_profile().max_var_degree());
    Ok(DecoderConfig {
        quant: QuantSpec::new(q, guard)?,
        alpha,
        lambda,
        epsilon,
        max_iters: cfg.decoder.iters,
        fault_model: model,
        schedule: cfg.decoder.schedule,
    })
}

/// DE thresholds per protograph, `q` and `ε`, minimized over `(α, λ)`.
pub fn threshold(cfg: &ExperimentConfig, cache: &DeCache) -> Result<Vec<ThresholdRow>, CliError> {
    let th = &cfg.threshold;
    if !(th.lo_db < th.hi_db) {
        return Err(CliError::Config(format!(
            "empty SNR bracket [{}, {}] dB; set threshold.lo_db below threshold.hi_db",
            th.lo_db, th.hi_db
        )));
    }
    if !(th.resolution_db > 0.0) || !(th.pe > 0.0 && th.pe < 0.5) {
        return Err(CliError::Config("threshold needs resolution_db > 0 and 0 < pe < 1/2".into()));
    }
    let tech = cfg.tech.model()?;
    let pairs = pairs(cfg)?;
    let l_flood = 2 * cfg.decoder.iters;
    let mut jobs = Vec::new();
    for p in cfg.protographs()? {
        for &q in &cfg.decoder.q {
            for eps in cfg.decoder.epsilons(&tech)? {
                jobs.push((p.clone(), q, eps));
            }
        }
    }
    jobs.par_iter()
        .map(|(p, q, eps)| {
            let mut best: Option<(f64, f64, u32)> = None;
            for &(alpha, lambda) in &pairs {
                let params = DeParams::new(*q, *eps, alpha, lambda);
                let hi = best.map_or(th.hi_db, |b| b.0 - th.resolution_db);
                if hi <= th.lo_db {
                    break;
                }
                if cache.trace(p, params, hi, l_flood)?.final_pe() > th.pe {
                    continue;
                }
                let t = de_threshold(p, params, th.pe, l_flood, (th.lo_db, hi), th.resolution_db).map_err(|e| match e {
                    Error::Unbracketed(m) => CliError::Config(format!("{m}; lower threshold.lo_db")),
                    e => e.into(),
                })?;
                best = Some((t, alpha, lambda));
            }
            Ok(ThresholdRow {
                protograph: p.name().to_string(),
                q: *q,
                epsilon: *eps,
                e_g: e_g_of(&tech, *eps),
                alpha: best.map(|b| b.1),
                lambda: best.map(|b| b.2),
                iterations: cfg.decoder.iters,
                target_pe: th.pe,
                threshold_db: best.map(|b| b.0),
            })
        })
        .collect()
}

/// Monte-Carlo BER under both fault models with the finite-length
/// prediction at every SNR.
pub fn ber(cfg: &ExperimentConfig, cache: &DeCache) -> Result<Vec<BerRow>, CliError> {
    let tech = cfg.tech.model()?;
    let stop = cfg.montecarlo.stop();
    if stop.max_frames == 0 {
        return Ok(Vec::new());
    }
    let n = cfg.decoder.n;
    let snrs = &cfg.sweep.snr_db;
    let mut rows = Vec::new();
    for p in cfg.protographs()? {
        let z = lifting_of(&p, n)?;
        let code = lift(&p, z, cfg.seed)?;
        let k = ((p.cols() - p.rows()) * z) as u64;
        for &q in &cfg.decoder.q {
            for eps in cfg.decoder.epsilons(&tech)? {
                let e_g = e_g_of(&tech, eps);
                let (alpha, lambda) = resolve_pair(cfg, &p, q, eps, n, cache)?;
                let pred = predict(&p, DeParams::new(q, eps, alpha, lambda), n, snrs, cfg.decoder.iters, cache)?;
                for (&snr, pr) in snrs.iter().zip(&pred) {
                    for model in FAULT_MODELS {
                        let dc = decoder_config(&p, q, alpha, lambda, eps, cfg, model)?;
                        let r = simulate(&code, &dc, snr, cfg.seed, stop)?;
                        log::info!(
                            "{} q={q} eps={eps:e} {} {snr} dB: BER {:.3e} over {} frames",
                            p.name(),
                            route_name(model),
                            r.ber(),
                            r.frames
                        );
                        rows.push(BerRow {
                            protograph: p.name().to_string(),
                            q,
                            n,
                            epsilon: eps,
                            e_g,
                            alpha,
                            lambda,
                            fault_model: route_name(model).to_string(),
                            snr_db: snr,
                            frames: r.frames,
                            frame_errors: r.frame_errors,
                            bit_errors: r.bit_errors,
                            bits: r.bits,
                            ber: r.ber(),
                            fer: r.fer(),
                            avg_iterations: r.avg_iterations(),
                            energy_measured_pj: measured_energy_per_info_bit(r.bits_written, r.frames * k, e_g, &tech),
                            p_en_pred: pr.final_pe(),
                            l_n_pred: pr.l_n,
                            energy_pred_pj: energy_per_info_bit(&p, q, e_g, pr.l_n, &tech).total_pj,
                            wall_time_s: r.wall_time_s,
                        });
                    }
                }
            }
        }
    }
    Ok(rows)
}

/// Optimization outcome of one protograph.
pub struct Optimized {
    pub row: OptimizeRow,
    pub state: OptimizationState,
}

/// Coordinate descent per protograph plus the fixed-`e_g` baselines and,
/// when requested, the exhaustive cross-check.
pub fn optimize(cfg: &ExperimentConfig, cache: &DeCache) -> Result<Vec<Optimized>, CliError> {
    let tech = cfg.tech.model()?;
    let target = cfg.target()?;
    let space = cfg.search.space(&tech, cfg.decoder.iters)?;
    let eps1 = tech.epsilon_of_eg(1.0)?;
    let z_max = *space.lifting.iter().max().unwrap();
    let mut out = Vec::new();
    for p in cfg.protographs()? {
        let opt = Optimizer::new(&p, target, space.clone(), tech, cache)?;
        let state = opt.coordinate_descent()?;
        let best = state.point;
        log::info!(
            "{}: q={} N={} e_g={:.4} E={:.2} pJ",
            p.name(),
            best.q,
            best.n,
            best.e_g,
            state.energy_pj()
        );

        let full_eg = opt
            .restricted(SearchSpace {
                epsilons: vec![eps1],
                eps_init: eps1,
                ..space.clone()
            })?
            .exhaustive();
        let full_eg = infeasible_as_none(full_eg)?;
        let n_max = (p.cols() * z_max) as u64;
        let q_only = opt
            .restricted(SearchSpace {
                epsilons: vec![eps1],
                lifting: vec![z_max],
                eps_init: eps1,
                ..space.clone()
            })?
            .optimize_q(eps1, n_max);
        let q_only = infeasible_as_none(q_only)?;
        let exhaustive = if cfg.search.exhaustive { Some(opt.exhaustive()?) } else { None };

        let e_min = state.energy_pj();
        let row = OptimizeRow {
            protograph: p.name().to_string(),
            e_min_pj: e_min,
            e_g_op: best.e_g,
            q_op: best.q,
            n_op: best.n,
            epsilon_op: best.epsilon,
            alpha_op: best.pe_opt.alpha,
            lambda_op: best.pe_opt.lambda,
            pe_op: best.pe_opt.p_e,
            l_n_op: best.l_n.unwrap_or(f64::NAN),
            e_full_eg_pj: full_eg.and_then(|b| b.energy_pj),
            q_full_eg: full_eg.map(|b| b.q),
            n_full_eg: full_eg.map(|b| b.n),
            e_q_only_pj: q_only.and_then(|b| b.energy_pj),
            q_q_only: q_only.map(|b| b.q),
            n_q_only: n_max,
            gain_vs_q_only: q_only.and_then(|b| b.energy_pj).map(|e| 1.0 - e_min / e),
            e_exhaustive_pj: exhaustive.and_then(|x| x.energy_pj),
            exhaustive_agrees: exhaustive.map(|x| (x.q, x.n, x.epsilon) == (best.q, best.n, best.epsilon)),
        };
        out.push(Optimized { row, state });
    }
    Ok(out)
}

fn infeasible_as_none<T>(r: ldpc_energy::Result<T>) -> Result<Option<T>, CliError> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::Infeasible(m)) => {
            log::warn!("baseline infeasible: {m}");
            Ok(None)
        }
        Err(e) => Err(e.into()),
    }
}

/// Parameter sets of the energy curve: the configured ones, or one built
/// from the decoder section.
fn param_sets(cfg: &ExperimentConfig, cache: &DeCache) -> Result<Vec<(Protograph, ParamSet)>, CliError> {
    let tech = cfg.tech.model()?;
    if !cfg.energy_curve.is_empty() {
        return cfg
            .energy_curve
            .iter()
            .map(|s| {
                let name = s.protograph.as_deref().unwrap_or(&cfg.protograph[0]);
                Ok((load_protograph(name)?, s.clone()))
            })
            .collect();
    }
    let p = load_protograph(&cfg.protograph[0])?;
    let q = cfg.decoder.q[0];
    let eps = cfg.decoder.epsilons(&tech)?[0];
    let n = cfg.decoder.n;
    let (alpha, lambda) = resolve_pair(cfg, &p, q, eps, n, cache)?;
    let set = ParamSet {
        label: "decoder".into(),
        protograph: Some(p.name().to_string()),
        q,
        n,
        eg: e_g_of(&tech, eps),
        alpha,
        lambda,
    };
    Ok(vec![(p, set)])
}

/// Energy per information bit across the SNR sweep by the three routes.
pub fn energy_curve(cfg: &ExperimentConfig, cache: &DeCache) -> Result<Vec<EnergyCurveRow>, CliError> {
    let tech = cfg.tech.model()?;
    let stop = cfg.montecarlo.stop();
    let snrs = &cfg.sweep.snr_db;
    let mut rows = Vec::new();
    for (p, set) in param_sets(cfg, cache)? {
        let eps = tech.epsilon_of_eg(set.eg)?;
        let z = lifting_of(&p, set.n)?;
        let row = |snr: f64, route: &str, frames: u64, ber: f64, iterations: f64| EnergyCurveRow {
            protograph: p.name().to_string(),
            label: set.label.clone(),
            q: set.q,
            n: set.n,
            e_g: set.eg,
            epsilon: eps,
            alpha: set.alpha,
            lambda: set.lambda,
            snr_db: snr,
            route: route.to_string(),
            frames,
            ber,
            iterations,
            energy_pj: energy_per_info_bit(&p, set.q, set.eg, iterations, &tech).total_pj,
        };
        let pred = predict(&p, DeParams::new(set.q, eps, set.alpha, set.lambda), set.n, snrs, cfg.decoder.iters, cache)?;
        let code = if stop.max_frames > 0 { Some(lift(&p, z, cfg.seed)?) } else { None };
        for (&snr, pr) in snrs.iter().zip(&pred) {
            if let Some(code) = &code {
                for model in FAULT_MODELS {
                    let dc = decoder_config(&p, set.q, set.alpha, set.lambda, eps, cfg, model)?;
                    let r = simulate(code, &dc, snr, cfg.seed, stop)?;
                    rows.push(row(snr, route_name(model), r.frames, r.ber(), r.avg_iterations()));
                }
            }
            rows.push(row(snr, "prediction", 0, pr.final_pe(), pr.l_n));
        }
    }
    Ok(rows)
}

/// Lifts every protograph to length `N` and writes alist files, returning
/// the paths (or printing to stdout when no output directory is set).
pub fn export_alist(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>, CliError> {
    let mut paths = Vec::new();
    for p in cfg.protographs()? {
        let z = lifting_of(&p, cfg.decoder.n)?;
        let text = lift(&p, z, cfg.seed)?.to_alist();
        match &cfg.out {
            Some(dir) => {
                std::fs::create_dir_all(dir)?;
                let path = dir.join(format!("{}_N{}.alist", p.name(), cfg.decoder.n));
                std::fs::write(&path, text)?;
                paths.push(path);
            }
            None => print!("{text}"),
        }
    }
    Ok(paths)
}
