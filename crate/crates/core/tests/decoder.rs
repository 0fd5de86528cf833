mod common;

use ldpc_energy::channel::QuantSpec;
use ldpc_energy::decoder::{
    check_update, decode, stream_rng, DecodeResult, Decoder, DecoderConfig, FaultChannel, FaultModel, FaultStreams,
    Schedule,
};
use ldpc_energy::energy::TechModel;
use ldpc_energy::montecarlo::{channel_frame, simulate, StopRule};
use ldpc_energy::protograph::{lift, LiftedCode, Protograph};
use proptest::prelude::*;

fn config(p: &Protograph, q: u32, alpha: f64, lambda: u32, epsilon: f64, model: FaultModel) -> DecoderConfig {
    DecoderConfig {
        quant: QuantSpec::new(q, p.degree_profile().guard_bits).unwrap(),
        alpha,
        lambda,
        epsilon,
        max_iters: 50,
        fault_model: model,
        schedule: Schedule::RowLayered,
    }
}

/// Floating-point row-layered offset Min-Sum with syndrome stopping.
fn float_min_sum(code: &LiftedCode, llr: &[f64], lambda: f64, max_iters: usize) -> Vec<u8> {
    let mut post = llr.to_vec();
    let mut gamma = vec![0.0; code.n_edges()];
    let mut hard = vec![0u8; code.n_vars()];
    for _ in 0..max_iters {
        for c in 0..code.n_checks() {
            let edges: Vec<usize> = code.check_edges(c).collect();
            let ext: Vec<f64> = edges.iter().map(|&e| post[code.edge_var(e)] - gamma[e]).collect();
            for (k, &e) in edges.iter().enumerate() {
                let mut sign = 1.0;
                let mut min = f64::INFINITY;
                for (k2, &x) in ext.iter().enumerate() {
                    if k2 != k {
                        if x < 0.0 {
                            sign = -sign;
                        }
                        min = min.min(x.abs());
                    }
                }
                let new = sign * (min - lambda).max(0.0);
                post[code.edge_var(e)] = ext[k] + new;
                gamma[e] = new;
            }
        }
        for (h, &b) in hard.iter_mut().zip(&post) {
            *h = u8::from(b < 0.0);
        }
        if code.syndrome_is_zero(&hard) {
            break;
        }
    }
    hard
}

#[test]
fn fault_free_decoder_agrees_with_float_reference() {
    let p = Protograph::preset("S17").unwrap();
    let code = lift(&p, 790, 1).unwrap();
    let cfg = config(&p, 8, 4.0, 0, 0.0, FaultModel::None);
    let sigma2 = 10f64.powf(-0.25);
    let mut dec = Decoder::new(&code, cfg).unwrap();
    let frames = 1000;
    let mut agree = 0;
    for f in 0..frames {
        let y = channel_frame(code.n_vars(), sigma2, 5, f);
        let r = dec.decode(&y, sigma2, &mut FaultStreams::new(0.0, 5, f)).unwrap();
        let llr: Vec<f64> = y.iter().map(|v| 2.0 * v / sigma2).collect();
        if float_min_sum(&code, &llr, 0.0, 50) == r.hard_bits {
            agree += 1;
        }
    }
    assert!(agree * 100 >= frames * 99, "{agree} of {frames}");
}

#[test]
fn bits_written_follow_the_counting_rules() {
    let p = Protograph::preset("S17").unwrap();
    let z = 790;
    let code = lift(&p, z, 2).unwrap();
    let q = 5u64;
    let d = p.degree_profile();
    let qs = u64::from(d.guard_bits);
    let per_iter: u64 = z as u64
        * (d.var_degrees.iter().map(|&dv| u64::from(dv) * (q + qs)).sum::<u64>()
            + d.check_degrees.iter().map(|&dc| 2 * q - 2 + u64::from(dc)).sum::<u64>());
    assert_eq!(per_iter, 790 * (104 + 29));
    let cfg = DecoderConfig {
        max_iters: 7,
        ..config(&p, 5, 1.0, 1, 0.0, FaultModel::None)
    };
    let mut dec = Decoder::new(&code, cfg).unwrap();
    assert_eq!(dec.bits_per_iteration(), per_iter);
    let y = channel_frame(code.n_vars(), 0.7, 3, 0);
    let r = dec.decode_fixed_iterations(&y, 0.7, &mut FaultStreams::new(0.0, 3, 0)).unwrap();
    assert_eq!(r.iterations, 7);
    assert_eq!(r.bits_written, 7 * per_iter);
}

#[test]
fn maximal_faults_erase_the_message() {
    let p = Protograph::preset("S17").unwrap();
    let code = lift(&p, 100, 3).unwrap();
    for model in [FaultModel::Hardware, FaultModel::Simplified] {
        let cfg = config(&p, 5, 1.0, 1, 0.5, model);
        let pt = simulate(&code, &cfg, 1.45, 9, StopRule { min_frame_errors: u64::MAX, max_frames: 64 }).unwrap();
        assert_eq!(pt.frame_errors, 64);
        assert!((pt.ber() - 0.5).abs() < 0.1, "{model:?}: {}", pt.ber());
    }
}

/// The hardware model reads every stored posterior and check message through
/// the fault channel while the simplified model corrupts each check message
/// once, so the hardware BER is higher; at the published operating point the
/// gap stays within a small factor.
#[test]
fn hardware_faults_cost_more_than_simplified_faults() {
    let p = Protograph::preset("S17").unwrap();
    let code = lift(&p, 790, 1).unwrap();
    let eps = TechModel::sram65().epsilon_of_eg(0.82).unwrap();
    let stop = StopRule { min_frame_errors: 150, max_frames: 100_000 };
    let ber = |model| simulate(&code, &config(&p, 5, 2.0, 1, eps, model), 1.45, 21, stop).unwrap().ber();
    let (hw, simple) = (ber(FaultModel::Hardware), ber(FaultModel::Simplified));
    assert!(hw > simple && hw < 4.0 * simple, "hardware {hw}, simplified {simple}");
}

fn decode_small(
    q: u32,
    eps: f64,
    model: FaultModel,
    schedule: Schedule,
    snr_db: f64,
    seed: u64,
) -> (DecodeResult, LiftedCode, DecoderConfig, Vec<i32>) {
    let p = Protograph::preset("S36").unwrap();
    let code = lift(&p, 24, seed).unwrap();
    let cfg = DecoderConfig {
        max_iters: 20,
        schedule,
        ..config(&p, q, 1.2, 1.min(q - 2), eps, model)
    };
    let sigma2 = 10f64.powf(-snr_db / 10.0);
    let y = channel_frame(code.n_vars(), sigma2, seed, 0);
    let mut dec = Decoder::new(&code, cfg).unwrap();
    let r = dec.decode(&y, sigma2, &mut FaultStreams::new(eps, seed, 0)).unwrap();
    let post = dec.posteriors().to_vec();
    (r, code, cfg, post)
}

fn model_strategy() -> impl Strategy<Value = FaultModel> {
    prop_oneof![Just(FaultModel::Hardware), Just(FaultModel::Simplified), Just(FaultModel::None)]
}

fn schedule_strategy() -> impl Strategy<Value = Schedule> {
    prop_oneof![Just(Schedule::RowLayered), Just(Schedule::Flooding)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn check_update_matches_definition(inputs in prop::collection::vec(-31i32..=31, 2..9), lambda in 0u32..4) {
        let mut out = vec![0; inputs.len()];
        check_update(&inputs, lambda, &mut out).unwrap();
        prop_assert_eq!(out, common::min_sum_oracle(&inputs, lambda as i32));
    }

    #[test]
    fn faulty_reads_stay_in_the_alphabet(q in 2u32..=11, eps in 0.0f64..=0.5, seed in any::<u64>(), v in -1023i32..=1023) {
        let max = (1 << (q - 1)) - 1;
        let v = v.clamp(-max, max);
        let mut fc = FaultChannel::new(eps, stream_rng(seed, 0, 0));
        let r = fc.read(v, q);
        prop_assert!(r.abs() <= max);
        let mut clean = FaultChannel::new(0.0, stream_rng(seed, 0, 0));
        prop_assert_eq!(clean.read(v, q), v);
    }

    #[test]
    fn decode_results_are_consistent(
        q in 3u32..=8,
        eps in prop_oneof![Just(0.0), 1e-5f64..0.05],
        model in model_strategy(),
        schedule in schedule_strategy(),
        snr_db in -1.0f64..4.0,
        seed in 0u64..1000,
    ) {
        let (r, code, cfg, post) = decode_small(q, eps, model, schedule, snr_db, seed);
        prop_assert!(r.iterations >= 1 && r.iterations <= cfg.max_iters);
        prop_assert_eq!(r.bit_errors, r.hard_bits.iter().filter(|&&b| b == 1).count());
        prop_assert_eq!(r.converged, code.syndrome_is_zero(&r.hard_bits));
        prop_assert!(post.iter().all(|b| b.abs() <= cfg.quant.max_posterior()));
        if schedule == Schedule::RowLayered {
            let per = Decoder::new(&code, cfg).unwrap().bits_per_iteration();
            prop_assert_eq!(r.bits_written, r.iterations as u64 * per);
        }
        let (again, ..) = decode_small(q, eps, model, schedule, snr_db, seed);
        prop_assert_eq!(again, r);
    }

    #[test]
    fn fault_models_agree_without_faults(q in 3u32..=8, snr_db in -1.0f64..4.0, seed in 0u64..1000) {
        let p = Protograph::preset("S17").unwrap();
        let code = lift(&p, 16, seed).unwrap();
        let y = channel_frame(code.n_vars(), 10f64.powf(-snr_db / 10.0), seed, 0);
        let sigma2 = 10f64.powf(-snr_db / 10.0);
        let run = |model| {
            decode(&y, sigma2, &code, &config(&p, q, 1.0, 0, 0.0, model), &mut FaultStreams::new(0.0, seed, 0)).unwrap()
        };
        let hw = run(FaultModel::Hardware);
        prop_assert_eq!(&run(FaultModel::Simplified), &hw);
        prop_assert_eq!(&run(FaultModel::None), &hw);
    }
}
