mod common;

use ldpc_energy::channel::{channel_pmf, ChannelParams, QuantSpec, QuantizedPmf};
use ldpc_energy::density_evolution::{
    apply_faults, cn_update_pmfs, vn_update_pmfs, DeEngine, DeParams, FaultOperator,
};
use ldpc_energy::protograph::Protograph;
use proptest::prelude::*;

fn toy(rows: &[&[u32]]) -> (Protograph, Vec<Vec<u32>>) {
    let rows: Vec<Vec<u32>> = rows.iter().map(|r| r.to_vec()).collect();
    (Protograph::new("toy", rows.clone()).unwrap(), rows)
}

fn first_iteration(p: &Protograph, q: u32, eps: f64, lambda: u32, channel: &[f64]) -> f64 {
    let mut engine = DeEngine::new(p, DeParams::new(q, eps, 1.0, lambda)).unwrap();
    let max = (1 << (q - 1)) - 1;
    let ch = QuantizedPmf::symmetric(max, channel.to_vec());
    engine.run_with_channel(&ch, 0.0, 1).unwrap().p_e[1]
}

#[test]
fn first_iteration_matches_enumeration_on_toy_graphs() {
    let graphs = [
        toy(&[&[1, 1, 1, 1], &[1, 1, 1, 1], &[1, 1, 1, 1]]),
        toy(&[&[1, 1, 1], &[1, 1, 1]]),
        toy(&[&[2, 1]]),
    ];
    for (p, rows) in &graphs {
        let spec = QuantSpec::new(3, p.degree_profile().guard_bits).unwrap();
        let ch = channel_pmf(&ChannelParams::new(1.0, 1.0), &spec).unwrap();
        for &eps in &[0.0, 1e-3, 0.05, 0.5] {
            for lambda in 0..=1 {
                let got = first_iteration(p, 3, eps, lambda, ch.probs());
                let want = common::first_iteration_error(rows, 3, eps, lambda as i32, ch.probs());
                assert!((got - want).abs() < 1e-12, "{rows:?} eps={eps} lambda={lambda}: {got} vs {want}");
            }
        }
    }
}

#[test]
fn first_iteration_matches_enumeration_on_s17() {
    let p = Protograph::preset("S17").unwrap();
    let rows: Vec<Vec<u32>> = (0..p.rows()).map(|j| p.row(j).to_vec()).collect();
    let spec = QuantSpec::new(3, p.degree_profile().guard_bits).unwrap();
    let ch = channel_pmf(&ChannelParams::new(1.45, 0.8), &spec).unwrap();
    let got = first_iteration(&p, 3, 2e-3, 1, ch.probs());
    let want = common::first_iteration_error(&rows, 3, 2e-3, 1, ch.probs());
    assert!((got - want).abs() < 1e-12, "{got} vs {want}");
}

#[test]
fn fault_operator_structure() {
    for q in 2..=6 {
        let bad = common::fault_operator_violations(q, &[1e-6, 1e-3, 0.05, 0.2, 0.37]);
        assert!(bad.is_empty(), "{bad:?}");
    }
}

fn pmf_strategy(max: i32) -> impl Strategy<Value = QuantizedPmf> {
    prop::collection::vec(0.0f64..1.0, (2 * max + 1) as usize).prop_filter_map("zero mass", move |w| {
        let total: f64 = w.iter().sum();
        (total > 1e-3).then(|| QuantizedPmf::symmetric(max, w.iter().map(|x| x / total).collect()))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn check_update_matches_enumeration(
        pmfs in prop::collection::vec(pmf_strategy(3), 2..=4),
        lambda in 0u32..=2,
    ) {
        let out = cn_update_pmfs(&pmfs, lambda);
        let dim = 7;
        for (k, got) in out.iter().enumerate() {
            let mut want = vec![0.0; dim];
            common::for_each_tuple(pmfs.len(), dim, |t| {
                let vals: Vec<i32> = t.iter().map(|&i| i as i32 - 3).collect();
                let p: f64 = t.iter().enumerate().map(|(e, &i)| pmfs[e].probs()[i]).product();
                let o = common::min_sum_oracle(&vals, lambda as i32)[k];
                want[(o + 3) as usize] += p;
            });
            for (g, w) in got.probs().iter().zip(&want) {
                prop_assert!((g - w).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn variable_update_matches_enumeration(
        channel in pmf_strategy(3),
        incoming in prop::collection::vec(pmf_strategy(3), 1..=3),
    ) {
        let spec = QuantSpec::new(3, 2).unwrap();
        let (ext, post) = vn_update_pmfs(&channel, &incoming, &spec);
        let p_max = spec.max_posterior();
        let n = incoming.len();
        let mut want_post = vec![0.0; (2 * p_max + 1) as usize];
        let mut want_ext = vec![vec![0.0; 7]; n];
        common::for_each_tuple(n + 1, 7, |t| {
            let p = channel.probs()[t[0]]
                * t[1..].iter().enumerate().map(|(e, &i)| incoming[e].probs()[i]).product::<f64>();
            let vals: Vec<i32> = t.iter().map(|&i| i as i32 - 3).collect();
            let sum: i32 = vals.iter().sum();
            want_post[(sum.clamp(-p_max, p_max) + p_max) as usize] += p;
            for (k, w) in want_ext.iter_mut().enumerate() {
                let e = (sum - vals[k + 1]).clamp(-3, 3);
                w[(e + 3) as usize] += p;
            }
        });
        for (g, w) in post.probs().iter().zip(&want_post) {
            prop_assert!((g - w).abs() < 1e-12);
        }
        for (got, want) in ext.iter().zip(&want_ext) {
            for (g, w) in got.probs().iter().zip(want) {
                prop_assert!((g - w).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn bitwise_fault_channel_matches_operator(q in 2u32..=6, eps in 0.0f64..=0.5, seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let max = (1i32 << (q - 1)) - 1;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let w: Vec<f64> = (0..2 * max + 1).map(|_| rng.gen::<f64>()).collect();
        let total: f64 = w.iter().sum();
        let pmf = QuantizedPmf::symmetric(max, w.iter().map(|x| x / total).collect());
        let via_matrix = FaultOperator::new(q, eps).unwrap().apply(&pmf);
        let mut fast = pmf.probs().to_vec();
        apply_faults(&mut fast, q, eps, &mut Vec::new());
        for (a, b) in via_matrix.probs().iter().zip(&fast) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn first_iteration_matches_enumeration_for_any_channel(
        channel in pmf_strategy(3),
        eps in 0.0f64..=0.5,
        lambda in 0u32..=2,
    ) {
        let (p, rows) = toy(&[&[1, 1, 1], &[1, 1, 1]]);
        let got = first_iteration(&p, 3, eps, lambda, channel.probs());
        let want = common::first_iteration_error(&rows, 3, eps, lambda as i32, channel.probs());
        prop_assert!((got - want).abs() < 1e-12, "{} vs {}", got, want);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn traces_stay_in_range(
        q in 2u32..=5,
        eps in prop_oneof![Just(0.0), 1e-6f64..0.5],
        alpha in 0.2f64..3.0,
        lambda in 0u32..=1,
        snr in -2.0f64..4.0,
    ) {
        let p = Protograph::preset("S17").unwrap();
        let trace = DeEngine::new(&p, DeParams::new(q, eps, alpha, lambda)).unwrap().run(snr, 20).unwrap();
        prop_assert_eq!(trace.p_e.len(), 21);
        for &pe in &trace.p_e {
            prop_assert!((0.0..=0.5 + 1e-9).contains(&pe), "{}", pe);
        }
    }
}
