use std::collections::HashSet;

use ldpc_energy::protograph::{edge_set, guard_bits_for, lift, lift_circulant, LiftedCode, Protograph};
use ldpc_energy::Error;
use proptest::prelude::*;

/// Random protograph with every row and column connected and rate in (0, 1).
fn protograph_strategy() -> impl Strategy<Value = Protograph> {
    (1usize..=3)
        .prop_flat_map(|m| (Just(m), m + 1..=m + 3))
        .prop_flat_map(|(m, n)| prop::collection::vec(prop::collection::vec(0u32..=3, n), m))
        .prop_filter_map("disconnected", |rows| Protograph::new("random", rows).ok())
}

/// Four-cycles by brute force: pairs of checks sharing two or more
/// variables, `C(shared, 2)` cycles each.
fn four_cycles_oracle(code: &LiftedCode) -> usize {
    let sets: Vec<HashSet<usize>> = (0..code.n_checks())
        .map(|c| code.check_edges(c).map(|e| code.edge_var(e)).collect())
        .collect();
    let mut count = 0;
    for a in 0..sets.len() {
        for b in a + 1..sets.len() {
            let k = sets[a].intersection(&sets[b]).count();
            count += k * k.saturating_sub(1) / 2;
        }
    }
    count
}

fn check_structure(p: &Protograph, z: usize, code: &LiftedCode) -> Result<(), TestCaseError> {
    prop_assert_eq!(code.n_vars(), p.cols() * z);
    prop_assert_eq!(code.n_checks(), p.rows() * z);
    prop_assert_eq!(code.n_edges(), p.edge_count() as usize * z);
    prop_assert_eq!(edge_set(code).len(), code.n_edges());
    let d = p.degree_profile();
    for v in 0..code.n_vars() {
        prop_assert_eq!(code.var_degree(v) as u32, d.var_degrees[v / z]);
    }
    for c in 0..code.n_checks() {
        prop_assert_eq!(code.check_degree(c) as u32, d.check_degrees[c / z]);
    }
    // each protograph entry contributes s[j][i] * Z edges between its blocks
    for j in 0..p.rows() {
        for i in 0..p.cols() {
            let block = (j * z..(j + 1) * z)
                .flat_map(|c| code.check_edges(c).map(move |e| (c, e)))
                .filter(|&(_, e)| code.edge_var(e) / z == i)
                .count();
            prop_assert_eq!(block, p.get(j, i) as usize * z);
        }
    }
    let layered: usize = code.layers().iter().map(|r| r.len()).sum();
    prop_assert_eq!(layered, code.n_checks());
    Ok(())
}

#[test]
fn presets_match_their_text_form() {
    let s17 = Protograph::parse("S17", "2 3 1 1\n0 1 4 1").unwrap();
    assert_eq!(&s17, &Protograph::preset("S17").unwrap());
    let sc = Protograph::parse("Sc", "0 1 2 5\n2 2 0 2").unwrap();
    assert_eq!(sc.degree_profile().var_degrees, vec![2, 3, 2, 7]);
    assert!(matches!(Protograph::parse("one", "1"), Err(Error::InvalidProtograph(_))));
    for name in Protograph::preset_names() {
        let p = Protograph::preset(name).unwrap();
        assert_eq!(Protograph::parse(*name, &p.to_text()).unwrap(), p);
    }
}

#[test]
fn s17_lift_export() {
    let p = Protograph::preset("S17").unwrap();
    let code = lift(&p, 790, 11).unwrap();
    let alist = code.to_alist();
    assert!(alist.starts_with("3160 1580\n"));
    assert_eq!(edge_set(&LiftedCode::from_alist(&alist).unwrap()), edge_set(&code));
    assert_eq!(four_cycles_oracle(&code), 0);
}

#[test]
fn four_cycle_count_matches_oracle() {
    for name in Protograph::preset_names() {
        let p = Protograph::preset(name).unwrap();
        for z in [8, 16, 24] {
            for code in [lift(&p, z, 5).unwrap(), lift_circulant(&p, z, 5).unwrap()] {
                assert_eq!(code.count_four_cycles(), four_cycles_oracle(&code), "{name} Z={z}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn lifts_respect_the_protograph(p in protograph_strategy(), extra in 0usize..12, seed in any::<u64>()) {
        let max_mult = *p.entries().iter().max().unwrap() as usize;
        let z = max_mult.max(1) + extra;
        let code = lift(&p, z, seed).unwrap();
        check_structure(&p, z, &code)?;
        prop_assert_eq!(edge_set(&lift(&p, z, seed).unwrap()), edge_set(&code));
        let qc = lift_circulant(&p, z, seed).unwrap();
        check_structure(&p, z, &qc)?;
    }

    #[test]
    fn lifts_below_the_multiplicity_fail(p in protograph_strategy(), seed in any::<u64>()) {
        let max_mult = *p.entries().iter().max().unwrap() as usize;
        prop_assume!(max_mult >= 2);
        prop_assert!(matches!(lift(&p, max_mult - 1, seed), Err(Error::Lifting(_))));
    }

    #[test]
    fn alist_round_trip(p in protograph_strategy(), extra in 0usize..6, seed in any::<u64>()) {
        let z = *p.entries().iter().max().unwrap() as usize + extra;
        let code = lift(&p, z, seed).unwrap();
        let back = LiftedCode::from_alist(&code.to_alist()).unwrap();
        prop_assert_eq!((back.n_vars(), back.n_checks()), (code.n_vars(), code.n_checks()));
        prop_assert_eq!(edge_set(&back), edge_set(&code));
    }

    #[test]
    fn text_round_trip_and_guard_width(p in protograph_strategy()) {
        let back = Protograph::parse("random", &p.to_text()).unwrap();
        prop_assert_eq!(&back, &p);
        let d = p.degree_profile();
        let max_dv = d.max_var_degree();
        // q_s = ceil(log2(max d_v + 1))
        let mut qs = 0;
        while (1u32 << qs) < max_dv + 1 {
            qs += 1;
        }
        prop_assert_eq!(d.guard_bits, qs);
        prop_assert_eq!(guard_bits_for(max_dv), qs);
        prop_assert_eq!(d.var_degrees.iter().sum::<u32>(), p.edge_count());
        prop_assert_eq!(d.check_degrees.iter().sum::<u32>(), p.edge_count());
    }
}
