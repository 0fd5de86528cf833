use ldpc_energy::cache::DeCache;
use ldpc_energy::channel::p0_of_snr;
use ldpc_energy::density_evolution::DeParams;
use ldpc_energy::energy::TechModel;
use ldpc_energy::finite_length::{
    build_grid, build_panel_grid, finite_perf, grid_for, DirectTraces, FnTraces, LatticeSpec, SnrProfile,
    DEFAULT_K_SIGMA,
};
use ldpc_energy::protograph::Protograph;
use ldpc_energy::Error;
use proptest::prelude::*;

const L: usize = 50;

/// Smooth synthetic waterfall in the crossover probability `x`.
fn waterfall(x: f64, center: f64, width: f64, l: usize) -> f64 {
    let s = 1.0 / (1.0 + (-(x - center) / width).exp());
    0.2 * s * (1.0 - 0.5 / (1.0 + l as f64))
}

/// Composite Simpson integral of `f(x) * N(x; p0, s^2)` over `[lo, hi]`.
fn simpson(f: impl Fn(f64) -> f64, p0: f64, s: f64, lo: f64, hi: f64) -> f64 {
    let n = 200_000;
    let h = (hi - lo) / n as f64;
    let g = |x: f64| {
        let z = (x - p0) / s;
        f(x) * (-0.5 * z * z).exp() / (s * (2.0 * std::f64::consts::PI).sqrt())
    };
    let mut acc = g(lo) + g(hi);
    for k in 1..n {
        acc += g(lo + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

#[test]
fn quadrature_matches_simpson_oracle() {
    let (snr, n) = (1.45, 3160u64);
    let p0 = p0_of_snr(snr);
    let center = p0 - 0.003;
    let src = FnTraces(move |s: f64| (0..=2 * L).map(|l| waterfall(p0_of_snr(s), center, 0.002, l)).collect());
    for grid in [
        build_grid(snr, n, 64, DEFAULT_K_SIGMA).unwrap(),
        build_panel_grid(snr, n, 8, DEFAULT_K_SIGMA, &[]).unwrap(),
    ] {
        let perf = finite_perf(&src, &grid, L).unwrap();
        let lo = grid.p0 - DEFAULT_K_SIGMA * grid.sigma;
        let hi = grid.p0 + DEFAULT_K_SIGMA * grid.sigma;
        let want = simpson(|x| waterfall(x, center, 0.002, 2 * L), grid.p0, grid.sigma, lo, hi);
        assert!((perf.final_pe() - want).abs() < 1e-9 * want, "{} vs {want}", perf.final_pe());
    }
}

struct Setup {
    protograph: Protograph,
    params: DeParams,
    cache: DeCache,
}

/// S17 at the published energy factor with the optimizer's (alpha, lambda).
fn s17_operating_point() -> Setup {
    let eps = TechModel::sram65().epsilon_of_eg(0.82).unwrap();
    Setup {
        protograph: Protograph::preset("S17").unwrap(),
        params: DeParams::new(5, eps, 2.0, 1),
        cache: DeCache::in_memory(),
    }
}

#[test]
fn s17_operating_point_is_feasible_and_converges() {
    let s = s17_operating_point();
    let lattice = LatticeSpec::covering(1.45, 1000, DEFAULT_K_SIGMA).unwrap();
    let profile = SnrProfile::cached(&s.protograph, s.params, 2 * L, &lattice, &s.cache).unwrap();
    let coarse = finite_perf(profile.as_ref(), &grid_for(profile.as_ref(), 1.45, 3160, 8).unwrap(), L).unwrap();
    assert!(coarse.final_pe() <= 1e-3, "{}", coarse.final_pe());
    // iterations back-solved from the published energy: 79 / (59.25 * 0.82 * 0.156)
    let want = 79.0 / (59.25 * 0.82 * 0.156);
    assert!((coarse.l_n / want - 1.0).abs() < 0.3, "L_N = {}", coarse.l_n);
    assert!(coarse.l_n >= 0.0 && coarse.l_n <= L as f64);

    let outside = grid_for(profile.as_ref(), 1.45, 100, 8).unwrap();
    assert!(matches!(finite_perf(profile.as_ref(), &outside, L), Err(Error::MissingTrace(_))));

    let fine = finite_perf(profile.as_ref(), &grid_for(profile.as_ref(), 1.45, 3160, 16).unwrap(), L).unwrap();
    assert!((fine.final_pe() / coarse.final_pe() - 1.0).abs() < 1e-4);
    assert!((fine.l_n / coarse.l_n - 1.0).abs() < 1e-4);
}

#[test]
fn long_codes_reach_the_infinite_length_limit() {
    let s = s17_operating_point();
    let direct = DirectTraces {
        protograph: &s.protograph,
        params: s.params,
        l_flood: 2 * L,
        cache: &s.cache,
    };
    let p_inf = s.cache.trace(&s.protograph, s.params, 1.45, 2 * L).unwrap().final_pe();
    let grid = build_panel_grid(1.45, 10_000_000, 8, DEFAULT_K_SIGMA, &[]).unwrap();
    let perf = finite_perf(&direct, &grid, L).unwrap();
    assert!((perf.final_pe() - p_inf).abs() / p_inf.max(1e-12) < 0.05, "{} vs {p_inf}", perf.final_pe());
}

proptest! {
    #[test]
    fn predictions_stay_in_range(
        snr in -1.0f64..4.0,
        n in 10u64..1_000_000,
        shift in -0.02f64..0.02,
        width in 1e-4f64..0.02,
    ) {
        let p0 = p0_of_snr(snr);
        let src = FnTraces(move |s: f64| (0..=2 * L).map(|l| waterfall(p0_of_snr(s), p0 + shift, width, l)).collect());
        let grid = build_panel_grid(snr, n, 8, DEFAULT_K_SIGMA, &[]).unwrap();
        prop_assert!(grid.nodes.iter().all(|&x| x > 0.0 && x < 0.5));
        let perf = finite_perf(&src, &grid, L).unwrap();
        prop_assert!(perf.p_en.iter().all(|&p| (0.0..=1.0).contains(&p)));
        prop_assert!(perf.l_n >= 0.0 && perf.l_n <= L as f64 + 1e-9);
        prop_assert!(perf.mass <= 1.0 + 1e-12);
    }

    #[test]
    fn constant_traces_integrate_to_mass(snr in -1.0f64..4.0, n in 10u64..1_000_000, c in 0.0f64..0.5) {
        let grid = build_panel_grid(snr, n, 8, DEFAULT_K_SIGMA, &[]).unwrap();
        let perf = finite_perf(&FnTraces(move |_| vec![c; 2 * L + 1]), &grid, L).unwrap();
        prop_assert!((perf.final_pe() - c * grid.mass()).abs() < 1e-12);
    }
}
