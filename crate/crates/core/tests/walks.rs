use hypwalk::hypspace::{BoundaryPoint, Isometry, Mobius, Word};
use hypwalk::montecarlo::{self, TailCell};
use hypwalk::walk::{self, FiniteMeasure, TailTarget, WalkError};
use proptest::prelude::*;

/// Distribution of `|R_n|` for lazy simple random walk on `F_k`, via the
/// birth-death chain on word length.
fn length_distribution(rank: u8, laziness: f64, n: usize) -> Vec<f64> {
    let k = f64::from(rank);
    let up = (2.0 * k - 1.0) / (2.0 * k);
    let move_p = 1.0 - laziness;
    let mut p = vec![0.0; n + 2];
    p[0] = 1.0;
    for _ in 0..n {
        let mut q = vec![0.0; n + 2];
        for (len, &mass) in p.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            q[len] += laziness * mass;
            if len == 0 {
                q[1] += move_p * mass;
            } else {
                q[len + 1] += move_p * up * mass;
                q[len - 1] += move_p * (1.0 - up) * mass;
            }
        }
        p = q;
    }
    p
}

fn tree_iso(s: &str) -> Isometry {
    Isometry::parse_word(s, 2).unwrap()
}

#[test]
fn drift_and_tail_match_birth_death_oracle() {
    let n = 100;
    let dist = length_distribution(2, 0.0, n);
    let mean: f64 = dist.iter().enumerate().map(|(l, p)| l as f64 * p).sum::<f64>() / n as f64;
    let t = 0.3;
    let tail: f64 = dist
        .iter()
        .enumerate()
        .filter(|(l, _)| (*l as f64 - 0.5 * n as f64).abs() >= n as f64 * t)
        .map(|(_, p)| p)
        .sum();
    assert!(tail < 0.01, "{tail}");

    let mu = FiniteMeasure::srw(2).unwrap();
    let est = walk::estimate_drift(&mu, n, 20_000, 5).unwrap();
    assert!((est.mean - mean).abs() <= est.radius, "{} vs {mean}", est.mean);

    let cell = walk::empirical_tail(&mu, n, t, 0.5, 20_000, 6, &TailTarget::Displacement).unwrap();
    assert!((cell.frequency - tail).abs() <= cell.wilson_radius + 1e-3, "{} vs {tail}", cell.frequency);

    let t_small = 0.1;
    let tail_small: f64 = dist
        .iter()
        .enumerate()
        .filter(|(l, _)| (*l as f64 - 0.5 * n as f64).abs() >= n as f64 * t_small)
        .map(|(_, p)| p)
        .sum();
    let cell = walk::empirical_tail(&mu, n, t_small, 0.5, 20_000, 7, &TailTarget::Displacement).unwrap();
    assert!((cell.frequency - tail_small).abs() <= cell.wilson_radius, "{} vs {tail_small}", cell.frequency);
}

#[test]
fn lazy_drift_scales() {
    let mu = FiniteMeasure::srw(2).unwrap();
    for r in [0.25, 0.5] {
        let n = 400;
        let dist = length_distribution(2, r, n);
        let oracle: f64 = dist.iter().enumerate().map(|(l, p)| l as f64 * p).sum::<f64>() / n as f64;
        let lazy = mu.lazy(r).unwrap();
        let est = walk::estimate_drift(&lazy, n, 4_000, 9).unwrap();
        assert!((est.mean - oracle).abs() <= est.radius, "r={r}: {} vs {oracle}", est.mean);
        let long = walk::estimate_drift(&lazy, 4_000, 200, 10).unwrap();
        assert!((long.mean - (1.0 - r) * 0.5).abs() <= long.radius + 2e-3, "r={r}: {}", long.mean);
    }
    assert!(matches!(mu.lazy(1.0), Err(WalkError::BadLaziness(_))));
    assert_eq!(mu.lazy(0.3).unwrap().atoms().len(), 5);
}

#[test]
fn dirac_walks_are_deterministic() {
    for (w, len) in [("a", 1.0), ("ab", 2.0), ("abAB", 4.0)] {
        let mu = FiniteMeasure::dirac(tree_iso(w));
        let trace = walk::sample_walk(&mu, 10, 1).unwrap();
        for (k, kappa) in trace.kappas.iter().enumerate() {
            assert_eq!(*kappa, (k + 1) as f64 * len);
        }
        let est = walk::estimate_drift(&mu, 50, 10, 3).unwrap();
        assert_eq!(est.mean, len);
        assert_eq!(est.radius, 0.0);
    }
    // A non-cyclically-reduced word only drifts by its cyclic core.
    // (abA)^5 = ab^5A.
    let mu = FiniteMeasure::dirac(tree_iso("abA"));
    assert_eq!(walk::sample_walk(&mu, 5, 0).unwrap().kappas[4], 7.0);

    let t = 1.0f64;
    let hyperbolic = Mobius::new(t.exp(), 0.0, 0.0, (-t).exp()).unwrap();
    let mu = FiniteMeasure::dirac(Isometry::Plane(hyperbolic));
    let trace = walk::sample_walk(&mu, 8, 0).unwrap();
    for (k, kappa) in trace.kappas.iter().enumerate() {
        assert!((kappa - 2.0 * (k + 1) as f64).abs() < 1e-9);
    }
}

#[test]
fn walks_are_reproducible() {
    let mu = walk::tree_measure(2, &[("a", 0.5), ("B", 0.3), ("ab", 0.2)]).unwrap();
    let a = walk::sample_walk(&mu, 200, 42).unwrap();
    let b = walk::sample_walk(&mu, 200, 42).unwrap();
    let c = walk::sample_walk(&mu, 200, 43).unwrap();
    assert_eq!(a.products, b.products);
    assert_ne!(a.products, c.products);
    let d1 = walk::estimate_drift(&mu, 100, 64, 1).unwrap();
    let d2 = walk::estimate_drift(&mu, 100, 64, 1).unwrap();
    assert_eq!(d1, d2);
}

#[test]
fn drift_does_not_depend_on_thread_count() {
    let mu = FiniteMeasure::srw(2).unwrap();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| walk::estimate_drift(&mu, 100, 257, 77).unwrap())
    };
    assert_eq!(run(1), run(3));
}

#[test]
fn boundary_cylinders_match_harmonic_measure() {
    let mu = FiniteMeasure::srw(2).unwrap();
    let samples = walk::sample_boundaries(&mu, 3, 6_000, 21).unwrap();
    for m in 1..=2 {
        let mass = walk::srw_cylinder_mass(2, m);
        assert!((mass - 1.0 / (4.0 * 3f64.powi(m as i32 - 1))).abs() < 1e-15);
        for w in hypwalk::hypspace::word::enumerate_ball(2, m).into_iter().filter(|w| w.len() == m) {
            let f = walk::cylinder_frequency(&samples, &w);
            let sigma = (mass * (1.0 - mass) / samples.len() as f64).sqrt();
            assert!((f - mass).abs() <= 4.0 * sigma, "{w}: {f} vs {mass}");
        }
    }

    let mu = FiniteMeasure::dirac(tree_iso("a"));
    let b = walk::sample_boundary(&mu, 3, 0, 0, walk::boundary_budget(3)).unwrap();
    match b {
        BoundaryPoint::Tree { prefix, .. } => assert_eq!(prefix, Word::parse("aaa", 2).unwrap()),
        BoundaryPoint::Plane(_) => unreachable!(),
    }
}

#[test]
fn continuity_scan_is_smooth() {
    let srw = FiniteMeasure::srw(2).unwrap();
    let family: Vec<(f64, FiniteMeasure)> =
        [0.0, 0.05, 0.1, 0.15, 0.2].iter().map(|&r| (r, srw.lazy(r).unwrap())).collect();
    let table = walk::drift_continuity_scan(&family, 1_000, 400, 8).unwrap();
    assert_eq!(table.rows.len(), 5);
    // Exact neighbours differ by 0.025; common randomness keeps noise small.
    assert!(table.max_jump < 0.04, "{}", table.max_jump);
    for w in table.rows.windows(2) {
        assert!(w[1].drift.mean < w[0].drift.mean);
    }
}

#[test]
fn drift_at_n_and_2n_agree() {
    let mu = FiniteMeasure::srw(3).unwrap();
    let a = walk::estimate_drift(&mu, 1_000, 400, 1).unwrap();
    let b = walk::estimate_drift(&mu, 2_000, 400, 2).unwrap();
    let exact = walk::srw_drift(3);
    assert!((a.mean - exact).abs() <= a.radius + 1e-3);
    assert!((b.mean - exact).abs() <= b.radius + 1e-3);
}

#[test]
fn measure_validation() {
    assert!(FiniteMeasure::new(vec![]).is_err());
    assert!(walk::tree_measure(2, &[("a", 0.5), ("b", 0.4)]).is_err());
    assert!(walk::tree_measure(2, &[("a", 1.5), ("b", -0.5)]).is_err());
    assert!(walk::tree_measure(2, &[("c", 1.0)]).is_err());
    let merged = walk::tree_measure(2, &[("a", 0.25), ("b", 0.5), ("a", 0.25)]).unwrap();
    assert_eq!(merged.atoms().len(), 2);
    assert_eq!(merged.kappa_s(), 1.0);
    assert_eq!(merged.min_weight(), 0.5);
    assert!(FiniteMeasure::srw(2).unwrap().is_symmetric());
    assert!(!merged.is_symmetric());
    let plane = FiniteMeasure::dirac(Isometry::Plane(Mobius::translation(1.0)));
    assert!(walk::sample_boundary(&plane, 2, 0, 0, 100).is_err());
}

fn tail_sorted(cells: &[TailCell]) -> bool {
    cells.windows(2).all(|w| w[0].n != w[1].n || w[1].frequency <= w[0].frequency)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn tails_are_monotone_in_t(seed in any::<u64>(), ell in 0.3f64..0.7) {
        let mu = FiniteMeasure::srw(2).unwrap();
        let t_grid = [0.0, 0.02, 0.05, 0.1, 0.2, 0.4];
        let cells = walk::empirical_tails_grid(&mu, &[10, 40], &t_grid, ell, 200, seed, &TailTarget::Displacement).unwrap();
        prop_assert!(tail_sorted(&cells));
        prop_assert!(cells.iter().filter(|c| c.t == 0.0).all(|c| c.frequency == 1.0));
    }

    #[test]
    fn grid_tails_match_single_runs(seed in any::<u64>()) {
        let mu = FiniteMeasure::srw(2).unwrap();
        let t_grid = [0.05, 0.1];
        let grid = walk::empirical_tails_grid(&mu, &[20, 50], &t_grid, 0.5, 100, seed, &TailTarget::Displacement).unwrap();
        let single = walk::empirical_tails(&mu, 50, &t_grid, 0.5, 100, seed, &TailTarget::Displacement).unwrap();
        prop_assert_eq!(&grid[2..], &single[..]);
    }

    #[test]
    fn reversal_is_an_involution(w1 in 0.05f64..0.95) {
        let mu = walk::tree_measure(2, &[("ab", w1), ("Ba", 1.0 - w1)]).unwrap();
        let back = mu.reversed().reversed();
        prop_assert_eq!(mu.atoms(), back.atoms());
    }

    #[test]
    fn wilson_interval_contains_frequency(hits in 0u64..500, extra in 0u64..500) {
        let trials = (hits + extra).max(1);
        let (lo, hi) = montecarlo::wilson_interval(hits, trials, montecarlo::Z99);
        let f = hits as f64 / trials as f64;
        prop_assert!(lo <= f + 1e-12 && f <= hi + 1e-12);
        prop_assert!((0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi));
    }
}

#[test]
fn long_plane_products_stay_finite() {
    // Entries reach e^150, far past the point where ad − bc is meaningful.
    let t = 1.0f64;
    let hyperbolic = Mobius::new(t.exp(), 0.0, 0.0, (-t).exp()).unwrap();
    let rotated = Mobius::rotation(0.7).compose(&hyperbolic).compose(&Mobius::rotation(-0.7));
    let mu = FiniteMeasure::dirac(Isometry::Plane(rotated));
    let trace = walk::sample_walk(&mu, 150, 0).unwrap();
    assert!((trace.kappas[149] - 300.0).abs() < 1e-9 * 300.0, "{}", trace.kappas[149]);

    let mixed = FiniteMeasure::uniform(vec![
        Isometry::Plane(hyperbolic),
        Isometry::Plane(hyperbolic.inverse()),
        Isometry::Plane(rotated),
        Isometry::Plane(rotated.inverse()),
    ])
    .unwrap();
    let trace = walk::sample_walk(&mixed, 300, 4).unwrap();
    assert!(trace.kappas.iter().all(|k| k.is_finite() && *k >= 0.0));
    for w in trace.kappas.windows(2) {
        assert!((w[1] - w[0]).abs() <= 2.0 + 1e-6);
    }
    let est = walk::estimate_drift(&mixed, 100, 50, 1).unwrap();
    assert!(est.mean.is_finite() && est.mean > 0.0);

    let far = walk::estimate_drift(&FiniteMeasure::dirac(Isometry::Plane(hyperbolic)), 1_000, 1, 0);
    assert!(matches!(far, Err(WalkError::Overflow { steps: 1_000 })));
}
