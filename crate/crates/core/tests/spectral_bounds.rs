use std::collections::HashMap;

use hypwalk::bounds::{self, CMode, CorollaryKind, Extended, GeometryConstants};
use hypwalk::hypspace::{self, ModelParams, Word, PLANE_DELTA};
use hypwalk::spectral::{self, EstimateKind, SpectrumShape, DEFAULT_TABLE_BUDGET};
use hypwalk::walk::{self, FiniteMeasure};
use proptest::prelude::*;

/// `μ^{∗n}(e)` by brute-force convolution over reduced words.
fn return_probabilities(atoms: &[(Vec<u8>, f64)], n: usize) -> Vec<f64> {
    let reduce = |letters: &[u8]| {
        let mut out: Vec<u8> = Vec::new();
        for &l in letters {
            if out.last() == Some(&(l ^ 1)) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        out
    };
    let mut dist: HashMap<Vec<u8>, f64> = HashMap::from([(Vec::new(), 1.0)]);
    let mut out = vec![1.0];
    for _ in 0..n {
        let mut next = HashMap::new();
        for (g, p) in &dist {
            for (h, q) in atoms {
                let mut w = g.clone();
                w.extend_from_slice(h);
                *next.entry(reduce(&w)).or_insert(0.0) += p * q;
            }
        }
        dist = next;
        out.push(dist.get(&Vec::new()).copied().unwrap_or(0.0));
    }
    out
}

fn srw_atoms(rank: u8) -> Vec<(Vec<u8>, f64)> {
    let w = 1.0 / f64::from(2 * rank);
    (0..2 * rank).map(|l| (vec![l], w)).collect()
}

#[test]
fn moment_ratios_match_convolution_oracle() {
    let mu = FiniteMeasure::srw(2).unwrap();
    let est = spectral::return_prob_estimate(&mu, 12, DEFAULT_TABLE_BUDGET).unwrap();
    let p = return_probabilities(&srw_atoms(2), 12);
    for (j, e) in est.iter().enumerate() {
        let j = j + 1;
        let oracle = (p[2 * j] / p[2 * j - 2]).sqrt();
        assert!((e.value - oracle).abs() < 1e-12, "j={j}: {} vs {oracle}", e.value);
        assert_eq!(e.kind, EstimateKind::LowerEstimate);
    }

    // Symmetric measure with an identity atom: ν = μ ∗ μ.
    let lazy = mu.lazy(0.2).unwrap();
    let mut atoms = srw_atoms(2);
    for a in &mut atoms {
        a.1 = 0.2;
    }
    atoms.push((Vec::new(), 0.2));
    let p = return_probabilities(&atoms, 10);
    let est = spectral::return_prob_estimate(&lazy, 10, DEFAULT_TABLE_BUDGET).unwrap();
    let mut best = 0.0f64;
    for (j, e) in est.iter().enumerate() {
        let j = j + 1;
        best = best.max((p[2 * j] / p[2 * j - 2]).sqrt());
        assert!((e.value - best).abs() < 1e-12);
    }
}

#[test]
fn moment_ratios_for_non_symmetric_measure() {
    // ν = μ̌ ∗ μ for μ = ½δ_a + ½δ_b is ¼(2δ_e + δ_{Ab} + δ_{Ba}).
    let mu = walk::tree_measure(2, &[("a", 0.5), ("b", 0.5)]).unwrap();
    let nu = vec![(vec![], 0.5), (vec![1, 2], 0.25), (vec![3, 0], 0.25)];
    let p = return_probabilities(&nu, 6);
    let est = spectral::return_prob_estimate(&mu, 12, DEFAULT_TABLE_BUDGET).unwrap();
    let mut best = 0.0f64;
    for (j, e) in est.iter().enumerate() {
        best = best.max((p[j + 1] / p[j]).sqrt());
        assert!((e.value - best).abs() < 1e-12);
    }

    let dirac = walk::tree_measure(2, &[("ab", 1.0)]).unwrap();
    let est = spectral::return_prob_estimate(&dirac, 6, DEFAULT_TABLE_BUDGET).unwrap();
    assert!(est.iter().all(|e| e.value == 1.0));
}

#[test]
fn estimates_stay_below_norms() {
    let f2 = spectral::return_prob_estimate(&FiniteMeasure::srw(2).unwrap(), 20, DEFAULT_TABLE_BUDGET).unwrap();
    let f3 = spectral::return_prob_estimate(&FiniteMeasure::srw(3).unwrap(), 12, DEFAULT_TABLE_BUDGET).unwrap();
    assert!(f2.iter().all(|e| e.value <= 3f64.sqrt() / 2.0));
    assert!(f3.iter().all(|e| e.value <= 5f64.sqrt() / 3.0));
    assert!(f2.windows(2).all(|w| w[0].value <= w[1].value));
    assert_eq!(spectral::kesten_norm(3).unwrap().value, 5f64.sqrt() / 3.0);

    let lazy = FiniteMeasure::srw(2).unwrap().lazy(0.2).unwrap();
    let lower = spectral::return_prob_estimate(&lazy, 12, DEFAULT_TABLE_BUDGET).unwrap();
    let upper = spectral::uniform_tits_upper(0.2, 1).unwrap();
    assert!(upper.is_upper());
    assert!(lower.last().unwrap().value <= upper.value);

    let exact = spectral::kesten_norm(2).unwrap();
    let lazy_exact = spectral::lazy_norm(&exact, 0.2, SpectrumShape::Symmetric).unwrap();
    assert!((lazy_exact.value - (0.2 + 0.8 * exact.value)).abs() < 1e-15);
    assert!(lower.last().unwrap().value <= lazy_exact.value);
    assert!(spectral::lazy_norm(&lower[0], 0.2, SpectrumShape::Unknown).is_err());
    assert_eq!(spectral::lazy_norm(&upper, 0.2, SpectrumShape::Unknown).unwrap().kind, EstimateKind::UpperBound);
}

#[test]
fn tits_upper_inputs() {
    assert!(spectral::uniform_tits_upper(0.0, 1).is_err());
    assert!(spectral::uniform_tits_upper(0.5, 0).is_err());
    let u = spectral::uniform_tits_upper(1.0, 1).unwrap().value;
    assert!((u - (3f64.sqrt() / 2.0).sqrt()).abs() < 1e-15);
}

#[test]
fn a0_matches_ball_counts() {
    let tree = ModelParams::tree(2).unwrap();
    // R = 4 + D₀ = 5, so A₀² = |B_10| / |B_5| with |B_r| = 2·3^r − 1.
    let oracle = ((2.0 * 3f64.powi(10) - 1.0) / (2.0 * 3f64.powi(5) - 1.0)).sqrt();
    assert!((bounds::a0(&tree) - oracle).abs() < 1e-12);

    let plane = ModelParams::plane(PLANE_DELTA).unwrap();
    let r = 14.0 * PLANE_DELTA + 4.0 + plane.d0;
    let area = |rad: f64| {
        let steps = 200_000;
        let h = rad / steps as f64;
        (0..steps).map(|k| 2.0 * std::f64::consts::PI * ((k as f64 + 0.5) * h).sinh() * h).sum::<f64>()
    };
    let oracle = (area(2.0 * r) / area(r)).sqrt();
    assert!((bounds::a0(&plane) - oracle).abs() / oracle < 1e-6);
}

#[test]
fn tree_cover_is_valid() {
    let targets = hypspace::word::enumerate_ball(2, 6);
    let candidates = hypspace::word::enumerate_ball(2, 7);
    let dist = |x: &Word, y: &Word| x.inverse().mul(y).len() as f64;
    let chosen = bounds::greedy_cover(&targets, &candidates, 1.0, dist);
    for t in &targets {
        assert!(chosen.iter().any(|&c| dist(&candidates[c], t) <= 1.0));
    }
    assert_eq!(bounds::tree_cover_size(2, 1.0), chosen.len());
    let gc = GeometryConstants::for_model(&ModelParams::tree(2).unwrap()).unwrap();
    assert_eq!(gc.k0, chosen.len() as u64);
    // A ball of radius 1 holds 5 vertices.
    assert!(gc.k0 as usize * 5 >= targets.len());
}

#[test]
fn infinite_constants_at_lambda_one() {
    assert!(bounds::d_const(2.0, 1.0, 3.0).unwrap().is_infinite());
    assert!(bounds::c_const(2.0, 1.0, 3.0, CMode::Infimum).unwrap().is_infinite());
    let b = bounds::concentration_bound(1e6, 1.0, 1.0, Extended::Infinite);
    assert!(b.vacuous && b.value == 1.0);
    assert_eq!(bounds::rate_lower_bound(0.9, 0.5, 1.0, Extended::Infinite), 0.0);
    assert_eq!(format!("{}", Extended::Infinite), "inf");
    assert_eq!(serde_json::to_string(&Extended::Infinite).unwrap(), "\"inf\"");
}

fn tree_gc() -> GeometryConstants {
    GeometryConstants::for_model(&ModelParams::tree(2).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn constants_monotone_in_lambda(kappa in 0.1f64..10.0, l1 in 0.01f64..0.98, dl in 0.001f64..0.5, a0 in 1.0f64..100.0) {
        let l2 = (l1 + dl).min(0.999);
        let d1 = bounds::d_const(kappa, l1, a0).unwrap().finite().unwrap();
        let d2 = bounds::d_const(kappa, l2, a0).unwrap().finite().unwrap();
        prop_assert!(d1 <= d2);
        let c1 = bounds::c_const(kappa, l1, a0, CMode::ClosedForm).unwrap().finite().unwrap();
        let c2 = bounds::c_const(kappa, l2, a0, CMode::ClosedForm).unwrap().finite().unwrap();
        prop_assert!(c1 <= c2);
        let inf = bounds::c_const(kappa, l1, a0, CMode::Infimum).unwrap().finite().unwrap();
        prop_assert!(inf > 0.0 && inf <= c1 * (1.0 + 1e-12));
        let cc = (kappa + c1).powi(2) * 32.0;
        prop_assert!(cc <= kappa * kappa * d1 * (1.0 + 1e-12));
    }

    #[test]
    fn concentration_monotone(n in 1.0f64..1e6, dn in 0.0f64..1e5, t in 0.0f64..2.0, dt in 0.0f64..1.0, kappa in 0.1f64..5.0, d in 1.0f64..1e6) {
        let d = Extended::Finite(d);
        let base = bounds::concentration_bound(n, t, kappa, d).value;
        prop_assert!(bounds::concentration_bound(n + dn, t, kappa, d).value <= base);
        prop_assert!(bounds::concentration_bound(n, t + dt, kappa, d).value <= base);
        prop_assert!((0.0..=1.0).contains(&base));
        let c = 3.0;
        let s = bounds::simple_concentration_bound(n, t, kappa, c).value;
        prop_assert!(bounds::simple_concentration_bound(n + dn, t + dt, kappa, c).value <= s);
        prop_assert!(bounds::azuma_bound(n + dn, t + dt, c).value <= bounds::azuma_bound(n, t, c).value);
    }

    #[test]
    fn rate_is_symmetric(ell in 0.0f64..1.0, h in 0.0f64..1.0, kappa in 0.1f64..5.0, d in 1.0f64..1e4) {
        let d = Extended::Finite(d);
        let a = bounds::rate_lower_bound(ell + h, ell, kappa, d);
        let b = bounds::rate_lower_bound(ell - h, ell, kappa, d);
        prop_assert!((a - b).abs() <= 1e-15 * a.max(1.0));
        prop_assert!(a >= 0.0);
    }

    #[test]
    fn frostman_scales_with_kappa(kappa in 0.1f64..10.0, scale in 0.1f64..10.0, l in 0.01f64..0.99) {
        let pairs = [(0.0, l), (0.5, (l + 1.0) / 2.0)];
        let a = bounds::frostman_exponent(kappa, &pairs).unwrap();
        let b = bounds::frostman_exponent(kappa * scale, &pairs).unwrap();
        prop_assert!((a.value - scale * b.value).abs() <= 1e-12 * a.value.max(1.0));
        prop_assert_eq!(a.argmax_r, 0.0);
    }

    #[test]
    fn drift_bound_linear_in_d1(factor in 1.0f64..5.0, l in 0.01f64..0.99) {
        let gc = tree_gc();
        let mut scaled = gc.clone();
        scaled.d1 *= factor;
        let pairs = [(0.0, l), (0.25, 0.25 + 0.75 * l)];
        let a = bounds::drift_lower_bound(&gc, &pairs).unwrap().value;
        let b = bounds::drift_lower_bound(&scaled, &pairs).unwrap().value;
        prop_assert!((b - factor * a).abs() <= 1e-12 * b.max(1.0));
    }

    #[test]
    fn freeness_combiner_monotone(ell in 0.1f64..1.0, n in 1usize..10_000, dn in 0usize..10_000, d in 1.0f64..1e5) {
        let p = |m: usize, eps: f64| bounds::uld_base_tail(m as f64, eps, 1.0, Extended::Finite(d));
        let a = bounds::freeness_prob_lb(p, ell, 0.0, n, None).combiner.value;
        let b = bounds::freeness_prob_lb(p, ell, 0.0, n + dn, None).combiner.value;
        prop_assert!(a <= b);
        let tc = bounds::tits_t_n0(1.0, 0.75, &tree_gc()).unwrap();
        let e1 = bounds::freeness_prob_lb(p, ell, 0.0, n, Some(&tc)).exponential.unwrap().value;
        let e2 = bounds::freeness_prob_lb(p, ell, 0.0, n + dn, Some(&tc)).exponential.unwrap().value;
        prop_assert!(e1 <= e2);
    }

    #[test]
    fn corollary_packs_are_sane(n_prime in 1u32..4, m in 0.01f64..0.5, a0 in 1.0f64..100.0) {
        for kind in [CorollaryKind::HyperbolicGroup { n_prime }, CorollaryKind::RankOne { n_prime }] {
            let pack = bounds::corollary_constants(kind, a0).unwrap();
            let s = pack.spectral_bound(m);
            prop_assert!(s > 0.0 && s <= 1.0);
            prop_assert!(pack.spectral_bound(1.0) < 1.0);
            prop_assert!(pack.spectral_bound(m) >= pack.spectral_bound(m.min(0.5) * 1.5));
            let b1 = pack.tail_bound(1e3, 0.5, 2.0, m).value;
            let b2 = pack.tail_bound(1e9, 0.5, 2.0, m).value;
            prop_assert!(b2 <= b1);
        }
    }
}
