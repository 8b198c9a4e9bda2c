use hypwalk::hypspace::{BoundaryPoint, Point, Word};
use hypwalk::montecarlo::stream_rng;
use hypwalk::poisson::{self, FiniteChain, PoissonError};
use hypwalk::walk::{self, FiniteMeasure};
use proptest::prelude::*;

fn mat_vec(chain: &FiniteChain, v: &[f64]) -> Vec<f64> {
    let p = chain.kernel();
    (0..v.len()).map(|i| (0..v.len()).map(|j| p[(i, j)] * v[j]).sum()).collect()
}

/// `π` by power iteration on the row vector.
fn power_stationary(chain: &FiniteChain) -> Vec<f64> {
    let s = chain.states();
    let p = chain.kernel();
    let mut pi = vec![1.0 / s as f64; s];
    for _ in 0..5_000 {
        pi = (0..s).map(|j| (0..s).map(|i| pi[i] * p[(i, j)]).sum()).collect();
    }
    pi
}

/// `φ = Σ_k P^k (f − α)`, then centred so that `π(φ) = 0`.
fn series_poisson(chain: &FiniteChain) -> Vec<f64> {
    let pi = power_stationary(chain);
    let alpha: f64 = pi.iter().zip(chain.observable()).map(|(p, f)| p * f).sum();
    let mut term: Vec<f64> = chain.observable().iter().map(|f| f - alpha).collect();
    let mut phi = vec![0.0; term.len()];
    for _ in 0..5_000 {
        for (a, t) in phi.iter_mut().zip(&term) {
            *a += t;
        }
        term = mat_vec(chain, &term);
    }
    let mean: f64 = pi.iter().zip(&phi).map(|(p, v)| p * v).sum();
    phi.iter().map(|v| v - mean).collect()
}

#[test]
fn solution_matches_series_oracle() {
    let mut rng = stream_rng(3, 0);
    for states in [2, 3, 5, 8] {
        let chain = poisson::random_chain(states, &mut rng);
        let sol = poisson::solve_poisson(&chain).unwrap();
        let oracle = series_poisson(&chain);
        for (a, b) in sol.phi.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
        let pi = power_stationary(&chain);
        for (a, b) in sol.pi.iter().zip(&pi) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(sol.residual <= poisson::RESIDUAL_TOL);
    }
}

#[test]
fn periodic_chain_is_solved() {
    // Deterministic 3-cycle: aperiodicity is not needed for the Poisson equation.
    let rows = vec![vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0], vec![1.0, 0.0, 0.0]];
    let chain = FiniteChain::from_rows(&rows, vec![1.0, 0.0, 0.0]).unwrap();
    let sol = poisson::solve_poisson(&chain).unwrap();
    assert!((sol.alpha - 1.0 / 3.0).abs() < 1e-14);
    // φ − Pφ = f − 1/3 with π(φ) = 0: φ = (1/3, −1/3, 0).
    let expected = [1.0 / 3.0, -1.0 / 3.0, 0.0];
    for (a, b) in sol.phi.iter().zip(expected) {
        assert!((a - b).abs() < 1e-12, "{:?}", sol.phi);
    }
}

#[test]
fn bad_chains_are_rejected() {
    let reducible = FiniteChain::from_rows(&[vec![1.0, 0.0], vec![0.5, 0.5]], vec![0.0, 1.0]).unwrap();
    assert!(matches!(poisson::solve_poisson(&reducible), Err(PoissonError::Reducible(_))));
    assert!(FiniteChain::from_rows(&[vec![0.5, 0.4], vec![0.5, 0.5]], vec![0.0, 1.0]).is_err());
    assert!(FiniteChain::from_rows(&[vec![1.0]], vec![0.0, 1.0]).is_err());
}

#[test]
fn azuma_simulation_is_consistent() {
    let mut rng = stream_rng(4, 0);
    let chain = poisson::random_chain(4, &mut rng);
    let sol = poisson::solve_poisson(&chain).unwrap();
    let t_grid = [0.02, 0.05, 0.1, 0.2];
    let report = poisson::azuma_experiment(&chain, &sol, 500, 2_000, &t_grid, 0, 11).unwrap();
    assert!(report.max_decomposition_error <= 1e-9);
    assert!(report.max_increment <= report.increment_bound + 1e-12);
    assert!(report.dominated(3.0));
    assert_eq!(report.cells.len(), t_grid.len());
    let again = poisson::azuma_experiment(&chain, &sol, 500, 2_000, &t_grid, 0, 11).unwrap();
    assert_eq!(report.cells, again.cells);
    assert!(poisson::azuma_experiment(&chain, &sol, 10, 10, &t_grid, 9, 0).is_err());
}

#[test]
fn c_matches_cylinder_sum() {
    // 2 Σ_m ν([a^m]) with ν([a^m]) = (1/4)(1/3)^{m−1}.
    let oracle: f64 = 2.0 * (1..60).map(|m| 0.25 * (1.0f64 / 3.0).powi(m - 1)).sum::<f64>();
    assert!((poisson::srw_c_exact(2) - oracle).abs() < 1e-14);

    let mu = FiniteMeasure::srw(2).unwrap();
    let grid = poisson::default_c_grid(&mu, 0, 1).unwrap();
    assert_eq!(grid.len(), 5);
    let est = poisson::estimate_c_walk(&mu, &grid, 20_000, 2).unwrap();
    assert_eq!(est.per_point[0].0, 0.0);
    for &(v, r) in &est.per_point[1..] {
        assert!((v - oracle).abs() <= r + 0.005, "{v} ± {r} vs {oracle}");
    }
    assert!(est.value >= est.per_point[1].0);

    // For δ_a every sample is a^∞, so the end a^∞ sees products at the full depth.
    let dirac = walk::tree_measure(2, &[("A", 1.0)]).unwrap();
    let end = BoundaryPoint::tree_power(2, &Word::parse("a", 2).unwrap(), 64).unwrap();
    let est = poisson::estimate_c_walk(&dirac, &[Point::Boundary(end)], 10, 0).unwrap();
    assert_eq!(est.value, 2.0 * poisson::C_SAMPLE_DEPTH as f64);
    assert_eq!(est.truncated, 10);
}

fn chain_strategy() -> impl Strategy<Value = FiniteChain> {
    (2usize..7, any::<u64>()).prop_map(|(s, seed)| poisson::random_chain(s, &mut stream_rng(seed, 0)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn stationary_is_invariant(chain in chain_strategy()) {
        let pi = poisson::stationary(&chain).unwrap();
        let p = chain.kernel();
        let s = chain.states();
        for j in 0..s {
            let v: f64 = (0..s).map(|i| pi[i] * p[(i, j)]).sum();
            prop_assert!((v - pi[j]).abs() < 1e-12);
        }
        prop_assert!((pi.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn relabelling_permutes_solution(chain in chain_strategy(), rot in 0usize..7) {
        let s = chain.states();
        let perm: Vec<usize> = (0..s).map(|i| (i + rot) % s).collect();
        let a = poisson::solve_poisson(&chain).unwrap();
        let b = poisson::solve_poisson(&chain.permuted(&perm).unwrap()).unwrap();
        for i in 0..s {
            prop_assert!((b.phi[i] - a.phi[perm[i]]).abs() < 1e-9);
        }
        prop_assert!((a.alpha - b.alpha).abs() < 1e-12);
    }

    #[test]
    fn shifting_observable_moves_alpha(chain in chain_strategy(), c in -5.0f64..5.0) {
        let a = poisson::solve_poisson(&chain).unwrap();
        let b = poisson::solve_poisson(&chain.shifted(c)).unwrap();
        prop_assert!((b.alpha - a.alpha - c).abs() < 1e-12);
        for (x, y) in a.phi.iter().zip(&b.phi) {
            prop_assert!((x - y).abs() < 1e-9);
        }
        prop_assert!(a.centred_sup_norm <= a.sup_norm + 1e-15);
    }

    #[test]
    fn poisson_residual_is_small(chain in chain_strategy()) {
        let sol = poisson::solve_poisson(&chain).unwrap();
        let pphi = mat_vec(&chain, &sol.phi);
        for i in 0..chain.states() {
            let lhs = sol.phi[i] - pphi[i];
            let rhs = chain.observable()[i] - sol.alpha;
            prop_assert!((lhs - rhs).abs() < 1e-10);
        }
        let centred: f64 = sol.pi.iter().zip(&sol.phi).map(|(p, v)| p * v).sum();
        prop_assert!(centred.abs() < 1e-10);
    }
}
