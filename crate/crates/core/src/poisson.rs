//! Poisson equations on finite Markov chains and the martingale
//! concentration they yield, plus Monte Carlo estimates of the cocycle
//! constant `𝔠` for tree walks.
//!
//! For an irreducible kernel `P` and observable `f` with `α = π(f)`, a
//! solution of `φ − Pφ = f − α` turns the ergodic sum into a martingale with
//! increments `φ(Z_{i+1}) − Pφ(Z_i)` plus a bounded boundary term.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::bounds::{self, Bound};
use crate::hypspace::{self, BoundaryPoint, GeometryError, Model, Point, SpacePoint};
use crate::montecarlo::{self, IndexSampler, TailCell};
use crate::walk::{self, FiniteMeasure, WalkError};

#[derive(Debug, Error)]
pub enum PoissonError {
    #[error("invalid chain: {0}")]
    BadChain(String),
    #[error("chain is reducible: state {0} cannot reach every state")]
    Reducible(usize),
    #[error("linear solve residual {0:e} exceeds tolerance")]
    Singular(f64),
    #[error("invalid argument: {0}")]
    BadArgument(String),
    #[error(transparent)]
    Walk(#[from] WalkError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// A finite Markov chain with a real observable.
#[derive(Clone, Debug)]
pub struct FiniteChain {
    p: DMatrix<f64>,
    f: Vec<f64>,
}

impl FiniteChain {
    pub fn new(p: DMatrix<f64>, f: Vec<f64>) -> Result<Self, PoissonError> {
        let s = p.nrows();
        if s == 0 || p.ncols() != s || f.len() != s {
            return Err(PoissonError::BadChain("kernel must be square and match the observable".into()));
        }
        for i in 0..s {
            let row = p.row(i);
            if row.iter().any(|&x| !(x >= 0.0 && x.is_finite())) {
                return Err(PoissonError::BadChain(format!("row {i} has a negative entry")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-12 {
                return Err(PoissonError::BadChain(format!("row {i} sums to {sum}")));
            }
        }
        if f.iter().any(|v| !v.is_finite()) {
            return Err(PoissonError::BadChain("observable must be finite".into()));
        }
        Ok(FiniteChain { p, f })
    }

    pub fn from_rows(rows: &[Vec<f64>], f: Vec<f64>) -> Result<Self, PoissonError> {
        let s = rows.len();
        if rows.iter().any(|r| r.len() != s) {
            return Err(PoissonError::BadChain("kernel must be square".into()));
        }
        let p = DMatrix::from_fn(s, s, |i, j| rows[i][j]);
        Self::new(p, f)
    }

    pub fn states(&self) -> usize {
        self.f.len()
    }

    pub fn kernel(&self) -> &DMatrix<f64> {
        &self.p
    }

    pub fn observable(&self) -> &[f64] {
        &self.f
    }

    /// Same kernel with the states relabelled: new state `i` is old `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self, PoissonError> {
        let s = self.states();
        let p = DMatrix::from_fn(s, s, |i, j| self.p[(perm[i], perm[j])]);
        Self::new(p, perm.iter().map(|&i| self.f[i]).collect())
    }

    /// Same kernel, observable shifted by a constant.
    pub fn shifted(&self, c: f64) -> Self {
        FiniteChain { p: self.p.clone(), f: self.f.iter().map(|v| v + c).collect() }
    }

    fn check_irreducible(&self) -> Result<(), PoissonError> {
        let s = self.states();
        for transpose in [false, true] {
            let mut seen = vec![false; s];
            let mut stack = vec![0usize];
            seen[0] = true;
            while let Some(i) = stack.pop() {
                for j in 0..s {
                    let w = if transpose { self.p[(j, i)] } else { self.p[(i, j)] };
                    if w > 0.0 && !seen[j] {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
            if let Some(bad) = seen.iter().position(|x| !x) {
                return Err(PoissonError::Reducible(if transpose { bad } else { 0 }));
            }
        }
        Ok(())
    }
}

/// LU solve followed by two rounds of iterative refinement.
fn refined_solve(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>, PoissonError> {
    let lu = a.clone().lu();
    let mut x = lu.solve(b).ok_or(PoissonError::Singular(f64::INFINITY))?;
    for _ in 0..2 {
        let r = b - a * &x;
        if let Some(dx) = lu.solve(&r) {
            x += dx;
        }
    }
    Ok(x)
}

/// The stationary distribution `π = πP`.
pub fn stationary(chain: &FiniteChain) -> Result<Vec<f64>, PoissonError> {
    chain.check_irreducible()?;
    let s = chain.states();
    let mut a = (DMatrix::<f64>::identity(s, s) - &chain.p).transpose();
    for j in 0..s {
        a[(s - 1, j)] = 1.0;
    }
    let mut b = DVector::zeros(s);
    b[s - 1] = 1.0;
    let pi = refined_solve(&a, &b)?;
    let pi: Vec<f64> = pi.iter().map(|&v| v.max(0.0)).collect();
    let total: f64 = pi.iter().sum();
    Ok(pi.into_iter().map(|v| v / total).collect())
}

/// Solution of `φ − Pφ = f − α` normalised by `π(φ) = 0`.
#[derive(Clone, Debug, Serialize)]
pub struct PoissonSolution {
    pub phi: Vec<f64>,
    pub pi: Vec<f64>,
    pub alpha: f64,
    /// `‖(I − P)φ − (f − α)‖_∞`.
    pub residual: f64,
    /// `‖φ‖_∞` for the `π(φ) = 0` normalisation.
    pub sup_norm: f64,
    /// `min_c ‖φ + c‖_∞ = (max φ − min φ)/2`, the smallest sup norm over all
    /// solutions.
    pub centred_sup_norm: f64,
}

/// Residual tolerance certified by [`solve_poisson`].
pub const RESIDUAL_TOL: f64 = 1e-10;

pub fn solve_poisson(chain: &FiniteChain) -> Result<PoissonSolution, PoissonError> {
    let pi = stationary(chain)?;
    let s = chain.states();
    let alpha: f64 = pi.iter().zip(&chain.f).map(|(p, f)| p * f).sum();
    // A = I − P + 1πᵀ is invertible for irreducible P, and Aφ = f − α forces π(φ) = 0.
    let pi_v = DVector::from_column_slice(&pi);
    let ones = DVector::from_element(s, 1.0);
    let a = DMatrix::<f64>::identity(s, s) - &chain.p + &ones * pi_v.transpose();
    let rhs = DVector::from_iterator(s, chain.f.iter().map(|f| f - alpha));
    let phi = refined_solve(&a, &rhs)?;
    let resid_v = (DMatrix::<f64>::identity(s, s) - &chain.p) * &phi - &rhs;
    let residual = resid_v.amax();
    if !(residual <= RESIDUAL_TOL) {
        return Err(PoissonError::Singular(residual));
    }
    let phi: Vec<f64> = phi.iter().copied().collect();
    let max = phi.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = phi.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(PoissonSolution {
        sup_norm: max.abs().max(min.abs()),
        centred_sup_norm: 0.5 * (max - min),
        phi,
        pi,
        alpha,
        residual,
    })
}

/// Random chain with strictly positive entries (hence irreducible) and an
/// observable uniform in `[−1, 1]`.
pub fn random_chain<R: Rng + ?Sized>(states: usize, rng: &mut R) -> FiniteChain {
    let rows: Vec<Vec<f64>> = (0..states)
        .map(|_| {
            let r: Vec<f64> = (0..states).map(|_| rng.gen::<f64>() + 0.01).collect();
            let t: f64 = r.iter().sum();
            let mut r: Vec<f64> = r.into_iter().map(|x| x / t).collect();
            // Absorb the rounding error so the row sums to one.
            let head: f64 = r[..states - 1].iter().sum();
            r[states - 1] = 1.0 - head;
            r
        })
        .collect();
    let f = (0..states).map(|_| rng.gen_range(-1.0..1.0)).collect();
    FiniteChain::from_rows(&rows, f).expect("positive stochastic rows")
}

/// Result of simulating the chain against the martingale bound.
#[derive(Clone, Debug, Serialize)]
pub struct AzumaReport {
    pub n: usize,
    pub cells: Vec<TailCell>,
    pub bounds: Vec<Bound>,
    /// Largest pathwise error of the martingale decomposition.
    pub max_decomposition_error: f64,
    /// Largest martingale increment `|φ(Z_{i+1}) − Pφ(Z_i)|` seen.
    pub max_increment: f64,
    /// `2 min_c ‖φ + c‖_∞`.
    pub increment_bound: f64,
}

impl AzumaReport {
    /// Whether every cell satisfies `empirical ≤ bound + slack · wilson`.
    pub fn dominated(&self, slack: f64) -> bool {
        self.cells
            .iter()
            .zip(&self.bounds)
            .all(|(c, b)| c.frequency <= b.value + slack * c.wilson_radius)
    }
}

/// Simulates `trials` trajectories `Z_1 = start, …, Z_{n+1}` and compares
/// `P(|Σ f(Z_i) − nα| ≥ nt)` with `2 exp(−nt²/(32‖φ‖²_∞))`, using the
/// solution of smallest sup norm. The decomposition
/// `Σ f(Z_i) − nα = Σ [φ(Z_{i+1}) − Pφ(Z_i)] + φ(Z_1) − φ(Z_{n+1})` is
/// evaluated on every trajectory.
pub fn azuma_experiment(
    chain: &FiniteChain,
    sol: &PoissonSolution,
    n: usize,
    trials: usize,
    t_grid: &[f64],
    start: usize,
    seed: u64,
) -> Result<AzumaReport, PoissonError> {
    let s = chain.states();
    if start >= s {
        return Err(PoissonError::BadArgument(format!("start state {start} out of range")));
    }
    if n == 0 || trials == 0 {
        return Err(PoissonError::BadArgument("n and trials must be positive".into()));
    }
    let samplers: Vec<IndexSampler> = (0..s)
        .map(|i| IndexSampler::new(&chain.p.row(i).iter().copied().collect::<Vec<_>>()))
        .collect();
    let phi = &sol.phi;
    let pphi: Vec<f64> = (0..s).map(|i| (0..s).map(|j| chain.p[(i, j)] * phi[j]).sum()).collect();
    let f = &chain.f;
    let alpha = sol.alpha;
    let per_trial = montecarlo::par_trials(trials, |j| {
        let mut rng = montecarlo::stream_rng(seed, j);
        let mut streams: Vec<_> = samplers.iter().map(IndexSampler::stream).collect();
        let mut z = start;
        let mut sum_f = 0.0;
        let mut mart = 0.0;
        let mut max_inc = 0.0f64;
        for _ in 0..n {
            sum_f += f[z];
            let next = streams[z].draw(&mut rng);
            let inc = phi[next] - pphi[z];
            max_inc = max_inc.max(inc.abs());
            mart += inc;
            z = next;
        }
        let dev = sum_f - n as f64 * alpha;
        let err = (dev - (mart + phi[start] - phi[z])).abs();
        (dev.abs(), err, max_inc)
    });
    let devs: Vec<f64> = per_trial.iter().map(|r| r.0).collect();
    let max_err = per_trial.iter().map(|r| r.1).fold(0.0, f64::max);
    let max_inc = per_trial.iter().map(|r| r.2).fold(0.0, f64::max);
    let cells = montecarlo::tail_cells(n, &devs, t_grid);
    let bounds = t_grid
        .iter()
        .map(|&t| bounds::azuma_bound(n as f64, t, sol.centred_sup_norm))
        .collect();
    Ok(AzumaReport {
        n,
        cells,
        bounds,
        max_decomposition_error: max_err,
        max_increment: max_inc,
        increment_bound: 2.0 * sol.centred_sup_norm,
    })
}

/// Monte Carlo estimate of `𝔠 = sup_x 2 ∫ (x|y)_o dν̌(y)`.
#[derive(Clone, Debug, Serialize)]
pub struct CEstimate {
    /// Largest grid value; a lower estimate of the supremum over all `x`.
    pub value: f64,
    /// 99% half-width at the maximising grid point.
    pub radius: f64,
    pub argmax: usize,
    /// `2 E(x|y)_o` and its half-width for each grid point.
    pub per_point: Vec<(f64, f64)>,
    /// Products truncated at the sample depth (each such value is a lower
    /// estimate of the true product).
    pub truncated: usize,
    pub samples: usize,
}

/// Boundary depth used for `ν̌` samples in [`estimate_c_walk`].
pub const C_SAMPLE_DEPTH: usize = 32;

/// Grid of `o`, the ends `a^∞` of every generator and inverse, and `extra`
/// boundary points drawn from the harmonic measure of `μ`.
pub fn default_c_grid(mu: &FiniteMeasure, extra: usize, seed: u64) -> Result<Vec<Point>, PoissonError> {
    let Model::Tree { rank } = mu.model() else {
        return Err(WalkError::NeedsTree("the c grid").into());
    };
    let mut grid = vec![Point::Interior(SpacePoint::basepoint(mu.model()))];
    for l in 0..2 * rank {
        let g = hypspace::Word::from_letters([l]);
        grid.push(BoundaryPoint::tree_power(rank, &g, 2 * C_SAMPLE_DEPTH)?.into());
    }
    for b in walk::sample_boundaries(mu, 2 * C_SAMPLE_DEPTH, extra, seed)? {
        grid.push(b.into());
    }
    Ok(grid)
}

pub fn estimate_c_walk(
    mu: &FiniteMeasure,
    grid: &[Point],
    samples: usize,
    seed: u64,
) -> Result<CEstimate, PoissonError> {
    if grid.is_empty() || samples == 0 {
        return Err(PoissonError::BadArgument("grid and sample count must be nonempty".into()));
    }
    let reversed = mu.reversed();
    let ys = walk::sample_boundaries(&reversed, C_SAMPLE_DEPTH, samples, seed)?;
    let o = SpacePoint::basepoint(mu.model());
    let mut truncated = 0usize;
    let mut per_point = Vec::with_capacity(grid.len());
    for x in grid {
        let mut vals = Vec::with_capacity(ys.len());
        for y in &ys {
            let yp = Point::Boundary(y.clone());
            let v = match hypspace::gromov_product(x, &yp, &o) {
                Ok(v) => v,
                Err(GeometryError::InsufficientDepth { depth }) => {
                    truncated += 1;
                    depth as f64
                }
                Err(e) => return Err(e.into()),
            };
            vals.push(2.0 * v);
        }
        per_point.push(montecarlo::mean_ci(&vals));
    }
    let (argmax, &(value, radius)) = per_point
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .0.total_cmp(&b.1 .0))
        .expect("nonempty grid");
    Ok(CEstimate { value, radius, argmax, per_point, truncated, samples })
}

/// Exact `𝔠` for simple random walk on `F_k`: `2 Σ_m ν([a^m])`, i.e.
/// `2 · (1/2k) · (2k−1)/(2k−2)`.
pub fn srw_c_exact(rank: u8) -> f64 {
    let k = f64::from(rank);
    2.0 * (1.0 / (2.0 * k)) * (2.0 * k - 1.0) / (2.0 * k - 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_state() -> FiniteChain {
        FiniteChain::from_rows(&[vec![0.9, 0.1], vec![0.5, 0.5]], vec![1.0, 0.0]).unwrap()
    }

    #[test]
    fn two_state_stationary() {
        let pi = stationary(&two_state()).unwrap();
        assert!((pi[0] - 5.0 / 6.0).abs() < 1e-14);
        assert!((pi[1] - 1.0 / 6.0).abs() < 1e-14);
    }

    #[test]
    fn two_state_poisson_by_hand() {
        // (I−P)φ = f − 5/6 gives 0.1(φ₀−φ₁) = 1/6; with 5φ₀ + φ₁ = 0 this is
        // φ₀ = 5/18, φ₁ = −25/18.
        let sol = solve_poisson(&two_state()).unwrap();
        assert!((sol.alpha - 5.0 / 6.0).abs() < 1e-14);
        assert!((sol.phi[0] - 5.0 / 18.0).abs() < 1e-12);
        assert!((sol.phi[1] + 25.0 / 18.0).abs() < 1e-12);
        assert!(sol.residual <= RESIDUAL_TOL);
    }

    #[test]
    fn degenerate_inputs() {
        let id = FiniteChain::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]], vec![0.0, 1.0]).unwrap();
        assert!(matches!(stationary(&id), Err(PoissonError::Reducible(_))));
        assert!(FiniteChain::from_rows(&[vec![0.5, 0.6], vec![0.5, 0.5]], vec![0.0, 0.0]).is_err());
        let ds = FiniteChain::from_rows(
            &[vec![0.2, 0.8, 0.0], vec![0.0, 0.2, 0.8], vec![0.8, 0.0, 0.2]],
            vec![3.0, 3.0, 3.0],
        )
        .unwrap();
        let sol = solve_poisson(&ds).unwrap();
        assert!(sol.pi.iter().all(|p| (p - 1.0 / 3.0).abs() < 1e-14));
        assert!(sol.phi.iter().all(|p| p.abs() < 1e-14));
    }

    #[test]
    fn constant_observable_never_deviates() {
        let ds = two_state().shifted(0.0);
        let c = FiniteChain::new(ds.kernel().clone(), vec![2.0, 2.0]).unwrap();
        let sol = solve_poisson(&c).unwrap();
        let rep = azuma_experiment(&c, &sol, 50, 1000, &[0.0, 0.1], 0, 3).unwrap();
        assert_eq!(rep.cells[0].frequency, 1.0);
        assert_eq!(rep.cells[1].frequency, 0.0);
    }

    #[test]
    fn srw_c_value() {
        assert!((srw_c_exact(2) - 0.75).abs() < 1e-15);
    }
}
