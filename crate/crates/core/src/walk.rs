//! Finitely supported measures on isometries and the random walks they drive.
//!
//! `R_n = X_1 ⋯ X_n` with the `X_i` i.i.d. of law `μ`. Trial `j` of an
//! experiment with master seed `s` uses ChaCha stream `j` keyed by `s`, so
//! aggregates are identical for any number of worker threads.

use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::hypspace::{self, BoundaryPoint, GeometryError, Isometry, Mobius, Model, Point, Word};
use crate::montecarlo::{self, IndexSampler, TailCell};

#[derive(Debug, Error)]
pub enum WalkError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("invalid measure: {0}")]
    BadMeasure(String),
    #[error("laziness {0} outside [0, 1)")]
    BadLaziness(f64),
    #[error("invalid argument: {0}")]
    BadArgument(String),
    #[error("{0} is only available on tree models")]
    NeedsTree(&'static str),
    #[error("boundary prefix did not stabilise within {steps} steps")]
    NoConvergence { steps: usize },
    #[error("product overflowed floating point after {steps} steps")]
    Overflow { steps: usize },
}

fn finite_or_overflow(x: f64, steps: usize) -> Result<f64, WalkError> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(WalkError::Overflow { steps })
    }
}

/// A finitely supported probability measure on the isometries of one model.
#[derive(Clone, Debug)]
pub struct FiniteMeasure {
    model: Model,
    atoms: Vec<(Isometry, f64)>,
    sampler: IndexSampler,
    kappa_s: f64,
    min_weight: f64,
}

impl FiniteMeasure {
    /// Builds a measure, merging repeated atoms. Weights must be positive and
    /// sum to one within `1e-9`; they are renormalised exactly afterwards.
    pub fn new(atoms: Vec<(Isometry, f64)>) -> Result<Self, WalkError> {
        let Some(first) = atoms.first() else {
            return Err(WalkError::BadMeasure("no atoms".into()));
        };
        let model = first.0.model();
        let mut merged: Vec<(Isometry, f64)> = Vec::with_capacity(atoms.len());
        for (g, w) in atoms {
            if g.model() != model {
                return Err(GeometryError::ModelMismatch.into());
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(WalkError::BadMeasure(format!("weight {w} is not positive")));
            }
            match merged.iter_mut().find(|(h, _)| *h == g) {
                Some(slot) => slot.1 += w,
                None => merged.push((g, w)),
            }
        }
        let total: f64 = merged.iter().map(|a| a.1).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(WalkError::BadMeasure(format!("weights sum to {total}")));
        }
        for a in &mut merged {
            a.1 /= total;
        }
        let weights: Vec<f64> = merged.iter().map(|a| a.1).collect();
        let kappa_s = merged.iter().map(|a| hypspace::displacement(&a.0)).fold(0.0, f64::max);
        let min_weight = weights.iter().copied().fold(f64::INFINITY, f64::min);
        Ok(FiniteMeasure { model, sampler: IndexSampler::new(&weights), atoms: merged, kappa_s, min_weight })
    }

    /// Uniform measure on the given isometries.
    pub fn uniform(atoms: Vec<Isometry>) -> Result<Self, WalkError> {
        let w = 1.0 / atoms.len().max(1) as f64;
        Self::new(atoms.into_iter().map(|g| (g, w)).collect())
    }

    /// Simple random walk on `F_k`: uniform on `a_i^{±1}`.
    pub fn srw(rank: u8) -> Result<Self, WalkError> {
        Model::tree(rank)?;
        let atoms = (0..2 * rank)
            .map(|l| Isometry::Tree { rank, word: Word::from_letters([l]) })
            .collect();
        Self::uniform(atoms)
    }

    pub fn dirac(g: Isometry) -> Self {
        Self::new(vec![(g, 1.0)]).expect("a single atom is a valid measure")
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn atoms(&self) -> &[(Isometry, f64)] {
        &self.atoms
    }

    /// `κ_S`, the largest displacement over the support.
    pub fn kappa_s(&self) -> f64 {
        self.kappa_s
    }

    /// `m_μ`, the smallest atom weight.
    pub fn min_weight(&self) -> f64 {
        self.min_weight
    }

    /// `r δ_id + (1 − r) μ`.
    pub fn lazy(&self, r: f64) -> Result<Self, WalkError> {
        if !(0.0..1.0).contains(&r) {
            return Err(WalkError::BadLaziness(r));
        }
        if r == 0.0 {
            return Ok(self.clone());
        }
        let mut atoms = vec![(Isometry::identity(self.model), r)];
        atoms.extend(self.atoms.iter().map(|(g, w)| (g.clone(), (1.0 - r) * w)));
        Self::new(atoms)
    }

    /// The reflected measure `μ̌(g) = μ(g⁻¹)`.
    pub fn reversed(&self) -> Self {
        let atoms = self.atoms.iter().map(|(g, w)| (g.inverse(), *w)).collect();
        Self::new(atoms).expect("inversion preserves validity")
    }

    pub fn is_symmetric(&self) -> bool {
        self.atoms.iter().all(|(g, w)| {
            let gi = g.inverse();
            self.atoms.iter().any(|(h, v)| *h == gi && (v - w).abs() <= 1e-12)
        })
    }

    /// Tree atoms as letter strings, in atom order.
    pub(crate) fn tree_words(&self) -> Option<Vec<&Word>> {
        self.atoms
            .iter()
            .map(|(g, _)| match g {
                Isometry::Tree { word, .. } => Some(word),
                Isometry::Plane(_) => None,
            })
            .collect()
    }
}

#[derive(Clone, Debug)]
enum State {
    Tree(Word),
    Plane(Mobius),
}

/// Streaming random walk: holds only the current product `R_k`.
pub struct Walker<'a> {
    atoms: Atoms<'a>,
    draws: montecarlo::IndexStream<'a>,
    rng: ChaCha8Rng,
    state: State,
    steps: usize,
}

enum Atoms<'a> {
    Tree(Vec<&'a [u8]>),
    Plane(Vec<Mobius>),
}

impl<'a> Walker<'a> {
    pub fn new(mu: &'a FiniteMeasure, seed: u64, stream: u64) -> Self {
        let (atoms, state) = match mu.model {
            Model::Tree { .. } => {
                let words = mu.tree_words().expect("tree measure");
                (Atoms::Tree(words.into_iter().map(Word::letters).collect()), State::Tree(Word::identity()))
            }
            Model::Plane => {
                let ms = mu
                    .atoms
                    .iter()
                    .map(|(g, _)| match g {
                        Isometry::Plane(m) => *m,
                        Isometry::Tree { .. } => unreachable!("model checked at construction"),
                    })
                    .collect();
                (Atoms::Plane(ms), State::Plane(Mobius::IDENTITY))
            }
        };
        Walker {
            atoms,
            draws: mu.sampler.stream(),
            rng: montecarlo::stream_rng(seed, stream),
            state,
            steps: 0,
        }
    }

    #[inline]
    pub fn step(&mut self) {
        let i = self.draws.draw(&mut self.rng);
        match (&mut self.state, &self.atoms) {
            (State::Tree(w), Atoms::Tree(a)) => w.mul_assign(a[i]),
            (State::Plane(m), Atoms::Plane(a)) => *m = m.compose(&a[i]),
            _ => unreachable!(),
        }
        self.steps += 1;
    }

    pub fn run(&mut self, n: usize) {
        for _ in 0..n {
            self.step();
        }
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// `κ(R_k)`.
    pub fn kappa(&self) -> f64 {
        match &self.state {
            State::Tree(w) => w.len() as f64,
            State::Plane(m) => m.displacement(),
        }
    }

    pub fn current(&self, model: Model) -> Isometry {
        match (&self.state, model) {
            (State::Tree(w), Model::Tree { rank }) => Isometry::Tree { rank, word: w.clone() },
            (State::Plane(m), _) => Isometry::Plane(*m),
            (State::Tree(_), Model::Plane) => unreachable!(),
        }
    }

    pub(crate) fn tree_word(&self) -> Option<&Word> {
        match &self.state {
            State::Tree(w) => Some(w),
            State::Plane(_) => None,
        }
    }
}

/// A fully recorded sample path.
#[derive(Clone, Debug)]
pub struct WalkTrace {
    pub seed: u64,
    pub steps: usize,
    /// `R_1, …, R_n`.
    pub products: Vec<Isometry>,
    /// `κ(R_1), …, κ(R_n)`.
    pub kappas: Vec<f64>,
}

pub fn sample_walk(mu: &FiniteMeasure, n: usize, seed: u64) -> Result<WalkTrace, WalkError> {
    if n == 0 {
        return Err(WalkError::BadArgument("walk needs at least one step".into()));
    }
    let mut w = Walker::new(mu, seed, 0);
    let mut products = Vec::with_capacity(n);
    let mut kappas = Vec::with_capacity(n);
    for _ in 0..n {
        w.step();
        products.push(w.current(mu.model));
        kappas.push(w.kappa());
    }
    Ok(WalkTrace { seed, steps: n, products, kappas })
}

/// Mean of `κ(R_n)/n` over trials with a 99% normal half-width.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DriftEstimate {
    pub n: usize,
    pub trials: usize,
    pub mean: f64,
    pub radius: f64,
}

pub fn estimate_drift(mu: &FiniteMeasure, n: usize, trials: usize, seed: u64) -> Result<DriftEstimate, WalkError> {
    if n == 0 || trials == 0 {
        return Err(WalkError::BadArgument("n and trials must be positive".into()));
    }
    let vals = montecarlo::par_trials(trials, |j| {
        let mut w = Walker::new(mu, seed, j);
        w.run(n);
        finite_or_overflow(w.kappa() / n as f64, n)
    });
    let vals: Vec<f64> = vals.into_iter().collect::<Result<_, _>>()?;
    let (mean, radius) = montecarlo::mean_ci(&vals);
    Ok(DriftEstimate { n, trials, mean, radius })
}

/// High-precision drift used as the reference `ℓ` in tail experiments.
pub fn reference_drift(mu: &FiniteMeasure, seed: u64) -> Result<DriftEstimate, WalkError> {
    estimate_drift(mu, 100_000, 1_000, montecarlo::derive_seed(seed, "reference-drift"))
}

/// Quantity whose deviation from `nℓ` is measured.
#[derive(Clone, Debug)]
pub enum TailTarget {
    /// `κ(R_n)`.
    Displacement,
    /// `σ(R_n, ξ)`.
    Busemann(Point),
}

/// Signed deviation `X − nℓ` for every trial.
pub fn sample_deviations(
    mu: &FiniteMeasure,
    n: usize,
    ell: f64,
    trials: usize,
    seed: u64,
    target: &TailTarget,
) -> Result<Vec<f64>, WalkError> {
    if let TailTarget::Busemann(xi) = target {
        if xi.model() != mu.model {
            return Err(GeometryError::ModelMismatch.into());
        }
    }
    let nl = n as f64 * ell;
    let vals = montecarlo::par_trials(trials, |j| -> Result<f64, WalkError> {
        let mut w = Walker::new(mu, seed, j);
        w.run(n);
        let x = match target {
            TailTarget::Displacement => w.kappa(),
            TailTarget::Busemann(xi) => hypspace::busemann(&w.current(mu.model), xi)?,
        };
        finite_or_overflow(x - nl, n)
    });
    vals.into_iter().collect()
}

/// Empirical `P(|X − nℓ| ≥ nt)` over a grid of `t`, all cells sharing the
/// same trials.
pub fn empirical_tails(
    mu: &FiniteMeasure,
    n: usize,
    t_grid: &[f64],
    ell: f64,
    trials: usize,
    seed: u64,
    target: &TailTarget,
) -> Result<Vec<TailCell>, WalkError> {
    let dev: Vec<f64> = sample_deviations(mu, n, ell, trials, seed, target)?
        .into_iter()
        .map(f64::abs)
        .collect();
    Ok(montecarlo::tail_cells(n, &dev, t_grid))
}

pub fn empirical_tail(
    mu: &FiniteMeasure,
    n: usize,
    t: f64,
    ell: f64,
    trials: usize,
    seed: u64,
    target: &TailTarget,
) -> Result<TailCell, WalkError> {
    Ok(empirical_tails(mu, n, &[t], ell, trials, seed, target)?[0])
}

/// Tail cells for every `n` in `n_grid`, read off the same trajectories at
/// successive checkpoints.
pub fn empirical_tails_grid(
    mu: &FiniteMeasure,
    n_grid: &[usize],
    t_grid: &[f64],
    ell: f64,
    trials: usize,
    seed: u64,
    target: &TailTarget,
) -> Result<Vec<TailCell>, WalkError> {
    let mut ns = n_grid.to_vec();
    ns.sort_unstable();
    ns.dedup();
    if ns.first().map_or(true, |&n| n == 0) {
        return Err(WalkError::BadArgument("n grid must be nonempty and positive".into()));
    }
    if let TailTarget::Busemann(xi) = target {
        if xi.model() != mu.model {
            return Err(GeometryError::ModelMismatch.into());
        }
    }
    let per_trial = montecarlo::par_trials(trials, |j| -> Result<Vec<f64>, WalkError> {
        let mut w = Walker::new(mu, seed, j);
        let mut out = Vec::with_capacity(ns.len());
        for &n in &ns {
            w.run(n - w.steps());
            let x = match target {
                TailTarget::Displacement => w.kappa(),
                TailTarget::Busemann(xi) => hypspace::busemann(&w.current(mu.model), xi)?,
            };
            out.push(finite_or_overflow((x - n as f64 * ell).abs(), n)?);
        }
        Ok(out)
    });
    let per_trial: Vec<Vec<f64>> = per_trial.into_iter().collect::<Result<_, _>>()?;
    let mut cells = Vec::with_capacity(ns.len() * t_grid.len());
    for (k, &n) in ns.iter().enumerate() {
        let dev: Vec<f64> = per_trial.iter().map(|t| t[k]).collect();
        cells.extend(montecarlo::tail_cells(n, &dev, t_grid));
    }
    Ok(cells)
}

/// Additional steps a boundary prefix must survive before it is accepted.
pub fn stability_margin(depth: usize) -> usize {
    (4 * depth).max(24)
}

/// Default step budget for [`sample_boundary`].
pub fn boundary_budget(depth: usize) -> usize {
    1_000 * (depth + stability_margin(depth)) + 100_000
}

/// Samples the first `depth` letters of the limit word `lim R_n` (harmonic
/// measure), using stream `stream` of `seed`.
///
/// The prefix is accepted once the current word is longer than
/// `depth + margin` and the prefix has not changed for `margin` steps.
pub fn sample_boundary(
    mu: &FiniteMeasure,
    depth: usize,
    seed: u64,
    stream: u64,
    budget: usize,
) -> Result<BoundaryPoint, WalkError> {
    let Model::Tree { rank } = mu.model else {
        return Err(WalkError::NeedsTree("boundary sampling"));
    };
    if depth == 0 {
        return Err(WalkError::BadArgument("depth must be at least 1".into()));
    }
    let margin = stability_margin(depth);
    let mut w = Walker::new(mu, seed, stream);
    let mut prefix: Vec<u8> = Vec::with_capacity(depth);
    let mut stable = 0usize;
    while w.steps() < budget {
        w.step();
        let cur = w.tree_word().expect("tree walk");
        let letters = cur.letters();
        if letters.len() >= depth && prefix.len() == depth && letters[..depth] == prefix[..] {
            stable += 1;
        } else {
            prefix.clear();
            prefix.extend_from_slice(&letters[..depth.min(letters.len())]);
            stable = 0;
        }
        if stable >= margin && letters.len() > depth + margin {
            let p = Word::from_letters(prefix.iter().copied());
            return Ok(BoundaryPoint::tree(rank, p, true)?);
        }
    }
    Err(WalkError::NoConvergence { steps: budget })
}

/// Draws `samples` boundary prefixes in parallel (one stream per sample).
pub fn sample_boundaries(
    mu: &FiniteMeasure,
    depth: usize,
    samples: usize,
    seed: u64,
) -> Result<Vec<BoundaryPoint>, WalkError> {
    let budget = boundary_budget(depth);
    montecarlo::par_trials(samples, |j| sample_boundary(mu, depth, seed, j, budget))
        .into_iter()
        .collect()
}

/// Frequency of each length-`m` cylinder prefix among boundary samples.
pub fn cylinder_frequency(samples: &[BoundaryPoint], prefix: &Word) -> f64 {
    let hits = samples
        .iter()
        .filter(|b| match b {
            BoundaryPoint::Tree { prefix: p, .. } => p.common_prefix_len(prefix) == prefix.len(),
            BoundaryPoint::Plane(_) => false,
        })
        .count();
    hits as f64 / samples.len().max(1) as f64
}

/// One row of a drift continuity scan.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ContinuityRow {
    pub parameter: f64,
    pub drift: DriftEstimate,
}

#[derive(Clone, Debug, Serialize)]
pub struct ContinuityTable {
    pub rows: Vec<ContinuityRow>,
    /// Largest `|ℓ̂_{i+1} − ℓ̂_i|` between consecutive parameters.
    pub max_jump: f64,
}

/// Drift estimates across a parametrised family of measures. Every member
/// uses the same seed so that nearby parameters share randomness.
pub fn drift_continuity_scan(
    family: &[(f64, FiniteMeasure)],
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<ContinuityTable, WalkError> {
    let mut rows = Vec::with_capacity(family.len());
    for (p, mu) in family {
        rows.push(ContinuityRow { parameter: *p, drift: estimate_drift(mu, n, trials, seed)? });
    }
    let max_jump = rows
        .windows(2)
        .map(|w| (w[1].drift.mean - w[0].drift.mean).abs())
        .fold(0.0, f64::max);
    Ok(ContinuityTable { rows, max_jump })
}

/// Parses a tree measure from `(word, weight)` pairs.
pub fn tree_measure(rank: u8, atoms: &[(&str, f64)]) -> Result<FiniteMeasure, WalkError> {
    let atoms = atoms
        .iter()
        .map(|(s, w)| Ok((Isometry::parse_word(s, rank)?, *w)))
        .collect::<Result<Vec<_>, GeometryError>>()?;
    FiniteMeasure::new(atoms)
}

/// Exact cylinder mass `ν([p])` of the harmonic measure of simple random walk
/// on `F_k`: `(1/2k)(1/(2k−1))^{|p|−1}`.
pub fn srw_cylinder_mass(rank: u8, len: usize) -> f64 {
    if len == 0 {
        return 1.0;
    }
    let k = f64::from(rank);
    (1.0 / (2.0 * k)) * (1.0 / (2.0 * k - 1.0)).powi(len as i32 - 1)
}

/// Exact drift of simple random walk on `F_k`, `(k − 1)/k`.
pub fn srw_drift(rank: u8) -> f64 {
    let k = f64::from(rank);
    (k - 1.0) / k
}
