//! Ping-pong certificates for two-generator free subgroups, a brute-force
//! word oracle to check them, the deviation-tail combiners and the
//! experiment pairing two independent random walks.

use serde::Serialize;
use thiserror::Error;

use crate::bounds::{self, Bound, Extended, FreenessBounds, GeometryConstants, TitsConstants};
use crate::hypspace::{self, GeometryError, Isometry, ModelParams, Point, SpacePoint, Word};
use crate::montecarlo;
use crate::walk::{FiniteMeasure, Walker};

#[derive(Debug, Error)]
pub enum PingPongError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Bounds(#[from] bounds::BoundsError),
    #[error("invalid argument: {0}")]
    BadArgument(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    CertifiedFree,
    NotCertified,
}

/// `(γ₁^{ε₁}·o | γ₂^{ε₂}·o)_o` for one sign pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CrossProduct {
    pub eps1: i8,
    pub eps2: i8,
    pub value: f64,
}

/// Every quantity entering the ping-pong conditions for a pair `(γ₁, γ₂)`:
///
/// 1. `(γ_i^{ε₁}·o | γ_j^{ε₂}·o)_o ≤ D` for `i ≠ j`,
/// 2. `(γ_i·o | γ_i⁻¹·o)_o ≤ D`,
/// 3. `0 < ½ max κ(γ_i) < min κ(γ_i) − D − δ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FreenessCertificate {
    pub verdict: Verdict,
    /// The `D` at which the conditions were checked (the midpoint of the
    /// feasible interval when searched).
    pub witness: Option<f64>,
    /// Condition 1. The product is symmetric, so the ordered pairs `(1,2)`
    /// and `(2,1)` share the four values.
    pub cross: [CrossProduct; 4],
    /// Condition 2, for `γ₁` and `γ₂`.
    pub self_products: [f64; 2],
    /// `κ(γ₁), κ(γ₂)`.
    pub kappas: [f64; 2],
    pub delta: f64,
    /// Conditions 1 and 2 hold for `D ≥ lower`.
    pub lower: f64,
    /// Condition 3 holds for `D < upper` (when `max κ > 0`).
    pub upper: f64,
}

impl FreenessCertificate {
    pub fn is_free(&self) -> bool {
        self.verdict == Verdict::CertifiedFree
    }

    /// Whether every condition holds at `d`.
    pub fn holds_at(&self, d: f64) -> bool {
        let max_k = self.kappas[0].max(self.kappas[1]);
        max_k > 0.0 && self.lower <= d && d < self.upper
    }
}

fn pair_product(x: &Isometry, y: &Isometry, o: &SpacePoint) -> Result<f64, GeometryError> {
    if let (Isometry::Tree { word: a, .. }, Isometry::Tree { word: b, .. }) = (x, y) {
        return Ok(a.common_prefix_len(b) as f64);
    }
    hypspace::gromov_product(&Point::Interior(x.orbit_point()), &Point::Interior(y.orbit_point()), o)
}

fn evaluate(g1: &Isometry, g2: &Isometry, params: &ModelParams) -> Result<FreenessCertificate, PingPongError> {
    let model = params.model;
    if g1.model() != model || g2.model() != model {
        return Err(GeometryError::ModelMismatch.into());
    }
    let o = SpacePoint::basepoint(model);
    let gs = [[g1.clone(), g1.inverse()], [g2.clone(), g2.inverse()]];
    let mut cross = [CrossProduct { eps1: 0, eps2: 0, value: 0.0 }; 4];
    let signs = [(1i8, 1i8), (1, -1), (-1, 1), (-1, -1)];
    for (slot, &(e1, e2)) in cross.iter_mut().zip(&signs) {
        let a = &gs[0][usize::from(e1 < 0)];
        let b = &gs[1][usize::from(e2 < 0)];
        *slot = CrossProduct { eps1: e1, eps2: e2, value: pair_product(a, b, &o)? };
    }
    let self_products = [pair_product(&gs[0][0], &gs[0][1], &o)?, pair_product(&gs[1][0], &gs[1][1], &o)?];
    let kappas = [hypspace::displacement(g1), hypspace::displacement(g2)];
    let lower = cross.iter().map(|c| c.value).chain(self_products).fold(0.0, f64::max);
    let (kmin, kmax) = (kappas[0].min(kappas[1]), kappas[0].max(kappas[1]));
    let upper = kmin - params.delta - 0.5 * kmax;
    Ok(FreenessCertificate {
        verdict: Verdict::NotCertified,
        witness: None,
        cross,
        self_products,
        kappas,
        delta: params.delta,
        lower,
        upper,
    })
}

/// Checks the ping-pong conditions at the given `d`.
pub fn certify_free(
    g1: &Isometry,
    g2: &Isometry,
    d: f64,
    params: &ModelParams,
) -> Result<FreenessCertificate, PingPongError> {
    let mut cert = evaluate(g1, g2, params)?;
    cert.witness = Some(d);
    if cert.holds_at(d) {
        cert.verdict = Verdict::CertifiedFree;
    }
    Ok(cert)
}

/// Searches the feasible interval `[lower, upper)` for `D` and certifies iff
/// it is nonempty, with the midpoint as witness.
pub fn certify_free_search(
    g1: &Isometry,
    g2: &Isometry,
    params: &ModelParams,
) -> Result<FreenessCertificate, PingPongError> {
    let mut cert = evaluate(g1, g2, params)?;
    if cert.lower < cert.upper && cert.kappas[0].max(cert.kappas[1]) > 0.0 {
        let mid = 0.5 * (cert.lower + cert.upper);
        cert.witness = Some(mid);
        cert.verdict = Verdict::CertifiedFree;
    }
    Ok(cert)
}

/// Largest word length the oracle accepts.
pub const ORACLE_MAX_LEN: usize = 8;

/// Below this max-entry distance to `±I` a plane word is a relation.
pub const RELATION_TOL: f64 = 1e-9;
/// At or above this distance a plane word is nontrivial.
pub const NONTRIVIAL_TOL: f64 = 1e-6;

/// Outcome of the brute-force search for relations.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum OracleVerdict {
    /// Every nontrivial reduced word up to the length acts nontrivially.
    NoRelation,
    /// A word in `x = γ₁`, `y = γ₂` (capitals are inverses) acting trivially.
    Relation { word: String },
    /// Some plane word landed between the two tolerances.
    Inconclusive { word: String },
}

impl OracleVerdict {
    pub fn is_free(&self) -> bool {
        matches!(self, OracleVerdict::NoRelation)
    }
}

const ORACLE_LETTERS: [char; 4] = ['x', 'X', 'y', 'Y'];

/// Enumerates reduced words of length `1..=max_len` in `γ₁^{±1}, γ₂^{±1}`
/// and reports the first one that acts trivially.
pub fn word_oracle(g1: &Isometry, g2: &Isometry, max_len: usize) -> Result<OracleVerdict, PingPongError> {
    if max_len > ORACLE_MAX_LEN {
        return Err(PingPongError::BadArgument(format!(
            "word length {max_len} exceeds the oracle limit {ORACLE_MAX_LEN}"
        )));
    }
    if g1.model() != g2.model() {
        return Err(GeometryError::ModelMismatch.into());
    }
    let gens = [g1.clone(), g1.inverse(), g2.clone(), g2.inverse()];
    let mut inconclusive = None;
    let mut path = Vec::with_capacity(max_len);
    let id = Isometry::identity(g1.model());
    if let Some(w) = search(&gens, &id, &mut path, max_len, &mut inconclusive)? {
        return Ok(OracleVerdict::Relation { word: w });
    }
    Ok(match inconclusive {
        Some(word) => OracleVerdict::Inconclusive { word },
        None => OracleVerdict::NoRelation,
    })
}

fn spell(path: &[usize]) -> String {
    path.iter().map(|&i| ORACLE_LETTERS[i]).collect()
}

fn search(
    gens: &[Isometry; 4],
    current: &Isometry,
    path: &mut Vec<usize>,
    max_len: usize,
    inconclusive: &mut Option<String>,
) -> Result<Option<String>, PingPongError> {
    if path.len() == max_len {
        return Ok(None);
    }
    for (i, g) in gens.iter().enumerate() {
        // Skip letters that cancel the previous one; index i ^ 1 is the inverse.
        if path.last().is_some_and(|&p| p == i ^ 1) {
            continue;
        }
        let next = current.compose(g)?;
        path.push(i);
        let trivial = match &next {
            Isometry::Tree { word, .. } => Some(word.is_empty()),
            Isometry::Plane(m) => {
                let dist = m.distance_to_identity();
                if dist < RELATION_TOL {
                    Some(true)
                } else if dist < NONTRIVIAL_TOL {
                    inconclusive.get_or_insert_with(|| spell(path));
                    None
                } else {
                    Some(false)
                }
            }
        };
        if trivial == Some(true) {
            return Ok(Some(spell(path)));
        }
        if let Some(w) = search(gens, &next, path, max_len, inconclusive)? {
            return Ok(Some(w));
        }
        path.pop();
    }
    Ok(None)
}

/// Combined deviation tails derived from a base tail `p_n(ε)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct UldTails {
    pub n: usize,
    pub eps: f64,
    /// `2 p_n(ε)`, bounding `sup_y P((R_n·o | y)_o ≥ εn)`.
    pub single: f64,
    /// `4 p_n(ε) + 4 p_{⌊n/2⌋}(ε)`, bounding
    /// `P((R_n·o | R_n⁻¹·o)_o ≥ εn + 2δ)`.
    pub pair: f64,
    /// `0 < ε ≤ ℓ/8`.
    pub eps_in_range: bool,
    /// `n > 2 + 8δ/ℓ`.
    pub n_in_range: bool,
}

pub fn uld_tails<P>(p: P, n: usize, eps: f64, delta: f64, ell: f64) -> UldTails
where
    P: Fn(usize, f64) -> f64,
{
    let pn = p(n, eps);
    UldTails {
        n,
        eps,
        single: 2.0 * pn,
        pair: 4.0 * pn + 4.0 * p(n / 2, eps),
        eps_in_range: eps > 0.0 && eps <= ell / 8.0,
        n_in_range: n as f64 > 2.0 + 8.0 * delta / ell,
    }
}

/// Inputs to the theoretical rows of the Tits experiment.
#[derive(Clone, Debug, Serialize)]
pub struct TitsTheory {
    pub ell: f64,
    /// An upper bound on `‖λ_G(μ)‖₂`, used in `D(κ, λ)` and `T(κ, λ)`.
    pub lambda: f64,
    pub geometry: GeometryConstants,
}

#[derive(Clone, Debug, Serialize)]
pub struct TitsReport {
    pub n: usize,
    pub trials: usize,
    /// Pairs certified by the interval search.
    pub certified: u64,
    pub frequency: f64,
    pub wilson_radius: f64,
    /// `D_n = nℓ/8 + 2δ`.
    pub d_n: f64,
    /// Pairs certified at `D_n`.
    pub certified_at_d_n: u64,
    pub frequency_at_d_n: f64,
    pub oracle_len: usize,
    pub oracle_checked: u64,
    pub oracle_failures: u64,
    pub oracle_inconclusive: u64,
    /// `D(κ, λ)` feeding `p_n`.
    pub d_const: Extended,
    pub tits: Option<TitsConstants>,
    pub bounds: FreenessBounds,
}

impl TitsReport {
    /// Empirical frequency is at least every non-vacuous theoretical bound,
    /// up to `slack` Wilson radii.
    pub fn consistent(&self, slack: f64) -> bool {
        let ok = |b: &Bound| b.vacuous || self.frequency >= b.value - slack * self.wilson_radius;
        ok(&self.bounds.combiner) && self.bounds.exponential.as_ref().map_or(true, ok)
    }
}

/// Runs `trials` pairs of independent `n`-step walks, certifies each pair,
/// cross-checks certified pairs with the word oracle at `oracle_len` and
/// evaluates both theoretical lower bounds.
pub fn tits_experiment(
    mu: &FiniteMeasure,
    params: &ModelParams,
    n: usize,
    trials: usize,
    seed: u64,
    oracle_len: usize,
    theory: &TitsTheory,
) -> Result<TitsReport, PingPongError> {
    if n == 0 || trials == 0 {
        return Err(PingPongError::BadArgument("n and trials must be positive".into()));
    }
    if mu.model() != params.model {
        return Err(GeometryError::ModelMismatch.into());
    }
    let d_n = n as f64 * theory.ell / 8.0 + 2.0 * params.delta;
    let (seed_a, seed_b) = (montecarlo::derive_seed(seed, "first-walk"), montecarlo::derive_seed(seed, "second-walk"));
    let model = mu.model();
    let outcomes = montecarlo::par_trials(trials, |j| -> Result<(bool, bool, Option<OracleVerdict>), PingPongError> {
        let mut wa = Walker::new(mu, seed_a, j);
        let mut wb = Walker::new(mu, seed_b, j);
        wa.run(n);
        wb.run(n);
        let (ga, gb) = (wa.current(model), wb.current(model));
        let searched = certify_free_search(&ga, &gb, params)?;
        let at_dn = searched.holds_at(d_n);
        let oracle = if searched.is_free() && oracle_len > 0 {
            Some(word_oracle(&ga, &gb, oracle_len)?)
        } else {
            None
        };
        Ok((searched.is_free(), at_dn, oracle))
    });
    let mut certified = 0u64;
    let mut certified_at_d_n = 0u64;
    let (mut checked, mut failures, mut inconclusive) = (0u64, 0u64, 0u64);
    for o in outcomes {
        let (free, at_dn, oracle) = o?;
        certified += u64::from(free);
        certified_at_d_n += u64::from(at_dn);
        if let Some(v) = oracle {
            checked += 1;
            match v {
                OracleVerdict::NoRelation => {}
                OracleVerdict::Relation { .. } => failures += 1,
                OracleVerdict::Inconclusive { .. } => inconclusive += 1,
            }
        }
    }
    let kappa = mu.kappa_s();
    let gc = &theory.geometry;
    let d_const = bounds::d_const(kappa, theory.lambda, gc.a0)?;
    let tits = if theory.lambda < 1.0 { Some(bounds::tits_t_n0(kappa, theory.lambda, gc)?) } else { None };
    let p = |m: usize, eps: f64| bounds::uld_base_tail(m as f64, eps, kappa, d_const);
    let fb = bounds::freeness_prob_lb(p, theory.ell, params.delta, n, tits.as_ref());
    let tr = trials as u64;
    Ok(TitsReport {
        n,
        trials,
        certified,
        frequency: certified as f64 / tr as f64,
        wilson_radius: montecarlo::wilson_radius(certified, tr),
        d_n,
        certified_at_d_n,
        frequency_at_d_n: certified_at_d_n as f64 / tr as f64,
        oracle_len,
        oracle_checked: checked,
        oracle_failures: failures,
        oracle_inconclusive: inconclusive,
        d_const,
        tits,
        bounds: fb,
    })
}

/// A random reduced word of the given length.
pub fn random_word<R: rand::Rng + ?Sized>(rank: u8, len: usize, rng: &mut R) -> Word {
    let mut w = Word::identity();
    while w.len() < len {
        w.push(rng.gen_range(0..2 * rank));
    }
    w
}
