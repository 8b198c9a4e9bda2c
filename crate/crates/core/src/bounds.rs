//! Explicit constants and closed-form concentration bounds.
//!
//! Every probability evaluator returns a [`Bound`]: the value clipped to
//! `[0, 1]`, a flag telling whether it is vacuous, and the assumptions it
//! relies on. Constants that blow up (operator norm equal to one) are
//! represented by [`Extended::Infinite`] rather than a floating overflow.

use std::collections::HashMap;
use std::fmt;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::hypspace::{plane, word, Model, ModelParams, Word};

#[derive(Debug, Error, PartialEq)]
pub enum BoundsError {
    #[error("parameter out of range: {0}")]
    Domain(String),
}

fn domain<T>(msg: impl Into<String>) -> Result<T, BoundsError> {
    Err(BoundsError::Domain(msg.into()))
}

/// A nonnegative constant that may be infinite.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub enum Extended {
    Finite(f64),
    Infinite,
}

impl Extended {
    pub fn finite(self) -> Option<f64> {
        match self {
            Extended::Finite(v) => Some(v),
            Extended::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Extended::Infinite)
    }

    fn from_f64(v: f64) -> Self {
        if v.is_finite() {
            Extended::Finite(v)
        } else {
            Extended::Infinite
        }
    }
}

impl fmt::Display for Extended {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extended::Finite(v) => write!(f, "{v}"),
            Extended::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Extended {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Extended::Finite(v) => s.serialize_f64(*v),
            Extended::Infinite => s.serialize_str("inf"),
        }
    }
}

/// `ln⁺ x = max(ln x, 0)`.
pub fn ln_plus(x: f64) -> f64 {
    if x > 1.0 {
        x.ln()
    } else {
        0.0
    }
}

/// A probability bound with its validity bookkeeping.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Bound {
    pub value: f64,
    /// True when the bound carries no information (`≥ 1` for an upper bound
    /// on a probability, `≤ 0` for a lower bound).
    pub vacuous: bool,
    /// False when the evaluation point lies outside the range where the
    /// inequality is proved; the value is still reported.
    pub in_range: bool,
    pub assumptions: Vec<String>,
}

impl Bound {
    fn upper(raw: f64, assumptions: Vec<String>) -> Self {
        let value = if raw.is_nan() { 1.0 } else { raw.clamp(0.0, 1.0) };
        Bound { value, vacuous: value >= 1.0, in_range: true, assumptions }
    }

    fn lower(raw: f64, assumptions: Vec<String>) -> Self {
        let value = if raw.is_nan() { 0.0 } else { raw.clamp(0.0, 1.0) };
        Bound { value, vacuous: value <= 0.0, in_range: true, assumptions }
    }

    fn with_range(mut self, ok: bool, note: String) -> Self {
        self.in_range = ok;
        if !ok {
            self.assumptions.push(note);
        }
        self
    }
}

/// The per-space constant pack feeding every explicit bound.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeometryConstants {
    pub delta: f64,
    pub d0: f64,
    pub d1: f64,
    pub a0: f64,
    pub k0: u64,
    /// Whether `k0` comes from an explicit cover or from a packing estimate.
    pub k0_source: String,
    pub r_delta: f64,
}

/// `R(δ) = 14δ + 4`.
pub fn r_of_delta(delta: f64) -> f64 {
    14.0 * delta + 4.0
}

impl GeometryConstants {
    /// Computes `A₀` and `K₀` for the given model parameters.
    pub fn for_model(params: &ModelParams) -> Result<Self, BoundsError> {
        params.validate().map_err(|e| BoundsError::Domain(e.to_string()))?;
        let (k0, src) = covering_number(params)?;
        Ok(GeometryConstants {
            delta: params.delta,
            d0: params.d0,
            d1: params.d1,
            a0: a0(params),
            k0,
            k0_source: src,
            r_delta: r_of_delta(params.delta),
        })
    }

    /// Replaces the covering number, e.g. with a better cover found elsewhere.
    pub fn with_k0(mut self, k0: u64, source: &str) -> Self {
        self.k0 = k0;
        self.k0_source = source.to_string();
        self
    }
}

/// `A₀(R) = (μ_G(B_{2R}) / μ_G(B_R))^{1/2}` for a ball-measure function.
pub fn a0_from_balls<F: Fn(f64) -> f64>(ball: F, r: f64) -> f64 {
    (ball(2.0 * r) / ball(r)).sqrt()
}

/// `A₀ = (μ_G(B_{2R(δ)+2D₀}) / μ_G(B_{R(δ)+D₀}))^{1/2}` with Haar measure
/// given by vertex counts on trees and hyperbolic area on the plane.
pub fn a0(params: &ModelParams) -> f64 {
    let r = r_of_delta(params.delta) + params.d0;
    match params.model {
        Model::Tree { rank } => {
            a0_from_balls(|s| word::ball_size(rank, (s + 1e-9).floor() as u64), r)
        }
        Model::Plane => a0_from_balls(plane::disk_area, r),
    }
}

/// `D(κ, λ) = 32(16 ln⁺κ + 8A₀/3 + 33)² / (1 − √λ)⁴`, infinite at `λ = 1`.
pub fn d_const(kappa: f64, lambda: f64, a0: f64) -> Result<Extended, BoundsError> {
    check_kappa_lambda(kappa, lambda)?;
    if lambda >= 1.0 {
        return Ok(Extended::Infinite);
    }
    let inner = 16.0 * ln_plus(kappa) + 8.0 * a0 / 3.0 + 33.0;
    Ok(Extended::from_f64(32.0 * inner * inner / (1.0 - lambda.sqrt()).powi(4)))
}

fn check_kappa_lambda(kappa: f64, lambda: f64) -> Result<(), BoundsError> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return domain(format!("kappa {kappa} must be positive"));
    }
    if !(lambda > 0.0 && lambda <= 1.0) {
        return domain(format!("lambda {lambda} not in (0, 1]"));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CMode {
    Infimum,
    ClosedForm,
}

/// The objective `4(ln κ / ln c ∨ 1/(ln c)²) + A₀/(1 − c²λ)` in `u = ln c`.
fn c_objective(kappa: f64, lambda: f64, a0: f64, u: f64) -> f64 {
    let gap = 1.0 - (2.0 * u).exp() * lambda;
    if !(u > 0.0 && gap > 0.0) {
        return f64::INFINITY;
    }
    let first = (kappa.ln() / u).max(1.0 / (u * u));
    4.0 * first + a0 / gap
}

/// `C(κ, λ)`: either the infimum over `1 < c < λ^{−1/2}` of
/// `κ [4(ln κ/ln c ∨ 1/(ln c)²) + A₀/(1 − c²λ)]` or the closed form
/// `κ(8 ln⁺κ + 4A₀/3 + 16)/(1 − √λ)²`.
pub fn c_const(kappa: f64, lambda: f64, a0: f64, mode: CMode) -> Result<Extended, BoundsError> {
    check_kappa_lambda(kappa, lambda)?;
    if lambda >= 1.0 {
        return Ok(Extended::Infinite);
    }
    let closed = kappa * (8.0 * ln_plus(kappa) + 4.0 * a0 / 3.0 + 16.0) / (1.0 - lambda.sqrt()).powi(2);
    if mode == CMode::ClosedForm {
        return Ok(Extended::from_f64(closed));
    }
    // The objective is convex in c on the interval, hence unimodal in u = ln c.
    let umax = -0.5 * lambda.ln();
    let f = |u: f64| c_objective(kappa, lambda, a0, u);
    let grid = 256;
    let mut best_i = 1;
    let mut best = f64::INFINITY;
    for i in 1..grid {
        let v = f(umax * i as f64 / grid as f64);
        if v < best {
            best = v;
            best_i = i;
        }
    }
    let (mut a, mut b) = (umax * (best_i - 1) as f64 / grid as f64, umax * (best_i + 1) as f64 / grid as f64);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if (b - a) <= 1e-15 * b.abs().max(1e-300) {
            break;
        }
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = f(x2);
        }
    }
    let spec = f((0.5 * (1.0 + lambda.powf(-0.5))).ln());
    let inf = [best, f1, f2, spec].into_iter().filter(|v| v.is_finite()).fold(f64::INFINITY, f64::min);
    Ok(Extended::from_f64(kappa * inf))
}

/// `min(1, 2 exp(−n t² / (κ² D)))`.
pub fn concentration_bound(n: f64, t: f64, kappa: f64, d: Extended) -> Bound {
    let assumptions = vec!["non-elementary measure with bounded support".to_string()];
    match d {
        Extended::Infinite => {
            let mut b = Bound::upper(1.0, assumptions);
            b.assumptions.push("operator norm equals 1; D is infinite".into());
            b
        }
        Extended::Finite(d) => Bound::upper(2.0 * (-n * t * t / (kappa * kappa * d)).exp(), assumptions),
    }
}

/// `min(1, 2 exp(−n t² / (32 (κ + 𝔠)²)))`.
pub fn simple_concentration_bound(n: f64, t: f64, kappa: f64, c: f64) -> Bound {
    let s = kappa + c;
    Bound::upper(
        2.0 * (-n * t * t / (32.0 * s * s)).exp(),
        vec![format!("cocycle constant c = {c}")],
    )
}

/// Norm form for matrix products, `min(1, 2d exp(−n t² / (128 (κ + 𝔠)²)))`,
/// proved for `n t ≥ ln d`.
pub fn matrix_norm_bound(n: f64, t: f64, kappa: f64, c: f64, dim: usize) -> Bound {
    let s = kappa + c;
    let d = dim as f64;
    let ok = n * t >= d.ln();
    Bound::upper(
        2.0 * d * (-n * t * t / (128.0 * s * s)).exp(),
        vec![format!("cocycle constant c = {c}"), format!("dimension {dim}")],
    )
    .with_range(ok, "n t < ln d".into())
}

/// Markov-chain form `min(1, 2 exp(−n t² / (32 ‖φ‖²_∞)))`.
pub fn azuma_bound(n: f64, t: f64, phi_sup: f64) -> Bound {
    let raw = if phi_sup == 0.0 {
        if t > 0.0 {
            0.0
        } else {
            2.0
        }
    } else {
        2.0 * (-n * t * t / (32.0 * phi_sup * phi_sup)).exp()
    };
    Bound::upper(raw, vec![format!("sup norm of Poisson solution {phi_sup}")])
}

/// Rate-function lower bound `(t − ℓ)² / (κ² D)`; zero when `D` is infinite.
pub fn rate_lower_bound(t: f64, ell: f64, kappa: f64, d: Extended) -> f64 {
    match d {
        Extended::Infinite => 0.0,
        Extended::Finite(d) => (t - ell).powi(2) / (kappa * kappa * d),
    }
}

/// Default laziness grid `{0, 0.05, …, 0.95}`.
pub fn default_r_grid() -> Vec<f64> {
    (0..20).map(|i| i as f64 * 0.05).collect()
}

/// A supremum over the laziness grid and where it is attained.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridSup {
    pub value: f64,
    pub argmax_r: f64,
}

fn grid_sup(lambdas: &[(f64, f64)], f: impl Fn(f64, f64) -> f64) -> GridSup {
    let mut best = GridSup { value: 0.0, argmax_r: 0.0 };
    for &(r, l) in lambdas {
        let v = f(r, l);
        if v > best.value {
            best = GridSup { value: v, argmax_r: r };
        }
    }
    best
}

/// `sup_r (1/κ) ln(1/λ_r)` over the supplied `(r, λ_r)` pairs.
pub fn frostman_exponent(kappa: f64, lambdas: &[(f64, f64)]) -> Result<GridSup, BoundsError> {
    if !(kappa > 0.0) {
        return domain("kappa must be positive");
    }
    Ok(grid_sup(lambdas, |_, l| (1.0 / l).ln() / kappa))
}

/// `(2D₁ / ln K₀) sup_r (1/(1 − r)) ln(1/λ_r)`.
pub fn drift_lower_bound(gc: &GeometryConstants, lambdas: &[(f64, f64)]) -> Result<GridSup, BoundsError> {
    if gc.k0 < 2 {
        return domain(format!("covering number {} must be at least 2", gc.k0));
    }
    let s = grid_sup(lambdas, |r, l| (1.0 / l).ln() / (1.0 - r));
    let scale = 2.0 * gc.d1 / (gc.k0 as f64).ln();
    Ok(GridSup { value: scale * s.value, argmax_r: s.argmax_r })
}

/// Greedy cover of `targets` by balls of radius `radius` centred at
/// `candidates`. Ties go to the earliest candidate, so the result is
/// deterministic. Returns the chosen centres.
pub fn greedy_cover<T, D>(targets: &[T], candidates: &[T], radius: f64, dist: D) -> Vec<usize>
where
    D: Fn(&T, &T) -> f64,
{
    let covers: Vec<Vec<usize>> = candidates
        .iter()
        .map(|c| (0..targets.len()).filter(|&i| dist(c, &targets[i]) <= radius).collect())
        .collect();
    greedy_from_sets(targets.len(), &covers)
}

fn greedy_from_sets(n: usize, covers: &[Vec<usize>]) -> Vec<usize> {
    let mut covered = vec![false; n];
    let mut left = n;
    let mut chosen = Vec::new();
    while left > 0 {
        let mut best = (0usize, 0usize);
        for (j, set) in covers.iter().enumerate() {
            let gain = set.iter().filter(|&&i| !covered[i]).count();
            if gain > best.1 {
                best = (j, gain);
            }
        }
        if best.1 == 0 {
            break;
        }
        for &i in &covers[best.0] {
            if !covered[i] {
                covered[i] = true;
                left -= 1;
            }
        }
        chosen.push(best.0);
    }
    chosen
}

/// Greedy cover of the tree ball `B_{6D₁}` by translates of `B_{D₁}`.
pub fn tree_cover_size(rank: u8, d1: f64) -> usize {
    let r = (d1 + 1e-9).floor() as usize;
    let big = (6.0 * d1 + 1e-9).floor() as usize;
    let targets = word::enumerate_ball(rank, big);
    let index: HashMap<&Word, usize> = targets.iter().enumerate().map(|(i, w)| (w, i)).collect();
    let offsets = word::enumerate_ball(rank, r);
    let centres = word::enumerate_ball(rank, big + r);
    let covers: Vec<Vec<usize>> = centres
        .iter()
        .map(|c| offsets.iter().filter_map(|o| index.get(&c.mul(o)).copied()).collect())
        .collect();
    greedy_from_sets(targets.len(), &covers).len()
}

/// `K₀` with `B_{6D₁} ⊆ ⋃ g_i B_{D₁}`: a greedy cover on trees, and on the
/// plane the packing count `⌈area(B_{6.5D₁}) / area(B_{D₁/2})⌉`, which bounds
/// the size of a maximal `D₁`-separated subset of `B_{6D₁}` (itself a cover).
pub fn covering_number(params: &ModelParams) -> Result<(u64, String), BoundsError> {
    if !(params.d1 >= 1.0) {
        return domain("D1 must be at least 1");
    }
    match params.model {
        Model::Tree { rank } => {
            if 6.0 * params.d1 > 12.0 {
                return domain("tree covers are enumerated only for D1 <= 2");
            }
            Ok((tree_cover_size(rank, params.d1) as u64, "greedy cover".into()))
        }
        Model::Plane => {
            let k = (plane::disk_area(6.5 * params.d1) / plane::disk_area(0.5 * params.d1)).ceil();
            Ok((k as u64, "packing upper bound".into()))
        }
    }
}

/// Constants of the probabilistic Tits alternative.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TitsConstants {
    pub t: f64,
    pub n0: f64,
    pub a_m: f64,
    pub b_m: f64,
    pub c_m: f64,
}

/// `T(κ, λ) = B_M (ln λ)² (1 − √λ)⁴ / (κ² (ln⁺κ + A_M)²)` and
/// `n₀(λ) = 2 + C_M ln(1/λ)`, with `A_M = A₀/6 + 33/16`,
/// `B_M = D₁² / (2¹⁷ (ln K₀)²)`, `C_M = 4δ ln K₀ / D₁`.
pub fn tits_t_n0(kappa: f64, lambda: f64, gc: &GeometryConstants) -> Result<TitsConstants, BoundsError> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return domain(format!("lambda {lambda} not in (0, 1)"));
    }
    if !(kappa > 0.0) {
        return domain("kappa must be positive");
    }
    if gc.k0 < 2 {
        return domain("covering number must be at least 2");
    }
    let lk = (gc.k0 as f64).ln();
    let a_m = gc.a0 / 6.0 + 33.0 / 16.0;
    let b_m = gc.d1 * gc.d1 / (2f64.powi(17) * lk * lk);
    let c_m = 4.0 * gc.delta * lk / gc.d1;
    let t = b_m * lambda.ln().powi(2) * (1.0 - lambda.sqrt()).powi(4)
        / (kappa * kappa * (ln_plus(kappa) + a_m).powi(2));
    Ok(TitsConstants { t, n0: 2.0 + c_m * (1.0 / lambda).ln(), a_m, b_m, c_m })
}

/// Base deviation tail `p_n(ε) = min(1, 4 exp(−n ε² / (κ² D)))`.
pub fn uld_base_tail(n: f64, eps: f64, kappa: f64, d: Extended) -> f64 {
    match d {
        Extended::Infinite => 1.0,
        Extended::Finite(d) => (4.0 * (-n * eps * eps / (kappa * kappa * d)).exp()).min(1.0),
    }
}

/// Both lower bounds on the probability that two independent walks generate
/// a free group.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FreenessBounds {
    /// `1 − (13 p_n(ℓ/8) + 8 p_{⌊n/2⌋}(ℓ/8))`, proved for `n > 2 + 16δ/ℓ`.
    pub combiner: Bound,
    /// `1 − 84 exp(−n T)`, proved for `n > n₀`.
    pub exponential: Option<Bound>,
}

pub fn freeness_prob_lb<P>(p: P, ell: f64, delta: f64, n: usize, tits: Option<&TitsConstants>) -> FreenessBounds
where
    P: Fn(usize, f64) -> f64,
{
    let eps = ell / 8.0;
    let tail = 13.0 * p(n, eps).clamp(0.0, 1.0) + 8.0 * p(n / 2, eps).clamp(0.0, 1.0);
    let threshold = 2.0 + 16.0 * delta / ell;
    let combiner = Bound::lower(1.0 - tail, vec![format!("drift {ell}"), format!("delta {delta}")])
        .with_range(n as f64 > threshold, format!("n <= {threshold}"));
    let exponential = tits.map(|tc| {
        Bound::lower(1.0 - 84.0 * (-(n as f64) * tc.t).exp(), vec![format!("T = {:e}", tc.t)])
            .with_range(n as f64 > tc.n0, format!("n <= n0 = {}", tc.n0))
    });
    FreenessBounds { combiner, exponential }
}

/// Which corollary the constant pack instantiates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CorollaryKind {
    /// Cocompact lattice in a hyperbolic space; `n_prime` is the uniform
    /// free-pair power for generating sets.
    HyperbolicGroup { n_prime: u32 },
    /// Discrete non-amenable subgroup of a rank-one group in dimension `d`;
    /// `n_prime` is the free-pair power for symmetric sets containing 1.
    RankOne { n_prime: u32 },
}

/// Constants `(N, α, A)` of a corollary together with its spectral input.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CorollaryPack {
    pub kind: CorollaryKind,
    pub big_n: u32,
    pub alpha: f64,
    pub a: f64,
}

pub fn corollary_constants(kind: CorollaryKind, a0: f64) -> Result<CorollaryPack, BoundsError> {
    let k4 = (1.0 - 3f64.sqrt() / 2.0).powi(4);
    match kind {
        CorollaryKind::HyperbolicGroup { n_prime } | CorollaryKind::RankOne { n_prime } if n_prime == 0 => {
            domain("N' must be at least 1")
        }
        CorollaryKind::HyperbolicGroup { n_prime } => {
            let np = f64::from(n_prime);
            Ok(CorollaryPack {
                kind,
                big_n: 4 * n_prime,
                alpha: 2f64.powf(21.0 + 4.0 * np) * np.powi(4) / k4,
                a: a0 + 3.0,
            })
        }
        CorollaryKind::RankOne { n_prime } => {
            let nd = 16 * n_prime;
            let ndf = f64::from(nd);
            Ok(CorollaryPack {
                kind,
                big_n: nd,
                alpha: 2f64.powf(25.0 + ndf) * ndf.powi(4) / k4,
                a: a0 / 3.0 + 3.0,
            })
        }
    }
}

impl CorollaryPack {
    /// Upper bound on the norm of the relevant lazy measure in terms of the
    /// minimal weight `m`.
    pub fn spectral_bound(&self, m: f64) -> f64 {
        let kappa = 1.0 - 3f64.sqrt() / 2.0;
        match self.kind {
            CorollaryKind::HyperbolicGroup { n_prime } => {
                let np = f64::from(n_prime);
                1.0 - kappa * m.powf(np) / (np * 2f64.powf(np + 1.0))
            }
            CorollaryKind::RankOne { n_prime } => {
                let np = f64::from(n_prime);
                1.0 - m.powf(4.0 * np) * kappa / (4.0 * np * 2f64.powf(4.0 * np))
            }
        }
    }

    /// `min(1, 2 exp(−n t² m^N / (α κ² (ln⁺κ + A)²)))`.
    pub fn tail_bound(&self, n: f64, t: f64, kappa: f64, m: f64) -> Bound {
        let denom = self.alpha * kappa * kappa * (ln_plus(kappa) + self.a).powi(2);
        let raw = 2.0 * (-n * t * t * m.powf(f64::from(self.big_n)) / denom).exp();
        Bound::upper(raw, vec![format!("minimal weight {m}"), format!("N = {}", self.big_n)])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn d_examples() {
        assert_eq!(d_const(1.0, 0.25, 3.0).unwrap(), Extended::Finite(860_672.0));
        assert_eq!(d_const(1.0, 1.0, 3.0).unwrap(), Extended::Infinite);
        assert_eq!(d_const(0.3, 0.25, 3.0).unwrap(), d_const(1.0, 0.25, 3.0).unwrap());
        assert!(d_const(0.0, 0.5, 1.0).is_err());
        assert!(d_const(1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn c_examples() {
        assert_eq!(c_const(1.0, 0.25, 3.0, CMode::ClosedForm).unwrap(), Extended::Finite(80.0));
        let inf = c_const(1.0, 0.25, 3.0, CMode::Infimum).unwrap().finite().unwrap();
        assert!(inf <= 80.0 && inf > 0.0);
        assert!(c_const(1.0, 1.0, 3.0, CMode::Infimum).unwrap().is_infinite());
    }

    #[test]
    fn probability_bounds() {
        assert_eq!(concentration_bound(100.0, 0.0, 1.0, Extended::Finite(10.0)).value, 1.0);
        let b = concentration_bound(1e10, 0.1, 1.0, Extended::Finite(860_672.0));
        assert!((b.value - 2.0 * (-1e8 / 860_672.0f64).exp()).abs() < 1e-60);
        assert!(concentration_bound(1e10, 0.1, 1.0, Extended::Infinite).vacuous);
        let s = simple_concentration_bound(1e4, 0.2, 1.0, 0.75);
        assert!((s.value - 2.0 * (-400.0f64 / 98.0).exp()).abs() < 1e-15);
        assert!(!matrix_norm_bound(1.0, 0.1, 1.0, 1.0, 2).in_range);
        assert_eq!(azuma_bound(10.0, 0.1, 0.0).value, 0.0);
        assert_eq!(azuma_bound(10.0, 0.0, 0.0).value, 1.0);
    }

    #[test]
    fn rate_examples() {
        assert_eq!(rate_lower_bound(0.5, 0.5, 1.0, Extended::Finite(1.0)), 0.0);
        let r = rate_lower_bound(1.0, 0.5, 1.0, Extended::Finite(8.6e5));
        assert!((r - 0.25 / 8.6e5).abs() < 1e-18);
        let lo = rate_lower_bound(0.25, 0.5, 1.0, Extended::Finite(3.0));
        let hi = rate_lower_bound(0.75, 0.5, 1.0, Extended::Finite(3.0));
        assert_eq!(lo, hi);
    }

    #[test]
    fn covers() {
        assert_eq!(greedy_cover(&[0.0f64], &[0.0], 1.0, |a, b| (a - b).abs()).len(), 1);
        let pts: Vec<f64> = (0..10).map(f64::from).collect();
        assert_eq!(greedy_cover(&pts, &pts, 1.0, |a, b| (a - b).abs()).len(), 4);
    }

    #[test]
    fn tits_tree_has_n0_two() {
        let gc = GeometryConstants::for_model(&ModelParams::tree(2).unwrap()).unwrap();
        let tc = tits_t_n0(1.0, 0.933, &gc).unwrap();
        assert_eq!(tc.n0, 2.0);
        assert!(tits_t_n0(1.0, 1.0, &gc).is_err());
    }

    #[test]
    fn corollary_examples() {
        let h = corollary_constants(CorollaryKind::HyperbolicGroup { n_prime: 1 }, 15.6).unwrap();
        assert_eq!(h.big_n, 4);
        assert!((h.alpha - 2f64.powi(25) / (1.0 - 3f64.sqrt() / 2.0).powi(4)).abs() < 1e-3);
        let r = corollary_constants(CorollaryKind::RankOne { n_prime: 1 }, 15.6).unwrap();
        assert_eq!(r.big_n, 16);
        assert!(h.tail_bound(1e6, 0.1, 1.0, 1e-9).value >= 1.0 - 1e-12);
    }
}
