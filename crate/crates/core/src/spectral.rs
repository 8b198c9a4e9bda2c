//! Estimates of the regular-representation norm `‖λ_G(μ)‖₂`.
//!
//! Only closed forms and the uniform Tits bound yield upper bounds. The
//! return-probability sequence is reported as a certified lower estimate and
//! is never extrapolated.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hypspace::{Isometry, Model, Word};
use crate::walk::FiniteMeasure;

#[derive(Debug, Error, PartialEq)]
pub enum SpectralError {
    #[error("free-group rank must be at least 1")]
    BadRank,
    #[error("return probabilities need a measure on a tree model")]
    NeedsTree,
    #[error("horizon must be a positive even number, got {0}")]
    BadHorizon(usize),
    #[error("convolution table exceeded the budget of {budget} entries")]
    MemoryBudget { budget: usize },
    #[error("parameter out of range: {0}")]
    Domain(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimateKind {
    Exact,
    LowerEstimate,
    UpperBound,
}

impl fmt::Display for EstimateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EstimateKind::Exact => "exact",
            EstimateKind::LowerEstimate => "lower-estimate",
            EstimateKind::UpperBound => "upper-bound",
        })
    }
}

/// A value of `‖λ_G(μ)‖₂` together with what is known about it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralEstimate {
    pub value: f64,
    pub kind: EstimateKind,
    pub note: String,
}

impl SpectralEstimate {
    pub fn new(value: f64, kind: EstimateKind, note: impl Into<String>) -> Self {
        SpectralEstimate { value, kind, note: note.into() }
    }

    /// Whether this value can be used where an upper bound is required.
    pub fn is_upper(&self) -> bool {
        matches!(self.kind, EstimateKind::Exact | EstimateKind::UpperBound)
    }
}

/// `‖λ(μ)‖₂ = √(2k − 1)/k` for simple random walk on `F_k`.
pub fn kesten_norm(rank: u8) -> Result<SpectralEstimate, SpectralError> {
    if rank == 0 {
        return Err(SpectralError::BadRank);
    }
    let k = f64::from(rank);
    Ok(SpectralEstimate::new(
        (2.0 * k - 1.0).sqrt() / k,
        EstimateKind::Exact,
        format!("simple random walk on F_{rank}"),
    ))
}

type Table = BTreeMap<Word, f64>;

const PRUNE: f64 = 1e-300;

/// Default cap on the number of group elements held in one convolution table.
pub const DEFAULT_TABLE_BUDGET: usize = 20_000_000;

fn convolve(a: &Table, b: &[(Word, f64)], budget: usize) -> Result<Table, SpectralError> {
    let mut out = Table::new();
    for (g, p) in a {
        for (h, q) in b {
            let v = p * q;
            if v < PRUNE {
                continue;
            }
            *out.entry(g.mul(h)).or_insert(0.0) += v;
        }
        if out.len() > budget {
            return Err(SpectralError::MemoryBudget { budget });
        }
    }
    Ok(out)
}

/// The symmetric measure `ν = μ̌ ∗ μ`, i.e. the law of `X⁻¹ Y`.
fn symmetrised(mu: &FiniteMeasure) -> Result<Vec<(Word, f64)>, SpectralError> {
    let mut nu = Table::new();
    for (a, p) in mu.atoms() {
        for (b, q) in mu.atoms() {
            let (Isometry::Tree { word: wa, .. }, Isometry::Tree { word: wb, .. }) = (a, b) else {
                return Err(SpectralError::NeedsTree);
            };
            *nu.entry(wa.inverse().mul(wb)).or_insert(0.0) += p * q;
        }
    }
    Ok(nu.into_iter().collect())
}

/// Lower estimates of `‖λ_G(μ)‖₂` from the return probabilities
/// `m_j = ν^{∗j}(e)` of `ν = μ̌ ∗ μ`, for `j = 1, …, n_max/2` (so `n_max`
/// counts steps of `μ`).
///
/// Term `j` is `√(m_j / m_{j−1})`. The `m_j` are the moments of the spectral
/// measure of `λ(ν) = λ(μ)*λ(μ)` at `δ_e`, so the ratios are non-decreasing
/// in `j` and bounded by `‖λ(ν)‖ = ‖λ(μ)‖²`.
pub fn return_prob_estimate(
    mu: &FiniteMeasure,
    n_max: usize,
    budget: usize,
) -> Result<Vec<SpectralEstimate>, SpectralError> {
    if !matches!(mu.model(), Model::Tree { .. }) {
        return Err(SpectralError::NeedsTree);
    }
    if n_max == 0 || n_max % 2 == 1 {
        return Err(SpectralError::BadHorizon(n_max));
    }
    let jmax = n_max / 2;
    let nu = symmetrised(mu)?;
    // ν is symmetric, so ν^{∗(a+b)}(e) = Σ_g ν^{∗a}(g) ν^{∗b}(g).
    let half = jmax.div_ceil(2);
    let mut powers: Vec<Table> = Vec::with_capacity(half + 1);
    powers.push(Table::from([(Word::identity(), 1.0)]));
    for k in 1..=half {
        let next = convolve(&powers[k - 1], &nu, budget)?;
        powers.push(next);
    }
    let moment = |j: usize| -> f64 {
        let (a, b) = (j.div_ceil(2), j / 2);
        let (small, large) = if powers[a].len() <= powers[b].len() {
            (&powers[a], &powers[b])
        } else {
            (&powers[b], &powers[a])
        };
        small.iter().filter_map(|(g, p)| large.get(g).map(|q| p * q)).sum()
    };
    let mut out = Vec::with_capacity(jmax);
    let mut prev = 1.0;
    let mut best = 0.0f64;
    for j in 1..=jmax {
        let m = moment(j);
        let ratio = if prev > 0.0 { (m / prev).sqrt() } else { 0.0 };
        // Guard against round-off breaking monotonicity in the last digit.
        best = best.max(ratio);
        out.push(SpectralEstimate::new(
            best,
            EstimateKind::LowerEstimate,
            format!("moment ratio at {} steps", 2 * j),
        ));
        prev = m;
    }
    Ok(out)
}

/// `(1 − (1 − √3/2) m^{2N₀})^{1/(2N₀)}`, valid when `S^{N₀}` contains a
/// free pair.
pub fn uniform_tits_upper(m: f64, n0: u32) -> Result<SpectralEstimate, SpectralError> {
    if !(m > 0.0 && m <= 1.0) {
        return Err(SpectralError::Domain(format!("minimal weight {m} not in (0, 1]")));
    }
    if n0 == 0 {
        return Err(SpectralError::Domain("free-pair power must be at least 1".into()));
    }
    let kappa = 1.0 - 3f64.sqrt() / 2.0;
    let e = f64::from(2 * n0);
    let inner = 1.0 - kappa * m.powf(e);
    Ok(SpectralEstimate::new(
        inner.powf(1.0 / e),
        EstimateKind::UpperBound,
        format!("uniform Tits bound, m = {m}, N0 = {n0}"),
    ))
}

/// Spectrum information available for the lazy transform.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpectrumShape {
    /// Self-adjoint with spectrum symmetric about 0 (e.g. simple random walk
    /// on a free group, whose Cayley graph is bipartite).
    Symmetric,
    Unknown,
}

/// `‖r I + (1 − r) T‖ ≤ r + (1 − r)‖T‖`, with equality for a symmetric spectrum.
pub fn lazy_norm(
    lambda: &SpectralEstimate,
    r: f64,
    shape: SpectrumShape,
) -> Result<SpectralEstimate, SpectralError> {
    if !(0.0..1.0).contains(&r) {
        return Err(SpectralError::Domain(format!("laziness {r} not in [0, 1)")));
    }
    let value = r + (1.0 - r) * lambda.value;
    let kind = match (shape, lambda.kind) {
        (SpectrumShape::Symmetric, k) => k,
        (SpectrumShape::Unknown, EstimateKind::LowerEstimate) => {
            return Err(SpectralError::Domain(
                "a lower estimate does not transfer to the lazy walk without spectral symmetry".into(),
            ))
        }
        (SpectrumShape::Unknown, _) => EstimateKind::UpperBound,
    };
    Ok(SpectralEstimate::new(value, kind, format!("lazy r = {r} of {}", lambda.note)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kesten_values() {
        assert_eq!(kesten_norm(2).unwrap().value, 3f64.sqrt() / 2.0);
        assert_eq!(kesten_norm(1).unwrap().value, 1.0);
        assert!((kesten_norm(3).unwrap().value - 0.745_355_992_499_929_9).abs() < 1e-15);
        assert!(kesten_norm(0).is_err());
    }

    #[test]
    fn first_terms() {
        let mu = FiniteMeasure::srw(2).unwrap();
        let seq = return_prob_estimate(&mu, 8, DEFAULT_TABLE_BUDGET).unwrap();
        assert_eq!(seq.len(), 4);
        assert!((seq[0].value - 0.5).abs() < 1e-15);
        // m_2 = 7/32 for ν = μ̌∗μ on F₂ (paths of length 4 returning to e, ×1/4⁴ = 28/256).
        assert!((seq[1].value - (28.0f64 / 256.0 / 0.25).sqrt()).abs() < 1e-15);
        assert!(return_prob_estimate(&mu, 3, 10).is_err());
    }

    #[test]
    fn budget_is_enforced() {
        let mu = FiniteMeasure::srw(2).unwrap();
        assert_eq!(
            return_prob_estimate(&mu, 12, 50),
            Err(SpectralError::MemoryBudget { budget: 50 })
        );
    }

    #[test]
    fn tits_and_lazy() {
        let u = uniform_tits_upper(0.25, 1).unwrap();
        assert!((u.value - (1.0 - (1.0 - 3f64.sqrt() / 2.0) / 16.0).sqrt()).abs() < 1e-15);
        assert!(uniform_tits_upper(0.0, 1).is_err());
        let k = kesten_norm(2).unwrap();
        let l = lazy_norm(&k, 0.5, SpectrumShape::Symmetric).unwrap();
        assert!((l.value - 0.933_012_701_892_219_3).abs() < 1e-15);
        assert_eq!(l.kind, EstimateKind::Exact);
        assert_eq!(lazy_norm(&k, 0.0, SpectrumShape::Symmetric).unwrap().value, k.value);
        let one = SpectralEstimate::new(1.0, EstimateKind::Exact, "amenable");
        assert_eq!(lazy_norm(&one, 0.3, SpectrumShape::Unknown).unwrap().value, 1.0);
    }
}
