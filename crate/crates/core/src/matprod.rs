//! Products of i.i.d. random matrices: norm cocycle, projective dynamics,
//! Lyapunov exponent, the constant `𝔠(μ*)` and tail experiments for
//! `L_n = X_n ⋯ X_1`.
//!
//! Matrices are real and stored row-major in flat slices. Running products
//! are rescaled by their Frobenius norm every [`RENORM_EVERY`] steps with
//! the logarithm of the scale accumulated separately.

use nalgebra::DMatrix;
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::bounds::{self, Bound};
use crate::montecarlo::{self, IndexSampler, TailCell};

#[derive(Debug, Error)]
pub enum MatrixError {
    #[error("invalid matrix measure: {0}")]
    BadMeasure(String),
    #[error("matrix is singular or too ill-conditioned (condition number {0:e})")]
    Singular(f64),
    #[error("zero vector has no projective class")]
    ZeroVector,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("invalid argument: {0}")]
    BadArgument(String),
}

pub const RENORM_EVERY: usize = 32;

/// Largest condition number accepted for an atom.
pub const MAX_CONDITION: f64 = 1e12;

/// Cap on `ln(‖x‖‖y‖/|⟨x,y⟩|)` in `𝔠` integrals.
pub fn clip_level() -> f64 {
    1e12f64.ln()
}

fn frobenius(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `out = a · b` for `d × d` row-major matrices.
#[inline]
fn mat_mul(a: &[f64], b: &[f64], out: &mut [f64], d: usize) {
    if d == 2 {
        out[0] = a[0] * b[0] + a[1] * b[2];
        out[1] = a[0] * b[1] + a[1] * b[3];
        out[2] = a[2] * b[0] + a[3] * b[2];
        out[3] = a[2] * b[1] + a[3] * b[3];
        return;
    }
    for i in 0..d {
        for j in 0..d {
            let mut s = 0.0;
            for k in 0..d {
                s += a[i * d + k] * b[k * d + j];
            }
            out[i * d + j] = s;
        }
    }
}

/// `out = a · v`.
#[inline]
fn mat_vec(a: &[f64], v: &[f64], out: &mut [f64], d: usize) {
    for i in 0..d {
        out[i] = dot(&a[i * d..(i + 1) * d], v);
    }
}

/// Operator 2-norm: closed form for `d = 2`, power iteration on `AᵀA`
/// (relative tolerance `1e-12`) otherwise.
pub fn op_norm(a: &[f64], d: usize) -> f64 {
    if d == 1 {
        return a[0].abs();
    }
    if d == 2 {
        let t = a.iter().map(|x| x * x).sum::<f64>();
        let det = a[0] * a[3] - a[1] * a[2];
        let disc = (t * t - 4.0 * det * det).max(0.0).sqrt();
        return (0.5 * (t + disc)).sqrt();
    }
    let scale = frobenius(a);
    if scale == 0.0 {
        return 0.0;
    }
    let b: Vec<f64> = a.iter().map(|x| x / scale).collect();
    // AᵀA, then power iteration from a vector with no zero components.
    let mut ata = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            ata[i * d + j] = (0..d).map(|k| b[k * d + i] * b[k * d + j]).sum();
        }
    }
    let mut v: Vec<f64> = (0..d).map(|i| 1.0 + 0.1 * i as f64).collect();
    let mut w = vec![0.0; d];
    let mut est = 0.0;
    for _ in 0..10_000 {
        let nv = norm(&v);
        v.iter_mut().for_each(|x| *x /= nv);
        mat_vec(&ata, &v, &mut w, d);
        let next = dot(&v, &w);
        std::mem::swap(&mut v, &mut w);
        if (next - est).abs() <= 1e-14 * next.abs() {
            est = next;
            break;
        }
        est = next;
    }
    scale * est.max(0.0).sqrt()
}

fn to_flat(m: &DMatrix<f64>) -> Vec<f64> {
    let d = m.nrows();
    let mut out = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            out.push(m[(i, j)]);
        }
    }
    out
}

/// `κ(g) = max(ln‖g‖, ln‖g⁻¹‖)`.
pub fn kappa(g: &DMatrix<f64>) -> Result<f64, MatrixError> {
    let sv = g.clone().singular_values();
    let smax = sv.max();
    let smin = sv.min();
    if !(smin > 0.0) || smax / smin > MAX_CONDITION {
        return Err(MatrixError::Singular(if smin > 0.0 { smax / smin } else { f64::INFINITY }));
    }
    Ok(smax.ln().max(-smin.ln()))
}

/// A finitely supported probability measure on invertible real matrices.
#[derive(Clone, Debug)]
pub struct MatrixMeasure {
    d: usize,
    atoms: Vec<(DMatrix<f64>, f64)>,
    flat: Vec<Vec<f64>>,
    sampler: IndexSampler,
    kappa_s: f64,
}

impl MatrixMeasure {
    pub fn new(atoms: Vec<(DMatrix<f64>, f64)>) -> Result<Self, MatrixError> {
        let Some(first) = atoms.first() else {
            return Err(MatrixError::BadMeasure("no atoms".into()));
        };
        let d = first.0.nrows();
        let mut kappa_s = 0.0f64;
        for (g, w) in &atoms {
            if g.nrows() != d || g.ncols() != d {
                return Err(MatrixError::Dimension { expected: d, got: g.nrows() });
            }
            if !(w.is_finite() && *w > 0.0) {
                return Err(MatrixError::BadMeasure(format!("weight {w} is not positive")));
            }
            kappa_s = kappa_s.max(kappa(g)?);
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(MatrixError::BadMeasure(format!("weights sum to {total}")));
        }
        let atoms: Vec<_> = atoms.into_iter().map(|(g, w)| (g, w / total)).collect();
        let weights: Vec<f64> = atoms.iter().map(|a| a.1).collect();
        let flat = atoms.iter().map(|a| to_flat(&a.0)).collect();
        Ok(MatrixMeasure { d, sampler: IndexSampler::new(&weights), atoms, flat, kappa_s })
    }

    /// Builds from row-major arrays, as read from a config file.
    pub fn from_rows(atoms: &[(Vec<Vec<f64>>, f64)]) -> Result<Self, MatrixError> {
        let mut out = Vec::with_capacity(atoms.len());
        for (rows, w) in atoms {
            let d = rows.len();
            if d == 0 || rows.iter().any(|r| r.len() != d) {
                return Err(MatrixError::BadMeasure("matrices must be square".into()));
            }
            out.push((DMatrix::from_fn(d, d, |i, j| rows[i][j]), *w));
        }
        Self::new(out)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn atoms(&self) -> &[(DMatrix<f64>, f64)] {
        &self.atoms
    }

    /// `κ_S = max over atoms of max(ln‖g‖, ln‖g⁻¹‖)`.
    pub fn kappa_s(&self) -> f64 {
        self.kappa_s
    }

    /// The pushforward under `g ↦ gᵀ`.
    pub fn adjoint(&self) -> Self {
        Self::new(self.atoms.iter().map(|(g, w)| (g.transpose(), *w)).collect())
            .expect("transposition preserves validity")
    }
}

/// `diag(2, ½)` and `rot(π/7)·diag(2, ½)` with equal weights.
pub fn standard_example() -> MatrixMeasure {
    let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.5]);
    let th = std::f64::consts::PI / 7.0;
    let r = DMatrix::from_row_slice(2, 2, &[th.cos(), -th.sin(), th.sin(), th.cos()]);
    MatrixMeasure::new(vec![(a.clone(), 0.5), (r * a, 0.5)]).expect("valid example")
}

/// A line in `ℝ^d`, stored as a unit representative.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProjectivePoint(Vec<f64>);

impl ProjectivePoint {
    pub fn new(v: &[f64]) -> Result<Self, MatrixError> {
        let n = norm(v);
        if !(n > 0.0 && n.is_finite()) {
            return Err(MatrixError::ZeroVector);
        }
        Ok(ProjectivePoint(v.iter().map(|x| x / n).collect()))
    }

    pub fn vector(&self) -> &[f64] {
        &self.0
    }

    /// Equality as lines, up to sign.
    pub fn same_line(&self, other: &ProjectivePoint, tol: f64) -> bool {
        projective_metric(&self.0, &other.0).map(|d| d <= tol).unwrap_or(false)
    }
}

/// `σ(g, [v]) = ln(‖gv‖/‖v‖)`.
pub fn norm_cocycle(g: &DMatrix<f64>, v: &[f64]) -> Result<f64, MatrixError> {
    let d = g.nrows();
    if v.len() != d {
        return Err(MatrixError::Dimension { expected: d, got: v.len() });
    }
    let nv = norm(v);
    if nv == 0.0 {
        return Err(MatrixError::ZeroVector);
    }
    kappa(g)?;
    let mut out = vec![0.0; d];
    mat_vec(&to_flat(g), v, &mut out, d);
    Ok((norm(&out) / nv).ln())
}

/// `δ([x], [y]) = ‖x ∧ y‖ / (‖x‖‖y‖)`, computed through Lagrange's identity.
pub fn projective_metric(x: &[f64], y: &[f64]) -> Result<f64, MatrixError> {
    if x.len() != y.len() {
        return Err(MatrixError::Dimension { expected: x.len(), got: y.len() });
    }
    let (nx, ny) = (norm(x), norm(y));
    if nx == 0.0 || ny == 0.0 {
        return Err(MatrixError::ZeroVector);
    }
    let c = dot(x, y) / (nx * ny);
    Ok((1.0 - c * c).max(0.0).sqrt())
}

/// Which norm to take of the final product.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormKind {
    Operator,
    Frobenius,
}

/// Running product `L_k = X_k ⋯ X_1` with accumulated log scale.
struct Product<'a> {
    mu: &'a MatrixMeasure,
    m: Vec<f64>,
    tmp: Vec<f64>,
    log_scale: f64,
    steps: usize,
}

impl<'a> Product<'a> {
    fn new(mu: &'a MatrixMeasure) -> Self {
        let d = mu.d;
        let mut m = vec![0.0; d * d];
        for i in 0..d {
            m[i * d + i] = 1.0;
        }
        Product { mu, tmp: m.clone(), m, log_scale: 0.0, steps: 0 }
    }

    #[inline]
    fn step(&mut self, idx: usize) {
        mat_mul(&self.mu.flat[idx], &self.m, &mut self.tmp, self.mu.d);
        std::mem::swap(&mut self.m, &mut self.tmp);
        self.steps += 1;
        if self.steps % RENORM_EVERY == 0 {
            self.renormalise();
        }
    }

    fn renormalise(&mut self) {
        let f = frobenius(&self.m);
        self.m.iter_mut().for_each(|x| *x /= f);
        self.log_scale += f.ln();
    }

    fn log_norm(&self, kind: NormKind) -> f64 {
        let n = match kind {
            NormKind::Operator => op_norm(&self.m, self.mu.d),
            NormKind::Frobenius => frobenius(&self.m),
        };
        self.log_scale + n.ln()
    }

    /// `ln ‖L_k v‖` for a unit vector `v`.
    fn log_apply(&self, v: &[f64]) -> f64 {
        let mut out = vec![0.0; self.mu.d];
        mat_vec(&self.m, v, &mut out, self.mu.d);
        self.log_scale + norm(&out).ln()
    }
}

/// Mean of `(1/n) ln‖L_n‖` with a 99% normal half-width.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LyapunovEstimate {
    pub n: usize,
    pub trials: usize,
    pub mean: f64,
    pub radius: f64,
}

pub fn lyapunov_estimate_with(
    mu: &MatrixMeasure,
    n: usize,
    trials: usize,
    seed: u64,
    kind: NormKind,
) -> Result<LyapunovEstimate, MatrixError> {
    if n == 0 || trials == 0 {
        return Err(MatrixError::BadArgument("n and trials must be positive".into()));
    }
    let vals = montecarlo::par_trials(trials, |j| {
        let mut rng = montecarlo::stream_rng(seed, j);
        let mut draws = mu.sampler.stream();
        let mut p = Product::new(mu);
        for _ in 0..n {
            p.step(draws.draw(&mut rng));
        }
        p.log_norm(kind) / n as f64
    });
    let (mean, radius) = montecarlo::mean_ci(&vals);
    Ok(LyapunovEstimate { n, trials, mean, radius })
}

pub fn lyapunov_estimate(mu: &MatrixMeasure, n: usize, trials: usize, seed: u64) -> Result<LyapunovEstimate, MatrixError> {
    lyapunov_estimate_with(mu, n, trials, seed, NormKind::Operator)
}

fn random_unit<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<f64> {
    loop {
        // Box-Muller normals give a rotation-invariant direction.
        let v: Vec<f64> = (0..d)
            .map(|_| {
                let u1: f64 = 1.0 - rng.gen::<f64>();
                let u2: f64 = rng.gen();
                (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
            })
            .collect();
        let n = norm(&v);
        if n > 1e-8 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

/// Independent samples of the forward chain `x_{k+1} = [g_{k+1} x_k]`, each
/// started from a random direction and run for `burn_in` steps.
pub fn sample_stationary_projective(
    mu: &MatrixMeasure,
    burn_in: usize,
    samples: usize,
    seed: u64,
) -> Vec<ProjectivePoint> {
    let d = mu.d;
    montecarlo::par_trials(samples, |j| {
        let mut rng = montecarlo::stream_rng(seed, j);
        let mut draws = mu.sampler.stream();
        let mut x = random_unit(d, &mut rng);
        let mut y = vec![0.0; d];
        for _ in 0..burn_in {
            mat_vec(&mu.flat[draws.draw(&mut rng)], &x, &mut y, d);
            let n = norm(&y);
            for (xi, yi) in x.iter_mut().zip(&y) {
                *xi = yi / n;
            }
        }
        ProjectivePoint(x)
    })
}

/// Top-gap hint `(ln σ₁ − ln σ₂)/n` of one long product; a clearly positive
/// value suggests proximality, zero suggests its failure. Not a proof.
pub fn proximality_hint(mu: &MatrixMeasure, n: usize, seed: u64) -> f64 {
    let mut rng = montecarlo::stream_rng(seed, 0);
    let mut draws = mu.sampler.stream();
    let mut p = Product::new(mu);
    for _ in 0..n {
        p.step(draws.draw(&mut rng));
    }
    let d = mu.d;
    let m = DMatrix::from_fn(d, d, |i, j| p.m[i * d + j]);
    let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    if sv.len() < 2 || sv[1] <= 0.0 {
        return f64::INFINITY;
    }
    (sv[0].ln() - sv[1].ln()) / n as f64
}

/// `ln(‖x‖‖y‖/|⟨x,y⟩|)` for unit vectors, capped at [`clip_level`].
fn log_inv_cos(x: &[f64], y: &[f64]) -> (f64, bool) {
    let c = dot(x, y).abs();
    let cap = clip_level();
    if c <= (-cap).exp() {
        (cap, true)
    } else {
        ((1.0 / c).ln().min(cap), false)
    }
}

/// Monte Carlo estimate of `𝔠(μ*) = sup_x ∫ ln(‖x‖‖y‖/|⟨x,y⟩|) dν*(y)`.
#[derive(Clone, Debug, Serialize)]
pub struct MatrixCEstimate {
    /// Largest grid value; a lower estimate of the supremum.
    pub value: f64,
    pub radius: f64,
    pub argmax: Vec<f64>,
    pub grid_size: usize,
    pub samples: usize,
    /// Samples clipped at the maximising grid point.
    pub clipped: usize,
}

/// Lines at angles `kπ/count` in the plane.
pub fn circle_net(count: usize) -> Vec<Vec<f64>> {
    (0..count)
        .map(|k| {
            let th = std::f64::consts::PI * k as f64 / count as f64;
            vec![th.cos(), th.sin()]
        })
        .collect()
}

fn integrate_at(x: &[f64], ys: &[ProjectivePoint]) -> (f64, f64, usize) {
    let mut clipped = 0;
    let vals: Vec<f64> = ys
        .iter()
        .map(|y| {
            let (v, c) = log_inv_cos(x, &y.0);
            clipped += usize::from(c);
            v
        })
        .collect();
    let (m, r) = montecarlo::mean_ci(&vals);
    (m, r, clipped)
}

/// Burn-in used for stationary samples in [`estimate_c_matrix`].
pub const C_BURN_IN: usize = 200;

pub fn estimate_c_matrix(mu: &MatrixMeasure, samples: usize, seed: u64) -> Result<MatrixCEstimate, MatrixError> {
    if samples == 0 {
        return Err(MatrixError::BadArgument("need at least one sample".into()));
    }
    let ys = sample_stationary_projective(&mu.adjoint(), C_BURN_IN, samples, seed);
    let d = mu.d;
    let grid: Vec<Vec<f64>> = if d == 2 {
        circle_net(720)
    } else {
        let mut rng = montecarlo::stream_rng(montecarlo::derive_seed(seed, "sphere-net"), 0);
        (0..2000).map(|_| random_unit(d, &mut rng)).collect()
    };
    let evals: Vec<(f64, f64, usize)> = grid.iter().map(|x| integrate_at(x, &ys)).collect();
    let best = |ev: &[(f64, f64, usize)]| {
        ev.iter()
            .enumerate()
            .max_by(|a, b| a.1 .0.total_cmp(&b.1 .0))
            .map(|(i, _)| i)
            .expect("nonempty grid")
    };
    let i = best(&evals);
    let (mut x, mut e) = (grid[i].clone(), evals[i]);
    if d > 2 {
        // Local refinement around the best net point with shrinking steps.
        let mut rng = montecarlo::stream_rng(montecarlo::derive_seed(seed, "refine"), 0);
        let mut step = 0.2;
        for _ in 0..30 {
            let dir = random_unit(d, &mut rng);
            let cand: Vec<f64> = x.iter().zip(&dir).map(|(a, b)| a + step * b).collect();
            let cand = ProjectivePoint::new(&cand)?.0;
            let ce = integrate_at(&cand, &ys);
            if ce.0 > e.0 {
                x = cand;
                e = ce;
            } else {
                step *= 0.8;
            }
        }
    }
    Ok(MatrixCEstimate { value: e.0, radius: e.1, argmax: x, grid_size: grid.len(), samples, clipped: e.2 })
}

/// One row of the matrix tail experiment.
#[derive(Clone, Debug, Serialize)]
pub struct MatrixTailRow {
    pub cell: TailCell,
    /// `None` for the norm form, `Some(v)` for the vector form.
    pub vector: Option<Vec<f64>>,
    pub bound: Bound,
}

/// Deviations `|ln‖L_n v‖ − nℓ|` for each `v` and `|ln‖L_n‖ − nℓ|`, at
/// every checkpoint in the sorted `n_grid`, sharing trajectories.
fn matrix_deviations(
    mu: &MatrixMeasure,
    ell: f64,
    n_grid: &[usize],
    vs: &[Vec<f64>],
    trials: usize,
    seed: u64,
) -> Vec<Vec<Vec<f64>>> {
    let per_trial = montecarlo::par_trials(trials, |j| {
        let mut rng = montecarlo::stream_rng(seed, j);
        let mut draws = mu.sampler.stream();
        let mut p = Product::new(mu);
        let mut out = Vec::with_capacity(n_grid.len());
        for &n in n_grid {
            while p.steps < n {
                p.step(draws.draw(&mut rng));
            }
            let nl = n as f64 * ell;
            let mut row: Vec<f64> = vs.iter().map(|v| (p.log_apply(v) - nl).abs()).collect();
            row.push((p.log_norm(NormKind::Operator) - nl).abs());
            out.push(row);
        }
        out
    });
    // Reshape to [n][quantity][trial].
    (0..n_grid.len())
        .map(|k| {
            (0..=vs.len())
                .map(|q| per_trial.iter().map(|t| t[k][q]).collect())
                .collect()
        })
        .collect()
}

/// Compares empirical tails of `L_n` with the vector form
/// `2 exp(−nt²/(32(κ+𝔠)²))` and the norm form `2d exp(−nt²/(128(κ+𝔠)²))`.
pub fn matrix_concentration_check(
    mu: &MatrixMeasure,
    ell: f64,
    c: f64,
    n_grid: &[usize],
    t_grid: &[f64],
    trials: usize,
    seed: u64,
) -> Result<Vec<MatrixTailRow>, MatrixError> {
    if n_grid.is_empty() || t_grid.is_empty() || trials == 0 {
        return Err(MatrixError::BadArgument("grids and trials must be nonempty".into()));
    }
    let mut ns = n_grid.to_vec();
    ns.sort_unstable();
    ns.dedup();
    let d = mu.d;
    let vs: Vec<Vec<f64>> = (0..d)
        .map(|i| {
            let mut e = vec![0.0; d];
            e[i] = 1.0;
            e
        })
        .chain(std::iter::once(vec![1.0 / (d as f64).sqrt(); d]))
        .collect();
    let devs = matrix_deviations(mu, ell, &ns, &vs, trials, seed);
    let kappa = mu.kappa_s;
    let mut rows = Vec::new();
    for (k, &n) in ns.iter().enumerate() {
        for (q, dev) in devs[k].iter().enumerate() {
            let cells = montecarlo::tail_cells(n, dev, t_grid);
            for (cell, &t) in cells.into_iter().zip(t_grid) {
                let (vector, bound) = if q < vs.len() {
                    (Some(vs[q].clone()), bounds::simple_concentration_bound(n as f64, t, kappa, c))
                } else {
                    (None, bounds::matrix_norm_bound(n as f64, t, kappa, c, d))
                };
                rows.push(MatrixTailRow { cell, vector, bound });
            }
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn op_norm_matches_svd() {
        let mut rng = montecarlo::stream_rng(5, 0);
        for d in [2usize, 3, 5] {
            for _ in 0..20 {
                let m = DMatrix::from_fn(d, d, |_, _| rng.gen_range(-2.0..2.0));
                let svd = m.clone().singular_values().max();
                let ours = op_norm(&to_flat(&m), d);
                assert!((ours - svd).abs() <= 1e-10 * svd, "{d}: {ours} vs {svd}");
            }
        }
    }

    #[test]
    fn cocycle_examples() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.5]);
        assert!((norm_cocycle(&a, &[1.0, 0.0]).unwrap() - 2f64.ln()).abs() < 1e-15);
        let id = DMatrix::<f64>::identity(2, 2);
        assert_eq!(norm_cocycle(&id, &[0.3, 0.4]).unwrap(), 0.0);
        assert!(norm_cocycle(&a, &[0.0, 0.0]).is_err());
        let sing = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(norm_cocycle(&sing, &[1.0, 0.0]).is_err());
    }

    #[test]
    fn metric_examples() {
        assert!((projective_metric(&[1.0, 0.0], &[0.0, 1.0]).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(projective_metric(&[0.6, 0.8], &[0.6, 0.8]).unwrap(), 0.0);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((projective_metric(&[1.0, 0.0], &[s, s]).unwrap() - s).abs() < 1e-15);
    }

    #[test]
    fn deterministic_lyapunov() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.5]);
        let mu = MatrixMeasure::new(vec![(a, 1.0)]).unwrap();
        let l = lyapunov_estimate(&mu, 100, 2, 1).unwrap();
        assert!((l.mean - 2f64.ln()).abs() < 1e-12);
        let th = 0.3f64;
        let r = DMatrix::from_row_slice(2, 2, &[th.cos(), -th.sin(), th.sin(), th.cos()]);
        let rot = MatrixMeasure::new(vec![(r, 1.0)]).unwrap();
        assert!(lyapunov_estimate(&rot, 1000, 1, 1).unwrap().mean.abs() < 1e-12);
        let ys = sample_stationary_projective(&mu, 60, 8, 2);
        let e1 = ProjectivePoint::new(&[1.0, 0.0]).unwrap();
        assert!(ys.iter().all(|y| y.same_line(&e1, 1e-9)));
    }

    #[test]
    fn point_mass_integrand() {
        let y = [ProjectivePoint::new(&[1.0, 0.0]).unwrap()];
        assert_eq!(integrate_at(&[1.0, 0.0], &y).0, 0.0);
        let (v, _, clipped) = integrate_at(&[0.0, 1.0], &y);
        assert_eq!(v, clip_level());
        assert_eq!(clipped, 1);
    }
}
