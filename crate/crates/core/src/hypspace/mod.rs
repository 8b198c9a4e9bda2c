//! Geometry of the two model hyperbolic spaces: the Cayley tree of a free
//! group `F_k` (basepoint = identity vertex) and the upper half-plane
//! (basepoint = `i`).
//!
//! Boundary points are kept in model coordinates. A tree boundary point is an
//! infinite reduced word known through a finite prefix; any query whose
//! answer depends on letters past the prefix fails with
//! [`GeometryError::InsufficientDepth`] instead of guessing.

pub mod plane;
pub mod word;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use plane::{Mobius, PlaneBoundary, BASEPOINT};
pub use word::Word;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("invalid word: {0}")]
    BadWord(String),
    #[error("invalid matrix: {0}")]
    BadMatrix(String),
    #[error("invalid point: {0}")]
    BadPoint(String),
    #[error("arguments live in different models")]
    ModelMismatch,
    #[error("boundary prefix of depth {depth} does not determine the result")]
    InsufficientDepth { depth: usize },
    #[error("invalid model parameters: {0}")]
    BadParams(String),
}

/// Which model space a value lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Model {
    Tree { rank: u8 },
    Plane,
}

impl Model {
    pub fn tree(rank: u8) -> Result<Self, GeometryError> {
        if rank == 0 || rank > word::MAX_RANK {
            return Err(GeometryError::BadParams(format!(
                "tree rank {rank} outside 1..={}",
                word::MAX_RANK
            )));
        }
        Ok(Model::Tree { rank })
    }

    pub fn is_discrete(self) -> bool {
        matches!(self, Model::Tree { .. })
    }
}

/// Per-model constants: hyperbolicity `δ`, `D₀ = 2·diam(G\M)` and
/// `D₁ = max(D₀, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub model: Model,
    pub delta: f64,
    pub d0: f64,
    pub d1: f64,
}

/// Safe upper bound for the four-point constant of `H²`.
pub const PLANE_DELTA: f64 = 0.7;

impl ModelParams {
    pub fn tree(rank: u8) -> Result<Self, GeometryError> {
        Ok(ModelParams { model: Model::tree(rank)?, delta: 0.0, d0: 1.0, d1: 1.0 })
    }

    pub fn plane(delta: f64) -> Result<Self, GeometryError> {
        if !(delta.is_finite() && delta >= 0.0) {
            return Err(GeometryError::BadParams(format!("delta {delta} must be >= 0")));
        }
        Ok(ModelParams { model: Model::Plane, delta, d0: 0.0, d1: 1.0 })
    }

    pub fn for_model(model: Model) -> Result<Self, GeometryError> {
        match model {
            Model::Tree { rank } => Self::tree(rank),
            Model::Plane => Self::plane(PLANE_DELTA),
        }
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        if !(self.delta >= 0.0) {
            return Err(GeometryError::BadParams("delta must be >= 0".into()));
        }
        if matches!(self.model, Model::Tree { .. }) && self.delta != 0.0 {
            return Err(GeometryError::BadParams("tree model has delta = 0".into()));
        }
        if (self.d1 - self.d0.max(1.0)).abs() > 1e-12 {
            return Err(GeometryError::BadParams("D1 must equal max(D0, 1)".into()));
        }
        Ok(())
    }
}

/// A group element acting on one of the models.
#[derive(Clone, Debug, PartialEq)]
pub enum Isometry {
    Tree { rank: u8, word: Word },
    Plane(Mobius),
}

impl Isometry {
    pub fn identity(model: Model) -> Self {
        match model {
            Model::Tree { rank } => Isometry::Tree { rank, word: Word::identity() },
            Model::Plane => Isometry::Plane(Mobius::IDENTITY),
        }
    }

    pub fn tree(rank: u8, word: Word) -> Result<Self, GeometryError> {
        Model::tree(rank)?;
        if word.max_generator().is_some_and(|g| g >= rank) {
            return Err(GeometryError::BadWord(format!("{word} uses letters outside rank {rank}")));
        }
        Ok(Isometry::Tree { rank, word })
    }

    pub fn parse_word(s: &str, rank: u8) -> Result<Self, GeometryError> {
        Model::tree(rank)?;
        Ok(Isometry::Tree { rank, word: Word::parse(s, rank)? })
    }

    pub fn model(&self) -> Model {
        match self {
            Isometry::Tree { rank, .. } => Model::Tree { rank: *rank },
            Isometry::Plane(_) => Model::Plane,
        }
    }

    pub fn compose(&self, rhs: &Isometry) -> Result<Isometry, GeometryError> {
        match (self, rhs) {
            (Isometry::Tree { rank, word }, Isometry::Tree { rank: r2, word: w2 }) if rank == r2 => {
                Ok(Isometry::Tree { rank: *rank, word: word.mul(w2) })
            }
            (Isometry::Plane(a), Isometry::Plane(b)) => Ok(Isometry::Plane(a.compose(b))),
            _ => Err(GeometryError::ModelMismatch),
        }
    }

    pub fn inverse(&self) -> Isometry {
        match self {
            Isometry::Tree { rank, word } => Isometry::Tree { rank: *rank, word: word.inverse() },
            Isometry::Plane(m) => Isometry::Plane(m.inverse()),
        }
    }

    pub fn pow(&self, e: i64) -> Isometry {
        match self {
            Isometry::Tree { rank, word } => Isometry::Tree { rank: *rank, word: word.pow(e) },
            Isometry::Plane(m) => {
                let base = if e < 0 { m.inverse() } else { *m };
                let mut out = Mobius::IDENTITY;
                for _ in 0..e.unsigned_abs() {
                    out = out.compose(&base);
                }
                Isometry::Plane(out)
            }
        }
    }

    /// `g·o`.
    pub fn orbit_point(&self) -> SpacePoint {
        match self {
            Isometry::Tree { rank, word } => SpacePoint::Tree { rank: *rank, vertex: word.clone() },
            Isometry::Plane(m) => SpacePoint::Plane(m.apply(BASEPOINT)),
        }
    }

    pub fn apply(&self, x: &SpacePoint) -> Result<SpacePoint, GeometryError> {
        match (self, x) {
            (Isometry::Tree { rank, word }, SpacePoint::Tree { rank: r2, vertex }) if rank == r2 => {
                Ok(SpacePoint::Tree { rank: *rank, vertex: word.mul(vertex) })
            }
            (Isometry::Plane(m), SpacePoint::Plane(z)) => Ok(SpacePoint::Plane(m.apply(*z))),
            _ => Err(GeometryError::ModelMismatch),
        }
    }

    /// Action on the boundary. On trees the image prefix is `reduce(g·p)`; if
    /// `g` cancels the entire stored prefix the image is undetermined.
    pub fn apply_boundary(&self, xi: &BoundaryPoint) -> Result<BoundaryPoint, GeometryError> {
        match (self, xi) {
            (Isometry::Tree { rank, word }, BoundaryPoint::Tree { rank: r2, prefix, exact })
                if rank == r2 =>
            {
                let cancelled = word
                    .letters()
                    .iter()
                    .rev()
                    .zip(prefix.letters())
                    .take_while(|(a, b)| **a == word::inverse_letter(**b))
                    .count();
                if cancelled >= prefix.len() {
                    return Err(GeometryError::InsufficientDepth { depth: prefix.len() });
                }
                Ok(BoundaryPoint::Tree { rank: *rank, prefix: word.mul(prefix), exact: *exact })
            }
            (Isometry::Plane(m), BoundaryPoint::Plane(b)) => {
                Ok(BoundaryPoint::Plane(m.apply_boundary(*b)))
            }
            _ => Err(GeometryError::ModelMismatch),
        }
    }
}

/// A point of the model space.
#[derive(Clone, Debug, PartialEq)]
pub enum SpacePoint {
    Tree { rank: u8, vertex: Word },
    Plane(Complex64),
}

impl SpacePoint {
    pub fn basepoint(model: Model) -> Self {
        match model {
            Model::Tree { rank } => SpacePoint::Tree { rank, vertex: Word::identity() },
            Model::Plane => SpacePoint::Plane(BASEPOINT),
        }
    }

    pub fn plane(z: Complex64) -> Result<Self, GeometryError> {
        plane::check_point(z)?;
        Ok(SpacePoint::Plane(z))
    }

    pub fn model(&self) -> Model {
        match self {
            SpacePoint::Tree { rank, .. } => Model::Tree { rank: *rank },
            SpacePoint::Plane(_) => Model::Plane,
        }
    }
}

/// A point of the Gromov boundary in model coordinates.
#[derive(Clone, Debug, PartialEq)]
pub enum BoundaryPoint {
    /// An infinite reduced word known through `prefix`; `exact` records that
    /// the prefix is certified to agree with the limit word.
    Tree { rank: u8, prefix: Word, exact: bool },
    Plane(PlaneBoundary),
}

impl BoundaryPoint {
    pub fn tree(rank: u8, prefix: Word, exact: bool) -> Result<Self, GeometryError> {
        if prefix.is_empty() {
            return Err(GeometryError::BadPoint("tree boundary prefix must be nonempty".into()));
        }
        Ok(BoundaryPoint::Tree { rank, prefix, exact })
    }

    /// The end `g^∞` of the axis of a cyclically reduced tree word, to `depth` letters.
    pub fn tree_power(rank: u8, g: &Word, depth: usize) -> Result<Self, GeometryError> {
        if g.is_empty() {
            return Err(GeometryError::BadPoint("identity has no attracting end".into()));
        }
        let l = g.letters();
        if l.len() > 1 && l[0] == word::inverse_letter(l[l.len() - 1]) {
            return Err(GeometryError::BadPoint(format!("{g} is not cyclically reduced")));
        }
        let prefix = Word::from_letters(l.iter().copied().cycle().take(depth));
        Self::tree(rank, prefix, true)
    }

    pub fn model(&self) -> Model {
        match self {
            BoundaryPoint::Tree { rank, .. } => Model::Tree { rank: *rank },
            BoundaryPoint::Plane(_) => Model::Plane,
        }
    }

    pub fn depth(&self) -> Option<usize> {
        match self {
            BoundaryPoint::Tree { prefix, .. } => Some(prefix.len()),
            BoundaryPoint::Plane(_) => None,
        }
    }
}

/// Either an interior or a boundary point.
#[derive(Clone, Debug, PartialEq)]
pub enum Point {
    Interior(SpacePoint),
    Boundary(BoundaryPoint),
}

impl Point {
    pub fn model(&self) -> Model {
        match self {
            Point::Interior(x) => x.model(),
            Point::Boundary(b) => b.model(),
        }
    }
}

impl From<SpacePoint> for Point {
    fn from(x: SpacePoint) -> Self {
        Point::Interior(x)
    }
}

impl From<BoundaryPoint> for Point {
    fn from(b: BoundaryPoint) -> Self {
        Point::Boundary(b)
    }
}

pub fn distance(x: &SpacePoint, y: &SpacePoint) -> Result<f64, GeometryError> {
    match (x, y) {
        (SpacePoint::Tree { rank, vertex: a }, SpacePoint::Tree { rank: r2, vertex: b })
            if rank == r2 =>
        {
            let c = a.common_prefix_len(b);
            Ok((a.len() + b.len() - 2 * c) as f64)
        }
        (SpacePoint::Plane(z), SpacePoint::Plane(w)) => Ok(plane::distance(*z, *w)),
        _ => Err(GeometryError::ModelMismatch),
    }
}

/// `κ(g) = d(g·o, o)`.
pub fn displacement(g: &Isometry) -> f64 {
    match g {
        Isometry::Tree { word, .. } => word.len() as f64,
        Isometry::Plane(m) => m.displacement(),
    }
}

/// The isometry taking `base` to `o`, so that products based at `base` can be
/// evaluated at `o`.
fn recentre(base: &SpacePoint) -> Isometry {
    match base {
        SpacePoint::Tree { rank, vertex } => Isometry::Tree { rank: *rank, word: vertex.inverse() },
        SpacePoint::Plane(z) => Isometry::Plane(Mobius::moving_base_to(*z).inverse()),
    }
}

fn translate(g: &Isometry, p: &Point) -> Result<Point, GeometryError> {
    Ok(match p {
        Point::Interior(x) => Point::Interior(g.apply(x)?),
        Point::Boundary(b) => Point::Boundary(g.apply_boundary(b)?),
    })
}

/// Gromov product `(x|y)_base`, including boundary arguments.
pub fn gromov_product(x: &Point, y: &Point, base: &SpacePoint) -> Result<f64, GeometryError> {
    let m = base.model();
    if x.model() != m || y.model() != m {
        return Err(GeometryError::ModelMismatch);
    }
    let at_origin = match base {
        SpacePoint::Tree { vertex, .. } => vertex.is_empty(),
        SpacePoint::Plane(z) => *z == BASEPOINT,
    };
    if at_origin {
        return gromov_at_origin(x, y);
    }
    let g = recentre(base);
    gromov_at_origin(&translate(&g, x)?, &translate(&g, y)?)
}

fn gromov_at_origin(x: &Point, y: &Point) -> Result<f64, GeometryError> {
    use Point::{Boundary, Interior};
    match (x, y) {
        (Interior(a), Interior(b)) => {
            let o = SpacePoint::basepoint(a.model());
            Ok(0.5 * (distance(a, &o)? + distance(b, &o)? - distance(a, b)?))
        }
        (Interior(a), Boundary(b)) | (Boundary(b), Interior(a)) => interior_boundary(a, b),
        (Boundary(a), Boundary(b)) => boundary_boundary(a, b),
    }
}

fn interior_boundary(x: &SpacePoint, xi: &BoundaryPoint) -> Result<f64, GeometryError> {
    match (x, xi) {
        (SpacePoint::Tree { vertex, .. }, BoundaryPoint::Tree { prefix, .. }) => {
            let c = vertex.common_prefix_len(prefix);
            if c == prefix.len() && vertex.len() > prefix.len() {
                return Err(GeometryError::InsufficientDepth { depth: prefix.len() });
            }
            Ok(c as f64)
        }
        (SpacePoint::Plane(z), BoundaryPoint::Plane(b)) => {
            let d = plane::distance(*z, BASEPOINT);
            let beta = (b.poisson_kernel(BASEPOINT) / b.poisson_kernel(*z)).ln();
            Ok(0.5 * (d - beta))
        }
        _ => Err(GeometryError::ModelMismatch),
    }
}

fn boundary_boundary(a: &BoundaryPoint, b: &BoundaryPoint) -> Result<f64, GeometryError> {
    match (a, b) {
        (BoundaryPoint::Tree { prefix: p, .. }, BoundaryPoint::Tree { prefix: q, .. }) => {
            let c = p.common_prefix_len(q);
            if c >= p.len().min(q.len()) {
                return Err(GeometryError::InsufficientDepth { depth: p.len().min(q.len()) });
            }
            Ok(c as f64)
        }
        (BoundaryPoint::Plane(x), BoundaryPoint::Plane(y)) => {
            let gap = (x.to_circle() - y.to_circle()).norm();
            if gap == 0.0 {
                Ok(f64::INFINITY)
            } else {
                Ok(-(gap / 2.0).ln())
            }
        }
        _ => Err(GeometryError::ModelMismatch),
    }
}

/// Horofunction `h_ξ(m) = d(o, m) − 2(m|ξ)_o`.
pub fn horofunction(xi: &BoundaryPoint, m: &SpacePoint) -> Result<f64, GeometryError> {
    if let (BoundaryPoint::Plane(b), SpacePoint::Plane(z)) = (xi, m) {
        return Ok((b.poisson_kernel(BASEPOINT) / b.poisson_kernel(*z)).ln());
    }
    let o = SpacePoint::basepoint(m.model());
    Ok(distance(&o, m)? - 2.0 * interior_boundary(m, xi)?)
}

/// Busemann cocycle `σ(g, ξ) = h_ξ(g⁻¹o)`. For an interior point `x` this is
/// `d(x, g⁻¹o) − d(x, o)`.
pub fn busemann(g: &Isometry, xi: &Point) -> Result<f64, GeometryError> {
    if g.model() != xi.model() {
        return Err(GeometryError::ModelMismatch);
    }
    let m = g.inverse().orbit_point();
    match xi {
        Point::Boundary(b) => horofunction(b, &m),
        Point::Interior(x) => {
            let o = SpacePoint::basepoint(x.model());
            Ok(distance(x, &m)? - distance(x, &o)?)
        }
    }
}

/// Shadow membership `z ∈ O_C(x, y)`, i.e. `(z|y)_x ≥ d(x, y) − C`.
pub fn shadow_contains(
    c: f64,
    x: &SpacePoint,
    y: &SpacePoint,
    z: &SpacePoint,
) -> Result<bool, GeometryError> {
    let dxy = distance(x, y)?;
    let prod = gromov_product(&Point::Interior(z.clone()), &Point::Interior(y.clone()), x)?;
    Ok(prod >= dxy - c - 1e-12 * dxy.max(1.0))
}

/// Four-point defect of a single quadruple, maximised over the choice of base.
pub fn four_point_defect(pts: [&SpacePoint; 4]) -> Result<f64, GeometryError> {
    let mut worst = 0.0f64;
    for b in 0..4 {
        let others: Vec<&SpacePoint> = (0..4).filter(|&i| i != b).map(|i| pts[i]).collect();
        let base = pts[b];
        let gp = |u: &SpacePoint, v: &SpacePoint| -> Result<f64, GeometryError> {
            let db = distance(u, base)? + distance(v, base)? - distance(u, v)?;
            Ok(0.5 * db)
        };
        let mut p = [
            gp(others[0], others[1])?,
            gp(others[1], others[2])?,
            gp(others[0], others[2])?,
        ];
        p.sort_by(f64::total_cmp);
        worst = worst.max(p[1] - p[0]);
    }
    Ok(worst)
}

/// Empirical supremum of the four-point defect over `quadruples` samples.
pub fn estimate_delta<F>(mut sampler: F, quadruples: usize) -> Result<f64, GeometryError>
where
    F: FnMut() -> SpacePoint,
{
    let mut sup = 0.0f64;
    for _ in 0..quadruples {
        let q = [sampler(), sampler(), sampler(), sampler()];
        sup = sup.max(four_point_defect([&q[0], &q[1], &q[2], &q[3]])?);
    }
    Ok(sup)
}

/// Uniform random reduced word of length at most `radius` (uniform on the ball).
pub fn random_tree_point<R: Rng + ?Sized>(rank: u8, radius: usize, rng: &mut R) -> SpacePoint {
    let total = word::ball_size(rank, radius as u64);
    let mut u = rng.gen::<f64>() * total;
    let mut len = 0;
    let mut sphere = 1.0;
    while len < radius {
        if u < sphere {
            break;
        }
        u -= sphere;
        sphere = if len == 0 { 2.0 * f64::from(rank) } else { sphere * (2.0 * f64::from(rank) - 1.0) };
        len += 1;
    }
    let mut w = Word::identity();
    while w.len() < len {
        let l = rng.gen_range(0..2 * rank);
        if w.letters().last() != Some(&word::inverse_letter(l)) {
            w.push(l);
        }
    }
    SpacePoint::Tree { rank, vertex: w }
}

/// Point uniform for hyperbolic area in the disk of radius `radius` about `i`.
pub fn random_plane_point<R: Rng + ?Sized>(radius: f64, rng: &mut R) -> SpacePoint {
    let u: f64 = rng.gen();
    let r = (1.0 + u * (radius.cosh() - 1.0)).acosh();
    let theta = rng.gen::<f64>() * std::f64::consts::TAU;
    SpacePoint::Plane(plane::polar_point(r, theta))
}
