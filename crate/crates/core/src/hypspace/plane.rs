//! Upper half-plane model of `H²` with basepoint `i`.

use num_complex::Complex64;

use super::GeometryError;

pub const BASEPOINT: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// An orientation-preserving isometry `z ↦ (az + b)/(cz + d)` stored as a
/// real matrix with determinant one.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mobius {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Mobius {
    pub const IDENTITY: Mobius = Mobius { a: 1.0, b: 0.0, c: 0.0, d: 1.0 };

    /// Rescales to unit determinant. Rejects non-positive or non-finite determinants.
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self, GeometryError> {
        let det = a * d - b * c;
        if !(det.is_finite() && det > 0.0) {
            return Err(GeometryError::BadMatrix(format!(
                "determinant {det} is not positive"
            )));
        }
        let s = det.sqrt();
        Ok(Mobius { a: a / s, b: b / s, c: c / s, d: d / s })
    }

    /// Hyperbolic translation of length `t` along the imaginary axis.
    pub fn translation(t: f64) -> Self {
        let e = (t / 2.0).exp();
        Mobius { a: e, b: 0.0, c: 0.0, d: 1.0 / e }
    }

    /// Rotation by angle `theta` about `i`.
    pub fn rotation(theta: f64) -> Self {
        let (s, c) = (theta / 2.0).sin_cos();
        Mobius { a: c, b: s, c: -s, d: c }
    }

    /// The isometry sending `i` to `p`.
    pub fn moving_base_to(p: Complex64) -> Self {
        let sy = p.im.sqrt();
        Mobius { a: sy, b: p.re / sy, c: 0.0, d: 1.0 / sy }
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn compose(&self, rhs: &Mobius) -> Mobius {
        let m = Mobius {
            a: self.a * rhs.a + self.b * rhs.c,
            b: self.a * rhs.b + self.b * rhs.d,
            c: self.c * rhs.a + self.d * rhs.c,
            d: self.c * rhs.b + self.d * rhs.d,
        };
        m.renormalized()
    }

    /// Pulls the determinant back to one while it can still be computed
    /// accurately; for large entries `ad − bc` is dominated by cancellation.
    fn renormalized(self) -> Mobius {
        let det = self.det();
        let size = (self.a * self.d).abs() + (self.b * self.c).abs();
        if size < 1e8 && det > 0.0 && (det - 1.0).abs() > 1e-14 {
            let s = det.sqrt();
            Mobius { a: self.a / s, b: self.b / s, c: self.c / s, d: self.d / s }
        } else {
            self
        }
    }

    pub fn inverse(&self) -> Mobius {
        Mobius { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    /// `(az + b)/(cz + d)`. The imaginary part is taken as `Im z / |cz + d|²`,
    /// which uses the unit determinant instead of the cancelling `ad − bc`.
    pub fn apply(&self, z: Complex64) -> Complex64 {
        let num = z * self.a + self.b;
        let den = z * self.c + self.d;
        let q = den.norm_sqr();
        Complex64::new((num * den.conj()).re / q, z.im / q)
    }

    pub fn apply_boundary(&self, x: PlaneBoundary) -> PlaneBoundary {
        match x {
            PlaneBoundary::Infinity => {
                if self.c == 0.0 {
                    PlaneBoundary::Infinity
                } else {
                    PlaneBoundary::Real(self.a / self.c)
                }
            }
            PlaneBoundary::Real(t) => {
                let den = self.c * t + self.d;
                if den == 0.0 {
                    PlaneBoundary::Infinity
                } else {
                    PlaneBoundary::Real((self.a * t + self.b) / den)
                }
            }
        }
    }

    /// Distance to `±I` in the max-entry norm; `PSL₂` identifies the two.
    pub fn distance_to_identity(&self) -> f64 {
        let plus = (self.a - 1.0).abs().max(self.b.abs()).max(self.c.abs()).max((self.d - 1.0).abs());
        let minus = (self.a + 1.0).abs().max(self.b.abs()).max(self.c.abs()).max((self.d + 1.0).abs());
        plus.min(minus)
    }

    /// `d(g·i, i)`. Once the entries are large, `acosh(‖g‖²_F / 2)` is used,
    /// in logarithmic form so that it cannot overflow.
    pub fn displacement(&self) -> f64 {
        let m = self.a.abs().max(self.b.abs()).max(self.c.abs()).max(self.d.abs());
        if m < 1e4 {
            return distance(self.apply(BASEPOINT), BASEPOINT);
        }
        let scaled: f64 = [self.a, self.b, self.c, self.d].iter().map(|x| (x / m).powi(2)).sum();
        // acosh(x) = ln(2x) − O(x⁻²) and x ≥ 5·10⁷ here.
        2.0 * m.ln() + scaled.ln()
    }
}

/// A point of `∂H² = ℝ ∪ {∞}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PlaneBoundary {
    Real(f64),
    Infinity,
}

impl PlaneBoundary {
    /// Image on the unit circle under the Cayley map `z ↦ (z − i)/(z + i)`
    /// (which sends the basepoint to the origin).
    pub fn to_circle(self) -> Complex64 {
        match self {
            PlaneBoundary::Infinity => Complex64::new(1.0, 0.0),
            PlaneBoundary::Real(t) => {
                let z = Complex64::new(t, 0.0);
                (z - BASEPOINT) / (z + BASEPOINT)
            }
        }
    }

    pub fn from_circle(w: Complex64) -> Self {
        let w = w / w.norm();
        let den = Complex64::new(1.0, 0.0) - w;
        if den.norm() < 1e-300 {
            return PlaneBoundary::Infinity;
        }
        let z = BASEPOINT * (Complex64::new(1.0, 0.0) + w) / den;
        PlaneBoundary::Real(z.re)
    }

    /// Poisson kernel `Im z / |z − ξ|²` (or `Im z` at infinity).
    pub fn poisson_kernel(self, z: Complex64) -> f64 {
        match self {
            PlaneBoundary::Infinity => z.im,
            PlaneBoundary::Real(t) => z.im / (z - Complex64::new(t, 0.0)).norm_sqr(),
        }
    }
}

pub fn check_point(z: Complex64) -> Result<(), GeometryError> {
    if z.im > 0.0 && z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(GeometryError::BadPoint(format!("{z} is not in the upper half-plane")))
    }
}

/// Hyperbolic distance, `2 asinh(|z − w| / (2 √(Im z Im w)))`.
pub fn distance(z: Complex64, w: Complex64) -> f64 {
    2.0 * ((z - w).norm() / (2.0 * (z.im * w.im).sqrt())).asinh()
}

/// Point at distance `r` from `i` in direction `theta` (disk-model angle).
pub fn polar_point(r: f64, theta: f64) -> Complex64 {
    let w = Complex64::from_polar((r / 2.0).tanh(), theta);
    let one = Complex64::new(1.0, 0.0);
    BASEPOINT * (one + w) / (one - w)
}

/// Area of a hyperbolic disk of radius `r`.
pub fn disk_area(r: f64) -> f64 {
    2.0 * std::f64::consts::PI * (r.cosh() - 1.0)
}
