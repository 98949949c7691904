//! Hyperbolic 2- and 3-space, Möbius isometries, and robust distances.
//!
//! Both models are upper half-space models: `H2` is the upper half-plane
//! `{z ∈ C : Im z > 0}` and `H3` is `{(z, t) : z ∈ C, t > 0}` with horizontal
//! coordinate `z` and height `t`. A unit-determinant matrix `[[a,b],[c,d]]`
//! acts on H2 by the fractional-linear map `z ↦ (az+b)/(cz+d)` and on H3 by
//! its Poincaré extension, computed in quaternion form (see [`Mobius::apply`]).
//! Half-space models are preferred to the ball because parabolic generators
//! become affine maps with exactly representable entries.
//!
//! Distances come from the cosh formula
//!
//! ```text
//! cosh d(p, q) = 1 + |p − q|² / (2 · ht(p) · ht(q)),
//! ```
//!
//! where `|p − q|` is the Euclidean distance and `ht` the height (imaginary
//! part in H2). The formula is exact in both models. For nearly coincident
//! points rounding can push the computed cosh a hair below 1; values in
//! `[1, 1 + 1e−15]` are clamped to distance 0 rather than risk NaN.

use num_complex::Complex64;

use crate::{Error, Result};

/// Matrices are renormalized to determinant 1; products of unit-determinant
/// maps drift multiplicatively, staying well inside this tolerance for any
/// word length this crate enumerates.
pub const DET_TOL: f64 = 1e-12;

/// Tolerance on |tr| − 2 for the parabolic/loxodromic decision.
pub const TRACE_TOL: f64 = 1e-9;

/// cosh values in [1, 1 + COSH_CLAMP] are treated as distance zero.
const COSH_CLAMP: f64 = 1e-15;

/// Heights below this are reported as underflow rather than silently kept.
const MIN_HEIGHT: f64 = 1e-300;

/// Which hyperbolic space a point (or group) lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Model {
    /// Upper half-plane, boundary R ∪ {∞}.
    #[serde(rename = "h2")]
    H2,
    /// Upper half-space, boundary C ∪ {∞}.
    #[serde(rename = "h3")]
    H3,
}

impl std::fmt::Display for Model {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Model::H2 => "H2",
            Model::H3 => "H3",
        })
    }
}

/// A point of H2 or H3 in upper half-space coordinates.
///
/// `H2` stores `z` with `Im z > 0`; `H3` stores a horizontal coordinate
/// `z ∈ C` and a height `t > 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum HPoint {
    H2 { z: Complex64 },
    H3 { z: Complex64, t: f64 },
}

impl HPoint {
    /// Point of the upper half-plane; errors unless `y > 0`.
    pub fn h2(x: f64, y: f64) -> Result<HPoint> {
        if !(y > 0.0) {
            return Err(Error::NonPositiveHeight { height: y });
        }
        Ok(HPoint::H2 { z: Complex64::new(x, y) })
    }

    /// Point of upper half-space; errors unless `t > 0`.
    pub fn h3(x: f64, y: f64, t: f64) -> Result<HPoint> {
        if !(t > 0.0) {
            return Err(Error::NonPositiveHeight { height: t });
        }
        Ok(HPoint::H3 { z: Complex64::new(x, y), t })
    }

    /// The conventional base point: `i` in H2, `(0, 0, 1)` in H3.
    pub fn base(model: Model) -> HPoint {
        match model {
            Model::H2 => HPoint::H2 { z: Complex64::new(0.0, 1.0) },
            Model::H3 => HPoint::H3 { z: Complex64::new(0.0, 0.0), t: 1.0 },
        }
    }

    pub fn model(&self) -> Model {
        match self {
            HPoint::H2 { .. } => Model::H2,
            HPoint::H3 { .. } => Model::H3,
        }
    }

    /// Height above the boundary: `Im z` in H2, `t` in H3.
    pub fn height(&self) -> f64 {
        match *self {
            HPoint::H2 { z } => z.im,
            HPoint::H3 { t, .. } => t,
        }
    }

    /// Squared Euclidean distance between two points of the same model.
    fn euclid_sq(&self, other: &HPoint) -> Result<f64> {
        match (*self, *other) {
            (HPoint::H2 { z: z1 }, HPoint::H2 { z: z2 }) => Ok((z1 - z2).norm_sqr()),
            (HPoint::H3 { z: z1, t: t1 }, HPoint::H3 { z: z2, t: t2 }) => {
                Ok((z1 - z2).norm_sqr() + (t1 - t2) * (t1 - t2))
            }
            _ => Err(Error::ModelMismatch),
        }
    }
}

/// Hyperbolic distance between two points of the same model.
///
/// Symmetric; zero iff the points coincide to machine precision; invariant
/// under [`Mobius::apply`] by the same map (up to 1e−9 relative).
///
/// # Errors
///
/// [`Error::ModelMismatch`] when the points live in different models.
///
/// # Examples
///
/// ```
/// use zonal::hyperbolic::{distance, HPoint};
///
/// let i = HPoint::h2(0.0, 1.0)?;
/// let two_i = HPoint::h2(0.0, 2.0)?;
/// // vertical geodesic: d(ai, bi) = ln(b/a)
/// assert!((distance(&i, &two_i)? - std::f64::consts::LN_2).abs() < 1e-15);
/// # Ok::<(), zonal::Error>(())
/// ```
pub fn distance(p: &HPoint, q: &HPoint) -> Result<f64> {
    let num = p.euclid_sq(q)?;
    let ch = 1.0 + num / (2.0 * p.height() * q.height());
    if ch <= 1.0 + COSH_CLAMP {
        return Ok(0.0);
    }
    Ok(ch.acosh())
}

/// Trace-based classification of a Möbius map. Elliptic maps are classified,
/// not rejected; group validation refuses them later.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IsometryClass {
    Identity,
    Elliptic,
    Parabolic,
    Loxodromic,
}

impl std::fmt::Display for IsometryClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            IsometryClass::Identity => "identity",
            IsometryClass::Elliptic => "elliptic",
            IsometryClass::Parabolic => "parabolic",
            IsometryClass::Loxodromic => "loxodromic",
        })
    }
}

/// A Möbius transformation as a unit-determinant 2×2 complex matrix
/// `[[a, b], [c, d]]`, acting on H2 (real entries) or H3 (complex entries).
///
/// The matrix and its negative act identically (the group is PSL(2, ·));
/// comparisons account for the sign ambiguity.
#[derive(Clone, Copy, Debug)]
pub struct Mobius {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl Mobius {
    /// Builds a map from matrix entries, rescaling to determinant 1.
    ///
    /// # Errors
    ///
    /// [`Error::SingularMatrix`] when `|ad − bc|` is too small to normalize.
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<Mobius> {
        let det = a * d - b * c;
        let det_abs = det.norm();
        if det_abs < 1e-100 {
            return Err(Error::SingularMatrix { det_abs });
        }
        let s = det.sqrt().inv();
        Ok(Mobius { a: a * s, b: b * s, c: c * s, d: d * s })
    }

    /// Convenience constructor from real entries (the H2 case).
    pub fn from_real(a: f64, b: f64, c: f64, d: f64) -> Result<Mobius> {
        Mobius::new(
            Complex64::new(a, 0.0),
            Complex64::new(b, 0.0),
            Complex64::new(c, 0.0),
            Complex64::new(d, 0.0),
        )
    }

    pub fn identity() -> Mobius {
        Mobius {
            a: Complex64::new(1.0, 0.0),
            b: Complex64::new(0.0, 0.0),
            c: Complex64::new(0.0, 0.0),
            d: Complex64::new(1.0, 0.0),
        }
    }

    /// The parabolic translation `z ↦ z + t`.
    pub fn translation(t: Complex64) -> Mobius {
        Mobius {
            a: Complex64::new(1.0, 0.0),
            b: t,
            c: Complex64::new(0.0, 0.0),
            d: Complex64::new(1.0, 0.0),
        }
    }

    pub fn det(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> Complex64 {
        self.a + self.d
    }

    /// Inverse of a unit-determinant matrix: `[[d, −b], [−c, a]]`.
    pub fn inverse(&self) -> Mobius {
        Mobius { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    /// Matrix product `self · other` (apply `other` first).
    ///
    /// No per-product renormalization: determinants multiply, so unit
    /// determinants drift only by rounding (≈ 1e−16 per product), far inside
    /// [`DET_TOL`] for any enumerable word.
    pub fn compose(&self, other: &Mobius) -> Mobius {
        Mobius {
            a: self.a * other.a + self.b * other.c,
            b: self.a * other.b + self.b * other.d,
            c: self.c * other.a + self.d * other.c,
            d: self.c * other.b + self.d * other.d,
        }
    }

    /// Integer power by repeated squaring (negative exponents via the
    /// inverse). Exact for affine translations with exact entries.
    pub fn pow(&self, k: i64) -> Mobius {
        if k == 0 {
            return Mobius::identity();
        }
        let mut base = if k < 0 { self.inverse() } else { *self };
        let mut e = k.unsigned_abs();
        let mut acc = Mobius::identity();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.compose(&base);
            }
            base = base.compose(&base);
            e >>= 1;
        }
        acc
    }

    /// Equality in PSL(2, ·): entrywise within `tol`, up to a global sign.
    pub fn approx_eq(&self, other: &Mobius, tol: f64) -> bool {
        let diff = |s: &Mobius, sign: f64| {
            (s.a - other.a * sign).norm()
                + (s.b - other.b * sign).norm()
                + (s.c - other.c * sign).norm()
                + (s.d - other.d * sign).norm()
        };
        diff(self, 1.0) <= tol || diff(self, -1.0) <= tol
    }

    /// Applies the map to a point of H2 or H3.
    ///
    /// H2 is the fractional-linear action. H3 uses the Poincaré extension:
    /// writing the point as a quaternion `z + t·j`, the image has
    ///
    /// ```text
    /// z' = ((a z + b) · conj(c z + d) + a · conj(c) · t²) / D,
    /// t' = t / D,          D = |c z + d|² + |c|² t².
    /// ```
    ///
    /// In both models the height is computed by its own non-cancelling
    /// formula (`Im z · det / |cz+d|²`, resp. `t / D`) rather than read off
    /// a complex division: orbit points approach the boundary exponentially
    /// fast in word length, and the naive route loses the entire height to
    /// cancellation once it drops below the rounding noise of the horizontal
    /// coordinate.
    ///
    /// # Errors
    ///
    /// [`Error::HeightUnderflow`] when the image height drops below 1e−300
    /// (word far beyond any sane length cap); [`Error::ModelMismatch`] never
    /// occurs here — both models are supported — but H2 points are only
    /// meaningful under real-entried maps, which is enforced at group
    /// validation, not per application.
    pub fn apply(&self, p: &HPoint) -> Result<HPoint> {
        match *p {
            HPoint::H2 { z } => {
                let den = self.c * z + self.d;
                let den2 = den.norm_sqr();
                let re = ((self.a * z + self.b) * den.conj()).re / den2;
                // Invariance identity Im(gz) = Im(z)·det/|cz+d|² with det = 1
                // by construction. The determinant must NOT be re-evaluated
                // here: on a long product with entries of size E, ad − bc
                // carries absolute rounding noise ~E²·ε, which drowns the
                // true value 1 long before any height is in danger.
                let im = z.im / den2;
                if !(im > MIN_HEIGHT) {
                    return Err(Error::HeightUnderflow { word_length: None });
                }
                Ok(HPoint::H2 { z: Complex64::new(re, im) })
            }
            HPoint::H3 { z, t } => {
                let cz_d = self.c * z + self.d;
                let az_b = self.a * z + self.b;
                let dnm = cz_d.norm_sqr() + self.c.norm_sqr() * t * t;
                let zp = (az_b * cz_d.conj() + self.a * self.c.conj() * (t * t)) / dnm;
                let tp = t / dnm;
                if !(tp > MIN_HEIGHT) {
                    return Err(Error::HeightUnderflow { word_length: None });
                }
                Ok(HPoint::H3 { z: zp, t: tp })
            }
        }
    }

    /// Trace classification.
    ///
    /// With `τ = tr²` (sign-invariant): identity when off-diagonal entries
    /// vanish and `a ≈ d`; parabolic when `τ ≈ 4` (equivalently |tr| within
    /// [`TRACE_TOL`] of 2); elliptic when `τ` is real in `[0, 4)`; loxodromic
    /// otherwise. For real matrices this reduces to the familiar |tr| rule.
    pub fn classify(&self) -> IsometryClass {
        let off = self.b.norm() + self.c.norm();
        if off <= TRACE_TOL && (self.a - self.d).norm() <= TRACE_TOL {
            return IsometryClass::Identity;
        }
        let tau = self.trace() * self.trace();
        // |tr| = 2 + ε  ⇒  |tr² − 4| ≈ 4ε.
        if (tau - Complex64::new(4.0, 0.0)).norm() <= 4.0 * TRACE_TOL {
            return IsometryClass::Parabolic;
        }
        if tau.im.abs() <= TRACE_TOL && tau.re >= 0.0 && tau.re < 4.0 {
            return IsometryClass::Elliptic;
        }
        IsometryClass::Loxodromic
    }

    /// Largest entry magnitude; used by configuration validation to bound
    /// growth of matrix products.
    pub fn max_abs_entry(&self) -> f64 {
        self.a.norm().max(self.b.norm()).max(self.c.norm()).max(self.d.norm())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_fixes_base() {
        let p = HPoint::base(Model::H2);
        let q = Mobius::identity().apply(&p).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn translation_moves_i() {
        let m = Mobius::from_real(1.0, 1.0, 0.0, 1.0).unwrap();
        let p = m.apply(&HPoint::base(Model::H2)).unwrap();
        let HPoint::H2 { z } = p else { panic!("model changed") };
        assert!((z - c(1.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn inversion_halves_2i() {
        let m = Mobius::from_real(0.0, -1.0, 1.0, 0.0).unwrap();
        let p = m.apply(&HPoint::h2(0.0, 2.0).unwrap()).unwrap();
        let HPoint::H2 { z } = p else { panic!("model changed") };
        assert!((z - c(0.0, 0.5)).norm() < 1e-15);
    }

    #[test]
    fn h3_translation_and_inversion() {
        let m = Mobius::translation(c(1.0, 0.0));
        let p = m.apply(&HPoint::base(Model::H3)).unwrap();
        let HPoint::H3 { z, t } = p else { panic!("model changed") };
        assert!((z - c(1.0, 0.0)).norm() < 1e-15 && (t - 1.0).abs() < 1e-15);

        // z ↦ −1/z extends to (0,0,2) ↦ (0,0,1/2).
        let inv = Mobius::from_real(0.0, -1.0, 1.0, 0.0).unwrap();
        let q = inv.apply(&HPoint::h3(0.0, 0.0, 2.0).unwrap()).unwrap();
        let HPoint::H3 { z, t } = q else { panic!("model changed") };
        assert!(z.norm() < 1e-15 && (t - 0.5).abs() < 1e-15);
    }

    #[test]
    fn distance_examples() {
        let i = HPoint::base(Model::H2);
        assert_eq!(distance(&i, &i).unwrap(), 0.0);
        let two_i = HPoint::h2(0.0, 2.0).unwrap();
        assert!((distance(&i, &two_i).unwrap() - std::f64::consts::LN_2).abs() < 1e-15);
        // d(i, 1+i) = arccosh(3/2); the independent quadrature oracle lives in
        // the integration tests.
        let one_i = HPoint::h2(1.0, 1.0).unwrap();
        assert!((distance(&i, &one_i).unwrap() - 1.5f64.acosh()).abs() < 1e-15);
    }

    #[test]
    fn distance_rejects_model_mix() {
        let p = HPoint::base(Model::H2);
        let q = HPoint::base(Model::H3);
        assert!(matches!(distance(&p, &q), Err(Error::ModelMismatch)));
    }

    #[test]
    fn compose_translations_add() {
        let m = Mobius::from_real(1.0, 1.0, 0.0, 1.0).unwrap();
        let mm = m.compose(&m);
        assert!(mm.approx_eq(&Mobius::from_real(1.0, 2.0, 0.0, 1.0).unwrap(), 1e-15));
        assert!(m.compose(&m.inverse()).approx_eq(&Mobius::identity(), 1e-15));
        assert!(Mobius::identity().compose(&m).approx_eq(&m, 0.0));
    }

    #[test]
    fn pow_matches_repeated_compose() {
        let m = Mobius::from_real(1.0, 0.0, 2.0, 1.0).unwrap();
        let mut acc = Mobius::identity();
        for _ in 0..7 {
            acc = acc.compose(&m);
        }
        assert!(m.pow(7).approx_eq(&acc, 1e-12));
        assert!(m.pow(-3).approx_eq(&m.inverse().pow(3), 1e-12));
        assert!(m.pow(0).approx_eq(&Mobius::identity(), 0.0));
    }

    #[test]
    fn classification() {
        let para = Mobius::from_real(1.0, 1.0, 0.0, 1.0).unwrap();
        assert_eq!(para.classify(), IsometryClass::Parabolic);
        let loxo = Mobius::from_real(2.0, 0.0, 0.0, 0.5).unwrap();
        assert_eq!(loxo.classify(), IsometryClass::Loxodromic);
        assert_eq!(Mobius::identity().classify(), IsometryClass::Identity);
        let ell = Mobius::from_real(0.0, -1.0, 1.0, 0.0).unwrap();
        assert_eq!(ell.classify(), IsometryClass::Elliptic);
        // Parabolic with complex translation (H3 cusp generator).
        let para3 = Mobius::translation(c(0.0, 4.0));
        assert_eq!(para3.classify(), IsometryClass::Parabolic);
        // −identity is the identity in PSL terms.
        let neg = Mobius::from_real(-1.0, 0.0, 0.0, -1.0).unwrap();
        assert_eq!(neg.classify(), IsometryClass::Identity);
    }

    #[test]
    fn singular_matrix_rejected() {
        assert!(matches!(
            Mobius::from_real(1.0, 2.0, 2.0, 4.0),
            Err(Error::SingularMatrix { .. })
        ));
    }

    #[test]
    fn normalization_fixes_determinant() {
        let m = Mobius::from_real(3.0, 1.0, 1.0, 1.0).unwrap(); // det 2 before rescale
        assert!((m.det() - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn height_underflow_reported() {
        // Huge parabolic power pushes the image of i toward the boundary, but
        // only polynomially — build a loxodromic power instead.
        let m = Mobius::from_real(1e200, 0.0, 0.0, 1e-200).unwrap();
        let r = m.inverse().apply(&HPoint::base(Model::H2));
        assert!(matches!(r, Err(Error::HeightUnderflow { .. })));
    }
}
