//! Poincaré disc geometry.
//!
//! The Lobachevsky plane is modelled as the open unit disc with metric
//! `ds² = dz dz̄ / λ²`, `λ = (1 − |z|²)/2`. Motions are elements of SU(1,1)
//! acting by `z ↦ (az + b)/(b̄z + ā)`.

use core::f64::consts::{PI, TAU};
use core::fmt;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::GeometryError;

/// Probe points used to compare Möbius transforms by their action.
pub const PROBE_POINTS: [Complex64; 3] = [
    Complex64::new(0.0, 0.0),
    Complex64::new(0.5, 0.0),
    Complex64::new(0.0, 0.3),
];

/// A point of the open unit disc.
#[derive(Clone, Copy, PartialEq, Default)]
pub struct DiscPoint {
    re: f64,
    im: f64,
}

impl DiscPoint {
    pub const ORIGIN: DiscPoint = DiscPoint { re: 0.0, im: 0.0 };

    pub fn new(re: f64, im: f64) -> Result<Self, GeometryError> {
        if !re.is_finite() || !im.is_finite() {
            return Err(GeometryError::NotFinite);
        }
        let r2 = re * re + im * im;
        if r2 >= 1.0 {
            return Err(GeometryError::OutsideDisc { modulus: r2.sqrt() });
        }
        Ok(Self { re, im })
    }

    pub fn from_complex(z: Complex64) -> Result<Self, GeometryError> {
        Self::new(z.re, z.im)
    }

    pub fn from_polar_euclidean(r: f64, phi: f64) -> Result<Self, GeometryError> {
        Self::new(r * phi.cos(), r * phi.sin())
    }

    /// Maps a complex number that is mathematically inside the disc but may
    /// have been rounded onto or past the unit circle.
    pub(crate) fn from_complex_clamped(z: Complex64) -> Self {
        let r2 = z.norm_sqr();
        if r2 < 1.0 {
            Self { re: z.re, im: z.im }
        } else {
            let s = (1.0 - f64::EPSILON) / r2.sqrt();
            Self {
                re: z.re * s,
                im: z.im * s,
            }
        }
    }

    pub fn re(self) -> f64 {
        self.re
    }

    pub fn im(self) -> f64 {
        self.im
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    pub fn norm_sqr(self) -> f64 {
        self.re * self.re + self.im * self.im
    }

    pub fn abs(self) -> f64 {
        self.re.hypot(self.im)
    }

    pub fn conj(self) -> Self {
        Self {
            re: self.re,
            im: -self.im,
        }
    }
}

impl fmt::Debug for DiscPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DiscPoint({} {:+}i)", self.re, self.im)
    }
}

/// Conformal factor `λ(z) = (1 − |z|²)/2`.
pub fn conformal_factor(z: DiscPoint) -> f64 {
    0.5 * (1.0 - z.norm_sqr())
}

/// Density of the area form `dσ = dx dy / λ²` with respect to `dx dy`.
pub fn area_density(z: DiscPoint) -> f64 {
    let lambda = conformal_factor(z);
    1.0 / (lambda * lambda)
}

/// An element of SU(1,1), `z ↦ (az + b)/(b̄z + ā)` with `|a|² − |b|² = 1`.
///
/// `A` and `−A` act identically; equality is therefore tested by action
/// (see [`MoebiusTransform::action_distance`]), never by entries.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MoebiusTransform {
    a: Complex64,
    b: Complex64,
}

impl MoebiusTransform {
    pub const IDENTITY: MoebiusTransform = MoebiusTransform {
        a: Complex64::new(1.0, 0.0),
        b: Complex64::new(0.0, 0.0),
    };

    /// Builds a transform from any pair with `|a|² > |b|²`, rescaling it onto
    /// the determinant-one sheet.
    pub fn new(a: Complex64, b: Complex64) -> Result<Self, GeometryError> {
        let det = a.norm_sqr() - b.norm_sqr();
        if !(det.is_finite() && det > 0.0) {
            return Err(GeometryError::NotInSu11 { determinant: det });
        }
        let s = det.sqrt().recip();
        Ok(Self { a: a * s, b: b * s })
    }

    /// Rotation about the origin by `angle`.
    pub fn rotation(angle: f64) -> Self {
        let half = 0.5 * angle;
        Self {
            a: Complex64::new(half.cos(), half.sin()),
            b: Complex64::new(0.0, 0.0),
        }
    }

    /// Hyperbolic translation along the real axis moving `0` to
    /// `tanh(distance/2)`.
    pub fn translation(distance: f64) -> Self {
        let half = 0.5 * distance;
        Self {
            a: Complex64::new(half.cosh(), 0.0),
            b: Complex64::new(half.sinh(), 0.0),
        }
    }

    /// The transform `ζ ↦ (ζ + p)/(1 + p̄ζ)` taking `0` to `p`.
    pub fn recentering(p: DiscPoint) -> Self {
        let s = (1.0 - p.norm_sqr()).sqrt().recip();
        Self {
            a: Complex64::new(s, 0.0),
            b: p.to_complex() * s,
        }
    }

    pub fn a(&self) -> Complex64 {
        self.a
    }

    pub fn b(&self) -> Complex64 {
        self.b
    }

    /// `|a|² − |b|²`; equals one up to rounding.
    pub fn determinant(&self) -> f64 {
        self.a.norm_sqr() - self.b.norm_sqr()
    }

    /// Trace of the matrix form, `a + ā`.
    pub fn trace(&self) -> f64 {
        2.0 * self.a.re
    }

    pub fn is_hyperbolic(&self) -> bool {
        self.trace().abs() > 2.0
    }

    pub fn apply(&self, z: DiscPoint) -> DiscPoint {
        DiscPoint::from_complex_clamped(self.apply_complex(z.to_complex()))
    }

    pub fn apply_complex(&self, z: Complex64) -> Complex64 {
        (self.a * z + self.b) / (self.b.conj() * z + self.a.conj())
    }

    /// Image of the origin, `b/ā`.
    pub fn image_of_origin(&self) -> Complex64 {
        self.b / self.a.conj()
    }

    /// `1 − |A(0)|² = 1/|a|²`, exact in terms of the entries.
    pub fn origin_image_defect(&self) -> f64 {
        self.a.norm_sqr().recip()
    }

    /// `A′(z) = 1/(b̄z + ā)²`.
    pub fn derivative(&self, z: DiscPoint) -> Complex64 {
        self.derivative_complex(z.to_complex())
    }

    pub fn derivative_complex(&self, z: Complex64) -> Complex64 {
        let c = self.b.conj() * z + self.a.conj();
        (c * c).inv()
    }

    /// `self ∘ other`, renormalised onto `|a|² − |b|² = 1`.
    pub fn compose(&self, other: &Self) -> Self {
        let a = self.a * other.a + self.b * other.b.conj();
        let b = self.a * other.b + self.b * other.a.conj();
        let det = a.norm_sqr() - b.norm_sqr();
        let s = det.sqrt().recip();
        Self { a: a * s, b: b * s }
    }

    pub fn inverse(&self) -> Self {
        Self {
            a: self.a.conj(),
            b: -self.b,
        }
    }

    /// `c ∘ self ∘ c⁻¹`.
    pub fn conjugate_by(&self, c: &Self) -> Self {
        c.compose(self).compose(&c.inverse())
    }

    /// Largest hyperbolic distance between the images of the probe points.
    pub fn action_distance(&self, other: &Self) -> f64 {
        PROBE_POINTS
            .iter()
            .map(|&p| geodesic_distance_complex(self.apply_complex(p), other.apply_complex(p)))
            .fold(0.0, f64::max)
    }

    /// Largest Euclidean displacement of the probe points.
    pub fn euclidean_action_distance(&self, other: &Self) -> f64 {
        PROBE_POINTS
            .iter()
            .map(|&p| (self.apply_complex(p) - other.apply_complex(p)).norm())
            .fold(0.0, f64::max)
    }
}

/// Hyperbolic distance `2 artanh |z − w| / |1 − z̄w|`.
pub fn geodesic_distance(z: DiscPoint, w: DiscPoint) -> f64 {
    geodesic_distance_complex(z.to_complex(), w.to_complex())
}

pub(crate) fn geodesic_distance_complex(z: Complex64, w: Complex64) -> f64 {
    let num = (z - w).norm();
    if num == 0.0 {
        return 0.0;
    }
    let den = (Complex64::new(1.0, 0.0) - z.conj() * w).norm();
    2.0 * (num / den).min(1.0).atanh()
}

/// Geodesic polar coordinates about the origin.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeodesicPolar {
    pub rho: f64,
    pub theta: f64,
}

impl GeodesicPolar {
    pub fn new(rho: f64, theta: f64) -> Result<Self, GeometryError> {
        if !(rho.is_finite() && rho >= 0.0 && theta.is_finite()) {
            return Err(GeometryError::InvalidPolar { rho, theta });
        }
        Ok(Self {
            rho,
            theta: wrap_angle(theta),
        })
    }
}

/// Reduces an angle into `[0, 2π)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let t = theta - TAU * (theta / TAU).floor();
    if t >= TAU {
        0.0
    } else {
        t
    }
}

/// `r = tanh(ρ/2)`, `φ = θ`; the angle at the origin is defined as 0.
pub fn to_polar(z: DiscPoint) -> GeodesicPolar {
    let r = z.abs();
    if r == 0.0 {
        return GeodesicPolar {
            rho: 0.0,
            theta: 0.0,
        };
    }
    let mut theta = z.im.atan2(z.re);
    if theta < 0.0 {
        theta += TAU;
    }
    if theta >= TAU {
        theta = 0.0;
    }
    GeodesicPolar {
        rho: 2.0 * r.atanh(),
        theta,
    }
}

pub fn from_polar(p: GeodesicPolar) -> DiscPoint {
    let r = (0.5 * p.rho).tanh();
    DiscPoint::from_complex_clamped(Complex64::from_polar(r, p.theta))
}

/// `h(ρ, θ) = cosh(ρ/2)^{-4} = (1 − |z|²)²`.
pub fn metric_h(p: GeodesicPolar) -> f64 {
    (0.5 * p.rho).cosh().powi(-4)
}

/// Euclidean radius of the geodesic circle of radius `rho` about the origin.
pub fn euclidean_radius(rho: f64) -> f64 {
    (0.5 * rho).tanh()
}

/// Geodesic radius of the Euclidean circle `|z| = r`.
pub fn geodesic_radius(r: f64) -> f64 {
    2.0 * r.atanh()
}

/// Hyperbolic area of the geodesic disc of radius `rho`: `4π sinh²(ρ/2)`.
pub fn disc_area(rho: f64) -> f64 {
    let s = (0.5 * rho).sinh();
    4.0 * PI * s * s
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pt(re: f64, im: f64) -> DiscPoint {
        DiscPoint::new(re, im).unwrap()
    }

    fn arb_point() -> impl Strategy<Value = DiscPoint> {
        (0.0..0.95f64, 0.0..TAU).prop_map(|(r, t)| pt(r * t.cos(), r * t.sin()))
    }

    fn arb_moebius() -> impl Strategy<Value = MoebiusTransform> {
        (arb_point(), 0.0..TAU).prop_map(|(p, t)| {
            MoebiusTransform::recentering(p).compose(&MoebiusTransform::rotation(t))
        })
    }

    #[test]
    fn conformal_factor_values() {
        assert_eq!(conformal_factor(DiscPoint::ORIGIN), 0.5);
        assert!((conformal_factor(pt(0.6, 0.0)) - 0.32).abs() < 1e-15);
        let mut last = f64::INFINITY;
        for i in 0..100 {
            let l = conformal_factor(pt(0.0, i as f64 / 100.0));
            assert!(l < last && l > 0.0);
            last = l;
        }
    }

    #[test]
    fn rejects_points_outside() {
        assert!(DiscPoint::new(1.0, 0.0).is_err());
        assert!(DiscPoint::new(0.8, 0.7).is_err());
        assert!(DiscPoint::new(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn translation_moves_origin() {
        for t in [0.1, 1.0, 3.0] {
            let z = MoebiusTransform::translation(t).apply(DiscPoint::ORIGIN);
            assert!((z.re() - (0.5 * t).tanh()).abs() < 1e-15);
            assert_eq!(z.im(), 0.0);
        }
        let z = pt(0.3, -0.2);
        assert_eq!(MoebiusTransform::IDENTITY.apply(z), z);
    }

    #[test]
    fn identity_derivative_is_one() {
        let d = MoebiusTransform::IDENTITY.derivative(pt(0.4, 0.1));
        assert_eq!(d, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn non_su11_pairs_rejected() {
        assert!(MoebiusTransform::new(Complex64::new(0.5, 0.0), Complex64::new(1.0, 0.0)).is_err());
        let m = MoebiusTransform::new(Complex64::new(2.0, 1.0), Complex64::new(0.5, 0.0)).unwrap();
        assert!((m.determinant() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn distance_examples() {
        assert_eq!(geodesic_distance(DiscPoint::ORIGIN, DiscPoint::ORIGIN), 0.0);
        let z = pt(1.0f64.tanh(), 0.0);
        assert!((geodesic_distance(DiscPoint::ORIGIN, z) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn polar_examples() {
        let p = to_polar(DiscPoint::ORIGIN);
        assert_eq!((p.rho, p.theta), (0.0, 0.0));
        let p = to_polar(pt(0.0, 1.0f64.tanh()));
        assert!((p.rho - 2.0).abs() < 1e-12);
        assert!((p.theta - PI / 2.0).abs() < 1e-15);
        assert_eq!(metric_h(GeodesicPolar::new(0.0, 0.0).unwrap()), 1.0);
        assert!(GeodesicPolar::new(-1.0, 0.0).is_err());
    }

    #[test]
    fn metric_h_decreasing() {
        let mut last = 2.0;
        for i in 0..200 {
            let h = metric_h(GeodesicPolar::new(i as f64 * 0.05, 1.0).unwrap());
            assert!(h < last);
            last = h;
        }
    }

    proptest! {
        #[test]
        fn disc_is_preserved(m in arb_moebius(), z in arb_point()) {
            prop_assert!(m.apply(z).norm_sqr() < 1.0);
        }

        #[test]
        fn composition_acts_pointwise(a in arb_moebius(), b in arb_moebius(), z in arb_point()) {
            let lhs = a.compose(&b).apply_complex(z.to_complex());
            let rhs = a.apply_complex(b.apply_complex(z.to_complex()));
            prop_assert!((lhs - rhs).norm() <= 1e-12);
            prop_assert!((a.compose(&b).determinant() - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn inverse_acts_as_identity(a in arb_moebius(), b in arb_moebius()) {
            prop_assert!(a.compose(&a.inverse()).euclidean_action_distance(&MoebiusTransform::IDENTITY) <= 1e-12);
            let lhs = a.compose(&b).inverse();
            let rhs = b.inverse().compose(&a.inverse());
            prop_assert!(lhs.euclidean_action_distance(&rhs) <= 1e-12);
            prop_assert!(a.compose(&MoebiusTransform::IDENTITY).euclidean_action_distance(&a) <= 1e-15);
        }

        #[test]
        fn chain_rule(a in arb_moebius(), b in arb_moebius(), z in arb_point()) {
            let lhs = a.compose(&b).derivative(z);
            let rhs = a.derivative(b.apply(z)) * b.derivative(z);
            prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + rhs.norm()));
        }

        #[test]
        fn lambda_automorphy(a in arb_moebius(), z in arb_point()) {
            let lhs = conformal_factor(a.apply(z));
            let rhs = a.derivative(z).norm() * conformal_factor(z);
            prop_assert!((lhs - rhs).abs() <= 1e-12);
        }

        #[test]
        fn distance_is_invariant(a in arb_moebius(), z in arb_point(), w in arb_point()) {
            let d0 = geodesic_distance(z, w);
            prop_assert!((geodesic_distance(a.apply(z), a.apply(w)) - d0).abs() <= 1e-10);
            prop_assert!((geodesic_distance(w, z) - d0).abs() <= 1e-12);
        }

        #[test]
        fn polar_round_trip(z in arb_point()) {
            let back = from_polar(to_polar(z));
            prop_assert!((back.to_complex() - z.to_complex()).norm() <= 1e-12);
            let h = metric_h(to_polar(z));
            prop_assert!((h - (1.0 - z.norm_sqr()).powi(2)).abs() <= 1e-12);
        }
    }
}
