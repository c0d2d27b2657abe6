use alloc::vec::Vec;
use core::fmt;

#[derive(Clone, Debug, PartialEq)]
pub enum GeometryError {
    NotFinite,
    OutsideDisc { modulus: f64 },
    NotInSu11 { determinant: f64 },
    InvalidPolar { rho: f64, theta: f64 },
}

impl fmt::Display for GeometryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NotFinite => write!(f, "coordinates are not finite"),
            Self::OutsideDisc { modulus } => {
                write!(f, "point with modulus {modulus} is not inside the unit disc")
            }
            Self::NotInSu11 { determinant } => {
                write!(f, "|a|^2 - |b|^2 = {determinant} is not positive")
            }
            Self::InvalidPolar { rho, theta } => {
                write!(f, "invalid geodesic polar coordinates ({rho}, {theta})")
            }
        }
    }
}

impl core::error::Error for GeometryError {}

#[derive(Clone, Debug, PartialEq)]
pub enum QuadratureError {
    /// A singular point was declared with an exponent outside `[0, 2)`.
    InvalidSingularity { exponent: f64 },
    InvalidRegion(&'static str),
    InvalidTolerance { rel_tol: f64 },
    /// The subdivision budget ran out. `partials` is the sequence of running
    /// estimates, usable for growth-profile fits.
    NonConvergent {
        estimate: f64,
        error: f64,
        partials: Vec<f64>,
    },
    NonFinite { value: f64 },
}

impl fmt::Display for QuadratureError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::InvalidSingularity { exponent } => {
                write!(f, "singularity exponent {exponent} is not in [0, 2)")
            }
            Self::InvalidRegion(why) => write!(f, "invalid integration region: {why}"),
            Self::InvalidTolerance { rel_tol } => write!(f, "invalid tolerance {rel_tol}"),
            Self::NonConvergent {
                estimate, error, ..
            } => write!(
                f,
                "quadrature did not converge (estimate {estimate}, error {error})"
            ),
            Self::NonFinite { value } => write!(f, "integrand produced {value}"),
        }
    }
}

impl core::error::Error for QuadratureError {}

#[derive(Clone, Debug, PartialEq)]
pub enum GroupError {
    Unsupported { genus: u32 },
    Domain(&'static str),
    BudgetExceeded { count: usize, cap: usize },
    NotEnumerated { requested: u32, available: u32 },
}

impl fmt::Display for GroupError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Unsupported { genus } => write!(f, "genus {genus} is not supported"),
            Self::Domain(why) => write!(f, "domain error: {why}"),
            Self::BudgetExceeded { count, cap } => {
                write!(f, "element budget exceeded: {count} > {cap}")
            }
            Self::NotEnumerated {
                requested,
                available,
            } => write!(
                f,
                "word length {requested} requested but the ball is enumerated to {available}"
            ),
        }
    }
}

impl core::error::Error for GroupError {}

#[derive(Clone, Debug, PartialEq)]
pub enum FieldError {
    InvalidParameter(&'static str),
    /// Evaluation at (or too close to) a flux point or zero of the form.
    Singular,
    Domain(&'static str),
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::InvalidParameter(why) => write!(f, "invalid field parameter: {why}"),
            Self::Singular => write!(f, "point lies on the singular set"),
            Self::Domain(why) => write!(f, "domain error: {why}"),
        }
    }
}

impl core::error::Error for FieldError {}

/// Crate-wide error.
#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    Geometry(GeometryError),
    Quadrature(QuadratureError),
    Group(GroupError),
    Field(FieldError),
    /// Neither the convergence nor the divergence criterion was met.
    Inconclusive(&'static str),
    Domain(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Geometry(e) => e.fmt(f),
            Self::Quadrature(e) => e.fmt(f),
            Self::Group(e) => e.fmt(f),
            Self::Field(e) => e.fmt(f),
            Self::Inconclusive(why) => write!(f, "inconclusive: {why}"),
            Self::Domain(why) => write!(f, "domain error: {why}"),
        }
    }
}

impl core::error::Error for Error {}

macro_rules! from_error {
    ($($variant:ident($ty:ty)),*) => {
        $(impl From<$ty> for Error {
            fn from(e: $ty) -> Self {
                Self::$variant(e)
            }
        })*
    };
}

from_error!(
    Geometry(GeometryError),
    Quadrature(QuadratureError),
    Group(GroupError),
    Field(FieldError)
);
