//! Numerical laboratory for magnetic zero modes on the hyperbolic plane.
//!
//! Geometry lives on the Poincaré disc with area element `dσ = dx dy / λ²`,
//! `λ = (1 − |z|²)/2`. The crate is `no_std` with `alloc`.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod automorphic;
pub mod error;
pub mod fuchsian;
pub mod hyperbolic;
pub mod magnetics;
pub mod quadrature;
pub mod zeromodes;

pub use error::Error;
pub use hyperbolic::{DiscPoint, GeodesicPolar, MoebiusTransform};
