//! Magnetic configurations on the disc and their scalar potentials.
//!
//! Every configuration carries a real potential `φ` with `Δφ = B λ^{−2}`
//! (Euclidean Laplacian), so that zero modes take the form `e^{∓φ} f`.
//! Fluxes are measured in quanta, `Φ = (1/2π) ∫ B dσ`.

use alloc::sync::Arc;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::automorphic::AutomorphicForm;
use crate::error::FieldError;
use crate::hyperbolic::DiscPoint;

/// Solenoids closer than this count as coincident.
pub const SINGULAR_RADIUS: f64 = 1e-12;
/// Largest finite-difference step accepted by [`FieldConfig::poisson_residual`].
pub const MAX_STENCIL_STEP: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Solenoid {
    pub position: DiscPoint,
    /// Flux in quanta, reduced into `(0, 1)`.
    pub flux: f64,
}

#[derive(Clone, Debug)]
pub enum FieldConfig {
    FiniteSolenoids(Vec<Solenoid>),
    Uniform {
        strength: f64,
    },
    /// Field `λ² B̃` inside `|z| ≤ r₀`, zero outside.
    RadialCompact {
        strength: f64,
        radius: f64,
    },
    /// Solenoids of flux `θ` at the zeros of an automorphic form.
    AutomorphicLattice {
        form: Arc<AutomorphicForm>,
        theta: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Flux {
    Finite(f64),
    Infinite,
}

/// Reduces a flux into `[0, 1)` by removing its integer part.
pub fn reduce_flux(theta: f64) -> f64 {
    theta - theta.floor()
}

impl FieldConfig {
    /// Solenoids with fluxes reduced into `(0, 1)`. Integer fluxes are gauge
    /// trivial and rejected, as are repeated positions.
    pub fn finite(solenoids: &[(DiscPoint, f64)]) -> Result<Self, FieldError> {
        let mut out: Vec<Solenoid> = Vec::with_capacity(solenoids.len());
        for &(position, theta) in solenoids {
            if !theta.is_finite() {
                return Err(FieldError::InvalidParameter("flux must be finite"));
            }
            let flux = reduce_flux(theta);
            if flux == 0.0 {
                return Err(FieldError::InvalidParameter("flux must not be an integer"));
            }
            if out.iter().any(|s| {
                (s.position.to_complex() - position.to_complex()).norm() < SINGULAR_RADIUS
            }) {
                return Err(FieldError::InvalidParameter("solenoid positions must be distinct"));
            }
            out.push(Solenoid { position, flux });
        }
        Ok(FieldConfig::FiniteSolenoids(out))
    }

    pub fn uniform(strength: f64) -> Result<Self, FieldError> {
        if !(strength > 0.0 && strength.is_finite()) {
            return Err(FieldError::InvalidParameter("field strength must be positive"));
        }
        Ok(FieldConfig::Uniform { strength })
    }

    pub fn radial_compact(strength: f64, radius: f64) -> Result<Self, FieldError> {
        if !(strength > 0.0 && strength.is_finite()) {
            return Err(FieldError::InvalidParameter("field strength must be positive"));
        }
        if !(radius > 0.0 && radius < 1.0) {
            return Err(FieldError::InvalidParameter("support radius must lie in (0, 1)"));
        }
        Ok(FieldConfig::RadialCompact { strength, radius })
    }

    /// Radial field with total flux `flux` supported in `|z| ≤ radius`.
    pub fn radial_with_flux(flux: f64, radius: f64) -> Result<Self, FieldError> {
        Self::radial_compact(2.0 * flux / (radius * radius), radius)
    }

    pub fn lattice(form: Arc<AutomorphicForm>, theta: f64) -> Result<Self, FieldError> {
        if !theta.is_finite() {
            return Err(FieldError::InvalidParameter("flux must be finite"));
        }
        let theta = reduce_flux(theta);
        if theta == 0.0 {
            return Err(FieldError::InvalidParameter("flux must not be an integer"));
        }
        Ok(FieldConfig::AutomorphicLattice { form, theta })
    }

    /// Total flux in quanta.
    pub fn flux(&self) -> Flux {
        match self {
            FieldConfig::FiniteSolenoids(s) => Flux::Finite(s.iter().map(|s| s.flux).sum()),
            FieldConfig::RadialCompact { strength, radius } => {
                Flux::Finite(0.5 * strength * radius * radius)
            }
            FieldConfig::Uniform { .. } | FieldConfig::AutomorphicLattice { .. } => Flux::Infinite,
        }
    }

    /// Scalar potential `φ(z)`.
    pub fn potential(&self, z: DiscPoint) -> Result<f64, FieldError> {
        match self {
            FieldConfig::FiniteSolenoids(s) => {
                let zc = z.to_complex();
                let mut acc = 0.0;
                for sol in s {
                    let d = (zc - sol.position.to_complex()).norm();
                    if d == 0.0 {
                        return Err(FieldError::Singular);
                    }
                    acc += sol.flux * d.ln();
                }
                Ok(acc)
            }
            FieldConfig::Uniform { strength } => Ok(-strength * (-z.norm_sqr()).ln_1p()),
            FieldConfig::RadialCompact { strength, radius } => {
                let r = z.abs();
                Ok(if r <= *radius {
                    0.25 * strength * r * r
                } else {
                    0.25 * strength * radius * radius
                        + 0.5 * strength * radius * radius * (r / radius).ln()
                })
            }
            FieldConfig::AutomorphicLattice { form, theta } => {
                let w = form.evaluate(z).norm();
                if !(w > 0.0) {
                    return Err(FieldError::Singular);
                }
                Ok(theta * w.ln())
            }
        }
    }

    /// `∂φ/∂z` in closed form.
    pub fn potential_z_derivative(&self, z: DiscPoint) -> Result<Complex64, FieldError> {
        let zc = z.to_complex();
        match self {
            FieldConfig::FiniteSolenoids(s) => {
                let mut acc = Complex64::new(0.0, 0.0);
                for sol in s {
                    let d = zc - sol.position.to_complex();
                    if d.norm() < SINGULAR_RADIUS {
                        return Err(FieldError::Singular);
                    }
                    acc += sol.flux / (2.0 * d);
                }
                Ok(acc)
            }
            FieldConfig::Uniform { strength } => Ok(strength * zc.conj() / (1.0 - z.norm_sqr())),
            FieldConfig::RadialCompact { strength, radius } => {
                let r = z.abs();
                Ok(if r <= *radius {
                    0.25 * strength * zc.conj()
                } else {
                    0.25 * strength * radius * radius / zc
                })
            }
            FieldConfig::AutomorphicLattice { form, theta } => {
                let (w, dw) = form.evaluate_with_derivative(z);
                if !(w.norm() > 0.0) {
                    return Err(FieldError::Singular);
                }
                Ok(0.5 * theta * dw / w)
            }
        }
    }

    /// `(a_z, a_z̄) = (−i ∂_z φ, i ∂_z̄ φ)`.
    pub fn gauge_potential(&self, z: DiscPoint) -> Result<(Complex64, Complex64), FieldError> {
        let d = self.potential_z_derivative(z)?;
        let i = Complex64::i();
        Ok((-i * d, i * d.conj()))
    }

    /// Gauge potential from central differences of `φ` with step `h`.
    pub fn gauge_potential_numeric(
        &self,
        z: DiscPoint,
        h: f64,
    ) -> Result<(Complex64, Complex64), FieldError> {
        let at = |dx: f64, dy: f64| {
            DiscPoint::new(z.re() + dx, z.im() + dy)
                .map_err(|_| FieldError::Domain("stencil leaves the disc"))
                .and_then(|p| self.potential(p))
        };
        let px = (at(h, 0.0)? - at(-h, 0.0)?) / (2.0 * h);
        let py = (at(0.0, h)? - at(0.0, -h)?) / (2.0 * h);
        let d = Complex64::new(0.5 * px, -0.5 * py);
        let i = Complex64::i();
        Ok((-i * d, i * d.conj()))
    }

    /// `B λ^{−2}` at a regular point (zero away from solenoids).
    pub fn source_density(&self, z: DiscPoint) -> f64 {
        match self {
            FieldConfig::Uniform { strength } => {
                let l = 0.5 * (1.0 - z.norm_sqr());
                strength / (l * l)
            }
            FieldConfig::RadialCompact { strength, radius } => {
                if z.abs() <= *radius {
                    *strength
                } else {
                    0.0
                }
            }
            FieldConfig::FiniteSolenoids(_) | FieldConfig::AutomorphicLattice { .. } => 0.0,
        }
    }

    /// Distance from `z` to the singular set, or an estimate of it.
    fn singular_distance(&self, z: DiscPoint) -> f64 {
        match self {
            FieldConfig::FiniteSolenoids(s) => s
                .iter()
                .map(|sol| (z.to_complex() - sol.position.to_complex()).norm())
                .fold(f64::INFINITY, f64::min),
            FieldConfig::RadialCompact { radius, .. } => (z.abs() - radius).abs(),
            FieldConfig::Uniform { .. } => f64::INFINITY,
            FieldConfig::AutomorphicLattice { form, .. } => {
                // Newton step length, which is the distance to a nearby simple zero.
                let (w, dw) = form.evaluate_with_derivative(z);
                if dw.norm() == 0.0 {
                    f64::INFINITY
                } else {
                    (w / dw).norm()
                }
            }
        }
    }

    /// `|Δ_h φ(z) − B λ^{−2}|` with the 5-point Laplacian of step `h`.
    ///
    /// Points within `10h` of a solenoid, a form zero, or the support circle
    /// of a radial field are rejected.
    pub fn poisson_residual(&self, z: DiscPoint, h: f64) -> Result<f64, FieldError> {
        if !(h > 0.0 && h <= MAX_STENCIL_STEP) {
            return Err(FieldError::InvalidParameter("stencil step must lie in (0, 1e-3]"));
        }
        if self.singular_distance(z) <= 10.0 * h {
            return Err(FieldError::Singular);
        }
        let at = |dx: f64, dy: f64| {
            DiscPoint::new(z.re() + dx, z.im() + dy)
                .map_err(|_| FieldError::Domain("stencil leaves the disc"))
                .and_then(|p| self.potential(p))
        };
        let lap = (at(h, 0.0)? + at(-h, 0.0)? + at(0.0, h)? + at(0.0, -h)? - 4.0 * at(0.0, 0.0)?)
            / (h * h);
        Ok((lap - self.source_density(z)).abs())
    }
}

/// Euclidean zero-mode count `⟨Φ⟩`: `[Φ]` off the integers, `Φ − 1` at
/// positive integers, 0 at 0.
pub fn euclidean_ac_count(flux: f64) -> Result<u64, FieldError> {
    if !(flux >= 0.0) || !flux.is_finite() {
        return Err(FieldError::Domain("flux must be finite and nonnegative"));
    }
    let floor = flux.floor();
    Ok(if flux == 0.0 {
        0
    } else if flux == floor {
        floor as u64 - 1
    } else {
        floor as u64
    })
}
