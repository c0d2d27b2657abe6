//! Truncated Poincaré series `W_L(z) = Σ_{|γ|≤L} γ′(z)^k (γz)^m`.
//!
//! For a co-compact group these are (numerically) automorphic forms of
//! weight `2k`: `W(γz) = γ′(z)^{−k} W(z)`. The truncation error at a fixed
//! point decays like the shell sums of `(1 − |γz|²)^k`.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, FieldError};
use crate::fuchsian::{FuchsianGroup, GroupElement};
use crate::hyperbolic::{geodesic_distance, DiscPoint, MoebiusTransform};

/// Largest seed power tried when smaller seeds give a vanishing series.
pub const MAX_SEED_POWER: u32 = 6;
/// `max |W_L|` on the probe grid below which a series counts as vanishing.
pub const NONTRIVIAL_THRESHOLD: f64 = 1e-6;
/// Refined zeros must satisfy `|W_L| ≤ ZERO_RESIDUAL · max |W_L|`.
pub const ZERO_RESIDUAL: f64 = 1e-8;
/// Zeros closer than this (geodesically, modulo the group) are merged.
pub const ZERO_MERGE_DISTANCE: f64 = 1e-3;
/// Seed centre used for lattice fields; its form has `2k(g − 1)` simple zeros
/// inside the octagon.
pub const LATTICE_SEED_CENTER: (f64, f64) = (0.2, 0.45);
/// Seed power used for lattice fields.
pub const LATTICE_SEED_POWER: u32 = 1;
/// Word-length truncation of the form defining a lattice field.
pub const LATTICE_FORM_TRUNCATION: u32 = 4;

#[derive(Clone, Debug)]
pub struct AutomorphicForm {
    group: Arc<FuchsianGroup>,
    k: u32,
    seed_power: u32,
    /// Seed `H(z) = C′(z)^k C(z)^m` with `C` the motion taking this point to 0.
    seed_center: DiscPoint,
    seed_map: MoebiusTransform,
    truncation: u32,
    len: usize,
}

/// A zero of `W_L` reduced into the Dirichlet domain about 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FormZero {
    pub point: DiscPoint,
    /// Winding number of `arg W_L` around the point.
    pub multiplicity: i32,
    /// `|W_L|` at the refined point.
    pub residual: f64,
}

impl AutomorphicForm {
    /// Builds `W_L` for seed `z^m`. If that series vanishes numerically on the
    /// probe grid the next seed powers up to [`MAX_SEED_POWER`] are tried.
    pub fn new(
        group: Arc<FuchsianGroup>,
        k: u32,
        seed_power: u32,
        truncation: u32,
    ) -> Result<Self, Error> {
        Self::with_seed_center(group, k, seed_power, truncation, DiscPoint::ORIGIN)
    }

    /// Like [`AutomorphicForm::new`] with the seed `z^m` taken in coordinates
    /// centred at `center`. Off-centre seeds break the rotation symmetry of
    /// the octagon group, whose centred forms have multiple zeros.
    pub fn with_seed_center(
        group: Arc<FuchsianGroup>,
        k: u32,
        seed_power: u32,
        truncation: u32,
        center: DiscPoint,
    ) -> Result<Self, Error> {
        if k < 2 {
            return Err(FieldError::InvalidParameter("weight index k must be at least 2").into());
        }
        if truncation < 2 {
            return Err(FieldError::InvalidParameter("truncation must be at least 2").into());
        }
        let len = group.ball(truncation)?.len();
        for m in seed_power..=MAX_SEED_POWER.max(seed_power) {
            let form = Self {
                group: group.clone(),
                k,
                seed_power: m,
                seed_center: center,
                seed_map: MoebiusTransform::recentering(center).inverse(),
                truncation,
                len,
            };
            if form.probe_maximum() > NONTRIVIAL_THRESHOLD {
                return Ok(form);
            }
        }
        Err(FieldError::Domain("every seed power gives a vanishing series").into())
    }

    /// The form used for lattice fields: seed `C(z)^m` with the default
    /// centre, power and truncation.
    pub fn for_lattice(group: Arc<FuchsianGroup>, k: u32) -> Result<Self, Error> {
        let (x, y) = LATTICE_SEED_CENTER;
        let center = DiscPoint::new(x, y).map_err(Error::from)?;
        Self::with_seed_center(group, k, LATTICE_SEED_POWER, LATTICE_FORM_TRUNCATION, center)
    }

    pub fn group(&self) -> &Arc<FuchsianGroup> {
        &self.group
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn seed_power(&self) -> u32 {
        self.seed_power
    }

    pub fn seed_center(&self) -> DiscPoint {
        self.seed_center
    }

    pub fn truncation(&self) -> u32 {
        self.truncation
    }

    /// Coefficients of `C∘γ` over the ball, in summation order.
    fn terms(&self) -> impl Iterator<Item = (Complex64, Complex64)> + '_ {
        let (ca, cb) = (self.seed_map.a(), self.seed_map.b());
        let plain = self.seed_center == DiscPoint::ORIGIN;
        self.group.elements()[..self.len].iter().map(move |e: &GroupElement| {
            let (a, b) = (e.transform.a(), e.transform.b());
            if plain {
                (a, b)
            } else {
                (ca * a + cb * b.conj(), ca * b + cb * a.conj())
            }
        })
    }

    /// Maximum of `|W_L|` over a polar probe grid of radius 0.8.
    pub fn probe_maximum(&self) -> f64 {
        let mut best: f64 = 0.0;
        for i in 1..=8 {
            for j in 0..16 {
                let z = Complex64::from_polar(0.1 * i as f64, TAU * (j as f64 + 0.37) / 16.0);
                best = best.max(self.evaluate_complex(z).norm());
            }
        }
        best
    }

    pub fn evaluate(&self, z: DiscPoint) -> Complex64 {
        self.evaluate_complex(z.to_complex())
    }

    fn evaluate_complex(&self, z: Complex64) -> Complex64 {
        let (k2, m) = (2 * self.k as i32, self.seed_power as i32);
        let mut acc = Complex64::new(0.0, 0.0);
        for (a, b) in self.terms() {
            let u = b.conj() * z + a.conj();
            let term = if m == 0 {
                u.powi(-k2)
            } else {
                u.powi(-k2 - m) * (a * z + b).powi(m)
            };
            acc += term;
        }
        acc
    }

    /// `W_L(z)` and `W_L′(z)`.
    pub fn evaluate_with_derivative(&self, z: DiscPoint) -> (Complex64, Complex64) {
        let z = z.to_complex();
        let (k2, m) = (2 * self.k as i32, self.seed_power as i32);
        let mut w = Complex64::new(0.0, 0.0);
        let mut dw = Complex64::new(0.0, 0.0);
        for (a, b) in self.terms() {
            let u = b.conj() * z + a.conj();
            let v = a * z + b;
            let base = u.powi(-k2 - m);
            let vm = if m == 0 { Complex64::new(1.0, 0.0) } else { v.powi(m) };
            w += base * vm;
            dw += -(f64::from(k2 + m)) * b.conj() * base / u * vm;
            if m > 0 {
                dw += f64::from(m) * a * base * v.powi(m - 1);
            }
        }
        (w, dw)
    }

    /// `|W_L(Az) − A′(z)^{−k} W_L(z)| / (1 + |W_L(z)|)`.
    pub fn automorphy_defect(&self, a: &MoebiusTransform, z: DiscPoint) -> f64 {
        let w = self.evaluate(z);
        let wa = self.evaluate(a.apply(z));
        let factor = a.derivative(z).powi(-(self.k as i32));
        (wa - factor * w).norm() / (1.0 + w.norm())
    }

    /// `r(z) = (1 − |z|²)^k |W_L(z)|`, invariant under the group.
    pub fn periodic_r(&self, z: DiscPoint) -> f64 {
        (1.0 - z.norm_sqr()).powi(self.k as i32) * self.evaluate(z).norm()
    }

    /// Winding number of `arg W_L` along the circle `|ζ − z| = radius`.
    pub fn winding_number(&self, z: DiscPoint, radius: f64) -> i32 {
        const STEPS: usize = 256;
        let c = z.to_complex();
        let mut total = 0.0;
        let mut prev = self.evaluate_complex(c + radius);
        for i in 1..=STEPS {
            let p = c + Complex64::from_polar(radius, TAU * i as f64 / STEPS as f64);
            let cur = self.evaluate_complex(p);
            total += (cur / prev).arg();
            prev = cur;
        }
        (total / TAU).round() as i32
    }

    /// Moves `z` into the Dirichlet domain about 0 by greedy application of
    /// the generators.
    pub fn reduce(&self, z: DiscPoint) -> DiscPoint {
        reduce_to_domain(self.group.generators(), z)
    }

    /// Zeros of `W_L` in the Dirichlet domain about 0, one per orbit.
    ///
    /// A Euclidean grid of spacing `grid_resolution` covers the domain;
    /// local minima of `|W_L|` seed Newton iterations, converged points are
    /// reduced into the domain and deduplicated modulo the group.
    pub fn scan_zeros(&self, grid_resolution: f64) -> Result<Vec<FormZero>, Error> {
        if !(grid_resolution > 0.0 && grid_resolution <= 0.01) {
            return Err(FieldError::InvalidParameter("grid resolution must lie in (0, 0.01]").into());
        }
        let tile = self.group.dirichlet_tile(1)?;
        let extent = (0.5 * (tile.circumradius() + 0.1)).tanh();
        let n = (2.0 * extent / grid_resolution).ceil() as usize + 1;
        let coord = |i: usize| -extent + i as f64 * grid_resolution;
        let mut values = alloc::vec![f64::INFINITY; n * n];
        for i in 0..n {
            for j in 0..n {
                let z = Complex64::new(coord(i), coord(j));
                if z.norm() >= extent {
                    continue;
                }
                let p = DiscPoint::from_complex_clamped(z);
                if tile.distance_to_boundary(p) < -0.05 {
                    continue;
                }
                values[i * n + j] = self.evaluate_complex(z).norm();
            }
        }
        let scale = values
            .iter()
            .copied()
            .filter(|v| v.is_finite())
            .fold(0.0, f64::max)
            .max(1.0);
        let mut zeros: Vec<FormZero> = Vec::new();
        for i in 1..n - 1 {
            for j in 1..n - 1 {
                let v = values[i * n + j];
                if !v.is_finite() {
                    continue;
                }
                let is_min = (-1i64..=1).all(|di| {
                    (-1i64..=1).all(|dj| {
                        let u = values[(i as i64 + di) as usize * n + (j as i64 + dj) as usize];
                        (di == 0 && dj == 0) || v <= u
                    })
                });
                if !is_min {
                    continue;
                }
                let Some(z) = self.newton(Complex64::new(coord(i), coord(j))) else {
                    continue;
                };
                // The truncation is only approximately automorphic, so the
                // reduced point is refined again as a zero of W_L itself.
                let Some(z) = self.newton(self.reduce(z).to_complex()) else {
                    continue;
                };
                let residual = self.evaluate(z).norm();
                if residual > ZERO_RESIDUAL * scale {
                    continue;
                }
                if zeros.iter().any(|q| self.congruent(q.point, z)) {
                    continue;
                }
                zeros.push(FormZero {
                    point: z,
                    multiplicity: 0,
                    residual,
                });
            }
        }
        for i in 0..zeros.len() {
            let nearest = zeros
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, q)| (q.point.to_complex() - zeros[i].point.to_complex()).norm())
                .fold(f64::INFINITY, f64::min);
            let radius = (0.25 * grid_resolution).min(0.4 * nearest);
            zeros[i].multiplicity = self.winding_number(zeros[i].point, radius);
        }
        Ok(zeros)
    }

    fn newton(&self, mut z: Complex64) -> Option<DiscPoint> {
        for _ in 0..20 {
            let (w, dw) = self.evaluate_with_derivative(DiscPoint::from_complex_clamped(z));
            if dw.norm() == 0.0 {
                break;
            }
            let step = w / dw;
            z -= step;
            if z.norm() >= 1.0 {
                return None;
            }
            if step.norm() < 1e-15 {
                break;
            }
        }
        DiscPoint::from_complex(z).ok()
    }

    fn congruent(&self, p: DiscPoint, q: DiscPoint) -> bool {
        let ball = self.group.ball(2.min(self.group.max_word_length())).unwrap_or(&[]);
        ball.iter()
            .any(|e| geodesic_distance(e.transform.apply(p), q) < ZERO_MERGE_DISTANCE)
    }
}

/// Greedy reduction into the Dirichlet domain about 0.
pub fn reduce_to_domain(generators: &[MoebiusTransform], mut z: DiscPoint) -> DiscPoint {
    for _ in 0..1000 {
        let d = z.norm_sqr();
        let best = generators
            .iter()
            .map(|g| g.apply(z))
            .fold(z, |acc, w| if w.norm_sqr() < acc.norm_sqr() { w } else { acc });
        if best.norm_sqr() >= d - 1e-15 {
            break;
        }
        z = best;
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fuchsian::surface_group_generators;

    fn form(l: u32, m: u32) -> AutomorphicForm {
        let g = Arc::new(surface_group_generators(2).unwrap().enumerate_elements(l).unwrap());
        AutomorphicForm::new(g, 2, m, l).unwrap()
    }

    #[test]
    fn identity_term_alone() {
        let g = Arc::new(surface_group_generators(2).unwrap().enumerate_elements(2).unwrap());
        let f = AutomorphicForm {
            group: g,
            k: 2,
            seed_power: 3,
            seed_center: DiscPoint::ORIGIN,
            seed_map: MoebiusTransform::IDENTITY,
            truncation: 0,
            len: 1,
        };
        let z = DiscPoint::new(0.2, -0.1).unwrap();
        assert!((f.evaluate(z) - z.to_complex().powi(3)).norm() < 1e-15);
    }

    #[test]
    fn parameters_are_checked() {
        let g = Arc::new(surface_group_generators(2).unwrap().enumerate_elements(2).unwrap());
        assert!(AutomorphicForm::new(g.clone(), 1, 0, 2).is_err());
        assert!(AutomorphicForm::new(g.clone(), 2, 0, 1).is_err());
        assert!(AutomorphicForm::new(g, 2, 0, 3).is_err());
    }

    #[test]
    fn derivative_matches_difference_quotient() {
        let f = form(3, 1);
        let z = DiscPoint::new(0.15, 0.1).unwrap();
        let (_, dw) = f.evaluate_with_derivative(z);
        let h = 1e-6;
        let num = (f.evaluate_complex(z.to_complex() + h) - f.evaluate_complex(z.to_complex() - h)) / (2.0 * h);
        assert!((dw - num).norm() < 1e-6 * (1.0 + dw.norm()));
    }

    #[test]
    fn conjugate_symmetry() {
        let f = form(3, 0);
        let z = DiscPoint::new(0.21, 0.13).unwrap();
        assert!((f.evaluate(z.conj()) - f.evaluate(z).conj()).norm() < 1e-10);
    }

    #[test]
    fn identity_has_no_defect() {
        let f = form(3, 0);
        let z = DiscPoint::new(0.1, 0.0).unwrap();
        assert_eq!(f.automorphy_defect(&MoebiusTransform::IDENTITY, z), 0.0);
    }

    #[test]
    fn seed_one_vanishes_at_origin() {
        let f = form(3, 1);
        assert!(f.evaluate(DiscPoint::ORIGIN).norm() < 1e-12);
        assert_eq!(f.winding_number(DiscPoint::ORIGIN, 0.01), 1);
    }
}
