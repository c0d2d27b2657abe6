//! Co-compact surface groups acting on the disc.
//!
//! The genus-2 group is generated by the side pairings of the regular
//! octagon centred at 0 with interior angles π/4: opposite sides are glued
//! by hyperbolic translations along the directions `jπ/4`.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_4, PI};

use hashbrown::HashMap;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{GroupError, QuadratureError};
use crate::hyperbolic::{geodesic_distance, DiscPoint, MoebiusTransform, PROBE_POINTS};
use crate::quadrature::DirichletTile;

/// Default bound on the number of enumerated elements.
pub const DEFAULT_ELEMENT_CAP: usize = 200_000;
/// Default dedup tolerance on the probe-point action distance.
pub const DEDUP_TOLERANCE: f64 = 1e-6;

/// Surface relation of the octagon group, as generator indices. Each index
/// `j` stands for the translation along direction `jπ/4`; `j + 4` is the
/// inverse of `j`.
pub const SURFACE_RELATOR: [u8; 8] = [0, 5, 2, 7, 4, 1, 6, 3];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroupElement {
    pub transform: MoebiusTransform,
    pub word_length: u32,
    /// Index of the last generator of a shortest word (`u8::MAX` for the
    /// identity).
    pub last: u8,
}

#[derive(Clone, Debug)]
pub struct FuchsianGroup {
    genus: u32,
    generators: Vec<MoebiusTransform>,
    elements: Vec<GroupElement>,
    /// `shells[L]..shells[L + 1]` indexes the elements of word length `L`.
    shells: Vec<usize>,
    cap: usize,
    tolerance: f64,
}

/// Translation distance of the octagon side pairings: twice the inradius.
pub fn octagon_translation_length() -> f64 {
    // cosh(inradius) = cos(α/2)/sin(π/n) with α = π/4, n = 8.
    let c = (PI / 8.0).cos() / (PI / 8.0).sin();
    2.0 * c.acosh()
}

/// Side-pairing generators of the regular genus-`g` polygon; only `g = 2`
/// is implemented.
pub fn surface_group_generators(genus: u32) -> Result<FuchsianGroup, GroupError> {
    if genus != 2 {
        return Err(GroupError::Unsupported { genus });
    }
    let t = MoebiusTransform::translation(octagon_translation_length());
    let generators = (0..8)
        .map(|j| {
            let r = MoebiusTransform::rotation(j as f64 * FRAC_PI_4);
            r.compose(&t).compose(&r.inverse())
        })
        .collect();
    Ok(FuchsianGroup {
        genus,
        generators,
        elements: alloc::vec![GroupElement {
            transform: MoebiusTransform::IDENTITY,
            word_length: 0,
            last: u8::MAX,
        }],
        shells: alloc::vec![0, 1],
        cap: DEFAULT_ELEMENT_CAP,
        tolerance: DEDUP_TOLERANCE,
    })
}

/// σ(F) = 4π(g − 1).
pub fn fundamental_domain_area(genus: u32) -> Result<f64, GroupError> {
    if genus < 2 {
        return Err(GroupError::Domain("genus must be at least 2"));
    }
    Ok(4.0 * PI * (genus as f64 - 1.0))
}

fn inverse_index(j: usize) -> usize {
    (j + 4) % 8
}

/// Hash cell of an element: its image of the origin in hyperboloid spatial
/// coordinates `2ab`, where distinct orbit points are several units apart.
fn cell(m: &MoebiusTransform) -> (i64, i64) {
    let x = m.a() * m.b() * 2.0;
    (x.re.floor() as i64, x.im.floor() as i64)
}

impl FuchsianGroup {
    pub fn genus(&self) -> u32 {
        self.genus
    }

    pub fn generators(&self) -> &[MoebiusTransform] {
        &self.generators
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.cap = cap;
        self
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    /// Product of the generators along [`SURFACE_RELATOR`].
    pub fn relator(&self) -> MoebiusTransform {
        SURFACE_RELATOR
            .iter()
            .fold(MoebiusTransform::IDENTITY, |acc, &j| {
                acc.compose(&self.generators[j as usize])
            })
    }

    /// Action distance of the relator from the identity at the probe points.
    pub fn relation_residual(&self) -> f64 {
        self.relator().action_distance(&MoebiusTransform::IDENTITY)
    }

    /// Largest word length enumerated so far.
    pub fn max_word_length(&self) -> u32 {
        (self.shells.len() - 2) as u32
    }

    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    /// Elements of word length at most `max_len`.
    pub fn ball(&self, max_len: u32) -> Result<&[GroupElement], GroupError> {
        self.check_depth(max_len)?;
        Ok(&self.elements[..self.shells[max_len as usize + 1]])
    }

    pub fn shell(&self, len: u32) -> Result<&[GroupElement], GroupError> {
        self.check_depth(len)?;
        Ok(&self.elements[self.shells[len as usize]..self.shells[len as usize + 1]])
    }

    pub fn shell_counts(&self) -> Vec<usize> {
        self.shells.windows(2).map(|w| w[1] - w[0]).collect()
    }

    fn check_depth(&self, len: u32) -> Result<(), GroupError> {
        if len > self.max_word_length() {
            return Err(GroupError::NotEnumerated {
                requested: len,
                available: self.max_word_length(),
            });
        }
        Ok(())
    }

    /// Tolerance used to compare two elements: the configured tolerance,
    /// widened by the rounding floor of matrices with entries of size |a|.
    fn effective_tolerance(&self, m: &MoebiusTransform) -> f64 {
        self.tolerance.max(64.0 * f64::EPSILON * m.a().norm_sqr())
    }

    /// Breadth-first enumeration of all words up to `max_len`, deduplicated
    /// by action. Extends an existing ball.
    pub fn enumerate_elements(mut self, max_len: u32) -> Result<Self, GroupError> {
        let mut index: HashMap<(i64, i64), u32> = HashMap::with_capacity(self.elements.len() * 8);
        for (i, e) in self.elements.iter().enumerate() {
            index.insert(cell(&e.transform), i as u32);
        }
        while self.max_word_length() < max_len {
            let len = self.max_word_length() + 1;
            let start = self.shells[len as usize - 1];
            let end = self.shells[len as usize];
            for i in start..end {
                let parent = self.elements[i];
                for (j, g) in self.generators.iter().enumerate() {
                    if parent.last as usize == inverse_index(j) {
                        continue;
                    }
                    let m = parent.transform.compose(g);
                    let (cx, cy) = cell(&m);
                    let tol = self.effective_tolerance(&m);
                    let duplicate = (-1..=1).any(|dx| {
                        (-1..=1).any(|dy| {
                            index.get(&(cx + dx, cy + dy)).is_some_and(|&k| {
                                self.elements[k as usize].transform.action_distance(&m) <= tol
                            })
                        })
                    });
                    if duplicate {
                        continue;
                    }
                    if self.elements.len() >= self.cap {
                        return Err(GroupError::BudgetExceeded {
                            count: self.elements.len() + 1,
                            cap: self.cap,
                        });
                    }
                    index.insert((cx, cy), self.elements.len() as u32);
                    self.elements.push(GroupElement {
                        transform: m,
                        word_length: len,
                        last: j as u8,
                    });
                }
            }
            self.shells.push(self.elements.len());
        }
        Ok(self)
    }

    /// Images `γ(z₀)` over the ball of radius `max_len`.
    pub fn orbit(&self, z0: DiscPoint, max_len: u32) -> Result<OrbitSample, GroupError> {
        let ball = self.ball(max_len)?;
        let base_defect = 1.0 - z0.norm_sqr();
        let points = ball
            .iter()
            .map(|e| OrbitPoint {
                point: e.transform.apply(z0),
                word_length: e.word_length,
                boundary_defect: e.transform.derivative(z0).norm() * base_defect,
            })
            .collect();
        Ok(OrbitSample { base: z0, points })
    }

    /// Dirichlet-domain membership about 0 against the ball of radius `depth`.
    pub fn in_dirichlet_domain(&self, z: DiscPoint, depth: u32) -> Result<bool, GroupError> {
        let ball = self.ball(depth)?;
        let zc = z.to_complex();
        let d0 = geodesic_distance(z, DiscPoint::ORIGIN);
        Ok(ball.iter().skip(1).all(|e| {
            d0 <= crate::hyperbolic::geodesic_distance_complex(zc, e.transform.image_of_origin())
        }))
    }

    /// The Dirichlet tile about 0 cut out by the orbit points of the ball of
    /// radius `depth`.
    pub fn dirichlet_tile(&self, depth: u32) -> Result<DirichletTile, crate::Error> {
        let ball = self.ball(depth)?;
        let sites: Vec<DiscPoint> = ball
            .iter()
            .skip(1)
            .map(|e| DiscPoint::from_complex_clamped(e.transform.image_of_origin()))
            .collect();
        DirichletTile::new(&sites).map_err(|e: QuadratureError| e.into())
    }

    /// Monte Carlo estimate of the Dirichlet-domain area: uniform samples of
    /// the geodesic ball of radius `radius` about 0. Returns `(area, stderr)`.
    pub fn monte_carlo_area(
        &self,
        depth: u32,
        radius: f64,
        samples: usize,
        seed: u64,
    ) -> Result<(f64, f64), GroupError> {
        self.check_depth(depth)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = radius.cosh() - 1.0;
        let mut hits = 0usize;
        for _ in 0..samples {
            let u: f64 = rng.gen();
            let phi: f64 = rng.gen::<f64>() * 2.0 * PI;
            let rho = (1.0 + u * c).acosh();
            let z = DiscPoint::from_complex_clamped(Complex64::from_polar((0.5 * rho).tanh(), phi));
            if self.in_dirichlet_domain(z, depth)? {
                hits += 1;
            }
        }
        let total = crate::hyperbolic::disc_area(radius);
        let p = hits as f64 / samples as f64;
        Ok((p * total, total * (p * (1.0 - p) / samples as f64).sqrt()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrbitPoint {
    pub point: DiscPoint,
    pub word_length: u32,
    /// `1 − |γz₀|²`, computed without cancellation.
    pub boundary_defect: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrbitSample {
    pub base: DiscPoint,
    pub points: Vec<OrbitPoint>,
}

impl OrbitSample {
    /// Smallest pairwise geodesic distance (quadratic; for small samples).
    pub fn min_separation(&self) -> f64 {
        let mut best = f64::INFINITY;
        for (i, p) in self.points.iter().enumerate() {
            for q in &self.points[i + 1..] {
                best = best.min(geodesic_distance(p.point, q.point));
            }
        }
        best
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Lemma3Report {
    pub d: f64,
    /// Contribution of each word length.
    pub shell_sums: Vec<f64>,
    /// Cumulative sums over word length `≤ L`.
    pub partial_sums: Vec<f64>,
    /// Group-independent upper bound at `ε = 1/(2d)`.
    pub bound: f64,
}

impl Lemma3Report {
    /// Ratios of consecutive shell sums.
    pub fn shell_ratios(&self) -> Vec<f64> {
        self.shell_sums.windows(2).map(|w| w[1] / w[0]).collect()
    }

    /// Geometric tail estimate beyond the last shell, from the last ratio.
    pub fn extrapolated_tail(&self) -> f64 {
        match self.shell_ratios().last() {
            Some(&q) if q < 1.0 => self.shell_sums.last().copied().unwrap_or(0.0) * q / (1.0 - q),
            _ => f64::INFINITY,
        }
    }
}

/// Shell and partial sums of `Σ (1 − |z_γ|²)^d` over an orbit.
pub fn lemma3_partial_sum(sample: &OrbitSample, d: f64) -> Result<Lemma3Report, GroupError> {
    if !(d >= 2.0) {
        return Err(GroupError::Domain("exponent must be at least 2"));
    }
    let max_len = sample.points.iter().map(|p| p.word_length).max().unwrap_or(0) as usize;
    let mut shell_sums = alloc::vec![0.0; max_len + 1];
    for p in &sample.points {
        shell_sums[p.word_length as usize] += p.boundary_defect.powf(d);
    }
    let partial_sums = shell_sums
        .iter()
        .scan(0.0, |acc, s| {
            *acc += s;
            Some(*acc)
        })
        .collect();
    Ok(Lemma3Report {
        d,
        shell_sums,
        partial_sums,
        bound: lemma3_uniform_bound(d, 0.5 / d)?,
    })
}

/// `4mπ / ((1 − dε)(d − 1) σ(F))`.
pub fn lemma3_bound(d: f64, epsilon: f64, sigma_f: f64, m: u32) -> Result<f64, GroupError> {
    check_lemma3(d, epsilon)?;
    if !(sigma_f > 0.0) || m == 0 {
        return Err(GroupError::Domain("need σ(F) > 0 and m ≥ 1"));
    }
    Ok(4.0 * m as f64 * PI / ((1.0 - d * epsilon) * (d - 1.0) * sigma_f))
}

/// Partition size `m = [σ(F)/ε] + 1`.
pub fn lemma3_partition_size(sigma_f: f64, epsilon: f64) -> u32 {
    (sigma_f / epsilon).floor() as u32 + 1
}

/// Group-independent form of [`lemma3_bound`]: with `m ≤ σ(F)/ε + 1` and
/// `σ(F) ≥ 4π`, the bound is at most `(4π/ε + 1) / ((1 − dε)(d − 1))`.
pub fn lemma3_uniform_bound(d: f64, epsilon: f64) -> Result<f64, GroupError> {
    check_lemma3(d, epsilon)?;
    Ok((4.0 * PI / epsilon + 1.0) / ((1.0 - d * epsilon) * (d - 1.0)))
}

fn check_lemma3(d: f64, epsilon: f64) -> Result<(), GroupError> {
    if !(d >= 2.0) {
        return Err(GroupError::Domain("exponent must be at least 2"));
    }
    if !(epsilon > 0.0 && epsilon < 1.0 / d) {
        return Err(GroupError::Domain("need 0 < ε < 1/d"));
    }
    Ok(())
}

/// Probe-point images of a transform; used by callers that compare actions.
pub fn probe_images(m: &MoebiusTransform) -> [Complex64; 3] {
    PROBE_POINTS.map(|p| m.apply_complex(p))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn group(len: u32) -> FuchsianGroup {
        surface_group_generators(2).unwrap().enumerate_elements(len).unwrap()
    }

    #[test]
    fn generators_are_hyperbolic_and_paired() {
        let g = surface_group_generators(2).unwrap();
        assert_eq!(g.generators().len(), 8);
        for (j, m) in g.generators().iter().enumerate() {
            assert!(m.trace().abs() > 2.0);
            let inv = &g.generators()[inverse_index(j)];
            assert!(m.compose(inv).action_distance(&MoebiusTransform::IDENTITY) < 1e-12);
        }
        assert!(g.relation_residual() <= 1e-8);
    }

    #[test]
    fn genus_one_is_rejected() {
        assert_eq!(
            surface_group_generators(1).unwrap_err(),
            GroupError::Unsupported { genus: 1 }
        );
    }

    #[test]
    fn small_balls() {
        let g = group(2);
        assert_eq!(g.ball(0).unwrap().len(), 1);
        assert_eq!(g.shell(1).unwrap().len(), 8);
        let total = g.ball(2).unwrap().len();
        assert!(total < 1 + 8 + 64, "{total}");
        assert!(g.ball(3).is_err());
    }

    #[test]
    fn dedup_is_stable_under_tolerance() {
        let a = group(4).shell_counts();
        let b = surface_group_generators(2)
            .unwrap()
            .with_tolerance(0.5 * DEDUP_TOLERANCE)
            .enumerate_elements(4)
            .unwrap()
            .shell_counts();
        assert_eq!(a, b);
    }

    #[test]
    fn cap_is_enforced() {
        let err = surface_group_generators(2)
            .unwrap()
            .with_cap(50)
            .enumerate_elements(3)
            .unwrap_err();
        assert!(matches!(err, GroupError::BudgetExceeded { cap: 50, .. }));
    }

    #[test]
    fn orbit_of_origin_is_separated() {
        let g = group(3);
        let o = g.orbit(DiscPoint::ORIGIN, 3).unwrap();
        assert_eq!(o.points[0].point, DiscPoint::ORIGIN);
        assert!(o.min_separation() > 2.0 * octagon_translation_length() / 2.0 - 1e-9);
    }

    #[test]
    fn dirichlet_membership() {
        let g = group(2);
        assert!(g.in_dirichlet_domain(DiscPoint::ORIGIN, 2).unwrap());
        for m in g.generators() {
            assert!(!g.in_dirichlet_domain(m.apply(DiscPoint::ORIGIN), 2).unwrap());
        }
    }

    #[test]
    fn tile_is_the_octagon() {
        let g = group(1);
        let tile = g.dirichlet_tile(1).unwrap();
        assert_eq!(tile.kinks().len(), 8);
        // cosh R = cot²(π/8) for the circumradius.
        let cot = 1.0 / (PI / 8.0).tan();
        assert!((tile.circumradius() - (cot * cot).acosh()).abs() < 1e-9);
    }

    #[test]
    fn bounds() {
        let sigma = fundamental_domain_area(2).unwrap();
        assert!((sigma - 4.0 * PI).abs() < 1e-15);
        assert!((fundamental_domain_area(3).unwrap() - 8.0 * PI).abs() < 1e-14);
        assert!(fundamental_domain_area(1).is_err());
        assert_eq!(lemma3_partition_size(sigma, 0.25), 51);
        assert!((lemma3_bound(2.0, 0.25, sigma, 1).unwrap() - 2.0).abs() < 1e-14);
        assert!((lemma3_bound(2.0, 0.25, sigma, 51).unwrap() - 102.0).abs() < 1e-12);
        let u = lemma3_uniform_bound(2.0, 0.25).unwrap();
        assert!((u - (32.0 * PI + 2.0)).abs() < 1e-12);
        assert!(lemma3_bound(2.0, 0.5, sigma, 1).is_err());
        assert!(lemma3_bound(3.0, 0.34, sigma, 1).is_err());
        assert!(lemma3_bound(2.0, 0.4999999, sigma, 1).unwrap() > 1e6);
    }

    #[test]
    fn partial_sums_start_at_one() {
        let g = group(2);
        let r = lemma3_partial_sum(&g.orbit(DiscPoint::ORIGIN, 0).unwrap(), 2.0).unwrap();
        assert_eq!(r.partial_sums, alloc::vec![1.0]);
        let r = lemma3_partial_sum(&g.orbit(DiscPoint::ORIGIN, 2).unwrap(), 2.0).unwrap();
        assert!(r.partial_sums.windows(2).all(|w| w[1] >= w[0]));
        assert!(r.shell_sums.iter().all(|&s| s >= 0.0));
    }
}
