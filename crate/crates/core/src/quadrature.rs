//! Adaptive quadrature over regions of the Poincaré disc.
//!
//! Integrands are densities against the invariant area `dσ = dx dy / λ²`.
//! Regions are star-shaped about a centre and are integrated in geodesic
//! polar coordinates `(ρ, φ)` about that centre, where `dσ = sinh ρ dρ dφ`;
//! both directions use globally adaptive Gauss–Kronrod (7/15) rules.
//!
//! A declared singular point `p` with exponent `α < 2` is split off with a
//! smooth bump `χ_p` supported in a geodesic ball `B(p, δ)`. The bump part
//! `∫ f χ_p dσ` is integrated in polar coordinates recentred at `p` with the
//! substitution `ρ = δ u^{1/(2−α)}`, which cancels `ρ^{1−α}`; the remainder
//! `f (1 − Σ χ_p)` is smooth and vanishes near `p`.
//!
//! Everything is evaluated sequentially in a fixed order, so results are
//! bit-reproducible for fixed inputs.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::QuadratureError;
use crate::hyperbolic::{geodesic_distance, wrap_angle, DiscPoint, MoebiusTransform};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Largest geodesic radius used when integrating over the whole disc. Beyond
/// it `tanh(ρ/2)` is within a few ulps of one.
pub const MAX_RHO: f64 = 30.0;
const ANNULUS_WIDTH: f64 = 1.0;
const MIN_BUMP_RADIUS: f64 = 1e-3;

/// Value and estimated absolute error of an integral.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
}

impl Tolerance {
    pub fn relative(rel: f64) -> Self {
        Self { rel, abs: 0.0 }
    }

    fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }
}

/// A point where the integrand behaves like `|z − p|^{−α}`.
///
/// Away from the origin the integrand only sees `z` rounded to `f64`, so
/// `|z − p|` below about `ε|p|` is unresolved; that region carries a share
/// of order `ε^{2−α}` of the mass, which bounds the attainable relative
/// accuracy when `α` is close to 2.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SingularPoint {
    pub point: DiscPoint,
    pub exponent: f64,
}

impl SingularPoint {
    pub fn new(point: DiscPoint, exponent: f64) -> Result<Self, QuadratureError> {
        if !(0.0..2.0).contains(&exponent) {
            return Err(QuadratureError::InvalidSingularity { exponent });
        }
        Ok(Self { point, exponent })
    }
}

/// Quadrature settings.
#[derive(Clone, Debug, PartialEq)]
pub struct Quadrature {
    pub rel_tol: f64,
    /// Absolute error floor; zero means purely relative.
    pub abs_tol: f64,
    /// Bisection budget of each one-dimensional adaptive pass.
    pub max_subdivisions: usize,
    pub singular_points: Vec<SingularPoint>,
    /// Points near which the integrand varies quickly; they only seed
    /// breakpoints.
    pub focus_points: Vec<DiscPoint>,
    /// Upper bound on the geodesic radius of singular-point bumps.
    pub bump_radius: f64,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self {
            rel_tol: 1e-6,
            abs_tol: 0.0,
            max_subdivisions: 400,
            singular_points: Vec::new(),
            focus_points: Vec::new(),
            bump_radius: 0.3,
        }
    }
}

impl Quadrature {
    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_singularity(mut self, point: DiscPoint, exponent: f64) -> Result<Self, QuadratureError> {
        self.singular_points.push(SingularPoint::new(point, exponent)?);
        Ok(self)
    }

    fn validate(&self) -> Result<(), QuadratureError> {
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) || !(self.abs_tol >= 0.0) {
            return Err(QuadratureError::InvalidTolerance {
                rel_tol: self.rel_tol,
            });
        }
        for s in &self.singular_points {
            if !(0.0..2.0).contains(&s.exponent) {
                return Err(QuadratureError::InvalidSingularity {
                    exponent: s.exponent,
                });
            }
        }
        Ok(())
    }

    fn tolerance(&self) -> Tolerance {
        Tolerance {
            rel: self.rel_tol,
            abs: self.abs_tol,
        }
    }
}

/// Star-shaped Dirichlet tile centred at the origin: the points at least as
/// close to `0` as to every site.
#[derive(Clone, Debug, PartialEq)]
pub struct DirichletTile {
    sites: Vec<Complex64>,
    kinks: Vec<f64>,
    circumradius: f64,
}

impl DirichletTile {
    const SCAN: usize = 4096;

    /// `sites` are the images of the centre under the neighbouring group
    /// elements. Fails if the resulting region is unbounded.
    pub fn new(sites: &[DiscPoint]) -> Result<Self, QuadratureError> {
        let sites: Vec<Complex64> = sites
            .iter()
            .filter(|s| s.norm_sqr() > 0.0)
            .map(|s| s.to_complex())
            .collect();
        if sites.is_empty() {
            return Err(QuadratureError::InvalidRegion("tile has no sites"));
        }
        let mut tile = Self {
            sites,
            kinks: Vec::new(),
            circumradius: 0.0,
        };
        let mut kinks = Vec::new();
        let angle = |i: usize| TAU * i as f64 / Self::SCAN as f64;
        let mut prev = tile.nearest_wall(0.0);
        if prev.1.is_infinite() {
            return Err(QuadratureError::InvalidRegion("tile is unbounded"));
        }
        for i in 1..=Self::SCAN {
            let phi = angle(i);
            let cur = tile.nearest_wall(phi);
            if cur.1.is_infinite() {
                return Err(QuadratureError::InvalidRegion("tile is unbounded"));
            }
            if cur.0 != prev.0 {
                let (mut lo, mut hi) = (angle(i - 1), phi);
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if tile.nearest_wall(mid).0 == prev.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                kinks.push(wrap_angle(0.5 * (lo + hi)));
            }
            prev = cur;
        }
        kinks.sort_by(f64::total_cmp);
        kinks.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        tile.circumradius = kinks
            .iter()
            .map(|&k| tile.boundary_rho(k))
            .fold(0.0, f64::max);
        tile.kinks = kinks;
        Ok(tile)
    }

    fn wall_rho(site: Complex64, phi: f64) -> f64 {
        let (t, phi_q) = (site.norm(), site.im.atan2(site.re));
        let c = (phi - phi_q).cos();
        if c <= t {
            f64::INFINITY
        } else {
            (t / c).atanh()
        }
    }

    fn nearest_wall(&self, phi: f64) -> (usize, f64) {
        self.sites
            .iter()
            .enumerate()
            .map(|(i, &s)| (i, Self::wall_rho(s, phi)))
            .fold((usize::MAX, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc })
    }

    /// Geodesic distance from the centre to the boundary in direction `phi`.
    pub fn boundary_rho(&self, phi: f64) -> f64 {
        self.nearest_wall(phi).1
    }

    /// Directions of the vertices.
    pub fn kinks(&self) -> &[f64] {
        &self.kinks
    }

    pub fn circumradius(&self) -> f64 {
        self.circumradius
    }

    pub fn sites(&self) -> impl Iterator<Item = DiscPoint> + '_ {
        self.sites.iter().map(|&s| DiscPoint::from_complex_clamped(s))
    }

    pub fn contains(&self, z: DiscPoint) -> bool {
        let zc = z.to_complex();
        let d0 = geodesic_distance(z, DiscPoint::ORIGIN);
        self.sites.iter().all(|&s| {
            d0 <= crate::hyperbolic::geodesic_distance_complex(zc, s) + 1e-14
        })
    }

    /// Lower bound on the geodesic distance from an interior point to the
    /// boundary (distance to the nearest wall geodesic); negative outside.
    pub fn distance_to_boundary(&self, z: DiscPoint) -> f64 {
        let zc = z.to_complex();
        let c0 = geodesic_distance(z, DiscPoint::ORIGIN).cosh();
        self.sites
            .iter()
            .map(|&s| {
                let cs = crate::hyperbolic::geodesic_distance_complex(zc, s).cosh();
                let cd = crate::hyperbolic::geodesic_distance_complex(Complex64::new(0.0, 0.0), s)
                    .cosh();
                let d = ((cs - c0).abs() / (2.0 * (cd - 1.0)).sqrt()).asinh();
                if cs >= c0 {
                    d
                } else {
                    -d
                }
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// Integration region.
#[derive(Clone, Debug, PartialEq)]
pub enum Region {
    /// Geodesic ball; `radius` may be `f64::INFINITY` for the whole disc.
    Ball { center: DiscPoint, radius: f64 },
    Tile(DirichletTile),
}

impl Region {
    /// `{|z| < r}` for `0 < r ≤ 1`; `r = 1` is the whole (infinite-area) disc.
    pub fn euclidean_disc(r: f64) -> Result<Self, QuadratureError> {
        if !(r > 0.0 && r <= 1.0) {
            return Err(QuadratureError::InvalidRegion("radius must lie in (0, 1]"));
        }
        let radius = if r == 1.0 {
            f64::INFINITY
        } else {
            2.0 * r.atanh()
        };
        Ok(Region::Ball {
            center: DiscPoint::ORIGIN,
            radius,
        })
    }

    pub fn contains(&self, z: DiscPoint) -> bool {
        match self {
            Region::Ball { center, radius } => geodesic_distance(*center, z) < *radius,
            Region::Tile(t) => t.contains(z),
        }
    }

    fn distance_to_boundary(&self, z: DiscPoint) -> f64 {
        match self {
            Region::Ball { center, radius } => *radius - geodesic_distance(*center, z),
            Region::Tile(t) => t.distance_to_boundary(z),
        }
    }

    fn center(&self) -> DiscPoint {
        match self {
            Region::Ball { center, .. } => *center,
            Region::Tile(_) => DiscPoint::ORIGIN,
        }
    }
}

/// Nodes and weights with `∫ f g dσ ≈ Σ wᵢ g(xᵢ)`, where `f` is the integrand
/// the rule was recorded from and `g` is smooth.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<(DiscPoint, f64)>,
}

impl QuadratureRule {
    pub fn apply<G: FnMut(DiscPoint) -> f64>(&self, mut g: G) -> f64 {
        self.nodes.iter().map(|&(z, w)| w * g(z)).sum()
    }

    pub fn total_weight(&self) -> f64 {
        self.nodes.iter().map(|n| n.1).sum()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Merges nodes falling into the same cell of a geodesic polar grid
    /// (`rho_step` by `angle_cells`) into one node at the weighted centroid.
    /// The result integrates affine functions exactly cell by cell.
    pub fn coarsen(&self, rho_step: f64, angle_cells: usize) -> QuadratureRule {
        let mut cells: hashbrown::HashMap<(u32, u32), (f64, Complex64, f64)> =
            hashbrown::HashMap::new();
        let mut order: Vec<(u32, u32)> = Vec::new();
        for &(z, w) in &self.nodes {
            let p = crate::hyperbolic::to_polar(z);
            let key = (
                (p.rho / rho_step) as u32,
                ((p.theta / TAU * angle_cells as f64) as u32).min(angle_cells as u32 - 1),
            );
            let e = cells.entry(key).or_insert_with(|| {
                order.push(key);
                (0.0, Complex64::new(0.0, 0.0), 0.0)
            });
            e.0 += w;
            e.1 += z.to_complex() * w.abs();
            e.2 += w.abs();
        }
        let nodes = order
            .iter()
            .map(|k| {
                let (w, zw, aw) = cells[k];
                let z = if aw > 0.0 { zw / aw } else { Complex64::new(0.0, 0.0) };
                (DiscPoint::from_complex_clamped(z), w)
            })
            .collect();
        QuadratureRule { nodes }
    }
}

struct Leaf<P> {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    nodes: Vec<(f64, f64, P)>,
}

struct Adaptive<P> {
    value: f64,
    error: f64,
    leaves: Vec<Leaf<P>>,
}

fn gk15<P, F>(f: &mut F, a: f64, b: f64) -> Result<Leaf<P>, QuadratureError>
where
    F: FnMut(f64) -> Result<(f64, P), QuadratureError>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut nodes = Vec::with_capacity(15);
    let (fc, pc) = f(center)?;
    let mut resk = WGK[7] * fc;
    let mut resg = WG[3] * fc;
    let mut resabs = resk.abs();
    let mut fv = [(0.0, 0.0); 7];
    nodes.push((center, WGK[7] * half, pc));
    for j in 0..7 {
        let dx = half * XGK[j];
        let (f1, p1) = f(center - dx)?;
        let (f2, p2) = f(center + dx)?;
        nodes.push((center - dx, WGK[j] * half, p1));
        nodes.push((center + dx, WGK[j] * half, p2));
        fv[j] = (f1, f2);
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * resk;
    let mut resasc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv[j].0 - mean).abs() + (fv[j].1 - mean).abs());
    }
    let value = resk * half;
    let resabs = resabs * half.abs();
    let resasc = resasc * half.abs();
    let mut error = ((resk - resg) * half).abs();
    if resasc != 0.0 && error != 0.0 {
        error = resasc * (200.0 * error / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * resabs);
    }
    if !value.is_finite() {
        return Err(QuadratureError::NonFinite { value });
    }
    Ok(Leaf {
        a,
        b,
        value,
        error,
        nodes,
    })
}

fn adaptive<P, F>(
    f: &mut F,
    breaks: &[f64],
    tol: Tolerance,
    max_subdivisions: usize,
) -> Result<Adaptive<P>, QuadratureError>
where
    F: FnMut(f64) -> Result<(f64, P), QuadratureError>,
{
    let mut leaves = Vec::with_capacity(breaks.len() + max_subdivisions.min(64));
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            leaves.push(gk15(f, w[0], w[1])?);
        }
    }
    let mut partials = Vec::new();
    let mut subdivisions = 0;
    loop {
        let value: f64 = leaves.iter().map(|l| l.value).sum();
        let error: f64 = leaves.iter().map(|l| l.error).sum();
        partials.push(value);
        if error <= tol.target(value) {
            return Ok(Adaptive {
                value,
                error,
                leaves,
            });
        }
        let worst = leaves
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, l)| if l.error > acc.1 { (i, l.error) } else { acc })
            .0;
        let (a, b) = (leaves[worst].a, leaves[worst].b);
        let mid = 0.5 * (a + b);
        if subdivisions >= max_subdivisions || !(mid > a && mid < b) {
            return Err(QuadratureError::NonConvergent {
                estimate: value,
                error,
                partials,
            });
        }
        subdivisions += 1;
        let left = gk15(f, a, mid)?;
        let right = gk15(f, mid, b)?;
        leaves[worst] = left;
        leaves.push(right);
    }
}

/// Adaptive Gauss–Kronrod over `[a, b]` split at the given interior
/// breakpoints.
pub fn integrate_interval<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    tol: Tolerance,
    max_subdivisions: usize,
) -> Result<Estimate, QuadratureError> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(QuadratureError::InvalidRegion("interval must be finite"));
    }
    let (lo, hi, sign) = if a <= b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut breaks = vec![lo];
    breaks.extend(breakpoints.iter().copied().filter(|&x| x > lo && x < hi));
    breaks.push(hi);
    breaks.sort_by(f64::total_cmp);
    let mut evaluations = 0;
    let mut g = |x: f64| {
        evaluations += 1;
        Ok((f(x), ()))
    };
    let r = adaptive(&mut g, &breaks, tol, max_subdivisions)?;
    Ok(Estimate {
        value: sign * r.value,
        error: r.error,
        evaluations,
    })
}

#[derive(Clone, Copy)]
enum RadialLimit<'a> {
    Fixed(f64),
    Annulus(f64, f64),
    Tile(&'a DirichletTile),
}

struct Patch<'a> {
    map: MoebiusTransform,
    limit: RadialLimit<'a>,
    /// Singularity exponent at the patch centre, removed by substitution.
    center_exponent: Option<f64>,
    phi_breaks: Vec<f64>,
    rho_breaks: Vec<f64>,
}

struct Inner {
    error: f64,
    rule: Vec<(DiscPoint, f64)>,
}

fn integrate_patch<G: FnMut(DiscPoint) -> f64>(
    g: &mut G,
    patch: &Patch<'_>,
    tol: Tolerance,
    max_subdivisions: usize,
    record: bool,
    evaluations: &mut usize,
) -> Result<(Estimate, Vec<(DiscPoint, f64)>), QuadratureError> {
    let inner_tol = Tolerance {
        rel: 0.1 * tol.rel,
        abs: 0.1 * tol.abs / TAU,
    };
    let mut outer = |phi: f64| -> Result<(f64, Inner), QuadratureError> {
        let (lo, hi) = match patch.limit {
            RadialLimit::Fixed(r) => (0.0, r),
            RadialLimit::Annulus(a, b) => (a, b),
            RadialLimit::Tile(t) => (0.0, t.boundary_rho(phi)),
        };
        if hi <= lo {
            return Ok((0.0, Inner { error: 0.0, rule: Vec::new() }));
        }
        let dir = Complex64::new(phi.cos(), phi.sin());
        let point = |rho: f64| {
            let zeta = dir * (0.5 * rho).tanh();
            DiscPoint::from_complex_clamped(patch.map.apply_complex(zeta))
        };
        let (result, rule) = match patch.center_exponent {
            Some(alpha) if lo == 0.0 => {
                let beta = 1.0 / (2.0 - alpha);
                let centre = point(0.0);
                let mut h = |u: f64| -> Result<(f64, (DiscPoint, f64)), QuadratureError> {
                    *evaluations += 1;
                    let rho = hi * u.powf(beta);
                    let jac = hi * beta * u.powf(beta - 1.0) * rho.sinh();
                    let z = point(rho);
                    // nodes that round onto the singular point carry no resolvable mass
                    let v = if jac == 0.0 || z == centre { 0.0 } else { g(z) * jac };
                    Ok((v, (z, v)))
                };
                let mut breaks = vec![0.0];
                breaks.extend(
                    patch
                        .rho_breaks
                        .iter()
                        .filter(|&&r| r > 0.0 && r < hi)
                        .map(|&r| (r / hi).powf(2.0 - alpha)),
                );
                breaks.push(1.0);
                breaks.sort_by(f64::total_cmp);
                let r = adaptive(&mut h, &breaks, inner_tol, max_subdivisions)?;
                let rule = if record {
                    r.leaves
                        .iter()
                        .flat_map(|l| l.nodes.iter())
                        .map(|&(_, w, (z, v))| (z, w * v))
                        .collect()
                } else {
                    Vec::new()
                };
                (r, rule)
            }
            _ => {
                let mut h = |rho: f64| -> Result<(f64, (DiscPoint, f64)), QuadratureError> {
                    *evaluations += 1;
                    let jac = rho.sinh();
                    let z = point(rho);
                    let v = if jac == 0.0 { 0.0 } else { g(z) * jac };
                    Ok((v, (z, v)))
                };
                let mut breaks = vec![lo];
                breaks.extend(patch.rho_breaks.iter().copied().filter(|&r| r > lo && r < hi));
                breaks.push(hi);
                breaks.sort_by(f64::total_cmp);
                let r = adaptive(&mut h, &breaks, inner_tol, max_subdivisions)?;
                let rule = if record {
                    r.leaves
                        .iter()
                        .flat_map(|l| l.nodes.iter())
                        .map(|&(_, w, (z, v))| (z, w * v))
                        .collect()
                } else {
                    Vec::new()
                };
                (r, rule)
            }
        };
        Ok((
            result.value,
            Inner {
                error: result.error,
                rule,
            },
        ))
    };
    let r = adaptive(&mut outer, &patch.phi_breaks, tol, max_subdivisions)?;
    let mut error = r.error;
    let mut rule = Vec::new();
    for leaf in &r.leaves {
        for (_, w, inner) in &leaf.nodes {
            error += w * inner.error;
            if record {
                rule.extend(inner.rule.iter().map(|&(z, wi)| (z, w * wi)));
            }
        }
    }
    Ok((
        Estimate {
            value: r.value,
            error,
            evaluations: 0,
        },
        rule,
    ))
}

/// C^∞ cutoff: 1 on `[0, 1/2]`, 0 on `[1, ∞)`.
pub(crate) fn bump(t: f64) -> f64 {
    if t <= 0.5 {
        return 1.0;
    }
    if t >= 1.0 {
        return 0.0;
    }
    let s = 2.0 * (t - 0.5);
    let psi = |x: f64| if x <= 0.0 { 0.0 } else { (-1.0 / x).exp() };
    let a = psi(1.0 - s);
    a / (a + psi(s))
}

#[derive(Clone, Copy, Debug)]
struct Bump {
    point: DiscPoint,
    radius: f64,
    exponent: f64,
}

fn plan_bumps(region: &Region, q: &Quadrature) -> Vec<Bump> {
    let pts = &q.singular_points;
    let mut out = Vec::new();
    for (i, s) in pts.iter().enumerate() {
        if !region.contains(s.point) {
            continue;
        }
        let mut r = q.bump_radius.min(0.9 * region.distance_to_boundary(s.point));
        for (j, o) in pts.iter().enumerate() {
            if i != j {
                r = r.min(0.45 * geodesic_distance(s.point, o.point));
            }
        }
        if r >= MIN_BUMP_RADIUS {
            out.push(Bump {
                point: s.point,
                radius: r,
                exponent: s.exponent,
            });
        }
    }
    out
}

fn angular_breaks(center: DiscPoint, q: &Quadrature, bumps: &[Bump], base: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let to_local = MoebiusTransform::recentering(center).inverse();
    let mut phis: Vec<f64> = base.to_vec();
    let mut rhos = Vec::new();
    let mut add = |p: DiscPoint, halo: f64| {
        let zeta = to_local.apply(p);
        let d = geodesic_distance(DiscPoint::ORIGIN, zeta);
        if d < 1e-12 {
            return;
        }
        let phi = wrap_angle(zeta.im().atan2(zeta.re()));
        phis.push(phi);
        rhos.push(d);
        if halo > 0.0 && d > halo {
            let w = (halo.sinh() / d.sinh()).min(1.0).asin();
            phis.push(wrap_angle(phi - w));
            phis.push(wrap_angle(phi + w));
            rhos.push(d - halo);
            rhos.push(d + halo);
        }
    };
    for b in bumps {
        add(b.point, b.radius);
    }
    for s in &q.singular_points {
        if !bumps.iter().any(|b| b.point == s.point) {
            add(s.point, 0.0);
        }
    }
    for &p in &q.focus_points {
        add(p, 0.0);
    }
    phis.push(0.0);
    phis.push(TAU);
    phis.sort_by(f64::total_cmp);
    phis.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    rhos.sort_by(f64::total_cmp);
    (phis, rhos)
}

fn integrate_region<F: FnMut(DiscPoint) -> f64>(
    mut f: F,
    region: &Region,
    q: &Quadrature,
    record: bool,
) -> Result<(Estimate, QuadratureRule), QuadratureError> {
    q.validate()?;
    if let Region::Ball { radius, .. } = region {
        if !(*radius > 0.0) {
            return Err(QuadratureError::InvalidRegion("ball radius must be positive"));
        }
    }
    let bumps = plan_bumps(region, q);
    let tol = q.tolerance();
    let mut evaluations = 0usize;
    let mut total = 0.0;
    let mut error = 0.0;
    let mut rule = Vec::new();

    for b in &bumps {
        let patch = Patch {
            map: MoebiusTransform::recentering(b.point),
            limit: RadialLimit::Fixed(b.radius),
            center_exponent: Some(b.exponent),
            phi_breaks: vec![0.0, PI, TAU],
            rho_breaks: vec![0.5 * b.radius],
        };
        let mut g = |z: DiscPoint| {
            let c = bump(geodesic_distance(z, b.point) / b.radius);
            if c == 0.0 {
                0.0
            } else {
                c * f(z)
            }
        };
        let (e, r) = integrate_patch(&mut g, &patch, tol, q.max_subdivisions, record, &mut evaluations)?;
        total += e.value;
        error += e.error;
        rule.extend(r);
    }

    let mut remainder = |z: DiscPoint| {
        let mut keep = 1.0;
        for b in &bumps {
            keep -= bump(geodesic_distance(z, b.point) / b.radius);
        }
        if keep <= 0.0 {
            0.0
        } else {
            keep * f(z)
        }
    };
    let center = region.center();
    let base: Vec<f64> = match region {
        Region::Tile(t) => t.kinks().to_vec(),
        Region::Ball { .. } => Vec::new(),
    };
    let (phi_breaks, rho_breaks) = angular_breaks(center, q, &bumps, &base);
    let map = MoebiusTransform::recentering(center);
    match region {
        Region::Ball { radius, .. } if radius.is_infinite() => {
            let mut partials = Vec::new();
            let mut lo = 0.0;
            let mut quiet = 0;
            while lo < MAX_RHO {
                let hi = lo + ANNULUS_WIDTH;
                let patch = Patch {
                    map,
                    limit: RadialLimit::Annulus(lo, hi),
                    center_exponent: None,
                    phi_breaks: phi_breaks.clone(),
                    rho_breaks: rho_breaks.clone(),
                };
                let (e, r) =
                    integrate_patch(&mut remainder, &patch, tol, q.max_subdivisions, record, &mut evaluations)?;
                total += e.value;
                error += e.error;
                rule.extend(r);
                partials.push(total);
                quiet = if e.value.abs() <= tol.target(total) { quiet + 1 } else { 0 };
                if quiet >= 2 {
                    return Ok((
                        Estimate {
                            value: total,
                            error,
                            evaluations,
                        },
                        QuadratureRule { nodes: rule },
                    ));
                }
                lo = hi;
            }
            Err(QuadratureError::NonConvergent {
                estimate: total,
                error,
                partials,
            })
        }
        _ => {
            let limit = match region {
                Region::Ball { radius, .. } => RadialLimit::Fixed(*radius),
                Region::Tile(t) => RadialLimit::Tile(t),
            };
            let patch = Patch {
                map,
                limit,
                center_exponent: None,
                phi_breaks,
                rho_breaks,
            };
            let (e, r) =
                integrate_patch(&mut remainder, &patch, tol, q.max_subdivisions, record, &mut evaluations)?;
            total += e.value;
            error += e.error;
            rule.extend(r);
            Ok((
                Estimate {
                    value: total,
                    error,
                    evaluations,
                },
                QuadratureRule { nodes: rule },
            ))
        }
    }
}

/// `∫_region f dσ`.
pub fn integrate_disc<F: FnMut(DiscPoint) -> f64>(
    f: F,
    region: &Region,
    q: &Quadrature,
) -> Result<Estimate, QuadratureError> {
    integrate_region(f, region, q, false).map(|r| r.0)
}

/// Like [`integrate_disc`], also returning the product rule of the final
/// subdivision.
pub fn integrate_disc_with_rule<F: FnMut(DiscPoint) -> f64>(
    f: F,
    region: &Region,
    q: &Quadrature,
) -> Result<(Estimate, QuadratureRule), QuadratureError> {
    integrate_region(f, region, q, true)
}
