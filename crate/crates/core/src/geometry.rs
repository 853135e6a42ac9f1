//! Kobayashi geometry of the unit ball: distances, metric balls, ball
//! volumes, boundary-distance comparability and covering lattices.
//!
//! The domain is always the open unit ball of C^n (the disk when n = 1).
//! The Kobayashi ball of parameter `r` in `(0,1)` is the sublevel set
//! `{w : rho(z, w) < r}` of the pseudo-hyperbolic distance
//! `rho(z, w) = |phi_z(w)|`, where `phi_z` is the Moebius involution
//! exchanging `z` and the origin; the corresponding metric radius is
//! `atanh(r) = (1/2) log((1+r)/(1-r))`.

use crate::error::{Error, Result};
use crate::numeric::{ball_lebesgue_volume, gauss_legendre_on};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Which power of the boundary distance weights carry.
///
/// `Smooth` uses `1 - |z|^2` (the weight for which the ball has exact
/// reproducing kernels); `Euclidean` uses `1 - |z|`. The two are comparable
/// with ratio in `[1, 2]`, so every exponent fit is invariant to the choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum WeightConvention {
    #[default]
    Smooth,
    Euclidean,
}

/// A point of the ball: `n` complex coordinates with `|z| < 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    coords: Vec<Complex64>,
}

impl Point {
    pub fn new(coords: Vec<Complex64>) -> Self {
        Point { coords }
    }

    /// Point of the unit disk.
    pub fn disk(re: f64, im: f64) -> Self {
        Point {
            coords: vec![Complex64::new(re, im)],
        }
    }

    pub fn origin(n: usize) -> Self {
        Point {
            coords: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.coords
    }

    pub fn norm_sq(&self) -> f64 {
        self.coords.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn abs(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Hermitian inner product `<z, w> = sum z_i conj(w_i)`.
    pub fn inner(&self, other: &Point) -> Complex64 {
        inner(&self.coords, &other.coords)
    }

    /// Disk coordinate, valid when `n = 1`.
    pub fn as_complex(&self) -> Complex64 {
        self.coords[0]
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{:+.6}{:+.6}i", c.re, c.im)?;
        }
        write!(f, ")")
    }
}

pub(crate) fn inner(z: &[Complex64], w: &[Complex64]) -> Complex64 {
    z.iter().zip(w).map(|(a, b)| a * b.conj()).sum()
}

pub(crate) fn norm_sq(z: &[Complex64]) -> f64 {
    z.iter().map(|c| c.norm_sqr()).sum()
}

/// The model domain: the unit ball of C^n with a weight convention.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelDomain {
    n: usize,
    weight: WeightConvention,
}

impl ModelDomain {
    pub fn ball(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::parameter("dimension n must be >= 1"));
        }
        Ok(ModelDomain {
            n,
            weight: WeightConvention::Smooth,
        })
    }

    /// The unit disk with the smooth weight.
    pub fn disk() -> Self {
        ModelDomain {
            n: 1,
            weight: WeightConvention::Smooth,
        }
    }

    pub fn with_weight(mut self, weight: WeightConvention) -> Self {
        self.weight = weight;
        self
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn weight_convention(&self) -> WeightConvention {
        self.weight
    }

    pub fn lebesgue_volume(&self) -> f64 {
        ball_lebesgue_volume(self.n)
    }

    pub fn check_point(&self, z: &Point) -> Result<()> {
        if z.dim() != self.n {
            return Err(Error::parameter(format!(
                "point has dimension {}, domain has dimension {}",
                z.dim(),
                self.n
            )));
        }
        let norm = z.abs();
        if norm >= 1.0 {
            return Err(Error::OutsideDomain { norm });
        }
        Ok(())
    }

    /// Distance from the boundary under the domain's weight convention.
    pub fn boundary_distance(&self, z: &Point) -> Result<f64> {
        self.check_point(z)?;
        Ok(match self.weight {
            WeightConvention::Smooth => 1.0 - z.norm_sq(),
            WeightConvention::Euclidean => 1.0 - z.abs(),
        })
    }

    /// `1 - |z|^2`, regardless of convention.
    pub fn smooth_delta(&self, z: &Point) -> f64 {
        1.0 - z.norm_sq()
    }

    /// `1 - |z|`, regardless of convention.
    pub fn euclidean_delta(&self, z: &Point) -> f64 {
        1.0 - z.abs()
    }

    /// Pseudo-hyperbolic distance `rho(z, w) = |phi_z(w)|`.
    pub fn pseudo_hyperbolic(&self, z: &Point, w: &Point) -> Result<f64> {
        self.check_point(z)?;
        self.check_point(w)?;
        Ok(pseudo_hyperbolic_raw(z.coords(), w.coords()))
    }

    /// Kobayashi distance `atanh(rho(z, w))`.
    pub fn kobayashi_distance(&self, z: &Point, w: &Point) -> Result<f64> {
        let rho = self.pseudo_hyperbolic(z, w)?;
        Ok(rho.atanh())
    }

    /// The Moebius involution `phi_a` with `phi_a(0) = a`, `phi_a(a) = 0`.
    pub fn mobius(&self, a: &Point, z: &Point) -> Result<Point> {
        self.check_point(a)?;
        self.check_point(z)?;
        Ok(Point::new(mobius_raw(a.coords(), z.coords())))
    }

    /// Point on the `e_1` ray with prescribed boundary distance.
    pub fn radial_point(&self, delta: f64) -> Result<Point> {
        if delta <= 0.0 || delta > 1.0 {
            return Err(Error::parameter(format!(
                "boundary distance must lie in (0, 1], got {delta}"
            )));
        }
        let radius = match self.weight {
            WeightConvention::Smooth => (1.0 - delta).max(0.0).sqrt(),
            WeightConvention::Euclidean => 1.0 - delta,
        };
        let mut coords = vec![Complex64::new(0.0, 0.0); self.n];
        coords[0] = Complex64::new(radius, 0.0);
        Ok(Point::new(coords))
    }

    /// Geometric grid of points on the `e_1` ray with `delta` spanning
    /// `[deep, shallow]`.
    pub fn boundary_grid(&self, deep: f64, shallow: f64, count: usize) -> Result<Vec<Point>> {
        crate::fit::log_grid(deep, shallow, count)
            .into_iter()
            .map(|d| self.radial_point(d))
            .collect()
    }

    /// Euclidean radius of the truncation `{delta >= eps}`.
    pub fn truncation_radius(&self, eps: f64) -> f64 {
        match self.weight {
            WeightConvention::Smooth => (1.0 - eps).max(0.0).sqrt(),
            WeightConvention::Euclidean => 1.0 - eps,
        }
    }
}

pub(crate) fn pseudo_hyperbolic_raw(z: &[Complex64], w: &[Complex64]) -> f64 {
    let ip = inner(z, w);
    let denom = (Complex64::new(1.0, 0.0) - ip).norm_sqr();
    let ratio = (1.0 - norm_sq(z)) * (1.0 - norm_sq(w)) / denom;
    (1.0 - ratio).max(0.0).sqrt()
}

pub(crate) fn mobius_raw(a: &[Complex64], z: &[Complex64]) -> Vec<Complex64> {
    let a_sq = norm_sq(a);
    if a_sq == 0.0 {
        return z.iter().map(|c| -c).collect();
    }
    let ip = inner(z, a);
    let s = (1.0 - a_sq).sqrt();
    let scale = ip / a_sq;
    let denom = Complex64::new(1.0, 0.0) - ip;
    a.iter()
        .zip(z)
        .map(|(ai, zi)| {
            let p = scale * ai; // projection of z on the a-line
            let q = zi - p;
            (ai - p - s * q) / denom
        })
        .collect()
}

/// Real Jacobian of `phi_c` at `v`: `((1-|c|^2)/|1-<v,c>|^2)^(n+1)`.
pub(crate) fn mobius_jacobian(c: &[Complex64], v: &[Complex64]) -> f64 {
    let n = c.len();
    let denom = (Complex64::new(1.0, 0.0) - inner(v, c)).norm_sqr();
    ((1.0 - norm_sq(c)) / denom).powi(n as i32 + 1)
}

/// Kobayashi ball `B_D(center, r)` of pseudo-hyperbolic parameter `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct KobayashiBall {
    pub center: Point,
    pub radius_param: f64,
}

impl KobayashiBall {
    pub fn new(domain: &ModelDomain, center: Point, radius_param: f64) -> Result<Self> {
        domain.check_point(&center)?;
        if !(0.0..1.0).contains(&radius_param) || radius_param <= 0.0 {
            return Err(Error::parameter(format!(
                "ball radius parameter must lie in (0, 1), got {radius_param}"
            )));
        }
        Ok(KobayashiBall {
            center,
            radius_param,
        })
    }

    /// The metric radius `atanh(r)`.
    pub fn kobayashi_radius(&self) -> f64 {
        self.radius_param.atanh()
    }

    pub fn contains(&self, domain: &ModelDomain, z: &Point) -> Result<bool> {
        Ok(domain.pseudo_hyperbolic(&self.center, z)? < self.radius_param)
    }

    /// Lebesgue volume, exact: the ball is the ellipsoid `phi_a(rB)` with
    /// volume `(pi^n/n!) r^(2n) ((1-|a|^2)/(1-r^2|a|^2))^(n+1)`.
    pub fn lebesgue_volume(&self, domain: &ModelDomain) -> f64 {
        let a_sq = self.center.norm_sq();
        let r = self.radius_param;
        let rho_tilde = (1.0 - a_sq) / (1.0 - r * r * a_sq);
        let n = domain.dim();
        ball_lebesgue_volume(n) * r.powi(2 * n as i32) * rho_tilde.powi(n as i32 + 1)
    }

    /// Euclidean ellipsoid realization: center, semi-axis along the center
    /// direction, semi-axis in the orthogonal complex directions, and an
    /// orthonormal frame whose first vector is the center direction.
    pub fn ellipsoid(&self, domain: &ModelDomain) -> Ellipsoid {
        let a_sq = self.center.norm_sq();
        let r = self.radius_param;
        let denom = 1.0 - r * r * a_sq;
        let rho_tilde = (1.0 - a_sq) / denom;
        let scale = (1.0 - r * r) / denom;
        let center: Vec<Complex64> = self.center.coords().iter().map(|c| c * scale).collect();
        let frame = unitary_frame(self.center.coords(), domain.dim());
        Ellipsoid {
            center,
            axis_radial: r * rho_tilde,
            axis_tangent: r * rho_tilde.sqrt(),
            frame,
        }
    }
}

/// Euclidean realization of a Kobayashi ball.
#[derive(Debug, Clone)]
pub struct Ellipsoid {
    pub center: Vec<Complex64>,
    /// Semi-axis in the complex line through the center direction.
    pub axis_radial: f64,
    /// Semi-axis in each orthogonal complex direction.
    pub axis_tangent: f64,
    /// Orthonormal basis, first vector pointing along the center.
    pub frame: Vec<Vec<Complex64>>,
}

impl Ellipsoid {
    /// Map a point of the unit ball of C^n onto the ellipsoid.
    pub fn map(&self, u: &[Complex64]) -> Vec<Complex64> {
        let n = self.frame.len();
        let mut out = self.center.clone();
        for (j, base) in self.frame.iter().enumerate() {
            let axis = if j == 0 {
                self.axis_radial
            } else {
                self.axis_tangent
            };
            for i in 0..n {
                out[i] += axis * u[j] * base[i];
            }
        }
        out
    }
}

/// Orthonormal complex frame with first vector along `direction`
/// (canonical basis when the direction vanishes).
pub(crate) fn unitary_frame(direction: &[Complex64], n: usize) -> Vec<Vec<Complex64>> {
    let mut frame: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    let norm = norm_sq(direction).sqrt();
    if norm > 1e-14 {
        frame.push(direction.iter().map(|c| c / norm).collect());
    }
    let mut k = 0;
    while frame.len() < n {
        let mut cand = vec![Complex64::new(0.0, 0.0); n];
        cand[k] = Complex64::new(1.0, 0.0);
        k += 1;
        for b in &frame {
            let proj = inner(&cand, b);
            for i in 0..n {
                cand[i] -= proj * b[i];
            }
        }
        let cn = norm_sq(&cand).sqrt();
        if cn > 1e-7 {
            for c in cand.iter_mut() {
                *c /= cn;
            }
            frame.push(cand);
        }
    }
    frame
}

/// Weighted volume `nu_beta(B) = int_B (1-|w|^2)^beta dnu(w)`.
///
/// Exact closed form for `beta = 0`; otherwise the integral is pulled back
/// by `phi_a` onto the fixed ball `|v| < r`, where the integrand
/// `(1-|v|^2)^beta |1 - <v,a>|^(-2(n+1+beta))` is smooth, and integrated by
/// a tensor rule. The `delta^(n+1+beta)` scaling is explicit in the
/// prefactor `(1-|a|^2)^(n+1+beta)`.
pub fn ball_volume(domain: &ModelDomain, ball: &KobayashiBall, beta: f64) -> Result<f64> {
    if beta <= -1.0 {
        return Err(Error::parameter(format!(
            "weight exponent must satisfy beta > -1, got {beta}"
        )));
    }
    if beta == 0.0 {
        return Ok(ball.lebesgue_volume(domain));
    }
    ball_volume_quadrature(domain, ball, beta)
}

/// The same integral always through the pulled-back quadrature, including
/// `beta = 0`; the independent deterministic route against the closed form.
pub fn ball_volume_quadrature(
    domain: &ModelDomain,
    ball: &KobayashiBall,
    beta: f64,
) -> Result<f64> {
    if beta <= -1.0 {
        return Err(Error::parameter(format!(
            "weight exponent must satisfy beta > -1, got {beta}"
        )));
    }
    let a_sq = ball.center.norm_sq();
    let a_abs = a_sq.sqrt();
    let r = ball.radius_param;
    let n = domain.dim();
    let exponent = (n as f64) + 1.0 + beta;
    let prefactor = (1.0 - a_sq).powf(exponent);
    let reduced = if n == 1 {
        pulled_back_disk_integral(a_abs, r, beta, exponent)
    } else {
        pulled_back_ball_integral(n, a_abs, r, beta, exponent)
    };
    Ok(prefactor * reduced)
}

/// `int_{|v|<r} (1-|v|^2)^beta |1 - s v|^{-2e} dnu(v)` on the disk, with
/// `s = |a|` (the angular average only sees `|a|`).
fn pulled_back_disk_integral(s: f64, r: f64, beta: f64, e: f64) -> f64 {
    let n_radial = 96;
    let n_angular = ((60.0 / (1.0 - s * r)).ceil() as usize).clamp(128, 16384);
    let (ts, tw) = gauss_legendre_on(n_radial, 0.0, r * r);
    let dtheta = 2.0 * std::f64::consts::PI / n_angular as f64;
    let mut total = 0.0;
    for (t, wt) in ts.iter().zip(&tw) {
        let rho = t.sqrt();
        let radial = (1.0 - t).powf(beta) * 0.5 * wt;
        let mut ang = 0.0;
        for j in 0..n_angular {
            let theta = dtheta * (j as f64 + 0.5);
            let d = Complex64::new(1.0 - s * rho * theta.cos(), -s * rho * theta.sin());
            ang += d.norm_sqr().powf(-e);
        }
        total += radial * ang * dtheta;
    }
    total
}

/// Same pulled-back integral for `n >= 2`, reduced by unitary invariance to
/// the coordinates `(v_1, |v_perp|)`.
fn pulled_back_ball_integral(n: usize, s: f64, r: f64, beta: f64, e: f64) -> f64 {
    // surface of S^(2n-3) in C^(n-1): 2 pi^(n-1) / (n-2)!
    let nf = n as f64;
    let sphere_factor =
        2.0 * (((nf - 1.0) * std::f64::consts::PI.ln()) - crate::numeric::lngamma(nf - 1.0)).exp();
    let n_radial = 48;
    let n_angular = ((40.0 / (1.0 - s * r)).ceil() as usize).clamp(96, 8192);
    let n_inner = 32;
    let (ts, tw) = gauss_legendre_on(n_radial, 0.0, r * r);
    let dtheta = 2.0 * std::f64::consts::PI / n_angular as f64;
    let mut total = 0.0;
    for (t, wt) in ts.iter().zip(&tw) {
        let rho = t.sqrt();
        let cap = r * r - t;
        // inner integral over q = |v_perp|^2
        let (qs, qw) = gauss_legendre_on(n_inner, 0.0, cap);
        let mut ang = 0.0;
        for j in 0..n_angular {
            let theta = dtheta * (j as f64 + 0.5);
            let d = Complex64::new(1.0 - s * rho * theta.cos(), -s * rho * theta.sin());
            let kern = d.norm_sqr().powf(-e);
            let mut inner_acc = 0.0;
            for (q, wq) in qs.iter().zip(&qw) {
                inner_acc += (1.0 - t - q).powf(beta) * q.powi(n as i32 - 2) * 0.5 * wq;
            }
            ang += kern * inner_acc;
        }
        total += 0.5 * wt * ang * dtheta;
    }
    total * sphere_factor
}

/// Extremes of `delta(z)/delta(z0)` over points sampled uniformly from the
/// Euclidean ellipsoid realization of `B_D(z0, r)`.
pub fn delta_comparability_check(
    domain: &ModelDomain,
    z0: &Point,
    r: f64,
    samples: usize,
) -> Result<(f64, f64)> {
    if samples == 0 {
        return Err(Error::parameter("samples must be >= 1"));
    }
    let ball = KobayashiBall::new(domain, z0.clone(), r)?;
    let ellipsoid = ball.ellipsoid(domain);
    let delta0 = domain.boundary_distance(z0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED_0001 ^ samples as u64);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for _ in 0..samples {
        let u = sample_unit_ball(domain.dim(), &mut rng);
        let z = Point::new(ellipsoid.map(&u));
        let ratio = domain.boundary_distance(&z)? / delta0;
        lo = lo.min(ratio);
        hi = hi.max(ratio);
    }
    Ok((lo, hi))
}

/// Uniform sample from the unit ball of C^n (real dimension 2n).
pub(crate) fn sample_unit_ball(n: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    loop {
        let mut v = Vec::with_capacity(n);
        let mut sq = 0.0;
        for _ in 0..n {
            // Box-Muller pairs give the direction; radius by inverse cdf.
            let u1: f64 = rng.gen::<f64>().max(1e-300);
            let u2: f64 = rng.gen();
            let mag = (-2.0 * u1.ln()).sqrt();
            let c = Complex64::new(
                mag * (2.0 * std::f64::consts::PI * u2).cos(),
                mag * (2.0 * std::f64::consts::PI * u2).sin(),
            );
            sq += c.norm_sqr();
            v.push(c);
        }
        if sq <= 0.0 {
            continue;
        }
        let norm = sq.sqrt();
        let radius: f64 = rng.gen::<f64>().powf(1.0 / (2.0 * n as f64));
        for c in v.iter_mut() {
            *c *= radius / norm;
        }
        return v;
    }
}

/// An `r`-lattice for the truncated domain `{delta >= eps}`.
#[derive(Debug, Clone)]
pub struct Lattice {
    pub centers: Vec<Point>,
    pub r: f64,
    /// Maximum observed number of balls `B(a_k, R)`, `R = (1+r)/2`, meeting
    /// a sample point.
    pub overlap_bound: usize,
    pub boundary_cutoff: f64,
    /// Minimum pairwise pseudo-hyperbolic separation of the centers.
    pub separation: f64,
}

/// Default cap on the candidate-grid size.
pub const LATTICE_GRID_CAP: usize = 6_000_000;

/// Greedy farthest-point lattice over a boundary-graded candidate grid,
/// followed by a pruning pass that drops redundant centers.
///
/// Candidates form an `h`-net of the truncation in the pseudo-hyperbolic
/// metric (`h = r/40`, coarsened only to respect the grid budget); greedy
/// selection stops once every candidate is within `r - h` of a center.
/// Since `rho(x, c) <= (rho1 + rho2)/(1 + rho1 rho2) < r` whenever
/// `rho1 <= h` and `rho2 <= r - h`, every point of the truncation — not
/// only the grid — then lies strictly inside some `B(a_k, r)`. Ties break
/// toward the lowest grid index.
pub fn build_lattice(domain: &ModelDomain, r: f64, eps: f64) -> Result<Lattice> {
    if !(0.0 < r && r < 1.0) {
        return Err(Error::parameter(format!(
            "lattice r must be in (0,1), got {r}"
        )));
    }
    if !(0.0 < eps && eps < 1.0) {
        return Err(Error::parameter(format!(
            "truncation eps must be in (0, 1), got {eps}"
        )));
    }
    let eps_smooth = match domain.weight_convention() {
        WeightConvention::Smooth => eps,
        WeightConvention::Euclidean => eps * (2.0 - eps),
    };
    // Grid cost is ~ (pi/h^2)(1/eps) candidates times ~13/eps centers;
    // coarsen h once that product would exceed the work budget. The
    // covering guarantee holds for any h; only the center count inflates,
    // by roughly (r/(r-h))^2.
    let work_budget = 2e8;
    let budget_h = (13.0 * std::f64::consts::PI / (work_budget * eps_smooth * eps_smooth)).sqrt();
    let h = (r / 40.0).max(budget_h).min(r / 4.0);
    let grid = candidate_grid(domain, eps, h)?;
    let stop = r - h;

    // Gonzalez sweep: track distance to the nearest selected center.
    let mut dist: Vec<f64> = Vec::with_capacity(grid.len());
    let first = &grid[0];
    for g in &grid {
        dist.push(pseudo_hyperbolic_raw(first, g));
    }
    let mut centers: Vec<usize> = vec![0];
    let mut separation = f64::INFINITY;
    loop {
        let (mut best_i, mut best_d) = (0usize, -1.0);
        for (i, d) in dist.iter().enumerate() {
            if *d > best_d {
                best_d = *d;
                best_i = i;
            }
        }
        if best_d < stop {
            break;
        }
        separation = separation.min(best_d);
        centers.push(best_i);
        let newest = &grid[best_i];
        for (i, d) in dist.iter_mut().enumerate() {
            let nd = pseudo_hyperbolic_raw(newest, &grid[i]);
            if nd < *d {
                *d = nd;
            }
        }
    }
    if centers.len() == 1 {
        separation = f64::INFINITY;
    }

    // Prune: drop (newest first) any center whose grid points stay covered
    // within `stop` by the others. Greedy overshoots the optimal covering;
    // this recovers most of the excess while keeping the guarantee.
    if centers.len() > 1 {
        let mut cover_count: Vec<u32> = vec![0; grid.len()];
        for &k in &centers {
            let c = &grid[k];
            for (i, g) in grid.iter().enumerate() {
                if pseudo_hyperbolic_raw(c, g) < stop {
                    cover_count[i] += 1;
                }
            }
        }
        let mut kept: Vec<bool> = vec![true; centers.len()];
        for ci in (0..centers.len()).rev() {
            if centers.len() - kept.iter().filter(|k| !*k).count() == 1 {
                break;
            }
            let c = &grid[centers[ci]];
            let mut removable = true;
            let mut touched = Vec::new();
            for (i, g) in grid.iter().enumerate() {
                if pseudo_hyperbolic_raw(c, g) < stop {
                    if cover_count[i] < 2 {
                        removable = false;
                        break;
                    }
                    touched.push(i);
                }
            }
            if removable {
                kept[ci] = false;
                for i in touched {
                    cover_count[i] -= 1;
                }
            }
        }
        centers = centers
            .into_iter()
            .zip(&kept)
            .filter(|(_, k)| **k)
            .map(|(c, _)| c)
            .collect();
    }

    // Overlap bound at R = (1+r)/2, measured on a grid subsample.
    let cap_r = 0.5 * (1.0 + r);
    let stride = (grid.len() / 20_000).max(1);
    let mut overlap = 0usize;
    for g in grid.iter().step_by(stride) {
        let count = centers
            .iter()
            .filter(|&&k| pseudo_hyperbolic_raw(&grid[k], g) < cap_r)
            .count();
        overlap = overlap.max(count);
    }

    Ok(Lattice {
        centers: centers
            .into_iter()
            .map(|k| Point::new(grid[k].clone()))
            .collect(),
        r,
        overlap_bound: overlap.max(1),
        boundary_cutoff: eps,
        separation,
    })
}

/// Pseudo-hyperbolic `h`-net of the truncated domain, ordered inside out.
fn candidate_grid(domain: &ModelDomain, eps: f64, h: f64) -> Result<Vec<Vec<Complex64>>> {
    let r_max = domain.truncation_radius(eps);
    if domain.dim() == 1 {
        let mut grid: Vec<Vec<Complex64>> = vec![vec![Complex64::new(0.0, 0.0)]];
        let mut x = 0.0f64;
        loop {
            // next radius at pseudo-hyperbolic step h, clamped to the rim
            let next = (x + h) / (1.0 + h * x);
            x = if next >= r_max { r_max } else { next };
            let m = ((2.0 * std::f64::consts::PI * x / (h * (1.0 - x * x))).ceil() as usize).max(4);
            if grid.len() + m > LATTICE_GRID_CAP {
                return Err(Error::Resource(format!(
                    "lattice candidate grid for eps = {eps} exceeds {LATTICE_GRID_CAP} points; \
                     increase eps or the grid cap"
                )));
            }
            for j in 0..m {
                let theta = 2.0 * std::f64::consts::PI * j as f64 / m as f64;
                grid.push(vec![Complex64::from_polar(x, theta)]);
            }
            if x >= r_max {
                break;
            }
        }
        Ok(grid)
    } else {
        // Randomized net: hyperbolic-volume-weighted sample, thinned by the
        // greedy pass itself. Sized by the same volume heuristic as n = 1.
        let n = domain.dim();
        let volume_scale = (1.0 / eps).powi(n as i32) * (4.0 / h).powi(2 * n as i32 - 1);
        let count = (volume_scale.ceil() as usize).clamp(4_096, 600_000);
        if count >= LATTICE_GRID_CAP {
            return Err(Error::Resource(format!(
                "lattice sample for n = {n}, eps = {eps} exceeds {LATTICE_GRID_CAP} points; \
                 increase eps"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0x5EED_1A77);
        let mut grid = vec![vec![Complex64::new(0.0, 0.0); n]];
        while grid.len() < count {
            let u = sample_unit_ball(n, &mut rng);
            let p: Vec<Complex64> = u.iter().map(|c| c * r_max).collect();
            grid.push(p);
        }
        Ok(grid)
    }
}

/// Empirical covering/overlap check of a lattice on an independent sample.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LatticeCheck {
    pub covered_fraction: f64,
    pub max_overlap: usize,
    pub samples: usize,
}

pub fn verify_lattice(
    domain: &ModelDomain,
    lattice: &Lattice,
    samples: usize,
    seed: u64,
) -> Result<LatticeCheck> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r_max = domain.truncation_radius(lattice.boundary_cutoff);
    let cap_r = 0.5 * (1.0 + lattice.r);
    let mut covered = 0usize;
    let mut max_overlap = 0usize;
    for _ in 0..samples {
        let u = sample_unit_ball(domain.dim(), &mut rng);
        let z: Vec<Complex64> = u.iter().map(|c| c * r_max).collect();
        let mut hit = false;
        let mut overlap = 0usize;
        for c in &lattice.centers {
            let rho = pseudo_hyperbolic_raw(c.coords(), &z);
            if rho < lattice.r {
                hit = true;
            }
            if rho < cap_r {
                overlap += 1;
            }
        }
        if hit {
            covered += 1;
        }
        max_overlap = max_overlap.max(overlap);
    }
    Ok(LatticeCheck {
        covered_fraction: covered as f64 / samples as f64,
        max_overlap,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn boundary_distance_conventions() {
        let disk = ModelDomain::disk();
        let z = Point::disk(0.9, 0.0);
        assert_relative_eq!(disk.boundary_distance(&Point::origin(1)).unwrap(), 1.0);
        assert_relative_eq!(disk.smooth_delta(&z), 0.19, epsilon = 1e-15);
        let euclid = ModelDomain::disk().with_weight(WeightConvention::Euclidean);
        assert_relative_eq!(euclid.boundary_distance(&z).unwrap(), 0.1, epsilon = 1e-15);
        // smooth/euclidean ratio in [1, 2]
        for x in [0.0, 0.3, 0.77, 0.999] {
            let p = Point::disk(x, 0.0);
            let ratio = disk.smooth_delta(&p) / disk.euclidean_delta(&p);
            assert!((1.0..=2.0).contains(&ratio));
        }
    }

    #[test]
    fn rejects_outside_points() {
        let disk = ModelDomain::disk();
        assert!(matches!(
            disk.boundary_distance(&Point::disk(1.0, 0.0)),
            Err(Error::OutsideDomain { .. })
        ));
        assert!(disk.kobayashi_distance(&Point::disk(1.2, 0.0), &Point::origin(1)).is_err());
    }

    #[test]
    fn kobayashi_distance_disk_values() {
        let disk = ModelDomain::disk();
        let d = disk
            .kobayashi_distance(&Point::origin(1), &Point::disk(0.5, 0.0))
            .unwrap();
        assert_relative_eq!(d, 0.5 * 3.0f64.ln(), epsilon = 1e-14);
        let z = Point::disk(0.37, -0.11);
        assert_relative_eq!(disk.kobayashi_distance(&z, &z).unwrap(), 0.0);
    }

    #[test]
    fn kobayashi_distance_matches_metric_length_oracle() {
        // For real 0 < x < y the geodesic is the segment; integrate
        // 1/(1 - t^2) along it with an independent rule.
        let disk = ModelDomain::disk();
        let (x, y) = (0.3, 0.6);
        let (ts, ws) = gauss_legendre_on(64, x, y);
        let oracle: f64 = ts.iter().zip(&ws).map(|(t, w)| w / (1.0 - t * t)).sum();
        let d = disk
            .kobayashi_distance(&Point::disk(x, 0.0), &Point::disk(y, 0.0))
            .unwrap();
        assert_relative_eq!(d, oracle, epsilon = 1e-12);
        assert_relative_eq!(d, 0.3836275763568335, epsilon = 1e-12);
    }

    #[test]
    fn mobius_basics() {
        let ball = ModelDomain::ball(2).unwrap();
        let a = Point::new(vec![c(0.4, 0.1), c(-0.2, 0.3)]);
        let z = Point::new(vec![c(0.1, -0.5), c(0.0, 0.2)]);
        let phi_a_a = ball.mobius(&a, &a).unwrap();
        assert!(phi_a_a.abs() < 1e-14);
        let phi_a_0 = ball.mobius(&a, &Point::origin(2)).unwrap();
        for (u, v) in phi_a_0.coords().iter().zip(a.coords()) {
            assert_relative_eq!(u.re, v.re, epsilon = 1e-14);
            assert_relative_eq!(u.im, v.im, epsilon = 1e-14);
        }
        // involution
        let back = ball.mobius(&a, &ball.mobius(&a, &z).unwrap()).unwrap();
        for (u, v) in back.coords().iter().zip(z.coords()) {
            assert_relative_eq!(u.re, v.re, epsilon = 1e-13);
            assert_relative_eq!(u.im, v.im, epsilon = 1e-13);
        }
        // 1 - |phi_a(z)|^2 identity
        let phi = ball.mobius(&a, &z).unwrap();
        let lhs = 1.0 - phi.norm_sq();
        let rhs = (1.0 - a.norm_sq()) * (1.0 - z.norm_sq())
            / (Complex64::new(1.0, 0.0) - z.inner(&a)).norm_sqr();
        assert_relative_eq!(lhs, rhs, epsilon = 1e-13);
    }

    #[test]
    fn mobius_invariance_of_distance() {
        let ball = ModelDomain::ball(3).unwrap();
        let a = Point::new(vec![c(0.2, 0.1), c(0.0, -0.4), c(0.3, 0.0)]);
        let z = Point::new(vec![c(-0.1, 0.2), c(0.25, 0.05), c(0.0, -0.3)]);
        let w = Point::new(vec![c(0.5, 0.0), c(-0.05, -0.1), c(0.1, 0.1)]);
        let before = ball.kobayashi_distance(&z, &w).unwrap();
        let after = ball
            .kobayashi_distance(&ball.mobius(&a, &z).unwrap(), &ball.mobius(&a, &w).unwrap())
            .unwrap();
        assert_relative_eq!(before, after, epsilon = 1e-12);
    }

    #[test]
    fn ball_volume_disk_closed_form() {
        let disk = ModelDomain::disk();
        let b0 = KobayashiBall::new(&disk, Point::origin(1), 0.5).unwrap();
        assert_relative_eq!(
            ball_volume(&disk, &b0, 0.0).unwrap(),
            std::f64::consts::PI / 4.0,
            epsilon = 1e-14
        );
        let b9 = KobayashiBall::new(&disk, Point::disk(0.9, 0.0), 0.5).unwrap();
        let v = ball_volume(&disk, &b9, 0.0).unwrap();
        let exact = std::f64::consts::PI * 0.25 * 0.19f64.powi(2) / (1.0f64 - 0.25 * 0.81).powi(2);
        assert_relative_eq!(v, exact, epsilon = 1e-14);
        assert_relative_eq!(v, 0.04458, epsilon = 1e-4);
    }

    #[test]
    fn weighted_ball_volume_at_origin_matches_radial_integral() {
        // nu_beta(B(0,r)) = 2 pi int_0^r (1-t^2)^beta t dt, independent route
        let disk = ModelDomain::disk();
        let beta = 1.5;
        let r = 0.6;
        let ball = KobayashiBall::new(&disk, Point::origin(1), r).unwrap();
        let v = ball_volume(&disk, &ball, beta).unwrap();
        let exact = std::f64::consts::PI * (1.0 - (1.0 - r * r).powf(beta + 1.0)) / (beta + 1.0);
        assert_relative_eq!(v, exact, epsilon = 1e-10);
    }

    #[test]
    fn weighted_ball_volume_dimension_two() {
        // reduced 3D quadrature vs the Monte Carlo membership oracle
        let ball2 = ModelDomain::ball(2).unwrap();
        let center = Point::new(vec![c(0.55, 0.0), c(0.0, 0.0)]);
        let kball = KobayashiBall::new(&ball2, center.clone(), 0.5).unwrap();
        let beta = 1.0;
        let v = ball_volume(&ball2, &kball, beta).unwrap();
        let (mc, se) = crate::quadrature::monte_carlo_oracle(&ball2, beta, 400_000, 17, |z| {
            if pseudo_hyperbolic_raw(center.coords(), z) < 0.5 {
                1.0
            } else {
                0.0
            }
        })
        .unwrap();
        assert!((v - mc).abs() <= 3.0 * se, "{v} vs {mc} +- {se}");
        // beta = 0 closed form agrees with the quadrature route
        let closed = kball.lebesgue_volume(&ball2);
        let quad = ball_volume_quadrature(&ball2, &kball, 0.0).unwrap();
        assert_relative_eq!(closed, quad, max_relative = 1e-9);
    }

    #[test]
    fn ball_volume_rejects_bad_beta() {
        let disk = ModelDomain::disk();
        let b = KobayashiBall::new(&disk, Point::origin(1), 0.5).unwrap();
        assert!(ball_volume(&disk, &b, -1.0).is_err());
    }

    #[test]
    fn delta_comparability_examples() {
        let disk = ModelDomain::disk().with_weight(WeightConvention::Euclidean);
        let (lo, hi) = delta_comparability_check(&disk, &Point::origin(1), 0.5, 4000).unwrap();
        assert!(lo >= 0.5 - 1e-9, "lo = {lo}");
        assert!(hi <= 1.0 + 1e-9, "hi = {hi}");
        let z0 = Point::disk(0.99, 0.0);
        let (lo, hi) = delta_comparability_check(&disk, &z0, 0.5, 20000).unwrap();
        assert!(hi / lo <= 9.01, "ratio = {}", hi / lo);
        // degenerate ball: both ratios -> 1
        let (lo, hi) = delta_comparability_check(&disk, &z0, 1e-4, 500).unwrap();
        assert!(lo > 0.999 && hi < 1.001);
    }

    #[test]
    fn lattice_small_truncation() {
        let disk = ModelDomain::disk();
        let lat = build_lattice(&disk, 0.5, 0.5).unwrap();
        assert!(lat.centers.len() <= 16, "count = {}", lat.centers.len());
        assert!(lat.overlap_bound >= 1);
        for a in &lat.centers {
            assert!(disk.boundary_distance(a).unwrap() >= 0.5 - 1e-12);
        }
        let check = verify_lattice(&disk, &lat, 20_000, 7).unwrap();
        assert_eq!(check.covered_fraction, 1.0);
    }

    #[test]
    fn lattice_single_center_for_huge_radius() {
        let disk = ModelDomain::disk();
        let lat = build_lattice(&disk, 0.99, 0.3).unwrap();
        assert_eq!(lat.centers.len(), 1);
        let check = verify_lattice(&disk, &lat, 5_000, 3).unwrap();
        assert_eq!(check.covered_fraction, 1.0);
    }

    #[test]
    fn lattice_covering_and_overlap() {
        let disk = ModelDomain::disk();
        let lat = build_lattice(&disk, 0.5, 0.05).unwrap();
        let check = verify_lattice(&disk, &lat, 50_000, 11).unwrap();
        assert_eq!(check.covered_fraction, 1.0, "covering failed");
        assert!(check.max_overlap <= 64, "overlap = {}", check.max_overlap);
        assert!(lat.separation >= lat.r / 2.0);
    }

    #[test]
    fn ellipsoid_sampling_stays_in_ball() {
        let disk = ModelDomain::disk();
        let center = Point::disk(0.8, 0.3);
        let ball = KobayashiBall::new(&disk, center.clone(), 0.4).unwrap();
        let ell = ball.ellipsoid(&disk);
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..2000 {
            let u = sample_unit_ball(1, &mut rng);
            let z = Point::new(ell.map(&u));
            assert!(ball.contains(&disk, &z).unwrap());
        }
    }
}
