//! Finite positive Borel measures and their skew-Carleson diagnostics.
//!
//! A measure is one of
//!
//! * `atomic`: finitely many weighted points (the zoo builds geometric
//!   sequences marching to the boundary with weights `delta(a_k)^s`);
//! * `radial_density`: `scale * delta^t dnu` (`t = 0` is Lebesgue);
//! * `lattice_weighted`: atoms at the centers of an `r`-lattice.
//!
//! Boundary behavior (`sup`/`lim` statements over all of `D`) is realized
//! as fitted log-log slopes on a radial grid, with a configurable slope
//! tolerance. For `lambda >= 1` a measure is classified through the sup of
//! `mu_hat_{r,lambda} delta^(-gamma lambda)`; for `lambda < 1` through
//! `L^(1/(1-lambda))` norms on shrinking truncations (where Carleson and
//! vanishing coincide). The lattice and Berezin transforms give the two
//! independent cross-diagnostics.

use crate::error::{Error, Result};
use crate::fit::{fit_power_law, log_grid, PowerLawFit};
use crate::geometry::{self, KobayashiBall, Lattice, ModelDomain, Point, WeightConvention};
use crate::kernels::KernelParams;
use crate::numeric::gauss_legendre_on;
use crate::quadrature::QuadratureRule;
use crate::series::ln_radial_moment;
use serde::{Deserialize, Serialize};

/// Verdict of a boundary-behavior diagnostic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Carleson,
    Vanishing,
    NotCarleson,
    Inconclusive,
}

impl Verdict {
    /// Collapse to the bounded/divergent dichotomy.
    pub fn is_bounded(&self) -> bool {
        matches!(self, Verdict::Carleson | Verdict::Vanishing)
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Verdict::Carleson => "carleson",
            Verdict::Vanishing => "vanishing",
            Verdict::NotCarleson => "not_carleson",
            Verdict::Inconclusive => "inconclusive",
        };
        write!(f, "{s}")
    }
}

/// Parameters of the `(lambda, gamma)`-skew Carleson condition at radius `r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CarlesonParams {
    pub lambda: f64,
    pub gamma: f64,
    pub r: f64,
}

impl CarlesonParams {
    pub fn new(lambda: f64, gamma: f64, r: f64) -> Result<Self> {
        if !(0.0 < r && r < 1.0) {
            return Err(Error::parameter(format!("radius r must be in (0,1), got {r}")));
        }
        if lambda == 0.0 && gamma != 0.0 {
            return Err(Error::parameter(
                "the (0, gamma)-skew condition does not depend on gamma; pass gamma = 0",
            ));
        }
        Ok(CarlesonParams { lambda, gamma, r })
    }

    /// `theta = 1 + gamma/(n+1)`.
    pub fn theta(&self, n: usize) -> f64 {
        1.0 + self.gamma / (n as f64 + 1.0)
    }
}

#[derive(Debug, Clone)]
pub enum MeasureKind {
    Atomic {
        points: Vec<Point>,
        weights: Vec<f64>,
    },
    RadialDensity {
        t: f64,
        scale: f64,
    },
    LatticeWeighted {
        centers: Vec<Point>,
        weights: Vec<f64>,
        r: f64,
    },
}

/// A finite positive Borel measure on the ball.
#[derive(Debug, Clone)]
pub struct Measure {
    kind: MeasureKind,
    total_mass: f64,
    n: usize,
}

impl Measure {
    /// Lebesgue measure.
    pub fn lebesgue(domain: &ModelDomain) -> Self {
        Measure {
            kind: MeasureKind::RadialDensity { t: 0.0, scale: 1.0 },
            total_mass: domain.lebesgue_volume(),
            n: domain.dim(),
        }
    }

    /// `scale * delta^t dnu` under the domain's weight convention
    /// (`scale = 0` is the zero measure).
    pub fn radial_density(domain: &ModelDomain, t: f64, scale: f64) -> Result<Self> {
        if t <= -1.0 {
            return Err(Error::parameter(format!(
                "radial density needs t > -1 for finite mass, got {t}"
            )));
        }
        if scale < 0.0 {
            return Err(Error::parameter("scale must be nonnegative"));
        }
        let total_mass = scale * radial_mass(domain, t);
        Ok(Measure {
            kind: MeasureKind::RadialDensity { t, scale },
            total_mass,
            n: domain.dim(),
        })
    }

    pub fn atomic(domain: &ModelDomain, points: Vec<Point>, weights: Vec<f64>) -> Result<Self> {
        if points.is_empty() || points.len() != weights.len() {
            return Err(Error::parameter(
                "atomic measure needs equally many points and weights, at least one",
            ));
        }
        for p in &points {
            domain.check_point(p)?;
        }
        if weights.iter().any(|w| *w <= 0.0 || !w.is_finite()) {
            return Err(Error::parameter("atom weights must be positive and finite"));
        }
        let total_mass = weights.iter().sum();
        Ok(Measure {
            kind: MeasureKind::Atomic { points, weights },
            total_mass,
            n: domain.dim(),
        })
    }

    /// Atoms at `delta_k = shallow * ratio^k`, `k = 0..count`, marching to
    /// the boundary along `e_1`, with weights `delta(a_k)^weight_exponent`.
    /// Their Carleson status at `(lambda, gamma)` is decided by the sign of
    /// `weight_exponent - (n+1+gamma) lambda`.
    pub fn boundary_atoms(
        domain: &ModelDomain,
        count: usize,
        weight_exponent: f64,
        shallow: f64,
        ratio: f64,
    ) -> Result<Self> {
        if count == 0 || !(0.0 < ratio && ratio < 1.0) || !(0.0 < shallow && shallow < 1.0) {
            return Err(Error::parameter(
                "boundary atoms need count >= 1, shallow in (0,1), ratio in (0,1)",
            ));
        }
        let mut points = Vec::with_capacity(count);
        let mut weights = Vec::with_capacity(count);
        let mut delta = shallow;
        for _ in 0..count {
            let p = domain.radial_point(delta)?;
            weights.push(domain.boundary_distance(&p)?.powf(weight_exponent));
            points.push(p);
            delta *= ratio;
        }
        Self::atomic(domain, points, weights)
    }

    /// Atoms at the centers of a lattice with weights `delta(a_k)^s`.
    pub fn lattice_weighted(
        domain: &ModelDomain,
        lattice: &Lattice,
        weight_exponent: f64,
    ) -> Result<Self> {
        let centers = lattice.centers.clone();
        let mut weights = Vec::with_capacity(centers.len());
        for c in &centers {
            weights.push(domain.boundary_distance(c)?.powf(weight_exponent));
        }
        if centers.is_empty() {
            return Err(Error::parameter("lattice has no centers"));
        }
        let total_mass = weights.iter().sum();
        Ok(Measure {
            kind: MeasureKind::LatticeWeighted {
                centers,
                weights,
                r: lattice.r,
            },
            total_mass,
            n: domain.dim(),
        })
    }

    pub fn kind(&self) -> &MeasureKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if factor <= 0.0 {
            return Err(Error::parameter("scale factor must be positive"));
        }
        // scaling atoms keeps their positivity; the zero measure only
        // exists as a radial density
        let kind = match &self.kind {
            MeasureKind::Atomic { points, weights } => MeasureKind::Atomic {
                points: points.clone(),
                weights: weights.iter().map(|w| w * factor).collect(),
            },
            MeasureKind::RadialDensity { t, scale } => MeasureKind::RadialDensity {
                t: *t,
                scale: scale * factor,
            },
            MeasureKind::LatticeWeighted {
                centers,
                weights,
                r,
            } => MeasureKind::LatticeWeighted {
                centers: centers.clone(),
                weights: weights.iter().map(|w| w * factor).collect(),
                r: *r,
            },
        };
        Ok(Measure {
            kind,
            total_mass: self.total_mass * factor,
            n: self.n,
        })
    }

    /// Atom positions and weights, when the measure is purely atomic.
    pub fn atoms(&self) -> Option<(&[Point], &[f64])> {
        match &self.kind {
            MeasureKind::Atomic { points, weights } => Some((points, weights)),
            MeasureKind::LatticeWeighted {
                centers, weights, ..
            } => Some((centers, weights)),
            MeasureKind::RadialDensity { .. } => None,
        }
    }

    /// `(t, scale)` when the measure is a radial density.
    pub fn radial(&self) -> Option<(f64, f64)> {
        match &self.kind {
            MeasureKind::RadialDensity { t, scale } => Some((*t, *scale)),
            _ => None,
        }
    }
}

/// Mass of `delta^t dnu` under the domain's convention.
fn radial_mass(domain: &ModelDomain, t: f64) -> f64 {
    match domain.weight_convention() {
        WeightConvention::Smooth => ln_radial_moment(domain.dim(), t, 0).exp(),
        WeightConvention::Euclidean => {
            // 2n V_n int_0^1 (1-x)^t x^(2n-1) dx, graded at the x = 1 end
            let n = domain.dim();
            let (xs, ws) = gauss_legendre_on(256, 0.0, 1.0);
            let g = 3.0;
            let mut acc = 0.0;
            for (x, w) in xs.iter().zip(&ws) {
                // substitution 1 - x = (1-u)^g
                let omu = 1.0 - x;
                let xm = 1.0 - omu.powf(g);
                let jac = g * omu.powf(g - 1.0);
                acc += w * jac * omu.powf(g * t) * xm.powi(2 * n as i32 - 1);
            }
            2.0 * n as f64 * crate::numeric::ball_lebesgue_volume(n) * acc
        }
    }
}

/// `mu(B_D(z, r))`: exact sums for atoms, pulled-back quadrature for
/// densities (uniformly accurate in the center depth).
pub fn ball_mass(domain: &ModelDomain, measure: &Measure, ball: &KobayashiBall) -> Result<f64> {
    if measure.dim() != domain.dim() {
        return Err(Error::parameter("measure dimension mismatch"));
    }
    match &measure.kind {
        MeasureKind::Atomic { points, weights }
        | MeasureKind::LatticeWeighted {
            centers: points,
            weights,
            ..
        } => {
            let mut acc = 0.0;
            for (p, w) in points.iter().zip(weights) {
                if ball.contains(domain, p)? {
                    acc += w;
                }
            }
            Ok(acc)
        }
        MeasureKind::RadialDensity { t, scale } => match domain.weight_convention() {
            WeightConvention::Smooth => Ok(scale * geometry::ball_volume(domain, ball, *t)?),
            WeightConvention::Euclidean => Ok(scale * euclidean_ball_mass(domain, ball, *t)),
        },
    }
}

/// `int_B (1-|w|)^t dnu` via the Moebius pullback (disk only needs it;
/// higher dimensions use the smooth convention).
fn euclidean_ball_mass(domain: &ModelDomain, ball: &KobayashiBall, t: f64) -> f64 {
    let a = &ball.center;
    let r = ball.radius_param;
    let n_radial = 64;
    let n_angular = 128;
    let (ts, tw) = gauss_legendre_on(n_radial, 0.0, r * r);
    let dtheta = 2.0 * std::f64::consts::PI / n_angular as f64;
    let mut acc = 0.0;
    for (tt, wt) in ts.iter().zip(&tw) {
        let rho = tt.sqrt();
        for j in 0..n_angular {
            let theta = dtheta * (j as f64 + 0.5);
            let v = Point::new(
                (0..domain.dim())
                    .map(|i| {
                        if i == 0 {
                            num_complex::Complex64::from_polar(rho, theta)
                        } else {
                            num_complex::Complex64::new(0.0, 0.0)
                        }
                    })
                    .collect(),
            );
            let w = domain.mobius(a, &v).expect("pullback point stays inside");
            let jac = geometry::mobius_jacobian(a.coords(), v.coords());
            acc += 0.5 * wt * dtheta * (1.0 - w.abs()).powf(t) * jac;
        }
    }
    acc
}

/// The geometric quotient `mu_hat_{r,theta}(z) = mu(B)/nu(B)^theta`.
pub fn mu_hat(
    domain: &ModelDomain,
    measure: &Measure,
    z: &Point,
    r: f64,
    theta: f64,
) -> Result<f64> {
    let ball = KobayashiBall::new(domain, z.clone(), r)?;
    let mass = ball_mass(domain, measure, &ball)?;
    let volume = ball.lebesgue_volume(domain);
    Ok(mass * volume.powf(-theta))
}

/// `mu_hat_{r,lambda}(z) delta(z)^(-gamma lambda)`, the quantity whose
/// boundary behavior decides the `lambda >= 1` skew condition.
pub fn skew_quotient(
    domain: &ModelDomain,
    measure: &Measure,
    z: &Point,
    cp: &CarlesonParams,
) -> Result<f64> {
    let hat = mu_hat(domain, measure, z, cp.r, cp.lambda)?;
    let delta = domain.boundary_distance(z)?;
    Ok(hat * delta.powf(-cp.gamma * cp.lambda))
}

/// Whether `B^s` of `delta^t dnu` blows up pointwise toward the boundary.
pub fn berezin_boundary_divergent(n: usize, s: f64, t: f64) -> bool {
    s * (n as f64 + 1.0) / 2.0 >= n as f64 + 1.0 + t
}

/// Berezin transform of level `s`: `B^s mu(z) = int |k_z(w)|^s dmu(w)`,
/// with `k_z` the unweighted normalized kernel.
pub fn berezin_transform(
    domain: &ModelDomain,
    measure: &Measure,
    z: &Point,
    s: f64,
    rule: &QuadratureRule,
) -> Result<f64> {
    if s <= 0.0 {
        return Err(Error::parameter(format!("berezin level must be > 0, got {s}")));
    }
    domain.check_point(z)?;
    let kp = KernelParams::new(domain.dim(), 0.0)?;
    let zc = z.coords().to_vec();
    match &measure.kind {
        MeasureKind::Atomic { points, weights }
        | MeasureKind::LatticeWeighted {
            centers: points,
            weights,
            ..
        } => {
            let mut acc = 0.0;
            for (p, w) in points.iter().zip(weights) {
                acc += w * kp.normalized_raw(&zc, p.coords()).norm().powf(s);
            }
            Ok(acc)
        }
        MeasureKind::RadialDensity { t, scale } => {
            let (value, _) = rule.integrate_recentered(domain, z, *t, |w| {
                kp.normalized_raw(&zc, w).norm().powf(s)
            })?;
            Ok(scale * value)
        }
    }
}

/// Reweighting `mu -> delta^beta mu` (Carleson status shifts
/// `(lambda, gamma) -> (lambda, gamma + beta/lambda)`).
pub fn reweight(domain: &ModelDomain, measure: &Measure, beta: f64) -> Result<Measure> {
    match &measure.kind {
        MeasureKind::RadialDensity { t, scale } => {
            if t + beta <= -1.0 {
                return Err(Error::parameter(format!(
                    "reweighted density delta^{} is not finite",
                    t + beta
                )));
            }
            Measure::radial_density(domain, t + beta, *scale)
        }
        MeasureKind::Atomic { points, weights } => {
            let new_weights: Result<Vec<f64>> = points
                .iter()
                .zip(weights)
                .map(|(p, w)| Ok(w * domain.boundary_distance(p)?.powf(beta)))
                .collect();
            Measure::atomic(domain, points.clone(), new_weights?)
        }
        MeasureKind::LatticeWeighted {
            centers,
            weights,
            r,
        } => {
            let new_weights: Result<Vec<f64>> = centers
                .iter()
                .zip(weights)
                .map(|(p, w)| Ok(w * domain.boundary_distance(p)?.powf(beta)))
                .collect();
            Ok(Measure {
                kind: MeasureKind::LatticeWeighted {
                    centers: centers.clone(),
                    weights: new_weights?,
                    r: *r,
                },
                total_mass: 0.0,
                n: measure.n,
            }
            .recompute_mass())
        }
    }
}

impl Measure {
    fn recompute_mass(mut self) -> Self {
        if let Some((_, w)) = self.atoms() {
            self.total_mass = w.iter().sum();
        }
        self
    }
}

/// Which branch of the skew condition was evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SkewBranch {
    /// `lambda >= 1`: sup of the skew quotient.
    Sup,
    /// `lambda < 1`: `L^(1/(1-lambda))` norm of `mu_hat_r delta^(-gamma lambda)`.
    Integral,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SkewNorm {
    pub value: f64,
    pub deepest_delta: f64,
    pub branch: SkewBranch,
}

/// `||mu||_{lambda,gamma}` evaluated on a grid (sup branch) or on the
/// truncation `{delta >= deepest}` (integral branch). Divergence shows as
/// growth of the value when the grid deepens.
pub fn skew_carleson_norm(
    domain: &ModelDomain,
    measure: &Measure,
    cp: &CarlesonParams,
    grid: &[Point],
    rule: &QuadratureRule,
) -> Result<SkewNorm> {
    if grid.is_empty() {
        return Err(Error::parameter("skew norm needs a nonempty grid"));
    }
    let mut deepest = f64::INFINITY;
    for z in grid {
        deepest = deepest.min(domain.boundary_distance(z)?);
    }
    if cp.lambda >= 1.0 {
        let mut sup: f64 = 0.0;
        for z in grid {
            sup = sup.max(skew_quotient(domain, measure, z, cp)?);
        }
        Ok(SkewNorm {
            value: sup,
            deepest_delta: deepest,
            branch: SkewBranch::Sup,
        })
    } else {
        let value = truncated_integral_norm(domain, measure, cp, deepest, rule)?;
        Ok(SkewNorm {
            value,
            deepest_delta: deepest,
            branch: SkewBranch::Integral,
        })
    }
}

/// `( int_{delta >= eps} (mu_hat_r delta^(-gamma lambda))^(1/(1-lambda)) dnu )^(1-lambda)`.
fn truncated_integral_norm(
    domain: &ModelDomain,
    measure: &Measure,
    cp: &CarlesonParams,
    eps: f64,
    rule: &QuadratureRule,
) -> Result<f64> {
    let power = 1.0 / (1.0 - cp.lambda);
    let exponent = -cp.gamma * cp.lambda;
    let integral = match &measure.kind {
        MeasureKind::RadialDensity { .. } => {
            // radial integrand: a 1D rule in |z| suffices, with each sample
            // an exact pulled-back ball mass
            let r_max = domain.truncation_radius(eps);
            let (xs, ws) = gauss_legendre_on(96, 0.0, r_max);
            let mut acc = 0.0;
            for (x, w) in xs.iter().zip(&ws) {
                let z = Point::disk_radius(domain.dim(), *x);
                let quotient = mu_hat(domain, measure, &z, cp.r, 1.0)?
                    * domain.boundary_distance(&z)?.powf(exponent);
                acc += 2.0 * std::f64::consts::PI * x * w * quotient.powf(power);
            }
            acc
        }
        _ => {
            // atoms sit on a ray by construction; cluster angular nodes there
            let adapted = rule.adapted_to_peak(0.0, eps)?;
            let (value, _) = adapted.integrate(domain, 0.0, |z| {
                let p = Point::new(z.to_vec());
                let delta = match domain.weight_convention() {
                    WeightConvention::Smooth => 1.0 - crate::geometry::norm_sq(z),
                    WeightConvention::Euclidean => 1.0 - crate::geometry::norm_sq(z).sqrt(),
                };
                if delta < eps {
                    return 0.0;
                }
                let quotient =
                    mu_hat(domain, measure, &p, cp.r, 1.0).unwrap_or(0.0) * delta.powf(exponent);
                quotient.powf(power)
            })?;
            value
        }
    };
    Ok(integral.powf(1.0 - cp.lambda))
}

impl Point {
    /// Point at Euclidean radius `x` on the `e_1` ray.
    pub(crate) fn disk_radius(n: usize, x: f64) -> Point {
        let mut coords = vec![num_complex::Complex64::new(0.0, 0.0); n];
        coords[0] = num_complex::Complex64::new(x, 0.0);
        Point::new(coords)
    }
}

/// Evidence-carrying classification result.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Classification {
    pub verdict: Verdict,
    pub fit: Option<PowerLawFit>,
    /// `(delta, diagnostic value)` rows that produced the fit.
    pub values: Vec<(f64, f64)>,
    pub branch: SkewBranch,
    pub slope_tol: f64,
    pub note: Option<String>,
}

/// Radial grid layout for boundary fits.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GridSpec {
    pub deep: f64,
    pub shallow: f64,
    pub count: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            deep: 1e-3,
            shallow: 1e-1,
            count: 20,
        }
    }
}

impl GridSpec {
    pub fn deltas(&self) -> Vec<f64> {
        log_grid(self.deep, self.shallow, self.count)
    }
}

fn verdict_from_fit(
    fit: Option<PowerLawFit>,
    values: &[(f64, f64)],
    slope_tol: f64,
    branch: SkewBranch,
) -> Classification {
    let Some(fit) = fit else {
        return Classification {
            verdict: Verdict::Inconclusive,
            fit: None,
            values: values.to_vec(),
            branch,
            slope_tol,
            note: Some("too few positive samples for a slope fit".to_string()),
        };
    };
    let bounded = values.iter().all(|(_, v)| v.is_finite());
    let verdict = if !bounded || fit.slope < -slope_tol {
        Verdict::NotCarleson
    } else if fit.slope > slope_tol {
        Verdict::Vanishing
    } else {
        Verdict::Carleson
    };
    Classification {
        verdict,
        fit: Some(fit),
        values: values.to_vec(),
        branch,
        slope_tol,
        note: None,
    }
}

/// Classify a measure at `(lambda, gamma)` by its boundary exponent.
///
/// For `lambda >= 1` the skew quotient is fitted along a radial grid; a
/// positive slope means vanishing, a negative one divergence. For
/// `lambda < 1` the truncated integral norm is fitted against the
/// truncation depth (stable norm = Carleson = vanishing, by the
/// equivalence on that branch).
pub fn classify_skew_carleson(
    domain: &ModelDomain,
    measure: &Measure,
    cp: &CarlesonParams,
    grid: &GridSpec,
    rule: &QuadratureRule,
    slope_tol: f64,
) -> Result<Classification> {
    if grid.count < 3 {
        return Ok(Classification {
            verdict: Verdict::Inconclusive,
            fit: None,
            values: Vec::new(),
            branch: SkewBranch::Sup,
            slope_tol,
            note: Some("grid too small: need at least 3 depths".to_string()),
        });
    }
    let deltas = grid.deltas();
    if cp.lambda >= 1.0 {
        let mut values = Vec::with_capacity(deltas.len());
        for d in &deltas {
            let z = domain.radial_point(*d)?;
            values.push((*d, skew_quotient(domain, measure, &z, cp)?));
        }
        let xs: Vec<f64> = values.iter().map(|(d, _)| *d).collect();
        let ys: Vec<f64> = values.iter().map(|(_, v)| *v).collect();
        Ok(verdict_from_fit(
            fit_power_law(&xs, &ys),
            &values,
            slope_tol,
            SkewBranch::Sup,
        ))
    } else {
        // truncation depths: reuse the grid's range
        let mut values = Vec::with_capacity(deltas.len());
        for d in &deltas {
            let norm = truncated_integral_norm(domain, measure, cp, *d, rule)?;
            values.push((*d, norm));
        }
        Ok(integral_branch_verdict(&values, cp.lambda, slope_tol))
    }
}

/// Verdict for the `lambda < 1` branch from truncated norms `N(eps)`.
///
/// The outer `(1-lambda)` power compresses divergence exponents, so the
/// fitted slope is rescaled by `1/(1-lambda)` before thresholding; this
/// puts both branches on the integrand exponent scale. Carleson and
/// vanishing coincide here.
fn integral_branch_verdict(values: &[(f64, f64)], lambda: f64, slope_tol: f64) -> Classification {
    let xs: Vec<f64> = values.iter().map(|(d, _)| *d).collect();
    let ys: Vec<f64> = values.iter().map(|(_, v)| *v).collect();
    let scaled = fit_power_law(&xs, &ys).map(|mut f| {
        f.slope /= 1.0 - lambda;
        f
    });
    let mut cls = verdict_from_fit(scaled, values, slope_tol, SkewBranch::Integral);
    if cls.verdict == Verdict::Vanishing {
        cls.verdict = Verdict::Carleson;
    }
    let scale_note = "slope rescaled by 1/(1-lambda); carleson and vanishing coincide";
    cls.note = match cls.note.take() {
        Some(n) => Some(format!("{n}; {scale_note}")),
        None => Some(scale_note.to_string()),
    };
    cls
}

/// Lattice diagnostic: the sequence `mu_hat_{r, lambda theta}(a_k)`.
///
/// For `lambda >= 1` its boundary fit must match the sup diagnostic; for
/// `lambda < 1` the `l^(1/(1-lambda))` norm over deepening sub-lattices is
/// fitted instead.
pub fn lattice_diagnostic(
    domain: &ModelDomain,
    measure: &Measure,
    lattice: &Lattice,
    cp: &CarlesonParams,
    slope_tol: f64,
) -> Result<Classification> {
    let theta = cp.theta(domain.dim());
    let exponent = cp.lambda * theta;
    let mut rows: Vec<(f64, f64)> = Vec::with_capacity(lattice.centers.len());
    for a in &lattice.centers {
        let delta = domain.boundary_distance(a)?;
        let v = mu_hat(domain, measure, a, cp.r, exponent)?;
        rows.push((delta, v));
    }
    if cp.lambda >= 1.0 {
        let xs: Vec<f64> = rows.iter().map(|(d, _)| *d).collect();
        let ys: Vec<f64> = rows.iter().map(|(_, v)| *v).collect();
        Ok(verdict_from_fit(
            fit_power_law(&xs, &ys),
            &rows,
            slope_tol,
            SkewBranch::Sup,
        ))
    } else {
        let power = 1.0 / (1.0 - cp.lambda);
        // partial sequence norms over {delta(a_k) >= eps}, eps log-spaced
        // across the lattice's depth range
        let deepest = rows.iter().map(|(d, _)| *d).fold(f64::INFINITY, f64::min);
        let shallow = rows.iter().map(|(d, _)| *d).fold(0.0f64, f64::max);
        let mut values = Vec::new();
        for eps in log_grid(deepest * 1.001, (0.3 * shallow).max(deepest * 8.0), 6) {
            let sum: f64 = rows
                .iter()
                .filter(|(d, _)| *d >= eps)
                .map(|(_, v)| v.powf(power))
                .sum();
            values.push((eps, sum.powf(1.0 - cp.lambda)));
        }
        Ok(integral_branch_verdict(&values, cp.lambda, slope_tol))
    }
}

/// Smallest admissible Berezin level for the `(lambda, gamma)` diagnostic.
pub fn default_berezin_level(n: usize, cp: &CarlesonParams) -> f64 {
    let theta = cp.theta(n);
    let threshold = if cp.lambda >= 1.0 {
        theta * cp.lambda
    } else {
        theta * cp.lambda + n as f64 / (n as f64 + 1.0) * (1.0 - cp.lambda)
    };
    (threshold.floor() + 1.0).max(1.0)
}

/// Berezin diagnostic: boundary fit of
/// `delta^((n+1)(s/2 - theta lambda)) B^s mu` for `lambda >= 1`, or the
/// truncated-norm stability of the corresponding `L^(1/(1-lambda))`
/// quantity for `lambda < 1`.
pub fn berezin_diagnostic(
    domain: &ModelDomain,
    measure: &Measure,
    cp: &CarlesonParams,
    level: Option<f64>,
    grid: &GridSpec,
    rule: &QuadratureRule,
    slope_tol: f64,
) -> Result<Classification> {
    let n = domain.dim();
    let theta = cp.theta(n);
    let s = level.unwrap_or_else(|| default_berezin_level(n, cp));
    let np1 = n as f64 + 1.0;
    if cp.lambda >= 1.0 {
        if s <= theta * cp.lambda {
            return Err(Error::parameter(format!(
                "berezin level must exceed theta*lambda = {}",
                theta * cp.lambda
            )));
        }
        let scaling = np1 * (s / 2.0 - theta * cp.lambda);
        let deltas = grid.deltas();
        let mut rows = Vec::with_capacity(deltas.len());
        for d in &deltas {
            let z = domain.radial_point(*d)?;
            let b = berezin_transform(domain, measure, &z, s, rule)?;
            rows.push((*d, d.powf(scaling) * b));
        }
        let xs: Vec<f64> = rows.iter().map(|(d, _)| *d).collect();
        let ys: Vec<f64> = rows.iter().map(|(_, v)| *v).collect();
        Ok(verdict_from_fit(
            fit_power_law(&xs, &ys),
            &rows,
            slope_tol,
            SkewBranch::Sup,
        ))
    } else {
        let min_level = theta * cp.lambda + n as f64 / np1 * (1.0 - cp.lambda);
        if s <= min_level {
            return Err(Error::parameter(format!(
                "berezin level must exceed {min_level} on the lambda < 1 branch"
            )));
        }
        let power = 1.0 / (1.0 - cp.lambda);
        let scaling = -np1 * (theta * cp.lambda - s / 2.0 + (1.0 - cp.lambda));
        let deltas = grid.deltas();
        let mut values = Vec::with_capacity(deltas.len());
        for eps in &deltas {
            let r_max = domain.truncation_radius(*eps);
            let (xs, ws) = gauss_legendre_on(48, 0.0, r_max);
            let mut acc = 0.0;
            for (x, w) in xs.iter().zip(&ws) {
                let z = Point::disk_radius(n, *x);
                let delta = domain.boundary_distance(&z)?;
                let b = berezin_transform(domain, measure, &z, s, rule)?;
                acc += 2.0 * std::f64::consts::PI
                    * x
                    * w
                    * (delta.powf(scaling) * b).powf(power);
            }
            values.push((*eps, acc.powf(1.0 - cp.lambda)));
        }
        Ok(integral_branch_verdict(&values, cp.lambda, slope_tol))
    }
}

/// One factor of the product test: `f_{j,a} = delta(a)^{r_j} k_a^{sigma_j}`
/// measured in `A^{p_j}_{alpha_j}` and raised to the `q_j`-th power.
/// `sigma = 0` denotes the constant function 1.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ProductFactor {
    pub p: f64,
    pub alpha: f64,
    pub q: f64,
    pub sigma: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProductTest {
    pub lambda: f64,
    pub gamma: f64,
    pub max_ratio: f64,
    /// `(delta(a), ratio)` per trial center.
    pub rows: Vec<(f64, f64)>,
}

/// Product characterization probe: the ratio
/// `int prod |f_{j,a}|^{q_j} dmu / prod ||f_{j,a}||_{p_j,alpha_j}^{q_j}`
/// along boundary-approaching centers stays bounded iff the measure is
/// `(lambda, gamma)`-skew Carleson with `lambda = sum q_j/p_j`,
/// `gamma = (1/lambda) sum alpha_j q_j / p_j`.
pub fn product_carleson_test(
    domain: &ModelDomain,
    measure: &Measure,
    factors: &[ProductFactor],
    centers: &[Point],
    rule: &QuadratureRule,
) -> Result<ProductTest> {
    if factors.is_empty() || centers.is_empty() {
        return Err(Error::parameter("product test needs factors and centers"));
    }
    let n = domain.dim();
    let np1 = n as f64 + 1.0;
    let mut lambda = 0.0;
    let mut gamma_sum = 0.0;
    for f in factors {
        if f.p <= 0.0 || f.q <= 0.0 || f.alpha <= -1.0 {
            return Err(Error::parameter(
                "product factors need p, q > 0 and alpha > -1",
            ));
        }
        if f.sigma > 0 {
            let admissible = f.p * f.sigma as f64 > (1.0f64).max(1.0 + f.alpha / np1);
            if !admissible {
                return Err(Error::parameter(format!(
                    "factor (p={}, alpha={}, sigma={}) violates p*sigma > max(1, 1+alpha/(n+1))",
                    f.p, f.alpha, f.sigma
                )));
            }
        }
        lambda += f.q / f.p;
        gamma_sum += f.alpha * f.q / f.p;
    }
    let gamma = if lambda != 0.0 { gamma_sum / lambda } else { 0.0 };
    let kp = KernelParams::new(n, 0.0)?;
    let s_total: f64 = factors.iter().map(|f| f.sigma as f64 * f.q).sum();
    let mut rows = Vec::with_capacity(centers.len());
    let mut max_ratio: f64 = 0.0;
    for a in centers {
        let delta = domain.smooth_delta(a);
        // numerator: delta(a)^(sum q_j r_j) * B^{s_total} mu(a), with the
        // constant factors (sigma = 0) contributing plain mass terms
        let mut log_numerator = 0.0;
        for f in factors {
            if f.sigma > 0 {
                let r_j = np1 * f.sigma as f64 / 2.0 - (np1 + f.alpha) / f.p;
                log_numerator += f.q * r_j * delta.ln();
            }
        }
        let integral = if s_total > 0.0 {
            berezin_transform(domain, measure, a, s_total, rule)?
        } else {
            measure.total_mass()
        };
        let numerator = log_numerator.exp() * integral;
        // denominator: product of actual norms
        let mut log_denominator = 0.0;
        for f in factors {
            let norm = if f.sigma == 0 {
                radial_mass(domain, f.alpha).powf(1.0 / f.p)
            } else {
                let r_j = np1 * f.sigma as f64 / 2.0 - (np1 + f.alpha) / f.p;
                // ||k_a^sigma||_{p,alpha} via the kernel integral
                let power = f.sigma as f64 * f.p;
                let diag = kp.diagonal(a)?;
                let integral = kp.kernel_integral_estimate(a, power, f.alpha, rule)?;
                delta.powf(r_j) * (diag.powf(-power / 2.0) * integral).powf(1.0 / f.p)
            };
            log_denominator += f.q * norm.ln();
        }
        let ratio = numerator / log_denominator.exp();
        max_ratio = max_ratio.max(ratio);
        rows.push((domain.boundary_distance(a)?, ratio));
    }
    Ok(ProductTest {
        lambda,
        gamma,
        max_ratio,
        rows,
    })
}
