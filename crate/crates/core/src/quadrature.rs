//! Numerical integration over the model domain.
//!
//! Every weighted integral `int_D f delta^alpha dnu` in the crate goes
//! through one of these rules:
//!
//! * `tensor_polar` (disk): Gauss-Legendre in a boundary-graded radial
//!   variable `t = 1 - (1-u)^g` times an angular rule, either the periodic
//!   trapezoid or a sinh-clustered Gauss rule for integrands peaked at a
//!   known boundary direction;
//! * `qmc` (any dimension): Halton points, deterministic;
//! * `monte_carlo` (any dimension): seeded uniform sampling with a standard
//!   error, also exposed standalone as [`monte_carlo_oracle`] — the
//!   independent oracle used by the test suite.
//!
//! Integrals of functions peaked at an interior point `c` should use
//! [`QuadratureRule::integrate_recentered`], which substitutes `w =
//! phi_c(v)`; the substitution is exact (Moebius Jacobian) and removes the
//! peak, so a modest rule resolves kernels centered arbitrarily close to
//! the boundary. The rule keeps `1 - |node|^2` in exact form so that
//! boundary weights retain full relative precision at depth.

use crate::error::{Error, Result};
use crate::geometry::{inner, mobius_raw, norm_sq, ModelDomain, Point, WeightConvention};
use crate::numeric::{ball_lebesgue_volume, gauss_legendre};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleKind {
    TensorPolar,
    Qmc,
    MonteCarlo,
}

/// How the error estimate returned by `integrate` is to be read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorModel {
    /// Difference against an embedded half-resolution rule.
    Deterministic,
    /// One standard error of the sample mean.
    Statistical,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum RuleParams {
    Disk {
        n_radial: usize,
        n_angular: usize,
        grading: f64,
        angular: Option<(f64, f64)>, // (center, kappa)
    },
    MonteCarlo {
        samples: usize,
        seed: u64,
    },
    Qmc {
        samples: usize,
    },
}

#[derive(Debug, Clone)]
pub struct QuadratureRule {
    kind: RuleKind,
    n: usize,
    nodes: Vec<Complex64>,
    weights: Vec<f64>,
    /// `1 - |node|^2`, kept at full relative precision.
    one_minus_sq: Vec<f64>,
    error_model: ErrorModel,
    params: RuleParams,
    coarse: Option<Box<QuadratureRule>>,
}

impl QuadratureRule {
    /// Tensor rule on the unit disk. `grading >= 1` controls how strongly
    /// radial nodes cluster at the boundary (`rho = 1 - (1-u)^grading`).
    pub fn disk_tensor(n_radial: usize, n_angular: usize, grading: f64) -> Result<Self> {
        Self::disk_tensor_graded(n_radial, n_angular, grading, None, true)
    }

    /// Disk rule whose angular nodes cluster around `theta0` at scale
    /// `e^(-kappa)`; used for integrands peaked at a boundary direction.
    pub fn disk_tensor_angular(
        n_radial: usize,
        n_angular: usize,
        grading: f64,
        theta0: f64,
        kappa: f64,
    ) -> Result<Self> {
        Self::disk_tensor_graded(n_radial, n_angular, grading, Some((theta0, kappa)), true)
    }

    fn disk_tensor_graded(
        n_radial: usize,
        n_angular: usize,
        grading: f64,
        angular: Option<(f64, f64)>,
        with_coarse: bool,
    ) -> Result<Self> {
        if n_radial < 2 || n_angular < 4 {
            return Err(Error::parameter("rule needs n_radial >= 2, n_angular >= 4"));
        }
        if grading < 1.0 {
            return Err(Error::parameter("radial grading must be >= 1"));
        }
        let (us, uw) = gauss_legendre(n_radial);
        // (rho, 1 - rho^2, radial weight); 1 - rho = (1-u)^g exactly, so the
        // boundary distance of every node is known at full precision
        let mut radial: Vec<(f64, f64, f64)> = Vec::with_capacity(n_radial);
        for (u, w) in us.iter().zip(&uw) {
            let one_minus_u = 0.5 * (1.0 - u); // exact complement on [0,1]
            let w01 = 0.5 * w;
            let omr = one_minus_u.powf(grading);
            let rho = 1.0 - omr;
            let jac = grading * one_minus_u.powf(grading - 1.0);
            radial.push((rho, omr * (2.0 - omr), rho * jac * w01)); // rho drho
        }
        let angular_nodes: Vec<(f64, f64)> = match angular {
            None => (0..n_angular)
                .map(|j| {
                    let th = 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / n_angular as f64;
                    (th, 2.0 * std::f64::consts::PI / n_angular as f64)
                })
                .collect(),
            Some((theta0, kappa)) => {
                let (xs, xw) = gauss_legendre(n_angular);
                let sh = kappa.sinh();
                xs.iter()
                    .zip(&xw)
                    .map(|(x, w)| {
                        let th = theta0 + std::f64::consts::PI * (kappa * x).sinh() / sh;
                        let jac = std::f64::consts::PI * kappa * (kappa * x).cosh() / sh;
                        (th, w * jac)
                    })
                    .collect()
            }
        };
        let count = n_radial * n_angular;
        let mut nodes = Vec::with_capacity(count);
        let mut weights = Vec::with_capacity(count);
        let mut one_minus_sq = Vec::with_capacity(count);
        for (rho, oms, wr) in &radial {
            for (th, wa) in &angular_nodes {
                nodes.push(Complex64::from_polar(*rho, *th));
                weights.push(wr * wa);
                one_minus_sq.push(*oms);
            }
        }
        let coarse = if with_coarse {
            Some(Box::new(Self::disk_tensor_graded(
                (n_radial / 2).max(2),
                (n_angular / 2).max(4),
                grading,
                angular,
                false,
            )?))
        } else {
            None
        };
        Ok(QuadratureRule {
            kind: RuleKind::TensorPolar,
            n: 1,
            nodes,
            weights,
            one_minus_sq,
            error_model: ErrorModel::Deterministic,
            params: RuleParams::Disk {
                n_radial,
                n_angular,
                grading,
                angular,
            },
            coarse,
        })
    }

    /// Seeded uniform Monte Carlo rule on the unit ball of C^n.
    pub fn ball_monte_carlo(n: usize, samples: usize, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::parameter("dimension must be >= 1"));
        }
        if samples < 1000 {
            return Err(Error::parameter("monte carlo rule needs samples >= 1000"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let volume = ball_lebesgue_volume(n);
        let w = volume / samples as f64;
        let mut nodes = Vec::with_capacity(samples * n);
        let mut one_minus_sq = Vec::with_capacity(samples);
        for _ in 0..samples {
            let z = crate::geometry::sample_unit_ball(n, &mut rng);
            one_minus_sq.push(1.0 - norm_sq(&z));
            nodes.extend(z);
        }
        Ok(QuadratureRule {
            kind: RuleKind::MonteCarlo,
            n,
            nodes,
            weights: vec![w; samples],
            one_minus_sq,
            error_model: ErrorModel::Statistical,
            params: RuleParams::MonteCarlo { samples, seed },
            coarse: None,
        })
    }

    /// Halton low-discrepancy rule on the unit ball of C^n.
    pub fn ball_qmc(n: usize, samples: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::parameter("dimension must be >= 1"));
        }
        if samples < 16 {
            return Err(Error::parameter("qmc rule needs samples >= 16"));
        }
        let dims = 2 * n;
        let primes = first_primes(dims);
        let mut nodes = Vec::with_capacity(samples * n);
        let mut one_minus_sq = Vec::with_capacity(samples);
        let mut kept = 0usize;
        let mut index = 0u64;
        while kept < samples {
            index += 1;
            let mut point = Vec::with_capacity(n);
            let mut sq = 0.0;
            for d in 0..n {
                let re = 2.0 * van_der_corput(index, primes[2 * d]) - 1.0;
                let im = 2.0 * van_der_corput(index, primes[2 * d + 1]) - 1.0;
                sq += re * re + im * im;
                point.push(Complex64::new(re, im));
            }
            if sq < 1.0 {
                nodes.extend(point);
                one_minus_sq.push(1.0 - sq);
                kept += 1;
            }
        }
        let cube = 4.0f64.powi(n as i32);
        let w = cube / index as f64;
        Ok(QuadratureRule {
            kind: RuleKind::Qmc,
            n,
            nodes,
            weights: vec![w; samples],
            one_minus_sq,
            error_model: ErrorModel::Statistical,
            params: RuleParams::Qmc { samples },
            coarse: None,
        })
    }

    /// Rule of the same kind and budget whose angular nodes cluster around
    /// the boundary direction `theta0` at depth scale `depth`. Disk tensor
    /// rules are rebuilt; sampling rules are returned unchanged.
    pub fn adapted_to_peak(&self, theta0: f64, depth: f64) -> Result<Self> {
        match self.params {
            RuleParams::Disk {
                n_radial,
                n_angular,
                grading,
                ..
            } => {
                let kappa = (1.0 / depth.max(1e-12)).ln().max(1.0) + 4.0;
                Self::disk_tensor_graded(n_radial, n_angular, grading, Some((theta0, kappa)), true)
            }
            _ => Ok(self.clone()),
        }
    }

    pub fn kind(&self) -> RuleKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn node_count(&self) -> usize {
        self.weights.len()
    }

    pub fn error_model(&self) -> ErrorModel {
        self.error_model
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn nodes(&self) -> impl Iterator<Item = (&[Complex64], f64)> {
        self.nodes
            .chunks_exact(self.n)
            .zip(self.weights.iter().copied())
    }

    fn delta_power(convention: WeightConvention, one_minus_sq: f64, alpha: f64) -> f64 {
        if alpha == 0.0 {
            return 1.0;
        }
        match convention {
            WeightConvention::Smooth => one_minus_sq.powf(alpha),
            WeightConvention::Euclidean => {
                let abs = (1.0 - one_minus_sq).max(0.0).sqrt();
                (one_minus_sq / (1.0 + abs)).powf(alpha)
            }
        }
    }

    /// `int_D f delta^alpha dnu` with an error estimate.
    pub fn integrate<F>(&self, domain: &ModelDomain, alpha: f64, f: F) -> Result<(f64, f64)>
    where
        F: Fn(&[Complex64]) -> f64,
    {
        self.check_domain(domain, alpha)?;
        let value = self.raw_sum(domain, alpha, &f, None)?;
        let err = match (&self.coarse, self.error_model) {
            (Some(c), ErrorModel::Deterministic) => {
                let cv = c.raw_sum(domain, alpha, &f, None)?;
                (value - cv).abs().max(4e-16 * value.abs())
            }
            _ => self.statistical_error(domain, alpha, &f, value, None),
        };
        Ok((value, err))
    }

    /// Same for complex-valued integrands.
    pub fn integrate_complex<F>(
        &self,
        domain: &ModelDomain,
        alpha: f64,
        f: F,
    ) -> Result<(Complex64, f64)>
    where
        F: Fn(&[Complex64]) -> Complex64,
    {
        self.check_domain(domain, alpha)?;
        let value = self.raw_sum_complex(domain, alpha, &f, None)?;
        let err = match (&self.coarse, self.error_model) {
            (Some(c), ErrorModel::Deterministic) => {
                let cv = c.raw_sum_complex(domain, alpha, &f, None)?;
                (value - cv).norm().max(4e-16 * value.norm())
            }
            _ => 0.0,
        };
        Ok((value, err))
    }

    /// `int_D f delta^alpha dnu` after the substitution `w = phi_c(v)`:
    /// the rule's nodes are the `v`, and the integrand is evaluated at
    /// `w` with the exact Moebius Jacobian. Use when `f` is peaked at `c`.
    pub fn integrate_recentered<F>(
        &self,
        domain: &ModelDomain,
        center: &Point,
        alpha: f64,
        f: F,
    ) -> Result<(f64, f64)>
    where
        F: Fn(&[Complex64]) -> f64,
    {
        self.check_domain(domain, alpha)?;
        domain.check_point(center)?;
        let value = self.raw_sum(domain, alpha, &f, Some(center))?;
        let err = match (&self.coarse, self.error_model) {
            (Some(c), ErrorModel::Deterministic) => {
                let cv = c.raw_sum(domain, alpha, &f, Some(center))?;
                (value - cv).abs().max(4e-16 * value.abs())
            }
            _ => self.statistical_error(domain, alpha, &f, value, Some(center)),
        };
        Ok((value, err))
    }

    pub fn integrate_recentered_complex<F>(
        &self,
        domain: &ModelDomain,
        center: &Point,
        alpha: f64,
        f: F,
    ) -> Result<(Complex64, f64)>
    where
        F: Fn(&[Complex64]) -> Complex64,
    {
        self.check_domain(domain, alpha)?;
        domain.check_point(center)?;
        let value = self.raw_sum_complex(domain, alpha, &f, Some(center))?;
        let err = match (&self.coarse, self.error_model) {
            (Some(c), ErrorModel::Deterministic) => {
                let cv = c.raw_sum_complex(domain, alpha, &f, Some(center))?;
                (value - cv).norm().max(4e-16 * value.norm())
            }
            _ => 0.0,
        };
        Ok((value, err))
    }

    fn check_domain(&self, domain: &ModelDomain, alpha: f64) -> Result<()> {
        if domain.dim() != self.n {
            return Err(Error::parameter(format!(
                "rule dimension {} does not match domain dimension {}",
                self.n,
                domain.dim()
            )));
        }
        if alpha <= -1.0 {
            return Err(Error::parameter(format!(
                "weight exponent must satisfy alpha > -1, got {alpha}"
            )));
        }
        Ok(())
    }

    fn raw_sum<F>(
        &self,
        domain: &ModelDomain,
        alpha: f64,
        f: &F,
        center: Option<&Point>,
    ) -> Result<f64>
    where
        F: Fn(&[Complex64]) -> f64,
    {
        let convention = domain.weight_convention();
        let mut acc = 0.0;
        match center {
            None => {
                for (i, (z, w)) in self.nodes().enumerate() {
                    let fv = f(z);
                    if !fv.is_finite() {
                        return Err(Error::Evaluation {
                            index: i,
                            location: Point::new(z.to_vec()).to_string(),
                            reason: format!("integrand returned {fv}"),
                        });
                    }
                    acc += w * fv * Self::delta_power(convention, self.one_minus_sq[i], alpha);
                }
            }
            Some(c) => {
                let cc = c.coords();
                let oms_c = 1.0 - norm_sq(cc);
                let np1 = self.n as i32 + 1;
                for (i, (v, w)) in self.nodes().enumerate() {
                    let mapped = mobius_raw(cc, v);
                    let denom = (Complex64::new(1.0, 0.0) - inner(v, cc)).norm_sqr();
                    let jac = (oms_c / denom).powi(np1);
                    let oms_w = oms_c * self.one_minus_sq[i] / denom;
                    let fv = f(&mapped);
                    if !fv.is_finite() {
                        return Err(Error::Evaluation {
                            index: i,
                            location: Point::new(mapped).to_string(),
                            reason: format!("integrand returned {fv}"),
                        });
                    }
                    acc += w * fv * jac * Self::delta_power(convention, oms_w, alpha);
                }
            }
        }
        Ok(acc)
    }

    fn raw_sum_complex<F>(
        &self,
        domain: &ModelDomain,
        alpha: f64,
        f: &F,
        center: Option<&Point>,
    ) -> Result<Complex64>
    where
        F: Fn(&[Complex64]) -> Complex64,
    {
        let convention = domain.weight_convention();
        let mut acc = Complex64::new(0.0, 0.0);
        match center {
            None => {
                for (i, (z, w)) in self.nodes().enumerate() {
                    let fv = f(z);
                    if !fv.is_finite() {
                        return Err(Error::Evaluation {
                            index: i,
                            location: Point::new(z.to_vec()).to_string(),
                            reason: format!("integrand returned {fv}"),
                        });
                    }
                    acc += fv * (w * Self::delta_power(convention, self.one_minus_sq[i], alpha));
                }
            }
            Some(c) => {
                let cc = c.coords();
                let oms_c = 1.0 - norm_sq(cc);
                let np1 = self.n as i32 + 1;
                for (i, (v, w)) in self.nodes().enumerate() {
                    let mapped = mobius_raw(cc, v);
                    let denom = (Complex64::new(1.0, 0.0) - inner(v, cc)).norm_sqr();
                    let jac = (oms_c / denom).powi(np1);
                    let oms_w = oms_c * self.one_minus_sq[i] / denom;
                    let fv = f(&mapped);
                    if !fv.is_finite() {
                        return Err(Error::Evaluation {
                            index: i,
                            location: Point::new(mapped).to_string(),
                            reason: format!("integrand returned {fv}"),
                        });
                    }
                    acc += fv * (w * jac * Self::delta_power(convention, oms_w, alpha));
                }
            }
        }
        Ok(acc)
    }

    fn statistical_error<F>(
        &self,
        domain: &ModelDomain,
        alpha: f64,
        f: &F,
        value: f64,
        center: Option<&Point>,
    ) -> f64
    where
        F: Fn(&[Complex64]) -> f64,
    {
        // equal-weight sampling rules: one standard error of the mean
        let convention = domain.weight_convention();
        let count = self.node_count();
        if count < 2 {
            return f64::INFINITY;
        }
        let mean = value / self.total_weight();
        let mut var = 0.0;
        for (i, (v, _)) in self.nodes().enumerate() {
            let g = match center {
                None => f(v) * Self::delta_power(convention, self.one_minus_sq[i], alpha),
                Some(c) => {
                    let cc = c.coords();
                    let oms_c = 1.0 - norm_sq(cc);
                    let mapped = mobius_raw(cc, v);
                    let denom = (Complex64::new(1.0, 0.0) - inner(v, cc)).norm_sqr();
                    let jac = (oms_c / denom).powi(self.n as i32 + 1);
                    f(&mapped)
                        * jac
                        * Self::delta_power(convention, oms_c * self.one_minus_sq[i] / denom, alpha)
                }
            };
            var += (g - mean) * (g - mean);
        }
        var /= (count - 1) as f64;
        self.total_weight() * (var / count as f64).sqrt()
    }
}

/// Unbiased Monte Carlo estimate of `int_D f delta^alpha dnu` with one
/// standard error; reproducible under a fixed seed. This is the independent
/// oracle for the deterministic rules and for every closed form.
pub fn monte_carlo_oracle<F>(
    domain: &ModelDomain,
    alpha: f64,
    samples: usize,
    seed: u64,
    f: F,
) -> Result<(f64, f64)>
where
    F: Fn(&[Complex64]) -> f64,
{
    if samples < 1000 {
        return Err(Error::parameter("oracle needs samples >= 1000"));
    }
    if alpha <= -1.0 {
        return Err(Error::parameter(format!(
            "weight exponent must satisfy alpha > -1, got {alpha}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let volume = domain.lebesgue_volume();
    let convention = domain.weight_convention();
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..samples {
        let z = crate::geometry::sample_unit_ball(domain.dim(), &mut rng);
        let g = f(&z) * QuadratureRule::delta_power(convention, 1.0 - norm_sq(&z), alpha);
        sum += g;
        sum_sq += g * g;
    }
    let nf = samples as f64;
    let mean = sum / nf;
    let var = (sum_sq / nf - mean * mean).max(0.0) * nf / (nf - 1.0);
    Ok((volume * mean, volume * (var / nf).sqrt()))
}

fn van_der_corput(mut index: u64, base: u64) -> f64 {
    let mut result = 0.0;
    let mut denom = 1.0;
    while index > 0 {
        denom *= base as f64;
        result += (index % base) as f64 / denom;
        index /= base;
    }
    result
}

fn first_primes(count: usize) -> Vec<u64> {
    let mut primes: Vec<u64> = Vec::with_capacity(count);
    let mut candidate = 2u64;
    while primes.len() < count {
        if primes.iter().all(|p| candidate % p != 0) {
            primes.push(candidate);
        }
        candidate += 1;
    }
    primes
}
