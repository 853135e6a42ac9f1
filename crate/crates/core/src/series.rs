//! Expansions of kernel-type functions in powers of `<z, a>`.
//!
//! Everything the operator probes need lives on one observation: on the
//! ball, both the kernel `K_beta(z, a) = c sum_k b_k <z, a>^k` and the
//! monomials `<z, a>^k` interact with unitarily invariant measures
//! diagonally. For a radial density `(1-|w|^2)^t dnu`,
//!
//! ```text
//! int <z,w>^j conj(<a,w>^k) (1-|w|^2)^t dnu(w) = delta_{jk} C_k(t) <z,a>^k,
//! C_k(t) = pi^n k! Gamma(t+1) / Gamma(n+k+t+1),
//! ```
//!
//! so applying `T_mu^beta` to a series in `<z, a>` multiplies coefficient
//! `k` by `gamma_k = c_{n,beta} b_k C_k(t)` — which collapses to exactly 1
//! when `t = beta` (the operator is the identity). The same moments give
//! exact `A^2_alpha` norms and pairings of any two such series, which keeps
//! numerator and denominator of operator-norm ratios on one discretization.

use crate::error::{Error, Result};
use crate::geometry::{inner, Point};
use crate::kernels::KernelParams;
use crate::numeric::lngamma;
use num_complex::Complex64;

/// Hard cap on stored coefficients (memory/runtime guard; reached only for
/// anchors deeper than the default grids).
pub const MAX_SERIES_LEN: usize = 600_000;

/// `ln C_k(t)`, the radial moment of `|w_1|^(2k)` against `(1-|w|^2)^t dnu`.
pub fn ln_radial_moment(n: usize, t: f64, k: usize) -> f64 {
    let nf = n as f64;
    let kf = k as f64;
    nf * std::f64::consts::PI.ln() + lngamma(kf + 1.0) + lngamma(t + 1.0)
        - lngamma(nf + kf + t + 1.0)
}

/// `ln b_k` where `K_beta(z, a) = c_{n,beta} sum b_k <z, a>^k`.
pub fn ln_kernel_coeff(n: usize, beta: f64, k: usize) -> f64 {
    let nf = n as f64;
    let kf = k as f64;
    lngamma(kf + nf + 1.0 + beta) - lngamma(kf + 1.0) - lngamma(nf + 1.0 + beta)
}

/// Diagonal multiplier of `T_mu^beta` on `<z, a>^k` for the radial measure
/// `scale (1-|w|^2)^t dnu`; identically 1 when `t = beta`, `scale = 1`.
pub fn radial_toeplitz_multiplier(kp: &KernelParams, t: f64, scale: f64, k: usize) -> f64 {
    let n = kp.dim();
    scale * kp.constant() * (ln_kernel_coeff(n, kp.beta(), k) + ln_radial_moment(n, t, k)).exp()
}

/// A function `f(z) = sum_k coeffs[k] <z, anchor>^k`.
///
/// The anchor may sit on the closed ball (unit vectors give plain
/// monomials); truncation bookkeeping uses `|anchor| < 1` for infinite
/// families like kernel probes.
#[derive(Debug, Clone)]
pub struct DirectionalSeries {
    anchor: Vec<Complex64>,
    coeffs: Vec<f64>,
    /// `suffix_max[k] = max_{j >= k} |coeffs[j]|`, for tail bounds.
    suffix_max: Vec<f64>,
}

impl DirectionalSeries {
    pub fn new(anchor: Vec<Complex64>, coeffs: Vec<f64>) -> Self {
        let mut suffix_max = vec![0.0f64; coeffs.len() + 1];
        for k in (0..coeffs.len()).rev() {
            suffix_max[k] = suffix_max[k + 1].max(coeffs[k].abs());
        }
        DirectionalSeries {
            anchor,
            coeffs,
            suffix_max,
        }
    }

    /// Kernel probe `f_a = K_beta(., a)`: coefficients `c b_k` against
    /// `<z, a>^k`, truncated where the tail drops below 1e-18 of the
    /// largest term at argument `|a|^2`. The stored polynomial is the test
    /// function actually used everywhere, so ratios stay consistent.
    pub fn kernel_probe(kp: &KernelParams, a: &Point) -> Result<Self> {
        kp.smooth_domain().check_point(a)?;
        let n = kp.dim() as f64;
        let c = kp.constant();
        let beta = kp.beta();
        let q = a.norm_sq();
        let mut coeffs = Vec::with_capacity(1024);
        let mut b = 1.0f64; // b_0; b_{k+1} = b_k (k+n+1+beta)/(k+1)
        let mut q_pow = 1.0f64;
        let mut max_term = 0.0f64;
        let mut k = 0usize;
        loop {
            coeffs.push(c * b);
            let term = c * b * q_pow;
            max_term = max_term.max(term);
            b *= (k as f64 + n + 1.0 + beta) / (k as f64 + 1.0);
            q_pow *= q;
            k += 1;
            if k >= 32 && (term < 1e-18 * max_term || q == 0.0) {
                break;
            }
            if k >= MAX_SERIES_LEN {
                break;
            }
        }
        Ok(Self::new(a.coords().to_vec(), coeffs))
    }

    /// The monomial `<z, direction>^degree`.
    pub fn monomial(direction: Vec<Complex64>, degree: usize) -> Self {
        let mut coeffs = vec![0.0; degree + 1];
        coeffs[degree] = 1.0;
        Self::new(direction, coeffs)
    }

    pub fn anchor(&self) -> &[Complex64] {
        &self.anchor
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::new(
            self.anchor.clone(),
            self.coeffs.iter().map(|c| c * factor).collect(),
        )
    }

    /// Apply a diagonal multiplier (e.g. a radial Toeplitz operator).
    pub fn mapped<M>(&self, multiplier: M) -> Self
    where
        M: Fn(usize) -> f64,
    {
        Self::new(
            self.anchor.clone(),
            self.coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| c * multiplier(k))
                .collect(),
        )
    }

    /// Evaluate at `z` (forward sum with a certified geometric tail bound).
    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        let u = inner(z, &self.anchor);
        let abs_u = u.norm();
        let mut acc = Complex64::new(0.0, 0.0);
        let mut power = Complex64::new(1.0, 0.0);
        let mut abs_power = 1.0f64;
        for (k, c) in self.coeffs.iter().enumerate() {
            acc += c * power;
            power *= u;
            abs_power *= abs_u;
            if abs_u < 1.0 {
                let tail = self.suffix_max[k + 1] * abs_power / (1.0 - abs_u);
                if tail <= 1e-16 * acc.norm() + 1e-300 {
                    break;
                }
            }
        }
        acc
    }

    /// Exact pairing `(f, g)_{2,alpha} = sum_k c_k d_k C_k(alpha) <a,b>^k`.
    pub fn pair(&self, other: &Self, alpha: f64) -> Result<Complex64> {
        if self.anchor.len() != other.anchor.len() {
            return Err(Error::parameter("series dimensions differ"));
        }
        if alpha <= -1.0 {
            return Err(Error::parameter(format!(
                "weight exponent must satisfy alpha > -1, got {alpha}"
            )));
        }
        let n = self.anchor.len();
        let u = inner(&self.anchor, &other.anchor);
        let mut moment = ln_radial_moment(n, alpha, 0).exp();
        let mut power = Complex64::new(1.0, 0.0);
        let mut acc = Complex64::new(0.0, 0.0);
        let len = self.coeffs.len().min(other.coeffs.len());
        for k in 0..len {
            acc += self.coeffs[k] * other.coeffs[k] * moment * power;
            // C_{k+1}/C_k = (k+1)/(n+k+1+alpha)
            moment *= (k as f64 + 1.0) / (n as f64 + k as f64 + 1.0 + alpha);
            power *= u;
        }
        Ok(acc)
    }

    /// Exact squared `A^2_alpha` norm.
    pub fn norm2_sq(&self, alpha: f64) -> Result<f64> {
        Ok(self.pair(self, alpha)?.re)
    }
}

/// `(K_beta(., x), K_beta(., y))_{2,alpha} = c^2 sum_k b_k^2 C_k(alpha) u^k`
/// at `u = <x, y>`. Used for Gram matrices of kernel sums.
pub fn kernel_gram(kp: &KernelParams, alpha: f64, u: Complex64) -> Result<Complex64> {
    if alpha <= -1.0 {
        return Err(Error::parameter(format!(
            "weight exponent must satisfy alpha > -1, got {alpha}"
        )));
    }
    let n = kp.dim() as f64;
    let beta = kp.beta();
    let c2 = kp.constant() * kp.constant();
    let abs_u = u.norm();
    if abs_u >= 1.0 {
        return Err(Error::parameter("kernel gram needs |<x,y>| < 1"));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    let mut power = Complex64::new(1.0, 0.0);
    let mut coeff = ln_radial_moment(kp.dim(), alpha, 0).exp(); // b_0^2 C_0
    let mut max_term = 0.0f64;
    for k in 0..MAX_SERIES_LEN {
        acc += c2 * coeff * power;
        let term = coeff * power.norm();
        max_term = max_term.max(term);
        let kf = k as f64;
        let b_ratio = (kf + n + 1.0 + beta) / (kf + 1.0);
        coeff *= b_ratio * b_ratio * (kf + 1.0) / (n + kf + 1.0 + alpha);
        power *= u;
        if k >= 32 && term < 1e-17 * max_term {
            break;
        }
    }
    Ok(acc)
}
