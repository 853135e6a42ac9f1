//! The Toeplitz operator `T_mu^beta f = int K_beta(., w) f(w) dmu(w)`, its
//! parameter map, and the numerical probes for the norm equivalence
//! `||T_mu^beta|| ~ ||mu||_{lambda,gamma}` and for compactness.
//!
//! Operator norms between `A^{p1}_{alpha1}` and `A^{p2}_{alpha2}` have no
//! spectral shortcut for general `p`; the artifact reports a lower estimate
//! over a structured family of test functions (kernel probes marching to
//! the boundary, random lattice atom combinations, low-degree monomials)
//! together with the chain `mu(B(a,r))/delta(a)^((n+1+gamma)lambda)` as a
//! certified lower proxy, and pairs both with the skew-Carleson norm as the
//! upper proxy. The acceptance contract is verdict agreement and bounded
//! ratios, never equality of norms.
//!
//! Applying the operator is exact in two cases that cover the whole
//! measure zoo: atomic measures give finite kernel sums, and radial
//! densities act diagonally on expansions in `<z, a>^k` (see [`crate::series`]).

use crate::error::{Error, Result};
use crate::fit::{fit_power_law, PowerLawFit};
use crate::geometry::{KobayashiBall, Lattice, ModelDomain, Point};
use crate::kernels::KernelParams;
use crate::measures::{ball_mass, CarlesonParams, Measure, MeasureKind, Verdict};
use crate::quadrature::QuadratureRule;
use crate::series::{radial_toeplitz_multiplier, DirectionalSeries};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Parameter map of the mapping problem
/// `T_mu^beta : A^{p1}_{alpha1} -> A^{p2}_{alpha2}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorParams {
    pub n: usize,
    pub p1: f64,
    pub alpha1: f64,
    pub p2: f64,
    pub alpha2: f64,
    pub beta: f64,
    /// `lambda = 1 + 1/p1 - 1/p2`.
    pub lambda: f64,
    /// `gamma = (beta + alpha1/p1 - alpha2/p2)/lambda`; undefined at `lambda = 0`.
    pub gamma: Option<f64>,
    /// Exponent condition `n+1+beta > n max(1, 1/p_j) + (1+alpha_j)/p_j`,
    /// recorded per j = 1, 2. Failure is a flag, not an error.
    pub hypothesis: [bool; 2],
}

/// Fill the derived parameters `(lambda, gamma)` and the hypothesis flags.
pub fn derive_params(
    n: usize,
    p1: f64,
    alpha1: f64,
    p2: f64,
    alpha2: f64,
    beta: f64,
) -> Result<OperatorParams> {
    if p1 <= 0.0 || p2 <= 0.0 {
        return Err(Error::parameter("exponents p1, p2 must be > 0"));
    }
    if alpha1 <= -1.0 || alpha2 <= -1.0 {
        return Err(Error::parameter("weights alpha1, alpha2 must be > -1"));
    }
    let lambda = 1.0 + 1.0 / p1 - 1.0 / p2;
    let gamma = if lambda != 0.0 {
        Some((beta + alpha1 / p1 - alpha2 / p2) / lambda)
    } else {
        None
    };
    let nf = n as f64;
    let check = |p: f64, alpha: f64| nf + 1.0 + beta > nf * (1.0f64).max(1.0 / p) + (1.0 + alpha) / p;
    Ok(OperatorParams {
        n,
        p1,
        alpha1,
        p2,
        alpha2,
        beta,
        lambda,
        gamma,
        hypothesis: [check(p1, alpha1), check(p2, alpha2)],
    })
}

impl OperatorParams {
    pub fn hypothesis_holds(&self) -> bool {
        self.hypothesis[0] && self.hypothesis[1]
    }

    /// The skew-Carleson parameters matched to this operator.
    pub fn carleson_params(&self, r: f64) -> Result<CarlesonParams> {
        match self.gamma {
            Some(gamma) => CarlesonParams::new(self.lambda, gamma, r),
            None => Err(Error::Branch(
                "lambda = 0: gamma is undefined and no verdict is attached to this regime"
                    .to_string(),
            )),
        }
    }

    /// `(n+1+gamma) lambda`, the boundary exponent of the lower-bound chain.
    pub fn chain_exponent(&self) -> Option<f64> {
        self.gamma
            .map(|g| (self.n as f64 + 1.0 + g) * self.lambda)
    }
}

/// A test function: a finite combination of directional series
/// (kernel probes, vanishing probes, lattice atom sums, monomials).
#[derive(Debug, Clone)]
pub struct TestFunction {
    pub label: String,
    terms: Vec<(Complex64, DirectionalSeries)>,
}

impl TestFunction {
    pub fn single(label: impl Into<String>, series: DirectionalSeries) -> Self {
        TestFunction {
            label: label.into(),
            terms: vec![(Complex64::new(1.0, 0.0), series)],
        }
    }

    pub fn combination(
        label: impl Into<String>,
        terms: Vec<(Complex64, DirectionalSeries)>,
    ) -> Self {
        TestFunction {
            label: label.into(),
            terms,
        }
    }

    /// Kernel probe `f_a = K_beta(., a)`.
    pub fn kernel_probe(kp: &KernelParams, a: &Point) -> Result<Self> {
        Ok(Self::single(
            format!("kernel_probe(delta={:.3e})", 1.0 - a.norm_sq()),
            DirectionalSeries::kernel_probe(kp, a)?,
        ))
    }

    /// Normalized atom `f_a = delta(a)^tau k_{beta,a}` with
    /// `tau = (n+1+beta)/2 - (n+1+alpha1)/p1`.
    pub fn atom(kp: &KernelParams, op: &OperatorParams, a: &Point) -> Result<Self> {
        let tau = kp.exponent() / 2.0 - (kp.dim() as f64 + 1.0 + op.alpha1) / op.p1;
        let delta = 1.0 - a.norm_sq();
        let scale = delta.powf(tau) / kp.diagonal(a)?.sqrt();
        Ok(Self::single(
            format!("atom(delta={delta:.3e})"),
            DirectionalSeries::kernel_probe(kp, a)?.scaled(scale),
        ))
    }

    /// Compactness probe
    /// `f_k = delta(a_k)^((n+1+beta)-(n+1+alpha1)/p1) K_beta(., a_k)`.
    pub fn vanishing_probe(kp: &KernelParams, op: &OperatorParams, a: &Point) -> Result<Self> {
        let np1 = kp.dim() as f64 + 1.0;
        let exponent = (np1 + kp.beta()) - (np1 + op.alpha1) / op.p1;
        let delta = 1.0 - a.norm_sq();
        Ok(Self::single(
            format!("vanishing_probe(delta={delta:.3e})"),
            DirectionalSeries::kernel_probe(kp, a)?.scaled(delta.powf(exponent)),
        ))
    }

    /// Monomial `<z, e1>^degree`.
    pub fn monomial(n: usize, degree: usize) -> Self {
        let mut e1 = vec![Complex64::new(0.0, 0.0); n];
        e1[0] = Complex64::new(1.0, 0.0);
        Self::single(
            format!("monomial(deg={degree})"),
            DirectionalSeries::monomial(e1, degree),
        )
    }

    /// Random lattice combination `sum c_k delta(a_k)^tau k_{beta,a_k}` with
    /// `c` normalized in `l^{p1}`.
    pub fn atom_combination(
        kp: &KernelParams,
        op: &OperatorParams,
        lattice: &Lattice,
        seed: u64,
    ) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut coeffs: Vec<f64> = (0..lattice.centers.len())
            .map(|_| 2.0 * rng.gen::<f64>() - 1.0)
            .collect();
        let lp: f64 = coeffs
            .iter()
            .map(|c| c.abs().powf(op.p1))
            .sum::<f64>()
            .powf(1.0 / op.p1);
        if lp > 0.0 {
            for c in coeffs.iter_mut() {
                *c /= lp;
            }
        }
        let tau = kp.exponent() / 2.0 - (kp.dim() as f64 + 1.0 + op.alpha1) / op.p1;
        let mut terms = Vec::with_capacity(coeffs.len());
        for (a, c) in lattice.centers.iter().zip(&coeffs) {
            let delta = 1.0 - a.norm_sq();
            let scale = delta.powf(tau) / kp.diagonal(a)?.sqrt();
            terms.push((
                Complex64::new(c * scale, 0.0),
                DirectionalSeries::kernel_probe(kp, a)?,
            ));
        }
        Ok(Self::combination(
            format!("atom_combination(seed={seed})"),
            terms,
        ))
    }

    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        self.terms.iter().map(|(c, s)| c * s.eval(z)).sum()
    }

    /// Exact squared `A^2_alpha` norm through the pairwise moments.
    pub fn norm2_sq(&self, alpha: f64) -> Result<f64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for (ci, si) in &self.terms {
            for (cj, sj) in &self.terms {
                acc += ci * cj.conj() * si.pair(sj, alpha)?;
            }
        }
        Ok(acc.re.max(0.0))
    }

    /// Anchor of the dominant term (used to recenter norm quadrature).
    fn dominant_anchor(&self) -> Option<Point> {
        self.terms
            .iter()
            .filter(|(_, s)| crate::geometry::norm_sq(s.anchor()) < 1.0)
            .max_by(|(ca, sa), (cb, sb)| {
                let wa = ca.norm() / (1.0 - crate::geometry::norm_sq(sa.anchor()));
                let wb = cb.norm() / (1.0 - crate::geometry::norm_sq(sb.anchor()));
                wa.total_cmp(&wb)
            })
            .map(|(_, s)| Point::new(s.anchor().to_vec()))
    }

    /// `||f||_{p,alpha}` (smooth weight): exact for `p = 2`, otherwise
    /// recentered quadrature at the dominant anchor.
    pub fn norm(
        &self,
        kp: &KernelParams,
        p: f64,
        alpha: f64,
        rule: &QuadratureRule,
    ) -> Result<f64> {
        if p == 2.0 {
            return Ok(self.norm2_sq(alpha)?.sqrt());
        }
        let domain = kp.smooth_domain();
        let center = self.dominant_anchor().unwrap_or_else(|| Point::origin(kp.dim()));
        let adapted = if kp.dim() == 1 && center.abs() > 1e-12 {
            let c = center.as_complex();
            rule.adapted_to_peak(c.arg(), 1.0 - c.norm_sqr())?
        } else {
            rule.clone()
        };
        let (value, _) = adapted.integrate_recentered(domain, &center, alpha, |z| {
            self.eval(z).norm().powf(p)
        })?;
        Ok(value.powf(1.0 / p))
    }
}

/// `T_mu^beta f` as an exact `TestFunction` (diagonal for radial measures,
/// kernel sums for atomic ones).
pub fn toeplitz_image(
    domain: &ModelDomain,
    measure: &Measure,
    kp: &KernelParams,
    f: &TestFunction,
) -> Result<TestFunction> {
    if measure.dim() != kp.dim() || domain.dim() != kp.dim() {
        return Err(Error::parameter("dimension mismatch"));
    }
    match measure.kind() {
        MeasureKind::RadialDensity { t, scale } => {
            let terms = f
                .terms
                .iter()
                .map(|(c, s)| {
                    (
                        *c,
                        s.mapped(|k| radial_toeplitz_multiplier(kp, *t, *scale, k)),
                    )
                })
                .collect();
            Ok(TestFunction::combination(format!("T[{}]", f.label), terms))
        }
        MeasureKind::Atomic { points, weights }
        | MeasureKind::LatticeWeighted {
            centers: points,
            weights,
            ..
        } => {
            let mut terms = Vec::with_capacity(points.len());
            for (x, w) in points.iter().zip(weights) {
                let coeff = Complex64::new(*w, 0.0) * f.eval(x.coords());
                terms.push((coeff, DirectionalSeries::kernel_probe(kp, x)?));
            }
            Ok(TestFunction::combination(format!("T[{}]", f.label), terms))
        }
    }
}

/// `T_mu^beta f(z)` for a test function.
pub fn apply_toeplitz(
    domain: &ModelDomain,
    measure: &Measure,
    kp: &KernelParams,
    f: &TestFunction,
    z: &Point,
) -> Result<Complex64> {
    domain.check_point(z)?;
    Ok(toeplitz_image(domain, measure, kp, f)?.eval(z.coords()))
}

/// `T_mu^beta f(z)` for an arbitrary integrand, via quadrature (radial
/// measures) or the exact atom sum. Used as the independent route in tests.
pub fn apply_toeplitz_fn<F>(
    domain: &ModelDomain,
    measure: &Measure,
    kp: &KernelParams,
    f: F,
    z: &Point,
    rule: &QuadratureRule,
) -> Result<Complex64>
where
    F: Fn(&[Complex64]) -> Complex64,
{
    domain.check_point(z)?;
    let zc = z.coords().to_vec();
    match measure.kind() {
        MeasureKind::Atomic { points, weights }
        | MeasureKind::LatticeWeighted {
            centers: points,
            weights,
            ..
        } => {
            let mut acc = Complex64::new(0.0, 0.0);
            for (x, w) in points.iter().zip(weights) {
                acc += w * kp.eval_raw(&zc, x.coords()) * f(x.coords());
            }
            Ok(acc)
        }
        MeasureKind::RadialDensity { t, scale } => {
            let (value, _) = rule.integrate_recentered_complex(
                kp.smooth_domain(),
                z,
                *t,
                |w| kp.eval_raw(&zc, w) * f(w),
            )?;
            Ok(value * *scale)
        }
    }
}

/// Output of the lower-bound chain at one center.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LowerBoundProbe {
    pub delta: f64,
    /// `mu(B(a,r)) / delta(a)^((n+1+gamma) lambda)`, the certified proxy.
    pub probe: f64,
    /// `T_mu^beta f_a(a) = int |K_beta(a,w)|^2 dmu(w)`.
    pub toeplitz_at_center: f64,
    /// `||f_a||_{p1,alpha1}` for `f_a = K_beta(., a)`.
    pub test_norm: f64,
    pub ball_mass: f64,
}

/// Evaluate the lower-bound chain at `a` (requires `lambda >= 1`).
pub fn lower_bound_probe(
    domain: &ModelDomain,
    measure: &Measure,
    op: &OperatorParams,
    a: &Point,
    r: f64,
    rule: &QuadratureRule,
) -> Result<LowerBoundProbe> {
    if op.lambda < 1.0 {
        return Err(Error::Branch(format!(
            "lower-bound probe needs lambda >= 1 (got {}); use the lattice diagnostic instead",
            op.lambda
        )));
    }
    let kp = KernelParams::new(op.n, op.beta)?;
    let ball = KobayashiBall::new(domain, a.clone(), r)?;
    let mass = ball_mass(domain, measure, &ball)?;
    let delta = domain.boundary_distance(a)?;
    let exponent = op.chain_exponent().expect("lambda >= 1 implies gamma");
    let f_a = TestFunction::kernel_probe(&kp, a)?;
    let t_at_center = apply_toeplitz(domain, measure, &kp, &f_a, a)?.re;
    let test_norm = f_a.norm(&kp, op.p1, op.alpha1, rule)?;
    Ok(LowerBoundProbe {
        delta,
        probe: mass * delta.powf(-exponent),
        toeplitz_at_center: t_at_center,
        test_norm,
        ball_mass: mass,
    })
}

/// One row of the norm-estimate table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProbeRow {
    pub label: String,
    /// Boundary distance of the probe anchor, when the probe marches.
    pub delta: Option<f64>,
    pub norm_f: f64,
    pub norm_tf: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NormEstimate {
    /// `max ||T f|| / ||f||` over the family: a lower estimate of the
    /// operator norm by construction.
    pub estimate: f64,
    pub rows: Vec<ProbeRow>,
    pub skipped: Vec<String>,
}

/// Families used by [`estimate_operator_norm`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeFamily {
    KernelProbes,
    AtomCombinations,
    Polynomials,
    All,
}

/// Lower estimate of `||T_mu^beta||_{A^{p1}_{alpha1} -> A^{p2}_{alpha2}}`
/// over the structured test family.
pub fn estimate_operator_norm(
    domain: &ModelDomain,
    measure: &Measure,
    op: &OperatorParams,
    family: ProbeFamily,
    trials: usize,
    rule: &QuadratureRule,
    seed: u64,
    atom_lattice: Option<&Lattice>,
) -> Result<NormEstimate> {
    if trials == 0 {
        return Err(Error::parameter("trials must be >= 1"));
    }
    let kp = KernelParams::new(op.n, op.beta)?;
    let mut tests: Vec<(Option<f64>, TestFunction)> = Vec::new();
    if matches!(family, ProbeFamily::KernelProbes | ProbeFamily::All) {
        for delta in crate::fit::log_grid(3e-3, 0.3, 8) {
            let a = domain.radial_point(delta)?;
            tests.push((Some(delta), TestFunction::atom(&kp, op, &a)?));
        }
    }
    if matches!(family, ProbeFamily::AtomCombinations | ProbeFamily::All) {
        let built;
        let lattice = match atom_lattice {
            Some(l) => l,
            None => {
                built = crate::geometry::build_lattice(domain, 0.5, 0.12)?;
                &built
            }
        };
        for trial in 0..trials {
            tests.push((
                None,
                TestFunction::atom_combination(
                    &kp,
                    op,
                    lattice,
                    seed.wrapping_add(trial as u64),
                )?,
            ));
        }
    }
    if matches!(family, ProbeFamily::Polynomials | ProbeFamily::All) {
        for degree in 0..=3 {
            tests.push((None, TestFunction::monomial(op.n, degree)));
        }
    }
    let mut rows = Vec::with_capacity(tests.len());
    let mut skipped = Vec::new();
    let mut estimate: f64 = 0.0;
    for (delta, f) in &tests {
        let norm_f = f.norm(&kp, op.p1, op.alpha1, rule)?;
        if !(norm_f.is_finite() && norm_f > 1e-14) {
            skipped.push(format!("{}: zero or non-finite norm", f.label));
            continue;
        }
        let image = toeplitz_image(domain, measure, &kp, f)?;
        let norm_tf = image.norm(&kp, op.p2, op.alpha2, rule)?;
        let ratio = norm_tf / norm_f;
        estimate = estimate.max(ratio);
        rows.push(ProbeRow {
            label: f.label.clone(),
            delta: *delta,
            norm_f,
            norm_tf,
            ratio,
        });
    }
    Ok(NormEstimate {
        estimate,
        rows,
        skipped,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompactnessProbe {
    /// Fitted decay exponent of `||T f_k||` against `delta(a_k)`;
    /// positive means vanishing (compact).
    pub exponent: Option<f64>,
    pub fit: Option<PowerLawFit>,
    pub rows: Vec<(f64, f64)>,
    pub verdict: Verdict,
    pub note: Option<String>,
}

/// Default boundary sequence `a_k = (1 - 2^(-k)) e_1`, `k = 1..=count`.
pub fn default_compactness_centers(domain: &ModelDomain, count: usize) -> Result<Vec<Point>> {
    (1..=count)
        .map(|k| {
            let radius = 1.0 - 0.5f64.powi(k as i32);
            let delta = match domain.weight_convention() {
                crate::geometry::WeightConvention::Smooth => 1.0 - radius * radius,
                crate::geometry::WeightConvention::Euclidean => 1.0 - radius,
            };
            domain.radial_point(delta)
        })
        .collect()
}

/// Decay of `||T_mu^beta f_k||_{p2,alpha2}` along a boundary sequence.
pub fn compactness_probe(
    domain: &ModelDomain,
    measure: &Measure,
    op: &OperatorParams,
    centers: &[Point],
    rule: &QuadratureRule,
    slope_tol: f64,
) -> Result<CompactnessProbe> {
    if op.lambda < 1.0 {
        return Ok(CompactnessProbe {
            exponent: None,
            fit: None,
            rows: Vec::new(),
            verdict: Verdict::Vanishing,
            note: Some(
                "lambda < 1: every bounded operator on this branch is compact".to_string(),
            ),
        });
    }
    if centers.len() < 3 {
        return Ok(CompactnessProbe {
            exponent: None,
            fit: None,
            rows: Vec::new(),
            verdict: Verdict::Inconclusive,
            note: Some("too few centers for a decay fit".to_string()),
        });
    }
    let kp = KernelParams::new(op.n, op.beta)?;
    let mut rows = Vec::with_capacity(centers.len());
    for a in centers {
        let f_k = TestFunction::vanishing_probe(&kp, op, a)?;
        let image = toeplitz_image(domain, measure, &kp, &f_k)?;
        let norm_tf = image.norm(&kp, op.p2, op.alpha2, rule)?;
        rows.push((domain.boundary_distance(a)?, norm_tf));
    }
    let xs: Vec<f64> = rows.iter().map(|(d, _)| *d).collect();
    let ys: Vec<f64> = rows.iter().map(|(_, v)| *v).collect();
    let fit = fit_power_law(&xs, &ys);
    let (verdict, exponent) = match &fit {
        Some(f) if f.slope > slope_tol => (Verdict::Vanishing, Some(f.slope)),
        Some(f) if f.slope < -slope_tol => (Verdict::NotCarleson, Some(f.slope)),
        Some(f) => (Verdict::Carleson, Some(f.slope)),
        None => (Verdict::Inconclusive, None),
    };
    Ok(CompactnessProbe {
        exponent,
        fit,
        rows,
        verdict,
        note: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{classify_skew_carleson, GridSpec};
    use approx::assert_relative_eq;

    fn disk() -> ModelDomain {
        ModelDomain::disk()
    }

    fn rule() -> QuadratureRule {
        QuadratureRule::disk_tensor(96, 192, 4.0).unwrap()
    }

    #[test]
    fn parameter_map_examples() {
        let op = derive_params(1, 2.0, 0.0, 2.0, 0.0, 1.0).unwrap();
        assert_relative_eq!(op.lambda, 1.0);
        assert_relative_eq!(op.gamma.unwrap(), 1.0);
        assert!(op.hypothesis_holds());

        let op = derive_params(1, 1.0, 0.0, 2.0, 0.0, 0.0).unwrap();
        assert_relative_eq!(op.lambda, 1.5);
        assert_relative_eq!(op.gamma.unwrap(), 0.0);

        let op = derive_params(1, 2.0, 1.0, 3.0, 2.0, 1.0).unwrap();
        assert_relative_eq!(op.lambda, 7.0 / 6.0, epsilon = 1e-15);
        assert_relative_eq!(op.gamma.unwrap(), 5.0 / 7.0, epsilon = 1e-14);

        // lambda = 0: 1/p2 = 1 + 1/p1
        let op = derive_params(1, 1.0, 0.0, 0.5, 0.0, 2.0).unwrap();
        assert_relative_eq!(op.lambda, 0.0);
        assert!(op.gamma.is_none());
        assert!(op.carleson_params(0.5).is_err());
    }

    #[test]
    fn parameter_map_identity() {
        // (n+1+beta) + (n+1+alpha1)/p1 - (n+1+alpha2)/p2 = (n+1+gamma) lambda
        for (p1, a1, p2, a2, beta) in [
            (2.0, 0.0, 2.0, 0.0, 0.0),
            (2.0, 1.0, 3.0, 2.0, 1.0),
            (1.5, -0.5, 4.0, 0.7, 2.0),
            (0.7, 0.3, 0.9, -0.2, 3.0),
        ] {
            let op = derive_params(1, p1, a1, p2, a2, beta).unwrap();
            let lhs = (2.0 + beta) + (2.0 + a1) / p1 - (2.0 + a2) / p2;
            let rhs = (2.0 + op.gamma.unwrap()) * op.lambda;
            assert_relative_eq!(lhs, rhs, epsilon = 1e-13);
        }
    }

    #[test]
    fn hypothesis_flags() {
        // beta = 0, p = 2, alpha = 0, n = 1: 2 > 1 + 0.5 holds
        let op = derive_params(1, 2.0, 0.0, 2.0, 0.0, 0.0).unwrap();
        assert!(op.hypothesis_holds());
        // alpha1 large breaks j = 1
        let op = derive_params(1, 2.0, 1.5, 2.0, 0.0, 0.0).unwrap();
        assert!(!op.hypothesis[0] && op.hypothesis[1]);
    }

    #[test]
    fn identity_measure_acts_as_identity() {
        // mu = (1-|w|^2)^beta nu: T is the identity on holomorphics
        let d = disk();
        let r = rule();
        for beta in [0.0, 1.0] {
            let kp = KernelParams::new(1, beta).unwrap();
            let mu = Measure::radial_density(&d, beta, 1.0).unwrap();
            let f = TestFunction::monomial(1, 3);
            let z = Point::disk(0.4, -0.2);
            let tf = apply_toeplitz(&d, &mu, &kp, &f, &z).unwrap();
            let expected = z.as_complex().powi(3);
            assert!((tf - expected).norm() < 1e-12, "beta={beta}: {tf}");
            // and on kernel probes
            let a = Point::disk(0.7, 0.1);
            let probe = TestFunction::kernel_probe(&kp, &a).unwrap();
            let tf = apply_toeplitz(&d, &mu, &kp, &probe, &z).unwrap();
            let expected = kp.eval(&z, &a).unwrap();
            assert!(
                (tf - expected).norm() <= 1e-10 * expected.norm(),
                "beta={beta}: {tf} vs {expected}"
            );
            let _ = r;
        }
    }

    #[test]
    fn diagonal_route_matches_quadrature_route() {
        let d = disk();
        let r = rule();
        let kp = KernelParams::new(1, 1.0).unwrap();
        let mu = Measure::radial_density(&d, 0.5, 0.8).unwrap();
        let f = TestFunction::monomial(1, 2);
        let z = Point::disk(0.3, 0.5);
        let exact = apply_toeplitz(&d, &mu, &kp, &f, &z).unwrap();
        let quad = apply_toeplitz_fn(&d, &mu, &kp, |w| w[0].powi(2), &z, &r).unwrap();
        assert!((exact - quad).norm() <= 1e-8, "{exact} vs {quad}");
    }

    #[test]
    fn atomic_application_is_exact() {
        let d = disk();
        let kp = KernelParams::new(1, 0.0).unwrap();
        let a = Point::disk(0.5, 0.2);
        let mu = Measure::atomic(&d, vec![a.clone()], vec![1.0]).unwrap();
        let one = TestFunction::monomial(1, 0);
        let z = Point::disk(-0.3, 0.1);
        let tf = apply_toeplitz(&d, &mu, &kp, &one, &z).unwrap();
        let expected = kp.eval(&z, &a).unwrap();
        assert!((tf - expected).norm() <= 1e-12 * expected.norm());
        // T_nu 1 (0) = 1 for the Lebesgue measure and beta = 0
        let leb = Measure::lebesgue(&d);
        let t0 = apply_toeplitz(&d, &leb, &kp, &one, &Point::origin(1)).unwrap();
        assert_relative_eq!(t0.re, 1.0, epsilon = 1e-12);
        assert_relative_eq!(t0.im, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn linearity_in_the_measure() {
        let d = disk();
        let kp = KernelParams::new(1, 0.5).unwrap();
        let x1 = Point::disk(0.4, 0.0);
        let x2 = Point::disk(-0.1, 0.6);
        let mu1 = Measure::atomic(&d, vec![x1.clone()], vec![1.0]).unwrap();
        let mu2 = Measure::atomic(&d, vec![x2.clone()], vec![1.0]).unwrap();
        let combined = Measure::atomic(&d, vec![x1, x2], vec![2.0, 3.0]).unwrap();
        let f = TestFunction::monomial(1, 1);
        let z = Point::disk(0.2, 0.2);
        let lhs = apply_toeplitz(&d, &combined, &kp, &f, &z).unwrap();
        let rhs = 2.0 * apply_toeplitz(&d, &mu1, &kp, &f, &z).unwrap()
            + 3.0 * apply_toeplitz(&d, &mu2, &kp, &f, &z).unwrap();
        assert!((lhs - rhs).norm() <= 1e-14 * rhs.norm().max(1.0));
    }

    #[test]
    fn adjoint_identity_for_atomic_measures() {
        // (T_mu^beta f, h)_beta = int conj(h) f dmu
        let d = disk();
        let r = rule();
        let beta = 0.5;
        let kp = KernelParams::new(1, beta).unwrap();
        let atoms = vec![Point::disk(0.3, 0.1), Point::disk(-0.5, 0.4)];
        let weights = vec![0.7, 1.3];
        let mu = Measure::atomic(&d, atoms.clone(), weights.clone()).unwrap();
        let f = |w: &[Complex64]| w[0].powi(2) + 1.0;
        let h = |w: &[Complex64]| w[0] - Complex64::new(0.0, 0.5);
        let tf = TestFunction::monomial(1, 2);
        // T(w^2 + 1) = T(w^2) + T(1); build as the image of f directly
        let tf_full = {
            let t2 = toeplitz_image(&d, &mu, &kp, &tf).unwrap();
            let t0 = toeplitz_image(&d, &mu, &kp, &TestFunction::monomial(1, 0)).unwrap();
            move |w: &[Complex64]| t2.eval(w) + t0.eval(w)
        };
        let lhs = crate::kernels::duality_pairing(1, tf_full, h, beta, &r).unwrap();
        let rhs: Complex64 = atoms
            .iter()
            .zip(&weights)
            .map(|(x, w)| *w * h(x.coords()).conj() * f(x.coords()))
            .sum();
        assert!((lhs - rhs).norm() <= 1e-8, "{lhs} vs {rhs}");
    }

    #[test]
    fn estimate_is_one_for_identity_case() {
        let d = disk();
        let r = rule();
        for beta in [0.0, 1.0] {
            let op = derive_params(1, 2.0, beta, 2.0, beta, beta).unwrap();
            let mu = Measure::radial_density(&d, beta, 1.0).unwrap();
            let est =
                estimate_operator_norm(&d, &mu, &op, ProbeFamily::All, 2, &r, 11, None).unwrap();
            assert!(
                est.estimate <= 1.0 + 1e-12 && est.estimate >= 1.0 - 1e-4,
                "beta={beta}: estimate {}",
                est.estimate
            );
        }
    }

    #[test]
    fn estimate_scales_linearly() {
        let d = disk();
        let r = rule();
        let op = derive_params(1, 2.0, 0.0, 2.0, 0.0, 0.0).unwrap();
        let mu = Measure::lebesgue(&d);
        let half = mu.scaled(0.5).unwrap();
        let e1 = estimate_operator_norm(&d, &mu, &op, ProbeFamily::KernelProbes, 1, &r, 3, None)
            .unwrap()
            .estimate;
        let e2 = estimate_operator_norm(&d, &half, &op, ProbeFamily::KernelProbes, 1, &r, 3, None)
            .unwrap()
            .estimate;
        assert_relative_eq!(e2, 0.5 * e1, max_relative = 1e-10);
    }

    #[test]
    fn lower_bound_probe_shapes() {
        let d = disk();
        let r = rule();
        let op = derive_params(1, 2.0, 0.0, 2.0, 0.0, 0.0).unwrap();
        let leb = Measure::lebesgue(&d);
        // bounded case: probe stays O(1) along the boundary
        let deep = lower_bound_probe(&d, &leb, &op, &d.radial_point(1e-3).unwrap(), 0.5, &r)
            .unwrap();
        let shallow = lower_bound_probe(&d, &leb, &op, &d.radial_point(1e-1).unwrap(), 0.5, &r)
            .unwrap();
        let drift = (deep.probe / shallow.probe).ln() / (1e-1f64 / 1e-3).ln();
        assert!(drift.abs() < 0.1, "drift {drift}");
        assert!(deep.toeplitz_at_center > 0.0 && deep.test_norm > 0.0);
        // divergent case: grows like delta^-0.5
        let bad = Measure::radial_density(&d, -0.5, 1.0).unwrap();
        let pd = lower_bound_probe(&d, &bad, &op, &d.radial_point(1e-3).unwrap(), 0.5, &r)
            .unwrap();
        let ps = lower_bound_probe(&d, &bad, &op, &d.radial_point(1e-1).unwrap(), 0.5, &r)
            .unwrap();
        let slope = (pd.probe / ps.probe).ln() / (1e-3f64 / 1e-1).ln();
        assert!((slope + 0.5).abs() <= 0.1, "slope {slope}");
        // zero measure -> zero probe
        let zero = Measure::radial_density(&d, 0.0, 0.0).unwrap();
        let pz = lower_bound_probe(&d, &zero, &op, &d.radial_point(1e-2).unwrap(), 0.5, &r)
            .unwrap();
        assert_eq!(pz.probe, 0.0);
        assert_eq!(pz.toeplitz_at_center, 0.0);
        // lambda < 1 branch is rejected
        let op_low = derive_params(1, 3.0, 0.0, 2.0, 0.0, 1.0).unwrap();
        assert!(op_low.lambda < 1.0);
        assert!(matches!(
            lower_bound_probe(&d, &leb, &op_low, &Point::disk(0.5, 0.0), 0.5, &r),
            Err(Error::Branch(_))
        ));
    }

    #[test]
    fn compactness_probe_ground_truth() {
        let d = disk();
        let r = rule();
        let op = derive_params(1, 2.0, 0.0, 2.0, 0.0, 0.0).unwrap();
        let centers = default_compactness_centers(&d, 10).unwrap();
        let grid = GridSpec::default();
        // vanishing measure: exponent +1/2 and verdict agreement
        let mu = Measure::radial_density(&d, 0.5, 1.0).unwrap();
        let probe = compactness_probe(&d, &mu, &op, &centers, &r, 0.1).unwrap();
        assert_eq!(probe.verdict, Verdict::Vanishing);
        assert!(
            (probe.exponent.unwrap() - 0.5).abs() <= 0.1,
            "exponent {:?}",
            probe.exponent
        );
        let cls = classify_skew_carleson(&d, &mu, &op.carleson_params(0.5).unwrap(), &grid, &r, 0.1)
            .unwrap();
        assert_eq!(cls.verdict, Verdict::Vanishing);
        // Lebesgue: exponent 0, bounded but not vanishing
        let leb = Measure::lebesgue(&d);
        let probe = compactness_probe(&d, &leb, &op, &centers, &r, 0.1).unwrap();
        assert_eq!(probe.verdict, Verdict::Carleson);
        assert!(probe.exponent.unwrap().abs() <= 0.1, "{:?}", probe.exponent);
        // compactly supported measure decays at least at the probe exponent
        let inner = Measure::atomic(
            &d,
            vec![Point::disk(0.3, 0.0), Point::disk(0.0, 0.2)],
            vec![1.0, 1.0],
        )
        .unwrap();
        let probe = compactness_probe(&d, &inner, &op, &centers, &r, 0.1).unwrap();
        let floor = (2.0 + op.beta) - (2.0 + op.alpha1) / op.p1; // n+1+beta - (n+1+alpha1)/p1
        assert!(
            probe.exponent.unwrap() >= floor - 0.1,
            "exponent {:?} < {floor}",
            probe.exponent
        );
        // lambda < 1 short-circuits to vanishing
        let op_low = derive_params(1, 3.0, 0.0, 2.0, 0.0, 1.0).unwrap();
        let probe = compactness_probe(&d, &leb, &op_low, &centers, &r, 0.1).unwrap();
        assert_eq!(probe.verdict, Verdict::Vanishing);
    }

    #[test]
    fn norm_consistency_p2_exact_vs_quadrature() {
        // the two norm routes agree on a kernel probe
        let r = rule();
        let kp = KernelParams::new(1, 0.0).unwrap();
        let a = Point::disk(0.85, 0.0);
        let f = TestFunction::kernel_probe(&kp, &a).unwrap();
        let exact = f.norm(&kp, 2.0, 0.5, &r).unwrap();
        let sp = crate::kernels::SpaceParams::new(2.0, 0.5).unwrap();
        let quad = kp.norm_recentered(|z| f.eval(z), &sp, &a, &r).unwrap();
        assert_relative_eq!(exact, quad, max_relative = 1e-7);
    }
}
