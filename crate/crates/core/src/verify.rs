//! Built-in acceptance battery: every criterion the artifact must satisfy,
//! each with its tolerance pinned in code, runnable through `skewlab
//! verify` and mirrored one-to-one by the `acceptance` integration tests.
//!
//! Each criterion returns a [`CriterionResult`] with the measured numbers
//! in `details`, so a failing run says what was observed, not just that it
//! failed.

use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::fit::{fit_power_law, log_grid, PowerLawFit};
use crate::geometry::{
    ball_volume, ball_volume_quadrature, sample_unit_ball, build_lattice, KobayashiBall, Lattice,
    ModelDomain, Point,
};
use crate::kernels::{KernelParams, SpaceParams};
use crate::measures::{
    classify_skew_carleson, berezin_diagnostic, berezin_transform, lattice_diagnostic,
    skew_carleson_norm, reweight, CarlesonParams, GridSpec, Measure, Verdict,
};
use crate::quadrature::{monte_carlo_oracle, QuadratureRule};
use crate::report::{CriterionResult, Report};
use crate::toeplitz::{
    compactness_probe, default_compactness_centers, derive_params, estimate_operator_norm,
    lower_bound_probe, OperatorParams, ProbeFamily,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Everything criterion 8 needs from one (measure, operator) pair.
pub struct SandwichOutput {
    pub lower_sup: f64,
    /// `(delta, probe, T f_a(a))` along the boundary sweep.
    pub lower_rows: Vec<(f64, f64, f64)>,
    pub lower_fit: Option<PowerLawFit>,
    pub lower_bounded: bool,
    pub estimate: f64,
    pub estimate_rows: Vec<crate::toeplitz::ProbeRow>,
    pub estimate_fit: Option<PowerLawFit>,
    pub estimate_bounded: bool,
    pub skew_norm: f64,
    pub skew_bounded: bool,
    pub classify_verdict: Verdict,
    /// All three bounded/divergent flags agree.
    pub agreement: bool,
}

/// Run the two-sided sandwich for one (measure, operator) pair:
/// lower-bound chain, structured norm estimate, and skew-Carleson norm,
/// each with its own bounded/divergent call.
#[allow(clippy::too_many_arguments)]
pub(crate) fn sandwich_run(
    domain: &ModelDomain,
    measure: &Measure,
    op: &OperatorParams,
    grid: &GridSpec,
    rule: &QuadratureRule,
    slope_tol: f64,
    atom_lattice: Option<&Lattice>,
    seed: u64,
) -> Result<SandwichOutput> {
    let cp = op.carleson_params(0.5)?;
    // lower-bound chain along the boundary (the chain assumes delta <= 0.1)
    let mut lower_rows = Vec::new();
    for delta in log_grid(grid.deep, grid.shallow.min(0.1), 10) {
        let a = domain.radial_point(delta)?;
        let probe = lower_bound_probe(domain, measure, op, &a, cp.r, rule)?;
        lower_rows.push((delta, probe.probe, probe.toeplitz_at_center));
    }
    let lower_sup = lower_rows.iter().map(|(_, p, _)| *p).fold(0.0f64, f64::max);
    let xs: Vec<f64> = lower_rows.iter().map(|(d, _, _)| *d).collect();
    let ys: Vec<f64> = lower_rows.iter().map(|(_, p, _)| *p).collect();
    let lower_fit = fit_power_law(&xs, &ys);
    let lower_bounded = lower_fit
        .as_ref()
        .map(|f| f.slope >= -slope_tol)
        .unwrap_or(false)
        && lower_sup.is_finite();

    // structured norm estimate; boundedness read off the marching probes
    let estimate = estimate_operator_norm(
        domain,
        measure,
        op,
        ProbeFamily::All,
        2,
        rule,
        seed,
        atom_lattice,
    )?;
    let marching: Vec<(f64, f64)> = estimate
        .rows
        .iter()
        .filter_map(|r| r.delta.map(|d| (d, r.ratio)))
        .collect();
    let xs: Vec<f64> = marching.iter().map(|(d, _)| *d).collect();
    let ys: Vec<f64> = marching.iter().map(|(_, v)| *v).collect();
    let estimate_fit = fit_power_law(&xs, &ys);
    let estimate_bounded = estimate_fit
        .as_ref()
        .map(|f| f.slope >= -slope_tol)
        .unwrap_or(false)
        && estimate.estimate.is_finite();

    // skew-Carleson side
    let norm_grid: Vec<Point> = domain.boundary_grid(grid.deep, 0.3, 2 * grid.count)?;
    let skew = skew_carleson_norm(domain, measure, &cp, &norm_grid, rule)?;
    let classification = classify_skew_carleson(domain, measure, &cp, grid, rule, slope_tol)?;
    let skew_bounded = classification.verdict.is_bounded();

    let agreement = lower_bounded == estimate_bounded && estimate_bounded == skew_bounded;
    Ok(SandwichOutput {
        lower_sup,
        lower_rows,
        lower_fit,
        lower_bounded,
        estimate: estimate.estimate,
        estimate_rows: estimate.rows,
        estimate_fit,
        estimate_bounded,
        skew_norm: skew.value,
        skew_bounded,
        classify_verdict: classification.verdict,
        agreement,
    })
}

fn finish(id: u32, name: &str, passed: bool, details: String, start: std::time::Instant) -> CriterionResult {
    CriterionResult {
        id,
        name: name.to_string(),
        passed,
        details,
        elapsed_ms: start.elapsed().as_millis() as u64,
    }
}

fn fail(id: u32, name: &str, err: impl std::fmt::Display, start: std::time::Instant) -> CriterionResult {
    finish(id, name, false, format!("error: {err}"), start)
}

fn interior_points(count: usize, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let radius = 0.8 * rng.gen::<f64>().sqrt();
            let angle = 2.0 * std::f64::consts::PI * rng.gen::<f64>();
            Point::disk(radius * angle.cos(), radius * angle.sin())
        })
        .collect()
}

/// Criterion 1: `P_beta` reproduces monomials of degree <= 5 at 20 interior
/// points, relative error < 1e-6, for beta in {0, 0.5, 1, 2}; under 10 s.
pub fn criterion_reproducing(config: &ExperimentConfig) -> CriterionResult {
    let start = std::time::Instant::now();
    let name = "reproducing_property";
    let run = || -> Result<(bool, String)> {
        let domain = ModelDomain::disk();
        let rule = config.build_rule(&domain)?;
        let points = interior_points(20, config.seed.wrapping_add(1));
        let betas = [0.0, 0.5, 1.0, 2.0];
        let worst = betas
            .par_iter()
            .map(|beta| -> Result<f64> {
                let kp = KernelParams::new(1, *beta)?;
                let mut worst = 0.0f64;
                for degree in 0..=5u32 {
                    for z in &points {
                        let projected =
                            kp.project(|w| w[0].powi(degree as i32), z, &rule)?;
                        let expected = z.as_complex().powi(degree as i32);
                        let scale = expected.norm().max(1e-3);
                        worst = worst.max((projected - expected).norm() / scale);
                    }
                }
                Ok(worst)
            })
            .try_reduce(|| 0.0f64, |a, b| Ok(a.max(b)))?;
        let in_time = start.elapsed().as_secs_f64() < 10.0;
        Ok((
            worst < 1e-6 && in_time,
            format!(
                "max relative error {worst:.3e} over 4 betas x 6 degrees x 20 points \
                 (limit 1e-6); within the 10s budget: {in_time}"
            ),
        ))
    };
    match run() {
        Ok((passed, details)) => finish(1, name, passed, details, start),
        Err(e) => fail(1, name, e, start),
    }
}

/// Criterion 2: `||k_{beta,a}||_{2,beta} = 1 +- 1e-6` for
/// `a in {0, 0.5, 0.9, 0.99}` and `beta in {0, 1}`.
pub fn criterion_normalization(config: &ExperimentConfig) -> CriterionResult {
    let start = std::time::Instant::now();
    let name = "kernel_normalization";
    let run = || -> Result<(bool, String)> {
        let domain = ModelDomain::disk();
        let rule = config.build_rule(&domain)?;
        let mut worst = 0.0f64;
        for beta in [0.0, 1.0] {
            let kp = KernelParams::new(1, beta)?;
            let sp = SpaceParams::new(2.0, beta)?;
            for abs_a in [0.0, 0.5, 0.9, 0.99] {
                let a = Point::disk(abs_a, 0.0);
                let ac = a.coords().to_vec();
                let norm =
                    kp.norm_recentered(|z| kp.normalized_raw(&ac, z), &sp, &a, &rule)?;
                worst = worst.max((norm - 1.0).abs());
            }
        }
        Ok((
            worst < 1e-6,
            format!("max |norm - 1| = {worst:.3e} over 8 cases (limit 1e-6)"),
        ))
    };
    match run() {
        Ok((passed, details)) => finish(2, name, passed, details, start),
        Err(e) => fail(2, name, e, start),
    }
}

/// Criterion 3: `B^2 nu = 1 +- 1e-6` at 20 points including `delta = 1e-3`.
pub fn criterion_berezin_identity(config: &ExperimentConfig) -> CriterionResult {
    let start = std::time::Instant::now();
    let name = "berezin_identity";
    let run = || -> Result<(bool, String)> {
        let domain = ModelDomain::disk();
        let rule = config.build_rule(&domain)?;
        let leb = Measure::lebesgue(&domain);
        let mut points: Vec<Point> = log_grid(1e-3, 0.9, 17)
            .into_iter()
            .map(|d| domain.radial_point(d))
            .collect::<Result<_>>()?;
        points.push(Point::disk(-0.4, 0.7));
        points.push(Point::disk(0.1, -0.95));
        points.push(Point::disk(-0.88, -0.3));
        let mut worst = 0.0f64;
        for z in &points {
            let b = berezin_transform(&domain, &leb, z, 2.0, &rule)?;
            worst = worst.max((b - 1.0).abs());
        }
        Ok((
            worst < 1e-6,
            format!(
                "max |B^2 nu - 1| = {worst:.3e} over {} points incl. delta = 1e-3 (limit 1e-6)",
                points.len()
            ),
        ))
    };
    match run() {
        Ok((passed, details)) => finish(3, name, passed, details, start),
        Err(e) => fail(3, name, e, start),
    }
}

/// Criterion 4: disk ball volumes match the closed form within 1e-6
/// relative (independent quadrature route) and the Monte Carlo oracle
/// within 3 s.e.; the weighted-volume exponent fits `n+1+beta +- 0.05`.
pub fn criterion_geometry(config: &ExperimentConfig) -> CriterionResult {
    let start = std::time::Instant::now();
    let name = "geometry_exactness";
    let run = || -> Result<(bool, String)> {
        let domain = ModelDomain::disk();
        let mut worst_rel = 0.0f64;
        let mut worst_sigma = 0.0f64;
        for (i, (abs_a, r)) in [(0.0, 0.5), (0.5, 0.3), (0.9, 0.5), (0.97, 0.7)]
            .into_iter()
            .enumerate()
        {
            let ball = KobayashiBall::new(&domain, Point::disk(abs_a, 0.0), r)?;
            let closed = ball.lebesgue_volume(&domain);
            let quad = ball_volume_quadrature(&domain, &ball, 0.0)?;
            worst_rel = worst_rel.max((quad - closed).abs() / closed);
            let (mc, se) = monte_carlo_oracle(
                &domain,
                0.0,
                1_000_000,
                config.seed.wrapping_add(40 + i as u64),
                |z| {
                    if crate::geometry::pseudo_hyperbolic_raw(ball.center.coords(), z) < r {
                        1.0
                    } else {
                        0.0
                    }
                },
            )?;
            worst_sigma = worst_sigma.max((mc - closed).abs() / se);
        }
        // weighted-volume exponent
        let mut worst_slope = 0.0f64;
        for beta in [0.0, 0.5, 1.0] {
            let deltas = log_grid(1e-3, 1e-1, 12);
            let mut volumes = Vec::with_capacity(deltas.len());
            for d in &deltas {
                let ball = KobayashiBall::new(&domain, domain.radial_point(*d)?, 0.5)?;
                volumes.push(ball_volume(&domain, &ball, beta)?);
            }
            let fit = fit_power_law(&deltas, &volumes).expect("fit");
            worst_slope = worst_slope.max((fit.slope - (2.0 + beta)).abs());
        }
        let passed = worst_rel < 1e-6 && worst_sigma <= 3.0 && worst_slope <= 0.05;
        Ok((
            passed,
            format!(
                "closed-vs-quadrature rel {worst_rel:.3e} (limit 1e-6), Monte Carlo \
                 {worst_sigma:.2} s.e. (limit 3), volume exponent off by {worst_slope:.3} \
                 (limit 0.05)"
            ),
        ))
    };
    match run() {
        Ok((passed, details)) => finish(4, name, passed, details, start),
        Err(e) => fail(4, name, e, start),
    }
}

/// Criterion 5: kernel integral slopes for (p, alpha, beta) in
/// {(2,0,0), (2,1,0), (3,0,1)} within 0.05 of
/// `alpha - beta - (n+beta+1)(p-1)`, and the two-sided ball bound stays in
/// one interval along the boundary.
pub fn criterion_kernel_estimates(config: &ExperimentConfig) -> CriterionResult {
    let start = std::time::Instant::now();
    let name = "kernel_estimates";
    let run = || -> Result<(bool, String)> {
        let domain = ModelDomain::disk();
        let rule = config.build_rule(&domain)?;
        let cases = [(2.0, 0.0, 0.0), (2.0, 1.0, 0.0), (3.0, 0.0, 1.0)];
        let slope_results: Vec<Result<(f64, f64)>> = cases
            .par_iter()
            .map(|(p, alpha, beta)| -> Result<(f64, f64)> {
                let kp = KernelParams::new(1, *beta)?;
                let want = alpha - beta - (1.0 + beta + 1.0) * (p - 1.0);
                let deltas = log_grid(1e-3, 1e-1, 12);
                let mut values = Vec::with_capacity(deltas.len());
                for d in &deltas {
                    let z0 = domain.radial_point(*d)?;
                    values.push(kp.kernel_integral_estimate(&z0, *p, *alpha, &rule)?);
                }
                let fit = fit_power_law(&deltas, &values).expect("fit");
                Ok((fit.slope, want))
            })
            .collect();
        let mut worst_slope = 0.0f64;
        let mut details_slopes = String::new();
        for (case, res) in cases.iter().zip(slope_results) {
            let (got, want) = res?;
            worst_slope = worst_slope.max((got - want).abs());
            details_slopes.push_str(&format!("{case:?}: {got:.3} vs {want:.3}; "));
        }
        // two-sided ball bound for beta in {0, 1}, delta(a) <= 0.1
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(5));
        let mut spread = 0.0f64;
        for beta in [0.0, 1.0] {
            let kp = KernelParams::new(1, beta)?;
            let mut lo = f64::INFINITY;
            let mut hi = 0.0f64;
            for delta in log_grid(1e-3, 1e-1, 8) {
                let a = domain.radial_point(delta)?;
                let ball = KobayashiBall::new(&domain, a.clone(), 0.5)?;
                let ell = ball.ellipsoid(&domain);
                let scale = domain.smooth_delta(&a).powf(kp.exponent());
                for _ in 0..100 {
                    let u = sample_unit_ball(1, &mut rng);
                    let z = Point::new(ell.map(&u));
                    let v = kp.eval(&z, &a)?.norm() * scale;
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
            }
            spread = spread.max(hi / lo);
        }
        let passed = worst_slope <= 0.05 && spread < 1e3;
        Ok((
            passed,
            format!(
                "slopes: {details_slopes}max deviation {worst_slope:.3} (limit 0.05); \
                 ball-bound spread {spread:.1} (limit 1e3)"
            ),
        ))
    };
    match run() {
        Ok((passed, details)) => finish(5, name, passed, details, start),
        Err(e) => fail(5, name, e, start),
    }
}

/// Criterion 6: classifier ground truth for `mu = delta^t nu`,
/// `t in {-0.5, 0, 0.5}` at `(lambda, gamma) = (1, 0)`: verdicts
/// {not_carleson, carleson, vanishing}, slopes within 0.1, invariant under
/// `r in {0.3, 0.5, 0.7}`; under 60 s.
pub fn criterion_carleson_ground_truth(config: &ExperimentConfig) -> CriterionResult {
    let start = std::time::Instant::now();
    let name = "carleson_ground_truth";
    let run = || -> Result<(bool, String)> {
        let domain = ModelDomain::disk();
        let rule = config.build_rule(&domain)?;
        let grid = GridSpec::default();
        let cases = [
            (-0.5, Verdict::NotCarleson),
            (0.0, Verdict::Carleson),
            (0.5, Verdict::Vanishing),
        ];
        let mut all_ok = true;
        let mut details = String::new();
        for (t, expected) in cases {
            let mu = Measure::radial_density(&domain, t, 1.0)?;
            let mut verdicts = Vec::new();
            let mut slope_dev = 0.0f64;
            for r in [0.3, 0.5, 0.7] {
                let cp = CarlesonParams::new(1.0, 0.0, r)?;
                let cls = classify_skew_carleson(&domain, &mu, &cp, &grid, &rule, 0.1)?;
                slope_dev =
                    slope_dev.max((cls.fit.as_ref().map(|f| f.slope).unwrap_or(f64::NAN) - t).abs());
                verdicts.push(cls.verdict);
            }
            let ok = verdicts.iter().all(|v| *v == expected) && slope_dev <= 0.1;
            all_ok &= ok;
            details.push_str(&format!(
                "t={t}: verdicts {:?} (want {expected}), slope off {slope_dev:.3}; ",
                verdicts
            ));
        }
        let in_time = start.elapsed().as_secs_f64() < 60.0;
        all_ok &= in_time;
        details.push_str(&format!("within the 60s budget: {in_time}"));
        Ok((all_ok, details))
    };
    match run() {
        Ok((passed, details)) => finish(6, name, passed, details, start),
        Err(e) => fail(6, name, e, start),
    }
}

/// Criterion 7: sup/integral, lattice and Berezin diagnostics agree on a
/// battery spanning `lambda in {0.75, 1, 1.5}` (`lambda < 1` uses the
/// integral and sequence diagnostics, which must also be comparable within
/// a factor 10).
pub fn criterion_cross_consistency(config: &ExperimentConfig) -> CriterionResult {
    let start = std::time::Instant::now();
    let name = "diagnostic_cross_consistency";
    let run = || -> Result<(bool, String)> {
        let domain = ModelDomain::disk();
        let rule = config.build_rule(&domain)?;
        let grid = GridSpec::default();
        let lattice = build_lattice(&domain, 0.5, 5e-3)?;
        let battery: Vec<(Measure, f64, f64, Verdict)> = vec![
            (Measure::lebesgue(&domain), 1.0, 0.0, Verdict::Carleson),
            (
                Measure::radial_density(&domain, 0.5, 1.0)?,
                1.0,
                0.0,
                Verdict::Vanishing,
            ),
            (
                Measure::radial_density(&domain, -0.5, 1.0)?,
                1.0,
                0.0,
                Verdict::NotCarleson,
            ),
            (
                Measure::radial_density(&domain, 1.0, 1.0)?,
                1.5,
                0.0,
                Verdict::Carleson,
            ),
            (
                Measure::radial_density(&domain, 1.5, 1.0)?,
                1.5,
                0.0,
                Verdict::Vanishing,
            ),
            (Measure::lebesgue(&domain), 1.5, 0.0, Verdict::NotCarleson),
            (Measure::lebesgue(&domain), 0.75, 0.0, Verdict::Carleson),
            (
                Measure::radial_density(&domain, -0.4, 1.0)?,
                0.75,
                0.0,
                Verdict::NotCarleson,
            ),
        ];
        let mut all_ok = true;
        let mut details = String::new();
        let mut comparability = 0.0f64;
        for (mu, lambda, gamma, expected) in &battery {
            let cp = CarlesonParams::new(*lambda, *gamma, 0.5)?;
            let sup = classify_skew_carleson(&domain, mu, &cp, &grid, &rule, 0.15)?;
            let lat = lattice_diagnostic(&domain, mu, &lattice, &cp, 0.15)?;
            let mut verdicts = vec![sup.verdict, lat.verdict];
            if *lambda >= 1.0 {
                let ber = berezin_diagnostic(&domain, mu, &cp, None, &grid, &rule, 0.15)?;
                verdicts.push(ber.verdict);
            } else {
                // on this branch the continuous and sequence norms
                // must be finite together and comparable
                let ray: Vec<Point> = domain.boundary_grid(grid.deep, 0.3, grid.count)?;
                let cont = skew_carleson_norm(&domain, mu, &cp, &ray, &rule)?;
                if lat.values.last().map(|(_, v)| *v).unwrap_or(0.0) > 0.0 {
                    let seq = lat.values.last().unwrap().1;
                    let ratio = (cont.value / seq).max(seq / cont.value);
                    comparability = comparability.max(ratio);
                }
            }
            let ok = verdicts.iter().all(|v| v == expected);
            all_ok &= ok;
            details.push_str(&format!(
                "(lambda={lambda}, t={:?}): {:?} want {expected}; ",
                mu.radial().map(|(t, _)| t),
                verdicts
            ));
        }
        all_ok &= comparability <= 10.0;
        details.push_str(&format!(
            "lambda<1 continuous/sequence comparability {comparability:.2} (limit 10)"
        ));
        Ok((all_ok, details))
    };
    match run() {
        Ok((passed, details)) => finish(7, name, passed, details, start),
        Err(e) => fail(7, name, e, start),
    }
}

/// The criterion-8 battery: (measure, operator) pairs satisfying the
/// exponent hypothesis, mixing bounded and divergent cases.
fn sandwich_battery(domain: &ModelDomain) -> Result<Vec<(String, Measure, OperatorParams, bool)>> {
    let atoms_ok = Measure::boundary_atoms(domain, 8, 2.0, 0.25, 0.5)?;
    let atoms_heavy = Measure::boundary_atoms(domain, 8, 3.0, 0.25, 0.5)?;
    Ok(vec![
        (
            "lebesgue@(2,0,2,0,0)".into(),
            Measure::lebesgue(domain),
            derive_params(1, 2.0, 0.0, 2.0, 0.0, 0.0)?,
            true,
        ),
        (
            "identity nu_1@(2,1,2,1,1)".into(),
            Measure::radial_density(domain, 1.0, 1.0)?,
            derive_params(1, 2.0, 1.0, 2.0, 1.0, 1.0)?,
            true,
        ),
        (
            "delta^0.5@(2,0,2,0,0)".into(),
            Measure::radial_density(domain, 0.5, 1.0)?,
            derive_params(1, 2.0, 0.0, 2.0, 0.0, 0.0)?,
            true,
        ),
        (
            "delta^-0.5@(2,0,2,0,0)".into(),
            Measure::radial_density(domain, -0.5, 1.0)?,
            derive_params(1, 2.0, 0.0, 2.0, 0.0, 0.0)?,
            false,
        ),
        (
            "lebesgue@(2,0,3,0,0)".into(),
            Measure::lebesgue(domain),
            derive_params(1, 2.0, 0.0, 3.0, 0.0, 0.0)?,
            false,
        ),
        (
            "delta^1@(2,0,3,0,0)".into(),
            Measure::radial_density(domain, 1.0, 1.0)?,
            derive_params(1, 2.0, 0.0, 3.0, 0.0, 0.0)?,
            true,
        ),
        (
            "atoms s=2@(2,0,2,0,0)".into(),
            atoms_ok,
            derive_params(1, 2.0, 0.0, 2.0, 0.0, 0.0)?,
            true,
        ),
        (
            "atoms s=3@(2,0,2,0,1)".into(),
            atoms_heavy,
            derive_params(1, 2.0, 0.0, 2.0, 0.0, 1.0)?,
            true,
        ),
        (
            "delta^1@(2,1,2,0,1)".into(),
            Measure::radial_density(domain, 1.0, 1.0)?,
            derive_params(1, 2.0, 1.0, 2.0, 0.0, 1.0)?,
            false,
        ),
    ])
}

/// Criterion 8: on >= 8 hypothesis-satisfying pairs the three sandwich
/// quantities are simultaneously bounded or divergent, bounded triples have
/// pairwise ratios within `[1e-2, 1e2]`, and the identity pair's estimate
/// lies in `[1 - 1e-4, 1]`; under 5 min.
pub fn criterion_sandwich(config: &ExperimentConfig) -> CriterionResult {
    let start = std::time::Instant::now();
    let name = "norm_sandwich";
    let run = || -> Result<(bool, String)> {
        let domain = ModelDomain::disk();
        let rule = config.build_rule(&domain)?;
        let grid = GridSpec::default();
        let cap = config.thresholds.ratio_cap;
        let lattice = build_lattice(&domain, 0.5, 0.12)?;
        let battery = sandwich_battery(&domain)?;
        for (label, _, op, _) in &battery {
            assert!(op.hypothesis_holds(), "battery pair {label} violates the hypothesis");
        }
        let outputs: Vec<Result<SandwichOutput>> = battery
            .par_iter()
            .map(|(_, mu, op, _)| {
                sandwich_run(
                    &domain,
                    mu,
                    op,
                    &grid,
                    &rule,
                    config.thresholds.slope_tol,
                    Some(&lattice),
                    config.seed,
                )
            })
            .collect();
        let mut all_ok = true;
        let mut details = String::new();
        for ((label, _, _, expect_bounded), output) in battery.iter().zip(outputs) {
            let s = output?;
            let mut ok = s.agreement && s.lower_bounded == *expect_bounded;
            let mut ratio_note = String::new();
            if s.lower_bounded && s.agreement {
                let trio = [s.lower_sup, s.estimate, s.skew_norm];
                for i in 0..3 {
                    for j in (i + 1)..3 {
                        let ratio = trio[i] / trio[j];
                        if !(ratio >= 1.0 / cap && ratio <= cap) {
                            ok = false;
                            ratio_note = format!(" ratio {:.2e} out of cap", ratio);
                        }
                    }
                }
            }
            if label.starts_with("identity") {
                ok &= s.estimate >= 1.0 - 1e-4 && s.estimate <= 1.0 + 1e-12;
            }
            all_ok &= ok;
            details.push_str(&format!(
                "{label}: [{:.2e}, {:.2e}, {:.2e}] bounded=({},{},{}){ratio_note}; ",
                s.lower_sup,
                s.estimate,
                s.skew_norm,
                s.lower_bounded,
                s.estimate_bounded,
                s.skew_bounded
            ));
        }
        let in_time = start.elapsed().as_secs_f64() < 300.0;
        all_ok &= in_time;
        details.push_str(&format!("within the 300s budget: {in_time}"));
        Ok((all_ok, details))
    };
    match run() {
        Ok((passed, details)) => finish(8, name, passed, details, start),
        Err(e) => fail(8, name, e, start),
    }
}

/// Criterion 9: compactness probe decay `+0.5 +- 0.1` for
/// `mu = delta^0.5 nu` and `0 +- 0.1` for Lebesgue, with verdicts matching
/// the classifier.
pub fn criterion_compactness(config: &ExperimentConfig) -> CriterionResult {
    let start = std::time::Instant::now();
    let name = "compactness_probe";
    let run = || -> Result<(bool, String)> {
        let domain = ModelDomain::disk();
        let rule = config.build_rule(&domain)?;
        let op = derive_params(1, 2.0, 0.0, 2.0, 0.0, 0.0)?;
        let centers = default_compactness_centers(&domain, 10)?;
        let grid = GridSpec::default();
        let mut all_ok = true;
        let mut details = String::new();
        for (t, want_exponent, want_vanishing) in [(0.5, 0.5, true), (0.0, 0.0, false)] {
            let mu = Measure::radial_density(&domain, t, 1.0)?;
            let probe = compactness_probe(&domain, &mu, &op, &centers, &rule, 0.1)?;
            let cls = classify_skew_carleson(
                &domain,
                &mu,
                &op.carleson_params(0.5)?,
                &grid,
                &rule,
                0.1,
            )?;
            let exponent = probe.exponent.unwrap_or(f64::NAN);
            let probe_vanishing = probe.verdict == Verdict::Vanishing;
            let classify_vanishing = cls.verdict == Verdict::Vanishing;
            let ok = (exponent - want_exponent).abs() <= 0.1
                && probe_vanishing == want_vanishing
                && classify_vanishing == want_vanishing;
            all_ok &= ok;
            details.push_str(&format!(
                "t={t}: exponent {exponent:.3} (want {want_exponent} +- 0.1), probe \
                 vanishing={probe_vanishing}, classify vanishing={classify_vanishing}; "
            ));
        }
        Ok((all_ok, details))
    };
    match run() {
        Ok((passed, details)) => finish(9, name, passed, details, start),
        Err(e) => fail(9, name, e, start),
    }
}

/// Criterion 10: reweighting comparability
/// `||delta^beta mu||_{lambda, gamma + beta/lambda} / ||mu||_{lambda,gamma}`
/// in `[0.1, 10]` for `beta in {0.5, 1}` across the battery.
pub fn criterion_reweighting(config: &ExperimentConfig) -> CriterionResult {
    let start = std::time::Instant::now();
    let name = "reweighting";
    let run = || -> Result<(bool, String)> {
        let domain = ModelDomain::disk();
        let rule = config.build_rule(&domain)?;
        let ray: Vec<Point> = domain.boundary_grid(1e-3, 0.3, 30)?;
        let battery: Vec<(Measure, f64, f64)> = vec![
            (Measure::lebesgue(&domain), 1.0, 0.0),
            (Measure::radial_density(&domain, 0.5, 1.0)?, 1.0, 0.0),
            (Measure::boundary_atoms(&domain, 8, 2.0, 0.25, 0.5)?, 1.0, 0.0),
            (Measure::lebesgue(&domain), 0.75, 0.0),
        ];
        let mut all_ok = true;
        let mut worst: f64 = 1.0;
        for (mu, lambda, gamma) in &battery {
            for beta in [0.5, 1.0] {
                let cp0 = CarlesonParams::new(*lambda, *gamma, 0.5)?;
                let base = skew_carleson_norm(&domain, mu, &cp0, &ray, &rule)?;
                let shifted_measure = reweight(&domain, mu, beta)?;
                let cp1 = CarlesonParams::new(*lambda, gamma + beta / lambda, 0.5)?;
                let shifted = skew_carleson_norm(&domain, &shifted_measure, &cp1, &ray, &rule)?;
                let ratio = shifted.value / base.value;
                worst = worst.max(ratio.max(1.0 / ratio));
                all_ok &= (0.1..=10.0).contains(&ratio);
            }
        }
        Ok((
            all_ok,
            format!("worst reweighting ratio spread {worst:.2} (limit 10) over 8 cases"),
        ))
    };
    match run() {
        Ok((passed, details)) => finish(10, name, passed, details, start),
        Err(e) => fail(10, name, e, start),
    }
}

/// Criterion 11: identical config and seed give byte-identical canonical
/// reports (timing excluded) across the experiment pipelines.
pub fn criterion_determinism(config: &ExperimentConfig) -> CriterionResult {
    let start = std::time::Instant::now();
    let name = "determinism";
    let run = || -> Result<(bool, String)> {
        let mut small = config.clone();
        small.quadrature.n_radial = 64;
        small.quadrature.n_angular = 128;
        small.grid.count = 8;
        small.measure = Some(crate::config::MeasureConfig::RadialDensity { t: 0.5, scale: 1.0 });
        small.operator = Some(crate::config::OperatorConfig {
            p1: 2.0,
            alpha1: 0.0,
            p2: 2.0,
            alpha2: 0.0,
            beta: 0.0,
        });
        let mut all_ok = true;
        let mut details = String::new();
        for subcommand in ["carleson", "berezin", "toeplitz", "vanishing"] {
            let a = crate::report::run_experiment(subcommand, &small)?;
            let b = crate::report::run_experiment(subcommand, &small)?;
            let identical = a.canonical_json() == b.canonical_json();
            all_ok &= identical;
            details.push_str(&format!("{subcommand}: {identical}; "));
        }
        Ok((all_ok, format!("byte-identical canonical reports: {details}")))
    };
    match run() {
        Ok((passed, details)) => finish(11, name, passed, details, start),
        Err(e) => fail(11, name, e, start),
    }
}

/// All criteria in order.
pub fn all_criteria(config: &ExperimentConfig) -> Vec<CriterionResult> {
    vec![
        criterion_reproducing(config),
        criterion_normalization(config),
        criterion_berezin_identity(config),
        criterion_geometry(config),
        criterion_kernel_estimates(config),
        criterion_carleson_ground_truth(config),
        criterion_cross_consistency(config),
        criterion_sandwich(config),
        criterion_compactness(config),
        criterion_reweighting(config),
        criterion_determinism(config),
    ]
}

/// Run the full acceptance battery and collect it into a report.
pub fn run_verify(config: &ExperimentConfig) -> Result<Report> {
    let mut report = Report::new("verify", config);
    report.checks = all_criteria(config);
    Ok(report)
}
