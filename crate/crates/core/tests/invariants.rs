//! Property tests for the structural invariants: Moebius invariance,
//! metric axioms, exact identities of the parameter map and the measure
//! quotients, and homogeneity of norms.

use num_complex::Complex64;
use proptest::prelude::*;
use skewlab::geometry::{ball_volume, KobayashiBall};
use skewlab::measures::{ball_mass, mu_hat, Measure};
use skewlab::quadrature::QuadratureRule;
use skewlab::toeplitz::derive_params;
use skewlab::{KernelParams, ModelDomain, Point, SpaceParams};

fn disk_point() -> impl Strategy<Value = Point> {
    (0.0..0.95f64, 0.0..std::f64::consts::TAU)
        .prop_map(|(r, th)| Point::disk(r * th.cos(), r * th.sin()))
}

fn ball_point(n: usize) -> impl Strategy<Value = Point> {
    proptest::collection::vec((-0.6..0.6f64, -0.6..0.6f64), n).prop_map(|coords| {
        let mut point: Vec<Complex64> = coords
            .into_iter()
            .map(|(re, im)| Complex64::new(re, im))
            .collect();
        let norm: f64 = point.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm >= 0.97 {
            for c in point.iter_mut() {
                *c *= 0.95 / norm;
            }
        }
        Point::new(point)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mobius_invariance_of_kobayashi_distance(
        a in ball_point(2),
        z in ball_point(2),
        w in ball_point(2),
    ) {
        let ball = ModelDomain::ball(2).unwrap();
        let before = ball.kobayashi_distance(&z, &w).unwrap();
        let after = ball
            .kobayashi_distance(&ball.mobius(&a, &z).unwrap(), &ball.mobius(&a, &w).unwrap())
            .unwrap();
        prop_assert!((before - after).abs() <= 1e-12 * (1.0 + before));
    }

    #[test]
    fn distance_is_a_metric(z in disk_point(), w in disk_point(), v in disk_point()) {
        let disk = ModelDomain::disk();
        let zw = disk.kobayashi_distance(&z, &w).unwrap();
        let wz = disk.kobayashi_distance(&w, &z).unwrap();
        prop_assert!(zw >= 0.0);
        prop_assert!((zw - wz).abs() <= 1e-13 * (1.0 + zw));
        let zv = disk.kobayashi_distance(&z, &v).unwrap();
        let vw = disk.kobayashi_distance(&v, &w).unwrap();
        prop_assert!(zw <= zv + vw + 1e-12);
    }

    #[test]
    fn kernel_hermitian_symmetry(z in disk_point(), w in disk_point(), beta in -0.5..2.0f64) {
        let kp = KernelParams::new(1, beta).unwrap();
        let kzw = kp.eval(&z, &w).unwrap();
        let kwz = kp.eval(&w, &z).unwrap();
        prop_assert_eq!(kzw.re, kwz.re);
        prop_assert_eq!(kzw.im, -kwz.im);
    }

    #[test]
    fn ball_mass_monotone_in_radius(
        center in disk_point(),
        r1 in 0.1..0.8f64,
        bump in 0.01..0.19f64,
        t in -0.5..2.0f64,
    ) {
        let disk = ModelDomain::disk();
        let mu = Measure::radial_density(&disk, t, 1.0).unwrap();
        let small = KobayashiBall::new(&disk, center.clone(), r1).unwrap();
        let large = KobayashiBall::new(&disk, center, r1 + bump).unwrap();
        let m_small = ball_mass(&disk, &mu, &small).unwrap();
        let m_large = ball_mass(&disk, &mu, &large).unwrap();
        prop_assert!(m_large >= m_small * (1.0 - 1e-9));
    }

    #[test]
    fn mu_hat_factorization_is_exact(
        z in disk_point(),
        theta in -0.5..2.5f64,
        t in -0.5..1.5f64,
    ) {
        // mu_hat_{r,theta} = nu(B)^(1-theta) mu_hat_{r,1}, same ball volume
        let disk = ModelDomain::disk();
        let mu = Measure::radial_density(&disk, t, 1.0).unwrap();
        let hat_theta = mu_hat(&disk, &mu, &z, 0.5, theta).unwrap();
        let hat_one = mu_hat(&disk, &mu, &z, 0.5, 1.0).unwrap();
        let ball = KobayashiBall::new(&disk, z, 0.5).unwrap();
        let volume = ball_volume(&disk, &ball, 0.0).unwrap();
        let expected = volume.powf(1.0 - theta) * hat_one;
        prop_assert!((hat_theta - expected).abs() <= 1e-12 * expected.abs().max(1e-300));
    }

    #[test]
    fn parameter_map_identity_is_exact(
        p1 in 0.5..4.0f64,
        p2 in 0.5..4.0f64,
        a1 in -0.9..2.0f64,
        a2 in -0.9..2.0f64,
        beta in -0.9..3.0f64,
    ) {
        let op = derive_params(1, p1, a1, p2, a2, beta).unwrap();
        prop_assume!(op.lambda.abs() > 1e-9);
        let lhs = (2.0 + beta) + (2.0 + a1) / p1 - (2.0 + a2) / p2;
        let rhs = (2.0 + op.gamma.unwrap()) * op.lambda;
        prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
    }

    #[test]
    fn norm_positive_homogeneity(scale in 0.01..50.0f64, alpha in -0.5..2.0f64) {
        let kp = KernelParams::new(1, 0.0).unwrap();
        let rule = QuadratureRule::disk_tensor(32, 48, 3.0).unwrap();
        let sp = SpaceParams::new(1.7, alpha).unwrap();
        let f = |w: &[Complex64]| w[0] + Complex64::new(0.3, 0.1);
        let base = kp.norm(f, &sp, &rule).unwrap();
        let scaled = kp
            .norm(|w| scale * (w[0] + Complex64::new(0.3, 0.1)), &sp, &rule)
            .unwrap();
        prop_assert!((scaled - scale * base).abs() <= 1e-9 * (1.0 + scaled));
    }

    #[test]
    fn weight_identity(alpha in -0.5..2.0f64, c in -0.9..0.9f64) {
        // integrate(f, alpha) = integrate(f delta^alpha, 0)
        let disk = ModelDomain::disk();
        let rule = QuadratureRule::disk_tensor(32, 48, 3.0).unwrap();
        let f = move |z: &[Complex64]| (z[0].re - c).cos();
        let (weighted, _) = rule.integrate(&disk, alpha, f).unwrap();
        let (folded, _) = rule
            .integrate(&disk, 0.0, move |z| {
                f(z) * (1.0 - z[0].norm_sqr()).powf(alpha)
            })
            .unwrap();
        prop_assert!((weighted - folded).abs() <= 1e-10 * (1.0 + weighted.abs()));
    }
}
