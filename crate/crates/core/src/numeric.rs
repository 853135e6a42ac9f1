//! Small numeric building blocks: Gauss-Legendre nodes and gamma helpers.

use statrs::function::gamma::ln_gamma;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
///
/// Newton iteration on the Legendre recurrence; accurate to ~1e-15 for the
/// node counts used here (<= 4096).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi-style initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Value and derivative of the degree-`n` Legendre polynomial at `x`.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss-Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    (
        x.iter().map(|t| mid + half * t).collect(),
        w.iter().map(|wi| wi * half).collect(),
    )
}

/// `ln Gamma(x)` for `x > 0`.
pub fn lngamma(x: f64) -> f64 {
    ln_gamma(x)
}

/// `Gamma(a) Gamma(b) / Gamma(a + b)` computed in log space.
pub fn beta_fn(a: f64, b: f64) -> f64 {
    (lngamma(a) + lngamma(b) - lngamma(a + b)).exp()
}

/// Lebesgue volume of the unit ball of C^n, `pi^n / n!`.
pub fn ball_lebesgue_volume(n: usize) -> f64 {
    let nf = n as f64;
    (nf * std::f64::consts::PI.ln() - lngamma(nf + 1.0)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gl_integrates_polynomials_exactly() {
        // degree-15 polynomial with an 8-point rule
        let (x, w) = gauss_legendre(8);
        let value: f64 = x
            .iter()
            .zip(&w)
            .map(|(xi, wi)| wi * (xi.powi(15) + 3.0 * xi.powi(8) - xi.powi(2) + 0.5))
            .sum();
        // exact: 3*2/9 - 2/3 + 1
        assert_relative_eq!(value, 3.0 * 2.0 / 9.0 - 2.0 / 3.0 + 1.0, epsilon = 1e-14);
    }

    #[test]
    fn gl_on_interval() {
        let (x, w) = gauss_legendre_on(32, 0.0, 2.0);
        let value: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.exp()).sum();
        assert_relative_eq!(value, 2.0f64.exp() - 1.0, epsilon = 1e-12);
    }

    #[test]
    fn ball_volumes() {
        assert_relative_eq!(ball_lebesgue_volume(1), std::f64::consts::PI);
        assert_relative_eq!(
            ball_lebesgue_volume(2),
            std::f64::consts::PI.powi(2) / 2.0,
            epsilon = 1e-13
        );
    }

    #[test]
    fn beta_matches_integral() {
        // B(2.5, 1.5) against a brute-force Riemann sum
        let exact = beta_fn(2.5, 1.5);
        let n = 2_000_000;
        let mut acc = 0.0;
        for i in 0..n {
            let t = (i as f64 + 0.5) / n as f64;
            acc += t.powf(1.5) * (1.0 - t).powf(0.5) / n as f64;
        }
        assert_relative_eq!(exact, acc, epsilon = 1e-6);
    }
}
