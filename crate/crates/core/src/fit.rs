//! Log-log regression for boundary-exponent fits.
//!
//! Boundary limits like `sup` and `lim` over all of `D` are realized as
//! fitted slopes of `log y` against `log delta` on a radial grid; the slope
//! is the scaling exponent and the residual measures how well a pure power
//! law explains the data.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PowerLawFit {
    /// Fitted exponent of `y ~ delta^slope`.
    pub slope: f64,
    /// Intercept in log space, `log C`.
    pub intercept: f64,
    /// Root-mean-square residual of the log-log fit.
    pub rms_residual: f64,
    /// Number of retained (finite, positive) samples.
    pub points: usize,
}

/// Least squares on `(ln x, ln y)`. Non-finite or non-positive pairs are
/// dropped; at least three points are required for a meaningful exponent.
pub fn fit_power_law(xs: &[f64], ys: &[f64]) -> Option<PowerLawFit> {
    let data: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0 && x.is_finite() && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if data.len() < 3 {
        return None;
    }
    let n = data.len() as f64;
    let sx: f64 = data.iter().map(|(x, _)| x).sum();
    let sy: f64 = data.iter().map(|(_, y)| y).sum();
    let sxx: f64 = data.iter().map(|(x, _)| x * x).sum();
    let sxy: f64 = data.iter().map(|(x, y)| x * y).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-30 {
        return None;
    }
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    let rms = (data
        .iter()
        .map(|(x, y)| {
            let r = y - (slope * x + intercept);
            r * r
        })
        .sum::<f64>()
        / n)
        .sqrt();
    Some(PowerLawFit {
        slope,
        intercept,
        rms_residual: rms,
        points: data.len(),
    })
}

/// Geometric grid of boundary distances in `[deep, shallow]`.
pub fn log_grid(deep: f64, shallow: f64, count: usize) -> Vec<f64> {
    assert!(deep > 0.0 && shallow > deep && count >= 2);
    let (a, b) = (deep.ln(), shallow.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn recovers_exact_power_law() {
        let xs = log_grid(1e-3, 1e-1, 20);
        let ys: Vec<f64> = xs.iter().map(|x| 3.7 * x.powf(-1.25)).collect();
        let fit = fit_power_law(&xs, &ys).unwrap();
        assert_relative_eq!(fit.slope, -1.25, epsilon = 1e-10);
        assert_relative_eq!(fit.intercept, 3.7f64.ln(), epsilon = 1e-9);
        assert!(fit.rms_residual < 1e-12);
    }

    #[test]
    fn drops_bad_samples() {
        let xs = [1e-3, 1e-2, 0.05, 1e-1, 0.2];
        let ys = [1.0, f64::NAN, 0.0, 1.0, 1.0];
        let fit = fit_power_law(&xs, &ys).unwrap();
        assert_eq!(fit.points, 3);
        assert_relative_eq!(fit.slope, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn too_few_points_is_none() {
        assert!(fit_power_law(&[1.0, 2.0], &[1.0, 2.0]).is_none());
    }
}
