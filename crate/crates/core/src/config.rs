//! Experiment configuration: one human-writable JSON tree per experiment.
//!
//! Every knob that affects results lives here (and is echoed back into the
//! report): domain, measure, operator or Carleson parameters, grids,
//! quadrature resolution, verdict thresholds, and the seed. Unknown fields
//! are rejected so that typos fail loudly with the offending field named.

use crate::error::{Error, Result};
use crate::geometry::{build_lattice, Lattice, ModelDomain, Point, WeightConvention};
use crate::measures::{CarlesonParams, GridSpec, Measure};
use crate::quadrature::QuadratureRule;
use crate::toeplitz::{derive_params, OperatorParams};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub domain: DomainConfig,
    pub measure: Option<MeasureConfig>,
    pub operator: Option<OperatorConfig>,
    pub carleson: Option<CarlesonConfig>,
    pub grid: GridConfig,
    pub quadrature: QuadratureConfig,
    pub thresholds: Thresholds,
    pub berezin: BerezinConfig,
    pub lattice: LatticeConfig,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            domain: DomainConfig::default(),
            measure: None,
            operator: None,
            carleson: None,
            grid: GridConfig::default(),
            quadrature: QuadratureConfig::default(),
            thresholds: Thresholds::default(),
            berezin: BerezinConfig::default(),
            lattice: LatticeConfig::default(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct DomainConfig {
    pub n: usize,
    pub weight_convention: WeightConvention,
    pub epsilon: f64,
}

impl Default for DomainConfig {
    fn default() -> Self {
        DomainConfig {
            n: 1,
            weight_convention: WeightConvention::Smooth,
            epsilon: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasureConfig {
    /// Lebesgue measure, optionally scaled.
    Lebesgue {
        #[serde(default = "one")]
        scale: f64,
    },
    /// `scale * delta^t dnu`.
    RadialDensity {
        t: f64,
        #[serde(default = "one")]
        scale: f64,
    },
    /// Explicit atoms; each point is `[re_1, im_1, ..., re_n, im_n]`.
    Atomic {
        points: Vec<Vec<f64>>,
        weights: Vec<f64>,
    },
    /// Geometric boundary sequence with weights `delta(a_k)^weight_exponent`.
    BoundaryAtoms {
        count: usize,
        weight_exponent: f64,
        #[serde(default = "quarter")]
        shallow: f64,
        #[serde(default = "half")]
        ratio: f64,
    },
    /// Atoms at lattice centers with weights `delta(a_k)^weight_exponent`.
    LatticeWeighted {
        #[serde(default = "half")]
        r: f64,
        #[serde(default = "five_percent")]
        epsilon: f64,
        #[serde(default)]
        weight_exponent: f64,
    },
}

fn one() -> f64 {
    1.0
}
fn half() -> f64 {
    0.5
}
fn quarter() -> f64 {
    0.25
}
fn five_percent() -> f64 {
    0.05
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OperatorConfig {
    pub p1: f64,
    pub alpha1: f64,
    pub p2: f64,
    pub alpha2: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CarlesonConfig {
    pub lambda: f64,
    #[serde(default)]
    pub gamma: f64,
    #[serde(default = "half")]
    pub r: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub deep: f64,
    pub shallow: f64,
    pub count: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            deep: 1e-3,
            shallow: 1e-1,
            count: 20,
        }
    }
}

impl GridConfig {
    pub fn spec(&self) -> GridSpec {
        GridSpec {
            deep: self.deep,
            shallow: self.shallow,
            count: self.count,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum RuleKindConfig {
    TensorPolar,
    Qmc,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureConfig {
    pub kind: RuleKindConfig,
    pub n_radial: usize,
    pub n_angular: usize,
    pub grading: f64,
    /// Sample count for the sampling rules (qmc, monte_carlo).
    pub samples: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            kind: RuleKindConfig::TensorPolar,
            n_radial: 128,
            n_angular: 256,
            grading: 4.0,
            samples: 200_000,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct Thresholds {
    /// Log-log slope below which a boundary fit counts as flat.
    pub slope_tol: f64,
    /// Sandwich quantities must agree within this multiplicative cap.
    pub ratio_cap: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            slope_tol: 0.1,
            ratio_cap: 1e2,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields, default)]
pub struct BerezinConfig {
    /// Level `s`; when absent, the smallest admissible level is used.
    pub level: Option<f64>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct LatticeConfig {
    pub r: f64,
    pub epsilon: f64,
}

impl Default for LatticeConfig {
    fn default() -> Self {
        LatticeConfig {
            r: 0.5,
            epsilon: 0.05,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::config(None, e.to_string()))
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text)
            .map_err(|e| Error::config(Some(path.display().to_string()), e.to_string()))
    }

    pub fn build_domain(&self) -> Result<ModelDomain> {
        if !(0.0 < self.domain.epsilon && self.domain.epsilon < 1.0) {
            return Err(Error::config(
                Some("domain.epsilon".into()),
                "truncation must lie in (0, 1)",
            ));
        }
        Ok(ModelDomain::ball(self.domain.n)?.with_weight(self.domain.weight_convention))
    }

    pub fn build_measure(&self, domain: &ModelDomain) -> Result<Measure> {
        let spec = self.measure.as_ref().ok_or_else(|| {
            Error::config(Some("measure".into()), "this subcommand needs a measure")
        })?;
        match spec {
            MeasureConfig::Lebesgue { scale } => {
                Measure::radial_density(domain, 0.0, *scale)
            }
            MeasureConfig::RadialDensity { t, scale } => {
                Measure::radial_density(domain, *t, *scale)
            }
            MeasureConfig::Atomic { points, weights } => {
                let n = domain.dim();
                let mut parsed = Vec::with_capacity(points.len());
                for (i, raw) in points.iter().enumerate() {
                    if raw.len() != 2 * n {
                        return Err(Error::config(
                            Some(format!("measure.points[{i}]")),
                            format!("expected {} reals (re/im pairs)", 2 * n),
                        ));
                    }
                    let coords: Vec<Complex64> = raw
                        .chunks_exact(2)
                        .map(|c| Complex64::new(c[0], c[1]))
                        .collect();
                    parsed.push(Point::new(coords));
                }
                Measure::atomic(domain, parsed, weights.clone())
            }
            MeasureConfig::BoundaryAtoms {
                count,
                weight_exponent,
                shallow,
                ratio,
            } => Measure::boundary_atoms(domain, *count, *weight_exponent, *shallow, *ratio),
            MeasureConfig::LatticeWeighted {
                r,
                epsilon,
                weight_exponent,
            } => {
                let lattice = build_lattice(domain, *r, *epsilon)?;
                Measure::lattice_weighted(domain, &lattice, *weight_exponent)
            }
        }
    }

    pub fn build_operator(&self, domain: &ModelDomain) -> Result<OperatorParams> {
        let op = self.operator.as_ref().ok_or_else(|| {
            Error::config(
                Some("operator".into()),
                "this subcommand needs operator parameters",
            )
        })?;
        derive_params(domain.dim(), op.p1, op.alpha1, op.p2, op.alpha2, op.beta)
    }

    /// Carleson parameters: taken from `carleson` or derived from `operator`.
    pub fn build_carleson(&self, domain: &ModelDomain) -> Result<CarlesonParams> {
        if let Some(c) = &self.carleson {
            return CarlesonParams::new(c.lambda, c.gamma, c.r);
        }
        if self.operator.is_some() {
            let op = self.build_operator(domain)?;
            return op.carleson_params(self.carleson_radius());
        }
        Err(Error::config(
            Some("carleson".into()),
            "need either carleson or operator parameters",
        ))
    }

    pub fn carleson_radius(&self) -> f64 {
        self.carleson.map(|c| c.r).unwrap_or(0.5)
    }

    pub fn build_rule(&self, domain: &ModelDomain) -> Result<QuadratureRule> {
        match self.quadrature.kind {
            RuleKindConfig::TensorPolar => {
                if domain.dim() != 1 {
                    return Err(Error::config(
                        Some("quadrature.kind".into()),
                        "tensor_polar requires n = 1; use qmc or monte_carlo",
                    ));
                }
                QuadratureRule::disk_tensor(
                    self.quadrature.n_radial,
                    self.quadrature.n_angular,
                    self.quadrature.grading,
                )
            }
            RuleKindConfig::Qmc => QuadratureRule::ball_qmc(domain.dim(), self.quadrature.samples),
            RuleKindConfig::MonteCarlo => {
                QuadratureRule::ball_monte_carlo(domain.dim(), self.quadrature.samples, self.seed)
            }
        }
    }

    pub fn build_lattice(&self, domain: &ModelDomain) -> Result<Lattice> {
        build_lattice(domain, self.lattice.r, self.lattice.epsilon)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let config = ExperimentConfig::default();
        let text = serde_json::to_string_pretty(&config).unwrap();
        let back = ExperimentConfig::from_json(&text).unwrap();
        assert_eq!(config, back);
    }

    #[test]
    fn unknown_field_is_named() {
        let err = ExperimentConfig::from_json(r#"{"grdi": {}}"#).unwrap_err();
        assert!(err.to_string().contains("grdi"), "{err}");
    }

    #[test]
    fn minimal_carleson_config() {
        let text = r#"{
            "measure": {"kind": "radial_density", "t": 0.5},
            "carleson": {"lambda": 1.0, "gamma": 0.0}
        }"#;
        let config = ExperimentConfig::from_json(text).unwrap();
        let domain = config.build_domain().unwrap();
        let mu = config.build_measure(&domain).unwrap();
        assert_eq!(mu.radial().unwrap().0, 0.5);
        let cp = config.build_carleson(&domain).unwrap();
        assert_eq!(cp.r, 0.5);
    }

    #[test]
    fn atomic_points_validated() {
        let text = r#"{
            "measure": {"kind": "atomic", "points": [[0.5]], "weights": [1.0]}
        }"#;
        let config = ExperimentConfig::from_json(text).unwrap();
        let domain = config.build_domain().unwrap();
        let err = config.build_measure(&domain).unwrap_err();
        assert!(err.to_string().contains("measure.points[0]"), "{err}");
    }

    #[test]
    fn operator_to_carleson() {
        let text = r#"{
            "operator": {"p1": 2.0, "alpha1": 0.0, "p2": 2.0, "alpha2": 0.0, "beta": 1.0}
        }"#;
        let config = ExperimentConfig::from_json(text).unwrap();
        let domain = config.build_domain().unwrap();
        let cp = config.build_carleson(&domain).unwrap();
        assert_eq!(cp.lambda, 1.0);
        assert_eq!(cp.gamma, 1.0);
    }
}
