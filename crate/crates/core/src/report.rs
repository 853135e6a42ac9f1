//! Machine-readable reports and the experiment subcommands behind the CLI.
//!
//! A report echoes the full configuration, carries per-diagnostic tables
//! (one row per grid center), fitted exponents with residuals, verdicts
//! with the numeric evidence that produced them, hypothesis flags, and the
//! seed/version needed to reproduce it. JSON output round-trips through the
//! data model; timing is kept in a separate field so byte-level determinism
//! can be checked with timing excluded.

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::fit::PowerLawFit;
use crate::geometry::{
    ball_volume, delta_comparability_check, verify_lattice, KobayashiBall, Point,
};
use crate::measures::{
    berezin_boundary_divergent, berezin_diagnostic, berezin_transform, classify_skew_carleson,
    default_berezin_level, mu_hat, skew_carleson_norm, Verdict,
};
use crate::quadrature::ErrorModel;
use crate::toeplitz::{compactness_probe, default_compactness_centers};
use crate::verify::sandwich_run;
use serde::{Deserialize, Serialize};
use std::io::Write;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    /// One row per grid center; missing entries stay empty in CSV and
    /// `null` in JSON.
    pub rows: Vec<Vec<Option<f64>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct NamedFit {
    pub name: String,
    pub fit: PowerLawFit,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct VerdictEntry {
    pub name: String,
    pub verdict: Verdict,
    pub slope: Option<f64>,
    pub residual: Option<f64>,
    pub grid_depth: Option<f64>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ParamsSection {
    pub lambda: f64,
    pub gamma: Option<f64>,
    pub theta: Option<f64>,
    pub hypothesis: [bool; 2],
    pub hypothesis_holds: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct QuadratureSummary {
    pub kind: String,
    pub nodes: usize,
    pub error_model: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
pub struct Timing {
    pub total_ms: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CriterionResult {
    pub id: u32,
    pub name: String,
    pub passed: bool,
    pub details: String,
    pub elapsed_ms: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Report {
    pub schema_version: u32,
    pub tool_version: String,
    pub subcommand: String,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub params: Option<ParamsSection>,
    pub tables: Vec<Table>,
    pub fits: Vec<NamedFit>,
    pub verdicts: Vec<VerdictEntry>,
    pub checks: Vec<CriterionResult>,
    pub quadrature: QuadratureSummary,
    pub warnings: Vec<String>,
    pub timing: Timing,
}

impl Report {
    pub fn new(subcommand: &str, config: &ExperimentConfig) -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            tool_version: crate::VERSION.to_string(),
            subcommand: subcommand.to_string(),
            seed: config.seed,
            config: config.clone(),
            params: None,
            tables: Vec::new(),
            fits: Vec::new(),
            verdicts: Vec::new(),
            checks: Vec::new(),
            quadrature: QuadratureSummary {
                kind: String::new(),
                nodes: 0,
                error_model: String::new(),
            },
            warnings: Vec::new(),
            timing: Timing::default(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::config(None, e.to_string()))
    }

    /// JSON with timing fields zeroed: the determinism contract compares
    /// these bytes.
    pub fn canonical_json(&self) -> String {
        let mut clone = self.clone();
        clone.timing = Timing::default();
        for check in clone.checks.iter_mut() {
            check.elapsed_ms = 0;
        }
        serde_json::to_string_pretty(&clone).expect("report serializes")
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn classification_entry(name: &str, cls: &crate::measures::Classification) -> VerdictEntry {
        VerdictEntry {
            name: name.to_string(),
            verdict: cls.verdict,
            slope: cls.fit.as_ref().map(|f| f.slope),
            residual: cls.fit.as_ref().map(|f| f.rms_residual),
            grid_depth: cls.values.iter().map(|(d, _)| *d).fold(None, |acc, d| {
                Some(acc.map_or(d, |a: f64| a.min(d)))
            }),
            note: cls.note.clone(),
        }
    }

    /// Write the report in the requested format. JSON goes to one file (or
    /// stdout when no path is given); CSV writes one file per table next to
    /// the given stem.
    pub fn emit(&self, format: OutputFormat, out: Option<&std::path::Path>) -> Result<Vec<String>> {
        match format {
            OutputFormat::Json => {
                let text = self.to_json();
                match out {
                    Some(path) => {
                        std::fs::write(path, text.as_bytes())?;
                        Ok(vec![path.display().to_string()])
                    }
                    None => {
                        std::io::stdout().write_all(text.as_bytes())?;
                        std::io::stdout().write_all(b"\n")?;
                        Ok(Vec::new())
                    }
                }
            }
            OutputFormat::Csv => {
                let stem = out.ok_or_else(|| {
                    Error::config(None, "csv output needs --out <stem>".to_string())
                })?;
                let mut written = Vec::new();
                for table in &self.tables {
                    let path = stem.with_extension(format!("{}.csv", table.name));
                    let mut writer = csv::Writer::from_path(&path).map_err(io_err)?;
                    writer.write_record(&table.columns).map_err(io_err)?;
                    for row in &table.rows {
                        let record: Vec<String> = row
                            .iter()
                            .map(|cell| cell.map(|v| format!("{v:.17e}")).unwrap_or_default())
                            .collect();
                        writer.write_record(&record).map_err(io_err)?;
                    }
                    writer.flush()?;
                    written.push(path.display().to_string());
                }
                Ok(written)
            }
        }
    }
}

fn io_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            other => Err(Error::config(
                None,
                format!("unknown format `{other}` (expected json or csv)"),
            )),
        }
    }
}

/// Run one experiment subcommand against a configuration.
pub fn run_experiment(subcommand: &str, config: &ExperimentConfig) -> Result<Report> {
    let start = std::time::Instant::now();
    let mut report = match subcommand {
        "params" => run_params(config)?,
        "geometry" => run_geometry(config)?,
        "carleson" => run_carleson(config)?,
        "berezin" => run_berezin(config)?,
        "toeplitz" => run_toeplitz(config)?,
        "vanishing" => run_vanishing(config)?,
        "verify" => crate::verify::run_verify(config)?,
        other => {
            return Err(Error::config(
                None,
                format!(
                    "unknown subcommand `{other}` (expected params, geometry, carleson, \
                     berezin, toeplitz, vanishing or verify)"
                ),
            ))
        }
    };
    report.timing.total_ms = start.elapsed().as_millis() as u64;
    Ok(report)
}

fn quadrature_summary(config: &ExperimentConfig, rule: &crate::quadrature::QuadratureRule) -> QuadratureSummary {
    let _ = config;
    QuadratureSummary {
        kind: format!("{:?}", rule.kind()),
        nodes: rule.node_count(),
        error_model: match rule.error_model() {
            ErrorModel::Deterministic => "deterministic".to_string(),
            ErrorModel::Statistical => "statistical".to_string(),
        },
    }
}

fn run_params(config: &ExperimentConfig) -> Result<Report> {
    let domain = config.build_domain()?;
    let op = config.build_operator(&domain)?;
    let mut report = Report::new("params", config);
    let theta = op.gamma.map(|g| 1.0 + g / (domain.dim() as f64 + 1.0));
    report.params = Some(ParamsSection {
        lambda: op.lambda,
        gamma: op.gamma,
        theta,
        hypothesis: op.hypothesis,
        hypothesis_holds: op.hypothesis_holds(),
    });
    if op.gamma.is_none() {
        report.warnings.push(
            "lambda = 0: gamma undefined; diagnostics run without a verdict in this regime"
                .to_string(),
        );
    }
    if !op.hypothesis_holds() {
        report
            .warnings
            .push("hypothesis violated: the sufficient exponent condition fails".to_string());
    }
    Ok(report)
}

fn run_geometry(config: &ExperimentConfig) -> Result<Report> {
    let domain = config.build_domain()?;
    let mut report = Report::new("geometry", config);
    let r = config.carleson_radius();
    let grid = config.grid.spec();
    let mut rows = Vec::new();
    for delta in grid.deltas() {
        let z = domain.radial_point(delta)?;
        let ball = KobayashiBall::new(&domain, z.clone(), r)?;
        let volume = ball_volume(&domain, &ball, 0.0)?;
        let (lo, hi) = delta_comparability_check(&domain, &z, r, 2000)?;
        rows.push(vec![
            Some(delta),
            Some(volume),
            Some(lo),
            Some(hi),
        ]);
    }
    report.tables.push(Table {
        name: "geometry_sweep".to_string(),
        columns: vec![
            "delta".into(),
            "ball_volume".into(),
            "delta_ratio_min".into(),
            "delta_ratio_max".into(),
        ],
        rows: rows.clone(),
    });
    let deltas: Vec<f64> = rows.iter().map(|r| r[0].unwrap()).collect();
    let volumes: Vec<f64> = rows.iter().map(|r| r[1].unwrap()).collect();
    if let Some(fit) = crate::fit::fit_power_law(&deltas, &volumes) {
        report.fits.push(NamedFit {
            name: "ball_volume_exponent".to_string(),
            fit,
        });
    }
    let lattice = config.build_lattice(&domain)?;
    let check = verify_lattice(&domain, &lattice, 20_000, config.seed)?;
    report.tables.push(Table {
        name: "lattice_summary".to_string(),
        columns: vec![
            "centers".into(),
            "overlap_bound".into(),
            "separation".into(),
            "covered_fraction".into(),
            "max_overlap_on_sample".into(),
        ],
        rows: vec![vec![
            Some(lattice.centers.len() as f64),
            Some(lattice.overlap_bound as f64),
            Some(lattice.separation),
            Some(check.covered_fraction),
            Some(check.max_overlap as f64),
        ]],
    });
    let rule = config.build_rule(&domain)?;
    report.quadrature = quadrature_summary(config, &rule);
    Ok(report)
}

fn run_carleson(config: &ExperimentConfig) -> Result<Report> {
    let domain = config.build_domain()?;
    let measure = config.build_measure(&domain)?;
    let cp = config.build_carleson(&domain)?;
    let rule = config.build_rule(&domain)?;
    let grid = config.grid.spec();
    let mut report = Report::new("carleson", config);
    let cls = classify_skew_carleson(
        &domain,
        &measure,
        &cp,
        &grid,
        &rule,
        config.thresholds.slope_tol,
    )?;
    let mut rows = Vec::with_capacity(cls.values.len());
    for (delta, value) in &cls.values {
        let z = domain.radial_point(*delta)?;
        let hat = mu_hat(&domain, &measure, &z, cp.r, cp.lambda)?;
        rows.push(vec![Some(*delta), Some(hat), Some(*value)]);
    }
    report.tables.push(Table {
        name: "carleson_sweep".to_string(),
        columns: vec!["delta".into(), "mu_hat_lambda".into(), "skew_quotient".into()],
        rows,
    });
    if let Some(fit) = &cls.fit {
        report.fits.push(NamedFit {
            name: "skew_quotient_exponent".to_string(),
            fit: fit.clone(),
        });
    }
    report
        .verdicts
        .push(Report::classification_entry("classify_skew_carleson", &cls));
    let norm_grid: Vec<Point> = domain.boundary_grid(grid.deep, 0.3, grid.count.max(10))?;
    let norm = skew_carleson_norm(&domain, &measure, &cp, &norm_grid, &rule)?;
    report.tables.push(Table {
        name: "skew_norm".to_string(),
        columns: vec!["value".into(), "deepest_delta".into()],
        rows: vec![vec![Some(norm.value), Some(norm.deepest_delta)]],
    });
    report.quadrature = quadrature_summary(config, &rule);
    Ok(report)
}

fn run_berezin(config: &ExperimentConfig) -> Result<Report> {
    let domain = config.build_domain()?;
    let measure = config.build_measure(&domain)?;
    let cp = config.build_carleson(&domain)?;
    let rule = config.build_rule(&domain)?;
    let grid = config.grid.spec();
    let mut report = Report::new("berezin", config);
    let s = config
        .berezin
        .level
        .unwrap_or_else(|| default_berezin_level(domain.dim(), &cp));
    if let Some((t, _)) = measure.radial() {
        if berezin_boundary_divergent(domain.dim(), s, t) {
            report.warnings.push(format!(
                "berezin level s = {s} meets s(n+1)/2 >= n+1+t: the raw transform blows up \
                 toward the boundary"
            ));
        }
    }
    let mut rows = Vec::new();
    for delta in grid.deltas() {
        let z = domain.radial_point(delta)?;
        let b = berezin_transform(&domain, &measure, &z, s, &rule)?;
        rows.push(vec![Some(delta), Some(b)]);
    }
    report.tables.push(Table {
        name: "berezin_sweep".to_string(),
        columns: vec!["delta".into(), "berezin".into()],
        rows: rows.clone(),
    });
    let deltas: Vec<f64> = rows.iter().map(|r| r[0].unwrap()).collect();
    let values: Vec<f64> = rows.iter().map(|r| r[1].unwrap()).collect();
    if let Some(fit) = crate::fit::fit_power_law(&deltas, &values) {
        report.fits.push(NamedFit {
            name: format!("berezin_level_{s}_exponent"),
            fit,
        });
    }
    let diag = berezin_diagnostic(
        &domain,
        &measure,
        &cp,
        Some(s),
        &grid,
        &rule,
        config.thresholds.slope_tol,
    )?;
    report
        .verdicts
        .push(Report::classification_entry("berezin_diagnostic", &diag));
    report.quadrature = quadrature_summary(config, &rule);
    Ok(report)
}

fn run_toeplitz(config: &ExperimentConfig) -> Result<Report> {
    let domain = config.build_domain()?;
    let measure = config.build_measure(&domain)?;
    let op = config.build_operator(&domain)?;
    let rule = config.build_rule(&domain)?;
    let grid = config.grid.spec();
    let mut report = Report::new("toeplitz", config);
    let theta = op.gamma.map(|g| 1.0 + g / (domain.dim() as f64 + 1.0));
    report.params = Some(ParamsSection {
        lambda: op.lambda,
        gamma: op.gamma,
        theta,
        hypothesis: op.hypothesis,
        hypothesis_holds: op.hypothesis_holds(),
    });
    if !op.hypothesis_holds() {
        report
            .warnings
            .push("hypothesis violated: the sufficient exponent condition fails".to_string());
    }
    let sandwich = sandwich_run(
        &domain,
        &measure,
        &op,
        &grid,
        &rule,
        config.thresholds.slope_tol,
        None,
        config.seed,
    )?;
    report.tables.push(Table {
        name: "lower_bound_sweep".to_string(),
        columns: vec!["delta".into(), "probe".into(), "toeplitz_at_center".into()],
        rows: sandwich
            .lower_rows
            .iter()
            .map(|(d, p, t)| vec![Some(*d), Some(*p), Some(*t)])
            .collect(),
    });
    report.tables.push(Table {
        name: "norm_probes".to_string(),
        columns: vec!["norm_f".into(), "norm_tf".into(), "ratio".into()],
        rows: sandwich
            .estimate_rows
            .iter()
            .map(|r| vec![Some(r.norm_f), Some(r.norm_tf), Some(r.ratio)])
            .collect(),
    });
    report.tables.push(Table {
        name: "sandwich".to_string(),
        columns: vec![
            "lower_probe_sup".into(),
            "norm_estimate".into(),
            "skew_norm".into(),
        ],
        rows: vec![vec![
            Some(sandwich.lower_sup),
            Some(sandwich.estimate),
            Some(sandwich.skew_norm),
        ]],
    });
    report.verdicts.push(VerdictEntry {
        name: "sandwich_agreement".to_string(),
        verdict: if sandwich.agreement {
            sandwich.classify_verdict
        } else {
            Verdict::Inconclusive
        },
        slope: sandwich.lower_fit.as_ref().map(|f| f.slope),
        residual: sandwich.lower_fit.as_ref().map(|f| f.rms_residual),
        grid_depth: Some(grid.deep),
        note: Some(format!(
            "bounded flags: lower={} estimate={} skew={}",
            sandwich.lower_bounded, sandwich.estimate_bounded, sandwich.skew_bounded
        )),
    });
    report.quadrature = quadrature_summary(config, &rule);
    Ok(report)
}

fn run_vanishing(config: &ExperimentConfig) -> Result<Report> {
    let domain = config.build_domain()?;
    let measure = config.build_measure(&domain)?;
    let op = config.build_operator(&domain)?;
    let rule = config.build_rule(&domain)?;
    let grid = config.grid.spec();
    let mut report = Report::new("vanishing", config);
    let centers = default_compactness_centers(&domain, 10)?;
    let probe = compactness_probe(
        &domain,
        &measure,
        &op,
        &centers,
        &rule,
        config.thresholds.slope_tol,
    )?;
    report.tables.push(Table {
        name: "compactness_sweep".to_string(),
        columns: vec!["delta".into(), "norm_tf".into()],
        rows: probe
            .rows
            .iter()
            .map(|(d, v)| vec![Some(*d), Some(*v)])
            .collect(),
    });
    if let Some(fit) = &probe.fit {
        report.fits.push(NamedFit {
            name: "compactness_decay".to_string(),
            fit: fit.clone(),
        });
    }
    let mut note = probe.note.clone();
    if let Ok(cp) = op.carleson_params(config.carleson_radius()) {
        let cls = classify_skew_carleson(
            &domain,
            &measure,
            &cp,
            &grid,
            &rule,
            config.thresholds.slope_tol,
        )?;
        let agree = (probe.verdict == Verdict::Vanishing) == (cls.verdict == Verdict::Vanishing);
        note = Some(format!(
            "classify verdict: {} ({})",
            cls.verdict,
            if agree { "agrees" } else { "DISAGREES" }
        ));
        report
            .verdicts
            .push(Report::classification_entry("classify_skew_carleson", &cls));
    }
    report.verdicts.push(VerdictEntry {
        name: "compactness_probe".to_string(),
        verdict: probe.verdict,
        slope: probe.exponent,
        residual: probe.fit.as_ref().map(|f| f.rms_residual),
        grid_depth: probe.rows.iter().map(|(d, _)| *d).fold(None, |acc, d| {
            Some(acc.map_or(d, |a: f64| a.min(d)))
        }),
        note,
    });
    report.quadrature = quadrature_summary(config, &rule);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_round_trips() {
        let config = ExperimentConfig::default();
        let mut report = Report::new("params", &config);
        report.tables.push(Table {
            name: "t".into(),
            columns: vec!["a".into(), "b".into()],
            rows: vec![vec![Some(1.5), None], vec![Some(-2.0), Some(3.25)]],
        });
        let text = report.to_json();
        let back = Report::from_json(&text).unwrap();
        assert_eq!(report, back);
    }

    #[test]
    fn canonical_json_strips_timing() {
        let config = ExperimentConfig::default();
        let mut a = Report::new("params", &config);
        let mut b = Report::new("params", &config);
        a.timing.total_ms = 111;
        b.timing.total_ms = 999;
        assert_eq!(a.canonical_json(), b.canonical_json());
        assert_ne!(a.to_json(), b.to_json());
    }

    #[test]
    fn empty_report_is_valid_json() {
        let config = ExperimentConfig::default();
        let report = Report::new("carleson", &config);
        let parsed: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
        assert_eq!(parsed["schema_version"], 1);
        assert!(parsed["tables"].as_array().unwrap().is_empty());
    }
}
