//! C ABI for the skewlab laboratory.
//!
//! Conventions:
//!
//! * every fallible call returns a [`SkewlabStatus`]; `Ok` is 0;
//! * outputs go through out-pointers, which are written only on `Ok`;
//! * handles (`SkewlabDomain`, `SkewlabMeasure`) are opaque and must be
//!   released with their `_free` function;
//! * points are passed as interleaved re/im doubles, `2n` values for the
//!   ball of complex dimension `n`;
//! * the last error message is kept per thread and can be read with
//!   [`skewlab_last_error`]; the pointer stays valid until the next failing
//!   call on the same thread;
//! * strings returned by the library are released with
//!   [`skewlab_string_free`].

use libc::{c_char, c_double, c_int};
use skewlab::config::ExperimentConfig;
use skewlab::geometry::{ball_volume, KobayashiBall};
use skewlab::measures::{ball_mass, classify_skew_carleson, mu_hat, GridSpec, Verdict};
use skewlab::quadrature::QuadratureRule;
use skewlab::toeplitz::derive_params;
use skewlab::{CarlesonParams, Error, Measure, ModelDomain, Point, WeightConvention};
use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

/// Status codes mirrored from the library's error classes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkewlabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    OutsideDomain = 3,
    ParameterError = 4,
    EvaluationError = 5,
    ResourceError = 6,
    DivergenceError = 7,
    BranchError = 8,
    ConfigError = 9,
    IoError = 10,
    Panic = 11,
}

/// Verdict codes returned by `skewlab_classify`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkewlabVerdict {
    Carleson = 0,
    Vanishing = 1,
    NotCarleson = 2,
    Inconclusive = 3,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let cstring = CString::new(message.replace('\0', " "))
        .unwrap_or_else(|_| CString::new("invalid error message").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(cstring));
}

fn status_of(err: &Error) -> SkewlabStatus {
    match err {
        Error::OutsideDomain { .. } => SkewlabStatus::OutsideDomain,
        Error::Parameter(_) => SkewlabStatus::ParameterError,
        Error::Evaluation { .. } => SkewlabStatus::EvaluationError,
        Error::Resource(_) => SkewlabStatus::ResourceError,
        Error::Divergence(_) => SkewlabStatus::DivergenceError,
        Error::Branch(_) => SkewlabStatus::BranchError,
        Error::Config { .. } => SkewlabStatus::ConfigError,
        Error::Io(_) => SkewlabStatus::IoError,
    }
}

fn fail(err: Error) -> SkewlabStatus {
    let status = status_of(&err);
    set_error(err.to_string());
    status
}

fn guard<F: FnOnce() -> SkewlabStatus>(f: F) -> SkewlabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("panic inside skewlab".to_string());
            SkewlabStatus::Panic
        }
    }
}

/// Last error message on this thread, or NULL when no error occurred yet.
#[no_mangle]
pub extern "C" fn skewlab_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map(|s| s.as_ptr())
            .unwrap_or(std::ptr::null())
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn skewlab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Opaque model-domain handle.
pub struct SkewlabDomain {
    inner: ModelDomain,
}

/// Opaque measure handle.
pub struct SkewlabMeasure {
    inner: Measure,
}

unsafe fn read_point(
    domain: &ModelDomain,
    coords: *const c_double,
    len: usize,
) -> Result<Point, Error> {
    if len != 2 * domain.dim() {
        return Err(Error::parameter(format!(
            "expected {} interleaved re/im values, got {len}",
            2 * domain.dim()
        )));
    }
    let raw = std::slice::from_raw_parts(coords, len);
    let point = Point::new(
        raw.chunks_exact(2)
            .map(|c| num_complex::Complex64::new(c[0], c[1]))
            .collect(),
    );
    domain.check_point(&point)?;
    Ok(point)
}

/// Create the unit ball of complex dimension `n`. `euclidean_weight`
/// selects the `1-|z|` convention instead of the default `1-|z|^2`.
///
/// # Safety
/// `out` must be a valid pointer; the result must be freed with
/// [`skewlab_domain_free`].
#[no_mangle]
pub unsafe extern "C" fn skewlab_domain_new(
    n: usize,
    euclidean_weight: bool,
    out: *mut *mut SkewlabDomain,
) -> SkewlabStatus {
    guard(|| {
        if out.is_null() {
            set_error("out pointer is null".into());
            return SkewlabStatus::NullPointer;
        }
        match ModelDomain::ball(n) {
            Ok(domain) => {
                let domain = if euclidean_weight {
                    domain.with_weight(WeightConvention::Euclidean)
                } else {
                    domain
                };
                *out = Box::into_raw(Box::new(SkewlabDomain { inner: domain }));
                SkewlabStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `domain` must come from [`skewlab_domain_new`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn skewlab_domain_free(domain: *mut SkewlabDomain) {
    if !domain.is_null() {
        drop(Box::from_raw(domain));
    }
}

/// Boundary distance of a point under the domain's weight convention.
///
/// # Safety
/// `domain` must be a live handle; `coords` must point to `len` doubles;
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn skewlab_boundary_distance(
    domain: *const SkewlabDomain,
    coords: *const c_double,
    len: usize,
    out: *mut c_double,
) -> SkewlabStatus {
    guard(|| {
        if domain.is_null() || coords.is_null() || out.is_null() {
            set_error("null pointer".into());
            return SkewlabStatus::NullPointer;
        }
        let d = &(*domain).inner;
        match read_point(d, coords, len).and_then(|p| d.boundary_distance(&p)) {
            Ok(v) => {
                *out = v;
                SkewlabStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Kobayashi distance between two points.
///
/// # Safety
/// As for [`skewlab_boundary_distance`], with both points of length `len`.
#[no_mangle]
pub unsafe extern "C" fn skewlab_kobayashi_distance(
    domain: *const SkewlabDomain,
    z: *const c_double,
    w: *const c_double,
    len: usize,
    out: *mut c_double,
) -> SkewlabStatus {
    guard(|| {
        if domain.is_null() || z.is_null() || w.is_null() || out.is_null() {
            set_error("null pointer".into());
            return SkewlabStatus::NullPointer;
        }
        let d = &(*domain).inner;
        let result = read_point(d, z, len)
            .and_then(|zp| read_point(d, w, len).map(|wp| (zp, wp)))
            .and_then(|(zp, wp)| d.kobayashi_distance(&zp, &wp));
        match result {
            Ok(v) => {
                *out = v;
                SkewlabStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Weighted volume `nu_beta(B(center, r))` of a Kobayashi ball.
///
/// # Safety
/// As for [`skewlab_boundary_distance`].
#[no_mangle]
pub unsafe extern "C" fn skewlab_ball_volume(
    domain: *const SkewlabDomain,
    center: *const c_double,
    len: usize,
    r: c_double,
    beta: c_double,
    out: *mut c_double,
) -> SkewlabStatus {
    guard(|| {
        if domain.is_null() || center.is_null() || out.is_null() {
            set_error("null pointer".into());
            return SkewlabStatus::NullPointer;
        }
        let d = &(*domain).inner;
        let result = read_point(d, center, len)
            .and_then(|c| KobayashiBall::new(d, c, r))
            .and_then(|ball| ball_volume(d, &ball, beta));
        match result {
            Ok(v) => {
                *out = v;
                SkewlabStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Radial-density measure `scale * delta^t dnu`.
///
/// # Safety
/// `domain` must be live; `out` valid; free with [`skewlab_measure_free`].
#[no_mangle]
pub unsafe extern "C" fn skewlab_measure_radial(
    domain: *const SkewlabDomain,
    t: c_double,
    scale: c_double,
    out: *mut *mut SkewlabMeasure,
) -> SkewlabStatus {
    guard(|| {
        if domain.is_null() || out.is_null() {
            set_error("null pointer".into());
            return SkewlabStatus::NullPointer;
        }
        match Measure::radial_density(&(*domain).inner, t, scale) {
            Ok(m) => {
                *out = Box::into_raw(Box::new(SkewlabMeasure { inner: m }));
                SkewlabStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Atomic measure from `count` points (interleaved, `2n` doubles each) and
/// `count` positive weights.
///
/// # Safety
/// `points` must hold `count * 2n` doubles and `weights` `count` doubles.
#[no_mangle]
pub unsafe extern "C" fn skewlab_measure_atomic(
    domain: *const SkewlabDomain,
    points: *const c_double,
    weights: *const c_double,
    count: usize,
    out: *mut *mut SkewlabMeasure,
) -> SkewlabStatus {
    guard(|| {
        if domain.is_null() || points.is_null() || weights.is_null() || out.is_null() {
            set_error("null pointer".into());
            return SkewlabStatus::NullPointer;
        }
        let d = &(*domain).inner;
        let stride = 2 * d.dim();
        let mut parsed = Vec::with_capacity(count);
        for i in 0..count {
            match read_point(d, points.add(i * stride), stride) {
                Ok(p) => parsed.push(p),
                Err(e) => return fail(e),
            }
        }
        let w = std::slice::from_raw_parts(weights, count).to_vec();
        match Measure::atomic(d, parsed, w) {
            Ok(m) => {
                *out = Box::into_raw(Box::new(SkewlabMeasure { inner: m }));
                SkewlabStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `measure` must come from a measure constructor and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn skewlab_measure_free(measure: *mut SkewlabMeasure) {
    if !measure.is_null() {
        drop(Box::from_raw(measure));
    }
}

/// Total mass of the measure.
///
/// # Safety
/// `measure` must be live and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn skewlab_total_mass(
    measure: *const SkewlabMeasure,
    out: *mut c_double,
) -> SkewlabStatus {
    guard(|| {
        if measure.is_null() || out.is_null() {
            set_error("null pointer".into());
            return SkewlabStatus::NullPointer;
        }
        *out = (*measure).inner.total_mass();
        SkewlabStatus::Ok
    })
}

/// `mu(B(z, r))`.
///
/// # Safety
/// All handles live, `z` of length `len`, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn skewlab_ball_mass(
    domain: *const SkewlabDomain,
    measure: *const SkewlabMeasure,
    z: *const c_double,
    len: usize,
    r: c_double,
    out: *mut c_double,
) -> SkewlabStatus {
    guard(|| {
        if domain.is_null() || measure.is_null() || z.is_null() || out.is_null() {
            set_error("null pointer".into());
            return SkewlabStatus::NullPointer;
        }
        let d = &(*domain).inner;
        let result = read_point(d, z, len)
            .and_then(|p| KobayashiBall::new(d, p, r))
            .and_then(|ball| ball_mass(d, &(*measure).inner, &ball));
        match result {
            Ok(v) => {
                *out = v;
                SkewlabStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Geometric quotient `mu(B(z,r)) / nu(B(z,r))^theta`.
///
/// # Safety
/// As for [`skewlab_ball_mass`].
#[no_mangle]
pub unsafe extern "C" fn skewlab_mu_hat(
    domain: *const SkewlabDomain,
    measure: *const SkewlabMeasure,
    z: *const c_double,
    len: usize,
    r: c_double,
    theta: c_double,
    out: *mut c_double,
) -> SkewlabStatus {
    guard(|| {
        if domain.is_null() || measure.is_null() || z.is_null() || out.is_null() {
            set_error("null pointer".into());
            return SkewlabStatus::NullPointer;
        }
        let d = &(*domain).inner;
        let result =
            read_point(d, z, len).and_then(|p| mu_hat(d, &(*measure).inner, &p, r, theta));
        match result {
            Ok(v) => {
                *out = v;
                SkewlabStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Classify the measure at `(lambda, gamma)`; writes the verdict and the
/// fitted boundary exponent (NaN when no fit was possible).
///
/// # Safety
/// Handles live; out pointers valid.
#[no_mangle]
pub unsafe extern "C" fn skewlab_classify(
    domain: *const SkewlabDomain,
    measure: *const SkewlabMeasure,
    lambda: c_double,
    gamma: c_double,
    r: c_double,
    slope_tol: c_double,
    out_verdict: *mut SkewlabVerdict,
    out_slope: *mut c_double,
) -> SkewlabStatus {
    guard(|| {
        if domain.is_null() || measure.is_null() || out_verdict.is_null() || out_slope.is_null() {
            set_error("null pointer".into());
            return SkewlabStatus::NullPointer;
        }
        let d = &(*domain).inner;
        let result = CarlesonParams::new(lambda, gamma, r).and_then(|cp| {
            let rule = if d.dim() == 1 {
                QuadratureRule::disk_tensor(96, 192, 4.0)?
            } else {
                QuadratureRule::ball_qmc(d.dim(), 100_000)?
            };
            classify_skew_carleson(
                d,
                &(*measure).inner,
                &cp,
                &GridSpec::default(),
                &rule,
                slope_tol,
            )
        });
        match result {
            Ok(cls) => {
                *out_verdict = match cls.verdict {
                    Verdict::Carleson => SkewlabVerdict::Carleson,
                    Verdict::Vanishing => SkewlabVerdict::Vanishing,
                    Verdict::NotCarleson => SkewlabVerdict::NotCarleson,
                    Verdict::Inconclusive => SkewlabVerdict::Inconclusive,
                };
                *out_slope = cls.fit.map(|f| f.slope).unwrap_or(f64::NAN);
                SkewlabStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Parameter map of the Toeplitz mapping problem. `out_gamma` and
/// `out_theta` receive NaN when `lambda = 0`; the hypothesis flags are the
/// per-index exponent conditions.
///
/// # Safety
/// Out pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn skewlab_derive_params(
    n: usize,
    p1: c_double,
    alpha1: c_double,
    p2: c_double,
    alpha2: c_double,
    beta: c_double,
    out_lambda: *mut c_double,
    out_gamma: *mut c_double,
    out_theta: *mut c_double,
    out_hypothesis_1: *mut c_int,
    out_hypothesis_2: *mut c_int,
) -> SkewlabStatus {
    guard(|| {
        if out_lambda.is_null()
            || out_gamma.is_null()
            || out_theta.is_null()
            || out_hypothesis_1.is_null()
            || out_hypothesis_2.is_null()
        {
            set_error("null pointer".into());
            return SkewlabStatus::NullPointer;
        }
        match derive_params(n, p1, alpha1, p2, alpha2, beta) {
            Ok(op) => {
                *out_lambda = op.lambda;
                *out_gamma = op.gamma.unwrap_or(f64::NAN);
                *out_theta = op
                    .gamma
                    .map(|g| 1.0 + g / (n as f64 + 1.0))
                    .unwrap_or(f64::NAN);
                *out_hypothesis_1 = op.hypothesis[0] as c_int;
                *out_hypothesis_2 = op.hypothesis[1] as c_int;
                SkewlabStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Run an experiment subcommand (`params`, `geometry`, `carleson`,
/// `berezin`, `toeplitz`, `vanishing`, `verify`) against a JSON
/// configuration and return the JSON report.
///
/// # Safety
/// `subcommand` and `config_json` must be NUL-terminated strings;
/// `out_report` must be valid. The returned string is released with
/// [`skewlab_string_free`].
#[no_mangle]
pub unsafe extern "C" fn skewlab_run_json(
    subcommand: *const c_char,
    config_json: *const c_char,
    out_report: *mut *mut c_char,
) -> SkewlabStatus {
    guard(|| {
        if subcommand.is_null() || config_json.is_null() || out_report.is_null() {
            set_error("null pointer".into());
            return SkewlabStatus::NullPointer;
        }
        let sub = match CStr::from_ptr(subcommand).to_str() {
            Ok(s) => s,
            Err(_) => {
                set_error("subcommand is not valid UTF-8".into());
                return SkewlabStatus::InvalidArgument;
            }
        };
        let config_text = match CStr::from_ptr(config_json).to_str() {
            Ok(s) => s,
            Err(_) => {
                set_error("config is not valid UTF-8".into());
                return SkewlabStatus::InvalidArgument;
            }
        };
        let result = ExperimentConfig::from_json(config_text)
            .and_then(|config| skewlab::report::run_experiment(sub, &config));
        match result {
            Ok(report) => {
                let json = report.to_json();
                match CString::new(json) {
                    Ok(cstring) => {
                        *out_report = cstring.into_raw();
                        SkewlabStatus::Ok
                    }
                    Err(_) => {
                        set_error("report contained a NUL byte".into());
                        SkewlabStatus::InvalidArgument
                    }
                }
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `s` must have been returned by this library and not freed before.
#[no_mangle]
pub unsafe extern "C" fn skewlab_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
