//! Exercise the C ABI exactly as a foreign caller would: raw pointers,
//! status codes, handle lifecycles, and the JSON entry point.

use skewlab_ffi::*;
use std::ffi::{CStr, CString};

fn ok(status: SkewlabStatus) {
    if status != SkewlabStatus::Ok {
        let msg = unsafe {
            let ptr = skewlab_last_error();
            if ptr.is_null() {
                "<no message>".to_string()
            } else {
                CStr::from_ptr(ptr).to_string_lossy().into_owned()
            }
        };
        panic!("ffi call failed with {status:?}: {msg}");
    }
}

#[test]
fn version_is_a_c_string() {
    let ptr = skewlab_version();
    let text = unsafe { CStr::from_ptr(ptr) }.to_str().unwrap();
    assert_eq!(text, env!("CARGO_PKG_VERSION"));
}

#[test]
fn geometry_round_trip() {
    unsafe {
        let mut domain = std::ptr::null_mut();
        ok(skewlab_domain_new(1, false, &mut domain));

        let mut delta = 0.0;
        let z = [0.9, 0.0];
        ok(skewlab_boundary_distance(domain, z.as_ptr(), 2, &mut delta));
        assert!((delta - 0.19).abs() < 1e-15); // smooth convention

        let origin = [0.0, 0.0];
        let half = [0.5, 0.0];
        let mut dist = 0.0;
        ok(skewlab_kobayashi_distance(
            domain,
            origin.as_ptr(),
            half.as_ptr(),
            2,
            &mut dist,
        ));
        assert!((dist - 0.5 * 3.0f64.ln()).abs() < 1e-14);

        let mut volume = 0.0;
        ok(skewlab_ball_volume(
            domain,
            origin.as_ptr(),
            2,
            0.5,
            0.0,
            &mut volume,
        ));
        assert!((volume - std::f64::consts::PI / 4.0).abs() < 1e-12);

        // boundary point is rejected with a domain status
        let outside = [1.0, 0.0];
        let status = skewlab_boundary_distance(domain, outside.as_ptr(), 2, &mut delta);
        assert_eq!(status, SkewlabStatus::OutsideDomain);
        let msg = CStr::from_ptr(skewlab_last_error()).to_string_lossy().into_owned();
        assert!(msg.contains("outside"), "{msg}");

        skewlab_domain_free(domain);
    }
}

#[test]
fn measures_and_classification() {
    unsafe {
        let mut domain = std::ptr::null_mut();
        ok(skewlab_domain_new(1, false, &mut domain));

        // vanishing density delta^0.5
        let mut measure = std::ptr::null_mut();
        ok(skewlab_measure_radial(domain, 0.5, 1.0, &mut measure));
        let mut verdict = SkewlabVerdict::Inconclusive;
        let mut slope = f64::NAN;
        ok(skewlab_classify(
            domain,
            measure,
            1.0,
            0.0,
            0.5,
            0.1,
            &mut verdict,
            &mut slope,
        ));
        assert_eq!(verdict, SkewlabVerdict::Vanishing);
        assert!((slope - 0.5).abs() < 0.1, "slope {slope}");
        skewlab_measure_free(measure);

        // atomic measure: exact ball masses
        let points = [0.3, 0.0, -0.1, 0.4];
        let weights = [2.0, 3.0];
        let mut atomic = std::ptr::null_mut();
        ok(skewlab_measure_atomic(
            domain,
            points.as_ptr(),
            weights.as_ptr(),
            2,
            &mut atomic,
        ));
        let mut mass = 0.0;
        ok(skewlab_total_mass(atomic, &mut mass));
        assert_eq!(mass, 5.0);
        let origin = [0.0, 0.0];
        let mut in_ball = 0.0;
        ok(skewlab_ball_mass(
            domain,
            atomic,
            origin.as_ptr(),
            2,
            0.35,
            &mut in_ball,
        ));
        assert_eq!(in_ball, 2.0); // only the atom at 0.3

        let mut hat = 0.0;
        ok(skewlab_mu_hat(
            domain,
            atomic,
            origin.as_ptr(),
            2,
            0.35,
            1.0,
            &mut hat,
        ));
        assert!((hat - 2.0 / (std::f64::consts::PI * 0.35 * 0.35)).abs() < 1e-12);

        // invalid weights surface as a parameter error
        let bad_weights = [1.0, -1.0];
        let mut bad = std::ptr::null_mut();
        let status = skewlab_measure_atomic(
            domain,
            points.as_ptr(),
            bad_weights.as_ptr(),
            2,
            &mut bad,
        );
        assert_eq!(status, SkewlabStatus::ParameterError);

        skewlab_measure_free(atomic);
        skewlab_domain_free(domain);
    }
}

#[test]
fn derive_params_matches_formulas() {
    unsafe {
        let (mut lambda, mut gamma, mut theta) = (0.0, 0.0, 0.0);
        let (mut h1, mut h2) = (0, 0);
        ok(skewlab_derive_params(
            1, 2.0, 1.0, 3.0, 2.0, 1.0, &mut lambda, &mut gamma, &mut theta, &mut h1, &mut h2,
        ));
        assert!((lambda - 7.0 / 6.0).abs() < 1e-14);
        assert!((gamma - 5.0 / 7.0).abs() < 1e-13);
        assert!((theta - (1.0 + gamma / 2.0)).abs() < 1e-14);
        assert_eq!((h1, h2), (1, 1));

        // lambda = 0 regime: gamma/theta come back NaN
        ok(skewlab_derive_params(
            1, 1.0, 0.0, 0.5, 0.0, 2.0, &mut lambda, &mut gamma, &mut theta, &mut h1, &mut h2,
        ));
        assert_eq!(lambda, 0.0);
        assert!(gamma.is_nan() && theta.is_nan());
    }
}

#[test]
fn run_json_params() {
    unsafe {
        let subcommand = CString::new("params").unwrap();
        let config = CString::new(
            r#"{"operator": {"p1": 2.0, "alpha1": 0.0, "p2": 2.0, "alpha2": 0.0, "beta": 1.0}}"#,
        )
        .unwrap();
        let mut report_ptr: *mut libc::c_char = std::ptr::null_mut();
        ok(skewlab_run_json(
            subcommand.as_ptr(),
            config.as_ptr(),
            &mut report_ptr,
        ));
        let report = CStr::from_ptr(report_ptr).to_str().unwrap().to_string();
        skewlab_string_free(report_ptr);
        let parsed: serde_json::Value = serde_json::from_str(&report).unwrap();
        assert_eq!(parsed["params"]["lambda"], 1.0);
        assert_eq!(parsed["params"]["gamma"], 1.0);

        // config errors map to the config status
        let bad = CString::new(r#"{"oops": 1}"#).unwrap();
        let status = skewlab_run_json(subcommand.as_ptr(), bad.as_ptr(), &mut report_ptr);
        assert_eq!(status, SkewlabStatus::ConfigError);
    }
}

#[test]
fn generated_header_covers_the_surface() {
    let header = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/include/skewlab.h"
    ))
    .expect("build.rs generated include/skewlab.h");
    for symbol in [
        "SkewlabStatus",
        "SkewlabVerdict",
        "skewlab_domain_new",
        "skewlab_domain_free",
        "skewlab_measure_radial",
        "skewlab_measure_atomic",
        "skewlab_classify",
        "skewlab_derive_params",
        "skewlab_run_json",
        "skewlab_string_free",
        "skewlab_last_error",
    ] {
        assert!(header.contains(symbol), "header is missing {symbol}");
    }
    assert!(header.contains("typedef struct SkewlabDomain SkewlabDomain"));
}
