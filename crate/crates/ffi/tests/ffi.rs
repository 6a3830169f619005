use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use dfl_array_ffi::*;

const REFERENCE: &str = r#"{"frequency_hz": 2.4868e9, "d0_m": 5.0, "da_m": 0.06, "h_m": 0.9, "M": 2,
    "target": {"ay_m": 0.45, "az_m": 0.9, "x_m": 2.5, "y_m": 0.0}}"#;

fn last_error() -> String {
    unsafe { CStr::from_ptr(dfl_last_error()) }
        .to_string_lossy()
        .into_owned()
}

fn scenario(json: &str) -> *mut DflScenario {
    let json = CString::new(json).unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(
        unsafe { dfl_scenario_from_json(json.as_ptr(), &mut s) },
        DflStatus::Ok,
        "{}",
        last_error()
    );
    s
}

#[test]
fn doa_round_trip() {
    unsafe {
        let s = scenario(REFERENCE);
        let mut n = 0usize;
        assert_eq!(dfl_scenario_num_antennas(s, &mut n), DflStatus::Ok);
        assert_eq!(n, 5);

        let mut e = ptr::null_mut();
        assert_eq!(dfl_doa_run(s, &mut e), DflStatus::Ok);
        let mut summary = DflEstimateSummary::default();
        assert_eq!(dfl_estimate_summary(e, &mut summary), DflStatus::Ok);
        assert_eq!(summary.gamma_hat_deg, 90.0);
        assert!(summary.attenuation_db > 0.0);
        assert_eq!(summary.p0, 1.0);

        let mut needed = 0usize;
        assert_eq!(
            dfl_estimate_curve(e, ptr::null_mut(), ptr::null_mut(), 0, &mut needed),
            DflStatus::BufferTooSmall
        );
        assert_eq!(needed, 1801);
        assert!(last_error().contains("1801"));
        let (mut g, mut r) = (vec![0.0; needed], vec![0.0; needed]);
        assert_eq!(
            dfl_estimate_curve(e, g.as_mut_ptr(), r.as_mut_ptr(), needed, ptr::null_mut()),
            DflStatus::Ok
        );
        assert_eq!(g[900], std::f64::consts::FRAC_PI_2);
        let best = r.iter().copied().fold(f64::MIN, f64::max);
        assert_eq!(r[900], best);
        assert!(last_error().is_empty());

        let mut att = [0.0; 5];
        assert_eq!(
            dfl_estimate_antenna_attenuation(e, att.as_mut_ptr(), 5, ptr::null_mut()),
            DflStatus::Ok
        );
        assert_eq!(att[0], att[4]);
        assert_eq!(att[1], att[3]);

        dfl_estimate_free(e);
        dfl_scenario_free(s);
    }
}

#[test]
fn matches_the_library() {
    let lib = dfl_array::Scenario::from_json_str(REFERENCE).unwrap();
    let expected = dfl_array::sweep::evaluate(&lib).unwrap();
    unsafe {
        let s = scenario(REFERENCE);
        let mut e = ptr::null_mut();
        assert_eq!(dfl_doa_run(s, &mut e), DflStatus::Ok);
        let mut summary = DflEstimateSummary::default();
        dfl_estimate_summary(e, &mut summary);
        assert_eq!(summary.attenuation_db, expected.estimate.attenuation_db);
        assert_eq!(summary.py, expected.estimate.py);

        let (mut re, mut im) = ([0.0; 5], [0.0; 5]);
        assert_eq!(
            dfl_signal_vector(s, re.as_mut_ptr(), im.as_mut_ptr(), 5, ptr::null_mut()),
            DflStatus::Ok
        );
        let sig = dfl_array::em_model::signal_vector(&lib.layout, &lib.occupancy(), &lib.quadrature).unwrap();
        for (k, c) in sig.as_slice().iter().enumerate() {
            assert_eq!((re[k], im[k]), (c.re, c.im));
        }
        dfl_estimate_free(e);
        dfl_scenario_free(s);
    }
}

#[test]
fn target_editing() {
    unsafe {
        let s = scenario(REFERENCE);
        assert_eq!(dfl_scenario_set_target(s, 0.45, 0.9, 0.0, 2.5, 0.4), DflStatus::Ok);
        let mut e = ptr::null_mut();
        dfl_doa_run(s, &mut e);
        let mut right = DflEstimateSummary::default();
        dfl_estimate_summary(e, &mut right);
        dfl_estimate_free(e);
        assert!(right.gamma_hat_deg < 90.0);

        assert_eq!(
            dfl_scenario_set_target(s, 0.0, 0.9, 0.0, 2.5, 0.4),
            DflStatus::Validation
        );
        assert!(last_error().contains("a_y"), "{}", last_error());

        assert_eq!(dfl_scenario_clear_target(s), DflStatus::Ok);
        dfl_doa_run(s, &mut e);
        let mut att = [1.0; 5];
        dfl_estimate_antenna_attenuation(e, att.as_mut_ptr(), 5, ptr::null_mut());
        assert_eq!(att, [0.0; 5]);
        dfl_estimate_free(e);

        assert_eq!(dfl_scenario_set_target(s, 0.45, 0.9, 0.0, 4.99, 0.0), DflStatus::Ok);
        assert_eq!(dfl_doa_run(s, &mut e), DflStatus::Numerical);
        assert!(e.is_null());
        dfl_scenario_free(s);
    }
}

#[test]
fn errors_and_nulls() {
    unsafe {
        let mut s = ptr::null_mut();
        let bad = CString::new(r#"{"frequency_hz": -1}"#).unwrap();
        assert_eq!(dfl_scenario_from_json(bad.as_ptr(), &mut s), DflStatus::Validation);
        assert!(s.is_null());
        assert!(!last_error().is_empty());

        assert_eq!(dfl_scenario_from_json(ptr::null(), &mut s), DflStatus::NullPointer);
        let mut e = ptr::null_mut();
        assert_eq!(dfl_doa_run(ptr::null(), &mut e), DflStatus::NullPointer);
        assert_eq!(
            dfl_fresnel_radius(2.4868e9, 5.0, ptr::null_mut()),
            DflStatus::NullPointer
        );

        let missing = CString::new("/nonexistent/scenario.json").unwrap();
        assert_eq!(dfl_scenario_load(missing.as_ptr(), &mut s), DflStatus::Io);

        let not_utf8 = [0xffu8, 0xfe, 0];
        assert_eq!(
            dfl_scenario_from_json(not_utf8.as_ptr().cast(), &mut s),
            DflStatus::Validation
        );

        dfl_scenario_free(ptr::null_mut());
        dfl_estimate_free(ptr::null_mut());
    }
}

#[test]
fn load_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    std::fs::write(&path, REFERENCE).unwrap();
    let c = CString::new(path.to_str().unwrap()).unwrap();
    unsafe {
        let mut s = ptr::null_mut();
        assert_eq!(dfl_scenario_load(c.as_ptr(), &mut s), DflStatus::Ok);
        let mut lam = 0.0;
        dfl_scenario_wavelength(s, &mut lam);
        assert!((lam - 0.1205535).abs() < 1e-6);
        dfl_scenario_free(s);
    }
}

#[test]
fn array_factor_and_fresnel() {
    let lam = dfl_array::geometry::wavelength_for(2.4868e9);
    let json = format!(
        r#"{{"frequency_hz": 2.4868e9, "d0_m": 4.0, "da_m": {}, "h_m": 0.9, "M": 4}}"#,
        lam / 2.0
    );
    unsafe {
        let s = scenario(&json);
        let mut v = 0.0;
        assert_eq!(
            dfl_array_factor(s, std::f64::consts::FRAC_PI_2, DflHypothesis::Planar as u32, &mut v),
            DflStatus::Ok
        );
        assert_eq!(v, 1.0);
        dfl_array_factor(s, std::f64::consts::FRAC_PI_2, DflHypothesis::NonPlanar as u32, &mut v);
        assert!(v < 1.0 && v > 0.5);
        assert_eq!(dfl_array_factor(s, 1.0, 7, &mut v), DflStatus::Validation);
        assert_eq!(dfl_array_factor(s, 4.0, 0, &mut v), DflStatus::Validation);
        dfl_scenario_free(s);

        let mut r = 0.0;
        assert_eq!(dfl_fresnel_radius(2.4868e9, 5.0, &mut r), DflStatus::Ok);
        assert!((0.385..=0.392).contains(&r));
        assert_eq!(dfl_fresnel_radius(0.0, 5.0, &mut r), DflStatus::Validation);
    }
}

#[test]
fn last_error_is_per_thread() {
    unsafe {
        let mut r = 0.0;
        dfl_fresnel_radius(-1.0, 5.0, &mut r);
    }
    assert!(!last_error().is_empty());
    let other = std::thread::spawn(last_error).join().unwrap();
    assert!(other.is_empty());
}

fn header() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("include")
        .join("dfl_array.h")
}

#[test]
fn header_declares_the_exports() {
    let h = std::fs::read_to_string(header()).unwrap();
    for name in [
        "dfl_last_error",
        "dfl_scenario_from_json",
        "dfl_scenario_load",
        "dfl_scenario_free",
        "dfl_doa_run",
        "dfl_estimate_summary",
        "dfl_estimate_curve",
        "dfl_estimate_free",
        "dfl_signal_vector",
        "dfl_array_factor",
        "dfl_fresnel_radius",
        "typedef struct DflScenario DflScenario",
        "DFL_STATUS_BUFFER_TOO_SMALL = 5",
        "DFL_HYPOTHESIS_NON_PLANAR = 1",
    ] {
        assert!(h.contains(name), "{name}");
    }
}

/// Compiles a small C program against the header and, when the static
/// library is present, links and runs it. Skipped without a C compiler.
#[test]
fn c_program_uses_the_header() {
    let Some(cc) = ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| Command::new(c).arg("--version").output().is_ok())
    else {
        eprintln!("no C compiler, skipping");
        return;
    };
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(
        &src,
        r#"
#include <stdio.h>
#include "dfl_array.h"
int main(void) {
    double r = 0.0;
    if (dfl_fresnel_radius(2.4868e9, 5.0, &r) != DFL_STATUS_OK) return 1;
    if (r < 0.385 || r > 0.392) return 2;
    DflScenario *s = NULL;
    if (dfl_scenario_from_json("{\"frequency_hz\": 2.4868e9, \"d0_m\": 5.0, \"da_m\": 0.06, \"h_m\": 0.9, \"M\": 2}", &s) != DFL_STATUS_OK) return 3;
    DflEstimate *e = NULL;
    if (dfl_doa_run(s, &e) != DFL_STATUS_OK) return 4;
    DflEstimateSummary sum;
    dfl_estimate_summary(e, &sum);
    if (sum.gamma_hat_deg != 90.0) return 5;
    if (dfl_scenario_from_json("{", &s) != DFL_STATUS_VALIDATION) return 6;
    if (dfl_last_error()[0] == '\0') return 7;
    dfl_estimate_free(e);
    dfl_scenario_free(s);
    printf("ok\n");
    return 0;
}
"#,
    )
    .unwrap();
    let include = header().parent().unwrap().to_path_buf();
    let syntax = Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(&include)
        .arg(&src)
        .output()
        .unwrap();
    assert!(syntax.status.success(), "{}", String::from_utf8_lossy(&syntax.stderr));

    // target/<profile>/deps/ffi-<hash> -> target/<profile>/libdfl_array_ffi.a
    let exe = std::env::current_exe().unwrap();
    let lib = exe.parent().and_then(Path::parent).unwrap().join("libdfl_array_ffi.a");
    if !lib.exists() {
        eprintln!("{} not built, skipping link", lib.display());
        return;
    }
    let bin = dir.path().join("main");
    let link = Command::new(cc)
        .args(["-std=c99", "-I"])
        .arg(&include)
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .output()
        .unwrap();
    assert!(link.status.success(), "{}", String::from_utf8_lossy(&link.stderr));
    let run = Command::new(&bin).output().unwrap();
    assert!(run.status.success(), "exit {:?}", run.status.code());
    assert_eq!(String::from_utf8_lossy(&run.stdout), "ok\n");
}
