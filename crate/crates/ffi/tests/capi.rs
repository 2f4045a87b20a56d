use std::ffi::{c_char, CStr};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use autotherm_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as c_char; unsafe { at_last_error(ptr::null_mut(), 0) }];
    unsafe { at_last_error(buf.as_mut_ptr(), buf.len()) };
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

fn builtin(family: AtFamily, a: f64, b: f64) -> *mut AtScenario {
    let mut h = ptr::null_mut();
    let st = unsafe { at_scenario_builtin(family, a, b, false, &mut h) };
    assert_eq!(st, AtStatus::AtOk, "{}", last_error());
    assert!(!h.is_null());
    h
}

fn scenarios_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

#[test]
fn builtin_passes_all_checks() {
    let h = builtin(AtFamily::AtCmaybe, 0.9, 0.0);
    let mut recs = [AtCheck {
        name: [0; 32],
        residual: 0.0,
        threshold: 0.0,
        pass: false,
    }; 16];
    let (mut n, mut ok) = (0usize, false);
    let st = unsafe { at_verify(h, 1.3, 4, recs.as_mut_ptr(), recs.len(), &mut n, &mut ok) };
    assert_eq!(st, AtStatus::AtOk, "{}", last_error());
    assert!(ok);
    assert_eq!(n, 9);
    let names: Vec<String> = recs[..n]
        .iter()
        .map(|r| unsafe { CStr::from_ptr(r.name.as_ptr()) }.to_string_lossy().into_owned())
        .collect();
    assert!(names.contains(&"pt_unitarity".to_string()));
    for r in &recs[..n] {
        assert!(r.residual <= 1e-10);
    }

    let st = unsafe { at_verify(h, 1.3, 4, recs.as_mut_ptr(), 2, &mut n, &mut ok) };
    assert_eq!(st, AtStatus::AtBufferTooSmall);
    assert_eq!(n, 9);
    unsafe { at_scenario_free(h) };
}

#[test]
fn swap_file_fails_checks() {
    let path = scenarios_dir().join("swap_counterexample.toml");
    let c = std::ffi::CString::new(path.to_str().unwrap()).unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { at_scenario_from_file(c.as_ptr(), &mut h) }, AtStatus::AtOk, "{}", last_error());
    let mut recs = [AtCheck {
        name: [0; 32],
        residual: 0.0,
        threshold: 0.0,
        pass: false,
    }; 16];
    let (mut n, mut ok) = (0usize, true);
    let st = unsafe { at_verify(h, std::f64::consts::FRAC_PI_4, 4, recs.as_mut_ptr(), 16, &mut n, &mut ok) };
    assert_eq!(st, AtStatus::AtOk);
    assert!(!ok);
    unsafe { at_scenario_free(h) };
}

#[test]
fn ledger_and_speed_limit() {
    let h = builtin(AtFamily::AtWernerXx, 0.5, 0.3);
    let mut l = AtLedger::default();
    assert_eq!(unsafe { at_ledger(h, 1.1, &mut l) }, AtStatus::AtOk);
    assert!(l.first_law_residual.abs() <= 1e-10);
    assert!(l.second_law_residual.abs() <= 1e-8);
    assert!(l.landauer_margin >= -1e-9);

    let mut q = AtQtsl::default();
    assert_eq!(unsafe { at_qtsl(h, 1.0, 1.1, 1e-11, &mut q) }, AtStatus::AtOk, "{}", last_error());
    let mut f = AtClosedForms::default();
    assert_eq!(unsafe { at_closed_forms(AtFamily::AtWernerXx, 0.5, 0.3, 1.1, &mut f) }, AtStatus::AtOk);
    assert!((q.lambda_s - f.lambda_s).abs() <= 1e-9);
    assert!((q.dist_m - f.dist_m).abs() <= 1e-9);
    assert!(q.fannes_margin >= -1e-9);

    let mut q_inf = AtQtsl::default();
    assert_eq!(unsafe { at_qtsl(h, f64::INFINITY, 1.1, 0.0, &mut q_inf) }, AtStatus::AtOk);
    assert!(q_inf.p.is_infinite());
    unsafe { at_scenario_free(h) };
}

#[test]
fn reduced_state_is_a_state() {
    let h = builtin(AtFamily::AtWernerZx, 0.4, 1.0);
    let mut d = 0usize;
    let mut data = [0.0f64; 8];
    let st = unsafe { at_reduced_state(h, 0.7, c"memory".as_ptr(), data.as_mut_ptr(), data.len(), &mut d) };
    assert_eq!(st, AtStatus::AtOk);
    assert_eq!(d, 2);
    assert!((data[0] + data[6] - 1.0).abs() <= 1e-12);
    assert!((data[2] - data[4]).abs() <= 1e-12 && (data[3] + data[5]).abs() <= 1e-12);

    let st = unsafe { at_reduced_state(h, 0.7, c"nowhere".as_ptr(), data.as_mut_ptr(), data.len(), &mut d) };
    assert_eq!(st, AtStatus::AtInvalidInput);
    assert!(last_error().contains("nowhere"));

    let mut dim = 0usize;
    assert_eq!(unsafe { at_scenario_dim(h, c"work".as_ptr(), &mut dim) }, AtStatus::AtOk);
    assert_eq!(dim, 2);
    unsafe { at_scenario_free(h) };
}

#[test]
fn null_and_bad_inputs() {
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { at_scenario_from_toml(ptr::null(), &mut h) }, AtStatus::AtNullPointer);
    assert_eq!(unsafe { at_scenario_from_file(c"/no/such/file.toml".as_ptr(), &mut h) }, AtStatus::AtIo);
    assert_eq!(unsafe { at_ledger(ptr::null(), 1.0, ptr::null_mut()) }, AtStatus::AtNullPointer);
    let mut l = AtLedger::default();
    let s = builtin(AtFamily::AtCmaybe, 0.2, 0.0);
    assert_eq!(unsafe { at_ledger(s, 1.0, ptr::null_mut()) }, AtStatus::AtNullPointer);
    assert_eq!(unsafe { at_ledger(s, 1.0, &mut l) }, AtStatus::AtOk);
    assert!(last_error().is_empty());
    unsafe { at_scenario_free(s) };
    unsafe { at_scenario_free(ptr::null_mut()) };

    let mut x = 0.0;
    assert_eq!(unsafe { at_ellipe(-1.0, 0.5, &mut x) }, AtStatus::AtInvalidInput);
    assert_eq!(unsafe { at_ellipe(std::f64::consts::FRAC_PI_2, 0.5, &mut x) }, AtStatus::AtOk);
    assert!((x - 1.3506438810476755).abs() <= 1e-12);
    assert!((at_abs_cos_integral(std::f64::consts::PI) - 2.0).abs() <= 1e-14);
    assert!((at_abs_sin_integral(std::f64::consts::PI) - 2.0).abs() <= 1e-14);
    let mut f = AtClosedForms::default();
    assert_eq!(unsafe { at_closed_forms(AtFamily::AtCmaybe, 0.5, 0.0, 0.0, &mut f) }, AtStatus::AtInvalidInput);
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/autotherm.h")).unwrap();
    for sym in [
        "typedef struct AtScenario AtScenario;",
        "at_scenario_from_file",
        "at_scenario_from_toml",
        "at_scenario_builtin",
        "at_scenario_free",
        "at_verify",
        "at_ledger",
        "at_qtsl",
        "at_reduced_state",
        "at_ellipe",
        "at_closed_forms",
        "at_last_error",
        "AT_BUFFER_TOO_SMALL",
    ] {
        assert!(header.contains(sym), "{sym}");
    }
}

/// Compiles and runs a C program against the header and the static library
/// when both a C compiler and the archive are around.
#[test]
fn c_program_links_and_runs() {
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let profile_dir = Path::new(env!("CARGO_TARGET_TMPDIR")).parent().unwrap().join(if cfg!(debug_assertions) {
        "debug"
    } else {
        "release"
    });
    let archive = profile_dir.join("libautotherm_ffi.a");
    if !archive.exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler or static library");
        return;
    }
    let exe = Path::new(env!("CARGO_TARGET_TMPDIR")).join("autotherm_smoke");
    let status = Command::new("cc")
        .arg(manifest.join("tests/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&archive)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok "));
}
