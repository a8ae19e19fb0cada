use std::ffi::{c_void, CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use fbsde_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(fbsde_last_error()) }.to_string_lossy().into_owned()
}

fn example1() -> *mut FbsdeProblem {
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { fbsde_problem_example1(&mut p) }, FbsdeStatus::Ok);
    p
}

#[test]
fn solve_matches_library() {
    let p = example1();
    let params = fbsde_params_default();
    let mut s = FbsdeSolution { y0: 0.0, z0: 0.0, err_y: 0.0, err_z: 0.0, out_of_domain: 0, wall_time_seconds: 0.0 };
    assert_eq!(unsafe { fbsde_solve(p, &params, 16, &mut s) }, FbsdeStatus::Ok);
    let direct = fbsde::solve(&fbsde::problems::example1(), &fbsde::SchemeParams::default(), 16, false).unwrap();
    assert_eq!(s.y0.to_bits(), direct.y0.to_bits());
    assert_eq!(s.z0.to_bits(), direct.z0.to_bits());
    assert_eq!(s.err_y, direct.err_y.unwrap());
    unsafe { fbsde_problem_free(p) };
}

#[test]
fn errors_set_status_and_message() {
    let p = example1();
    let mut params = fbsde_params_default();
    params.alpha = 0.0;
    let mut s = FbsdeSolution { y0: 0.0, z0: 0.0, err_y: 0.0, err_z: 0.0, out_of_domain: 0, wall_time_seconds: 0.0 };
    assert_eq!(unsafe { fbsde_solve(p, &params, 8, &mut s) }, FbsdeStatus::InvalidArgument);
    assert!(last_error().contains("alpha"), "{}", last_error());
    assert_eq!(unsafe { fbsde_solve(ptr::null(), &params, 8, &mut s) }, FbsdeStatus::NullPointer);
    assert_eq!(unsafe { fbsde_problem_example1(ptr::null_mut()) }, FbsdeStatus::NullPointer);
    let mut q = ptr::null_mut();
    assert_eq!(unsafe { fbsde_problem_example2(f64::NAN, 1.0, &mut q) }, FbsdeStatus::InvalidArgument);
    assert!(q.is_null());
    unsafe { fbsde_problem_free(p) };
    unsafe { fbsde_problem_free(ptr::null_mut()) };
}

#[test]
fn convergence_report_round_trip() {
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { fbsde_problem_example2(-0.5, 1.0, &mut p) }, FbsdeStatus::Ok);
    let params = fbsde_params_default();
    let steps = [8u32, 16, 32];
    let mut r = ptr::null_mut();
    assert_eq!(unsafe { fbsde_convergence_study(p, &params, steps.as_ptr(), steps.len(), &mut r) }, FbsdeStatus::Ok);
    assert_eq!(unsafe { fbsde_report_len(r) }, 3);

    let mut row = FbsdeReportRow { steps: 0, h: 0.0, err_y: 0.0, err_z: 0.0, wall_time_seconds: 0.0 };
    assert_eq!(unsafe { fbsde_report_row(r, 2, &mut row) }, FbsdeStatus::Ok);
    assert_eq!(row.steps, 32);
    assert_eq!(unsafe { fbsde_report_row(r, 3, &mut row) }, FbsdeStatus::InvalidArgument);

    let (mut cy, mut cz) = (0.0, 0.0);
    assert_eq!(unsafe { fbsde_report_rates(r, &mut cy, &mut cz) }, FbsdeStatus::Ok);
    assert!((cy - 2.0).abs() < 0.2 && (cz - 2.0).abs() < 0.4, "{cy} {cz}");

    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("r.csv").to_str().unwrap()).unwrap();
    assert_eq!(unsafe { fbsde_report_write_csv(r, path.as_ptr(), 0) }, FbsdeStatus::Ok);
    let text = std::fs::read_to_string(dir.path().join("r.csv")).unwrap();
    assert!(text.starts_with("N,h,err_y,err_z,runtime_s\n8,"));
    let bad = CString::new(dir.path().join("missing/r.csv").to_str().unwrap()).unwrap();
    assert_eq!(unsafe { fbsde_report_write_csv(r, bad.as_ptr(), 0) }, FbsdeStatus::Io);

    unsafe {
        fbsde_report_free(r);
        fbsde_problem_free(p);
    }
}

#[test]
fn rate_helper() {
    let hs = [0.25, 0.125, 0.0625];
    let errs = [1.6e-3, 4e-4, 1e-4];
    let mut out = 0.0;
    assert_eq!(unsafe { fbsde_convergence_rate(hs.as_ptr(), errs.as_ptr(), 3, &mut out) }, FbsdeStatus::Ok);
    assert!((out - 2.0).abs() < 1e-12);
    assert_eq!(unsafe { fbsde_convergence_rate(hs.as_ptr(), errs.as_ptr(), 1, &mut out) }, FbsdeStatus::InvalidArgument);
}

extern "C" fn zero2(_: *mut c_void, _: f64, _: f64) -> f64 {
    0.0
}
extern "C" fn one2(_: *mut c_void, _: f64, _: f64) -> f64 {
    1.0
}
extern "C" fn shifted(u: *mut c_void, _: f64, _: f64, _: f64) -> f64 {
    unsafe { *(u as *const f64) }
}
extern "C" fn ident(_: *mut c_void, x: f64) -> f64 {
    x
}
extern "C" fn one1(_: *mut c_void, _: f64) -> f64 {
    1.0
}

#[test]
fn callback_problem() {
    let mut c = 0.02f64;
    let cb = FbsdeCallbacks {
        user_data: &mut c as *mut f64 as *mut c_void,
        drift: Some(zero2),
        diffusion: Some(one2),
        generator: Some(shifted),
        terminal_y: Some(ident),
        terminal_z: Some(one1),
    };
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { fbsde_problem_from_callbacks(&cb, 1.0, 0.5, &mut p) }, FbsdeStatus::Ok);
    let params = fbsde_params_default();
    let mut s = FbsdeSolution { y0: 0.0, z0: 0.0, err_y: 0.0, err_z: 0.0, out_of_domain: 0, wall_time_seconds: 0.0 };
    assert_eq!(unsafe { fbsde_solve(p, &params, 8, &mut s) }, FbsdeStatus::Ok);
    // Y_t = X_t + c (T − t) for a constant generator c
    assert!((s.y0 - 0.52).abs() < 1e-10 && (s.z0 - 1.0).abs() < 1e-10);
    assert!(s.err_y.is_nan());

    let steps = [4u32, 8];
    let mut r = ptr::null_mut();
    assert_eq!(unsafe { fbsde_convergence_study(p, &params, steps.as_ptr(), 2, &mut r) }, FbsdeStatus::InvalidArgument);
    assert!(r.is_null());
    unsafe { fbsde_problem_free(p) };

    let missing = FbsdeCallbacks { generator: None, ..cb };
    let mut q = ptr::null_mut();
    assert_eq!(unsafe { fbsde_problem_from_callbacks(&missing, 1.0, 0.0, &mut q) }, FbsdeStatus::NullPointer);
}

fn target_dir() -> PathBuf {
    // target/<profile>/deps/abi-<hash>
    std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn header_declares_api() {
    let header = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/fbsde.h")).unwrap();
    for symbol in [
        "fbsde_last_error",
        "fbsde_params_default",
        "fbsde_problem_example1",
        "fbsde_problem_example2",
        "fbsde_problem_from_callbacks",
        "fbsde_problem_free",
        "fbsde_solve",
        "fbsde_convergence_study",
        "fbsde_report_len",
        "fbsde_report_row",
        "fbsde_report_rates",
        "fbsde_report_write_csv",
        "fbsde_report_free",
        "fbsde_convergence_rate",
        "typedef struct FbsdeProblem FbsdeProblem;",
        "FBSDE_STATUS_INVALID_ARGUMENT = 2",
    ] {
        assert!(header.contains(symbol), "{symbol} missing from header");
    }
}

#[test]
fn c_program_links_against_shared_library() {
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let lib_dir = target_dir();
    assert!(lib_dir.join("libfbsde_ffi.so").exists() || lib_dir.join("libfbsde_ffi.dylib").exists());
    let out_dir = tempfile::tempdir().unwrap();
    let exe = out_dir.path().join("smoke");
    let status = Command::new(std::env::var("CC").unwrap_or_else(|_| "cc".into()))
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg("-L")
        .arg(&lib_dir)
        .args(["-lfbsde_ffi", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("C compiler available");
    assert!(status.success());
    let run = Command::new(&exe).env("LD_LIBRARY_PATH", &lib_dir).env("DYLD_LIBRARY_PATH", &lib_dir).output().unwrap();
    assert!(run.status.success(), "exit {:?}", run.status.code());
    assert_eq!(String::from_utf8_lossy(&run.stdout).trim(), "ok");
}
