#![allow(clippy::approx_constant)]

use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use hetmeta_ffi::*;

fn last_code() -> String {
    let p = hetmeta_last_error_code();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string()
}

fn jeong() -> *mut HetmetaDataset {
    let y = [-3.10, -6.30, -9.40, -14.20, -7.00, -9.00, -3.40, -2.20, -1.40, -2.00];
    let v = [1.81, 3.16, 0.53, 3.04, 1.40, 1.60, 2.41, 1.15, 0.97, 1.06];
    let n = [8u32, 11, 10, 20, 12, 10, 6, 5, 5, 5];
    let mut ds = ptr::null_mut();
    let st = unsafe { hetmeta_dataset_new_mean(y.as_ptr(), v.as_ptr(), n.as_ptr(), 10, &mut ds) };
    assert_eq!(st, HetmetaStatus::Ok);
    ds
}

#[test]
fn panel_matches_core() {
    let ds = jeong();
    let mut p = HetmetaPanel::default();
    assert_eq!(unsafe { hetmeta_panel(ds, &mut p) }, HetmetaStatus::Ok);
    assert_eq!(p.k, 10);
    assert_eq!(p.kind, HETMETA_KIND_MEAN);
    assert!((p.q - 106.26).abs() < 0.01);
    assert!((p.n_tilde - 8.97).abs() < 0.01);
    assert_eq!(p.adjustment, p.n_tilde);
    assert_eq!(p.adjustment_is_weight, 0);
    assert!((p.i2_anova - 0.41).abs() < 0.01);
    unsafe { hetmeta_dataset_free(ds) };
}

#[test]
fn two_arm_smd() {
    let mut ds = ptr::null_mut();
    let st = unsafe {
        hetmeta_dataset_new_two_arm(
            [-34.0, -13.6, -25.7].as_ptr(),
            [10.43, 3.23, 7.59].as_ptr(),
            [9u32, 48, 17].as_ptr(),
            [-66.0, -8.8, -10.9].as_ptr(),
            [12.78, 3.14, 2.80].as_ptr(),
            [6u32, 60, 18].as_ptr(),
            3,
            HETMETA_KIND_SMD,
            HETMETA_SMD_HEDGES,
            &mut ds,
        )
    };
    assert_eq!(st, HetmetaStatus::Ok);
    let mut p = HetmetaPanel::default();
    assert_eq!(unsafe { hetmeta_panel(ds, &mut p) }, HetmetaStatus::Ok);
    assert_eq!(p.adjustment_is_weight, 1);
    assert!((p.adjustment - 8.78).abs() < 0.01);
    assert_eq!(p.msw, 1.0);
    unsafe { hetmeta_dataset_free(ds) };
}

#[test]
fn errors_set_status_and_code() {
    let mut ds = ptr::null_mut();
    let st = unsafe {
        hetmeta_dataset_new_mean([1.0, 2.0].as_ptr(), [1.0, -1.0].as_ptr(), [3u32, 4].as_ptr(), 2, &mut ds)
    };
    assert_eq!(st, HetmetaStatus::InputError);
    assert!(ds.is_null());
    assert_eq!(last_code(), "model.invalid_variance");
    let msg = unsafe { CStr::from_ptr(hetmeta_last_error_message()) }.to_str().unwrap();
    assert!(msg.contains("row 2"), "{msg}");

    let st = unsafe { hetmeta_dataset_new_mean(ptr::null(), ptr::null(), ptr::null(), 3, &mut ds) };
    assert_eq!(st, HetmetaStatus::NullPointer);
    assert_eq!(last_code(), "ffi.null_pointer");

    let mut out = 0.0;
    assert_eq!(unsafe { hetmeta_i_squared(f64::NAN, 3, &mut out) }, HetmetaStatus::ComputeError);
    assert_eq!(unsafe { hetmeta_icc_ma(1.0, 1.0, ptr::null_mut()) }, HetmetaStatus::NullPointer);

    let path = CString::new("/nonexistent/x.csv").unwrap();
    let st = unsafe { hetmeta_dataset_from_csv(path.as_ptr(), 7, 0, &mut ds) };
    assert_eq!(st, HetmetaStatus::InvalidArgument);
    let st = unsafe { hetmeta_dataset_from_csv(path.as_ptr(), HETMETA_KIND_MEAN, 0, &mut ds) };
    assert_eq!(st, HetmetaStatus::InputError);
    assert_eq!(last_code(), "io.read");
}

#[test]
fn scalar_functions() {
    let mut out = 0.0;
    assert_eq!(unsafe { hetmeta_icc_ht(0.0025, 0.0025, &mut out) }, HetmetaStatus::Ok);
    assert_eq!(out, 0.5);
    assert_eq!(unsafe { hetmeta_i_squared(10.0, 3, &mut out) }, HetmetaStatus::Ok);
    assert!((out - 0.8).abs() < 1e-15);
    let n = [10.0, 10.0, 10.0];
    assert_eq!(unsafe { hetmeta_adjusted_mean_n(n.as_ptr(), 3, &mut out) }, HetmetaStatus::Ok);
    assert_eq!(out, 10.0);
}

#[test]
fn bundled_csv_and_report() {
    let path = CString::new("avery2022.csv").unwrap();
    let mut ds = ptr::null_mut();
    let st = unsafe { hetmeta_dataset_from_csv(path.as_ptr(), HETMETA_KIND_MD, 0, &mut ds) };
    assert_eq!(st, HetmetaStatus::Ok);
    assert_eq!(unsafe { hetmeta_dataset_k(ds) }, 3);
    let mut json = ptr::null_mut();
    let src = CString::new("test").unwrap();
    assert_eq!(unsafe { hetmeta_report_json(ds, src.as_ptr(), &mut json) }, HetmetaStatus::Ok);
    let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_string();
    let doc = hetmeta::cli_io::ReportDocument::from_json(&text).unwrap();
    assert_eq!(doc.studies.len(), 3);
    unsafe {
        hetmeta_string_free(json);
        hetmeta_dataset_free(ds);
    }
}

#[test]
fn simulation_handle() {
    let cfg = CString::new("kind = \"md\"\nk = 3\ntau2 = 0.09\nreps = 30\nn_grid = [10, 30, 50]\nseed = 2\n").unwrap();
    let mut r = ptr::null_mut();
    assert_eq!(unsafe { hetmeta_simulate(cfg.as_ptr(), 1, &mut r) }, HetmetaStatus::Ok);
    assert_eq!(unsafe { hetmeta_sim_result_len(r) }, 3);
    let mut s = HetmetaBoxSummary::default();
    assert_eq!(unsafe { hetmeta_sim_result_summary(r, 2, HETMETA_STAT_I2, &mut s) }, HetmetaStatus::Ok);
    assert_eq!((s.n_base, s.count), (50, 30));
    assert!(s.q1 <= s.median && s.median <= s.q3);
    assert_eq!(
        unsafe { hetmeta_sim_result_summary(r, 0, 9, &mut s) },
        HetmetaStatus::InvalidArgument
    );
    let mut csv = ptr::null_mut();
    assert_eq!(unsafe { hetmeta_sim_result_csv(r, &mut csv) }, HetmetaStatus::Ok);
    let text = unsafe { CStr::from_ptr(csv) }.to_str().unwrap();
    assert_eq!(text.lines().count(), 1 + 3 * 3);
    unsafe {
        hetmeta_string_free(csv);
        hetmeta_sim_result_free(r);
    }

    let bad = CString::new("kind = \"md\"\nk = 1\ntau2 = 0.09\nreps = 3\n").unwrap();
    assert_eq!(unsafe { hetmeta_simulate(bad.as_ptr(), 0, &mut r) }, HetmetaStatus::InputError);
    assert_eq!(last_code(), "simulation.invalid_config");
}

#[test]
fn null_handles_are_harmless() {
    unsafe {
        hetmeta_dataset_free(ptr::null_mut());
        hetmeta_sim_result_free(ptr::null_mut());
        hetmeta_string_free(ptr::null_mut());
        assert_eq!(hetmeta_dataset_k(ptr::null()), 0);
        assert_eq!(hetmeta_sim_result_len(ptr::null()), 0);
    }
    let v = unsafe { CStr::from_ptr(hetmeta_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

/// Compiles `tests/c/smoke.c` against the generated header and the static
/// library, then runs it.
#[test]
fn c_smoke_test() {
    let Ok(cc) = which_cc() else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(|d| d.parent()).unwrap();
    let lib = profile_dir.join("libhetmeta_ffi.a");
    assert!(lib.exists(), "static library missing at {}", lib.display());
    let out = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("hetmeta_smoke");
    let status = Command::new(&cc)
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success(), "C compilation failed");
    let run = Command::new(&out).output().unwrap();
    assert!(
        run.status.success(),
        "smoke test failed:\n{}",
        String::from_utf8_lossy(&run.stderr)
    );
    assert!(String::from_utf8_lossy(&run.stdout).contains("c smoke test ok"));
}

fn which_cc() -> Result<String, ()> {
    for cc in ["cc", "gcc", "clang"] {
        if Command::new(cc).arg("--version").output().is_ok() {
            return Ok(cc.to_string());
        }
    }
    Err(())
}
