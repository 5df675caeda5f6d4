//! Exercises the C ABI exactly as a foreign caller would: through raw
//! pointers and status codes.

use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::ptr;

use fiberforge_ffi::*;

fn temp_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("fiberforge_ffi_{}_{name}", std::process::id()));
    std::fs::remove_dir_all(&dir).ok();
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn c_path(path: &Path) -> CString {
    CString::new(path.to_str().unwrap()).unwrap()
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(ff_last_error_message()) }
        .to_string_lossy()
        .into_owned()
}

#[test]
fn version_is_a_nul_terminated_string() {
    let version = unsafe { CStr::from_ptr(ff_version()) };
    assert_eq!(version.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn dataset_generate_write_read_round_trip() {
    let dir = temp_dir("roundtrip");
    let mut ds: *mut FfDataset = ptr::null_mut();
    assert_eq!(unsafe { ff_dataset_generate(25, 42, &mut ds) }, FfStatus::Ok);
    assert_eq!(unsafe { ff_dataset_len(ds) }, 150);

    let csv = c_path(&dir.join("data.csv"));
    assert_eq!(unsafe { ff_dataset_write_csv(ds, csv.as_ptr()) }, FfStatus::Ok);

    let mut back: *mut FfDataset = ptr::null_mut();
    assert_eq!(unsafe { ff_dataset_read_csv(csv.as_ptr(), &mut back) }, FfStatus::Ok);
    assert_eq!(unsafe { ff_dataset_len(back) }, 150);

    unsafe {
        ff_dataset_free(ds);
        ff_dataset_free(back);
    }
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn null_and_domain_errors_set_messages() {
    let mut ds: *mut FfDataset = ptr::null_mut();
    assert_eq!(
        unsafe { ff_dataset_generate(0, 1, &mut ds) },
        FfStatus::InvalidArgument
    );
    assert!(last_error().contains("per_cell"));

    assert_eq!(
        unsafe { ff_dataset_generate(1, 1, ptr::null_mut()) },
        FfStatus::NullPointer
    );
    assert_eq!(unsafe { ff_dataset_len(ptr::null()) }, 0);

    let missing = CString::new("/nonexistent/data.csv").unwrap();
    let mut out: *mut FfDataset = ptr::null_mut();
    assert_eq!(
        unsafe { ff_dataset_read_csv(missing.as_ptr(), &mut out) },
        FfStatus::IoError
    );

    let mut model: *mut FfModel = ptr::null_mut();
    let missing_model = CString::new("/nonexistent/model.json").unwrap();
    assert_eq!(
        unsafe { ff_model_load(missing_model.as_ptr(), &mut model) },
        FfStatus::IoError
    );
}

#[test]
fn train_infer_save_load_through_the_c_abi() {
    let dir = temp_dir("train");
    let mut ds: *mut FfDataset = ptr::null_mut();
    assert_eq!(unsafe { ff_dataset_generate(40, 7, &mut ds) }, FfStatus::Ok);

    let mut model_set: *mut FfDataset = ptr::null_mut();
    let mut holdout: *mut FfDataset = ptr::null_mut();
    assert_eq!(
        unsafe { ff_dataset_split(ds, 150, 7, &mut model_set, &mut holdout) },
        FfStatus::Ok
    );
    assert_eq!(unsafe { ff_dataset_len(model_set) }, 150);
    assert_eq!(unsafe { ff_dataset_len(holdout) }, 90);

    let mut model: *mut FfModel = ptr::null_mut();
    assert_eq!(
        unsafe { ff_train(model_set, FfTask::Predict, 20, 8, 0.001, 7, &mut model) },
        FfStatus::Ok
    );
    let mut task = FfTask::Design;
    assert_eq!(unsafe { ff_model_task(model, &mut task) }, FfStatus::Ok);
    assert_eq!(task, FfTask::Predict);

    let mut features = [0.0f64; 4];
    assert_eq!(
        unsafe { ff_predict_features(model, 125.0, 10.0, 0.0, features.as_mut_ptr()) },
        FfStatus::Ok
    );
    assert!(features.iter().all(|v| v.is_finite()));

    // Direction misuse surfaces as a task-mismatch status.
    let mut params = [0.0f64; 4];
    assert_eq!(
        unsafe { ff_design_params(model, 20.0, 17.0, 50.0, 1000.0, params.as_mut_ptr()) },
        FfStatus::TaskMismatch
    );
    assert!(last_error().contains("design"));

    // Save, load, and check the loaded model predicts identically.
    let path = c_path(&dir.join("model.json"));
    assert_eq!(unsafe { ff_model_save(model, path.as_ptr()) }, FfStatus::Ok);
    let mut loaded: *mut FfModel = ptr::null_mut();
    assert_eq!(unsafe { ff_model_load(path.as_ptr(), &mut loaded) }, FfStatus::Ok);
    let mut features_again = [0.0f64; 4];
    assert_eq!(
        unsafe { ff_predict_features(loaded, 125.0, 10.0, 0.0, features_again.as_mut_ptr()) },
        FfStatus::Ok
    );
    assert_eq!(features, features_again);

    unsafe {
        ff_model_free(model);
        ff_model_free(loaded);
        ff_dataset_free(model_set);
        ff_dataset_free(holdout);
        ff_dataset_free(ds);
    }
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn design_task_produces_snapped_bath() {
    let mut ds: *mut FfDataset = ptr::null_mut();
    assert_eq!(unsafe { ff_dataset_generate(40, 9, &mut ds) }, FfStatus::Ok);
    let mut model: *mut FfModel = ptr::null_mut();
    assert_eq!(
        unsafe { ff_train(ds, FfTask::Design, 20, 8, 0.001, 9, &mut model) },
        FfStatus::Ok
    );
    let mut out = [0.0f64; 4];
    assert_eq!(
        unsafe { ff_design_params(model, 21.2, 20.6, 76.3, 6010.0, out.as_mut_ptr()) },
        FfStatus::Ok
    );
    assert!(out[3] == 0.0 || out[3] == 5.0, "snapped bath {}", out[3]);
    unsafe {
        ff_model_free(model);
        ff_dataset_free(ds);
    }
}

#[test]
fn generated_header_declares_the_api() {
    let header = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/fiberforge.h");
    let text = std::fs::read_to_string(&header).expect("header generated at build time");
    for symbol in [
        "FIBERFORGE_H",
        "typedef struct FfDataset FfDataset;",
        "typedef struct FfModel FfModel;",
        "ff_version",
        "ff_last_error_message",
        "ff_dataset_generate",
        "ff_dataset_split",
        "ff_train",
        "ff_predict_features",
        "ff_design_params",
        "ff_model_free",
    ] {
        assert!(text.contains(symbol), "header is missing `{symbol}`");
    }
}

// Compile the generated header as C when a C compiler is available.
#[test]
fn generated_header_compiles_as_c() {
    let header = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/fiberforge.h");
    let status = std::process::Command::new("cc")
        .args(["-std=c99", "-fsyntax-only", "-x", "c"])
        .arg(&header)
        .status();
    match status {
        Ok(s) => assert!(s.success(), "cc rejected the generated header"),
        Err(_) => eprintln!("cc not available; skipping header syntax check"),
    }
}
