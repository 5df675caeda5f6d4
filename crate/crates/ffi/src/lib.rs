//! C ABI for the fiberforge library.
//!
//! Datasets and models are opaque handles created and destroyed here; every
//! fallible call returns an [`FfStatus`] and, on failure, records a message
//! retrievable with [`ff_last_error_message`]. Handles must be freed with
//! their matching `_free` function and never after. All functions are safe
//! to call from multiple threads as long as each handle is used from one
//! thread at a time; error messages are per-thread.

// Pointer contracts are stated on each function where they flow into the
// generated header, instead of Rust-only `# Safety` sections.
#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::ptr;

use fiberforge::error::Error;
use fiberforge::neuralnet::NetworkConfig;
use fiberforge::pipelines::{train_task, TaskKind, TaskModel};
use fiberforge::synthdata::{
    generate_dataset, read_csv, split_dataset, write_csv, Dataset, FiberFeatures,
    ManufacturingParams,
};

/// Result code of a C API call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FfStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// An argument was outside the operation's domain.
    InvalidArgument = 3,
    IoError = 4,
    /// A CSV file failed to parse.
    ParseError = 5,
    /// A model file failed validation.
    ModelFormatError = 6,
    /// The model has the wrong task direction for this call.
    TaskMismatch = 7,
    /// Training produced a non-finite loss.
    NumericError = 8,
    /// A condition cell has no records.
    EmptyCell = 9,
}

/// Task direction of a model.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FfTask {
    Predict = 0,
    Design = 1,
}

impl FfTask {
    fn to_kind(self) -> TaskKind {
        match self {
            FfTask::Predict => TaskKind::Predict,
            FfTask::Design => TaskKind::Design,
        }
    }
}

/// Opaque dataset handle.
pub struct FfDataset {
    inner: Dataset,
}

/// Opaque trained-model handle.
pub struct FfModel {
    inner: TaskModel,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: String) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).expect("NULs removed");
    });
}

fn clear_error() {
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::default();
    });
}

fn status_of(error: &Error) -> FfStatus {
    match error {
        Error::InvalidArgument(_) | Error::DimensionMismatch(_) => FfStatus::InvalidArgument,
        Error::Io { .. } => FfStatus::IoError,
        Error::Parse { .. } => FfStatus::ParseError,
        Error::ModelFormat { .. } => FfStatus::ModelFormatError,
        Error::TaskMismatch { .. } => FfStatus::TaskMismatch,
        Error::NonFiniteLoss { .. } => FfStatus::NumericError,
        Error::EmptyCell { .. } | Error::ZeroReference => FfStatus::EmptyCell,
    }
}

fn fail(error: Error) -> FfStatus {
    let status = status_of(&error);
    set_error(error.to_string());
    status
}

fn fail_with(status: FfStatus, message: &str) -> FfStatus {
    set_error(message.to_string());
    status
}

/// # Safety
/// `path` must be a valid NUL-terminated string.
unsafe fn path_arg<'a>(path: *const c_char) -> Result<&'a Path, FfStatus> {
    if path.is_null() {
        return Err(fail_with(FfStatus::NullPointer, "path is null"));
    }
    match unsafe { CStr::from_ptr(path) }.to_str() {
        Ok(s) => Ok(Path::new(s)),
        Err(_) => Err(fail_with(FfStatus::InvalidUtf8, "path is not valid UTF-8")),
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ff_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message of the most recent failure on this thread (empty string when the
/// last call succeeded). The pointer stays valid until the next failing call
/// on the same thread.
#[no_mangle]
pub extern "C" fn ff_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Generate a synthetic dataset with `per_cell` records per condition cell.
/// On success stores a new handle in `*dataset_out`.
#[no_mangle]
pub unsafe extern "C" fn ff_dataset_generate(
    per_cell: u64,
    seed: u64,
    dataset_out: *mut *mut FfDataset,
) -> FfStatus {
    if dataset_out.is_null() {
        return fail_with(FfStatus::NullPointer, "dataset_out is null");
    }
    match generate_dataset(per_cell as usize, seed) {
        Ok(inner) => {
            clear_error();
            unsafe { *dataset_out = Box::into_raw(Box::new(FfDataset { inner })) };
            FfStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Read a dataset CSV. On success stores a new handle in `*dataset_out`.
#[no_mangle]
pub unsafe extern "C" fn ff_dataset_read_csv(
    path: *const c_char,
    dataset_out: *mut *mut FfDataset,
) -> FfStatus {
    if dataset_out.is_null() {
        return fail_with(FfStatus::NullPointer, "dataset_out is null");
    }
    let path = match unsafe { path_arg(path) } {
        Ok(p) => p,
        Err(status) => return status,
    };
    match read_csv(path) {
        Ok(inner) => {
            clear_error();
            unsafe { *dataset_out = Box::into_raw(Box::new(FfDataset { inner })) };
            FfStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Write a dataset as CSV.
#[no_mangle]
pub unsafe extern "C" fn ff_dataset_write_csv(
    dataset: *const FfDataset,
    path: *const c_char,
) -> FfStatus {
    let Some(dataset) = (unsafe { dataset.as_ref() }) else {
        return fail_with(FfStatus::NullPointer, "dataset is null");
    };
    let path = match unsafe { path_arg(path) } {
        Ok(p) => p,
        Err(status) => return status,
    };
    match write_csv(&dataset.inner, path) {
        Ok(()) => {
            clear_error();
            FfStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Number of records in a dataset; 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn ff_dataset_len(dataset: *const FfDataset) -> u64 {
    unsafe { dataset.as_ref() }.map_or(0, |d| d.inner.len() as u64)
}

/// Uniform random split into `n_model` records and the remainder. On success
/// stores two new handles; the input handle stays valid and owned by the
/// caller.
#[no_mangle]
pub unsafe extern "C" fn ff_dataset_split(
    dataset: *const FfDataset,
    n_model: u64,
    seed: u64,
    model_out: *mut *mut FfDataset,
    holdout_out: *mut *mut FfDataset,
) -> FfStatus {
    let Some(dataset) = (unsafe { dataset.as_ref() }) else {
        return fail_with(FfStatus::NullPointer, "dataset is null");
    };
    if model_out.is_null() || holdout_out.is_null() {
        return fail_with(FfStatus::NullPointer, "output handle pointer is null");
    }
    match split_dataset(&dataset.inner, n_model as usize, seed) {
        Ok((model, holdout)) => {
            clear_error();
            unsafe {
                *model_out = Box::into_raw(Box::new(FfDataset { inner: model }));
                *holdout_out = Box::into_raw(Box::new(FfDataset { inner: holdout }));
            }
            FfStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Destroy a dataset handle. Null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn ff_dataset_free(dataset: *mut FfDataset) {
    if !dataset.is_null() {
        drop(unsafe { Box::from_raw(dataset) });
    }
}

/// Train one task model on every record of `dataset` with the default
/// architecture. `seed` drives weight initialization and training shuffles.
/// On success stores a new handle in `*model_out`.
#[no_mangle]
pub unsafe extern "C" fn ff_train(
    dataset: *const FfDataset,
    task: FfTask,
    batch_size: u32,
    epochs: u32,
    learning_rate: f64,
    seed: u64,
    model_out: *mut *mut FfModel,
) -> FfStatus {
    let Some(dataset) = (unsafe { dataset.as_ref() }) else {
        return fail_with(FfStatus::NullPointer, "dataset is null");
    };
    if model_out.is_null() {
        return fail_with(FfStatus::NullPointer, "model_out is null");
    }
    let kind = task.to_kind();
    let mut cfg = NetworkConfig::new(kind.input_dim(), kind.output_dim(), seed);
    cfg.batch_size = batch_size as usize;
    cfg.epochs = epochs as usize;
    cfg.learning_rate = learning_rate;
    match train_task(kind, &dataset.inner.records, &cfg) {
        Ok((model, _curve)) => {
            clear_error();
            unsafe { *model_out = Box::into_raw(Box::new(FfModel { inner: model })) };
            FfStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Load a model file. On success stores a new handle in `*model_out`.
#[no_mangle]
pub unsafe extern "C" fn ff_model_load(
    path: *const c_char,
    model_out: *mut *mut FfModel,
) -> FfStatus {
    if model_out.is_null() {
        return fail_with(FfStatus::NullPointer, "model_out is null");
    }
    let path = match unsafe { path_arg(path) } {
        Ok(p) => p,
        Err(status) => return status,
    };
    match TaskModel::load(path) {
        Ok(inner) => {
            clear_error();
            unsafe { *model_out = Box::into_raw(Box::new(FfModel { inner })) };
            FfStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Save a model to a versioned JSON file.
#[no_mangle]
pub unsafe extern "C" fn ff_model_save(model: *const FfModel, path: *const c_char) -> FfStatus {
    let Some(model) = (unsafe { model.as_ref() }) else {
        return fail_with(FfStatus::NullPointer, "model is null");
    };
    let path = match unsafe { path_arg(path) } {
        Ok(p) => p,
        Err(status) => return status,
    };
    match model.inner.save(path) {
        Ok(()) => {
            clear_error();
            FfStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Task direction of a model, stored in `*task_out`.
#[no_mangle]
pub unsafe extern "C" fn ff_model_task(model: *const FfModel, task_out: *mut FfTask) -> FfStatus {
    let Some(model) = (unsafe { model.as_ref() }) else {
        return fail_with(FfStatus::NullPointer, "model is null");
    };
    if task_out.is_null() {
        return fail_with(FfStatus::NullPointer, "task_out is null");
    }
    unsafe {
        *task_out = match model.inner.task {
            TaskKind::Predict => FfTask::Predict,
            TaskKind::Design => FfTask::Design,
        };
    }
    clear_error();
    FfStatus::Ok
}

/// Run a predictive model. `features_out` must point at 4 doubles; they are
/// filled with length (um), width (um), porosity (%), Young's modulus (MPa).
#[no_mangle]
pub unsafe extern "C" fn ff_predict_features(
    model: *const FfModel,
    sheath_ul_min: f64,
    core_ul_min: f64,
    bath_pct: f64,
    features_out: *mut f64,
) -> FfStatus {
    let Some(model) = (unsafe { model.as_ref() }) else {
        return fail_with(FfStatus::NullPointer, "model is null");
    };
    if features_out.is_null() {
        return fail_with(FfStatus::NullPointer, "features_out is null");
    }
    let params = ManufacturingParams {
        sheath_flow: sheath_ul_min,
        core_flow: core_ul_min,
        bath_conc: bath_pct,
    };
    if let Err(e) = params.validate() {
        return fail(e);
    }
    match model.inner.predict_features(&params) {
        Ok(features) => {
            clear_error();
            let values = features.as_array();
            unsafe { ptr::copy_nonoverlapping(values.as_ptr(), features_out, 4) };
            FfStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Run a design model. `params_out` must point at 4 doubles; they are filled
/// with sheath flow (uL/min), core flow (uL/min), raw bath output (%), and
/// the bath concentration snapped to 0 or 5.
#[no_mangle]
pub unsafe extern "C" fn ff_design_params(
    model: *const FfModel,
    length_um: f64,
    width_um: f64,
    porosity_pct: f64,
    youngs_mpa: f64,
    params_out: *mut f64,
) -> FfStatus {
    let Some(model) = (unsafe { model.as_ref() }) else {
        return fail_with(FfStatus::NullPointer, "model is null");
    };
    if params_out.is_null() {
        return fail_with(FfStatus::NullPointer, "params_out is null");
    }
    let features = FiberFeatures {
        length: length_um,
        width: width_um,
        porosity: porosity_pct,
        youngs_modulus: youngs_mpa,
    };
    if let Err(e) = features.validate() {
        return fail(e);
    }
    match model.inner.design_params(&features) {
        Ok(designed) => {
            clear_error();
            let values = [
                designed.sheath_flow,
                designed.core_flow,
                designed.bath_raw,
                designed.bath_conc,
            ];
            unsafe { ptr::copy_nonoverlapping(values.as_ptr(), params_out, 4) };
            FfStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Destroy a model handle. Null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn ff_model_free(model: *mut FfModel) {
    if !model.is_null() {
        drop(unsafe { Box::from_raw(model) });
    }
}
