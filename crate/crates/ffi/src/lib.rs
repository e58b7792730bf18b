//! C interface to the enan classifiers.
//!
//! Datasets and models are opaque handles created by `enan_*` constructors
//! and released with the matching `_free` function. Every fallible call
//! returns an [`EnanStatus`]; on failure [`enan_last_error_message`] describes
//! the most recent error on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use enan::classification::{train_enan, train_enn_fixed, SavedModel, TrainedModel};
use enan::data_io::{load_csv, Dataset, LabelColumn, MinMaxScaler};
use enan::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnanStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Parse = 4,
    DimensionMismatch = 5,
    TooFewPoints = 6,
    ModelFormat = 7,
    /// The model kind does not support the request.
    Unsupported = 8,
    Panic = 9,
}

/// Labeled training data.
pub struct EnanDataset {
    inner: Dataset,
}

/// A trained classifier together with the scaling applied to its inputs.
pub struct EnanModel {
    inner: SavedModel,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> EnanStatus {
    match e {
        Error::Io { .. } => EnanStatus::Io,
        Error::EmptyFile { .. }
        | Error::RaggedRow { .. }
        | Error::NonNumeric { .. }
        | Error::MissingValue { .. }
        | Error::NonFinite { .. }
        | Error::LabelColumn(_)
        | Error::Csv(_) => EnanStatus::Parse,
        Error::DimensionMismatch { .. } => EnanStatus::DimensionMismatch,
        Error::TooFewPoints { .. } | Error::EmptyInput => EnanStatus::TooFewPoints,
        Error::ModelFormat { .. } => EnanStatus::ModelFormat,
        _ => EnanStatus::InvalidArgument,
    }
}

struct Failure(EnanStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(EnanStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, records any error or panic, and returns its status.
fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> EnanStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            EnanStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal error: {message}"));
            EnanStatus::Panic
        }
    }
}

unsafe fn path_arg<'a>(path: *const c_char) -> Result<&'a str, Failure> {
    if path.is_null() {
        return Err(null("path"));
    }
    CStr::from_ptr(path)
        .to_str()
        .map_err(|_| Failure(EnanStatus::InvalidArgument, "path is not valid UTF-8".into()))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn store<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Message for the last failed call on this thread, or null after a
/// successful call. Valid until the next `enan_*` call on the same thread.
#[no_mangle]
pub extern "C" fn enan_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Loads a CSV file whose last column is the class label.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn enan_dataset_load_csv(
    path: *const c_char,
    has_header: bool,
    out: *mut *mut EnanDataset,
) -> EnanStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let path = path_arg(path)?;
        let inner = load_csv(path, &LabelColumn::Last, has_header)?;
        store(out, EnanDataset { inner })
    })
}

/// Builds a dataset from `n_points` row-major points of dimension `dim` and
/// their labels in `0..n_classes`. Classes are named by their index.
///
/// # Safety
/// `values` must hold `n_points * dim` doubles, `labels` `n_points` entries,
/// and `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn enan_dataset_from_arrays(
    values: *const f64,
    labels: *const u32,
    n_points: usize,
    dim: usize,
    n_classes: usize,
    out: *mut *mut EnanDataset,
) -> EnanStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if n_points == 0 || dim == 0 {
            return Err(Error::EmptyInput.into());
        }
        if values.is_null() {
            return Err(null("values"));
        }
        if labels.is_null() {
            return Err(null("labels"));
        }
        let values = std::slice::from_raw_parts(values, n_points * dim).to_vec();
        let labels: Vec<usize> = std::slice::from_raw_parts(labels, n_points)
            .iter()
            .map(|&l| l as usize)
            .collect();
        if let Some(bad) = labels.iter().find(|&&l| l >= n_classes) {
            return Err(Failure(
                EnanStatus::InvalidArgument,
                format!("label {bad} out of range for {n_classes} classes"),
            ));
        }
        let names = (0..n_classes).map(|c| c.to_string()).collect();
        let inner = Dataset::new("arrays", dim, values, labels, names)?;
        store(out, EnanDataset { inner })
    })
}

/// Number of points, or 0 for a null handle.
///
/// # Safety
/// `dataset` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn enan_dataset_len(dataset: *const EnanDataset) -> usize {
    dataset.as_ref().map_or(0, |d| d.inner.len())
}

/// Feature dimension, or 0 for a null handle.
///
/// # Safety
/// `dataset` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn enan_dataset_dim(dataset: *const EnanDataset) -> usize {
    dataset.as_ref().map_or(0, |d| d.inner.dim())
}

/// # Safety
/// `dataset` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn enan_dataset_free(dataset: *mut EnanDataset) {
    if !dataset.is_null() {
        drop(Box::from_raw(dataset));
    }
}

fn prepare(ds: &Dataset, normalize: bool) -> (Dataset, Option<MinMaxScaler>) {
    if normalize {
        let scaler = MinMaxScaler::fit(ds);
        (scaler.transform(ds), Some(scaler))
    } else {
        (ds.clone(), None)
    }
}

/// Trains ENaN, which picks each query's neighborhood size itself. With
/// `normalize`, features are min-max scaled and queries are scaled the same
/// way at prediction time.
///
/// # Safety
/// `dataset` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn enan_train_enan(
    dataset: *const EnanDataset,
    normalize: bool,
    out: *mut *mut EnanModel,
) -> EnanStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let (ds, scaler) = prepare(&handle(dataset, "dataset")?.inner, normalize);
        let model = TrainedModel::Enan(train_enan(ds)?);
        store(
            out,
            EnanModel {
                inner: SavedModel::new(model, scaler),
            },
        )
    })
}

/// Trains ENN with a fixed neighborhood size `k`.
///
/// # Safety
/// `dataset` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn enan_train_enn(
    dataset: *const EnanDataset,
    k: usize,
    normalize: bool,
    out: *mut *mut EnanModel,
) -> EnanStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let (ds, scaler) = prepare(&handle(dataset, "dataset")?.inner, normalize);
        let model = TrainedModel::Enn(train_enn_fixed(ds, k)?);
        store(
            out,
            EnanModel {
                inner: SavedModel::new(model, scaler),
            },
        )
    })
}

/// Neighborhood size chosen by training. Only ENaN models have one.
///
/// # Safety
/// `model` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn enan_model_lambda(model: *const EnanModel, out: *mut usize) -> EnanStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        match &handle(model, "model")?.inner.model {
            TrainedModel::Enan(m) => {
                *out = m.lambda();
                Ok(())
            }
            TrainedModel::Enn(_) => Err(Failure(
                EnanStatus::Unsupported,
                "fixed-k ENN models have no natural-neighbor size".into(),
            )),
        }
    })
}

/// Feature dimension, or 0 for a null handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn enan_model_dim(model: *const EnanModel) -> usize {
    model.as_ref().map_or(0, |m| m.inner.dim())
}

/// Number of classes, or 0 for a null handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn enan_model_n_classes(model: *const EnanModel) -> usize {
    model.as_ref().map_or(0, |m| m.inner.class_names().len())
}

/// Copies the NUL-terminated name of `class` into `buf`. Fails with
/// `INVALID_ARGUMENT` if `buf_len` is too small; `needed` (optional)
/// receives the required size including the terminator.
///
/// # Safety
/// `model` must be a live handle, `buf` must hold `buf_len` bytes, and
/// `needed` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn enan_model_class_name(
    model: *const EnanModel,
    class: usize,
    buf: *mut c_char,
    buf_len: usize,
    needed: *mut usize,
) -> EnanStatus {
    guard(|| {
        let names = handle(model, "model")?.inner.class_names();
        let name = names.get(class).ok_or_else(|| {
            Failure(
                EnanStatus::InvalidArgument,
                format!("class {class} out of range for {} classes", names.len()),
            )
        })?;
        let bytes = name.as_bytes();
        if !needed.is_null() {
            *needed = bytes.len() + 1;
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        if buf_len < bytes.len() + 1 {
            return Err(Failure(
                EnanStatus::InvalidArgument,
                format!("buffer of {buf_len} bytes cannot hold {} bytes", bytes.len() + 1),
            ));
        }
        ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, bytes.len());
        *buf.add(bytes.len()) = 0;
        Ok(())
    })
}

/// Predicts class indices for `n_queries` row-major raw queries into
/// `labels_out`.
///
/// # Safety
/// `queries` must hold `n_queries * enan_model_dim(model)` doubles and
/// `labels_out` room for `n_queries` entries.
#[no_mangle]
pub unsafe extern "C" fn enan_model_predict(
    model: *const EnanModel,
    queries: *const f64,
    n_queries: usize,
    labels_out: *mut u32,
) -> EnanStatus {
    guard(|| {
        let model = &handle(model, "model")?.inner;
        if n_queries == 0 {
            return Ok(());
        }
        if queries.is_null() {
            return Err(null("queries"));
        }
        if labels_out.is_null() {
            return Err(null("labels_out"));
        }
        let queries = std::slice::from_raw_parts(queries, n_queries * model.dim());
        let labels = model.predict(queries)?;
        let out = std::slice::from_raw_parts_mut(labels_out, n_queries);
        for (o, l) in out.iter_mut().zip(labels) {
            *o = l as u32;
        }
        Ok(())
    })
}

/// Writes the model to a text file.
///
/// # Safety
/// `model` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn enan_model_save(model: *const EnanModel, path: *const c_char) -> EnanStatus {
    guard(|| {
        let model = handle(model, "model")?;
        Ok(model.inner.save(path_arg(path)?)?)
    })
}

/// Reads a model written by `enan_model_save` or the `enan train` command.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn enan_model_load(path: *const c_char, out: *mut *mut EnanModel) -> EnanStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let inner = SavedModel::load(path_arg(path)?)?;
        store(out, EnanModel { inner })
    })
}

/// # Safety
/// `model` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn enan_model_free(model: *mut EnanModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}
