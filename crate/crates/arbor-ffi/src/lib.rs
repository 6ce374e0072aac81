//! C ABI over the arbor decision-tree library.
//!
//! Handles are opaque pointers owned by the library; every constructor has a
//! matching `_free`. Functions return [`ArborStatus`]; on failure,
//! [`arbor_last_error`] returns a message for the calling thread, valid until
//! its next call into the library. Panics never cross the boundary.

// the exported functions take raw pointers from C by design
#![allow(clippy::not_unsafe_ptr_arg_deref)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use arbor::dataset::{parse_csv, split_dataset, Column, Dataset, LabelColumn, Task, Value};
use arbor::model::Model;
use arbor::tree::{build_tree_limited, Limits};
use arbor::tuning::{evaluate, prune, tune, MetricKind, TuningConfig};
use arbor::Criterion;

/// Result of every fallible call. Mirrors the CLI exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArborStatus {
    Ok = 0,
    /// Null pointer, bad argument, or undersized buffer.
    Usage = 1,
    /// Input data could not be ingested or partitioned.
    Data = 2,
    /// Model file missing, malformed, or incompatible.
    Model = 3,
    /// An internal panic was caught; state may be stale but memory is safe.
    Panic = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArborTask {
    Classification = 0,
    Regression = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArborCriterion {
    InfoGain = 0,
    Gini = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArborMetricKind {
    Accuracy = 0,
    Mae = 1,
    Rmse = 2,
}

/// Summary filled by [`arbor_tune`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct ArborTuneInfo {
    pub full_nodes: usize,
    pub full_depth: usize,
    pub best_depth_max: usize,
    pub best_split_min: usize,
    pub configs_evaluated: usize,
    pub tuned_nodes: usize,
    pub tuned_depth: usize,
    /// Metric used on the validation and test sets.
    pub metric: ArborMetricKind,
    pub validation_metric: f64,
    pub test_metric: f64,
}

/// Opaque parsed dataset.
pub struct ArborDataset {
    inner: Dataset,
}

/// Opaque trained model.
pub struct ArborModel {
    inner: Model,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).expect("no interior nul");
    });
}

fn fail(status: ArborStatus, message: &str) -> ArborStatus {
    set_error(message);
    status
}

fn guarded(f: impl FnOnce() -> ArborStatus) -> ArborStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(panic) => {
            let message = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "internal panic".to_string());
            fail(ArborStatus::Panic, &message)
        }
    }
}

/// `CStr` argument or a usage failure.
unsafe fn required_str<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, String> {
    if ptr.is_null() {
        return Err(format!("{what} is null"));
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| format!("{what} is not valid utf-8"))
}

impl From<ArborTask> for Task {
    fn from(t: ArborTask) -> Task {
        match t {
            ArborTask::Classification => Task::Classification,
            ArborTask::Regression => Task::Regression,
        }
    }
}

impl From<ArborCriterion> for Criterion {
    fn from(c: ArborCriterion) -> Criterion {
        match c {
            ArborCriterion::InfoGain => Criterion::InfoGain,
            ArborCriterion::Gini => Criterion::Gini,
        }
    }
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn arbor_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message of the last failure on this thread. Valid until the thread's next
/// call into the library. Never null.
#[no_mangle]
pub extern "C" fn arbor_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

fn dataset_from_reader(
    input: impl std::io::Read,
    label_column: &str,
    task: ArborTask,
    out: *mut *mut ArborDataset,
) -> ArborStatus {
    match parse_csv(input, &LabelColumn::Name(label_column.to_owned()), task.into()) {
        Ok(inner) => {
            unsafe { *out = Box::into_raw(Box::new(ArborDataset { inner })) };
            ArborStatus::Ok
        }
        Err(e) => fail(ArborStatus::Data, &e.to_string()),
    }
}

/// Parses a CSV file (header row mandatory) into a dataset handle.
#[no_mangle]
pub extern "C" fn arbor_dataset_from_csv(
    path: *const c_char,
    label_column: *const c_char,
    task: ArborTask,
    out: *mut *mut ArborDataset,
) -> ArborStatus {
    guarded(|| {
        if out.is_null() {
            return fail(ArborStatus::Usage, "out is null");
        }
        let (path, label) =
            match unsafe { (required_str(path, "path"), required_str(label_column, "label_column")) } {
                (Ok(p), Ok(l)) => (PathBuf::from(p), l),
                (Err(e), _) | (_, Err(e)) => return fail(ArborStatus::Usage, &e),
            };
        let file = match std::fs::File::open(&path) {
            Ok(f) => f,
            Err(e) => return fail(ArborStatus::Data, &format!("{}: {e}", path.display())),
        };
        dataset_from_reader(std::io::BufReader::new(file), label, task, out)
    })
}

/// Parses an in-memory CSV buffer into a dataset handle.
#[no_mangle]
pub extern "C" fn arbor_dataset_from_buffer(
    bytes: *const u8,
    len: usize,
    label_column: *const c_char,
    task: ArborTask,
    out: *mut *mut ArborDataset,
) -> ArborStatus {
    guarded(|| {
        if out.is_null() || bytes.is_null() {
            return fail(ArborStatus::Usage, "bytes or out is null");
        }
        let label = match unsafe { required_str(label_column, "label_column") } {
            Ok(l) => l,
            Err(e) => return fail(ArborStatus::Usage, &e),
        };
        let slice = unsafe { std::slice::from_raw_parts(bytes, len) };
        dataset_from_reader(slice, label, task, out)
    })
}

/// Number of examples; 0 for a null handle.
#[no_mangle]
pub extern "C" fn arbor_dataset_rows(dataset: *const ArborDataset) -> usize {
    unsafe { dataset.as_ref() }.map_or(0, |d| d.inner.n_rows())
}

/// Number of feature columns; 0 for a null handle.
#[no_mangle]
pub extern "C" fn arbor_dataset_features(dataset: *const ArborDataset) -> usize {
    unsafe { dataset.as_ref() }.map_or(0, |d| d.inner.n_features())
}

/// Releases a dataset handle. Null is fine.
#[no_mangle]
pub extern "C" fn arbor_dataset_free(dataset: *mut ArborDataset) {
    if !dataset.is_null() {
        drop(unsafe { Box::from_raw(dataset) });
    }
}

/// Trains a tree on the whole dataset. `depth_max` 0 means unlimited; nodes
/// with fewer than `split_min` examples stay leaves.
#[no_mangle]
pub extern "C" fn arbor_train(
    dataset: *const ArborDataset,
    criterion: ArborCriterion,
    depth_max: usize,
    split_min: usize,
    out: *mut *mut ArborModel,
) -> ArborStatus {
    guarded(|| {
        let Some(dataset) = (unsafe { dataset.as_ref() }) else {
            return fail(ArborStatus::Usage, "dataset is null");
        };
        if out.is_null() {
            return fail(ArborStatus::Usage, "out is null");
        }
        let limits = Limits::new(if depth_max == 0 { usize::MAX } else { depth_max }, split_min);
        let tree = build_tree_limited(&dataset.inner, criterion.into(), limits);
        let inner = Model::new(tree, &dataset.inner, criterion.into());
        unsafe { *out = Box::into_raw(Box::new(ArborModel { inner })) };
        ArborStatus::Ok
    })
}

/// Full pipeline: partition into train/validation/test by `seed`, train the
/// unrestricted tree, sweep hyper-parameters on the validation set, prune,
/// and evaluate on the test set. `info` may be null.
#[no_mangle]
pub extern "C" fn arbor_tune(
    dataset: *const ArborDataset,
    criterion: ArborCriterion,
    train_fraction: f64,
    valid_fraction: f64,
    test_fraction: f64,
    seed: u64,
    out: *mut *mut ArborModel,
    info: *mut ArborTuneInfo,
) -> ArborStatus {
    guarded(|| {
        let Some(dataset) = (unsafe { dataset.as_ref() }) else {
            return fail(ArborStatus::Usage, "dataset is null");
        };
        if out.is_null() {
            return fail(ArborStatus::Usage, "out is null");
        }
        let fractions = (train_fraction, valid_fraction, test_fraction);
        let (train, valid, test) = match split_dataset(&dataset.inner, fractions, seed) {
            Ok(parts) => parts,
            Err(e) => return fail(ArborStatus::Data, &e.to_string()),
        };
        let full = arbor::tree::build_tree(&train, criterion.into());
        let result = tune(&full, &valid);
        let pruned = prune(&full, result.best);

        let kind = match test.task() {
            Task::Classification => MetricKind::Accuracy,
            Task::Regression => MetricKind::Rmse,
        };
        let unrestricted = TuningConfig { depth_max: usize::MAX, split_min: 0 };
        let test_metric = evaluate(&pruned, &test, unrestricted, kind).expect("matching task").value;

        if let Some(info) = unsafe { info.as_mut() } {
            *info = ArborTuneInfo {
                full_nodes: full.n_nodes(),
                full_depth: full.depth(),
                best_depth_max: result.best.depth_max,
                best_split_min: result.best.split_min,
                configs_evaluated: result.n_configs_evaluated,
                tuned_nodes: pruned.n_nodes(),
                tuned_depth: pruned.depth(),
                metric: match kind {
                    MetricKind::Accuracy => ArborMetricKind::Accuracy,
                    MetricKind::Mae => ArborMetricKind::Mae,
                    MetricKind::Rmse => ArborMetricKind::Rmse,
                },
                validation_metric: result.best_metric,
                test_metric,
            };
        }
        let inner = Model::new(pruned, &train, criterion.into());
        unsafe { *out = Box::into_raw(Box::new(ArborModel { inner })) };
        ArborStatus::Ok
    })
}

/// Writes the model as a versioned JSON document.
#[no_mangle]
pub extern "C" fn arbor_model_save(model: *const ArborModel, path: *const c_char) -> ArborStatus {
    guarded(|| {
        let Some(model) = (unsafe { model.as_ref() }) else {
            return fail(ArborStatus::Usage, "model is null");
        };
        let path = match unsafe { required_str(path, "path") } {
            Ok(p) => p,
            Err(e) => return fail(ArborStatus::Usage, &e),
        };
        match model.inner.save(path) {
            Ok(()) => ArborStatus::Ok,
            Err(e) => fail(ArborStatus::Model, &e.to_string()),
        }
    })
}

/// Loads a model written by [`arbor_model_save`] or the CLI.
#[no_mangle]
pub extern "C" fn arbor_model_load(path: *const c_char, out: *mut *mut ArborModel) -> ArborStatus {
    guarded(|| {
        if out.is_null() {
            return fail(ArborStatus::Usage, "out is null");
        }
        let path = match unsafe { required_str(path, "path") } {
            Ok(p) => p,
            Err(e) => return fail(ArborStatus::Usage, &e),
        };
        match Model::load(path) {
            Ok(inner) => {
                unsafe { *out = Box::into_raw(Box::new(ArborModel { inner })) };
                ArborStatus::Ok
            }
            Err(e) => fail(ArborStatus::Model, &e.to_string()),
        }
    })
}

/// Node count of the model's tree; 0 for a null handle.
#[no_mangle]
pub extern "C" fn arbor_model_nodes(model: *const ArborModel) -> usize {
    unsafe { model.as_ref() }.map_or(0, |m| m.inner.tree.n_nodes())
}

/// Depth of the model's tree; 0 for a null handle.
#[no_mangle]
pub extern "C" fn arbor_model_depth(model: *const ArborModel) -> usize {
    unsafe { model.as_ref() }.map_or(0, |m| m.inner.tree.depth())
}

/// Number of feature columns the model expects; 0 for a null handle.
#[no_mangle]
pub extern "C" fn arbor_model_features(model: *const ArborModel) -> usize {
    unsafe { model.as_ref() }.map_or(0, |m| m.inner.feature_names.len())
}

/// Predicts one row. `cells` are raw strings in the model's feature order,
/// parsed with the CSV cell rules (number first, categorical on failure,
/// empty/`?`/`NA` missing). The label (class name or numeric value) is
/// written NUL-terminated into `out`.
#[no_mangle]
pub extern "C" fn arbor_model_predict_row(
    model: *const ArborModel,
    cells: *const *const c_char,
    n_cells: usize,
    out: *mut c_char,
    out_len: usize,
) -> ArborStatus {
    guarded(|| {
        let Some(model) = (unsafe { model.as_ref() }) else {
            return fail(ArborStatus::Usage, "model is null");
        };
        if cells.is_null() || out.is_null() {
            return fail(ArborStatus::Usage, "cells or out is null");
        }
        let n_features = model.inner.feature_names.len();
        if n_cells != n_features {
            return fail(ArborStatus::Usage, &format!("expected {n_features} cells, got {n_cells}"));
        }

        let mut columns = Vec::with_capacity(n_features);
        for (i, name) in model.inner.feature_names.iter().enumerate() {
            let cell = match unsafe { required_str(*cells.add(i), "cell") } {
                Ok(c) => c,
                Err(e) => return fail(ArborStatus::Usage, &e),
            };
            let value = match Value::parse_cell(cell) {
                Ok(v) => v,
                Err(e) => return fail(ArborStatus::Data, &format!("cell {i}: {e}")),
            };
            columns.push(Column { name: name.clone(), values: vec![value] });
        }

        let label = model.inner.tree.predict(&columns, 0, usize::MAX, 0);
        let rendered = model.inner.format_label(&label);
        let bytes = rendered.as_bytes();
        if bytes.len() + 1 > out_len {
            return fail(ArborStatus::Usage, &format!("output buffer needs {} bytes", bytes.len() + 1));
        }
        unsafe {
            std::ptr::copy_nonoverlapping(bytes.as_ptr(), out as *mut u8, bytes.len());
            *out.add(bytes.len()) = 0;
        }
        ArborStatus::Ok
    })
}

/// Releases a model handle. Null is fine.
#[no_mangle]
pub extern "C" fn arbor_model_free(model: *mut ArborModel) {
    if !model.is_null() {
        drop(unsafe { Box::from_raw(model) });
    }
}
