// SPDX-License-Identifier: Apache-2.0

//! C ABI over `offload-core`.
//!
//! Handles are opaque and owned by the caller once returned; each has a
//! matching `_free`. Every fallible call returns an [`OffloadStatus`] and
//! leaves a message for [`offload_last_error`] on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;
use std::sync::Arc;

use offload_core::bench::{self, GeneratorSpec};
use offload_core::format::{ScanRequest, Table};
use offload_core::fs::Namespace;
use offload_core::layout::{self, DatasetDescriptor, LayoutKind};
use offload_core::metrics::{estimate_latency, Bottleneck, CostModelConfig, MetricsRecorder};
use offload_core::scan::wire::encode_result_batch;
use offload_core::scan::{execute, plan_scan, ScanMode};
use offload_core::store::Pool;
use offload_core::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OffloadStatus {
    Ok = 0,
    InvalidArgument = 1,
    NotFound = 2,
    Conflict = 3,
    Corrupt = 4,
    LayoutInfeasible = 5,
    Protocol = 6,
    FragmentFailed = 7,
    Io = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OffloadLayout {
    Striped = 0,
    Split = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OffloadMode {
    Local = 0,
    Offload = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum OffloadBottleneck {
    #[default]
    ClientCpu = 0,
    StorageCpu = 1,
    Network = 2,
}

/// Totals for one scan plus the modeled latency under the default cost model.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct OffloadScanMetrics {
    pub rows_returned: u64,
    pub fragments_total: u64,
    pub fragments_scanned: u64,
    pub bytes_transferred: u64,
    pub bytes_read_storage: u64,
    pub client_cpu_ticks: u64,
    pub client_decode_filter_ticks: u64,
    pub storage_cpu_ticks_total: u64,
    pub storage_decode_filter_ticks: u64,
    pub modeled_latency_ticks: f64,
    pub bottleneck: OffloadBottleneck,
}

/// A namespace and the object pool it lives in.
pub struct OffloadStore {
    ns: Namespace,
    pool: Pool,
}

/// A discovered dataset; valid only with the store it was opened from.
pub struct OffloadDataset {
    descriptor: Arc<DatasetDescriptor>,
}

pub struct OffloadTable {
    table: Table,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    // Interior NULs would truncate the message on the C side anyway.
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(e: &Error) -> OffloadStatus {
    match e {
        Error::Validation(_) | Error::Config(_) => OffloadStatus::InvalidArgument,
        Error::NotFound(_) | Error::UnknownMethod(_) | Error::BrokenDataset { .. } => OffloadStatus::NotFound,
        Error::Conflict(_) => OffloadStatus::Conflict,
        Error::CorruptFile(_)
        | Error::CorruptMetadata(_)
        | Error::UnsupportedVersion { .. }
        | Error::CorruptLayout(_) => OffloadStatus::Corrupt,
        Error::LayoutInfeasible { .. } => OffloadStatus::LayoutInfeasible,
        Error::Protocol(_) => OffloadStatus::Protocol,
        Error::Fragment { .. } | Error::Handler { .. } | Error::Cell { .. } => OffloadStatus::FragmentFailed,
        Error::Io(_) | Error::Csv(_) => OffloadStatus::Io,
    }
}

struct Fail(OffloadStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn invalid(msg: &str) -> Fail {
    Fail(OffloadStatus::InvalidArgument, msg.to_string())
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> OffloadStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => OffloadStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic".into());
            OffloadStatus::Panic
        }
    }
}

/// # Safety
/// `s` is NULL or a valid NUL-terminated string.
unsafe fn opt_str<'a>(s: *const c_char, what: &str) -> Result<Option<&'a str>, Fail> {
    if s.is_null() {
        return Ok(None);
    }
    CStr::from_ptr(s)
        .to_str()
        .map(Some)
        .map_err(|_| invalid(&format!("{what} is not valid UTF-8")))
}

unsafe fn req_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, Fail> {
    opt_str(s, what)?.ok_or_else(|| invalid(&format!("{what} is NULL")))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| invalid(&format!("{what} is NULL")))
}

unsafe fn give<T>(out: *mut *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(invalid("output pointer is NULL"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

fn layout_kind(l: OffloadLayout) -> LayoutKind {
    match l {
        OffloadLayout::Striped => LayoutKind::Striped,
        OffloadLayout::Split => LayoutKind::Split,
    }
}

/// Message for the last failed call on this thread, or NULL after a
/// success. Valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn offload_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Creates an empty in-memory store with `nodes` storage nodes.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn offload_store_new(nodes: usize, seed: u64, out: *mut *mut OffloadStore) -> OffloadStatus {
    guard(|| {
        let pool = Pool::create(nodes, seed)?;
        give(out, OffloadStore { ns: Namespace::new(), pool })
    })
}

/// Loads a store directory written by [`offload_store_save`] or the CLI.
/// `nodes` of 0 keeps the saved node count.
///
/// # Safety
/// `dir` is a NUL-terminated path; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn offload_store_load(
    dir: *const c_char,
    nodes: usize,
    out: *mut *mut OffloadStore,
) -> OffloadStatus {
    guard(|| {
        let dir = req_str(dir, "dir")?;
        let (ns, pool) = bench::load_store(Path::new(dir), (nodes > 0).then_some(nodes))?;
        give(out, OffloadStore { ns, pool })
    })
}

/// # Safety
/// `store` is a live handle; `dir` is a NUL-terminated path.
#[no_mangle]
pub unsafe extern "C" fn offload_store_save(store: *const OffloadStore, dir: *const c_char) -> OffloadStatus {
    guard(|| {
        let s = deref(store, "store")?;
        bench::save_store(Path::new(req_str(dir, "dir")?), &s.ns, &s.pool)?;
        Ok(())
    })
}

/// # Safety
/// `store` is NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn offload_store_free(store: *mut OffloadStore) {
    if !store.is_null() {
        drop(Box::from_raw(store));
    }
}

/// Generates the synthetic trip table and writes it under `layout` at
/// `path` (a file path when striped, a prefix when split).
///
/// # Safety
/// `store` is a live handle; `path` is NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn offload_store_generate(
    store: *const OffloadStore,
    layout: OffloadLayout,
    path: *const c_char,
    rows: u64,
    seed: u64,
    stripe_unit: u64,
    rows_per_group: u64,
) -> OffloadStatus {
    guard(|| {
        let s = deref(store, "store")?;
        let path = req_str(path, "path")?;
        let row_count = usize::try_from(rows).map_err(|_| invalid("rows too large"))?;
        let rpg = usize::try_from(rows_per_group).map_err(|_| invalid("rows_per_group too large"))?;
        let table = bench::generate(&GeneratorSpec { row_count, seed });
        match layout_kind(layout) {
            LayoutKind::Striped => {
                layout::write_striped_dataset(&s.ns, &s.pool, path, &table, stripe_unit, rpg)?;
            }
            LayoutKind::Split => {
                layout::write_split_dataset(&s.ns, &s.pool, path, &table, rpg, stripe_unit)?;
            }
        }
        Ok(())
    })
}

/// Discovers a dataset from its footer or index.
///
/// # Safety
/// `store` is a live handle; `root` is NUL-terminated; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn offload_dataset_open(
    store: *const OffloadStore,
    layout: OffloadLayout,
    root: *const c_char,
    out: *mut *mut OffloadDataset,
) -> OffloadStatus {
    guard(|| {
        let s = deref(store, "store")?;
        let d = layout::discover(&s.ns, &s.pool, layout_kind(layout), req_str(root, "root")?)?;
        give(out, OffloadDataset { descriptor: Arc::new(d) })
    })
}

/// # Safety
/// `dataset` is a live handle.
#[no_mangle]
pub unsafe extern "C" fn offload_dataset_row_groups(dataset: *const OffloadDataset) -> usize {
    dataset.as_ref().map_or(0, |d| d.descriptor.fragments.len())
}

/// # Safety
/// `dataset` is a live handle.
#[no_mangle]
pub unsafe extern "C" fn offload_dataset_total_rows(dataset: *const OffloadDataset) -> u64 {
    dataset.as_ref().map_or(0, |d| d.descriptor.total_rows())
}

/// # Safety
/// `dataset` is NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn offload_dataset_free(dataset: *mut OffloadDataset) {
    if !dataset.is_null() {
        drop(Box::from_raw(dataset));
    }
}

/// Scans `dataset` once.
///
/// `predicate` uses the CLI grammar (NULL or "" selects all rows).
/// `columns` is a comma-separated projection (NULL or "" keeps all).
/// `metrics` may be NULL.
///
/// # Safety
/// Handles are live and `dataset` came from `store`; strings are
/// NUL-terminated; `out` is valid for writes; `metrics` is NULL or valid
/// for writes.
#[no_mangle]
pub unsafe extern "C" fn offload_scan(
    store: *const OffloadStore,
    dataset: *const OffloadDataset,
    mode: OffloadMode,
    predicate: *const c_char,
    columns: *const c_char,
    queue_depth: usize,
    out: *mut *mut OffloadTable,
    metrics: *mut OffloadScanMetrics,
) -> OffloadStatus {
    guard(|| {
        let s = deref(store, "store")?;
        let d = deref(dataset, "dataset")?;
        if out.is_null() {
            return Err(invalid("output pointer is NULL"));
        }
        let mut request = ScanRequest::with_predicate(bench::parse_predicate(opt_str(predicate, "predicate")?.unwrap_or(""))?);
        request.projection = opt_str(columns, "columns")?
            .unwrap_or("")
            .split(',')
            .map(str::trim)
            .filter(|c| !c.is_empty())
            .map(String::from)
            .collect();
        let mode = match mode {
            OffloadMode::Local => ScanMode::ClientLocal,
            OffloadMode::Offload => ScanMode::StorageOffload,
        };
        let recorder = MetricsRecorder::new(s.pool.node_count());
        let plan = plan_scan(d.descriptor.clone(), &request, mode, queue_depth)?;
        let table = execute(&plan, &s.pool, &recorder)?;
        if let Some(slot) = metrics.as_mut() {
            let m = recorder.snapshot();
            let est = estimate_latency(&m, &CostModelConfig::default(), mode, s.pool.node_count())?;
            *slot = OffloadScanMetrics {
                rows_returned: m.rows_returned,
                fragments_total: m.fragments_total,
                fragments_scanned: m.fragments_scanned,
                bytes_transferred: m.bytes_transferred_total,
                bytes_read_storage: m.bytes_read_storage_total,
                client_cpu_ticks: m.client_cpu_ticks,
                client_decode_filter_ticks: m.client_decode_filter_ticks,
                storage_cpu_ticks_total: m.storage_cpu_ticks_total(),
                storage_decode_filter_ticks: m.storage_decode_filter_ticks(),
                modeled_latency_ticks: est.modeled_latency_ticks,
                bottleneck: match est.bottleneck {
                    Bottleneck::ClientCpu => OffloadBottleneck::ClientCpu,
                    Bottleneck::StorageCpu => OffloadBottleneck::StorageCpu,
                    Bottleneck::Network => OffloadBottleneck::Network,
                },
            };
        }
        give(out, OffloadTable { table })
    })
}

/// # Safety
/// `table` is a live handle.
#[no_mangle]
pub unsafe extern "C" fn offload_table_row_count(table: *const OffloadTable) -> u64 {
    table.as_ref().map_or(0, |t| t.table.row_count() as u64)
}

/// # Safety
/// `table` is a live handle.
#[no_mangle]
pub unsafe extern "C" fn offload_table_column_count(table: *const OffloadTable) -> usize {
    table.as_ref().map_or(0, |t| t.table.schema().len())
}

/// Serializes the table as one result batch (ordinal 0). Release the
/// buffer with [`offload_bytes_free`].
///
/// # Safety
/// `table` is a live handle; `data` and `len` are valid for writes.
#[no_mangle]
pub unsafe extern "C" fn offload_table_encode(
    table: *const OffloadTable,
    data: *mut *mut u8,
    len: *mut usize,
) -> OffloadStatus {
    guard(|| {
        let t = deref(table, "table")?;
        if data.is_null() || len.is_null() {
            return Err(invalid("output pointer is NULL"));
        }
        let bytes = encode_result_batch(0, &t.table).into_boxed_slice();
        *len = bytes.len();
        *data = Box::into_raw(bytes) as *mut u8;
        Ok(())
    })
}

/// # Safety
/// `data`/`len` come from [`offload_table_encode`] and are freed once.
#[no_mangle]
pub unsafe extern "C" fn offload_bytes_free(data: *mut u8, len: usize) {
    if !data.is_null() {
        drop(Box::from_raw(ptr::slice_from_raw_parts_mut(data, len)));
    }
}

/// # Safety
/// `table` is NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn offload_table_free(table: *mut OffloadTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}
