// SPDX-License-Identifier: Apache-2.0

use std::ffi::{CStr, CString};
use std::ptr;

use offload_core::scan::wire::decode_result_batch;
use offload_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let p = offload_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string()
}

struct Store(*mut OffloadStore);

impl Drop for Store {
    fn drop(&mut self) {
        unsafe { offload_store_free(self.0) }
    }
}

fn store_with_data(nodes: usize) -> Store {
    let mut s = ptr::null_mut();
    unsafe {
        assert_eq!(offload_store_new(nodes, 1, &mut s), OffloadStatus::Ok);
        assert!(offload_last_error().is_null());
        let st = offload_store_generate(s, OffloadLayout::Striped, c("t.rgf").as_ptr(), 4_000, 3, 65_536, 250);
        assert_eq!(st, OffloadStatus::Ok);
        let st = offload_store_generate(s, OffloadLayout::Split, c("t").as_ptr(), 4_000, 3, 65_536, 250);
        assert_eq!(st, OffloadStatus::Ok);
    }
    Store(s)
}

unsafe fn open(s: &Store, layout: OffloadLayout, root: &str) -> *mut OffloadDataset {
    let mut d = ptr::null_mut();
    assert_eq!(offload_dataset_open(s.0, layout, c(root).as_ptr(), &mut d), OffloadStatus::Ok);
    d
}

unsafe fn scan(s: &Store, d: *const OffloadDataset, mode: OffloadMode, pred: &str, cols: &str) -> (*mut OffloadTable, OffloadScanMetrics) {
    let mut t = ptr::null_mut();
    let mut m = OffloadScanMetrics::default();
    let st = offload_scan(s.0, d, mode, c(pred).as_ptr(), c(cols).as_ptr(), 4, &mut t, &mut m);
    assert_eq!(st, OffloadStatus::Ok, "{}", last_error());
    (t, m)
}

unsafe fn encoded(t: *const OffloadTable) -> Vec<u8> {
    let (mut data, mut len) = (ptr::null_mut(), 0usize);
    assert_eq!(offload_table_encode(t, &mut data, &mut len), OffloadStatus::Ok);
    let v = std::slice::from_raw_parts(data, len).to_vec();
    offload_bytes_free(data, len);
    v
}

#[test]
fn modes_and_layouts_agree_through_the_c_abi() {
    let s = store_with_data(4);
    unsafe {
        let striped = open(&s, OffloadLayout::Striped, "t.rgf");
        let split = open(&s, OffloadLayout::Split, "t");
        assert_eq!(offload_dataset_row_groups(striped), 16);
        assert_eq!(offload_dataset_total_rows(split), 4_000);

        let mut batches = Vec::new();
        for d in [striped, split] {
            for mode in [OffloadMode::Local, OffloadMode::Offload] {
                let (t, m) = scan(&s, d, mode, "driver < 0.1", "vendor, driver");
                assert_eq!(offload_table_column_count(t), 2);
                assert_eq!(m.rows_returned, offload_table_row_count(t));
                assert!(m.modeled_latency_ticks > 0.0);
                if mode == OffloadMode::Offload {
                    assert_eq!(m.client_decode_filter_ticks, 0);
                    assert!(m.storage_decode_filter_ticks > 0);
                } else {
                    assert_eq!(m.storage_decode_filter_ticks, 0);
                }
                batches.push(encoded(t));
                offload_table_free(t);
            }
        }
        assert!(batches.iter().all(|b| *b == batches[0]));
        let table = decode_result_batch(&batches[0]).unwrap().table;
        assert!(table.row_count() > 0);
        assert_eq!(table.schema().field(1).name, "driver");
        offload_dataset_free(striped);
        offload_dataset_free(split);
    }
}

#[test]
fn null_predicate_and_columns_select_everything() {
    let s = store_with_data(2);
    unsafe {
        let d = open(&s, OffloadLayout::Split, "t");
        let mut t = ptr::null_mut();
        let st = offload_scan(s.0, d, OffloadMode::Offload, ptr::null(), ptr::null(), 4, &mut t, ptr::null_mut());
        assert_eq!(st, OffloadStatus::Ok);
        assert_eq!(offload_table_row_count(t), 4_000);
        assert_eq!(offload_table_column_count(t), 17);
        offload_table_free(t);
        offload_dataset_free(d);
    }
}

#[test]
fn errors_map_to_status_codes() {
    let s = store_with_data(2);
    unsafe {
        let mut out = ptr::null_mut();
        assert_eq!(offload_store_new(0, 1, &mut out), OffloadStatus::InvalidArgument);
        assert!(out.is_null());
        assert!(last_error().contains("node"));

        let mut d = ptr::null_mut();
        let st = offload_dataset_open(s.0, OffloadLayout::Striped, c("missing.rgf").as_ptr(), &mut d);
        assert_eq!(st, OffloadStatus::NotFound);
        assert!(d.is_null());

        let st = offload_store_generate(s.0, OffloadLayout::Striped, c("t.rgf").as_ptr(), 10, 1, 65_536, 5);
        assert_eq!(st, OffloadStatus::Conflict);
        let st = offload_store_generate(s.0, OffloadLayout::Striped, c("tiny.rgf").as_ptr(), 1_000, 1, 256, 500);
        assert_eq!(st, OffloadStatus::LayoutInfeasible);

        let d = open(&s, OffloadLayout::Striped, "t.rgf");
        let mut t = ptr::null_mut();
        let st = offload_scan(s.0, d, OffloadMode::Local, c("nope = 1").as_ptr(), ptr::null(), 4, &mut t, ptr::null_mut());
        assert_eq!(st, OffloadStatus::InvalidArgument);
        assert!(t.is_null());
        let st = offload_scan(s.0, d, OffloadMode::Local, c("driver <").as_ptr(), ptr::null(), 4, &mut t, ptr::null_mut());
        assert_eq!(st, OffloadStatus::InvalidArgument);
        let st = offload_scan(s.0, d, OffloadMode::Local, ptr::null(), ptr::null(), 0, &mut t, ptr::null_mut());
        assert_eq!(st, OffloadStatus::InvalidArgument);
        let st = offload_scan(ptr::null(), d, OffloadMode::Local, ptr::null(), ptr::null(), 4, &mut t, ptr::null_mut());
        assert_eq!(st, OffloadStatus::InvalidArgument);
        assert!(last_error().contains("store is NULL"));
        offload_dataset_free(d);

        offload_store_free(ptr::null_mut());
        offload_dataset_free(ptr::null_mut());
        offload_table_free(ptr::null_mut());
        offload_bytes_free(ptr::null_mut(), 0);
    }
}

#[test]
fn stores_persist_and_reload() {
    let s = store_with_data(3);
    let dir = tempfile::tempdir().unwrap();
    let path = c(dir.path().to_str().unwrap());
    unsafe {
        assert_eq!(offload_store_save(s.0, path.as_ptr()), OffloadStatus::Ok);
        let mut again = ptr::null_mut();
        assert_eq!(offload_store_load(path.as_ptr(), 5, &mut again), OffloadStatus::Ok);
        let again = Store(again);
        let a = open(&s, OffloadLayout::Striped, "t.rgf");
        let b = open(&again, OffloadLayout::Striped, "t.rgf");
        let (ta, _) = scan(&s, a, OffloadMode::Offload, "payment_type = 'Cash'", "");
        let (tb, _) = scan(&again, b, OffloadMode::Local, "payment_type = 'Cash'", "");
        assert_eq!(encoded(ta), encoded(tb));
        for t in [ta, tb] {
            offload_table_free(t);
        }
        offload_dataset_free(a);
        offload_dataset_free(b);

        let mut none = ptr::null_mut();
        let missing = c(dir.path().join("nope").to_str().unwrap());
        assert_ne!(offload_store_load(missing.as_ptr(), 0, &mut none), OffloadStatus::Ok);
    }
}

#[test]
fn header_compiles_as_c_and_cxx() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/offload.h");
    let text = std::fs::read_to_string(header).unwrap();
    for f in ["offload_scan", "offload_table_encode", "offload_bytes_free", "offload_last_error", "OFFLOAD_STATUS_PANIC"] {
        assert!(text.contains(f), "{f} missing from header");
    }
    for (compiler, lang) in [("cc", "c"), ("c++", "c++")] {
        let Ok(out) = std::process::Command::new(compiler)
            .args(["-fsyntax-only", "-Wall", "-Werror", "-x", lang, header])
            .output()
        else {
            eprintln!("{compiler} not available; skipping");
            continue;
        };
        assert!(out.status.success(), "{compiler}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn c_program_links_against_the_static_library() {
    let exe = std::env::current_exe().unwrap();
    let lib_dir = exe.parent().and_then(|deps| deps.parent()).unwrap();
    let archive = lib_dir.join("liboffload_ffi.a");
    if !archive.exists() {
        eprintln!("{} not built; skipping", archive.display());
        return;
    }
    let manifest = env!("CARGO_MANIFEST_DIR");
    let dir = tempfile::tempdir().unwrap();
    let bin = dir.path().join("smoke");
    let Ok(out) = std::process::Command::new("cc")
        .arg(format!("{manifest}/tests/smoke.c"))
        .arg(format!("-I{manifest}/include"))
        .arg(&archive)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .output()
    else {
        eprintln!("cc not available; skipping");
        return;
    };
    assert!(out.status.success(), "link failed: {}", String::from_utf8_lossy(&out.stderr));
    let run = std::process::Command::new(&bin).output().unwrap();
    assert!(run.status.success(), "smoke failed: {}", String::from_utf8_lossy(&run.stderr));
    assert!(String::from_utf8_lossy(&run.stdout).starts_with("rows "));
}
