// SPDX-License-Identifier: Apache-2.0

//! Dual-mode dataset scans.
//!
//! Both modes prune on the client from the parent footer. `ClientLocal`
//! then reads chunk ranges from each fragment's object and decodes them on
//! the client; `StorageOffload` ships a [`wire::FragmentRequest`] to the
//! `scan_op` class method on the owning node and decodes the returned
//! plain result batch.

pub mod wire;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use parking_lot::{Condvar, Mutex};

use crate::error::{Error, NodeId, Result};
use crate::format::{prune_row_groups, scan_row_group, ScanRequest, ScanWork, Table};
use crate::fs::open_random_access_object;
use crate::layout::{DatasetDescriptor, Fragment};
use crate::metrics::{MetricsRecorder, Phase, TickModel};
use crate::store::{NodeUsage, ObjectClassMethod, ObjectHandle, Pool};

use wire::{decode_request, decode_result_batch, encode_request, encode_result_batch, FragmentRequest};

pub const SCAN_OP: &str = "scan_op";
pub const DEFAULT_QUEUE_DEPTH: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScanMode {
    ClientLocal,
    StorageOffload,
}

impl ScanMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ScanMode::ClientLocal => "local",
            ScanMode::StorageOffload => "offload",
        }
    }
}

impl fmt::Display for ScanMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScanMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "local" | "client_local" => Ok(ScanMode::ClientLocal),
            "offload" | "storage_offload" => Ok(ScanMode::StorageOffload),
            _ => Err(Error::validation(format!("unknown scan mode '{s}' (expected local or offload)"))),
        }
    }
}

/// The `scan_op` object-class method: scans exactly one row group of the
/// object it runs against and returns a plain result batch.
pub struct ScanOp {
    ticks: TickModel,
}

impl ScanOp {
    pub fn new(ticks: TickModel) -> Self {
        Self { ticks }
    }
}

impl ObjectClassMethod for ScanOp {
    fn name(&self) -> &str {
        SCAN_OP
    }

    fn call(&self, object: &ObjectHandle, arg: &[u8]) -> Result<Vec<u8>> {
        let req = decode_request(arg)?;
        let bound = req.scan_request().bind(&req.schema)?;
        let mut work = ScanWork::default();
        let table = scan_row_group(object, &req.schema, &req.meta, req.ordinal as usize, &bound, &mut work)?;
        object.charge_decode_filter(self.ticks.decode_filter(work.bytes_decoded, work.rows_evaluated));
        let out = encode_result_batch(req.ordinal, &table);
        object.charge_cpu(self.ticks.encode(out.len() as u64));
        Ok(out)
    }
}

/// Registers [`ScanOp`] unless some `scan_op` is already present.
pub fn register_scan_op(pool: &Pool, ticks: TickModel) -> Result<()> {
    if pool.has_class_method(SCAN_OP) {
        return Ok(());
    }
    match pool.register_class_method(Arc::new(ScanOp::new(ticks))) {
        Err(Error::Conflict(_)) => Ok(()),
        other => other,
    }
}

#[derive(Debug, Clone)]
pub struct ScanPlan {
    pub descriptor: Arc<DatasetDescriptor>,
    /// Bound to the dataset schema.
    pub request: ScanRequest,
    /// Ascending fragment ordinals that survived pruning.
    pub selected_ordinals: Vec<usize>,
    pub mode: ScanMode,
    pub queue_depth: usize,
    /// Client worker threads; `None` means twice the node count.
    pub workers: Option<usize>,
    pub ticks: TickModel,
}

impl ScanPlan {
    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = Some(workers);
        self
    }

    pub fn with_ticks(mut self, ticks: TickModel) -> Self {
        self.ticks = ticks;
        self
    }

    pub fn with_mode(mut self, mode: ScanMode) -> Self {
        self.mode = mode;
        self
    }
}

pub fn plan_scan(
    descriptor: Arc<DatasetDescriptor>,
    request: &ScanRequest,
    mode: ScanMode,
    queue_depth: usize,
) -> Result<ScanPlan> {
    if queue_depth == 0 {
        return Err(Error::validation("queue_depth must be >= 1"));
    }
    let footer = &descriptor.footer;
    let bound = request.bind(&footer.schema)?;
    let mut selected = prune_row_groups(footer, &bound.predicate)?;
    if let Some(ids) = &bound.row_group_ids {
        if let Some(bad) = ids.iter().find(|i| **i >= descriptor.fragments.len()) {
            return Err(Error::validation(format!(
                "row group {bad} out of range ({} fragments)",
                descriptor.fragments.len()
            )));
        }
        selected.retain(|g| ids.contains(g));
    }
    Ok(ScanPlan {
        descriptor,
        request: bound,
        selected_ordinals: selected,
        mode,
        queue_depth,
        workers: None,
        ticks: TickModel::default(),
    })
}

fn scan_local(plan: &ScanPlan, pool: &Pool, frag: &Fragment, metrics: &MetricsRecorder) -> Result<Table> {
    let reader = open_random_access_object(pool, &frag.object_id)?;
    let mut work = ScanWork::default();
    let table = scan_row_group(
        &reader,
        plan.descriptor.schema(),
        &frag.row_group_meta,
        frag.ordinal,
        &plan.request,
        &mut work,
    )?;
    let bytes = reader.bytes_read();
    metrics.add_node_usage(
        pool.node_of(&frag.object_id),
        &NodeUsage {
            bytes_read_local: bytes,
            reads: reader.reads().len() as u64,
            ..NodeUsage::default()
        },
    );
    metrics.add_transferred(bytes);
    metrics.charge_client_decode_filter(plan.ticks.decode_filter(work.bytes_decoded, work.rows_evaluated));
    Ok(table)
}

fn scan_offload(plan: &ScanPlan, pool: &Pool, frag: &Fragment, metrics: &MetricsRecorder) -> Result<Table> {
    let req = encode_request(&FragmentRequest {
        ordinal: frag.ordinal as u64,
        schema: plan.descriptor.schema().clone(),
        predicate: plan.request.predicate.clone(),
        projection: plan.request.projection.clone(),
        meta: frag.row_group_meta.clone(),
    });
    metrics.charge_client(Phase::Scan, plan.ticks.encode(req.len() as u64));
    let (bytes, usage) = pool.exec_class_method(&frag.object_id, SCAN_OP, &req)?;
    metrics.add_node_usage(pool.node_of(&frag.object_id), &usage);
    metrics.add_transferred(bytes.len() as u64);
    metrics.charge_client(Phase::Scan, plan.ticks.ingest(bytes.len() as u64));
    let batch = decode_result_batch(&bytes)?;
    if batch.ordinal != frag.ordinal as u64 {
        return Err(Error::protocol(format!(
            "result batch for fragment {} answered fragment {}",
            batch.ordinal, frag.ordinal
        )));
    }
    if batch.table.schema() != &plan.request.output_schema(plan.descriptor.schema())? {
        return Err(Error::protocol("result batch schema differs from the projection"));
    }
    Ok(batch.table)
}

struct Scheduler {
    /// Positions into `selected_ordinals` not yet started, in order.
    pending: Vec<usize>,
    in_flight: Vec<usize>,
    failed: bool,
}

/// Runs the plan and materializes fragment results in ordinal order.
///
/// At most `queue_depth` fragment operations are outstanding per node at
/// any instant. The first failure stops new work; the error reported is the
/// one with the lowest ordinal among fragments that ran.
pub fn execute(plan: &ScanPlan, pool: &Pool, metrics: &MetricsRecorder) -> Result<Table> {
    plan.ticks.validate()?;
    if plan.queue_depth == 0 {
        return Err(Error::validation("queue_depth must be >= 1"));
    }
    if metrics.node_count() != pool.node_count() {
        return Err(Error::validation(format!(
            "metrics sized for {} nodes, pool has {}",
            metrics.node_count(),
            pool.node_count()
        )));
    }
    let descriptor = &plan.descriptor;
    let schema = descriptor.schema();
    let out_schema = plan.request.output_schema(schema)?;
    metrics.set_fragments_total(descriptor.fragments.len() as u64);
    metrics.charge_client(
        Phase::Prune,
        descriptor.fragments.len() as u64 * plan.request.predicate.leaf_count() as u64,
    );
    if plan.mode == ScanMode::StorageOffload {
        register_scan_op(pool, plan.ticks)?;
    }

    let selected = &plan.selected_ordinals;
    let fragments: Vec<&Fragment> = selected
        .iter()
        .map(|&o| {
            descriptor
                .fragments
                .get(o)
                .filter(|f| f.ordinal == o)
                .ok_or_else(|| Error::validation(format!("plan selects unknown fragment {o}")))
        })
        .collect::<Result<_>>()?;
    let nodes: Vec<NodeId> = fragments.iter().map(|f| pool.node_of(&f.object_id)).collect();

    let sched = Mutex::new(Scheduler {
        pending: (0..fragments.len()).collect(),
        in_flight: vec![0; pool.node_count()],
        failed: false,
    });
    let ready = Condvar::new();
    let results: Vec<Mutex<Option<Result<Table>>>> = (0..fragments.len()).map(|_| Mutex::new(None)).collect();
    let workers = plan
        .workers
        .unwrap_or(2 * pool.node_count())
        .clamp(1, fragments.len().max(1));

    let worker = || loop {
        let pos = {
            let mut s = sched.lock();
            loop {
                if s.failed || s.pending.is_empty() {
                    return;
                }
                let pick = s
                    .pending
                    .iter()
                    .position(|&p| s.in_flight[nodes[p].0] < plan.queue_depth);
                if let Some(i) = pick {
                    let p = s.pending.remove(i);
                    s.in_flight[nodes[p].0] += 1;
                    break p;
                }
                ready.wait(&mut s);
            }
        };
        let frag = fragments[pos];
        let out = match plan.mode {
            ScanMode::ClientLocal => scan_local(plan, pool, frag, metrics),
            ScanMode::StorageOffload => scan_offload(plan, pool, frag, metrics),
        };
        let failed = out.is_err();
        if !failed {
            metrics.add_fragment_scanned();
        }
        *results[pos].lock() = Some(out);
        let mut s = sched.lock();
        s.in_flight[nodes[pos].0] -= 1;
        s.failed |= failed;
        drop(s);
        ready.notify_all();
    };
    if workers == 1 || fragments.len() <= 1 {
        worker();
    } else {
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(worker);
            }
        });
    }

    let mut parts = Vec::with_capacity(fragments.len());
    for (pos, slot) in results.into_iter().enumerate() {
        match slot.into_inner() {
            Some(Ok(t)) => parts.push(t),
            Some(Err(e)) => {
                let source = match e {
                    Error::Handler { source, .. } => source,
                    other => Box::new(other),
                };
                return Err(Error::Fragment {
                    ordinal: fragments[pos].ordinal,
                    node: nodes[pos],
                    source,
                });
            }
            // Never started because an earlier fragment failed; that
            // failure sits at a lower position or is found below.
            None => continue,
        }
    }
    if parts.len() != fragments.len() {
        return Err(Error::validation("scan aborted without a recorded failure"));
    }
    let table = Table::concat(&out_schema, &parts)?;
    metrics.charge_client(Phase::Materialize, plan.ticks.concat_per_row * table.row_count() as u64);
    metrics.add_rows_returned(table.row_count() as u64);
    Ok(table)
}

/// Plans and executes in one call.
pub fn scan(
    descriptor: Arc<DatasetDescriptor>,
    request: &ScanRequest,
    mode: ScanMode,
    pool: &Pool,
    metrics: &MetricsRecorder,
) -> Result<Table> {
    let plan = plan_scan(descriptor, request, mode, DEFAULT_QUEUE_DEPTH)?;
    execute(&plan, pool, metrics)
}
