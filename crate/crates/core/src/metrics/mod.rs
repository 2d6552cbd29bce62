// SPDX-License-Identifier: Apache-2.0

//! Resource accounting and the max-of-stages latency model.
//!
//! Ticks are abstract work units, not time. A scan's modeled latency is
//!
//! ```text
//! max(client_ticks / client_parallelism,
//!     max_node_ticks / storage_parallelism_per_node,
//!     bytes_transferred / network_bandwidth)
//! ```

use std::fmt;
use std::io::Write;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, NodeId, Result};
use crate::scan::ScanMode;
use crate::store::NodeUsage;

/// CPU tick coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TickModel {
    /// Per column-chunk byte decoded.
    pub decode_per_byte: u64,
    /// Per row run through a non-trivial predicate.
    pub eval_per_row: u64,
    /// Per byte of request or result batch encoded.
    pub encode_per_byte: u64,
    /// Result-batch bytes the client ingests per tick. Plain batches are
    /// copied into columns, not decoded from dictionaries.
    pub ingest_bytes_per_tick: u64,
    /// Per row appended to the final table.
    pub concat_per_row: u64,
}

impl Default for TickModel {
    fn default() -> Self {
        Self {
            decode_per_byte: 1,
            eval_per_row: 4,
            encode_per_byte: 1,
            ingest_bytes_per_tick: 4,
            concat_per_row: 1,
        }
    }
}

impl TickModel {
    pub fn validate(&self) -> Result<()> {
        if self.decode_per_byte == 0
            || self.eval_per_row == 0
            || self.encode_per_byte == 0
            || self.ingest_bytes_per_tick == 0
            || self.concat_per_row == 0
        {
            return Err(Error::Config("tick coefficients must be positive".into()));
        }
        Ok(())
    }

    pub fn decode_filter(&self, bytes_decoded: u64, rows_evaluated: u64) -> u64 {
        self.decode_per_byte * bytes_decoded + self.eval_per_row * rows_evaluated
    }

    pub fn encode(&self, bytes: u64) -> u64 {
        self.encode_per_byte * bytes
    }

    pub fn ingest(&self, bytes: u64) -> u64 {
        bytes.div_ceil(self.ingest_bytes_per_tick)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostModelConfig {
    pub network_bandwidth_bytes_per_tick: f64,
    pub client_parallelism: f64,
    pub storage_parallelism_per_node: f64,
    pub ticks: TickModel,
}

impl Default for CostModelConfig {
    fn default() -> Self {
        Self {
            network_bandwidth_bytes_per_tick: 16.0,
            client_parallelism: 8.0,
            storage_parallelism_per_node: 8.0,
            ticks: TickModel::default(),
        }
    }
}

impl CostModelConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64, name: &str| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be positive, got {v}")))
            }
        };
        positive(self.network_bandwidth_bytes_per_tick, "network_bandwidth_bytes_per_tick")?;
        positive(self.client_parallelism, "client_parallelism")?;
        positive(self.storage_parallelism_per_node, "storage_parallelism_per_node")?;
        self.ticks.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Phase {
    Discover,
    Prune,
    Scan,
    Materialize,
}

impl Phase {
    pub const ALL: [Phase; 4] = [Phase::Discover, Phase::Prune, Phase::Scan, Phase::Materialize];

    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Discover => "discover",
            Phase::Prune => "prune",
            Phase::Scan => "scan",
            Phase::Materialize => "materialize",
        }
    }
}

/// Client ticks per phase.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PhaseTicks {
    pub discover: u64,
    pub prune: u64,
    pub scan: u64,
    pub materialize: u64,
}

impl PhaseTicks {
    pub fn get(&self, phase: Phase) -> u64 {
        match phase {
            Phase::Discover => self.discover,
            Phase::Prune => self.prune,
            Phase::Scan => self.scan,
            Phase::Materialize => self.materialize,
        }
    }

    pub fn total(&self) -> u64 {
        self.discover + self.prune + self.scan + self.materialize
    }
}

/// Frozen accounting for one scan.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Metrics {
    /// Indexed by node id.
    pub node_usage: Vec<NodeUsage>,
    /// Equals `wall_breakdown.total()`.
    pub client_cpu_ticks: u64,
    /// Part of `client_cpu_ticks` spent decoding chunks and evaluating predicates.
    pub client_decode_filter_ticks: u64,
    /// Result batches (offload) or raw object bytes (local) sent to the client.
    pub bytes_transferred_total: u64,
    /// Bytes read from objects on storage nodes.
    pub bytes_read_storage_total: u64,
    pub wall_breakdown: PhaseTicks,
    pub fragments_total: u64,
    pub fragments_scanned: u64,
    pub rows_returned: u64,
}

impl Metrics {
    pub fn storage_cpu_ticks_total(&self) -> u64 {
        self.node_usage.iter().map(|u| u.cpu_ticks).sum()
    }

    pub fn storage_cpu_ticks_max(&self) -> u64 {
        self.node_usage.iter().map(|u| u.cpu_ticks).max().unwrap_or(0)
    }

    pub fn storage_decode_filter_ticks(&self) -> u64 {
        self.node_usage.iter().map(|u| u.decode_filter_ticks).sum()
    }

    /// Fraction of decode/filter ticks spent on storage nodes; 0 when none were spent.
    pub fn storage_decode_filter_share(&self) -> f64 {
        let storage = self.storage_decode_filter_ticks();
        let total = storage + self.client_decode_filter_ticks;
        if total == 0 {
            0.0
        } else {
            storage as f64 / total as f64
        }
    }

    pub fn object_reads(&self) -> u64 {
        self.node_usage.iter().map(|u| u.reads).sum()
    }

    pub fn class_method_calls(&self) -> u64 {
        self.node_usage.iter().map(|u| u.execs).sum()
    }
}

#[derive(Default)]
struct AtomicUsage {
    cpu_ticks: AtomicU64,
    decode_filter_ticks: AtomicU64,
    bytes_read_local: AtomicU64,
    bytes_returned: AtomicU64,
    reads: AtomicU64,
    execs: AtomicU64,
}

/// Thread-safe accumulator filled in while a scan runs.
pub struct MetricsRecorder {
    nodes: Vec<AtomicUsage>,
    client_decode_filter: AtomicU64,
    transferred: AtomicU64,
    phases: [AtomicU64; 4],
    fragments_total: AtomicU64,
    fragments_scanned: AtomicU64,
    rows_returned: AtomicU64,
}

impl MetricsRecorder {
    pub fn new(node_count: usize) -> Self {
        Self {
            nodes: (0..node_count).map(|_| AtomicUsage::default()).collect(),
            client_decode_filter: AtomicU64::new(0),
            transferred: AtomicU64::new(0),
            phases: Default::default(),
            fragments_total: AtomicU64::new(0),
            fragments_scanned: AtomicU64::new(0),
            rows_returned: AtomicU64::new(0),
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn charge_client(&self, phase: Phase, ticks: u64) {
        self.phases[phase as usize].fetch_add(ticks, Ordering::Relaxed);
    }

    /// Client decode/filter work; counted in the scan phase.
    pub fn charge_client_decode_filter(&self, ticks: u64) {
        self.client_decode_filter.fetch_add(ticks, Ordering::Relaxed);
        self.charge_client(Phase::Scan, ticks);
    }

    pub fn add_node_usage(&self, node: NodeId, u: &NodeUsage) {
        let n = &self.nodes[node.0];
        n.cpu_ticks.fetch_add(u.cpu_ticks, Ordering::Relaxed);
        n.decode_filter_ticks.fetch_add(u.decode_filter_ticks, Ordering::Relaxed);
        n.bytes_read_local.fetch_add(u.bytes_read_local, Ordering::Relaxed);
        n.bytes_returned.fetch_add(u.bytes_returned, Ordering::Relaxed);
        n.reads.fetch_add(u.reads, Ordering::Relaxed);
        n.execs.fetch_add(u.execs, Ordering::Relaxed);
    }

    pub fn add_transferred(&self, bytes: u64) {
        self.transferred.fetch_add(bytes, Ordering::Relaxed);
    }

    pub fn set_fragments_total(&self, n: u64) {
        self.fragments_total.store(n, Ordering::Relaxed);
    }

    pub fn add_fragment_scanned(&self) {
        self.fragments_scanned.fetch_add(1, Ordering::Relaxed);
    }

    pub fn add_rows_returned(&self, rows: u64) {
        self.rows_returned.fetch_add(rows, Ordering::Relaxed);
    }

    pub fn snapshot(&self) -> Metrics {
        let load = |a: &AtomicU64| a.load(Ordering::Relaxed);
        let node_usage: Vec<NodeUsage> = self
            .nodes
            .iter()
            .map(|n| NodeUsage {
                cpu_ticks: load(&n.cpu_ticks),
                decode_filter_ticks: load(&n.decode_filter_ticks),
                bytes_read_local: load(&n.bytes_read_local),
                bytes_returned: load(&n.bytes_returned),
                reads: load(&n.reads),
                execs: load(&n.execs),
            })
            .collect();
        let wall_breakdown = PhaseTicks {
            discover: load(&self.phases[0]),
            prune: load(&self.phases[1]),
            scan: load(&self.phases[2]),
            materialize: load(&self.phases[3]),
        };
        Metrics {
            bytes_read_storage_total: node_usage.iter().map(|u| u.bytes_read_local).sum(),
            node_usage,
            client_cpu_ticks: wall_breakdown.total(),
            client_decode_filter_ticks: load(&self.client_decode_filter),
            bytes_transferred_total: load(&self.transferred),
            wall_breakdown,
            fragments_total: load(&self.fragments_total),
            fragments_scanned: load(&self.fragments_scanned),
            rows_returned: load(&self.rows_returned),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Bottleneck {
    ClientCpu,
    StorageCpu,
    Network,
}

impl Bottleneck {
    pub fn as_str(self) -> &'static str {
        match self {
            Bottleneck::ClientCpu => "CLIENT_CPU",
            Bottleneck::StorageCpu => "STORAGE_CPU",
            Bottleneck::Network => "NETWORK",
        }
    }
}

impl fmt::Display for Bottleneck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatencyEstimate {
    pub modeled_latency_ticks: f64,
    pub client_term: f64,
    pub storage_term: f64,
    pub network_term: f64,
    pub bottleneck: Bottleneck,
}

/// Ties resolve in the order client, storage, network.
pub fn estimate_latency(
    metrics: &Metrics,
    config: &CostModelConfig,
    mode: ScanMode,
    node_count: usize,
) -> Result<LatencyEstimate> {
    config.validate()?;
    if node_count == 0 {
        return Err(Error::Config("node_count must be >= 1".into()));
    }
    if metrics.node_usage.len() > node_count {
        return Err(Error::validation(format!(
            "metrics cover {} nodes but node_count is {node_count}",
            metrics.node_usage.len()
        )));
    }
    // Mode changes what the counters mean, not how they combine.
    let _ = mode;
    let client_term = metrics.client_cpu_ticks as f64 / config.client_parallelism;
    let storage_term = metrics.storage_cpu_ticks_max() as f64 / config.storage_parallelism_per_node;
    let network_term = metrics.bytes_transferred_total as f64 / config.network_bandwidth_bytes_per_tick;
    let mut bottleneck = Bottleneck::ClientCpu;
    let mut latency = client_term;
    if storage_term > latency {
        bottleneck = Bottleneck::StorageCpu;
        latency = storage_term;
    }
    if network_term > latency {
        bottleneck = Bottleneck::Network;
        latency = network_term;
    }
    Ok(LatencyEstimate {
        modeled_latency_ticks: latency,
        client_term,
        storage_term,
        network_term,
        bottleneck,
    })
}

/// Coordinates of one run in an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct RunParams {
    pub mode: ScanMode,
    pub layout: crate::layout::LayoutKind,
    pub selectivity: f64,
    pub node_count: usize,
    pub repetition: usize,
    pub queue_depth: usize,
    pub rows: u64,
}

pub const CSV_HEADER: [&str; 28] = [
    "mode",
    "layout",
    "selectivity",
    "node_count",
    "repetition",
    "queue_depth",
    "rows",
    "result_rows",
    "fragments_total",
    "fragments_scanned",
    "client_cpu_ticks",
    "client_decode_filter_ticks",
    "storage_cpu_ticks_total",
    "storage_cpu_ticks_max",
    "storage_decode_filter_ticks",
    "bytes_transferred_total",
    "bytes_read_storage_total",
    "object_reads",
    "class_method_calls",
    "ticks_discover",
    "ticks_prune",
    "ticks_scan",
    "ticks_materialize",
    "client_term",
    "storage_term",
    "network_term",
    "modeled_latency_ticks",
    "bottleneck",
];

/// One flat CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub params: RunParams,
    pub metrics: Metrics,
    pub estimate: LatencyEstimate,
}

impl RunRecord {
    /// Field values in [`CSV_HEADER`] order.
    pub fn fields(&self) -> Vec<String> {
        let p = &self.params;
        let m = &self.metrics;
        let e = &self.estimate;
        let w = &m.wall_breakdown;
        vec![
            p.mode.to_string(),
            p.layout.to_string(),
            format!("{}", p.selectivity),
            p.node_count.to_string(),
            p.repetition.to_string(),
            p.queue_depth.to_string(),
            p.rows.to_string(),
            m.rows_returned.to_string(),
            m.fragments_total.to_string(),
            m.fragments_scanned.to_string(),
            m.client_cpu_ticks.to_string(),
            m.client_decode_filter_ticks.to_string(),
            m.storage_cpu_ticks_total().to_string(),
            m.storage_cpu_ticks_max().to_string(),
            m.storage_decode_filter_ticks().to_string(),
            m.bytes_transferred_total.to_string(),
            m.bytes_read_storage_total.to_string(),
            m.object_reads().to_string(),
            m.class_method_calls().to_string(),
            w.discover.to_string(),
            w.prune.to_string(),
            w.scan.to_string(),
            w.materialize.to_string(),
            format!("{:.3}", e.client_term),
            format!("{:.3}", e.storage_term),
            format!("{:.3}", e.network_term),
            format!("{:.3}", e.modeled_latency_ticks),
            e.bottleneck.to_string(),
        ]
    }
}

pub fn report(params: RunParams, metrics: &Metrics, estimate: &LatencyEstimate) -> RunRecord {
    RunRecord {
        params,
        metrics: metrics.clone(),
        estimate: *estimate,
    }
}

/// Writes the header and one row per record.
pub fn write_csv<W: Write>(out: W, records: &[RunRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record(r.fields())?;
    }
    w.flush()?;
    Ok(())
}
