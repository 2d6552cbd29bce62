// SPDX-License-Identifier: Apache-2.0

//! Experiment driver.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use crate::bench::config::ExperimentGrid;
use crate::bench::generator::{generate, GeneratorSpec, DRIVER_COLUMN};
use crate::error::{Error, Result};
use crate::format::{Comparator, Predicate, Scalar, ScanRequest, Table};
use crate::fs::Namespace;
use crate::layout::{discover, write_split_dataset, write_striped_dataset, DatasetDescriptor, LayoutKind};
use crate::metrics::{estimate_latency, report, write_csv, MetricsRecorder, Phase, RunParams, RunRecord, TickModel};
use crate::scan::{execute, plan_scan};
use crate::store::{NodeUsage, Pool};
use crate::NodeId;

/// `driver < s`, or TRUE for `s >= 1`.
pub fn selectivity_predicate(s: f64) -> Predicate {
    if s >= 1.0 {
        Predicate::True
    } else {
        Predicate::compare(DRIVER_COLUMN, Comparator::Lt, Scalar::Float64(s))
    }
}

pub const STRIPED_PATH: &str = "bench/trips.rgf";
pub const SPLIT_PREFIX: &str = "bench/trips";

/// Writes `table` under both layouts.
pub fn write_both_layouts(ns: &Namespace, pool: &Pool, table: &Table, stripe_unit: u64, rows_per_group: usize) -> Result<()> {
    write_striped_dataset(ns, pool, STRIPED_PATH, table, stripe_unit, rows_per_group)?;
    write_split_dataset(ns, pool, SPLIT_PREFIX, table, rows_per_group, stripe_unit)?;
    Ok(())
}

pub fn layout_root(kind: LayoutKind) -> &'static str {
    match kind {
        LayoutKind::Striped => STRIPED_PATH,
        LayoutKind::Split => SPLIT_PREFIX,
    }
}

/// Discovery whose storage reads and client decode work land in `metrics`.
pub fn discover_recorded(
    ns: &Namespace,
    pool: &Pool,
    kind: LayoutKind,
    root: &str,
    metrics: &MetricsRecorder,
    ticks: &TickModel,
) -> Result<DatasetDescriptor> {
    let before: Vec<NodeUsage> = (0..pool.node_count()).map(|n| pool.usage(NodeId(n))).collect();
    let descriptor = discover(ns, pool, kind, root)?;
    let mut bytes = 0;
    for (n, b) in before.iter().enumerate() {
        let after = pool.usage(NodeId(n));
        let delta = NodeUsage {
            bytes_read_local: after.bytes_read_local - b.bytes_read_local,
            reads: after.reads - b.reads,
            ..NodeUsage::default()
        };
        bytes += delta.bytes_read_local;
        metrics.add_node_usage(NodeId(n), &delta);
    }
    metrics.charge_client(Phase::Discover, ticks.decode_per_byte * bytes);
    Ok(descriptor)
}

fn cell_error(selectivity: f64, nodes: usize, rep: usize, e: Error) -> Error {
    Error::Cell {
        cell: format!("selectivity={selectivity} nodes={nodes} rep={rep}"),
        source: Box::new(e),
    }
}

/// Runs every cell of the grid and returns one record per run.
pub fn run_grid_records(grid: &ExperimentGrid) -> Result<Vec<RunRecord>> {
    grid.validate()?;
    let table = generate(&GeneratorSpec {
        row_count: grid.rows,
        seed: grid.seed,
    });
    let mut records = Vec::with_capacity(grid.run_count());
    for &selectivity in &grid.selectivities {
        for &nodes in &grid.node_counts {
            for rep in 0..grid.repetitions {
                let cell = run_cell(grid, &table, selectivity, nodes, rep)
                    .map_err(|e| cell_error(selectivity, nodes, rep, e))?;
                records.extend(cell);
            }
        }
    }
    Ok(records)
}

fn run_cell(grid: &ExperimentGrid, table: &Table, selectivity: f64, nodes: usize, rep: usize) -> Result<Vec<RunRecord>> {
    let pool = Pool::create(nodes, grid.seed.wrapping_add(rep as u64))?;
    let ns = Namespace::new();
    write_both_layouts(&ns, &pool, table, grid.stripe_unit, grid.rows_per_group)?;
    let mut request = ScanRequest::with_predicate(selectivity_predicate(selectivity));
    request.projection = grid.projection.clone();

    let mut out = Vec::new();
    let mut reference: Option<(String, Table)> = None;
    for &layout in &grid.layouts {
        for &mode in &grid.modes {
            let metrics = MetricsRecorder::new(nodes);
            let descriptor =
                discover_recorded(&ns, &pool, layout, layout_root(layout), &metrics, &grid.cost.ticks)?;
            let mut plan = plan_scan(Arc::new(descriptor), &request, mode, grid.queue_depth)?.with_ticks(grid.cost.ticks);
            if grid.workers > 0 {
                plan = plan.with_workers(grid.workers);
            }
            let result = execute(&plan, &pool, &metrics)?;
            let label = format!("{layout}/{mode}");
            match &reference {
                None => reference = Some((label, result)),
                Some((ref_label, ref_table)) => {
                    if *ref_table != result {
                        return Err(Error::validation(format!(
                            "result of {label} ({} rows) differs from {ref_label} ({} rows)",
                            result.row_count(),
                            ref_table.row_count()
                        )));
                    }
                }
            }
            let m = metrics.snapshot();
            let estimate = estimate_latency(&m, &grid.cost, mode, nodes)?;
            out.push(report(
                RunParams {
                    mode,
                    layout,
                    selectivity,
                    node_count: nodes,
                    repetition: rep,
                    queue_depth: grid.queue_depth,
                    rows: grid.rows as u64,
                },
                &m,
                &estimate,
            ));
        }
    }
    Ok(out)
}

/// Runs the grid and writes the CSV to `out_path`.
pub fn run_grid(grid: &ExperimentGrid, out_path: &Path) -> Result<Vec<RunRecord>> {
    let records = run_grid_records(grid)?;
    let file = std::fs::File::create(out_path)?;
    write_csv(file, &records)?;
    Ok(records)
}

/// Human-readable table, averaged over repetitions.
pub fn summary_table(records: &[RunRecord]) -> String {
    type Key = (u64, usize, &'static str, &'static str);
    let mut groups: BTreeMap<Key, Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        let p = &r.params;
        // Descending selectivity, then nodes, layout, mode.
        let key = (u64::MAX - p.selectivity.to_bits(), p.node_count, p.layout.as_str(), p.mode.as_str());
        groups.entry(key).or_default().push(r);
    }
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:>11} {:>5} {:>8} {:>8} {:>10} {:>14} {:>14} {:>14} {:>14} {:>11}",
        "selectivity", "nodes", "layout", "mode", "rows", "latency", "client_cpu", "storage_max", "transferred", "bottleneck"
    );
    for rs in groups.values() {
        let first = rs[0];
        let n = rs.len() as f64;
        let avg = |f: &dyn Fn(&RunRecord) -> f64| rs.iter().map(|r| f(r)).sum::<f64>() / n;
        let _ = writeln!(
            s,
            "{:>11} {:>5} {:>8} {:>8} {:>10} {:>14.1} {:>14.0} {:>14.0} {:>14.0} {:>11}",
            first.params.selectivity,
            first.params.node_count,
            first.params.layout.as_str(),
            first.params.mode.as_str(),
            first.metrics.rows_returned,
            avg(&|r| r.estimate.modeled_latency_ticks),
            avg(&|r| r.metrics.client_cpu_ticks as f64),
            avg(&|r| r.metrics.storage_cpu_ticks_max() as f64),
            avg(&|r| r.metrics.bytes_transferred_total as f64),
            first.estimate.bottleneck.as_str(),
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_grid_counts_and_determinism() {
        let g = ExperimentGrid {
            rows: 3000,
            rows_per_group: 250,
            node_counts: vec![2, 4],
            selectivities: vec![1.0, 0.1],
            ..Default::default()
        };
        let a = run_grid_records(&g).unwrap();
        assert_eq!(a.len(), g.run_count());
        let b = run_grid_records(&g).unwrap();
        assert_eq!(a, b);
        let text = summary_table(&a);
        assert_eq!(text.lines().count(), 1 + a.len());
    }
}
