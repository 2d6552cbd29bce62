// SPDX-License-Identifier: Apache-2.0

//! `offload`: generate datasets, scan them locally or offloaded, run the
//! experiment grid, and inspect files.

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};

use offload_core::bench::{self, load_store, parse_predicate, save_store, ExperimentGrid, GeneratorSpec};
use offload_core::format::{decode_footer, open_file, FooterMetadata, ReadAt, ScanRequest};
use offload_core::fs::{FileReader, Namespace};
use offload_core::layout::{self, LayoutKind, INDEX_MAGIC};
use offload_core::metrics::{estimate_latency, CostModelConfig, MetricsRecorder};
use offload_core::scan::{execute, plan_scan, ScanMode, DEFAULT_QUEUE_DEPTH};
use offload_core::store::Pool;
use offload_core::{NodeId, Result};

#[derive(Parser)]
#[command(name = "offload", version, about = "Client-local vs storage-offloaded columnar scans over a simulated object store")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the synthetic trip table and write it to a store directory.
    Gen {
        /// Store directory (created if missing).
        #[arg(long)]
        store: PathBuf,
        /// File path (striped) or path prefix (split) inside the store.
        #[arg(long, default_value = "trips")]
        path: String,
        #[arg(long, default_value = "striped")]
        layout: LayoutKind,
        #[arg(long, default_value_t = 100_000)]
        rows: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Bytes per object.
        #[arg(long, default_value_t = 65_536)]
        stripe_unit: u64,
        #[arg(long, default_value_t = 500)]
        rows_per_group: usize,
        /// Node count for a new store; ignored when the store exists.
        #[arg(long, default_value_t = 4)]
        nodes: usize,
    },
    /// Scan a dataset once and print the row count and metrics.
    Scan {
        #[arg(long)]
        store: PathBuf,
        #[arg(long, default_value = "trips")]
        path: String,
        #[arg(long, default_value = "striped")]
        layout: LayoutKind,
        /// local or offload.
        #[arg(long, default_value = "offload")]
        mode: ScanMode,
        /// e.g. "driver < 0.01 AND payment_type = 'Cash'".
        #[arg(long, default_value = "")]
        predicate: String,
        /// Comma-separated output columns; all when omitted.
        #[arg(long, value_delimiter = ',')]
        columns: Vec<String>,
        /// Re-place objects over this many nodes; defaults to the saved count.
        #[arg(long)]
        nodes: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_QUEUE_DEPTH)]
        queue_depth: usize,
        /// Client worker threads; 0 means twice the node count.
        #[arg(long, default_value_t = 0)]
        workers: usize,
        /// Print up to this many result rows.
        #[arg(long, default_value_t = 0)]
        show: usize,
    },
    /// Run the experiment grid and write a CSV.
    Bench {
        /// Config file path, or `default` for the built-in grid.
        #[arg(long, default_value = "default")]
        config: String,
        #[arg(long, default_value = "results.csv")]
        out: PathBuf,
        /// Extra `key=value` overrides applied after the config.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Dump the stripe map and footer of a file in a store.
    Inspect {
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        path: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen {
            store,
            path,
            layout,
            rows,
            seed,
            stripe_unit,
            rows_per_group,
            nodes,
        } => gen(store, &path, layout, rows, seed, stripe_unit, rows_per_group, nodes),
        Command::Scan {
            store,
            path,
            layout,
            mode,
            predicate,
            columns,
            nodes,
            queue_depth,
            workers,
            show,
        } => scan(store, &path, layout, mode, &predicate, columns, nodes, queue_depth, workers, show),
        Command::Bench { config, out, overrides } => bench_cmd(&config, &out, &overrides),
        Command::Inspect { store, path } => inspect(store, &path),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn gen(
    store: PathBuf,
    path: &str,
    kind: LayoutKind,
    rows: usize,
    seed: u64,
    stripe_unit: u64,
    rows_per_group: usize,
    nodes: usize,
) -> Result<()> {
    let (ns, pool) = if store.join("store.conf").exists() {
        load_store(&store, None)?
    } else {
        (Namespace::new(), Pool::create(nodes, seed)?)
    };
    let table = bench::generate(&GeneratorSpec { row_count: rows, seed });
    match kind {
        LayoutKind::Striped => {
            let (map, objects) = layout::write_striped_dataset(&ns, &pool, path, &table, stripe_unit, rows_per_group)?;
            println!(
                "wrote {path}: {rows} rows, {} row groups, {} objects, {} bytes",
                objects.len(),
                map.object_ids.len(),
                map.file_size
            );
        }
        LayoutKind::Split => {
            let d = layout::write_split_dataset(&ns, &pool, path, &table, rows_per_group, stripe_unit)?;
            println!("wrote {path}: {rows} rows, {} data files + 1 index", d.fragments.len());
        }
    }
    save_store(&store, &ns, &pool)
}

#[allow(clippy::too_many_arguments)]
fn scan(
    store: PathBuf,
    path: &str,
    kind: LayoutKind,
    mode: ScanMode,
    predicate: &str,
    columns: Vec<String>,
    nodes: Option<usize>,
    queue_depth: usize,
    workers: usize,
    show: usize,
) -> Result<()> {
    let (ns, pool) = load_store(&store, nodes)?;
    let cost = CostModelConfig::default();
    let metrics = MetricsRecorder::new(pool.node_count());
    let descriptor = bench::run::discover_recorded(&ns, &pool, kind, path, &metrics, &cost.ticks)?;
    let mut request = ScanRequest::with_predicate(parse_predicate(predicate)?);
    request.projection = columns;
    let mut plan = plan_scan(Arc::new(descriptor), &request, mode, queue_depth)?;
    if workers > 0 {
        plan = plan.with_workers(workers);
    }
    let table = execute(&plan, &pool, &metrics)?;
    let m = metrics.snapshot();
    let est = estimate_latency(&m, &cost, mode, pool.node_count())?;
    println!("rows: {}", table.row_count());
    println!("fragments: {} selected of {}", plan.selected_ordinals.len(), plan.descriptor.fragments.len());
    println!("mode: {mode}  layout: {kind}  nodes: {}  queue_depth: {queue_depth}", pool.node_count());
    println!("client_cpu_ticks: {} (decode/filter {})", m.client_cpu_ticks, m.client_decode_filter_ticks);
    for (n, u) in m.node_usage.iter().enumerate() {
        println!(
            "  {}: cpu_ticks {} decode/filter {} reads {} execs {} bytes_read {}",
            NodeId(n),
            u.cpu_ticks,
            u.decode_filter_ticks,
            u.reads,
            u.execs,
            u.bytes_read_local
        );
    }
    println!("bytes_transferred: {}", m.bytes_transferred_total);
    println!("bytes_read_storage: {}", m.bytes_read_storage_total);
    println!(
        "modeled_latency_ticks: {:.1} (client {:.1}, storage {:.1}, network {:.1}) bottleneck {}",
        est.modeled_latency_ticks, est.client_term, est.storage_term, est.network_term, est.bottleneck
    );
    for r in 0..show.min(table.row_count()) {
        let row: Vec<String> = table
            .columns()
            .iter()
            .map(|c| c.value(r).map_or("null".to_string(), |v| v.to_string()))
            .collect();
        println!("{}", row.join("\t"));
    }
    Ok(())
}

fn bench_cmd(config: &str, out: &std::path::Path, overrides: &[String]) -> Result<()> {
    let mut grid = ExperimentGrid::load(config)?;
    for o in overrides {
        let (k, v) = o
            .split_once('=')
            .ok_or_else(|| offload_core::Error::Config(format!("--set expects KEY=VALUE, got '{o}'")))?;
        grid.set(k, v)?;
    }
    grid.validate()?;
    let records = bench::run_grid(&grid, out)?;
    print!("{}", bench::summary_table(&records));
    println!("wrote {} rows to {}", records.len(), out.display());
    Ok(())
}

fn print_footer(footer: &FooterMetadata, stripe_unit: u64) {
    println!("format_version: {}", footer.format_version);
    println!("total_rows: {}", footer.total_rows);
    println!("schema:");
    for f in footer.schema.fields() {
        println!("  {} {}{}", f.name, f.physical_type, if f.nullable { " nullable" } else { "" });
    }
    println!("row_groups: {}", footer.row_groups.len());
    for (i, g) in footer.row_groups.iter().enumerate() {
        print!(
            "  [{i}] offset {} length {} rows {} offset%stripe_unit {}",
            g.byte_offset,
            g.byte_length,
            g.row_count,
            g.byte_offset % stripe_unit
        );
        match &g.data_path {
            Some(p) => println!(" file {p}"),
            None => println!(),
        }
    }
}

fn inspect(store: PathBuf, path: &str) -> Result<()> {
    let (ns, pool) = load_store(&store, None)?;
    let map = ns.resolve(path)?;
    println!("path: {}", map.path);
    println!("ino: {:016x}", map.file_ino);
    println!("size: {}", map.file_size);
    println!("stripe_unit: {}", map.stripe_unit);
    println!("objects: {}", map.object_ids.len());
    for o in &map.object_ids {
        println!("  {o} on {} bytes {}", pool.node_of(o), pool.stat(o)?);
    }
    let reader = FileReader::open(&ns, &pool, path)?;
    let head = reader.read_at(0, 4)?;
    if head == INDEX_MAGIC {
        let bytes = reader.read_exact_at(0, reader.size()?)?;
        println!("kind: split index");
        print_footer(&decode_footer(&bytes[4..])?, map.stripe_unit);
    } else {
        println!("kind: columnar file");
        print_footer(&open_file(&reader)?, map.stripe_unit);
    }
    Ok(())
}
