// SPDX-License-Identifier: Apache-2.0

//! Experiment grid and its flat `key = value` config format.

use std::collections::BTreeSet;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::layout::LayoutKind;
use crate::metrics::CostModelConfig;
use crate::scan::{ScanMode, DEFAULT_QUEUE_DEPTH};

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentGrid {
    pub selectivities: Vec<f64>,
    pub node_counts: Vec<usize>,
    pub modes: Vec<ScanMode>,
    pub layouts: Vec<LayoutKind>,
    pub queue_depth: usize,
    pub rows: usize,
    pub repetitions: usize,
    pub seed: u64,
    pub stripe_unit: u64,
    pub rows_per_group: usize,
    /// Client worker threads per scan; 0 means twice the node count.
    pub workers: usize,
    /// Output columns; empty means all.
    pub projection: Vec<String>,
    pub cost: CostModelConfig,
}

impl Default for ExperimentGrid {
    fn default() -> Self {
        Self {
            selectivities: vec![1.0, 0.1, 0.01],
            node_counts: vec![4, 8, 16],
            modes: vec![ScanMode::ClientLocal, ScanMode::StorageOffload],
            layouts: vec![LayoutKind::Striped, LayoutKind::Split],
            queue_depth: DEFAULT_QUEUE_DEPTH,
            rows: 100_000,
            repetitions: 1,
            seed: 42,
            stripe_unit: 64 * 1024,
            rows_per_group: 500,
            workers: 0,
            projection: Vec::new(),
            cost: CostModelConfig::default(),
        }
    }
}

pub const CONFIG_KEYS: [&str; 20] = [
    "selectivities",
    "node_counts",
    "modes",
    "layouts",
    "queue_depth",
    "rows",
    "repetitions",
    "seed",
    "stripe_unit",
    "rows_per_group",
    "workers",
    "projection",
    "network_bandwidth_bytes_per_tick",
    "client_parallelism",
    "storage_parallelism_per_node",
    "decode_per_byte",
    "eval_per_row",
    "encode_per_byte",
    "ingest_bytes_per_tick",
    "concat_per_row",
];

fn list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<T>()
                .map_err(|_| Error::Config(format!("{key}: cannot parse '{s}'")))
        })
        .collect()
}

fn one<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse::<T>()
        .map_err(|_| Error::Config(format!("{key}: cannot parse '{value}'")))
}

impl ExperimentGrid {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim();
        match key {
            "selectivities" => self.selectivities = list(key, value)?,
            "node_counts" => self.node_counts = list(key, value)?,
            "modes" => self.modes = list(key, value)?,
            "layouts" => self.layouts = list(key, value)?,
            "queue_depth" => self.queue_depth = one(key, value)?,
            "rows" => self.rows = one(key, value)?,
            "repetitions" => self.repetitions = one(key, value)?,
            "seed" => self.seed = one(key, value)?,
            "stripe_unit" => self.stripe_unit = one(key, value)?,
            "rows_per_group" => self.rows_per_group = one(key, value)?,
            "workers" => self.workers = one(key, value)?,
            "projection" => self.projection = list(key, value)?,
            "network_bandwidth_bytes_per_tick" => self.cost.network_bandwidth_bytes_per_tick = one(key, value)?,
            "client_parallelism" => self.cost.client_parallelism = one(key, value)?,
            "storage_parallelism_per_node" => self.cost.storage_parallelism_per_node = one(key, value)?,
            "decode_per_byte" => self.cost.ticks.decode_per_byte = one(key, value)?,
            "eval_per_row" => self.cost.ticks.eval_per_row = one(key, value)?,
            "encode_per_byte" => self.cost.ticks.encode_per_byte = one(key, value)?,
            "ingest_bytes_per_tick" => self.cost.ticks.ingest_bytes_per_tick = one(key, value)?,
            "concat_per_row" => self.cost.ticks.concat_per_row = one(key, value)?,
            other => return Err(Error::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    /// Parses config text on top of the defaults. Blank lines and lines
    /// starting with `#` are ignored; later keys override earlier ones.
    pub fn parse(text: &str) -> Result<Self> {
        let mut grid = Self::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            grid.set(k, v)
                .map_err(|e| Error::Config(format!("line {}: {e}", n + 1)))?;
        }
        grid.validate()?;
        Ok(grid)
    }

    /// `default` selects the built-in grid; anything else is a file path.
    pub fn load(spec: &str) -> Result<Self> {
        if spec == "default" {
            return Ok(Self::default());
        }
        Self::parse(&std::fs::read_to_string(spec)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.selectivities.is_empty() || self.node_counts.is_empty() || self.modes.is_empty() || self.layouts.is_empty()
        {
            return bad("every grid axis needs at least one value");
        }
        if self.selectivities.iter().any(|s| !(*s > 0.0 && *s <= 1.0)) {
            return bad("selectivities must lie in (0, 1]");
        }
        if self.node_counts.contains(&0) {
            return bad("node counts must be >= 1");
        }
        let distinct = |n: usize, m: usize| n == m;
        if !distinct(self.node_counts.iter().collect::<BTreeSet<_>>().len(), self.node_counts.len())
            || !distinct(self.modes.iter().map(|m| m.as_str()).collect::<BTreeSet<_>>().len(), self.modes.len())
            || !distinct(self.layouts.iter().map(|m| m.as_str()).collect::<BTreeSet<_>>().len(), self.layouts.len())
        {
            return bad("grid axes must not repeat values");
        }
        if self.queue_depth == 0 || self.repetitions == 0 || self.rows_per_group == 0 || self.stripe_unit == 0 {
            return bad("queue_depth, repetitions, rows_per_group and stripe_unit must be >= 1");
        }
        self.cost.validate()
    }

    /// Number of CSV rows a run produces.
    pub fn run_count(&self) -> usize {
        self.selectivities.len() * self.node_counts.len() * self.modes.len() * self.layouts.len() * self.repetitions
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_overrides_defaults() {
        let g = ExperimentGrid::parse("# comment\nrows = 1000\nselectivities=0.5, 0.1\nmodes=offload\n\nnetwork_bandwidth_bytes_per_tick=2.5\n")
            .unwrap();
        assert_eq!(g.rows, 1000);
        assert_eq!(g.selectivities, vec![0.5, 0.1]);
        assert_eq!(g.modes, vec![ScanMode::StorageOffload]);
        assert_eq!(g.cost.network_bandwidth_bytes_per_tick, 2.5);
        assert_eq!(g.node_counts, vec![4, 8, 16]);
        assert_eq!(ExperimentGrid::default().run_count(), 36);
    }

    #[test]
    fn bad_configs() {
        for text in ["rows", "nope=1", "rows=-1", "selectivities=", "selectivities=1.5", "queue_depth=0", "node_counts=4,4", "client_parallelism=0"] {
            assert!(matches!(ExperimentGrid::parse(text), Err(Error::Config(_))), "{text}");
        }
    }
}
