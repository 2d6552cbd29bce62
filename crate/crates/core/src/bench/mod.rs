// SPDX-License-Identifier: Apache-2.0

//! Synthetic data, text predicates, the experiment grid and store persistence.

pub mod config;
pub mod generator;
pub mod grammar;
pub mod persist;
pub mod run;

pub use config::ExperimentGrid;
pub use generator::{generate, taxi_schema, GeneratorSpec, DRIVER_COLUMN};
pub use grammar::parse_predicate;
pub use persist::{load_store, save_store};
pub use run::{run_grid, run_grid_records, selectivity_predicate, summary_table};
