// SPDX-License-Identifier: Apache-2.0

//! Columnar scans that run either on the client or inside a simulated
//! programmable object store.
//!
//! The crate is layered bottom-up:
//!
//! - [`format`]: a row-group columnar file format whose footer carries
//!   per-column min/max/null statistics for row-group pruning.
//! - [`store`]: a multi-node object pool with offset reads and registered
//!   object-class methods that run on the node owning an object.
//! - [`fs`]: a striping shim mapping files onto fixed-size objects, with
//!   filename to object-id resolution and per-object random-access readers.
//! - [`layout`]: the striped and split dataset layouts and their discovery.
//! - [`scan`]: the dual-mode scanner (client-local or storage-offloaded).
//! - [`metrics`]: resource ledgers and the max-of-stages latency model.
//! - [`bench`]: synthetic data generation and the experiment grid.

pub mod bench;
pub mod error;
pub mod format;
pub mod fs;
pub mod layout;
pub mod metrics;
pub mod scan;
pub mod store;

pub use error::{Error, NodeId, Result};
