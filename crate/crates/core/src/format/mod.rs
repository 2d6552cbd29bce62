// SPDX-License-Identifier: Apache-2.0

//! Row-group columnar file format with footer statistics.

pub(crate) mod codec;
pub mod chunk;
pub mod footer;
pub mod predicate;
pub mod prune;
pub mod reader;
pub mod stats;
pub mod table;
pub mod types;
pub mod writer;

pub use footer::{decode_footer, encode_footer, ChunkMeta, Encoding, FooterMetadata, RowGroupMeta, FORMAT_VERSION};
pub use predicate::{Comparator, Predicate};
pub use prune::prune_row_groups;
pub use reader::{
    check_header, open_file, read_footer, scan_row_group, scan_row_groups, ReadAt, ScanRequest, ScanWork,
    TrackingReader,
};
pub use stats::{compute_stats, ColumnStatistics};
pub use table::{Column, ColumnData, Table};
pub use types::{Field, PhysicalType, Scalar, Schema};
pub use writer::{assemble_file, encode_row_group, encode_row_groups, write_file, EncodedRowGroup, MAGIC};
