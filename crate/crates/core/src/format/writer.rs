// SPDX-License-Identifier: Apache-2.0

use crate::error::{Error, Result};
use crate::format::chunk::{choose_encoding, encode_chunk};
use crate::format::footer::{encode_footer, ChunkMeta, Encoding, FooterMetadata, RowGroupMeta};
use crate::format::stats::{compute_stats, ColumnStatistics};
use crate::format::table::Table;
use crate::format::types::Schema;

pub const MAGIC: &[u8; 4] = b"RGF1";
/// `footer_length` (u64) followed by the closing magic.
pub const TRAILER_LEN: u64 = 12;
pub const MIN_FILE_SIZE: u64 = 4 + TRAILER_LEN;

/// One row group with its column chunks already encoded, not yet placed.
#[derive(Debug, Clone)]
pub struct EncodedRowGroup {
    pub row_count: u64,
    pub chunks: Vec<(Vec<u8>, Encoding)>,
    pub stats: Vec<ColumnStatistics>,
}

impl EncodedRowGroup {
    pub fn encoded_len(&self) -> u64 {
        self.chunks.iter().map(|(b, _)| b.len() as u64).sum()
    }
}

pub fn encode_row_group(table: &Table) -> EncodedRowGroup {
    let chunks = table
        .columns()
        .iter()
        .map(|c| {
            let enc = choose_encoding(c);
            (encode_chunk(c, enc), enc)
        })
        .collect();
    EncodedRowGroup {
        row_count: table.row_count() as u64,
        chunks,
        stats: table.columns().iter().map(compute_stats).collect(),
    }
}

/// Splits `table` into groups of `rows_per_group` rows (the last may be short).
pub fn encode_row_groups(table: &Table, rows_per_group: usize) -> Result<Vec<EncodedRowGroup>> {
    if rows_per_group == 0 {
        return Err(Error::validation("target_rows_per_group must be >= 1"));
    }
    let n = table.row_count();
    Ok((0..n)
        .step_by(rows_per_group)
        .map(|start| encode_row_group(&table.slice(start, rows_per_group.min(n - start))))
        .collect())
}

/// Lays out a complete file.
///
/// With `stripe_unit` set, row group `i` occupies `[i*unit, (i+1)*unit)`,
/// zero-padded; group 0 also covers the leading magic. The footer then
/// starts on the next stripe boundary.
pub fn assemble_file(
    schema: &Schema,
    groups: &[EncodedRowGroup],
    stripe_unit: Option<u64>,
) -> Result<(Vec<u8>, FooterMetadata)> {
    if stripe_unit == Some(0) {
        return Err(Error::validation("stripe unit must be >= 1"));
    }
    let mut buf = MAGIC.to_vec();
    let mut metas = Vec::with_capacity(groups.len());
    for (i, g) in groups.iter().enumerate() {
        let region_start = match stripe_unit {
            Some(unit) => {
                let start = i as u64 * unit;
                buf.resize(start.max(buf.len() as u64) as usize, 0);
                start
            }
            None => buf.len() as u64,
        };
        let mut column_chunks = Vec::with_capacity(g.chunks.len());
        for (bytes, encoding) in &g.chunks {
            column_chunks.push(ChunkMeta {
                offset: buf.len() as u64,
                length: bytes.len() as u64,
                encoding: *encoding,
            });
            buf.extend_from_slice(bytes);
        }
        let byte_length = buf.len() as u64 - region_start;
        if let Some(unit) = stripe_unit {
            if byte_length > unit {
                return Err(Error::LayoutInfeasible {
                    group: i,
                    needed: byte_length,
                    stripe_unit: unit,
                });
            }
        }
        metas.push(RowGroupMeta {
            byte_offset: region_start,
            byte_length,
            row_count: g.row_count,
            column_stats: g.stats.clone(),
            column_chunks,
            data_path: None,
        });
    }
    if let Some(unit) = stripe_unit {
        let footer_start = groups.len().max(1) as u64 * unit;
        buf.resize(footer_start as usize, 0);
    }
    let footer = FooterMetadata::new(schema.clone(), metas);
    let encoded = encode_footer(&footer);
    buf.extend_from_slice(&encoded);
    buf.extend_from_slice(&(encoded.len() as u64).to_le_bytes());
    buf.extend_from_slice(MAGIC);
    Ok((buf, footer))
}

pub fn write_file(table: &Table, target_rows_per_group: usize) -> Result<Vec<u8>> {
    let groups = encode_row_groups(table, target_rows_per_group)?;
    Ok(assemble_file(table.schema(), &groups, None)?.0)
}
