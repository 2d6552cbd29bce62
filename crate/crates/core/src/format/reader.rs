// SPDX-License-Identifier: Apache-2.0

use std::sync::Arc;

use parking_lot::Mutex;

use crate::error::{Error, Result};
use crate::format::chunk::decode_chunk;
use crate::format::footer::{decode_footer, FooterMetadata, RowGroupMeta};
use crate::format::predicate::Predicate;
use crate::format::prune::prune_row_groups;
use crate::format::table::{Column, Table};
use crate::format::types::Schema;
use crate::format::writer::{MAGIC, MIN_FILE_SIZE, TRAILER_LEN};

/// Random-access byte source: a size plus ranged reads.
pub trait ReadAt: Send + Sync {
    fn size(&self) -> Result<u64>;

    /// Returns up to `len` bytes starting at `offset`; fewer at end of
    /// data, none when `offset >= size`.
    fn read_at(&self, offset: u64, len: u64) -> Result<Vec<u8>>;

    fn read_exact_at(&self, offset: u64, len: u64) -> Result<Vec<u8>> {
        let out = self.read_at(offset, len)?;
        if out.len() as u64 != len {
            return Err(Error::corrupt(format!(
                "short read at offset {offset}: wanted {len} bytes, got {}",
                out.len()
            )));
        }
        Ok(out)
    }
}

impl ReadAt for [u8] {
    fn size(&self) -> Result<u64> {
        Ok(self.len() as u64)
    }

    fn read_at(&self, offset: u64, len: u64) -> Result<Vec<u8>> {
        let size = self.len() as u64;
        let start = offset.min(size);
        let end = offset.saturating_add(len).min(size);
        Ok(self[start as usize..end as usize].to_vec())
    }
}

impl ReadAt for Vec<u8> {
    fn size(&self) -> Result<u64> {
        self.as_slice().size()
    }

    fn read_at(&self, offset: u64, len: u64) -> Result<Vec<u8>> {
        self.as_slice().read_at(offset, len)
    }
}

impl<R: ReadAt + ?Sized> ReadAt for &R {
    fn size(&self) -> Result<u64> {
        (**self).size()
    }

    fn read_at(&self, offset: u64, len: u64) -> Result<Vec<u8>> {
        (**self).read_at(offset, len)
    }
}

impl<R: ReadAt + ?Sized> ReadAt for Arc<R> {
    fn size(&self) -> Result<u64> {
        (**self).size()
    }

    fn read_at(&self, offset: u64, len: u64) -> Result<Vec<u8>> {
        (**self).read_at(offset, len)
    }
}

/// Records every ranged read passing through it.
pub struct TrackingReader<R> {
    inner: R,
    reads: Mutex<Vec<(u64, u64)>>,
}

impl<R: ReadAt> TrackingReader<R> {
    pub fn new(inner: R) -> Self {
        Self {
            inner,
            reads: Mutex::new(Vec::new()),
        }
    }

    /// `(offset, requested_len)` pairs in issue order.
    pub fn reads(&self) -> Vec<(u64, u64)> {
        self.reads.lock().clone()
    }

    pub fn into_inner(self) -> R {
        self.inner
    }
}

impl<R: ReadAt> ReadAt for TrackingReader<R> {
    fn size(&self) -> Result<u64> {
        self.inner.size()
    }

    fn read_at(&self, offset: u64, len: u64) -> Result<Vec<u8>> {
        self.reads.lock().push((offset, len));
        self.inner.read_at(offset, len)
    }
}

/// Predicate + projection + optional explicit row-group subset.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanRequest {
    pub predicate: Predicate,
    /// Output columns in order; empty selects every column.
    pub projection: Vec<String>,
    pub row_group_ids: Option<Vec<usize>>,
}

impl Default for ScanRequest {
    fn default() -> Self {
        Self::all()
    }
}

impl ScanRequest {
    pub fn all() -> Self {
        Self {
            predicate: Predicate::True,
            projection: Vec::new(),
            row_group_ids: None,
        }
    }

    pub fn with_predicate(predicate: Predicate) -> Self {
        Self {
            predicate,
            ..Self::all()
        }
    }

    pub fn projecting(mut self, columns: &[&str]) -> Self {
        self.projection = columns.iter().map(|s| s.to_string()).collect();
        self
    }

    /// Validates against `schema`, returning the request with its predicate bound.
    pub fn bind(&self, schema: &Schema) -> Result<ScanRequest> {
        let mut seen = std::collections::HashSet::new();
        for name in &self.projection {
            if !seen.insert(name) {
                return Err(Error::validation(format!("duplicate projection column '{name}'")));
            }
        }
        schema.project(&self.projection)?;
        Ok(ScanRequest {
            predicate: self.predicate.bind(schema)?,
            projection: self.projection.clone(),
            row_group_ids: self.row_group_ids.clone(),
        })
    }

    pub fn output_schema(&self, schema: &Schema) -> Result<Schema> {
        schema.project(&self.projection)
    }
}

/// Work performed by a scan, fed into the CPU tick model.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ScanWork {
    pub bytes_decoded: u64,
    pub rows_evaluated: u64,
    pub chunks_read: u64,
}

impl ScanWork {
    pub fn add(&mut self, other: ScanWork) {
        self.bytes_decoded += other.bytes_decoded;
        self.rows_evaluated += other.rows_evaluated;
        self.chunks_read += other.chunks_read;
    }
}

/// Reads the trailer and footer: exactly two ranged reads.
pub fn read_footer<R: ReadAt + ?Sized>(source: &R) -> Result<FooterMetadata> {
    let size = source.size()?;
    if size < TRAILER_LEN {
        return Err(Error::corrupt(format!("{size} bytes is too small to hold a trailer")));
    }
    let trailer = source.read_exact_at(size - TRAILER_LEN, TRAILER_LEN)?;
    if &trailer[8..] != MAGIC {
        return Err(Error::corrupt("bad trailing magic"));
    }
    let footer_len = u64::from_le_bytes(trailer[..8].try_into().unwrap());
    if footer_len > size - TRAILER_LEN {
        return Err(Error::corrupt(format!(
            "footer length {footer_len} exceeds available {} bytes",
            size - TRAILER_LEN
        )));
    }
    let body = source.read_exact_at(size - TRAILER_LEN - footer_len, footer_len)?;
    decode_footer(&body).map_err(|e| match e {
        Error::CorruptMetadata(msg) => Error::corrupt(format!("footer: {msg}")),
        other => other,
    })
}

pub fn check_header<R: ReadAt + ?Sized>(source: &R) -> Result<()> {
    if source.size()? < MIN_FILE_SIZE {
        return Err(Error::corrupt("file shorter than minimum size"));
    }
    if source.read_exact_at(0, 4)? != MAGIC {
        return Err(Error::corrupt("bad leading magic"));
    }
    Ok(())
}

/// Header check plus [`read_footer`].
pub fn open_file<R: ReadAt + ?Sized>(source: &R) -> Result<FooterMetadata> {
    check_header(source)?;
    read_footer(source)
}

fn read_column<R: ReadAt + ?Sized>(
    source: &R,
    schema: &Schema,
    meta: &RowGroupMeta,
    ordinal: usize,
    col: usize,
    work: &mut ScanWork,
) -> Result<Column> {
    let chunk = meta.column_chunks[col];
    let field = schema.field(col);
    let wrap = |e: Error| Error::corrupt(format!("row group {ordinal}, column '{}': {e}", field.name));
    let bytes = source.read_exact_at(chunk.offset, chunk.length).map_err(wrap)?;
    work.bytes_decoded += chunk.length;
    work.chunks_read += 1;
    decode_chunk(&bytes, field.physical_type, meta.row_count as usize, chunk.encoding).map_err(wrap)
}

/// Scans one row group, reading only the chunks of projected and predicate
/// columns. `request` must already be bound to `schema`.
pub fn scan_row_group<R: ReadAt + ?Sized>(
    source: &R,
    schema: &Schema,
    meta: &RowGroupMeta,
    ordinal: usize,
    request: &ScanRequest,
    work: &mut ScanWork,
) -> Result<Table> {
    if meta.column_chunks.len() != schema.len() {
        return Err(Error::corrupt(format!("row group {ordinal}: column count mismatch")));
    }
    let out_schema = request.output_schema(schema)?;
    let mut decoded: Vec<Option<Column>> = vec![None; schema.len()];

    let mask = if request.predicate.is_true() {
        None
    } else if let Some(c) = request.predicate.constant_value() {
        if c {
            None
        } else {
            return Ok(Table::empty(out_schema));
        }
    } else {
        let names = request.predicate.columns();
        let mut fields = Vec::with_capacity(names.len());
        let mut cols = Vec::with_capacity(names.len());
        for name in &names {
            let idx = schema
                .index_of(name)
                .ok_or_else(|| Error::validation(format!("unknown predicate column '{name}'")))?;
            let col = read_column(source, schema, meta, ordinal, idx, work)?;
            fields.push(schema.field(idx).clone());
            cols.push(col.clone());
            decoded[idx] = Some(col);
        }
        let pred_table = Table::new(Schema::new(fields)?, cols)
            .map_err(|e| Error::corrupt(format!("row group {ordinal}: {e}")))?;
        work.rows_evaluated += meta.row_count;
        Some(request.predicate.evaluate(&pred_table)?)
    };

    if let Some(m) = &mask {
        if !m.iter().any(|b| *b) {
            return Ok(Table::empty(out_schema));
        }
    }

    let mut columns = Vec::with_capacity(out_schema.len());
    for field in out_schema.fields() {
        let idx = schema.index_of(&field.name).unwrap();
        let col = match decoded[idx].take() {
            Some(c) => c,
            None => read_column(source, schema, meta, ordinal, idx, work)?,
        };
        columns.push(match &mask {
            Some(m) => col.filter(m),
            None => col,
        });
    }
    Table::new(out_schema, columns).map_err(|e| Error::corrupt(format!("row group {ordinal}: {e}")))
}

/// Scans the requested (or all) row groups that survive pruning and
/// concatenates the results in row-group order.
pub fn scan_row_groups<R: ReadAt + ?Sized>(
    source: &R,
    footer: &FooterMetadata,
    request: &ScanRequest,
) -> Result<Table> {
    scan_row_groups_with_work(source, footer, request).map(|(t, _)| t)
}

pub fn scan_row_groups_with_work<R: ReadAt + ?Sized>(
    source: &R,
    footer: &FooterMetadata,
    request: &ScanRequest,
) -> Result<(Table, ScanWork)> {
    let bound = request.bind(&footer.schema)?;
    let mut selected = prune_row_groups(footer, &bound.predicate)?;
    if let Some(ids) = &bound.row_group_ids {
        if let Some(bad) = ids.iter().find(|i| **i >= footer.row_groups.len()) {
            return Err(Error::validation(format!(
                "row group {bad} out of range ({} groups)",
                footer.row_groups.len()
            )));
        }
        selected.retain(|g| ids.contains(g));
    }
    let mut work = ScanWork::default();
    let mut parts = Vec::with_capacity(selected.len());
    for g in selected {
        parts.push(scan_row_group(source, &footer.schema, &footer.row_groups[g], g, &bound, &mut work)?);
    }
    let out_schema = bound.output_schema(&footer.schema)?;
    Ok((Table::concat(&out_schema, &parts)?, work))
}
