// SPDX-License-Identifier: Apache-2.0

use crate::error::{Error, Result};
use crate::format::codec::{self, Cursor};
use crate::format::stats::ColumnStatistics;
use crate::format::types::{Schema, Scalar};

pub const FORMAT_VERSION: u32 = 1;

const TAG_VERSION: u8 = 0x01;
const TAG_SCHEMA: u8 = 0x02;
const TAG_TOTAL_ROWS: u8 = 0x03;
const TAG_ROW_GROUP: u8 = 0x04;

const STAT_HAS_MIN: u8 = 0b01;
const STAT_HAS_MAX: u8 = 0b10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Encoding {
    Plain = 0,
    Dictionary = 1,
}

impl Encoding {
    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(Encoding::Plain),
            1 => Some(Encoding::Dictionary),
            _ => None,
        }
    }
}

/// Location of one encoded column chunk.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChunkMeta {
    pub offset: u64,
    pub length: u64,
    pub encoding: Encoding,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RowGroupMeta {
    pub byte_offset: u64,
    pub byte_length: u64,
    pub row_count: u64,
    pub column_stats: Vec<ColumnStatistics>,
    pub column_chunks: Vec<ChunkMeta>,
    /// Standalone data file holding this group (split-layout index files only).
    pub data_path: Option<String>,
}

impl RowGroupMeta {
    pub fn end(&self) -> u64 {
        self.byte_offset + self.byte_length
    }

    /// Same group with every offset shifted down by `base`.
    pub fn rebased(&self, base: u64) -> RowGroupMeta {
        let mut out = self.clone();
        out.byte_offset -= base;
        for c in &mut out.column_chunks {
            c.offset -= base;
        }
        out
    }

    pub(crate) fn validate(&self, schema: &Schema, index: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::metadata(format!("row group {index}: {msg}")));
        if self.column_stats.len() != schema.len() || self.column_chunks.len() != schema.len() {
            return bad(format!(
                "expected {} column entries, found {} stats / {} chunks",
                schema.len(),
                self.column_stats.len(),
                self.column_chunks.len()
            ));
        }
        let end = self
            .byte_offset
            .checked_add(self.byte_length)
            .ok_or_else(|| Error::metadata(format!("row group {index}: byte range overflows")))?;
        for (c, (field, (stats, chunk))) in schema
            .fields()
            .iter()
            .zip(self.column_stats.iter().zip(&self.column_chunks))
            .enumerate()
        {
            let chunk_end = chunk.offset.checked_add(chunk.length);
            if chunk.offset < self.byte_offset || chunk_end.is_none_or(|e| e > end) {
                return bad(format!("column {c} chunk lies outside the row group"));
            }
            if chunk.encoding == Encoding::Dictionary && field.physical_type != crate::format::PhysicalType::Utf8 {
                return bad(format!("column {c} uses dictionary encoding on {}", field.physical_type));
            }
            if stats.null_count > self.row_count {
                return bad(format!("column {c} null_count exceeds row count"));
            }
            if !field.nullable && stats.null_count > 0 {
                return bad(format!("non-nullable column {c} reports nulls"));
            }
            match (&stats.min, &stats.max) {
                (Some(lo), Some(hi)) => {
                    for v in [lo, hi] {
                        if v.physical_type() != field.physical_type || v.is_nan() {
                            return bad(format!("column {c} has an invalid min/max value"));
                        }
                    }
                    if lo.compare(hi) == Some(std::cmp::Ordering::Greater) {
                        return bad(format!("column {c} min exceeds max"));
                    }
                }
                (None, None) => {}
                _ => return bad(format!("column {c} has only one of min/max")),
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FooterMetadata {
    pub format_version: u32,
    pub schema: Schema,
    pub row_groups: Vec<RowGroupMeta>,
    pub total_rows: u64,
}

impl FooterMetadata {
    pub fn new(schema: Schema, row_groups: Vec<RowGroupMeta>) -> Self {
        let total_rows = row_groups.iter().map(|g| g.row_count).sum();
        Self {
            format_version: FORMAT_VERSION,
            schema,
            row_groups,
            total_rows,
        }
    }

    /// Structural invariants: row totals, group ordering, chunk containment
    /// and statistics consistency.
    pub fn validate(&self) -> Result<()> {
        let sum: u64 = self.row_groups.iter().map(|g| g.row_count).sum();
        if sum != self.total_rows {
            return Err(Error::metadata(format!(
                "total_rows {} does not match row group sum {sum}",
                self.total_rows
            )));
        }
        let mut prev_end = 0u64;
        for (i, g) in self.row_groups.iter().enumerate() {
            g.validate(&self.schema, i)?;
            // Index files carry per-file offsets, so ordering only applies
            // to groups living in this same file.
            if g.data_path.is_none() {
                if i > 0 && g.byte_offset < prev_end {
                    return Err(Error::metadata(format!("row group {i} overlaps its predecessor")));
                }
                prev_end = g.end();
            }
        }
        Ok(())
    }
}

fn put_field(buf: &mut Vec<u8>, tag: u8, payload: &[u8]) {
    codec::put_u8(buf, tag);
    codec::put_u32(buf, payload.len() as u32);
    buf.extend_from_slice(payload);
}

fn put_row_group(buf: &mut Vec<u8>, g: &RowGroupMeta) {
    codec::put_u64(buf, g.byte_offset);
    codec::put_u64(buf, g.byte_length);
    codec::put_u64(buf, g.row_count);
    for (chunk, stats) in g.column_chunks.iter().zip(&g.column_stats) {
        codec::put_u64(buf, chunk.offset);
        codec::put_u64(buf, chunk.length);
        codec::put_u8(buf, chunk.encoding as u8);
        codec::put_u64(buf, stats.null_count);
        let flags = (stats.min.is_some() as u8 * STAT_HAS_MIN) | (stats.max.is_some() as u8 * STAT_HAS_MAX);
        codec::put_u8(buf, flags);
        for v in [&stats.min, &stats.max].into_iter().flatten() {
            codec::put_scalar(buf, v);
        }
    }
    match &g.data_path {
        Some(p) => {
            codec::put_u8(buf, 1);
            codec::put_str(buf, p);
        }
        None => codec::put_u8(buf, 0),
    }
}

pub(crate) fn encode_row_group_meta(buf: &mut Vec<u8>, g: &RowGroupMeta) {
    put_row_group(buf, g)
}

/// Deterministic footer encoding; see FORMAT.md.
pub fn encode_footer(footer: &FooterMetadata) -> Vec<u8> {
    let mut buf = Vec::new();
    let mut payload = Vec::new();

    codec::put_u32(&mut payload, footer.format_version);
    put_field(&mut buf, TAG_VERSION, &payload);

    payload.clear();
    codec::put_schema(&mut payload, &footer.schema);
    put_field(&mut buf, TAG_SCHEMA, &payload);

    payload.clear();
    codec::put_u64(&mut payload, footer.total_rows);
    put_field(&mut buf, TAG_TOTAL_ROWS, &payload);

    for g in &footer.row_groups {
        payload.clear();
        put_row_group(&mut payload, g);
        put_field(&mut buf, TAG_ROW_GROUP, &payload);
    }
    buf
}

pub(crate) fn decode_row_group_meta(cur: &mut Cursor<'_>, schema: &Schema) -> Result<RowGroupMeta> {
    let byte_offset = cur.u64()?;
    let byte_length = cur.u64()?;
    let row_count = cur.u64()?;
    let mut column_chunks = Vec::with_capacity(schema.len());
    let mut column_stats = Vec::with_capacity(schema.len());
    for field in schema.fields() {
        let offset = cur.u64()?;
        let length = cur.u64()?;
        let tag = cur.u8()?;
        let Some(encoding) = Encoding::from_tag(tag) else {
            return cur.fail(format!("unknown encoding tag {tag}"));
        };
        column_chunks.push(ChunkMeta { offset, length, encoding });
        let null_count = cur.u64()?;
        let flags = cur.u8()?;
        if flags & !(STAT_HAS_MIN | STAT_HAS_MAX) != 0 {
            return cur.fail(format!("unknown statistics flags {flags:#x}"));
        }
        let mut read = |bit: u8| -> Result<Option<Scalar>> {
            if flags & bit != 0 {
                cur.scalar(field.physical_type).map(Some)
            } else {
                Ok(None)
            }
        };
        let min = read(STAT_HAS_MIN)?;
        let max = read(STAT_HAS_MAX)?;
        column_stats.push(ColumnStatistics { min, max, null_count });
    }
    let data_path = if cur.bool()? { Some(cur.str()?) } else { None };
    Ok(RowGroupMeta {
        byte_offset,
        byte_length,
        row_count,
        column_stats,
        column_chunks,
        data_path,
    })
}

pub fn decode_footer(bytes: &[u8]) -> Result<FooterMetadata> {
    let mut cur = Cursor::new(bytes, Error::CorruptMetadata);

    let next_field = |cur: &mut Cursor<'_>, expect: Option<u8>| -> Result<Option<(u8, Vec<u8>)>> {
        if cur.is_empty() {
            return Ok(None);
        }
        let tag = cur.u8()?;
        if let Some(want) = expect {
            if tag != want {
                return cur.fail(format!("expected field tag {want:#04x}, found {tag:#04x}"));
            }
        }
        let len = cur.u32()? as usize;
        Ok(Some((tag, cur.take(len)?.to_vec())))
    };

    let missing = || Error::metadata("footer ends before required fields");

    let (_, payload) = next_field(&mut cur, Some(TAG_VERSION))?.ok_or_else(missing)?;
    let mut p = Cursor::new(&payload, Error::CorruptMetadata);
    let format_version = p.u32()?;
    p.finish()?;
    if format_version != FORMAT_VERSION {
        return Err(Error::UnsupportedVersion {
            found: format_version,
            supported: FORMAT_VERSION,
        });
    }

    let (_, payload) = next_field(&mut cur, Some(TAG_SCHEMA))?.ok_or_else(missing)?;
    let mut p = Cursor::new(&payload, Error::CorruptMetadata);
    let schema = p.schema()?;
    p.finish()?;

    let (_, payload) = next_field(&mut cur, Some(TAG_TOTAL_ROWS))?.ok_or_else(missing)?;
    let mut p = Cursor::new(&payload, Error::CorruptMetadata);
    let total_rows = p.u64()?;
    p.finish()?;

    let mut row_groups = Vec::new();
    while let Some((_, payload)) = next_field(&mut cur, Some(TAG_ROW_GROUP))? {
        let mut p = Cursor::new(&payload, Error::CorruptMetadata);
        row_groups.push(decode_row_group_meta(&mut p, &schema)?);
        p.finish()?;
    }

    let footer = FooterMetadata {
        format_version,
        schema,
        row_groups,
        total_rows,
    };
    footer.validate()?;
    Ok(footer)
}
