// SPDX-License-Identifier: Apache-2.0

//! `scan_op` request and result-batch encodings. Layouts are in FORMAT.md.

use crate::error::{Error, Result};
use crate::format::chunk::{put_plain_values, read_plain_values};
use crate::format::codec::{self, Cursor};
use crate::format::footer::{decode_row_group_meta, encode_row_group_meta};
use crate::format::{Column, Comparator, Predicate, RowGroupMeta, ScanRequest, Schema, Table};

pub const REQUEST_VERSION: u8 = 1;
pub const RESULT_VERSION: u8 = 1;

/// Deepest predicate nesting accepted on decode.
pub const MAX_PREDICATE_DEPTH: usize = 128;

const P_TRUE: u8 = 0;
const P_COMPARE: u8 = 1;
const P_IS_NULL: u8 = 2;
const P_IS_NOT_NULL: u8 = 3;
const P_AND: u8 = 4;
const P_OR: u8 = 5;
const P_NOT: u8 = 6;

/// Everything a storage node needs to scan one fragment.
#[derive(Debug, Clone, PartialEq)]
pub struct FragmentRequest {
    pub ordinal: u64,
    pub schema: Schema,
    pub predicate: Predicate,
    pub projection: Vec<String>,
    /// Offsets are object-local.
    pub meta: RowGroupMeta,
}

impl FragmentRequest {
    pub fn scan_request(&self) -> ScanRequest {
        ScanRequest {
            predicate: self.predicate.clone(),
            projection: self.projection.clone(),
            row_group_ids: None,
        }
    }
}

fn put_predicate(buf: &mut Vec<u8>, p: &Predicate) {
    match p {
        Predicate::True => codec::put_u8(buf, P_TRUE),
        Predicate::Compare { column, op, literal } => {
            codec::put_u8(buf, P_COMPARE);
            codec::put_u8(buf, *op as u8);
            codec::put_str(buf, column);
            codec::put_tagged_scalar(buf, literal);
        }
        Predicate::IsNull(c) => {
            codec::put_u8(buf, P_IS_NULL);
            codec::put_str(buf, c);
        }
        Predicate::IsNotNull(c) => {
            codec::put_u8(buf, P_IS_NOT_NULL);
            codec::put_str(buf, c);
        }
        Predicate::And(children) | Predicate::Or(children) => {
            codec::put_u8(buf, if matches!(p, Predicate::And(_)) { P_AND } else { P_OR });
            codec::put_u32(buf, children.len() as u32);
            for c in children {
                put_predicate(buf, c);
            }
        }
        Predicate::Not(inner) => {
            codec::put_u8(buf, P_NOT);
            put_predicate(buf, inner);
        }
    }
}

fn read_predicate(cur: &mut Cursor<'_>, depth: usize) -> Result<Predicate> {
    if depth > MAX_PREDICATE_DEPTH {
        return cur.fail("predicate nesting too deep");
    }
    Ok(match cur.u8()? {
        P_TRUE => Predicate::True,
        P_COMPARE => {
            let tag = cur.u8()?;
            let Some(op) = Comparator::from_tag(tag) else {
                return cur.fail(format!("unknown comparator tag {tag}"));
            };
            let column = cur.str()?;
            let literal = cur.tagged_scalar()?;
            Predicate::Compare { column, op, literal }
        }
        P_IS_NULL => Predicate::IsNull(cur.str()?),
        P_IS_NOT_NULL => Predicate::IsNotNull(cur.str()?),
        tag @ (P_AND | P_OR) => {
            let n = cur.len_u32(1)?;
            let children = (0..n)
                .map(|_| read_predicate(cur, depth + 1))
                .collect::<Result<Vec<_>>>()?;
            if tag == P_AND {
                Predicate::And(children)
            } else {
                Predicate::Or(children)
            }
        }
        P_NOT => Predicate::Not(Box::new(read_predicate(cur, depth + 1)?)),
        other => return cur.fail(format!("unknown predicate tag {other}")),
    })
}

pub fn encode_request(req: &FragmentRequest) -> Vec<u8> {
    let mut buf = Vec::new();
    codec::put_u8(&mut buf, REQUEST_VERSION);
    codec::put_u64(&mut buf, req.ordinal);
    codec::put_schema(&mut buf, &req.schema);
    put_predicate(&mut buf, &req.predicate);
    codec::put_u32(&mut buf, req.projection.len() as u32);
    for name in &req.projection {
        codec::put_str(&mut buf, name);
    }
    encode_row_group_meta(&mut buf, &req.meta);
    buf
}

fn as_protocol(e: Error) -> Error {
    match e {
        Error::Protocol(_) => e,
        other => Error::protocol(other.to_string()),
    }
}

pub fn decode_request(bytes: &[u8]) -> Result<FragmentRequest> {
    let mut cur = Cursor::new(bytes, Error::Protocol);
    let version = cur.u8()?;
    if version != REQUEST_VERSION {
        return Err(Error::protocol(format!(
            "unsupported request version {version} (supported: {REQUEST_VERSION})"
        )));
    }
    let ordinal = cur.u64()?;
    let schema = cur.schema()?;
    let predicate = read_predicate(&mut cur, 0)?;
    let n = cur.len_u32(4)?;
    let projection = (0..n).map(|_| cur.str()).collect::<Result<Vec<_>>>()?;
    let meta = decode_row_group_meta(&mut cur, &schema).map_err(as_protocol)?;
    cur.finish()?;
    meta.validate(&schema, ordinal as usize).map_err(as_protocol)?;
    Ok(FragmentRequest {
        ordinal,
        schema,
        predicate,
        projection,
        meta,
    })
}

/// Decoded result of one fragment scan.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultBatch {
    pub ordinal: u64,
    pub table: Table,
}

const VALIDITY_ALL: u8 = 0;
const VALIDITY_BITMAP: u8 = 1;

/// Plain encoding only. Per column: a validity flag, the bitmap when any
/// value is null, then the self-delimiting plain values.
pub fn encode_result_batch(ordinal: u64, table: &Table) -> Vec<u8> {
    let mut buf = Vec::new();
    codec::put_u8(&mut buf, RESULT_VERSION);
    codec::put_u64(&mut buf, ordinal);
    codec::put_schema(&mut buf, table.schema());
    codec::put_u64(&mut buf, table.row_count() as u64);
    for col in table.columns() {
        if col.null_count() == 0 {
            codec::put_u8(&mut buf, VALIDITY_ALL);
        } else {
            codec::put_u8(&mut buf, VALIDITY_BITMAP);
            codec::put_bitmap(&mut buf, col.validity());
        }
        put_plain_values(&mut buf, col.data());
    }
    buf
}

pub fn decode_result_batch(bytes: &[u8]) -> Result<ResultBatch> {
    let mut cur = Cursor::new(bytes, Error::Protocol);
    let version = cur.u8()?;
    if version != RESULT_VERSION {
        return Err(Error::protocol(format!(
            "unsupported result version {version} (supported: {RESULT_VERSION})"
        )));
    }
    let ordinal = cur.u64()?;
    let schema = cur.schema()?;
    let rows = cur.u64()?;
    let rows = usize::try_from(rows).map_err(|_| Error::protocol("row count overflow"))?;
    // Every column spends at least one bit per row.
    if !schema.fields().is_empty() && rows / 8 > cur.remaining() {
        return cur.fail(format!("row count {rows} exceeds payload"));
    }
    let mut columns = Vec::with_capacity(schema.len());
    for field in schema.fields() {
        let validity = match cur.u8()? {
            VALIDITY_ALL => vec![true; rows],
            VALIDITY_BITMAP => {
                let v = cur.bitmap(rows)?;
                if v.iter().all(|&b| b) {
                    return cur.fail(format!("column '{}': bitmap present without nulls", field.name));
                }
                v
            }
            f => return cur.fail(format!("column '{}': unknown validity flag {f}", field.name)),
        };
        let data = read_plain_values(&mut cur, field.physical_type, rows).map_err(as_protocol)?;
        columns.push(Column::new(data, validity).map_err(as_protocol)?);
    }
    cur.finish()?;
    let table = Table::new(schema, columns).map_err(as_protocol)?;
    Ok(ResultBatch { ordinal, table })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::{chunk, ColumnData, ColumnStatistics, Encoding, Field, PhysicalType, Scalar};

    fn schema() -> Schema {
        Schema::new(vec![
            Field::new("x", PhysicalType::Int64, false),
            Field::new("s", PhysicalType::Utf8, true),
        ])
        .unwrap()
    }

    fn request() -> FragmentRequest {
        let stats = |min: Scalar, max: Scalar| ColumnStatistics {
            min: Some(min),
            max: Some(max),
            null_count: 0,
        };
        FragmentRequest {
            ordinal: 7,
            schema: schema(),
            predicate: Predicate::And(vec![
                Predicate::compare("x", Comparator::Ge, Scalar::Int64(-3)),
                Predicate::Or(vec![
                    Predicate::IsNull("s".into()),
                    Predicate::Not(Box::new(Predicate::compare("s", Comparator::Eq, Scalar::Utf8("a".into())))),
                ]),
            ]),
            projection: vec!["s".into()],
            meta: RowGroupMeta {
                byte_offset: 0,
                byte_length: 100,
                row_count: 10,
                column_stats: vec![
                    stats(Scalar::Int64(0), Scalar::Int64(9)),
                    stats(Scalar::Utf8("a".into()), Scalar::Utf8("b".into())),
                ],
                column_chunks: vec![
                    crate::format::ChunkMeta {
                        offset: 4,
                        length: 50,
                        encoding: Encoding::Plain,
                    },
                    crate::format::ChunkMeta {
                        offset: 54,
                        length: 46,
                        encoding: Encoding::Dictionary,
                    },
                ],
                data_path: Some("p.rg7.rgf".into()),
            },
        }
    }

    #[test]
    fn request_round_trip_and_determinism() {
        let bytes = encode_request(&request());
        assert_eq!(bytes, encode_request(&request()));
        assert_eq!(decode_request(&bytes).unwrap(), request());
    }

    #[test]
    fn request_version_and_truncation() {
        let mut bytes = encode_request(&request());
        for cut in [0, 1, 9, bytes.len() - 1] {
            assert!(matches!(decode_request(&bytes[..cut]), Err(Error::Protocol(_))));
        }
        bytes[0] = 2;
        assert!(matches!(decode_request(&bytes), Err(Error::Protocol(m)) if m.contains("version")));
    }

    #[test]
    fn deep_predicates_are_rejected() {
        let mut p = Predicate::True;
        for _ in 0..(MAX_PREDICATE_DEPTH + 5) {
            p = Predicate::Not(Box::new(p));
        }
        let mut req = request();
        req.predicate = p;
        assert!(decode_request(&encode_request(&req)).is_err());
    }

    fn batch_table(n: usize) -> Table {
        Table::new(
            schema(),
            vec![
                Column::all_valid(ColumnData::Int64((0..n as i64).collect())),
                Column::from_options(
                    (0..n).map(|i| (i % 5 != 0).then(|| ["yes", "no"][i % 2].to_string())).collect(),
                    ColumnData::Utf8,
                ),
            ],
        )
        .unwrap()
    }

    #[test]
    fn result_round_trip() {
        for n in [0, 1, 9, 100] {
            let t = batch_table(n);
            let b = decode_result_batch(&encode_result_batch(3, &t)).unwrap();
            assert_eq!(b.ordinal, 3);
            assert_eq!(b.table, t);
        }
    }

    #[test]
    fn result_batch_is_larger_than_dictionary_chunk() {
        let col = Column::all_valid(ColumnData::Utf8((0..10_000).map(|i| ["yes", "no"][i % 2].to_string()).collect()));
        let dict = chunk::encode_chunk(&col, Encoding::Dictionary).len();
        let t = Table::new(Schema::new(vec![Field::new("s", PhysicalType::Utf8, false)]).unwrap(), vec![col]).unwrap();
        assert!(encode_result_batch(0, &t).len() > dict);
    }

    #[test]
    fn malformed_batches_are_protocol_errors() {
        let bytes = encode_result_batch(1, &batch_table(20));
        for cut in [0, 5, bytes.len() / 2, bytes.len() - 1] {
            assert!(matches!(decode_result_batch(&bytes[..cut]), Err(Error::Protocol(_))));
        }
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(decode_result_batch(&extra).is_err());
    }

    #[test]
    fn non_canonical_and_oversized_batches_are_rejected() {
        let t = Table::new(
            Schema::new(vec![Field::new("x", PhysicalType::Int64, true)]).unwrap(),
            vec![Column::all_valid(ColumnData::Int64(vec![1, 2, 3]))],
        )
        .unwrap();
        let bytes = encode_result_batch(0, &t);
        // version, ordinal, schema, rows, then the validity flag.
        let flag_at = bytes.len() - 3 * 8 - 1;
        assert_eq!(bytes[flag_at], VALIDITY_ALL);
        let mut forged = bytes[..flag_at].to_vec();
        forged.extend_from_slice(&[VALIDITY_BITMAP, 0b111]);
        forged.extend_from_slice(&bytes[flag_at + 1..]);
        assert!(matches!(decode_result_batch(&forged), Err(Error::Protocol(m)) if m.contains("without nulls")));

        let mut huge = bytes.clone();
        let rows_at = flag_at - 8;
        huge[rows_at..flag_at].copy_from_slice(&u64::MAX.to_le_bytes());
        assert!(matches!(decode_result_batch(&huge), Err(Error::Protocol(_))));
    }
}
