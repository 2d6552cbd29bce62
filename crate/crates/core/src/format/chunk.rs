// SPDX-License-Identifier: Apache-2.0

//! Column chunk encodings: a validity bitmap followed by PLAIN values, or a
//! DICTIONARY page for repetitive UTF8 data.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::format::codec::{self, Cursor};
use crate::format::footer::Encoding;
use crate::format::table::{Column, ColumnData};
use crate::format::types::PhysicalType;

/// Dictionary encoding kicks in when distinct/total drops below this ratio.
pub const DICTIONARY_RATIO: f64 = 0.5;

pub fn choose_encoding(column: &Column) -> Encoding {
    let ColumnData::Utf8(values) = column.data() else {
        return Encoding::Plain;
    };
    let n = values.len();
    if n == 0 {
        return Encoding::Plain;
    }
    let mut distinct = std::collections::HashSet::new();
    for (v, ok) in values.iter().zip(column.validity()) {
        if *ok {
            distinct.insert(v.as_str());
        }
    }
    if !distinct.is_empty() && (distinct.len() as f64) < DICTIONARY_RATIO * n as f64 {
        Encoding::Dictionary
    } else {
        Encoding::Plain
    }
}

pub fn encode_chunk(column: &Column, encoding: Encoding) -> Vec<u8> {
    let mut buf = Vec::new();
    codec::put_bitmap(&mut buf, column.validity());
    match (column.data(), encoding) {
        (data, Encoding::Plain) => put_plain_values(&mut buf, data),
        (ColumnData::Utf8(values), Encoding::Dictionary) => {
            put_dictionary(&mut buf, values, column.validity())
        }
        (data, Encoding::Dictionary) => {
            panic!("dictionary encoding requested for {}", data.physical_type())
        }
    }
    buf
}

/// PLAIN value section; also the result-batch wire representation.
pub(crate) fn put_plain_values(buf: &mut Vec<u8>, data: &ColumnData) {
    match data {
        ColumnData::Int64(v) => v.iter().for_each(|x| codec::put_u64(buf, *x as u64)),
        ColumnData::Float64(v) => v.iter().for_each(|x| codec::put_u64(buf, x.to_bits())),
        ColumnData::Bool(v) => codec::put_bitmap(buf, v),
        ColumnData::Utf8(v) => {
            let mut offset = 0u32;
            codec::put_u32(buf, 0);
            for s in v {
                offset += s.len() as u32;
                codec::put_u32(buf, offset);
            }
            for s in v {
                buf.extend_from_slice(s.as_bytes());
            }
        }
    }
}

fn put_dictionary(buf: &mut Vec<u8>, values: &[String], validity: &[bool]) {
    let mut dict: Vec<&str> = Vec::new();
    let mut ids: HashMap<&str, u32> = HashMap::new();
    let indices: Vec<u32> = values
        .iter()
        .zip(validity)
        .map(|(v, ok)| {
            if !ok {
                return 0;
            }
            *ids.entry(v.as_str()).or_insert_with(|| {
                dict.push(v.as_str());
                (dict.len() - 1) as u32
            })
        })
        .collect();

    codec::put_u32(buf, dict.len() as u32);
    let mut offset = 0u32;
    codec::put_u32(buf, 0);
    for s in &dict {
        offset += s.len() as u32;
        codec::put_u32(buf, offset);
    }
    for s in &dict {
        buf.extend_from_slice(s.as_bytes());
    }
    let width = index_width(dict.len());
    codec::put_u8(buf, width as u8);
    for i in indices {
        buf.extend_from_slice(&i.to_le_bytes()[..width]);
    }
}

fn index_width(dict_len: usize) -> usize {
    match dict_len {
        0..=256 => 1,
        257..=65_536 => 2,
        _ => 4,
    }
}

pub fn decode_chunk(bytes: &[u8], ty: PhysicalType, rows: usize, encoding: Encoding) -> Result<Column> {
    let mut cur = Cursor::new(bytes, Error::CorruptFile);
    let validity = cur.bitmap(rows)?;
    let data = match (ty, encoding) {
        (ty, Encoding::Plain) => read_plain_values(&mut cur, ty, rows)?,
        (PhysicalType::Utf8, Encoding::Dictionary) => read_dictionary(&mut cur, rows, &validity)?,
        (ty, Encoding::Dictionary) => return cur.fail(format!("dictionary encoding on {ty} chunk")),
    };
    cur.finish()?;
    Column::new(data, validity)
}

pub(crate) fn read_plain_values(cur: &mut Cursor<'_>, ty: PhysicalType, rows: usize) -> Result<ColumnData> {
    Ok(match ty {
        PhysicalType::Int64 => {
            let raw = cur.take(rows.checked_mul(8).ok_or_else(|| Error::corrupt("row count overflow"))?)?;
            ColumnData::Int64(raw.chunks_exact(8).map(|c| i64::from_le_bytes(c.try_into().unwrap())).collect())
        }
        PhysicalType::Float64 => {
            let raw = cur.take(rows.checked_mul(8).ok_or_else(|| Error::corrupt("row count overflow"))?)?;
            ColumnData::Float64(
                raw.chunks_exact(8)
                    .map(|c| f64::from_bits(u64::from_le_bytes(c.try_into().unwrap())))
                    .collect(),
            )
        }
        PhysicalType::Bool => ColumnData::Bool(cur.bitmap(rows)?),
        PhysicalType::Utf8 => ColumnData::Utf8(read_strings(cur, rows)?),
    })
}

fn read_strings(cur: &mut Cursor<'_>, count: usize) -> Result<Vec<String>> {
    let raw = cur.take(
        count
            .checked_add(1)
            .and_then(|n| n.checked_mul(4))
            .ok_or_else(|| Error::corrupt("string count overflow"))?,
    )?;
    let offsets: Vec<usize> = raw
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes(c.try_into().unwrap()) as usize)
        .collect();
    if offsets[0] != 0 || offsets.windows(2).any(|w| w[0] > w[1]) {
        return cur.fail("string offsets are not monotonic from zero");
    }
    let data = cur.take(*offsets.last().unwrap())?;
    offsets
        .windows(2)
        .map(|w| match std::str::from_utf8(&data[w[0]..w[1]]) {
            Ok(s) => Ok(s.to_owned()),
            Err(_) => Err(Error::corrupt("invalid utf-8 in string data")),
        })
        .collect()
}

fn read_dictionary(cur: &mut Cursor<'_>, rows: usize, validity: &[bool]) -> Result<ColumnData> {
    let dict_len = cur.len_u32(4)?;
    let dict = read_strings(cur, dict_len)?;
    let width = cur.u8()? as usize;
    if ![1, 2, 4].contains(&width) {
        return cur.fail(format!("invalid dictionary index width {width}"));
    }
    let raw = cur.take(rows * width)?;
    let mut out = Vec::with_capacity(rows);
    for (i, chunk) in raw.chunks_exact(width).enumerate() {
        let mut le = [0u8; 4];
        le[..width].copy_from_slice(chunk);
        let idx = u32::from_le_bytes(le) as usize;
        if !validity[i] {
            out.push(String::new());
            continue;
        }
        match dict.get(idx) {
            Some(s) => out.push(s.clone()),
            None => return cur.fail(format!("dictionary index {idx} out of range ({dict_len} entries)")),
        }
    }
    Ok(ColumnData::Utf8(out))
}
