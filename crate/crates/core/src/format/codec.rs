// SPDX-License-Identifier: Apache-2.0

//! Little-endian primitives shared by the footer, chunk and wire encodings.

use crate::error::{Error, Result};
use crate::format::types::{Field, PhysicalType, Scalar, Schema};

pub(crate) fn put_u8(buf: &mut Vec<u8>, v: u8) {
    buf.push(v);
}

pub(crate) fn put_u32(buf: &mut Vec<u8>, v: u32) {
    buf.extend_from_slice(&v.to_le_bytes());
}

pub(crate) fn put_u64(buf: &mut Vec<u8>, v: u64) {
    buf.extend_from_slice(&v.to_le_bytes());
}

pub(crate) fn put_str(buf: &mut Vec<u8>, s: &str) {
    put_u32(buf, s.len() as u32);
    buf.extend_from_slice(s.as_bytes());
}

/// Bit-packed, LSB-first.
pub(crate) fn put_bitmap(buf: &mut Vec<u8>, bits: &[bool]) {
    let start = buf.len();
    buf.resize(start + bits.len().div_ceil(8), 0);
    for (i, b) in bits.iter().enumerate() {
        if *b {
            buf[start + i / 8] |= 1 << (i % 8);
        }
    }
}

pub(crate) fn bitmap_len(n: usize) -> usize {
    n.div_ceil(8)
}

/// Type tag followed by the value payload.
pub(crate) fn put_tagged_scalar(buf: &mut Vec<u8>, v: &Scalar) {
    put_u8(buf, v.physical_type().tag());
    put_scalar(buf, v);
}

/// Value payload only; the type is implied by context.
pub(crate) fn put_scalar(buf: &mut Vec<u8>, v: &Scalar) {
    match v {
        Scalar::Int64(x) => put_u64(buf, *x as u64),
        Scalar::Float64(x) => put_u64(buf, x.to_bits()),
        Scalar::Bool(x) => put_u8(buf, *x as u8),
        Scalar::Utf8(s) => put_str(buf, s),
    }
}

pub(crate) fn put_schema(buf: &mut Vec<u8>, schema: &Schema) {
    put_u32(buf, schema.len() as u32);
    for f in schema.fields() {
        put_str(buf, &f.name);
        put_u8(buf, f.physical_type.tag());
        put_u8(buf, f.nullable as u8);
    }
}

/// Bounds-checked cursor. Every failure is reported through `err`, so the
/// same cursor serves metadata, chunk and wire decoding.
pub(crate) struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
    err: fn(String) -> Error,
}

impl<'a> Cursor<'a> {
    pub(crate) fn new(buf: &'a [u8], err: fn(String) -> Error) -> Self {
        Self { buf, pos: 0, err }
    }

    pub(crate) fn fail<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err((self.err)(msg.into()))
    }

    pub(crate) fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }

    pub(crate) fn is_empty(&self) -> bool {
        self.remaining() == 0
    }

    pub(crate) fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if n > self.remaining() {
            return self.fail(format!(
                "truncated: need {n} bytes at offset {}, {} left",
                self.pos,
                self.remaining()
            ));
        }
        let out = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    pub(crate) fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    pub(crate) fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub(crate) fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub(crate) fn len_u32(&mut self, per_item: usize) -> Result<usize> {
        let n = self.u32()? as u64;
        self.check_count(n, per_item)
    }

    fn check_count(&self, n: u64, per_item: usize) -> Result<usize> {
        if per_item > 0 && n > (self.remaining() / per_item) as u64 {
            return self.fail(format!("count {n} exceeds remaining input"));
        }
        usize::try_from(n).or_else(|_| self.fail(format!("count {n} too large")))
    }

    pub(crate) fn bool(&mut self) -> Result<bool> {
        match self.u8()? {
            0 => Ok(false),
            1 => Ok(true),
            b => self.fail(format!("invalid boolean byte {b}")),
        }
    }

    pub(crate) fn str(&mut self) -> Result<String> {
        let n = self.u32()? as usize;
        let bytes = self.take(n)?;
        match std::str::from_utf8(bytes) {
            Ok(s) => Ok(s.to_owned()),
            Err(_) => self.fail("invalid utf-8 string"),
        }
    }

    pub(crate) fn bitmap(&mut self, n: usize) -> Result<Vec<bool>> {
        let bytes = self.take(bitmap_len(n))?;
        let bits: Vec<bool> = (0..n).map(|i| bytes[i / 8] & (1 << (i % 8)) != 0).collect();
        // Trailing bits past `n` must be zero so encodings stay canonical.
        if !n.is_multiple_of(8) && bytes[n / 8] >> (n % 8) != 0 {
            return self.fail("non-zero padding bits in bitmap");
        }
        Ok(bits)
    }

    pub(crate) fn physical_type(&mut self) -> Result<PhysicalType> {
        let tag = self.u8()?;
        match PhysicalType::from_tag(tag) {
            Some(t) => Ok(t),
            None => self.fail(format!("unknown physical type tag {tag}")),
        }
    }

    pub(crate) fn scalar(&mut self, ty: PhysicalType) -> Result<Scalar> {
        Ok(match ty {
            PhysicalType::Int64 => Scalar::Int64(self.u64()? as i64),
            PhysicalType::Float64 => Scalar::Float64(f64::from_bits(self.u64()?)),
            PhysicalType::Bool => Scalar::Bool(self.bool()?),
            PhysicalType::Utf8 => Scalar::Utf8(self.str()?),
        })
    }

    pub(crate) fn tagged_scalar(&mut self) -> Result<Scalar> {
        let ty = self.physical_type()?;
        self.scalar(ty)
    }

    pub(crate) fn schema(&mut self) -> Result<Schema> {
        let n = self.len_u32(6)?;
        let mut fields = Vec::with_capacity(n);
        for _ in 0..n {
            let name = self.str()?;
            let ty = self.physical_type()?;
            let nullable = self.bool()?;
            fields.push(Field::new(name, ty, nullable));
        }
        Schema::new(fields).or_else(|e| self.fail(e.to_string()))
    }

    pub(crate) fn finish(&self) -> Result<()> {
        if !self.is_empty() {
            return self.fail(format!("{} trailing bytes", self.remaining()));
        }
        Ok(())
    }
}
