// SPDX-License-Identifier: Apache-2.0

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum PhysicalType {
    Int64 = 1,
    Float64 = 2,
    Bool = 3,
    Utf8 = 4,
}

impl PhysicalType {
    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            1 => Some(PhysicalType::Int64),
            2 => Some(PhysicalType::Float64),
            3 => Some(PhysicalType::Bool),
            4 => Some(PhysicalType::Utf8),
            _ => None,
        }
    }

    pub fn tag(self) -> u8 {
        self as u8
    }
}

impl fmt::Display for PhysicalType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PhysicalType::Int64 => "INT64",
            PhysicalType::Float64 => "FLOAT64",
            PhysicalType::Bool => "BOOL",
            PhysicalType::Utf8 => "UTF8",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Field {
    pub name: String,
    pub physical_type: PhysicalType,
    pub nullable: bool,
}

impl Field {
    pub fn new(name: impl Into<String>, physical_type: PhysicalType, nullable: bool) -> Self {
        Self {
            name: name.into(),
            physical_type,
            nullable,
        }
    }
}

/// Ordered, non-empty list of uniquely named columns.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Schema {
    fields: Vec<Field>,
}

impl Schema {
    pub fn new(fields: Vec<Field>) -> Result<Self> {
        if fields.is_empty() {
            return Err(Error::validation("schema must have at least one column"));
        }
        let mut seen = HashSet::new();
        for f in &fields {
            if f.name.is_empty() {
                return Err(Error::validation("column names must be non-empty"));
            }
            if !seen.insert(f.name.as_str()) {
                return Err(Error::validation(format!("duplicate column name '{}'", f.name)));
            }
        }
        Ok(Self { fields })
    }

    pub fn fields(&self) -> &[Field] {
        &self.fields
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    pub fn field(&self, idx: usize) -> &Field {
        &self.fields[idx]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.fields.iter().position(|f| f.name == name)
    }

    /// Sub-schema in the order given by `names`. An empty list selects every column.
    pub fn project(&self, names: &[String]) -> Result<Schema> {
        if names.is_empty() {
            return Ok(self.clone());
        }
        let mut fields = Vec::with_capacity(names.len());
        for n in names {
            let idx = self
                .index_of(n)
                .ok_or_else(|| Error::validation(format!("unknown column '{n}' in projection")))?;
            fields.push(self.fields[idx].clone());
        }
        Schema::new(fields)
    }
}

/// A single typed value. Equality is structural (floats compare by bit pattern);
/// use [`Scalar::compare`] for value ordering.
#[derive(Debug, Clone)]
pub enum Scalar {
    Int64(i64),
    Float64(f64),
    Bool(bool),
    Utf8(String),
}

impl Scalar {
    pub fn physical_type(&self) -> PhysicalType {
        match self {
            Scalar::Int64(_) => PhysicalType::Int64,
            Scalar::Float64(_) => PhysicalType::Float64,
            Scalar::Bool(_) => PhysicalType::Bool,
            Scalar::Utf8(_) => PhysicalType::Utf8,
        }
    }

    /// Value ordering between scalars of the same type. `None` for mixed
    /// types or when a NaN is involved.
    pub fn compare(&self, other: &Scalar) -> Option<Ordering> {
        match (self, other) {
            (Scalar::Int64(a), Scalar::Int64(b)) => Some(a.cmp(b)),
            (Scalar::Float64(a), Scalar::Float64(b)) => a.partial_cmp(b),
            (Scalar::Bool(a), Scalar::Bool(b)) => Some(a.cmp(b)),
            (Scalar::Utf8(a), Scalar::Utf8(b)) => Some(a.as_bytes().cmp(b.as_bytes())),
            _ => None,
        }
    }

    pub fn is_nan(&self) -> bool {
        matches!(self, Scalar::Float64(v) if v.is_nan())
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Scalar::Int64(a), Scalar::Int64(b)) => a == b,
            (Scalar::Float64(a), Scalar::Float64(b)) => a.to_bits() == b.to_bits(),
            (Scalar::Bool(a), Scalar::Bool(b)) => a == b,
            (Scalar::Utf8(a), Scalar::Utf8(b)) => a == b,
            _ => false,
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Int64(v) => write!(f, "{v}"),
            Scalar::Float64(v) => write!(f, "{v}"),
            Scalar::Bool(v) => write!(f, "{v}"),
            Scalar::Utf8(v) => write!(f, "{v:?}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schema_rejects_duplicates_and_empty() {
        assert!(Schema::new(vec![]).is_err());
        assert!(Schema::new(vec![Field::new("", PhysicalType::Int64, false)]).is_err());
        let dup = vec![
            Field::new("a", PhysicalType::Int64, false),
            Field::new("a", PhysicalType::Bool, true),
        ];
        assert!(Schema::new(dup).is_err());
    }

    #[test]
    fn utf8_compare_is_bytewise() {
        let a = Scalar::Utf8("ab".into());
        let b = Scalar::Utf8("b".into());
        assert_eq!(a.compare(&b), Some(Ordering::Less));
        // 'Z' (0x5a) sorts before 'a' (0x61)
        let z = Scalar::Utf8("Z".into());
        assert_eq!(z.compare(&a), Some(Ordering::Less));
    }

    #[test]
    fn mixed_types_do_not_compare() {
        assert_eq!(Scalar::Int64(1).compare(&Scalar::Float64(1.0)), None);
        assert_eq!(Scalar::Float64(f64::NAN).compare(&Scalar::Float64(1.0)), None);
    }
}
