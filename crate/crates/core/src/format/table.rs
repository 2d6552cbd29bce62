// SPDX-License-Identifier: Apache-2.0

use crate::error::{Error, Result};
use crate::format::types::{PhysicalType, Scalar, Schema};

/// Value vector for one column. Null slots hold the type's default value.
#[derive(Debug, Clone)]
pub enum ColumnData {
    Int64(Vec<i64>),
    Float64(Vec<f64>),
    Bool(Vec<bool>),
    Utf8(Vec<String>),
}

impl ColumnData {
    pub fn len(&self) -> usize {
        match self {
            ColumnData::Int64(v) => v.len(),
            ColumnData::Float64(v) => v.len(),
            ColumnData::Bool(v) => v.len(),
            ColumnData::Utf8(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn physical_type(&self) -> PhysicalType {
        match self {
            ColumnData::Int64(_) => PhysicalType::Int64,
            ColumnData::Float64(_) => PhysicalType::Float64,
            ColumnData::Bool(_) => PhysicalType::Bool,
            ColumnData::Utf8(_) => PhysicalType::Utf8,
        }
    }

    pub fn empty(ty: PhysicalType) -> Self {
        Self::with_capacity(ty, 0)
    }

    pub fn with_capacity(ty: PhysicalType, cap: usize) -> Self {
        match ty {
            PhysicalType::Int64 => ColumnData::Int64(Vec::with_capacity(cap)),
            PhysicalType::Float64 => ColumnData::Float64(Vec::with_capacity(cap)),
            PhysicalType::Bool => ColumnData::Bool(Vec::with_capacity(cap)),
            PhysicalType::Utf8 => ColumnData::Utf8(Vec::with_capacity(cap)),
        }
    }

    fn scalar_at(&self, i: usize) -> Scalar {
        match self {
            ColumnData::Int64(v) => Scalar::Int64(v[i]),
            ColumnData::Float64(v) => Scalar::Float64(v[i]),
            ColumnData::Bool(v) => Scalar::Bool(v[i]),
            ColumnData::Utf8(v) => Scalar::Utf8(v[i].clone()),
        }
    }

    fn clear_slot(&mut self, i: usize) {
        match self {
            ColumnData::Int64(v) => v[i] = 0,
            ColumnData::Float64(v) => v[i] = 0.0,
            ColumnData::Bool(v) => v[i] = false,
            ColumnData::Utf8(v) => v[i].clear(),
        }
    }

    fn extend_from(&mut self, other: &ColumnData) {
        match (self, other) {
            (ColumnData::Int64(a), ColumnData::Int64(b)) => a.extend_from_slice(b),
            (ColumnData::Float64(a), ColumnData::Float64(b)) => a.extend_from_slice(b),
            (ColumnData::Bool(a), ColumnData::Bool(b)) => a.extend_from_slice(b),
            (ColumnData::Utf8(a), ColumnData::Utf8(b)) => a.extend_from_slice(b),
            _ => unreachable!("column type mismatch checked by caller"),
        }
    }

    fn filtered(&self, mask: &[bool]) -> ColumnData {
        fn pick<T: Clone>(v: &[T], mask: &[bool]) -> Vec<T> {
            v.iter()
                .zip(mask)
                .filter(|(_, keep)| **keep)
                .map(|(x, _)| x.clone())
                .collect()
        }
        match self {
            ColumnData::Int64(v) => ColumnData::Int64(pick(v, mask)),
            ColumnData::Float64(v) => ColumnData::Float64(pick(v, mask)),
            ColumnData::Bool(v) => ColumnData::Bool(pick(v, mask)),
            ColumnData::Utf8(v) => ColumnData::Utf8(pick(v, mask)),
        }
    }

    fn sliced(&self, start: usize, len: usize) -> ColumnData {
        let r = start..start + len;
        match self {
            ColumnData::Int64(v) => ColumnData::Int64(v[r].to_vec()),
            ColumnData::Float64(v) => ColumnData::Float64(v[r].to_vec()),
            ColumnData::Bool(v) => ColumnData::Bool(v[r].to_vec()),
            ColumnData::Utf8(v) => ColumnData::Utf8(v[r].to_vec()),
        }
    }
}

impl PartialEq for ColumnData {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (ColumnData::Int64(a), ColumnData::Int64(b)) => a == b,
            (ColumnData::Float64(a), ColumnData::Float64(b)) => {
                a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
            }
            (ColumnData::Bool(a), ColumnData::Bool(b)) => a == b,
            (ColumnData::Utf8(a), ColumnData::Utf8(b)) => a == b,
            _ => false,
        }
    }
}

/// Values plus a validity mask (`true` = present).
#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    data: ColumnData,
    validity: Vec<bool>,
}

impl Column {
    /// Builds a column, resetting null slots to the type default so that
    /// equal logical columns are structurally equal.
    pub fn new(mut data: ColumnData, validity: Vec<bool>) -> Result<Self> {
        if data.len() != validity.len() {
            return Err(Error::validation(format!(
                "column has {} values but {} validity entries",
                data.len(),
                validity.len()
            )));
        }
        for (i, valid) in validity.iter().enumerate() {
            if !valid {
                data.clear_slot(i);
            }
        }
        Ok(Self { data, validity })
    }

    pub fn all_valid(data: ColumnData) -> Self {
        let validity = vec![true; data.len()];
        Self { data, validity }
    }

    pub fn from_options<T, F>(values: Vec<Option<T>>, wrap: F) -> Self
    where
        T: Default,
        F: FnOnce(Vec<T>) -> ColumnData,
    {
        let validity: Vec<bool> = values.iter().map(Option::is_some).collect();
        let data = wrap(values.into_iter().map(Option::unwrap_or_default).collect());
        Self { data, validity }
    }

    pub fn data(&self) -> &ColumnData {
        &self.data
    }

    pub fn validity(&self) -> &[bool] {
        &self.validity
    }

    pub fn len(&self) -> usize {
        self.validity.len()
    }

    pub fn is_empty(&self) -> bool {
        self.validity.is_empty()
    }

    pub fn null_count(&self) -> usize {
        self.validity.iter().filter(|v| !**v).count()
    }

    pub fn is_valid(&self, i: usize) -> bool {
        self.validity[i]
    }

    /// `None` when the slot is null.
    pub fn value(&self, i: usize) -> Option<Scalar> {
        self.validity[i].then(|| self.data.scalar_at(i))
    }

    pub fn filter(&self, mask: &[bool]) -> Column {
        Column {
            data: self.data.filtered(mask),
            validity: self
                .validity
                .iter()
                .zip(mask)
                .filter_map(|(v, keep)| keep.then_some(*v))
                .collect(),
        }
    }

    pub fn slice(&self, start: usize, len: usize) -> Column {
        Column {
            data: self.data.sliced(start, len),
            validity: self.validity[start..start + len].to_vec(),
        }
    }
}

/// In-memory columnar data: the unit of scan results.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    schema: Schema,
    columns: Vec<Column>,
    row_count: usize,
}

impl Table {
    pub fn new(schema: Schema, columns: Vec<Column>) -> Result<Self> {
        if columns.len() != schema.len() {
            return Err(Error::validation(format!(
                "schema has {} columns but {} were supplied",
                schema.len(),
                columns.len()
            )));
        }
        let row_count = columns.first().map_or(0, Column::len);
        for (field, col) in schema.fields().iter().zip(&columns) {
            if col.data.physical_type() != field.physical_type {
                return Err(Error::validation(format!(
                    "column '{}' declared {} but holds {}",
                    field.name,
                    field.physical_type,
                    col.data.physical_type()
                )));
            }
            if col.len() != row_count {
                return Err(Error::validation(format!(
                    "column '{}' has {} rows, expected {row_count}",
                    field.name,
                    col.len()
                )));
            }
            if !field.nullable && col.null_count() > 0 {
                return Err(Error::validation(format!(
                    "non-nullable column '{}' contains nulls",
                    field.name
                )));
            }
        }
        Ok(Self {
            schema,
            columns,
            row_count,
        })
    }

    pub fn empty(schema: Schema) -> Self {
        let columns = schema
            .fields()
            .iter()
            .map(|f| Column::all_valid(ColumnData::empty(f.physical_type)))
            .collect();
        Self {
            schema,
            columns,
            row_count: 0,
        }
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column(&self, idx: usize) -> &Column {
        &self.columns[idx]
    }

    pub fn column_by_name(&self, name: &str) -> Option<&Column> {
        self.schema.index_of(name).map(|i| &self.columns[i])
    }

    pub fn row_count(&self) -> usize {
        self.row_count
    }

    pub fn slice(&self, start: usize, len: usize) -> Table {
        assert!(start + len <= self.row_count, "slice out of bounds");
        Table {
            schema: self.schema.clone(),
            columns: self.columns.iter().map(|c| c.slice(start, len)).collect(),
            row_count: len,
        }
    }

    pub fn filter(&self, mask: &[bool]) -> Table {
        assert_eq!(mask.len(), self.row_count, "mask length mismatch");
        let row_count = mask.iter().filter(|m| **m).count();
        Table {
            schema: self.schema.clone(),
            columns: self.columns.iter().map(|c| c.filter(mask)).collect(),
            row_count,
        }
    }

    pub fn project(&self, names: &[String]) -> Result<Table> {
        let schema = self.schema.project(names)?;
        let columns = schema
            .fields()
            .iter()
            .map(|f| self.columns[self.schema.index_of(&f.name).unwrap()].clone())
            .collect();
        Ok(Table {
            schema,
            columns,
            row_count: self.row_count,
        })
    }

    /// Concatenates tables sharing `schema`, in order.
    pub fn concat(schema: &Schema, parts: &[Table]) -> Result<Table> {
        let total: usize = parts.iter().map(Table::row_count).sum();
        let mut columns: Vec<Column> = schema
            .fields()
            .iter()
            .map(|f| Column {
                data: ColumnData::with_capacity(f.physical_type, total),
                validity: Vec::with_capacity(total),
            })
            .collect();
        for part in parts {
            if part.schema != *schema {
                return Err(Error::validation("cannot concatenate tables with different schemas"));
            }
            for (dst, src) in columns.iter_mut().zip(&part.columns) {
                dst.data.extend_from(&src.data);
                dst.validity.extend_from_slice(&src.validity);
            }
        }
        Ok(Table {
            schema: schema.clone(),
            columns,
            row_count: total,
        })
    }

    /// Approximate in-memory payload size in bytes (fixed width + string bytes).
    pub fn payload_bytes(&self) -> usize {
        self.columns
            .iter()
            .map(|c| match &c.data {
                ColumnData::Int64(v) => v.len() * 8,
                ColumnData::Float64(v) => v.len() * 8,
                ColumnData::Bool(v) => v.len(),
                ColumnData::Utf8(v) => v.iter().map(|s| s.len() + 4).sum(),
            })
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::types::Field;

    fn schema() -> Schema {
        Schema::new(vec![
            Field::new("a", PhysicalType::Int64, true),
            Field::new("s", PhysicalType::Utf8, false),
        ])
        .unwrap()
    }

    #[test]
    fn null_slots_are_canonicalised() {
        let a = Column::new(ColumnData::Int64(vec![1, 99]), vec![true, false]).unwrap();
        let b = Column::new(ColumnData::Int64(vec![1, 0]), vec![true, false]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_nulls_in_non_nullable_column() {
        let cols = vec![
            Column::all_valid(ColumnData::Int64(vec![1])),
            Column::new(ColumnData::Utf8(vec!["x".into()]), vec![false]).unwrap(),
        ];
        assert!(Table::new(schema(), cols).is_err());
    }

    #[test]
    fn rejects_ragged_columns() {
        let cols = vec![
            Column::all_valid(ColumnData::Int64(vec![1, 2])),
            Column::all_valid(ColumnData::Utf8(vec!["x".into()])),
        ];
        assert!(Table::new(schema(), cols).is_err());
    }

    #[test]
    fn concat_and_slice_are_inverse() {
        let t = Table::new(
            schema(),
            vec![
                Column::from_options(vec![Some(1), None, Some(3)], ColumnData::Int64),
                Column::all_valid(ColumnData::Utf8(vec!["a".into(), "b".into(), "c".into()])),
            ],
        )
        .unwrap();
        let parts = [t.slice(0, 1), t.slice(1, 2)];
        assert_eq!(Table::concat(t.schema(), &parts).unwrap(), t);
        assert_eq!(t.column(0).value(1), None);
        assert_eq!(t.column(0).value(2), Some(Scalar::Int64(3)));
    }
}
