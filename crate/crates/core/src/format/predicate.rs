// SPDX-License-Identifier: Apache-2.0

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};
use crate::format::table::{ColumnData, Table};
use crate::format::types::{PhysicalType, Scalar, Schema};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Comparator {
    Eq = 1,
    Ne = 2,
    Lt = 3,
    Le = 4,
    Gt = 5,
    Ge = 6,
}

impl Comparator {
    pub fn from_tag(tag: u8) -> Option<Self> {
        Some(match tag {
            1 => Comparator::Eq,
            2 => Comparator::Ne,
            3 => Comparator::Lt,
            4 => Comparator::Le,
            5 => Comparator::Gt,
            6 => Comparator::Ge,
            _ => return None,
        })
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Comparator::Eq => "==",
            Comparator::Ne => "!=",
            Comparator::Lt => "<",
            Comparator::Le => "<=",
            Comparator::Gt => ">",
            Comparator::Ge => ">=",
        }
    }

    /// Whether `ord` (value compared to literal) satisfies the comparator.
    pub fn accepts(self, ord: Ordering) -> bool {
        match self {
            Comparator::Eq => ord == Ordering::Equal,
            Comparator::Ne => ord != Ordering::Equal,
            Comparator::Lt => ord == Ordering::Less,
            Comparator::Le => ord != Ordering::Greater,
            Comparator::Gt => ord == Ordering::Greater,
            Comparator::Ge => ord != Ordering::Less,
        }
    }
}

/// Row filter expression.
///
/// Comparisons against null, or involving NaN on either side, are false;
/// `IsNull`/`IsNotNull` are the only leaves that observe nulls. NaN counts
/// as a non-null value.
#[derive(Debug, Clone, PartialEq)]
pub enum Predicate {
    True,
    Compare {
        column: String,
        op: Comparator,
        literal: Scalar,
    },
    IsNull(String),
    IsNotNull(String),
    And(Vec<Predicate>),
    Or(Vec<Predicate>),
    Not(Box<Predicate>),
}

impl Predicate {
    pub fn compare(column: impl Into<String>, op: Comparator, literal: Scalar) -> Self {
        Predicate::Compare {
            column: column.into(),
            op,
            literal,
        }
    }

    pub fn is_true(&self) -> bool {
        matches!(self, Predicate::True)
    }

    /// Referenced column names, deduplicated, in first-seen order.
    pub fn columns(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_columns(&mut out);
        out
    }

    fn collect_columns(&self, out: &mut Vec<String>) {
        match self {
            Predicate::True => {}
            Predicate::Compare { column, .. } | Predicate::IsNull(column) | Predicate::IsNotNull(column) => {
                if !out.contains(column) {
                    out.push(column.clone());
                }
            }
            Predicate::And(ps) | Predicate::Or(ps) => ps.iter().for_each(|p| p.collect_columns(out)),
            Predicate::Not(p) => p.collect_columns(out),
        }
    }

    /// Checks column references against `schema`, widening integer literals
    /// compared with FLOAT64 columns.
    pub fn bind(&self, schema: &Schema) -> Result<Predicate> {
        let lookup = |column: &str| {
            schema
                .index_of(column)
                .map(|i| schema.field(i).physical_type)
                .ok_or_else(|| Error::validation(format!("predicate references unknown column '{column}'")))
        };
        Ok(match self {
            Predicate::True => Predicate::True,
            Predicate::Compare { column, op, literal } => {
                let ty = lookup(column)?;
                let literal = match (ty, literal) {
                    (PhysicalType::Float64, Scalar::Int64(v)) => Scalar::Float64(*v as f64),
                    (ty, lit) if lit.physical_type() == ty => lit.clone(),
                    (ty, lit) => {
                        return Err(Error::validation(format!(
                            "column '{column}' is {ty} but literal {lit} is {}",
                            lit.physical_type()
                        )))
                    }
                };
                Predicate::Compare {
                    column: column.clone(),
                    op: *op,
                    literal,
                }
            }
            Predicate::IsNull(c) => {
                lookup(c)?;
                Predicate::IsNull(c.clone())
            }
            Predicate::IsNotNull(c) => {
                lookup(c)?;
                Predicate::IsNotNull(c.clone())
            }
            Predicate::And(ps) => Predicate::And(ps.iter().map(|p| p.bind(schema)).collect::<Result<_>>()?),
            Predicate::Or(ps) => Predicate::Or(ps.iter().map(|p| p.bind(schema)).collect::<Result<_>>()?),
            Predicate::Not(p) => Predicate::Not(Box::new(p.bind(schema)?)),
        })
    }

    /// Number of leaf comparisons, used by the cost model.
    pub fn leaf_count(&self) -> usize {
        match self {
            Predicate::True => 0,
            Predicate::Compare { .. } | Predicate::IsNull(_) | Predicate::IsNotNull(_) => 1,
            Predicate::And(ps) | Predicate::Or(ps) => ps.iter().map(Predicate::leaf_count).sum(),
            Predicate::Not(p) => p.leaf_count(),
        }
    }

    /// Value of a predicate that references no columns, such as `TRUE` or
    /// an empty `OR`; `None` when any column is referenced.
    pub fn constant_value(&self) -> Option<bool> {
        match self {
            Predicate::True => Some(true),
            Predicate::Compare { .. } | Predicate::IsNull(_) | Predicate::IsNotNull(_) => None,
            Predicate::And(ps) => ps.iter().try_fold(true, |acc, p| Some(acc & p.constant_value()?)),
            Predicate::Or(ps) => ps.iter().try_fold(false, |acc, p| Some(acc | p.constant_value()?)),
            Predicate::Not(p) => p.constant_value().map(|b| !b),
        }
    }

    /// Evaluates against every row of `table`, which must contain all
    /// referenced columns with their bound types.
    pub fn evaluate(&self, table: &Table) -> Result<Vec<bool>> {
        let n = table.row_count();
        Ok(match self {
            Predicate::True => vec![true; n],
            Predicate::Compare { column, op, literal } => {
                let col = column_of(table, column)?;
                compare_column(col.data(), col.validity(), *op, literal)?
            }
            Predicate::IsNull(column) => column_of(table, column)?.validity().iter().map(|v| !v).collect(),
            Predicate::IsNotNull(column) => column_of(table, column)?.validity().to_vec(),
            Predicate::And(ps) => {
                let mut acc = vec![true; n];
                for p in ps {
                    for (a, b) in acc.iter_mut().zip(p.evaluate(table)?) {
                        *a &= b;
                    }
                }
                acc
            }
            Predicate::Or(ps) => {
                let mut acc = vec![false; n];
                for p in ps {
                    for (a, b) in acc.iter_mut().zip(p.evaluate(table)?) {
                        *a |= b;
                    }
                }
                acc
            }
            Predicate::Not(p) => p.evaluate(table)?.into_iter().map(|b| !b).collect(),
        })
    }
}

fn column_of<'a>(table: &'a Table, name: &str) -> Result<&'a crate::format::table::Column> {
    table
        .column_by_name(name)
        .ok_or_else(|| Error::validation(format!("predicate column '{name}' not present")))
}

fn compare_column(data: &ColumnData, validity: &[bool], op: Comparator, lit: &Scalar) -> Result<Vec<bool>> {
    fn run<T>(values: &[T], validity: &[bool], pass: impl Fn(&T) -> bool) -> Vec<bool> {
        values.iter().zip(validity).map(|(v, ok)| *ok && pass(v)).collect()
    }
    Ok(match (data, lit) {
        (ColumnData::Int64(v), Scalar::Int64(l)) => run(v, validity, |x| op.accepts(x.cmp(l))),
        (ColumnData::Float64(v), Scalar::Float64(l)) => {
            run(v, validity, |x| x.partial_cmp(l).is_some_and(|o| op.accepts(o)))
        }
        (ColumnData::Bool(v), Scalar::Bool(l)) => run(v, validity, |x| op.accepts(x.cmp(l))),
        (ColumnData::Utf8(v), Scalar::Utf8(l)) => {
            run(v, validity, |x| op.accepts(x.as_bytes().cmp(l.as_bytes())))
        }
        _ => {
            return Err(Error::validation(format!(
                "literal {lit} does not match column type {}",
                data.physical_type()
            )))
        }
    })
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn join(f: &mut fmt::Formatter<'_>, ps: &[Predicate], sep: &str) -> fmt::Result {
            f.write_str("(")?;
            for (i, p) in ps.iter().enumerate() {
                if i > 0 {
                    write!(f, " {sep} ")?;
                }
                write!(f, "{p}")?;
            }
            f.write_str(")")
        }
        match self {
            Predicate::True => f.write_str("TRUE"),
            Predicate::Compare { column, op, literal } => write!(f, "{column} {} {literal}", op.symbol()),
            Predicate::IsNull(c) => write!(f, "{c} IS NULL"),
            Predicate::IsNotNull(c) => write!(f, "{c} IS NOT NULL"),
            Predicate::And(ps) => join(f, ps, "AND"),
            Predicate::Or(ps) => join(f, ps, "OR"),
            Predicate::Not(p) => write!(f, "NOT {p}"),
        }
    }
}
