// SPDX-License-Identifier: Apache-2.0

use std::cmp::Ordering;

use crate::format::table::{Column, ColumnData};
use crate::format::types::Scalar;

/// Min/max/null-count summary of one column chunk.
///
/// `min`/`max` cover valid, non-NaN values only. They are absent when the
/// chunk has no such value (all null, or every valid value is NaN).
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnStatistics {
    pub min: Option<Scalar>,
    pub max: Option<Scalar>,
    pub null_count: u64,
}

pub fn compute_stats(column: &Column) -> ColumnStatistics {
    let validity = column.validity();
    let null_count = column.null_count() as u64;

    fn fold<T, F>(values: &[T], validity: &[bool], skip: F, cmp: fn(&T, &T) -> Ordering) -> Option<(T, T)>
    where
        T: Clone,
        F: Fn(&T) -> bool,
    {
        let mut acc: Option<(&T, &T)> = None;
        for (v, ok) in values.iter().zip(validity) {
            if !ok || skip(v) {
                continue;
            }
            acc = Some(match acc {
                None => (v, v),
                Some((lo, hi)) => (
                    if cmp(v, lo) == Ordering::Less { v } else { lo },
                    if cmp(v, hi) == Ordering::Greater { v } else { hi },
                ),
            });
        }
        acc.map(|(lo, hi)| (lo.clone(), hi.clone()))
    }

    let bounds = match column.data() {
        ColumnData::Int64(v) => {
            fold(v, validity, |_| false, i64::cmp).map(|(a, b)| (Scalar::Int64(a), Scalar::Int64(b)))
        }
        ColumnData::Float64(v) => fold(v, validity, |x| x.is_nan(), |a, b| a.partial_cmp(b).unwrap())
            .map(|(a, b)| (Scalar::Float64(a), Scalar::Float64(b))),
        ColumnData::Bool(v) => {
            fold(v, validity, |_| false, bool::cmp).map(|(a, b)| (Scalar::Bool(a), Scalar::Bool(b)))
        }
        ColumnData::Utf8(v) => fold(v, validity, |_| false, |a, b| a.as_bytes().cmp(b.as_bytes()))
            .map(|(a, b)| (Scalar::Utf8(a), Scalar::Utf8(b))),
    };

    let (min, max) = match bounds {
        Some((lo, hi)) => (Some(lo), Some(hi)),
        None => (None, None),
    };
    ColumnStatistics { min, max, null_count }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn int64_with_null() {
        let c = Column::from_options(vec![Some(3), None, Some(-1), Some(7)], ColumnData::Int64);
        let s = compute_stats(&c);
        assert_eq!(s.min, Some(Scalar::Int64(-1)));
        assert_eq!(s.max, Some(Scalar::Int64(7)));
        assert_eq!(s.null_count, 1);
    }

    #[test]
    fn all_null_has_no_bounds() {
        let c = Column::from_options(vec![None::<i64>; 5], ColumnData::Int64);
        let s = compute_stats(&c);
        assert_eq!((s.min, s.max, s.null_count), (None, None, 5));
    }

    #[test]
    fn utf8_bytewise() {
        let c = Column::all_valid(ColumnData::Utf8(vec!["b".into(), "a".into(), "ab".into()]));
        let s = compute_stats(&c);
        assert_eq!(s.min, Some(Scalar::Utf8("a".into())));
        assert_eq!(s.max, Some(Scalar::Utf8("b".into())));
    }

    #[test]
    fn nan_is_valid_but_unbounded() {
        let c = Column::all_valid(ColumnData::Float64(vec![f64::NAN, 2.5, f64::NAN, -1.0]));
        let s = compute_stats(&c);
        assert_eq!(s.min, Some(Scalar::Float64(-1.0)));
        assert_eq!(s.max, Some(Scalar::Float64(2.5)));
        assert_eq!(s.null_count, 0);

        let only_nan = Column::all_valid(ColumnData::Float64(vec![f64::NAN]));
        let s = compute_stats(&only_nan);
        assert_eq!((s.min, s.max, s.null_count), (None, None, 0));
    }

    #[test]
    fn empty_column() {
        let s = compute_stats(&Column::all_valid(ColumnData::Bool(vec![])));
        assert_eq!((s.min, s.max, s.null_count), (None, None, 0));
    }
}
