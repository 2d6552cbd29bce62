// SPDX-License-Identifier: Apache-2.0

//! Conservative row-group elimination from min/max/null statistics.

use std::cmp::Ordering;

use crate::error::Result;
use crate::format::footer::{FooterMetadata, RowGroupMeta};
use crate::format::predicate::{Comparator, Predicate};
use crate::format::stats::ColumnStatistics;
use crate::format::types::{Scalar, Schema};

/// Indices of row groups that may contain a matching row, ascending.
/// A group is dropped only when its statistics prove no row can match.
pub fn prune_row_groups(footer: &FooterMetadata, predicate: &Predicate) -> Result<Vec<usize>> {
    let bound = predicate.bind(&footer.schema)?;
    Ok(footer
        .row_groups
        .iter()
        .enumerate()
        .filter(|(_, g)| may_match(&footer.schema, g, &bound))
        .map(|(i, _)| i)
        .collect())
}

/// `predicate` must be bound to `schema`.
pub fn may_match(schema: &Schema, group: &RowGroupMeta, predicate: &Predicate) -> bool {
    let stats = |column: &str| -> &ColumnStatistics {
        let idx = schema.index_of(column).expect("predicate bound to schema");
        &group.column_stats[idx]
    };
    match predicate {
        Predicate::True => true,
        Predicate::Compare { column, op, literal } => compare_may_match(stats(column), *op, literal),
        Predicate::IsNull(c) => stats(c).null_count > 0,
        Predicate::IsNotNull(c) => group.row_count > stats(c).null_count,
        Predicate::And(ps) => ps.iter().all(|p| may_match(schema, group, p)),
        Predicate::Or(ps) => ps.iter().any(|p| may_match(schema, group, p)),
        // No exact complement exists for min/max ranges.
        Predicate::Not(_) => true,
    }
}

fn compare_may_match(stats: &ColumnStatistics, op: Comparator, lit: &Scalar) -> bool {
    let (Some(min), Some(max)) = (&stats.min, &stats.max) else {
        // Every value is null or NaN, so no comparison can hold.
        return false;
    };
    let (Some(min_vs), Some(max_vs)) = (min.compare(lit), max.compare(lit)) else {
        // NaN literal: never matches.
        return false;
    };
    use Ordering::*;
    match op {
        Comparator::Eq => min_vs != Greater && max_vs != Less,
        Comparator::Lt => min_vs == Less,
        Comparator::Le => min_vs != Greater,
        Comparator::Gt => max_vs == Greater,
        Comparator::Ge => max_vs != Less,
        Comparator::Ne => !(min_vs == Equal && max_vs == Equal && stats.null_count == 0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::format::footer::{ChunkMeta, Encoding};
    use crate::format::types::{Field, PhysicalType};

    fn footer(ranges: &[(i64, i64, u64)]) -> FooterMetadata {
        let schema = Schema::new(vec![Field::new("x", PhysicalType::Int64, true)]).unwrap();
        let groups = ranges
            .iter()
            .enumerate()
            .map(|(i, (lo, hi, nulls))| RowGroupMeta {
                byte_offset: 4 + i as u64 * 10,
                byte_length: 10,
                row_count: 10,
                column_stats: vec![ColumnStatistics {
                    min: Some(Scalar::Int64(*lo)),
                    max: Some(Scalar::Int64(*hi)),
                    null_count: *nulls,
                }],
                column_chunks: vec![ChunkMeta {
                    offset: 4 + i as u64 * 10,
                    length: 10,
                    encoding: Encoding::Plain,
                }],
                data_path: None,
            })
            .collect();
        FooterMetadata::new(schema, groups)
    }

    fn x(op: Comparator, v: i64) -> Predicate {
        Predicate::compare("x", op, Scalar::Int64(v))
    }

    #[test]
    fn true_keeps_everything() {
        let f = footer(&[(0, 1, 0); 5]);
        assert_eq!(prune_row_groups(&f, &Predicate::True).unwrap(), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn range_pruning() {
        let f = footer(&[(0, 9, 0), (10, 19, 0)]);
        assert_eq!(prune_row_groups(&f, &x(Comparator::Ge, 12)).unwrap(), vec![1]);
        assert_eq!(prune_row_groups(&f, &x(Comparator::Lt, 10)).unwrap(), vec![0]);
        assert_eq!(prune_row_groups(&f, &x(Comparator::Le, 10)).unwrap(), vec![0, 1]);
        assert_eq!(prune_row_groups(&f, &x(Comparator::Gt, 19)).unwrap(), Vec::<usize>::new());
        // interior value cannot be excluded
        assert_eq!(prune_row_groups(&f, &x(Comparator::Eq, 5)).unwrap(), vec![0]);
    }

    #[test]
    fn ne_and_null_rules() {
        let f = footer(&[(3, 3, 0), (3, 3, 2), (3, 4, 0)]);
        assert_eq!(prune_row_groups(&f, &x(Comparator::Ne, 3)).unwrap(), vec![1, 2]);
        assert_eq!(prune_row_groups(&f, &Predicate::IsNull("x".into())).unwrap(), vec![1]);
        assert_eq!(prune_row_groups(&f, &Predicate::IsNotNull("x".into())).unwrap(), vec![0, 1, 2]);
    }

    #[test]
    fn boolean_combinators() {
        let f = footer(&[(0, 9, 0), (10, 19, 0), (20, 29, 0)]);
        let and = Predicate::And(vec![x(Comparator::Ge, 5), x(Comparator::Lt, 12)]);
        assert_eq!(prune_row_groups(&f, &and).unwrap(), vec![0, 1]);
        let or = Predicate::Or(vec![x(Comparator::Lt, 0), x(Comparator::Gt, 25)]);
        assert_eq!(prune_row_groups(&f, &or).unwrap(), vec![2]);
        let not = Predicate::Not(Box::new(x(Comparator::Gt, 100)));
        assert_eq!(prune_row_groups(&f, &not).unwrap(), vec![0, 1, 2]);
    }

    #[test]
    fn unknown_column_is_a_validation_error() {
        let f = footer(&[(0, 1, 0)]);
        let p = Predicate::IsNull("nope".into());
        assert!(matches!(prune_row_groups(&f, &p), Err(Error::Validation(_))));
    }
}
