// SPDX-License-Identifier: Apache-2.0

//! Shared fixtures: random tables and predicates, and a row-at-a-time
//! reference filter that shares no code with the library's evaluator.

#![allow(dead_code)]

use std::cmp::Ordering;

use offload_core::format::{Column, ColumnData, Comparator, Field, PhysicalType, Predicate, Scalar, Schema, Table};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

const TYPES: [PhysicalType; 4] = [
    PhysicalType::Int64,
    PhysicalType::Float64,
    PhysicalType::Bool,
    PhysicalType::Utf8,
];

const WORDS: [&str; 8] = ["", "a", "ab", "b", "zz", "é", "Ω-mega", "a\u{0}b"];
const FLOATS: [f64; 9] = [0.0, -0.0, 1.5, -2.25, 1e300, f64::INFINITY, f64::NEG_INFINITY, f64::NAN, 3.0];

pub fn random_schema(rng: &mut ChaCha8Rng, max_cols: usize) -> Schema {
    let n = rng.random_range(1..=max_cols);
    Schema::new(
        (0..n)
            .map(|i| Field::new(format!("c{i}"), *TYPES.choose(rng).unwrap(), rng.random_bool(0.6)))
            .collect(),
    )
    .unwrap()
}

fn random_value(rng: &mut ChaCha8Rng, ty: PhysicalType, domain: i64) -> Scalar {
    match ty {
        PhysicalType::Int64 => Scalar::Int64(match rng.random_range(0..20) {
            0 => i64::MIN,
            1 => i64::MAX,
            _ => rng.random_range(-domain..=domain),
        }),
        PhysicalType::Float64 => Scalar::Float64(if rng.random_bool(0.15) {
            *FLOATS.choose(rng).unwrap()
        } else {
            rng.random_range(-domain..=domain) as f64 / 4.0
        }),
        PhysicalType::Bool => Scalar::Bool(rng.random()),
        PhysicalType::Utf8 => Scalar::Utf8(if rng.random_bool(0.7) {
            WORDS.choose(rng).unwrap().to_string()
        } else {
            format!("s{}", rng.random_range(0..domain.max(1)))
        }),
    }
}

fn column_from(ty: PhysicalType, values: Vec<Option<Scalar>>) -> Column {
    match ty {
        PhysicalType::Int64 => Column::from_options(
            values.into_iter().map(|v| v.map(|s| if let Scalar::Int64(x) = s { x } else { unreachable!() })).collect(),
            ColumnData::Int64,
        ),
        PhysicalType::Float64 => Column::from_options(
            values.into_iter().map(|v| v.map(|s| if let Scalar::Float64(x) = s { x } else { unreachable!() })).collect(),
            ColumnData::Float64,
        ),
        PhysicalType::Bool => Column::from_options(
            values.into_iter().map(|v| v.map(|s| if let Scalar::Bool(x) = s { x } else { unreachable!() })).collect(),
            ColumnData::Bool,
        ),
        PhysicalType::Utf8 => Column::from_options(
            values.into_iter().map(|v| v.map(|s| if let Scalar::Utf8(x) = s { x } else { unreachable!() })).collect(),
            ColumnData::Utf8,
        ),
    }
}

/// Random table over `schema`. Columns are sometimes sorted, sometimes
/// all-null, sometimes low-cardinality.
pub fn random_table_for(rng: &mut ChaCha8Rng, schema: &Schema, rows: usize) -> Table {
    let cols = schema
        .fields()
        .iter()
        .map(|f| {
            let null_rate = if !f.nullable {
                0.0
            } else {
                *[0.0, 0.1, 0.5, 1.0].choose(rng).unwrap()
            };
            let domain = *[2i64, 10, 1000, 1 << 40].choose(rng).unwrap();
            let mut vals: Vec<Option<Scalar>> = (0..rows)
                .map(|_| (!rng.random_bool(null_rate)).then(|| random_value(rng, f.physical_type, domain)))
                .collect();
            if rng.random_bool(0.2) {
                vals.sort_by(|a, b| match (a, b) {
                    (Some(Scalar::Float64(x)), Some(Scalar::Float64(y))) => x.total_cmp(y),
                    (Some(x), Some(y)) => scalar_order(x, y).unwrap(),
                    (None, Some(_)) => Ordering::Less,
                    (Some(_), None) => Ordering::Greater,
                    (None, None) => Ordering::Equal,
                });
            }
            column_from(f.physical_type, vals)
        })
        .collect();
    Table::new(schema.clone(), cols).unwrap()
}

pub fn random_table(rng: &mut ChaCha8Rng, max_cols: usize, max_rows: usize) -> Table {
    let schema = random_schema(rng, max_cols);
    let rows = rng.random_range(0..=max_rows);
    random_table_for(rng, &schema, rows)
}

/// A literal, preferably drawn from the table so comparisons hit.
fn literal_for(rng: &mut ChaCha8Rng, table: &Table, col: usize) -> Scalar {
    let ty = table.schema().field(col).physical_type;
    if table.row_count() > 0 && rng.random_bool(0.7) {
        if let Some(v) = table.column(col).value(rng.random_range(0..table.row_count())) {
            return v;
        }
    }
    if ty == PhysicalType::Float64 && rng.random_bool(0.3) {
        // Integer literals widen to FLOAT64 on bind.
        return Scalar::Int64(rng.random_range(-10..10));
    }
    random_value(rng, ty, 10)
}

pub fn random_predicate(rng: &mut ChaCha8Rng, table: &Table, depth: usize) -> Predicate {
    let ncols = table.schema().len();
    let leaf = depth == 0 || rng.random_bool(0.5);
    if leaf {
        let col = rng.random_range(0..ncols);
        let name = table.schema().field(col).name.clone();
        return match rng.random_range(0..10) {
            0 => Predicate::IsNull(name),
            1 => Predicate::IsNotNull(name),
            2 => Predicate::True,
            _ => {
                let op = Comparator::from_tag(rng.random_range(1..=6)).unwrap();
                Predicate::compare(name, op, literal_for(rng, table, col))
            }
        };
    }
    let n = rng.random_range(0..=3);
    let children = (0..n).map(|_| random_predicate(rng, table, depth - 1)).collect();
    match rng.random_range(0..3) {
        0 => Predicate::And(children),
        1 => Predicate::Or(children),
        _ => Predicate::Not(Box::new(random_predicate(rng, table, depth - 1))),
    }
}

/// Total order used only for sorting fixtures; NaN is unordered.
fn scalar_order(a: &Scalar, b: &Scalar) -> Option<Ordering> {
    match (a, b) {
        (Scalar::Int64(x), Scalar::Int64(y)) => Some(x.cmp(y)),
        (Scalar::Float64(x), Scalar::Float64(y)) => x.partial_cmp(y),
        (Scalar::Bool(x), Scalar::Bool(y)) => Some(x.cmp(y)),
        (Scalar::Utf8(x), Scalar::Utf8(y)) => Some(x.as_bytes().cmp(y.as_bytes())),
        _ => None,
    }
}

/// Raw cell access straight from column storage.
fn cell(table: &Table, col: usize, row: usize) -> Option<Scalar> {
    let c = table.column(col);
    if !c.validity()[row] {
        return None;
    }
    Some(match c.data() {
        ColumnData::Int64(v) => Scalar::Int64(v[row]),
        ColumnData::Float64(v) => Scalar::Float64(v[row]),
        ColumnData::Bool(v) => Scalar::Bool(v[row]),
        ColumnData::Utf8(v) => Scalar::Utf8(v[row].clone()),
    })
}

fn holds(op: Comparator, ord: Ordering) -> bool {
    match op {
        Comparator::Eq => ord.is_eq(),
        Comparator::Ne => ord.is_ne(),
        Comparator::Lt => ord.is_lt(),
        Comparator::Le => ord.is_le(),
        Comparator::Gt => ord.is_gt(),
        Comparator::Ge => ord.is_ge(),
    }
}

pub fn eval_row(table: &Table, pred: &Predicate, row: usize) -> bool {
    let idx = |name: &str| table.schema().fields().iter().position(|f| f.name == name).unwrap();
    match pred {
        Predicate::True => true,
        Predicate::IsNull(c) => cell(table, idx(c), row).is_none(),
        Predicate::IsNotNull(c) => cell(table, idx(c), row).is_some(),
        Predicate::Compare { column, op, literal } => {
            let Some(v) = cell(table, idx(column), row) else {
                return false;
            };
            let lit = match (&v, literal) {
                (Scalar::Float64(_), Scalar::Int64(i)) => Scalar::Float64(*i as f64),
                _ => literal.clone(),
            };
            match scalar_order(&v, &lit) {
                Some(ord) => holds(*op, ord),
                None => false,
            }
        }
        Predicate::And(ps) => ps.iter().all(|p| eval_row(table, p, row)),
        Predicate::Or(ps) => ps.iter().any(|p| eval_row(table, p, row)),
        Predicate::Not(p) => !eval_row(table, p, row),
    }
}

/// Filter then project, one row at a time.
pub fn brute_force(table: &Table, pred: &Predicate, projection: &[String]) -> Table {
    let keep: Vec<usize> = (0..table.row_count()).filter(|&r| eval_row(table, pred, r)).collect();
    let names: Vec<String> = if projection.is_empty() {
        table.schema().fields().iter().map(|f| f.name.clone()).collect()
    } else {
        projection.to_vec()
    };
    let mut fields = Vec::new();
    let mut cols = Vec::new();
    for name in &names {
        let i = table.schema().fields().iter().position(|f| &f.name == name).unwrap();
        let f = table.schema().field(i).clone();
        let vals: Vec<Option<Scalar>> = keep.iter().map(|&r| cell(table, i, r)).collect();
        cols.push(column_from(f.physical_type, vals));
        fields.push(f);
    }
    Table::new(Schema::new(fields).unwrap(), cols).unwrap()
}

/// Random non-empty subset of column names in random order; empty means all.
pub fn random_projection(rng: &mut ChaCha8Rng, schema: &Schema) -> Vec<String> {
    if rng.random_bool(0.3) {
        return Vec::new();
    }
    let mut names: Vec<String> = schema.fields().iter().map(|f| f.name.clone()).collect();
    use rand::seq::SliceRandom;
    names.shuffle(rng);
    names.truncate(rng.random_range(1..=names.len()));
    names
}

/// Smallest power-of-two stripe unit that holds every row group under both
/// layouts (a single-group split file carries its own footer).
pub fn fitting_stripe_unit(table: &Table, rows_per_group: usize) -> u64 {
    use offload_core::format::{assemble_file, encode_row_groups};
    let groups = encode_row_groups(table, rows_per_group).unwrap();
    let mut need = 64u64;
    for g in &groups {
        let (bytes, _) = assemble_file(table.schema(), std::slice::from_ref(g), None).unwrap();
        need = need.max(bytes.len() as u64).max(g.encoded_len() + 4);
    }
    need.next_power_of_two()
}

pub struct Fixture {
    pub ns: offload_core::fs::Namespace,
    pub pool: offload_core::store::Pool,
    pub striped: std::sync::Arc<offload_core::layout::DatasetDescriptor>,
    pub split: std::sync::Arc<offload_core::layout::DatasetDescriptor>,
    pub stripe_unit: u64,
}

/// Writes `table` under both layouts into a fresh pool and discovers them.
pub fn fixture(table: &Table, rows_per_group: usize, nodes: usize, seed: u64) -> Fixture {
    use offload_core::layout::*;
    let ns = offload_core::fs::Namespace::new();
    let pool = offload_core::store::Pool::create(nodes, seed).unwrap();
    let unit = fitting_stripe_unit(table, rows_per_group);
    write_striped_dataset(&ns, &pool, "t/striped.rgf", table, unit, rows_per_group).unwrap();
    write_split_dataset(&ns, &pool, "t/split", table, rows_per_group, unit).unwrap();
    let striped = std::sync::Arc::new(discover_striped(&ns, &pool, "t/striped.rgf").unwrap());
    let split = std::sync::Arc::new(discover_split(&ns, &pool, "t/split").unwrap());
    Fixture {
        ns,
        pool,
        striped,
        split,
        stripe_unit: unit,
    }
}
