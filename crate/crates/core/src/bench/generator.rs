// SPDX-License-Identifier: Apache-2.0

//! Synthetic taxi-trip table.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::format::{Column, ColumnData, Field, PhysicalType, Schema, Table};

/// Column used by selectivity predicates; uniform on `[0, 1)`.
pub const DRIVER_COLUMN: &str = "driver";

const VENDORS: [&str; 2] = ["Creative Mobile Technologies", "VeriFone Inc."];
const RATE_CODES: [&str; 6] = [
    "Standard rate",
    "JFK",
    "Newark",
    "Nassau or Westchester",
    "Negotiated fare",
    "Group ride",
];
const FLAGS: [&str; 2] = ["N", "Y"];
const PAYMENTS: [&str; 4] = ["Credit card", "Cash", "No charge", "Dispute"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GeneratorSpec {
    pub row_count: usize,
    pub seed: u64,
}

pub fn taxi_schema() -> Schema {
    use PhysicalType::*;
    Schema::new(vec![
        Field::new("vendor", Utf8, false),
        Field::new("pickup_ts", Int64, false),
        Field::new("dropoff_ts", Int64, false),
        Field::new("passenger_count", Int64, true),
        Field::new("trip_distance", Float64, false),
        Field::new("rate_code", Utf8, false),
        Field::new("store_and_fwd_flag", Utf8, false),
        Field::new("pickup_location", Int64, false),
        Field::new("dropoff_location", Int64, false),
        Field::new("payment_type", Utf8, false),
        Field::new("fare_amount", Float64, false),
        Field::new("extra", Float64, false),
        Field::new("airport_trip", Bool, false),
        Field::new("tip_amount", Float64, true),
        Field::new("tolls_amount", Float64, false),
        Field::new("total_amount", Float64, false),
        Field::new(DRIVER_COLUMN, Float64, false),
    ])
    .expect("static schema is valid")
}

fn pick<T: Copy>(rng: &mut ChaCha8Rng, weights: &[u32], values: &[T]) -> T {
    let total: u32 = weights.iter().sum();
    let mut x = rng.random_range(0..total);
    for (w, v) in weights.iter().zip(values) {
        if x < *w {
            return *v;
        }
        x -= w;
    }
    values[values.len() - 1]
}

fn cents(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

/// Deterministic per seed.
pub fn generate(spec: &GeneratorSpec) -> Table {
    let n = spec.row_count;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut vendor = Vec::with_capacity(n);
    let mut pickup = Vec::with_capacity(n);
    let mut dropoff = Vec::with_capacity(n);
    let mut passengers = Vec::with_capacity(n);
    let mut distance = Vec::with_capacity(n);
    let mut rate = Vec::with_capacity(n);
    let mut flag = Vec::with_capacity(n);
    let mut pu = Vec::with_capacity(n);
    let mut dol = Vec::with_capacity(n);
    let mut payment = Vec::with_capacity(n);
    let mut fare = Vec::with_capacity(n);
    let mut extra = Vec::with_capacity(n);
    let mut airport = Vec::with_capacity(n);
    let mut tip = Vec::with_capacity(n);
    let mut tolls = Vec::with_capacity(n);
    let mut total = Vec::with_capacity(n);
    let mut driver = Vec::with_capacity(n);

    // 2019-01-01T00:00:00Z
    let mut clock: i64 = 1_546_300_800;
    for _ in 0..n {
        clock += rng.random_range(0..4);
        let dist = cents(-f64::ln(1.0 - rng.random::<f64>()) * 3.0);
        let duration = (dist * rng.random_range(120.0..300.0)) as i64 + 60;
        let is_airport = rng.random_bool(0.05);
        let f = cents(2.5 + dist * 2.5);
        let e = [0.0, 0.5, 1.0][rng.random_range(0..3)];
        let pay = pick(&mut rng, &[70, 27, 2, 1], &PAYMENTS);
        let t = (pay == "Credit card").then(|| cents(f * rng.random_range(0.0..0.3)));
        let tl = if is_airport { 6.12 } else { 0.0 };

        vendor.push(pick(&mut rng, &[45, 55], &VENDORS).to_string());
        pickup.push(clock);
        dropoff.push(clock + duration);
        passengers.push((!rng.random_bool(0.02)).then(|| pick(&mut rng, &[70, 15, 5, 4, 4, 2], &[1, 2, 3, 4, 5, 6])));
        distance.push(dist);
        rate.push(pick(&mut rng, &[90, 4, 2, 1, 2, 1], &RATE_CODES).to_string());
        flag.push(pick(&mut rng, &[99, 1], &FLAGS).to_string());
        pu.push(rng.random_range(1..=265));
        dol.push(rng.random_range(1..=265));
        payment.push(pay.to_string());
        fare.push(f);
        extra.push(e);
        airport.push(is_airport);
        tip.push(t);
        tolls.push(tl);
        total.push(cents(f + e + 0.5 + t.unwrap_or(0.0) + tl));
        driver.push(rng.random::<f64>());
    }

    let cols = vec![
        Column::all_valid(ColumnData::Utf8(vendor)),
        Column::all_valid(ColumnData::Int64(pickup)),
        Column::all_valid(ColumnData::Int64(dropoff)),
        Column::from_options(passengers, ColumnData::Int64),
        Column::all_valid(ColumnData::Float64(distance)),
        Column::all_valid(ColumnData::Utf8(rate)),
        Column::all_valid(ColumnData::Utf8(flag)),
        Column::all_valid(ColumnData::Int64(pu)),
        Column::all_valid(ColumnData::Int64(dol)),
        Column::all_valid(ColumnData::Utf8(payment)),
        Column::all_valid(ColumnData::Float64(fare)),
        Column::all_valid(ColumnData::Float64(extra)),
        Column::all_valid(ColumnData::Bool(airport)),
        Column::from_options(tip, ColumnData::Float64),
        Column::all_valid(ColumnData::Float64(tolls)),
        Column::all_valid(ColumnData::Float64(total)),
        Column::all_valid(ColumnData::Float64(driver)),
    ];
    Table::new(taxi_schema(), cols).expect("generated columns match the schema")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_seventeen_columns() {
        let spec = GeneratorSpec { row_count: 1000, seed: 3 };
        let a = generate(&spec);
        assert_eq!(a, generate(&spec));
        assert_eq!(a.schema().len(), 17);
        assert_ne!(a, generate(&GeneratorSpec { seed: 4, ..spec }));
        assert_eq!(generate(&GeneratorSpec { row_count: 0, seed: 1 }).row_count(), 0);
    }
}
