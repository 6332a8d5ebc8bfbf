//! The segmented competition model: one nine-parameter regression per
//! (hour, season, day type) cell, 192 segments per zone.
//!
//! Run with `cargo run --example fit_segmented`.

use chrono::NaiveDate;
use dp_load_forecast::forecast::{
    fit_segmented_with_station, SegmentParams, Segmentation,
};
use dp_load_forecast::series::HourlySeries;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

fn main() -> dp_load_forecast::Result<()> {
    let start = NaiveDate::from_ymd_opt(2004, 1, 1).unwrap().and_hms_opt(0, 0, 0).unwrap();
    let hours = 366 * 24;
    let mut rng = ChaCha12Rng::seed_from_u64(11);

    let temps: Vec<f64> = (0..hours)
        .map(|i| {
            let daily = ((i % 24) as f64 / 24.0 * std::f64::consts::TAU).sin();
            50.0 + 20.0 * daily + rng.random::<f64>() * 5.0
        })
        .collect();
    let station = HourlySeries::new("1", start, temps)?;

    let load: Vec<f64> = station
        .values()
        .iter()
        .enumerate()
        .map(|(i, v)| {
            use chrono::Datelike;
            let weekday = station.timestamp_at(i).weekday().num_days_from_monday();
            let base = if weekday >= 5 { 420.0 } else { 520.0 };
            base + 2.5 * v.unwrap() + rng.random::<f64>() * 20.0
        })
        .collect();
    let zone = HourlySeries::new("3", start, load)?;

    let segmentation = Segmentation::default();
    let (model, diagnostics) = fit_segmented_with_station(&zone, &station, &segmentation)?;

    let regressions = model
        .segments
        .iter()
        .filter(|(_, p)| matches!(p, SegmentParams::Regression(_)))
        .count();
    println!(
        "fitted {} segments ({} full regressions) on {} training hours",
        model.segments.len(),
        regressions,
        diagnostics.rows
    );
    println!("training MAE: {:.2} kW", diagnostics.training_mae);

    // In-sample fit of the first summer Monday.
    let day = 24 * 180;
    let predicted = model.predict(zone.timestamp_at(day), 24, &station)?;
    println!();
    println!("{:>22} {:>10} {:>10}", "hour", "fitted", "actual");
    for (i, p) in predicted.iter().enumerate().step_by(6) {
        println!(
            "{:>22} {:>10.1} {:>10.1}",
            zone.timestamp_at(day + i),
            p,
            zone.values()[day + i].unwrap()
        );
    }
    Ok(())
}
