//! The regression benchmark on synthetic data: build the 313-column
//! calendar/temperature design, pick the best of two candidate weather
//! stations by training error, and forecast a day ahead with
//! calendar-averaged temperatures.
//!
//! Run with `cargo run --example fit_benchmark` (takes a few seconds; the
//! design matrix has 313 columns).

use chrono::NaiveDate;
use dp_load_forecast::eval::error_report;
use dp_load_forecast::forecast::{
    forecast_direct, FeatureRecipe, FitOptions, Method,
};
use dp_load_forecast::series::HourlySeries;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

fn main() -> dp_load_forecast::Result<()> {
    let start = NaiveDate::from_ymd_opt(2004, 1, 1).unwrap().and_hms_opt(0, 0, 0).unwrap();
    let days = 400;
    let hours = days * 24;
    let horizon = 24;

    let mut rng = ChaCha12Rng::seed_from_u64(7);
    let mut station = |id: &str, phase: f64| {
        let values: Vec<f64> = (0..hours)
            .map(|i| {
                let daily = ((i % 24) as f64 / 24.0 * std::f64::consts::TAU + phase).sin();
                let yearly = (i as f64 / (24.0 * 365.0) * std::f64::consts::TAU).cos();
                55.0 + 18.0 * daily - 12.0 * yearly + rng.random::<f64>() * 3.0
            })
            .collect();
        HourlySeries::new(id, start, values).unwrap()
    };
    let stations = vec![station("1", 0.0), station("2", 1.3)];

    // The load follows station 1's temperature plus weekly structure.
    let load: Vec<f64> = stations[0]
        .values()
        .iter()
        .enumerate()
        .map(|(i, v)| {
            use chrono::Datelike;
            let weekday = stations[0].timestamp_at(i).weekday().num_days_from_monday();
            let weekday_lift = if weekday < 5 { 150.0 } else { 0.0 };
            800.0 + weekday_lift + 4.0 * v.unwrap()
        })
        .collect();
    let region = HourlySeries::new("REGION", start, load)?;
    let (train, actual) = region.split_trailing(horizon)?;

    println!(
        "benchmark recipe expands to {} columns",
        FeatureRecipe::benchmark(start).column_count()
    );

    let options = FitOptions::new(Method::Benchmark);
    let forecast = forecast_direct(&train, &stations, &options, actual.start(), horizon)?;
    let report = error_report(&forecast, &actual)?;
    println!(
        "forecast for {} .. {} ({} h horizon):",
        actual.start(),
        actual.timestamp_at(horizon - 1),
        horizon
    );
    println!("  MAE  = {:.2} kW", report.mae);
    println!("  MAPE = {:.3} %", report.mape * 100.0);
    for i in [0, 8, 12, 18] {
        println!(
            "  {}  forecast {:>8.1} kW   actual {:>8.1} kW",
            actual.timestamp_at(i),
            forecast.values[i],
            actual.values()[i].unwrap()
        );
    }
    Ok(())
}
