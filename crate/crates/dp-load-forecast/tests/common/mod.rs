//! Synthetic GEFCom-shaped fixtures shared by the integration suites.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use chrono::{Duration, NaiveDate, NaiveDateTime};
use dp_load_forecast::series::HourlySeries;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

pub fn t0() -> NaiveDateTime {
    NaiveDate::from_ymd_opt(2004, 1, 1).unwrap().and_hms_opt(0, 0, 0).unwrap()
}

/// A station temperature series with daily and yearly structure.
pub fn synthetic_station(id: &str, hours: usize, seed: u64) -> HourlySeries {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let values: Vec<f64> = (0..hours)
        .map(|i| {
            let daily = ((i % 24) as f64 / 24.0 * std::f64::consts::TAU).sin();
            let yearly = ((i as f64) / (24.0 * 365.0) * std::f64::consts::TAU).cos();
            55.0 + 18.0 * daily - 12.0 * yearly + rng.random::<f64>() * 4.0
        })
        .collect();
    HourlySeries::new(id, t0(), values).unwrap()
}

/// Zone loads driven by temperature plus calendar structure; signal scale
/// is O(100) kW.
pub fn synthetic_zone(id: &str, station: &HourlySeries, offset: f64, slope: f64) -> HourlySeries {
    use chrono::Datelike;
    let values: Vec<f64> = station
        .values()
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let weekday = station.timestamp_at(i).weekday().num_days_from_monday();
            let weekday_lift = if weekday < 5 { 20.0 } else { 0.0 };
            offset + weekday_lift + slope * v.unwrap()
        })
        .collect();
    HourlySeries::new(id, station.start(), values).unwrap()
}

/// Renders series into the wide on-disk layout.
pub fn to_wide_csv(series: &[HourlySeries], entity_header: &str) -> String {
    let mut out = String::from(entity_header);
    out.push_str(",year,month,day");
    for h in 1..=24 {
        let _ = write!(out, ",h{h}");
    }
    out.push('\n');
    for s in series {
        assert_eq!(s.len() % 24, 0, "fixture series must span whole days");
        for (d, chunk) in s.values().chunks(24).enumerate() {
            let date = (s.start() + Duration::days(d as i64)).date();
            let _ = write!(
                out,
                "{},{},{},{}",
                s.entity_id(),
                date.format("%Y"),
                date.format("%-m"),
                date.format("%-d")
            );
            for v in chunk {
                match v {
                    Some(x) => {
                        let _ = write!(out, ",{x}");
                    }
                    None => out.push(','),
                }
            }
            out.push('\n');
        }
    }
    out
}

/// Writes a 3-zone, 1-station fixture spanning `days` days and returns the
/// (loads, temperatures) paths.
pub fn write_fixture(dir: &Path, days: usize, seed: u64) -> (PathBuf, PathBuf) {
    let hours = days * 24;
    let station = synthetic_station("1", hours, seed);
    let zones: Vec<HourlySeries> = (1..=3)
        .map(|z| synthetic_zone(&z.to_string(), &station, 80.0 + 15.0 * z as f64, 1.5))
        .collect();
    let loads_path = dir.join("loads.csv");
    let temps_path = dir.join("temps.csv");
    std::fs::write(&loads_path, to_wide_csv(&zones, "zone_id")).unwrap();
    std::fs::write(&temps_path, to_wide_csv(&[station], "station_id")).unwrap();
    (loads_path, temps_path)
}
