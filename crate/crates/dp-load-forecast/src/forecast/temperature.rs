//! Horizon temperatures by calendar averaging: each forecast hour takes
//! the mean of the same (month, day, hour) readings from the four
//! preceding years. Feb 29 averages over whatever Feb 29 samples exist.

use chrono::{Datelike, Duration, NaiveDate, NaiveDateTime, Timelike};

use crate::error::{Error, Result};
use crate::series::HourlySeries;

/// Years looked back for the same-calendar-date average.
pub const LOOKBACK_YEARS: i32 = 4;

/// Forecasts one station over a horizon from its history. Fewer than four
/// matching years use the mean of those available; zero matches is a
/// coverage error.
pub fn forecast_temperature(
    history: &HourlySeries,
    horizon_start: NaiveDateTime,
    horizon_hours: usize,
) -> Result<HourlySeries> {
    if horizon_hours == 0 {
        return Err(Error::domain("temperature horizon must be at least one hour"));
    }
    let mut values = Vec::with_capacity(horizon_hours);
    for i in 0..horizon_hours {
        let ts = horizon_start + Duration::hours(i as i64);
        let mut sum = 0.0;
        let mut count = 0usize;
        for back in 1..=LOOKBACK_YEARS {
            let year = ts.year() - back;
            // Feb 29 only exists in leap years; other (month, day) pairs
            // match every year.
            let Some(date) = NaiveDate::from_ymd_opt(year, ts.month(), ts.day()) else {
                continue;
            };
            let candidate = date
                .and_hms_opt(ts.hour(), 0, 0)
                .expect("whole hours are always valid");
            if let Some(v) = history.value_at(candidate) {
                sum += v;
                count += 1;
            }
        }
        if count == 0 {
            return Err(Error::Coverage(format!(
                "station {} has no reading at {}-{:02}-{:02} {:02}:00 in the past {LOOKBACK_YEARS} years",
                history.entity_id(),
                ts.year(),
                ts.month(),
                ts.day(),
                ts.hour()
            )));
        }
        values.push(sum / count as f64);
    }
    HourlySeries::new(history.entity_id(), horizon_start, values)
}
