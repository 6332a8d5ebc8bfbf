//! Calendar and temperature feature construction for the regression
//! benchmark.
//!
//! The benchmark recipe expands to exactly 313 columns. Every categorical
//! block — simple or crossed — is dummy-coded with one reference level
//! dropped (January, Monday, hour 0, and the Monday-hour-0 cell):
//!
//! | group                      | columns |
//! |----------------------------|---------|
//! | trend (hours since epoch)  | 1       |
//! | month class                | 11      |
//! | day-of-week class          | 6       |
//! | hour class                 | 23      |
//! | day × hour cross           | 167     |
//! | T, T², T³                  | 3       |
//! | Tʲ × month                 | 33      |
//! | Tʲ × hour                  | 69      |
//!
//! The crossed day-hour block spans the standalone day and hour dummies,
//! so the full design is intentionally rank-deficient; fits rely on the
//! minimal-norm solver. The column count is the contract.

use chrono::{Datelike, NaiveDateTime, Timelike};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forecast::ols::Matrix;
use crate::series::HourlySeries;

/// One block of explanatory variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FeatureGroup {
    Trend,
    MonthClass,
    DayClass,
    HourClass,
    DayHourCross,
    TemperaturePoly,
    TempMonthCross,
    TempHourCross,
}

impl FeatureGroup {
    pub fn width(self) -> usize {
        match self {
            FeatureGroup::Trend => 1,
            FeatureGroup::MonthClass => 11,
            FeatureGroup::DayClass => 6,
            FeatureGroup::HourClass => 23,
            FeatureGroup::DayHourCross => 7 * 24 - 1,
            FeatureGroup::TemperaturePoly => 3,
            FeatureGroup::TempMonthCross => 3 * 11,
            FeatureGroup::TempHourCross => 3 * 23,
        }
    }
}

/// An ordered list of feature groups plus the epoch the trend counts from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRecipe {
    pub groups: Vec<FeatureGroup>,
    pub trend_epoch: NaiveDateTime,
}

impl FeatureRecipe {
    /// The full benchmark recipe; expands to 313 columns.
    pub fn benchmark(trend_epoch: NaiveDateTime) -> Self {
        FeatureRecipe {
            groups: vec![
                FeatureGroup::Trend,
                FeatureGroup::MonthClass,
                FeatureGroup::DayClass,
                FeatureGroup::HourClass,
                FeatureGroup::DayHourCross,
                FeatureGroup::TemperaturePoly,
                FeatureGroup::TempMonthCross,
                FeatureGroup::TempHourCross,
            ],
            trend_epoch,
        }
    }

    /// No columns at all; the fitted model is just its intercept.
    pub fn intercept_only(trend_epoch: NaiveDateTime) -> Self {
        FeatureRecipe {
            groups: Vec::new(),
            trend_epoch,
        }
    }

    pub fn id(&self) -> String {
        if self.groups == FeatureRecipe::benchmark(self.trend_epoch).groups {
            "benchmark-313".to_string()
        } else if self.groups.is_empty() {
            "intercept-only".to_string()
        } else {
            format!("custom-{}", self.column_count())
        }
    }

    /// Number of columns the recipe expands to (without intercept).
    pub fn column_count(&self) -> usize {
        self.groups.iter().map(|g| g.width()).sum()
    }

    /// Fills one design row for a timestamp and temperature reading.
    pub fn fill_row(&self, out: &mut [f64], ts: NaiveDateTime, temp: f64) {
        debug_assert_eq!(out.len(), self.column_count());
        out.fill(0.0);
        let month = ts.month() as usize; // 1..=12
        let weekday = ts.weekday().num_days_from_monday() as usize; // 0..=6
        let hour = ts.hour() as usize; // 0..=23
        let t2 = temp * temp;
        let powers = [temp, t2, t2 * temp];

        let mut offset = 0usize;
        for group in &self.groups {
            match group {
                FeatureGroup::Trend => {
                    out[offset] = (ts - self.trend_epoch).num_hours() as f64;
                }
                FeatureGroup::MonthClass => {
                    if month >= 2 {
                        out[offset + month - 2] = 1.0;
                    }
                }
                FeatureGroup::DayClass => {
                    if weekday >= 1 {
                        out[offset + weekday - 1] = 1.0;
                    }
                }
                FeatureGroup::HourClass => {
                    if hour >= 1 {
                        out[offset + hour - 1] = 1.0;
                    }
                }
                FeatureGroup::DayHourCross => {
                    let cell = weekday * 24 + hour;
                    if cell >= 1 {
                        out[offset + cell - 1] = 1.0;
                    }
                }
                FeatureGroup::TemperaturePoly => {
                    out[offset..offset + 3].copy_from_slice(&powers);
                }
                FeatureGroup::TempMonthCross => {
                    if month >= 2 {
                        for (j, p) in powers.iter().enumerate() {
                            out[offset + j * 11 + month - 2] = *p;
                        }
                    }
                }
                FeatureGroup::TempHourCross => {
                    if hour >= 1 {
                        for (j, p) in powers.iter().enumerate() {
                            out[offset + j * 23 + hour - 1] = *p;
                        }
                    }
                }
            }
            offset += group.width();
        }
    }
}

/// Builds the design matrix for the given timestamps. Every timestamp must
/// have a present temperature reading.
pub fn design_matrix(
    recipe: &FeatureRecipe,
    timestamps: &[NaiveDateTime],
    temps: &HourlySeries,
) -> Result<Matrix> {
    let p = recipe.column_count();
    let mut data = vec![0.0; timestamps.len() * p];
    for (r, &ts) in timestamps.iter().enumerate() {
        let temp = temps.value_at(ts).ok_or_else(|| {
            Error::Coverage(format!(
                "station {} has no reading at {ts}",
                temps.entity_id()
            ))
        })?;
        recipe.fill_row(&mut data[r * p..(r + 1) * p], ts, temp);
    }
    Ok(Matrix::new(timestamps.len(), p, data))
}
