//! The segmented competition model: one small regression per
//! (hour of day, season, day type) cell — 24 · 4 · 2 = 192 segments per
//! zone, nine parameters each.
//!
//! The nine regressors are {1, T, T², T³, d, d², dₛ, dₛ·T, dₛ·T²} with d
//! the day index since training start and dₛ the day index within the
//! current season. Segments with fewer than nine training rows fall back
//! to their training mean, and entirely empty segments to the zone mean.

use chrono::{Datelike, Duration, NaiveDate, NaiveDateTime, Timelike};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forecast::benchmark::FitDiagnostics;
use crate::forecast::ols::{fit_ols, Matrix};
use crate::series::HourlySeries;

pub const SEGMENT_PARAMS: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DayType {
    Weekday,
    Weekend,
}

/// Season and day-type assignment rules.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segmentation {
    /// Season label (1..=4) per month, index 0 = January.
    pub season_of_month: [u8; 12],
    /// Weekend flag per weekday, index 0 = Monday.
    pub weekend: [bool; 7],
}

impl Default for Segmentation {
    /// Meteorological quarters (Dec–Feb, Mar–May, Jun–Aug, Sep–Nov) and
    /// Saturday/Sunday weekends.
    fn default() -> Self {
        Segmentation {
            season_of_month: [1, 1, 2, 2, 2, 3, 3, 3, 4, 4, 4, 1],
            weekend: [false, false, false, false, false, true, true],
        }
    }
}

impl Segmentation {
    pub fn validate(&self) -> Result<()> {
        if self.season_of_month.iter().any(|&s| !(1..=4).contains(&s)) {
            return Err(Error::domain("season labels must lie in 1..=4"));
        }
        Ok(())
    }

    pub fn season(&self, date: NaiveDate) -> u8 {
        self.season_of_month[date.month0() as usize]
    }

    pub fn day_type(&self, date: NaiveDate) -> DayType {
        if self.weekend[date.weekday().num_days_from_monday() as usize] {
            DayType::Weekend
        } else {
            DayType::Weekday
        }
    }

    /// First day of the season block containing `date`, walking back while
    /// the previous month carries the same label (a December start wraps
    /// into the previous year).
    pub fn season_start(&self, date: NaiveDate) -> NaiveDate {
        let label = self.season(date);
        let mut year = date.year();
        let mut month = date.month();
        for _ in 0..11 {
            let (py, pm) = if month == 1 { (year - 1, 12) } else { (year, month - 1) };
            if self.season_of_month[(pm - 1) as usize] != label {
                break;
            }
            year = py;
            month = pm;
        }
        NaiveDate::from_ymd_opt(year, month, 1).expect("first of month is valid")
    }

    pub fn key_for(&self, ts: NaiveDateTime) -> SegmentKey {
        SegmentKey {
            hour: ts.hour() as u8,
            season: self.season(ts.date()),
            day_type: self.day_type(ts.date()),
        }
    }

    /// All keys in deterministic order, using the season labels present in
    /// this rule.
    pub fn all_keys(&self) -> Vec<SegmentKey> {
        let mut seasons: Vec<u8> = self.season_of_month.to_vec();
        seasons.sort_unstable();
        seasons.dedup();
        let mut keys = Vec::new();
        for hour in 0..24u8 {
            for &season in &seasons {
                for day_type in [DayType::Weekday, DayType::Weekend] {
                    keys.push(SegmentKey { hour, season, day_type });
                }
            }
        }
        keys
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SegmentKey {
    pub hour: u8,
    pub season: u8,
    pub day_type: DayType,
}

/// Parameters of one segment: a nine-coefficient regression, or the
/// fallback mean that replaces a degenerate fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SegmentParams {
    Regression(Vec<f64>),
    SegmentMean(f64),
    ZoneMean(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentedModel {
    pub station_id: String,
    pub segmentation: Segmentation,
    /// Day-index origin for the d regressor.
    pub training_start: NaiveDate,
    pub zone_mean: f64,
    /// One entry per segment key, sorted by key.
    pub segments: Vec<(SegmentKey, SegmentParams)>,
}

/// The nine regressors for one timestamp.
fn regressors(
    ts: NaiveDateTime,
    temp: f64,
    training_start: NaiveDate,
    segmentation: &Segmentation,
) -> [f64; SEGMENT_PARAMS] {
    let t2 = temp * temp;
    let d = (ts.date() - training_start).num_days() as f64;
    let ds = (ts.date() - segmentation.season_start(ts.date())).num_days() as f64;
    [1.0, temp, t2, t2 * temp, d, d * d, ds, ds * temp, ds * t2]
}

impl SegmentedModel {
    pub fn segment(&self, key: SegmentKey) -> Option<&SegmentParams> {
        self.segments
            .binary_search_by(|(k, _)| k.cmp(&key))
            .ok()
            .map(|i| &self.segments[i].1)
    }

    pub fn predict(
        &self,
        start: NaiveDateTime,
        hours: usize,
        temps: &HourlySeries,
    ) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(hours);
        for i in 0..hours {
            let ts = start + Duration::hours(i as i64);
            let temp = temps.value_at(ts).ok_or_else(|| {
                Error::Coverage(format!(
                    "station {} has no reading at {ts}",
                    temps.entity_id()
                ))
            })?;
            let key = self.segmentation.key_for(ts);
            let value = match self.segment(key) {
                Some(SegmentParams::Regression(beta)) => {
                    let x = regressors(ts, temp, self.training_start, &self.segmentation);
                    x.iter().zip(beta).map(|(a, b)| a * b).sum()
                }
                Some(SegmentParams::SegmentMean(m)) | Some(SegmentParams::ZoneMean(m)) => *m,
                None => self.zone_mean,
            };
            out.push(value);
        }
        Ok(out)
    }
}

/// Fits all segments of one zone against one fixed station.
pub fn fit_segmented_with_station(
    zone: &HourlySeries,
    station: &HourlySeries,
    segmentation: &Segmentation,
) -> Result<(SegmentedModel, FitDiagnostics)> {
    segmentation.validate()?;
    let training_start = zone.start().date();

    let mut rows_by_key: std::collections::BTreeMap<SegmentKey, (Vec<NaiveDateTime>, Vec<f64>)> =
        std::collections::BTreeMap::new();
    let mut zone_sum = 0.0;
    let mut zone_count = 0usize;
    for (ts, v) in zone.present() {
        zone_sum += v;
        zone_count += 1;
        let entry = rows_by_key.entry(segmentation.key_for(ts)).or_default();
        entry.0.push(ts);
        entry.1.push(v);
    }
    if zone_count == 0 {
        return Err(Error::domain(format!(
            "zone {} has no present readings to train on",
            zone.entity_id()
        )));
    }
    let zone_mean = zone_sum / zone_count as f64;

    let mut segments = Vec::new();
    let mut sum_abs_residual = 0.0;
    let mut worst_normal_eq = 0.0f64;
    let mut max_rank = 0usize;
    for key in segmentation.all_keys() {
        let params = match rows_by_key.get(&key) {
            Some((timestamps, targets)) if targets.len() >= SEGMENT_PARAMS => {
                let mut data = Vec::with_capacity(targets.len() * SEGMENT_PARAMS);
                for &ts in timestamps {
                    let temp = station.value_at(ts).ok_or_else(|| {
                        Error::Coverage(format!(
                            "station {} has no reading at {ts}",
                            station.entity_id()
                        ))
                    })?;
                    data.extend_from_slice(&regressors(ts, temp, training_start, segmentation));
                }
                let x = Matrix::new(targets.len(), SEGMENT_PARAMS, data);
                let fit = fit_ols(&x, targets)?;
                sum_abs_residual += fit.sum_abs_residual;
                worst_normal_eq = worst_normal_eq.max(fit.normal_eq_residual);
                max_rank = max_rank.max(fit.rank);
                SegmentParams::Regression(fit.beta)
            }
            Some((_, targets)) => {
                let mean = targets.iter().sum::<f64>() / targets.len() as f64;
                log::warn!(
                    "zone {} segment {key:?} has only {} rows; falling back to its mean",
                    zone.entity_id(),
                    targets.len()
                );
                sum_abs_residual += targets.iter().map(|t| (t - mean).abs()).sum::<f64>();
                SegmentParams::SegmentMean(mean)
            }
            None => {
                log::warn!(
                    "zone {} segment {key:?} has no rows; falling back to the zone mean",
                    zone.entity_id()
                );
                SegmentParams::ZoneMean(zone_mean)
            }
        };
        segments.push((key, params));
    }

    Ok((
        SegmentedModel {
            station_id: station.entity_id().to_string(),
            segmentation: segmentation.clone(),
            training_start,
            zone_mean,
            segments,
        },
        FitDiagnostics {
            rows: zone_count,
            rank: max_rank,
            sum_abs_residual,
            training_mae: sum_abs_residual / zone_count as f64,
            normal_eq_residual: worst_normal_eq,
        },
    ))
}
