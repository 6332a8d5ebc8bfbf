//! Hourly time series.
//!
//! Every series in this crate lives on a contiguous hourly grid: a start
//! instant plus one slot per hour. That makes the "strictly increasing,
//! hourly spacing" invariant structural rather than something to re-check,
//! and reduces alignment to comparing start and length. Missing readings
//! are explicit gaps (`None`); they are propagated, never imputed.

use chrono::{Duration, NaiveDateTime, Timelike};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One entity's hourly series. Used for loads (kW) and temperatures (°F,
/// carried as supplied, never converted).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HourlySeries {
    entity_id: String,
    start: NaiveDateTime,
    values: Vec<Option<f64>>,
}

/// Loads keyed by household, zone, or region id.
pub type LoadSeries = HourlySeries;
/// Weather-station temperature readings.
pub type TemperatureSeries = HourlySeries;

impl HourlySeries {
    /// A gap-free series.
    pub fn new(entity_id: impl Into<String>, start: NaiveDateTime, values: Vec<f64>) -> Result<Self> {
        Self::with_gaps(entity_id, start, values.into_iter().map(Some).collect())
    }

    /// A series that may contain explicit gaps.
    pub fn with_gaps(
        entity_id: impl Into<String>,
        start: NaiveDateTime,
        values: Vec<Option<f64>>,
    ) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::domain("series must contain at least one hour"));
        }
        if start.minute() != 0 || start.second() != 0 || start.nanosecond() != 0 {
            return Err(Error::domain(format!(
                "series must start on a whole hour, got {start}"
            )));
        }
        Ok(HourlySeries {
            entity_id: entity_id.into(),
            start,
            values,
        })
    }

    pub fn entity_id(&self) -> &str {
        &self.entity_id
    }

    pub fn start(&self) -> NaiveDateTime {
        self.start
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Option<f64>] {
        &mut self.values
    }

    pub fn timestamp_at(&self, index: usize) -> NaiveDateTime {
        self.start + Duration::hours(index as i64)
    }

    pub fn timestamps(&self) -> impl Iterator<Item = NaiveDateTime> + '_ {
        (0..self.len()).map(|i| self.timestamp_at(i))
    }

    /// Index of `ts` on this series' grid, if covered.
    pub fn index_of(&self, ts: NaiveDateTime) -> Option<usize> {
        let delta = ts - self.start;
        if delta.num_seconds() < 0 || delta.num_seconds() % 3600 != 0 {
            return None;
        }
        let idx = (delta.num_seconds() / 3600) as usize;
        (idx < self.len()).then_some(idx)
    }

    pub fn value_at(&self, ts: NaiveDateTime) -> Option<f64> {
        self.index_of(ts).and_then(|i| self.values[i])
    }

    pub fn gap_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_none()).count()
    }

    /// Present readings as (timestamp, value) pairs.
    pub fn present(&self) -> impl Iterator<Item = (NaiveDateTime, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.map(|x| (self.timestamp_at(i), x)))
    }

    /// Gap-free values, or an error naming the first gap.
    pub fn dense_values(&self) -> Result<Vec<f64>> {
        self.values
            .iter()
            .enumerate()
            .map(|(i, v)| {
                v.ok_or_else(|| {
                    Error::domain(format!(
                        "series {} has a gap at {}",
                        self.entity_id,
                        self.timestamp_at(i)
                    ))
                })
            })
            .collect()
    }

    /// Checks this series shares `other`'s grid (same start, same length).
    pub fn aligned_with(&self, other: &HourlySeries) -> bool {
        self.start == other.start && self.len() == other.len()
    }

    /// Splits into (training, horizon) where the horizon is the trailing
    /// `horizon_hours` slots.
    pub fn split_trailing(&self, horizon_hours: usize) -> Result<(HourlySeries, HourlySeries)> {
        if horizon_hours == 0 || horizon_hours >= self.len() {
            return Err(Error::domain(format!(
                "horizon of {horizon_hours} h must be shorter than the series ({} h)",
                self.len()
            )));
        }
        let cut = self.len() - horizon_hours;
        let train = HourlySeries {
            entity_id: self.entity_id.clone(),
            start: self.start,
            values: self.values[..cut].to_vec(),
        };
        let test = HourlySeries {
            entity_id: self.entity_id.clone(),
            start: self.timestamp_at(cut),
            values: self.values[cut..].to_vec(),
        };
        Ok((train, test))
    }

    pub fn with_entity_id(mut self, entity_id: impl Into<String>) -> Self {
        self.entity_id = entity_id.into();
        self
    }
}

/// Pointwise sum of aligned series. Any gap makes the sum a gap at that
/// hour. The first series fixes the grid; a mismatching series triggers an
/// alignment error naming it.
pub fn sum_aligned(result_id: impl Into<String>, series: &[HourlySeries]) -> Result<HourlySeries> {
    let first = series
        .first()
        .ok_or_else(|| Error::domain("cannot aggregate an empty list of series"))?;
    for s in &series[1..] {
        if !s.aligned_with(first) {
            return Err(Error::Alignment {
                entity: s.entity_id.clone(),
                message: format!(
                    "grid {} +{}h does not match {} +{}h of {}",
                    s.start,
                    s.len(),
                    first.start,
                    first.len(),
                    first.entity_id
                ),
            });
        }
    }
    let mut sums: Vec<Option<f64>> = first.values.clone();
    for s in &series[1..] {
        for (acc, v) in sums.iter_mut().zip(s.values.iter()) {
            *acc = match (*acc, *v) {
                (Some(a), Some(b)) => Some(a + b),
                _ => None,
            };
        }
    }
    HourlySeries::with_gaps(result_id, first.start, sums)
}

/// Natural ordering for entity ids: numeric ids compare as numbers
/// ("2" < "10"), everything else lexicographically.
pub fn entity_order(a: &str, b: &str) -> std::cmp::Ordering {
    match (a.parse::<u64>(), b.parse::<u64>()) {
        (Ok(x), Ok(y)) => x.cmp(&y),
        _ => a.cmp(b),
    }
}
