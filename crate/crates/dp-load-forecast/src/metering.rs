//! Distributed metering simulation: households emit locally perturbed
//! readings, zones sum them, the region sums the zones.
//!
//! Perturbed readings are kept as-is, negatives included. Clamping them to
//! zero would skew the noise distribution away from Laplace and void the
//! privacy guarantee, so nothing here clamps.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::privacy::{sample_gamma_share, sample_laplace};
use crate::rng::Substreams;
use crate::series::{sum_aligned, HourlySeries};

/// A metering zone: one aggregation group of households.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Zone {
    pub zone_id: String,
    pub households: Vec<String>,
}

impl Zone {
    pub fn new(zone_id: impl Into<String>, households: Vec<String>) -> Result<Self> {
        if households.is_empty() {
            return Err(Error::domain("a zone needs at least one household"));
        }
        Ok(Zone {
            zone_id: zone_id.into(),
            households,
        })
    }

    /// Group size n used to split the zone's Laplace noise.
    pub fn n(&self) -> u64 {
        self.households.len() as u64
    }
}

fn check_raw(series: &HourlySeries) -> Result<()> {
    if let Some((ts, v)) = series.present().find(|&(_, v)| v < 0.0) {
        return Err(Error::domain(format!(
            "raw series {} has a negative reading {v} at {ts}; only unperturbed input may be perturbed",
            series.entity_id()
        )));
    }
    Ok(())
}

/// Adds one gamma share per present reading: l̂ = l + (G1(n, λ) − G2(n, λ)).
///
/// Each reading draws from the substream keyed by (entity, hour index), so
/// the result is independent of evaluation order. Gaps stay gaps; the
/// output is not clamped.
pub fn perturb_household(
    series: &HourlySeries,
    zone_size: u64,
    lambda: f64,
    streams: &Substreams,
) -> Result<HourlySeries> {
    if zone_size == 0 {
        return Err(Error::domain("zone size must be at least 1"));
    }
    if !(lambda > 0.0) {
        return Err(Error::domain(format!("noise scale {lambda} must be > 0")));
    }
    check_raw(series)?;
    let mut out = series.clone();
    for (i, slot) in out.values_mut().iter_mut().enumerate() {
        if let Some(v) = slot {
            let mut rng = streams.rng_for(series.entity_id(), i as u64);
            let share = sample_gamma_share(zone_size, lambda, &mut rng)?;
            *slot = Some(*v + share.value);
        }
    }
    Ok(out)
}

/// Zone-level shortcut: adds one Laplace(λ) draw per reading.
///
/// Distributionally identical to summing the gamma shares of all n
/// households, which is what makes it valid when only zone aggregates are
/// available (as in the GEFCom files).
pub fn perturb_zone_aggregate(
    series: &HourlySeries,
    lambda: f64,
    streams: &Substreams,
) -> Result<HourlySeries> {
    if !(lambda > 0.0) {
        return Err(Error::domain(format!("noise scale {lambda} must be > 0")));
    }
    check_raw(series)?;
    let mut out = series.clone();
    for (i, slot) in out.values_mut().iter_mut().enumerate() {
        if let Some(v) = slot {
            let mut rng = streams.rng_for(series.entity_id(), i as u64);
            *slot = Some(*v + sample_laplace(lambda, &mut rng)?);
        }
    }
    Ok(out)
}

/// Zone aggregate: pointwise sum of the household series. By divisibility
/// the aggregate noise is exactly Laplace(λ) when each household added a
/// Gamma(1/n, λ) share.
pub fn aggregate_zone(zone_id: impl Into<String>, households: &[HourlySeries]) -> Result<HourlySeries> {
    sum_aligned(zone_id, households)
}

/// Regional aggregate: pointwise sum of the zone series.
pub fn aggregate_region(zones: &[HourlySeries]) -> Result<HourlySeries> {
    sum_aligned("REGION", zones)
}
