//! Load forecasting: model fitting, weather-station selection, horizon
//! temperature forecasting, and the direct / hierarchical orchestration.

pub mod benchmark;
pub mod features;
pub mod ols;
pub mod segmented;
pub mod temperature;

use std::collections::BTreeMap;
use std::path::Path;

use chrono::NaiveDateTime;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{entity_order, HourlySeries};
pub use benchmark::{fit_benchmark_with_station, BenchmarkModel, FitDiagnostics};
pub use features::{design_matrix, FeatureGroup, FeatureRecipe};
pub use ols::{fit_ols, Matrix, OlsFit};
pub use segmented::{
    fit_segmented_with_station, DayType, SegmentKey, SegmentParams, Segmentation, SegmentedModel,
    SEGMENT_PARAMS,
};
pub use temperature::forecast_temperature;

/// Version tag written into serialized model documents.
pub const MODEL_FORMAT_VERSION: u32 = 1;

/// The two supported model families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Benchmark,
    Segmented,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Method::Benchmark => write!(f, "benchmark"),
            Method::Segmented => write!(f, "segmented"),
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "benchmark" => Ok(Method::Benchmark),
            "segmented" => Ok(Method::Segmented),
            other => Err(Error::domain(format!(
                "unknown method `{other}` (expected benchmark or segmented)"
            ))),
        }
    }
}

/// Fitting knobs shared by both families.
#[derive(Debug, Clone)]
pub struct FitOptions {
    pub method: Method,
    /// Trend epoch for the benchmark recipe; defaults to each zone's
    /// training start.
    pub trend_epoch: Option<NaiveDateTime>,
    /// Replaces the full benchmark recipe when set.
    pub recipe: Option<FeatureRecipe>,
    pub segmentation: Segmentation,
}

impl FitOptions {
    pub fn new(method: Method) -> Self {
        FitOptions {
            method,
            trend_epoch: None,
            recipe: None,
            segmentation: Segmentation::default(),
        }
    }

    fn recipe_for(&self, zone: &HourlySeries) -> FeatureRecipe {
        self.recipe.clone().unwrap_or_else(|| {
            FeatureRecipe::benchmark(self.trend_epoch.unwrap_or_else(|| zone.start()))
        })
    }
}

/// A fitted model for one entity (zone or region).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ZoneModel {
    Benchmark(BenchmarkModel),
    Segmented(SegmentedModel),
}

impl ZoneModel {
    pub fn station_id(&self) -> &str {
        match self {
            ZoneModel::Benchmark(m) => &m.station_id,
            ZoneModel::Segmented(m) => &m.station_id,
        }
    }

    pub fn predict(
        &self,
        start: NaiveDateTime,
        hours: usize,
        temps: &HourlySeries,
    ) -> Result<Vec<f64>> {
        match self {
            ZoneModel::Benchmark(m) => m.predict(start, hours, temps),
            ZoneModel::Segmented(m) => m.predict(start, hours, temps),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedZone {
    pub zone_id: String,
    pub model: ZoneModel,
    pub training: FitDiagnostics,
}

/// The serialized document: every fitted zone of one method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSet {
    pub version: u32,
    pub method: Method,
    pub zones: Vec<FittedZone>,
}

impl ModelSet {
    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::io::BufWriter::new(std::fs::File::create(path)?);
        serde_json::to_writer_pretty(file, self)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::io::BufReader::new(std::fs::File::open(path)?);
        let set: ModelSet = serde_json::from_reader(file)?;
        if set.version != MODEL_FORMAT_VERSION {
            return Err(Error::domain(format!(
                "model document version {} is not supported (expected {MODEL_FORMAT_VERSION})",
                set.version
            )));
        }
        Ok(set)
    }
}

/// Fits one zone against every candidate station and keeps the one with the
/// smallest summed absolute training error; ties break to the lowest
/// station id.
pub fn fit_zone(
    zone: &HourlySeries,
    stations: &[HourlySeries],
    options: &FitOptions,
) -> Result<FittedZone> {
    if stations.is_empty() {
        return Err(Error::domain("at least one candidate station is required"));
    }
    let mut candidates: Vec<&HourlySeries> = stations.iter().collect();
    candidates.sort_by(|a, b| entity_order(a.entity_id(), b.entity_id()));

    let mut best: Option<(f64, ZoneModel, FitDiagnostics)> = None;
    for station in candidates {
        let (model, diag) = match options.method {
            Method::Benchmark => {
                let recipe = options.recipe_for(zone);
                let (m, d) = fit_benchmark_with_station(zone, station, &recipe)?;
                (ZoneModel::Benchmark(m), d)
            }
            Method::Segmented => {
                let (m, d) = fit_segmented_with_station(zone, station, &options.segmentation)?;
                (ZoneModel::Segmented(m), d)
            }
        };
        let better = match &best {
            None => true,
            Some((score, _, _)) => diag.sum_abs_residual < *score,
        };
        if better {
            best = Some((diag.sum_abs_residual, model, diag));
        }
    }
    let (_, model, training) = best.expect("at least one candidate was fitted");
    Ok(FittedZone {
        zone_id: zone.entity_id().to_string(),
        model,
        training,
    })
}

/// The station a zone's model would use; exposed for selection-only flows.
pub fn select_station(
    zone: &HourlySeries,
    stations: &[HourlySeries],
    options: &FitOptions,
) -> Result<String> {
    Ok(fit_zone(zone, stations, options)?.model.station_id().to_string())
}

/// Fits every zone in natural id order. Zone fits are independent, so they
/// run in parallel; the result order (and all numerics) match a sequential
/// run.
pub fn fit_model_set(
    zones: &[HourlySeries],
    stations: &[HourlySeries],
    options: &FitOptions,
) -> Result<ModelSet> {
    use rayon::prelude::*;
    if zones.is_empty() {
        return Err(Error::domain("at least one zone series is required"));
    }
    let mut ordered: Vec<&HourlySeries> = zones.iter().collect();
    ordered.sort_by(|a, b| entity_order(a.entity_id(), b.entity_id()));
    let fitted = ordered
        .par_iter()
        .map(|z| fit_zone(z, stations, options))
        .collect::<Result<Vec<_>>>()?;
    Ok(ModelSet {
        version: MODEL_FORMAT_VERSION,
        method: options.method,
        zones: fitted,
    })
}

/// Horizon temperature forecasts for each station, keyed by station id.
pub struct StationForecasts {
    pub start: NaiveDateTime,
    pub hours: usize,
    series: BTreeMap<String, HourlySeries>,
}

impl StationForecasts {
    pub fn build(
        stations: &[HourlySeries],
        start: NaiveDateTime,
        hours: usize,
    ) -> Result<Self> {
        let mut series = BTreeMap::new();
        for s in stations {
            series.insert(s.entity_id().to_string(), forecast_temperature(s, start, hours)?);
        }
        Ok(StationForecasts { start, hours, series })
    }

    pub fn get(&self, station_id: &str) -> Result<&HourlySeries> {
        self.series.get(station_id).ok_or_else(|| {
            Error::Coverage(format!("no temperature forecast for station {station_id}"))
        })
    }
}

/// Whether a regional forecast came from the regional history itself or
/// from summing zone forecasts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ForecastMode {
    Direct,
    Hierarchical,
}

/// A forecast over a contiguous horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastResult {
    pub entity_id: String,
    pub start: NaiveDateTime,
    pub values: Vec<f64>,
    pub mode: ForecastMode,
    /// Noise scale of the training data; 0 means unperturbed.
    pub lambda: f64,
}

impl ForecastResult {
    pub fn to_series(&self) -> HourlySeries {
        HourlySeries::new(self.entity_id.clone(), self.start, self.values.clone())
            .expect("forecast horizons are nonempty")
    }
}

/// A regional hierarchical forecast along with its per-zone components.
#[derive(Debug, Clone, PartialEq)]
pub struct HierarchicalForecast {
    pub region: ForecastResult,
    pub zones: Vec<ForecastResult>,
}

/// Direct forecasting: fit the chosen method on the regional aggregate and
/// predict the horizon from it alone.
pub fn forecast_direct(
    regional_history: &HourlySeries,
    stations: &[HourlySeries],
    options: &FitOptions,
    horizon_start: NaiveDateTime,
    horizon_hours: usize,
) -> Result<ForecastResult> {
    let fitted = fit_zone(regional_history, stations, options)?;
    let temps = StationForecasts::build(stations, horizon_start, horizon_hours)?;
    let values = fitted
        .model
        .predict(horizon_start, horizon_hours, temps.get(fitted.model.station_id())?)?;
    Ok(ForecastResult {
        entity_id: regional_history.entity_id().to_string(),
        start: horizon_start,
        values,
        mode: ForecastMode::Direct,
        lambda: 0.0,
    })
}

/// Hierarchical forecasting from (possibly perturbed) zone histories: fit
/// and predict each zone, then sum the zone forecasts pointwise in zone-id
/// order. `lambda` records the noise scale of the training data.
pub fn forecast_hierarchical(
    zone_histories: &[HourlySeries],
    stations: &[HourlySeries],
    options: &FitOptions,
    horizon_start: NaiveDateTime,
    horizon_hours: usize,
    lambda: f64,
) -> Result<HierarchicalForecast> {
    let models = fit_model_set(zone_histories, stations, options)?;
    forecast_from_models(&models, stations, horizon_start, horizon_hours, lambda)
}

/// Predicts the horizon from already-fitted models and sums the zones.
pub fn forecast_from_models(
    models: &ModelSet,
    stations: &[HourlySeries],
    horizon_start: NaiveDateTime,
    horizon_hours: usize,
    lambda: f64,
) -> Result<HierarchicalForecast> {
    let temps = StationForecasts::build(stations, horizon_start, horizon_hours)?;
    let mut zones = Vec::with_capacity(models.zones.len());
    for fitted in &models.zones {
        let values = fitted
            .model
            .predict(horizon_start, horizon_hours, temps.get(fitted.model.station_id())?)?;
        zones.push(ForecastResult {
            entity_id: fitted.zone_id.clone(),
            start: horizon_start,
            values,
            mode: ForecastMode::Hierarchical,
            lambda,
        });
    }
    // Summation order is fixed to zone-id order (fit_model_set sorted it).
    let mut region_values = vec![0.0; horizon_hours];
    for z in &zones {
        for (acc, v) in region_values.iter_mut().zip(&z.values) {
            *acc += v;
        }
    }
    Ok(HierarchicalForecast {
        region: ForecastResult {
            entity_id: "REGION".to_string(),
            start: horizon_start,
            values: region_values,
            mode: ForecastMode::Hierarchical,
            lambda,
        },
        zones,
    })
}
