//! The regression benchmark: one multiple linear regression per zone over
//! the full 313-column calendar/temperature expansion, with the weather
//! station chosen by smallest training error.

use chrono::{Duration, NaiveDateTime};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forecast::features::{design_matrix, FeatureRecipe};
use crate::forecast::ols::fit_ols;
use crate::series::HourlySeries;

/// A fitted per-zone benchmark regression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkModel {
    pub recipe: FeatureRecipe,
    /// The weather station whose temperatures feed the model.
    pub station_id: String,
    /// Intercept first, then one coefficient per recipe column.
    pub coefficients: Vec<f64>,
}

/// Training-quality numbers kept alongside a fitted model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    pub rows: usize,
    pub rank: usize,
    pub sum_abs_residual: f64,
    pub training_mae: f64,
    pub normal_eq_residual: f64,
}

impl BenchmarkModel {
    /// Predicts a contiguous horizon using the given temperatures for this
    /// model's station.
    pub fn predict(
        &self,
        start: NaiveDateTime,
        hours: usize,
        temps: &HourlySeries,
    ) -> Result<Vec<f64>> {
        let timestamps: Vec<NaiveDateTime> =
            (0..hours).map(|i| start + Duration::hours(i as i64)).collect();
        let x = design_matrix(&self.recipe, &timestamps, temps)?;
        Ok(x.with_intercept().mul_vec(&self.coefficients))
    }
}

/// Fits the benchmark regression against one fixed station.
pub fn fit_benchmark_with_station(
    zone: &HourlySeries,
    station: &HourlySeries,
    recipe: &FeatureRecipe,
) -> Result<(BenchmarkModel, FitDiagnostics)> {
    let mut timestamps = Vec::new();
    let mut targets = Vec::new();
    for (ts, v) in zone.present() {
        timestamps.push(ts);
        targets.push(v);
    }
    if timestamps.is_empty() {
        return Err(Error::domain(format!(
            "zone {} has no present readings to train on",
            zone.entity_id()
        )));
    }
    let x = design_matrix(recipe, &timestamps, station)?.with_intercept();
    let fit = fit_ols(&x, &targets)?;
    if fit.normal_eq_residual > 1e-6 {
        log::warn!(
            "benchmark fit for zone {} on station {}: normal-equation residual {:.3e}",
            zone.entity_id(),
            station.entity_id(),
            fit.normal_eq_residual
        );
    }
    Ok((
        BenchmarkModel {
            recipe: recipe.clone(),
            station_id: station.entity_id().to_string(),
            coefficients: fit.beta,
        },
        FitDiagnostics {
            rows: timestamps.len(),
            rank: fit.rank,
            sum_abs_residual: fit.sum_abs_residual,
            training_mae: fit.training_mae,
            normal_eq_residual: fit.normal_eq_residual,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn t0() -> NaiveDateTime {
        NaiveDate::from_ymd_opt(2004, 1, 1).unwrap().and_hms_opt(0, 0, 0).unwrap()
    }

    fn synthetic_temps(id: &str, hours: usize, seed: u64) -> HourlySeries {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let values: Vec<f64> = (0..hours)
            .map(|i| {
                let day_phase = (i % 24) as f64 / 24.0 * std::f64::consts::TAU;
                50.0 + 20.0 * day_phase.sin() + rng.random::<f64>() * 5.0
            })
            .collect();
        HourlySeries::new(id, t0(), values).unwrap()
    }

    /// Loads generated exactly from the recipe so the fit must recover them.
    fn exact_loads(recipe: &FeatureRecipe, temps: &HourlySeries, hours: usize) -> HourlySeries {
        let mut rng = ChaCha12Rng::seed_from_u64(99);
        let p = recipe.column_count();
        let timestamps: Vec<NaiveDateTime> = (0..hours).map(|i| t0() + Duration::hours(i as i64)).collect();
        let x = design_matrix(recipe, &timestamps, temps).unwrap().with_intercept();
        // Coefficients scaled down per column so targets stay O(10) and the
        // 1e-6 recovery tolerance is meaningful.
        let beta: Vec<f64> = (0..=p)
            .map(|c| {
                let scale = (0..hours).map(|r| x.get(r, c).abs()).fold(1.0f64, f64::max);
                (rng.random::<f64>() * 2.0 - 1.0) / scale
            })
            .collect();
        let y = x.mul_vec(&beta);
        HourlySeries::new("z1", t0(), y).unwrap()
    }

    #[test]
    fn exact_recipe_data_is_recovered_to_zero_error() {
        let recipe = FeatureRecipe::benchmark(t0());
        let hours = 24 * 120;
        let temps = synthetic_temps("s1", hours, 1);
        let zone = exact_loads(&recipe, &temps, hours);
        let (model, diag) = fit_benchmark_with_station(&zone, &temps, &recipe).unwrap();
        assert!(diag.training_mae < 1e-6, "training MAE {}", diag.training_mae);
        assert!(diag.normal_eq_residual < 1e-6);
        assert_eq!(model.coefficients.len(), 314);

        // In-sample prediction reproduces the series.
        let predicted = model.predict(t0(), 48, &temps).unwrap();
        for (p, v) in predicted.iter().zip(zone.values()) {
            assert!((p - v.unwrap()).abs() < 1e-6);
        }
    }

    #[test]
    fn intercept_only_recipe_fits_the_mean() {
        let recipe = FeatureRecipe::intercept_only(t0());
        let temps = synthetic_temps("s1", 48, 2);
        let zone = HourlySeries::new("z1", t0(), vec![42.5; 48]).unwrap();
        let (model, diag) = fit_benchmark_with_station(&zone, &temps, &recipe).unwrap();
        assert_eq!(model.coefficients.len(), 1);
        assert!((model.coefficients[0] - 42.5).abs() < 1e-9);
        assert!(diag.training_mae < 1e-9);
    }

    #[test]
    fn refits_are_bit_identical() {
        let recipe = FeatureRecipe::benchmark(t0());
        let hours = 24 * 60;
        let temps = synthetic_temps("s1", hours, 3);
        let zone = exact_loads(&recipe, &temps, hours);
        let (a, _) = fit_benchmark_with_station(&zone, &temps, &recipe).unwrap();
        let (b, _) = fit_benchmark_with_station(&zone, &temps, &recipe).unwrap();
        assert_eq!(a.coefficients, b.coefficients);
    }
}
