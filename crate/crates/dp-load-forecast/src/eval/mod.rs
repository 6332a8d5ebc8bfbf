//! Forecast evaluation: error measures and the utility of switching from
//! direct to hierarchical forecasting on perturbed data.

pub mod sweep;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forecast::ForecastResult;
use crate::ingest::TIMESTAMP_FORMAT;
use crate::series::HourlySeries;

pub use sweep::{
    render_table, run_sweep, write_csv, write_plot_csv, MethodColumns, PrivacyColumns,
    SweepConfig, SweepData, SweepReport, SweepRow,
};

/// MAE and MAPE of one forecast against the actual series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    /// Mean absolute error, kW.
    pub mae: f64,
    /// Mean absolute percentage error, as a fraction.
    pub mape: f64,
    pub horizon: usize,
}

fn aligned_pairs(forecast: &ForecastResult, actual: &HourlySeries) -> Result<Vec<(f64, f64)>> {
    if forecast.start != actual.start() || forecast.values.len() != actual.len() {
        return Err(Error::Alignment {
            entity: actual.entity_id().to_string(),
            message: format!(
                "forecast covers {} +{}h but actuals cover {} +{}h",
                forecast.start,
                forecast.values.len(),
                actual.start(),
                actual.len()
            ),
        });
    }
    forecast
        .values
        .iter()
        .zip(actual.values().iter().enumerate())
        .map(|(&f, (i, v))| {
            let a = v.ok_or_else(|| {
                Error::domain(format!(
                    "actual series {} has a gap at {}",
                    actual.entity_id(),
                    actual.timestamp_at(i)
                ))
            })?;
            Ok((f, a))
        })
        .collect()
}

/// Mean absolute error (1/T) Σ |F_t − L_t|.
pub fn mae(forecast: &ForecastResult, actual: &HourlySeries) -> Result<f64> {
    let pairs = aligned_pairs(forecast, actual)?;
    Ok(pairs.iter().map(|(f, a)| (f - a).abs()).sum::<f64>() / pairs.len() as f64)
}

/// Mean absolute percentage error (1/T) Σ |(F_t − L_t)/L_t|, as a fraction.
/// A zero actual is a hard error naming the timestamp; skipping points
/// silently would distort comparisons.
pub fn mape(forecast: &ForecastResult, actual: &HourlySeries) -> Result<f64> {
    let pairs = aligned_pairs(forecast, actual)?;
    let mut sum = 0.0;
    for (i, (f, a)) in pairs.iter().enumerate() {
        if *a == 0.0 {
            return Err(Error::ZeroDenominator {
                timestamp: actual.timestamp_at(i).format(TIMESTAMP_FORMAT).to_string(),
            });
        }
        sum += ((f - a) / a).abs();
    }
    Ok(sum / pairs.len() as f64)
}

pub fn error_report(forecast: &ForecastResult, actual: &HourlySeries) -> Result<ErrorReport> {
    Ok(ErrorReport {
        mae: mae(forecast, actual)?,
        mape: mape(forecast, actual)?,
        horizon: forecast.values.len(),
    })
}

/// Relative gain of hierarchical-perturbed over direct forecasting:
/// u^λ = (MAE_direct − MAE^λ) / MAE_direct. Negative means the perturbed
/// data hurts more than it helps.
pub fn utility(mae_direct: f64, mae_lambda: f64) -> Result<f64> {
    if !(mae_direct > 0.0) {
        return Err(Error::domain(format!(
            "direct MAE {mae_direct} must be positive to define utility"
        )));
    }
    Ok((mae_direct - mae_lambda) / mae_direct)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forecast::ForecastMode;
    use chrono::NaiveDate;
    use proptest::prelude::*;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn t0() -> chrono::NaiveDateTime {
        NaiveDate::from_ymd_opt(2008, 7, 1).unwrap().and_hms_opt(0, 0, 0).unwrap()
    }

    fn forecast(values: Vec<f64>) -> ForecastResult {
        ForecastResult {
            entity_id: "REGION".into(),
            start: t0(),
            values,
            mode: ForecastMode::Direct,
            lambda: 0.0,
        }
    }

    fn actual(values: Vec<f64>) -> HourlySeries {
        HourlySeries::new("REGION", t0(), values).unwrap()
    }

    #[test]
    fn perfect_forecast_has_zero_errors() {
        let f = forecast(vec![5.0, 6.0, 7.0]);
        let a = actual(vec![5.0, 6.0, 7.0]);
        assert_eq!(mae(&f, &a).unwrap(), 0.0);
        assert_eq!(mape(&f, &a).unwrap(), 0.0);
    }

    #[test]
    fn hand_computed_examples() {
        let f = forecast(vec![1.0, 2.0]);
        let a = actual(vec![2.0, 4.0]);
        assert!((mae(&f, &a).unwrap() - 1.5).abs() < 1e-15);

        let f = forecast(vec![110.0]);
        let a = actual(vec![100.0]);
        assert!((mape(&f, &a).unwrap() - 0.10).abs() < 1e-15);
    }

    #[test]
    fn misalignment_and_gaps_fail_loudly() {
        let f = forecast(vec![1.0, 2.0]);
        let a = actual(vec![1.0, 2.0, 3.0]);
        assert!(matches!(mae(&f, &a), Err(Error::Alignment { .. })));

        let gappy = HourlySeries::with_gaps("REGION", t0(), vec![Some(1.0), None]).unwrap();
        assert!(mae(&forecast(vec![1.0, 2.0]), &gappy).is_err());
    }

    #[test]
    fn mape_zero_denominator_names_the_timestamp() {
        let f = forecast(vec![1.0, 2.0]);
        let a = actual(vec![1.0, 0.0]);
        match mape(&f, &a).unwrap_err() {
            Error::ZeroDenominator { timestamp } => {
                assert_eq!(timestamp, "2008-07-01T01:00:00");
            }
            other => panic!("expected zero-denominator error, got {other}"),
        }
    }

    #[test]
    fn utility_examples() {
        assert_eq!(utility(100.0, 100.0).unwrap(), 0.0);
        assert_eq!(utility(100.0, 0.0).unwrap(), 1.0);
        // The reported 7.80 % for the unperturbed hierarchical benchmark.
        let u = utility(100.0, 92.20).unwrap();
        assert!((u - 0.078).abs() < 1e-12);
        assert!(utility(0.0, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn errors_match_a_naive_loop(seed in 0u64..1000) {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let n = 100usize;
            let f_vals: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 100.0).collect();
            let a_vals: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 100.0 + 1.0).collect();

            let mut naive_mae = 0.0;
            let mut naive_mape = 0.0;
            for i in 0..n {
                naive_mae += (f_vals[i] - a_vals[i]).abs();
                naive_mape += ((f_vals[i] - a_vals[i]) / a_vals[i]).abs();
            }
            naive_mae /= n as f64;
            naive_mape /= n as f64;

            let f = forecast(f_vals);
            let a = actual(a_vals);
            prop_assert!((mae(&f, &a).unwrap() - naive_mae).abs() < 1e-12);
            prop_assert!((mape(&f, &a).unwrap() - naive_mape).abs() < 1e-12);
        }

        #[test]
        fn utility_is_decreasing_in_noisy_error(
            direct in 1.0f64..1000.0,
            a in 0.0f64..1000.0,
            gap in 0.001f64..100.0,
        ) {
            let better = utility(direct, a).unwrap();
            let worse = utility(direct, a + gap).unwrap();
            prop_assert!(worse < better);
        }
    }
}
