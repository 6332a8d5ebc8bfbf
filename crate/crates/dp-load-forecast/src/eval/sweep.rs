//! The privacy-utility sweep: perturb zone training data over a grid of
//! noise scales, refit, forecast, score, and attach the privacy accounting
//! columns for every sensitivity choice.

use chrono::NaiveDateTime;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;

use crate::error::{Error, Result};
use crate::eval::{mae, utility};
use crate::forecast::{
    forecast_direct, forecast_hierarchical, FitOptions, Method, Segmentation,
};
use crate::metering::{aggregate_region, perturb_zone_aggregate};
use crate::privacy::{compose_k_fold, epsilon_from_scale, format_epsilon, format_two_decimals};
use crate::rng::Substreams;
use crate::series::{entity_order, HourlySeries};

/// Everything a sweep needs to know besides the data.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub methods: Vec<Method>,
    /// Positive noise scales; the unperturbed row is always produced.
    pub lambdas: Vec<f64>,
    pub delta_fs: Vec<f64>,
    pub seeds: Vec<u64>,
    pub delta_tilde: f64,
    /// Composition steps; defaults to the training-timestamp count.
    pub k_override: Option<u64>,
    pub horizon_hours: usize,
    /// Reference margin for the utility-limit line in plot exports, kW.
    pub utility_limit_kw: f64,
    pub trend_epoch: Option<NaiveDateTime>,
    /// Replaces the full benchmark recipe when set (diagnostics only).
    pub recipe: Option<crate::forecast::FeatureRecipe>,
    pub segmentation: Segmentation,
}

impl SweepConfig {
    pub fn new(methods: Vec<Method>, lambdas: Vec<f64>, delta_fs: Vec<f64>, seeds: Vec<u64>) -> Self {
        SweepConfig {
            methods,
            lambdas,
            delta_fs,
            seeds,
            delta_tilde: 1e-9,
            k_override: None,
            horizon_hours: 168,
            utility_limit_kw: 12_000.0,
            trend_epoch: None,
            recipe: None,
            segmentation: Segmentation::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::Config("at least one method is required".into()));
        }
        if self.lambdas.is_empty() || self.delta_fs.is_empty() || self.seeds.is_empty() {
            return Err(Error::Config(
                "lambda grid, sensitivity list, and seeds must be nonempty".into(),
            ));
        }
        if self.lambdas.iter().any(|&l| !(l > 0.0)) {
            return Err(Error::Config("all lambda values must be positive".into()));
        }
        if self.delta_fs.iter().any(|&d| !(d > 0.0)) {
            return Err(Error::Config("all sensitivities must be positive".into()));
        }
        if !(self.delta_tilde > 0.0 && self.delta_tilde <= 1.0) {
            return Err(Error::Config(format!(
                "delta_tilde {} outside (0, 1]",
                self.delta_tilde
            )));
        }
        if self.horizon_hours == 0 {
            return Err(Error::Config("horizon must be at least one hour".into()));
        }
        self.segmentation.validate().map_err(|e| Error::Config(e.to_string()))
    }

    fn fit_options(&self, method: Method) -> FitOptions {
        FitOptions {
            method,
            trend_epoch: self.trend_epoch,
            recipe: self.recipe.clone(),
            segmentation: self.segmentation.clone(),
        }
    }
}

/// The input data: per-zone load series plus candidate weather stations.
#[derive(Debug, Clone)]
pub struct SweepData {
    pub zones: Vec<HourlySeries>,
    pub stations: Vec<HourlySeries>,
}

/// Privacy accounting columns of one (λ, Δf) row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrivacyColumns {
    pub epsilon: f64,
    pub epsilon_tilde: f64,
    pub rho: f64,
}

/// Per-method forecast quality of one λ level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodColumns {
    pub method: Method,
    pub mae_direct: f64,
    /// Mean/min/max MAE over successful seeds; absent when every seed
    /// failed.
    pub mae_mean: Option<f64>,
    pub mae_min: Option<f64>,
    pub mae_max: Option<f64>,
    /// Utility of the mean MAE against the direct baseline.
    pub utility: Option<f64>,
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub lambda: f64,
    pub delta_f: Option<f64>,
    pub privacy: Option<PrivacyColumns>,
    pub methods: Vec<MethodColumns>,
    pub seed_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub k: u64,
    pub delta_tilde: f64,
    pub horizon_hours: usize,
    pub seeds: Vec<u64>,
    pub utility_limit_kw: f64,
    pub methods: Vec<Method>,
    pub rows: Vec<SweepRow>,
    /// Utility columns depend on λ only and repeat across the Δf rows of
    /// each λ level.
    pub note: String,
}

impl SweepReport {
    /// True when not a single (λ, seed, method) cell produced a forecast.
    pub fn all_cells_failed(&self) -> bool {
        self.rows
            .iter()
            .filter(|r| r.lambda > 0.0)
            .all(|r| r.methods.iter().all(|m| m.mae_mean.is_none()))
    }
}

/// Runs the whole pipeline: direct baseline and unperturbed hierarchical
/// forecasts once per method, then one perturbed fit-and-score job per
/// (λ, seed) cell, in parallel. Per-cell failures are recorded and the
/// sweep continues.
pub fn run_sweep(config: &SweepConfig, data: &SweepData) -> Result<SweepReport> {
    config.validate()?;
    let mut zones: Vec<HourlySeries> = data.zones.clone();
    if zones.is_empty() {
        return Err(Error::domain("sweep needs at least one zone"));
    }
    zones.sort_by(|a, b| entity_order(a.entity_id(), b.entity_id()));

    // Train/test split on the shared hourly grid.
    let mut trains = Vec::with_capacity(zones.len());
    let mut tests = Vec::with_capacity(zones.len());
    for z in &zones {
        let (train, test) = z.split_trailing(config.horizon_hours)?;
        trains.push(train);
        tests.push(test);
    }
    let regional_actual = aggregate_region(&tests)?;
    if regional_actual.gap_count() > 0 {
        return Err(Error::domain(
            "the test horizon contains gaps; scoring needs a gap-free actual series",
        ));
    }
    let regional_train = aggregate_region(&trains)?;
    let horizon_start = regional_actual.start();

    let k = config.k_override.unwrap_or(trains[0].len() as u64);

    // Baselines per method: the direct forecast and the unperturbed
    // hierarchical forecast.
    let mut mae_direct = Vec::with_capacity(config.methods.len());
    let mut mae_unperturbed = Vec::with_capacity(config.methods.len());
    for &method in &config.methods {
        let options = config.fit_options(method);
        let direct = forecast_direct(
            &regional_train,
            &data.stations,
            &options,
            horizon_start,
            config.horizon_hours,
        )?;
        mae_direct.push(mae(&direct, &regional_actual)?);

        let hier = forecast_hierarchical(
            &trains,
            &data.stations,
            &options,
            horizon_start,
            config.horizon_hours,
            0.0,
        )?;
        mae_unperturbed.push(mae(&hier.region, &regional_actual)?);
    }

    // One job per (λ, seed): perturb, then fit and score every method.
    let cells: Vec<(usize, usize)> = (0..config.lambdas.len())
        .flat_map(|li| (0..config.seeds.len()).map(move |si| (li, si)))
        .collect();
    let outcomes: Vec<((usize, usize), Vec<std::result::Result<f64, String>>)> = cells
        .par_iter()
        .map(|&(li, si)| {
            let lambda = config.lambdas[li];
            let seed = config.seeds[si];
            let streams = Substreams::new(seed);
            let perturbed: Result<Vec<HourlySeries>> = trains
                .iter()
                .map(|t| perturb_zone_aggregate(t, lambda, &streams))
                .collect();
            let per_method: Vec<std::result::Result<f64, String>> = match perturbed {
                Err(e) => vec![Err(e.to_string()); config.methods.len()],
                Ok(perturbed) => config
                    .methods
                    .iter()
                    .map(|&method| {
                        let options = config.fit_options(method);
                        forecast_hierarchical(
                            &perturbed,
                            &data.stations,
                            &options,
                            horizon_start,
                            config.horizon_hours,
                            lambda,
                        )
                        .and_then(|f| mae(&f.region, &regional_actual))
                        .map_err(|e| e.to_string())
                    })
                    .collect(),
            };
            ((li, si), per_method)
        })
        .collect();

    // Deterministic aggregation: index outcomes by cell, then walk the
    // config order.
    let mut by_cell: std::collections::BTreeMap<(usize, usize), Vec<std::result::Result<f64, String>>> =
        std::collections::BTreeMap::new();
    for (cell, res) in outcomes {
        by_cell.insert(cell, res);
    }

    let mut rows = Vec::new();
    // The unperturbed row: no sensitivity, no privacy columns.
    rows.push(SweepRow {
        lambda: 0.0,
        delta_f: None,
        privacy: None,
        methods: config
            .methods
            .iter()
            .enumerate()
            .map(|(mi, &method)| MethodColumns {
                method,
                mae_direct: mae_direct[mi],
                mae_mean: Some(mae_unperturbed[mi]),
                mae_min: Some(mae_unperturbed[mi]),
                mae_max: Some(mae_unperturbed[mi]),
                utility: utility(mae_direct[mi], mae_unperturbed[mi]).ok(),
                failures: Vec::new(),
            })
            .collect(),
        seed_count: 1,
    });

    for (li, &lambda) in config.lambdas.iter().enumerate() {
        let mut method_columns = Vec::with_capacity(config.methods.len());
        for (mi, &method) in config.methods.iter().enumerate() {
            let mut maes = Vec::new();
            let mut failures = Vec::new();
            for si in 0..config.seeds.len() {
                match &by_cell[&(li, si)][mi] {
                    Ok(v) => maes.push(*v),
                    Err(e) => failures.push(format!("seed {}: {e}", config.seeds[si])),
                }
            }
            let (mae_mean, mae_min, mae_max, u) = if maes.is_empty() {
                (None, None, None, None)
            } else {
                let mean = maes.iter().sum::<f64>() / maes.len() as f64;
                let min = maes.iter().cloned().fold(f64::INFINITY, f64::min);
                let max = maes.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                (
                    Some(mean),
                    Some(min),
                    Some(max),
                    utility(mae_direct[mi], mean).ok(),
                )
            };
            method_columns.push(MethodColumns {
                method,
                mae_direct: mae_direct[mi],
                mae_mean,
                mae_min,
                mae_max,
                utility: u,
                failures,
            });
        }
        for &delta_f in &config.delta_fs {
            let epsilon = epsilon_from_scale(delta_f, lambda)?;
            let composed = compose_k_fold(epsilon, 0.0, k, config.delta_tilde)?;
            rows.push(SweepRow {
                lambda,
                delta_f: Some(delta_f),
                privacy: Some(PrivacyColumns {
                    epsilon,
                    epsilon_tilde: composed.epsilon_tilde,
                    rho: composed.rho,
                }),
                methods: method_columns.clone(),
                seed_count: config.seeds.len(),
            });
        }
    }

    rows.sort_by(|a, b| {
        a.lambda
            .partial_cmp(&b.lambda)
            .unwrap()
            .then(a.delta_f.unwrap_or(f64::NEG_INFINITY)
                .partial_cmp(&b.delta_f.unwrap_or(f64::NEG_INFINITY))
                .unwrap())
    });

    Ok(SweepReport {
        k,
        delta_tilde: config.delta_tilde,
        horizon_hours: config.horizon_hours,
        seeds: config.seeds.clone(),
        utility_limit_kw: config.utility_limit_kw,
        methods: config.methods.clone(),
        rows,
        note: "utility columns depend on lambda only and repeat across delta_f rows".into(),
    })
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Flat CSV of the report, one line per (λ, Δf) row.
pub fn write_csv<W: Write>(report: &SweepReport, writer: &mut W) -> Result<()> {
    let mut header = String::from("lambda,delta_f,epsilon,epsilon_tilde,rho,k,seed_count");
    for m in &report.methods {
        header.push_str(&format!(
            ",mae_direct_{m},mae_mean_{m},mae_min_{m},mae_max_{m},utility_{m}"
        ));
    }
    writeln!(writer, "{header}")?;
    for row in &report.rows {
        let mut line = format!(
            "{},{},{},{},{},{},{}",
            row.lambda,
            opt(row.delta_f),
            opt(row.privacy.map(|p| p.epsilon)),
            opt(row.privacy.map(|p| p.epsilon_tilde)),
            opt(row.privacy.map(|p| p.rho)),
            report.k,
            row.seed_count,
        );
        for m in &row.methods {
            line.push_str(&format!(
                ",{},{},{},{},{}",
                m.mae_direct,
                opt(m.mae_mean),
                opt(m.mae_min),
                opt(m.mae_max),
                opt(m.utility),
            ));
        }
        writeln!(writer, "{line}")?;
    }
    Ok(())
}

/// Long-format plot export: series,x,y. MAE and utility curves per method
/// over λ, the configured utility-limit line, and ρ per sensitivity.
pub fn write_plot_csv<W: Write>(report: &SweepReport, writer: &mut W) -> Result<()> {
    writeln!(writer, "series,x,y")?;
    let lambda_rows: Vec<&SweepRow> = {
        let mut seen = std::collections::BTreeSet::new();
        report
            .rows
            .iter()
            .filter(|r| seen.insert(r.lambda.to_bits()))
            .collect()
    };
    for (mi, method) in report.methods.iter().enumerate() {
        for row in &lambda_rows {
            let cols = &row.methods[mi];
            if let Some(mean) = cols.mae_mean {
                writeln!(writer, "mae_mean_{method},{},{}", row.lambda, mean)?;
            }
            if let Some(u) = cols.utility {
                writeln!(writer, "utility_{method},{},{}", row.lambda, u)?;
            }
        }
        // Reference line: unperturbed hierarchical MAE plus the margin.
        if let Some(base) = lambda_rows
            .iter()
            .find(|r| r.lambda == 0.0)
            .and_then(|r| r.methods[mi].mae_mean)
        {
            for row in &lambda_rows {
                writeln!(
                    writer,
                    "mae_limit_{method},{},{}",
                    row.lambda,
                    base + report.utility_limit_kw
                )?;
            }
        }
    }
    for row in &report.rows {
        if let (Some(delta_f), Some(p)) = (row.delta_f, row.privacy) {
            writeln!(writer, "rho_deltaf_{delta_f},{},{}", row.lambda, p.rho)?;
        }
    }
    Ok(())
}

/// Human-readable table with published precision: ε at five decimals, ε̃
/// and ρ at two, utilities in percent. Missing privacy columns render
/// as an em dash.
pub fn render_table(report: &SweepReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "k = {}, delta_tilde = {:e}, horizon = {} h, seeds = {:?}\n",
        report.k, report.delta_tilde, report.horizon_hours, report.seeds
    ));
    let mut header = format!("{:>10} {:>8} {:>9} {:>7} {:>6}", "lambda", "delta_f", "epsilon", "eps~", "rho");
    for m in &report.methods {
        header.push_str(&format!(" {:>14}", format!("u%_{m}")));
    }
    out.push_str(&header);
    out.push('\n');
    for row in &report.rows {
        let mut line = match (row.delta_f, row.privacy) {
            (Some(df), Some(p)) => format!(
                "{:>10} {:>8} {:>9} {:>7} {:>6}",
                row.lambda,
                df,
                format_epsilon(p.epsilon),
                format_two_decimals(p.epsilon_tilde),
                format_two_decimals(p.rho)
            ),
            _ => format!("{:>10} {:>8} {:>9} {:>7} {:>6}", row.lambda, "—", "—", "—", "—"),
        };
        for m in &row.methods {
            match m.utility {
                Some(u) => line.push_str(&format!(" {:>14}", format_two_decimals(u * 100.0))),
                None => line.push_str(&format!(" {:>14}", "—")),
            }
        }
        out.push_str(&line);
        out.push('\n');
    }
    out
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

    fn fixture() -> SweepData {
        // 400 days: the 48-hour horizon lands in the second calendar year
        // so temperature forecasting finds same-date samples a year back.
        let hours = 24 * 400;
        let mut rng = ChaCha12Rng::seed_from_u64(404);
        let station_values: Vec<f64> = (0..hours)
            .map(|i| 50.0 + 20.0 * ((i % 24) as f64 / 24.0 * std::f64::consts::TAU).sin()
                + rng.random::<f64>() * 4.0)
            .collect();
        let station = HourlySeries::new("1", t0(), station_values).unwrap();
        let zones = (1..=3)
            .map(|z| {
                let values: Vec<f64> = station
                    .values()
                    .iter()
                    .map(|v| 100.0 + z as f64 * 10.0 + 2.0 * v.unwrap())
                    .collect();
                HourlySeries::new(z.to_string(), t0(), values).unwrap()
            })
            .collect();
        SweepData {
            zones,
            stations: vec![station],
        }
    }

    fn small_config() -> SweepConfig {
        let mut config = SweepConfig::new(
            vec![Method::Segmented],
            vec![50.0],
            vec![7.57, 48.0],
            vec![1, 2],
        );
        config.horizon_hours = 48;
        config
    }

    #[test]
    fn sweep_produces_expected_rows() {
        let report = run_sweep(&small_config(), &fixture()).unwrap();
        // One λ=0 row plus one λ × two Δf.
        assert_eq!(report.rows.len(), 3);
        assert_eq!(report.rows[0].lambda, 0.0);
        assert!(report.rows[0].privacy.is_none());
        assert!(report.rows[1].privacy.is_some());
        assert!(!report.all_cells_failed());
        // Privacy columns agree with direct accounting.
        let p = report.rows[1].privacy.unwrap();
        let expected = compose_k_fold(p.epsilon, 0.0, report.k, report.delta_tilde).unwrap();
        assert_eq!(p.epsilon_tilde, expected.epsilon_tilde);
        assert_eq!(p.rho, expected.rho);
        // k defaults to the training length.
        assert_eq!(report.k, (24 * 400 - 48) as u64);
    }

    #[test]
    fn sweep_is_deterministic() {
        let a = run_sweep(&small_config(), &fixture()).unwrap();
        let b = run_sweep(&small_config(), &fixture()).unwrap();
        let mut csv_a = Vec::new();
        let mut csv_b = Vec::new();
        write_csv(&a, &mut csv_a).unwrap();
        write_csv(&b, &mut csv_b).unwrap();
        assert_eq!(csv_a, csv_b);
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn renders_dash_for_unperturbed_privacy_columns() {
        let report = run_sweep(&small_config(), &fixture()).unwrap();
        let table = render_table(&report);
        assert!(table.contains("—"));
        let mut plot = Vec::new();
        write_plot_csv(&report, &mut plot).unwrap();
        let plot = String::from_utf8(plot).unwrap();
        assert!(plot.contains("mae_mean_segmented,0,"));
        assert!(plot.contains("rho_deltaf_48,50,"));
    }

    #[test]
    fn multi_method_sweep_orders_columns_per_method() {
        // The intercept-only recipe keeps the benchmark fits cheap; the
        // point here is the two-method report layout, not accuracy.
        let mut config = SweepConfig::new(
            vec![Method::Benchmark, Method::Segmented],
            vec![200.0],
            vec![15.36],
            vec![1],
        );
        config.horizon_hours = 48;
        config.recipe = Some(crate::forecast::FeatureRecipe::intercept_only(t0()));
        let report = run_sweep(&config, &fixture()).unwrap();
        assert_eq!(report.methods, vec![Method::Benchmark, Method::Segmented]);
        for row in &report.rows {
            assert_eq!(row.methods.len(), 2);
            assert_eq!(row.methods[0].method, Method::Benchmark);
            assert_eq!(row.methods[1].method, Method::Segmented);
            assert!(row.methods.iter().all(|m| m.mae_mean.is_some()));
        }
        let mut csv = Vec::new();
        write_csv(&report, &mut csv).unwrap();
        let header = String::from_utf8(csv).unwrap();
        let header = header.lines().next().unwrap().to_string();
        assert!(header.contains("utility_benchmark"));
        assert!(header.contains("utility_segmented"));
    }

    #[test]
    fn cell_failures_are_recorded_and_the_sweep_continues() {
        // A negative reading in a raw zone series is legal for fitting but
        // violates the perturbation precondition, so every (λ, seed) cell
        // fails while the unperturbed baselines still compute.
        let mut data = fixture();
        let broken = {
            let z = &data.zones[0];
            let mut values: Vec<f64> = z.values().iter().map(|v| v.unwrap()).collect();
            values[10] = -1.0;
            HourlySeries::new(z.entity_id(), z.start(), values).unwrap()
        };
        data.zones[0] = broken;
        let report = run_sweep(&small_config(), &data).unwrap();
        assert!(report.all_cells_failed());
        let noisy_row = &report.rows[1];
        assert_eq!(noisy_row.methods[0].mae_mean, None);
        assert_eq!(noisy_row.methods[0].utility, None);
        assert_eq!(noisy_row.methods[0].failures.len(), 2, "one entry per seed");
        assert!(noisy_row.methods[0].failures[0].contains("negative"));
        // The unperturbed row is intact.
        assert!(report.rows[0].methods[0].mae_mean.is_some());
        // Rendering keeps working, with dashes for the missing cells.
        let table = render_table(&report);
        assert!(table.contains("—"));
    }

    #[test]
    fn config_validation_rejects_bad_grids() {
        let mut c = small_config();
        c.lambdas.clear();
        assert!(matches!(c.validate(), Err(Error::Config(_))));
        let mut c = small_config();
        c.lambdas = vec![-1.0];
        assert!(c.validate().is_err());
        let mut c = small_config();
        c.delta_tilde = 0.0;
        assert!(c.validate().is_err());
        let mut c = small_config();
        c.seeds.clear();
        assert!(c.validate().is_err());
    }
}
