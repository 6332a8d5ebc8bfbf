//! Thin command-line front end over the library: ingest data, fit and run
//! forecasts, perturb series, account privacy, and drive sweeps.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chrono::NaiveDateTime;
use clap::{Parser, Subcommand, ValueEnum};

use dp_load_forecast::config::{ExperimentConfig, DATA_DIR_ENV};
use dp_load_forecast::error::{Error, Result};
use dp_load_forecast::eval::{self, sweep};
use dp_load_forecast::forecast::{
    fit_model_set, forecast_from_models, FitOptions, Method, ModelSet,
};
use dp_load_forecast::ingest::{
    read_series_file, write_long_csv_file, zone_statistics, TIMESTAMP_FORMAT,
};
use dp_load_forecast::metering::{aggregate_region, perturb_household, perturb_zone_aggregate};
use dp_load_forecast::privacy::{
    compose_k_fold, epsilon_from_scale, format_epsilon, format_two_decimals,
};
use dp_load_forecast::rng::Substreams;
use dp_load_forecast::series::{entity_order, HourlySeries};

#[derive(Parser)]
#[command(name = "dplf", version, about = "Differentially private load forecasting")]
struct Cli {
    /// Worker threads for parallel commands; defaults to the available
    /// parallelism.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Scope {
    /// One model per zone (hierarchical forecasting).
    Zones,
    /// One model on the summed regional series (direct forecasting).
    Region,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PerturbMode {
    /// One Laplace draw per reading, valid for zone aggregates.
    Zone,
    /// One gamma share per reading, valid for household series.
    Household,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Table,
    Csv,
    Plot,
}

#[derive(Subcommand)]
enum Command {
    /// Convert a wide file to the canonical long layout plus statistics.
    Ingest {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        /// Readings strictly below this value count as outliers.
        #[arg(long, default_value_t = 0.0)]
        floor: f64,
    },
    /// Print per-entity descriptive statistics as CSV.
    Stats {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        floor: f64,
    },
    /// Fit forecast models and write a model document.
    Fit {
        #[arg(long)]
        loads: PathBuf,
        #[arg(long)]
        temps: PathBuf,
        #[arg(long)]
        method: Method,
        #[arg(long, value_enum, default_value_t = Scope::Zones)]
        scope: Scope,
        #[arg(long)]
        out: PathBuf,
    },
    /// Add calibrated noise to load series.
    Perturb {
        #[arg(long)]
        loads: PathBuf,
        #[arg(long)]
        lambda: f64,
        /// Master seed; required so runs are reproducible.
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = PerturbMode::Zone)]
        mode: PerturbMode,
        /// Group size n for household mode.
        #[arg(long)]
        zone_size: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Predict a horizon from a fitted model document.
    Forecast {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        temps: PathBuf,
        /// Horizon start, e.g. 2008-07-01T00:00:00.
        #[arg(long)]
        start: String,
        #[arg(long)]
        hours: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Privacy accounting for one (lambda, delta_f, k) choice.
    Account {
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        delta_f: f64,
        #[arg(long)]
        k: u64,
        #[arg(long, default_value_t = 1e-9)]
        delta_tilde: f64,
        /// Per-release failure probability.
        #[arg(long, default_value_t = 0.0)]
        delta: f64,
    },
    /// Run the privacy-utility sweep described by a config file.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's output directory.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Overrides the config's seed list.
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        /// Overrides the config's lambda grid.
        #[arg(long, value_delimiter = ',')]
        lambdas: Option<Vec<f64>>,
        /// Overrides the config's forecast horizon.
        #[arg(long)]
        horizon_hours: Option<usize>,
    },
    /// Re-render a stored sweep report.
    Report {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = ReportFormat::Table)]
        format: ReportFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format(|buf, record| writeln!(buf, "{} {}: {}", record.level(), record.target(), record.args()))
        .init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

/// Relative input paths that do not exist locally fall back to the
/// directory named by `DPLF_DATA_DIR`.
fn resolve_input(path: &Path) -> PathBuf {
    if path.is_relative() && !path.exists() {
        if let Ok(base) = std::env::var(DATA_DIR_ENV) {
            return Path::new(&base).join(path);
        }
    }
    path.to_path_buf()
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ingest { input, out_dir, floor } => cmd_ingest(&input, &out_dir, floor),
        Command::Stats { data, floor } => cmd_stats(&data, floor),
        Command::Fit { loads, temps, method, scope, out } => {
            cmd_fit(&loads, &temps, method, scope, &out)
        }
        Command::Perturb { loads, lambda, seed, mode, zone_size, out } => {
            cmd_perturb(&loads, lambda, seed, mode, zone_size, &out)
        }
        Command::Forecast { model, temps, start, hours, out } => {
            cmd_forecast(&model, &temps, &start, hours, &out)
        }
        Command::Account { lambda, delta_f, k, delta_tilde, delta } => {
            cmd_account(lambda, delta_f, k, delta_tilde, delta)
        }
        Command::Sweep { config, out_dir, seeds, lambdas, horizon_hours } => {
            let overrides = SweepOverrides { seeds, lambdas, horizon_hours };
            cmd_sweep(&config, out_dir, overrides, cli.jobs)
        }
        Command::Report { input, format, out } => cmd_report(&input, format, out),
    }
}

fn write_stats_csv<W: Write>(writer: &mut W, series: &[HourlySeries], floor: f64) -> Result<()> {
    writeln!(
        writer,
        "entity_id,count,gaps,mean,min,q1,median,q3,max,outliers_below_floor"
    )?;
    for s in series {
        let st = zone_statistics(s, floor)?;
        writeln!(
            writer,
            "{},{},{},{},{},{},{},{},{},{}",
            s.entity_id(),
            st.count,
            st.gaps,
            st.mean,
            st.min,
            st.q1,
            st.median,
            st.q3,
            st.max,
            st.outliers_below_floor
        )?;
    }
    Ok(())
}

fn cmd_ingest(input: &Path, out_dir: &Path, floor: f64) -> Result<()> {
    let input = resolve_input(input);
    let series = read_series_file(&input)?;
    std::fs::create_dir_all(out_dir)?;
    let stem = input
        .file_stem()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_else(|| "data".to_string());

    let long_path = out_dir.join(format!("{stem}_long.csv"));
    write_long_csv_file(&long_path, &series)?;

    let stats_path = out_dir.join(format!("{stem}_stats.csv"));
    let mut stats_file = std::io::BufWriter::new(std::fs::File::create(&stats_path)?);
    write_stats_csv(&mut stats_file, &series, floor)?;

    println!("{}", long_path.display());
    println!("{}", stats_path.display());
    Ok(())
}

fn cmd_stats(data: &Path, floor: f64) -> Result<()> {
    let series = read_series_file(&resolve_input(data))?;
    let stdout = std::io::stdout();
    write_stats_csv(&mut stdout.lock(), &series, floor)
}

fn load_sorted(path: &Path) -> Result<Vec<HourlySeries>> {
    let mut series = read_series_file(&resolve_input(path))?;
    series.sort_by(|a, b| entity_order(a.entity_id(), b.entity_id()));
    Ok(series)
}

fn cmd_fit(loads: &Path, temps: &Path, method: Method, scope: Scope, out: &Path) -> Result<()> {
    let zones = load_sorted(loads)?;
    let stations = load_sorted(temps)?;
    let options = FitOptions::new(method);
    let models = match scope {
        Scope::Zones => fit_model_set(&zones, &stations, &options)?,
        Scope::Region => {
            let region = aggregate_region(&zones)?;
            fit_model_set(std::slice::from_ref(&region), &stations, &options)?
        }
    };
    models.save(out)?;
    for z in &models.zones {
        log::info!(
            "fitted {} for {} via station {} (training MAE {:.3})",
            models.method,
            z.zone_id,
            z.model.station_id(),
            z.training.training_mae
        );
    }
    println!("{}", out.display());
    Ok(())
}

fn cmd_perturb(
    loads: &Path,
    lambda: f64,
    seed: u64,
    mode: PerturbMode,
    zone_size: Option<u64>,
    out: &Path,
) -> Result<()> {
    let series = load_sorted(loads)?;
    let streams = Substreams::new(seed);
    let perturbed: Vec<HourlySeries> = match mode {
        PerturbMode::Zone => series
            .iter()
            .map(|s| perturb_zone_aggregate(s, lambda, &streams))
            .collect::<Result<_>>()?,
        PerturbMode::Household => {
            let n = zone_size.ok_or_else(|| {
                Error::domain("household mode requires --zone-size (the group size n)")
            })?;
            series
                .iter()
                .map(|s| perturb_household(s, n, lambda, &streams))
                .collect::<Result<_>>()?
        }
    };
    write_long_csv_file(out, &perturbed)?;
    println!("{}", out.display());
    Ok(())
}

fn cmd_forecast(model: &Path, temps: &Path, start: &str, hours: usize, out: &Path) -> Result<()> {
    let models = ModelSet::load(&resolve_input(model))?;
    let stations = load_sorted(temps)?;
    let horizon_start = NaiveDateTime::parse_from_str(start, TIMESTAMP_FORMAT)
        .map_err(|e| Error::domain(format!("invalid --start `{start}`: {e}")))?;
    if hours == 0 {
        return Err(Error::domain("--hours must be at least 1"));
    }
    let forecast = forecast_from_models(&models, &stations, horizon_start, hours, 0.0)?;
    let mut series: Vec<HourlySeries> = forecast.zones.iter().map(|z| z.to_series()).collect();
    if forecast.zones.len() > 1 {
        series.push(forecast.region.to_series());
    }
    write_long_csv_file(out, &series)?;
    println!("{}", out.display());
    Ok(())
}

fn cmd_account(lambda: f64, delta_f: f64, k: u64, delta_tilde: f64, delta: f64) -> Result<()> {
    let epsilon = epsilon_from_scale(delta_f, lambda)?;
    let composed = compose_k_fold(epsilon, delta, k, delta_tilde)?;
    println!("lambda,delta_f,k,delta_tilde,epsilon,epsilon_tilde,rho,delta_total");
    println!(
        "{},{},{},{:e},{},{},{},{:e}",
        lambda,
        delta_f,
        k,
        delta_tilde,
        format_epsilon(epsilon),
        format_two_decimals(composed.epsilon_tilde),
        format_two_decimals(composed.rho),
        composed.delta_total
    );
    Ok(())
}

struct SweepOverrides {
    seeds: Option<Vec<u64>>,
    lambdas: Option<Vec<f64>>,
    horizon_hours: Option<usize>,
}

fn cmd_sweep(
    config_path: &Path,
    out_dir: Option<PathBuf>,
    overrides: SweepOverrides,
    jobs: Option<usize>,
) -> Result<()> {
    let config = ExperimentConfig::load(&resolve_input(config_path))?;
    let zones = read_series_file(&config.loads_path())?;
    let stations = read_series_file(&config.temperatures_path())?;
    let data = sweep::SweepData { zones, stations };
    let mut sweep_config = config.to_sweep_config();
    if let Some(seeds) = overrides.seeds {
        sweep_config.seeds = seeds;
    }
    if let Some(lambdas) = overrides.lambdas {
        sweep_config.lambdas = lambdas;
    }
    if let Some(h) = overrides.horizon_hours {
        sweep_config.horizon_hours = h;
    }
    sweep_config.validate()?;

    let report = match jobs {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("cannot build a {n}-thread pool: {e}")))?;
            pool.install(|| eval::run_sweep(&sweep_config, &data))?
        }
        None => eval::run_sweep(&sweep_config, &data)?,
    };

    let out_dir = out_dir.unwrap_or_else(|| config.run.output_dir.clone());
    std::fs::create_dir_all(&out_dir)?;
    let json_path = out_dir.join("sweep.json");
    serde_json::to_writer_pretty(
        std::io::BufWriter::new(std::fs::File::create(&json_path)?),
        &report,
    )?;
    let csv_path = out_dir.join("sweep.csv");
    sweep::write_csv(&report, &mut std::io::BufWriter::new(std::fs::File::create(&csv_path)?))?;
    let plot_path = out_dir.join("plot.csv");
    sweep::write_plot_csv(
        &report,
        &mut std::io::BufWriter::new(std::fs::File::create(&plot_path)?),
    )?;

    print!("{}", sweep::render_table(&report));
    for row in &report.rows {
        for m in &row.methods {
            for failure in &m.failures {
                log::warn!("lambda {} method {}: {failure}", row.lambda, m.method);
            }
        }
    }
    if report.all_cells_failed() {
        return Err(Error::Runtime("every sweep cell failed".into()));
    }
    Ok(())
}

fn cmd_report(input: &Path, format: ReportFormat, out: Option<PathBuf>) -> Result<()> {
    let report: sweep::SweepReport = serde_json::from_reader(std::io::BufReader::new(
        std::fs::File::open(resolve_input(input))?,
    ))?;
    let mut rendered = Vec::new();
    match format {
        ReportFormat::Table => rendered.extend_from_slice(sweep::render_table(&report).as_bytes()),
        ReportFormat::Csv => sweep::write_csv(&report, &mut rendered)?,
        ReportFormat::Plot => sweep::write_plot_csv(&report, &mut rendered)?,
    }
    match out {
        Some(path) => {
            std::fs::write(&path, rendered)?;
            println!("{}", path.display());
        }
        None => std::io::stdout().write_all(&rendered)?,
    }
    Ok(())
}
