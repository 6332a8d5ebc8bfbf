//! End-to-end tests of the `dplf` binary: exit codes, file outputs, and
//! the cross-command consistency oracles.

mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::write_fixture;
use dp_load_forecast::ingest::{read_long_csv, zone_statistics};
use dp_load_forecast::privacy::{compose_k_fold, format_epsilon, format_two_decimals};

fn dplf(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dplf"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout_str(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).to_string()
}

#[test]
fn ingest_writes_canonical_files_and_statistics() {
    let dir = tempfile::tempdir().unwrap();
    let (loads, _) = write_fixture(dir.path(), 10, 1);
    let out = dplf(
        &["ingest", "--input", loads.to_str().unwrap(), "--out-dir", "out"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let long_path = dir.path().join("out/loads_long.csv");
    let stats_path = dir.path().join("out/loads_stats.csv");
    assert!(long_path.exists() && stats_path.exists());

    // Cross-module oracle: the statistics file matches zone_statistics on
    // the canonical series.
    let series = read_long_csv(&long_path).unwrap();
    assert_eq!(series.len(), 3);
    let stats_text = std::fs::read_to_string(&stats_path).unwrap();
    for s in &series {
        let st = zone_statistics(s, 0.0).unwrap();
        let line = stats_text
            .lines()
            .find(|l| l.starts_with(&format!("{},", s.entity_id())))
            .expect("entity row present");
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields[1].parse::<usize>().unwrap(), st.count);
        assert_eq!(fields[3].parse::<f64>().unwrap(), st.mean);
        assert_eq!(fields[6].parse::<f64>().unwrap(), st.median);
    }
}

#[test]
fn ingest_reports_malformed_rows_with_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let (loads, _) = write_fixture(dir.path(), 3, 2);
    let mut text = std::fs::read_to_string(&loads).unwrap();
    // Corrupt one numeric cell on data line 3 (file line 4).
    let lines: Vec<&str> = text.lines().collect();
    let corrupted = lines[3].replacen(',', ",zzz", 1);
    let corrupted_line = corrupted.clone();
    let mut new_lines = lines.clone();
    new_lines[3] = &corrupted_line;
    text = new_lines.join("\n");
    text.push('\n');
    std::fs::write(&loads, text).unwrap();

    let out = dplf(
        &["ingest", "--input", loads.to_str().unwrap(), "--out-dir", "out"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains(":4"), "stderr should name line 4: {stderr}");
}

#[test]
fn stats_command_prints_per_entity_rows() {
    let dir = tempfile::tempdir().unwrap();
    let (loads, _) = write_fixture(dir.path(), 5, 3);
    let out = dplf(&["stats", "--data", loads.to_str().unwrap()], dir.path());
    assert!(out.status.success());
    let text = stdout_str(&out);
    assert!(text.starts_with("entity_id,count,gaps,mean"));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn account_matches_published_rows_and_rejects_bad_params() {
    let dir = tempfile::tempdir().unwrap();
    let out = dplf(
        &[
            "account", "--lambda", "56234", "--delta-f", "15.36", "--k", "38070",
            "--delta-tilde", "1e-9",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let text = stdout_str(&out);
    let row = text.lines().nth(1).unwrap();
    let fields: Vec<&str> = row.split(',').collect();
    assert_eq!(fields[4], "0.00027");
    assert_eq!(fields[5], "0.32");
    assert_eq!(fields[6], "0.58");

    let out = dplf(
        &[
            "account", "--lambda", "100000", "--delta-f", "48", "--k", "38070",
            "--delta-tilde", "1e-9",
        ],
        dir.path(),
    );
    let text = stdout_str(&out);
    let fields: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(fields[5], "0.57");
    assert_eq!(fields[6], "0.64");

    // Δf = 0 is outside the domain: validation exit code.
    let out = dplf(
        &["account", "--lambda", "1", "--delta-f", "0", "--k", "1"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn perturb_is_seeded_and_requires_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let (loads, _) = write_fixture(dir.path(), 5, 4);
    let run = |out_name: &str| {
        let out = dplf(
            &[
                "perturb", "--loads", loads.to_str().unwrap(), "--lambda", "100",
                "--seed", "9", "--out", out_name,
            ],
            dir.path(),
        );
        assert!(out.status.success());
        std::fs::read(dir.path().join(out_name)).unwrap()
    };
    let a = run("a.csv");
    let b = run("b.csv");
    assert_eq!(a, b, "same seed must give identical perturbations");

    // Perturbed readings may be negative and must parse back.
    let series = read_long_csv(&dir.path().join("a.csv")).unwrap();
    assert_eq!(series.len(), 3);

    // Household mode needs the group size.
    let out = dplf(
        &[
            "perturb", "--loads", loads.to_str().unwrap(), "--lambda", "100",
            "--seed", "9", "--mode", "household", "--out", "c.csv",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));

    // A missing --seed is a usage error (clap exits 2).
    let out = dplf(
        &["perturb", "--loads", loads.to_str().unwrap(), "--lambda", "100", "--out", "d.csv"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn fit_then_forecast_produces_zone_and_region_series() {
    let dir = tempfile::tempdir().unwrap();
    let (loads, temps) = write_fixture(dir.path(), 400, 5);
    let out = dplf(
        &[
            "fit", "--loads", loads.to_str().unwrap(), "--temps", temps.to_str().unwrap(),
            "--method", "segmented", "--out", "models.json",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("models.json").exists());

    let out = dplf(
        &[
            "forecast", "--model", "models.json", "--temps", temps.to_str().unwrap(),
            "--start", "2005-02-01T00:00:00", "--hours", "24", "--out", "forecast.csv",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let series = read_long_csv(&dir.path().join("forecast.csv")).unwrap();
    let ids: Vec<&str> = series.iter().map(|s| s.entity_id()).collect();
    assert_eq!(ids, vec!["1", "2", "3", "REGION"]);
    assert!(series.iter().all(|s| s.len() == 24 && s.gap_count() == 0));

    // The regional forecast is the pointwise zone sum.
    for i in 0..24 {
        let sum: f64 = series[..3].iter().map(|s| s.values()[i].unwrap()).sum();
        assert_eq!(series[3].values()[i].unwrap(), sum);
    }
}

#[test]
fn sweep_report_columns_agree_with_account() {
    let dir = tempfile::tempdir().unwrap();
    let (loads, temps) = write_fixture(dir.path(), 400, 6);
    std::fs::write(
        dir.path().join("sweep.toml"),
        format!(
            r#"
[data]
loads = "{}"
temperatures = "{}"

[forecast]
methods = ["segmented"]
horizon_hours = 48

[privacy]
lambdas = [5000.0]
delta_fs = [15.36]
delta_tilde = 1e-9

[run]
seeds = [3]
output_dir = "swp"
"#,
            loads.display(),
            temps.display()
        ),
    )
    .unwrap();
    let out = dplf(&["sweep", "--config", "sweep.toml"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let csv = std::fs::read_to_string(dir.path().join("swp/sweep.csv")).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(
        &header[..7],
        &["lambda", "delta_f", "epsilon", "epsilon_tilde", "rho", "k", "seed_count"]
    );
    // Row order: λ=0 first, then the perturbed row.
    let unperturbed: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(unperturbed[0], "0");
    assert_eq!(unperturbed[2], "");
    let perturbed: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(perturbed[0], "5000");
    assert_eq!(perturbed[1], "15.36");
    for field in &perturbed[7..] {
        assert!(!field.is_empty(), "all method columns populated: {perturbed:?}");
    }

    // Cross-command oracle: the privacy columns match direct accounting.
    let k: u64 = perturbed[5].parse().unwrap();
    let eps: f64 = perturbed[2].parse().unwrap();
    let composed = compose_k_fold(eps, 0.0, k, 1e-9).unwrap();
    let account_out = dplf(
        &[
            "account", "--lambda", "5000", "--delta-f", "15.36", "--k",
            &k.to_string(), "--delta-tilde", "1e-9",
        ],
        dir.path(),
    );
    let text = stdout_str(&account_out);
    let fields: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(fields[4], format_epsilon(eps));
    assert_eq!(fields[5], format_two_decimals(composed.epsilon_tilde));
    let report_et: f64 = perturbed[3].parse().unwrap();
    assert!((report_et - composed.epsilon_tilde).abs() < 1e-12);

    // Re-rendering the stored JSON reproduces the CSV byte for byte.
    let out = dplf(
        &[
            "report", "--input", "swp/sweep.json", "--format", "csv", "--out",
            "rerendered.csv",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let rerendered = std::fs::read_to_string(dir.path().join("rerendered.csv")).unwrap();
    assert_eq!(csv, rerendered);
}

#[test]
fn benchmark_sweep_runs_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let (loads, temps) = write_fixture(dir.path(), 400, 21);
    std::fs::write(
        dir.path().join("sweep.toml"),
        format!(
            r#"
[data]
loads = "{}"
temperatures = "{}"

[forecast]
methods = ["benchmark"]
horizon_hours = 48

[privacy]
lambdas = [2000.0]
delta_fs = [48.0]

[run]
seeds = [5]
output_dir = "bench"
"#,
            loads.display(),
            temps.display()
        ),
    )
    .unwrap();
    let out = dplf(&["sweep", "--config", "sweep.toml", "--jobs", "4"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("bench/sweep.csv")).unwrap();
    assert!(csv.lines().next().unwrap().contains("utility_benchmark"));
    // Unperturbed hierarchical benchmark on this temperature-driven
    // fixture tracks the signal closely: the λ=0 MAE stays small relative
    // to the regional level (~700 kW).
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    let mae0: f64 = row[8].parse().unwrap();
    assert!(mae0 < 50.0, "unperturbed benchmark MAE {mae0}");

    let plot_out = dplf(
        &["report", "--input", "bench/sweep.json", "--format", "plot"],
        dir.path(),
    );
    assert!(plot_out.status.success());
    let plot = stdout_str(&plot_out);
    assert!(plot.starts_with("series,x,y"));
    assert!(plot.contains("mae_limit_benchmark"));
    assert!(plot.contains("rho_deltaf_48,2000,"));
}

#[test]
fn sweep_flags_override_config_values() {
    let dir = tempfile::tempdir().unwrap();
    let (loads, temps) = write_fixture(dir.path(), 400, 51);
    std::fs::write(
        dir.path().join("sweep.toml"),
        format!(
            r#"
[data]
loads = "{}"
temperatures = "{}"

[forecast]
methods = ["segmented"]
horizon_hours = 168

[privacy]
lambdas = [9999.0]
delta_fs = [7.57]

[run]
seeds = [1, 2, 3]
output_dir = "swp"
"#,
            loads.display(),
            temps.display()
        ),
    )
    .unwrap();
    let out = dplf(
        &[
            "sweep", "--config", "sweep.toml", "--lambdas", "750", "--seeds", "4,5",
            "--horizon-hours", "48",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("swp/sweep.csv")).unwrap();
    let perturbed: Vec<&str> = csv.lines().nth(2).unwrap().split(',').collect();
    assert_eq!(perturbed[0], "750", "lambda override applies");
    assert_eq!(perturbed[6], "2", "seed override applies");
    let json = std::fs::read_to_string(dir.path().join("swp/sweep.json")).unwrap();
    assert!(json.contains("\"horizon_hours\": 48"));
    assert!(!csv.contains("9999"));
}

#[test]
fn sweep_output_is_invariant_under_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let (loads, temps) = write_fixture(dir.path(), 400, 41);
    std::fs::write(
        dir.path().join("sweep.toml"),
        format!(
            r#"
[data]
loads = "{}"
temperatures = "{}"

[forecast]
methods = ["segmented"]
horizon_hours = 48

[privacy]
lambdas = [500.0, 5000.0]
delta_fs = [7.57]

[run]
seeds = [1, 2]
output_dir = "unused"
"#,
            loads.display(),
            temps.display()
        ),
    )
    .unwrap();
    let run = |jobs: &str, out: &str| {
        let status = Command::new(env!("CARGO_BIN_EXE_dplf"))
            .args(["sweep", "--config", "sweep.toml", "--jobs", jobs, "--out-dir", out])
            .current_dir(dir.path())
            .status()
            .unwrap();
        assert!(status.success());
    };
    run("1", "serial");
    run("4", "parallel");
    for file in ["sweep.csv", "sweep.json", "plot.csv"] {
        let a = std::fs::read(dir.path().join("serial").join(file)).unwrap();
        let b = std::fs::read(dir.path().join("parallel").join(file)).unwrap();
        assert_eq!(a, b, "{file} depends on the worker count");
    }
}

#[test]
fn sweep_exits_1_when_every_cell_fails() {
    let dir = tempfile::tempdir().unwrap();
    let (loads, temps) = write_fixture(dir.path(), 400, 31);
    // Rewrite the loads in the long layout with one negative reading:
    // fitting tolerates it, perturbation rejects it, so every noise cell
    // fails while the baselines succeed.
    let mut series = dp_load_forecast::ingest::read_series_file(&loads).unwrap();
    series[0].values_mut()[7] = Some(-5.0);
    let long_loads = dir.path().join("loads_long.csv");
    dp_load_forecast::ingest::write_long_csv_file(&long_loads, &series).unwrap();

    std::fs::write(
        dir.path().join("sweep.toml"),
        format!(
            r#"
[data]
loads = "{}"
temperatures = "{}"

[forecast]
methods = ["segmented"]
horizon_hours = 48

[privacy]
lambdas = [100.0]
delta_fs = [7.57]

[run]
seeds = [1]
output_dir = "swp"
"#,
            long_loads.display(),
            temps.display()
        ),
    )
    .unwrap();
    let out = dplf(&["sweep", "--config", "sweep.toml"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("every sweep cell failed"), "{stderr}");
    // The report files were still written before the failing exit.
    assert!(dir.path().join("swp/sweep.csv").exists());
}

#[test]
fn sweep_rejects_invalid_configs_with_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("bad.toml"),
        "[data]\nloads = \"x\"\ntemperatures = \"y\"\n\n[forecast]\nmethods = []\n\n[privacy]\n\n[run]\nseeds = [1]\noutput_dir = \"o\"\n",
    )
    .unwrap();
    let out = dplf(&["sweep", "--config", "bad.toml"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn data_dir_env_var_resolves_relative_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let data_dir = dir.path().join("data");
    std::fs::create_dir_all(&data_dir).unwrap();
    let (_, _) = write_fixture(&data_dir, 5, 7);
    let work = dir.path().join("work");
    std::fs::create_dir_all(&work).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_dplf"))
        .args(["stats", "--data", "loads.csv"])
        .env("DPLF_DATA_DIR", &data_dir)
        .current_dir(&work)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout_str(&out).lines().count() > 1);
}
