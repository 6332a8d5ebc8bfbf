//! Privacy accounting end to end: from a noise scale and a sensitivity to
//! the per-release ε, the composed ε̃ after 4.5 years of hourly releases,
//! and the re-identification confidence ρ a household can actually read.
//!
//! Run with `cargo run --example account_risk`.

use dp_load_forecast::ingest::sensitivity_catalog;
use dp_load_forecast::privacy::{
    compose_k_fold, epsilon_from_rho, epsilon_from_scale, format_epsilon, format_two_decimals,
};

fn main() -> dp_load_forecast::Result<()> {
    // 4.5 years of hourly readings of the same households.
    let k = 38_070;
    // One in the ~117.7 million US households.
    let delta_tilde = 1e-9;
    let lambdas = [10_000.0, 56_234.0, 100_000.0];

    println!("k = {k} hourly releases, delta_tilde = {delta_tilde:e}");
    println!();
    println!(
        "{:>10} {:>8} {:>30} {:>9} {:>7} {:>6}",
        "lambda", "delta_f", "sensitivity argument", "epsilon", "eps~", "rho"
    );
    for lambda in lambdas {
        for entry in &sensitivity_catalog().entries {
            let epsilon = epsilon_from_scale(entry.delta_f, lambda)?;
            let composed = compose_k_fold(epsilon, 0.0, k, delta_tilde)?;
            println!(
                "{:>10} {:>8} {:>30} {:>9} {:>7} {:>6}",
                lambda,
                entry.delta_f,
                entry.label,
                format_epsilon(epsilon),
                format_two_decimals(composed.epsilon_tilde),
                format_two_decimals(composed.rho),
            );
        }
    }

    // The inverse direction: what composed guarantee keeps an adversary's
    // confidence at 60 %?
    let target = epsilon_from_rho(0.6)?;
    println!();
    println!(
        "a re-identification confidence of 0.60 corresponds to a composed guarantee of {:.4}",
        target
    );
    Ok(())
}
