//! Distributed noise generation: each of n households draws the difference
//! of two Gamma(1/n, λ) variables, and the n shares sum to one Laplace(λ)
//! draw. The demo checks the distribution with a two-sample KS test.
//!
//! Run with `cargo run --example distributed_noise`.

use dp_load_forecast::privacy::{sample_gamma_share, sample_laplace};
use dp_load_forecast::stats::ks_two_sample;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

fn main() -> dp_load_forecast::Result<()> {
    let n = 100u64;
    let lambda = 1.0;
    let replications = 10_000;

    let mut share_rng = ChaCha12Rng::seed_from_u64(1);
    let one_share = sample_gamma_share(n, lambda, &mut share_rng)?;
    println!(
        "a single household share for a group of {n}: {:+.4} kW (shape 1/{n}, scale {lambda})",
        one_share.value
    );

    let sums: Vec<f64> = (0..replications)
        .map(|_| {
            (0..n)
                .map(|_| sample_gamma_share(n, lambda, &mut share_rng).unwrap().value)
                .sum()
        })
        .collect();

    let mut laplace_rng = ChaCha12Rng::seed_from_u64(2);
    let direct: Vec<f64> = (0..replications)
        .map(|_| sample_laplace(lambda, &mut laplace_rng).unwrap())
        .collect();

    let ks = ks_two_sample(&sums, &direct)?;
    println!(
        "{replications} sums of {n} shares vs {replications} direct Laplace({lambda}) draws:"
    );
    println!("  KS statistic = {:.4}, p = {:.3}", ks.statistic, ks.p_value);
    println!(
        "  indistinguishable at the 1 % level: {}",
        if ks.passes(0.01) { "yes" } else { "no" }
    );

    let var = {
        let mean = sums.iter().sum::<f64>() / sums.len() as f64;
        sums.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / sums.len() as f64
    };
    println!("  empirical variance {var:.3} vs theoretical 2λ² = {:.3}", 2.0 * lambda * lambda);
    Ok(())
}
