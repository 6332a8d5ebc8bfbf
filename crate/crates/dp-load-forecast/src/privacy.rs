//! Privacy mathematics: Laplace and gamma-share noise, k-fold adaptive
//! composition, and conversion of guarantees into re-identification
//! confidence.
//!
//! The Laplace distribution with scale λ is infinitely divisible: a sum of
//! n differences of independent Gamma(1/n, λ) draws is again Laplace(λ).
//! That lets every household add a small gamma share locally while the zone
//! aggregate carries exact Laplace noise. Releasing k readings of the same
//! households composes; the accumulated guarantee ε̃ is the minimum of the
//! three k-fold adaptive composition bounds, and maps to an adversary's
//! presence-detection confidence ρ = 1/(1+e^{−ε̃}).

use rand::Rng;
use rand_distr::{Distribution, Gamma, Open01};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-release Laplace-mechanism parameters.
///
/// `epsilon` is always exactly `delta_f / lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrivacyParams {
    /// Noise scale λ in kW.
    pub lambda: f64,
    /// Sensitivity Δf in kW: the largest hourly power one household can
    /// contribute.
    pub delta_f: f64,
    /// Per-release guarantee ε = Δf/λ.
    pub epsilon: f64,
    /// Per-release failure probability δ.
    pub delta: f64,
}

impl PrivacyParams {
    pub fn new(lambda: f64, delta_f: f64, delta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&delta) {
            return Err(Error::domain(format!("delta {delta} outside [0, 1]")));
        }
        let epsilon = epsilon_from_scale(delta_f, lambda)?;
        Ok(PrivacyParams {
            lambda,
            delta_f,
            epsilon,
            delta,
        })
    }
}

/// Accumulated guarantee after k releases, with its interpretable risk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComposedGuarantee {
    /// Composed guarantee ε̃ under k-fold adaptive composition.
    pub epsilon_tilde: f64,
    /// Slack probability δ̃ chosen for the composition bound.
    pub delta_tilde: f64,
    /// Overall failure probability 1 − (1−δ)^k (1−δ̃).
    pub delta_total: f64,
    /// Number of composed releases.
    pub k: u64,
    /// Re-identification confidence ρ = 1/(1+e^{−ε̃}), in [0.5, 1].
    pub rho: f64,
}

/// One household's locally generated noise share.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseShare {
    /// The share G1 − G2 in kW; any real number.
    pub value: f64,
    /// Group size the share was generated for.
    pub n: u64,
    /// Scale λ used.
    pub lambda: f64,
}

/// Per-release guarantee from sensitivity and scale: ε = Δf/λ.
pub fn epsilon_from_scale(delta_f: f64, lambda: f64) -> Result<f64> {
    if !(delta_f > 0.0) {
        return Err(Error::domain(format!("sensitivity {delta_f} must be > 0")));
    }
    if !(lambda > 0.0) {
        return Err(Error::domain(format!("noise scale {lambda} must be > 0")));
    }
    Ok(delta_f / lambda)
}

/// One draw from Laplace(0, λ) by inverse-CDF sampling.
pub fn sample_laplace<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::domain(format!("noise scale {lambda} must be > 0")));
    }
    let u: f64 = rng.sample(Open01);
    let centered = u - 0.5;
    Ok(-lambda * centered.signum() * (1.0 - 2.0 * centered.abs()).ln())
}

/// One household share G1(1/n, λ) − G2(1/n, λ); n shares sum to Laplace(λ).
pub fn sample_gamma_share<R: Rng + ?Sized>(
    n: u64,
    lambda: f64,
    rng: &mut R,
) -> Result<NoiseShare> {
    if n == 0 {
        return Err(Error::domain("group size n must be at least 1"));
    }
    if !(lambda > 0.0) {
        return Err(Error::domain(format!("noise scale {lambda} must be > 0")));
    }
    let gamma = Gamma::new(1.0 / n as f64, lambda)
        .map_err(|e| Error::domain(format!("gamma sampler: {e}")))?;
    let g1 = gamma.sample(rng);
    let g2 = gamma.sample(rng);
    Ok(NoiseShare {
        value: g1 - g2,
        n,
        lambda,
    })
}

/// The three k-fold adaptive composition bounds, in order:
/// plain sequential kε, the data-dependent bound, and the δ̃-only bound.
pub fn composition_branches(epsilon: f64, k: u64, delta_tilde: f64) -> (f64, f64, f64) {
    let kf = k as f64;
    let plain = kf * epsilon;
    let front = epsilon.exp_m1() * kf * epsilon / (epsilon.exp() + 1.0);
    let data_dependent = front
        + epsilon
            * (2.0 * kf * (std::f64::consts::E + kf.sqrt() * epsilon / delta_tilde).ln()).sqrt();
    let slack_only = front + epsilon * (2.0 * kf * (1.0 / delta_tilde).ln()).sqrt();
    (plain, data_dependent, slack_only)
}

/// Accumulated guarantee after k adaptive releases of an (ε, δ) mechanism,
/// allowing slack δ̃. ε̃ is the minimum of the three bounds evaluated in
/// double precision.
pub fn compose_k_fold(
    epsilon: f64,
    delta: f64,
    k: u64,
    delta_tilde: f64,
) -> Result<ComposedGuarantee> {
    if !(epsilon > 0.0) {
        return Err(Error::domain(format!("epsilon {epsilon} must be > 0")));
    }
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::domain(format!("delta {delta} outside [0, 1]")));
    }
    if k == 0 {
        return Err(Error::domain("k must be at least 1"));
    }
    if !(delta_tilde > 0.0 && delta_tilde <= 1.0) {
        return Err(Error::domain(format!(
            "delta_tilde {delta_tilde} outside (0, 1]"
        )));
    }
    let (a, b, c) = composition_branches(epsilon, k, delta_tilde);
    let epsilon_tilde = a.min(b).min(c);
    let delta_total = 1.0 - (1.0 - delta).powf(k as f64) * (1.0 - delta_tilde);
    Ok(ComposedGuarantee {
        epsilon_tilde,
        delta_tilde,
        delta_total,
        k,
        rho: rho_from_epsilon(epsilon_tilde)?,
    })
}

/// Presence-detection confidence ρ = 1/(1+e^{−ε}); 0.5 is random guessing.
pub fn rho_from_epsilon(epsilon_tilde: f64) -> Result<f64> {
    if !(epsilon_tilde >= 0.0) {
        return Err(Error::domain(format!(
            "epsilon {epsilon_tilde} must be nonnegative"
        )));
    }
    Ok(1.0 / (1.0 + (-epsilon_tilde).exp()))
}

/// Inverse of [`rho_from_epsilon`]: ε = ln(ρ/(1−ρ)) for ρ in (0.5, 1).
pub fn epsilon_from_rho(rho: f64) -> Result<f64> {
    if !(rho > 0.5 && rho < 1.0) {
        return Err(Error::domain(format!("rho {rho} outside (0.5, 1)")));
    }
    Ok((rho / (1.0 - rho)).ln())
}

/// ε rendered at report precision (5 decimals).
pub fn format_epsilon(epsilon: f64) -> String {
    round_half_even(epsilon, 5)
}

/// ε̃ and ρ rendered at report precision (2 decimals).
pub fn format_two_decimals(value: f64) -> String {
    round_half_even(value, 2)
}

/// Decimal rounding with ties-to-even, applied to the value's decimal
/// expansion rather than its raw binary form. Quotients like 10.05/10000
/// sit a few ulps above the exact decimal 0.001005; rounding the decimal
/// intent yields 0.00100 where binary-faithful rounding would give 0.00101.
fn round_half_even(value: f64, places: usize) -> String {
    if !value.is_finite() {
        return format!("{value}");
    }
    let guarded = format!("{:.*}", places + 7, value);
    let (sign, digits) = match guarded.strip_prefix('-') {
        Some(rest) => ("-", rest),
        None => ("", guarded.as_str()),
    };
    let (int_part, frac_part) = digits.split_once('.').expect("formatted with a fraction");
    let kept = &frac_part[..places];
    let rest = &frac_part[places..];

    let mut digits: Vec<u8> = int_part
        .bytes()
        .chain(kept.bytes())
        .map(|b| b - b'0')
        .collect();
    let round_up = {
        let half = {
            let mut h = vec![b'0'; rest.len()];
            h[0] = b'5';
            h
        };
        match rest.as_bytes().cmp(&half[..]) {
            std::cmp::Ordering::Greater => true,
            std::cmp::Ordering::Less => false,
            std::cmp::Ordering::Equal => digits.last().is_some_and(|d| d % 2 == 1),
        }
    };
    if round_up {
        let mut i = digits.len();
        loop {
            if i == 0 {
                digits.insert(0, 1);
                break;
            }
            i -= 1;
            if digits[i] == 9 {
                digits[i] = 0;
            } else {
                digits[i] += 1;
                break;
            }
        }
    }

    let int_len = digits.len() - places;
    let mut out = String::with_capacity(digits.len() + 2);
    out.push_str(sign);
    for (i, d) in digits.iter().enumerate() {
        if i == int_len {
            out.push('.');
        }
        out.push((b'0' + d) as char);
    }
    out
}
