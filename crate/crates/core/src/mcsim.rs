//! Independent Monte Carlo oracle for the per-draw rate laws.
//!
//! Estimates outage probabilities and ε-outage capacities by direct channel
//! simulation: draw the user count from the pmf, draw unit-mean exponential
//! power gains, evaluate the chosen per-draw rate law, and read off
//! empirical tail statistics. The oracle deliberately goes through
//! [`crate::ratebounds`] only — none of the kernel/quadrature machinery the
//! semi-analytic solvers integrate with — so solver/oracle agreement is a
//! meaningful cross-check rather than a tautology.
//!
//! Outage estimates carry the binomial standard error `√(p(1−p)/N)`;
//! empirical capacities are order-statistic quantiles with linear
//! interpolation, with a density-adjusted quantile standard error available
//! from the spacing of order statistics.

use crate::capacity::OutageQuery;
use crate::mixture::MAX_ENUMERATED_INTERFERERS;
use crate::model::{sample_channel, sample_user_count, RngSpec};
use crate::ratebounds::{rate_fbs, rate_gaussian, rate_lb1, rate_lb2};
use crate::{Error, Result};

use rayon::prelude::*;

use std::f64::consts::LN_2;

/// Draws per RNG block; each block gets its own stream so results do not
/// depend on thread scheduling.
const BLOCK: usize = 65_536;
/// Fewest draws accepted for an outage estimate.
const MIN_SAMPLES: u64 = 10_000;
/// Auto-scaling ceiling for quantile estimation.
const MAX_AUTO_SAMPLES: u64 = 10_000_000;

/// Which per-draw rate law the oracle simulates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateLaw {
    /// FH lower bound 1 (full interference mixture).
    Lb1,
    /// FH lower bound 2 (aggregate-gain denominator).
    Lb2,
    /// Full-band spreading, exact conditional rate.
    Fbs,
    /// FH with the interference replaced by its Gaussian equivalent.
    Gaussian,
    /// Frequency division: interference-free `u/n_des` share of the band.
    Fd,
}

/// An empirical outage estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McReport {
    /// Fraction of draws whose rate fell below the queried rate.
    pub outage_prob: f64,
    /// Binomial standard error `√(p(1−p)/samples)`.
    pub stderr: f64,
    /// Number of simulated draws.
    pub samples: u64,
    /// The rate the tail was evaluated at (the empirical
    /// `outage_prob`-quantile of the rate distribution).
    pub rate_quantile: f64,
}

/// Simulates `samples` independent draws of the chosen rate law.
///
/// Deterministic in `(query, samples, rng)`: draws are generated in fixed
/// blocks of [`BLOCK`] with one derived stream per block, so the returned
/// vector is identical under any thread count. Errors if the pmf puts mass
/// on user counts whose interference mixture bound 1 cannot enumerate.
pub fn sample_rates(law: RateLaw, query: &OutageQuery, samples: u64, rng: RngSpec) -> Result<Vec<f64>> {
    if law == RateLaw::Lb1 && query.pmf().n_max() - 1 > MAX_ENUMERATED_INTERFERERS {
        return Err(Error::MixtureCapExceeded {
            interferers: query.pmf().n_max() - 1,
            cap: MAX_ENUMERATED_INTERFERERS,
        });
    }
    let cfg = *query.cfg();
    let pmf = query.pmf().clone();
    let mut rates = vec![0.0f64; samples as usize];
    rates
        .par_chunks_mut(BLOCK)
        .enumerate()
        .for_each(|(block, chunk)| {
            let mut r = rng.substream(1 + block as u64).rng();
            for slot in chunk.iter_mut() {
                let n = sample_user_count(&pmf, &mut r);
                let draw = sample_channel(n, &mut r);
                *slot = match law {
                    RateLaw::Lb1 => {
                        rate_lb1(&draw, &cfg).expect("mixture cap checked before sampling")
                    }
                    RateLaw::Lb2 => rate_lb2(&draw, &cfg),
                    RateLaw::Fbs => rate_fbs(&draw, &cfg),
                    RateLaw::Gaussian => rate_gaussian(&draw, &cfg),
                    RateLaw::Fd => {
                        let share = f64::from(cfg.u()) / f64::from(cfg.n_des());
                        let x = draw.direct * cfg.gamma() / share;
                        share * x.ln_1p() / LN_2
                    }
                };
            }
        });
    Ok(rates)
}

/// Empirical outage probability `Pr{rate < R}` of a rate law.
/// Requires `samples ≥ 10⁴`.
pub fn empirical_outage(
    r: f64,
    law: RateLaw,
    query: &OutageQuery,
    samples: u64,
    rng: RngSpec,
) -> Result<McReport> {
    if samples < MIN_SAMPLES {
        return Err(Error::invalid(
            "samples",
            format!("outage estimation needs ≥ {MIN_SAMPLES} draws, got {samples}"),
        ));
    }
    let rates = sample_rates(law, query, samples, rng)?;
    let hits = rates.iter().filter(|&&x| x < r).count();
    let p = hits as f64 / samples as f64;
    Ok(McReport {
        outage_prob: p,
        stderr: (p * (1.0 - p) / samples as f64).sqrt(),
        samples,
        rate_quantile: r,
    })
}

/// Linearly interpolated ε-quantile of an ascending-sorted sample.
fn interpolated_quantile(sorted: &[f64], epsilon: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * epsilon;
    let i = h.floor() as usize;
    if i + 1 >= sorted.len() {
        return sorted[sorted.len() - 1];
    }
    sorted[i] + (h - i as f64) * (sorted[i + 1] - sorted[i])
}

fn sorted_rates(
    epsilon: f64,
    law: RateLaw,
    query: &OutageQuery,
    samples: u64,
    rng: RngSpec,
) -> Result<Vec<f64>> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::invalid("epsilon", format!("need 0 < ε < 1, got {epsilon}")));
    }
    // Auto-scale so the target quantile rests on ~10³ tail draws when that
    // fits the sample ceiling; refuse estimates whose tail holds < 10²
    // draws even after scaling.
    let wanted = (1000.0 / epsilon).ceil() as u64;
    let effective = samples.max(wanted).min(MAX_AUTO_SAMPLES);
    if (effective as f64) * epsilon < 100.0 {
        return Err(Error::Undersampled {
            samples: effective,
            epsilon,
        });
    }
    let mut rates = sample_rates(law, query, effective, rng)?;
    rates.par_sort_unstable_by(f64::total_cmp);
    Ok(rates)
}

/// Empirical ε-outage capacity: the ε-quantile of `samples` simulated
/// rates (auto-scaled upward so the quantile is supported by enough tail
/// draws, within a 10⁷ ceiling). The quantile level is the `epsilon`
/// argument; the query's own ε is not consulted.
pub fn empirical_capacity(
    epsilon: f64,
    law: RateLaw,
    query: &OutageQuery,
    samples: u64,
    rng: RngSpec,
) -> Result<f64> {
    empirical_capacity_detailed(epsilon, law, query, samples, rng).map(|(q, _)| q)
}

/// [`empirical_capacity`] plus a quantile standard error.
///
/// The standard error is `√(ε(1−ε)/N) / f̂`, with the local rate density
/// `f̂` estimated from the spacing of the order statistics `±√N` ranks
/// around the quantile.
pub fn empirical_capacity_detailed(
    epsilon: f64,
    law: RateLaw,
    query: &OutageQuery,
    samples: u64,
    rng: RngSpec,
) -> Result<(f64, f64)> {
    let rates = sorted_rates(epsilon, law, query, samples, rng)?;
    let n = rates.len();
    let quantile = interpolated_quantile(&rates, epsilon);
    let k = (n as f64).sqrt().round() as usize;
    let center = ((n - 1) as f64 * epsilon).round() as usize;
    let lo = center.saturating_sub(k);
    let hi = (center + k).min(n - 1);
    let spacing = rates[hi] - rates[lo];
    let stderr = if spacing > 0.0 {
        let density = (hi - lo) as f64 / (n as f64 * spacing);
        (epsilon * (1.0 - epsilon) / n as f64).sqrt() / density
    } else {
        f64::INFINITY
    };
    Ok((quantile, stderr))
}
