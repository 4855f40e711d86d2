//! Special-function kernels of the outage solvers.
//!
//! For `n ≥ 2` users, `b > 0`, `c ∈ [0, 1]`, `B ~ Binomial(n−1, c)`:
//!
//! ```text
//! α_n(θ; b, c) = [E_B{log2(1 + b(1 − c^B)θ)} − (n−1) c log2 c] / (bθ + 1)
//! ```
//!
//! With `θ_1..θ_{n−1}` i.i.d. Exp(1), `θ_A = Σ_{i∈A} θ_i` over subsets `A`,
//! `S = θ_1 + … + θ_{n−1}`, and `β_{m,n}(c) = c^m (1−c)^{n−1−m}`:
//!
//! ```text
//! ψ_n(b1, b2, c)      = E{ exp( b1 · 2^{−α_n(S; b2, c)} · ∏_{A≠∅} (b2 θ_A + 1)^{β_{|A|,n}(c)} ) }
//! φ_n(b1, b2, c1, c2) = E{ exp( b1 · (b2 S + 1)^{c1} · 2^{−α_n(S; b2, c2)} ) }
//!                     = (1/(n−2)!) ∫ θ^{n−2} e^{−θ} exp(b1 (b2θ+1)^{c1} 2^{−α_n(θ)}) dθ
//! ```
//!
//! both in (0, 1] for `b1 ≤ 0`. The asymptotic helpers are
//! `f(v, n, γ) = 2^{ℋ(v,n)}((n−1)γ/v + 1)^{1−a(v,n)}` (small-ε slope
//! denominators) and `κ_v` (high-SNR growth coefficients).

use rand::Rng;
use rand_distr::Exp1;
use rayon::prelude::*;

use crate::model::RngSpec;
use crate::numeric::{adaptive_simpson, binomial, erlang_cutoff, ln_factorial, QUAD_TOL};
use crate::ratebounds::{a_zero, h_fair};
use crate::{Error, Result};

use std::f64::consts::LN_2;

/// Largest user count supported by the exact binomial sums in [`alpha`].
pub const MAX_ALPHA_USERS: usize = 64;

/// Cap on interferers for the subset products inside [`PsiCache`]
/// (2^20 subset sums per Monte Carlo draw).
pub const MAX_PSI_INTERFERERS: usize = 20;

/// The kernel `α_n(θ; b, c)` (see module docs); an exact `n`-term binomial
/// sum, non-negative, zero when `c = 1` or `n = 1`.
pub fn alpha(n: usize, theta: f64, b: f64, c: f64) -> f64 {
    assert!(n >= 1 && n <= MAX_ALPHA_USERS, "alpha supports 1 ≤ n ≤ 64");
    debug_assert!(theta >= 0.0 && b > 0.0 && (0.0..=1.0).contains(&c));
    if n == 1 || c >= 1.0 || c <= 0.0 {
        return 0.0;
    }
    let m = n - 1;
    let ln_c = c.ln();
    let ln_1c = (1.0 - c).ln();
    let mut expectation = 0.0;
    let mut c_pow = 1.0; // c^k
    for k in 0..=m {
        // Binomial weight in the log domain: exp(ln C(m,k) + k ln c + (m−k) ln(1−c)).
        let w = (binomial(m, k).ln() + k as f64 * ln_c + (m - k) as f64 * ln_1c).exp();
        expectation += w * (b * (1.0 - c_pow) * theta).ln_1p() / LN_2;
        c_pow *= c;
    }
    let pattern_term = -(m as f64) * c * c.log2();
    (expectation + pattern_term) / (b * theta + 1.0)
}

/// `β_{m,n}(c) = c^m (1−c)^{n−1−m}` — occurrence probability of one
/// particular `m`-subset of the `n−1` interferers.
fn beta_weight(m: usize, n: usize, c: f64) -> f64 {
    c.powi(m as i32) * (1.0 - c).powi((n - 1 - m) as i32)
}

/// Monte Carlo draws for ψ_n with the rate-independent part precomputed.
///
/// The integrand of ψ_n factors as `exp(b1 · G)` where the structure factor
/// `G = 2^{−α_n(S)} ∏_{A≠∅} (b2 θ_A + 1)^{β_{|A|,n}}` depends on the draw
/// and on `(n, b2, c)` but not on `b1`. Caching `G` per draw makes a whole
/// bisection in `b1` (i.e. in the rate) run on common random numbers: the
/// survival function seen by the bisector is deterministic, strictly
/// monotone, and costs one `exp` per draw per evaluation.
#[derive(Debug, Clone)]
pub struct PsiCache {
    g: Vec<f64>,
}

impl PsiCache {
    /// Draws `samples` structure factors for `(n, b2, c)` from `rng`.
    ///
    /// Requires `n ≥ 2` and `n − 1 ≤` [`MAX_PSI_INTERFERERS`].
    pub fn generate(n: usize, b2: f64, c: f64, samples: u64, rng: RngSpec) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid("n", "psi is defined for n ≥ 2"));
        }
        let m = n - 1;
        if m > MAX_PSI_INTERFERERS {
            return Err(Error::MixtureCapExceeded {
                interferers: m,
                cap: MAX_PSI_INTERFERERS,
            });
        }
        if samples == 0 {
            return Err(Error::invalid("samples", "need at least one draw"));
        }
        let betas: Vec<f64> = (0..=m).map(|k| beta_weight(k, n, c)).collect();
        let mut g = vec![0.0f64; samples as usize];
        const BLOCK: usize = 8_192;
        g.par_chunks_mut(BLOCK).enumerate().for_each(|(block, chunk)| {
            let mut r = rng.substream(1 + block as u64).rng();
            let mut gains = vec![0.0f64; m];
            let mut sums = vec![0.0f64; 1 << m];
            for slot in chunk.iter_mut() {
                let mut total = 0.0;
                for gain in gains.iter_mut() {
                    *gain = r.sample(Exp1);
                    total += *gain;
                }
                // ln ∏ (b2 θ_A + 1)^{β_{|A|}} over non-empty subsets, with
                // subset sums filled by dynamic programming over masks.
                let mut ln_prod = 0.0;
                for mask in 1..(1usize << m) {
                    let low = mask.trailing_zeros() as usize;
                    let s = sums[mask & (mask - 1)] + gains[low];
                    sums[mask] = s;
                    let k = mask.count_ones() as usize;
                    if betas[k] > 0.0 {
                        ln_prod += betas[k] * (b2 * s).ln_1p();
                    }
                }
                let a = alpha(n, total, b2, c);
                *slot = (ln_prod - a * LN_2).exp();
            }
        });
        Ok(PsiCache { g })
    }

    /// Number of cached draws.
    pub fn len(&self) -> usize {
        self.g.len()
    }

    /// True when the cache holds no draws (unreachable via `generate`).
    pub fn is_empty(&self) -> bool {
        self.g.is_empty()
    }

    /// `ψ̂ = mean(exp(b1 · G))` over the cached draws.
    pub fn survival_term(&self, b1: f64) -> f64 {
        self.moments(b1).0
    }

    /// `ψ̂` together with its Monte Carlo standard error.
    pub fn survival_term_with_err(&self, b1: f64) -> (f64, f64) {
        let (mean, se) = self.moments(b1);
        (mean, se)
    }

    fn moments(&self, b1: f64) -> (f64, f64) {
        debug_assert!(b1 <= 0.0, "survival terms need b1 ≤ 0");
        const BLOCK: usize = 8_192;
        // Per-block partial sums collected in block order keep the reduction
        // deterministic under any thread schedule.
        let partials: Vec<(f64, f64)> = self
            .g
            .par_chunks(BLOCK)
            .map(|chunk| {
                let mut s = 0.0;
                let mut q = 0.0;
                for &gi in chunk {
                    let x = (b1 * gi).exp();
                    s += x;
                    q += x * x;
                }
                (s, q)
            })
            .collect();
        let (sum, sum_sq) = partials
            .iter()
            .fold((0.0, 0.0), |(s, q), &(bs, bq)| (s + bs, q + bq));
        let n = self.g.len() as f64;
        let mean = sum / n;
        let var = ((sum_sq - n * mean * mean) / (n - 1.0).max(1.0)).max(0.0);
        (mean, (var / n).sqrt())
    }
}

/// Estimator selection for [`psi`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsiEstimator {
    /// Sample mean over `samples` draws from `rng` (any `n` within the cap).
    MonteCarlo { samples: u64, rng: RngSpec },
    /// Deterministic adaptive quadrature; only `n ≤ 3` (1-D / 2-D).
    Quadrature,
}

/// Evaluates `ψ_n(b1, b2, c)`; returns `(value, error)` where `error` is the
/// Monte Carlo standard error or the quadrature tolerance.
pub fn psi(n: usize, b1: f64, b2: f64, c: f64, estimator: PsiEstimator) -> Result<(f64, f64)> {
    if b1 > 0.0 {
        return Err(Error::invalid("b1", "psi needs b1 ≤ 0"));
    }
    if !(b2 > 0.0) || !(0.0..=1.0).contains(&c) {
        return Err(Error::invalid("b2/c", "need b2 > 0 and c in [0, 1]"));
    }
    match estimator {
        PsiEstimator::MonteCarlo { samples, rng } => {
            let cache = PsiCache::generate(n, b2, c, samples, rng)?;
            Ok(cache.survival_term_with_err(b1))
        }
        PsiEstimator::Quadrature => match n {
            2 => {
                let beta1 = beta_weight(1, 2, c);
                let cut = erlang_cutoff(1);
                let f = |t: f64| {
                    let g = (beta1 * (b2 * t).ln_1p() - alpha(2, t, b2, c) * LN_2).exp();
                    (b1 * g - t).exp()
                };
                Ok((adaptive_simpson(&f, 0.0, cut, QUAD_TOL), QUAD_TOL))
            }
            3 => {
                let beta1 = beta_weight(1, 3, c);
                let beta2 = beta_weight(2, 3, c);
                let cut = erlang_cutoff(1);
                let inner_tol = QUAD_TOL / cut;
                let outer = |x: f64| {
                    let inner = |y: f64| {
                        let s = x + y;
                        let ln_prod = beta1 * ((b2 * x).ln_1p() + (b2 * y).ln_1p())
                            + beta2 * (b2 * s).ln_1p();
                        let g = (ln_prod - alpha(3, s, b2, c) * LN_2).exp();
                        (b1 * g - y).exp()
                    };
                    adaptive_simpson(&inner, 0.0, cut, inner_tol) * (-x).exp()
                };
                Ok((adaptive_simpson(&outer, 0.0, cut, QUAD_TOL), 2.0 * QUAD_TOL))
            }
            _ => Err(Error::invalid(
                "estimator",
                format!("quadrature for psi supports n ≤ 3, got n = {n}"),
            )),
        },
    }
}

/// The kernel `φ_n(b1, b2, c1, c2)` (see module docs): a single Erlang-
/// weighted integral over the gain sum, by adaptive quadrature on
/// `[0, Q]` with `Q` the (1 − 1e-12) Erlang quantile; the discarded tail is
/// at most that residual mass since the non-weight factor is in (0, 1].
///
/// Requires `n ≥ 2` and `b1 ≤ 0`.
pub fn phi(n: usize, b1: f64, b2: f64, c1: f64, c2: f64) -> f64 {
    assert!(n >= 2, "phi is defined for n ≥ 2");
    assert!(b1 <= 0.0 && b2 > 0.0, "phi needs b1 ≤ 0, b2 > 0");
    let k = n - 2;
    let ln_norm = ln_factorial(k);
    let cut = erlang_cutoff(n - 1);
    let f = |t: f64| {
        let weight_ln = if k == 0 {
            -t
        } else if t == 0.0 {
            return 0.0;
        } else {
            k as f64 * t.ln() - t - ln_norm
        };
        let damp = b1 * ((b2 * t).ln_1p() * c1 - alpha(n, t, b2, c2) * LN_2).exp();
        (weight_ln + damp).exp()
    };
    adaptive_simpson(&f, 0.0, cut, QUAD_TOL)
}

/// Small-ε slope denominator `f(v, n, γ) = 2^{ℋ(v,n)}((n−1)γ/v + 1)^{1−a(v,n)}`;
/// equals 1 for `n = 1` and `1 + (n−1)γ/u` for `v = u`.
pub fn f_factor(v: u32, u: u32, n: usize, gamma: f64) -> f64 {
    let one_minus_a = 1.0 - a_zero(v, u, n);
    h_fair(v, u, n).exp2() * ((n - 1) as f64 * gamma / f64::from(v) + 1.0).powf(one_minus_a)
}

/// High-SNR growth coefficient
/// `κ_v = (2^{−ℋ(v,n_max)}/v) ((n_max−1)/v)^{(1−v/u)^{n_max−1} − 1}`.
///
/// Defined for `n_max ≥ 2` (with a single user there is no interference
/// floor and the high-SNR capacity grows without saturation).
pub fn kappa(v: u32, u: u32, n_max: usize) -> Result<f64> {
    if n_max < 2 {
        return Err(Error::invalid("n_max", "kappa needs n_max ≥ 2"));
    }
    let a = a_zero(v, u, n_max);
    let vf = f64::from(v);
    Ok((-h_fair(v, u, n_max)).exp2() / vf * ((n_max - 1) as f64 / vf).powf(a - 1.0))
}
