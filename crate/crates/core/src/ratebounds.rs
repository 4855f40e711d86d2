//! Per-channel-realization achievable-rate lower bounds.
//!
//! Conditioned on one draw of the fading gains, the tagged FH user can
//! sustain at least (bits per transmission, `γ` linear, `𝒥 = Σ_j |h_ji|²`):
//!
//! ```text
//! ℛ⁽¹⁾ = v log2( 2^{𝒢−ℋ} |h_ii|² γ / (v ∏_l (1 + c_l γ)^{a_l}) + 1 )
//! ℛ⁽²⁾ = v log2( 2^{𝒢−ℋ} |h_ii|² γ / (v (1 + (γ/v)𝒥)^{1−a}) + 1 )
//! ```
//!
//! where ℋ is the hopping-pattern entropy of a fair system, `a = a(v, n)` is
//! the no-collision probability `(1 − v/u)^{n−1}`, 𝒢 is the computable
//! lower bound on the mixture-overlap correction, and the product in ℛ⁽¹⁾
//! runs over the full interference mixture. The FBS (`v = u`) rate and the
//! Gaussian-noise comparison rate are
//!
//! ```text
//! ℛ_FBS = u log2(1 + |h_ii|² γ / (u (1 + (γ/u)𝒥)))
//! ℛ_g   = v log2(1 + |h_ii|² γ / (v (1 + (γ/u)𝒥)))
//! ```
//!
//! At `v = u` all four coincide exactly. Per draw, ℛ⁽¹⁾ ≥ ℛ⁽²⁾.

use crate::kernels;
use crate::mixture::InterferenceMixture;
use crate::model::{ChannelDraw, NetworkConfig};
use crate::Result;

use std::f64::consts::LN_2;

/// The fair-FH per-user statistics entering every rate bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FairSystemStats {
    /// Hopping-pattern entropy ℋ(v, n) in bits.
    pub h_fair: f64,
    /// No-collision probability `a(v, n) = (1 − v/u)^{n−1}`.
    pub a_zero: f64,
    /// Computable overlap-correction lower bound 𝒢_lb ≥ 0 in bits.
    pub g_lb: f64,
}

impl FairSystemStats {
    /// Evaluates all three statistics for `n` users with gain sum `j`.
    pub fn compute(v: u32, u: u32, n: usize, j: f64, gamma: f64) -> Self {
        FairSystemStats {
            h_fair: h_fair(v, u, n),
            a_zero: a_zero(v, u, n),
            g_lb: g_lb(v, u, n, j, gamma),
        }
    }
}

/// Hopping-pattern entropy of a fair FH system in bits:
/// `ℋ(v, n) = −(n−1)(p log2 p + (1−p) log2(1−p))` with `p = v/u`.
/// Zero when `v = u` or `n = 1`.
pub fn h_fair(v: u32, u: u32, n: usize) -> f64 {
    let p = f64::from(v) / f64::from(u);
    if n <= 1 || p >= 1.0 {
        return 0.0;
    }
    -((n - 1) as f64) * (p * p.log2() + (1.0 - p) * (1.0 - p).log2())
}

/// Probability that no interferer collides with the tagged user on a given
/// sub-band: `a(v, n) = (1 − v/u)^{n−1}`; equals 1 for `n = 1`.
pub fn a_zero(v: u32, u: u32, n: usize) -> f64 {
    (1.0 - f64::from(v) / f64::from(u)).powi(n as i32 - 1)
}

/// Computable lower bound 𝒢_lb on the overlap correction, in bits:
///
/// ```text
/// 𝒢_lb = [E_B{log2(1 + (1 − p^B)(γ/v)𝒥)} − (n−1) p log2 p] / ((γ/v)𝒥 + 1)
/// ```
///
/// with `B ~ Binomial(n−1, p)`, `p = v/u`, `𝒥 = j`. Zero for `n = 1` and for
/// `v = u`; decays to zero as `j → ∞`.
pub fn g_lb(v: u32, u: u32, n: usize, j: f64, gamma: f64) -> f64 {
    if n <= 1 {
        return 0.0;
    }
    kernels::alpha(n, j, gamma / f64::from(v), f64::from(v) / f64::from(u))
}

/// Tightest per-draw rate bound ℛ⁽¹⁾, using the full interference mixture.
///
/// Needs subset enumeration, so it errors beyond the mixture cap; the
/// product over levels is accumulated in the log domain.
pub fn rate_lb1(draw: &ChannelDraw, cfg: &NetworkConfig) -> Result<f64> {
    let mix = InterferenceMixture::build(draw, cfg)?;
    let v = f64::from(cfg.v());
    let gamma = cfg.gamma();
    let n = draw.n();
    let stats = FairSystemStats::compute(cfg.v(), cfg.u(), n, draw.cross_sum(), gamma);
    let log2_denom = mix.log2_interference_product(gamma);
    let x = (stats.g_lb - stats.h_fair - log2_denom).exp2() * draw.direct * gamma / v;
    Ok(v * x.ln_1p() / LN_2)
}

/// Looser per-draw rate bound ℛ⁽²⁾, needing only the gain sum 𝒥.
pub fn rate_lb2(draw: &ChannelDraw, cfg: &NetworkConfig) -> f64 {
    let v = f64::from(cfg.v());
    let gamma = cfg.gamma();
    let n = draw.n();
    let j = draw.cross_sum();
    let stats = FairSystemStats::compute(cfg.v(), cfg.u(), n, j, gamma);
    let log2_denom = (1.0 - stats.a_zero) * (gamma / v * j).ln_1p() / LN_2;
    let x = (stats.g_lb - stats.h_fair - log2_denom).exp2() * draw.direct * gamma / v;
    v * x.ln_1p() / LN_2
}

/// Full-band-spreading rate (the `v = u` special case; independent of `v`).
pub fn rate_fbs(draw: &ChannelDraw, cfg: &NetworkConfig) -> f64 {
    let u = f64::from(cfg.u());
    let gamma = cfg.gamma();
    let x = draw.direct * gamma / (u * (1.0 + gamma / u * draw.cross_sum()));
    u * x.ln_1p() / LN_2
}

/// Rate of the Gaussian-noise comparison system: the mixed interference
/// replaced by a Gaussian of the same average power. Increasing in `v`, so
/// it never exceeds [`rate_fbs`] and offers no case for hopping narrower
/// than the whole band.
pub fn rate_gaussian(draw: &ChannelDraw, cfg: &NetworkConfig) -> f64 {
    let v = f64::from(cfg.v());
    let u = f64::from(cfg.u());
    let gamma = cfg.gamma();
    let x = draw.direct * gamma / (v * (1.0 + gamma / u * draw.cross_sum()));
    v * x.ln_1p() / LN_2
}
