//! System parameters, the user-count distribution, and Rayleigh channel
//! sampling.
//!
//! The physical model: `u` sub-bands are shared by a random number `N` of
//! user pairs; a tagged user hops over `v` sub-bands. All fading amplitudes
//! are unit-variance complex Gaussian, so squared magnitudes (the only
//! quantities this crate ever needs) are i.i.d. Exp(1). The SNR γ = P/σ² is
//! stored linear; `P` and `σ²` never appear separately.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use crate::{Error, Result};

/// Static system parameters: sub-band counts and SNR.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkConfig {
    u: u32,
    v: u32,
    gamma: f64,
    n_des: u32,
}

impl NetworkConfig {
    /// Builds a configuration, validating `1 ≤ v ≤ u`, `γ > 0`, `n_des ≥ 1`.
    ///
    /// `n_des` is the designed licensee count of the frequency-division
    /// baseline; the requirement that it divide `u` is enforced only by the
    /// FD solver, so FH-only workflows may pass any positive value.
    pub fn new(u: u32, v: u32, gamma: f64, n_des: u32) -> Result<Self> {
        if u == 0 {
            return Err(Error::invalid("u", "need at least one sub-band"));
        }
        if v == 0 || v > u {
            return Err(Error::invalid("v", format!("need 1 ≤ v ≤ u = {u}, got {v}")));
        }
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::invalid("gamma", format!("SNR must be positive and finite, got {gamma}")));
        }
        if n_des == 0 {
            return Err(Error::invalid("n_des", "designed user count must be positive"));
        }
        Ok(NetworkConfig { u, v, gamma, n_des })
    }

    /// Same as [`new`](Self::new) but takes the SNR in dB (γ = 10^(dB/10)).
    pub fn from_db(u: u32, v: u32, gamma_db: f64, n_des: u32) -> Result<Self> {
        Self::new(u, v, 10f64.powf(gamma_db / 10.0), n_des)
    }

    /// Total number of sub-bands `u`.
    pub fn u(&self) -> u32 {
        self.u
    }

    /// Sub-bands hopped over per user, `v`.
    pub fn v(&self) -> u32 {
        self.v
    }

    /// Linear SNR γ = P/σ².
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Designed licensee count of the FD baseline.
    pub fn n_des(&self) -> u32 {
        self.n_des
    }

    /// Per-sub-band occupancy probability of one interferer, `v/u`.
    pub fn hop_fraction(&self) -> f64 {
        f64::from(self.v) / f64::from(self.u)
    }

    /// Copy of this configuration with a different `v`.
    pub fn with_v(&self, v: u32) -> Result<Self> {
        Self::new(self.u, v, self.gamma, self.n_des)
    }

    /// Copy of this configuration with a different SNR.
    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        Self::new(self.u, self.v, gamma, self.n_des)
    }
}

/// Distribution `q_n = Pr{N = n}` of the number of active users,
/// `n = 1..n_max`.
///
/// `q_0 = 0` by construction (the tagged user is always active), the support
/// is finite, and `Σ q_n = 1` within 1e-12. Trailing zero masses are trimmed
/// so that `n_max` is the largest `n` with `q_n > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct UserCountPmf {
    probs: Vec<f64>,
}

impl UserCountPmf {
    /// Builds the pmf from `[q_1, q_2, …]`.
    pub fn new(probs: impl Into<Vec<f64>>) -> Result<Self> {
        let mut probs = probs.into();
        while probs.last() == Some(&0.0) {
            probs.pop();
        }
        if probs.is_empty() {
            return Err(Error::invalid("probs", "pmf needs at least one positive mass"));
        }
        if probs.iter().any(|&q| !(0.0..=1.0).contains(&q) || !q.is_finite()) {
            return Err(Error::invalid("probs", "masses must lie in [0, 1]"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(
                "probs",
                format!("masses must sum to 1 within 1e-12, got {total}"),
            ));
        }
        Ok(UserCountPmf { probs })
    }

    /// Poisson-count activation model: conditioned on the tagged user being
    /// active, the user count is `1 + Poisson(λ)` truncated to `n ≤ n_max`
    /// and renormalized, i.e. `q_n ∝ λ^(n-1)/(n-1)!`.
    pub fn poisson_truncated(lambda: f64, n_max: usize) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::invalid("lambda", format!("rate must be positive, got {lambda}")));
        }
        if n_max == 0 {
            return Err(Error::invalid("n_max", "support must be non-empty"));
        }
        let mut weights = Vec::with_capacity(n_max);
        let mut w = 1.0; // λ^0/0!
        for n in 1..=n_max {
            weights.push(w);
            w *= lambda / n as f64;
        }
        let total: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= total;
        }
        // Renormalization leaves a rounding residue beyond the constructor's
        // 1e-12 gate only in pathological cases; fold it into the mode.
        let sum: f64 = weights.iter().sum();
        let imax = (0..weights.len()).max_by(|&a, &b| weights[a].total_cmp(&weights[b])).unwrap();
        weights[imax] += 1.0 - sum;
        Self::new(weights)
    }

    /// Largest `n` with `q_n > 0`.
    pub fn n_max(&self) -> usize {
        self.probs.len()
    }

    /// `q_n` (zero outside the support; `n` is 1-based).
    pub fn prob(&self, n: usize) -> f64 {
        if n == 0 || n > self.probs.len() {
            0.0
        } else {
            self.probs[n - 1]
        }
    }

    /// The masses `[q_1, …, q_n_max]`.
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Expected user count `E{N} = Σ n·q_n`.
    pub fn mean(&self) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(k, &q)| (k + 1) as f64 * q)
            .sum()
    }

    /// Smallest positive mass, `min {q_n : q_n > 0}` — the advisory ceiling
    /// for outage levels ε.
    pub fn min_positive(&self) -> f64 {
        self.probs
            .iter()
            .copied()
            .filter(|&q| q > 0.0)
            .fold(f64::INFINITY, f64::min)
    }
}

/// One realization of the fading gains seen by the tagged receiver: the
/// direct squared gain `|h_ii|²` and the `n−1` crossover squared gains
/// `|h_ji|²`, all Exp(1).
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelDraw {
    /// Direct-link squared gain `|h_ii|²`.
    pub direct: f64,
    /// Crossover squared gains, one per interferer.
    pub cross: Vec<f64>,
}

impl ChannelDraw {
    /// Realized user count `n` (interferers plus the tagged user).
    pub fn n(&self) -> usize {
        self.cross.len() + 1
    }

    /// Sum of crossover gains 𝒥 = Σ_j |h_ji|²; `2𝒥` is χ² with `2(n−1)`
    /// degrees of freedom.
    pub fn cross_sum(&self) -> f64 {
        self.cross.iter().sum()
    }
}

/// Seed plus stream index for a splittable counter-based generator
/// (ChaCha8). Identical `(seed, stream)` reproduces identical draws;
/// distinct streams under one seed are independent by construction, which is
/// how parallel Monte Carlo blocks and per-`(v, n)` solver caches get
/// reproducible, schedule-independent randomness.
///
/// Operations that need several independent streams derive them as fixed
/// offsets from the caller's base stream (see [`RngSpec::substream`]); use
/// different seeds for logically unrelated experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngSpec {
    /// 64-bit seed.
    pub seed: u64,
    /// 64-bit stream index.
    pub stream: u64,
}

impl RngSpec {
    /// Spec with the given seed on stream 0.
    pub fn new(seed: u64) -> Self {
        RngSpec { seed, stream: 0 }
    }

    /// Same seed, absolute stream index `stream`.
    pub fn with_stream(self, stream: u64) -> Self {
        RngSpec { stream, ..self }
    }

    /// Same seed, stream offset by `offset` (wrapping).
    pub fn substream(self, offset: u64) -> Self {
        RngSpec {
            stream: self.stream.wrapping_add(offset),
            ..self
        }
    }

    /// Materializes the generator.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

impl Default for RngSpec {
    fn default() -> Self {
        RngSpec::new(0)
    }
}

/// Draws a user count `n` with probability `q_n`.
pub fn sample_user_count<R: Rng + ?Sized>(pmf: &UserCountPmf, rng: &mut R) -> usize {
    let x: f64 = rng.random();
    let mut acc = 0.0;
    let mut last_positive = 1;
    for (k, &q) in pmf.probs().iter().enumerate() {
        if q > 0.0 {
            last_positive = k + 1;
        }
        acc += q;
        if x < acc {
            return k + 1;
        }
    }
    // Rounding residue (Σq_n may be < 1 by ~1e-16): fold into the last
    // positive mass.
    last_positive
}

/// Draws the fading gains for a system with `n` users: `direct` and the
/// `n−1` entries of `cross` are i.i.d. Exp(1).
pub fn sample_channel<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ChannelDraw {
    assert!(n >= 1, "need at least the tagged user");
    let direct: f64 = rng.sample(Exp1);
    let cross = (0..n - 1).map(|_| rng.sample(Exp1)).collect();
    ChannelDraw { direct, cross }
}
