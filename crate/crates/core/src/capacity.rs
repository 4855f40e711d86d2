//! ε-outage-capacity solvers, optimal-`v` search, and asymptotics.
//!
//! The ε-outage capacity is `R(ε) = sup{R : Pr{outage at R} < ε}`, realized
//! here as a bisection on a survival function `S(R) = Pr{rate ≥ R}` (every
//! shipped `S` is continuous and strictly decreasing), returning the lower
//! bracket endpoint so capacity is never overstated.
//!
//! Three nested FH lower bounds are provided, with
//! `R⁽¹⁾ ≥ R⁽²⁾ ≥ R⁽³⁾`:
//!
//! * bound 1 evaluates the per-user survival through the ψ kernels (full
//!   interference mixture, Monte Carlo with cached structure factors),
//! * bound 2 through the φ kernels (gain sum only, deterministic
//!   quadrature),
//! * bound 3 in closed form (Jensen step applied to bound 2).
//!
//! In all three, `b_{1,n}(R) = 2^{ℋ(v,n)}(1 − 2^{R/v})·v/γ` and the
//! single-user term is `q_1·exp(b_{1,1})`. The baselines are the exact
//! closed-form FD capacity and the FBS survival
//! `exp((1 − 2^{R/u})u/γ)·Σ_n q_n 2^{−(n−1)R/u}`.

use crate::kernels::{self, PsiCache};
use crate::model::{NetworkConfig, RngSpec, UserCountPmf};
use crate::ratebounds::{a_zero, h_fair};
use crate::{Error, Result};

use std::f64::consts::{E, LN_2};

/// Absolute bisection tolerance on the returned rate, in bits.
pub const RATE_TOL_ABS: f64 = 1e-6;
/// Relative bisection refinement: brackets are narrowed further until the
/// width is below this fraction of the rate, so sub-millibit capacities
/// (small-γ regimes) keep their relative accuracy.
pub const RATE_TOL_REL: f64 = 1e-4;
/// Hard floor on bracket width (guards the ε → 0 limit where the rate is 0).
const RATE_TOL_FLOOR: f64 = 1e-13;
/// Iteration budget for bracketing plus bisection.
const MAX_ITERATIONS: u32 = 200;
/// SNR above which the high-SNR closed form is used directly.
const HIGH_SNR_GAMMA: f64 = 1e3;

/// An outage-capacity question: target outage ε, system parameters, and the
/// user-count distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct OutageQuery {
    epsilon: f64,
    cfg: NetworkConfig,
    pmf: UserCountPmf,
}

impl OutageQuery {
    /// Builds a query; requires `0 < ε < 1`.
    pub fn new(epsilon: f64, cfg: NetworkConfig, pmf: UserCountPmf) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::invalid("epsilon", format!("need 0 < ε < 1, got {epsilon}")));
        }
        Ok(OutageQuery { epsilon, cfg, pmf })
    }

    /// Target outage probability ε.
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// System parameters.
    pub fn cfg(&self) -> &NetworkConfig {
        &self.cfg
    }

    /// User-count distribution.
    pub fn pmf(&self) -> &UserCountPmf {
        &self.pmf
    }

    /// Advisory flag: the analysis is intended for ε below every positive
    /// user-count mass; larger ε is allowed but the bounds lose bite.
    pub fn epsilon_above_pmf_floor(&self) -> bool {
        self.epsilon >= self.pmf.min_positive()
    }

    /// Copy of this query with a different ε.
    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        Self::new(epsilon, self.cfg, self.pmf.clone())
    }
}

/// Which FH lower bound a solver should use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FhBound {
    /// ψ-kernel bound (tightest; Monte Carlo).
    B1,
    /// φ-kernel bound (deterministic quadrature).
    B2,
    /// Closed form (loosest; no integration at all).
    B3,
}

/// Which solver produced an [`OutageResult`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    Fh1,
    Fh2,
    Fh3,
    Fd,
    Fbs,
}

/// A solved outage capacity plus solver diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageResult {
    /// ε-outage capacity (lower bound), bits per transmission.
    pub rate: f64,
    /// Producing solver.
    pub solver: SolverKind,
    /// Hopped sub-bands `v` for FH bounds; `u` for FBS; `u/n_des` for FD.
    pub v_used: u32,
    /// Bracketing plus bisection iterations (0 for closed forms).
    pub iterations: u32,
    /// Final bracket width (≤ [`RATE_TOL_ABS`]; 0 for closed forms).
    pub residual: f64,
    /// Monte-Carlo-induced standard error on the rate (bound 1 only;
    /// 0 for the deterministic solvers).
    pub stderr: f64,
}

/// Options of the FH solvers: ψ sample count and the RNG from which the
/// per-`(v, n)` Monte Carlo streams are derived. Bounds 2 and 3 ignore both.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FhSolverOptions {
    /// Draws per ψ kernel (default 2·10⁵).
    pub psi_samples: u64,
    /// Base RNG spec (default seed 0, stream 0).
    pub rng: RngSpec,
}

impl Default for FhSolverOptions {
    fn default() -> Self {
        FhSolverOptions {
            psi_samples: 200_000,
            rng: RngSpec::default(),
        }
    }
}

/// `b_{1,n}(R) = 2^{ℋ(v,n)}·(1 − 2^{R/v})·v/γ ≤ 0`, with the
/// `1 − 2^{R/v}` factor evaluated as `−expm1(R ln2 / v)` so sub-millibit
/// rates keep full precision.
fn b1_coeff(r: f64, v: u32, u: u32, n: usize, gamma: f64) -> f64 {
    let vf = f64::from(v);
    -h_fair(v, u, n).exp2() * (r * LN_2 / vf).exp_m1() * vf / gamma
}

/// Closed-form FH survival (bound 3):
/// `Σ_n q_n exp(b_{1,n}(R)·((n−1)γ/v + 1)^{1−a(v,n)})`.
/// Strictly decreasing in `R`, equal to 1 at `R = 0`.
pub fn survival_fh3(r: f64, v: u32, query: &OutageQuery) -> f64 {
    let cfg = query.cfg();
    let gamma = cfg.gamma();
    let vf = f64::from(v);
    query
        .pmf()
        .probs()
        .iter()
        .enumerate()
        .filter(|(_, &q)| q > 0.0)
        .map(|(k, &q)| {
            let n = k + 1;
            let b1 = b1_coeff(r, v, cfg.u(), n, gamma);
            let mean_denom = ((n - 1) as f64 * gamma / vf + 1.0).powf(1.0 - a_zero(v, cfg.u(), n));
            q * (b1 * mean_denom).exp()
        })
        .sum()
}

/// φ-kernel FH survival (bound 2):
/// `q_1 e^{b_{1,1}} + Σ_{n≥2} q_n φ_n(b_{1,n}, γ/v, 1−a(v,n), v/u)`.
pub fn survival_fh2(r: f64, v: u32, query: &OutageQuery) -> f64 {
    let cfg = query.cfg();
    let gamma = cfg.gamma();
    let vf = f64::from(v);
    let c = vf / f64::from(cfg.u());
    query
        .pmf()
        .probs()
        .iter()
        .enumerate()
        .filter(|(_, &q)| q > 0.0)
        .map(|(k, &q)| {
            let n = k + 1;
            let b1 = b1_coeff(r, v, cfg.u(), n, gamma);
            if n == 1 {
                q * b1.exp()
            } else {
                q * kernels::phi(n, b1, gamma / vf, 1.0 - a_zero(v, cfg.u(), n), c)
            }
        })
        .sum()
}

/// ψ-kernel FH survival (bound 1) with its per-`n` Monte Carlo caches built
/// once, so that every evaluation inside a bisection reuses the same draws.
#[derive(Debug)]
pub struct BoundOneSurvival {
    v: u32,
    caches: Vec<(usize, PsiCache)>, // (n, draws) for each n ≥ 2 with q_n > 0
}

impl BoundOneSurvival {
    /// Draws the caches for every supported user count of the query's pmf.
    /// Streams are derived from `rng` per `(v, n)`, so rebuilding with the
    /// same spec reproduces the survival exactly.
    pub fn new(v: u32, query: &OutageQuery, psi_samples: u64, rng: RngSpec) -> Result<Self> {
        let cfg = query.cfg();
        let c = f64::from(v) / f64::from(cfg.u());
        let b2 = cfg.gamma() / f64::from(v);
        let mut caches = Vec::new();
        for (k, &q) in query.pmf().probs().iter().enumerate() {
            let n = k + 1;
            if n >= 2 && q > 0.0 {
                let stream = rng.substream(1 + 64 * u64::from(v) + n as u64);
                caches.push((n, PsiCache::generate(n, b2, c, psi_samples, stream)?));
            }
        }
        Ok(BoundOneSurvival { v, caches })
    }

    /// Survival estimate at rate `r`, with the pmf-weighted Monte Carlo
    /// standard error.
    pub fn eval_with_err(&self, r: f64, query: &OutageQuery) -> (f64, f64) {
        let cfg = query.cfg();
        let gamma = cfg.gamma();
        let mut total = query.pmf().prob(1) * b1_coeff(r, self.v, cfg.u(), 1, gamma).exp();
        let mut var = 0.0;
        for (n, cache) in &self.caches {
            let b1 = b1_coeff(r, self.v, cfg.u(), *n, gamma);
            let (mean, se) = cache.survival_term_with_err(b1);
            let q = query.pmf().prob(*n);
            total += q * mean;
            var += (q * se) * (q * se);
        }
        (total, var.sqrt())
    }

    /// Survival estimate at rate `r`.
    pub fn eval(&self, r: f64, query: &OutageQuery) -> f64 {
        self.eval_with_err(r, query).0
    }
}

/// Bisection for `sup{R : S(R) > 1 − ε}` on a decreasing survival `S`.
/// Expands the upper bracket by doubling, then bisects until the width is
/// below both the absolute and relative tolerances; returns
/// `(lower endpoint, iterations, final width)`.
fn bisect_capacity<F: FnMut(f64) -> f64>(mut survival: F, epsilon: f64) -> Result<(f64, u32, f64)> {
    let target = 1.0 - epsilon;
    let mut iterations = 0u32;
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    while survival(hi) > target {
        lo = hi;
        hi *= 2.0;
        iterations += 1;
        if iterations > MAX_ITERATIONS {
            return Err(Error::NonConvergence { iterations });
        }
    }
    // Invariant: S(lo) > 1 − ε ≥ S(hi).
    while hi - lo > RATE_TOL_FLOOR && (hi - lo > RATE_TOL_ABS || hi - lo > RATE_TOL_REL * lo) {
        iterations += 1;
        if iterations > MAX_ITERATIONS {
            return Err(Error::NonConvergence { iterations });
        }
        let mid = 0.5 * (lo + hi);
        if survival(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo, iterations, hi - lo))
}

/// ε-outage capacity of the FH system for a fixed `v`, by the chosen bound.
///
/// Bound 1 draws its ψ caches from `opts.rng` (derived stream per `(v, n)`)
/// and reports the Monte-Carlo-induced rate standard error; bounds 2 and 3
/// are deterministic. The single-user pmf term is always handled in closed
/// form. Errors: invalid `v`, pmf support beyond the ψ cap (bound 1), or a
/// non-convergent bracket.
pub fn outage_capacity_fh(
    query: &OutageQuery,
    bound: FhBound,
    v: u32,
    opts: &FhSolverOptions,
) -> Result<OutageResult> {
    let cfg = query.cfg();
    if v == 0 || v > cfg.u() {
        return Err(Error::invalid("v", format!("need 1 ≤ v ≤ u = {}, got {v}", cfg.u())));
    }
    let epsilon = query.epsilon();
    let (solver, rate, iterations, residual, stderr) = match bound {
        FhBound::B3 => {
            let (rate, it, res) = bisect_capacity(|r| survival_fh3(r, v, query), epsilon)?;
            (SolverKind::Fh3, rate, it, res, 0.0)
        }
        FhBound::B2 => {
            let (rate, it, res) = bisect_capacity(|r| survival_fh2(r, v, query), epsilon)?;
            (SolverKind::Fh2, rate, it, res, 0.0)
        }
        FhBound::B1 => {
            let surv = BoundOneSurvival::new(v, query, opts.psi_samples, opts.rng)?;
            let (rate, it, res) = bisect_capacity(|r| surv.eval(r, query), epsilon)?;
            // Convert the survival stderr at the solution into a rate
            // stderr through the local slope of the survival.
            let (s_lo, se) = surv.eval_with_err(rate, query);
            let dr = (rate * 1e-3).max(1e-7);
            let s_hi = surv.eval(rate + dr, query);
            let slope = ((s_lo - s_hi) / dr).max(1e-300);
            (SolverKind::Fh1, rate, it, res, se / slope)
        }
    };
    Ok(OutageResult {
        rate,
        solver,
        v_used: v,
        iterations,
        residual,
        stderr,
    })
}

/// Exhaustive `v`-scan of [`outage_capacity_fh`]; returns the maximizing
/// `v` and its result, with ties broken toward smaller `v` (less spectrum
/// occupied at equal capacity). All `v` share `opts.rng` as the stream base,
/// so bound-1 comparisons across `v` run on common random numbers.
pub fn best_v(query: &OutageQuery, bound: FhBound, opts: &FhSolverOptions) -> Result<(u32, OutageResult)> {
    let mut best: Option<(u32, OutageResult)> = None;
    for v in 1..=query.cfg().u() {
        let res = outage_capacity_fh(query, bound, v, opts)?;
        if best.as_ref().is_none_or(|(_, b)| res.rate > b.rate) {
            best = Some((v, res));
        }
    }
    Ok(best.expect("u ≥ 1 guarantees at least one candidate"))
}

/// Exact FD (frequency-division) ε-outage capacity,
/// `R_FD = (u/n_des)·log2(1 − (n_des·γ/u)·ln(1−ε))`; requires `n_des | u`.
pub fn outage_capacity_fd(query: &OutageQuery) -> Result<OutageResult> {
    let cfg = query.cfg();
    let (u, n_des) = (cfg.u(), cfg.n_des());
    if u % n_des != 0 {
        return Err(Error::invalid(
            "n_des",
            format!("FD needs n_des | u, got u = {u}, n_des = {n_des}"),
        ));
    }
    let band = f64::from(u) / f64::from(n_des);
    let x = -(f64::from(n_des) * cfg.gamma() / f64::from(u)) * (-query.epsilon()).ln_1p();
    Ok(OutageResult {
        rate: band * x.ln_1p() / LN_2,
        solver: SolverKind::Fd,
        v_used: u / n_des,
        iterations: 0,
        residual: 0.0,
        stderr: 0.0,
    })
}

/// FBS survival `exp((1 − 2^{R/u})·u/γ)·Σ_n q_n·2^{−(n−1)R/u}`.
pub fn survival_fbs(r: f64, query: &OutageQuery) -> f64 {
    let cfg = query.cfg();
    let uf = f64::from(cfg.u());
    let b = -(r * LN_2 / uf).exp_m1() * uf / cfg.gamma();
    query
        .pmf()
        .probs()
        .iter()
        .enumerate()
        .filter(|(_, &q)| q > 0.0)
        .map(|(k, &q)| q * (b - k as f64 * r * LN_2 / uf).exp())
        .sum()
}

/// Exact FBS (full-band spreading) ε-outage capacity, by bisection on
/// [`survival_fbs`].
pub fn outage_capacity_fbs(query: &OutageQuery) -> Result<OutageResult> {
    let (rate, iterations, residual) = bisect_capacity(|r| survival_fbs(r, query), query.epsilon())?;
    Ok(OutageResult {
        rate,
        solver: SolverKind::Fbs,
        v_used: query.cfg().u(),
        iterations,
        residual,
        stderr: 0.0,
    })
}

/// Small-ε closed form for bound 3:
/// `R⁽³⁾ ≈ ε·γ / (Σ_n q_n f(v, n, γ) · ln 2)`.
pub fn asymptotic_fh3_small_eps(v: u32, query: &OutageQuery) -> f64 {
    let cfg = query.cfg();
    let denom: f64 = query
        .pmf()
        .probs()
        .iter()
        .enumerate()
        .map(|(k, &q)| q * kernels::f_factor(v, cfg.u(), k + 1, cfg.gamma()))
        .sum();
    query.epsilon() * cfg.gamma() / (denom * LN_2)
}

/// Small-ε single-sub-band optimality test: true when hopping over one
/// sub-band beats full-band spreading in the ε → 0 slope, i.e. when
/// `Σ q_n f(1, n, γ) < Σ q_n f(u, n, γ)`. False as γ → 0; flips true above
/// a pmf-dependent SNR threshold.
pub fn small_eps_v1_condition(u: u32, gamma: f64, pmf: &UserCountPmf) -> bool {
    let weighted = |v: u32| -> f64 {
        pmf.probs()
            .iter()
            .enumerate()
            .map(|(k, &q)| q * kernels::f_factor(v, u, k + 1, gamma))
            .sum()
    };
    weighted(1) < weighted(u)
}

/// High-SNR approximation of bound 3,
/// `R⁽³⁾ ≈ v·log2(1 − κ_v·γ^{(1−v/u)^{n_max−1}}·ln(1 − ε/q_{n_max}))`,
/// applied for γ ≥ 10³; below that the full bound-3 solver is used (the
/// approximation step is only justified at high SNR). Requires
/// `ε < q_{n_max}` and `n_max ≥ 2`.
pub fn asymptotic_fh3_high_snr(v: u32, query: &OutageQuery) -> Result<f64> {
    let cfg = query.cfg();
    let pmf = query.pmf();
    let n_max = pmf.n_max();
    let q_top = pmf.prob(n_max);
    if query.epsilon() >= q_top {
        return Err(Error::invalid(
            "epsilon",
            format!("high-SNR form needs ε < q_n_max = {q_top}, got {}", query.epsilon()),
        ));
    }
    if cfg.gamma() < HIGH_SNR_GAMMA {
        return Ok(outage_capacity_fh(query, FhBound::B3, v, &FhSolverOptions::default())?.rate);
    }
    let kappa = kernels::kappa(v, cfg.u(), n_max)?;
    let exponent = a_zero(v, cfg.u(), n_max);
    let x = -kappa * cfg.gamma().powf(exponent) * (-query.epsilon() / q_top).ln_1p();
    Ok(f64::from(v) * x.ln_1p() / LN_2)
}

/// Analytic γ → ∞ optimal hop width: the argmax over `v = 1..u` of the
/// SNR-exponent coefficient `v·(1 − v/u)^{n_max−1}` (ties toward smaller
/// `v`). The continuous relaxation peaks at `v = u/n_max`, so the result is
/// the integer neighbor of `u/n_max` — e.g. `⌈u/2⌉` for two users.
pub fn v_opt_high_snr(u: u32, n_max: usize) -> u32 {
    (1..=u)
        .max_by(|&a, &b| {
            let f = |v: u32| f64::from(v) * a_zero(v, u, n_max);
            // max_by keeps the *last* maximum; compare so earlier (smaller)
            // v wins ties.
            match f(a).partial_cmp(&f(b)).unwrap() {
                std::cmp::Ordering::Equal => std::cmp::Ordering::Greater,
                other => other,
            }
        })
        .expect("u ≥ 1")
}

/// Sufficient high-SNR condition for FH (at its asymptotically optimal `v`)
/// to beat FD: `n_des ≥ e·n_max`.
pub fn fh_beats_fd_high_snr(n_des: u32, n_max: usize) -> bool {
    f64::from(n_des) >= E * n_max as f64
}

/// Design rule for Poisson-activated populations: each of `n_des` potential
/// users is independently active with probability `p`, so the interferer
/// count at a tagged active user is ≈ Poisson(λ), λ = p·n_des. Returns
/// `n_star = max(1, ⌈−λ ln ε⌉)` — a support cap whose tail mass stays below
/// ε/2 — and whether `p` is small enough (`p < −1/(e ln ε)`) for `n_star`
/// not to exceed `n_des` itself.
pub fn poisson_activation_design(n_des: u32, p_active: f64, epsilon: f64) -> Result<(u32, bool)> {
    if !(p_active > 0.0 && p_active < 1.0) {
        return Err(Error::invalid("p_active", format!("need 0 < p < 1, got {p_active}")));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::invalid("epsilon", format!("need 0 < ε < 1, got {epsilon}")));
    }
    if n_des == 0 {
        return Err(Error::invalid("n_des", "need at least one potential user"));
    }
    let lambda = p_active * f64::from(n_des);
    let n_star = (-lambda * epsilon.ln()).ceil().max(1.0) as u32;
    let sufficient = p_active < -1.0 / (E * epsilon.ln());
    Ok((n_star, sufficient))
}

/// Outcome of [`poisson_tail_bound_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoissonTailCheck {
    /// Whether the exact tail at `n_star` is ≤ ε/2.
    pub bound_ok: bool,
    /// Exact tail probability `Pr{Poisson(λ) ≥ n_star}`.
    pub exact_tail: f64,
    /// Whether the asymptotic argument behind the n_star rule applies,
    /// i.e. `λ(ln(−ln ε) − 1) ≥ 1`.
    pub validity: bool,
}

/// Verifies the Poisson design rule by exact summation: computes
/// `Pr{Poisson(λ) ≥ n_star}` for `n_star = max(1, ⌈−λ ln ε⌉)` by summing the
/// upper tail upward (the complement form `1 − CDF` loses all precision for
/// tiny tails), and evaluates the rule's validity condition.
pub fn poisson_tail_bound_check(lambda: f64, epsilon: f64) -> Result<PoissonTailCheck> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::invalid("lambda", format!("need λ > 0, got {lambda}")));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::invalid("epsilon", format!("need 0 < ε < 1, got {epsilon}")));
    }
    let n_star = (-lambda * epsilon.ln()).ceil().max(1.0) as u64;
    // First tail term e^{−λ} λ^{n*}/n*! in the log domain, then the rest by
    // the multiplicative recurrence.
    let ln_first = -lambda + n_star as f64 * lambda.ln()
        - (1..=n_star).map(|j| (j as f64).ln()).sum::<f64>();
    let mut term = ln_first.exp();
    let mut tail = 0.0;
    let mut k = n_star;
    while term > tail * 1e-18 + f64::MIN_POSITIVE {
        tail += term;
        k += 1;
        term *= lambda / k as f64;
    }
    let validity = lambda * ((-epsilon.ln()).ln() - 1.0) >= 1.0;
    Ok(PoissonTailCheck {
        bound_ok: tail <= 0.5 * epsilon,
        exact_tail: tail,
        validity,
    })
}
