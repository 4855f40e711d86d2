//! Internal numerics: adaptive Simpson quadrature, Erlang tail cutoffs, and
//! exact binomial coefficients.
//!
//! All semi-infinite integrals in this crate have an explicit Exp/Erlang
//! weight, so they are integrated on `[0, Q]` with `Q` the (1 − 1e-12)
//! quantile of the weight; the discarded tail is bounded analytically by the
//! residual tail mass because every integrand is the weight times a factor
//! in (0, 1].

/// Absolute tolerance of the adaptive quadrature used by the kernels.
pub(crate) const QUAD_TOL: f64 = 1e-8;

/// Residual tail mass kept outside the truncated integration interval.
pub(crate) const TAIL_MASS: f64 = 1e-12;

/// Adaptive Simpson integration of `f` on `[a, b]` to absolute tolerance
/// `tol`, with Richardson extrapolation on accepted panels and a hard
/// subdivision depth cap (the cap, at 2^52 panel widths, only guards against
/// pathological integrands; the kernels' integrands are smooth).
pub(crate) fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    recurse(f, a, b, fa, fm, fb, whole, tol, 52)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Natural log of `k!`.
pub(crate) fn ln_factorial(k: usize) -> f64 {
    (2..=k).map(|j| (j as f64).ln()).sum()
}

/// Log of the upper tail `Pr{Erlang(k, 1) > q} = e^{-q} Σ_{j<k} q^j/j!`
/// (integer shape `k ≥ 1`), evaluated stably via log-sum-exp.
fn ln_erlang_upper_tail(k: usize, q: f64) -> f64 {
    debug_assert!(k >= 1 && q >= 0.0);
    if q == 0.0 {
        return 0.0;
    }
    let ln_q = q.ln();
    let mut terms = Vec::with_capacity(k);
    let mut ln_fact = 0.0;
    for j in 0..k {
        if j > 0 {
            ln_fact += (j as f64).ln();
        }
        terms.push(j as f64 * ln_q - ln_fact);
    }
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = terms.iter().map(|t| (t - max).exp()).sum();
    -q + max + sum.ln()
}

/// Upper integration cutoff for an Erlang(k, 1) weight: the smallest point
/// (to within one unit) whose upper tail mass is ≤ [`TAIL_MASS`].
pub(crate) fn erlang_cutoff(k: usize) -> f64 {
    let ln_target = TAIL_MASS.ln();
    let mut hi = (k as f64).max(1.0);
    while ln_erlang_upper_tail(k, hi) > ln_target {
        hi *= 2.0;
    }
    let mut lo = 0.5 * hi;
    while hi - lo > 1.0 {
        let mid = 0.5 * (lo + hi);
        if ln_erlang_upper_tail(k, mid) > ln_target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Binomial coefficient `C(n, k)` as f64, exact for `n ≤ 64` (computed in
/// 128-bit integers).
pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    assert!(n <= 64, "binomial coefficients supported up to n = 64");
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for j in 0..k {
        c = c * (n - j) as u128 / (j + 1) as u128;
    }
    c as f64
}
