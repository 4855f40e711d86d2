//! Integral kernels: closed-form spot values, estimator agreement, and
//! analytic inequalities.

use approx::{assert_abs_diff_eq, assert_relative_eq};
use fh_outage::kernels::{alpha, f_factor, kappa, phi, psi, PsiCache, PsiEstimator};
use fh_outage::model::RngSpec;
use fh_outage::Error;

#[test]
fn alpha_hand_value_two_users() {
    // n = 2, θ = 1, b = 1, c = 1/2:
    // (0.5·log2(1.5) + 0.5) / 2.
    let expected = (0.5 * 1.5f64.log2() + 0.5) / 2.0;
    assert_relative_eq!(alpha(2, 1.0, 1.0, 0.5), expected, max_relative = 1e-14);
    assert_abs_diff_eq!(alpha(2, 1.0, 1.0, 0.5), 0.396_240_625_180_289, epsilon = 1e-12);
}

#[test]
fn alpha_at_zero_gain_is_the_entropy_share() {
    // θ = 0 kills the log term, leaving −(n−1)c·log2 c.
    assert_relative_eq!(alpha(3, 0.0, 2.0, 0.25), 1.0, max_relative = 1e-14);
    assert_relative_eq!(alpha(2, 0.0, 5.0, 0.5), 0.5, max_relative = 1e-14);
}

#[test]
fn alpha_degenerate_cases_vanish() {
    assert_eq!(alpha(1, 3.0, 1.0, 0.5), 0.0);
    assert_eq!(alpha(4, 3.0, 1.0, 1.0), 0.0);
    assert_eq!(alpha(4, 3.0, 1.0, 0.0), 0.0);
}

#[test]
fn alpha_is_nonnegative_and_bounded_by_its_pieces() {
    for n in [2usize, 3, 8, 32] {
        for &theta in &[0.0, 0.3, 2.0, 40.0] {
            for &c in &[0.1, 0.5, 0.9] {
                let a = alpha(n, theta, 2.0, c);
                assert!(a >= 0.0);
                // Numerator is at most log2(1 + bθ) + entropy share, and the
                // division by (bθ + 1) keeps the whole thing below that sum.
                let cap = (1.0 + 2.0 * theta).log2() - (n - 1) as f64 * c * c.log2();
                assert!(a <= cap + 1e-12);
            }
        }
    }
}

#[test]
fn psi_is_one_at_zero_damping() {
    let (quad, _) = psi(2, 0.0, 1.5, 0.4, PsiEstimator::Quadrature).unwrap();
    assert_abs_diff_eq!(quad, 1.0, epsilon = 1e-6);
    let mc = psi(
        4,
        0.0,
        1.5,
        0.4,
        PsiEstimator::MonteCarlo {
            samples: 20_000,
            rng: RngSpec::new(3),
        },
    )
    .unwrap();
    assert_abs_diff_eq!(mc.0, 1.0, epsilon = 1e-12);
    assert_abs_diff_eq!(mc.1, 0.0, epsilon = 1e-12);
}

#[test]
fn psi_estimators_agree_for_two_and_three_users() {
    for (n, b1, b2, c) in [
        (2usize, -0.8, 2.0, 0.3),
        (2, -3.0, 0.5, 0.7),
        (3, -0.8, 2.0, 0.3),
        (3, -2.0, 1.0, 0.5),
    ] {
        let (exact, qtol) = psi(n, b1, b2, c, PsiEstimator::Quadrature).unwrap();
        let (est, se) = psi(
            n,
            b1,
            b2,
            c,
            PsiEstimator::MonteCarlo {
                samples: 400_000,
                rng: RngSpec::new(12),
            },
        )
        .unwrap();
        assert!(
            (est - exact).abs() <= 3.0 * se + qtol,
            "psi_{n}({b1}, {b2}, {c}): MC {est} ± {se} vs quadrature {exact}"
        );
    }
}

#[test]
fn psi_cache_is_deterministic_and_monotone_in_damping() {
    let a = PsiCache::generate(3, 2.0, 0.4, 50_000, RngSpec::new(8)).unwrap();
    let b = PsiCache::generate(3, 2.0, 0.4, 50_000, RngSpec::new(8)).unwrap();
    assert_eq!(a.len(), 50_000);
    assert_eq!(a.survival_term(-1.3), b.survival_term(-1.3));

    // exp(b1·G) with G > 0 shrinks as b1 moves away from zero.
    let mut last = 1.0;
    for k in 1..=6 {
        let val = a.survival_term(-0.5 * f64::from(k));
        assert!(val < last && val > 0.0);
        last = val;
    }
}

#[test]
fn psi_rejects_invalid_parameters() {
    assert!(matches!(
        psi(2, 0.5, 1.0, 0.5, PsiEstimator::Quadrature),
        Err(Error::InvalidParameter { .. })
    ));
    assert!(matches!(
        psi(2, -1.0, 0.0, 0.5, PsiEstimator::Quadrature),
        Err(Error::InvalidParameter { .. })
    ));
    assert!(matches!(
        psi(2, -1.0, 1.0, 1.5, PsiEstimator::Quadrature),
        Err(Error::InvalidParameter { .. })
    ));
    assert!(matches!(
        psi(4, -1.0, 1.0, 0.5, PsiEstimator::Quadrature),
        Err(Error::InvalidParameter { .. })
    ));
    assert!(matches!(
        PsiCache::generate(1, 1.0, 0.5, 100, RngSpec::new(0)),
        Err(Error::InvalidParameter { .. })
    ));
    assert!(matches!(
        PsiCache::generate(23, 1.0, 0.5, 100, RngSpec::new(0)),
        Err(Error::MixtureCapExceeded { .. })
    ));
    assert!(matches!(
        PsiCache::generate(3, 1.0, 0.5, 0, RngSpec::new(0)),
        Err(Error::InvalidParameter { .. })
    ));
}

#[test]
fn phi_is_one_at_zero_damping() {
    for n in [2usize, 3, 6] {
        assert_abs_diff_eq!(phi(n, 0.0, 1.0, 0.5, 0.3), 1.0, epsilon = 1e-6);
    }
}

#[test]
fn phi_collapses_to_plain_exponential_without_dependence() {
    // c1 = 0 removes the gain factor and c2 = 1 removes the hop-entropy
    // discount, so the integrand is constant e^{b1}.
    for &b1 in &[-0.1, -1.0, -4.0] {
        assert_relative_eq!(phi(2, b1, 3.0, 0.0, 1.0), b1.exp(), max_relative = 1e-6);
    }
}

#[test]
fn phi_dominates_its_jensen_floor() {
    // 2^{-α} ≤ 1 and b1 ≤ 0 give e^{b1·g·2^{-α}} ≥ e^{b1·g}; Jensen plus
    // concavity of (1 + b2·θ)^{c1} in θ then floor the whole integral at
    // exp(b1·((n−1)b2 + 1)^{c1}).
    for (n, b1, b2, c1, c2) in [
        (2usize, -1.0, 2.0, 0.5, 0.5),
        (3, -0.7, 1.0, 0.8, 0.25),
        (5, -2.0, 0.3, 0.36, 0.4),
    ] {
        let floor = (b1 * ((n as f64 - 1.0) * b2 + 1.0).powf(c1)).exp();
        let val = phi(n, b1, b2, c1, c2);
        assert!(val >= floor - 1e-9, "phi_{n} = {val} below floor {floor}");
        assert!(val <= 1.0 + 1e-9);
    }
}

#[test]
fn f_factor_hand_values() {
    // v = 1 of u = 2, two users, γ = 1: 2^1·(1 + 1)^{1/2} = 2√2.
    assert_relative_eq!(
        f_factor(1, 2, 2, 1.0),
        2.0 * std::f64::consts::SQRT_2,
        max_relative = 1e-14
    );
    // A lone user has no hopping penalty at all.
    assert_relative_eq!(f_factor(3, 9, 1, 50.0), 1.0);
    // v = u: no entropy, full interference mean.
    assert_relative_eq!(f_factor(10, 10, 3, 5.0), 2.0, max_relative = 1e-14);
}

#[test]
fn kappa_hand_values_and_guards() {
    // v = u = anything, two users: exactly 1.
    assert_relative_eq!(kappa(7, 7, 2).unwrap(), 1.0, max_relative = 1e-14);
    // v = 1 of u = 2, three users: 2^{-2}/1 · 2^{0.25−1}.
    assert_relative_eq!(
        kappa(1, 2, 3).unwrap(),
        0.25 * 2f64.powf(-0.75),
        max_relative = 1e-14
    );
    assert!(matches!(kappa(1, 2, 1), Err(Error::InvalidParameter { .. })));
}
