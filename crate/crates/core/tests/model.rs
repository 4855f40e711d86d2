//! System-model types: parameter validation, pmf handling, reproducible
//! sampling.

use approx::{assert_abs_diff_eq, assert_relative_eq};
use fh_outage::model::{
    sample_channel, sample_user_count, NetworkConfig, RngSpec, UserCountPmf,
};
use fh_outage::Error;
use rand::Rng;

#[test]
fn config_accepts_valid_parameters() {
    let cfg = NetworkConfig::new(20, 5, 100.0, 20).unwrap();
    assert_eq!(cfg.u(), 20);
    assert_eq!(cfg.v(), 5);
    assert_eq!(cfg.n_des(), 20);
    assert_relative_eq!(cfg.gamma(), 100.0);
    assert_relative_eq!(cfg.hop_fraction(), 0.25);
}

#[test]
fn config_rejects_bad_parameters() {
    assert!(matches!(
        NetworkConfig::new(10, 0, 1.0, 1),
        Err(Error::InvalidParameter { .. })
    ));
    assert!(matches!(
        NetworkConfig::new(10, 11, 1.0, 1),
        Err(Error::InvalidParameter { .. })
    ));
    assert!(matches!(
        NetworkConfig::new(10, 5, 0.0, 1),
        Err(Error::InvalidParameter { .. })
    ));
    assert!(matches!(
        NetworkConfig::new(10, 5, f64::NAN, 1),
        Err(Error::InvalidParameter { .. })
    ));
    assert!(matches!(
        NetworkConfig::new(10, 5, 1.0, 0),
        Err(Error::InvalidParameter { .. })
    ));
}

#[test]
fn db_conversion_is_decimal() {
    let cfg = NetworkConfig::from_db(10, 2, 20.0, 10).unwrap();
    assert_relative_eq!(cfg.gamma(), 100.0, max_relative = 1e-12);
    let cfg = NetworkConfig::from_db(10, 2, -30.0, 10).unwrap();
    assert_relative_eq!(cfg.gamma(), 1e-3, max_relative = 1e-12);
}

#[test]
fn with_v_and_with_gamma_rebuild_consistently() {
    let cfg = NetworkConfig::new(8, 2, 10.0, 4).unwrap();
    assert_eq!(cfg.with_v(7).unwrap().v(), 7);
    assert!(cfg.with_v(9).is_err());
    assert_relative_eq!(cfg.with_gamma(2.5).unwrap().gamma(), 2.5);
    assert!(cfg.with_gamma(-1.0).is_err());
}

#[test]
fn pmf_requires_unit_mass_and_trims_zeros() {
    let pmf = UserCountPmf::new([0.5, 0.3, 0.2, 0.0, 0.0]).unwrap();
    assert_eq!(pmf.n_max(), 3);
    assert_eq!(pmf.probs().len(), 3);
    assert_relative_eq!(pmf.prob(1), 0.5);
    assert_relative_eq!(pmf.prob(3), 0.2);
    assert_relative_eq!(pmf.prob(4), 0.0);
    assert_relative_eq!(pmf.mean(), 0.5 + 2.0 * 0.3 + 3.0 * 0.2);
    assert_relative_eq!(pmf.min_positive(), 0.2);

    assert!(UserCountPmf::new([0.5, 0.4]).is_err());
    assert!(UserCountPmf::new([1.5, -0.5]).is_err());
    assert!(UserCountPmf::new([] as [f64; 0]).is_err());
}

#[test]
fn pmf_allows_interior_zeros() {
    let pmf = UserCountPmf::new([0.5, 0.0, 0.5]).unwrap();
    assert_eq!(pmf.n_max(), 3);
    assert_relative_eq!(pmf.prob(2), 0.0);
}

#[test]
fn truncated_poisson_matches_ratio_recursion() {
    // Conditioned on n ≤ 4, the weights follow q_{n+1}/q_n = λ/n.
    let lambda = 1.7;
    let pmf = UserCountPmf::poisson_truncated(lambda, 4).unwrap();
    assert_eq!(pmf.n_max(), 4);
    assert_relative_eq!(pmf.probs().iter().sum::<f64>(), 1.0, epsilon = 1e-12);
    for n in 1..4 {
        assert_relative_eq!(
            pmf.prob(n + 1) / pmf.prob(n),
            lambda / n as f64,
            max_relative = 1e-10
        );
    }

    let deterministic = UserCountPmf::poisson_truncated(2.0, 1).unwrap();
    assert_relative_eq!(deterministic.prob(1), 1.0);

    assert!(UserCountPmf::poisson_truncated(-1.0, 3).is_err());
    assert!(UserCountPmf::poisson_truncated(1.0, 0).is_err());
}

#[test]
fn rng_spec_reproduces_and_substreams_differ() {
    let spec = RngSpec::new(42).with_stream(7);
    let a: Vec<f64> = (0..8).map({
        let mut r = spec.rng();
        move |_| r.random()
    }).collect();
    let b: Vec<f64> = (0..8).map({
        let mut r = spec.rng();
        move |_| r.random()
    }).collect();
    assert_eq!(a, b);

    let c: f64 = spec.substream(1).rng().random();
    assert_ne!(a[0], c);
    assert_eq!(spec.substream(3).stream, 10);
}

#[test]
fn user_count_sampling_matches_pmf() {
    let pmf = UserCountPmf::new([0.5, 0.3, 0.2]).unwrap();
    let mut rng = RngSpec::new(11).rng();
    let draws = 200_000usize;
    let mut counts = [0usize; 3];
    for _ in 0..draws {
        let n = sample_user_count(&pmf, &mut rng);
        counts[n - 1] += 1;
    }
    for (k, &c) in counts.iter().enumerate() {
        let p = pmf.prob(k + 1);
        let sigma = (p * (1.0 - p) / draws as f64).sqrt();
        assert_abs_diff_eq!(c as f64 / draws as f64, p, epsilon = 4.0 * sigma);
    }
}

#[test]
fn channel_draws_have_unit_mean_gains() {
    let mut rng = RngSpec::new(5).rng();
    let draws = 100_000usize;
    let mut sum_direct = 0.0;
    let mut sum_cross = 0.0;
    for _ in 0..draws {
        let d = sample_channel(3, &mut rng);
        assert_eq!(d.n(), 3);
        assert_eq!(d.cross.len(), 2);
        assert_relative_eq!(d.cross_sum(), d.cross[0] + d.cross[1]);
        sum_direct += d.direct;
        sum_cross += d.cross_sum();
    }
    // Exp(1) has mean 1 and variance 1: 4σ windows.
    let sigma = (1.0 / draws as f64).sqrt();
    assert_abs_diff_eq!(sum_direct / draws as f64, 1.0, epsilon = 4.0 * sigma);
    assert_abs_diff_eq!(
        sum_cross / (2.0 * draws as f64),
        1.0,
        epsilon = 4.0 * sigma
    );
}

#[test]
fn single_user_draw_has_no_interferers() {
    let mut rng = RngSpec::new(1).rng();
    let d = sample_channel(1, &mut rng);
    assert_eq!(d.n(), 1);
    assert!(d.cross.is_empty());
    assert_relative_eq!(d.cross_sum(), 0.0);
}
