use gcs_core::groups::GroupPartition;
use gcs_core::samplesize::{
    c0, c0_dominates_quadratic, failure_probability, ln_sauer_bound, min_measurements, SampleSizeQuery, SparsityMode,
};
use proptest::prelude::*;

fn m_pure(n: u64, k: u64, delta: f64, zeta: f64) -> u64 {
    min_measurements(&SampleSizeQuery::pure(n, k, delta, zeta).unwrap()).m
}

proptest! {
    #[test]
    fn planned_m_is_the_smallest_sufficient(n in 100u64..10_000_000, k in 1u64..100, delta in 0.05f64..0.75, e in 1.0f64..12.0) {
        let zeta = 10f64.powf(-e);
        let q = SampleSizeQuery::pure(n, k.min(n), delta, zeta).unwrap();
        let m = min_measurements(&q).m;
        prop_assert!(q.failure_probability(m) <= zeta);
        prop_assert!(q.failure_probability(m - 1) > zeta * (1.0 - 1e-9));
    }

    #[test]
    fn monotone_in_every_argument(n in 100u64..1_000_000, k in 1u64..50, delta in 0.05f64..0.7, e in 1.0f64..10.0) {
        let zeta = 10f64.powf(-e);
        let m = m_pure(n, k, delta, zeta);
        prop_assert!(m_pure(n + 1000, k, delta, zeta) >= m);
        prop_assert!(m_pure(n, k + 1, delta, zeta) >= m);
        prop_assert!(m_pure(n, k, delta + 0.05, zeta) <= m);
        prop_assert!(m_pure(n, k, delta, zeta / 10.0) >= m);
    }

    #[test]
    fn failure_probability_decreases_in_m(m in 1u64..1_000_000, k in 1u64..40, delta in 0.05f64..0.75, lnj in 0.0f64..500.0) {
        let p0 = failure_probability(m, k, delta, lnj).unwrap();
        let p1 = failure_probability(m + 100, k, delta, lnj).unwrap();
        prop_assert!(p1 <= p0);
    }
}

#[test]
fn growth_in_n_is_k_log_n() {
    // with the Sauer bound d(1 + ln n - ln d), multiplying n by 10^6 adds
    // exactly 32/δ² · k · ln(10^6) before rounding
    for &(k, delta) in &[(5u64, 0.25), (20, 0.1), (50, 0.5)] {
        let lo = min_measurements(&SampleSizeQuery::pure(1_000, k, delta, 1e-6).unwrap());
        let hi = min_measurements(&SampleSizeQuery::pure(1_000_000_000, k, delta, 1e-6).unwrap());
        let want = 32.0 / (delta * delta) * k as f64 * 1e6f64.ln();
        assert!((hi.value - lo.value - want).abs() <= 1e-9 * want, "k = {k}");
    }
}

#[test]
fn group_mode_uses_group_counts() {
    let q = SampleSizeQuery::group(20_000, 20, 6_000, 5, 0.25, 1e-6).unwrap();
    assert_eq!(q.mode, SparsityMode::Group { g: 6_000, s_max: 5 });
    assert!((q.ln_family_size() - ln_sauer_bound(6_000, 5).unwrap()).abs() < 1e-12);
    assert!(min_measurements(&q).m < m_pure(20_000, 20, 0.25, 1e-6));

    let p = GroupPartition::uniform(60, 3).unwrap();
    let from = SampleSizeQuery::from_partition(&p, 9, 0.3, 1e-3).unwrap();
    assert_eq!(from.mode, SparsityMode::Group { g: 20, s_max: 3 });
    assert!(SampleSizeQuery::from_partition(&p, 2, 0.3, 1e-3).is_err());
}

#[test]
fn concentration_exponent() {
    assert_eq!(c0(0.75).unwrap(), 0.0703125);
    assert_eq!(c0(0.0).unwrap(), 0.0);
    assert!(c0(0.8).is_err());
    for i in 0..=75 {
        assert!(c0_dominates_quadratic(i as f64 / 100.0).unwrap());
    }
}

#[test]
fn rejects_out_of_range_queries() {
    assert!(SampleSizeQuery::pure(10, 0, 0.2, 0.1).is_err());
    assert!(SampleSizeQuery::pure(10, 11, 0.2, 0.1).is_err());
    assert!(SampleSizeQuery::pure(10, 2, 0.0, 0.1).is_err());
    assert!(SampleSizeQuery::pure(10, 2, 0.8, 0.1).is_err());
    assert!(SampleSizeQuery::pure(10, 2, 0.2, 1.0).is_err());
    assert!(SampleSizeQuery::group(10, 2, 4, 5, 0.2, 0.1).is_err());
}
