//! Analytic estimates checked against exact tables.

use multibase::*;
use num_bigint::BigUint;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn binary_23() -> BaseSystem {
    BaseSystem::new(&[2, 3], 2).unwrap()
}

#[test]
fn saddle_count_estimate_within_factor_two() {
    let s = binary_23();
    let table = build_count_table(&s, 10_000).unwrap();
    let est = estimate_count(&s, 10_000).unwrap();
    let ratio = (est.log_estimate - table.ln_count(10_000)).exp();
    assert!((0.5..=2.0).contains(&ratio), "{ratio}");
    assert!(est.residual <= SOLVER_TOLERANCE);
}

#[test]
fn chernoff_gap_is_smallest_near_the_saddle() {
    let s = binary_23();
    let n = 5_000;
    let exact = build_count_table(&s, n).unwrap().ln_count(n);
    let r0 = estimate_count(&s, n).unwrap().r;
    let at_saddle = chernoff_log_bound(&s, n, r0).unwrap();
    for factor in [0.2, 0.5, 0.8, 1.25, 2.0, 5.0] {
        let bound = chernoff_log_bound(&s, n, r0 * factor).unwrap();
        assert!(bound >= exact);
        assert!(bound >= at_saddle - 1e-9);
    }
}

#[test]
fn saddle_moment_estimate_tracks_exact_mean() {
    let s = binary_23();
    let n = 10_000;
    let exact = build_moment_tables(&s, n, Statistic::SumOfDigits).unwrap();
    let est = estimate_moments(&s, n, Statistic::SumOfDigits).unwrap();
    let ratio = est.mean / rational_to_f64(&exact.mean(n));
    assert!((0.9..=1.1).contains(&ratio), "{ratio}");
    assert!(est.variance > 0.0);
}

#[test]
fn saddle_moments_for_larger_digit_sets() {
    let s = BaseSystem::new(&[2, 3], 3).unwrap();
    let n = 5_000;
    for stat in [Statistic::SumOfDigits, Statistic::HammingWeight, Statistic::digit_count(2).unwrap()] {
        let exact = build_moment_tables(&s, n, stat).unwrap();
        let est = estimate_moments(&s, n, stat).unwrap();
        let ratio = est.mean / rational_to_f64(&exact.mean(n));
        assert!((0.85..=1.15).contains(&ratio), "{stat}: {ratio}");
    }
}

#[test]
fn tv_distance_shrinks_with_n() {
    let s = binary_23();
    for stat in [Statistic::SumOfDigits, Statistic::HammingWeight, Statistic::digit_count(1).unwrap()] {
        let tv: Vec<f64> = [1_000, 10_000, 100_000]
            .iter()
            .map(|&n| normality_report(&s, n, stat, Mode::Exact).unwrap().tv_distance_to_gaussian)
            .collect();
        assert!(tv[0] > tv[1] && tv[1] > tv[2], "{stat}: {tv:?}");
    }
}

#[test]
fn exact_report_equals_moment_tables() {
    let s = BaseSystem::new(&[2, 3, 5], 3).unwrap();
    let n = 3_000;
    for stat in [Statistic::SumOfDigits, Statistic::HammingWeight, Statistic::digit_count(2).unwrap()] {
        let report = normality_report(&s, n, stat, Mode::Exact).unwrap();
        let table = build_moment_tables(&s, n, stat).unwrap();
        let exact = report.exact.unwrap();
        assert_eq!(exact.mean, table.mean(n));
        assert_eq!(exact.variance, table.variance(n));
    }
}

#[test]
fn sampler_counts_agree_with_table() {
    for (bases, d) in [(vec![2u64, 3], 2u32), (vec![3, 5], 4), (vec![2, 5, 7], 3)] {
        let s = BaseSystem::new(&bases, d).unwrap();
        let table = build_count_table(&s, 2_000).unwrap();
        for n in [2u64, 99, 1_024, 2_000] {
            let sampler = build_sampler(&s, n).unwrap();
            assert_eq!(sampler.count(), table.count(n));
            assert!(sampler.count() >= BigUint::from(1u32));
        }
    }
}

#[test]
fn sampled_statistics_match_exact_distribution() {
    let s = binary_23();
    let n = 2_000;
    let exact = normality_report(&s, n, Statistic::HammingWeight, Mode::Exact).unwrap();
    let sampled =
        normality_report(&s, n, Statistic::HammingWeight, Mode::Sampled { count: 20_000, seed: 17 }).unwrap();
    let se = (exact.variance / 20_000.0).sqrt();
    assert!((sampled.mean - exact.mean).abs() < 5.0 * se);
    assert!((sampled.variance / exact.variance - 1.0).abs() < 0.1);
    assert!((sampled.digit_one_at_one - exact.digit_one_at_one).abs() < 0.02);
}

#[test]
fn sampled_representations_are_valid() {
    let s = BaseSystem::new(&[3, 4, 5], 3).unwrap();
    let sampler = build_sampler(&s, 777).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..500 {
        let rep = sampler.sample(&mut rng);
        assert_eq!(rep.evaluate(), 777);
        assert!(Representation::new(&s, rep.terms().to_vec()).is_ok());
    }
}

#[test]
fn fluctuation_bounded_on_short_grid() {
    let s = binary_23();
    let table = build_count_table(&s, 50_000).unwrap();
    let values: Vec<f64> = (0..)
        .map(|k| (1000.0 * 1.1f64.powi(k)).ceil() as u64)
        .take_while(|&n| n <= 50_000)
        .map(|n| fluctuation_K(&s, n, &table.count(n)).unwrap())
        .collect();
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(0.0, f64::max);
    assert!(min > 0.0 && max / min < 10.0);
}

#[test]
fn theorem1_envelope_at_one_hundred_thousand() {
    let s = BaseSystem::new(&[2, 3, 5], 2).unwrap();
    let n = 100_000;
    let exact = build_count_table(&s, n).unwrap().ln_count(n);
    let ln = (n as f64).ln();
    assert!((theorem1_log_estimate(&s, n).unwrap() - exact).abs() <= 5.0 * ln.ln());
}

#[test]
fn mahler_ratio_within_envelope() {
    let table = count_via_power_partition(2, 3, 3_000_000).unwrap();
    for n in [1_000u64, 10_000, 100_000, 1_000_000] {
        let ratio = table.ln_count(3 * n) / mahler_log_estimate(3, n).unwrap();
        assert!((0.5..=1.5).contains(&ratio), "n = {n}: {ratio}");
    }
}
