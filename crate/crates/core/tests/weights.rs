use num_bigint::BigUint;
use peelfrag::weights::*;
use proptest::prelude::*;

const S3: f64 = 1.732_050_807_568_877_2;

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * b.abs().max(1e-300)
}

// Peeling recurrence on u128: the triangle on the root edge has its apex
// inside (n-1 inner vertices left, perimeter p+1) or at boundary vertex k
// (two holes of perimeters k+1 and p-k). A 2-gon may also be glued shut.
fn oracle_counts(n_max: usize, p_max: usize) -> Vec<Vec<u128>> {
    let pw = p_max + n_max + 2;
    let mut t = vec![vec![0u128; pw + 1]; n_max + 1];
    for n in 0..=n_max {
        for p in 1..=(pw - n) {
            let mut s = if n == 0 && p == 2 { 1 } else { 0 };
            if n > 0 && p < pw {
                s += t[n - 1][p + 1];
            }
            for k in 0..p {
                for n1 in 0..=n {
                    // a hole as large as the parent pairs with an empty 1-gon
                    let (a, b) = (k + 1, p - k);
                    s += t[n1][a] * t[n - n1][b];
                }
            }
            t[n][p] = s;
        }
    }
    t
}

#[test]
fn counts_small_cases() {
    assert_eq!(count_triangulations(0, 2).unwrap(), BigUint::from(1u32));
    assert_eq!(count_triangulations(0, 1).unwrap(), BigUint::from(0u32));
    assert_eq!(count_triangulations(1, 1).unwrap(), BigUint::from(1u32));
    assert_eq!(count_triangulations(2, 1).unwrap(), BigUint::from(4u32));
    let dp = count_dp(2, 2).unwrap();
    assert_eq!(dp[1][1], BigUint::from(1u32));
    assert_eq!(dp[2][1], BigUint::from(4u32));
    assert_eq!(dp[0][2], BigUint::from(1u32));
}

#[test]
fn counts_match_the_peeling_recurrence() {
    let (n_max, p_max) = (6, 6);
    let t = oracle_counts(n_max, p_max);
    for n in 0..=n_max {
        for p in 1..=p_max {
            assert_eq!(
                count_triangulations(n as u64, p as u64).unwrap(),
                BigUint::from(t[n][p]),
                "n = {n}, p = {p}"
            );
        }
    }
}

#[test]
fn counts_match_dp_on_the_desk_table() {
    let dp = count_dp(40, 40).unwrap();
    for (n, row) in dp.iter().enumerate() {
        for (p, c) in row.iter().enumerate().skip(1) {
            assert_eq!(count_triangulations(n as u64, p as u64).unwrap(), *c, "n = {n}, p = {p}");
        }
    }
}

#[test]
fn dp_refuses_large_tables() {
    assert!(count_dp(DP_LIMIT + 1, 3).is_err());
}

#[test]
fn boltzmann_sums_approach_one() {
    for p in 1..=3u64 {
        let a = boltzmann_partial_sum(p, 20).unwrap();
        let b = boltzmann_partial_sum(p, 60).unwrap();
        assert!(a < b && b < 1.0, "p = {p}: {a} {b}");
        assert!(b > 0.9, "p = {p}: {b}");
    }
}

#[test]
fn partition_function_values() {
    let w = WeightTable::new(100).unwrap();
    assert!(close(w.z(1), (2.0 - S3) / 4.0, 1e-13));
    assert!(close(w.z(1), 0.066_987_3, 1e-6));
    assert!(close(w.z(2), 3.0 * S3 / 4.0, 1e-13));
    assert!(close(w.z(3), 3.0 * S3 / 2.0, 1e-13));
    for p in 1..=100 {
        assert!(w.z(p) > 0.0);
        assert!((w.log_z(p) - log_z_closed(p)).abs() < 1e-11, "p = {p}");
    }
}

#[test]
fn recurrence_holds_up_to_ten_thousand() {
    let w = WeightTable::new(10_001).unwrap();
    for p in 1..=10_000 {
        assert!(w.recurrence_residual(p).unwrap() <= 1e-10, "p = {p}");
    }
    assert!(w.recurrence_residual(10_001).is_err());
}

#[test]
fn table_agrees_with_closed_form_at_large_p() {
    let w = WeightTable::new(100_001).unwrap();
    for p in [1000, 10_000, 100_000] {
        assert!((w.log_z(p) - log_z_closed(p)).abs() < 1e-8 * (p as f64).ln(), "p = {p}");
    }
    let p = 100_000usize;
    let ratio = w.reduced(p + 1) * (p as f64).powf(2.5) / t_delta();
    assert!((0.99..=1.01).contains(&ratio), "{ratio}");
}

#[test]
fn extend_matches_fresh_table() {
    let mut a = WeightTable::new(50).unwrap();
    a.extend_to(500);
    let b = WeightTable::new(500).unwrap();
    for p in 1..=500 {
        assert_eq!(a.reduced_log(p).to_bits(), b.reduced_log(p).to_bits(), "p = {p}");
    }
}

#[test]
fn cycle_and_volume_weights() {
    assert_eq!(cycle_weight(0), 0.0);
    let sp = std::f64::consts::PI.sqrt();
    assert!(close(cycle_weight(1), 2f64.sqrt() * (2.0 + S3) / (3.0 * sp), 1e-15));
    assert!(close(cycle_weight(2), 6f64.sqrt() / (9.0 * sp) * 6.0, 1e-15));
    assert!(close(cycle_weight(1), 0.992_580, 5e-6));
    assert!(close(cycle_weight(2), 0.921_316, 5e-6));
    assert!(close(volume_weight(1), 2.154_701, 1e-6));
    assert_eq!(volume_weight(2), 1.0);
    assert_eq!(volume_weight(3), 5.0);
    let w = WeightTable::new(2000).unwrap();
    for p in 1..=2000 {
        assert!(close(w.f(p), cycle_weight(p), 1e-9), "f({p})");
        assert!(close(w.g(p), volume_weight(p), 1e-12), "g({p})");
        assert!(close(w.log_c(p), log_c_closed(p), 1e-10), "C({p})");
    }
}

#[test]
fn cycle_weight_is_c_over_z() {
    for p in 1..=300 {
        let direct = (log_c_closed(p) - log_z_closed(p)).exp();
        assert!(close(cycle_weight(p), direct, 1e-9), "p = {p}");
    }
}

#[test]
fn scaling_constants() {
    assert!((time_factor() - 0.846_284).abs() < 1e-6);
    assert!((height_factor() - 1.181_636).abs() < 1e-6);
    assert!((time_factor() * a_delta() - 2.0 * t_delta()).abs() < 1e-16);
    assert!((time_factor() - 3.0 / (2.0 * std::f64::consts::PI.sqrt())).abs() < 1e-15);
}

#[test]
fn half_plane_sums() {
    let w = WeightTable::new(100_002).unwrap();
    assert!(close(w.q(0), (2.0 - S3) / 4.0, 1e-13));
    let (s, tail) = w.q_sum(10_000);
    assert!((s + tail - (1.0 - 1.0 / S3) / 2.0).abs() < 1e-8, "{}", s + tail);
    assert!((s + tail - (3.0 - S3) / 6.0).abs() < 1e-8);
    let (s, tail) = w.kq_sum(100_000);
    assert!((s + tail - S3 / 6.0).abs() < 1e-6, "{}", s + tail);
    // without the tail the first sum is visibly short
    let (s, _) = w.q_sum(100);
    assert!((s - (3.0 - S3) / 6.0).abs() > 1e-5);
}

#[test]
fn perturbation_breaks_the_recurrence() {
    let mut w = WeightTable::new(20).unwrap();
    w.perturb(7, 1e-6);
    let bad = (6..=7).any(|p| w.recurrence_residual(p).unwrap() > 1e-10);
    assert!(bad);
    assert!(w.recurrence_residual(3).unwrap() <= 1e-10);
}

#[test]
fn invalid_sizes_are_rejected() {
    assert!(WeightTable::new(P_MAX_LIMIT + 1).is_err());
}

proptest! {
    #[test]
    fn weights_increase(p in 2usize..100_000) {
        prop_assert!(cycle_weight(p + 1) > cycle_weight(p));
        prop_assert!(volume_weight(p + 1) > volume_weight(p));
    }

    #[test]
    fn big_ln_matches_f64(x in 1u64..u64::MAX) {
        let b = BigUint::from(x);
        prop_assert!(((big_ln(&b)) - (x as f64).ln()).abs() < 1e-12);
        let big = &b << 2000usize;
        prop_assert!((big_ln(&big) - (x as f64).ln() - 2000.0 * std::f64::consts::LN_2).abs() < 1e-9);
    }

    #[test]
    fn recurrence_holds_at_random_perimeters(p in 1usize..50_000) {
        let w = WeightTable::new(p + 1).unwrap();
        prop_assert!(w.recurrence_residual(p).unwrap() <= 1e-10);
    }
}
