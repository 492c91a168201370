mod oracles;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use skewlens::divergence::{wilcoxon_from_differences, wilcoxon_signed_rank, PValueMethod};
use skewlens::WilcoxonMode;

use oracles::brute_force_wilcoxon;

/// Small integer magnitudes so ties and zeros are common.
fn tied_differences(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-4i32..=4) as f64 * 0.5).collect()
}

#[test]
fn exact_matches_enumeration_with_ties_and_zeros() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    while checked < 200 {
        let n = rng.gen_range(1..=12);
        let diffs = tied_differences(&mut rng, n);
        if diffs.iter().all(|&d| d == 0.0) {
            continue;
        }
        let got = wilcoxon_from_differences(&diffs, WilcoxonMode::Exact).unwrap();
        let (w_plus, p) = brute_force_wilcoxon(&diffs);
        assert_eq!(got.w_plus, w_plus, "{diffs:?}");
        assert!(
            (got.p_two_sided - p).abs() <= 1e-12,
            "{diffs:?}: {} vs {p}",
            got.p_two_sided
        );
        checked += 1;
    }
}

#[test]
fn exact_matches_enumeration_on_continuous_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let n = rng.gen_range(1..=12);
        let pairs: Vec<(f64, f64)> = (0..n).map(|_| (rng.gen::<f64>(), rng.gen::<f64>())).collect();
        let diffs: Vec<f64> = pairs.iter().map(|(x, y)| x - y).collect();
        let got = wilcoxon_signed_rank(&pairs, WilcoxonMode::Exact).unwrap();
        assert!((got.p_two_sided - brute_force_wilcoxon(&diffs).1).abs() <= 1e-12);
    }
}

#[test]
fn normal_tracks_exact_without_ties() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..100 {
        let n = rng.gen_range(20..=25);
        let mut mags: Vec<f64> = (1..=n).map(|k| k as f64).collect();
        mags.shuffle(&mut rng);
        let shift = rng.gen_range(0.2..0.8);
        let diffs: Vec<f64> = mags.iter().map(|&m| if rng.gen_bool(shift) { m } else { -m }).collect();
        let exact = wilcoxon_from_differences(&diffs, WilcoxonMode::Exact).unwrap();
        let normal = wilcoxon_from_differences(&diffs, WilcoxonMode::Normal).unwrap();
        assert_eq!(normal.method, PValueMethod::Normal);
        assert!(
            (exact.p_two_sided - normal.p_two_sided).abs() < 0.01,
            "n={n}: exact {} normal {}",
            exact.p_two_sided,
            normal.p_two_sided
        );
    }
}

#[test]
fn auto_switches_at_twenty_five() {
    let diffs: Vec<f64> = (1..=25)
        .map(|k| if k % 3 == 0 { -(k as f64) } else { k as f64 })
        .collect();
    assert_eq!(
        wilcoxon_from_differences(&diffs, WilcoxonMode::Auto).unwrap().method,
        PValueMethod::Exact
    );
    let diffs: Vec<f64> = (1..=26).map(|k| k as f64).collect();
    assert_eq!(
        wilcoxon_from_differences(&diffs, WilcoxonMode::Auto).unwrap().method,
        PValueMethod::Normal
    );
}

fn diffs_strategy() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((-6i32..=6).prop_map(|v| v as f64), 1..40)
        .prop_filter("needs a nonzero difference", |d| d.iter().any(|&x| x != 0.0))
}

proptest! {
    #[test]
    fn negation_swaps_sums_and_keeps_p(diffs in diffs_strategy()) {
        for mode in [WilcoxonMode::Exact, WilcoxonMode::Normal] {
            let a = wilcoxon_from_differences(&diffs, mode).unwrap();
            let neg: Vec<f64> = diffs.iter().map(|d| -d).collect();
            let b = wilcoxon_from_differences(&neg, mode).unwrap();
            prop_assert_eq!(a.w_plus, b.w_minus);
            prop_assert_eq!(a.w_minus, b.w_plus);
            prop_assert!((a.p_two_sided - b.p_two_sided).abs() <= 1e-12);
        }
    }

    #[test]
    fn positive_scaling_is_invisible(diffs in diffs_strategy(), scale in 0.01f64..100.0) {
        let scaled: Vec<f64> = diffs.iter().map(|d| d * scale).collect();
        let a = wilcoxon_from_differences(&diffs, WilcoxonMode::Auto).unwrap();
        let b = wilcoxon_from_differences(&scaled, WilcoxonMode::Auto).unwrap();
        prop_assert_eq!(a.w_plus, b.w_plus);
        prop_assert_eq!(a.p_two_sided, b.p_two_sided);
    }

    #[test]
    fn p_is_a_probability_and_sums_add_up(diffs in diffs_strategy()) {
        let r = wilcoxon_from_differences(&diffs, WilcoxonMode::Auto).unwrap();
        let n = r.n_effective as f64;
        prop_assert!(r.p_two_sided > 0.0 && r.p_two_sided <= 1.0);
        prop_assert_eq!(r.w_plus + r.w_minus, n * (n + 1.0) / 2.0);
    }
}
