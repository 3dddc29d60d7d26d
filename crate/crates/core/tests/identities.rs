use proptest::prelude::*;
use qtrace_core::ensemble::{exact_g_power_trace, exact_g_power_trace_eigen, exact_power_trace, EnsembleSpec};
use qtrace_core::fixtures::{random_ensemble, reference_ensemble};
use qtrace_core::gst::{estimate_power_trace, GstConfig, GstStrategy};
use qtrace_core::ht::{estimate_power_trace_enumerate, g_moments_enumerate, DEFAULT_ENUMERATION_CAP};
use qtrace_core::rng::stream;
use qtrace_core::series::{binomial_weights, evaluate_series, evaluate_series_on_moments};
use qtrace_core::TraceEstimate;

fn ensemble(seed: u64, n: usize, alpha: usize) -> EnsembleSpec {
    random_ensemble(&mut stream(seed, 0, 0), n, alpha)
}

#[test]
fn three_routes_agree_on_reference_model() {
    let e = reference_ensemble();
    let enumerate = GstStrategy::Enumerate { cap: DEFAULT_ENUMERATION_CAP };
    for m in 2..=4usize {
        let oracle = exact_power_trace(&e, m as u32).unwrap();
        let ht = estimate_power_trace_enumerate(&e, m - 1, DEFAULT_ENUMERATION_CAP).unwrap();
        let gst = estimate_power_trace(&e, m, enumerate, &GstConfig::default(), 0).unwrap();
        assert!((ht.value - oracle).abs() < 1e-10, "m={m}");
        assert!((gst.value - oracle).abs() < 1e-8, "m={m}");
    }
}

#[test]
fn g_square_identity() {
    let e = reference_ensemble();
    let g2 = exact_g_power_trace(&e, 2).unwrap();
    let via_purity = 8.0 - 4.0 + 4.0 * exact_power_trace(&e, 2).unwrap();
    assert!((g2 - via_purity).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn binomial_series_reproduces_power_traces(seed in any::<u64>(), n in 1usize..=4, alpha in 1usize..=4, m in 1usize..=6) {
        let e = ensemble(seed, n, alpha);
        let gk: Vec<TraceEstimate> = (0..=m)
            .map(|k| TraceEstimate::oracle(exact_g_power_trace(&e, k as u32).unwrap()))
            .collect();
        let v = evaluate_series(&binomial_weights(m), &gk).unwrap().value;
        prop_assert!((v - exact_power_trace(&e, m as u32).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn word_sum_matches_spectral_trace(seed in any::<u64>(), n in 1usize..=3, alpha in 1usize..=3, k in 0u32..=5) {
        let e = ensemble(seed, n, alpha);
        let a = exact_g_power_trace(&e, k).unwrap();
        let b = exact_g_power_trace_eigen(&e, k).unwrap();
        prop_assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn ht_moments_match_dense(seed in any::<u64>(), n in 1usize..=3, alpha in 1usize..=3) {
        let e = ensemble(seed, n, alpha);
        let moments = g_moments_enumerate(&e, 5, DEFAULT_ENUMERATION_CAP).unwrap();
        let moments: Vec<TraceEstimate> = moments.into_iter().map(TraceEstimate::oracle).collect();
        for m in 1..=5 {
            let v = evaluate_series_on_moments(&binomial_weights(m), e.dim(), &moments).unwrap().value;
            prop_assert!((v - exact_power_trace(&e, m as u32).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn gst_enumeration_matches_oracle(seed in any::<u64>(), n in 2usize..=4, alpha in 1usize..=3, m in 1usize..=3) {
        let e = ensemble(seed, n, alpha);
        let cfg = GstConfig::default();
        let v = estimate_power_trace(&e, m, GstStrategy::Enumerate { cap: 1_000 }, &cfg, seed).unwrap().value;
        prop_assert!((v - exact_power_trace(&e, m as u32).unwrap()).abs() < 1e-6);
    }
}
