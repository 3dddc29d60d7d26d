use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensemble::EnsembleSpec;
use crate::error::{Error, Result};
use crate::estimate::{Accumulator, EstimateMode, TraceEstimate};
use crate::rng::stream;
use crate::series::{binomial_weights, evaluate_series};

use super::combination::{sample_word, word_from_index};
use super::measure::MeasureMode;
use super::trace::combination_trace;
use super::GstConfig;

const WORD_BATCH: u64 = 256;
const LANE_GST: u64 = 3 << 32;

/// How the sum over words is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GstStrategy {
    /// Every word with its exact weight; refuses above `cap` words.
    Enumerate { cap: u64 },
    /// `words` words sampled by weight.
    MonteCarlo { words: u64 },
}

fn mode_for(strategy: GstStrategy, measure: MeasureMode) -> EstimateMode {
    match (strategy, measure) {
        (_, MeasureMode::Shots(_)) => EstimateMode::McShots,
        (GstStrategy::Enumerate { .. }, MeasureMode::Exact) => EstimateMode::ExactEnumeration,
        _ => EstimateMode::McExactProb,
    }
}

/// Evaluates `f` at `0..count` in fixed batches and merges in index order.
fn indexed_accumulate<F>(count: u64, f: F) -> Result<Accumulator>
where
    F: Fn(u64) -> Result<f64> + Sync,
{
    let batches = count.div_ceil(WORD_BATCH);
    let partials: Vec<Result<Accumulator>> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut acc = Accumulator::default();
            for i in b * WORD_BATCH..((b + 1) * WORD_BATCH).min(count) {
                acc.push(f(i)?);
            }
            Ok(acc)
        })
        .collect();
    let mut total = Accumulator::default();
    for p in partials {
        total = total.merge(p?);
    }
    Ok(total)
}

fn word_count(alpha: usize, k: usize) -> u128 {
    (alpha as u128).saturating_pow(k as u32)
}

/// `Tr{G^k} = Σ_q 𝒫_q Tr{𝒢_q}` over words of length `k`. Word `i` draws its
/// measurement noise (and, for Monte Carlo, the word itself) from stream
/// `(seed, k, i)`.
pub fn estimate_g_power_trace(
    e: &EnsembleSpec,
    k: usize,
    strategy: GstStrategy,
    cfg: &GstConfig,
    seed: u64,
) -> Result<TraceEstimate> {
    cfg.validate()?;
    let mode = mode_for(strategy, cfg.mode);
    if k == 0 {
        return Ok(TraceEstimate::exact(e.dim() as f64, mode));
    }
    let lane = LANE_GST | k as u64;
    match strategy {
        GstStrategy::Enumerate { cap } => {
            let words = word_count(e.alpha(), k);
            if words > cap as u128 {
                return Err(Error::ResourceLimit {
                    what: "enumerated words",
                    requested: words,
                    cap: cap as u128,
                });
            }
            let acc = indexed_accumulate(words as u64, |w| {
                let q = word_from_index(e, k, w);
                let mut rng = stream(seed, lane, w);
                Ok(q.weight() * combination_trace(e, &q, cfg, &mut rng)?.value)
            })?;
            Ok(TraceEstimate {
                value: acc.sum,
                std_error: 0.0,
                samples: acc.count,
                mode,
            })
        }
        GstStrategy::MonteCarlo { words } => {
            if words == 0 {
                return Err(Error::invalid("Monte Carlo word budget must be >= 1"));
            }
            let acc = indexed_accumulate(words, |t| {
                let mut rng = stream(seed, lane, t);
                let q = sample_word(e, k, &mut rng);
                Ok(combination_trace(e, &q, cfg, &mut rng)?.value)
            })?;
            Ok(acc.finish(mode))
        }
    }
}

/// `Tr{ρ^m} = Σ_k (½)^m C(m,k) (−1)^k Tr{G^k}`.
pub fn estimate_power_trace(
    e: &EnsembleSpec,
    m: usize,
    strategy: GstStrategy,
    cfg: &GstConfig,
    seed: u64,
) -> Result<TraceEstimate> {
    if m == 0 {
        return Err(Error::invalid("power m must be >= 1"));
    }
    if let GstStrategy::Enumerate { cap } = strategy {
        let total = (0..=m).fold(0u128, |acc, k| acc.saturating_add(word_count(e.alpha(), k)));
        if total > cap as u128 {
            return Err(Error::ResourceLimit {
                what: "enumerated words",
                requested: total,
                cap: cap as u128,
            });
        }
    }
    let gk = (0..=m)
        .map(|k| estimate_g_power_trace(e, k, strategy, cfg, seed))
        .collect::<Result<Vec<_>>>()?;
    evaluate_series(&binomial_weights(m), &gk)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{exact_combination_trace, exact_g_power_trace, exact_power_trace, Component};
    use crate::fixtures::reference_ensemble;
    use crate::qcore::{ProductGate, RotationParams};

    const ENUM: GstStrategy = GstStrategy::Enumerate { cap: 10_000_000 };

    #[test]
    fn reference_g_traces() {
        let e = reference_ensemble();
        let cfg = GstConfig::default();
        assert_eq!(estimate_g_power_trace(&e, 0, ENUM, &cfg, 0).unwrap().value, 8.0);
        let g2 = estimate_g_power_trace(&e, 2, ENUM, &cfg, 0).unwrap();
        assert_eq!(format!("{:.3}", g2.value), "6.600");
        assert_eq!(g2.mode, EstimateMode::ExactEnumeration);
        assert_eq!(g2.std_error, 0.0);
        let g3 = estimate_g_power_trace(&e, 3, ENUM, &cfg, 0).unwrap();
        assert_eq!(format!("{:.3}", g3.value), "5.914");
        for k in 1..=4 {
            let v = estimate_g_power_trace(&e, k, ENUM, &cfg, 0).unwrap().value;
            assert!((v - exact_g_power_trace(&e, k as u32).unwrap()).abs() < 1e-6);
        }
    }

    #[test]
    fn reference_power_traces() {
        let e = reference_ensemble();
        let cfg = GstConfig::default();
        for (m, want) in [(2, "0.650"), (3, "0.486"), (4, "0.375")] {
            let v = estimate_power_trace(&e, m, ENUM, &cfg, 0).unwrap();
            assert_eq!(format!("{:.3}", v.value), want);
            assert!((v.value - exact_power_trace(&e, m as u32).unwrap()).abs() < 1e-8);
        }
        assert!(estimate_power_trace(&e, 0, ENUM, &cfg, 0).is_err());
    }

    #[test]
    fn pure_state_power_is_one() {
        let g = ProductGate::uniform(3, RotationParams::from_pi_units(0.4, 0.1, 0.9).unwrap()).unwrap();
        let e = EnsembleSpec::new(3, vec![Component { prob: 1.0, gate: g }]).unwrap();
        for m in 1..6 {
            let v = estimate_power_trace(&e, m, ENUM, &GstConfig::default(), 0).unwrap();
            assert!((v.value - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn enumeration_cap_enforced() {
        let e = reference_ensemble();
        let err = estimate_g_power_trace(&e, 4, GstStrategy::Enumerate { cap: 255 }, &GstConfig::default(), 0)
            .unwrap_err();
        assert_eq!(err, Error::ResourceLimit { what: "enumerated words", requested: 256, cap: 255 });
    }

    #[test]
    fn weighted_imaginary_parts_cancel() {
        let e = reference_ensemble();
        for k in 1..=4 {
            let im: f64 = (0..4u64.pow(k as u32))
                .map(|w| {
                    let q = word_from_index(&e, k, w);
                    q.weight() * exact_combination_trace(&e, q.indices()).unwrap().im
                })
                .sum();
            assert!(im.abs() < 1e-9, "k={k}: {im}");
        }
    }

    #[test]
    fn monte_carlo_is_deterministic_and_close() {
        let e = reference_ensemble();
        let cfg = GstConfig::default();
        let mc = GstStrategy::MonteCarlo { words: 4000 };
        let a = estimate_g_power_trace(&e, 2, mc, &cfg, 9).unwrap();
        let b = estimate_g_power_trace(&e, 2, mc, &cfg, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.mode, EstimateMode::McExactProb);
        let exact = exact_g_power_trace(&e, 2).unwrap();
        assert!((a.value - exact).abs() < 4.0 * a.std_error, "{} ± {}", a.value, a.std_error);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let c = pool.install(|| estimate_g_power_trace(&e, 2, mc, &cfg, 9).unwrap());
        assert_eq!(a, c);
    }
}
