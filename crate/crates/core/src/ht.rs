//! Hadamard-test estimator of `Tr{ρ^{m+1}}`.
//!
//! The ancilla is folded into its outcome probability: for a circuit that
//! prepares `|ψ_{y₁}⟩` and then applies the controlled layers
//! `G_{y₂}, …, G_{y_{k+1}}` (earliest first), the ancilla reads 0 with
//! probability `½(1 + Re⟨ψ_{y₁}| G_{y_{k+1}} ⋯ G_{y₂} |ψ_{y₁}⟩)`. Averaged over
//! components this is `½ + ½Tr{G^k ρ}`, and the signed outcomes
//! `(-1)^k (±1)` average to `Tr{ρ^{m+1}}` once `k ~ Binomial(m, ½)`.

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensemble::{sample_component, EnsembleSpec};
use crate::error::{Error, Result};
use crate::estimate::{Accumulator, EstimateMode, TraceEstimate};
use crate::noise_bounds::{check_sigma, perturb_probability};
use crate::qcore::{apply_grover_word, inner, StateVector};
use crate::rng::{stream, SimRng};
use crate::series::binomial_weights;

/// Default cap on words evaluated by full enumeration.
pub const DEFAULT_ENUMERATION_CAP: u64 = 10_000_000;

/// Trials handed to one worker task; fixed so the reduction order never
/// depends on the pool size.
const TRIAL_BATCH: u64 = 2048;

const LANE_POWER: u64 = 1 << 32;
const LANE_MOMENT: u64 = 2 << 32;

/// One sampled Hadamard-test circuit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HtSample {
    pub initial_component: usize,
    /// One flag per sampling step; `true` inserts a controlled layer.
    pub layer_flags: Vec<bool>,
    /// Component of each inserted layer, in circuit order.
    pub layer_components: Vec<usize>,
}

impl HtSample {
    /// Number of inserted layers.
    pub fn k(&self) -> usize {
        self.layer_components.len()
    }

    fn validate(&self, e: &EnsembleSpec) -> Result<()> {
        let inserted = self.layer_flags.iter().filter(|&&f| f).count();
        if inserted != self.layer_components.len() {
            return Err(Error::invalid(format!(
                "{inserted} layer flags set but {} layer components given",
                self.layer_components.len()
            )));
        }
        e.check_indices(&[self.initial_component])?;
        e.check_indices(&self.layer_components)
    }
}

/// Draws the initial component, then `m` fair coins each inserting a layer
/// whose component is drawn with probability `p_i`.
pub fn sample_circuit<R: Rng + ?Sized>(e: &EnsembleSpec, m: usize, rng: &mut R) -> HtSample {
    let initial_component = sample_component(e, rng);
    let mut layer_flags = Vec::with_capacity(m);
    let mut layer_components = Vec::new();
    for _ in 0..m {
        let insert = rng.random_bool(0.5);
        layer_flags.push(insert);
        if insert {
            layer_components.push(sample_component(e, rng));
        }
    }
    HtSample {
        initial_component,
        layer_flags,
        layer_components,
    }
}

/// `Re⟨ψ_{y₁}| G_{y_{k+1}} ⋯ G_{y₂} |ψ_{y₁}⟩`.
fn word_expectation(e: &EnsembleSpec, initial: usize, layers: &[usize]) -> f64 {
    let psi = e.state(initial);
    if layers.is_empty() {
        return 1.0;
    }
    let mut cur = psi.clone();
    let axes: Vec<&StateVector> = layers.iter().map(|&i| e.state(i)).collect();
    apply_grover_word(&axes, &mut cur);
    inner(psi, &cur).re
}

fn p0_from_expectation(re: f64) -> f64 {
    let p0 = 0.5 * (1.0 + re);
    assert!(
        (-1e-9..=1.0 + 1e-9).contains(&p0),
        "outcome probability {p0} outside [0, 1]"
    );
    // rounding residue only; anything larger tripped the assertion above
    p0.clamp(0.0, 1.0)
}

/// Probability that the ancilla reads 0.
pub fn exact_p0(e: &EnsembleSpec, s: &HtSample) -> Result<f64> {
    s.validate(e)?;
    Ok(p0_from_expectation(word_expectation(
        e,
        s.initial_component,
        &s.layer_components,
    )))
}

fn parity_sign(k: usize) -> f64 {
    if k.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// One measurement: `(-1)^k` times `+1` for outcome 0 and `-1` for outcome 1.
pub fn single_shot<R: Rng + ?Sized>(e: &EnsembleSpec, s: &HtSample, rng: &mut R) -> Result<f64> {
    let p0 = exact_p0(e, s)?;
    let outcome = if rng.random_bool(p0) { 1.0 } else { -1.0 };
    Ok(parity_sign(s.k()) * outcome)
}

/// How each sampled circuit is read out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HtReadout {
    /// Use `2·P(0) - 1` directly; one sample per trial.
    ExactProb,
    /// Draw `shots_per_trial` binary outcomes per trial.
    Shots,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HtConfig {
    pub trials: u64,
    pub shots_per_trial: u64,
    pub readout: HtReadout,
    /// Gaussian noise on each circuit's `P(0)`; zero disables.
    pub sigma: f64,
    pub seed: u64,
}

impl HtConfig {
    pub fn exact_prob(trials: u64, seed: u64) -> Self {
        HtConfig {
            trials,
            shots_per_trial: 1,
            readout: HtReadout::ExactProb,
            sigma: 0.0,
            seed,
        }
    }

    pub fn shots(trials: u64, shots_per_trial: u64, seed: u64) -> Self {
        HtConfig {
            trials,
            shots_per_trial,
            readout: HtReadout::Shots,
            sigma: 0.0,
            seed,
        }
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = sigma;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::invalid("trials must be >= 1"));
        }
        if self.readout == HtReadout::Shots && self.shots_per_trial == 0 {
            return Err(Error::invalid("shots_per_trial must be >= 1"));
        }
        check_sigma(self.sigma)
    }

    fn mode(&self) -> EstimateMode {
        match self.readout {
            HtReadout::ExactProb => EstimateMode::McExactProb,
            HtReadout::Shots => EstimateMode::McShots,
        }
    }
}

/// Runs `cfg.trials` independent trials. `draw` samples a circuit and returns
/// `(sign, Re⟨ψ|𝒢|ψ⟩)`; trial `t` uses stream `(seed, lane, t)`.
fn run_trials<F>(e: &EnsembleSpec, cfg: &HtConfig, lane: u64, draw: F) -> Result<TraceEstimate>
where
    F: Fn(&EnsembleSpec, &mut SimRng) -> (f64, f64) + Sync,
{
    cfg.validate()?;
    let batches = cfg.trials.div_ceil(TRIAL_BATCH);
    let partials: Vec<Accumulator> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut acc = Accumulator::default();
            let end = ((b + 1) * TRIAL_BATCH).min(cfg.trials);
            for t in b * TRIAL_BATCH..end {
                let mut rng = stream(cfg.seed, lane, t);
                let (sign, re) = draw(e, &mut rng);
                let mut p0 = p0_from_expectation(re);
                if cfg.sigma > 0.0 {
                    p0 = perturb_probability(p0, cfg.sigma, &mut rng)
                        .expect("p0 in range, sigma validated")
                        .value;
                }
                match cfg.readout {
                    HtReadout::ExactProb => acc.push(sign * (2.0 * p0 - 1.0)),
                    HtReadout::Shots => {
                        let n = cfg.shots_per_trial;
                        let zeros = Binomial::new(n, p0).expect("valid p0").sample(&mut rng);
                        let diff = zeros as f64 - (n - zeros) as f64;
                        acc.push(sign * diff / n as f64);
                    }
                }
            }
            acc
        })
        .collect();
    let total = partials
        .into_iter()
        .fold(Accumulator::default(), Accumulator::merge);
    Ok(total.finish(cfg.mode()))
}

/// Monte Carlo estimate of `Tr{ρ^{m+1}}`.
pub fn estimate_power_trace_mc(e: &EnsembleSpec, m: usize, cfg: &HtConfig) -> Result<TraceEstimate> {
    run_trials(e, cfg, LANE_POWER | m as u64, |e, rng| {
        let s = sample_circuit(e, m, rng);
        (
            parity_sign(s.k()),
            word_expectation(e, s.initial_component, &s.layer_components),
        )
    })
}

/// Monte Carlo estimate of `Tr{G^k ρ}` with exactly `k` layers per circuit.
pub fn estimate_g_moment_mc(e: &EnsembleSpec, k: usize, cfg: &HtConfig) -> Result<TraceEstimate> {
    run_trials(e, cfg, LANE_MOMENT | k as u64, |e, rng| {
        let initial = sample_component(e, rng);
        let layers: Vec<usize> = (0..k).map(|_| sample_component(e, rng)).collect();
        (1.0, word_expectation(e, initial, &layers))
    })
}

/// Number of words `Σ_{j=0}^{max_k} α^{j+1}` visited by enumeration.
fn enumeration_size(alpha: usize, max_k: usize) -> u128 {
    let a = alpha as u128;
    let mut total = 0u128;
    let mut pow = a;
    for _ in 0..=max_k {
        total = total.saturating_add(pow);
        pow = pow.saturating_mul(a);
    }
    total
}

/// Exact `Tr{G^k ρ}` for `k = 0..=max_k`, summed over all `α^{k+1}` words
/// with weights `Π p`.
pub fn g_moments_enumerate(e: &EnsembleSpec, max_k: usize, cap: u64) -> Result<Vec<f64>> {
    let words = enumeration_size(e.alpha(), max_k);
    if words > cap as u128 {
        return Err(Error::ResourceLimit {
            what: "enumerated words",
            requested: words,
            cap: cap as u128,
        });
    }
    let per_initial: Vec<Vec<f64>> = (0..e.alpha())
        .into_par_iter()
        .map(|y1| {
            let mut moments = vec![0.0; max_k + 1];
            let psi = e.state(y1);
            descend(e, psi, psi.clone(), e.prob(y1), 0, max_k, &mut moments);
            moments
        })
        .collect();
    let mut moments = vec![0.0; max_k + 1];
    for row in per_initial {
        for (acc, v) in moments.iter_mut().zip(row) {
            *acc += v;
        }
    }
    Ok(moments)
}

fn descend(
    e: &EnsembleSpec,
    psi: &StateVector,
    cur: StateVector,
    weight: f64,
    depth: usize,
    max_k: usize,
    moments: &mut [f64],
) {
    moments[depth] += weight * inner(psi, &cur).re;
    if depth == max_k {
        return;
    }
    for (i, axis) in e.states().iter().enumerate() {
        let mut next = cur.clone();
        apply_grover_word(&[axis], &mut next);
        descend(e, psi, next, weight * e.prob(i), depth + 1, max_k, moments);
    }
}

/// Exact expectation of the estimator: `Σ_k C(m,k)/2^m (-1)^k Tr{G^k ρ}`.
pub fn estimate_power_trace_enumerate(e: &EnsembleSpec, m: usize, cap: u64) -> Result<TraceEstimate> {
    let moments = g_moments_enumerate(e, m, cap)?;
    let w = binomial_weights(m);
    let value = w
        .coefficients()
        .iter()
        .zip(&moments)
        .map(|(c, x)| c * x)
        .sum();
    Ok(TraceEstimate {
        samples: enumeration_size(e.alpha(), m).min(u64::MAX as u128) as u64,
        ..TraceEstimate::exact(value, EstimateMode::ExactEnumeration)
    })
}
