//! Gaussian noise injection on measured probabilities and the error-bound
//! calculators used to size experiments.
//!
//! The bound functions implement asymptotic forms with unit constants. They
//! are estimates for annotating results and gate nothing.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default Gaussian standard deviation for Hadamard-test probabilities.
pub const DEFAULT_HT_SIGMA: f64 = 0.01;
/// Default Gaussian standard deviation for tomography `p`/`g` entries.
pub const DEFAULT_GST_SIGMA: f64 = 0.0001;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    pub ht_sigma: f64,
    pub gst_sigma: f64,
    pub seed: u64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig {
            ht_sigma: DEFAULT_HT_SIGMA,
            gst_sigma: DEFAULT_GST_SIGMA,
            seed: 0,
        }
    }
}

impl NoiseConfig {
    pub fn validate(&self) -> Result<()> {
        check_sigma(self.ht_sigma)?;
        check_sigma(self.gst_sigma)
    }
}

pub(crate) fn check_sigma(sigma: f64) -> Result<()> {
    if sigma.is_finite() && sigma >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("noise sigma must be finite and >= 0, got {sigma}")))
    }
}

/// A noisy probability and whether it had to be clamped back into `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Perturbed {
    pub value: f64,
    pub clamped: bool,
}

/// Draws `N(0, σ²)`.
pub fn gaussian<R: Rng + ?Sized>(sigma: f64, rng: &mut R) -> f64 {
    if sigma == 0.0 {
        return 0.0;
    }
    Normal::new(0.0, sigma).expect("sigma validated").sample(rng)
}

/// `clamp(p + N(0, σ²), 0, 1)`.
pub fn perturb_probability<R: Rng + ?Sized>(p: f64, sigma: f64, rng: &mut R) -> Result<Perturbed> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("probability {p} outside [0, 1]")));
    }
    check_sigma(sigma)?;
    let raw = p + gaussian(sigma, rng);
    let value = raw.clamp(0.0, 1.0);
    Ok(Perturbed {
        value,
        clamped: value != raw,
    })
}

/// Parameters of the error analysis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorBudget {
    /// Subspace dimension.
    pub d: usize,
    /// Truncation threshold.
    pub epsilon: f64,
    /// Per-entry error level of the Gram matrix.
    pub eps1: f64,
    /// Per-entry error level of the transfer-matrix entries.
    pub eps2: f64,
    /// Failure probability.
    pub delta: f64,
    /// Circuit layer count.
    pub n_layers: usize,
}

impl ErrorBudget {
    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.n_layers == 0 {
            return Err(Error::invalid("d and n_layers must be positive"));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::invalid("epsilon must be positive"));
        }
        if !(self.eps1 >= 0.0 && self.eps1.is_finite() && self.eps2 >= 0.0 && self.eps2.is_finite()) {
            return Err(Error::invalid("eps1 and eps2 must be finite and non-negative"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::invalid("delta must lie in (0, 1)"));
        }
        Ok(())
    }
}

/// Shots per entry so that every one of the `d²` entries is within `ε̃` with
/// probability at least `1 - δ̃`: `ceil(ln(2d²/δ̃) / (2ε̃²))`.
pub fn shots_for_accuracy(d: usize, eps_tilde: f64, delta_tilde: f64) -> Result<u64> {
    if d == 0 {
        return Err(Error::invalid("d must be positive"));
    }
    if !(eps_tilde > 0.0 && eps_tilde < 1.0) || !(delta_tilde > 0.0 && delta_tilde < 1.0) {
        return Err(Error::invalid("eps_tilde and delta_tilde must lie in (0, 1)"));
    }
    let d2 = (d * d) as f64;
    let n = (2.0 * d2 / delta_tilde).ln() / (2.0 * eps_tilde * eps_tilde);
    Ok(n.ceil() as u64)
}

fn denominator(d: usize, eps1: f64, epsilon: f64) -> Result<f64> {
    let den = 1.0 - (d * d) as f64 * eps1 * epsilon;
    if den <= 0.0 {
        return Err(Error::DivergentBound { denominator: den });
    }
    Ok(den)
}

/// Entrywise bound on `g⁻¹ - (g + Δg)⁻¹`: `d²ε₁ / (1 - d²ε₁ε)`.
pub fn gram_inverse_error_bound(d: usize, eps1: f64, epsilon: f64) -> Result<f64> {
    let den = denominator(d, eps1, epsilon)?;
    Ok((d * d) as f64 * eps1 / den)
}

/// Bound on the error of `Tr{g⁻¹ R}`:
/// `d⁴ε₁/(1 - d²ε₁ε) + d²ε₂/ε + d⁴ε₁ε₂/(1 - d²ε₁ε)`.
pub fn sampling_error_bound(d: usize, eps1: f64, eps2: f64, epsilon: f64) -> Result<f64> {
    if epsilon <= 0.0 {
        return Err(Error::invalid("epsilon must be positive"));
    }
    let den = denominator(d, eps1, epsilon)?;
    let d2 = (d * d) as f64;
    let d4 = d2 * d2;
    Ok(d4 * eps1 / den + d2 * eps2 / epsilon + d4 * eps1 * eps2 / den)
}

/// Order-of-magnitude estimate of the truncation bias on `Tr{R_w}`:
/// `d · n_layers · (ε + d²/√shots)^{1/4}`.
pub fn truncation_error_estimate(n_layers: usize, d: usize, epsilon: f64, shots: f64) -> Result<f64> {
    if epsilon.is_nan() || epsilon < 0.0 || shots.is_nan() || shots <= 0.0 {
        return Err(Error::invalid("epsilon must be >= 0 and shots > 0"));
    }
    let d = d as f64;
    Ok(d * n_layers as f64 * (epsilon + d * d / shots.sqrt()).powf(0.25))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use proptest::prelude::*;

    #[test]
    fn zero_sigma_is_identity() {
        let mut rng = stream(1, 0, 0);
        let p = perturb_probability(0.37, 0.0, &mut rng).unwrap();
        assert_eq!(p, Perturbed { value: 0.37, clamped: false });
    }

    #[test]
    fn perturbation_std_matches_sigma() {
        let mut rng = stream(2, 0, 0);
        let n = 100_000;
        let xs: Vec<f64> = (0..n)
            .map(|_| perturb_probability(0.5, 0.01, &mut rng).unwrap().value)
            .collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((var.sqrt() - 0.01).abs() < 0.05 * 0.01);
    }

    #[test]
    fn clamped_at_one() {
        let mut rng = stream(3, 0, 0);
        let mut clamps = 0;
        for _ in 0..10_000 {
            let p = perturb_probability(1.0, 0.01, &mut rng).unwrap();
            assert!(p.value <= 1.0);
            clamps += p.clamped as u32;
        }
        assert!(clamps > 4000);
    }

    #[test]
    fn perturbation_stream_is_deterministic() {
        let draw = || {
            let mut rng = stream(9, 4, 2);
            (0..20)
                .map(|_| perturb_probability(0.3, 0.01, &mut rng).unwrap().value)
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(), draw());
    }

    #[test]
    fn bad_inputs() {
        let mut rng = stream(1, 0, 0);
        assert!(perturb_probability(1.5, 0.01, &mut rng).is_err());
        assert!(perturb_probability(0.5, -1.0, &mut rng).is_err());
        assert!(shots_for_accuracy(0, 0.1, 0.1).is_err());
        assert!(shots_for_accuracy(1, 0.0, 0.1).is_err());
    }

    #[test]
    fn hoeffding_examples() {
        assert_eq!(shots_for_accuracy(1, 0.1, 0.05).unwrap(), 185);
        // ln(160) / 0.0002 = 25375.87
        assert_eq!(shots_for_accuracy(2, 0.01, 0.05).unwrap(), 25_376);
    }

    #[test]
    fn halving_accuracy_quadruples_shots() {
        for &(d, e, dl) in &[(1, 0.1, 0.05), (2, 0.02, 0.01), (3, 0.05, 0.2)] {
            let a = shots_for_accuracy(d, e, dl).unwrap() as f64;
            let b = shots_for_accuracy(d, e / 2.0, dl).unwrap() as f64;
            assert!((b - 4.0 * a).abs() <= 4.0, "{a} -> {b}");
        }
    }

    #[test]
    fn gram_inverse_examples() {
        assert_eq!(gram_inverse_error_bound(3, 0.0, 0.1).unwrap(), 0.0);
        let b = gram_inverse_error_bound(2, 1e-4, 0.1).unwrap();
        assert!((b - 4e-4 / (1.0 - 4e-5)).abs() < 1e-18);
        assert!((b - 4.00016e-4).abs() < 1e-9);
        assert!(gram_inverse_error_bound(3, 1e-4, 0.1).unwrap() > b);
        assert!(matches!(
            gram_inverse_error_bound(10, 0.1, 0.1),
            Err(Error::DivergentBound { .. })
        ));
    }

    #[test]
    fn sampling_examples() {
        assert_eq!(sampling_error_bound(2, 0.0, 0.0, 0.1).unwrap(), 0.0);
        let b = sampling_error_bound(1, 1e-4, 1e-4, 0.1).unwrap();
        let expected = 1e-4 / (1.0 - 1e-5) + 1e-3 + 1e-8 / (1.0 - 1e-5);
        assert!((b - expected).abs() < 1e-15);
        assert!((b - 1.1e-3).abs() < 1e-6);
        // 1/ε term dominates for small ε
        let tiny = sampling_error_bound(2, 1e-4, 1e-4, 1e-6).unwrap();
        assert!(4.0 * 1e-4 / 1e-6 / tiny > 0.99);
    }

    #[test]
    fn truncation_examples() {
        assert!(truncation_error_estimate(4, 2, 0.0, 1e300).unwrap() < 1e-30);
        let t = truncation_error_estimate(4, 2, 1e-4, 1e6).unwrap();
        assert!((t - 8.0 * 4.1e-3f64.powf(0.25)).abs() < 1e-12);
        assert!((t - 2.03).abs() < 0.01);
        let a = truncation_error_estimate(3, 2, 1e-3, 1e12).unwrap();
        let b = truncation_error_estimate(3, 2, 16e-3, 1e12).unwrap();
        assert!(b <= 2.0 * a + 1e-12);
    }

    proptest! {
        #[test]
        fn bounds_monotone_in_error_levels(
            d in 1usize..5,
            e1 in 0.0f64..1e-3,
            de1 in 0.0f64..1e-3,
            e2 in 0.0f64..1e-2,
            de2 in 0.0f64..1e-2,
            eps in 1e-6f64..0.5,
        ) {
            let g0 = gram_inverse_error_bound(d, e1, eps).unwrap();
            let g1 = gram_inverse_error_bound(d, e1 + de1, eps).unwrap();
            prop_assert!(g1 >= g0);
            prop_assert!(gram_inverse_error_bound(d + 1, e1, eps).unwrap() >= g0);
            let s0 = sampling_error_bound(d, e1, e2, eps).unwrap();
            prop_assert!(sampling_error_bound(d, e1 + de1, e2, eps).unwrap() >= s0);
            prop_assert!(sampling_error_bound(d, e1, e2 + de2, eps).unwrap() >= s0);
        }

        #[test]
        fn truncation_estimate_monotone(
            n in 1usize..10,
            d in 1usize..5,
            eps in 0.0f64..0.1,
            deps in 0.0f64..0.1,
            shots in 1.0f64..1e8,
            extra in 0.0f64..1e8,
        ) {
            let t0 = truncation_error_estimate(n, d, eps, shots).unwrap();
            prop_assert!(truncation_error_estimate(n, d, eps + deps, shots).unwrap() >= t0);
            prop_assert!(truncation_error_estimate(n, d, eps, shots + extra).unwrap() <= t0);
            prop_assert!(truncation_error_estimate(n + 1, d, eps, shots).unwrap() >= t0);
        }
    }
}
