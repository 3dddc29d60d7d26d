//! Linear functionals of `Tr{G^k}`: the binomial power-trace reconstruction
//! and the truncated `ρ ln ρ` expansion in powers of `G = I - 2ρ`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimate::{EstimateMode, TraceEstimate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeriesKind {
    Power,
    Entropy,
    Custom,
}

/// Coefficients `c_k` attached to `Tr{G^0}, Tr{G^1}, …`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesWeights {
    kind: SeriesKind,
    order: usize,
    coefficients: Vec<f64>,
}

impl SeriesWeights {
    /// User-supplied coefficients, e.g. for `Tr{e^{ρt}}`.
    pub fn custom(coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.is_empty() || coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("custom series needs finite coefficients"));
        }
        Ok(SeriesWeights {
            kind: SeriesKind::Custom,
            order: coefficients.len() - 1,
            coefficients,
        })
    }

    pub fn kind(&self) -> SeriesKind {
        self.kind
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Highest `k` with a coefficient.
    pub fn max_k(&self) -> usize {
        self.coefficients.len() - 1
    }

    /// Re-expresses `Σ_k c_k Tr{G^k}` over the moments `y_j = Tr{G^j ρ}` using
    /// `Tr{G^{j+1}} = Tr{G^j} - 2 y_j`. Returns the constant (multiplying
    /// nothing) and the coefficients of `y_0 … y_{K-1}`.
    pub fn on_moments(&self, dim: usize) -> (f64, Vec<f64>) {
        let dim = dim as f64;
        let constant = dim * self.coefficients.iter().sum::<f64>();
        let k_max = self.max_k();
        let mut tail = 0.0;
        let mut coeffs = vec![0.0; k_max];
        for j in (0..k_max).rev() {
            tail += self.coefficients[j + 1];
            coeffs[j] = -2.0 * tail;
        }
        (constant, coeffs)
    }
}

/// `C(n, k)` as a float.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `c_k = (-1)^k C(m, k) / 2^m` so that `Σ c_k Tr{G^k} = Tr{ρ^m}`.
pub fn binomial_weights(m: usize) -> SeriesWeights {
    let scale = 0.5f64.powi(m as i32);
    let coefficients = (0..=m)
        .map(|k| {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sign * binomial(m, k) * scale
        })
        .collect();
    SeriesWeights {
        kind: SeriesKind::Power,
        order: m,
        coefficients,
    }
}

/// Trace-level coefficients of the order-`n_t` expansion
/// `ρ ln ρ ≈ -½ln2 (I - G) - ½G + ½ Σ_{j=2}^{n_t} (1/(j-1) - 1/j) G^j + (1/(2n_t)) G^{n_t+1}`.
pub fn entropy_weights(truncation_order: usize) -> Result<SeriesWeights> {
    let nt = truncation_order;
    if nt == 0 {
        return Err(Error::invalid("entropy truncation order must be >= 1"));
    }
    let ln2 = std::f64::consts::LN_2;
    let mut c = vec![0.0; nt + 2];
    c[0] = -0.5 * ln2;
    c[1] = 0.5 * ln2 - 0.5;
    for (j, cj) in c.iter_mut().enumerate().take(nt + 1).skip(2) {
        *cj = 0.5 * (1.0 / (j - 1) as f64 - 1.0 / j as f64);
    }
    c[nt + 1] += 0.5 / nt as f64;
    Ok(SeriesWeights {
        kind: SeriesKind::Entropy,
        order: nt,
        coefficients: c,
    })
}

fn combined_mode(inputs: &[&TraceEstimate]) -> EstimateMode {
    if inputs.iter().any(|t| t.mode == EstimateMode::McShots) {
        EstimateMode::McShots
    } else if inputs.iter().any(|t| t.mode == EstimateMode::McExactProb) {
        EstimateMode::McExactProb
    } else if inputs.iter().all(|t| t.mode == EstimateMode::Oracle) {
        EstimateMode::Oracle
    } else {
        EstimateMode::ExactEnumeration
    }
}

fn weighted_sum(constant: f64, coeffs: &[f64], inputs: &[TraceEstimate], what: &str) -> Result<TraceEstimate> {
    if inputs.len() < coeffs.len() {
        return Err(Error::invalid(format!(
            "missing {what} for k = {}..={} (got {} values, need {})",
            inputs.len(),
            coeffs.len() - 1,
            inputs.len(),
            coeffs.len()
        )));
    }
    let used: Vec<&TraceEstimate> = inputs.iter().take(coeffs.len()).collect();
    let value = constant + coeffs.iter().zip(&used).map(|(c, t)| c * t.value).sum::<f64>();
    let var: f64 = coeffs
        .iter()
        .zip(&used)
        .map(|(c, t)| (c * t.std_error).powi(2))
        .sum();
    Ok(TraceEstimate {
        value,
        std_error: var.sqrt(),
        samples: used.iter().map(|t| t.samples).sum(),
        mode: combined_mode(&used),
    })
}

/// `Σ c_k · gk[k]`, errors combined in quadrature. `gk[k]` estimates `Tr{G^k}`.
pub fn evaluate_series(w: &SeriesWeights, gk: &[TraceEstimate]) -> Result<TraceEstimate> {
    weighted_sum(0.0, &w.coefficients, gk, "Tr{G^k}")
}

/// Same functional evaluated from moments `moments[j] ≈ Tr{G^j ρ}`.
pub fn evaluate_series_on_moments(
    w: &SeriesWeights,
    dim: usize,
    moments: &[TraceEstimate],
) -> Result<TraceEstimate> {
    let (constant, coeffs) = w.on_moments(dim);
    weighted_sum(constant, &coeffs, moments, "Tr{G^k rho}")
}
