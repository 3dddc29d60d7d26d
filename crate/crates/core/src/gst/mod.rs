//! Subspace gate-set-tomography estimator of `Tr{G^k}` and `Tr{ρ^m}`.
//!
//! Each word `𝒢_q = G_{q₁} ⋯ G_{q_k}` acts as the identity outside the span
//! `V_q` of its reflection axes, so `Tr{𝒢_q} = 2^n − d + Tr w_q` with `w_q`
//! the restriction to `V_q`. The transfer matrix of `w_q` over `d²`
//! non-orthogonal preparations is only known up to a gauge, but
//! `Tr{g⁻¹p} = |Tr w_q|²` is gauge free; repeating on `V_q ⊕ |φ⟩` with a
//! fixed vector `|φ⟩` gives `|Tr w_q + 1|²` and hence `Re Tr w_q`.

mod basis;
mod combination;
mod driver;
mod measure;
mod subspace;
mod trace;

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use basis::{
    augmented_operator_basis, extend_operator_basis, extend_operator_basis_unchecked, validate_theta,
    OperatorBasis, Prep, BRIDGE_OVERLAP, THETA_TOL,
};
pub use combination::{sample_combination, sample_word, Combination};
pub use driver::{estimate_g_power_trace, estimate_power_trace, GstStrategy};
pub use measure::{measure_matrices, GstMatrices, MeasureMode};
pub use subspace::{admission_statistic, build_subspace, SubspaceBasis, SAME_STATE_OVERLAP};
pub use trace::{
    augment_and_trace, combination_trace, find_fixed_vector, ptm_trace, ptm_trace_with, restricted_word,
    CombinationTrace, SolveOptions, GRAM_FLOOR,
};

pub const DEFAULT_EPSILON: f64 = 1e-10;
pub const DEFAULT_THETA: f64 = FRAC_PI_2;

/// Per-combination settings shared by every word of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GstConfig {
    /// Truncation threshold on the admission statistic.
    pub epsilon: f64,
    /// Dressing angle of the operator basis.
    pub theta: f64,
    pub mode: MeasureMode,
    pub gram_floor: f64,
    pub pseudo_inverse: bool,
}

impl Default for GstConfig {
    fn default() -> Self {
        GstConfig {
            epsilon: DEFAULT_EPSILON,
            theta: DEFAULT_THETA,
            mode: MeasureMode::Exact,
            gram_floor: GRAM_FLOOR,
            pseudo_inverse: false,
        }
    }
}

impl GstConfig {
    pub fn with_mode(mut self, mode: MeasureMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::invalid(format!("epsilon must lie in (0, 1), got {}", self.epsilon)));
        }
        if !(self.gram_floor > 0.0 && self.gram_floor.is_finite()) {
            return Err(Error::invalid("gram_floor must be positive and finite"));
        }
        validate_theta(self.theta)?;
        self.mode.validate()
    }

    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            floor: self.gram_floor,
            pseudo_inverse: self.pseudo_inverse,
        }
    }
}
