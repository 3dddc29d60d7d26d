use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::ensemble::EnsembleSpec;
use crate::error::{Error, Result};
use crate::qcore::{inner, StateVector};

use super::combination::Combination;

/// Overlap modulus above which two states count as the same physical state.
pub const SAME_STATE_OVERLAP: f64 = 1.0 - 1e-12;

/// Retained reflection axes of one combination.
#[derive(Debug, Clone, Serialize)]
pub struct SubspaceBasis {
    retained: Vec<usize>,
    #[serde(skip)]
    states: Vec<StateVector>,
    discarded: Vec<(usize, f64)>,
    epsilon: f64,
}

impl SubspaceBasis {
    pub fn d(&self) -> usize {
        self.retained.len()
    }

    /// Component indices of the retained states, in admission order.
    pub fn retained(&self) -> &[usize] {
        &self.retained
    }

    pub fn states(&self) -> &[StateVector] {
        &self.states
    }

    /// `(component index, admission statistic)` of each rejected state.
    pub fn discarded(&self) -> &[(usize, f64)] {
        &self.discarded
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

/// Admission statistic `(|Δ|² / (1 + |x|²))²` of `candidate` against the
/// (not necessarily orthogonal) `retained` states, where `x` solves the Gram
/// system for the projection and `Δ` is the residual.
pub fn admission_statistic(retained: &[StateVector], candidate: &StateVector) -> f64 {
    if retained.is_empty() {
        return 1.0;
    }
    let b: Vec<Complex64> = retained.iter().map(|r| inner(r, candidate)).collect();
    if b.iter().any(|c| c.norm() > SAME_STATE_OVERLAP) {
        return 0.0;
    }
    let d = retained.len();
    let gram = DMatrix::from_fn(d, d, |i, j| inner(&retained[i], &retained[j]));
    let rhs = DVector::from_vec(b.clone());
    let x = match gram.clone().cholesky() {
        Some(ch) => ch.solve(&rhs),
        None => match gram.lu().solve(&rhs) {
            Some(x) => x,
            None => return 0.0,
        },
    };
    let projected: f64 = b.iter().zip(x.iter()).map(|(bi, xi)| (bi.conj() * xi).re).sum();
    let delta_sq = (1.0 - projected).max(0.0);
    let x_sq: f64 = x.iter().map(|c| c.norm_sqr()).sum();
    (delta_sq / (1.0 + x_sq)).powi(2)
}

/// Greedy subspace over the distinct states of `q` in first-occurrence order;
/// a state is kept when its statistic is at least `epsilon`.
pub fn build_subspace(e: &EnsembleSpec, q: &Combination, epsilon: f64) -> Result<SubspaceBasis> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::invalid(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    e.check_indices(q.indices())?;
    let mut retained = Vec::new();
    let mut states: Vec<StateVector> = Vec::new();
    let mut discarded = Vec::new();
    for i in q.distinct() {
        let psi = e.state(i);
        let stat = admission_statistic(&states, psi);
        if stat >= epsilon {
            retained.push(i);
            states.push(psi.clone());
        } else {
            discarded.push((i, stat));
        }
    }
    Ok(SubspaceBasis {
        retained,
        states,
        discarded,
        epsilon,
    })
}
