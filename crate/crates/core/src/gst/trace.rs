use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ensemble::EnsembleSpec;
use crate::error::{Error, Result};
use crate::qcore::{inner, StateVector};

use super::basis::{augmented_operator_basis, extend_operator_basis, min_eigenvalue};
use super::combination::Combination;
use super::measure::measure_matrices;
use super::subspace::build_subspace;
use super::GstConfig;

/// Default floor on the smallest eigenvalue of the measured Gram matrix.
pub const GRAM_FLOOR: f64 = 1e-8;

/// Residual norm a probe must keep after projecting out the circuit states.
const FIXED_VECTOR_MIN_NORM: f64 = 1e-3;

/// How the Gram system is solved.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub floor: f64,
    /// Fall back to an SVD pseudo-inverse instead of failing below `floor`.
    pub pseudo_inverse: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            floor: GRAM_FLOOR,
            pseudo_inverse: false,
        }
    }
}

/// `Tr{g⁻¹ p}`, the gauge-free trace of the transfer matrix.
pub fn ptm_trace(mx: &super::GstMatrices) -> Result<f64> {
    ptm_trace_with(mx, &SolveOptions::default())
}

pub fn ptm_trace_with(mx: &super::GstMatrices, opts: &SolveOptions) -> Result<f64> {
    let n = mx.g.nrows();
    if mx.g.ncols() != n || mx.p.nrows() != n || mx.p.ncols() != n {
        return Err(Error::invalid("p and g must be square and of equal size"));
    }
    if n == 0 {
        return Ok(0.0);
    }
    let min_eig = min_eigenvalue(&mx.g);
    if min_eig < opts.floor {
        if !opts.pseudo_inverse {
            return Err(Error::IllConditionedGram {
                min_eigenvalue: min_eig,
                floor: opts.floor,
            });
        }
        let pinv = mx
            .g
            .clone()
            .pseudo_inverse(opts.floor)
            .map_err(|e| Error::invalid(e.to_string()))?;
        return Ok((pinv * &mx.p).trace());
    }
    let x = match mx.g.clone().cholesky() {
        Some(ch) => ch.solve(&mx.p),
        None => mx.g.clone().lu().solve(&mx.p).ok_or(Error::IllConditionedGram {
            min_eigenvalue: min_eig,
            floor: opts.floor,
        })?,
    };
    Ok(x.trace())
}

/// A unit vector orthogonal to every state of `q`, hence fixed by its word:
/// the uniform superposition, or failing that the first computational basis
/// state, with the circuit states projected out.
pub fn find_fixed_vector(e: &EnsembleSpec, q: &Combination) -> Result<StateVector> {
    e.check_indices(q.indices())?;
    let distinct = q.distinct();
    let mut frame: Vec<StateVector> = Vec::new();
    for &i in &distinct {
        let r = project_out(&frame, e.state(i).clone());
        let norm = r.norm_sqr().sqrt();
        if norm > 1e-10 {
            frame.push(r.normalized()?);
        }
    }
    let dim = e.dim();
    let uniform = StateVector::from_amplitudes(vec![
        Complex64::new((dim as f64).sqrt().recip(), 0.0);
        dim
    ])?;
    let probes = std::iter::once(Ok(uniform)).chain((0..dim).map(|b| StateVector::basis(e.n(), b)));
    for probe in probes {
        let r = project_out(&frame, probe?);
        if r.norm_sqr().sqrt() > FIXED_VECTOR_MIN_NORM {
            return r.normalized();
        }
    }
    Err(Error::DegenerateAugmentation {
        d: frame.len(),
        states: distinct.len(),
        dim,
    })
}

/// Two passes of Gram-Schmidt against an orthonormal `frame`.
fn project_out(frame: &[StateVector], mut v: StateVector) -> StateVector {
    for _ in 0..2 {
        for f in frame {
            let c = inner(f, &v);
            v.axpy(-c, f);
        }
    }
    v
}

/// `(Tr R_w, Tr R_{w′})` for the retained subspace and its extension by a
/// fixed vector.
pub fn augment_and_trace<R: Rng + ?Sized>(
    e: &EnsembleSpec,
    q: &Combination,
    b: &super::SubspaceBasis,
    cfg: &GstConfig,
    rng: &mut R,
) -> Result<(f64, f64)> {
    cfg.validate()?;
    let opts = cfg.solve_options();
    let ob = extend_operator_basis(b, cfg.theta)?;
    let tr_rw = ptm_trace_with(&measure_matrices(e, q, &ob, cfg.mode, rng)?, &opts)?;
    let phi = find_fixed_vector(e, q)?;
    let ob_aug = augmented_operator_basis(b, &phi, cfg.theta)?;
    let tr_aug = ptm_trace_with(&measure_matrices(e, q, &ob_aug, cfg.mode, rng)?, &opts)?;
    Ok((tr_rw, tr_aug))
}

/// Estimated `Tr{𝒢_q}` and its ingredients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CombinationTrace {
    pub d: usize,
    /// Distinct states rejected by the truncation rule.
    pub truncated: usize,
    pub tr_rw: f64,
    pub tr_rw_augmented: f64,
    pub re_tr_w: f64,
    /// `2^n − d + Re Tr w`
    pub value: f64,
}

pub fn combination_trace<R: Rng + ?Sized>(
    e: &EnsembleSpec,
    q: &Combination,
    cfg: &GstConfig,
    rng: &mut R,
) -> Result<CombinationTrace> {
    cfg.validate()?;
    let dim = e.dim() as f64;
    if q.is_empty() {
        e.check_indices(q.indices())?;
        return Ok(CombinationTrace {
            d: 0,
            truncated: 0,
            tr_rw: 0.0,
            tr_rw_augmented: 1.0,
            re_tr_w: 0.0,
            value: dim,
        });
    }
    let b = build_subspace(e, q, cfg.epsilon)?;
    let (tr_rw, tr_aug) = augment_and_trace(e, q, &b, cfg, rng)?;
    let re_tr_w = 0.5 * (tr_aug - tr_rw - 1.0);
    Ok(CombinationTrace {
        d: b.d(),
        truncated: b.discarded().len(),
        tr_rw,
        tr_rw_augmented: tr_aug,
        re_tr_w,
        value: dim - b.d() as f64 + re_tr_w,
    })
}

/// Dense restriction of the word operator to the retained span, expressed in
/// an orthonormal frame of it; test and diagnostic use.
pub fn restricted_word(e: &EnsembleSpec, q: &Combination, b: &super::SubspaceBasis) -> Result<DMatrix<Complex64>> {
    let mut frame: Vec<StateVector> = Vec::new();
    for s in b.states() {
        frame.push(project_out(&frame, s.clone()).normalized()?);
    }
    let d = frame.len();
    let images: Vec<StateVector> = frame.iter().map(|f| super::measure::apply_word(e, q, f)).collect();
    Ok(DMatrix::from_fn(d, d, |r, c| inner(&frame[r], &images[c])))
}
