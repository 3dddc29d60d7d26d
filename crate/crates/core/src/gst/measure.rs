use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::ensemble::EnsembleSpec;
use crate::error::{Error, Result};
use crate::noise_bounds::{check_sigma, gaussian};
use crate::qcore::{apply_grover_word, inner, StateVector};

use super::basis::OperatorBasis;
use super::combination::Combination;

/// How each overlap probability is read out.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeasureMode {
    Exact,
    /// `Binomial(N, p) / N`.
    Shots(u64),
    /// `p + N(0, σ²)`, not clamped.
    Gaussian(f64),
}

impl MeasureMode {
    pub fn validate(&self) -> Result<()> {
        match *self {
            MeasureMode::Exact => Ok(()),
            MeasureMode::Shots(0) => Err(Error::invalid("shots must be >= 1")),
            MeasureMode::Shots(_) => Ok(()),
            MeasureMode::Gaussian(sigma) => check_sigma(sigma),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, MeasureMode::Exact)
    }

    fn read<R: Rng + ?Sized>(&self, p: f64, rng: &mut R) -> f64 {
        match *self {
            MeasureMode::Exact => p,
            MeasureMode::Shots(n) => {
                let hits = Binomial::new(n, p.clamp(0.0, 1.0))
                    .expect("probability clamped")
                    .sample(rng);
                hits as f64 / n as f64
            }
            MeasureMode::Gaussian(sigma) => p + gaussian(sigma, rng),
        }
    }
}

/// Measured `p_rs = |⟨χ_r|𝒢|χ_s⟩|²` and `g_rs = |⟨χ_r|χ_s⟩|²`.
#[derive(Debug, Clone, PartialEq)]
pub struct GstMatrices {
    pub p: DMatrix<f64>,
    pub g: DMatrix<f64>,
}

/// `𝒢|χ⟩` for the word of `q` (last index applied first).
pub(crate) fn apply_word(e: &EnsembleSpec, q: &Combination, chi: &StateVector) -> StateVector {
    let axes: Vec<&StateVector> = q.indices().iter().rev().map(|&i| e.state(i)).collect();
    let mut out = chi.clone();
    apply_grover_word(&axes, &mut out);
    out
}

/// Entries are drawn row-major for `p`, then the upper triangle of `g`
/// (mirrored, so `g` stays symmetric under noise).
pub fn measure_matrices<R: Rng + ?Sized>(
    e: &EnsembleSpec,
    q: &Combination,
    ob: &OperatorBasis,
    mode: MeasureMode,
    rng: &mut R,
) -> Result<GstMatrices> {
    mode.validate()?;
    e.check_indices(q.indices())?;
    let chis = ob.states();
    let n = chis.len();
    let evolved: Vec<StateVector> = chis.iter().map(|c| apply_word(e, q, c)).collect();
    let mut p = DMatrix::zeros(n, n);
    for r in 0..n {
        for s in 0..n {
            p[(r, s)] = mode.read(inner(&chis[r], &evolved[s]).norm_sqr(), rng);
        }
    }
    let mut g = DMatrix::zeros(n, n);
    for r in 0..n {
        for s in r..n {
            let exact = if r == s { 1.0 } else { inner(&chis[r], &chis[s]).norm_sqr() };
            let v = mode.read(exact, rng);
            g[(r, s)] = v;
            g[(s, r)] = v;
        }
    }
    Ok(GstMatrices { p, g })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{dense_grover, projector};
    use crate::fixtures::random_ensemble;
    use crate::gst::basis::extend_operator_basis;
    use crate::gst::subspace::build_subspace;
    use crate::rng::stream;
    use nalgebra::DMatrix;
    use num_complex::Complex64;

    #[test]
    fn exact_entries_match_dense() {
        let mut rng = stream(5, 0, 0);
        let e = random_ensemble(&mut rng, 3, 3);
        let q = Combination::new(&e, vec![2, 0, 1, 0]).unwrap();
        let b = build_subspace(&e, &q, 1e-10).unwrap();
        let ob = extend_operator_basis(&b, 1.1).unwrap();
        let mx = measure_matrices(&e, &q, &ob, MeasureMode::Exact, &mut rng).unwrap();
        let mut word = DMatrix::<Complex64>::identity(8, 8);
        for &i in q.indices() {
            word = &word * dense_grover(e.state(i));
        }
        let rhos: Vec<_> = ob.states().iter().map(projector).collect();
        for r in 0..ob.len() {
            assert_eq!(mx.g[(r, r)], 1.0);
            for s in 0..ob.len() {
                let dense = (&rhos[r] * &word * &rhos[s] * word.adjoint()).trace();
                assert!((mx.p[(r, s)] - dense.re).abs() < 1e-10);
                assert!(dense.im.abs() < 1e-10);
                let gd = (&rhos[r] * &rhos[s]).trace().re;
                assert!((mx.g[(r, s)] - gd).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn single_axis_eigenstate() {
        let mut rng = stream(6, 0, 0);
        let e = random_ensemble(&mut rng, 2, 1);
        for k in 1..4 {
            let q = Combination::new(&e, vec![0; k]).unwrap();
            let b = build_subspace(&e, &q, 1e-10).unwrap();
            let ob = extend_operator_basis(&b, 1.0).unwrap();
            let mx = measure_matrices(&e, &q, &ob, MeasureMode::Exact, &mut rng).unwrap();
            assert!((mx.p[(0, 0)] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn noisy_modes() {
        let mut rng = stream(7, 0, 0);
        let e = random_ensemble(&mut rng, 2, 2);
        let q = Combination::new(&e, vec![0, 1]).unwrap();
        let b = build_subspace(&e, &q, 1e-10).unwrap();
        let ob = extend_operator_basis(&b, 1.0).unwrap();
        let exact = measure_matrices(&e, &q, &ob, MeasureMode::Exact, &mut rng).unwrap();
        let shots = measure_matrices(&e, &q, &ob, MeasureMode::Shots(1000), &mut rng).unwrap();
        assert!(shots.p.iter().all(|v| (0.0..=1.0).contains(v)));
        assert!(shots.p.iter().all(|v| (v * 1000.0 - (v * 1000.0).round()).abs() < 1e-9));
        assert_eq!(shots.g, shots.g.transpose());
        let noisy = measure_matrices(&e, &q, &ob, MeasureMode::Gaussian(1e-3), &mut rng).unwrap();
        assert!((noisy.p.clone() - exact.p.clone()).amax() < 1e-2);
        assert!(noisy.p != exact.p);
        assert!(MeasureMode::Shots(0).validate().is_err());
        assert!(MeasureMode::Gaussian(-1.0).validate().is_err());
    }
}
