use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::{inner, reflect_in_place, reflection_weight, StateVector};

use super::subspace::SubspaceBasis;

/// Distance from a multiple of π below which a dressing angle is rejected.
pub const THETA_TOL: f64 = 1e-6;

/// Below this overlap modulus a pair of axes is completed with bridge states
/// instead of mutually dressed ones (dressing barely moves near-orthogonal
/// states).
pub const BRIDGE_OVERLAP: f64 = 1e-3;

/// One preparation of the operator basis; indices refer to the axis list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Prep {
    /// `|a_s⟩`
    Axis { s: usize },
    /// `G_{by}(θ)|a_s⟩`
    Dressed { s: usize, by: usize },
    /// `(|a_s⟩ + |a_t⟩)/‖·‖`
    Bridge { s: usize, t: usize },
    /// `G_s(θ)` applied to the bridge of `s` and `t`
    DressedBridge { s: usize, t: usize },
}

/// `d²` preparations spanning the operators on a `d`-dimensional span.
#[derive(Debug, Clone)]
pub struct OperatorBasis {
    preps: Vec<Prep>,
    states: Vec<StateVector>,
    theta: f64,
    axes: usize,
}

impl OperatorBasis {
    pub fn preps(&self) -> &[Prep] {
        &self.preps
    }

    /// Prepared pure states, aligned with [`preps`](Self::preps).
    pub fn states(&self) -> &[StateVector] {
        &self.states
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Dimension of the spanned subspace.
    pub fn axes(&self) -> usize {
        self.axes
    }

    pub fn len(&self) -> usize {
        self.preps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.preps.is_empty()
    }

    /// Exact Gram matrix `|⟨χ_r|χ_s⟩|²`.
    pub fn gram(&self) -> DMatrix<f64> {
        let n = self.states.len();
        let mut g = DMatrix::zeros(n, n);
        for r in 0..n {
            g[(r, r)] = self.states[r].norm_sqr().powi(2);
            for s in r + 1..n {
                let v = inner(&self.states[r], &self.states[s]).norm_sqr();
                g[(r, s)] = v;
                g[(s, r)] = v;
            }
        }
        g
    }

    pub fn min_gram_eigenvalue(&self) -> f64 {
        min_eigenvalue(&self.gram())
    }

    /// Same preparations with rows reordered by `perm` (`perm[i]` is the old
    /// position of the new `i`-th prep).
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.len()];
        if perm.len() != self.len() || perm.iter().any(|&p| p >= seen.len() || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::invalid("not a permutation of the operator basis"));
        }
        Ok(OperatorBasis {
            preps: perm.iter().map(|&p| self.preps[p]).collect(),
            states: perm.iter().map(|&p| self.states[p].clone()).collect(),
            theta: self.theta,
            axes: self.axes,
        })
    }
}

pub(crate) fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return f64::INFINITY;
    }
    m.clone()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

pub fn validate_theta(theta: f64) -> Result<()> {
    if !theta.is_finite() {
        return Err(Error::invalid(format!("theta_basis must be finite, got {theta}")));
    }
    let off = (theta / PI - (theta / PI).round()).abs() * PI;
    if off < THETA_TOL {
        return Err(Error::invalid(format!(
            "theta_basis {theta} is within {THETA_TOL} of a multiple of pi; dressed preparations would be dependent"
        )));
    }
    Ok(())
}

fn dress(axis: &StateVector, weight: Complex64, s: &StateVector) -> StateVector {
    let mut out = s.clone();
    reflect_in_place(axis, weight, &mut out);
    out
}

fn bridge(a: &StateVector, b: &StateVector) -> StateVector {
    let mut out = a.clone();
    out.axpy(Complex64::new(1.0, 0.0), b);
    out.normalized().expect("near-orthogonal axes never cancel")
}

/// Builds the preparations over arbitrary unit `axes` without checking θ.
pub(crate) fn build(axes: &[StateVector], theta: f64) -> OperatorBasis {
    let d = axes.len();
    let w = reflection_weight(theta);
    let mut preps = Vec::with_capacity(d * d);
    let mut states = Vec::with_capacity(d * d);
    for (s, a) in axes.iter().enumerate() {
        preps.push(Prep::Axis { s });
        states.push(a.clone());
    }
    for s in 0..d {
        for t in s + 1..d {
            if inner(&axes[t], &axes[s]).norm() >= BRIDGE_OVERLAP {
                preps.push(Prep::Dressed { s, by: t });
                states.push(dress(&axes[t], w, &axes[s]));
                preps.push(Prep::Dressed { s: t, by: s });
                states.push(dress(&axes[s], w, &axes[t]));
            } else {
                let b = bridge(&axes[s], &axes[t]);
                preps.push(Prep::DressedBridge { s, t });
                states.push(dress(&axes[s], w, &b));
                preps.push(Prep::Bridge { s, t });
                states.push(b);
            }
        }
    }
    OperatorBasis {
        preps,
        states,
        theta,
        axes: d,
    }
}

/// `d` axis preparations plus `d² − d` preparations dressed by `G_{s′}(θ)`.
pub fn extend_operator_basis(b: &SubspaceBasis, theta: f64) -> Result<OperatorBasis> {
    validate_theta(theta)?;
    Ok(build(b.states(), theta))
}

/// As [`extend_operator_basis`] but accepts any finite θ, including the
/// degenerate multiples of π.
pub fn extend_operator_basis_unchecked(b: &SubspaceBasis, theta: f64) -> Result<OperatorBasis> {
    if !theta.is_finite() {
        return Err(Error::invalid(format!("theta_basis must be finite, got {theta}")));
    }
    Ok(build(b.states(), theta))
}

/// `(d+1)²` preparations over the retained states and the fixed vector `phi`.
pub fn augmented_operator_basis(b: &SubspaceBasis, phi: &StateVector, theta: f64) -> Result<OperatorBasis> {
    validate_theta(theta)?;
    let mut axes = b.states().to_vec();
    axes.push(phi.clone());
    Ok(build(&axes, theta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::random_ensemble;
    use crate::gst::combination::Combination;
    use crate::gst::subspace::build_subspace;
    use crate::rng::stream;
    use std::f64::consts::FRAC_PI_2;

    fn pair_subspace(seed: u64) -> SubspaceBasis {
        let mut rng = stream(seed, 0, 0);
        let e = random_ensemble(&mut rng, 3, 2);
        build_subspace(&e, &Combination::new(&e, vec![0, 1]).unwrap(), 1e-10).unwrap()
    }

    #[test]
    fn single_axis_has_one_prep() {
        let mut rng = stream(1, 0, 0);
        let e = random_ensemble(&mut rng, 2, 1);
        let b = build_subspace(&e, &Combination::new(&e, vec![0, 0]).unwrap(), 1e-10).unwrap();
        let ob = extend_operator_basis(&b, FRAC_PI_2).unwrap();
        assert_eq!(ob.preps(), &[Prep::Axis { s: 0 }]);
    }

    #[test]
    fn theta_multiple_of_pi_rejected() {
        let b = pair_subspace(3);
        for t in [0.0, PI, -2.0 * PI, PI + 1e-9] {
            assert!(extend_operator_basis(&b, t).is_err(), "{t}");
        }
        assert!(extend_operator_basis(&b, PI + 1e-3).is_ok());
        assert!(extend_operator_basis(&b, f64::NAN).is_err());
    }

    #[test]
    fn pi_is_singular_half_pi_is_not() {
        for seed in 0..10 {
            let b = pair_subspace(seed);
            assert_eq!(b.d(), 2);
            let singular = extend_operator_basis_unchecked(&b, PI).unwrap();
            assert_eq!(singular.len(), 4);
            assert!(singular.min_gram_eigenvalue() < 1e-10);
            let good = extend_operator_basis(&b, FRAC_PI_2).unwrap();
            assert!(good.min_gram_eigenvalue() > 1e-6, "seed {seed}");
        }
    }

    #[test]
    fn orthogonal_axes_use_bridges() {
        let axes = vec![
            StateVector::basis(1, 0).unwrap(),
            StateVector::basis(1, 1).unwrap(),
        ];
        let ob = build(&axes, FRAC_PI_2);
        assert!(matches!(ob.preps()[3], Prep::Bridge { .. }));
        assert!(ob.min_gram_eigenvalue() > 0.1);
        assert!(build(&axes, PI).min_gram_eigenvalue() < 1e-12);
    }

    #[test]
    fn prep_states_are_unit_and_gram_diagonal_is_one() {
        let b = pair_subspace(11);
        let ob = extend_operator_basis(&b, 0.7).unwrap();
        let g = ob.gram();
        for i in 0..ob.len() {
            assert!((ob.states()[i].norm_sqr() - 1.0).abs() < 1e-12);
            assert!((g[(i, i)] - 1.0).abs() < 1e-12);
        }
    }
}
