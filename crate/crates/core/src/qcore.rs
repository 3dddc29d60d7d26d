//! Dense state vectors, parameterized single-qubit gates, product gates and
//! rank-1 reflections.
//!
//! Reflections `R = I - (1 - e^{iθ})|a⟩⟨a|` are never materialized as
//! `2^n × 2^n` matrices; applying one costs a single overlap and an axpy, so a
//! `k`-layer word of reflections costs `O(k · 2^n)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type ComplexAmplitude = Complex64;

/// A single-qubit unitary as row-major `[[u00, u01], [u10, u11]]`.
pub type Gate2 = [[Complex64; 2]; 2];

/// Default qubit cap for state-vector simulation.
pub const DEFAULT_MAX_QUBITS: usize = 20;

/// Tolerance for norm checks on states produced by unitary operations.
pub const NORM_TOL: f64 = 1e-10;

/// Angles of the `U(θ, φ, λ)` gate, in radians. Stored as given, never reduced mod 2π.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationParams {
    pub theta: f64,
    pub phi: f64,
    pub lambda: f64,
}

impl RotationParams {
    pub fn new(theta: f64, phi: f64, lambda: f64) -> Result<Self> {
        let p = RotationParams { theta, phi, lambda };
        p.validate()?;
        Ok(p)
    }

    /// Angles given as multiples of π, e.g. `(0.29, 0.07, 0.11)` for `(0.29π, 0.07π, 0.11π)`.
    pub fn from_pi_units(theta: f64, phi: f64, lambda: f64) -> Result<Self> {
        use std::f64::consts::PI;
        Self::new(theta * PI, phi * PI, lambda * PI)
    }

    pub const fn identity() -> Self {
        RotationParams {
            theta: 0.0,
            phi: 0.0,
            lambda: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.theta.is_finite() && self.phi.is_finite() && self.lambda.is_finite() {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "rotation angles must be finite, got ({}, {}, {})",
                self.theta, self.phi, self.lambda
            )))
        }
    }
}

/// `U(θ, φ, λ) = [[cos(θ/2), -e^{iλ} sin(θ/2)], [e^{iφ} sin(θ/2), e^{i(λ+φ)} cos(θ/2)]]`.
pub fn make_single_qubit_gate(p: RotationParams) -> Result<Gate2> {
    p.validate()?;
    let (s, c) = (p.theta / 2.0).sin_cos();
    Ok([
        [
            Complex64::new(c, 0.0),
            -Complex64::from_polar(s, p.lambda),
        ],
        [
            Complex64::from_polar(s, p.phi),
            Complex64::from_polar(c, p.lambda + p.phi),
        ],
    ])
}

/// `u_1 ⊗ u_2 ⊗ … ⊗ u_n`; factor 0 acts on the most significant qubit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductGate {
    factors: Vec<RotationParams>,
}

impl ProductGate {
    pub fn new(factors: Vec<RotationParams>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::invalid("a product gate needs at least one qubit"));
        }
        for f in &factors {
            f.validate()?;
        }
        Ok(ProductGate { factors })
    }

    /// The same single-qubit gate on every qubit, `U^{⊗n}`.
    pub fn uniform(n: usize, p: RotationParams) -> Result<Self> {
        Self::new(vec![p; n])
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::uniform(n, RotationParams::identity())
    }

    pub fn n(&self) -> usize {
        self.factors.len()
    }

    pub fn factors(&self) -> &[RotationParams] {
        &self.factors
    }
}

/// A dense pure state of `n` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩`.
    pub fn zero(n: usize) -> Result<Self> {
        check_qubits(n, DEFAULT_MAX_QUBITS)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(StateVector { n, amps })
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(n: usize, index: usize) -> Result<Self> {
        check_qubits(n, DEFAULT_MAX_QUBITS)?;
        if index >= 1 << n {
            return Err(Error::invalid(format!(
                "basis index {index} out of range for {n} qubits"
            )));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(StateVector { n, amps })
    }

    /// Wraps raw amplitudes. The length must be a power of two; no normalization is applied.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::invalid(format!(
                "amplitude count {len} is not a power of two >= 2"
            )));
        }
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::invalid("amplitudes must be finite"));
        }
        Ok(StateVector {
            n: len.trailing_zeros() as usize,
            amps,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Rescales to unit norm. Fails on a (numerically) zero vector.
    pub fn normalized(mut self) -> Result<Self> {
        let norm = self.norm_sqr().sqrt();
        if norm < 1e-300 || !norm.is_finite() {
            return Err(Error::invalid("cannot normalize a zero vector"));
        }
        let inv = 1.0 / norm;
        for a in &mut self.amps {
            *a *= inv;
        }
        Ok(self)
    }

    /// `self += c · other`.
    pub(crate) fn axpy(&mut self, c: Complex64, other: &StateVector) {
        for (a, b) in self.amps.iter_mut().zip(&other.amps) {
            *a += c * b;
        }
    }
}

pub(crate) fn check_qubits(n: usize, cap: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::invalid("qubit count must be at least 1"));
    }
    if n > cap {
        return Err(Error::ResourceLimit {
            what: "qubits",
            requested: n as u128,
            cap: cap as u128,
        });
    }
    Ok(())
}

/// `U|0…0⟩` for a product gate, using the default qubit cap.
pub fn prepare_state(g: &ProductGate) -> Result<StateVector> {
    prepare_state_capped(g, DEFAULT_MAX_QUBITS)
}

pub fn prepare_state_capped(g: &ProductGate, max_qubits: usize) -> Result<StateVector> {
    check_qubits(g.n(), max_qubits)?;
    let mut amps = vec![Complex64::new(1.0, 0.0)];
    for f in g.factors() {
        let u = make_single_qubit_gate(*f)?;
        let (c0, c1) = (u[0][0], u[1][0]);
        let mut next = Vec::with_capacity(amps.len() * 2);
        for a in &amps {
            next.push(a * c0);
            next.push(a * c1);
        }
        amps = next;
    }
    Ok(StateVector { n: g.n(), amps })
}

/// `⟨a|b⟩`.
pub fn overlap(a: &StateVector, b: &StateVector) -> Result<ComplexAmplitude> {
    check_same_n(a, b)?;
    Ok(inner(a, b))
}

pub(crate) fn inner(a: &StateVector, b: &StateVector) -> Complex64 {
    a.amps
        .iter()
        .zip(&b.amps)
        .fold(Complex64::new(0.0, 0.0), |acc, (x, y)| acc + x.conj() * y)
}

fn check_same_n(a: &StateVector, b: &StateVector) -> Result<()> {
    if a.n != b.n {
        return Err(Error::invalid(format!(
            "dimension mismatch: {} vs {} qubits",
            a.n, b.n
        )));
    }
    Ok(())
}

/// `R = I - (1 - e^{iθ})|axis⟩⟨axis|`. With `θ = π` this is the Grover-type
/// reflection `I - 2|axis⟩⟨axis|`. The axis must be normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct Reflection {
    axis: StateVector,
    phase: f64,
}

impl Reflection {
    pub fn new(axis: StateVector, phase: f64) -> Result<Self> {
        if !phase.is_finite() {
            return Err(Error::invalid("reflection phase must be finite"));
        }
        if (axis.norm_sqr() - 1.0).abs() > NORM_TOL {
            return Err(Error::invalid(format!(
                "reflection axis must be normalized, |axis|^2 = {}",
                axis.norm_sqr()
            )));
        }
        Ok(Reflection { axis, phase })
    }

    /// `I - 2|axis⟩⟨axis|`.
    pub fn grover(axis: StateVector) -> Result<Self> {
        Self::new(axis, std::f64::consts::PI)
    }

    pub fn axis(&self) -> &StateVector {
        &self.axis
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    /// `1 - e^{iθ}`.
    pub fn weight(&self) -> Complex64 {
        reflection_weight(self.phase)
    }
}

pub(crate) fn reflection_weight(phase: f64) -> Complex64 {
    Complex64::new(1.0 - phase.cos(), -phase.sin())
}

/// `s - (1 - e^{iθ})⟨axis|s⟩ axis`.
pub fn apply_reflection(r: &Reflection, s: &StateVector) -> Result<StateVector> {
    check_same_n(r.axis(), s)?;
    let mut out = s.clone();
    reflect_in_place(r.axis(), r.weight(), &mut out);
    Ok(out)
}

/// In-place rank-1 update with a precomputed weight `1 - e^{iθ}`.
pub(crate) fn reflect_in_place(axis: &StateVector, weight: Complex64, s: &mut StateVector) {
    let c = inner(axis, s);
    s.axpy(-weight * c, axis);
}

/// Applies `I - 2|a⟩⟨a|` for each axis in slice order (first axis acts first).
pub(crate) fn apply_grover_word(axes: &[&StateVector], s: &mut StateVector) {
    let w = Complex64::new(2.0, 0.0);
    for a in axes {
        reflect_in_place(a, w, s);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_params_give_identity_matrix() {
        let u = make_single_qubit_gate(RotationParams::identity()).unwrap();
        assert_eq!(u, [[c(1.0, 0.0), c(-0.0, -0.0)], [c(0.0, 0.0), c(1.0, 0.0)]]);
    }

    #[test]
    fn x_like_gate() {
        let u = make_single_qubit_gate(RotationParams::new(PI, 0.0, PI).unwrap()).unwrap();
        // u01 = -e^{iπ} = 1, u10 = 1, diagonal vanishes.
        assert!(u[0][0].norm() < 1e-15);
        assert!(u[1][1].norm() < 1e-15);
        assert!((u[0][1] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((u[1][0] - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn reference_row_magnitude() {
        let u = make_single_qubit_gate(RotationParams::from_pi_units(0.29, 0.07, 0.11).unwrap())
            .unwrap();
        assert!((u[0][0].norm() - (0.145 * PI).cos()).abs() < 1e-15);
    }

    #[test]
    fn non_finite_params_rejected() {
        assert!(matches!(
            RotationParams::new(f64::NAN, 0.0, 0.0),
            Err(Error::InvalidArgument(_))
        ));
        let bad = RotationParams {
            theta: 0.0,
            phi: f64::INFINITY,
            lambda: 0.0,
        };
        assert!(make_single_qubit_gate(bad).is_err());
    }

    #[test]
    fn prepare_identity_two_qubits() {
        let s = prepare_state(&ProductGate::identity(2).unwrap()).unwrap();
        assert_eq!(
            s.amplitudes(),
            &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]
        );
    }

    #[test]
    fn prepare_half_rotation() {
        let g = ProductGate::uniform(1, RotationParams::new(PI / 2.0, 0.0, 0.0).unwrap()).unwrap();
        let s = prepare_state(&g).unwrap();
        assert!((s.amplitudes()[0] - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        assert!((s.amplitudes()[1] - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn prepare_three_qubits_row_one() {
        let g = ProductGate::uniform(3, RotationParams::from_pi_units(0.29, 0.07, 0.11).unwrap())
            .unwrap();
        let s = prepare_state(&g).unwrap();
        let expected = (0.145 * PI).cos().powi(3);
        assert!((s.amplitudes()[0] - c(expected, 0.0)).norm() < 1e-14);
        assert!((s.norm_sqr() - 1.0).abs() < NORM_TOL);
    }

    #[test]
    fn qubit_cap_enforced() {
        let g = ProductGate::identity(5).unwrap();
        assert!(matches!(
            prepare_state_capped(&g, 4),
            Err(Error::ResourceLimit { cap: 4, .. })
        ));
    }

    #[test]
    fn reflection_cases() {
        let zero = StateVector::basis(1, 0).unwrap();
        let one = StateVector::basis(1, 1).unwrap();
        let r = Reflection::grover(zero.clone()).unwrap();
        assert_eq!(apply_reflection(&r, &one).unwrap(), one);
        let flipped = apply_reflection(&r, &zero).unwrap();
        assert!((flipped.amplitudes()[0] + c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn reflection_dimension_mismatch() {
        let r = Reflection::grover(StateVector::zero(2).unwrap()).unwrap();
        let s = StateVector::zero(3).unwrap();
        assert!(matches!(
            apply_reflection(&r, &s),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn reflection_requires_normalized_axis() {
        let axis = StateVector::from_amplitudes(vec![c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!(Reflection::grover(axis).is_err());
    }

    #[test]
    fn overlap_examples() {
        let zero = StateVector::basis(1, 0).unwrap();
        let one = StateVector::basis(1, 1).unwrap();
        assert_eq!(overlap(&zero, &zero).unwrap(), c(1.0, 0.0));
        assert_eq!(overlap(&zero, &one).unwrap(), c(0.0, 0.0));
        let plus = prepare_state(
            &ProductGate::uniform(1, RotationParams::new(PI / 2.0, 0.0, 0.0).unwrap()).unwrap(),
        )
        .unwrap();
        assert!((overlap(&zero, &plus).unwrap().re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert!(overlap(&zero, &StateVector::zero(2).unwrap()).is_err());
    }

    #[test]
    fn amplitude_count_must_be_power_of_two() {
        assert!(StateVector::from_amplitudes(vec![c(1.0, 0.0); 3]).is_err());
        assert!(StateVector::from_amplitudes(vec![c(f64::NAN, 0.0), c(0.0, 0.0)]).is_err());
    }
}
