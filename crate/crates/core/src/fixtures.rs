//! Bundled ensembles: the four-component reference model and random generators.

use rand::Rng;

use crate::ensemble::{Component, EnsembleSpec};
use crate::qcore::{ProductGate, RotationParams};

/// Angles (in units of π) and probabilities of the reference four-component model.
pub const REFERENCE_COMPONENTS: [(f64, [f64; 3]); 4] = [
    (0.1, [0.29, 0.07, 0.11]),
    (0.2, [0.46, 0.62, 0.82]),
    (0.3, [0.41, 0.59, 0.53]),
    (0.4, [0.55, 0.31, 0.60]),
];

/// The reference model on `n` qubits, each component applying `U(θ, φ, λ)^{⊗n}`.
pub fn reference_ensemble_with_qubits(n: usize) -> EnsembleSpec {
    let comps = REFERENCE_COMPONENTS
        .iter()
        .map(|&(prob, [t, p, l])| Component {
            prob,
            gate: ProductGate::uniform(n, RotationParams::from_pi_units(t, p, l).unwrap()).unwrap(),
        })
        .collect();
    EnsembleSpec::new(n, comps).expect("reference model is valid")
}

/// The reference model on three qubits.
pub fn reference_ensemble() -> EnsembleSpec {
    reference_ensemble_with_qubits(3)
}

/// Uniform angles in `[0, 2π)` per qubit.
pub fn random_product_gate<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ProductGate {
    use std::f64::consts::TAU;
    let factors = (0..n)
        .map(|_| RotationParams {
            theta: rng.random_range(0.0..TAU),
            phi: rng.random_range(0.0..TAU),
            lambda: rng.random_range(0.0..TAU),
        })
        .collect();
    ProductGate::new(factors).unwrap()
}

/// Random product-state ensemble with Dirichlet-like weights bounded away from zero.
pub fn random_ensemble<R: Rng + ?Sized>(rng: &mut R, n: usize, alpha: usize) -> EnsembleSpec {
    let raw: Vec<f64> = (0..alpha).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let comps = raw
        .into_iter()
        .map(|w| Component {
            prob: w / total,
            gate: random_product_gate(rng, n),
        })
        .collect();
    EnsembleSpec::new(n, comps).unwrap()
}
