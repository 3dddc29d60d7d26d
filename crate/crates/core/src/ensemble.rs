//! The random-state model `ρ = Σ p_i U_i|0⟩⟨0|U_i†` and the dense-matrix
//! oracle every estimator is checked against.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::error::{Error, Result};
use crate::qcore::{check_qubits, prepare_state_capped, ProductGate, StateVector, DEFAULT_MAX_QUBITS};

/// Largest qubit count the dense oracle accepts.
pub const ORACLE_MAX_QUBITS: usize = 12;

/// Tolerance on `Σ p_i = 1` before renormalization.
pub const PROB_SUM_TOL: f64 = 1e-9;

/// Eigenvalues at or below this are dropped from `Σ λ ln λ`.
pub const ENTROPY_EIG_CUTOFF: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub prob: f64,
    pub gate: ProductGate,
}

/// `{n, (p_i, U_i)}`. Probabilities are renormalized once at construction and
/// the pure states `U_i|0…0⟩` are prepared eagerly.
#[derive(Debug, Clone)]
pub struct EnsembleSpec {
    n: usize,
    components: Vec<Component>,
    states: Vec<StateVector>,
    sampler: WeightedIndex<f64>,
}

impl EnsembleSpec {
    pub fn new(n: usize, components: Vec<Component>) -> Result<Self> {
        Self::with_max_qubits(n, components, DEFAULT_MAX_QUBITS)
    }

    pub fn with_max_qubits(n: usize, mut components: Vec<Component>, max_qubits: usize) -> Result<Self> {
        check_qubits(n, max_qubits)?;
        if components.is_empty() {
            return Err(Error::invalid("an ensemble needs at least one component"));
        }
        for (i, c) in components.iter().enumerate() {
            if !(c.prob > 0.0 && c.prob <= 1.0) {
                return Err(Error::invalid(format!(
                    "component {i}: probability {} not in (0, 1]",
                    c.prob
                )));
            }
            if c.gate.n() != n {
                return Err(Error::invalid(format!(
                    "component {i}: gate acts on {} qubits, ensemble has {n}",
                    c.gate.n()
                )));
            }
        }
        let total: f64 = components.iter().map(|c| c.prob).sum();
        if (total - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::invalid(format!(
                "probabilities sum to {total}, expected 1 within {PROB_SUM_TOL:e}"
            )));
        }
        for c in &mut components {
            c.prob /= total;
        }
        let states = components
            .iter()
            .map(|c| prepare_state_capped(&c.gate, max_qubits))
            .collect::<Result<Vec<_>>>()?;
        let sampler = WeightedIndex::new(components.iter().map(|c| c.prob))
            .map_err(|e| Error::invalid(format!("bad probabilities: {e}")))?;
        Ok(EnsembleSpec {
            n,
            components,
            states,
            sampler,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `2^n`.
    pub fn dim(&self) -> usize {
        1 << self.n
    }

    /// Number of components, α.
    pub fn alpha(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn prob(&self, i: usize) -> f64 {
        self.components[i].prob
    }

    /// `|ψ_i⟩ = U_i|0…0⟩`.
    pub fn state(&self, i: usize) -> &StateVector {
        &self.states[i]
    }

    pub fn states(&self) -> &[StateVector] {
        &self.states
    }

    pub(crate) fn check_indices(&self, indices: &[usize]) -> Result<()> {
        match indices.iter().find(|&&i| i >= self.alpha()) {
            Some(i) => Err(Error::invalid(format!(
                "component index {i} out of range for alpha = {}",
                self.alpha()
            ))),
            None => Ok(()),
        }
    }
}

/// Draws component `i` with probability `p_i`.
pub fn sample_component<R: Rng + ?Sized>(e: &EnsembleSpec, rng: &mut R) -> usize {
    e.sampler.sample(rng)
}

/// Dense `ρ`, Hermitian with unit trace.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    n: usize,
    entries: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.entries.clone().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Dense `G = I - 2ρ`.
    pub fn g_matrix(&self) -> DMatrix<Complex64> {
        let dim = self.entries.nrows();
        DMatrix::<Complex64>::identity(dim, dim) - self.entries.scale(2.0)
    }
}

fn check_oracle_size(n: usize) -> Result<()> {
    if n > ORACLE_MAX_QUBITS {
        return Err(Error::ResourceLimit {
            what: "oracle qubits",
            requested: n as u128,
            cap: ORACLE_MAX_QUBITS as u128,
        });
    }
    Ok(())
}

/// `|a⟩⟨a|` as a dense matrix.
pub fn projector(a: &StateVector) -> DMatrix<Complex64> {
    let v = nalgebra::DVector::from_column_slice(a.amplitudes());
    &v * v.adjoint()
}

/// Dense `I - 2|a⟩⟨a|`.
pub fn dense_grover(a: &StateVector) -> DMatrix<Complex64> {
    let dim = a.dim();
    DMatrix::<Complex64>::identity(dim, dim) - projector(a).scale(2.0)
}

pub fn build_density_matrix(e: &EnsembleSpec) -> Result<DensityMatrix> {
    check_oracle_size(e.n())?;
    let dim = e.dim();
    let mut rho = DMatrix::<Complex64>::zeros(dim, dim);
    for (c, s) in e.components().iter().zip(e.states()) {
        rho += projector(s).scale(c.prob);
    }
    Ok(DensityMatrix {
        n: e.n(),
        entries: rho,
    })
}

fn trace_of_power(m: &DMatrix<Complex64>, k: u32) -> Complex64 {
    let dim = m.nrows();
    let mut acc = DMatrix::<Complex64>::identity(dim, dim);
    for _ in 0..k {
        acc = &acc * m;
    }
    acc.trace()
}

/// `Tr{ρ^m}` by repeated dense multiplication.
pub fn exact_power_trace(e: &EnsembleSpec, m: u32) -> Result<f64> {
    if m == 0 {
        return Err(Error::invalid("power m must be >= 1 (Tr{rho^0} is the dimension)"));
    }
    let rho = build_density_matrix(e)?;
    Ok(trace_of_power(rho.entries(), m).re)
}

/// `Tr{(I - 2ρ)^k}` by repeated dense multiplication.
pub fn exact_g_power_trace(e: &EnsembleSpec, k: u32) -> Result<f64> {
    let rho = build_density_matrix(e)?;
    Ok(trace_of_power(&rho.g_matrix(), k).re)
}

/// `Σ_j (1 - 2λ_j)^k` over the eigenvalues of `ρ`.
pub fn exact_g_power_trace_eigen(e: &EnsembleSpec, k: u32) -> Result<f64> {
    let rho = build_density_matrix(e)?;
    Ok(rho
        .eigenvalues()
        .iter()
        .map(|l| (1.0 - 2.0 * l).powi(k as i32))
        .sum())
}

/// `Tr{G_{q_1} G_{q_2} ⋯ G_{q_k}}` as a dense product; the empty word gives `2^n`.
pub fn exact_combination_trace(e: &EnsembleSpec, indices: &[usize]) -> Result<Complex64> {
    check_oracle_size(e.n())?;
    e.check_indices(indices)?;
    let dim = e.dim();
    let mut acc = DMatrix::<Complex64>::identity(dim, dim);
    for &i in indices {
        acc = &acc * dense_grover(e.state(i));
    }
    Ok(acc.trace())
}

/// `Tr{ρ ln ρ} = Σ λ ln λ` over eigenvalues above [`ENTROPY_EIG_CUTOFF`].
pub fn exact_entropy_trace(e: &EnsembleSpec) -> Result<f64> {
    let rho = build_density_matrix(e)?;
    Ok(rho
        .eigenvalues()
        .into_iter()
        .filter(|&l| l > ENTROPY_EIG_CUTOFF)
        .map(|l| l * l.ln())
        .sum())
}
