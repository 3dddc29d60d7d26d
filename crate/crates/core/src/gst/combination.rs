use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ensemble::{sample_component, EnsembleSpec};
use crate::error::Result;

/// An ordered word `(q₁, …, q_k)` of reflection indices with weight `Π p_{q_t}`.
/// The word operator is the matrix product `G_{q₁} ⋯ G_{q_k}`, so `q_k` acts
/// first on a state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Combination {
    indices: Vec<usize>,
    weight: f64,
}

impl Combination {
    pub fn new(e: &EnsembleSpec, indices: Vec<usize>) -> Result<Self> {
        e.check_indices(&indices)?;
        let weight = indices.iter().map(|&i| e.prob(i)).product();
        Ok(Combination { indices, weight })
    }

    pub fn empty() -> Self {
        Combination {
            indices: Vec::new(),
            weight: 1.0,
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn k(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Distinct indices in first-occurrence order.
    pub fn distinct(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for &i in &self.indices {
            if !out.contains(&i) {
                out.push(i);
            }
        }
        out
    }
}

/// Word of exactly `k` i.i.d. components.
pub fn sample_word<R: Rng + ?Sized>(e: &EnsembleSpec, k: usize, rng: &mut R) -> Combination {
    let indices: Vec<usize> = (0..k).map(|_| sample_component(e, rng)).collect();
    let weight = indices.iter().map(|&i| e.prob(i)).product();
    Combination { indices, weight }
}

/// `m` fair coin flips; each head appends one sampled component, so
/// `k ~ Binomial(m, ½)`.
pub fn sample_combination<R: Rng + ?Sized>(e: &EnsembleSpec, m: usize, rng: &mut R) -> Combination {
    let mut indices = Vec::new();
    for _ in 0..m {
        if rng.random_bool(0.5) {
            indices.push(sample_component(e, rng));
        }
    }
    let weight = indices.iter().map(|&i| e.prob(i)).product();
    Combination { indices, weight }
}

/// Word number `w` in base-`α` order, most significant digit first.
pub(crate) fn word_from_index(e: &EnsembleSpec, k: usize, mut w: u64) -> Combination {
    let alpha = e.alpha() as u64;
    let mut indices = vec![0usize; k];
    for slot in indices.iter_mut().rev() {
        *slot = (w % alpha) as usize;
        w /= alpha;
    }
    let weight = indices.iter().map(|&i| e.prob(i)).product();
    Combination { indices, weight }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::Component;
    use crate::fixtures::reference_ensemble;
    use crate::qcore::ProductGate;
    use crate::rng::stream;
    use crate::series::binomial;

    #[test]
    fn empty_and_single_component() {
        let e = reference_ensemble();
        let mut rng = stream(1, 0, 0);
        let q = sample_combination(&e, 0, &mut rng);
        assert!(q.is_empty());
        assert_eq!(q.weight(), 1.0);

        let single = EnsembleSpec::new(
            2,
            vec![Component { prob: 1.0, gate: ProductGate::identity(2).unwrap() }],
        )
        .unwrap();
        for _ in 0..20 {
            let q = sample_combination(&single, 6, &mut rng);
            assert!(q.indices().iter().all(|&i| i == 0));
            assert_eq!(q.weight(), 1.0);
        }
    }

    #[test]
    fn weight_is_product() {
        let e = reference_ensemble();
        let q = Combination::new(&e, vec![3, 1, 3]).unwrap();
        assert!((q.weight() - 0.4 * 0.2 * 0.4).abs() < 1e-15);
        assert_eq!(q.distinct(), vec![3, 1]);
        assert!(Combination::new(&e, vec![4]).is_err());
    }

    #[test]
    fn word_indexing_covers_all_words() {
        let e = reference_ensemble();
        let total: f64 = (0..64).map(|w| word_from_index(&e, 3, w).weight()).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert_eq!(word_from_index(&e, 3, 6).indices(), &[0, 1, 2]);
    }

    #[test]
    fn k_distribution_is_binomial() {
        let e = reference_ensemble();
        let m = 6;
        let draws = 100_000;
        let mut counts = vec![0u64; m + 1];
        let mut rng = stream(42, 9, 0);
        for _ in 0..draws {
            counts[sample_combination(&e, m, &mut rng).k()] += 1;
        }
        let chi2: f64 = counts
            .iter()
            .enumerate()
            .map(|(k, &c)| {
                let expected = draws as f64 * binomial(m, k) / 64.0;
                (c as f64 - expected).powi(2) / expected
            })
            .sum();
        // 99th percentile of chi-square with 6 degrees of freedom.
        assert!(chi2 < 16.81, "chi2 = {chi2}");
    }
}
