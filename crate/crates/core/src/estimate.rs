//! Estimates of trace quantities and the associative accumulator used to
//! reduce Monte Carlo trials.

use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimateMode {
    /// Dense-matrix ground truth.
    Oracle,
    /// Weighted sum over every word; no sampling error.
    ExactEnumeration,
    /// Sampled circuits, each contributing its exact outcome probability.
    McExactProb,
    /// Sampled circuits with finite measurement shots.
    McShots,
}

impl EstimateMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            EstimateMode::Oracle => "oracle",
            EstimateMode::ExactEnumeration => "exact-enumeration",
            EstimateMode::McExactProb => "mc-exact-prob",
            EstimateMode::McShots => "mc-shots",
        }
    }

    pub fn is_sampled(&self) -> bool {
        matches!(self, EstimateMode::McExactProb | EstimateMode::McShots)
    }
}

impl fmt::Display for EstimateMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A value with its standard error. `std_error` is zero for oracle and
/// enumeration modes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEstimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: u64,
    pub mode: EstimateMode,
}

impl TraceEstimate {
    pub fn exact(value: f64, mode: EstimateMode) -> Self {
        TraceEstimate {
            value,
            std_error: 0.0,
            samples: 0,
            mode,
        }
    }

    pub fn oracle(value: f64) -> Self {
        Self::exact(value, EstimateMode::Oracle)
    }
}

/// `(Σx, Σx², count)`; merging is associative, so reductions in a fixed
/// order are reproducible.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Accumulator {
    pub sum: f64,
    pub sum_sq: f64,
    pub count: u64,
}

impl Accumulator {
    pub fn push(&mut self, x: f64) {
        self.sum += x;
        self.sum_sq += x * x;
        self.count += 1;
    }

    /// Adds `count` observations whose sum and sum of squares are given.
    pub fn push_many(&mut self, sum: f64, sum_sq: f64, count: u64) {
        self.sum += sum;
        self.sum_sq += sum_sq;
        self.count += count;
    }

    pub fn merge(mut self, other: Accumulator) -> Accumulator {
        self.push_many(other.sum, other.sum_sq, other.count);
        self
    }

    pub fn mean(&self) -> f64 {
        if self.count == 0 {
            return f64::NAN;
        }
        self.sum / self.count as f64
    }

    /// Unbiased sample variance; zero with fewer than two observations.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let n = self.count as f64;
        let mean = self.sum / n;
        ((self.sum_sq - n * mean * mean) / (n - 1.0)).max(0.0)
    }

    pub fn std_error(&self) -> f64 {
        if self.count == 0 {
            return 0.0;
        }
        (self.variance() / self.count as f64).sqrt()
    }

    pub fn finish(&self, mode: EstimateMode) -> TraceEstimate {
        TraceEstimate {
            value: self.mean(),
            std_error: self.std_error(),
            samples: self.count,
            mode,
        }
    }
}
