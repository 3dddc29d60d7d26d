//! Subcommand bodies: each returns the rows it produced.

use std::time::Instant;

use qtrace_core::ensemble::{
    exact_entropy_trace, exact_g_power_trace, exact_power_trace, EnsembleSpec, ORACLE_MAX_QUBITS,
};
use qtrace_core::gst::{self, GstConfig, GstStrategy, MeasureMode, DEFAULT_EPSILON, DEFAULT_THETA};
use qtrace_core::ht::{self, HtConfig, DEFAULT_ENUMERATION_CAP};
use qtrace_core::noise_bounds;
use qtrace_core::series::{entropy_weights, evaluate_series, evaluate_series_on_moments};
use qtrace_core::{EstimateMode, TraceEstimate};

use crate::config::{BoundsConfig, Estimator, Mode, Params, Strategy, SweepParameter};
use crate::error::CliError;
use crate::table::ResultRow;

pub const DEFAULT_SHOTS: u64 = 1000;
pub const DEFAULT_TRIALS: u64 = 10_000;

/// Estimator settings after merging flags over config over defaults.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Settings {
    pub mode: Mode,
    pub strategy: Strategy,
    pub shots: u64,
    pub trials: u64,
    pub epsilon: f64,
    pub theta: f64,
    pub seed: u64,
    pub cap: u64,
    pub ht_sigma: f64,
    pub gst_sigma: f64,
    pub timing: bool,
}

/// Flag values; `None` defers to the config.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub mode: Option<Mode>,
    pub strategy: Option<Strategy>,
    pub shots: Option<u64>,
    pub trials: Option<u64>,
    pub epsilon: Option<f64>,
    pub theta: Option<f64>,
    pub seed: Option<u64>,
    pub cap: Option<u64>,
    pub ht_sigma: Option<f64>,
    pub gst_sigma: Option<f64>,
}

impl Settings {
    pub fn resolve(o: &Overrides, p: &Params, default_strategy: Strategy, timing: bool) -> Result<Self, CliError> {
        let s = Settings {
            mode: o.mode.or(p.mode).unwrap_or(Mode::Exact),
            strategy: o.strategy.or(p.strategy).unwrap_or(default_strategy),
            shots: o.shots.or(p.shots).unwrap_or(DEFAULT_SHOTS),
            trials: o.trials.or(p.trials).unwrap_or(DEFAULT_TRIALS),
            epsilon: o.epsilon.or(p.epsilon_trunc).unwrap_or(DEFAULT_EPSILON),
            theta: o.theta.or(p.theta_basis).unwrap_or(DEFAULT_THETA),
            seed: o.seed.or(p.seed).unwrap_or(0),
            cap: o.cap.or(p.enumeration_cap).unwrap_or(DEFAULT_ENUMERATION_CAP),
            ht_sigma: o.ht_sigma.or(p.ht_sigma).unwrap_or(0.0),
            gst_sigma: o.gst_sigma.or(p.gst_sigma).unwrap_or(0.0),
            timing,
        };
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.shots == 0 || self.trials == 0 {
            return Err(CliError::Usage("shots and trials must be >= 1".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(CliError::Usage(format!("epsilon_trunc {} must lie in (0, 1)", self.epsilon)));
        }
        for (name, v) in [("ht_sigma", self.ht_sigma), ("gst_sigma", self.gst_sigma)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(CliError::Usage(format!("{name} must be finite and >= 0")));
            }
        }
        if !self.theta.is_finite() {
            return Err(CliError::Usage("theta_basis must be finite".into()));
        }
        Ok(())
    }

    fn ht_config(&self) -> HtConfig {
        match self.mode {
            Mode::Exact => HtConfig::exact_prob(self.trials, self.seed),
            Mode::Shots => HtConfig::shots(self.trials, self.shots, self.seed),
        }
        .with_sigma(self.ht_sigma)
    }

    fn check_ht_enumeration(&self) -> Result<(), CliError> {
        if self.mode != Mode::Exact || self.ht_sigma > 0.0 {
            return Err(CliError::Usage(
                "HT enumeration is exact; use --strategy mc for shots or ht_sigma noise".into(),
            ));
        }
        Ok(())
    }

    fn gst_config(&self) -> Result<GstConfig, CliError> {
        let mode = match (self.mode, self.gst_sigma > 0.0) {
            (Mode::Exact, false) => MeasureMode::Exact,
            (Mode::Exact, true) => MeasureMode::Gaussian(self.gst_sigma),
            (Mode::Shots, false) => MeasureMode::Shots(self.shots),
            (Mode::Shots, true) => {
                return Err(CliError::Usage("gst_sigma noise applies to exact readout only".into()))
            }
        };
        let cfg = GstConfig {
            epsilon: self.epsilon,
            theta: self.theta,
            mode,
            ..GstConfig::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn gst_strategy(&self) -> GstStrategy {
        match self.strategy {
            Strategy::Enumerate => GstStrategy::Enumerate { cap: self.cap },
            Strategy::Mc => GstStrategy::MonteCarlo { words: self.trials },
        }
    }
}

fn has_oracle(e: &EnsembleSpec) -> bool {
    e.n() <= ORACLE_MAX_QUBITS
}

fn timed<T>(timing: bool, f: impl FnOnce() -> Result<T, CliError>) -> Result<(T, u64), CliError> {
    let start = Instant::now();
    let out = f()?;
    let ms = if timing { start.elapsed().as_millis() as u64 } else { 0 };
    Ok((out, ms))
}

fn row(quantity: &str, order: usize, est: &TraceEstimate, shots: u64, s: &Settings, wall_ms: u64) -> ResultRow {
    ResultRow {
        quantity: quantity.to_string(),
        order: order as u64,
        estimate: est.value,
        std_error: est.std_error,
        exact_value: None,
        rel_error: None,
        mode: est.mode.as_str().to_string(),
        shots: if est.mode == EstimateMode::McShots { shots } else { 0 },
        trials: est.samples,
        seed: s.seed,
        wall_ms,
    }
}

pub const Q_POWER: &str = "tr_rho_pow";
pub const Q_G_POWER: &str = "tr_g_pow";
pub const Q_ENTROPY: &str = "tr_rho_ln_rho";

pub fn oracle(e: &EnsembleSpec, powers: &[usize], g_powers: &[usize], entropy: bool, s: &Settings) -> Result<Vec<ResultRow>, CliError> {
    let mut rows = Vec::new();
    let mut push = |q: &str, order: usize, f: &dyn Fn() -> qtrace_core::Result<f64>| -> Result<(), CliError> {
        let (v, ms) = timed(s.timing, || Ok(f()?))?;
        rows.push(row(q, order, &TraceEstimate::oracle(v), 0, s, ms).with_exact(Some(v)));
        Ok(())
    };
    for &m in powers {
        push(Q_POWER, m, &|| exact_power_trace(e, m as u32))?;
    }
    for &k in g_powers {
        push(Q_G_POWER, k, &|| exact_g_power_trace(e, k as u32))?;
    }
    if entropy {
        push(Q_ENTROPY, 0, &|| exact_entropy_trace(e))?;
    }
    Ok(rows)
}

pub fn ht_power(e: &EnsembleSpec, m: usize, s: &Settings) -> Result<TraceEstimate, CliError> {
    if m == 0 {
        return Err(CliError::Usage("power must be >= 1".into()));
    }
    Ok(match s.strategy {
        Strategy::Enumerate => {
            s.check_ht_enumeration()?;
            ht::estimate_power_trace_enumerate(e, m - 1, s.cap)?
        }
        Strategy::Mc => ht::estimate_power_trace_mc(e, m - 1, &s.ht_config())?,
    })
}

pub fn gst_power(e: &EnsembleSpec, m: usize, s: &Settings) -> Result<TraceEstimate, CliError> {
    Ok(gst::estimate_power_trace(e, m, s.gst_strategy(), &s.gst_config()?, s.seed)?)
}

fn exact_power(e: &EnsembleSpec, m: usize) -> Result<Option<f64>, CliError> {
    Ok(if has_oracle(e) { Some(exact_power_trace(e, m as u32)?) } else { None })
}

pub fn ht(e: &EnsembleSpec, powers: &[usize], s: &Settings) -> Result<Vec<ResultRow>, CliError> {
    powers
        .iter()
        .map(|&m| {
            let (est, ms) = timed(s.timing, || ht_power(e, m, s))?;
            Ok(row(Q_POWER, m, &est, s.shots, s, ms).with_exact(exact_power(e, m)?))
        })
        .collect()
}

pub fn gst(e: &EnsembleSpec, powers: &[usize], g_powers: &[usize], s: &Settings) -> Result<Vec<ResultRow>, CliError> {
    let mut rows = Vec::new();
    for &m in powers {
        let (est, ms) = timed(s.timing, || gst_power(e, m, s))?;
        rows.push(row(Q_POWER, m, &est, s.shots, s, ms).with_exact(exact_power(e, m)?));
    }
    for &k in g_powers {
        let (est, ms) = timed(s.timing, || {
            Ok(gst::estimate_g_power_trace(e, k, s.gst_strategy(), &s.gst_config()?, s.seed)?)
        })?;
        let exact = if has_oracle(e) { Some(exact_g_power_trace(e, k as u32)?) } else { None };
        rows.push(row(Q_G_POWER, k, &est, s.shots, s, ms).with_exact(exact));
    }
    Ok(rows)
}

/// Truncated series for `Tr{ρ ln ρ}` fed by the chosen estimator.
pub fn entropy_estimate(e: &EnsembleSpec, order: usize, estimator: Estimator, s: &Settings) -> Result<TraceEstimate, CliError> {
    let w = entropy_weights(order)?;
    let k_max = w.max_k();
    Ok(match estimator {
        Estimator::Oracle => {
            let gk = (0..=k_max)
                .map(|k| exact_g_power_trace(e, k as u32).map(TraceEstimate::oracle))
                .collect::<qtrace_core::Result<Vec<_>>>()?;
            evaluate_series(&w, &gk)?
        }
        Estimator::Ht => {
            let moments = match s.strategy {
                Strategy::Enumerate => {
                    s.check_ht_enumeration()?;
                    ht::g_moments_enumerate(e, k_max - 1, s.cap)?
                        .into_iter()
                        .map(|v| TraceEstimate::exact(v, EstimateMode::ExactEnumeration))
                        .collect()
                }
                Strategy::Mc => {
                    let cfg = s.ht_config();
                    let mut out = vec![TraceEstimate::exact(1.0, EstimateMode::ExactEnumeration)];
                    for j in 1..k_max {
                        out.push(ht::estimate_g_moment_mc(e, j, &cfg)?);
                    }
                    out
                }
            };
            evaluate_series_on_moments(&w, e.dim(), &moments)?
        }
        Estimator::Gst => {
            let cfg = s.gst_config()?;
            let gk = (0..=k_max)
                .map(|k| gst::estimate_g_power_trace(e, k, s.gst_strategy(), &cfg, s.seed))
                .collect::<qtrace_core::Result<Vec<_>>>()?;
            evaluate_series(&w, &gk)?
        }
    })
}

pub fn entropy(e: &EnsembleSpec, order: usize, estimator: Estimator, s: &Settings) -> Result<Vec<ResultRow>, CliError> {
    let (est, ms) = timed(s.timing, || entropy_estimate(e, order, estimator, s))?;
    let exact = if has_oracle(e) { Some(exact_entropy_trace(e)?) } else { None };
    Ok(vec![row(Q_ENTROPY, order, &est, s.shots, s, ms).with_exact(exact)])
}

/// One `Tr{ρ^m}` row per swept value; the quantity names the point.
pub fn sweep(
    e: &EnsembleSpec,
    m: usize,
    parameter: SweepParameter,
    values: &[f64],
    estimator: Estimator,
    base: &Settings,
) -> Result<Vec<ResultRow>, CliError> {
    let mut rows = Vec::new();
    for &v in values {
        let mut s = *base;
        match parameter {
            SweepParameter::Shots => {
                if !(v >= 1.0 && v.fract() == 0.0 && v <= u64::MAX as f64) {
                    return Err(CliError::Usage(format!("shots value {v} is not a positive integer")));
                }
                s.shots = v as u64;
                s.mode = Mode::Shots;
            }
            SweepParameter::EpsilonTrunc => s.epsilon = v,
            SweepParameter::HtSigma => s.ht_sigma = v,
            SweepParameter::GstSigma => s.gst_sigma = v,
        }
        s.validate()?;
        let (est, ms) = timed(s.timing, || match estimator {
            Estimator::Ht => ht_power(e, m, &s),
            Estimator::Gst => gst_power(e, m, &s),
            Estimator::Oracle => Err(CliError::Usage("sweep needs the ht or gst estimator".into())),
        })?;
        let name = format!("{Q_POWER}@{}={v}", parameter.as_str());
        rows.push(row(&name, m, &est, s.shots, &s, ms).with_exact(exact_power(e, m)?));
    }
    Ok(rows)
}

pub fn bounds(b: &BoundsConfig, s: &Settings) -> Result<Vec<ResultRow>, CliError> {
    let d = b.d.unwrap_or(2);
    let eps_tilde = b.eps_tilde.unwrap_or(0.02);
    let delta_tilde = b.delta_tilde.unwrap_or(0.05);
    let eps1 = b.eps1.unwrap_or(1e-4);
    let eps2 = b.eps2.unwrap_or(1e-4);
    let n_layers = b.n_layers.unwrap_or(2);
    let mk = |quantity: &str, order: usize, value: f64, shots: u64| ResultRow {
        quantity: quantity.to_string(),
        order: order as u64,
        estimate: value,
        std_error: 0.0,
        exact_value: None,
        rel_error: None,
        mode: "bound".to_string(),
        shots,
        trials: 0,
        seed: s.seed,
        wall_ms: 0,
    };
    let n = noise_bounds::shots_for_accuracy(d, eps_tilde, delta_tilde)?;
    Ok(vec![
        mk("shots_for_accuracy", d, n as f64, n),
        mk("gram_inverse_error_bound", d, noise_bounds::gram_inverse_error_bound(d, eps1, s.epsilon)?, 0),
        mk("sampling_error_bound", d, noise_bounds::sampling_error_bound(d, eps1, eps2, s.epsilon)?, 0),
        mk(
            "truncation_error_estimate",
            n_layers,
            noise_bounds::truncation_error_estimate(n_layers, d, s.epsilon, s.shots as f64)?,
            s.shots,
        ),
    ])
}
