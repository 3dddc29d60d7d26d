//! Regression rows for the bundled reference ensemble.

use qtrace_core::ensemble::{exact_entropy_trace, exact_g_power_trace, EnsembleSpec};

use crate::commands::{gst_power, ht_power, Settings};
use crate::config::{Mode, Strategy};
use crate::error::CliError;

/// Reference `Tr{ρ^m}` for `m = 2, 3, 4`, identical for both circuit methods.
pub const POWER_REFERENCE: [(usize, &str); 3] = [(2, "0.650"), (3, "0.486"), (4, "0.375")];

/// Reference `Tr{G^m}` for `m = 2..=8`; these carry shot noise, hence the tolerance.
pub const G_REFERENCE: [(usize, f64); 7] = [
    (2, 6.600),
    (3, 5.914),
    (4, 6.066),
    (5, 5.814),
    (6, 5.830),
    (7, 5.726),
    (8, 5.710),
];
pub const G_TOLERANCE: f64 = 0.005;

pub const ENTROPY_REFERENCE: &str = "-0.600";

#[derive(Debug, Clone, PartialEq)]
pub struct GoldenRow {
    pub name: String,
    pub value: f64,
    pub reference: String,
    pub pass: bool,
}

impl std::fmt::Display for GoldenRow {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        write!(f, "{verdict} {:<28} {:>10.6}  ref {}", self.name, self.value, self.reference)
    }
}

fn three_dp(name: String, value: f64, reference: &str) -> GoldenRow {
    GoldenRow {
        pass: format!("{value:.3}") == reference,
        name,
        value,
        reference: reference.to_string(),
    }
}

pub fn run_golden(e: &EnsembleSpec, seed: u64) -> Result<Vec<GoldenRow>, CliError> {
    let s = Settings {
        mode: Mode::Exact,
        strategy: Strategy::Enumerate,
        shots: 1,
        trials: 1,
        epsilon: qtrace_core::gst::DEFAULT_EPSILON,
        theta: qtrace_core::gst::DEFAULT_THETA,
        seed,
        cap: qtrace_core::ht::DEFAULT_ENUMERATION_CAP,
        ht_sigma: 0.0,
        gst_sigma: 0.0,
        timing: false,
    };
    let mut rows = Vec::new();
    for (m, reference) in POWER_REFERENCE {
        let oracle = qtrace_core::ensemble::exact_power_trace(e, m as u32)?;
        rows.push(three_dp(format!("tr_rho_pow[{m}] oracle"), oracle, reference));
        rows.push(three_dp(format!("tr_rho_pow[{m}] ht"), ht_power(e, m, &s)?.value, reference));
        rows.push(three_dp(format!("tr_rho_pow[{m}] gst"), gst_power(e, m, &s)?.value, reference));
    }
    for (k, reference) in G_REFERENCE {
        let v = exact_g_power_trace(e, k as u32)?;
        rows.push(GoldenRow {
            name: format!("tr_g_pow[{k}] oracle"),
            value: v,
            reference: format!("{reference:.3} ± {G_TOLERANCE}"),
            pass: (v - reference).abs() <= G_TOLERANCE,
        });
    }
    rows.push(three_dp("tr_rho_ln_rho oracle".into(), exact_entropy_trace(e)?, ENTROPY_REFERENCE));
    Ok(rows)
}
