//! Result rows and their CSV / JSON encodings.

use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::Number;

use crate::error::CliError;

pub const COLUMNS: [&str; 11] = [
    "quantity",
    "order",
    "estimate",
    "std_error",
    "exact_value",
    "rel_error",
    "mode",
    "shots",
    "trials",
    "seed",
    "wall_ms",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub quantity: String,
    pub order: u64,
    pub estimate: f64,
    pub std_error: f64,
    pub exact_value: Option<f64>,
    pub rel_error: Option<f64>,
    pub mode: String,
    pub shots: u64,
    pub trials: u64,
    pub seed: u64,
    pub wall_ms: u64,
}

impl ResultRow {
    /// Fills `exact_value` and `rel_error = |estimate − exact| / |exact|`.
    pub fn with_exact(mut self, exact: Option<f64>) -> Self {
        self.exact_value = exact;
        self.rel_error = exact.filter(|x| *x != 0.0).map(|x| ((self.estimate - x) / x).abs());
        self
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

fn number(x: f64) -> Option<Number> {
    if x.is_finite() {
        Some(format_float(x).parse().expect("formatted float is a JSON number"))
    } else {
        None
    }
}

#[derive(Serialize, Deserialize)]
struct JsonRow {
    quantity: String,
    order: u64,
    estimate: Option<Number>,
    std_error: Option<Number>,
    exact_value: Option<Number>,
    rel_error: Option<Number>,
    mode: String,
    shots: u64,
    trials: u64,
    seed: u64,
    wall_ms: u64,
}

fn to_f64(n: &Option<Number>) -> Result<Option<f64>, String> {
    n.as_ref()
        .map(|n| n.to_string().parse::<f64>().map_err(|e| e.to_string()))
        .transpose()
}

pub fn to_csv(rows: &[ResultRow]) -> String {
    let mut out = COLUMNS.join(",");
    out.push('\n');
    let opt = |x: Option<f64>| x.map(format_float).unwrap_or_default();
    for r in rows {
        let fields = [
            r.quantity.clone(),
            r.order.to_string(),
            format_float(r.estimate),
            format_float(r.std_error),
            opt(r.exact_value),
            opt(r.rel_error),
            r.mode.clone(),
            r.shots.to_string(),
            r.trials.to_string(),
            r.seed.to_string(),
            r.wall_ms.to_string(),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn to_json(rows: &[ResultRow]) -> String {
    let rows: Vec<JsonRow> = rows
        .iter()
        .map(|r| JsonRow {
            quantity: r.quantity.clone(),
            order: r.order,
            estimate: number(r.estimate),
            std_error: number(r.std_error),
            exact_value: r.exact_value.and_then(number),
            rel_error: r.rel_error.and_then(number),
            mode: r.mode.clone(),
            shots: r.shots,
            trials: r.trials,
            seed: r.seed,
            wall_ms: r.wall_ms,
        })
        .collect();
    let mut s = serde_json::to_string_pretty(&rows).expect("rows serialize");
    s.push('\n');
    s
}

pub fn from_json(text: &str) -> Result<Vec<ResultRow>, String> {
    let rows: Vec<JsonRow> = serde_json::from_str(text).map_err(|e| e.to_string())?;
    rows.into_iter()
        .map(|r| {
            Ok(ResultRow {
                quantity: r.quantity,
                order: r.order,
                estimate: to_f64(&r.estimate)?.unwrap_or(f64::NAN),
                std_error: to_f64(&r.std_error)?.unwrap_or(f64::NAN),
                exact_value: to_f64(&r.exact_value)?,
                rel_error: to_f64(&r.rel_error)?,
                mode: r.mode,
                shots: r.shots,
                trials: r.trials,
                seed: r.seed,
                wall_ms: r.wall_ms,
            })
        })
        .collect()
}

/// Writes `content` to `path`, or to stdout when `path` is `None`.
pub fn write_output(path: Option<&str>, content: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, content).map_err(|e| CliError::Output {
            path: p.to_string(),
            message: e.to_string(),
        }),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(content.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::Output {
                    path: "<stdout>".into(),
                    message: e.to_string(),
                })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(estimate: f64) -> ResultRow {
        ResultRow {
            quantity: "tr_rho_pow".into(),
            order: 2,
            estimate,
            std_error: 0.0,
            exact_value: None,
            rel_error: None,
            mode: "oracle".into(),
            shots: 0,
            trials: 0,
            seed: 7,
            wall_ms: 0,
        }
        .with_exact(Some(0.65))
    }

    #[test]
    fn empty_csv_is_header_only() {
        assert_eq!(
            to_csv(&[]),
            "quantity,order,estimate,std_error,exact_value,rel_error,mode,shots,trials,seed,wall_ms\n"
        );
    }

    #[test]
    fn floats_have_seventeen_digits() {
        assert_eq!(format_float(0.1), "1.0000000000000001e-1");
        assert_eq!(format_float(-0.59986), "-5.9985999999999995e-1");
        let csv = to_csv(&[row(0.649_9)]);
        assert!(csv.lines().nth(1).unwrap().starts_with("tr_rho_pow,2,6.4990000000000003e-1,0.0000000000000000e0,"));
    }

    #[test]
    fn json_round_trip_is_exact() {
        let rows = vec![row(0.649_895_123_456_789_1), row(1.0 / 3.0), row(-2.5e-300)];
        let back = from_json(&to_json(&rows)).unwrap();
        assert_eq!(back, rows);
        assert!(to_json(&rows).contains("\"estimate\": 3.3333333333333331e-1"));
    }

    #[test]
    fn rel_error_skips_zero_reference() {
        let r = row(1.0).with_exact(Some(0.0));
        assert_eq!(r.rel_error, None);
        assert_eq!(r.exact_value, Some(0.0));
    }
}
