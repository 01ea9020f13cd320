//! Number formatting and CSV tables.

use freecomp::bounds::BoundValue;

/// C-style `%.{sig}g`: `sig` significant digits, trailing zeros removed,
/// scientific notation when the exponent is below −4 or at least `sig`.
pub fn fmt_g(x: f64, sig: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sig = sig.max(1);
    let sci = format!("{:.*e}", sig - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= sig as i32 {
        let mantissa = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (sig as i32 - 1 - exp).max(0) as usize;
        strip_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// `%.12g`, the precision used for every CSV cell.
pub fn g12(x: f64) -> String {
    fmt_g(x, 12)
}

pub fn bound_cell(v: BoundValue) -> String {
    match v {
        BoundValue::Finite(x) => g12(x),
        other => other.to_string(),
    }
}

/// Smallest integer count meeting a real-valued lower bound. Values within
/// 1e-9 (relative) above an integer are treated as that integer.
pub fn ceil_cell(v: BoundValue) -> String {
    match v {
        BoundValue::Finite(x) => {
            let n = (x - 1e-9 * x.abs().max(1.0)).ceil().max(0.0);
            format!("{n:.0}")
        }
        other => other.to_string(),
    }
}

/// A header row plus string cells, rendered with `\n` line endings.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    /// Rows as JSON objects keyed by header; numeric cells stay numbers.
    pub fn to_json(&self) -> String {
        let rows: Vec<serde_json::Map<String, serde_json::Value>> = self
            .rows
            .iter()
            .map(|row| {
                self.header
                    .iter()
                    .zip(row)
                    .map(|(k, v)| {
                        let value = match v.parse::<f64>() {
                            Ok(x) if x.is_finite() => serde_json::json!(x),
                            _ => serde_json::Value::String(v.clone()),
                        };
                        (k.clone(), value)
                    })
                    .collect()
            })
            .collect();
        serde_json::to_string_pretty(&rows).expect("table serializes") + "\n"
    }

    /// Numeric column by header name; non-numeric cells are skipped.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().filter_map(|r| r[idx].parse().ok()).collect())
    }
}
