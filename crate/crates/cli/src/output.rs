//! Serialization with a fixed float format: 17 significant digits.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde_json::{Number, Value};

pub fn float(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        let s = format!("{v:.16e}");
        match s.split_once('e') {
            Some((m, e)) if !e.starts_with('-') => format!("{m}e+{e}"),
            _ => s,
        }
    }
}

pub fn opt_float(v: Option<f64>) -> String {
    v.map(float).unwrap_or_default()
}

/// Rewrites every non-integer number in `v` with [`float`]; non-finite
/// values become `null`.
pub fn canonical(v: Value) -> Value {
    match v {
        Value::Number(n) => {
            if n.is_i64() || n.is_u64() {
                Value::Number(n)
            } else {
                match n.as_f64() {
                    Some(f) if f.is_finite() => {
                        Value::Number(float(f).parse::<Number>().expect("formatted float parses"))
                    }
                    _ => Value::Null,
                }
            }
        }
        Value::Array(a) => Value::Array(a.into_iter().map(canonical).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, canonical(v))).collect()),
        other => other,
    }
}

/// A JSON value as pretty text with canonical floats and a trailing newline.
pub fn json_text(v: Value) -> String {
    let mut s = serde_json::to_string_pretty(&canonical(v)).expect("serializable");
    s.push('\n');
    s
}

/// Writes to `path` or stdout.
pub fn sink(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn floats_round_trip() {
        for v in [1.0, 0.1, -2.5e-300, std::f64::consts::PI, 1e22] {
            let s = float(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
        }
        assert_eq!(float(1.0), "1.0000000000000000e+0");
        assert_eq!(float(-0.25), "-2.5000000000000000e-1");
    }

    #[test]
    fn canonical_keeps_integers_and_nulls_nan() {
        let v = canonical(json!({"a": 3, "b": 0.5, "c": [1.5, -7]}));
        assert_eq!(v["a"], json!(3));
        assert_eq!(v["b"].to_string(), "5.0000000000000000e-1");
        assert_eq!(v["c"][0].to_string(), float(1.5));
        assert_eq!(v["c"][1], json!(-7));
        let nan = serde_json::to_value(f64::NAN).unwrap();
        assert_eq!(canonical(nan), Value::Null);
    }
}
