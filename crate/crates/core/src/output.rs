//! Result files: JSON with 17 significant digits and the trajectory CSV.
//! Every file carries the tool version and the config hash.

use crate::dynamics::TrajectoryRecord;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::fmt::Write as _;
use std::path::Path;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Wrapper written around every JSON result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub kind: String,
    pub tool_version: String,
    pub config_hash: String,
    pub result: T,
}

impl<T> Envelope<T> {
    pub fn new(kind: &str, config_hash: &str, result: T) -> Self {
        Envelope { kind: kind.into(), tool_version: TOOL_VERSION.into(), config_hash: config_hash.into(), result }
    }
}

/// Float with 17 significant digits; NaN and infinities as JSON null.
pub fn fmt_f64(v: f64) -> String {
    if v == 0.0 {
        "0.0".into()
    } else {
        format!("{v:.16e}")
    }
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    let pad = "  ".repeat(indent + 1);
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                out.push_str(&fmt_f64(n.as_f64().expect("float")));
            } else {
                out.push_str(&n.to_string());
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(a) if a.is_empty() => out.push_str("[]"),
        Value::Array(a) => {
            out.push_str("[\n");
            for (i, x) in a.iter().enumerate() {
                out.push_str(&pad);
                write_value(out, x, indent + 1);
                out.push_str(if i + 1 < a.len() { ",\n" } else { "\n" });
            }
            out.push_str(&"  ".repeat(indent));
            out.push(']');
        }
        Value::Object(o) if o.is_empty() => out.push_str("{}"),
        Value::Object(o) => {
            out.push_str("{\n");
            for (i, (k, x)) in o.iter().enumerate() {
                let _ = write!(out, "{pad}{}: ", Value::String(k.clone()));
                write_value(out, x, indent + 1);
                out.push_str(if i + 1 < o.len() { ",\n" } else { "\n" });
            }
            out.push_str(&"  ".repeat(indent));
            out.push('}');
        }
    }
}

/// Pretty JSON text with every float at 17 significant digits.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value).map_err(|e| Error::Io(e.to_string()))?;
    let mut s = String::new();
    write_value(&mut s, &v, 0);
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, kind: &str, config_hash: &str, result: &T) -> Result<()> {
    std::fs::write(path, to_json(&Envelope::new(kind, config_hash, result))?)?;
    Ok(())
}

/// Trajectory CSV: a `#` line with version and config hash, then the header
/// `t,X_1..X_d,P_1..P_d,Pdot_1..Pdot_d,H,reBetaL2,gradImBetaL2,solitonGap`.
pub fn trajectory_csv(rec: &TrajectoryRecord, config_hash: &str) -> String {
    let d = rec.dim;
    let mut s = format!("# bosegas {TOOL_VERSION} config_hash={config_hash}\nt");
    for name in ["X", "P", "Pdot"] {
        for j in 1..=d {
            let _ = write!(s, ",{name}_{j}");
        }
    }
    s.push_str(",H,reBetaL2,gradImBetaL2,solitonGap\n");
    for r in &rec.rows {
        let cells: Vec<String> = std::iter::once(r.t)
            .chain(r.x.iter().copied())
            .chain(r.p.iter().copied())
            .chain(r.pdot.iter().copied())
            .chain([r.hamiltonian, r.re_beta_l2, r.grad_im_beta_l2, r.soliton_gap])
            .map(|v| if v.is_nan() { "NaN".into() } else { fmt_f64(v) })
            .collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_through_seventeen_digits() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
    }

    #[test]
    fn json_is_valid_and_exact() {
        #[derive(Serialize, Deserialize, PartialEq, Debug)]
        struct T {
            a: f64,
            b: Vec<f64>,
            c: Option<f64>,
            n: usize,
        }
        let t = T { a: 0.1 + 0.2, b: vec![1e-17, -3.0], c: None, n: 7 };
        let s = to_json(&t).unwrap();
        let back: T = serde_json::from_str(&s).unwrap();
        assert_eq!(back, t);
        assert!(s.contains("3.0000000000000004e-1"));
    }

    #[test]
    fn nan_becomes_null() {
        let s = to_json(&vec![f64::NAN]).unwrap();
        assert!(s.contains("null"));
    }
}
