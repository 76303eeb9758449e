//! JSON encodings shared by the commands. Keys are sorted (the default
//! `serde_json` map), rationals carry a reduced fraction and a 17 digit
//! decimal, floats use the shortest round-trip representation.

use serde_json::{json, Map, Value};

use crate::exactpoly::rational::format_decimal;
use crate::exactpoly::{Poly, Rational, RootBracket};
use crate::loewner::LoewnerWitness;
use crate::numfalsify::{PairCheck, PairWitness, SymMatrixF};
use crate::psdcert::{PsdVerdict, PsdWitness, SymMatrix};

pub const SCHEMA_VERSION: &str = "1";
pub const DECIMAL_DIGITS: usize = 17;

pub fn rational(r: &Rational) -> Value {
    json!({
        "num": r.numer().to_string(),
        "den": r.denom().to_string(),
        "dec": format_decimal(r, DECIMAL_DIGITS),
    })
}

pub fn rationals(rs: &[Rational]) -> Value {
    Value::Array(rs.iter().map(rational).collect())
}

/// Finite floats as numbers, infinities as `"inf"` / `"-inf"`, NaN as `"nan"`.
pub fn float(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        json!("nan")
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

pub fn floats(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|x| float(*x)).collect())
}

pub fn poly(p: &Poly) -> Value {
    json!({ "coeffs": rationals(p.coeffs()), "text": p.to_string() })
}

pub fn rational_matrix(m: &SymMatrix<Rational>) -> Value {
    Value::Array(m.rows().iter().map(|r| rationals(r)).collect())
}

pub fn poly_matrix(m: &SymMatrix<Poly>) -> Value {
    Value::Array(
        m.rows()
            .iter()
            .map(|r| Value::Array(r.iter().map(|p| json!(p.to_string())).collect()))
            .collect(),
    )
}

/// Row-major entries of a float matrix.
pub fn float_matrix(m: &SymMatrixF) -> Value {
    json!({ "order": m.order(), "row_major": floats(m.row_major()) })
}

pub fn bracket(b: &RootBracket) -> Value {
    json!({ "lo": rational(&b.lo), "hi": rational(&b.hi), "sign_change": b.sign_change })
}

pub fn psd_witness(w: &PsdWitness) -> Value {
    match w {
        PsdWitness::PrincipalMinor { indices, det } => {
            json!({ "kind": "principal_minor", "indices": indices, "det": rational(det) })
        }
        PsdWitness::Vector { v, value } => {
            json!({ "kind": "vector", "v": rationals(v), "value": rational(value) })
        }
    }
}

pub fn verdict(v: &PsdVerdict) -> Value {
    json!({
        "verdict": v.kind.name(),
        "witness": v.witness.as_ref().map_or(Value::Null, psd_witness),
        "leading_minors": rationals(&v.leading_minors),
    })
}

pub fn loewner_witness(w: &LoewnerWitness) -> Value {
    json!({
        "function": w.function.to_string(),
        "nodes": rationals(&w.nodes),
        "verdict": verdict(&w.verdict),
        "determinant": rational(w.determinant()),
        "direction": w.direction.as_ref().map_or(Value::Null, psd_witness),
    })
}

pub fn pair_check(c: &PairCheck) -> Value {
    json!({
        "min_eig_order": float(c.min_eig_order),
        "min_eig_gap": float(c.min_eig_gap),
        "norm_fy": float(c.norm_fy),
        "spectra_inside": c.spectra_inside,
        "violation": c.is_violation(),
    })
}

pub fn pair_witness(w: &PairWitness) -> Value {
    json!({
        "x": float_matrix(&w.x),
        "y": float_matrix(&w.y),
        "function": w.function.to_string(),
        "interval": w.interval.to_string(),
        "min_eig_order": float(w.min_eig_order),
        "min_eig_gap": float(w.min_eig_gap),
        "norm_fy": float(w.norm_fy),
        "spectra_x": floats(&w.spectra_x),
        "spectra_y": floats(&w.spectra_y),
        "seed": w.seed,
        "trial_index": w.trial_index,
    })
}

/// Envelope shared by every command.
pub fn envelope(command: &str, inputs: Value, result: Value, seed: Option<u64>) -> Value {
    let mut m = Map::new();
    m.insert("schema_version".into(), json!(SCHEMA_VERSION));
    m.insert("command".into(), json!(command));
    m.insert("inputs".into(), inputs);
    m.insert("result".into(), result);
    if let Some(s) = seed {
        m.insert("seed".into(), json!(s));
        m.insert("generator".into(), json!(crate::numfalsify::GENERATOR));
    }
    Value::Object(m)
}

/// `path = value` lines for every leaf, in key order.
pub fn to_text(v: &Value) -> String {
    fn walk(v: &Value, path: &str, out: &mut Vec<String>) {
        match v {
            Value::Object(m) if is_rational(m) => {
                let (num, den) = (str_of(&m["num"]), str_of(&m["den"]));
                let frac = if den == "1" {
                    num
                } else {
                    format!("{num}/{den}")
                };
                out.push(format!("{path} = {frac} ({})", str_of(&m["dec"])))
            }
            Value::Object(m) => {
                for (k, x) in m {
                    walk(
                        x,
                        &if path.is_empty() {
                            k.clone()
                        } else {
                            format!("{path}.{k}")
                        },
                        out,
                    );
                }
            }
            Value::Array(a) if a.iter().all(|x| !x.is_object() && !x.is_array()) => {
                let items: Vec<String> = a.iter().map(scalar).collect();
                out.push(format!("{path} = [{}]", items.join(", ")));
            }
            Value::Array(a) => {
                for (i, x) in a.iter().enumerate() {
                    walk(x, &format!("{path}[{i}]"), out);
                }
            }
            other => out.push(format!("{path} = {}", scalar(other))),
        }
    }
    fn is_rational(m: &Map<String, Value>) -> bool {
        m.len() == 3 && m.contains_key("num") && m.contains_key("den") && m.contains_key("dec")
    }
    fn str_of(v: &Value) -> String {
        v.as_str().map_or_else(|| v.to_string(), str::to_string)
    }
    fn scalar(v: &Value) -> String {
        str_of(v)
    }
    let mut out = Vec::new();
    walk(v, "", &mut out);
    out.join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactpoly::rational::rat;

    #[test]
    fn rational_encoding() {
        let v = rational(&rat(-1, 27));
        assert_eq!(
            v.to_string(),
            r#"{"dec":"-0.037037037037037037","den":"27","num":"-1"}"#
        );
        assert_eq!(float(f64::INFINITY), json!("inf"));
    }

    #[test]
    fn text_rendering() {
        let v = json!({"a": {"b": 1, "r": rational(&rat(1, 2))}, "l": [1, 2], "z": rational(&rat(3, 1))});
        assert_eq!(
            to_text(&v),
            "a.b = 1\na.r = 1/2 (0.50000000000000000)\nl = [1, 2]\nz = 3 (3.0000000000000000)"
        );
    }
}
