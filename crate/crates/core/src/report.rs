//! Report plumbing: extended reals in serialized output, a diff-stable JSON
//! writer (17 significant digits) and a flattened CSV encoding.

use std::fmt;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;

use crate::error::Result;

/// A real number that may be ±∞. Finite values serialize as JSON numbers,
/// infinities as the strings `"inf"` / `"-inf"`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Extended(pub f64);

impl Extended {
    pub const INFINITY: Extended = Extended(f64::INFINITY);

    pub fn value(self) -> f64 {
        self.0
    }
}

impl From<f64> for Extended {
    fn from(v: f64) -> Self {
        Extended(v)
    }
}

impl Serialize for Extended {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let v = self.0;
        if v.is_finite() {
            s.serialize_f64(v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }
}

impl<'de> Deserialize<'de> for Extended {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Extended;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or one of \"inf\", \"-inf\", \"nan\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Extended, E> {
                Ok(Extended(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Extended, E> {
                Ok(Extended(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Extended, E> {
                Ok(Extended(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Extended, E> {
                match v {
                    "inf" | "+inf" | "infinity" => Ok(Extended(f64::INFINITY)),
                    "-inf" | "-infinity" => Ok(Extended(f64::NEG_INFINITY)),
                    "nan" => Ok(Extended(f64::NAN)),
                    other => Err(E::custom(format!("not an extended real: {other:?}"))),
                }
            }
        }
        d.deserialize_any(V)
    }
}

/// Formats a float like C's `%.17g`.
pub fn format_g17(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    if x == 0.0 {
        return if x.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if (-5..17).contains(&exp) {
        trim(&format!("{:.*}", (16 - exp) as usize, x))
    } else {
        format!(
            "{}e{}{:02}",
            trim(mantissa),
            if exp < 0 { '-' } else { '+' },
            exp.abs()
        )
    }
}

/// Pretty JSON with every float printed at 17 significant digits.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value)?;
    let mut out = String::new();
    write_value(&v, 0, &mut out);
    out.push('\n');
    Ok(out)
}

fn write_value(v: &Value, indent: usize, out: &mut String) {
    let pad = |n: usize| "  ".repeat(n);
    match v {
        Value::Null | Value::Bool(_) | Value::String(_) => out.push_str(&v.to_string()),
        Value::Number(n) => {
            if n.is_f64() {
                out.push_str(&format_g17(n.as_f64().expect("f64 number")));
            } else {
                out.push_str(&n.to_string());
            }
        }
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                write_value(item, indent + 1, out);
                if i + 1 < items.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push_str("{\n");
            for (i, (k, item)) in map.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                out.push_str(&Value::String(k.clone()).to_string());
                out.push_str(": ");
                write_value(item, indent + 1, out);
                if i + 1 < map.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
    }
}

/// Flattens a JSON tree into (dotted path, scalar text) pairs; array
/// elements are addressed by index.
pub fn flatten(value: &Value) -> Vec<(String, String)> {
    let mut rows = Vec::new();
    flatten_into(value, String::new(), &mut rows);
    rows
}

fn flatten_into(v: &Value, path: String, rows: &mut Vec<(String, String)>) {
    let join = |k: &str| {
        if path.is_empty() {
            k.to_string()
        } else {
            format!("{path}.{k}")
        }
    };
    match v {
        Value::Object(map) => {
            for (k, item) in map {
                flatten_into(item, join(k), rows);
            }
        }
        Value::Array(items) => {
            for (i, item) in items.iter().enumerate() {
                flatten_into(item, join(&i.to_string()), rows);
            }
        }
        Value::Null => rows.push((path, String::new())),
        Value::Bool(b) => rows.push((path, b.to_string())),
        Value::String(s) => rows.push((path, s.clone())),
        Value::Number(n) => rows.push((
            path,
            if n.is_f64() {
                format_g17(n.as_f64().expect("f64 number"))
            } else {
                n.to_string()
            },
        )),
    }
}

/// Two-column CSV (`field,value`) of the flattened report.
pub fn to_csv_string<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["field", "value"])?;
    for (k, val) in flatten(&v) {
        w.write_record([k, val])?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| crate::FinslerError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv writer emits utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g17_matches_printf_style() {
        assert_eq!(format_g17(0.1), "0.10000000000000001");
        assert_eq!(format_g17(2.0), "2");
        assert_eq!(format_g17(1e-7), "9.9999999999999995e-08");
        assert_eq!(format_g17(123456.5), "123456.5");
        assert_eq!(format_g17(1e20), "1e+20");
        for x in [std::f64::consts::PI, -1.0 / 3.0, 6.02e23, 1e-300] {
            assert_eq!(format_g17(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn extended_round_trip() {
        let v = vec![
            Extended(1.5),
            Extended::INFINITY,
            Extended(f64::NEG_INFINITY),
        ];
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(s, r#"[1.5,"inf","-inf"]"#);
        let back: Vec<Extended> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, v);
    }

    #[test]
    fn csv_rows_follow_json_leaves() {
        let v = serde_json::json!({"a": {"b": [1, 2.5]}, "c": "x"});
        let csv = to_csv_string(&v).unwrap();
        assert_eq!(csv, "field,value\na.b.0,1\na.b.1,2.5\nc,x\n");
    }
}
