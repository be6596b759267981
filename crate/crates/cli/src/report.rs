//! Versioned JSON reports.
//!
//! Keys of `inputs` and `outputs` serialize in sorted order, so identical
//! runs produce identical bytes. Non-finite numbers are written as the
//! strings `"inf"`, `"-inf"` and `"nan"`.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use tpmeasure::C64;

pub const SCHEMA: u32 = 1;

/// JSON value for a float; non-finite values become strings.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        Value::from(x)
    } else if x.is_nan() {
        Value::from("nan")
    } else if x > 0.0 {
        Value::from("inf")
    } else {
        Value::from("-inf")
    }
}

pub fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| num(x)).collect())
}

/// `[re, im]`.
pub fn complex(z: C64) -> Value {
    Value::Array(vec![num(z.re), num(z.im)])
}

pub fn complexes<'a>(zs: impl IntoIterator<Item = &'a C64>) -> Value {
    Value::Array(zs.into_iter().map(|&z| complex(z)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    /// `lhs ≤ rhs + tol`.
    Le,
    /// `lhs ≥ rhs − tol`.
    Ge,
    /// `|lhs − rhs| ≤ tol`.
    Eq,
    /// `lhs < rhs`.
    Lt,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub relation: Relation,
    pub lhs: Value,
    pub rhs: Value,
    pub tol: Value,
}

impl Assertion {
    pub fn new(name: impl Into<String>, lhs: f64, relation: Relation, rhs: f64, tol: f64) -> Self {
        let passed = match relation {
            Relation::Le => lhs <= rhs + tol,
            Relation::Ge => lhs >= rhs - tol,
            Relation::Eq => (lhs - rhs).abs() <= tol,
            Relation::Lt => lhs < rhs,
        };
        Self {
            name: name.into(),
            passed,
            relation,
            lhs: num(lhs),
            rhs: num(rhs),
            tol: num(tol),
        }
    }

    /// A boolean invariant, recorded as `1 = 1`.
    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Self::new(name, if ok { 1.0 } else { 0.0 }, Relation::Eq, 1.0, 0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    pub command: String,
    pub inputs: Map<String, Value>,
    pub outputs: Map<String, Value>,
    pub assertions: Vec<Assertion>,
    pub passed: bool,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Self {
            schema: SCHEMA,
            command: command.to_string(),
            inputs: Map::new(),
            outputs: Map::new(),
            assertions: Vec::new(),
            passed: true,
        }
    }

    pub fn input(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.inputs.insert(key.to_string(), value.into());
        self
    }

    pub fn output(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.outputs.insert(key.to_string(), value.into());
        self
    }

    pub fn number(&mut self, key: &str, x: f64) -> &mut Self {
        self.output(key, num(x))
    }

    pub fn assert(&mut self, assertion: Assertion) -> &mut Self {
        self.passed &= assertion.passed;
        self.assertions.push(assertion);
        self
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// `key,value` lines for every scalar in `outputs`; nested keys are
    /// joined with `.` and array positions appear as indices.
    pub fn to_csv(&self) -> String {
        let mut lines = vec!["key,value".to_string()];
        for (k, v) in &self.outputs {
            flatten(k, v, &mut lines);
        }
        let mut s = lines.join("\n");
        s.push('\n');
        s
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<String>) {
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                flatten(&format!("{prefix}.{k}"), x, out);
            }
        }
        Value::Array(xs) => {
            for (i, x) in xs.iter().enumerate() {
                flatten(&format!("{prefix}.{i}"), x, out);
            }
        }
        Value::String(s) => out.push(format!("{},{}", csv_field(prefix), csv_field(s))),
        other => out.push(format!("{},{}", csv_field(prefix), other)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_lossless() {
        let mut r = Report::new("demo");
        r.input("seed", 7u64)
            .number("third", 1.0 / 3.0)
            .number("big", f64::INFINITY)
            .output("list", nums(&[0.1, 2.0]));
        r.assert(Assertion::new("le", 1.0, Relation::Le, 1.0, 0.0));
        let back: Report = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.outputs["third"].as_f64().unwrap(), 1.0 / 3.0);
        assert_eq!(back.outputs["big"], Value::from("inf"));
    }

    #[test]
    fn keys_are_sorted_and_failures_propagate() {
        let mut r = Report::new("demo");
        r.number("zeta", 1.0).number("alpha", 2.0);
        let json = r.to_json();
        assert!(json.find("alpha").unwrap() < json.find("zeta").unwrap());
        assert!(r.passed);
        r.assert(Assertion::new("eq", 1.0, Relation::Eq, 1.1, 0.01));
        assert!(!r.passed);
        r.assert(Assertion::holds("ok", true));
        assert!(!r.passed);
    }

    #[test]
    fn relations() {
        assert!(Assertion::new("a", 1.0, Relation::Le, 0.5, 0.6).passed);
        assert!(!Assertion::new("a", 1.0, Relation::Le, 0.5, 0.4).passed);
        assert!(Assertion::new("a", 0.5, Relation::Ge, 1.0, 0.6).passed);
        assert!(!Assertion::new("a", 1.0, Relation::Lt, 1.0, 0.0).passed);
        assert!(!Assertion::holds("b", false).passed);
    }

    #[test]
    fn csv_flattens_outputs() {
        let mut r = Report::new("demo");
        r.output("table", serde_json::json!([{"p": 1.0, "ok": true}, {"p": 2.0, "ok": false}]))
            .output("name", "a,b");
        let csv = r.to_csv();
        assert_eq!(csv, "key,value\nname,\"a,b\"\ntable.0.ok,true\ntable.0.p,1.0\ntable.1.ok,false\ntable.1.p,2.0\n");
    }
}
