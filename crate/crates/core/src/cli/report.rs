//! The JSON report every command emits, and its one-screen text summary.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

use super::config::SystemEcho;
use crate::expr::{Certificate, EvalPoint, Verdict};

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: Value,
}

#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    pub check: String,
    pub point: EvalPoint,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub system: SystemEcho,
    pub inputs: BTreeMap<String, String>,
    pub seed: u64,
    pub passed: bool,
    pub verdicts: Vec<Check>,
    pub expressions: BTreeMap<String, String>,
    pub diagnostics: BTreeMap<String, f64>,
    pub witnesses: Vec<Witness>,
    pub flags: Vec<String>,
    pub notes: Vec<String>,
}

fn detail<T: Serialize>(t: &T) -> Value {
    serde_json::to_value(t).unwrap_or(Value::Null)
}

impl Report {
    pub fn new(command: &str, system: SystemEcho, inputs: BTreeMap<String, String>, seed: u64) -> Report {
        Report {
            command: command.to_string(),
            system,
            inputs,
            seed,
            passed: true,
            verdicts: Vec::new(),
            expressions: BTreeMap::new(),
            diagnostics: BTreeMap::new(),
            witnesses: Vec::new(),
            flags: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn check(&mut self, name: &str, passed: bool, detail: Value) {
        self.passed &= passed;
        self.verdicts.push(Check { name: name.to_string(), passed, detail });
    }

    pub fn verdict(&mut self, name: &str, v: &Verdict) {
        if let Verdict::NonZero { witness, .. } = v {
            self.witnesses.push(Witness { check: name.to_string(), point: witness.clone() });
        }
        self.check(name, v.is_zero(), detail(v));
    }

    pub fn certificate(&mut self, name: &str, c: &Certificate) {
        match c {
            Certificate::Vanishes { witness } | Certificate::Singular { witness, .. } => {
                self.witnesses.push(Witness { check: name.to_string(), point: witness.clone() })
            }
            Certificate::SignChange { positive, negative } => {
                self.witnesses.push(Witness { check: format!("{name} (+)"), point: positive.clone() });
                self.witnesses.push(Witness { check: format!("{name} (-)"), point: negative.clone() });
            }
            Certificate::NonVanishing { .. } => {}
        }
        self.check(name, c.holds(), detail(c));
    }

    /// Records a library error as a failed check.
    pub fn error(&mut self, name: &str, e: &dyn std::fmt::Display) {
        self.check(name, false, Value::String(e.to_string()));
    }

    pub fn expression(&mut self, name: &str, e: impl ToString) {
        self.expressions.insert(name.to_string(), e.to_string());
    }

    pub fn diagnostic(&mut self, name: &str, x: f64) {
        self.diagnostics.insert(name.to_string(), x);
    }

    pub fn flag(&mut self, f: impl Into<String>) {
        self.flags.push(f.into());
    }

    pub fn note(&mut self, n: impl Into<String>) {
        self.notes.push(n.into());
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            1
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let status = if self.passed { "PASS" } else { "FAIL" };
        let _ = writeln!(s, "{} on {} [{status}]", self.command, self.system.name);
        for c in &self.verdicts {
            let _ = writeln!(s, "  {} {}", if c.passed { "ok  " } else { "FAIL" }, c.name);
        }
        for (k, v) in &self.expressions {
            let _ = writeln!(s, "  {k} = {v}");
        }
        for (k, v) in &self.diagnostics {
            let _ = writeln!(s, "  {k}: {v:e}");
        }
        for f in &self.flags {
            let _ = writeln!(s, "  flag: {f}");
        }
        for n in &self.notes {
            let _ = writeln!(s, "  note: {n}");
        }
        s
    }
}
