//! Run reports, printed as text or JSON with the same numbers.

use std::fmt::Write as _;
use std::time::Duration;

use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiele_core::Residual;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ReportFormat {
    Text,
    Json,
}

#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default)]
pub struct RunReport {
    pub command: String,
    pub inputs: Vec<(String, String)>,
    pub backend: Option<String>,
    pub arg_kind: Option<String>,
    pub residuals: Vec<Residual>,
    pub continual: Vec<(f64, Residual)>,
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
    pub elapsed: Duration,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

fn residual_json(r: &Residual) -> Value {
    match &r.error {
        None => json!({ "value": r.value }),
        Some(e) => json!({ "value": null, "error": e.to_string() }),
    }
}

/// Shortest round-trip digits, in exponent form unless zero.
pub fn num(x: f64) -> String {
    if x == 0.0 {
        "0".to_owned()
    } else {
        format!("{x:e}")
    }
}

fn residual_text(r: &Residual) -> String {
    match &r.error {
        None => num(r.value),
        Some(e) => format!("failed ({e})"),
    }
}

impl RunReport {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_owned(),
            ..Self::default()
        }
    }

    pub fn add_input(&mut self, path: &str, bytes: &[u8]) {
        self.inputs.push((path.to_owned(), sha256_hex(bytes)));
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn max_residual(&self) -> Option<f64> {
        self.residuals.iter().map(|r| r.value).reduce(f64::max)
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "command": self.command,
            "inputs": self.inputs.iter().map(|(p, d)| json!({ "path": p, "sha256": d })).collect::<Vec<_>>(),
            "backend": self.backend,
            "arg_kind": self.arg_kind,
            "residuals": self.residuals.iter().enumerate().map(|(i, r)| {
                let mut o = residual_json(r);
                o["node"] = json!(i);
                o
            }).collect::<Vec<_>>(),
            "warnings": self.warnings,
            "elapsed_ms": self.elapsed.as_secs_f64() * 1e3,
        });
        if !self.continual.is_empty() {
            v["continual"] = self
                .continual
                .iter()
                .map(|(xi, r)| {
                    let mut o = residual_json(r);
                    o["xi"] = json!(xi);
                    o
                })
                .collect();
        }
        if !self.checks.is_empty() {
            v["checks"] = self
                .checks
                .iter()
                .map(|c| json!({ "name": c.name, "passed": c.passed, "detail": c.detail }))
                .collect();
            v["status"] = json!(if self.passed() { "pass" } else { "fail" });
        }
        v
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "command: {}", self.command);
        for (path, digest) in &self.inputs {
            let _ = writeln!(out, "input: {path} sha256 {digest}");
        }
        if let Some(b) = &self.backend {
            let _ = writeln!(out, "backend: {b}");
        }
        if let Some(k) = &self.arg_kind {
            let _ = writeln!(out, "arg_kind: {k}");
        }
        for (i, r) in self.residuals.iter().enumerate() {
            let _ = writeln!(out, "residual node {i}: {}", residual_text(r));
        }
        for (xi, r) in &self.continual {
            let _ = writeln!(out, "continual xi {xi}: {}", residual_text(r));
        }
        for c in &self.checks {
            let status = if c.passed { "PASS" } else { "FAIL" };
            let _ = writeln!(out, "{status} {}: {}", c.name, c.detail);
        }
        for w in &self.warnings {
            let _ = writeln!(out, "warning: {w}");
        }
        let _ = writeln!(out, "elapsed_ms: {}", self.elapsed.as_secs_f64() * 1e3);
        if !self.checks.is_empty() {
            let _ = writeln!(out, "status: {}", if self.passed() { "pass" } else { "fail" });
        }
        out
    }

    pub fn render(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Text => self.to_text(),
            ReportFormat::Json => {
                let mut s = serde_json::to_string_pretty(&self.to_json()).expect("report serializes");
                s.push('\n');
                s
            }
        }
    }
}
