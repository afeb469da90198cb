use std::io::Write;
use std::path::Path;

use anyhow::Context;
use serde::Serialize;
use serde_json::{json, Value};

pub const SCHEMA: &str = "grl/1";

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub value: Option<f64>,
    pub bound: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Check {
    pub fn new(name: &str, pass: bool) -> Self {
        Self { name: name.into(), pass, value: None, bound: None, detail: None }
    }

    pub fn at_most(name: &str, value: f64, limit: f64) -> Self {
        Self { value: Some(value), bound: Some(format!("<= {limit:e}")), ..Self::new(name, value <= limit) }
    }

    pub fn above(name: &str, value: f64, limit: f64) -> Self {
        Self { value: Some(value), bound: Some(format!("> {limit:e}")), ..Self::new(name, value > limit) }
    }

    pub fn within(name: &str, value: f64, lo: f64, hi: f64) -> Self {
        Self {
            value: Some(value),
            bound: Some(format!("in [{lo}, {hi}]")),
            ..Self::new(name, (lo..=hi).contains(&value))
        }
    }

    /// Also require `cond`.
    pub fn then(mut self, cond: bool) -> Self {
        self.pass &= cond;
        self
    }

    pub fn detail(mut self, d: impl Into<String>) -> Self {
        self.detail = Some(d.into());
        self
    }
}

/// What a command hands back: its checks, a JSON result and optional CSV.
pub struct Report {
    pub command: String,
    pub checks: Vec<Check>,
    pub result: Value,
    pub csv: Option<String>,
}

impl Report {
    pub fn new(command: &str, result: Value) -> Self {
        Self { command: command.into(), checks: Vec::new(), result, csv: None }
    }

    pub fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn extend(&mut self, c: Option<Check>) {
        self.checks.extend(c);
    }

    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failed(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect()
    }

    pub fn to_json(&self, meta: Option<Value>) -> String {
        let mut doc = json!({
            "schema": SCHEMA,
            "command": self.command,
            "pass": self.pass(),
            "failed": self.failed(),
            "checks": self.checks,
            "result": self.result,
        });
        if let Some(m) = meta {
            doc["meta"] = m;
        }
        let mut s = serde_json::to_string_pretty(&doc).expect("report serialises");
        s.push('\n');
        s
    }

    /// Command-specific CSV, or the check table when the command has none.
    pub fn csv_text(&self) -> String {
        self.csv.clone().unwrap_or_else(|| {
            let mut out = String::from("name,pass,value\n");
            for c in &self.checks {
                let v = c.value.map(|v| format!("{v:?}")).unwrap_or_default();
                out.push_str(&format!("{},{},{v}\n", c.name, c.pass));
            }
            out
        })
    }
}

pub fn write_text(path: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

