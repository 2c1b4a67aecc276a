use crate::config::{Format, RunConfig};
use biocirc::verify;
use biocirc::C64;
use serde_json::{json, Value};
use std::fmt::Write;

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub quantity: String,
    pub n: Option<usize>,
    pub offset: i64,
    /// Coefficient index or z-list position.
    pub index: Option<i64>,
    pub value: Option<C64>,
    pub note: Option<String>,
}

impl Row {
    pub fn value(quantity: impl Into<String>, n: Option<usize>, offset: i64, index: Option<i64>, v: C64) -> Row {
        Row { quantity: quantity.into(), n, offset, index, value: Some(v), note: None }
    }

    pub fn from_result(quantity: impl Into<String>, n: Option<usize>, offset: i64, index: Option<i64>, v: biocirc::Result<C64>) -> Row {
        match v {
            Ok(v) => Row::value(quantity, n, offset, index, v),
            Err(e) => Row { quantity: quantity.into(), n, offset, index, value: None, note: Some(e.to_string()) },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Residual {
    pub name: String,
    pub n: Option<usize>,
    pub residual: Option<f64>,
    pub note: Option<String>,
}

impl Residual {
    pub fn new(name: impl Into<String>, n: Option<usize>, r: biocirc::Result<f64>) -> Residual {
        match r {
            Ok(v) => Residual { name: name.into(), n, residual: Some(v), note: None },
            Err(e) => Residual { name: name.into(), n, residual: None, note: Some(e.to_string()) },
        }
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub config: RunConfig,
    pub value: Option<C64>,
    pub rows: Vec<Row>,
    pub residuals: Vec<Residual>,
    pub verify: Option<verify::Report>,
}

impl Report {
    pub fn new(config: RunConfig) -> Report {
        Report { config, value: None, rows: Vec::new(), residuals: Vec::new(), verify: None }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => serde_json::to_string_pretty(&self.to_json()).expect("report serializes") + "\n",
            Format::Csv => self.to_csv(),
            Format::Text => self.to_text(),
        }
    }

    fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                json!({
                    "quantity": r.quantity,
                    "n": r.n,
                    "offset": r.offset,
                    "index": r.index,
                    "value": r.value.map(pair),
                    "note": r.note,
                })
            })
            .collect();
        let residuals: Vec<Value> = self
            .residuals
            .iter()
            .map(|r| json!({"name": r.name, "n": r.n, "residual": r.residual, "note": r.note}))
            .collect();
        let mut out = json!({
            "config": self.config,
            "rows": rows,
            "residuals": residuals,
        });
        if let Some(v) = self.value {
            out["value"] = json!(pair(v));
        }
        if let Some(v) = &self.verify {
            out["verify"] = serde_json::to_value(v).expect("verify report serializes");
            out["residuals"] = Value::Array(verify_table(v).into_iter().map(|t| json!(t)).collect());
        }
        out
    }

    fn to_csv(&self) -> String {
        let mut s = String::new();
        if let Some(v) = &self.verify {
            s.push_str("suite,check,n,offset,z_index,residual,tol,bound,outcome,note\n");
            for suite in &v.suites {
                for c in &suite.checks {
                    let _ = writeln!(
                        s,
                        "{},{},{},{},{},{},{},{:?},{:?},{}",
                        suite.suite,
                        csv_field(&c.name),
                        c.n,
                        c.offset,
                        c.z_index.map_or(String::new(), |z| z.to_string()),
                        c.residual.map_or(String::new(), num),
                        num(c.tol),
                        c.bound,
                        c.outcome,
                        csv_field(c.note.as_deref().unwrap_or("")),
                    );
                }
            }
            return s;
        }
        s.push_str("n,offset,quantity,index,re,im,note\n");
        for r in &self.rows {
            let (re, im) = r.value.map_or((String::new(), String::new()), |v| (num(v.re), num(v.im)));
            let _ = writeln!(
                s,
                "{},{},{},{},{re},{im},{}",
                r.n.map_or(String::new(), |n| n.to_string()),
                r.offset,
                csv_field(&r.quantity),
                r.index.map_or(String::new(), |i| i.to_string()),
                csv_field(r.note.as_deref().unwrap_or("")),
            );
        }
        for r in &self.residuals {
            let _ = writeln!(
                s,
                "{},{},{},,{},,{}",
                r.n.map_or(String::new(), |n| n.to_string()),
                self.config.offset,
                csv_field(&format!("residual:{}", r.name)),
                r.residual.map_or(String::new(), num),
                csv_field(r.note.as_deref().unwrap_or("")),
            );
        }
        s
    }

    fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{} weight={} kind={} offset={} n={}", self.config.command, self.config.weight, kind_name(&self.config), self.config.offset, self.config.n);
        if let Some(v) = &self.verify {
            for suite in &v.suites {
                let _ = writeln!(
                    s,
                    "[{}] {:?}: {} pass, {} fail, {} n/a, {} error, max residual {}",
                    suite.suite,
                    suite.status,
                    suite.passed,
                    suite.failed,
                    suite.not_applicable,
                    suite.errors,
                    num(suite.max_residual)
                );
                if let Some(m) = &suite.message {
                    let _ = writeln!(s, "  {m}");
                }
            }
            for t in verify_table(v) {
                let _ = writeln!(
                    s,
                    "  {:<14} {:<48} {:>24} vs {:<24} {}",
                    t.suite,
                    t.name,
                    t.max_residual.map_or("-".into(), num),
                    num(t.tol),
                    t.status
                );
            }
            return s;
        }
        if let Some(v) = self.value {
            let _ = writeln!(s, "value {} {}", num(v.re), num(v.im));
        }
        for r in &self.rows {
            let head = format!(
                "{}{}{}",
                r.quantity,
                r.n.map_or(String::new(), |n| format!(" n={n}")),
                r.index.map_or(String::new(), |i| format!(" [{i}]"))
            );
            match (r.value, &r.note) {
                (Some(v), _) => {
                    let _ = writeln!(s, "{head:<28} {:>25} {:>25}", num(v.re), num(v.im));
                }
                (None, Some(n)) => {
                    let _ = writeln!(s, "{head:<28} n/a: {n}");
                }
                _ => {}
            }
        }
        for r in &self.residuals {
            let head = format!("residual {}{}", r.name, r.n.map_or(String::new(), |n| format!(" n={n}")));
            match (r.residual, &r.note) {
                (Some(v), _) => {
                    let _ = writeln!(s, "{head:<40} {}", num(v));
                }
                (None, n) => {
                    let _ = writeln!(s, "{head:<40} n/a: {}", n.as_deref().unwrap_or(""));
                }
            }
        }
        s
    }
}

fn kind_name(c: &RunConfig) -> &'static str {
    match c.kind {
        crate::config::KindArg::TwoJK => "2jk",
        crate::config::KindArg::JTwoK => "j2k",
    }
}

fn pair(v: C64) -> [f64; 2] {
    [v.re, v.im]
}

/// 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Max residual per (suite, check name), in first-seen order.
#[derive(Debug, Clone, serde::Serialize)]
pub struct TableEntry {
    pub suite: String,
    pub name: String,
    pub max_residual: Option<f64>,
    pub tol: f64,
    pub status: String,
    pub checks: usize,
}

pub fn verify_table(v: &verify::Report) -> Vec<TableEntry> {
    let mut out: Vec<TableEntry> = Vec::new();
    for suite in &v.suites {
        let start = out.len();
        for c in &suite.checks {
            let idx = match out[start..].iter().position(|t| t.name == c.name) {
                Some(i) => start + i,
                None => {
                    out.push(TableEntry {
                        suite: suite.suite.to_string(),
                        name: c.name.clone(),
                        max_residual: None,
                        tol: c.tol,
                        status: "n/a".into(),
                        checks: 0,
                    });
                    out.len() - 1
                }
            };
            let t = &mut out[idx];
            t.checks += 1;
            if let Some(r) = c.residual {
                t.max_residual = Some(match (t.max_residual, c.bound) {
                    (None, _) => r,
                    (Some(m), verify::Bound::AtMost) => m.max(r),
                    (Some(m), verify::Bound::AtLeast) => m.min(r),
                });
            }
            let rank = |s: &str| match s {
                "error" => 3,
                "fail" => 2,
                "pass" => 1,
                _ => 0,
            };
            let this = match c.outcome {
                verify::Outcome::Pass => "pass",
                verify::Outcome::Fail => "fail",
                verify::Outcome::NotApplicable => "n/a",
                verify::Outcome::Error => "error",
            };
            if rank(this) > rank(&t.status) {
                t.status = this.into();
            }
        }
    }
    out
}
