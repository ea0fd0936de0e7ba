//! Flat `key = value` experiment configs.
//!
//! ```text
//! # comment                      (also allowed after a value)
//! experiment = discord-relativity
//! seed = 7
//! output_dir = "reports/run1"
//! theta = 0.7853981633974483     # real: has '.', 'e' or 'E'
//! count = 100                    # integer
//! coefficients = cm-relative     # text: bare word or "quoted"
//! sizes = [2, 4, 8]              # list of numbers
//! ```
//!
//! Keys are `[a-z][a-z0-9_]*` and may appear once. `experiment` and `seed`
//! are required (the seed may instead come from `--seed`).

use crate::error::{CliError, Result};
use std::collections::BTreeMap;
use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Real(f64),
    Integer(i64),
    Text(String),
    List(Vec<Value>),
}

impl Value {
    /// Canonical rendering, also valid JSON.
    pub fn render(&self) -> String {
        match self {
            Value::Real(x) => format!("{x:.16e}"),
            Value::Integer(i) => i.to_string(),
            Value::Text(s) => serde_json::to_string(s).expect("strings serialize"),
            Value::List(items) => {
                let mut out = String::from("[");
                for (i, v) in items.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    let _ = write!(out, "{}", v.render());
                }
                out.push(']');
                out
            }
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Value::Real(_) => "real",
            Value::Integer(_) => "integer",
            Value::Text(_) => "text",
            Value::List(_) => "list",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub seed: Option<u64>,
    pub output_dir: Option<String>,
    /// Everything except the three reserved keys.
    pub parameters: BTreeMap<String, Value>,
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut entries: BTreeMap<String, Value> = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| CliError::Config(format!("line {}: {msg}", lineno + 1));
        let (key, value) = line.split_once('=').ok_or_else(|| err("expected `key = value`".into()))?;
        let key = key.trim();
        if !valid_key(key) {
            return Err(err(format!("invalid key {key:?}")));
        }
        let value = parse_value(value.trim()).map_err(err)?;
        if entries.insert(key.to_string(), value).is_some() {
            return Err(err(format!("duplicate key {key:?}")));
        }
    }

    let experiment = match entries.remove("experiment") {
        Some(Value::Text(s)) => s,
        Some(v) => return Err(CliError::Config(format!("`experiment` must be text, got {}", v.kind()))),
        None => return Err(CliError::Config("missing required key `experiment`".into())),
    };
    let seed = match entries.remove("seed") {
        Some(Value::Integer(i)) if i >= 0 => Some(i as u64),
        Some(v) => return Err(CliError::Config(format!("`seed` must be a non-negative integer, got {}", v.render()))),
        None => None,
    };
    let output_dir = match entries.remove("output_dir") {
        Some(Value::Text(s)) => Some(s),
        Some(v) => return Err(CliError::Config(format!("`output_dir` must be text, got {}", v.kind()))),
        None => None,
    };
    Ok(ExperimentConfig { experiment, seed, output_dir, parameters: entries })
}

fn strip_comment(line: &str) -> &str {
    let mut quoted = false;
    let mut escaped = false;
    for (i, ch) in line.char_indices() {
        match ch {
            _ if escaped => escaped = false,
            '\\' if quoted => escaped = true,
            '"' => quoted = !quoted,
            '#' if !quoted => return &line[..i],
            _ => {}
        }
    }
    line
}

fn valid_key(key: &str) -> bool {
    let mut chars = key.chars();
    matches!(chars.next(), Some('a'..='z')) && chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

fn parse_value(s: &str) -> std::result::Result<Value, String> {
    if let Some(inner) = s.strip_prefix('[') {
        let inner = inner.strip_suffix(']').ok_or("unterminated list")?.trim();
        if inner.is_empty() {
            return Ok(Value::List(Vec::new()));
        }
        let items = inner
            .split(',')
            .map(|item| match parse_scalar(item.trim())? {
                v @ (Value::Real(_) | Value::Integer(_)) => Ok(v),
                _ => Err(format!("list items must be numbers, got {:?}", item.trim())),
            })
            .collect::<std::result::Result<Vec<_>, String>>()?;
        return Ok(Value::List(items));
    }
    parse_scalar(s)
}

fn parse_scalar(s: &str) -> std::result::Result<Value, String> {
    if s.is_empty() {
        return Err("missing value".into());
    }
    if let Some(body) = s.strip_prefix('"') {
        let body = body.strip_suffix('"').ok_or("unterminated string")?;
        let mut out = String::new();
        let mut chars = body.chars();
        while let Some(c) = chars.next() {
            match c {
                '\\' => match chars.next() {
                    Some(e @ ('"' | '\\')) => out.push(e),
                    other => return Err(format!("unsupported escape \\{}", other.map(String::from).unwrap_or_default())),
                },
                '"' => return Err("stray quote inside string".into()),
                _ => out.push(c),
            }
        }
        return Ok(Value::Text(out));
    }
    let first = s.chars().next().unwrap();
    if first.is_ascii_digit() || first == '-' || first == '+' || first == '.' {
        if s.contains(['.', 'e', 'E']) {
            let x: f64 = s.parse().map_err(|_| format!("bad real literal {s:?}"))?;
            if !x.is_finite() {
                return Err(format!("non-finite real {s:?}"));
            }
            return Ok(Value::Real(x));
        }
        return s.parse().map(Value::Integer).map_err(|_| format!("bad integer literal {s:?}"));
    }
    if first.is_ascii_alphabetic() && s.chars().all(|c| c.is_ascii_alphanumeric() || "-_./".contains(c)) {
        return Ok(Value::Text(s.to_string()));
    }
    Err(format!("unrecognised value {s:?}"))
}
