//! Deterministic experiment reports.
//!
//! Every experiment in this crate produces an [`ExperimentReport`]: a flat,
//! sorted, fully-deterministic structure that serializes to identical bytes
//! for identical inputs, regardless of thread count. Maps are `BTreeMap`
//! (sorted keys), records are sorted by their key before serialization, and
//! floats are emitted with shortest-round-trip formatting. Wall-clock time
//! is the only nondeterministic field and is omitted unless explicitly
//! requested.
//!
//! Reports render to pretty JSON for archival and to CSV (one row per
//! record) for plotting.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};

/// One keyed record of an experiment: a sort key plus named columns.
#[derive(Debug, Clone, Serialize)]
pub struct Record {
    pub key: String,
    pub fields: BTreeMap<String, Value>,
}

/// The report envelope shared by every experiment.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub version: u32,
    /// Parameter snapshot (flat string map, from `Parameters::flat_map`).
    pub parameters: BTreeMap<String, String>,
    /// Configuration the run was invoked with.
    pub config: BTreeMap<String, String>,
    /// Determinism seed. No experiment currently samples randomly, so this
    /// is 0 unless a config overrides it; it is recorded regardless.
    pub seed: u64,
    pub records: Vec<Record>,
    /// Aggregate statistics; every pass/fail names the envelope it was
    /// judged against.
    pub summary: BTreeMap<String, Value>,
    /// Wall-clock milliseconds; only present when timing was requested.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<u128>,
}

impl ExperimentReport {
    pub fn new(experiment: &str) -> Self {
        ExperimentReport {
            experiment: experiment.to_string(),
            version: 1,
            parameters: BTreeMap::new(),
            config: BTreeMap::new(),
            seed: 0,
            records: Vec::new(),
            summary: BTreeMap::new(),
            wall_ms: None,
        }
    }

    pub fn set_parameters(&mut self, m: BTreeMap<String, String>) {
        self.parameters = m;
    }

    pub fn set_config<I, K, V>(&mut self, kv: I)
    where
        I: IntoIterator<Item = (K, V)>,
        K: Into<String>,
        V: ToString,
    {
        for (k, v) in kv {
            self.config.insert(k.into(), v.to_string());
        }
    }

    pub fn push_record<I>(&mut self, key: String, fields: I)
    where
        I: IntoIterator<Item = (&'static str, Value)>,
    {
        let fields = fields
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        self.records.push(Record { key, fields });
    }

    pub fn set_summary<I>(&mut self, kv: I)
    where
        I: IntoIterator<Item = (&'static str, Value)>,
    {
        for (k, v) in kv {
            self.summary.insert(k.to_string(), v);
        }
    }

    /// Sort records by key — call once after assembly; serialization order
    /// is then canonical.
    pub fn sort_records(&mut self) {
        self.records.sort_by(|a, b| a.key.cmp(&b.key));
    }

    /// Overall verdict if the experiment judged one.
    pub fn passed(&self) -> Option<bool> {
        self.summary.get("pass").and_then(Value::as_bool)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map_err(|e| Error::Serialization(format!("report serialization failed: {e}")))
    }

    /// One CSV row per record. Columns: `key`, then the union of all field
    /// names in sorted order; missing fields render empty.
    pub fn to_csv(&self) -> Result<String> {
        let mut columns: Vec<String> = Vec::new();
        {
            let mut seen = std::collections::BTreeSet::new();
            for r in &self.records {
                for k in r.fields.keys() {
                    seen.insert(k.clone());
                }
            }
            columns.extend(seen);
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["key".to_string()];
        header.extend(columns.iter().cloned());
        w.write_record(&header)
            .map_err(|e| Error::Serialization(format!("csv write failed: {e}")))?;
        for r in &self.records {
            let mut row = vec![r.key.clone()];
            for c in &columns {
                row.push(match r.fields.get(c) {
                    None | Some(Value::Null) => String::new(),
                    Some(Value::String(s)) => s.clone(),
                    Some(other) => other.to_string(),
                });
            }
            w.write_record(&row)
                .map_err(|e| Error::Serialization(format!("csv write failed: {e}")))?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::Serialization(format!("csv finalize failed: {e}")))?;
        String::from_utf8(bytes).map_err(|e| Error::Serialization(format!("csv not utf-8: {e}")))
    }
}

/// JSON value from a finite double; non-finite values are encoded as
/// strings so they survive serialization unambiguously.
pub fn fval(v: f64) -> Value {
    match serde_json::Number::from_f64(v) {
        Some(n) => Value::Number(n),
        None => Value::String(format!("{v}")),
    }
}

pub fn ival(v: i128) -> Value {
    // serde_json numbers hold i64/u64; wider values go through strings
    if let Ok(x) = i64::try_from(v) {
        Value::Number(x.into())
    } else {
        Value::String(v.to_string())
    }
}

pub fn uval(v: u128) -> Value {
    if let Ok(x) = u64::try_from(v) {
        Value::Number(x.into())
    } else {
        Value::String(v.to_string())
    }
}

pub fn bval(v: bool) -> Value {
    Value::Bool(v)
}

pub fn sval(v: impl Into<String>) -> Value {
    Value::String(v.into())
}

/// Zero-padded sort key so numeric record keys order correctly as strings.
pub fn numeric_key(prefix: &str, v: u128) -> String {
    format!("{prefix}{v:020}")
}
