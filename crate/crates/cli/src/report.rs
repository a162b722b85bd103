//! Versioned JSON reports, written atomically.

use std::io::Write;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Duration;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{json, Value};

use crate::instance::InputError;
use crate::solve::{Outcome, INVALID};

pub const SCHEMA: &str = "cechblow/1";

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub command: String,
    pub instance: Value,
    pub status: i32,
    pub outcome: String,
    pub summary: String,
    pub result: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<Value>,
}

impl Report {
    pub fn new(command: &str, instance: Value, o: Outcome) -> Self {
        Report {
            schema: SCHEMA,
            command: command.into(),
            instance,
            status: o.status,
            outcome: o.outcome,
            summary: o.summary,
            result: o.result,
            timing: None,
        }
    }

    pub fn input_error(command: &str, e: &InputError) -> Self {
        let o = Outcome {
            status: INVALID,
            outcome: "InvalidInput".into(),
            summary: e.to_string(),
            result: json!({ "pointer": e.pointer, "error": e.message }),
        };
        Report::new(command, Value::Null, o)
    }

    pub fn set_timing(&mut self, d: Duration) {
        self.timing = Some(json!({ "elapsed_ms": d.as_millis() as u64 }));
    }

    pub fn headline(&self) -> String {
        format!("{} ({}), status {}", self.outcome, self.summary, self.status)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    /// Writes to a sibling temporary file, then renames it into place.
    pub fn write_atomic(&self, path: &Path) -> Result<()> {
        static COUNTER: AtomicU64 = AtomicU64::new(0);
        let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
        let name = path.file_name().context("report path has no file name")?.to_string_lossy();
        let tmp = dir.join(format!(".{name}.{}.{}.tmp", std::process::id(), COUNTER.fetch_add(1, Ordering::Relaxed)));
        let mut f = std::fs::File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
        f.write_all(self.to_json().as_bytes())?;
        f.write_all(b"\n")?;
        f.sync_all()?;
        drop(f);
        std::fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
        Ok(())
    }
}
