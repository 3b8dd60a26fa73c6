//! Run records: enough to repeat a run byte for byte.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use vdm_core::kv::KvConfig;

use crate::CliResult;

#[derive(Serialize)]
struct RunRecord<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    argv: Vec<String>,
    seed: u64,
    config: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "serde_json::Value::is_null")]
    summary: serde_json::Value,
}

/// Writes `run-<command>.json` into `dir`.
pub fn write(dir: &Path, command: &str, seed: u64, config: &KvConfig, summary: serde_json::Value) -> CliResult {
    let rec = RunRecord {
        tool: "vdm",
        version: env!("CARGO_PKG_VERSION"),
        command,
        argv: std::env::args().skip(1).collect(),
        seed,
        config: config.entries().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
        summary,
    };
    std::fs::write(
        dir.join(format!("run-{command}.json")),
        serde_json::to_string_pretty(&rec)? + "\n",
    )?;
    Ok(())
}
