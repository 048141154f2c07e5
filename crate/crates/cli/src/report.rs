//! JSON summaries and CSV detail files.

use std::path::Path;

use anyhow::{Context, Result};
use pesp_core::work::WorkSnapshot;
use serde::Serialize;
use serde_json::Value;

use crate::config::RunConfig;

pub const SUMMARY_FILE: &str = "summary.json";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Ok,
    /// A budget stopped the run; results are valid but partial.
    BudgetLimited,
}

#[derive(Serialize)]
pub struct InstanceInfo {
    pub path: String,
    pub name: String,
    pub facilities: usize,
    pub customers: usize,
}

/// A detail file produced by a run, written together with the summary.
pub struct Detail {
    pub name: String,
    pub contents: String,
}

impl Detail {
    pub fn csv<T: Serialize>(name: &str, rows: &[T]) -> Result<Self> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in rows {
            w.serialize(r)?;
        }
        let bytes = w.into_inner().context("flushing csv")?;
        Ok(Detail { name: name.to_string(), contents: String::from_utf8(bytes).expect("csv output is UTF-8") })
    }

    pub fn text(name: &str, contents: String) -> Self {
        Detail { name: name.to_string(), contents }
    }
}

pub struct Outcome {
    pub status: RunStatus,
    pub instance: Option<InstanceInfo>,
    pub results: Value,
    pub counters: Option<WorkSnapshot>,
    pub details: Vec<Detail>,
}

#[derive(Serialize)]
struct Summary<'a> {
    format_version: u32,
    tool: &'static str,
    tool_version: &'static str,
    command: &'static str,
    status: RunStatus,
    seed: u64,
    config: Value,
    instance: &'a Option<InstanceInfo>,
    results: &'a Value,
    counters: Option<Counters>,
    files: Vec<&'a str>,
    timing: Timing,
}

#[derive(Serialize)]
struct Counters {
    #[serde(flatten)]
    snapshot: WorkSnapshot,
    work_units: u64,
}

#[derive(Serialize)]
struct Timing {
    wall_secs: f64,
}

/// Writes the detail files and then the summary, so a directory without a
/// summary never passes for a finished run.
pub fn write(dir: &Path, cfg: &RunConfig, out: &Outcome, wall_secs: f64) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    for d in &out.details {
        std::fs::write(dir.join(&d.name), &d.contents).with_context(|| format!("writing {}", d.name))?;
    }
    let summary = Summary {
        format_version: FORMAT_VERSION,
        tool: "pesp",
        tool_version: env!("CARGO_PKG_VERSION"),
        command: cfg.command(),
        status: out.status,
        seed: cfg.common().seed,
        config: cfg.to_value(),
        instance: &out.instance,
        results: &out.results,
        counters: out.counters.map(|s| Counters { work_units: s.work_units(), snapshot: s }),
        files: out.details.iter().map(|d| d.name.as_str()).collect(),
        timing: Timing { wall_secs },
    };
    let mut text = serde_json::to_string_pretty(&summary)?;
    text.push('\n');
    std::fs::write(dir.join(SUMMARY_FILE), text).context("writing summary")?;
    Ok(())
}
