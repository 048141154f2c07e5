//! Helpers for driving the `pesp` binary from tests.

#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

pub fn pesp() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pesp"))
}

pub struct Run {
    pub code: i32,
    pub stderr: String,
    pub dir: PathBuf,
}

impl Run {
    pub fn summary(&self) -> Value {
        let text = std::fs::read_to_string(self.dir.join("summary.json")).expect("summary written");
        serde_json::from_str(&text).expect("summary parses")
    }

    pub fn file(&self, name: &str) -> String {
        std::fs::read_to_string(self.dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
    }
}

/// Runs `pesp <args> --out-dir <root>/<name>`.
pub fn run(root: &Path, name: &str, args: &[&str]) -> Run {
    let dir = root.join(name);
    let out = pesp().args(args).arg("--out-dir").arg(&dir).current_dir(root).output().expect("binary runs");
    Run { code: out.status.code().unwrap_or(-1), stderr: String::from_utf8_lossy(&out.stderr).into_owned(), dir }
}

pub fn replay(root: &Path, from: &Run, name: &str) -> Run {
    let summary = from.dir.join("summary.json");
    run(root, name, &["replay", "--summary", summary.to_str().unwrap(), "--workers", "1"])
}

/// Writes a generated instance to `<root>/<name>/instance.json`.
pub fn generate(
    root: &Path,
    name: &str,
    facilities: usize,
    configs: usize,
    customers: usize,
    kind: &str,
    seed: u64,
) -> PathBuf {
    let r = run(
        root,
        name,
        &[
            "generate",
            "--seed",
            &seed.to_string(),
            "--facilities",
            &facilities.to_string(),
            "--configs",
            &configs.to_string(),
            "--customers",
            &customers.to_string(),
            "--kind",
            kind,
        ],
    );
    assert_eq!(r.code, 0, "{}", r.stderr);
    r.dir.join("instance.json")
}

/// Summary without the fields that legitimately differ between reruns.
pub fn comparable(mut v: Value) -> Value {
    let obj = v.as_object_mut().unwrap();
    obj.remove("timing");
    obj["config"].as_object_mut().unwrap().remove("out_dir");
    obj["config"].as_object_mut().unwrap().remove("workers");
    v
}

/// CSV text with every `wall_secs` column removed.
pub fn csv_without_timing(text: &str) -> Vec<Vec<String>> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let headers: Vec<String> = rdr.headers().unwrap().iter().map(str::to_string).collect();
    let keep: Vec<usize> = (0..headers.len()).filter(|&i| headers[i] != "wall_secs").collect();
    let mut rows = vec![keep.iter().map(|&i| headers[i].clone()).collect()];
    for rec in rdr.records() {
        let rec = rec.unwrap();
        rows.push(keep.iter().map(|&i| rec[i].to_string()).collect());
    }
    rows
}

/// Checks that rerunning `original` from its summary reproduces every
/// reported number and every detail file.
pub fn assert_reproduces(root: &Path, original: &Run, name: &str) -> Result<(), String> {
    let again = replay(root, original, name);
    if again.code != original.code {
        return Err(format!("exit {} vs {}: {}", again.code, original.code, again.stderr));
    }
    let (a, b) = (original.summary(), again.summary());
    if comparable(a.clone()) != comparable(b) {
        return Err("summaries differ".into());
    }
    for f in a["files"].as_array().unwrap() {
        let f = f.as_str().unwrap();
        let (x, y) = (original.file(f), again.file(f));
        let same = if f.ends_with(".csv") { csv_without_timing(&x) == csv_without_timing(&y) } else { x == y };
        if !same {
            return Err(format!("{f} differs"));
        }
    }
    Ok(())
}

pub fn schema_validator() -> jsonschema::Validator {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schemas/summary.schema.json");
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&schema).expect("schema compiles")
}
