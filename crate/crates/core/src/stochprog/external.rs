//! External MIP solver driven through MPS files.
//!
//! The command template is run through `sh -c` after substituting `{mps}`
//! (model path) and `{sol}` (solution path). The solver must write one
//! `name value` pair per line to the solution file; lines are matched with a
//! configurable regex whose first two groups are the name and the value.

use std::collections::HashMap;
use std::process::Command;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mip::MipModel;

pub const SOLVER_ENV: &str = "PESP_SOLVER_CMD";
pub const DEFAULT_SOLUTION_REGEX: &str = r"^\s*(\S+)\s+([-+0-9.eEinfINF]+)\s*$";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExternalSolver {
    pub command: String,
    #[serde(default = "default_regex")]
    pub solution_regex: String,
    /// Integrality and feasibility tolerance applied to returned values.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

fn default_regex() -> String {
    DEFAULT_SOLUTION_REGEX.to_string()
}

fn default_tolerance() -> f64 {
    1e-6
}

impl ExternalSolver {
    pub fn new(command: &str) -> Self {
        ExternalSolver { command: command.to_string(), solution_regex: default_regex(), tolerance: default_tolerance() }
    }

    /// Solver configured by the `PESP_SOLVER_CMD` environment variable.
    pub fn from_env() -> Option<Self> {
        std::env::var(SOLVER_ENV).ok().filter(|c| !c.trim().is_empty()).map(|c| Self::new(&c))
    }

    /// Solves `model` and returns its variable values (missing names are 0).
    pub fn solve(&self, model: &MipModel) -> Result<Vec<f64>> {
        if self.command.trim().is_empty() {
            return Err(Error::BackendUnavailable("no solver command configured".into()));
        }
        let re =
            Regex::new(&self.solution_regex).map_err(|e| Error::InvalidArgument(format!("bad solution regex: {e}")))?;
        let dir = tempfile::tempdir()?;
        let mps = dir.path().join("model.mps");
        let sol = dir.path().join("model.sol");
        model.write_mps(&mps)?;
        let cmd = self
            .command
            .replace("{mps}", &shell_quote(&mps.to_string_lossy()))
            .replace("{sol}", &shell_quote(&sol.to_string_lossy()));
        let out = Command::new("sh")
            .arg("-c")
            .arg(&cmd)
            .output()
            .map_err(|e| Error::BackendUnavailable(format!("cannot start shell: {e}")))?;
        let diagnostics = format!(
            "command: {cmd}\nstatus: {}\nstdout:\n{}\nstderr:\n{}",
            out.status,
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        );
        if out.status.code() == Some(127) {
            return Err(Error::BackendUnavailable(diagnostics));
        }
        if !out.status.success() {
            return Err(Error::SolverFailure { message: format!("solver exited with {}", out.status), diagnostics });
        }
        let text = std::fs::read_to_string(&sol).map_err(|e| Error::SolverFailure {
            message: format!("no solution file: {e}"),
            diagnostics: diagnostics.clone(),
        })?;
        let mut parsed: HashMap<&str, f64> = HashMap::new();
        for line in text.lines() {
            if let Some(c) = re.captures(line) {
                if let (Some(name), Some(val)) = (c.get(1), c.get(2)) {
                    if let Ok(v) = val.as_str().parse::<f64>() {
                        parsed.insert(name.as_str(), v);
                    }
                }
            }
        }
        if parsed.is_empty() && !model.vars.is_empty() {
            return Err(Error::SolverFailure { message: "solution file contains no values".into(), diagnostics });
        }
        Ok(model
            .vars
            .iter()
            .map(|v| {
                let x = parsed.get(v.name.as_str()).copied().unwrap_or(0.0);
                if v.integer {
                    x.round()
                } else {
                    x
                }
            })
            .collect())
    }
}

fn shell_quote(s: &str) -> String {
    format!("'{}'", s.replace('\'', r"'\''"))
}
