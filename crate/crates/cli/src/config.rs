//! Run configuration: command-line flags layered over an optional TOML file.
//!
//! Every subcommand has a clap struct of optional flags and a resolved
//! config struct with defaults. Flags given on the command line win over
//! TOML keys, which win over defaults. The resolved config is echoed into
//! the summary so `replay` can run it again.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use pesp_core::bnb::ScoreOption;
use pesp_core::stochprog::external::SOLVER_ENV;
use pesp_core::stochprog::{ExternalSolver, DEFAULT_MEMO_CAPACITY, DEFAULT_NODE_CAP};
use pesp_core::{Backend, Branching, DistributionKind, SampleMode, WorkBudget};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[value(rename_all = "snake_case")]
#[serde(rename_all = "snake_case")]
pub enum KindArg {
    Bernoulli,
    MixedTriangular,
}

impl From<KindArg> for DistributionKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Bernoulli => DistributionKind::Bernoulli,
            KindArg::MixedTriangular => DistributionKind::MixedTriangular,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[value(rename_all = "snake_case")]
#[serde(rename_all = "snake_case")]
pub enum BranchingArg {
    Single,
    Multi,
    Random,
}

impl From<BranchingArg> for Branching {
    fn from(b: BranchingArg) -> Self {
        match b {
            BranchingArg::Single => Branching::Single,
            BranchingArg::Multi => Branching::Multi,
            BranchingArg::Random => Branching::Random,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[value(rename_all = "snake_case")]
#[serde(rename_all = "snake_case")]
pub enum ScoreArg {
    /// Difference score for two-point demands, covariance otherwise.
    Auto,
    Difference,
    Covariance,
}

impl ScoreArg {
    pub fn option(self) -> Option<ScoreOption> {
        match self {
            ScoreArg::Auto => None,
            ScoreArg::Difference => Some(ScoreOption::Difference),
            ScoreArg::Covariance => Some(ScoreOption::Covariance),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[value(rename_all = "snake_case")]
#[serde(rename_all = "snake_case")]
pub enum ModeArg {
    Lhs,
    Mc,
}

impl From<ModeArg> for SampleMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Lhs => SampleMode::Lhs,
            ModeArg::Mc => SampleMode::Mc,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[value(rename_all = "snake_case")]
#[serde(rename_all = "snake_case")]
pub enum BackendArg {
    /// External solver if `PESP_SOLVER_CMD` is set, built-in otherwise.
    Auto,
    Exhaustive,
    External,
}

// Flag groups shared by several subcommands.

#[derive(Args, Clone, Debug, Default, Serialize)]
pub struct CommonArgs {
    /// Seed for every random stream of the run.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; 1 gives bit-for-bit reproducible output.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Directory receiving the summary and detail files.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// TOML file supplying defaults for any flag (keys in snake_case).
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommonConfig {
    pub seed: u64,
    #[serde(default = "one")]
    pub workers: usize,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
}

#[derive(Args, Clone, Debug, Default, Serialize)]
pub struct SolverArgs {
    #[arg(long, value_enum)]
    pub backend: Option<BackendArg>,
    /// External solver command template with `{mps}` and `{sol}`.
    #[arg(long)]
    pub solver_cmd: Option<String>,
    /// Node limit of the built-in two-stage solver.
    #[arg(long)]
    pub node_cap: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    #[serde(default = "backend_auto")]
    pub backend: BackendArg,
    #[serde(default)]
    pub solver_cmd: Option<String>,
    #[serde(default = "default_node_cap")]
    pub node_cap: u64,
}

impl SolverConfig {
    /// Replaces `auto` by a concrete choice so the echoed config does not
    /// depend on the environment.
    fn resolve(&mut self) -> Result<()> {
        let env = std::env::var(SOLVER_ENV).ok().filter(|c| !c.trim().is_empty());
        if self.backend == BackendArg::Auto {
            self.backend =
                if self.solver_cmd.is_some() || env.is_some() { BackendArg::External } else { BackendArg::Exhaustive };
        }
        if self.backend == BackendArg::External && self.solver_cmd.is_none() {
            match env {
                Some(c) => self.solver_cmd = Some(c),
                None => bail!("the external backend needs --solver-cmd or {SOLVER_ENV}"),
            }
        }
        if self.node_cap == 0 {
            bail!("node_cap must be positive");
        }
        Ok(())
    }

    pub fn backend(&self) -> Backend {
        match (&self.backend, &self.solver_cmd) {
            (BackendArg::External, Some(cmd)) => Backend::ExternalMip(ExternalSolver::new(cmd)),
            _ => Backend::Exhaustive { node_cap: self.node_cap },
        }
    }
}

#[derive(Args, Clone, Debug, Default, Serialize)]
pub struct BudgetArgs {
    /// Stop after this many work units (recourse evaluations).
    #[arg(long)]
    pub max_work_units: Option<u64>,
    #[arg(long)]
    pub max_nodes: Option<u64>,
    /// Wall-clock limit; runs stopped by it are not reproducible.
    #[arg(long)]
    pub max_wall_secs: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BudgetConfig {
    #[serde(default)]
    pub max_work_units: Option<u64>,
    #[serde(default)]
    pub max_nodes: Option<u64>,
    #[serde(default)]
    pub max_wall_secs: Option<f64>,
}

impl BudgetConfig {
    pub fn budget(&self) -> WorkBudget {
        WorkBudget {
            max_work_units: self.max_work_units,
            max_nodes: self.max_nodes,
            max_f_evals: None,
            max_wall_secs: self.max_wall_secs,
        }
    }
}

#[derive(Args, Clone, Debug, Default, Serialize)]
pub struct SearchArgs {
    #[arg(long, value_enum)]
    pub branching: Option<BranchingArg>,
    #[arg(long, value_enum)]
    pub score: Option<ScoreArg>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    #[serde(default = "branching_multi")]
    pub branching: BranchingArg,
    #[serde(default = "score_auto")]
    pub score: ScoreArg,
}

// Subcommands.

#[derive(Args, Clone, Debug, Default, Serialize)]
pub struct GenerateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub facilities: Option<usize>,
    /// Configurations per facility.
    #[arg(long)]
    pub configs: Option<usize>,
    #[arg(long)]
    pub customers: Option<usize>,
    #[arg(long, value_enum)]
    pub kind: Option<KindArg>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerateConfig {
    #[serde(flatten)]
    pub common: CommonConfig,
    #[serde(default = "five")]
    pub facilities: usize,
    #[serde(default = "four")]
    pub configs: usize,
    #[serde(default = "twenty")]
    pub customers: usize,
    #[serde(default = "kind_bernoulli")]
    pub kind: KindArg,
}

#[derive(Args, Clone, Debug, Default, Serialize)]
pub struct SolveExactArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
    /// Instance JSON file.
    #[arg(long)]
    pub instance: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub budget: BudgetArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub search: SearchArgs,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveExactConfig {
    #[serde(flatten)]
    pub common: CommonConfig,
    pub instance: PathBuf,
    #[serde(flatten)]
    pub solver: SolverConfig,
    #[serde(flatten)]
    pub budget: BudgetConfig,
    #[serde(flatten)]
    pub search: SearchConfig,
}

#[derive(Args, Clone, Debug, Default, Serialize)]
pub struct SolveSaaArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub instance: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub solver: SolverArgs,
    /// Budget of each replication's search.
    #[command(flatten)]
    #[serde(flatten)]
    pub budget: BudgetArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub search: SearchArgs,
    /// Scenarios per replication.
    #[arg(long)]
    pub n: Option<usize>,
    /// Number of replications.
    #[arg(long)]
    pub replications: Option<usize>,
    #[arg(long, value_enum)]
    pub sample_mode: Option<ModeArg>,
    /// One-sided significance level of the confidence bound.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Entries kept in each replication's subproblem cache (0 disables it).
    #[arg(long)]
    pub memo_capacity: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveSaaConfig {
    #[serde(flatten)]
    pub common: CommonConfig,
    pub instance: PathBuf,
    #[serde(flatten)]
    pub solver: SolverConfig,
    #[serde(flatten)]
    pub budget: BudgetConfig,
    #[serde(flatten)]
    pub search: SearchConfig,
    #[serde(default = "hundred")]
    pub n: usize,
    #[serde(default = "thirty")]
    pub replications: usize,
    #[serde(default = "mode_lhs")]
    pub sample_mode: ModeArg,
    #[serde(default = "alpha_default")]
    pub alpha: f64,
    #[serde(default = "memo_default")]
    pub memo_capacity: usize,
}

#[derive(Args, Clone, Debug, Default, Serialize)]
pub struct LowerBoundArgs {
    /// Outer draws of the lower-bound estimator.
    #[arg(long)]
    pub lb_n1: Option<usize>,
    /// Evaluation scenarios per outer draw.
    #[arg(long)]
    pub lb_n2: Option<usize>,
    /// Selection scenarios per outer draw.
    #[arg(long)]
    pub lb_n3: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundConfig {
    #[serde(default = "lb_n1_default")]
    pub lb_n1: usize,
    #[serde(default = "lb_n2_default")]
    pub lb_n2: usize,
    #[serde(default = "hundred")]
    pub lb_n3: usize,
}

#[derive(Args, Clone, Debug, Default, Serialize)]
pub struct SolveInternalArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub instance: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub budget: BudgetArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub search: SearchArgs,
    /// Outer points per node; must be a multiple of `--batches`.
    #[arg(long)]
    pub n1: Option<usize>,
    /// Conditional scenarios per outer point.
    #[arg(long)]
    pub n2: Option<usize>,
    #[arg(long)]
    pub batches: Option<usize>,
    #[arg(long, value_enum)]
    pub sample_mode: Option<ModeArg>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Node priority is `mean + priority_sigma * stderr`.
    #[arg(long)]
    pub priority_sigma: Option<f64>,
    /// Batches per outcome when the observed support is enumerated.
    #[arg(long)]
    pub enum_batches: Option<usize>,
    /// Enumerate the observed support when at most this many customers are
    /// probed (0 turns enumeration off).
    #[arg(long)]
    pub enum_max_probes: Option<usize>,
    /// Additional cap on the enumerated support size (0 means none).
    #[arg(long)]
    pub enum_max_support: Option<u64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub lower: LowerBoundArgs,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveInternalConfig {
    #[serde(flatten)]
    pub common: CommonConfig,
    pub instance: PathBuf,
    #[serde(flatten)]
    pub solver: SolverConfig,
    #[serde(flatten)]
    pub budget: BudgetConfig,
    #[serde(flatten)]
    pub search: SearchConfig,
    #[serde(default = "internal_n1")]
    pub n1: usize,
    #[serde(default = "hundred")]
    pub n2: usize,
    #[serde(default = "thirty")]
    pub batches: usize,
    #[serde(default = "mode_lhs")]
    pub sample_mode: ModeArg,
    #[serde(default = "alpha_default")]
    pub alpha: f64,
    #[serde(default = "sigma_default")]
    pub priority_sigma: f64,
    #[serde(default = "thirty")]
    pub enum_batches: usize,
    #[serde(default = "eight")]
    pub enum_max_probes: usize,
    #[serde(default)]
    pub enum_max_support: u64,
    #[serde(flatten)]
    pub lower: LowerBoundConfig,
}

#[derive(Args, Clone, Debug, Default, Serialize)]
pub struct HeuristicArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub instance: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub solver: SolverArgs,
    /// Outer points (and candidate plans) per iterate.
    #[arg(long)]
    pub n1: Option<usize>,
    /// Conditional scenarios per outer point.
    #[arg(long)]
    pub n2: Option<usize>,
    /// Scenarios used to build each candidate plan.
    #[arg(long)]
    pub n3: Option<usize>,
    /// Clusters used to score each unprobed customer.
    #[arg(long)]
    pub k: Option<usize>,
    /// Weight clusters by size instead of uniformly.
    #[arg(long)]
    pub weighted: Option<bool>,
    #[arg(long, value_enum)]
    pub sample_mode: Option<ModeArg>,
    /// Pool entries re-evaluated with the lower-bound estimator.
    #[arg(long)]
    pub top: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub lower: LowerBoundArgs,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeuristicConfig {
    #[serde(flatten)]
    pub common: CommonConfig,
    pub instance: PathBuf,
    #[serde(flatten)]
    pub solver: SolverConfig,
    #[serde(default = "twenty")]
    pub n1: usize,
    #[serde(default = "twenty")]
    pub n2: usize,
    #[serde(default = "fifty")]
    pub n3: usize,
    #[serde(default = "four")]
    pub k: usize,
    #[serde(default)]
    pub weighted: bool,
    #[serde(default = "mode_lhs")]
    pub sample_mode: ModeArg,
    #[serde(default = "five")]
    pub top: usize,
    #[serde(default = "alpha_default")]
    pub alpha: f64,
    #[serde(flatten)]
    pub lower: LowerBoundConfig,
}

#[derive(Args, Clone, Debug, Default, Serialize)]
pub struct EvaluateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub instance: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub solver: SolverArgs,
    /// Probe set as `;`-separated customer indices, `-` for none.
    #[arg(long)]
    pub set: Option<String>,
    #[arg(long, value_enum)]
    pub sample_mode: Option<ModeArg>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Also compute `F(S)` by enumeration (finite supports only).
    #[arg(long)]
    pub exact: Option<bool>,
    #[command(flatten)]
    #[serde(flatten)]
    pub lower: LowerBoundArgs,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluateConfig {
    #[serde(flatten)]
    pub common: CommonConfig,
    pub instance: PathBuf,
    #[serde(flatten)]
    pub solver: SolverConfig,
    pub set: String,
    #[serde(default = "mode_lhs")]
    pub sample_mode: ModeArg,
    #[serde(default = "alpha_default")]
    pub alpha: f64,
    #[serde(default)]
    pub exact: bool,
    #[serde(flatten)]
    pub lower: LowerBoundConfig,
}

#[derive(Args, Clone, Debug, Default, Serialize)]
pub struct EmitArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub instance: Option<PathBuf>,
    /// Refuse supports with more outcomes than this.
    #[arg(long)]
    pub outcome_cap: Option<usize>,
    /// Fix the probe indicators to this set (`;`-separated indices).
    #[arg(long)]
    pub fix: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmitConfig {
    #[serde(flatten)]
    pub common: CommonConfig,
    pub instance: PathBuf,
    #[serde(default = "outcome_cap_default")]
    pub outcome_cap: usize,
    #[serde(default)]
    pub fix: Option<String>,
}

/// A fully resolved configuration of one subcommand.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", content = "config", rename_all = "kebab-case")]
pub enum RunConfig {
    Generate(GenerateConfig),
    SolveExact(SolveExactConfig),
    SolveSaa(SolveSaaConfig),
    SolveInternal(SolveInternalConfig),
    Heuristic(HeuristicConfig),
    Evaluate(EvaluateConfig),
    EmitNaMip(EmitConfig),
}

impl RunConfig {
    pub fn command(&self) -> &'static str {
        match self {
            RunConfig::Generate(_) => "generate",
            RunConfig::SolveExact(_) => "solve-exact",
            RunConfig::SolveSaa(_) => "solve-saa",
            RunConfig::SolveInternal(_) => "solve-internal",
            RunConfig::Heuristic(_) => "heuristic",
            RunConfig::Evaluate(_) => "evaluate",
            RunConfig::EmitNaMip(_) => "emit-na-mip",
        }
    }

    pub fn common(&self) -> &CommonConfig {
        match self {
            RunConfig::Generate(c) => &c.common,
            RunConfig::SolveExact(c) => &c.common,
            RunConfig::SolveSaa(c) => &c.common,
            RunConfig::SolveInternal(c) => &c.common,
            RunConfig::Heuristic(c) => &c.common,
            RunConfig::Evaluate(c) => &c.common,
            RunConfig::EmitNaMip(c) => &c.common,
        }
    }

    pub fn common_mut(&mut self) -> &mut CommonConfig {
        match self {
            RunConfig::Generate(c) => &mut c.common,
            RunConfig::SolveExact(c) => &mut c.common,
            RunConfig::SolveSaa(c) => &mut c.common,
            RunConfig::SolveInternal(c) => &mut c.common,
            RunConfig::Heuristic(c) => &mut c.common,
            RunConfig::Evaluate(c) => &mut c.common,
            RunConfig::EmitNaMip(c) => &mut c.common,
        }
    }

    /// The config as a flat JSON object.
    pub fn to_value(&self) -> Value {
        match serde_json::to_value(self).expect("config serializes") {
            Value::Object(mut m) => m.remove("config").unwrap_or(Value::Null),
            _ => unreachable!("tagged enum serializes to an object"),
        }
    }

    /// Rebuilds a config from a summary's `command` and `config` fields.
    pub fn from_parts(command: &str, config: Value) -> Result<Self> {
        let tagged = serde_json::json!({ "command": command, "config": config });
        let mut cfg: RunConfig = serde_json::from_value(tagged).context("summary config does not match its command")?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks values that serde cannot and fixes backend choices.
    pub fn validate(&mut self) -> Result<()> {
        if self.common().workers == 0 {
            bail!("workers must be at least 1");
        }
        match self {
            RunConfig::Generate(c) => {
                if c.facilities == 0 || c.configs == 0 || c.customers == 0 {
                    bail!("facilities, configs and customers must be positive");
                }
                if c.customers > pesp_core::probe::MAX_PROBES {
                    bail!("at most {} customers are supported", pesp_core::probe::MAX_PROBES);
                }
            }
            RunConfig::SolveExact(c) => c.solver.resolve()?,
            RunConfig::SolveSaa(c) => {
                c.solver.resolve()?;
                if c.n == 0 || c.replications < 2 {
                    bail!("solve-saa needs n >= 1 and at least two replications");
                }
                check_alpha(c.alpha)?;
            }
            RunConfig::SolveInternal(c) => {
                c.solver.resolve()?;
                if c.batches < 2 || c.n1 == 0 || c.n1 % c.batches != 0 {
                    bail!("n1 must be a positive multiple of batches, and batches at least 2");
                }
                if c.n2 == 0 || c.enum_batches < 2 {
                    bail!("n2 must be positive and enum_batches at least 2");
                }
                check_alpha(c.alpha)?;
                check_lower(&c.lower)?;
            }
            RunConfig::Heuristic(c) => {
                c.solver.resolve()?;
                if c.n1 == 0 || c.n2 == 0 || c.n3 == 0 || c.k == 0 || c.top == 0 {
                    bail!("n1, n2, n3, k and top must be positive");
                }
                check_alpha(c.alpha)?;
                check_lower(&c.lower)?;
            }
            RunConfig::Evaluate(c) => {
                c.solver.resolve()?;
                parse_set(&c.set)?;
                check_alpha(c.alpha)?;
                check_lower(&c.lower)?;
            }
            RunConfig::EmitNaMip(c) => {
                if let Some(f) = &c.fix {
                    parse_set(f)?;
                }
            }
        }
        Ok(())
    }
}

fn check_alpha(a: f64) -> Result<()> {
    if !(a > 0.0 && a < 0.5) {
        bail!("alpha must lie in (0, 0.5), got {a}");
    }
    Ok(())
}

fn check_lower(l: &LowerBoundConfig) -> Result<()> {
    if l.lb_n1 < 2 || l.lb_n2 == 0 || l.lb_n3 == 0 {
        bail!("lb_n1 must be at least 2 and lb_n2, lb_n3 positive");
    }
    Ok(())
}

pub fn parse_set(s: &str) -> Result<pesp_core::ProbeSet> {
    pesp_core::ProbeSet::decode(s).with_context(|| format!("cannot parse probe set {s:?}; use e.g. 0;3;7 or -"))
}

/// Layers `args` over the TOML file named by `--config` and resolves the
/// result into `C`.
pub fn merge<A: Serialize, C: DeserializeOwned>(args: &A, config_file: Option<&Path>) -> Result<C> {
    let mut base = match config_file {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            let table: toml::Table = toml::from_str(&text).with_context(|| format!("parsing {}", p.display()))?;
            match serde_json::to_value(table)? {
                Value::Object(m) => m,
                _ => Map::new(),
            }
        }
        None => Map::new(),
    };
    if let Value::Object(flags) = serde_json::to_value(args)? {
        for (k, v) in flags {
            if !v.is_null() {
                base.insert(k, v);
            }
        }
    }
    let known = match serde_json::to_value(args)? {
        Value::Object(m) => m,
        _ => Map::new(),
    };
    if let Some(k) = base.keys().find(|k| !known.contains_key(*k)) {
        bail!("unknown configuration key `{k}`");
    }
    serde_json::from_value(Value::Object(base)).map_err(|e| {
        let msg = e.to_string();
        match msg.strip_prefix("missing field `").and_then(|r| r.split('`').next()) {
            Some(field) => anyhow::anyhow!("--{} is required", field.replace('_', "-")),
            None => anyhow::anyhow!("invalid configuration: {msg}"),
        }
    })
}

fn one() -> usize {
    1
}
fn four() -> usize {
    4
}
fn five() -> usize {
    5
}
fn eight() -> usize {
    8
}
fn twenty() -> usize {
    20
}
fn thirty() -> usize {
    30
}
fn fifty() -> usize {
    50
}
fn hundred() -> usize {
    100
}
fn internal_n1() -> usize {
    300
}
fn lb_n1_default() -> usize {
    25
}
fn lb_n2_default() -> usize {
    2000
}
fn alpha_default() -> f64 {
    0.05
}
fn sigma_default() -> f64 {
    2.0
}
fn memo_default() -> usize {
    DEFAULT_MEMO_CAPACITY
}
fn default_node_cap() -> u64 {
    DEFAULT_NODE_CAP
}
fn outcome_cap_default() -> usize {
    pesp_core::mipgen::DEFAULT_OUTCOME_CAP
}
fn default_out_dir() -> PathBuf {
    PathBuf::from("pesp-out")
}
fn backend_auto() -> BackendArg {
    BackendArg::Auto
}
fn branching_multi() -> BranchingArg {
    BranchingArg::Multi
}
fn score_auto() -> ScoreArg {
    ScoreArg::Auto
}
fn mode_lhs() -> ModeArg {
    ModeArg::Lhs
}
fn kind_bernoulli() -> KindArg {
    KindArg::Bernoulli
}
