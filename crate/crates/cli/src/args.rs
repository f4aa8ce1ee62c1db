use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use microsets::construct::{PicoParams, PlacementMode};
use microsets::EpsilonSpec;

#[derive(Debug, Parser)]
#[command(name = "microsets", version, about = "Exact finite-stage experiments on generalized microscopic sets")]
#[command(args_override_self = true)]
pub struct Cli {
    /// Output format; `tsv` is figure data (index, exponent) or a pass/fail table.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write the artifact here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// JSON file whose keys mirror the flags, plus `"subcommand"`.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Tsv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Emit a stage set with scheme metadata.
    Construct(ConstructArgs),
    /// Decide a finite cover problem exactly.
    Cover(CoverArgs),
    /// Run a cover-transforming procedure.
    Transform(TransformArgs),
    /// Defeat candidate covers with adversary chains.
    Witness(WitnessArgs),
    /// End-to-end "not an ideal" run.
    Demo(DemoArgs),
    /// Run the invariant suite and print a pass/fail table.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SchemeKind {
    Nano,
    Pico,
    Rational,
    Spacing,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    UniformSlot,
    ExactStage,
}

impl From<Mode> for PlacementMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::UniformSlot => PlacementMode::UniformSlot,
            Mode::ExactStage => PlacementMode::ExactStage,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct PicoArgs {
    /// Refinement steps built.
    #[arg(long, default_value_t = 2)]
    pub steps: u32,
    #[arg(long, default_value_t = 1024)]
    pub index_horizon: u64,
    #[arg(long, default_value_t = 5)]
    pub root_levels: u32,
}

impl PicoArgs {
    pub fn params(&self) -> PicoParams {
        PicoParams { steps: self.steps, index_horizon: self.index_horizon, root_levels: self.root_levels }
    }
}

#[derive(Debug, Args)]
pub struct ConstructArgs {
    #[arg(long, value_enum)]
    pub scheme: SchemeKind,
    /// Nano stage, pico level, or rational stage `n`.
    #[arg(long, default_value_t = 1)]
    pub depth: u32,
    #[arg(long, value_enum, default_value = "uniform-slot")]
    pub mode: Mode,
    #[command(flatten)]
    pub pico: PicoArgs,
    /// Rational scheme family.
    #[arg(long, default_value = "nano")]
    pub family: String,
    #[arg(long, default_value_t = 2)]
    pub base: u32,
    /// Rational intervals listed.
    #[arg(long, default_value_t = 16)]
    pub count: u64,
    /// Spacing level `m`.
    #[arg(long, default_value_t = 0)]
    pub m: u64,
    /// Spacing blocks `B`.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub blocks: Vec<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Solver {
    Dp,
    Greedy,
}

#[derive(Debug, Args)]
pub struct CoverArgs {
    /// Problem JSON `{target, budgets}`; otherwise built from the flags below.
    #[arg(long)]
    pub problem: Option<PathBuf>,
    /// Nano stage used as the target.
    #[arg(long, default_value_t = 1)]
    pub depth: u32,
    #[arg(long, value_enum, default_value = "uniform-slot")]
    pub mode: Mode,
    #[arg(long, default_value = "nano")]
    pub family: String,
    /// `1/d` or `b^-t`.
    #[arg(long, default_value = "1/4")]
    pub eps: String,
    #[arg(long, default_value_t = 8)]
    pub count: usize,
    #[arg(long, value_delimiter = ',')]
    pub banned: Vec<usize>,
    #[arg(long, value_enum, default_value = "dp")]
    pub solver: Solver,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Op {
    Shift,
    Sigma,
    Decompose,
    Merge,
    Null,
}

#[derive(Debug, Args)]
pub struct TransformArgs {
    #[arg(long, value_enum)]
    pub op: Op,
    /// Stage JSON files: a `construct` output or a bare interval set.
    #[arg(long)]
    pub input: Vec<PathBuf>,
    /// Use nano stages `0..=depth` as the first source.
    #[arg(long)]
    pub nano: bool,
    #[arg(long, default_value_t = 1)]
    pub depth: u32,
    #[arg(long, value_enum, default_value = "uniform-slot")]
    pub mode: Mode,
    #[arg(long, default_value = "nano")]
    pub family: String,
    /// Use the `m`-shifted family `e(k) = e(⌊k/m⌋)`.
    #[arg(long)]
    pub spread: Option<u64>,
    #[arg(long, default_value = "1/2")]
    pub eps: String,
    /// Shift past this index.
    #[arg(long, default_value_t = 0)]
    pub k: u64,
    /// Decomposition parts.
    #[arg(long, default_value_t = 2)]
    pub m: u64,
    /// Decomposition blocks beyond the first.
    #[arg(long, default_value_t = 1)]
    pub levels: u32,
    /// Integer points: extra sources for `sigma`, the set `B` for `merge`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub points: Vec<i64>,
    /// Merge case: 1 (compact pieces) or 2 (nested rows).
    #[arg(long, default_value_t = 2)]
    pub case: u8,
    /// Rational rows for case 2, input rows for `null`.
    #[arg(long, default_value_t = 3)]
    pub rows: u32,
    #[arg(long, default_value_t = 8)]
    pub cols: u64,
    #[arg(long, default_value_t = 4)]
    pub table_rows: usize,
    #[arg(long, default_value_t = 4)]
    pub table_cols: usize,
    /// Random null-cover input; parametric without it.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum WitnessScheme {
    Nano,
    Pico,
}

#[derive(Debug, Args)]
pub struct WitnessArgs {
    #[arg(long, value_enum)]
    pub scheme: WitnessScheme,
    /// Required unless `--placement` is given.
    #[arg(long)]
    pub seed: Option<u64>,
    /// JSON list of placed budgets (`null` for unused) to defeat.
    #[arg(long)]
    pub placement: Option<PathBuf>,
    #[arg(long, default_value_t = 6)]
    pub candidates: usize,
    #[arg(long, default_value_t = 16)]
    pub budgets: usize,
    /// Chain depth.
    #[arg(long, default_value_t = 3)]
    pub depth: usize,
    /// Withheld index `N` (pico).
    #[arg(long, default_value_t = 1)]
    pub banned: usize,
    #[arg(long, value_enum, default_value = "uniform-slot")]
    pub mode: Mode,
    #[command(flatten)]
    pub pico: PicoArgs,
}

#[derive(Debug, Args)]
pub struct DemoArgs {
    #[arg(long, value_enum)]
    pub kind: WitnessScheme,
    /// Nano stage split into parts, or pico chain depth.
    #[arg(long)]
    pub depth: Option<u32>,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub candidates: Option<usize>,
    #[arg(long)]
    pub budgets: Option<usize>,
    /// Nano: `t` values for the part covers at `ε = 2^(−t)`.
    #[arg(long, value_delimiter = ',')]
    pub eps: Vec<u64>,
    /// Pico: withheld indices.
    #[arg(long, value_delimiter = ',')]
    pub banned: Vec<usize>,
    #[command(flatten)]
    pub pico: PicoArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Seed for the randomized checks.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// `1/d` or `b^-t`.
pub fn parse_eps(s: &str, base: u32) -> Result<EpsilonSpec> {
    let s = s.trim();
    if let Some(d) = s.strip_prefix("1/") {
        let d: u64 = d.parse().with_context(|| format!("bad epsilon {s:?}"))?;
        return Ok(EpsilonSpec::from_reciprocal(base, d)?);
    }
    if let Some((b, t)) = s.split_once("^-") {
        let b: u32 = b.parse().with_context(|| format!("bad epsilon base in {s:?}"))?;
        if b != base {
            bail!("epsilon {s:?} is not a power of the base {base}");
        }
        let t: u64 = t.parse().with_context(|| format!("bad epsilon exponent in {s:?}"))?;
        return Ok(EpsilonSpec::new(b, t)?);
    }
    bail!("epsilon must look like 1/d or b^-t, got {s:?}")
}

/// Rewrites `--config file.json` into flags, placed before the remaining
/// command line so explicit flags win.
pub fn expand_config(argv: Vec<String>) -> Result<Vec<String>> {
    let Some(pos) = argv.iter().position(|a| a == "--config" || a.starts_with("--config=")) else {
        return Ok(argv);
    };
    let (path, drop) = match argv[pos].strip_prefix("--config=") {
        Some(p) => (p.to_string(), 1),
        None => (argv.get(pos + 1).cloned().context("--config needs a path")?, 2),
    };
    let text = std::fs::read_to_string(&path).with_context(|| format!("reading config {path}"))?;
    let cfg: serde_json::Map<String, serde_json::Value> =
        serde_json::from_str(&text).with_context(|| format!("config {path} is not a JSON object"))?;
    let sub = cfg.get("subcommand").and_then(|v| v.as_str()).context("config needs a \"subcommand\" string")?;

    let mut rest: Vec<String> = argv[1..].to_vec();
    rest.drain(pos - 1..pos - 1 + drop);
    let mut out = vec![argv[0].clone()];
    if rest.first().map(|a| a == sub).unwrap_or(false) {
        rest.remove(0);
    }
    out.push(sub.to_string());
    for (key, val) in &cfg {
        if key == "subcommand" {
            continue;
        }
        let flag = format!("--{}", key.replace('_', "-"));
        push_value(&mut out, &flag, val)?;
    }
    out.extend(rest);
    Ok(out)
}

fn push_value(out: &mut Vec<String>, flag: &str, val: &serde_json::Value) -> Result<()> {
    use serde_json::Value;
    match val {
        Value::Null | Value::Bool(false) => {}
        Value::Bool(true) => out.push(flag.to_string()),
        Value::Number(n) => out.push(format!("{flag}={n}")),
        Value::String(s) => out.push(format!("{flag}={s}")),
        Value::Array(items) => {
            for v in items {
                push_value(out, flag, v)?;
            }
        }
        Value::Object(_) => bail!("config value for {flag} must not be an object"),
    }
    Ok(())
}
