//! The `nodal-lab` command line: JSON configs with flag overrides, JSON or
//! CSV output that embeds the resolved configuration and seed.

mod commands;
mod selftest;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::field::{FieldOracle, FieldSpec};
use crate::nodal::ModePattern;

pub use selftest::{selftest, Check, Sabotage, SelftestReport};

#[derive(Debug, Parser)]
#[command(name = "nodal-lab", version, about = "Frequency, doubling-index and nodal-set experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Profile of H and beta on a geometric grid of radii.
    Frequency(commands::FrequencyArgs),
    /// Doubling index of a ball or a cube.
    Doubling(commands::DoublingArgs),
    /// Frequency window (plateau layer) and optional growth diagnostics.
    Window(commands::WindowArgs),
    /// High-index subcube census over levels A, A^2, ..., A^k.
    SubdivideCount(commands::SubdivideArgs),
    /// Exact search and re-verification of the binomial-tail threshold k0.
    TailCheck(commands::TailArgs),
    /// Exact and simulated distribution of the iteration process.
    IterateSim(commands::IterateArgs),
    /// Tunnel construction with sign-change certificates and packed balls.
    Tunnels(commands::TunnelArgs),
    /// Measure of the nodal set in a ball.
    NodalMeasure(commands::NodalArgs),
    /// Nodal measure against sqrt(lambda) for torus eigenfunctions.
    YauCheck(commands::YauArgs),
    /// Density of the zero set of a torus eigenfunction.
    DensityCheck(commands::DensityArgs),
    /// Nodal measure ratio against the frequency for random harmonic families.
    FRatio(commands::FRatioArgs),
    /// Built-in examples and fast invariants.
    Selftest(selftest::SelftestArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// JSON file with the command configuration; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output file (stdout when absent). With CSV output the JSON summary
    /// goes to the same path with `.json` appended.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

/// Field source in a config file: a preset string or a full spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FieldSource {
    Preset(String),
    Spec(FieldSpec),
}

impl FieldSource {
    pub fn load(&self) -> Result<FieldOracle> {
        match self {
            FieldSource::Spec(s) => FieldOracle::from_spec(s),
            FieldSource::Preset(s) => parse_field(s),
        }
    }
}

/// A path to a JSON field spec, or one of the presets
/// `homogeneous:DIM:DEG`, `coordinate:DIM`, `random:DIM:DEG:SEED`,
/// `grid:K`, `single:DIM:K`.
pub fn parse_field(s: &str) -> Result<FieldOracle> {
    let path = Path::new(s);
    if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::Invalid(format!("{s}: {e}")))?;
        let spec: FieldSpec = serde_json::from_str(&text).map_err(|e| LabError::Invalid(format!("{s}: {e}")))?;
        return FieldOracle::from_spec(&spec);
    }
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || LabError::Invalid(format!("unknown field preset or missing file: {s:?}"));
    let num = |i: usize| -> Result<i64> { parts.get(i).ok_or_else(bad)?.parse().map_err(|_| bad()) };
    match (parts[0], parts.len()) {
        ("homogeneous", 3) => FieldOracle::homogeneous(num(1)? as usize, num(2)? as u32),
        ("coordinate", 2) => FieldOracle::coordinate(num(1)? as usize),
        ("random", 4) => FieldOracle::random_harmonic(num(1)? as usize, num(2)? as u32, num(3)? as u64),
        ("grid", 2) => ModePattern::Grid.field(2, num(1)?),
        ("single", 3) => ModePattern::Single.field(num(1)? as usize, num(2)?),
        _ => Err(bad()),
    }
}

pub fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|x| x.trim().parse().map_err(|_| LabError::Invalid(format!("bad list entry {x:?} in {s:?}"))))
        .collect()
}

pub fn load_config<T: DeserializeOwned + Default>(path: &Option<PathBuf>) -> Result<T> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| LabError::Invalid(format!("{}: {e}", p.display())))?;
            serde_json::from_str(&text).map_err(|e| LabError::Invalid(format!("{}: {e}", p.display())))
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Envelope<C: Serialize, R: Serialize> {
    pub command: &'static str,
    pub seed: u64,
    pub config: C,
    pub result: R,
}

/// What a command produced: the JSON document, an optional CSV table and
/// the exit code (3 when the result is partial).
pub struct Outcome {
    pub json: String,
    pub csv: Option<String>,
    pub exit: i32,
}

impl Outcome {
    pub fn new<C: Serialize, R: Serialize>(command: &'static str, seed: u64, config: C, result: R, csv: Option<String>) -> Result<Self> {
        let env = Envelope { command, seed, config, result };
        let json = serde_json::to_string_pretty(&env).map_err(|e| LabError::Invalid(e.to_string()))? + "\n";
        Ok(Outcome { json, csv, exit: 0 })
    }

    pub fn partial(mut self, partial: bool) -> Self {
        if partial {
            self.exit = 3;
        }
        self
    }
}

pub fn csv_table<S: Serialize>(rows: &[S]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| LabError::Invalid(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| LabError::Invalid(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| LabError::Invalid(e.to_string()))
}

fn emit(out: &Option<PathBuf>, format: Format, o: &Outcome) -> std::io::Result<()> {
    let (primary, sidecar) = match (format, &o.csv) {
        (Format::Csv, Some(csv)) => (csv.as_str(), Some(o.json.as_str())),
        _ => (o.json.as_str(), None),
    };
    match out {
        None => std::io::stdout().write_all(primary.as_bytes()),
        Some(path) => {
            std::fs::write(path, primary)?;
            if let Some(json) = sidecar {
                let mut p = path.clone().into_os_string();
                p.push(".json");
                std::fs::write(PathBuf::from(p), json)?;
            }
            Ok(())
        }
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var("NODAL_LAB_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        // A pool built earlier in the process wins; that only happens in tests.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

/// Parses `argv` and runs the subcommand: 0 on success, 1 on usage errors,
/// 2 on precondition errors, 3 on budget or convergence failures.
pub fn run<I: IntoIterator<Item = OsString>>(argv: I) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    configure_threads();
    let (common, result) = match cli.command {
        Command::Frequency(a) => (a.common.clone(), commands::frequency(a)),
        Command::Doubling(a) => (a.common.clone(), commands::doubling(a)),
        Command::Window(a) => (a.common.clone(), commands::window(a)),
        Command::SubdivideCount(a) => (a.common.clone(), commands::subdivide(a)),
        Command::TailCheck(a) => (a.common.clone(), commands::tail(a)),
        Command::IterateSim(a) => (a.common.clone(), commands::iterate(a)),
        Command::Tunnels(a) => (a.common.clone(), commands::tunnels(a)),
        Command::NodalMeasure(a) => (a.common.clone(), commands::nodal(a)),
        Command::YauCheck(a) => (a.common.clone(), commands::yau(a)),
        Command::DensityCheck(a) => (a.common.clone(), commands::density(a)),
        Command::FRatio(a) => (a.common.clone(), commands::f_ratio(a)),
        Command::Selftest(a) => (a.common.clone(), selftest::command(a)),
    };
    match result {
        Ok((default_format, outcome)) => {
            let format = common.format.unwrap_or(default_format);
            if let Err(e) = emit(&common.out, format, &outcome) {
                eprintln!("error: cannot write output: {e}");
                return 2;
            }
            outcome.exit
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
