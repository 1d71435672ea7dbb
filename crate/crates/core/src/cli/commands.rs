//! Flag definitions, resolved configurations and handlers of the subcommands.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;
use serde::{Deserialize, Serialize};

use super::{csv_table, load_config, parse_field, parse_list, Common, FieldSource, Format, Outcome};
use crate::error::{LabError, Result};
use crate::field::FieldOracle;
use crate::geometry::{BallSpec, CubeSpec, Point};
use crate::growth::{
    order_for, doubling_index_ball_with, doubling_index_cube_with, frequency_profile, CandidateGrid, CubeIndex,
    SupOptions,
};
use crate::nodal::{
    density_check_with, f_ratio_experiment, nodal_measure_with, yau_experiment, DensityOptions, FRatioConfig, ModePattern,
    NodalOptions, YauConfig,
};
use crate::subdivision::{
    claim_k0_search, iterated_census, parse_rational, simulate_iteration_process, verify_k0, CensusOptions, ThresholdRule,
};
use crate::tunnels::{layer_growth_report, run_tunnel_construction, TunnelRunConfig};
use crate::windows::{find_frequency_window, WindowOptions};

type Handled = Result<(Format, Outcome)>;

macro_rules! set {
    ($cfg:expr, $args:expr; $($field:ident),*) => {
        $(if let Some(v) = $args.$field.clone() { $cfg.$field = v; })*
    };
}

fn list_flag<T: std::str::FromStr>(s: &Option<String>) -> Result<Option<Vec<T>>> {
    s.as_deref().map(parse_list).transpose()
}

/// Field from the flag (wins) or the config, with the resolved spec put
/// back into the config.
fn resolve_field(flag: &Option<String>, slot: &mut Option<FieldSource>) -> Result<FieldOracle> {
    let f = match (flag, slot.as_ref()) {
        (Some(s), _) => parse_field(s)?,
        (None, Some(src)) => src.load()?,
        (None, None) => return Err(LabError::Invalid("a field is required (--field)".into())),
    };
    *slot = Some(FieldSource::Spec(f.to_spec()));
    Ok(f)
}

fn resolve_center(slot: &mut Option<Vec<f64>>, dim: usize) -> Result<Point> {
    let c = slot.get_or_insert_with(|| vec![0.0; dim]).clone();
    if c.len() != dim {
        return Err(LabError::DimensionMismatch { expected: dim, got: c.len() });
    }
    Point::new(c)
}

fn field_seed(f: &FieldOracle) -> u64 {
    f.seed().unwrap_or(0)
}

// ---------------------------------------------------------------- frequency

#[derive(Debug, Args)]
pub struct FrequencyArgs {
    #[command(flatten)]
    pub common: Common,
    /// Field JSON file or preset.
    #[arg(long)]
    field: Option<String>,
    /// Comma-separated center coordinates.
    #[arg(long, allow_hyphen_values = true)]
    center: Option<String>,
    #[arg(long)]
    rmin: Option<f64>,
    #[arg(long)]
    rmax: Option<f64>,
    #[arg(long)]
    count: Option<usize>,
    #[arg(long)]
    order: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrequencyConfig {
    field: Option<FieldSource>,
    center: Option<Vec<f64>>,
    rmin: f64,
    rmax: f64,
    count: usize,
    order: Option<usize>,
}

impl Default for FrequencyConfig {
    fn default() -> Self {
        FrequencyConfig { field: None, center: None, rmin: 0.1, rmax: 1.0, count: 64, order: None }
    }
}

pub fn frequency(a: FrequencyArgs) -> Handled {
    let mut c: FrequencyConfig = load_config(&a.common.config)?;
    set!(c, a; rmin, rmax, count);
    if a.order.is_some() {
        c.order = a.order;
    }
    if let Some(v) = list_flag(&a.center)? {
        c.center = Some(v);
    }
    let f = resolve_field(&a.field, &mut c.field)?;
    let x = resolve_center(&mut c.center, f.dim())?;
    let order = *c.order.get_or_insert(order_for(&f));
    let profile = frequency_profile(&f, &x, c.rmin, c.rmax, c.count, order)?;
    let csv = csv_table(&profile.samples)?;
    Ok((Format::Csv, Outcome::new("frequency", field_seed(&f), c, profile, Some(csv))?))
}

// ----------------------------------------------------------------- doubling

#[derive(Debug, Args)]
pub struct DoublingArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    field: Option<String>,
    /// Ball center (with --radius).
    #[arg(long, allow_hyphen_values = true)]
    center: Option<String>,
    #[arg(long)]
    radius: Option<f64>,
    /// Cube minimum corner (with --side).
    #[arg(long, allow_hyphen_values = true)]
    cube_min: Option<String>,
    #[arg(long)]
    side: Option<f64>,
    #[arg(long)]
    centers_per_side: Option<usize>,
    #[arg(long)]
    radii_count: Option<usize>,
    #[arg(long)]
    resolution: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DoublingConfig {
    field: Option<FieldSource>,
    center: Option<Vec<f64>>,
    radius: Option<f64>,
    cube_min: Option<Vec<f64>>,
    side: Option<f64>,
    centers_per_side: usize,
    radii_count: usize,
    resolution: usize,
}

impl Default for DoublingConfig {
    fn default() -> Self {
        DoublingConfig {
            field: None,
            center: None,
            radius: None,
            cube_min: None,
            side: None,
            centers_per_side: 3,
            radii_count: 3,
            resolution: 64,
        }
    }
}

#[derive(Debug, Serialize)]
struct DoublingResult {
    /// `log2(sup_{B(x,2r)} |u| / sup_{B(x,r)} |u|)`.
    ball_index: Option<f64>,
    /// Natural-log cube index and its maximising ball.
    cube_index: Option<CubeIndex>,
}

pub fn doubling(a: DoublingArgs) -> Handled {
    let mut c: DoublingConfig = load_config(&a.common.config)?;
    set!(c, a; centers_per_side, radii_count, resolution);
    if a.radius.is_some() {
        c.radius = a.radius;
    }
    if a.side.is_some() {
        c.side = a.side;
    }
    if let Some(v) = list_flag(&a.center)? {
        c.center = Some(v);
    }
    if let Some(v) = list_flag(&a.cube_min)? {
        c.cube_min = Some(v);
    }
    let f = resolve_field(&a.field, &mut c.field)?;
    let result = match (c.radius, c.side) {
        (Some(r), None) => {
            let x = resolve_center(&mut c.center, f.dim())?;
            let v = doubling_index_ball_with(&f, &x, r, c.resolution, &SupOptions::default())?;
            DoublingResult { ball_index: Some(v), cube_index: None }
        }
        (None, Some(side)) => {
            let min = c.cube_min.clone().ok_or_else(|| LabError::Invalid("--side needs --cube-min".into()))?;
            let q = CubeSpec::new(Point::new(min)?, side)?;
            let mut grid = CandidateGrid::for_cube(&q, c.centers_per_side, c.radii_count)?;
            grid.resolution = c.resolution;
            DoublingResult { ball_index: None, cube_index: Some(doubling_index_cube_with(&f, &q, &grid)?) }
        }
        _ => return Err(LabError::Invalid("give exactly one of --radius or --side".into())),
    };
    Ok((Format::Json, Outcome::new("doubling", field_seed(&f), c, result, None)?))
}

// ------------------------------------------------------------------- window

#[derive(Debug, Args)]
pub struct WindowArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    field: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    center: Option<String>,
    #[arg(long)]
    r: Option<f64>,
    /// Lower gate on beta(p, r/2).
    #[arg(long)]
    gate: Option<f64>,
    #[arg(long)]
    verification_samples: Option<usize>,
    /// Also report implied growth constants at this delta.
    #[arg(long)]
    delta: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WindowConfig {
    field: Option<FieldSource>,
    center: Option<Vec<f64>>,
    r: f64,
    window: WindowOptions,
    delta: Option<f64>,
    resolution: usize,
}

impl Default for WindowConfig {
    fn default() -> Self {
        WindowConfig { field: None, center: None, r: 0.5, window: WindowOptions::default(), delta: None, resolution: 64 }
    }
}

pub fn window(a: WindowArgs) -> Handled {
    let mut c: WindowConfig = load_config(&a.common.config)?;
    set!(c, a; r);
    if let Some(g) = a.gate {
        c.window.gate = g;
    }
    if let Some(v) = a.verification_samples {
        c.window.verification_samples = v;
    }
    if a.delta.is_some() {
        c.delta = a.delta;
    }
    if let Some(v) = list_flag(&a.center)? {
        c.center = Some(v);
    }
    let f = resolve_field(&a.field, &mut c.field)?;
    let p = resolve_center(&mut c.center, f.dim())?;
    let w = find_frequency_window(&f, &p, c.r, &c.window)?;
    let diagnostics = c.delta.map(|d| layer_growth_report(&f, &p, &w, d, c.resolution)).transpose()?;
    let result = serde_json::json!({ "window": w, "diagnostics": diagnostics });
    Ok((Format::Json, Outcome::new("window", field_seed(&f), c, result, None)?))
}

// ---------------------------------------------------------- subdivide-count

#[derive(Debug, Args)]
pub struct SubdivideArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    field: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    cube_min: Option<String>,
    #[arg(long)]
    side: Option<f64>,
    /// Branching factor A; levels are B = A, A^2, ..., A^k.
    #[arg(long = "A", alias = "a")]
    a: Option<usize>,
    #[arg(long)]
    levels: Option<u32>,
    /// Fixed threshold.
    #[arg(long, conflicts_with_all = ["relative", "log_decay"])]
    threshold: Option<f64>,
    /// Threshold as a fraction of N(Q).
    #[arg(long, conflicts_with = "log_decay")]
    relative: Option<f64>,
    /// `c1,N0` for max(N(Q) 2^(-c1 ln B / ln ln B), N0).
    #[arg(long)]
    log_decay: Option<String>,
    #[arg(long)]
    centers_per_side: Option<usize>,
    #[arg(long)]
    radii_count: Option<usize>,
    #[arg(long)]
    resolution: Option<usize>,
    #[arg(long)]
    budget: Option<u128>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SubdivideConfig {
    field: Option<FieldSource>,
    cube_min: Option<Vec<f64>>,
    side: f64,
    #[serde(rename = "A")]
    a: usize,
    levels: u32,
    rule: ThresholdRule,
    census: CensusOptions,
}

impl Default for SubdivideConfig {
    fn default() -> Self {
        SubdivideConfig {
            field: None,
            cube_min: None,
            side: 2.0,
            a: 4,
            levels: 3,
            rule: ThresholdRule::Relative { factor: 0.8, floor: 0.0 },
            census: CensusOptions::default(),
        }
    }
}

#[derive(Debug, Serialize)]
struct CensusRow {
    level: u32,
    #[serde(rename = "B")]
    b: usize,
    threshold: f64,
    count_above: usize,
    fraction: f64,
    parent_index: f64,
}

pub fn subdivide(a: SubdivideArgs) -> Handled {
    let mut c: SubdivideConfig = load_config(&a.common.config)?;
    set!(c, a; side, a, levels);
    if let Some(v) = list_flag(&a.cube_min)? {
        c.cube_min = Some(v);
    }
    if let Some(v) = a.threshold {
        c.rule = ThresholdRule::Fixed { value: v };
    }
    if let Some(v) = a.relative {
        c.rule = ThresholdRule::Relative { factor: v, floor: 0.0 };
    }
    if let Some(v) = list_flag::<f64>(&a.log_decay)? {
        let [c1, n0] = v[..] else { return Err(LabError::Invalid("--log-decay takes c1,N0".into())) };
        c.rule = ThresholdRule::LogDecay { c1, n0 };
    }
    let cen = &mut c.census;
    set!(cen, a; centers_per_side, radii_count, resolution, budget);
    let f = resolve_field(&a.field, &mut c.field)?;
    let min = c.cube_min.get_or_insert_with(|| vec![-0.5 * c.side; f.dim()]).clone();
    let q = CubeSpec::new(Point::new(min)?, c.side)?;
    let censuses = iterated_census(&f, &q, c.a, c.levels, &c.rule, &c.census)?;
    let rows: Vec<CensusRow> = censuses
        .iter()
        .enumerate()
        .map(|(i, s)| CensusRow {
            level: i as u32 + 1,
            b: s.b,
            threshold: s.threshold,
            count_above: s.count_above,
            fraction: s.fraction,
            parent_index: s.parent_index,
        })
        .collect();
    let csv = csv_table(&rows)?;
    Ok((Format::Json, Outcome::new("subdivide-count", field_seed(&f), c, censuses, Some(csv))?))
}

// --------------------------------------------------------------- tail-check

#[derive(Debug, Args)]
pub struct TailArgs {
    #[command(flatten)]
    pub common: Common,
    /// Probability as "num/den", integer or finite decimal.
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    kmax: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TailConfig {
    p: String,
    epsilon: f64,
    sigma: f64,
    kmax: u64,
}

impl Default for TailConfig {
    fn default() -> Self {
        TailConfig { p: "1/2".into(), epsilon: 0.5, sigma: 0.1, kmax: 200 }
    }
}

pub fn tail(a: TailArgs) -> Handled {
    let mut c: TailConfig = load_config(&a.common.config)?;
    set!(c, a; p, epsilon, sigma, kmax);
    let p = parse_rational(&c.p)?;
    let params = claim_k0_search(&p, c.epsilon, c.sigma, c.kmax)?;
    let verified = verify_k0(&p, c.epsilon, c.sigma, params.k0, c.kmax)?;
    let result = serde_json::json!({
        "k0": params.k0,
        "verified": verified,
        "largest_violation": params.largest_violation,
        "pairs_checked": params.pairs_checked,
        "p": params.p,
    });
    let out = Outcome::new("tail-check", 0, c, result, None)?;
    Ok((Format::Json, out.partial(!verified)))
}

// -------------------------------------------------------------- iterate-sim

#[derive(Debug, Args)]
pub struct IterateArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    n_start: Option<f64>,
    #[arg(long = "N0", alias = "n0")]
    n0: Option<f64>,
    #[arg(long)]
    k: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IterateConfig {
    p: String,
    c: f64,
    n_start: f64,
    #[serde(rename = "N0")]
    n0: f64,
    k: u64,
    trials: u64,
    seed: u64,
}

impl Default for IterateConfig {
    fn default() -> Self {
        IterateConfig { p: "1/2".into(), c: 0.25, n_start: 1000.0, n0: 10.0, k: 30, trials: 10_000, seed: 0 }
    }
}

pub fn iterate(a: IterateArgs) -> Handled {
    let mut c: IterateConfig = load_config(&a.common.config)?;
    set!(c, a; p, c, n_start, n0, k, trials, seed);
    let p = parse_rational(&c.p)?;
    let dist = simulate_iteration_process(&p, c.c, c.n_start, c.n0, c.k, c.trials, c.seed)?;
    let rows = dist.rows();
    let csv = csv_table(&rows)?;
    let seed = c.seed;
    Ok((Format::Json, Outcome::new("iterate-sim", seed, c, rows, Some(csv))?))
}

// ------------------------------------------------------------------ tunnels

#[derive(Debug, Args)]
pub struct TunnelArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    field: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    center: Option<String>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    delta_scale: Option<f64>,
    #[arg(long)]
    delta_log_power: Option<f64>,
    #[arg(long)]
    divisor_log_power: Option<u32>,
    #[arg(long)]
    tunnels_per_side: Option<usize>,
    #[arg(long)]
    cubes_per_tunnel: Option<usize>,
    /// Use the exact asymptotic constants (infeasible at desk scale).
    #[arg(long)]
    paper_constants: bool,
    #[arg(long)]
    gate: Option<f64>,
    #[arg(long)]
    samples_per_cube: Option<usize>,
    /// Skip the good-tunnel classification.
    #[arg(long)]
    no_classify: bool,
    /// Restrict sign detection to good tunnels.
    #[arg(long)]
    require_good: bool,
    /// Also write the packed balls as CSV.
    #[arg(long)]
    balls_csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TunnelsConfig {
    field: Option<FieldSource>,
    center: Option<Vec<f64>>,
    r: f64,
    run: TunnelRunConfig,
}

impl Default for TunnelsConfig {
    fn default() -> Self {
        TunnelsConfig { field: None, center: None, r: 0.5, run: TunnelRunConfig::default() }
    }
}

pub fn tunnels(a: TunnelArgs) -> Handled {
    let mut c: TunnelsConfig = load_config(&a.common.config)?;
    set!(c, a; r);
    if let Some(v) = list_flag(&a.center)? {
        c.center = Some(v);
    }
    let t = &mut c.run.tunnel;
    set!(t, a; alpha, delta_scale, delta_log_power, divisor_log_power);
    if a.delta.is_some() {
        t.delta = a.delta;
    }
    if a.tunnels_per_side.is_some() {
        t.tunnels_per_side = a.tunnels_per_side;
    }
    if a.cubes_per_tunnel.is_some() {
        t.cubes_per_tunnel = a.cubes_per_tunnel;
    }
    t.paper_constants |= a.paper_constants;
    if let Some(g) = a.gate {
        c.run.window.gate = g;
    }
    if let Some(s) = a.samples_per_cube {
        c.run.samples_per_cube = s;
    }
    if a.no_classify {
        c.run.classify = false;
    }
    c.run.require_good |= a.require_good;
    let f = resolve_field(&a.field, &mut c.field)?;
    let p = resolve_center(&mut c.center, f.dim())?;
    let report = run_tunnel_construction(&f, &p, c.r, &c.run)?;
    let mut csv = String::new();
    let n = f.dim();
    let header: Vec<String> = (0..n).map(|i| format!("x{i}")).chain(["radius", "u_plus", "u_minus", "zero_value"].map(String::from)).collect();
    let _ = writeln!(csv, "{}", header.join(","));
    for b in &report.balls {
        let cert = &report.certificates[b.certificate];
        let mut fields: Vec<String> = b.ball.center.coords.iter().map(|v| v.to_string()).collect();
        fields.extend([b.ball.radius, cert.values.0, cert.values.1, cert.zero_value].map(|v| v.to_string()));
        let _ = writeln!(csv, "{}", fields.join(","));
    }
    if let Some(path) = &a.balls_csv {
        std::fs::write(path, &csv).map_err(|e| LabError::Invalid(format!("{}: {e}", path.display())))?;
    }
    Ok((Format::Json, Outcome::new("tunnels", field_seed(&f), c, report, Some(csv))?))
}

// ------------------------------------------------------------- nodal-measure

#[derive(Debug, Args)]
pub struct NodalArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    field: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    center: Option<String>,
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    cell_size: Option<f64>,
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long)]
    max_cells: Option<u128>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NodalConfig {
    field: Option<FieldSource>,
    center: Option<Vec<f64>>,
    radius: f64,
    cell_size: Option<f64>,
    nodal: NodalOptions,
}

impl Default for NodalConfig {
    fn default() -> Self {
        NodalConfig { field: None, center: None, radius: 1.0, cell_size: None, nodal: NodalOptions::default() }
    }
}

#[derive(Debug, Serialize)]
struct HistoryRow {
    cell_size: f64,
    measure: f64,
}

pub fn nodal(a: NodalArgs) -> Handled {
    let mut c: NodalConfig = load_config(&a.common.config)?;
    set!(c, a; radius);
    if a.cell_size.is_some() {
        c.cell_size = a.cell_size;
    }
    if let Some(v) = list_flag(&a.center)? {
        c.center = Some(v);
    }
    let o = &mut c.nodal;
    set!(o, a; tolerance, max_cells);
    let f = resolve_field(&a.field, &mut c.field)?;
    let x = resolve_center(&mut c.center, f.dim())?;
    let h = *c.cell_size.get_or_insert(c.radius / 16.0);
    let est = nodal_measure_with(&f, &BallSpec::new(x, c.radius)?, h, &c.nodal)?;
    let rows: Vec<HistoryRow> =
        est.refinement_history.iter().map(|&(cell_size, measure)| HistoryRow { cell_size, measure }).collect();
    let csv = csv_table(&rows)?;
    let partial = !est.converged;
    Ok((Format::Json, Outcome::new("nodal-measure", field_seed(&f), c, est, Some(csv))?.partial(partial)))
}

// ----------------------------------------------------------------- yau-check

#[derive(Debug, Args)]
pub struct YauArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    dim: Option<usize>,
    /// Comma-separated wave numbers.
    #[arg(long)]
    ks: Option<String>,
    #[arg(long, value_parser = parse_pattern)]
    pattern: Option<ModePattern>,
    #[arg(long, allow_hyphen_values = true)]
    center: Option<String>,
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    cell_fraction: Option<f64>,
    #[arg(long)]
    band_limit: Option<f64>,
}

fn parse_pattern(s: &str) -> std::result::Result<ModePattern, String> {
    match s {
        "single" => Ok(ModePattern::Single),
        "grid" => Ok(ModePattern::Grid),
        _ => Err(format!("unknown pattern {s:?} (single, grid)")),
    }
}

pub fn yau(a: YauArgs) -> Handled {
    let mut c: YauConfig = load_config(&a.common.config)?;
    set!(c, a; dim, pattern, radius, cell_fraction, band_limit);
    if let Some(v) = list_flag(&a.ks)? {
        c.ks = v;
    }
    if let Some(v) = list_flag(&a.center)? {
        c.center = v;
    } else if c.center.len() != c.dim {
        c.center.resize(c.dim, 5f64.sqrt() / 10.0);
    }
    let table = yau_experiment(&c)?;
    let csv = csv_table(&table.rows)?;
    Ok((Format::Json, Outcome::new("yau-check", 0, c, table, Some(csv))?))
}

// ------------------------------------------------------------- density-check

#[derive(Debug, Args)]
pub struct DensityArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    field: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    center: Option<String>,
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    probes: Option<usize>,
    /// Segment half length in units of 1/sqrt(lambda).
    #[arg(long)]
    half_length: Option<f64>,
    #[arg(long)]
    segment_samples: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DensityConfig {
    field: Option<FieldSource>,
    center: Option<Vec<f64>>,
    radius: f64,
    probes: usize,
    options: DensityOptions,
}

impl Default for DensityConfig {
    fn default() -> Self {
        DensityConfig { field: None, center: None, radius: 1.0, probes: 4096, options: DensityOptions::default() }
    }
}

pub fn density(a: DensityArgs) -> Handled {
    let mut c: DensityConfig = load_config(&a.common.config)?;
    set!(c, a; radius, probes);
    let o = &mut c.options;
    set!(o, a; half_length, segment_samples);
    if let Some(v) = list_flag(&a.center)? {
        c.center = Some(v);
    }
    let f = resolve_field(&a.field, &mut c.field)?;
    let x = resolve_center(&mut c.center, f.dim())?;
    let rep = density_check_with(&f, &BallSpec::new(x, c.radius)?, c.probes, &c.options)?;
    Ok((Format::Json, Outcome::new("density-check", field_seed(&f), c, rep, None)?))
}

// ------------------------------------------------------------------- f-ratio

#[derive(Debug, Args)]
pub struct FRatioArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    degrees: Option<String>,
    /// Comma-separated seeds.
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    cell_size: Option<f64>,
}

pub fn f_ratio(a: FRatioArgs) -> Handled {
    let mut c: FRatioConfig = load_config(&a.common.config)?;
    set!(c, a; dim, rho, cell_size);
    if let Some(v) = list_flag(&a.degrees)? {
        c.degrees = v;
    }
    if let Some(v) = list_flag(&a.seeds)? {
        c.seeds = v;
    }
    let table = f_ratio_experiment(&c)?;
    let csv = csv_table(&table.rows)?;
    let seed = c.seeds.first().copied().unwrap_or(0);
    Ok((Format::Json, Outcome::new("f-ratio", seed, c, table, Some(csv))?))
}
