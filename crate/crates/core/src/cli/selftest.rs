//! Built-in example suite: closed-form checks that need no input files.

use std::f64::consts::{E, PI};

use clap::{Args, ValueEnum};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{csv_table, Common, Format, Outcome};
use crate::error::Result;
use crate::field::FieldOracle;
use crate::geometry::{BallSpec, Point};
use crate::growth::{default_order, doubling_index_ball, frequency_beta, geometric_radii, surface_h};
use crate::nodal::{chord_sum, density_check, nodal_measure, ModePattern};
use crate::subdivision::{binomial_tail_exact, claim_k0_search, parse_rational, simulate_iteration_process, verify_k0};
use crate::tunnels::{TunnelConfig, TunnelParams};
use crate::windows::{find_plateau, SampledFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sabotage {
    /// Evaluate the spherical integrals with a one-point rule.
    QuadratureOrder1,
}

#[derive(Debug, Args)]
pub struct SelftestArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Deliberately corrupt one ingredient to see the suite fail.
    #[arg(long, value_enum)]
    sabotage: Option<Sabotage>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelftestReport {
    pub seed: u64,
    pub sabotage: Option<Sabotage>,
    pub checks: Vec<Check>,
    pub all_passed: bool,
}

fn close(got: f64, want: f64, tol: f64) -> bool {
    (got - want).abs() <= tol * want.abs().max(1.0)
}

fn check(name: &str, outcome: Result<(bool, String)>) -> Check {
    match outcome {
        Ok((passed, detail)) => Check { name: name.into(), passed, detail },
        Err(e) => Check { name: name.into(), passed: false, detail: format!("error: {e}") },
    }
}

pub fn selftest(seed: u64, sabotage: Option<Sabotage>) -> SelftestReport {
    let order = |dim: usize| if sabotage == Some(Sabotage::QuadratureOrder1) { 1 } else { default_order(dim) };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();

    checks.push(check("surface_H Re z^3, r = 1/2", (|| {
        let f = FieldOracle::homogeneous(2, 3)?;
        let h = surface_h(&f, &Point::origin(2), 0.5, order(2))?;
        let want = PI * 0.5f64.powi(7);
        Ok((close(h, want, 1e-12), format!("H = {h:e}, expected {want:e}")))
    })()));
    checks.push(check("surface_H x1 on the unit sphere", (|| {
        let f = FieldOracle::coordinate(3)?;
        let h = surface_h(&f, &Point::origin(3), 1.0, order(3))?;
        let want = 4.0 * PI / 3.0;
        Ok((close(h, want, 1e-12), format!("H = {h}, expected {want}")))
    })()));
    checks.push(check("surface_H constant 2 in R^3", (|| {
        let f = FieldOracle::constant(3, 2.0)?;
        let h = surface_h(&f, &Point::origin(3), 1.0, order(3))?;
        Ok((close(h, 16.0 * PI, 1e-12), format!("H = {h}, expected {}", 16.0 * PI)))
    })()));
    checks.push(check("beta of a degree-5 solid harmonic", (|| {
        let f = FieldOracle::homogeneous(3, 5)?;
        let b = frequency_beta(&f, &Point::origin(3), 0.7, order(3))?;
        Ok((close(b, 6.0, 1e-9), format!("beta = {b}, expected 6")))
    })()));
    checks.push(check("doubling index of Re z^4", (|| {
        let f = FieldOracle::homogeneous(2, 4)?;
        let v = doubling_index_ball(&f, &Point::origin(2), 0.5)?;
        Ok((close(v, 4.0, 1e-6), format!("index = {v}, expected 4")))
    })()));
    let degree = rng.random_range(3..=8);
    let fseed: u64 = rng.random();
    checks.push(check("beta nondecreasing for a seeded random harmonic", (|| {
        let f = FieldOracle::random_harmonic(2, degree, fseed)?;
        let x = Point::origin(2);
        let betas = geometric_radii(0.1, 1.0, 12)
            .into_iter()
            .map(|r| frequency_beta(&f, &x, r, order(2)))
            .collect::<Result<Vec<_>>>()?;
        let ok = betas.windows(2).all(|w| w[1] >= w[0] - 1e-6);
        Ok((ok, format!("degree {degree}, field seed {fseed}, beta range [{}, {}]", betas[0], betas[betas.len() - 1])))
    })()));
    let slope = 2.0 + 8.0 * rng.random::<f64>();
    checks.push(check("plateau sandwich on a seeded exponential", (|| {
        let g = SampledFunction::tabulate(0.0, 1.0, 20000, |t| E * (slope * t).exp())?;
        let p = find_plateau(&g)?;
        let (lo, hi) = (E * (slope * p.window.0).exp(), E * (slope * p.window.1).exp());
        let ok = lo >= p.n && hi <= E * p.n;
        Ok((ok, format!("slope {slope}, N = {}, window [{}, {}]", p.n, p.window.0, p.window.1)))
    })()));
    checks.push(check("binomial tail (1/2, 4, 2) = 5/16", (|| {
        let t = binomial_tail_exact(&parse_rational("1/2")?, 4, 2)?;
        let want = BigRational::new(5.into(), 16.into());
        Ok((t == want, format!("tail = {t}")))
    })()));
    checks.push(check("k0 search re-verified exactly", (|| {
        let p = parse_rational("1/2")?;
        let params = claim_k0_search(&p, 0.5, 0.1, 60)?;
        let ok = verify_k0(&p, 0.5, 0.1, params.k0, 60)?;
        Ok((ok, format!("k0 = {}", params.k0)))
    })()));
    let sim_seed: u64 = rng.random();
    checks.push(check("iteration process distribution sums to one", (|| {
        let d = simulate_iteration_process(&parse_rational("1/3")?, 0.5, 100.0, 5.0, 12, 200, sim_seed)?;
        let total = d.exact.iter().fold(BigRational::zero(), |a, b| a + b);
        let counted: u64 = d.counts.iter().sum();
        Ok((total == BigRational::one() && counted == 200, format!("simulation seed {sim_seed}")))
    })()));
    checks.push(check("nodal measure of x1 in the unit disk", (|| {
        let f = FieldOracle::coordinate(2)?;
        let m = nodal_measure(&f, &BallSpec::new(Point::origin(2), 1.0)?, 1.0 / 16.0)?.measure;
        Ok((close(m, 2.0, 1e-9), format!("measure = {m}, expected 2")))
    })()));
    checks.push(check("chord sum of sin(x1) in the unit disk", (|| {
        let c = chord_sum(ModePattern::Single, 1, &BallSpec::new(Point::origin(2), 1.0)?);
        Ok((close(c, 2.0, 1e-15), format!("sum = {c}")))
    })()));
    checks.push(check("density probe at a zero", (|| {
        let f = ModePattern::Single.field(2, 3)?;
        let r = density_check(&f, &BallSpec::new(Point::origin(2), 0.5)?, 1)?;
        Ok((r.max_gap == 0.0, format!("max_gap = {}", r.max_gap)))
    })()));
    checks.push(check("asymptotic constants flagged infeasible", (|| {
        let cfg = TunnelConfig { paper_constants: true, ..Default::default() };
        let p = TunnelParams::resolve(0.5, 1000.0, 2, &cfg)?;
        Ok((!p.feasible, format!("delta = {:e}", p.delta)))
    })()));

    let all_passed = checks.iter().all(|c| c.passed);
    SelftestReport { seed, sabotage, checks, all_passed }
}

#[derive(Serialize)]
struct Row<'a> {
    check: &'a str,
    result: &'static str,
    detail: &'a str,
}

pub fn command(a: SelftestArgs) -> Result<(Format, Outcome)> {
    let report = selftest(a.seed, a.sabotage);
    let rows: Vec<Row> = report
        .checks
        .iter()
        .map(|c| Row { check: &c.name, result: if c.passed { "pass" } else { "FAIL" }, detail: &c.detail })
        .collect();
    let csv = csv_table(&rows)?;
    let failed = !report.all_passed;
    let config = serde_json::json!({ "seed": a.seed, "sabotage": a.sabotage });
    Ok((Format::Csv, Outcome::new("selftest", a.seed, config, report, Some(csv))?.partial(failed)))
}
