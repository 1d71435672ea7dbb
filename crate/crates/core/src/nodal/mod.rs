//! `H^{n-1}` of nodal sets inside balls and the experiments built on it.

mod march;
mod torus;

pub use march::{march, Lattice};
pub use torus::{
    chord_sum, density_check, density_check_with, yau_experiment, DensityOptions, DensityReport, ModePattern, YauConfig,
    YauRow, YauTable,
};

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::field::FieldOracle;
use crate::geometry::{BallSpec, Point};
use crate::growth::{order_for, frequency_beta, sphere_directions, sup_norm, Region};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NodalOptions {
    /// Relative agreement of two successive refinements.
    pub tolerance: f64,
    /// Largest lattice (cells) a refinement may use.
    pub max_cells: u128,
}

impl Default for NodalOptions {
    fn default() -> Self {
        NodalOptions { tolerance: 0.01, max_cells: 1 << 24 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodalEstimate {
    pub region: BallSpec,
    pub measure: f64,
    pub cell_size: f64,
    /// `(cell_size, measure)` in refinement order.
    pub refinement_history: Vec<(f64, f64)>,
    pub converged: bool,
}

pub fn nodal_measure(f: &FieldOracle, region: &BallSpec, cell_size: f64) -> Result<NodalEstimate> {
    nodal_measure_with(f, region, cell_size, &NodalOptions::default())
}

/// Halves the cell size from `cell_size` until two successive measures
/// agree to the tolerance or the next lattice would exceed the budget.
pub fn nodal_measure_with(f: &FieldOracle, region: &BallSpec, cell_size: f64, opts: &NodalOptions) -> Result<NodalEstimate> {
    let n = f.dim();
    if !(2..=3).contains(&n) {
        return Err(LabError::UnsupportedDimension(n));
    }
    if region.center.dim() != n {
        return Err(LabError::DimensionMismatch { expected: n, got: region.center.dim() });
    }
    if !(cell_size > 0.0 && cell_size < region.radius / 4.0) {
        return Err(LabError::Precondition(format!("cell size {cell_size} must lie in (0, radius/4)")));
    }
    f.check_ball(region.center.as_slice(), region.radius)?;
    let c = region.center.as_slice();
    let mut history: Vec<(f64, f64)> = Vec::new();
    let mut h = cell_size;
    let mut converged = false;
    loop {
        let cells = Lattice::covering(c, region.radius, h).cell_count(n);
        if cells > opts.max_cells {
            if history.is_empty() {
                return Err(LabError::BudgetExceeded { requested: cells, budget: opts.max_cells });
            }
            break;
        }
        let (m, _) = march(f, c, region.radius, h, false);
        if let Some(&(_, prev)) = history.last() {
            if (m - prev).abs() <= opts.tolerance * m.max(prev) {
                converged = true;
            }
        }
        history.push((h, m));
        if converged {
            break;
        }
        h *= 0.5;
    }
    let &(cell_size, measure) = history.last().expect("at least one refinement");
    Ok(NodalEstimate { region: region.clone(), measure, cell_size, refinement_history: history, converged })
}

/// Zero test used for probe centers: `|u(x)| < 1e-10 sup_{B(x, rho)} |u|`.
pub fn vanishes_at(f: &FieldOracle, x: &Point, rho: f64) -> Result<bool> {
    let sup = sup_norm(f, &Region::Ball(BallSpec::new(x.clone(), rho)?), 32)?.value;
    Ok(f.value(x.as_slice()).abs() < 1e-10 * sup)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveBoundRecord {
    pub x: Vec<f64>,
    pub rho: f64,
    pub measure: NodalEstimate,
    /// `H^{n-1}(Z cap B(x, rho)) / rho^(n-1)`.
    pub ratio: f64,
    /// `beta(x, rho/2)`.
    pub beta: f64,
    /// `ratio beta^(n-1)`.
    pub implied_c1: f64,
    pub positive_ball: Option<BallSpec>,
    pub negative_ball: Option<BallSpec>,
}

/// Ball around the extremal sample of `sign * u` in `B(x, rho/2)` on which
/// every sample has that sign, starting at radius `rho/beta` and halving.
fn sign_ball(f: &FieldOracle, x: &Point, rho: f64, beta: f64, sign: f64) -> Result<Option<BallSpec>> {
    let n = f.dim();
    let m = 17usize;
    let mut best: Option<(f64, Vec<f64>)> = None;
    for k in 0..m.pow(n as u32) {
        let mut rem = k;
        let y: Vec<f64> = (0..n)
            .map(|a| {
                let i = rem % m;
                rem /= m;
                x.coords[a] + rho * 0.5 * (-1.0 + 2.0 * i as f64 / (m - 1) as f64)
            })
            .collect();
        if crate::geometry::distance(&y, &x.coords) > 0.5 * rho {
            continue;
        }
        let v = sign * f.value(&y);
        if v > 0.0 && best.as_ref().is_none_or(|(b, _)| v > *b) {
            best = Some((v, y));
        }
    }
    let Some((_, y)) = best else { return Ok(None) };
    let dirs = sphere_directions(n, 32);
    let mut t = rho / beta;
    for _ in 0..30 {
        let ok = (1..=4).all(|shell| {
            let s = t * shell as f64 / 4.0;
            dirs.iter().all(|d| {
                let p: Vec<f64> = (0..n).map(|a| y[a] + s * d[a]).collect();
                sign * f.value(&p) > 0.0
            })
        });
        if ok {
            return Ok(Some(BallSpec::new(Point { coords: y }, t)?));
        }
        t *= 0.5;
    }
    Ok(None)
}

pub fn naive_lower_bound_check(f: &FieldOracle, x: &Point, rho: f64, cell_size: f64, opts: &NodalOptions) -> Result<NaiveBoundRecord> {
    f.check_ball(x.as_slice(), rho)?;
    if !vanishes_at(f, x, rho)? {
        return Err(LabError::Precondition(format!("u(x) = {:e} does not vanish", f.value(x.as_slice()))));
    }
    let n = f.dim();
    let measure = nodal_measure_with(f, &BallSpec::new(x.clone(), rho)?, cell_size, opts)?;
    let ratio = measure.measure / rho.powi(n as i32 - 1);
    let beta = frequency_beta(f, x, 0.5 * rho, order_for(f))?;
    Ok(NaiveBoundRecord {
        x: x.coords.clone(),
        rho,
        ratio,
        beta,
        implied_c1: ratio * beta.powi(n as i32 - 1),
        positive_ball: sign_ball(f, x, rho, beta, 1.0)?,
        negative_ball: sign_ball(f, x, rho, beta, -1.0)?,
        measure,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FRatioConfig {
    pub dim: usize,
    pub degrees: Vec<u32>,
    pub seeds: Vec<u64>,
    pub rho: f64,
    pub cell_size: f64,
    pub nodal: NodalOptions,
}

impl Default for FRatioConfig {
    fn default() -> Self {
        FRatioConfig {
            dim: 2,
            degrees: vec![2, 4, 8, 16],
            seeds: (0..5).collect(),
            rho: 1.0,
            cell_size: 1.0 / 64.0,
            nodal: NodalOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FRatioRow {
    pub degree: u32,
    pub seed: u64,
    /// `beta(0, rho/2)`.
    pub beta: f64,
    /// `H^{n-1}(Z cap B(0, rho)) / rho^(n-1)`.
    pub ratio: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FRatioTable {
    pub rows: Vec<FRatioRow>,
    pub min_ratio: Option<f64>,
    /// Minimum over the rows of the smallest degree.
    pub low_degree_min: Option<f64>,
    /// No row falls below `low_degree_min`.
    pub never_below_low_degree: bool,
    /// Least-squares slope of `log2 ratio` against `ln beta / ln ln beta`
    /// (`ln ln` clamped below at 1); `None` with fewer than two distinct abscissae.
    pub trend_exponent: Option<f64>,
}

/// Seeded random harmonic polynomials without constant term, probed at the origin.
pub fn f_ratio_experiment(cfg: &FRatioConfig) -> Result<FRatioTable> {
    let origin = Point::origin(cfg.dim);
    let ball = BallSpec::new(origin.clone(), cfg.rho)?;
    let mut rows = Vec::new();
    for &degree in &cfg.degrees {
        for &seed in &cfg.seeds {
            let f = FieldOracle::random_harmonic_vanishing(cfg.dim, degree, seed)?;
            let est = nodal_measure_with(&f, &ball, cfg.cell_size, &cfg.nodal)?;
            let beta = frequency_beta(&f, &origin, 0.5 * cfg.rho, order_for(&f))?;
            rows.push(FRatioRow {
                degree,
                seed,
                beta,
                ratio: est.measure / cfg.rho.powi(cfg.dim as i32 - 1),
                converged: est.converged,
            });
        }
    }
    let min_ratio = rows.iter().map(|r| r.ratio).reduce(f64::min);
    let low = cfg.degrees.iter().min().copied();
    let low_degree_min = rows.iter().filter(|r| Some(r.degree) == low).map(|r| r.ratio).reduce(f64::min);
    let never_below_low_degree = match low_degree_min {
        Some(m) => rows.iter().all(|r| r.ratio >= m),
        None => true,
    };
    let pts: Vec<(f64, f64)> =
        rows.iter().map(|r| (r.beta.ln() / r.beta.ln().ln().max(1.0), r.ratio.log2())).collect();
    Ok(FRatioTable { trend_exponent: slope(&pts), rows, min_ratio, low_degree_min, never_below_low_degree })
}

/// Least-squares slope; `None` when the abscissae do not vary.
pub fn slope(pts: &[(f64, f64)]) -> Option<f64> {
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return None;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if !(sxx > 1e-300) {
        return None;
    }
    Some(pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planar_line_is_a_diameter() {
        let f = FieldOracle::coordinate(2).unwrap();
        let est = nodal_measure(&f, &BallSpec::new(Point::origin(2), 1.0).unwrap(), 1.0 / 16.0).unwrap();
        assert!(est.converged);
        assert!((est.measure - 2.0).abs() < 1e-12, "{}", est.measure);
    }

    #[test]
    fn history_is_strictly_refining() {
        let f = FieldOracle::homogeneous(2, 4).unwrap();
        let est = nodal_measure(&f, &BallSpec::new(Point::origin(2), 1.0).unwrap(), 0.2).unwrap();
        assert!(est.refinement_history.windows(2).all(|w| w[1].0 < w[0].0));
        assert!(est.measure >= 0.0);
    }

    #[test]
    fn nonvanishing_center_is_rejected() {
        let f = FieldOracle::constant(2, 1.0).unwrap();
        let e = naive_lower_bound_check(&f, &Point::origin(2), 1.0, 0.1, &NodalOptions::default()).unwrap_err();
        assert!(matches!(e, LabError::Precondition(_)));
    }

    #[test]
    fn oversize_cells_are_rejected() {
        let f = FieldOracle::coordinate(2).unwrap();
        assert!(nodal_measure(&f, &BallSpec::new(Point::origin(2), 1.0).unwrap(), 0.3).is_err());
    }

    #[test]
    fn empty_family() {
        let t = f_ratio_experiment(&FRatioConfig { degrees: vec![], ..Default::default() }).unwrap();
        assert!(t.rows.is_empty() && t.min_ratio.is_none());
    }
}
