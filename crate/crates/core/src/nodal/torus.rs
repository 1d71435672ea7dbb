//! Torus eigenfunction experiments: density of the zero set and the
//! `sqrt(lambda)` scaling of its measure in a fixed ball.

use std::collections::HashMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{march, nodal_measure_with, NodalOptions};
use crate::error::{LabError, Result};
use crate::field::{FieldOracle, Mode, Phase};
use crate::geometry::{distance, BallSpec, Point};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DensityOptions {
    /// Sign samples along each half segment before bisection.
    pub segment_samples: usize,
    /// Half length of each segment in units of `1/sqrt(lambda)`.
    pub half_length: f64,
}

impl Default for DensityOptions {
    fn default() -> Self {
        DensityOptions { segment_samples: 256, half_length: 2.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub lambda: f64,
    pub max_gap: f64,
    pub probe_count: usize,
    /// `max_gap sqrt(lambda)`.
    pub implied_c1: f64,
    /// Probes with no sign change on any of their segments; their gap is
    /// recorded as the segment half length.
    pub undetected: usize,
}

/// Additive recurrence with the generalised golden ratio of dimension `n`:
/// low-discrepancy points of `[0, 1)^n`.
fn kronecker(n: usize, i: usize) -> Vec<f64> {
    let mut phi = 2.0f64;
    for _ in 0..64 {
        phi = (1.0 + phi).powf(1.0 / (n as f64 + 1.0));
    }
    (1..=n).map(|a| (0.5 + i as f64 * phi.powi(-(a as i32))).fract()).collect()
}

/// `probes` points of the ball: its center when `probes == 1`, otherwise
/// the first points of a Kronecker sequence of the bounding cube that fall inside.
fn probe_points(ball: &BallSpec, probes: usize) -> Vec<Vec<f64>> {
    let c = ball.center.as_slice();
    if probes == 1 {
        return vec![c.to_vec()];
    }
    let mut out = Vec::with_capacity(probes);
    let mut i = 0;
    while out.len() < probes {
        let y: Vec<f64> = kronecker(c.len(), i).iter().zip(c).map(|(t, ci)| ci + ball.radius * (2.0 * t - 1.0)).collect();
        if distance(&y, c) <= ball.radius {
            out.push(y);
        }
        i += 1;
    }
    out
}

/// Distance from `y` to the first sign change along `y + t e`, `t in [0, len]`.
fn first_change(f: &FieldOracle, y: &[f64], axis: usize, dir: f64, len: f64, samples: usize) -> Option<f64> {
    let at = |t: f64| {
        let mut p = y.to_vec();
        p[axis] += dir * t;
        f.value(&p)
    };
    let v0 = at(0.0);
    if v0 == 0.0 {
        return Some(0.0);
    }
    let step = len / samples as f64;
    let mut prev = 0.0;
    for i in 1..=samples {
        let t = i as f64 * step;
        if at(t) * v0 <= 0.0 {
            let (mut lo, mut hi) = (prev, t);
            while hi - lo > 1e-12 * len {
                let mid = 0.5 * (lo + hi);
                if at(mid) * v0 > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Some(0.5 * (lo + hi));
        }
        prev = t;
    }
    None
}

pub fn density_check(f: &FieldOracle, ball: &BallSpec, probes: usize) -> Result<DensityReport> {
    density_check_with(f, ball, probes, &DensityOptions::default())
}

/// Largest distance from a probe to a sign change detected along the
/// coordinate segments through it (length `4/sqrt(lambda)` by default).
pub fn density_check_with(f: &FieldOracle, ball: &BallSpec, probes: usize, opts: &DensityOptions) -> Result<DensityReport> {
    let lambda = f.eigenvalue().ok_or(LabError::MissingEigenvalue)?;
    if probes == 0 {
        return Err(LabError::Invalid("probe count must be positive".into()));
    }
    if !(opts.half_length > 0.0) {
        return Err(LabError::Invalid("segment half length must be positive".into()));
    }
    let half = opts.half_length / lambda.sqrt();
    f.check_ball(ball.center.as_slice(), ball.radius + half)?;
    let n = f.dim();
    let samples = opts.segment_samples.max(2);
    let gaps: Vec<Option<f64>> = probe_points(ball, probes)
        .par_iter()
        .map(|y| {
            (0..n)
                .flat_map(|a| [1.0, -1.0].map(|d| (a, d)))
                .filter_map(|(a, d)| first_change(f, y, a, d, half, samples))
                .reduce(f64::min)
        })
        .collect();
    let undetected = gaps.iter().filter(|g| g.is_none()).count();
    let max_gap = gaps.iter().map(|g| g.unwrap_or(half)).fold(0.0, f64::max);
    Ok(DensityReport { lambda, max_gap, probe_count: probes, implied_c1: max_gap * lambda.sqrt(), undetected })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModePattern {
    /// `sin(k x1)`.
    Single,
    /// `sin(k x1) sin(k x2)`.
    Grid,
}

impl ModePattern {
    pub fn field(self, dim: usize, k: i64) -> Result<FieldOracle> {
        let pad = |v: Vec<i64>| {
            let mut v = v;
            v.resize(dim, 0);
            v
        };
        match self {
            ModePattern::Single => {
                FieldOracle::torus_eigenfunction(dim, &[Mode { k: pad(vec![k]), weight: 1.0, phase: Phase::Sin }])
            }
            ModePattern::Grid => FieldOracle::torus_eigenfunction(
                dim,
                &[
                    Mode { k: pad(vec![k, -k]), weight: 0.5, phase: Phase::Cos },
                    Mode { k: pad(vec![k, k]), weight: -0.5, phase: Phase::Cos },
                ],
            ),
        }
    }

    /// Coordinate axes whose hyperplanes `x_a in (pi/k) Z` make up the nodal set.
    fn axes(self) -> &'static [usize] {
        match self {
            ModePattern::Single => &[0],
            ModePattern::Grid => &[0, 1],
        }
    }
}

/// Exact measure of the nodal hyperplanes of the pattern inside the ball:
/// chord lengths `2 sqrt(R^2 - a^2)` in the plane, disk areas `pi (R^2 - a^2)` in space.
pub fn chord_sum(pattern: ModePattern, k: i64, ball: &BallSpec) -> f64 {
    let (r, n) = (ball.radius, ball.center.dim());
    let spacing = PI / k as f64;
    let mut total = 0.0;
    for &a in pattern.axes() {
        let c = ball.center.coords[a];
        let (lo, hi) = (((c - r) / spacing).ceil() as i64, ((c + r) / spacing).floor() as i64);
        for j in lo..=hi {
            let q = r * r - (j as f64 * spacing - c).powi(2);
            if q > 0.0 {
                total += if n == 2 { 2.0 * q.sqrt() } else { PI * q };
            }
        }
    }
    total
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct YauConfig {
    pub dim: usize,
    pub ks: Vec<i64>,
    pub pattern: ModePattern,
    pub center: Vec<f64>,
    pub radius: f64,
    /// Initial cell size as a fraction of the nodal spacing `pi/k`.
    pub cell_fraction: f64,
    pub nodal: NodalOptions,
    /// Largest admissible `ratio_max / ratio_min`.
    pub band_limit: f64,
}

impl Default for YauConfig {
    fn default() -> Self {
        YauConfig {
            dim: 2,
            ks: vec![5, 10, 20, 40],
            pattern: ModePattern::Grid,
            center: vec![2f64.sqrt() / 10.0, 3f64.sqrt() / 10.0],
            radius: 1.0,
            cell_fraction: 1.0 / 8.0,
            nodal: NodalOptions::default(),
            band_limit: 4.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YauRow {
    pub k: i64,
    pub lambda: f64,
    pub measure: f64,
    pub closed_form: f64,
    pub relative_error: f64,
    /// `measure / sqrt(lambda)`.
    pub ratio: f64,
    pub converged: bool,
    /// Greedy disjoint balls of radius `1/sqrt(lambda)` centred on the zero set.
    pub ball_count: usize,
    /// `ball_count / lambda^(n/2)`.
    pub ball_density: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YauTable {
    pub rows: Vec<YauRow>,
    pub ratio_min: Option<f64>,
    pub ratio_max: Option<f64>,
    pub band_ok: bool,
    /// `ball_density` at the smallest `k`.
    pub fitted_ball_density: Option<f64>,
    /// Every row has at least half the fitted density.
    pub balls_ok: bool,
}

/// Greedy packing over a hash grid of cell `2 rho`.
fn pack_count(points: &[Vec<f64>], rho: f64, ball: &BallSpec) -> usize {
    let key = |p: &[f64]| -> Vec<i64> { p.iter().map(|x| (x / (2.0 * rho)).floor() as i64).collect() };
    let mut grid: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    let mut kept: Vec<&[f64]> = Vec::new();
    let n = ball.center.dim();
    'points: for p in points {
        if distance(p, ball.center.as_slice()) + rho > ball.radius {
            continue;
        }
        let base = key(p);
        for off in 0..3usize.pow(n as u32) {
            let mut rem = off;
            let cell: Vec<i64> = base
                .iter()
                .map(|b| {
                    let d = (rem % 3) as i64 - 1;
                    rem /= 3;
                    b + d
                })
                .collect();
            if let Some(ids) = grid.get(&cell) {
                if ids.iter().any(|&i| distance(kept[i], p) <= 2.0 * rho) {
                    continue 'points;
                }
            }
        }
        grid.entry(base).or_default().push(kept.len());
        kept.push(p);
    }
    kept.len()
}

pub fn yau_experiment(cfg: &YauConfig) -> Result<YauTable> {
    if cfg.center.len() != cfg.dim {
        return Err(LabError::DimensionMismatch { expected: cfg.dim, got: cfg.center.len() });
    }
    let ball = BallSpec::new(Point { coords: cfg.center.clone() }, cfg.radius)?;
    let mut rows = Vec::new();
    for &k in &cfg.ks {
        if k <= 0 {
            return Err(LabError::Invalid(format!("wave number {k} must be positive")));
        }
        let f = cfg.pattern.field(cfg.dim, k)?;
        let lambda = f.eigenvalue().ok_or(LabError::MissingEigenvalue)?;
        let h0 = (cfg.cell_fraction * PI / k as f64).min(0.2 * cfg.radius);
        let est = nodal_measure_with(&f, &ball, h0, &cfg.nodal)?;
        let closed_form = chord_sum(cfg.pattern, k, &ball);
        let (_, points) = march(&f, ball.center.as_slice(), ball.radius, est.cell_size, true);
        let ball_count = pack_count(&points, 1.0 / lambda.sqrt(), &ball);
        rows.push(YauRow {
            k,
            lambda,
            measure: est.measure,
            closed_form,
            relative_error: (est.measure - closed_form).abs() / closed_form,
            ratio: est.measure / lambda.sqrt(),
            converged: est.converged,
            ball_count,
            ball_density: ball_count as f64 / lambda.powf(cfg.dim as f64 / 2.0),
        });
    }
    let ratio_min = rows.iter().map(|r| r.ratio).reduce(f64::min);
    let ratio_max = rows.iter().map(|r| r.ratio).reduce(f64::max);
    let band_ok = match (ratio_min, ratio_max) {
        (Some(lo), Some(hi)) => lo > 0.0 && hi / lo <= cfg.band_limit,
        _ => true,
    };
    let fitted_ball_density = rows.iter().min_by_key(|r| r.k).map(|r| r.ball_density);
    let balls_ok = fitted_ball_density.is_none_or(|c| rows.iter().all(|r| r.ball_density >= 0.5 * c));
    Ok(YauTable { rows, ratio_min, ratio_max, band_ok, fitted_ball_density, balls_ok })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_mode_density() {
        let k = 6;
        let f = ModePattern::Single.field(2, k).unwrap();
        let ball = BallSpec::new(Point::new(vec![0.1, 0.2]).unwrap(), 1.0).unwrap();
        let rep = density_check(&f, &ball, 4000).unwrap();
        assert_eq!(rep.undetected, 0);
        assert!((rep.implied_c1 - PI / 2.0).abs() < 0.02 * PI / 2.0, "{}", rep.implied_c1);
        assert!(rep.max_gap <= PI / (2.0 * k as f64) + 1e-9);
    }

    #[test]
    fn grid_density_with_long_segments() {
        // distance to the nearest nodal line peaks at pi/(2k) on cell centres
        let k = 5;
        let f = ModePattern::Grid.field(2, k).unwrap();
        let ball = BallSpec::new(Point::new(vec![0.1, 0.2]).unwrap(), 1.0).unwrap();
        let opts = DensityOptions { half_length: 4.0, ..Default::default() };
        let rep = density_check_with(&f, &ball, 20000, &opts).unwrap();
        assert_eq!(rep.undetected, 0);
        assert!((rep.implied_c1 - PI / 2f64.sqrt()).abs() < 0.02 * PI / 2f64.sqrt(), "{}", rep.implied_c1);
    }

    #[test]
    fn probe_at_a_zero() {
        let f = ModePattern::Single.field(2, 3).unwrap();
        let rep = density_check(&f, &BallSpec::new(Point::origin(2), 0.5).unwrap(), 1).unwrap();
        assert_eq!(rep.max_gap, 0.0);
    }

    #[test]
    fn chord_sum_of_a_centred_diameter() {
        let ball = BallSpec::new(Point::origin(2), 1.0).unwrap();
        // k = 1: lines x1 = j pi, only j = 0 meets the unit disk
        assert!((chord_sum(ModePattern::Single, 1, &ball) - 2.0).abs() < 1e-15);
        assert!((chord_sum(ModePattern::Grid, 1, &ball) - 4.0).abs() < 1e-15);
    }

    #[test]
    fn empty_k_list() {
        let t = yau_experiment(&YauConfig { ks: vec![], ..Default::default() }).unwrap();
        assert!(t.rows.is_empty() && t.band_ok && t.balls_ok);
    }
}
