//! Grid-and-ascent estimates of `sup |u|` over balls, spheres and cubes.
//!
//! Every estimate is the maximum of `|u|` over a deterministic sample set
//! followed by a local coordinate ascent from the best sample, so it is a
//! lower bound for the true supremum. For harmonic fields the maximum over a
//! closed ball is attained on its boundary sphere and only the sphere is
//! sampled.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::field::FieldOracle;
use crate::geometry::{fibonacci_sphere, BallSpec, CubeSpec};

/// Region over which a supremum is taken.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    Ball(BallSpec),
    Cube(CubeSpec),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupOptions {
    /// Relative change between successive levels below which refinement stops.
    pub rel_tol: f64,
    /// Coarsest level of the doubling ladder.
    pub base_resolution: usize,
    /// Finest level refinement may reach.
    pub max_resolution: usize,
}

impl Default for SupOptions {
    fn default() -> Self {
        SupOptions { rel_tol: 1e-3, base_resolution: 8, max_resolution: 4096 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupEstimate {
    pub value: f64,
    pub argmax: Vec<f64>,
    /// Finest resolution evaluated.
    pub resolution: usize,
    pub converged: bool,
}

/// Unit directions used at a given resolution: `resolution` equispaced
/// angles in the plane, a Fibonacci lattice of `resolution^2 / 4` points on
/// the 2-sphere, and a projected cube-surface lattice on the 3-sphere.
pub fn sphere_directions(dim: usize, resolution: usize) -> Arc<Vec<[f64; 4]>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<Vec<[f64; 4]>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("direction cache poisoned");
    guard
        .entry((dim, resolution))
        .or_insert_with(|| Arc::new(build_directions(dim, resolution)))
        .clone()
}

fn build_directions(dim: usize, resolution: usize) -> Vec<[f64; 4]> {
    let res = resolution.max(4);
    match dim {
        2 => (0..res)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / res as f64;
                [t.cos(), t.sin(), 0.0, 0.0]
            })
            .collect(),
        3 => fibonacci_sphere((res * res / 4).max(16))
            .into_iter()
            .map(|[x, y, z]| [x, y, z, 0.0])
            .collect(),
        _ => {
            let m = (res / 8).max(3);
            let mut out = Vec::new();
            let step = 2.0 / (m - 1) as f64;
            let mut idx = [0usize; 4];
            loop {
                let v: Vec<f64> = idx.iter().map(|&i| -1.0 + step * i as f64).collect();
                let on_surface = idx.iter().any(|&i| i == 0 || i == m - 1);
                if on_surface {
                    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                    out.push([v[0] / n, v[1] / n, v[2] / n, v[3] / n]);
                }
                let mut axis = 0;
                loop {
                    if axis == 4 {
                        return out;
                    }
                    idx[axis] += 1;
                    if idx[axis] < m {
                        break;
                    }
                    idx[axis] = 0;
                    axis += 1;
                }
            }
        }
    }
}

/// Typical angular spacing of [`sphere_directions`].
fn angular_spacing(dim: usize, resolution: usize) -> f64 {
    let count = sphere_directions(dim, resolution).len() as f64;
    match dim {
        2 => 2.0 * PI / count,
        3 => (4.0 * PI / count).sqrt(),
        _ => (2.0 * PI * PI / count).powf(1.0 / 3.0),
    }
}

#[derive(Clone, Copy)]
enum Constraint<'a> {
    Sphere { center: &'a [f64], radius: f64 },
    Ball { center: &'a [f64], radius: f64 },
    Cube { min: &'a [f64], side: f64 },
}

impl Constraint<'_> {
    fn project(&self, p: &mut [f64]) {
        match *self {
            Constraint::Sphere { center, radius } | Constraint::Ball { center, radius } => {
                let d: f64 = p.iter().zip(center).map(|(a, c)| (a - c) * (a - c)).sum::<f64>().sqrt();
                let sphere = matches!(self, Constraint::Sphere { .. });
                if d == 0.0 {
                    if sphere {
                        p[0] = center[0] + radius;
                    }
                    return;
                }
                if sphere || d > radius {
                    for (a, c) in p.iter_mut().zip(center) {
                        *a = c + (*a - c) * radius / d;
                    }
                }
            }
            Constraint::Cube { min, side } => {
                for (a, m) in p.iter_mut().zip(min) {
                    *a = a.clamp(*m, m + side);
                }
            }
        }
    }
}

/// Coordinate ascent of `|u|` from `start`, halving the step on failure.
fn ascend(f: &FieldOracle, start: &[f64], start_value: f64, step0: f64, c: Constraint) -> (f64, Vec<f64>) {
    let n = start.len();
    let mut best = start.to_vec();
    let mut best_v = start_value;
    let mut step = step0;
    let floor = step0 * 1e-12;
    let mut trial = vec![0.0; n];
    let mut iterations = 0;
    while step > floor && iterations < 400 {
        iterations += 1;
        let mut improved = false;
        for axis in 0..n {
            for sign in [1.0, -1.0] {
                trial.copy_from_slice(&best);
                trial[axis] += sign * step;
                c.project(&mut trial);
                let v = f.value(&trial).abs();
                if v > best_v {
                    best_v = v;
                    best.copy_from_slice(&trial);
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (best_v, best)
}

/// Maximum of `|u|` on the sphere `|y - center| = radius` at one resolution.
pub fn sphere_max_at(f: &FieldOracle, center: &[f64], radius: f64, resolution: usize) -> (f64, Vec<f64>) {
    let n = f.dim();
    let dirs = sphere_directions(n, resolution);
    let mut p = vec![0.0; n];
    let mut best_v = -1.0;
    let mut best = vec![0.0; n];
    for d in dirs.iter() {
        for i in 0..n {
            p[i] = center[i] + radius * d[i];
        }
        let v = f.value(&p).abs();
        if v > best_v {
            best_v = v;
            best.copy_from_slice(&p);
        }
    }
    let step = radius * angular_spacing(n, resolution);
    ascend(f, &best, best_v, step, Constraint::Sphere { center, radius })
}

fn solid_ball_max_at(f: &FieldOracle, center: &[f64], radius: f64, resolution: usize) -> (f64, Vec<f64>) {
    let n = f.dim();
    let dirs = sphere_directions(n, resolution);
    let shells = (resolution / 8).max(2);
    let mut best = center.to_vec();
    let mut best_v = f.value(center).abs();
    let mut p = vec![0.0; n];
    for j in 1..=shells {
        let rho = radius * j as f64 / shells as f64;
        for d in dirs.iter() {
            for i in 0..n {
                p[i] = center[i] + rho * d[i];
            }
            let v = f.value(&p).abs();
            if v > best_v {
                best_v = v;
                best.copy_from_slice(&p);
            }
        }
    }
    let step = (radius / shells as f64).min(radius * angular_spacing(n, resolution));
    ascend(f, &best, best_v, step, Constraint::Ball { center, radius })
}

/// Maximum of `|u|` over the closed ball at one resolution.
pub fn ball_max_at(f: &FieldOracle, center: &[f64], radius: f64, resolution: usize) -> (f64, Vec<f64>) {
    if f.is_harmonic() {
        sphere_max_at(f, center, radius, resolution)
    } else {
        solid_ball_max_at(f, center, radius, resolution)
    }
}

fn cube_lattice_side(dim: usize, resolution: usize) -> usize {
    match dim {
        2 => resolution,
        3 => (resolution / 4).max(4),
        _ => (resolution / 16).max(4),
    }
}

/// Maximum of `|u|` over the closed cube at one resolution.
pub fn cube_max_at(f: &FieldOracle, q: &CubeSpec, resolution: usize) -> (f64, Vec<f64>) {
    let n = q.dim();
    let m = cube_lattice_side(n, resolution);
    let h = q.side / m as f64;
    let min = q.min_corner.as_slice();
    let mut idx = vec![0usize; n];
    let mut p = vec![0.0; n];
    let mut best = min.to_vec();
    let mut best_v = -1.0;
    'outer: loop {
        for i in 0..n {
            p[i] = if idx[i] == m { min[i] + q.side } else { min[i] + h * idx[i] as f64 };
        }
        let v = f.value(&p).abs();
        if v > best_v {
            best_v = v;
            best.copy_from_slice(&p);
        }
        let mut axis = 0;
        loop {
            if axis == n {
                break 'outer;
            }
            idx[axis] += 1;
            if idx[axis] <= m {
                break;
            }
            idx[axis] = 0;
            axis += 1;
        }
    }
    ascend(f, &best, best_v, h, Constraint::Cube { min, side: q.side })
}

/// Cap on the doubling ladder; the sample count grows like `res^(n-1)`.
fn resolution_cap(dim: usize, opts: &SupOptions) -> usize {
    match dim {
        2 => opts.max_resolution,
        3 => opts.max_resolution.min(512),
        _ => opts.max_resolution.min(256),
    }
}

/// `sup |u|` over a ball or cube with the default options.
pub fn sup_norm(f: &FieldOracle, region: &Region, resolution: usize) -> Result<SupEstimate> {
    sup_norm_with(f, region, resolution, &SupOptions::default())
}

/// Evaluates every level of the doubling ladder up to `resolution`, then
/// keeps doubling until the running maximum changes by less than `rel_tol`.
/// Because the ladder is fixed, a larger `resolution` only adds levels and
/// the estimate cannot decrease.
pub fn sup_norm_with(f: &FieldOracle, region: &Region, resolution: usize, opts: &SupOptions) -> Result<SupEstimate> {
    let level_max = |res: usize| -> (f64, Vec<f64>) {
        match region {
            Region::Ball(b) => ball_max_at(f, b.center.as_slice(), b.radius, res),
            Region::Cube(q) => cube_max_at(f, q, res),
        }
    };
    let dim = match region {
        Region::Ball(b) => {
            f.check_ball(b.center.as_slice(), b.radius)?;
            b.center.dim()
        }
        Region::Cube(q) => {
            if q.dim() != f.dim() {
                return Err(LabError::DimensionMismatch { expected: f.dim(), got: q.dim() });
            }
            let r = q.outer_radius();
            if r > f.domain_radius() * (1.0 + 1e-12) {
                return Err(LabError::OutsideDomain { radius: r, domain: f.domain_radius() });
            }
            q.dim()
        }
    };
    Ok(ladder(level_max, resolution, resolution_cap(dim, opts), opts))
}

/// Maximum of `|u|` on the sphere `|y - center| = radius`, refined like
/// [`sup_norm_with`]. Ties go to the smallest sample index.
pub fn sphere_sup(f: &FieldOracle, center: &[f64], radius: f64, resolution: usize, opts: &SupOptions) -> Result<SupEstimate> {
    f.check_ball(center, radius)?;
    let cap = resolution_cap(f.dim(), opts);
    Ok(ladder(|res| sphere_max_at(f, center, radius, res), resolution, cap, opts))
}

fn ladder(level_max: impl Fn(usize) -> (f64, Vec<f64>), resolution: usize, cap: usize, opts: &SupOptions) -> SupEstimate {
    let cap = cap.max(resolution);
    let mut res = opts.base_resolution.max(4).min(resolution.max(4));
    let (mut value, mut argmax) = level_max(res);
    let mut converged = false;
    loop {
        let next = res * 2;
        if res >= resolution && next > cap {
            break;
        }
        let (v, a) = level_max(next);
        let previous = value;
        if v > value {
            value = v;
            argmax = a;
        }
        res = next;
        if res >= resolution && (value - previous).abs() <= opts.rel_tol * value.abs() {
            converged = true;
            break;
        }
    }
    SupEstimate { value, argmax, resolution: res, converged }
}
