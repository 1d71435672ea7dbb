//! Spherical L2 growth `H(x, r)`, the frequency `beta(x, r)`, and doubling
//! indices of balls and cubes.
//!
//! `H(x, r)` is the plain surface integral of `u^2` (no normalisation by the
//! sphere area), so `beta = r H' / (2 H)` equals `d + (n - 1) / 2` for a
//! homogeneous polynomial of degree `d`.

mod doubling;
mod quadrature;
mod sup;

pub use doubling::{doubling_index_cube, doubling_index_cube_with, CandidateGrid, CandidateTable, CubeIndex};
pub use quadrature::{GaussLegendre, SphereRule};
pub use sup::{
    ball_max_at, cube_max_at, sphere_directions, sphere_max_at, sphere_sup, sup_norm, sup_norm_with, Region, SupEstimate,
    SupOptions,
};

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::field::{FieldKind, FieldOracle};
use crate::geometry::{BallSpec, CompensatedSum, Point};

/// Default quadrature order: points on the circle, polar nodes on the sphere.
pub fn default_order(dim: usize) -> usize {
    if dim == 2 {
        256
    } else {
        128
    }
}

/// Quadrature order for `f`: for a harmonic polynomial of degree `d` the
/// smallest order at which `u^2` and `u du/dnu` are integrated exactly
/// (`2d + 1` circle points, `d + 1` polar nodes), never below 16; the
/// default order otherwise.
pub fn order_for(f: &FieldOracle) -> usize {
    match (f.kind(), f.degree()) {
        (FieldKind::HarmonicPolynomial, Some(d)) => {
            let exact = if f.dim() == 2 { 2 * d as usize + 2 } else { d as usize + 2 };
            exact.max(16)
        }
        _ => default_order(f.dim()),
    }
}

const H_ABSOLUTE_FLOOR: f64 = 1e-300;
const H_RELATIVE_FLOOR: f64 = 1e-14;
/// Tolerance on the integrated-frequency identity of emitted profiles.
pub const IDENTITY_TOLERANCE: f64 = 1e-4;

fn check_sphere(f: &FieldOracle, x: &Point, r: f64, order: usize) -> Result<()> {
    if order < 8 {
        return Err(LabError::Precondition(format!("quadrature order {order} is below 8")));
    }
    if !(2..=3).contains(&f.dim()) {
        return Err(LabError::UnsupportedDimension(f.dim()));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(LabError::Invalid(format!("radius must be positive, got {r}")));
    }
    f.check_ball(x.as_slice(), r)
}

/// Sums over the sphere rule: `(int u^2, int u du/dnu, max |u|)`, the
/// integrals taken over the unit direction sphere (no `r^(n-1)` factor).
fn sphere_moments(f: &FieldOracle, x: &Point, r: f64, order: usize, gradient: bool) -> (f64, f64, f64) {
    let n = f.dim();
    let rule = SphereRule::cached(n, order);
    let mut h = CompensatedSum::default();
    let mut flux = CompensatedSum::default();
    let mut peak = 0.0f64;
    let mut p = [0.0; 3];
    for (d, w) in rule.directions.iter().zip(&rule.weights) {
        for i in 0..n {
            p[i] = x.coords[i] + r * d[i];
        }
        if gradient {
            let (u, g) = f.value_and_gradient(&p[..n]);
            let du: f64 = (0..n).map(|i| g[i] * d[i]).sum();
            h.add(w * u * u);
            flux.add(w * u * du);
            peak = peak.max(u.abs());
        } else {
            let u = f.value(&p[..n]);
            h.add(w * u * u);
            peak = peak.max(u.abs());
        }
    }
    (h.value(), flux.value(), peak)
}

fn check_floor(h_unit: f64, peak: f64, area: f64) -> Result<()> {
    // RMS of |u| on the sphere against the largest sampled |u|.
    let rms = (h_unit / area).sqrt();
    if h_unit <= H_ABSOLUTE_FLOOR || !(rms > H_RELATIVE_FLOOR * peak) {
        return Err(LabError::QuadratureFloor { value: h_unit });
    }
    Ok(())
}

/// `H(x, r) = int_{|y - x| = r} u^2 dS`.
pub fn surface_h(f: &FieldOracle, x: &Point, r: f64, order: usize) -> Result<f64> {
    check_sphere(f, x, r, order)?;
    let (h_unit, _, peak) = sphere_moments(f, x, r, order, false);
    let area = SphereRule::cached(f.dim(), order).total_weight();
    check_floor(h_unit, peak, area)?;
    Ok(h_unit * r.powi(f.dim() as i32 - 1))
}

/// `beta(x, r) = (n - 1)/2 + r int u du/dnu / int u^2` with exact gradients.
pub fn frequency_beta(f: &FieldOracle, x: &Point, r: f64, order: usize) -> Result<f64> {
    check_sphere(f, x, r, order)?;
    Ok(beta_unchecked(f, x, r, order)?.1)
}

/// `(H, beta)` at one radius, after the caller checked the sphere.
fn beta_unchecked(f: &FieldOracle, x: &Point, r: f64, order: usize) -> Result<(f64, f64)> {
    let n = f.dim();
    let (h_unit, flux, peak) = sphere_moments(f, x, r, order, true);
    let area = SphereRule::cached(n, order).total_weight();
    check_floor(h_unit, peak, area)?;
    let beta = (n as f64 - 1.0) / 2.0 + r * flux / h_unit;
    Ok((h_unit * r.powi(n as i32 - 1), beta))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileSample {
    pub r: f64,
    #[serde(rename = "H")]
    pub h: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyProfile {
    pub center: Point,
    pub samples: Vec<ProfileSample>,
    pub quadrature_order: usize,
    /// `|log(H(r_max)/H(r_min)) - 2 int beta dlog r|`.
    pub identity_residual: f64,
}

/// Geometric grid `r_min (r_max / r_min)^(i / (count - 1))`.
pub fn geometric_radii(r_min: f64, r_max: f64, count: usize) -> Vec<f64> {
    let ratio = r_max / r_min;
    (0..count)
        .map(|i| {
            if i + 1 == count {
                r_max
            } else {
                r_min * ratio.powf(i as f64 / (count - 1) as f64)
            }
        })
        .collect()
}

/// Adaptive Simpson integral of `beta` in `log r` over one grid interval.
fn integrate_beta(
    f: &FieldOracle,
    x: &Point,
    order: usize,
    (ta, ga): (f64, f64),
    (tb, gb): (f64, f64),
    depth: u32,
    tol: f64,
) -> Result<f64> {
    let tm = 0.5 * (ta + tb);
    let gm = beta_unchecked(f, x, tm.exp(), order)?.1;
    let whole = (tb - ta) / 6.0 * (ga + 4.0 * gm + gb);
    let tl = 0.5 * (ta + tm);
    let tr = 0.5 * (tm + tb);
    let gl = beta_unchecked(f, x, tl.exp(), order)?.1;
    let gr = beta_unchecked(f, x, tr.exp(), order)?.1;
    let left = (tm - ta) / 6.0 * (ga + 4.0 * gl + gm);
    let right = (tb - tm) / 6.0 * (gm + 4.0 * gr + gb);
    let err = left + right - whole;
    if depth == 0 || err.abs() <= 15.0 * tol {
        return Ok(left + right + err / 15.0);
    }
    Ok(integrate_beta(f, x, order, (ta, ga), (tm, gm), depth - 1, tol / 2.0)?
        + integrate_beta(f, x, order, (tm, gm), (tb, gb), depth - 1, tol / 2.0)?)
}

fn identity_residual(f: &FieldOracle, x: &Point, order: usize, samples: &[ProfileSample]) -> Result<f64> {
    let first = samples[0];
    let last = samples[samples.len() - 1];
    let mut integral = CompensatedSum::default();
    let tol = 1e-7 / samples.len() as f64;
    for w in samples.windows(2) {
        let a = (w[0].r.ln(), w[0].beta);
        let b = (w[1].r.ln(), w[1].beta);
        if b.0 - a.0 < 1e-9 {
            integral.add(0.5 * (b.0 - a.0) * (a.1 + b.1));
        } else {
            integral.add(integrate_beta(f, x, order, a, b, 8, tol)?);
        }
    }
    Ok(((last.h / first.h).ln() - 2.0 * integral.value()).abs())
}

/// Samples `(r, H, beta)` on a geometric grid and checks the integrated
/// identity `log(H(r2)/H(r1)) = 2 int beta dlog r`, doubling the quadrature
/// order (at most four times) while the residual exceeds the tolerance.
pub fn frequency_profile(
    f: &FieldOracle,
    x: &Point,
    r_min: f64,
    r_max: f64,
    count: usize,
    order: usize,
) -> Result<FrequencyProfile> {
    if count < 2 {
        return Err(LabError::Precondition(format!("profile needs at least 2 samples, got {count}")));
    }
    if !(r_min > 0.0 && r_min < r_max) {
        return Err(LabError::Precondition(format!("need 0 < r_min < r_max, got {r_min}, {r_max}")));
    }
    check_sphere(f, x, r_max, order)?;
    let radii = geometric_radii(r_min, r_max, count);
    let mut order = order;
    let mut attempts = 0;
    loop {
        let samples = radii
            .iter()
            .map(|&r| beta_unchecked(f, x, r, order).map(|(h, beta)| ProfileSample { r, h, beta }))
            .collect::<Result<Vec<_>>>()?;
        let residual = identity_residual(f, x, order, &samples)?;
        if residual < IDENTITY_TOLERANCE || attempts == 4 {
            return Ok(FrequencyProfile { center: x.clone(), samples, quadrature_order: order, identity_residual: residual });
        }
        attempts += 1;
        order *= 2;
    }
}

/// `log2(sup_{B(x,2r)} |u| / sup_{B(x,r)} |u|)`.
pub fn doubling_index_ball(f: &FieldOracle, x: &Point, r: f64) -> Result<f64> {
    doubling_index_ball_with(f, x, r, 64, &SupOptions::default())
}

pub fn doubling_index_ball_with(f: &FieldOracle, x: &Point, r: f64, resolution: usize, opts: &SupOptions) -> Result<f64> {
    f.check_ball(x.as_slice(), 2.0 * r)?;
    let inner = sup_norm_with(f, &Region::Ball(BallSpec::new(x.clone(), r)?), resolution, opts)?;
    if inner.value <= H_ABSOLUTE_FLOOR {
        return Err(LabError::QuadratureFloor { value: inner.value });
    }
    let outer = sup_norm_with(f, &Region::Ball(BallSpec::new(x.clone(), 2.0 * r)?), resolution, opts)?;
    Ok((outer.value / inner.value).log2())
}
