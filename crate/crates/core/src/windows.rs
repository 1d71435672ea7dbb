//! Plateaus of monotone functions and frequency windows.
//!
//! [`find_plateau`] follows the constructive sequence
//! `x_{i+1} = x_i + (b - a) / (10 ln^2 f(x_i))`: at the first midpoint
//! `x = (x_i + x_{i+1}) / 2` whose window of half-width
//! `(b - a) / (20 ln^2 f(x))` keeps `f` within `[N, e N]`, `N = f(x_i)`, it
//! stops. Functions are consumed as samples on a grid; values between grid
//! points are bracketed by monotonicity, never interpolated.

use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::field::FieldOracle;
use crate::geometry::Point;
use crate::growth::{frequency_beta, order_for};

/// A nondecreasing function known on an increasing grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledFunction {
    pub t: Vec<f64>,
    pub v: Vec<f64>,
}

impl SampledFunction {
    pub fn new(t: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if t.len() != v.len() || t.len() < 2 {
            return Err(LabError::Precondition("need at least two (t, f) samples of equal length".into()));
        }
        if t.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(LabError::Precondition("sample grid must be strictly increasing".into()));
        }
        if v.windows(2).any(|w| w[1] < w[0]) {
            return Err(LabError::Precondition("sampled values must be nondecreasing".into()));
        }
        Ok(SampledFunction { t, v })
    }

    /// Samples `f` at `count + 1` equispaced points of `[a, b]`.
    pub fn tabulate(a: f64, b: f64, count: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let t: Vec<f64> = (0..=count)
            .map(|i| if i == count { b } else { a + (b - a) * i as f64 / count as f64 })
            .collect();
        let v = t.iter().map(|&x| f(x)).collect();
        SampledFunction::new(t, v)
    }

    pub fn a(&self) -> f64 {
        self.t[0]
    }

    pub fn b(&self) -> f64 {
        self.t[self.t.len() - 1]
    }

    /// Value at the largest grid point `<= x`, a lower bound for `f(x)`.
    pub fn lower(&self, x: f64) -> f64 {
        let i = self.t.partition_point(|&t| t <= x);
        self.v[i.saturating_sub(1)]
    }

    /// Value at the smallest grid point `>= x`, an upper bound for `f(x)`.
    pub fn upper(&self, x: f64) -> f64 {
        let i = self.t.partition_point(|&t| t < x);
        self.v[i.min(self.v.len() - 1)]
    }

    pub fn max_gap(&self) -> f64 {
        self.t.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlateauResult {
    pub x: f64,
    #[serde(rename = "N")]
    pub n: f64,
    /// Closed interval on which `N <= f <= e N`.
    pub window: (f64, f64),
    pub half_width: f64,
    /// Index `i` of the successful midpoint in the sequence, from 1.
    pub step: usize,
}

pub fn find_plateau(f: &SampledFunction) -> Result<PlateauResult> {
    let (a, b) = (f.a(), f.b());
    let len = b - a;
    if f.v[0] < E {
        return Err(LabError::Precondition(format!("f(a) = {} is below e", f.v[0])));
    }
    let fb = f.v[f.v.len() - 1];
    let allowed = len / (40.0 * fb.ln().powi(2));
    let gap = f.max_gap();
    if gap >= allowed {
        return Err(LabError::SamplingTooCoarse { gap, allowed });
    }
    let mid = 0.5 * (a + b);
    let mut xi = a;
    let mut step = 1;
    while xi < mid {
        let n = f.lower(xi);
        let next = xi + len / (10.0 * n.ln().powi(2));
        let x = 0.5 * (xi + next);
        if x >= mid {
            break;
        }
        let half_width = len / (20.0 * f.lower(x).ln().powi(2));
        let window = ((x - half_width).max(a), (x + half_width).min(b));
        if f.lower(window.0) >= n && f.upper(window.1) <= E * n {
            return Ok(PlateauResult { x, n, window, half_width, step });
        }
        if next >= mid {
            break;
        }
        xi = next;
        step += 1;
    }
    Err(LabError::Precondition(format!(
        "no plateau before the midpoint after {step} steps; f is not monotone or the samples are inconsistent"
    )))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WindowOptions {
    /// `beta(p, r/2)` must exceed this.
    pub gate: f64,
    /// Points at which the returned window is re-checked.
    pub verification_samples: usize,
    /// Quadrature order; `None` picks the dimension default.
    pub order: Option<usize>,
}

impl Default for WindowOptions {
    fn default() -> Self {
        WindowOptions { gate: 10.0, verification_samples: 32, order: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerWindow {
    pub s: f64,
    #[serde(rename = "N")]
    pub n: f64,
    pub rel_halfwidth: f64,
    /// `(t, beta(p, t))` at the verification points.
    pub verification_samples: Vec<(f64, f64)>,
    /// Largest relative half-width on which the sandwich still holds.
    pub max_rel_halfwidth: f64,
    pub beta_half_r: f64,
    pub beta_r: f64,
    pub beta_three_halves_r: f64,
    /// `beta(p, r)/10 <= N <= 2 beta(p, 3r/2)`.
    pub n_bracket_holds: bool,
}

/// Running maximum of `beta(p, .)` on `[r, 2r]`, seeded with `beta(p, r/2)`.
fn beta_envelope(f: &FieldOracle, p: &Point, r: f64, count: usize, order: usize, seed: f64) -> Result<SampledFunction> {
    let t: Vec<f64> = (0..=count)
        .map(|i| if i == count { 2.0 * r } else { r + r * i as f64 / count as f64 })
        .collect();
    let mut running = seed;
    let mut v = Vec::with_capacity(t.len());
    for &ti in &t {
        running = running.max(frequency_beta(f, p, ti, order)?);
        v.push(running);
    }
    SampledFunction::new(t, v)
}

/// Finds `s in [r, 3r/2)` and `N >= 5` with `N <= beta(p, t) <= 2 e N` for
/// `t` in `s (1 +- 1 / (1000 ln^2 N))`.
pub fn find_frequency_window(f: &FieldOracle, p: &Point, r: f64, opts: &WindowOptions) -> Result<LayerWindow> {
    f.check_ball(p.as_slice(), 2.0 * r)?;
    let order = opts.order.unwrap_or_else(|| order_for(f));
    let beta_half_r = frequency_beta(f, p, 0.5 * r, order)?;
    if !(beta_half_r > opts.gate) {
        return Err(LabError::LowFrequency { beta: beta_half_r, gate: opts.gate });
    }
    let beta_2r = frequency_beta(f, p, 2.0 * r, order)?.max(beta_half_r);
    let mut count = (40.0 * beta_2r.ln().powi(2)).ceil() as usize + 2;
    let (envelope, plateau) = loop {
        let env = beta_envelope(f, p, r, count, order, beta_half_r)?;
        match find_plateau(&env) {
            Ok(res) => break (env, res),
            Err(LabError::SamplingTooCoarse { .. }) if count < 1 << 16 => count *= 2,
            Err(e) => return Err(e),
        }
    };
    drop(envelope);
    let n = plateau.n / 2.0;
    let s = plateau.x;
    let rel_halfwidth = 1.0 / (1000.0 * n.ln().powi(2));
    let sandwich = |b: f64| n <= b && b <= 2.0 * E * n;

    let m = opts.verification_samples.max(2);
    let mut verification_samples = Vec::with_capacity(m);
    for j in 0..m {
        let u = -1.0 + 2.0 * j as f64 / (m - 1) as f64;
        let t = s * (1.0 + rel_halfwidth * u * (1.0 - 1e-12));
        let b = frequency_beta(f, p, t, order)?;
        if !sandwich(b) {
            return Err(LabError::Precondition(format!(
                "window verification failed: beta({t}) = {b} outside [{n}, {}]",
                2.0 * E * n
            )));
        }
        verification_samples.push((t, b));
    }

    // Grow the window until an endpoint leaves the sandwich, then bisect.
    let edge_ok = |h: f64| -> Result<bool> {
        let hi = s * (1.0 + h);
        if hi > 2.0 * r || h >= 1.0 {
            return Ok(false);
        }
        // An endpoint where u^2 underflows cannot be verified and ends the window.
        let beta = |t: f64| match frequency_beta(f, p, t, order) {
            Err(LabError::QuadratureFloor { .. }) => Ok(None),
            other => other.map(Some),
        };
        Ok(beta(s * (1.0 - h))?.is_some_and(sandwich) && beta(hi)?.is_some_and(sandwich))
    };
    let mut good = rel_halfwidth;
    let mut bad = rel_halfwidth * 2.0;
    while edge_ok(bad)? {
        good = bad;
        bad *= 2.0;
    }
    for _ in 0..30 {
        let mid = 0.5 * (good + bad);
        if edge_ok(mid)? {
            good = mid;
        } else {
            bad = mid;
        }
    }

    let beta_r = frequency_beta(f, p, r, order)?;
    let beta_three_halves_r = frequency_beta(f, p, 1.5 * r, order)?;
    Ok(LayerWindow {
        s,
        n,
        rel_halfwidth,
        verification_samples,
        max_rel_halfwidth: good,
        beta_half_r,
        beta_r,
        beta_three_halves_r,
        n_bracket_holds: beta_r / 10.0 <= n && n <= 2.0 * beta_three_halves_r,
    })
}
