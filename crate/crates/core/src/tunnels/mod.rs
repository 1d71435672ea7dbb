//! Tunnels through the frequency layer: locate the plateau, take the sphere
//! maximum `x`, erect the box `T` toward the inner sphere, certify sign
//! changes cube by cube, and pack disjoint balls around certified zeros.

mod detect;
mod geometry;

pub use detect::{
    classify_good_tunnels, detect_sign_changes, pack_disjoint_balls, sign_change_pairs, tunnel_cube_index,
    CubeIndexOptions, PackedBall, SignChangeCertificate, TunnelClassification,
};
pub use geometry::{
    build_tunnels, frame, OrientedBox, TunnelConfig, TunnelCube, TunnelGeometry, TunnelParams, CUBE_BUDGET,
    RESOLUTION_FLOOR,
};

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::field::FieldOracle;
use crate::geometry::{distance, BallSpec, Point};
use crate::growth::{doubling_index_ball_with, order_for, sphere_sup, surface_h, sup_norm_with, Region, SupOptions};
use crate::windows::{find_frequency_window, LayerWindow, WindowOptions};

/// Maximum of `|u|` on the sphere `|y - p| = s`; ties go to the smallest
/// sample index.
pub fn max_on_sphere(f: &FieldOracle, p: &Point, s: f64, resolution: usize) -> Result<(Point, f64)> {
    let est = sphere_sup(f, p.as_slice(), s, resolution, &SupOptions::default())?;
    if !(est.value > 1e-300) {
        return Err(LabError::QuadratureFloor { value: est.value });
    }
    Ok((Point { coords: est.argmax }, est.value))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TunnelRunConfig {
    pub window: WindowOptions,
    pub tunnel: TunnelConfig,
    pub sphere_resolution: usize,
    pub samples_per_cube: usize,
    /// Evaluate the good-tunnel classification.
    pub classify: bool,
    /// Restrict sign detection to good tunnels.
    pub require_good: bool,
    /// Good-tunnel threshold `max(N 2^(-c1 ln N / ln ln N), N0)`.
    pub c1: f64,
    pub n0: f64,
    pub cube_index: CubeIndexOptions,
}

impl Default for TunnelRunConfig {
    fn default() -> Self {
        TunnelRunConfig {
            window: WindowOptions::default(),
            tunnel: TunnelConfig::default(),
            sphere_resolution: 64,
            samples_per_cube: 8,
            classify: true,
            require_good: false,
            c1: 0.5,
            n0: 10.0,
            cube_index: CubeIndexOptions::default(),
        }
    }
}

/// `max(N 2^(-c1 ln N / ln ln N), N0)` with `ln ln N` clamped below at 1.
pub fn good_tunnel_threshold(n: f64, c1: f64, n0: f64) -> f64 {
    let l = n.ln();
    (n * 2f64.powf(-c1 * l / l.ln().max(1.0))).max(n0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TunnelReport {
    pub window: LayerWindow,
    pub params: TunnelParams,
    #[serde(rename = "box")]
    pub box_: OrientedBox,
    pub x: Vec<f64>,
    pub x_tilde: Vec<f64>,
    #[serde(rename = "K")]
    pub k: f64,
    pub tunnel_count: usize,
    pub cube_count: usize,
    pub classification: Option<TunnelClassification>,
    pub certificates: Vec<SignChangeCertificate>,
    pub ball_radius: f64,
    pub balls: Vec<PackedBall>,
    /// `beta(p, r)/10 <= N <= 2 beta(p, 3r/2)`.
    pub n_bracket_holds: bool,
}

pub fn run_tunnel_construction(f: &FieldOracle, p: &Point, r: f64, cfg: &TunnelRunConfig) -> Result<TunnelReport> {
    f.check_ball(p.as_slice(), 2.0 * r)?;
    let window = find_frequency_window(f, p, r, &cfg.window)?;
    let (x, k) = max_on_sphere(f, p, window.s, cfg.sphere_resolution)?;
    let params = TunnelParams::resolve(window.s, window.n, f.dim(), &cfg.tunnel)?;
    if let Some(reason) = &params.infeasibility {
        return Err(LabError::ResolutionInfeasible(reason.clone()));
    }
    let geometry = build_tunnels(f, p, r, x.as_slice(), &params)?;
    let classification = if cfg.classify {
        let threshold = good_tunnel_threshold(window.n, cfg.c1, cfg.n0);
        Some(classify_good_tunnels(f, &geometry, threshold, &cfg.cube_index)?)
    } else {
        None
    };
    let selected: Vec<usize> = match (&classification, cfg.require_good) {
        (Some(c), true) => c.good_tunnels.clone(),
        _ => (0..geometry.tunnels.len()).collect(),
    };
    let certificates = detect_sign_changes(f, &geometry, &selected, cfg.samples_per_cube);
    let ball_radius = r / window.n.powf(params.alpha);
    let container = BallSpec::new(p.clone(), 2.0 * r)?;
    let balls = pack_disjoint_balls(&certificates, ball_radius, &container);
    Ok(TunnelReport {
        n_bracket_holds: window.n_bracket_holds,
        window,
        params,
        box_: geometry.box_.clone(),
        x: x.coords,
        x_tilde: geometry.x_tilde.clone(),
        k,
        tunnel_count: geometry.tunnels.len(),
        cube_count: geometry.cube_count(),
        classification,
        certificates,
        ball_radius,
        balls,
    })
}

/// Measured sides of one growth inequality and the constant it implies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpliedConstant {
    pub lhs: f64,
    pub rhs_scale: f64,
    pub implied: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerDiagnostics {
    pub s: f64,
    #[serde(rename = "N")]
    pub n: f64,
    pub delta: f64,
    #[serde(rename = "K")]
    pub k: f64,
    /// `H(t2)/H(t1)` at the ends of the window against `(t2/t1)^(2N)` and
    /// `(t2/t1)^(4eN)`; the residuals are the log-margins, nonnegative when
    /// the sandwich holds.
    pub t1t2_ratio: f64,
    pub t1t2_lower: f64,
    pub t1t2_upper: f64,
    pub t1t2_lower_margin: f64,
    pub t1t2_upper_margin: f64,
    /// `sup_{B(p, s(1-delta))} |u| = K 2^(-c delta N)`: implied `c` with `C = 1`.
    pub s_minus: ImpliedConstant,
    /// `sup_{B(p, s(1+delta))} |u| = K 2^(C delta N)`: implied `C`.
    pub s_plus: ImpliedConstant,
    /// `sup_{B(x, delta s)} |u| <= K 2^(C delta N + C)`.
    pub max2: ImpliedConstant,
    /// `N(y, delta s / 4) <= C delta N + C` over probes `y` near `x`.
    pub max1: ImpliedConstant,
    /// `sup_{B(y, delta s/(10N))} |u| >= K 2^(-C delta N ln N - C)`.
    pub max3: ImpliedConstant,
}

/// Implied constants of the growth estimates near the sphere maximum, for
/// one field and one layer. Pure diagnostics.
pub fn layer_growth_report(f: &FieldOracle, p: &Point, window: &LayerWindow, delta: f64, resolution: usize) -> Result<LayerDiagnostics> {
    let (s, n) = (window.s, window.n);
    if !(delta > 0.0 && delta < 1.0) {
        return Err(LabError::Precondition(format!("delta = {delta} must lie in (0, 1)")));
    }
    f.check_ball(p.as_slice(), s * (1.0 + delta))?;
    let opts = SupOptions::default();
    let order = order_for(f);
    let (x, k) = max_on_sphere(f, p, s, resolution)?;

    let t1 = s * (1.0 - window.rel_halfwidth * (1.0 - 1e-12));
    let t2 = s * (1.0 + window.rel_halfwidth * (1.0 - 1e-12));
    let ratio = surface_h(f, p, t2, order)? / surface_h(f, p, t1, order)?;
    let q = t2 / t1;
    let lower = q.powf(2.0 * n);
    let upper = q.powf(4.0 * std::f64::consts::E * n);

    let ball_sup = |c: &[f64], rad: f64| -> Result<f64> {
        Ok(sup_norm_with(f, &Region::Ball(BallSpec::new(Point { coords: c.to_vec() }, rad)?), resolution, &opts)?.value)
    };
    let dn = delta * n;
    let inner = ball_sup(p.as_slice(), s * (1.0 - delta))?;
    let outer = ball_sup(p.as_slice(), s * (1.0 + delta))?;
    let s_minus = ImpliedConstant { lhs: inner, rhs_scale: k, implied: -(inner / k).log2() / dn };
    let s_plus = ImpliedConstant { lhs: outer, rhs_scale: k, implied: (outer / k).log2() / dn };
    let near = ball_sup(x.as_slice(), delta * s)?;
    let max2 = ImpliedConstant { lhs: near, rhs_scale: k, implied: (near / k).log2() / (dn + 1.0) };

    // Probes: x and the 2n points at distance delta s / 4 along the axes.
    let mut probes = vec![x.coords.clone()];
    for axis in 0..f.dim() {
        for sign in [1.0, -1.0] {
            let mut y = x.coords.clone();
            y[axis] += sign * delta * s / 4.0;
            probes.push(y);
        }
    }
    let mut worst_index = f64::NEG_INFINITY;
    let mut weakest_sup = f64::INFINITY;
    for y in &probes {
        debug_assert!(distance(y, &x.coords) <= delta * s / 4.0 * (1.0 + 1e-12));
        let yp = Point { coords: y.clone() };
        worst_index = worst_index.max(doubling_index_ball_with(f, &yp, delta * s / 4.0, resolution, &opts)?);
        weakest_sup = weakest_sup.min(ball_sup(y, delta * s / (10.0 * n))?);
    }
    let max1 = ImpliedConstant { lhs: worst_index, rhs_scale: 1.0, implied: worst_index / (dn + 1.0) };
    let max3 = ImpliedConstant { lhs: weakest_sup, rhs_scale: k, implied: (k / weakest_sup).log2() / (dn * n.ln() + 1.0) };

    Ok(LayerDiagnostics {
        s,
        n,
        delta,
        k,
        t1t2_ratio: ratio,
        t1t2_lower: lower,
        t1t2_upper: upper,
        t1t2_lower_margin: ratio.ln() - lower.ln(),
        t1t2_upper_margin: upper.ln() - ratio.ln(),
        s_minus,
        s_plus,
        max2,
        max1,
        max3,
    })
}
