//! The box `T` between the inner sphere and the sphere maximum, its tunnels,
//! and the cubes of each tunnel.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::field::FieldOracle;
use crate::geometry::{dot, norm, Point};

/// Cubes whose side falls below this fraction of `s` are flagged as beyond
/// double-precision resolution.
pub const RESOLUTION_FLOOR: f64 = 1e-8;
/// Largest number of cubes a construction will enumerate.
pub const CUBE_BUDGET: u128 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrientedBox {
    pub center: Vec<f64>,
    /// `axes[0]` is the long axis, pointing from the inner face toward `x`.
    pub axes: Vec<Vec<f64>>,
    pub half_extents: Vec<f64>,
}

impl OrientedBox {
    pub fn volume(&self) -> f64 {
        self.half_extents.iter().map(|h| 2.0 * h).product()
    }

    /// `center + sum local[i] axes[i]`.
    pub fn to_world(&self, local: &[f64]) -> Vec<f64> {
        let mut p = self.center.clone();
        for (l, axis) in local.iter().zip(&self.axes) {
            for (pi, ai) in p.iter_mut().zip(axis) {
                *pi += l * ai;
            }
        }
        p
    }

    pub fn corners(&self) -> Vec<Vec<f64>> {
        let n = self.center.len();
        (0..1usize << n)
            .map(|mask| {
                let local: Vec<f64> =
                    (0..n).map(|i| if mask >> i & 1 == 1 { self.half_extents[i] } else { -self.half_extents[i] }).collect();
                self.to_world(&local)
            })
            .collect()
    }
}

/// Orthonormal frame whose first vector is `e0`, completed by Gram-Schmidt
/// over the standard basis.
pub fn frame(e0: &[f64]) -> Vec<Vec<f64>> {
    let n = e0.len();
    let mut axes = vec![e0.to_vec()];
    for k in 0..n {
        if axes.len() == n {
            break;
        }
        let mut v = vec![0.0; n];
        v[k] = 1.0;
        for a in &axes {
            let c = dot(&v, a);
            for (vi, ai) in v.iter_mut().zip(a) {
                *vi -= c * ai;
            }
        }
        let len = norm(&v);
        if len > 1e-6 {
            axes.push(v.iter().map(|x| x / len).collect());
        }
    }
    axes
}

/// Knobs for the tunnel geometry at plateau level `N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TunnelConfig {
    /// Exponent in `[N^alpha]` tunnels per transverse axis and in the ball
    /// radius `r / N^alpha`.
    pub alpha: f64,
    /// `delta = delta_scale / ln^delta_log_power N`.
    pub delta_scale: f64,
    pub delta_log_power: f64,
    /// Transverse side of `T` is its long side over `ceil(ln N)^divisor_log_power`.
    pub divisor_log_power: u32,
    /// Overrides for the derived values.
    pub delta: Option<f64>,
    pub tunnels_per_side: Option<usize>,
    pub cubes_per_tunnel: Option<usize>,
    /// Use the exact asymptotic constants regardless of the fields above.
    pub paper_constants: bool,
}

impl Default for TunnelConfig {
    fn default() -> Self {
        TunnelConfig {
            alpha: 0.5,
            delta_scale: 0.5,
            delta_log_power: 0.0,
            divisor_log_power: 0,
            delta: None,
            tunnels_per_side: None,
            cubes_per_tunnel: None,
            paper_constants: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TunnelParams {
    pub s: f64,
    #[serde(rename = "N")]
    pub n: f64,
    pub delta: f64,
    pub tunnels_per_side: usize,
    pub cubes_per_tunnel: usize,
    pub paper_constants: bool,
    pub alpha: f64,
    pub cube_side: f64,
    pub feasible: bool,
    pub infeasibility: Option<String>,
}

impl TunnelParams {
    pub fn resolve(s: f64, n_level: f64, dim: usize, cfg: &TunnelConfig) -> Result<Self> {
        if !(n_level > 1.0) {
            return Err(LabError::Precondition(format!("degenerate window: N = {n_level}")));
        }
        if !(cfg.alpha > 0.0 && cfg.alpha < 1.0) {
            return Err(LabError::Precondition(format!("alpha = {} must lie in (0, 1)", cfg.alpha)));
        }
        let ln_n = n_level.ln();
        let m_default = (n_level.powf(cfg.alpha).floor() as usize).max(1);
        let (delta, m, cubes) = if cfg.paper_constants {
            let delta = 1.0 / (1e8 * (dim * dim) as f64 * ln_n * ln_n);
            let divisor = (ln_n.floor().max(1.0) as usize).pow(4);
            (delta, m_default, m_default * divisor)
        } else {
            let delta = cfg.delta.unwrap_or(cfg.delta_scale / ln_n.powf(cfg.delta_log_power));
            let m = cfg.tunnels_per_side.unwrap_or(m_default).max(1);
            let divisor = (ln_n.ceil().max(1.0) as usize).pow(cfg.divisor_log_power);
            (delta, m, cfg.cubes_per_tunnel.unwrap_or(m * divisor).max(1))
        };
        if !(delta > 0.0 && delta < 1.0) {
            return Err(LabError::Precondition(format!("delta = {delta} must lie in (0, 1)")));
        }
        let cube_side = delta * s / cubes as f64;
        let count = (m as u128).pow(dim as u32 - 1) * cubes as u128;
        let infeasibility = if cube_side < RESOLUTION_FLOOR * s {
            Some(format!("cube side {cube_side:e} is below {RESOLUTION_FLOOR:e} s"))
        } else if count > CUBE_BUDGET {
            Some(format!("{count} cubes exceed the budget {CUBE_BUDGET}"))
        } else {
            None
        };
        Ok(TunnelParams {
            s,
            n: n_level,
            delta,
            tunnels_per_side: m,
            cubes_per_tunnel: cubes,
            paper_constants: cfg.paper_constants,
            alpha: cfg.alpha,
            cube_side,
            feasible: infeasibility.is_none(),
            infeasibility,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TunnelCube {
    pub tunnel: usize,
    /// Position along the tunnel, 0 at the inner end (farthest from `x`).
    pub index: usize,
    pub center: Vec<f64>,
    pub side: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TunnelGeometry {
    pub params: TunnelParams,
    #[serde(rename = "box")]
    pub box_: OrientedBox,
    pub x: Vec<f64>,
    pub x_tilde: Vec<f64>,
    /// `tunnels[i][t]`; empty when the parameters are infeasible.
    pub tunnels: Vec<Vec<TunnelCube>>,
}

impl TunnelGeometry {
    /// Point of a cube at local coordinates in `[-1/2, 1/2]^n` (units of the side).
    pub fn cube_point(&self, cube: &TunnelCube, local: &[f64]) -> Vec<f64> {
        let mut p = cube.center.clone();
        for (l, axis) in local.iter().zip(&self.box_.axes) {
            for (pi, ai) in p.iter_mut().zip(axis) {
                *pi += l * cube.side * ai;
            }
        }
        p
    }

    pub fn cube_count(&self) -> usize {
        self.tunnels.iter().map(Vec::len).sum()
    }
}

/// Erects the box with faces centered at `x` (on the sphere of radius `s`)
/// and at its radial projection `x_tilde` onto the sphere of radius
/// `s (1 - delta)`, splits it into tunnels along the long axis, and each
/// tunnel into cubes ordered from `x_tilde` toward `x`.
pub fn build_tunnels(f: &FieldOracle, p: &Point, r: f64, x: &[f64], params: &TunnelParams) -> Result<TunnelGeometry> {
    let n = f.dim();
    f.check_ball(p.as_slice(), 2.0 * r)?;
    let radial: Vec<f64> = x.iter().zip(&p.coords).map(|(a, b)| a - b).collect();
    let s = norm(&radial);
    if !(s > 0.0) || (s - params.s).abs() > 1e-9 * params.s {
        return Err(LabError::Precondition(format!("x must lie on the sphere of radius {}", params.s)));
    }
    let e0: Vec<f64> = radial.iter().map(|v| v / s).collect();
    let axes = frame(&e0);
    let long = params.delta * s;
    let side = params.cube_side;
    let m = params.tunnels_per_side;
    let width = m as f64 * side;
    let x_tilde: Vec<f64> = p.coords.iter().zip(&e0).map(|(c, e)| c + (1.0 - params.delta) * s * e).collect();
    let center: Vec<f64> = p.coords.iter().zip(&e0).map(|(c, e)| c + (1.0 - 0.5 * params.delta) * s * e).collect();
    let mut half_extents = vec![0.5 * width; n];
    half_extents[0] = 0.5 * long;
    let box_ = OrientedBox { center, axes, half_extents };
    for c in box_.corners() {
        f.check_point(&c)?;
    }
    let mut tunnels = Vec::new();
    if params.feasible {
        let count = m.pow(n as u32 - 1);
        for i in 0..count {
            let mut rem = i;
            let transverse: Vec<f64> = (1..n)
                .map(|_| {
                    let j = rem % m;
                    rem /= m;
                    -0.5 * width + (j as f64 + 0.5) * side
                })
                .collect();
            let cubes = (0..params.cubes_per_tunnel)
                .map(|t| {
                    let mut local = vec![-0.5 * long + (t as f64 + 0.5) * side];
                    local.extend_from_slice(&transverse);
                    TunnelCube { tunnel: i, index: t, center: box_.to_world(&local), side }
                })
                .collect();
            tunnels.push(cubes);
        }
    }
    Ok(TunnelGeometry { params: params.clone(), box_, x: x.to_vec(), x_tilde, tunnels })
}
