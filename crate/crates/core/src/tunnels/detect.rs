//! Good tunnels, sign-change certificates and disjoint zero balls.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::geometry::{TunnelCube, TunnelGeometry};
use crate::error::Result;
use crate::field::FieldOracle;
use crate::geometry::{distance, BallSpec, Point};
use crate::growth::{ball_max_at, sphere_max_at};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CubeIndexOptions {
    pub centers_per_side: usize,
    pub radii_count: usize,
    pub resolution: usize,
}

impl Default for CubeIndexOptions {
    fn default() -> Self {
        CubeIndexOptions { centers_per_side: 2, radii_count: 2, resolution: 32 }
    }
}

/// `N(q)` for a tunnel cube: candidate centers on the cube's own lattice in
/// the box frame, radii `diam(q) 2^-j`, inflation `10 n`.
pub fn tunnel_cube_index(f: &FieldOracle, g: &TunnelGeometry, q: &TunnelCube, opts: &CubeIndexOptions) -> Result<f64> {
    let n = f.dim();
    let diam = q.side * (n as f64).sqrt();
    let inflation = 10.0 * n as f64;
    let m = opts.centers_per_side.max(2);
    let mut best = f64::NEG_INFINITY;
    let mut idx = vec![0usize; n];
    loop {
        let local: Vec<f64> = idx.iter().map(|&i| -0.5 + i as f64 / (m - 1) as f64).collect();
        let c = g.cube_point(q, &local);
        f.check_ball(&c, inflation * diam)?;
        for j in 0..opts.radii_count.max(1) {
            let r = diam * 0.5f64.powi(j as i32);
            let (inner, outer) = if f.is_harmonic() {
                (sphere_max_at(f, &c, r, opts.resolution).0, sphere_max_at(f, &c, inflation * r, opts.resolution).0)
            } else {
                (ball_max_at(f, &c, r, opts.resolution).0, ball_max_at(f, &c, inflation * r, opts.resolution).0)
            };
            let v = if inner > 0.0 { (outer / inner).ln() } else if outer > 0.0 { f64::INFINITY } else { 0.0 };
            best = best.max(v);
        }
        let mut axis = 0;
        loop {
            if axis == n {
                return Ok(best);
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

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TunnelClassification {
    pub threshold: f64,
    pub good_tunnels: Vec<usize>,
    /// Largest `N(q)` along each tunnel.
    pub max_index: Vec<f64>,
}

/// Tunnels all of whose cubes have `N(q) <= threshold`. An infinite
/// threshold accepts every tunnel without evaluating anything.
pub fn classify_good_tunnels(
    f: &FieldOracle,
    g: &TunnelGeometry,
    threshold: f64,
    opts: &CubeIndexOptions,
) -> Result<TunnelClassification> {
    if threshold == f64::INFINITY {
        return Ok(TunnelClassification {
            threshold,
            good_tunnels: (0..g.tunnels.len()).collect(),
            max_index: vec![f64::NAN; g.tunnels.len()],
        });
    }
    let max_index = g
        .tunnels
        .par_iter()
        .map(|t| {
            t.iter().try_fold(f64::NEG_INFINITY, |acc, q| tunnel_cube_index(f, g, q, opts).map(|v| acc.max(v)))
        })
        .collect::<Result<Vec<_>>>()?;
    let good_tunnels = max_index.iter().enumerate().filter(|(_, &v)| v <= threshold).map(|(i, _)| i).collect();
    Ok(TunnelClassification { threshold, good_tunnels, max_index })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignChangeCertificate {
    pub tunnel: usize,
    pub cube: usize,
    pub cube_center: Vec<f64>,
    pub cube_side: f64,
    /// Extremal samples of the cube grid.
    pub p_plus: Vec<f64>,
    pub p_minus: Vec<f64>,
    pub values: (f64, f64),
    /// Final bisection bracket on the segment `p_minus -- p_plus`, with
    /// `u(bracket_plus) > 0 > u(bracket_minus)`.
    pub bracket_plus: Vec<f64>,
    pub bracket_minus: Vec<f64>,
    /// Bracket midpoint and its value.
    pub zero: Vec<f64>,
    pub zero_value: f64,
}

/// Bisects `u` on the segment from `neg` (u < 0) to `pos` (u > 0) until the
/// bracket is shorter than `tol`.
fn bisect(f: &FieldOracle, neg: &[f64], pos: &[f64], tol: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>, f64) {
    let mut lo = neg.to_vec();
    let mut hi = pos.to_vec();
    let mut mid = vec![0.0; lo.len()];
    for _ in 0..200 {
        for i in 0..mid.len() {
            mid[i] = 0.5 * (lo[i] + hi[i]);
        }
        let v = f.value(&mid);
        if v == 0.0 {
            return (hi, lo, mid, 0.0);
        }
        if v > 0.0 {
            hi.copy_from_slice(&mid);
        } else {
            lo.copy_from_slice(&mid);
        }
        if distance(&lo, &hi) <= tol {
            break;
        }
    }
    for i in 0..mid.len() {
        mid[i] = 0.5 * (lo[i] + hi[i]);
    }
    let v = f.value(&mid);
    (hi, lo, mid, v)
}

fn certify_cube(f: &FieldOracle, g: &TunnelGeometry, q: &TunnelCube, samples: usize) -> Option<SignChangeCertificate> {
    let n = f.dim();
    let s = samples.max(2);
    let mut idx = vec![0usize; n];
    let mut plus: Option<(f64, Vec<f64>)> = None;
    let mut minus: Option<(f64, Vec<f64>)> = None;
    loop {
        let local: Vec<f64> = idx.iter().map(|&i| -0.5 + i as f64 / (s - 1) as f64).collect();
        let p = g.cube_point(q, &local);
        let v = f.value(&p);
        if v > 0.0 && plus.as_ref().is_none_or(|(b, _)| v > *b) {
            plus = Some((v, p));
        } else if v < 0.0 && minus.as_ref().is_none_or(|(b, _)| v < *b) {
            minus = Some((v, p));
        }
        let mut axis = 0;
        loop {
            if axis == n {
                let ((vp, pp), (vm, pm)) = (plus?, minus?);
                let (bp, bm, zero, zero_value) = bisect(f, &pm, &pp, 1e-12 * q.side);
                return Some(SignChangeCertificate {
                    tunnel: q.tunnel,
                    cube: q.index,
                    cube_center: q.center.clone(),
                    cube_side: q.side,
                    p_plus: pp,
                    p_minus: pm,
                    values: (vp, vm),
                    bracket_plus: bp,
                    bracket_minus: bm,
                    zero,
                    zero_value,
                });
            }
            idx[axis] += 1;
            if idx[axis] < s {
                break;
            }
            idx[axis] = 0;
            axis += 1;
        }
    }
}

/// Certificates for every cube of the selected tunnels whose sample grid
/// (`samples_per_cube` points per axis, faces included) shows both signs.
/// Sound by construction; completeness is limited by the sample grid.
pub fn detect_sign_changes(
    f: &FieldOracle,
    g: &TunnelGeometry,
    tunnels: &[usize],
    samples_per_cube: usize,
) -> Vec<SignChangeCertificate> {
    let per_tunnel: Vec<Vec<SignChangeCertificate>> = tunnels
        .par_iter()
        .map(|&i| g.tunnels[i].iter().filter_map(|q| certify_cube(f, g, q, samples_per_cube)).collect())
        .collect();
    per_tunnel.into_iter().flatten().collect()
}

/// Number of consecutive cube pairs `(t, t+1)` in a tunnel on whose union `u`
/// was seen to change sign.
pub fn sign_change_pairs(f: &FieldOracle, g: &TunnelGeometry, tunnel: usize, samples: usize) -> usize {
    let cubes = &g.tunnels[tunnel];
    let signs: Vec<(bool, bool)> = cubes
        .iter()
        .map(|q| {
            let n = f.dim();
            let s = samples.max(2);
            let (mut pos, mut neg) = (false, false);
            for k in 0..s.pow(n as u32) {
                let mut rem = k;
                let local: Vec<f64> = (0..n)
                    .map(|_| {
                        let i = rem % s;
                        rem /= s;
                        -0.5 + i as f64 / (s - 1) as f64
                    })
                    .collect();
                let v = f.value(&g.cube_point(q, &local));
                pos |= v > 0.0;
                neg |= v < 0.0;
            }
            (pos, neg)
        })
        .collect();
    signs.windows(2).filter(|w| (w[0].0 || w[1].0) && (w[0].1 || w[1].1)).count()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PackedBall {
    pub ball: BallSpec,
    /// Index into the certificate list.
    pub certificate: usize,
}

/// Greedy maximal packing in certificate order: a ball of the given radius
/// centered at a certificate's zero is kept when it lies inside `container`
/// and its center is more than `2 radius` from every kept center.
pub fn pack_disjoint_balls(certificates: &[SignChangeCertificate], radius: f64, container: &BallSpec) -> Vec<PackedBall> {
    let mut kept: Vec<PackedBall> = Vec::new();
    for (k, c) in certificates.iter().enumerate() {
        let inside = distance(&c.zero, container.center.as_slice()) + radius <= container.radius;
        if !inside {
            continue;
        }
        if kept.iter().all(|b| distance(&b.ball.center.coords, &c.zero) > 2.0 * radius) {
            kept.push(PackedBall {
                ball: BallSpec { center: Point { coords: c.zero.clone() }, radius },
                certificate: k,
            });
        }
    }
    kept
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cert_at(x: f64) -> SignChangeCertificate {
        SignChangeCertificate {
            tunnel: 0,
            cube: 0,
            cube_center: vec![x, 0.0],
            cube_side: 0.01,
            p_plus: vec![x, 0.0],
            p_minus: vec![x, 0.0],
            values: (1.0, -1.0),
            bracket_plus: vec![x, 0.0],
            bracket_minus: vec![x, 0.0],
            zero: vec![x, 0.0],
            zero_value: 0.0,
        }
    }

    #[test]
    fn packing_geometry() {
        let container = BallSpec::new(Point::origin(2), 10.0).unwrap();
        assert_eq!(pack_disjoint_balls(&[cert_at(0.0)], 0.1, &container).len(), 1);
        assert_eq!(pack_disjoint_balls(&[cert_at(0.0), cert_at(0.3)], 0.1, &container).len(), 2);
        assert_eq!(pack_disjoint_balls(&[cert_at(0.0), cert_at(0.15)], 0.1, &container).len(), 1);
        assert!(pack_disjoint_balls(&[cert_at(9.95)], 0.1, &container).is_empty());
    }
}
