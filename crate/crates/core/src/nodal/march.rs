//! Marching squares (asymptotic decider, exact disk clipping) and marching
//! tetrahedra over a Kuhn split of each cube (clipping against the tangent
//! plane of the sphere nearest the cell).

use rayon::prelude::*;

use crate::field::FieldOracle;
use crate::geometry::{distance, CompensatedSum};

/// Lattice offsets in units of the cell size; irrational so that lattice
/// points avoid the nodal hyperplanes of the torus fields.
const OFFSETS: [f64; 3] = [0.381_966_011_250_105_1, 0.267_949_192_431_122_7, 0.414_213_562_373_095_1];

#[derive(Debug, Clone)]
pub struct Lattice {
    pub origin: Vec<f64>,
    pub h: f64,
    /// Cells per axis.
    pub cells: usize,
}

impl Lattice {
    pub fn covering(center: &[f64], radius: f64, h: f64) -> Self {
        let origin: Vec<f64> = center.iter().zip(OFFSETS).map(|(c, o)| c - radius - o * h).collect();
        let cells = ((2.0 * radius) / h).ceil() as usize + 2;
        Lattice { origin, h, cells }
    }

    pub fn cell_count(&self, dim: usize) -> u128 {
        (self.cells as u128).pow(dim as u32)
    }

    fn coord(&self, axis: usize, i: usize) -> f64 {
        self.origin[axis] + i as f64 * self.h
    }
}

/// Measure of the interpolated zero set inside the ball, with the midpoint of
/// every kept piece when `collect` is set.
pub fn march(f: &FieldOracle, center: &[f64], radius: f64, h: f64, collect: bool) -> (f64, Vec<Vec<f64>>) {
    let lat = Lattice::covering(center, radius, h);
    let rows: Vec<(f64, Vec<Vec<f64>>)> = match f.dim() {
        2 => (0..lat.cells).into_par_iter().map(|j| square_row(f, &lat, center, radius, j, collect)).collect(),
        3 => (0..lat.cells).into_par_iter().map(|k| cube_layer(f, &lat, center, radius, k, collect)).collect(),
        _ => unreachable!("marching supports dimensions 2 and 3"),
    };
    let mut total = CompensatedSum::default();
    let mut points = Vec::new();
    for (m, pts) in rows {
        total.add(m);
        points.extend(pts);
    }
    (total.value(), points)
}

fn lerp(a: &[f64], b: &[f64], va: f64, vb: f64) -> Vec<f64> {
    let t = va / (va - vb);
    a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
}

/// Parameter interval of the segment `a + t (b - a)`, `t in [0, 1]`, inside the disk.
fn clip_segment(a: &[f64], b: &[f64], c: &[f64], r: f64) -> Option<(f64, f64)> {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| y - x).collect();
    let w: Vec<f64> = a.iter().zip(c).map(|(x, y)| x - y).collect();
    let qa: f64 = d.iter().map(|x| x * x).sum();
    let qb: f64 = 2.0 * d.iter().zip(&w).map(|(x, y)| x * y).sum::<f64>();
    let qc: f64 = w.iter().map(|x| x * x).sum::<f64>() - r * r;
    if qa == 0.0 {
        return (qc <= 0.0).then_some((0.0, 1.0));
    }
    let disc = qb * qb - 4.0 * qa * qc;
    if disc <= 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    let (t1, t2) = ((-qb - sq) / (2.0 * qa), (-qb + sq) / (2.0 * qa));
    let (lo, hi) = (t1.max(0.0), t2.min(1.0));
    (hi > lo).then_some((lo, hi))
}

/// Where the cell `[lo, lo + h]^n` sits relative to the ball.
#[derive(PartialEq)]
enum Placement {
    Inside,
    Outside,
    Boundary,
}

fn placement(lo: &[f64], h: f64, c: &[f64], r: f64) -> Placement {
    let (mut near, mut far) = (0.0, 0.0);
    for (l, ci) in lo.iter().zip(c) {
        let (a, b) = (l - ci, l + h - ci);
        let n = if a > 0.0 { a } else if b < 0.0 { b } else { 0.0 };
        near += n * n;
        far += a.abs().max(b.abs()).powi(2);
    }
    if near > r * r {
        Placement::Outside
    } else if far <= r * r {
        Placement::Inside
    } else {
        Placement::Boundary
    }
}

fn push_segment(
    a: &[f64],
    b: &[f64],
    place: &Placement,
    c: &[f64],
    r: f64,
    acc: &mut CompensatedSum,
    pts: &mut Vec<Vec<f64>>,
    collect: bool,
) {
    let (lo, hi) = if *place == Placement::Inside {
        (0.0, 1.0)
    } else {
        match clip_segment(a, b, c, r) {
            Some(t) => t,
            None => return,
        }
    };
    acc.add((hi - lo) * distance(a, b));
    if collect {
        let t = 0.5 * (lo + hi);
        pts.push(a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect());
    }
}

fn square_row(f: &FieldOracle, lat: &Lattice, c: &[f64], r: f64, j: usize, collect: bool) -> (f64, Vec<Vec<f64>>) {
    let (y0, y1) = (lat.coord(1, j), lat.coord(1, j + 1));
    let lower: Vec<f64> = (0..=lat.cells).map(|i| f.value(&[lat.coord(0, i), y0])).collect();
    let upper: Vec<f64> = (0..=lat.cells).map(|i| f.value(&[lat.coord(0, i), y1])).collect();
    let mut acc = CompensatedSum::default();
    let mut pts = Vec::new();
    for i in 0..lat.cells {
        let (x0, x1) = (lat.coord(0, i), lat.coord(0, i + 1));
        let place = placement(&[x0, y0], lat.h, c, r);
        if place == Placement::Outside {
            continue;
        }
        // a = (x0,y0), b = (x1,y0), cc = (x1,y1), d = (x0,y1)
        let (va, vb, vc, vd) = (lower[i], lower[i + 1], upper[i + 1], upper[i]);
        let (pa, pb, pc, pd) = ([x0, y0], [x1, y0], [x1, y1], [x0, y1]);
        let s = |v: f64| v > 0.0;
        let bottom = (s(va) != s(vb)).then(|| lerp(&pa, &pb, va, vb));
        let right = (s(vb) != s(vc)).then(|| lerp(&pb, &pc, vb, vc));
        let top = (s(vd) != s(vc)).then(|| lerp(&pd, &pc, vd, vc));
        let left = (s(va) != s(vd)).then(|| lerp(&pa, &pd, va, vd));
        let edges: Vec<&Vec<f64>> = [&bottom, &right, &top, &left].into_iter().flatten().collect();
        match edges.len() {
            2 => push_segment(edges[0], edges[1], &place, c, r, &mut acc, &mut pts, collect),
            4 => {
                let (bottom, right, top, left) = (bottom.unwrap(), right.unwrap(), top.unwrap(), left.unwrap());
                let denom = va + vc - vb - vd;
                let saddle = if denom != 0.0 { (va * vc - vb * vd) / denom } else { 0.25 * (va + vb + vc + vd) };
                if s(saddle) == s(va) {
                    // a and c connected through the centre: b and d are cut off
                    push_segment(&bottom, &right, &place, c, r, &mut acc, &mut pts, collect);
                    push_segment(&top, &left, &place, c, r, &mut acc, &mut pts, collect);
                } else {
                    push_segment(&bottom, &left, &place, c, r, &mut acc, &mut pts, collect);
                    push_segment(&right, &top, &place, c, r, &mut acc, &mut pts, collect);
                }
            }
            _ => {}
        }
    }
    (acc.value(), pts)
}

/// The six tetrahedra of the Kuhn split: corner bits along the monotone
/// paths from `000` to `111`.
const KUHN: [[usize; 4]; 6] = [
    [0, 1, 3, 7],
    [0, 1, 5, 7],
    [0, 2, 3, 7],
    [0, 2, 6, 7],
    [0, 4, 5, 7],
    [0, 4, 6, 7],
];

fn polygon_area(poly: &[[f64; 3]]) -> f64 {
    let mut n = [0.0; 3];
    for w in 1..poly.len().saturating_sub(1) {
        let (a, b) = (sub(&poly[w], &poly[0]), sub(&poly[w + 1], &poly[0]));
        n[0] += a[1] * b[2] - a[2] * b[1];
        n[1] += a[2] * b[0] - a[0] * b[2];
        n[2] += a[0] * b[1] - a[1] * b[0];
    }
    0.5 * (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt()
}

fn sub(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn lerp3(a: &[f64; 3], b: &[f64; 3], va: f64, vb: f64) -> [f64; 3] {
    let t = va / (va - vb);
    [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]), a[2] + t * (b[2] - a[2])]
}

/// Sutherland-Hodgman against the half-space `g <= 0`, `g` affine.
fn clip_polygon(poly: &[[f64; 3]], g: impl Fn(&[f64; 3]) -> f64) -> Vec<[f64; 3]> {
    let mut out = Vec::with_capacity(poly.len() + 1);
    for i in 0..poly.len() {
        let (a, b) = (&poly[i], &poly[(i + 1) % poly.len()]);
        let (ga, gb) = (g(a), g(b));
        if ga <= 0.0 {
            out.push(*a);
        }
        if (ga <= 0.0) != (gb <= 0.0) {
            out.push(lerp3(a, b, ga, gb));
        }
    }
    out
}

fn tet_polygon(p: &[[f64; 3]; 4], v: &[f64; 4]) -> Vec<[f64; 3]> {
    let pos: Vec<usize> = (0..4).filter(|&i| v[i] > 0.0).collect();
    let neg: Vec<usize> = (0..4).filter(|&i| v[i] <= 0.0).collect();
    let e = |a: usize, b: usize| lerp3(&p[a], &p[b], v[a], v[b]);
    match (pos.len(), neg.len()) {
        (1, 3) => vec![e(pos[0], neg[0]), e(pos[0], neg[1]), e(pos[0], neg[2])],
        (3, 1) => vec![e(neg[0], pos[0]), e(neg[0], pos[1]), e(neg[0], pos[2])],
        (2, 2) => {
            let (a, b, c, d) = (pos[0], pos[1], neg[0], neg[1]);
            vec![e(a, c), e(a, d), e(b, d), e(b, c)]
        }
        _ => Vec::new(),
    }
}

fn cube_layer(f: &FieldOracle, lat: &Lattice, c: &[f64], r: f64, k: usize, collect: bool) -> (f64, Vec<Vec<f64>>) {
    let m = lat.cells + 1;
    let layer = |kk: usize| -> Vec<f64> {
        let z = lat.coord(2, kk);
        let mut v = Vec::with_capacity(m * m);
        for j in 0..m {
            for i in 0..m {
                v.push(f.value(&[lat.coord(0, i), lat.coord(1, j), z]));
            }
        }
        v
    };
    let (lo_layer, hi_layer) = (layer(k), layer(k + 1));
    let mut acc = CompensatedSum::default();
    let mut pts = Vec::new();
    let h = lat.h;
    for j in 0..lat.cells {
        for i in 0..lat.cells {
            let base = [lat.coord(0, i), lat.coord(1, j), lat.coord(2, k)];
            let place = placement(&base, h, c, r);
            if place == Placement::Outside {
                continue;
            }
            let mut corner_p = [[0.0; 3]; 8];
            let mut corner_v = [0.0; 8];
            for bits in 0..8 {
                let (di, dj, dk) = (bits & 1, bits >> 1 & 1, bits >> 2 & 1);
                corner_p[bits] = [base[0] + di as f64 * h, base[1] + dj as f64 * h, base[2] + dk as f64 * h];
                let layer = if dk == 0 { &lo_layer } else { &hi_layer };
                corner_v[bits] = layer[(j + dj) * m + i + di];
            }
            if corner_v.iter().all(|&v| v > 0.0) || corner_v.iter().all(|&v| v <= 0.0) {
                continue;
            }
            let mid = [base[0] + 0.5 * h, base[1] + 0.5 * h, base[2] + 0.5 * h];
            let rel = [mid[0] - c[0], mid[1] - c[1], mid[2] - c[2]];
            let len = (rel[0] * rel[0] + rel[1] * rel[1] + rel[2] * rel[2]).sqrt();
            let normal = [rel[0] / len, rel[1] / len, rel[2] / len];
            for tet in &KUHN {
                let p = [corner_p[tet[0]], corner_p[tet[1]], corner_p[tet[2]], corner_p[tet[3]]];
                let v = [corner_v[tet[0]], corner_v[tet[1]], corner_v[tet[2]], corner_v[tet[3]]];
                let mut poly = tet_polygon(&p, &v);
                if poly.is_empty() {
                    continue;
                }
                if place == Placement::Boundary {
                    poly = clip_polygon(&poly, |y| {
                        normal[0] * (y[0] - c[0]) + normal[1] * (y[1] - c[1]) + normal[2] * (y[2] - c[2]) - r
                    });
                    if poly.len() < 3 {
                        continue;
                    }
                }
                acc.add(polygon_area(&poly));
                if collect {
                    let k = poly.len() as f64;
                    pts.push((0..3).map(|a| poly.iter().map(|q| q[a]).sum::<f64>() / k).collect());
                }
            }
        }
    }
    (acc.value(), pts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn segment_clipping() {
        let (lo, hi) = clip_segment(&[-2.0, 0.0], &[2.0, 0.0], &[0.0, 0.0], 1.0).unwrap();
        assert!((lo - 0.25).abs() < 1e-15 && (hi - 0.75).abs() < 1e-15);
        assert!(clip_segment(&[-2.0, 1.5], &[2.0, 1.5], &[0.0, 0.0], 1.0).is_none());
    }

    #[test]
    fn tetra_cases() {
        let p = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        let tri = tet_polygon(&p, &[1.0, -1.0, -1.0, -1.0]);
        assert!((polygon_area(&tri) - 3f64.sqrt() / 8.0).abs() < 1e-12);
        let quad = tet_polygon(&p, &[1.0, 1.0, -1.0, -1.0]);
        assert_eq!(quad.len(), 4);
        assert!(polygon_area(&quad) > 0.0);
    }

    #[test]
    fn half_space_clip() {
        let sq = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [0.0, 1.0, 0.0]];
        let half = clip_polygon(&sq, |y| y[0] - 0.5);
        assert!((polygon_area(&half) - 0.5).abs() < 1e-15);
    }
}
