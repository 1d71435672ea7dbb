//! Doubling index of a cube on an aligned candidate lattice.
//!
//! `N(Q)` is the maximum over centers `x` in `Q` and radii `r <= diam(Q)` of
//! `log(sup_{B(x, 10 n r)} |u| / sup_{B(x, r)} |u|)`. The candidate centers
//! sit on a global lattice `anchor + i * spacing` and the radii on the dyadic
//! ladder `top * 2^-j`. A subcube uses exactly the lattice points it contains
//! and the rungs not exceeding its diameter, so its candidates are a subset
//! of those of any enclosing cube on the same lattice and `N(q) <= N(Q)`
//! holds exactly, not just up to sampling error.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sup::sphere_max_at;
use super::sup::ball_max_at;
use crate::error::{LabError, Result};
use crate::field::FieldOracle;
use crate::geometry::CubeSpec;

/// Upper bound on `(center, radius)` candidates in one table.
pub const CANDIDATE_BUDGET: u128 = 10_000_000;
const LATTICE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateGrid {
    pub anchor: Vec<f64>,
    pub spacing: f64,
    /// Largest radius, `top * 2^-j` for `j < radii_count`.
    pub top_radius: f64,
    pub radii_count: usize,
    /// Ratio of outer to inner ball radius.
    pub inflation: f64,
    /// Sphere sampling resolution of every ball sup.
    pub resolution: usize,
}

impl CandidateGrid {
    /// `centers_per_side` lattice points along each edge of `q`, radii
    /// `diam(q) 2^-j` for `j < radii_count`.
    pub fn for_cube(q: &CubeSpec, centers_per_side: usize, radii_count: usize) -> Result<Self> {
        Self::for_partition(q, 1, centers_per_side, radii_count)
    }

    /// Lattice fine enough that each of the `b^n` subcubes of `q` sees
    /// `centers_per_side` points per edge and `radii_count` rungs.
    pub fn for_partition(q: &CubeSpec, b: usize, centers_per_side: usize, radii_count: usize) -> Result<Self> {
        if centers_per_side < 2 || radii_count < 1 || b < 1 {
            return Err(LabError::Precondition(
                "candidate grids need at least 2 centers per side and 1 radius".into(),
            ));
        }
        let skipped = (b as f64).log2().ceil() as usize;
        Ok(CandidateGrid {
            anchor: q.min_corner.coords.clone(),
            spacing: q.side / (b * (centers_per_side - 1)) as f64,
            top_radius: q.diameter(),
            radii_count: skipped + radii_count,
            inflation: 10.0 * q.dim() as f64,
            resolution: 32,
        })
    }

    /// The doubled candidate set: half the spacing and one more rung.
    pub fn refined(&self) -> Self {
        CandidateGrid { spacing: self.spacing / 2.0, radii_count: self.radii_count + 1, ..self.clone() }
    }

    pub fn radius(&self, j: usize) -> f64 {
        self.top_radius * 0.5f64.powi(j as i32)
    }

    /// First rung not exceeding `diam`.
    fn first_rung(&self, diam: f64) -> usize {
        (0..self.radii_count).find(|&j| self.radius(j) <= diam * (1.0 + LATTICE_SLACK)).unwrap_or(self.radii_count)
    }

    /// Inclusive per-axis lattice index ranges of the points inside `q`.
    fn index_range(&self, q: &CubeSpec) -> Vec<(i64, i64)> {
        q.min_corner
            .coords
            .iter()
            .zip(&self.anchor)
            .map(|(m, a)| {
                let lo = ((m - a) / self.spacing - LATTICE_SLACK).ceil() as i64;
                let hi = ((m + q.side - a) / self.spacing + LATTICE_SLACK).floor() as i64;
                (lo, hi)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubeIndex {
    /// Natural-log doubling index.
    pub value: f64,
    pub center: Vec<f64>,
    pub radius: f64,
}

/// Log sup ratios for every lattice point of a region and every rung.
#[derive(Debug, Clone)]
pub struct CandidateTable {
    grid: CandidateGrid,
    lo: Vec<i64>,
    extent: Vec<usize>,
    values: Vec<f64>,
}

fn ball_sup(f: &FieldOracle, c: &[f64], r: f64, res: usize) -> f64 {
    if f.is_harmonic() {
        sphere_max_at(f, c, r, res).0
    } else {
        ball_max_at(f, c, r, res).0
    }
}

impl CandidateTable {
    pub fn build(f: &FieldOracle, grid: &CandidateGrid, region: &CubeSpec) -> Result<Self> {
        let n = f.dim();
        if region.dim() != n || grid.anchor.len() != n {
            return Err(LabError::DimensionMismatch { expected: n, got: region.dim() });
        }
        let ranges = grid.index_range(region);
        let lo: Vec<i64> = ranges.iter().map(|r| r.0).collect();
        let extent: Vec<usize> = ranges.iter().map(|r| (r.1 - r.0 + 1).max(0) as usize).collect();
        let points: u128 = extent.iter().map(|&e| e as u128).product();
        let requested = points * grid.radii_count as u128;
        if requested > CANDIDATE_BUDGET {
            return Err(LabError::BudgetExceeded { requested, budget: CANDIDATE_BUDGET });
        }
        let table = CandidateTable { grid: grid.clone(), lo, extent, values: Vec::new() };
        // The farthest inflated ball decides the domain check.
        let outer = grid.inflation * grid.radius(0);
        for corner in 0..(1usize << n) {
            let c: Vec<f64> = (0..n)
                .map(|i| {
                    let idx = if corner >> i & 1 == 1 { table.lo[i] + table.extent[i] as i64 - 1 } else { table.lo[i] };
                    grid.anchor[i] + idx as f64 * grid.spacing
                })
                .collect();
            f.check_ball(&c, outer)?;
        }
        let rungs = grid.radii_count;
        let values: Vec<f64> = (0..points as usize)
            .into_par_iter()
            .flat_map_iter(|k| {
                let c = table.point(k);
                (0..rungs)
                    .map(|j| {
                        let r = grid.radius(j);
                        let inner = ball_sup(f, &c, r, grid.resolution);
                        let outer = ball_sup(f, &c, grid.inflation * r, grid.resolution);
                        if inner > 0.0 {
                            (outer / inner).ln()
                        } else if outer > 0.0 {
                            f64::INFINITY
                        } else {
                            0.0
                        }
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
        Ok(CandidateTable { values, ..table })
    }

    fn point(&self, k: usize) -> Vec<f64> {
        let mut rem = k;
        (0..self.extent.len())
            .map(|i| {
                let idx = self.lo[i] + (rem % self.extent[i]) as i64;
                rem /= self.extent[i];
                self.grid.anchor[i] + idx as f64 * self.grid.spacing
            })
            .collect()
    }

    pub fn grid(&self) -> &CandidateGrid {
        &self.grid
    }

    /// `N(q)` from the stored candidates of `q`; `q` must lie in the region.
    /// Ties go to the first candidate in lattice then rung order.
    pub fn query(&self, q: &CubeSpec) -> Result<CubeIndex> {
        let ranges = self.grid.index_range(q);
        let first = self.grid.first_rung(q.diameter());
        let n = ranges.len();
        let mut offsets = Vec::with_capacity(n);
        for (i, (a, b)) in ranges.iter().enumerate() {
            if *a < self.lo[i] || *b >= self.lo[i] + self.extent[i] as i64 {
                return Err(LabError::Precondition("query cube exceeds the candidate table".into()));
            }
            if a > b {
                return Err(LabError::Precondition("query cube holds no lattice point".into()));
            }
            offsets.push(((a - self.lo[i]) as usize, (b - self.lo[i]) as usize));
        }
        if first >= self.grid.radii_count {
            return Err(LabError::Precondition("query cube is smaller than every rung".into()));
        }
        let mut best = CubeIndex { value: f64::NEG_INFINITY, center: Vec::new(), radius: 0.0 };
        let mut best_k = 0;
        let mut idx: Vec<usize> = offsets.iter().map(|o| o.0).collect();
        'outer: loop {
            let mut k = 0;
            let mut stride = 1;
            for i in 0..n {
                k += idx[i] * stride;
                stride *= self.extent[i];
            }
            for j in first..self.grid.radii_count {
                let v = self.values[k * self.grid.radii_count + j];
                if v > best.value || (v == best.value && (k, j) < (best_k, 0)) {
                    best.value = v;
                    best.radius = self.grid.radius(j);
                    best_k = k;
                }
            }
            let mut axis = 0;
            loop {
                if axis == n {
                    break 'outer;
                }
                idx[axis] += 1;
                if idx[axis] <= offsets[axis].1 {
                    break;
                }
                idx[axis] = offsets[axis].0;
                axis += 1;
            }
        }
        best.center = self.point(best_k);
        Ok(best)
    }
}

/// `N(Q)` on its own candidate lattice.
pub fn doubling_index_cube(f: &FieldOracle, q: &CubeSpec, centers_per_side: usize, radii_count: usize) -> Result<f64> {
    Ok(doubling_index_cube_with(f, q, &CandidateGrid::for_cube(q, centers_per_side, radii_count)?)?.value)
}

pub fn doubling_index_cube_with(f: &FieldOracle, q: &CubeSpec, grid: &CandidateGrid) -> Result<CubeIndex> {
    CandidateTable::build(f, grid, q)?.query(q)
}
