//! Cube partitions, doubling-index censuses, exact binomial tails and the
//! saturating iteration process.

mod process;
mod tail;

pub use process::{simulate_iteration_process, ProcessDistribution, ProcessRow};
pub use tail::{binomial, binomial_tail_exact, ceil_exponent, claim_k0_search, max_l, parse_rational, verify_k0, TailParams};

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::field::FieldOracle;
use crate::geometry::{CubeSpec, Point};
use crate::growth::{CandidateGrid, CandidateTable};

pub const DEFAULT_SUBCUBE_BUDGET: u128 = 10_000_000;

/// `B^n` subcubes of side `side / B` in lexicographic order of their integer
/// grid coordinates, the first axis varying fastest.
pub fn partition_cube(q: &CubeSpec, b: usize) -> Result<Vec<CubeSpec>> {
    partition_cube_with_budget(q, b, DEFAULT_SUBCUBE_BUDGET)
}

pub fn partition_cube_with_budget(q: &CubeSpec, b: usize, budget: u128) -> Result<Vec<CubeSpec>> {
    if b == 0 {
        return Err(LabError::Precondition("partition parameter must be positive".into()));
    }
    let n = q.dim();
    let requested = (b as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if requested > budget {
        return Err(LabError::BudgetExceeded { requested, budget });
    }
    let side = q.side / b as f64;
    let mut out = Vec::with_capacity(requested as usize);
    let mut idx = vec![0usize; n];
    loop {
        let coords = (0..n).map(|i| q.min_corner.coords[i] + q.side * idx[i] as f64 / b as f64).collect();
        out.push(CubeSpec { min_corner: Point { coords }, side });
        let mut axis = 0;
        loop {
            if axis == n {
                return Ok(out);
            }
            idx[axis] += 1;
            if idx[axis] < b {
                break;
            }
            idx[axis] = 0;
            axis += 1;
        }
    }
}

/// Grid coordinates of subcube `k` in the order of [`partition_cube`].
pub fn grid_index(k: usize, b: usize, n: usize) -> Vec<usize> {
    let mut rem = k;
    (0..n)
        .map(|_| {
            let i = rem % b;
            rem /= b;
            i
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CensusOptions {
    /// Candidate centers per subcube edge.
    pub centers_per_side: usize,
    /// Dyadic radii available to each subcube.
    pub radii_count: usize,
    /// Sphere sampling resolution of each ball sup.
    pub resolution: usize,
    pub budget: u128,
}

impl Default for CensusOptions {
    fn default() -> Self {
        CensusOptions { centers_per_side: 3, radii_count: 3, resolution: 32, budget: DEFAULT_SUBCUBE_BUDGET }
    }
}

impl CensusOptions {
    /// The same census on the doubled candidate set.
    pub fn doubled(&self) -> Self {
        CensusOptions { centers_per_side: 2 * self.centers_per_side - 1, radii_count: self.radii_count + 1, ..*self }
    }

    fn grid(&self, q: &CubeSpec, b: usize) -> Result<CandidateGrid> {
        let mut g = CandidateGrid::for_partition(q, b, self.centers_per_side, self.radii_count)?;
        g.resolution = self.resolution;
        Ok(g)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubdivisionCensus {
    pub parent: CubeSpec,
    #[serde(rename = "B")]
    pub b: usize,
    pub threshold: f64,
    /// `N(q)` in the order of [`partition_cube`].
    pub indices: Vec<f64>,
    pub count_above: usize,
    /// `N(parent)` on the same candidate lattice.
    pub parent_index: f64,
    /// `count_above / B^(n-1)`.
    pub fraction: f64,
}

fn census_from_table(table: &CandidateTable, q: &CubeSpec, b: usize, threshold: f64, parent_index: f64, budget: u128) -> Result<SubdivisionCensus> {
    let cubes = partition_cube_with_budget(q, b, budget)?;
    let indices = cubes.iter().map(|c| table.query(c).map(|i| i.value)).collect::<Result<Vec<_>>>()?;
    let count_above = indices.iter().filter(|&&v| v > threshold).count();
    let n = q.dim() as i32;
    Ok(SubdivisionCensus {
        parent: q.clone(),
        b,
        threshold,
        indices,
        count_above,
        parent_index,
        fraction: count_above as f64 / (b as f64).powi(n - 1),
    })
}

fn checked_subcubes(q: &CubeSpec, b: usize, budget: u128) -> Result<()> {
    let requested = (b as u128).checked_pow(q.dim() as u32).unwrap_or(u128::MAX);
    if requested > budget {
        return Err(LabError::BudgetExceeded { requested, budget });
    }
    Ok(())
}

/// Census of `N(q)` over the `B^n` subcubes of `q`, with all indices read
/// from one aligned candidate table.
pub fn census_high_index(f: &FieldOracle, q: &CubeSpec, b: usize, threshold: f64, opts: &CensusOptions) -> Result<SubdivisionCensus> {
    checked_subcubes(q, b, opts.budget)?;
    let table = CandidateTable::build(f, &opts.grid(q, b)?, q)?;
    let parent_index = table.query(q)?.value;
    census_from_table(&table, q, b, threshold, parent_index, opts.budget)
}

/// How the census threshold depends on `N(Q)` and `B`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum ThresholdRule {
    Fixed { value: f64 },
    /// `max(factor N(Q), floor)`.
    Relative { factor: f64, floor: f64 },
    /// `max(N(Q) 2^(-c1 ln B / ln ln B), N0)`, with `ln ln B` clamped below at 1.
    LogDecay { c1: f64, n0: f64 },
}

impl ThresholdRule {
    pub fn threshold(&self, parent_index: f64, b: usize) -> f64 {
        match *self {
            ThresholdRule::Fixed { value } => value,
            ThresholdRule::Relative { factor, floor } => (factor * parent_index).max(floor),
            ThresholdRule::LogDecay { c1, n0 } => {
                let lb = (b as f64).ln();
                let llb = lb.ln().max(1.0);
                (parent_index * 2f64.powf(-c1 * lb / llb)).max(n0)
            }
        }
    }
}

/// Censuses at `B = A, A^2, ..., A^k`, all read from one candidate table
/// aligned to the finest level so that every index is comparable.
pub fn iterated_census(
    f: &FieldOracle,
    q: &CubeSpec,
    a: usize,
    k: u32,
    rule: &ThresholdRule,
    opts: &CensusOptions,
) -> Result<Vec<SubdivisionCensus>> {
    if a < 2 || k == 0 {
        return Err(LabError::Precondition("iterated census needs A >= 2 and k >= 1".into()));
    }
    let finest = a.checked_pow(k).ok_or(LabError::BudgetExceeded { requested: u128::MAX, budget: opts.budget })?;
    checked_subcubes(q, finest, opts.budget)?;
    let table = CandidateTable::build(f, &opts.grid(q, finest)?, q)?;
    let parent_index = table.query(q)?.value;
    (1..=k)
        .map(|level| {
            let b = a.pow(level);
            census_from_table(&table, q, b, rule.threshold(parent_index, b), parent_index, opts.budget)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_square_in_two() {
        let q = CubeSpec::new(Point::origin(2), 1.0).unwrap();
        let parts = partition_cube(&q, 2).unwrap();
        let corners: Vec<Vec<f64>> = parts.iter().map(|c| c.min_corner.coords.clone()).collect();
        assert_eq!(corners, vec![vec![0.0, 0.0], vec![0.5, 0.0], vec![0.0, 0.5], vec![0.5, 0.5]]);
        assert!(parts.iter().all(|c| c.side == 0.5));
    }

    #[test]
    fn unit_cube_in_three() {
        let q = CubeSpec::new(Point::origin(3), 1.0).unwrap();
        let parts = partition_cube(&q, 3).unwrap();
        assert_eq!(parts.len(), 27);
        let v: f64 = parts.iter().map(|c| c.volume()).sum();
        assert!((v - 1.0).abs() < 1e-15);
        assert_eq!(partition_cube(&q, 1).unwrap(), vec![q.clone()]);
        assert!(matches!(partition_cube(&q, 1000), Err(LabError::BudgetExceeded { .. })));
    }

    #[test]
    fn constant_census_is_empty() {
        let f = FieldOracle::constant(2, 1.0).unwrap();
        let q = CubeSpec::new(Point::new(vec![0.0, 0.0]).unwrap(), 0.1).unwrap();
        let c = census_high_index(&f, &q, 4, 1e-9, &CensusOptions::default()).unwrap();
        assert_eq!(c.count_above, 0);
        assert_eq!(c.indices.len(), 16);
    }

    #[test]
    fn thresholds() {
        let r = ThresholdRule::LogDecay { c1: 1.0, n0: 10.0 };
        assert_eq!(r.threshold(5.0, 64), 10.0);
        assert_eq!(ThresholdRule::Relative { factor: 0.8, floor: 0.0 }.threshold(10.0, 4), 8.0);
    }
}
