//! Points, balls and axis-aligned cubes in flat Euclidean space.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Largest ambient dimension handled anywhere in the crate (lifts of 3D tori).
pub const MAX_DIM: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point {
    pub coords: Vec<f64>,
}

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() || coords.len() > MAX_DIM {
            return Err(LabError::UnsupportedDimension(coords.len()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(LabError::Invalid("non-finite coordinate".into()));
        }
        Ok(Point { coords })
    }

    pub fn origin(dim: usize) -> Self {
        Point { coords: vec![0.0; dim] }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn norm(&self) -> f64 {
        norm(&self.coords)
    }

    pub fn distance(&self, other: &Point) -> f64 {
        distance(&self.coords, &other.coords)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.coords
    }
}

impl From<&[f64]> for Point {
    fn from(s: &[f64]) -> Self {
        Point { coords: s.to_vec() }
    }
}

/// Parses `"0.1,0.2"` into a point.
impl std::str::FromStr for Point {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        let coords = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|e| LabError::Invalid(format!("bad coordinate {t:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Point::new(coords)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallSpec {
    pub center: Point,
    pub radius: f64,
}

impl BallSpec {
    pub fn new(center: Point, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(LabError::Invalid(format!("ball radius must be positive, got {radius}")));
        }
        Ok(BallSpec { center, radius })
    }

    /// Distance from the origin to the farthest point of the ball.
    pub fn outer_radius(&self) -> f64 {
        self.center.norm() + self.radius
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        distance(&self.center.coords, p) <= self.radius
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubeSpec {
    pub min_corner: Point,
    pub side: f64,
}

impl CubeSpec {
    pub fn new(min_corner: Point, side: f64) -> Result<Self> {
        if !(side > 0.0 && side.is_finite()) {
            return Err(LabError::Invalid(format!("cube side must be positive, got {side}")));
        }
        Ok(CubeSpec { min_corner, side })
    }

    /// The cube `[-h, h]^n`.
    pub fn centered(dim: usize, half_side: f64) -> Result<Self> {
        CubeSpec::new(Point { coords: vec![-half_side; dim] }, 2.0 * half_side)
    }

    pub fn dim(&self) -> usize {
        self.min_corner.dim()
    }

    pub fn diameter(&self) -> f64 {
        self.side * (self.dim() as f64).sqrt()
    }

    pub fn center(&self) -> Point {
        Point {
            coords: self.min_corner.coords.iter().map(|c| c + 0.5 * self.side).collect(),
        }
    }

    pub fn volume(&self) -> f64 {
        self.side.powi(self.dim() as i32)
    }

    /// Distance from the origin to the farthest corner.
    pub fn outer_radius(&self) -> f64 {
        self.min_corner
            .coords
            .iter()
            .map(|&c| {
                let far = c.abs().max((c + self.side).abs());
                far * far
            })
            .sum::<f64>()
            .sqrt()
    }
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Points of the Fibonacci lattice on the unit sphere in R^3.
pub fn fibonacci_sphere(count: usize) -> Vec<[f64; 3]> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / count as f64;
            let rho = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * i as f64;
            [rho * phi.cos(), rho * phi.sin(), z]
        })
        .collect()
}

/// Kahan-Babuska compensated sum.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}
