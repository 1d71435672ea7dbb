//! Quadrature rules on circles and spheres.
//!
//! The circle uses the equispaced trapezoid rule, which is exact for
//! trigonometric polynomials of degree below the point count. The 2-sphere
//! uses Gauss-Legendre nodes in `cos(theta)` times a trapezoid rule with twice
//! as many points in azimuth.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Newton iteration on `P_n` from the Chebyshev-like initial guesses.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Unit directions and weights integrating over the unit sphere `S^{n-1}`.
#[derive(Debug, Clone)]
pub struct SphereRule {
    pub dim: usize,
    pub directions: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

impl SphereRule {
    fn build(dim: usize, order: usize) -> Self {
        match dim {
            2 => {
                let directions = (0..order)
                    .map(|i| {
                        let t = 2.0 * PI * i as f64 / order as f64;
                        [t.cos(), t.sin(), 0.0]
                    })
                    .collect();
                SphereRule { dim, directions, weights: vec![2.0 * PI / order as f64; order] }
            }
            3 => {
                let gl = GaussLegendre::new(order);
                let azimuth = 2 * order;
                let mut directions = Vec::with_capacity(order * azimuth);
                let mut weights = Vec::with_capacity(order * azimuth);
                for (ct, wt) in gl.nodes.iter().zip(&gl.weights) {
                    let st = (1.0 - ct * ct).max(0.0).sqrt();
                    for j in 0..azimuth {
                        let phi = 2.0 * PI * j as f64 / azimuth as f64;
                        directions.push([st * phi.cos(), st * phi.sin(), *ct]);
                        weights.push(wt * 2.0 * PI / azimuth as f64);
                    }
                }
                SphereRule { dim, directions, weights }
            }
            _ => panic!("sphere rules exist for dimensions 2 and 3"),
        }
    }

    /// Shared, lazily built rule for `(dim, order)`.
    pub fn cached(dim: usize, order: usize) -> Arc<SphereRule> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<SphereRule>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("quadrature cache poisoned");
        guard
            .entry((dim, order))
            .or_insert_with(|| Arc::new(SphereRule::build(dim, order)))
            .clone()
    }

    /// Surface area of the unit sphere, as integrated by the rule.
    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }
}
