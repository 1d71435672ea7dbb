//! Exactly evaluatable scalar fields.
//!
//! Three kinds are supported: harmonic polynomials built from solid
//! harmonics, finite trigonometric eigenfunctions of the flat torus, and the
//! harmonic lift `h(x, t) = u(x) exp(sqrt(lambda) t)` of a torus
//! eigenfunction. All evaluation is pure; oracles are immutable and `Sync`.

mod jet;
mod spec;

pub use jet::{Jet, Scalar};
pub use spec::{FieldSpec, HarmonicTerm, Mode, Part, Phase};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::geometry::{norm, Point, MAX_DIM};

pub const DEFAULT_DOMAIN_RADIUS: f64 = 4.0;
/// Highest solid-harmonic degree accepted in three dimensions.
pub const MAX_SOLID_DEGREE: u32 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldKind {
    HarmonicPolynomial,
    TorusEigenfunction,
    Lift,
}

#[derive(Debug, Clone)]
enum Repr {
    /// `sum a_d Re z^d + b_d Im z^d`, `z = x1 + i x2`.
    Planar { re: Vec<f64>, im: Vec<f64> },
    /// Schmidt-normalised real solid harmonics; `cos[l][m]`, `sin[l][m]`.
    Solid { cos: Vec<Vec<f64>>, sin: Vec<Vec<f64>> },
    Torus(TorusTerms),
    Lift { base: TorusTerms, rate: f64 },
}

#[derive(Debug, Clone)]
struct TorusTerms {
    modes: Vec<(Vec<f64>, f64, Phase)>,
}

impl TorusTerms {
    fn eval<S: Scalar>(&self, x: &[S]) -> S {
        let mut acc = S::constant(0.0);
        for (k, w, phase) in &self.modes {
            let mut arg = S::constant(0.0);
            for (ki, xi) in k.iter().zip(x) {
                if *ki != 0.0 {
                    arg = arg + xi.scale(*ki);
                }
            }
            let t = match phase {
                Phase::Sin => arg.sin(),
                Phase::Cos => arg.cos(),
            };
            acc = acc + t.scale(*w);
        }
        acc
    }
}

/// An evaluatable field with its analytic metadata.
#[derive(Debug, Clone)]
pub struct FieldOracle {
    dim: usize,
    kind: FieldKind,
    degree: Option<u32>,
    eigenvalue: Option<f64>,
    domain_radius: f64,
    seed: Option<u64>,
    spec: FieldSpec,
    repr: Repr,
}

fn double_factorial_odd(m: u32) -> f64 {
    // (2m - 1)!!
    (1..=m).map(|i| (2 * i - 1) as f64).product()
}

/// Factor turning `r^l P_l^m(cos theta) cos(m phi)` into its Schmidt
/// semi-normalised form, whose modulus is at most `r^l`.
fn schmidt_factor(l: u32, m: u32) -> f64 {
    let ratio: f64 = ((l - m + 1)..=(l + m)).map(|j| 1.0 / j as f64).product();
    let two = if m == 0 { 1.0 } else { 2.0 };
    (two * ratio).sqrt()
}

impl FieldOracle {
    /// Builds a harmonic polynomial in dimension 2 (`Re/Im z^d`) or 3 (real
    /// solid harmonics of degree `l` and order `m`).
    pub fn harmonic_polynomial(dim: usize, terms: &[HarmonicTerm]) -> Result<Self> {
        Self::harmonic_with_seed(dim, terms, None)
    }

    fn harmonic_with_seed(dim: usize, terms: &[HarmonicTerm], seed: Option<u64>) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(LabError::UnsupportedDimension(dim));
        }
        if terms.is_empty() {
            return Err(LabError::EmptySpec);
        }
        let degree = terms.iter().map(|t| t.degree).max().unwrap_or(0);
        let repr = if dim == 2 {
            let mut re = vec![0.0; degree as usize + 1];
            let mut im = vec![0.0; degree as usize + 1];
            for t in terms {
                match t.part {
                    Part::Cos => re[t.degree as usize] += t.weight,
                    Part::Sin => {
                        if t.degree == 0 {
                            return Err(LabError::Invalid("Im z^0 vanishes identically".into()));
                        }
                        im[t.degree as usize] += t.weight
                    }
                }
            }
            Repr::Planar { re, im }
        } else {
            if degree > MAX_SOLID_DEGREE {
                return Err(LabError::Invalid(format!(
                    "solid harmonic degree {degree} exceeds {MAX_SOLID_DEGREE}"
                )));
            }
            let n = degree as usize + 1;
            let mut cos = vec![vec![0.0; n]; n];
            let mut sin = vec![vec![0.0; n]; n];
            for t in terms {
                let (l, m) = (t.degree, t.order);
                if m > l {
                    return Err(LabError::Invalid(format!("order {m} exceeds degree {l}")));
                }
                let w = t.weight * schmidt_factor(l, m);
                match t.part {
                    Part::Cos => cos[l as usize][m as usize] += w,
                    Part::Sin => {
                        if m == 0 {
                            return Err(LabError::Invalid("sine part of order 0 vanishes".into()));
                        }
                        sin[l as usize][m as usize] += w
                    }
                }
            }
            Repr::Solid { cos, sin }
        };
        let spec = FieldSpec {
            kind: FieldKind::HarmonicPolynomial,
            dim,
            degree: Some(degree),
            eigenvalue: None,
            coefficients: Some(terms.to_vec()),
            modes: None,
            domain_radius: Some(DEFAULT_DOMAIN_RADIUS),
            seed,
        };
        Ok(FieldOracle {
            dim,
            kind: FieldKind::HarmonicPolynomial,
            degree: Some(degree),
            eigenvalue: None,
            domain_radius: DEFAULT_DOMAIN_RADIUS,
            seed,
            spec,
            repr,
        })
    }

    /// Canonical basis of harmonic polynomials of degree at most `degree`.
    pub fn basis(dim: usize, degree: u32) -> Result<Vec<HarmonicTerm>> {
        let mut out = Vec::new();
        match dim {
            2 => {
                for d in 0..=degree {
                    out.push(HarmonicTerm::planar(d, Part::Cos, 1.0));
                    if d > 0 {
                        out.push(HarmonicTerm::planar(d, Part::Sin, 1.0));
                    }
                }
            }
            3 => {
                for l in 0..=degree {
                    for m in 0..=l {
                        out.push(HarmonicTerm::solid(l, m, Part::Cos, 1.0));
                        if m > 0 {
                            out.push(HarmonicTerm::solid(l, m, Part::Sin, 1.0));
                        }
                    }
                }
            }
            _ => return Err(LabError::UnsupportedDimension(dim)),
        }
        Ok(out)
    }

    /// Independent standard-normal weights on every basis element of degree
    /// at most `degree`, drawn from a ChaCha8 stream seeded with `seed`.
    pub fn random_harmonic(dim: usize, degree: u32, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut terms = Self::basis(dim, degree)?;
        for t in &mut terms {
            t.weight = StandardNormal.sample(&mut rng);
        }
        Self::harmonic_with_seed(dim, &terms, Some(seed))
    }

    /// [`Self::random_harmonic`] without its constant term, so `u(0) = 0`.
    pub fn random_harmonic_vanishing(dim: usize, degree: u32, seed: u64) -> Result<Self> {
        if degree == 0 {
            return Err(LabError::Invalid("a vanishing field needs degree >= 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut terms = Self::basis(dim, degree)?;
        for t in &mut terms {
            t.weight = StandardNormal.sample(&mut rng);
        }
        terms.retain(|t| t.degree > 0);
        Self::harmonic_with_seed(dim, &terms, Some(seed))
    }

    /// Homogeneous field `Re z^d` in the plane or `Re (x1 + i x2)^d` in space.
    pub fn homogeneous(dim: usize, degree: u32) -> Result<Self> {
        let term = if dim == 2 {
            HarmonicTerm::planar(degree, Part::Cos, 1.0)
        } else {
            HarmonicTerm::solid(degree, degree, Part::Cos, 1.0)
        };
        Self::harmonic_polynomial(dim, &[term])
    }

    pub fn constant(dim: usize, value: f64) -> Result<Self> {
        let term = if dim == 2 {
            HarmonicTerm::planar(0, Part::Cos, value)
        } else {
            HarmonicTerm::solid(0, 0, Part::Cos, value)
        };
        Self::harmonic_polynomial(dim, &[term])
    }

    /// The coordinate function `x1`.
    pub fn coordinate(dim: usize) -> Result<Self> {
        Self::homogeneous(dim, 1)
    }

    /// `sum w sin(k.x)` / `cos(k.x)` with all `|k|^2` equal.
    pub fn torus_eigenfunction(dim: usize, modes: &[Mode]) -> Result<Self> {
        if !(2..=3).contains(&dim) {
            return Err(LabError::UnsupportedDimension(dim));
        }
        if modes.is_empty() {
            return Err(LabError::EmptySpec);
        }
        let mut first: Option<i64> = None;
        for m in modes {
            if m.k.len() != dim {
                return Err(LabError::DimensionMismatch { expected: dim, got: m.k.len() });
            }
            let k2: i64 = m.k.iter().map(|k| k * k).sum();
            match first {
                None => first = Some(k2),
                Some(f) if f != k2 => return Err(LabError::InconsistentModes { first: f, other: k2 }),
                _ => {}
            }
        }
        if modes.iter().all(|m| m.weight == 0.0) {
            return Err(LabError::Invalid("all mode weights are zero".into()));
        }
        let lambda = first.unwrap_or(0) as f64;
        if lambda <= 0.0 {
            return Err(LabError::Invalid("eigenvalue must be positive".into()));
        }
        let terms = TorusTerms {
            modes: modes
                .iter()
                .map(|m| (m.k.iter().map(|&k| k as f64).collect(), m.weight, m.phase))
                .collect(),
        };
        let spec = FieldSpec {
            kind: FieldKind::TorusEigenfunction,
            dim,
            degree: None,
            eigenvalue: Some(lambda),
            coefficients: None,
            modes: Some(modes.to_vec()),
            domain_radius: Some(DEFAULT_DOMAIN_RADIUS),
            seed: None,
        };
        Ok(FieldOracle {
            dim,
            kind: FieldKind::TorusEigenfunction,
            degree: None,
            eigenvalue: Some(lambda),
            domain_radius: DEFAULT_DOMAIN_RADIUS,
            seed: None,
            spec,
            repr: Repr::Torus(terms),
        })
    }

    /// `sin(k x1) sin(k x2)` with eigenvalue `2k^2`, written as two cosine modes.
    pub fn grid_eigenfunction(k: i64) -> Result<Self> {
        Self::torus_eigenfunction(
            2,
            &[
                Mode { k: vec![k, -k], weight: 0.5, phase: Phase::Cos },
                Mode { k: vec![k, k], weight: -0.5, phase: Phase::Cos },
            ],
        )
    }

    /// Harmonic lift `h(x, t) = u(x) exp(sqrt(lambda) t)` in one more dimension.
    pub fn lift(&self) -> Result<Self> {
        let lambda = self.eigenvalue.ok_or(LabError::MissingEigenvalue)?;
        let base = match &self.repr {
            Repr::Torus(t) => t.clone(),
            _ => return Err(LabError::Precondition("lift requires a torus eigenfunction".into())),
        };
        let dim = self.dim + 1;
        let mut spec = self.spec.clone();
        spec.kind = FieldKind::Lift;
        spec.dim = dim;
        spec.domain_radius = Some(self.domain_radius);
        Ok(FieldOracle {
            dim,
            kind: FieldKind::Lift,
            degree: None,
            eigenvalue: Some(lambda),
            domain_radius: self.domain_radius,
            seed: None,
            spec,
            repr: Repr::Lift { base, rate: lambda.sqrt() },
        })
    }

    pub fn with_domain_radius(mut self, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(LabError::Invalid(format!("domain radius must be positive, got {radius}")));
        }
        self.domain_radius = radius;
        self.spec.domain_radius = Some(radius);
        Ok(self)
    }

    pub fn from_spec(spec: &FieldSpec) -> Result<Self> {
        let oracle = match spec.kind {
            FieldKind::HarmonicPolynomial => match &spec.coefficients {
                Some(c) => Self::harmonic_with_seed(spec.dim, c, spec.seed)?,
                None => {
                    let (Some(d), Some(seed)) = (spec.degree, spec.seed) else {
                        return Err(LabError::EmptySpec);
                    };
                    Self::random_harmonic(spec.dim, d, seed)?
                }
            },
            FieldKind::TorusEigenfunction => {
                let modes = spec.modes.as_deref().ok_or(LabError::EmptySpec)?;
                Self::torus_eigenfunction(spec.dim, modes)?
            }
            FieldKind::Lift => {
                let modes = spec.modes.as_deref().ok_or(LabError::EmptySpec)?;
                if spec.dim < 3 {
                    return Err(LabError::UnsupportedDimension(spec.dim));
                }
                Self::torus_eigenfunction(spec.dim - 1, modes)?.lift()?
            }
        };
        if let Some(expected) = spec.eigenvalue {
            if let Some(actual) = oracle.eigenvalue {
                if (expected - actual).abs() > 1e-9 * actual.max(1.0) {
                    return Err(LabError::Invalid(format!(
                        "declared eigenvalue {expected} differs from |k|^2 = {actual}"
                    )));
                }
            }
        }
        match spec.domain_radius {
            Some(r) => oracle.with_domain_radius(r),
            None => Ok(oracle),
        }
    }

    pub fn to_spec(&self) -> FieldSpec {
        self.spec.clone()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn kind(&self) -> FieldKind {
        self.kind
    }
    pub fn degree(&self) -> Option<u32> {
        self.degree
    }
    pub fn eigenvalue(&self) -> Option<f64> {
        self.eigenvalue
    }
    pub fn domain_radius(&self) -> f64 {
        self.domain_radius
    }
    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// True when the field satisfies `Delta u = 0`, so sup norms over balls are
    /// attained on the bounding sphere.
    pub fn is_harmonic(&self) -> bool {
        !matches!(self.kind, FieldKind::TorusEigenfunction)
    }

    /// Checked evaluation at a point of the closed domain ball.
    pub fn evaluate(&self, p: &Point) -> Result<f64> {
        if p.dim() != self.dim {
            return Err(LabError::DimensionMismatch { expected: self.dim, got: p.dim() });
        }
        self.check_point(p.as_slice())?;
        Ok(self.value(p.as_slice()))
    }

    pub fn check_point(&self, p: &[f64]) -> Result<()> {
        let r = norm(p);
        if r > self.domain_radius * (1.0 + 1e-12) {
            return Err(LabError::OutsideDomain { radius: r, domain: self.domain_radius });
        }
        Ok(())
    }

    /// Fails unless the closed ball `B(center, radius)` lies inside the domain.
    pub fn check_ball(&self, center: &[f64], radius: f64) -> Result<()> {
        if center.len() != self.dim {
            return Err(LabError::DimensionMismatch { expected: self.dim, got: center.len() });
        }
        let r = norm(center) + radius;
        if r > self.domain_radius * (1.0 + 1e-12) {
            return Err(LabError::OutsideDomain { radius: r, domain: self.domain_radius });
        }
        Ok(())
    }

    /// Unchecked value; `p.len()` must equal `dim`.
    #[inline]
    pub fn value(&self, p: &[f64]) -> f64 {
        let mut x = [0.0; MAX_DIM];
        x[..self.dim].copy_from_slice(&p[..self.dim]);
        self.eval_generic(&x[..self.dim])
    }

    /// Value and exact gradient.
    pub fn value_and_gradient(&self, p: &[f64]) -> (f64, [f64; MAX_DIM]) {
        let mut x = [Jet::constant(0.0); MAX_DIM];
        for (i, xi) in x.iter_mut().enumerate().take(self.dim) {
            *xi = Jet::variable(p[i], i);
        }
        let j: Jet = self.eval_generic(&x[..self.dim]);
        (j.v, j.g)
    }

    fn eval_generic<S: Scalar>(&self, x: &[S]) -> S {
        match &self.repr {
            Repr::Planar { re, im } => eval_planar(re, im, x[0], x[1]),
            Repr::Solid { cos, sin } => eval_solid(cos, sin, x[0], x[1], x[2]),
            Repr::Torus(t) => t.eval(x),
            Repr::Lift { base, rate } => {
                let n = x.len() - 1;
                base.eval(&x[..n]) * x[n].scale(*rate).exp()
            }
        }
    }
}

fn eval_planar<S: Scalar>(re: &[f64], im: &[f64], x: S, y: S) -> S {
    let mut acc = S::constant(re[0]);
    let (mut zr, mut zi) = (S::constant(1.0), S::constant(0.0));
    for d in 1..re.len() {
        let nr = zr * x - zi * y;
        let ni = zr * y + zi * x;
        zr = nr;
        zi = ni;
        if re[d] != 0.0 {
            acc = acc + zr.scale(re[d]);
        }
        if im[d] != 0.0 {
            acc = acc + zi.scale(im[d]);
        }
    }
    acc
}

fn eval_solid<S: Scalar>(cos: &[Vec<f64>], sin: &[Vec<f64>], x: S, y: S, z: S) -> S {
    let lmax = cos.len() - 1;
    let r2 = x * x + y * y + z * z;
    let mut total = S::constant(0.0);
    let (mut cm, mut sm) = (S::constant(1.0), S::constant(0.0));
    for m in 0..=lmax {
        if m > 0 {
            let nc = cm * x - sm * y;
            let ns = sm * x + cm * y;
            cm = nc;
            sm = ns;
        }
        let top = (m..=lmax).rev().find(|&l| cos[l][m] != 0.0 || sin[l][m] != 0.0);
        let Some(top) = top else { continue };
        // r^l P_l^m(cos theta) / (sin theta)^m r^m as a polynomial in z and r^2.
        let mut prev2 = S::constant(0.0);
        let mut prev = S::constant(double_factorial_odd(m as u32));
        let mut acc_c = prev.scale(cos[m][m]);
        let mut acc_s = prev.scale(sin[m][m]);
        for l in (m + 1)..=top {
            let cur = if l == m + 1 {
                (z * prev).scale((2 * m + 1) as f64)
            } else {
                ((z * prev).scale((2 * l - 1) as f64) - (r2 * prev2).scale((l + m - 1) as f64))
                    .scale(1.0 / (l - m) as f64)
            };
            prev2 = prev;
            prev = cur;
            if cos[l][m] != 0.0 {
                acc_c = acc_c + cur.scale(cos[l][m]);
            }
            if sin[l][m] != 0.0 {
                acc_s = acc_s + cur.scale(sin[l][m]);
            }
        }
        total = total + acc_c * cm + acc_s * sm;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use std::f64::consts::PI;

    fn laplacian(f: &FieldOracle, p: &[f64], h: f64) -> f64 {
        let u0 = f.value(p);
        let mut acc = 0.0;
        for i in 0..f.dim() {
            let mut a = p.to_vec();
            let mut b = p.to_vec();
            a[i] += h;
            b[i] -= h;
            acc += f.value(&a) + f.value(&b) - 2.0 * u0;
        }
        acc / (h * h)
    }

    #[test]
    fn planar_coordinate_and_degree() {
        let f = FieldOracle::harmonic_polynomial(2, &[HarmonicTerm::planar(1, Part::Cos, 1.0)]).unwrap();
        assert_eq!(f.degree(), Some(1));
        assert_eq!(f.evaluate(&Point { coords: vec![0.7, -3.0] }).unwrap(), 0.7);
    }

    #[test]
    fn solid_product_x1x2() {
        // Schmidt normalisation makes (l=2, m=2, sin) equal to sqrt(3) x1 x2.
        let w = 1.0 / 3f64.sqrt();
        let f = FieldOracle::harmonic_polynomial(3, &[HarmonicTerm::solid(2, 2, Part::Sin, w)]).unwrap();
        assert_eq!(f.degree(), Some(2));
        assert!((f.value(&[1.0, 1.0, 0.0]) - 1.0).abs() < 1e-14);
        assert!((f.value(&[2.0, 3.0, 0.0]) - 6.0).abs() < 1e-13);
        assert!((f.value(&[2.0, 3.0, 1.7]) - 6.0).abs() < 1e-13);
    }

    #[test]
    fn re_z2_vanishes_on_diagonal() {
        let f = FieldOracle::homogeneous(2, 2).unwrap();
        assert_eq!(f.value(&[1.0, 1.0]), 0.0);
    }

    #[test]
    fn solid_low_orders_are_coordinates() {
        let x = FieldOracle::coordinate(3).unwrap();
        assert_eq!(x.value(&[0.3, 0.4, 0.5]), 0.3);
        let z = FieldOracle::harmonic_polynomial(3, &[HarmonicTerm::solid(1, 0, Part::Cos, 1.0)]).unwrap();
        assert_eq!(z.value(&[0.3, 0.4, 0.5]), 0.5);
        let zonal = FieldOracle::harmonic_polynomial(3, &[HarmonicTerm::solid(2, 0, Part::Cos, 1.0)]).unwrap();
        // r^2 P_2(cos) = (3 z^2 - r^2) / 2
        let p = [0.3, 0.4, 0.5];
        assert!((zonal.value(&p) - (3.0 * 0.25 - 0.5) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn empty_and_unsupported() {
        assert_eq!(FieldOracle::harmonic_polynomial(2, &[]).unwrap_err(), LabError::EmptySpec);
        assert_eq!(
            FieldOracle::harmonic_polynomial(4, &[HarmonicTerm::planar(1, Part::Cos, 1.0)]).unwrap_err(),
            LabError::UnsupportedDimension(4)
        );
    }

    #[test]
    fn re_z8_discrete_laplacian_small() {
        let f = FieldOracle::homogeneous(2, 8).unwrap();
        // Sup scale of the field over its domain ball B(0, 4).
        let scale = f.domain_radius().powi(8);
        let lap3 = laplacian(&f, &[0.3, 0.4], 1e-3);
        let lap2 = laplacian(&f, &[0.3, 0.4], 1e-2);
        assert!(lap3.abs() < 1e-6 * scale, "laplacian {lap3}");
        // Second-order truncation: a decade in h buys two decades.
        assert!(lap3.abs() < 2e-2 * lap2.abs());
    }

    #[test]
    fn random_solid_harmonics_are_harmonic() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (dim, degree) in [(2, 12), (3, 10), (3, 30)] {
            let f = FieldOracle::random_harmonic(dim, degree, 11).unwrap();
            for _ in 0..100 {
                let p: Vec<f64> = (0..dim).map(|_| rng.random_range(-0.5..0.5)).collect();
                // Sup scale over the surrounding unit box.
                let scale = (0..20)
                    .map(|_| {
                        let q: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
                        f.value(&q).abs()
                    })
                    .fold(1e-300, f64::max);
                let r2 = laplacian(&f, &p, 1e-2).abs() / scale;
                let r3 = laplacian(&f, &p, 1e-3).abs() / scale;
                assert!(r2 < 1e-1 && r3 < 1e-3, "dim {dim} deg {degree}: {r2} {r3}");
            }
        }
    }

    #[test]
    fn torus_examples() {
        let f = FieldOracle::torus_eigenfunction(2, &[Mode { k: vec![5, 0], weight: 1.0, phase: Phase::Sin }]).unwrap();
        assert_eq!(f.eigenvalue(), Some(25.0));
        assert_eq!(f.evaluate(&Point { coords: vec![0.1, 0.0] }).unwrap(), 0.5f64.sin());
        let g = FieldOracle::torus_eigenfunction(2, &[Mode { k: vec![3, 4], weight: 1.0, phase: Phase::Sin }]).unwrap();
        assert_eq!(g.eigenvalue(), Some(25.0));
        assert!((g.value(&[PI / 6.0, 0.0]) - 1.0).abs() < 1e-15);
        let bad = FieldOracle::torus_eigenfunction(
            2,
            &[
                Mode { k: vec![3, 4], weight: 1.0, phase: Phase::Sin },
                Mode { k: vec![1, 1], weight: 1.0, phase: Phase::Sin },
            ],
        );
        assert_eq!(bad.unwrap_err(), LabError::InconsistentModes { first: 25, other: 2 });
    }

    #[test]
    fn torus_eigen_residual() {
        let f = FieldOracle::torus_eigenfunction(3, &[Mode { k: vec![2, 2, 1], weight: 1.0, phase: Phase::Cos }]).unwrap();
        assert_eq!(f.eigenvalue(), Some(9.0));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let p: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
            let res2 = (laplacian(&f, &p, 1e-2) + 9.0 * f.value(&p)).abs();
            let res3 = (laplacian(&f, &p, 1e-3) + 9.0 * f.value(&p)).abs();
            // O(h^2): the residual drops by roughly 100 per decade of h.
            assert!(res2 < 1e-2 && res3 < 2e-4, "{res2} {res3}");
        }
    }

    #[test]
    fn torus_periodicity() {
        let f = FieldOracle::grid_eigenfunction(3).unwrap();
        let a = f.value(&[0.3, 0.2]);
        let b = f.value(&[0.3 + 2.0 * PI, 0.2 - 2.0 * PI]);
        assert!((a - b).abs() < 1e-12);
        assert!((a - (0.9f64.sin() * 0.6f64.sin())).abs() < 1e-14);
    }

    #[test]
    fn lift_examples() {
        let u = FieldOracle::torus_eigenfunction(2, &[Mode { k: vec![1, 0], weight: 1.0, phase: Phase::Sin }])
            .unwrap()
            .with_domain_radius(10.0)
            .unwrap();
        let h = u.lift().unwrap();
        assert_eq!(h.dim(), 3);
        assert!(h.value(&[PI, 0.0, 7.0]).abs() < 1e-12);
        assert!((h.value(&[PI / 2.0, 0.0, 1.0]) - 1f64.exp()).abs() < 1e-15);
        assert_eq!(FieldOracle::homogeneous(2, 3).unwrap().lift().unwrap_err(), LabError::MissingEigenvalue);
    }

    #[test]
    fn lift_is_harmonic() {
        let u = FieldOracle::torus_eigenfunction(
            2,
            &[
                Mode { k: vec![3, 0], weight: 1.0, phase: Phase::Sin },
                Mode { k: vec![0, 3], weight: 1.0, phase: Phase::Sin },
            ],
        )
        .unwrap();
        let h = u.lift().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let p: Vec<f64> = (0..3).map(|_| rng.random_range(-0.5..0.5)).collect();
            let expected = u.value(&p[..2]) * (3.0 * p[2]).exp();
            assert!((h.value(&p) - expected).abs() <= 1e-15 * expected.abs().max(1.0));
        }
        for _ in 0..50 {
            let p: Vec<f64> = (0..3).map(|_| rng.random_range(-0.5..0.5)).collect();
            let res = laplacian(&h, &p, 1e-3).abs();
            assert!(res < 1e-3, "{res}");
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let f = FieldOracle::random_harmonic(3, 8, 2).unwrap();
        let p = [0.2, -0.3, 0.4];
        let (v, g) = f.value_and_gradient(&p);
        assert!((v - f.value(&p)).abs() < 1e-13);
        for i in 0..3 {
            let mut a = p;
            let mut b = p;
            a[i] += 1e-6;
            b[i] -= 1e-6;
            let fd = (f.value(&a) - f.value(&b)) / 2e-6;
            assert!((fd - g[i]).abs() < 1e-6 * (1.0 + g[i].abs()), "{fd} vs {}", g[i]);
        }
    }

    #[test]
    fn domain_violation_reports_radius() {
        let f = FieldOracle::coordinate(2).unwrap();
        let err = f.evaluate(&Point { coords: vec![5.0, 0.0] }).unwrap_err();
        assert_eq!(err, LabError::OutsideDomain { radius: 5.0, domain: 4.0 });
    }

    #[test]
    fn spec_round_trip() {
        let f = FieldOracle::random_harmonic(3, 5, 42).unwrap().with_domain_radius(2.5).unwrap();
        let json = serde_json::to_string(&f.to_spec()).unwrap();
        let g = FieldOracle::from_spec(&serde_json::from_str(&json).unwrap()).unwrap();
        assert_eq!(g.seed(), Some(42));
        assert_eq!(g.domain_radius(), 2.5);
        let p = [0.1, 0.2, 0.3];
        assert_eq!(f.value(&p).to_bits(), g.value(&p).to_bits());
        let lifted = FieldOracle::grid_eigenfunction(2).unwrap().lift().unwrap();
        let json = serde_json::to_string(&lifted.to_spec()).unwrap();
        let back = FieldOracle::from_spec(&serde_json::from_str(&json).unwrap()).unwrap();
        assert_eq!(back.kind(), FieldKind::Lift);
        assert_eq!(back.value(&[0.1, 0.2, 0.3]).to_bits(), lifted.value(&[0.1, 0.2, 0.3]).to_bits());
    }
}
