use serde::{Deserialize, Serialize};

use super::FieldKind;

/// Real or imaginary part of `(x1 + i x2)^m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Part {
    #[serde(alias = "re")]
    Cos,
    #[serde(alias = "im")]
    Sin,
}

/// One basis element of a harmonic polynomial.
///
/// In the plane the element is `Re z^degree` (`cos`) or `Im z^degree`
/// (`sin`) and `order` is ignored. In space it is the Schmidt semi-normalised
/// solid harmonic `r^l P_l^m(cos theta) cos(m phi)` (or `sin`), scaled by
/// `sqrt((2 - delta_m0) (l - m)! / (l + m)!)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarmonicTerm {
    pub degree: u32,
    #[serde(default)]
    pub order: u32,
    pub part: Part,
    pub weight: f64,
}

impl HarmonicTerm {
    pub fn planar(degree: u32, part: Part, weight: f64) -> Self {
        HarmonicTerm { degree, order: degree, part, weight }
    }

    pub fn solid(degree: u32, order: u32, part: Part, weight: f64) -> Self {
        HarmonicTerm { degree, order, part, weight }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Sin,
    Cos,
}

/// `weight * sin(k . x)` or `weight * cos(k . x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Mode {
    pub k: Vec<i64>,
    pub weight: f64,
    pub phase: Phase,
}

/// JSON document describing an oracle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    pub kind: FieldKind,
    pub dim: usize,
    #[serde(default)]
    pub degree: Option<u32>,
    #[serde(default)]
    pub eigenvalue: Option<f64>,
    #[serde(default)]
    pub coefficients: Option<Vec<HarmonicTerm>>,
    #[serde(default)]
    pub modes: Option<Vec<Mode>>,
    #[serde(default)]
    pub domain_radius: Option<f64>,
    #[serde(default)]
    pub seed: Option<u64>,
}
