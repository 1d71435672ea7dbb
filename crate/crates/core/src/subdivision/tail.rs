//! Exact binomial tails and the search for the threshold `k0` beyond which
//! `sum_{i<l} C(k,i) p^(k-i) (1-p)^i <= p^(k(1-eps))` for all
//! `l <= sigma k / ln k`.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Parses `"num/den"`, an integer, or a finite decimal such as `"0.25"`
/// into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || LabError::Invalid(format!("not a rational number: {s:?}"));
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let digits: BigInt = format!("{int}{frac}").parse().map_err(|_| bad())?;
        let den = num_traits::pow(BigInt::from(10), frac.len());
        return Ok(BigRational::new(digits, den));
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(BigRational::from_integer(n))
}

/// `p = a / d` in lowest terms with `0 < a < d`.
fn split_probability(p: &BigRational) -> Result<(BigUint, BigUint)> {
    if !(p.is_positive() && p < &BigRational::one()) {
        return Err(LabError::Precondition(format!("p = {p} must lie in (0, 1)")));
    }
    let a = p.numer().to_biguint().expect("positive numerator");
    let d = p.denom().to_biguint().expect("positive denominator");
    Ok((a, d))
}

/// Numerators `C(k,i) a^(k-i) (d-a)^i` for `i < l`, all over `d^k`.
fn tail_terms(a: &BigUint, d: &BigUint, k: u64, l: u64) -> Vec<BigUint> {
    let b = d - a;
    let mut out = Vec::with_capacity(l as usize);
    let mut binom = BigUint::one();
    for i in 0..l.min(k + 1) {
        if i > 0 {
            binom = binom * BigUint::from(k - i + 1) / BigUint::from(i);
        }
        out.push(&binom * a.pow((k - i) as u32) * b.pow(i as u32));
    }
    out
}

/// `sum_{i=0}^{l-1} C(k,i) p^(k-i) (1-p)^i`, exactly.
pub fn binomial_tail_exact(p: &BigRational, k: u64, l: u64) -> Result<BigRational> {
    if l > k {
        return Err(LabError::Precondition(format!("need l <= k, got l = {l}, k = {k}")));
    }
    let (a, d) = split_probability(p)?;
    let num: BigUint = tail_terms(&a, &d, k, l).into_iter().sum();
    Ok(BigRational::new(num.into(), d.pow(k as u32).into()))
}

/// `ceil(k (1 - eps))` computed from the exact binary value of `eps`.
pub fn ceil_exponent(k: u64, epsilon: f64) -> u64 {
    let eps = BigRational::from_float(epsilon).expect("finite epsilon");
    let v = BigRational::from_integer(BigInt::from(k)) * (BigRational::one() - eps);
    v.ceil().to_integer().to_u64().unwrap_or(0)
}

/// Largest `l` allowed at `k`: `floor(sigma k / ln k)`, capped at `k`.
pub fn max_l(k: u64, sigma: f64) -> u64 {
    ((sigma * k as f64 / (k as f64).ln()).floor().max(0.0) as u64).min(k)
}

/// True when `tail(p, k, l) <= p^m` for the given `m`, exactly.
fn tail_below_power(a: &BigUint, d: &BigUint, tail_num: &BigUint, k: u64, m: u64) -> bool {
    // tail_num / d^k <= a^m / d^m  <=>  tail_num <= a^m d^(k-m)
    tail_num <= &(a.pow(m as u32) * d.pow((k - m) as u32))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailParams {
    /// `"num/den"`.
    pub p: String,
    pub epsilon: f64,
    pub sigma: f64,
    pub k0: u64,
    pub k_max: u64,
    /// Largest `k <= k_max` at which the inequality fails, if any.
    pub largest_violation: Option<u64>,
    /// Number of `(k, l)` pairs checked exactly.
    pub pairs_checked: u64,
}

/// Checks every `k in [2, k_max]` and every `l <= sigma k / ln k`, and
/// returns `k0 = 1 +` the largest failing `k` (or 2 when none fails).
/// The right side `p^(k(1-eps))` is replaced by the smaller `p^ceil(k(1-eps))`,
/// so a pass is always a true pass.
pub fn claim_k0_search(p: &BigRational, epsilon: f64, sigma: f64, k_max: u64) -> Result<TailParams> {
    let (a, d) = split_probability(p)?;
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(LabError::Precondition(format!("epsilon = {epsilon} must lie in (0, 1)")));
    }
    if !(sigma > 0.0) {
        return Err(LabError::Precondition(format!("sigma = {sigma} must be positive")));
    }
    let p_float = p.to_f64().unwrap_or(f64::NAN);
    let limit = epsilon / 3.0 * (1.0 / p_float).ln();
    if !(sigma < limit) {
        return Err(LabError::Precondition(format!("sigma = {sigma} must be below (eps/3) ln(1/p) = {limit}")));
    }
    if k_max < 10 {
        return Err(LabError::Precondition(format!("k_max = {k_max} must be at least 10")));
    }
    let mut largest_violation = None;
    let mut pairs_checked = 0;
    for k in 2..=k_max {
        let l_max = max_l(k, sigma);
        let m = ceil_exponent(k, epsilon);
        let mut partial = BigUint::zero();
        let mut ok = true;
        // l = 0 is the empty sum; l runs over 1..=l_max with partial sums.
        pairs_checked += 1;
        for term in tail_terms(&a, &d, k, l_max) {
            partial += term;
            pairs_checked += 1;
            if !tail_below_power(&a, &d, &partial, k, m) {
                ok = false;
            }
        }
        if !ok {
            largest_violation = Some(k);
        }
    }
    if largest_violation == Some(k_max) {
        return Err(LabError::NoValidK0 { k_max, largest_violation: k_max });
    }
    let k0 = largest_violation.map_or(2, |v| v + 1);
    Ok(TailParams {
        p: format!("{}/{}", p.numer(), p.denom()),
        epsilon,
        sigma,
        k0,
        k_max,
        largest_violation,
        pairs_checked,
    })
}

/// Re-checks `tail(p, k, l) <= p^ceil(k(1-eps))` as rationals for every
/// `k in [k0, k_max]` and `l <= sigma k / ln k`.
pub fn verify_k0(p: &BigRational, epsilon: f64, sigma: f64, k0: u64, k_max: u64) -> Result<bool> {
    for k in k0.max(2)..=k_max {
        let bound = num_traits::pow(p.clone(), ceil_exponent(k, epsilon) as usize);
        for l in 0..=max_l(k, sigma) {
            if binomial_tail_exact(p, k, l)? > bound {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// `C(k, i)` as a big integer.
pub fn binomial(k: u64, i: u64) -> BigUint {
    if i > k {
        return BigUint::zero();
    }
    let i = i.min(k - i);
    let mut acc = BigUint::one();
    for j in 0..i {
        acc = acc * BigUint::from(k - j) / BigUint::from(j + 1);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half() -> BigRational {
        parse_rational("1/2").unwrap()
    }

    #[test]
    fn parses_rationals() {
        assert_eq!(parse_rational("0.25").unwrap(), parse_rational("1/4").unwrap());
        assert_eq!(parse_rational("3").unwrap(), BigRational::from_integer(3.into()));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn small_tails() {
        assert_eq!(binomial_tail_exact(&half(), 1, 1).unwrap(), half());
        assert!(binomial_tail_exact(&half(), 7, 0).unwrap().is_zero());
        let expected = BigRational::new(4_087_976.into(), num_traits::pow(BigInt::from(2), 100));
        assert_eq!(binomial_tail_exact(&half(), 100, 5).unwrap(), expected);
        assert!(binomial_tail_exact(&half(), 3, 4).is_err());
    }

    #[test]
    fn exponent_rounding() {
        assert_eq!(ceil_exponent(10, 0.5), 5);
        // 0.1 is slightly above 1/10 in binary, so 10 * 0.9... is just below 9.
        assert_eq!(ceil_exponent(10, 0.1), 9);
        assert_eq!(ceil_exponent(3, 0.5), 2);
    }

    #[test]
    fn k0_gate() {
        assert!(matches!(claim_k0_search(&half(), 0.5, 0.2, 200), Err(LabError::Precondition(_))));
        assert!(claim_k0_search(&half(), 0.5, 0.1, 9).is_err());
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(10, 3), BigUint::from(120u32));
        assert_eq!(binomial(3, 5), BigUint::zero());
    }
}
