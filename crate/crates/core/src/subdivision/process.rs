//! The saturating iteration process: at each of `k` steps the index is kept
//! with probability `p` and divided by `1 + c` otherwise, floored at `N0`.
//!
//! After `k` steps only the number `i` of reductions matters, so the exact
//! law is a distribution over `i` and the final index is
//! `max(N_start / (1 + c)^i, N0)`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ProcessDistribution {
    pub p: BigRational,
    pub c: f64,
    pub n_start: f64,
    pub n0: f64,
    pub k: u64,
    /// `exact[i] = P(i reductions)`, by dynamic programming over steps.
    pub exact: Vec<BigRational>,
    /// Monte Carlo counts of `i` reductions.
    pub counts: Vec<u64>,
    pub trials: u64,
    pub seed: u64,
}

/// One row of the serialised summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessRow {
    pub reductions: u64,
    pub final_n: f64,
    /// Exact probability as `"num/den"`.
    pub exact: String,
    pub exact_f64: f64,
    pub empirical: f64,
}

impl ProcessDistribution {
    /// Final index after `i` reductions.
    pub fn final_value(&self, i: u64) -> f64 {
        (self.n_start / (1.0 + self.c).powi(i as i32)).max(self.n0)
    }

    /// `P(at least l reductions)`, exactly.
    pub fn prob_at_least(&self, l: u64) -> BigRational {
        self.exact.iter().skip(l as usize).fold(BigRational::zero(), |acc, x| acc + x)
    }

    /// Empirical `P(at least l reductions)`.
    pub fn empirical_at_least(&self, l: u64) -> f64 {
        let hits: u64 = self.counts.iter().skip(l as usize).sum();
        hits as f64 / self.trials as f64
    }

    /// `P(N_final <= level)`, exactly. Since the final index is
    /// nonincreasing in the reduction count this is a tail in `i`.
    pub fn prob_final_at_most(&self, level: f64) -> BigRational {
        let first = (0..=self.k).find(|&i| self.final_value(i) <= level);
        first.map_or_else(BigRational::zero, |i| self.prob_at_least(i))
    }

    pub fn rows(&self) -> Vec<ProcessRow> {
        (0..=self.k)
            .map(|i| {
                let e = &self.exact[i as usize];
                ProcessRow {
                    reductions: i,
                    final_n: self.final_value(i),
                    exact: format!("{}/{}", e.numer(), e.denom()),
                    exact_f64: e.to_f64().unwrap_or(f64::NAN),
                    empirical: self.counts[i as usize] as f64 / self.trials as f64,
                }
            })
            .collect()
    }
}

pub fn simulate_iteration_process(
    p: &BigRational,
    c: f64,
    n_start: f64,
    n0: f64,
    k: u64,
    trials: u64,
    seed: u64,
) -> Result<ProcessDistribution> {
    let one = BigRational::one();
    if !(p > &BigRational::zero() && p < &one) {
        return Err(LabError::Precondition(format!("p = {p} must lie in (0, 1)")));
    }
    if trials == 0 {
        return Err(LabError::Precondition("trials must be at least 1".into()));
    }
    if !(c > 0.0) {
        return Err(LabError::Precondition(format!("c = {c} must be positive")));
    }
    let q = &one - p;
    let mut exact = vec![BigRational::zero(); k as usize + 1];
    exact[0] = one.clone();
    for step in 0..k as usize {
        for i in (0..=step + 1).rev() {
            let keep = &exact[i] * p;
            let reduce = if i > 0 { &exact[i - 1] * &q } else { BigRational::zero() };
            exact[i] = keep + reduce;
        }
    }
    debug_assert_eq!(exact.iter().fold(BigRational::zero(), |a, x| a + x), BigRational::from_integer(BigInt::one()));

    let p_keep = p.to_f64().unwrap_or(f64::NAN);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; k as usize + 1];
    for _ in 0..trials {
        let mut reductions = 0;
        for _ in 0..k {
            if rng.random::<f64>() >= p_keep {
                reductions += 1;
            }
        }
        counts[reductions] += 1;
    }
    Ok(ProcessDistribution { p: p.clone(), c, n_start, n0, k, exact, counts, trials, seed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subdivision::tail::parse_rational;

    #[test]
    fn one_step() {
        let p = parse_rational("1/3").unwrap();
        let d = simulate_iteration_process(&p, 0.25, 100.0, 10.0, 1, 10, 1).unwrap();
        assert_eq!(d.prob_at_least(1), parse_rational("2/3").unwrap());
    }

    #[test]
    fn ten_steps() {
        let p = parse_rational("1/2").unwrap();
        let d = simulate_iteration_process(&p, 0.25, 1000.0, 1.0, 10, 100, 1).unwrap();
        assert_eq!(d.prob_at_least(3), parse_rational("968/1024").unwrap());
        let level = 1000.0 / 1.25f64.powi(3);
        assert_eq!(d.prob_final_at_most(level), parse_rational("968/1024").unwrap());
    }

    #[test]
    fn floor_saturation() {
        let p = parse_rational("1/2").unwrap();
        let d = simulate_iteration_process(&p, 0.25, 5.0, 10.0, 7, 50, 3).unwrap();
        assert!((0..=7).all(|i| d.final_value(i) == 10.0));
        assert_eq!(d.prob_final_at_most(10.0), BigRational::one());
    }
}
