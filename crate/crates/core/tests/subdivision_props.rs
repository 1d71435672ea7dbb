//! Plateau sandwich, exact binomial tails and cube partitions.

use std::f64::consts::E;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

use nodal_lab::geometry::CubeSpec;
use nodal_lab::subdivision::{
    binomial, binomial_tail_exact, claim_k0_search, partition_cube, simulate_iteration_process, verify_k0,
};
use nodal_lab::windows::{find_plateau, SampledFunction};

fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn plateau_sandwich_holds_for_power_laws(c in 1.0f64..3.0, p in 0.5f64..4.0) {
        let f = |t: f64| E * (1.0 + c * t).powf(p) ;
        let top = f(1.0).ln();
        let g = SampledFunction::tabulate(0.0, 1.0, (45.0 * top * top) as usize + 2, f).unwrap();
        let r = find_plateau(&g).unwrap();
        prop_assert!(r.x < 0.5);
        prop_assert!(f(r.window.0) >= r.n * (1.0 - 1e-12));
        prop_assert!(f(r.window.1) <= E * r.n * (1.0 + 1e-12));
    }

    #[test]
    fn tail_is_a_nondecreasing_probability(num in 1i64..20, extra in 1i64..20, k in 0u64..25) {
        let p = rational(num, num + extra);
        let mut prev = BigRational::zero();
        for l in 0..=k {
            let t = binomial_tail_exact(&p, k, l).unwrap();
            prop_assert!(t >= prev && t <= BigRational::one());
            prev = t;
        }
        // Only the all-reductions outcome is excluded at l = k.
        let q = BigRational::one() - &p;
        prop_assert_eq!(prev, BigRational::one() - num_traits::pow(q, k as usize));
    }

    #[test]
    fn tail_satisfies_pascal(num in 1i64..10, extra in 1i64..10, (k, l) in (2u64..20).prop_flat_map(|k| (Just(k), 1..k))) {
        // P(Bin(k) < l) = p P(Bin(k-1) < l) + q P(Bin(k-1) < l-1), counting reductions with probability q.
        let p = rational(num, num + extra);
        let q = BigRational::one() - &p;
        let lhs = binomial_tail_exact(&p, k, l).unwrap();
        let rhs = &p * binomial_tail_exact(&p, k - 1, l).unwrap() + &q * binomial_tail_exact(&p, k - 1, l - 1).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn process_distribution_is_binomial(num in 1i64..6, extra in 1i64..6, k in 0u64..16, seed in 0u64..100) {
        let p = rational(num, num + extra);
        let q = BigRational::one() - &p;
        let d = simulate_iteration_process(&p, 0.5, 50.0, 1.0, k, 8, seed).unwrap();
        for (i, e) in d.exact.iter().enumerate() {
            let i = i as u64;
            let want = BigRational::from_integer(binomial(k, i).into())
                * num_traits::pow(p.clone(), (k - i) as usize)
                * num_traits::pow(q.clone(), i as usize);
            prop_assert_eq!(e, &want);
        }
    }

    #[test]
    fn partition_tiles_the_cube(n in 2usize..=3, b in 1usize..6, side in 0.1f64..3.0) {
        let q = CubeSpec::centered(n, side / 2.0).unwrap();
        let cubes = partition_cube(&q, b).unwrap();
        prop_assert_eq!(cubes.len(), b.pow(n as u32));
        let total: f64 = cubes.iter().map(|c| c.volume()).sum();
        prop_assert!((total - q.volume()).abs() <= 1e-12 * q.volume());
        for c in &cubes {
            let lo = c.min_corner.as_slice();
            let qlo = q.min_corner.as_slice();
            prop_assert!(lo.iter().zip(qlo).all(|(a, b)| *a >= b - 1e-12 && a + c.side <= b + q.side + 1e-12));
        }
    }
}

#[test]
fn k0_search_agrees_with_verification() {
    for (num, den) in [(1, 2), (1, 3), (2, 3)] {
        let p = rational(num, den);
        for (eps, sigma) in [(0.5, 0.1), (0.3, 0.2), (0.1, 0.05)] {
            match claim_k0_search(&p, eps, sigma, 120) {
                Ok(t) => {
                    assert!(verify_k0(&p, eps, sigma, t.k0, 120).unwrap());
                    if t.k0 > 2 {
                        assert!(!verify_k0(&p, eps, sigma, t.k0 - 1, 120).unwrap());
                    }
                }
                Err(e) => assert!(matches!(e, nodal_lab::LabError::NoValidK0 { .. } | nodal_lab::LabError::Precondition(_)), "{e}"),
            }
        }
    }
}
