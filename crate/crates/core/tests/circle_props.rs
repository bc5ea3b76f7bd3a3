use cubic_aux::circle::{count_zeros_box, count_zeros_brute, local_density, DiagonalSystem};
use cubic_aux::scalar::int;
use cubic_aux::Rational;
use proptest::prelude::*;

/// `#{x in [-P, P]^n : sum a_j x_j^3 = 0}` by nested loops.
fn direct(a: &[i64], p: i64) -> u64 {
    let n = a.len();
    let side = (2 * p + 1) as u64;
    let mut count = 0;
    for mut idx in 0..side.pow(n as u32) {
        let mut s = 0i64;
        for &aj in a {
            let x = (idx % side) as i64 - p;
            idx /= side;
            s += aj * x * x * x;
        }
        count += (s == 0) as u64;
    }
    count
}

fn scan_density(a: &[i64], p: u64, k: u32) -> Rational {
    let q = p.pow(k) as i64;
    let n = a.len();
    let mut count = 0i64;
    for mut idx in 0..(q as u64).pow(n as u32) {
        let mut s = 0i64;
        for &aj in a {
            let x = (idx % q as u64) as i64;
            idx /= q as u64;
            s += aj * x * x * x;
        }
        count += (s.rem_euclid(q) == 0) as i64;
    }
    int(count) / num_traits::pow(int(q), n - 1)
}

fn diag(n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<i64>> {
    n.prop_flat_map(|n| prop::collection::vec(-4i64..=4, n)).prop_filter("nonzero", |v| v.iter().any(|&a| a != 0))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn meet_in_the_middle_matches_brute(a in diag(1..=5), p in 1i64..=4) {
        let s = DiagonalSystem::unit_box(vec![a.clone()]).unwrap();
        let fast = count_zeros_box(&s, p).unwrap();
        prop_assert_eq!(fast, count_zeros_brute(&s, p).unwrap());
        prop_assert_eq!(fast, direct(&a, p));
    }

    #[test]
    fn count_is_symmetric_and_monotone(a in diag(2..=4), p in 1i64..=6) {
        let s = DiagonalSystem::unit_box(vec![a.clone()]).unwrap();
        let neg: Vec<i64> = a.iter().map(|v| -v).collect();
        let mut rev = a.clone();
        rev.reverse();
        let n = count_zeros_box(&s, p).unwrap();
        prop_assert_eq!(n, count_zeros_box(&DiagonalSystem::unit_box(vec![neg]).unwrap(), p).unwrap());
        prop_assert_eq!(n, count_zeros_box(&DiagonalSystem::unit_box(vec![rev]).unwrap(), p).unwrap());
        prop_assert!(n <= count_zeros_box(&s, p + 1).unwrap());
    }

    #[test]
    fn density_matches_scan(a in diag(1..=4), pk in prop::sample::select(vec![(2u64, 1u32), (2, 2), (3, 1), (3, 2), (5, 1), (7, 1)])) {
        let (p, k) = pk;
        let s = DiagonalSystem::unit_box(vec![a.clone()]).unwrap();
        prop_assert_eq!(local_density(&s, p, k).unwrap(), scan_density(&a, p, k));
    }

    #[test]
    fn density_is_invariant(a in diag(2..=5), perm_seed in any::<u64>(), u in prop::sample::select(vec![2i64, 4, 5, 8])) {
        // permuting variables, or multiplying a coefficient by the cube of a
        // unit mod 3^k (u^3 with 3 not dividing u), leaves sigma_{3,k} alone
        let s = DiagonalSystem::unit_box(vec![a.clone()]).unwrap();
        let mut b = a.clone();
        let n = b.len();
        b.rotate_left((perm_seed % n as u64) as usize);
        let i = (perm_seed / 7 % n as u64) as usize;
        b[i] *= u * u * u;
        let t = DiagonalSystem::unit_box(vec![b]).unwrap();
        for k in 1..=3 {
            prop_assert_eq!(local_density(&s, 3, k).unwrap(), local_density(&t, 3, k).unwrap());
        }
    }
}
