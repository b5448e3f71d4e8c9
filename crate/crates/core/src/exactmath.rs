//! Combinatorial primitives over exact and generic scalars.
//!
//! The falling factorial follows the convention that `(z)_k = 0` whenever
//! `z <= k - 1`, for every real (here: every ordered-field) `z`. This is not
//! the polynomial falling factorial; for `z = 1/2, k = 2` it is `0`, not
//! `-1/4`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{FromPrimitive, Num, One, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type ExactInt = BigInt;
pub type ExactRat = crate::scalar::Rational;

fn from_u64<T: FromPrimitive>(v: u64) -> T {
    T::from_u64(v).expect("small integer is representable")
}

/// `(z)_k`: zero when `z <= k - 1`, otherwise `z (z-1) ... (z-k+1)`.
/// `(z)_0 = 1`.
pub fn falling_factorial<T>(z: &T, k: u32) -> T
where
    T: Num + Clone + PartialOrd + FromPrimitive,
{
    if k == 0 {
        return T::one();
    }
    if *z <= from_u64::<T>(k as u64 - 1) {
        return T::zero();
    }
    let mut acc = T::one();
    let mut term = z.clone();
    for _ in 0..k {
        acc = acc * term.clone();
        term = term - T::one();
    }
    acc
}

/// `binom(z, k) = (z)_k / k!` with the same zero convention.
pub fn binomial<T>(z: &T, k: u32) -> T
where
    T: Num + Clone + PartialOrd + FromPrimitive,
{
    let ff = falling_factorial(z, k);
    if ff.is_zero() {
        return ff;
    }
    let mut fact = T::one();
    for i in 2..=k as u64 {
        fact = fact * from_u64::<T>(i);
    }
    ff / fact
}

pub fn factorial(n: u64) -> BigInt {
    (2..=n).fold(BigInt::one(), |acc, i| acc * i)
}

/// `binom(n, k)` for nonnegative integers as an arbitrary-precision integer.
pub fn binomial_int(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// `binom(n, k)` in `u128`, or `None` on overflow.
pub fn binomial_u128(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k as u128 {
        // acc * (n - i) is divisible by (i + 1); divide through the gcd first
        let num = n as u128 - i;
        let den = i + 1;
        let g = acc.gcd(&den);
        let acc_r = acc / g;
        let den_r = den / g;
        acc = acc_r.checked_mul(num / den_r)?;
    }
    Some(acc)
}

/// `total! / prod parts_i!`.
pub fn multinomial(total: u64, parts: &[u64]) -> Result<BigInt> {
    let sum: u64 = parts.iter().sum();
    if sum != total {
        return Err(Error::InvalidArgument(format!("multinomial parts sum to {sum}, expected {total}")));
    }
    if parts.contains(&0) {
        return Err(Error::InvalidArgument("multinomial parts must be positive".into()));
    }
    // product of binomials avoids the large intermediate factorial
    let mut acc = BigInt::one();
    let mut seen = 0;
    for &p in parts {
        seen += p;
        acc *= binomial_int(seen, p);
    }
    Ok(acc)
}

/// Size of the symmetry group of a multiset: the product of the factorials of
/// the multiplicities of its distinct values.
pub fn sym_multiplicity(sizes: &[u64]) -> BigInt {
    let mut sorted = sizes.to_vec();
    sorted.sort_unstable();
    let mut acc = BigInt::one();
    let mut run = 0u64;
    for i in 0..sorted.len() {
        run += 1;
        if i + 1 == sorted.len() || sorted[i + 1] != sorted[i] {
            acc *= factorial(run);
            run = 0;
        }
    }
    acc
}

pub fn to_u64(v: &BigInt) -> Option<u64> {
    v.to_u64()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    /// Pascal-triangle oracle, additions only.
    fn pascal(n: usize, k: usize) -> BigInt {
        let mut row = vec![BigInt::zero(); k + 1];
        row[0] = BigInt::one();
        for _ in 0..n {
            for j in (1..=k).rev() {
                let prev = row[j - 1].clone();
                row[j] += prev;
            }
        }
        row[k].clone()
    }

    #[test]
    fn falling_factorial_examples() {
        assert_eq!(falling_factorial(&BigInt::from(5), 3), BigInt::from(60));
        assert_eq!(falling_factorial(&BigInt::from(2), 4), BigInt::zero());
        assert_eq!(falling_factorial(&q(7, 2), 2), q(35, 4));
        // rational below k - 1 is zero, not a signed product
        assert_eq!(falling_factorial(&q(1, 2), 2), q(0, 1));
        assert_eq!(falling_factorial(&3.5f64, 2), 8.75);
    }

    #[test]
    fn binomial_examples() {
        assert_eq!(binomial(&BigInt::from(12), 2), BigInt::from(66));
        assert_eq!(binomial(&BigInt::from(1), 2), BigInt::zero());
        assert_eq!(binomial(&BigInt::from(26), 12), BigInt::from(9657700));
        assert_eq!(pascal(26, 12), BigInt::from(9657700));
        assert_eq!(binomial(&BigInt::from(7), 0), BigInt::one());
        assert_eq!(binomial_int(26, 12), BigInt::from(9657700));
        assert_eq!(binomial_u128(26, 12), Some(9657700));
    }

    #[test]
    fn multinomial_examples() {
        assert_eq!(multinomial(3, &[2, 1]).unwrap(), BigInt::from(3));
        assert_eq!(multinomial(4, &[2, 1, 1]).unwrap(), BigInt::from(12));
        assert_eq!(multinomial(4, &[2, 2]).unwrap(), BigInt::from(6));
        assert!(multinomial(5, &[2, 2]).is_err());
    }

    #[test]
    fn sym_multiplicity_examples() {
        assert_eq!(sym_multiplicity(&[2, 1]), BigInt::from(1));
        assert_eq!(sym_multiplicity(&[2, 2]), BigInt::from(2));
        assert_eq!(sym_multiplicity(&[2, 1, 1, 1]), BigInt::from(6));
    }

    #[test]
    fn huge_binomials_do_not_overflow() {
        let v = binomial_int(700, 350);
        assert!(v.to_string().len() > 200);
        assert_eq!(binomial_u128(1000, 500), None);
    }

    proptest! {
        #[test]
        fn binomial_symmetry(n in 0u64..120, k in 0u64..120) {
            prop_assume!(k <= n);
            prop_assert_eq!(binomial_int(n, k), binomial_int(n, n - k));
            prop_assert_eq!(binomial(&BigInt::from(n), k as u32), binomial_int(n, k));
            prop_assert_eq!(pascal(n as usize, k as usize), binomial_int(n, k));
        }

        #[test]
        fn falling_factorial_zero_iff_below(num in -40i64..80, den in 1i64..7, k in 1u32..8) {
            let z = q(num, den);
            let ff = falling_factorial(&z, k);
            let below = z <= q(k as i64 - 1, 1);
            prop_assert_eq!(ff.is_zero(), below);
        }

        #[test]
        fn multinomial_and_sym_are_order_independent(
            parts in proptest::collection::vec(1u64..6, 1..6),
            seed in any::<u64>(),
        ) {
            let total: u64 = parts.iter().sum();
            let mut shuffled = parts.clone();
            let len = shuffled.len();
            shuffled.rotate_left((seed as usize) % len);
            shuffled.reverse();
            prop_assert_eq!(multinomial(total, &parts).unwrap(), multinomial(total, &shuffled).unwrap());
            prop_assert_eq!(sym_multiplicity(&parts), sym_multiplicity(&shuffled));
            let direct = factorial(total) / parts.iter().map(|&p| factorial(p)).product::<BigInt>();
            prop_assert_eq!(multinomial(total, &parts).unwrap(), direct);
        }
    }
}
