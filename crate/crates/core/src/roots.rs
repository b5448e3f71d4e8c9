//! Root finding: sign-change bisection over any [`Scalar`], and Sturm-chain
//! isolation for polynomials with rational coefficients.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::scalar::{Rational, Scalar};

/// Bisects `f` on `[lo, hi]` until the bracket is narrower than `tol`.
/// Requires `f(lo)` and `f(hi)` to have strictly opposite signs.
pub fn bisect<T, F>(f: F, lo: T, hi: T, tol: &T, max_iter: usize) -> Result<(T, T)>
where
    T: Scalar,
    F: Fn(&T) -> T,
{
    let (mut lo, mut hi) = (lo, hi);
    let flo = f(&lo);
    let fhi = f(&hi);
    if flo.is_zero() {
        return Ok((lo.clone(), lo));
    }
    if fhi.is_zero() {
        return Ok((hi.clone(), hi));
    }
    if flo.is_positive() == fhi.is_positive() {
        return Err(Error::Precondition(format!("no sign change on [{lo}, {hi}]: f(lo) = {flo}, f(hi) = {fhi}")));
    }
    let lo_positive = flo.is_positive();
    let two = T::from_int(2);
    for _ in 0..max_iter {
        if hi.clone() - lo.clone() < *tol {
            break;
        }
        let mid = (lo.clone() + hi.clone()) / two.clone();
        let fm = f(&mid);
        if fm.is_zero() {
            return Ok((mid.clone(), mid));
        }
        if fm.is_positive() == lo_positive {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo, hi))
}

/// Dense polynomial with rational coefficients, lowest degree first.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<Rational>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    /// From integer coefficients, highest degree first.
    pub fn from_integers_desc(c: &[i64]) -> Self {
        Self::new(c.iter().rev().map(|&v| Rational::from_integer(BigInt::from(v))).collect())
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn eval<T: Scalar>(&self, x: &T) -> T {
        let mut acc = T::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x.clone() + T::from_rational(c);
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs.iter().enumerate().skip(1).map(|(i, c)| c * Rational::from_integer(BigInt::from(i))).collect(),
        )
    }

    fn lead(&self) -> &Rational {
        self.coeffs.last().expect("nonzero polynomial")
    }

    /// Remainder of `self / d`.
    fn rem(&self, d: &Polynomial) -> Polynomial {
        let mut r = self.coeffs.clone();
        let dd = d.coeffs.len() - 1;
        let lead = d.lead().clone();
        while r.len() > dd && !r.is_empty() {
            let shift = r.len() - 1 - dd;
            let q = r.last().unwrap().clone() / lead.clone();
            for (i, c) in d.coeffs.iter().enumerate() {
                r[shift + i] = r[shift + i].clone() - q.clone() * c;
            }
            r.pop();
            while r.last().is_some_and(|c| c.is_zero()) {
                r.pop();
            }
        }
        Polynomial::new(r)
    }

    /// `p, p', -rem(p, p'), ...` until the remainder vanishes.
    pub fn sturm_chain(&self) -> Vec<Polynomial> {
        let mut chain = vec![self.clone(), self.derivative()];
        loop {
            let n = chain.len();
            if chain[n - 1].is_zero() {
                chain.pop();
                break;
            }
            let r = chain[n - 2].rem(&chain[n - 1]);
            if r.is_zero() {
                break;
            }
            chain.push(Polynomial::new(r.coeffs.into_iter().map(|c| -c).collect()));
        }
        chain
    }

    /// Upper bound on the absolute value of every real root (Cauchy).
    pub fn root_bound(&self) -> Rational {
        let lead = self.lead().abs();
        let m = self.coeffs[..self.coeffs.len() - 1]
            .iter()
            .map(|c| c.abs() / lead.clone())
            .fold(Rational::zero(), |a, b| if b > a { b } else { a });
        m + Rational::one()
    }
}

fn sign_changes(chain: &[Polynomial], x: &Rational) -> usize {
    let mut last = 0i8;
    let mut count = 0;
    for p in chain {
        let v = p.eval(x);
        let s = if v.is_positive() {
            1
        } else if v.is_negative() {
            -1
        } else {
            0
        };
        if s != 0 {
            if last != 0 && s != last {
                count += 1;
            }
            last = s;
        }
    }
    count
}

/// Number of distinct real roots in `(lo, hi]`.
pub fn count_roots(chain: &[Polynomial], lo: &Rational, hi: &Rational) -> usize {
    sign_changes(chain, lo) - sign_changes(chain, hi)
}

/// Brackets the largest real root of a squarefree-in-practice polynomial to
/// width below `tol`: Sturm counting narrows to an interval holding only
/// that root, then plain sign bisection finishes.
pub fn largest_real_root(p: &Polynomial, tol: &Rational) -> Result<(Rational, Rational)> {
    if p.degree().unwrap_or(0) == 0 {
        return Err(Error::InvalidArgument("constant polynomial has no roots".into()));
    }
    let chain = p.sturm_chain();
    let bound = p.root_bound();
    let mut hi = bound.clone();
    let mut lo = -bound;
    if count_roots(&chain, &lo, &hi) == 0 {
        return Err(Error::Precondition("polynomial has no real roots".into()));
    }
    let two = Rational::from_integer(BigInt::from(2));
    // narrow until (lo, hi] contains exactly the largest root and p changes sign on it
    loop {
        let n = count_roots(&chain, &lo, &hi);
        let (flo, fhi) = (p.eval(&lo), p.eval(&hi));
        if n == 1 && !flo.is_zero() && !fhi.is_zero() && flo.is_positive() != fhi.is_positive() {
            break;
        }
        let mid = (lo.clone() + hi.clone()) / two.clone();
        if count_roots(&chain, &mid, &hi) >= 1 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi.clone() - lo.clone() < *tol {
            return Ok((lo, hi));
        }
    }
    bisect(|x: &Rational| p.eval(x), lo, hi, tol, 10_000)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn bisect_sqrt_two() {
        let (lo, hi) = bisect(|x: &f64| x * x - 2.0, 1.0, 2.0, &1e-12, 200).unwrap();
        assert!((lo - std::f64::consts::SQRT_2).abs() < 1e-11);
        assert!(hi >= lo);
        assert!(bisect(|x: &f64| x * x + 1.0, 0.0, 1.0, &1e-9, 10).is_err());
    }

    #[test]
    fn sturm_counts_roots_of_cubic() {
        // (x-1)(x-2)(x+3) = x^3 - 7x + 6
        let p = Polynomial::from_integers_desc(&[1, 0, -7, 6]);
        let chain = p.sturm_chain();
        assert_eq!(count_roots(&chain, &q(-10, 1), &q(10, 1)), 3);
        assert_eq!(count_roots(&chain, &q(0, 1), &q(3, 2)), 1);
        let (lo, hi) = largest_real_root(&p, &q(1, 1_000_000)).unwrap();
        assert!(lo <= q(2, 1) && q(2, 1) <= hi);
    }

    #[test]
    fn largest_root_of_quadratic() {
        let p = Polynomial::from_integers_desc(&[1, 0, -2]);
        let (lo, hi) = largest_real_root(&p, &q(1, 10_i64.pow(12))).unwrap();
        let mid = (lo.to_f64() + hi.to_f64()) / 2.0;
        assert!((mid - std::f64::consts::SQRT_2).abs() < 1e-11);
    }
}
