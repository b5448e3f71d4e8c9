//! The pattern `F = K_{a_1,...,a_r}` and its scalar attributes.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::counting::MultipartitePartition;
use crate::error::{Error, Result};
use crate::exactmath::{binomial_int, factorial, sym_multiplicity};
use crate::scalar::Rational;

/// A complete multipartite pattern, part sizes kept in descending order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PatternSpec {
    sizes: Vec<u64>,
}

/// A run of equal part sizes: `mult` parts of size `size`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SizeClass {
    pub size: u64,
    pub mult: usize,
}

/// Outcome of [`PatternSpec::almost_balanced_shape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ShapeClass {
    /// `r+1 <= ell <= 2r-1`: parts are `2,...,2,1,...,1`.
    TwoOneShape,
    /// `ell >= 2r`: every part has size at least two.
    AllAtLeastTwo,
}

impl PatternSpec {
    /// Builds a pattern from part sizes given in any order.
    pub fn new(mut sizes: Vec<u64>) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::InvalidPattern("a pattern needs at least one part".into()));
        }
        if sizes.contains(&0) {
            return Err(Error::InvalidPattern("part sizes must be positive".into()));
        }
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        Ok(PatternSpec { sizes })
    }

    /// The balanced pattern `K_r(t)`.
    pub fn balanced(r: usize, t: u64) -> Result<Self> {
        Self::new(vec![t; r])
    }

    pub fn sizes(&self) -> &[u64] {
        &self.sizes
    }

    pub fn r(&self) -> usize {
        self.sizes.len()
    }

    pub fn ell(&self) -> u64 {
        self.sizes.iter().sum()
    }

    /// Number of singleton parts.
    pub fn sc(&self) -> usize {
        self.sizes.iter().filter(|&&a| a == 1).count()
    }

    pub fn largest(&self) -> u64 {
        self.sizes.first().copied().unwrap_or(0)
    }

    pub fn smallest(&self) -> u64 {
        self.sizes.last().copied().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.sizes.is_empty()
    }

    /// Distinct sizes with multiplicities, largest size first.
    pub fn classes(&self) -> Vec<SizeClass> {
        let mut out: Vec<SizeClass> = Vec::new();
        for &a in &self.sizes {
            match out.last_mut() {
                Some(c) if c.size == a => c.mult += 1,
                _ => out.push(SizeClass { size: a, mult: 1 }),
            }
        }
        out
    }

    pub fn is_complete(&self) -> bool {
        self.sizes.iter().all(|&a| a == 1)
    }

    pub fn has_part(&self, size: u64) -> bool {
        self.sizes.contains(&size)
    }

    /// The pattern with one part of the given size removed.
    pub fn without_part(&self, size: u64) -> Option<Self> {
        let pos = self.sizes.iter().position(|&a| a == size)?;
        let mut sizes = self.sizes.clone();
        sizes.remove(pos);
        Some(PatternSpec { sizes })
    }

    /// Removes the listed part sizes (as a multiset).
    pub fn without_parts(&self, sizes: &[u64]) -> Option<Self> {
        let mut out = self.clone();
        for &s in sizes {
            out = out.without_part(s)?;
        }
        Some(out)
    }

    /// `|Aut|` of the part multiset.
    pub fn sym(&self) -> BigInt {
        sym_multiplicity(&self.sizes)
    }

    /// `binom(a_1 - a_r, 2) < a_r` and not complete.
    pub fn is_almost_balanced(&self) -> bool {
        if self.is_empty() || self.is_complete() {
            return false;
        }
        binomial_int(self.largest() - self.smallest(), 2) < BigInt::from(self.smallest())
    }

    /// `ell! / (prod a_i! * sym)`.
    pub fn kappa(&self) -> Rational {
        let denom: BigInt = self.sizes.iter().map(|&a| factorial(a)).product::<BigInt>() * self.sym();
        Rational::new(factorial(self.ell()), denom)
    }

    /// Classifies an almost balanced pattern with `ell >= r+1` by the shape
    /// its part sizes are forced into.
    pub fn almost_balanced_shape(&self) -> Result<ShapeClass> {
        if !self.is_almost_balanced() {
            return Err(Error::NotAlmostBalanced(self.to_string()));
        }
        let r = self.r() as u64;
        let ell = self.ell();
        if ell < 2 * r {
            let twos = (ell - r) as usize;
            let ok = self.sizes[..twos].iter().all(|&a| a == 2) && self.sizes[twos..].iter().all(|&a| a == 1);
            if !ok {
                return Err(Error::Internal(format!("{self}: expected {twos} parts of size 2, rest 1")));
            }
            Ok(ShapeClass::TwoOneShape)
        } else {
            if self.smallest() < 2 {
                return Err(Error::Internal(format!("{self}: ell >= 2r but a_r = 1")));
            }
            Ok(ShapeClass::AllAtLeastTwo)
        }
    }

    /// Rejects patterns for which the inducibility formulas do not apply.
    pub(crate) fn require_nontrivial(&self) -> Result<()> {
        if self.r() < 2 {
            return Err(Error::InvalidPattern(format!("{self} has a single part (empty graph)")));
        }
        if self.is_complete() {
            return Err(Error::InvalidPattern(format!("{self} is a complete graph")));
        }
        Ok(())
    }

    /// Turan-shaped pattern check: part sizes differ by at most one.
    pub fn is_turan_shape(&self) -> bool {
        self.largest() - self.smallest() <= 1
    }

    /// Renders the pattern in the literal syntax `a1,a2,...`.
    pub fn literal(&self) -> String {
        self.sizes.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(",")
    }
}

impl fmt::Display for PatternSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "K_{{{}}}", self.literal())
    }
}

impl FromStr for PatternSpec {
    type Err = Error;

    /// Parses `"2,1,1"` (order irrelevant, optional `K_{...}` wrapper).
    fn from_str(s: &str) -> Result<Self> {
        let body = s.trim();
        let body = body.strip_prefix("K_{").and_then(|b| b.strip_suffix('}')).unwrap_or(body);
        let sizes = body
            .split(',')
            .map(|t| t.trim().parse::<u64>().map_err(|_| Error::Parse(format!("bad part size {t:?} in pattern {s:?}"))))
            .collect::<Result<Vec<_>>>()?;
        PatternSpec::new(sizes)
    }
}

/// Part sizes of the Turan graph `T_k(n)`: `n mod k` parts of size
/// `ceil(n/k)`, the rest `floor(n/k)`.
pub fn turan_sizes(k: usize, n: u64) -> Result<MultipartitePartition> {
    if k == 0 || n < k as u64 {
        return Err(Error::InvalidArgument(format!("Turan graph T_{k}({n}) needs n >= k >= 1")));
    }
    let q = n / k as u64;
    let rem = (n % k as u64) as usize;
    let mut parts = vec![q + 1; rem];
    parts.extend(std::iter::repeat_n(q, k - rem));
    MultipartitePartition::new(parts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> PatternSpec {
        s.parse().unwrap()
    }

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn parse_sorts_and_derives_attributes() {
        let f = p("1,2,1");
        assert_eq!(f.sizes(), &[2, 1, 1]);
        assert_eq!(f.r(), 3);
        assert_eq!(f.ell(), 4);
        assert_eq!(f.sc(), 2);
        assert_eq!(f.classes(), vec![SizeClass { size: 2, mult: 1 }, SizeClass { size: 1, mult: 2 }]);
        assert_eq!(p("K_{7,12,7}").sizes(), &[12, 7, 7]);
        assert!("2,x".parse::<PatternSpec>().is_err());
        assert!("2,0".parse::<PatternSpec>().is_err());
    }

    #[test]
    fn almost_balanced_examples() {
        assert!(p("2,1").is_almost_balanced());
        assert!(!p("8,8,4").is_almost_balanced());
        assert!(!p("1,1,1").is_almost_balanced());
        assert!(!p("3,1").is_almost_balanced());
        assert!(p("12,7,7").largest() == 12 && !p("12,7,7").is_almost_balanced());
    }

    #[test]
    fn kappa_examples() {
        assert_eq!(p("2,1").kappa(), q(3, 1));
        assert_eq!(p("2,2").kappa(), q(3, 1));
        assert_eq!(p("2,1,1,1").kappa(), q(10, 1));
        assert_eq!(p("2,1,1").kappa(), q(6, 1));
    }

    #[test]
    fn turan_sizes_examples() {
        assert_eq!(turan_sizes(2, 5).unwrap().parts(), &[3, 2]);
        assert_eq!(turan_sizes(5, 60).unwrap().parts(), &[12; 5]);
        assert_eq!(turan_sizes(3, 7).unwrap().parts(), &[3, 2, 2]);
        assert!(turan_sizes(4, 3).is_err());
    }

    #[test]
    fn shape_check_examples() {
        assert_eq!(p("2,1,1").almost_balanced_shape().unwrap(), ShapeClass::TwoOneShape);
        assert_eq!(p("2,2").almost_balanced_shape().unwrap(), ShapeClass::AllAtLeastTwo);
        assert!(matches!(p("3,1").almost_balanced_shape(), Err(Error::NotAlmostBalanced(_))));
    }

    #[test]
    fn every_turan_pattern_is_almost_balanced() {
        for r in 2..30usize {
            for ell in (r as u64 + 1)..=30 {
                let t = turan_sizes(r, ell).unwrap();
                let f = PatternSpec::new(t.parts().to_vec()).unwrap();
                assert!(f.is_almost_balanced(), "{f}");
                assert!(f.almost_balanced_shape().is_ok(), "{f}");
            }
        }
    }

    #[test]
    fn shape_check_holds_for_all_small_almost_balanced_patterns() {
        // every multiset with r <= 6 and parts <= 6
        fn rec(prefix: &mut Vec<u64>, max: u64, depth: usize, out: &mut Vec<Vec<u64>>) {
            if !prefix.is_empty() {
                out.push(prefix.clone());
            }
            if depth == 0 {
                return;
            }
            for a in 1..=max {
                prefix.push(a);
                rec(prefix, a, depth - 1, out);
                prefix.pop();
            }
        }
        let mut all = Vec::new();
        rec(&mut Vec::new(), 6, 6, &mut all);
        for sizes in all {
            let f = PatternSpec::new(sizes).unwrap();
            if f.is_almost_balanced() {
                f.almost_balanced_shape().unwrap();
            }
        }
    }
}
