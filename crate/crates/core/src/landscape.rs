//! The discrete objective `f(k) = (k-1)_{r-1} / k^{ell-1}`, its unique
//! maximizer `m_{r,ell}`, analytic bounds on it, and the closed-form
//! inducibility values built on top.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactmath::falling_factorial;
use crate::profile::PatternSpec;
use crate::roots::bisect;
use crate::scalar::{rational_to_f64, BigFloat, Rational, Scalar};

fn rat(n: u64, d: u64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

fn check_pair(r: u64, ell: u64) -> Result<()> {
    if r < 2 || ell <= r {
        return Err(Error::InvalidArgument(format!("need ell > r >= 2, got r = {r}, ell = {ell}")));
    }
    Ok(())
}

/// `f(k) = (k-1)_{r-1} / k^{ell-1}` as an exact rational.
pub fn f_value(r: u64, ell: u64, k: u64) -> Result<Rational> {
    if r == 0 || ell == 0 {
        return Err(Error::InvalidArgument("r and ell must be positive".into()));
    }
    if k < r {
        return Err(Error::InvalidArgument(format!("f(k) needs k >= r, got k = {k} < r = {r}")));
    }
    let num = falling_factorial(&BigInt::from(k - 1), (r - 1) as u32);
    let den = num_traits::pow(BigInt::from(k), (ell - 1) as usize);
    Ok(Rational::new(num, den))
}

/// Scans `f(r), f(r+1), ...` up to the first strict decrease. Any tie is an
/// internal error since the maximizer is unique.
fn scan_maximizer(r: u64, ell: u64) -> Result<u64> {
    let mut k = r;
    let mut cur = f_value(r, ell, k)?;
    loop {
        let next = f_value(r, ell, k + 1)?;
        if next == cur {
            return Err(Error::Internal(format!("f({k}) = f({}) for r = {r}, ell = {ell}", k + 1)));
        }
        if next < cur {
            return Ok(k);
        }
        k += 1;
        cur = next;
    }
}

/// The unique maximizer `m_{r,ell}` of `f` over `k >= r`, cross-checked
/// against [`m_bounds`]. Results are memoized per `(r, ell)`.
pub fn m_star(r: u64, ell: u64) -> Result<u64> {
    static CACHE: OnceLock<Mutex<HashMap<(u64, u64), u64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(&m) = cache.lock().expect("m cache poisoned").get(&(r, ell)) {
        return Ok(m);
    }
    let m = m_star_uncached(r, ell)?;
    cache.lock().expect("m cache poisoned").insert((r, ell), m);
    Ok(m)
}

fn m_star_uncached(r: u64, ell: u64) -> Result<u64> {
    check_pair(r, ell)?;
    let m = scan_maximizer(r, ell)?;
    let b = m_bounds(r, ell)?;
    if !b.strictly_contains(m) {
        return Err(Error::Internal(format!(
            "m = {m} for r = {r}, ell = {ell} outside ({}, {})",
            b.lower,
            b.upper.to_decimal_string(12)
        )));
    }
    Ok(m)
}

/// Analytic window for `m_{r,ell}`.
#[derive(Debug, Clone)]
pub struct MBounds {
    /// `max{ell(r-1)/(2(ell-r)), r-1}`.
    pub lower: Rational,
    /// `ell(ell-1)/(2(ell-r))`.
    pub upper_rational: Rational,
    /// Root of `e^{(ell/r)x}(1-x) = 1` in `(0,1)`.
    pub alpha: BigFloat,
    /// `min{upper_rational, r/alpha}`.
    pub upper: BigFloat,
}

impl MBounds {
    pub fn strictly_contains(&self, m: u64) -> bool {
        let mq = Rational::from_integer(BigInt::from(m));
        self.lower < mq && BigFloat::from_rational(&mq) < self.upper
    }
}

/// Root of `e^{t x}(1 - x) = 1` for `t = ell / r` in `(1 - r^2/ell^2, 1)`,
/// returned as the midpoint of a verified sign-change bracket narrower than
/// `tol`.
///
/// A double-precision bisection seeds Newton steps at full precision; the
/// bracket around the Newton iterate is then checked. Plain bisection over the
/// whole interval is the fallback.
pub fn alpha_root(r: u64, ell: u64, tol: &BigFloat) -> Result<BigFloat> {
    check_pair(r, ell)?;
    let t = BigFloat::from_ratio(ell as i64, r as i64);
    let one = BigFloat::one();
    let two = BigFloat::from_int(2);
    let h = |x: &BigFloat| (t.clone() * x.clone()).exp() * (one.clone() - x.clone()) - one.clone();
    let lo_q = Rational::one() - rat(r * r, ell * ell);

    let tf = ell as f64 / r as f64;
    let hf = |x: &f64| (tf * x).exp() * (1.0 - x) - 1.0;
    if let Ok((a, b)) = bisect(hf, rational_to_f64(&lo_q), 1.0, &1e-15, 200) {
        let mut x = BigFloat::from_f64_lossy((a + b) / 2.0);
        let quarter = tol.clone() / BigFloat::from_int(4);
        for _ in 0..30 {
            let e = (t.clone() * x.clone()).exp();
            let val = e.clone() * (one.clone() - x.clone()) - one.clone();
            let slope = e * (t.clone() * (one.clone() - x.clone()) - one.clone());
            if slope.is_zero() {
                break;
            }
            let step = val / slope;
            x = x - step.clone();
            if step.abs() < quarter {
                break;
            }
        }
        if let Ok((a, b)) = bisect(h, x.clone() - quarter.clone(), x + quarter, tol, 8) {
            return Ok((a + b) / two);
        }
    }
    let (a, b) = bisect(h, BigFloat::from_rational(&lo_q), one.clone(), tol, 1000)?;
    Ok((a + b) / two)
}

pub fn m_bounds(r: u64, ell: u64) -> Result<MBounds> {
    check_pair(r, ell)?;
    let lower_a = rat(ell * (r - 1), 2 * (ell - r));
    let lower_b = Rational::from_integer(BigInt::from(r - 1));
    let lower = if lower_a > lower_b { lower_a } else { lower_b };
    let upper_rational = rat(ell * (ell - 1), 2 * (ell - r));
    let alpha = alpha_root(r, ell, &BigFloat::from_decimal("1e-30"))?;
    let r_over_alpha = BigFloat::from_int(r as i64) / alpha.clone();
    let ur = BigFloat::from_rational(&upper_rational);
    let upper = if ur < r_over_alpha { ur } else { r_over_alpha };
    Ok(MBounds { lower, upper_rational, alpha, upper })
}

/// Cached view of `f` around its maximizer.
#[derive(Debug, Clone)]
pub struct ProfileLandscape {
    pub r: u64,
    pub ell: u64,
    pub m: u64,
    pub f_cache: BTreeMap<u64, Rational>,
    pub bounds: MBounds,
}

/// Serializable summary of a [`ProfileLandscape`].
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct LandscapeSummary {
    pub r: u64,
    pub ell: u64,
    pub m: u64,
    pub f_m: String,
    pub lower: String,
    pub upper: String,
    pub alpha: String,
}

impl ProfileLandscape {
    /// Computes `m` and caches `f(k)` for `r <= k <= ceil(upper) + 2`.
    pub fn new(r: u64, ell: u64) -> Result<Self> {
        let m = m_star(r, ell)?;
        let bounds = m_bounds(r, ell)?;
        let top = bounds.upper.to_f64().ceil() as u64 + 2;
        let mut f_cache = BTreeMap::new();
        for k in r..=top.max(m + 1) {
            f_cache.insert(k, f_value(r, ell, k)?);
        }
        Ok(ProfileLandscape { r, ell, m, f_cache, bounds })
    }

    pub fn f(&self, k: u64) -> Result<Rational> {
        match self.f_cache.get(&k) {
            Some(v) => Ok(v.clone()),
            None => f_value(self.r, self.ell, k),
        }
    }

    pub fn f_max(&self) -> Rational {
        self.f_cache[&self.m].clone()
    }

    /// True iff the cached values strictly rise up to `m` and strictly fall after.
    pub fn is_unimodal(&self) -> bool {
        let vals: Vec<(&u64, &Rational)> = self.f_cache.iter().collect();
        vals.windows(2).all(|w| {
            let (k, a) = w[0];
            let (_, b) = w[1];
            if *k < self.m {
                b > a
            } else {
                b < a
            }
        })
    }

    pub fn summary(&self) -> LandscapeSummary {
        LandscapeSummary {
            r: self.r,
            ell: self.ell,
            m: self.m,
            f_m: self.f_max().to_string(),
            lower: self.bounds.lower.to_string(),
            upper: self.bounds.upper.to_decimal_string(20),
            alpha: self.bounds.alpha.to_decimal_string(30),
        }
    }
}

fn require_formula_pattern(f: &PatternSpec) -> Result<()> {
    f.require_nontrivial()?;
    if !f.is_almost_balanced() {
        return Err(Error::NotAlmostBalanced(f.to_string()));
    }
    Ok(())
}

/// `m_{r,ell}` for the pattern's part count and order.
pub fn pattern_m(f: &PatternSpec) -> Result<u64> {
    f.require_nontrivial()?;
    m_star(f.r() as u64, f.ell())
}

/// `i(F) = kappa_F f(m)` for almost balanced `F`.
pub fn inducibility(f: &PatternSpec) -> Result<Rational> {
    require_formula_pattern(f)?;
    let (r, ell) = (f.r() as u64, f.ell());
    let m = scan_maximizer(r, ell)?;
    Ok(f.kappa() * f_value(r, ell, m)?)
}

/// `i_{k+1}(F)`: the inducibility among `K_{k+1}`-free hosts, which is
/// `kappa_F f(min(k, m))`.
pub fn inducibility_clique_free(f: &PatternSpec, k: u64) -> Result<Rational> {
    require_formula_pattern(f)?;
    let (r, ell) = (f.r() as u64, f.ell());
    if k < r {
        return Err(Error::InvalidArgument(format!("clique bound k = {k} below r = {r}")));
    }
    let m = scan_maximizer(r, ell)?;
    Ok(f.kappa() * f_value(r, ell, k.min(m))?)
}

/// `m_{r,ell} = r` exactly when `(r+1)^{ell-1} > r^ell`.
pub fn m_equals_r_predicted(r: u64, ell: u64) -> bool {
    num_traits::pow(BigInt::from(r + 1), (ell - 1) as usize) > num_traits::pow(BigInt::from(r), ell as usize)
}
