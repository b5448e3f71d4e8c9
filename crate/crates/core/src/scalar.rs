//! Scalar abstraction shared by the numeric modules.
//!
//! Everything that evaluates polynomials over the partite limit space is
//! written against [`Scalar`], so the same code runs in `f64`, in exact
//! rationals ([`Rational`]) and in the configurable-precision [`BigFloat`].

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Rem, Sub};
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};

use dashu_float::round::mode::HalfEven;
use dashu_float::FBig;
use dashu_int::{IBig, UBig};
use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

/// A number type usable by the generic polynomial and optimization code.
pub trait Scalar:
    Num + Signed + FromPrimitive + Clone + PartialOrd + fmt::Debug + fmt::Display + Send + Sync + 'static
{
    /// True when arithmetic is exact (no rounding).
    const EXACT: bool;

    /// Tolerated rounding drift of a total mass of one.
    const MASS_SLACK: f64;

    fn from_rational(q: &Rational) -> Self;

    fn from_f64_lossy(v: f64) -> Self;

    fn to_f64(&self) -> f64;

    fn from_int(v: i64) -> Self {
        Self::from_rational(&Rational::from_integer(BigInt::from(v)))
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_rational(&Rational::new(BigInt::from(num), BigInt::from(den)))
    }

    /// `self^e` by repeated squaring.
    fn powu(&self, e: u32) -> Self {
        num_traits::pow(self.clone(), e as usize)
    }

    /// Short name for reports.
    fn kind() -> &'static str;
}

impl Scalar for f64 {
    const EXACT: bool = false;
    const MASS_SLACK: f64 = 1e-12;

    fn from_rational(q: &Rational) -> Self {
        rational_to_f64(q)
    }

    fn from_f64_lossy(v: f64) -> Self {
        v
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn powu(&self, e: u32) -> Self {
        self.powi(e as i32)
    }

    fn kind() -> &'static str {
        "f64"
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;
    const MASS_SLACK: f64 = 0.0;

    fn from_rational(q: &Rational) -> Self {
        q.clone()
    }

    fn from_f64_lossy(v: f64) -> Self {
        Rational::from_float(v).expect("finite float")
    }

    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }

    fn kind() -> &'static str {
        "rational"
    }
}

/// Converts an exact rational to the nearest `f64` without overflowing on
/// large numerators/denominators.
pub fn rational_to_f64(q: &Rational) -> f64 {
    if let (Some(n), Some(d)) = (q.numer().to_f64(), q.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    BigFloat::from_rational(q).to_f64()
}

static PRECISION_DIGITS: AtomicUsize = AtomicUsize::new(BigFloat::DEFAULT_DIGITS);

type Inner = FBig<HalfEven, 2>;

/// Binary floating point number with a run-wide precision given in decimal
/// digits (default 64).
#[derive(Clone, PartialEq, PartialOrd)]
pub struct BigFloat(Inner);

impl BigFloat {
    pub const DEFAULT_DIGITS: usize = 64;

    /// Sets the run-wide precision. Values created afterwards use it.
    pub fn set_precision_digits(digits: usize) {
        PRECISION_DIGITS.store(digits.max(16), Ordering::SeqCst);
    }

    pub fn precision_digits() -> usize {
        PRECISION_DIGITS.load(Ordering::SeqCst)
    }

    fn bits() -> usize {
        // log2(10) ~ 3.3219; keep two guard bits.
        (Self::precision_digits() as f64 * std::f64::consts::LOG2_10).ceil() as usize + 2
    }

    fn wrap(x: Inner) -> Self {
        BigFloat(x.with_precision(Self::bits()).value())
    }

    fn from_bigint(v: &BigInt) -> Inner {
        let (sign, bytes) = v.to_bytes_le();
        let mag = IBig::from(UBig::from_le_bytes(&bytes));
        let i = if sign == Sign::Minus { -mag } else { mag };
        Inner::from(i)
    }

    /// Parses a decimal literal; panics on malformed input, so only use it
    /// with literals.
    pub fn from_decimal(s: &str) -> Self {
        Self::parse_decimal(s).unwrap_or_else(|e| panic!("{e}"))
    }

    /// Parses user-supplied decimal text.
    pub fn parse_decimal(s: &str) -> crate::error::Result<Self> {
        <Self as Num>::from_str_radix(s.trim(), 10)
            .map_err(|e| crate::error::Error::Parse(format!("bad decimal number {s:?}: {e}")))
    }

    pub fn exp(&self) -> Self {
        Self::wrap(self.0.exp())
    }

    pub fn ln(&self) -> Self {
        Self::wrap(self.0.ln())
    }

    /// Decimal rendering with `digits` significant digits.
    pub fn to_decimal_string(&self, digits: usize) -> String {
        let d = self.0.to_decimal().value();
        d.with_precision(digits).value().to_string()
    }
}

impl fmt::Debug for BigFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BigFloat({})", self.to_decimal_string(Self::precision_digits()))
    }
}

impl fmt::Display for BigFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal_string(Self::precision_digits()))
    }
}

macro_rules! bigfloat_binop {
    ($tr:ident, $m:ident) => {
        impl $tr for BigFloat {
            type Output = BigFloat;
            fn $m(self, rhs: BigFloat) -> BigFloat {
                BigFloat::wrap($tr::$m(self.0, rhs.0))
            }
        }
        impl<'a> $tr<&'a BigFloat> for BigFloat {
            type Output = BigFloat;
            fn $m(self, rhs: &'a BigFloat) -> BigFloat {
                BigFloat::wrap($tr::$m(self.0, &rhs.0))
            }
        }
    };
}

bigfloat_binop!(Add, add);
bigfloat_binop!(Sub, sub);
bigfloat_binop!(Mul, mul);
bigfloat_binop!(Div, div);
bigfloat_binop!(Rem, rem);

impl Neg for BigFloat {
    type Output = BigFloat;
    fn neg(self) -> BigFloat {
        BigFloat(-self.0)
    }
}

impl Zero for BigFloat {
    fn zero() -> Self {
        Self::wrap(Inner::ZERO)
    }
    fn is_zero(&self) -> bool {
        self.0 == Inner::ZERO
    }
}

impl One for BigFloat {
    fn one() -> Self {
        Self::wrap(Inner::ONE)
    }
}

impl Num for BigFloat {
    type FromStrRadixErr = String;

    fn from_str_radix(s: &str, radix: u32) -> Result<Self, String> {
        if radix != 10 {
            return Err(format!("unsupported radix {radix}"));
        }
        let d = dashu_float::DBig::from_str(s).map_err(|e| e.to_string())?;
        Ok(Self::wrap(
            d.with_precision(Self::precision_digits() + 2).value().with_base::<2>().value().with_rounding::<HalfEven>(),
        ))
    }
}

impl Signed for BigFloat {
    fn abs(&self) -> Self {
        if self.is_negative() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    fn abs_sub(&self, other: &Self) -> Self {
        if self <= other {
            Self::zero()
        } else {
            self.clone() - other
        }
    }

    fn signum(&self) -> Self {
        if self.is_zero() {
            Self::zero()
        } else if self.is_negative() {
            -Self::one()
        } else {
            Self::one()
        }
    }

    fn is_positive(&self) -> bool {
        self.0.sign() == dashu_int::Sign::Positive && !self.is_zero()
    }

    fn is_negative(&self) -> bool {
        self.0.sign() == dashu_int::Sign::Negative
    }
}

impl FromPrimitive for BigFloat {
    fn from_i64(n: i64) -> Option<Self> {
        Some(Self::wrap(Inner::from(IBig::from(n))))
    }

    fn from_u64(n: u64) -> Option<Self> {
        Some(Self::wrap(Inner::from(IBig::from(n))))
    }

    fn from_f64(n: f64) -> Option<Self> {
        Inner::try_from(n).ok().map(Self::wrap)
    }
}

impl Scalar for BigFloat {
    const EXACT: bool = false;
    const MASS_SLACK: f64 = 1e-30;

    fn from_rational(q: &Rational) -> Self {
        let n = Self::wrap(Self::from_bigint(q.numer()));
        let d = Self::wrap(Self::from_bigint(q.denom()));
        n / d
    }

    fn from_f64_lossy(v: f64) -> Self {
        Self::wrap(Inner::try_from(v).expect("finite float"))
    }

    fn to_f64(&self) -> f64 {
        self.0.to_f64().value()
    }

    fn kind() -> &'static str {
        "bigfloat"
    }
}
