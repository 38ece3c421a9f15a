use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::Error;

/// An exact rational number, read as an element of Q_p.
///
/// Values that fit in `i128` are kept inline; arithmetic that overflows is
/// redone with big integers and demoted again when the result is small.
#[derive(Clone)]
pub struct PadicRational(Repr);

#[derive(Clone)]
enum Repr {
    // den > 0, gcd(num, den) = 1
    Small(i128, i128),
    Big(BigRational),
}

impl PadicRational {
    pub fn zero() -> Self {
        PadicRational(Repr::Small(0, 1))
    }

    pub fn one() -> Self {
        PadicRational(Repr::Small(1, 1))
    }

    pub fn from_int(n: i128) -> Self {
        PadicRational(Repr::Small(n, 1))
    }

    /// `num/den` in lowest terms.
    pub fn new(num: i128, den: i128) -> Result<Self, Error> {
        if den == 0 {
            return Err(Error::Domain("zero denominator".into()));
        }
        Ok(Self::small_reduced(num, den).unwrap_or_else(|| {
            Self::from_big(BigRational::new(BigInt::from(num), BigInt::from(den)))
        }))
    }

    pub fn from_big(r: BigRational) -> Self {
        match (r.numer().to_i128(), r.denom().to_i128()) {
            (Some(n), Some(d)) => PadicRational(Repr::Small(n, d)),
            _ => PadicRational(Repr::Big(r)),
        }
    }

    /// `p^k` for any integer `k`.
    pub fn p_pow(p: u64, k: i64) -> Self {
        let base = BigInt::from(p);
        let mag = num_traits::pow(base, k.unsigned_abs() as usize);
        if k >= 0 {
            Self::from_big(BigRational::from_integer(mag))
        } else {
            Self::from_big(BigRational::new(BigInt::one(), mag))
        }
    }

    fn small_reduced(num: i128, den: i128) -> Option<Self> {
        if den == 0 {
            return None;
        }
        let g = num.gcd(&den);
        let (mut n, mut d) = (num / g, den / g);
        if d < 0 {
            n = n.checked_neg()?;
            d = d.checked_neg()?;
        }
        Some(PadicRational(Repr::Small(n, d)))
    }

    pub fn to_big(&self) -> BigRational {
        match &self.0 {
            Repr::Small(n, d) => BigRational::new_raw(BigInt::from(*n), BigInt::from(*d)),
            Repr::Big(r) => r.clone(),
        }
    }

    pub fn numer(&self) -> BigInt {
        match &self.0 {
            Repr::Small(n, _) => BigInt::from(*n),
            Repr::Big(r) => r.numer().clone(),
        }
    }

    pub fn denom(&self) -> BigInt {
        match &self.0 {
            Repr::Small(_, d) => BigInt::from(*d),
            Repr::Big(r) => r.denom().clone(),
        }
    }

    /// The value as `(num, den)` when both fit in `i128`.
    pub fn as_small(&self) -> Option<(i128, i128)> {
        match &self.0 {
            Repr::Small(n, d) => Some((*n, *d)),
            Repr::Big(_) => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.0, Repr::Small(0, _))
    }

    pub fn is_one(&self) -> bool {
        matches!(self.0, Repr::Small(1, 1))
    }

    pub fn is_integer(&self) -> bool {
        match &self.0 {
            Repr::Small(_, d) => *d == 1,
            Repr::Big(r) => r.is_integer(),
        }
    }

    pub fn to_i128(&self) -> Option<i128> {
        match &self.0 {
            Repr::Small(n, 1) => Some(*n),
            _ => None,
        }
    }

    pub fn is_negative(&self) -> bool {
        match &self.0 {
            Repr::Small(n, _) => *n < 0,
            Repr::Big(r) => r.is_negative(),
        }
    }

    pub fn abs(&self) -> Self {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    pub fn recip(&self) -> Result<Self, Error> {
        if self.is_zero() {
            return Err(Error::Domain("division by zero".into()));
        }
        Ok(match &self.0 {
            Repr::Small(n, d) => Self::small_reduced(*d, *n)
                .unwrap_or_else(|| Self::from_big(self.to_big().recip())),
            Repr::Big(r) => Self::from_big(r.recip()),
        })
    }

    pub fn checked_div(&self, rhs: &Self) -> Result<Self, Error> {
        Ok(self * &rhs.recip()?)
    }

    fn add_impl(&self, rhs: &Self) -> Self {
        if let (Repr::Small(a, b), Repr::Small(c, d)) = (&self.0, &rhs.0) {
            if let Some(r) = small_add(*a, *b, *c, *d) {
                return r;
            }
        }
        Self::from_big(self.to_big() + rhs.to_big())
    }

    fn mul_impl(&self, rhs: &Self) -> Self {
        if let (Repr::Small(a, b), Repr::Small(c, d)) = (&self.0, &rhs.0) {
            if let Some(r) = small_mul(*a, *b, *c, *d) {
                return r;
            }
        }
        Self::from_big(self.to_big() * rhs.to_big())
    }

    fn neg_impl(&self) -> Self {
        match &self.0 {
            Repr::Small(n, d) => match n.checked_neg() {
                Some(m) => PadicRational(Repr::Small(m, *d)),
                None => Self::from_big(-self.to_big()),
            },
            Repr::Big(r) => Self::from_big(-r.clone()),
        }
    }
}

fn small_add(a: i128, b: i128, c: i128, d: i128) -> Option<PadicRational> {
    if b == 1 && d == 1 {
        return Some(PadicRational(Repr::Small(a.checked_add(c)?, 1)));
    }
    let g = b.gcd(&d);
    let (b1, d1) = (b / g, d / g);
    let num = a.checked_mul(d1)?.checked_add(c.checked_mul(b1)?)?;
    let den = b1.checked_mul(d)?;
    PadicRational::small_reduced(num, den)
}

fn small_mul(a: i128, b: i128, c: i128, d: i128) -> Option<PadicRational> {
    if a == 0 || c == 0 {
        return Some(PadicRational::zero());
    }
    let g1 = a.gcd(&d);
    let g2 = c.gcd(&b);
    let num = (a / g1).checked_mul(c / g2)?;
    let den = (b / g2).checked_mul(d / g1)?;
    Some(PadicRational(Repr::Small(num, den)))
}

impl Default for PadicRational {
    fn default() -> Self {
        PadicRational::zero()
    }
}

impl PartialEq for PadicRational {
    fn eq(&self, other: &Self) -> bool {
        match (&self.0, &other.0) {
            (Repr::Small(a, b), Repr::Small(c, d)) => a == c && b == d,
            (Repr::Big(x), Repr::Big(y)) => x == y,
            _ => false,
        }
    }
}

impl Eq for PadicRational {}

impl Hash for PadicRational {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match &self.0 {
            Repr::Small(n, d) => {
                0u8.hash(state);
                n.hash(state);
                d.hash(state);
            }
            Repr::Big(r) => {
                1u8.hash(state);
                r.hash(state);
            }
        }
    }
}

impl PartialOrd for PadicRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PadicRational {
    fn cmp(&self, other: &Self) -> Ordering {
        if let (Repr::Small(a, b), Repr::Small(c, d)) = (&self.0, &other.0) {
            if let (Some(l), Some(r)) = (a.checked_mul(*d), c.checked_mul(*b)) {
                return l.cmp(&r);
            }
        }
        self.to_big().cmp(&other.to_big())
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $imp:expr) => {
        impl $tr<&PadicRational> for &PadicRational {
            type Output = PadicRational;
            fn $method(self, rhs: &PadicRational) -> PadicRational {
                $imp(self, rhs)
            }
        }
        impl $tr<PadicRational> for PadicRational {
            type Output = PadicRational;
            fn $method(self, rhs: PadicRational) -> PadicRational {
                $imp(&self, &rhs)
            }
        }
        impl $tr<&PadicRational> for PadicRational {
            type Output = PadicRational;
            fn $method(self, rhs: &PadicRational) -> PadicRational {
                $imp(&self, rhs)
            }
        }
        impl $tr<PadicRational> for &PadicRational {
            type Output = PadicRational;
            fn $method(self, rhs: PadicRational) -> PadicRational {
                $imp(self, &rhs)
            }
        }
    };
}

binop!(Add, add, |a: &PadicRational, b: &PadicRational| a.add_impl(b));
binop!(Sub, sub, |a: &PadicRational, b: &PadicRational| a.add_impl(&b.neg_impl()));
binop!(Mul, mul, |a: &PadicRational, b: &PadicRational| a.mul_impl(b));
// Panics on a zero divisor, like the std integer types.
binop!(Div, div, |a: &PadicRational, b: &PadicRational| a
    .checked_div(b)
    .expect("division by zero"));

impl Neg for &PadicRational {
    type Output = PadicRational;
    fn neg(self) -> PadicRational {
        self.neg_impl()
    }
}

impl Neg for PadicRational {
    type Output = PadicRational;
    fn neg(self) -> PadicRational {
        self.neg_impl()
    }
}

impl From<i64> for PadicRational {
    fn from(n: i64) -> Self {
        Self::from_int(n as i128)
    }
}

impl From<i128> for PadicRational {
    fn from(n: i128) -> Self {
        Self::from_int(n)
    }
}

impl fmt::Display for PadicRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Small(n, 1) => write!(f, "{n}"),
            Repr::Small(n, d) => write!(f, "{n}/{d}"),
            Repr::Big(r) if r.is_integer() => write!(f, "{}", r.numer()),
            Repr::Big(r) => write!(f, "{}/{}", r.numer(), r.denom()),
        }
    }
}

impl fmt::Debug for PadicRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for PadicRational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let bad = || Error::Parse {
            pos: 0,
            msg: format!("invalid rational literal {s:?}"),
        };
        let s = s.trim();
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s, "1"),
        };
        let n: BigInt = n.parse().map_err(|_| bad())?;
        let d: BigInt = d.parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::Domain("zero denominator".into()));
        }
        Ok(Self::from_big(BigRational::new(n, d)))
    }
}
