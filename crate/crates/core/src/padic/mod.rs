//! Exact rationals viewed as p-adic numbers: valuation, angular components
//! and the residue maps `rho_{n,m}`.

mod rational;

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

pub use rational::PadicRational;

use crate::error::Error;
use crate::lambda::{LambdaElem, LambdaSort};

/// A prime, checked at construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct Prime(u64);

impl Prime {
    pub fn new(p: u64) -> Result<Self, Error> {
        if p < 2 || (2..).take_while(|d| d * d <= p).any(|d| p % d == 0) {
            return Err(Error::Config(format!("{p} is not prime")));
        }
        Ok(Prime(p))
    }

    pub fn get(self) -> u64 {
        self.0
    }

    /// `p^k` as an integer; panics if it does not fit in `u64`.
    pub fn pow(self, k: u32) -> u64 {
        self.0.checked_pow(k).expect("prime power overflows u64")
    }
}

impl TryFrom<u64> for Prime {
    type Error = Error;
    fn try_from(p: u64) -> Result<Self, Error> {
        Prime::new(p)
    }
}

impl From<Prime> for u64 {
    fn from(p: Prime) -> u64 {
        p.0
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Valuation with `Infinite` above every integer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Valuation {
    Finite(i64),
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }

    pub fn shift(self, k: i64) -> Valuation {
        match self {
            Valuation::Finite(v) => Valuation::Finite(v + k),
            Valuation::Infinite => Valuation::Infinite,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => write!(f, "+inf"),
        }
    }
}

fn vp_i128(mut x: i128, p: i128) -> (u32, i128) {
    let mut v = 0;
    while x % p == 0 {
        x /= p;
        v += 1;
    }
    (v, x)
}

fn vp_big(x: &BigInt, p: u64) -> (u32, BigInt) {
    let p = BigInt::from(p);
    let mut x = x.clone();
    let mut v = 0;
    loop {
        let (q, r) = x.div_rem(&p);
        if !r.is_zero() {
            return (v, x);
        }
        x = q;
        v += 1;
    }
}

pub(crate) fn mod_inverse(a: u64, m: u64) -> u64 {
    let (mut old_r, mut r) = (a as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    debug_assert_eq!(old_r, 1, "not invertible");
    old_s.rem_euclid(m as i128) as u64
}

impl PadicRational {
    /// p-adic valuation.
    pub fn ord(&self, p: Prime) -> Valuation {
        if self.is_zero() {
            return Valuation::Infinite;
        }
        if let Some((n, d)) = self.as_small() {
            let pi = p.get() as i128;
            let (a, _) = vp_i128(n, pi);
            let (b, _) = vp_i128(d, pi);
            return Valuation::Finite(a as i64 - b as i64);
        }
        let (a, _) = vp_big(&self.numer(), p.get());
        let (b, _) = vp_big(&self.denom(), p.get());
        Valuation::Finite(a as i64 - b as i64)
    }

    /// The valuation together with the unit part reduced modulo `modulus`
    /// (a power of `p`). `None` at zero.
    pub fn ord_and_unit(&self, p: Prime, modulus: u64) -> Option<(i64, u64)> {
        if self.is_zero() {
            return None;
        }
        if let Some((n, d)) = self.as_small() {
            let pi = p.get() as i128;
            let (a, nu) = vp_i128(n, pi);
            let (b, du) = vp_i128(d, pi);
            let m = modulus as i128;
            let nr = nu.rem_euclid(m) as u64;
            let dr = du.rem_euclid(m) as u64;
            let u = (nr as u128 * mod_inverse(dr, modulus) as u128 % modulus as u128) as u64;
            return Some((a as i64 - b as i64, u % modulus.max(1)));
        }
        let (a, nu) = vp_big(&self.numer(), p.get());
        let (b, du) = vp_big(&self.denom(), p.get());
        let m = BigInt::from(modulus);
        let nr = nu.mod_floor(&m).to_u64().unwrap();
        let dr = du.mod_floor(&m).to_u64().unwrap();
        let u = (nr as u128 * mod_inverse(dr, modulus) as u128 % modulus as u128) as u64;
        Some((a as i64 - b as i64, u % modulus.max(1)))
    }

    /// Angular component modulo `p^m`.
    pub fn ac(&self, m: u32, p: Prime) -> Result<u64, Error> {
        self.ord_and_unit(p, p.pow(m))
            .map(|(_, u)| u)
            .ok_or_else(|| Error::Domain("ac undefined at zero".into()))
    }

    /// `ord x mod n`, Euclidean.
    pub fn gamma(&self, n: u32, p: Prime) -> Result<u32, Error> {
        match self.ord(p) {
            Valuation::Finite(v) => Ok(v.rem_euclid(n as i64) as u32),
            Valuation::Infinite => Err(Error::Domain("gamma undefined at zero".into())),
        }
    }
}

pub fn ord(x: &PadicRational, p: Prime) -> Valuation {
    x.ord(p)
}

pub fn ac(x: &PadicRational, m: u32, p: Prime) -> Result<u64, Error> {
    x.ac(m, p)
}

pub fn gamma_n(x: &PadicRational, n: u32, p: Prime) -> Result<u32, Error> {
    x.gamma(n, p)
}

pub fn rho(x: &PadicRational, sort: &LambdaSort) -> LambdaElem {
    sort.rho(x)
}
