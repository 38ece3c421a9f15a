//! The finite sorts `Λ_{n,m}`: images of `rho_{n,m}(x) = p^{γ_n(x)} ac_{p^m}(x)`.

use std::fmt;

use crate::error::Error;
use crate::padic::{PadicRational, Prime};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    fn as_i128(self) -> i128 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

/// How `ord a` sits relative to `ord b` when computing `rho(a + δb)` from
/// `rho(a)` and `rho(b)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gap {
    /// `m + ord a <= ord b`: the result is `rho(a)`.
    FarBelow,
    /// `ord a < ord b < ord a + m`; the payload is the shift
    /// `s = ord(â·b / (b̂·a))`, where `â`, `b̂` are the canonical
    /// representatives of `rho(a)`, `rho(b)`. Always a nonnegative multiple of `n`.
    Middle(u32),
    /// `ord a = ord b = ord(a + δb)`.
    Equal,
}

/// An element of `Λ_{n,m}`. Ordered with zero first, then by `(r, a)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LambdaElem {
    Zero,
    Unit { r: u32, a: u64 },
}

impl LambdaElem {
    pub fn is_zero(self) -> bool {
        self == LambdaElem::Zero
    }

    pub fn r(self) -> Option<u32> {
        match self {
            LambdaElem::Zero => None,
            LambdaElem::Unit { r, .. } => Some(r),
        }
    }

    /// True iff the element is nonzero and `r ≡ k (mod d)`.
    pub fn ord_class(self, k: i64, d: u32) -> bool {
        match self {
            LambdaElem::Zero => false,
            LambdaElem::Unit { r, .. } => (r as i64 - k).rem_euclid(d as i64) == 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LambdaSort {
    pub p: Prime,
    pub n: u32,
    pub m: u32,
}

impl LambdaSort {
    pub fn new(p: Prime, n: u32, m: u32) -> Result<Self, Error> {
        if n == 0 || m == 0 {
            return Err(Error::Config(format!("invalid sort ({n},{m})")));
        }
        p.get()
            .checked_pow(m + n - 1)
            .filter(|v| *v < (1 << 60))
            .ok_or_else(|| Error::Config(format!("sort ({n},{m}) too large for p={p}")))?;
        Ok(LambdaSort { p, n, m })
    }

    pub fn modulus(&self) -> u64 {
        self.p.pow(self.m)
    }

    pub fn size(&self) -> usize {
        1 + (self.n as usize) * (self.p.get() as usize - 1) * self.p.pow(self.m - 1) as usize
    }

    /// All elements: zero first, then lexicographic by `(r, a)`.
    pub fn elements(&self) -> Vec<LambdaElem> {
        let mut out = Vec::with_capacity(self.size());
        out.push(LambdaElem::Zero);
        out.extend(self.nonzero_elements());
        out
    }

    pub fn nonzero_elements(&self) -> impl Iterator<Item = LambdaElem> + '_ {
        let p = self.p.get();
        let modulus = self.modulus();
        (0..self.n).flat_map(move |r| {
            (1..modulus)
                .filter(move |a| a % p != 0)
                .map(move |a| LambdaElem::Unit { r, a })
        })
    }

    pub fn contains(&self, l: LambdaElem) -> bool {
        match l {
            LambdaElem::Zero => true,
            LambdaElem::Unit { r, a } => {
                r < self.n && a > 0 && a < self.modulus() && a % self.p.get() != 0
            }
        }
    }

    pub fn rho(&self, x: &PadicRational) -> LambdaElem {
        if let Some(k) = x.to_i128() {
            return self.rho_int(k);
        }
        match x.ord_and_unit(self.p, self.modulus()) {
            None => LambdaElem::Zero,
            Some((v, a)) => LambdaElem::Unit {
                r: v.rem_euclid(self.n as i64) as u32,
                a,
            },
        }
    }

    pub fn rho_int(&self, x: i128) -> LambdaElem {
        if x == 0 {
            return LambdaElem::Zero;
        }
        let p = self.p.get() as i128;
        let (mut v, mut u) = (0u32, x);
        while u % p == 0 {
            u /= p;
            v += 1;
        }
        LambdaElem::Unit {
            r: v % self.n,
            a: u.rem_euclid(self.modulus() as i128) as u64,
        }
    }

    /// Canonical representative `p^r·a`.
    pub fn repr(&self, l: LambdaElem) -> i128 {
        match l {
            LambdaElem::Zero => 0,
            LambdaElem::Unit { r, a } => (self.p.pow(r) as i128) * a as i128,
        }
    }

    pub fn repr_rational(&self, l: LambdaElem) -> PadicRational {
        PadicRational::from_int(self.repr(l))
    }

    /// Inverse of [`LambdaSort::repr`]; rejects non-canonical integers.
    pub fn from_repr(&self, k: i128) -> Result<LambdaElem, Error> {
        if k < 0 {
            return Err(Error::Domain(format!("{k} is not a canonical element of {self}")));
        }
        let l = self.rho_int(k);
        if self.repr(l) != k {
            return Err(Error::Domain(format!("{k} is not a canonical element of {self}")));
        }
        Ok(l)
    }

    /// `rho(λ̂ + δ·p^shift·μ̂)` over canonical representatives.
    pub fn shifted_sum(&self, l: LambdaElem, mu: LambdaElem, shift: u32, sign: Sign) -> LambdaElem {
        let x = self.repr(l);
        let y = self.repr(mu);
        let fast = (self.p.get() as i128)
            .checked_pow(shift)
            .and_then(|ps| ps.checked_mul(y))
            .and_then(|t| t.checked_mul(sign.as_i128()))
            .and_then(|t| t.checked_add(x));
        match fast {
            Some(v) => self.rho_int(v),
            None => {
                let t = PadicRational::from_int(x)
                    + PadicRational::from_int(sign.as_i128() * y)
                        * PadicRational::p_pow(self.p.get(), shift as i64);
                self.rho(&t)
            }
        }
    }

    /// Membership in `D_+` (or its analogue for subtraction): equal `r`
    /// components must not cancel in the leading digit.
    pub fn in_domain0(&self, l: LambdaElem, mu: LambdaElem, sign: Sign) -> bool {
        match (l, mu) {
            (LambdaElem::Unit { r, a }, LambdaElem::Unit { r: r2, a: a2 }) if r == r2 => {
                let p = self.p.get() as i128;
                (a as i128 + sign.as_i128() * a2 as i128).rem_euclid(p) != 0
            }
            _ => true,
        }
    }

    pub fn in_domain_plus0(&self, l: LambdaElem, mu: LambdaElem) -> bool {
        self.in_domain0(l, mu, Sign::Plus)
    }

    fn add_signed(&self, l: LambdaElem, mu: LambdaElem, r: u32, sign: Sign) -> Result<LambdaElem, Error> {
        if !self.contains(l) || !self.contains(mu) {
            return Err(Error::Precondition(format!("element outside {self}")));
        }
        if r >= 1 && (r as u64) * (self.n as u64) >= self.m as u64 {
            return Err(Error::Precondition("addition index out of range".into()));
        }
        if r == 0 && !self.in_domain0(l, mu, sign) {
            return Ok(LambdaElem::Zero);
        }
        Ok(self.shifted_sum(l, mu, r * self.n, sign))
    }

    /// `λ +_r μ`.
    pub fn add_r(&self, l: LambdaElem, mu: LambdaElem, r: u32) -> Result<LambdaElem, Error> {
        self.add_signed(l, mu, r, Sign::Plus)
    }

    /// `λ −_r μ`.
    pub fn sub_r(&self, l: LambdaElem, mu: LambdaElem, r: u32) -> Result<LambdaElem, Error> {
        self.add_signed(l, mu, r, Sign::Minus)
    }

    /// `rho(a + δb)` from `λ = rho(a)`, `μ = rho(b)` and the gap between
    /// `ord a` and `ord b`.
    pub fn add_cases(&self, l: LambdaElem, mu: LambdaElem, sign: Sign, gap: Gap) -> Result<LambdaElem, Error> {
        match gap {
            Gap::FarBelow => Ok(l),
            Gap::Middle(s) => {
                if s % self.n != 0 {
                    return Err(Error::Precondition(format!(
                        "middle shift {s} is not a multiple of n={}",
                        self.n
                    )));
                }
                Ok(self.shifted_sum(l, mu, s, sign))
            }
            Gap::Equal => Ok(self.shifted_sum(l, mu, 0, sign)),
        }
    }

    /// `rho(c·λ̂)`.
    pub fn scale(&self, l: LambdaElem, c: &PadicRational) -> LambdaElem {
        let LambdaElem::Unit { r, a } = l else {
            return LambdaElem::Zero;
        };
        let Some((v, u)) = c.ord_and_unit(self.p, self.modulus()) else {
            return LambdaElem::Zero;
        };
        LambdaElem::Unit {
            r: (r as i64 + v).rem_euclid(self.n as i64) as u32,
            a: ((a as u128 * u as u128) % self.modulus() as u128) as u64,
        }
    }

    /// Natural projection onto a coarser sort.
    pub fn project(&self, l: LambdaElem, to: &LambdaSort) -> Result<LambdaElem, Error> {
        if to.p != self.p || self.n % to.n != 0 || to.m > self.m {
            return Err(Error::Precondition(format!("cannot project {self} onto {to}")));
        }
        Ok(match l {
            LambdaElem::Zero => LambdaElem::Zero,
            LambdaElem::Unit { r, a } => LambdaElem::Unit {
                r: r % to.n,
                a: a % to.modulus(),
            },
        })
    }

    /// The coarsest sort refining both.
    pub fn join(&self, other: &LambdaSort) -> Result<LambdaSort, Error> {
        if self.p != other.p {
            return Err(Error::Precondition("sorts over different primes".into()));
        }
        let n = num_integer::lcm(self.n, other.n);
        LambdaSort::new(self.p, n, self.m.max(other.m))
    }

    pub fn refines(&self, coarse: &LambdaSort) -> bool {
        self.p == coarse.p && self.n % coarse.n == 0 && self.m >= coarse.m
    }
}

impl fmt::Display for LambdaSort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Λ[{},{}] (p={})", self.n, self.m, self.p)
    }
}
