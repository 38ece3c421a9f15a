use std::collections::{BTreeMap, BTreeSet};

use crate::error::Error;
use crate::padic::PadicRational;

/// Point assignment of rationals to variable names.
pub type Assignment = BTreeMap<String, PadicRational>;

/// `a_1 x_1 + … + a_k x_k + b`. Zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct LinearPoly {
    terms: BTreeMap<String, PadicRational>,
    constant: PadicRational,
}

impl LinearPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: PadicRational) -> Self {
        LinearPoly {
            terms: BTreeMap::new(),
            constant: c,
        }
    }

    pub fn int(c: i128) -> Self {
        Self::constant(PadicRational::from_int(c))
    }

    pub fn var(name: &str) -> Self {
        Self::term(name, PadicRational::one())
    }

    pub fn term(name: &str, coeff: PadicRational) -> Self {
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(name.to_string(), coeff);
        }
        LinearPoly {
            terms,
            constant: PadicRational::zero(),
        }
    }

    pub fn from_parts(terms: impl IntoIterator<Item = (String, PadicRational)>, constant: PadicRational) -> Self {
        let mut out = Self::constant(constant);
        for (v, c) in terms {
            out.add_term(&v, &c);
        }
        out
    }

    fn add_term(&mut self, v: &str, c: &PadicRational) {
        if c.is_zero() {
            return;
        }
        let sum = match self.terms.get(v) {
            Some(old) => old + c,
            None => c.clone(),
        };
        if sum.is_zero() {
            self.terms.remove(v);
        } else {
            self.terms.insert(v.to_string(), sum);
        }
    }

    pub fn terms(&self) -> &BTreeMap<String, PadicRational> {
        &self.terms
    }

    pub fn constant_term(&self) -> &PadicRational {
        &self.constant
    }

    pub fn coeff(&self, v: &str) -> PadicRational {
        self.terms.get(v).cloned().unwrap_or_else(PadicRational::zero)
    }

    pub fn contains(&self, v: &str) -> bool {
        self.terms.contains_key(v)
    }

    pub fn vars(&self) -> impl Iterator<Item = &String> {
        self.terms.keys()
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<String>) {
        out.extend(self.terms.keys().cloned());
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() && self.constant.is_zero()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &LinearPoly) -> LinearPoly {
        let mut out = self.clone();
        for (v, c) in &other.terms {
            out.add_term(v, c);
        }
        out.constant = &out.constant + &other.constant;
        out
    }

    pub fn sub(&self, other: &LinearPoly) -> LinearPoly {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> LinearPoly {
        self.scale(&-PadicRational::one())
    }

    pub fn scale(&self, c: &PadicRational) -> LinearPoly {
        if c.is_zero() {
            return LinearPoly::zero();
        }
        if c.is_one() {
            return self.clone();
        }
        LinearPoly {
            terms: self.terms.iter().map(|(v, a)| (v.clone(), a * c)).collect(),
            constant: &self.constant * c,
        }
    }

    /// Splits off variable `v`: returns `(coeff of v, rest)`.
    pub fn split_var(&self, v: &str) -> (PadicRational, LinearPoly) {
        let mut rest = self.clone();
        let c = rest.terms.remove(v).unwrap_or_else(PadicRational::zero);
        (c, rest)
    }

    /// If `self` has a nonzero `v` coefficient `β`, writes `self = β(v − c)`
    /// and returns `(β, c)`.
    pub fn center_form(&self, v: &str) -> Option<(PadicRational, LinearPoly)> {
        let (beta, rest) = self.split_var(v);
        if beta.is_zero() {
            return None;
        }
        let c = rest.scale(&-beta.recip().ok()?);
        Some((beta, c))
    }

    /// Replaces `v` by `value`.
    pub fn substitute(&self, v: &str, value: &LinearPoly) -> LinearPoly {
        let (c, rest) = self.split_var(v);
        rest.add(&value.scale(&c))
    }

    /// `Some(r)` with `other = r·self` when such `r` exists and `self ≠ 0`.
    pub fn ratio_to(&self, other: &LinearPoly) -> Option<PadicRational> {
        if self.is_zero() {
            return None;
        }
        if other.is_zero() {
            return Some(PadicRational::zero());
        }
        if self.terms.len() != other.terms.len() {
            return None;
        }
        let r = match self.terms.iter().next() {
            Some((v, a)) => other.terms.get(v)?.checked_div(a).ok()?,
            None => other.constant.checked_div(&self.constant).ok()?,
        };
        (self.scale(&r) == *other).then_some(r)
    }

    pub fn eval(&self, sigma: &Assignment) -> Result<PadicRational, Error> {
        let mut acc = self.constant.clone();
        for (v, c) in &self.terms {
            let x = sigma.get(v).ok_or_else(|| Error::Unbound(v.clone()))?;
            if !x.is_zero() {
                acc = acc + c * x;
            }
        }
        Ok(acc)
    }

    /// Substitutes the variables bound in `sigma`, leaving the others.
    pub fn partial_eval(&self, sigma: &Assignment) -> LinearPoly {
        let mut out = LinearPoly::constant(self.constant.clone());
        for (v, c) in &self.terms {
            match sigma.get(v) {
                Some(x) => out.constant = &out.constant + &(c * x),
                None => out.add_term(v, c),
            }
        }
        out
    }

    pub fn rename(&self, from: &str, to: &str) -> LinearPoly {
        let (c, mut rest) = self.split_var(from);
        rest.add_term(to, &c);
        rest
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i128) -> PadicRational {
        PadicRational::from_int(n)
    }

    #[test]
    fn arithmetic_drops_zero_coefficients() {
        let f = LinearPoly::var("x").add(&LinearPoly::int(3));
        let g = f.sub(&LinearPoly::var("x"));
        assert!(g.is_constant());
        assert_eq!(g, LinearPoly::int(3));
        assert!(f.sub(&f).is_zero());
    }

    #[test]
    fn center_form_and_ratio() {
        let f = LinearPoly::term("t", q(3)).add(&LinearPoly::term("x", q(-6)));
        let (beta, c) = f.center_form("t").unwrap();
        assert_eq!(beta, q(3));
        assert_eq!(c, LinearPoly::term("x", q(2)));
        assert_eq!(f.ratio_to(&f.scale(&q(-9))), Some(q(-9)));
        assert_eq!(f.ratio_to(&LinearPoly::var("t")), None);
        assert_eq!(LinearPoly::int(2).ratio_to(&LinearPoly::int(6)), Some(q(3)));
    }

    #[test]
    fn eval_and_substitute() {
        let f = LinearPoly::var("x").add(&LinearPoly::term("y", q(2))).add(&LinearPoly::int(1));
        let mut s = Assignment::new();
        s.insert("x".into(), q(4));
        assert!(f.eval(&s).is_err());
        s.insert("y".into(), q(5));
        assert_eq!(f.eval(&s).unwrap(), q(15));
        let g = f.substitute("y", &LinearPoly::var("x"));
        assert_eq!(g, LinearPoly::term("x", q(3)).add(&LinearPoly::int(1)));
    }
}
