//! Formulas of the semi-affine language: AST, concrete syntax and exact
//! point evaluation.

mod derived;
mod parse;
mod poly;
mod print;
mod simplify;

use std::collections::BTreeSet;

pub use derived::{eq_ord, ord_mod};
pub use parse::{parse, parse_poly, parse_with, ScalarField};
pub use poly::{Assignment, LinearPoly};
pub use print::{poly_to_string, FormulaDisplay};

use crate::error::Error;
use crate::lambda::{LambdaElem, LambdaSort};
use crate::padic::{Prime, Valuation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CmpOp {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
}

impl CmpOp {
    pub fn holds(self, a: Valuation, b: Valuation) -> bool {
        match self {
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Eq => a == b,
            CmpOp::Ge => a >= b,
            CmpOp::Gt => a > b,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Eq => "=",
            CmpOp::Ge => ">=",
            CmpOp::Gt => ">",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    True,
    False,
    /// `ord f op ord g`.
    Ord(LinearPoly, CmpOp, LinearPoly),
    /// `f | g`, i.e. `ord f <= ord g`.
    Divides(LinearPoly, LinearPoly),
    /// `rho_{n,m}(f) ∈ S`.
    Rho(LambdaSort, LinearPoly, BTreeSet<LambdaElem>),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Exists(String, Box<Formula>),
    Forall(String, Box<Formula>),
}

impl Formula {
    pub fn lt(f: LinearPoly, g: LinearPoly) -> Formula {
        Formula::Ord(f, CmpOp::Lt, g)
    }

    pub fn le(f: LinearPoly, g: LinearPoly) -> Formula {
        Formula::Ord(f, CmpOp::Le, g)
    }

    /// `f = 0`.
    pub fn is_zero(f: LinearPoly, p: Prime) -> Formula {
        let sort = LambdaSort::new(p, 1, 1).expect("unit sort");
        Formula::Rho(sort, f, [LambdaElem::Zero].into())
    }

    /// `f ≠ 0`, written `ord f < ord 0`.
    pub fn nonzero(f: LinearPoly) -> Formula {
        Formula::lt(f, LinearPoly::zero())
    }

    pub fn rho_in(sort: LambdaSort, f: LinearPoly, set: BTreeSet<LambdaElem>) -> Formula {
        Formula::Rho(sort, f, set)
    }

    /// Conjunction with light cleanup: flattening and constant absorption.
    pub fn and(items: impl IntoIterator<Item = Formula>) -> Formula {
        let mut out = Vec::new();
        for f in items {
            match f {
                Formula::True => {}
                Formula::False => return Formula::False,
                Formula::And(v) => out.extend(v),
                f => out.push(f),
            }
        }
        match out.len() {
            0 => Formula::True,
            1 => out.pop().unwrap(),
            _ => Formula::And(out),
        }
    }

    pub fn or(items: impl IntoIterator<Item = Formula>) -> Formula {
        let mut out = Vec::new();
        for f in items {
            match f {
                Formula::False => {}
                Formula::True => return Formula::True,
                Formula::Or(v) => out.extend(v),
                f => out.push(f),
            }
        }
        match out.len() {
            0 => Formula::False,
            1 => out.pop().unwrap(),
            _ => Formula::Or(out),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        match f {
            Formula::True => Formula::False,
            Formula::False => Formula::True,
            Formula::Not(g) => *g,
            f => Formula::Not(Box::new(f)),
        }
    }

    pub fn exists(v: &str, body: Formula) -> Formula {
        Formula::Exists(v.to_string(), Box::new(body))
    }

    pub fn forall(v: &str, body: Formula) -> Formula {
        Formula::Forall(v.to_string(), Box::new(body))
    }

    pub fn is_atom(&self) -> bool {
        matches!(
            self,
            Formula::Ord(..) | Formula::Divides(..) | Formula::Rho(..)
        )
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        let mut add = |f: &LinearPoly, bound: &Vec<String>| {
            for v in f.vars() {
                if !bound.contains(v) {
                    out.insert(v.clone());
                }
            }
        };
        match self {
            Formula::True | Formula::False => {}
            Formula::Ord(f, _, g) | Formula::Divides(f, g) => {
                add(f, bound);
                add(g, bound);
            }
            Formula::Rho(_, f, _) => add(f, bound),
            Formula::Not(g) => g.collect_free(bound, out),
            Formula::And(v) | Formula::Or(v) => {
                for g in v {
                    g.collect_free(bound, out);
                }
            }
            Formula::Exists(x, g) | Formula::Forall(x, g) => {
                bound.push(x.clone());
                g.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    pub fn bound_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| {
            if let Formula::Exists(x, _) | Formula::Forall(x, _) = f {
                out.insert(x.clone());
            }
        });
        out
    }

    pub fn has_free(&self, v: &str) -> bool {
        match self {
            Formula::True | Formula::False => false,
            Formula::Ord(f, _, g) | Formula::Divides(f, g) => f.contains(v) || g.contains(v),
            Formula::Rho(_, f, _) => f.contains(v),
            Formula::Not(g) => g.has_free(v),
            Formula::And(xs) | Formula::Or(xs) => xs.iter().any(|g| g.has_free(v)),
            Formula::Exists(x, g) | Formula::Forall(x, g) => x != v && g.has_free(v),
        }
    }

    pub fn is_quantifier_free(&self) -> bool {
        self.quantifier_depth() == 0
    }

    pub fn quantifier_depth(&self) -> usize {
        match self {
            Formula::Not(g) => g.quantifier_depth(),
            Formula::And(v) | Formula::Or(v) => {
                v.iter().map(|g| g.quantifier_depth()).max().unwrap_or(0)
            }
            Formula::Exists(_, g) | Formula::Forall(_, g) => 1 + g.quantifier_depth(),
            _ => 0,
        }
    }

    /// Number of atoms and connectives.
    pub fn size(&self) -> usize {
        match self {
            Formula::Not(g) | Formula::Exists(_, g) | Formula::Forall(_, g) => 1 + g.size(),
            Formula::And(v) | Formula::Or(v) => 1 + v.iter().map(|g| g.size()).sum::<usize>(),
            _ => 1,
        }
    }

    /// Pre-order traversal.
    pub fn visit(&self, f: &mut impl FnMut(&Formula)) {
        f(self);
        match self {
            Formula::Not(g) | Formula::Exists(_, g) | Formula::Forall(_, g) => g.visit(f),
            Formula::And(v) | Formula::Or(v) => v.iter().for_each(|g| g.visit(f)),
            _ => {}
        }
    }

    /// All polynomials occurring in atoms.
    pub fn polys(&self) -> Vec<&LinearPoly> {
        let mut out = Vec::new();
        self.collect_polys(&mut out);
        out
    }

    fn collect_polys<'a>(&'a self, out: &mut Vec<&'a LinearPoly>) {
        match self {
            Formula::Ord(f, _, g) | Formula::Divides(f, g) => {
                out.push(f);
                out.push(g);
            }
            Formula::Rho(_, f, _) => out.push(f),
            Formula::Not(g) | Formula::Exists(_, g) | Formula::Forall(_, g) => g.collect_polys(out),
            Formula::And(v) | Formula::Or(v) => v.iter().for_each(|g| g.collect_polys(out)),
            _ => {}
        }
    }

    /// All Λ sorts used by `Rho` atoms.
    pub fn sorts(&self) -> BTreeSet<LambdaSort> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| {
            if let Formula::Rho(s, _, _) = f {
                out.insert(*s);
            }
        });
        out
    }

    /// Rebuilds the formula with every atom replaced by `f(atom)`.
    pub fn map_atoms(&self, f: &mut impl FnMut(&Formula) -> Formula) -> Formula {
        match self {
            Formula::True | Formula::False => self.clone(),
            Formula::Ord(..) | Formula::Divides(..) | Formula::Rho(..) => f(self),
            Formula::Not(g) => Formula::Not(Box::new(g.map_atoms(f))),
            Formula::And(v) => Formula::And(v.iter().map(|g| g.map_atoms(f)).collect()),
            Formula::Or(v) => Formula::Or(v.iter().map(|g| g.map_atoms(f)).collect()),
            Formula::Exists(x, g) => Formula::Exists(x.clone(), Box::new(g.map_atoms(f))),
            Formula::Forall(x, g) => Formula::Forall(x.clone(), Box::new(g.map_atoms(f))),
        }
    }

    /// Substitutes a polynomial for a free variable (no capture checks; the
    /// callers only substitute polynomials in variables that are not bound).
    pub fn substitute(&self, v: &str, value: &LinearPoly) -> Formula {
        match self {
            Formula::Exists(x, _) | Formula::Forall(x, _) if x == v => self.clone(),
            Formula::Exists(x, g) => Formula::Exists(x.clone(), Box::new(g.substitute(v, value))),
            Formula::Forall(x, g) => Formula::Forall(x.clone(), Box::new(g.substitute(v, value))),
            Formula::Not(g) => Formula::Not(Box::new(g.substitute(v, value))),
            Formula::And(xs) => Formula::And(xs.iter().map(|g| g.substitute(v, value)).collect()),
            Formula::Or(xs) => Formula::Or(xs.iter().map(|g| g.substitute(v, value)).collect()),
            Formula::Ord(f, op, g) => Formula::Ord(f.substitute(v, value), *op, g.substitute(v, value)),
            Formula::Divides(f, g) => Formula::Divides(f.substitute(v, value), g.substitute(v, value)),
            Formula::Rho(s, f, set) => Formula::Rho(*s, f.substitute(v, value), set.clone()),
            Formula::True | Formula::False => self.clone(),
        }
    }

    /// Exact truth value of a quantifier-free formula at a point.
    pub fn eval(&self, sigma: &Assignment, p: Prime) -> Result<bool, Error> {
        Ok(match self {
            Formula::True => true,
            Formula::False => false,
            Formula::Ord(f, op, g) => {
                let a = f.eval(sigma)?.ord(p);
                let b = g.eval(sigma)?.ord(p);
                op.holds(a, b)
            }
            Formula::Divides(f, g) => f.eval(sigma)?.ord(p) <= g.eval(sigma)?.ord(p),
            Formula::Rho(sort, f, set) => set.contains(&sort.rho(&f.eval(sigma)?)),
            Formula::Not(g) => !g.eval(sigma, p)?,
            Formula::And(v) => {
                for g in v {
                    if !g.eval(sigma, p)? {
                        return Ok(false);
                    }
                }
                true
            }
            Formula::Or(v) => {
                for g in v {
                    if g.eval(sigma, p)? {
                        return Ok(true);
                    }
                }
                false
            }
            Formula::Exists(..) | Formula::Forall(..) => {
                return Err(Error::Precondition(
                    "eval needs a quantifier-free formula; use the witness oracle".into(),
                ))
            }
        })
    }

    pub fn simplify(&self, p: Prime) -> Formula {
        simplify::simplify(self, p)
    }

    /// Negation normal form: negations only in front of nothing, every
    /// negated atom replaced by the complementary atom.
    pub fn nnf(&self, p: Prime) -> Formula {
        fn go(f: &Formula, neg: bool, p: Prime) -> Formula {
            match f {
                Formula::Not(g) => go(g, !neg, p),
                Formula::And(v) | Formula::Or(v) => {
                    let parts = v.iter().map(|g| go(g, neg, p));
                    if matches!(f, Formula::And(_)) != neg {
                        Formula::and(parts)
                    } else {
                        Formula::or(parts)
                    }
                }
                Formula::Exists(x, g) | Formula::Forall(x, g) => {
                    let body = Box::new(go(g, neg, p));
                    if matches!(f, Formula::Exists(..)) != neg {
                        Formula::Exists(x.clone(), body)
                    } else {
                        Formula::Forall(x.clone(), body)
                    }
                }
                atom if neg => simplify::negate(atom.simplify(p), p),
                atom => atom.clone(),
            }
        }
        go(self, false, p)
    }

    pub fn display(&self, p: Prime) -> FormulaDisplay<'_> {
        FormulaDisplay { f: self, p }
    }

    pub fn to_text(&self, p: Prime) -> String {
        self.display(p).to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::PadicRational;

    fn p3() -> Prime {
        Prime::new(3).unwrap()
    }

    #[test]
    fn eval_examples() {
        let p = p3();
        let s = Assignment::new();
        assert!(parse("ord(9) = ord(18)", p).unwrap().eval(&s, p).unwrap());
        assert!(parse("rho[2,1](3) = 3", p).unwrap().eval(&s, p).unwrap());
        let f = parse("x | 0", p).unwrap();
        for x in [-5, 0, 1, 9] {
            let mut s = Assignment::new();
            s.insert("x".into(), PadicRational::from_int(x));
            assert!(f.eval(&s, p).unwrap());
        }
        assert!(matches!(
            parse("x | y", p).unwrap().eval(&s, p),
            Err(Error::Unbound(_))
        ));
    }

    #[test]
    fn divides_zero_left() {
        let p = p3();
        let f = parse("0 | y", p).unwrap();
        for (y, want) in [(0, true), (1, false), (27, false)] {
            let mut s = Assignment::new();
            s.insert("y".into(), PadicRational::from_int(y));
            assert_eq!(f.eval(&s, p).unwrap(), want);
        }
    }

    #[test]
    fn free_and_bound_vars() {
        let p = p3();
        let f = parse("E t. (x | t & t | y)", p).unwrap();
        assert_eq!(f.free_vars(), ["x".to_string(), "y".to_string()].into());
        assert_eq!(f.bound_vars(), ["t".to_string()].into());
        assert_eq!(f.quantifier_depth(), 1);
        assert!(f.has_free("x"));
        assert!(!f.has_free("t"));
    }
}
