use std::collections::{BTreeMap, BTreeSet};

use crate::formula::{Assignment, LinearPoly};
use crate::lambda::{LambdaElem, LambdaSort, Sign};
use crate::padic::{PadicRational, Prime, Valuation};
use crate::error::Error;

/// A Λ-valued expression in `rho(t − c(x))` (`Var`) and finitely many
/// `rho(d(x))` values.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LamTerm {
    Var,
    RhoOf(LinearPoly),
    Scale(Box<LamTerm>, PadicRational),
    /// `rho(lhŝ + sign·p^shift·rhŝ)` over canonical representatives.
    Sum {
        lhs: Box<LamTerm>,
        rhs: Box<LamTerm>,
        shift: u32,
        sign: Sign,
    },
}

impl LamTerm {
    pub fn scaled(self, c: &PadicRational) -> LamTerm {
        if c.is_one() {
            return self;
        }
        match self {
            LamTerm::Scale(t, d) => t.scaled(&(&d * c)),
            t => LamTerm::Scale(Box::new(t), c.clone()),
        }
    }

    pub fn has_var(&self) -> bool {
        match self {
            LamTerm::Var => true,
            LamTerm::RhoOf(_) => false,
            LamTerm::Scale(t, _) => t.has_var(),
            LamTerm::Sum { lhs, rhs, .. } => lhs.has_var() || rhs.has_var(),
        }
    }

    /// Replaces `Var` by `value`.
    pub fn compose(&self, value: &LamTerm) -> LamTerm {
        match self {
            LamTerm::Var => value.clone(),
            LamTerm::RhoOf(_) => self.clone(),
            LamTerm::Scale(t, c) => t.compose(value).scaled(c),
            LamTerm::Sum { lhs, rhs, shift, sign } => LamTerm::Sum {
                lhs: Box::new(lhs.compose(value)),
                rhs: Box::new(rhs.compose(value)),
                shift: *shift,
                sign: *sign,
            },
        }
    }

    pub fn rho_polys(&self, out: &mut BTreeSet<LinearPoly>) {
        match self {
            LamTerm::Var => {}
            LamTerm::RhoOf(h) => {
                out.insert(h.clone());
            }
            LamTerm::Scale(t, _) => t.rho_polys(out),
            LamTerm::Sum { lhs, rhs, .. } => {
                lhs.rho_polys(out);
                rhs.rho_polys(out);
            }
        }
    }

    /// Value given `λ = rho(t − c)` and the values of the `RhoOf` polynomials.
    pub fn eval(&self, lam: LambdaElem, env: &BTreeMap<LinearPoly, LambdaElem>, sort: &LambdaSort) -> LambdaElem {
        match self {
            LamTerm::Var => lam,
            LamTerm::RhoOf(h) => *env.get(h).expect("RhoOf value in environment"),
            LamTerm::Scale(t, c) => sort.scale(t.eval(lam, env, sort), c),
            LamTerm::Sum { lhs, rhs, shift, sign } => {
                let a = lhs.eval(lam, env, sort);
                let b = rhs.eval(lam, env, sort);
                sort.shifted_sum(a, b, *shift, *sign)
            }
        }
    }

    /// Value at a point, computing the `RhoOf` values directly.
    pub fn eval_at(&self, lam: LambdaElem, sigma: &Assignment, sort: &LambdaSort) -> Result<LambdaElem, Error> {
        let mut set = BTreeSet::new();
        self.rho_polys(&mut set);
        let mut env = BTreeMap::new();
        for h in set {
            let v = sort.rho(&h.eval(sigma)?);
            env.insert(h, v);
        }
        Ok(self.eval(lam, &env, sort))
    }
}

/// Where the order of a polynomial comes from on a cell.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OrdDescriptor {
    /// `ord f = ord h(x)`.
    Base(LinearPoly),
    /// `ord f = ord(α·(t − c(x)))`.
    Center(PadicRational),
}

impl OrdDescriptor {
    pub fn scaled(&self, c: &PadicRational) -> OrdDescriptor {
        match self {
            OrdDescriptor::Base(h) => OrdDescriptor::Base(h.scale(c)),
            OrdDescriptor::Center(a) => OrdDescriptor::Center(a * c),
        }
    }

    pub fn eval(&self, sigma: &Assignment, t_minus_c: &PadicRational, p: Prime) -> Result<Valuation, Error> {
        Ok(match self {
            OrdDescriptor::Base(h) => h.eval(sigma)?.ord(p),
            OrdDescriptor::Center(a) => (a * t_minus_c).ord(p),
        })
    }
}
