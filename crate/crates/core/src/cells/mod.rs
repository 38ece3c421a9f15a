//! Cells `{(x,t) : base(x), ord a1(x) < ord(t − c(x)) < ord a2(x), rho(t − c(x)) ∈ S}`
//! and the two decomposition algorithms: pairwise intersection and
//! polycenters.

mod feasible;
mod intersect;
mod polycenters;
mod term;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

pub use feasible::ord_infeasible;
pub use intersect::{intersect, select_extreme, zone_split, Piece};
pub use polycenters::{centers_of, introduce_center, polycenters, Carrier, Pins, Relations};
pub use term::{LamTerm, OrdDescriptor};

use crate::error::Error;
use crate::formula::{parse, parse_poly, poly_to_string, Assignment, CmpOp, Formula, LinearPoly};
use crate::lambda::{LambdaElem, LambdaSort};
use crate::padic::{PadicRational, Prime, Valuation};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cell {
    /// Base variables `x_1, …, x_k`.
    pub xvars: Vec<String>,
    /// The fibre variable `t`.
    pub var: String,
    pub base: Formula,
    pub center: LinearPoly,
    pub lower: Option<LinearPoly>,
    pub upper: Option<LinearPoly>,
    pub sort: LambdaSort,
    pub lset: BTreeSet<LambdaElem>,
}

impl Cell {
    /// The whole space, centered at `center`.
    pub fn full(xvars: Vec<String>, var: &str, center: LinearPoly, sort: LambdaSort) -> Cell {
        Cell {
            xvars,
            var: var.to_string(),
            base: Formula::True,
            center,
            lower: None,
            upper: None,
            sort,
            lset: sort.elements().into_iter().collect(),
        }
    }

    /// `t − c(x)` at a point.
    pub fn offset(&self, sigma: &Assignment) -> Result<PadicRational, Error> {
        let t = sigma.get(&self.var).ok_or_else(|| Error::Unbound(self.var.clone()))?;
        Ok(t - &self.center.eval(sigma)?)
    }

    /// Membership with `ord 0 = +inf`.
    pub fn member(&self, sigma: &Assignment) -> Result<bool, Error> {
        let p = self.sort.p;
        let a = self.offset(sigma)?;
        if !self.lset.contains(&self.sort.rho(&a)) || !self.bounds_hold(sigma, a.ord(p))? {
            return Ok(false);
        }
        self.base.eval(sigma, p)
    }

    /// The bound conditions for a given `ord(t − c(x))`.
    pub fn bounds_hold(&self, sigma: &Assignment, va: Valuation) -> Result<bool, Error> {
        let p = self.sort.p;
        if let Some(l) = &self.lower {
            if l.eval(sigma)?.ord(p) >= va {
                return Ok(false);
            }
        }
        if let Some(u) = &self.upper {
            if va >= u.eval(sigma)?.ord(p) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Cheap sufficient test for emptiness.
    pub fn is_trivially_empty(&self) -> bool {
        if self.base == Formula::False || self.lset.is_empty() {
            return true;
        }
        if self.lower.as_ref().is_some_and(|l| l.is_zero()) {
            return true;
        }
        let nonzero = self.lset.iter().any(|l| !l.is_zero());
        if self.upper.is_some() && !nonzero {
            return true;
        }
        if let (Some(l), Some(u)) = (&self.lower, &self.upper) {
            if l.is_constant() && u.is_constant() {
                let (a, b) = (l.constant_term().ord(self.sort.p), u.constant_term().ord(self.sort.p));
                return match (a, b) {
                    (Valuation::Finite(a), Valuation::Finite(b)) => {
                        !self.lset.iter().any(|lam| match lam.r() {
                            Some(r) => (a + 1..b).any(|v| v.rem_euclid(self.sort.n as i64) == r as i64),
                            None => false,
                        })
                    }
                    (Valuation::Infinite, _) => true,
                    (_, Valuation::Infinite) => false,
                };
            }
            if let Some(r) = l.ratio_to(u) {
                if r.is_zero() {
                    return false;
                }
                // ord u = ord l + k: no integer strictly between when k <= 1
                let k = r.ord(self.sort.p).finite().unwrap();
                if k <= 1 {
                    return true;
                }
            }
        }
        let bounds = self.lower.as_ref().zip(self.upper.as_ref());
        ord_infeasible(&self.base, bounds, self.sort.p)
    }

    /// The conditions defining the cell, as a formula in `(x, t)`.
    pub fn to_formula(&self) -> Formula {
        let tc = LinearPoly::var(&self.var).sub(&self.center);
        let mut parts = vec![self.base.clone()];
        if let Some(l) = &self.lower {
            parts.push(Formula::Ord(l.clone(), CmpOp::Lt, tc.clone()));
        }
        if let Some(u) = &self.upper {
            parts.push(Formula::Ord(tc.clone(), CmpOp::Lt, u.clone()));
        }
        parts.push(Formula::Rho(self.sort, tc, self.lset.clone()));
        Formula::and(parts)
    }

    pub fn to_record(&self) -> CellRecord {
        let p = self.sort.p;
        let mut vars = self.xvars.clone();
        vars.push(self.var.clone());
        CellRecord {
            vars,
            var: self.var.clone(),
            base: self.base.to_text(p),
            center: poly_to_string(&self.center, p),
            lower: self.lower.as_ref().map(|l| poly_to_string(l, p)),
            upper: self.upper.as_ref().map(|u| poly_to_string(u, p)),
            sort: [self.sort.n, self.sort.m],
            lset: self.lset.iter().map(|l| self.sort.repr(*l)).collect(),
        }
    }

    pub fn from_record(rec: &CellRecord, p: Prime) -> Result<Cell, Error> {
        let sort = LambdaSort::new(p, rec.sort[0], rec.sort[1])?;
        let xvars: Vec<String> = rec.vars.iter().filter(|v| **v != rec.var).cloned().collect();
        let lset = rec
            .lset
            .iter()
            .map(|k| sort.from_repr(*k))
            .collect::<Result<BTreeSet<_>, _>>()?;
        Ok(Cell {
            xvars,
            var: rec.var.clone(),
            base: parse(&rec.base, p)?,
            center: parse_poly(&rec.center, p)?,
            lower: rec.lower.as_deref().map(|s| parse_poly(s, p)).transpose()?,
            upper: rec.upper.as_deref().map(|s| parse_poly(s, p)).transpose()?,
            sort,
            lset,
        })
    }
}

/// Serialized form of a cell. Polynomials and the base are in the formula
/// syntax; Λ elements are canonical representatives.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellRecord {
    pub vars: Vec<String>,
    pub var: String,
    pub base: String,
    pub center: String,
    pub lower: Option<String>,
    pub upper: Option<String>,
    pub sort: [u32; 2],
    pub lset: Vec<i128>,
}

/// Rewrites an order comparison (or divisibility) into strict `<` atoms and
/// zero tests.
///
/// `ord f <= ord g` becomes `ord f < ord(p·g)`, which differs from the
/// original only where `f = g = 0`; that case is added back explicitly.
pub fn rewrite_cmp(atom: &Formula, p: Prime) -> Formula {
    let pp = PadicRational::from_int(p.get() as i128);
    let both_zero = |f: &LinearPoly, g: &LinearPoly| {
        Formula::and([Formula::is_zero(f.clone(), p), Formula::is_zero(g.clone(), p)])
    };
    let le = |f: &LinearPoly, g: &LinearPoly| {
        Formula::or([Formula::lt(f.clone(), g.scale(&pp)), both_zero(f, g)])
    };
    let out = match atom {
        Formula::Divides(f, g) => le(f, g),
        Formula::Ord(f, op, g) => match op {
            CmpOp::Lt => atom.clone(),
            CmpOp::Gt => Formula::lt(g.clone(), f.clone()),
            CmpOp::Le => le(f, g),
            CmpOp::Ge => le(g, f),
            CmpOp::Eq => Formula::or([
                Formula::and([Formula::lt(f.clone(), g.scale(&pp)), Formula::lt(g.clone(), f.scale(&pp))]),
                both_zero(f, g),
            ]),
        },
        other => other.clone(),
    };
    out.simplify(p)
}

/// Applies [`rewrite_cmp`] to every atom.
pub fn rewrite_all(f: &Formula, p: Prime) -> Formula {
    let mut rw = |a: &Formula| rewrite_cmp(a, p);
    f.map_atoms(&mut rw).nnf(p).map_atoms(&mut rw).simplify(p)
}
