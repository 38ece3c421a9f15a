//! Projection of cells along the last variable.
//!
//! For `λ ≠ 0` with `ord`-class `r` the fibre over `x` is nonempty iff some
//! integer `v ≡ r (mod n)` lies strictly between `ord a1(x)` and `ord a2(x)`.
//! With a lower bound the least candidate is `ord a1 + δ`, where
//! `δ = 1 + ((r − ζ − 1) mod n)` and `ζ = ord a1 mod n`, so the condition is
//! the disjunction over `ζ` of `ord a1 ≡ ζ ∧ ord(p^δ a1) < ord a2`. Without a
//! lower bound the value group is unbounded below and any class is hit.

use std::collections::BTreeSet;

use super::to_cells::CellUnion;
use crate::cells::Cell;
use crate::formula::{ord_mod, Formula};
use crate::lambda::LambdaElem;
use crate::padic::PadicRational;

/// `∃t (x,t) ∈ C` for `λ ≠ 0` in the class `r`.
pub fn class_exists(c: &Cell, r: u32) -> Formula {
    let p = c.sort.p;
    let n = c.sort.n as i64;
    match (&c.lower, &c.upper) {
        (None, _) => Formula::True,
        (Some(a1), None) => Formula::nonzero(a1.clone()),
        (Some(a1), Some(a2)) => Formula::or((0..n).map(|zeta| {
            let delta = 1 + (r as i64 - zeta - 1).rem_euclid(n);
            let shifted = a1.scale(&PadicRational::p_pow(p.get(), delta));
            // the strict comparison already forces a1 ≠ 0
            Formula::and([ord_mod(a1, zeta, c.sort.n, p), Formula::lt(shifted, a2.clone())])
        })),
    }
}

/// `∃t (x,t) ∈ C` as a formula in the base variables.
pub fn cell_exists(c: &Cell) -> Formula {
    let p = c.sort.p;
    let mut parts = Vec::new();
    if c.lset.contains(&LambdaElem::Zero) && c.upper.is_none() {
        // t = c(x): ord(t − c) = +inf clears every lower bound with a1 ≠ 0.
        parts.push(match &c.lower {
            Some(a1) => Formula::nonzero(a1.clone()),
            None => Formula::True,
        });
    }
    let classes: BTreeSet<u32> = c.lset.iter().filter_map(|l| l.r()).collect();
    for r in classes {
        parts.push(class_exists(c, r));
    }
    Formula::and([c.base.clone(), Formula::or(parts)]).simplify(p)
}

/// The projection of a cell union along its last variable.
pub fn eliminate_exists(u: &CellUnion) -> Formula {
    let Some(first) = u.cells.first() else {
        return Formula::False;
    };
    let p = first.sort.p;
    Formula::or(u.cells.iter().map(cell_exists)).simplify(p)
}

