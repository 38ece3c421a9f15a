//! Equivalence-preserving cleanup: constant folding, comparisons between
//! scalar multiples of one polynomial, flattening, deduplication and merging
//! of `Rho` atoms over the same polynomial.

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::hash::{Hash, Hasher};

use super::{CmpOp, Formula, LinearPoly};
use crate::lambda::{LambdaElem, LambdaSort};
use crate::padic::{PadicRational, Prime, Valuation};

/// Coefficient of the first variable, or the constant.
fn lead(a: &LinearPoly) -> PadicRational {
    a.terms().values().next().cloned().unwrap_or_else(|| a.constant_term().clone())
}

fn monic(a: &LinearPoly) -> LinearPoly {
    match lead(a).recip() {
        Ok(c) => a.scale(&c),
        Err(_) => a.clone(),
    }
}

/// `(a, b)` rescaled to `(a/u, b/v)` with units `u, v` and then by a common
/// power of `p`, so that the first side with a variable is monic. Both
/// sides must be nonzero.
fn canonical_pair(a: &LinearPoly, b: &LinearPoly, p: Prime) -> (LinearPoly, LinearPoly) {
    let unit = |f: &LinearPoly| {
        let c = lead(f);
        let Valuation::Finite(k) = c.ord(p) else {
            unreachable!("nonzero lead")
        };
        f.scale(&(&PadicRational::p_pow(p.get(), k) * &c.recip().expect("nonzero lead")))
    };
    let (a, b) = (unit(a), unit(b));
    let pivot = if a.is_constant() { lead(&b) } else { lead(&a) };
    let s = pivot.recip().expect("nonzero lead");
    (a.scale(&s), b.scale(&s))
}

pub(super) fn simplify(f: &Formula, p: Prime) -> Formula {
    match f {
        Formula::True | Formula::False => f.clone(),
        Formula::Ord(a, op, b) => ord_atom(a, *op, b, p, false),
        Formula::Divides(a, b) => ord_atom(a, CmpOp::Le, b, p, true),
        Formula::Rho(sort, g, set) => rho_atom(sort, g, set),
        Formula::Not(g) => negate(simplify(g, p), p),
        Formula::And(v) => junction(v.iter().map(|g| simplify(g, p)), true, p),
        Formula::Or(v) => junction(v.iter().map(|g| simplify(g, p)), false, p),
        Formula::Exists(x, g) | Formula::Forall(x, g) => {
            let body = simplify(g, p);
            if !body.has_free(x) {
                body
            } else if matches!(f, Formula::Exists(..)) {
                Formula::Exists(x.clone(), Box::new(body))
            } else {
                Formula::Forall(x.clone(), Box::new(body))
            }
        }
    }
}

fn ord_atom(a: &LinearPoly, op: CmpOp, b: &LinearPoly, p: Prime, divides: bool) -> Formula {
    let rebuild = |a: &LinearPoly, op: CmpOp, b: &LinearPoly| {
        if divides && op == CmpOp::Le {
            Formula::Divides(a.clone(), b.clone())
        } else {
            Formula::Ord(a.clone(), op, b.clone())
        }
    };
    if a.is_constant() && b.is_constant() {
        let va = a.constant_term().ord(p);
        let vb = b.constant_term().ord(p);
        return bool_formula(op.holds(va, vb));
    }
    // Zero on one side: ord 0 = +inf.
    if b.is_zero() {
        return match op {
            CmpOp::Lt => Formula::nonzero(monic(a)),
            CmpOp::Le => Formula::True,
            CmpOp::Eq | CmpOp::Ge => rho_zero(a, p),
            CmpOp::Gt => Formula::False,
        };
    }
    if a.is_zero() {
        return match op {
            CmpOp::Lt => Formula::False,
            CmpOp::Le | CmpOp::Eq => rho_zero(b, p),
            CmpOp::Ge => Formula::True,
            CmpOp::Gt => Formula::nonzero(monic(b)),
        };
    }
    if let Some(r) = a.ratio_to(b) {
        // ord b = ord a + k wherever a ≠ 0; both are +inf where a = 0.
        let Valuation::Finite(k) = r.ord(p) else {
            unreachable!("b is nonzero")
        };
        let on_nonzero = match op {
            CmpOp::Lt => 0 < k,
            CmpOp::Le => 0 <= k,
            CmpOp::Eq => k == 0,
            CmpOp::Ge => k <= 0,
            CmpOp::Gt => k < 0,
        };
        let at_zero = matches!(op, CmpOp::Le | CmpOp::Eq | CmpOp::Ge);
        return match (on_nonzero, at_zero) {
            (true, true) => Formula::True,
            (false, false) => Formula::False,
            (true, false) => Formula::nonzero(monic(a)),
            (false, true) => rho_zero(a, p),
        };
    }
    let (a, b) = canonical_pair(a, b, p);
    rebuild(&a, op, &b)
}

fn rho_atom(sort: &LambdaSort, g: &LinearPoly, set: &BTreeSet<LambdaElem>) -> Formula {
    if set.is_empty() {
        return Formula::False;
    }
    if set.len() == sort.size() {
        return Formula::True;
    }
    if g.is_constant() {
        return bool_formula(set.contains(&sort.rho(g.constant_term())));
    }
    // rho(g) = c·rho(g/c)
    let c = lead(g);
    if c.is_one() {
        return Formula::Rho(*sort, g.clone(), set.clone());
    }
    let inv = c.recip().expect("nonzero lead");
    Formula::Rho(*sort, g.scale(&inv), set.iter().map(|l| sort.scale(*l, &inv)).collect())
}

fn rho_zero(a: &LinearPoly, p: Prime) -> Formula {
    match Formula::is_zero(a.clone(), p) {
        Formula::Rho(sort, g, set) => rho_atom(&sort, &g, &set),
        f => f,
    }
}

fn bool_formula(b: bool) -> Formula {
    if b {
        Formula::True
    } else {
        Formula::False
    }
}

/// Negation of an already simplified formula, pushed into atoms where the
/// result stays an atom.
pub(super) fn negate(f: Formula, p: Prime) -> Formula {
    match f {
        Formula::True => Formula::False,
        Formula::False => Formula::True,
        Formula::Not(g) => *g,
        Formula::Rho(sort, g, set) => {
            let comp: BTreeSet<_> = sort.elements().into_iter().filter(|l| !set.contains(l)).collect();
            rho_atom(&sort, &g, &comp)
        }
        Formula::Ord(a, CmpOp::Lt, b) => ord_atom(&b, CmpOp::Le, &a, p, false),
        Formula::Ord(a, CmpOp::Le, b) => ord_atom(&b, CmpOp::Lt, &a, p, false),
        Formula::Ord(a, CmpOp::Ge, b) => ord_atom(&a, CmpOp::Lt, &b, p, false),
        Formula::Ord(a, CmpOp::Gt, b) => ord_atom(&a, CmpOp::Le, &b, p, false),
        Formula::Divides(a, b) => ord_atom(&b, CmpOp::Lt, &a, p, false),
        f => Formula::Not(Box::new(f)),
    }
}

fn hash_of(f: &Formula) -> u64 {
    let mut h = DefaultHasher::new();
    f.hash(&mut h);
    h.finish()
}

/// Members of a junction, deduplicated by hash without cloning.
#[derive(Default)]
struct Members {
    out: Vec<Formula>,
    by_hash: HashMap<u64, Vec<usize>>,
}

impl Members {
    fn find(&self, f: &Formula) -> Option<usize> {
        self.by_hash.get(&hash_of(f))?.iter().copied().find(|&i| self.out[i] == *f)
    }

    fn push(&mut self, f: Formula) {
        let h = hash_of(&f);
        let slot = self.by_hash.entry(h).or_default();
        if slot.iter().any(|&i| self.out[i] == f) {
            return;
        }
        slot.push(self.out.len());
        self.out.push(f);
    }
}

fn junction(items: impl Iterator<Item = Formula>, is_and: bool, p: Prime) -> Formula {
    let (unit, zero) = if is_and {
        (Formula::True, Formula::False)
    } else {
        (Formula::False, Formula::True)
    };
    let mut members = Members::default();
    let mut rhos: Vec<Formula> = Vec::new();
    // (sort, poly) -> index in `rhos` of the merged Rho atom
    let mut rho_slot: BTreeMap<(LambdaSort, LinearPoly), usize> = BTreeMap::new();
    let mut stack: Vec<Formula> = items.collect();
    stack.reverse();
    while let Some(g) = stack.pop() {
        if g == unit {
            continue;
        }
        if g == zero {
            return zero;
        }
        match g {
            Formula::And(v) if is_and => {
                stack.extend(v.into_iter().rev());
                continue;
            }
            Formula::Or(v) if !is_and => {
                stack.extend(v.into_iter().rev());
                continue;
            }
            Formula::Rho(sort, poly, set) => {
                let key = (sort, poly);
                if let Some(&i) = rho_slot.get(&key) {
                    let Formula::Rho(_, _, old) = &rhos[i] else {
                        unreachable!()
                    };
                    let merged: BTreeSet<_> = if is_and {
                        old.intersection(&set).copied().collect()
                    } else {
                        old.union(&set).copied().collect()
                    };
                    if rho_atom(&key.0, &key.1, &merged) == zero {
                        return zero;
                    }
                    rhos[i] = Formula::Rho(key.0, key.1, merged);
                } else {
                    rho_slot.insert(key.clone(), rhos.len());
                    rhos.push(Formula::Rho(key.0, key.1, set));
                }
            }
            g => members.push(g),
        }
    }
    for r in rhos {
        let Formula::Rho(sort, g, set) = r else { unreachable!() };
        let atom = rho_atom(&sort, &g, &set);
        if atom != unit {
            members.push(atom);
        }
    }
    // complementary pair
    for g in &members.out {
        let hit = match g {
            Formula::Not(h) => members.find(h).is_some(),
            Formula::Ord(..) | Formula::Divides(..) => members.find(&negate(g.clone(), p)).is_some(),
            _ => false,
        };
        if hit {
            return zero;
        }
    }
    let mut out = members.out;
    match out.len() {
        0 => unit,
        1 => out.pop().unwrap(),
        _ if is_and => Formula::And(out),
        _ => Formula::Or(out),
    }
}
