//! Intersection of two cells by the trichotomy on `ord(t − c1)` against
//! `ord(c1 − c2)`.
//!
//! With `b = c1 − c2` and `d = ord(t − c1) − ord b` the zones are:
//! the branch `b = 0`; `d ≥ m` (far above `c1`); `0 < d < m`; `d = 0` without
//! cancellation; `d = 0` with cancellation, which is `ord(t − c2) > ord b` and
//! is split the same way around `c2`; `−m < d < 0`; and `d ≤ −m`. In each
//! zone `rho(t − c2)` and `ord(t − c2)` are functions of `rho(t − c1)`,
//! `rho(b)` and `ord b`, so the conditions of the second cell become bounds,
//! x-guards and a transported Λ-set.

use std::collections::{BTreeMap, BTreeSet};

use super::term::{LamTerm, OrdDescriptor};
use super::Cell;
use crate::error::Error;
use crate::formula::{Formula, LinearPoly};
use crate::lambda::{LambdaElem, Sign};
use crate::padic::{PadicRational, Prime};

/// One cell of [`zone_split`], with the other center expressed relative to
/// this cell's center.
#[derive(Clone, Debug)]
pub struct Piece {
    pub cell: Cell,
    /// The cell is centered at the second input's center.
    pub second: bool,
    /// `rho(t − other center)` in terms of `Var = rho(t − own center)`.
    pub residue: LamTerm,
    /// `ord(t − other center)`.
    pub order: OrdDescriptor,
    /// Values the `RhoOf` polynomials can take on this cell.
    pub pins: BTreeMap<LinearPoly, BTreeSet<LambdaElem>>,
}

fn pp(p: Prime, k: i64) -> PadicRational {
    PadicRational::p_pow(p.get(), k)
}

/// Case split choosing the bound with the largest (`max`) or smallest order.
/// Ties go to the earliest polynomial.
pub fn select_extreme(polys: &[LinearPoly], max: bool, p: Prime) -> Vec<(Formula, Option<LinearPoly>)> {
    let mut uniq: Vec<LinearPoly> = Vec::new();
    for f in polys {
        if !uniq.contains(f) {
            uniq.push(f.clone());
        }
    }
    match uniq.len() {
        0 => return vec![(Formula::True, None)],
        1 => return vec![(Formula::True, Some(uniq.pop().unwrap()))],
        _ => {}
    }
    let mut out = Vec::new();
    for (i, fi) in uniq.iter().enumerate() {
        let mut guards = Vec::new();
        for (j, fj) in uniq.iter().enumerate() {
            if i == j {
                continue;
            }
            let (a, b) = if max { (fj, fi) } else { (fi, fj) };
            guards.push(if j < i {
                Formula::lt(a.clone(), b.clone())
            } else {
                Formula::le(a.clone(), b.clone())
            });
        }
        let g = Formula::and(guards).simplify(p);
        if g != Formula::False {
            out.push((g, Some(fi.clone())));
        }
    }
    out
}

struct Shape {
    base: Vec<Formula>,
    lowers: Vec<LinearPoly>,
    uppers: Vec<LinearPoly>,
    lset: BTreeSet<LambdaElem>,
}

fn emit(
    template: &Cell,
    center: &LinearPoly,
    shape: Shape,
    mut make: impl FnMut(Cell),
) {
    let p = template.sort.p;
    let base = Formula::and(shape.base).simplify(p);
    if base == Formula::False || shape.lset.is_empty() {
        return;
    }
    for (gl, lower) in select_extreme(&shape.lowers, true, p) {
        for (gu, upper) in select_extreme(&shape.uppers, false, p) {
            let b = Formula::and([base.clone(), gl.clone(), gu.clone()]).simplify(p);
            let cell = Cell {
                xvars: template.xvars.clone(),
                var: template.var.clone(),
                base: b,
                center: center.clone(),
                lower: lower.clone(),
                upper: upper.clone(),
                sort: template.sort,
                lset: shape.lset.clone(),
            };
            if !cell.is_trivially_empty() {
                make(cell);
            }
        }
    }
}

fn opt(v: &Option<LinearPoly>) -> Vec<LinearPoly> {
    v.iter().cloned().collect()
}

/// Guards saying that a cell's bounds hold when `ord(t − its center) = ord h`.
fn bounds_at(c: &Cell, h: &LinearPoly) -> Vec<Formula> {
    let mut out = Vec::new();
    if let Some(l) = &c.lower {
        out.push(Formula::lt(l.clone(), h.clone()));
    }
    if let Some(u) = &c.upper {
        out.push(Formula::lt(h.clone(), u.clone()));
    }
    out
}

/// The zones around the primary cell `pc` (center `P`) against the other
/// cell `oc` (center `O`), with `beta = P − O`. `all` adds the zones with
/// `ord(t − P) <= ord beta`.
fn zones(pc: &Cell, oc: &Cell, beta: &LinearPoly, second: bool, all: bool, out: &mut Vec<Piece>) {
    let sort = pc.sort;
    let p = sort.p;
    let (n, m) = (sort.n as i64, sort.m as i64);
    let nonzero: Vec<LambdaElem> = sort.nonzero_elements().collect();
    let p_lset_nz: Vec<LambdaElem> = pc.lset.iter().copied().filter(|l| !l.is_zero()).collect();
    let base = |extra: Vec<Formula>| {
        let mut v = vec![pc.base.clone(), oc.base.clone()];
        v.extend(extra);
        v
    };
    let center = &pc.center;
    let piece = |cell: Cell, residue: LamTerm, order: OrdDescriptor, pins: BTreeMap<LinearPoly, BTreeSet<LambdaElem>>| Piece {
        cell,
        second,
        residue,
        order,
        pins,
    };

    // d >= m: rho(t − O) = rho(beta), ord(t − O) = ord beta.
    {
        let o_nz: BTreeSet<LambdaElem> = oc.lset.iter().copied().filter(|l| !l.is_zero()).collect();
        let mut extra = bounds_at(oc, beta);
        extra.push(Formula::Rho(sort, beta.clone(), o_nz.clone()));
        let shape = Shape {
            base: base(extra),
            lowers: [opt(&pc.lower), vec![beta.scale(&pp(p, m - 1))]].concat(),
            uppers: opt(&pc.upper),
            lset: pc.lset.clone(),
        };
        let pins: BTreeMap<_, _> = [(beta.clone(), o_nz)].into();
        emit(pc, center, shape, |cell| {
            out.push(piece(cell, LamTerm::RhoOf(beta.clone()), OrdDescriptor::Base(beta.clone()), pins.clone()))
        });
    }

    // 0 < d < m: ord(t − O) = ord beta, rho(t − O) = rho(μ̂ + p^s λ̂).
    for d in 1..m {
        let h = beta.scale(&pp(p, d));
        let mut groups: BTreeMap<(u32, BTreeSet<LambdaElem>), BTreeSet<LambdaElem>> = BTreeMap::new();
        for &mu in &nonzero {
            let rmu = mu.r().unwrap() as i64;
            let rl = (rmu + d).rem_euclid(n);
            let s = (d + rmu - rl) as u32;
            let set: BTreeSet<LambdaElem> = p_lset_nz
                .iter()
                .copied()
                .filter(|l| l.r() == Some(rl as u32))
                .filter(|l| oc.lset.contains(&sort.shifted_sum(mu, *l, s, Sign::Plus)))
                .collect();
            if !set.is_empty() {
                groups.entry((s, set)).or_default().insert(mu);
            }
        }
        for ((s, lset), mus) in groups {
            let mut extra = bounds_at(pc, &h);
            extra.extend(bounds_at(oc, beta));
            extra.push(Formula::Rho(sort, beta.clone(), mus.clone()));
            let shape = Shape {
                base: base(extra),
                lowers: vec![beta.scale(&pp(p, d - 1))],
                uppers: vec![beta.scale(&pp(p, d + 1))],
                lset,
            };
            let residue = LamTerm::Sum {
                lhs: Box::new(LamTerm::RhoOf(beta.clone())),
                rhs: Box::new(LamTerm::Var),
                shift: s,
                sign: Sign::Plus,
            };
            let pins: BTreeMap<_, _> = [(beta.clone(), mus)].into();
            emit(pc, center, shape, |cell| {
                out.push(piece(cell, residue.clone(), OrdDescriptor::Base(beta.clone()), pins.clone()))
            });
        }
    }

    if !all {
        return;
    }

    // d = 0 without cancellation.
    {
        let mut groups: BTreeMap<BTreeSet<LambdaElem>, BTreeSet<LambdaElem>> = BTreeMap::new();
        for &mu in &nonzero {
            let set: BTreeSet<LambdaElem> = p_lset_nz
                .iter()
                .copied()
                .filter(|l| l.r() == mu.r() && sort.in_domain0(*l, mu, Sign::Plus))
                .filter(|l| oc.lset.contains(&sort.shifted_sum(*l, mu, 0, Sign::Plus)))
                .collect();
            if !set.is_empty() {
                groups.entry(set).or_default().insert(mu);
            }
        }
        for (lset, mus) in groups {
            let mut extra = bounds_at(pc, beta);
            extra.extend(bounds_at(oc, beta));
            extra.push(Formula::Rho(sort, beta.clone(), mus.clone()));
            let shape = Shape {
                base: base(extra),
                lowers: vec![beta.scale(&pp(p, -1))],
                uppers: vec![beta.scale(&pp(p, 1))],
                lset,
            };
            let residue = LamTerm::Sum {
                lhs: Box::new(LamTerm::Var),
                rhs: Box::new(LamTerm::RhoOf(beta.clone())),
                shift: 0,
                sign: Sign::Plus,
            };
            let pins: BTreeMap<_, _> = [(beta.clone(), mus)].into();
            emit(pc, center, shape, |cell| {
                out.push(piece(cell, residue.clone(), OrdDescriptor::Base(beta.clone()), pins.clone()))
            });
        }
    }

    // −m < d < 0: ord(t − O) = ord(t − P), rho(t − O) = rho(λ̂ + p^s μ̂).
    for d in (1 - m)..0 {
        let h = beta.scale(&pp(p, d));
        let mut groups: BTreeMap<(u32, BTreeSet<LambdaElem>), BTreeSet<LambdaElem>> = BTreeMap::new();
        for &mu in &nonzero {
            let rmu = mu.r().unwrap() as i64;
            let rl = (rmu + d).rem_euclid(n);
            let s = (rl - rmu - d) as u32;
            let set: BTreeSet<LambdaElem> = p_lset_nz
                .iter()
                .copied()
                .filter(|l| l.r() == Some(rl as u32))
                .filter(|l| oc.lset.contains(&sort.shifted_sum(*l, mu, s, Sign::Plus)))
                .collect();
            if !set.is_empty() {
                groups.entry((s, set)).or_default().insert(mu);
            }
        }
        for ((s, lset), mus) in groups {
            let mut extra = bounds_at(pc, &h);
            extra.extend(bounds_at(oc, &h));
            extra.push(Formula::Rho(sort, beta.clone(), mus.clone()));
            let shape = Shape {
                base: base(extra),
                lowers: vec![beta.scale(&pp(p, d - 1))],
                uppers: vec![beta.scale(&pp(p, d + 1))],
                lset,
            };
            let residue = LamTerm::Sum {
                lhs: Box::new(LamTerm::Var),
                rhs: Box::new(LamTerm::RhoOf(beta.clone())),
                shift: s,
                sign: Sign::Plus,
            };
            let pins: BTreeMap<_, _> = [(beta.clone(), mus)].into();
            emit(pc, center, shape, |cell| {
                out.push(piece(cell, residue.clone(), OrdDescriptor::Center(PadicRational::one()), pins.clone()))
            });
        }
    }

    // d <= −m: t − O agrees with t − P in order and residue.
    {
        let lset: BTreeSet<LambdaElem> = pc
            .lset
            .intersection(&oc.lset)
            .copied()
            .filter(|l| !l.is_zero())
            .collect();
        let shape = Shape {
            base: base(vec![Formula::nonzero(beta.clone())]),
            lowers: [opt(&pc.lower), opt(&oc.lower)].concat(),
            uppers: [opt(&pc.upper), opt(&oc.upper), vec![beta.scale(&pp(p, 1 - m))]].concat(),
            lset,
        };
        emit(pc, center, shape, |cell| {
            out.push(piece(cell, LamTerm::Var, OrdDescriptor::Center(PadicRational::one()), BTreeMap::new()))
        });
    }
}

fn check_compatible(c1: &Cell, c2: &Cell) -> Result<(), Error> {
    if c1.sort != c2.sort {
        return Err(Error::Precondition(format!(
            "sort mismatch: {} vs {}",
            c1.sort, c2.sort
        )));
    }
    if c1.var != c2.var || c1.xvars != c2.xvars {
        return Err(Error::Precondition("cells over different variables".into()));
    }
    Ok(())
}

/// Partition of `C1 ∩ C2` into cells centered at `c1` or `c2`, each with the
/// other center described relative to its own.
pub fn zone_split(c1: &Cell, c2: &Cell) -> Result<Vec<Piece>, Error> {
    check_compatible(c1, c2)?;
    let p = c1.sort.p;
    let b = c1.center.sub(&c2.center);
    let mut out = Vec::new();

    // Equal centers (identically, or where b(x) = 0).
    if b.is_zero() || !b.is_constant() {
        let mut base = vec![c1.base.clone(), c2.base.clone()];
        if !b.is_zero() {
            base.push(Formula::is_zero(b.clone(), p));
        }
        let shape = Shape {
            base,
            lowers: [opt(&c1.lower), opt(&c2.lower)].concat(),
            uppers: [opt(&c1.upper), opt(&c2.upper)].concat(),
            lset: c1.lset.intersection(&c2.lset).copied().collect(),
        };
        emit(c1, &c1.center, shape, |cell| {
            out.push(Piece {
                cell,
                second: false,
                residue: LamTerm::Var,
                order: OrdDescriptor::Center(PadicRational::one()),
                pins: BTreeMap::new(),
            })
        });
        if b.is_zero() {
            return Ok(out);
        }
    }
    zones(c1, c2, &b, false, true, &mut out);
    zones(c2, c1, &b.neg(), true, false, &mut out);
    Ok(out)
}

/// `C1 ∩ C2` as a list of pairwise disjoint cells.
pub fn intersect(c1: &Cell, c2: &Cell) -> Result<Vec<Cell>, Error> {
    Ok(zone_split(c1, c2)?.into_iter().map(|pc| pc.cell).collect())
}
