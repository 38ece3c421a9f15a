//! Quantifier-free formulas as disjoint unions of cells.
//!
//! The formula keeps its boolean structure. Its atoms in `t` are resolved on
//! each polycenters carrier: order comparisons become thresholds on
//! `ord(t − c)` (refined into cells), comparisons of two center orders only
//! depend on `t = c`, and `rho` conditions are evaluated for every
//! `λ = rho(t − c)` and every admissible value of the `rho(d(x))` data. What
//! is left is an x-formula per Λ-class, which goes into the cell base.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::cells::{centers_of, intersect, introduce_center, rewrite_all, Cell, CellRecord, LamTerm, OrdDescriptor, Pins, Relations};
use crate::error::Error;
use crate::formula::{Assignment, CmpOp, Formula, LinearPoly};
use crate::lambda::{LambdaElem, LambdaSort};
use crate::padic::{PadicRational, Prime};

/// A finite union of cells over common variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellUnion {
    pub xvars: Vec<String>,
    pub var: String,
    pub cells: Vec<Cell>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellUnionRecord {
    pub vars: Vec<String>,
    pub var: String,
    pub cells: Vec<CellRecord>,
}

impl CellUnion {
    pub fn member(&self, sigma: &Assignment) -> Result<bool, Error> {
        for c in &self.cells {
            if c.member(sigma)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    pub fn to_record(&self) -> CellUnionRecord {
        let mut vars = self.xvars.clone();
        vars.push(self.var.clone());
        CellUnionRecord {
            vars,
            var: self.var.clone(),
            cells: self.cells.iter().map(Cell::to_record).collect(),
        }
    }

    pub fn from_record(rec: &CellUnionRecord, p: Prime) -> Result<CellUnion, Error> {
        Ok(CellUnion {
            xvars: rec.vars.iter().filter(|v| **v != rec.var).cloned().collect(),
            var: rec.var.clone(),
            cells: rec.cells.iter().map(|c| Cell::from_record(c, p)).collect::<Result<_, _>>()?,
        })
    }
}

/// The common refinement of the sorts of the `rho` atoms mentioning `var`.
pub(crate) fn joint_sort(atoms: &[Formula], p: Prime) -> Result<LambdaSort, Error> {
    let mut sort = LambdaSort::new(p, 1, 1)?;
    for a in atoms {
        if let Formula::Rho(s, ..) = a {
            sort = sort.join(s)?;
        }
    }
    Ok(sort)
}

/// How an atom in `t` reads on one carrier.
#[derive(Clone, Debug, PartialEq)]
enum Reading {
    Fixed(Formula),
    /// `ord(t − c) < ord u`.
    Upper(LinearPoly),
    /// `ord w < ord(t − c)`.
    Lower(LinearPoly),
    /// `t ≠ c` and a constant.
    OffCenter(bool),
    /// `project(term) ∈ set`.
    Rho(LamTerm, LambdaSort, BTreeSet<LambdaElem>),
}

/// What the readings are computed from: the polynomials in `t`, their
/// centers, and the relations brought in so far.
struct Frame<'a> {
    polys: &'a [LinearPoly],
    forms: &'a [Option<(PadicRational, LinearPoly)>],
    centers: &'a [LinearPoly],
    rel: Relations,
    pins: Pins,
}

impl Frame<'_> {
    fn slot(&self, f: &LinearPoly) -> Option<(usize, &PadicRational)> {
        let i = self.polys.iter().position(|g| g == f)?;
        let (beta, c) = self.forms[i].as_ref()?;
        Some((self.centers.iter().position(|d| d == c).expect("center listed"), beta))
    }

    /// `None` while the center of `f` has not been brought in.
    fn descriptor(&self, f: &LinearPoly) -> Option<OrdDescriptor> {
        match self.slot(f) {
            None => Some(OrdDescriptor::Base(f.clone())),
            Some((j, beta)) => self.rel[j].as_ref().map(|(_, o)| o.scaled(beta)),
        }
    }

    fn residue(&self, f: &LinearPoly) -> Option<LamTerm> {
        match self.slot(f) {
            None => Some(LamTerm::RhoOf(f.clone())),
            Some((j, beta)) => self.rel[j].as_ref().map(|(r, _)| r.clone().scaled(beta)),
        }
    }

    /// A center the atom needs that is not in yet.
    fn missing(&self, atom: &Formula) -> Option<usize> {
        let polys: Vec<&LinearPoly> = match atom {
            Formula::Ord(f, _, g) => vec![f, g],
            Formula::Rho(_, f, _) => vec![f],
            _ => vec![],
        };
        polys.into_iter().filter_map(|f| self.slot(f)).map(|(j, _)| j).find(|&j| self.rel[j].is_none())
    }
}

/// `Some(h)` when the term does not depend on `λ` and is `rho(h)`.
fn base_rho(term: &LamTerm) -> Option<LinearPoly> {
    match term {
        LamTerm::RhoOf(h) => Some(h.clone()),
        LamTerm::Scale(t, c) => base_rho(t).map(|h| h.scale(c)),
        _ => None,
    }
}

fn read_atom(atom: &Formula, frame: &Frame, p: Prime) -> Option<Reading> {
    Some(match atom {
        Formula::Ord(f, CmpOp::Lt, g) => {
            match (frame.descriptor(f)?, frame.descriptor(g)?) {
                (OrdDescriptor::Base(a), OrdDescriptor::Base(b)) => {
                    Reading::Fixed(Formula::lt(a, b).simplify(p))
                }
                (OrdDescriptor::Center(a), OrdDescriptor::Base(h)) => {
                    if h.is_zero() {
                        Reading::OffCenter(true)
                    } else {
                        Reading::Upper(h.scale(&a.recip().expect("nonzero coefficient")))
                    }
                }
                (OrdDescriptor::Base(h), OrdDescriptor::Center(a)) => {
                    if h.is_zero() {
                        Reading::Fixed(Formula::False)
                    } else {
                        Reading::Lower(h.scale(&a.recip().expect("nonzero coefficient")))
                    }
                }
                (OrdDescriptor::Center(a), OrdDescriptor::Center(b)) => {
                    Reading::OffCenter(a.ord(p) < b.ord(p))
                }
            }
        }
        Formula::Rho(sort, f, set) => {
            let term = frame.residue(f)?;
            match base_rho(&term) {
                Some(h) => Reading::Fixed(Formula::Rho(*sort, h, set.clone()).simplify(p)),
                None => Reading::Rho(term, *sort, set.clone()),
            }
        }
        other => unreachable!("atom {other:?} after rewriting"),
    })
}

fn guard_cell(template: &Cell, base: Formula, lower: Option<LinearPoly>, upper: Option<LinearPoly>, lset: Option<BTreeSet<LambdaElem>>) -> Cell {
    Cell {
        base,
        lower,
        upper,
        lset: lset.unwrap_or_else(|| template.sort.elements().into_iter().collect()),
        ..Cell::full(template.xvars.clone(), &template.var, template.center.clone(), template.sort)
    }
}

/// Splits `cell` into the part where the threshold holds and the part where
/// it fails.
fn split_threshold(cell: &Cell, reading: &Reading) -> Result<(Vec<Cell>, Vec<Cell>), Error> {
    let p = cell.sort.p;
    let pp = |k: i64| PadicRational::p_pow(p.get(), k);
    let (yes, no): (Vec<Cell>, Vec<Cell>) = match reading {
        Reading::Upper(u) => (
            vec![guard_cell(cell, Formula::True, None, Some(u.clone()), None)],
            vec![
                guard_cell(cell, Formula::nonzero(u.clone()), Some(u.scale(&pp(-1))), None, None),
                guard_cell(cell, Formula::is_zero(u.clone(), p).simplify(p), None, None, Some([LambdaElem::Zero].into())),
            ],
        ),
        Reading::Lower(w) => (
            vec![guard_cell(cell, Formula::True, Some(w.clone()), None, None)],
            vec![
                guard_cell(cell, Formula::nonzero(w.clone()), None, Some(w.scale(&pp(1))), None),
                guard_cell(cell, Formula::is_zero(w.clone(), p).simplify(p), None, None, None),
            ],
        ),
        _ => unreachable!("not a threshold"),
    };
    let mut a = Vec::new();
    for g in &yes {
        if g.base != Formula::False {
            a.extend(intersect(cell, g)?);
        }
    }
    let mut b = Vec::new();
    for g in &no {
        if g.base != Formula::False {
            b.extend(intersect(cell, g)?);
        }
    }
    Ok((a, b))
}

fn atoms_in(phi: &Formula, var: &str) -> Vec<Formula> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    phi.visit(&mut |g| {
        if g.is_atom() && g.has_free(var) && seen.insert(g.clone()) {
            out.push(g.clone());
        }
    });
    out
}

/// Readings of the atoms in `t` on one frame, computed on demand since
/// simplification can merge `rho` atoms into new ones.
struct Reader<'a> {
    frame: Frame<'a>,
    var: &'a str,
    p: Prime,
    cache: HashMap<Formula, Option<Reading>>,
}

impl<'a> Reader<'a> {
    fn new(frame: Frame<'a>, var: &'a str, p: Prime) -> Self {
        Reader { frame, var, p, cache: HashMap::new() }
    }

    /// `None` for atoms free of `t` and atoms whose centers are not in yet.
    fn read(&mut self, atom: &Formula) -> Option<Reading> {
        if !atom.has_free(self.var) {
            return None;
        }
        if let Some(r) = self.cache.get(atom) {
            return r.clone();
        }
        let r = read_atom(atom, &self.frame, self.p);
        self.cache.insert(atom.clone(), r.clone());
        r
    }

    fn first_missing(&self, psi: &Formula) -> Option<usize> {
        match psi {
            Formula::And(v) | Formula::Or(v) => v.iter().find_map(|g| self.first_missing(g)),
            Formula::Not(g) => self.first_missing(g),
            atom if atom.has_free(self.var) => self.frame.missing(atom),
            _ => None,
        }
    }

    /// Replaces the atoms whose reading passes `pick` and simplifies.
    fn substitute(&mut self, psi: &Formula, pick: &mut impl FnMut(&Reading) -> Option<Formula>) -> Formula {
        fold(psi, &mut |a| self.read(a).and_then(|r| pick(&r)))
    }

    fn first_threshold(&mut self, psi: &Formula) -> Option<Reading> {
        match psi {
            Formula::And(v) | Formula::Or(v) => v.iter().find_map(|g| self.first_threshold(g)),
            Formula::Not(g) => self.first_threshold(g),
            atom => self.read(atom).filter(|r| matches!(r, Reading::Upper(_) | Reading::Lower(_))),
        }
    }
}

fn fixed(r: &Reading) -> Option<Formula> {
    match r {
        Reading::Fixed(f) => Some(f.clone()),
        _ => None,
    }
}

/// Decomposes a quantifier-free formula into pairwise disjoint cells in
/// `(xvars, var)` whose union is the set it defines.
pub fn to_cells(phi: &Formula, var: &str, xvars: &[String], p: Prime) -> Result<CellUnion, Error> {
    if !phi.is_quantifier_free() {
        return Err(Error::Precondition("to_cells needs a quantifier-free formula".into()));
    }
    let phi = rewrite_all(phi, p);
    let atoms = atoms_in(&phi, var);
    let sort = joint_sort(&atoms, p)?;
    let mut cells = Vec::new();
    if atoms.is_empty() {
        let cell = Cell {
            base: phi.clone(),
            ..Cell::full(xvars.to_vec(), var, LinearPoly::zero(), sort)
        };
        if cell.base != Formula::False {
            cells.push(cell);
        }
        return Ok(CellUnion { xvars: xvars.to_vec(), var: var.to_string(), cells });
    }
    let mut polys: Vec<LinearPoly> = Vec::new();
    for a in &atoms {
        let ps: Vec<&LinearPoly> = match a {
            Formula::Ord(f, _, g) => vec![f, g],
            Formula::Rho(_, f, _) => vec![f],
            _ => vec![],
        };
        for f in ps {
            if f.contains(var) && !polys.contains(f) {
                polys.push(f.clone());
            }
        }
    }
    let forms: Vec<_> = polys.iter().map(|f| f.center_form(var)).collect();
    let centers = centers_of(&polys, var);
    let first = centers.first().cloned().unwrap_or_else(LinearPoly::zero);
    let cell = Cell::full(xvars.to_vec(), var, first, sort);
    let frame = Frame { polys: &polys, forms: &forms, centers: &centers, rel: vec![None; centers.len()], pins: Pins::new() };
    refine(&mut Reader::new(frame, var, p), cell, phi, Vec::new(), &mut cells)?;
    Ok(CellUnion {
        xvars: xvars.to_vec(),
        var: var.to_string(),
        cells: merge(cells, p),
    })
}

/// `(u, positive)` when the reading is `ord(t − c) < ord u` (`positive`) or
/// its negation. `ord w < ord(t − c)` is `¬(ord(t − c) < ord p·w)`.
fn as_upper(r: &Reading, p: Prime) -> Option<(LinearPoly, bool)> {
    match r {
        Reading::Upper(u) => Some((u.clone(), true)),
        Reading::Lower(w) => Some((w.scale(&PadicRational::p_pow(p.get(), 1)), false)),
        _ => None,
    }
}

/// Truth of `ord(t − c) < ord u` forced by the known facts about scalar
/// multiples of `u`.
fn implied(u: &LinearPoly, known: &[(LinearPoly, bool)], p: Prime) -> Option<bool> {
    for (v, val) in known {
        let Some(k) = v.ratio_to(u) else { continue };
        let crate::padic::Valuation::Finite(d) = k.ord(p) else { continue };
        if *val && d >= 0 {
            return Some(true);
        }
        if !*val && d <= 0 {
            return Some(false);
        }
    }
    None
}

fn decide(r: &Reading, known: &[(LinearPoly, bool)], p: Prime) -> Option<Formula> {
    let (u, positive) = as_upper(r, p)?;
    implied(&u, known, p).map(|v| bool_formula(v == positive))
}

/// Splits on the thresholds `psi` still depends on, one at a time.
fn refine(reader: &mut Reader, cell: Cell, psi: Formula, known: Vec<(LinearPoly, bool)>, out: &mut Vec<Cell>) -> Result<(), Error> {
    let p = reader.p;
    let mut known = known;
    if let Some(a2) = &cell.upper {
        known.push((a2.clone(), true));
    }
    if let Some(a1) = &cell.lower {
        known.push((a1.scale(&PadicRational::p_pow(p.get(), 1)), false));
    }
    // merged rho atoms can read as fixed x-formulas
    let psi = reader.substitute(&psi, &mut |r| fixed(r).or_else(|| decide(r, &known, p)));
    if psi == Formula::False {
        return Ok(());
    }
    // bring in the next center only where the formula still needs it
    if let Some(j) = reader.first_missing(&psi) {
        let c = &reader.frame.centers[j];
        let mut cell = cell;
        if reader.frame.rel.iter().all(Option::is_none) {
            // nothing is tracked yet, so the cell is still all of space
            cell.center = c.clone();
        }
        for (piece, rel, pins) in introduce_center(&cell, &reader.frame.rel, &reader.frame.pins, j, c)? {
            let kept = if piece.center == cell.center { known.clone() } else { Vec::new() };
            let frame = Frame { rel, pins, ..reader.frame };
            refine(&mut Reader::new(frame, reader.var, p), piece, psi.clone(), kept, out)?;
        }
        return Ok(());
    }
    let Some(th) = reader.first_threshold(&psi) else {
        emit_leaf(reader, &psi, cell, out);
        return Ok(());
    };
    let (yes, no) = split_threshold(&cell, &th)?;
    let (u, positive) = as_upper(&th, p).expect("threshold");
    for (parts, v) in [(yes, true), (no, false)] {
        let mut k2 = known.clone();
        k2.push((u.clone(), v == positive));
        let next = reader.substitute(&psi, &mut |r| decide(r, &k2, p));
        if next == Formula::False {
            continue;
        }
        for c in parts {
            refine(reader, c, next.clone(), k2.clone(), out)?;
        }
    }
    Ok(())
}

/// Joins cells that differ only in the base, then cells that differ only in
/// the Λ-set. Both keep the union disjoint.
fn merge(cells: Vec<Cell>, p: Prime) -> Vec<Cell> {
    type Shape = (LinearPoly, Option<LinearPoly>, Option<LinearPoly>, LambdaSort);
    let mut by_lset: BTreeMap<(Shape, BTreeSet<LambdaElem>), Vec<Formula>> = BTreeMap::new();
    let mut order = Vec::new();
    for c in cells {
        let key = ((c.center.clone(), c.lower.clone(), c.upper.clone(), c.sort), c.lset.clone());
        if !by_lset.contains_key(&key) {
            order.push((key.clone(), c.clone()));
        }
        by_lset.entry(key).or_default().push(c.base);
    }
    let mut by_base: BTreeMap<(Shape, Formula), BTreeSet<LambdaElem>> = BTreeMap::new();
    let mut order2 = Vec::new();
    for (key, template) in order {
        let base = Formula::or(by_lset.remove(&key).unwrap()).simplify(p);
        let key2 = (key.0, base.clone());
        if !by_base.contains_key(&key2) {
            order2.push((key2.clone(), Cell { base, ..template }));
        }
        by_base.entry(key2).or_default().extend(key.1);
    }
    order2
        .into_iter()
        .map(|(key, template)| Cell {
            lset: by_base.remove(&key).unwrap(),
            ..template
        })
        .collect()
}

fn env_guard(sort: LambdaSort, keys: &[LinearPoly], domains: &[Vec<LambdaElem>], envs: &[Vec<LambdaElem>], chosen: &BTreeSet<usize>) -> Formula {
    if chosen.len() == envs.len() {
        return Formula::True;
    }
    let tuples: BTreeSet<&[LambdaElem]> = chosen.iter().map(|&i| envs[i].as_slice()).collect();
    tuple_guard(sort, keys, domains, &tuples)
}

/// A union of products covering exactly `tuples`: values of the first key
/// with the same set of continuations are grouped.
fn tuple_guard(sort: LambdaSort, keys: &[LinearPoly], domains: &[Vec<LambdaElem>], tuples: &BTreeSet<&[LambdaElem]>) -> Formula {
    let Some((key, rest)) = keys.split_first() else {
        return bool_formula(!tuples.is_empty());
    };
    if tuples.len() == domains.iter().map(Vec::len).product::<usize>() {
        return Formula::True;
    }
    let mut tails: BTreeMap<LambdaElem, BTreeSet<&[LambdaElem]>> = BTreeMap::new();
    for t in tuples {
        tails.entry(t[0]).or_default().insert(&t[1..]);
    }
    let mut groups: BTreeMap<BTreeSet<&[LambdaElem]>, BTreeSet<LambdaElem>> = BTreeMap::new();
    for (v, tail) in tails {
        groups.entry(tail).or_default().insert(v);
    }
    Formula::or(groups.into_iter().map(|(tail, vals)| {
        let head = if vals.len() == domains[0].len() {
            Formula::True
        } else {
            Formula::Rho(sort, key.clone(), vals)
        };
        Formula::and([head, tuple_guard(sort, rest, &domains[1..], &tail)])
    }))
}

/// Resolves the remaining `λ`-dependent atoms for every class in the cell
/// and groups the classes by the x-formula left over.
fn emit_leaf(reader: &mut Reader, psi: &Formula, cell: Cell, out: &mut Vec<Cell>) {
    let sort = cell.sort;
    let p = sort.p;
    let mut atoms = Vec::new();
    collect_atoms(psi, &mut HashSet::new(), &mut atoms);
    let readings: Vec<(&Formula, Reading)> = atoms
        .into_iter()
        .filter_map(|a| reader.read(a).map(|r| (a, r)))
        .collect();
    let index: HashMap<&Formula, usize> = readings.iter().enumerate().map(|(i, (a, _))| (*a, i)).collect();
    let mut keyset = BTreeSet::new();
    for (_, r) in &readings {
        if let Reading::Rho(term, ..) = r {
            term.rho_polys(&mut keyset);
        }
    }
    let keys: Vec<LinearPoly> = keyset.into_iter().collect();
    let mut envs: Vec<Vec<LambdaElem>> = vec![Vec::new()];
    let mut domains = Vec::new();
    for h in &keys {
        let vals: Vec<LambdaElem> = match reader.frame.pins.get(h) {
            Some(s) => s.iter().copied().collect(),
            None => sort.elements(),
        };
        domains.push(vals.clone());
        envs = envs
            .into_iter()
            .flat_map(|e| {
                vals.iter().map(move |v| {
                    let mut e = e.clone();
                    e.push(*v);
                    e
                })
            })
            .collect();
    }
    let mut residual_of: BTreeMap<Vec<bool>, Formula> = BTreeMap::new();
    // residual -> λ -> admissible environments
    let mut groups: BTreeMap<Formula, BTreeMap<LambdaElem, BTreeSet<usize>>> = BTreeMap::new();
    for &lam in &cell.lset {
        for (ei, env) in envs.iter().enumerate() {
            let envmap: BTreeMap<LinearPoly, LambdaElem> = keys.iter().cloned().zip(env.iter().copied()).collect();
            let bits: Vec<bool> = readings
                .iter()
                .map(|(_, r)| match r {
                    Reading::OffCenter(b) => *b && !lam.is_zero(),
                    Reading::Rho(term, s, set) => {
                        let v = term.eval(lam, &envmap, &sort);
                        set.contains(&sort.project(v, s).expect("joint sort refines"))
                    }
                    other => unreachable!("unresolved reading {other:?}"),
                })
                .collect();
            let residual = residual_of
                .entry(bits.clone())
                .or_insert_with(|| {
                    fold(psi, &mut |a| index.get(a).map(|&i| bool_formula(bits[i]))).simplify(p)
                })
                .clone();
            if residual != Formula::False {
                groups.entry(residual).or_default().entry(lam).or_default().insert(ei);
            }
        }
    }
    for (residual, by_lam) in groups {
        let mut by_envs: BTreeMap<BTreeSet<usize>, BTreeSet<LambdaElem>> = BTreeMap::new();
        for (lam, es) in by_lam {
            by_envs.entry(es).or_default().insert(lam);
        }
        for (es, lset) in by_envs {
            let base = Formula::and([cell.base.clone(), residual.clone(), env_guard(sort, &keys, &domains, &envs, &es)]).simplify(p);
            if base == Formula::False {
                continue;
            }
            let c = Cell { base, lset, ..cell.clone() };
            if !c.is_trivially_empty() {
                out.push(c);
            }
        }
    }
}

fn collect_atoms<'a>(f: &'a Formula, seen: &mut HashSet<&'a Formula>, out: &mut Vec<&'a Formula>) {
    match f {
        Formula::And(v) | Formula::Or(v) => v.iter().for_each(|g| collect_atoms(g, seen, out)),
        Formula::Not(g) => collect_atoms(g, seen, out),
        atom => {
            if seen.insert(atom) {
                out.push(atom);
            }
        }
    }
}

/// Replaces atoms and folds the constants through the connectives.
fn fold(f: &Formula, sub: &mut impl FnMut(&Formula) -> Option<Formula>) -> Formula {
    match f {
        Formula::And(v) | Formula::Or(v) => {
            let is_and = matches!(f, Formula::And(_));
            let (unit, zero) = (bool_formula(is_and), bool_formula(!is_and));
            let mut out = Vec::with_capacity(v.len());
            for g in v {
                let h = fold(g, sub);
                if h == zero {
                    return zero;
                }
                match h {
                    h if h == unit => {}
                    Formula::And(w) if is_and => out.extend(w),
                    Formula::Or(w) if !is_and => out.extend(w),
                    h => out.push(h),
                }
            }
            match out.len() {
                0 => unit,
                1 => out.pop().unwrap(),
                _ if is_and => Formula::And(out),
                _ => Formula::Or(out),
            }
        }
        Formula::Not(g) => match fold(g, sub) {
            Formula::True => Formula::False,
            Formula::False => Formula::True,
            h => Formula::Not(Box::new(h)),
        },
        atom => sub(atom).unwrap_or_else(|| atom.clone()),
    }
}

fn bool_formula(b: bool) -> Formula {
    if b {
        Formula::True
    } else {
        Formula::False
    }
}

