//! Partition of `(x, t)`-space on which every given polynomial has its
//! residue and order expressed through a single center.

use std::collections::{BTreeMap, BTreeSet};

use super::intersect::zone_split;
use super::term::{LamTerm, OrdDescriptor};
use super::Cell;
use crate::error::Error;
use crate::formula::LinearPoly;
use crate::lambda::{LambdaElem, LambdaSort};
use crate::padic::PadicRational;

/// A cell of the partition with one descriptor pair per input polynomial.
#[derive(Clone, Debug)]
pub struct Carrier {
    pub cell: Cell,
    /// `rho(f_i)` in terms of `Var = rho(t − center)`.
    pub residues: Vec<LamTerm>,
    /// `ord f_i`.
    pub orders: Vec<OrdDescriptor>,
    /// Values the `RhoOf` polynomials in the residues can take on the cell.
    pub pins: BTreeMap<LinearPoly, BTreeSet<LambdaElem>>,
}

fn merge_pins(a: &Pins, b: &Pins) -> Pins {
    let mut out = a.clone();
    for (k, v) in b {
        match out.get_mut(k) {
            Some(old) => *old = old.intersection(v).copied().collect(),
            None => {
                out.insert(k.clone(), v.clone());
            }
        }
    }
    out
}

pub type Pins = BTreeMap<LinearPoly, BTreeSet<LambdaElem>>;

/// `(rho(t − c_j), ord(t − c_j))` in terms of the cell center, for the
/// centers brought in so far.
pub type Relations = Vec<Option<(LamTerm, OrdDescriptor)>>;

/// Brings center `c` (slot `j`) into a cell: splits it by the zones of `c`
/// and rewrites the known relations through the center of each piece.
pub fn introduce_center(
    cell: &Cell,
    rel: &Relations,
    pins: &Pins,
    j: usize,
    c: &LinearPoly,
) -> Result<Vec<(Cell, Relations, Pins)>, Error> {
    let unit = || (LamTerm::Var, OrdDescriptor::Center(PadicRational::one()));
    if cell.center == *c {
        let mut rel = rel.clone();
        rel[j] = Some(unit());
        return Ok(vec![(cell.clone(), rel, pins.clone())]);
    }
    let full = Cell::full(cell.xvars.clone(), &cell.var, c.clone(), cell.sort);
    let mut out = Vec::new();
    for piece in zone_split(cell, &full)? {
        let pins = merge_pins(pins, &piece.pins);
        let mut rel2: Relations = if piece.second {
            // new center c; the old relations go through rho(t − old center)
            rel.iter()
                .map(|e| {
                    e.as_ref().map(|(r, o)| {
                        let o = match o {
                            OrdDescriptor::Center(a) => piece.order.scaled(a),
                            base => base.clone(),
                        };
                        (r.compose(&piece.residue), o)
                    })
                })
                .collect()
        } else {
            rel.clone()
        };
        rel2[j] = Some(if piece.second { unit() } else { (piece.residue, piece.order) });
        out.push((piece.cell, rel2, pins));
    }
    Ok(out)
}

/// The distinct centers of the polynomials in `var`, in order of appearance.
pub fn centers_of(polys: &[LinearPoly], var: &str) -> Vec<LinearPoly> {
    let mut centers: Vec<LinearPoly> = Vec::new();
    for (_, c) in polys.iter().filter_map(|f| f.center_form(var)) {
        if !centers.contains(&c) {
            centers.push(c);
        }
    }
    centers
}

/// Splits `(x, t)`-space so that each polynomial's residue and order are
/// functions of `rho(t − c(x))`, `ord(t − c(x))` and data in `x`.
///
/// Each distinct center is brought in once; the carriers track
/// `rho(t − c_j)` and `ord(t − c_j)` for every center seen so far, and the
/// descriptors of the polynomials are scalings of those.
pub fn polycenters(
    polys: &[LinearPoly],
    xvars: &[String],
    var: &str,
    sort: LambdaSort,
) -> Result<Vec<Carrier>, Error> {
    let forms: Vec<_> = polys.iter().map(|f| f.center_form(var)).collect();
    let centers = centers_of(polys, var);
    let first = centers.first().cloned().unwrap_or_else(LinearPoly::zero);
    let mut work = vec![(Cell::full(xvars.to_vec(), var, first, sort), vec![None; centers.len()], BTreeMap::new())];
    for (j, c) in centers.iter().enumerate() {
        let mut next = Vec::new();
        for (cell, rel, pins) in work {
            next.extend(introduce_center(&cell, &rel, &pins, j, c)?);
        }
        work = next;
    }
    Ok(work
        .into_iter()
        .map(|(cell, rel, pins)| {
            let (residues, orders) = polys
                .iter()
                .zip(&forms)
                .map(|(f, form)| match form {
                    Some((beta, c)) => {
                        let j = centers.iter().position(|d| d == c).unwrap();
                        let (r, o) = rel[j].as_ref().expect("every center brought in");
                        (r.clone().scaled(beta), o.scaled(beta))
                    }
                    None => (LamTerm::RhoOf(f.clone()), OrdDescriptor::Base(f.clone())),
                })
                .unzip();
            Carrier {
                cell,
                residues,
                orders,
                pins,
            }
        })
        .collect())
}
