//! Definable sections of cells and piecewise linear maps.
//!
//! For a cell `C` over `x` the section picks one `t` in every nonempty fibre.
//! After moving the center to `0`:
//! - `λ = 0` (no upper bound): `t = c(x)`;
//! - no bounds: `t = c(x) + λ̂`;
//! - an upper bound `a2` with `μ = ρ(a2(x)) ≠ 0`: `t − c = (λ̂/μ̂)·a2` if
//!   `ord λ̂ < ord μ̂`, otherwise `(λ̂/(p^n μ̂))·a2`. This is the largest order
//!   in the class of `λ` below `ord a2`, so it also clears a lower bound
//!   whenever the fibre is nonempty;
//! - `μ = 0`, or a lower bound `a1` alone, with `ν = ρ(a1(x))`:
//!   `t − c = (p^n λ̂/ν̂)·a1` if `ord λ̂ ≤ ord ν̂`, otherwise `(λ̂/ν̂)·a1`.
//!
//! Here `λ̂` is the canonical representative `p^r·a`, so
//! `ρ((λ̂/μ̂)·a2) = λ` by multiplicativity of `ρ`.

use serde::{Deserialize, Serialize};

use crate::cells::Cell;
use crate::error::Error;
use crate::formula::{parse, parse_poly, poly_to_string, Assignment, Formula, LinearPoly, ScalarField};
use crate::lambda::LambdaElem;
use crate::padic::{PadicRational, Prime};
use crate::qe::{cell_exists, class_exists};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MapPiece {
    pub guard: Formula,
    pub components: Vec<LinearPoly>,
}

/// `x ↦ (f_1(x), …, f_l(x))` on the region where `guard` holds, one piece
/// at a time.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PiecewiseLinearMap {
    pub vars: Vec<String>,
    pub pieces: Vec<MapPiece>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapPieceRecord {
    pub guard: String,
    pub components: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PiecewiseLinearMapRecord {
    pub vars: Vec<String>,
    pub pieces: Vec<MapPieceRecord>,
}

impl PiecewiseLinearMap {
    /// Indices of the pieces whose guard holds at `x`.
    pub fn firing(&self, x: &Assignment, p: Prime) -> Result<Vec<usize>, Error> {
        let mut out = Vec::new();
        for (i, piece) in self.pieces.iter().enumerate() {
            if piece.guard.eval(x, p)? {
                out.push(i);
            }
        }
        Ok(out)
    }

    /// The value at `x`, or `None` outside the domain.
    pub fn apply(&self, x: &Assignment, p: Prime) -> Result<Option<Vec<PadicRational>>, Error> {
        let fired = self.firing(x, p)?;
        match fired.as_slice() {
            [] => Ok(None),
            [i] => Ok(Some(
                self.pieces[*i]
                    .components
                    .iter()
                    .map(|f| f.eval(x))
                    .collect::<Result<_, _>>()?,
            )),
            _ => Err(Error::Precondition(format!("guards {fired:?} overlap"))),
        }
    }

    pub fn to_record(&self, p: Prime) -> PiecewiseLinearMapRecord {
        PiecewiseLinearMapRecord {
            vars: self.vars.clone(),
            pieces: self
                .pieces
                .iter()
                .map(|pc| MapPieceRecord {
                    guard: pc.guard.to_text(p),
                    components: pc.components.iter().map(|f| poly_to_string(f, p)).collect(),
                })
                .collect(),
        }
    }

    pub fn from_record(rec: &PiecewiseLinearMapRecord, p: Prime) -> Result<Self, Error> {
        let pieces = rec
            .pieces
            .iter()
            .map(|pc| {
                Ok(MapPiece {
                    guard: parse(&pc.guard, p)?,
                    components: pc
                        .components
                        .iter()
                        .map(|s| parse_poly(s, p))
                        .collect::<Result<_, Error>>()?,
                })
            })
            .collect::<Result<_, Error>>()?;
        Ok(PiecewiseLinearMap {
            vars: rec.vars.clone(),
            pieces,
        })
    }
}

fn check_scalar(c: &PadicRational, field: ScalarField) -> Result<(), Error> {
    if field.contains(c) {
        Ok(())
    } else {
        Err(Error::NoSection(format!("{} (needs {c})", field.name())))
    }
}

/// `t − c` for the lower-bound form, given `ν = ρ(a1) ≠ 0`.
fn above(cell: &Cell, lam: LambdaElem, nu: LambdaElem, a1: &LinearPoly, field: ScalarField) -> Result<LinearPoly, Error> {
    let sort = cell.sort;
    let mut k = sort.repr_rational(lam).checked_div(&sort.repr_rational(nu))?;
    if lam.r() <= nu.r() {
        k = &k * &PadicRational::p_pow(sort.p.get(), sort.n as i64);
    }
    check_scalar(&k, field)?;
    Ok(a1.scale(&k))
}

/// `t − c` for the upper-bound form, given `μ = ρ(a2) ≠ 0`.
fn below(cell: &Cell, lam: LambdaElem, mu: LambdaElem, a2: &LinearPoly, field: ScalarField) -> Result<LinearPoly, Error> {
    let sort = cell.sort;
    let mut k = sort.repr_rational(lam).checked_div(&sort.repr_rational(mu))?;
    if lam.r() >= mu.r() {
        k = &k * &PadicRational::p_pow(sort.p.get(), -(sort.n as i64));
    }
    check_scalar(&k, field)?;
    Ok(a2.scale(&k))
}

/// The pieces for a fixed nonzero `λ`, each a guard on `x` and `t − c`.
fn pieces_for(cell: &Cell, lam: LambdaElem, field: ScalarField) -> Result<Vec<(Formula, LinearPoly)>, Error> {
    let sort = cell.sort;
    let p = sort.p;
    let hat = LinearPoly::constant(sort.repr_rational(lam));
    let rho_is = |f: &LinearPoly, l: LambdaElem| Formula::Rho(sort, f.clone(), [l].into());
    let lower_only = |a1: &LinearPoly| -> Result<Vec<(Formula, LinearPoly)>, Error> {
        sort.nonzero_elements()
            .map(|nu| Ok((rho_is(a1, nu), above(cell, lam, nu, a1, field)?)))
            .collect()
    };
    let mut out = Vec::new();
    match (&cell.lower, &cell.upper) {
        (None, None) => out.push((Formula::True, hat)),
        (Some(a1), None) => out.extend(lower_only(a1)?),
        (lower, Some(a2)) => {
            for mu in sort.nonzero_elements() {
                out.push((rho_is(a2, mu), below(cell, lam, mu, a2, field)?));
            }
            // a2 = 0 is no upper bound
            let zero = Formula::is_zero(a2.clone(), p);
            match lower {
                None => out.push((zero, hat)),
                Some(a1) => {
                    for (g, f) in lower_only(a1)? {
                        out.push((Formula::and([zero.clone(), g]), f));
                    }
                }
            }
        }
    }
    Ok(out)
}

/// A section `x ↦ (x, t(x))` of the projection of `cell`, defined exactly on
/// the projection.
pub fn synthesize_section(cell: &Cell, field: ScalarField) -> Result<PiecewiseLinearMap, Error> {
    let p = cell.sort.p;
    let xs: Vec<LinearPoly> = cell.xvars.iter().map(|v| LinearPoly::var(v)).collect();
    let with_t = |t: LinearPoly| {
        let mut v = xs.clone();
        v.push(t);
        v
    };
    // options in priority order; each piece excludes the earlier options
    let mut options: Vec<(Formula, Vec<(Formula, LinearPoly)>)> = Vec::new();
    if cell.lset.contains(&LambdaElem::Zero) && cell.upper.is_none() {
        let cond = match &cell.lower {
            Some(a1) => Formula::nonzero(a1.clone()),
            None => Formula::True,
        };
        options.push((cond, vec![(Formula::True, LinearPoly::zero())]));
    }
    let mut seen = std::collections::BTreeSet::new();
    for lam in cell.lset.iter().copied() {
        let Some(r) = lam.r() else { continue };
        if !seen.insert(r) {
            continue;
        }
        options.push((class_exists(cell, r), pieces_for(cell, lam, field)?));
    }
    let mut pieces = Vec::new();
    let mut earlier = Vec::new();
    for (cond, parts) in options {
        let region = Formula::and([
            cell.base.clone(),
            cond.clone(),
            Formula::not(Formula::or(earlier.clone())),
        ])
        .simplify(p);
        earlier.push(cond);
        if region == Formula::False {
            continue;
        }
        for (g, off) in parts {
            let guard = Formula::and([region.clone(), g]).simplify(p);
            if guard == Formula::False {
                continue;
            }
            pieces.push(MapPiece {
                guard,
                components: with_t(cell.center.add(&off)),
            });
        }
    }
    Ok(PiecewiseLinearMap {
        vars: cell.xvars.clone(),
        pieces,
    })
}

/// Outcome of checking a section on a set of base points.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SectionReport {
    pub points: usize,
    pub in_projection: usize,
    pub violations: Vec<String>,
}

impl SectionReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks at every point that a guard fires exactly on the projection of
/// `cell`, that one guard fires there, that the map fixes `x`, and that the
/// image lies in `cell`.
pub fn verify_section(g: &PiecewiseLinearMap, cell: &Cell, points: &[Assignment]) -> Result<SectionReport, Error> {
    let p = cell.sort.p;
    let domain = cell_exists(cell);
    let mut rep = SectionReport {
        points: points.len(),
        ..SectionReport::default()
    };
    for x in points {
        let inside = domain.eval(x, p)?;
        let fired = g.firing(x, p)?;
        if !inside {
            if !fired.is_empty() {
                rep.violations.push(format!("{x:?}: outside the projection but pieces {fired:?} fire"));
            }
            continue;
        }
        rep.in_projection += 1;
        let [i] = fired.as_slice() else {
            rep.violations.push(format!("{x:?}: pieces {fired:?} fire"));
            continue;
        };
        let vals: Vec<PadicRational> = g.pieces[*i]
            .components
            .iter()
            .map(|f| f.eval(x))
            .collect::<Result<_, _>>()?;
        let k = cell.xvars.len();
        if vals.len() != k + 1 || cell.xvars.iter().zip(&vals).any(|(v, a)| x.get(v) != Some(a)) {
            rep.violations.push(format!("{x:?}: projection of the image is not x"));
            continue;
        }
        let mut pt = x.clone();
        pt.insert(cell.var.clone(), vals[k].clone());
        if !cell.member(&pt)? {
            rep.violations.push(format!("{x:?}: t = {} is not in the cell", vals[k]));
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::lambda::LambdaSort;

    fn cell(p: u64, n: u32, m: u32, lower: Option<&str>, upper: Option<&str>, lset: &[i128]) -> Cell {
        let p = Prime::new(p).unwrap();
        let sort = LambdaSort::new(p, n, m).unwrap();
        Cell {
            xvars: vec![],
            var: "t".into(),
            base: Formula::True,
            center: LinearPoly::zero(),
            lower: lower.map(|s| parse_poly(s, p).unwrap()),
            upper: upper.map(|s| parse_poly(s, p).unwrap()),
            sort,
            lset: lset.iter().map(|k| sort.from_repr(*k).unwrap()).collect(),
        }
    }

    fn value(c: &Cell) -> PadicRational {
        let g = synthesize_section(c, ScalarField::Rationals).unwrap();
        g.apply(&Assignment::new(), c.sort.p).unwrap().unwrap()[0].clone()
    }

    #[test]
    fn two_bounds_example() {
        let c = cell(3, 1, 1, Some("1"), Some("p^5"), &[1]);
        assert_eq!(value(&c), PadicRational::from_int(81));
    }

    #[test]
    fn zero_and_unbounded() {
        let c = cell(3, 1, 1, None, None, &[0]);
        assert_eq!(value(&c), PadicRational::zero());
        let c = cell(3, 1, 1, None, None, &[2]);
        assert_eq!(value(&c), PadicRational::from_int(2));
    }

    #[test]
    fn corrupted_scalar_is_caught() {
        let c = cell(3, 1, 1, Some("1"), Some("p^5"), &[1]);
        let mut g = synthesize_section(&c, ScalarField::Rationals).unwrap();
        for pc in &mut g.pieces {
            let t = pc.components[0].scale(&PadicRational::from_int(2));
            pc.components[0] = t;
        }
        let rep = verify_section(&g, &c, &[Assignment::new()]).unwrap();
        assert!(!rep.ok());
    }

    #[test]
    fn integer_scalars_can_fail() {
        let c = cell(3, 1, 1, None, Some("p^5"), &[1]);
        let err = synthesize_section(&c, ScalarField::Integers).unwrap_err();
        assert!(matches!(err, Error::NoSection(_)));
    }

    #[test]
    fn record_round_trip() {
        let p = Prime::new(3).unwrap();
        let sort = LambdaSort::new(p, 2, 1).unwrap();
        let c = Cell {
            xvars: vec!["x".into()],
            var: "t".into(),
            base: Formula::True,
            center: parse_poly("x + 1", p).unwrap(),
            lower: Some(parse_poly("x", p).unwrap()),
            upper: None,
            sort,
            lset: sort.elements().into_iter().collect(),
        };
        let g = synthesize_section(&c, ScalarField::Rationals).unwrap();
        let back = PiecewiseLinearMap::from_record(&g.to_record(p), p).unwrap();
        assert_eq!(back, g);
        let pts = Grid::new(p, 4, 1).points(&c.xvars);
        assert!(verify_section(&g, &c, &pts).unwrap().ok());
    }
}
