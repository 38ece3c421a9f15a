//! Quantifier elimination: normal forms, cell unions, projection, the
//! witness oracle and dimension.

mod oracle;
mod project;
mod to_cells;

use std::collections::BTreeSet;

pub use oracle::Oracle;
pub use project::{cell_exists, class_exists, eliminate_exists};
pub use to_cells::{to_cells, CellUnion, CellUnionRecord};

use crate::cells::rewrite_all;
use crate::error::Error;
use crate::formula::{Assignment, Formula};
use crate::lambda::{LambdaElem, LambdaSort};
use crate::padic::Prime;

/// Re-expresses a `rho` atom over a finer sort.
fn lift_rho(atom: &Formula, to: &LambdaSort) -> Formula {
    match atom {
        Formula::Rho(s, f, set) if s != to => {
            let lifted = to
                .elements()
                .into_iter()
                .filter(|l| set.contains(&to.project(*l, s).expect("refinement")))
                .collect();
            Formula::Rho(*to, f.clone(), lifted)
        }
        a => a.clone(),
    }
}

fn dnf(f: &Formula) -> Vec<Vec<Formula>> {
    match f {
        Formula::True => vec![vec![]],
        Formula::False => vec![],
        Formula::Or(v) => v.iter().flat_map(dnf).collect(),
        Formula::And(v) => {
            let mut acc: Vec<Vec<Formula>> = vec![vec![]];
            for g in v {
                let d = dnf(g);
                acc = acc
                    .iter()
                    .flat_map(|a| {
                        d.iter().map(move |b| {
                            let mut c = a.clone();
                            c.extend(b.iter().cloned());
                            c
                        })
                    })
                    .collect();
            }
            acc
        }
        atom => vec![vec![atom.clone()]],
    }
}

/// Disjunctive normal form over strict order atoms and `rho` equalities,
/// with all `rho` atoms over one common sort.
pub fn normalize(phi: &Formula, p: Prime) -> Result<Formula, Error> {
    if !phi.is_quantifier_free() {
        return Err(Error::Precondition("normalize needs a quantifier-free formula".into()));
    }
    let f = rewrite_all(&phi.simplify(p), p);
    let sorts = f.sorts();
    let Some(first) = sorts.iter().next().copied() else {
        return Ok(Formula::or(dnf(&f).into_iter().map(Formula::and)).simplify(p));
    };
    let mut joint = first;
    for s in &sorts {
        joint = joint.join(s)?;
    }
    let f = f.map_atoms(&mut |a| lift_rho(a, &joint)).simplify(p);
    let mut out = Vec::new();
    for conj in dnf(&f) {
        let merged = Formula::and(conj).simplify(p);
        // one disjunct per choice of Λ-value of each rho atom
        let parts: Vec<Formula> = match merged {
            Formula::And(v) => v,
            Formula::False => continue,
            Formula::True => vec![],
            a => vec![a],
        };
        let mut acc: Vec<Vec<Formula>> = vec![vec![]];
        for a in parts {
            let choices: Vec<Formula> = match &a {
                Formula::Rho(s, g, set) => set
                    .iter()
                    .map(|l| Formula::Rho(*s, g.clone(), [*l].into()))
                    .collect(),
                _ => vec![a.clone()],
            };
            acc = acc
                .into_iter()
                .flat_map(|c| {
                    choices.iter().map(move |x| {
                        let mut c = c.clone();
                        c.push(x.clone());
                        c
                    })
                })
                .collect();
        }
        out.extend(acc.into_iter().map(|c| Formula::And(c)));
    }
    Ok(Formula::or(out))
}

/// Conjuncts of the disjunctive normal form in which every subformula
/// without `var` is kept whole. `None` when there would be more than `cap`.
fn var_dnf(f: &Formula, var: &str, cap: usize) -> Option<Vec<Vec<Formula>>> {
    if !f.has_free(var) {
        return Some(match f {
            Formula::True => vec![vec![]],
            Formula::False => vec![],
            g => vec![vec![g.clone()]],
        });
    }
    match f {
        Formula::Or(v) => {
            let mut out = Vec::new();
            for g in v {
                out.extend(var_dnf(g, var, cap)?);
                if out.len() > cap {
                    return None;
                }
            }
            Some(out)
        }
        Formula::And(v) => {
            let mut acc: Vec<Vec<Formula>> = vec![vec![]];
            for g in v {
                let d = var_dnf(g, var, cap)?;
                if acc.len() * d.len() > cap {
                    return None;
                }
                acc = acc
                    .iter()
                    .flat_map(|a| {
                        d.iter().map(move |b| {
                            let mut c = a.clone();
                            c.extend(b.iter().cloned());
                            c
                        })
                    })
                    .collect();
            }
            Some(acc)
        }
        atom => Some(vec![vec![atom.clone()]]),
    }
}

/// `∃var` of a conjunction.
fn exists_conjunct(var: &str, conj: Vec<Formula>, p: Prime) -> Result<Formula, Error> {
    let (with, without): (Vec<Formula>, Vec<Formula>) = conj.into_iter().partition(|g| g.has_free(var));
    // t = c(x) is forced by a zero test
    let pinned = with.iter().find_map(|a| match a {
        Formula::Rho(_, f, set) if set.len() == 1 && set.contains(&LambdaElem::Zero) => f.center_form(var),
        _ => None,
    });
    let inner = match pinned {
        Some((_, c)) => Formula::and(with.iter().map(|a| a.substitute(var, &c))).simplify(p),
        None if with.is_empty() => Formula::True,
        None => {
            let psi = Formula::and(with);
            let mut fv = psi.free_vars();
            fv.remove(var);
            let xvars: Vec<String> = fv.into_iter().collect();
            eliminate_exists(&to_cells(&psi, var, &xvars, p)?)
        }
    };
    Ok(Formula::and(without.into_iter().chain([inner])).simplify(p))
}

const DNF_CAP: usize = 4096;

fn exists_qf(var: &str, psi: &Formula, p: Prime) -> Result<Formula, Error> {
    let psi = rewrite_all(psi, p);
    if !psi.has_free(var) {
        return Ok(psi);
    }
    let Some(conjuncts) = var_dnf(&psi, var, DNF_CAP) else {
        let mut fv = psi.free_vars();
        fv.remove(var);
        let xvars: Vec<String> = fv.into_iter().collect();
        return Ok(eliminate_exists(&to_cells(&psi, var, &xvars, p)?));
    };
    let mut seen = BTreeSet::new();
    let mut parts = Vec::new();
    for conj in conjuncts {
        let key = Formula::and(conj.clone());
        if !seen.insert(key) {
            continue;
        }
        let e = exists_conjunct(var, conj, p)?;
        if e == Formula::True {
            return Ok(Formula::True);
        }
        parts.push(e);
    }
    Ok(Formula::or(parts).simplify(p))
}

/// An equivalent quantifier-free formula.
pub fn eliminate_all(phi: &Formula, p: Prime) -> Result<Formula, Error> {
    Ok(match phi {
        Formula::Exists(v, body) => exists_qf(v, &eliminate_all(body, p)?, p)?,
        Formula::Forall(v, body) => {
            let neg = Formula::not(eliminate_all(body, p)?).simplify(p);
            Formula::not(exists_qf(v, &neg, p)?).simplify(p)
        }
        Formula::Not(g) => Formula::not(eliminate_all(g, p)?).simplify(p),
        Formula::And(v) => Formula::and(v.iter().map(|g| eliminate_all(g, p)).collect::<Result<Vec<_>, _>>()?).simplify(p),
        Formula::Or(v) => Formula::or(v.iter().map(|g| eliminate_all(g, p)).collect::<Result<Vec<_>, _>>()?).simplify(p),
        atom => atom.simplify(p),
    })
}

fn dim_qf(phi: &Formula, vars: &[String], p: Prime) -> Result<Option<usize>, Error> {
    let phi = phi.simplify(p);
    if phi == Formula::False {
        return Ok(None);
    }
    let Some((t, xs)) = vars.split_last() else {
        return Ok(phi.eval(&Assignment::new(), p)?.then_some(0));
    };
    if !phi.has_free(t) {
        return Ok(dim_qf(&phi, xs, p)?.map(|d| d + 1));
    }
    let u = to_cells(&phi, t, xs, p)?;
    let mut open = Vec::new();
    let mut points = Vec::new();
    for c in &u.cells {
        let nz: BTreeSet<LambdaElem> = c.lset.iter().copied().filter(|l| !l.is_zero()).collect();
        if !nz.is_empty() {
            open.push(cell_exists(&crate::cells::Cell { lset: nz, ..c.clone() }));
        }
        if c.lset.contains(&LambdaElem::Zero) {
            points.push(cell_exists(&crate::cells::Cell {
                lset: [LambdaElem::Zero].into(),
                ..c.clone()
            }));
        }
    }
    let a = dim_qf(&Formula::or(open), xs, p)?.map(|d| d + 1);
    let b = dim_qf(&Formula::or(points), xs, p)?;
    Ok(a.max(b))
}

/// Dimension of the set defined by `phi` in `K^vars` (`None` when empty).
/// `vars` must contain the free variables of `phi`.
pub fn dimension(phi: &Formula, vars: &[String], p: Prime) -> Result<Option<usize>, Error> {
    let fv = phi.free_vars();
    if let Some(v) = fv.iter().find(|v| !vars.contains(v)) {
        return Err(Error::Unbound(v.clone()));
    }
    let qf = eliminate_all(phi, p)?;
    dim_qf(&qf, vars, p)
}
