//! Brute-force semantics for quantified formulas by witness search.
//!
//! A quantifier over `t` ranges over the candidates `c_j(σ)` and
//! `c_j(σ) + p^e·s`, where `c_j` are the zeros in `t` of the atom
//! polynomials (after eliminating the other unassigned variables pairwise),
//! `s` runs over the units below `p^m` (`m` the largest residue depth in the
//! formula) and `e` over an interval that extends the orders of the data at
//! `σ` by a margin. Completeness needs the margin to exceed the bound orders
//! of the cells involved; this is not checked.

use std::collections::BTreeSet;

use crate::error::Error;
use crate::formula::{Assignment, Formula, LinearPoly};
use crate::padic::{PadicRational, Prime, Valuation};

#[derive(Clone, Copy, Debug)]
pub struct Oracle {
    pub p: Prime,
    /// Extra orders searched on both sides of the data at the point.
    pub margin: i64,
}

impl Oracle {
    pub fn new(p: Prime, margin: i64) -> Oracle {
        Oracle { p, margin }
    }

    /// Truth of `phi` at `sigma`; quantifiers are searched over witnesses.
    pub fn eval(&self, phi: &Formula, sigma: &Assignment) -> Result<bool, Error> {
        let digits = phi.sorts().iter().map(|s| s.m).max().unwrap_or(1);
        self.eval_rec(phi, sigma, digits)
    }

    /// `∃var body` at `sigma`.
    pub fn exists(&self, var: &str, body: &Formula, sigma: &Assignment) -> Result<bool, Error> {
        let digits = body.sorts().iter().map(|s| s.m).max().unwrap_or(1);
        self.exists_rec(var, body, sigma, digits)
    }

    fn eval_rec(&self, phi: &Formula, sigma: &Assignment, digits: u32) -> Result<bool, Error> {
        Ok(match phi {
            Formula::Exists(v, body) => self.exists_rec(v, body, sigma, digits)?,
            Formula::Forall(v, body) => {
                let mut all = true;
                for t in self.candidates(v, body, sigma, digits) {
                    let mut s = sigma.clone();
                    s.insert(v.clone(), t);
                    if !self.eval_rec(body, &s, digits)? {
                        all = false;
                        break;
                    }
                }
                all
            }
            Formula::Not(g) => !self.eval_rec(g, sigma, digits)?,
            Formula::And(v) => {
                for g in v {
                    if !self.eval_rec(g, sigma, digits)? {
                        return Ok(false);
                    }
                }
                true
            }
            Formula::Or(v) => {
                for g in v {
                    if self.eval_rec(g, sigma, digits)? {
                        return Ok(true);
                    }
                }
                false
            }
            atom => atom.eval(sigma, self.p)?,
        })
    }

    fn exists_rec(&self, var: &str, body: &Formula, sigma: &Assignment, digits: u32) -> Result<bool, Error> {
        for t in self.candidates(var, body, sigma, digits) {
            let mut s = sigma.clone();
            s.insert(var.to_string(), t);
            if self.eval_rec(body, &s, digits)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// The witness candidates for `var` in `body` at `sigma`.
    pub fn candidates(&self, var: &str, body: &Formula, sigma: &Assignment, digits: u32) -> Vec<PadicRational> {
        let p = self.p;
        let mut polys: BTreeSet<LinearPoly> = body.polys().into_iter().map(|f| f.partial_eval(sigma)).collect();
        let mut others: BTreeSet<String> = BTreeSet::new();
        for f in &polys {
            f.collect_vars(&mut others);
        }
        others.remove(var);
        for s in &others {
            let (with, without): (Vec<LinearPoly>, Vec<LinearPoly>) =
                polys.iter().cloned().partition(|f| f.contains(s));
            let mut next: BTreeSet<LinearPoly> = without.into_iter().collect();
            for (i, f) in with.iter().enumerate() {
                for g in &with[i + 1..] {
                    let h = f.scale(&g.coeff(s)).sub(&g.scale(&f.coeff(s)));
                    next.insert(h);
                }
            }
            polys = next;
        }
        let mut centers: BTreeSet<PadicRational> = [PadicRational::zero()].into();
        let mut orders: Vec<i64> = vec![0];
        let mut spread = 0;
        for f in &polys {
            for c in f.terms().values() {
                if let Valuation::Finite(k) = c.ord(p) {
                    spread = spread.max(k.abs());
                }
            }
            if f.vars().any(|v| v != var) {
                continue;
            }
            match f.center_form(var) {
                Some((_, c)) => {
                    let c = c.constant_term().clone();
                    if let Valuation::Finite(k) = c.ord(p) {
                        orders.push(k);
                    }
                    centers.insert(c);
                }
                None => {
                    if let Valuation::Finite(k) = f.constant_term().ord(p) {
                        orders.push(k);
                    }
                }
            }
        }
        let cs: Vec<PadicRational> = centers.iter().cloned().collect();
        for (i, a) in cs.iter().enumerate() {
            for b in &cs[i + 1..] {
                if let Valuation::Finite(k) = (a - b).ord(p) {
                    orders.push(k);
                }
            }
        }
        let lo = orders.iter().min().unwrap() - self.margin - spread;
        let hi = orders.iter().max().unwrap() + self.margin + spread;
        let top = p.pow(digits) as i128;
        let units: Vec<PadicRational> = (1..top)
            .filter(|s| s % p.get() as i128 != 0)
            .map(PadicRational::from_int)
            .collect();
        let mut out: Vec<PadicRational> = cs.clone();
        let mut seen: BTreeSet<PadicRational> = centers;
        for c in &cs {
            for e in lo..=hi {
                let pe = PadicRational::p_pow(p.get(), e);
                for s in &units {
                    let t = c + &(&pe * s);
                    if seen.insert(t.clone()) {
                        out.push(t);
                    }
                }
            }
        }
        out
    }
}
