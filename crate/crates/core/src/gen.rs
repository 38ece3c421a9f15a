//! Seeded random generators for polynomials, cells and formulas.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cells::Cell;
use crate::formula::{CmpOp, Formula, LinearPoly};
use crate::lambda::{LambdaElem, LambdaSort};
use crate::padic::{PadicRational, Prime};

pub struct Gen {
    pub rng: ChaCha8Rng,
    pub p: Prime,
}

impl Gen {
    pub fn new(p: Prime, seed: u64) -> Gen {
        Gen {
            rng: ChaCha8Rng::seed_from_u64(seed),
            p,
        }
    }

    /// A nonzero scalar from a small pool: `±1, ±2, ±p, ±1/p, ±p^2, 1/2`.
    pub fn scalar(&mut self) -> PadicRational {
        let p = self.p.get();
        let pool = [
            PadicRational::one(),
            PadicRational::from_int(2),
            PadicRational::p_pow(p, 1),
            PadicRational::p_pow(p, -1),
            PadicRational::p_pow(p, 2),
            PadicRational::new(1, 2).unwrap(),
        ];
        let c = pool.choose(&mut self.rng).unwrap().clone();
        if self.rng.gen_bool(0.5) {
            -c
        } else {
            c
        }
    }

    /// A constant term: zero about a third of the time.
    pub fn constant(&mut self) -> PadicRational {
        if self.rng.gen_ratio(1, 3) {
            PadicRational::zero()
        } else {
            self.scalar()
        }
    }

    /// A linear polynomial in `vars`, each variable present with probability
    /// one half.
    pub fn poly(&mut self, vars: &[String]) -> LinearPoly {
        let mut terms = Vec::new();
        for v in vars {
            if self.rng.gen_bool(0.5) {
                terms.push((v.clone(), self.scalar()));
            }
        }
        LinearPoly::from_parts(terms, self.constant())
    }

    /// A polynomial in `vars` that is not the zero polynomial.
    pub fn nonzero_poly(&mut self, vars: &[String]) -> LinearPoly {
        loop {
            let f = self.poly(vars);
            if !f.is_zero() {
                return f;
            }
        }
    }

    /// A polynomial with a nonzero coefficient on `var`.
    pub fn poly_in(&mut self, vars: &[String], var: &str) -> LinearPoly {
        let c = self.scalar();
        self.poly(vars).add(&LinearPoly::term(var, c))
    }

    pub fn lset(&mut self, sort: &LambdaSort) -> BTreeSet<LambdaElem> {
        let all = sort.elements();
        let mut out: BTreeSet<LambdaElem> = all.iter().copied().filter(|_| self.rng.gen_bool(0.5)).collect();
        if out.is_empty() {
            out.insert(*all.choose(&mut self.rng).unwrap());
        }
        out
    }

    /// A cell over `xvars` with random center, optional bounds, a base of at
    /// most one atom and a random Λ-set.
    pub fn cell(&mut self, xvars: &[String], var: &str, sort: LambdaSort) -> Cell {
        let center = self.poly(xvars);
        let lower = self.rng.gen_bool(0.5).then(|| self.nonzero_poly(xvars));
        let upper = self.rng.gen_bool(0.5).then(|| self.nonzero_poly(xvars));
        let base = if !xvars.is_empty() && self.rng.gen_ratio(1, 3) {
            self.atom(xvars, &[sort])
        } else {
            Formula::True
        };
        Cell {
            xvars: xvars.to_vec(),
            var: var.to_string(),
            base,
            center,
            lower,
            upper,
            sort,
            lset: self.lset(&sort),
        }
    }

    /// A random atom over `vars`.
    pub fn atom(&mut self, vars: &[String], sorts: &[LambdaSort]) -> Formula {
        match self.rng.gen_range(0..6) {
            0..=2 => {
                let ops = [CmpOp::Lt, CmpOp::Le, CmpOp::Eq, CmpOp::Ge, CmpOp::Gt];
                let op = *ops.choose(&mut self.rng).unwrap();
                Formula::Ord(self.nonzero_poly(vars), op, self.nonzero_poly(vars))
            }
            3 => Formula::Divides(self.nonzero_poly(vars), self.nonzero_poly(vars)),
            _ => {
                let sort = *sorts.choose(&mut self.rng).unwrap();
                let f = self.nonzero_poly(vars);
                let set = self.lset(&sort);
                Formula::Rho(sort, f, set)
            }
        }
    }

    /// A random formula over `vars` whose atoms all mention at least one of
    /// them, with `depth` nested quantifiers drawn from `qvars`.
    pub fn formula(&mut self, vars: &[String], qvars: &[String], sorts: &[LambdaSort], atoms: usize) -> Formula {
        let Some((q, rest)) = qvars.split_first() else {
            return self.qf(vars, sorts, atoms);
        };
        let mut inner_vars = vars.to_vec();
        inner_vars.push(q.clone());
        let body = self.formula(&inner_vars, rest, sorts, atoms);
        let body = self.atom_mentioning(q, &inner_vars, body);
        let quant = if self.rng.gen_bool(0.6) {
            Formula::Exists(q.clone(), Box::new(body))
        } else {
            Formula::Forall(q.clone(), Box::new(body))
        };
        if !vars.is_empty() && self.rng.gen_ratio(1, 3) {
            let extra = self.atom(vars, sorts);
            if self.rng.gen_bool(0.5) {
                Formula::And(vec![quant, extra])
            } else {
                Formula::Or(vec![quant, extra])
            }
        } else {
            quant
        }
    }

    fn atom_mentioning(&mut self, q: &str, vars: &[String], body: Formula) -> Formula {
        if body.has_free(q) {
            return body;
        }
        let f = self.poly_in(vars, q);
        let g = self.nonzero_poly(vars);
        Formula::And(vec![Formula::Ord(f, CmpOp::Lt, g), body])
    }

    /// A quantifier-free formula with about `atoms` atoms.
    pub fn qf(&mut self, vars: &[String], sorts: &[LambdaSort], atoms: usize) -> Formula {
        if atoms <= 1 || vars.is_empty() {
            if vars.is_empty() {
                return Formula::True;
            }
            let a = self.atom(vars, sorts);
            return if self.rng.gen_ratio(1, 5) { Formula::Not(Box::new(a)) } else { a };
        }
        let left = self.rng.gen_range(1..atoms);
        let l = self.qf(vars, sorts, left);
        let r = self.qf(vars, sorts, atoms - left);
        let f = if self.rng.gen_bool(0.5) {
            Formula::And(vec![l, r])
        } else {
            Formula::Or(vec![l, r])
        };
        if self.rng.gen_ratio(1, 6) {
            Formula::Not(Box::new(f))
        } else {
            f
        }
    }
}
