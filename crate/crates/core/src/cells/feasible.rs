//! A sound emptiness test for conjunctions of order comparisons in `x`.
//!
//! Each `ord f` is an integer unknown; scalar multiples of one polynomial
//! share an unknown up to the order of the factor. The comparisons are then
//! difference constraints, and a negative closed walk through a strict one
//! has no solution. Zero polynomials (order `∞`) cannot rescue such a walk:
//! the smaller side of a strict comparison is finite, and `ord a ≤ ord b`
//! with `b` finite makes `a` finite, so every node on the walk is finite.

use crate::formula::{CmpOp, Formula, LinearPoly};
use crate::padic::{Prime, Valuation};

/// `ord lhs + shift < ord rhs` (strict) or `≤`.
struct Edge {
    lhs: usize,
    rhs: usize,
    shift: i64,
    strict: bool,
}

#[derive(Default)]
struct Graph {
    reps: Vec<LinearPoly>,
    edges: Vec<Edge>,
}

impl Graph {
    /// The node of `f` and `ord f − ord rep`.
    fn node(&mut self, f: &LinearPoly, p: Prime) -> Option<(usize, i64)> {
        if f.is_zero() {
            return None;
        }
        for (i, r) in self.reps.iter().enumerate() {
            if let Some(k) = r.ratio_to(f) {
                if let Valuation::Finite(d) = k.ord(p) {
                    return Some((i, d));
                }
            }
        }
        self.reps.push(f.clone());
        Some((self.reps.len() - 1, 0))
    }

    /// Records `ord f < ord g` or `ord f ≤ ord g`.
    fn compare(&mut self, f: &LinearPoly, g: &LinearPoly, strict: bool, p: Prime) {
        let (Some((a, da)), Some((b, db))) = (self.node(f, p), self.node(g, p)) else { return };
        self.edges.push(Edge { lhs: a, rhs: b, shift: da - db, strict });
    }

    fn add(&mut self, atom: &Formula, p: Prime) {
        let (f, op, g, negated) = match atom {
            Formula::Ord(f, op, g) => (f, *op, g, false),
            Formula::Not(h) => match h.as_ref() {
                Formula::Ord(f, op, g) => (f, *op, g, true),
                _ => return,
            },
            _ => return,
        };
        let op = if negated {
            match op {
                CmpOp::Lt => CmpOp::Ge,
                CmpOp::Le => CmpOp::Gt,
                CmpOp::Ge => CmpOp::Lt,
                CmpOp::Gt => CmpOp::Le,
                CmpOp::Eq => return,
            }
        } else {
            op
        };
        match op {
            CmpOp::Lt => self.compare(f, g, true, p),
            CmpOp::Le => self.compare(f, g, false, p),
            CmpOp::Gt => self.compare(g, f, true, p),
            CmpOp::Ge => self.compare(g, f, false, p),
            CmpOp::Eq => {
                self.compare(f, g, false, p);
                self.compare(g, f, false, p);
            }
        }
    }

    fn infeasible(&self) -> bool {
        if !self.edges.iter().any(|e| e.strict) {
            return false;
        }
        let n = self.reps.len();
        const INF: i64 = i64::MAX / 4;
        // d[i][j]: least w with v_j ≤ v_i + w along a walk
        let mut d = vec![vec![INF; n]; n];
        for (i, row) in d.iter_mut().enumerate() {
            row[i] = 0;
        }
        for e in &self.edges {
            // v_lhs + shift + [strict] ≤ v_rhs, i.e. v_lhs ≤ v_rhs − shift − [strict]
            let w = -e.shift - e.strict as i64;
            d[e.rhs][e.lhs] = d[e.rhs][e.lhs].min(w);
        }
        for k in 0..n {
            for i in 0..n {
                if d[i][k] >= INF {
                    continue;
                }
                for j in 0..n {
                    if d[k][j] < INF {
                        let w = (d[i][k] + d[k][j]).max(-INF);
                        if w < d[i][j] {
                            d[i][j] = w;
                        }
                    }
                }
            }
        }
        self.edges
            .iter()
            .filter(|e| e.strict)
            .any(|e| d[e.lhs][e.rhs] < INF && -e.shift - 1 + d[e.lhs][e.rhs] < 0)
    }
}

/// `true` only when the top-level order comparisons of `base`, together
/// with `ord a1 < ord a2 − 1` for the given bounds, have no common solution.
pub fn ord_infeasible(base: &Formula, bounds: Option<(&LinearPoly, &LinearPoly)>, p: Prime) -> bool {
    let mut g = Graph::default();
    match base {
        Formula::And(v) => v.iter().for_each(|a| g.add(a, p)),
        atom => g.add(atom, p),
    }
    if let Some((a1, a2)) = bounds {
        // some integer lies strictly between ord a1 and ord a2
        g.compare(&a1.scale(&crate::padic::PadicRational::p_pow(p.get(), 1)), a2, true, p);
    }
    g.infeasible()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    fn p3() -> Prime {
        Prime::new(3).unwrap()
    }

    #[test]
    fn detects_cycles() {
        let p = p3();
        let f = parse("ord(x) < ord(y) & ord(y) < ord(z) & ord(z) <= ord(x)", p).unwrap();
        assert!(ord_infeasible(&f, None, p));
        let f = parse("ord(x) < ord(y) & ord(y) <= ord(p*x)", p).unwrap();
        assert!(!ord_infeasible(&f, None, p));
        let f = parse("ord(p*x) < ord(y) & ord(y) <= ord(p*x)", p).unwrap();
        assert!(ord_infeasible(&f, None, p));
        let f = parse("ord(x - 1) < ord(y) & !(ord(x - 1) < ord(1/3*y))", p).unwrap();
        assert!(!ord_infeasible(&f, None, p));
        let f = parse("ord(x - 1) < ord(y) & !(ord(x - 1) < ord(3*y))", p).unwrap();
        assert!(ord_infeasible(&f, None, p));
    }

    #[test]
    fn zero_order_escapes_non_strict_cycles() {
        let p = p3();
        // satisfied by x = 0
        let f = parse("ord(p*x) <= ord(x)", p).unwrap();
        assert!(!ord_infeasible(&f, None, p));
        let f = parse("ord(x) = ord(p*x) & ord(y) < ord(x)", p).unwrap();
        assert!(!ord_infeasible(&f, None, p));
    }

    #[test]
    fn bounds_need_room() {
        let p = p3();
        let (a, b) = (LinearPoly::var("x"), LinearPoly::var("y"));
        let f = parse("ord(y) <= ord(p*x)", p).unwrap();
        assert!(ord_infeasible(&f, Some((&a, &b)), p));
        assert!(!ord_infeasible(&Formula::True, Some((&a, &b)), p));
    }
}
