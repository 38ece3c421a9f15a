//! Definable macros: equality of orders and congruence of orders.

use super::{Formula, LinearPoly};
use crate::lambda::LambdaSort;
use crate::padic::{PadicRational, Prime};

/// `ord f = ord g`, written `f | g & !(p*f | g)`. At `f = g = 0` the macro is
/// false although both orders are `+inf`.
pub fn eq_ord(f: &LinearPoly, g: &LinearPoly, p: Prime) -> Formula {
    let pf = f.scale(&PadicRational::from_int(p.get() as i128));
    Formula::And(vec![
        Formula::Divides(f.clone(), g.clone()),
        Formula::Not(Box::new(Formula::Divides(pf, g.clone()))),
    ])
}

/// `f ≠ 0 ∧ ord f ≡ k (mod n)`, as a `Rho` atom over `Λ_{n,1}`.
pub fn ord_mod(f: &LinearPoly, k: i64, n: u32, p: Prime) -> Formula {
    if n == 1 {
        return Formula::True;
    }
    let sort = LambdaSort::new(p, n, 1).expect("sort (n,1)");
    let set = sort
        .nonzero_elements()
        .filter(|l| l.ord_class(k, n))
        .collect();
    Formula::Rho(sort, f.clone(), set)
}
