//! Counting n-th power classes and definable bijections between the sets
//! `Q_{n,m} = ρ_{n,m}^{-1}(1)` and `P_n` (nonzero n-th powers).
//!
//! For odd `p` a unit is an n-th power iff it is one modulo `p^{2v+1}`,
//! `v = v_p(n)`; for `p = 2` the modulus is `2^{2v+3}`.

use serde::Serialize;

use crate::error::Error;
use crate::formula::{Formula, LinearPoly};
use crate::lambda::{LambdaElem, LambdaSort};
use crate::padic::{PadicRational, Prime, Valuation};
use crate::skolem::{MapPiece, PiecewiseLinearMap};

fn vp(p: u64, mut n: u64) -> u32 {
    let mut v = 0;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = (r as u128 * b as u128 % m as u128) as u64;
        }
        b = (b as u128 * b as u128 % m as u128) as u64;
        e >>= 1;
    }
    r
}

/// Exponent `e` such that n-th powers of units are detected modulo `p^e`.
fn lifting_depth(p: Prime, n: u32) -> u32 {
    let v = vp(p.get(), n as u64);
    if p.get() == 2 {
        2 * v + 3
    } else {
        2 * v + 1
    }
}

/// Whether `x ∈ P_n`.
pub fn is_nth_power(x: &PadicRational, n: u32, p: Prime) -> Result<bool, Error> {
    if n == 0 {
        return Err(Error::Precondition("n must be positive".into()));
    }
    let Valuation::Finite(k) = x.ord(p) else {
        return Err(Error::Domain("is_nth_power undefined at zero".into()));
    };
    if k.rem_euclid(n as i64) != 0 {
        return Ok(false);
    }
    let e = lifting_depth(p, n);
    let modulus = p.pow(e);
    let u = x.ac(e, p)?;
    Ok((1..modulus)
        .filter(|y| y % p.get() != 0)
        .any(|y| pow_mod(y, n as u64, modulus) == u))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PowerClassTable {
    pub p: u64,
    pub n: u32,
    pub count: usize,
    pub representatives: Vec<u64>,
}

/// The elements of `P_n ∩ (0, p^{2 v_p(n) + 1} − 1]`.
pub fn count_lambda_n(p: Prime, n: u32) -> Result<PowerClassTable, Error> {
    let top = p.pow(2 * vp(p.get(), n as u64) + 1) - 1;
    let mut representatives = Vec::new();
    for k in 1..=top {
        if is_nth_power(&PadicRational::from_int(k as i128), n, p)? {
            representatives.push(k);
        }
    }
    Ok(PowerClassTable {
        p: p.get(),
        n,
        count: representatives.len(),
        representatives,
    })
}

fn checked_pow(p: u64, e: u32) -> Option<u128> {
    (p as u128).checked_pow(e)
}

/// Whether `Q_{n,m}` and `Q_{n2,m2}` are in definable bijection:
/// `n2 = n·p^{m − m2}`.
pub fn bijection_exists_q(p: Prime, n: u32, m: u32, n2: u32, m2: u32) -> bool {
    if m >= m2 {
        checked_pow(p.get(), m - m2).is_some_and(|q| n2 as u128 == n as u128 * q)
    } else {
        checked_pow(p.get(), m2 - m).is_some_and(|q| n as u128 == n2 as u128 * q)
    }
}

/// Whether `P_n` and `P_{n2}` are in definable bijection:
/// `#Λ_n · n2 · p^{2 v(n2)} = #Λ_{n2} · n · p^{2 v(n)}`.
pub fn bijection_exists_p(p: Prime, n: u32, n2: u32) -> Result<bool, Error> {
    let (a, b) = (count_lambda_n(p, n)?.count as u128, count_lambda_n(p, n2)?.count as u128);
    let w = |k: u32| checked_pow(p.get(), 2 * vp(p.get(), k as u64)).expect("small exponent");
    Ok(a * n2 as u128 * w(n2) == b * n as u128 * w(n))
}

/// The sort in which the cosets of `Q_{n·n2, max(m,m2)}` are `ρ`-classes.
fn coset_sort(p: Prime, n: u32, m: u32, n2: u32, m2: u32) -> Result<LambdaSort, Error> {
    LambdaSort::new(p, n * n2, m.max(m2))
}

fn in_q(x: &PadicRational, n: u32, m: u32, p: Prime) -> Result<bool, Error> {
    let s = LambdaSort::new(p, n, m)?;
    Ok(s.rho(x) == s.rho(&PadicRational::one()))
}

/// A definable bijection `Q_{n,m} → Q_{n2,m2}` and its inverse. Each piece
/// is `x ↦ (τ(λ)/λ)·x` on a coset `λ·Q_{n·n2, m}`, with `τ` matching the
/// sorted coset representatives of source and target.
pub fn construct_bijection_q(
    p: Prime,
    n: u32,
    m: u32,
    n2: u32,
    m2: u32,
) -> Result<(PiecewiseLinearMap, PiecewiseLinearMap), Error> {
    if !bijection_exists_q(p, n, m, n2, m2) {
        return Err(Error::Precondition(format!(
            "no bijection between Q_({n},{m}) and Q_({n2},{m2}) over p = {p}"
        )));
    }
    if m < m2 {
        let (g, ginv) = construct_bijection_q(p, n2, m2, n, m)?;
        return Ok((ginv, g));
    }
    let sort = coset_sort(p, n, m, n2, m2)?;
    let pp = p.get() as i128;
    let source: Vec<PadicRational> = (0..n2)
        .map(|i| PadicRational::p_pow(p.get(), (i * n) as i64))
        .collect();
    let mut target: Vec<PadicRational> = Vec::new();
    for j in 0..n {
        for k in 0..pp.pow(m - m2) {
            let u = PadicRational::from_int(1 + k * pp.pow(m2));
            target.push(&PadicRational::p_pow(p.get(), (j * n2) as i64) * &u);
        }
    }
    let key = |x: &PadicRational| sort.rho(x);
    let mut source = source;
    source.sort_by_key(key);
    target.sort_by_key(key);
    debug_assert_eq!(source.len(), target.len());
    let piece = |from: &PadicRational, to: &PadicRational| -> Result<MapPiece, Error> {
        Ok(MapPiece {
            guard: Formula::Rho(sort, LinearPoly::var("x"), [sort.rho(from)].into()),
            components: vec![LinearPoly::var("x").scale(&to.checked_div(from)?)],
        })
    };
    let vars = vec!["x".to_string()];
    let fwd = source.iter().zip(&target).map(|(a, b)| piece(a, b)).collect::<Result<_, _>>()?;
    let inv = target.iter().zip(&source).map(|(a, b)| piece(a, b)).collect::<Result<_, _>>()?;
    Ok((
        PiecewiseLinearMap {
            vars: vars.clone(),
            pieces: fwd,
        },
        PiecewiseLinearMap { vars, pieces: inv },
    ))
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct BijectionReport {
    /// `ρ`-classes of the coset sort checked.
    pub classes: usize,
    /// Window points of the source and target sets checked.
    pub points: usize,
    pub violations: Vec<String>,
}

impl BijectionReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

fn apply1(f: &PiecewiseLinearMap, x: &PadicRational, p: Prime) -> Result<Option<PadicRational>, Error> {
    let sigma = [("x".to_string(), x.clone())].into();
    Ok(f.apply(&sigma, p)?.map(|v| v[0].clone()))
}

/// Checks that `f: Q_{n,m} → Q_{n2,m2}` is a bijection with inverse `g`.
///
/// Every piece is multiplication by a constant on a union of `ρ`-classes of
/// the coset sort, so `f` is bijective iff it induces a bijection of those
/// classes; that is checked on class representatives. In addition `g∘f` and
/// `f∘g` are checked to be the identity on the points `p^e·u` of both sets,
/// `|e| ≤ window`, `0 < u < p^{max(m,m2)+1}`.
pub fn verify_bijection_q(
    f: &PiecewiseLinearMap,
    g: &PiecewiseLinearMap,
    p: Prime,
    (n, m): (u32, u32),
    (n2, m2): (u32, u32),
    window: i64,
) -> Result<BijectionReport, Error> {
    let sort = coset_sort(p, n, m, n2, m2)?;
    let mut rep = BijectionReport::default();
    let mut images = std::collections::BTreeSet::new();
    let mut wanted = std::collections::BTreeSet::new();
    for lam in sort.nonzero_elements() {
        rep.classes += 1;
        let x = sort.repr_rational(lam);
        if in_q(&x, n2, m2, p)? {
            wanted.insert(lam);
        }
        let fired = f.firing(&[("x".to_string(), x.clone())].into(), p)?;
        if !in_q(&x, n, m, p)? {
            if !fired.is_empty() {
                rep.violations.push(format!("class {x} outside the domain fires {fired:?}"));
            }
            continue;
        }
        let Some(y) = apply1(f, &x, p)? else {
            rep.violations.push(format!("class {x} is not covered"));
            continue;
        };
        let img = sort.rho(&y);
        if !images.insert(img) {
            rep.violations.push(format!("class {x} maps onto an image class twice"));
        }
    }
    if images != wanted {
        rep.violations
            .push(format!("{} image classes, {} target classes", images.len(), wanted.len()));
    }
    let top = p.pow(m.max(m2) + 1) as i128;
    let mut pts: Vec<PadicRational> = Vec::new();
    for e in -window..=window {
        for u in (1..top).filter(|u| u % p.get() as i128 != 0) {
            pts.push(&PadicRational::p_pow(p.get(), e) * &PadicRational::from_int(u));
        }
    }
    let mut round = |h: &PiecewiseLinearMap, k: &PiecewiseLinearMap, from: (u32, u32), to: (u32, u32)| -> Result<(), Error> {
        for x in pts.iter().filter(|x| in_q(x, from.0, from.1, p).unwrap_or(false)) {
            rep.points += 1;
            match apply1(h, x, p)? {
                Some(y) if in_q(&y, to.0, to.1, p)? => {
                    if apply1(k, &y, p)?.as_ref() != Some(x) {
                        rep.violations.push(format!("{x} does not return through the inverse"));
                    }
                }
                other => rep.violations.push(format!("{x} maps to {other:?}")),
            }
        }
        Ok(())
    };
    round(f, g, (n, m), (n2, m2))?;
    round(g, f, (n2, m2), (n, m))?;
    Ok(rep)
}

/// Number of `ρ_{n,m}`-classes met by the points `p^e·u`, `e` in a window
/// of `width` consecutive orders and `u` below `p^{m+1}`.
pub fn coset_count(p: Prime, n: u32, m: u32, width: u32) -> Result<usize, Error> {
    let sort = LambdaSort::new(p, n, m)?;
    let top = p.pow(m + 1) as i128;
    let mut seen = std::collections::BTreeSet::<LambdaElem>::new();
    for e in 0..width as i64 {
        for u in (1..top).filter(|u| u % p.get() as i128 != 0) {
            seen.insert(sort.rho(&(&PadicRational::p_pow(p.get(), e - width as i64 / 2) * &PadicRational::from_int(u))));
        }
    }
    Ok(seen.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pr(p: u64) -> Prime {
        Prime::new(p).unwrap()
    }

    #[test]
    fn nth_powers() {
        let r = |k: i128| PadicRational::from_int(k);
        for n in 1..6 {
            assert!(is_nth_power(&r(1), n, pr(3)).unwrap());
        }
        assert!(is_nth_power(&r(4), 2, pr(5)).unwrap());
        assert!(!is_nth_power(&r(2), 2, pr(5)).unwrap());
        assert!(is_nth_power(&r(9), 2, pr(3)).unwrap());
        assert!(is_nth_power(&r(17), 2, pr(2)).unwrap());
        assert!(!is_nth_power(&r(5), 2, pr(2)).unwrap());
        assert!(is_nth_power(&r(-7), 3, pr(2)).unwrap());
        assert!(is_nth_power(&PadicRational::new(1, 4).unwrap(), 2, pr(7)).unwrap());
        assert!(is_nth_power(&PadicRational::zero(), 2, pr(3)).is_err());
    }

    #[test]
    fn counts() {
        assert_eq!(count_lambda_n(pr(5), 2).unwrap().count, 2);
        assert_eq!(count_lambda_n(pr(7), 3).unwrap().count, 2);
        for p in [2, 3, 5, 7] {
            assert_eq!(count_lambda_n(pr(p), 1).unwrap().count as u64, p - 1);
        }
    }

    #[test]
    fn verdicts() {
        assert!(bijection_exists_q(pr(3), 1, 2, 3, 1));
        assert!(!bijection_exists_q(pr(3), 2, 1, 2, 2));
        assert!(bijection_exists_q(pr(3), 3, 1, 1, 2));
        assert!(!bijection_exists_p(pr(5), 2, 4).unwrap());
        assert!(!bijection_exists_p(pr(5), 4, 2).unwrap());
        assert!(bijection_exists_p(pr(7), 3, 3).unwrap());
    }

    #[test]
    fn identity_bijection() {
        let (f, _) = construct_bijection_q(pr(3), 2, 2, 2, 2).unwrap();
        for pc in &f.pieces {
            assert_eq!(pc.components, vec![LinearPoly::var("x")]);
        }
    }

    #[test]
    fn bijection_3_12_31() {
        let p = pr(3);
        let (f, g) = construct_bijection_q(p, 1, 2, 3, 1).unwrap();
        assert_eq!(f.pieces.len(), 3);
        let rep = verify_bijection_q(&f, &g, p, (1, 2), (3, 1), 6).unwrap();
        assert!(rep.ok(), "{:?}", rep.violations);
        assert!(rep.points > 0);
        let (f, g) = construct_bijection_q(p, 3, 1, 1, 2).unwrap();
        assert!(verify_bijection_q(&f, &g, p, (3, 1), (1, 2), 6).unwrap().ok());
        assert!(construct_bijection_q(p, 2, 1, 2, 2).is_err());
    }

    #[test]
    fn broken_bijection_is_caught() {
        let p = pr(3);
        let (mut f, g) = construct_bijection_q(p, 1, 2, 3, 1).unwrap();
        f.pieces[1].components = f.pieces[0].components.clone();
        let rep = verify_bijection_q(&f, &g, p, (1, 2), (3, 1), 4).unwrap();
        assert!(!rep.ok());
    }

    #[test]
    fn coset_anatomy() {
        for (p, n, m) in [(2, 1, 1), (3, 2, 1), (3, 2, 2), (5, 3, 1)] {
            let want = n as usize * (p as usize - 1) * (p as usize).pow(m - 1);
            assert_eq!(coset_count(pr(p), n, m, 2 * n).unwrap(), want);
        }
    }
}
