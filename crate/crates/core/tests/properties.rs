use proptest::prelude::*;

use semiaffine::cells::ord_infeasible;
use semiaffine::classify::bijection_exists_p;
use semiaffine::formula::{eq_ord, parse, CmpOp};
use semiaffine::gen::Gen;
use semiaffine::lambda::{Gap, Sign};
use semiaffine::{Assignment, Formula, LambdaElem, LambdaSort, LinearPoly, PadicRational, Prime, Valuation};

const PRIMES: [u64; 4] = [2, 3, 5, 7];

fn rational(p: u64) -> impl Strategy<Value = PadicRational> {
    (-1_000_000i128..1_000_000, 1i128..1_000_000, -6i64..6).prop_filter_map("nonzero", move |(a, b, k)| {
        (a != 0).then(|| &PadicRational::new(a, b).unwrap() * &PadicRational::p_pow(p, k))
    })
}

fn prime_and_rational() -> impl Strategy<Value = (Prime, PadicRational)> {
    prop::sample::select(PRIMES.to_vec()).prop_flat_map(|p| (Just(Prime::new(p).unwrap()), rational(p)))
}

/// A random element with `0 <= ord < n`.
fn low_rep(p: u64, n: u32) -> impl Strategy<Value = PadicRational> {
    (1i128..1_000_000, 1i128..1_000_000, 0..n, any::<bool>()).prop_filter_map("unit", move |(a, b, k, neg)| {
        let pi = p as i128;
        (a % pi != 0 && b % pi != 0).then(|| {
            let x = &PadicRational::new(a, b).unwrap() * &PadicRational::p_pow(p, k as i64);
            if neg {
                -x
            } else {
                x
            }
        })
    })
}

fn ord(x: &PadicRational, p: Prime) -> i64 {
    x.ord(p).finite().unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn ac_is_multiplicative(((p, x), m) in (prime_and_rational(), 1u32..4), yy in any::<prop::sample::Index>()) {
        let y = PadicRational::new(yy.index(999_983) as i128 + 1, 7).unwrap();
        let md = p.pow(m);
        let prod = x.ac(m, p).unwrap() * y.ac(m, p).unwrap() % md;
        prop_assert_eq!((&x * &y).ac(m, p).unwrap(), prod);
        prop_assert_eq!(ord(&(&x * &y), p), ord(&x, p) + ord(&y, p));
        prop_assert_eq!(PadicRational::from_int(p.get() as i128).ac(m, p).unwrap(), 1);
    }

    #[test]
    fn ac_fixes_units(p in prop::sample::select(PRIMES.to_vec()), m in 1u32..4, u in 1i128..100_000) {
        prop_assume!(u % p as i128 != 0);
        let p = Prime::new(p).unwrap();
        prop_assert_eq!(PadicRational::from_int(u).ac(m, p).unwrap() as i128, u % p.pow(m) as i128);
    }

    #[test]
    fn ultrametric((p, x) in prime_and_rational(), y in -1000i128..1000) {
        let y = &PadicRational::from_int(y) * &PadicRational::p_pow(p.get(), 1);
        let s = (&x + &y).ord(p);
        let (a, b) = (x.ord(p), y.ord(p));
        prop_assert!(s >= a.min(b));
        if a != b {
            prop_assert_eq!(s, a.min(b));
        }
    }

    #[test]
    fn rho_is_multiplicative((p, x) in prime_and_rational(), n in 1u32..4, m in 1u32..4, c in 1i128..500) {
        let s = LambdaSort::new(p, n, m).unwrap();
        let c = PadicRational::from_int(c);
        prop_assert_eq!(s.rho(&(&x * &c)), s.scale(s.rho(&x), &c));
        let c2 = PadicRational::new(3, 7).unwrap();
        prop_assert_eq!(s.scale(s.rho(&x), &(&c * &c2)), s.scale(s.scale(s.rho(&x), &c), &c2));
    }
}

fn sorts_with_r() -> Vec<(u64, u32, u32, u32)> {
    let mut out = Vec::new();
    for p in [2, 3, 5] {
        for n in 1..=3 {
            for m in 1..=3 {
                for r in 1..=3u32 {
                    if r * n < m {
                        out.push((p, n, m, r));
                    }
                }
            }
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn add_r_is_representative_independent(
        (p, n, m, r, x, y) in prop::sample::select(sorts_with_r()).prop_flat_map(|(p, n, m, r)| {
            (Just(p), Just(n), Just(m), Just(r), low_rep(p, n), low_rep(p, n))
        })
    ) {
        let pr = Prime::new(p).unwrap();
        let s = LambdaSort::new(pr, n, m).unwrap();
        let (l, mu) = (s.rho(&x), s.rho(&y));
        let shift = PadicRational::p_pow(p, (r * n) as i64);
        prop_assert_eq!(s.rho(&(&x + &(&shift * &y))), s.add_r(l, mu, r).unwrap());
        prop_assert_eq!(s.rho(&(&x - &(&shift * &y))), s.sub_r(l, mu, r).unwrap());
        // compatibility with the projection onto Λ_{1, m-1}
        if m > 1 {
            let t = LambdaSort::new(pr, 1, m - 1).unwrap();
            if r * n < m - 1 {
                let (pl, pm) = (s.project(l, &t).unwrap(), s.project(mu, &t).unwrap());
                prop_assert_eq!(s.project(s.add_r(l, mu, r).unwrap(), &t).unwrap(), t.add_r(pl, pm, r * n).unwrap());
            }
        }
    }

    #[test]
    fn rhoab_cases(
        (p, n, m) in prop::sample::select(vec![(2u64, 1u32, 1u32), (2, 2, 3), (3, 1, 2), (3, 2, 2), (5, 1, 1), (5, 3, 2)]),
        a in 1i128..100_000, b in 1i128..100_000, ka in -4i64..4, kb in -4i64..4, minus in any::<bool>(),
    ) {
        let pr = Prime::new(p).unwrap();
        let s = LambdaSort::new(pr, n, m).unwrap();
        let a = &PadicRational::from_int(a) * &PadicRational::p_pow(p, ka);
        let b = &PadicRational::from_int(b) * &PadicRational::p_pow(p, kb);
        let sign = if minus { Sign::Minus } else { Sign::Plus };
        let sum = if minus { &a - &b } else { &a + &b };
        let (oa, ob) = (ord(&a, pr), ord(&b, pr));
        let (l, mu) = (s.rho(&a), s.rho(&b));
        let gap = if oa + m as i64 <= ob {
            Gap::FarBelow
        } else if oa < ob {
            let shift = (ob - mu.r().unwrap() as i64) - (oa - l.r().unwrap() as i64);
            Gap::Middle(shift as u32)
        } else if oa == ob && sum.ord(pr) == Valuation::Finite(oa) {
            Gap::Equal
        } else {
            return Ok(());
        };
        prop_assert_eq!(s.add_cases(l, mu, sign, gap).unwrap(), s.rho(&sum));
    }
}

#[test]
fn parse_print_round_trip() {
    for p in [2, 3, 5] {
        let p = Prime::new(p).unwrap();
        let sorts = [LambdaSort::new(p, 2, 1).unwrap(), LambdaSort::new(p, 1, 2).unwrap()];
        let mut gen = Gen::new(p, 77);
        let vars = ["x", "y"].map(String::from);
        let q = ["t", "s", "u"].map(String::from);
        for i in 0..350 {
            let phi = gen.formula(&vars, &q[..i % 4], &sorts, 1 + i % 5);
            let text = phi.to_text(p);
            assert_eq!(parse(&text, p).unwrap(), phi, "{text}");
        }
    }
}

fn points(p: Prime, seed: i128) -> Vec<Assignment> {
    let vals: Vec<PadicRational> = [-3, -1, 0, 1, 2, 5, 9, 27]
        .into_iter()
        .map(|k: i128| &PadicRational::from_int(k + seed) * &PadicRational::p_pow(p.get(), seed as i64 % 3 - 1))
        .collect();
    let mut out = Vec::new();
    for a in &vals {
        for b in &vals {
            out.push([("x".to_string(), a.clone()), ("y".to_string(), b.clone())].into());
        }
    }
    out
}

#[test]
fn boolean_laws_pointwise() {
    let p = Prime::new(3).unwrap();
    let sorts = [LambdaSort::new(p, 2, 1).unwrap()];
    let mut gen = Gen::new(p, 5);
    let vars = ["x", "y"].map(String::from);
    for i in 0..100 {
        let f = gen.qf(&vars, &sorts, 3);
        let g = gen.qf(&vars, &sorts, 2);
        for s in points(p, i % 4) {
            let (a, b) = (f.eval(&s, p).unwrap(), g.eval(&s, p).unwrap());
            let not_and = Formula::Not(Box::new(Formula::And(vec![f.clone(), g.clone()])));
            let or_not = Formula::Or(vec![Formula::Not(Box::new(f.clone())), Formula::Not(Box::new(g.clone()))]);
            assert_eq!(not_and.eval(&s, p).unwrap(), or_not.eval(&s, p).unwrap());
            assert_eq!(not_and.eval(&s, p).unwrap(), !(a && b));
            assert_eq!(Formula::Not(Box::new(Formula::Not(Box::new(f.clone())))).eval(&s, p).unwrap(), a);
            assert_eq!(f.nnf(p).eval(&s, p).unwrap(), a);
            assert_eq!(f.simplify(p).eval(&s, p).unwrap(), a);
        }
    }
}

#[test]
fn eq_ord_matches_orders() {
    for p in [2, 3, 5] {
        let p = Prime::new(p).unwrap();
        let f = eq_ord(&LinearPoly::var("x"), &LinearPoly::var("y"), p);
        for seed in 0..8 {
            // the macro describes ord x = ord y on nonzero elements
            for s in points(p, seed).into_iter().filter(|s| !s["x"].is_zero() && !s["y"].is_zero()) {
                let want = s["x"].ord(p) == s["y"].ord(p);
                assert_eq!(f.eval(&s, p).unwrap(), want);
            }
        }
    }
}

#[test]
fn power_bijection_symmetric() {
    for p in [2, 3, 5, 7] {
        let p = Prime::new(p).unwrap();
        for n in 1..=6 {
            for n2 in 1..=6 {
                assert_eq!(bijection_exists_p(p, n, n2).unwrap(), bijection_exists_p(p, n2, n).unwrap());
            }
        }
    }
}

#[test]
fn enumeration_sizes() {
    for p in [2, 3, 5] {
        let p = Prime::new(p).unwrap();
        for n in 1..=3 {
            for m in 1..=3 {
                let s = LambdaSort::new(p, n, m).unwrap();
                let els = s.elements();
                assert_eq!(els.len() as u64, 1 + n as u64 * (p.get() - 1) * p.pow(m - 1));
                assert_eq!(els[0], LambdaElem::Zero);
                assert!(els.windows(2).all(|w| w[0] < w[1]));
                for l in els {
                    assert_eq!(s.rho_int(s.repr(l)), l);
                }
            }
        }
    }
}

fn small_poly() -> impl Strategy<Value = LinearPoly> {
    (-2i128..3, -2i128..3, -3i128..4, -1i64..2).prop_map(|(a, b, c, k)| {
        let s = PadicRational::p_pow(3, k);
        LinearPoly::term("x", PadicRational::from_int(a))
            .add(&LinearPoly::term("y", PadicRational::from_int(b)))
            .add(&LinearPoly::int(c))
            .scale(&s)
    })
}

fn ord_atom() -> impl Strategy<Value = Formula> {
    (small_poly(), small_poly(), 0usize..5, any::<bool>()).prop_map(|(f, g, op, neg)| {
        let op = [CmpOp::Lt, CmpOp::Le, CmpOp::Eq, CmpOp::Ge, CmpOp::Gt][op];
        let a = Formula::Ord(f, op, g);
        if neg {
            Formula::Not(Box::new(a))
        } else {
            a
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn infeasible_conjunctions_have_no_points(atoms in prop::collection::vec(ord_atom(), 2..6), seed in 0i128..4) {
        let p = Prime::new(3).unwrap();
        let f = Formula::And(atoms);
        if ord_infeasible(&f, None, p) {
            for s in points(p, seed) {
                prop_assert!(!f.eval(&s, p).unwrap(), "{} at {:?}", f.to_text(p), s);
            }
        }
    }
}
