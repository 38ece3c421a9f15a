//! Acceptance run: one line per criterion with its verdict, the amount of
//! work done and the time against the budget.

mod common;

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{base_points, check_intersect, check_polycenters, names};
use semiaffine::cells::Cell;
use semiaffine::classify::{
    bijection_exists_p, bijection_exists_q, construct_bijection_q, count_lambda_n, verify_bijection_q,
};
use semiaffine::cli;
use semiaffine::formula::{parse, parse_poly, ScalarField};
use semiaffine::gen::Gen;
use semiaffine::grid::Grid;
use semiaffine::lambda::{Gap, Sign};
use semiaffine::qe::{eliminate_all, Oracle};
use semiaffine::skolem::{synthesize_section, verify_section};
use semiaffine::{Formula, LambdaSort, PadicRational, Prime, Valuation};

type Outcome = Result<String, String>;

fn prime(p: u64) -> Prime {
    Prime::new(p).unwrap()
}

fn random_rational(rng: &mut impl Rng, p: u64) -> PadicRational {
    let mut a = 0;
    while a == 0 {
        a = rng.gen_range(-1_000_000i128..1_000_000);
    }
    let b = rng.gen_range(1i128..1_000_000);
    &PadicRational::new(a, b).unwrap() * &PadicRational::p_pow(p, rng.gen_range(-8..8))
}

fn ord(x: &PadicRational, p: Prime) -> i64 {
    x.ord(p).finite().unwrap()
}

fn ac_laws() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut checked = 0;
    for p in [2, 3, 5, 7] {
        let pr = prime(p);
        for m in 1..=3 {
            let md = pr.pow(m);
            if PadicRational::from_int(p as i128).ac(m, pr).unwrap() != 1 {
                return Err(format!("ac(p) != 1 for p={p}, m={m}"));
            }
            for _ in 0..1000 {
                let x = random_rational(&mut rng, p);
                let y = random_rational(&mut rng, p);
                let prod = x.ac(m, pr).unwrap() * y.ac(m, pr).unwrap() % md;
                if (&x * &y).ac(m, pr).unwrap() != prod {
                    return Err(format!("ac({x}·{y}) mod {p}^{m}"));
                }
                let u = rng.gen_range(1i128..1_000_000);
                if u % p as i128 != 0 && PadicRational::from_int(u).ac(m, pr).unwrap() as i128 != u % md as i128 {
                    return Err(format!("ac({u}) mod {p}^{m}"));
                }
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} rationals"))
}

fn low_rep(rng: &mut impl Rng, p: u64, n: u32) -> PadicRational {
    loop {
        let a = rng.gen_range(1i128..1_000_000);
        let b = rng.gen_range(1i128..1_000_000);
        if a % p as i128 != 0 && b % p as i128 != 0 {
            let x = &PadicRational::new(a, b).unwrap() * &PadicRational::p_pow(p, rng.gen_range(0..n) as i64);
            return if rng.gen_bool(0.5) { -x } else { x };
        }
    }
}

fn add_r_independence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut configs = 0;
    for p in [2, 3, 5] {
        for n in 1..=3u32 {
            for m in 1..=3u32 {
                let s = LambdaSort::new(prime(p), n, m).unwrap();
                for r in (1..=3u32).filter(|r| r * n < m) {
                    configs += 1;
                    let shift = PadicRational::p_pow(p, (r * n) as i64);
                    for _ in 0..200 {
                        let (x, y) = (low_rep(&mut rng, p, n), low_rep(&mut rng, p, n));
                        let got = s.add_r(s.rho(&x), s.rho(&y), r).unwrap();
                        if got != s.rho(&(&x + &(&shift * &y))) {
                            return Err(format!("p={p} {s} r={r}: x={x}, y={y}"));
                        }
                    }
                }
            }
        }
    }
    Ok(format!("{configs} (p,n,m,r) configurations × 200 pairs"))
}

fn rhoab() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut configs = 0;
    let mut cases = [0usize; 3];
    for p in [2, 3, 5] {
        let pr = prime(p);
        for n in 1..=3u32 {
            for m in 1..=3u32 {
                let s = LambdaSort::new(pr, n, m).unwrap();
                configs += 1;
                let mut done = 0;
                while done < 500 {
                    let a = random_rational(&mut rng, p);
                    // b near a in order, so that every case occurs
                    let b = &random_rational(&mut rng, p) * &PadicRational::p_pow(p, ord(&a, pr) - rng.gen_range(-2..(m as i64 + 2)));
                    let b = &b * &PadicRational::p_pow(p, -ord(&b, pr) + ord(&a, pr) + rng.gen_range(-1..(m as i64 + 2)));
                    let minus = rng.gen_bool(0.5);
                    let sign = if minus { Sign::Minus } else { Sign::Plus };
                    let sum = if minus { &a - &b } else { &a + &b };
                    let (oa, ob) = (ord(&a, pr), ord(&b, pr));
                    let (l, mu) = (s.rho(&a), s.rho(&b));
                    let gap = if oa + m as i64 <= ob {
                        cases[0] += 1;
                        Gap::FarBelow
                    } else if oa < ob {
                        cases[1] += 1;
                        Gap::Middle(((ob - mu.r().unwrap() as i64) - (oa - l.r().unwrap() as i64)) as u32)
                    } else if oa == ob && sum.ord(pr) == Valuation::Finite(oa) {
                        cases[2] += 1;
                        Gap::Equal
                    } else {
                        continue;
                    };
                    done += 1;
                    if s.add_cases(l, mu, sign, gap).map_err(|e| e.to_string())? != s.rho(&sum) {
                        return Err(format!("p={p} {s}: a={a}, b={b}, {sign:?}, {gap:?}"));
                    }
                }
            }
        }
    }
    Ok(format!(
        "{configs} configurations × 500 triples (far {}, middle {}, equal {})",
        cases[0], cases[1], cases[2]
    ))
}

fn small_sorts(p: Prime) -> Vec<LambdaSort> {
    let mut out = Vec::new();
    for n in 1..=2 {
        for m in 1..=2 {
            out.push(LambdaSort::new(p, n, m).unwrap());
        }
    }
    out
}

fn intersections() -> Outcome {
    let mut points = 0;
    let mut inside = 0;
    for p in [2, 3, 5] {
        let p = prime(p);
        let grid = Grid::new(p, 8, 2);
        for sort in small_sorts(p) {
            let mut gen = Gen::new(p, 1000 + sort.n as u64 * 10 + sort.m as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(4);
            for i in 0..100 {
                let xv = names(i % 3);
                let c1 = gen.cell(&xv, "t", sort);
                let c2 = gen.cell(&xv, "t", sort);
                let (a, b) = check_intersect(&c1, &c2, &grid, 2, &mut rng)?;
                points += a;
                inside += b;
            }
        }
    }
    Ok(format!("1200 pairs, {points} points, {inside} in the intersection"))
}

fn polycenters_descriptors() -> Outcome {
    let mut points = 0;
    let mut inputs = 0;
    for p in [2, 3, 5] {
        let p = prime(p);
        let grid = Grid::new(p, 8, 2);
        for sort in small_sorts(p) {
            let mut gen = Gen::new(p, 2000 + sort.n as u64 * 10 + sort.m as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            for i in 0..50 {
                let xv = names(i % 3);
                let count = 2 + i % 2;
                let polys: Vec<_> = (0..count)
                    .map(|j| {
                        if j == 2 && i % 4 == 3 && !xv.is_empty() {
                            gen.nonzero_poly(&xv)
                        } else {
                            gen.poly_in(&xv, "t")
                        }
                    })
                    .collect();
                points += check_polycenters(&polys, &xv, "t", sort, &grid, 2, &mut rng)?;
                inputs += 1;
            }
        }
    }
    Ok(format!("{inputs} inputs, {points} points"))
}

fn qe_configs() -> Vec<(u64, u32, u32)> {
    let mut out = Vec::new();
    for n in 1..=3 {
        for m in 1..=3 {
            out.push((2, n, m));
        }
    }
    out.extend([(3, 1, 1), (3, 1, 2), (3, 2, 1), (3, 2, 2), (3, 1, 3), (3, 3, 1)]);
    out.extend([(5, 1, 1), (5, 1, 2), (5, 2, 1), (5, 2, 2)]);
    out
}

fn check_formula(phi: &Formula, p: Prime, grid: &Grid, count: usize, rng: &mut impl Rng) -> Result<usize, String> {
    let qf = eliminate_all(phi, p).map_err(|e| format!("{}: {e}", phi.to_text(p)))?;
    if !qf.is_quantifier_free() {
        return Err(format!("{}: result has quantifiers", phi.to_text(p)));
    }
    let oracle = Oracle::new(p, cli::oracle_margin(phi));
    let vars: Vec<String> = phi.free_vars().into_iter().collect();
    let pts = base_points(grid, &vars, count, rng);
    for s in &pts {
        if qf.eval(s, p).unwrap() != oracle.eval(phi, s).unwrap() {
            return Err(format!("phi = {}\nqf = {}\nat {:?}", phi.to_text(p), qf.to_text(p), s));
        }
    }
    Ok(pts.len())
}

fn qe_soundness() -> Outcome {
    let mut formulas = 0;
    let mut points = 0;
    let mut deep = 0;
    let p = prime(3);
    let hand = parse("E t. ord(x) < ord(t) & ord(t) < ord(y)", p).unwrap();
    let want = parse("ord(p*x) < ord(y)", p).unwrap();
    let qf = eliminate_all(&hand, p).map_err(|e| e.to_string())?;
    let grid = Grid::new(p, 8, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for s in base_points(&grid, &names(2), 400, &mut rng) {
        if qf.eval(&s, p).unwrap() != want.eval(&s, p).unwrap() {
            return Err(format!("hand example: {} at {:?}", qf.to_text(p), s));
        }
    }
    points += check_formula(&hand, p, &grid, 400, &mut rng)?;
    formulas += 1;
    for (p, n, m) in qe_configs() {
        let p = prime(p);
        let grid = Grid::new(p, 8, 2);
        let sorts = [LambdaSort::new(p, n, m).unwrap(), LambdaSort::new(p, 1, 1).unwrap()];
        let mut gen = Gen::new(p, 3000 + n as u64 * 10 + m as u64);
        for i in 0..11 {
            let (xv, q) = if i % 3 == 2 {
                deep += 1;
                (names(1), vec!["t".to_string(), "s".to_string()])
            } else {
                (names(1 + i % 2), vec!["t".to_string()])
            };
            let phi = gen.formula(&xv, &q, &sorts, 2 + i % 2);
            points += check_formula(&phi, p, &grid, 60, &mut rng)?;
            formulas += 1;
        }
    }
    Ok(format!("{formulas} formulas ({deep} of depth 2), {points} points"))
}

fn skolem_sections() -> Outcome {
    let mut cells = 0;
    let mut points = 0;
    for p in [2, 3, 5] {
        let p = prime(p);
        let grid = Grid::new(p, 8, 2);
        for sort in small_sorts(p) {
            let mut gen = Gen::new(p, 4000 + sort.n as u64 * 10 + sort.m as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(7);
            for i in 0..100 {
                let xv = names(i % 3);
                let c = gen.cell(&xv, "t", sort);
                let g = synthesize_section(&c, ScalarField::Rationals).map_err(|e| e.to_string())?;
                let rep = verify_section(&g, &c, &base_points(&grid, &xv, 40, &mut rng)).map_err(|e| e.to_string())?;
                if !rep.ok() {
                    return Err(format!("{:?}: {:?}", c.to_record(), rep.violations));
                }
                cells += 1;
                points += rep.in_projection;
            }
        }
    }
    // directed proof cases over one base variable
    let p = prime(3);
    let sort = LambdaSort::new(p, 2, 2).unwrap();
    let grid = Grid::new(p, 8, 2);
    let pts = grid.points(&names(1));
    let poly = |s: &str| parse_poly(s, p).unwrap();
    let nonzero: std::collections::BTreeSet<_> = sort.nonzero_elements().collect();
    let cases = [
        ("lambda = 0", None, None, [semiaffine::LambdaElem::Zero].into()),
        ("no bounds", None, None, nonzero.clone()),
        ("upper bound only", None, Some(poly("x - 1")), nonzero.clone()),
        ("lower bound only", Some(poly("x")), None, nonzero.clone()),
        ("both bounds", Some(poly("x")), Some(poly("p^5*x")), nonzero),
    ];
    let mut directed = Vec::new();
    for (name, lower, upper, lset) in cases {
        let c = Cell {
            xvars: names(1),
            var: "t".into(),
            base: Formula::True,
            center: poly("2*x + 1"),
            lower,
            upper,
            sort,
            lset,
        };
        let g = synthesize_section(&c, ScalarField::Rationals).map_err(|e| e.to_string())?;
        let rep = verify_section(&g, &c, &pts).map_err(|e| e.to_string())?;
        if !rep.ok() || rep.in_projection == 0 {
            return Err(format!("{name}: {:?}", rep.violations));
        }
        directed.push(name);
    }
    Ok(format!(
        "{cells} random cells, {points} projection points; directed: {}",
        directed.join(", ")
    ))
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn classification() -> Outcome {
    let e = |e: semiaffine::Error| e.to_string();
    for p in [3u64, 5, 7, 11] {
        for n in (1..=6u32).filter(|n| *n as u64 % p != 0) {
            let c = count_lambda_n(prime(p), n).map_err(e)?.count as u64;
            if c != (p - 1) / gcd(p - 1, n as u64) {
                return Err(format!("#Lambda_{n} for p={p} is {c}"));
            }
        }
    }
    for p in [2u64, 3] {
        for n in 1..=4u32 {
            for m in 1..=4u32 {
                for n2 in 1..=4u32 {
                    for m2 in 1..=4u32 {
                        let want = if m >= m2 {
                            n2 as u64 == n as u64 * p.pow(m - m2)
                        } else {
                            n as u64 == n2 as u64 * p.pow(m2 - m)
                        };
                        if bijection_exists_q(prime(p), n, m, n2, m2) != want {
                            return Err(format!("Q verdict p={p} ({n},{m}) ({n2},{m2})"));
                        }
                    }
                }
            }
        }
    }
    let p5 = prime(5);
    if bijection_exists_p(p5, 2, 4).map_err(e)? || bijection_exists_p(p5, 4, 2).map_err(e)? {
        return Err("P_2 and P_4 over Q_5".into());
    }
    let sets = [
        (3, 1, 2, 3, 1),
        (3, 3, 1, 1, 2),
        (3, 2, 2, 2, 2),
        (2, 1, 2, 2, 1),
        (2, 1, 3, 4, 1),
        (2, 2, 2, 4, 1),
        (2, 1, 3, 2, 2),
        (3, 1, 3, 3, 2),
        (5, 1, 2, 5, 1),
        (2, 4, 1, 1, 3),
    ];
    let mut points = 0;
    for (p, n, m, n2, m2) in sets {
        let p = prime(p);
        let (f, g) = construct_bijection_q(p, n, m, n2, m2).map_err(e)?;
        let rep = verify_bijection_q(&f, &g, p, (n, m), (n2, m2), 8).map_err(e)?;
        if !rep.ok() {
            return Err(format!("bijection ({n},{m}) -> ({n2},{m2}): {:?}", rep.violations));
        }
        points += rep.points;
    }
    Ok(format!("counts, 512 Q verdicts, P(5;2,4), 10 bijections on {points} window points"))
}

fn determinism() -> Outcome {
    let runs: [&[&str]; 3] = [
        &["qe", "E t. ord(x) < ord(t) & ord(t) < ord(y) & rho[2,1](t - x) = 3", "--p", "3"],
        &["check", "E t. ord(x) < ord(t) & ord(t) < ord(y)", "--p", "3", "--seed", "5", "--points", "300"],
        &["check", "--p", "2", "--n", "2", "--m", "2", "--seed", "11", "--count", "6", "--points", "80"],
    ];
    for args in runs {
        let go = || cli::run(std::iter::once("semiaffine").chain(args.iter().copied()));
        let (a, b) = (go(), go());
        if a != b {
            return Err(format!("{args:?} differs between runs"));
        }
        if a.code != 0 {
            return Err(format!("{args:?} exited with {}: {}{}", a.code, a.stdout, a.stderr));
        }
    }
    Ok("qe and check outputs byte-identical across two runs".into())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, u64); 9] = [
        ("angular component laws", ac_laws, 1),
        ("+_r representative independence", add_r_independence, 5),
        ("rho(a + δb) case lemma", rhoab, 5),
        ("cell intersection", intersections, 60),
        ("polycenters descriptors", polycenters_descriptors, 60),
        ("quantifier elimination soundness", qe_soundness, 600),
        ("Skolem sections", skolem_sections, 60),
        ("classification identities", classification, 30),
        ("determinism", determinism, 60),
    ];
    let mut failed = 0;
    for (i, (name, run, budget)) in criteria.into_iter().enumerate() {
        let t0 = Instant::now();
        let res = run();
        let dt = t0.elapsed();
        let in_time = dt <= Duration::from_secs(budget);
        let (verdict, detail) = match (&res, in_time) {
            (Ok(d), true) => ("PASS", d.clone()),
            (Ok(d), false) => ("FAIL", format!("{d}; over the time budget")),
            (Err(e), _) => ("FAIL", e.clone()),
        };
        if verdict == "FAIL" {
            failed += 1;
        }
        println!(
            "criterion {}: {verdict}  {name} ({:.2}s / {budget}s, exact): {detail}",
            i + 1,
            dt.as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all 9 criteria passed");
}
