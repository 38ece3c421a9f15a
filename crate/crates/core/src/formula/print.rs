use std::fmt;

use super::{Formula, LinearPoly};
use crate::padic::{PadicRational, Prime};

pub struct FormulaDisplay<'a> {
    pub(super) f: &'a Formula,
    pub(super) p: Prime,
}

#[derive(Clone, Copy, PartialEq)]
enum Ctx {
    Top,
    OrChild,
    AndChild,
    NotChild,
}

/// `Some(k)` if `c = p^k` with `k ≠ 0`.
fn p_exponent(c: &PadicRational, p: Prime) -> Option<i64> {
    if c.is_negative() || c.is_zero() || c.is_one() {
        return None;
    }
    let k = c.ord(p).finite()?;
    (PadicRational::p_pow(p.get(), k) == *c).then_some(k)
}

fn scalar(c: &PadicRational, p: Prime) -> String {
    match p_exponent(c, p) {
        Some(1) => "p".to_string(),
        Some(k) => format!("p^{k}"),
        None => c.to_string(),
    }
}

pub fn poly_to_string(f: &LinearPoly, p: Prime) -> String {
    let mut out = String::new();
    let mut first = true;
    let mut push = |neg: bool, body: String, out: &mut String| {
        if first {
            if neg {
                out.push('-');
            }
            first = false;
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        out.push_str(&body);
    };
    for (v, c) in f.terms() {
        let a = c.abs();
        let body = if a.is_one() {
            v.clone()
        } else {
            format!("{}*{v}", scalar(&a, p))
        };
        push(c.is_negative(), body, &mut out);
    }
    let c = f.constant_term();
    if !c.is_zero() {
        push(c.is_negative(), c.abs().to_string(), &mut out);
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

fn write_formula(f: &Formula, p: Prime, ctx: Ctx, out: &mut String) {
    match f {
        Formula::True => out.push_str("true"),
        Formula::False => out.push_str("false"),
        Formula::Ord(a, op, b) => {
            out.push_str(&format!(
                "ord({}) {} ord({})",
                poly_to_string(a, p),
                op.symbol(),
                poly_to_string(b, p)
            ));
        }
        Formula::Divides(a, b) => {
            let text = format!("{} | {}", poly_to_string(a, p), poly_to_string(b, p));
            if ctx == Ctx::NotChild {
                out.push_str(&format!("({text})"));
            } else {
                out.push_str(&text);
            }
        }
        Formula::Rho(sort, g, set) => {
            out.push_str(&format!("rho[{},{}]({}) ", sort.n, sort.m, poly_to_string(g, p)));
            if set.len() == 1 {
                out.push_str(&format!("= {}", sort.repr(*set.iter().next().unwrap())));
            } else {
                let items: Vec<String> = set.iter().map(|l| sort.repr(*l).to_string()).collect();
                out.push_str(&format!("in {{{}}}", items.join(", ")));
            }
        }
        Formula::Not(g) => {
            out.push('!');
            write_formula(g, p, Ctx::NotChild, out);
        }
        Formula::And(v) | Formula::Or(v) => {
            let is_and = matches!(f, Formula::And(_));
            if v.is_empty() {
                out.push_str(if is_and { "true" } else { "false" });
                return;
            }
            if v.len() == 1 {
                write_formula(&v[0], p, ctx, out);
                return;
            }
            let paren = match ctx {
                Ctx::Top => false,
                Ctx::OrChild => !is_and,
                Ctx::AndChild | Ctx::NotChild => true,
            };
            if paren {
                out.push('(');
            }
            let (sep, child) = if is_and {
                (" & ", Ctx::AndChild)
            } else {
                (" or ", Ctx::OrChild)
            };
            for (i, g) in v.iter().enumerate() {
                if i > 0 {
                    out.push_str(sep);
                }
                write_formula(g, p, child, out);
            }
            if paren {
                out.push(')');
            }
        }
        Formula::Exists(x, g) | Formula::Forall(x, g) => {
            let paren = ctx != Ctx::Top;
            if paren {
                out.push('(');
            }
            let q = if matches!(f, Formula::Exists(..)) { "E" } else { "A" };
            out.push_str(&format!("{q} {x}. "));
            write_formula(g, p, Ctx::Top, out);
            if paren {
                out.push(')');
            }
        }
    }
}

impl fmt::Display for FormulaDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        write_formula(self.f, self.p, Ctx::Top, &mut out);
        f.write_str(&out)
    }
}

#[cfg(test)]
mod tests {
    use crate::formula::parse;
    use crate::padic::Prime;

    #[test]
    fn p_power_coefficients() {
        let p = Prime::new(3).unwrap();
        let f = parse("ord(3*x) < ord(y)", p).unwrap();
        assert_eq!(f.to_text(p), "ord(p*x) < ord(y)");
        let g = parse("ord(1/9*x - 2*y + 3) <= ord(0)", p).unwrap();
        assert_eq!(g.to_text(p), "ord(p^-2*x - 2*y + 3) <= ord(0)");
    }

    #[test]
    fn nesting_is_parenthesized() {
        let p = Prime::new(2).unwrap();
        for text in [
            "x | y & (y | x or !(x | 1))",
            "(E t. t | x) & A s. (s | x or x | s)",
            "!(x | y & y | x)",
            "rho[2,2](x - 1) in {1, 3, 6} or true",
        ] {
            let f = parse(text, p).unwrap();
            assert_eq!(parse(&f.to_text(p), p).unwrap(), f, "{text}");
        }
    }
}
