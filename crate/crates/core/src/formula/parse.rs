//! Recursive-descent parser for the concrete syntax.
//!
//! ```text
//! formula = conj ("or" conj)*
//! conj    = unary ("&" unary)*
//! unary   = "!" unary | ("E" | "A") var "." formula | "(" formula ")"
//!         | "true" | "false" | atom
//! atom    = "ord(" term ")" cmp "ord(" term ")" | term "|" term
//!         | "rho[" int "," int "](" term ")" ("=" lam | "in" "{" lam,* "}")
//! term    = ["-"] prod (("+" | "-") prod)*
//! prod    = factor (("*" | "/") factor)*
//! factor  = int | "p" ["^" ["-"] int] | var | "(" term ")" | "-" factor
//! ```
//!
//! A parenthesis at the start of a formula is first tried as the left side
//! of a divisibility atom, then as a grouped formula.

use std::collections::BTreeSet;
use std::str::FromStr;

use num_bigint::BigInt;

use super::{CmpOp, Formula, LinearPoly};
use crate::error::Error;
use crate::lambda::LambdaSort;
use crate::padic::{PadicRational, Prime};

/// The scalar subfield allowed as variable coefficients. `Integers` is the
/// restricted mode in which coefficients must be integers.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ScalarField {
    #[default]
    Rationals,
    Integers,
}

impl ScalarField {
    pub fn contains(self, c: &PadicRational) -> bool {
        match self {
            ScalarField::Rationals => true,
            ScalarField::Integers => c.is_integer(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ScalarField::Rationals => "Q",
            ScalarField::Integers => "Z",
        }
    }
}

const KEYWORDS: &[&str] = &["E", "A", "ord", "rho", "in", "or", "true", "false", "p"];

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Num(String),
    Sym(&'static str),
    End,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, Error> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            out.push((Tok::Num(text[start..i].to_string()), start));
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            while i < bytes.len()
                && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'\'')
            {
                i += 1;
            }
            out.push((Tok::Ident(text[start..i].to_string()), start));
            continue;
        }
        let two = text.get(i..i + 2).unwrap_or("");
        let sym: &'static str = match two {
            "<=" => "<=",
            ">=" => ">=",
            _ => match c {
                '(' => "(",
                ')' => ")",
                '[' => "[",
                ']' => "]",
                '{' => "{",
                '}' => "}",
                ',' => ",",
                '.' => ".",
                '+' => "+",
                '-' => "-",
                '*' => "*",
                '/' => "/",
                '^' => "^",
                '|' => "|",
                '&' => "&",
                '!' => "!",
                '<' => "<",
                '>' => ">",
                '=' => "=",
                _ => {
                    return Err(Error::Parse {
                        pos: i,
                        msg: format!("unexpected character {c:?}"),
                    })
                }
            },
        };
        i += sym.len();
        out.push((Tok::Sym(sym), start));
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    p: Prime,
    field: ScalarField,
}

type PResult<T> = Result<T, Error>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn at(&self) -> usize {
        self.toks[self.pos].1
    }

    fn err<T>(&self, msg: impl Into<String>) -> PResult<T> {
        Err(Error::Parse {
            pos: self.at(),
            msg: msg.into(),
        })
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(t) if *t == s)
    }

    fn is_kw(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Ident(t) if t == s)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.err(format!("expected {s:?}"))
        }
    }

    fn eat_kw(&mut self, s: &str) -> bool {
        if self.is_kw(s) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn int(&mut self) -> PResult<BigInt> {
        match self.peek().clone() {
            Tok::Num(s) => {
                self.pos += 1;
                Ok(BigInt::from_str(&s).expect("digits"))
            }
            _ => self.err("expected integer"),
        }
    }

    fn small_int(&mut self) -> PResult<i64> {
        let v = self.int()?;
        i64::try_from(v).or_else(|_| self.err("integer too large"))
    }

    fn formula(&mut self) -> PResult<Formula> {
        let mut items = vec![self.conj()?];
        while self.eat_kw("or") {
            items.push(self.conj()?);
        }
        Ok(if items.len() == 1 {
            items.pop().unwrap()
        } else {
            Formula::Or(items)
        })
    }

    fn conj(&mut self) -> PResult<Formula> {
        let mut items = vec![self.unary()?];
        while self.eat_sym("&") {
            items.push(self.unary()?);
        }
        Ok(if items.len() == 1 {
            items.pop().unwrap()
        } else {
            Formula::And(items)
        })
    }

    fn unary(&mut self) -> PResult<Formula> {
        if self.eat_sym("!") {
            return Ok(Formula::Not(Box::new(self.unary()?)));
        }
        for (kw, exists) in [("E", true), ("A", false)] {
            if self.eat_kw(kw) {
                let v = self.var_name()?;
                self.expect_sym(".")?;
                let body = Box::new(self.formula()?);
                return Ok(if exists {
                    Formula::Exists(v, body)
                } else {
                    Formula::Forall(v, body)
                });
            }
        }
        if self.eat_kw("true") {
            return Ok(Formula::True);
        }
        if self.eat_kw("false") {
            return Ok(Formula::False);
        }
        if self.is_sym("(") {
            let save = self.pos;
            match self.atom() {
                Ok(a) => return Ok(a),
                Err(first) => {
                    self.pos = save + 1;
                    let inner = self.formula();
                    match inner {
                        Ok(f) if self.eat_sym(")") => return Ok(f),
                        Ok(_) => {
                            return Err(first);
                        }
                        Err(e) => {
                            // Report whichever attempt got further.
                            return Err(further(first, e));
                        }
                    }
                }
            }
        }
        self.atom()
    }

    fn var_name(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.pos += 1;
                Ok(s)
            }
            _ => self.err("expected variable name"),
        }
    }

    fn atom(&mut self) -> PResult<Formula> {
        if self.eat_kw("ord") {
            self.expect_sym("(")?;
            let f = self.term()?;
            self.expect_sym(")")?;
            let op = if self.eat_sym("<=") {
                CmpOp::Le
            } else if self.eat_sym(">=") {
                CmpOp::Ge
            } else if self.eat_sym("<") {
                CmpOp::Lt
            } else if self.eat_sym(">") {
                CmpOp::Gt
            } else if self.eat_sym("=") {
                CmpOp::Eq
            } else {
                return self.err("expected comparison operator");
            };
            if !self.eat_kw("ord") {
                return self.err("expected \"ord\"");
            }
            self.expect_sym("(")?;
            let g = self.term()?;
            self.expect_sym(")")?;
            return Ok(Formula::Ord(f, op, g));
        }
        if self.eat_kw("rho") {
            self.expect_sym("[")?;
            let n = self.small_int()?;
            self.expect_sym(",")?;
            let m = self.small_int()?;
            self.expect_sym("]")?;
            let sort = match (u32::try_from(n), u32::try_from(m)) {
                (Ok(n), Ok(m)) => LambdaSort::new(self.p, n, m).or_else(|e| self.err(format!("unknown sort: {e}")))?,
                _ => return self.err("unknown sort"),
            };
            self.expect_sym("(")?;
            let f = self.term()?;
            self.expect_sym(")")?;
            let mut set = BTreeSet::new();
            if self.eat_sym("=") {
                set.insert(self.lam(&sort)?);
            } else if self.eat_kw("in") {
                self.expect_sym("{")?;
                if !self.is_sym("}") {
                    set.insert(self.lam(&sort)?);
                    while self.eat_sym(",") {
                        set.insert(self.lam(&sort)?);
                    }
                }
                self.expect_sym("}")?;
            } else {
                return self.err("expected \"=\" or \"in\"");
            }
            return Ok(Formula::Rho(sort, f, set));
        }
        let f = self.term()?;
        if !self.eat_sym("|") {
            return self.err("expected \"|\" or an atom");
        }
        let g = self.term()?;
        Ok(Formula::Divides(f, g))
    }

    fn lam(&mut self, sort: &LambdaSort) -> PResult<crate::lambda::LambdaElem> {
        let at = self.at();
        let k = self.int()?;
        let k = i128::try_from(k).map_err(|_| Error::Parse {
            pos: at,
            msg: "Λ representative too large".into(),
        })?;
        sort.from_repr(k).map_err(|e| Error::Parse {
            pos: at,
            msg: e.to_string(),
        })
    }

    fn term(&mut self) -> PResult<LinearPoly> {
        let mut acc = self.prod()?;
        loop {
            if self.eat_sym("+") {
                acc = acc.add(&self.prod()?);
            } else if self.eat_sym("-") {
                acc = acc.sub(&self.prod()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn prod(&mut self) -> PResult<LinearPoly> {
        let mut acc = self.factor()?;
        loop {
            let at = self.at();
            if self.eat_sym("*") {
                let rhs = self.factor()?;
                acc = if acc.is_constant() {
                    self.scaled(&rhs, acc.constant_term(), at)?
                } else if rhs.is_constant() {
                    self.scaled(&acc, rhs.constant_term(), at)?
                } else {
                    return Err(Error::Parse {
                        pos: at,
                        msg: "nonlinear product".into(),
                    });
                };
            } else if self.eat_sym("/") {
                let rhs = self.factor()?;
                if !rhs.is_constant() || rhs.constant_term().is_zero() {
                    return Err(Error::Parse {
                        pos: at,
                        msg: "division by a non-constant or zero term".into(),
                    });
                }
                let inv = rhs.constant_term().recip()?;
                acc = self.scaled(&acc, &inv, at)?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn scaled(&self, f: &LinearPoly, c: &PadicRational, at: usize) -> PResult<LinearPoly> {
        let out = f.scale(c);
        if !f.is_constant() {
            for coeff in out.terms().values() {
                if !self.field.contains(coeff) {
                    return Err(Error::Parse {
                        pos: at,
                        msg: format!("scalar {coeff} outside {}", self.field.name()),
                    });
                }
            }
        }
        Ok(out)
    }

    fn factor(&mut self) -> PResult<LinearPoly> {
        if self.eat_sym("-") {
            return Ok(self.factor()?.neg());
        }
        if self.eat_sym("(") {
            let t = self.term()?;
            self.expect_sym(")")?;
            return Ok(t);
        }
        if self.eat_kw("p") {
            let mut k = 1;
            if self.eat_sym("^") {
                let neg = self.eat_sym("-");
                k = self.small_int()?;
                if neg {
                    k = -k;
                }
            }
            return Ok(LinearPoly::constant(PadicRational::p_pow(self.p.get(), k)));
        }
        if let Tok::Num(_) = self.peek() {
            let v = self.int()?;
            return Ok(LinearPoly::constant(PadicRational::from_big(
                num_rational::BigRational::from_integer(v),
            )));
        }
        let v = self.var_name()?;
        Ok(LinearPoly::var(&v))
    }
}

fn further(a: Error, b: Error) -> Error {
    match (&a, &b) {
        (Error::Parse { pos: pa, .. }, Error::Parse { pos: pb, .. }) if pb > pa => b,
        _ => a,
    }
}

/// Parses a formula with rational scalars.
pub fn parse(text: &str, p: Prime) -> Result<Formula, Error> {
    parse_with(text, p, ScalarField::Rationals)
}

pub fn parse_with(text: &str, p: Prime, field: ScalarField) -> Result<Formula, Error> {
    let mut parser = Parser {
        toks: lex(text)?,
        pos: 0,
        p,
        field,
    };
    let f = parser.formula()?;
    if *parser.peek() != Tok::End {
        return parser.err("trailing input");
    }
    Ok(f)
}

/// Parses a single term.
pub fn parse_poly(text: &str, p: Prime) -> Result<LinearPoly, Error> {
    let mut parser = Parser {
        toks: lex(text)?,
        pos: 0,
        p,
        field: ScalarField::Rationals,
    };
    let f = parser.term()?;
    if *parser.peek() != Tok::End {
        return parser.err("trailing input");
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lambda::LambdaElem;

    fn p3() -> Prime {
        Prime::new(3).unwrap()
    }

    #[test]
    fn atoms() {
        let f = parse("ord(x) < ord(y)", p3()).unwrap();
        assert_eq!(f, Formula::lt(LinearPoly::var("x"), LinearPoly::var("y")));
        let g = parse("rho[2,1](t - 3) = 2", p3()).unwrap();
        match g {
            Formula::Rho(s, poly, set) => {
                assert_eq!((s.n, s.m), (2, 1));
                assert_eq!(poly, LinearPoly::var("t").sub(&LinearPoly::int(3)));
                assert_eq!(set, [LambdaElem::Unit { r: 0, a: 2 }].into());
            }
            _ => panic!("expected rho atom"),
        }
    }

    #[test]
    fn quantifier_over_conjunction() {
        let f = parse("E t. (x | t & t | y)", p3()).unwrap();
        let Formula::Exists(v, body) = f else {
            panic!("expected exists")
        };
        assert_eq!(v, "t");
        assert!(matches!(*body, Formula::And(ref xs) if xs.len() == 2));
    }

    #[test]
    fn parenthesized_terms_and_formulas() {
        let a = parse("(x + 1) | y", p3()).unwrap();
        assert!(matches!(a, Formula::Divides(..)));
        let b = parse("(x | y)", p3()).unwrap();
        assert!(matches!(b, Formula::Divides(..)));
        let c = parse("(x | y) & (ord(x) < ord(y) or true)", p3()).unwrap();
        assert!(matches!(c, Formula::And(_)));
    }

    #[test]
    fn p_powers() {
        let f = parse("ord(p^3*x) < ord(p^-1*y + p)", p3()).unwrap();
        let Formula::Ord(a, _, b) = f else { panic!() };
        assert_eq!(a.coeff("x"), PadicRational::from_int(27));
        assert_eq!(b.coeff("y"), PadicRational::new(1, 3).unwrap());
        assert_eq!(b.constant_term(), &PadicRational::from_int(3));
    }

    #[test]
    fn errors_carry_positions() {
        match parse("ord(x) < ord(y", p3()) {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 14),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse("x*y | 1", p3()).is_err());
        assert!(parse("rho[0,1](x) = 1", p3()).is_err());
        assert!(parse("rho[1,1](x) = 3", p3()).is_err());
        assert!(parse_with("1/2*x | y", p3(), ScalarField::Integers).is_err());
        assert!(parse_with("2*x | 1/2", p3(), ScalarField::Integers).is_ok());
    }
}
