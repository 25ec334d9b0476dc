//! Rational expressions in `p` (or `p1..ps`).
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary | implicit)*
//! unary  := '-' unary | factor
//! factor := base ('^' uint)?
//! base   := int | ident | '(' expr ')'
//! ```
//!
//! `implicit` is a product written without `*` before an identifier or an
//! opening parenthesis, so printed forms such as `2p^2-2p+1` parse back.

use std::fmt;

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::ratfunc::{IntPolynomial, MultiPoly, MultiRational, RationalFunction};

/// Largest exponent accepted after `^`.
pub const MAX_EXPONENT: u32 = 4096;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Int(BigInt),
    Var(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Token {
    Int(BigInt),
    Ident(String),
    Op(char),
}

fn tokenize(text: &str) -> Result<Vec<(usize, Token)>> {
    let mut out = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let n: BigInt = text[start..i].parse().expect("digits");
            out.push((start, Token::Int(n)));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            i += 1;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            out.push((start, Token::Ident(text[start..i].to_string())));
        } else if "+-*/^()".contains(c) {
            out.push((i, Token::Op(c)));
            i += 1;
        } else {
            return Err(Error::Syntax {
                pos: i,
                msg: format!("unexpected character '{c}'"),
            });
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    at: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.at).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.tokens.get(self.at).map_or(self.end, |(p, _)| *p)
    }

    fn error<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Syntax {
            pos: self.pos(),
            msg: msg.into(),
        })
    }

    fn eat(&mut self, op: char) -> bool {
        if self.peek() == Some(&Token::Op(op)) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else if matches!(self.peek(), Some(Token::Ident(_)) | Some(Token::Op('('))) {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat('-') {
            Ok(Expr::Neg(Box::new(self.unary()?)))
        } else {
            self.factor()
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        let base = self.base()?;
        if !self.eat('^') {
            return Ok(base);
        }
        match self.peek().cloned() {
            Some(Token::Int(n)) => {
                let exp = u32::try_from(&n)
                    .ok()
                    .filter(|&e| e <= MAX_EXPONENT)
                    .map_or_else(|| self.error(format!("exponent above {MAX_EXPONENT}")), Ok)?;
                self.at += 1;
                Ok(Expr::Pow(Box::new(base), exp))
            }
            _ => self.error("expected a nonnegative integer exponent"),
        }
    }

    fn base(&mut self) -> Result<Expr> {
        match self.peek().cloned() {
            Some(Token::Int(n)) => {
                self.at += 1;
                Ok(Expr::Int(n))
            }
            Some(Token::Ident(name)) => {
                self.at += 1;
                Ok(Expr::Var(name))
            }
            Some(Token::Op('(')) => {
                self.at += 1;
                let inner = self.expr()?;
                if !self.eat(')') {
                    return self.error("expected ')'");
                }
                Ok(inner)
            }
            Some(_) => self.error("expected a number, a variable or '('"),
            None => self.error("unexpected end of input"),
        }
    }
}

pub fn parse_expr(text: &str) -> Result<Expr> {
    if text.trim().is_empty() {
        return Err(Error::Syntax {
            pos: 0,
            msg: "empty expression".into(),
        });
    }
    let mut parser = Parser {
        tokens: tokenize(text)?,
        at: 0,
        end: text.len(),
    };
    let e = parser.expr()?;
    if parser.at < parser.tokens.len() {
        return parser.error("unexpected trailing input");
    }
    Ok(e)
}

impl Expr {
    /// Evaluate with `var` supplying the value of each identifier.
    fn lower<T, V, C>(&self, var: &V, constant: &C, ops: &Ops<T>) -> Result<T>
    where
        V: Fn(&str) -> Result<T>,
        C: Fn(&BigInt) -> T,
    {
        let rec = |e: &Expr| e.lower(var, constant, ops);
        Ok(match self {
            Expr::Int(n) => constant(n),
            Expr::Var(name) => var(name)?,
            Expr::Neg(a) => (ops.neg)(&rec(a)?),
            Expr::Add(a, b) => (ops.add)(&rec(a)?, &rec(b)?),
            Expr::Sub(a, b) => (ops.sub)(&rec(a)?, &rec(b)?),
            Expr::Mul(a, b) => (ops.mul)(&rec(a)?, &rec(b)?),
            Expr::Div(a, b) => (ops.div)(&rec(a)?, &rec(b)?)?,
            Expr::Pow(a, k) => (ops.pow)(&rec(a)?, *k),
        })
    }

    pub fn to_rational(&self) -> Result<RationalFunction> {
        let ops = Ops {
            neg: RationalFunction::neg,
            add: RationalFunction::add,
            sub: RationalFunction::sub,
            mul: RationalFunction::mul,
            div: RationalFunction::div,
            pow: RationalFunction::pow,
        };
        self.lower(
            &|name: &str| match name {
                "p" => Ok(RationalFunction::var()),
                _ => Err(Error::UnknownName(name.to_string())),
            },
            &|n: &BigInt| RationalFunction::from_poly(IntPolynomial::constant(n.clone())),
            &ops,
        )
    }

    /// Lower over the simplex of `nvars` letters. `p1..ps` name the letter
    /// probabilities; for two letters `p` also means `p2` and `q` means `p1`.
    pub fn to_multi(&self, nvars: usize) -> Result<MultiRational> {
        let ops = Ops {
            neg: MultiRational::neg,
            add: MultiRational::add,
            sub: MultiRational::sub,
            mul: MultiRational::mul,
            div: MultiRational::div,
            pow: MultiRational::pow,
        };
        let var = |name: &str| {
            let index = match name {
                "p" if nvars == 2 => Some(1),
                "q" if nvars == 2 => Some(0),
                _ => name
                    .strip_prefix('p')
                    .and_then(|d| d.parse::<usize>().ok())
                    .filter(|&i| (1..=nvars).contains(&i))
                    .map(|i| i - 1),
            };
            index
                .map(|i| {
                    MultiRational::new(MultiPoly::var(nvars, i), MultiPoly::one(nvars))
                        .expect("nonzero denominator")
                })
                .ok_or_else(|| Error::UnknownName(name.to_string()))
        };
        self.lower(
            &var,
            &|n: &BigInt| {
                MultiRational::new(MultiPoly::constant(nvars, n.clone()), MultiPoly::one(nvars))
                    .expect("nonzero denominator")
            },
            &ops,
        )
    }

    /// Bivariate relation in `p` (variable 0) and `f` (variable 1). A
    /// quotient is replaced by its numerator, which has the same zeros away
    /// from poles.
    pub fn to_relation(&self) -> Result<MultiPoly> {
        let ops = Ops {
            neg: MultiRational::neg,
            add: MultiRational::add,
            sub: MultiRational::sub,
            mul: MultiRational::mul,
            div: MultiRational::div,
            pow: MultiRational::pow,
        };
        let var = |name: &str| {
            let i = match name {
                "p" => 0,
                "f" => 1,
                _ => return Err(Error::UnknownName(name.to_string())),
            };
            Ok(MultiRational::new(MultiPoly::var(2, i), MultiPoly::one(2)).expect("nonzero"))
        };
        let r = self.lower(
            &var,
            &|n: &BigInt| {
                MultiRational::new(MultiPoly::constant(2, n.clone()), MultiPoly::one(2)).expect("nonzero")
            },
            &ops,
        )?;
        Ok(r.num().clone())
    }
}

struct Ops<T> {
    neg: fn(&T) -> T,
    add: fn(&T, &T) -> T,
    sub: fn(&T, &T) -> T,
    mul: fn(&T, &T) -> T,
    div: fn(&T, &T) -> Result<T>,
    pow: fn(&T, u32) -> T,
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Int(n) => write!(f, "{n}"),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Neg(a) => write!(f, "-({a})"),
            Expr::Add(a, b) => write!(f, "({a}+{b})"),
            Expr::Sub(a, b) => write!(f, "({a}-{b})"),
            Expr::Mul(a, b) => write!(f, "({a}*{b})"),
            Expr::Div(a, b) => write!(f, "({a}/{b})"),
            Expr::Pow(a, k) => write!(f, "({a})^{k}"),
        }
    }
}

pub fn parse_rational(text: &str) -> Result<RationalFunction> {
    parse_expr(text)?.to_rational()
}

pub fn parse_multi(text: &str, nvars: usize) -> Result<MultiRational> {
    parse_expr(text)?.to_multi(nvars)
}

pub fn parse_relation(text: &str) -> Result<MultiPoly> {
    parse_expr(text)?.to_relation()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rf(num: &[i64], den: &[i64]) -> RationalFunction {
        RationalFunction::new(IntPolynomial::from_i64s(num), IntPolynomial::from_i64s(den)).unwrap()
    }

    #[test]
    fn examples() {
        assert_eq!(parse_rational("1/2").unwrap(), RationalFunction::from_ints(1, 2));
        assert_eq!(
            parse_rational("p^2/(p^2+(1-p)^2)").unwrap(),
            rf(&[0, 0, 1], &[1, -2, 2])
        );
        let f = parse_rational("(3*p^2-3*p+1)/2").unwrap();
        assert_eq!(f.num(), &IntPolynomial::from_i64s(&[1, -3, 3]));
        assert_eq!(f.den(), &IntPolynomial::from_i64s(&[2]));
    }

    #[test]
    fn implicit_products_and_unary_minus() {
        assert_eq!(parse_rational("2p(1-p)").unwrap(), rf(&[0, 2, -2], &[1]));
        assert_eq!(parse_rational("-p+1").unwrap(), rf(&[1, -1], &[1]));
        assert_eq!(parse_rational("--p").unwrap(), RationalFunction::var());
        assert_eq!(parse_rational("2^3").unwrap(), RationalFunction::from_ints(8, 1));
    }

    #[test]
    fn errors() {
        assert!(matches!(
            parse_rational("1/(p-p)"),
            Err(Error::DivisionByZeroPolynomial)
        ));
        assert!(matches!(parse_rational("1 +"), Err(Error::Syntax { pos: 3, .. })));
        assert!(matches!(parse_rational("(p"), Err(Error::Syntax { .. })));
        assert!(matches!(
            parse_rational("p $ 2"),
            Err(Error::Syntax { pos: 2, .. })
        ));
        assert!(matches!(parse_rational("p^p"), Err(Error::Syntax { pos: 2, .. })));
        assert!(matches!(parse_rational(""), Err(Error::Syntax { pos: 0, .. })));
        assert!(matches!(parse_rational("x"), Err(Error::UnknownName(_))));
        assert!(matches!(parse_rational("p^99999"), Err(Error::Syntax { .. })));
    }

    #[test]
    fn multivariate() {
        let f = parse_multi("p1*p2 + p3^2", 3).unwrap();
        assert_eq!(f.num().coeff(&[1, 1, 0]), BigInt::from(1));
        assert!(matches!(parse_multi("p4", 3), Err(Error::UnknownName(_))));
        let g = parse_multi("(1-p)/2", 2).unwrap();
        let h = MultiRational::from_univariate(&rf(&[1, -1], &[2]));
        assert!(g.equal_on_simplex(&h));
    }

    #[test]
    fn multivariate_print_parse() {
        let f = parse_multi("(p1^2-3*p1*p2+7)/(2*p3+1)", 3).unwrap();
        let g = parse_multi(&f.to_string(), 3).unwrap();
        assert_eq!(g.num(), f.num());
        assert_eq!(g.den(), f.den());
        assert_eq!(parse_multi("-p1+1", 2).unwrap().to_string(), "-p1+1");
    }

    #[test]
    fn relation() {
        let r = parse_relation("f^2 - p").unwrap();
        assert_eq!(r.eval_f64(&[0.25, 0.5]), 0.0);
    }

    fn small_poly() -> impl Strategy<Value = IntPolynomial> {
        proptest::collection::vec(-20i64..20, 1..5).prop_map(|c| IntPolynomial::from_i64s(&c))
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(num in small_poly(), den in small_poly()) {
            prop_assume!(!den.is_zero());
            let f = RationalFunction::new(num, den).unwrap();
            prop_assert_eq!(parse_rational(&f.to_string()).unwrap(), f);
        }
    }
}
