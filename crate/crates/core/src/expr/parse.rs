//! Recursive-descent parser.
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := base ('^' factor)?
//! base   := number | 'x' | 't' | ident | ident '(' expr (',' expr)* ')'
//!         | '(' expr ')' | '-' base
//! ```

use super::{Expr, Func};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown function `{name}` at byte {offset}")]
    UnknownFunction { name: String, offset: usize },
    #[error("function `{name}` at byte {offset} takes {expected} argument(s), got {found}")]
    WrongArity { name: String, offset: usize, expected: usize, found: usize },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    End,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn syntax(&self, offset: usize, message: impl Into<String>) -> ParseError {
        ParseError::Syntax { offset, message: message.into() }
    }

    fn tokenize(mut self) -> Result<Vec<(Tok, usize)>, ParseError> {
        let mut out = Vec::new();
        loop {
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
            let start = self.pos;
            let Some(&c) = self.src.get(self.pos) else {
                out.push((Tok::End, start));
                return Ok(out);
            };
            let tok = match c {
                b'+' => Tok::Plus,
                b'-' => Tok::Minus,
                b'*' => Tok::Star,
                b'/' => Tok::Slash,
                b'^' => Tok::Caret,
                b'(' => Tok::LParen,
                b')' => Tok::RParen,
                b',' => Tok::Comma,
                b'0'..=b'9' | b'.' => {
                    let v = self.number()?;
                    out.push((Tok::Num(v), start));
                    continue;
                }
                c if c.is_ascii_alphabetic() || c == b'_' => {
                    while self.pos < self.src.len()
                        && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                    {
                        self.pos += 1;
                    }
                    let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                    out.push((Tok::Ident(name.to_string()), start));
                    continue;
                }
                _ => {
                    let ch = std::str::from_utf8(&self.src[start..])
                        .ok()
                        .and_then(|s| s.chars().next())
                        .unwrap_or('?');
                    return Err(self.syntax(start, format!("unexpected character `{ch}`")));
                }
            };
            self.pos += 1;
            out.push((tok, start));
        }
    }

    fn number(&mut self) -> Result<f64, ParseError> {
        let start = self.pos;
        let digits = |s: &mut Self| {
            let from = s.pos;
            while s.pos < s.src.len() && s.src[s.pos].is_ascii_digit() {
                s.pos += 1;
            }
            s.pos - from
        };
        let mut n = digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            n += digits(self);
        }
        if n == 0 {
            return Err(self.syntax(start, "malformed number"));
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                // `2e` followed by something else: not an exponent
                self.pos = mark;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        let v: f64 = text.parse().map_err(|_| self.syntax(start, "malformed number"))?;
        if !v.is_finite() {
            return Err(self.syntax(start, "number out of range"));
        }
        Ok(v)
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(ParseError::Syntax { offset: self.offset(), message: format!("expected {what}") })
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = Expr::Add(vec![lhs, self.term()?]);
                }
                Tok::Minus => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    lhs = Expr::Mul(vec![lhs, self.factor()?]);
                }
                Tok::Slash => {
                    self.bump();
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.factor()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let base = self.base()?;
        if *self.peek() == Tok::Caret {
            self.bump();
            let exponent = self.factor()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<Expr, ParseError> {
        let offset = self.offset();
        match self.bump() {
            Tok::Num(v) => Ok(Expr::Num(v)),
            Tok::Minus => Ok(Expr::Neg(Box::new(self.base()?))),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                let is_call = *self.peek() == Tok::LParen;
                match (name.as_str(), is_call) {
                    ("x", false) => Ok(Expr::X),
                    ("t", false) => Ok(Expr::T),
                    ("x" | "t", true) => Err(ParseError::Syntax {
                        offset,
                        message: format!("variable `{name}` cannot be called"),
                    }),
                    (_, true) => {
                        let func = Func::from_name(&name)
                            .ok_or(ParseError::UnknownFunction { name: name.clone(), offset })?;
                        self.bump();
                        let mut args = vec![self.expr()?];
                        while *self.peek() == Tok::Comma {
                            self.bump();
                            args.push(self.expr()?);
                        }
                        self.expect(Tok::RParen, "`)` or `,`")?;
                        if args.len() != func.arity() {
                            return Err(ParseError::WrongArity {
                                name,
                                offset,
                                expected: func.arity(),
                                found: args.len(),
                            });
                        }
                        Ok(Expr::Call(func, args))
                    }
                    (_, false) => {
                        if let Some(func) = Func::from_name(&name) {
                            return Err(ParseError::WrongArity {
                                name,
                                offset,
                                expected: func.arity(),
                                found: 0,
                            });
                        }
                        Ok(Expr::Param(name))
                    }
                }
            }
            Tok::End => Err(ParseError::Syntax { offset, message: "unexpected end of input".into() }),
            tok => Err(ParseError::Syntax { offset, message: format!("unexpected token {tok:?}") }),
        }
    }
}

/// Parse expression text into an [`Expr`].
pub fn parse(source: &str) -> Result<Expr, ParseError> {
    let toks = Lexer { src: source.as_bytes(), pos: 0 }.tokenize()?;
    let mut p = Parser { toks, pos: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(ParseError::Syntax { offset: p.offset(), message: "trailing input".into() });
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Expr {
        Expr::X
    }

    #[test]
    fn power_then_product() {
        assert_eq!(parse("x^2*t").unwrap(), Expr::Mul(vec![x().powi(2), Expr::T]));
    }

    #[test]
    fn elliptic_call_with_negative_modulus() {
        let e = parse("sn(t*x^2/sqrt(8), -1)").unwrap();
        let arg = Expr::Div(
            Box::new(Expr::Mul(vec![Expr::T, x().powi(2)])),
            Box::new(Expr::call(Func::Sqrt, vec![Expr::Num(8.0)])),
        );
        assert_eq!(e, Expr::call(Func::Sn, vec![arg, Expr::Neg(Box::new(Expr::Num(1.0)))]));
    }

    #[test]
    fn parameters_are_identifiers() {
        let e = parse("exp(a*t)").unwrap();
        assert_eq!(e, Expr::call(Func::Exp, vec![Expr::Mul(vec![Expr::param("a"), Expr::T])]));
    }

    #[test]
    fn caret_is_right_associative() {
        let e = parse("x^2^3").unwrap();
        assert_eq!(e, x().pow(Expr::Num(2.0).pow(Expr::Num(3.0))));
    }

    #[test]
    fn unary_minus_binds_tighter_than_caret() {
        let e = parse("-x^2").unwrap();
        assert_eq!(e, Expr::Neg(Box::new(x())).powi(2));
        let e = parse("x^-2").unwrap();
        assert_eq!(e, x().pow(Expr::Neg(Box::new(Expr::Num(2.0)))));
    }

    #[test]
    fn left_associative_sums() {
        let e = parse("x-t-1").unwrap();
        assert_eq!(
            e,
            Expr::Sub(
                Box::new(Expr::Sub(Box::new(x()), Box::new(Expr::T))),
                Box::new(Expr::Num(1.0))
            )
        );
    }

    #[test]
    fn scientific_numbers() {
        assert_eq!(parse("1.5e-3").unwrap(), Expr::Num(1.5e-3));
        assert_eq!(parse(".25").unwrap(), Expr::Num(0.25));
        assert_eq!(parse("2E+2").unwrap(), Expr::Num(200.0));
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        match parse("x + * t") {
            Err(ParseError::Syntax { offset, .. }) => assert_eq!(offset, 4),
            other => panic!("{other:?}"),
        }
        match parse("(x + t") {
            Err(ParseError::Syntax { offset, .. }) => assert_eq!(offset, 6),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse("x $ t"), Err(ParseError::Syntax { offset: 2, .. })));
        assert!(matches!(parse("x t"), Err(ParseError::Syntax { offset: 2, .. })));
        assert!(matches!(parse("1e999"), Err(ParseError::Syntax { .. })));
    }

    #[test]
    fn unknown_function_and_arity() {
        assert_eq!(
            parse("foo(x)"),
            Err(ParseError::UnknownFunction { name: "foo".into(), offset: 0 })
        );
        assert!(matches!(
            parse("sn(x)"),
            Err(ParseError::WrongArity { expected: 2, found: 1, .. })
        ));
        assert!(matches!(
            parse("1 + exp(x, t)"),
            Err(ParseError::WrongArity { offset: 4, expected: 1, found: 2, .. })
        ));
        assert!(matches!(parse("exp"), Err(ParseError::WrongArity { found: 0, .. })));
    }
}
