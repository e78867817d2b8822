//! Expression grammar for exact inputs. ASCII only, `*` explicit, `^` for
//! powers, `i` and `tau` as literals, `x`, `y`, `z` as variables. Division is
//! allowed when the divisor is a constant.

use crate::error::{EngineError, Result};
use crate::jet::Jet2;
use crate::polyxyz::PolyXYZ;
use crate::scalar::{Scalar, TauPoly};

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

#[derive(Clone, PartialEq, Debug)]
enum Tok {
    Int(i64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src: src.as_bytes(), pos: 0 }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn next(&mut self) -> Result<(Tok, usize)> {
        self.skip_ws();
        let start = self.pos;
        if self.pos >= self.src.len() {
            return Ok((Tok::End, start));
        }
        let c = self.src[self.pos];
        let tok = match c {
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'0'..=b'9' => {
                let mut end = self.pos;
                while end < self.src.len() && self.src[end].is_ascii_digit() {
                    end += 1;
                }
                let text = std::str::from_utf8(&self.src[self.pos..end]).unwrap();
                let n = text.parse().map_err(|_| EngineError::Parse {
                    pos: start,
                    msg: format!("integer literal out of range: {text}"),
                })?;
                self.pos = end;
                return Ok((Tok::Int(n), start));
            }
            b'a'..=b'z' | b'A'..=b'Z' => {
                let mut end = self.pos;
                while end < self.src.len() && self.src[end].is_ascii_alphanumeric() {
                    end += 1;
                }
                let text = std::str::from_utf8(&self.src[self.pos..end]).unwrap().to_string();
                self.pos = end;
                return Ok((Tok::Ident(text), start));
            }
            other => {
                return Err(EngineError::Parse {
                    pos: start,
                    msg: format!("unexpected character '{}'", other as char),
                })
            }
        };
        self.pos += 1;
        Ok((tok, start))
    }
}

pub struct Parser {
    toks: Vec<(Tok, usize)>,
    cursor: usize,
}

impl Parser {
    pub fn new(src: &str) -> Result<Self> {
        let mut lexer = Lexer::new(src);
        let mut toks = Vec::new();
        loop {
            let t = lexer.next()?;
            let end = t.0 == Tok::End;
            toks.push(t);
            if end {
                break;
            }
        }
        Ok(Parser { toks, cursor: 0 })
    }

    fn peek(&self) -> &(Tok, usize) {
        &self.toks[self.cursor]
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.cursor].clone();
        if self.cursor + 1 < self.toks.len() {
            self.cursor += 1;
        }
        t
    }

    fn expr(&mut self) -> Result<PolyXYZ> {
        let mut acc = self.term()?;
        loop {
            match self.peek().0 {
                Tok::Plus => {
                    self.bump();
                    acc = acc.add(&self.term()?);
                }
                Tok::Minus => {
                    self.bump();
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<PolyXYZ> {
        let mut acc = self.factor()?;
        loop {
            match self.peek().0 {
                Tok::Star => {
                    self.bump();
                    acc = acc.mul(&self.factor()?);
                }
                Tok::Slash => {
                    let (_, pos) = self.bump();
                    let rhs = self.factor()?;
                    if !rhs.is_constant() {
                        return Err(EngineError::Parse {
                            pos,
                            msg: "division by a non-constant expression".into(),
                        });
                    }
                    let c = rhs.coeff(0, 0, 0);
                    if c.is_zero() {
                        return Err(EngineError::Parse { pos, msg: "division by zero".into() });
                    }
                    acc = acc.scale(&c.inv()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<PolyXYZ> {
        let base = self.atom()?;
        if self.peek().0 == Tok::Caret {
            let (_, pos) = self.bump();
            match self.bump() {
                (Tok::Int(n), _) if n >= 0 => Ok(base.pow(n as u32)),
                _ => Err(EngineError::Parse {
                    pos,
                    msg: "exponent must be a nonnegative integer".into(),
                }),
            }
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<PolyXYZ> {
        match self.bump() {
            (Tok::Int(n), _) => Ok(PolyXYZ::constant(Scalar::from_int(n))),
            (Tok::Minus, _) => Ok(self.factor()?.neg()),
            (Tok::Ident(name), pos) => match name.as_str() {
                "x" => Ok(PolyXYZ::var(0)),
                "y" => Ok(PolyXYZ::var(1)),
                "z" => Ok(PolyXYZ::var(2)),
                "i" => Ok(PolyXYZ::constant(Scalar::i())),
                "tau" => Ok(PolyXYZ::constant(Scalar::tau())),
                other => Err(EngineError::Parse {
                    pos,
                    msg: format!("unknown symbol '{other}' (expected x, y, z, i or tau)"),
                }),
            },
            (Tok::LParen, pos) => {
                let inner = self.expr()?;
                match self.bump() {
                    (Tok::RParen, _) => Ok(inner),
                    _ => Err(EngineError::Parse { pos, msg: "unclosed parenthesis".into() }),
                }
            }
            (tok, pos) => {
                Err(EngineError::Parse { pos, msg: format!("unexpected token {tok:?}") })
            }
        }
    }
}

/// Parse a polynomial expression in `x, y, z` (constants may use `i`, `tau`).
pub fn parse_poly(src: &str) -> Result<PolyXYZ> {
    let mut p = Parser::new(src)?;
    let out = p.expr()?;
    match p.bump() {
        (Tok::End, _) => Ok(out),
        (tok, pos) => Err(EngineError::Parse { pos, msg: format!("trailing token {tok:?}") }),
    }
}

/// Parse a constant expression into a `Scalar`.
pub fn parse_scalar(src: &str) -> Result<Scalar> {
    let p = parse_poly(src)?;
    if !p.is_constant() {
        return Err(EngineError::Parse { pos: 0, msg: "expected a constant expression".into() });
    }
    Ok(p.coeff(0, 0, 0))
}

/// Parse a constant expression that must be a polynomial in `tau` (the jet
/// JSON num/den fields).
pub fn parse_tau_poly(src: &str) -> Result<TauPoly> {
    let s = parse_scalar(src)?;
    if s.denominator() != &TauPoly::one() {
        return Err(EngineError::Parse {
            pos: 0,
            msg: "expected a tau-polynomial, found a rational function".into(),
        });
    }
    Ok(s.numerator().clone())
}

/// Parse a `z`-free polynomial in `x, y` into a jet at the given truncation.
pub fn parse_jet(src: &str, trunc: u32) -> Result<Jet2> {
    let p = parse_poly(src)?;
    p.to_jet(trunc).ok_or_else(|| EngineError::Parse {
        pos: 0,
        msg: "expression must not mention z".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_example_vector_field_component() {
        let p = parse_poly("x*(1+x^2*y*z^3)").unwrap();
        assert_eq!(p.coeff(1, 0, 0), Scalar::one());
        assert_eq!(p.coeff(3, 1, 3), Scalar::one());
        assert!(p.coeff(0, 0, 0).is_zero());
    }

    #[test]
    fn parses_scalars_with_i_and_tau() {
        let s = parse_scalar("1/2 - 3*i + 2*tau^2").unwrap();
        let expect = &(&Scalar::from_ratio(1, 2) - &(&Scalar::from_int(3) * &Scalar::i()))
            + &(&Scalar::from_int(2) * &Scalar::tau().pow(2));
        assert_eq!(s, expect);
    }

    #[test]
    fn tau_poly_display_round_trips() {
        let s = &(&Scalar::from_ratio(-3, 4) * &Scalar::tau().pow(2))
            + &(&Scalar::i() * &Scalar::tau());
        let text = s.numerator().to_string();
        assert_eq!(parse_tau_poly(&text).unwrap(), *s.numerator());
    }

    #[test]
    fn reports_position_on_error() {
        let err = parse_poly("x + $").unwrap_err();
        match err {
            EngineError::Parse { pos, .. } => assert_eq!(pos, 4),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn rejects_nonconstant_division() {
        assert!(parse_poly("1/x").is_err());
        assert!(parse_poly("x/2").is_ok());
    }
}
