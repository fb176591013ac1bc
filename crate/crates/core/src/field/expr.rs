//! Recursive-descent parser for parameter expressions:
//! `+ - * /`, integer powers, parentheses, integer and decimal literals and
//! generator names.

use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::Zero;
use thiserror::Error;

use super::{ContextExt, ParamValue, ParameterContext, Rational, UPoly};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("column {column}: {message}")]
pub struct ExprError {
    /// 1-based character column within the expression.
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(Rational),
    Name(String),
    Op(char),
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ExprError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            out.push((Tok::Num(parse_decimal(&text, col)?), col));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((Tok::Name(chars[start..i].iter().collect()), col));
        } else if "+-*/^()".contains(c) {
            out.push((Tok::Op(c), col));
            i += 1;
        } else {
            return Err(ExprError {
                column: col,
                message: format!("unexpected character '{c}'"),
            });
        }
    }
    Ok(out)
}

fn parse_decimal(text: &str, column: usize) -> Result<Rational, ExprError> {
    let bad = || ExprError {
        column,
        message: format!("malformed number '{text}'"),
    };
    let (int, frac) = match text.split_once('.') {
        Some((a, b)) => (a, b),
        None => (text, ""),
    };
    if (int.is_empty() && frac.is_empty()) || frac.contains('.') {
        return Err(bad());
    }
    let digits = format!("{int}{frac}");
    let n: BigInt = digits.parse().map_err(|_| bad())?;
    let d = num_traits::pow(BigInt::from(10), frac.len());
    Ok(Rational::new(n, d))
}

struct Parser<'a> {
    ctx: &'a Arc<ParameterContext>,
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end_col: usize,
}

impl Parser<'_> {
    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |t| t.1)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError {
            column: self.col(),
            message: message.into(),
        })
    }

    fn peek_op(&self) -> Option<char> {
        match self.toks.get(self.pos) {
            Some((Tok::Op(c), _)) => Some(*c),
            _ => None,
        }
    }

    fn expr(&mut self) -> Result<ParamValue, ExprError> {
        let mut acc = self.term()?;
        while let Some(op @ ('+' | '-')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.term()?;
            acc = if op == '+' { &acc + &rhs } else { &acc - &rhs };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<ParamValue, ExprError> {
        let mut acc = self.unary()?;
        while let Some(op @ ('*' | '/')) = self.peek_op() {
            self.pos += 1;
            let col = self.col();
            let rhs = self.unary()?;
            acc = if op == '*' {
                &acc * &rhs
            } else {
                acc.checked_div(&rhs).map_err(|_| ExprError {
                    column: col,
                    message: "division by zero".into(),
                })?
            };
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<ParamValue, ExprError> {
        match self.peek_op() {
            Some('-') => {
                self.pos += 1;
                Ok(-self.unary()?)
            }
            Some('+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<ParamValue, ExprError> {
        let base = self.atom()?;
        if self.peek_op() != Some('^') {
            return Ok(base);
        }
        self.pos += 1;
        let negative = if self.peek_op() == Some('-') {
            self.pos += 1;
            true
        } else {
            false
        };
        let col = self.col();
        let e = match self.toks.get(self.pos) {
            Some((Tok::Num(q), _)) if q.is_integer() => q.to_integer(),
            _ => return self.err("exponent must be an integer literal"),
        };
        self.pos += 1;
        let e: u32 = e.try_into().ok().filter(|e| *e <= 64).ok_or(ExprError {
            column: col,
            message: "exponent too large".into(),
        })?;
        let p = base.pow(e);
        if negative {
            p.recip().map_err(|_| ExprError {
                column: col,
                message: "division by zero".into(),
            })
        } else {
            Ok(p)
        }
    }

    fn atom(&mut self) -> Result<ParamValue, ExprError> {
        let Some((tok, col)) = self.toks.get(self.pos).cloned() else {
            return self.err("unexpected end of expression");
        };
        self.pos += 1;
        match tok {
            Tok::Num(q) => Ok(self.ctx.rational(q)),
            Tok::Name(n) => self.ctx.generator(&n).ok_or(ExprError {
                column: col,
                message: format!("unknown parameter '{n}'"),
            }),
            Tok::Op('(') => {
                let v = self.expr()?;
                if self.peek_op() != Some(')') {
                    return self.err("expected ')'");
                }
                self.pos += 1;
                Ok(v)
            }
            Tok::Op(c) => {
                self.pos -= 1;
                self.err(format!("unexpected '{c}'"))
            }
        }
    }
}

/// Parses an expression over the generators of `ctx`.
pub fn parse_expr(ctx: &Arc<ParameterContext>, src: &str) -> Result<ParamValue, ExprError> {
    let toks = lex(src)?;
    if toks.is_empty() {
        return Err(ExprError {
            column: 1,
            message: "empty expression".into(),
        });
    }
    let mut p = Parser {
        ctx,
        toks,
        pos: 0,
        end_col: src.chars().count() + 1,
    };
    let v = p.expr()?;
    if p.pos < p.toks.len() {
        return p.err("unexpected trailing input");
    }
    Ok(v)
}

/// Parses a univariate polynomial with rational coefficients in `var`.
pub fn parse_univariate(src: &str, var: &str) -> Result<UPoly, ExprError> {
    let ctx = ParameterContext::builder()
        .generic_unbounded(var, Rational::zero())
        .build()
        .map_err(|e| ExprError {
            column: 1,
            message: e.to_string(),
        })?;
    let v = parse_expr(&ctx, src)?;
    let not_poly = || ExprError {
        column: 1,
        message: format!("not a polynomial in {var}"),
    };
    if !v.den.as_constant().is_some_and(|c| c.is_one()) {
        return Err(not_poly());
    }
    let deg = v.num.terms.keys().map(|m| m.0[0]).max().unwrap_or(0) as usize;
    let mut coeffs = vec![Rational::zero(); deg + 1];
    for (m, c) in &v.num.terms {
        coeffs[m.0[0] as usize] = c.as_rational().ok_or_else(not_poly)?.clone();
    }
    Ok(UPoly::new(coeffs))
}
