// SPDX-License-Identifier: Apache-2.0

//! Expression grammar used by gate definition files.
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := '-' unary | atom
//! atom  := number | 'i' | 'pi' | 'sqrt2' | var | func '(' expr ')' | '(' expr ')'
//! var   := ('a' | 'p') digits
//! func  := 'cos' | 'sin' | 'exp'
//! ```
//!
//! `pi` and variables may only appear inside function arguments, and the
//! argument must be linear (for `exp`, `i` times a linear form). Division is
//! allowed only by constants.

use num_traits::{One, Zero};

use super::{Exact, Lin, Rational, SymError, SymExpr};

#[derive(Clone, Debug)]
enum Ast {
    Num(Rational),
    I,
    Pi,
    Sqrt2,
    Var(usize),
    Neg(Box<Ast>),
    Add(Box<Ast>, Box<Ast>),
    Sub(Box<Ast>, Box<Ast>),
    Mul(Box<Ast>, Box<Ast>),
    Div(Box<Ast>, Box<Ast>),
    Call(String, Box<Ast>, usize),
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T, SymError> {
        Err(SymError::Parse { pos: self.pos, msg: msg.into() })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> Result<(), SymError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected '{}'", c as char))
        }
    }

    fn expr(&mut self) -> Result<Ast, SymError> {
        let mut lhs = self.term()?;
        while let Some(c) = self.peek() {
            match c {
                b'+' => {
                    self.pos += 1;
                    lhs = Ast::Add(Box::new(lhs), Box::new(self.term()?));
                }
                b'-' => {
                    self.pos += 1;
                    lhs = Ast::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => break,
            }
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Ast, SymError> {
        let mut lhs = self.unary()?;
        while let Some(c) = self.peek() {
            match c {
                b'*' => {
                    self.pos += 1;
                    lhs = Ast::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                b'/' => {
                    self.pos += 1;
                    lhs = Ast::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => break,
            }
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Ast, SymError> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(Ast::Neg(Box::new(self.unary()?)));
        }
        if self.peek() == Some(b'+') {
            self.pos += 1;
            return self.unary();
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Ast, SymError> {
        let Some(c) = self.peek() else {
            return self.err("unexpected end of input");
        };
        if c == b'(' {
            self.pos += 1;
            let e = self.expr()?;
            self.expect(b')')?;
            return Ok(e);
        }
        if c.is_ascii_digit() || c == b'.' {
            return self.number();
        }
        if c.is_ascii_alphabetic() {
            let start = self.pos;
            while self.pos < self.src.len()
                && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
            {
                self.pos += 1;
            }
            let word = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
            return match word {
                "i" => Ok(Ast::I),
                "pi" => Ok(Ast::Pi),
                "sqrt2" => Ok(Ast::Sqrt2),
                "cos" | "sin" | "exp" => {
                    let at = start;
                    self.expect(b'(')?;
                    let arg = self.expr()?;
                    self.expect(b')')?;
                    Ok(Ast::Call(word.to_string(), Box::new(arg), at))
                }
                w if (w.starts_with('a') || w.starts_with('p'))
                    && w.len() > 1
                    && w[1..].bytes().all(|b| b.is_ascii_digit()) =>
                {
                    Ok(Ast::Var(w[1..].parse().map_err(|_| SymError::Parse {
                        pos: start,
                        msg: "variable index out of range".into(),
                    })?))
                }
                _ => Err(SymError::Parse { pos: start, msg: format!("unknown identifier '{word}'") }),
            };
        }
        self.err(format!("unexpected character '{}'", c as char))
    }

    fn number(&mut self) -> Result<Ast, SymError> {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_digit() || self.src[self.pos] == b'.')
        {
            self.pos += 1;
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        match parse_decimal(text) {
            Some(r) => Ok(Ast::Num(r)),
            None => Err(SymError::Parse { pos: start, msg: format!("bad number '{text}'") }),
        }
    }
}

/// Exact value of a decimal literal such as `12`, `0.25` or `.5`.
pub(crate) fn parse_decimal(text: &str) -> Option<Rational> {
    let (int, frac) = match text.split_once('.') {
        Some((a, b)) => (a, b),
        None => (text, ""),
    };
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if frac.len() > 30 || int.len() > 30 {
        return None;
    }
    let digits = format!("{int}{frac}");
    let n: i128 = if digits.is_empty() { 0 } else { digits.parse().ok()? };
    Some(Rational::new(n, 10i128.pow(frac.len() as u32)))
}

fn const_value(a: &Ast) -> Option<Exact> {
    Some(match a {
        Ast::Num(r) => Exact::from_rational(*r),
        Ast::I => Exact::i(),
        Ast::Sqrt2 => Exact::sqrt2(),
        Ast::Neg(x) => -&const_value(x)?,
        Ast::Add(x, y) => &const_value(x)? + &const_value(y)?,
        Ast::Sub(x, y) => &const_value(x)? - &const_value(y)?,
        Ast::Mul(x, y) => &const_value(x)? * &const_value(y)?,
        Ast::Div(x, y) => &const_value(x)? * &const_value(y)?.inverse()?,
        _ => return None,
    })
}

fn rational_value(a: &Ast) -> Option<Rational> {
    const_value(a)?.as_rational()
}

fn to_lin(a: &Ast, pos: usize) -> Result<Lin, SymError> {
    let bad = |m: &str| SymError::Parse { pos, msg: m.to_string() };
    Ok(match a {
        Ast::Num(r) if r.is_zero() => Lin::zero(),
        Ast::Pi => Lin::pi_multiple(Rational::one()),
        Ast::Var(k) => Lin::var(*k),
        Ast::Neg(x) => to_lin(x, pos)?.neg(),
        Ast::Add(x, y) => to_lin(x, pos)?.add(&to_lin(y, pos)?),
        Ast::Sub(x, y) => to_lin(x, pos)?.add(&to_lin(y, pos)?.neg()),
        Ast::Mul(x, y) => {
            if let Some(r) = rational_value(x) {
                to_lin(y, pos)?.scale(&r)
            } else if let Some(r) = rational_value(y) {
                to_lin(x, pos)?.scale(&r)
            } else {
                return Err(bad("angle is not linear"));
            }
        }
        Ast::Div(x, y) => match rational_value(y) {
            Some(r) if !r.is_zero() => to_lin(x, pos)?.scale(&(Rational::one() / r)),
            _ => return Err(bad("angle divided by a non-rational")),
        },
        _ => return Err(bad("angles must be linear in variables and pi")),
    })
}

/// `r` when `a` is the constant `r·i` with rational `r`.
fn imaginary_rational(a: &Ast) -> Option<Rational> {
    let c = const_value(a)?;
    if c.re.is_zero() && c.im.b.is_zero() && !c.im.a.is_zero() {
        Some(c.im.a)
    } else {
        None
    }
}

/// Reads `a` as `i·L` for a linear form `L`.
fn to_i_lin(a: &Ast, pos: usize) -> Result<Lin, SymError> {
    let bad = || SymError::Parse { pos, msg: "exp argument must be i times a linear angle".into() };
    Ok(match a {
        Ast::Neg(x) => to_i_lin(x, pos)?.neg(),
        Ast::Add(x, y) => to_i_lin(x, pos)?.add(&to_i_lin(y, pos)?),
        Ast::Sub(x, y) => to_i_lin(x, pos)?.add(&to_i_lin(y, pos)?.neg()),
        Ast::Mul(x, y) => match (imaginary_rational(x), imaginary_rational(y)) {
            (Some(r), _) => to_lin(y, pos)?.scale(&r),
            (_, Some(r)) => to_lin(x, pos)?.scale(&r),
            _ => {
                if let Some(r) = rational_value(x) {
                    to_i_lin(y, pos)?.scale(&r)
                } else if let Some(r) = rational_value(y) {
                    to_i_lin(x, pos)?.scale(&r)
                } else {
                    return Err(bad());
                }
            }
        },
        Ast::Div(x, y) => match rational_value(y) {
            Some(r) if !r.is_zero() => to_i_lin(x, pos)?.scale(&(Rational::one() / r)),
            _ => return Err(bad()),
        },
        _ => return Err(bad()),
    })
}

fn to_sym(a: &Ast) -> Result<SymExpr, SymError> {
    if let Some(c) = const_value(a) {
        return Ok(SymExpr::Num(c));
    }
    Ok(match a {
        Ast::Var(k) => SymExpr::Var(*k),
        Ast::Pi => {
            return Err(SymError::Parse { pos: 0, msg: "pi is only allowed inside angles".into() })
        }
        Ast::Neg(x) => SymExpr::negated(to_sym(x)?),
        Ast::Add(x, y) => SymExpr::plus(to_sym(x)?, to_sym(y)?),
        Ast::Sub(x, y) => SymExpr::plus(to_sym(x)?, SymExpr::negated(to_sym(y)?)),
        Ast::Mul(x, y) => SymExpr::times(to_sym(x)?, to_sym(y)?),
        Ast::Div(x, y) => match const_value(y).and_then(|c| c.inverse()) {
            Some(inv) => SymExpr::times(to_sym(x)?, SymExpr::Num(inv)),
            None => {
                return Err(SymError::Parse { pos: 0, msg: "division by a non-constant".into() })
            }
        },
        Ast::Call(f, arg, pos) => match f.as_str() {
            "cos" => SymExpr::Cos(to_lin(arg, *pos)?),
            "sin" => SymExpr::Sin(to_lin(arg, *pos)?),
            _ => SymExpr::ExpI(to_i_lin(arg, *pos)?),
        },
        Ast::Num(_) | Ast::I | Ast::Sqrt2 => unreachable!("constants handled above"),
    })
}

/// Parses an expression in the grammar above. Both `a<k>` and `p<k>` name
/// variable `k`.
pub fn parse_expr(text: &str) -> Result<SymExpr, SymError> {
    let mut p = Parser { src: text.as_bytes(), pos: 0 };
    let ast = p.expr()?;
    if p.peek().is_some() {
        return p.err("trailing input");
    }
    to_sym(&ast)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimals_are_exact() {
        assert_eq!(parse_decimal("0.25"), Some(Rational::new(1, 4)));
        assert_eq!(parse_decimal(".5"), Some(Rational::new(1, 2)));
        assert_eq!(parse_decimal("3"), Some(Rational::from_integer(3)));
        assert_eq!(parse_decimal("."), None);
    }

    #[test]
    fn exp_with_negative_half_angle() {
        let e = parse_expr("exp(-i*a0/2)").unwrap();
        let want = Lin::var(0).scale(&Rational::new(-1, 2));
        assert_eq!(e, SymExpr::ExpI(want));
    }

    #[test]
    fn sum_inside_exp() {
        let e = parse_expr("exp(i*(a0+a1))").unwrap();
        assert_eq!(e, SymExpr::ExpI(Lin::var(0).add(&Lin::var(1))));
    }

    #[test]
    fn constants_fold() {
        let e = parse_expr("-1/sqrt2").unwrap();
        let v = e.eval(&[]).unwrap();
        assert!((v.re + std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn rejects_nonlinear_angle() {
        assert!(parse_expr("cos(a0*a1)").is_err());
        assert!(parse_expr("exp(a0)").is_err());
        assert!(parse_expr("pi").is_err());
        assert!(parse_expr("cos(a0").is_err());
        assert!(parse_expr("foo").is_err());
    }

    #[test]
    fn error_carries_position() {
        match parse_expr("1 + $") {
            Err(SymError::Parse { pos, .. }) => assert_eq!(pos, 4),
            other => panic!("unexpected {other:?}"),
        }
    }
}
