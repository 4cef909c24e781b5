// SPDX-License-Identifier: Apache-2.0

//! Symbolic complex scalars and matrices.
//!
//! Angles that reach `sin`, `cos` or `exp(i·)` are always linear forms over
//! real variables plus a rational multiple of π ([`Lin`]). Every other
//! constant is exact in Q(√2)(i), so trigonometric elimination
//! ([`normalize_trig`]) never has to approximate.

mod number;
mod parse;
mod poly;

use std::fmt;

use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

pub use number::{Exact, Rational, RealSqrt2};
pub(crate) use number::{ratio_f64, smt_rational};
pub use parse::parse_expr;
pub(crate) use parse::parse_decimal;
pub use poly::{Mono, Poly, TrigBasis};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SymError {
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("variable {0} has no value")]
    Unbound(usize),
    #[error("no exact value for trigonometric constant {0}")]
    NoExactValue(String),
    #[error("variable {0} occurs outside a trigonometric argument")]
    BareVariable(usize),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("angle {angle} is not an integer multiple of the half-angle variable {param}/{denom}")]
    HalfAngle { angle: String, param: usize, denom: u32 },
}

/// `Σ coeff·x_k + pi·π` with rational coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lin {
    /// Sorted by variable index, no zero coefficients.
    pub terms: Vec<(usize, Rational)>,
    pub pi: Rational,
}

impl Lin {
    pub fn zero() -> Self {
        Lin { terms: Vec::new(), pi: Rational::zero() }
    }

    pub fn var(k: usize) -> Self {
        Lin { terms: vec![(k, Rational::one())], pi: Rational::zero() }
    }

    pub fn pi_multiple(r: Rational) -> Self {
        Lin { terms: Vec::new(), pi: r }
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, k: usize) -> Rational {
        self.terms
            .iter()
            .find(|(v, _)| *v == k)
            .map(|(_, c)| *c)
            .unwrap_or_else(Rational::zero)
    }

    pub fn add(&self, other: &Lin) -> Lin {
        let mut terms = self.terms.clone();
        for (k, c) in &other.terms {
            match terms.binary_search_by_key(k, |(v, _)| *v) {
                Ok(i) => terms[i].1 += c,
                Err(i) => terms.insert(i, (*k, *c)),
            }
        }
        terms.retain(|(_, c)| !c.is_zero());
        Lin { terms, pi: self.pi + other.pi }
    }

    pub fn scale(&self, s: &Rational) -> Lin {
        if s.is_zero() {
            return Lin::zero();
        }
        Lin {
            terms: self.terms.iter().map(|(k, c)| (*k, c * s)).collect(),
            pi: self.pi * s,
        }
    }

    pub fn neg(&self) -> Lin {
        self.scale(&-Rational::one())
    }

    /// Substitutes `args[k]` for every variable `x_k`.
    pub fn compose(&self, args: &[Lin]) -> Result<Lin, SymError> {
        let mut out = Lin::pi_multiple(self.pi);
        for (k, c) in &self.terms {
            let a = args.get(*k).ok_or(SymError::Unbound(*k))?;
            out = out.add(&a.scale(c));
        }
        Ok(out)
    }

    pub fn eval(&self, vars: &[f64]) -> Result<f64, SymError> {
        let mut v = ratio_f64(&self.pi) * std::f64::consts::PI;
        for (k, c) in &self.terms {
            v += ratio_f64(c) * vars.get(*k).ok_or(SymError::Unbound(*k))?;
        }
        Ok(v)
    }

    pub fn fmt_with(&self, prefix: &str) -> String {
        let mut parts: Vec<String> = Vec::new();
        for (k, c) in &self.terms {
            parts.push(fmt_scaled(c, &format!("{prefix}{k}")));
        }
        if !self.pi.is_zero() || parts.is_empty() {
            parts.push(fmt_scaled(&self.pi, "pi"));
        }
        let mut s = parts[0].clone();
        for p in &parts[1..] {
            match p.strip_prefix('-') {
                Some(rest) => {
                    s.push_str(" - ");
                    s.push_str(rest);
                }
                None => {
                    s.push_str(" + ");
                    s.push_str(p);
                }
            }
        }
        s
    }
}

fn fmt_scaled(c: &Rational, atom: &str) -> String {
    if c.is_zero() {
        return "0".to_string();
    }
    let sign = if c.is_negative() { "-" } else { "" };
    let n = c.numer().abs();
    let d = c.denom();
    let head = if n == 1 { atom.to_string() } else { format!("{n}*{atom}") };
    if *d == 1 {
        format!("{sign}{head}")
    } else {
        format!("{sign}{head}/{d}")
    }
}

/// `sin(x_param / denom)` or `cos(x_param / denom)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TrigVar {
    pub param: usize,
    pub denom: u32,
    pub cos: bool,
}

impl TrigVar {
    pub fn eval(&self, vars: &[f64]) -> Result<f64, SymError> {
        let x = vars.get(self.param).ok_or(SymError::Unbound(self.param))? / self.denom as f64;
        Ok(if self.cos { x.cos() } else { x.sin() })
    }

    pub fn name(&self) -> String {
        let t = if self.cos { 'c' } else { 's' };
        if self.denom == 1 {
            format!("{t}_p{}", self.param)
        } else {
            format!("{t}_p{}_{}", self.param, self.denom)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SymExpr {
    Num(Exact),
    Var(usize),
    Cos(Lin),
    Sin(Lin),
    ExpI(Lin),
    Trig(TrigVar),
    Add(Vec<SymExpr>),
    Mul(Vec<SymExpr>),
}

impl SymExpr {
    pub fn zero() -> Self {
        SymExpr::Num(Exact::zero())
    }

    pub fn one() -> Self {
        SymExpr::Num(Exact::one())
    }

    pub fn num(e: Exact) -> Self {
        SymExpr::Num(e)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, SymExpr::Num(n) if n.is_zero())
    }

    pub fn is_one(&self) -> bool {
        matches!(self, SymExpr::Num(n) if n.is_one())
    }

    /// Flattened, constant-folded, operand-sorted sum.
    pub fn sum(items: Vec<SymExpr>) -> SymExpr {
        let mut konst = Exact::zero();
        let mut rest = Vec::new();
        for it in items {
            match it {
                SymExpr::Num(n) => konst = &konst + &n,
                SymExpr::Add(v) => {
                    for x in v {
                        match x {
                            SymExpr::Num(n) => konst = &konst + &n,
                            other => rest.push(other),
                        }
                    }
                }
                other => rest.push(other),
            }
        }
        if !konst.is_zero() {
            rest.push(SymExpr::Num(konst));
        }
        rest.sort();
        match rest.len() {
            0 => SymExpr::zero(),
            1 => rest.pop().unwrap(),
            _ => SymExpr::Add(rest),
        }
    }

    /// Flattened, constant-folded, operand-sorted product.
    pub fn product(items: Vec<SymExpr>) -> SymExpr {
        let mut konst = Exact::one();
        let mut rest = Vec::new();
        for it in items {
            match it {
                SymExpr::Num(n) => konst = &konst * &n,
                SymExpr::Mul(v) => {
                    for x in v {
                        match x {
                            SymExpr::Num(n) => konst = &konst * &n,
                            other => rest.push(other),
                        }
                    }
                }
                other => rest.push(other),
            }
        }
        if konst.is_zero() {
            return SymExpr::zero();
        }
        if !konst.is_one() {
            rest.push(SymExpr::Num(konst));
        }
        rest.sort();
        match rest.len() {
            0 => SymExpr::one(),
            1 => rest.pop().unwrap(),
            _ => SymExpr::Mul(rest),
        }
    }

    pub fn plus(a: SymExpr, b: SymExpr) -> SymExpr {
        Self::sum(vec![a, b])
    }

    pub fn times(a: SymExpr, b: SymExpr) -> SymExpr {
        Self::product(vec![a, b])
    }

    pub fn negated(a: SymExpr) -> SymExpr {
        Self::product(vec![SymExpr::Num(Exact::from_integer(-1)), a])
    }

    pub fn eval(&self, vars: &[f64]) -> Result<Complex64, SymError> {
        Ok(match self {
            SymExpr::Num(n) => n.to_c64(),
            SymExpr::Var(k) => Complex64::new(*vars.get(*k).ok_or(SymError::Unbound(*k))?, 0.0),
            SymExpr::Cos(l) => Complex64::new(l.eval(vars)?.cos(), 0.0),
            SymExpr::Sin(l) => Complex64::new(l.eval(vars)?.sin(), 0.0),
            SymExpr::ExpI(l) => Complex64::from_polar(1.0, l.eval(vars)?),
            SymExpr::Trig(t) => Complex64::new(t.eval(vars)?, 0.0),
            SymExpr::Add(v) => {
                let mut s = Complex64::new(0.0, 0.0);
                for x in v {
                    s += x.eval(vars)?;
                }
                s
            }
            SymExpr::Mul(v) => {
                let mut p = Complex64::new(1.0, 0.0);
                for x in v {
                    p *= x.eval(vars)?;
                }
                p
            }
        })
    }

    /// Replaces each variable `x_k` inside angles by `args[k]`.
    pub fn substitute(&self, args: &[Lin]) -> Result<SymExpr, SymError> {
        Ok(match self {
            SymExpr::Num(_) | SymExpr::Trig(_) => self.clone(),
            SymExpr::Var(k) => return Err(SymError::BareVariable(*k)),
            SymExpr::Cos(l) => SymExpr::Cos(l.compose(args)?),
            SymExpr::Sin(l) => SymExpr::Sin(l.compose(args)?),
            SymExpr::ExpI(l) => SymExpr::ExpI(l.compose(args)?),
            SymExpr::Add(v) => {
                SymExpr::sum(v.iter().map(|x| x.substitute(args)).collect::<Result<_, _>>()?)
            }
            SymExpr::Mul(v) => {
                SymExpr::product(v.iter().map(|x| x.substitute(args)).collect::<Result<_, _>>()?)
            }
        })
    }

    /// Calls `f` on every angle in the expression.
    pub fn visit_angles(&self, f: &mut impl FnMut(&Lin)) {
        match self {
            SymExpr::Cos(l) | SymExpr::Sin(l) | SymExpr::ExpI(l) => f(l),
            SymExpr::Add(v) | SymExpr::Mul(v) => v.iter().for_each(|x| x.visit_angles(f)),
            _ => {}
        }
    }

    pub fn fmt_with(&self, prefix: &str) -> String {
        match self {
            SymExpr::Num(n) => n.to_string(),
            SymExpr::Var(k) => format!("{prefix}{k}"),
            SymExpr::Cos(l) => format!("cos({})", l.fmt_with(prefix)),
            SymExpr::Sin(l) => format!("sin({})", l.fmt_with(prefix)),
            SymExpr::ExpI(l) => format!("exp(i*({}))", l.fmt_with(prefix)),
            SymExpr::Trig(t) => t.name(),
            SymExpr::Add(v) => {
                let parts: Vec<_> = v.iter().map(|x| x.fmt_with(prefix)).collect();
                format!("({})", parts.join(" + "))
            }
            SymExpr::Mul(v) => {
                let parts: Vec<_> = v.iter().map(|x| x.fmt_with(prefix)).collect();
                parts.join("*")
            }
        }
    }
}

impl fmt::Display for SymExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.fmt_with("p"))
    }
}

/// Eliminates trigonometry: half-angle variables, Euler expansion and the
/// `s_t`/`c_t` substitution. The result is a polynomial in [`TrigVar`]s
/// with exact coefficients; every variable implicitly satisfies
/// `s_t² + c_t² = 1`.
pub fn normalize_trig(e: &SymExpr) -> Result<SymExpr, SymError> {
    let basis = TrigBasis::for_exprs(std::iter::once(e));
    Ok(Poly::from_expr(e, &basis)?.to_expr(&basis))
}

/// Dense square matrix of symbolic entries, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SymMatrix {
    pub dim: usize,
    pub entries: Vec<SymExpr>,
}

impl SymMatrix {
    pub fn new(dim: usize, entries: Vec<SymExpr>) -> Result<Self, SymError> {
        if entries.len() != dim * dim {
            return Err(SymError::Dimension(format!(
                "{} entries for a {dim}x{dim} matrix",
                entries.len()
            )));
        }
        Ok(SymMatrix { dim, entries })
    }

    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![SymExpr::zero(); dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = SymExpr::one();
        }
        SymMatrix { dim, entries }
    }

    pub fn get(&self, r: usize, c: usize) -> &SymExpr {
        &self.entries[r * self.dim + c]
    }

    pub fn matmul(&self, b: &SymMatrix) -> Result<SymMatrix, SymError> {
        if self.dim != b.dim {
            return Err(SymError::Dimension(format!("{} vs {}", self.dim, b.dim)));
        }
        let n = self.dim;
        let mut entries = Vec::with_capacity(n * n);
        for r in 0..n {
            for c in 0..n {
                let terms = (0..n)
                    .filter(|&k| !self.get(r, k).is_zero() && !b.get(k, c).is_zero())
                    .map(|k| SymExpr::times(self.get(r, k).clone(), b.get(k, c).clone()))
                    .collect();
                entries.push(SymExpr::sum(terms));
            }
        }
        Ok(SymMatrix { dim: n, entries })
    }

    /// Kronecker product; `self` occupies the more significant index bits.
    pub fn tensor(&self, b: &SymMatrix) -> SymMatrix {
        let n = self.dim * b.dim;
        let mut entries = Vec::with_capacity(n * n);
        for r in 0..n {
            for c in 0..n {
                let x = self.get(r / b.dim, c / b.dim);
                let y = b.get(r % b.dim, c % b.dim);
                entries.push(if x.is_zero() || y.is_zero() {
                    SymExpr::zero()
                } else {
                    SymExpr::times(x.clone(), y.clone())
                });
            }
        }
        SymMatrix { dim: n, entries }
    }

    pub fn eval(&self, vars: &[f64]) -> Result<Vec<Complex64>, SymError> {
        self.entries.iter().map(|e| e.eval(vars)).collect()
    }
}

pub(crate) fn lcm_u32(a: u32, b: u32) -> u32 {
    a.lcm(&b)
}
