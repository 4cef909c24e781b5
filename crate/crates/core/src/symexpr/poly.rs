// SPDX-License-Identifier: Apache-2.0

//! Polynomials in half-angle sine/cosine variables with exact coefficients.

use std::collections::BTreeMap;

use num_complex::Complex64;
use num_traits::{One, ToPrimitive, Zero};

use super::{lcm_u32, Exact, Lin, Rational, SymError, SymExpr, TrigVar};

/// Exponent vector; slot `2k` is `s_k`, slot `2k + 1` is `c_k`.
pub type Mono = Vec<u16>;

/// Choice of half-angle variable `t_k = x_k / denoms[k]` for every
/// variable, picked so that every angle is an integer combination of them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrigBasis {
    pub denoms: Vec<u32>,
}

impl TrigBasis {
    pub fn new(denoms: Vec<u32>) -> Self {
        TrigBasis { denoms }
    }

    pub fn for_exprs<'a>(exprs: impl IntoIterator<Item = &'a SymExpr>) -> Self {
        let mut b = TrigBasis { denoms: Vec::new() };
        for e in exprs {
            e.visit_angles(&mut |l| b.absorb(l));
            b.absorb_trig_vars(e);
        }
        b
    }

    fn slot(&mut self, k: usize) -> &mut u32 {
        if self.denoms.len() <= k {
            self.denoms.resize(k + 1, 1);
        }
        &mut self.denoms[k]
    }

    /// Widens denominators so that `l` becomes an integer combination.
    pub fn absorb(&mut self, l: &Lin) {
        for (k, c) in &l.terms {
            let den = c.denom().to_u32().unwrap_or(1);
            let d = self.slot(*k);
            *d = lcm_u32(*d, den);
        }
    }

    fn absorb_trig_vars(&mut self, e: &SymExpr) {
        match e {
            SymExpr::Trig(t) => {
                let d = self.slot(t.param);
                *d = lcm_u32(*d, t.denom);
            }
            SymExpr::Add(v) | SymExpr::Mul(v) => v.iter().for_each(|x| self.absorb_trig_vars(x)),
            _ => {}
        }
    }

    pub fn num_params(&self) -> usize {
        self.denoms.len()
    }

    pub fn nvars(&self) -> usize {
        2 * self.denoms.len()
    }

    pub fn trig_var(&self, slot: usize) -> TrigVar {
        TrigVar { param: slot / 2, denom: self.denoms[slot / 2], cos: slot % 2 == 1 }
    }

    /// `e^{i·l}` as a polynomial.
    pub fn expi(&self, l: &Lin) -> Result<Poly, SymError> {
        let n = self.nvars();
        let phase = Exact::exp_i_pi(&l.pi)
            .ok_or_else(|| SymError::NoExactValue(Lin::pi_multiple(l.pi).fmt_with("p")))?;
        let mut p = Poly::constant(n, phase);
        for (k, c) in &l.terms {
            let d = *self.denoms.get(*k).unwrap_or(&1);
            let m = c * Rational::from_integer(d as i128);
            if !m.is_integer() {
                return Err(SymError::HalfAngle { angle: l.fmt_with("p"), param: *k, denom: d });
            }
            let m = m.to_integer();
            let sign = if m.is_negative() { -1 } else { 1 };
            // c_k ± i·s_k
            let mut base = Poly::var(n, 2 * k + 1);
            base.add_term(unit(n, 2 * k), Exact::i_scaled(sign));
            p = p.mul(&base.pow(m.unsigned_abs() as u32));
        }
        Ok(p)
    }
}

impl Exact {
    fn i_scaled(s: i128) -> Exact {
        &Exact::i() * &Exact::from_integer(s)
    }
}

fn unit(n: usize, slot: usize) -> Mono {
    let mut m = vec![0u16; n];
    m[slot] = 1;
    m
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Mono, Exact>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Exact) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn var(nvars: usize, slot: usize) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(unit(nvars, slot), Exact::one());
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &Exact)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, m: Mono, c: Exact) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get() + &c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let mut r = self.clone();
        for (m, c) in &o.terms {
            r.add_term(m.clone(), c.clone());
        }
        r
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        let mut r = self.clone();
        for (m, c) in &o.terms {
            r.add_term(m.clone(), -c);
        }
        r
    }

    pub fn scale(&self, s: &Exact) -> Poly {
        let mut r = Poly::zero(self.nvars);
        for (m, c) in &self.terms {
            r.add_term(m.clone(), c * s);
        }
        r
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        let mut r = Poly::zero(self.nvars.max(o.nvars));
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                let mut m = vec![0u16; r.nvars];
                for (i, e) in m1.iter().enumerate() {
                    m[i] += e;
                }
                for (i, e) in m2.iter().enumerate() {
                    m[i] += e;
                }
                r.add_term(m, c1 * c2);
            }
        }
        r
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut r = Poly::constant(self.nvars, Exact::one());
        for _ in 0..e {
            r = r.mul(self);
        }
        r
    }

    fn map_coeffs(&self, f: impl Fn(&Exact) -> Exact) -> Poly {
        let mut r = Poly::zero(self.nvars);
        for (m, c) in &self.terms {
            r.add_term(m.clone(), f(c));
        }
        r
    }

    /// Real part, given real variables.
    pub fn re_part(&self) -> Poly {
        self.map_coeffs(|c| Exact::new(c.re.clone(), super::RealSqrt2::zero()))
    }

    /// Imaginary part, given real variables.
    pub fn im_part(&self) -> Poly {
        self.map_coeffs(|c| Exact::new(c.im.clone(), super::RealSqrt2::zero()))
    }

    /// Normal form modulo `s_k² + c_k² − 1`: no `s_k` above degree one.
    /// Two polynomials agree on every point of the torus iff their normal
    /// forms are identical.
    pub fn reduce_circle(&self) -> Poly {
        let mut out = Poly::zero(self.nvars);
        let mut work: Vec<(Mono, Exact)> = self.terms.iter().map(|(m, c)| (m.clone(), c.clone())).collect();
        while let Some((m, c)) = work.pop() {
            match (0..self.nvars / 2).find(|k| m[2 * k] >= 2) {
                None => out.add_term(m, c),
                Some(k) => {
                    let mut base = m;
                    base[2 * k] -= 2;
                    let mut with_c2 = base.clone();
                    with_c2[2 * k + 1] += 2;
                    work.push((base, c.clone()));
                    work.push((with_c2, -&c));
                }
            }
        }
        out
    }

    pub fn eval(&self, basis: &TrigBasis, params: &[f64]) -> Complex64 {
        let vals: Vec<f64> = (0..self.nvars)
            .map(|slot| basis.trig_var(slot).eval(params).unwrap_or(0.0))
            .collect();
        let mut s = Complex64::new(0.0, 0.0);
        for (m, c) in &self.terms {
            let mut t = c.to_c64();
            for (slot, e) in m.iter().enumerate() {
                t *= vals[slot].powi(*e as i32);
            }
            s += t;
        }
        s
    }

    pub fn from_expr(e: &SymExpr, basis: &TrigBasis) -> Result<Poly, SymError> {
        let n = basis.nvars();
        Ok(match e {
            SymExpr::Num(c) => Poly::constant(n, c.clone()),
            SymExpr::Var(k) => return Err(SymError::BareVariable(*k)),
            SymExpr::ExpI(l) => basis.expi(l)?,
            SymExpr::Cos(l) => basis
                .expi(l)?
                .add(&basis.expi(&l.neg())?)
                .scale(&Exact::from_rational(Rational::new(1, 2))),
            SymExpr::Sin(l) => basis
                .expi(l)?
                .sub(&basis.expi(&l.neg())?)
                .scale(&Exact::i().inverse().unwrap_or_else(Exact::zero))
                .scale(&Exact::from_rational(Rational::new(1, 2))),
            SymExpr::Trig(t) => {
                let l = Lin::var(t.param).scale(&Rational::new(1, t.denom as i128));
                let wrapped = if t.cos { SymExpr::Cos(l) } else { SymExpr::Sin(l) };
                Poly::from_expr(&wrapped, basis)?
            }
            SymExpr::Add(v) => {
                let mut acc = Poly::zero(n);
                for x in v {
                    acc = acc.add(&Poly::from_expr(x, basis)?);
                }
                acc
            }
            SymExpr::Mul(v) => {
                let mut acc = Poly::constant(n, Exact::one());
                for x in v {
                    acc = acc.mul(&Poly::from_expr(x, basis)?);
                }
                acc
            }
        })
    }

    pub fn to_expr(&self, basis: &TrigBasis) -> SymExpr {
        let mut sum = Vec::new();
        for (m, c) in &self.terms {
            let mut factors = vec![SymExpr::Num(c.clone())];
            for (slot, e) in m.iter().enumerate() {
                for _ in 0..*e {
                    factors.push(SymExpr::Trig(basis.trig_var(slot)));
                }
            }
            sum.push(SymExpr::product(factors));
        }
        SymExpr::sum(sum)
    }

    /// SMT-LIB term of a polynomial with real coefficients; `sqrt2` names
    /// the solver constant constrained to √2.
    pub fn to_smt(&self, names: &[String], sqrt2: &str) -> String {
        if self.terms.is_empty() {
            return "0.0".to_string();
        }
        let mut parts = Vec::new();
        for (m, c) in &self.terms {
            let mut factors = Vec::new();
            let rs = &c.re;
            let coeff = match (rs.a.is_zero(), rs.b.is_zero()) {
                (_, true) => super::smt_rational(&rs.a),
                (true, false) => format!("(* {} {sqrt2})", super::smt_rational(&rs.b)),
                (false, false) => format!(
                    "(+ {} (* {} {sqrt2}))",
                    super::smt_rational(&rs.a),
                    super::smt_rational(&rs.b)
                ),
            };
            let unit_coeff = rs.b.is_zero() && rs.a.is_one();
            if !unit_coeff {
                factors.push(coeff);
            }
            for (slot, e) in m.iter().enumerate() {
                for _ in 0..*e {
                    factors.push(names[slot].clone());
                }
            }
            parts.push(match factors.len() {
                0 => "1.0".to_string(),
                1 => factors.pop().unwrap(),
                _ => format!("(* {})", factors.join(" ")),
            });
        }
        if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            format!("(+ {})", parts.join(" "))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symexpr::parse_expr;

    #[test]
    fn pythagoras_reduces_to_one() {
        let b = TrigBasis::new(vec![1]);
        let e = parse_expr("cos(p0)*cos(p0) + sin(p0)*sin(p0)").unwrap();
        let p = Poly::from_expr(&e, &b).unwrap().reduce_circle();
        assert_eq!(p, Poly::constant(2, Exact::one()));
    }

    #[test]
    fn half_angle_basis_accepts_full_angle() {
        let e = parse_expr("cos(p0/2) + exp(i*p0)").unwrap();
        let b = TrigBasis::for_exprs([&e]);
        assert_eq!(b.denoms, vec![2]);
        let p = Poly::from_expr(&e, &b).unwrap();
        for x in [0.3, 1.7, -2.2] {
            let want = e.eval(&[x]).unwrap();
            assert!((p.eval(&b, &[x]) - want).norm() < 1e-12);
        }
    }

    #[test]
    fn too_coarse_basis_errors() {
        let b = TrigBasis::new(vec![1]);
        let e = parse_expr("cos(p0/2)").unwrap();
        assert!(matches!(Poly::from_expr(&e, &b), Err(SymError::HalfAngle { .. })));
    }

    #[test]
    fn smt_rendering() {
        let b = TrigBasis::new(vec![1]);
        let e = parse_expr("2*cos(p0) - 1").unwrap();
        let p = Poly::from_expr(&e, &b).unwrap();
        let names = vec!["s0".to_string(), "c0".to_string()];
        assert_eq!(p.to_smt(&names, "r2"), "(+ (- 1.0) (* 2.0 c0))");
    }
}
