// SPDX-License-Identifier: Apache-2.0

//! Circuits as instruction sequences, plus the total order on them, the
//! canonical topological order, and the text form used in ECC files.

pub mod dag;
pub mod qasm;
pub mod sim;

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};

use num_rational::Ratio;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::gatedef::{gate_matrix, GateError, GateId, GateSet, ParamExpr};
use crate::symexpr::{parse_decimal, Lin, Rational, SymMatrix};

pub use dag::{canonical_hash, CircuitDag, Port};

#[derive(Debug, Error)]
pub enum CircuitError {
    #[error("cannot drop a gate from an empty circuit")]
    Empty,
    #[error("instruction {index}: {msg}")]
    Malformed { index: usize, msg: String },
    #[error("text form, instruction {index}: {msg}")]
    Text { index: usize, msg: String },
    #[error(transparent)]
    Gate(#[from] GateError),
}

/// A concrete angle: an exact rational multiple of π when possible.
#[derive(Clone, Debug)]
pub enum Angle {
    Pi(Rational),
    Rad(f64),
}

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

impl Angle {
    pub fn zero() -> Self {
        Angle::Pi(Rational::zero())
    }

    pub fn pi_frac(n: i128, d: i128) -> Self {
        Angle::Pi(Rational::new(n, d))
    }

    pub fn radians(&self) -> f64 {
        match self {
            Angle::Pi(r) => crate::symexpr::ratio_f64(r) * std::f64::consts::PI,
            Angle::Rad(x) => *x,
        }
    }

    pub fn add(&self, o: &Angle) -> Angle {
        match (self, o) {
            (Angle::Pi(a), Angle::Pi(b)) => Angle::Pi(a + b),
            _ => Angle::Rad(self.radians() + o.radians()),
        }
    }

    pub fn neg(&self) -> Angle {
        match self {
            Angle::Pi(a) => Angle::Pi(-a),
            Angle::Rad(x) => Angle::Rad(-x),
        }
    }

    pub fn scale(&self, k: i128) -> Angle {
        match self {
            Angle::Pi(a) => Angle::Pi(a * Rational::from_integer(k)),
            Angle::Rad(x) => Angle::Rad(x * k as f64),
        }
    }

    pub fn half(&self) -> Angle {
        match self {
            Angle::Pi(a) => Angle::Pi(a / Rational::from_integer(2)),
            Angle::Rad(x) => Angle::Rad(x / 2.0),
        }
    }

    /// Representative in `[0, 2π)`.
    pub fn normalized(&self) -> Angle {
        match self {
            Angle::Pi(a) => {
                let two = Rational::from_integer(2);
                let k = (a / two).floor();
                Angle::Pi(a - k * two)
            }
            Angle::Rad(x) => Angle::Rad(x.rem_euclid(TWO_PI)),
        }
    }

    pub fn is_zero_mod_2pi(&self) -> bool {
        match self.normalized() {
            Angle::Pi(a) => a.is_zero(),
            Angle::Rad(x) => x < 1e-12 || TWO_PI - x < 1e-12,
        }
    }

    /// Equality modulo 2π; exact for π-multiples, else within `tol`.
    pub fn eq_mod_2pi(&self, o: &Angle, tol: f64) -> bool {
        match (self, o) {
            (Angle::Pi(_), Angle::Pi(_)) => self.add(&o.neg()).is_zero_mod_2pi(),
            _ => {
                let d = (self.radians() - o.radians()).rem_euclid(TWO_PI);
                d < tol || TWO_PI - d < tol
            }
        }
    }

    /// Exact linear form; floating angles are approximated by a rational
    /// multiple of π.
    pub fn to_lin(&self) -> Lin {
        match self {
            Angle::Pi(a) => Lin::pi_multiple(*a),
            Angle::Rad(x) => {
                let r = Ratio::<i64>::approximate_float(x / std::f64::consts::PI)
                    .unwrap_or_else(|| Ratio::from_integer(0));
                Lin::pi_multiple(Rational::new(*r.numer() as i128, *r.denom() as i128))
            }
        }
    }

    /// QASM-style rendering: `0`, `pi`, `-pi/4`, `3*pi/4`, or a decimal.
    pub fn render(&self) -> String {
        match self {
            Angle::Pi(a) => {
                if a.is_zero() {
                    return "0".into();
                }
                let sign = if a.is_negative() { "-" } else { "" };
                let n = a.numer().abs();
                let d = *a.denom();
                let head = if n == 1 { "pi".to_string() } else { format!("{n}*pi") };
                if d == 1 {
                    format!("{sign}{head}")
                } else {
                    format!("{sign}{head}/{d}")
                }
            }
            Angle::Rad(x) => format!("{x:?}"),
        }
    }

    /// Parses `pi/4`, `-3*pi/4`, `0.25*pi`, `pi*3/4`, `2`, `0.1`, `1e-3`.
    pub fn parse(text: &str) -> Option<Angle> {
        let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return None;
        }
        let (neg, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest.to_string()),
            None => (false, s.trim_start_matches('+').to_string()),
        };
        if body.contains("pi") {
            let (num_part, den_part) = match body.split_once('/') {
                Some((a, b)) => (a.to_string(), Some(b.to_string())),
                None => (body.clone(), None),
            };
            let mut value = Rational::from_integer(1);
            let mut saw_pi = false;
            for f in num_part.split('*') {
                if f == "pi" {
                    if saw_pi {
                        return None;
                    }
                    saw_pi = true;
                } else {
                    value *= parse_decimal(f)?;
                }
            }
            if !saw_pi {
                return None;
            }
            if let Some(d) = den_part {
                let d = parse_decimal(&d)?;
                if d.is_zero() {
                    return None;
                }
                value /= d;
            }
            return Some(Angle::Pi(if neg { -value } else { value }));
        }
        if let Some(r) = parse_decimal(&body) {
            if r.is_zero() {
                return Some(Angle::zero());
            }
        }
        let x: f64 = body.parse().ok()?;
        Some(Angle::Rad(if neg { -x } else { x }))
    }
}

impl PartialEq for Angle {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}

impl Eq for Angle {}

impl PartialOrd for Angle {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Angle {
    fn cmp(&self, o: &Self) -> Ordering {
        match (self, o) {
            (Angle::Pi(a), Angle::Pi(b)) => a.cmp(b),
            (Angle::Pi(_), Angle::Rad(_)) => Ordering::Less,
            (Angle::Rad(_), Angle::Pi(_)) => Ordering::Greater,
            (Angle::Rad(a), Angle::Rad(b)) => a.total_cmp(b),
        }
    }
}

impl Hash for Angle {
    fn hash<H: Hasher>(&self, h: &mut H) {
        match self {
            Angle::Pi(a) => {
                0u8.hash(h);
                a.hash(h);
            }
            Angle::Rad(x) => {
                1u8.hash(h);
                x.to_bits().hash(h);
            }
        }
    }
}

/// A gate argument: symbolic expression or concrete angle.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Arg {
    Sym(ParamExpr),
    Const(Angle),
}

impl Arg {
    pub fn to_lin(&self) -> Lin {
        match self {
            Arg::Sym(e) => e.to_lin(),
            Arg::Const(a) => a.to_lin(),
        }
    }

    pub fn eval(&self, params: &[f64]) -> f64 {
        match self {
            Arg::Sym(e) => e.eval(params),
            Arg::Const(a) => a.radians(),
        }
    }

    pub fn render(&self) -> String {
        match self {
            Arg::Sym(e) => e.to_string(),
            Arg::Const(a) => a.render(),
        }
    }

    fn parse(text: &str) -> Option<Arg> {
        let sym = |t: &str| t.starts_with('p') && t[1..].starts_with(|c: char| c.is_ascii_digit());
        if sym(text) || text.strip_prefix('2').is_some_and(sym) {
            text.parse().ok().map(Arg::Sym)
        } else {
            Angle::parse(text).map(Arg::Const)
        }
    }
}

/// One gate application. Ordering is the fixed single-gate order: gate
/// index, then arguments, then qubit tuple.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Instr {
    pub gate: GateId,
    pub args: Vec<Arg>,
    pub qubits: Vec<usize>,
}

impl Instr {
    pub fn new(gate: GateId, args: Vec<Arg>, qubits: Vec<usize>) -> Self {
        Instr { gate, args, qubits }
    }

    pub fn params(&self) -> impl Iterator<Item = usize> + '_ {
        self.args.iter().flat_map(|a| match a {
            Arg::Sym(e) => e.params().collect::<Vec<_>>(),
            Arg::Const(_) => Vec::new(),
        })
    }

    pub fn touches(&self, q: usize) -> bool {
        self.qubits.contains(&q)
    }

    pub fn render(&self, gs: &GateSet) -> String {
        let mut s = gs.gate(self.gate).name.clone();
        for a in &self.args {
            s.push(' ');
            s.push_str(&a.render());
        }
        for q in &self.qubits {
            s.push(' ');
            s.push_str(&q.to_string());
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Circuit {
    pub num_qubits: usize,
    pub num_params: usize,
    pub instrs: Vec<Instr>,
}

impl Ord for Circuit {
    fn cmp(&self, o: &Self) -> Ordering {
        self.instrs
            .len()
            .cmp(&o.instrs.len())
            .then_with(|| self.instrs.cmp(&o.instrs))
            .then_with(|| self.num_qubits.cmp(&o.num_qubits))
            .then_with(|| self.num_params.cmp(&o.num_params))
    }
}

impl PartialOrd for Circuit {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// `a ≺ b`: fewer gates, or equally many and lexicographically smaller.
pub fn precedes(a: &Circuit, b: &Circuit) -> bool {
    a.instrs.len() < b.instrs.len() || (a.instrs.len() == b.instrs.len() && a.instrs < b.instrs)
}

impl Circuit {
    pub fn new(num_qubits: usize, num_params: usize) -> Self {
        Circuit { num_qubits, num_params, instrs: Vec::new() }
    }

    pub fn from_instrs(num_qubits: usize, num_params: usize, instrs: Vec<Instr>) -> Self {
        Circuit { num_qubits, num_params, instrs }
    }

    pub fn len(&self) -> usize {
        self.instrs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instrs.is_empty()
    }

    pub fn push(&mut self, i: Instr) {
        self.instrs.push(i);
    }

    pub fn with(&self, i: Instr) -> Circuit {
        let mut c = self.clone();
        c.instrs.push(i);
        c
    }

    pub fn drop_first(&self) -> Result<Circuit, CircuitError> {
        if self.instrs.is_empty() {
            return Err(CircuitError::Empty);
        }
        Ok(Circuit { instrs: self.instrs[1..].to_vec(), ..*self })
    }

    pub fn drop_last(&self) -> Result<Circuit, CircuitError> {
        if self.instrs.is_empty() {
            return Err(CircuitError::Empty);
        }
        Ok(Circuit { instrs: self.instrs[..self.instrs.len() - 1].to_vec(), ..*self })
    }

    pub fn params_used(&self) -> BTreeSet<usize> {
        self.instrs.iter().flat_map(|i| i.params()).collect()
    }

    pub fn qubits_used(&self) -> BTreeSet<usize> {
        self.instrs.iter().flat_map(|i| i.qubits.iter().copied()).collect()
    }

    pub fn is_symbolic(&self) -> bool {
        self.instrs.iter().any(|i| i.args.iter().any(|a| matches!(a, Arg::Sym(_))))
    }

    /// Arity, range and single-use checks.
    pub fn validate(&self, gs: &GateSet, single_use: bool) -> Result<(), CircuitError> {
        let mut seen = BTreeSet::new();
        for (index, ins) in self.instrs.iter().enumerate() {
            let bad = |msg: String| CircuitError::Malformed { index, msg };
            let g = gs.gates.get(ins.gate).ok_or_else(|| bad(format!("gate id {}", ins.gate)))?;
            if ins.qubits.len() != g.qubit_arity || ins.args.len() != g.param_arity {
                return Err(bad(format!("arity mismatch for {}", g.name)));
            }
            if ins.qubits.iter().any(|&q| q >= self.num_qubits) {
                return Err(bad(format!("qubit out of range (q = {})", self.num_qubits)));
            }
            let distinct: BTreeSet<_> = ins.qubits.iter().collect();
            if distinct.len() != ins.qubits.len() {
                return Err(bad("repeated qubit".into()));
            }
            for p in ins.params() {
                if p >= self.num_params {
                    return Err(bad(format!("parameter p{p} out of range (m = {})", self.num_params)));
                }
                if single_use && !seen.insert(p) {
                    return Err(bad(format!("parameter p{p} used twice")));
                }
            }
        }
        Ok(())
    }

    /// Text form: `Rz p0 0; CNOT 0 1`, or `()` when empty.
    pub fn to_text(&self, gs: &GateSet) -> String {
        if self.instrs.is_empty() {
            return "()".into();
        }
        self.instrs.iter().map(|i| i.render(gs)).collect::<Vec<_>>().join("; ")
    }

    pub fn from_text(text: &str, gs: &GateSet, num_qubits: usize, num_params: usize) -> Result<Circuit, CircuitError> {
        let mut c = Circuit::new(num_qubits, num_params);
        let t = text.trim();
        if t == "()" || t.is_empty() {
            return Ok(c);
        }
        for (index, part) in t.split(';').enumerate() {
            let bad = |msg: String| CircuitError::Text { index, msg };
            let toks: Vec<&str> = part.split_whitespace().collect();
            let name = toks.first().ok_or_else(|| bad("empty instruction".into()))?;
            let gate = gs.find(name).ok_or_else(|| bad(format!("unknown gate '{name}'")))?;
            let g = gs.gate(gate);
            if toks.len() != 1 + g.param_arity + g.qubit_arity {
                return Err(bad(format!("{name} expects {} arguments and {} qubits", g.param_arity, g.qubit_arity)));
            }
            let args = toks[1..1 + g.param_arity]
                .iter()
                .map(|a| Arg::parse(a).ok_or_else(|| bad(format!("bad argument '{a}'"))))
                .collect::<Result<Vec<_>, _>>()?;
            let qubits = toks[1 + g.param_arity..]
                .iter()
                .map(|q| q.parse::<usize>().map_err(|_| bad(format!("bad qubit '{q}'"))))
                .collect::<Result<Vec<_>, _>>()?;
            c.instrs.push(Instr { gate, args, qubits });
        }
        c.validate(gs, false)?;
        Ok(c)
    }

    /// Same circuit in the canonical topological order.
    pub fn canonical(&self) -> Circuit {
        let mut fronts: Vec<usize> = vec![0; self.num_qubits];
        // For every wire, the instruction indices touching it, in order.
        let mut wires: Vec<Vec<usize>> = vec![Vec::new(); self.num_qubits];
        for (i, ins) in self.instrs.iter().enumerate() {
            for &q in &ins.qubits {
                wires[q].push(i);
            }
        }
        let mut out = Vec::with_capacity(self.instrs.len());
        while out.len() < self.instrs.len() {
            let mut picked = None;
            for q in 0..self.num_qubits {
                let Some(&i) = wires[q].get(fronts[q]) else { continue };
                if self.instrs[i].qubits.iter().all(|&w| wires[w].get(fronts[w]) == Some(&i)) {
                    picked = Some(i);
                    break;
                }
            }
            let i = picked.expect("a sequence always has a ready gate");
            for &w in &self.instrs[i].qubits {
                fronts[w] += 1;
            }
            out.push(self.instrs[i].clone());
        }
        Circuit { instrs: out, ..*self }
    }

    /// Indices of instructions with no earlier instruction on any of their
    /// wires.
    pub fn first_gate_indices(&self) -> Vec<usize> {
        let mut blocked = vec![false; self.num_qubits];
        let mut out = Vec::new();
        for (i, ins) in self.instrs.iter().enumerate() {
            if ins.qubits.iter().all(|&q| !blocked[q]) {
                out.push(i);
            }
            for &q in &ins.qubits {
                blocked[q] = true;
            }
        }
        out
    }

    /// Indices of instructions with no later instruction on any wire.
    pub fn last_gate_indices(&self) -> Vec<usize> {
        let mut blocked = vec![false; self.num_qubits];
        let mut out = Vec::new();
        for (i, ins) in self.instrs.iter().enumerate().rev() {
            if ins.qubits.iter().all(|&q| !blocked[q]) {
                out.push(i);
            }
            for &q in &ins.qubits {
                blocked[q] = true;
            }
        }
        out.reverse();
        out
    }

    /// Renames qubits and parameters.
    pub fn remap(&self, qmap: &[usize], pmap: &[usize], num_qubits: usize, num_params: usize) -> Circuit {
        let instrs = self
            .instrs
            .iter()
            .map(|ins| Instr {
                gate: ins.gate,
                args: ins
                    .args
                    .iter()
                    .map(|a| match a {
                        Arg::Sym(e) => Arg::Sym(e.remap(|p| pmap[p])),
                        c => c.clone(),
                    })
                    .collect(),
                qubits: ins.qubits.iter().map(|&q| qmap[q]).collect(),
            })
            .collect();
        Circuit { num_qubits, num_params, instrs }
    }

    /// Symbolic unitary, gate by gate.
    pub fn matrix(&self, gs: &GateSet) -> Result<SymMatrix, CircuitError> {
        let dim = 1usize << self.num_qubits;
        let mut acc = SymMatrix::identity(dim);
        for ins in &self.instrs {
            let args: Vec<Lin> = ins.args.iter().map(Arg::to_lin).collect();
            let g = gate_matrix(gs.gate(ins.gate), &args)?;
            let e = embed(&g, &ins.qubits, self.num_qubits);
            acc = e.matmul(&acc).expect("dimensions agree");
        }
        Ok(acc)
    }

    pub fn display<'a>(&'a self, gs: &'a GateSet) -> CircuitDisplay<'a> {
        CircuitDisplay { c: self, gs }
    }
}

pub struct CircuitDisplay<'a> {
    c: &'a Circuit,
    gs: &'a GateSet,
}

impl fmt::Display for CircuitDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.c.to_text(self.gs))
    }
}

/// `circuit_matrix` under its usual name.
pub fn circuit_matrix(c: &Circuit, gs: &GateSet) -> Result<SymMatrix, CircuitError> {
    c.matrix(gs)
}

/// Position of `q`'s bit in a basis index over `n` qubits (qubit 0 is the
/// most significant bit).
#[inline]
pub(crate) fn bit_of(index: usize, q: usize, n: usize) -> usize {
    (index >> (n - 1 - q)) & 1
}

/// Local index of the gate's qubits within a global basis index.
#[inline]
pub(crate) fn local_index(index: usize, qubits: &[usize], n: usize) -> usize {
    let mut s = 0;
    for &q in qubits {
        s = (s << 1) | bit_of(index, q, n);
    }
    s
}

/// Lifts a gate matrix onto `qubits` of an `n`-qubit register.
pub fn embed(g: &SymMatrix, qubits: &[usize], n: usize) -> SymMatrix {
    let dim = 1usize << n;
    let mask: usize = qubits.iter().map(|&q| 1usize << (n - 1 - q)).sum();
    let mut entries = Vec::with_capacity(dim * dim);
    for r in 0..dim {
        for c in 0..dim {
            if (r & !mask) != (c & !mask) {
                entries.push(crate::symexpr::SymExpr::zero());
            } else {
                entries.push(g.get(local_index(r, qubits, n), local_index(c, qubits, n)).clone());
            }
        }
    }
    SymMatrix { dim, entries }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gatedef::{builtin_gate_set, enumerate_single_gate_circuits, ParamSpec};
    use crate::symexpr::SymExpr;
    use std::f64::consts::PI;

    fn nam() -> GateSet {
        builtin_gate_set("nam").unwrap()
    }

    #[test]
    fn angle_parsing_and_rendering() {
        for (t, r) in [("pi/4", "pi/4"), ("-pi/4", "-pi/4"), ("3*pi/4", "3*pi/4"), ("pi", "pi"), ("0", "0"), ("0.25*pi", "pi/4"), ("pi*3/4", "3*pi/4"), ("0.5", "0.5")] {
            assert_eq!(Angle::parse(t).unwrap().render(), r, "{t}");
        }
        assert!(Angle::parse("pi/0").is_none());
        assert!(Angle::parse("abc").is_none());
        assert!((Angle::parse("1e-3").unwrap().radians() - 1e-3).abs() < 1e-18);
    }

    #[test]
    fn angle_normalization() {
        assert_eq!(Angle::pi_frac(-1, 4).normalized(), Angle::pi_frac(7, 4));
        assert_eq!(Angle::pi_frac(9, 4).normalized(), Angle::pi_frac(1, 4));
        assert!(Angle::pi_frac(4, 1).is_zero_mod_2pi());
        assert!(Angle::Rad(2.0 * PI).is_zero_mod_2pi());
        assert!(Angle::pi_frac(1, 2).eq_mod_2pi(&Angle::Rad(PI / 2.0 + 2.0 * PI), 1e-9));
    }

    #[test]
    fn precedes_basics() {
        let gs = nam();
        let empty = Circuit::new(1, 0);
        let h = Circuit::from_text("H 0", &gs, 1, 0).unwrap();
        assert!(precedes(&empty, &h));
        assert!(!precedes(&h, &h));
    }

    #[test]
    fn precedes_is_a_strict_total_order_on_singles() {
        let gs = nam();
        let singles: Vec<Circuit> = enumerate_single_gate_circuits(&gs, &ParamSpec::standard(2), 3)
            .into_iter()
            .map(|i| Circuit::from_instrs(3, 2, vec![i]))
            .collect();
        assert_eq!(singles.len(), 27);
        for a in &singles {
            for b in &singles {
                let ab = precedes(a, b);
                let ba = precedes(b, a);
                assert!(!(ab && ba));
                assert!(ab || ba || a == b);
                for c in &singles {
                    if ab && precedes(b, c) {
                        assert!(precedes(a, c));
                    }
                }
            }
        }
    }

    #[test]
    fn precedes_total_on_two_gate_sequences() {
        let gs = nam();
        let singles = enumerate_single_gate_circuits(&gs, &ParamSpec::standard(1), 2);
        let mut all = vec![Circuit::new(2, 1)];
        for a in &singles {
            all.push(Circuit::from_instrs(2, 1, vec![a.clone()]));
            for b in &singles {
                all.push(Circuit::from_instrs(2, 1, vec![a.clone(), b.clone()]));
            }
        }
        let mut sorted = all.clone();
        sorted.sort_by(|a, b| if precedes(a, b) { Ordering::Less } else if precedes(b, a) { Ordering::Greater } else { Ordering::Equal });
        assert!(sorted.windows(2).all(|w| precedes(&w[0], &w[1])));
    }

    #[test]
    fn drop_first_and_last() {
        let gs = nam();
        let c = Circuit::from_text("H 0; X 1; CNOT 0 1", &gs, 2, 0).unwrap();
        let h = Circuit::from_text("H 0", &gs, 2, 0).unwrap();
        assert!(h.drop_first().unwrap().is_empty());
        assert_eq!(c.with(h.instrs[0].clone()).drop_last().unwrap(), c);
        assert_eq!(
            c.drop_first().unwrap().drop_last().unwrap(),
            c.drop_last().unwrap().drop_first().unwrap()
        );
        assert!(matches!(Circuit::new(1, 0).drop_first(), Err(CircuitError::Empty)));
    }

    #[test]
    fn text_round_trip() {
        let ibm = builtin_gate_set("ibm").unwrap();
        let t = "U1 p0 0; U2 2p1 p2+p3 0; CNOT 1 0";
        let c = Circuit::from_text(t, &ibm, 2, 4).unwrap();
        assert_eq!(c.to_text(&ibm), t);
        assert_eq!(Circuit::new(2, 0).to_text(&ibm), "()");
        assert!(Circuit::from_text("U1 0", &ibm, 1, 1).is_err());
        assert!(Circuit::from_text("Foo 0", &ibm, 1, 1).is_err());
        assert!(Circuit::from_text("CNOT 0 3", &ibm, 2, 0).is_err());
    }

    #[test]
    fn single_use_validation() {
        let gs = nam();
        let c = Circuit::from_text("Rz p0 0; Rz p0+p1 0", &gs, 1, 2).unwrap();
        assert!(c.validate(&gs, true).is_err());
        assert!(c.validate(&gs, false).is_ok());
    }

    #[test]
    fn canonical_order_is_independent_of_sequence() {
        let gs = nam();
        let a = Circuit::from_text("H 1; H 0; CNOT 0 1; X 2", &gs, 3, 0).unwrap();
        let b = Circuit::from_text("X 2; H 0; H 1; CNOT 0 1", &gs, 3, 0).unwrap();
        assert_eq!(a.canonical(), b.canonical());
        assert_eq!(a.canonical().to_text(&gs), "H 0; H 1; CNOT 0 1; X 2");
    }

    #[test]
    fn boundary_gates() {
        let gs = nam();
        let c = Circuit::from_text("H 0; X 1; CNOT 0 1; H 2", &gs, 3, 0).unwrap();
        assert_eq!(c.first_gate_indices(), vec![0, 1, 3]);
        assert_eq!(c.last_gate_indices(), vec![2, 3]);
    }

    #[test]
    fn empty_circuit_matrix_is_identity() {
        let m = Circuit::new(2, 0).matrix(&nam()).unwrap();
        assert_eq!(m, SymMatrix::identity(4));
    }

    #[test]
    fn hh_matrix_is_identity() {
        let gs = nam();
        let c = Circuit::from_text("H 0; H 0", &gs, 1, 0).unwrap();
        let m = c.matrix(&gs).unwrap().eval(&[]).unwrap();
        assert!((m[0].re - 1.0).abs() < 1e-12 && m[1].norm() < 1e-12 && m[2].norm() < 1e-12 && (m[3].re - 1.0).abs() < 1e-12);
    }

    fn sym_of(gs: &GateSet, name: &str, args: &[Angle]) -> SymMatrix {
        let lins: Vec<Lin> = args.iter().map(Angle::to_lin).collect();
        gate_matrix(gs.gate(gs.find(name).unwrap()), &lins).unwrap()
    }

    #[test]
    fn figure_one_product_formula() {
        // U1(-π) q0, H q1, H q2; U2(π/2, π) q0, CNOT q1 q2; CNOT q0 q1.
        let ibm = builtin_gate_set("ibm").unwrap().extended("ibm+h", &[crate::gatedef::GateDef {
            name: "H".into(),
            qasm: "h".into(),
            qubits: 1,
            params: 0,
            matrix: vec![vec!["1/sqrt2".into(), "1/sqrt2".into()], vec!["1/sqrt2".into(), "-1/sqrt2".into()]],
        }]).unwrap();
        let c = Circuit::from_text(
            "U1 -pi 0; H 1; H 2; U2 pi/2 pi 0; CNOT 1 2; CNOT 0 1",
            &ibm,
            3,
            0,
        )
        .unwrap();
        assert_eq!(c.len(), 6);
        let id = SymMatrix::identity(2);
        let cnot = sym_of(&ibm, "CNOT", &[]);
        let h = sym_of(&ibm, "H", &[]);
        let u1 = sym_of(&ibm, "U1", &[Angle::pi_frac(-1, 1)]);
        let u2 = sym_of(&ibm, "U2", &[Angle::pi_frac(1, 2), Angle::pi_frac(1, 1)]);
        let layer1 = u1.tensor(&h).tensor(&h);
        let layer2 = u2.tensor(&cnot);
        let layer3 = cnot.tensor(&id);
        let want = layer3.matmul(&layer2.matmul(&layer1).unwrap()).unwrap();
        let got = c.matrix(&ibm).unwrap();
        assert_eq!(got.dim, 8);
        let (a, b) = (got.eval(&[]).unwrap(), want.eval(&[]).unwrap());
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-12);
        }
        let structural = |m: &SymMatrix| -> Vec<SymExpr> {
            m.entries.iter().map(|e| crate::symexpr::normalize_trig(e).unwrap()).collect()
        };
        assert_eq!(structural(&got), structural(&want));
    }

    /// Concrete Nam circuits on three qubits with angles in multiples of
    /// π/4.
    fn arb_circuit() -> impl proptest::strategy::Strategy<Value = Circuit> {
        use proptest::prelude::*;
        let gate = (0..4usize, 0..3usize, 1..3usize, -3..5i32).prop_map(|(g, a, off, k)| match g {
            0 => format!("H {a}"),
            1 => format!("X {a}"),
            2 => format!("CNOT {a} {}", (a + off) % 3),
            _ => format!("Rz {k}*pi/4 {a}"),
        });
        prop::collection::vec(gate, 0..12).prop_map(|gs| Circuit::from_text(&gs.join("; "), &nam(), 3, 0).unwrap())
    }

    proptest::proptest! {
        #[test]
        fn canonical_form_is_stable_and_sound(c in arb_circuit()) {
            let gs = nam();
            let k = c.canonical();
            proptest::prop_assert_eq!(k.canonical(), k.clone());
            proptest::prop_assert!(sim::same_action_up_to_phase(&c, &k, &gs, &gs, 2, 0, 1e-9));
            proptest::prop_assert_eq!(CircuitDag::from_circuit(&c).to_circuit().canonical(), k.clone());
            let back = Circuit::from_text(&k.to_text(&gs), &gs, 3, 0).unwrap();
            proptest::prop_assert_eq!(back, k);
        }
    }
}
