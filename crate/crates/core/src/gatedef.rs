// SPDX-License-Identifier: Apache-2.0

//! Gates, gate sets and the parameter-expression family Σ.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::circuit::{Arg, Instr};
use crate::symexpr::{parse_expr, Lin, SymError, SymExpr, SymMatrix};

pub type GateId = usize;

#[derive(Debug, Error)]
pub enum GateError {
    #[error("unknown gate set '{0}'")]
    UnknownGateSet(String),
    #[error("gate '{gate}' takes {want} arguments, got {got}")]
    Arity { gate: String, want: usize, got: usize },
    #[error("gate '{gate}': {msg}")]
    Definition { gate: String, msg: String },
    #[error("gate '{gate}' entry {entry}: {source}")]
    Entry { gate: String, entry: usize, source: SymError },
    #[error("gate set file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unknown gate '{0}'")]
    UnknownGate(String),
}

/// Declarative form of a gate, as stored in gate-set files.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateDef {
    pub name: String,
    pub qasm: String,
    pub qubits: usize,
    pub params: usize,
    /// Rows of entry expressions over `a0, a1, …`.
    pub matrix: Vec<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateSetDef {
    pub name: String,
    pub gates: Vec<GateDef>,
}

#[derive(Clone, Debug)]
pub struct Gate {
    pub name: String,
    /// OpenQASM spelling; either a bare name or a fixed-argument form such
    /// as `rx(pi/2)`.
    pub qasm: String,
    pub qubit_arity: usize,
    pub param_arity: usize,
    /// Row-major entries over argument variables.
    pub matrix: Vec<SymExpr>,
}

impl Gate {
    pub fn from_def(def: &GateDef) -> Result<Gate, GateError> {
        let bad = |msg: String| GateError::Definition { gate: def.name.clone(), msg };
        if def.qubits == 0 || def.qubits > 4 {
            return Err(bad(format!("unsupported qubit arity {}", def.qubits)));
        }
        let dim = 1usize << def.qubits;
        if def.matrix.len() != dim || def.matrix.iter().any(|r| r.len() != dim) {
            return Err(bad(format!("matrix must be {dim}x{dim}")));
        }
        let mut matrix = Vec::with_capacity(dim * dim);
        for (i, text) in def.matrix.iter().flatten().enumerate() {
            let e = parse_expr(text)
                .map_err(|source| GateError::Entry { gate: def.name.clone(), entry: i, source })?;
            let mut max_var = None;
            e.visit_angles(&mut |l| {
                for (k, _) in &l.terms {
                    max_var = max_var.max(Some(*k));
                }
            });
            if let Some(k) = max_var {
                if k >= def.params {
                    return Err(bad(format!("entry {i} uses a{k} but the gate has {} parameters", def.params)));
                }
            }
            // Rejects variables outside trigonometric arguments.
            let probe: Vec<Lin> = (0..def.params).map(Lin::var).collect();
            e.substitute(&probe)
                .map_err(|source| GateError::Entry { gate: def.name.clone(), entry: i, source })?;
            matrix.push(e);
        }
        let g = Gate {
            name: def.name.clone(),
            qasm: def.qasm.clone(),
            qubit_arity: def.qubits,
            param_arity: def.params,
            matrix,
        };
        g.check_numerics().map_err(bad)?;
        Ok(g)
    }

    fn check_numerics(&self) -> Result<(), String> {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let two_pi = 2.0 * std::f64::consts::PI;
        for _ in 0..8 {
            let args: Vec<f64> = (0..self.param_arity).map(|_| rng.gen_range(-7.0..7.0)).collect();
            let m = self.eval_matrix(&args).map_err(|e| e.to_string())?;
            if unitarity_error(&m, self.dim()) > 1e-10 {
                return Err("matrix is not unitary".into());
            }
            for k in 0..self.param_arity {
                let mut shifted = args.clone();
                shifted[k] += two_pi;
                let m2 = self.eval_matrix(&shifted).map_err(|e| e.to_string())?;
                if !crate::circuit::sim::equal_up_to_phase(&m, &m2, 1e-9) {
                    return Err(format!("parameter {k} is not 2π-periodic up to global phase"));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        1 << self.qubit_arity
    }

    pub fn eval_matrix(&self, args: &[f64]) -> Result<Vec<Complex64>, SymError> {
        self.matrix.iter().map(|e| e.eval(args)).collect()
    }

    pub fn def(&self) -> GateDef {
        let d = self.dim();
        GateDef {
            name: self.name.clone(),
            qasm: self.qasm.clone(),
            qubits: self.qubit_arity,
            params: self.param_arity,
            matrix: (0..d)
                .map(|r| (0..d).map(|c| self.matrix[r * d + c].fmt_with("a")).collect())
                .collect(),
        }
    }
}

pub(crate) fn unitarity_error(m: &[Complex64], d: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for r in 0..d {
        for c in 0..d {
            let mut s = Complex64::new(0.0, 0.0);
            for k in 0..d {
                s += m[r * d + k] * m[c * d + k].conj();
            }
            let want = if r == c { 1.0 } else { 0.0 };
            worst = worst.max((s - want).norm());
        }
    }
    worst
}

/// Symbolic matrix of `g` applied to angle arguments.
pub fn gate_matrix(g: &Gate, args: &[Lin]) -> Result<SymMatrix, GateError> {
    if args.len() != g.param_arity {
        return Err(GateError::Arity { gate: g.name.clone(), want: g.param_arity, got: args.len() });
    }
    let entries = g
        .matrix
        .iter()
        .enumerate()
        .map(|(i, e)| {
            e.substitute(args)
                .map_err(|source| GateError::Entry { gate: g.name.clone(), entry: i, source })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SymMatrix { dim: g.dim(), entries })
}

#[derive(Clone, Debug)]
pub struct GateSet {
    pub name: String,
    pub gates: Vec<Gate>,
}

impl GateSet {
    pub fn from_def(def: &GateSetDef) -> Result<GateSet, GateError> {
        let mut gates = Vec::new();
        for g in &def.gates {
            if gates.iter().any(|x: &Gate| x.name == g.name) {
                return Err(GateError::Definition { gate: g.name.clone(), msg: "duplicate name".into() });
            }
            gates.push(Gate::from_def(g)?);
        }
        Ok(GateSet { name: def.name.clone(), gates })
    }

    pub fn from_json(text: &str) -> Result<GateSet, GateError> {
        Self::from_def(&serde_json::from_str(text)?)
    }

    pub fn def(&self) -> GateSetDef {
        GateSetDef { name: self.name.clone(), gates: self.gates.iter().map(Gate::def).collect() }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.def()).expect("gate set serializes")
    }

    /// Hex SHA-256 of the canonical definition.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(&self.def()).expect("gate set serializes");
        let digest = Sha256::digest(text.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn gate(&self, id: GateId) -> &Gate {
        &self.gates[id]
    }

    pub fn find(&self, name: &str) -> Option<GateId> {
        self.gates.iter().position(|g| g.name == name)
    }

    pub fn find_or_err(&self, name: &str) -> Result<GateId, GateError> {
        self.find(name).ok_or_else(|| GateError::UnknownGate(name.to_string()))
    }

    /// Gates listed by name, in the given order.
    pub fn subset(&self, name: &str, names: &[&str]) -> Result<GateSet, GateError> {
        let gates = names
            .iter()
            .map(|n| self.find_or_err(n).map(|id| self.gates[id].clone()))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(GateSet { name: name.to_string(), gates })
    }

    /// This set plus the given extra gates, appended.
    pub fn extended(&self, name: &str, extra: &[GateDef]) -> Result<GateSet, GateError> {
        let mut def = self.def();
        def.name = name.to_string();
        for g in extra {
            if def.gates.iter().all(|x| x.name != g.name) {
                def.gates.push(g.clone());
            }
        }
        GateSet::from_def(&def)
    }

    /// Adds CCX and CCZ, as needed to read benchmark inputs.
    pub fn with_toffoli(&self) -> GateSet {
        self.extended(&format!("{}+toffoli", self.name), &[ccx_def(), ccz_def()])
            .expect("builtin definitions are valid")
    }
}

fn def(name: &str, qasm: &str, qubits: usize, params: usize, rows: &[&[&str]]) -> GateDef {
    GateDef {
        name: name.into(),
        qasm: qasm.into(),
        qubits,
        params,
        matrix: rows.iter().map(|r| r.iter().map(|s| s.to_string()).collect()).collect(),
    }
}

fn h_def() -> GateDef {
    def("H", "h", 1, 0, &[&["1/sqrt2", "1/sqrt2"], &["1/sqrt2", "-1/sqrt2"]])
}

fn x_def() -> GateDef {
    def("X", "x", 1, 0, &[&["0", "1"], &["1", "0"]])
}

fn z_def() -> GateDef {
    def("Z", "z", 1, 0, &[&["1", "0"], &["0", "-1"]])
}

fn rz_def() -> GateDef {
    def("Rz", "rz", 1, 1, &[&["exp(-i*a0/2)", "0"], &["0", "exp(i*a0/2)"]])
}

fn cnot_def() -> GateDef {
    def(
        "CNOT",
        "cx",
        2,
        0,
        &[&["1", "0", "0", "0"], &["0", "1", "0", "0"], &["0", "0", "0", "1"], &["0", "0", "1", "0"]],
    )
}

fn cz_def() -> GateDef {
    def(
        "CZ",
        "cz",
        2,
        0,
        &[&["1", "0", "0", "0"], &["0", "1", "0", "0"], &["0", "0", "1", "0"], &["0", "0", "0", "-1"]],
    )
}

fn diag_phase(name: &str, qasm: &str, phase: &str) -> GateDef {
    def(name, qasm, 1, 0, &[&["1", "0"], &["0", phase]])
}

fn controlled2(name: &str, qasm: &str, block: [&str; 4]) -> GateDef {
    let mut rows: Vec<Vec<String>> = (0..8)
        .map(|r| (0..8).map(|c| if r == c { "1".to_string() } else { "0".to_string() }).collect())
        .collect();
    rows[6][6] = block[0].into();
    rows[6][7] = block[1].into();
    rows[7][6] = block[2].into();
    rows[7][7] = block[3].into();
    GateDef { name: name.into(), qasm: qasm.into(), qubits: 3, params: 0, matrix: rows }
}

fn ccx_def() -> GateDef {
    controlled2("CCX", "ccx", ["0", "1", "1", "0"])
}

fn ccz_def() -> GateDef {
    controlled2("CCZ", "ccz", ["1", "0", "0", "-1"])
}

fn builtin_def(name: &str) -> Option<GateSetDef> {
    let gates = match name {
        "nam" => vec![h_def(), x_def(), rz_def(), cnot_def()],
        "ibm" => vec![
            def("U1", "u1", 1, 1, &[&["1", "0"], &["0", "exp(i*a0)"]]),
            def(
                "U2",
                "u2",
                1,
                2,
                &[&["1/sqrt2", "-exp(i*a1)/sqrt2"], &["exp(i*a0)/sqrt2", "exp(i*(a0+a1))/sqrt2"]],
            ),
            def(
                "U3",
                "u3",
                1,
                3,
                &[
                    &["cos(a0/2)", "-exp(i*a2)*sin(a0/2)"],
                    &["exp(i*a1)*sin(a0/2)", "exp(i*(a1+a2))*cos(a0/2)"],
                ],
            ),
            cnot_def(),
        ],
        "rigetti" => vec![
            def("Rx90", "rx(pi/2)", 1, 0, &[&["1/sqrt2", "-i/sqrt2"], &["-i/sqrt2", "1/sqrt2"]]),
            def("Rxm90", "rx(-pi/2)", 1, 0, &[&["1/sqrt2", "i/sqrt2"], &["i/sqrt2", "1/sqrt2"]]),
            def("X", "x", 1, 0, &[&["0", "-i"], &["-i", "0"]]),
            rz_def(),
            cz_def(),
        ],
        "clifford_t" => vec![
            h_def(),
            diag_phase("T", "t", "exp(i*pi/4)"),
            diag_phase("Tdg", "tdg", "exp(-i*pi/4)"),
            diag_phase("S", "s", "i"),
            diag_phase("Sdg", "sdg", "-i"),
            cnot_def(),
        ],
        _ => return None,
    };
    Some(GateSetDef { name: name.to_string(), gates })
}

/// One of `nam`, `ibm`, `rigetti`, `clifford_t`.
pub fn builtin_gate_set(name: &str) -> Result<GateSet, GateError> {
    let def = builtin_def(name).ok_or_else(|| GateError::UnknownGateSet(name.to_string()))?;
    GateSet::from_def(&def)
}

/// Clifford+T extended with X, Z, CCX and CCZ: the vocabulary of benchmark
/// inputs.
pub fn input_gate_set() -> GateSet {
    builtin_gate_set("clifford_t")
        .and_then(|g| g.extended("clifford_t+input", &[x_def(), z_def(), ccx_def(), ccz_def()]))
        .expect("builtin definitions are valid")
}

/// Symbolic argument expression: `p_i`, `2p_i` or `p_i + p_j` (`i < j`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ParamExpr {
    Var(usize),
    Double(usize),
    Sum(usize, usize),
}

impl ParamExpr {
    pub fn params(&self) -> impl Iterator<Item = usize> {
        let (a, b) = match *self {
            ParamExpr::Var(i) | ParamExpr::Double(i) => (i, None),
            ParamExpr::Sum(i, j) => (i, Some(j)),
        };
        std::iter::once(a).chain(b)
    }

    pub fn max_param(&self) -> usize {
        self.params().max().unwrap_or(0)
    }

    pub fn to_lin(&self) -> Lin {
        match *self {
            ParamExpr::Var(i) => Lin::var(i),
            ParamExpr::Double(i) => Lin::var(i).add(&Lin::var(i)),
            ParamExpr::Sum(i, j) => Lin::var(i).add(&Lin::var(j)),
        }
    }

    pub fn eval(&self, p: &[f64]) -> f64 {
        match *self {
            ParamExpr::Var(i) => p[i],
            ParamExpr::Double(i) => 2.0 * p[i],
            ParamExpr::Sum(i, j) => p[i] + p[j],
        }
    }

    /// Renames parameters, keeping sums in increasing index order.
    pub fn remap(&self, f: impl Fn(usize) -> usize) -> ParamExpr {
        match *self {
            ParamExpr::Var(i) => ParamExpr::Var(f(i)),
            ParamExpr::Double(i) => ParamExpr::Double(f(i)),
            ParamExpr::Sum(i, j) => {
                let (a, b) = (f(i), f(j));
                ParamExpr::Sum(a.min(b), a.max(b))
            }
        }
    }
}

impl fmt::Display for ParamExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamExpr::Var(i) => write!(f, "p{i}"),
            ParamExpr::Double(i) => write!(f, "2p{i}"),
            ParamExpr::Sum(i, j) => write!(f, "p{i}+p{j}"),
        }
    }
}

impl FromStr for ParamExpr {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let idx = |t: &str| -> Result<usize, String> {
            t.strip_prefix('p')
                .and_then(|d| d.parse().ok())
                .ok_or_else(|| format!("bad parameter expression '{s}'"))
        };
        let s2 = s.trim();
        if let Some((a, b)) = s2.split_once('+') {
            let (i, j) = (idx(a.trim())?, idx(b.trim())?);
            if i >= j {
                return Err(format!("'{s}': indices must increase"));
            }
            return Ok(ParamExpr::Sum(i, j));
        }
        if let Some(rest) = s2.strip_prefix('2') {
            return Ok(ParamExpr::Double(idx(rest)?));
        }
        Ok(ParamExpr::Var(idx(s2)?))
    }
}

/// The allowed argument expressions Σ.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ParamSpec {
    pub num_params: usize,
    /// Sorted, without duplicates.
    pub exprs: Vec<ParamExpr>,
    pub single_use: bool,
}

impl ParamSpec {
    /// `{p_i} ∪ {2p_i} ∪ {p_i + p_j : i < j}` with single use.
    pub fn standard(m: usize) -> Self {
        let mut exprs: Vec<ParamExpr> = (0..m).map(ParamExpr::Var).collect();
        exprs.extend((0..m).map(ParamExpr::Double));
        for i in 0..m {
            for j in i + 1..m {
                exprs.push(ParamExpr::Sum(i, j));
            }
        }
        ParamSpec { num_params: m, exprs, single_use: true }
    }

    pub fn new(num_params: usize, mut exprs: Vec<ParamExpr>, single_use: bool) -> Result<Self, String> {
        if let Some(e) = exprs.iter().find(|e| e.max_param() >= num_params) {
            return Err(format!("expression {e} refers past p{}", num_params.saturating_sub(1)));
        }
        exprs.sort();
        exprs.dedup();
        Ok(ParamSpec { num_params, exprs, single_use })
    }

    /// Argument tuples of the given arity, in lexicographic order, honoring
    /// single use within the tuple.
    pub fn arg_tuples(&self, arity: usize) -> Vec<Vec<ParamExpr>> {
        let mut out = vec![Vec::new()];
        for _ in 0..arity {
            let mut next = Vec::new();
            for prefix in &out {
                for e in &self.exprs {
                    if self.single_use && shares_param(prefix, e) {
                        continue;
                    }
                    let mut t = prefix.clone();
                    t.push(*e);
                    next.push(t);
                }
            }
            out = next;
        }
        out
    }

    pub fn expr_strings(&self) -> Vec<String> {
        self.exprs.iter().map(|e| e.to_string()).collect()
    }
}

fn shares_param(prefix: &[ParamExpr], e: &ParamExpr) -> bool {
    prefix.iter().any(|x| x.params().any(|p| e.params().any(|q| p == q)))
}

/// All single-instruction circuits over `q` qubits, in the fixed total
/// order used to compare circuits.
pub fn enumerate_single_gate_circuits(gs: &GateSet, sigma: &ParamSpec, q: usize) -> Vec<Instr> {
    let mut out = Vec::new();
    for (gid, g) in gs.gates.iter().enumerate() {
        let tuples = sigma.arg_tuples(g.param_arity);
        let qtuples = qubit_tuples(q, g.qubit_arity);
        for args in &tuples {
            for qs in &qtuples {
                out.push(Instr {
                    gate: gid,
                    args: args.iter().map(|e| Arg::Sym(*e)).collect(),
                    qubits: qs.clone(),
                });
            }
        }
    }
    out
}

/// Ordered tuples of distinct qubits, lexicographic.
pub fn qubit_tuples(q: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        let mut next = Vec::new();
        for t in &out {
            for x in 0..q {
                if !t.contains(&x) {
                    let mut t2 = t.clone();
                    t2.push(x);
                    next.push(t2);
                }
            }
        }
        out = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::sim::equal_up_to_phase;
    use std::f64::consts::PI;

    #[test]
    fn builtin_sizes() {
        let nam = builtin_gate_set("nam").unwrap();
        assert_eq!(nam.gates.len(), 4);
        assert_eq!(nam.gates.iter().filter(|g| g.param_arity > 0).count(), 1);
        let ct = builtin_gate_set("clifford_t").unwrap();
        assert_eq!(ct.gates.len(), 6);
        assert!(ct.gates.iter().all(|g| g.param_arity == 0));
        let rig = builtin_gate_set("rigetti").unwrap();
        assert_eq!(rig.gates.len(), 5);
        assert_eq!(rig.gates[2].name, "X");
        assert!(builtin_gate_set("nope").is_err());
    }

    #[test]
    fn builtin_gates_are_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for name in ["nam", "ibm", "rigetti", "clifford_t"] {
            let gs = builtin_gate_set(name).unwrap();
            for g in &gs.gates {
                for _ in 0..100 {
                    let args: Vec<f64> = (0..g.param_arity).map(|_| rng.gen_range(0.0..2.0 * PI)).collect();
                    let m = g.eval_matrix(&args).unwrap();
                    assert!(unitarity_error(&m, g.dim()) < 1e-10, "{}", g.name);
                }
            }
        }
    }

    #[test]
    fn u1_at_zero_is_identity() {
        let ibm = builtin_gate_set("ibm").unwrap();
        let m = gate_matrix(&ibm.gates[0], &[Lin::zero()]).unwrap().eval(&[]).unwrap();
        let id = [1.0, 0.0, 0.0, 1.0];
        for (a, b) in m.iter().zip(id) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn u3_pi_0_pi_is_x_up_to_phase() {
        let ibm = builtin_gate_set("ibm").unwrap();
        let m = ibm.gates[2].eval_matrix(&[PI, 0.0, PI]).unwrap();
        let x: Vec<Complex64> = [0.0, 1.0, 1.0, 0.0].iter().map(|&v| Complex64::new(v, 0.0)).collect();
        assert!(equal_up_to_phase(&m, &x, 1e-12));
    }

    #[test]
    fn cnot_swaps_10_and_11() {
        let nam = builtin_gate_set("nam").unwrap();
        let m = gate_matrix(&nam.gates[3], &[]).unwrap().eval(&[]).unwrap();
        let want = [1., 0., 0., 0., 0., 1., 0., 0., 0., 0., 0., 1., 0., 0., 1., 0.];
        for (a, b) in m.iter().zip(want) {
            assert_eq!(*a, Complex64::new(b, 0.0));
        }
    }

    #[test]
    fn arity_mismatch() {
        let nam = builtin_gate_set("nam").unwrap();
        assert!(matches!(gate_matrix(&nam.gates[2], &[]), Err(GateError::Arity { .. })));
    }

    #[test]
    fn characteristic_counts() {
        let cases = [("nam", 2, 27), ("rigetti", 2, 30), ("ibm", 4, 1362)];
        for (name, m, want) in cases {
            let gs = builtin_gate_set(name).unwrap();
            let singles = enumerate_single_gate_circuits(&gs, &ParamSpec::standard(m), 3);
            assert_eq!(singles.len(), want, "{name}");
            let mut dedup = singles.clone();
            dedup.sort();
            dedup.dedup();
            assert_eq!(dedup.len(), singles.len());
        }
    }

    #[test]
    fn enumeration_is_sorted() {
        let gs = builtin_gate_set("ibm").unwrap();
        let singles = enumerate_single_gate_circuits(&gs, &ParamSpec::standard(3), 2);
        assert!(singles.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn standard_family() {
        let s = ParamSpec::standard(2);
        assert_eq!(s.expr_strings(), ["p0", "p1", "2p0", "2p1", "p0+p1"]);
        assert_eq!(ParamSpec::standard(4).exprs.len(), 14);
        for e in &s.exprs {
            assert_eq!(e.to_string().parse::<ParamExpr>().unwrap(), *e);
        }
    }

    #[test]
    fn single_use_within_tuple() {
        let s = ParamSpec::standard(2);
        let t = s.arg_tuples(2);
        // p0 with p1, 2p1; p1 with p0, 2p0; likewise for the doubles.
        assert_eq!(t.len(), 8);
    }

    #[test]
    fn gate_set_json_round_trip() {
        let gs = builtin_gate_set("ibm").unwrap();
        let back = GateSet::from_json(&gs.to_json()).unwrap();
        assert_eq!(back.hash(), gs.hash());
        assert_ne!(gs.hash(), builtin_gate_set("nam").unwrap().hash());
    }

    #[test]
    fn rejects_bad_definitions() {
        let non_unitary = def("Bad", "bad", 1, 0, &[&["1", "1"], &["0", "1"]]);
        assert!(Gate::from_def(&non_unitary).is_err());
        let bare = def("Bare", "bare", 1, 1, &[&["a0", "0"], &["0", "1"]]);
        assert!(Gate::from_def(&bare).is_err());
        let aperiodic = def("Q", "q", 1, 1, &[&["1", "0"], &["0", "exp(i*a0/4)"]]);
        assert!(Gate::from_def(&aperiodic).is_err());
        let out_of_range = def("R", "r", 1, 1, &[&["1", "0"], &["0", "exp(i*a1)"]]);
        assert!(Gate::from_def(&out_of_range).is_err());
    }
}
