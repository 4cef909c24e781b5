// SPDX-License-Identifier: Apache-2.0

//! Equivalence of symbolic circuits up to a global phase `e^{i(a·p + b)}`.
//!
//! Candidate phases come from one numeric evaluation; each surviving
//! candidate is checked exactly. Both circuit matrices are expanded into
//! polynomials over half-angle sines and cosines, the difference
//! `M1 − e^{iβ}·M2` is split into real and imaginary parts, and the claim
//! "some part is nonzero" is handed to an SMT solver (unsat means
//! equivalent). An in-process algebraic backend decides the same question
//! by reducing modulo `s² + c² = 1`.

pub mod smt;

use std::collections::HashMap;
use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

use crate::circuit::{Arg, Circuit};
use crate::fingerprint::FingerprintContext;
use crate::gatedef::{gate_matrix, GateError, GateSet};
use crate::symexpr::{Exact, Lin, Poly, Rational, SymError, SymMatrix, TrigBasis};

pub use smt::{SatResult, SolverConfig, SolverError, SolverSession};

/// Coefficient range of `a` and the number of `b` steps of `π/4`.
pub const PHASE_COEFF_RANGE: i32 = 2;
pub const PHASE_CONST_STEPS: i64 = 8;

/// `β(p) = a·p + b·π/4`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PhaseFactor {
    pub a: Vec<i32>,
    /// Multiple of `π/4` in `0..8`.
    pub b: i64,
}

impl PhaseFactor {
    pub fn constant(b: i64, m: usize) -> Self {
        PhaseFactor { a: vec![0; m], b }
    }

    pub fn is_constant(&self) -> bool {
        self.a.iter().all(|&x| x == 0)
    }

    pub fn to_lin(&self) -> Lin {
        let mut l = Lin::pi_multiple(Rational::new(self.b as i128, 4));
        for (k, &c) in self.a.iter().enumerate() {
            if c != 0 {
                l = l.add(&Lin::var(k).scale(&Rational::from_integer(c as i128)));
            }
        }
        l
    }

    pub fn eval(&self, params: &[f64]) -> f64 {
        let lin: f64 = self.a.iter().zip(params).map(|(&c, &p)| c as f64 * p).sum();
        lin + self.b as f64 * std::f64::consts::FRAC_PI_4
    }
}

impl fmt::Display for PhaseFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_lin().fmt_with("p"))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Verdict {
    Verified(PhaseFactor),
    /// No candidate phase survived, or the solver found a point where the
    /// matrices differ; `counterexample` holds such parameter values when
    /// known.
    NotEquivalent { counterexample: Option<Vec<f64>> },
    /// Every candidate that was not refuted timed out or came back unknown.
    Inconclusive,
}

impl Verdict {
    pub fn is_verified(&self) -> bool {
        matches!(self, Verdict::Verified(_))
    }
}

/// Outcome of one exact check against a fixed phase.
#[derive(Clone, Debug, PartialEq)]
pub enum Check {
    Verified,
    Refuted { counterexample: Option<Vec<f64>> },
    Inconclusive,
}

#[derive(Debug, Error)]
pub enum VerifierError {
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Sym(#[from] SymError),
    #[error(transparent)]
    Gate(#[from] GateError),
    #[error("circuits differ in shape: {0}")]
    Shape(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Backend {
    Smt,
    Algebraic,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VerifierStats {
    pub pairs: u64,
    pub queries: u64,
    pub unsat: u64,
    pub sat: u64,
    pub unknown: u64,
    pub verified_constant_phase: u64,
    pub verified_linear_phase: u64,
    pub no_candidate: u64,
}

pub struct Verifier {
    pub backend: Backend,
    /// Complex tolerance for candidate phases.
    pub tolerance: f64,
    session: SolverSession,
    contexts: HashMap<(usize, usize), FingerprintContext>,
    pub stats: VerifierStats,
}

impl Verifier {
    pub fn new(backend: Backend, cfg: SolverConfig) -> Self {
        Verifier {
            backend,
            tolerance: 1e-9,
            session: SolverSession::new(cfg),
            contexts: HashMap::new(),
            stats: VerifierStats::default(),
        }
    }

    pub fn smt() -> Self {
        Self::new(Backend::Smt, SolverConfig::default())
    }

    pub fn algebraic() -> Self {
        Self::new(Backend::Algebraic, SolverConfig::default())
    }

    /// Fails with a configuration error if the SMT backend cannot start.
    pub fn preflight(&mut self) -> Result<(), VerifierError> {
        if self.backend == Backend::Smt {
            self.session.ensure_started()?;
        }
        Ok(())
    }

    /// Equivalence with the candidate search seeded by a fresh default
    /// context for the circuits' shape.
    pub fn verify_pair(&mut self, gs: &GateSet, c1: &Circuit, c2: &Circuit) -> Result<Verdict, VerifierError> {
        let key = (c1.num_qubits, c1.num_params.max(c2.num_params));
        let ctx = self
            .contexts
            .entry(key)
            .or_insert_with(|| FingerprintContext::with_defaults(key.0, key.1))
            .clone();
        self.verify_pair_with(gs, c1, c2, &ctx)
    }

    pub fn verify_pair_with(
        &mut self,
        gs: &GateSet,
        c1: &Circuit,
        c2: &Circuit,
        ctx: &FingerprintContext,
    ) -> Result<Verdict, VerifierError> {
        let v1 = ctx.amplitude(c1, gs);
        let v2 = ctx.amplitude(c2, gs);
        self.verify_with_amplitudes(gs, c1, c2, &ctx.p0, v1, v2)
    }

    /// As [`Self::verify_pair_with`] when `⟨ψ0|C(p0)|ψ1⟩` is already known
    /// for both circuits.
    pub fn verify_with_amplitudes(
        &mut self,
        gs: &GateSet,
        c1: &Circuit,
        c2: &Circuit,
        p0: &[f64],
        v1: Complex64,
        v2: Complex64,
    ) -> Result<Verdict, VerifierError> {
        if c1.num_qubits != c2.num_qubits {
            return Err(VerifierError::Shape(format!("{} vs {} qubits", c1.num_qubits, c2.num_qubits)));
        }
        self.stats.pairs += 1;
        let cands = phase_candidates(v1, v2, p0, self.tolerance);
        if cands.is_empty() {
            self.stats.no_candidate += 1;
            return Ok(Verdict::NotEquivalent { counterexample: Some(p0.to_vec()) });
        }
        let mut inconclusive = false;
        let mut counterexample = None;
        for ph in cands {
            match self.check(gs, c1, c2, &ph)? {
                Check::Verified => {
                    if ph.is_constant() {
                        self.stats.verified_constant_phase += 1;
                    } else {
                        self.stats.verified_linear_phase += 1;
                    }
                    return Ok(Verdict::Verified(ph));
                }
                Check::Refuted { counterexample: ce } => {
                    if counterexample.is_none() {
                        counterexample = ce;
                    }
                }
                Check::Inconclusive => inconclusive = true,
            }
        }
        if inconclusive {
            log::warn!(
                "inconclusive equivalence check: [{}] vs [{}]",
                c1.to_text(gs),
                c2.to_text(gs)
            );
            return Ok(Verdict::Inconclusive);
        }
        Ok(Verdict::NotEquivalent { counterexample })
    }

    /// Exact check of `C1 = e^{iβ}·C2` for one phase.
    pub fn check(&mut self, gs: &GateSet, c1: &Circuit, c2: &Circuit, phase: &PhaseFactor) -> Result<Check, VerifierError> {
        let (basis, diffs) = difference_parts(gs, c1, c2, phase)?;
        match self.backend {
            Backend::Algebraic => {
                let reduced: Vec<Poly> = diffs.iter().map(Poly::reduce_circle).collect();
                Ok(if reduced.iter().all(Poly::is_zero) {
                    Check::Verified
                } else {
                    Check::Refuted { counterexample: None }
                })
            }
            Backend::Smt => {
                let script = smt::build_script(&basis, &diffs, &self.session.config().logic.clone());
                let vars: Vec<String> = (0..basis.nvars()).map(|s| basis.trig_var(s).name()).collect();
                self.stats.queries += 1;
                match self.session.check(&script, &vars)? {
                    SatResult::Unsat => {
                        self.stats.unsat += 1;
                        Ok(Check::Verified)
                    }
                    SatResult::Sat(model) => {
                        self.stats.sat += 1;
                        let counterexample = model.map(|vals| {
                            (0..basis.num_params())
                                .map(|k| basis.denoms[k] as f64 * vals[2 * k].atan2(vals[2 * k + 1]))
                                .collect()
                        });
                        Ok(Check::Refuted { counterexample })
                    }
                    SatResult::Unknown => {
                        self.stats.unknown += 1;
                        Ok(Check::Inconclusive)
                    }
                }
            }
        }
    }
}

/// All `(a, b)` with `v1 ≈ e^{i(a·p0 + b)}·v2`, constant phases first and
/// then by increasing `b`; nonconstant phases by increasing `Σ|a_k|`.
pub fn phase_candidates(v1: Complex64, v2: Complex64, p0: &[f64], tol: f64) -> Vec<PhaseFactor> {
    let m = p0.len();
    let mut all: Vec<Vec<i32>> = vec![Vec::new()];
    for _ in 0..m {
        all = all
            .into_iter()
            .flat_map(|v| {
                (-PHASE_COEFF_RANGE..=PHASE_COEFF_RANGE).map(move |c| {
                    let mut w = v.clone();
                    w.push(c);
                    w
                })
            })
            .collect();
    }
    all.sort_by_key(|a| (a.iter().map(|x| x.abs()).sum::<i32>(), a.clone()));
    let mut out = Vec::new();
    for a in all {
        for b in 0..PHASE_CONST_STEPS {
            let ph = PhaseFactor { a: a.clone(), b };
            let z = Complex64::from_polar(1.0, ph.eval(p0));
            if (v1 - z * v2).norm() < tol {
                out.push(ph);
            }
        }
    }
    out
}

/// Basis and the real/imaginary parts of every entry of
/// `M1 − e^{iβ}·M2`.
pub fn difference_parts(
    gs: &GateSet,
    c1: &Circuit,
    c2: &Circuit,
    phase: &PhaseFactor,
) -> Result<(TrigBasis, Vec<Poly>), VerifierError> {
    let g1 = gate_matrices(gs, c1)?;
    let g2 = gate_matrices(gs, c2)?;
    let mut basis = TrigBasis::for_exprs(g1.iter().chain(&g2).flat_map(|(m, _)| m.entries.iter()));
    let plin = phase.to_lin();
    basis.absorb(&plin);
    let m1 = poly_matrix(&basis, &g1, c1.num_qubits)?;
    let m2 = poly_matrix(&basis, &g2, c2.num_qubits)?;
    let ph = basis.expi(&plin)?;
    let mut parts = Vec::with_capacity(2 * m1.len());
    for (a, b) in m1.iter().zip(&m2) {
        let d = a.sub(&ph.mul(b));
        parts.push(d.re_part());
        parts.push(d.im_part());
    }
    Ok((basis, parts))
}

fn gate_matrices(gs: &GateSet, c: &Circuit) -> Result<Vec<(SymMatrix, Vec<usize>)>, VerifierError> {
    c.instrs
        .iter()
        .map(|ins| {
            let args: Vec<Lin> = ins.args.iter().map(Arg::to_lin).collect();
            Ok((gate_matrix(gs.gate(ins.gate), &args)?, ins.qubits.clone()))
        })
        .collect()
}

/// Circuit unitary as a row-major matrix of polynomials.
fn poly_matrix(basis: &TrigBasis, gates: &[(SymMatrix, Vec<usize>)], n: usize) -> Result<Vec<Poly>, VerifierError> {
    let nv = basis.nvars();
    let dim = 1usize << n;
    let mut m: Vec<Poly> = (0..dim * dim)
        .map(|k| if k / dim == k % dim { Poly::constant(nv, Exact::one()) } else { Poly::zero(nv) })
        .collect();
    for (g, qubits) in gates {
        let gp: Vec<Poly> = g.entries.iter().map(|e| Poly::from_expr(e, basis)).collect::<Result<_, _>>()?;
        apply_poly_gate(&mut m, dim, n, &gp, qubits);
    }
    Ok(m)
}

/// `m ← G·m` where `G` acts on `qubits`.
fn apply_poly_gate(m: &mut [Poly], dim: usize, n: usize, g: &[Poly], qubits: &[usize]) {
    let d = qubits.len();
    let k = 1usize << d;
    let offsets: Vec<usize> = (0..k)
        .map(|local| {
            qubits
                .iter()
                .enumerate()
                .filter(|(j, _)| (local >> (d - 1 - j)) & 1 == 1)
                .map(|(_, &q)| 1usize << (n - 1 - q))
                .sum()
        })
        .collect();
    let mask = offsets[k - 1];
    let nv = g[0].nvars();
    for col in 0..dim {
        for base in (0..dim).filter(|b| b & mask == 0) {
            let column: Vec<Poly> = offsets.iter().map(|o| m[(base | o) * dim + col].clone()).collect();
            if column.iter().all(Poly::is_zero) {
                continue;
            }
            for r in 0..k {
                let mut acc = Poly::zero(nv);
                for (j, x) in column.iter().enumerate() {
                    let gij = &g[r * k + j];
                    if !gij.is_zero() && !x.is_zero() {
                        acc = acc.add(&gij.mul(x));
                    }
                }
                m[(base | offsets[r]) * dim + col] = acc;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::sim::unitary;
    use crate::gatedef::{builtin_gate_set, input_gate_set};

    fn both() -> [Verifier; 2] {
        [Verifier::smt(), Verifier::algebraic()]
    }

    #[test]
    fn candidates_include_zero_for_identical_circuits() {
        let gs = builtin_gate_set("nam").unwrap();
        let ctx = FingerprintContext::with_defaults(2, 2);
        let c = Circuit::from_text("H 0; Rz p0 1; CNOT 0 1", &gs, 2, 2).unwrap();
        let v = ctx.amplitude(&c, &gs);
        let cands = phase_candidates(v, v, &ctx.p0, 1e-9);
        assert_eq!(cands[0], PhaseFactor::constant(0, 2));
    }

    #[test]
    fn basic_verdicts() {
        let gs = input_gate_set();
        for mut v in both() {
            let hh = Circuit::from_text("H 0; H 0", &gs, 1, 0).unwrap();
            let e = Circuit::new(1, 0);
            assert!(v.verify_pair(&gs, &hh, &e).unwrap().is_verified());
            let tt = Circuit::from_text("T 0; T 0", &gs, 1, 0).unwrap();
            let s = Circuit::from_text("S 0", &gs, 1, 0).unwrap();
            assert_eq!(v.verify_pair(&gs, &tt, &s).unwrap(), Verdict::Verified(PhaseFactor::constant(0, 0)));
            let x = Circuit::from_text("X 0", &gs, 1, 0).unwrap();
            assert!(matches!(v.verify_pair(&gs, &x, &e).unwrap(), Verdict::NotEquivalent { .. }));
        }
    }

    #[test]
    fn refutation_at_fixed_phase_yields_counterexample() {
        let gs = builtin_gate_set("nam").unwrap();
        let mut v = Verifier::smt();
        let a = Circuit::from_text("Rz p0 0", &gs, 1, 1).unwrap();
        let b = Circuit::new(1, 1);
        match v.check(&gs, &a, &b, &PhaseFactor::constant(0, 1)).unwrap() {
            Check::Refuted { counterexample: Some(p) } => {
                let ua = unitary(&a, &gs, &p);
                let ub = unitary(&b, &gs, &p);
                let gap = ua.iter().zip(&ub).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
                assert!(gap > 1e-6, "counterexample {p:?} does not separate");
            }
            other => panic!("expected a refutation with a model, got {other:?}"),
        }
        let h = Circuit::from_text("H 0", &gs, 1, 0).unwrap();
        let x = Circuit::from_text("X 0", &gs, 1, 0).unwrap();
        assert!(matches!(v.check(&gs, &h, &x, &PhaseFactor::constant(0, 0)).unwrap(), Check::Refuted { .. }));
    }

    #[test]
    fn parametric_identities() {
        let gs = builtin_gate_set("nam").unwrap();
        for mut v in both() {
            let a = Circuit::from_text("Rz p0 0; Rz p1 0", &gs, 1, 2).unwrap();
            let b = Circuit::from_text("Rz p0+p1 0", &gs, 1, 2).unwrap();
            assert_eq!(v.verify_pair(&gs, &a, &b).unwrap(), Verdict::Verified(PhaseFactor::constant(0, 2)));
            let a = Circuit::from_text("X 0; Rz p0 0; X 0", &gs, 1, 1).unwrap();
            let b = Circuit::from_text("Rz p0 0", &gs, 1, 1).unwrap();
            assert!(!v.verify_pair(&gs, &a, &b).unwrap().is_verified());
            let a = Circuit::from_text("CNOT 0 1; Rz p0 1; CNOT 0 1; Rz p1 0", &gs, 2, 2).unwrap();
            let b = Circuit::from_text("Rz p1 0; CNOT 0 1; Rz p0 1; CNOT 0 1", &gs, 2, 2).unwrap();
            assert!(v.verify_pair(&gs, &a, &b).unwrap().is_verified());
        }
    }

    #[test]
    fn hadamard_conjugated_cnot_is_reversed_cnot() {
        let gs = builtin_gate_set("nam").unwrap();
        let a = Circuit::from_text("H 0; H 1; CNOT 0 1; H 0; H 1", &gs, 2, 0).unwrap();
        let b = Circuit::from_text("CNOT 1 0", &gs, 2, 0).unwrap();
        for mut v in both() {
            assert_eq!(v.verify_pair(&gs, &a, &b).unwrap(), Verdict::Verified(PhaseFactor::constant(0, 0)));
        }
    }

    #[test]
    fn phase_dependent_on_parameters() {
        // U1(θ) = e^{iθ/2}·Rz(θ): needs a = 1 with a doubled-angle basis.
        let gs = builtin_gate_set("ibm").unwrap();
        let nam = builtin_gate_set("nam").unwrap();
        let joint = gs.extended("ibm_rz", &[nam.gate(nam.find("Rz").unwrap()).def()]).unwrap();
        let a = Circuit::from_text("U1 2p0 0", &joint, 1, 1).unwrap();
        let b = Circuit::from_text("Rz 2p0 0", &joint, 1, 1).unwrap();
        for mut v in both() {
            let verdict = v.verify_pair(&joint, &a, &b).unwrap();
            assert_eq!(verdict, Verdict::Verified(PhaseFactor { a: vec![1], b: 0 }));
        }
    }

    #[test]
    fn dumps_scripts() {
        let dir = std::env::temp_dir().join(format!("qsopt-dump-{}", std::process::id()));
        let cfg = SolverConfig { dump_dir: Some(dir.clone()), ..SolverConfig::default() };
        let mut v = Verifier::new(Backend::Smt, cfg);
        let gs = builtin_gate_set("nam").unwrap();
        let hh = Circuit::from_text("H 0; H 0", &gs, 1, 0).unwrap();
        v.verify_pair(&gs, &hh, &Circuit::new(1, 0)).unwrap();
        let text = std::fs::read_to_string(dir.join("query_000000.smt2")).unwrap();
        assert!(text.starts_with("(set-logic QF_NRA)"));
        let _ = std::fs::remove_dir_all(dir);
    }
}
