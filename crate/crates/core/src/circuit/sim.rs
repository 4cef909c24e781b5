// SPDX-License-Identifier: Apache-2.0

//! Dense state-vector simulation.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{Arg, Circuit, Instr};
use crate::gatedef::GateSet;

/// Applies a `2^d × 2^d` matrix to `qubits` of an `n`-qubit state.
pub fn apply_matrix(state: &mut [Complex64], n: usize, m: &[Complex64], qubits: &[usize]) {
    let d = qubits.len();
    let k = 1usize << d;
    let offsets: Vec<usize> = (0..k)
        .map(|local| {
            let mut off = 0;
            for (j, &q) in qubits.iter().enumerate() {
                if (local >> (d - 1 - j)) & 1 == 1 {
                    off |= 1 << (n - 1 - q);
                }
            }
            off
        })
        .collect();
    let mask: usize = offsets[k - 1];
    let mut buf = vec![Complex64::new(0.0, 0.0); k];
    for base in 0..state.len() {
        if base & mask != 0 {
            continue;
        }
        for (j, off) in offsets.iter().enumerate() {
            buf[j] = state[base | off];
        }
        for r in 0..k {
            let row = &m[r * k..(r + 1) * k];
            let mut s = Complex64::new(0.0, 0.0);
            for (a, b) in row.iter().zip(&buf) {
                s += a * b;
            }
            state[base | offsets[r]] = s;
        }
    }
}

/// Numeric gate matrix of an instruction at parameter values `params`.
pub fn instr_matrix(gs: &GateSet, ins: &Instr, params: &[f64]) -> Vec<Complex64> {
    let args: Vec<f64> = ins.args.iter().map(|a: &Arg| a.eval(params)).collect();
    gs.gate(ins.gate).eval_matrix(&args).expect("validated gate templates evaluate")
}

pub fn simulate(c: &Circuit, gs: &GateSet, params: &[f64], state: &mut [Complex64]) {
    for ins in &c.instrs {
        let m = instr_matrix(gs, ins, params);
        apply_matrix(state, c.num_qubits, &m, &ins.qubits);
    }
}

/// Full unitary, row-major.
pub fn unitary(c: &Circuit, gs: &GateSet, params: &[f64]) -> Vec<Complex64> {
    let dim = 1usize << c.num_qubits;
    let mut u = vec![Complex64::new(0.0, 0.0); dim * dim];
    for col in 0..dim {
        let mut e = vec![Complex64::new(0.0, 0.0); dim];
        e[col] = Complex64::new(1.0, 0.0);
        simulate(c, gs, params, &mut e);
        for row in 0..dim {
            u[row * dim + col] = e[row];
        }
    }
    u
}

/// Unit-norm vector with i.i.d. complex Gaussian entries.
pub fn random_state(rng: &mut impl Rng, dim: usize) -> Vec<Complex64> {
    let mut v: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|z| *z /= norm);
    v
}

pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// `a = e^{iβ}·b` for some β, entrywise within `tol`.
pub fn equal_up_to_phase(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let Some(k) = (0..b.len()).max_by(|&i, &j| b[i].norm().total_cmp(&b[j].norm())) else {
        return true;
    };
    if b[k].norm() < tol {
        return a.iter().all(|z| z.norm() < tol);
    }
    let phase = a[k] / b[k];
    if (phase.norm() - 1.0).abs() > tol {
        return false;
    }
    a.iter().zip(b).all(|(x, y)| (x - phase * y).norm() < tol)
}

/// Checks that `a` and `b` act identically up to one global phase on
/// `trials` random input states; the phase is shared across all inputs.
pub fn same_action_up_to_phase(
    a: &Circuit,
    b: &Circuit,
    gs_a: &GateSet,
    gs_b: &GateSet,
    trials: usize,
    seed: u64,
    tol: f64,
) -> bool {
    if a.num_qubits != b.num_qubits {
        return false;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = 1usize << a.num_qubits;
    let mut outs_a = Vec::new();
    let mut outs_b = Vec::new();
    for _ in 0..trials {
        let psi = random_state(&mut rng, dim);
        let mut x = psi.clone();
        let mut y = psi;
        simulate(a, gs_a, &[], &mut x);
        simulate(b, gs_b, &[], &mut y);
        outs_a.extend(x);
        outs_b.extend(y);
    }
    equal_up_to_phase(&outs_a, &outs_b, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gatedef::builtin_gate_set;

    #[test]
    fn state_simulation_matches_symbolic_matrix() {
        let gs = builtin_gate_set("nam").unwrap();
        let c = Circuit::from_text("H 2; CNOT 2 0; Rz p0 1; CNOT 0 1; X 2; Rz p1 0", &gs, 3, 2).unwrap();
        let p = [0.37, 2.1];
        let u = unitary(&c, &gs, &p);
        let s = c.matrix(&gs).unwrap().eval(&p).unwrap();
        for (a, b) in u.iter().zip(&s) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn phase_comparison() {
        let a = vec![Complex64::new(0.0, 1.0), Complex64::new(1.0, 0.0)];
        let b = vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, -1.0)];
        assert!(equal_up_to_phase(&a, &b, 1e-12));
        let c = vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)];
        assert!(!equal_up_to_phase(&a, &c, 1e-12));
    }

    #[test]
    fn random_states_are_normalized() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let v = random_state(&mut rng, 16);
        assert!((inner(&v, &v).re - 1.0).abs() < 1e-12);
    }
}
