// SPDX-License-Identifier: Apache-2.0

//! Random-evaluation fingerprints: `|⟨ψ0| C(p0) |ψ1⟩|` at a fixed random
//! parameter vector and pair of random states, quantized into buckets of
//! width `2·Emax`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuit::sim::{apply_matrix, inner, instr_matrix, random_state, simulate};
use crate::circuit::{Circuit, Instr};
use crate::gatedef::GateSet;

pub const DEFAULT_SEED: u64 = 0x005e_ed0f_c1c5;
pub const DEFAULT_E_MAX: f64 = 1e-15;

pub type FingerprintKey = i64;

#[derive(Clone, Debug)]
pub struct FingerprintContext {
    pub seed: u64,
    pub num_qubits: usize,
    pub p0: Vec<f64>,
    pub psi0: Vec<Complex64>,
    pub psi1: Vec<Complex64>,
    pub e_max: f64,
}

impl FingerprintContext {
    pub fn new(seed: u64, num_qubits: usize, num_params: usize, e_max: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p0 = (0..num_params).map(|_| rng.gen_range(0.0..2.0 * std::f64::consts::PI)).collect();
        let dim = 1usize << num_qubits;
        let psi0 = random_state(&mut rng, dim);
        let psi1 = random_state(&mut rng, dim);
        FingerprintContext { seed, num_qubits, p0, psi0, psi1, e_max }
    }

    pub fn with_defaults(num_qubits: usize, num_params: usize) -> Self {
        Self::new(DEFAULT_SEED, num_qubits, num_params, DEFAULT_E_MAX)
    }

    /// `C(p0)|ψ1⟩`.
    pub fn state(&self, c: &Circuit, gs: &GateSet) -> Vec<Complex64> {
        let mut s = self.psi1.clone();
        simulate(c, gs, &self.p0, &mut s);
        s
    }

    /// State after appending one instruction to a circuit whose state is `s`.
    pub fn extend_state(&self, s: &[Complex64], ins: &Instr, gs: &GateSet) -> Vec<Complex64> {
        let mut out = s.to_vec();
        let m = instr_matrix(gs, ins, &self.p0);
        apply_matrix(&mut out, self.num_qubits, &m, &ins.qubits);
        out
    }

    /// `⟨ψ0|s⟩`: the complex value whose modulus is the fingerprint.
    pub fn amplitude_of_state(&self, s: &[Complex64]) -> Complex64 {
        inner(&self.psi0, s)
    }

    pub fn amplitude(&self, c: &Circuit, gs: &GateSet) -> Complex64 {
        self.amplitude_of_state(&self.state(c, gs))
    }

    pub fn key(&self, fp: f64) -> FingerprintKey {
        (fp / (2.0 * self.e_max)).floor() as FingerprintKey
    }

    /// `(fp, key)`.
    pub fn fingerprint(&self, c: &Circuit, gs: &GateSet) -> (f64, FingerprintKey) {
        let fp = self.amplitude(c, gs).norm();
        (fp, self.key(fp))
    }
}
