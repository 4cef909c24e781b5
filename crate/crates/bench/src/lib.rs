// SPDX-License-Identifier: Apache-2.0

//! Fixtures shared by the benchmarks.

use std::path::PathBuf;

use qsopt_core::circuit::qasm::parse_qasm;
use qsopt_core::fingerprint::{DEFAULT_E_MAX, DEFAULT_SEED};
use qsopt_core::generator::{repgen, GeneratorConfig};
use qsopt_core::preprocess::{run_passes, Pass as PrePass};
use qsopt_core::pruning::{prune, Pass};
use qsopt_core::{input_gate_set, Circuit, EccSet, GateSet, ParamSpec, Verifier};

pub fn generator_config(n: usize, q: usize) -> GeneratorConfig {
    GeneratorConfig { n, q, sigma: ParamSpec::standard(2), seed: DEFAULT_SEED, e_max: DEFAULT_E_MAX }
}

/// Pruned ECC set over `gs`.
pub fn pruned_set(gs: &GateSet, n: usize, q: usize) -> EccSet {
    let g = repgen(gs, &generator_config(n, q), &mut Verifier::algebraic()).expect("generation succeeds");
    prune(&g.eccs, &[Pass::Simplify, Pass::Common])
}

/// A benchmark from the repository's `benchmarks/` directory, preprocessed
/// to the Nam gate set.
pub fn nam_benchmark(name: &str) -> (Circuit, GateSet) {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../benchmarks").join(format!("{name}.qasm"));
    let src = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    let c = parse_qasm(&src, &input_gate_set()).expect("benchmark parses");
    run_passes(&c, &input_gate_set(), "nam", &[PrePass::Toffoli, PrePass::Transpile, PrePass::Merge]).expect("preprocessing succeeds")
}
