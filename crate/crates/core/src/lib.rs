// SPDX-License-Identifier: Apache-2.0

//! Generation, verification, pruning and application of quantum circuit
//! transformations for arbitrary gate sets.

pub mod circuit;
pub mod eccset;
pub mod fingerprint;
pub mod gatedef;
pub mod generator;
pub mod optimizer;
pub mod preprocess;
pub mod pruning;
pub mod symexpr;
pub mod verifier;

pub use circuit::{precedes, Angle, Arg, Circuit, CircuitDag, CircuitError, Instr};
pub use gatedef::{builtin_gate_set, input_gate_set, GateSet, ParamExpr, ParamSpec};
pub use eccset::{Ecc, EccSet, EccSetError};
pub use optimizer::{extract_transformations, optimize, SearchConfig, Transformation};
pub use verifier::Verifier;
