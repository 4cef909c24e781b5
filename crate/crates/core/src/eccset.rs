// SPDX-License-Identifier: Apache-2.0

//! Equivalent-circuit classes and the `.eccs` file format.
//!
//! An `.eccs` file is pretty-printed JSON:
//!
//! ```text
//! {
//!   "schema": "qsopt-eccs/1",
//!   "gate_set": { "name": "nam", "hash": "<sha256 of the gate-set JSON>" },
//!   "param_spec": { "exprs": ["p0", "p1", "2p0", "2p1", "p0+p1"], "single_use": true },
//!   "n": 2, "q": 3, "m": 2, "seed": 1234, "e_max": 1e-15,
//!   "counts": { "eccs": 1, "circuits": 2, "transformations": 2 },
//!   "eccs": [ { "q": 1, "m": 0, "circuits": ["()", "H 0; H 0"] } ]
//! }
//! ```
//!
//! The first circuit of every class is its representative.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{Circuit, CircuitError};
use crate::gatedef::{GateSet, ParamSpec};

pub const SCHEMA: &str = "qsopt-eccs/1";

#[derive(Debug, Error)]
pub enum EccSetError {
    #[error("unsupported schema '{found}' (expected '{SCHEMA}')")]
    Schema { found: String },
    #[error("header says {what} = {header}, body has {body}")]
    CountMismatch { what: &'static str, header: usize, body: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("gate set mismatch: file was generated for '{file_name}' ({file_hash}), active set is '{active_name}' ({active_hash})")]
    GateSetMismatch { file_name: String, file_hash: String, active_name: String, active_hash: String },
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

/// A class of pairwise equivalent circuits over a shared shape.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ecc {
    pub num_qubits: usize,
    pub num_params: usize,
    /// Representative first.
    pub circuits: Vec<Circuit>,
}

impl Ecc {
    pub fn new(num_qubits: usize, num_params: usize, circuits: Vec<Circuit>) -> Self {
        Ecc { num_qubits, num_params, circuits }
    }

    pub fn representative(&self) -> &Circuit {
        &self.circuits[0]
    }

    pub fn len(&self) -> usize {
        self.circuits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.circuits.is_empty()
    }

    /// `2(x − 1)`: representative to each member and back.
    pub fn transformation_count(&self) -> usize {
        2 * self.circuits.len().saturating_sub(1)
    }

    /// Sorts members by `≺` so the representative comes first.
    pub fn sort(&mut self) {
        self.circuits.sort();
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EccSetMeta {
    pub gate_set: String,
    pub gate_set_hash: String,
    pub param_exprs: Vec<String>,
    pub single_use: bool,
    pub n: usize,
    pub q: usize,
    pub m: usize,
    pub seed: u64,
    pub e_max: f64,
}

impl EccSetMeta {
    pub fn new(gs: &GateSet, sigma: &ParamSpec, n: usize, q: usize, seed: u64, e_max: f64) -> Self {
        EccSetMeta {
            gate_set: gs.name.clone(),
            gate_set_hash: gs.hash(),
            param_exprs: sigma.expr_strings(),
            single_use: sigma.single_use,
            n,
            q,
            m: sigma.num_params,
            seed,
            e_max,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EccSet {
    pub meta: EccSetMeta,
    pub eccs: Vec<Ecc>,
}

impl EccSet {
    pub fn circuit_count(&self) -> usize {
        self.eccs.iter().map(Ecc::len).sum()
    }

    pub fn transformation_count(&self) -> usize {
        transformation_count(self)
    }

    pub fn to_json(&self, gs: &GateSet) -> String {
        let file = EccFile {
            schema: SCHEMA.to_string(),
            gate_set: GateSetRef { name: self.meta.gate_set.clone(), hash: self.meta.gate_set_hash.clone() },
            param_spec: ParamSpecRecord { exprs: self.meta.param_exprs.clone(), single_use: self.meta.single_use },
            n: self.meta.n,
            q: self.meta.q,
            m: self.meta.m,
            seed: self.meta.seed,
            e_max: self.meta.e_max,
            counts: Counts {
                eccs: self.eccs.len(),
                circuits: self.circuit_count(),
                transformations: self.transformation_count(),
            },
            eccs: self
                .eccs
                .iter()
                .map(|e| EccRecord {
                    q: e.num_qubits,
                    m: e.num_params,
                    circuits: e.circuits.iter().map(|c| c.to_text(gs)).collect(),
                })
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&file).expect("plain data serializes");
        s.push('\n');
        s
    }

    /// Parses and checks the header against the body and against `gs`.
    pub fn from_json(text: &str, gs: &GateSet) -> Result<EccSet, EccSetError> {
        let raw: serde_json::Value = serde_json::from_str(text).map_err(|e| EccSetError::Parse(e.to_string()))?;
        let schema = raw.get("schema").and_then(|v| v.as_str()).unwrap_or("<missing>");
        if schema != SCHEMA {
            return Err(EccSetError::Schema { found: schema.to_string() });
        }
        let file: EccFile = serde_json::from_value(raw).map_err(|e| EccSetError::Parse(e.to_string()))?;
        if file.gate_set.hash != gs.hash() {
            return Err(EccSetError::GateSetMismatch {
                file_name: file.gate_set.name,
                file_hash: file.gate_set.hash,
                active_name: gs.name.clone(),
                active_hash: gs.hash(),
            });
        }
        let mut eccs = Vec::with_capacity(file.eccs.len());
        for (k, rec) in file.eccs.iter().enumerate() {
            let circuits = rec
                .circuits
                .iter()
                .map(|t| Circuit::from_text(t, gs, rec.q, rec.m))
                .collect::<Result<Vec<_>, CircuitError>>()
                .map_err(|e| EccSetError::Parse(format!("class {k}: {e}")))?;
            eccs.push(Ecc::new(rec.q, rec.m, circuits));
        }
        let es = EccSet {
            meta: EccSetMeta {
                gate_set: file.gate_set.name,
                gate_set_hash: file.gate_set.hash,
                param_exprs: file.param_spec.exprs,
                single_use: file.param_spec.single_use,
                n: file.n,
                q: file.q,
                m: file.m,
                seed: file.seed,
                e_max: file.e_max,
            },
            eccs,
        };
        let checks = [
            ("eccs", file.counts.eccs, es.eccs.len()),
            ("circuits", file.counts.circuits, es.circuit_count()),
            ("transformations", file.counts.transformations, es.transformation_count()),
        ];
        for (what, header, body) in checks {
            if header != body {
                return Err(EccSetError::CountMismatch { what, header, body });
            }
        }
        Ok(es)
    }

    pub fn save(&self, path: &Path, gs: &GateSet) -> Result<(), EccSetError> {
        std::fs::write(path, self.to_json(gs))?;
        Ok(())
    }

    pub fn load(path: &Path, gs: &GateSet) -> Result<EccSet, EccSetError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text, gs)
    }

    /// The parameter specification recorded in the header.
    pub fn param_spec(&self) -> Result<ParamSpec, EccSetError> {
        let exprs = self
            .meta
            .param_exprs
            .iter()
            .map(|s| s.parse().map_err(|e| EccSetError::Parse(format!("parameter expression '{s}': {e}"))))
            .collect::<Result<Vec<_>, _>>()?;
        ParamSpec::new(self.meta.m, exprs, self.meta.single_use).map_err(EccSetError::Parse)
    }
}

/// `Σ 2(x − 1)` over all classes.
pub fn transformation_count(es: &EccSet) -> usize {
    es.eccs.iter().map(Ecc::transformation_count).sum()
}

#[derive(Serialize, Deserialize)]
struct EccFile {
    schema: String,
    gate_set: GateSetRef,
    param_spec: ParamSpecRecord,
    n: usize,
    q: usize,
    m: usize,
    seed: u64,
    e_max: f64,
    counts: Counts,
    eccs: Vec<EccRecord>,
}

#[derive(Serialize, Deserialize)]
struct GateSetRef {
    name: String,
    hash: String,
}

#[derive(Serialize, Deserialize)]
struct ParamSpecRecord {
    exprs: Vec<String>,
    single_use: bool,
}

#[derive(Serialize, Deserialize)]
struct Counts {
    eccs: usize,
    circuits: usize,
    transformations: usize,
}

#[derive(Serialize, Deserialize)]
struct EccRecord {
    q: usize,
    m: usize,
    circuits: Vec<String>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gatedef::builtin_gate_set;

    fn sample(gs: &GateSet) -> EccSet {
        let sigma = ParamSpec::standard(2);
        let e1 = Ecc::new(
            1,
            0,
            vec![Circuit::new(1, 0), Circuit::from_text("H 0; H 0", gs, 1, 0).unwrap()],
        );
        let e2 = Ecc::new(
            1,
            2,
            vec![
                Circuit::from_text("Rz p0+p1 0", gs, 1, 2).unwrap(),
                Circuit::from_text("Rz p0 0; Rz p1 0", gs, 1, 2).unwrap(),
                Circuit::from_text("Rz p1 0; Rz p0 0", gs, 1, 2).unwrap(),
            ],
        );
        EccSet { meta: EccSetMeta::new(gs, &sigma, 2, 3, 7, 1e-15), eccs: vec![e1, e2] }
    }

    #[test]
    fn counts() {
        let gs = builtin_gate_set("nam").unwrap();
        let es = sample(&gs);
        assert_eq!(es.transformation_count(), 6);
        assert_eq!(es.circuit_count(), 5);
        let empty = EccSet { meta: es.meta.clone(), eccs: vec![] };
        assert_eq!(transformation_count(&empty), 0);
        assert_eq!(es.eccs[0].transformation_count(), 2);
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let gs = builtin_gate_set("nam").unwrap();
        let es = sample(&gs);
        let text = es.to_json(&gs);
        let back = EccSet::from_json(&text, &gs).unwrap();
        assert_eq!(back, es);
        assert_eq!(back.to_json(&gs), text);
        assert_eq!(back.param_spec().unwrap(), ParamSpec::standard(2));
    }

    #[test]
    fn distinct_load_errors() {
        let gs = builtin_gate_set("nam").unwrap();
        let text = sample(&gs).to_json(&gs);
        let tampered = text.replace("\"transformations\": 6", "\"transformations\": 7");
        assert!(matches!(EccSet::from_json(&tampered, &gs), Err(EccSetError::CountMismatch { .. })));
        let schema = text.replace(SCHEMA, "qsopt-eccs/99");
        assert!(matches!(EccSet::from_json(&schema, &gs), Err(EccSetError::Schema { .. })));
        assert!(matches!(EccSet::from_json("{not json", &gs), Err(EccSetError::Parse(_))));
        let bad_circuit = text.replace("H 0; H 0", "H 7");
        assert!(matches!(EccSet::from_json(&bad_circuit, &gs), Err(EccSetError::Parse(_))));
        let ibm = builtin_gate_set("ibm").unwrap();
        assert!(matches!(EccSet::from_json(&text, &ibm), Err(EccSetError::GateSetMismatch { .. })));
        assert!(matches!(EccSet::load(Path::new("/nonexistent/x.eccs"), &gs), Err(EccSetError::Io(_))));
    }

    #[test]
    fn generated_set_round_trips_byte_identically() {
        use crate::generator::{repgen, GeneratorConfig};
        let gs = builtin_gate_set("nam").unwrap();
        let cfg = GeneratorConfig { n: 2, q: 3, sigma: ParamSpec::standard(2), seed: 11, e_max: 1e-15 };
        let es = repgen(&gs, &cfg, &mut crate::verifier::Verifier::algebraic()).unwrap().eccs;
        let text = es.to_json(&gs);
        let back = EccSet::from_json(&text, &gs).unwrap();
        assert_eq!(back, es);
        assert_eq!(back.to_json(&gs), text);
    }
}
