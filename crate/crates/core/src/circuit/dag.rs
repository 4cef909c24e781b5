// SPDX-License-Identifier: Apache-2.0

//! Graph form of a circuit: one vertex per gate plus a source and a sink per
//! qubit; every gate over d qubits has d labelled in-edges and d labelled
//! out-edges, the label being the operand slot.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use super::{Circuit, Instr};

/// One end of a wire segment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Port {
    Source(usize),
    Sink(usize),
    Gate { node: usize, slot: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CircuitDag {
    pub num_qubits: usize,
    pub num_params: usize,
    /// Gate vertices, numbered in canonical topological order.
    pub nodes: Vec<Instr>,
    /// `pred[v][s]`: where operand slot `s` of `v` comes from.
    pub pred: Vec<Vec<Port>>,
    /// `succ[v][s]`: where operand slot `s` of `v` goes to.
    pub succ: Vec<Vec<Port>>,
    pub source_succ: Vec<Port>,
    pub sink_pred: Vec<Port>,
}

impl CircuitDag {
    pub fn from_circuit(c: &Circuit) -> CircuitDag {
        let c = c.canonical();
        let n = c.num_qubits;
        let mut last: Vec<Port> = (0..n).map(Port::Source).collect();
        let mut source_succ: Vec<Port> = (0..n).map(Port::Sink).collect();
        let mut pred = Vec::with_capacity(c.len());
        let mut succ: Vec<Vec<Port>> = Vec::with_capacity(c.len());
        for (v, ins) in c.instrs.iter().enumerate() {
            let mut p = Vec::with_capacity(ins.qubits.len());
            for (slot, &q) in ins.qubits.iter().enumerate() {
                let here = Port::Gate { node: v, slot };
                match last[q] {
                    Port::Source(q0) => source_succ[q0] = here,
                    Port::Gate { node, slot } => succ[node][slot] = here,
                    Port::Sink(_) => unreachable!(),
                }
                p.push(last[q]);
                last[q] = here;
            }
            pred.push(p);
            succ.push(ins.qubits.iter().map(|&q| Port::Sink(q)).collect());
        }
        CircuitDag {
            num_qubits: n,
            num_params: c.num_params,
            nodes: c.instrs,
            pred,
            succ,
            source_succ,
            sink_pred: last,
        }
    }

    /// Sequence form in canonical topological order.
    pub fn to_circuit(&self) -> Circuit {
        Circuit::from_instrs(self.num_qubits, self.num_params, self.nodes.clone()).canonical()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// All inputs of `v` come straight from sources.
    pub fn is_first(&self, v: usize) -> bool {
        self.pred[v].iter().all(|p| matches!(p, Port::Source(_)))
    }

    /// All outputs of `v` go straight to sinks.
    pub fn is_last(&self, v: usize) -> bool {
        self.succ[v].iter().all(|p| matches!(p, Port::Sink(_)))
    }

    /// Gate predecessors of `v`, one per slot (None for a source).
    pub fn gate_preds(&self, v: usize) -> impl Iterator<Item = Option<(usize, usize)>> + '_ {
        self.pred[v].iter().map(|p| match *p {
            Port::Gate { node, slot } => Some((node, slot)),
            _ => None,
        })
    }

    pub fn gate_succs(&self, v: usize) -> impl Iterator<Item = Option<(usize, usize)>> + '_ {
        self.succ[v].iter().map(|p| match *p {
            Port::Gate { node, slot } => Some((node, slot)),
            _ => None,
        })
    }

    pub fn edge_count(&self) -> usize {
        self.nodes.iter().map(|i| i.qubits.len()).sum::<usize>() + self.num_qubits
    }
}

/// 64-bit key of the canonical sequence. Collisions are possible; callers
/// needing certainty compare canonical forms.
pub fn canonical_hash(d: &CircuitDag) -> u64 {
    let mut h = DefaultHasher::new();
    d.num_qubits.hash(&mut h);
    d.nodes.hash(&mut h);
    h.finish()
}
