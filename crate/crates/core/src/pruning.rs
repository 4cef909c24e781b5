// SPDX-License-Identifier: Apache-2.0

//! Redundancy elimination on generated ECC sets.
//!
//! Two passes, both preserving completeness: [`simplify_eccs`] shrinks every
//! class to the qubits and parameters it uses and drops duplicates, and
//! [`prune_common_subcircuit`] removes members that share a boundary gate
//! with their representative.

use std::collections::{BTreeSet, HashSet};

use crate::circuit::{Arg, Circuit, Instr};
use crate::gatedef::ParamExpr;
use crate::eccset::{Ecc, EccSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pass {
    Simplify,
    Common,
}

impl std::str::FromStr for Pass {
    type Err = String;
    fn from_str(s: &str) -> Result<Pass, String> {
        match s {
            "simplify" => Ok(Pass::Simplify),
            "common" => Ok(Pass::Common),
            _ => Err(format!("unknown pruning pass '{s}' (expected simplify or common)")),
        }
    }
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    permute(&mut cur, 0, &mut out);
    out.sort();
    out
}

fn permute(cur: &mut Vec<usize>, i: usize, out: &mut Vec<Vec<usize>>) {
    if i == cur.len() {
        out.push(cur.clone());
        return;
    }
    for j in i..cur.len() {
        cur.swap(i, j);
        permute(cur, i + 1, out);
        cur.swap(i, j);
    }
}

/// Members in canonical order, deduplicated and sorted by `≺`.
fn normalize(circuits: impl IntoIterator<Item = Circuit>) -> Vec<Circuit> {
    let set: BTreeSet<Circuit> = circuits.into_iter().map(|c| c.canonical()).collect();
    set.into_iter().collect()
}

/// Removes unused qubits and parameters from each class, drops classes
/// left with fewer than two distinct circuits, and keeps one class out of
/// each group that coincides up to a renaming of parameters. Renamings
/// are tried only for classes whose arguments are all bare parameters; a
/// derived argument such as `2p0` or `p0+p1` keeps its identity.
pub fn simplify_eccs(es: &EccSet) -> EccSet {
    let mut seen: HashSet<Vec<Vec<Instr>>> = HashSet::new();
    let mut eccs = Vec::new();
    for e in &es.eccs {
        let qubits: BTreeSet<usize> = e.circuits.iter().flat_map(Circuit::qubits_used).collect();
        let params: BTreeSet<usize> = e.circuits.iter().flat_map(Circuit::params_used).collect();
        let mut qmap = vec![usize::MAX; e.num_qubits];
        for (k, &q) in qubits.iter().enumerate() {
            qmap[q] = k;
        }
        let used: Vec<usize> = params.into_iter().collect();
        let (nq, np) = (qubits.len(), used.len());
        let derived = e.circuits.iter().flat_map(|c| &c.instrs).flat_map(|i| &i.args).any(|a| matches!(a, Arg::Sym(ParamExpr::Double(_) | ParamExpr::Sum(..))));
        let renamings = if derived { vec![(0..np).collect()] } else { permutations(np) };
        // Among the admissible renamings, the least sorted member list.
        let mut best: Option<Vec<Circuit>> = None;
        for perm in renamings {
            let mut pmap = vec![usize::MAX; e.num_params.max(used.last().map_or(0, |p| p + 1))];
            for (k, &p) in used.iter().enumerate() {
                pmap[p] = perm[k];
            }
            let members = normalize(e.circuits.iter().map(|c| c.remap(&qmap, &pmap, nq, np)));
            if best.as_ref().is_none_or(|b| members < *b) {
                best = Some(members);
            }
        }
        let members = best.expect("at least the identity renaming");
        if members.len() < 2 {
            continue;
        }
        if seen.insert(members.iter().map(|c| c.instrs.clone()).collect()) {
            eccs.push(Ecc::new(nq, np, members));
        }
    }
    EccSet { meta: es.meta.clone(), eccs }
}

fn boundary(c: &Circuit, last: bool) -> Vec<&Instr> {
    let idx = if last { c.last_gate_indices() } else { c.first_gate_indices() };
    idx.into_iter().map(|i| &c.instrs[i]).collect()
}

/// Drops every non-representative member whose topologically first gate
/// also starts the representative, or whose last gate also ends it. The
/// two transformations of such a member reduce to a pair over fewer gates.
pub fn prune_common_subcircuit(es: &EccSet) -> EccSet {
    let mut eccs = Vec::new();
    for e in &es.eccs {
        let rep = e.representative();
        let (rf, rl) = (boundary(rep, false), boundary(rep, true));
        let mut keep = vec![rep.clone()];
        for c in &e.circuits[1..] {
            let shares_first = boundary(c, false).iter().any(|g| rf.contains(g));
            let shares_last = boundary(c, true).iter().any(|g| rl.contains(g));
            if !shares_first && !shares_last {
                keep.push(c.clone());
            }
        }
        if keep.len() >= 2 {
            eccs.push(Ecc::new(e.num_qubits, e.num_params, keep));
        }
    }
    EccSet { meta: es.meta.clone(), eccs }
}

/// Runs the passes in order, repeating the sequence until nothing changes.
pub fn prune(es: &EccSet, passes: &[Pass]) -> EccSet {
    let mut cur = es.clone();
    loop {
        let mut next = cur.clone();
        for p in passes {
            next = match p {
                Pass::Simplify => simplify_eccs(&next),
                Pass::Common => prune_common_subcircuit(&next),
            };
        }
        if next == cur {
            return cur;
        }
        cur = next;
    }
}
