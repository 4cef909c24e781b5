// SPDX-License-Identifier: Apache-2.0

//! Passes run before the optimizer: gate-set transpilation, Toffoli
//! decomposition with greedy polarity, rotation merging and the Rigetti
//! lowering.

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::circuit::{Angle, Arg, Circuit, CircuitError, Instr};
use crate::gatedef::{builtin_gate_set, GateError, GateSet};

#[derive(Debug, Error)]
pub enum PreprocessError {
    #[error("no rule rewrites gate '{gate}' into gate set '{target}'")]
    MissingRule { gate: String, target: String },
    #[error("symbolic argument in gate '{0}'; preprocessing needs concrete angles")]
    Symbolic(String),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Gate(#[from] GateError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pass {
    Transpile,
    Toffoli,
    Merge,
    Rigetti,
}

impl std::str::FromStr for Pass {
    type Err = String;
    fn from_str(s: &str) -> Result<Pass, String> {
        match s {
            "transpile" => Ok(Pass::Transpile),
            "toffoli" => Ok(Pass::Toffoli),
            "merge" => Ok(Pass::Merge),
            "rigetti" => Ok(Pass::Rigetti),
            _ => Err(format!("unknown preprocessing pass '{s}' (expected transpile, toffoli, merge or rigetti)")),
        }
    }
}

/// One gate of a rewrite, by name.
type Step = (&'static str, Vec<Angle>, Vec<usize>);

fn pi(n: i128, d: i128) -> Angle {
    Angle::pi_frac(n, d)
}

fn const_args(gs: &GateSet, ins: &Instr) -> Result<Vec<Angle>, PreprocessError> {
    ins.args
        .iter()
        .map(|a| match a {
            Arg::Const(x) => Ok(x.clone()),
            Arg::Sym(_) => Err(PreprocessError::Symbolic(gs.gate(ins.gate).name.clone())),
        })
        .collect()
}

/// Rewrites one named gate toward the target vocabulary. `None` when no
/// rule applies.
fn lower_step(name: &str, args: &[Angle], q: &[usize], to: &GateSet) -> Option<Vec<Step>> {
    let has = |n: &str| to.find(n).is_some();
    let rz = |a: Angle| -> Step { if has("U1") && !has("Rz") { ("U1", vec![a], q.to_vec()) } else { ("Rz", vec![a], q.to_vec()) } };
    Some(match name {
        "T" => vec![rz(pi(1, 4))],
        "Tdg" => vec![rz(pi(-1, 4))],
        "S" => vec![rz(pi(1, 2))],
        "Sdg" => vec![rz(pi(-1, 2))],
        "Z" => vec![rz(pi(1, 1))],
        "Rz" if has("U1") => vec![("U1", args.to_vec(), q.to_vec())],
        "U1" if has("Rz") => vec![("Rz", args.to_vec(), q.to_vec())],
        "H" if has("U2") => vec![("U2", vec![Angle::zero(), pi(1, 1)], q.to_vec())],
        "X" if has("U3") => vec![("U3", vec![pi(1, 1), Angle::zero(), pi(1, 1)], q.to_vec())],
        "H" if has("Rx90") && has("Rz") && has("X") => vec![
            ("Rz", vec![pi(-1, 2)], q.to_vec()),
            ("Rx90", vec![], q.to_vec()),
            ("Rz", vec![pi(1, 2)], q.to_vec()),
            ("X", vec![], q.to_vec()),
        ],
        "CNOT" if has("CZ") => vec![("H", vec![], vec![q[1]]), ("CZ", vec![], q.to_vec()), ("H", vec![], vec![q[1]])],
        _ => return None,
    })
}

/// Rewrites every gate of `c` (over `from`) into `to`, gate by gate. Gates
/// present in both sets under the same name are copied.
pub fn transpile(c: &Circuit, from: &GateSet, to: &GateSet) -> Result<Circuit, PreprocessError> {
    let mut out = Circuit::new(c.num_qubits, c.num_params);
    for ins in &c.instrs {
        let name = from.gate(ins.gate).name.clone();
        emit(&name, const_args(from, ins)?, ins.qubits.clone(), to, &mut out, 0)?;
    }
    Ok(out)
}

fn emit(name: &str, args: Vec<Angle>, qubits: Vec<usize>, to: &GateSet, out: &mut Circuit, depth: usize) -> Result<(), PreprocessError> {
    if let Some(id) = to.find(name) {
        out.push(Instr::new(id, args.into_iter().map(Arg::Const).collect(), qubits));
        return Ok(());
    }
    let missing = || PreprocessError::MissingRule { gate: name.to_string(), target: to.name.clone() };
    if depth > 4 {
        return Err(missing());
    }
    let steps = lower_step(name, &args, &qubits, to).ok_or_else(missing)?;
    for (n, a, q) in steps {
        emit(n, a, q, to, out, depth + 1)?;
    }
    Ok(())
}

/// The 15-gate Clifford+T realization of a doubly-controlled X on
/// `(a, b, c)`, or of a doubly-controlled Z without the target Hadamards.
/// `variant` 1 swaps T and T†.
pub fn toffoli_steps(a: usize, b: usize, c: usize, ccz: bool, variant: usize) -> Vec<(&'static str, Vec<usize>)> {
    let (t, tdg) = if variant == 0 { ("T", "Tdg") } else { ("Tdg", "T") };
    let mut s: Vec<(&'static str, Vec<usize>)> = vec![
        ("H", vec![c]),
        ("CNOT", vec![b, c]),
        (tdg, vec![c]),
        ("CNOT", vec![a, c]),
        (t, vec![c]),
        ("CNOT", vec![b, c]),
        (tdg, vec![c]),
        ("CNOT", vec![a, c]),
        (t, vec![b]),
        (t, vec![c]),
        ("H", vec![c]),
        ("CNOT", vec![a, b]),
        (t, vec![a]),
        (tdg, vec![b]),
        ("CNOT", vec![a, b]),
    ];
    if ccz {
        s.retain(|(n, q)| !(*n == "H" && q[0] == c));
    }
    s
}

fn expand_toffoli(gs: &GateSet, ins: &Instr, variant: usize) -> Result<Vec<Instr>, PreprocessError> {
    let ccz = gs.gate(ins.gate).name == "CCZ";
    let (a, b, c) = (ins.qubits[0], ins.qubits[1], ins.qubits[2]);
    toffoli_steps(a, b, c, ccz, variant)
        .into_iter()
        .map(|(n, q)| {
            let id = gs.find(n).ok_or_else(|| PreprocessError::MissingRule { gate: n.to_string(), target: gs.name.clone() })?;
            Ok(Instr::new(id, vec![], q))
        })
        .collect()
}

fn is_toffoli(gs: &GateSet, ins: &Instr) -> bool {
    matches!(gs.gate(ins.gate).name.as_str(), "CCX" | "CCZ")
}

/// Gate count after lowering to Nam and merging rotations.
fn merged_cost(c: &Circuit, gs: &GateSet, nam: &GateSet) -> Result<usize, PreprocessError> {
    let mut lowered = Circuit::new(c.num_qubits, c.num_params);
    for ins in &c.instrs {
        if is_toffoli(gs, ins) {
            // Undecided Toffolis block merging across them; any
            // non-rotation gate on all three wires has that effect.
            let h = nam.find("H").expect("nam has H");
            for &q in &ins.qubits {
                lowered.push(Instr::new(h, vec![], vec![q]));
            }
        } else {
            emit(&gs.gate(ins.gate).name, const_args(gs, ins)?, ins.qubits.clone(), nam, &mut lowered, 0)?;
        }
    }
    let merged = merge_rotations(&lowered, nam);
    let blockers = c.instrs.iter().filter(|i| is_toffoli(gs, i)).count() * 3;
    Ok(merged.len() - blockers)
}

/// Replaces each CCX/CCZ by its 15-gate decomposition. Toffolis are
/// decided left to right; for each, both polarities are tried and the one
/// giving fewer gates after rotation merging is kept (variant 0 on ties).
pub fn decompose_toffoli(c: &Circuit, gs: &GateSet) -> Result<Circuit, PreprocessError> {
    let nam = builtin_gate_set("nam")?;
    let mut cur = c.clone();
    while let Some(k) = cur.instrs.iter().position(|i| is_toffoli(gs, i)) {
        let mut best: Option<(usize, Circuit)> = None;
        for variant in 0..2 {
            let mut instrs = cur.instrs[..k].to_vec();
            instrs.extend(expand_toffoli(gs, &cur.instrs[k], variant)?);
            instrs.extend(cur.instrs[k + 1..].iter().cloned());
            let cand = Circuit::from_instrs(cur.num_qubits, cur.num_params, instrs);
            let cost = merged_cost(&cand, gs, &nam)?;
            if best.as_ref().is_none_or(|(b, _)| cost < *b) {
                best = Some((cost, cand));
            }
        }
        cur = best.expect("two variants tried").1;
    }
    Ok(cur)
}

/// Affine Boolean function of the circuit inputs: XOR of the listed
/// variables, complemented when `flip` is set.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WireFn {
    pub vars: BTreeSet<usize>,
    pub flip: bool,
}

/// Per-wire affine functions, tracked through X and CNOT.
#[derive(Clone, Debug)]
pub struct WireState {
    pub wires: Vec<WireFn>,
    next_var: usize,
}

impl WireState {
    pub fn new(num_qubits: usize) -> Self {
        WireState {
            wires: (0..num_qubits).map(|q| WireFn { vars: BTreeSet::from([q]), flip: false }).collect(),
            next_var: num_qubits,
        }
    }

    pub fn x(&mut self, q: usize) {
        self.wires[q].flip ^= true;
    }

    pub fn cnot(&mut self, ctrl: usize, tgt: usize) {
        let c = self.wires[ctrl].clone();
        let t = &mut self.wires[tgt];
        t.vars = t.vars.symmetric_difference(&c.vars).copied().collect();
        t.flip ^= c.flip;
    }

    /// The wire now carries a value unrelated to earlier ones.
    pub fn reset(&mut self, q: usize) {
        self.wires[q] = WireFn { vars: BTreeSet::from([self.next_var]), flip: false };
        self.next_var += 1;
    }
}

/// Merges Rz (or U1) rotations applied to wires carrying the same affine
/// function of the inputs. The summed rotation sits at the earliest site;
/// rotations summing to zero are removed. Gates other than X, CNOT and
/// rotations reset the wires they touch.
pub fn merge_rotations(c: &Circuit, gs: &GateSet) -> Circuit {
    let rot: Vec<usize> = ["Rz", "U1"].iter().filter_map(|n| gs.find(n)).collect();
    let x = gs.find("X");
    let cnot = gs.find("CNOT");
    let mut st = WireState::new(c.num_qubits);
    let mut slots: Vec<Option<Instr>> = Vec::with_capacity(c.len());
    let mut site: HashMap<(usize, WireFn), usize> = HashMap::new();
    for ins in &c.instrs {
        if rot.contains(&ins.gate) {
            if let [Arg::Const(a)] = ins.args.as_slice() {
                let key = (ins.gate, st.wires[ins.qubits[0]].clone());
                if let Some(&j) = site.get(&key) {
                    let prev = slots[j].as_mut().expect("sites point at live rotations");
                    let Arg::Const(b) = &prev.args[0] else { unreachable!("only constant rotations are recorded") };
                    prev.args[0] = Arg::Const(b.add(a).normalized());
                    continue;
                }
                site.insert(key, slots.len());
            }
        } else if Some(ins.gate) == x {
            st.x(ins.qubits[0]);
        } else if Some(ins.gate) == cnot {
            st.cnot(ins.qubits[0], ins.qubits[1]);
        } else {
            for &q in &ins.qubits {
                st.reset(q);
            }
        }
        slots.push(Some(ins.clone()));
    }
    let instrs = slots
        .into_iter()
        .flatten()
        .filter(|i| !(rot.contains(&i.gate) && matches!(i.args.as_slice(), [Arg::Const(a)] if a.is_zero_mod_2pi())))
        .collect();
    Circuit::from_instrs(c.num_qubits, c.num_params, instrs)
}

/// Removes adjacent pairs of the named self-inverse gates. `symmetric`
/// gates match regardless of qubit order.
pub fn cancel_adjacent_pairs(c: &Circuit, gs: &GateSet, names: &[&str], symmetric: &[&str]) -> Circuit {
    let ids: Vec<usize> = names.iter().filter_map(|n| gs.find(n)).collect();
    let sym: Vec<usize> = symmetric.iter().filter_map(|n| gs.find(n)).collect();
    let mut slots: Vec<Option<Instr>> = Vec::with_capacity(c.len());
    let mut wires: Vec<Vec<usize>> = vec![Vec::new(); c.num_qubits];
    for ins in &c.instrs {
        if ids.contains(&ins.gate) {
            let top = wires[ins.qubits[0]].last().copied();
            if let Some(j) = top {
                let prev = slots[j].as_ref().expect("wire stacks hold live gates");
                let same_wires = if sym.contains(&ins.gate) {
                    let mut a = prev.qubits.clone();
                    let mut b = ins.qubits.clone();
                    a.sort_unstable();
                    b.sort_unstable();
                    a == b
                } else {
                    prev.qubits == ins.qubits
                };
                if prev.gate == ins.gate && same_wires && ins.qubits.iter().all(|&q| wires[q].last() == Some(&j)) {
                    for &q in &ins.qubits {
                        wires[q].pop();
                    }
                    slots[j] = None;
                    continue;
                }
            }
        }
        for &q in &ins.qubits {
            wires[q].push(slots.len());
        }
        slots.push(Some(ins.clone()));
    }
    Circuit::from_instrs(c.num_qubits, c.num_params, slots.into_iter().flatten().collect())
}

/// Nam circuit to Rigetti: CNOT becomes H·CZ·H on the target, adjacent H
/// and CZ pairs cancel, then X and H are lowered to Rigetti gates.
pub fn rigetti_pipeline(c_nam: &Circuit, nam: &GateSet, rigetti: &GateSet) -> Result<Circuit, PreprocessError> {
    let cz = rigetti.def().gates.into_iter().filter(|g| g.name == "CZ").collect::<Vec<_>>();
    let mid = nam.extended(&format!("{}+cz", nam.name), &cz)?;
    let mut staged = Circuit::new(c_nam.num_qubits, c_nam.num_params);
    let (cnot, h, czid) = (nam.find("CNOT"), mid.find("H").expect("nam has H"), mid.find("CZ").expect("just added"));
    for ins in &c_nam.instrs {
        if Some(ins.gate) == cnot {
            let t = ins.qubits[1];
            staged.push(Instr::new(h, vec![], vec![t]));
            staged.push(Instr::new(czid, vec![], ins.qubits.clone()));
            staged.push(Instr::new(h, vec![], vec![t]));
        } else {
            let name = &nam.gate(ins.gate).name;
            let id = mid.find(name).ok_or_else(|| PreprocessError::MissingRule { gate: name.clone(), target: mid.name.clone() })?;
            staged.push(Instr::new(id, ins.args.clone(), ins.qubits.clone()));
        }
    }
    let cancelled = cancel_adjacent_pairs(&staged, &mid, &["H", "CZ"], &["CZ"]);
    transpile(&cancelled, &mid, rigetti)
}

/// Runs the named passes over a circuit read with `input`, producing a
/// circuit over the gate set named `target`.
pub fn run_passes(c: &Circuit, input: &GateSet, target: &str, passes: &[Pass]) -> Result<(Circuit, GateSet), PreprocessError> {
    let nam = builtin_gate_set("nam")?;
    let mut cur = c.clone();
    let mut gs = input.clone();
    for p in passes {
        match p {
            Pass::Toffoli => cur = decompose_toffoli(&cur, &gs)?,
            Pass::Transpile => {
                let to = if target == "rigetti" { nam.clone() } else { builtin_gate_set(target)? };
                cur = transpile(&cur, &gs, &to)?;
                gs = to;
            }
            Pass::Merge => cur = merge_rotations(&cur, &gs),
            Pass::Rigetti => {
                let rig = builtin_gate_set("rigetti")?;
                if gs.name != "nam" {
                    cur = transpile(&cur, &gs, &nam)?;
                }
                cur = rigetti_pipeline(&cur, &nam, &rig)?;
                gs = rig;
            }
        }
    }
    Ok((cur, gs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::sim::{same_action_up_to_phase, unitary};
    use crate::gatedef::input_gate_set;

    fn nam() -> GateSet {
        builtin_gate_set("nam").unwrap()
    }

    #[test]
    fn toffoli_realizations_match_their_unitaries() {
        let gs = input_gate_set();
        for (name, ccz) in [("CCX", false), ("CCZ", true)] {
            let reference = Circuit::from_text(&format!("{name} 0 1 2"), &gs, 3, 0).unwrap();
            let want = unitary(&reference, &gs, &[]);
            for variant in 0..2 {
                let text: Vec<String> = toffoli_steps(0, 1, 2, ccz, variant).iter().map(|(n, q)| format!("{n} {} {}", q[0], q.get(1).map_or(String::new(), |x| x.to_string()))).collect();
                let c = Circuit::from_text(&text.join("; "), &gs, 3, 0).unwrap();
                let got = unitary(&c, &gs, &[]);
                let phase = got[0] / want[0];
                assert!((phase.norm() - 1.0).abs() < 1e-12);
                for (g, w) in got.iter().zip(&want) {
                    assert!((g - phase * w).norm() < 1e-12, "{name} variant {variant}");
                }
            }
        }
    }

    #[test]
    fn single_toffoli_is_fifteen_gates_variant_zero() {
        let gs = input_gate_set();
        let c = Circuit::from_text("CCX 0 1 2", &gs, 3, 0).unwrap();
        let d = decompose_toffoli(&c, &gs).unwrap();
        assert_eq!(d.len(), 15);
        assert_eq!(gs.gate(d.instrs[2].gate).name, "Tdg");
        assert!(same_action_up_to_phase(&c, &d, &gs, &gs, 5, 1, 1e-9));
        let none = Circuit::from_text("H 0; CNOT 0 1", &gs, 2, 0).unwrap();
        assert_eq!(decompose_toffoli(&none, &gs).unwrap(), none);
    }

    #[test]
    fn transpile_rules() {
        let gs = input_gate_set();
        let n = nam();
        let c = Circuit::from_text("T 0; Tdg 1; S 0; Sdg 1; Z 0; H 1; CNOT 0 1; X 1", &gs, 2, 0).unwrap();
        let t = transpile(&c, &gs, &n).unwrap();
        assert_eq!(t.to_text(&n), "Rz pi/4 0; Rz -pi/4 1; Rz pi/2 0; Rz -pi/2 1; Rz pi 0; H 1; CNOT 0 1; X 1");
        assert!(same_action_up_to_phase(&c, &t, &gs, &n, 5, 2, 1e-9));
        let ibm = builtin_gate_set("ibm").unwrap();
        let u = transpile(&t, &n, &ibm).unwrap();
        assert_eq!(u.len(), t.len());
        assert!(same_action_up_to_phase(&t, &u, &n, &ibm, 5, 3, 1e-9));
        let ccx = Circuit::from_text("CCX 0 1 2", &gs, 3, 0).unwrap();
        match transpile(&ccx, &gs, &n) {
            Err(PreprocessError::MissingRule { gate, .. }) => assert_eq!(gate, "CCX"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rigetti_hadamard_and_cnot() {
        let n = nam();
        let rig = builtin_gate_set("rigetti").unwrap();
        let h = Circuit::from_text("H 0", &n, 1, 0).unwrap();
        let r = rigetti_pipeline(&h, &n, &rig).unwrap();
        assert_eq!(r.to_text(&rig), "Rz -pi/2 0; Rx90 0; Rz pi/2 0; X 0");
        assert!(same_action_up_to_phase(&h, &r, &n, &rig, 5, 4, 1e-9));
        let cx = Circuit::from_text("CNOT 0 1", &n, 2, 0).unwrap();
        let r = rigetti_pipeline(&cx, &n, &rig).unwrap();
        assert_eq!(r.len(), 9);
        assert!(same_action_up_to_phase(&cx, &r, &n, &rig, 5, 5, 1e-9));
        let cx2 = Circuit::from_text("CNOT 0 1; CNOT 0 1", &n, 2, 0).unwrap();
        assert!(rigetti_pipeline(&cx2, &n, &rig).unwrap().is_empty());
    }

    #[test]
    fn merging_follows_affine_functions() {
        let n = nam();
        let c = Circuit::from_text("Rz pi/4 0; Rz pi/4 0", &n, 1, 0).unwrap();
        assert_eq!(merge_rotations(&c, &n).to_text(&n), "Rz pi/2 0");
        let c = Circuit::from_text("Rz pi/8 0; CNOT 1 0; CNOT 1 0; Rz pi/8 0", &n, 2, 0).unwrap();
        let m = merge_rotations(&c, &n);
        assert_eq!(m.to_text(&n), "Rz pi/4 0; CNOT 1 0; CNOT 1 0");
        assert!(same_action_up_to_phase(&c, &m, &n, &n, 5, 6, 1e-9));
        let c = Circuit::from_text("Rz pi/8 0; CNOT 0 1; Rz pi/8 1", &n, 2, 0).unwrap();
        let m = merge_rotations(&c, &n);
        assert_eq!(m, c);
        // The merge that the functions forbid really changes the circuit.
        let wrong = Circuit::from_text("Rz pi/4 0; CNOT 0 1", &n, 2, 0).unwrap();
        assert!(!same_action_up_to_phase(&c, &wrong, &n, &n, 5, 7, 1e-6));
        let c = Circuit::from_text("Rz pi/8 0; H 0; Rz pi/8 0; X 0; X 0; Rz -pi/8 0", &n, 1, 0).unwrap();
        let m = merge_rotations(&c, &n);
        assert_eq!(m.to_text(&n), "Rz pi/8 0; H 0; X 0; X 0");
        assert!(same_action_up_to_phase(&c, &m, &n, &n, 5, 8, 1e-9));
    }

    #[test]
    fn wire_state_tracks_xor_and_complement() {
        let mut s = WireState::new(2);
        s.cnot(0, 1);
        s.x(1);
        assert_eq!(s.wires[1], WireFn { vars: BTreeSet::from([0, 1]), flip: true });
        s.cnot(0, 1);
        assert_eq!(s.wires[1], WireFn { vars: BTreeSet::from([1]), flip: true });
        s.reset(0);
        assert_eq!(s.wires[0].vars, BTreeSet::from([2]));
    }
}
