// SPDX-License-Identifier: Apache-2.0

//! Convex-subgraph matching of a pattern DAG inside a circuit DAG, and
//! replacement of the matched region.

use crate::circuit::{Arg, Circuit, CircuitDag, Instr, Port};
use crate::gatedef::ParamExpr;

use super::Transformation;

const ANGLE_TOL: f64 = 1e-9;

/// One occurrence of a pattern.
#[derive(Clone, Debug, PartialEq)]
pub struct Match {
    /// Circuit vertex for every pattern vertex.
    pub nodes: Vec<usize>,
    /// Circuit qubit for every pattern qubit touched by the pattern.
    pub qubits: Vec<Option<usize>>,
    /// Bound value of every pattern parameter that occurs bare.
    pub params: Vec<Option<Arg>>,
}

struct State<'a> {
    pat: &'a CircuitDag,
    dag: &'a CircuitDag,
    nodes: Vec<usize>,
    qubits: Vec<Option<usize>>,
    params: Vec<Option<Arg>>,
    used_node: Vec<bool>,
    used_qubit: Vec<bool>,
    out: Vec<Match>,
}

fn args_equal(a: &Arg, b: &Arg) -> bool {
    match (a, b) {
        (Arg::Const(x), Arg::Const(y)) => x.eq_mod_2pi(y, ANGLE_TOL),
        (Arg::Sym(x), Arg::Sym(y)) => x == y,
        _ => false,
    }
}

/// Value of a pattern expression under a binding.
fn instantiate(e: &ParamExpr, params: &[Option<Arg>]) -> Option<Arg> {
    let get = |i: usize| params.get(i).cloned().flatten();
    match *e {
        ParamExpr::Var(i) => get(i),
        ParamExpr::Double(i) => match get(i)? {
            Arg::Const(a) => Some(Arg::Const(a.scale(2).normalized())),
            Arg::Sym(ParamExpr::Var(k)) => Some(Arg::Sym(ParamExpr::Double(k))),
            _ => None,
        },
        ParamExpr::Sum(i, j) => match (get(i)?, get(j)?) {
            (Arg::Const(a), Arg::Const(b)) => Some(Arg::Const(a.add(&b).normalized())),
            (Arg::Sym(ParamExpr::Var(k)), Arg::Sym(ParamExpr::Var(l))) if k != l => {
                Some(Arg::Sym(ParamExpr::Sum(k.min(l), k.max(l))))
            }
            _ => None,
        },
    }
}

fn instantiate_arg(a: &Arg, params: &[Option<Arg>]) -> Option<Arg> {
    match a {
        Arg::Sym(e) => instantiate(e, params),
        Arg::Const(c) => Some(Arg::Const(c.clone())),
    }
}

impl State<'_> {
    /// Tries to map pattern vertex `u` to circuit vertex `v`; returns the
    /// undo information on success.
    fn assign(&mut self, u: usize, v: usize) -> Option<(Vec<usize>, Vec<usize>)> {
        let pi = &self.pat.nodes[u];
        let ci = &self.dag.nodes[v];
        if self.used_node[v] || pi.gate != ci.gate {
            return None;
        }
        let mut new_q = Vec::new();
        let mut new_p = Vec::new();
        let mut ok = true;
        for (pq, &cq) in pi.qubits.iter().zip(&ci.qubits) {
            match self.qubits[*pq] {
                Some(x) if x == cq => {}
                Some(_) => {
                    ok = false;
                    break;
                }
                None => {
                    if self.used_qubit[cq] {
                        ok = false;
                        break;
                    }
                    self.qubits[*pq] = Some(cq);
                    self.used_qubit[cq] = true;
                    new_q.push(*pq);
                }
            }
        }
        if ok {
            for (pa, ca) in pi.args.iter().zip(&ci.args) {
                match pa {
                    Arg::Sym(ParamExpr::Var(i)) => match &self.params[*i] {
                        Some(b) => {
                            if !args_equal(b, ca) {
                                ok = false;
                                break;
                            }
                        }
                        None => {
                            self.params[*i] = Some(ca.clone());
                            new_p.push(*i);
                        }
                    },
                    Arg::Const(a) => {
                        if !args_equal(&Arg::Const(a.clone()), ca) {
                            ok = false;
                            break;
                        }
                    }
                    // Checked once every bare variable is bound.
                    Arg::Sym(_) => {}
                }
            }
        }
        if !ok {
            self.undo(&new_q, &new_p);
            return None;
        }
        self.used_node[v] = true;
        self.nodes[u] = v;
        Some((new_q, new_p))
    }

    fn undo(&mut self, new_q: &[usize], new_p: &[usize]) {
        for &pq in new_q {
            if let Some(cq) = self.qubits[pq].take() {
                self.used_qubit[cq] = false;
            }
        }
        for &i in new_p {
            self.params[i] = None;
        }
    }

    fn release(&mut self, u: usize, undo: (Vec<usize>, Vec<usize>)) {
        self.used_node[self.nodes[u]] = false;
        self.undo(&undo.0, &undo.1);
    }

    /// Circuit vertices that pattern vertex `u` could map to.
    fn candidates(&self, u: usize) -> Vec<usize> {
        let mut forced: Option<usize> = None;
        for (slot, p) in self.pat.pred[u].iter().enumerate() {
            if let Port::Gate { node, slot: ps } = *p {
                let v_pred = self.nodes[node];
                match self.dag.succ[v_pred][ps] {
                    Port::Gate { node: v, slot: s } if s == slot => match forced {
                        Some(f) if f != v => return Vec::new(),
                        _ => forced = Some(v),
                    },
                    _ => return Vec::new(),
                }
            }
        }
        match forced {
            Some(v) => vec![v],
            None => {
                let g = self.pat.nodes[u].gate;
                (0..self.dag.len()).filter(|&v| self.dag.nodes[v].gate == g && !self.used_node[v]).collect()
            }
        }
    }

    fn search(&mut self, u: usize) {
        if u == self.pat.len() {
            self.finish();
            return;
        }
        for v in self.candidates(u) {
            if let Some(undo) = self.assign(u, v) {
                self.search(u + 1);
                self.release(u, undo);
            }
        }
    }

    fn finish(&mut self) {
        // Expression arguments.
        for (u, pi) in self.pat.nodes.iter().enumerate() {
            let ci = &self.dag.nodes[self.nodes[u]];
            for (pa, ca) in pi.args.iter().zip(&ci.args) {
                if let Arg::Sym(e @ (ParamExpr::Double(_) | ParamExpr::Sum(..))) = pa {
                    match instantiate(e, &self.params) {
                        Some(val) if args_equal(&val, ca) => {}
                        _ => return,
                    }
                }
            }
        }
        if !is_convex(self.dag, &self.nodes) {
            return;
        }
        self.out.push(Match { nodes: self.nodes.clone(), qubits: self.qubits.clone(), params: self.params.clone() });
    }
}

/// No path leaves the vertex set and re-enters it.
fn is_convex(dag: &CircuitDag, set: &[usize]) -> bool {
    let mut inside = vec![false; dag.len()];
    for &v in set {
        inside[v] = true;
    }
    let hi = set.iter().copied().max().unwrap_or(0);
    let mut seen = vec![false; dag.len()];
    let mut stack: Vec<usize> = Vec::new();
    for &v in set {
        for s in dag.gate_succs(v).flatten() {
            if !inside[s.0] && !seen[s.0] {
                seen[s.0] = true;
                stack.push(s.0);
            }
        }
    }
    while let Some(w) = stack.pop() {
        // Vertices are numbered topologically, so nothing past `hi` can
        // lead back into the set.
        if w > hi {
            continue;
        }
        for (x, _) in dag.gate_succs(w).flatten() {
            if inside[x] {
                return false;
            }
            if !seen[x] {
                seen[x] = true;
                stack.push(x);
            }
        }
    }
    true
}

fn num_pattern_params(t: &Transformation) -> usize {
    let max_in = |c: &Circuit| c.instrs.iter().flat_map(|i| i.params().collect::<Vec<_>>()).max().map_or(0, |p| p + 1);
    t.target.num_params.max(max_in(&t.target)).max(max_in(&t.rewrite))
}

/// All convex occurrences of the transformation's target.
pub fn find_matches(dag: &CircuitDag, t: &Transformation) -> Vec<Match> {
    let pat = &t.pattern;
    if pat.is_empty() || pat.len() > dag.len() {
        return Vec::new();
    }
    let pq = t.target.num_qubits.max(t.rewrite.num_qubits);
    let mut st = State {
        pat,
        dag,
        nodes: vec![usize::MAX; pat.len()],
        qubits: vec![None; pq],
        params: vec![None; num_pattern_params(t)],
        used_node: vec![false; dag.len()],
        used_qubit: vec![false; dag.num_qubits],
        out: Vec::new(),
    };
    st.search(0);
    st.out
}

/// Every circuit obtained by replacing one occurrence of `t.target` with
/// `t.rewrite`, in canonical order. Rewrite qubits absent from the target
/// range over the circuit qubits the match leaves free.
pub fn apply(dag: &CircuitDag, t: &Transformation) -> Vec<Circuit> {
    let mut out = Vec::new();
    for m in find_matches(dag, t) {
        replace(dag, t, &m, &mut out);
    }
    out
}

fn replace(dag: &CircuitDag, t: &Transformation, m: &Match, out: &mut Vec<Circuit>) {
    let Some(args) = t
        .rewrite
        .instrs
        .iter()
        .map(|ins| ins.args.iter().map(|a| instantiate_arg(a, &m.params)).collect::<Option<Vec<_>>>())
        .collect::<Option<Vec<_>>>()
    else {
        return;
    };
    let unbound: Vec<usize> = (0..t.rewrite.num_qubits)
        .filter(|&pq| m.qubits.get(pq).copied().flatten().is_none() && t.rewrite.instrs.iter().any(|i| i.touches(pq)))
        .collect();
    let mut taken = vec![false; dag.num_qubits];
    for q in m.qubits.iter().flatten() {
        taken[*q] = true;
    }
    let mut qmap: Vec<Option<usize>> = m.qubits.clone();
    qmap.resize(t.rewrite.num_qubits.max(qmap.len()), None);

    // Region split: ancestors of the match first, then the rest.
    let mut inside = vec![false; dag.len()];
    for &v in &m.nodes {
        inside[v] = true;
    }
    let mut anc = vec![false; dag.len()];
    let mut stack: Vec<usize> = m.nodes.clone();
    while let Some(v) = stack.pop() {
        for (p, _) in dag.gate_preds(v).flatten() {
            if !anc[p] && !inside[p] {
                anc[p] = true;
                stack.push(p);
            }
        }
    }
    let before: Vec<Instr> = (0..dag.len()).filter(|&v| anc[v]).map(|v| dag.nodes[v].clone()).collect();
    let after: Vec<Instr> = (0..dag.len()).filter(|&v| !anc[v] && !inside[v]).map(|v| dag.nodes[v].clone()).collect();

    let mut emit = |qmap: &[Option<usize>]| {
        let mut instrs = before.clone();
        for (ins, a) in t.rewrite.instrs.iter().zip(&args) {
            let qubits = ins.qubits.iter().map(|&pq| qmap[pq].expect("all rewrite qubits mapped")).collect();
            instrs.push(Instr::new(ins.gate, a.clone(), qubits));
        }
        instrs.extend(after.iter().cloned());
        out.push(Circuit::from_instrs(dag.num_qubits, dag.num_params, instrs).canonical());
    };
    assign_free(&unbound, 0, &mut qmap, &mut taken, &mut emit);
}

fn assign_free(
    unbound: &[usize],
    k: usize,
    qmap: &mut Vec<Option<usize>>,
    taken: &mut Vec<bool>,
    emit: &mut impl FnMut(&[Option<usize>]),
) {
    if k == unbound.len() {
        emit(qmap);
        return;
    }
    for cq in 0..taken.len() {
        if !taken[cq] {
            taken[cq] = true;
            qmap[unbound[k]] = Some(cq);
            assign_free(unbound, k + 1, qmap, taken, emit);
            qmap[unbound[k]] = None;
            taken[cq] = false;
        }
    }
}

/// Reference implementation for tests: tries every injective placement of
/// pattern gates onto circuit gates and keeps those forming a convex,
/// edge-preserving occurrence.
#[cfg(test)]
pub(crate) fn brute_force_matches(dag: &CircuitDag, t: &Transformation) -> Vec<Vec<usize>> {
    let pat = &t.pattern;
    let k = pat.len();
    let mut out = Vec::new();
    let mut pick = vec![0usize; k];
    fn rec(i: usize, k: usize, n: usize, pick: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if i == k {
            f(pick);
            return;
        }
        for v in 0..n {
            if !pick[..i].contains(&v) {
                pick[i] = v;
                rec(i + 1, k, n, pick, f);
            }
        }
    }
    let mut check = |p: &[usize]| {
        let mut qmap: Vec<Option<usize>> = vec![None; pat.num_qubits];
        for (u, &v) in p.iter().enumerate() {
            let (a, b) = (&pat.nodes[u], &dag.nodes[v]);
            if a.gate != b.gate {
                return;
            }
            for (pq, cq) in a.qubits.iter().zip(&b.qubits) {
                match qmap[*pq] {
                    Some(x) if x != *cq => return,
                    _ => qmap[*pq] = Some(*cq),
                }
            }
        }
        let imgs: Vec<usize> = qmap.iter().flatten().copied().collect();
        let mut dedup = imgs.clone();
        dedup.sort_unstable();
        dedup.dedup();
        if dedup.len() != imgs.len() {
            return;
        }
        // Internal pattern edges must be circuit edges with equal slots.
        for u in 0..k {
            for (slot, port) in pat.pred[u].iter().enumerate() {
                if let Port::Gate { node, slot: ps } = *port {
                    if dag.succ[p[node]][ps] != (Port::Gate { node: p[u], slot }) {
                        return;
                    }
                }
            }
        }
        if !is_convex(dag, p) {
            return;
        }
        // Args: bare variables bind, expressions are checked.
        let np = num_pattern_params(t);
        let mut params: Vec<Option<Arg>> = vec![None; np];
        for (u, &v) in p.iter().enumerate() {
            for (pa, ca) in pat.nodes[u].args.iter().zip(&dag.nodes[v].args) {
                if let Arg::Sym(ParamExpr::Var(i)) = pa {
                    match &params[*i] {
                        Some(b) if !args_equal(b, ca) => return,
                        Some(_) => {}
                        None => params[*i] = Some(ca.clone()),
                    }
                }
            }
        }
        for (u, &v) in p.iter().enumerate() {
            for (pa, ca) in pat.nodes[u].args.iter().zip(&dag.nodes[v].args) {
                let ok = match pa {
                    Arg::Sym(ParamExpr::Var(_)) => true,
                    Arg::Sym(e) => instantiate(e, &params).is_some_and(|x| args_equal(&x, ca)),
                    Arg::Const(a) => args_equal(&Arg::Const(a.clone()), ca),
                };
                if !ok {
                    return;
                }
            }
        }
        out.push(p.to_vec());
    };
    if k > 0 {
        rec(0, k, dag.len(), &mut pick, &mut check);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::sim::same_action_up_to_phase;
    use crate::circuit::Angle;
    use crate::gatedef::{builtin_gate_set, GateSet};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn tf(gs: &GateSet, a: &str, b: &str, q: usize, m: usize) -> Transformation {
        Transformation::new(Circuit::from_text(a, gs, q, m).unwrap(), Circuit::from_text(b, gs, q, m).unwrap(), 0)
    }

    fn dag(gs: &GateSet, s: &str, q: usize) -> CircuitDag {
        CircuitDag::from_circuit(&Circuit::from_text(s, gs, q, 0).unwrap())
    }

    #[test]
    fn hh_cancels() {
        let gs = builtin_gate_set("nam").unwrap();
        let t = tf(&gs, "H 0; H 0", "()", 1, 0);
        let out = apply(&dag(&gs, "H 0; H 0", 1), &t);
        assert_eq!(out, vec![Circuit::new(1, 0)]);
        assert!(apply(&dag(&gs, "X 0; X 0", 1), &t).is_empty());
    }

    #[test]
    fn non_convex_occurrence_is_rejected() {
        let gs = builtin_gate_set("nam").unwrap();
        // CNOT 0 1; H 1; CNOT 0 1: the two CNOTs are not adjacent.
        let t = tf(&gs, "CNOT 0 1; CNOT 0 1", "()", 2, 0);
        assert!(apply(&dag(&gs, "CNOT 0 1; H 1; CNOT 0 1", 2), &t).is_empty());
        // Pattern over two disjoint gates with a path between them.
        let t2 = tf(&gs, "H 0; H 1", "H 1; H 0", 2, 0);
        let d = dag(&gs, "H 0; CNOT 0 1; H 1", 2);
        assert!(find_matches(&d, &t2).is_empty());
        let d = dag(&gs, "H 0; X 2; H 1", 3);
        assert_eq!(find_matches(&d, &t2).len(), 2);
    }

    #[test]
    fn parameter_binding() {
        let gs = builtin_gate_set("nam").unwrap();
        let t = tf(&gs, "Rz p0 0; Rz p1 0", "Rz p0+p1 0", 1, 2);
        let c = CircuitDag::from_circuit(&Circuit::from_text("Rz pi/4 0; Rz pi/4 0", &gs, 1, 0).unwrap());
        let out = apply(&c, &t);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].to_text(&gs), "Rz pi/2 0");
        // Expression occurrences are checked, never bound.
        let t = tf(&gs, "Rz p0+p1 0", "Rz p0 0; Rz p1 0", 1, 2);
        assert!(apply(&c, &t).is_empty());
        let t = tf(&gs, "Rz p0 0; CNOT 1 0; Rz 2p0 0", "Rz p0 0; CNOT 1 0; Rz 2p0 0", 2, 1);
        let ok = CircuitDag::from_circuit(&Circuit::from_text("Rz pi/8 0; CNOT 1 0; Rz pi/4 0", &gs, 2, 0).unwrap());
        let bad = CircuitDag::from_circuit(&Circuit::from_text("Rz pi/8 0; CNOT 1 0; Rz pi/3 0", &gs, 2, 0).unwrap());
        assert_eq!(find_matches(&ok, &t).len(), 1);
        assert!(find_matches(&bad, &t).is_empty());
    }

    #[test]
    fn flipped_cnot_with_unbound_qubits() {
        let gs = builtin_gate_set("nam").unwrap();
        let t = tf(&gs, "H 0; H 1; CNOT 0 1; H 0; H 1", "CNOT 1 0", 2, 0);
        let c = Circuit::from_text("H 2; H 1; CNOT 2 1; H 1; H 2", &gs, 3, 0).unwrap();
        let out = apply(&CircuitDag::from_circuit(&c), &t);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].to_text(&gs), "CNOT 1 2");
        // Rewrite touching a qubit the target does not.
        let t = tf(&gs, "X 0", "X 0; H 1; H 1", 2, 0);
        let c = Circuit::from_text("X 0", &gs, 3, 0).unwrap();
        let out = apply(&CircuitDag::from_circuit(&c), &t);
        assert_eq!(out.len(), 2);
    }

    #[test]
    fn results_change_only_the_matched_region() {
        let gs = builtin_gate_set("nam").unwrap();
        let t = tf(&gs, "CNOT 0 1; CNOT 0 1", "()", 2, 0);
        let c = Circuit::from_text("H 0; CNOT 0 1; CNOT 0 1; X 1; CNOT 1 2; CNOT 1 2", &gs, 3, 0).unwrap();
        let out = apply(&CircuitDag::from_circuit(&c), &t);
        assert_eq!(out.len(), 2);
        for r in &out {
            assert_eq!(r.len(), 4);
            assert!(same_action_up_to_phase(&c, r, &gs, &gs, 3, 1, 1e-9));
        }
    }

    #[test]
    fn matcher_agrees_with_brute_force() {
        let gs = builtin_gate_set("nam").unwrap();
        let pats = [
            tf(&gs, "H 0; H 0", "()", 1, 0),
            tf(&gs, "CNOT 0 1; H 0", "H 0; CNOT 0 1", 2, 0),
            tf(&gs, "H 0; H 1", "H 1; H 0", 2, 0),
            tf(&gs, "CNOT 0 1; CNOT 1 0", "CNOT 1 0; CNOT 0 1", 2, 0),
            tf(&gs, "Rz p0 0; X 0", "X 0; Rz p0 0", 1, 1),
            tf(&gs, "X 0; CNOT 0 1; X 1", "X 1; CNOT 0 1; X 0", 2, 0),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let names = ["H", "X", "Rz", "CNOT"];
        for _ in 0..300 {
            let len = rng.gen_range(1..=5);
            let mut c = Circuit::new(3, 0);
            for _ in 0..len {
                let g = gs.find(names[rng.gen_range(0..4)]).unwrap();
                let a = rng.gen_range(0..3);
                let b = (a + rng.gen_range(1..3)) % 3;
                let qubits = if gs.gate(g).qubit_arity == 2 { vec![a, b] } else { vec![a] };
                let args = if gs.gate(g).param_arity == 1 { vec![Arg::Const(Angle::pi_frac(rng.gen_range(1..3), 4))] } else { vec![] };
                c.push(Instr::new(g, args, qubits));
            }
            let d = CircuitDag::from_circuit(&c);
            for t in &pats {
                let mut fast: Vec<Vec<usize>> = find_matches(&d, t).into_iter().map(|m| m.nodes).collect();
                let mut slow = brute_force_matches(&d, t);
                fast.sort();
                slow.sort();
                assert_eq!(fast, slow, "circuit {}", c.to_text(&gs));
            }
        }
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(64))]

        #[test]
        fn generated_rewrites_preserve_the_unitary(spec in proptest::collection::vec((0..4usize, 0..3usize, 1..3usize, -3..5i32), 0..12)) {
            use crate::generator::{repgen, GeneratorConfig};
            use crate::pruning::{prune, Pass};
            use std::sync::OnceLock;
            static TS: OnceLock<Vec<Transformation>> = OnceLock::new();
            let gs = builtin_gate_set("nam").unwrap();
            let ts = TS.get_or_init(|| {
                let cfg = GeneratorConfig { n: 2, q: 3, sigma: crate::gatedef::ParamSpec::standard(2), seed: 3, e_max: 1e-15 };
                let g = repgen(&gs, &cfg, &mut crate::verifier::Verifier::algebraic()).unwrap();
                super::super::extract_transformations(&prune(&g.eccs, &[Pass::Simplify, Pass::Common]))
            });
            let text: Vec<String> = spec
                .iter()
                .map(|&(g, a, off, k)| match g {
                    0 => format!("H {a}"),
                    1 => format!("X {a}"),
                    2 => format!("CNOT {a} {}", (a + off) % 3),
                    _ => format!("Rz {k}*pi/4 {a}"),
                })
                .collect();
            let c = Circuit::from_text(&text.join("; "), &gs, 3, 0).unwrap();
            let d = CircuitDag::from_circuit(&c);
            for t in ts {
                for r in apply(&d, t) {
                    proptest::prop_assert!(same_action_up_to_phase(&c, &r, &gs, &gs, 2, 1, 1e-9), "{} => {}", c.to_text(&gs), r.to_text(&gs));
                    proptest::prop_assert_eq!(r.len() as isize, c.len() as isize + t.delta());
                }
            }
        }
    }
}
