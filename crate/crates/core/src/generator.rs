// SPDX-License-Identifier: Apache-2.0

//! Representative-based generation of `(n, q)`-complete ECC sets.
//!
//! Round `j` extends every representative with `j − 1` gates by every
//! allowed single gate, keeps an extension only when dropping its first gate
//! yields a representative, and sorts the survivors into equivalence classes
//! bucketed by fingerprint. Class membership is decided by the verifier.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::time::{Duration, Instant};

use num_complex::Complex64;
use thiserror::Error;

use crate::circuit::{Circuit, CircuitDag, Instr};
use crate::eccset::{Ecc, EccSet, EccSetMeta};
use crate::fingerprint::{FingerprintContext, FingerprintKey};
use crate::gatedef::{enumerate_single_gate_circuits, GateSet, ParamSpec};
use crate::verifier::{Verdict, Verifier, VerifierError};

#[derive(Debug, Error)]
pub enum GenerateError {
    #[error("n and q must be at least 1")]
    Size,
    #[error(transparent)]
    Verifier(#[from] VerifierError),
}

#[derive(Clone, Debug)]
pub struct GeneratorConfig {
    pub n: usize,
    pub q: usize,
    pub sigma: ParamSpec,
    pub seed: u64,
    pub e_max: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RoundStats {
    pub round: usize,
    /// Extensions constructed before the suffix test.
    pub constructed: usize,
    /// Extensions whose suffix is a representative.
    pub kept: usize,
    pub representatives: usize,
    pub eccs: usize,
    pub elapsed: Duration,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct GenerationStats {
    pub characteristic: usize,
    pub rounds: Vec<RoundStats>,
    /// `|R_n|`, counting the empty circuit.
    pub representatives: usize,
    /// Total extensions constructed over all rounds.
    pub constructed: usize,
    pub verifications: usize,
    pub inconclusive: usize,
    /// Equivalences found only by searching a neighbouring bucket.
    pub neighbour_merges: usize,
}

impl GenerationStats {
    /// `|R_n| · ch · n`.
    pub fn construction_bound(&self) -> usize {
        self.representatives * self.characteristic * self.rounds.len()
    }
}

pub struct Generated {
    /// Non-singleton classes, sorted by representative.
    pub eccs: EccSet,
    /// Every representative, sorted by `≺`.
    pub representatives: Vec<Circuit>,
    pub stats: GenerationStats,
}

struct Class {
    members: Vec<usize>,
}

struct Pool<'a> {
    gs: &'a GateSet,
    ctx: FingerprintContext,
    circuits: Vec<Circuit>,
    amps: Vec<Complex64>,
    classes: Vec<Class>,
    buckets: HashMap<FingerprintKey, Vec<usize>>,
    stats: GenerationStats,
}

impl Pool<'_> {
    fn bucket_add(&mut self, key: FingerprintKey, class: usize) {
        let b = self.buckets.entry(key).or_default();
        if !b.contains(&class) {
            b.push(class);
        }
    }

    /// Joins circuit `id` to the first class whose representative it is
    /// verified against, searching bucket `key` before `key ∓ 1`; otherwise
    /// opens a new class. Returns the class and whether it is new.
    fn eccify(&mut self, id: usize, key: FingerprintKey, verifier: &mut Verifier) -> Result<(usize, bool), GenerateError> {
        for (offset, probe) in [(0, key), (1, key - 1), (1, key + 1)] {
            let Some(cands) = self.buckets.get(&probe).cloned() else { continue };
            for class in cands {
                let rep = self.classes[class].members[0];
                self.stats.verifications += 1;
                let verdict = verifier.verify_with_amplitudes(
                    self.gs,
                    &self.circuits[id],
                    &self.circuits[rep],
                    &self.ctx.p0,
                    self.amps[id],
                    self.amps[rep],
                )?;
                match verdict {
                    Verdict::Verified(_) => {
                        self.classes[class].members.push(id);
                        self.bucket_add(key, class);
                        if offset != 0 {
                            self.stats.neighbour_merges += 1;
                        }
                        return Ok((class, false));
                    }
                    Verdict::Inconclusive => {
                        self.stats.inconclusive += 1;
                        log::warn!(
                            "treating inconclusive pair as inequivalent: [{}] vs [{}]",
                            self.circuits[id].to_text(self.gs),
                            self.circuits[rep].to_text(self.gs)
                        );
                    }
                    Verdict::NotEquivalent { .. } => {}
                }
            }
        }
        let class = self.classes.len();
        self.classes.push(Class { members: vec![id] });
        self.bucket_add(key, class);
        Ok((class, true))
    }
}

fn uses_param(ins: &Instr, used: &BTreeSet<usize>) -> bool {
    ins.params().any(|p| used.contains(&p))
}

/// Runs generation up to `cfg.n` gates over `cfg.q` qubits.
pub fn repgen(gs: &GateSet, cfg: &GeneratorConfig, verifier: &mut Verifier) -> Result<Generated, GenerateError> {
    if cfg.n == 0 || cfg.q == 0 {
        return Err(GenerateError::Size);
    }
    verifier.preflight()?;
    let m = cfg.sigma.num_params;
    let singles = enumerate_single_gate_circuits(gs, &cfg.sigma, cfg.q);
    let ctx = FingerprintContext::new(cfg.seed, cfg.q, m, cfg.e_max);
    let mut pool = Pool {
        gs,
        ctx,
        circuits: Vec::new(),
        amps: Vec::new(),
        classes: Vec::new(),
        buckets: HashMap::new(),
        stats: GenerationStats { characteristic: singles.len(), ..Default::default() },
    };

    let empty = Circuit::new(cfg.q, m);
    let s0 = pool.ctx.psi1.clone();
    pool.amps.push(pool.ctx.amplitude_of_state(&s0));
    pool.circuits.push(empty.clone());
    let k0 = pool.ctx.key(pool.amps[0].norm());
    pool.classes.push(Class { members: vec![0] });
    pool.bucket_add(k0, 0);

    // Representatives of the previous round, with cached states.
    let mut frontier: Vec<(usize, Vec<Complex64>)> = vec![(0, s0)];
    let mut reps: HashSet<Vec<Instr>> = HashSet::from([Vec::new()]);

    for j in 1..=cfg.n {
        let t0 = Instant::now();
        let mut rs = RoundStats { round: j, ..Default::default() };
        let mut fresh: Vec<(usize, Vec<Complex64>)> = Vec::new();
        for (lid, state) in &frontier {
            let l = pool.circuits[*lid].clone();
            let used = l.params_used();
            for g in &singles {
                if cfg.sigma.single_use && uses_param(g, &used) {
                    continue;
                }
                rs.constructed += 1;
                let ext = l.with(g.clone());
                if !reps.contains(&ext.instrs[1..]) {
                    continue;
                }
                rs.kept += 1;
                let s = pool.ctx.extend_state(state, g, gs);
                let amp = pool.ctx.amplitude_of_state(&s);
                let id = pool.circuits.len();
                pool.circuits.push(ext);
                pool.amps.push(amp);
                let key = pool.ctx.key(amp.norm());
                let (_, is_new) = pool.eccify(id, key, verifier)?;
                if is_new {
                    fresh.push((id, s));
                }
            }
        }
        let before = reps.len();
        for (id, _) in &fresh {
            reps.insert(pool.circuits[*id].instrs.clone());
        }
        assert_eq!(reps.len(), before + fresh.len(), "representative sets grow monotonically");
        rs.representatives = reps.len();
        rs.eccs = pool.classes.iter().filter(|c| c.members.len() >= 2).count();
        rs.elapsed = t0.elapsed();
        log::info!(
            "round {j}: constructed {}, kept {}, |R| = {}, classes = {}, {:.2?}",
            rs.constructed,
            rs.kept,
            rs.representatives,
            rs.eccs,
            rs.elapsed
        );
        pool.stats.constructed += rs.constructed;
        pool.stats.rounds.push(rs);
        frontier = fresh;
    }
    pool.stats.representatives = reps.len();

    let mut eccs: Vec<Ecc> = pool
        .classes
        .iter()
        .filter(|c| c.members.len() >= 2)
        .map(|c| {
            let mut e = Ecc::new(cfg.q, m, c.members.iter().map(|&i| pool.circuits[i].clone()).collect());
            e.sort();
            e
        })
        .collect();
    eccs.sort_by(|a, b| a.representative().cmp(b.representative()));
    let mut representatives: Vec<Circuit> = pool.classes.iter().map(|c| pool.circuits[c.members[0]].clone()).collect();
    representatives.sort();
    Ok(Generated {
        eccs: EccSet { meta: EccSetMeta::new(gs, &cfg.sigma, cfg.n, cfg.q, cfg.seed, cfg.e_max), eccs },
        representatives,
        stats: pool.stats,
    })
}

/// Partitions circuits that share a fingerprint bucket into verified
/// classes, visiting them in `≺` order. Each circuit joins the first class
/// whose representative it verifies against.
pub fn eccify(gs: &GateSet, bucket: &[Circuit], verifier: &mut Verifier) -> Result<Vec<Ecc>, GenerateError> {
    let mut sorted: Vec<Circuit> = bucket.to_vec();
    sorted.sort();
    let mut classes: Vec<Vec<Circuit>> = Vec::new();
    'next: for c in sorted {
        for cls in classes.iter_mut() {
            if verifier.verify_pair(gs, &c, &cls[0])?.is_verified() {
                cls.push(c);
                continue 'next;
            }
        }
        classes.push(vec![c]);
    }
    Ok(classes
        .into_iter()
        .map(|cs| Ecc::new(cs[0].num_qubits, cs[0].num_params, cs))
        .collect())
}

/// Result of the brute-force completeness check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Completeness {
    Complete,
    /// An equivalent pair that the set cannot connect.
    Gap { from: String, to: String },
    /// The rewrite search exceeded its budget.
    Inconclusive,
}

/// Enumerates every circuit with at most `n` gates over `q` qubits, groups
/// them by verified equivalence, and checks that every equivalent pair is
/// connected by rewrites drawn from `es` (representative to member and
/// back) whose intermediates also have at most `n` gates.
pub fn completeness_oracle(
    gs: &GateSet,
    sigma: &ParamSpec,
    n: usize,
    q: usize,
    es: &EccSet,
    verifier: &mut Verifier,
    budget: usize,
) -> Result<Completeness, GenerateError> {
    let m = sigma.num_params;
    let singles = enumerate_single_gate_circuits(gs, sigma, q);
    let mut all: Vec<Circuit> = vec![Circuit::new(q, m)];
    let mut layer = all.clone();
    for _ in 0..n {
        let mut next = Vec::new();
        for c in &layer {
            let used = c.params_used();
            for g in &singles {
                if sigma.single_use && uses_param(g, &used) {
                    continue;
                }
                next.push(c.with(g.clone()));
            }
        }
        all.extend(next.iter().cloned());
        layer = next;
    }
    // Distinct circuits (DAGs), then verified classes via fingerprints.
    let mut canon: Vec<Circuit> = all.iter().map(Circuit::canonical).collect::<BTreeSet<_>>().into_iter().collect();
    canon.sort();
    let ctx = FingerprintContext::with_defaults(q, m);
    let mut classes: Vec<Vec<usize>> = Vec::new();
    let mut class_of: HashMap<FingerprintKey, Vec<usize>> = HashMap::new();
    let amps: Vec<Complex64> = canon.iter().map(|c| ctx.amplitude(c, gs)).collect();
    'outer: for (i, c) in canon.iter().enumerate() {
        let key = ctx.key(amps[i].norm());
        for probe in [key, key - 1, key + 1] {
            for &cl in class_of.get(&probe).map(Vec::as_slice).unwrap_or(&[]) {
                let r = classes[cl][0];
                if verifier.verify_with_amplitudes(gs, c, &canon[r], &ctx.p0, amps[i], amps[r])?.is_verified() {
                    classes[cl].push(i);
                    class_of.entry(key).or_default().push(cl);
                    continue 'outer;
                }
            }
        }
        class_of.entry(key).or_default().push(classes.len());
        classes.push(vec![i]);
    }

    let rules = crate::optimizer::extract_transformations(es);
    let index: HashMap<&Circuit, usize> = canon.iter().enumerate().map(|(i, c)| (c, i)).collect();
    // Rewrites are applied from every member; an edge joins two members.
    // Rules with an empty target only fire in the other direction, so
    // connectivity is judged on the undirected graph.
    let mut parent: Vec<usize> = (0..canon.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut spent = 0usize;
    for cls in classes.iter().filter(|c| c.len() >= 2) {
        for &v in cls {
            spent += 1;
            if spent > budget {
                return Ok(Completeness::Inconclusive);
            }
            let dag = CircuitDag::from_circuit(&canon[v]);
            for t in &rules {
                for out in crate::optimizer::apply(&dag, t) {
                    if out.len() > n {
                        continue;
                    }
                    let Some(&w) = index.get(&out) else { continue };
                    let (a, b) = (find(&mut parent, v), find(&mut parent, w));
                    parent[a] = b;
                }
            }
        }
        let root = find(&mut parent, cls[0]);
        if let Some(&missing) = cls.iter().find(|&&i| find(&mut parent, i) != root) {
            return Ok(Completeness::Gap { from: canon[cls[0]].to_text(gs), to: canon[missing].to_text(gs) });
        }
    }
    Ok(Completeness::Complete)
}
