// SPDX-License-Identifier: Apache-2.0

//! Cost-guided backtracking search over transformation applications.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::circuit::{Circuit, CircuitDag, CircuitError, Instr};
use crate::gatedef::GateSet;

use super::{apply, Transformation};

#[derive(Debug, Error)]
pub enum OptimizeError {
    #[error("input circuit is not over the active gate set: {0}")]
    Input(#[from] CircuitError),
    #[error("input circuit has symbolic parameters")]
    Symbolic,
}

#[derive(Clone, Debug)]
pub struct SearchConfig {
    /// Circuits costing `gamma` times the best so far or more are not queued.
    pub gamma: f64,
    pub timeout: Duration,
    /// Once the queue grows past this many entries it is cut back to
    /// `queue_keep`.
    pub queue_cap: usize,
    pub queue_keep: usize,
    pub seed: u64,
    /// Break cost ties randomly instead of first-in first-out.
    pub shuffle_ties: bool,
    /// Stop as soon as a circuit this cheap is found.
    pub stop_at_cost: Option<usize>,
    /// Seconds between progress log lines; 0 disables them.
    pub log_every: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            gamma: 1.0001,
            timeout: Duration::from_secs(60),
            queue_cap: 2000,
            queue_keep: 1000,
            seed: 0,
            shuffle_ties: false,
            stop_at_cost: None,
            log_every: 0.0,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct SearchStats {
    pub initial_cost: usize,
    pub final_cost: usize,
    pub expanded: usize,
    pub generated: usize,
    pub queued: usize,
    pub truncations: usize,
    pub elapsed: Duration,
    pub timed_out: bool,
    /// `(seconds since start, best cost)` each time the best improves.
    pub trace: Vec<(f64, usize)>,
}

#[derive(Clone, Debug)]
pub struct SearchResult {
    pub best: Circuit,
    pub stats: SearchStats,
}

pub fn cost(c: &Circuit) -> usize {
    c.len()
}

#[derive(PartialEq, Eq, PartialOrd, Ord)]
struct Entry {
    key: Reverse<(usize, u64)>,
    idx: usize,
}

/// Best-first search from `c_in`; every step applies one transformation
/// at one location. Returns the cheapest circuit seen.
pub fn optimize(c_in: &Circuit, ts: &[Transformation], gs: &GateSet, cfg: &SearchConfig) -> Result<SearchResult, OptimizeError> {
    c_in.validate(gs, false)?;
    if c_in.is_symbolic() {
        return Err(OptimizeError::Symbolic);
    }
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut seq = 0u64;
    let mut tie = |rng: &mut ChaCha8Rng| {
        seq += 1;
        if cfg.shuffle_ties {
            rng.gen()
        } else {
            seq
        }
    };

    let start = c_in.canonical();
    let mut best = start.clone();
    let mut stats = SearchStats { initial_cost: cost(&start), trace: vec![(0.0, cost(&start))], ..Default::default() };
    let mut seen: HashSet<Vec<Instr>> = HashSet::new();
    let mut pool: Vec<Option<Circuit>> = Vec::new();
    let mut heap = BinaryHeap::new();
    seen.insert(start.instrs.clone());
    heap.push(Entry { key: Reverse((cost(&start), tie(&mut rng))), idx: 0 });
    pool.push(Some(start));
    let mut last_log = 0.0;

    while let Some(Entry { idx, .. }) = heap.pop() {
        if cfg.stop_at_cost.is_some_and(|s| cost(&best) <= s) {
            break;
        }
        if t0.elapsed() >= cfg.timeout {
            stats.timed_out = true;
            break;
        }
        let cur = pool[idx].take().expect("each entry is expanded once");
        stats.expanded += 1;
        let dag = CircuitDag::from_circuit(&cur);
        'apply: for t in ts {
            for c in apply(&dag, t) {
                stats.generated += 1;
                let c_cost = cost(&c);
                if c_cost < cost(&best) {
                    best = c.clone();
                    stats.trace.push((t0.elapsed().as_secs_f64(), c_cost));
                    log::info!("best cost {} after {:.1}s", c_cost, t0.elapsed().as_secs_f64());
                    if cfg.stop_at_cost.is_some_and(|s| c_cost <= s) {
                        break 'apply;
                    }
                }
                if (c_cost as f64) < cfg.gamma * cost(&best) as f64 && seen.insert(c.instrs.clone()) {
                    stats.queued += 1;
                    heap.push(Entry { key: Reverse((c_cost, tie(&mut rng))), idx: pool.len() });
                    pool.push(Some(c));
                }
            }
        }
        if heap.len() > cfg.queue_cap {
            stats.truncations += 1;
            let mut keep = Vec::with_capacity(cfg.queue_keep);
            while keep.len() < cfg.queue_keep {
                match heap.pop() {
                    Some(e) => keep.push(e),
                    None => break,
                }
            }
            heap = keep.into_iter().collect();
        }
        let now = t0.elapsed().as_secs_f64();
        if cfg.log_every > 0.0 && now - last_log >= cfg.log_every {
            last_log = now;
            log::info!("{:.1}s: expanded {}, queue {}, best {}", now, stats.expanded, heap.len(), cost(&best));
        }
    }
    stats.final_cost = cost(&best);
    stats.elapsed = t0.elapsed();
    Ok(SearchResult { best, stats })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::sim::same_action_up_to_phase;
    use crate::gatedef::builtin_gate_set;

    fn tf(gs: &GateSet, a: &str, b: &str, q: usize, m: usize) -> Transformation {
        Transformation::new(Circuit::from_text(a, gs, q, m).unwrap(), Circuit::from_text(b, gs, q, m).unwrap(), 0)
    }

    #[test]
    fn commutation_enables_cancellation() {
        let gs = builtin_gate_set("nam").unwrap();
        let ts = vec![
            tf(&gs, "H 0; H 0", "()", 1, 0),
            tf(&gs, "CNOT 0 1; CNOT 0 1", "()", 2, 0),
            tf(&gs, "Rz p0 0; CNOT 0 1", "CNOT 0 1; Rz p0 0", 2, 1),
            tf(&gs, "CNOT 0 1; Rz p0 0", "Rz p0 0; CNOT 0 1", 2, 1),
            tf(&gs, "Rz p0 0; Rz p1 0", "Rz p0+p1 0", 1, 2),
        ];
        let c = Circuit::from_text("Rz pi/4 0; CNOT 0 1; H 1; H 1; Rz -pi/4 0; CNOT 0 1", &gs, 2, 0).unwrap();
        let cfg = SearchConfig { timeout: Duration::from_secs(10), ..Default::default() };
        let r = optimize(&c, &ts, &gs, &cfg).unwrap();
        assert!(same_action_up_to_phase(&c, &r.best, &gs, &gs, 3, 5, 1e-9));
        // Rz(0) stays, everything else cancels.
        assert!(r.stats.final_cost <= 1, "{}", r.best.to_text(&gs));
        assert!(r.stats.trace.windows(2).all(|w| w[1].1 < w[0].1));
    }

    #[test]
    fn stop_at_cost_and_rejects_foreign_circuits() {
        let gs = builtin_gate_set("nam").unwrap();
        let ts = vec![tf(&gs, "H 0; H 0", "()", 1, 0)];
        let c = Circuit::from_text("H 0; H 0; H 1; H 1", &gs, 2, 0).unwrap();
        let cfg = SearchConfig { stop_at_cost: Some(2), ..Default::default() };
        let r = optimize(&c, &ts, &gs, &cfg).unwrap();
        assert_eq!(r.stats.final_cost, 2);
        let sym = Circuit::from_text("Rz p0 0", &gs, 1, 1).unwrap();
        assert!(matches!(optimize(&sym, &ts, &gs, &cfg), Err(OptimizeError::Symbolic)));
        let ibm = builtin_gate_set("ibm").unwrap();
        let u = Circuit::from_text("U1 pi 0", &ibm, 1, 0).unwrap();
        assert!(matches!(optimize(&u, &ts, &gs, &cfg), Err(OptimizeError::Input(_))));
    }

    #[test]
    fn shuffled_ties_are_reproducible() {
        let gs = builtin_gate_set("nam").unwrap();
        let ts = vec![tf(&gs, "H 0; H 0", "()", 1, 0), tf(&gs, "X 0; H 1", "H 1; X 0", 2, 0)];
        let c = Circuit::from_text("H 0; X 1; H 0; H 2; X 1; H 2", &gs, 3, 0).unwrap();
        let cfg = SearchConfig { shuffle_ties: true, seed: 3, ..Default::default() };
        let a = optimize(&c, &ts, &gs, &cfg).unwrap();
        let b = optimize(&c, &ts, &gs, &cfg).unwrap();
        assert_eq!(a.best, b.best);
        assert_eq!(a.stats.expanded, b.stats.expanded);
    }
}
