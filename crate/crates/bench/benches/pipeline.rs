// SPDX-License-Identifier: Apache-2.0

use std::time::Duration;

use criterion::{black_box, criterion_group, criterion_main, Criterion};

use qsopt_bench::{generator_config, nam_benchmark, pruned_set};
use qsopt_core::circuit::CircuitDag;
use qsopt_core::fingerprint::FingerprintContext;
use qsopt_core::generator::repgen;
use qsopt_core::optimizer::{apply, find_matches};
use qsopt_core::{builtin_gate_set, extract_transformations, optimize, Circuit, SearchConfig, Verifier};

fn fingerprint(c: &mut Criterion) {
    let (circ, gs) = nam_benchmark("barenco_tof_3");
    let ctx = FingerprintContext::with_defaults(circ.num_qubits, 0);
    c.bench_function("fingerprint barenco_tof_3", |b| b.iter(|| ctx.fingerprint(black_box(&circ), &gs)));
}

fn generation(c: &mut Criterion) {
    let nam = builtin_gate_set("nam").unwrap();
    let mut g = c.benchmark_group("repgen");
    g.sample_size(10);
    for (n, q) in [(2, 2), (2, 3), (3, 3)] {
        g.bench_function(format!("nam n={n} q={q}"), |b| {
            b.iter(|| repgen(&nam, &generator_config(n, q), &mut Verifier::algebraic()).unwrap())
        });
    }
    g.finish();
}

fn verification(c: &mut Criterion) {
    let nam = builtin_gate_set("nam").unwrap();
    let a = Circuit::from_text("CNOT 0 1; Rz p0 1; CNOT 0 1; Rz p1 0", &nam, 2, 2).unwrap();
    let b = Circuit::from_text("Rz p1 0; CNOT 0 1; Rz p0 1; CNOT 0 1", &nam, 2, 2).unwrap();
    let mut v = Verifier::algebraic();
    c.bench_function("verify commuting pair", |bch| bch.iter(|| v.verify_pair(&nam, black_box(&a), black_box(&b)).unwrap()));
}

fn matching(c: &mut Criterion) {
    let (circ, gs) = nam_benchmark("tof_3");
    let ts = extract_transformations(&pruned_set(&gs, 3, 3));
    let dag = CircuitDag::from_circuit(&circ);
    c.bench_function("match all transformations on tof_3", |b| {
        b.iter(|| ts.iter().map(|t| find_matches(black_box(&dag), t).len()).sum::<usize>())
    });
    c.bench_function("apply all transformations on tof_3", |b| {
        b.iter(|| ts.iter().map(|t| apply(black_box(&dag), t).len()).sum::<usize>())
    });
}

fn search(c: &mut Criterion) {
    let (circ, gs) = nam_benchmark("tof_3");
    let ts = extract_transformations(&pruned_set(&gs, 2, 2));
    let cfg = SearchConfig { timeout: Duration::from_secs(60), stop_at_cost: Some(35), ..SearchConfig::default() };
    let mut g = c.benchmark_group("optimize");
    g.sample_size(10);
    g.bench_function("tof_3 to 35 gates", |b| b.iter(|| optimize(&circ, &ts, &gs, &cfg).unwrap()));
    g.finish();
}

criterion_group!(benches, fingerprint, generation, verification, matching, search);
criterion_main!(benches);
