// SPDX-License-Identifier: Apache-2.0

use std::path::Path;
use std::time::Instant;

use serde_json::json;
use thiserror::Error;

use qsopt_core::circuit::qasm::{emit_qasm, parse_qasm};
use qsopt_core::eccset::{EccSet, EccSetError, EccSetMeta};
use qsopt_core::generator::{repgen, GenerateError, GeneratorConfig};
use qsopt_core::gatedef::{builtin_gate_set, input_gate_set, GateSet, ParamExpr, ParamSpec};
use qsopt_core::optimizer::{extract_transformations, optimize as run_search, OptimizeError, SearchConfig};
use qsopt_core::preprocess::{run_passes, Pass as PrePass, PreprocessError};
use qsopt_core::pruning::{prune as run_prune, Pass as PrunePass};
use qsopt_core::verifier::{Backend, SolverConfig, SolverError, Verdict, Verifier, VerifierError};

use crate::manifest::RunManifest;
use crate::{BackendArg, GenerateArgs, OptimizeArgs, PreprocessArgs, PruneArgs, SolverArgs, StatsArgs, VerifyArgs};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Verification(String),
    #[error("solver: {0}")]
    Solver(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Io(_) => 2,
            CliError::Verification(_) => 3,
            CliError::Solver(_) => 4,
        }
    }
}

impl From<VerifierError> for CliError {
    fn from(e: VerifierError) -> Self {
        match e {
            VerifierError::Solver(s) => CliError::Solver(s.to_string()),
            other => CliError::Verification(other.to_string()),
        }
    }
}

impl From<GenerateError> for CliError {
    fn from(e: GenerateError) -> Self {
        match e {
            GenerateError::Verifier(v) => v.into(),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<EccSetError> for CliError {
    fn from(e: EccSetError) -> Self {
        CliError::Io(e.to_string())
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| io_err(path, e))
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

fn write_manifest(m: &RunManifest, out: &Path) -> Result<(), CliError> {
    m.write_for(out).map(|_| ()).map_err(|e| io_err(out, e))
}

/// A built-in name, `base[G1,G2]` for a subset of a built-in set, or the
/// path of a JSON definition.
pub fn resolve_gate_set(spec: &str) -> Result<GateSet, CliError> {
    if let Some((base, rest)) = spec.split_once('[') {
        let names: Vec<&str> = rest.trim_end_matches(']').split(',').map(str::trim).collect();
        let gs = builtin_gate_set(base).map_err(|e| CliError::Usage(e.to_string()))?;
        return gs.subset(spec, &names).map_err(|e| CliError::Usage(e.to_string()));
    }
    if let Ok(gs) = builtin_gate_set(spec) {
        return Ok(gs);
    }
    let path = Path::new(spec);
    if path.exists() {
        return GateSet::from_json(&read(path)?).map_err(|e| io_err(path, e));
    }
    Err(CliError::Usage(format!("unknown gate set '{spec}' (built-in: nam, ibm, rigetti, clifford_t)")))
}

fn load_eccs(path: &Path, gateset: Option<&str>) -> Result<(EccSet, GateSet), CliError> {
    let text = read(path)?;
    let name = match gateset {
        Some(g) => g.to_string(),
        None => {
            let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| io_err(path, e))?;
            v.pointer("/gate_set/name")
                .and_then(|n| n.as_str())
                .ok_or_else(|| io_err(path, "missing gate_set.name"))?
                .to_string()
        }
    };
    let gs = resolve_gate_set(&name)?;
    let es = EccSet::from_json(&text, &gs).map_err(|e| io_err(path, e))?;
    Ok((es, gs))
}

fn make_verifier(s: &SolverArgs) -> Result<Verifier, CliError> {
    let backend = match s.backend {
        BackendArg::Smt => Backend::Smt,
        BackendArg::Algebraic => Backend::Algebraic,
    };
    if let Some(d) = &s.dump_smt {
        std::fs::create_dir_all(d).map_err(|e| io_err(d, e))?;
    }
    let cfg = SolverConfig { timeout: s.solver_timeout, dump_dir: s.dump_smt.clone(), ..SolverConfig::default() };
    let mut v = Verifier::new(backend, cfg);
    v.preflight().map_err(|e| match e {
        VerifierError::Solver(SolverError::Config(m)) => CliError::Solver(m),
        other => other.into(),
    })?;
    Ok(v)
}

fn param_spec(a: &GenerateArgs) -> Result<ParamSpec, CliError> {
    match &a.exprs {
        None => {
            let mut s = ParamSpec::standard(a.m);
            s.single_use = !a.multi_use;
            Ok(s)
        }
        Some(list) => {
            let exprs = list
                .iter()
                .map(|t| t.parse::<ParamExpr>().map_err(|e| CliError::Usage(format!("expression '{t}': {e}"))))
                .collect::<Result<Vec<_>, _>>()?;
            ParamSpec::new(a.m, exprs, !a.multi_use).map_err(CliError::Usage)
        }
    }
}

pub fn generate(a: &GenerateArgs) -> Result<(), CliError> {
    let t0 = Instant::now();
    let gs = resolve_gate_set(&a.gateset)?;
    let sigma = param_spec(a)?;
    let mut verifier = make_verifier(&a.solver)?;
    let cfg = GeneratorConfig { n: a.n, q: a.q, sigma: sigma.clone(), seed: a.seed, e_max: a.e_max };
    let g = repgen(&gs, &cfg, &mut verifier)?;
    let raw = (g.eccs.eccs.len(), g.eccs.circuit_count(), g.eccs.transformation_count());
    let es = if a.prune { run_prune(&g.eccs, &[PrunePass::Simplify, PrunePass::Common]) } else { g.eccs.clone() };
    write(&a.out, &es.to_json(&gs))?;

    let mut m = RunManifest::new("generate", serde_json::to_value(a).expect("flags serialize"));
    m.seeds = vec![a.seed];
    m.gate_set = Some(gs.name.clone());
    m.gate_set_hash = Some(gs.hash());
    m.param_exprs = Some(sigma.expr_strings());
    m.wall_time_secs = t0.elapsed().as_secs_f64();
    let rounds: Vec<_> = g
        .stats
        .rounds
        .iter()
        .map(|r| {
            json!({
                "round": r.round, "constructed": r.constructed, "kept": r.kept,
                "representatives": r.representatives, "eccs": r.eccs, "secs": r.elapsed.as_secs_f64(),
            })
        })
        .collect();
    let vs = &verifier.stats;
    m.results = json!({
        "characteristic": g.stats.characteristic,
        "representatives": g.stats.representatives,
        "constructed": g.stats.constructed,
        "repgen": { "eccs": raw.0, "circuits": raw.1, "transformations": raw.2 },
        "written": { "eccs": es.eccs.len(), "circuits": es.circuit_count(), "transformations": es.transformation_count() },
        "rounds": rounds,
        "verifier": {
            "pairs": vs.pairs, "queries": vs.queries, "unsat": vs.unsat, "sat": vs.sat, "unknown": vs.unknown,
            "inconclusive": g.stats.inconclusive, "neighbour_merges": g.stats.neighbour_merges,
        },
    });
    write_manifest(&m, &a.out)?;
    println!(
        "wrote {}: {} classes, {} circuits, {} transformations (|R_{}| = {})",
        a.out.display(),
        es.eccs.len(),
        es.circuit_count(),
        es.transformation_count(),
        a.n,
        g.stats.representatives
    );
    Ok(())
}

pub fn prune(a: &PruneArgs) -> Result<(), CliError> {
    let t0 = Instant::now();
    let passes = a
        .passes
        .iter()
        .map(|p| p.parse::<PrunePass>().map_err(CliError::Usage))
        .collect::<Result<Vec<_>, _>>()?;
    let (es, gs) = load_eccs(&a.input, a.gateset.as_deref())?;
    let out = run_prune(&es, &passes);
    write(&a.out, &out.to_json(&gs))?;
    let mut m = RunManifest::new("prune", serde_json::to_value(a).expect("flags serialize"));
    m.gate_set = Some(gs.name.clone());
    m.gate_set_hash = Some(gs.hash());
    m.param_exprs = Some(es.meta.param_exprs.clone());
    m.wall_time_secs = t0.elapsed().as_secs_f64();
    m.results = json!({
        "before": { "eccs": es.eccs.len(), "circuits": es.circuit_count(), "transformations": es.transformation_count() },
        "after": { "eccs": out.eccs.len(), "circuits": out.circuit_count(), "transformations": out.transformation_count() },
    });
    write_manifest(&m, &a.out)?;
    println!(
        "{} -> {} circuits, {} -> {} transformations",
        es.circuit_count(),
        out.circuit_count(),
        es.transformation_count(),
        out.transformation_count()
    );
    Ok(())
}

pub fn verify(a: &VerifyArgs) -> Result<(), CliError> {
    let (es, gs) = load_eccs(&a.eccs, a.gateset.as_deref())?;
    let mut v = make_verifier(&a.solver)?;
    let mut failures = Vec::new();
    for (k, e) in es.eccs.iter().enumerate() {
        let rep = e.representative();
        for c in &e.circuits[1..] {
            match v.verify_pair(&gs, rep, c)? {
                Verdict::Verified(_) => {}
                other => failures.push(format!("class {k}: {} vs {}: {other:?}", rep.to_text(&gs), c.to_text(&gs))),
            }
        }
    }
    let pairs = es.circuit_count() - es.eccs.len();
    if failures.is_empty() {
        println!("{} classes, {pairs} pairs verified", es.eccs.len());
        Ok(())
    } else {
        for f in &failures {
            eprintln!("{f}");
        }
        Err(CliError::Verification(format!("{} of {pairs} pairs failed verification", failures.len())))
    }
}

pub fn preprocess(a: &PreprocessArgs) -> Result<(), CliError> {
    let t0 = Instant::now();
    let requested = a
        .passes
        .iter()
        .map(|p| p.parse::<PrePass>().map_err(CliError::Usage))
        .collect::<Result<Vec<_>, _>>()?;
    let order = [PrePass::Toffoli, PrePass::Transpile, PrePass::Merge, PrePass::Rigetti];
    let passes: Vec<PrePass> = order.into_iter().filter(|p| requested.contains(p)).collect();
    let target = builtin_gate_set(&a.gateset).map_err(|e| CliError::Usage(e.to_string()))?;
    let reader = input_gate_set()
        .extended("input", &target.def().gates)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let c = parse_qasm(&read(&a.input)?, &reader).map_err(|e| io_err(&a.input, e))?;
    let (out, gs) = run_passes(&c, &reader, &a.gateset, &passes).map_err(|e| match e {
        PreprocessError::MissingRule { .. } | PreprocessError::Symbolic(_) => CliError::Usage(e.to_string()),
        other => CliError::Io(other.to_string()),
    })?;
    write(&a.out, &emit_qasm(&out, &gs))?;
    let mut m = RunManifest::new("preprocess", serde_json::to_value(a).expect("flags serialize"));
    m.gate_set = Some(gs.name.clone());
    m.gate_set_hash = Some(gs.hash());
    m.wall_time_secs = t0.elapsed().as_secs_f64();
    m.results = json!({ "input_gates": c.len(), "output_gates": out.len() });
    write_manifest(&m, &a.out)?;
    println!("{} gates -> {} gates", c.len(), out.len());
    Ok(())
}

pub fn optimize(a: &OptimizeArgs) -> Result<(), CliError> {
    let t0 = Instant::now();
    let (es, gs) = load_eccs(&a.eccs, a.gateset.as_deref())?;
    let c = parse_qasm(&read(&a.input)?, &gs).map_err(|e| io_err(&a.input, e))?;
    let ts = extract_transformations(&es);
    let cfg = SearchConfig {
        gamma: a.gamma,
        timeout: a.timeout,
        seed: a.seed,
        shuffle_ties: a.shuffle_ties,
        stop_at_cost: a.stop_at_cost,
        log_every: 10.0,
        ..SearchConfig::default()
    };
    let r = run_search(&c, &ts, &gs, &cfg).map_err(|e| match e {
        OptimizeError::Input(_) | OptimizeError::Symbolic => io_err(&a.input, e),
    })?;
    write(&a.out, &emit_qasm(&r.best, &gs))?;
    let mut m = RunManifest::new("optimize", serde_json::to_value(a).expect("flags serialize"));
    m.seeds = vec![a.seed];
    m.gate_set = Some(gs.name.clone());
    m.gate_set_hash = Some(gs.hash());
    m.param_exprs = Some(es.meta.param_exprs.clone());
    m.wall_time_secs = t0.elapsed().as_secs_f64();
    let s = &r.stats;
    m.results = json!({
        "transformations": ts.len(),
        "initial_cost": s.initial_cost, "final_cost": s.final_cost,
        "expanded": s.expanded, "generated": s.generated, "queued": s.queued,
        "truncations": s.truncations, "timed_out": s.timed_out, "trace": s.trace,
    });
    write_manifest(&m, &a.out)?;
    println!("{} gates -> {} gates in {:.1}s", s.initial_cost, s.final_cost, s.elapsed.as_secs_f64());
    Ok(())
}

pub fn stats(a: &StatsArgs) -> Result<(), CliError> {
    let (es, _gs) = load_eccs(&a.eccs, a.gateset.as_deref())?;
    let manifest = RunManifest::read_for(&a.eccs);
    let generated = manifest.as_ref().filter(|m| m.command == "generate").map(|m| &m.results);
    let meta: &EccSetMeta = &es.meta;
    let summary = json!({
        "gate_set": meta.gate_set, "n": meta.n, "q": meta.q, "m": meta.m,
        "param_exprs": meta.param_exprs, "single_use": meta.single_use,
        "eccs": es.eccs.len(), "circuits": es.circuit_count(), "transformations": es.transformation_count(),
        "representatives": generated.and_then(|g| g.get("representatives")).cloned(),
        "characteristic": generated.and_then(|g| g.get("characteristic")).cloned(),
        "rounds": generated.and_then(|g| g.get("rounds")).cloned(),
    });
    if a.json {
        println!("{}", serde_json::to_string_pretty(&summary).expect("plain data serializes"));
        return Ok(());
    }
    println!("gate set         {} (n={}, q={}, m={})", meta.gate_set, meta.n, meta.q, meta.m);
    println!("classes          {}", es.eccs.len());
    println!("circuits         {}", es.circuit_count());
    println!("transformations  {}", es.transformation_count());
    if let Some(g) = generated {
        println!("|R_n|            {}", g["representatives"]);
        println!("characteristic   {}", g["characteristic"]);
        if let Some(rounds) = g["rounds"].as_array() {
            println!("round  constructed  representatives  classes  seconds");
            for r in rounds {
                println!(
                    "{:>5}  {:>11}  {:>15}  {:>7}  {:>7.3}",
                    r["round"].as_u64().unwrap_or(0),
                    r["constructed"].as_u64().unwrap_or(0),
                    r["representatives"].as_u64().unwrap_or(0),
                    r["eccs"].as_u64().unwrap_or(0),
                    r["secs"].as_f64().unwrap_or(0.0)
                );
            }
        }
    }
    Ok(())
}
