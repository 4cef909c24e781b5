// SPDX-License-Identifier: Apache-2.0

//! SMT-LIB 2 scripts over QF_NRA and a long-lived solver subprocess.

use std::io::{BufRead, BufReader, Write};
use std::path::PathBuf;
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::Duration;

use thiserror::Error;

use crate::symexpr::{Poly, TrigBasis};

/// Environment variable naming the solver executable.
pub const SOLVER_ENV: &str = "QSOPT_SMT_SOLVER";

const SQRT2: &str = "r2";

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("solver configuration: {0}")]
    Config(String),
    #[error("solver protocol: {0}")]
    Protocol(String),
}

#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub path: PathBuf,
    pub args: Vec<String>,
    pub timeout: Duration,
    pub logic: String,
    /// Every script is also written here when set.
    pub dump_dir: Option<PathBuf>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let path = std::env::var_os(SOLVER_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("z3"));
        SolverConfig {
            path,
            args: vec!["-in".into(), "-smt2".into()],
            timeout: Duration::from_secs(30),
            logic: "QF_NRA".into(),
            dump_dir: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SatResult {
    Unsat,
    /// Model values for the trig variables, in slot order.
    Sat(Option<Vec<f64>>),
    Unknown,
}

/// The query "some entry of `diffs` is nonzero" with one `s² + c² = 1`
/// constraint per trig variable pair. `diffs` must have real coefficients.
pub fn build_script(basis: &TrigBasis, diffs: &[Poly], logic: &str) -> String {
    let names: Vec<String> = (0..basis.nvars()).map(|s| basis.trig_var(s).name()).collect();
    let mut s = String::new();
    s.push_str(&format!("(set-logic {logic})\n"));
    s.push_str(&format!("(declare-const {SQRT2} Real)\n"));
    s.push_str(&format!("(assert (= (* {SQRT2} {SQRT2}) 2.0))\n(assert (> {SQRT2} 0.0))\n"));
    for k in 0..basis.num_params() {
        let (sn, cn) = (&names[2 * k], &names[2 * k + 1]);
        s.push_str(&format!("(declare-const {sn} Real)\n(declare-const {cn} Real)\n"));
        s.push_str(&format!("(assert (= (+ (* {sn} {sn}) (* {cn} {cn})) 1.0))\n"));
    }
    let nonzero: Vec<String> = diffs
        .iter()
        .filter(|p| !p.is_zero())
        .map(|p| format!("(not (= {} 0.0))", p.to_smt(&names, SQRT2)))
        .collect();
    match nonzero.len() {
        0 => s.push_str("(assert false)\n"),
        1 => s.push_str(&format!("(assert {})\n", nonzero[0])),
        _ => s.push_str(&format!("(assert (or\n  {}))\n", nonzero.join("\n  "))),
    }
    s.push_str("(check-sat)\n");
    s
}

/// One solver process reused across queries via `(reset)`.
pub struct SolverSession {
    cfg: SolverConfig,
    proc: Option<Proc>,
    dumped: usize,
}

struct Proc {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<String>,
}

impl Drop for Proc {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

impl SolverSession {
    pub fn new(cfg: SolverConfig) -> Self {
        SolverSession { cfg, proc: None, dumped: 0 }
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    /// Starts the process now, so a missing binary surfaces early.
    pub fn ensure_started(&mut self) -> Result<(), SolverError> {
        if self.proc.is_none() {
            self.proc = Some(self.spawn()?);
        }
        Ok(())
    }

    fn spawn(&self) -> Result<Proc, SolverError> {
        let mut child = Command::new(&self.cfg.path)
            .args(&self.cfg.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| SolverError::Config(format!("cannot start '{}': {e}", self.cfg.path.display())))?;
        let stdin = child.stdin.take().ok_or_else(|| SolverError::Config("no stdin pipe".into()))?;
        let stdout = child.stdout.take().ok_or_else(|| SolverError::Config("no stdout pipe".into()))?;
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let Ok(line) = line else { break };
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        Ok(Proc { child, stdin, lines: rx })
    }

    fn dump(&mut self, script: &str) {
        if let Some(dir) = &self.cfg.dump_dir {
            let path = dir.join(format!("query_{:06}.smt2", self.dumped));
            if let Err(e) = std::fs::create_dir_all(dir).and_then(|_| std::fs::write(&path, script)) {
                log::warn!("cannot dump {}: {e}", path.display());
            }
            self.dumped += 1;
        }
    }

    /// Runs one script ending in `(check-sat)`; on `sat`, asks for the
    /// values of `model_vars`.
    pub fn check(&mut self, script: &str, model_vars: &[String]) -> Result<SatResult, SolverError> {
        self.dump(script);
        self.ensure_started()?;
        let ms = self.cfg.timeout.as_millis();
        let preamble = format!("(reset)\n(set-option :timeout {ms})\n(set-option :pp.decimal true)\n");
        let grace = self.cfg.timeout + Duration::from_secs(5);
        let proc = self.proc.as_mut().expect("started above");
        if let Err(e) = proc.stdin.write_all(preamble.as_bytes()).and_then(|_| proc.stdin.write_all(script.as_bytes())).and_then(|_| proc.stdin.flush()) {
            self.proc = None;
            return Err(SolverError::Protocol(format!("write failed: {e}")));
        }
        let verdict = loop {
            match proc.lines.recv_timeout(grace) {
                Ok(line) => {
                    let t = line.trim();
                    match t {
                        "unsat" => break SatResult::Unsat,
                        "sat" => break SatResult::Sat(None),
                        "unknown" | "timeout" => break SatResult::Unknown,
                        "" | "success" => continue,
                        _ if t.starts_with("(error") => {
                            self.proc = None;
                            return Err(SolverError::Protocol(t.to_string()));
                        }
                        _ => continue,
                    }
                }
                Err(RecvTimeoutError::Timeout) => {
                    // The solver ignored its own timeout; restart it.
                    self.proc = None;
                    return Ok(SatResult::Unknown);
                }
                Err(RecvTimeoutError::Disconnected) => {
                    self.proc = None;
                    return Err(SolverError::Protocol("solver exited".into()));
                }
            }
        };
        if verdict != SatResult::Sat(None) || model_vars.is_empty() {
            return Ok(verdict);
        }
        let req = format!("(get-value ({}))\n", model_vars.join(" "));
        if proc.stdin.write_all(req.as_bytes()).and_then(|_| proc.stdin.flush()).is_err() {
            self.proc = None;
            return Ok(SatResult::Sat(None));
        }
        let mut text = String::new();
        let mut depth = 0i32;
        loop {
            match proc.lines.recv_timeout(grace) {
                Ok(line) => {
                    depth += line.matches('(').count() as i32 - line.matches(')').count() as i32;
                    text.push_str(&line);
                    text.push(' ');
                    if depth <= 0 && !text.trim().is_empty() {
                        break;
                    }
                }
                Err(_) => {
                    self.proc = None;
                    return Ok(SatResult::Sat(None));
                }
            }
        }
        Ok(SatResult::Sat(parse_model(&text, model_vars)))
    }
}

/// Reads `((x 0.5) (y (- 0.25)) (z 0.7071067811?))`.
pub fn parse_model(text: &str, vars: &[String]) -> Option<Vec<f64>> {
    let toks = tokenize(text);
    let mut pos = 0;
    let tree = parse_sexp(&toks, &mut pos)?;
    let Sexp::List(items) = tree else { return None };
    let mut out = vec![f64::NAN; vars.len()];
    for it in items {
        let Sexp::List(pair) = it else { return None };
        let [Sexp::Atom(name), value] = pair.as_slice() else { return None };
        let k = vars.iter().position(|v| v == name)?;
        out[k] = eval_value(value)?;
    }
    out.iter().all(|x| x.is_finite()).then_some(out)
}

enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

fn tokenize(text: &str) -> Vec<String> {
    let spaced = text.replace('(', " ( ").replace(')', " ) ");
    spaced.split_whitespace().map(str::to_string).collect()
}

fn parse_sexp(toks: &[String], pos: &mut usize) -> Option<Sexp> {
    let t = toks.get(*pos)?;
    *pos += 1;
    if t == "(" {
        let mut items = Vec::new();
        while toks.get(*pos)? != ")" {
            items.push(parse_sexp(toks, pos)?);
        }
        *pos += 1;
        Some(Sexp::List(items))
    } else {
        Some(Sexp::Atom(t.clone()))
    }
}

fn eval_value(v: &Sexp) -> Option<f64> {
    match v {
        Sexp::Atom(a) => a.trim_end_matches('?').parse().ok(),
        Sexp::List(items) => match items.as_slice() {
            [Sexp::Atom(op), x] if op == "-" => Some(-eval_value(x)?),
            [Sexp::Atom(op), x, y] if op == "/" => Some(eval_value(x)? / eval_value(y)?),
            [Sexp::Atom(op), x, y] if op == "-" => Some(eval_value(x)? - eval_value(y)?),
            [Sexp::Atom(op), xs @ ..] if op == "+" => xs.iter().map(eval_value).sum(),
            [Sexp::Atom(op), xs @ ..] if op == "*" => xs.iter().map(eval_value).product(),
            _ => None,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_values_parse() {
        let vars = vec!["s_p0".to_string(), "c_p0".to_string(), "r2".to_string()];
        let m = parse_model("((s_p0 (- 0.5)) (c_p0 0.8660254037?) (r2 (/ 3.0 2.0)))", &vars).unwrap();
        assert_eq!(m[0], -0.5);
        assert!((m[1] - 0.8660254037).abs() < 1e-12);
        assert_eq!(m[2], 1.5);
        assert!(parse_model("((s_p0 1.0))", &vars).is_none());
    }

    #[test]
    fn empty_difference_asserts_false() {
        let b = TrigBasis::new(vec![2]);
        let s = build_script(&b, &[Poly::zero(2)], "QF_NRA");
        assert!(s.contains("(assert false)"));
        assert!(s.contains("(declare-const s_p0_2 Real)"));
    }

    #[test]
    fn missing_binary_is_a_configuration_error() {
        let cfg = SolverConfig { path: PathBuf::from("/nonexistent/solver-binary"), ..SolverConfig::default() };
        let mut s = SolverSession::new(cfg);
        assert!(matches!(s.ensure_started(), Err(SolverError::Config(_))));
    }
}
