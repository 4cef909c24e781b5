// SPDX-License-Identifier: Apache-2.0

//! OpenQASM 2.0 subset: `qreg`, gate applications with constant angle
//! arguments, and `//` comments. `creg` and `barrier` are accepted and
//! ignored.
//!
//! ```text
//! program   := header? statement*
//! statement := "qreg" ID "[" INT "]" ";"
//!            | "creg" ID "[" INT "]" ";"
//!            | "barrier" operands ";"
//!            | NAME ( "(" angle ("," angle)* ")" )? operands ";"
//! operands  := ID "[" INT "]" ("," ID "[" INT "]")*
//! angle     := decimal | [-] [k "*"] "pi" ["/" d]
//! ```

use std::collections::HashMap;

use thiserror::Error;

use super::{Angle, Arg, Circuit, Instr};
use crate::gatedef::GateSet;

#[derive(Debug, Error, PartialEq)]
#[error("line {line}, column {col}: {msg}")]
pub struct QasmError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

struct Stmt<'a> {
    text: &'a str,
    line: usize,
    col: usize,
}

/// Splits on `;`, dropping comments, and records where each statement starts.
fn statements(src: &str) -> Result<Vec<Stmt<'_>>, QasmError> {
    let mut out = Vec::new();
    for (ln, raw) in src.lines().enumerate() {
        let code = match raw.find("//") {
            Some(k) => &raw[..k],
            None => raw,
        };
        let mut start = 0;
        for (k, ch) in code.char_indices() {
            if ch == ';' {
                let piece = &code[start..k];
                if !piece.trim().is_empty() {
                    let lead = piece.len() - piece.trim_start().len();
                    out.push(Stmt { text: piece.trim(), line: ln + 1, col: start + lead + 1 });
                }
                start = k + 1;
            }
        }
        if !code[start..].trim().is_empty() {
            let piece = &code[start..];
            let lead = piece.len() - piece.trim_start().len();
            return Err(QasmError {
                line: ln + 1,
                col: start + lead + 1,
                msg: "statement is missing its terminating ';'".into(),
            });
        }
    }
    Ok(out)
}

fn normalize(s: &str) -> String {
    s.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_ascii_lowercase()
}

pub fn parse_qasm(src: &str, gs: &GateSet) -> Result<Circuit, QasmError> {
    let mut regs: HashMap<String, (usize, usize)> = HashMap::new();
    let mut num_qubits = 0;
    let mut instrs = Vec::new();
    for st in statements(src)? {
        let err = |msg: String| QasmError { line: st.line, col: st.col, msg };
        let t = st.text;
        let lower = t.to_ascii_lowercase();
        if lower.starts_with("openqasm") || lower.starts_with("include") {
            continue;
        }
        if let Some(rest) = t.strip_prefix("qreg").or_else(|| t.strip_prefix("creg")) {
            let (name, size) = parse_operand(rest.trim()).ok_or_else(|| err(format!("malformed register declaration '{t}'")))?;
            if t.starts_with("qreg") {
                if regs.contains_key(name) {
                    return Err(err(format!("register '{name}' declared twice")));
                }
                regs.insert(name.to_string(), (num_qubits, size));
                num_qubits += size;
            }
            continue;
        }
        if lower.starts_with("barrier") {
            continue;
        }
        // Split head (name plus optional argument list) from operands.
        let (head, operands) = match t.find('(') {
            Some(open) if t[..open].trim().chars().all(|c| c.is_ascii_alphanumeric() || c == '_') => {
                let close = t.find(')').ok_or_else(|| err("unclosed '('".into()))?;
                (&t[..=close], t[close + 1..].trim())
            }
            _ => match t.find(char::is_whitespace) {
                Some(k) => (&t[..k], t[k..].trim()),
                None => return Err(err(format!("gate '{t}' has no operands"))),
            },
        };
        let key = normalize(head);
        let mut qubits = Vec::new();
        for op in operands.split(',') {
            let (name, idx) = parse_operand(op.trim()).ok_or_else(|| err(format!("malformed operand '{}'", op.trim())))?;
            let &(off, size) = regs.get(name).ok_or_else(|| err(format!("unknown register '{name}'")))?;
            if idx >= size {
                return Err(err(format!("index {idx} out of range for register '{name}'")));
            }
            qubits.push(off + idx);
        }
        let (gate, args) = resolve(gs, &key).map_err(err)?;
        let g = gs.gate(gate);
        if qubits.len() != g.qubit_arity {
            return Err(err(format!("{} expects {} qubits, got {}", g.name, g.qubit_arity, qubits.len())));
        }
        let mut seen = qubits.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != qubits.len() {
            return Err(err("repeated qubit operand".into()));
        }
        instrs.push(Instr::new(gate, args, qubits));
    }
    Ok(Circuit::from_instrs(num_qubits, 0, instrs))
}

/// Finds the gate for a normalized head such as `h`, `rz(pi/4)` or
/// `rx(pi/2)` (a fixed-angle alias).
fn resolve(gs: &GateSet, key: &str) -> Result<(usize, Vec<Arg>), String> {
    for (id, g) in gs.gates.iter().enumerate() {
        if g.qasm.contains('(') && normalize(&g.qasm) == key {
            return Ok((id, Vec::new()));
        }
    }
    let (name, arg_text) = match key.split_once('(') {
        Some((n, rest)) => (n, Some(rest.trim_end_matches(')'))),
        None => (key, None),
    };
    // Fixed-angle aliases written with an equivalent angle spelling.
    if let Some(a) = arg_text.and_then(Angle::parse) {
        for (id, g) in gs.gates.iter().enumerate() {
            if let Some((gn, ga)) = g.qasm.split_once('(') {
                if gn == name && Angle::parse(ga.trim_end_matches(')')).is_some_and(|b| b.eq_mod_2pi(&a, 1e-12) && b.radians() == a.radians()) {
                    return Ok((id, Vec::new()));
                }
            }
        }
    }
    let args: Vec<Arg> = match arg_text {
        None | Some("") => Vec::new(),
        Some(s) => s
            .split(',')
            .map(|a| Angle::parse(a).map(Arg::Const).ok_or_else(|| format!("bad angle '{a}'")))
            .collect::<Result<_, _>>()?,
    };
    for (id, g) in gs.gates.iter().enumerate() {
        if g.qasm == name && g.param_arity == args.len() {
            return Ok((id, args));
        }
    }
    Err(format!("gate '{name}' with {} arguments is not in gate set '{}'", args.len(), gs.name))
}

fn parse_operand(s: &str) -> Option<(&str, usize)> {
    let open = s.find('[')?;
    let close = s.strip_suffix(']')?;
    let name = s[..open].trim();
    if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return None;
    }
    let idx = close[open + 1..].trim().parse().ok()?;
    Some((name, idx))
}

/// Renders over one register `q`.
pub fn emit_qasm(c: &Circuit, gs: &GateSet) -> String {
    let mut out = String::from("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
    out.push_str(&format!("qreg q[{}];\n", c.num_qubits));
    for ins in &c.instrs {
        let g = gs.gate(ins.gate);
        out.push_str(&g.qasm);
        if !ins.args.is_empty() {
            let args: Vec<String> = ins.args.iter().map(Arg::render).collect();
            out.push_str(&format!("({})", args.join(",")));
        }
        let ops: Vec<String> = ins.qubits.iter().map(|q| format!("q[{q}]")).collect();
        out.push(' ');
        out.push_str(&ops.join(","));
        out.push_str(";\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gatedef::{builtin_gate_set, input_gate_set};

    #[test]
    fn parses_two_hadamards() {
        let gs = builtin_gate_set("nam").unwrap();
        let c = parse_qasm("qreg q[1];\nh q[0]; h q[0];", &gs).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.num_qubits, 1);
    }

    #[test]
    fn round_trip_is_stable() {
        let gs = builtin_gate_set("nam").unwrap();
        let src = "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg a[2];\nqreg b[1]; // ancilla\nh a[1];\nrz( -pi / 4 ) b[0];\ncx a[0], b[0];\nrz(0.3) a[0];\n";
        let c = parse_qasm(src, &gs).unwrap();
        assert_eq!(c.num_qubits, 3);
        assert_eq!(c.to_text(&gs), "H 1; Rz -pi/4 2; CNOT 0 2; Rz 0.3 0");
        let once = emit_qasm(&c, &gs);
        let twice = emit_qasm(&parse_qasm(&once, &gs).unwrap(), &gs);
        assert_eq!(once, twice);
    }

    #[test]
    fn rigetti_aliases() {
        let gs = builtin_gate_set("rigetti").unwrap();
        let c = parse_qasm("qreg q[2]; rx(pi/2) q[0]; rx(-pi/2) q[1]; x q[0]; rz(pi) q[1]; cz q[0],q[1];", &gs).unwrap();
        assert_eq!(c.to_text(&gs), "Rx90 0; Rxm90 1; X 0; Rz pi 1; CZ 0 1");
        let again = parse_qasm(&emit_qasm(&c, &gs), &gs).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn errors_carry_positions() {
        let gs = input_gate_set();
        let e = parse_qasm("qreg q[2];\nh q[0];\n  foo q[1];", &gs).unwrap_err();
        assert_eq!((e.line, e.col), (3, 3));
        let e = parse_qasm("qreg q[2];\nh q[5];", &gs).unwrap_err();
        assert_eq!(e.line, 2);
        let e = parse_qasm("qreg q[2];\nh q[0]", &gs).unwrap_err();
        assert!(e.msg.contains("';'"));
        assert!(parse_qasm("qreg q[3]; ccx q[0],q[1],q[2]; ccz q[2],q[0],q[1];", &gs).is_ok());
    }
}
