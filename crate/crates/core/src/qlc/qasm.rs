//! OpenQASM 2 subset: one `qreg`, one `creg`, h/x/z/rx/rz/cx/cz/ccx and measure.

use std::fmt::Write;

use super::quil::{format_angle, parse_angle};
use super::{parse_error, QlcError, Result};
use crate::qsim::{Circuit, Gate, Measurement, MAX_QUBITS};

/// Emits statements in the layout `qreg q[n]; creg c[m]; …; measure q[i] -> c[j];`.
///
/// Multi-controlled Z on three or more qubits has no single statement here; see
/// [`lower_for_qasm`].
pub fn emit_openqasm(circuit: &Circuit) -> Result<String> {
    let mut s = String::new();
    writeln!(s, "qreg q[{}];", circuit.qubit_count()).unwrap();
    if circuit.classical_bit_count() > 0 {
        writeln!(s, "creg c[{}];", circuit.classical_bit_count()).unwrap();
    }
    for g in circuit.ops() {
        let args = g
            .qubits()
            .iter()
            .map(|q| format!("q[{q}]"))
            .collect::<Vec<_>>()
            .join(",");
        let head = match g {
            Gate::X(_) => "x".to_string(),
            Gate::H(_) => "h".to_string(),
            Gate::Z(_) => "z".to_string(),
            Gate::Rx { theta, .. } => format!("rx({})", format_angle(*theta)),
            Gate::Rz { theta, .. } => format!("rz({})", format_angle(*theta)),
            Gate::Cx { .. } => "cx".to_string(),
            Gate::Cz(..) => "cz".to_string(),
            Gate::Mcz(qs) if qs.len() == 2 => "cz".to_string(),
            Gate::Ccx { .. } => "ccx".to_string(),
            Gate::Mcz(_) => {
                return Err(QlcError::Unsupported {
                    dialect: "OpenQASM",
                    gate: g.to_string(),
                })
            }
        };
        writeln!(s, "{head} {args};").unwrap();
    }
    for m in circuit.measurements() {
        writeln!(s, "measure q[{}] -> c[{}];", m.qubit, m.bit).unwrap();
    }
    Ok(s)
}

/// Replaces doubly controlled Z with H·CCX·H on its last qubit so the circuit can be emitted.
pub fn lower_for_qasm(circuit: &Circuit) -> Result<Circuit> {
    let mut ops = Vec::with_capacity(circuit.ops().len());
    for g in circuit.ops() {
        match g {
            Gate::Mcz(qs) if qs.len() == 3 => ops.extend([
                Gate::H(qs[2]),
                Gate::Ccx {
                    controls: [qs[0], qs[1]],
                    target: qs[2],
                },
                Gate::H(qs[2]),
            ]),
            Gate::Mcz(qs) if qs.len() > 3 => {
                return Err(QlcError::Unsupported {
                    dialect: "OpenQASM",
                    gate: g.to_string(),
                })
            }
            other => ops.push(other.clone()),
        }
    }
    Ok(circuit.with_ops(ops)?)
}

fn indexed(tok: &str, reg: &str, line: usize) -> Result<usize> {
    let tok = tok.trim();
    let inner = tok
        .strip_prefix(reg)
        .and_then(|r| r.trim_start().strip_prefix('['))
        .and_then(|r| r.strip_suffix(']'))
        .and_then(|r| r.trim().parse().ok());
    inner.ok_or_else(|| QlcError::Parse {
        line,
        msg: format!("expected `{reg}[i]`, found `{tok}`"),
    })
}

fn declaration(rest: &str, line: usize) -> Result<(String, usize)> {
    let rest = rest.trim();
    let (name, size) = rest.split_once('[').ok_or_else(|| QlcError::Parse {
        line,
        msg: format!("bad register declaration `{rest}`"),
    })?;
    let size = size
        .strip_suffix(']')
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| QlcError::Parse {
            line,
            msg: format!("bad register size in `{rest}`"),
        })?;
    Ok((name.trim().to_string(), size))
}

/// Parses the subset written by [`emit_openqasm`]. A leading `OPENQASM` version line and
/// `include` lines are accepted and ignored, as are `//` comments.
pub fn parse_openqasm(text: &str) -> Result<Circuit> {
    let mut qreg: Option<(String, usize)> = None;
    let mut creg: Option<(String, usize)> = None;
    let mut gates = Vec::new();
    let mut measures: Vec<Measurement> = Vec::new();

    let mut statements = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let body = raw.split("//").next().unwrap_or("");
        for stmt in body.split(';') {
            let stmt = stmt.trim();
            if !stmt.is_empty() {
                statements.push((i + 1, stmt.to_string()));
            }
        }
    }

    for (line, stmt) in statements {
        let (head, rest) = match stmt.find(|c: char| c.is_whitespace() || c == '(') {
            Some(p) => (&stmt[..p], &stmt[p..]),
            None => (stmt.as_str(), ""),
        };
        match head {
            "OPENQASM" | "include" => continue,
            "qreg" | "creg" => {
                let decl = declaration(rest, line)?;
                let slot = if head == "qreg" { &mut qreg } else { &mut creg };
                if slot.is_some() {
                    return parse_error(line, format!("second {head} declaration"));
                }
                if head == "qreg" && !(1..=MAX_QUBITS).contains(&decl.1) {
                    return parse_error(line, format!("register of {} qubits", decl.1));
                }
                *slot = Some(decl);
                continue;
            }
            _ => {}
        }
        let (qname, _) = match &qreg {
            Some(q) => q.clone(),
            None => return parse_error(line, "statement before qreg"),
        };
        if head == "measure" {
            let (q, c) = rest.split_once("->").ok_or_else(|| QlcError::Parse {
                line,
                msg: "measure needs `->`".into(),
            })?;
            let (cname, _) = match &creg {
                Some(c) => c.clone(),
                None => return parse_error(line, "measure before creg"),
            };
            measures.push(Measurement {
                qubit: indexed(q, &qname, line)?,
                bit: indexed(c, &cname, line)?,
            });
            continue;
        }
        let (params, args) = match rest.trim_start().strip_prefix('(') {
            Some(r) => {
                let close = r.find(')').ok_or_else(|| QlcError::Parse {
                    line,
                    msg: "unclosed parameter list".into(),
                })?;
                (Some(&r[..close]), &r[close + 1..])
            }
            None => (None, rest),
        };
        let qs = args
            .split(',')
            .map(|a| indexed(a, &qname, line))
            .collect::<Result<Vec<_>>>()?;
        let angle = match params {
            Some(p) => Some(parse_angle(p).ok_or_else(|| QlcError::Parse {
                line,
                msg: format!("malformed angle `{p}`"),
            })?),
            None => None,
        };
        let arity = match head {
            "h" | "x" | "z" | "rx" | "rz" => 1,
            "cx" | "cz" => 2,
            "ccx" => 3,
            _ => return parse_error(line, format!("unknown statement `{stmt}`")),
        };
        if qs.len() != arity {
            return parse_error(line, format!("{head} expects {arity} qubits"));
        }
        if angle.is_some() != matches!(head, "rx" | "rz") {
            return parse_error(line, format!("wrong parameters for {head}"));
        }
        let gate = match head {
            "h" => Gate::H(qs[0]),
            "x" => Gate::X(qs[0]),
            "z" => Gate::Z(qs[0]),
            "rx" => Gate::Rx {
                theta: angle.unwrap(),
                qubit: qs[0],
            },
            "rz" => Gate::Rz {
                theta: angle.unwrap(),
                qubit: qs[0],
            },
            "cx" => Gate::Cx {
                control: qs[0],
                target: qs[1],
            },
            "cz" => Gate::Cz(qs[0], qs[1]),
            _ => Gate::Ccx {
                controls: [qs[0], qs[1]],
                target: qs[2],
            },
        };
        if let Some(q) = gate
            .qubits()
            .iter()
            .find(|q| measures.iter().any(|m| m.qubit == **q))
        {
            return parse_error(line, format!("gate on qubit {q} after it was measured"));
        }
        gates.push((line, gate));
    }

    let (_, n) = qreg.ok_or_else(|| QlcError::Parse {
        line: 0,
        msg: "no qreg declaration".into(),
    })?;
    let width = creg.map_or(0, |c| c.1);
    let mut c = Circuit::new(n, width)?;
    for (line, g) in gates {
        c.push(g).map_err(|e| QlcError::Parse {
            line,
            msg: e.to_string(),
        })?;
    }
    for m in measures {
        c.measure(m.qubit, m.bit)?;
    }
    Ok(c)
}
