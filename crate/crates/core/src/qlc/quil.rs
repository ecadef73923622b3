//! Quil subset: DECLARE, H, X, Z, RX, RZ, CNOT, CZ, CCNOT, CONTROLLED … Z/X, MEASURE, HALT.

use std::f64::consts::PI;
use std::fmt::Write;

use super::{parse_error, QlcError, Result};
use crate::qsim::{Circuit, Gate, Measurement, MAX_QUBITS};

const MAX_PI_DENOMINATOR: i64 = 64;

/// Angle as a lowest-terms multiple of pi when one fits, otherwise a round-trip decimal.
pub fn format_angle(theta: f64) -> String {
    if theta == 0.0 {
        return "0".into();
    }
    let ratio = theta / PI;
    for d in 1..=MAX_PI_DENOMINATOR {
        let n = ratio * d as f64;
        let r = n.round();
        if (n - r).abs() < 1e-9 && r.abs() < 1e6 {
            let n = r as i64;
            let num = match n {
                1 => "pi".to_string(),
                -1 => "-pi".to_string(),
                _ => format!("{n}*pi"),
            };
            return if d == 1 { num } else { format!("{num}/{d}") };
        }
    }
    format!("{theta:?}")
}

struct AngleParser<'a> {
    src: &'a [u8],
    at: usize,
}

impl AngleParser<'_> {
    fn skip_ws(&mut self) {
        while self.at < self.src.len() && self.src[self.at].is_ascii_whitespace() {
            self.at += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.at).copied()
    }

    fn expr(&mut self) -> Option<f64> {
        let mut v = self.term()?;
        while let Some(op @ (b'+' | b'-')) = self.peek() {
            self.at += 1;
            let r = self.term()?;
            v = if op == b'+' { v + r } else { v - r };
        }
        Some(v)
    }

    fn term(&mut self) -> Option<f64> {
        let mut v = self.factor()?;
        while let Some(op @ (b'*' | b'/')) = self.peek() {
            self.at += 1;
            let r = self.factor()?;
            v = if op == b'*' { v * r } else { v / r };
        }
        Some(v)
    }

    fn factor(&mut self) -> Option<f64> {
        match self.peek()? {
            b'-' => {
                self.at += 1;
                Some(-self.factor()?)
            }
            b'+' => {
                self.at += 1;
                self.factor()
            }
            b'(' => {
                self.at += 1;
                let v = self.expr()?;
                if self.peek()? != b')' {
                    return None;
                }
                self.at += 1;
                Some(v)
            }
            c if c.is_ascii_alphabetic() => {
                let start = self.at;
                while self.at < self.src.len() && self.src[self.at].is_ascii_alphabetic() {
                    self.at += 1;
                }
                match &self.src[start..self.at] {
                    b"pi" | b"PI" => Some(PI),
                    _ => None,
                }
            }
            _ => {
                let start = self.at;
                while self.at < self.src.len() {
                    let c = self.src[self.at];
                    let exp_sign = (c == b'-' || c == b'+')
                        && self.at > start
                        && matches!(self.src[self.at - 1], b'e' | b'E');
                    if c.is_ascii_digit() || c == b'.' || c == b'e' || c == b'E' || exp_sign {
                        self.at += 1;
                    } else {
                        break;
                    }
                }
                std::str::from_utf8(&self.src[start..self.at])
                    .ok()?
                    .parse()
                    .ok()
            }
        }
    }
}

/// Arithmetic over decimals and `pi` with `+ - * /` and parentheses.
pub fn parse_angle(text: &str) -> Option<f64> {
    let mut p = AngleParser {
        src: text.as_bytes(),
        at: 0,
    };
    let v = p.expr()?;
    p.skip_ws();
    (p.at == p.src.len() && v.is_finite()).then_some(v)
}

pub fn emit_quil(circuit: &Circuit) -> Result<String> {
    let mut s = String::new();
    if circuit.classical_bit_count() > 0 {
        writeln!(s, "DECLARE ro BIT[{}]", circuit.classical_bit_count()).unwrap();
    }
    for g in circuit.ops() {
        let qs = g.qubits();
        let list = |qs: &[usize]| {
            qs.iter()
                .map(|q| q.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        };
        let line = match g {
            Gate::X(q) => format!("X {q}"),
            Gate::H(q) => format!("H {q}"),
            Gate::Z(q) => format!("Z {q}"),
            Gate::Rx { theta, qubit } => format!("RX({}) {qubit}", format_angle(*theta)),
            Gate::Rz { theta, qubit } => format!("RZ({}) {qubit}", format_angle(*theta)),
            Gate::Cx { .. } => format!("CNOT {}", list(&qs)),
            Gate::Cz(..) => format!("CZ {}", list(&qs)),
            Gate::Ccx { .. } => format!("CCNOT {}", list(&qs)),
            Gate::Mcz(_) => format!("{}Z {}", "CONTROLLED ".repeat(qs.len() - 1), list(&qs)),
        };
        writeln!(s, "{line}").unwrap();
    }
    for m in circuit.measurements() {
        writeln!(s, "MEASURE {} ro[{}]", m.qubit, m.bit).unwrap();
    }
    Ok(s)
}

fn qubit(tok: &str, line: usize) -> Result<usize> {
    match tok.parse::<usize>() {
        Ok(q) if q < MAX_QUBITS => Ok(q),
        Ok(q) => parse_error(
            line,
            format!("qubit {q} exceeds the {MAX_QUBITS}-qubit limit"),
        ),
        Err(_) => parse_error(line, format!("`{tok}` is not a qubit index")),
    }
}

fn classical_ref(tok: &str, line: usize) -> Result<(String, usize)> {
    let (name, rest) = match tok.split_once('[') {
        Some(x) => x,
        None => return parse_error(line, format!("`{tok}` is not a memory reference")),
    };
    let idx = rest
        .strip_suffix(']')
        .and_then(|i| i.parse().ok())
        .ok_or_else(|| QlcError::Parse {
            line,
            msg: format!("bad memory reference `{tok}`"),
        })?;
    Ok((name.to_string(), idx))
}

/// Splits `NAME(params) rest` into the name, the parameter text and the remaining tokens.
fn split_instruction(text: &str) -> (String, Option<String>, Vec<String>) {
    if let Some(open) = text.find('(') {
        let head = &text[..open];
        if !head.contains(char::is_whitespace) {
            if let Some(close) = text[open..].find(')') {
                let close = open + close;
                let params = text[open + 1..close].to_string();
                let rest = text[close + 1..]
                    .split_whitespace()
                    .map(String::from)
                    .collect();
                return (head.to_string(), Some(params), rest);
            }
        }
    }
    let mut toks = text.split_whitespace().map(String::from);
    let name = toks.next().unwrap_or_default();
    (name, None, toks.collect())
}

/// Parses the Quil subset into a circuit of `max qubit + 1` qubits.
///
/// Measurements may be interleaved with gates on other qubits; they are moved to
/// the end. A gate on a qubit that was already measured is an error.
pub fn parse_quil(text: &str) -> Result<Circuit> {
    let mut gates: Vec<Gate> = Vec::new();
    let mut measures: Vec<Measurement> = Vec::new();
    let mut declared: Option<(String, usize)> = None;
    let mut max_qubit: Option<usize> = None;

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (name, params, args) = split_instruction(body);
        let upper = name.to_ascii_uppercase();
        if upper == "HALT" {
            break;
        }
        match upper.as_str() {
            "DECLARE" => {
                if args.len() != 2 {
                    return parse_error(line, "DECLARE expects a name and a type");
                }
                let (ty, size) = match args[1].split_once('[') {
                    Some((ty, rest)) => (ty, rest.strip_suffix(']').and_then(|n| n.parse().ok())),
                    None => (args[1].as_str(), Some(1)),
                };
                if !ty.eq_ignore_ascii_case("BIT") {
                    return parse_error(line, format!("unsupported memory type `{ty}`"));
                }
                let size = size.ok_or_else(|| QlcError::Parse {
                    line,
                    msg: format!("bad size in `{}`", args[1]),
                })?;
                if declared.is_some() {
                    return parse_error(line, "only one classical register is supported");
                }
                declared = Some((args[0].clone(), size));
                continue;
            }
            "MEASURE" => {
                if args.len() != 2 {
                    return parse_error(line, "MEASURE expects a qubit and a memory reference");
                }
                let q = qubit(&args[0], line)?;
                let (reg, bit) = classical_ref(&args[1], line)?;
                if let Some((name, _)) = &declared {
                    if *name != reg {
                        return parse_error(line, format!("undeclared register `{reg}`"));
                    }
                }
                max_qubit = max_qubit.max(Some(q));
                measures.push(Measurement { qubit: q, bit });
                continue;
            }
            _ => {}
        }

        let controls = {
            let mut n = 0;
            let mut words = body.split_whitespace();
            while words
                .next()
                .is_some_and(|w| w.eq_ignore_ascii_case("CONTROLLED"))
            {
                n += 1;
            }
            n
        };
        let (upper, params, args) = if controls > 0 {
            let rest = body
                .split_whitespace()
                .skip(controls)
                .collect::<Vec<_>>()
                .join(" ");
            let (n, p, a) = split_instruction(&rest);
            (n.to_ascii_uppercase(), p, a)
        } else {
            (upper, params, args)
        };
        let qs = args
            .iter()
            .map(|a| qubit(a, line))
            .collect::<Result<Vec<_>>>()?;
        let angle = match &params {
            Some(p) => Some(parse_angle(p).ok_or_else(|| QlcError::Parse {
                line,
                msg: format!("malformed angle `{p}`"),
            })?),
            None => None,
        };
        let want = |n: usize| -> Result<()> {
            if qs.len() == n {
                Ok(())
            } else {
                parse_error(
                    line,
                    format!("{upper} expects {n} qubits, got {}", qs.len()),
                )
            }
        };
        let need_angle = || {
            angle.ok_or_else(|| QlcError::Parse {
                line,
                msg: format!("{upper} needs an angle"),
            })
        };
        if params.is_some() && !matches!(upper.as_str(), "RX" | "RZ") {
            return parse_error(line, format!("{upper} takes no parameters"));
        }
        let gate = match (controls, upper.as_str()) {
            (0, "H") => {
                want(1)?;
                Gate::H(qs[0])
            }
            (0, "X") => {
                want(1)?;
                Gate::X(qs[0])
            }
            (0, "Z") => {
                want(1)?;
                Gate::Z(qs[0])
            }
            (0, "RX") => {
                want(1)?;
                Gate::Rx {
                    theta: need_angle()?,
                    qubit: qs[0],
                }
            }
            (0, "RZ") => {
                want(1)?;
                Gate::Rz {
                    theta: need_angle()?,
                    qubit: qs[0],
                }
            }
            (0, "CNOT") | (1, "X") => {
                want(2)?;
                Gate::Cx {
                    control: qs[0],
                    target: qs[1],
                }
            }
            (0, "CZ") => {
                want(2)?;
                Gate::Cz(qs[0], qs[1])
            }
            (0, "CCNOT") | (2, "X") => {
                want(3)?;
                Gate::Ccx {
                    controls: [qs[0], qs[1]],
                    target: qs[2],
                }
            }
            (n, "Z") if n > 0 => {
                want(n + 1)?;
                Gate::Mcz(qs.clone())
            }
            _ => return parse_error(line, format!("unknown instruction `{body}`")),
        };
        if let Some(q) = gate
            .qubits()
            .iter()
            .find(|q| measures.iter().any(|m| m.qubit == **q))
        {
            return parse_error(line, format!("gate on qubit {q} after it was measured"));
        }
        let touched = gate.qubits();
        for w in 0..touched.len() {
            if touched[..w].contains(&touched[w]) {
                return parse_error(line, format!("qubit {} repeated", touched[w]));
            }
        }
        max_qubit = max_qubit.max(touched.iter().copied().max());
        gates.push(gate);
    }

    let width = match &declared {
        Some((_, n)) => *n,
        None => measures.iter().map(|m| m.bit + 1).max().unwrap_or(0),
    };
    let qubit_count = max_qubit.map_or(1, |q| q + 1);
    let mut c = Circuit::new(qubit_count, width)?;
    c.extend(gates)?;
    for m in measures {
        c.measure(m.qubit, m.bit)?;
    }
    Ok(c)
}
