//! Compilation of three-clause expressions into Grover search circuits.
//!
//! Variables A, B, C live on q0, q1, q2; clause `i` (1-based) is computed into
//! ancilla q(2+i). One Grover iteration is oracle followed by diffusion.

mod qasm;
mod quil;
mod transpile;

pub use qasm::{emit_openqasm, lower_for_qasm, parse_openqasm};
pub use quil::{emit_quil, format_angle, parse_angle, parse_quil};
pub use transpile::{is_native, peephole_cancel, transpile};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::boolexpr::{Clause, Cnf3Expression, ExprError};
use crate::qsim::{Circuit, Gate, SimError, StateVector};

pub const VARIABLE_QUBITS: [usize; 3] = [0, 1, 2];
pub const ANCILLA_QUBITS: [usize; 3] = [3, 4, 5];
pub const COMPILED_QUBITS: usize = 6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QlcError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("ancilla q{0} is also a literal qubit")]
    AncillaCollision(usize),
    #[error("Grover iteration count must be at least 1")]
    ZeroIterations,
    #[error("diffusion needs at least 2 qubits, got {0}")]
    DiffusionTooSmall(usize),
    #[error("invalid search space: N = {n}, M = {m}")]
    SearchSpace { n: u64, m: u64 },
    #[error("{dialect} cannot express {gate}")]
    Unsupported { dialect: &'static str, gate: String },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, QlcError>;

pub(crate) fn parse_error<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(QlcError::Parse {
        line,
        msg: msg.into(),
    })
}

/// Grover circuit for one expression with its qubit layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompiledCircuit {
    pub expression: Cnf3Expression,
    pub iterations: usize,
    pub circuit: Circuit,
}

impl CompiledCircuit {
    pub fn variable_qubits(&self) -> [usize; 3] {
        VARIABLE_QUBITS
    }

    pub fn ancilla_qubits(&self) -> [usize; 3] {
        ANCILLA_QUBITS
    }
}

/// Computes `clause` into `ancilla` by De Morgan: `a ∨ b = ¬(¬a ∧ ¬b)`.
///
/// Positive literals are inverted around the Toffoli; negated ones already are.
pub fn compile_clause(clause: &Clause, ancilla: usize) -> Result<Vec<Gate>> {
    let qubits = clause.literals().map(|l| l.var.index());
    if qubits.contains(&ancilla) {
        return Err(QlcError::AncillaCollision(ancilla));
    }
    let flips: Vec<Gate> = clause
        .literals()
        .iter()
        .filter(|l| !l.negated)
        .map(|l| Gate::X(l.var.index()))
        .collect();
    let mut out = flips.clone();
    out.push(Gate::Ccx {
        controls: qubits,
        target: ancilla,
    });
    out.extend(flips);
    out.push(Gate::X(ancilla));
    Ok(out)
}

/// Clause computation, a three-way controlled Z on the ancillas, then uncomputation.
pub fn compile_oracle(expr: &Cnf3Expression) -> Result<Vec<Gate>> {
    let mut compute = Vec::new();
    for (clause, anc) in expr.clauses.iter().zip(ANCILLA_QUBITS) {
        compute.extend(compile_clause(clause, anc)?);
    }
    let mut out = compute.clone();
    out.push(Gate::Mcz(ANCILLA_QUBITS.to_vec()));
    out.extend(compute.iter().rev().map(Gate::inverse));
    Ok(out)
}

/// Inversion about the mean on qubits `0..n`, up to a global phase of −1.
pub fn diffusion(n: usize) -> Result<Vec<Gate>> {
    if n < 2 {
        return Err(QlcError::DiffusionTooSmall(n));
    }
    let qs: Vec<usize> = (0..n).collect();
    let mut out: Vec<Gate> = qs.iter().map(|&q| Gate::H(q)).collect();
    out.extend(qs.iter().map(|&q| Gate::X(q)));
    out.push(Gate::Mcz(qs.clone()));
    out.extend(qs.iter().map(|&q| Gate::X(q)));
    out.extend(qs.iter().map(|&q| Gate::H(q)));
    Ok(out)
}

pub fn compile_grover(expr: &Cnf3Expression, k: usize) -> Result<CompiledCircuit> {
    if k == 0 {
        return Err(QlcError::ZeroIterations);
    }
    let mut circuit = Circuit::new(COMPILED_QUBITS, 3)?;
    circuit.extend(VARIABLE_QUBITS.map(Gate::H))?;
    let oracle = compile_oracle(expr)?;
    let diff = diffusion(3)?;
    for _ in 0..k {
        circuit.extend(oracle.iter().cloned())?;
        circuit.extend(diff.iter().cloned())?;
    }
    for q in VARIABLE_QUBITS {
        circuit.measure(q, q)?;
    }
    Ok(CompiledCircuit {
        expression: *expr,
        iterations: k,
        circuit,
    })
}

/// Variable assignments whose sign the oracle flips, read from the simulated state.
pub fn oracle_marked_set(expr: &Cnf3Expression) -> Result<Vec<u64>> {
    let mut s = StateVector::new(COMPILED_QUBITS)?;
    s.apply_all(&VARIABLE_QUBITS.map(Gate::H))?;
    s.apply_all(&compile_oracle(expr)?)?;
    Ok(s.amplitudes()[..8]
        .iter()
        .enumerate()
        .filter(|(_, a)| a.re < 0.0)
        .map(|(i, _)| i as u64)
        .collect())
}

/// Outcome of the closed-form success estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GroverEstimate {
    pub probability: f64,
    /// Set when M = 0 or M = N: amplification does nothing and the value is M/N.
    pub degenerate: bool,
}

/// Probability of measuring a marked state after `k` iterations: `sin²((2k+1)·asin√(M/N))`.
pub fn grover_success(n: u64, m: u64, k: u64) -> Result<GroverEstimate> {
    if n == 0 || m > n {
        return Err(QlcError::SearchSpace { n, m });
    }
    let ratio = m as f64 / n as f64;
    if m == 0 || m == n {
        return Ok(GroverEstimate {
            probability: ratio,
            degenerate: true,
        });
    }
    let theta = ratio.sqrt().asin();
    Ok(GroverEstimate {
        probability: ((2 * k + 1) as f64 * theta).sin().powi(2),
        degenerate: false,
    })
}
