//! Dense state-vector simulation of the gate set used by the compiler.
//!
//! Basis index `i` encodes qubits right-to-left: bit 0 of `i` is qubit `q0`, the
//! rightmost symbol of `|… q1 q0⟩`. Every controlled gate follows that convention,
//! so `Cx { control: 0, target: 1 }` maps `|01⟩` to `|11⟩` and leaves `|10⟩` alone.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest register the dense simulator accepts (16 Mi amplitudes).
pub const MAX_QUBITS: usize = 20;
/// Largest register for which `circuit_unitary` builds a full matrix.
pub const MAX_UNITARY_QUBITS: usize = 10;
/// Shots drawn from one RNG stream before moving on to the next stream.
pub const SHOT_BLOCK: u64 = 4096;

const NORM_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("qubit count {0} outside 1..={MAX_QUBITS}")]
    QubitCount(usize),
    #[error("{gate} references qubit {qubit} but the register has {qubit_count} qubits")]
    QubitOutOfRange {
        gate: String,
        qubit: usize,
        qubit_count: usize,
    },
    #[error("{0} uses qubit {1} more than once")]
    QubitCollision(String, usize),
    #[error("{0} needs at least {1} qubits")]
    TooFewQubits(String, usize),
    #[error("amplitude vector of length {0} is not a power of two")]
    BadLength(usize),
    #[error("state is not normalised: sum of squared magnitudes is {0}")]
    NotNormalised(f64),
    #[error("gate {0} follows a measurement; only terminal measurement is supported")]
    GateAfterMeasurement(String),
    #[error("classical bit {0} is written more than once")]
    ClassicalBitReused(usize),
    #[error("classical bit {bit} out of range for a {width}-bit register")]
    ClassicalBitOutOfRange { bit: usize, width: usize },
    #[error("qubit {0} is measured more than once")]
    QubitMeasuredTwice(usize),
    #[error("shot count must be at least 1")]
    NoShots,
    #[error("unitary construction limited to {MAX_UNITARY_QUBITS} qubits, circuit has {0}")]
    UnitaryTooLarge(usize),
    #[error("unknown gate kind `{0}`")]
    UnknownKind(String),
    #[error("gate {kind} expects {expected} qubits, got {got}")]
    Arity {
        kind: String,
        expected: String,
        got: usize,
    },
    #[error("gate {0} requires an angle")]
    MissingAngle(String),
    #[error("malformed histogram: {0}")]
    BadHistogram(String),
}

pub type Result<T> = std::result::Result<T, SimError>;

/// One gate application.
///
/// For controlled kinds the target is always the last qubit in `qubits()`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GateRecord", into = "GateRecord")]
pub enum Gate {
    X(usize),
    H(usize),
    Z(usize),
    Rx {
        theta: f64,
        qubit: usize,
    },
    Rz {
        theta: f64,
        qubit: usize,
    },
    Cx {
        control: usize,
        target: usize,
    },
    Cz(usize, usize),
    Ccx {
        controls: [usize; 2],
        target: usize,
    },
    /// Multi-controlled Z: phase −1 on basis states where every listed qubit is 1.
    Mcz(Vec<usize>),
}

impl Gate {
    pub fn name(&self) -> &'static str {
        match self {
            Gate::X(_) => "X",
            Gate::H(_) => "H",
            Gate::Z(_) => "Z",
            Gate::Rx { .. } => "RX",
            Gate::Rz { .. } => "RZ",
            Gate::Cx { .. } => "CX",
            Gate::Cz(..) => "CZ",
            Gate::Ccx { .. } => "CCX",
            Gate::Mcz(_) => "MCZ",
        }
    }

    /// Qubits touched, controls first and target last.
    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Gate::X(q) | Gate::H(q) | Gate::Z(q) => vec![*q],
            Gate::Rx { qubit, .. } | Gate::Rz { qubit, .. } => vec![*qubit],
            Gate::Cx { control, target } => vec![*control, *target],
            Gate::Cz(a, b) => vec![*a, *b],
            Gate::Ccx { controls, target } => vec![controls[0], controls[1], *target],
            Gate::Mcz(qs) => qs.clone(),
        }
    }

    pub fn angle(&self) -> Option<f64> {
        match self {
            Gate::Rx { theta, .. } | Gate::Rz { theta, .. } => Some(*theta),
            _ => None,
        }
    }

    pub fn is_self_inverse(&self) -> bool {
        !matches!(self, Gate::Rx { .. } | Gate::Rz { .. })
    }

    pub fn inverse(&self) -> Gate {
        match self {
            Gate::Rx { theta, qubit } => Gate::Rx {
                theta: -theta,
                qubit: *qubit,
            },
            Gate::Rz { theta, qubit } => Gate::Rz {
                theta: -theta,
                qubit: *qubit,
            },
            other => other.clone(),
        }
    }

    /// Same gate with every qubit index passed through `f`.
    pub fn map_qubits(&self, mut f: impl FnMut(usize) -> usize) -> Gate {
        match self {
            Gate::X(q) => Gate::X(f(*q)),
            Gate::H(q) => Gate::H(f(*q)),
            Gate::Z(q) => Gate::Z(f(*q)),
            Gate::Rx { theta, qubit } => Gate::Rx {
                theta: *theta,
                qubit: f(*qubit),
            },
            Gate::Rz { theta, qubit } => Gate::Rz {
                theta: *theta,
                qubit: f(*qubit),
            },
            Gate::Cx { control, target } => Gate::Cx {
                control: f(*control),
                target: f(*target),
            },
            Gate::Cz(a, b) => Gate::Cz(f(*a), f(*b)),
            Gate::Ccx { controls, target } => Gate::Ccx {
                controls: [f(controls[0]), f(controls[1])],
                target: f(*target),
            },
            Gate::Mcz(qs) => Gate::Mcz(qs.iter().map(|&q| f(q)).collect()),
        }
    }

    /// Checks arity, distinctness and range against a register of `qubit_count` qubits.
    pub fn validate(&self, qubit_count: usize) -> Result<()> {
        let qubits = self.qubits();
        if let Gate::Mcz(qs) = self {
            if qs.len() < 2 {
                return Err(SimError::TooFewQubits("MCZ".into(), 2));
            }
        }
        for (i, &q) in qubits.iter().enumerate() {
            if q >= qubit_count {
                return Err(SimError::QubitOutOfRange {
                    gate: self.to_string(),
                    qubit: q,
                    qubit_count,
                });
            }
            if qubits[..i].contains(&q) {
                return Err(SimError::QubitCollision(self.to_string(), q));
            }
        }
        Ok(())
    }

    /// Gates acting on the same qubits with the same kind (and angle).
    ///
    /// CZ and MCZ are symmetric in their qubits, CCX in its two controls.
    pub fn same_action(&self, other: &Gate) -> bool {
        fn sorted(mut v: Vec<usize>) -> Vec<usize> {
            v.sort_unstable();
            v
        }
        match (self, other) {
            (Gate::Cz(a, b), Gate::Cz(c, d)) => sorted(vec![*a, *b]) == sorted(vec![*c, *d]),
            (Gate::Mcz(a), Gate::Mcz(b)) => sorted(a.clone()) == sorted(b.clone()),
            (
                Gate::Ccx {
                    controls: c1,
                    target: t1,
                },
                Gate::Ccx {
                    controls: c2,
                    target: t2,
                },
            ) => t1 == t2 && sorted(c1.to_vec()) == sorted(c2.to_vec()),
            _ => self == other,
        }
    }

    fn apply_to(&self, amps: &mut [Complex64]) {
        match self {
            Gate::X(q) => flip(amps, 0, *q),
            Gate::Cx { control, target } => flip(amps, 1 << control, *target),
            Gate::Ccx { controls, target } => {
                flip(amps, (1 << controls[0]) | (1 << controls[1]), *target)
            }
            Gate::Z(q) => phase_flip(amps, 1 << q),
            Gate::Cz(a, b) => phase_flip(amps, (1 << a) | (1 << b)),
            Gate::Mcz(qs) => phase_flip(amps, qs.iter().fold(0, |m, q| m | (1 << q))),
            Gate::H(q) => {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                let h = Complex64::new(s, 0.0);
                single(amps, *q, [[h, h], [h, -h]]);
            }
            Gate::Rx { theta, qubit } => single(amps, *qubit, rx_matrix(*theta)),
            Gate::Rz { theta, qubit } => single(amps, *qubit, rz_matrix(*theta)),
        }
    }
}

pub fn rx_matrix(theta: f64) -> [[Complex64; 2]; 2] {
    let c = Complex64::new((theta / 2.0).cos(), 0.0);
    let s = Complex64::new(0.0, -(theta / 2.0).sin());
    [[c, s], [s, c]]
}

pub fn rz_matrix(theta: f64) -> [[Complex64; 2]; 2] {
    let zero = Complex64::new(0.0, 0.0);
    [
        [Complex64::from_polar(1.0, -theta / 2.0), zero],
        [zero, Complex64::from_polar(1.0, theta / 2.0)],
    ]
}

fn flip(amps: &mut [Complex64], control_mask: usize, target: usize) {
    let t = 1usize << target;
    for i in 0..amps.len() {
        if i & t == 0 && i & control_mask == control_mask {
            amps.swap(i, i | t);
        }
    }
}

fn phase_flip(amps: &mut [Complex64], mask: usize) {
    for (i, a) in amps.iter_mut().enumerate() {
        if i & mask == mask {
            *a = -*a;
        }
    }
}

fn single(amps: &mut [Complex64], q: usize, m: [[Complex64; 2]; 2]) {
    let bit = 1usize << q;
    for i in 0..amps.len() {
        if i & bit == 0 {
            let a0 = amps[i];
            let a1 = amps[i | bit];
            amps[i] = m[0][0] * a0 + m[0][1] * a1;
            amps[i | bit] = m[1][0] * a0 + m[1][1] * a1;
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())?;
        if let Some(theta) = self.angle() {
            write!(f, "({theta})")?;
        }
        for q in self.qubits() {
            write!(f, " {q}")?;
        }
        Ok(())
    }
}

/// Flat JSON form of a gate: `{"kind": "CCX", "qubits": [0, 1, 3]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateRecord {
    pub kind: String,
    pub qubits: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angle: Option<f64>,
}

impl From<Gate> for GateRecord {
    fn from(g: Gate) -> Self {
        GateRecord {
            kind: g.name().to_string(),
            qubits: g.qubits(),
            angle: g.angle(),
        }
    }
}

impl TryFrom<GateRecord> for Gate {
    type Error = SimError;

    fn try_from(r: GateRecord) -> Result<Gate> {
        let kind = r.kind.to_ascii_uppercase();
        let arity = |n: usize| -> Result<()> {
            if r.qubits.len() == n {
                Ok(())
            } else {
                Err(SimError::Arity {
                    kind: kind.clone(),
                    expected: n.to_string(),
                    got: r.qubits.len(),
                })
            }
        };
        let angle = || r.angle.ok_or_else(|| SimError::MissingAngle(kind.clone()));
        let q = &r.qubits;
        Ok(match kind.as_str() {
            "X" => {
                arity(1)?;
                Gate::X(q[0])
            }
            "H" => {
                arity(1)?;
                Gate::H(q[0])
            }
            "Z" => {
                arity(1)?;
                Gate::Z(q[0])
            }
            "RX" => {
                arity(1)?;
                Gate::Rx {
                    theta: angle()?,
                    qubit: q[0],
                }
            }
            "RZ" => {
                arity(1)?;
                Gate::Rz {
                    theta: angle()?,
                    qubit: q[0],
                }
            }
            "CX" | "CNOT" => {
                arity(2)?;
                Gate::Cx {
                    control: q[0],
                    target: q[1],
                }
            }
            "CZ" => {
                arity(2)?;
                Gate::Cz(q[0], q[1])
            }
            "CCX" | "CCNOT" => {
                arity(3)?;
                Gate::Ccx {
                    controls: [q[0], q[1]],
                    target: q[2],
                }
            }
            "MCZ" => {
                if q.len() < 2 {
                    return Err(SimError::Arity {
                        kind,
                        expected: ">= 2".into(),
                        got: q.len(),
                    });
                }
                Gate::Mcz(q.clone())
            }
            _ => return Err(SimError::UnknownKind(r.kind)),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    qubit_count: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// The ground state `|0…0⟩`.
    pub fn new(qubit_count: usize) -> Result<Self> {
        if !(1..=MAX_QUBITS).contains(&qubit_count) {
            return Err(SimError::QubitCount(qubit_count));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << qubit_count];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(StateVector {
            qubit_count,
            amplitudes,
        })
    }

    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(SimError::BadLength(len));
        }
        let qubit_count = len.trailing_zeros() as usize;
        if qubit_count > MAX_QUBITS {
            return Err(SimError::QubitCount(qubit_count));
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(SimError::NotNormalised(norm));
        }
        Ok(StateVector {
            qubit_count,
            amplitudes,
        })
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(qubit_count: usize, index: usize) -> Result<Self> {
        let mut s = StateVector::new(qubit_count)?;
        if index >= s.amplitudes.len() {
            return Err(SimError::BadLength(index));
        }
        s.amplitudes[0] = Complex64::new(0.0, 0.0);
        s.amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(s)
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.qubit_count)?;
        gate.apply_to(&mut self.amplitudes);
        Ok(())
    }

    pub fn apply_all<'a>(&mut self, gates: impl IntoIterator<Item = &'a Gate>) -> Result<()> {
        for g in gates {
            self.apply(g)?;
        }
        Ok(())
    }

    /// Functional form of [`StateVector::apply`].
    pub fn apply_gate(&self, gate: &Gate) -> Result<StateVector> {
        let mut next = self.clone();
        next.apply(gate)?;
        Ok(next)
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Probability that every listed qubit reads 0.
    pub fn subsystem_zero_probability(&self, qubits: &[usize]) -> Result<f64> {
        let mut mask = 0usize;
        for &q in qubits {
            if q >= self.qubit_count {
                return Err(SimError::QubitOutOfRange {
                    gate: "subsystem".into(),
                    qubit: q,
                    qubit_count: self.qubit_count,
                });
            }
            mask |= 1 << q;
        }
        Ok(self
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| i & mask == 0)
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }
}

pub fn init_state(qubit_count: usize) -> Result<StateVector> {
    StateVector::new(qubit_count)
}

pub fn apply_gate(state: &StateVector, gate: &Gate) -> Result<StateVector> {
    state.apply_gate(gate)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Measurement {
    pub qubit: usize,
    pub bit: usize,
}

/// Gate sequence followed by terminal measurements.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Circuit {
    qubit_count: usize,
    classical_bit_count: usize,
    ops: Vec<Gate>,
    measurements: Vec<Measurement>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CircuitDoc {
    qubit_count: usize,
    #[serde(default)]
    classical_bit_count: Option<usize>,
    ops: Vec<Gate>,
    #[serde(default)]
    measurements: Vec<Measurement>,
}

impl<'de> Deserialize<'de> for Circuit {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let doc = CircuitDoc::deserialize(d)?;
        let width = doc.classical_bit_count.unwrap_or_else(|| {
            doc.measurements
                .iter()
                .map(|m| m.bit + 1)
                .max()
                .unwrap_or(0)
        });
        Circuit::from_parts(doc.qubit_count, width, doc.ops, doc.measurements)
            .map_err(serde::de::Error::custom)
    }
}

impl Circuit {
    pub fn new(qubit_count: usize, classical_bit_count: usize) -> Result<Self> {
        if !(1..=MAX_QUBITS).contains(&qubit_count) {
            return Err(SimError::QubitCount(qubit_count));
        }
        Ok(Circuit {
            qubit_count,
            classical_bit_count,
            ops: Vec::new(),
            measurements: Vec::new(),
        })
    }

    pub fn from_parts(
        qubit_count: usize,
        classical_bit_count: usize,
        ops: Vec<Gate>,
        measurements: Vec<Measurement>,
    ) -> Result<Self> {
        let mut c = Circuit::new(qubit_count, classical_bit_count)?;
        for g in ops {
            c.push(g)?;
        }
        for m in measurements {
            c.measure(m.qubit, m.bit)?;
        }
        Ok(c)
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    pub fn classical_bit_count(&self) -> usize {
        self.classical_bit_count
    }

    pub fn ops(&self) -> &[Gate] {
        &self.ops
    }

    pub fn measurements(&self) -> &[Measurement] {
        &self.measurements
    }

    pub fn push(&mut self, gate: Gate) -> Result<&mut Self> {
        if !self.measurements.is_empty() {
            return Err(SimError::GateAfterMeasurement(gate.to_string()));
        }
        gate.validate(self.qubit_count)?;
        self.ops.push(gate);
        Ok(self)
    }

    pub fn extend(&mut self, gates: impl IntoIterator<Item = Gate>) -> Result<&mut Self> {
        for g in gates {
            self.push(g)?;
        }
        Ok(self)
    }

    pub fn measure(&mut self, qubit: usize, bit: usize) -> Result<&mut Self> {
        if qubit >= self.qubit_count {
            return Err(SimError::QubitOutOfRange {
                gate: "MEASURE".into(),
                qubit,
                qubit_count: self.qubit_count,
            });
        }
        if bit >= self.classical_bit_count {
            return Err(SimError::ClassicalBitOutOfRange {
                bit,
                width: self.classical_bit_count,
            });
        }
        if self.measurements.iter().any(|m| m.bit == bit) {
            return Err(SimError::ClassicalBitReused(bit));
        }
        if self.measurements.iter().any(|m| m.qubit == qubit) {
            return Err(SimError::QubitMeasuredTwice(qubit));
        }
        self.measurements.push(Measurement { qubit, bit });
        Ok(self)
    }

    /// Copy of the circuit with gates replaced and measurements kept.
    pub fn with_ops(&self, ops: Vec<Gate>) -> Result<Circuit> {
        Circuit::from_parts(
            self.qubit_count,
            self.classical_bit_count,
            ops,
            self.measurements.clone(),
        )
    }

    /// Copy with at least `qubit_count` qubits; indices are unchanged.
    pub fn widened(&self, qubit_count: usize) -> Result<Circuit> {
        Circuit::from_parts(
            qubit_count.max(self.qubit_count),
            self.classical_bit_count,
            self.ops.clone(),
            self.measurements.clone(),
        )
    }

    pub fn final_state(&self) -> Result<StateVector> {
        let mut s = StateVector::new(self.qubit_count)?;
        s.apply_all(&self.ops)?;
        Ok(s)
    }

    /// Exact distribution over the classical register, indexed by register value.
    pub fn outcome_distribution(&self) -> Result<Vec<f64>> {
        let state = self.final_state()?;
        Ok(self.register_distribution(&state.probabilities()))
    }

    fn register_distribution(&self, probs: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; 1 << self.classical_bit_count];
        for (i, p) in probs.iter().enumerate() {
            let value = self
                .measurements
                .iter()
                .fold(0usize, |acc, m| acc | (((i >> m.qubit) & 1) << m.bit));
            out[value] += p;
        }
        out
    }
}

/// Observed counts keyed by register bitstring (bit 0 rightmost).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShotHistogram {
    pub counts: BTreeMap<String, u64>,
    pub shots: u64,
}

impl ShotHistogram {
    pub fn from_values(width: usize, values: &BTreeMap<usize, u64>) -> Self {
        let counts: BTreeMap<String, u64> = values
            .iter()
            .filter(|(_, &c)| c > 0)
            .map(|(&v, &c)| (format_bits(v, width), c))
            .collect();
        let shots = counts.values().sum();
        ShotHistogram { counts, shots }
    }

    /// Width of the outcome keys.
    pub fn width(&self) -> usize {
        self.counts.keys().next().map_or(0, |k| k.len())
    }

    pub fn validate(&self) -> Result<()> {
        if self.shots == 0 {
            return Err(SimError::NoShots);
        }
        let w = self.width();
        if w == 0 || w > MAX_QUBITS {
            return Err(SimError::BadHistogram(format!("key width {w}")));
        }
        for k in self.counts.keys() {
            if k.len() != w || !k.bytes().all(|b| b == b'0' || b == b'1') {
                return Err(SimError::BadHistogram(format!("bad key `{k}`")));
            }
        }
        let total: u64 = self.counts.values().sum();
        if total != self.shots {
            return Err(SimError::BadHistogram(format!(
                "counts sum to {total}, shots is {}",
                self.shots
            )));
        }
        Ok(())
    }

    pub fn count(&self, value: usize) -> u64 {
        self.counts
            .get(&format_bits(value, self.width()))
            .copied()
            .unwrap_or(0)
    }

    /// Counts indexed by register value, zero-filled to `2^width` entries.
    pub fn dense_counts(&self) -> Vec<u64> {
        let w = self.width();
        let mut out = vec![0u64; 1 << w];
        for (k, &c) in &self.counts {
            if let Ok(v) = usize::from_str_radix(k, 2) {
                out[v] += c;
            }
        }
        out
    }

    /// Merge two histograms of equal width.
    pub fn merge(&self, other: &ShotHistogram) -> ShotHistogram {
        let mut counts = self.counts.clone();
        for (k, c) in &other.counts {
            *counts.entry(k.clone()).or_insert(0) += c;
        }
        ShotHistogram {
            counts,
            shots: self.shots + other.shots,
        }
    }

    /// Two-column CSV (`outcome,count`) with decimal outcomes, every outcome listed.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("outcome,count\n");
        for (v, c) in self.dense_counts().iter().enumerate() {
            s.push_str(&format!("{v},{c}\n"));
        }
        s
    }
}

pub fn format_bits(value: usize, width: usize) -> String {
    (0..width)
        .rev()
        .map(|b| if (value >> b) & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Samples `shots` terminal measurements of `circuit`.
///
/// Shots are drawn in blocks of [`SHOT_BLOCK`]; block `b` uses a ChaCha8 generator
/// seeded with `seed` on stream `b`, and each shot inverts the cumulative
/// distribution of the classical register with one uniform `f64`. Blocks run in
/// parallel and merge into the same histogram regardless of scheduling.
pub fn run_circuit(circuit: &Circuit, shots: u64, seed: u64) -> Result<ShotHistogram> {
    if shots == 0 {
        return Err(SimError::NoShots);
    }
    let dist = circuit.outcome_distribution()?;
    sample_distribution(&dist, circuit.classical_bit_count, shots, seed)
}

pub fn sample_distribution(
    dist: &[f64],
    width: usize,
    shots: u64,
    seed: u64,
) -> Result<ShotHistogram> {
    if shots == 0 {
        return Err(SimError::NoShots);
    }
    let mut cdf = Vec::with_capacity(dist.len());
    let mut acc = 0.0;
    for p in dist {
        acc += p;
        cdf.push(acc);
    }
    let total = acc;
    let blocks = shots.div_ceil(SHOT_BLOCK);
    let per_block: Vec<BTreeMap<usize, u64>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let n = SHOT_BLOCK.min(shots - b * SHOT_BLOCK);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b);
            let mut local = BTreeMap::new();
            for _ in 0..n {
                let u: f64 = rng.random::<f64>() * total;
                let idx = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
                *local.entry(idx).or_insert(0u64) += 1;
            }
            local
        })
        .collect();
    let mut merged = BTreeMap::new();
    for block in per_block {
        for (k, c) in block {
            *merged.entry(k).or_insert(0) += c;
        }
    }
    Ok(ShotHistogram::from_values(width, &merged))
}

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Unitary {
    dim: usize,
    data: Vec<Complex64>,
}

impl Unitary {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    pub fn identity(dim: usize) -> Unitary {
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            data[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        Unitary { dim, data }
    }

    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Unitary {
        let dim = rows.len();
        Unitary {
            dim,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn mul(&self, other: &Unitary) -> Unitary {
        let n = self.dim;
        let mut data = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..n {
                    data[i * n + j] += a * other.get(k, j);
                }
            }
        }
        Unitary { dim: n, data }
    }

    pub fn adjoint(&self) -> Unitary {
        let n = self.dim;
        let mut data = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                data[j * n + i] = self.get(i, j).conj();
            }
        }
        Unitary { dim: n, data }
    }

    pub fn max_abs_diff(&self, other: &Unitary) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest entry-wise deviation after removing the best unit-modulus global phase.
    pub fn distance_up_to_phase(&self, other: &Unitary) -> f64 {
        if self.dim != other.dim {
            return f64::INFINITY;
        }
        let overlap: Complex64 = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum();
        if overlap.norm() == 0.0 {
            return f64::INFINITY;
        }
        let phase = overlap / overlap.norm();
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a * phase - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn equal_up_to_phase(&self, other: &Unitary, tol: f64) -> bool {
        self.distance_up_to_phase(other) <= tol
    }
}

/// Product of the circuit's gate matrices in application order; measurements ignored.
pub fn circuit_unitary(circuit: &Circuit) -> Result<Unitary> {
    let n = circuit.qubit_count();
    if n > MAX_UNITARY_QUBITS {
        return Err(SimError::UnitaryTooLarge(n));
    }
    let dim = 1usize << n;
    let columns: Vec<Vec<Complex64>> = (0..dim)
        .into_par_iter()
        .map(|j| {
            let mut amps = vec![Complex64::new(0.0, 0.0); dim];
            amps[j] = Complex64::new(1.0, 0.0);
            for g in circuit.ops() {
                g.apply_to(&mut amps);
            }
            amps
        })
        .collect();
    let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
    for (j, col) in columns.iter().enumerate() {
        for (i, a) in col.iter().enumerate() {
            data[i * dim + j] = *a;
        }
    }
    Ok(Unitary { dim, data })
}

/// Total variation distance between two distributions of equal length.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}
