//! Lowering to the native set {RX, RZ, CZ} and self-inverse pair cancellation.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use super::Result;
use crate::qsim::{Circuit, Gate};

pub fn is_native(g: &Gate) -> bool {
    matches!(g, Gate::Rx { .. } | Gate::Rz { .. } | Gate::Cz(..))
}

fn rz(theta: f64, qubit: usize) -> Gate {
    Gate::Rz { theta, qubit }
}

fn rx(theta: f64, qubit: usize) -> Gate {
    Gate::Rx { theta, qubit }
}

fn cx(control: usize, target: usize, out: &mut Vec<Gate>) {
    out.extend([Gate::H(target), Gate::Cz(control, target), Gate::H(target)]);
}

/// Doubly controlled Z from CX and ±π/4 Z rotations (Toffoli network without its Hadamards).
fn ccz(a: usize, b: usize, c: usize, out: &mut Vec<Gate>) {
    let t = FRAC_PI_4;
    cx(b, c, out);
    out.push(rz(-t, c));
    cx(a, c, out);
    out.push(rz(t, c));
    cx(b, c, out);
    out.push(rz(-t, c));
    cx(a, c, out);
    out.push(rz(t, b));
    out.push(rz(t, c));
    cx(a, b, out);
    out.push(rz(t, a));
    out.push(rz(-t, b));
    cx(a, b, out);
}

/// n-controlled Z as a phase polynomial: the product of n bits equals
/// `Σ_S (−1)^{|S|−1} parity(S) / 2^{n−1}` over nonempty subsets S.
fn mcz_phase_polynomial(qs: &[usize], out: &mut Vec<Gate>) {
    let n = qs.len();
    let unit = PI / (1u64 << (n - 1)) as f64;
    for mask in 1u64..(1 << n) {
        let members: Vec<usize> = (0..n)
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| qs[i])
            .collect();
        let (&target, rest) = members.split_last().unwrap();
        let sign = if members.len() % 2 == 1 { 1.0 } else { -1.0 };
        for &c in rest {
            cx(c, target, out);
        }
        out.push(rz(sign * unit, target));
        for &c in rest.iter().rev() {
            cx(c, target, out);
        }
    }
}

/// Rewrites every gate into H, CZ and Z rotations (plus X and Z kept as is).
fn expand(g: &Gate, out: &mut Vec<Gate>) {
    match g {
        Gate::Cx { control, target } => cx(*control, *target, out),
        Gate::Ccx { controls, target } => {
            out.push(Gate::H(*target));
            ccz(controls[0], controls[1], *target, out);
            out.push(Gate::H(*target));
        }
        Gate::Mcz(qs) if qs.len() == 2 => out.push(Gate::Cz(qs[0], qs[1])),
        Gate::Mcz(qs) if qs.len() == 3 => ccz(qs[0], qs[1], qs[2], out),
        Gate::Mcz(qs) => mcz_phase_polynomial(qs, out),
        other => out.push(other.clone()),
    }
}

fn lower(g: &Gate, out: &mut Vec<Gate>) {
    match g {
        Gate::X(q) => out.push(rx(PI, *q)),
        Gate::Z(q) => out.push(rz(PI, *q)),
        Gate::H(q) => out.extend([rz(FRAC_PI_2, *q), rx(FRAC_PI_2, *q), rz(FRAC_PI_2, *q)]),
        other => out.push(other.clone()),
    }
}

/// Merges runs of rotations about the same axis on one qubit and drops zero rotations.
fn merge_rotations(gates: Vec<Gate>) -> Vec<Gate> {
    let mut out: Vec<Gate> = Vec::with_capacity(gates.len());
    for g in gates {
        let q = g.qubits();
        let prev = out
            .iter()
            .rposition(|p| p.qubits().iter().any(|x| q.contains(x)));
        if let Some(i) = prev {
            let merged = match (&out[i], &g) {
                (Gate::Rz { theta: a, qubit }, Gate::Rz { theta: b, .. }) if q == [*qubit] => {
                    Some(rz(a + b, *qubit))
                }
                (Gate::Rx { theta: a, qubit }, Gate::Rx { theta: b, .. }) if q == [*qubit] => {
                    Some(rx(a + b, *qubit))
                }
                _ => None,
            };
            if let Some(m) = merged {
                out.remove(i);
                if m.angle().is_some_and(|t| t.abs() > 1e-12) {
                    out.push(m);
                }
                continue;
            }
        }
        out.push(g);
    }
    out
}

/// Equivalent circuit over {RX, RZ, CZ}, equal to the input up to a global phase.
///
/// X → RX(π); Z → RZ(π); H → RZ(π/2)·RX(π/2)·RZ(π/2); CX → H·CZ·H on the target;
/// CCX → H·CCZ·H with CCZ built from six CX and RZ(±π/4); larger MCZ via a phase polynomial.
pub fn transpile(circuit: &Circuit) -> Result<Circuit> {
    let mut expanded = Vec::new();
    for g in circuit.ops() {
        expand(g, &mut expanded);
    }
    let cancelled = cancel_pairs(expanded);
    let mut native = Vec::new();
    for g in &cancelled {
        lower(g, &mut native);
    }
    Ok(circuit.with_ops(merge_rotations(native))?)
}

fn cancel_pairs(gates: Vec<Gate>) -> Vec<Gate> {
    let mut out: Vec<Gate> = Vec::with_capacity(gates.len());
    for g in gates {
        let q = g.qubits();
        let prev = out
            .iter()
            .rposition(|p| p.qubits().iter().any(|x| q.contains(x)));
        if let Some(i) = prev {
            if g.is_self_inverse() && out[i].same_action(&g) {
                out.remove(i);
                continue;
            }
        }
        out.push(g);
    }
    out
}

/// Removes pairs of identical self-inverse gates with nothing in between on their qubits.
///
/// Pairs exposed by a removal are removed too, so the result is a fixpoint.
pub fn peephole_cancel(circuit: &Circuit) -> Result<Circuit> {
    Ok(circuit.with_ops(cancel_pairs(circuit.ops().to_vec()))?)
}
