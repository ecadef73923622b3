#![allow(dead_code)]

use std::path::PathBuf;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use qmind::boolexpr::{Clause, Cnf3Expression, Literal, Var};
use qmind::eeg::{self, ChannelSpec, EegRecording, SynthSpec, CLAUSE_ELECTRODES};
use qmind::qlc;
use qmind::qsim::{Circuit, Gate, StateVector};

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

pub fn data(name: &str) -> String {
    std::fs::read_to_string(data_path(name)).unwrap()
}

pub fn quil(name: &str) -> Circuit {
    qlc::parse_quil(&data(name)).unwrap()
}

/// Nine-channel recording, 2 s at 250 Hz. Listed electrodes get one (freq, amplitude)
/// tone; the rest a weak 5 Hz tone. Light seeded noise on every channel.
pub fn table_recording(tones: &[(&str, f64, f64)]) -> EegRecording {
    let channels = CLAUSE_ELECTRODES
        .iter()
        .flatten()
        .map(|&label| {
            let (f, a) = tones
                .iter()
                .find(|(l, _, _)| *l == label)
                .map_or((5.0, 5.0), |&(_, f, a)| (f, a));
            ChannelSpec {
                label: label.into(),
                components: vec![(f, a)],
            }
        })
        .collect();
    eeg::synth_eeg(&SynthSpec {
        channels,
        noise_uv: 0.5,
        seed: 11,
        duration_s: 2.0,
        sample_rate: 250.0,
    })
    .unwrap()
}

/// Strongest electrode of each clause at 30 μV, runner-up at 20 μV.
pub fn lapse_recording_1() -> EegRecording {
    table_recording(&[
        ("O1", 13.1649, 30.0),
        ("T3", 24.7721, 20.0),
        ("Oz", 31.1541, 30.0),
        ("Fz", 31.5992, 20.0),
        ("O2", 8.22338, 30.0),
        ("T4", 27.0611, 20.0),
    ])
}

pub fn lapse_recording_2() -> EegRecording {
    table_recording(&[
        ("T3", 20.6042, 30.0),
        ("Fp1", 21.2267, 20.0),
        ("Oz", 18.7471, 30.0),
        ("Fz", 32.5744, 20.0),
        ("Fp2", 8.0119, 30.0),
        ("O2", 10.3202, 20.0),
    ])
}

pub fn lapse_recording_3() -> EegRecording {
    table_recording(&[
        ("O1", 13.7849, 30.0),
        ("Fp1", 23.9491, 20.0),
        ("Oz", 17.5519, 30.0),
        ("Fz", 18.6791, 20.0),
        ("T4", 12.6194, 30.0),
        ("Fp2", 13.1322, 20.0),
    ])
}

pub fn lapse_recording_4() -> EegRecording {
    table_recording(&[
        ("Fp1", 15.0409, 30.0),
        ("T3", 18.6357, 20.0),
        ("Cz", 30.1681, 30.0),
        ("Fz", 32.1824, 20.0),
        ("T4", 18.4086, 30.0),
        ("O2", 19.1024, 20.0),
    ])
}

/// Recording whose lapse `i` (1 s each) carries different tones per electrode.
pub fn session_recording(lapses: usize) -> EegRecording {
    let rate = 250.0;
    let labels: Vec<String> = CLAUSE_ELECTRODES
        .iter()
        .flatten()
        .map(|s| s.to_string())
        .collect();
    let per = rate as usize;
    let channels = (0..9)
        .map(|j| {
            (0..lapses * per)
                .map(|n| {
                    let i = n / per;
                    let f = 5.0 + ((i * 7 + j * 3) % 30) as f64;
                    let a = 5.0 + ((i * 5 + j * 11) % 17) as f64;
                    a * (2.0 * std::f64::consts::PI * f * n as f64 / rate).sin()
                })
                .collect()
        })
        .collect();
    EegRecording::new(labels, rate, channels).unwrap()
}

/// Variable states whose sign the oracle flipped, recovered from a one-iteration
/// Grover circuit by undoing its final diffusion (which is its own inverse).
/// Also returns the probability that all ancillas are back at zero.
pub fn marked_set(circuit: &Circuit) -> (Vec<u64>, f64) {
    let mut s: StateVector = circuit.final_state().unwrap();
    let ancillas: Vec<usize> = (3..circuit.qubit_count()).collect();
    let clean = s.subsystem_zero_probability(&ancillas).unwrap();
    s.apply_all(&qlc::diffusion(3).unwrap()).unwrap();
    let marked = s.amplitudes()[..8]
        .iter()
        .enumerate()
        .filter(|(_, a)| a.re < -1e-9)
        .map(|(i, _)| i as u64)
        .collect();
    (marked, clean)
}

/// ((A ∨ B) ∧ C) with one clause ancilla and a CZ for the conjunction.
pub fn or_and_circuit() -> Circuit {
    let mut c = Circuit::new(4, 3).unwrap();
    let clause = [
        Gate::X(0),
        Gate::X(1),
        Gate::Ccx {
            controls: [0, 1],
            target: 3,
        },
        Gate::X(0),
        Gate::X(1),
        Gate::X(3),
    ];
    c.extend([Gate::H(0), Gate::H(1), Gate::H(2)]).unwrap();
    c.extend(clause.iter().cloned()).unwrap();
    c.push(Gate::Cz(3, 2)).unwrap();
    c.extend(clause.iter().rev().cloned()).unwrap();
    c.extend(qlc::diffusion(3).unwrap()).unwrap();
    for q in 0..3 {
        c.measure(q, q).unwrap();
    }
    c
}

pub fn random_cnf3(rng: &mut ChaCha8Rng) -> Cnf3Expression {
    let clause = |rng: &mut ChaCha8Rng| {
        let a = Var::ALL[rng.random_range(0..3)];
        let b = loop {
            let v = Var::ALL[rng.random_range(0..3)];
            if v != a {
                break v;
            }
        };
        Clause([
            Literal {
                var: a,
                negated: rng.random(),
            },
            Literal {
                var: b,
                negated: rng.random(),
            },
        ])
    };
    Cnf3Expression {
        clauses: [clause(rng), clause(rng), clause(rng)],
    }
}

/// Up to 16 gates of every kind on 1 to 4 qubits.
pub fn random_circuit(rng: &mut ChaCha8Rng) -> Circuit {
    let n = rng.random_range(1..=4usize);
    let mut c = Circuit::new(n, 0).unwrap();
    let len = rng.random_range(1..=16);
    for _ in 0..len {
        let mut qs: Vec<usize> = (0..n).collect();
        for i in (1..qs.len()).rev() {
            qs.swap(i, rng.random_range(0..=i));
        }
        let angle = rng.random_range(-6.3..6.3);
        let choice = rng.random_range(0..9);
        let g = match choice {
            0 => Gate::X(qs[0]),
            1 => Gate::H(qs[0]),
            2 => Gate::Z(qs[0]),
            3 => Gate::Rx {
                theta: angle,
                qubit: qs[0],
            },
            4 => Gate::Rz {
                theta: angle,
                qubit: qs[0],
            },
            5 if n >= 2 => Gate::Cx {
                control: qs[0],
                target: qs[1],
            },
            6 if n >= 2 => Gate::Cz(qs[0], qs[1]),
            7 if n >= 3 => Gate::Ccx {
                controls: [qs[0], qs[1]],
                target: qs[2],
            },
            8 if n >= 2 => {
                let k = rng.random_range(2..=n);
                Gate::Mcz(qs[..k].to_vec())
            }
            _ => Gate::H(qs[0]),
        };
        c.push(g).unwrap();
    }
    c
}
