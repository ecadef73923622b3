//! Acceptance criteria, one line per criterion. Runs without the libtest harness so
//! the lines always reach the console; exits nonzero if any criterion fails.

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qmind::boolexpr::{self, Clause, Cnf3Expression, Literal, Var};
use qmind::eeg;
use qmind::pipeline::{self, SessionConfig};
use qmind::qlc;
use qmind::qsim::{self, circuit_unitary, Gate, ShotHistogram, StateVector};
use qmind::sonify;

use common::*;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within_4_sigma(h: &ShotHistogram, probs: &[f64]) -> Result<(), String> {
    let n = h.shots as f64;
    for (i, &p) in probs.iter().enumerate() {
        let c = h.count(i) as f64;
        let sigma = (n * p * (1.0 - p)).sqrt();
        if (c - n * p).abs() > 4.0 * sigma + 1e-9 {
            return Err(format!(
                "outcome {i}: {c} vs expected {:.1} ± 4·{sigma:.1}",
                n * p
            ));
        }
    }
    Ok(())
}

fn running_example() -> Cnf3Expression {
    "(A|B)&(~B|~C)&(A|C)".parse().unwrap()
}

fn timed(limit: Duration, started: Instant) -> Result<(), String> {
    let t = started.elapsed();
    check(t < limit, format!("took {t:?}, limit {limit:?}"))
}

fn c1_truth_tables() -> Outcome {
    let start = Instant::now();
    let cx = Gate::Cx {
        control: 0,
        target: 1,
    };
    // Rows written as |q1 q0⟩ → |q1 q0⟩.
    for (input, output) in [(0b00, 0b00), (0b01, 0b11), (0b10, 0b10), (0b11, 0b01)] {
        let s = StateVector::basis(2, input)
            .unwrap()
            .apply_gate(&cx)
            .unwrap();
        check(
            s.probabilities()[output] == 1.0,
            format!("CX |{input:02b}⟩"),
        )?;
    }
    let ccx = Gate::Ccx {
        controls: [0, 1],
        target: 2,
    };
    for input in 0..8usize {
        let output = if input & 0b011 == 0b011 {
            input ^ 0b100
        } else {
            input
        };
        let s = StateVector::basis(3, input)
            .unwrap()
            .apply_gate(&ccx)
            .unwrap();
        check(
            s.probabilities()[output] == 1.0,
            format!("CCX |{input:03b}⟩"),
        )?;
    }
    timed(Duration::from_secs(1), start)?;
    Ok(format!(
        "4 CX rows and 8 CCX rows exact in {:?}",
        start.elapsed()
    ))
}

fn c2_superposition() -> Outcome {
    let s = StateVector::from_amplitudes(vec![
        Complex64::new(0.5, 0.0),
        Complex64::new(3f64.sqrt() / 2.0, 0.0),
    ])
    .unwrap();
    let p = s.probabilities();
    let err = (p[0] - 0.25).abs().max((p[1] - 0.75).abs());
    check(err <= f64::EPSILON, format!("probabilities {p:?}"))?;
    Ok(format!(
        "({}, {}), deviation {err:.1e} (f64 rounding of √3/2)",
        p[0], p[1]
    ))
}

fn c3_grover_k1() -> Outcome {
    let start = Instant::now();
    let c = qlc::compile_grover(&running_example(), 1).map_err(|e| e.to_string())?;
    let d = c.circuit.outcome_distribution().unwrap();
    let marked = [1usize, 3, 5];
    let mut worst = 0.0f64;
    for (i, &p) in d.iter().enumerate() {
        let want = if marked.contains(&i) {
            9.0 / 32.0
        } else {
            1.0 / 32.0
        };
        worst = worst.max((p - want).abs());
    }
    check(worst <= 1e-9, format!("exact deviation {worst:e}"))?;
    let ratio = d[0] / d[1];
    check(
        (ratio - 1.0 / 9.0).abs() < 1e-9,
        format!("outlier/marked ratio {ratio}"),
    )?;
    let h = qsim::run_circuit(&c.circuit, 5000, 2021).unwrap();
    within_4_sigma(&h, &d)?;
    timed(Duration::from_secs(1), start)?;
    Ok(format!(
        "exact max deviation {worst:.1e}; outlier/marked = {ratio:.4}; 5000 shots {:?} within 4σ; {:?}",
        h.dense_counts(),
        start.elapsed()
    ))
}

fn c4_repetitions() -> Outcome {
    let dist = |k| {
        qlc::compile_grover(&running_example(), k)
            .unwrap()
            .circuit
            .outcome_distribution()
            .unwrap()
    };
    let marked = |d: &[f64]| d[1] + d[3] + d[5];
    let d3 = dist(3);
    let worst_outlier = [0usize, 2, 4, 6, 7]
        .iter()
        .map(|&i| d3[i])
        .fold(0.0, f64::max);
    check(marked(&d3) >= 0.99, format!("k=3 marked {}", marked(&d3)))?;
    check(
        worst_outlier <= 0.002,
        format!("k=3 outlier {worst_outlier}"),
    )?;
    let d2 = dist(2);
    check(marked(&d2) <= 0.03, format!("k=2 marked {}", marked(&d2)))?;
    let mut worst = 0.0f64;
    for k in 1..=5 {
        let closed = qlc::grover_success(8, 3, k as u64).unwrap().probability;
        worst = worst.max((closed - marked(&dist(k))).abs());
    }
    check(worst <= 1e-9, format!("closed form deviation {worst:e}"))?;
    Ok(format!(
        "k=3 marked {:.4}, max outlier {worst_outlier:.5}; k=2 marked {:.4}; closed form agrees to {worst:.1e} for k=1..5",
        marked(&d3),
        marked(&d2)
    ))
}

fn c5_or_circuit() -> Outcome {
    let c = quil("or_into_q2.quil");
    let h = qsim::run_circuit(&c, 2048, 7).unwrap();
    let support: BTreeSet<usize> = h
        .dense_counts()
        .iter()
        .enumerate()
        .filter(|(_, &n)| n > 0)
        .map(|(i, _)| i)
        .collect();
    check(
        support == BTreeSet::from([0, 5, 6, 7]),
        format!("support {support:?}"),
    )?;
    let probs = [0.25, 0.0, 0.0, 0.0, 0.0, 0.25, 0.25, 0.25];
    within_4_sigma(&h, &probs)?;
    Ok(format!(
        "support {{000,101,110,111}}, counts {:?} within 4σ of 512",
        h.dense_counts()
    ))
}

fn c6_native_equivalence() -> Outcome {
    let text = data("or_into_q2_native.quil");
    let lines = text.lines().filter(|l| !l.trim().is_empty()).count();
    let native = qlc::parse_quil(&text).map_err(|e| e.to_string())?;
    let source = quil("or_into_q2.quil");
    // The source program measures q_i → ro[i]; the native one measures 7 → ro[0], 6 → ro[1], 5 → ro[2].
    let relabel: Vec<(usize, usize)> = native
        .measurements()
        .iter()
        .map(|m| (m.qubit, m.bit))
        .collect();
    check(
        relabel == vec![(5, 2), (6, 1), (7, 0)],
        format!("measurement map {relabel:?}"),
    )?;
    let tvd = qsim::total_variation(
        &source.outcome_distribution().unwrap(),
        &native.outcome_distribution().unwrap(),
    );
    check(tvd <= 1e-6, format!("TVD {tvd:e}"))?;
    let gates = native.ops().len();
    check(native.ops().iter().all(qlc::is_native), "non-native gate")?;
    let halts = text.lines().filter(|l| l.trim() == "HALT").count();
    check(lines == 39, format!("{lines} lines"))?;
    check(gates + halts == 35, format!("{gates} gates + {halts} HALT"))?;
    Ok(format!(
        "TVD {tvd:.1e}; {lines} lines = DECLARE + {gates} native gates + 3 MEASURE + HALT; {} native instructions counting HALT",
        gates + halts
    ))
}

fn c7_lapse_circuits() -> Outcome {
    let cases = [
        ("lapse1.quil", "(~C|B)&(C|A)&(~C|B)", vec![1u64, 3, 6, 7]),
        ("lapse2.quil", "(B|A)&(C|A)&(~A|~C)", vec![1, 3, 6]),
        ("lapse3.quil", "(~C|A)&(C|A)&(~B|~A)", vec![1, 5]),
        ("lapse4.quil", "(A|B)&(B|A)&(B|C)", vec![2, 3, 5, 6, 7]),
    ];
    let mut notes = Vec::new();
    for (file, expr, expected) in cases {
        let brute =
            boolexpr::satisfying_assignments(&boolexpr::parse(expr).unwrap(), &["A", "B", "C"])
                .unwrap();
        check(brute == expected, format!("{expr}: brute force {brute:?}"))?;
        let c = quil(file);
        let (marked, clean) = marked_set(&c);
        check(
            marked == brute,
            format!("{file}: marked {marked:?}, expected {brute:?}"),
        )?;
        check(
            (clean - 1.0).abs() < 1e-9,
            format!("{file}: ancillas clean with p={clean}"),
        )?;
        notes.push(format!("{file}→{marked:?}"));
    }
    let flat = quil("lapse1.quil").outcome_distribution().unwrap();
    let dev = flat.iter().map(|p| (p - 0.125).abs()).fold(0.0, f64::max);
    check(dev < 1e-9, format!("lapse 1 not uniform: {flat:?}"))?;
    Ok(format!(
        "{}; lapse 1 uniform to {dev:.1e}",
        notes.join(", ")
    ))
}

fn c8_qasm_goldens() -> Outcome {
    let emitted = qlc::emit_openqasm(&quil("or_into_q2.quil")).map_err(|e| e.to_string())?;
    let norm = |s: &str| s.split_whitespace().collect::<Vec<_>>().join(" ");
    check(
        norm(&emitted) == norm(&data("or_into_q2.qasm")),
        format!("emitted:\n{emitted}"),
    )?;
    let fig = or_and_circuit();
    let lowered = qlc::lower_for_qasm(&fig).map_err(|e| e.to_string())?;
    let qasm = qlc::emit_openqasm(&lowered).map_err(|e| e.to_string())?;
    let (marked, _) = marked_set(&fig);
    check(
        marked == vec![5, 6, 7],
        format!("OR-AND circuit marked {marked:?}"),
    )?;
    let reparsed = qlc::parse_openqasm(&qasm).map_err(|e| e.to_string())?;
    let tvd = qsim::total_variation(
        &fig.outcome_distribution().unwrap(),
        &reparsed.outcome_distribution().unwrap(),
    );
    check(
        tvd < 1e-12,
        format!("emitted OR-AND circuit differs, TVD {tvd}"),
    )?;
    Ok(format!(
        "OR circuit QASM matches modulo whitespace; OR-AND circuit marked {{101,110,111}}, emitted program TVD {tvd:.1e}"
    ))
}

fn c9_oracle_soundness() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for n in 0..500 {
        let e = random_cnf3(&mut rng);
        let brute = boolexpr::satisfying_assignments(&e.to_expression(), &["A", "B", "C"]).unwrap();
        let marked = qlc::oracle_marked_set(&e).map_err(|x| x.to_string())?;
        check(
            marked == brute,
            format!("#{n} {e}: {marked:?} vs {brute:?}"),
        )?;
        let mut s = StateVector::new(6).unwrap();
        s.apply_all(&[Gate::H(0), Gate::H(1), Gate::H(2)]).unwrap();
        s.apply_all(&qlc::compile_oracle(&e).unwrap()).unwrap();
        let p = s.subsystem_zero_probability(&[3, 4, 5]).unwrap();
        check(
            (p - 1.0).abs() <= 1e-9,
            format!("#{n} {e}: ancilla zero probability {p}"),
        )?;
    }
    timed(Duration::from_secs(30), start)?;
    Ok(format!(
        "500 random expressions sound, ancillas restored; {:?}",
        start.elapsed()
    ))
}

fn c10_transpiler() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst_t = 0.0f64;
    let mut worst_p = 0.0f64;
    for i in 0..100 {
        let c = random_circuit(&mut rng);
        let u = circuit_unitary(&c).unwrap();
        let t = qlc::transpile(&c).map_err(|e| e.to_string())?;
        check(
            t.ops().iter().all(qlc::is_native),
            format!("#{i}: non-native output"),
        )?;
        let p = qlc::peephole_cancel(&c).map_err(|e| e.to_string())?;
        worst_t = worst_t.max(u.distance_up_to_phase(&circuit_unitary(&t).unwrap()));
        worst_p = worst_p.max(u.distance_up_to_phase(&circuit_unitary(&p).unwrap()));
        check(
            worst_t <= 1e-9 && worst_p <= 1e-9,
            format!("#{i}: {worst_t:e} / {worst_p:e}"),
        )?;
    }
    Ok(format!(
        "100 random circuits; max distance up to phase: transpile {worst_t:.1e}, peephole {worst_p:.1e}"
    ))
}

fn c11_eeg() -> Outcome {
    let cases = [
        (lapse_recording_1(), "(~C | B) & (C | A) & (~C | B)"),
        (lapse_recording_4(), "(A | B) & (B | A) & (B | C)"),
    ];
    for (rec, want) in &cases {
        let (e, report) = eeg::build_expression(rec, 0.0, 1.0).map_err(|e| e.to_string())?;
        check(e.to_string() == *want, format!("got {e}, want {want}"))?;
        let again = eeg::build_expression(rec, 0.0, 1.0).unwrap();
        check(again.1 == report, "analysis not deterministic")?;
    }
    let worked = |fp1: f64| {
        let rec = table_recording(&[("Fp1", fp1, 30.0), ("O1", 23.61, 20.0)]);
        let (e, _) = eeg::build_expression(&rec, 0.0, 1.0).unwrap();
        e.clauses[0]
    };
    let ac = worked(33.18);
    check(
        ac == Clause([Literal::pos(Var::A), Literal::pos(Var::C)]),
        format!("{ac:?}"),
    )?;
    let nac = worked(10.36);
    check(
        nac == Clause([Literal::neg(Var::A), Literal::pos(Var::C)]),
        format!("{nac:?}"),
    )?;
    Ok("lapse 1 and 4 recordings reproduced; Fp1 33.18 Hz & O1 23.61 Hz → (A | C), Fp1 10.36 Hz → (~A | C)".into())
}

fn c12_sonify() -> Outcome {
    let c = qlc::compile_grover(&running_example(), 1).unwrap();
    let h = qsim::run_circuit(&c.circuit, 5000, 2021).unwrap();
    let bank = sonify::histogram_to_bank(&h, &sonify::DEFAULT_FREQS).map_err(|e| e.to_string())?;
    let audio =
        sonify::synthesize(&bank, &sonify::SoundSpec::default()).map_err(|e| e.to_string())?;
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sound.wav");
    sonify::write_wav(&audio, &path).map_err(|e| e.to_string())?;
    let bytes = std::fs::read(&path).unwrap();

    let n = 5 * 44_100u32;
    let mut header = Vec::new();
    header.extend(b"RIFF");
    header.extend((36 + 2 * n).to_le_bytes());
    header.extend(b"WAVEfmt ");
    header.extend([16, 0, 0, 0, 1, 0, 1, 0]);
    header.extend(44_100u32.to_le_bytes());
    header.extend(88_200u32.to_le_bytes());
    header.extend([2, 0, 16, 0]);
    header.extend(b"data");
    header.extend((2 * n).to_le_bytes());
    check(bytes[..44] == header[..], "header bytes differ")?;
    check(
        bytes.len() == 44 + 2 * n as usize,
        format!("file is {} bytes", bytes.len()),
    )?;

    let mut reader = hound::WavReader::open(&path).map_err(|e| e.to_string())?;
    let samples: Vec<f64> = reader
        .samples::<i16>()
        .map(|s| s.unwrap() as f64 / 32767.0)
        .collect();
    check(
        samples[0] == 0.0 && *samples.last().unwrap() == 0.0,
        "envelope endpoints not zero",
    )?;
    let decoded = sonify::AudioBuffer {
        samples,
        sample_rate: 44_100,
    };
    let measured = sonify::measure_partials(&decoded, &sonify::DEFAULT_FREQS);
    let counts = h.dense_counts();
    let top = *counts.iter().max().unwrap() as f64;
    let mut worst_amp = 0.0f64;
    let mut worst_pow = 0.0f64;
    for (m, &c) in measured.iter().zip(&counts) {
        let r = c as f64 / top;
        worst_amp = worst_amp.max((m / r - 1.0).abs());
        worst_pow = worst_pow.max((m * m / (r * r) - 1.0).abs());
    }
    check(
        worst_amp <= 0.05,
        format!("amplitude ratio error {worst_amp}"),
    )?;
    check(worst_pow <= 0.05, format!("power ratio error {worst_pow}"))?;
    Ok(format!(
        "amplitude ratios match count ratios to {:.2}%, power ratios match squared count ratios to {:.2}%; header exact; endpoints 0",
        worst_amp * 100.0,
        worst_pow * 100.0
    ))
}

fn c13_end_to_end() -> Outcome {
    let start = Instant::now();
    let rec = session_recording(10);
    let run = |dir: &std::path::Path| {
        let cfg = SessionConfig {
            seed: 77,
            output_dir: Some(dir.to_path_buf()),
            ..SessionConfig::default()
        };
        pipeline::run_session(&rec, &cfg)
    };
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ra = run(a.path()).map_err(|e| e.to_string())?;
    let rb = run(b.path()).map_err(|e| e.to_string())?;
    check(ra.lapses.len() == 10, format!("{} lapses", ra.lapses.len()))?;
    let mut files = 0;
    for (la, lb) in ra.lapses.iter().zip(&rb.lapses) {
        for (fa, fb) in la.files.iter().zip(&lb.files) {
            check(
                std::fs::read(fa).unwrap() == std::fs::read(fb).unwrap(),
                format!("{} differs", fa.display()),
            )?;
            files += 1;
        }
    }
    let wa = std::fs::read(a.path().join("session.wav")).unwrap();
    let wb = std::fs::read(b.path().join("session.wav")).unwrap();
    check(wa == wb, "session.wav differs")?;
    // session.json lists artifact paths, which name the output directory.
    let ja = std::fs::read_to_string(a.path().join("session.json"))
        .unwrap()
        .replace(&*a.path().to_string_lossy(), "OUT");
    let jb = std::fs::read_to_string(b.path().join("session.json"))
        .unwrap()
        .replace(&*b.path().to_string_lossy(), "OUT");
    check(ja == jb, "session.json differs beyond the output directory")?;
    files += 2;
    let exprs: BTreeSet<String> = ra
        .lapses
        .iter()
        .map(|l| l.report.expression.to_string())
        .collect();
    timed(Duration::from_secs(30), start)?;
    Ok(format!(
        "10 lapses ({} distinct expressions), {files} files byte-identical across runs; {:?}",
        exprs.len(),
        start.elapsed()
    ))
}

fn main() {
    let criteria: [Criterion; 13] = [
        ("gate truth tables", c1_truth_tables),
        ("superposition probabilities", c2_superposition),
        ("one-iteration Grover distribution", c3_grover_k1),
        ("Grover repetition behaviour", c4_repetitions),
        ("OR circuit sampling", c5_or_circuit),
        ("native program equivalence", c6_native_equivalence),
        ("session lapse circuits", c7_lapse_circuits),
        ("OpenQASM goldens", c8_qasm_goldens),
        ("oracle soundness", c9_oracle_soundness),
        ("transpiler equivalence", c10_transpiler),
        ("EEG expression construction", c11_eeg),
        ("sonification", c12_sonify),
        ("end-to-end session", c13_end_to_end),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
