use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qmind::boolexpr::Cnf3Expression;
use qmind::eeg::{self, SynthSpec};
use qmind::pipeline::{self, SessionConfig, OUT_DIR_ENV};
use qmind::qlc;
use qmind::qsim::{self, Circuit, ShotHistogram};
use qmind::sonify::{self, SoundSpec};

#[derive(Parser)]
#[command(name = "qmind", version, about = "EEG to Grover circuits to sound")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Emit {
    Quil,
    Qasm,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Build the expression for one window of an EEG recording.
    Analyze {
        eeg: PathBuf,
        /// Window start, seconds.
        #[arg(long, default_value_t = 0.0)]
        t: f64,
        /// Window length, seconds.
        #[arg(long, default_value_t = eeg::DEFAULT_WINDOW_S)]
        window: f64,
        /// Print only the expression text.
        #[arg(long)]
        expression_only: bool,
    },
    /// Compile a three-clause expression into a Grover circuit.
    Compile {
        expression: String,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, value_enum, default_value_t = Emit::Quil)]
        emit: Emit,
        /// Lower to RX, RZ and CZ.
        #[arg(long)]
        transpile: bool,
        /// Remove adjacent self-inverse gate pairs.
        #[arg(long)]
        peephole: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Sample a circuit given as JSON, Quil or OpenQASM.
    Simulate {
        circuit: PathBuf,
        #[arg(long, default_value_t = 5000)]
        shots: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the decimal-outcome CSV here.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Render a histogram as a WAV file.
    Sonify {
        histogram: PathBuf,
        /// Comma-separated oscillator frequencies, one per outcome.
        #[arg(long, value_delimiter = ',')]
        freqs: Option<Vec<f64>>,
        #[arg(long, default_value_t = sonify::DEFAULT_DURATION_S)]
        duration: f64,
        #[arg(long, default_value_t = sonify::DEFAULT_SAMPLE_RATE)]
        rate: u32,
        #[arg(short, long, default_value = "sound.wav")]
        output: PathBuf,
    },
    /// Run the whole loop over every window of a recording.
    Run {
        eeg: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory; overrides the config file.
        #[arg(long, env = OUT_DIR_ENV, default_value = "qmind-out")]
        out: PathBuf,
    },
    /// Parse a Quil or OpenQASM program and print the circuit as JSON.
    Parse { program: PathBuf },
    /// Generate a synthetic recording from a JSON channel description.
    Synth {
        spec: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Debug)]
struct Failure {
    kind: &'static str,
    message: String,
}

impl<E: Into<qmind::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        let e = e.into();
        Failure {
            kind: e.kind(),
            message: e.to_string(),
        }
    }
}

fn fail(kind: &'static str, message: impl Into<String>) -> Failure {
    Failure {
        kind,
        message: message.into(),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| fail("io", format!("{}: {e}", path.display())))
}

fn write_out(path: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    match path {
        Some(p) => {
            std::fs::write(p, bytes).map_err(|e| fail("io", format!("{}: {e}", p.display())))
        }
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| fail("io", e.to_string())),
    }
}

fn json<T: Serialize>(v: &T) -> Vec<u8> {
    let mut s = serde_json::to_vec_pretty(v).expect("serialisable value");
    s.push(b'\n');
    s
}

fn load_circuit(path: &Path) -> Result<Circuit, Failure> {
    let text = read(path)?;
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    let trimmed = text.trim_start();
    if ext == "json" || trimmed.starts_with('{') {
        return serde_json::from_str(&text).map_err(|e| fail("parse", e.to_string()));
    }
    let looks_qasm = ext == "qasm"
        || trimmed.starts_with("OPENQASM")
        || trimmed.starts_with("qreg")
        || trimmed.starts_with("include");
    if looks_qasm {
        Ok(qlc::parse_openqasm(&text)?)
    } else {
        Ok(qlc::parse_quil(&text)?)
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Analyze {
            eeg: path,
            t,
            window,
            expression_only,
        } => {
            let rec = eeg::read_csv(&path)?;
            let (expr, report) = eeg::build_expression(&rec, t, window)?;
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            if expression_only {
                write_out(None, format!("{expr}\n").as_bytes())
            } else {
                write_out(None, &json(&report))
            }
        }
        Command::Compile {
            expression,
            k,
            emit,
            transpile,
            peephole,
            output,
        } => {
            let expr: Cnf3Expression = expression.parse()?;
            let mut circuit = qlc::compile_grover(&expr, k)?.circuit;
            if peephole {
                circuit = qlc::peephole_cancel(&circuit)?;
            }
            if transpile {
                circuit = qlc::transpile(&circuit)?;
            }
            let bytes = match emit {
                Emit::Quil => qlc::emit_quil(&circuit)?.into_bytes(),
                Emit::Qasm => qlc::emit_openqasm(&qlc::lower_for_qasm(&circuit)?)?.into_bytes(),
                Emit::Json => json(&circuit),
            };
            write_out(output.as_deref(), &bytes)
        }
        Command::Simulate {
            circuit,
            shots,
            seed,
            csv,
            output,
        } => {
            let c = load_circuit(&circuit)?;
            let h = qsim::run_circuit(&c, shots, seed)?;
            if let Some(p) = csv {
                write_out(Some(&p), h.to_csv().as_bytes())?;
            }
            write_out(output.as_deref(), &json(&h))
        }
        Command::Sonify {
            histogram,
            freqs,
            duration,
            rate,
            output,
        } => {
            let h: ShotHistogram = serde_json::from_str(&read(&histogram)?)
                .map_err(|e| fail("parse", e.to_string()))?;
            h.validate()?;
            let freqs = freqs.unwrap_or_else(|| sonify::DEFAULT_FREQS.to_vec());
            let bank = sonify::histogram_to_bank(&h, &freqs)?;
            let spec = SoundSpec {
                duration_s: duration,
                sample_rate: rate,
            };
            let audio = sonify::synthesize(&bank, &spec)?;
            sonify::write_wav(&audio, &output)?;
            Ok(())
        }
        Command::Run {
            eeg: path,
            config,
            out,
        } => {
            let mut cfg: SessionConfig = match config {
                Some(p) => {
                    serde_json::from_str(&read(&p)?).map_err(|e| fail("config", e.to_string()))?
                }
                None => SessionConfig::default(),
            };
            cfg.output_dir = Some(out);
            let rec = eeg::read_csv(&path)?;
            let result = pipeline::run_session(&rec, &cfg)?;
            for f in &result.failures {
                eprintln!("warning: lapse {} failed: {}", f.index, f.error);
            }
            let summary: Vec<_> = result
                .lapses
                .iter()
                .map(|l| {
                    serde_json::json!({
                        "lapse": l.index,
                        "t_start_s": l.t_start_s,
                        "expression": l.report.expression.to_string(),
                    })
                })
                .collect();
            write_out(None, &json(&summary))
        }
        Command::Parse { program } => {
            let c = load_circuit(&program)?;
            write_out(None, &json(&c))
        }
        Command::Synth { spec, output } => {
            let spec: SynthSpec =
                serde_json::from_str(&read(&spec)?).map_err(|e| fail("config", e.to_string()))?;
            let rec = eeg::synth_eeg(&spec)?;
            rec.write_csv(&output)?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let line = serde_json::json!({ "error": f.kind, "message": f.message });
            eprintln!("{line}");
            ExitCode::FAILURE
        }
    }
}
