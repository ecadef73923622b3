//! Session loop: EEG window → expression → Grover circuit → shots → sound, per lapse.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eeg::{self, AnalysisReport, EegRecording};
use crate::qlc::{self, CompiledCircuit};
use crate::qsim::{self, ShotHistogram};
use crate::sonify::{self, AudioBuffer, SoundSpec};

/// Environment variable naming the default output directory of the command line tool.
pub const OUT_DIR_ENV: &str = "QMIND_OUT_DIR";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("recording lasts {recording} s, shorter than one {window} s window")]
    RecordingTooShort { recording: f64, window: f64 },
    #[error("lapse {index}: {source}")]
    Lapse {
        index: usize,
        #[source]
        source: Box<crate::Error>,
    },
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, PipelineError>;

fn default_window() -> f64 {
    eeg::DEFAULT_WINDOW_S
}
fn default_k() -> usize {
    1
}
fn default_shots() -> u64 {
    5000
}
fn default_freqs() -> Vec<f64> {
    sonify::DEFAULT_FREQS.to_vec()
}
fn default_sound_duration() -> f64 {
    sonify::DEFAULT_DURATION_S
}
fn default_rate() -> u32 {
    sonify::DEFAULT_SAMPLE_RATE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionConfig {
    #[serde(default = "default_window")]
    pub window_s: f64,
    /// Defaults to the window length (back-to-back lapses).
    #[serde(default)]
    pub hop_s: Option<f64>,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_shots")]
    pub shots: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_freqs")]
    pub freqs: Vec<f64>,
    #[serde(default = "default_sound_duration")]
    pub sound_duration_s: f64,
    #[serde(default = "default_rate")]
    pub sample_rate: u32,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Skip failing lapses instead of aborting the session.
    #[serde(default)]
    pub continue_on_error: bool,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig {
            window_s: default_window(),
            hop_s: None,
            k: default_k(),
            shots: default_shots(),
            seed: 0,
            freqs: default_freqs(),
            sound_duration_s: default_sound_duration(),
            sample_rate: default_rate(),
            output_dir: None,
            continue_on_error: false,
        }
    }
}

impl SessionConfig {
    pub fn hop(&self) -> f64 {
        self.hop_s.unwrap_or(self.window_s)
    }

    pub fn sound_spec(&self) -> SoundSpec {
        SoundSpec {
            duration_s: self.sound_duration_s,
            sample_rate: self.sample_rate,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(PipelineError::Config(m));
        if self.window_s.is_nan() || self.window_s < eeg::MIN_WINDOW_S {
            return bad(format!("window_s must be at least {} s", eeg::MIN_WINDOW_S));
        }
        if self.hop().is_nan() || self.hop() <= 0.0 {
            return bad("hop_s must be positive".into());
        }
        if self.k == 0 {
            return bad("k must be at least 1".into());
        }
        if self.shots == 0 {
            return bad("shots must be at least 1".into());
        }
        if self.freqs.len() != 8 {
            return bad(format!(
                "8 oscillator frequencies required, got {}",
                self.freqs.len()
            ));
        }
        self.sound_spec()
            .validate()
            .map_err(|e| PipelineError::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LapseResult {
    pub index: usize,
    pub t_start_s: f64,
    pub seed: u64,
    pub report: AnalysisReport,
    #[serde(skip)]
    pub compiled: CompiledCircuit,
    pub histogram: ShotHistogram,
    #[serde(skip)]
    pub audio: AudioBuffer,
    pub files: Vec<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LapseFailure {
    pub index: usize,
    pub t_start_s: f64,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SessionResult {
    pub lapses: Vec<LapseResult>,
    pub failures: Vec<LapseFailure>,
    pub session_wav: Option<PathBuf>,
}

/// Start times of the lapses that fit in `duration` seconds.
pub fn lapse_starts(duration: f64, window: f64, hop: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut i = 0usize;
    loop {
        let t = i as f64 * hop;
        if t + window > duration + 1e-9 {
            break;
        }
        out.push(t);
        i += 1;
    }
    out
}

fn process_lapse(
    rec: &EegRecording,
    cfg: &SessionConfig,
    index: usize,
    t: f64,
) -> std::result::Result<LapseResult, crate::Error> {
    let (expr, report) = eeg::build_expression(rec, t, cfg.window_s)?;
    let compiled = qlc::compile_grover(&expr, cfg.k)?;
    let seed = cfg.seed.wrapping_add(index as u64);
    let histogram = qsim::run_circuit(&compiled.circuit, cfg.shots, seed)?;
    let bank = sonify::histogram_to_bank(&histogram, &cfg.freqs)?;
    let audio = sonify::synthesize(&bank, &cfg.sound_spec())?;
    Ok(LapseResult {
        index,
        t_start_s: t,
        seed,
        report,
        compiled,
        histogram,
        audio,
        files: Vec::new(),
    })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|source| PipelineError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn write_lapse(dir: &Path, lapse: &mut LapseResult) -> Result<()> {
    let sub = dir.join(format!("lapse_{:03}", lapse.index));
    std::fs::create_dir_all(&sub).map_err(|source| PipelineError::Io {
        path: sub.display().to_string(),
        source,
    })?;
    let lapse_err = |e: crate::Error| PipelineError::Lapse {
        index: lapse.index,
        source: Box::new(e),
    };
    let quil = qlc::emit_quil(&lapse.compiled.circuit).map_err(|e| lapse_err(e.into()))?;
    let files = [
        ("report.json", to_json(&lapse.report)),
        ("circuit.quil", quil.into_bytes()),
        ("histogram.json", to_json(&lapse.histogram)),
        ("histogram.csv", lapse.histogram.to_csv().into_bytes()),
        ("sound.wav", sonify::wav_bytes(&lapse.audio)),
    ];
    for (name, bytes) in files {
        let p = sub.join(name);
        write_file(&p, &bytes)?;
        lapse.files.push(p);
    }
    Ok(())
}

pub(crate) fn to_json<T: Serialize>(v: &T) -> Vec<u8> {
    let mut s = serde_json::to_vec_pretty(v).expect("serialisable value");
    s.push(b'\n');
    s
}

/// Runs every lapse of the recording. Lapse `i` samples with seed `seed + i`.
///
/// Lapses are computed in parallel and returned, and written, in order. When
/// `output_dir` is set each lapse gets a `lapse_NNN` directory and the lapse
/// sounds are joined into `session.wav`.
pub fn run_session(rec: &EegRecording, cfg: &SessionConfig) -> Result<SessionResult> {
    cfg.validate()?;
    let starts = lapse_starts(rec.duration(), cfg.window_s, cfg.hop());
    if starts.is_empty() {
        return Err(PipelineError::RecordingTooShort {
            recording: rec.duration(),
            window: cfg.window_s,
        });
    }
    let outcomes: Vec<_> = starts
        .par_iter()
        .enumerate()
        .map(|(i, &t)| (i, t, process_lapse(rec, cfg, i, t)))
        .collect();

    let mut lapses = Vec::new();
    let mut failures = Vec::new();
    for (index, t, outcome) in outcomes {
        match outcome {
            Ok(l) => lapses.push(l),
            Err(e) if cfg.continue_on_error => failures.push(LapseFailure {
                index,
                t_start_s: t,
                error: e.to_string(),
            }),
            Err(e) => {
                return Err(PipelineError::Lapse {
                    index,
                    source: Box::new(e),
                })
            }
        }
    }

    let mut session_wav = None;
    if let Some(dir) = &cfg.output_dir {
        std::fs::create_dir_all(dir).map_err(|source| PipelineError::Io {
            path: dir.display().to_string(),
            source,
        })?;
        for l in &mut lapses {
            write_lapse(dir, l)?;
        }
        let joined: Vec<AudioBuffer> = lapses.iter().map(|l| l.audio.clone()).collect();
        let audio =
            AudioBuffer::concat(&joined).map_err(|e| PipelineError::Config(e.to_string()))?;
        let p = dir.join("session.wav");
        write_file(&p, &sonify::wav_bytes(&audio))?;
        session_wav = Some(p);
        let result = SessionResult {
            lapses: lapses.clone(),
            failures: failures.clone(),
            session_wav: session_wav.clone(),
        };
        write_file(&dir.join("session.json"), &to_json(&result))?;
        return Ok(result);
    }
    Ok(SessionResult {
        lapses,
        failures,
        session_wav,
    })
}
