//! Additive synthesis of measurement histograms and 16-bit PCM WAV output.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qsim::ShotHistogram;

/// Oscillator frequencies for the eight outcomes of a 3-bit register.
pub const DEFAULT_FREQS: [f64; 8] = [55.0, 164.81, 329.63, 440.00, 554.37, 659.26, 783.99, 880.00];
pub const DEFAULT_DURATION_S: f64 = 5.0;
pub const DEFAULT_SAMPLE_RATE: u32 = 44_100;
pub const PEAK_LEVEL: f64 = 0.9;
pub const MIN_SAMPLE_RATE: u32 = 8_000;

#[derive(Debug, Error)]
pub enum SonifyError {
    #[error("histogram has no shots")]
    NoShots,
    #[error("{outcomes} outcomes need {outcomes} frequencies, got {freqs}")]
    FrequencyCount { outcomes: usize, freqs: usize },
    #[error("{freq} Hz aliases at a sample rate of {rate} Hz")]
    Aliasing { freq: f64, rate: u32 },
    #[error("sample rate {0} Hz is below {MIN_SAMPLE_RATE} Hz")]
    SampleRate(u32),
    #[error("duration must be positive, got {0} s")]
    Duration(f64),
    #[error("cannot join buffers with sample rates {0} and {1}")]
    RateMismatch(u32, u32),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, SonifyError>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Oscillator {
    pub freq_hz: f64,
    pub amplitude: f64,
}

/// One oscillator per register outcome, outcome `i` driving oscillator `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscillatorBank {
    pub oscillators: Vec<Oscillator>,
}

/// Amplitude of oscillator `i` is `count_i / shots`.
pub fn histogram_to_bank(h: &ShotHistogram, freqs: &[f64]) -> Result<OscillatorBank> {
    if h.shots == 0 {
        return Err(SonifyError::NoShots);
    }
    let counts = h.dense_counts();
    if counts.len() != freqs.len() {
        return Err(SonifyError::FrequencyCount {
            outcomes: counts.len(),
            freqs: freqs.len(),
        });
    }
    let oscillators = counts
        .iter()
        .zip(freqs)
        .map(|(&c, &f)| Oscillator {
            freq_hz: f,
            amplitude: c as f64 / h.shots as f64,
        })
        .collect();
    Ok(OscillatorBank { oscillators })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SoundSpec {
    pub duration_s: f64,
    pub sample_rate: u32,
}

impl Default for SoundSpec {
    fn default() -> Self {
        SoundSpec {
            duration_s: DEFAULT_DURATION_S,
            sample_rate: DEFAULT_SAMPLE_RATE,
        }
    }
}

impl SoundSpec {
    pub fn validate(&self) -> Result<()> {
        if self.sample_rate < MIN_SAMPLE_RATE {
            return Err(SonifyError::SampleRate(self.sample_rate));
        }
        if !self.duration_s.is_finite() || self.duration_s <= 0.0 {
            return Err(SonifyError::Duration(self.duration_s));
        }
        Ok(())
    }
}

/// Mono samples in [−1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
}

impl AudioBuffer {
    pub fn concat(buffers: &[AudioBuffer]) -> Result<AudioBuffer> {
        let rate = buffers
            .first()
            .map_or(DEFAULT_SAMPLE_RATE, |b| b.sample_rate);
        let mut samples = Vec::new();
        for b in buffers {
            if b.sample_rate != rate {
                return Err(SonifyError::RateMismatch(rate, b.sample_rate));
            }
            samples.extend_from_slice(&b.samples);
        }
        Ok(AudioBuffer {
            samples,
            sample_rate: rate,
        })
    }

    pub fn peak(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, s| m.max(s.abs()))
    }
}

/// Symmetric Hann window whose first and last values are exactly zero.
pub fn hann_symmetric(n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![0.0; n];
    }
    let mut w: Vec<f64> = (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / (n - 1) as f64).cos())
        .collect();
    w[0] = 0.0;
    w[n - 1] = 0.0;
    w
}

/// `s(t) = w(t)·g·Σ aᵢ sin(2π fᵢ t)` with a Hann envelope over the whole sound and
/// `g` chosen so the loudest sample is [`PEAK_LEVEL`]. An all-zero bank is silence.
pub fn synthesize(bank: &OscillatorBank, spec: &SoundSpec) -> Result<AudioBuffer> {
    spec.validate()?;
    let rate = spec.sample_rate as f64;
    for o in &bank.oscillators {
        if o.freq_hz < 0.0 || o.freq_hz >= rate / 2.0 {
            return Err(SonifyError::Aliasing {
                freq: o.freq_hz,
                rate: spec.sample_rate,
            });
        }
    }
    let n = (spec.duration_s * rate).round() as usize;
    let w = hann_symmetric(n);
    let mut samples: Vec<f64> = (0..n)
        .map(|i| {
            let t = i as f64 / rate;
            let s: f64 = bank
                .oscillators
                .iter()
                .filter(|o| o.amplitude != 0.0)
                .map(|o| o.amplitude * (2.0 * PI * o.freq_hz * t).sin())
                .sum();
            w[i] * s
        })
        .collect();
    let peak = samples.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    if peak > 0.0 {
        let g = PEAK_LEVEL / peak;
        for s in &mut samples {
            *s *= g;
        }
    }
    Ok(AudioBuffer {
        samples,
        sample_rate: spec.sample_rate,
    })
}

fn pcm16(x: f64) -> i16 {
    (x.clamp(-1.0, 1.0) * 32767.0).round() as i16
}

/// RIFF/WAVE bytes: PCM, 16-bit little-endian, mono.
pub fn wav_bytes(buffer: &AudioBuffer) -> Vec<u8> {
    let data_len = (buffer.samples.len() * 2) as u32;
    let mut out = Vec::with_capacity(44 + data_len as usize);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&buffer.sample_rate.to_le_bytes());
    out.extend_from_slice(&(buffer.sample_rate * 2).to_le_bytes());
    out.extend_from_slice(&2u16.to_le_bytes());
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_len.to_le_bytes());
    for &s in &buffer.samples {
        out.extend_from_slice(&pcm16(s).to_le_bytes());
    }
    out
}

pub fn write_wav(buffer: &AudioBuffer, path: &Path) -> Result<()> {
    let io = |source| SonifyError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut f = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
    f.write_all(&wav_bytes(buffer)).map_err(io)?;
    f.flush().map_err(io)
}

/// Magnitude of the Hann-windowed DFT of `buffer` at each frequency, scaled so the
/// largest is 1. Silence gives zeros.
pub fn measure_partials(buffer: &AudioBuffer, freqs: &[f64]) -> Vec<f64> {
    let n = buffer.samples.len();
    let w = hann_symmetric(n);
    let rate = buffer.sample_rate as f64;
    let mags: Vec<f64> = freqs
        .iter()
        .map(|&f| {
            let step = 2.0 * PI * f / rate;
            let (mut re, mut im) = (0.0, 0.0);
            for (i, (&x, &wi)) in buffer.samples.iter().zip(&w).enumerate() {
                let ang = step * i as f64;
                re += x * wi * ang.cos();
                im -= x * wi * ang.sin();
            }
            (re * re + im * im).sqrt()
        })
        .collect();
    let top = mags.iter().cloned().fold(0.0, f64::max);
    if top == 0.0 {
        return vec![0.0; freqs.len()];
    }
    mags.iter().map(|m| m / top).collect()
}
