//! EEG recordings, windowed spectra, rhythm bands and expression construction.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::boolexpr::{Clause, Cnf3Expression, Expression, Literal, Var};

/// Highest frequency kept in a spectrum.
pub const SPECTRUM_CEILING_HZ: f64 = 40.0;
/// Literals are positive at or above this dominant frequency.
pub const BETA_THRESHOLD_HZ: f64 = 15.0;
pub const MIN_WINDOW_S: f64 = 0.5;
pub const DEFAULT_WINDOW_S: f64 = 1.0;
pub const MIN_SAMPLE_RATE: f64 = 80.0;

/// Electrodes feeding each clause, in A, B, C column order.
pub const CLAUSE_ELECTRODES: [[&str; 3]; 3] =
    [["Fp1", "T3", "O1"], ["Fz", "Cz", "Oz"], ["Fp2", "T4", "O2"]];

#[derive(Debug, Error)]
pub enum EegError {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("header must start with `time`")]
    MissingTimeColumn,
    #[error("row {row}, column {column}: `{value}` is not a number")]
    NotNumeric {
        row: usize,
        column: String,
        value: String,
    },
    #[error("row {row} has {got} fields, expected {expected}")]
    RaggedRow {
        row: usize,
        got: usize,
        expected: usize,
    },
    #[error("required electrode {0} is missing")]
    MissingElectrode(String),
    #[error("channel label {0} appears twice")]
    DuplicateLabel(String),
    #[error("channel {0} not found")]
    UnknownChannel(String),
    #[error("timestep at row {row} deviates from the mean step by {deviation:.2}%")]
    NonUniformTimestep { row: usize, deviation: f64 },
    #[error("recording needs at least 2 samples")]
    TooShort,
    #[error("sample rate {0} Hz is not above {MIN_SAMPLE_RATE} Hz")]
    SampleRate(f64),
    #[error("channels have unequal lengths")]
    UnequalChannels,
    #[error("window of {0} s is shorter than {MIN_WINDOW_S} s")]
    WindowTooShort(f64),
    #[error("window [{start}, {end}) s lies outside a {length} s recording")]
    WindowOutOfBounds { start: f64, end: f64, length: f64 },
    #[error("negative frequency {0} Hz")]
    NegativeFrequency(f64),
    #[error("frequency {0} Hz is at or above the {SPECTRUM_CEILING_HZ} Hz ceiling")]
    OutOfBand(f64),
    #[error("clause {0}: fewer than two electrodes carry signal in this window")]
    DegenerateWindow(usize),
    #[error("component at {freq} Hz aliases at a sample rate of {rate} Hz")]
    Aliasing { freq: f64, rate: f64 },
    #[error("rhythm electrode {0} is not in the electrode subset")]
    ElectrodeOutsideSubset(String),
    #[error("empty electrode subset or rhythm list")]
    EmptySnapshot,
}

pub type Result<T> = std::result::Result<T, EegError>;

/// Multi-channel recording in microvolts.
#[derive(Debug, Clone, PartialEq)]
pub struct EegRecording {
    labels: Vec<String>,
    sample_rate: f64,
    channels: Vec<Vec<f64>>,
}

impl EegRecording {
    pub fn new(labels: Vec<String>, sample_rate: f64, channels: Vec<Vec<f64>>) -> Result<Self> {
        if sample_rate <= MIN_SAMPLE_RATE || !sample_rate.is_finite() {
            return Err(EegError::SampleRate(sample_rate));
        }
        if labels.len() != channels.len() {
            return Err(EegError::UnequalChannels);
        }
        let mut seen = BTreeSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(EegError::DuplicateLabel(l.clone()));
            }
        }
        if let Some(first) = channels.first() {
            if channels.iter().any(|c| c.len() != first.len()) {
                return Err(EegError::UnequalChannels);
            }
        }
        Ok(EegRecording {
            labels,
            sample_rate,
            channels,
        })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.channels.first().map_or(0, |c| c.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn duration(&self) -> f64 {
        self.len() as f64 / self.sample_rate
    }

    pub fn channel(&self, label: &str) -> Result<&[f64]> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(|i| self.channels[i].as_slice())
            .ok_or_else(|| EegError::UnknownChannel(label.to_string()))
    }

    pub fn require_clause_electrodes(&self) -> Result<()> {
        for e in CLAUSE_ELECTRODES.iter().flatten() {
            if !self.labels.iter().any(|l| l == e) {
                return Err(EegError::MissingElectrode(e.to_string()));
            }
        }
        Ok(())
    }

    /// Sample range `[start, start + n)` covered by a window.
    fn window_range(&self, t_start: f64, duration: f64) -> Result<(usize, usize)> {
        if duration < MIN_WINDOW_S - 1e-12 || !duration.is_finite() {
            return Err(EegError::WindowTooShort(duration));
        }
        let start = (t_start * self.sample_rate).round();
        let n = (duration * self.sample_rate).round() as usize;
        if t_start < 0.0 || start as usize + n > self.len() {
            return Err(EegError::WindowOutOfBounds {
                start: t_start,
                end: t_start + duration,
                length: self.duration(),
            });
        }
        Ok((start as usize, n))
    }

    /// Writes the `time,<label>,…` layout accepted by [`read_csv`].
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let io = |source| EegError::Io {
            path: path.display().to_string(),
            source,
        };
        let mut w = csv::Writer::from_path(path)?;
        let mut header = vec!["time".to_string()];
        header.extend(self.labels.iter().cloned());
        w.write_record(&header)?;
        for i in 0..self.len() {
            let mut row = vec![format!("{}", i as f64 / self.sample_rate)];
            row.extend(self.channels.iter().map(|c| format!("{}", c[i])));
            w.write_record(&row)?;
        }
        w.flush().map_err(io)
    }
}

/// Reads a `time,<label>,…` CSV with a uniform timestep (1% tolerance).
///
/// The nine clause electrodes must be present.
pub fn read_csv(path: &Path) -> Result<EegRecording> {
    let file = std::fs::File::open(path).map_err(|source| EegError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_csv(file)
}

pub fn parse_csv(input: impl std::io::Read) -> Result<EegRecording> {
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(String::from).collect();
    if header.first().map(|h| h.to_ascii_lowercase()) != Some("time".into()) {
        return Err(EegError::MissingTimeColumn);
    }
    let labels: Vec<String> = header[1..].to_vec();
    let mut times = Vec::new();
    let mut channels = vec![Vec::new(); labels.len()];
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let row = i + 2;
        if rec.len() != header.len() {
            return Err(EegError::RaggedRow {
                row,
                got: rec.len(),
                expected: header.len(),
            });
        }
        for (j, cell) in rec.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| EegError::NotNumeric {
                row,
                column: header[j].clone(),
                value: cell.to_string(),
            })?;
            if !v.is_finite() {
                return Err(EegError::NotNumeric {
                    row,
                    column: header[j].clone(),
                    value: cell.to_string(),
                });
            }
            if j == 0 {
                times.push(v);
            } else {
                channels[j - 1].push(v);
            }
        }
    }
    if times.len() < 2 {
        return Err(EegError::TooShort);
    }
    let step = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    for (i, w) in times.windows(2).enumerate() {
        let deviation = ((w[1] - w[0]) - step).abs() / step.abs() * 100.0;
        if deviation.is_nan() || deviation > 1.0 {
            return Err(EegError::NonUniformTimestep {
                row: i + 3,
                deviation,
            });
        }
    }
    let rec = EegRecording::new(labels, 1.0 / step, channels)?;
    rec.require_clause_electrodes()?;
    Ok(rec)
}

/// One-sided power spectrum of a window, bins up to [`SPECTRUM_CEILING_HZ`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub freqs: Vec<f64>,
    pub power: Vec<f64>,
}

impl Spectrum {
    /// Center of the strongest non-DC bin; the lower bin wins a tie. `None` if all zero.
    pub fn dominant_frequency(&self) -> Option<f64> {
        let mut best: Option<(usize, f64)> = None;
        for (i, &p) in self.power.iter().enumerate().skip(1) {
            if p > 0.0 && best.is_none_or(|(_, b)| p > b) {
                best = Some((i, p));
            }
        }
        best.map(|(i, _)| self.freqs[i])
    }

    pub fn total_power(&self) -> f64 {
        self.power.iter().sum()
    }
}

/// Periodic Hann window of length `n`.
pub fn hann_periodic(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / n as f64).cos())
        .collect()
}

/// Hann-windowed power spectrum of `samples` at `rate`.
///
/// Bin k has power `c·|X_k|²/N²` with c = 2 except at DC and Nyquist, so the bins
/// sum to the mean square of the windowed segment.
pub fn spectrum_of(samples: &[f64], rate: f64) -> Spectrum {
    let n = samples.len();
    let w = hann_periodic(n);
    let mut buf: Vec<Complex64> = samples
        .iter()
        .zip(&w)
        .map(|(x, w)| Complex64::new(x * w, 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let resolution = rate / n as f64;
    let mut freqs = Vec::new();
    let mut power = Vec::new();
    for (k, x) in buf.iter().enumerate().take(n / 2 + 1) {
        let f = k as f64 * resolution;
        if f > SPECTRUM_CEILING_HZ + 1e-9 {
            break;
        }
        let c = if k == 0 || 2 * k == n { 1.0 } else { 2.0 };
        freqs.push(f);
        power.push(c * x.norm_sqr() / (n * n) as f64);
    }
    Spectrum { freqs, power }
}

pub fn power_spectrum(
    rec: &EegRecording,
    channel: &str,
    t_start: f64,
    duration: f64,
) -> Result<Spectrum> {
    let (start, n) = rec.window_range(t_start, duration)?;
    let data = rec.channel(channel)?;
    Ok(spectrum_of(&data[start..start + n], rec.sample_rate))
}

pub fn rms(samples: &[f64]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    (samples.iter().map(|x| x * x).sum::<f64>() / samples.len() as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Band {
    Delta,
    Theta,
    Alpha,
    Beta,
}

impl Band {
    pub fn name(self) -> &'static str {
        match self {
            Band::Delta => "delta",
            Band::Theta => "theta",
            Band::Alpha => "alpha",
            Band::Beta => "beta",
        }
    }
}

impl fmt::Display for Band {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Band with left-closed boundaries at 4, 8, 15 and 40 Hz.
pub fn band_of(freq: f64) -> Result<Band> {
    if freq < 0.0 || freq.is_nan() {
        return Err(EegError::NegativeFrequency(freq));
    }
    Ok(match freq {
        f if f < 4.0 => Band::Delta,
        f if f < 8.0 => Band::Theta,
        f if f < 15.0 => Band::Alpha,
        f if f < SPECTRUM_CEILING_HZ => Band::Beta,
        f => return Err(EegError::OutOfBand(f)),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermReport {
    pub electrode: String,
    pub variable: Var,
    pub frequency_hz: f64,
    pub band: Option<Band>,
    pub rms_uv: f64,
    pub positive: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClauseReport {
    pub clause: usize,
    pub terms: [TermReport; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub t_start_s: f64,
    pub duration_s: f64,
    pub expression: Cnf3Expression,
    pub clauses: Vec<ClauseReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// Clause from one row of electrodes: the two with highest RMS, strongest first.
///
/// Each literal is positive iff its electrode's dominant frequency is at least 15 Hz.
/// A dominant frequency at or above the spectrum ceiling forces a negative literal
/// and adds a warning.
pub fn build_clause(
    rec: &EegRecording,
    t_start: f64,
    duration: f64,
    clause_index: usize,
    row: &[&str; 3],
    warnings: &mut Vec<String>,
) -> Result<(Clause, ClauseReport)> {
    let (start, n) = rec.window_range(t_start, duration)?;
    let mut ranked = Vec::with_capacity(3);
    for (col, e) in row.iter().enumerate() {
        let data = rec.channel(e)?;
        ranked.push((col, rms(&data[start..start + n])));
    }
    // Stable sort keeps column order among equal amplitudes.
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
    if ranked[1].1 == 0.0 {
        return Err(EegError::DegenerateWindow(clause_index));
    }
    let mut terms = Vec::with_capacity(2);
    for &(col, amp) in &ranked[..2] {
        let electrode = row[col];
        let spec = power_spectrum(rec, electrode, t_start, duration)?;
        let freq = spec
            .dominant_frequency()
            .ok_or(EegError::DegenerateWindow(clause_index))?;
        let band = match band_of(freq) {
            Ok(b) => Some(b),
            Err(EegError::OutOfBand(_)) => {
                warnings.push(format!(
                    "clause {clause_index}: {electrode} peaks at {freq} Hz, above the band ceiling; literal set negative"
                ));
                None
            }
            Err(e) => return Err(e),
        };
        let positive = band.is_some() && freq >= BETA_THRESHOLD_HZ;
        terms.push(TermReport {
            electrode: electrode.to_string(),
            variable: Var::ALL[col],
            frequency_hz: freq,
            band,
            rms_uv: amp,
            positive,
        });
    }
    let lit = |t: &TermReport| Literal {
        var: t.variable,
        negated: !t.positive,
    };
    let clause = Clause([lit(&terms[0]), lit(&terms[1])]);
    let report = ClauseReport {
        clause: clause_index,
        terms: [terms[0].clone(), terms[1].clone()],
    };
    Ok((clause, report))
}

pub fn build_expression(
    rec: &EegRecording,
    t_start: f64,
    duration: f64,
) -> Result<(Cnf3Expression, AnalysisReport)> {
    rec.require_clause_electrodes()?;
    let mut warnings = Vec::new();
    let mut clauses = Vec::with_capacity(3);
    let mut reports = Vec::with_capacity(3);
    for (i, row) in CLAUSE_ELECTRODES.iter().enumerate() {
        let (c, r) = build_clause(rec, t_start, duration, i + 1, row, &mut warnings)?;
        clauses.push(c);
        reports.push(r);
    }
    let expression = Cnf3Expression {
        clauses: [clauses[0], clauses[1], clauses[2]],
    };
    Ok((
        expression,
        AnalysisReport {
            t_start_s: t_start,
            duration_s: duration,
            expression,
            clauses: reports,
            warnings,
        },
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    pub label: String,
    /// (frequency Hz, amplitude μV) pairs.
    pub components: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSpec {
    pub channels: Vec<ChannelSpec>,
    /// Half-width of the uniform noise, μV.
    #[serde(default)]
    pub noise_uv: f64,
    #[serde(default)]
    pub seed: u64,
    pub duration_s: f64,
    pub sample_rate: f64,
}

/// Sum of sinusoids per channel plus seeded uniform noise.
pub fn synth_eeg(spec: &SynthSpec) -> Result<EegRecording> {
    let n = (spec.duration_s * spec.sample_rate).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut channels = Vec::with_capacity(spec.channels.len());
    for ch in &spec.channels {
        for &(freq, _) in &ch.components {
            if freq < 0.0 || freq >= spec.sample_rate / 2.0 {
                return Err(EegError::Aliasing {
                    freq,
                    rate: spec.sample_rate,
                });
            }
        }
        let data = (0..n)
            .map(|i| {
                let t = i as f64 / spec.sample_rate;
                let clean: f64 = ch
                    .components
                    .iter()
                    .map(|&(f, a)| a * (2.0 * std::f64::consts::PI * f * t).sin())
                    .sum();
                let noise = if spec.noise_uv > 0.0 {
                    rng.random_range(-spec.noise_uv..=spec.noise_uv)
                } else {
                    0.0
                };
                clean + noise
            })
            .collect();
        channels.push(data);
    }
    let labels = spec.channels.iter().map(|c| c.label.clone()).collect();
    EegRecording::new(labels, spec.sample_rate, channels)
}

/// Snapshot of which electrode carries each rhythm most strongly.
///
/// Each `(rhythm, electrode)` pair becomes a conjunction over `electrodes` with that
/// electrode positive and the rest negated, on variables named `rhythm.electrode`.
/// Rhythm terms are joined by conjunction, or by disjunction when `disjunction` is set.
pub fn encode_rhythm_snapshot(
    prominent: &[(&str, &str)],
    electrodes: &[&str],
    disjunction: bool,
) -> Result<Expression> {
    if prominent.is_empty() || electrodes.is_empty() {
        return Err(EegError::EmptySnapshot);
    }
    let mut terms = Vec::with_capacity(prominent.len());
    for &(rhythm, hot) in prominent {
        if !electrodes.contains(&hot) {
            return Err(EegError::ElectrodeOutsideSubset(hot.to_string()));
        }
        let lits = electrodes.iter().map(|&e| {
            let v = Expression::var(format!("{rhythm}.{e}"));
            if e == hot {
                v
            } else {
                Expression::not(v)
            }
        });
        terms.push(Expression::and(lits));
    }
    Ok(if disjunction {
        Expression::or(terms)
    } else {
        Expression::and(terms)
    })
}
