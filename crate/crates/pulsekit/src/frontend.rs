//! Audio front-end: WAV decoding, resampling to 16 kHz, and normalized
//! log-mel features on a 20 ms frame grid.
//!
//! Conventions (documented because the choices matter downstream):
//! - mel scale is HTK (`2595 * log10(1 + f/700)`), fmin 0, fmax Nyquist;
//! - frames are centered with reflect padding, so frame `t` sits at
//!   `t * hop` samples and the frame count is `floor(n / hop) + 1`;
//! - compression is `ln(1 + p)` on mel power, which is finite at silence;
//! - the resampler is a 64-tap Kaiser-windowed sinc (beta 8.6).

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::stft;
use crate::tensor::Tensor;

pub const TARGET_SAMPLE_RATE: u32 = 16_000;
pub const FRAME_RATE: f64 = 50.0;

/// Mono audio at a known sample rate, samples in [-1, 1].
#[derive(Debug, Clone)]
pub struct AudioClip {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
}

impl AudioClip {
    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }
}

#[derive(Debug, Clone)]
pub struct FrontEndConfig {
    pub n_mels: usize,
    pub window: usize,
    pub hop: usize,
    pub sample_rate: u32,
    pub fmin: f64,
    pub fmax: f64,
}

impl Default for FrontEndConfig {
    fn default() -> Self {
        FrontEndConfig {
            n_mels: 128,
            window: 2048,
            hop: 320,
            sample_rate: TARGET_SAMPLE_RATE,
            fmin: 0.0,
            fmax: TARGET_SAMPLE_RATE as f64 / 2.0,
        }
    }
}

impl FrontEndConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window < self.hop {
            return Err(Error::Config("window must be >= hop".into()));
        }
        if self.hop == 0 || self.n_mels == 0 {
            return Err(Error::Config("hop and n_mels must be positive".into()));
        }
        if !(self.fmin >= 0.0 && self.fmax > self.fmin) {
            return Err(Error::Config("need 0 <= fmin < fmax".into()));
        }
        Ok(())
    }

    pub fn frame_rate(&self) -> f64 {
        self.sample_rate as f64 / self.hop as f64
    }
}

/// Log-mel feature frames, `T x n_mels`, at 50 fps.
#[derive(Debug, Clone)]
pub struct LogMelFrames {
    pub frames: Tensor,
    pub frame_rate: f64,
    pub clip_id: String,
}

impl LogMelFrames {
    pub fn num_frames(&self) -> usize {
        self.frames.rows()
    }
}

/// Per-bin normalization statistics fitted on a training corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct NormStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl NormStats {
    /// Identity stats (mean 0, std 1) for the given bin count.
    pub fn identity(n_bins: usize) -> Self {
        NormStats {
            mean: vec![0.0; n_bins],
            std: vec![1.0; n_bins],
        }
    }
}

// ---------------------------------------------------------------------------
// WAV loading
// ---------------------------------------------------------------------------

/// Load a PCM WAV file, average channels to mono, and resample to 16 kHz.
pub fn load_audio(path: &Path) -> Result<AudioClip> {
    let reader = hound::WavReader::open(path)
        .map_err(|e| Error::Wav(format!("{}: {}", path.display(), e)))?;
    let spec = reader.spec();
    let channels = spec.channels as usize;
    if channels == 0 {
        return Err(Error::Wav(format!("{}: zero channels", path.display())));
    }

    let interleaved: Vec<f64> = match spec.sample_format {
        hound::SampleFormat::Float => {
            if spec.bits_per_sample != 32 {
                return Err(Error::Wav(format!(
                    "{}: unsupported float width {}",
                    path.display(),
                    spec.bits_per_sample
                )));
            }
            reader
                .into_samples::<f32>()
                .map(|s| s.map(|v| v as f64))
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Wav(format!("{}: {}", path.display(), e)))?
        }
        hound::SampleFormat::Int => {
            let bits = spec.bits_per_sample;
            if !matches!(bits, 8 | 16 | 24 | 32) {
                return Err(Error::Wav(format!(
                    "{}: unsupported integer width {}",
                    path.display(),
                    bits
                )));
            }
            let scale = (1u64 << (bits - 1)) as f64;
            reader
                .into_samples::<i32>()
                .map(|s| s.map(|v| v as f64 / scale))
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Wav(format!("{}: {}", path.display(), e)))?
        }
    };

    if interleaved.is_empty() {
        return Err(Error::Audio(format!("{}: zero-length audio", path.display())));
    }
    if !interleaved.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite(format!("samples of {}", path.display())));
    }

    let n_frames = interleaved.len() / channels;
    let mut mono = Vec::with_capacity(n_frames);
    for f in 0..n_frames {
        let mut acc = 0.0;
        for c in 0..channels {
            acc += interleaved[f * channels + c];
        }
        mono.push(acc / channels as f64);
    }

    let samples = if spec.sample_rate == TARGET_SAMPLE_RATE {
        mono
    } else {
        resample(&mono, spec.sample_rate, TARGET_SAMPLE_RATE)
    };
    let samples = samples
        .into_iter()
        .map(|v| v.clamp(-1.0, 1.0))
        .collect();

    Ok(AudioClip {
        samples,
        sample_rate: TARGET_SAMPLE_RATE,
    })
}

/// Write a mono clip as 16-bit PCM WAV.
pub fn write_wav(path: &Path, clip: &AudioClip) -> Result<()> {
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: clip.sample_rate,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut writer = hound::WavWriter::create(path, spec)
        .map_err(|e| Error::Wav(format!("{}: {}", path.display(), e)))?;
    for &s in &clip.samples {
        let v = (s.clamp(-1.0, 1.0) * 32767.0).round() as i16;
        writer
            .write_sample(v)
            .map_err(|e| Error::Wav(format!("{}: {}", path.display(), e)))?;
    }
    writer
        .finalize()
        .map_err(|e| Error::Wav(format!("{}: {}", path.display(), e)))?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Resampling
// ---------------------------------------------------------------------------

const RESAMPLE_TAPS: usize = 64;
const KAISER_BETA: f64 = 8.6;

/// Modified Bessel function of the first kind, order zero (power series).
fn bessel_i0(x: f64) -> f64 {
    let mut sum = 1.0;
    let mut term = 1.0;
    let half_x = x / 2.0;
    let mut k = 1.0;
    loop {
        term *= (half_x / k) * (half_x / k);
        sum += term;
        if term < sum * 1e-16 {
            return sum;
        }
        k += 1.0;
    }
}

fn kaiser(x: f64, beta: f64) -> f64 {
    if x.abs() > 1.0 {
        return 0.0;
    }
    bessel_i0(beta * (1.0 - x * x).sqrt()) / bessel_i0(beta)
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let px = std::f64::consts::PI * x;
        px.sin() / px
    }
}

/// Windowed-sinc resampling. Anti-aliases on downsampling by lowering the
/// sinc cutoff to the output Nyquist.
pub fn resample(input: &[f64], from_rate: u32, to_rate: u32) -> Vec<f64> {
    assert!(from_rate > 0 && to_rate > 0);
    if from_rate == to_rate || input.is_empty() {
        return input.to_vec();
    }
    let ratio = to_rate as f64 / from_rate as f64;
    // Cutoff in cycles per input sample.
    let cutoff = 0.5 * ratio.min(1.0);
    let half = RESAMPLE_TAPS as f64 / 2.0;
    let out_len = (input.len() as f64 * ratio).round() as usize;
    let mut out = Vec::with_capacity(out_len);
    for n in 0..out_len {
        let t = n as f64 / ratio;
        let j0 = t.floor() as isize - RESAMPLE_TAPS as isize / 2 + 1;
        let mut acc = 0.0;
        let mut ksum = 0.0;
        for j in j0..j0 + RESAMPLE_TAPS as isize {
            let x = t - j as f64;
            let k = 2.0 * cutoff * sinc(2.0 * cutoff * x) * kaiser(x / half, KAISER_BETA);
            ksum += k;
            if j >= 0 && (j as usize) < input.len() {
                acc += input[j as usize] * k;
            }
        }
        // Normalizing by the kernel sum keeps DC gain exactly 1.
        out.push(if ksum != 0.0 { acc / ksum } else { 0.0 });
    }
    out
}

// ---------------------------------------------------------------------------
// Mel filterbank and log-mel features
// ---------------------------------------------------------------------------

pub fn hz_to_mel(f: f64) -> f64 {
    2595.0 * (1.0 + f / 700.0).log10()
}

pub fn mel_to_hz(m: f64) -> f64 {
    700.0 * (10f64.powf(m / 2595.0) - 1.0)
}

/// Triangular HTK mel filterbank, `n_mels x (window/2 + 1)`, peak gain 1.
pub fn mel_filterbank(cfg: &FrontEndConfig) -> Tensor {
    let n_bins = cfg.window / 2 + 1;
    let mel_lo = hz_to_mel(cfg.fmin);
    let mel_hi = hz_to_mel(cfg.fmax);
    // n_mels + 2 boundary points, uniformly spaced on the mel axis.
    let edges: Vec<f64> = (0..cfg.n_mels + 2)
        .map(|i| mel_to_hz(mel_lo + (mel_hi - mel_lo) * i as f64 / (cfg.n_mels + 1) as f64))
        .collect();
    let bin_hz: Vec<f64> = (0..n_bins)
        .map(|k| k as f64 * cfg.sample_rate as f64 / cfg.window as f64)
        .collect();
    let mut fb = Tensor::zeros(cfg.n_mels, n_bins);
    for m in 0..cfg.n_mels {
        let (lo, center, hi) = (edges[m], edges[m + 1], edges[m + 2]);
        for (k, &f) in bin_hz.iter().enumerate() {
            let v = if f <= lo || f >= hi {
                0.0
            } else if f <= center {
                (f - lo) / (center - lo)
            } else {
                (hi - f) / (hi - center)
            };
            if v > 0.0 {
                fb.set(m, k, v);
            }
        }
    }
    fb
}

/// Log-mel features: magnitude STFT -> power -> mel projection -> ln(1 + x).
pub fn log_mel(clip: &AudioClip, cfg: &FrontEndConfig, clip_id: &str) -> Result<LogMelFrames> {
    cfg.validate()?;
    if clip.sample_rate != cfg.sample_rate {
        return Err(Error::Audio(format!(
            "clip at {} Hz, config expects {} Hz",
            clip.sample_rate, cfg.sample_rate
        )));
    }
    let spec = stft::magnitude_spectrogram(&clip.samples, cfg.window, cfg.hop)?;
    let fb = mel_filterbank(cfg);
    let n_bins = cfg.window / 2 + 1;
    let t_frames = spec.len();
    let mut frames = Tensor::zeros(t_frames, cfg.n_mels);
    for (t, mag) in spec.iter().enumerate() {
        let row = frames.row_mut(t);
        for m in 0..cfg.n_mels {
            let fb_row = &fb.data()[m * n_bins..(m + 1) * n_bins];
            let mut acc = 0.0;
            for (w, &v) in fb_row.iter().zip(mag.iter()) {
                if *w != 0.0 {
                    acc += w * v * v;
                }
            }
            row[m] = (1.0 + acc).ln();
        }
    }
    if !frames.is_finite() {
        return Err(Error::NonFinite(format!("log-mel frames of {clip_id}")));
    }
    Ok(LogMelFrames {
        frames,
        frame_rate: cfg.frame_rate(),
        clip_id: clip_id.to_string(),
    })
}

/// Fit per-bin mean and standard deviation over a corpus (population std,
/// fixed accumulation order). Zero-variance bins fall back to std 1.
pub fn fit_norm(corpus: &[LogMelFrames]) -> Result<NormStats> {
    let first = corpus
        .first()
        .ok_or_else(|| Error::Config("empty corpus for fit_norm".into()))?;
    let n_bins = first.frames.cols();
    let mut sum = vec![0.0; n_bins];
    let mut count = 0usize;
    for lm in corpus {
        for t in 0..lm.frames.rows() {
            for (s, &v) in sum.iter_mut().zip(lm.frames.row(t)) {
                *s += v;
            }
        }
        count += lm.frames.rows();
    }
    let mean: Vec<f64> = sum.iter().map(|s| s / count as f64).collect();
    let mut sq = vec![0.0; n_bins];
    for lm in corpus {
        for t in 0..lm.frames.rows() {
            for ((q, &v), &mu) in sq.iter_mut().zip(lm.frames.row(t)).zip(mean.iter()) {
                *q += (v - mu) * (v - mu);
            }
        }
    }
    let std: Vec<f64> = sq
        .iter()
        .enumerate()
        .map(|(i, q)| {
            let s = (q / count as f64).sqrt();
            if s <= 1e-12 {
                log::warn!("zero-variance mel bin {i}; using std 1");
                1.0
            } else {
                s
            }
        })
        .collect();
    Ok(NormStats { mean, std })
}

/// Apply `(x - mean) / std` per bin.
pub fn apply_norm(frames: &LogMelFrames, stats: &NormStats) -> Result<LogMelFrames> {
    let n_bins = frames.frames.cols();
    if stats.mean.len() != n_bins || stats.std.len() != n_bins {
        return Err(Error::Shape(format!(
            "norm stats have {} bins, frames have {}",
            stats.mean.len(),
            n_bins
        )));
    }
    if !stats.std.iter().all(|&s| s > 0.0) {
        return Err(Error::Config("norm std must be positive".into()));
    }
    let mut out = frames.frames.clone();
    for t in 0..out.rows() {
        let row = out.row_mut(t);
        for ((v, &mu), &sd) in row.iter_mut().zip(stats.mean.iter()).zip(stats.std.iter()) {
            *v = (*v - mu) / sd;
        }
    }
    Ok(LogMelFrames {
        frames: out,
        frame_rate: frames.frame_rate,
        clip_id: frames.clip_id.clone(),
    })
}

/// CSV export: header `frame,bin_0,...`, one row per frame, `%.6f` values.
pub fn write_frames_csv(frames: &LogMelFrames, mut w: impl Write) -> Result<()> {
    write!(w, "frame")?;
    for b in 0..frames.frames.cols() {
        write!(w, ",bin_{b}")?;
    }
    writeln!(w)?;
    for t in 0..frames.frames.rows() {
        write!(w, "{t}")?;
        for &v in frames.frames.row(t) {
            write!(w, ",{v:.6}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}
