//! Short-time Fourier transform with centered frames and reflect padding.
//!
//! Frame `t` is centered on sample `t * hop`, so a frame index converts to
//! time as `t * hop / sample_rate`. The same framing is shared by the
//! log-mel front-end and the onset strength function, which keeps their
//! frame grids aligned.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Periodic Hann window of length `n`.
pub fn hann(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 - 0.5 * (std::f64::consts::TAU * i as f64 / n as f64).cos())
        .collect()
}

/// Number of centered frames for a signal of `num_samples` with the given hop.
pub fn num_frames(num_samples: usize, hop: usize) -> usize {
    num_samples / hop + 1
}

/// Reflect-pad `signal` by `pad` samples on both sides (edge sample not
/// repeated): [a b c d] padded by 2 becomes [c b a b c d c b].
fn reflect_pad(signal: &[f64], pad: usize) -> Vec<f64> {
    let n = signal.len();
    debug_assert!(n >= 2, "reflect padding needs at least two samples");
    (-(pad as isize)..(n + pad) as isize)
        .map(|i| signal[mirror_index_signed(i, n)])
        .collect()
}

fn mirror_index_signed(i: isize, n: usize) -> usize {
    let period = 2 * (n as isize - 1);
    let mut m = i.rem_euclid(period);
    if m >= n as isize {
        m = period - m;
    }
    m as usize
}

/// Magnitude spectrogram: `frames x (window/2 + 1)` bins.
///
/// Errors if the signal is shorter than one window.
pub fn magnitude_spectrogram(
    signal: &[f64],
    window: usize,
    hop: usize,
) -> Result<Vec<Vec<f64>>> {
    if signal.len() < window {
        return Err(Error::Audio(format!(
            "signal of {} samples is shorter than one {}-sample window",
            signal.len(),
            window
        )));
    }
    let win = hann(window);
    let pad = window / 2;
    let padded = reflect_pad(signal, pad);
    let frames = num_frames(signal.len(), hop);
    let n_bins = window / 2 + 1;

    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(window);
    let mut out = Vec::with_capacity(frames);
    let mut buf = vec![Complex::new(0.0, 0.0); window];
    for t in 0..frames {
        let start = t * hop; // centered: padded index of (t*hop - pad) + pad
        for (i, slot) in buf.iter_mut().enumerate() {
            *slot = Complex::new(padded[start + i] * win[i], 0.0);
        }
        fft.process(&mut buf);
        out.push(buf[..n_bins].iter().map(|c| c.norm()).collect());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mirror_reflects_without_edge_repeat() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let padded = reflect_pad(&x, 2);
        assert_eq!(padded, vec![3.0, 2.0, 1.0, 2.0, 3.0, 4.0, 3.0, 2.0]);
    }

    #[test]
    fn frame_count_matches_centered_rule() {
        assert_eq!(num_frames(16000, 320), 51);
        assert_eq!(num_frames(320, 320), 2);
        assert_eq!(num_frames(319, 320), 1);
    }

    #[test]
    fn spectrogram_of_sine_peaks_at_right_bin() {
        let sr = 16000.0;
        let n = 16000;
        let freq = 1000.0;
        let signal: Vec<f64> = (0..n)
            .map(|i| (std::f64::consts::TAU * freq * i as f64 / sr).sin())
            .collect();
        let spec = magnitude_spectrogram(&signal, 2048, 320).unwrap();
        // Interior frame, away from padding effects.
        let frame = &spec[25];
        let peak_bin = frame
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        let expected = (freq / sr * 2048.0).round() as usize;
        assert!((peak_bin as isize - expected as isize).abs() <= 1);
    }

    #[test]
    fn too_short_signal_errors() {
        let signal = vec![0.0; 100];
        assert!(magnitude_spectrogram(&signal, 2048, 320).is_err());
    }
}
