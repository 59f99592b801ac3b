//! WSOLA time-scale modification with pitch shifting by resampling.

use std::f64::consts::TAU;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::WarpError;
use crate::audio_io::resample_ratio;
use crate::buffer::AudioBuffer;

pub const MIN_RATIO: f64 = 0.125;
pub const MAX_RATIO: f64 = 8.0;

/// Reference rate for the nominal window and search sizes.
const REFERENCE_RATE: f64 = 44_100.0;
const REFERENCE_WINDOW: f64 = 2048.0;
const REFERENCE_SEARCH: f64 = 512.0;
/// A candidate must beat the current best NCC by this much to replace it.
const NCC_EPSILON: f64 = 1e-9;
const SILENCE: f64 = 1e-12;

/// Window length, synthesis hop and alignment search radius in frames.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StretchGeometry {
    pub window: usize,
    pub hop: usize,
    pub search: usize,
}

impl StretchGeometry {
    /// 2048 / 1024 / 512 at 44.1 kHz, scaled proportionally elsewhere.
    pub fn for_rate(sample_rate: f64) -> Self {
        let scale = sample_rate / REFERENCE_RATE;
        let half = ((REFERENCE_WINDOW / 2.0) * scale).round().max(8.0) as usize;
        Self {
            window: 2 * half,
            hop: half,
            search: (REFERENCE_SEARCH * scale).round().max(1.0) as usize,
        }
    }
}

fn check_ratio(name: &'static str, value: f64) -> Result<(), WarpError> {
    if value.is_finite() && (MIN_RATIO..=MAX_RATIO).contains(&value) {
        Ok(())
    } else {
        Err(WarpError::RatioOutOfRange { name, value })
    }
}

/// Change duration by `time_ratio` and frequency content by `pitch_ratio`.
///
/// The input is first resampled by `1 / pitch_ratio` and the result is then
/// time-scaled to exactly `round(frames * time_ratio)` frames.
pub fn stretch(input: &AudioBuffer, time_ratio: f64, pitch_ratio: f64) -> Result<AudioBuffer, WarpError> {
    check_ratio("time_ratio", time_ratio)?;
    check_ratio("pitch_ratio", pitch_ratio)?;
    let out_len = (input.frames() as f64 * time_ratio).round() as usize;
    let shifted = resample_ratio(input, 1.0 / pitch_ratio);
    Ok(stretch_to_length(&shifted, out_len))
}

/// Time-scale `input` to exactly `out_len` frames without changing pitch.
pub fn stretch_to_length(input: &AudioBuffer, out_len: usize) -> AudioBuffer {
    let geometry = StretchGeometry::for_rate(input.sample_rate());
    let mut wsola = Wsola::new(geometry);
    let channels = wsola.run(input.channels(), 0.0, input.frames() as f64, out_len);
    AudioBuffer::from_channels(channels, input.sample_rate()).expect("stretched channels share length")
}

/// Reusable WSOLA state: window, FFT plans and scratch buffers.
pub(crate) struct Wsola {
    geometry: StretchGeometry,
    window: Vec<f64>,
    fft_len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    region: Vec<Complex<f64>>,
    template: Vec<Complex<f64>>,
    scratch: Vec<Complex<f64>>,
    energy: Vec<f64>,
}

impl Wsola {
    pub(crate) fn new(geometry: StretchGeometry) -> Self {
        let w = geometry.window;
        let window = (0..w).map(|i| 0.5 - 0.5 * (TAU * i as f64 / w as f64).cos()).collect();
        let fft_len = (2 * w + 2 * geometry.search).next_power_of_two();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(fft_len);
        let inverse = planner.plan_fft_inverse(fft_len);
        let scratch_len = forward.get_inplace_scratch_len().max(inverse.get_inplace_scratch_len());
        Self {
            geometry,
            window,
            fft_len,
            forward,
            inverse,
            region: vec![Complex::default(); fft_len],
            template: vec![Complex::default(); fft_len],
            scratch: vec![Complex::default(); scratch_len],
            energy: Vec::new(),
        }
    }

    /// Time-scale the source interval `[src_start, src_end)` to `out_len`
    /// frames. Samples outside the interval read as silence, so the output
    /// depends on nothing but that interval.
    pub(crate) fn run(&mut self, source: &[Vec<f64>], src_start: f64, src_end: f64, out_len: usize) -> Vec<Vec<f64>> {
        let channels = source.len();
        let mut out = vec![vec![0.0; out_len]; channels];
        if out_len == 0 || src_end <= src_start {
            return out;
        }
        let StretchGeometry { window: w, hop, .. } = self.geometry;
        let half = (w / 2) as isize;
        let lo = src_start.round() as isize;
        let hi = (src_end.round() as isize).min(source[0].len() as isize);
        let read = |ch: usize, i: isize| -> f64 {
            if i >= lo && i < hi {
                source[ch][i as usize]
            } else {
                0.0
            }
        };
        let guide: Vec<f64> = (lo.max(0)..hi.max(lo.max(0)))
            .map(|i| (0..channels).map(|ch| source[ch][i as usize]).sum())
            .collect();
        let guide_at = |i: isize| -> f64 {
            let j = i - lo.max(0);
            if j >= 0 && (j as usize) < guide.len() {
                guide[j as usize]
            } else {
                0.0
            }
        };

        let analysis_hop = hop as f64 * (src_end - src_start) / out_len as f64;
        let mut wsum = vec![0.0; out_len];
        let mut prev_start: Option<isize> = None;
        let mut k = 0usize;
        loop {
            let out_start = (k * hop) as isize - half;
            if out_start >= out_len as isize {
                break;
            }
            let nominal = (src_start + k as f64 * analysis_hop).round() as isize - half;
            let start = match prev_start {
                None => nominal,
                Some(p) => nominal + self.best_offset(&guide_at, p + hop as isize, nominal),
            };
            for i in 0..w {
                let t = out_start + i as isize;
                if t < 0 || t >= out_len as isize {
                    continue;
                }
                let wi = self.window[i];
                let t = t as usize;
                wsum[t] += wi;
                for (ch, dst) in out.iter_mut().enumerate() {
                    dst[t] += wi * read(ch, start + i as isize);
                }
            }
            prev_start = Some(start);
            k += 1;
        }
        for ch_out in out.iter_mut() {
            for (v, s) in ch_out.iter_mut().zip(&wsum) {
                if *s > SILENCE {
                    *v /= s;
                }
            }
        }
        out
    }

    /// Offset in `[-search, search]` whose window best matches the natural
    /// continuation starting at `template_start`. Ties favor small offsets.
    fn best_offset(&mut self, guide: &impl Fn(isize) -> f64, template_start: isize, nominal: isize) -> isize {
        let w = self.geometry.window;
        let s = self.geometry.search as isize;
        let region_start = nominal - s;
        let region_len = w + 2 * s as usize;

        let mut template_energy = 0.0;
        for (i, c) in self.template.iter_mut().enumerate() {
            let v = if i < w { guide(template_start + i as isize) } else { 0.0 };
            template_energy += v * v;
            *c = Complex::new(v, 0.0);
        }
        if template_energy < SILENCE {
            return 0;
        }
        let mut any = false;
        for (i, c) in self.region.iter_mut().enumerate() {
            let v = if i < region_len {
                guide(region_start + i as isize)
            } else {
                0.0
            };
            any |= v != 0.0;
            *c = Complex::new(v, 0.0);
        }
        if !any {
            return 0;
        }
        // Sliding energy of each candidate window.
        self.energy.clear();
        let mut acc = 0.0;
        let mut prefix = Vec::with_capacity(region_len + 1);
        prefix.push(0.0);
        for c in &self.region[..region_len] {
            acc += c.re * c.re;
            prefix.push(acc);
        }
        for m in 0..=2 * s as usize {
            self.energy.push((prefix[m + w] - prefix[m]).max(0.0));
        }

        self.forward.process_with_scratch(&mut self.region, &mut self.scratch);
        self.forward.process_with_scratch(&mut self.template, &mut self.scratch);
        for (r, t) in self.region.iter_mut().zip(&self.template) {
            *r *= t.conj();
        }
        self.inverse.process_with_scratch(&mut self.region, &mut self.scratch);
        let scale = 1.0 / self.fft_len as f64;

        let ncc = |m: usize, region: &[Complex<f64>], energy: &[f64]| -> f64 {
            let e = energy[m];
            if e < SILENCE {
                return f64::NEG_INFINITY;
            }
            region[m].re * scale / (e * template_energy).sqrt()
        };
        let mut best = 0isize;
        let mut best_score = ncc(s as usize, &self.region, &self.energy);
        for d in 1..=s {
            for delta in [-d, d] {
                let score = ncc((delta + s) as usize, &self.region, &self.energy);
                if score > best_score + NCC_EPSILON {
                    best = delta;
                    best_score = score;
                }
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sine(freq: f64, frames: usize, sr: f64) -> AudioBuffer {
        AudioBuffer::from_mono((0..frames).map(|n| (TAU * freq * n as f64 / sr).sin()).collect(), sr).unwrap()
    }

    #[test]
    fn geometry_scales_with_rate() {
        assert_eq!(
            StretchGeometry::for_rate(44100.0),
            StretchGeometry {
                window: 2048,
                hop: 1024,
                search: 512
            }
        );
        let g = StretchGeometry::for_rate(88200.0);
        assert_eq!((g.window, g.hop, g.search), (4096, 2048, 1024));
    }

    #[test]
    fn hann_overlap_is_flat() {
        let w = Wsola::new(StretchGeometry::for_rate(44100.0));
        for i in 0..1024 {
            assert!((w.window[i] + w.window[i + 1024] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn identity_is_exact() {
        let b = sine(440.0, 20_000, 44100.0);
        let out = stretch(&b, 1.0, 1.0).unwrap();
        assert_eq!(out.frames(), b.frames());
        for (x, y) in out.channel(0).iter().zip(b.channel(0)) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn length_is_exact() {
        let b = sine(300.0, 10_001, 44100.0);
        for &r in &[0.125, 0.5, 0.77, 1.5, 2.0, 8.0] {
            let out = stretch(&b, r, 1.0).unwrap();
            assert_eq!(out.frames(), (10_001.0 * r).round() as usize);
        }
    }

    #[test]
    fn ratio_bounds() {
        let b = sine(300.0, 100, 44100.0);
        assert!(matches!(
            stretch(&b, 9.0, 1.0),
            Err(WarpError::RatioOutOfRange { name: "time_ratio", .. })
        ));
        assert!(stretch(&b, 1.0, 0.1).is_err());
        assert!(stretch(&b, 1.0, f64::NAN).is_err());
    }

    #[test]
    fn stereo_channels_share_alignment() {
        let l = sine(220.0, 8000, 44100.0).into_channels().remove(0);
        let r: Vec<f64> = l.iter().map(|v| 0.5 * v).collect();
        let b = AudioBuffer::from_channels(vec![l, r], 44100.0).unwrap();
        let out = stretch(&b, 1.7, 1.0).unwrap();
        for (x, y) in out.channel(0).iter().zip(out.channel(1)) {
            assert!((0.5 * x - y).abs() < 1e-12);
        }
    }
}
