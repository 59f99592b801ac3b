//! Band-limited sample-rate conversion with a Kaiser-windowed sinc kernel.
//!
//! The kernel spans 32 taps of the lower of the two rates (16 either side
//! of the output instant). It is tabulated once at fine resolution and
//! evaluated by linear interpolation, which works for irrational ratios as
//! well as the usual rational ones.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::buffer::AudioBuffer;

const HALF_TAPS: usize = 16;
const TABLE_STEPS_PER_TAP: usize = 512;
const KAISER_BETA: f64 = 8.0;
/// Passband edge as a fraction of the lower Nyquist frequency.
const CUTOFF: f64 = 0.9;

/// Zeroth-order modified Bessel function of the first kind.
fn bessel_i0(x: f64) -> f64 {
    let mut sum = 1.0;
    let mut term = 1.0;
    let q = x * x / 4.0;
    for k in 1..64 {
        term *= q / (k * k) as f64;
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

/// `sinc(CUTOFF * t) * kaiser(t / HALF_TAPS)` for `t` in lower-rate taps.
fn kernel_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let n = HALF_TAPS * TABLE_STEPS_PER_TAP;
        let norm = bessel_i0(KAISER_BETA);
        (0..=n + 1)
            .map(|i| {
                let t = i as f64 / TABLE_STEPS_PER_TAP as f64;
                if t >= HALF_TAPS as f64 {
                    return 0.0;
                }
                let x = PI * CUTOFF * t;
                let sinc = if x == 0.0 { 1.0 } else { x.sin() / x };
                let r = t / HALF_TAPS as f64;
                sinc * bessel_i0(KAISER_BETA * (1.0 - r * r).sqrt()) / norm
            })
            .collect()
    })
}

#[inline]
fn kernel(table: &[f64], t: f64) -> f64 {
    let pos = t.abs() * TABLE_STEPS_PER_TAP as f64;
    let i = pos as usize;
    if i >= table.len() - 1 {
        return 0.0;
    }
    let frac = pos - i as f64;
    table[i] + (table[i + 1] - table[i]) * frac
}

/// Convert to `target_rate`. Output length is
/// `round(frames * target / source)`; equal rates return a copy.
pub fn resample(buffer: &AudioBuffer, target_rate: f64) -> AudioBuffer {
    let source = buffer.sample_rate();
    if source == target_rate {
        return buffer.clone();
    }
    let out = resample_channels(buffer.channels(), target_rate / source);
    AudioBuffer::from_channels(out, target_rate).expect("resampled channels share length")
}

/// Resample by `ratio` (output rate / input rate) keeping the nominal
/// sample rate; used to change pitch and speed together.
pub fn resample_ratio(buffer: &AudioBuffer, ratio: f64) -> AudioBuffer {
    if ratio == 1.0 {
        return buffer.clone();
    }
    let out = resample_channels(buffer.channels(), ratio);
    AudioBuffer::from_channels(out, buffer.sample_rate()).expect("resampled channels share length")
}

fn resample_channels(channels: &[Vec<f64>], ratio: f64) -> Vec<Vec<f64>> {
    let table = kernel_table();
    let frames = channels[0].len();
    let out_len = (frames as f64 * ratio).round() as usize;
    // Kernel scale: taps are measured on the lower-rate grid.
    let scale = ratio.min(1.0);
    let reach = (HALF_TAPS as f64 / scale).ceil() as isize;

    let mut out = vec![Vec::with_capacity(out_len); channels.len()];
    let mut weights = Vec::with_capacity(2 * reach as usize + 1);
    for m in 0..out_len {
        let u = m as f64 / ratio;
        let center = u.floor() as isize;
        let first = center - reach + 1;
        weights.clear();
        let mut total = 0.0;
        for k in first..=center + reach {
            let w = kernel(table, (u - k as f64) * scale);
            weights.push(w);
            total += w;
        }
        for (ch, dst) in out.iter_mut().enumerate() {
            let src = &channels[ch];
            let mut acc = 0.0;
            for (j, w) in weights.iter().enumerate() {
                let k = first + j as isize;
                if k >= 0 && (k as usize) < frames {
                    acc += src[k as usize] * w;
                }
            }
            dst.push(if total != 0.0 { acc / total } else { 0.0 });
        }
    }
    out
}
