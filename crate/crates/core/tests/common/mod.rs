#![allow(dead_code)]

use std::f64::consts::TAU;

use dawkit::instruments::{Sampler, WavetableSynth};
use dawkit::midi::{NoteEvent, NoteSequence};
use dawkit::processors::{Add, Biquad, Compressor, Gain, Oscillator, Playback};
use dawkit::warp::{ClipInfo, PlaybackWarp, TimelinePlacement, WarpMarker};
use dawkit::{AudioBuffer, Graph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

pub const SR: f64 = 44_100.0;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn sine(freq: f64, frames: usize, sr: f64) -> Vec<f64> {
    (0..frames).map(|n| (TAU * freq * n as f64 / sr).sin()).collect()
}

/// Harmonic tones with decaying envelopes plus a little noise.
pub fn music_like(frames: usize, sr: f64, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    let mut out = vec![0.0; frames];
    let note_len = (0.25 * sr) as usize;
    let mut start = 0;
    while start < frames {
        let f0 = 110.0 * 2f64.powf(r.gen_range(0..24) as f64 / 12.0);
        for (i, s) in out[start..(start + note_len).min(frames)].iter_mut().enumerate() {
            let t = i as f64 / sr;
            let env = (-t * 6.0).exp();
            let tone: f64 = (1..=5).map(|h| (TAU * f0 * h as f64 * t).sin() / h as f64).sum();
            *s += 0.3 * env * tone;
        }
        start += note_len;
    }
    for s in out.iter_mut() {
        *s += 0.01 * r.gen_range(-1.0..1.0);
    }
    out
}

/// Single-sample clicks every `60 / bpm` seconds.
pub fn click_track(bpm: f64, beats: usize, sr: f64) -> (Vec<f64>, Vec<usize>) {
    let period = 60.0 / bpm * sr;
    let frames = (beats as f64 * period).round() as usize;
    let mut out = vec![0.0; frames];
    let mut onsets = Vec::new();
    for k in 0..beats {
        let at = (k as f64 * period).round() as usize;
        out[at] = 1.0;
        onsets.push(at);
    }
    (out, onsets)
}

pub fn snr_db(reference: &[f64], test: &[f64]) -> f64 {
    let signal: f64 = reference.iter().map(|x| x * x).sum();
    let noise: f64 = reference.iter().zip(test).map(|(a, b)| (a - b) * (a - b)).sum();
    10.0 * (signal / noise.max(1e-300)).log10()
}

/// Bin of the largest FFT magnitude over the positive frequencies, with the
/// FFT length.
pub fn fft_peak_bin(x: &[f64]) -> (usize, usize) {
    let n = x.len();
    let mut buf: Vec<Complex<f64>> = x
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let w = 0.5 - 0.5 * (TAU * i as f64 / n as f64).cos();
            Complex::new(v * w, 0.0)
        })
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let peak = (1..n / 2)
        .max_by(|&a, &b| buf[a].norm().total_cmp(&buf[b].norm()))
        .unwrap_or(0);
    (peak, n)
}

/// Fundamental from rising zero crossings, interpolated linearly.
pub fn zero_crossing_hz(x: &[f64], sr: f64) -> f64 {
    let mut crossings = Vec::new();
    for n in 1..x.len() {
        if x[n - 1] < 0.0 && x[n] >= 0.0 {
            let frac = -x[n - 1] / (x[n] - x[n - 1]);
            crossings.push(n as f64 - 1.0 + frac);
        }
    }
    let (first, last) = (crossings[0], crossings[crossings.len() - 1]);
    (crossings.len() - 1) as f64 / ((last - first) / sr)
}

pub fn cents(measured: f64, expected: f64) -> f64 {
    1200.0 * (measured / expected).log2()
}

pub fn bits(x: &[f64]) -> Vec<u64> {
    x.iter().map(|v| v.to_bits()).collect()
}

/// Fixed stereo material for asset-backed processors.
pub fn stereo_material(frames: usize, sr: f64) -> AudioBuffer {
    let l = music_like(frames, sr, 7);
    let r: Vec<f64> = l
        .iter()
        .enumerate()
        .map(|(i, v)| 0.7 * v + 0.1 * (i as f64 * 0.01).sin())
        .collect();
    AudioBuffer::from_channels(vec![l, r], sr).unwrap()
}

pub fn demo_notes() -> NoteSequence {
    NoteSequence::new(vec![
        NoteEvent::seconds(60, 100, 0.0, 0.2),
        NoteEvent::seconds(64, 90, 0.05, 0.3),
        NoteEvent::seconds(67, 80, 0.1, 0.1),
        NoteEvent::seconds(72, 110, 0.21, 0.15),
        NoteEvent::seconds(60, 70, 0.3, 0.1),
    ])
}

/// Graph using every built-in processor kind, all nodes recorded.
pub fn all_kinds_graph(block_size: usize) -> Graph {
    let mut g = Graph::new(SR, block_size, 120.0).unwrap();
    let material = stereo_material((0.6 * SR) as usize, SR);
    g.add_node("osc", Oscillator::new(), &[], &[("freq_hz", 220.0), ("gain", 0.5)])
        .unwrap();
    g.add_node("lfo", Oscillator::new(), &[], &[("freq_hz", 3.0)]).unwrap();
    g.add_node("play", Playback::new(material.clone()), &[], &[("gain", 0.8)])
        .unwrap();
    let clip = ClipInfo::new(
        vec![
            WarpMarker::new(0.0, 0.0),
            WarpMarker::new(0.25, 0.4),
            WarpMarker::new(0.5, 1.2),
        ],
        120.0,
    )
    .unwrap();
    g.add_node(
        "warp",
        PlaybackWarp::new(material.clone(), clip, TimelinePlacement::new(0.1, 3.0).unwrap()).unwrap(),
        &[],
        &[],
    )
    .unwrap();
    g.add_node(
        "smp",
        Sampler::new(material),
        &[],
        &[("filter_depth_hz", 3000.0), ("filter_base_hz", 500.0)],
    )
    .unwrap();
    g.add_node(
        "wt",
        WavetableSynth::new(WavetableSynth::sine_table(256)).unwrap(),
        &[],
        &[],
    )
    .unwrap();
    g.load_note_sequence("smp", &demo_notes(), false).unwrap();
    g.load_note_sequence("wt", &demo_notes(), false).unwrap();
    g.add_node("filt", Biquad::new(), &["play"], &[("cutoff_hz", 1200.0), ("q", 2.0)])
        .unwrap();
    g.add_node("hp", Biquad::new(), &["wt"], &[("mode", 1.0), ("cutoff_hz", 300.0)])
        .unwrap();
    g.add_node("g", Gain::new(), &["osc"], &[("gain", 0.7)]).unwrap();
    g.add_node(
        "comp",
        Compressor::new(),
        &["filt", "smp"],
        &[("threshold_db", -30.0), ("ratio", 6.0)],
    )
    .unwrap();
    g.add_node(
        "self_comp",
        Compressor::new(),
        &["warp"],
        &[("threshold_db", -20.0), ("attack_ms", 1.0)],
    )
    .unwrap();
    g.add_node(
        "bus",
        Add::new(),
        &["g", "comp", "self_comp", "hp", "lfo"],
        &[("gain_4", 0.05)],
    )
    .unwrap();
    let names: Vec<String> = g.nodes().iter().map(|n| n.name().to_string()).collect();
    for n in names {
        g.set_record(&n, true).unwrap();
    }
    g
}
