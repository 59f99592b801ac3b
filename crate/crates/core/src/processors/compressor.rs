//! Peak-detecting, hard-knee compressor with an optional sidechain input.
//!
//! Detector: `env[n] = a * env[n-1] + (1 - a) * |sc[n]|` with
//! `a = exp(-1 / (tau * sr))`, `tau` the attack time while the detector
//! input rises above the envelope and the release time otherwise.
//! Gain in dB: `min(0, (threshold - level) * (1 - 1/ratio)) + makeup`.

use super::{flush_denormal, Arity, ProcessBlock, Processor};
use crate::buffer::adapted_sample;
use crate::graph::{ParamSpec, RenderContext};

const THRESHOLD: usize = 0;
const RATIO: usize = 1;
const ATTACK: usize = 2;
const RELEASE: usize = 3;
const MAKEUP: usize = 4;

/// Floor applied to the envelope before converting to dB.
pub const LEVEL_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompressorParams {
    pub threshold_db: f64,
    pub ratio: f64,
    pub attack_ms: f64,
    pub release_ms: f64,
    pub makeup_db: f64,
}

impl Default for CompressorParams {
    fn default() -> Self {
        Self {
            threshold_db: 0.0,
            ratio: 4.0,
            attack_ms: 10.0,
            release_ms: 100.0,
            makeup_db: 0.0,
        }
    }
}

/// Static gain curve in dB for a detector level in dB.
#[inline]
pub fn compressor_gain_db(level_db: f64, threshold_db: f64, ratio: f64, makeup_db: f64) -> f64 {
    ((threshold_db - level_db) * (1.0 - 1.0 / ratio)).min(0.0) + makeup_db
}

/// One-pole smoothing coefficient for a time constant in milliseconds.
#[inline]
fn pole(time_ms: f64, sample_rate: f64) -> f64 {
    (-1.0 / (time_ms * 1e-3 * sample_rate)).exp()
}

/// With one input the main signal drives its own detector; with two the
/// second input is the sidechain.
#[derive(Debug, Clone, Default)]
pub struct Compressor {
    env: f64,
    sample_rate: f64,
    attack: (f64, f64),
    release: (f64, f64),
}

impl Compressor {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    fn attack_pole(&mut self, ms: f64) -> f64 {
        if self.attack.0 != ms {
            self.attack = (ms, pole(ms, self.sample_rate));
        }
        self.attack.1
    }

    #[inline]
    fn release_pole(&mut self, ms: f64) -> f64 {
        if self.release.0 != ms {
            self.release = (ms, pole(ms, self.sample_rate));
        }
        self.release.1
    }
}

impl Processor for Compressor {
    fn kind(&self) -> &str {
        "compressor"
    }

    fn arity(&self) -> Arity {
        Arity::range(1, 2)
    }

    fn schema(&self, _num_inputs: usize) -> Vec<ParamSpec> {
        vec![
            ParamSpec::new("threshold_db", 0.0, -96.0, 0.0),
            ParamSpec::new("ratio", 4.0, 1.0, 1000.0),
            ParamSpec::new("attack_ms", 10.0, 0.01, 10_000.0),
            ParamSpec::new("release_ms", 100.0, 0.01, 10_000.0),
            ParamSpec::new("makeup_db", 0.0, -48.0, 48.0),
        ]
    }

    fn output_channels(&self, input_channels: &[usize]) -> usize {
        input_channels[0]
    }

    fn prepare(&mut self, ctx: &RenderContext, _params: &[f64]) {
        self.env = 0.0;
        self.sample_rate = ctx.sample_rate;
        self.attack = (f64::NAN, 0.0);
        self.release = (f64::NAN, 0.0);
    }

    fn process(&mut self, block: ProcessBlock<'_>) {
        let main = block.inputs[0];
        let detector = block.inputs.get(1).copied().unwrap_or(main);
        let channels = block.output.len();
        let p = block.params;
        for n in 0..block.len {
            let x = adapted_sample(detector, 1, 0, n).abs();
            let a = if x > self.env {
                self.attack_pole(p.get(ATTACK, n))
            } else {
                self.release_pole(p.get(RELEASE, n))
            };
            self.env = flush_denormal(a * self.env + (1.0 - a) * x);
            let level = 20.0 * self.env.max(LEVEL_FLOOR).log10();
            let gain_db = compressor_gain_db(level, p.get(THRESHOLD, n), p.get(RATIO, n), p.get(MAKEUP, n));
            let gain = 10f64.powf(gain_db / 20.0);
            for ch in 0..channels {
                block.output[ch][n] = adapted_sample(main, channels, ch, n) * gain;
            }
        }
    }
}
