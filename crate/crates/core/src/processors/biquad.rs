//! Second-order IIR filter with cookbook (bilinear transform) coefficients,
//! run in transposed direct form II.

use std::f64::consts::TAU;

use super::{flush_denormal, Arity, ProcessBlock, Processor};
use crate::buffer::adapted_sample;
use crate::graph::{ParamSpec, RenderContext};

const MODE: usize = 0;
const CUTOFF: usize = 1;
const Q: usize = 2;

pub const MIN_CUTOFF_HZ: f64 = 10.0;
/// Upper cutoff limit as a fraction of the sample rate.
pub const MAX_CUTOFF_FRACTION: f64 = 0.49;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BiquadMode {
    #[default]
    Lowpass,
    Highpass,
    /// Constant 0 dB peak gain.
    Bandpass,
}

impl BiquadMode {
    pub fn from_param(value: f64) -> Self {
        match value.round() as i64 {
            1 => BiquadMode::Highpass,
            2 => BiquadMode::Bandpass,
            _ => BiquadMode::Lowpass,
        }
    }

    pub fn as_param(self) -> f64 {
        match self {
            BiquadMode::Lowpass => 0.0,
            BiquadMode::Highpass => 1.0,
            BiquadMode::Bandpass => 2.0,
        }
    }
}

/// Normalized coefficients (`a0 = 1`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiquadCoefficients {
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
    pub a1: f64,
    pub a2: f64,
}

impl BiquadCoefficients {
    pub const IDENTITY: Self = Self {
        b0: 1.0,
        b1: 0.0,
        b2: 0.0,
        a1: 0.0,
        a2: 0.0,
    };

    /// Cutoff is clamped to `[10 Hz, 0.49 * sample_rate]`.
    pub fn design(mode: BiquadMode, cutoff_hz: f64, q: f64, sample_rate: f64) -> Self {
        let cutoff = clamp_cutoff(cutoff_hz, sample_rate);
        let w0 = TAU * cutoff / sample_rate;
        let (sin, cos) = w0.sin_cos();
        let alpha = sin / (2.0 * q);
        let (b0, b1, b2) = match mode {
            BiquadMode::Lowpass => ((1.0 - cos) / 2.0, 1.0 - cos, (1.0 - cos) / 2.0),
            BiquadMode::Highpass => ((1.0 + cos) / 2.0, -(1.0 + cos), (1.0 + cos) / 2.0),
            BiquadMode::Bandpass => (alpha, 0.0, -alpha),
        };
        let a0 = 1.0 + alpha;
        Self {
            b0: b0 / a0,
            b1: b1 / a0,
            b2: b2 / a0,
            a1: -2.0 * cos / a0,
            a2: (1.0 - alpha) / a0,
        }
    }
}

pub fn clamp_cutoff(cutoff_hz: f64, sample_rate: f64) -> f64 {
    let hi = MAX_CUTOFF_FRACTION * sample_rate;
    if cutoff_hz.is_nan() {
        hi
    } else {
        cutoff_hz.clamp(MIN_CUTOFF_HZ.min(hi), hi)
    }
}

/// Filter memory for one channel.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BiquadState {
    z1: f64,
    z2: f64,
}

impl BiquadState {
    #[inline]
    pub fn tick(&mut self, c: &BiquadCoefficients, x: f64) -> f64 {
        let y = c.b0 * x + self.z1;
        self.z1 = flush_denormal(c.b1 * x - c.a1 * y + self.z2);
        self.z2 = flush_denormal(c.b2 * x - c.a2 * y);
        y
    }

    pub fn reset(&mut self) {
        *self = Self::default();
    }

    pub fn is_finite(&self) -> bool {
        self.z1.is_finite() && self.z2.is_finite()
    }
}

/// Filter node. `mode` is 0 (lowpass), 1 (highpass) or 2 (bandpass).
#[derive(Debug, Clone, Default)]
pub struct Biquad {
    mode: BiquadMode,
    sample_rate: f64,
    coeffs: BiquadCoefficients,
    designed_for: (f64, f64),
    state: Vec<BiquadState>,
}

impl Default for BiquadCoefficients {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl Biquad {
    pub fn new() -> Self {
        Self::default()
    }

    fn update(&mut self, cutoff: f64, q: f64) {
        if self.designed_for != (cutoff, q) {
            self.coeffs = BiquadCoefficients::design(self.mode, cutoff, q, self.sample_rate);
            self.designed_for = (cutoff, q);
        }
    }
}

impl Processor for Biquad {
    fn kind(&self) -> &str {
        "biquad"
    }

    fn arity(&self) -> Arity {
        Arity::exactly(1)
    }

    fn schema(&self, _num_inputs: usize) -> Vec<ParamSpec> {
        vec![
            ParamSpec::fixed("mode", 0.0, 0.0, 2.0),
            ParamSpec::new("cutoff_hz", 1000.0, 1.0, 100_000.0),
            ParamSpec::new("q", std::f64::consts::FRAC_1_SQRT_2, 0.05, 10.0),
        ]
    }

    fn output_channels(&self, input_channels: &[usize]) -> usize {
        input_channels[0]
    }

    fn prepare(&mut self, ctx: &RenderContext, params: &[f64]) {
        self.mode = BiquadMode::from_param(params[MODE]);
        self.sample_rate = ctx.sample_rate;
        self.designed_for = (f64::NAN, f64::NAN);
        self.update(params[CUTOFF], params[Q]);
        self.state.clear();
    }

    fn process(&mut self, block: ProcessBlock<'_>) {
        let channels = block.output.len();
        if self.state.len() != channels {
            self.state = vec![BiquadState::default(); channels];
        }
        let cutoff = block.params.lane(CUTOFF);
        let q = block.params.lane(Q);
        let input = block.inputs[0];
        for n in 0..block.len {
            self.update(cutoff[n], q[n]);
            for ch in 0..channels {
                let x = adapted_sample(input, channels, ch, n);
                block.output[ch][n] = self.state[ch].tick(&self.coeffs, x);
            }
        }
    }
}
