use std::f64::consts::TAU;

use super::{Arity, ProcessBlock, Processor};
use crate::graph::{ParamSpec, RenderContext};

const FREQ: usize = 0;
const GAIN: usize = 1;
const PHASE: usize = 2;

/// Sine generator driven by a phase accumulator measured in cycles.
///
/// `phase` is a fixed starting offset in cycles; with `freq_hz = 0` and
/// `phase = 0.25` the output is a constant equal to `gain`.
#[derive(Debug, Clone, Default)]
pub struct Oscillator {
    phase: f64,
    offset: f64,
    nyquist: f64,
    sample_rate: f64,
}

impl Oscillator {
    pub fn new() -> Self {
        Self::default()
    }
}

impl Processor for Oscillator {
    fn kind(&self) -> &str {
        "oscillator"
    }

    fn arity(&self) -> Arity {
        Arity::exactly(0)
    }

    fn schema(&self, _num_inputs: usize) -> Vec<ParamSpec> {
        vec![
            ParamSpec::new("freq_hz", 440.0, 0.0, 100_000.0),
            ParamSpec::new("gain", 1.0, 0.0, 16.0),
            ParamSpec::fixed("phase", 0.0, 0.0, 1.0),
        ]
    }

    fn output_channels(&self, _input_channels: &[usize]) -> usize {
        1
    }

    fn prepare(&mut self, ctx: &RenderContext, params: &[f64]) {
        self.phase = 0.0;
        self.offset = params[PHASE];
        self.sample_rate = ctx.sample_rate;
        // Strictly below Nyquist.
        self.nyquist = 0.5 * ctx.sample_rate * (1.0 - 1e-9);
    }

    fn process(&mut self, block: ProcessBlock<'_>) {
        let freq = block.params.lane(FREQ);
        let gain = block.params.lane(GAIN);
        let out = &mut block.output[0];
        for n in 0..block.len {
            out[n] = gain[n] * (TAU * (self.phase + self.offset)).sin();
            let f = freq[n].clamp(0.0, self.nyquist);
            self.phase = (self.phase + f / self.sample_rate).fract();
        }
    }
}
