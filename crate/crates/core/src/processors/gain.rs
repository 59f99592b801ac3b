use super::{Arity, ProcessBlock, Processor};
use crate::buffer::adapted_sample;
use crate::graph::{ParamSpec, RenderContext};

/// Linear gain: `out[n] = in[n] * gain[n]`.
#[derive(Debug, Clone, Default)]
pub struct Gain;

impl Gain {
    pub fn new() -> Self {
        Self
    }
}

impl Processor for Gain {
    fn kind(&self) -> &str {
        "gain"
    }

    fn arity(&self) -> Arity {
        Arity::exactly(1)
    }

    fn schema(&self, _num_inputs: usize) -> Vec<ParamSpec> {
        vec![ParamSpec::new("gain", 1.0, 0.0, 16.0)]
    }

    fn output_channels(&self, input_channels: &[usize]) -> usize {
        input_channels[0]
    }

    fn prepare(&mut self, _ctx: &RenderContext, _params: &[f64]) {}

    fn process(&mut self, block: ProcessBlock<'_>) {
        let gain = block.params.lane(0);
        let input = block.inputs[0];
        let channels = block.output.len();
        for (ch, out) in block.output.iter_mut().enumerate() {
            for n in 0..block.len {
                out[n] = adapted_sample(input, channels, ch, n) * gain[n];
            }
        }
    }
}
