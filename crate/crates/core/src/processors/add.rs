use super::{Arity, ProcessBlock, Processor};
use crate::buffer::adapted_sample;
use crate::graph::{ParamSpec, RenderContext};

/// Maximum fan-in of a bus.
pub const MAX_BUS_INPUTS: usize = 256;

/// Bus: weighted sum of all inputs, `gain_<i>` per input, accumulated in
/// input order. Inputs are adapted to the widest input's channel count.
#[derive(Debug, Clone, Default)]
pub struct Add;

impl Add {
    pub fn new() -> Self {
        Self
    }
}

impl Processor for Add {
    fn kind(&self) -> &str {
        "add"
    }

    fn arity(&self) -> Arity {
        Arity::range(1, MAX_BUS_INPUTS)
    }

    fn schema(&self, num_inputs: usize) -> Vec<ParamSpec> {
        (0..num_inputs)
            .map(|i| ParamSpec::new(format!("gain_{i}"), 1.0, 0.0, 16.0))
            .collect()
    }

    fn output_channels(&self, input_channels: &[usize]) -> usize {
        input_channels.iter().copied().max().unwrap_or(1)
    }

    fn prepare(&mut self, _ctx: &RenderContext, _params: &[f64]) {}

    fn process(&mut self, block: ProcessBlock<'_>) {
        let channels = block.output.len();
        for (ch, out) in block.output.iter_mut().enumerate() {
            let first = block.params.lane(0);
            for n in 0..block.len {
                out[n] = first[n] * adapted_sample(block.inputs[0], channels, ch, n);
            }
            for (i, input) in block.inputs.iter().enumerate().skip(1) {
                let g = block.params.lane(i);
                for n in 0..block.len {
                    out[n] += g[n] * adapted_sample(input, channels, ch, n);
                }
            }
        }
    }
}
