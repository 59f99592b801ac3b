use super::{Arity, ProcessBlock, Processor};
use crate::buffer::AudioBuffer;
use crate::graph::{ParamSpec, RenderContext};

/// Plays an audio asset once from engine frame 0.
#[derive(Debug, Clone)]
pub struct Playback {
    audio: AudioBuffer,
}

impl Playback {
    pub fn new(audio: AudioBuffer) -> Self {
        Self { audio }
    }

    pub fn audio(&self) -> &AudioBuffer {
        &self.audio
    }
}

impl Processor for Playback {
    fn kind(&self) -> &str {
        "playback"
    }

    fn arity(&self) -> Arity {
        Arity::exactly(0)
    }

    fn schema(&self, _num_inputs: usize) -> Vec<ParamSpec> {
        vec![ParamSpec::new("gain", 1.0, 0.0, 16.0)]
    }

    fn output_channels(&self, _input_channels: &[usize]) -> usize {
        self.audio.num_channels()
    }

    fn source_sample_rate(&self) -> Option<f64> {
        Some(self.audio.sample_rate())
    }

    fn prepare(&mut self, _ctx: &RenderContext, _params: &[f64]) {}

    fn process(&mut self, block: ProcessBlock<'_>) {
        let gain = block.params.lane(0);
        let frames = self.audio.frames();
        for (ch, out) in block.output.iter_mut().enumerate() {
            let src = self.audio.channel(ch);
            for n in 0..block.len {
                let i = block.start_frame + n;
                out[n] = if i < frames { src[i] * gain[n] } else { 0.0 };
            }
        }
    }
}
