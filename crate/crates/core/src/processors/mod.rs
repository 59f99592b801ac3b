//! The processor interface and the built-in processor library.
//!
//! Every node in a [`Graph`](crate::graph::Graph) owns a boxed
//! [`Processor`]. The engine hands it one block at a time together with the
//! per-frame values of every parameter in its schema, so a processor never
//! has to interpolate automation itself.

mod add;
mod biquad;
mod compressor;
mod envelope;
mod gain;
mod oscillator;
mod playback;

pub use add::Add;
pub use biquad::{Biquad, BiquadCoefficients, BiquadMode, BiquadState};
pub use compressor::{compressor_gain_db, Compressor, CompressorParams};
pub use envelope::{AdsrParams, Envelope, EnvelopeStage};
pub use gain::Gain;
pub use oscillator::Oscillator;
pub use playback::Playback;

use crate::graph::{ParamLanes, ParamSpec, RenderContext};
use crate::midi::NoteSequence;

/// Inclusive bounds on the number of inputs a processor accepts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Arity {
    pub min: usize,
    pub max: usize,
}

impl Arity {
    pub const fn exactly(n: usize) -> Self {
        Self { min: n, max: n }
    }

    pub const fn range(min: usize, max: usize) -> Self {
        Self { min, max }
    }

    pub fn accepts(&self, n: usize) -> bool {
        n >= self.min && n <= self.max
    }
}

/// One block of work for a processor.
///
/// `inputs[i]` holds the current block of the node's i-th input, one slice
/// per channel, each at least `len` long. `output` has one slice per output
/// channel; the processor must write frames `0..len` of every channel.
pub struct ProcessBlock<'a> {
    pub inputs: &'a [&'a [Vec<f64>]],
    pub params: &'a ParamLanes,
    pub output: &'a mut [Vec<f64>],
    /// Engine frame index of the first frame of this block.
    pub start_frame: usize,
    pub len: usize,
}

/// Voice usage counters reported by polyphonic instruments.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct VoiceStats {
    pub max_voices: usize,
    pub peak_active: usize,
    pub steals: usize,
}

/// A node's audio behavior.
///
/// Implementations must be deterministic functions of their inputs, their
/// parameter lanes and the state reset in [`prepare`](Processor::prepare):
/// the engine relies on this for bitwise-reproducible renders and for output
/// that does not depend on the block size.
pub trait Processor: Send {
    /// Kind tag as used in project files.
    fn kind(&self) -> &str;

    fn arity(&self) -> Arity;

    /// Parameter schema for a node with `num_inputs` inputs. Parameter order
    /// is the lane order seen in [`ProcessBlock::params`].
    fn schema(&self, num_inputs: usize) -> Vec<ParamSpec>;

    fn output_channels(&self, input_channels: &[usize]) -> usize;

    /// Reset all state ahead of a render pass.
    fn prepare(&mut self, ctx: &RenderContext, params: &[f64]);

    fn process(&mut self, block: ProcessBlock<'_>);

    /// Sample rate of audio material owned by the processor, if any.
    fn source_sample_rate(&self) -> Option<f64> {
        None
    }

    /// Instruments accept note sequences; other processors return `false`.
    fn load_notes(&mut self, _notes: &NoteSequence, _beats_mode: bool) -> bool {
        false
    }

    fn voice_stats(&self) -> Option<VoiceStats> {
        None
    }
}

/// Names of the built-in processor kinds.
pub const BUILTIN_KINDS: [&str; 9] = [
    "oscillator",
    "gain",
    "add",
    "biquad",
    "compressor",
    "playback",
    "playback_warp",
    "sampler",
    "wavetable_synth",
];

/// Flush values too small to matter to zero so recursive state never
/// drifts into subnormal range.
#[inline]
pub(crate) fn flush_denormal(x: f64) -> f64 {
    if x.abs() < 1e-20 {
        0.0
    } else {
        x
    }
}
