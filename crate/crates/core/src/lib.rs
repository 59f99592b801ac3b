//! Offline audio rendering: a DAG of processors rendered block by block,
//! with sample-accurate automation, polyphonic instruments, SMF input,
//! warped clip playback and WAV input/output.
//!
//! ```
//! use dawkit::graph::Graph;
//! use dawkit::processors::{Gain, Oscillator};
//!
//! let mut graph = Graph::default();
//! graph.add_node("osc", Oscillator::new(), &[], &[("freq_hz", 220.0)]).unwrap();
//! graph.add_node("out", Gain::new(), &["osc"], &[("gain", 0.5)]).unwrap();
//! graph.set_record("out", true).unwrap();
//! let result = graph.render(0.1).unwrap();
//! assert_eq!(result.get("out").unwrap().frames(), 4410);
//! ```

pub mod audio_io;
pub mod buffer;
pub mod graph;
pub mod instruments;
pub mod midi;
pub mod processors;
pub mod project;
pub mod warp;

pub use buffer::{AudioBuffer, BufferError};
pub use graph::{ControlSignal, Graph, GraphError, RenderResult};
