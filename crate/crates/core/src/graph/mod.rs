//! Processor graph, scheduling, block rendering, recording and automation.
//!
//! A [`Graph`] is built incrementally with [`Graph::add_node`]; because every
//! input must already exist when a node is added, insertion order is always a
//! valid schedule. [`Graph::set_inputs`] can rewire a node afterwards, which
//! is the only way a cycle can appear, and [`Graph::compile`] rejects it.
//!
//! Rendering walks the schedule once per block. Parameter values are
//! resolved per frame before each node runs, so the block size never changes
//! the output.

mod param;
mod schedule;

pub use param::{ControlSignal, ParamLanes, ParamSpec};

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::buffer::AudioBuffer;
use crate::midi::NoteSequence;
use crate::processors::{ProcessBlock, Processor, VoiceStats};

pub const DEFAULT_SAMPLE_RATE: f64 = 44100.0;
pub const DEFAULT_BLOCK_SIZE: usize = 512;
pub const DEFAULT_BPM: f64 = 120.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("node name `{0}` is already in use")]
    DuplicateName(String),
    #[error("node `{node}` references unknown input `{input}`")]
    UnknownInput { node: String, input: String },
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("node `{node}` ({kind}) takes {min}..={max} inputs, got {got}")]
    ArityMismatch {
        node: String,
        kind: String,
        got: usize,
        min: usize,
        max: usize,
    },
    #[error("node `{0}` needs at least one input")]
    NoInputs(String),
    #[error("cycle detected: {}", .0.join(" -> "))]
    CycleDetected(Vec<String>),
    #[error("node `{node}` has no parameter `{param}`")]
    UnknownParameter { node: String, param: String },
    #[error("parameter `{param}` of `{node}` must lie in [{min}, {max}], got {value}")]
    OutOfRange {
        node: String,
        param: String,
        value: f64,
        min: f64,
        max: f64,
    },
    #[error("parameter `{param}` of `{node}` cannot be automated")]
    NotAutomatable { node: String, param: String },
    #[error("node `{0}` does not accept notes")]
    NotAnInstrument(String),
    #[error("node `{node}` holds audio at {found} Hz but the engine runs at {expected} Hz")]
    RateMismatch { node: String, expected: f64, found: f64 },
    #[error("render duration must be positive and finite, got {0}")]
    InvalidDuration(f64),
    #[error("graph has no nodes")]
    EmptyGraph,
    #[error("invalid engine settings: {0}")]
    InvalidSettings(String),
}

/// Opaque index of a node within its graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub usize);

/// Settings visible to processors while preparing for a render pass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderContext {
    pub sample_rate: f64,
    pub block_size: usize,
    pub bpm: f64,
    pub total_frames: usize,
}

pub struct Node {
    name: String,
    processor: Box<dyn Processor>,
    inputs: Vec<usize>,
    specs: Vec<ParamSpec>,
    values: Vec<f64>,
    automation: Vec<Option<ControlSignal>>,
    record: bool,
}

impl Node {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> &str {
        self.processor.kind()
    }

    pub fn input_ids(&self) -> &[usize] {
        &self.inputs
    }

    pub fn param_specs(&self) -> &[ParamSpec] {
        &self.specs
    }

    pub fn param_values(&self) -> &[f64] {
        &self.values
    }

    pub fn automation(&self, param: &str) -> Option<&ControlSignal> {
        let i = self.specs.iter().position(|s| s.name == param)?;
        self.automation[i].as_ref()
    }

    pub fn parameter(&self, param: &str) -> Option<f64> {
        let i = self.specs.iter().position(|s| s.name == param)?;
        Some(self.values[i])
    }

    pub fn record(&self) -> bool {
        self.record
    }

    pub fn voice_stats(&self) -> Option<VoiceStats> {
        self.processor.voice_stats()
    }

    fn param_index(&self, param: &str) -> Result<usize, GraphError> {
        self.specs
            .iter()
            .position(|s| s.name == param)
            .ok_or_else(|| GraphError::UnknownParameter {
                node: self.name.clone(),
                param: param.to_string(),
            })
    }
}

/// Output of one render pass: the full-length audio of every recorded node.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RenderResult {
    buffers: BTreeMap<String, AudioBuffer>,
}

impl RenderResult {
    pub fn get(&self, name: &str) -> Option<&AudioBuffer> {
        self.buffers.get(name)
    }

    pub fn len(&self) -> usize {
        self.buffers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buffers.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.buffers.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &AudioBuffer)> {
        self.buffers.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn into_map(self) -> BTreeMap<String, AudioBuffer> {
        self.buffers
    }
}

pub struct Graph {
    nodes: Vec<Node>,
    index: HashMap<String, usize>,
    sample_rate: f64,
    block_size: usize,
    bpm: f64,
}

impl Default for Graph {
    fn default() -> Self {
        Self {
            nodes: Vec::new(),
            index: HashMap::new(),
            sample_rate: DEFAULT_SAMPLE_RATE,
            block_size: DEFAULT_BLOCK_SIZE,
            bpm: DEFAULT_BPM,
        }
    }
}

impl Graph {
    pub fn new(sample_rate: f64, block_size: usize, bpm: f64) -> Result<Self, GraphError> {
        let mut g = Graph::default();
        g.set_sample_rate(sample_rate)?;
        g.set_block_size(block_size)?;
        g.set_bpm(bpm)?;
        Ok(g)
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn bpm(&self) -> f64 {
        self.bpm
    }

    /// Only allowed while no node owns audio at the old rate.
    pub fn set_sample_rate(&mut self, sample_rate: f64) -> Result<(), GraphError> {
        if !(sample_rate > 0.0 && sample_rate.is_finite()) {
            return Err(GraphError::InvalidSettings(format!("sample rate {sample_rate}")));
        }
        if let Some(node) = self
            .nodes
            .iter()
            .find(|n| n.processor.source_sample_rate().is_some_and(|sr| sr != sample_rate))
        {
            return Err(GraphError::RateMismatch {
                node: node.name.clone(),
                expected: sample_rate,
                found: node.processor.source_sample_rate().unwrap_or(0.0),
            });
        }
        self.sample_rate = sample_rate;
        Ok(())
    }

    pub fn set_block_size(&mut self, block_size: usize) -> Result<(), GraphError> {
        if block_size == 0 {
            return Err(GraphError::InvalidSettings("block size must be at least 1".into()));
        }
        self.block_size = block_size;
        Ok(())
    }

    pub fn set_bpm(&mut self, bpm: f64) -> Result<(), GraphError> {
        if !(bpm > 0.0 && bpm.is_finite()) {
            return Err(GraphError::InvalidSettings(format!("bpm {bpm}")));
        }
        self.bpm = bpm;
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, name: &str) -> Option<&Node> {
        self.index.get(name).map(|&i| &self.nodes[i])
    }

    pub fn node_id(&self, name: &str) -> Option<NodeId> {
        self.index.get(name).copied().map(NodeId)
    }

    pub fn node_name(&self, id: NodeId) -> &str {
        &self.nodes[id.0].name
    }

    /// Input names of `node`, in input order.
    pub fn input_names(&self, name: &str) -> Option<Vec<&str>> {
        let node = self.node(name)?;
        Some(node.inputs.iter().map(|&i| self.nodes[i].name.as_str()).collect())
    }

    /// Append a node fed by already-present `inputs`, with optional initial
    /// parameter values. Recording starts disabled.
    pub fn add_node<P: Processor + 'static>(
        &mut self,
        name: &str,
        processor: P,
        inputs: &[&str],
        params: &[(&str, f64)],
    ) -> Result<NodeId, GraphError> {
        self.add_boxed(name, Box::new(processor), inputs, params)
    }

    pub fn add_boxed(
        &mut self,
        name: &str,
        processor: Box<dyn Processor>,
        inputs: &[&str],
        params: &[(&str, f64)],
    ) -> Result<NodeId, GraphError> {
        if self.index.contains_key(name) {
            return Err(GraphError::DuplicateName(name.to_string()));
        }
        let input_ids = self.resolve_inputs(name, inputs)?;
        check_arity(name, processor.as_ref(), input_ids.len())?;
        if let Some(found) = processor.source_sample_rate() {
            if found != self.sample_rate {
                return Err(GraphError::RateMismatch {
                    node: name.to_string(),
                    expected: self.sample_rate,
                    found,
                });
            }
        }

        let specs = processor.schema(input_ids.len());
        let values = specs.iter().map(|s| s.default).collect();
        let automation = vec![None; specs.len()];
        let mut node = Node {
            name: name.to_string(),
            processor,
            inputs: input_ids,
            specs,
            values,
            automation,
            record: false,
        };
        for &(param, value) in params {
            set_param_on(&mut node, param, value)?;
        }

        let id = self.nodes.len();
        self.index.insert(name.to_string(), id);
        self.nodes.push(node);
        Ok(NodeId(id))
    }

    /// Rewire an existing node. Inputs may reference any node, including ones
    /// added later, so this can introduce cycles that `compile` reports.
    pub fn set_inputs(&mut self, name: &str, inputs: &[&str]) -> Result<(), GraphError> {
        let id = self.lookup(name)?;
        let ids = self.resolve_inputs(name, inputs)?;
        let node = &self.nodes[id];
        check_arity(name, node.processor.as_ref(), ids.len())?;
        if ids.len() != node.inputs.len() {
            let specs = node.processor.schema(ids.len());
            let node = &mut self.nodes[id];
            let old: HashMap<String, (f64, Option<ControlSignal>)> = node
                .specs
                .iter()
                .zip(node.values.iter().zip(node.automation.iter()))
                .map(|(s, (v, a))| (s.name.clone(), (*v, a.clone())))
                .collect();
            node.values = specs
                .iter()
                .map(|s| old.get(&s.name).map_or(s.default, |o| o.0))
                .collect();
            node.automation = specs
                .iter()
                .map(|s| old.get(&s.name).and_then(|o| o.1.clone()))
                .collect();
            node.specs = specs;
        }
        self.nodes[id].inputs = ids;
        Ok(())
    }

    pub fn set_parameter(&mut self, node: &str, param: &str, value: f64) -> Result<(), GraphError> {
        let id = self.lookup(node)?;
        set_param_on(&mut self.nodes[id], param, value)
    }

    /// Attach a control signal; it overrides the scalar value while it lasts.
    pub fn set_automation(&mut self, node: &str, param: &str, signal: ControlSignal) -> Result<(), GraphError> {
        let id = self.lookup(node)?;
        let node = &mut self.nodes[id];
        let i = node.param_index(param)?;
        if !node.specs[i].automatable {
            return Err(GraphError::NotAutomatable {
                node: node.name.clone(),
                param: param.to_string(),
            });
        }
        node.automation[i] = Some(signal);
        Ok(())
    }

    pub fn clear_automation(&mut self, node: &str, param: &str) -> Result<(), GraphError> {
        let id = self.lookup(node)?;
        let node = &mut self.nodes[id];
        let i = node.param_index(param)?;
        node.automation[i] = None;
        Ok(())
    }

    pub fn set_record(&mut self, node: &str, flag: bool) -> Result<(), GraphError> {
        let id = self.lookup(node)?;
        self.nodes[id].record = flag;
        Ok(())
    }

    /// Hand a note sequence to an instrument node. With `beats_mode` the
    /// note times are read in beats and converted at the engine tempo.
    pub fn load_note_sequence(&mut self, node: &str, notes: &NoteSequence, beats_mode: bool) -> Result<(), GraphError> {
        let id = self.lookup(node)?;
        if self.nodes[id].processor.load_notes(notes, beats_mode) {
            Ok(())
        } else {
            Err(GraphError::NotAnInstrument(node.to_string()))
        }
    }

    /// Deterministic execution order: a topological order of the edges with
    /// ties broken by insertion order.
    pub fn compile(&self) -> Result<Vec<NodeId>, GraphError> {
        if self.nodes.is_empty() {
            return Err(GraphError::EmptyGraph);
        }
        let inputs: Vec<Vec<usize>> = self.nodes.iter().map(|n| n.inputs.clone()).collect();
        schedule::topological_order(&inputs)
            .map(|order| order.into_iter().map(NodeId).collect())
            .map_err(|cycle| GraphError::CycleDetected(cycle.into_iter().map(|i| self.nodes[i].name.clone()).collect()))
    }

    /// Number of frames a render of `duration_seconds` produces.
    pub fn frames_for(&self, duration_seconds: f64) -> Result<usize, GraphError> {
        if !(duration_seconds > 0.0 && duration_seconds.is_finite()) {
            return Err(GraphError::InvalidDuration(duration_seconds));
        }
        Ok((duration_seconds * self.sample_rate).ceil() as usize)
    }

    /// Render `duration_seconds` of audio in one pass, returning the output
    /// of every node whose record flag is set.
    pub fn render(&mut self, duration_seconds: f64) -> Result<RenderResult, GraphError> {
        let total = self.frames_for(duration_seconds)?;
        self.render_frames(total)
    }

    pub fn render_frames(&mut self, total_frames: usize) -> Result<RenderResult, GraphError> {
        let order = self.compile()?;
        let block_size = self.block_size;
        let ctx = RenderContext {
            sample_rate: self.sample_rate,
            block_size,
            bpm: self.bpm,
            total_frames,
        };

        // Channel counts follow the schedule.
        let mut channels = vec![0usize; self.nodes.len()];
        for &NodeId(i) in &order {
            let ins: Vec<usize> = self.nodes[i].inputs.iter().map(|&j| channels[j]).collect();
            channels[i] = self.nodes[i].processor.output_channels(&ins).max(1);
        }

        let mut lanes: Vec<ParamLanes> = self
            .nodes
            .iter()
            .map(|n| ParamLanes::new(n.specs.len(), block_size))
            .collect();
        let mut outputs: Vec<Vec<Vec<f64>>> = channels.iter().map(|&c| vec![vec![0.0; block_size]; c]).collect();
        let mut recordings: Vec<Option<Vec<Vec<f64>>>> = self
            .nodes
            .iter()
            .zip(&channels)
            .map(|(n, &c)| n.record.then(|| vec![Vec::with_capacity(total_frames); c]))
            .collect();

        for &NodeId(i) in &order {
            let node = &mut self.nodes[i];
            node.processor.prepare(&ctx, &node.values);
        }

        let mut start = 0;
        while start < total_frames {
            let len = block_size.min(total_frames - start);
            for &NodeId(i) in &order {
                let node = &mut self.nodes[i];
                lanes[i].fill(&node.specs, &node.values, &node.automation, start, len);

                let mut out = std::mem::take(&mut outputs[i]);
                {
                    let ins: Vec<&[Vec<f64>]> = node.inputs.iter().map(|&j| outputs[j].as_slice()).collect();
                    node.processor.process(ProcessBlock {
                        inputs: &ins,
                        params: &lanes[i],
                        output: &mut out,
                        start_frame: start,
                        len,
                    });
                }
                if let Some(rec) = &mut recordings[i] {
                    for (dst, src) in rec.iter_mut().zip(&out) {
                        dst.extend_from_slice(&src[..len]);
                    }
                }
                outputs[i] = out;
            }
            start += len;
        }

        let mut buffers = BTreeMap::new();
        for (i, rec) in recordings.into_iter().enumerate() {
            if let Some(chs) = rec {
                let buffer =
                    AudioBuffer::from_channels(chs, self.sample_rate).expect("recorded channels share length and rate");
                buffers.insert(self.nodes[i].name.clone(), buffer);
            }
        }
        Ok(RenderResult { buffers })
    }

    fn lookup(&self, name: &str) -> Result<usize, GraphError> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| GraphError::UnknownNode(name.to_string()))
    }

    fn resolve_inputs(&self, node: &str, inputs: &[&str]) -> Result<Vec<usize>, GraphError> {
        inputs
            .iter()
            .map(|input| {
                self.index.get(*input).copied().ok_or_else(|| GraphError::UnknownInput {
                    node: node.to_string(),
                    input: input.to_string(),
                })
            })
            .collect()
    }
}

fn check_arity(name: &str, processor: &dyn Processor, got: usize) -> Result<(), GraphError> {
    let arity = processor.arity();
    if arity.accepts(got) {
        return Ok(());
    }
    if got == 0 {
        return Err(GraphError::NoInputs(name.to_string()));
    }
    Err(GraphError::ArityMismatch {
        node: name.to_string(),
        kind: processor.kind().to_string(),
        got,
        min: arity.min,
        max: arity.max,
    })
}

fn set_param_on(node: &mut Node, param: &str, value: f64) -> Result<(), GraphError> {
    let i = node.param_index(param)?;
    let spec = &node.specs[i];
    if !spec.contains(value) {
        return Err(GraphError::OutOfRange {
            node: node.name.clone(),
            param: param.to_string(),
            value,
            min: spec.min,
            max: spec.max,
        });
    }
    node.values[i] = value;
    Ok(())
}
