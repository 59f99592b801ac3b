//! JSON project files: loading into a [`Graph`], dumping back, and the
//! operations behind the `dawkit` command-line tool.

pub mod commands;
pub mod pair;
mod schema;

pub use schema::{AssetSpec, AutomationSpec, ClipSpec, MidiSpec, NodeSpec, NoteSpec, NotesSpec, ProjectFile, WarpRef};

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::audio_io::{load_wav_file, read_wav, resample, AudioFileError};
use crate::buffer::AudioBuffer;
use crate::graph::{ControlSignal, Graph, GraphError, RenderResult};
use crate::instruments::{Sampler, WavetableSynth};
use crate::midi::{parse_smf, NoteEvent, NoteSequence};
use crate::processors::{Add, Biquad, Compressor, Gain, Oscillator, Playback, Processor};
use crate::warp::{load_sidecar_file, sidecar_path, ClipInfo, PlaybackWarp, TimelinePlacement};

#[derive(Debug, Error)]
pub enum ProjectError {
    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}:{line}:{column}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{}{message}", location(.node, .line))]
    Validation {
        node: Option<String>,
        line: Option<usize>,
        message: String,
    },
    /// A file referenced by a node could not be read.
    #[error("{}{message}", location(.node, .line))]
    MissingFile {
        node: Option<String>,
        line: Option<usize>,
        message: String,
    },
}

fn location(node: &Option<String>, line: &Option<usize>) -> String {
    match (node, line) {
        (Some(n), Some(l)) => format!("node `{n}` (line {l}): "),
        (Some(n), None) => format!("node `{n}`: "),
        (None, Some(l)) => format!("line {l}: "),
        (None, None) => String::new(),
    }
}

impl ProjectError {
    /// 1 for invalid input, 2 for I/O failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            ProjectError::Io { .. } | ProjectError::MissingFile { .. } => 2,
            _ => 1,
        }
    }
}

/// Command-line replacements for project settings.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub sample_rate: Option<f64>,
    pub block_size: Option<usize>,
}

/// A project turned into a ready-to-render graph.
pub struct LoadedProject {
    pub graph: Graph,
    pub duration_seconds: f64,
    /// The parsed file with overrides applied.
    pub file: ProjectFile,
    pub warnings: Vec<String>,
}

impl std::fmt::Debug for LoadedProject {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LoadedProject")
            .field("nodes", &self.graph.len())
            .field("duration_seconds", &self.duration_seconds)
            .field("warnings", &self.warnings)
            .finish()
    }
}

impl LoadedProject {
    pub fn render(&mut self) -> Result<RenderResult, GraphError> {
        self.graph.render(self.duration_seconds)
    }

    /// Describe the current graph as a project file. Parameters equal to
    /// their defaults are omitted and automation is written inline.
    pub fn dump(&self) -> ProjectFile {
        let originals: BTreeMap<&str, &NodeSpec> = self.file.nodes.iter().map(|n| (n.name.as_str(), n)).collect();
        let nodes = self
            .graph
            .nodes()
            .iter()
            .map(|node| {
                let mut spec = match originals.get(node.name()) {
                    Some(orig) => NodeSpec {
                        inputs: Vec::new(),
                        params: BTreeMap::new(),
                        automation: BTreeMap::new(),
                        ..(*orig).clone()
                    },
                    None => NodeSpec::new(node.name(), node.kind()),
                };
                spec.kind = node.kind().to_string();
                spec.inputs = node
                    .input_ids()
                    .iter()
                    .map(|&i| self.graph.nodes()[i].name().to_string())
                    .collect();
                for (s, &v) in node.param_specs().iter().zip(node.param_values()) {
                    if v != s.default {
                        spec.params.insert(s.name.clone(), v);
                    }
                    if let Some(a) = node.automation(&s.name) {
                        spec.automation.insert(
                            s.name.clone(),
                            AutomationSpec::Inline {
                                values: a.values().to_vec(),
                                hold_last: a.hold_last(),
                            },
                        );
                    }
                }
                spec.record = node.record();
                spec
            })
            .collect();
        ProjectFile {
            sample_rate: self.graph.sample_rate(),
            block_size: self.graph.block_size(),
            bpm: self.graph.bpm(),
            duration_seconds: self.duration_seconds,
            assets: self.file.assets.clone(),
            nodes,
        }
    }
}

/// Parse a project from text; `path` is only used in messages.
pub fn parse_project(text: &str, path: &Path) -> Result<ProjectFile, ProjectError> {
    serde_json::from_str(text).map_err(|e| ProjectError::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

/// Read, validate and build a project. Relative paths inside the file are
/// resolved against the file's directory.
pub fn load_project(path: &Path, overrides: Overrides) -> Result<LoadedProject, ProjectError> {
    let text = std::fs::read_to_string(path).map_err(|source| ProjectError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let file = parse_project(&text, path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    build_project(file, base, overrides, Some(&text))
}

/// Build a parsed project. `source_text`, when given, supplies line numbers
/// for node errors.
pub fn build_project(
    mut file: ProjectFile,
    base_dir: &Path,
    overrides: Overrides,
    source_text: Option<&str>,
) -> Result<LoadedProject, ProjectError> {
    if let Some(sr) = overrides.sample_rate {
        file.sample_rate = sr;
    }
    if let Some(block) = overrides.block_size {
        file.block_size = block;
    }
    let settings_err = |message: String| ProjectError::Validation {
        node: None,
        line: None,
        message,
    };
    let mut graph = Graph::new(file.sample_rate, file.block_size, file.bpm).map_err(|e| settings_err(e.to_string()))?;
    if !(file.duration_seconds > 0.0 && file.duration_seconds.is_finite()) {
        return Err(settings_err(format!(
            "duration_seconds must be positive, got {}",
            file.duration_seconds
        )));
    }

    let mut builder = Builder {
        file: &file,
        base: base_dir,
        text: source_text,
        assets: BTreeMap::new(),
        warnings: Vec::new(),
    };
    for spec in declaration_order(&file.nodes).map_err(|(node, message)| builder.err(&node, message))? {
        builder.add(&mut graph, spec)?;
    }
    graph.compile().map_err(|e| settings_err(e.to_string()))?;
    let warnings = builder.warnings;
    Ok(LoadedProject {
        graph,
        duration_seconds: file.duration_seconds,
        file,
        warnings,
    })
}

/// Nodes in declaration order, except that a node naming a later node as
/// input is moved after it. Unknown inputs and cycles are reported against
/// the first node involved.
fn declaration_order(nodes: &[NodeSpec]) -> Result<Vec<&NodeSpec>, (String, String)> {
    let index: BTreeMap<&str, usize> = nodes.iter().enumerate().map(|(i, n)| (n.name.as_str(), i)).collect();
    for n in nodes {
        if let Some(missing) = n.inputs.iter().find(|i| !index.contains_key(i.as_str())) {
            return Err((
                n.name.clone(),
                GraphError::UnknownInput {
                    node: n.name.clone(),
                    input: missing.clone(),
                }
                .to_string(),
            ));
        }
    }
    let mut placed = vec![false; nodes.len()];
    let mut order = Vec::with_capacity(nodes.len());
    while order.len() < nodes.len() {
        let before = order.len();
        for (i, n) in nodes.iter().enumerate() {
            let ready = n.inputs.iter().all(|inp| placed[index[inp.as_str()]]);
            if !placed[i] && ready {
                placed[i] = true;
                order.push(n);
            }
        }
        if order.len() == before {
            let stuck: Vec<usize> = (0..nodes.len()).filter(|&i| !placed[i]).collect();
            let cycle = find_cycle(nodes, &index, &placed, stuck[0]);
            let first = cycle[0].clone();
            return Err((first, GraphError::CycleDetected(cycle).to_string()));
        }
    }
    Ok(order)
}

/// Follow unplaced inputs from `start` until a node repeats.
fn find_cycle(nodes: &[NodeSpec], index: &BTreeMap<&str, usize>, placed: &[bool], start: usize) -> Vec<String> {
    let mut path = vec![start];
    loop {
        let cur = *path.last().unwrap();
        let next = nodes[cur]
            .inputs
            .iter()
            .map(|i| index[i.as_str()])
            .find(|&j| !placed[j])
            .expect("an unplaced node has an unplaced input");
        if let Some(pos) = path.iter().position(|&p| p == next) {
            return path[pos..].iter().map(|&i| nodes[i].name.clone()).collect();
        }
        path.push(next);
    }
}

struct Builder<'a> {
    file: &'a ProjectFile,
    base: &'a Path,
    text: Option<&'a str>,
    assets: BTreeMap<String, AudioBuffer>,
    warnings: Vec<String>,
}

impl Builder<'_> {
    fn err(&self, node: &str, message: impl Into<String>) -> ProjectError {
        ProjectError::Validation {
            node: Some(node.to_string()),
            line: self.text.and_then(|t| node_line(t, node)),
            message: message.into(),
        }
    }

    fn missing(&self, node: &str, message: impl Into<String>) -> ProjectError {
        ProjectError::MissingFile {
            node: Some(node.to_string()),
            line: self.text.and_then(|t| node_line(t, node)),
            message: message.into(),
        }
    }

    fn graph_err(&self, node: &str, e: GraphError) -> ProjectError {
        self.err(node, e.to_string())
    }

    fn resolve(&self, path: &str) -> PathBuf {
        self.base.join(path)
    }

    fn asset(&mut self, node: &str, name: &str) -> Result<AudioBuffer, ProjectError> {
        if let Some(b) = self.assets.get(name) {
            return Ok(b.clone());
        }
        let spec = self
            .file
            .assets
            .get(name)
            .ok_or_else(|| self.err(node, format!("unknown asset `{name}`")))?;
        let rate = self.file.sample_rate;
        let buffer = match (&spec.path, &spec.data) {
            (Some(path), None) => {
                let full = self.resolve(path);
                if !full.is_file() {
                    return Err(self.missing(node, format!("asset `{name}`: missing audio file {}", full.display())));
                }
                load_wav_file(&full, rate).map_err(|e| match e {
                    AudioFileError::Io { .. } => self.missing(node, format!("asset `{name}`: {e}")),
                    AudioFileError::Wav { .. } => self.err(node, format!("asset `{name}`: {e}")),
                })?
            }
            (None, Some(data)) => {
                let source_rate = spec.sample_rate.unwrap_or(rate);
                let b = AudioBuffer::from_channels(data.clone(), source_rate)
                    .map_err(|e| self.err(node, format!("asset `{name}`: {e}")))?;
                if b.frames() == 0 {
                    return Err(self.err(node, format!("asset `{name}` is empty")));
                }
                resample(&b, rate)
            }
            _ => return Err(self.err(node, format!("asset `{name}` needs exactly one of `path` and `data`"))),
        };
        self.assets.insert(name.to_string(), buffer.clone());
        Ok(buffer)
    }

    fn required_asset(&mut self, spec: &NodeSpec) -> Result<(String, AudioBuffer), ProjectError> {
        let name = spec
            .asset
            .clone()
            .ok_or_else(|| self.err(&spec.name, format!("kind `{}` needs an `asset`", spec.kind)))?;
        let buffer = self.asset(&spec.name, &name)?;
        Ok((name, buffer))
    }

    fn wavetable(&mut self, spec: &NodeSpec) -> Result<Vec<f64>, ProjectError> {
        if let Some(t) = &spec.table {
            return Ok(t.clone());
        }
        let Some(name) = &spec.asset else {
            return Err(self.err(&spec.name, "wavetable_synth needs a `table` or an `asset`"));
        };
        let asset = self
            .file
            .assets
            .get(name)
            .ok_or_else(|| self.err(&spec.name, format!("unknown asset `{name}`")))?;
        // A single-cycle table keeps its length: no rate conversion.
        match (&asset.path, &asset.data) {
            (Some(path), _) => {
                let full = self.resolve(path);
                let bytes = std::fs::read(&full)
                    .map_err(|_| self.missing(&spec.name, format!("missing audio file {}", full.display())))?;
                let (b, _) = read_wav(&bytes).map_err(|e| {
                    let e = AudioFileError::Wav {
                        path: full.display().to_string(),
                        source: e,
                    };
                    self.err(&spec.name, e.to_string())
                })?;
                Ok(b.channel(0).to_vec())
            }
            (None, Some(data)) if !data.is_empty() => Ok(data[0].clone()),
            _ => Err(self.err(&spec.name, format!("asset `{name}` has no samples"))),
        }
    }

    fn clip(&self, spec: &NodeSpec, asset_name: &str, audio: &AudioBuffer) -> Result<ClipInfo, ProjectError> {
        let clip_spec = spec.clip.clone().unwrap_or_default();
        let seconds = Some(audio.duration_seconds());
        let warp_err = |e: crate::warp::WarpError| self.err(&spec.name, format!("warp metadata: {e}"));
        if let Some(w) = &clip_spec.warp {
            return w.to_clip(seconds).map_err(warp_err);
        }
        if let Some(bpm) = clip_spec.source_bpm {
            return ClipInfo::constant_tempo(bpm, audio.duration_seconds()).map_err(warp_err);
        }
        let asset = &self.file.assets[asset_name];
        match &asset.warp {
            Some(WarpRef::Inline(w)) => return w.to_clip(seconds).map_err(warp_err),
            Some(WarpRef::Path(p)) => {
                let full = self.resolve(p);
                if !full.is_file() {
                    return Err(self.missing(&spec.name, format!("missing warp file {}", full.display())));
                }
                return load_sidecar_file(&full, seconds).map_err(warp_err);
            }
            None => {}
        }
        if let Some(path) = &asset.path {
            let sidecar = sidecar_path(&self.resolve(path));
            if sidecar.is_file() {
                return load_sidecar_file(&sidecar, seconds).map_err(warp_err);
            }
        }
        Err(self.err(&spec.name, "playback_warp needs warp metadata or `clip.source_bpm`"))
    }

    fn processor(&mut self, spec: &NodeSpec) -> Result<Box<dyn Processor>, ProjectError> {
        Ok(match spec.kind.as_str() {
            "oscillator" => Box::new(Oscillator::new()),
            "gain" => Box::new(Gain::new()),
            "add" => Box::new(Add::new()),
            "biquad" => Box::new(Biquad::new()),
            "compressor" => Box::new(Compressor::new()),
            "playback" => Box::new(Playback::new(self.required_asset(spec)?.1)),
            "sampler" => Box::new(Sampler::new(self.required_asset(spec)?.1)),
            "wavetable_synth" => {
                let table = self.wavetable(spec)?;
                let len = table.len();
                Box::new(
                    WavetableSynth::new(table)
                        .ok_or_else(|| self.err(&spec.name, format!("wavetable has {len} frames, need at least 4")))?,
                )
            }
            "playback_warp" => {
                let (asset_name, audio) = self.required_asset(spec)?;
                let clip = self.clip(spec, &asset_name, &audio)?;
                let c = spec.clip.clone().unwrap_or_default();
                let placement = TimelinePlacement::new(c.at_beats, c.transpose_semitones)
                    .map_err(|e| self.err(&spec.name, e.to_string()))?;
                Box::new(PlaybackWarp::new(audio, clip, placement).map_err(|e| self.err(&spec.name, e.to_string()))?)
            }
            other => return Err(self.err(&spec.name, format!("unknown processor kind `{other}`"))),
        })
    }

    fn add(&mut self, graph: &mut Graph, spec: &NodeSpec) -> Result<(), ProjectError> {
        let processor = self.processor(spec)?;
        let inputs: Vec<&str> = spec.inputs.iter().map(String::as_str).collect();
        let params: Vec<(&str, f64)> = spec.params.iter().map(|(k, &v)| (k.as_str(), v)).collect();
        graph
            .add_boxed(&spec.name, processor, &inputs, &params)
            .map_err(|e| self.graph_err(&spec.name, e))?;
        for (param, a) in &spec.automation {
            let signal = self.automation(&spec.name, param, a)?;
            graph
                .set_automation(&spec.name, param, signal)
                .map_err(|e| self.graph_err(&spec.name, e))?;
        }
        graph
            .set_record(&spec.name, spec.record)
            .map_err(|e| self.graph_err(&spec.name, e))?;

        if spec.midi.is_some() && spec.notes.is_some() {
            return Err(self.err(&spec.name, "give either `midi` or `notes`, not both"));
        }
        let notes = if let Some(midi) = &spec.midi {
            let path = self.resolve(&midi.path);
            let bytes = std::fs::read(&path)
                .map_err(|_| self.missing(&spec.name, format!("missing MIDI file {}", path.display())))?;
            let smf = parse_smf(&bytes).map_err(|e| self.err(&spec.name, format!("{}: {e}", path.display())))?;
            for w in &smf.warnings {
                self.warnings.push(format!("{}: {w}", path.display()));
            }
            Some((smf.notes, midi.beats_mode))
        } else if let Some(notes) = &spec.notes {
            Some((self.inline_notes(&spec.name, notes)?, notes.beats_mode))
        } else {
            None
        };
        if let Some((seq, beats_mode)) = notes {
            graph
                .load_note_sequence(&spec.name, &seq, beats_mode)
                .map_err(|e| self.graph_err(&spec.name, e))?;
        }
        Ok(())
    }

    fn inline_notes(&self, node: &str, notes: &NotesSpec) -> Result<NoteSequence, ProjectError> {
        let mut events = Vec::with_capacity(notes.events.len());
        for (i, n) in notes.events.iter().enumerate() {
            if n.note > 127 || !(1..=127).contains(&n.velocity) {
                return Err(self.err(node, format!("note {i}: pitch 0-127 and velocity 1-127 required")));
            }
            if !(n.start >= 0.0 && n.start.is_finite() && n.duration > 0.0 && n.duration.is_finite()) {
                return Err(self.err(node, format!("note {i}: start must be >= 0 and duration > 0")));
            }
            events.push(if notes.beats_mode {
                NoteEvent::beats(n.note, n.velocity, n.start, n.duration)
            } else {
                NoteEvent::seconds(n.note, n.velocity, n.start, n.duration)
            });
        }
        Ok(NoteSequence::new(events))
    }

    fn automation(&self, node: &str, param: &str, spec: &AutomationSpec) -> Result<ControlSignal, ProjectError> {
        let (values, hold_last) = match spec {
            AutomationSpec::Inline { values, hold_last } => (values.clone(), *hold_last),
            AutomationSpec::File { file, hold_last } => {
                let path = self.resolve(file);
                let bytes = std::fs::read(&path)
                    .map_err(|_| self.missing(node, format!("missing automation file {}", path.display())))?;
                if bytes.len() % 4 != 0 {
                    return Err(self.err(node, format!("{}: length is not a multiple of 4 bytes", path.display())));
                }
                let values = bytes
                    .chunks_exact(4)
                    .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
                    .collect();
                (values, *hold_last)
            }
        };
        if values.iter().any(|v| !v.is_finite()) {
            return Err(self.err(node, format!("automation of `{param}` contains non-finite values")));
        }
        ControlSignal::new(values, hold_last).ok_or_else(|| self.err(node, format!("automation of `{param}` is empty")))
    }
}

/// Line (1-based) of the `"name": "<node>"` entry in a project text.
fn node_line(text: &str, node: &str) -> Option<usize> {
    let quoted = serde_json::to_string(node).ok()?;
    text.lines().enumerate().find_map(|(i, line)| {
        let at = line.find("\"name\"")?;
        let rest = line[at + 6..].trim_start().strip_prefix(':')?.trim_start();
        rest.starts_with(&quoted).then_some(i + 1)
    })
}
