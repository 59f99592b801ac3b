//! Serialized project layout.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::graph::{DEFAULT_BLOCK_SIZE, DEFAULT_BPM, DEFAULT_SAMPLE_RATE};
use crate::warp::WarpSidecar;

fn default_sample_rate() -> f64 {
    DEFAULT_SAMPLE_RATE
}

fn default_block_size() -> usize {
    DEFAULT_BLOCK_SIZE
}

fn default_bpm() -> f64 {
    DEFAULT_BPM
}

fn default_true() -> bool {
    true
}

fn is_false(b: &bool) -> bool {
    !*b
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectFile {
    #[serde(default = "default_sample_rate")]
    pub sample_rate: f64,
    #[serde(default = "default_block_size")]
    pub block_size: usize,
    #[serde(default = "default_bpm")]
    pub bpm: f64,
    pub duration_seconds: f64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub assets: BTreeMap<String, AssetSpec>,
    pub nodes: Vec<NodeSpec>,
}

impl ProjectFile {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("project serializes")
    }
}

/// Audio material: a WAV file or inline channels.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssetSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    /// Inline samples, one array per channel.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<Vec<Vec<f64>>>,
    /// Rate of the inline samples; defaults to the engine rate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warp: Option<WarpRef>,
}

/// Warp metadata for an asset: a sidecar path or the sidecar contents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WarpRef {
    Path(String),
    Inline(WarpSidecar),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeSpec {
    pub name: String,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub inputs: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub automation: BTreeMap<String, AutomationSpec>,
    #[serde(default, skip_serializing_if = "is_false")]
    pub record: bool,
    /// Asset played by `playback`, `playback_warp` and `sampler`, or the
    /// single-cycle table of `wavetable_synth` (first channel).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub asset: Option<String>,
    /// Inline wavetable.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub midi: Option<MidiSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<NotesSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clip: Option<ClipSpec>,
}

impl NodeSpec {
    pub fn new(name: &str, kind: &str) -> Self {
        Self {
            name: name.to_string(),
            kind: kind.to_string(),
            inputs: Vec::new(),
            params: BTreeMap::new(),
            automation: BTreeMap::new(),
            record: false,
            asset: None,
            table: None,
            midi: None,
            notes: None,
            clip: None,
        }
    }
}

/// Automation values inline or in a raw little-endian `f32` file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AutomationSpec {
    Inline {
        values: Vec<f64>,
        #[serde(default = "default_true")]
        hold_last: bool,
    },
    File {
        file: String,
        #[serde(default = "default_true")]
        hold_last: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MidiSpec {
    pub path: String,
    #[serde(default, skip_serializing_if = "is_false")]
    pub beats_mode: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NotesSpec {
    #[serde(default, skip_serializing_if = "is_false")]
    pub beats_mode: bool,
    pub events: Vec<NoteSpec>,
}

/// `start` and `duration` are seconds, or beats in beats mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoteSpec {
    pub note: u8,
    pub velocity: u8,
    pub start: f64,
    pub duration: f64,
}

/// Placement of a `playback_warp` clip. Warp metadata comes from `warp`,
/// else a constant tempo of `source_bpm` from the start of the audio, else
/// the asset's `warp`, else `<audio>.warp.json` next to the audio file.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClipSpec {
    #[serde(default, skip_serializing_if = "is_zero")]
    pub at_beats: f64,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub transpose_semitones: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_bpm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warp: Option<WarpSidecar>,
}
