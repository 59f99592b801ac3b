//! C ABI for the dawkit engine.
//!
//! Graphs and render results are opaque handles owned by the caller and
//! released with the matching `*_free` function. Every fallible call returns
//! a [`DawStatus`]; on failure [`daw_last_error`] describes the problem on
//! the calling thread. Strings are NUL-terminated UTF-8. Audio crosses the
//! boundary planar: an array of `channels` pointers to `frames` doubles each.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use dawkit::graph::{ControlSignal, Graph, GraphError, RenderResult};
use dawkit::instruments::{Sampler, WavetableSynth};
use dawkit::midi::{parse_smf, NoteEvent, NoteSequence};
use dawkit::processors::{Add, Biquad, Compressor, Gain, Oscillator, Playback, Processor};
use dawkit::project::pair::{key_circle_distance, pair_distance, Key, StemDescriptor, Weights};
use dawkit::project::{load_project, Overrides};
use dawkit::warp::{ClipInfo, PlaybackWarp, TimelinePlacement, WarpMarker};
use dawkit::AudioBuffer;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DawStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    DuplicateName = 4,
    UnknownInput = 5,
    UnknownNode = 6,
    ArityMismatch = 7,
    CycleDetected = 8,
    UnknownParameter = 9,
    OutOfRange = 10,
    NotAutomatable = 11,
    NotAnInstrument = 12,
    RateMismatch = 13,
    InvalidDuration = 14,
    EmptyGraph = 15,
    UnknownKind = 16,
    ParseError = 17,
    ValidationError = 18,
    IoError = 19,
    BufferTooSmall = 20,
    Panic = 99,
}

/// Opaque processor graph.
pub struct DawGraph {
    graph: Graph,
}

/// Opaque set of recorded buffers from one render.
pub struct DawRenderResult {
    names: Vec<CString>,
    buffers: Vec<AudioBuffer>,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct DawNote {
    pub note: u8,
    pub velocity: u8,
    /// Seconds, or beats when loaded in beats mode.
    pub start: f64,
    pub duration: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct DawWarpMarker {
    pub seconds: f64,
    pub beats: f64,
}

/// Clip region and placement for `daw_graph_add_playback_warp`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct DawClip {
    pub source_bpm: f64,
    pub start_marker: f64,
    pub end_marker: f64,
    pub loop_start: f64,
    pub loop_end: f64,
    pub loop_on: bool,
    pub warp_on: bool,
    pub at_beats: f64,
    pub transpose_semitones: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).unwrap_or_default());
}

struct Failure(DawStatus, String);

impl From<GraphError> for Failure {
    fn from(e: GraphError) -> Self {
        let status = match &e {
            GraphError::DuplicateName(_) => DawStatus::DuplicateName,
            GraphError::UnknownInput { .. } => DawStatus::UnknownInput,
            GraphError::UnknownNode(_) => DawStatus::UnknownNode,
            GraphError::ArityMismatch { .. } | GraphError::NoInputs(_) => DawStatus::ArityMismatch,
            GraphError::CycleDetected(_) => DawStatus::CycleDetected,
            GraphError::UnknownParameter { .. } => DawStatus::UnknownParameter,
            GraphError::OutOfRange { .. } => DawStatus::OutOfRange,
            GraphError::NotAutomatable { .. } => DawStatus::NotAutomatable,
            GraphError::NotAnInstrument(_) => DawStatus::NotAnInstrument,
            GraphError::RateMismatch { .. } => DawStatus::RateMismatch,
            GraphError::InvalidDuration(_) => DawStatus::InvalidDuration,
            GraphError::EmptyGraph => DawStatus::EmptyGraph,
            GraphError::InvalidSettings(_) => DawStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure(DawStatus::InvalidArgument, message.into())
}

/// Run `f`, translating failures and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> DawStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            DawStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic");
            DawStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(DawStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(DawStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn graph_mut<'a>(g: *mut DawGraph) -> Result<&'a mut Graph, Failure> {
    g.as_mut()
        .map(|g| &mut g.graph)
        .ok_or_else(|| Failure(DawStatus::NullArgument, "graph is null".into()))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure(DawStatus::NullArgument, format!("{what} is null")));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn planar(
    channels: *const *const f64,
    num_channels: usize,
    frames: usize,
    sample_rate: f64,
) -> Result<AudioBuffer, Failure> {
    let ptrs = slice(channels, num_channels, "channel array")?;
    let data = ptrs
        .iter()
        .map(|&p| slice(p, frames, "channel").map(<[f64]>::to_vec))
        .collect::<Result<Vec<_>, _>>()?;
    AudioBuffer::from_channels(data, sample_rate).map_err(|e| invalid(e.to_string()))
}

unsafe fn add_processor(
    g: *mut DawGraph,
    name: *const c_char,
    inputs: *const *const c_char,
    num_inputs: usize,
    processor: Box<dyn Processor>,
) -> Result<(), Failure> {
    let graph = graph_mut(g)?;
    let name = text(name, "name")?;
    let inputs = slice(inputs, num_inputs, "inputs")?
        .iter()
        .map(|&p| text(p, "input name"))
        .collect::<Result<Vec<_>, _>>()?;
    graph.add_boxed(name, processor, &inputs, &[])?;
    Ok(())
}

/// Message for the most recent failure on this thread; empty after a
/// success. Valid until the next call into this library on the thread.
#[no_mangle]
pub extern "C" fn daw_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Create an empty graph.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn daw_graph_new(
    sample_rate: f64,
    block_size: usize,
    bpm: f64,
    out: *mut *mut DawGraph,
) -> DawStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure(DawStatus::NullArgument, "out is null".into()));
        }
        let graph = Graph::new(sample_rate, block_size, bpm)?;
        *out = Box::into_raw(Box::new(DawGraph { graph }));
        Ok(())
    })
}

/// Build a graph from a JSON project file; `duration_out` receives the
/// project's render length in seconds.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` and `duration_out` must be
/// valid writable pointers.
#[no_mangle]
pub unsafe extern "C" fn daw_project_load(
    path: *const c_char,
    out: *mut *mut DawGraph,
    duration_out: *mut f64,
) -> DawStatus {
    guard(|| {
        let path = text(path, "path")?;
        if out.is_null() || duration_out.is_null() {
            return Err(Failure(DawStatus::NullArgument, "output pointer is null".into()));
        }
        let loaded = load_project(Path::new(path), Overrides::default()).map_err(|e| {
            let status = match e.exit_code() {
                2 => DawStatus::IoError,
                _ if matches!(e, dawkit::project::ProjectError::Parse { .. }) => DawStatus::ParseError,
                _ => DawStatus::ValidationError,
            };
            Failure(status, e.to_string())
        })?;
        *duration_out = loaded.duration_seconds;
        *out = Box::into_raw(Box::new(DawGraph { graph: loaded.graph }));
        Ok(())
    })
}

/// Release a graph. Null is ignored.
///
/// # Safety
/// `g` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn daw_graph_free(g: *mut DawGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Add a node of a kind that needs no audio material: `oscillator`,
/// `gain`, `add`, `biquad` or `compressor`.
///
/// # Safety
/// Strings must be NUL-terminated; `inputs` must hold `num_inputs` strings.
#[no_mangle]
pub unsafe extern "C" fn daw_graph_add_node(
    g: *mut DawGraph,
    kind: *const c_char,
    name: *const c_char,
    inputs: *const *const c_char,
    num_inputs: usize,
) -> DawStatus {
    guard(|| {
        let processor: Box<dyn Processor> = match text(kind, "kind")? {
            "oscillator" => Box::new(Oscillator::new()),
            "gain" => Box::new(Gain::new()),
            "add" => Box::new(Add::new()),
            "biquad" => Box::new(Biquad::new()),
            "compressor" => Box::new(Compressor::new()),
            other => {
                return Err(Failure(
                    DawStatus::UnknownKind,
                    format!("kind `{other}` is unknown or needs a dedicated constructor"),
                ))
            }
        };
        add_processor(g, name, inputs, num_inputs, processor)
    })
}

/// Add a `playback` node playing the given audio from frame 0.
///
/// # Safety
/// `channels` must point to `num_channels` arrays of `frames` doubles.
#[no_mangle]
pub unsafe extern "C" fn daw_graph_add_playback(
    g: *mut DawGraph,
    name: *const c_char,
    channels: *const *const f64,
    num_channels: usize,
    frames: usize,
    sample_rate: f64,
) -> DawStatus {
    guard(|| {
        let audio = planar(channels, num_channels, frames, sample_rate)?;
        add_processor(g, name, ptr::null(), 0, Box::new(Playback::new(audio)))
    })
}

/// Add a `sampler` instrument over the given sample.
///
/// # Safety
/// As for [`daw_graph_add_playback`].
#[no_mangle]
pub unsafe extern "C" fn daw_graph_add_sampler(
    g: *mut DawGraph,
    name: *const c_char,
    channels: *const *const f64,
    num_channels: usize,
    frames: usize,
    sample_rate: f64,
) -> DawStatus {
    guard(|| {
        let audio = planar(channels, num_channels, frames, sample_rate)?;
        add_processor(g, name, ptr::null(), 0, Box::new(Sampler::new(audio)))
    })
}

/// Add a `wavetable_synth` reading a single-cycle table of `len` ≥ 4.
///
/// # Safety
/// `table` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn daw_graph_add_wavetable(
    g: *mut DawGraph,
    name: *const c_char,
    table: *const f64,
    len: usize,
) -> DawStatus {
    guard(|| {
        let table = slice(table, len, "table")?.to_vec();
        let synth = WavetableSynth::new(table).ok_or_else(|| invalid("wavetable needs at least 4 frames"))?;
        add_processor(g, name, ptr::null(), 0, Box::new(synth))
    })
}

/// Add a `playback_warp` node. With `num_markers` = 0 the clip follows
/// `clip.source_bpm` from the start of the audio.
///
/// # Safety
/// Audio as for [`daw_graph_add_playback`]; `markers` must hold
/// `num_markers` entries; `clip` must be valid.
#[no_mangle]
pub unsafe extern "C" fn daw_graph_add_playback_warp(
    g: *mut DawGraph,
    name: *const c_char,
    channels: *const *const f64,
    num_channels: usize,
    frames: usize,
    sample_rate: f64,
    markers: *const DawWarpMarker,
    num_markers: usize,
    clip: *const DawClip,
) -> DawStatus {
    guard(|| {
        let audio = planar(channels, num_channels, frames, sample_rate)?;
        let c = clip
            .as_ref()
            .ok_or_else(|| Failure(DawStatus::NullArgument, "clip is null".into()))?;
        let warp_err = |e: dawkit::warp::WarpError| invalid(e.to_string());
        let mut info = if num_markers == 0 {
            ClipInfo::constant_tempo(c.source_bpm, audio.duration_seconds()).map_err(warp_err)?
        } else {
            let m = slice(markers, num_markers, "markers")?
                .iter()
                .map(|m| WarpMarker::new(m.seconds, m.beats))
                .collect();
            ClipInfo::new(m, c.source_bpm).map_err(warp_err)?
        };
        if num_markers != 0 {
            info.set_region(c.start_marker, c.end_marker).map_err(warp_err)?;
        }
        info.set_loop(c.loop_start, c.loop_end, c.loop_on).map_err(warp_err)?;
        info.warp_on = c.warp_on;
        let placement = TimelinePlacement::new(c.at_beats, c.transpose_semitones).map_err(warp_err)?;
        let p = PlaybackWarp::new(audio, info, placement).map_err(warp_err)?;
        add_processor(g, name, ptr::null(), 0, Box::new(p))
    })
}

/// Set a scalar parameter.
///
/// # Safety
/// Strings must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn daw_graph_set_param(
    g: *mut DawGraph,
    node: *const c_char,
    param: *const c_char,
    value: f64,
) -> DawStatus {
    guard(|| {
        let graph = graph_mut(g)?;
        graph.set_parameter(text(node, "node")?, text(param, "param")?, value)?;
        Ok(())
    })
}

/// Automate a parameter with one value per engine frame.
///
/// # Safety
/// Strings must be NUL-terminated; `values` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn daw_graph_set_automation(
    g: *mut DawGraph,
    node: *const c_char,
    param: *const c_char,
    values: *const f64,
    len: usize,
    hold_last: bool,
) -> DawStatus {
    guard(|| {
        let graph = graph_mut(g)?;
        let values = slice(values, len, "values")?.to_vec();
        let signal = ControlSignal::new(values, hold_last).ok_or_else(|| invalid("automation is empty"))?;
        graph.set_automation(text(node, "node")?, text(param, "param")?, signal)?;
        Ok(())
    })
}

/// Include or exclude a node from render results.
///
/// # Safety
/// `node` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn daw_graph_set_record(g: *mut DawGraph, node: *const c_char, record: bool) -> DawStatus {
    guard(|| {
        let graph = graph_mut(g)?;
        graph.set_record(text(node, "node")?, record)?;
        Ok(())
    })
}

/// Give an instrument its notes.
///
/// # Safety
/// `notes` must hold `len` entries.
#[no_mangle]
pub unsafe extern "C" fn daw_graph_load_notes(
    g: *mut DawGraph,
    node: *const c_char,
    notes: *const DawNote,
    len: usize,
    beats_mode: bool,
) -> DawStatus {
    guard(|| {
        let graph = graph_mut(g)?;
        let events = slice(notes, len, "notes")?
            .iter()
            .map(|n| {
                if beats_mode {
                    NoteEvent::beats(n.note, n.velocity, n.start, n.duration)
                } else {
                    NoteEvent::seconds(n.note, n.velocity, n.start, n.duration)
                }
            })
            .collect();
        graph.load_note_sequence(text(node, "node")?, &NoteSequence::new(events), beats_mode)?;
        Ok(())
    })
}

/// Give an instrument the notes of a Standard MIDI File held in memory.
///
/// # Safety
/// `bytes` must hold `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn daw_graph_load_smf(
    g: *mut DawGraph,
    node: *const c_char,
    bytes: *const u8,
    len: usize,
    beats_mode: bool,
) -> DawStatus {
    guard(|| {
        let graph = graph_mut(g)?;
        let smf = parse_smf(slice(bytes, len, "bytes")?).map_err(|e| Failure(DawStatus::ParseError, e.to_string()))?;
        graph.load_note_sequence(text(node, "node")?, &smf.notes, beats_mode)?;
        Ok(())
    })
}

/// Render `duration_seconds` and return the recorded buffers.
///
/// # Safety
/// `out` must be a valid writable pointer.
#[no_mangle]
pub unsafe extern "C" fn daw_graph_render(
    g: *mut DawGraph,
    duration_seconds: f64,
    out: *mut *mut DawRenderResult,
) -> DawStatus {
    guard(|| {
        let graph = graph_mut(g)?;
        if out.is_null() {
            return Err(Failure(DawStatus::NullArgument, "out is null".into()));
        }
        let result: RenderResult = graph.render(duration_seconds)?;
        let (names, buffers) = result
            .into_map()
            .into_iter()
            .map(|(n, b)| (CString::new(n).unwrap_or_default(), b))
            .unzip();
        *out = Box::into_raw(Box::new(DawRenderResult { names, buffers }));
        Ok(())
    })
}

/// Release a render result. Null is ignored.
///
/// # Safety
/// `r` must come from [`daw_graph_render`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn daw_result_free(r: *mut DawRenderResult) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Number of recorded buffers (0 for null).
///
/// # Safety
/// `r` must be null or a live result.
#[no_mangle]
pub unsafe extern "C" fn daw_result_count(r: *const DawRenderResult) -> usize {
    r.as_ref().map_or(0, |r| r.buffers.len())
}

/// Name of buffer `index` (sorted by name), or null when out of range.
/// The string lives as long as the result.
///
/// # Safety
/// `r` must be null or a live result.
#[no_mangle]
pub unsafe extern "C" fn daw_result_name(r: *const DawRenderResult, index: usize) -> *const c_char {
    r.as_ref()
        .and_then(|r| r.names.get(index))
        .map_or(ptr::null(), |n| n.as_ptr())
}

/// Channel and frame counts of buffer `index`.
///
/// # Safety
/// `r` must be null or a live result; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn daw_result_shape(
    r: *const DawRenderResult,
    index: usize,
    channels_out: *mut usize,
    frames_out: *mut usize,
) -> DawStatus {
    guard(|| {
        let r = r
            .as_ref()
            .ok_or_else(|| Failure(DawStatus::NullArgument, "result is null".into()))?;
        let b = r
            .buffers
            .get(index)
            .ok_or_else(|| invalid(format!("no buffer {index}")))?;
        if channels_out.is_null() || frames_out.is_null() {
            return Err(Failure(DawStatus::NullArgument, "output pointer is null".into()));
        }
        *channels_out = b.num_channels();
        *frames_out = b.frames();
        Ok(())
    })
}

/// Copy one channel of buffer `index` into `dst`, which holds `capacity`
/// doubles and must fit the whole channel.
///
/// # Safety
/// `r` must be null or a live result; `dst` must hold `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn daw_result_copy_channel(
    r: *const DawRenderResult,
    index: usize,
    channel: usize,
    dst: *mut f64,
    capacity: usize,
) -> DawStatus {
    guard(|| {
        let r = r
            .as_ref()
            .ok_or_else(|| Failure(DawStatus::NullArgument, "result is null".into()))?;
        let b = r
            .buffers
            .get(index)
            .ok_or_else(|| invalid(format!("no buffer {index}")))?;
        if channel >= b.num_channels() {
            return Err(invalid(format!("no channel {channel}")));
        }
        if capacity < b.frames() {
            return Err(Failure(
                DawStatus::BufferTooSmall,
                format!("need {} frames, capacity {capacity}", b.frames()),
            ));
        }
        if dst.is_null() {
            return Err(Failure(DawStatus::NullArgument, "dst is null".into()));
        }
        ptr::copy_nonoverlapping(b.channel(channel).as_ptr(), dst, b.frames());
        Ok(())
    })
}

/// Circle-of-fifths distance (0-6) between two keys such as `"Gmaj"`.
///
/// # Safety
/// Strings must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn daw_key_circle_distance(a: *const c_char, b: *const c_char, out: *mut u8) -> DawStatus {
    guard(|| {
        let ka: Key = text(a, "key a")?
            .parse()
            .map_err(|e: dawkit::project::pair::PairError| invalid(e.to_string()))?;
        let kb: Key = text(b, "key b")?
            .parse()
            .map_err(|e: dawkit::project::pair::PairError| invalid(e.to_string()))?;
        if out.is_null() {
            return Err(Failure(DawStatus::NullArgument, "out is null".into()));
        }
        *out = key_circle_distance(ka, kb);
        Ok(())
    })
}

/// Tempo/key pairing distance between two stems.
///
/// # Safety
/// Strings must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn daw_pair_distance(
    bpm_a: f64,
    key_a: *const c_char,
    bpm_b: f64,
    key_b: *const c_char,
    w_tempo: f64,
    w_key: f64,
    out: *mut f64,
) -> DawStatus {
    guard(|| {
        let stem = |bpm: f64, key: *const c_char, what: &str| -> Result<StemDescriptor, Failure> {
            if !(bpm > 0.0 && bpm.is_finite()) {
                return Err(invalid(format!("{what} bpm must be positive")));
            }
            let key = text(key, what)?
                .parse()
                .map_err(|e: dawkit::project::pair::PairError| invalid(e.to_string()))?;
            Ok(StemDescriptor {
                path: String::new(),
                bpm,
                key,
                role: None,
            })
        };
        let a = stem(bpm_a, key_a, "key a")?;
        let b = stem(bpm_b, key_b, "key b")?;
        if out.is_null() {
            return Err(Failure(DawStatus::NullArgument, "out is null".into()));
        }
        *out = pair_distance(
            &a,
            &b,
            Weights {
                tempo: w_tempo,
                key: w_key,
            },
        );
        Ok(())
    })
}
