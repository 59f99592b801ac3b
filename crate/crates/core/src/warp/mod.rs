//! Warp markers, clip regions, time-scale modification and warped clip
//! playback on the engine's beat timeline.
//!
//! A clip's markers pair positions in the source audio (seconds) with
//! musical positions (beats). Between markers the mapping is linear; outside
//! the marker span it continues with the slope of the nearest segment. A
//! single-marker clip uses the clip's nominal tempo as its slope.

mod playback;
mod sidecar;
mod stretch;

pub use playback::{PlaybackWarp, TimelinePlacement};
pub use sidecar::{load_sidecar_file, sidecar_path, WarpSidecar};
pub use stretch::{stretch, stretch_to_length, StretchGeometry, MAX_RATIO, MIN_RATIO};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WarpError {
    #[error("a clip needs at least one warp marker")]
    NoMarkers,
    #[error("warp marker {index} does not increase in both seconds and beats")]
    NonMonotonic { index: usize },
    #[error("warp marker {index} is not finite")]
    NonFinite { index: usize },
    #[error("invalid clip region: {0}")]
    InvalidRegion(String),
    #[error("tempo must be positive, got {0}")]
    InvalidBpm(f64),
    #[error("ratio {name} = {value} outside [1/8, 8]")]
    RatioOutOfRange { name: &'static str, value: f64 },
    #[error("malformed warp metadata: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct WarpMarker {
    pub seconds: f64,
    pub beats: f64,
}

impl WarpMarker {
    pub fn new(seconds: f64, beats: f64) -> Self {
        Self { seconds, beats }
    }
}

/// Markers plus playable region, loop region and warp switch.
#[derive(Debug, Clone, PartialEq)]
pub struct ClipInfo {
    markers: Vec<WarpMarker>,
    pub start_marker: f64,
    pub end_marker: f64,
    pub loop_start: f64,
    pub loop_end: f64,
    pub loop_on: bool,
    pub warp_on: bool,
    source_bpm: f64,
}

impl ClipInfo {
    /// Warped, unlooped clip spanning the markers.
    pub fn new(markers: Vec<WarpMarker>, source_bpm: f64) -> Result<Self, WarpError> {
        validate_markers(&markers)?;
        if !(source_bpm > 0.0 && source_bpm.is_finite()) {
            return Err(WarpError::InvalidBpm(source_bpm));
        }
        let first = markers[0].beats;
        let last = markers[markers.len() - 1].beats;
        Ok(Self {
            markers,
            start_marker: first,
            end_marker: last,
            loop_start: first,
            loop_end: last,
            loop_on: false,
            warp_on: true,
            source_bpm,
        })
    }

    /// Clip whose beat grid is a constant tempo anchored at the start of
    /// the audio, covering `duration_seconds` of it.
    pub fn constant_tempo(source_bpm: f64, duration_seconds: f64) -> Result<Self, WarpError> {
        let mut clip = Self::new(vec![WarpMarker::new(0.0, 0.0)], source_bpm)?;
        let end = duration_seconds * source_bpm / 60.0;
        clip.set_region(0.0, end)?;
        clip.loop_end = end;
        Ok(clip)
    }

    pub fn markers(&self) -> &[WarpMarker] {
        &self.markers
    }

    pub fn source_bpm(&self) -> f64 {
        self.source_bpm
    }

    pub fn set_region(&mut self, start_marker: f64, end_marker: f64) -> Result<(), WarpError> {
        if !(start_marker.is_finite() && end_marker.is_finite()) || start_marker > end_marker {
            return Err(WarpError::InvalidRegion(format!(
                "start {start_marker} must not exceed end {end_marker}"
            )));
        }
        self.start_marker = start_marker;
        self.end_marker = end_marker;
        Ok(())
    }

    pub fn set_loop(&mut self, loop_start: f64, loop_end: f64, on: bool) -> Result<(), WarpError> {
        if on && !(loop_start.is_finite() && loop_end.is_finite() && loop_start < loop_end) {
            return Err(WarpError::InvalidRegion(format!(
                "loop start {loop_start} must be below loop end {loop_end}"
            )));
        }
        self.loop_start = loop_start;
        self.loop_end = loop_end;
        self.loop_on = on;
        Ok(())
    }

    /// Index of the segment governing beat `b`: segment `i` runs from marker
    /// `i` to marker `i + 1`; positions past either end use the outer
    /// segments.
    fn segment_by_beats(&self, b: f64) -> usize {
        let n = self.markers.len();
        debug_assert!(n >= 2);
        let i = self.markers.partition_point(|m| m.beats <= b);
        i.saturating_sub(1).min(n - 2)
    }

    fn segment_by_seconds(&self, s: f64) -> usize {
        let n = self.markers.len();
        let i = self.markers.partition_point(|m| m.seconds <= s);
        i.saturating_sub(1).min(n - 2)
    }

    /// Anchor marker and slope (seconds per beat) used for beat `b`.
    fn anchor_for_beats(&self, b: f64) -> (WarpMarker, f64) {
        let n = self.markers.len();
        if n == 1 {
            return (self.markers[0], 60.0 / self.source_bpm);
        }
        let i = self.segment_by_beats(b);
        let (m0, m1) = (self.markers[i], self.markers[i + 1]);
        let slope = (m1.seconds - m0.seconds) / (m1.beats - m0.beats);
        // Anchor on the marker nearest the query so markers map exactly.
        if b >= m1.beats {
            (m1, slope)
        } else {
            (m0, slope)
        }
    }

    /// Source position in seconds of clip beat `b`.
    pub fn beats_to_seconds(&self, b: f64) -> f64 {
        let (m, slope) = self.anchor_for_beats(b);
        m.seconds + (b - m.beats) * slope
    }

    /// Inverse of [`beats_to_seconds`](Self::beats_to_seconds).
    pub fn seconds_to_beats(&self, s: f64) -> f64 {
        let n = self.markers.len();
        if n == 1 {
            let m = self.markers[0];
            return m.beats + (s - m.seconds) * self.source_bpm / 60.0;
        }
        let i = self.segment_by_seconds(s);
        let (m0, m1) = (self.markers[i], self.markers[i + 1]);
        let slope = (m1.beats - m0.beats) / (m1.seconds - m0.seconds);
        let m = if s >= m1.seconds { m1 } else { m0 };
        m.beats + (s - m.seconds) * slope
    }

    /// Tempo of the segment containing beat `b` (right-continuous).
    pub fn segment_tempo(&self, b: f64) -> f64 {
        60.0 / self.anchor_for_beats(b).1
    }

    /// Marker beats strictly inside `(from, to)`, ascending.
    pub(crate) fn marker_beats_between(&self, from: f64, to: f64) -> impl Iterator<Item = f64> + '_ {
        self.markers
            .iter()
            .map(|m| m.beats)
            .filter(move |&b| b > from && b < to)
    }
}

fn validate_markers(markers: &[WarpMarker]) -> Result<(), WarpError> {
    if markers.is_empty() {
        return Err(WarpError::NoMarkers);
    }
    for (index, m) in markers.iter().enumerate() {
        if !(m.seconds.is_finite() && m.beats.is_finite()) {
            return Err(WarpError::NonFinite { index });
        }
        if index > 0 {
            let p = markers[index - 1];
            if m.seconds <= p.seconds || m.beats <= p.beats {
                return Err(WarpError::NonMonotonic { index });
            }
        }
    }
    Ok(())
}
