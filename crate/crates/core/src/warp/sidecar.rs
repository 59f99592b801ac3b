//! `<audio>.warp.json` metadata files.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{ClipInfo, WarpError, WarpMarker};

/// Tempo assumed when a single-marker sidecar states no `bpm`.
const FALLBACK_BPM: f64 = 120.0;

/// On-disk form of a clip's warp metadata. Unknown keys are ignored.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct WarpSidecar {
    pub markers: Vec<WarpMarker>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_marker: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end_marker: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loop_start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loop_end: Option<f64>,
    #[serde(default)]
    pub loop_on: bool,
    #[serde(default = "default_true")]
    pub warp_on: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bpm: Option<f64>,
}

fn default_true() -> bool {
    true
}

impl WarpSidecar {
    pub fn parse(text: &str) -> Result<Self, WarpError> {
        serde_json::from_str(text).map_err(|e| WarpError::Malformed(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("sidecar serializes")
    }

    pub fn from_clip(clip: &ClipInfo) -> Self {
        Self {
            markers: clip.markers().to_vec(),
            start_marker: Some(clip.start_marker),
            end_marker: Some(clip.end_marker),
            loop_start: Some(clip.loop_start),
            loop_end: Some(clip.loop_end),
            loop_on: clip.loop_on,
            warp_on: clip.warp_on,
            bpm: Some(clip.source_bpm()),
        }
    }

    /// Build the clip. Missing region keys default to the marker span; when
    /// that span is empty (one marker) and the audio length is known, the
    /// region runs from the marker to the end of the audio.
    pub fn to_clip(&self, audio_seconds: Option<f64>) -> Result<ClipInfo, WarpError> {
        let bpm = match (self.bpm, self.markers.as_slice()) {
            (Some(bpm), _) => bpm,
            (None, [a, b, ..]) => 60.0 * (b.beats - a.beats) / (b.seconds - a.seconds),
            (None, _) => FALLBACK_BPM,
        };
        let mut clip = ClipInfo::new(self.markers.clone(), bpm)?;
        let mut span_end = clip.end_marker;
        if self.markers.len() == 1 {
            if let Some(secs) = audio_seconds {
                span_end = clip.seconds_to_beats(secs).max(clip.start_marker);
            }
        }
        let start = self.start_marker.unwrap_or(clip.start_marker);
        let end = self.end_marker.unwrap_or(span_end);
        clip.set_region(start, end)?;
        let loop_start = self.loop_start.unwrap_or(clip.markers()[0].beats);
        let loop_end = self.loop_end.unwrap_or(span_end);
        clip.set_loop(loop_start, loop_end, self.loop_on)?;
        clip.warp_on = self.warp_on;
        Ok(clip)
    }
}

/// Sidecar path for an audio file: `song.wav` → `song.wav.warp.json`.
pub fn sidecar_path(audio: &Path) -> PathBuf {
    let mut name = audio.as_os_str().to_owned();
    name.push(".warp.json");
    PathBuf::from(name)
}

/// Read and validate a sidecar file.
pub fn load_sidecar_file(path: &Path, audio_seconds: Option<f64>) -> Result<ClipInfo, WarpError> {
    let text = std::fs::read_to_string(path).map_err(|e| WarpError::Malformed(format!("{}: {e}", path.display())))?;
    WarpSidecar::parse(&text)?.to_clip(audio_seconds)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_document() {
        let text = r#"{
            "markers": [{"seconds": 0.0, "beats": 0.0}, {"seconds": 2.0, "beats": 4.0}],
            "start_marker": 1.0, "end_marker": 3.0,
            "loop_start": 1.0, "loop_end": 2.0, "loop_on": true,
            "warp_on": true, "bpm": 120.0, "comment": "ignored"
        }"#;
        let clip = WarpSidecar::parse(text).unwrap().to_clip(None).unwrap();
        assert_eq!((clip.start_marker, clip.end_marker), (1.0, 3.0));
        assert_eq!((clip.loop_start, clip.loop_end, clip.loop_on), (1.0, 2.0, true));
        assert_eq!(clip.source_bpm(), 120.0);
    }

    #[test]
    fn defaults_cover_marker_span() {
        let text = r#"{"markers": [{"seconds": 0.5, "beats": 0.0}, {"seconds": 1.5, "beats": 2.0}]}"#;
        let clip = WarpSidecar::parse(text).unwrap().to_clip(None).unwrap();
        assert_eq!((clip.start_marker, clip.end_marker), (0.0, 2.0));
        assert!(clip.warp_on && !clip.loop_on);
        assert_eq!(clip.source_bpm(), 120.0);
    }

    #[test]
    fn single_marker_extends_to_audio_end() {
        let text = r#"{"markers": [{"seconds": 0.0, "beats": 0.0}], "bpm": 60.0}"#;
        let clip = WarpSidecar::parse(text).unwrap().to_clip(Some(3.0)).unwrap();
        assert_eq!(clip.end_marker, 3.0);
    }

    #[test]
    fn errors_name_the_marker() {
        let text = r#"{"markers": [{"seconds": 0.0, "beats": 0.0}, {"seconds": 0.0, "beats": 1.0}]}"#;
        let err = WarpSidecar::parse(text).unwrap().to_clip(None).unwrap_err();
        assert_eq!(err, WarpError::NonMonotonic { index: 1 });
        assert!(matches!(WarpSidecar::parse("{"), Err(WarpError::Malformed(_))));
    }

    #[test]
    fn round_trip_through_json() {
        let mut clip = ClipInfo::new(vec![WarpMarker::new(0.0, 0.0), WarpMarker::new(1.0, 2.0)], 120.0).unwrap();
        clip.set_loop(0.5, 1.5, true).unwrap();
        let back = WarpSidecar::parse(&WarpSidecar::from_clip(&clip).to_json())
            .unwrap()
            .to_clip(None)
            .unwrap();
        assert_eq!(back, clip);
    }

    #[test]
    fn path_convention() {
        assert_eq!(sidecar_path(Path::new("a/b.wav")), PathBuf::from("a/b.wav.warp.json"));
    }
}
