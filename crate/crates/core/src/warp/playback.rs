use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::stretch::{StretchGeometry, Wsola, MAX_RATIO, MIN_RATIO};
use super::{ClipInfo, WarpError};
use crate::audio_io::resample_ratio;
use crate::buffer::AudioBuffer;
use crate::graph::{ParamSpec, RenderContext};
use crate::processors::{Arity, ProcessBlock, Processor};

/// Where a clip starts on the engine's beat timeline, and its transposition.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TimelinePlacement {
    pub at_beats: f64,
    #[serde(default)]
    pub transpose_semitones: f64,
}

impl TimelinePlacement {
    pub fn new(at_beats: f64, transpose_semitones: f64) -> Result<Self, WarpError> {
        let p = Self {
            at_beats,
            transpose_semitones,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn pitch_ratio(&self) -> f64 {
        2f64.powf(self.transpose_semitones / 12.0)
    }

    fn validate(&self) -> Result<(), WarpError> {
        if !(self.at_beats >= 0.0 && self.at_beats.is_finite()) {
            return Err(WarpError::InvalidRegion(format!(
                "placement at {} beats",
                self.at_beats
            )));
        }
        let ratio = self.pitch_ratio();
        if !(MIN_RATIO..=MAX_RATIO).contains(&ratio) {
            return Err(WarpError::RatioOutOfRange {
                name: "pitch_ratio",
                value: ratio,
            });
        }
        Ok(())
    }
}

/// Plays a clip on the global beat timeline at the engine tempo.
///
/// With warping on, clip beat `b` is heard at global beat
/// `at_beats + (b - start_marker)`; each stretch between consecutive markers
/// is time-scaled independently so markers land exactly on their beats.
/// With warping off the audio plays at its own speed (times the
/// transposition ratio) from the start marker.
///
/// The whole output is computed in `prepare`, since the render length is
/// known up front.
pub struct PlaybackWarp {
    audio: AudioBuffer,
    clip: ClipInfo,
    placements: Vec<TimelinePlacement>,
    rendered: Vec<Vec<f64>>,
}

impl PlaybackWarp {
    pub fn new(audio: AudioBuffer, clip: ClipInfo, placement: TimelinePlacement) -> Result<Self, WarpError> {
        placement.validate()?;
        Ok(Self {
            audio,
            clip,
            placements: vec![placement],
            rendered: Vec::new(),
        })
    }

    /// Play the same clip again at another position.
    pub fn add_placement(&mut self, placement: TimelinePlacement) -> Result<(), WarpError> {
        placement.validate()?;
        self.placements.push(placement);
        Ok(())
    }

    pub fn audio(&self) -> &AudioBuffer {
        &self.audio
    }

    pub fn clip(&self) -> &ClipInfo {
        &self.clip
    }

    pub fn placements(&self) -> &[TimelinePlacement] {
        &self.placements
    }

    fn render_warped(&self, placement: &TimelinePlacement, ctx: &RenderContext, out: &mut [Vec<f64>]) {
        let clip = &self.clip;
        let total = ctx.total_frames;
        let frames_per_beat = 60.0 * ctx.sample_rate / ctx.bpm;
        let pitch = placement.pitch_ratio();
        let source = resample_ratio(&self.audio, 1.0 / pitch);
        let source_rate = ctx.sample_rate / pitch;
        let mut wsola = Wsola::new(StretchGeometry::for_rate(ctx.sample_rate));
        let mut cache: HashMap<(u64, u64, usize), Vec<Vec<f64>>> = HashMap::new();

        let end_beats = total as f64 / frames_per_beat;
        let mut g = placement.at_beats;
        let mut b = clip.start_marker;
        if clip.loop_on && b >= clip.loop_end {
            b = clip.loop_start + (b - clip.loop_start).rem_euclid(clip.loop_end - clip.loop_start);
        }
        while g < end_beats {
            let stop = if clip.loop_on { clip.loop_end } else { clip.end_marker };
            if b >= stop {
                break;
            }
            let cuts: Vec<f64> = clip.marker_beats_between(b, stop).chain([stop]).collect();
            for b1 in cuts {
                let g1 = g + (b1 - b);
                let f0 = (g * frames_per_beat).round() as usize;
                let f1 = (g1 * frames_per_beat).round() as usize;
                if f1 > f0 && f0 < total {
                    let len = f1 - f0;
                    let piece = cache.entry((b.to_bits(), b1.to_bits(), len)).or_insert_with(|| {
                        let s0 = clip.beats_to_seconds(b) * source_rate;
                        let s1 = clip.beats_to_seconds(b1) * source_rate;
                        wsola.run(source.channels(), s0, s1, len)
                    });
                    for (dst, src) in out.iter_mut().zip(piece.iter()) {
                        for (d, s) in dst[f0..f1.min(total)].iter_mut().zip(src) {
                            *d += s;
                        }
                    }
                }
                g = g1;
                b = b1;
                if g >= end_beats {
                    break;
                }
            }
            if !clip.loop_on {
                break;
            }
            b = clip.loop_start;
        }
    }

    fn render_raw(&self, placement: &TimelinePlacement, ctx: &RenderContext, out: &mut [Vec<f64>]) {
        let clip = &self.clip;
        let anchor = clip.markers()[0];
        let seconds_per_beat = 60.0 / clip.source_bpm();
        let to_seconds = |b: f64| anchor.seconds + (b - anchor.beats) * seconds_per_beat;
        let (start, end) = (to_seconds(clip.start_marker), to_seconds(clip.end_marker));
        let (loop_start, loop_end) = (to_seconds(clip.loop_start), to_seconds(clip.loop_end));
        let rate = placement.pitch_ratio();
        let sr = ctx.sample_rate;
        let first = (placement.at_beats * 60.0 * sr / ctx.bpm).round() as usize;
        let frames = self.audio.frames();

        for f in first..ctx.total_frames {
            let mut pos = start + (f - first) as f64 / sr * rate;
            if clip.loop_on {
                if pos >= loop_end {
                    pos = loop_start + (pos - loop_start).rem_euclid(loop_end - loop_start);
                }
            } else if pos >= end {
                break;
            }
            let x = pos * sr;
            if x < 0.0 {
                continue;
            }
            let i = x as usize;
            if i >= frames {
                if clip.loop_on {
                    continue;
                }
                break;
            }
            let frac = x - i as f64;
            for (ch, dst) in out.iter_mut().enumerate() {
                let src = self.audio.channel(ch);
                let a = src[i];
                let v = if frac == 0.0 {
                    a
                } else {
                    a + (src.get(i + 1).copied().unwrap_or(0.0) - a) * frac
                };
                dst[f] += v;
            }
        }
    }
}

impl Processor for PlaybackWarp {
    fn kind(&self) -> &str {
        "playback_warp"
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

    fn prepare(&mut self, ctx: &RenderContext, _params: &[f64]) {
        let mut out = vec![vec![0.0; ctx.total_frames]; self.audio.num_channels()];
        for placement in &self.placements {
            if self.clip.warp_on {
                self.render_warped(placement, ctx, &mut out);
            } else {
                self.render_raw(placement, ctx, &mut out);
            }
        }
        self.rendered = out;
    }

    fn process(&mut self, block: ProcessBlock<'_>) {
        let gain = block.params.lane(0);
        let start = block.start_frame;
        for (dst, src) in block.output.iter_mut().zip(&self.rendered) {
            for n in 0..block.len {
                dst[n] = src.get(start + n).copied().unwrap_or(0.0) * gain[n];
            }
        }
    }
}
