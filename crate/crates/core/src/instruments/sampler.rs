use super::{schedule_notes, Allocation, ScheduledEvent, VoiceAllocator, DEFAULT_MAX_VOICES};
use crate::buffer::AudioBuffer;
use crate::graph::{ParamSpec, RenderContext};
use crate::midi::NoteSequence;
use crate::processors::{
    AdsrParams, Arity, BiquadCoefficients, BiquadMode, BiquadState, Envelope, ProcessBlock, Processor, VoiceStats,
};

const GAIN: usize = 0;
const ROOT_NOTE: usize = 1;
const MAX_VOICES: usize = 2;
const AMP_ATTACK: usize = 3;
const FILTER_ON: usize = 7;
const FILTER_BASE: usize = 8;
const FILTER_DEPTH: usize = 9;
const FILTER_Q: usize = 10;
const FILTER_ATTACK: usize = 11;

#[derive(Debug, Clone, Default)]
struct Voice {
    pos: f64,
    rate: f64,
    velocity: f64,
    gate: bool,
    amp: Envelope,
    filter_env: Envelope,
    filters: Vec<BiquadState>,
    coeffs: BiquadCoefficients,
    designed_for: (f64, f64),
}

fn adsr_at(lanes: &crate::graph::ParamLanes, first: usize, n: usize) -> AdsrParams {
    AdsrParams {
        attack_s: lanes.get(first, n),
        decay_s: lanes.get(first + 1, n),
        sustain: lanes.get(first + 2, n),
        release_s: lanes.get(first + 3, n),
    }
}

/// One-shot sample player. Each note plays the sample at
/// `2^((note - root_note) / 12)` times its original speed through a
/// per-voice lowpass whose cutoff follows a second envelope:
/// `filter_base_hz + filter_depth_hz * env`.
pub struct Sampler {
    sample: AudioBuffer,
    notes: NoteSequence,
    beats_mode: bool,
    sample_rate: f64,
    filter_on: bool,
    root_note: f64,
    alloc: VoiceAllocator,
    voices: Vec<Voice>,
    events: Vec<ScheduledEvent>,
    cursor: usize,
    stats: VoiceStats,
}

impl Sampler {
    pub fn new(sample: AudioBuffer) -> Self {
        Self {
            sample,
            notes: NoteSequence::default(),
            beats_mode: false,
            sample_rate: 0.0,
            filter_on: true,
            root_note: 60.0,
            alloc: VoiceAllocator::new(DEFAULT_MAX_VOICES),
            voices: Vec::new(),
            events: Vec::new(),
            cursor: 0,
            stats: VoiceStats::default(),
        }
    }

    pub fn sample(&self) -> &AudioBuffer {
        &self.sample
    }

    fn start_voice(&mut self, ev: &ScheduledEvent) {
        let alloc = self.alloc.allocate(ev.note, ev.note_id, ev.frame as u64);
        if matches!(alloc, Allocation::Stolen(_)) {
            self.stats.steals += 1;
        }
        let channels = self.sample.num_channels();
        let v = &mut self.voices[alloc.slot()];
        v.pos = 0.0;
        v.rate = 2f64.powf((ev.note as f64 - self.root_note) / 12.0);
        v.velocity = ev.velocity as f64 / 127.0;
        v.gate = true;
        v.amp.gate_on();
        v.filter_env.gate_on();
        v.filters = vec![BiquadState::default(); channels];
        v.designed_for = (f64::NAN, f64::NAN);
        self.stats.peak_active = self.stats.peak_active.max(self.alloc.active_count());
    }

    fn handle_events(&mut self, frame: usize) {
        while let Some(ev) = self.events.get(self.cursor).copied() {
            if ev.frame > frame {
                break;
            }
            self.cursor += 1;
            if ev.on == 1 {
                self.start_voice(&ev);
            } else if let Some(slot) = self.alloc.slot_of(ev.note_id) {
                let v = &mut self.voices[slot];
                v.gate = false;
                v.amp.gate_off();
                v.filter_env.gate_off();
            }
        }
    }
}

impl Processor for Sampler {
    fn kind(&self) -> &str {
        "sampler"
    }

    fn arity(&self) -> Arity {
        Arity::exactly(0)
    }

    fn schema(&self, _num_inputs: usize) -> Vec<ParamSpec> {
        let d = AdsrParams::default();
        vec![
            ParamSpec::new("gain", 1.0, 0.0, 16.0),
            ParamSpec::fixed("root_note", 60.0, 0.0, 127.0),
            ParamSpec::fixed("max_voices", DEFAULT_MAX_VOICES as f64, 1.0, 256.0),
            ParamSpec::new("amp_attack", d.attack_s, 0.0, 60.0),
            ParamSpec::new("amp_decay", d.decay_s, 0.0, 60.0),
            ParamSpec::new("amp_sustain", d.sustain, 0.0, 1.0),
            ParamSpec::new("amp_release", d.release_s, 0.0, 60.0),
            ParamSpec::fixed("filter_on", 1.0, 0.0, 1.0),
            ParamSpec::new("filter_base_hz", 20_000.0, 10.0, 100_000.0),
            ParamSpec::new("filter_depth_hz", 0.0, -100_000.0, 100_000.0),
            ParamSpec::new("filter_q", std::f64::consts::FRAC_1_SQRT_2, 0.05, 10.0),
            ParamSpec::new("filter_attack", d.attack_s, 0.0, 60.0),
            ParamSpec::new("filter_decay", d.decay_s, 0.0, 60.0),
            ParamSpec::new("filter_sustain", d.sustain, 0.0, 1.0),
            ParamSpec::new("filter_release", d.release_s, 0.0, 60.0),
        ]
    }

    fn output_channels(&self, _input_channels: &[usize]) -> usize {
        self.sample.num_channels()
    }

    fn source_sample_rate(&self) -> Option<f64> {
        Some(self.sample.sample_rate())
    }

    fn load_notes(&mut self, notes: &NoteSequence, beats_mode: bool) -> bool {
        self.notes = notes.clone();
        self.beats_mode = beats_mode;
        true
    }

    fn voice_stats(&self) -> Option<VoiceStats> {
        Some(self.stats)
    }

    fn prepare(&mut self, ctx: &RenderContext, params: &[f64]) {
        self.sample_rate = ctx.sample_rate;
        self.root_note = params[ROOT_NOTE].round();
        self.filter_on = params[FILTER_ON] >= 0.5;
        let max = params[MAX_VOICES].round().max(1.0) as usize;
        self.alloc = VoiceAllocator::new(max);
        self.voices = vec![Voice::default(); max];
        self.events = schedule_notes(&self.notes, self.beats_mode, ctx.sample_rate, ctx.bpm);
        self.cursor = 0;
        self.stats = VoiceStats {
            max_voices: max,
            ..VoiceStats::default()
        };
    }

    fn process(&mut self, block: ProcessBlock<'_>) {
        let lanes = block.params;
        let channels = block.output.len();
        let frames = self.sample.frames();
        let len_f = frames as f64;
        for n in 0..block.len {
            self.handle_events(block.start_frame + n);
            for out in block.output.iter_mut() {
                out[n] = 0.0;
            }
            let gain = lanes.get(GAIN, n);
            let amp_p = adsr_at(lanes, AMP_ATTACK, n);
            let filt_p = adsr_at(lanes, FILTER_ATTACK, n);
            for slot in 0..self.voices.len() {
                if !self.alloc.slots()[slot].active {
                    continue;
                }
                let sr = self.sample_rate;
                let v = &mut self.voices[slot];
                let env = v.amp.next(&amp_p, sr);
                let fenv = v.filter_env.next(&filt_p, sr);
                let ended = v.pos >= len_f;
                if v.amp.is_idle() || (ended && !v.gate) {
                    self.alloc.free(slot);
                    continue;
                }
                if ended {
                    continue;
                }
                if self.filter_on {
                    let cutoff = lanes.get(FILTER_BASE, n) + lanes.get(FILTER_DEPTH, n) * fenv;
                    let q = lanes.get(FILTER_Q, n);
                    if v.designed_for != (cutoff, q) {
                        v.coeffs = BiquadCoefficients::design(BiquadMode::Lowpass, cutoff, q, sr);
                        v.designed_for = (cutoff, q);
                    }
                }
                let i = v.pos as usize;
                let frac = v.pos - i as f64;
                let scale = v.velocity * env * gain;
                for ch in 0..channels {
                    let src = self.sample.channel(ch);
                    let a = src[i];
                    let s = if frac == 0.0 {
                        a
                    } else {
                        let b = src.get(i + 1).copied().unwrap_or(0.0);
                        a + (b - a) * frac
                    };
                    let s = if self.filter_on {
                        v.filters[ch].tick(&v.coeffs, s)
                    } else {
                        s
                    };
                    block.output[ch][n] += s * scale;
                }
                v.pos += v.rate;
            }
        }
    }
}
