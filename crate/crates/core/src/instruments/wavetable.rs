use super::{schedule_notes, Allocation, ScheduledEvent, VoiceAllocator, DEFAULT_MAX_VOICES};
use crate::graph::{ParamSpec, RenderContext};
use crate::midi::NoteSequence;
use crate::processors::{AdsrParams, Arity, Envelope, ProcessBlock, Processor, VoiceStats};

const GAIN: usize = 0;
const MAX_VOICES: usize = 1;
const AMP_ATTACK: usize = 2;

/// Shortest accepted single-cycle table.
pub const MIN_TABLE_LEN: usize = 4;

#[derive(Debug, Clone, Copy, Default)]
struct Voice {
    phase: f64,
    increment: f64,
    velocity: f64,
    amp: Envelope,
}

/// Equal-tempered frequency of a MIDI note, A4 = 440 Hz.
pub fn note_frequency(note: f64) -> f64 {
    440.0 * 2f64.powf((note - 69.0) / 12.0)
}

/// Polyphonic synthesizer reading a single-cycle table with linear
/// interpolation; mono output.
pub struct WavetableSynth {
    table: Vec<f64>,
    notes: NoteSequence,
    beats_mode: bool,
    sample_rate: f64,
    alloc: VoiceAllocator,
    voices: Vec<Voice>,
    events: Vec<ScheduledEvent>,
    cursor: usize,
    stats: VoiceStats,
}

impl WavetableSynth {
    /// `None` if the table is shorter than [`MIN_TABLE_LEN`].
    pub fn new(table: Vec<f64>) -> Option<Self> {
        if table.len() < MIN_TABLE_LEN {
            return None;
        }
        Some(Self {
            table,
            notes: NoteSequence::default(),
            beats_mode: false,
            sample_rate: 0.0,
            alloc: VoiceAllocator::new(DEFAULT_MAX_VOICES),
            voices: Vec::new(),
            events: Vec::new(),
            cursor: 0,
            stats: VoiceStats::default(),
        })
    }

    /// One cycle of a sine wave.
    pub fn sine_table(len: usize) -> Vec<f64> {
        (0..len)
            .map(|i| (std::f64::consts::TAU * i as f64 / len as f64).sin())
            .collect()
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    fn handle_events(&mut self, frame: usize) {
        let len = self.table.len() as f64;
        while let Some(ev) = self.events.get(self.cursor).copied() {
            if ev.frame > frame {
                break;
            }
            self.cursor += 1;
            if ev.on == 1 {
                let alloc = self.alloc.allocate(ev.note, ev.note_id, ev.frame as u64);
                if matches!(alloc, Allocation::Stolen(_)) {
                    self.stats.steals += 1;
                }
                let v = &mut self.voices[alloc.slot()];
                v.phase = 0.0;
                v.increment = note_frequency(ev.note as f64) * len / self.sample_rate;
                v.velocity = ev.velocity as f64 / 127.0;
                v.amp.gate_on();
                self.stats.peak_active = self.stats.peak_active.max(self.alloc.active_count());
            } else if let Some(slot) = self.alloc.slot_of(ev.note_id) {
                self.voices[slot].amp.gate_off();
            }
        }
    }
}

impl Processor for WavetableSynth {
    fn kind(&self) -> &str {
        "wavetable_synth"
    }

    fn arity(&self) -> Arity {
        Arity::exactly(0)
    }

    fn schema(&self, _num_inputs: usize) -> Vec<ParamSpec> {
        let d = AdsrParams::default();
        vec![
            ParamSpec::new("gain", 1.0, 0.0, 16.0),
            ParamSpec::fixed("max_voices", DEFAULT_MAX_VOICES as f64, 1.0, 256.0),
            ParamSpec::new("amp_attack", d.attack_s, 0.0, 60.0),
            ParamSpec::new("amp_decay", d.decay_s, 0.0, 60.0),
            ParamSpec::new("amp_sustain", d.sustain, 0.0, 1.0),
            ParamSpec::new("amp_release", d.release_s, 0.0, 60.0),
        ]
    }

    fn output_channels(&self, _input_channels: &[usize]) -> usize {
        1
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
        let len = self.table.len();
        let len_f = len as f64;
        for n in 0..block.len {
            self.handle_events(block.start_frame + n);
            let gain = lanes.get(GAIN, n);
            let amp_p = AdsrParams {
                attack_s: lanes.get(AMP_ATTACK, n),
                decay_s: lanes.get(AMP_ATTACK + 1, n),
                sustain: lanes.get(AMP_ATTACK + 2, n),
                release_s: lanes.get(AMP_ATTACK + 3, n),
            };
            let mut acc = 0.0;
            for slot in 0..self.voices.len() {
                if !self.alloc.slots()[slot].active {
                    continue;
                }
                let v = &mut self.voices[slot];
                let env = v.amp.next(&amp_p, self.sample_rate);
                if v.amp.is_idle() {
                    self.alloc.free(slot);
                    continue;
                }
                let i = v.phase as usize;
                let frac = v.phase - i as f64;
                let a = self.table[i];
                let b = self.table[(i + 1) % len];
                acc += (a + (b - a) * frac) * v.velocity * env * gain;
                v.phase += v.increment;
                while v.phase >= len_f {
                    v.phase -= len_f;
                }
            }
            block.output[0][n] = acc;
        }
    }
}
