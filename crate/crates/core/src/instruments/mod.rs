//! MIDI-driven polyphonic instruments with automatic voice allocation.

mod sampler;
mod wavetable;

pub use sampler::Sampler;
pub use wavetable::WavetableSynth;

use crate::midi::NoteSequence;

pub const DEFAULT_MAX_VOICES: usize = 16;

/// Bookkeeping for one voice slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SlotState {
    pub active: bool,
    pub note: u8,
    pub note_id: usize,
    pub started_at: u64,
}

/// How a note-on obtained its slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Allocation {
    Free(usize),
    /// The same pitch was still sounding; its voice restarts.
    Retrigger(usize),
    /// No slot was free; the oldest voice was taken over.
    Stolen(usize),
}

impl Allocation {
    pub fn slot(self) -> usize {
        match self {
            Allocation::Free(s) | Allocation::Retrigger(s) | Allocation::Stolen(s) => s,
        }
    }
}

/// Fixed-size voice pool.
///
/// A note-on retriggers the voice already playing that pitch if there is
/// one, otherwise takes the lowest free slot, otherwise steals the voice
/// with the earliest start (lowest slot on ties).
#[derive(Debug, Clone, Default)]
pub struct VoiceAllocator {
    slots: Vec<SlotState>,
}

impl VoiceAllocator {
    pub fn new(max_voices: usize) -> Self {
        Self {
            slots: vec![SlotState::default(); max_voices.max(1)],
        }
    }

    pub fn max_voices(&self) -> usize {
        self.slots.len()
    }

    pub fn slots(&self) -> &[SlotState] {
        &self.slots
    }

    pub fn active_count(&self) -> usize {
        self.slots.iter().filter(|s| s.active).count()
    }

    pub fn allocate(&mut self, note: u8, note_id: usize, frame: u64) -> Allocation {
        let alloc = if let Some(i) = self.slots.iter().position(|s| s.active && s.note == note) {
            Allocation::Retrigger(i)
        } else if let Some(i) = self.slots.iter().position(|s| !s.active) {
            Allocation::Free(i)
        } else {
            let oldest = self
                .slots
                .iter()
                .enumerate()
                .min_by_key(|(i, s)| (s.started_at, *i))
                .map(|(i, _)| i)
                .unwrap_or(0);
            Allocation::Stolen(oldest)
        };
        self.slots[alloc.slot()] = SlotState {
            active: true,
            note,
            note_id,
            started_at: frame,
        };
        alloc
    }

    /// Slot currently playing note `note_id`, if it has not been stolen.
    pub fn slot_of(&self, note_id: usize) -> Option<usize> {
        self.slots.iter().position(|s| s.active && s.note_id == note_id)
    }

    pub fn free(&mut self, slot: usize) {
        self.slots[slot].active = false;
    }
}

/// Note-on or note-off at an engine frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) struct ScheduledEvent {
    pub frame: usize,
    /// 0 = off, 1 = on; offs sort first on a shared frame.
    pub on: u8,
    pub note_id: usize,
    pub note: u8,
    pub velocity: u8,
}

/// Convert notes to frame-accurate events. Notes repeating an earlier
/// `(pitch, start)` pair are dropped.
pub(crate) fn schedule_notes(
    notes: &NoteSequence,
    beats_mode: bool,
    sample_rate: f64,
    bpm: f64,
) -> Vec<ScheduledEvent> {
    let seconds_per_beat = 60.0 / bpm;
    let mut seen = std::collections::HashSet::new();
    let mut events = Vec::with_capacity(notes.len() * 2);
    for (id, n) in notes.notes().iter().enumerate() {
        let (start, duration) = if beats_mode {
            (n.start_beats * seconds_per_beat, n.duration_beats * seconds_per_beat)
        } else {
            (n.start_seconds, n.duration_seconds)
        };
        if !(start.is_finite() && duration.is_finite()) || start < 0.0 || n.velocity == 0 {
            continue;
        }
        if !seen.insert((n.note, start.to_bits())) {
            continue;
        }
        let on = (start * sample_rate).round() as usize;
        let off = (((start + duration) * sample_rate).round() as usize).max(on + 1);
        let velocity = n.velocity.min(127);
        events.push(ScheduledEvent {
            frame: on,
            on: 1,
            note_id: id,
            note: n.note.min(127),
            velocity,
        });
        events.push(ScheduledEvent {
            frame: off,
            on: 0,
            note_id: id,
            note: n.note.min(127),
            velocity,
        });
    }
    events.sort();
    events
}
