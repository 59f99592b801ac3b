//! Notes, tempo maps and Standard MIDI File reading/writing.

mod smf;
mod writer;

pub use smf::{parse_smf, read_varint, MidiEvent, Smf, SmfError, SmfWarning, TimedEvent, Track};
pub use writer::write_smf;

/// Tempo assumed by SMF when a file carries no tempo event (120 bpm).
pub const DEFAULT_US_PER_QUARTER: u32 = 500_000;

/// A pitched note with its timing kept both in seconds and in beats.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoteEvent {
    pub note: u8,
    pub velocity: u8,
    pub start_seconds: f64,
    pub start_beats: f64,
    pub duration_seconds: f64,
    pub duration_beats: f64,
}

impl NoteEvent {
    /// Note timed in seconds; the beat fields assume the SMF default tempo.
    pub fn seconds(note: u8, velocity: u8, start: f64, duration: f64) -> Self {
        let per_beat = DEFAULT_US_PER_QUARTER as f64 * 1e-6;
        Self {
            note,
            velocity,
            start_seconds: start,
            start_beats: start / per_beat,
            duration_seconds: duration,
            duration_beats: duration / per_beat,
        }
    }

    /// Note timed in beats; the second fields assume the SMF default tempo.
    pub fn beats(note: u8, velocity: u8, start: f64, duration: f64) -> Self {
        let per_beat = DEFAULT_US_PER_QUARTER as f64 * 1e-6;
        Self {
            note,
            velocity,
            start_seconds: start * per_beat,
            start_beats: start,
            duration_seconds: duration * per_beat,
            duration_beats: duration,
        }
    }
}

/// Notes ordered by start time, then pitch.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NoteSequence {
    notes: Vec<NoteEvent>,
}

impl NoteSequence {
    pub fn new(mut notes: Vec<NoteEvent>) -> Self {
        sort_notes(&mut notes);
        Self { notes }
    }

    pub fn push(&mut self, note: NoteEvent) {
        self.notes.push(note);
        sort_notes(&mut self.notes);
    }

    pub fn notes(&self) -> &[NoteEvent] {
        &self.notes
    }

    pub fn len(&self) -> usize {
        self.notes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.notes.is_empty()
    }
}

fn sort_notes(notes: &mut [NoteEvent]) {
    notes.sort_by(|a, b| {
        a.start_beats
            .total_cmp(&b.start_beats)
            .then(a.start_seconds.total_cmp(&b.start_seconds))
            .then(a.note.cmp(&b.note))
    });
}

/// Tempo changes keyed by tick, with the file's ticks-per-quarter.
#[derive(Debug, Clone, PartialEq)]
pub struct TempoMap {
    ticks_per_quarter: u16,
    /// `(tick, microseconds per quarter)`, first entry at tick 0, ticks
    /// strictly increasing.
    entries: Vec<(u64, u32)>,
}

impl TempoMap {
    /// A map with the default tempo. `ticks_per_quarter` of 0 is bumped to 1.
    pub fn new(ticks_per_quarter: u16) -> Self {
        Self {
            ticks_per_quarter: ticks_per_quarter.max(1),
            entries: vec![(0, DEFAULT_US_PER_QUARTER)],
        }
    }

    pub fn constant(ticks_per_quarter: u16, us_per_quarter: u32) -> Self {
        let mut map = Self::new(ticks_per_quarter);
        map.insert(0, us_per_quarter);
        map
    }

    /// Set the tempo from `tick` on. A change at an existing tick replaces
    /// it; zero tempos are ignored.
    pub fn insert(&mut self, tick: u64, us_per_quarter: u32) {
        if us_per_quarter == 0 {
            return;
        }
        match self.entries.binary_search_by_key(&tick, |e| e.0) {
            Ok(i) => self.entries[i].1 = us_per_quarter,
            Err(i) => self.entries.insert(i, (tick, us_per_quarter)),
        }
    }

    pub fn ticks_per_quarter(&self) -> u16 {
        self.ticks_per_quarter
    }

    pub fn entries(&self) -> &[(u64, u32)] {
        &self.entries
    }

    /// `(seconds, beats)` at `tick`.
    pub fn ticks_to_time(&self, tick: u64) -> (f64, f64) {
        let tpq = self.ticks_per_quarter as f64;
        let mut seconds = 0.0;
        for (i, &(at, us)) in self.entries.iter().enumerate() {
            if at >= tick {
                break;
            }
            let end = self.entries.get(i + 1).map_or(tick, |e| e.0.min(tick));
            seconds += (end - at) as f64 / tpq * us as f64 * 1e-6;
        }
        (seconds, tick as f64 / tpq)
    }

    /// Nearest tick for a beat position.
    pub fn beats_to_ticks(&self, beats: f64) -> u64 {
        (beats * self.ticks_per_quarter as f64).round().max(0.0) as u64
    }
}
