//! Standard MIDI File reader (formats 0 and 1, metrical time division).
//!
//! Only note and tempo events are surfaced. Controller, program, pressure,
//! pitch-bend, SysEx and other meta events are decoded for length and
//! dropped. Running status is honored for channel messages and cancelled by
//! meta and SysEx events. A note-on with velocity 0 is a note-off.

use std::collections::{HashMap, VecDeque};

use thiserror::Error;

use super::{NoteEvent, NoteSequence, TempoMap};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SmfError {
    #[error("bad SMF header: {0}")]
    BadHeader(String),
    #[error("chunk at byte {offset} is truncated")]
    TruncatedChunk { offset: usize },
    #[error("SMF format {0} is not supported")]
    UnsupportedFormat(u16),
    #[error("SMPTE time division is not supported")]
    SmpteDivision,
    #[error("track {track}, byte {offset}: {reason}")]
    BadEvent {
        track: usize,
        offset: usize,
        reason: String,
    },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SmfWarning {
    /// A note-on never closed; a note-off was synthesized at the track end.
    #[error("track {track}: note {note} on channel {channel} at tick {tick} never ends; closed at track end")]
    DanglingNoteOn {
        track: usize,
        channel: u8,
        note: u8,
        tick: u64,
    },
    #[error("track {track}: note-off for {note} on channel {channel} at tick {tick} has no open note")]
    UnmatchedNoteOff {
        track: usize,
        channel: u8,
        note: u8,
        tick: u64,
    },
    /// Note-on and note-off on the same tick; the note is dropped.
    #[error("track {track}: zero-length note {note} at tick {tick} dropped")]
    ZeroLengthNote { track: usize, note: u8, tick: u64 },
    #[error("header declares {declared} tracks, found {found}")]
    MissingTracks { declared: u16, found: usize },
    #[error("track {track} has no end-of-track event")]
    MissingEndOfTrack { track: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MidiEvent {
    NoteOn {
        channel: u8,
        note: u8,
        velocity: u8,
    },
    NoteOff {
        channel: u8,
        note: u8,
        velocity: u8,
    },
    /// Microseconds per quarter note.
    Tempo(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimedEvent {
    pub tick: u64,
    pub event: MidiEvent,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Track {
    pub events: Vec<TimedEvent>,
    /// Tick of the end-of-track event (or of the last event if missing).
    pub end_tick: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Smf {
    pub format: u16,
    pub ticks_per_quarter: u16,
    pub tracks: Vec<Track>,
    /// Tempo events merged from every track.
    pub tempo_map: TempoMap,
    /// Matched notes from every track.
    pub notes: NoteSequence,
    pub warnings: Vec<SmfWarning>,
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
    base: usize,
    track: usize,
}

impl<'a> Cursor<'a> {
    fn err(&self, reason: impl Into<String>) -> SmfError {
        SmfError::BadEvent {
            track: self.track,
            offset: self.base + self.pos,
            reason: reason.into(),
        }
    }

    fn u8(&mut self) -> Result<u8, SmfError> {
        let b = *self
            .bytes
            .get(self.pos)
            .ok_or_else(|| self.err("unexpected end of track"))?;
        self.pos += 1;
        Ok(b)
    }

    fn data(&mut self) -> Result<u8, SmfError> {
        let b = self.u8()?;
        if b & 0x80 != 0 {
            return Err(self.err(format!("expected data byte, found {b:#04x}")));
        }
        Ok(b)
    }

    /// Variable-length quantity: at most four bytes, seven bits each.
    fn varint(&mut self) -> Result<u32, SmfError> {
        let mut value = 0u32;
        for _ in 0..4 {
            let b = self.u8()?;
            value = (value << 7) | (b & 0x7f) as u32;
            if b & 0x80 == 0 {
                return Ok(value);
            }
        }
        Err(self.err("variable-length quantity longer than 4 bytes"))
    }

    fn skip(&mut self, n: usize) -> Result<&'a [u8], SmfError> {
        if self.bytes.len() - self.pos < n {
            return Err(self.err("event data runs past the end of the track"));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }
}

/// Decode a variable-length quantity from the front of `bytes`, returning
/// the value and the number of bytes consumed.
pub fn read_varint(bytes: &[u8]) -> Option<(u32, usize)> {
    let mut c = Cursor {
        bytes,
        pos: 0,
        base: 0,
        track: 0,
    };
    c.varint().ok().map(|v| (v, c.pos))
}

fn be16(b: &[u8]) -> u16 {
    u16::from_be_bytes([b[0], b[1]])
}

fn be32(b: &[u8]) -> u32 {
    u32::from_be_bytes([b[0], b[1], b[2], b[3]])
}

pub fn parse_smf(bytes: &[u8]) -> Result<Smf, SmfError> {
    if bytes.len() < 8 || &bytes[0..4] != b"MThd" {
        return Err(SmfError::BadHeader("missing MThd chunk".into()));
    }
    let header_len = be32(&bytes[4..8]) as usize;
    if header_len < 6 {
        return Err(SmfError::BadHeader(format!("header length {header_len}, expected 6")));
    }
    if bytes.len() - 8 < header_len {
        return Err(SmfError::TruncatedChunk { offset: 0 });
    }
    let format = be16(&bytes[8..10]);
    let declared = be16(&bytes[10..12]);
    let division = be16(&bytes[12..14]);
    if format > 1 {
        return Err(SmfError::UnsupportedFormat(format));
    }
    if division & 0x8000 != 0 {
        return Err(SmfError::SmpteDivision);
    }
    if division == 0 {
        return Err(SmfError::BadHeader("zero ticks per quarter note".into()));
    }

    let mut warnings = Vec::new();
    let mut tracks = Vec::new();
    let mut offset = 8 + header_len;
    while tracks.len() < declared as usize && offset < bytes.len() {
        if bytes.len() - offset < 8 {
            return Err(SmfError::TruncatedChunk { offset });
        }
        let id = &bytes[offset..offset + 4];
        let len = be32(&bytes[offset + 4..offset + 8]) as usize;
        let body = offset + 8;
        if bytes.len() - body < len {
            return Err(SmfError::TruncatedChunk { offset });
        }
        if id == b"MTrk" {
            let index = tracks.len();
            tracks.push(parse_track(&bytes[body..body + len], body, index, &mut warnings)?);
        }
        offset = body + len;
    }
    if tracks.len() < declared as usize {
        warnings.push(SmfWarning::MissingTracks {
            declared,
            found: tracks.len(),
        });
    }

    let mut tempo_map = TempoMap::new(division);
    let mut tempos: Vec<(u64, usize, u32)> = Vec::new();
    for (t, track) in tracks.iter().enumerate() {
        for e in &track.events {
            if let MidiEvent::Tempo(us) = e.event {
                tempos.push((e.tick, t, us));
            }
        }
    }
    // Later tracks win on a shared tick.
    tempos.sort_by_key(|&(tick, t, _)| (tick, t));
    for (tick, _, us) in tempos {
        tempo_map.insert(tick, us);
    }

    let notes = pair_notes(&tracks, &tempo_map, &mut warnings);
    Ok(Smf {
        format,
        ticks_per_quarter: division,
        tracks,
        tempo_map,
        notes,
        warnings,
    })
}

fn parse_track(bytes: &[u8], base: usize, index: usize, warnings: &mut Vec<SmfWarning>) -> Result<Track, SmfError> {
    let mut c = Cursor {
        bytes,
        pos: 0,
        base,
        track: index,
    };
    let mut track = Track::default();
    let mut tick = 0u64;
    let mut running: Option<u8> = None;
    let mut ended = false;

    while c.pos < bytes.len() {
        tick += c.varint()? as u64;
        let first = c.u8()?;
        let status = if first & 0x80 != 0 {
            first
        } else {
            c.pos -= 1;
            running.ok_or_else(|| c.err("data byte without running status"))?
        };

        match status {
            0x80..=0xef => {
                running = Some(status);
                let channel = status & 0x0f;
                match status & 0xf0 {
                    0x80 | 0x90 => {
                        let note = c.data()?;
                        let velocity = c.data()?;
                        let event = if status & 0xf0 == 0x90 && velocity > 0 {
                            MidiEvent::NoteOn {
                                channel,
                                note,
                                velocity,
                            }
                        } else {
                            MidiEvent::NoteOff {
                                channel,
                                note,
                                velocity,
                            }
                        };
                        track.events.push(TimedEvent { tick, event });
                    }
                    0xc0 | 0xd0 => {
                        c.data()?;
                    }
                    _ => {
                        c.data()?;
                        c.data()?;
                    }
                }
            }
            0xff => {
                running = None;
                let kind = c.u8()?;
                let len = c.varint()? as usize;
                let data = c.skip(len)?;
                match kind {
                    0x51 if len == 3 => {
                        let us = u32::from_be_bytes([0, data[0], data[1], data[2]]);
                        track.events.push(TimedEvent {
                            tick,
                            event: MidiEvent::Tempo(us),
                        });
                    }
                    0x2f => {
                        ended = true;
                        break;
                    }
                    _ => {}
                }
            }
            0xf0 | 0xf7 => {
                running = None;
                let len = c.varint()? as usize;
                c.skip(len)?;
            }
            other => return Err(c.err(format!("status byte {other:#04x} is not valid in a file"))),
        }
    }
    if !ended {
        warnings.push(SmfWarning::MissingEndOfTrack { track: index });
    }
    track.end_tick = tick;
    Ok(track)
}

/// Match note-offs to the earliest open note of the same channel and pitch.
fn pair_notes(tracks: &[Track], tempo: &TempoMap, warnings: &mut Vec<SmfWarning>) -> NoteSequence {
    let mut notes = Vec::new();
    let mut emit = |on_tick: u64, off_tick: u64, note: u8, velocity: u8| {
        let (s0, b0) = tempo.ticks_to_time(on_tick);
        let (s1, _) = tempo.ticks_to_time(off_tick);
        notes.push(NoteEvent {
            note,
            velocity,
            start_seconds: s0,
            start_beats: b0,
            duration_seconds: s1 - s0,
            duration_beats: (off_tick - on_tick) as f64 / tempo.ticks_per_quarter() as f64,
        });
    };

    for (t, track) in tracks.iter().enumerate() {
        let mut open: HashMap<(u8, u8), VecDeque<(u64, u8)>> = HashMap::new();
        for e in &track.events {
            match e.event {
                MidiEvent::NoteOn {
                    channel,
                    note,
                    velocity,
                } => open.entry((channel, note)).or_default().push_back((e.tick, velocity)),
                MidiEvent::NoteOff { channel, note, .. } => {
                    match open.get_mut(&(channel, note)).and_then(VecDeque::pop_front) {
                        Some((on, _)) if on == e.tick => warnings.push(SmfWarning::ZeroLengthNote {
                            track: t,
                            note,
                            tick: on,
                        }),
                        Some((on, velocity)) => emit(on, e.tick, note, velocity),
                        None => warnings.push(SmfWarning::UnmatchedNoteOff {
                            track: t,
                            channel,
                            note,
                            tick: e.tick,
                        }),
                    }
                }
                MidiEvent::Tempo(_) => {}
            }
        }
        let mut dangling: Vec<((u8, u8), (u64, u8))> = open
            .into_iter()
            .flat_map(|(k, q)| q.into_iter().map(move |v| (k, v)))
            .collect();
        dangling.sort();
        for ((channel, note), (tick, velocity)) in dangling {
            warnings.push(SmfWarning::DanglingNoteOn {
                track: t,
                channel,
                note,
                tick,
            });
            if track.end_tick > tick {
                emit(tick, track.end_tick, note, velocity);
            }
        }
    }
    NoteSequence::new(notes)
}
