use super::{NoteSequence, TempoMap};

fn push_varint(out: &mut Vec<u8>, mut value: u32) {
    let mut buf = [0u8; 5];
    let mut i = buf.len() - 1;
    buf[i] = (value & 0x7f) as u8;
    value >>= 7;
    while value > 0 {
        i -= 1;
        buf[i] = 0x80 | (value & 0x7f) as u8;
        value >>= 7;
    }
    out.extend_from_slice(&buf[i..]);
}

/// Minimal format-0 file with the given tempo map and notes on channel 0.
///
/// Note times are taken from the beat fields and rounded to ticks. Running
/// status is used wherever consecutive events share a status byte.
pub fn write_smf(notes: &NoteSequence, tempo: &TempoMap) -> Vec<u8> {
    // (tick, order, status, data1, data2); order puts tempo before offs
    // before ons on a shared tick.
    let mut events: Vec<(u64, u8, u8, u8, u8, u32)> = Vec::new();
    for &(tick, us) in tempo.entries() {
        events.push((tick, 0, 0xff, 0, 0, us));
    }
    for n in notes.notes() {
        let on = tempo.beats_to_ticks(n.start_beats);
        let off = tempo.beats_to_ticks(n.start_beats + n.duration_beats).max(on + 1);
        events.push((on, 2, 0x90, n.note & 0x7f, n.velocity.clamp(1, 127), 0));
        events.push((off, 1, 0x80, n.note & 0x7f, 64, 0));
    }
    events.sort();

    let mut track = Vec::new();
    let mut last_tick = 0u64;
    let mut running: Option<u8> = None;
    for (tick, _, status, d1, d2, us) in events {
        push_varint(&mut track, (tick - last_tick) as u32);
        last_tick = tick;
        if status == 0xff {
            track.extend_from_slice(&[0xff, 0x51, 0x03]);
            track.extend_from_slice(&us.to_be_bytes()[1..]);
            running = None;
        } else {
            if running != Some(status) {
                track.push(status);
                running = Some(status);
            }
            track.extend_from_slice(&[d1, d2]);
        }
    }
    track.extend_from_slice(&[0x00, 0xff, 0x2f, 0x00]);

    let mut out = Vec::with_capacity(track.len() + 22);
    out.extend_from_slice(b"MThd");
    out.extend_from_slice(&6u32.to_be_bytes());
    out.extend_from_slice(&0u16.to_be_bytes());
    out.extend_from_slice(&1u16.to_be_bytes());
    out.extend_from_slice(&tempo.ticks_per_quarter().to_be_bytes());
    out.extend_from_slice(b"MTrk");
    out.extend_from_slice(&(track.len() as u32).to_be_bytes());
    out.extend_from_slice(&track);
    out
}
