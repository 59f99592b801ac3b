//! RIFF/WAVE reading and writing: 16- and 24-bit PCM and 32-bit float.

use thiserror::Error;

use crate::buffer::AudioBuffer;

const FORMAT_PCM: u16 = 1;
const FORMAT_FLOAT: u16 = 3;
const FORMAT_EXTENSIBLE: u16 = 0xfffe;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WavError {
    #[error("not a RIFF/WAVE file")]
    NotRiff,
    #[error("missing `{0}` chunk")]
    MissingChunk(&'static str),
    #[error("unsupported encoding: {0}")]
    UnsupportedEncoding(String),
    #[error("malformed WAV: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Encoding {
    Pcm16,
    Pcm24,
    Float32,
}

impl Encoding {
    pub fn bytes_per_sample(self) -> usize {
        match self {
            Encoding::Pcm16 => 2,
            Encoding::Pcm24 => 3,
            Encoding::Float32 => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavFormat {
    pub encoding: Encoding,
    pub channels: u16,
    pub sample_rate: u32,
}

fn le16(b: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([b[at], b[at + 1]])
}

fn le32(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([b[at], b[at + 1], b[at + 2], b[at + 3]])
}

/// Decode a WAV file into floating samples (PCM scaled by 1/32768 or
/// 1/8388608). Unknown chunks are skipped.
pub fn read_wav(bytes: &[u8]) -> Result<(AudioBuffer, WavFormat), WavError> {
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(WavError::NotRiff);
    }
    let mut fmt: Option<WavFormat> = None;
    let mut data: Option<&[u8]> = None;
    let mut at = 12;
    while bytes.len().saturating_sub(at) >= 8 {
        let id = &bytes[at..at + 4];
        let len = le32(bytes, at + 4) as usize;
        let body = at + 8;
        // Writers sometimes leave a streaming placeholder length on `data`.
        let end = body.saturating_add(len).min(bytes.len());
        let chunk = &bytes[body..end];
        match id {
            b"fmt " => fmt = Some(parse_fmt(chunk)?),
            b"data" => data = Some(chunk),
            _ => {}
        }
        at = end + (len & 1);
    }
    let fmt = fmt.ok_or(WavError::MissingChunk("fmt "))?;
    let data = data.ok_or(WavError::MissingChunk("data"))?;

    let channels = fmt.channels as usize;
    let width = fmt.encoding.bytes_per_sample();
    let frames = data.len() / (width * channels);
    let mut out = vec![Vec::with_capacity(frames); channels];
    for f in 0..frames {
        for (ch, dst) in out.iter_mut().enumerate() {
            let p = (f * channels + ch) * width;
            let s = &data[p..p + width];
            dst.push(match fmt.encoding {
                Encoding::Pcm16 => i16::from_le_bytes([s[0], s[1]]) as f64 / 32768.0,
                Encoding::Pcm24 => {
                    let v = i32::from_le_bytes([0, s[0], s[1], s[2]]) >> 8;
                    v as f64 / 8_388_608.0
                }
                Encoding::Float32 => f32::from_le_bytes([s[0], s[1], s[2], s[3]]) as f64,
            });
        }
    }
    let buffer =
        AudioBuffer::from_channels(out, fmt.sample_rate as f64).map_err(|e| WavError::Malformed(e.to_string()))?;
    Ok((buffer, fmt))
}

fn parse_fmt(chunk: &[u8]) -> Result<WavFormat, WavError> {
    if chunk.len() < 16 {
        return Err(WavError::Malformed("fmt chunk shorter than 16 bytes".into()));
    }
    let mut tag = le16(chunk, 0);
    let channels = le16(chunk, 2);
    let sample_rate = le32(chunk, 4);
    let bits = le16(chunk, 14);
    if tag == FORMAT_EXTENSIBLE {
        if chunk.len() < 26 {
            return Err(WavError::Malformed("extensible fmt chunk too short".into()));
        }
        // First two bytes of the subformat GUID carry the format code.
        tag = le16(chunk, 24);
    }
    if !(1..=2).contains(&channels) {
        return Err(WavError::UnsupportedEncoding(format!("{channels} channels")));
    }
    if sample_rate == 0 {
        return Err(WavError::Malformed("zero sample rate".into()));
    }
    let encoding = match (tag, bits) {
        (FORMAT_PCM, 16) => Encoding::Pcm16,
        (FORMAT_PCM, 24) => Encoding::Pcm24,
        (FORMAT_FLOAT, 32) => Encoding::Float32,
        (tag, bits) => {
            return Err(WavError::UnsupportedEncoding(format!(
                "format tag {tag:#06x} with {bits} bits"
            )))
        }
    };
    Ok(WavFormat {
        encoding,
        channels,
        sample_rate,
    })
}

/// Encode as a canonical 44-byte-header WAV. PCM quantization rounds to
/// nearest and saturates at full scale.
pub fn write_wav(buffer: &AudioBuffer, encoding: Encoding) -> Result<Vec<u8>, WavError> {
    let channels = buffer.num_channels();
    if channels > 2 {
        return Err(WavError::UnsupportedEncoding(format!("{channels} channels")));
    }
    let rate = buffer.sample_rate().round();
    if rate < 1.0 || rate > u32::MAX as f64 {
        return Err(WavError::UnsupportedEncoding(format!(
            "sample rate {}",
            buffer.sample_rate()
        )));
    }
    let rate = rate as u32;
    let width = encoding.bytes_per_sample();
    let frames = buffer.frames();
    let data_len = frames * channels * width;
    let (tag, bits) = match encoding {
        Encoding::Pcm16 => (FORMAT_PCM, 16u16),
        Encoding::Pcm24 => (FORMAT_PCM, 24),
        Encoding::Float32 => (FORMAT_FLOAT, 32),
    };
    let block_align = (channels * width) as u16;

    let mut out = Vec::with_capacity(44 + data_len);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&((36 + data_len) as u32).to_le_bytes());
    out.extend_from_slice(b"WAVEfmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&tag.to_le_bytes());
    out.extend_from_slice(&(channels as u16).to_le_bytes());
    out.extend_from_slice(&rate.to_le_bytes());
    out.extend_from_slice(&(rate * block_align as u32).to_le_bytes());
    out.extend_from_slice(&block_align.to_le_bytes());
    out.extend_from_slice(&bits.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&(data_len as u32).to_le_bytes());
    for f in 0..frames {
        for ch in 0..channels {
            let x = buffer.channel(ch)[f];
            match encoding {
                Encoding::Pcm16 => out.extend_from_slice(&quantize(x, 32768.0).to_le_bytes()[..2]),
                Encoding::Pcm24 => out.extend_from_slice(&quantize(x, 8_388_608.0).to_le_bytes()[..3]),
                Encoding::Float32 => out.extend_from_slice(&(x as f32).to_le_bytes()),
            }
        }
    }
    Ok(out)
}

fn quantize(x: f64, full_scale: f64) -> i32 {
    let x = if x.is_nan() { 0.0 } else { x };
    (x * full_scale).round().clamp(-full_scale, full_scale - 1.0) as i32
}
