//! Planar multichannel sample storage.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BufferError {
    #[error("a buffer needs at least one channel")]
    NoChannels,
    #[error("channel {channel} has {found} frames, expected {expected}")]
    RaggedChannels {
        channel: usize,
        expected: usize,
        found: usize,
    },
    #[error("sample rate must be positive and finite, got {0}")]
    BadSampleRate(f64),
}

/// Audio held as one `Vec<f64>` per channel, all of equal length.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer {
    channels: Vec<Vec<f64>>,
    sample_rate: f64,
}

impl AudioBuffer {
    /// A silent buffer.
    pub fn zeros(channels: usize, frames: usize, sample_rate: f64) -> Result<Self, BufferError> {
        Self::from_channels(vec![vec![0.0; frames]; channels], sample_rate)
    }

    pub fn from_channels(channels: Vec<Vec<f64>>, sample_rate: f64) -> Result<Self, BufferError> {
        if channels.is_empty() {
            return Err(BufferError::NoChannels);
        }
        if !(sample_rate > 0.0 && sample_rate.is_finite()) {
            return Err(BufferError::BadSampleRate(sample_rate));
        }
        let expected = channels[0].len();
        if let Some((channel, c)) = channels.iter().enumerate().find(|(_, c)| c.len() != expected) {
            return Err(BufferError::RaggedChannels {
                channel,
                expected,
                found: c.len(),
            });
        }
        Ok(Self { channels, sample_rate })
    }

    pub fn from_mono(samples: Vec<f64>, sample_rate: f64) -> Result<Self, BufferError> {
        Self::from_channels(vec![samples], sample_rate)
    }

    pub fn num_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn frames(&self) -> usize {
        self.channels[0].len()
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn duration_seconds(&self) -> f64 {
        self.frames() as f64 / self.sample_rate
    }

    pub fn channel(&self, index: usize) -> &[f64] {
        &self.channels[index]
    }

    pub fn channel_mut(&mut self, index: usize) -> &mut [f64] {
        &mut self.channels[index]
    }

    pub fn channels(&self) -> &[Vec<f64>] {
        &self.channels
    }

    pub fn into_channels(self) -> Vec<Vec<f64>> {
        self.channels
    }

    /// Sample `frame` of output channel `channel` when this buffer is viewed
    /// with `target_channels` channels.
    #[inline]
    pub fn adapted_sample(&self, target_channels: usize, channel: usize, frame: usize) -> f64 {
        adapted_sample(&self.channels, target_channels, channel, frame)
    }

    /// Copy with the channel layout converted to `target_channels`.
    pub fn adapted(&self, target_channels: usize) -> AudioBuffer {
        let frames = self.frames();
        let channels = (0..target_channels)
            .map(|ch| {
                (0..frames)
                    .map(|n| self.adapted_sample(target_channels, ch, n))
                    .collect()
            })
            .collect();
        AudioBuffer {
            channels,
            sample_rate: self.sample_rate,
        }
    }

    /// Copy of frames `[start, end)`, zero-filled past the end of the buffer.
    pub fn slice_padded(&self, start: isize, end: isize) -> AudioBuffer {
        let len = (end - start).max(0) as usize;
        let channels = self
            .channels
            .iter()
            .map(|c| {
                (0..len)
                    .map(|k| {
                        let i = start + k as isize;
                        if i >= 0 && (i as usize) < c.len() {
                            c[i as usize]
                        } else {
                            0.0
                        }
                    })
                    .collect()
            })
            .collect();
        AudioBuffer {
            channels,
            sample_rate: self.sample_rate,
        }
    }
}

/// Channel adaptation used throughout the engine: a mono source is
/// duplicated onto every channel; a multichannel source viewed as mono is
/// averaged; otherwise channels map one to one (extra target channels reuse
/// the last source channel).
#[inline]
pub fn adapted_sample<C: AsRef<[f64]>>(source: &[C], target_channels: usize, channel: usize, frame: usize) -> f64 {
    let n = source.len();
    if n == 1 {
        source[0].as_ref()[frame]
    } else if target_channels == 1 {
        let sum: f64 = source.iter().map(|c| c.as_ref()[frame]).sum();
        sum / n as f64
    } else {
        source[channel.min(n - 1)].as_ref()[frame]
    }
}
