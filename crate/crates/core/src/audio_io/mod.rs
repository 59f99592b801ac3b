//! WAV files and sample-rate conversion at asset load time.

mod resample;
mod wav;

pub use resample::{resample, resample_ratio};
pub use wav::{read_wav, write_wav, Encoding, WavError, WavFormat};

use std::path::Path;

use thiserror::Error;

use crate::buffer::AudioBuffer;

#[derive(Debug, Error)]
pub enum AudioFileError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Wav {
        path: String,
        #[source]
        source: WavError,
    },
}

/// Read a WAV file and convert it to `engine_rate` if needed.
pub fn load_wav_file(path: &Path, engine_rate: f64) -> Result<AudioBuffer, AudioFileError> {
    let bytes = std::fs::read(path).map_err(|source| AudioFileError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let (buffer, _) = read_wav(&bytes).map_err(|source| AudioFileError::Wav {
        path: path.display().to_string(),
        source,
    })?;
    Ok(resample(&buffer, engine_rate))
}

pub fn save_wav_file(path: &Path, buffer: &AudioBuffer, encoding: Encoding) -> Result<(), AudioFileError> {
    let bytes = write_wav(buffer, encoding).map_err(|source| AudioFileError::Wav {
        path: path.display().to_string(),
        source,
    })?;
    std::fs::write(path, bytes).map_err(|source| AudioFileError::Io {
        path: path.display().to_string(),
        source,
    })
}
