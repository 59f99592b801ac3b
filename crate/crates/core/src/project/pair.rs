//! Tempo/key distance between stems and greedy a cappella ↔ instrumental
//! matching.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PairError {
    #[error("invalid key `{0}` (expected e.g. `Gmaj`, `F#min`, `Bbmaj`)")]
    BadKey(String),
    #[error("no {0} stems given")]
    EmptyRole(Role),
    #[error("stem {index} ({path}) lacks a valid `{field}`")]
    MissingMetadata {
        index: usize,
        path: String,
        field: &'static str,
    },
    #[error("malformed manifest: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Major,
    Minor,
}

/// A tonic pitch class (0 = C) and mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Key {
    pub tonic: u8,
    pub mode: Mode,
}

const NAMES: [&str; 12] = ["C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B"];

impl Key {
    pub fn new(tonic: u8, mode: Mode) -> Self {
        Self {
            tonic: tonic % 12,
            mode,
        }
    }

    pub fn major(tonic: u8) -> Self {
        Self::new(tonic, Mode::Major)
    }

    pub fn minor(tonic: u8) -> Self {
        Self::new(tonic, Mode::Minor)
    }

    /// Position on the circle of fifths of the key or its relative major.
    pub fn circle_position(&self) -> u8 {
        let major = match self.mode {
            Mode::Major => self.tonic,
            Mode::Minor => (self.tonic + 3) % 12,
        };
        (major * 7) % 12
    }

    /// All 24 keys, majors first.
    pub fn all() -> impl Iterator<Item = Key> {
        (0..12).map(Key::major).chain((0..12).map(Key::minor))
    }
}

impl fmt::Display for Key {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let suffix = match self.mode {
            Mode::Major => "maj",
            Mode::Minor => "min",
        };
        write!(f, "{}{}", NAMES[self.tonic as usize], suffix)
    }
}

impl FromStr for Key {
    type Err = PairError;

    /// Accepts a letter, optional `#`/`b`, then `maj`/`major`/`min`/`minor`/`m`,
    /// case-insensitive and with optional whitespace.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || PairError::BadKey(s.to_string());
        let t = s.trim();
        let mut chars = t.chars();
        let letter = chars.next().ok_or_else(bad)?;
        let base: i32 = match letter.to_ascii_uppercase() {
            'C' => 0,
            'D' => 2,
            'E' => 4,
            'F' => 5,
            'G' => 7,
            'A' => 9,
            'B' => 11,
            _ => return Err(bad()),
        };
        let rest = chars.as_str();
        let mut tail = rest.chars();
        let (shift, rest) = match tail.next() {
            Some('#') | Some('♯') => (1, tail.as_str()),
            Some('b') | Some('♭') => (-1, tail.as_str()),
            _ => (0, rest),
        };
        let mode = match rest.trim().to_ascii_lowercase().as_str() {
            "maj" | "major" | "" => Mode::Major,
            "min" | "minor" | "m" => Mode::Minor,
            _ => return Err(bad()),
        };
        Ok(Key::new((base + shift).rem_euclid(12) as u8, mode))
    }
}

impl Serialize for Key {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Key {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Steps between two keys on the circle of fifths, 0 to 6.
pub fn key_circle_distance(a: Key, b: Key) -> u8 {
    let d = (a.circle_position() as i32 - b.circle_position() as i32).unsigned_abs() as u8;
    d.min(12 - d)
}

/// Tempo ratios tried when comparing tempi (half-time, same, double-time).
pub const TEMPO_RATIOS: [f64; 3] = [0.5, 1.0, 2.0];

/// `min_r |log2(bpm_a * r / bpm_b)|` and the minimizing `r` (first wins ties).
pub fn tempo_distance(bpm_a: f64, bpm_b: f64) -> (f64, f64) {
    let octaves = bpm_a.log2() - bpm_b.log2();
    let mut best = (f64::INFINITY, 1.0);
    for r in TEMPO_RATIOS {
        let d = (octaves + r.log2()).abs();
        if d < best.0 {
            best = (d, r);
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Weights {
    pub tempo: f64,
    pub key: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Self { tempo: 1.0, key: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Acapella,
    Instrumental,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Acapella => "acapella",
            Role::Instrumental => "instrumental",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StemDescriptor {
    pub path: String,
    pub bpm: f64,
    pub key: Key,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub role: Option<Role>,
}

/// `sqrt((w_tempo * Δt)^2 + (w_key * Δk / 6)^2)`.
pub fn pair_distance(a: &StemDescriptor, b: &StemDescriptor, weights: Weights) -> f64 {
    let dt = tempo_distance(a.bpm, b.bpm).0;
    let dk = key_circle_distance(a.key, b.key) as f64 / 6.0;
    (weights.tempo * dt).hypot(weights.key * dk)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pairing {
    pub acapella: usize,
    pub instrumental: usize,
    pub distance: f64,
    /// Factor applied to the a cappella tempo to reach the instrumental's.
    pub tempo_ratio: f64,
}

/// Every cross-role distance, `[acapella][instrumental]`.
pub fn distance_matrix(
    acapellas: &[StemDescriptor],
    instrumentals: &[StemDescriptor],
    weights: Weights,
) -> Vec<Vec<f64>> {
    acapellas
        .iter()
        .map(|a| instrumentals.iter().map(|b| pair_distance(a, b, weights)).collect())
        .collect()
}

/// Repeatedly take the closest remaining pair. Ties go to the lower
/// a cappella index, then the lower instrumental index.
pub fn greedy_pairs(
    acapellas: &[StemDescriptor],
    instrumentals: &[StemDescriptor],
    weights: Weights,
) -> Result<Vec<Pairing>, PairError> {
    if acapellas.is_empty() {
        return Err(PairError::EmptyRole(Role::Acapella));
    }
    if instrumentals.is_empty() {
        return Err(PairError::EmptyRole(Role::Instrumental));
    }
    let matrix = distance_matrix(acapellas, instrumentals, weights);
    let mut candidates: Vec<(f64, usize, usize)> = matrix
        .iter()
        .enumerate()
        .flat_map(|(i, row)| row.iter().enumerate().map(move |(j, &d)| (d, i, j)))
        .collect();
    candidates.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    let mut used_a = vec![false; acapellas.len()];
    let mut used_b = vec![false; instrumentals.len()];
    let mut out = Vec::new();
    for (d, i, j) in candidates {
        if used_a[i] || used_b[j] {
            continue;
        }
        used_a[i] = true;
        used_b[j] = true;
        out.push(Pairing {
            acapella: i,
            instrumental: j,
            distance: d,
            tempo_ratio: tempo_distance(acapellas[i].bpm, instrumentals[j].bpm).1,
        });
    }
    Ok(out)
}

#[derive(Deserialize)]
struct RawStem {
    path: Option<String>,
    bpm: Option<f64>,
    key: Option<String>,
    role: Option<Role>,
}

/// Parse a manifest (JSON array of stems). Relative paths are resolved
/// against `base_dir`.
pub fn parse_manifest(text: &str, base_dir: &Path) -> Result<Vec<StemDescriptor>, PairError> {
    let raw: Vec<RawStem> = serde_json::from_str(text).map_err(|e| PairError::Malformed(e.to_string()))?;
    raw.into_iter()
        .enumerate()
        .map(|(index, r)| {
            let missing = |field, path: &Option<String>| PairError::MissingMetadata {
                index,
                path: path.clone().unwrap_or_default(),
                field,
            };
            let path = r
                .path
                .clone()
                .filter(|p| !p.is_empty())
                .ok_or_else(|| missing("path", &r.path))?;
            let bpm = r
                .bpm
                .filter(|b| *b > 0.0 && b.is_finite())
                .ok_or_else(|| missing("bpm", &r.path))?;
            let key = match r.key.as_deref() {
                Some(k) => k
                    .parse()
                    .map_err(|e| PairError::Malformed(format!("stem {index} ({path}): {e}")))?,
                None => return Err(missing("key", &r.path)),
            };
            let full: PathBuf = base_dir.join(&path);
            Ok(StemDescriptor {
                path: full.to_string_lossy().into_owned(),
                bpm,
                key,
                role: r.role,
            })
        })
        .collect()
}
