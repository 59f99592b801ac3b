//! `render`, `check-sum` and `pair`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::pair::{greedy_pairs, parse_manifest, PairError, Pairing, StemDescriptor, Weights};
use super::{load_project, AssetSpec, ClipSpec, NodeSpec, Overrides, ProjectError, ProjectFile};
use crate::audio_io::{read_wav, write_wav, AudioFileError, Encoding};
use crate::buffer::{adapted_sample, AudioBuffer};
use crate::graph::{GraphError, RenderResult};

/// Largest accepted |bus − Σ gain·stem| after a float32 round trip.
pub const SUM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Project(#[from] ProjectError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Pair(#[from] PairError),
    #[error(transparent)]
    Audio(#[from] AudioFileError),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Invalid(String),
}

impl CliError {
    /// 0 is success; 1 means invalid input, 2 an I/O failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Project(e) => e.exit_code(),
            CliError::Audio(AudioFileError::Io { .. }) | CliError::Io { .. } => 2,
            _ => 1,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn check_file_stem(name: &str) -> Result<(), CliError> {
    let bad = name.is_empty() || name == "." || name == ".." || name.contains(['/', '\\', '\0']);
    if bad {
        return Err(CliError::Invalid(format!(
            "node name `{name}` cannot be used as a file name"
        )));
    }
    Ok(())
}

/// Render a project and write `<node>.wav` (float32) for every recorded
/// node. Returns the written paths in node-name order.
pub fn cmd_render(project: &Path, out_dir: &Path, overrides: Overrides) -> Result<Vec<PathBuf>, CliError> {
    let mut loaded = load_project(project, overrides)?;
    for w in &loaded.warnings {
        eprintln!("warning: {w}");
    }
    let result = loaded.render()?;
    for name in result.names() {
        check_file_stem(name)?;
    }
    std::fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let mut written = Vec::new();
    for (name, buffer) in result.iter() {
        let path = out_dir.join(format!("{name}.wav"));
        let bytes = write_wav(buffer, Encoding::Float32).map_err(|e| CliError::Invalid(format!("{name}: {e}")))?;
        std::fs::write(&path, bytes).map_err(io_err(&path))?;
        written.push(path);
    }
    Ok(written)
}

/// Outcome of checking one bus against its stems.
#[derive(Debug, Clone, PartialEq)]
pub struct SumCheck {
    pub bus: String,
    pub stems: Vec<String>,
    pub max_error: f64,
}

impl SumCheck {
    pub fn passed(&self) -> bool {
        self.max_error <= SUM_TOLERANCE
    }
}

/// Check every recorded `add` node whose inputs are all recorded: the bus
/// must equal the gain-weighted sum of its inputs after each buffer goes
/// through a float32 WAV. With `rendered_dir`, buffers are read from
/// `<node>.wav` files there instead of being rendered.
pub fn cmd_check_sum(
    project: &Path,
    rendered_dir: Option<&Path>,
    overrides: Overrides,
) -> Result<Vec<SumCheck>, CliError> {
    let mut loaded = load_project(project, overrides)?;
    let sample_rate = loaded.graph.sample_rate();
    let buses: Vec<(String, Vec<String>)> = loaded
        .graph
        .nodes()
        .iter()
        .filter(|n| n.kind() == "add" && n.record())
        .map(|n| {
            let inputs = n
                .input_ids()
                .iter()
                .map(|&i| loaded.graph.nodes()[i].name().to_string())
                .collect::<Vec<_>>();
            (n.name().to_string(), inputs)
        })
        .filter(|(_, inputs)| inputs.iter().all(|i| loaded.graph.node(i).is_some_and(|n| n.record())))
        .collect();
    if buses.is_empty() {
        return Err(CliError::Invalid(
            "no recorded `add` node has all of its inputs recorded".into(),
        ));
    }

    let buffers: BTreeMap<String, AudioBuffer> = match rendered_dir {
        Some(dir) => {
            let mut map = BTreeMap::new();
            for (bus, stems) in &buses {
                for name in std::iter::once(bus).chain(stems) {
                    let path = dir.join(format!("{name}.wav"));
                    let bytes = std::fs::read(&path).map_err(io_err(&path))?;
                    let (b, _) = read_wav(&bytes).map_err(|source| AudioFileError::Wav {
                        path: path.display().to_string(),
                        source,
                    })?;
                    map.insert(name.clone(), b);
                }
            }
            map
        }
        None => round_trip_f32(loaded.render()?)?,
    };

    let frames = loaded.graph.frames_for(loaded.duration_seconds)?;
    let mut checks = Vec::new();
    for (bus, stems) in buses {
        let node = loaded.graph.node(&bus).expect("bus exists");
        let bus_buf = &buffers[&bus];
        if bus_buf.sample_rate() != sample_rate || bus_buf.frames() != frames {
            return Err(CliError::Invalid(format!(
                "`{bus}.wav` does not match the project settings"
            )));
        }
        let gains: Vec<Vec<f64>> = (0..stems.len())
            .map(|i| {
                let name = format!("gain_{i}");
                let spec = node.param_specs().iter().find(|s| s.name == name).expect("gain lane");
                let scalar = node.parameter(&name).expect("gain value");
                (0..frames)
                    .map(|n| match node.automation(&name) {
                        Some(a) => spec.clamp(a.value_at(n, scalar)),
                        None => scalar,
                    })
                    .collect()
            })
            .collect();
        let channels = bus_buf.num_channels();
        let mut max_error: f64 = 0.0;
        for ch in 0..channels {
            for n in 0..frames {
                let mut sum = 0.0;
                for (gain, stem) in gains.iter().zip(&stems) {
                    let s = &buffers[stem];
                    sum += gain[n] * adapted_sample(s.channels(), channels, ch, n);
                }
                max_error = max_error.max((bus_buf.channel(ch)[n] - sum).abs());
            }
        }
        checks.push(SumCheck { bus, stems, max_error });
    }
    Ok(checks)
}

fn round_trip_f32(result: RenderResult) -> Result<BTreeMap<String, AudioBuffer>, CliError> {
    result
        .into_map()
        .into_iter()
        .map(|(name, b)| {
            let bytes = write_wav(&b, Encoding::Float32).map_err(|e| CliError::Invalid(format!("{name}: {e}")))?;
            let (back, _) = read_wav(&bytes).map_err(|e| CliError::Invalid(format!("{name}: {e}")))?;
            Ok((name, back))
        })
        .collect()
}

/// Options for [`cmd_pair`].
#[derive(Debug, Clone, Default)]
pub struct PairOptions {
    pub weights: Weights,
    pub emit_projects: Option<PathBuf>,
}

/// Pairings plus the text report and any emitted project paths.
#[derive(Debug, Clone)]
pub struct PairReport {
    pub acapellas: Vec<StemDescriptor>,
    pub instrumentals: Vec<StemDescriptor>,
    pub pairs: Vec<Pairing>,
    pub projects: Vec<PathBuf>,
}

impl PairReport {
    pub fn table(&self) -> String {
        let mut s = String::from("rank\tdistance\ttempo_ratio\tacapella\tinstrumental\n");
        for (rank, p) in self.pairs.iter().enumerate() {
            let a = &self.acapellas[p.acapella];
            let b = &self.instrumentals[p.instrumental];
            let _ = writeln!(
                s,
                "{}\t{:.6}\t{}\t{} ({} bpm, {})\t{} ({} bpm, {})",
                rank + 1,
                p.distance,
                p.tempo_ratio,
                a.path,
                a.bpm,
                a.key,
                b.path,
                b.bpm,
                b.key
            );
        }
        s
    }
}

fn read_manifest(path: &Path) -> Result<Vec<StemDescriptor>, CliError> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    Ok(parse_manifest(&text, path.parent().unwrap_or(Path::new(".")))?)
}

pub fn cmd_pair(acapellas: &Path, instrumentals: &Path, options: &PairOptions) -> Result<PairReport, CliError> {
    let a = read_manifest(acapellas)?;
    let b = read_manifest(instrumentals)?;
    let pairs = greedy_pairs(&a, &b, options.weights)?;
    let mut projects = Vec::new();
    if let Some(dir) = &options.emit_projects {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
        for (rank, p) in pairs.iter().enumerate() {
            let project = mashup_project(&a[p.acapella], &b[p.instrumental], p.tempo_ratio)?;
            let path = dir.join(format!("pair_{:02}.json", rank + 1));
            std::fs::write(&path, project.to_json()).map_err(io_err(&path))?;
            projects.push(path);
        }
    }
    Ok(PairReport {
        acapellas: a,
        instrumentals: b,
        pairs,
        projects,
    })
}

fn wav_seconds(path: &str) -> Result<f64, CliError> {
    let p = Path::new(path);
    let bytes = std::fs::read(p).map_err(io_err(p))?;
    let (b, _) = read_wav(&bytes).map_err(|source| AudioFileError::Wav {
        path: path.to_string(),
        source,
    })?;
    Ok(b.duration_seconds())
}

fn absolute(path: &str) -> String {
    std::fs::canonicalize(path)
        .map(|p| p.to_string_lossy().into_owned())
        .unwrap_or_else(|_| path.to_string())
}

/// Project mixing an a cappella warped to the instrumental's tempo with
/// the instrumental, all three tracks recorded. Lasts as long as the
/// shorter of the two as heard.
pub fn mashup_project(
    acapella: &StemDescriptor,
    instrumental: &StemDescriptor,
    tempo_ratio: f64,
) -> Result<ProjectFile, CliError> {
    let source_bpm = acapella.bpm * tempo_ratio;
    let warped = wav_seconds(&acapella.path)? * source_bpm / instrumental.bpm;
    let duration = warped.min(wav_seconds(&instrumental.path)?);
    let mut assets = BTreeMap::new();
    assets.insert(
        "acapella".to_string(),
        AssetSpec {
            path: Some(absolute(&acapella.path)),
            ..AssetSpec::default()
        },
    );
    assets.insert(
        "instrumental".to_string(),
        AssetSpec {
            path: Some(absolute(&instrumental.path)),
            ..AssetSpec::default()
        },
    );
    let mut vocal = NodeSpec::new("acapella", "playback_warp");
    vocal.asset = Some("acapella".into());
    vocal.record = true;
    vocal.clip = Some(ClipSpec {
        source_bpm: Some(source_bpm),
        ..ClipSpec::default()
    });
    let mut backing = NodeSpec::new("instrumental", "playback");
    backing.asset = Some("instrumental".into());
    backing.record = true;
    let mut mix = NodeSpec::new("mix", "add");
    mix.inputs = vec!["acapella".into(), "instrumental".into()];
    mix.record = true;
    Ok(ProjectFile {
        sample_rate: crate::graph::DEFAULT_SAMPLE_RATE,
        block_size: crate::graph::DEFAULT_BLOCK_SIZE,
        bpm: instrumental.bpm,
        duration_seconds: duration,
        assets,
        nodes: vec![vocal, backing, mix],
    })
}
