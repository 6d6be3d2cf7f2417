//! Dataset builds and loading.
//!
//! A dataset directory holds `manifest.jsonl` (one `{path, sha256}` line per
//! problem, in build order), `problems/{id}.json` and
//! `panels/{id}_panel{k}.svg` (plus `.png` when requested).

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use mns_core::aog::{InterpretationKind, ProblemType, SpecFilter};
use mns_core::generator::{generate_problem, GenerateError, Problem};
use mns_core::render::{rasterize, render_panel, RenderError, RenderSpec};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const MANIFEST: &str = "manifest.jsonl";

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("generation failed for seed {seed}: {source}")]
    Generate { seed: u64, source: GenerateError },
    #[error("render failed for {id}: {source}")]
    Render { id: String, source: RenderError },
    #[error("no dataset at {0} (missing {MANIFEST})")]
    MissingDataset(PathBuf),
    #[error("corrupt problem {id}: {reason}")]
    CorruptProblem { id: String, reason: String },
    #[error("io error at {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> DatasetError + '_ {
    move |source| DatasetError::Io { path: path.to_path_buf(), source }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub sha256: String,
}

/// User-facing filters; cells not excluded are filled round-robin.
#[derive(Debug, Clone, Default)]
pub struct GenFilters {
    pub problem_type: Option<ProblemType>,
    pub interpretation: Option<InterpretationKind>,
    pub integer_count: Option<u8>,
}

#[derive(Debug, Clone)]
pub struct GenConfig {
    pub count: usize,
    pub seed: u64,
    pub filters: GenFilters,
    pub render: RenderSpec,
    pub png: bool,
}

/// Spec filter for problem `i`: balanced over the type x interpretation cells
/// the user filters allow, seed `seed + i`.
pub fn cell_filter(filters: &GenFilters, i: usize) -> SpecFilter {
    let types: Vec<ProblemType> = match filters.problem_type {
        Some(t) => vec![t],
        None => ProblemType::ALL.to_vec(),
    };
    let interps: Vec<InterpretationKind> = match filters.interpretation {
        Some(k) => vec![k],
        None => InterpretationKind::ALL.to_vec(),
    };
    let cell = i % (types.len() * interps.len());
    SpecFilter {
        problem_type: Some(types[cell / interps.len()]),
        interpretation: Some(interps[cell % interps.len()]),
        integer_count: filters.integer_count,
        ..SpecFilter::default()
    }
}

/// Generates the problems of a build without touching the filesystem.
pub fn generate_all(cfg: &GenConfig) -> Result<Vec<Problem>, DatasetError> {
    (0..cfg.count)
        .into_par_iter()
        .map(|i| {
            let seed = cfg.seed.wrapping_add(i as u64);
            generate_problem(seed, &cell_filter(&cfg.filters, i)).map_err(|source| DatasetError::Generate { seed, source })
        })
        .collect()
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Builds a dataset into `out`. Output goes to `<out>.partial` first and is
/// moved into place only when complete.
pub fn cmd_gen(cfg: &GenConfig, out: &Path) -> Result<Vec<ManifestEntry>, DatasetError> {
    let problems = generate_all(cfg)?;
    write_dataset(&problems, &cfg.render, cfg.png, out)
}

/// Writes `problems` as a dataset directory, replacing `out` atomically.
pub fn write_dataset(
    problems: &[Problem],
    render: &RenderSpec,
    png: bool,
    out: &Path,
) -> Result<Vec<ManifestEntry>, DatasetError> {
    let partial = PathBuf::from(format!("{}.partial", out.display()));
    match build_into(problems, render, png, &partial) {
        Ok(manifest) => {
            if out.exists() {
                fs::remove_dir_all(out).map_err(io_err(out))?;
            }
            fs::rename(&partial, out).map_err(io_err(out))?;
            Ok(manifest)
        }
        Err(e) => {
            let _ = fs::remove_dir_all(&partial);
            Err(e)
        }
    }
}

fn build_into(problems: &[Problem], render: &RenderSpec, png: bool, dir: &Path) -> Result<Vec<ManifestEntry>, DatasetError> {
    if dir.exists() {
        fs::remove_dir_all(dir).map_err(io_err(dir))?;
    }
    for sub in ["problems", "panels"] {
        let p = dir.join(sub);
        fs::create_dir_all(&p).map_err(io_err(&p))?;
    }
    let manifest: Vec<ManifestEntry> = problems
        .par_iter()
        .map(|p| write_problem(render, png, dir, p))
        .collect::<Result<_, _>>()?;
    let mut text = String::new();
    for entry in &manifest {
        text.push_str(&serde_json::to_string(entry).expect("manifest entries serialize"));
        text.push('\n');
    }
    let path = dir.join(MANIFEST);
    fs::write(&path, text).map_err(io_err(&path))?;
    log::info!("wrote {} problems", manifest.len());
    Ok(manifest)
}

fn write_problem(render: &RenderSpec, png: bool, dir: &Path, p: &Problem) -> Result<ManifestEntry, DatasetError> {
    let json = p.to_json();
    let rel = format!("problems/{}.json", p.id);
    let path = dir.join(&rel);
    fs::write(&path, &json).map_err(io_err(&path))?;
    let public = p.public();
    for k in 0..3 {
        let svg = render_panel(&public, k, render).map_err(|source| DatasetError::Render { id: p.id.clone(), source })?;
        let path = dir.join(format!("panels/{}_panel{k}.svg", p.id));
        fs::write(&path, &svg).map_err(io_err(&path))?;
        if png {
            let png = rasterize(&svg).map_err(|source| DatasetError::Render { id: p.id.clone(), source })?;
            let path = dir.join(format!("panels/{}_panel{k}.png", p.id));
            fs::write(&path, png).map_err(io_err(&path))?;
        }
    }
    Ok(ManifestEntry { path: rel, sha256: sha256_hex(json.as_bytes()) })
}

/// A loaded dataset. Problems that fail their digest or schema are listed in
/// `corrupt` and left out of `problems`.
#[derive(Debug, Clone, Default)]
pub struct Dataset {
    pub problems: Vec<Problem>,
    pub corrupt: Vec<(String, String)>,
}

pub fn load(dir: &Path) -> Result<Dataset, DatasetError> {
    let manifest_path = dir.join(MANIFEST);
    if !manifest_path.is_file() {
        return Err(DatasetError::MissingDataset(dir.to_path_buf()));
    }
    let text = fs::read_to_string(&manifest_path).map_err(io_err(&manifest_path))?;
    let mut out = Dataset::default();
    for (n, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let entry: ManifestEntry = match serde_json::from_str(line) {
            Ok(e) => e,
            Err(e) => {
                out.corrupt.push((format!("manifest line {}", n + 1), e.to_string()));
                continue;
            }
        };
        match load_entry(dir, &entry) {
            Ok(p) => out.problems.push(p),
            Err(DatasetError::CorruptProblem { id, reason }) => {
                log::warn!("skipping corrupt problem {id}: {reason}");
                out.corrupt.push((id, reason));
            }
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

fn load_entry(dir: &Path, entry: &ManifestEntry) -> Result<Problem, DatasetError> {
    let id = entry.path.trim_start_matches("problems/").trim_end_matches(".json").to_string();
    let corrupt = |reason: String| DatasetError::CorruptProblem { id: id.clone(), reason };
    let bytes = fs::read(dir.join(&entry.path)).map_err(|e| corrupt(e.to_string()))?;
    if sha256_hex(&bytes) != entry.sha256 {
        return Err(corrupt("digest mismatch".into()));
    }
    let text = String::from_utf8(bytes).map_err(|e| corrupt(e.to_string()))?;
    Problem::from_json(&text).map_err(|e| corrupt(e.to_string()))
}

/// Writes JSON lines to `path`.
pub fn write_jsonl<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), DatasetError> {
    let mut buf = Vec::new();
    for r in rows {
        serde_json::to_writer(&mut buf, r).expect("rows serialize");
        buf.push(b'\n');
    }
    let mut f = fs::File::create(path).map_err(io_err(path))?;
    f.write_all(&buf).map_err(io_err(path))
}
