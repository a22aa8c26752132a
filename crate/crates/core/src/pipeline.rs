//! Batch dataset generation: sample, drape, and scan many garments from one
//! template with per-sample deterministic seeds.

use std::collections::BTreeMap;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::Instant;

use indexmap::IndexMap;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::body::BodyModel;
use crate::drape::{assemble_garment, simulate, DrapeError, SimConfig, SimReport, StitchPairs};
use crate::geometry::panel_self_intersects;
use crate::mesh::{GarmentMesh, MeshError};
use crate::params::{apply_all, sample_pattern, sample_seed, sampled_template, SampleRecord, Values, DEFAULT_MAX_RETRIES};
use crate::pattern::PatternSpec;
use crate::scan::{scan_detailed, ScanConfig};
use crate::template::{parse_template, serialize_template, ParseError, TemplateSpec};
use crate::templates::MANNEQUIN_OBJ;

pub const MANIFEST_FILE: &str = "dataset_properties.json";
pub const TIMINGS_FILE: &str = "timings.json";
pub const WORKERS_ENV: &str = "PATTERNFORGE_WORKERS";

pub const SPEC_FILE: &str = "spec.json";
pub const GARMENT_FILE: &str = "garment.obj";
pub const LABELS_FILE: &str = "segmentation.txt";
pub const SCAN_FILE: &str = "garment_scan.obj";
pub const SCAN_LABELS_FILE: &str = "segmentation_scan.txt";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Template {
        path: String,
        #[source]
        source: ParseError,
    },
    #[error("body: {0}")]
    Body(#[from] MeshError),
    #[error("{path}: {source}")]
    ConfigSyntax {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("invalid config: {0}")]
    Config(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io { path: path.display().to_string(), source }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Stages {
    pub sample: bool,
    pub drape: bool,
    pub scan: bool,
}

impl Default for Stages {
    fn default() -> Self {
        Self { sample: true, drape: true, scan: true }
    }
}

fn default_resolution() -> f64 {
    3.0
}

fn default_workers() -> usize {
    1
}

fn default_retries() -> u32 {
    DEFAULT_MAX_RETRIES
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub template: PathBuf,
    /// OBJ body mesh; the built-in mannequin when absent.
    #[serde(default)]
    pub body: Option<PathBuf>,
    pub sample_count: u32,
    #[serde(default)]
    pub base_seed: u64,
    /// Target mesh edge length in cm.
    #[serde(default = "default_resolution")]
    pub resolution: f64,
    #[serde(default)]
    pub sim: SimConfig,
    #[serde(default)]
    pub scan: ScanConfig,
    pub output_dir: PathBuf,
    #[serde(default = "default_workers")]
    pub worker_count: usize,
    #[serde(default)]
    pub stages: Stages,
    #[serde(default = "default_retries")]
    pub max_retries: u32,
    /// Parameter values used instead of sampling for the given indices.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub fixed_values: BTreeMap<u32, Values>,
}

impl PipelineConfig {
    pub fn new(template: impl Into<PathBuf>, sample_count: u32, output_dir: impl Into<PathBuf>) -> Self {
        Self {
            template: template.into(),
            body: None,
            sample_count,
            base_seed: 0,
            resolution: default_resolution(),
            sim: SimConfig::default(),
            scan: ScanConfig::default(),
            output_dir: output_dir.into(),
            worker_count: 1,
            stages: Stages::default(),
            max_retries: DEFAULT_MAX_RETRIES,
            fixed_values: BTreeMap::new(),
        }
    }

    /// Read a JSON config. Relative paths inside it are resolved against the
    /// config file's directory.
    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        let mut cfg: PipelineConfig = serde_json::from_str(&text)
            .map_err(|source| PipelineError::ConfigSyntax { path: path.display().to_string(), source })?;
        let base = path.parent().unwrap_or(Path::new(""));
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut cfg.template);
        if let Some(b) = cfg.body.as_mut() {
            fix(b);
        }
        fix(&mut cfg.output_dir);
        Ok(cfg)
    }

    /// Worker count after the environment override.
    pub fn effective_workers(&self) -> usize {
        std::env::var(WORKERS_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .unwrap_or(self.worker_count)
            .max(1)
    }

    pub fn check(&self) -> Result<(), PipelineError> {
        if self.sample_count < 1 {
            return Err(PipelineError::Config("sample_count must be at least 1".into()));
        }
        if !(self.resolution > 0.0 && self.resolution.is_finite()) {
            return Err(PipelineError::Config(format!("resolution must be positive, got {}", self.resolution)));
        }
        if self.max_retries < 1 {
            return Err(PipelineError::Config("max_retries must be at least 1".into()));
        }
        if self.stages.scan && !self.stages.drape {
            return Err(PipelineError::Config("the scan stage needs the drape stage".into()));
        }
        self.sim.check().map_err(|e| PipelineError::Config(e.to_string()))?;
        self.scan.check().map_err(|e| PipelineError::Config(e.to_string()))?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleStatus {
    Ok,
    SimFailed,
    SampleFailed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSummary {
    pub faces_in: usize,
    pub faces_kept: usize,
    pub vertices_kept: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleEntry {
    pub index: u32,
    pub seed: u64,
    pub status: SampleStatus,
    pub directory: String,
    pub files: Vec<String>,
    pub values: Values,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub retries: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sim: Option<SimReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanSummary>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Config fields that determine the dataset contents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub template: String,
    pub body: Option<String>,
    pub sample_count: u32,
    pub base_seed: u64,
    pub resolution: f64,
    pub sim: SimConfig,
    pub scan: ScanConfig,
    pub stages: Stages,
    pub max_retries: u32,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub fixed_values: BTreeMap<u32, Values>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub tool_version: String,
    pub template_sha256: String,
    pub body_sha256: String,
    pub config: ConfigEcho,
    pub requested: u32,
    /// Samples whose status is ok.
    pub passed: u32,
    pub status_counts: IndexMap<String, u32>,
    pub samples: Vec<SampleEntry>,
}

/// Wall-clock seconds per stage; kept out of the manifest so reruns compare
/// byte for byte.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    pub index: u32,
    pub sample: f64,
    pub drape: f64,
    pub scan: f64,
    pub write: f64,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Apply explicit values and reject self-intersecting results.
pub fn pattern_for_values(t: &TemplateSpec, values: &Values, seed: u64) -> Result<(PatternSpec, SampleRecord), String> {
    let applied = apply_all(t, values).map_err(|e| e.to_string())?;
    if let Some(p) = applied.pattern.panels.iter().find(|p| panel_self_intersects(p)) {
        return Err(format!("panel '{}' self-intersects", p.name));
    }
    let record = SampleRecord {
        seed,
        values: t.ordered_parameters().filter_map(|r| values.get(&r.name).map(|&v| (r.name.clone(), v))).collect(),
        constraint_multipliers: applied.constraints.into_iter().map(|c| c.multipliers).collect(),
        retries: 0,
        constraint_rejections: 0,
    };
    Ok((applied.pattern, record))
}

/// Identity values for every parameter.
pub fn identity_values(t: &TemplateSpec) -> Values {
    t.ordered_parameters().map(|r| (r.name.clone(), r.kind.identity())).collect()
}

pub struct Draped {
    pub mesh: GarmentMesh,
    pub stitches: StitchPairs,
    pub report: SimReport,
    pub warnings: Vec<String>,
}

pub fn drape_pattern(p: &PatternSpec, body: &BodyModel, resolution: f64, sim: &SimConfig) -> Result<Draped, DrapeError> {
    let a = assemble_garment(p, resolution)?;
    let (mesh, report) = simulate(&a.mesh, &a.stitches, body, sim)?;
    Ok(Draped { mesh, stitches: a.stitches, report, warnings: a.warnings })
}

fn panic_message(e: Box<dyn std::any::Any + Send>) -> String {
    if let Some(s) = e.downcast_ref::<&str>() {
        s.to_string()
    } else if let Some(s) = e.downcast_ref::<String>() {
        s.clone()
    } else {
        "panic".to_string()
    }
}

fn guarded<T>(f: impl FnOnce() -> Result<T, String>) -> Result<T, String> {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| Err(format!("internal error: {}", panic_message(e))))
}

struct Job<'a> {
    cfg: &'a PipelineConfig,
    template: &'a TemplateSpec,
    body: &'a BodyModel,
    out: &'a Path,
}

impl Job<'_> {
    fn write(&self, dir: &Path, name: &str, text: &str, files: &mut Vec<String>) -> Result<(), String> {
        let path = dir.join(name);
        fs::write(&path, text).map_err(|e| format!("{}: {e}", path.display()))?;
        files.push(name.to_string());
        Ok(())
    }

    fn run(&self, index: u32) -> (SampleEntry, StageTimings) {
        let cfg = self.cfg;
        let seed = sample_seed(cfg.base_seed, index as u64);
        let directory = format!("sample_{index:05}");
        let dir = self.out.join(&directory);
        let mut timings = StageTimings { index, ..Default::default() };
        let mut entry = SampleEntry {
            index,
            seed,
            status: SampleStatus::SampleFailed,
            directory,
            files: Vec::new(),
            values: Values::new(),
            retries: None,
            sim: None,
            scan: None,
            warnings: Vec::new(),
            error: None,
        };
        if let Err(e) = fs::create_dir_all(&dir) {
            entry.error = Some(format!("{}: {e}", dir.display()));
            return (entry, timings);
        }

        let clock = Instant::now();
        let sampled = guarded(|| {
            if let Some(values) = cfg.fixed_values.get(&index) {
                pattern_for_values(self.template, values, seed)
            } else if cfg.stages.sample {
                sample_pattern(self.template, seed, cfg.max_retries).map_err(|e| e.to_string())
            } else {
                pattern_for_values(self.template, &identity_values(self.template), seed)
            }
        });
        timings.sample = clock.elapsed().as_secs_f64();
        let (pattern, record) = match sampled {
            Ok(s) => s,
            Err(e) => {
                entry.error = Some(e);
                return (entry, timings);
            }
        };
        entry.values = record.values.clone();
        entry.retries = Some(record.retries);
        let doc = serialize_template(&sampled_template(self.template, pattern.clone(), record));
        if let Err(e) = self.write(&dir, SPEC_FILE, &doc, &mut entry.files) {
            entry.error = Some(e);
            return (entry, timings);
        }
        entry.status = SampleStatus::Ok;
        if !cfg.stages.drape {
            return (entry, timings);
        }

        let clock = Instant::now();
        let draped = guarded(|| drape_pattern(&pattern, self.body, cfg.resolution, &cfg.sim).map_err(|e| e.to_string()));
        timings.drape = clock.elapsed().as_secs_f64();
        let draped = match draped {
            Ok(d) => d,
            Err(e) => {
                entry.status = SampleStatus::SimFailed;
                entry.error = Some(e);
                return (entry, timings);
            }
        };
        entry.warnings = draped.warnings;
        entry.sim = Some(draped.report);
        if draped.report.failed {
            entry.status = SampleStatus::SimFailed;
        }
        let clock = Instant::now();
        let written = self
            .write(&dir, GARMENT_FILE, &draped.mesh.to_obj(), &mut entry.files)
            .and_then(|_| self.write(&dir, LABELS_FILE, &draped.mesh.labels_text(), &mut entry.files));
        timings.write += clock.elapsed().as_secs_f64();
        if let Err(e) = written {
            entry.status = SampleStatus::SimFailed;
            entry.error = Some(e);
            return (entry, timings);
        }
        if !cfg.stages.scan || draped.report.non_finite {
            return (entry, timings);
        }

        let clock = Instant::now();
        let scan_cfg = ScanConfig { seed: sample_seed(cfg.scan.seed, index as u64), ..cfg.scan.clone() };
        let scanned = guarded(|| scan_detailed(&draped.mesh, Some(self.body), &scan_cfg).map_err(|e| e.to_string()));
        timings.scan = clock.elapsed().as_secs_f64();
        match scanned {
            Ok(r) => {
                entry.scan = Some(ScanSummary {
                    faces_in: r.kept_faces.len(),
                    faces_kept: r.mesh.face_count(),
                    vertices_kept: r.mesh.vertex_count(),
                });
                let clock = Instant::now();
                let written = self
                    .write(&dir, SCAN_FILE, &r.mesh.to_obj(), &mut entry.files)
                    .and_then(|_| self.write(&dir, SCAN_LABELS_FILE, &r.mesh.labels_text(), &mut entry.files));
                timings.write += clock.elapsed().as_secs_f64();
                if let Err(e) = written {
                    entry.error = Some(e);
                }
            }
            Err(e) => entry.error = Some(e),
        }
        (entry, timings)
    }
}

fn load_body(cfg: &PipelineConfig) -> Result<(BodyModel, Vec<u8>), PipelineError> {
    match &cfg.body {
        Some(path) => {
            let bytes = fs::read(path).map_err(io_err(path))?;
            let text = String::from_utf8_lossy(&bytes);
            Ok((BodyModel::from_obj_str(&text)?, bytes))
        }
        None => Ok((BodyModel::from_obj_str(MANNEQUIN_OBJ)?, MANNEQUIN_OBJ.as_bytes().to_vec())),
    }
}

pub fn load_template(path: &Path) -> Result<(TemplateSpec, Vec<u8>), PipelineError> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    let text = String::from_utf8_lossy(&bytes);
    let t = parse_template(&text).map_err(|source| PipelineError::Template { path: path.display().to_string(), source })?;
    Ok((t, bytes))
}

/// Run the configured stages for every sample index and write the dataset.
///
/// Per-sample failures are recorded in the manifest and never stop the
/// batch. Output does not depend on the worker count.
pub fn generate_dataset(cfg: &PipelineConfig) -> Result<DatasetManifest, PipelineError> {
    cfg.check()?;
    let (template, template_bytes) = load_template(&cfg.template)?;
    let (body, body_bytes) = load_body(cfg)?;
    fs::create_dir_all(&cfg.output_dir).map_err(io_err(&cfg.output_dir))?;

    let workers = cfg.effective_workers();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| PipelineError::Config(format!("worker pool: {e}")))?;
    let job = Job { cfg, template: &template, body: &body, out: &cfg.output_dir };
    log::info!("generating {} samples with {workers} workers", cfg.sample_count);
    let results: Vec<(SampleEntry, StageTimings)> =
        pool.install(|| (0..cfg.sample_count).into_par_iter().map(|i| job.run(i)).collect());
    let (samples, timings): (Vec<SampleEntry>, Vec<StageTimings>) = results.into_iter().unzip();

    let mut status_counts: IndexMap<String, u32> =
        ["ok", "sim_failed", "sample_failed"].iter().map(|s| (s.to_string(), 0)).collect();
    for s in &samples {
        let key = serde_json::to_value(s.status).expect("status").as_str().expect("status name").to_string();
        *status_counts.entry(key).or_default() += 1;
    }
    let manifest = DatasetManifest {
        tool_version: crate::TOOL_VERSION.to_string(),
        template_sha256: sha256_hex(&template_bytes),
        body_sha256: sha256_hex(&body_bytes),
        config: ConfigEcho {
            template: cfg.template.display().to_string(),
            body: cfg.body.as_ref().map(|b| b.display().to_string()),
            sample_count: cfg.sample_count,
            base_seed: cfg.base_seed,
            resolution: cfg.resolution,
            sim: cfg.sim.clone(),
            scan: cfg.scan.clone(),
            stages: cfg.stages,
            max_retries: cfg.max_retries,
            fixed_values: cfg.fixed_values.clone(),
        },
        requested: cfg.sample_count,
        passed: status_counts["ok"],
        status_counts,
        samples,
    };
    let path = cfg.output_dir.join(MANIFEST_FILE);
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serialization");
    text.push('\n');
    fs::write(&path, text).map_err(io_err(&path))?;
    let path = cfg.output_dir.join(TIMINGS_FILE);
    let text = serde_json::to_string_pretty(&timings).expect("timings serialization");
    fs::write(&path, text).map_err(io_err(&path))?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_defaults_and_unknown_fields() {
        let cfg: PipelineConfig =
            serde_json::from_str(r#"{"template": "t.json", "sample_count": 3, "output_dir": "out"}"#).unwrap();
        assert_eq!(cfg, PipelineConfig::new("t.json", 3, "out"));
        assert!(serde_json::from_str::<PipelineConfig>(r#"{"template": "t", "sample_count": 1, "output_dir": "o", "x": 1}"#).is_err());
    }

    #[test]
    fn config_checks() {
        let mut cfg = PipelineConfig::new("t.json", 0, "out");
        assert!(cfg.check().is_err());
        cfg.sample_count = 1;
        assert!(cfg.check().is_ok());
        cfg.stages.drape = false;
        assert!(cfg.check().is_err());
        cfg.stages.scan = false;
        assert!(cfg.check().is_ok());
        cfg.resolution = 0.0;
        assert!(cfg.check().is_err());
    }

    #[test]
    fn relative_paths_follow_the_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        fs::write(&path, r#"{"template": "t.json", "body": "/abs/b.obj", "sample_count": 1, "output_dir": "out"}"#).unwrap();
        let cfg = PipelineConfig::load(&path).unwrap();
        assert_eq!(cfg.template, dir.path().join("t.json"));
        assert_eq!(cfg.body, Some(PathBuf::from("/abs/b.obj")));
        assert_eq!(cfg.output_dir, dir.path().join("out"));
    }

    #[test]
    fn status_names() {
        assert_eq!(serde_json::to_string(&SampleStatus::SimFailed).unwrap(), "\"sim_failed\"");
    }
}
