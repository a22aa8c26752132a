use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use patternforge_core::drape::DrapeError;
use patternforge_core::mesh::MeshError;
use patternforge_core::params::{sample_seed, sampled_template, DEFAULT_MAX_RETRIES};
use patternforge_core::pipeline::{
    drape_pattern, load_template, PipelineError, GARMENT_FILE, LABELS_FILE, SCAN_FILE, SCAN_LABELS_FILE,
    SPEC_FILE,
};
use patternforge_core::scan::ScanError;
use patternforge_core::template::parse_template_unchecked;
use patternforge_core::validate::has_errors;
use patternforge_core::{
    generate_dataset, sample_pattern, scan_detailed, serialize_template, validate_template, BodyModel, GarmentMesh,
    ParseError, PipelineConfig, ScanConfig, SimConfig,
};
use thiserror::Error;

/// Written next to the draped mesh by `drape`.
pub const REPORT_FILE: &str = "sim_report.json";

#[derive(Debug, Parser)]
#[command(name = "patternforge", version, about = "Synthetic garment datasets from parametric sewing patterns")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a template document and print diagnostics.
    Validate {
        template: PathBuf,
    },
    /// Draw designs from a template and write one spec.json per sample.
    Sample {
        template: PathBuf,
        /// Number of samples.
        #[arg(short = 'n', long = "count", default_value_t = 1)]
        count: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MAX_RETRIES)]
        max_retries: u32,
    },
    /// Assemble a pattern spec and drape it on a body.
    Drape {
        spec: PathBuf,
        /// OBJ body mesh. Defaults to the built-in mannequin.
        #[arg(long)]
        body: Option<PathBuf>,
        #[arg(short, long)]
        out: PathBuf,
        /// Target mesh edge length in cm.
        #[arg(long, default_value_t = 3.0)]
        resolution: f64,
        /// JSON file with simulation settings.
        #[arg(long)]
        sim: Option<PathBuf>,
    },
    /// Remove garment faces a scanner could not see.
    Scan {
        obj: PathBuf,
        labels: PathBuf,
        /// OBJ body mesh. Defaults to the built-in mannequin.
        #[arg(long)]
        body: Option<PathBuf>,
        #[arg(short, long)]
        out: PathBuf,
        #[arg(long, default_value_t = ScanConfig::default().visible_fraction_threshold)]
        threshold: f64,
        #[arg(long, default_value_t = ScanConfig::default().rays_per_face)]
        rays: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Scan the garment alone.
        #[arg(long)]
        no_body: bool,
    },
    /// Run a batch from a JSON config.
    Generate {
        #[arg(long)]
        config: PathBuf,
        /// Worker threads (the environment variable takes precedence).
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Serve the HTTP API used by the viewer.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long)]
        template: PathBuf,
        /// OBJ body mesh. Defaults to the built-in mannequin.
        #[arg(long)]
        body: Option<PathBuf>,
        /// Where /save writes sample directories.
        #[arg(long, default_value = "saved")]
        out: PathBuf,
        #[arg(long, default_value_t = 3.0)]
        resolution: f64,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
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
    #[error("{path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Drape(#[from] DrapeError),
    #[error(transparent)]
    Scan(#[from] ScanError),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.display().to_string(), source }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(io_err(path))
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
    fs::write(path, contents).map_err(io_err(path))
}

fn create_dir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path).map_err(io_err(path))
}

pub fn load_body(path: Option<&Path>) -> Result<BodyModel, CliError> {
    Ok(match path {
        Some(p) => BodyModel::load(p)?,
        None => patternforge_core::templates::mannequin(),
    })
}

pub fn execute(cmd: Command) -> Result<i32, CliError> {
    match cmd {
        Command::Validate { template } => validate_cmd(&template),
        Command::Sample { template, count, seed, out, max_retries } => sample_cmd(&template, count, seed, &out, max_retries),
        Command::Drape { spec, body, out, resolution, sim } => {
            drape_cmd(&spec, body.as_deref(), &out, resolution, sim.as_deref())
        }
        Command::Scan { obj, labels, body, out, threshold, rays, seed, no_body } => {
            let cfg = ScanConfig { rays_per_face: rays, visible_fraction_threshold: threshold, seed };
            scan_cmd(&obj, &labels, if no_body { None } else { Some(body.as_deref()) }, &out, &cfg)
        }
        Command::Generate { config, workers } => generate_cmd(&config, workers),
        Command::Serve { port, host, template, body, out, resolution } => {
            let (t, _) = load_template(&template)?;
            let body = load_body(body.as_deref())?;
            let state = crate::serve::AppState::new(t, body, resolution, out);
            crate::serve::serve_blocking(&host, port, state)
        }
    }
}

fn validate_cmd(path: &Path) -> Result<i32, CliError> {
    let text = read(path)?;
    let file = path.display().to_string();
    let t = match parse_template_unchecked(&text) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("{file}: {e}");
            return Ok(1);
        }
    };
    let diags = validate_template(&t);
    let mut out = std::io::stdout().lock();
    for d in &diags {
        let _ = writeln!(out, "{}", d.render(&file));
    }
    Ok(if has_errors(&diags) { 1 } else { 0 })
}

fn parse_file(path: &Path) -> Result<patternforge_core::TemplateSpec, CliError> {
    let text = read(path)?;
    patternforge_core::parse_template(&text)
        .map_err(|source| CliError::Template { path: path.display().to_string(), source })
}

fn sample_cmd(path: &Path, count: u32, seed: u64, out: &Path, max_retries: u32) -> Result<i32, CliError> {
    let t = parse_file(path)?;
    create_dir(out)?;
    let mut failed = 0;
    for i in 0..count {
        let s = sample_seed(seed, i as u64);
        match sample_pattern(&t, s, max_retries) {
            Ok((pattern, record)) => {
                let dir = out.join(format!("sample_{i:05}"));
                create_dir(&dir)?;
                write(&dir.join(SPEC_FILE), serialize_template(&sampled_template(&t, pattern, record)))?;
            }
            Err(e) => {
                eprintln!("sample {i}: {e}");
                failed += 1;
            }
        }
    }
    println!("wrote {} of {count} samples to {}", count - failed, out.display());
    Ok(if failed > 0 { 1 } else { 0 })
}

fn drape_cmd(spec: &Path, body: Option<&Path>, out: &Path, resolution: f64, sim: Option<&Path>) -> Result<i32, CliError> {
    let t = parse_file(spec)?;
    let body = load_body(body)?;
    let sim: SimConfig = match sim {
        Some(p) => serde_json::from_str(&read(p)?)
            .map_err(|source| CliError::Json { path: p.display().to_string(), source })?,
        None => SimConfig::default(),
    };
    sim.check()?;
    let d = drape_pattern(&t.pattern, &body, resolution, &sim)?;
    create_dir(out)?;
    d.mesh.save(&out.join(GARMENT_FILE), &out.join(LABELS_FILE))?;
    let report = serde_json::json!({ "report": d.report, "warnings": d.warnings });
    write(&out.join(REPORT_FILE), serde_json::to_string_pretty(&report).expect("report json"))?;
    for w in &d.warnings {
        eprintln!("warning: {w}");
    }
    let r = &d.report;
    println!(
        "{} vertices, {} faces, {} frames, converged {}, penetrations {}, self-intersections {}{}",
        d.mesh.vertex_count(),
        d.mesh.face_count(),
        r.frames_run,
        r.converged,
        r.body_penetration_count,
        r.self_intersection_count,
        if r.failed { ", FAILED quality check" } else { "" }
    );
    Ok(0)
}

fn scan_cmd(
    obj: &Path,
    labels: &Path,
    body: Option<Option<&Path>>,
    out: &Path,
    cfg: &ScanConfig,
) -> Result<i32, CliError> {
    cfg.check()?;
    let g = GarmentMesh::load(obj, labels)?;
    let body = body.map(load_body).transpose()?;
    let r = scan_detailed(&g, body.as_ref(), cfg)?;
    create_dir(out)?;
    r.mesh.save(&out.join(SCAN_FILE), &out.join(SCAN_LABELS_FILE))?;
    println!(
        "kept {} of {} faces, {} of {} vertices",
        r.mesh.face_count(),
        g.face_count(),
        r.mesh.vertex_count(),
        g.vertex_count()
    );
    Ok(0)
}

fn generate_cmd(config: &Path, workers: Option<usize>) -> Result<i32, CliError> {
    let mut cfg = PipelineConfig::load(config)?;
    if let Some(w) = workers {
        cfg.worker_count = w;
    }
    log::info!("{} workers", cfg.effective_workers());
    let m = generate_dataset(&cfg)?;
    println!("{} of {} samples passed; dataset in {}", m.passed, m.samples.len(), cfg.output_dir.display());
    Ok(0)
}
