//! CSV and JSON writers for regret curves and sweep tables.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use cabsim_core::RegretCurve;
use serde::{Deserialize, Serialize};

use crate::config::ConfigFile;
use crate::error::{CliError, Result};
use crate::runner::{Axis, SweepPoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Serialize)]
struct Row {
    checkpoint: u64,
    mean_pseudo_regret: f64,
    stderr_pseudo: f64,
    mean_realized_regret: f64,
    stderr_realized: f64,
    mean_queries: f64,
    replications: u64,
}

// csv cannot serialize `#[serde(flatten)]`, hence the repeated fields.
#[derive(Serialize)]
struct SweepRow<'a> {
    sweep_value: &'a str,
    checkpoint: u64,
    mean_pseudo_regret: f64,
    stderr_pseudo: f64,
    mean_realized_regret: f64,
    stderr_realized: f64,
    mean_queries: f64,
    replications: u64,
}

fn rows(curve: &RegretCurve) -> impl Iterator<Item = Row> + '_ {
    (0..curve.len()).map(|i| Row {
        checkpoint: curve.checkpoints[i],
        mean_pseudo_regret: curve.mean_pseudo_regret[i],
        stderr_pseudo: curve.stderr_pseudo[i],
        mean_realized_regret: curve.mean_realized_regret[i],
        stderr_realized: curve.stderr_realized[i],
        mean_queries: curve.mean_queries[i],
        replications: curve.replications,
    })
}

const HEADER: [&str; 7] = [
    "checkpoint",
    "mean_pseudo_regret",
    "stderr_pseudo",
    "mean_realized_regret",
    "stderr_realized",
    "mean_queries",
    "replications",
];

pub fn write_curve_csv<W: Write>(curve: &RegretCurve, out: W) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    // Written by hand so an empty curve still gets its header.
    w.write_record(HEADER)?;
    for row in rows(curve) {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_sweep_csv<W: Write>(points: &[SweepPoint], out: W) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(std::iter::once("sweep_value").chain(HEADER))?;
    for p in points {
        for row in rows(&p.curve) {
            w.serialize(SweepRow {
                sweep_value: &p.value,
                checkpoint: row.checkpoint,
                mean_pseudo_regret: row.mean_pseudo_regret,
                stderr_pseudo: row.stderr_pseudo,
                mean_realized_regret: row.mean_realized_regret,
                stderr_realized: row.stderr_realized,
                mean_queries: row.mean_queries,
                replications: row.replications,
            })?;
        }
    }
    w.flush()?;
    Ok(())
}

/// JSON form of a curve, with the config that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveDocument {
    pub config: ConfigFile,
    pub seed: u64,
    pub config_digest: u64,
    pub replications: u64,
    pub checkpoint: Vec<u64>,
    pub mean_pseudo_regret: Vec<f64>,
    pub stderr_pseudo: Vec<f64>,
    pub mean_realized_regret: Vec<f64>,
    pub stderr_realized: Vec<f64>,
    pub mean_queries: Vec<f64>,
}

impl CurveDocument {
    pub fn new(config: &ConfigFile, curve: &RegretCurve) -> Self {
        let mut config = config.clone();
        config.grid = Some(curve.checkpoints.clone());
        Self {
            seed: config.seed,
            config,
            config_digest: curve.config_digest,
            replications: curve.replications,
            checkpoint: curve.checkpoints.clone(),
            mean_pseudo_regret: curve.mean_pseudo_regret.clone(),
            stderr_pseudo: curve.stderr_pseudo.clone(),
            mean_realized_regret: curve.mean_realized_regret.clone(),
            stderr_realized: curve.stderr_realized.clone(),
            mean_queries: curve.mean_queries.clone(),
        }
    }

    pub fn to_curve(&self) -> RegretCurve {
        RegretCurve {
            checkpoints: self.checkpoint.clone(),
            mean_pseudo_regret: self.mean_pseudo_regret.clone(),
            stderr_pseudo: self.stderr_pseudo.clone(),
            mean_realized_regret: self.mean_realized_regret.clone(),
            stderr_realized: self.stderr_realized.clone(),
            mean_queries: self.mean_queries.clone(),
            replications: self.replications,
            config_digest: self.config_digest,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub value: String,
    #[serde(flatten)]
    pub curve: CurveDocument,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepDocument {
    pub axis: String,
    pub points: Vec<SweepEntry>,
}

impl SweepDocument {
    pub fn new(axis: Axis, points: &[SweepPoint]) -> Self {
        Self {
            axis: axis.name().to_string(),
            points: points
                .iter()
                .map(|p| SweepEntry {
                    value: p.value.clone(),
                    curve: CurveDocument::new(&p.config, &p.curve),
                })
                .collect(),
        }
    }
}

/// Where output goes: a file, or stdout when no path is given.
pub struct Sink {
    path: Option<PathBuf>,
}

impl Sink {
    pub fn new(path: Option<&Path>) -> Self {
        Self {
            path: path.map(Path::to_path_buf),
        }
    }

    fn label(&self) -> PathBuf {
        self.path.clone().unwrap_or_else(|| PathBuf::from("<stdout>"))
    }

    fn io(&self, e: std::io::Error) -> CliError {
        CliError::io(self.label(), e)
    }

    fn with<F>(&self, f: F) -> Result<()>
    where
        F: FnOnce(&mut dyn Write) -> std::io::Result<()>,
    {
        match &self.path {
            Some(p) => {
                let file = File::create(p).map_err(|e| self.io(e))?;
                let mut w = BufWriter::new(file);
                f(&mut w).and_then(|_| w.flush()).map_err(|e| self.io(e))
            }
            None => {
                let stdout = std::io::stdout();
                let mut lock = stdout.lock();
                f(&mut lock).and_then(|_| lock.flush()).map_err(|e| self.io(e))
            }
        }
    }

    pub fn write_curve(&self, config: &ConfigFile, curve: &RegretCurve, format: Format) -> Result<()> {
        self.with(|w| match format {
            Format::Csv => write_curve_csv(curve, w).map_err(Into::into),
            Format::Json => write_json(w, &CurveDocument::new(config, curve)),
        })
    }

    pub fn write_sweep(&self, axis: Axis, points: &[SweepPoint], format: Format) -> Result<()> {
        self.with(|w| match format {
            Format::Csv => write_sweep_csv(points, w).map_err(Into::into),
            Format::Json => write_json(w, &SweepDocument::new(axis, points)),
        })
    }

    pub fn write_value<T: Serialize>(&self, value: &T) -> Result<()> {
        self.with(|w| write_json(w, value))
    }
}

fn write_json<T: Serialize>(w: &mut dyn Write, value: &T) -> std::io::Result<()> {
    serde_json::to_writer_pretty(&mut *w, value)?;
    w.write_all(b"\n")
}

pub fn read_curve_json(path: &Path) -> Result<CurveDocument> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}
