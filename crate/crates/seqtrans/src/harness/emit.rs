//! Report serialization: plot-ready CSVs plus a structured summary.
//!
//! Files are written atomically (temp file in the target directory, then
//! rename) and contain nothing execution-dependent — no timestamps, no
//! absolute paths — so identical experiments produce byte-identical
//! directories. Floats are formatted with Rust's shortest round-trip
//! representation, which reads back exactly.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::{ExperimentConfig, ExperimentResult};
use crate::ordersel::ScoreMatrix;
use crate::rng;

pub const REPORTS_FILE: &str = "reports.csv";
pub const ACC_MATRIX_FILE: &str = "acc_matrix.csv";
pub const CORRELATIONS_FILE: &str = "correlations.csv";
pub const SUMMARY_FILE: &str = "summary.json";

/// One emitted file, as recorded in the summary inventory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileRecord {
    pub name: String,
    pub bytes: u64,
}

/// What landed on disk.
#[derive(Debug, Clone, PartialEq)]
pub struct EmitOutcome {
    pub dir: PathBuf,
    pub files: Vec<FileRecord>,
}

#[derive(Debug, Serialize)]
struct Summary<'a> {
    version: &'static str,
    /// Hash of the config with `output_dir` removed, so relocating an
    /// experiment does not change its identity.
    config_fingerprint: String,
    run_count: usize,
    failure_count: usize,
    failures: &'a [crate::harness::RunFailure],
    files: &'a [FileRecord],
}

/// Writes `bytes` to `path` through a temp file in the same directory.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let file_name = path
        .file_name()
        .and_then(|n| n.to_str())
        .ok_or_else(|| Error::InvalidInput(format!("unusable path {}", path.display())))?;
    let tmp = path.with_file_name(format!(".{file_name}.tmp"));
    std::fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn csv_bytes(header: &[&str], rows: &[Vec<String>]) -> Result<Vec<u8>> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(header)
        .and_then(|()| rows.iter().try_for_each(|row| writer.write_record(row)))
        .map_err(|e| Error::InvalidInput(format!("csv serialization failed: {e}")))?;
    writer
        .into_inner()
        .map_err(|e| Error::InvalidInput(format!("csv serialization failed: {e}")))
}

fn join_order(order: &[usize]) -> String {
    order
        .iter()
        .map(|id| id.to_string())
        .collect::<Vec<_>>()
        .join("-")
}

fn opt(value: Option<f64>) -> String {
    value.map(|v| v.to_string()).unwrap_or_default()
}

/// Fingerprint of everything that determines an experiment's results.
pub fn config_fingerprint(config: &ExperimentConfig) -> Result<String> {
    let mut value = serde_json::to_value(config)
        .map_err(|e| Error::InvalidInput(format!("config not serializable: {e}")))?;
    if let Some(map) = value.as_object_mut() {
        map.remove("output_dir");
    }
    Ok(format!("{:016x}", rng::fingerprint(value.to_string().as_bytes())))
}

/// Writes the sweep's report files into `dir` and returns the inventory.
///
/// `reports.csv` carries one row per run; `acc_matrix.csv` one row per
/// lower-triangular accuracy entry; `correlations.csv` one row per
/// (strategy, buffer) cell with empty cells where inputs were degenerate.
/// `summary.json` closes the set with the config fingerprint and the file
/// inventory, and is written last.
pub fn emit(
    config: &ExperimentConfig,
    result: &ExperimentResult,
    dir: &Path,
) -> Result<EmitOutcome> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    let report_rows: Vec<Vec<String>> = result
        .runs
        .iter()
        .map(|run| {
            vec![
                run.run_id.clone(),
                join_order(&run.report.order),
                run.strategy.name().to_string(),
                run.buffer_capacity.to_string(),
                run.report.metric.name().to_string(),
                run.report.aa.to_string(),
                run.report.tft.to_string(),
                run.report.trt.to_string(),
            ]
        })
        .collect();
    let reports = csv_bytes(
        &[
            "run_id", "order", "strategy", "buffer", "metric", "aa", "tft", "trt",
        ],
        &report_rows,
    )?;

    let mut acc_rows = Vec::new();
    for run in &result.runs {
        for (t, row) in run.report.acc_matrix.iter().enumerate() {
            for (j, acc) in row.iter().enumerate() {
                acc_rows.push(vec![
                    run.run_id.clone(),
                    t.to_string(),
                    j.to_string(),
                    acc.to_string(),
                ]);
            }
        }
    }
    let acc_matrix = csv_bytes(&["run_id", "t", "j", "acc"], &acc_rows)?;

    let corr_rows: Vec<Vec<String>> = result
        .correlations
        .rows
        .iter()
        .map(|row| {
            vec![
                row.strategy.name().to_string(),
                row.buffer_capacity.to_string(),
                opt(row.r_aa_tft),
                opt(row.p_aa_tft),
                opt(row.r_aa_trt),
                opt(row.p_aa_trt),
                row.run_count.to_string(),
                row.degenerate.to_string(),
            ]
        })
        .collect();
    let correlations = csv_bytes(
        &[
            "strategy",
            "buffer",
            "r_aa_tft",
            "p_aa_tft",
            "r_aa_trt",
            "p_aa_trt",
            "run_count",
            "degenerate",
        ],
        &corr_rows,
    )?;

    let mut files = vec![
        FileRecord {
            name: REPORTS_FILE.into(),
            bytes: reports.len() as u64,
        },
        FileRecord {
            name: ACC_MATRIX_FILE.into(),
            bytes: acc_matrix.len() as u64,
        },
        FileRecord {
            name: CORRELATIONS_FILE.into(),
            bytes: correlations.len() as u64,
        },
    ];

    let summary = Summary {
        version: env!("CARGO_PKG_VERSION"),
        config_fingerprint: config_fingerprint(config)?,
        run_count: result.runs.len(),
        failure_count: result.failures.len(),
        failures: &result.failures,
        files: &files,
    };
    let mut summary_bytes = serde_json::to_vec_pretty(&summary)
        .map_err(|e| Error::InvalidInput(format!("summary not serializable: {e}")))?;
    summary_bytes.push(b'\n');

    write_atomic(&dir.join(REPORTS_FILE), &reports)?;
    write_atomic(&dir.join(ACC_MATRIX_FILE), &acc_matrix)?;
    write_atomic(&dir.join(CORRELATIONS_FILE), &correlations)?;
    write_atomic(&dir.join(SUMMARY_FILE), &summary_bytes)?;
    files.push(FileRecord {
        name: SUMMARY_FILE.into(),
        bytes: summary_bytes.len() as u64,
    });

    Ok(EmitOutcome {
        dir: dir.to_path_buf(),
        files,
    })
}

/// Writes a pairwise score matrix as `t,i,score` rows over the off-diagonal
/// entries, with `t` and `i` as task ids in row-major order.
pub fn write_score_matrix_csv(matrix: &ScoreMatrix, path: &Path) -> Result<()> {
    let ids = matrix.task_ids();
    let mut rows = Vec::new();
    for t in 0..matrix.len() {
        for i in 0..matrix.len() {
            if t == i {
                continue;
            }
            rows.push(vec![
                ids[t].to_string(),
                ids[i].to_string(),
                matrix.score(t, i).to_string(),
            ]);
        }
    }
    write_atomic(path, &csv_bytes(&["t", "i", "score"], &rows)?)
}

/// Serializes any report value as pretty JSON with a trailing newline.
pub fn write_json_atomic<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)
        .map_err(|e| Error::InvalidInput(format!("report not serializable: {e}")))?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}
