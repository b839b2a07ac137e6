//! CSV task files and the suite manifest.
//!
//! One CSV per task, header `label,split,f0,...,f{d-1}`. The `split` column
//! is either declared on every row (`train`/`eval`) or empty on every row, in
//! which case the loader applies a seeded stratified split. A suite is a
//! directory of task CSVs plus `manifest.json` recording batch membership.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::{split_train_eval, LabeledSet, SuiteConfig, Task, TaskBatch};
use crate::error::{Error, Result};
use crate::rng::{self, stream};

pub const MANIFEST_NAME: &str = "manifest.json";

/// Fallback split applied to files whose `split` column is empty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitFallback {
    pub eval_fraction: f64,
    pub seed: u64,
}

impl Default for SplitFallback {
    fn default() -> Self {
        Self {
            eval_fraction: 0.2,
            seed: 0,
        }
    }
}

/// What ingestion did to one file: the dense-label mapping (position = local
/// id, value = label as written in the file) and whether the file declared
/// its own split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskIngest {
    pub task_id: usize,
    pub path: String,
    pub label_map: Vec<i64>,
    pub declared_split: bool,
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    suite: Option<SuiteConfig>,
    batches: Vec<ManifestBatch>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ManifestBatch {
    batch_id: usize,
    tasks: Vec<ManifestTask>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ManifestTask {
    task_id: usize,
    path: String,
}

/// Loads one task per file; task ids follow file order.
pub fn load_csv_tasks(paths: &[PathBuf], fallback: SplitFallback) -> Result<TaskBatch> {
    Ok(load_csv_tasks_logged(paths, fallback)?.0)
}

/// As [`load_csv_tasks`], also returning the per-file ingestion record.
pub fn load_csv_tasks_logged(
    paths: &[PathBuf],
    fallback: SplitFallback,
) -> Result<(TaskBatch, Vec<TaskIngest>)> {
    let mut tasks = Vec::with_capacity(paths.len());
    let mut log = Vec::with_capacity(paths.len());
    for (task_id, path) in paths.iter().enumerate() {
        let (task, ingest) = read_task_csv(path, task_id, fallback)?;
        tasks.push(task);
        log.push(ingest);
    }
    Ok((TaskBatch::new(0, tasks)?, log))
}

/// Reads a suite directory written by [`write_suite`]: resolves every path in
/// the manifest relative to the manifest file and rebuilds the batches.
pub fn load_manifest(
    manifest_path: &Path,
    fallback: SplitFallback,
) -> Result<(Vec<TaskBatch>, Vec<TaskIngest>)> {
    let file = File::open(manifest_path).map_err(|e| Error::io(manifest_path, e))?;
    let manifest: Manifest = serde_json::from_reader(BufReader::new(file)).map_err(|e| {
        Error::Parse {
            path: manifest_path.to_path_buf(),
            line: e.line() as u64,
            message: e.to_string(),
        }
    })?;
    let base = manifest_path.parent().unwrap_or_else(|| Path::new("."));

    let mut batches = Vec::with_capacity(manifest.batches.len());
    let mut log = Vec::new();
    for entry in manifest.batches {
        let mut tasks = Vec::with_capacity(entry.tasks.len());
        for spec in entry.tasks {
            let path = base.join(&spec.path);
            let (task, ingest) = read_task_csv(&path, spec.task_id, fallback)?;
            tasks.push(task);
            log.push(ingest);
        }
        batches.push(TaskBatch::new(entry.batch_id, tasks)?);
    }
    if batches.iter().all(|b| b.is_empty()) {
        return Err(Error::Parse {
            path: manifest_path.to_path_buf(),
            line: 0,
            message: "manifest lists no tasks".into(),
        });
    }
    Ok((batches, log))
}

/// Writes every task of every batch as CSV plus a `manifest.json` with
/// relative paths, so the directory can be moved or compared byte-for-byte.
pub fn write_suite(batches: &[TaskBatch], suite: Option<&SuiteConfig>, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut manifest = Manifest {
        suite: suite.cloned(),
        batches: Vec::new(),
    };
    for batch in batches {
        let mut entry = ManifestBatch {
            batch_id: batch.batch_id,
            tasks: Vec::new(),
        };
        for task in &batch.tasks {
            let name = format!("b{}_t{:04}.csv", batch.batch_id, task.task_id);
            write_task_csv(task, &dir.join(&name))?;
            entry.tasks.push(ManifestTask {
                task_id: task.task_id,
                path: name,
            });
        }
        manifest.batches.push(entry);
    }
    let path = dir.join(MANIFEST_NAME);
    let mut out = Vec::new();
    serde_json::to_writer_pretty(&mut out, &manifest)
        .map_err(|e| Error::io(&path, std::io::Error::other(e)))?;
    out.push(b'\n');
    std::fs::write(&path, out).map_err(|e| Error::io(&path, e))
}

pub fn write_task_csv(task: &Task, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let header: Vec<String> = ["label".to_string(), "split".to_string()]
        .into_iter()
        .chain((0..task.dim()).map(|j| format!("f{j}")))
        .collect();
    writeln!(w, "{}", header.join(",")).map_err(|e| Error::io(path, e))?;
    for (set, split) in [(&task.train, "train"), (&task.eval, "eval")] {
        for (i, &label) in set.labels().iter().enumerate() {
            write!(w, "{label},{split}").map_err(|e| Error::io(path, e))?;
            for value in set.inputs().row(i) {
                // `{}` prints the shortest decimal that parses back to the
                // same f64, which is what makes the round-trip exact.
                write!(w, ",{value}").map_err(|e| Error::io(path, e))?;
            }
            writeln!(w).map_err(|e| Error::io(path, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn read_task_csv(path: &Path, task_id: usize, fallback: SplitFallback) -> Result<(Task, TaskIngest)> {
    let parse_err = |line: u64, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(BufReader::new(file));

    let headers = reader
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .clone();
    if headers.len() < 3 || headers.get(0) != Some("label") || headers.get(1) != Some("split") {
        return Err(parse_err(
            1,
            format!(
                "expected header starting `label,split,f0,...`, found `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }
    let dim = headers.len() - 2;

    let mut label_map: Vec<i64> = Vec::new();
    let mut dense: HashMap<i64, usize> = HashMap::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut labels: Vec<usize> = Vec::new();
    // Some(line) on the first row of each kind, for mixed-mode reporting.
    let mut first_declared: Option<u64> = None;
    let mut first_empty: Option<u64> = None;
    let mut splits: Vec<bool> = Vec::new(); // true = eval

    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        let raw_label: i64 = record
            .get(0)
            .unwrap_or_default()
            .trim()
            .parse()
            .map_err(|_| {
                parse_err(
                    line,
                    format!("invalid label `{}`", record.get(0).unwrap_or_default()),
                )
            })?;
        let local = *dense.entry(raw_label).or_insert_with(|| {
            label_map.push(raw_label);
            label_map.len() - 1
        });
        let split = record.get(1).unwrap_or_default().trim();
        let is_eval = match split {
            "train" => {
                first_declared.get_or_insert(line);
                false
            }
            "eval" => {
                first_declared.get_or_insert(line);
                true
            }
            "" => {
                first_empty.get_or_insert(line);
                false
            }
            other => return Err(parse_err(line, format!("invalid split `{other}`"))),
        };
        let mut row = Vec::with_capacity(dim);
        for (j, field) in record.iter().skip(2).enumerate() {
            let value: f64 = field
                .trim()
                .parse()
                .map_err(|_| parse_err(line, format!("non-numeric feature f{j}: `{field}`")))?;
            if !value.is_finite() {
                return Err(parse_err(line, format!("non-finite feature f{j}: `{field}`")));
            }
            row.push(value);
        }
        rows.push(row);
        labels.push(local);
        splits.push(is_eval);
    }

    if rows.is_empty() {
        return Err(parse_err(0, "file contains no data rows".into()));
    }
    if let (Some(declared), Some(empty)) = (first_declared, first_empty) {
        let _ = declared;
        return Err(parse_err(
            empty,
            "split column empty here but declared on other rows".into(),
        ));
    }

    let n = rows.len();
    let mut inputs = Array2::zeros((n, dim));
    for (i, row) in rows.iter().enumerate() {
        for (j, &value) in row.iter().enumerate() {
            inputs[[i, j]] = value;
        }
    }
    let class_count = label_map.len();
    let set = LabeledSet::new(inputs, labels, class_count)?;

    let declared_split = first_declared.is_some();
    let (train, eval) = if declared_split {
        let train_idx: Vec<usize> = (0..n).filter(|&i| !splits[i]).collect();
        let eval_idx: Vec<usize> = (0..n).filter(|&i| splits[i]).collect();
        if train_idx.is_empty() || eval_idx.is_empty() {
            let which = if train_idx.is_empty() { "train" } else { "eval" };
            return Err(parse_err(0, format!("file declares no {which} rows")));
        }
        (set.select_rows(&train_idx)?, set.select_rows(&eval_idx)?)
    } else {
        let seed = rng::derive(fallback.seed, &[stream::SUITE_SPLIT, task_id as u64]);
        split_train_eval(&set, fallback.eval_fraction, seed)?
    };

    let task = Task::new(task_id, train, eval)?;
    let ingest = TaskIngest {
        task_id,
        path: path.display().to_string(),
        label_map,
        declared_split,
    };
    Ok((task, ingest))
}

fn csv_error(path: &Path, err: csv::Error) -> Error {
    let line = match err.kind() {
        csv::ErrorKind::UnequalLengths { pos, .. } => pos.as_ref().map_or(0, |p| p.line()),
        _ => err.position().map_or(0, |p| p.line()),
    };
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: match err.kind() {
            csv::ErrorKind::UnequalLengths { expected_len, len, .. } => {
                format!("row has {len} fields, header declares {expected_len}")
            }
            _ => err.to_string(),
        },
    }
}
