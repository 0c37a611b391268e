//! Parallel, resumable grid runs.
//!
//! Finished points are appended to `<out>.partial` as `index,row` lines in
//! completion order and recorded in `<out>.manifest.json`. The final file
//! is assembled in grid order once every point is present, so its bytes do
//! not depend on the thread count or on interruptions.

use std::fs::{self, File, OpenOptions};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::row::{evaluate, Row, CSV_HEADER};
use super::spec::{Format, SweepSpec};
use crate::error::{Error, Result};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub spec_hash: String,
    pub tool_version: String,
    pub grid_size: usize,
    /// One `0/1` character per grid point.
    pub completed: String,
    /// Per point `converged_flags`, empty until computed.
    pub converged_flags: Vec<String>,
    /// Accumulated over resumed runs.
    pub wall_time_s: f64,
    pub complete: bool,
    /// Density runs only: `ok`, `empty` or `none`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contour: Option<String>,
}

impl RunManifest {
    fn fresh(spec_hash: String, n: usize) -> Self {
        Self {
            spec_hash,
            tool_version: TOOL_VERSION.to_string(),
            grid_size: n,
            completed: "0".repeat(n),
            converged_flags: vec![String::new(); n],
            wall_time_s: 0.0,
            complete: false,
            contour: None,
        }
    }

    pub fn completed_count(&self) -> usize {
        self.completed.bytes().filter(|&b| b == b'1').count()
    }

    pub fn unconverged_count(&self) -> usize {
        self.converged_flags
            .iter()
            .filter(|f| !f.is_empty() && f.as_str() != "1111")
            .count()
    }

    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
    }

    /// Written to a temporary file and renamed into place.
    pub fn write(&self, path: &Path) -> Result<()> {
        let tmp = sibling(path, ".tmp");
        {
            let mut w = BufWriter::new(File::create(&tmp)?);
            serde_json::to_writer_pretty(&mut w, self)?;
            writeln!(w)?;
            w.flush()?;
        }
        fs::rename(tmp, path)?;
        Ok(())
    }

    fn mark(&mut self, idx: usize, flags: &str) {
        self.completed.replace_range(idx..idx + 1, "1");
        self.converged_flags[idx] = flags.to_string();
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Worker threads; 0 uses all cores.
    pub threads: usize,
    pub resume: bool,
    /// Stop after this many new points, leaving a resumable partial run.
    pub stop_after: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub manifest: RunManifest,
    /// Grid order; empty unless the run completed.
    pub rows: Vec<Row>,
}

impl RunOutcome {
    pub fn complete(&self) -> bool {
        self.manifest.complete
    }
}

pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

pub fn partial_path(out: &Path) -> PathBuf {
    sibling(out, ".partial")
}

pub fn manifest_path(out: &Path) -> PathBuf {
    sibling(out, ".manifest.json")
}

/// Reads complete `index,row` lines; a torn final line from an interrupted
/// write is ignored.
fn read_partial(path: &Path, n: usize) -> Result<Vec<Option<Row>>> {
    let mut rows = vec![None; n];
    if !path.exists() {
        return Ok(rows);
    }
    let text = fs::read_to_string(path)?;
    let complete_lines = if text.ends_with('\n') {
        text.as_str()
    } else {
        text.rsplit_once('\n').map_or("", |(a, _)| a)
    };
    for line in complete_lines.lines() {
        let Some((idx, rest)) = line.split_once(',') else {
            continue;
        };
        let (Ok(idx), Ok(row)) = (idx.parse::<usize>(), Row::from_csv(rest)) else {
            continue;
        };
        if idx < n {
            rows[idx] = Some(row);
        }
    }
    Ok(rows)
}

fn rewrite_partial(path: &Path, rows: &[Option<Row>]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for (i, r) in rows.iter().enumerate() {
        if let Some(r) = r {
            writeln!(w, "{i},{}", r.to_csv())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_rows<W: Write>(mut w: W, rows: &[Row], format: Format) -> Result<()> {
    match format {
        Format::Csv => {
            writeln!(w, "{CSV_HEADER}")?;
            for r in rows {
                writeln!(w, "{}", r.to_csv())?;
            }
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut w, rows)?;
            writeln!(w)?;
        }
    }
    Ok(())
}

/// Evaluates every grid point of `spec`, writing the result to `out`.
pub fn run_sweep(spec: &SweepSpec, out: &Path, opts: &RunOptions) -> Result<RunOutcome> {
    spec.validate()?;
    let grid = spec.grid()?;
    let n = grid.len();
    let hash = spec.hash();
    let (man_path, part_path) = (manifest_path(out), partial_path(out));

    let mut existing = vec![None; n];
    let mut manifest = RunManifest::fresh(hash.clone(), n);
    if opts.resume && man_path.exists() {
        let old = RunManifest::read(&man_path)?;
        if old.spec_hash != hash || old.grid_size != n {
            return Err(Error::InvalidParams(format!(
                "cannot resume: manifest {} was written for a different spec",
                man_path.display()
            )));
        }
        manifest.wall_time_s = old.wall_time_s;
        // trust only rows that made it to disk intact
        existing = read_partial(&part_path, n)?;
        for (i, r) in existing.iter().enumerate() {
            if let Some(r) = r {
                manifest.mark(i, &r.converged_flags);
            }
        }
    } else if opts.resume {
        log::warn!(
            "no manifest at {}; starting a fresh run",
            man_path.display()
        );
    }
    rewrite_partial(&part_path, &existing)?;
    manifest.write(&man_path)?;

    let start = Instant::now();
    let base_time = manifest.wall_time_s;
    let pending: Vec<usize> = (0..n).filter(|&i| existing[i].is_none()).collect();
    let budget = opts.stop_after.unwrap_or(usize::MAX);
    let started = AtomicUsize::new(0);
    let sink = Mutex::new((
        OpenOptions::new().append(true).open(&part_path)?,
        manifest,
        existing,
    ));

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.threads)
        .build()
        .map_err(|e| Error::InvalidParams(format!("thread pool: {e}")))?;
    pool.install(|| {
        pending.par_iter().try_for_each(|&i| -> Result<()> {
            if started.fetch_add(1, Ordering::SeqCst) >= budget {
                return Ok(());
            }
            let row = evaluate(&grid[i], spec.lambda, &spec.cutoffs)?;
            let mut guard = sink.lock().unwrap_or_else(|e| e.into_inner());
            let (file, manifest, rows) = &mut *guard;
            writeln!(file, "{i},{}", row.to_csv())?;
            file.flush()?;
            manifest.mark(i, &row.converged_flags);
            manifest.wall_time_s = base_time + start.elapsed().as_secs_f64();
            manifest.write(&man_path)?;
            rows[i] = Some(row);
            Ok(())
        })
    })?;

    let (_, mut manifest, rows) = sink.into_inner().unwrap_or_else(|e| e.into_inner());
    manifest.wall_time_s = base_time + start.elapsed().as_secs_f64();
    if rows.iter().any(Option::is_none) {
        manifest.write(&man_path)?;
        return Ok(RunOutcome {
            manifest,
            rows: Vec::new(),
        });
    }
    let rows: Vec<Row> = rows.into_iter().flatten().collect();
    {
        let mut w = BufWriter::new(File::create(out)?);
        write_rows(&mut w, &rows, spec.format)?;
        w.flush()?;
    }
    manifest.complete = true;
    manifest.write(&man_path)?;
    fs::remove_file(&part_path)?;
    Ok(RunOutcome { manifest, rows })
}
