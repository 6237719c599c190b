//! Deterministic parallel sweep execution with streamed JSONL output,
//! crash-resume, and a CSV summary.
//!
//! Tasks are the product of grid points and master seeds. A work-stealing
//! pool evaluates them in any order; a single writer thread appends records
//! as they complete, so output is append-only and a crashed run resumes by
//! skipping the task keys already present in the file. Because every record
//! is keyed, the summary (means and standard errors per grid point) is
//! independent of worker count and completion order.

use crate::config::SweepConfig;
use crate::experiments::{run_task, Caches};
use crate::record::{task_seed, ResultRecord};
use std::collections::{BTreeMap, HashSet};
use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::mpsc;
use std::time::Instant;

pub struct SweepReport {
    pub executed: usize,
    pub skipped: usize,
    pub failures: usize,
    pub summary_path: std::path::PathBuf,
}

/// Reads the task keys of complete records from an existing output file.
/// A truncated trailing line (crash artifact) is ignored.
pub fn completed_keys(path: &Path) -> HashSet<String> {
    let mut keys = HashSet::new();
    let Ok(file) = std::fs::File::open(path) else {
        return keys;
    };
    for line in BufReader::new(file).lines().map_while(Result::ok) {
        if let Ok(rec) = serde_json::from_str::<ResultRecord>(&line) {
            if rec.status == "ok" {
                keys.insert(rec.task_key);
            }
        }
    }
    keys
}

pub fn run_sweep(
    config: &SweepConfig,
    threads: usize,
    resume: bool,
) -> Result<SweepReport, String> {
    let grid_points = config.grid_points();
    let done: HashSet<String> = if resume {
        completed_keys(&config.output)
    } else {
        if config.output.exists() {
            std::fs::remove_file(&config.output).map_err(|e| e.to_string())?;
        }
        HashSet::new()
    };
    let mut tasks = Vec::new();
    for (gi, gp) in grid_points.iter().enumerate() {
        for si in 0..config.seeds.len() {
            let key = ResultRecord::key(gi, si);
            if !done.contains(&key) {
                tasks.push((gi, si, gp.clone(), key));
            }
        }
    }
    let skipped = grid_points.len() * config.seeds.len() - tasks.len();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| e.to_string())?;
    let (tx, rx) = mpsc::channel::<ResultRecord>();
    let out_path = config.output.clone();
    let writer = std::thread::spawn(move || -> Result<usize, String> {
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&out_path)
            .map_err(|e| e.to_string())?;
        let mut failures = 0usize;
        for rec in rx {
            if rec.status != "ok" {
                failures += 1;
            }
            let line = serde_json::to_string(&rec).map_err(|e| e.to_string())?;
            file.write_all(line.as_bytes()).map_err(|e| e.to_string())?;
            file.write_all(b"\n").map_err(|e| e.to_string())?;
            file.flush().map_err(|e| e.to_string())?;
        }
        Ok(failures)
    });

    let caches = Caches::default();
    let executed = tasks.len();
    pool.scope(|scope| {
        for (gi, si, gp, key) in tasks {
            let tx = tx.clone();
            let caches = &caches;
            scope.spawn(move |_| {
                let t0 = Instant::now();
                let outcome = run_task(config, &gp, gi, si, caches);
                let mut grid_map = BTreeMap::new();
                for (name, value) in &gp {
                    grid_map.insert(name.clone(), *value);
                }
                let master = config.seeds[si];
                let rec = match outcome {
                    Ok(out) => ResultRecord {
                        experiment: config.experiment.name().to_string(),
                        task_key: key,
                        status: "ok".into(),
                        grid: grid_map,
                        params: config.params.clone(),
                        options: config.options.clone(),
                        seed: master,
                        task_seed: task_seed(master, gi as u64, si as u64),
                        value_re: out.value.re,
                        value_im: out.value.im,
                        quantized_value: out.quantized,
                        deviation: out.deviation,
                        diagnostics: out.diagnostics,
                        wall_time_ms: t0.elapsed().as_millis() as u64,
                        code_version: env!("CARGO_PKG_VERSION").to_string(),
                    },
                    Err(msg) => ResultRecord {
                        experiment: config.experiment.name().to_string(),
                        task_key: key,
                        status: format!("error: {msg}"),
                        grid: grid_map,
                        params: config.params.clone(),
                        options: config.options.clone(),
                        seed: master,
                        task_seed: task_seed(master, gi as u64, si as u64),
                        value_re: f64::NAN,
                        value_im: f64::NAN,
                        quantized_value: 0,
                        deviation: f64::NAN,
                        diagnostics: BTreeMap::new(),
                        wall_time_ms: t0.elapsed().as_millis() as u64,
                        code_version: env!("CARGO_PKG_VERSION").to_string(),
                    },
                };
                // a dropped receiver means the writer died; nothing to do
                let _ = tx.send(rec);
            });
        }
    });
    drop(tx);
    let failures = writer.join().map_err(|_| "writer thread panicked".to_string())??;

    let summary_path = write_summary(config)?;
    Ok(SweepReport { executed, skipped, failures, summary_path })
}

/// Summary CSV: one row per grid point with the mean and standard error of
/// the record values, computed from the full output file (so resumed runs
/// summarize everything).
pub fn write_summary(config: &SweepConfig) -> Result<std::path::PathBuf, String> {
    let file = std::fs::File::open(&config.output).map_err(|e| e.to_string())?;
    let mut per_point: BTreeMap<String, Vec<ResultRecord>> = BTreeMap::new();
    for line in BufReader::new(file).lines().map_while(Result::ok) {
        if let Ok(rec) = serde_json::from_str::<ResultRecord>(&line) {
            if rec.status == "ok" {
                let gi = rec
                    .task_key
                    .strip_prefix('g')
                    .and_then(|s| s.split('_').next())
                    .unwrap_or("?")
                    .to_string();
                per_point.entry(gi).or_default().push(rec);
            }
        }
    }
    let summary_path = config.output.with_extension("summary.csv");
    let mut out = String::new();
    let axes: Vec<String> = config.grid.iter().map(|a| a.name.clone()).collect();
    out.push_str("grid_index");
    for a in &axes {
        out.push(',');
        out.push_str(a);
    }
    out.push_str(",n,mean_re,sem_re,mean_im,mean_deviation\n");
    for (gi, recs) in &per_point {
        let n = recs.len() as f64;
        let mean_re = recs.iter().map(|r| r.value_re).sum::<f64>() / n;
        let mean_im = recs.iter().map(|r| r.value_im).sum::<f64>() / n;
        let var = recs
            .iter()
            .map(|r| (r.value_re - mean_re).powi(2))
            .sum::<f64>()
            / n.max(1.0);
        let sem = (var / n).sqrt();
        let mean_dev = recs.iter().map(|r| r.deviation).sum::<f64>() / n;
        out.push_str(gi);
        for a in &axes {
            out.push(',');
            let v = recs[0].grid.get(a).copied().unwrap_or(f64::NAN);
            out.push_str(&format!("{v:.12e}"));
        }
        out.push_str(&format!(
            ",{},{mean_re:.12e},{sem:.12e},{mean_im:.12e},{mean_dev:.12e}\n",
            recs.len()
        ));
    }
    std::fs::write(&summary_path, out).map_err(|e| e.to_string())?;
    Ok(summary_path)
}
