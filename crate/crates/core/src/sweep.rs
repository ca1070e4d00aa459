//! Benchmark sweeps: every (family, chiplet count, replicate) combination
//! compiled by each requested pipeline, verified, measured and persisted.
//!
//! Run `i` in enumeration order (family-major, then chiplet count, then
//! replicate) uses seed `master_seed ^ i` for the circuit and for every
//! pipeline, so reruns of the same configuration reproduce all non-timing
//! columns.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bench::{BenchSpec, Family};
use crate::compiled::{CompiledCircuit, Pipeline};
use crate::device::{generate_backend, DEFAULT_INTER_PENALTY, TILE_QUBITS};
use crate::error::{Error, Result};
use crate::metrics::{geomean_ratio, EspOptions, MetricsReport};
use crate::pipeline::{compile, CompileConfig};
use crate::verify::verify_compiled;

fn default_pipelines() -> Vec<Pipeline> {
    vec![Pipeline::Seqc, Pipeline::Baseline]
}
fn default_replicates() -> u32 {
    3
}
fn default_qpc() -> u32 {
    TILE_QUBITS
}
fn default_penalty() -> f64 {
    DEFAULT_INTER_PENALTY
}
fn default_workers() -> usize {
    1
}
fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub families: Vec<Family>,
    pub chiplets: Vec<u32>,
    #[serde(default = "default_pipelines")]
    pub pipelines: Vec<Pipeline>,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_replicates")]
    pub replicates: u32,
    /// Circuit width; defaults to full backend capacity.
    #[serde(default)]
    pub qubits: Option<u32>,
    #[serde(default = "default_qpc")]
    pub qubits_per_chiplet: u32,
    #[serde(default = "default_penalty")]
    pub inter_penalty: f64,
    /// Elaboration workers per run.
    #[serde(default = "default_workers")]
    pub workers: usize,
    /// Upper bound on threads across all concurrent runs; defaults to the
    /// number of available cores.
    #[serde(default)]
    pub max_threads: Option<usize>,
    #[serde(default = "default_true")]
    pub verify: bool,
    #[serde(default)]
    pub esp: EspOptions,
    /// Also write each compiled circuit next to its run record.
    #[serde(default)]
    pub keep_artifacts: bool,
    #[serde(default)]
    pub compile: CompileConfig,
}

impl SweepConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: SweepConfig = serde_json::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.families.is_empty() || self.chiplets.is_empty() || self.pipelines.is_empty() {
            return Err(Error::InvalidInput("families, chiplets and pipelines must be non-empty".into()));
        }
        if self.replicates == 0 {
            return Err(Error::InvalidInput("replicates must be at least 1".into()));
        }
        if self.chiplets.contains(&0) {
            return Err(Error::InvalidInput("chiplet counts must be positive".into()));
        }
        if self.workers == 0 {
            return Err(Error::InvalidInput("workers must be at least 1".into()));
        }
        self.compile.stratify.annealing.validate()
    }

    /// `(run index, family, chiplets, seed)` for every run, in order.
    pub fn runs(&self) -> Vec<(usize, Family, u32, u64)> {
        let mut out = Vec::new();
        for &f in &self.families {
            for &c in &self.chiplets {
                for _ in 0..self.replicates {
                    let i = out.len();
                    out.push((i, f, c, self.master_seed ^ i as u64));
                }
            }
        }
        out
    }

    fn concurrent_runs(&self) -> usize {
        let cap = self
            .max_threads
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
        (cap / self.workers).max(1)
    }
}

/// One CSV row / run-record JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub family: Family,
    pub n: u32,
    pub chiplets: u32,
    pub pipeline: Pipeline,
    pub seed: u64,
    pub metrics: MetricsReport,
}

impl RunRecord {
    pub fn file_stem(&self) -> String {
        format!("{}-n{}-c{}-s{}-{}", self.family, self.n, self.chiplets, self.seed, self.pipeline.name())
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    family: String,
    n: u32,
    chiplets: u32,
    pipeline: String,
    seed: u64,
    esp: f64,
    exec_ns: f64,
    inter_gates: usize,
    depth: usize,
    gates: usize,
    strat_s: Option<f64>,
    elab_s: Option<f64>,
    solve_s: Option<f64>,
}

impl From<&RunRecord> for CsvRow {
    fn from(r: &RunRecord) -> Self {
        let m = &r.metrics;
        CsvRow {
            family: r.family.name().to_string(),
            n: r.n,
            chiplets: r.chiplets,
            pipeline: r.pipeline.name().to_string(),
            seed: r.seed,
            esp: m.esp,
            exec_ns: m.exec_time_ns,
            inter_gates: m.inter_chiplet_gates,
            depth: m.depth,
            gates: m.gate_count,
            strat_s: m.stratify_time_s,
            elab_s: m.elaborate_time_s,
            solve_s: m.solve_time_s,
        }
    }
}

pub const CSV_COLUMNS: [&str; 13] = [
    "family", "n", "chiplets", "pipeline", "seed", "esp", "exec_ns", "inter_gates", "depth", "gates",
    "strat_s", "elab_s", "solve_s",
];

pub fn write_csv(records: &[RunRecord], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for r in records {
        w.serialize(CsvRow::from(r)).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => Error::Io(e),
        other => Error::InvalidInput(format!("csv: {other:?}")),
    }
}

/// Compiles one run for one pipeline; the compiled circuit is verified
/// before anything is returned.
pub fn run_one(
    cfg: &SweepConfig,
    family: Family,
    chiplets: u32,
    seed: u64,
    pipeline: Pipeline,
) -> Result<(RunRecord, CompiledCircuit)> {
    let b = generate_backend(chiplets, cfg.qubits_per_chiplet, cfg.inter_penalty)?;
    let n = cfg.qubits.unwrap_or(b.num_qubits());
    let circuit = BenchSpec::new(family, n, seed).generate()?;
    let out = compile(&circuit, &b, pipeline, &cfg.compile, cfg.workers, seed)?;
    if cfg.verify {
        verify_compiled(&circuit, &out.compiled, &b).map_err(|e| {
            Error::Verification(format!("{family} n={n} chiplets={chiplets} seed={seed} {}: {e}", pipeline.name()))
        })?;
    }
    let mut metrics = MetricsReport::compute(&out.compiled, &b, cfg.esp)?;
    metrics.stratify_time_s = out.times.stratify_s;
    metrics.elaborate_time_s = out.times.elaborate_s;
    metrics.solve_time_s = Some(out.times.solve_s);
    Ok((RunRecord { family, n, chiplets, pipeline, seed, metrics }, out.compiled))
}

/// Runs the sweep, writing `runs/<stem>.json` per record and `report.csv`
/// into `out_dir`. Records come back in enumeration order.
pub fn run_sweep(cfg: &SweepConfig, out_dir: &Path) -> Result<Vec<RunRecord>> {
    cfg.validate()?;
    let runs_dir = out_dir.join("runs");
    fs::create_dir_all(&runs_dir)?;
    let jobs: Vec<(Family, u32, u64, Pipeline)> = cfg
        .runs()
        .into_iter()
        .flat_map(|(_, f, c, s)| cfg.pipelines.iter().map(move |&p| (f, c, s, p)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.concurrent_runs())
        .build()
        .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
    let results: Vec<(RunRecord, CompiledCircuit)> = pool.install(|| {
        jobs.par_iter().map(|&(f, c, s, p)| run_one(cfg, f, c, s, p)).collect::<Result<_>>()
    })?;
    let mut records = Vec::with_capacity(results.len());
    for (rec, cc) in results {
        let stem = rec.file_stem();
        fs::write(runs_dir.join(format!("{stem}.json")), serde_json::to_string_pretty(&rec)?)?;
        if cfg.keep_artifacts {
            fs::write(runs_dir.join(format!("{stem}.compiled.json")), cc.to_json()?)?;
        }
        records.push(rec);
    }
    write_csv(&records, &out_dir.join("report.csv"))?;
    Ok(records)
}

/// Loads every run record (`*.json` not ending in `.compiled.json`) from a
/// directory, sorted by file name.
pub fn load_records(dir: &Path) -> Result<Vec<RunRecord>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    paths.retain(|p| {
        let name = p.file_name().and_then(|s| s.to_str()).unwrap_or("");
        name.ends_with(".json") && !name.ends_with(".compiled.json")
    });
    paths.sort();
    paths
        .iter()
        .map(|p| {
            let s = fs::read_to_string(p)?;
            serde_json::from_str(&s)
                .map_err(|e| Error::InvalidInput(format!("{}: {e}", p.display())))
        })
        .collect()
}

/// SEQC-over-baseline geometric means across matched runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub pairs: usize,
    pub inter_gates: Option<f64>,
    pub esp: Option<f64>,
    pub exec_time: Option<f64>,
    pub depth: Option<f64>,
    pub gates: Option<f64>,
}

/// Pairs SEQC and baseline records with identical (family, n, chiplets,
/// seed) among the given chiplet counts (all if empty). A ratio is `None`
/// when some baseline value is zero.
pub fn summarize(records: &[RunRecord], chiplets: &[u32]) -> Summary {
    let key = |r: &RunRecord| (r.family, r.n, r.chiplets, r.seed);
    let mut pairs = Vec::new();
    for s in records.iter().filter(|r| r.pipeline == Pipeline::Seqc) {
        if !chiplets.is_empty() && !chiplets.contains(&s.chiplets) {
            continue;
        }
        if let Some(b) = records.iter().find(|r| r.pipeline == Pipeline::Baseline && key(r) == key(s)) {
            pairs.push((&s.metrics, &b.metrics));
        }
    }
    let ratio = |f: fn(&MetricsReport) -> f64| -> Option<f64> {
        let v: Vec<(f64, f64)> = pairs.iter().map(|(s, b)| (f(s), f(b))).collect();
        geomean_ratio(&v).ok()
    };
    Summary {
        pairs: pairs.len(),
        inter_gates: ratio(|m| m.inter_chiplet_gates as f64),
        esp: ratio(|m| m.esp),
        exec_time: ratio(|m| m.exec_time_ns),
        depth: ratio(|m| m.depth as f64),
        gates: ratio(|m| m.gate_count as f64),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SweepConfig {
        SweepConfig::from_json(r#"{"families":["ghz"],"chiplets":[2],"replicates":1,"master_seed":7}"#)
            .unwrap()
    }

    #[test]
    fn seeds_follow_master_xor_index() {
        let mut cfg = small();
        cfg.chiplets = vec![2, 4];
        cfg.replicates = 2;
        let seeds: Vec<u64> = cfg.runs().iter().map(|r| r.3).collect();
        assert_eq!(seeds, vec![7, 6, 5, 4]);
    }

    #[test]
    fn ghz_sweep_writes_two_records_and_a_csv() {
        let dir = tempfile::tempdir().unwrap();
        let recs = run_sweep(&small(), dir.path()).unwrap();
        assert_eq!(recs.len(), 2);
        let loaded = load_records(&dir.path().join("runs")).unwrap();
        assert_eq!(loaded.len(), 2);
        let csv = fs::read_to_string(dir.path().join("report.csv")).unwrap();
        assert_eq!(csv.lines().next().unwrap(), CSV_COLUMNS.join(","));
        assert_eq!(csv.lines().count(), 3);
        assert_eq!(summarize(&recs, &[]).pairs, 1);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(SweepConfig::from_json(r#"{"families":["ghz"],"chiplets":[2],"bogus":1}"#).is_err());
        assert!(SweepConfig::from_json(r#"{"families":[],"chiplets":[2]}"#).is_err());
    }
}
