use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::Serialize;

use seqc_core::bench::{BenchSpec, Family};
use seqc_core::circuit::Circuit;
use seqc_core::compiled::{CompiledCircuit, Pipeline};
use seqc_core::device::{generate_backend, Backend, DEFAULT_INTER_PENALTY, TILE_QUBITS};
use seqc_core::elaborate::elaborate_with;
use seqc_core::metrics::{EspOptions, MetricsReport};
use seqc_core::pipeline::{compile, CompileConfig};
use seqc_core::stratify::{stratify, StratifiedCircuit};
use seqc_core::sweep::{load_records, run_sweep, summarize, write_csv, SweepConfig};
use seqc_core::verify::{statevector_equiv, verify_compiled};
use seqc_core::{Error, Result};

const EXIT_FAILURE: u8 = 1;
const EXIT_VERIFY: u8 = 2;
const EXIT_INPUT: u8 = 3;

#[derive(Parser)]
#[command(name = "seqc", version, about = "Chiplet-aware quantum circuit compiler")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a heavy-hex chiplet backend.
    GenBackend {
        #[arg(long)]
        chiplets: u32,
        #[arg(long, default_value_t = TILE_QUBITS)]
        qubits_per_chiplet: u32,
        #[arg(long, default_value_t = DEFAULT_INTER_PENALTY)]
        inter_penalty: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a benchmark circuit.
    Bench {
        #[arg(long)]
        family: Family,
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Code rounds, ansatz layers or Trotter steps.
        #[arg(long)]
        repetitions: Option<u32>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Partition a circuit and allocate subcircuits to chiplets.
    Stratify {
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long)]
        backend: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Compiler configuration (JSON).
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Lay out, route and translate a stratified circuit.
    Elaborate {
        #[arg(long)]
        strat: PathBuf,
        #[arg(long)]
        backend: PathBuf,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a full pipeline and print metrics with stage timings.
    Compile {
        #[arg(long, default_value = "seqc")]
        pipeline: Pipeline,
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long)]
        backend: PathBuf,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Include idle decoherence in ESP.
        #[arg(long)]
        decoherence: bool,
        /// Also write the stratified circuit (seqc only).
        #[arg(long)]
        strat_out: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a compiled circuit against its source.
    Verify {
        #[arg(long)]
        original: PathBuf,
        #[arg(long)]
        compiled: PathBuf,
        #[arg(long)]
        backend: PathBuf,
        /// Also compare statevectors (at most 14 active qubits).
        #[arg(long)]
        statevector: bool,
    },
    /// Run a benchmark sweep from a JSON config or from flags.
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        families: Vec<Family>,
        #[arg(long, value_delimiter = ',')]
        chiplets: Vec<u32>,
        #[arg(long, value_delimiter = ',')]
        pipelines: Vec<Pipeline>,
        #[arg(long)]
        master_seed: Option<u64>,
        #[arg(long)]
        replicates: Option<u32>,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Aggregate run records into a CSV and print geomean ratios.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Restrict the summary to these chiplet counts.
        #[arg(long, value_delimiter = ',')]
        chiplets: Vec<u32>,
    },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

fn parse<T>(path: &Path, f: impl FnOnce(&str) -> Result<T>) -> Result<T> {
    f(&read(path)?).map_err(|e| match e {
        Error::Json(j) => Error::InvalidInput(format!("{}: {j}", path.display())),
        other => other,
    })
}

fn load_config(path: Option<&PathBuf>) -> Result<CompileConfig> {
    match path {
        Some(p) => parse(p, |s| Ok(serde_json::from_str(s)?)),
        None => Ok(CompileConfig::default()),
    }
}

/// A closed stdout (e.g. `| head`) is not an error.
fn print_json(v: &impl Serialize) -> Result<()> {
    let _ = writeln!(std::io::stdout().lock(), "{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::GenBackend { chiplets, qubits_per_chiplet, inter_penalty, out } => {
            let b = generate_backend(chiplets, qubits_per_chiplet, inter_penalty)?;
            fs::write(out, b.to_json()?)?;
        }
        Command::Bench { family, n, seed, repetitions, out } => {
            let c = BenchSpec { family, n, seed, repetitions }.generate()?;
            fs::write(out, c.to_json()?)?;
        }
        Command::Stratify { circuit, backend, seed, config, out } => {
            let c = parse(&circuit, Circuit::from_json)?;
            let b = parse(&backend, Backend::from_json)?;
            let cfg = load_config(config.as_ref())?;
            let t = Instant::now();
            let st = stratify(&c, &b, &cfg.stratify, seed)?;
            let secs = t.elapsed().as_secs_f64();
            fs::write(out, st.to_json()?)?;
            print_json(&serde_json::json!({
                "events": st.events().len(),
                "stratify_time_s": secs,
            }))?;
        }
        Command::Elaborate { strat, backend, workers, seed, config, out } => {
            let st = parse(&strat, StratifiedCircuit::from_json)?;
            let b = parse(&backend, Backend::from_json)?;
            let cfg = load_config(config.as_ref())?;
            let t = Instant::now();
            let cc = elaborate_with(&st, &b, workers, seed, &cfg.elaborate)?;
            let secs = t.elapsed().as_secs_f64();
            fs::write(out, cc.to_json()?)?;
            print_json(&serde_json::json!({ "elaborate_time_s": secs }))?;
        }
        Command::Compile {
            pipeline,
            circuit,
            backend,
            workers,
            seed,
            config,
            decoherence,
            strat_out,
            out,
        } => {
            let c = parse(&circuit, Circuit::from_json)?;
            let b = parse(&backend, Backend::from_json)?;
            let cfg = load_config(config.as_ref())?;
            let res = compile(&c, &b, pipeline, &cfg, workers, seed)?;
            verify_compiled(&c, &res.compiled, &b)?;
            let mut m = MetricsReport::compute(&res.compiled, &b, EspOptions { decoherence })?;
            m.stratify_time_s = res.times.stratify_s;
            m.elaborate_time_s = res.times.elaborate_s;
            m.solve_time_s = Some(res.times.solve_s);
            fs::write(out, res.compiled.to_json()?)?;
            if let (Some(path), Some(st)) = (strat_out, &res.stratified) {
                fs::write(path, st.to_json()?)?;
            }
            print_json(&m)?;
        }
        Command::Verify { original, compiled, backend, statevector } => {
            let c = parse(&original, Circuit::from_json)?;
            let cc = parse(&compiled, CompiledCircuit::from_json)?;
            let b = parse(&backend, Backend::from_json)?;
            verify_compiled(&c, &cc, &b)?;
            let mut report = serde_json::json!({ "valid": true, "permutation_equivalent": true });
            if statevector {
                let f = statevector_equiv(&c, &cc)?;
                report["fidelity"] = f.into();
                if f < 1.0 - 1e-9 {
                    print_json(&report)?;
                    return Err(Error::Verification(format!("statevector fidelity {f}")));
                }
            }
            print_json(&report)?;
        }
        Command::Sweep {
            config,
            families,
            chiplets,
            pipelines,
            master_seed,
            replicates,
            workers,
            out,
        } => {
            let mut cfg = match &config {
                Some(p) => parse(p, SweepConfig::from_json)?,
                None => SweepConfig::from_json(&serde_json::json!({
                    "families": families,
                    "chiplets": chiplets,
                }).to_string())?,
            };
            if config.is_some() {
                if !families.is_empty() {
                    cfg.families = families;
                }
                if !chiplets.is_empty() {
                    cfg.chiplets = chiplets;
                }
            }
            if !pipelines.is_empty() {
                cfg.pipelines = pipelines;
            }
            if let Some(s) = master_seed {
                cfg.master_seed = s;
            }
            if let Some(r) = replicates {
                cfg.replicates = r;
            }
            if let Some(w) = workers {
                cfg.workers = w;
            }
            let records = run_sweep(&cfg, &out)?;
            print_json(&serde_json::json!({
                "runs": records.len(),
                "csv": out.join("report.csv"),
                "summary": summarize(&records, &[]),
            }))?;
        }
        Command::Report { input, out, chiplets } => {
            let records = load_records(&input)?;
            if records.is_empty() {
                return Err(Error::InvalidInput(format!("no run records in {}", input.display())));
            }
            write_csv(&records, &out)?;
            print_json(&summarize(&records, &chiplets))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_INPUT) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Verification(_) => EXIT_VERIFY,
                Error::Io(_) => EXIT_FAILURE,
                _ => EXIT_INPUT,
            })
        }
    }
}
