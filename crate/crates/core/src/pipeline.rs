//! End-to-end compilation with per-stage wall-clock timing.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::baseline::{baseline_compile_with, BaselineConfig};
use crate::circuit::Circuit;
use crate::compiled::{CompiledCircuit, Pipeline};
use crate::device::Backend;
use crate::elaborate::{elaborate_with, ElaborateConfig};
use crate::error::Result;
use crate::stratify::{stratify, StratifiedCircuit, StratifyConfig};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CompileConfig {
    #[serde(default)]
    pub baseline: BaselineConfig,
    #[serde(default)]
    pub stratify: StratifyConfig,
    #[serde(default)]
    pub elaborate: ElaborateConfig,
}

/// Wall-clock seconds per stage. `solve_s` covers the whole pipeline.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimes {
    pub stratify_s: Option<f64>,
    pub elaborate_s: Option<f64>,
    pub solve_s: f64,
}

pub struct CompileOutput {
    pub compiled: CompiledCircuit,
    /// Present for the SEQC pipeline.
    pub stratified: Option<StratifiedCircuit>,
    pub times: StageTimes,
}

pub fn compile(
    c: &Circuit,
    b: &Backend,
    pipeline: Pipeline,
    cfg: &CompileConfig,
    workers: usize,
    seed: u64,
) -> Result<CompileOutput> {
    match pipeline {
        Pipeline::Baseline => {
            let t = Instant::now();
            let compiled = baseline_compile_with(c, b, seed, &cfg.baseline)?;
            let solve_s = t.elapsed().as_secs_f64();
            Ok(CompileOutput { compiled, stratified: None, times: StageTimes { solve_s, ..Default::default() } })
        }
        Pipeline::Seqc => {
            let t = Instant::now();
            let strat = stratify(c, b, &cfg.stratify, seed)?;
            let stratify_s = t.elapsed().as_secs_f64();
            let t = Instant::now();
            let compiled = elaborate_with(&strat, b, workers, seed, &cfg.elaborate)?;
            let elaborate_s = t.elapsed().as_secs_f64();
            Ok(CompileOutput {
                compiled,
                stratified: Some(strat),
                times: StageTimes {
                    stratify_s: Some(stratify_s),
                    elaborate_s: Some(elaborate_s),
                    solve_s: stratify_s + elaborate_s,
                },
            })
        }
    }
}
