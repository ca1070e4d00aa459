//! Figures of merit for compiled circuits and geometric-mean aggregation.

use serde::{Deserialize, Serialize};

use crate::circuit::{critical_path, depth, gate_count, Gate, GateKind};
use crate::compiled::CompiledCircuit;
use crate::device::{Backend, InstructionSpec};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EspOptions {
    /// Multiply each qubit's ESP by `exp(-t/T1) * exp(-t/T2)`, where `t`
    /// is the span between its first gate start and last gate end.
    pub decoherence: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub esp: f64,
    pub exec_time_ns: f64,
    pub inter_chiplet_gates: usize,
    pub depth: usize,
    pub gate_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stratify_time_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elaborate_time_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solve_time_s: Option<f64>,
}

impl MetricsReport {
    /// Everything except the wall-clock fields.
    pub fn compute(cc: &CompiledCircuit, b: &Backend, opts: EspOptions) -> Result<Self> {
        Ok(MetricsReport {
            esp: esp_with(cc, b, opts)?,
            exec_time_ns: exec_time(cc, b)?,
            inter_chiplet_gates: inter_chiplet_gates(cc, b),
            depth: depth(&cc.circuit),
            gate_count: gate_count(&cc.circuit),
            ..Default::default()
        })
    }
}

fn spec(b: &Backend, g: &Gate, index: usize) -> Result<InstructionSpec> {
    b.gate_spec(g).ok_or_else(|| {
        Error::InvalidCircuit(format!("gate {index} ({g}) is not executable on backend '{}'", b.name))
    })
}

pub fn esp(cc: &CompiledCircuit, b: &Backend) -> Result<f64> {
    esp_with(cc, b, EspOptions::default())
}

/// Geometric mean, over qubits touched by at least one gate, of the
/// product of `1 - error` of the gates on that qubit. Barriers are ignored.
pub fn esp_with(cc: &CompiledCircuit, b: &Backend, opts: EspOptions) -> Result<f64> {
    let n = cc.circuit.num_qubits as usize;
    let mut log_esp = vec![0.0f64; n];
    let mut touched = vec![false; n];
    let mut ready = vec![0.0f64; n];
    let mut first_start = vec![f64::INFINITY; n];
    for (i, g) in cc.circuit.gates.iter().enumerate() {
        if g.kind() == GateKind::Barrier {
            continue;
        }
        let s = spec(b, g, i)?;
        let start = g.qubits().iter().map(|&q| ready[q as usize]).fold(0.0, f64::max);
        for &q in g.qubits() {
            let q = q as usize;
            touched[q] = true;
            log_esp[q] += (1.0 - s.error).ln();
            first_start[q] = first_start[q].min(start);
            ready[q] = start + s.duration_ns;
        }
    }
    let count = touched.iter().filter(|&&t| t).count();
    if count == 0 {
        return Ok(1.0);
    }
    let mut total = 0.0;
    for q in (0..n).filter(|&q| touched[q]) {
        let mut l = log_esp[q];
        if opts.decoherence {
            let t_s = (ready[q] - first_start[q]) * 1e-9;
            l -= t_s / b.qubit_spec.t1_s + t_s / b.qubit_spec.t2_s;
        }
        total += l;
    }
    Ok((total / count as f64).exp())
}

/// ASAP makespan with device durations; Rz and barriers take no time.
pub fn exec_time(cc: &CompiledCircuit, b: &Backend) -> Result<f64> {
    let mut bad = None;
    let t = critical_path(&cc.circuit, |g| match b.gate_spec(g) {
        Some(s) => s.duration_ns,
        None => {
            bad.get_or_insert(*g);
            0.0
        }
    });
    match bad {
        Some(g) => Err(Error::InvalidCircuit(format!("{g} is not executable on backend '{}'", b.name))),
        None => Ok(t),
    }
}

pub fn inter_chiplet_gates(cc: &CompiledCircuit, b: &Backend) -> usize {
    cc.circuit
        .gates
        .iter()
        .filter(|g| matches!(*g.qubits(), [x, y] if b.is_inter(x, y)))
        .count()
}

/// `(prod seqc_i / baseline_i)^(1/N)`.
pub fn geomean_ratio(pairs: &[(f64, f64)]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::InvalidInput("geomean of an empty suite".into()));
    }
    let mut log_sum = 0.0;
    for (i, &(ours, base)) in pairs.iter().enumerate() {
        if !(base > 0.0) {
            return Err(Error::InvalidInput(format!("baseline value {base} at index {i} is not positive")));
        }
        if !(ours >= 0.0) {
            return Err(Error::InvalidInput(format!("value {ours} at index {i} is negative")));
        }
        log_sum += (ours / base).ln();
    }
    Ok((log_sum / pairs.len() as f64).exp())
}

pub fn geomean(values: &[f64]) -> Result<f64> {
    let pairs: Vec<(f64, f64)> = values.iter().map(|&v| (v, 1.0)).collect();
    geomean_ratio(&pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Circuit;
    use crate::compiled::{Layout, Pipeline};
    use crate::device::generate_backend;

    fn wrap(b: &Backend, gates: Vec<Gate>) -> CompiledCircuit {
        let n = b.num_qubits();
        CompiledCircuit {
            circuit: Circuit::with_gates("t", n, gates).unwrap(),
            initial_layout: Layout::trivial(n, n).unwrap(),
            final_layout: Layout::trivial(n, n).unwrap(),
            backend_id: b.name.clone(),
            pipeline: Pipeline::Seqc,
            seed: 0,
        }
    }

    fn intra_pair(b: &Backend) -> (u32, u32) {
        let l = b.links.iter().find(|l| !b.is_inter(l.a, l.b)).unwrap();
        (l.a, l.b)
    }

    fn inter_pair(b: &Backend) -> (u32, u32) {
        let (_, l) = b.inter_links().next().unwrap();
        (l.a, l.b)
    }

    #[test]
    fn esp_units() {
        let b = generate_backend(2, 10, 4.0).unwrap();
        assert_eq!(esp(&wrap(&b, vec![]), &b).unwrap(), 1.0);
        let (x, y) = intra_pair(&b);
        let v = esp(&wrap(&b, vec![Gate::cz(x, y)]), &b).unwrap();
        assert!((v - (1.0 - 0.00605)).abs() < 1e-12);
        let (x, y) = inter_pair(&b);
        let v = esp(&wrap(&b, vec![Gate::swap(x, y)]), &b).unwrap();
        assert!((v - (1.0 - 0.1023)).abs() < 1e-12);
    }

    #[test]
    fn decoherence_only_lowers_esp() {
        let b = generate_backend(1, 10, 4.0).unwrap();
        let (x, y) = intra_pair(&b);
        let cc = wrap(&b, vec![Gate::cz(x, y), Gate::x(x), Gate::x(x)]);
        let plain = esp(&cc, &b).unwrap();
        let deco = esp_with(&cc, &b, EspOptions { decoherence: true }).unwrap();
        assert!(deco < plain);
    }

    #[test]
    fn exec_time_units() {
        let b = generate_backend(2, 10, 4.0).unwrap();
        assert_eq!(exec_time(&wrap(&b, vec![Gate::x(0), Gate::x(0)]), &b).unwrap(), 50.0);
        assert_eq!(exec_time(&wrap(&b, vec![Gate::x(0), Gate::x(1)]), &b).unwrap(), 25.0);
        assert_eq!(exec_time(&wrap(&b, vec![Gate::rz(1.0, 0)]), &b).unwrap(), 0.0);
        let (x, y) = inter_pair(&b);
        assert_eq!(exec_time(&wrap(&b, vec![Gate::swap(x, y)]), &b).unwrap(), 702.4);
        assert_eq!(inter_chiplet_gates(&wrap(&b, vec![Gate::swap(x, y)]), &b), 1);
    }

    #[test]
    fn non_executable_gate_is_an_error() {
        let b = generate_backend(1, 10, 4.0).unwrap();
        let cc = wrap(&b, vec![Gate::h(0)]);
        assert!(esp(&cc, &b).is_err());
        assert!(exec_time(&cc, &b).is_err());
    }

    #[test]
    fn geomean_examples() {
        assert_eq!(geomean_ratio(&[(3.0, 3.0), (5.0, 5.0)]).unwrap(), 1.0);
        assert!((geomean_ratio(&[(2.0, 1.0), (8.0, 1.0)]).unwrap() - 4.0).abs() < 1e-12);
        assert!(geomean_ratio(&[(1.0, 0.0)]).is_err());
        assert!(geomean_ratio(&[]).is_err());
    }
}
