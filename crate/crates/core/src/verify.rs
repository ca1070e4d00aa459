//! Correctness oracles for compiled circuits: structural validation,
//! SWAP-folding equivalence at any size, and statevector comparison for
//! small circuits.

use std::fmt;

use num_complex::Complex64;

use crate::baseline::expand_logical_swaps;
use crate::circuit::{Circuit, Gate, GateKind};
use crate::compiled::CompiledCircuit;
use crate::device::Backend;
use crate::elaborate::optimize::optimize;
use crate::elaborate::translate::lower_gate;
use crate::error::{Error, Result};
use crate::unitary::{
    equal_up_to_phase2, is_identity_up_to_phase, mul2, single_qubit_matrix,
    two_qubit_matrix, Mat2,
};

pub const MAX_STATEVECTOR_QUBITS: usize = 14;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub gate_index: Option<usize>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.gate_index {
            Some(i) => write!(f, "gate {i}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

fn diag(gate_index: Option<usize>, message: String) -> Diagnostic {
    Diagnostic { gate_index, message }
}

/// Structural checks against the device; an empty list means valid.
pub fn validate_compiled(cc: &CompiledCircuit, b: &Backend) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let n = b.num_qubits();
    if cc.circuit.num_qubits != n {
        out.push(diag(
            None,
            format!("circuit spans {} qubits, backend has {n}", cc.circuit.num_qubits),
        ));
    }
    for (name, l) in [("initial", &cc.initial_layout), ("final", &cc.final_layout)] {
        if l.num_physical() != n as usize {
            out.push(diag(None, format!("{name} layout covers {} physical qubits", l.num_physical())));
        }
    }
    if cc.initial_layout.num_logical() != cc.final_layout.num_logical() {
        out.push(diag(None, "initial and final layouts disagree on logical count".into()));
    }
    for (i, g) in cc.circuit.gates.iter().enumerate() {
        if g.qubits().iter().any(|&q| q >= n) {
            out.push(diag(Some(i), format!("{g} addresses a qubit outside the device")));
            continue;
        }
        match *g.qubits() {
            [_] => {
                if b.instructions.single(g.kind()).is_none() {
                    out.push(diag(Some(i), format!("{} is not a device instruction", g.kind())));
                }
            }
            [x, y] => match b.link(x, y) {
                None => out.push(diag(Some(i), format!("{g}: qubits {x} and {y} are not linked"))),
                Some(l) if !l.allows(g.kind()) => out.push(diag(
                    Some(i),
                    format!("{} not allowed on {:?} link {x}-{y}", g.kind(), l.scope),
                )),
                Some(_) => {}
            },
            _ => unreachable!(),
        }
    }
    out
}

#[derive(Clone, Debug)]
enum Event {
    Unitary(Mat2),
    Cz(u32),
    Other(GateKind),
}

fn event_streams(c: &Circuit) -> Vec<Vec<Event>> {
    let mut streams: Vec<Vec<Event>> = vec![Vec::new(); c.num_qubits as usize];
    for g in &c.gates {
        match *g.qubits() {
            [q] => {
                let s = &mut streams[q as usize];
                match single_qubit_matrix(g) {
                    Some(m) => match s.last_mut() {
                        Some(Event::Unitary(prev)) => *prev = mul2(&m, prev),
                        _ => s.push(Event::Unitary(m)),
                    },
                    None => s.push(Event::Other(g.kind())),
                }
            }
            [a, b] => {
                debug_assert_eq!(g.kind(), GateKind::Cz);
                streams[a as usize].push(Event::Cz(b));
                streams[b as usize].push(Event::Cz(a));
            }
            _ => unreachable!(),
        }
    }
    for s in &mut streams {
        s.retain(|e| !matches!(e, Event::Unitary(m) if is_identity_up_to_phase(m, 1e-9)));
    }
    streams
}

/// Native lowering of a logical circuit, then a canonicalizing
/// optimization so both sides are compared in the same normal form.
fn normal_form(c: &Circuit) -> Circuit {
    let gates = c.gates.iter().flat_map(lower_gate).collect();
    optimize(&Circuit { name: c.name.clone(), num_qubits: c.num_qubits, gates })
}

/// Replays `cc`, folding every SWAP into the running placement, and
/// returns the logical circuit it implements.
fn unfold(cc: &CompiledCircuit) -> std::result::Result<Circuit, String> {
    let mut layout = cc.initial_layout.clone();
    let mut gates = Vec::with_capacity(cc.circuit.gates.len());
    for (i, g) in cc.circuit.gates.iter().enumerate() {
        if g.qubits().iter().any(|&q| q as usize >= layout.num_physical()) {
            return Err(format!("gate {i} ({g}) is outside the layout"));
        }
        if let (GateKind::Swap, &[a, b]) = (g.kind(), g.qubits()) {
            layout.swap_physical(a, b);
            continue;
        }
        let mut idle = None;
        let logical = g.remap(|p| {
            layout.logical_at(p).unwrap_or_else(|| {
                idle = Some(p);
                0
            })
        });
        if let Some(p) = idle {
            if g.kind() == GateKind::Barrier {
                continue;
            }
            return Err(format!("gate {i} ({g}) acts on unoccupied physical qubit {p}"));
        }
        gates.push(logical);
    }
    if layout != cc.final_layout {
        return Err("folded SWAPs do not reproduce the recorded final layout".into());
    }
    Ok(Circuit {
        name: cc.circuit.name.clone(),
        num_qubits: cc.initial_layout.num_logical() as u32,
        gates,
    })
}

/// Permutation-tracking equivalence with a reason on failure.
pub fn check_permutation_equiv(
    original: &Circuit,
    cc: &CompiledCircuit,
) -> std::result::Result<(), String> {
    if cc.initial_layout.num_logical() != original.num_qubits as usize {
        return Err(format!(
            "layout has {} logical qubits, circuit has {}",
            cc.initial_layout.num_logical(),
            original.num_qubits
        ));
    }
    let compiled = normal_form(&unfold(cc)?);
    let reference = normal_form(&expand_logical_swaps(original));
    let (x, y) = (event_streams(&reference), event_streams(&compiled));
    for (q, (ex, ey)) in x.iter().zip(&y).enumerate() {
        if ex.len() != ey.len() {
            return Err(format!(
                "logical qubit {q}: {} events expected, {} found",
                ex.len(),
                ey.len()
            ));
        }
        for (k, (a, b)) in ex.iter().zip(ey).enumerate() {
            let same = match (a, b) {
                (Event::Unitary(m), Event::Unitary(n)) => equal_up_to_phase2(m, n, 1e-8),
                (Event::Cz(p), Event::Cz(r)) => p == r,
                (Event::Other(p), Event::Other(r)) => p == r,
                _ => false,
            };
            if !same {
                return Err(format!("logical qubit {q}: event {k} differs ({a:?} vs {b:?})"));
            }
        }
    }
    Ok(())
}

pub fn permutation_equiv(original: &Circuit, cc: &CompiledCircuit) -> bool {
    check_permutation_equiv(original, cc).is_ok()
}

/// Structural validity plus permutation equivalence, as one error.
pub fn verify_compiled(original: &Circuit, cc: &CompiledCircuit, b: &Backend) -> Result<()> {
    let diags = validate_compiled(cc, b);
    if let Some(d) = diags.first() {
        return Err(Error::Verification(format!("{} structural problem(s), first: {d}", diags.len())));
    }
    check_permutation_equiv(original, cc).map_err(Error::Verification)
}

struct State {
    amps: Vec<Complex64>,
}

impl State {
    fn zero(n: usize) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[0] = Complex64::new(1.0, 0.0);
        State { amps }
    }

    fn apply1(&mut self, m: &Mat2, q: usize) {
        let bit = 1 << q;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let (a, b) = (self.amps[i], self.amps[i | bit]);
                self.amps[i] = m[0][0] * a + m[0][1] * b;
                self.amps[i | bit] = m[1][0] * a + m[1][1] * b;
            }
        }
    }

    /// `m` uses `hi` as the most significant operand.
    fn apply2(&mut self, m: &crate::unitary::Mat4, hi: usize, lo: usize) {
        let (bh, bl) = (1 << hi, 1 << lo);
        for i in 0..self.amps.len() {
            if i & bh == 0 && i & bl == 0 {
                let idx = [i, i | bl, i | bh, i | bh | bl];
                let v = idx.map(|j| self.amps[j]);
                for (r, &j) in idx.iter().enumerate() {
                    self.amps[j] = (0..4).map(|c| m[r][c] * v[c]).sum();
                }
            }
        }
    }

    fn apply(&mut self, g: &Gate, wire: impl Fn(u32) -> usize) -> Result<()> {
        match (g.kind(), g.qubits()) {
            (GateKind::Barrier, _) => {}
            (k, _) if !k.is_unitary() => {
                return Err(Error::Unsupported(format!("{k} cannot be simulated as a unitary")))
            }
            (_, &[q]) => self.apply1(&single_qubit_matrix(g).expect("unitary"), wire(q)),
            (_, &[a, b]) => self.apply2(&two_qubit_matrix(g).expect("unitary"), wire(a), wire(b)),
            _ => unreachable!(),
        }
        Ok(())
    }
}

/// `|⟨ψ_original | P† ψ_compiled⟩|²`, simulating from |0…0⟩. SWAPs in the
/// compiled circuit are applied as relabellings; unoccupied physical
/// qubits touched by other gates become extra wires that must return to
/// |0⟩.
pub fn statevector_equiv(original: &Circuit, cc: &CompiledCircuit) -> Result<f64> {
    let n = original.num_qubits as usize;
    if cc.initial_layout.num_logical() != n {
        return Err(Error::InvalidInput("layout and circuit disagree on qubit count".into()));
    }
    // Pass 1: assign wires so the simulation size is known up front.
    let mut p2w: Vec<Option<usize>> =
        (0..cc.initial_layout.num_physical() as u32).map(|p| cc.initial_layout.logical_at(p).map(|l| l as usize)).collect();
    let mut wires = n;
    let mut ops: Vec<(Gate, [usize; 2])> = Vec::new();
    for g in &cc.circuit.gates {
        match (g.kind(), g.qubits()) {
            (GateKind::Swap, &[a, b]) => p2w.swap(a as usize, b as usize),
            (GateKind::Barrier, _) => {}
            (_, qs) => {
                let mut w = [0usize; 2];
                for (k, &p) in qs.iter().enumerate() {
                    w[k] = *p2w[p as usize].get_or_insert_with(|| {
                        wires += 1;
                        wires - 1
                    });
                }
                ops.push((*g, w));
            }
        }
    }
    if n > MAX_STATEVECTOR_QUBITS || wires > MAX_STATEVECTOR_QUBITS {
        return Err(Error::Unsupported(format!(
            "{wires} active qubits exceed the statevector limit of {MAX_STATEVECTOR_QUBITS}"
        )));
    }
    let mut reference = State::zero(n);
    for g in &original.gates {
        reference.apply(g, |q| q as usize)?;
    }
    let mut compiled = State::zero(wires);
    for (g, w) in &ops {
        let qs = g.qubits().to_vec();
        compiled.apply(g, |q| if q == qs[0] { w[0] } else { w[1] })?;
    }
    // Extra wires occupy the high bits, so projecting them onto |0⟩ keeps
    // the first 2^n amplitudes.
    let overlap: Complex64 = reference
        .amps
        .iter()
        .zip(&compiled.amps[..1 << n])
        .map(|(a, b)| a.conj() * b)
        .sum();
    Ok(overlap.norm_sqr())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baseline::baseline_compile;
    use crate::bench::ghz;
    use crate::compiled::{Layout, Pipeline};
    use crate::device::generate_backend;

    fn wrap(circuit: Circuit, l2p: Vec<u32>, fin: Vec<u32>) -> CompiledCircuit {
        let n = circuit.num_qubits;
        CompiledCircuit {
            circuit,
            initial_layout: Layout::new(l2p, n).unwrap(),
            final_layout: Layout::new(fin, n).unwrap(),
            backend_id: "toy".into(),
            pipeline: Pipeline::Baseline,
            seed: 0,
        }
    }

    #[test]
    fn identity_compile_is_equivalent() {
        let c = ghz(3).unwrap();
        let cc = wrap(c.clone(), vec![0, 1, 2], vec![0, 1, 2]);
        assert!(permutation_equiv(&c, &cc));
        assert!((statevector_equiv(&c, &cc).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn swaps_fold_into_the_permutation() {
        let c = Circuit::with_gates("c", 2, vec![Gate::h(0), Gate::cx(0, 1)]).unwrap();
        let compiled = Circuit::with_gates(
            "c",
            3,
            vec![Gate::h(0), Gate::swap(0, 1), Gate::cx(1, 2)],
        )
        .unwrap();
        let cc = wrap(compiled, vec![0, 2], vec![1, 2]);
        assert!(permutation_equiv(&c, &cc));
        assert!((statevector_equiv(&c, &cc).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn deleting_a_swap_is_detected() {
        let b = generate_backend(2, 10, 4.0).unwrap();
        let c = ghz(20).unwrap();
        let mut cc = baseline_compile(&c, &b, 3).unwrap();
        assert!(permutation_equiv(&c, &cc), "{:?}", check_permutation_equiv(&c, &cc));
        let i = cc.circuit.gates.iter().position(|g| g.kind() == GateKind::Swap).unwrap();
        cc.circuit.gates.remove(i);
        assert!(!permutation_equiv(&c, &cc));
    }

    #[test]
    fn perturbed_angle_lowers_fidelity() {
        let c = Circuit::with_gates("c", 2, vec![Gate::h(0), Gate::rz(0.4, 0), Gate::cx(0, 1)])
            .unwrap();
        let mut bad = c.clone();
        bad.gates[1] = Gate::rz(0.5, 0);
        let cc = wrap(bad, vec![0, 1], vec![0, 1]);
        assert!(statevector_equiv(&c, &cc).unwrap() < 1.0 - 1e-4);
        assert!(!permutation_equiv(&c, &cc));
    }

    #[test]
    fn structural_diagnostics() {
        let b = generate_backend(2, 10, 4.0).unwrap();
        let (_, l) = b.inter_links().next().unwrap();
        let n = b.num_qubits();
        let bad = Circuit::with_gates("c", n, vec![Gate::cz(l.a, l.b)]).unwrap();
        let cc = wrap(bad, vec![0], vec![0]);
        assert_eq!(validate_compiled(&cc, &b).len(), 1);
        let far = Circuit::with_gates("c", n, vec![Gate::cz(0, 19)]).unwrap();
        assert_eq!(validate_compiled(&wrap(far, vec![0], vec![0]), &b).len(), 1);
    }

    #[test]
    fn measurement_is_not_simulated() {
        let c = Circuit::with_gates("c", 1, vec![Gate::measure(0)]).unwrap();
        let cc = wrap(c.clone(), vec![0], vec![0]);
        assert!(matches!(statevector_equiv(&c, &cc), Err(Error::Unsupported(_))));
        assert!(permutation_equiv(&c, &cc));
    }
}
