//! Local gate-level optimization: self-inverse cancellation, Rz merging and
//! Euler resynthesis of single-qubit runs, iterated to a fixpoint.
//!
//! Nothing moves across Measure, Reset, Barrier, fenced operations or
//! SWAPs on pinned links.

use std::collections::BTreeSet;

use crate::circuit::{Circuit, Gate, GateKind};
use crate::unitary::{is_zero_angle, normalize_angle, run_unitary, synthesize_1q};

#[derive(Clone, Debug, Default)]
pub struct OptimizeOptions {
    /// `(min, max)` pairs whose SWAPs are immutable.
    pub pinned_links: BTreeSet<(u32, u32)>,
}

impl OptimizeOptions {
    fn is_pinned(&self, g: &Gate) -> bool {
        match g.qubits() {
            &[a, b] => g.kind() == GateKind::Swap && self.pinned_links.contains(&(a.min(b), a.max(b))),
            _ => false,
        }
    }
}

/// A gate, or an opaque operation that the optimizer must not touch or
/// reorder anything across.
#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Op {
    Gate(Gate),
    Fence { qubit: u32, tag: u32 },
}

impl Op {
    fn qubits(&self) -> &[u32] {
        match self {
            Op::Gate(g) => g.qubits(),
            Op::Fence { qubit, .. } => std::slice::from_ref(qubit),
        }
    }
}

pub fn optimize(c: &Circuit) -> Circuit {
    optimize_with(c, &OptimizeOptions::default())
}

pub fn optimize_with(c: &Circuit, opts: &OptimizeOptions) -> Circuit {
    let ops = c.gates.iter().copied().map(Op::Gate).collect();
    let gates = optimize_ops(ops, c.num_qubits, opts)
        .into_iter()
        .map(|op| match op {
            Op::Gate(g) => g,
            Op::Fence { .. } => unreachable!("no fences in a plain circuit"),
        })
        .collect();
    Circuit { name: c.name.clone(), num_qubits: c.num_qubits, gates }
}

pub(crate) fn optimize_ops(mut ops: Vec<Op>, num_qubits: u32, opts: &OptimizeOptions) -> Vec<Op> {
    loop {
        let (next, a) = cancel_and_merge(ops, num_qubits, opts);
        let (next, b) = consolidate_runs(next, num_qubits);
        ops = next;
        if !a && !b {
            return ops;
        }
    }
}

fn is_run_gate(op: &Op) -> bool {
    matches!(op, Op::Gate(g) if g.qubits().len() == 1 && g.kind().is_unitary())
}

fn cancel_and_merge(ops: Vec<Op>, num_qubits: u32, opts: &OptimizeOptions) -> (Vec<Op>, bool) {
    let mut out: Vec<Option<Op>> = Vec::with_capacity(ops.len());
    let mut stacks: Vec<Vec<usize>> = vec![Vec::new(); num_qubits as usize];
    let mut changed = false;

    let top = |stacks: &Vec<Vec<usize>>, q: u32| stacks[q as usize].last().copied();

    for op in ops {
        if let Op::Gate(g) = op {
            match g.qubits() {
                &[q] => {
                    if g.kind() == GateKind::Rz && is_zero_angle(g.param().unwrap()) {
                        changed = true;
                        continue;
                    }
                    if let Some(k) = top(&stacks, q) {
                        if let Some(Op::Gate(prev)) = out[k] {
                            match (prev.kind(), g.kind()) {
                                (GateKind::X, GateKind::X) => {
                                    out[k] = None;
                                    stacks[q as usize].pop();
                                    changed = true;
                                    continue;
                                }
                                (GateKind::Rz, GateKind::Rz) => {
                                    let sum = prev.param().unwrap() + g.param().unwrap();
                                    if is_zero_angle(sum) {
                                        out[k] = None;
                                        stacks[q as usize].pop();
                                    } else {
                                        out[k] = Some(Op::Gate(prev.with_param(normalize_angle(sum))));
                                    }
                                    changed = true;
                                    continue;
                                }
                                _ => {}
                            }
                        }
                    }
                }
                &[a, b] => {
                    let (ta, tb) = (top(&stacks, a), top(&stacks, b));
                    if let (Some(k), true) = (ta, ta == tb) {
                        if let Some(Op::Gate(prev)) = out[k] {
                            let same_pair = match g.kind() {
                                GateKind::Cz | GateKind::Swap => true,
                                GateKind::Cx => prev.qubits() == g.qubits(),
                                _ => false,
                            };
                            if same_pair
                                && prev.kind() == g.kind()
                                && !opts.is_pinned(&g)
                                && !opts.is_pinned(&prev)
                            {
                                out[k] = None;
                                stacks[a as usize].pop();
                                stacks[b as usize].pop();
                                changed = true;
                                continue;
                            }
                        }
                    }
                }
                _ => {}
            }
        }
        let idx = out.len();
        for &q in op.qubits() {
            stacks[q as usize].push(idx);
        }
        out.push(Some(op));
    }
    (out.into_iter().flatten().collect(), changed)
}

fn consolidate_runs(ops: Vec<Op>, num_qubits: u32) -> (Vec<Op>, bool) {
    // Replacement gates keyed by the index of the run's first gate.
    let mut replace: Vec<Option<Vec<Gate>>> = vec![None; ops.len()];
    let mut drop = vec![false; ops.len()];
    let mut runs: Vec<Vec<usize>> = vec![Vec::new(); num_qubits as usize];
    let mut changed = false;

    let mut flush = |run: &mut Vec<usize>, ops: &[Op]| {
        if run.len() >= 2 {
            let gates = run.iter().map(|&i| match &ops[i] {
                Op::Gate(g) => g,
                Op::Fence { .. } => unreachable!(),
            });
            let m = run_unitary(gates).expect("run holds unitary one-qubit gates");
            let q = ops[run[0]].qubits()[0];
            let seq = synthesize_1q(&m, q);
            if seq.len() < run.len() {
                replace[run[0]] = Some(seq);
                for &i in run.iter() {
                    drop[i] = true;
                }
                changed = true;
            }
        }
        run.clear();
    };

    for (i, op) in ops.iter().enumerate() {
        if is_run_gate(op) {
            runs[op.qubits()[0] as usize].push(i);
        } else {
            for &q in op.qubits() {
                flush(&mut runs[q as usize], &ops);
            }
        }
    }
    for run in runs.iter_mut() {
        flush(run, &ops);
    }
    if !changed {
        return (ops, false);
    }
    let mut out = Vec::with_capacity(ops.len());
    for (i, op) in ops.into_iter().enumerate() {
        if let Some(seq) = replace[i].take() {
            out.extend(seq.into_iter().map(Op::Gate));
        }
        if !drop[i] {
            out.push(op);
        }
    }
    (out, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::gate_count;

    fn circ(n: u32, gates: Vec<Gate>) -> Circuit {
        Circuit::with_gates("t", n, gates).unwrap()
    }

    #[test]
    fn self_inverse_pairs_cancel() {
        assert!(optimize(&circ(1, vec![Gate::x(0), Gate::x(0)])).is_empty());
        assert!(optimize(&circ(2, vec![Gate::cz(0, 1), Gate::cz(1, 0)])).is_empty());
        assert!(optimize(&circ(2, vec![Gate::swap(0, 1), Gate::swap(0, 1)])).is_empty());
        let kept = optimize(&circ(2, vec![Gate::cx(0, 1), Gate::cx(1, 0)]));
        assert_eq!(kept.len(), 2);
    }

    #[test]
    fn rz_merge_and_elimination() {
        let c = optimize(&circ(1, vec![Gate::rz(0.3, 0), Gate::rz(0.5, 0)]));
        assert_eq!(c.len(), 1);
        assert!((c.gates[0].param().unwrap() - 0.8).abs() < 1e-12);
        assert!(optimize(&circ(1, vec![Gate::rz(0.0, 0)])).is_empty());
        assert!(optimize(&circ(1, vec![Gate::rz(1.0, 0), Gate::rz(-1.0, 0)])).is_empty());
        assert!(optimize(&circ(1, vec![Gate::rz(std::f64::consts::TAU, 0)])).is_empty());
    }

    #[test]
    fn pinned_swaps_are_immutable() {
        let mut opts = OptimizeOptions::default();
        opts.pinned_links.insert((3, 7));
        let c = circ(8, vec![Gate::swap(3, 7), Gate::swap(7, 3)]);
        assert_eq!(optimize_with(&c, &opts).len(), 2);
    }

    #[test]
    fn boundaries_block_cancellation() {
        for k in [Gate::measure(0), Gate::reset(0), Gate::barrier(0)] {
            let c = circ(1, vec![Gate::x(0), k, Gate::x(0)]);
            assert_eq!(optimize(&c).len(), 3, "crossed {k}");
        }
        let ops = vec![
            Op::Gate(Gate::x(0)),
            Op::Fence { qubit: 0, tag: 1 },
            Op::Gate(Gate::x(0)),
        ];
        assert_eq!(optimize_ops(ops, 1, &OptimizeOptions::default()).len(), 3);
    }

    #[test]
    fn runs_are_resynthesized() {
        // Rz·SX·Rz·SX with an H in disguise collapses to ≤ 3 gates.
        let c = circ(
            1,
            vec![Gate::sx(0), Gate::sx(0), Gate::rz(0.2, 0), Gate::sx(0), Gate::sx(0)],
        );
        let o = optimize(&c);
        assert!(o.len() < c.len());
        let before = run_unitary(&c.gates).unwrap();
        let after = run_unitary(&o.gates).unwrap();
        assert!(crate::unitary::equal_up_to_phase2(&before, &after, 1e-10));
    }

    #[test]
    fn cancellation_exposed_by_earlier_removal() {
        // X(1) cancels, then the CZ pair becomes adjacent.
        let c = circ(2, vec![Gate::cz(0, 1), Gate::x(1), Gate::x(1), Gate::cz(0, 1)]);
        assert!(optimize(&c).is_empty());
        assert_eq!(gate_count(&c), 4);
    }
}
