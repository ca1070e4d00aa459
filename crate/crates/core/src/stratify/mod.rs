//! First compilation stage: split the circuit into chiplet-sized
//! subcircuits and route the gates that still cross chiplets through
//! explicit boundary events.

mod allocate;
mod anneal;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::baseline::expand_logical_swaps;
use crate::circuit::{Circuit, Gate};
use crate::device::{chiplet_graph, Backend};
use crate::error::{Error, Result};

pub use allocate::{
    allocate_chiplets, allocate_chiplets_with, classify_swap, replay_events, AllocationConfig,
    BoundaryEvent, ChipletAllocation, RoutedOp, SwapClass, Tier,
};
pub use anneal::{anneal_partition, anneal_partition_report, partition_cost, AnnealingConfig, Partition};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StratifyConfig {
    pub annealing: AnnealingConfig,
    pub allocation: AllocationConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProgramOp {
    /// A gate on logical qubits, all resident on this chiplet.
    Gate(Gate),
    Boundary(u32),
}

/// The share of the routed circuit executed on one chiplet.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChipletProgram {
    pub chiplet: u32,
    /// Logical qubits resident before the first op, ascending.
    pub initial_qubits: Vec<u32>,
    pub ops: Vec<ProgramOp>,
}

impl ChipletProgram {
    pub fn boundary_ids(&self) -> impl Iterator<Item = u32> + '_ {
        self.ops.iter().filter_map(|op| match op {
            ProgramOp::Boundary(id) => Some(*id),
            ProgramOp::Gate(_) => None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StratifiedCircuit {
    pub name: String,
    pub num_qubits: u32,
    pub backend_id: String,
    pub num_chiplets: u32,
    pub qubits_per_chiplet: u32,
    /// Chiplet-graph edges the allocation relied on.
    pub chiplet_edges: Vec<(u32, u32)>,
    pub partition: Partition,
    pub allocation: ChipletAllocation,
    pub programs: Vec<ChipletProgram>,
    pub seed: u64,
}

impl StratifiedCircuit {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let st: StratifiedCircuit = serde_json::from_str(s)?;
        st.validate()?;
        Ok(st)
    }

    pub fn events(&self) -> &[BoundaryEvent] {
        &self.allocation.events
    }

    /// The logical circuit in routed order with boundary events removed.
    pub fn routed_circuit(&self) -> Circuit {
        let gates = self
            .allocation
            .routed
            .iter()
            .filter_map(|op| match op {
                RoutedOp::Gate(g) => Some(*g),
                RoutedOp::Boundary(_) => None,
            })
            .collect();
        Circuit { name: self.name.clone(), num_qubits: self.num_qubits, gates }
    }

    /// Whether `b` offers every chiplet and chiplet edge this
    /// stratification uses, at the same chiplet size.
    pub fn fits(&self, b: &Backend) -> Result<()> {
        if b.qubits_per_chiplet != self.qubits_per_chiplet {
            return Err(Error::InvalidBackend(format!(
                "stratified for {}-qubit chiplets, backend has {}",
                self.qubits_per_chiplet, b.qubits_per_chiplet
            )));
        }
        if (b.num_chiplets() as u32) < self.num_chiplets {
            return Err(Error::InvalidBackend(format!(
                "stratified for {} chiplets, backend has {}",
                self.num_chiplets,
                b.num_chiplets()
            )));
        }
        let cg = chiplet_graph(b);
        for &(x, y) in &self.chiplet_edges {
            if cg.links_between(x, y).is_empty() {
                return Err(Error::InvalidBackend(format!("backend lacks chiplet edge {x}-{y}")));
            }
        }
        Ok(())
    }

    /// Checks that programs and events agree: every event appears in both
    /// of its chiplets' programs, in the same relative order, and gates
    /// only touch resident qubits.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Stratification(m));
        self.partition.validate()?;
        if self.programs.len() != self.num_chiplets as usize {
            return bad(format!("{} programs for {} chiplets", self.programs.len(), self.num_chiplets));
        }
        for (i, e) in self.allocation.events.iter().enumerate() {
            if e.id as usize != i {
                return bad(format!("event ids must be dense and ordered, found {} at {i}", e.id));
            }
            let (x, y) = (e.chiplets[0].min(e.chiplets[1]), e.chiplets[0].max(e.chiplets[1]));
            if x == y || !self.chiplet_edges.contains(&(x, y)) {
                return bad(format!("event {i} is not on a chiplet edge"));
            }
        }
        let mut resident: Vec<Option<u32>> = vec![None; self.num_qubits as usize];
        for (c, prog) in self.programs.iter().enumerate() {
            if prog.chiplet != c as u32 {
                return bad(format!("program {c} is labelled chiplet {}", prog.chiplet));
            }
            if prog.initial_qubits.len() as u32 > self.qubits_per_chiplet {
                return bad(format!("chiplet {c} starts overfull"));
            }
            for &q in &prog.initial_qubits {
                match resident.get_mut(q as usize) {
                    Some(slot @ None) => *slot = Some(c as u32),
                    _ => return bad(format!("qubit {q} placed twice or out of range")),
                }
            }
        }
        if resident.iter().any(Option::is_none) {
            return bad("some logical qubit has no initial chiplet".into());
        }
        // Replay each program in lock step with the global event order.
        let mut cursor = vec![0usize; self.programs.len()];
        let events = &self.allocation.events;
        let mut step = |c: usize, upto: Option<u32>, resident: &mut Vec<Option<u32>>| -> Result<()> {
            let prog = &self.programs[c];
            while let Some(op) = prog.ops.get(cursor[c]) {
                match op {
                    ProgramOp::Gate(g) => {
                        for &q in g.qubits() {
                            if resident.get(q as usize).copied().flatten() != Some(c as u32) {
                                return Err(Error::Stratification(format!(
                                    "chiplet {c} runs {g} on non-resident qubit {q}"
                                )));
                            }
                        }
                    }
                    ProgramOp::Boundary(id) => {
                        if Some(*id) != upto {
                            return match upto {
                                Some(u) => Err(Error::Stratification(format!(
                                    "chiplet {c} reaches event {id} before {u}"
                                ))),
                                None => Err(Error::Stratification(format!(
                                    "chiplet {c} has unmatched event {id}"
                                ))),
                            };
                        }
                        cursor[c] += 1;
                        return Ok(());
                    }
                }
                cursor[c] += 1;
            }
            match upto {
                Some(u) => Err(Error::Stratification(format!("chiplet {c} is missing event {u}"))),
                None => Ok(()),
            }
        };
        for e in events {
            for &c in &e.chiplets {
                step(c as usize, Some(e.id), &mut resident)?;
            }
            for (k, q) in e.qubits.iter().enumerate() {
                if let Some(q) = q {
                    if resident[*q as usize] != Some(e.chiplets[k]) {
                        return bad(format!("event {} moves qubit {q} from the wrong chiplet", e.id));
                    }
                    resident[*q as usize] = Some(e.chiplets[1 - k]);
                }
            }
        }
        for c in 0..self.programs.len() {
            step(c, None, &mut resident)?;
        }
        Ok(())
    }
}

/// Splits the routed circuit into per-chiplet programs.
fn build_programs(
    num_chiplets: usize,
    initial: &[u32],
    alloc: &ChipletAllocation,
) -> Vec<ChipletProgram> {
    let mut programs: Vec<ChipletProgram> = (0..num_chiplets as u32)
        .map(|c| ChipletProgram {
            chiplet: c,
            initial_qubits: (0..initial.len() as u32).filter(|&q| initial[q as usize] == c).collect(),
            ops: Vec::new(),
        })
        .collect();
    let mut at = initial.to_vec();
    for op in &alloc.routed {
        match op {
            RoutedOp::Gate(g) => {
                programs[at[g.qubits()[0] as usize] as usize].ops.push(ProgramOp::Gate(*g));
            }
            RoutedOp::Boundary(id) => {
                let e = &alloc.events[*id as usize];
                for &c in &e.chiplets {
                    programs[c as usize].ops.push(ProgramOp::Boundary(*id));
                }
                at = replay_events(&at, std::slice::from_ref(e));
            }
        }
    }
    programs
}

pub fn stratify(c: &Circuit, b: &Backend, cfg: &StratifyConfig, seed: u64) -> Result<StratifiedCircuit> {
    if c.num_qubits == 0 {
        return Err(Error::InvalidInput("cannot stratify an empty register".into()));
    }
    if c.num_qubits > b.num_qubits() {
        return Err(Error::Capacity(format!(
            "circuit needs {} qubits, backend has {}",
            c.num_qubits,
            b.num_qubits()
        )));
    }
    let c = expand_logical_swaps(c);
    let capacity = b.qubits_per_chiplet;
    let k = c.num_qubits.div_ceil(capacity);
    let partition = anneal_partition(&c, k, capacity, &cfg.annealing, seed)?;
    let allocation = allocate_chiplets_with(&c, &partition, b, &cfg.allocation, seed)?;
    let initial = allocation.initial_chiplets(&partition);
    let programs = build_programs(b.num_chiplets(), &initial, &allocation);
    let used: BTreeSet<(u32, u32)> = allocation
        .events
        .iter()
        .map(|e| (e.chiplets[0].min(e.chiplets[1]), e.chiplets[0].max(e.chiplets[1])))
        .collect();
    let st = StratifiedCircuit {
        name: c.name.clone(),
        num_qubits: c.num_qubits,
        backend_id: b.name.clone(),
        num_chiplets: b.num_chiplets() as u32,
        qubits_per_chiplet: capacity,
        chiplet_edges: used.into_iter().collect(),
        partition,
        allocation,
        programs,
        seed,
    };
    st.validate()?;
    Ok(st)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::{bit_code, ghz};
    use crate::device::generate_backend;

    #[test]
    fn single_chiplet_has_no_events() {
        let b = generate_backend(1, 10, 4.0).unwrap();
        let st = stratify(&ghz(10).unwrap(), &b, &StratifyConfig::default(), 1).unwrap();
        assert!(st.events().is_empty());
        assert_eq!(st.programs[0].ops.len(), 10);
    }

    #[test]
    fn chain_with_a_spare_slot_crosses_once() {
        let b = generate_backend(2, 10, 4.0).unwrap();
        let c = ghz(19).unwrap();
        // The idle slot sits on the far side of the cut, so the last qubit of
        // the first block can simply move over.
        let p = Partition::new((0..19).map(|q| u32::from(q >= 10)).collect(), 2, 10).unwrap();
        let alloc = allocate_chiplets(&c, &p, &b, 2, 0).unwrap();
        assert_eq!(alloc.events.len(), 1);
        assert_eq!(alloc.events[0].qubits, [Some(9), None]);
        let st = stratify(&c, &b, &StratifyConfig::default(), 1).unwrap();
        assert_eq!(partition_cost(&c, &st.partition), 1);
        assert!(st.events().len() <= 2);
        for p in &st.programs {
            let ids: Vec<u32> = p.boundary_ids().collect();
            assert_eq!(ids, (0..st.events().len() as u32).collect::<Vec<_>>());
        }
    }

    #[test]
    fn full_chain_needs_two_crossings() {
        let b = generate_backend(2, 10, 4.0).unwrap();
        let st = stratify(&ghz(20).unwrap(), &b, &StratifyConfig::default(), 1).unwrap();
        assert_eq!(st.events().len(), 2);
    }

    #[test]
    fn json_round_trip_and_tamper_detection() {
        let b = generate_backend(3, 10, 4.0).unwrap();
        let st = stratify(&bit_code(30, 2).unwrap(), &b, &StratifyConfig::default(), 4).unwrap();
        let json = st.to_json().unwrap();
        assert_eq!(StratifiedCircuit::from_json(&json).unwrap(), st);
        if let Some(p) = st.programs.iter().position(|p| p.boundary_ids().next().is_some()) {
            let mut bad = st.clone();
            bad.programs[p].ops.retain(|op| !matches!(op, ProgramOp::Boundary(_)));
            assert!(bad.validate().is_err());
        }
    }
}
