//! Chiplet allocation: subcircuits are placed on chiplets, then cross-chiplet
//! gates are resolved by exchanging logical qubits across chiplet-graph
//! edges, with exchanges ranked by how they affect the current front layer.

use std::collections::{BTreeSet, HashSet, VecDeque};

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate};
use crate::device::{chiplet_graph, Backend, ChipletGraph};
use crate::error::{Error, Result};

use super::anneal::Partition;

/// Ranking of a chiplet-level exchange by its effect on the front layer,
/// best first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tier {
    /// Two or more front gates move closer, none move apart.
    Symbiotic,
    /// Exactly one front gate moves closer, none move apart.
    Commensalistic,
    /// No front gate changes distance.
    Neutral,
    /// At least one front gate moves apart.
    Parasitic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SwapClass {
    pub tier: Tier,
    /// Total chiplet-hop reduction over the front gates.
    pub net_gain: i64,
    pub improved: usize,
    pub harmed: usize,
}

/// Classifies moving each `(qubit, destination chiplet)` in `moves` at once,
/// judged by the hop distance between the operand chiplets of each front
/// gate.
pub fn classify_swap(
    moves: &[(u32, u32)],
    front: &[(u32, u32)],
    chiplet_of: &[u32],
    hops: &[Vec<u32>],
) -> SwapClass {
    let at = |q: u32| {
        moves.iter().find(|&&(m, _)| m == q).map_or(chiplet_of[q as usize], |&(_, c)| c)
    };
    let (mut improved, mut harmed, mut net_gain) = (0, 0, 0i64);
    for &(a, b) in front {
        let old = hops[chiplet_of[a as usize] as usize][chiplet_of[b as usize] as usize] as i64;
        let new = hops[at(a) as usize][at(b) as usize] as i64;
        net_gain += old - new;
        if new < old {
            improved += 1;
        } else if new > old {
            harmed += 1;
        }
    }
    let tier = match (improved, harmed) {
        (_, h) if h > 0 => Tier::Parasitic,
        (0, _) => Tier::Neutral,
        (1, _) => Tier::Commensalistic,
        _ => Tier::Symbiotic,
    };
    SwapClass { tier, net_gain, improved, harmed }
}

/// One inter-chiplet SWAP shared by two chiplet programs. `qubits[0]`
/// leaves `chiplets[0]` for `chiplets[1]` and `qubits[1]` travels the
/// other way; `None` is an idle slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryEvent {
    pub id: u32,
    pub chiplets: [u32; 2],
    pub qubits: [Option<u32>; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RoutedOp {
    Gate(Gate),
    Boundary(u32),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChipletAllocation {
    pub subcircuit_to_chiplet: Vec<u32>,
    pub events: Vec<BoundaryEvent>,
    /// The logical circuit in execution order, interleaved with events.
    pub routed: Vec<RoutedOp>,
    /// Selections made by the stall rule or the shortest-path fallback.
    pub forced: usize,
}

impl ChipletAllocation {
    /// Chiplet of every logical qubit before any event.
    pub fn initial_chiplets(&self, p: &Partition) -> Vec<u32> {
        p.assignment.iter().map(|&s| self.subcircuit_to_chiplet[s as usize]).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AllocationConfig {
    pub trials: usize,
    pub extended_set_size: usize,
}

impl Default for AllocationConfig {
    fn default() -> Self {
        AllocationConfig { trials: 8, extended_set_size: 20 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Candidate {
    /// Move into an idle slot of the chiplet.
    Move(u32, u32),
    Exchange(u32, u32),
}

struct Allocator<'a> {
    c: &'a Circuit,
    cg: &'a ChipletGraph,
    hops: &'a [Vec<u32>],
    capacity: u32,
    ext_size: usize,
    chiplet_of: Vec<u32>,
    members: Vec<BTreeSet<u32>>,
    succs: Vec<Vec<usize>>,
    indeg: Vec<usize>,
    front: BTreeSet<usize>,
    routed: Vec<RoutedOp>,
    events: Vec<BoundaryEvent>,
    forced: usize,
}

impl<'a> Allocator<'a> {
    fn new(
        c: &'a Circuit,
        cg: &'a ChipletGraph,
        hops: &'a [Vec<u32>],
        capacity: u32,
        ext_size: usize,
        chiplet_of: Vec<u32>,
    ) -> Self {
        let mut members = vec![BTreeSet::new(); cg.num_chiplets];
        for (q, &ch) in chiplet_of.iter().enumerate() {
            members[ch as usize].insert(q as u32);
        }
        let n = c.gates.len();
        let mut succs = vec![Vec::new(); n];
        let mut indeg = vec![0; n];
        let mut last: Vec<Option<usize>> = vec![None; c.num_qubits as usize];
        for (i, g) in c.gates.iter().enumerate() {
            let mut preds: Vec<usize> = g.qubits().iter().filter_map(|&q| last[q as usize]).collect();
            preds.dedup();
            for p in preds {
                succs[p].push(i);
                indeg[i] += 1;
            }
            for &q in g.qubits() {
                last[q as usize] = Some(i);
            }
        }
        let front = (0..n).filter(|&i| indeg[i] == 0).collect();
        Allocator {
            c,
            cg,
            hops,
            capacity,
            ext_size,
            chiplet_of,
            members,
            succs,
            indeg,
            front,
            routed: Vec::new(),
            events: Vec::new(),
            forced: 0,
        }
    }

    fn pair(&self, i: usize) -> Option<(u32, u32)> {
        match *self.c.gates[i].qubits() {
            [a, b] => Some((a, b)),
            _ => None,
        }
    }

    fn local(&self, i: usize) -> bool {
        self.pair(i).map_or(true, |(a, b)| self.chiplet_of[a as usize] == self.chiplet_of[b as usize])
    }

    fn drain(&mut self) -> bool {
        let mut any = false;
        loop {
            let ready: Vec<usize> = self.front.iter().copied().filter(|&i| self.local(i)).collect();
            if ready.is_empty() {
                return any;
            }
            any = true;
            for i in ready {
                self.front.remove(&i);
                self.routed.push(RoutedOp::Gate(self.c.gates[i]));
                for k in 0..self.succs[i].len() {
                    let s = self.succs[i][k];
                    self.indeg[s] -= 1;
                    if self.indeg[s] == 0 {
                        self.front.insert(s);
                    }
                }
            }
        }
    }

    fn extended(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::new();
        let mut seen: HashSet<usize> = self.front.iter().copied().collect();
        let mut queue: VecDeque<usize> = self.front.iter().copied().collect();
        while let Some(i) = queue.pop_front() {
            for &s in &self.succs[i] {
                if seen.insert(s) {
                    if let Some(p) = self.pair(s) {
                        out.push(p);
                        if out.len() >= self.ext_size {
                            return out;
                        }
                    }
                    queue.push_back(s);
                }
            }
        }
        out
    }

    fn candidates(&self, front: &[(u32, u32)]) -> Vec<Candidate> {
        let mut out = Vec::new();
        let mut seen = HashSet::new();
        for &(a, b) in front {
            for u in [a, b] {
                let cu = self.chiplet_of[u as usize];
                for &cn in self.cg.neighbors(cu) {
                    if (self.members[cn as usize].len() as u32) < self.capacity
                        && seen.insert(Candidate::Move(u, cn))
                    {
                        out.push(Candidate::Move(u, cn));
                    }
                    for &v in &self.members[cn as usize] {
                        let key = Candidate::Exchange(u.min(v), u.max(v));
                        if seen.insert(key) {
                            out.push(Candidate::Exchange(u, v));
                        }
                    }
                }
            }
        }
        out
    }

    fn moves(&self, cand: Candidate) -> Vec<(u32, u32)> {
        match cand {
            Candidate::Move(u, cn) => vec![(u, cn)],
            Candidate::Exchange(u, v) => {
                vec![(u, self.chiplet_of[v as usize]), (v, self.chiplet_of[u as usize])]
            }
        }
    }

    fn apply(&mut self, cand: Candidate) {
        let (u, from, to, v) = match cand {
            Candidate::Move(u, cn) => (u, self.chiplet_of[u as usize], cn, None),
            Candidate::Exchange(u, v) => {
                (u, self.chiplet_of[u as usize], self.chiplet_of[v as usize], Some(v))
            }
        };
        debug_assert!(self.cg.neighbors(from).contains(&to));
        self.members[from as usize].remove(&u);
        self.members[to as usize].insert(u);
        self.chiplet_of[u as usize] = to;
        if let Some(v) = v {
            self.members[to as usize].remove(&v);
            self.members[from as usize].insert(v);
            self.chiplet_of[v as usize] = from;
        }
        let id = self.events.len() as u32;
        self.events.push(BoundaryEvent { id, chiplets: [from, to], qubits: [Some(u), v] });
        self.routed.push(RoutedOp::Boundary(id));
    }

    /// BFS path between chiplets, preferring lower-index neighbours.
    fn chiplet_path(&self, from: u32, to: u32) -> Vec<u32> {
        let mut prev = vec![u32::MAX; self.cg.num_chiplets];
        prev[from as usize] = from;
        let mut queue = VecDeque::from([from]);
        while let Some(x) = queue.pop_front() {
            if x == to {
                break;
            }
            for &y in self.cg.neighbors(x) {
                if prev[y as usize] == u32::MAX {
                    prev[y as usize] = x;
                    queue.push_back(y);
                }
            }
        }
        let mut path = vec![to];
        while *path.last().unwrap() != from {
            path.push(prev[*path.last().unwrap() as usize]);
        }
        path.reverse();
        path
    }

    /// Walks the first operand of the lowest blocked front gate to its
    /// partner's chiplet.
    fn release(&mut self) {
        let i = *self.front.iter().find(|&&i| !self.local(i)).expect("a blocked gate");
        let (a, b) = self.pair(i).unwrap();
        let path = self.chiplet_path(self.chiplet_of[a as usize], self.chiplet_of[b as usize]);
        for &cn in &path[1..] {
            let cand = if (self.members[cn as usize].len() as u32) < self.capacity {
                Candidate::Move(a, cn)
            } else {
                let v = *self.members[cn as usize].iter().find(|&&v| v != b).expect("capacity ≥ 2");
                Candidate::Exchange(a, v)
            };
            self.apply(cand);
            self.forced += 1;
        }
    }

    fn run(mut self) -> (Vec<u32>, Vec<BoundaryEvent>, Vec<RoutedOp>, usize) {
        let chiplets = self.cg.num_chiplets;
        let stall_bound = 3 * chiplets;
        let release_bound = 10 * chiplets + 10;
        let mut no_improve = 0;
        let mut since_exec = 0;
        loop {
            if self.drain() {
                since_exec = 0;
            }
            if self.front.is_empty() {
                break;
            }
            if since_exec >= release_bound {
                self.release();
                since_exec = 0;
                no_improve = 0;
                continue;
            }
            let front: Vec<(u32, u32)> = self.front.iter().filter_map(|&i| self.pair(i)).collect();
            let ext = self.extended();
            let cands = self.candidates(&front);
            let scored: Vec<(SwapClass, i64)> = cands
                .iter()
                .map(|&cand| {
                    let moves = self.moves(cand);
                    let class = classify_swap(&moves, &front, &self.chiplet_of, self.hops);
                    let look = classify_swap(&moves, &ext, &self.chiplet_of, self.hops);
                    (class, -look.net_gain)
                })
                .collect();
            let pick = if no_improve >= stall_bound {
                no_improve = 0;
                self.forced += 1;
                (0..cands.len()).min_by_key(|&k| (-scored[k].0.net_gain, k))
            } else {
                (0..cands.len()).min_by_key(|&k| (scored[k].0.tier, -scored[k].0.net_gain, scored[k].1, k))
            };
            let Some(k) = pick else {
                self.release();
                continue;
            };
            if scored[k].0.improved == 0 {
                no_improve += 1;
            } else {
                no_improve = 0;
            }
            self.apply(cands[k]);
            since_exec += 1;
        }
        (self.chiplet_of, self.events, self.routed, self.forced)
    }
}

pub fn allocate_chiplets(
    c: &Circuit,
    p: &Partition,
    b: &Backend,
    trials: usize,
    seed: u64,
) -> Result<ChipletAllocation> {
    allocate_chiplets_with(c, p, b, &AllocationConfig { trials, ..AllocationConfig::default() }, seed)
}

pub fn allocate_chiplets_with(
    c: &Circuit,
    p: &Partition,
    b: &Backend,
    cfg: &AllocationConfig,
    seed: u64,
) -> Result<ChipletAllocation> {
    if p.assignment.len() != c.num_qubits as usize {
        return Err(Error::InvalidInput("partition does not cover the circuit".into()));
    }
    let chiplets = b.num_chiplets();
    if p.num_subcircuits as usize > chiplets {
        return Err(Error::Capacity(format!(
            "{} subcircuits for {chiplets} chiplets",
            p.num_subcircuits
        )));
    }
    if p.capacity > b.qubits_per_chiplet {
        return Err(Error::Capacity(format!(
            "subcircuit capacity {} exceeds chiplet size {}",
            p.capacity, b.qubits_per_chiplet
        )));
    }
    let cg = chiplet_graph(b);
    if !cg.is_connected() {
        return Err(Error::Disconnected("chiplet graph is disconnected".into()));
    }
    let hops = cg.hop_distances();
    let trials = cfg.trials.max(1);
    let results: Vec<ChipletAllocation> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = crate::rng::chacha(seed, 0xA110C000 + t);
            let mut order: Vec<u32> = (0..chiplets as u32).collect();
            order.shuffle(&mut rng);
            let sub_to_chip = order[..p.num_subcircuits as usize].to_vec();
            let chiplet_of = p.assignment.iter().map(|&s| sub_to_chip[s as usize]).collect();
            let alloc = Allocator::new(c, &cg, &hops, b.qubits_per_chiplet, cfg.extended_set_size, chiplet_of);
            let (_, events, routed, forced) = alloc.run();
            ChipletAllocation { subcircuit_to_chiplet: sub_to_chip, events, routed, forced }
        })
        .collect();
    Ok(results
        .into_iter()
        .enumerate()
        .min_by_key(|(i, a)| (a.events.len(), *i))
        .map(|(_, a)| a)
        .expect("at least one trial"))
}

/// Chiplet of each logical qubit after replaying `events` from `start`.
pub fn replay_events(start: &[u32], events: &[BoundaryEvent]) -> Vec<u32> {
    let mut at = start.to_vec();
    for e in events {
        if let Some(q) = e.qubits[0] {
            at[q as usize] = e.chiplets[1];
        }
        if let Some(q) = e.qubits[1] {
            at[q as usize] = e.chiplets[0];
        }
    }
    at
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_hops(n: usize) -> Vec<Vec<u32>> {
        (0..n).map(|i| (0..n).map(|j| (i as i64 - j as i64).unsigned_abs() as u32).collect()).collect()
    }

    #[test]
    fn tiers() {
        let hops = line_hops(3);
        // Qubits 0,1 on chiplet 0; 2,3 on chiplet 1; 4 on chiplet 2.
        let chip = [0, 0, 1, 1, 2];
        // Moving qubit 0 to chiplet 1 completes gate (0,2) only.
        let c = classify_swap(&[(0, 1)], &[(0, 2)], &chip, &hops);
        assert_eq!(c.tier, Tier::Commensalistic);
        // Exchanging 1 and 2 helps both (1,3) and (2,0).
        let c = classify_swap(&[(1, 1), (2, 0)], &[(1, 3), (2, 0)], &chip, &hops);
        assert_eq!(c.tier, Tier::Symbiotic);
        assert_eq!(c.net_gain, 2);
        // Moving 2 to chiplet 2 helps (2,4) but separates (3,2).
        let c = classify_swap(&[(2, 2)], &[(2, 4), (3, 2)], &chip, &hops);
        assert_eq!(c.tier, Tier::Parasitic);
        let c = classify_swap(&[(1, 0)], &[(2, 3)], &chip, &hops);
        assert_eq!(c.tier, Tier::Neutral);
    }

    #[test]
    fn replay_follows_events() {
        let e = [
            BoundaryEvent { id: 0, chiplets: [0, 1], qubits: [Some(0), Some(2)] },
            BoundaryEvent { id: 1, chiplets: [1, 2], qubits: [Some(0), None] },
        ];
        assert_eq!(replay_events(&[0, 0, 1], &e), vec![2, 0, 0]);
    }
}
