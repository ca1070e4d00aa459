//! SABRE-style search shared by the baseline router, chiplet-local routing
//! and the layout passes.
//!
//! The engine is generic over what "executable" means for a node: two wires
//! adjacent, a wire sitting on a fixed physical node, or a physical node
//! being vacant. Wires are caller-defined ids; physical ids index the
//! [`Topology`].

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::compiled::Layout;
use crate::device::{link_weight, Backend, DistanceMatrix, Weighting};
use crate::error::{Error, Result};

pub(crate) type Wire = u32;
pub(crate) type Phys = u32;

/// Tunables of the swap-selection heuristic.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SabreConfig {
    pub extended_set_size: usize,
    pub lookahead_weight: f64,
    pub decay_increment: f64,
    /// Decay values reset after this many consecutive swaps.
    pub decay_reset: usize,
}

impl Default for SabreConfig {
    fn default() -> Self {
        SabreConfig {
            extended_set_size: 20,
            lookahead_weight: 0.5,
            decay_increment: 0.001,
            decay_reset: 5,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum Need {
    /// Executes as soon as its predecessors have.
    Free(Wire),
    Adjacent(Wire, Wire),
    /// The wire must sit exactly on the given physical node.
    At(Wire, Phys),
    /// The physical node must be unoccupied.
    Vacant(Phys),
}

#[derive(Clone, Debug)]
pub(crate) struct Node {
    pub need: Need,
    /// Ordering keys: nodes sharing a key execute in list order.
    pub keys: Vec<u32>,
    /// After execution the occupant of `.0` is replaced by `.1`.
    pub handoff: Option<(Phys, Option<Wire>)>,
}

impl Node {
    pub fn free(w: Wire) -> Self {
        Node { need: Need::Free(w), keys: vec![w], handoff: None }
    }

    pub fn adjacent(a: Wire, b: Wire) -> Self {
        Node { need: Need::Adjacent(a, b), keys: vec![a, b], handoff: None }
    }
}

/// One node per gate; wires are the circuit's qubits.
pub(crate) fn circuit_nodes(c: &Circuit) -> Vec<Node> {
    c.gates
        .iter()
        .map(|g| match *g.qubits() {
            [a, b] => Node::adjacent(a, b),
            [q] => Node::free(q),
            _ => unreachable!("gates have one or two qubits"),
        })
        .collect()
}

pub(crate) struct Topology {
    adj: Vec<Vec<(Phys, f64)>>,
    pub dist: DistanceMatrix,
    edges: HashSet<(Phys, Phys)>,
}

impl Topology {
    pub fn new(adj: Vec<Vec<(Phys, f64)>>, weighting: Weighting) -> Result<Self> {
        let dist = DistanceMatrix::from_adjacency(weighting, &adj)?;
        Ok(Self::with_distances(adj, dist))
    }

    pub fn with_distances(adj: Vec<Vec<(Phys, f64)>>, dist: DistanceMatrix) -> Self {
        assert_eq!(adj.len(), dist.len());
        let edges = adj
            .iter()
            .enumerate()
            .flat_map(|(a, ns)| ns.iter().map(move |&(b, _)| (a as u32, b)))
            .collect();
        Topology { adj, dist, edges }
    }

    /// Every link of `b`, weighted per `dist`.
    pub fn for_backend(b: &Backend, dist: &DistanceMatrix) -> Self {
        let adj = (0..b.num_qubits())
            .map(|q| {
                b.neighbors(q)
                    .iter()
                    .map(|&(p, l)| (p, link_weight(&b.links[l], dist.weighting)))
                    .collect()
            })
            .collect();
        Self::with_distances(adj, dist.clone())
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn adjacent(&self, a: Phys, b: Phys) -> bool {
        self.edges.contains(&(a, b))
    }

    pub fn neighbors(&self, p: Phys) -> &[(Phys, f64)] {
        &self.adj[p as usize]
    }

    fn edge_weight(&self, a: Phys, b: Phys) -> f64 {
        self.adj[a as usize].iter().find(|&&(r, _)| r == b).map(|&(_, w)| w).unwrap_or(f64::INFINITY)
    }

    /// Shortest path `from → to`, both ends included; lowest-index neighbour
    /// on ties.
    pub fn path(&self, from: Phys, to: Phys) -> Result<Vec<Phys>> {
        if self.dist.get(from, to).is_infinite() {
            return Err(Error::Disconnected(format!("no path from {from} to {to}")));
        }
        let mut path = vec![from];
        let mut cur = from;
        while cur != to {
            let next = self.adj[cur as usize]
                .iter()
                .map(|&(r, w)| (w + self.dist.get(r, to), r))
                .min_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)))
                .map(|(_, r)| r)
                .ok_or_else(|| Error::Disconnected(format!("{cur} has no neighbours")))?;
            path.push(next);
            cur = next;
        }
        Ok(path)
    }
}

/// Wire ↔ physical occupancy; either side may be empty.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Placement {
    w2p: Vec<Option<Phys>>,
    p2w: Vec<Option<Wire>>,
}

impl Placement {
    pub fn empty(num_wires: usize, num_phys: usize) -> Self {
        Placement { w2p: vec![None; num_wires], p2w: vec![None; num_phys] }
    }

    pub fn place(&mut self, w: Wire, p: Phys) {
        debug_assert!(self.p2w[p as usize].is_none(), "physical {p} already occupied");
        if let Some(old) = self.w2p[w as usize] {
            self.p2w[old as usize] = None;
        }
        self.w2p[w as usize] = Some(p);
        self.p2w[p as usize] = Some(w);
    }

    pub fn pos(&self, w: Wire) -> Option<Phys> {
        self.w2p[w as usize]
    }

    pub fn at(&self, p: Phys) -> Option<Wire> {
        self.p2w[p as usize]
    }

    pub fn num_phys(&self) -> usize {
        self.p2w.len()
    }

    pub fn swap(&mut self, a: Phys, b: Phys) {
        let (wa, wb) = (self.p2w[a as usize], self.p2w[b as usize]);
        self.p2w[a as usize] = wb;
        self.p2w[b as usize] = wa;
        if let Some(w) = wa {
            self.w2p[w as usize] = Some(b);
        }
        if let Some(w) = wb {
            self.w2p[w as usize] = Some(a);
        }
    }

    pub(crate) fn replace_at(&mut self, p: Phys, incoming: Option<Wire>) {
        if let Some(out) = self.p2w[p as usize].take() {
            self.w2p[out as usize] = None;
        }
        if let Some(w) = incoming {
            if let Some(old) = self.w2p[w as usize] {
                self.p2w[old as usize] = None;
            }
            self.w2p[w as usize] = Some(p);
            self.p2w[p as usize] = Some(w);
        }
    }

    pub fn vacancies(&self) -> impl Iterator<Item = Phys> + '_ {
        self.p2w.iter().enumerate().filter(|(_, w)| w.is_none()).map(|(p, _)| p as Phys)
    }
}

impl Placement {
    pub fn from_layout(l: &Layout) -> Self {
        let mut p = Placement::empty(l.num_logical(), l.num_physical());
        for (w, &q) in l.as_slice().iter().enumerate() {
            p.place(w as Wire, q);
        }
        p
    }

    /// Panics if some wire is unplaced.
    pub fn to_layout(&self) -> Layout {
        let l2p = self.w2p.iter().map(|p| p.expect("every wire placed")).collect();
        Layout::new(l2p, self.p2w.len() as u32).expect("placement is injective")
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum Step {
    /// Node executed; `phys` holds the physical location of each wire of
    /// its need (or the target node for `At`/`Vacant`).
    Exec { node: usize, phys: [Phys; 2] },
    Swap(Phys, Phys),
}

pub(crate) struct Routed {
    pub steps: Vec<Step>,
    pub placement: Placement,
    pub swaps: usize,
    pub swap_cost: f64,
}

struct Dag {
    succs: Vec<Vec<usize>>,
    indeg: Vec<usize>,
}

fn build_dag(nodes: &[Node]) -> Dag {
    let mut succs = vec![Vec::new(); nodes.len()];
    let mut indeg = vec![0; nodes.len()];
    let mut last: HashMap<u32, usize> = HashMap::new();
    for (i, n) in nodes.iter().enumerate() {
        let mut preds: Vec<usize> = n.keys.iter().filter_map(|k| last.get(k).copied()).collect();
        preds.sort_unstable();
        preds.dedup();
        for p in preds {
            succs[p].push(i);
            indeg[i] += 1;
        }
        for &k in &n.keys {
            last.insert(k, i);
        }
    }
    Dag { succs, indeg }
}

struct Router<'a, R> {
    nodes: &'a [Node],
    topo: &'a Topology,
    cfg: &'a SabreConfig,
    rng: &'a mut R,
    place: Placement,
    dag: Dag,
    front: BTreeSet<usize>,
    steps: Vec<Step>,
    decay: Vec<f64>,
    swaps: usize,
    swap_cost: f64,
}

impl<R: Rng> Router<'_, R> {
    fn nearest_vacancy(&self, h: Phys) -> Option<Phys> {
        self.place
            .vacancies()
            .map(|p| (self.topo.dist.get(p, h), p))
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
            .map(|(_, p)| p)
    }

    fn pos(&self, w: Wire) -> Phys {
        self.place.pos(w).unwrap_or_else(|| panic!("wire {w} is not placed"))
    }

    fn placed(&self, need: Need) -> bool {
        match need {
            Need::Free(w) | Need::At(w, _) => self.place.pos(w).is_some(),
            Need::Adjacent(a, b) => self.place.pos(a).is_some() && self.place.pos(b).is_some(),
            Need::Vacant(_) => true,
        }
    }

    fn satisfied(&self, need: Need) -> bool {
        match need {
            Need::Free(_) => true,
            Need::Adjacent(a, b) => self.topo.adjacent(self.pos(a), self.pos(b)),
            Need::At(w, h) => self.pos(w) == h,
            Need::Vacant(h) => self.place.at(h).is_none(),
        }
    }

    fn cost(&self, need: Need) -> f64 {
        match need {
            Need::Free(_) => 0.0,
            Need::Adjacent(a, b) => self.topo.dist.get(self.pos(a), self.pos(b)),
            Need::At(w, h) => self.topo.dist.get(self.pos(w), h),
            Need::Vacant(h) => match self.place.at(h) {
                None => 0.0,
                Some(_) => self
                    .place
                    .vacancies()
                    .map(|p| self.topo.dist.get(p, h))
                    .fold(f64::INFINITY, f64::min),
            },
        }
    }

    fn execute(&mut self, i: usize) {
        let node = &self.nodes[i];
        let phys = match node.need {
            Need::Free(w) => [self.pos(w), Phys::MAX],
            Need::Adjacent(a, b) => [self.pos(a), self.pos(b)],
            Need::At(_, h) | Need::Vacant(h) => [h, Phys::MAX],
        };
        self.steps.push(Step::Exec { node: i, phys });
        if let Some((p, incoming)) = node.handoff {
            self.place.replace_at(p, incoming);
        }
        self.front.remove(&i);
        for &s in &self.dag.succs[i] {
            self.dag.indeg[s] -= 1;
            if self.dag.indeg[s] == 0 {
                self.front.insert(s);
            }
        }
    }

    /// Runs every executable front node until none is left. Returns whether
    /// anything ran.
    fn drain(&mut self) -> bool {
        let mut any = false;
        loop {
            let ready: Vec<usize> =
                self.front.iter().copied().filter(|&i| self.satisfied(self.nodes[i].need)).collect();
            if ready.is_empty() {
                return any;
            }
            any = true;
            for i in ready {
                // A handoff may invalidate a later node's readiness.
                if self.satisfied(self.nodes[i].need) {
                    self.execute(i);
                }
            }
        }
    }

    fn extended_set(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut seen: HashSet<usize> = self.front.iter().copied().collect();
        let mut queue: VecDeque<usize> = self.front.iter().copied().collect();
        while let Some(i) = queue.pop_front() {
            for &s in &self.dag.succs[i] {
                if seen.insert(s) {
                    if !matches!(self.nodes[s].need, Need::Free(_)) {
                        out.push(s);
                        if out.len() >= self.cfg.extended_set_size {
                            return out;
                        }
                    }
                    queue.push_back(s);
                }
            }
        }
        out
    }

    fn candidates(&self) -> Vec<(Phys, Phys)> {
        let mut hot = BTreeSet::new();
        for &i in &self.front {
            match self.nodes[i].need {
                Need::Free(_) => {}
                Need::Adjacent(a, b) => {
                    hot.insert(self.pos(a));
                    hot.insert(self.pos(b));
                }
                Need::At(w, _) => {
                    hot.insert(self.pos(w));
                }
                Need::Vacant(h) => {
                    hot.insert(h);
                    if let Some(v) = self.nearest_vacancy(h) {
                        hot.insert(v);
                    }
                }
            }
        }
        let mut cands = BTreeSet::new();
        for &p in &hot {
            for &(r, _) in self.topo.neighbors(p) {
                if self.place.at(p).is_some() || self.place.at(r).is_some() {
                    cands.insert((p.min(r), p.max(r)));
                }
            }
        }
        cands.into_iter().collect()
    }

    fn apply_swap(&mut self, a: Phys, b: Phys) {
        self.place.swap(a, b);
        self.steps.push(Step::Swap(a, b));
        self.swaps += 1;
        self.swap_cost += self.topo.edge_weight(a, b);
    }

    fn choose_swap(&mut self) -> Option<(Phys, Phys)> {
        let front: Vec<Need> = self
            .front
            .iter()
            .map(|&i| self.nodes[i].need)
            .filter(|n| !matches!(n, Need::Free(_)))
            .collect();
        // Wires that are elsewhere until a later handoff carry no lookahead.
        let ext: Vec<Need> = self
            .extended_set()
            .into_iter()
            .map(|i| self.nodes[i].need)
            .filter(|&n| self.placed(n))
            .collect();
        let cands = self.candidates();
        let mut best = f64::INFINITY;
        let mut ties: Vec<(Phys, Phys)> = Vec::new();
        for &(a, b) in &cands {
            self.place.swap(a, b);
            let f: f64 = front.iter().map(|&n| self.cost(n)).sum::<f64>() / front.len().max(1) as f64;
            let e: f64 = if ext.is_empty() {
                0.0
            } else {
                ext.iter().map(|&n| self.cost(n)).sum::<f64>() / ext.len() as f64
            };
            self.place.swap(a, b);
            let decay = self.decay[a as usize].max(self.decay[b as usize]);
            let h = decay * (f + self.cfg.lookahead_weight * e);
            if h < best - 1e-12 {
                best = h;
                ties.clear();
                ties.push((a, b));
            } else if (h - best).abs() <= 1e-12 {
                ties.push((a, b));
            }
        }
        ties.choose(self.rng).copied()
    }

    /// Moves the lowest-index blocked front node into place along a
    /// shortest path, then runs it.
    fn release(&mut self) -> Result<()> {
        let i = *self
            .front
            .iter()
            .find(|&&i| !self.satisfied(self.nodes[i].need))
            .expect("release called with nothing blocked");
        match self.nodes[i].need {
            Need::Adjacent(a, b) => {
                let path = self.topo.path(self.pos(a), self.pos(b))?;
                for w in path[..path.len() - 1].windows(2) {
                    if !self.topo.adjacent(self.pos(a), self.pos(b)) {
                        self.apply_swap(w[0], w[1]);
                    }
                }
            }
            Need::At(w, h) => {
                let path = self.topo.path(self.pos(w), h)?;
                for s in path.windows(2) {
                    self.apply_swap(s[0], s[1]);
                }
            }
            Need::Vacant(h) => {
                let v = self.nearest_vacancy(h).ok_or_else(|| {
                    Error::Capacity(format!("no vacant qubit can be moved to {h}"))
                })?;
                let path = self.topo.path(v, h)?;
                for s in path.windows(2) {
                    self.apply_swap(s[0], s[1]);
                }
            }
            Need::Free(_) => unreachable!(),
        }
        Ok(())
    }

    fn run(mut self) -> Result<Routed> {
        let release_after = 3 * self.topo.len() + 20;
        let mut stalled = 0usize;
        let mut since_reset = 0usize;
        loop {
            if self.drain() {
                stalled = 0;
                since_reset = 0;
                self.decay.iter_mut().for_each(|d| *d = 1.0);
            }
            if self.front.is_empty() {
                break;
            }
            if stalled >= release_after {
                self.release()?;
                stalled = 0;
                continue;
            }
            let Some((a, b)) = self.choose_swap() else {
                self.release()?;
                continue;
            };
            self.apply_swap(a, b);
            stalled += 1;
            since_reset += 1;
            if since_reset >= self.cfg.decay_reset {
                since_reset = 0;
                self.decay.iter_mut().for_each(|d| *d = 1.0);
            } else {
                self.decay[a as usize] += self.cfg.decay_increment;
                self.decay[b as usize] += self.cfg.decay_increment;
            }
        }
        Ok(Routed { steps: self.steps, placement: self.place, swaps: self.swaps, swap_cost: self.swap_cost })
    }
}

pub(crate) fn route(
    nodes: &[Node],
    topo: &Topology,
    init: Placement,
    cfg: &SabreConfig,
    rng: &mut impl Rng,
) -> Result<Routed> {
    assert_eq!(init.num_phys(), topo.len());
    let dag = build_dag(nodes);
    let front = (0..nodes.len()).filter(|&i| dag.indeg[i] == 0).collect();
    let router = Router {
        nodes,
        topo,
        cfg,
        rng,
        place: init,
        dag,
        front,
        steps: Vec::new(),
        decay: vec![1.0; topo.len()],
        swaps: 0,
        swap_cost: 0.0,
    };
    router.run()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum LayoutScore {
    SwapCount,
    SwapCost,
}

/// Forward/backward SABRE layout refinement over `trials` random starts.
/// Nodes must use only `Free`/`Adjacent` needs.
pub(crate) fn sabre_layout(
    nodes: &[Node],
    num_wires: usize,
    topo: &Topology,
    trials: usize,
    seed: u64,
    cfg: &SabreConfig,
    score: LayoutScore,
) -> Result<(Placement, Vec<f64>)> {
    if num_wires > topo.len() {
        return Err(Error::Capacity(format!(
            "{num_wires} wires do not fit on {} physical qubits",
            topo.len()
        )));
    }
    let reversed: Vec<Node> = nodes.iter().rev().cloned().collect();
    let mut best: Option<(f64, Placement)> = None;
    let mut scores = Vec::with_capacity(trials);
    for t in 0..trials.max(1) {
        let mut rng = crate::rng::chacha(seed, t as u64);
        let mut phys: Vec<Phys> = (0..topo.len() as Phys).collect();
        phys.shuffle(&mut rng);
        let mut init = Placement::empty(num_wires, topo.len());
        for w in 0..num_wires {
            init.place(w as Wire, phys[w]);
        }
        let fwd = route(nodes, topo, init, cfg, &mut rng)?;
        let back = route(&reversed, topo, fwd.placement, cfg, &mut rng)?;
        let candidate = back.placement;
        let check = route(nodes, topo, candidate.clone(), cfg, &mut rng)?;
        let s = match score {
            LayoutScore::SwapCount => check.swaps as f64,
            LayoutScore::SwapCost => check.swap_cost,
        };
        scores.push(s);
        if best.as_ref().map_or(true, |(b, _)| s < *b) {
            best = Some((s, candidate));
        }
    }
    Ok((best.expect("at least one trial").1, scores))
}
