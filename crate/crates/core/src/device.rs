//! Chiplet backends: heavy-hex tiles arranged on a grid, joined by SWAP-only
//! inter-chiplet links.
//!
//! Each chiplet holds `10·m` qubits cut from one global heavy-hex lattice.
//! Within a tile of `2m` rows, row `k` is a 4-qubit chain followed by one
//! bridge qubit hanging below column 0 (even `k`) or column 2 (odd `k`):
//!
//! ```text
//!  a0 - a1 - a2 - a3        local 0..3
//!  |                        bridge 4   (column 0)
//!  b0 - b1 - b2 - b3        local 5..8
//!            |              bridge 9   (column 2, crosses into the tile below)
//! ```
//!
//! Horizontal chains continue into the right-hand neighbour and the last
//! bridge lands on column 2 of the tile below, so the global lattice keeps
//! degree ≤ 3 with alternating degree-2/degree-3 chain sites.

use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::circuit::{Gate, GateKind};
use crate::error::{Error, Result};

pub const T1_S: f64 = 20e-6;
pub const T2_S: f64 = 30e-6;
pub const FREQ_HZ: f64 = 6e9;

pub const SINGLE_QUBIT_NS: f64 = 25.0;
pub const SINGLE_QUBIT_ERROR: f64 = 0.00109;
pub const CZ_NS: f64 = 34.0;
pub const CZ_ERROR: f64 = 0.00605;
pub const INTER_SWAP_NS: f64 = 702.4;
pub const INTER_SWAP_ERROR: f64 = 0.1023;
pub const RESET_NS: f64 = 500.0;
pub const RESET_ERROR: f64 = 0.00186;
pub const MEASURE_NS: f64 = 500.0;
pub const MEASURE_ERROR: f64 = 0.00196;

/// Inter-chiplet SWAPs cost this many intra-chiplet SWAPs in time and error.
pub const DEFAULT_INTER_PENALTY: f64 = 4.0;
/// An intra-chiplet SWAP is priced as a quarter of the inter-chiplet one.
pub const INTRA_SWAP_NS: f64 = INTER_SWAP_NS / DEFAULT_INTER_PENALTY;
pub const INTRA_SWAP_ERROR: f64 = INTER_SWAP_ERROR / DEFAULT_INTER_PENALTY;

pub const TILE_QUBITS: u32 = 10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QubitSpec {
    pub t1_s: f64,
    pub t2_s: f64,
    pub freq_hz: f64,
}

impl Default for QubitSpec {
    fn default() -> Self {
        QubitSpec { t1_s: T1_S, t2_s: T2_S, freq_hz: FREQ_HZ }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstructionSpec {
    pub duration_ns: f64,
    pub error: f64,
}

impl InstructionSpec {
    pub const fn new(duration_ns: f64, error: f64) -> Self {
        InstructionSpec { duration_ns, error }
    }
}

/// Uniform instruction table shared by every qubit and link.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Instructions {
    pub x: InstructionSpec,
    pub sx: InstructionSpec,
    pub rz: InstructionSpec,
    pub cz: InstructionSpec,
    pub swap_intra: InstructionSpec,
    pub swap_inter: InstructionSpec,
    pub measure: InstructionSpec,
    pub reset: InstructionSpec,
}

impl Instructions {
    pub fn table1(inter_penalty: f64) -> Self {
        Instructions {
            x: InstructionSpec::new(SINGLE_QUBIT_NS, SINGLE_QUBIT_ERROR),
            sx: InstructionSpec::new(SINGLE_QUBIT_NS, SINGLE_QUBIT_ERROR),
            rz: InstructionSpec::new(0.0, 0.0),
            cz: InstructionSpec::new(CZ_NS, CZ_ERROR),
            swap_intra: InstructionSpec::new(INTRA_SWAP_NS, INTRA_SWAP_ERROR),
            swap_inter: InstructionSpec::new(inter_penalty * INTRA_SWAP_NS, INTER_SWAP_ERROR),
            measure: InstructionSpec::new(MEASURE_NS, MEASURE_ERROR),
            reset: InstructionSpec::new(RESET_NS, RESET_ERROR),
        }
    }

    /// Native single-qubit instruction, if `kind` is one.
    pub fn single(&self, kind: GateKind) -> Option<InstructionSpec> {
        match kind {
            GateKind::X => Some(self.x),
            GateKind::Sx => Some(self.sx),
            GateKind::Rz => Some(self.rz),
            GateKind::Measure => Some(self.measure),
            GateKind::Reset => Some(self.reset),
            GateKind::Barrier => Some(InstructionSpec::new(0.0, 0.0)),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scope {
    Intra,
    Inter,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub a: u32,
    pub b: u32,
    pub scope: Scope,
    pub kinds: Vec<GateKind>,
    pub duration_ns: f64,
    pub error: f64,
}

impl Link {
    pub fn allows(&self, kind: GateKind) -> bool {
        self.kinds.contains(&kind)
    }

    pub fn other(&self, q: u32) -> u32 {
        if q == self.a {
            self.b
        } else {
            self.a
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Chiplet {
    pub id: u32,
    pub qubits: Vec<u32>,
    pub halo: Vec<u32>,
    pub grid_pos: [u32; 2],
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "BackendRepr", into = "BackendRepr")]
pub struct Backend {
    pub name: String,
    pub grid: [u32; 2],
    pub qubits_per_chiplet: u32,
    pub inter_penalty: f64,
    pub chiplets: Vec<Chiplet>,
    pub links: Vec<Link>,
    pub qubit_spec: QubitSpec,
    pub instructions: Instructions,
    num_qubits: u32,
    chiplet_of: Vec<u32>,
    adjacency: Vec<Vec<(u32, usize)>>,
    link_index: HashMap<(u32, u32), usize>,
}

#[derive(Serialize, Deserialize)]
struct BackendRepr {
    name: String,
    num_qubits: u32,
    grid: [u32; 2],
    qubits_per_chiplet: u32,
    inter_penalty: f64,
    chiplets: Vec<Chiplet>,
    links: Vec<Link>,
    qubit_spec: QubitSpec,
    instructions: Instructions,
}

impl From<Backend> for BackendRepr {
    fn from(b: Backend) -> Self {
        BackendRepr {
            name: b.name,
            num_qubits: b.num_qubits,
            grid: b.grid,
            qubits_per_chiplet: b.qubits_per_chiplet,
            inter_penalty: b.inter_penalty,
            chiplets: b.chiplets,
            links: b.links,
            qubit_spec: b.qubit_spec,
            instructions: b.instructions,
        }
    }
}

impl TryFrom<BackendRepr> for Backend {
    type Error = Error;

    fn try_from(r: BackendRepr) -> Result<Self> {
        let b = Backend::assemble(
            r.name,
            r.num_qubits,
            r.grid,
            r.qubits_per_chiplet,
            r.inter_penalty,
            r.chiplets,
            r.links,
            r.qubit_spec,
            r.instructions,
        )?;
        b.validate()?;
        Ok(b)
    }
}

impl PartialEq for Backend {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.num_qubits == other.num_qubits
            && self.grid == other.grid
            && self.chiplets == other.chiplets
            && self.links == other.links
            && self.qubit_spec == other.qubit_spec
            && self.instructions == other.instructions
    }
}

impl Backend {
    #[allow(clippy::too_many_arguments)]
    fn assemble(
        name: String,
        num_qubits: u32,
        grid: [u32; 2],
        qubits_per_chiplet: u32,
        inter_penalty: f64,
        chiplets: Vec<Chiplet>,
        links: Vec<Link>,
        qubit_spec: QubitSpec,
        instructions: Instructions,
    ) -> Result<Self> {
        let n = num_qubits as usize;
        let mut chiplet_of = vec![u32::MAX; n];
        for c in &chiplets {
            for &q in &c.qubits {
                let slot = chiplet_of.get_mut(q as usize).ok_or_else(|| {
                    Error::InvalidBackend(format!("chiplet {} lists qubit {q} out of range", c.id))
                })?;
                if *slot != u32::MAX {
                    return Err(Error::InvalidBackend(format!("qubit {q} belongs to two chiplets")));
                }
                *slot = c.id;
            }
        }
        if let Some(q) = chiplet_of.iter().position(|&c| c == u32::MAX) {
            return Err(Error::InvalidBackend(format!("qubit {q} is not in any chiplet")));
        }
        let mut adjacency = vec![Vec::new(); n];
        let mut link_index = HashMap::with_capacity(links.len());
        for (i, l) in links.iter().enumerate() {
            if l.a == l.b || l.a as usize >= n || l.b as usize >= n {
                return Err(Error::InvalidBackend(format!("malformed link {}-{}", l.a, l.b)));
            }
            if link_index.insert((l.a.min(l.b), l.a.max(l.b)), i).is_some() {
                return Err(Error::InvalidBackend(format!("duplicate link {}-{}", l.a, l.b)));
            }
            adjacency[l.a as usize].push((l.b, i));
            adjacency[l.b as usize].push((l.a, i));
        }
        for adj in &mut adjacency {
            adj.sort_unstable();
        }
        Ok(Backend {
            name,
            grid,
            qubits_per_chiplet,
            inter_penalty,
            chiplets,
            links,
            qubit_spec,
            instructions,
            num_qubits,
            chiplet_of,
            adjacency,
            link_index,
        })
    }

    pub fn num_qubits(&self) -> u32 {
        self.num_qubits
    }

    pub fn num_chiplets(&self) -> usize {
        self.chiplets.len()
    }

    pub fn chiplet_of(&self, q: u32) -> u32 {
        self.chiplet_of[q as usize]
    }

    pub fn link(&self, a: u32, b: u32) -> Option<&Link> {
        self.link_index_of(a, b).map(|i| &self.links[i])
    }

    pub fn link_index_of(&self, a: u32, b: u32) -> Option<usize> {
        self.link_index.get(&(a.min(b), a.max(b))).copied()
    }

    /// `(neighbour, link index)` pairs, sorted by neighbour.
    pub fn neighbors(&self, q: u32) -> &[(u32, usize)] {
        &self.adjacency[q as usize]
    }

    pub fn intra_neighbors(&self, q: u32) -> impl Iterator<Item = u32> + '_ {
        self.adjacency[q as usize]
            .iter()
            .filter(|&&(_, l)| self.links[l].scope == Scope::Intra)
            .map(|&(p, _)| p)
    }

    pub fn is_inter(&self, a: u32, b: u32) -> bool {
        self.link(a, b).is_some_and(|l| l.scope == Scope::Inter)
    }

    pub fn inter_links(&self) -> impl Iterator<Item = (usize, &Link)> {
        self.links.iter().enumerate().filter(|(_, l)| l.scope == Scope::Inter)
    }

    /// Duration and error of `g` on this device, or `None` if the device
    /// cannot execute it where it is placed.
    pub fn gate_spec(&self, g: &Gate) -> Option<InstructionSpec> {
        match g.qubits() {
            &[_] => self.instructions.single(g.kind()),
            &[a, b] => {
                let link = self.link(a, b)?;
                if !link.allows(g.kind()) {
                    return None;
                }
                match (link.scope, g.kind()) {
                    (Scope::Intra, GateKind::Swap) => Some(self.instructions.swap_intra),
                    _ => Some(InstructionSpec::new(link.duration_ns, link.error)),
                }
            }
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidBackend(m));
        let qs = &self.qubit_spec;
        if !(qs.t1_s > 0.0 && qs.t2_s > 0.0 && qs.freq_hz > 0.0) {
            return bad("qubit spec values must be positive".into());
        }
        if qs.t2_s > 2.0 * qs.t1_s {
            return bad(format!("T2 {} exceeds 2·T1 {}", qs.t2_s, 2.0 * qs.t1_s));
        }
        if self.instructions.rz != InstructionSpec::new(0.0, 0.0) {
            return bad("Rz must be a zero-duration, error-free frame change".into());
        }
        if self.chiplets.is_empty() {
            return bad("no chiplets".into());
        }
        for (i, c) in self.chiplets.iter().enumerate() {
            if c.id as usize != i {
                return bad(format!("chiplet ids must be dense; found {} at {i}", c.id));
            }
        }
        let mut inter_incident: Vec<BTreeSet<u32>> = vec![BTreeSet::new(); self.chiplets.len()];
        for l in &self.links {
            if !(0.0..1.0).contains(&l.error) || l.duration_ns < 0.0 {
                return bad(format!("link {}-{} has invalid error/duration", l.a, l.b));
            }
            let same = self.chiplet_of(l.a) == self.chiplet_of(l.b);
            match l.scope {
                Scope::Intra if !same => {
                    return bad(format!("intra link {}-{} crosses chiplets", l.a, l.b))
                }
                Scope::Inter if same => {
                    return bad(format!("inter link {}-{} inside one chiplet", l.a, l.b))
                }
                Scope::Inter if l.kinds != [GateKind::Swap] => {
                    return bad(format!("inter link {}-{} must allow exactly SWAP", l.a, l.b))
                }
                Scope::Intra if !l.allows(GateKind::Cz) => {
                    return bad(format!("intra link {}-{} must allow CZ", l.a, l.b))
                }
                _ => {}
            }
            if l.scope == Scope::Inter {
                inter_incident[self.chiplet_of(l.a) as usize].insert(l.a);
                inter_incident[self.chiplet_of(l.b) as usize].insert(l.b);
            }
        }
        for c in &self.chiplets {
            let halo: BTreeSet<u32> = c.halo.iter().copied().collect();
            if halo != inter_incident[c.id as usize] {
                return bad(format!("chiplet {} halo does not match its inter links", c.id));
            }
        }
        // Symmetric modules: every chiplet has the same local edge list.
        let local_edges = |c: &Chiplet| -> BTreeSet<(usize, usize)> {
            let pos: HashMap<u32, usize> =
                c.qubits.iter().enumerate().map(|(i, &q)| (q, i)).collect();
            self.links
                .iter()
                .filter(|l| l.scope == Scope::Intra && self.chiplet_of(l.a) == c.id)
                .map(|l| {
                    let (x, y) = (pos[&l.a], pos[&l.b]);
                    (x.min(y), x.max(y))
                })
                .collect()
        };
        let reference = local_edges(&self.chiplets[0]);
        for c in &self.chiplets[1..] {
            if c.qubits.len() != self.chiplets[0].qubits.len() || local_edges(c) != reference {
                return bad(format!("chiplet {} topology differs from chiplet 0", c.id));
            }
        }
        if !chiplet_graph(self).is_connected() {
            return Err(Error::Disconnected("chiplet adjacency graph".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Factor pair `(rows, cols)` of `c` with the smallest difference, rows ≤ cols.
pub fn most_square_grid(c: u32) -> (u32, u32) {
    assert!(c >= 1, "chiplet count must be positive");
    let mut best = (1, c);
    let mut r = 1;
    while r * r <= c {
        if c % r == 0 {
            best = (r, c / r);
        }
        r += 1;
    }
    best
}

fn tile_local(row: u32, col: u32) -> u32 {
    row * 5 + col
}

fn tile_bridge(row: u32) -> u32 {
    row * 5 + 4
}

fn bridge_col(row: u32) -> u32 {
    if row % 2 == 0 {
        0
    } else {
        2
    }
}

pub fn generate_backend(
    num_chiplets: u32,
    qubits_per_chiplet: u32,
    inter_penalty: f64,
) -> Result<Backend> {
    if num_chiplets == 0 {
        return Err(Error::InvalidInput("need at least one chiplet".into()));
    }
    if qubits_per_chiplet == 0 || qubits_per_chiplet % TILE_QUBITS != 0 {
        return Err(Error::InvalidInput(format!(
            "chiplet size {qubits_per_chiplet} is not a positive multiple of {TILE_QUBITS}"
        )));
    }
    if !(inter_penalty.is_finite() && inter_penalty > 0.0) {
        return Err(Error::InvalidInput("inter penalty must be positive".into()));
    }
    let (rows, cols) = most_square_grid(num_chiplets);
    let tile_rows = 2 * (qubits_per_chiplet / TILE_QUBITS);
    let global = |chiplet: u32, local: u32| chiplet * qubits_per_chiplet + local;
    let instructions = Instructions::table1(inter_penalty);

    let intra = |a: u32, b: u32| Link {
        a,
        b,
        scope: Scope::Intra,
        kinds: vec![GateKind::Cz, GateKind::Swap],
        duration_ns: CZ_NS,
        error: CZ_ERROR,
    };
    let inter = |a: u32, b: u32| Link {
        a,
        b,
        scope: Scope::Inter,
        kinds: vec![GateKind::Swap],
        duration_ns: instructions.swap_inter.duration_ns,
        error: instructions.swap_inter.error,
    };

    let mut links = Vec::new();
    for id in 0..num_chiplets {
        for k in 0..tile_rows {
            for c in 0..3 {
                links.push(intra(global(id, tile_local(k, c)), global(id, tile_local(k, c + 1))));
            }
            let bc = bridge_col(k);
            links.push(intra(global(id, tile_local(k, bc)), global(id, tile_bridge(k))));
            if k + 1 < tile_rows {
                links.push(intra(global(id, tile_bridge(k)), global(id, tile_local(k + 1, bc))));
            }
        }
    }
    for id in 0..num_chiplets {
        let (r, c) = (id / cols, id % cols);
        if c + 1 < cols {
            for k in 0..tile_rows {
                links.push(inter(global(id, tile_local(k, 3)), global(id + 1, tile_local(k, 0))));
            }
        }
        if r + 1 < rows {
            let last = tile_rows - 1;
            links.push(inter(
                global(id, tile_bridge(last)),
                global(id + cols, tile_local(0, bridge_col(last))),
            ));
        }
    }

    let mut halos: Vec<BTreeSet<u32>> = vec![BTreeSet::new(); num_chiplets as usize];
    for l in links.iter().filter(|l| l.scope == Scope::Inter) {
        halos[(l.a / qubits_per_chiplet) as usize].insert(l.a);
        halos[(l.b / qubits_per_chiplet) as usize].insert(l.b);
    }
    let chiplets = (0..num_chiplets)
        .map(|id| Chiplet {
            id,
            qubits: (0..qubits_per_chiplet).map(|l| global(id, l)).collect(),
            halo: halos[id as usize].iter().copied().collect(),
            grid_pos: [id / cols, id % cols],
        })
        .collect();

    let b = Backend::assemble(
        format!("heavyhex-{rows}x{cols}-q{qubits_per_chiplet}"),
        num_chiplets * qubits_per_chiplet,
        [rows, cols],
        qubits_per_chiplet,
        inter_penalty,
        chiplets,
        links,
        QubitSpec::default(),
        instructions,
    )?;
    b.validate()?;
    Ok(b)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Weighting {
    Hops,
    Fidelity,
}

/// Dense all-pairs shortest-path costs over some node set.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceMatrix {
    pub weighting: Weighting,
    n: usize,
    d: Vec<f64>,
}

impl DistanceMatrix {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, a: u32, b: u32) -> f64 {
        self.d[a as usize * self.n + b as usize]
    }

    /// Shortest paths from weighted adjacency lists (`(neighbour, weight)`).
    pub fn from_adjacency(weighting: Weighting, adj: &[Vec<(u32, f64)>]) -> Result<Self> {
        let n = adj.len();
        let mut d = vec![f64::INFINITY; n * n];
        for src in 0..n {
            let row = &mut d[src * n..(src + 1) * n];
            dijkstra(adj, src, row);
            if let Some(t) = row.iter().position(|x| x.is_infinite()) {
                return Err(Error::Disconnected(format!("no path from {src} to {t}")));
            }
        }
        Ok(DistanceMatrix { weighting, n, d })
    }
}

#[derive(PartialEq)]
struct HeapItem(f64, usize);

impl Eq for HeapItem {}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

fn dijkstra(adj: &[Vec<(u32, f64)>], src: usize, dist: &mut [f64]) {
    dist[src] = 0.0;
    let mut heap = BinaryHeap::from([HeapItem(0.0, src)]);
    while let Some(HeapItem(du, u)) = heap.pop() {
        if du > dist[u] {
            continue;
        }
        for &(v, w) in &adj[u] {
            let nd = du + w;
            if nd < dist[v as usize] {
                dist[v as usize] = nd;
                heap.push(HeapItem(nd, v as usize));
            }
        }
    }
}

/// Additive cost of a link: `-ln(1 - error)`.
pub fn fidelity_weight(error: f64) -> f64 {
    -(1.0 - error).ln()
}

pub(crate) fn link_weight(link: &Link, w: Weighting) -> f64 {
    match w {
        Weighting::Hops => 1.0,
        Weighting::Fidelity => fidelity_weight(link.error),
    }
}

pub fn distance_matrix(b: &Backend, w: Weighting) -> Result<DistanceMatrix> {
    let adj: Vec<Vec<(u32, f64)>> = (0..b.num_qubits())
        .map(|q| b.neighbors(q).iter().map(|&(p, l)| (p, link_weight(&b.links[l], w))).collect())
        .collect();
    DistanceMatrix::from_adjacency(w, &adj)
}

/// Chiplet-level connectivity with the inter links realising each edge.
#[derive(Clone, Debug, PartialEq)]
pub struct ChipletGraph {
    pub num_chiplets: usize,
    /// `(min, max)` chiplet pair → inter link indices, in link order.
    pub edges: BTreeMap<(u32, u32), Vec<usize>>,
    adjacency: Vec<Vec<u32>>,
}

impl ChipletGraph {
    pub fn neighbors(&self, c: u32) -> &[u32] {
        &self.adjacency[c as usize]
    }

    pub fn links_between(&self, a: u32, b: u32) -> &[usize] {
        self.edges.get(&(a.min(b), a.max(b))).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn is_connected(&self) -> bool {
        self.hop_distances().iter().all(|row| row.iter().all(|&d| d != u32::MAX))
    }

    /// BFS hop counts; `u32::MAX` marks unreachable pairs.
    pub fn hop_distances(&self) -> Vec<Vec<u32>> {
        (0..self.num_chiplets)
            .map(|src| {
                let mut dist = vec![u32::MAX; self.num_chiplets];
                dist[src] = 0;
                let mut queue = VecDeque::from([src as u32]);
                while let Some(u) = queue.pop_front() {
                    for &v in &self.adjacency[u as usize] {
                        if dist[v as usize] == u32::MAX {
                            dist[v as usize] = dist[u as usize] + 1;
                            queue.push_back(v);
                        }
                    }
                }
                dist
            })
            .collect()
    }
}

pub fn chiplet_graph(b: &Backend) -> ChipletGraph {
    let mut edges: BTreeMap<(u32, u32), Vec<usize>> = BTreeMap::new();
    for (i, l) in b.inter_links() {
        let (x, y) = (b.chiplet_of(l.a), b.chiplet_of(l.b));
        edges.entry((x.min(y), x.max(y))).or_default().push(i);
    }
    let mut adjacency = vec![Vec::new(); b.num_chiplets()];
    for &(x, y) in edges.keys() {
        adjacency[x as usize].push(y);
        adjacency[y as usize].push(x);
    }
    for a in &mut adjacency {
        a.sort_unstable();
    }
    ChipletGraph { num_chiplets: b.num_chiplets(), edges, adjacency }
}
