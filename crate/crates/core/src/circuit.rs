//! Framework-free circuit IR plus the dependency and interaction views.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Angles closer than this are considered equal.
pub const ANGLE_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateKind {
    #[serde(alias = "X")]
    X,
    #[serde(alias = "SX")]
    Sx,
    #[serde(alias = "Rz", alias = "RZ")]
    Rz,
    #[serde(alias = "H")]
    H,
    #[serde(alias = "CX", alias = "cnot")]
    Cx,
    #[serde(alias = "CZ")]
    Cz,
    #[serde(alias = "SWAP")]
    Swap,
    #[serde(alias = "Ry", alias = "RY")]
    Ry,
    #[serde(alias = "Rzz", alias = "RZZ")]
    Rzz,
    #[serde(alias = "Measure")]
    Measure,
    #[serde(alias = "Reset")]
    Reset,
    #[serde(alias = "Barrier")]
    Barrier,
}

impl GateKind {
    pub const ALL: [GateKind; 12] = [
        GateKind::X,
        GateKind::Sx,
        GateKind::Rz,
        GateKind::H,
        GateKind::Cx,
        GateKind::Cz,
        GateKind::Swap,
        GateKind::Ry,
        GateKind::Rzz,
        GateKind::Measure,
        GateKind::Reset,
        GateKind::Barrier,
    ];

    pub fn arity(self) -> usize {
        match self {
            GateKind::Cx | GateKind::Cz | GateKind::Swap | GateKind::Rzz => 2,
            _ => 1,
        }
    }

    pub fn has_param(self) -> bool {
        matches!(self, GateKind::Rz | GateKind::Ry | GateKind::Rzz)
    }

    /// False for Measure, Reset and Barrier.
    pub fn is_unitary(self) -> bool {
        !matches!(self, GateKind::Measure | GateKind::Reset | GateKind::Barrier)
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::X => "x",
            GateKind::Sx => "sx",
            GateKind::Rz => "rz",
            GateKind::H => "h",
            GateKind::Cx => "cx",
            GateKind::Cz => "cz",
            GateKind::Swap => "swap",
            GateKind::Ry => "ry",
            GateKind::Rzz => "rzz",
            GateKind::Measure => "measure",
            GateKind::Reset => "reset",
            GateKind::Barrier => "barrier",
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A single instruction. Two-qubit operands are stored in order; the second
/// slot is unused for one-qubit kinds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GateRepr", into = "GateRepr")]
pub struct Gate {
    kind: GateKind,
    q: [u32; 2],
    param: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct GateRepr {
    kind: GateKind,
    qubits: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    param: Option<f64>,
}

impl TryFrom<GateRepr> for Gate {
    type Error = Error;

    fn try_from(r: GateRepr) -> Result<Self> {
        Gate::new(r.kind, &r.qubits, r.param)
    }
}

impl From<Gate> for GateRepr {
    fn from(g: Gate) -> Self {
        GateRepr { kind: g.kind, qubits: g.qubits().to_vec(), param: g.param }
    }
}

impl Gate {
    pub fn new(kind: GateKind, qubits: &[u32], param: Option<f64>) -> Result<Self> {
        if qubits.len() != kind.arity() {
            return Err(Error::InvalidCircuit(format!(
                "{kind} expects {} qubit(s), got {}",
                kind.arity(),
                qubits.len()
            )));
        }
        if qubits.len() == 2 && qubits[0] == qubits[1] {
            return Err(Error::InvalidCircuit(format!("{kind} on duplicate qubit {}", qubits[0])));
        }
        match (kind.has_param(), param) {
            (true, None) => {
                return Err(Error::InvalidCircuit(format!("{kind} requires an angle")));
            }
            (false, Some(_)) => {
                return Err(Error::InvalidCircuit(format!("{kind} takes no angle")));
            }
            (true, Some(p)) if !p.is_finite() => {
                return Err(Error::InvalidCircuit(format!("{kind} angle is not finite")));
            }
            _ => {}
        }
        let q = if qubits.len() == 2 { [qubits[0], qubits[1]] } else { [qubits[0], u32::MAX] };
        Ok(Gate { kind, q, param })
    }

    fn one(kind: GateKind, q: u32, param: Option<f64>) -> Self {
        Gate { kind, q: [q, u32::MAX], param }
    }

    fn two(kind: GateKind, a: u32, b: u32, param: Option<f64>) -> Self {
        assert_ne!(a, b, "{kind} on duplicate qubit");
        Gate { kind, q: [a, b], param }
    }

    pub fn x(q: u32) -> Self {
        Self::one(GateKind::X, q, None)
    }
    pub fn sx(q: u32) -> Self {
        Self::one(GateKind::Sx, q, None)
    }
    pub fn rz(theta: f64, q: u32) -> Self {
        Self::one(GateKind::Rz, q, Some(theta))
    }
    pub fn ry(theta: f64, q: u32) -> Self {
        Self::one(GateKind::Ry, q, Some(theta))
    }
    pub fn h(q: u32) -> Self {
        Self::one(GateKind::H, q, None)
    }
    pub fn measure(q: u32) -> Self {
        Self::one(GateKind::Measure, q, None)
    }
    pub fn reset(q: u32) -> Self {
        Self::one(GateKind::Reset, q, None)
    }
    pub fn barrier(q: u32) -> Self {
        Self::one(GateKind::Barrier, q, None)
    }
    pub fn cx(control: u32, target: u32) -> Self {
        Self::two(GateKind::Cx, control, target, None)
    }
    pub fn cz(a: u32, b: u32) -> Self {
        Self::two(GateKind::Cz, a, b, None)
    }
    pub fn swap(a: u32, b: u32) -> Self {
        Self::two(GateKind::Swap, a, b, None)
    }
    pub fn rzz(theta: f64, a: u32, b: u32) -> Self {
        Self::two(GateKind::Rzz, a, b, Some(theta))
    }

    pub fn kind(&self) -> GateKind {
        self.kind
    }

    pub fn qubits(&self) -> &[u32] {
        &self.q[..self.kind.arity()]
    }

    pub fn param(&self) -> Option<f64> {
        self.param
    }

    pub fn is_two_qubit(&self) -> bool {
        self.kind.arity() == 2
    }

    /// Same gate acting on relabelled qubits.
    pub fn remap(&self, mut f: impl FnMut(u32) -> u32) -> Gate {
        let mut g = *self;
        g.q[0] = f(g.q[0]);
        if self.is_two_qubit() {
            g.q[1] = f(g.q[1]);
            assert_ne!(g.q[0], g.q[1], "remap collapsed a two-qubit gate");
        }
        g
    }

    pub(crate) fn with_param(&self, param: f64) -> Gate {
        debug_assert!(self.kind.has_param());
        Gate { param: Some(param), ..*self }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind)?;
        if let Some(p) = self.param {
            write!(f, "({p:.6})")?;
        }
        let qs: Vec<String> = self.qubits().iter().map(|q| q.to_string()).collect();
        write!(f, " {}", qs.join(","))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CircuitRepr")]
pub struct Circuit {
    pub name: String,
    pub num_qubits: u32,
    pub gates: Vec<Gate>,
}

#[derive(Deserialize)]
struct CircuitRepr {
    name: String,
    num_qubits: u32,
    gates: Vec<Gate>,
}

impl TryFrom<CircuitRepr> for Circuit {
    type Error = Error;

    fn try_from(r: CircuitRepr) -> Result<Self> {
        let c = Circuit { name: r.name, num_qubits: r.num_qubits, gates: r.gates };
        c.validate()?;
        Ok(c)
    }
}

impl Circuit {
    pub fn new(name: impl Into<String>, num_qubits: u32) -> Self {
        Circuit { name: name.into(), num_qubits, gates: Vec::new() }
    }

    pub fn with_gates(name: impl Into<String>, num_qubits: u32, gates: Vec<Gate>) -> Result<Self> {
        let c = Circuit { name: name.into(), num_qubits, gates };
        c.validate()?;
        Ok(c)
    }

    /// Appends a gate. Panics if an operand is out of range.
    pub fn push(&mut self, g: Gate) {
        for &q in g.qubits() {
            assert!(q < self.num_qubits, "qubit {q} out of range for {} qubits", self.num_qubits);
        }
        self.gates.push(g);
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_qubits == 0 {
            return Err(Error::InvalidCircuit("circuit has no qubits".into()));
        }
        for (i, g) in self.gates.iter().enumerate() {
            if let Some(&q) = g.qubits().iter().find(|&&q| q >= self.num_qubits) {
                return Err(Error::InvalidCircuit(format!(
                    "gate {i} ({g}) addresses qubit {q} but the circuit has {} qubits",
                    self.num_qubits
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn two_qubit_gates(&self) -> impl Iterator<Item = &Gate> {
        self.gates.iter().filter(|g| g.is_two_qubit())
    }

    /// Gates in reverse order; used for SABRE's backward sweep.
    pub fn reversed(&self) -> Circuit {
        let mut gates = self.gates.clone();
        gates.reverse();
        Circuit { name: format!("{}_rev", self.name), num_qubits: self.num_qubits, gates }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// Per-qubit gate subsequences, by gate index.
    pub fn wires(&self) -> Vec<Vec<usize>> {
        let mut w = vec![Vec::new(); self.num_qubits as usize];
        for (i, g) in self.gates.iter().enumerate() {
            for &q in g.qubits() {
                w[q as usize].push(i);
            }
        }
        w
    }
}

/// Precedence DAG over gate occurrences.
#[derive(Clone, Debug, Default)]
pub struct DependencyGraph {
    preds: Vec<Vec<usize>>,
    succs: Vec<Vec<usize>>,
}

impl DependencyGraph {
    pub fn node_count(&self) -> usize {
        self.preds.len()
    }

    pub fn edge_count(&self) -> usize {
        self.succs.iter().map(Vec::len).sum()
    }

    pub fn preds(&self, node: usize) -> &[usize] {
        &self.preds[node]
    }

    pub fn succs(&self, node: usize) -> &[usize] {
        &self.succs[node]
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.succs.iter().enumerate().flat_map(|(a, s)| s.iter().map(move |&b| (a, b)))
    }

    /// Kahn's algorithm, lowest index first.
    pub fn topological_order(&self) -> Vec<usize> {
        use std::cmp::Reverse;
        use std::collections::BinaryHeap;
        let mut indeg: Vec<usize> = self.preds.iter().map(Vec::len).collect();
        let mut ready: BinaryHeap<Reverse<usize>> =
            (0..indeg.len()).filter(|&i| indeg[i] == 0).map(Reverse).collect();
        let mut order = Vec::with_capacity(indeg.len());
        while let Some(Reverse(n)) = ready.pop() {
            order.push(n);
            for &s in &self.succs[n] {
                indeg[s] -= 1;
                if indeg[s] == 0 {
                    ready.push(Reverse(s));
                }
            }
        }
        order
    }
}

pub fn build_dependency_graph(c: &Circuit) -> DependencyGraph {
    let n = c.gates.len();
    let mut preds = vec![Vec::new(); n];
    let mut succs = vec![Vec::new(); n];
    let mut last: Vec<Option<usize>> = vec![None; c.num_qubits as usize];
    for (i, g) in c.gates.iter().enumerate() {
        for &q in g.qubits() {
            if let Some(p) = last[q as usize] {
                if !preds[i].contains(&p) {
                    preds[i].push(p);
                    succs[p].push(i);
                }
            }
            last[q as usize] = Some(i);
        }
    }
    DependencyGraph { preds, succs }
}

/// Undirected qubit-pair weights; keys are `(min, max)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct InteractionGraph {
    pub num_qubits: u32,
    pub weights: BTreeMap<(u32, u32), usize>,
}

impl InteractionGraph {
    pub fn weight(&self, a: u32, b: u32) -> usize {
        self.weights.get(&(a.min(b), a.max(b))).copied().unwrap_or(0)
    }

    pub fn total_weight(&self) -> usize {
        self.weights.values().sum()
    }

    /// Adjacency lists with weights, indexed by qubit.
    pub fn neighbors(&self) -> Vec<Vec<(u32, usize)>> {
        let mut adj = vec![Vec::new(); self.num_qubits as usize];
        for (&(a, b), &w) in &self.weights {
            adj[a as usize].push((b, w));
            adj[b as usize].push((a, w));
        }
        adj
    }
}

pub fn interaction_graph(c: &Circuit) -> InteractionGraph {
    let mut weights = BTreeMap::new();
    for g in c.two_qubit_gates() {
        let (a, b) = (g.q[0], g.q[1]);
        *weights.entry((a.min(b), a.max(b))).or_insert(0) += 1;
    }
    InteractionGraph { num_qubits: c.num_qubits, weights }
}

/// ASAP finish time of the last qubit, with per-gate durations. Barriers
/// are skipped.
pub(crate) fn critical_path(c: &Circuit, mut duration: impl FnMut(&Gate) -> f64) -> f64 {
    let mut ready = vec![0.0f64; c.num_qubits as usize];
    for g in &c.gates {
        if g.kind == GateKind::Barrier {
            continue;
        }
        let start = g.qubits().iter().map(|&q| ready[q as usize]).fold(0.0, f64::max);
        let end = start + duration(g);
        for &q in g.qubits() {
            ready[q as usize] = end;
        }
    }
    ready.into_iter().fold(0.0, f64::max)
}

/// Longest dependency chain counting every non-barrier gate as one layer.
pub fn depth(c: &Circuit) -> usize {
    critical_path(c, |_| 1.0) as usize
}

pub fn gate_count(c: &Circuit) -> usize {
    c.gates.iter().filter(|g| g.kind != GateKind::Barrier).count()
}
