//! Simulated-annealing partition of logical qubits into equal-capacity
//! subcircuits, minimizing the number of cut two-qubit gates.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{interaction_graph, Circuit};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnealingConfig {
    pub t0: f64,
    /// Fraction of the temperature removed each round.
    pub cooling: f64,
    /// Moves per round are `max(1, round(T / moves_divisor))`.
    pub moves_divisor: f64,
    pub min_temperature: f64,
    pub trials_per_core: usize,
    /// Nominal core count used to size the trial budget. Fixed rather than
    /// probed so results do not depend on the host.
    pub cores: usize,
    /// Finish each trial with Kernighan-Lin exchange passes.
    #[serde(default = "default_quench")]
    pub quench: bool,
}

fn default_quench() -> bool {
    true
}

impl Default for AnnealingConfig {
    fn default() -> Self {
        AnnealingConfig {
            t0: 200.0,
            cooling: 0.005,
            moves_divisor: 50.0,
            min_temperature: 0.1,
            trials_per_core: 5,
            cores: 4,
            quench: true,
        }
    }
}

impl AnnealingConfig {
    pub fn trials(&self) -> usize {
        (self.trials_per_core * self.cores).max(1)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t0 > 0.0) || !(self.cooling > 0.0 && self.cooling < 1.0) {
            return Err(Error::InvalidInput(format!(
                "annealing needs t0 > 0 and 0 < cooling < 1 (got {}, {})",
                self.t0, self.cooling
            )));
        }
        if !(self.min_temperature > 0.0) || !(self.moves_divisor > 0.0) {
            return Err(Error::InvalidInput("min_temperature and moves_divisor must be > 0".into()));
        }
        Ok(())
    }
}

/// Logical qubit → subcircuit id.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub assignment: Vec<u32>,
    pub num_subcircuits: u32,
    pub capacity: u32,
}

impl Partition {
    pub fn new(assignment: Vec<u32>, num_subcircuits: u32, capacity: u32) -> Result<Self> {
        let p = Partition { assignment, num_subcircuits, capacity };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let mut sizes = vec![0u32; self.num_subcircuits as usize];
        for (q, &s) in self.assignment.iter().enumerate() {
            let slot = sizes.get_mut(s as usize).ok_or_else(|| {
                Error::Stratification(format!("qubit {q} assigned to missing subcircuit {s}"))
            })?;
            *slot += 1;
            if *slot > self.capacity {
                return Err(Error::Stratification(format!(
                    "subcircuit {s} exceeds capacity {}",
                    self.capacity
                )));
            }
        }
        Ok(())
    }

    pub fn subcircuit(&self, q: u32) -> u32 {
        self.assignment[q as usize]
    }

    pub fn members(&self, s: u32) -> Vec<u32> {
        (0..self.assignment.len() as u32).filter(|&q| self.assignment[q as usize] == s).collect()
    }
}

/// Two-qubit gates whose operands land in different subcircuits.
pub fn partition_cost(c: &Circuit, p: &Partition) -> usize {
    c.two_qubit_gates()
        .filter(|g| p.subcircuit(g.qubits()[0]) != p.subcircuit(g.qubits()[1]))
        .count()
}

/// Weighted interaction lists indexed by qubit (fillers have none).
struct Graph {
    adj: Vec<Vec<(u32, i64)>>,
}

impl Graph {
    fn new(c: &Circuit, slots: usize) -> Self {
        let mut adj = vec![Vec::new(); slots];
        for (&(a, b), &w) in &interaction_graph(c).weights {
            if a != b {
                adj[a as usize].push((b, w as i64));
                adj[b as usize].push((a, w as i64));
            }
        }
        Graph { adj }
    }

    fn cost(&self, sub: &[u32]) -> i64 {
        let mut total = 0;
        for (a, ns) in self.adj.iter().enumerate() {
            for &(b, w) in ns {
                if (a as u32) < b && sub[a] != sub[b as usize] {
                    total += w;
                }
            }
        }
        total
    }

    /// Cost change from exchanging the subcircuits of `a` and `b`.
    fn delta(&self, sub: &[u32], a: u32, b: u32) -> i64 {
        let (sa, sb) = (sub[a as usize], sub[b as usize]);
        let side = |q: u32, from: u32, to: u32, other: u32| -> i64 {
            self.adj[q as usize]
                .iter()
                .filter(|&&(x, _)| x != other)
                .map(|&(x, w)| {
                    let s = sub[x as usize];
                    w * ((s != to) as i64 - (s != from) as i64)
                })
                .sum()
        };
        side(a, sa, sb, b) + side(b, sb, sa, a)
    }
}

/// One Kernighan-Lin pass over pairwise exchanges: repeatedly apply the
/// best exchange among unlocked slots (even if it worsens the cost), lock
/// both, then keep the best prefix. Returns the gain if positive.
fn kl_pass(g: &Graph, sub: &mut [u32]) -> Option<i64> {
    let n = sub.len();
    let mut locked = vec![false; n];
    let mut applied = Vec::new();
    let (mut running, mut best_gain, mut best_len) = (0i64, 0i64, 0usize);
    loop {
        let mut pick: Option<(i64, u32, u32)> = None;
        for a in 0..n as u32 {
            if locked[a as usize] {
                continue;
            }
            for b in a + 1..n as u32 {
                if locked[b as usize] || sub[a as usize] == sub[b as usize] {
                    continue;
                }
                let d = g.delta(sub, a, b);
                if pick.map_or(true, |(pd, _, _)| d < pd) {
                    pick = Some((d, a, b));
                }
            }
        }
        let Some((d, a, b)) = pick else { break };
        sub.swap(a as usize, b as usize);
        locked[a as usize] = true;
        locked[b as usize] = true;
        applied.push((a, b));
        running -= d;
        if running > best_gain {
            best_gain = running;
            best_len = applied.len();
        }
    }
    for &(a, b) in applied[best_len..].iter().rev() {
        sub.swap(a as usize, b as usize);
    }
    (best_gain > 0).then_some(best_gain)
}

struct TrialResult {
    cost: i64,
    initial_cost: i64,
    sub: Vec<u32>,
}

fn anneal_trial(g: &Graph, slots: usize, k: u32, capacity: u32, cfg: &AnnealingConfig, seed: u64, trial: u64) -> TrialResult {
    let mut rng = crate::rng::chacha(seed, trial);
    let mut order: Vec<u32> = (0..slots as u32).collect();
    rand::seq::SliceRandom::shuffle(order.as_mut_slice(), &mut rng);
    let mut sub = vec![0u32; slots];
    for (i, &q) in order.iter().enumerate() {
        sub[q as usize] = i as u32 / capacity;
    }
    let mut cost = g.cost(&sub);
    let initial_cost = cost;
    let mut best = (cost, sub.clone());
    let mut t = cfg.t0;
    while t >= cfg.min_temperature && k > 1 {
        let moves = ((t / cfg.moves_divisor).round() as usize).max(1);
        for _ in 0..moves {
            let a = rng.gen_range(0..slots as u32);
            let b = loop {
                let b = rng.gen_range(0..slots as u32);
                if sub[b as usize] != sub[a as usize] {
                    break b;
                }
            };
            let d = g.delta(&sub, a, b);
            if d <= 0 || rng.gen::<f64>() < (-(d as f64) / t).exp() {
                sub.swap(a as usize, b as usize);
                cost += d;
                if cost < best.0 {
                    best = (cost, sub.clone());
                }
            }
        }
        t *= 1.0 - cfg.cooling;
    }
    if cfg.quench && k > 1 {
        let (mut sub, mut cost) = (best.1, best.0);
        while let Some(gain) = kl_pass(g, &mut sub) {
            cost -= gain;
        }
        best = (cost, sub);
    }
    TrialResult { cost: best.0, initial_cost, sub: best.1 }
}

/// Best-of-trials annealed partition into `num_subcircuits` groups of at
/// most `capacity` qubits. Trials run in parallel; the winner is the lowest
/// cost, then the lowest trial index.
pub fn anneal_partition(
    c: &Circuit,
    num_subcircuits: u32,
    capacity: u32,
    cfg: &AnnealingConfig,
    seed: u64,
) -> Result<Partition> {
    Ok(anneal_partition_report(c, num_subcircuits, capacity, cfg, seed)?.0)
}

/// As [`anneal_partition`], also returning the winning trial's initial
/// random-assignment cost.
pub fn anneal_partition_report(
    c: &Circuit,
    num_subcircuits: u32,
    capacity: u32,
    cfg: &AnnealingConfig,
    seed: u64,
) -> Result<(Partition, usize)> {
    cfg.validate()?;
    if num_subcircuits == 0 || capacity == 0 {
        return Err(Error::InvalidInput("need at least one subcircuit of nonzero capacity".into()));
    }
    let slots = num_subcircuits as usize * capacity as usize;
    if (c.num_qubits as usize) > slots {
        return Err(Error::Capacity(format!(
            "{} qubits do not fit in {num_subcircuits} subcircuits of {capacity}",
            c.num_qubits
        )));
    }
    let g = Graph::new(c, slots);
    let results: Vec<TrialResult> = (0..cfg.trials() as u64)
        .into_par_iter()
        .map(|t| anneal_trial(&g, slots, num_subcircuits, capacity, cfg, seed, t))
        .collect();
    let best = results
        .into_iter()
        .enumerate()
        .min_by_key(|(i, r)| (r.cost, *i))
        .map(|(_, r)| r)
        .expect("at least one trial");
    // Renumber subcircuits densely by first appearance among real qubits so
    // equal groupings compare equal.
    let mut rename = vec![u32::MAX; num_subcircuits as usize];
    let mut next = 0;
    let mut assignment = Vec::with_capacity(c.num_qubits as usize);
    for q in 0..c.num_qubits as usize {
        let s = best.sub[q] as usize;
        if rename[s] == u32::MAX {
            rename[s] = next;
            next += 1;
        }
        assignment.push(rename[s]);
    }
    let p = Partition::new(assignment, next.max(1), capacity)?;
    Ok((p, best.initial_cost as usize))
}
