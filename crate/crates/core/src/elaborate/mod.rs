//! Second compilation stage: lay out and route each chiplet on its own,
//! with the inter-chiplet SWAPs chosen up front and pinned, then translate
//! and optimize every chiplet in parallel and stitch the results.

pub mod optimize;
pub mod translate;

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate};
use crate::compiled::{CompiledCircuit, Layout, Pipeline};
use crate::device::{chiplet_graph, fidelity_weight, Backend, Scope, Weighting};
use crate::error::{Error, Result};
use crate::routing::{self, LayoutScore, Need, Node, Placement, SabreConfig, Step, Topology};
use crate::stratify::{ChipletProgram, ProgramOp, StratifiedCircuit};

use optimize::{optimize_ops, Op, OptimizeOptions};
use translate::{translate_gate, BasisSet};

/// Key shared by every boundary node so they run in program order.
const BOUNDARY_KEY: u32 = u32::MAX;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElaborateConfig {
    pub layout_trials: usize,
    pub sabre: SabreConfig,
}

impl Default for ElaborateConfig {
    fn default() -> Self {
        ElaborateConfig { layout_trials: 4, sabre: SabreConfig::default() }
    }
}

/// An inter-chiplet SWAP fixed to a physical link. `halo[k]` lies on the
/// event's `chiplets[k]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PinnedInterSwap {
    pub event: u32,
    pub link: usize,
    pub halo: [u32; 2],
}

/// Initial residents of one chiplet as `(logical, physical)` pairs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChipletLayout {
    pub chiplet: u32,
    pub placement: Vec<(u32, u32)>,
}

/// Output of chiplet routing: physical gates plus the points where pinned
/// inter-chiplet SWAPs occur.
#[derive(Clone, Debug, PartialEq)]
pub enum ChipletOp {
    Gate(Gate),
    Pinned { event: u32, halo: u32 },
}

/// One chiplet's intra-link graph with local ↔ global index maps.
pub struct ChipletView {
    pub chiplet: u32,
    pub qubits: Vec<u32>,
    local: HashMap<u32, u32>,
    topo: Topology,
}

impl ChipletView {
    pub fn new(b: &Backend, chiplet: u32) -> Result<Self> {
        let ch = b.chiplets.get(chiplet as usize).ok_or_else(|| {
            Error::InvalidBackend(format!("backend has no chiplet {chiplet}"))
        })?;
        let qubits = ch.qubits.clone();
        let local: HashMap<u32, u32> =
            qubits.iter().enumerate().map(|(i, &q)| (q, i as u32)).collect();
        let adj: Vec<Vec<(u32, f64)>> = qubits
            .iter()
            .map(|&q| {
                b.neighbors(q)
                    .iter()
                    .filter(|&&(_, l)| b.links[l].scope == Scope::Intra)
                    .filter_map(|&(p, l)| Some((*local.get(&p)?, fidelity_weight(b.links[l].error))))
                    .collect()
            })
            .collect();
        let topo = Topology::new(adj, Weighting::Fidelity)?;
        Ok(ChipletView { chiplet, qubits, local, topo })
    }

    fn local(&self, q: u32) -> u32 {
        self.local[&q]
    }

    fn global(&self, p: u32) -> u32 {
        self.qubits[p as usize]
    }

    pub fn distance(&self, a: u32, b: u32) -> f64 {
        self.topo.dist.get(self.local(a), self.local(b))
    }
}

/// SABRE layout over the gates among the chiplet's initial residents.
pub fn chiplet_layout(
    prog: &ChipletProgram,
    view: &ChipletView,
    trials: usize,
    seed: u64,
    cfg: &SabreConfig,
) -> Result<ChipletLayout> {
    let residents = &prog.initial_qubits;
    if residents.len() > view.qubits.len() {
        return Err(Error::Capacity(format!(
            "chiplet {} holds {} qubits, program needs {}",
            view.chiplet,
            view.qubits.len(),
            residents.len()
        )));
    }
    let dense: HashMap<u32, u32> =
        residents.iter().enumerate().map(|(i, &q)| (q, i as u32)).collect();
    let nodes: Vec<Node> = prog
        .ops
        .iter()
        .filter_map(|op| match op {
            ProgramOp::Gate(g) if g.is_two_qubit() => {
                let (a, b) = (dense.get(&g.qubits()[0])?, dense.get(&g.qubits()[1])?);
                Some(Node::adjacent(*a, *b))
            }
            _ => None,
        })
        .collect();
    let (placement, _) = routing::sabre_layout(
        &nodes,
        residents.len(),
        &view.topo,
        trials,
        seed,
        cfg,
        LayoutScore::SwapCost,
    )?;
    let placement = residents
        .iter()
        .enumerate()
        .map(|(i, &q)| (q, view.global(placement.pos(i as u32).expect("placed"))))
        .collect();
    Ok(ChipletLayout { chiplet: view.chiplet, placement })
}

fn placement_of(layout: &ChipletLayout, view: &ChipletView, num_logical: u32) -> Placement {
    let mut p = Placement::empty(num_logical as usize, view.qubits.len());
    for &(q, phys) in &layout.placement {
        p.place(q, view.local(phys));
    }
    p
}

fn nearest_vacancy(p: &Placement, view: &ChipletView, h: u32) -> Option<(f64, u32)> {
    p.vacancies()
        .map(|v| (view.topo.dist.get(v, h), v))
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
}

/// Fixes every boundary event to an inter link, in event order. Each
/// event takes the link minimizing the fidelity distance of both operands
/// (or of the nearest idle slot) to their halo ends; positions are then
/// advanced as if the operands had moved there.
pub fn place_inter_swaps(
    strat: &StratifiedCircuit,
    layouts: &[ChipletLayout],
    b: &Backend,
    views: &[ChipletView],
) -> Result<Vec<PinnedInterSwap>> {
    let cg = chiplet_graph(b);
    let mut pos: Vec<Placement> = layouts
        .iter()
        .zip(views)
        .map(|(l, v)| placement_of(l, v, strat.num_qubits))
        .collect();
    let mut pins = Vec::with_capacity(strat.events().len());
    for e in strat.events() {
        let [ca, cb] = e.chiplets;
        let links = cg.links_between(ca, cb);
        if links.is_empty() {
            return Err(Error::Stratification(format!(
                "event {} joins chiplets {ca} and {cb}, which share no link",
                e.id
            )));
        }
        let side_cost = |k: usize, h: u32| -> f64 {
            let (c, view) = (e.chiplets[k] as usize, &views[e.chiplets[k] as usize]);
            let h = view.local(h);
            match e.qubits[k] {
                Some(q) => view.topo.dist.get(pos[c].pos(q).expect("resident operand"), h),
                None => nearest_vacancy(&pos[c], view, h).map_or(f64::INFINITY, |(d, _)| d),
            }
        };
        let mut best: Option<(f64, usize, [u32; 2])> = None;
        for &l in links {
            let link = &b.links[l];
            let ends = if b.chiplet_of(link.a) == ca { [link.a, link.b] } else { [link.b, link.a] };
            let cost = side_cost(0, ends[0]) + side_cost(1, ends[1]);
            if best.map_or(true, |(bc, _, _)| cost < bc) {
                best = Some((cost, l, ends));
            }
        }
        let (_, link, halo) = best.expect("at least one link");
        for k in 0..2 {
            let (c, view) = (e.chiplets[k] as usize, &views[e.chiplets[k] as usize]);
            let h = view.local(halo[k]);
            let from = match e.qubits[k] {
                Some(q) => pos[c].pos(q),
                None => nearest_vacancy(&pos[c], view, h).map(|(_, v)| v),
            };
            if let Some(from) = from {
                if from != h {
                    pos[c].swap(from, h);
                }
            }
        }
        for k in 0..2 {
            let c = e.chiplets[k] as usize;
            let h = views[c].local(halo[k]);
            pos[c].replace_at(h, e.qubits[1 - k]);
        }
        pins.push(PinnedInterSwap { event: e.id, link, halo });
    }
    Ok(pins)
}

/// Routes one chiplet's program over its intra links. Pinned boundary
/// events become anchors: the outgoing qubit must sit on the halo qubit
/// (or the halo must be idle), after which the incoming qubit takes its
/// place.
pub fn route_chiplet(
    prog: &ChipletProgram,
    layout: &ChipletLayout,
    pins: &[PinnedInterSwap],
    strat: &StratifiedCircuit,
    view: &ChipletView,
    cfg: &SabreConfig,
    seed: u64,
) -> Result<Vec<ChipletOp>> {
    let c = prog.chiplet;
    let mut nodes = Vec::with_capacity(prog.ops.len());
    for op in &prog.ops {
        nodes.push(match op {
            ProgramOp::Gate(g) => match *g.qubits() {
                [a, b] => Node::adjacent(a, b),
                [q] => Node::free(q),
                _ => unreachable!(),
            },
            ProgramOp::Boundary(id) => {
                let e = strat.events().get(*id as usize).ok_or_else(|| {
                    Error::Stratification(format!("chiplet {c} references missing event {id}"))
                })?;
                let pin = pins.get(*id as usize).filter(|p| p.event == *id).ok_or_else(|| {
                    Error::Stratification(format!("event {id} was never pinned"))
                })?;
                let k = if e.chiplets[0] == c { 0 } else { 1 };
                let h = view.local(pin.halo[k]);
                let (out, inc) = (e.qubits[k], e.qubits[1 - k]);
                let need = match out {
                    Some(w) => Need::At(w, h),
                    None => Need::Vacant(h),
                };
                let keys = out.into_iter().chain(inc).chain([BOUNDARY_KEY]).collect();
                Node { need, keys, handoff: Some((h, inc)) }
            }
        });
    }
    let init = placement_of(layout, view, strat.num_qubits);
    let mut rng = crate::rng::chacha(seed, 0xE1AB_0000 + c as u64);
    let routed = routing::route(&nodes, &view.topo, init, cfg, &mut rng)?;
    let mut out = Vec::with_capacity(routed.steps.len());
    for step in routed.steps {
        match step {
            Step::Exec { node, phys } => match &prog.ops[node] {
                ProgramOp::Gate(g) => {
                    let first = g.qubits()[0];
                    let p0 = view.global(phys[0]);
                    let mapped = g.remap(|q| {
                        if q == first {
                            p0
                        } else {
                            view.global(phys[1])
                        }
                    });
                    out.push(ChipletOp::Gate(mapped));
                }
                ProgramOp::Boundary(id) => {
                    out.push(ChipletOp::Pinned { event: *id, halo: view.global(phys[0]) })
                }
            },
            Step::Swap(a, b) => out.push(ChipletOp::Gate(Gate::swap(view.global(a), view.global(b)))),
        }
    }
    Ok(out)
}

/// Basis translation and optimization of one routed chiplet; pinned
/// events act as fences.
fn lower_chiplet(ops: &[ChipletOp], basis: &BasisSet, num_qubits: u32) -> Result<Vec<Op>> {
    let mut out = Vec::with_capacity(ops.len() * 3);
    let mut buf = Vec::new();
    for op in ops {
        match op {
            ChipletOp::Gate(g) => {
                buf.clear();
                translate_gate(g, basis, &mut buf)?;
                out.extend(buf.iter().copied().map(Op::Gate));
            }
            ChipletOp::Pinned { event, halo } => out.push(Op::Fence { qubit: *halo, tag: *event }),
        }
    }
    Ok(optimize_ops(out, num_qubits, &OptimizeOptions::default()))
}

/// Merges per-chiplet programs: before each pinned SWAP, both chiplets are
/// drained up to their fence for it; the SWAP is then emitted once.
pub(crate) fn stitch(
    programs: &[Vec<Op>],
    pins: &[PinnedInterSwap],
    events: &[crate::stratify::BoundaryEvent],
    num_qubits: u32,
    name: &str,
) -> Result<Circuit> {
    let mut cursor = vec![0usize; programs.len()];
    let mut gates = Vec::new();
    let mut drain = |c: usize, until: Option<u32>, gates: &mut Vec<Gate>| -> Result<()> {
        while let Some(op) = programs[c].get(cursor[c]) {
            cursor[c] += 1;
            match op {
                Op::Gate(g) => gates.push(*g),
                Op::Fence { tag, .. } if Some(*tag) == until => return Ok(()),
                Op::Fence { tag, .. } => {
                    return Err(Error::Stratification(format!(
                        "chiplet {c} reached event {tag} out of order (expected {until:?})"
                    )))
                }
            }
        }
        match until {
            Some(t) => Err(Error::Stratification(format!("chiplet {c} never reaches event {t}"))),
            None => Ok(()),
        }
    };
    for (e, pin) in events.iter().zip(pins) {
        if pin.event != e.id {
            return Err(Error::Stratification(format!("pin {} does not match event {}", pin.event, e.id)));
        }
        for &c in &e.chiplets {
            drain(c as usize, Some(e.id), &mut gates)?;
        }
        gates.push(Gate::swap(pin.halo[0], pin.halo[1]));
    }
    for c in 0..programs.len() {
        drain(c, None, &mut gates)?;
    }
    Ok(Circuit { name: name.to_string(), num_qubits, gates })
}

pub fn elaborate(
    strat: &StratifiedCircuit,
    b: &Backend,
    workers: usize,
    seed: u64,
) -> Result<CompiledCircuit> {
    elaborate_with(strat, b, workers, seed, &ElaborateConfig::default())
}

pub fn elaborate_with(
    strat: &StratifiedCircuit,
    b: &Backend,
    workers: usize,
    seed: u64,
    cfg: &ElaborateConfig,
) -> Result<CompiledCircuit> {
    strat.validate()?;
    strat.fits(b)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidInput(format!("cannot start {workers} workers: {e}")))?;
    pool.install(|| elaborate_inner(strat, b, seed, cfg))
}

fn elaborate_inner(
    strat: &StratifiedCircuit,
    b: &Backend,
    seed: u64,
    cfg: &ElaborateConfig,
) -> Result<CompiledCircuit> {
    let chiplets = strat.programs.len();
    if let Some((i, p)) = strat.programs.iter().enumerate().find(|(i, p)| p.chiplet as usize != *i) {
        return Err(Error::Stratification(format!("program {i} belongs to chiplet {}", p.chiplet)));
    }
    let views: Vec<ChipletView> =
        (0..chiplets as u32).into_par_iter().map(|c| ChipletView::new(b, c)).collect::<Result<_>>()?;
    let layouts: Vec<ChipletLayout> = strat
        .programs
        .par_iter()
        .zip(&views)
        .map(|(prog, view)| {
            chiplet_layout(prog, view, cfg.layout_trials, crate::rng::derive_seed(seed, 0xC41F_0000 + prog.chiplet as u64), &cfg.sabre)
        })
        .collect::<Result<_>>()?;
    let pins = place_inter_swaps(strat, &layouts, b, &views)?;
    let basis = BasisSet::for_backend(b);
    let lowered: Vec<Vec<Op>> = strat
        .programs
        .par_iter()
        .zip(&layouts)
        .zip(&views)
        .map(|((prog, layout), view)| {
            let routed = route_chiplet(prog, layout, &pins, strat, view, &cfg.sabre, seed)?;
            lower_chiplet(&routed, &basis, b.num_qubits())
        })
        .collect::<Result<_>>()?;
    let circuit = stitch(&lowered, &pins, strat.events(), b.num_qubits(), &strat.name)?;

    let mut l2p = vec![u32::MAX; strat.num_qubits as usize];
    for l in &layouts {
        for &(q, p) in &l.placement {
            l2p[q as usize] = p;
        }
    }
    let initial_layout = Layout::new(l2p, b.num_qubits())?;
    let mut final_layout = initial_layout.clone();
    for g in &circuit.gates {
        if let (crate::circuit::GateKind::Swap, &[x, y]) = (g.kind(), g.qubits()) {
            final_layout.swap_physical(x, y);
        }
    }
    Ok(CompiledCircuit {
        circuit,
        initial_layout,
        final_layout,
        backend_id: b.name.clone(),
        pipeline: Pipeline::Seqc,
        seed,
    })
}
