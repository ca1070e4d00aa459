//! Chiplet-ignorant reference pipeline: SABRE over the whole device, then
//! the four-SWAP peephole fix for gates that landed on inter-chiplet links.

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate, GateKind};
use crate::compiled::{CompiledCircuit, Layout, Pipeline};
use crate::device::{distance_matrix, Backend, DistanceMatrix, Weighting};
use crate::elaborate::optimize::optimize;
use crate::elaborate::translate::{translate_basis, BasisSet};
use crate::error::{Error, Result};
use crate::routing::{self, circuit_nodes, LayoutScore, Placement, SabreConfig, Step, Topology};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineConfig {
    pub layout_trials: usize,
    pub sabre: SabreConfig,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        BaselineConfig { layout_trials: 4, sabre: SabreConfig::default() }
    }
}

/// Rewrites source-level SWAPs as three CXs so that every SWAP in a
/// compiled circuit is a qubit movement.
pub fn expand_logical_swaps(c: &Circuit) -> Circuit {
    let mut gates = Vec::with_capacity(c.gates.len());
    for g in &c.gates {
        match (g.kind(), g.qubits()) {
            (GateKind::Swap, &[a, b]) => {
                gates.extend([Gate::cx(a, b), Gate::cx(b, a), Gate::cx(a, b)]);
            }
            _ => gates.push(*g),
        }
    }
    Circuit { name: c.name.clone(), num_qubits: c.num_qubits, gates }
}

fn check_fits(c: &Circuit, b: &Backend) -> Result<()> {
    if c.num_qubits > b.num_qubits() {
        return Err(Error::Capacity(format!(
            "circuit needs {} qubits, backend has {}",
            c.num_qubits,
            b.num_qubits()
        )));
    }
    Ok(())
}

pub fn sabre_route(
    c: &Circuit,
    b: &Backend,
    d: &DistanceMatrix,
    init: &Layout,
    seed: u64,
) -> Result<(Circuit, Layout)> {
    sabre_route_with(c, b, d, init, seed, &SabreConfig::default())
}

pub fn sabre_route_with(
    c: &Circuit,
    b: &Backend,
    d: &DistanceMatrix,
    init: &Layout,
    seed: u64,
    cfg: &SabreConfig,
) -> Result<(Circuit, Layout)> {
    check_fits(c, b)?;
    if init.num_logical() != c.num_qubits as usize || init.num_physical() != b.num_qubits() as usize
    {
        return Err(Error::InvalidInput(format!(
            "layout maps {} of {} qubits; circuit has {} on a {}-qubit backend",
            init.num_logical(),
            init.num_physical(),
            c.num_qubits,
            b.num_qubits()
        )));
    }
    let topo = Topology::for_backend(b, d);
    let nodes = circuit_nodes(c);
    let mut rng = crate::rng::chacha(seed, 0x5AB2E);
    let routed = routing::route(&nodes, &topo, Placement::from_layout(init), cfg, &mut rng)?;
    let mut out = Circuit::new(c.name.clone(), b.num_qubits());
    for step in &routed.steps {
        match *step {
            Step::Exec { node, phys } => {
                let g = &c.gates[node];
                let mapped = match *g.qubits() {
                    [_, _] => g.remap(|q| if q == g.qubits()[0] { phys[0] } else { phys[1] }),
                    _ => g.remap(|_| phys[0]),
                };
                out.gates.push(mapped);
            }
            Step::Swap(p, q) => out.gates.push(Gate::swap(p, q)),
        }
    }
    Ok((out, routed.placement.to_layout()))
}

pub fn sabre_layout(
    c: &Circuit,
    b: &Backend,
    d: &DistanceMatrix,
    trials: usize,
    seed: u64,
) -> Result<Layout> {
    Ok(sabre_layout_trials(c, b, d, trials, seed, &SabreConfig::default())?.0)
}

/// As [`sabre_layout`], also returning each trial's inserted-SWAP count.
pub fn sabre_layout_trials(
    c: &Circuit,
    b: &Backend,
    d: &DistanceMatrix,
    trials: usize,
    seed: u64,
    cfg: &SabreConfig,
) -> Result<(Layout, Vec<usize>)> {
    check_fits(c, b)?;
    if trials == 0 {
        return Err(Error::InvalidInput("sabre_layout needs at least one trial".into()));
    }
    let topo = Topology::for_backend(b, d);
    let nodes = circuit_nodes(c);
    let (best, scores) = routing::sabre_layout(
        &nodes,
        c.num_qubits as usize,
        &topo,
        trials,
        seed,
        cfg,
        LayoutScore::SwapCount,
    )?;
    Ok((best.to_layout(), scores.into_iter().map(|s| s as usize).collect()))
}

/// Legalizes every non-SWAP two-qubit gate sitting on an inter link with
/// SWAP(h_B, n) · SWAP(h_A, h_B) · g' · SWAP(h_A, h_B) · SWAP(h_B, n),
/// where g' runs on the intra edge (h_B, n).
pub fn peephole_correct(cc: &CompiledCircuit, b: &Backend) -> Result<CompiledCircuit> {
    let mut layout = cc.initial_layout.clone();
    let mut gates = Vec::with_capacity(cc.circuit.gates.len());
    for g in &cc.circuit.gates {
        match *g.qubits() {
            [x, y] if g.kind() != GateKind::Swap && b.is_inter(x, y) => {
                let (h_a, h_b, n) = choose_side(b, &layout, x, y)?;
                let moved = g.remap(|q| if q == h_a { h_b } else { n });
                gates.extend([
                    Gate::swap(h_b, n),
                    Gate::swap(h_a, h_b),
                    moved,
                    Gate::swap(h_a, h_b),
                    Gate::swap(h_b, n),
                ]);
            }
            [x, y] => {
                if g.kind() == GateKind::Swap {
                    layout.swap_physical(x, y);
                }
                gates.push(*g);
            }
            _ => gates.push(*g),
        }
    }
    let circuit = Circuit { name: cc.circuit.name.clone(), num_qubits: cc.circuit.num_qubits, gates };
    Ok(CompiledCircuit { circuit, ..cc.clone() })
}

/// Picks `(h_A, h_B, neighbour)`: an idle intra neighbour of either halo
/// end if one exists, otherwise the lowest-index neighbour.
fn choose_side(b: &Backend, layout: &Layout, x: u32, y: u32) -> Result<(u32, u32, u32)> {
    let mut options = Vec::new();
    for (h_a, h_b) in [(x, y), (y, x)] {
        for n in b.intra_neighbors(h_b) {
            let busy = layout.logical_at(n).is_some();
            options.push((busy, n, h_b, h_a));
        }
    }
    options.sort_unstable();
    options.first().map(|&(_, n, h_b, h_a)| (h_a, h_b, n)).ok_or_else(|| {
        Error::InvalidBackend(format!("halo qubits {x} and {y} have no intra-chiplet neighbour"))
    })
}

pub fn baseline_compile(c: &Circuit, b: &Backend, seed: u64) -> Result<CompiledCircuit> {
    baseline_compile_with(c, b, seed, &BaselineConfig::default())
}

pub fn baseline_compile_with(
    c: &Circuit,
    b: &Backend,
    seed: u64,
    cfg: &BaselineConfig,
) -> Result<CompiledCircuit> {
    check_fits(c, b)?;
    let c = expand_logical_swaps(c);
    let d = distance_matrix(b, Weighting::Hops)?;
    let (init, _) = sabre_layout_trials(&c, b, &d, cfg.layout_trials, seed, &cfg.sabre)?;
    let (routed, final_layout) = sabre_route_with(&c, b, &d, &init, seed, &cfg.sabre)?;
    let cc = CompiledCircuit {
        circuit: routed,
        initial_layout: init,
        final_layout,
        backend_id: b.name.clone(),
        pipeline: Pipeline::Baseline,
        seed,
    };
    let mut cc = peephole_correct(&cc, b)?;
    cc.circuit = optimize(&translate_basis(&cc.circuit, &BasisSet::for_backend(b))?);
    Ok(cc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::ghz;
    use crate::device::generate_backend;

    #[test]
    fn peephole_shape_on_inter_cx() {
        let b = generate_backend(2, 10, 4.0).unwrap();
        let (_, link) = b.inter_links().next().unwrap();
        let (ha, hb) = (link.a, link.b);
        let init = Layout::new(vec![ha, hb], b.num_qubits()).unwrap();
        let circuit = Circuit::with_gates("c", b.num_qubits(), vec![Gate::cx(ha, hb)]).unwrap();
        let cc = CompiledCircuit {
            circuit,
            initial_layout: init.clone(),
            final_layout: init,
            backend_id: b.name.clone(),
            pipeline: Pipeline::Baseline,
            seed: 0,
        };
        let out = peephole_correct(&cc, &b).unwrap();
        let swaps: Vec<&Gate> = out.circuit.gates.iter().filter(|g| g.kind() == GateKind::Swap).collect();
        assert_eq!(swaps.len(), 4);
        let inter = swaps.iter().filter(|g| b.is_inter(g.qubits()[0], g.qubits()[1])).count();
        assert_eq!(inter, 2);
        let cx = out.circuit.gates.iter().find(|g| g.kind() == GateKind::Cx).unwrap();
        assert!(!b.is_inter(cx.qubits()[0], cx.qubits()[1]));
        assert!(b.link(cx.qubits()[0], cx.qubits()[1]).is_some());
    }

    #[test]
    fn routed_line_needs_one_swap() {
        let b = generate_backend(1, 10, 4.0).unwrap();
        let d = distance_matrix(&b, Weighting::Hops).unwrap();
        // Qubits 0 and 2 on the first row chain are two hops apart.
        let c = Circuit::with_gates("c", 2, vec![Gate::cx(0, 1)]).unwrap();
        let init = Layout::new(vec![0, 2], b.num_qubits()).unwrap();
        let (out, _) = sabre_route(&c, &b, &d, &init, 1).unwrap();
        assert_eq!(out.gates.iter().filter(|g| g.kind() == GateKind::Swap).count(), 1);
    }

    #[test]
    fn compile_is_deterministic() {
        let b = generate_backend(2, 10, 4.0).unwrap();
        let c = ghz(20).unwrap();
        let x = baseline_compile(&c, &b, 5).unwrap().to_json().unwrap();
        let y = baseline_compile(&c, &b, 5).unwrap().to_json().unwrap();
        assert_eq!(x, y);
    }
}
