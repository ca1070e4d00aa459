//! Rewrites IR gates into the device basis: X, SX, Rz and CZ inside a
//! chiplet, SWAP on inter-chiplet links.

use std::collections::BTreeSet;
use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate, GateKind};
use crate::device::Backend;
use crate::error::{Error, Result};
use crate::unitary::{ry, synthesize_1q};

/// Two disjoint gate sets: one for intra-chiplet qubits and links, one for
/// the inter-chiplet links listed in `inter_links`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasisSet {
    pub single: BTreeSet<GateKind>,
    pub intra_two: BTreeSet<GateKind>,
    pub inter: BTreeSet<GateKind>,
    /// `(min, max)` physical pairs whose gates must come from `inter`.
    pub inter_links: BTreeSet<(u32, u32)>,
}

impl BasisSet {
    /// Strict hardware basis: every intra-chiplet SWAP is lowered to CZs.
    pub fn native() -> Self {
        BasisSet {
            single: [GateKind::X, GateKind::Sx, GateKind::Rz].into(),
            intra_two: [GateKind::Cz].into(),
            inter: [GateKind::Swap].into(),
            inter_links: BTreeSet::new(),
        }
    }

    /// Basis used by both pipelines: routing SWAPs stay as SWAP instructions
    /// (admitted on every link) so layouts can be tracked through them.
    pub fn for_backend(b: &Backend) -> Self {
        let mut basis = Self::native();
        basis.intra_two.insert(GateKind::Swap);
        basis.inter_links =
            b.inter_links().map(|(_, l)| (l.a.min(l.b), l.a.max(l.b))).collect();
        basis
    }

    pub fn is_inter(&self, a: u32, b: u32) -> bool {
        self.inter_links.contains(&(a.min(b), a.max(b)))
    }
}

/// Full lowering of one gate to {X, SX, Rz, CZ}; non-unitary kinds and
/// native kinds are returned unchanged.
pub fn lower_gate(g: &Gate) -> Vec<Gate> {
    let mut out = Vec::new();
    lower_into(g, &mut out);
    out
}

fn lower_into(g: &Gate, out: &mut Vec<Gate>) {
    match (g.kind(), g.qubits()) {
        (GateKind::H, &[q]) => {
            out.extend([Gate::rz(FRAC_PI_2, q), Gate::sx(q), Gate::rz(FRAC_PI_2, q)]);
        }
        (GateKind::Ry, &[q]) => {
            let theta = g.param().expect("validated angle");
            out.extend(synthesize_1q(&ry(theta), q));
        }
        (GateKind::Cx, &[a, b]) => {
            lower_into(&Gate::h(b), out);
            out.push(Gate::cz(a, b));
            lower_into(&Gate::h(b), out);
        }
        (GateKind::Swap, &[a, b]) => {
            lower_into(&Gate::cx(a, b), out);
            lower_into(&Gate::cx(b, a), out);
            lower_into(&Gate::cx(a, b), out);
        }
        (GateKind::Rzz, &[a, b]) => {
            let theta = g.param().expect("validated angle");
            lower_into(&Gate::cx(a, b), out);
            out.push(Gate::rz(theta, b));
            lower_into(&Gate::cx(a, b), out);
        }
        _ => out.push(*g),
    }
}

/// Translates one gate under `basis`, appending to `out`.
pub fn translate_gate(g: &Gate, basis: &BasisSet, out: &mut Vec<Gate>) -> Result<()> {
    match g.qubits() {
        &[a, b] if basis.is_inter(a, b) => {
            if basis.inter.contains(&g.kind()) {
                out.push(*g);
                Ok(())
            } else {
                Err(Error::Unsupported(format!(
                    "{} on inter-chiplet link {a}-{b}; only {:?} is allowed there",
                    g.kind(),
                    basis.inter
                )))
            }
        }
        &[_, _] if basis.intra_two.contains(&g.kind()) => {
            out.push(*g);
            Ok(())
        }
        &[_] if basis.single.contains(&g.kind()) || !g.kind().is_unitary() => {
            out.push(*g);
            Ok(())
        }
        _ => {
            lower_into(g, out);
            Ok(())
        }
    }
}

pub fn translate_basis(c: &Circuit, basis: &BasisSet) -> Result<Circuit> {
    let mut gates = Vec::with_capacity(c.gates.len() * 3);
    for g in &c.gates {
        translate_gate(g, basis, &mut gates)?;
    }
    Ok(Circuit { name: c.name.clone(), num_qubits: c.num_qubits, gates })
}
