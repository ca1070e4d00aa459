//! Test oracles written from textbook definitions, independent of the
//! library's own matrix and partition code.

#![allow(dead_code)]

use num_complex::Complex64 as C;
use rand::Rng;
use seqc_core::circuit::{Circuit, Gate, GateKind};

const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

fn one_qubit(g: &Gate) -> [[C; 2]; 2] {
    let t = g.param().unwrap_or(0.0);
    match g.kind() {
        GateKind::X => [[c(0., 0.), c(1., 0.)], [c(1., 0.), c(0., 0.)]],
        GateKind::Sx => [[c(0.5, 0.5), c(0.5, -0.5)], [c(0.5, -0.5), c(0.5, 0.5)]],
        GateKind::H => [[c(H, 0.), c(H, 0.)], [c(H, 0.), c(-H, 0.)]],
        GateKind::Rz => [[C::from_polar(1.0, -t / 2.0), c(0., 0.)], [c(0., 0.), C::from_polar(1.0, t / 2.0)]],
        GateKind::Ry => {
            let (s, co) = (t / 2.0).sin_cos();
            [[c(co, 0.), c(-s, 0.)], [c(s, 0.), c(co, 0.)]]
        }
        k => panic!("{k} is not a one-qubit unitary"),
    }
}

/// Applies `g` to a statevector where qubit `q` is bit `q` of the index.
pub fn apply(state: &mut [C], g: &Gate) {
    match (g.kind(), g.qubits()) {
        (GateKind::Barrier, _) => {}
        (_, &[q]) => {
            let m = one_qubit(g);
            let bit = 1usize << q;
            for i in 0..state.len() {
                if i & bit == 0 {
                    let (a, b) = (state[i], state[i | bit]);
                    state[i] = m[0][0] * a + m[0][1] * b;
                    state[i | bit] = m[1][0] * a + m[1][1] * b;
                }
            }
        }
        (kind, &[a, b]) => {
            let (ba, bb) = (1usize << a, 1usize << b);
            let t = g.param().unwrap_or(0.0);
            let old = state.to_vec();
            for i in 0..state.len() {
                let (xa, xb) = (i & ba != 0, i & bb != 0);
                state[i] = match kind {
                    GateKind::Cx => old[if xa { i ^ bb } else { i }],
                    GateKind::Cz => if xa && xb { -old[i] } else { old[i] },
                    GateKind::Swap => {
                        let j = (i & !(ba | bb)) | if xa { bb } else { 0 } | if xb { ba } else { 0 };
                        old[j]
                    }
                    GateKind::Rzz => old[i] * C::from_polar(1.0, if xa == xb { -t / 2.0 } else { t / 2.0 }),
                    k => panic!("{k} is not a two-qubit unitary"),
                };
            }
        }
        _ => unreachable!(),
    }
}

/// Columns of the circuit's unitary.
pub fn unitary(circuit: &Circuit) -> Vec<Vec<C>> {
    let dim = 1usize << circuit.num_qubits;
    (0..dim)
        .map(|col| {
            let mut s = vec![c(0., 0.); dim];
            s[col] = c(1., 0.);
            for g in &circuit.gates {
                apply(&mut s, g);
            }
            s
        })
        .collect()
}

pub fn equal_up_to_phase(a: &[Vec<C>], b: &[Vec<C>], tol: f64) -> bool {
    let (mut best, mut phase) = (0.0, c(1., 0.));
    for (ca, cb) in a.iter().zip(b) {
        for (x, y) in ca.iter().zip(cb) {
            if x.norm() > best {
                best = x.norm();
                phase = y / x;
            }
        }
    }
    if best == 0.0 || (phase.norm() - 1.0).abs() > tol {
        return false;
    }
    a.iter().zip(b).all(|(ca, cb)| ca.iter().zip(cb).all(|(x, y)| (x * phase - y).norm() <= tol))
}

pub const UNITARY_KINDS: [GateKind; 9] = [
    GateKind::X,
    GateKind::Sx,
    GateKind::Rz,
    GateKind::H,
    GateKind::Ry,
    GateKind::Cx,
    GateKind::Cz,
    GateKind::Swap,
    GateKind::Rzz,
];

pub fn random_gate(rng: &mut impl Rng, n: u32, kinds: &[GateKind]) -> Gate {
    let kind = kinds[rng.gen_range(0..kinds.len())];
    let a = rng.gen_range(0..n);
    let mut b = rng.gen_range(0..n - 1);
    if b >= a {
        b += 1;
    }
    let angles = [0.0, std::f64::consts::FRAC_PI_2, std::f64::consts::PI, -std::f64::consts::FRAC_PI_4];
    let theta = if rng.gen_bool(0.5) { angles[rng.gen_range(0..angles.len())] } else { rng.gen_range(-7.0..7.0) };
    let qubits: Vec<u32> = if kind.arity() == 2 { vec![a, b] } else { vec![a] };
    Gate::new(kind, &qubits, kind.has_param().then_some(theta)).unwrap()
}

pub fn random_circuit(rng: &mut impl Rng, n: u32, len: usize, kinds: &[GateKind]) -> Circuit {
    let gates = (0..len).map(|_| random_gate(rng, n, kinds)).collect();
    Circuit::with_gates("fuzz", n, gates).unwrap()
}

/// Number of two-qubit gates whose operands differ in `side`.
pub fn cut(circuit: &Circuit, side: &[u32]) -> usize {
    circuit
        .gates
        .iter()
        .filter(|g| matches!(*g.qubits(), [a, b] if side[a as usize] != side[b as usize]))
        .count()
}

/// Minimum cut over all two-block assignments with at most `cap` qubits
/// per block.
pub fn min_bipartition(circuit: &Circuit, cap: u32) -> usize {
    let n = circuit.num_qubits;
    (0u32..1 << n)
        .filter(|mask| mask.count_ones() <= cap && n - mask.count_ones() <= cap)
        .map(|mask| {
            let side: Vec<u32> = (0..n).map(|q| (mask >> q) & 1).collect();
            cut(circuit, &side)
        })
        .min()
        .unwrap()
}
