use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use seqc_core::circuit::{Circuit, Gate, GateKind};
use seqc_core::compiled::{CompiledCircuit, Layout, Pipeline};
use seqc_core::device::{generate_backend, Backend};
use seqc_core::metrics::{esp, esp_with, exec_time, geomean_ratio, EspOptions, MetricsReport};

/// Random gates that the backend can execute where they are placed.
fn native_gates(b: &Backend, rng: &mut ChaCha8Rng, len: usize) -> Vec<Gate> {
    (0..len)
        .map(|_| match rng.gen_range(0..7) {
            0 => Gate::x(rng.gen_range(0..b.num_qubits())),
            1 => Gate::sx(rng.gen_range(0..b.num_qubits())),
            2 => Gate::rz(rng.gen_range(-3.0..3.0), rng.gen_range(0..b.num_qubits())),
            3 => Gate::measure(rng.gen_range(0..b.num_qubits())),
            4 => Gate::barrier(rng.gen_range(0..b.num_qubits())),
            _ => {
                let l = &b.links[rng.gen_range(0..b.links.len())];
                if l.allows(GateKind::Cz) && rng.gen_bool(0.5) {
                    Gate::cz(l.a, l.b)
                } else {
                    Gate::swap(l.a, l.b)
                }
            }
        })
        .collect()
}

fn wrap(b: &Backend, gates: Vec<Gate>) -> CompiledCircuit {
    let n = b.num_qubits();
    CompiledCircuit {
        circuit: Circuit::with_gates("m", n, gates).unwrap(),
        initial_layout: Layout::trivial(n, n).unwrap(),
        final_layout: Layout::trivial(n, n).unwrap(),
        backend_id: b.name.clone(),
        pipeline: Pipeline::Seqc,
        seed: 0,
    }
}

proptest! {
    #[test]
    fn inserting_a_gate_never_helps(seed in any::<u64>(), len in 0usize..40, at in any::<prop::sample::Index>()) {
        let b = generate_backend(2, 10, 4.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gates = native_gates(&b, &mut rng, len);
        let extra = native_gates(&b, &mut rng, 1)[0];
        let mut longer = gates.clone();
        longer.insert(at.index(len + 1), extra);
        let (short, long) = (wrap(&b, gates), wrap(&b, longer));
        let (e0, e1) = (esp(&short, &b).unwrap(), esp(&long, &b).unwrap());
        // Touching a fresh qubit adds a factor to the mean, so compare products.
        let touched = |cc: &CompiledCircuit| {
            let mut t: Vec<u32> = cc.circuit.gates.iter().filter(|g| g.kind() != GateKind::Barrier)
                .flat_map(|g| g.qubits().to_vec()).collect();
            t.sort_unstable();
            t.dedup();
            t.len() as f64
        };
        prop_assert!(e1.ln() * touched(&long) <= e0.ln() * touched(&short) + 1e-12);
        prop_assert!(exec_time(&long, &b).unwrap() >= exec_time(&short, &b).unwrap());
    }

    #[test]
    fn report_is_in_range(seed in any::<u64>(), len in 0usize..60, deco in any::<bool>()) {
        let b = generate_backend(3, 10, 4.0).unwrap();
        let cc = wrap(&b, native_gates(&b, &mut ChaCha8Rng::seed_from_u64(seed), len));
        let m = MetricsReport::compute(&cc, &b, EspOptions { decoherence: deco }).unwrap();
        prop_assert!(m.esp > 0.0 && m.esp <= 1.0);
        prop_assert!(m.exec_time_ns >= 0.0);
        prop_assert!(m.depth <= m.gate_count);
        let zero_time = cc.circuit.gates.iter().all(|g| matches!(g.kind(), GateKind::Rz | GateKind::Barrier));
        prop_assert_eq!(m.exec_time_ns == 0.0, zero_time);
        let deco = esp_with(&cc, &b, EspOptions { decoherence: true }).unwrap();
        prop_assert!(deco <= esp(&cc, &b).unwrap());
    }

    #[test]
    fn geomean_is_scale_invariant(
        pairs in prop::collection::vec((0.1f64..100.0, 0.1f64..100.0), 1..20),
        k in 0.01f64..100.0,
    ) {
        let base = geomean_ratio(&pairs).unwrap();
        let scaled: Vec<(f64, f64)> = pairs.iter().map(|&(s, b)| (s, b * k)).collect();
        let r = geomean_ratio(&scaled).unwrap();
        prop_assert!((r - base / k).abs() <= 1e-9 * (base / k));
    }
}
