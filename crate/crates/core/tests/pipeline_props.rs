//! Cross-module invariants of both compilation pipelines.

mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use seqc_core::baseline::{baseline_compile, peephole_correct, sabre_layout, sabre_route};
use seqc_core::bench::{BenchSpec, Family};
use seqc_core::circuit::{Circuit, GateKind};
use seqc_core::compiled::{CompiledCircuit, Pipeline};
use seqc_core::device::{chiplet_graph, distance_matrix, generate_backend, Weighting};
use seqc_core::elaborate::elaborate;
use seqc_core::stratify::{
    anneal_partition_report, classify_swap, replay_events, stratify, AnnealingConfig, ProgramOp, RoutedOp,
    StratifyConfig, Tier,
};
use seqc_core::verify::{check_permutation_equiv, statevector_equiv, validate_compiled};

fn family() -> impl Strategy<Value = Family> {
    prop::sample::select(Family::ALL.to_vec())
}

fn fuzz(seed: u64, n: u32, len: usize) -> Circuit {
    let mut kinds = common::UNITARY_KINDS.to_vec();
    kinds.extend([GateKind::Measure, GateKind::Reset, GateKind::Barrier]);
    common::random_circuit(&mut ChaCha8Rng::seed_from_u64(seed), n, len, &kinds)
}

fn per_qubit(c: &Circuit) -> Vec<Vec<String>> {
    let mut out = vec![Vec::new(); c.num_qubits as usize];
    for g in &c.gates {
        for &q in g.qubits() {
            out[q as usize].push(g.to_string());
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn peephole_adds_four_swaps_per_corrected_gate(f in family(), chiplets in 2u32..5, seed in 0u64..1000) {
        let b = generate_backend(chiplets, 10, 4.0).unwrap();
        let c = seqc_core::baseline::expand_logical_swaps(&BenchSpec::new(f, 10 * chiplets, seed).generate().unwrap());
        let d = distance_matrix(&b, Weighting::Hops).unwrap();
        let init = sabre_layout(&c, &b, &d, 2, seed).unwrap();
        let (routed, final_layout) = sabre_route(&c, &b, &d, &init, seed).unwrap();
        let cc = CompiledCircuit {
            circuit: routed,
            initial_layout: init,
            final_layout,
            backend_id: b.name.clone(),
            pipeline: Pipeline::Baseline,
            seed,
        };
        check_permutation_equiv(&c, &cc).unwrap();
        let corrected = cc.circuit.gates.iter()
            .filter(|g| g.kind() != GateKind::Swap && matches!(*g.qubits(), [x, y] if b.is_inter(x, y)))
            .count();
        let swaps = |c: &CompiledCircuit| c.circuit.gates.iter().filter(|g| g.kind() == GateKind::Swap).count();
        let fixed = peephole_correct(&cc, &b).unwrap();
        prop_assert_eq!(swaps(&fixed), swaps(&cc) + 4 * corrected);
        prop_assert!(fixed.circuit.gates.iter().all(|g| g.kind() == GateKind::Swap
            || !matches!(*g.qubits(), [x, y] if b.is_inter(x, y))));
        prop_assert_eq!(&fixed.final_layout, &cc.final_layout);
        check_permutation_equiv(&c, &fixed).unwrap();
    }

    #[test]
    fn annealing_respects_capacity_and_never_worsens(n in 2u32..30, k in 1u32..4, seed in any::<u64>()) {
        let cap = n.div_ceil(k) + 1;
        let c = fuzz(seed, n, 3 * n as usize);
        let cfg = AnnealingConfig { trials_per_core: 1, ..AnnealingConfig::default() };
        let (p, initial) = anneal_partition_report(&c, k, cap, &cfg, seed).unwrap();
        p.validate().unwrap();
        prop_assert!(p.assignment.iter().all(|&s| s < p.num_subcircuits));
        let mut side = p.assignment.clone();
        side.sort_unstable();
        side.dedup();
        prop_assert_eq!(side.len() as u32, p.num_subcircuits);
        prop_assert!(common::cut(&c, &p.assignment) <= initial);
    }

    #[test]
    fn tiers_partition_all_candidates(
        front in prop::collection::vec((0u32..6, 0u32..6), 0..6),
        moves in prop::collection::vec((0u32..6, 0u32..4), 1..3),
        chiplet_of in prop::collection::vec(0u32..4, 6),
    ) {
        let hops: Vec<Vec<u32>> = (0..4).map(|i: i64| (0..4).map(|j: i64| (i - j).unsigned_abs() as u32).collect()).collect();
        let s = classify_swap(&moves, &front, &chiplet_of, &hops);
        let expected = match (s.improved, s.harmed) {
            (i, 0) if i >= 2 => Tier::Symbiotic,
            (1, 0) => Tier::Commensalistic,
            (0, 0) => Tier::Neutral,
            _ => Tier::Parasitic,
        };
        prop_assert_eq!(s.tier, expected);
        prop_assert!(s.improved + s.harmed <= front.len());
    }

    #[test]
    fn stratification_is_consistent(f in family(), chiplets in 1u32..7, seed in 0u64..1000) {
        let b = generate_backend(chiplets, 10, 4.0).unwrap();
        let c = BenchSpec::new(f, 10 * chiplets, seed).generate().unwrap();
        let st = stratify(&c, &b, &StratifyConfig::default(), seed).unwrap();
        st.validate().unwrap();
        let alloc = &st.allocation;
        let mut chips = alloc.subcircuit_to_chiplet.clone();
        chips.sort_unstable();
        chips.dedup();
        prop_assert_eq!(chips.len(), alloc.subcircuit_to_chiplet.len());
        prop_assert!(chips.iter().all(|&ch| ch < chiplets));

        let cg = chiplet_graph(&b);
        let mut at = alloc.initial_chiplets(&st.partition);
        let mut next_event = 0;
        for op in &alloc.routed {
            match op {
                RoutedOp::Gate(g) => {
                    let q = g.qubits();
                    prop_assert!(q.iter().all(|&x| at[x as usize] == at[q[0] as usize]), "gate {} spans chiplets", g);
                }
                RoutedOp::Boundary(id) => {
                    let e = alloc.events[*id as usize];
                    prop_assert_eq!(*id, next_event);
                    next_event += 1;
                    prop_assert!(!cg.links_between(e.chiplets[0], e.chiplets[1]).is_empty());
                    at = replay_events(&at, std::slice::from_ref(&e));
                }
            }
        }
        prop_assert_eq!(next_event as usize, alloc.events.len());

        for e in &alloc.events {
            for ch in e.chiplets {
                prop_assert!(st.programs[ch as usize].boundary_ids().any(|i| i == e.id));
            }
        }
        for p in &st.programs {
            let ids: Vec<u32> = p.boundary_ids().collect();
            prop_assert!(ids.windows(2).all(|w| w[0] < w[1]));
        }
        let program_gates: usize = st.programs.iter()
            .map(|p| p.ops.iter().filter(|o| matches!(o, ProgramOp::Gate(_))).count())
            .sum();
        let routed = st.routed_circuit();
        prop_assert_eq!(program_gates, routed.gates.len());
        let source = seqc_core::baseline::expand_logical_swaps(&c);
        prop_assert_eq!(routed.gates.len(), source.gates.len());
        prop_assert_eq!(per_qubit(&routed), per_qubit(&source));
    }

    #[test]
    fn seqc_output_is_legal_and_equivalent(f in family(), chiplets in 1u32..7, seed in 0u64..1000) {
        let b = generate_backend(chiplets, 10, 4.0).unwrap();
        let c = BenchSpec::new(f, 10 * chiplets, seed).generate().unwrap();
        let st = stratify(&c, &b, &StratifyConfig::default(), seed).unwrap();
        let cc = elaborate(&st, &b, 2, seed).unwrap();
        prop_assert!(validate_compiled(&cc, &b).is_empty());
        check_permutation_equiv(&c, &cc).unwrap();
        let inter: Vec<_> = cc.circuit.gates.iter()
            .filter(|g| matches!(*g.qubits(), [x, y] if b.is_inter(x, y)))
            .collect();
        prop_assert!(inter.iter().all(|g| g.kind() == GateKind::Swap));
        prop_assert_eq!(inter.len(), st.events().len());
        let start = st.allocation.initial_chiplets(&st.partition);
        for q in 0..c.num_qubits {
            prop_assert_eq!(b.chiplet_of(cc.initial_layout.physical(q)), start[q as usize]);
        }
    }

    #[test]
    fn fuzzed_circuits_survive_both_pipelines(seed in any::<u64>(), n in 2u32..20, len in 1usize..60) {
        let b = generate_backend(2, 10, 4.0).unwrap();
        let c = fuzz(seed, n, len);
        let seqc = elaborate(&stratify(&c, &b, &StratifyConfig::default(), seed).unwrap(), &b, 1, seed).unwrap();
        let base = baseline_compile(&c, &b, seed).unwrap();
        for cc in [&seqc, &base] {
            prop_assert!(validate_compiled(cc, &b).is_empty());
            check_permutation_equiv(&c, cc).unwrap();
        }
    }

    #[test]
    fn oracles_agree_on_unitary_circuits(seed in any::<u64>(), n in 2u32..9, len in 1usize..40) {
        let b = generate_backend(2, 10, 4.0).unwrap();
        let c = common::random_circuit(&mut ChaCha8Rng::seed_from_u64(seed), n, len, &common::UNITARY_KINDS);
        for p in [Pipeline::Seqc, Pipeline::Baseline] {
            let cc = seqc_core::pipeline::compile(&c, &b, p, &Default::default(), 1, seed).unwrap().compiled;
            prop_assert!(check_permutation_equiv(&c, &cc).is_ok());
            let f = statevector_equiv(&c, &cc).unwrap();
            prop_assert!(f >= 1.0 - 1e-9, "{} fidelity {}", p, f);
        }
    }
}

#[test]
fn allocation_terminates_on_every_grid_shape() {
    for chiplets in [2u32, 3, 5, 7, 8, 11, 13] {
        let b = generate_backend(chiplets, 10, 4.0).unwrap();
        for f in Family::ALL {
            let c = BenchSpec::new(f, 10 * chiplets, 3).generate().unwrap();
            let st = stratify(&c, &b, &StratifyConfig::default(), 3).unwrap();
            st.validate().unwrap();
        }
    }
}

#[test]
fn stratification_is_reusable_on_a_larger_backend() {
    let small = generate_backend(4, 10, 4.0).unwrap();
    let c = BenchSpec::new(Family::Ghz, 40, 0).generate().unwrap();
    let st = stratify(&c, &small, &StratifyConfig::default(), 0).unwrap();
    let wider = generate_backend(6, 10, 4.0).unwrap();
    match elaborate(&st, &wider, 1, 0) {
        Ok(cc) => {
            assert!(validate_compiled(&cc, &wider).is_empty());
            check_permutation_equiv(&c, &cc).unwrap();
        }
        Err(e) => {
            // Grids differ in shape, so chiplet adjacency need not be preserved.
            assert!(st.fits(&wider).is_err(), "fits but failed: {e}");
        }
    }
    let cc = elaborate(&st, &small, 1, 0).unwrap();
    check_permutation_equiv(&c, &cc).unwrap();
}
