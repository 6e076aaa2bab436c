use ftqc::circuit::*;
use ftqc::classical::make_steane_pair;
use ftqc::exec::PackedState;
use ftqc::fault::*;
use ftqc::gadgets::transversal_gadget;
use ftqc::qcode::*;
use ftqc::state::*;
use ftqc::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn steane() -> QuantumCode {
    let (c1, c2) = make_steane_pair();
    make_css_code(&c1, &c2).unwrap()
}

#[test]
fn idle_qubit_is_one_identity_location() {
    let c = Circuit::new(2, 1);
    let locs = locations_over(&c, 1);
    assert_eq!(locs, vec![Location { qupits: vec![0], time: 0, gate: None }]);
}

#[test]
fn cnot_is_one_two_qubit_location() {
    let mut c = Circuit::new(2, 2);
    c.cnot(0, 1);
    let locs = locations(&c);
    assert_eq!(locs.len(), 1);
    assert_eq!(locs[0].qupits, vec![0, 1]);
}

#[test]
fn idle_wire_next_to_a_cnot_gets_an_identity() {
    let mut c = Circuit::new(2, 3);
    c.cnot(0, 1);
    let locs = locations(&c);
    assert_eq!(locs.len(), 2);
    assert_eq!(locs[0].qupits, vec![0, 1]);
    assert_eq!(locs[1], Location { qupits: vec![2], time: 0, gate: None });
}

fn random_clifford(p: u32, n: usize, len: usize, ancillas: usize, seed: u64) -> Circuit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = Circuit::new(p, n);
    let mut wires: Vec<usize> = (0..n).collect();
    for step in 0..len {
        if step % (len / (ancillas + 1)).max(1) == 0 && wires.len() < n + ancillas {
            wires.push(c.add());
        }
        let kind = if p == 2 {
            [GateKind::Not, GateKind::Cnot, GateKind::Phase, GateKind::CPhase, GateKind::Hadamard, GateKind::Swap][rng.gen_range(0..6)]
        } else {
            let k = rng.gen_range(1..p);
            [GateKind::GenNot(k), GateKind::GenCnot, GateKind::Mul(k), GateKind::PhaseRot(k), GateKind::Fourier(k), GateKind::Swap][rng.gen_range(0..6)]
        };
        let mut t = wires.clone();
        for i in 0..kind.arity() {
            let j = rng.gen_range(i..t.len());
            t.swap(i, j);
        }
        c.push(kind, &t[..kind.arity()]);
    }
    c
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn prop_locations_cover_each_live_step_once(seed in 0u64..10_000) {
        let mut c = random_clifford(2, 4, 20, 2, seed);
        c.discard(1);
        c.h(0);
        let locs = locations(&c);
        let mut seen = std::collections::HashSet::new();
        for l in &locs {
            for &q in &l.qupits {
                prop_assert!(seen.insert((q, l.time)));
            }
        }
        // Wire 0 is live from the start to the end.
        for t in 0..c.depth() {
            prop_assert!(seen.contains(&(0, t)));
        }
        prop_assert!(locs.windows(2).all(|w| w[0].time <= w[1].time));
    }
}

#[test]
fn iid_sampler_edge_rates_and_determinism() {
    let locs = locations_over(&Circuit::new(2, 100), 100);
    assert_eq!(locs.len(), 10_000);
    for seed in 0..5 {
        assert!(sample_iid(&locs, 0.0, seed).is_empty());
    }
    let eps = 0.01;
    let got = sample_iid(&locs, 1.0 - eps, 7).len() as f64 / 1e4;
    let sigma = ((1.0 - eps) * eps / 1e4).sqrt();
    assert!((got - (1.0 - eps)).abs() < 3.0 * sigma, "{got}");
    assert_eq!(sample_iid(&locs, 0.3, 42), sample_iid(&locs, 0.3, 42));
    assert_ne!(sample_iid(&locs, 0.3, 42), sample_iid(&locs, 0.3, 43));
}

/// Pearson statistic of a 2x2 table against independence.
fn chi2(t: [[f64; 2]; 2]) -> f64 {
    let n: f64 = t.iter().flatten().sum();
    let rows = [t[0][0] + t[0][1], t[1][0] + t[1][1]];
    let cols = [t[0][0] + t[1][0], t[0][1] + t[1][1]];
    let mut s = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let e = rows[i] * cols[j] / n;
            s += (t[i][j] - e).powi(2) / e;
        }
    }
    s
}

// 0.999 quantile of chi-squared with one degree of freedom.
const CHI2_999: f64 = 10.828;

#[test]
fn iid_events_on_disjoint_sets_are_independent() {
    let spec = NoiseSpec::iid(0.05, 11);
    let mut t = [[0.0; 2]; 2];
    for trial in 0..100_000 {
        let path = spec.sample(10, trial).unwrap();
        let a = path.indices.iter().any(|&i| i < 4) as usize;
        let b = path.indices.iter().any(|&i| i >= 6) as usize;
        t[a][b] += 1.0;
    }
    assert!(chi2(t) < CHI2_999, "chi2 {}", chi2(t));
}

#[test]
fn burst_marginal_rate_is_calibrated() {
    let eta = 0.01;
    let ch = BurstChain::new(eta, 2.0).unwrap();
    let n = 1_000_000;
    let path = ch.sample(n, &mut trial_rng(5, 0));
    let rate = path.len() as f64 / n as f64;
    // Variance of the mean of a stationary two-state chain with lag-one correlation lambda.
    let lam = ch.lag();
    let sigma = (eta * (1.0 - eta) / n as f64 * (1.0 + lam) / (1.0 - lam)).sqrt();
    assert!((rate - eta).abs() < 3.0 * sigma, "rate {rate}, sigma {sigma}");
    assert!((ch.stay() - 0.5 - 0.5 * ch.q).abs() < 1e-15);
}

#[test]
fn unit_bursts_are_independent() {
    let ch = BurstChain::new(0.05, 1.0).unwrap();
    assert!(ch.lag().abs() < 1e-15);
    let path = ch.sample(1_000_000, &mut trial_rng(9, 0));
    let mut bits = vec![false; 1_000_000];
    for &i in &path.indices {
        bits[i] = true;
    }
    let mut t = [[0.0; 2]; 2];
    for w in bits.windows(2) {
        t[w[0] as usize][w[1] as usize] += 1.0;
    }
    assert!(chi2(t) < CHI2_999, "chi2 {}", chi2(t));
    // Same statistic picks up real bursts.
    let bursty = BurstChain::new(0.05, 2.0).unwrap().sample(1_000_000, &mut trial_rng(9, 0));
    let mut bits = vec![false; 1_000_000];
    for &i in &bursty.indices {
        bits[i] = true;
    }
    let mut t = [[0.0; 2]; 2];
    for w in bits.windows(2) {
        t[w[0] as usize][w[1] as usize] += 1.0;
    }
    assert!(chi2(t) > 1000.0);
}

#[test]
fn burst_path_probabilities_form_a_distribution() {
    let ch = BurstChain::new(0.1, 2.0).unwrap();
    let v = 12;
    let total: f64 = (0..1u32 << v).map(|m| ch.path_probability(&(0..v).map(|i| m >> i & 1 == 1).collect::<Vec<_>>())).sum();
    assert!((total - 1.0).abs() < 1e-12);
    // Marginal at every position equals eta.
    for pos in [0, 5, 11] {
        let m: f64 = (0..1u32 << v)
            .filter(|m| m >> pos & 1 == 1)
            .map(|m| ch.path_probability(&(0..v).map(|i| m >> i & 1 == 1).collect::<Vec<_>>()))
            .sum();
        assert!((m - 0.1).abs() < 1e-12);
    }
}

#[test]
fn measured_c_bounds_every_small_path() {
    let ch = BurstChain::new(0.01, 2.0).unwrap();
    let v = 20;
    let c = ch.measured_c(v, 4);
    assert!(c >= 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..2000 {
        let k = rng.gen_range(0..=4);
        let mut bits = vec![false; v];
        for _ in 0..k {
            bits[rng.gen_range(0..v)] = true;
        }
        let k = bits.iter().filter(|&&b| b).count();
        let ratio = ch.path_probability(&bits) / (0.01f64.powi(k as i32) * 0.99f64.powi((v - k) as i32));
        assert!(ratio <= c * (1.0 + 1e-12));
    }
    // Unit bursts are the iid model: c = 1.
    let iid = BurstChain::new(0.01, 1.0).unwrap();
    assert!((iid.measured_c(v, 4) - 1.0).abs() < 1e-9);
}

#[test]
fn sparseness_examples() {
    let one = RectangleTree::uniform(5, 1, 1);
    assert!(is_sparse(&FaultPath::default(), &one, 1).sparse);
    assert!(is_sparse(&FaultPath::new(vec![3]), &one, 1).sparse);
    let v = is_sparse(&FaultPath::new(vec![0, 3]), &one, 1);
    assert!(!v.sparse);
    assert_eq!(v.bad_per_level, vec![2, 1]);

    let two = RectangleTree::uniform(3, 2, 1);
    // One fault in each of two different 1-rectangles.
    let v = is_sparse(&FaultPath::new(vec![0, 4]), &two, 1);
    assert!(v.sparse);
    assert_eq!(v.bad_per_level, vec![2, 0, 0]);
    // Two 1-rectangles with two faults each.
    assert!(!is_sparse(&FaultPath::new(vec![0, 1, 3, 4]), &two, 1).sparse);
    // One bad 1-rectangle is tolerated.
    assert!(is_sparse(&FaultPath::new(vec![0, 1, 5]), &two, 1).sparse);
    // Every level is sparse for the empty path.
    assert_eq!(is_sparse(&FaultPath::default(), &two, 1).bad_per_level, vec![0, 0, 0]);
}

#[test]
fn tree_construction_checks_depth_and_repeats() {
    let bad = RectangleTree::new(1, vec![RectNode::Rect(vec![RectNode::Leaf(0), RectNode::Rect(vec![RectNode::Leaf(1)])])]);
    assert!(bad.is_err());
    let dup = RectangleTree::new(1, vec![RectNode::Rect(vec![RectNode::Leaf(0)]), RectNode::Rect(vec![RectNode::Leaf(0)])]);
    assert!(dup.is_err());
    let t = RectangleTree::uniform(4, 2, 3);
    assert_eq!(t.leaf_count(), 48);
    assert_eq!(t.max_rectangle(), 16);
    assert_eq!(t.leaves(), (0..48).collect::<Vec<_>>());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn prop_removing_a_fault_keeps_sparse(faults in prop::collection::vec(0usize..64, 0..10), k in 1usize..3, drop in 0usize..10) {
        let tree = RectangleTree::uniform(4, 3, 1);
        let path = FaultPath::new(faults);
        if is_sparse(&path, &tree, k).sparse && !path.is_empty() {
            let mut less = path.indices.clone();
            less.remove(drop % less.len());
            prop_assert!(is_sparse(&FaultPath::new(less), &tree, k).sparse);
        }
    }
}

#[test]
fn x_before_transversal_cnot_copies_to_the_target() {
    let code = steane();
    let g = transversal_gadget(&code, GateKind::Cnot).unwrap();
    let locs = locations(&g.circuit);
    let mut init = PauliFrame::new(2, g.circuit.wires());
    init.inject(0, 1, 0);
    let res = pauli_frame_propagate(&g.circuit, &locs, &FaultPath::default(), &[], Some(&init), &g.outputs).unwrap();
    assert_eq!(res.per_block, vec![vec![0], vec![0]]);
    // State check on |S_0>|S_0>.
    let input = g.basis_input(&[0, 0]).unwrap();
    let mut faulty = PackedState::new(&input).unwrap();
    faulty.apply_pauli(0, 1, 0);
    faulty.run(&g.circuit).unwrap();
    let mut want = g.run(&input).unwrap();
    want.apply_pauli(g.outputs[0][0], 1, 0);
    want.apply_pauli(g.outputs[1][0], 1, 0);
    let w = g.output_wires();
    assert!(faulty.pure_state(&w).unwrap().fidelity(&want.pure_state(&w).unwrap()) > 1.0 - 1e-12);
}

#[test]
fn z_through_hadamard_becomes_x() {
    let mut c = Circuit::new(2, 1);
    c.h(0);
    let mut init = PauliFrame::new(2, 1);
    init.inject(0, 0, 1);
    let res = pauli_frame_propagate(&c, &locations(&c), &FaultPath::default(), &[], Some(&init), &[vec![0]]).unwrap();
    assert_eq!(res.frame.get(0), (1, 0));
}

#[test]
fn empty_path_leaves_no_residual() {
    let c = random_clifford(2, 4, 30, 1, 1);
    let res = pauli_frame_propagate(&c, &locations(&c), &FaultPath::default(), &[], None, &[c.live_wires()]).unwrap();
    assert!(res.per_block[0].is_empty());
}

#[test]
fn toffoli_is_rejected() {
    let mut c = Circuit::new(2, 3);
    c.toffoli(0, 1, 2);
    let r = pauli_frame_propagate(&c, &locations(&c), &FaultPath::default(), &[], None, &[]);
    assert!(matches!(r, Err(Error::NonClifford(_))));
}

#[test]
fn fault_path_dump_is_sorted_by_time() {
    let mut c = Circuit::new(2, 3);
    c.cnot(0, 1);
    c.h(2);
    c.cnot(1, 2);
    let locs = locations(&c);
    let path = FaultPath::new((0..locs.len()).collect());
    let text = path.dump(&locs);
    assert_eq!(text, "0 0,1\n0 2\n1 0\n1 1,2\n");
}

fn random_state(p: u32, n: usize, rng: &mut ChaCha8Rng) -> SparseState {
    let total = (p as usize).pow(n as u32);
    let terms = (0..total).map(|mut i| {
        let d: Vec<u8> = (0..n)
            .map(|_| {
                let v = (i % p as usize) as u8;
                i /= p as usize;
                v
            })
            .collect();
        (d, C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    });
    let mut s = SparseState::from_terms(p, n, terms);
    s.normalize();
    s
}

/// Runs `c` level by level, injecting the assigned Paulis after each location's step.
fn run_with_faults(c: &Circuit, input: &SparseState, locs: &[Location], path: &FaultPath, assignment: &[Vec<(u32, u32)>]) -> PackedState {
    let mut st = PackedState::new(input).unwrap();
    let mut order: Vec<usize> = (0..c.len()).collect();
    order.sort_by_key(|&i| c.level_of(i));
    let mut it = order.into_iter().peekable();
    for t in 0..c.depth() {
        while let Some(&i) = it.peek() {
            if c.level_of(i) != t {
                break;
            }
            st.apply(&c.gates()[i]).unwrap();
            it.next();
        }
        for (j, &li) in path.indices.iter().enumerate() {
            if locs[li].time == t {
                for (&w, &(x, z)) in locs[li].qupits.iter().zip(&assignment[j]) {
                    st.apply_pauli(w, x, z);
                }
            }
        }
    }
    st
}

/// With `exact`, the circuit has no ancillas so the input stays generic and every reported qupit
/// must change the state. Blank ancillas can make some frame components act trivially.
fn frame_vs_state(cases: u64, ancillas: usize, exact: bool) {
    let mut rng = ChaCha8Rng::seed_from_u64(2024 + ancillas as u64);
    for case in 0..cases {
        let p = [2u32, 3, 5][case as usize % 3];
        let n = 3;
        let c = random_clifford(p, n, 12, ancillas, case);
        let locs = locations(&c);
        let k = rng.gen_range(1..=3);
        let path = FaultPath::new((0..k).map(|_| rng.gen_range(0..locs.len())).collect());
        let assignment: Vec<Vec<(u32, u32)>> = path
            .indices
            .iter()
            .map(|&i| {
                let mut a: Vec<(u32, u32)> = locs[i].qupits.iter().map(|_| (rng.gen_range(0..p), rng.gen_range(0..p))).collect();
                if a.iter().all(|&(x, z)| x + z == 0) {
                    a[0] = (1, 0);
                }
                a
            })
            .collect();
        let out = c.live_wires();
        let res = pauli_frame_propagate(&c, &locs, &path, &assignment, None, std::slice::from_ref(&out)).unwrap();
        let input = random_state(p, n, &mut rng);
        let faulty = run_with_faults(&c, &input, &locs, &path, &assignment).pure_state(&out).unwrap();
        let predicted = |skip: Option<usize>| {
            let mut s = PackedState::new(&input).unwrap();
            s.run(&c).unwrap();
            for &w in &out {
                if Some(w) != skip {
                    let (x, z) = res.frame.get(w);
                    s.apply_pauli(w, x, z);
                }
            }
            s.pure_state(&out).unwrap()
        };
        let f = predicted(None).fidelity(&faulty);
        assert!(f > 1.0 - 1e-9, "case {case}: fidelity {f}");
        // Each reported qupit is really affected: dropping its part breaks agreement.
        if !exact {
            continue;
        }
        for &pos in &res.per_block[0] {
            let f = predicted(Some(out[pos])).fidelity(&faulty);
            assert!(f < 1.0 - 1e-6, "case {case}: qupit {pos} reported but unaffected");
        }
    }
}

#[test]
fn frame_matches_state_difference_on_200_cases() {
    frame_vs_state(200, 0, true);
}

#[test]
fn frame_is_exact_with_blank_ancillas() {
    frame_vs_state(100, 1, false);
}
