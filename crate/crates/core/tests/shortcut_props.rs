use proptest::prelude::*;
use qsl_core::linalg::{self, max_abs_diff, CMat};
use qsl_core::shortcut::*;
use qsl_core::{Circuit, Control, GateMatrix, PlacedGate, RegisterShape};
use std::f64::consts::PI;

fn pattern(n: usize) -> impl Strategy<Value = FirePattern> {
    prop::collection::vec(0usize..2, n).prop_map(|b| FirePattern::new(b).unwrap())
}

fn sized_pattern(lo: usize, hi: usize) -> impl Strategy<Value = (usize, FirePattern)> {
    (lo..=hi).prop_flat_map(|n| (Just(n), pattern(n)))
}

fn u(c: &Circuit) -> CMat {
    c.unitary().unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn theta_is_additive((n, p) in sized_pattern(1, 3), t1 in -PI..PI, t2 in -PI..PI) {
        let a = build_cn_z_theta(n, t1, &p).unwrap();
        let b = build_cn_z_theta(n, t2, &p).unwrap();
        let ab = u(&a.then(&b).unwrap());
        let sum = u(&build_cn_z_theta(n, t1 + t2, &p).unwrap());
        prop_assert!(max_abs_diff(&ab, &sum) < 1e-9);
    }

    #[test]
    fn sign_gate_is_an_involution((n, p) in sized_pattern(2, 4)) {
        let c = build_n_toffoli_sign(n, &p).unwrap();
        let sq = u(&c.then(&c).unwrap());
        prop_assert!(max_abs_diff(&sq, &linalg::identity(c.shape().total_dim())) < 1e-9);
    }

    #[test]
    fn toffoli_is_an_involution(f2 in 0usize..2, f1 in 0usize..2) {
        let c = toffoli_from_ts((f2, f1)).unwrap();
        let sq = u(&c.then(&c).unwrap());
        prop_assert!(max_abs_diff(&sq, &linalg::identity(12)) < 1e-9);
    }

    #[test]
    fn controls_added_one_at_a_time_match_all_at_once(
        q in pattern(3),
        theta in -PI..PI,
    ) {
        let inner = Circuit::from_gates(
            RegisterShape::qubits(2),
            vec![PlacedGate::controlled(GateMatrix::phase(theta), Control::on(0), 1)],
        )
        .unwrap();
        let all = add_controls(&inner, 3, &q).unwrap();
        let mut step = inner.clone();
        for (k, &bit) in q.bits().iter().enumerate() {
            step = add_controls_at(&step, k, 1, &FirePattern::new(vec![bit]).unwrap()).unwrap();
        }
        prop_assert_eq!(step.shape(), all.shape());
        prop_assert_eq!(step.two_qubit_gate_count(), all.two_qubit_gate_count());
        // Nesting order of the shelf layers differs, which only shows on
        // shelf-level inputs; those never occur.
        let qs = max_abs_diff(
            &restrict_to_qubits(&u(&step), step.shape()),
            &restrict_to_qubits(&u(&all), all.shape()),
        );
        prop_assert!(qs < 1e-9, "qubit block {qs:e}");
    }

    #[test]
    fn cn_u_matches_oracle_up_to_reported_phase(
        (n, p) in sized_pattern(1, 3),
        a in -PI..PI, b in -PI..PI, c in -PI..PI, d in -PI..PI,
    ) {
        let g = linalg::expi(d);
        let rot = linalg::from_rows(2, &[
            linalg::expi(a) * b.cos(), -linalg::expi(-c) * b.sin(),
            linalg::expi(c) * b.sin(), linalg::expi(-a) * b.cos(),
        ]).map(|x| x * g);
        let (circ, alpha) = build_cn_u(n, &rot, &p).unwrap();
        let shifted = rot.map(|x| x * linalg::expi(-alpha));
        let ideal = ideal_multi_controlled(n, &shifted, &p).unwrap();
        let got = restrict_to_qubits(&u(&circ), circ.shape());
        prop_assert!(max_abs_diff(&got, &ideal) < 1e-9);
    }
}

#[test]
fn counts_hold_up_to_six_controls() {
    for n in 1..=6 {
        let p = FirePattern::all_ones(n);
        if n >= 2 {
            assert_eq!(build_n_toffoli_sign(n, &p).unwrap().two_qubit_gate_count(), 2 * n - 1);
        }
        let c = build_cn_z_theta(n, 0.3, &p).unwrap();
        assert_eq!(c.two_qubit_gate_count(), 2 * n);
        assert_eq!(c.shape().dim(n), n + 2);
    }
}

#[test]
fn shortcut_never_leaks_out_of_the_qubit_block() {
    for n in 2..=4 {
        for p in FirePattern::enumerate(n) {
            let c = build_n_toffoli_sign(n, &p).unwrap();
            let full = u(&c);
            let sub = c.shape().qubit_subspace();
            for &j in &sub {
                let inside: f64 = sub.iter().map(|&i| full[(i, j)].norm_sqr()).sum();
                assert!((inside - 1.0).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn textbook_toffoli_matches_shortcut_with_11_pattern() {
    let text = u(&textbook_toffoli_6cnot());
    let shortcut = toffoli_from_ts((1, 1)).unwrap();
    let q = restrict_to_qubits(&u(&shortcut), shortcut.shape());
    assert!(max_abs_diff(&q, &text) < 1e-9);
}

#[test]
fn anti_controlled_inner_is_rejected() {
    // CU with fire = 1 keys on C_1 = 0 internally, so a shelved C_1 would still fire.
    let cu = build_cu_theta(0.7, 1).unwrap();
    assert!(add_controls(&cu, 1, &FirePattern::all_ones(1)).is_err());
}

#[test]
fn added_controls_match_the_oracle_for_one_and_two_targets() {
    for k in 1..=2 {
        let (inner, uk) = controlled_fixture(k, 0.7).unwrap();
        for n in 1..=3 {
            for q in FirePattern::enumerate(n) {
                let c = add_controls(&inner, n, &q).unwrap();
                assert_eq!(c.two_qubit_gate_count(), inner.two_qubit_gate_count() + 2 * n);
                assert_eq!(c.shape().dim(n), 2 + n);
                let check = check_against_oracle(&c, &added_controls_oracle(&uk, &q).unwrap()).unwrap();
                assert!(check.passes(1e-9), "k={k} n={n} q={q}: {check:?}");
            }
        }
    }
    assert_eq!(FirePattern::parse("011").unwrap().bits(), &[0, 1, 1]);
    assert!(FirePattern::parse("012").is_err());
}
