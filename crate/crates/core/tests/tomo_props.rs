use proptest::prelude::*;
use qsl_core::linalg::{self, CMat, CVec};
use qsl_core::shortcut::{build_ts, restrict_to_qubits, textbook_toffoli_6cnot, toffoli_from_ts};
use qsl_core::tomo::*;

fn su2(a: f64, b: f64, c: f64) -> CMat {
    let rz = |t: f64| linalg::diag(&[linalg::expi(-t / 2.0), linalg::expi(t / 2.0)]);
    let ry = linalg::from_rows(
        2,
        &[linalg::r((b / 2.0).cos()), linalg::r(-(b / 2.0).sin()), linalg::r((b / 2.0).sin()), linalg::r((b / 2.0).cos())],
    );
    rz(a) * ry * rz(c)
}

fn state(re: &[f64], im: &[f64]) -> CVec {
    let v = CVec::from_iterator(re.len(), re.iter().zip(im).map(|(a, b)| linalg::c(*a, *b)));
    let n = v.norm();
    v / linalg::r(n)
}

fn amp() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, 4).prop_filter("non-zero", |v| v.iter().map(|x| x.abs()).sum::<f64>() > 0.1)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tangle_is_local_unitary_invariant(re in amp(), im in amp(), p in 0.0f64..1.0,
                                         a in prop::array::uniform6(0.0f64..6.3)) {
        let rho = linalg::outer(&state(&re, &im)).scale(p) + linalg::identity(4).scale((1.0 - p) / 4.0);
        let u = linalg::kron(&su2(a[0], a[1], a[2]), &su2(a[3], a[4], a[5]));
        let moved = &u * &rho * u.adjoint();
        prop_assert!((tangle(&rho).unwrap() - tangle(&moved).unwrap()).abs() < 1e-6);
    }

    #[test]
    fn separable_states_have_zero_tangle(a in amp(), b in amp(), c in amp(), d in amp(), w in 0.0f64..1.0) {
        let x = linalg::kron(&linalg::outer(&state(&a[..2], &b[..2])), &linalg::outer(&state(&c[..2], &d[..2])));
        let y = linalg::kron(&linalg::outer(&state(&a[2..], &b[2..])), &linalg::outer(&state(&c[2..], &d[2..])));
        let rho = x.scale(w) + y.scale(1.0 - w);
        prop_assert!(tangle(&rho).unwrap() < 1e-9);
    }

    #[test]
    fn fidelity_does_not_grow_under_mixing(re in amp(), im in amp(), q in 0.0f64..1.0) {
        let rho = linalg::outer(&state(&re, &im)).scale(q) + linalg::identity(4).scale((1.0 - q) / 4.0);
        let mixed = |p: f64| rho.scale(1.0 - p) + linalg::identity(4).scale(p / 4.0);
        let mut last = 1.0 + 1e-9;
        for k in 0..=10 {
            let f = fidelity(&rho, &mixed(k as f64 / 10.0)).unwrap();
            prop_assert!(f <= last + 1e-9);
            last = f;
        }
    }
}

#[test]
fn ideal_tables_have_unit_inquisition() {
    for c in [build_ts(), toffoli_from_ts((0, 0)).unwrap(), toffoli_from_ts((1, 0)).unwrap(), textbook_toffoli_6cnot()] {
        let u = restrict_to_qubits(&c.unitary().unwrap(), c.shape());
        let ideal = TruthTable::of_unitary(&u).unwrap();
        let t = truth_table(|i| Ok((0..8).map(|o| u[(o, i)].norm_sqr()).collect()), 3).unwrap();
        assert!((inquisition(&t, &ideal).unwrap() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn reconstruction_converges_with_shots() {
    let v = state(&[0.3, -0.5, 0.2, 0.7], &[0.1, 0.4, -0.6, 0.0]);
    let rho = linalg::outer(&v).scale(0.9) + linalg::identity(4).scale(0.025);
    let infidelity = |shots: u64| -> f64 {
        let mut acc = 0.0;
        for seed in 0..8 {
            let recs = sample_records(&[(None, rho.clone())], &Basis::all_settings(2), shots, seed).unwrap();
            let est = state_tomography(&recs).unwrap();
            acc += 1.0 - fidelity(est.matrix(), &rho).unwrap();
        }
        acc / 8.0
    };
    let sweep: Vec<f64> = [100, 10_000, 1_000_000].into_iter().map(infidelity).collect();
    assert!(sweep[0] > sweep[1] && sweep[1] > sweep[2], "{sweep:?}");
    assert!(sweep[2] < 1e-4, "{sweep:?}");
}

#[test]
fn missing_settings_and_empty_counts_are_errors() {
    let rho = linalg::identity(4).scale(0.25);
    let mut recs = sample_records(&[(None, rho)], &Basis::all_settings(2), 50, 1).unwrap();
    recs.pop();
    assert!(matches!(state_tomography(&recs), Err(qsl_core::Error::MissingSettings(_))));
    let zero: Vec<CountRecord> = MeasurementSetting::all(1)
        .iter()
        .map(|s| CountRecord { setting_id: format!("-|{}", s.bases()[0].letter()), projector_spec: s.to_string(), shots: 10, counts: 0 })
        .collect();
    assert!(matches!(state_tomography(&zero), Err(qsl_core::Error::NoCounts)));
}

#[test]
fn process_tomography_of_a_depolarized_cz_tracks_strength() {
    let cz = linalg::diag(&[linalg::ONE, linalg::ONE, linalg::ONE, -linalg::ONE]);
    let ideal = chi_of_unitary(&cz);
    let mut last = 1.0 + 1e-12;
    for p in [0.0, 0.1, 0.3, 0.6] {
        let pairs: Vec<_> = default_preparations(2)
            .iter()
            .map(|prep| {
                let rho = preparation_state(prep);
                let out = (&cz * &rho * cz.adjoint()).scale(1.0 - p) + linalg::identity(4).scale(p / 4.0);
                (rho, out)
            })
            .collect();
        let f = process_tomography(&pairs).unwrap().fidelity_to(&ideal).unwrap();
        // Closed form for a depolarized unitary: 1 − p + p/d².
        assert!((f - (1.0 - p + p / 16.0)).abs() < 1e-9, "p={p} f={f}");
        assert!(f < last);
        last = f;
    }
}
