mod common;

use common::*;
use micprob::circuits;
use micprob::frames::{self, Frame};
use micprob::linalg::{self, c, CMat, CVec, RMat};
use micprob::measurements::{self, MeasurementMap, Observable};
use micprob::random;
use micprob::states::{self, ProbVector};
use micprob::Error;
use proptest::prelude::*;

fn sic() -> Frame {
    frames::build_sic_qubit()
}

fn computational() -> Vec<CMat> {
    vec![basis_state(2, 0), basis_state(2, 1)]
}

#[test]
fn frame_effects_give_identity_matrix() {
    let f = sic();
    let m = measurements::povm_to_map(f.effects(), &f).unwrap();
    assert_mat_close(m.matrix(), &RMat::identity(4, 4), 1e-12, "own effects");
    let back = measurements::map_to_povm(&m);
    for (a, b) in back.iter().zip(f.effects()) {
        assert!(cmax_diff(a, b) < 1e-12);
    }
}

#[test]
fn computational_projectors_give_projective_read_out() {
    let f = sic();
    let m = measurements::povm_to_map(&computational(), &f).unwrap();
    assert_mat_close(m.matrix(), &circuits::projective_measure_map(), 1e-12, "M_pr");
    let back = measurements::map_to_povm(&m);
    for (a, b) in back.iter().zip(computational()) {
        assert!(cmax_diff(a, &b) < 1e-12);
    }
    let v = measurements::is_valid_measurement(&m, 1e-9).unwrap();
    assert!(v.iter().all(|x| x.is_physical));
}

#[test]
fn trivial_povm_is_all_ones_row() {
    let f = sic();
    let m = measurements::povm_to_map(&[linalg::identity(2)], &f).unwrap();
    assert_mat_close(m.matrix(), &RMat::from_element(1, 4, 1.0), 1e-12, "trivial POVM");
    assert!(cmax_diff(&measurements::map_to_povm(&m)[0], &linalg::identity(2)) < 1e-12);
}

#[test]
fn povm_errors() {
    let f = sic();
    let neg = vec![basis_state(2, 0) * c(2.0, 0.0) - basis_state(2, 1), basis_state(2, 1) * c(2.0, 0.0) - basis_state(2, 0)];
    assert!(matches!(measurements::povm_to_map(&neg, &f), Err(Error::NotPositive(_))));
    let short = vec![basis_state(2, 0)];
    assert!(matches!(measurements::povm_to_map(&short, &f), Err(Error::NotNormalized(_))));
    assert!(matches!(
        MeasurementMap::new(f.clone(), RMat::from_element(2, 4, 0.7), None),
        Err(Error::NotPseudoStochastic(_))
    ));
}

#[test]
fn indefinite_row_is_flagged() {
    let f = sic();
    let mpr = circuits::projective_measure_map();
    // shift an indefinite traceless operator between the two rows
    let delta = f.effect_coordinates(&(linalg::pauli_x() * c(0.7, 0.0))).map(|z| z.re);
    let mut m = mpr.clone();
    for j in 0..4 {
        m[(0, j)] += delta[j];
        m[(1, j)] -= delta[j];
    }
    let map = MeasurementMap::new(f.clone(), m, None).unwrap();
    let v = measurements::is_valid_measurement(&map, 1e-9).unwrap();
    let effects = measurements::map_to_povm(&map);
    for (row, e) in v.iter().zip(&effects) {
        assert_eq!(row.is_physical, linalg::min_eigenvalue(e) >= 0.0);
    }
    assert!(v.iter().all(|x| !x.is_physical));
}

#[test]
fn circled_star_examples() {
    let mut r = rng(6);
    let f = frames::random_mic(3, &mut r);
    let id = f.effect_coordinates(&linalg::identity(3));
    let x = random::random_hermitian(3, &mut r);
    let y = random::random_hermitian(3, &mut r);
    let lx = f.effect_coordinates(&x);
    let ly = f.effect_coordinates(&y);
    let got = measurements::circled_star(&id, &lx, &f).unwrap();
    assert!(linalg::max_abs_vec(&(got - &lx)) < 1e-9);
    let prod = measurements::circled_star(&lx, &ly, &f).unwrap();
    let want = f.effect_coordinates(&(&x * &y));
    assert!(linalg::max_abs_vec(&(prod.clone() - want)) < 1e-9);
    let kappa = f.trace_vector().map(|v| c(v, 0.0));
    assert!((prod.dot(&kappa) - linalg::trace_prod(&x, &y)).norm() < 1e-9);
    let pi = f.effect_coordinates(&projector(&random::random_ket(3, &mut r)));
    let sq = measurements::circled_star(&pi, &pi, &f).unwrap();
    assert!((sq.dot(&kappa) - c(1.0, 0.0)).norm() < 1e-9);
    assert!(matches!(measurements::circled_star(&CVec::zeros(4), &ly, &f), Err(Error::FrameMismatch)));
}

#[test]
fn observable_examples() {
    let f = sic();
    let z = Observable::from_operator(&linalg::pauli_z(), &f).unwrap();
    let xo = Observable::from_operator(&linalg::pauli_x(), &f).unwrap();
    let p0 = states::to_prob(&basis_state(2, 0), &f).unwrap();
    let plus = states::to_prob(&plus_state(), &f).unwrap();
    assert!((measurements::observable_mean(&z, &p0).unwrap() - 1.0).abs() < 1e-12);
    assert!(measurements::observable_mean(&z, &ProbVector::uniform(f.clone())).unwrap().abs() < 1e-12);
    assert!((measurements::observable_mean(&xo, &plus).unwrap() - 1.0).abs() < 1e-12);
    let x = RMat::from_row_slice(1, z.values().len(), z.values());
    let row = x * z.map().matrix();
    assert!((row.transpose() - z.mean_row()).abs().max() == 0.0);
    let q = ProbVector::uniform(frames::build_sic(3).unwrap());
    assert!(matches!(measurements::observable_mean(&z, &q), Err(Error::FrameMismatch)));
}

#[test]
fn tensor_rule_for_measurements() {
    let mut r = rng(14);
    let a = sic();
    let b = frames::random_mic(2, &mut r);
    let ab = frames::tensor(&a, &b);
    let ma = computational();
    let u = random::haar_unitary(2, &mut r);
    let mb: Vec<CMat> = computational().iter().map(|p| &u * p * u.adjoint()).collect();
    let joint: Vec<CMat> = ma.iter().flat_map(|x| mb.iter().map(move |y| linalg::kron(x, y))).collect();
    let lhs = measurements::povm_to_map(&joint, &ab).unwrap();
    let rhs = linalg::rkron(
        measurements::povm_to_map(&ma, &a).unwrap().matrix(),
        measurements::povm_to_map(&mb, &b).unwrap().matrix(),
    );
    assert_mat_close(lhs.matrix(), &rhs, 1e-10, "tensor rule");
}

/// Random POVM with `m` outcomes: E_i = S^{-1/2} G_i S^{-1/2}.
fn random_povm(d: usize, m: usize, r: &mut impl rand::Rng) -> Vec<CMat> {
    let gs: Vec<CMat> = (0..m).map(|_| {
        let g = random::ginibre(d, 1, r);
        &g * g.adjoint()
    }).collect();
    let mut s = CMat::zeros(d, d);
    for g in &gs {
        s += g;
    }
    let (vals, vecs) = linalg::herm_eigh(&s);
    let w = &vecs * CMat::from_diagonal(&CVec::from_iterator(d, vals.iter().map(|v| c(1.0 / v.sqrt(), 0.0)))) * vecs.adjoint();
    gs.iter().map(|g| &w * g * &w).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn outcome_probabilities_follow_born_rule(seed in any::<u64>(), d in 2usize..=3, m in 2usize..=5) {
        let mut r = rng(seed);
        let f = frames::build_sic(d).unwrap();
        let povm = random_povm(d, m.max(d), &mut r);
        let map = measurements::povm_to_map(&povm, &f).unwrap();
        let rho = random::random_density(d, d, &mut r);
        let q = map.outcome_probs(&states::to_prob(&rho, &f).unwrap()).unwrap();
        for (i, e) in povm.iter().enumerate() {
            prop_assert!((q[i] - linalg::trace_prod(e, &rho).re).abs() < 1e-10);
        }
        let back = measurements::map_to_povm(&map);
        let mut sum = CMat::zeros(d, d);
        for e in &back {
            prop_assert!(linalg::hermiticity_defect(e) < 1e-10);
            sum += e;
        }
        prop_assert!(cmax_diff(&sum, &linalg::identity(d)) < 1e-9);
        for v in measurements::is_valid_measurement(&map, 1e-9).unwrap() {
            prop_assert!(v.is_physical);
        }
    }

    #[test]
    fn effect_power_traces_match_operator_oracle(seed in any::<u64>()) {
        let mut r = rng(seed);
        let f = frames::tensor(&sic(), &sic());
        let povm = random_povm(4, 5, &mut r);
        for e in &povm {
            let row = f.effect_coordinates(e);
            let got = measurements::effect_power_traces(&row, &f);
            let mut pw = e.clone();
            for (j, g) in got.iter().enumerate() {
                if j > 0 {
                    pw = &pw * e;
                }
                prop_assert!((g - pw.trace().re).abs() < 1e-8);
            }
        }
    }
}
