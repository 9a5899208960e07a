mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spinfac::catalog::{self, load_str, to_json};
use spinfac::clifford::{
    clifford_relation_residual, commutator_identity_residual, CliffordRep, TwoForm,
};
use spinfac::geometry::{random_frame, FrameGeometry};
use spinfac::linalg::{hermitian_defect, max_abs};
use spinfac::operators::Assembly;
use spinfac::{fuzz, Execution, Submersion};

fn frame_strategy(max_v: usize, max_h: usize) -> impl Strategy<Value = FrameGeometry> {
    (1..=max_v, 1..=max_h, any::<u64>()).prop_map(|(n_v, n_h, seed)| {
        random_frame(&mut ChaCha8Rng::seed_from_u64(seed), n_v, n_h, "prop")
    })
}

fn even_base_frame() -> impl Strategy<Value = FrameGeometry> {
    (
        1..=3usize,
        prop_oneof![Just(2usize), Just(4usize)],
        any::<u64>(),
    )
        .prop_map(|(n_v, n_h, seed)| {
            random_frame(&mut ChaCha8Rng::seed_from_u64(seed), n_v, n_h, "prop")
        })
}

fn two_form(n: usize) -> impl Strategy<Value = TwoForm> {
    prop::collection::vec(-2.0..2.0f64, n * n).prop_map(move |v| {
        TwoForm::from_fn(n, |a, b| match a.cmp(&b) {
            std::cmp::Ordering::Less => v[a * n + b],
            std::cmp::Ordering::Greater => -v[b * n + a],
            std::cmp::Ordering::Equal => 0.0,
        })
        .unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_frames_are_valid(g in frame_strategy(3, 4)) {
        prop_assert!(Submersion::try_from(g).is_ok());
    }

    #[test]
    fn bismut_formula_holds_pointwise(g in frame_strategy(3, 3)) {
        let s = Submersion::try_from(g).unwrap();
        prop_assert!(s.bismut_residual() < 1e-12);
        prop_assert!(s.lifted_base_residual() < 1e-12);
        prop_assert!(s.torsion_residual(&s.levi_civita()) < 1e-12);
    }

    #[test]
    fn tensor_symmetries(g in frame_strategy(3, 3)) {
        let s = Submersion::try_from(g).unwrap();
        let sff = s.second_fundamental_form();
        prop_assert_eq!(sff.swap12_defect(1.0), 0.0);
        prop_assert_eq!(sff.support_violation(), 0.0);
        let om = s.submersion_curvature();
        prop_assert_eq!(om.swap12_defect(-1.0), 0.0);
        prop_assert_eq!(om.support_violation(), 0.0);
        // ω(X) is a 2-form for every X
        prop_assert!(s.omega_tensor().swap23_defect(-1.0) < 1e-15);
    }

    #[test]
    fn connections_match_linear_system_oracle(g in frame_strategy(2, 3)) {
        let o = common::Oracle::new(&g);
        let s = Submersion::try_from(g).unwrap();
        let lc = s.levi_civita();
        let split = s.split_connections();
        for k in 0..o.n {
            for i in 0..o.n {
                for j in 0..o.n {
                    prop_assert!((lc.get(k, i, j) - o.gamma(k, i, j)).abs() < 1e-12);
                    prop_assert!((split.direct_sum.get(k, i, j) - o.direct_sum(k, i, j)).abs() < 1e-12);
                }
            }
        }
        for a in 0..o.n {
            prop_assert!((s.mean_curvature().v[a] - o.mean_curvature(a)).abs() < 1e-12);
        }
    }

    #[test]
    fn two_form_commutator_identity(w in (2..=6usize).prop_flat_map(two_form)) {
        let rep = CliffordRep::build(w.dim()).unwrap();
        prop_assert!(commutator_identity_residual(rep.gammas(), &w).unwrap() < 1e-12);
    }

    #[test]
    fn factorization_holds_on_even_bases(g in even_base_frame()) {
        let s = Submersion::try_from(g).unwrap();
        let asm = Assembly::build(&s).unwrap();
        prop_assert!(asm.factorization_residual().max() < 1e-12);
        prop_assert!(asm.factorized_fiber_residual().max() < 1e-12);
        prop_assert!(hermitian_defect(&asm.curvature) < 1e-13);
        if let Some(gr) = asm.factorization.grading_total() {
            prop_assert!(max_abs(&(gr * &asm.curvature + &asm.curvature * gr)) < 1e-13);
        }
    }

    #[test]
    fn frame_documents_round_trip(g in frame_strategy(3, 3)) {
        let back = load_str(&to_json(&g)).unwrap().into_frame();
        prop_assert_eq!(back, g);
    }
}

#[test]
fn clifford_representations_for_every_size() {
    for n in 1..=8 {
        let a = CliffordRep::build(n).unwrap();
        let b = CliffordRep::build(n).unwrap();
        assert_eq!(a, b);
        assert!(clifford_relation_residual(a.gammas()) < 1e-12);
        assert!(a.self_adjoint_unitary_residual() < 1e-12);
        assert_eq!(a.grading_residual().is_some(), n % 2 == 0);
        assert!(a.grading_residual().unwrap_or(0.0) < 1e-12);
    }
}

#[test]
fn fuzz_reports_do_not_depend_on_execution_mode() {
    let seq = fuzz(24, 11, 1e-12, Execution::Sequential).unwrap();
    let par = fuzz(24, 11, 1e-12, Execution::Parallel).unwrap();
    assert_eq!(seq, par);
    assert!(seq.pass);
    assert_eq!(seq.to_json(), par.to_json());
}

#[test]
fn catalog_frames_round_trip() {
    for g in [
        catalog::hopf(),
        catalog::heisenberg(),
        catalog::warped(),
        catalog::flat_torus(2, 2).unwrap(),
    ] {
        assert_eq!(load_str(&to_json(&g)).unwrap().into_frame(), g);
    }
}
