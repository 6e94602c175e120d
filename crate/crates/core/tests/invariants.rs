use proptest::prelude::*;

use twistcheck_core::clifford::{build_gammas, build_structural, CliffordRep, Signature, StructuralOps};
use twistcheck_core::krein::{one_sided_fluctuation, sample_spin_plus, TwistedTripleData};
use twistcheck_core::linalg::{c64, inner, CMat, C64};
use twistcheck_core::morphism::{
    commutator_correspondence_check, first_order_correspondence_check, fluctuation_correspondence_check,
    twisted_clifford_check, MorphismPair,
};

fn signature() -> impl Strategy<Value = (CliffordRep, StructuralOps)> {
    prop::sample::select(Signature::all_up_to(6)).prop_map(|s| {
        let rep = build_gammas(s);
        let ops = build_structural(&rep).unwrap();
        (rep, ops)
    })
}

fn reals(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0..2.0f64, n)
}

fn complex_vec(n: usize) -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b)| c64(a, b)), n)
}

fn complex_mat(n: usize) -> impl Strategy<Value = CMat> {
    complex_vec(n * n).prop_map(move |v| CMat::new(n, n, v).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn clifford_relation_for_vectors((rep, _) in signature(), seed in reals(12)) {
        let n = rep.sig().dim();
        let (u, v) = (&seed[..n], &seed[6..6 + n]);
        let cu = rep.represent(u).unwrap();
        let cv = rep.represent(v).unwrap();
        let want = CMat::identity(rep.spinor_dim()).scale(c64(2.0 * rep.sig().metric(u, v), 0.0));
        prop_assert!(cu.anticommutator(&cv).dist(&want) <= 1e-12);
    }

    #[test]
    fn twisted_clifford_relation((rep, ops) in signature(), seed in reals(12)) {
        let n = rep.sig().dim();
        let r = twisted_clifford_check(&rep, &ops, &seed[..n], &seed[6..6 + n], 1e-12).unwrap();
        prop_assert!(r.passed, "{}", r.value);
    }

    #[test]
    fn pseudo_dirac_is_k_self_adjoint((rep, ops) in signature(), k in reals(6), psi in complex_vec(64), phi in complex_vec(64)) {
        let t = TwistedTripleData::fourier_doublet(&rep, &ops, &k[..rep.sig().dim()]).unwrap();
        let n = t.dim();
        let space = t.space();
        let dk = t.dk();
        let lhs = space.k_product(&psi[..n], &dk.apply(&phi[..n])).unwrap();
        let rhs = space.k_product(&dk.apply(&psi[..n]), &phi[..n]).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-12);
        // ⟨ψ, φ⟩_K = ⟨ψ, K φ⟩ and the standard product of D is the K-product of D^K.
        prop_assert!((inner(&psi[..n], &t.d.apply(&phi[..n])) - lhs).norm() <= 1e-12);
    }

    #[test]
    fn spin_plus_is_k_unitary_and_fluctuates_consistently((rep, ops) in signature(), seed in any::<u64>()) {
        let t = TwistedTripleData::clifford_symbol(&rep, &ops, &vec![0.4; rep.sig().dim()]).unwrap();
        let space = t.space();
        for s in sample_spin_plus(&rep, 2, seed).unwrap() {
            let u = s.matrix();
            prop_assert!(space.is_k_unitary(u, 1e-10).unwrap().passed);
            let gauged = &(u * &t.d) * &u.adjoint();
            let formula = &t.d + &one_sided_fluctuation(&t.d, u, &t.k);
            prop_assert!(gauged.dist(&formula) <= 1e-10 * gauged.op_norm().unwrap().max(1.0));
        }
    }

    #[test]
    fn fluctuation_correspondence_on_doublet((rep, ops) in signature(), seed in any::<u64>()) {
        let t = TwistedTripleData::fourier_doublet(&rep, &ops, &vec![0.3; rep.sig().dim()]).unwrap();
        let pair = MorphismPair::new(t);
        for s in sample_spin_plus(&rep, 2, seed).unwrap() {
            let u = s.matrix().kron(&CMat::identity(2));
            prop_assert!(fluctuation_correspondence_check(&pair, &u, 1e-10).unwrap().passed);
        }
    }

    #[test]
    fn commutator_and_first_order_correspondence(a in complex_mat(8), b in complex_mat(8), k in reals(4)) {
        let rep = build_gammas(Signature::new(1, 3).unwrap());
        let ops = build_structural(&rep).unwrap();
        let pair = MorphismPair::new(TwistedTripleData::fourier_doublet(&rep, &ops, &k).unwrap());
        prop_assert!(commutator_correspondence_check(&pair, &a, 1e-12).passed);
        prop_assert!(first_order_correspondence_check(&pair, &a, &b, 1e-11).unwrap().passed);
    }
}
