use std::collections::BTreeMap;

use twistcheck_core::clifford::{build_gammas, build_structural, Signature};
use twistcheck_core::geometry::{
    christoffel, christoffel_relation_check, christoffel_with, conformal_phi, dirac_apply_pseudo,
    dirac_decomposition_check, fd_convergence_ratio, metric_compatibility_residual, rewrite_check,
    vielbein_residual, MetricField, SpinorFieldSample, Stencil,
};
use twistcheck_core::linalg::{vec_norm, C64};

const H: f64 = 1e-3;

fn fam(name: &str) -> MetricField {
    MetricField::family(name, &BTreeMap::new()).unwrap()
}

fn points(m: &MetricField) -> Vec<Vec<f64>> {
    let mut pts = vec![vec![0.3, -0.2, 0.5, 0.1], vec![-0.4, 0.1, 0.2, 0.6]];
    pts.extend(m.interior_points(3, 11, 0.05));
    pts
}

const CURVED: [&str; 3] = ["lorentz_wave", "conformal", "split_exp"];

#[test]
fn christoffel_relation_on_three_families() {
    for name in CURVED {
        let m = fam(name);
        for x in points(&m) {
            let r = christoffel_relation_check(&m, &x, H, 1e-5).unwrap();
            assert!(r.passed, "{name} at {x:?}: {}", r.value);
        }
    }
}

#[test]
fn metric_compatibility_for_g_and_gr() {
    for name in CURVED {
        let m = fam(name);
        for x in points(&m) {
            for use_gr in [false, true] {
                let r = metric_compatibility_residual(&m, use_gr, &x, H).unwrap();
                assert!(r <= 1e-5, "{name} gr={use_gr}: {r}");
            }
        }
    }
}

#[test]
fn reflection_is_an_isometry() {
    for name in MetricField::family_names() {
        let m = fam(name);
        let x: Vec<f64> = vec![0.1; m.dim()];
        assert_eq!(m.reflection_isometry_residual(&x), 0.0, "{name}");
    }
}

#[test]
fn vielbein_orthonormal() {
    for name in CURVED {
        let m = fam(name);
        for x in points(&m) {
            assert!(vielbein_residual(&m, &x).unwrap() <= 1e-10);
        }
    }
}

#[test]
fn second_order_convergence() {
    for name in CURVED {
        let m = fam(name);
        for use_gr in [false, true] {
            let ratio = fd_convergence_ratio(&m, use_gr, &[0.3, -0.2, 0.5, 0.1], H).unwrap();
            assert!((3.5..=4.5).contains(&ratio), "{name}: {ratio}");
        }
    }
}

#[test]
fn stencils_agree_on_smooth_metric() {
    let m = fam("lorentz_wave");
    let x = [0.3, -0.2, 0.5, 0.1];
    let fourth = christoffel_with(&m, false, &x, 1e-2, Stencil::Fourth).unwrap();
    let sixth = christoffel_with(&m, false, &x, 1e-2, Stencil::Sixth).unwrap();
    let second = christoffel(&m, false, &x, 1e-4).unwrap();
    assert!(fourth.values.max_abs_diff(&sixth.values) < 1e-8);
    assert!(second.values.max_abs_diff(&sixth.values) < 1e-8);
}

#[test]
fn rewrite_holds_exactly() {
    for name in CURVED {
        let m = fam(name);
        for x in points(&m) {
            let r = rewrite_check(&m, &x, H, 1e-12).unwrap();
            assert!(r.passed, "{name}: {}", r.value);
        }
    }
}

#[test]
fn decomposition_on_curved_families() {
    let cases = [("lorentz_wave", (1, 3)), ("conformal", (1, 3)), ("split_exp", (2, 2)), ("euclidean_curved", (4, 0))];
    for (name, (p, q)) in cases {
        let m = fam(name);
        let rep = build_gammas(Signature::new(p, q).unwrap());
        let ops = build_structural(&rep).unwrap();
        let psi = SpinorFieldSample::trig_fixture(rep.spinor_dim());
        for x in points(&m) {
            let d = dirac_decomposition_check(&m, &rep, &ops, &psi, &x, H, 1e-4).unwrap();
            assert!(d.residual.passed, "{name}: {}", d.residual.value);
            assert_eq!(d.phase, -1, "{name}");
        }
    }
}

#[test]
fn conformal_covariance_of_pseudo_dirac() {
    // D_{e^{2φ}η}(e^{−(n−1)φ/2} ψ) = e^{−(n+1)φ/2} D_η ψ in dimension n = 4.
    let rep = build_gammas(Signature::new(1, 3).unwrap());
    let psi = SpinorFieldSample::trig_fixture(4);
    let a = 0.1;
    let lifted = psi.weighted(move |x| (-1.5 * conformal_phi(a, x)).exp());
    for x in points(&fam("conformal")) {
        let curved = dirac_apply_pseudo(&fam("conformal"), &rep, &lifted, &x, H).unwrap();
        let flat = dirac_apply_pseudo(&fam("flat"), &rep, &psi, &x, H).unwrap();
        let w = (-2.5 * conformal_phi(a, &x)).exp();
        let diff: Vec<C64> = curved.iter().zip(&flat).map(|(c, f)| c - f * w).collect();
        assert!(vec_norm(&diff) < 1e-5, "{}", vec_norm(&diff));
    }
}

#[test]
fn richardson_bound_on_dirac() {
    let m = fam("lorentz_wave");
    let rep = build_gammas(Signature::new(1, 3).unwrap());
    let psi = SpinorFieldSample::trig_fixture(4);
    let x = [0.3, -0.2, 0.5, 0.1];
    let coarse = dirac_apply_pseudo(&m, &rep, &psi, &x, 2e-3).unwrap();
    let fine = dirac_apply_pseudo(&m, &rep, &psi, &x, 1e-3).unwrap();
    let extrapolated: Vec<C64> = fine.iter().zip(&coarse).map(|(f, c)| (f * 4.0 - c) / 3.0).collect();
    let err: Vec<C64> = fine.iter().zip(&extrapolated).map(|(f, e)| f - e).collect();
    assert!(vec_norm(&err) < 1e-5, "{}", vec_norm(&err));
}
