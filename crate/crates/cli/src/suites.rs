//! Suites: each maps library checks to report records.

use std::collections::BTreeMap;
use std::time::Instant;

use twistcheck_core::clifford::{build_gammas, build_structural, verify_structural, CliffordRep, Signature, StructuralOps};
use twistcheck_core::geometry::{
    christoffel, christoffel_relation_check, conformal_phi, dirac_apply_pseudo, dirac_decomposition_check,
    fd_convergence_ratio, metric_compatibility_residual, rewrite_check, vielbein_residual, MetricField,
    SpinorFieldSample, DEFAULT_STEP,
};
use twistcheck_core::krein::{
    adjoint_checks, gauge_transform, k_product_invariance_check, one_sided_fluctuation, sample_spin_plus,
    twisted_leibniz_check, SpinElement, TwistedTripleData,
};
use twistcheck_core::linalg::{c64, gaussian_states, gaussian_vectors, vec_norm, CMat, C64};
use twistcheck_core::morphism::{
    commutator_correspondence_check, first_order_correspondence_check, fluctuation_correspondence_check,
    generalized_clifford_check, reflection_parity_check, selfadjoint_equivalence_check, symbol_norm_probe,
    trace_metric_morph_check, twisted_clifford_check, twisted_grading_check, v_k_constructions_check, MorphismPair,
};
use twistcheck_core::product::{
    assemble_product, constraint_check_o, derivation_split_check, dirac_mass_shape_check, fermionic_action,
    o_constraint_scan, o_scan_consistent, product_first_order_check, product_fluctuation_check,
    product_gauge_formula_check, signature_emergence, EmergenceRow, FiniteTriple, ProductTripleData,
};
use twistcheck_core::{Error, Result};

use crate::config::{Suite, SuiteConfig};
use crate::report::{Record, Report};

type Outcome = Result<(f64, String)>;

fn value(v: f64) -> Outcome {
    Ok((v, String::new()))
}

enum Bound {
    Class(&'static str),
    Fixed(f64),
}
use Bound::{Class, Fixed};

struct Run<'a> {
    cfg: &'a SuiteConfig,
    suite: &'static str,
    records: Vec<Record>,
}

impl Run<'_> {
    fn tol(&self, class: &str) -> f64 {
        self.cfg.tol(class)
    }

    fn check(&mut self, id: String, anchor: &str, bound: Bound, f: impl FnOnce() -> Outcome) {
        let tolerance = match bound {
            Class(c) => self.tol(c),
            Fixed(v) => v,
        };
        let start = Instant::now();
        let out = f();
        let runtime_ms = start.elapsed().as_secs_f64() * 1e3;
        let (residual, passed, detail) = match out {
            Ok((v, d)) if v.is_finite() => (Some(v), v <= tolerance, d),
            Ok((v, d)) => (None, false, format!("non-finite residual {v}; {d}")),
            Err(e) => (None, false, e.to_string()),
        };
        self.records.push(Record {
            suite: self.suite.to_string(),
            check_id: id,
            anchor: anchor.to_string(),
            residual,
            tolerance,
            passed,
            detail,
            runtime_ms,
        });
    }

    fn fail(&mut self, id: String, anchor: &str, e: Error) {
        self.check(id, anchor, Fixed(0.0), || Err(e));
    }
}

fn id(label: &str, name: &str) -> String {
    format!("{label}/{name}")
}

const COEFFS: [f64; 6] = [0.7, -0.3, 0.4, 1.1, 0.2, -0.6];

fn coeffs(n: usize) -> Vec<f64> {
    (0..n).map(|a| COEFFS[a % COEFFS.len()]).collect()
}

fn count_bad(items: &[(&str, bool)]) -> f64 {
    items.iter().filter(|(_, ok)| !ok).count() as f64
}

fn structural(run: &mut Run, label: &str, sig: Signature) -> Option<(CliffordRep, StructuralOps)> {
    let rep = build_gammas(sig);
    match build_structural(&rep) {
        Ok(ops) => Some((rep, ops)),
        Err(e) => {
            run.fail(id(label, "structural-build"), "structural-operators", e);
            None
        }
    }
}

fn spins(rep: &CliffordRep, count: usize, seed: u64) -> Result<Vec<SpinElement>> {
    sample_spin_plus(rep, count, seed)
}

fn worst(values: impl IntoIterator<Item = Result<f64>>) -> Result<f64> {
    values.into_iter().try_fold(0.0f64, |acc, v| Ok(acc.max(v?)))
}

/// Runs every selected suite in declared order.
pub fn run(cfg: &SuiteConfig) -> Report {
    let mut records = Vec::new();
    for suite in cfg.expanded_suites() {
        let mut r = Run { cfg, suite: suite.name(), records: Vec::new() };
        match suite {
            Suite::Clifford => cfg.signatures().into_iter().for_each(|s| clifford_suite(&mut r, s)),
            Suite::Krein => cfg.signatures().into_iter().for_each(|s| krein_suite(&mut r, s)),
            Suite::Morphism => cfg.signatures().into_iter().for_each(|s| morphism_suite(&mut r, s)),
            Suite::Geometry => geometry_suite(&mut r),
            Suite::Product => product_suite(&mut r),
            Suite::Emergence => emergence_suite(&mut r),
            Suite::All => unreachable!("expanded away"),
        }
        records.append(&mut r.records);
    }
    Report::new(cfg.clone(), records)
}

fn clifford_suite(run: &mut Run, sig: Signature) {
    let l = sig.to_string();
    let rep = build_gammas(sig);
    run.check(id(&l, "gamma-anticommutator"), "clifford-anticommutator", Class("construction"), || {
        value(rep.anticommutator_residual())
    });
    run.check(id(&l, "gamma-unitarity"), "gamma-unitarity", Class("construction"), || value(rep.unitarity_residual()));
    run.check(id(&l, "gamma-adjoint-sign"), "gamma-adjoint-metric-sign", Class("construction"), || {
        value(rep.hermiticity_residual())
    });
    let Some((rep, ops)) = structural(run, &l, sig) else { return };
    let tol = run.tol("construction");
    for (name, r) in verify_structural(&rep, &ops, tol).entries() {
        let check = format!("structural-{}", name.replace('_', "-"));
        run.check(id(&l, &check), &check, Class("construction"), || value(r.value));
    }
    let seed = run.cfg.seed;
    run.check(id(&l, "reflection-parity"), "twist-implements-reflection", Class("construction"), || {
        Ok((reflection_parity_check(&rep, &ops, 100, seed, tol)?.value, "100 random vectors".into()))
    });
    let n = sig.dim();
    run.check(id(&l, "sign-cross-relations-symbol"), "sign-table-cross-relations", Fixed(0.0), || {
        let t = TwistedTripleData::clifford_symbol(&rep, &ops, &coeffs(n))?.sign_table(tol)?;
        Ok((count_bad(&t.cross_relations()), t.to_string()))
    });
    run.check(id(&l, "sign-cross-relations-doublet"), "sign-table-cross-relations", Fixed(0.0), || {
        let t = TwistedTripleData::fourier_doublet(&rep, &ops, &coeffs(n))?.sign_table(tol)?;
        Ok((count_bad(&t.cross_relations()), t.to_string()))
    });
    if (sig.p(), sig.q()) == (1, 3) {
        run.check(id(&l, "ko6-pseudo-row"), "ko-dimension-six-pseudo-row", Fixed(0.0), || {
            let t = TwistedTripleData::fourier_doublet(&rep, &ops, &coeffs(n))?.sign_table(tol)?;
            let row = t.pseudo_row().ok_or_else(|| Error::Construction("pseudo row incomplete".into()))?;
            let bad = row.iter().zip([1, 1, -1, -1]).filter(|(a, b)| **a != *b).count();
            Ok((bad as f64, format!("pseudo row {row:?}")))
        });
    }
}

fn krein_suite(run: &mut Run, sig: Signature) {
    let l = sig.to_string();
    let Some((rep, ops)) = structural(run, &l, sig) else { return };
    let t = match TwistedTripleData::clifford_symbol(&rep, &ops, &coeffs(sig.dim())) {
        Ok(t) => t,
        Err(e) => return run.fail(id(&l, "symbol-triple"), "twisted-triple", e),
    };
    let space = t.space();
    let seed = run.cfg.seed;
    let tol = run.tol("amplified");
    for (k, name) in ["adjoint-pairing", "adjoint-involution"].into_iter().enumerate() {
        run.check(id(&l, name), &format!("krein-{name}"), Class("amplified"), || {
            Ok((adjoint_checks(&space, 20, seed, tol)?[k].1.value, "20 random operators".into()))
        });
    }
    let sample = spins(&rep, 20, seed);
    run.check(id(&l, "spin-plus-k-unitary"), "spin-plus-k-unitarity", Class("amplified"), || {
        let s = sample.clone()?;
        let w = worst(s.iter().map(|x| Ok(space.is_k_unitary(x.matrix(), tol)?.value)))?;
        let max_norm = worst(s.iter().map(|x| x.matrix().op_norm()))?;
        Ok((w, format!("20 elements, max norm {max_norm:.2}")))
    });
    run.check(id(&l, "k-product-invariance"), "k-product-spin-invariance", Class("amplified"), || {
        let units: Vec<CMat> = sample.clone()?.iter().map(|x| x.matrix().clone()).collect();
        value(k_product_invariance_check(&space, &units, 5, seed, tol)?.value)
    });
    run.check(id(&l, "twisted-leibniz"), "twisted-leibniz-rule", Class("compound"), || {
        let v = gaussian_vectors(sig.dim(), 3, seed);
        let n = rep.spinor_dim();
        let a = &rep.represent(&v[0])? + &CMat::identity(n).scale(c64(0.5, 0.2));
        let b = &rep.represent(&v[1])? * &rep.represent(&v[2])?;
        value(twisted_leibniz_check(&t.d, &t.k, &a, &b, tol).value)
    });
    run.check(id(&l, "one-sided-fluctuation"), "single-sided-fluctuation", Class("amplified"), || {
        value(worst(sample.clone()?.iter().map(|x| {
            let u = x.matrix();
            let gauged = &(u * &t.d) * &u.adjoint();
            Ok(gauged.dist(&(&t.d + &one_sided_fluctuation(&t.d, u, &t.k))))
        }))?)
    });
    run.check(id(&l, "gauge-self-adjoint"), "gauge-transform-self-adjoint", Class("amplified"), || {
        value(worst(sample.clone()?.iter().map(|x| {
            let g = gauge_transform(&t.d, x.matrix(), &t.j, &t.k)?;
            Ok(g.dist(&g.adjoint()))
        }))?)
    });
    run.check(id(&l, "twisted-grading"), "twisted-anticommutator-grading", Class("construction"), || {
        value(t.invariant_residuals(tol)[1].1.value)
    });
    run.check(id(&l, "gauge-formula-fluctuation"), "gauge-vs-formula-fluctuation", Class("amplified"), || {
        let pt = doublet_product(&rep, &ops, c64(1.0, 0.0))?;
        let u_f = pt.finite.algebra_unitary(c64(0.6, 0.8), c64(0.0, -1.0));
        Ok((product_gauge_formula_check(&pt, c64(0.0, 1.0), &u_f, tol)?.value, "product with the finite triple".into()))
    });
}

fn doublet_product(rep: &CliffordRep, ops: &StructuralOps, mass: C64) -> Result<ProductTripleData> {
    let manifold = TwistedTripleData::fourier_doublet(rep, ops, &coeffs(rep.sig().dim()))?;
    assemble_product(manifold, FiniteTriple::ko6(mass)?)
}

fn morphism_suite(run: &mut Run, sig: Signature) {
    let l = sig.to_string();
    let Some((rep, ops)) = structural(run, &l, sig) else { return };
    let pair = match TwistedTripleData::fourier_doublet(&rep, &ops, &coeffs(sig.dim())) {
        Ok(t) => MorphismPair::new(t),
        Err(e) => return run.fail(id(&l, "doublet-triple"), "twisted-triple", e),
    };
    let seed = run.cfg.seed;
    let tol = run.tol("construction");
    let n2 = pair.twisted.dim();
    let elements = || -> Result<(CMat, CMat)> {
        let v = gaussian_vectors(sig.dim(), 2, seed);
        let id2 = CMat::identity(2);
        let a = &rep.represent(&v[0])?.kron(&id2) + &CMat::identity(n2).scale(c64(0.0, 0.3));
        let b = rep.represent(&v[1])?.kron(&id2);
        Ok((a, b))
    };
    run.check(id(&l, "involution"), "k-morphism-involution", Class("involution"), || {
        value(pair.involution_residual(tol)?.value)
    });
    run.check(id(&l, "selfadjoint-equivalence"), "self-adjoint-vs-k-self-adjoint", Class("construction"), || {
        let e = selfadjoint_equivalence_check(&pair, tol)?;
        Ok((e.residual.value, format!("twisted {:.1e}, pseudo {:.1e}", e.twisted, e.pseudo)))
    });
    run.check(id(&l, "commutator-correspondence"), "twisted-commutator-correspondence", Class("amplified"), || {
        value(commutator_correspondence_check(&pair, &elements()?.0, tol).value)
    });
    run.check(id(&l, "first-order-correspondence"), "first-order-correspondence", Class("amplified"), || {
        let (a, b) = elements()?;
        value(first_order_correspondence_check(&pair, &a, &b, tol)?.value)
    });
    let sample = spins(&rep, 5, seed);
    run.check(id(&l, "fluctuation-correspondence"), "fluctuation-correspondence", Class("amplified"), || {
        let id2 = CMat::identity(2);
        value(worst(
            sample.clone()?.iter().map(|x| Ok(fluctuation_correspondence_check(&pair, &x.matrix().kron(&id2), tol)?.value)),
        )?)
    });
    run.check(id(&l, "v-k-constructions"), "reflected-gauge-unitary", Class("amplified"), || {
        value(worst(sample.clone()?.iter().map(|x| Ok(v_k_constructions_check(&ops.k, &ops.j, x.matrix(), tol)?.value)))?)
    });
    run.check(id(&l, "twisted-clifford"), "twisted-clifford-relation", Class("compound"), || {
        let v = gaussian_vectors(sig.dim(), 20, seed);
        let w = worst(v.chunks(2).map(|p| Ok(twisted_clifford_check(&rep, &ops, &p[0], &p[1], tol)?.value)))?;
        Ok((w, "10 random pairs".into()))
    });
    run.check(id(&l, "generalized-clifford"), "generalized-clifford-relation", Class("compound"), || {
        value(generalized_clifford_check(&rep, &ops, tol).value)
    });
    if sig.q() == 0 {
        run.check(id(&l, "euclidean-collapse"), "generalized-clifford-euclidean-collapse", Class("compound"), || {
            let k_id = ops.k.dist(&CMat::identity(rep.spinor_dim()));
            Ok((k_id.max(generalized_clifford_check(&rep, &ops, tol).value), "K = I and s_ab = 1".into()))
        });
    }
    run.check(id(&l, "trace-metric"), "trace-metric-morph", Class("compound"), || {
        value(trace_metric_morph_check(&rep, &ops, 50, seed, tol)?.value)
    });
    run.check(id(&l, "twisted-grading-sign"), "twisted-grading-sign", Class("construction"), || {
        let t = pair.sign_table(tol)?;
        value(twisted_grading_check(&pair, t.eps_prime, tol).value)
    });
    run.check(id(&l, "sign-mapping"), "sign-parameter-mapping", Fixed(0.0), || {
        let t = pair.sign_table(tol)?;
        Ok((count_bad(&t.cross_relations()), t.to_string()))
    });
    run.check(id(&l, "symbol-norm-basis"), "symbol-norm-on-basis", Class("construction"), || {
        let n = sig.dim();
        value(worst((0..n).map(|a| {
            let e: Vec<f64> = (0..n).map(|b| if a == b { 1.0 } else { 0.0 }).collect();
            Ok((symbol_norm_probe(&rep, &ops, &e)?.norm - 1.0).abs())
        }))?)
    });
}

fn signature_of(metric: &MetricField) -> Result<Signature> {
    let p = metric.r_signs().iter().filter(|s| **s > 0.0).count();
    Signature::new(p, metric.dim() - p)
}

fn geometry_suite(run: &mut Run) {
    let cfg = run.cfg;
    let h = cfg.fd_step;
    let seed = cfg.seed;
    let mut families: Vec<(String, BTreeMap<String, f64>)> = vec![(cfg.metric.clone(), cfg.params.clone())];
    for name in ["lorentz_wave", "conformal", "split_exp"] {
        if name != cfg.metric {
            families.push((name.to_string(), BTreeMap::new()));
        }
    }
    for (name, params) in families {
        let m = match MetricField::family(&name, &params) {
            Ok(m) => m,
            Err(e) => {
                run.fail(id(&name, "family"), "metric-family", e);
                continue;
            }
        };
        geometry_family(run, &name, &m, h, seed);
    }
    flat_dirac_oracles(run, h);
}

fn geometry_family(run: &mut Run, l: &str, m: &MetricField, h: f64, seed: u64) {
    let pts = m.interior_points(5, seed, (4.0 * h).max(0.05));
    let diagonal = pts.iter().all(|x| m.is_diagonal_at(x));
    let note = if diagonal { String::new() } else { "non-diagonal; frame checks skipped".into() };
    run.check(id(l, "christoffel-symmetry"), "christoffel-symmetry", Class("fd"), || {
        let w = worst(pts.iter().flat_map(|x| {
            [false, true].map(|gr| christoffel(m, gr, x, h).map(|c| c.symmetry_residual()))
        }))?;
        Ok((w, note.clone()))
    });
    run.check(id(l, "metric-compatibility"), "levi-civita-compatibility", Class("fd"), || {
        value(worst(pts.iter().flat_map(|x| [false, true].map(|gr| metric_compatibility_residual(m, gr, x, h))))?)
    });
    run.check(id(l, "christoffel-relation"), "reflected-christoffel-relation", Class("fd"), || {
        let w = worst(pts.iter().map(|x| Ok(christoffel_relation_check(m, x, h, 0.0)?.value)))?;
        Ok((w, "5 interior points".into()))
    });
    run.check(id(l, "reflected-isometry"), "reflection-isometry", Class("construction"), || {
        value(pts.iter().map(|x| m.reflection_isometry_residual(x)).fold(0.0, f64::max))
    });
    run.check(id(l, "fd-convergence"), "second-order-convergence", Fixed(0.5), || {
        let ratio = fd_convergence_ratio(m, false, &pts[0], h)?;
        if ratio.is_nan() {
            return Ok((0.0, "finite differences exact; ratio undefined".into()));
        }
        Ok(((ratio - 4.0).abs(), format!("error ratio {ratio:.3} under step halving")))
    });
    if !diagonal {
        return;
    }
    run.check(id(l, "vielbein-orthonormality"), "vielbein-orthonormality", Class("amplified"), || {
        value(worst(pts.iter().map(|x| vielbein_residual(m, x)))?)
    });
    run.check(id(l, "frame-rewrite"), "reflected-frame-coefficients", Class("fd"), || {
        value(worst(pts.iter().map(|x| Ok(rewrite_check(m, x, h, 0.0)?.value)))?)
    });
    run.check(id(l, "dirac-decomposition"), "dirac-operator-decomposition", Class("dirac"), || {
        let sig = signature_of(m)?;
        let rep = build_gammas(sig);
        let ops = build_structural(&rep)?;
        let psi = SpinorFieldSample::trig_fixture(rep.spinor_dim());
        let mut phases = Vec::new();
        let w = worst(pts.iter().map(|x| {
            let d = dirac_decomposition_check(m, &rep, &ops, &psi, x, h, 0.0)?;
            phases.push(d.phase);
            Ok(d.residual.value)
        }))?;
        phases.dedup();
        Ok((w, format!("measured phase {phases:?}")))
    });
}

fn flat_dirac_oracles(run: &mut Run, h: f64) {
    let x = [0.3, -0.2, 0.5, 0.1];
    let rep = build_gammas(Signature::new(1, 3).expect("valid signature"));
    run.check("flat/dirac-plane-wave".into(), "plane-wave-dirac", Class("fd"), || {
        let k = vec![0.7, -0.4, 1.1, 0.3];
        let psi0 = vec![c64(1.0, 0.0), c64(0.0, 0.5), c64(-0.3, 0.2), c64(0.1, 0.0)];
        let flat = MetricField::family("flat", &BTreeMap::new())?;
        let got = dirac_apply_pseudo(&flat, &rep, &SpinorFieldSample::plane_wave(k.clone(), psi0.clone()), &x, h)?;
        let phase: f64 = x.iter().zip(&k).map(|(a, b)| a * b).sum();
        let want: Vec<C64> =
            rep.represent(&k)?.apply(&psi0).iter().map(|z| -z * c64(phase.cos(), phase.sin())).collect();
        let diff: Vec<C64> = got.iter().zip(&want).map(|(a, b)| a - b).collect();
        Ok((vec_norm(&diff), "-k_mu gamma^mu psi0".into()))
    });
    run.check("conformal/dirac-covariance".into(), "conformal-covariance", Class("fd"), || {
        let a = 0.1;
        let conformal = MetricField::family("conformal", &[("a".to_string(), a)].into())?;
        let flat = MetricField::family("flat", &BTreeMap::new())?;
        let psi = SpinorFieldSample::trig_fixture(4);
        let lifted = psi.weighted(move |y| (-1.5 * conformal_phi(a, y)).exp());
        let curved = dirac_apply_pseudo(&conformal, &rep, &lifted, &x, h.min(DEFAULT_STEP))?;
        let base = dirac_apply_pseudo(&flat, &rep, &psi, &x, h.min(DEFAULT_STEP))?;
        let w = (-2.5 * conformal_phi(a, &x)).exp();
        let diff: Vec<C64> = curved.iter().zip(&base).map(|(c, b)| c - b * w).collect();
        value(vec_norm(&diff))
    });
}

fn product_suite(run: &mut Run) {
    let sig = Signature::new(1, 3).expect("valid signature");
    let l = "(1,3)xKO6";
    let Some((rep, ops)) = structural(run, l, sig) else { return };
    let seed = run.cfg.seed;
    let tol = run.tol("construction");
    let mass = c64(0.6, -0.8);
    match FiniteTriple::ko6(mass) {
        Ok(f) => match f.invariant_residuals(tol) {
            Ok(rs) => {
                for (name, r) in rs {
                    run.check(id(l, &format!("finite: {name}")), "finite-ko6-invariants", Class("construction"), || {
                        value(r.value)
                    });
                }
            }
            Err(e) => run.fail(id(l, "finite-invariants"), "finite-ko6-invariants", e),
        },
        Err(e) => return run.fail(id(l, "finite-build"), "finite-ko6-invariants", e),
    }
    let pt = match doublet_product(&rep, &ops, mass) {
        Ok(pt) => pt,
        Err(e) => return run.fail(id(l, "assemble"), "product-assembly", e),
    };
    match pt.invariant_residuals(tol) {
        Ok(rs) => {
            for (name, r) in rs {
                run.check(id(l, name), "product-assembly", Class("compound"), || value(r.value));
            }
        }
        Err(e) => run.fail(id(l, "product-invariants"), "product-assembly", e),
    }
    run.check(id(l, "product-sign-table"), "product-sign-table", Fixed(0.0), || {
        let t = pt.sign_table(tol)?;
        Ok((count_bad(&t.cross_relations()), t.to_string()))
    });
    let table = ops_sign_table(&ops, tol);
    run.check(id(l, "o-constraint-k"), "o-constraints", Class("construction"), || {
        let (eps, eps_prime) = table.clone()?;
        let rs = constraint_check_o(&ops.k, &ops.j, &ops.gamma, eps, eps_prime, tol);
        value(rs.iter().map(|(_, r)| r.value).fold(0.0, f64::max))
    });
    run.check(id(l, "o-constraint-control"), "o-constraints", Fixed(0.0), || {
        let (eps, eps_prime) = table.clone()?;
        let rs = constraint_check_o(&ops.gamma, &ops.j, &ops.gamma, eps, eps_prime, tol);
        let failing: Vec<&str> = rs.iter().filter(|(_, r)| !r.passed).map(|(n, _)| *n).collect();
        Ok((if failing.is_empty() { 1.0 } else { 0.0 }, format!("grading rejected by {failing:?}")))
    });
    run.check(id(l, "o-constraint-scan"), "o-constraints", Fixed(0.0), || {
        let rows = o_constraint_scan(&rep, &ops, tol)?;
        let admitted: Vec<&str> = rows.iter().filter(|r| r.constraints_hold).map(|r| r.label.as_str()).collect();
        Ok((if o_scan_consistent(&rows) { 0.0 } else { 1.0 }, format!("admitted {admitted:?}")))
    });
    run.check(id(l, "derivation-split"), "derivation-splitting", Class("construction"), || {
        let n = pt.manifold.dim();
        let v = &gaussian_vectors(4, 1, seed)[0];
        let manifold_side =
            [CMat::identity(n), CMat::identity(n).scale(c64(0.3, -1.2)), rep.represent(v)?.kron(&CMat::identity(2))];
        let mut finite_side = pt.finite.algebra_gens.clone();
        finite_side.push(CMat::identity(pt.finite.dim()));
        let mut w: f64 = 0.0;
        for a1 in &manifold_side {
            for a2 in &finite_side {
                w = w.max(derivation_split_check(&pt, a1, a2, tol)?.value);
            }
        }
        value(w)
    });
    run.check(id(l, "product-first-order"), "product-first-order", Class("construction"), || {
        value(product_first_order_check(&pt, &[c64(1.0, 0.0), c64(0.2, -0.7)], tol)?.value)
    });
    let amplified = run.tol("amplified");
    run.check(id(l, "product-fluctuation"), "product-fluctuation", Class("amplified"), || {
        let u_f = pt.finite.algebra_unitary(c64(0.0, 1.0), c64(-0.6, 0.8));
        let id2 = CMat::identity(2);
        let w = worst(
            spins(&rep, 5, seed)?
                .iter()
                .map(|x| Ok(product_fluctuation_check(&pt, &x.matrix().kron(&id2), &u_f, amplified)?.value)),
        )?;
        Ok((w, "5 spin elements".into()))
    });
    run.check(id(l, "product-gauge-formula"), "gauge-vs-formula-fluctuation", Class("amplified"), || {
        let u_f = pt.finite.algebra_unitary(c64(0.6, -0.8), c64(0.0, 1.0));
        value(product_gauge_formula_check(&pt, c64(0.8, 0.6), &u_f, amplified)?.value)
    });
    run.check(id(l, "fermionic-action"), "fermionic-action-split", Class("construction"), || {
        let (n, nf) = (pt.manifold.dim(), pt.finite.dim());
        let big = gaussian_states(n, 100, seed);
        let small = gaussian_states(nf, 100, seed ^ 0x5eed);
        let w = worst((0..50).map(|i| {
            Ok(fermionic_action(&pt, &big[2 * i], &small[2 * i], &big[2 * i + 1], &small[2 * i + 1])?.residual)
        }))?;
        Ok((w, "50 random product states".into()))
    });
    run.check(id(l, "mass-shape"), "dirac-mass-term", Class("construction"), || {
        let gamma0 = build_gammas(Signature::new(4, 0)?).gamma(0).clone();
        let manifold = TwistedTripleData::clifford_symbol(&rep, &ops, &coeffs(4))?;
        let bare = assemble_product(manifold, FiniteTriple::ko6(mass)?)?;
        let psi1 = &gaussian_states(4, 2, seed);
        let e = |i: usize| -> Vec<C64> { (0..4).map(|j| c64(if i == j { 1.0 } else { 0.0 }, 0.0)).collect() };
        let ms = dirac_mass_shape_check(&bare, &gamma0, (&psi1[0], &e(0), &psi1[1], &e(1)), tol)?;
        let factor_err = (ms.finite_factor - mass.conj()).norm();
        Ok((ms.residual.value.max(factor_err), format!("finite factor {:.3}", ms.finite_factor)))
    });
}

fn ops_sign_table(ops: &StructuralOps, tol: f64) -> Result<(i8, i8)> {
    let t = twistcheck_core::clifford::sign_table(ops, None, tol)?;
    Ok((t.eps, t.eps_prime))
}

fn row_consistent(r: &EmergenceRow) -> bool {
    !r.admissible()
        || match (r.eps, r.counts()) {
            (Some(-1), Some(c)) => c == (1, 3),
            (Some(1), Some(c)) => c == (3, 1),
            _ => false,
        }
}

fn emergence_suite(run: &mut Run) {
    let l = "(4,0)";
    let Some((rep, ops)) = structural(run, l, Signature::new(4, 0).expect("valid signature")) else { return };
    let rows = match signature_emergence(&rep, &ops) {
        Ok(rows) => rows,
        Err(e) => return run.fail(id(l, "enumeration"), "signature-emergence", e),
    };
    let sign = |s: Option<i8>| s.map_or("?".to_string(), |v| if v > 0 { "+".into() } else { "-".into() });
    for r in &rows {
        let induced = r.induced.as_ref().map_or("-".to_string(), |s| s.iter().map(|v| sign(Some(*v))).collect());
        let status = r.excluded.as_deref().map_or("admissible".to_string(), |e| format!("excluded: {e}"));
        let detail = format!(
            "eps={} eps'={} eps2K={} induced=({induced}) {status}",
            sign(r.eps),
            sign(r.eps_prime),
            sign(r.eps2_k)
        );
        run.check(id(l, &format!("candidate-{}", r.label)), "signature-emergence", Fixed(0.0), || {
            Ok((if row_consistent(r) { 0.0 } else { 1.0 }, detail))
        });
    }
    for (eps, counts, name) in [(-1, (1, 3), "eps-minus-gives-(+,-,-,-)"), (1, (3, 1), "eps-plus-gives-(+,+,+,-)")] {
        run.check(id(l, name), "signature-emergence", Fixed(0.0), || {
            let matching: Vec<&EmergenceRow> = rows.iter().filter(|r| r.admissible() && r.eps == Some(eps)).collect();
            let bad = matching.iter().filter(|r| r.counts() != Some(counts)).count();
            let bad = if matching.is_empty() { 1 } else { bad };
            Ok((bad as f64, format!("{} admissible candidates", matching.len())))
        });
    }
    run.check(id(l, "lorentzian-row"), "signature-emergence", Fixed(0.0), || {
        let ok = rows.iter().any(|r| r.label == "g0" && r.admissible() && r.induced == Some(vec![1, -1, -1, -1]));
        Ok((if ok { 0.0 } else { 1.0 }, "K = gamma_K^(0)".into()))
    });
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(suites: Vec<Suite>, signatures: Vec<[usize; 2]>) -> SuiteConfig {
        SuiteConfig { suites, signatures, ..SuiteConfig::default() }
    }

    #[test]
    fn euclidean_clifford_minimal() {
        let r = run(&config(vec![Suite::Clifford], vec![[2, 0]]));
        assert!(r.records.len() >= 6);
        assert!(r.all_passed(), "{}", r.to_text());
    }

    #[test]
    fn emergence_has_sixteen_candidates_and_two_assertions() {
        let r = run(&config(vec![Suite::Emergence], vec![]));
        assert_eq!(r.records.iter().filter(|x| x.check_id.contains("candidate-")).count(), 16);
        assert_eq!(r.records.iter().filter(|x| x.check_id.contains("eps-")).count(), 2);
        assert!(r.all_passed(), "{}", r.to_text());
    }

    #[test]
    fn empty_suite_list() {
        let r = run(&config(vec![], vec![[1, 3]]));
        assert_eq!(r.summary.total, 0);
    }

    #[test]
    fn zero_tolerance_fails() {
        let mut cfg = config(vec![Suite::Morphism], vec![[1, 3]]);
        cfg.tolerances.values_mut().for_each(|v| *v = 0.0);
        assert!(!run(&cfg).all_passed());
    }
}
