//! The K-morphism `D ↦ K D` between twisted and pseudo-Riemannian triples,
//! and the relations it transports.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::clifford::{CliffordRep, SignTable, StructuralOps};
use crate::error::{Error, Result};
use crate::krein::{twisted_commutator, KreinSpace, TwistedTripleData};
use crate::linalg::{c64, AntilinearOp, CMat, Residual};

const K_UNITARY_GATE: f64 = 1e-9;

/// Triple on a Krein space with a K-self-adjoint Dirac operator `D^K`.
#[derive(Clone, Debug)]
pub struct PseudoTripleData {
    pub algebra_gens: Vec<CMat>,
    pub dk: CMat,
    pub space: KreinSpace,
    pub j: AntilinearOp,
    pub gamma: CMat,
}

impl PseudoTripleData {
    /// The inverse direction `D = K D^K`; since `K² = I` it is the same map.
    pub fn apply_k_morphism(&self) -> Result<TwistedTripleData> {
        TwistedTripleData::new(
            self.algebra_gens.clone(),
            self.space.k() * &self.dk,
            self.j.clone(),
            self.gamma.clone(),
            self.space.k().clone(),
        )
    }
}

pub fn apply_k_morphism(t: &TwistedTripleData) -> PseudoTripleData {
    PseudoTripleData {
        algebra_gens: t.algebra_gens.clone(),
        dk: t.dk(),
        space: t.space(),
        j: t.j.clone(),
        gamma: t.gamma.clone(),
    }
}

#[derive(Clone, Debug)]
pub struct MorphismPair {
    pub twisted: TwistedTripleData,
    pub pseudo: PseudoTripleData,
}

impl MorphismPair {
    pub fn new(twisted: TwistedTripleData) -> Self {
        let pseudo = apply_k_morphism(&twisted);
        Self { twisted, pseudo }
    }

    pub fn k(&self) -> &CMat {
        &self.twisted.k
    }

    /// Residual of `φ_K(φ_K(D)) = D`, with the carried fields compared exactly.
    pub fn involution_residual(&self, tol: f64) -> Result<Residual> {
        let back = self.pseudo.apply_k_morphism()?;
        let carried = back.j == self.twisted.j
            && back.gamma == self.twisted.gamma
            && back.k == self.twisted.k
            && back.algebra_gens == self.twisted.algebra_gens;
        let value = if carried { back.d.dist(&self.twisted.d) } else { f64::INFINITY };
        Ok(Residual::new(value, tol))
    }

    pub fn sign_table(&self, tol: f64) -> Result<SignTable> {
        self.twisted.sign_table(tol)
    }
}

/// Self-adjointness on both sides of the morphism.
#[derive(Clone, Copy, Debug)]
pub struct SelfAdjointEquivalence {
    /// `‖D − D†‖`.
    pub twisted: f64,
    /// `‖D^K − (D^K)⁺‖`.
    pub pseudo: f64,
    pub residual: Residual,
}

impl SelfAdjointEquivalence {
    /// Both sides pass or both fail at `tol`.
    pub fn agree(&self, tol: f64) -> bool {
        (self.twisted <= tol) == (self.pseudo <= tol)
    }
}

pub fn selfadjoint_equivalence_check(pair: &MorphismPair, tol: f64) -> Result<SelfAdjointEquivalence> {
    let d = &pair.twisted.d;
    let twisted = d.dist(&d.adjoint());
    let pseudo = pair.pseudo.dk.dist(&pair.pseudo.space.k_adjoint(&pair.pseudo.dk)?);
    Ok(SelfAdjointEquivalence { twisted, pseudo, residual: Residual::new(twisted.max(pseudo), tol) })
}

/// `K [D, a]_ρ = [D^K, a]`.
pub fn commutator_correspondence_check(pair: &MorphismPair, a: &CMat, tol: f64) -> Residual {
    let lhs = pair.k() * &twisted_commutator(&pair.twisted.d, a, pair.k());
    Residual::between(&lhs, &pair.pseudo.dk.commutator(a), tol)
}

/// `[[D, a]_ρ, b°]_{ρ°} = K [[D^K, a], b°]`.
pub fn first_order_correspondence_check(pair: &MorphismPair, a: &CMat, b: &CMat, tol: f64) -> Result<Residual> {
    let k = pair.k();
    let j = &pair.twisted.j;
    let b_op = j.conjugate(&b.adjoint())?;
    let rho_b_op = j.conjugate(&(&(k * b) * k).adjoint())?;
    let x = twisted_commutator(&pair.twisted.d, a, k);
    let twisted = &(&x * &b_op) - &(&rho_b_op * &x);
    let pseudo = k * &pair.pseudo.dk.commutator(a).commutator(&b_op);
    Ok(Residual::between(&twisted, &pseudo, tol))
}

/// `U_K = u J u J⁻¹`.
pub fn gauge_pair(u: &CMat, j: &AntilinearOp) -> Result<CMat> {
    Ok(u * &j.conjugate(u)?)
}

/// `U_K D^K U_K⁺ = K V_K D V_K†` with `V_K = ρ(U_K)`.
pub fn fluctuation_correspondence_check(pair: &MorphismPair, u: &CMat, tol: f64) -> Result<Residual> {
    let space = &pair.pseudo.space;
    let gate = space.is_k_unitary(u, K_UNITARY_GATE)?;
    if !gate.passed {
        return Err(Error::NotKUnitary(gate.value));
    }
    let uk = gauge_pair(u, &pair.pseudo.j)?;
    let lhs = &(&uk * &pair.pseudo.dk) * &space.k_adjoint(&uk)?;
    let vk = space.rho(&uk);
    let rhs = pair.k() * &(&(&vk * &pair.twisted.d) * &vk.adjoint());
    Ok(Residual::between(&lhs, &rhs, tol))
}

/// `ρ(U_K) = ρ(u) J ρ(u) J⁻¹`.
pub fn v_k_constructions_check(k: &CMat, j: &AntilinearOp, u: &CMat, tol: f64) -> Result<Residual> {
    let rho = |x: &CMat| &(k * x) * k;
    let via_uk = rho(&gauge_pair(u, j)?);
    let via_rho_u = gauge_pair(&rho(u), j)?;
    Ok(Residual::between(&via_uk, &via_rho_u, tol))
}

/// Residual of `ρ(c̃(u)c̃(v)) + c̃(v)c̃(u) = 2 g_R(u, v)` with `c̃ = K c`.
pub fn twisted_clifford_check(rep: &CliffordRep, ops: &StructuralOps, u: &[f64], v: &[f64], tol: f64) -> Result<Residual> {
    let cu = &ops.k * &rep.represent(u)?;
    let cv = &ops.k * &rep.represent(v)?;
    let lhs = &ops.rho(&(&cu * &cv)) + &(&cv * &cu);
    let want = CMat::identity(rep.spinor_dim()).scale(c64(2.0 * rep.sig().metric_r(u, v), 0.0));
    Ok(Residual::between(&lhs, &want, tol))
}

/// Worst residual of `γ̃^a γ̃^b + s_ab γ̃^b γ̃^a = 2 δ^{ab}` over basis pairs.
pub fn generalized_clifford_check(rep: &CliffordRep, ops: &StructuralOps, tol: f64) -> Residual {
    let sig = rep.sig();
    let n = rep.spinor_dim();
    // Upper-index generators γ^a = g^{aa} γ_a, twisted by K.
    let tilde: Vec<CMat> = rep
        .gammas()
        .iter()
        .enumerate()
        .map(|(a, g)| &ops.k * &g.scale(c64(sig.sign(a), 0.0)))
        .collect();
    let mut worst: f64 = 0.0;
    for a in 0..tilde.len() {
        for b in 0..tilde.len() {
            let s = sig.sign(a) * sig.sign(b);
            let lhs = &(&tilde[a] * &tilde[b]) + &(&tilde[b] * &tilde[a]).scale(c64(s, 0.0));
            let want = if a == b { 2.0 } else { 0.0 };
            worst = worst.max(lhs.dist(&CMat::identity(n).scale(c64(want, 0.0))));
        }
    }
    Residual::new(worst, tol)
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

/// `K c(v) K⁻¹ = c(rv)` over random vectors.
pub fn reflection_parity_check(rep: &CliffordRep, ops: &StructuralOps, samples: usize, seed: u64, tol: f64) -> Result<Residual> {
    let sig = rep.sig();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let v = random_vec(&mut rng, sig.dim());
        worst = worst.max(ops.rho(&rep.represent(&v)?).dist(&rep.represent(&sig.reflect(&v))?));
    }
    Ok(Residual::new(worst, tol))
}

/// Trace identities `2^{-m} Tr(K c(u) K c(v)) = g(ru, v)` and
/// `2^{-m} Tr(c(u) c(v)) = g(u, v)` over random pairs.
pub fn trace_metric_morph_check(
    rep: &CliffordRep,
    ops: &StructuralOps,
    samples: usize,
    seed: u64,
    tol: f64,
) -> Result<Residual> {
    let sig = rep.sig();
    let norm = 1.0 / rep.spinor_dim() as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let u = random_vec(&mut rng, sig.dim());
        let v = random_vec(&mut rng, sig.dim());
        let cu = rep.represent(&u)?;
        let cv = rep.represent(&v)?;
        let twisted = (&(&ops.k * &cu) * &(&ops.k * &cv)).trace() * norm;
        let plain = (&cu * &cv).trace() * norm;
        worst = worst
            .max((twisted - c64(sig.metric(&sig.reflect(&u), &v), 0.0)).norm())
            .max((plain - c64(sig.metric(&u, &v), 0.0)).norm());
    }
    Ok(Residual::new(worst, tol))
}

/// `D Γ + ε′ Γ D = 0` on the twisted side.
pub fn twisted_grading_check(pair: &MorphismPair, eps_prime: i8, tol: f64) -> Residual {
    let d = &pair.twisted.d;
    let g = &pair.twisted.gamma;
    let lhs = &(d * g) + &(g * d).scale(c64(f64::from(eps_prime), 0.0));
    Residual::new(lhs.op_norm().unwrap_or(f64::NAN), tol)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymbolNorm {
    /// `‖K c(k)‖`.
    pub norm: f64,
    /// `√g_R(k, k)`.
    pub gr_norm: f64,
    pub matches: bool,
}

/// Compares the operator norm of the twisted symbol with the `g_R` length.
pub fn symbol_norm_probe(rep: &CliffordRep, ops: &StructuralOps, k: &[f64]) -> Result<SymbolNorm> {
    let norm = (&ops.k * &rep.represent(k)?).op_norm()?;
    let gr_norm = rep.sig().metric_r(k, k).sqrt();
    Ok(SymbolNorm { norm, gr_norm, matches: (norm - gr_norm).abs() <= 1e-10 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::{build_gammas, build_structural, Signature};
    use crate::krein::sample_spin_plus;

    fn setup(p: usize, q: usize) -> (CliffordRep, StructuralOps) {
        let rep = build_gammas(Signature::new(p, q).unwrap());
        let ops = build_structural(&rep).unwrap();
        (rep, ops)
    }

    fn pair_with(rep: &CliffordRep, ops: &StructuralOps, d: CMat) -> MorphismPair {
        let n = rep.spinor_dim();
        MorphismPair::new(
            TwistedTripleData::new(vec![CMat::identity(n)], d, ops.j.clone(), ops.gamma.clone(), ops.k.clone()).unwrap(),
        )
    }

    #[test]
    fn euclidean_morphism_is_trivial() {
        let (rep, ops) = setup(4, 0);
        let t = TwistedTripleData::clifford_symbol(&rep, &ops, &[0.2, 1.0, -0.3, 0.8]).unwrap();
        let p = apply_k_morphism(&t);
        assert_eq!(p.dk, t.d);
        let psi = vec![c64(1.0, 0.5), c64(0.0, 0.0), c64(-0.2, 0.3), c64(0.7, 0.0)];
        let phi = vec![c64(0.1, 0.0), c64(0.4, -1.0), c64(0.0, 0.2), c64(2.0, 0.0)];
        assert_eq!(p.space.k_product(&psi, &phi).unwrap(), crate::linalg::inner(&psi, &p.space.k().apply(&phi)));
    }

    #[test]
    fn lorentz_pseudo_dirac_is_k_self_adjoint() {
        let (rep, ops) = setup(1, 3);
        let t = TwistedTripleData::clifford_symbol(&rep, &ops, &[0.2, 1.0, -0.3, 0.8]).unwrap();
        let pair = MorphismPair::new(t);
        let dk = &pair.pseudo.dk;
        assert!(pair.pseudo.space.k_adjoint(dk).unwrap().dist(dk) < 1e-13);
        assert!(pair.involution_residual(1e-13).unwrap().passed);
    }

    #[test]
    fn selfadjoint_equivalence_examples() {
        let (rep, ops) = setup(1, 3);
        let zero = pair_with(&rep, &ops, CMat::zeros(4, 4));
        assert_eq!(selfadjoint_equivalence_check(&zero, 0.0).unwrap().residual.value, 0.0);

        let h = TwistedTripleData::clifford_symbol(&rep, &ops, &[1.0, -0.4, 0.6, 0.1]).unwrap();
        let r = selfadjoint_equivalence_check(&MorphismPair::new(h), 1e-12).unwrap();
        assert!(r.residual.passed && r.agree(1e-12));

        let bad = rep.gamma(1) + &CMat::identity(4).scale(crate::linalg::IM);
        let r = selfadjoint_equivalence_check(&pair_with(&rep, &ops, bad), 1e-12).unwrap();
        assert!(r.twisted > 0.5 && r.pseudo > 0.5 && r.agree(1e-12));
    }

    #[test]
    fn commutator_correspondence_examples() {
        let (rep, ops) = setup(1, 1);
        let t = TwistedTripleData::clifford_symbol(&rep, &ops, &[0.7, -1.3]).unwrap();
        let pair = MorphismPair::new(t);
        let id = CMat::identity(2);
        assert_eq!(commutator_correspondence_check(&pair, &id, 0.0).value, 0.0);
        assert!(commutator_correspondence_check(&pair, &id.scale(c64(2.0, -1.0)), 1e-15).passed);
        let a = CMat::from_rows(&[[c64(0.3, 0.1), c64(-1.0, 2.0)], [c64(0.5, 0.0), c64(0.0, -0.7)]]);
        // Oracle: K(Da − KaKD) = KDa − aKD.
        let kd = &ops.k * &pair.twisted.d;
        let expanded = &(&kd * &a) - &(&a * &kd);
        assert!(expanded.dist(&pair.pseudo.dk.commutator(&a)) < 1e-15);
        assert!(commutator_correspondence_check(&pair, &a, 1e-12).passed);
    }

    #[test]
    fn first_order_correspondence_trivial_cases() {
        let (rep, ops) = setup(1, 3);
        let pair = MorphismPair::new(TwistedTripleData::clifford_symbol(&rep, &ops, &[1.0, 0.5, 0.0, -0.2]).unwrap());
        let id = CMat::identity(4);
        assert!(first_order_correspondence_check(&pair, &id, &id, 1e-14).unwrap().passed);
        let s = id.scale(c64(0.4, 1.0));
        assert!(first_order_correspondence_check(&pair, &s, &s, 1e-13).unwrap().passed);
    }

    #[test]
    fn fluctuation_correspondence_examples() {
        let (rep, ops) = setup(1, 3);
        let pair = MorphismPair::new(TwistedTripleData::clifford_symbol(&rep, &ops, &[1.0, 0.5, 0.0, -0.2]).unwrap());
        let id = CMat::identity(4);
        assert_eq!(fluctuation_correspondence_check(&pair, &id, 0.0).unwrap().value, 0.0);
        // Spatial rotation: a unitary commuting with K.
        let t: f64 = 0.9;
        let rot = &id.scale(c64((t / 2.0).cos(), 0.0)) + &(rep.gamma(1) * rep.gamma(2)).scale(c64((t / 2.0).sin(), 0.0));
        assert!(rot.commutator(&ops.k).max_abs() < 1e-15);
        assert!(fluctuation_correspondence_check(&pair, &rot, 1e-12).unwrap().passed);
        for x in sample_spin_plus(&rep, 20, 4).unwrap() {
            assert!(fluctuation_correspondence_check(&pair, x.matrix(), 1e-10).unwrap().passed);
        }
        let bad = id.scale(c64(3.0, 0.0));
        assert!(matches!(fluctuation_correspondence_check(&pair, &bad, 1e-10), Err(Error::NotKUnitary(_))));
    }

    #[test]
    fn twisted_clifford_examples() {
        let (rep, ops) = setup(1, 3);
        for a in 0..4 {
            let mut e = vec![0.0; 4];
            e[a] = 1.0;
            assert!(twisted_clifford_check(&rep, &ops, &e, &e, 1e-14).unwrap().passed);
        }
        let u = [0.0, 0.6, 0.8, 0.0];
        let v = [0.0, -0.8, 0.6, 0.0];
        assert!(twisted_clifford_check(&rep, &ops, &u, &v, 1e-14).unwrap().passed);
    }

    #[test]
    fn generalized_clifford_examples() {
        for (p, q) in [(4, 0), (1, 3), (2, 2), (0, 6)] {
            let (rep, ops) = setup(p, q);
            assert!(generalized_clifford_check(&rep, &ops, 1e-12).passed);
        }
        // Temporal/spatial pair in (1,3): s = −1 turns the relation into a commutator.
        let (rep, ops) = setup(1, 3);
        let t0 = &ops.k * rep.gamma(0);
        let t1 = &ops.k * &rep.gamma(1).scale(c64(-1.0, 0.0));
        assert!(t0.commutator(&t1).max_abs() < 1e-15);
    }

    #[test]
    fn trace_metric_examples() {
        let (rep, ops) = setup(2, 2);
        assert!(trace_metric_morph_check(&rep, &ops, 100, 1, 1e-11).unwrap().passed);
        let (rep, ops) = setup(4, 0);
        let u = [0.3, -1.0, 0.2, 0.5];
        let v = [1.1, 0.4, -0.6, 0.0];
        let cu = rep.represent(&u).unwrap();
        let cv = rep.represent(&v).unwrap();
        assert_eq!((&(&ops.k * &cu) * &(&ops.k * &cv)).trace(), (&cu * &cv).trace());
    }

    #[test]
    fn symbol_norm_examples() {
        let (rep, ops) = setup(1, 3);
        for a in 0..4 {
            let mut e = vec![0.0; 4];
            e[a] = 1.0;
            let s = symbol_norm_probe(&rep, &ops, &e).unwrap();
            assert!(s.matches && (s.norm - 1.0).abs() < 1e-12);
        }
        let (rep, ops) = setup(1, 1);
        let s = symbol_norm_probe(&rep, &ops, &[1.0, 1.0]).unwrap();
        assert!((s.norm - 2.0).abs() < 1e-12);
        assert!((s.gr_norm - 2f64.sqrt()).abs() < 1e-12);
        assert!(!s.matches);
    }

    #[test]
    fn v_k_constructions_agree() {
        let (rep, ops) = setup(1, 3);
        for x in sample_spin_plus(&rep, 10, 8).unwrap() {
            assert!(v_k_constructions_check(&ops.k, &ops.j, x.matrix(), 1e-10).unwrap().passed);
        }
    }
}
