//! Krein products, twisted adjoints and commutators, orthochronous spin
//! elements and twisted fluctuations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::clifford::{CliffordRep, SignTable, StructuralOps};
use crate::error::{Error, Result};
use crate::linalg::{c64, inner, AntilinearOp, CMat, Residual, C64, IM};

const STRUCTURE_TOL: f64 = 1e-12;
const K_UNITARY_GATE: f64 = 1e-9;
const GAUGE_SELF_ADJOINT_TOL: f64 = 1e-11;

/// `C^n` with the indefinite product `⟨ψ, K φ⟩`.
#[derive(Clone, Debug)]
pub struct KreinSpace {
    k: CMat,
}

impl KreinSpace {
    pub fn new(k: CMat) -> Result<Self> {
        if !k.is_square() {
            return Err(Error::NotSquare { rows: k.rows(), cols: k.cols() });
        }
        let herm = k.dist(&k.adjoint());
        let invol = (&k * &k).dist(&CMat::identity(k.rows()));
        if herm > STRUCTURE_TOL || invol > STRUCTURE_TOL {
            return Err(Error::ConstraintViolation {
                name: "fundamental symmetry".into(),
                value: herm.max(invol),
            });
        }
        Ok(Self { k })
    }

    pub fn k(&self) -> &CMat {
        &self.k
    }

    pub fn dim(&self) -> usize {
        self.k.rows()
    }

    pub fn k_product(&self, psi: &[C64], phi: &[C64]) -> Result<C64> {
        if psi.len() != self.dim() || phi.len() != self.dim() {
            return Err(Error::Shape(format!(
                "vectors of length {} and {} in a {}-dimensional Krein space",
                psi.len(),
                phi.len(),
                self.dim()
            )));
        }
        Ok(inner(psi, &self.k.apply(phi)))
    }

    /// `ρ(O)† = K O† K`.
    pub fn k_adjoint(&self, o: &CMat) -> Result<CMat> {
        self.check_size(o)?;
        Ok(&(&self.k * &o.adjoint()) * &self.k)
    }

    /// `ρ(X) = K X K`.
    pub fn rho(&self, x: &CMat) -> CMat {
        &(&self.k * x) * &self.k
    }

    /// Residual of `U U⁺ = U⁺ U = I`.
    pub fn is_k_unitary(&self, u: &CMat, tol: f64) -> Result<Residual> {
        let plus = self.k_adjoint(u)?;
        let id = CMat::identity(self.dim());
        Ok(Residual::new((u * &plus).dist(&id).max((&plus * u).dist(&id)), tol))
    }

    fn check_size(&self, o: &CMat) -> Result<()> {
        if o.rows() != self.dim() || o.cols() != self.dim() {
            return Err(Error::Shape(format!(
                "{}x{} operator in a {}-dimensional Krein space",
                o.rows(),
                o.cols(),
                self.dim()
            )));
        }
        Ok(())
    }
}

/// Finite stand-in for a real even twisted triple `(A, H, D, J, Γ, K)`.
#[derive(Clone, Debug)]
pub struct TwistedTripleData {
    pub algebra_gens: Vec<CMat>,
    pub d: CMat,
    pub j: AntilinearOp,
    pub gamma: CMat,
    pub k: CMat,
}

impl TwistedTripleData {
    pub fn new(algebra_gens: Vec<CMat>, d: CMat, j: AntilinearOp, gamma: CMat, k: CMat) -> Result<Self> {
        let n = d.rows();
        let square = |m: &CMat| m.rows() == n && m.cols() == n;
        if !square(&d) || !square(&gamma) || !square(&k) || j.dim() != n || !algebra_gens.iter().all(square) {
            return Err(Error::Shape("triple operators must share one square dimension".into()));
        }
        KreinSpace::new(k.clone())?;
        Ok(Self { algebra_gens, d, j, gamma, k })
    }

    /// Bare Clifford symbol `D = Σ c_a K γ_a` on spinors, with scalar algebra.
    pub fn clifford_symbol(rep: &CliffordRep, ops: &StructuralOps, coeffs: &[f64]) -> Result<Self> {
        let d = &ops.k * &rep.represent(coeffs)?;
        let n = rep.spinor_dim();
        Self::new(vec![CMat::identity(n)], d, ops.j.clone(), ops.gamma.clone(), ops.k.clone())
    }

    /// Plane-wave doublet symbol on `C^{2^m} ⊗ C²`.
    ///
    /// `D^K = i Σ_a k_a γ_a ⊗ E` with `E = [[0,−1],[1,0]]`, the real
    /// antisymmetric action of `∂` on a `(cos, sin)` mode pair, and `D = K D^K`.
    pub fn fourier_doublet(rep: &CliffordRep, ops: &StructuralOps, k: &[f64]) -> Result<Self> {
        let e = CMat::from_real(2, 2, &[0.0, -1.0, 1.0, 0.0])?;
        let id2 = CMat::identity(2);
        let dk = rep.represent(k)?.scale(IM).kron(&e);
        let kk = ops.k.kron(&id2);
        let n = rep.spinor_dim() * 2;
        Self::new(
            vec![CMat::identity(n)],
            &kk * &dk,
            ops.j.kron(&AntilinearOp::conjugation(2)),
            ops.gamma.kron(&id2),
            kk,
        )
    }

    pub fn dim(&self) -> usize {
        self.d.rows()
    }

    pub fn space(&self) -> KreinSpace {
        KreinSpace { k: self.k.clone() }
    }

    /// The pseudo-Riemannian Dirac operator `K D`.
    pub fn dk(&self) -> CMat {
        &self.k * &self.d
    }

    pub fn sign_table(&self, tol: f64) -> Result<SignTable> {
        SignTable::measure(&self.k, &self.gamma, &self.j, Some(&self.d), tol)
    }

    /// `‖D − D†‖` and `‖{D, Γ}_ρ‖`.
    pub fn invariant_residuals(&self, tol: f64) -> [(&'static str, Residual); 2] {
        let twisted_anti = &(&self.d * &self.gamma) + &(&self.space().rho(&self.gamma) * &self.d);
        [
            ("self_adjoint", Residual::between(&self.d, &self.d.adjoint(), tol)),
            ("twisted_grading", Residual::new(twisted_anti.op_norm().unwrap_or(f64::NAN), tol)),
        ]
    }
}

/// Product of unit vectors of the Clifford algebra.
#[derive(Clone, Debug)]
pub struct SpinElement {
    factors: Vec<Vec<f64>>,
    matrix: CMat,
}

impl SpinElement {
    /// Builds `c(v₁)⋯c(v₂ₖ)` from unit factors with an even count of negative norms.
    pub fn from_factors(rep: &CliffordRep, factors: Vec<Vec<f64>>) -> Result<Self> {
        if factors.is_empty() || !factors.len().is_multiple_of(2) {
            return Err(Error::ConstraintViolation { name: "even factor count".into(), value: factors.len() as f64 });
        }
        let sig = rep.sig();
        let mut negatives = 0;
        for v in &factors {
            let n = sig.metric(v, v);
            if (n.abs() - 1.0).abs() > 1e-12 {
                return Err(Error::ConstraintViolation { name: "unit factor".into(), value: (n.abs() - 1.0).abs() });
            }
            if n < 0.0 {
                negatives += 1;
            }
        }
        if negatives % 2 != 0 {
            return Err(Error::ConstraintViolation { name: "orthochronous parity".into(), value: negatives as f64 });
        }
        let n = rep.spinor_dim();
        let mut matrix = CMat::identity(n);
        for v in &factors {
            matrix = &matrix * &rep.represent(v)?;
        }
        Ok(Self { factors, matrix })
    }

    pub fn factors(&self) -> &[Vec<f64>] {
        &self.factors
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }
}

/// Rejection threshold `|g(v,v)| ≥ COND · |v|²`; it keeps `‖c(v)‖ ≤ 2` for unit factors.
const CONDITIONING: f64 = 0.5;
const DEGENERATE: f64 = 1e-8;
const MAX_ATTEMPTS: usize = 100;
/// Scale applied to the block that must dominate when the norm sign is forced.
const BIAS: f64 = 3.0;

fn sample_unit(rep: &CliffordRep, rng: &mut ChaCha8Rng, want: Option<f64>) -> Result<Vec<f64>> {
    let sig = rep.sig();
    for _ in 0..MAX_ATTEMPTS {
        let mut v: Vec<f64> = (0..sig.dim()).map(|_| rng.sample(StandardNormal)).collect();
        if let Some(s) = want {
            for (a, x) in v.iter_mut().enumerate() {
                if sig.sign(a) == s {
                    *x *= BIAS;
                }
            }
        }
        let n = sig.metric(&v, &v);
        let e2: f64 = v.iter().map(|x| x * x).sum();
        if n.abs() < DEGENERATE || n.abs() < CONDITIONING * e2 {
            continue;
        }
        if want.is_some_and(|s| s * n < 0.0) {
            continue;
        }
        let scale = 1.0 / n.abs().sqrt();
        return Ok(v.iter().map(|x| x * scale).collect());
    }
    Err(Error::RandomDegenerate(MAX_ATTEMPTS))
}

/// Deterministic orthochronous spin elements: products of `2k` unit vectors,
/// `k ∈ {1, 2, 3}`, with an even number of negative-norm factors.
pub fn sample_spin_plus(rep: &CliffordRep, count: usize, seed: u64) -> Result<Vec<SpinElement>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sig = rep.sig();
    (0..count)
        .map(|_| {
            let k = rng.random_range(1..=3usize);
            let mut factors = Vec::with_capacity(2 * k);
            let mut negatives = 0;
            for i in 0..2 * k {
                let forced = i + 1 == 2 * k && sig.p() > 0 && sig.q() > 0;
                let want = forced.then(|| if negatives % 2 == 0 { 1.0 } else { -1.0 });
                let v = sample_unit(rep, &mut rng, want)?;
                if sig.metric(&v, &v) < 0.0 {
                    negatives += 1;
                }
                factors.push(v);
            }
            SpinElement::from_factors(rep, factors)
        })
        .collect()
}

/// `[D, a]_ρ = D a − K a K D`.
pub fn twisted_commutator(d: &CMat, a: &CMat, k: &CMat) -> CMat {
    &(d * a) - &(&(&(k * a) * k) * d)
}

/// `Σ a_i [D, b_i]_ρ`.
pub fn twisted_one_form(pairs: &[(CMat, CMat)], d: &CMat, k: &CMat) -> CMat {
    pairs
        .iter()
        .fold(CMat::zeros(d.rows(), d.cols()), |acc, (a, b)| &acc + &(a * &twisted_commutator(d, b, k)))
}

/// Bimodule action `a · ω · b = ρ(a) ω b` on twisted one-forms.
pub fn bimodule_action(a: &CMat, omega: &CMat, b: &CMat, k: &CMat) -> CMat {
    &(&(&(k * a) * k) * omega) * b
}

/// Norm of `[[D, a]_ρ, b°]_{ρ°}` with `b° = J b† J⁻¹` and `ρ°(b°) = J (K b K)† J⁻¹`.
pub fn twisted_first_order_residual(
    d: &CMat,
    a: &CMat,
    b: &CMat,
    j: &AntilinearOp,
    k: &CMat,
    tol: f64,
) -> Result<Residual> {
    let x = twisted_commutator(d, a, k);
    let b_op = j.conjugate(&b.adjoint())?;
    let rho_b_op = j.conjugate(&(&(k * b) * k).adjoint())?;
    let r = &(&x * &b_op) - &(&rho_b_op * &x);
    Ok(Residual::new(r.op_norm()?, tol))
}

/// `D + A + ε₁ J A J⁻¹`.
pub fn fluctuate(d: &CMat, a_rho: &CMat, j: &AntilinearOp, eps1: i8) -> Result<CMat> {
    let ja = j.conjugate(a_rho)?;
    Ok(&(d + a_rho) + &ja.scale(c64(f64::from(eps1), 0.0)))
}

/// `Ad(u) D Ad(u)†` with `Ad(u) = u J u J⁻¹`.
pub fn gauge_transform(d: &CMat, u: &CMat, j: &AntilinearOp, k: &CMat) -> Result<CMat> {
    let space = KreinSpace::new(k.clone())?;
    let r = space.is_k_unitary(u, K_UNITARY_GATE)?;
    if !r.passed {
        return Err(Error::NotKUnitary(r.value));
    }
    let ad = u * &j.conjugate(u)?;
    let out = &(&ad * d) * &ad.adjoint();
    let drift = out.dist(&out.adjoint());
    if d.dist(&d.adjoint()) <= STRUCTURE_TOL && drift > GAUGE_SELF_ADJOINT_TOL {
        return Err(Error::ConstraintViolation { name: "gauge self-adjointness".into(), value: drift });
    }
    Ok(out)
}

/// `u [D, u†]_ρ`, which equals `u D u† − D` whenever `u K u† = K`.
pub fn one_sided_fluctuation(d: &CMat, u: &CMat, k: &CMat) -> CMat {
    u * &twisted_commutator(d, &u.adjoint(), k)
}

/// `[D, ab]_ρ = [D, a]_ρ b + ρ(a) [D, b]_ρ`.
pub fn twisted_leibniz_check(d: &CMat, k: &CMat, a: &CMat, b: &CMat, tol: f64) -> Residual {
    let lhs = twisted_commutator(d, &(a * b), k);
    let rho_a = &(k * a) * k;
    let rhs = &(&twisted_commutator(d, a, k) * b) + &(&rho_a * &twisted_commutator(d, b, k));
    Residual::between(&lhs, &rhs, tol)
}

fn random_complex(rng: &mut ChaCha8Rng, n: usize) -> Vec<C64> {
    (0..n).map(|_| c64(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect()
}

/// Worst `|⟨ψ, O φ⟩_K − ⟨O⁺ψ, φ⟩_K|` and `‖(O⁺)⁺ − O‖` over random `O`, `ψ`, `φ`.
pub fn adjoint_checks(space: &KreinSpace, samples: usize, seed: u64, tol: f64) -> Result<[(&'static str, Residual); 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = space.dim();
    let (mut pairing, mut involution): (f64, f64) = (0.0, 0.0);
    for _ in 0..samples {
        let o = CMat::new(n, n, random_complex(&mut rng, n * n))?;
        let psi = random_complex(&mut rng, n);
        let phi = random_complex(&mut rng, n);
        let plus = space.k_adjoint(&o)?;
        let lhs = space.k_product(&psi, &o.apply(&phi))?;
        let rhs = space.k_product(&plus.apply(&psi), &phi)?;
        pairing = pairing.max((lhs - rhs).norm());
        involution = involution.max(space.k_adjoint(&plus)?.dist(&o));
    }
    Ok([("adjoint pairing", Residual::new(pairing, tol)), ("adjoint involution", Residual::new(involution, tol))])
}

/// Worst `|⟨uψ, uφ⟩_K − ⟨ψ, φ⟩_K|` over the given operators and random vectors.
pub fn k_product_invariance_check(
    space: &KreinSpace,
    units: &[CMat],
    samples: usize,
    seed: u64,
    tol: f64,
) -> Result<Residual> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = space.dim();
    let mut worst: f64 = 0.0;
    for u in units {
        for _ in 0..samples {
            let psi = random_complex(&mut rng, n);
            let phi = random_complex(&mut rng, n);
            let moved = space.k_product(&u.apply(&psi), &u.apply(&phi))?;
            worst = worst.max((moved - space.k_product(&psi, &phi)?).norm());
        }
    }
    Ok(Residual::new(worst, tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::{build_gammas, build_structural, Signature};
    use crate::linalg::pauli;

    fn lorentz() -> (CliffordRep, StructuralOps) {
        let rep = build_gammas(Signature::new(1, 3).unwrap());
        let ops = build_structural(&rep).unwrap();
        (rep, ops)
    }

    fn v(x: &[(f64, f64)]) -> Vec<C64> {
        x.iter().map(|&(r, i)| c64(r, i)).collect()
    }

    #[test]
    fn k_product_reduces_to_inner_for_identity() {
        let s = KreinSpace::new(CMat::identity(2)).unwrap();
        let a = v(&[(1.0, 2.0), (0.5, -1.0)]);
        let b = v(&[(-0.3, 0.1), (2.0, 0.0)]);
        assert_eq!(s.k_product(&a, &b).unwrap(), inner(&a, &b));
    }

    #[test]
    fn k_product_sigma3_signs() {
        let s = KreinSpace::new(pauli(3)).unwrap();
        let up = v(&[(1.0, 0.0), (0.0, 0.0)]);
        let dn = v(&[(0.0, 0.0), (1.0, 0.0)]);
        assert_eq!(s.k_product(&up, &up).unwrap(), c64(1.0, 0.0));
        assert_eq!(s.k_product(&dn, &dn).unwrap(), c64(-1.0, 0.0));
        assert!(s.k_product(&up, &v(&[(1.0, 0.0)])).is_err());
    }

    #[test]
    fn lorentz_k_product_is_indefinite() {
        let (_, ops) = lorentz();
        let s = KreinSpace::new(ops.k.clone()).unwrap();
        let eig = ops.k.to_nalgebra().symmetric_eigen().eigenvalues;
        assert!(eig.iter().any(|e| (e - 1.0).abs() < 1e-12));
        assert!(eig.iter().any(|e| (e + 1.0).abs() < 1e-12));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (mut pos, mut neg) = (false, false);
        for _ in 0..50 {
            let psi: Vec<C64> = (0..4).map(|_| c64(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect();
            let q = s.k_product(&psi, &psi).unwrap();
            assert!(q.im.abs() < 1e-12);
            pos |= q.re > 0.0;
            neg |= q.re < 0.0;
        }
        assert!(pos && neg);
    }

    #[test]
    fn krein_space_rejects_non_involution() {
        assert!(KreinSpace::new(pauli(3).scale(c64(2.0, 0.0))).is_err());
        assert!(KreinSpace::new(CMat::zeros(2, 3)).is_err());
    }

    #[test]
    fn k_adjoint_examples() {
        let a = CMat::from_rows(&[[c64(1.0, 1.0), c64(2.0, 0.0)], [c64(0.0, -3.0), c64(0.5, 0.0)]]);
        let plain = KreinSpace::new(CMat::identity(2)).unwrap();
        assert_eq!(plain.k_adjoint(&a).unwrap(), a.adjoint());
        let (rep, ops) = lorentz();
        let s = KreinSpace::new(ops.k.clone()).unwrap();
        assert!(s.k_adjoint(&ops.k).unwrap().dist(&ops.k) < 1e-15);
        for g in rep.gammas() {
            assert!(s.k_adjoint(g).unwrap().dist(g) < 1e-15);
        }
        assert!(s.k_adjoint(&CMat::identity(2)).is_err());
    }

    #[test]
    fn k_unitary_examples() {
        let (rep, ops) = lorentz();
        let s = KreinSpace::new(ops.k.clone()).unwrap();
        assert!(s.is_k_unitary(&CMat::identity(4), 0.0).unwrap().passed);
        // A phase times K is unitary and commutes with K.
        let u = ops.k.scale(c64(0.6, 0.8));
        assert!(s.is_k_unitary(&u, 1e-14).unwrap().passed);
        for x in sample_spin_plus(&rep, 20, 11).unwrap() {
            let inv = x.matrix().inverse().unwrap();
            let kxk = &(&ops.k * &x.matrix().adjoint()) * &ops.k;
            assert!(inv.dist(&kxk) < 1e-11);
            assert!(s.is_k_unitary(x.matrix(), 1e-10).unwrap().passed);
        }
    }

    #[test]
    fn spin_identity_element() {
        let rep = build_gammas(Signature::new(1, 3).unwrap());
        let e1 = vec![1.0, 0.0, 0.0, 0.0];
        let x = SpinElement::from_factors(&rep, vec![e1.clone(), e1]).unwrap();
        assert_eq!(x.matrix(), &CMat::identity(4));
    }

    #[test]
    fn spin_rotation_is_unitary() {
        let rep = build_gammas(Signature::new(1, 3).unwrap());
        let a = vec![0.0, 1.0, 0.0, 0.0];
        let t: f64 = 0.7;
        let b = vec![0.0, t.cos(), t.sin(), 0.0];
        let x = SpinElement::from_factors(&rep, vec![a, b]).unwrap();
        let inv = x.matrix().inverse().unwrap();
        assert!(inv.dist(&x.matrix().adjoint()) < 1e-14);
    }

    #[test]
    fn spin_boost_is_k_unitary_but_not_unitary() {
        let (rep, ops) = lorentz();
        let t: f64 = 0.6;
        let a = vec![0.0, 1.0, 0.0, 0.0];
        let b = vec![t.sinh(), t.cosh(), 0.0, 0.0];
        let x = SpinElement::from_factors(&rep, vec![a, b]).unwrap();
        assert!(x.matrix().op_norm().unwrap() > 1.0 + 1e-3);
        let s = KreinSpace::new(ops.k).unwrap();
        assert!(s.is_k_unitary(x.matrix(), 1e-12).unwrap().passed);
    }

    #[test]
    fn spin_rejects_odd_parity() {
        let rep = build_gammas(Signature::new(1, 3).unwrap());
        let t = vec![1.0, 0.0, 0.0, 0.0];
        let s = vec![0.0, 1.0, 0.0, 0.0];
        assert!(SpinElement::from_factors(&rep, vec![t, s]).is_err());
    }

    #[test]
    fn sampler_is_deterministic_and_orthochronous() {
        for sig in Signature::all_up_to(6) {
            let rep = build_gammas(sig);
            let a = sample_spin_plus(&rep, 20, 5).unwrap();
            let b = sample_spin_plus(&rep, 20, 5).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert_eq!(x.matrix(), y.matrix());
                let neg = x.factors().iter().filter(|v| sig.metric(v, v) < 0.0).count();
                assert_eq!(neg % 2, 0);
                // Each conditioned factor has norm at most 2.
                assert!(x.matrix().op_norm().unwrap() <= 64.0);
            }
        }
    }

    #[test]
    fn twisted_commutator_examples() {
        let (rep, ops) = lorentz();
        let d = rep.represent(&[0.3, -1.0, 0.5, 2.0]).unwrap();
        assert!(twisted_commutator(&d, &CMat::identity(4), &ops.k).max_abs() < 1e-15);
        let a = rep.gamma(2);
        assert_eq!(twisted_commutator(&d, a, &CMat::identity(4)), d.commutator(a));

        let rep = build_gammas(Signature::new(1, 1).unwrap());
        let ops = build_structural(&rep).unwrap();
        // γ₂ is odd under the twist: [γ₂, γ₂]_ρ = 2γ₂² = −2I.
        let g2 = rep.gamma(1);
        assert!(twisted_commutator(g2, g2, &ops.k).dist(&CMat::identity(2).scale(c64(-2.0, 0.0))) < 1e-15);
        let g1 = rep.gamma(0);
        assert!(twisted_commutator(g1, g1, &ops.k).max_abs() < 1e-15);
    }

    #[test]
    fn one_form_examples() {
        let (rep, ops) = lorentz();
        let d = &ops.k * &rep.represent(&[1.0, 0.2, -0.4, 0.9]).unwrap();
        assert_eq!(twisted_one_form(&[], &d, &ops.k), CMat::zeros(4, 4));
        let b = rep.gamma(1) * rep.gamma(3);
        let single = twisted_one_form(&[(CMat::identity(4), b.clone())], &d, &ops.k);
        assert!(single.dist(&twisted_commutator(&d, &b, &ops.k)) < 1e-15);
    }

    #[test]
    fn bimodule_action_stays_a_one_form() {
        // ρ(a)(Σ a_i[D,b_i]_ρ)b = Σ ρ(a)a_i[D,b_i b]_ρ − ρ(a)a_iρ(b_i)[D,b]_ρ.
        let (rep, ops) = lorentz();
        let k = &ops.k;
        let d = k * &rep.represent(&[0.4, 1.0, -0.7, 0.2]).unwrap();
        let a = &(rep.gamma(0) * rep.gamma(2)) + &CMat::identity(4).scale(c64(0.3, 0.0));
        let b = rep.represent(&[0.1, 0.5, 0.0, -1.2]).unwrap();
        let a1 = rep.gamma(1) * rep.gamma(2);
        let b1 = rep.represent(&[1.0, 0.0, 0.3, 0.0]).unwrap();
        let omega = twisted_one_form(&[(a1.clone(), b1.clone())], &d, k);
        let lhs = bimodule_action(&a, &omega, &b, k);
        let ra = &(k * &a) * k;
        let rb1 = &(k * &b1) * k;
        let rhs = twisted_one_form(&[(&ra * &a1, &b1 * &b), (-(&(&ra * &a1) * &rb1), b.clone())], &d, k);
        assert!(lhs.dist(&rhs) < 1e-12);
    }

    #[test]
    fn first_order_trivial_cases() {
        let (rep, ops) = lorentz();
        let d = &ops.k * &rep.represent(&[1.0, 0.2, -0.4, 0.9]).unwrap();
        let id = CMat::identity(4);
        let r = twisted_first_order_residual(&d, &id, &id, &ops.j, &ops.k, 1e-12).unwrap();
        assert!(r.passed);
        let s = id.scale(c64(0.3, -2.0));
        let t = id.scale(c64(1.5, 0.5));
        assert!(twisted_first_order_residual(&d, &s, &t, &ops.j, &ops.k, 1e-12).unwrap().passed);
    }

    #[test]
    fn fluctuate_examples() {
        let (rep, ops) = lorentz();
        let d = &ops.k * &rep.represent(&[1.0, 0.2, -0.4, 0.9]).unwrap();
        assert_eq!(fluctuate(&d, &CMat::zeros(4, 4), &ops.j, 1).unwrap(), d);
        let cc = AntilinearOp::conjugation(4);
        let a = CMat::from_real(4, 4, &[1., 2., 0., 0., 2., -1., 0., 3., 0., 0., 0.5, 0., 0., 3., 0., 2.]).unwrap();
        let out = fluctuate(&d, &a, &cc, 1).unwrap();
        assert!(out.dist(&(&d + &a.scale(c64(2.0, 0.0)))) < 1e-15);
    }

    #[test]
    fn gauge_transform_examples() {
        let (rep, ops) = lorentz();
        let d = &ops.k * &rep.represent(&[1.0, 0.2, -0.4, 0.9]).unwrap();
        let id = CMat::identity(4);
        assert!(gauge_transform(&d, &id, &ops.j, &ops.k).unwrap().dist(&d) < 1e-15);
        for x in sample_spin_plus(&rep, 10, 2).unwrap() {
            let out = gauge_transform(&d, x.matrix(), &ops.j, &ops.k).unwrap();
            assert!(out.dist(&out.adjoint()) < 1e-11);
        }
        let bad = id.scale(c64(2.0, 0.0));
        assert!(matches!(gauge_transform(&d, &bad, &ops.j, &ops.k), Err(Error::NotKUnitary(_))));
    }

    #[test]
    fn single_sided_fluctuation_matches_conjugation() {
        let (rep, ops) = lorentz();
        let d = &ops.k * &rep.represent(&[1.0, 0.2, -0.4, 0.9]).unwrap();
        for x in sample_spin_plus(&rep, 20, 9).unwrap() {
            let u = x.matrix();
            let conj = &(u * &d) * &u.adjoint();
            assert!((&d + &one_sided_fluctuation(&d, u, &ops.k)).dist(&conj) < 1e-10);
        }
    }

    #[test]
    fn doublet_is_self_adjoint_and_twisted_graded() {
        let (rep, ops) = lorentz();
        let t = TwistedTripleData::fourier_doublet(&rep, &ops, &[0.7, -1.1, 0.4, 0.9]).unwrap();
        for (name, r) in t.invariant_residuals(1e-12) {
            assert!(r.passed, "{name}");
        }
        assert_eq!(t.sign_table(1e-12).unwrap().pseudo_row(), Some([1, 1, -1, -1]));
    }

    #[test]
    fn leibniz_and_adjoint_checks() {
        let (rep, ops) = lorentz();
        let t = TwistedTripleData::clifford_symbol(&rep, &ops, &[0.3, -0.5, 0.2, 0.9]).unwrap();
        let a = rep.represent(&[1.0, 0.2, 0.0, -0.4]).unwrap();
        let b = &rep.gammas()[2] + &CMat::identity(4).scale(IM);
        assert!(twisted_leibniz_check(&t.d, &t.k, &a, &b, 1e-12).passed);
        let space = t.space();
        for (name, r) in adjoint_checks(&space, 10, 3, 1e-12).unwrap() {
            assert!(r.passed, "{name}: {}", r.value);
        }
        let units: Vec<CMat> = sample_spin_plus(&rep, 4, 9).unwrap().iter().map(|s| s.matrix().clone()).collect();
        assert!(k_product_invariance_check(&space, &units, 5, 1, 1e-10).unwrap().passed);
        // A plain unitary that does not commute with K breaks invariance.
        let rot = &CMat::identity(4).scale(c64(0.8, 0.0)) + &rep.gammas()[1].scale(c64(0.6, 0.0));
        assert!(!k_product_invariance_check(&space, &[rot], 5, 1, 1e-6).unwrap().passed);
    }
}
