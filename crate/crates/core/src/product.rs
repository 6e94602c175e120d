//! Almost-commutative products of a symbol-level twisted triple with a finite
//! KO-dimension-6 triple, and the four-dimensional signature emergence table.

use crate::clifford::{phase_normalize, CliffordRep, SignTable, StructuralOps};
use crate::error::{Error, Result};
use crate::krein::{
    fluctuate, gauge_transform, one_sided_fluctuation, twisted_commutator, twisted_first_order_residual, KreinSpace,
    TwistedTripleData,
};
use crate::linalg::{c64, inner, kron_vec, measure_sign, AntilinearOp, CMat, Residual, C64, IM};
use crate::morphism::gauge_pair;

const BUILD_TOL: f64 = 1e-12;
const PRODUCT_TOL: f64 = 1e-11;
const GATE: f64 = 1e-9;

/// Finite spectral triple `(A_F, H_F, D_F, J_F, Γ_F)`.
#[derive(Clone, Debug)]
pub struct FiniteTriple {
    pub algebra_gens: Vec<CMat>,
    pub d: CMat,
    pub j: AntilinearOp,
    pub gamma: CMat,
}

impl FiniteTriple {
    /// KO-dimension-6 model on `C⁴` with algebra `C ⊕ C` acting as `(x, y) ↦ diag(x, y, x, x)`.
    ///
    /// `Γ_F = diag(1, −1, −1, 1)`, `J_F` swaps the two `C²` blocks and conjugates,
    /// `D_F = [[0, m̄], [m, 0]] ⊕ [[0, m], [m̄, 0]]`.
    pub fn ko6(mass: C64) -> Result<Self> {
        let z = c64(0.0, 0.0);
        let o = c64(1.0, 0.0);
        let d = CMat::from_rows(&[
            [z, mass.conj(), z, z],
            [mass, z, z, z],
            [z, z, z, mass],
            [z, z, mass.conj(), z],
        ]);
        let swap = CMat::from_rows(&[[z, z, o, z], [z, z, z, o], [o, z, z, z], [z, o, z, z]]);
        let t = Self {
            algebra_gens: vec![CMat::diag(&[o, z, o, o]), CMat::diag(&[z, o, z, z])],
            d,
            j: AntilinearOp::new(swap)?,
            gamma: CMat::diag(&[o, -o, -o, o]),
        };
        if let Some((name, r)) = t.invariant_residuals(BUILD_TOL)?.into_iter().find(|(_, r)| !r.passed) {
            return Err(Error::ConstraintViolation { name: name.into(), value: r.value });
        }
        Ok(t)
    }

    /// Unitary `diag(x, y, x, x)` of the finite algebra.
    pub fn algebra_unitary(&self, x: C64, y: C64) -> CMat {
        CMat::diag(&[x, y, x, x])
    }

    pub fn dim(&self) -> usize {
        self.d.rows()
    }

    /// Self-adjointness, grading, KO-6 signs and the first-order condition.
    pub fn invariant_residuals(&self, tol: f64) -> Result<Vec<(&'static str, Residual)>> {
        let n = self.dim();
        let id = CMat::identity(n);
        let jd = self.j.then_after(&self.d);
        let dj = self.j.premul(&self.d);
        let jg = self.j.then_after(&self.gamma);
        let gj = self.j.premul(&self.gamma);
        let mut first_order: f64 = 0.0;
        for a in &self.algebra_gens {
            for b in &self.algebra_gens {
                let b_op = self.j.conjugate(&b.adjoint())?;
                first_order = first_order.max(self.d.commutator(a).commutator(&b_op).op_norm()?);
            }
        }
        Ok(vec![
            ("finite self-adjoint", Residual::between(&self.d, &self.d.adjoint(), tol)),
            ("finite grading involution", Residual::between(&(&self.gamma * &self.gamma), &id, tol)),
            ("finite grading hermitian", Residual::between(&self.gamma, &self.gamma.adjoint(), tol)),
            ("J_F squared = +1", Residual::between(&self.j.square(), &id, tol)),
            ("J_F D_F = D_F J_F", Residual::between(jd.mat(), dj.mat(), tol)),
            ("J_F Γ_F = −Γ_F J_F", Residual::between(jg.mat(), &-gj.mat(), tol)),
            ("Γ_F D_F = −D_F Γ_F", Residual::new(self.gamma.anticommutator(&self.d).op_norm()?, tol)),
            ("finite first order", Residual::new(first_order, tol)),
        ])
    }
}

/// `‖O − O†‖`, `‖J∘O − ε O∘J‖` and `‖Γ O − ε′ O Γ‖`.
pub fn constraint_check_o(
    o: &CMat,
    j: &AntilinearOp,
    gamma: &CMat,
    eps: i8,
    eps_prime: i8,
    tol: f64,
) -> [(&'static str, Residual); 3] {
    let e = c64(f64::from(eps), 0.0);
    let ep = c64(f64::from(eps_prime), 0.0);
    [
        ("O self-adjoint", Residual::between(o, &o.adjoint(), tol)),
        ("J O = eps O J", Residual::between(j.premul(o).mat(), &j.then_after(o).mat().scale(e), tol)),
        ("Γ O = eps' O Γ", Residual::between(&(gamma * o), &(o * gamma).scale(ep), tol)),
    ]
}

/// `(A ⊗ A_F, H ⊗ H_F, D_p, J_p, Γ_p)` with twist `K_p = K ⊗ 1_F`.
#[derive(Clone, Debug)]
pub struct ProductTripleData {
    pub manifold: TwistedTripleData,
    pub finite: FiniteTriple,
    pub dp: CMat,
    pub jp: AntilinearOp,
    pub gammap: CMat,
    pub kp: CMat,
}

/// `D_p = D ⊗ 1_F + K ⊗ D_F`, `J_p = J ⊗ J_F`, `Γ_p = Γ ⊗ Γ_F`, `K_p = K ⊗ 1_F`.
pub fn assemble_product(manifold: TwistedTripleData, finite: FiniteTriple) -> Result<ProductTripleData> {
    let idf = CMat::identity(finite.dim());
    let pt = ProductTripleData {
        dp: &manifold.d.kron(&idf) + &manifold.k.kron(&finite.d),
        jp: manifold.j.kron(&finite.j),
        gammap: manifold.gamma.kron(&finite.gamma),
        kp: manifold.k.kron(&idf),
        manifold,
        finite,
    };
    for (name, r) in pt.invariant_residuals(PRODUCT_TOL)? {
        if !r.passed {
            return Err(Error::ConstraintViolation { name: name.into(), value: r.value });
        }
    }
    Ok(pt)
}

impl ProductTripleData {
    pub fn dim(&self) -> usize {
        self.dp.rows()
    }

    pub fn space(&self) -> KreinSpace {
        KreinSpace::new(self.kp.clone()).expect("K ⊗ 1 inherits the Krein involution")
    }

    /// `D^K_p = D^K ⊗ 1_F + 1 ⊗ D_F`.
    pub fn dkp(&self) -> CMat {
        let idf = CMat::identity(self.finite.dim());
        &self.manifold.dk().kron(&idf) + &CMat::identity(self.manifold.dim()).kron(&self.finite.d)
    }

    /// Twisted grading `{D_p, Γ_p}_{ρ_p}` and the rewrite `D_p = K_p D^K_p`.
    pub fn invariant_residuals(&self, tol: f64) -> Result<Vec<(&'static str, Residual)>> {
        let twisted = &(&self.dp * &self.gammap) + &(&(&(&self.kp * &self.gammap) * &self.kp) * &self.dp);
        Ok(vec![
            ("product twisted grading", Residual::new(twisted.op_norm()?, tol)),
            ("product K-rewrite", Residual::between(&self.dp, &(&self.kp * &self.dkp()), tol)),
            ("product self-adjoint", Residual::between(&self.dp, &self.dp.adjoint(), tol)),
        ])
    }

    /// Measured `(ε₀^p, ε₁^p, ε₂^p, ε₃^p)` and their pseudo counterparts.
    pub fn sign_table(&self, tol: f64) -> Result<SignTable> {
        SignTable::measure(&self.kp, &self.gammap, &self.jp, Some(&self.dp), tol)
    }
}

/// `[D_p, a₁ ⊗ a₂]_{ρ_p}` against `[D, a₁]_ρ ⊗ a₂ + K a₁ ⊗ [D_F, a₂]`.
pub fn derivation_split_check(pt: &ProductTripleData, a1: &CMat, a2: &CMat, tol: f64) -> Result<Residual> {
    let lhs = twisted_commutator(&pt.dp, &a1.kron(a2), &pt.kp);
    let k = &pt.manifold.k;
    let rhs = &twisted_commutator(&pt.manifold.d, a1, k).kron(a2) + &(k * a1).kron(&pt.finite.d.commutator(a2));
    Ok(Residual::new(lhs.dist(&rhs), tol))
}

fn unitary_gate(u: &CMat) -> Result<()> {
    let id = CMat::identity(u.rows());
    let r = (u * &u.adjoint()).dist(&id).max((&u.adjoint() * u).dist(&id));
    if r > GATE {
        return Err(Error::NotUnitary(r));
    }
    Ok(())
}

/// `(V_K ⊗ U) D_p (V_K ⊗ U)† = K ⊗ 1 · (D^K_{A^K} ⊗ 1 + 1 ⊗ D_{A_F})` with
/// `U_K = u_K J u_K J⁻¹`, `V_K = K U_K K`, `D^K_{A^K} = U_K D^K U_K⁺`,
/// `U = u J_F u J_F⁻¹` and `D_{A_F} = U D_F U†`.
pub fn product_fluctuation_check(pt: &ProductTripleData, u_k: &CMat, u: &CMat, tol: f64) -> Result<Residual> {
    let space = pt.manifold.space();
    let gate = space.is_k_unitary(u_k, GATE)?;
    if !gate.passed {
        return Err(Error::NotKUnitary(gate.value));
    }
    if u.rows() != pt.finite.dim() || u.cols() != pt.finite.dim() {
        return Err(Error::Shape("finite unitary has the wrong size".into()));
    }
    unitary_gate(u)?;
    let big_uk = gauge_pair(u_k, &pt.manifold.j)?;
    let big_u = gauge_pair(u, &pt.finite.j)?;
    let dk_fluct = &(&big_uk * &pt.manifold.dk()) * &space.k_adjoint(&big_uk)?;
    let df_fluct = &(&big_u * &pt.finite.d) * &big_u.adjoint();
    let v = space.rho(&big_uk).kron(&big_u);
    let lhs = &(&v * &pt.dp) * &v.adjoint();
    let idf = CMat::identity(pt.finite.dim());
    let rhs = &pt.kp * &(&dk_fluct.kron(&idf) + &CMat::identity(pt.manifold.dim()).kron(&df_fluct));
    Ok(Residual::between(&lhs, &rhs, tol))
}

/// Gauge transform by `u = φ·1 ⊗ u_F` against `D_p + A + ε₁ J_p A J_p⁻¹` with `A = u [D_p, u†]_{ρ_p}`.
pub fn product_gauge_formula_check(pt: &ProductTripleData, phase: C64, u_f: &CMat, tol: f64) -> Result<Residual> {
    unitary_gate(u_f)?;
    let u = CMat::identity(pt.manifold.dim()).scale(phase).kron(u_f);
    let eps1 = measure_sign("J_p vs D_p", pt.jp.then_after(&pt.dp).mat(), pt.jp.premul(&pt.dp).mat(), BUILD_TOL)?;
    let gauged = gauge_transform(&pt.dp, &u, &pt.jp, &pt.kp)?;
    let a = one_sided_fluctuation(&pt.dp, &u, &pt.kp);
    let formula = fluctuate(&pt.dp, &a, &pt.jp, eps1)?;
    Ok(Residual::between(&gauged, &formula, tol))
}

/// Worst twisted first-order residual over `a = s₁ ⊗ a₂`, `b = s₂ ⊗ b₂` with
/// scalar manifold parts and finite generators.
pub fn product_first_order_check(pt: &ProductTripleData, scalars: &[C64], tol: f64) -> Result<Residual> {
    let idm = CMat::identity(pt.manifold.dim());
    let mut worst: f64 = 0.0;
    for s1 in scalars {
        for s2 in scalars {
            for a2 in &pt.finite.algebra_gens {
                for b2 in &pt.finite.algebra_gens {
                    let a = idm.scale(*s1).kron(a2);
                    let b = idm.scale(*s2).kron(b2);
                    worst = worst.max(twisted_first_order_residual(&pt.dp, &a, &b, &pt.jp, &pt.kp, tol)?.value);
                }
            }
        }
    }
    Ok(Residual::new(worst, tol))
}

#[derive(Clone, Copy, Debug)]
pub struct FermionicAction {
    pub lhs: C64,
    pub rhs: C64,
    pub residual: f64,
}

/// `⟨ψ₁⊗ψ₂, D_p(φ₁⊗φ₂)⟩` against `⟨ψ₁, D^K φ₁⟩_K ⟨ψ₂, φ₂⟩ + ⟨ψ₁, φ₁⟩_K ⟨ψ₂, D_F φ₂⟩`.
pub fn fermionic_action(
    pt: &ProductTripleData,
    psi1: &[C64],
    psi2: &[C64],
    phi1: &[C64],
    phi2: &[C64],
) -> Result<FermionicAction> {
    let (n, nf) = (pt.manifold.dim(), pt.finite.dim());
    if psi1.len() != n || phi1.len() != n || psi2.len() != nf || phi2.len() != nf {
        return Err(Error::Shape(format!("product states must live in C^{n} ⊗ C^{nf}")));
    }
    let lhs = inner(&kron_vec(psi1, psi2), &pt.dp.apply(&kron_vec(phi1, phi2)));
    let space = pt.manifold.space();
    let rhs = space.k_product(psi1, &pt.manifold.dk().apply(phi1))? * inner(psi2, phi2)
        + space.k_product(psi1, phi1)? * inner(psi2, &pt.finite.d.apply(phi2));
    Ok(FermionicAction { lhs, rhs, residual: (lhs - rhs).norm() })
}

#[derive(Clone, Debug)]
pub struct MassShape {
    /// `⟨ψ₂, D_F φ₂⟩`.
    pub finite_factor: C64,
    /// `⟨ψ₁⊗ψ₂, (K⊗D_F)(φ₁⊗φ₂)⟩`.
    pub mass_term: C64,
    pub residual: Residual,
}

/// The finite block of `D_p` is `K ⊗ D_F` with `K = γ_K^(0)`, so its
/// contribution to the action is `⟨ψ₁, φ₁⟩_K · ⟨ψ₂, D_F φ₂⟩`.
pub fn dirac_mass_shape_check(
    pt: &ProductTripleData,
    gamma0: &CMat,
    states: (&[C64], &[C64], &[C64], &[C64]),
    tol: f64,
) -> Result<MassShape> {
    let (psi1, psi2, phi1, phi2) = states;
    let idf = CMat::identity(pt.finite.dim());
    let block = &pt.dp - &pt.manifold.d.kron(&idf);
    let block_res = block.dist(&gamma0.kron(&pt.finite.d));
    let twist_res = pt.manifold.k.dist(gamma0);
    let space = pt.manifold.space();
    let finite_factor = inner(psi2, &pt.finite.d.apply(phi2));
    let mass_term = inner(&kron_vec(psi1, psi2), &block.apply(&kron_vec(phi1, phi2)));
    let factor_res = (mass_term - space.k_product(psi1, phi1)? * finite_factor).norm();
    Ok(MassShape {
        finite_factor,
        mass_term,
        residual: Residual::worst([block_res, twist_res, factor_res], tol),
    })
}

/// Subsets of `{0, …, n−1}` ordered by size, then lexicographically.
fn graded_subsets(n: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = (0u32..1 << n)
        .map(|mask| (0..n).filter(|a| mask & (1 << a) != 0).collect())
        .collect();
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out
}

fn subset_label(s: &[usize]) -> String {
    if s.is_empty() {
        "1".to_string()
    } else {
        s.iter().map(|a| format!("g{a}")).collect()
    }
}

fn phased_product(gammas: &[CMat], subset: &[usize]) -> Result<CMat> {
    let n = gammas[0].rows();
    let p = subset.iter().fold(CMat::identity(n), |acc, a| &acc * &gammas[*a]);
    phase_normalize(&p).ok_or_else(|| Error::Construction("gamma product has no Hermitian phase".into()))
}

/// `s_a` in `K γ_a K = s_a γ_a`, or `None` if some generator neither commutes nor anticommutes.
fn parity_pattern(k: &CMat, gammas: &[CMat]) -> Option<Vec<i8>> {
    gammas.iter().map(|g| measure_sign("parity", &(&(k * g) * k), g, BUILD_TOL).ok()).collect()
}

#[derive(Clone, Debug)]
pub struct EmergenceRow {
    pub label: String,
    pub grade: usize,
    pub k: CMat,
    /// `K Ĵ = ε Ĵ K`.
    pub eps: Option<i8>,
    /// `K Γ = ε′ Γ K`.
    pub eps_prime: Option<i8>,
    /// `J Γ = ε₂^K Γ J` for `J = K Ĵ`.
    pub eps2_k: Option<i8>,
    /// Diagonal of `½{γ_K^a, γ_K^b}`.
    pub induced: Option<Vec<i8>>,
    /// First violated admissibility constraint.
    pub excluded: Option<String>,
}

impl EmergenceRow {
    pub fn admissible(&self) -> bool {
        self.excluded.is_none()
    }

    /// `(#plus, #minus)` of the induced signature.
    pub fn counts(&self) -> Option<(usize, usize)> {
        let s = self.induced.as_ref()?;
        let plus = s.iter().filter(|x| **x > 0).count();
        Some((plus, s.len() - plus))
    }
}

/// Twist candidates among the 16 phase-normalised products of the Euclidean
/// 4D gammas, with their signs and the metric `½{γ_K^a, γ_K^b}` they induce.
///
/// `γ_K^a = φ_a γ̂^a` with `φ_a ∈ {1, i}` the phase making `K γ_K^a` Hermitian.
/// A candidate is admissible when it is Hermitian, unitary, involutive,
/// has definite parity with every generator, definite `ε` and `ε′`, and its
/// pseudo side built with `J = K Ĵ` has `ε₂^K = −1`.
pub fn signature_emergence(rep: &CliffordRep, ops: &StructuralOps) -> Result<Vec<EmergenceRow>> {
    let sig = rep.sig();
    if sig.p() != 4 || sig.q() != 0 {
        return Err(Error::Shape(format!("emergence table needs the Euclidean (4,0) representation, got {sig}")));
    }
    let gammas = rep.gammas();
    let n = rep.spinor_dim();
    let id = CMat::identity(n);
    let mut rows = Vec::new();
    for subset in graded_subsets(4) {
        let k = phased_product(gammas, &subset)?;
        let sign = |what: &str, l: &CMat, r: &CMat| measure_sign(what, l, r, BUILD_TOL).ok();
        let eps = sign("K vs Ĵ", ops.jhat.premul(&k).mat(), ops.jhat.then_after(&k).mat());
        let eps_prime = sign("K vs Γ", &(&k * &ops.gamma), &(&ops.gamma * &k));
        let j = ops.jhat.premul(&k);
        let eps2_k = sign("J vs Γ", j.then_after(&ops.gamma).mat(), j.premul(&ops.gamma).mat());
        let pattern = parity_pattern(&k, gammas);
        let induced = pattern.as_ref().map(|_| induced_signature(&k, gammas)).transpose()?;
        let excluded = if k.dist(&k.adjoint()) > BUILD_TOL {
            Some("not hermitian")
        } else if (&k * &k.adjoint()).dist(&id) > BUILD_TOL {
            Some("not unitary")
        } else if (&k * &k).dist(&id) > BUILD_TOL {
            Some("not involutive")
        } else if pattern.is_none() {
            Some("no definite parity")
        } else if eps.is_none() || eps_prime.is_none() {
            Some("no definite eps/eps'")
        } else if eps2_k != Some(-1) {
            Some("eps2_K != -1")
        } else if induced.as_ref() != pattern.as_ref() {
            Some("induced metric disagrees with parity")
        } else {
            None
        };
        rows.push(EmergenceRow {
            label: subset_label(&subset),
            grade: subset.len(),
            k,
            eps,
            eps_prime,
            eps2_k,
            induced,
            excluded: excluded.map(str::to_string),
        });
    }
    Ok(rows)
}

fn induced_signature(k: &CMat, gammas: &[CMat]) -> Result<Vec<i8>> {
    let twisted: Vec<CMat> = gammas
        .iter()
        .map(|g| {
            [c64(1.0, 0.0), IM]
                .into_iter()
                .map(|phase| g.scale(phase))
                .find(|gk| {
                    let h = k * gk;
                    h.dist(&h.adjoint()) <= BUILD_TOL
                })
                .ok_or_else(|| Error::Construction("no phase makes K γ Hermitian".into()))
        })
        .collect::<Result<_>>()?;
    let n = k.rows();
    let mut out = Vec::with_capacity(gammas.len());
    for (a, ga) in twisted.iter().enumerate() {
        for (b, gb) in twisted.iter().enumerate() {
            let g_ab = ga.anticommutator(gb).scale(c64(0.5, 0.0));
            if a != b && g_ab.max_abs() > BUILD_TOL {
                return Err(Error::Construction("induced metric is not diagonal".into()));
            }
            if a == b {
                out.push(measure_sign("induced metric", &g_ab, &CMat::identity(n), BUILD_TOL)?);
            }
        }
    }
    Ok(out)
}

/// `ε = −1 ⇔ (+,−,−,−)` and `ε = +1 ⇔ (+,+,+,−)` across admissible rows.
pub fn emergence_correspondence(rows: &[EmergenceRow]) -> bool {
    let admissible: Vec<&EmergenceRow> = rows.iter().filter(|r| r.admissible()).collect();
    !admissible.is_empty()
        && admissible.iter().all(|r| match (r.eps, r.counts()) {
            (Some(-1), Some(c)) => c == (1, 3),
            (Some(1), Some(c)) => c == (3, 1),
            _ => false,
        })
}

#[derive(Clone, Debug)]
pub struct OScanRow {
    pub label: String,
    pub constraints_hold: bool,
    /// `O γ_a O = s_a γ_a` with the signature signs.
    pub pattern_matches: bool,
    /// `O γ_a O = −s_a γ_a`.
    pub pattern_negated: bool,
}

/// Every product with the signature pattern obeys the constraints, and every
/// product obeying the constraints carries the pattern up to an overall sign.
pub fn o_scan_consistent(rows: &[OScanRow]) -> bool {
    rows.iter().any(|r| r.pattern_matches)
        && rows.iter().all(|r| {
            (!r.pattern_matches || r.constraints_hold) && (!r.constraints_hold || r.pattern_matches || r.pattern_negated)
        })
}

/// Checks every phase-normalised gamma product as a candidate `O` against the
/// constraints with the measured `(ε, ε′)`, and against the parity pattern
/// `O γ_a O = s_a γ_a` of the signature.
pub fn o_constraint_scan(rep: &CliffordRep, ops: &StructuralOps, tol: f64) -> Result<Vec<OScanRow>> {
    let table = SignTable::measure(&ops.k, &ops.gamma, &ops.j, None, tol)?;
    let want: Vec<i8> = rep.signs().iter().map(|s| if *s > 0.0 { 1 } else { -1 }).collect();
    let negated: Vec<i8> = want.iter().map(|s| -s).collect();
    graded_subsets(rep.sig().dim())
        .into_iter()
        .map(|subset| {
            let o = phased_product(rep.gammas(), &subset)?;
            let constraints_hold = constraint_check_o(&o, &ops.j, &ops.gamma, table.eps, table.eps_prime, tol)
                .iter()
                .all(|(_, r)| r.passed);
            let pattern = parity_pattern(&o, rep.gammas());
            Ok(OScanRow {
                label: subset_label(&subset),
                constraints_hold,
                pattern_matches: pattern.as_deref() == Some(&want[..]),
                pattern_negated: pattern.as_deref() == Some(&negated[..]),
            })
        })
        .collect()
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

    fn product(mass: C64) -> ProductTripleData {
        let (rep, ops) = setup(1, 3);
        let manifold = TwistedTripleData::fourier_doublet(&rep, &ops, &[0.7, -0.3, 0.4, 1.1]).unwrap();
        assemble_product(manifold, FiniteTriple::ko6(mass).unwrap()).unwrap()
    }

    #[test]
    fn ko6_examples() {
        let zero = FiniteTriple::ko6(c64(0.0, 0.0)).unwrap();
        assert_eq!(zero.d.max_abs(), 0.0);
        let one = FiniteTriple::ko6(c64(1.0, 0.0)).unwrap();
        assert_eq!(one.j.then_after(&one.d).mat(), one.j.premul(&one.d).mat());
        let m = FiniteTriple::ko6(c64(1.0, 2.0)).unwrap();
        assert_eq!(m.gamma.anticommutator(&m.d).max_abs(), 0.0);
        for (name, r) in m.invariant_residuals(0.0).unwrap() {
            assert!(r.passed, "{name}: {}", r.value);
        }
    }

    #[test]
    fn constraint_examples() {
        let (_, ops) = setup(1, 3);
        let t = SignTable::measure(&ops.k, &ops.gamma, &ops.j, None, 1e-12).unwrap();
        for (name, r) in constraint_check_o(&ops.k, &ops.j, &ops.gamma, t.eps, t.eps_prime, 1e-12) {
            assert!(r.passed, "{name}");
        }
        let id = CMat::identity(4);
        assert!(constraint_check_o(&id, &ops.j, &ops.gamma, 1, 1, 1e-12).iter().all(|(_, r)| r.passed));
        let bites = constraint_check_o(&ops.gamma, &ops.j, &ops.gamma, t.eps, t.eps_prime, 1e-12);
        assert!(bites.iter().any(|(_, r)| !r.passed));
    }

    #[test]
    fn zero_mass_product_is_manifold_only() {
        let pt = product(c64(0.0, 0.0));
        assert_eq!(pt.dp, pt.manifold.d.kron(&CMat::identity(4)));
        let pt_table = pt.sign_table(1e-12).unwrap();
        let m_table = pt.manifold.sign_table(1e-12).unwrap();
        assert_eq!((pt_table.eps1, pt_table.eps3, pt_table.eps1_k), (m_table.eps1, m_table.eps3, m_table.eps1_k));
    }

    #[test]
    fn product_invariants() {
        let pt = product(c64(0.6, -0.8));
        for (name, r) in pt.invariant_residuals(1e-11).unwrap() {
            assert!(r.passed, "{name}: {}", r.value);
        }
        assert!(pt.sign_table(1e-12).unwrap().cross_relations_hold());
    }

    #[test]
    fn derivation_split() {
        let pt = product(c64(1.0, 0.5));
        let idm = CMat::identity(pt.manifold.dim());
        let idf = CMat::identity(4);
        assert_eq!(derivation_split_check(&pt, &idm, &idf, 0.0).unwrap().value, 0.0);
        let a2 = pt.finite.algebra_gens[1].clone();
        let direct = twisted_commutator(&pt.dp, &idm.kron(&a2), &pt.kp);
        assert!(direct.dist(&pt.manifold.k.kron(&pt.finite.d.commutator(&a2))) < 1e-14);
        let a1 = idm.scale(c64(0.3, -1.2));
        for a2 in &pt.finite.algebra_gens {
            assert!(derivation_split_check(&pt, &a1, a2, 1e-12).unwrap().passed);
        }
    }

    #[test]
    fn fluctuation_trivial_and_finite_only() {
        let pt = product(c64(1.0, 0.0));
        let idm = CMat::identity(pt.manifold.dim());
        let idf = CMat::identity(4);
        assert!(product_fluctuation_check(&pt, &idm, &idf, 1e-14).unwrap().passed);
        let u = pt.finite.algebra_unitary(c64(0.6, 0.8), c64(0.0, 1.0));
        assert!(product_fluctuation_check(&pt, &idm, &u, 1e-12).unwrap().passed);
    }

    #[test]
    fn fluctuation_with_spin_boost() {
        let pt = product(c64(0.3, 0.4));
        let (rep, _) = setup(1, 3);
        let u_f = pt.finite.algebra_unitary(c64(0.0, 1.0), c64(-0.6, 0.8));
        for s in sample_spin_plus(&rep, 5, 7).unwrap() {
            let u_k = s.matrix().kron(&CMat::identity(2));
            assert!(product_fluctuation_check(&pt, &u_k, &u_f, 1e-10).unwrap().passed);
        }
    }

    #[test]
    fn fluctuation_gates() {
        let pt = product(c64(1.0, 0.0));
        let n = pt.manifold.dim();
        let bad = CMat::identity(n).scale(c64(2.0, 0.0));
        assert!(matches!(product_fluctuation_check(&pt, &bad, &CMat::identity(4), 1e-10), Err(Error::NotKUnitary(_))));
        let not_u = CMat::identity(4).scale(c64(1.5, 0.0));
        assert!(matches!(product_fluctuation_check(&pt, &CMat::identity(n), &not_u, 1e-10), Err(Error::NotUnitary(_))));
    }

    #[test]
    fn gauge_formula_on_product() {
        let pt = product(c64(0.8, 0.3));
        let u_f = pt.finite.algebra_unitary(c64(0.6, -0.8), c64(0.0, -1.0));
        assert!(product_gauge_formula_check(&pt, c64(0.0, 1.0), &u_f, 1e-11).unwrap().passed);
    }

    #[test]
    fn first_order_on_product() {
        let pt = product(c64(1.0, -1.0));
        let r = product_first_order_check(&pt, &[c64(1.0, 0.0), c64(0.2, -0.7)], 1e-12).unwrap();
        assert!(r.passed, "{}", r.value);
    }

    #[test]
    fn fermionic_action_single_term() {
        // D = 0 with ψ₁ a +1 eigenvector of K: only the finite term survives.
        let (rep, ops) = setup(1, 3);
        let manifold = TwistedTripleData::clifford_symbol(&rep, &ops, &[0.0; 4]).unwrap();
        let pt = assemble_product(manifold, FiniteTriple::ko6(c64(1.0, 0.0)).unwrap()).unwrap();
        let v = vec![c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0)];
        let psi1: Vec<C64> = v.iter().zip(ops.k.apply(&v)).map(|(a, b)| (a + b) * 0.5).collect();
        let phi1 = vec![c64(0.2, 0.1), c64(1.0, 0.0), c64(-0.4, 0.3), c64(0.0, 0.5)];
        let psi2 = vec![c64(1.0, 0.0), c64(0.5, 0.0), c64(0.0, 0.0), c64(0.0, 1.0)];
        let phi2 = vec![c64(0.0, 1.0), c64(1.0, 0.0), c64(0.3, 0.0), c64(0.0, 0.0)];
        let fa = fermionic_action(&pt, &psi1, &psi2, &phi1, &phi2).unwrap();
        let k_part = KreinSpace::new(ops.k.clone()).unwrap().k_product(&psi1, &phi1).unwrap();
        let want = k_part * inner(&psi2, &pt.finite.d.apply(&phi2));
        assert!((fa.lhs - want).norm() < 1e-15);
        assert!(fa.residual < 1e-15);
    }

    #[test]
    fn emergence_examples() {
        let (rep, ops) = setup(4, 0);
        let rows = signature_emergence(&rep, &ops).unwrap();
        assert_eq!(rows.len(), 16);
        let row = |l: &str| rows.iter().find(|r| r.label == l).unwrap();
        assert_eq!(row("1").induced, Some(vec![1, 1, 1, 1]));
        assert_eq!(row("g0").counts(), Some((1, 3)));
        assert_eq!(row("g0").eps, Some(-1));
        assert!(row("g0").admissible());
        assert_eq!(row("g1g2g3").counts(), Some((3, 1)));
        assert_eq!(row("g1g2g3").eps, Some(1));
        assert!(emergence_correspondence(&rows));
        assert!(matches!(signature_emergence(&setup(1, 3).0, &setup(1, 3).1), Err(Error::Shape(_))));
    }

    #[test]
    fn mass_shape() {
        let (rep4, _) = setup(4, 0);
        let gamma0 = phased_product(rep4.gammas(), &[0]).unwrap();
        let (rep, ops) = setup(1, 3);
        let manifold = TwistedTripleData::clifford_symbol(&rep, &ops, &[0.3, 0.1, -0.2, 0.5]).unwrap();
        let e = |i: usize| (0..4).map(|j| c64(if i == j { 1.0 } else { 0.0 }, 0.0)).collect::<Vec<_>>();
        let psi1 = vec![c64(0.5, 0.1), c64(0.0, 1.0), c64(0.3, 0.0), c64(-0.2, 0.2)];
        for (mass, want) in [(c64(0.0, 0.0), c64(0.0, 0.0)), (c64(1.0, 0.0), c64(1.0, 0.0)), (c64(0.3, 0.7), c64(0.3, -0.7))] {
            let pt = assemble_product(manifold.clone(), FiniteTriple::ko6(mass).unwrap()).unwrap();
            let ms = dirac_mass_shape_check(&pt, &gamma0, (&psi1, &e(0), &psi1, &e(1)), 1e-12).unwrap();
            assert!(ms.residual.passed);
            assert_eq!(ms.finite_factor, want);
        }
    }
}
