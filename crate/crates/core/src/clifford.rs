//! Irreducible representations of even-dimensional complex Clifford algebras
//! and the operators implementing twist, grading and charge conjugation.
//!
//! Euclidean generators come from the Jordan–Wigner pattern
//! `γ̂_{2j} = σ3^{⊗j} ⊗ σ1 ⊗ I`, `γ̂_{2j+1} = σ3^{⊗j} ⊗ σ2 ⊗ I`. Directions
//! `a < p` are positive; the remaining ones pick up a factor `i`, which
//! makes them anti-Hermitian and squares them to `−I`.

use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{c64, measure_sign, pauli, AntilinearOp, CMat, Residual, C64, IM};

/// Entries below this modulus are treated as zero when fixing phases.
const PHASE_EPS: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Signature {
    p: usize,
    q: usize,
}

impl Signature {
    pub fn new(p: usize, q: usize) -> Result<Self> {
        let n = p + q;
        if n < 2 || !n.is_multiple_of(2) {
            return Err(Error::OddDimension { p, q });
        }
        Ok(Self { p, q })
    }

    /// Every signature with total dimension in `{2, 4, .., max_dim}`.
    pub fn all_up_to(max_dim: usize) -> Vec<Signature> {
        (1..=max_dim / 2)
            .flat_map(|m| (0..=2 * m).rev().map(move |p| Signature { p, q: 2 * m - p }))
            .collect()
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn dim(&self) -> usize {
        self.p + self.q
    }

    pub fn half(&self) -> usize {
        self.dim() / 2
    }

    /// Metric sign `g_a` of direction `a`.
    pub fn sign(&self, a: usize) -> f64 {
        if a < self.p {
            1.0
        } else {
            -1.0
        }
    }

    pub fn signs(&self) -> Vec<f64> {
        (0..self.dim()).map(|a| self.sign(a)).collect()
    }

    /// Applies the reflection `r`, flipping the negative-direction components.
    pub fn reflect(&self, v: &[f64]) -> Vec<f64> {
        v.iter().enumerate().map(|(a, x)| self.sign(a) * x).collect()
    }

    /// `g(u, v)` in the orthonormal basis.
    pub fn metric(&self, u: &[f64], v: &[f64]) -> f64 {
        u.iter().zip(v).enumerate().map(|(a, (x, y))| self.sign(a) * x * y).sum()
    }

    /// `g_R(u, v) = g(u, r v)`, the Euclidean product.
    pub fn metric_r(&self, u: &[f64], v: &[f64]) -> f64 {
        self.metric(u, &self.reflect(v))
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.p, self.q)
    }
}

#[derive(Clone, Debug)]
pub struct CliffordRep {
    sig: Signature,
    gammas: Vec<CMat>,
    euclidean: Vec<CMat>,
}

pub fn build_gammas(sig: Signature) -> CliffordRep {
    let m = sig.half();
    let euclidean: Vec<CMat> = (0..sig.dim())
        .map(|a| {
            let j = a / 2;
            let mut g = CMat::identity(1);
            for _ in 0..j {
                g = g.kron(&pauli(3));
            }
            g = g.kron(&pauli(if a % 2 == 0 { 1 } else { 2 }));
            g.kron(&CMat::identity(1 << (m - j - 1)))
        })
        .collect();
    let gammas = euclidean
        .iter()
        .enumerate()
        .map(|(a, g)| if sig.sign(a) > 0.0 { g.clone() } else { g.scale(IM) })
        .collect();
    CliffordRep { sig, gammas, euclidean }
}

impl CliffordRep {
    pub fn build(sig: Signature) -> Self {
        build_gammas(sig)
    }

    pub fn sig(&self) -> Signature {
        self.sig
    }

    pub fn m(&self) -> usize {
        self.sig.half()
    }

    /// Spinor dimension `2^m`.
    pub fn spinor_dim(&self) -> usize {
        1 << self.m()
    }

    pub fn gammas(&self) -> &[CMat] {
        &self.gammas
    }

    pub fn gamma(&self, a: usize) -> &CMat {
        &self.gammas[a]
    }

    /// The Hermitian generators before the factor `i` on negative directions.
    pub fn euclidean_gammas(&self) -> &[CMat] {
        &self.euclidean
    }

    pub fn signs(&self) -> Vec<f64> {
        self.sig.signs()
    }

    /// `c(v) = Σ_a v^a γ_a`.
    pub fn represent(&self, v: &[f64]) -> Result<CMat> {
        let z: Vec<C64> = v.iter().map(|&x| c64(x, 0.0)).collect();
        self.represent_complex(&z)
    }

    pub fn represent_complex(&self, v: &[C64]) -> Result<CMat> {
        if v.len() != self.gammas.len() {
            return Err(Error::Shape(format!(
                "coefficient vector of length {} for {} generators",
                v.len(),
                self.gammas.len()
            )));
        }
        let n = self.spinor_dim();
        Ok(self.gammas.iter().zip(v).fold(CMat::zeros(n, n), |acc, (g, z)| &acc + &g.scale(*z)))
    }

    /// Worst `‖{γ_a, γ_b} − 2 g_a δ_ab I‖` over all pairs.
    pub fn anticommutator_residual(&self) -> f64 {
        let n = self.spinor_dim();
        let mut worst: f64 = 0.0;
        for (a, ga) in self.gammas.iter().enumerate() {
            for (b, gb) in self.gammas.iter().enumerate() {
                let want = if a == b { 2.0 * self.sig.sign(a) } else { 0.0 };
                worst = worst.max(ga.anticommutator(gb).dist(&CMat::identity(n).scale(c64(want, 0.0))));
            }
        }
        worst
    }

    pub fn unitarity_residual(&self) -> f64 {
        let id = CMat::identity(self.spinor_dim());
        self.gammas.iter().map(|g| (g * &g.adjoint()).dist(&id)).fold(0.0, f64::max)
    }

    /// Worst `‖γ_a† − g_a γ_a‖`.
    pub fn hermiticity_residual(&self) -> f64 {
        self.gammas
            .iter()
            .enumerate()
            .map(|(a, g)| g.adjoint().dist(&g.scale(c64(self.sig.sign(a), 0.0))))
            .fold(0.0, f64::max)
    }
}

/// Multiplies `p` by the first power of `i` that makes it Hermitian, then by
/// `±1` so that its first non-negligible entry has nonnegative real part.
pub fn phase_normalize(p: &CMat) -> Option<CMat> {
    let mut phase = c64(1.0, 0.0);
    for _ in 0..4 {
        let q = p.scale(phase);
        if q.dist(&q.adjoint()) <= PHASE_EPS {
            let lead = q.as_slice().iter().find(|z| z.norm() > PHASE_EPS)?;
            let flip = lead.re < -PHASE_EPS || (lead.re.abs() <= PHASE_EPS && lead.im < 0.0);
            return Some(if flip { -q } else { q });
        }
        phase *= IM;
    }
    None
}

fn product(mats: &[&CMat], n: usize) -> CMat {
    mats.iter().fold(CMat::identity(n), |acc, g| &acc * *g)
}

/// Closed-form Euclidean charge conjugation with `Ĉ γ̂_a Ĉ⁻¹ = −conj(γ̂_a)`.
///
/// `Ĉ = ⊗_l (B σ3^{m−1−l})` with `B = σ1` for even `m` and `B = σ2` for odd `m`.
pub fn euclidean_charge_conjugation(m: usize) -> CMat {
    let base = pauli(if m.is_multiple_of(2) { 1 } else { 2 });
    (0..m).fold(CMat::identity(1), |acc, l| {
        let factor = if (m - 1 - l).is_multiple_of(2) { base.clone() } else { &base * &pauli(3) };
        acc.kron(&factor)
    })
}

#[derive(Clone, Debug)]
pub struct StructuralOps {
    pub k: CMat,
    pub gamma: CMat,
    pub c: CMat,
    pub chat: CMat,
    pub j: AntilinearOp,
    pub jhat: AntilinearOp,
}

impl StructuralOps {
    /// `ρ(X) = K X K`.
    pub fn rho(&self, x: &CMat) -> CMat {
        &(&self.k * x) * &self.k
    }

    /// `χ(X) = Γ X Γ`.
    pub fn chi(&self, x: &CMat) -> CMat {
        &(&self.gamma * x) * &self.gamma
    }

    /// `κ(X) = C conj(X) C⁻¹`.
    pub fn kappa(&self, x: &CMat) -> CMat {
        &(&self.c * &x.conj()) * &self.c.adjoint()
    }

    /// `κ̂(X) = Ĉ conj(X) Ĉ⁻¹`.
    pub fn kappa_hat(&self, x: &CMat) -> CMat {
        &(&self.chat * &x.conj()) * &self.chat.adjoint()
    }
}

pub fn build_structural(rep: &CliffordRep) -> Result<StructuralOps> {
    let sig = rep.sig();
    let n = rep.spinor_dim();
    let pick_positive = sig.p() % 2 == 1;
    let chosen: Vec<&CMat> = rep
        .gammas()
        .iter()
        .enumerate()
        .filter(|(a, _)| (sig.sign(*a) > 0.0) == pick_positive)
        .map(|(_, g)| g)
        .collect();
    let k = phase_normalize(&product(&chosen, n)).ok_or_else(|| {
        Error::Construction(format!("no phase makes the twist product Hermitian in {sig}"))
    })?;
    let id = CMat::identity(n);
    if (&k * &k).dist(&id) > PHASE_EPS {
        return Err(Error::Construction(format!("twist product does not square to I in {sig}")));
    }
    let pattern: Vec<String> = rep
        .gammas()
        .iter()
        .enumerate()
        .filter(|(a, g)| (&(&k * *g) * &k).dist(&g.scale(c64(sig.sign(*a), 0.0))) > PHASE_EPS)
        .map(|(a, _)| a.to_string())
        .collect();
    if !pattern.is_empty() {
        return Err(Error::Construction(format!(
            "twist fails the parity relation on generators [{}] in {sig}",
            pattern.join(",")
        )));
    }

    let all: Vec<&CMat> = rep.gammas().iter().collect();
    let gamma = phase_normalize(&product(&all, n))
        .ok_or_else(|| Error::Construction(format!("no Hermitian phase for the grading in {sig}")))?;
    if (&gamma * &gamma).dist(&id) > PHASE_EPS {
        return Err(Error::Construction(format!("grading does not square to I in {sig}")));
    }

    let chat = euclidean_charge_conjugation(rep.m());
    for g in rep.euclidean_gammas() {
        let lhs = &(&chat * g) * &chat.adjoint();
        if lhs.dist(&-g.conj()) > PHASE_EPS {
            return Err(Error::Construction(format!(
                "closed-form charge conjugation fails its defining relation for m = {}",
                rep.m()
            )));
        }
    }
    let c = &k * &chat;
    Ok(StructuralOps {
        j: AntilinearOp::new(c.clone())?,
        jhat: AntilinearOp::new(chat.clone())?,
        k,
        gamma,
        c,
        chat,
    })
}

/// Named residuals of the structural relations.
#[derive(Clone, Debug)]
pub struct StructuralResiduals {
    /// `K γ_a K⁻¹ = g_a γ_a`.
    pub twist_parity: Residual,
    /// `Γ γ_a Γ⁻¹ = −γ_a`.
    pub grading: Residual,
    /// `C γ_a C⁻¹ = −conj(γ_a)`.
    pub charge_conjugation: Residual,
    /// `C = K Ĉ`.
    pub c_factorization: Residual,
    /// `κ = κ̂∘ρ = ρ∘κ̂` on generators.
    pub kappa_factorization: Residual,
    /// Pairwise commutation of `ρ`, `χ`, `κ` on generators.
    pub commutation: Residual,
}

impl StructuralResiduals {
    pub fn entries(&self) -> [(&'static str, Residual); 6] {
        [
            ("twist_parity", self.twist_parity),
            ("grading", self.grading),
            ("charge_conjugation", self.charge_conjugation),
            ("c_factorization", self.c_factorization),
            ("kappa_factorization", self.kappa_factorization),
            ("commutation", self.commutation),
        ]
    }
}

pub fn verify_structural(rep: &CliffordRep, ops: &StructuralOps, tol: f64) -> StructuralResiduals {
    let sig = rep.sig();
    let gens = rep.gammas();
    let worst = |f: &dyn Fn(usize, &CMat) -> f64| {
        Residual::worst(gens.iter().enumerate().map(|(a, g)| f(a, g)), tol)
    };
    let cinv = ops.c.inverse().unwrap_or_else(|_| ops.c.adjoint());
    StructuralResiduals {
        twist_parity: worst(&|a, g| ops.rho(g).dist(&g.scale(c64(sig.sign(a), 0.0)))),
        grading: worst(&|_, g| ops.chi(g).dist(&-g)),
        charge_conjugation: worst(&|_, g| (&(&ops.c * g) * &cinv).dist(&-g.conj())),
        c_factorization: Residual::between(&ops.c, &(&ops.k * &ops.chat), tol),
        kappa_factorization: worst(&|_, g| {
            let kappa = ops.kappa(g);
            kappa.dist(&ops.kappa_hat(&ops.rho(g))).max(kappa.dist(&ops.rho(&ops.kappa_hat(g))))
        }),
        commutation: worst(&|_, g| {
            let rc = ops.rho(&ops.chi(g)).dist(&ops.chi(&ops.rho(g)));
            let rk = ops.rho(&ops.kappa(g)).dist(&ops.kappa(&ops.rho(g)));
            let ck = ops.chi(&ops.kappa(g)).dist(&ops.kappa(&ops.chi(g)));
            rc.max(rk).max(ck)
        }),
    }
}

/// Measured sign parameters of a twisted triple and its pseudo-Riemannian image.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SignTable {
    /// `K J = ε J K`.
    pub eps: i8,
    /// `K Γ = ε′ Γ K`.
    pub eps_prime: i8,
    pub eps0: i8,
    pub eps1: Option<i8>,
    pub eps2: i8,
    pub eps3: Option<i8>,
    pub eps0_k: i8,
    pub eps1_k: Option<i8>,
    pub eps2_k: i8,
    pub eps3_k: Option<i8>,
}

impl SignTable {
    /// Measures every sign from explicit operator products.
    ///
    /// `d` is the twisted Dirac operator; the pseudo side uses `K d`. Without
    /// `d` the signs involving the Dirac operator are skipped.
    pub fn measure(k: &CMat, gamma: &CMat, j: &AntilinearOp, d: Option<&CMat>, tol: f64) -> Result<SignTable> {
        let n = k.rows();
        let id = CMat::identity(n);
        let eps = measure_sign("K vs J", j.premul(k).mat(), j.then_after(k).mat(), tol)?;
        let eps_prime = measure_sign("K vs Γ", &(k * gamma), &(gamma * k), tol)?;
        let j2 = j.square();
        let eps0 = measure_sign("J²", &j2, &id, tol)?;
        let eps2 = measure_sign("J vs Γ", j.then_after(gamma).mat(), j.premul(gamma).mat(), tol)?;
        let (mut eps1, mut eps3, mut eps1_k, mut eps3_k) = (None, None, None, None);
        if let Some(d) = d {
            let dk = k * d;
            eps1 = Some(measure_sign("J vs D", j.then_after(d).mat(), j.premul(d).mat(), tol)?);
            eps3 = Some(measure_sign("D vs Γ", &(d * gamma), &(gamma * d), tol)?);
            eps1_k = Some(measure_sign("J vs D^K", j.then_after(&dk).mat(), j.premul(&dk).mat(), tol)?);
            eps3_k = Some(measure_sign("D^K vs Γ", &(&dk * gamma), &(gamma * &dk), tol)?);
        }
        Ok(SignTable {
            eps,
            eps_prime,
            eps0,
            eps1,
            eps2,
            eps3,
            eps0_k: measure_sign("J² (pseudo)", &j2, &id, tol)?,
            eps1_k,
            eps2_k: eps2,
            eps3_k,
        })
    }

    /// Each cross-relation between the twisted and pseudo signs with its truth value.
    pub fn cross_relations(&self) -> Vec<(&'static str, bool)> {
        let mut out = vec![("eps0 = eps0_k", self.eps0 == self.eps0_k), ("eps2_k = eps2", self.eps2_k == self.eps2)];
        if let (Some(e1), Some(e1k)) = (self.eps1, self.eps1_k) {
            out.push(("eps1_k = eps*eps1", e1k == self.eps * e1));
        }
        if let (Some(e3), Some(e3k)) = (self.eps3, self.eps3_k) {
            out.push(("eps3 = eps_prime*eps3_k", e3 == self.eps_prime * e3k));
        }
        out
    }

    pub fn cross_relations_hold(&self) -> bool {
        self.cross_relations().iter().all(|(_, ok)| *ok)
    }

    /// The pseudo-side row `(ε₀^K, ε₁^K, ε₂^K, ε₃^K)`.
    pub fn pseudo_row(&self) -> Option<[i8; 4]> {
        Some([self.eps0_k, self.eps1_k?, self.eps2_k, self.eps3_k?])
    }
}

impl fmt::Display for SignTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let o = |s: Option<i8>| s.map_or("-".to_string(), |v| v.to_string());
        write!(
            f,
            "eps={} eps'={} twisted=({},{},{},{}) pseudo=({},{},{},{})",
            self.eps,
            self.eps_prime,
            self.eps0,
            o(self.eps1),
            self.eps2,
            o(self.eps3),
            self.eps0_k,
            o(self.eps1_k),
            self.eps2_k,
            o(self.eps3_k)
        )
    }
}

/// Sign table of a representation with an optional Dirac symbol.
pub fn sign_table(ops: &StructuralOps, d: Option<&CMat>, tol: f64) -> Result<SignTable> {
    SignTable::measure(&ops.k, &ops.gamma, &ops.j, d, tol)
}
