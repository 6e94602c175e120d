//! Chart-level pseudo-Riemannian geometry with a constant spacelike reflection.
//!
//! Metrics are component functions on an axis-aligned box. Derivatives are
//! central finite differences; index conventions follow `Γ^λ_{μν}` stored at
//! `(λ, μ, ν)` and frame coefficients `Γ^b_{μa}` stored at `(b, μ, a)`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Index, IndexMut};
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::clifford::{CliffordRep, StructuralOps};
use crate::error::{Error, Result};
use crate::linalg::{c64, vec_norm, CMat, Residual, C64, IM};

pub type RMat = DMatrix<f64>;
type ComponentFn = Arc<dyn Fn(&[f64]) -> RMat + Send + Sync>;
type SpinorFn = Arc<dyn Fn(&[f64]) -> Vec<C64> + Send + Sync>;

pub const DEFAULT_STEP: f64 = 1e-3;
const SINGULAR_DET: f64 = 1e-10;
const MIN_EIGEN: f64 = 1e-8;
const OFF_DIAGONAL: f64 = 1e-14;

/// Dense `n × n × n` real array.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor3 {
    n: usize,
    data: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n * n] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn max_abs_diff(&self, other: &Tensor3) -> f64 {
        assert_eq!(self.n, other.n, "tensor dimension mismatch");
        self.data.iter().zip(&other.data).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
    }
}

impl Index<(usize, usize, usize)> for Tensor3 {
    type Output = f64;

    fn index(&self, (i, j, k): (usize, usize, usize)) -> &f64 {
        &self.data[(i * self.n + j) * self.n + k]
    }
}

impl IndexMut<(usize, usize, usize)> for Tensor3 {
    fn index_mut(&mut self, (i, j, k): (usize, usize, usize)) -> &mut f64 {
        &mut self.data[(i * self.n + j) * self.n + k]
    }
}

#[derive(Clone)]
pub struct MetricField {
    name: String,
    components: ComponentFn,
    r_signs: Vec<f64>,
    domain: Vec<(f64, f64)>,
}

impl fmt::Debug for MetricField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MetricField")
            .field("name", &self.name)
            .field("r_signs", &self.r_signs)
            .field("domain", &self.domain)
            .finish()
    }
}

impl MetricField {
    pub fn new(
        name: &str,
        r_signs: Vec<f64>,
        domain: Vec<(f64, f64)>,
        components: impl Fn(&[f64]) -> RMat + Send + Sync + 'static,
    ) -> Result<Self> {
        let n = r_signs.len();
        if n < 2 || !n.is_multiple_of(2) {
            return Err(Error::InvalidMetric(format!("dimension {n} is not even")));
        }
        if r_signs.iter().any(|s| *s != 1.0 && *s != -1.0) {
            return Err(Error::InvalidMetric("reflection signs must be ±1".into()));
        }
        if domain.len() != n || domain.iter().any(|(lo, hi)| !(lo < hi)) {
            return Err(Error::InvalidMetric("domain must be a nondegenerate box".into()));
        }
        Ok(Self { name: name.to_string(), components: Arc::new(components), r_signs, domain })
    }

    /// `g = diag(η_μ f_μ(x))` with `r = diag(η)`.
    pub fn diagonal(
        name: &str,
        signs: &[f64],
        half_width: f64,
        factors: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Result<Self> {
        let eta = signs.to_vec();
        let domain = vec![(-half_width, half_width); signs.len()];
        Self::new(name, signs.to_vec(), domain, move |x| {
            let f = factors(x);
            RMat::from_fn(eta.len(), eta.len(), |i, j| if i == j { eta[i] * f[i] } else { 0.0 })
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.r_signs.len()
    }

    pub fn r_signs(&self) -> &[f64] {
        &self.r_signs
    }

    pub fn domain(&self) -> &[(f64, f64)] {
        &self.domain
    }

    pub fn g(&self, x: &[f64]) -> RMat {
        (self.components)(x)
    }

    /// `g_R(·,·) = g(·, r·)`.
    pub fn g_r(&self, x: &[f64]) -> RMat {
        let mut m = self.g(x);
        for (j, s) in self.r_signs.iter().enumerate() {
            m.column_mut(j).scale_mut(*s);
        }
        m
    }

    fn select(&self, use_gr: bool, x: &[f64]) -> RMat {
        if use_gr {
            self.g_r(x)
        } else {
            self.g(x)
        }
    }

    /// Symmetry, invertibility and positivity of `g_R` at `x`.
    pub fn validate_at(&self, x: &[f64]) -> Result<()> {
        let g = self.g(x);
        let n = self.dim();
        if g.nrows() != n || g.ncols() != n || g.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidMetric(format!("components at {x:?} are not a finite {n}x{n} matrix")));
        }
        if (&g - g.transpose()).amax() > 1e-14 {
            return Err(Error::InvalidMetric("metric is not symmetric".into()));
        }
        if g.determinant().abs() <= SINGULAR_DET {
            return Err(Error::SingularMetric);
        }
        let gr = self.g_r(x);
        if (&gr - gr.transpose()).amax() > 1e-14 {
            return Err(Error::InvalidMetric("reflected metric is not symmetric".into()));
        }
        if gr.symmetric_eigenvalues().min() <= MIN_EIGEN {
            return Err(Error::InvalidMetric("reflection is not spacelike: g_R is not positive".into()));
        }
        Ok(())
    }

    pub fn check_interior(&self, x: &[f64], margin: f64) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::Shape(format!("point of length {} in dimension {}", x.len(), self.dim())));
        }
        let inside = x.iter().zip(&self.domain).all(|(v, (lo, hi))| *v - margin >= *lo && *v + margin <= *hi);
        if inside {
            Ok(())
        } else {
            Err(Error::OutOfDomain { margin })
        }
    }

    pub fn is_diagonal_at(&self, x: &[f64]) -> bool {
        let g = self.g(x);
        (0..self.dim()).all(|i| (0..self.dim()).all(|j| i == j || g[(i, j)].abs() <= OFF_DIAGONAL))
    }

    /// Deterministic points at least `margin` inside the domain.
    pub fn interior_points(&self, count: usize, seed: u64, margin: f64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| self.domain.iter().map(|(lo, hi)| rng.random_range(lo + margin..hi - margin)).collect())
            .collect()
    }

    /// `‖R g R − g‖` and `‖R g_R R − g_R‖` for `R = diag(r)`.
    pub fn reflection_isometry_residual(&self, x: &[f64]) -> f64 {
        let r = RMat::from_diagonal(&nalgebra::DVector::from_vec(self.r_signs.clone()));
        let g = self.g(x);
        let gr = self.g_r(x);
        (&r * &g * &r - &g).amax().max((&r * &gr * &r - &gr).amax())
    }

    pub fn family_names() -> &'static [&'static str] {
        &["flat", "lorentz_wave", "conformal", "split_exp", "euclidean_curved", "exp2d", "spatial_shear"]
    }

    /// Named test family with optional parameters.
    ///
    /// | name | signature | parameters |
    /// |---|---|---|
    /// | `flat` | `(p,q)` | `p`, `q` |
    /// | `lorentz_wave` | `(1,3)` | `a` = 0.1, `s` = 1 |
    /// | `conformal` | `(p,q)` | `a` = 0.1, `p` = 1, `q` = 3 |
    /// | `split_exp` | `(2,2)` | `a` = 0.2 |
    /// | `euclidean_curved` | `(4,0)` | `a` = 0.2 |
    /// | `exp2d` | `(2,0)` | `b` = 2 |
    /// | `spatial_shear` | `(1,3)`, non-diagonal | `a` = 0.3 |
    pub fn family(name: &str, params: &BTreeMap<String, f64>) -> Result<Self> {
        let allowed: &[&str] = match name {
            "flat" => &["p", "q"],
            "lorentz_wave" => &["a", "s"],
            "conformal" => &["a", "p", "q"],
            "split_exp" | "euclidean_curved" | "spatial_shear" => &["a"],
            "exp2d" => &["b"],
            _ => return Err(Error::UnknownFamily(name.to_string())),
        };
        if let Some(bad) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(Error::InvalidMetric(format!("family `{name}` has no parameter `{bad}`")));
        }
        let get = |k: &str, default: f64| params.get(k).copied().unwrap_or(default);
        let count = |k: &str, default: f64| -> Result<usize> {
            let v = get(k, default);
            if v < 0.0 || v.fract() != 0.0 {
                return Err(Error::InvalidMetric(format!("parameter `{k}` must be a nonnegative integer")));
            }
            Ok(v as usize)
        };
        let signs_for = |p: usize, q: usize| -> Vec<f64> {
            (0..p + q).map(|a| if a < p { 1.0 } else { -1.0 }).collect()
        };
        match name {
            "flat" => {
                let (p, q) = (count("p", 1.0)?, count("q", 3.0)?);
                let n = p + q;
                Self::diagonal(name, &signs_for(p, q), 1.0, move |_| vec![1.0; n])
            }
            "lorentz_wave" => {
                let (a, s) = (get("a", 0.1), get("s", 1.0));
                Self::diagonal(name, &signs_for(1, 3), 1.0, move |x| {
                    vec![1.0 + a * (x[0] + x[1]).sin(), 1.0 + a * x[1].cos(), 1.0, 1.0 + a * s * x[3] * x[3]]
                })
            }
            "conformal" => {
                let (a, p, q) = (get("a", 0.1), count("p", 1.0)?, count("q", 3.0)?);
                Self::diagonal(name, &signs_for(p, q), 1.0, move |x| {
                    let w = (2.0 * conformal_phi(a, x)).exp();
                    vec![w; x.len()]
                })
            }
            "split_exp" => {
                let a = get("a", 0.2);
                Self::diagonal(name, &signs_for(2, 2), 1.0, move |x| {
                    vec![
                        (a * x[1]).exp(),
                        1.0 + a * x[0] * x[0],
                        (a * (x[2] + x[3])).exp(),
                        1.0 + a * (x[0] * x[2]).sin(),
                    ]
                })
            }
            "euclidean_curved" => {
                let a = get("a", 0.2);
                Self::diagonal(name, &signs_for(4, 0), 1.0, move |x| {
                    vec![1.0 + a * x[1] * x[1], (a * x[0]).exp(), 1.0 + a * x[3].sin(), (a * (x[0] + x[2])).exp()]
                })
            }
            "exp2d" => {
                let b = get("b", 2.0);
                Self::diagonal(name, &signs_for(2, 0), 1.0, move |x| vec![(b * x[0]).exp(), 1.0])
            }
            "spatial_shear" => {
                let a = get("a", 0.3);
                Self::new(name, signs_for(1, 3), vec![(-1.0, 1.0); 4], move |x| {
                    let mut g = RMat::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, -1.0, -1.0, -1.0]));
                    g[(1, 2)] = -a * x[0].sin();
                    g[(2, 1)] = -a * x[0].sin();
                    g
                })
            }
            _ => unreachable!("family names are matched above"),
        }
    }
}

/// Conformal factor exponent `φ` of the `conformal` family.
pub fn conformal_phi(a: f64, x: &[f64]) -> f64 {
    let n = x.len();
    a * (x.iter().enumerate().map(|(m, v)| (v + 0.5 * m as f64).sin()).sum::<f64>() + 0.5 * x[0] * x[n - 1])
}

/// Gradient `∂_μ φ` of [`conformal_phi`].
pub fn conformal_phi_grad(a: f64, x: &[f64]) -> Vec<f64> {
    let n = x.len();
    (0..n)
        .map(|m| {
            let mut d = (x[m] + 0.5 * m as f64).cos();
            if m == 0 {
                d += 0.5 * x[n - 1];
            }
            if m == n - 1 {
                d += 0.5 * x[0];
            }
            a * d
        })
        .collect()
}

/// Central finite-difference stencils.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stencil {
    Second,
    Fourth,
    Sixth,
}

impl Stencil {
    /// `(offset, weight)` pairs of the first-derivative stencil.
    fn taps(self) -> &'static [(f64, f64)] {
        match self {
            Stencil::Second => &[(-1.0, -0.5), (1.0, 0.5)],
            Stencil::Fourth => &[(-2.0, 1.0 / 12.0), (-1.0, -2.0 / 3.0), (1.0, 2.0 / 3.0), (2.0, -1.0 / 12.0)],
            Stencil::Sixth => &[
                (-3.0, -1.0 / 60.0),
                (-2.0, 3.0 / 20.0),
                (-1.0, -3.0 / 4.0),
                (1.0, 3.0 / 4.0),
                (2.0, -3.0 / 20.0),
                (3.0, 1.0 / 60.0),
            ],
        }
    }

    pub fn reach(self) -> f64 {
        match self {
            Stencil::Second => 1.0,
            Stencil::Fourth => 2.0,
            Stencil::Sixth => 3.0,
        }
    }

    fn margin(self, h: f64) -> f64 {
        (2.0 * h).max(self.reach() * h)
    }
}

fn shifted(x: &[f64], mu: usize, dx: f64) -> Vec<f64> {
    let mut y = x.to_vec();
    y[mu] += dx;
    y
}

/// `∂_μ f(x)` for a matrix-valued `f`.
pub fn partial_mat(f: impl Fn(&[f64]) -> RMat, x: &[f64], mu: usize, h: f64, stencil: Stencil) -> RMat {
    let mut acc: Option<RMat> = None;
    for (off, w) in stencil.taps() {
        let term = f(&shifted(x, mu, off * h)) * (w / h);
        acc = Some(match acc {
            Some(a) => a + term,
            None => term,
        });
    }
    acc.expect("stencils have taps")
}

/// `∂_μ ψ(x)` for a spinor-valued `ψ`.
pub fn partial_vec(f: impl Fn(&[f64]) -> Vec<C64>, x: &[f64], mu: usize, h: f64, stencil: Stencil) -> Vec<C64> {
    let mut acc: Vec<C64> = Vec::new();
    for (off, w) in stencil.taps() {
        let v = f(&shifted(x, mu, off * h));
        if acc.is_empty() {
            acc = vec![c64(0.0, 0.0); v.len()];
        }
        for (a, b) in acc.iter_mut().zip(v) {
            *a += b * (w / h);
        }
    }
    acc
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChristoffelTensor {
    pub values: Tensor3,
    pub point: Vec<f64>,
    pub step: f64,
}

impl ChristoffelTensor {
    pub fn get(&self, l: usize, m: usize, n: usize) -> f64 {
        self.values[(l, m, n)]
    }

    /// `max |Γ^λ_{μν} − Γ^λ_{νμ}|`.
    pub fn symmetry_residual(&self) -> f64 {
        let n = self.values.dim();
        let mut worst: f64 = 0.0;
        for l in 0..n {
            for m in 0..n {
                for k in 0..n {
                    worst = worst.max((self.get(l, m, k) - self.get(l, k, m)).abs());
                }
            }
        }
        worst
    }
}

fn inverse_checked(g: &RMat) -> Result<RMat> {
    if g.determinant().abs() <= SINGULAR_DET {
        return Err(Error::SingularMetric);
    }
    g.clone().try_inverse().ok_or(Error::SingularMetric)
}

fn prepare(metric: &MetricField, x: &[f64], margin: f64) -> Result<()> {
    metric.check_interior(x, margin)?;
    metric.validate_at(x)
}

fn metric_derivatives(metric: &MetricField, use_gr: bool, x: &[f64], h: f64, stencil: Stencil) -> Vec<RMat> {
    (0..metric.dim()).map(|k| partial_mat(|y| metric.select(use_gr, y), x, k, h, stencil)).collect()
}

/// Levi-Civita symbols of `g` (or `g_R`) by second-order central differences.
pub fn christoffel(metric: &MetricField, use_gr: bool, x: &[f64], h: f64) -> Result<ChristoffelTensor> {
    christoffel_with(metric, use_gr, x, h, Stencil::Second)
}

pub fn christoffel_with(
    metric: &MetricField,
    use_gr: bool,
    x: &[f64],
    h: f64,
    stencil: Stencil,
) -> Result<ChristoffelTensor> {
    prepare(metric, x, stencil.margin(h))?;
    let n = metric.dim();
    let ginv = inverse_checked(&metric.select(use_gr, x))?;
    let dg = metric_derivatives(metric, use_gr, x, h, stencil);
    let mut values = Tensor3::zeros(n);
    for l in 0..n {
        for m in 0..n {
            for v in 0..n {
                values[(l, m, v)] = 0.5
                    * (0..n)
                        .map(|k| ginv[(l, k)] * (dg[m][(v, k)] + dg[v][(m, k)] - dg[k][(m, v)]))
                        .sum::<f64>();
            }
        }
    }
    Ok(ChristoffelTensor { values, point: x.to_vec(), step: h })
}

/// `Γ^{rλ}_{μ rν} = s_λ s_ν Γ^λ_{μν}` for the constant diagonal reflection.
pub fn reflected_christoffel(metric: &MetricField, x: &[f64], h: f64) -> Result<ChristoffelTensor> {
    let mut c = christoffel(metric, false, x, h)?;
    let s = metric.r_signs();
    let n = metric.dim();
    for l in 0..n {
        for m in 0..n {
            for v in 0..n {
                c.values[(l, m, v)] *= s[l] * s[v];
            }
        }
    }
    Ok(c)
}

/// Max-abs residual of `Γ^{rλ}_{μrν} = Γ^λ_{Rμν} + ½ g_R^{λκ}(∂_{rν} g_{μκ} − ∂_ν g^R_{μκ})`.
pub fn christoffel_relation_check(metric: &MetricField, x: &[f64], h: f64, tol: f64) -> Result<Residual> {
    let lhs = reflected_christoffel(metric, x, h)?;
    let gamma_r = christoffel(metric, true, x, h)?;
    let n = metric.dim();
    let s = metric.r_signs();
    let gr_inv = inverse_checked(&metric.g_r(x))?;
    let dg = metric_derivatives(metric, false, x, h, Stencil::Second);
    let dgr = metric_derivatives(metric, true, x, h, Stencil::Second);
    let mut worst: f64 = 0.0;
    for l in 0..n {
        for m in 0..n {
            for v in 0..n {
                let correction: f64 =
                    0.5 * (0..n).map(|k| gr_inv[(l, k)] * (s[v] * dg[v][(m, k)] - dgr[v][(m, k)])).sum::<f64>();
                worst = worst.max((lhs.get(l, m, v) - gamma_r.get(l, m, v) - correction).abs());
            }
        }
    }
    Ok(Residual::new(worst, tol))
}

/// Max-abs `∇_ν g_{μκ}` using the FD Christoffels of the same metric.
pub fn metric_compatibility_residual(metric: &MetricField, use_gr: bool, x: &[f64], h: f64) -> Result<f64> {
    let c = christoffel(metric, use_gr, x, h)?;
    let g = metric.select(use_gr, x);
    let dg = metric_derivatives(metric, use_gr, x, h, Stencil::Second);
    let n = metric.dim();
    let mut worst: f64 = 0.0;
    for v in 0..n {
        for m in 0..n {
            for k in 0..n {
                let conn: f64 = (0..n).map(|l| c.get(l, v, m) * g[(l, k)] + c.get(l, v, k) * g[(m, l)]).sum();
                worst = worst.max((dg[v][(m, k)] - conn).abs());
            }
        }
    }
    Ok(worst)
}

/// Ratio of second-order Christoffel errors at `h` and `h/2`, each measured
/// against a sixth-order reference.
pub fn fd_convergence_ratio(metric: &MetricField, use_gr: bool, x: &[f64], h: f64) -> Result<f64> {
    let reference = christoffel_with(metric, use_gr, x, h, Stencil::Sixth)?;
    let coarse = christoffel(metric, use_gr, x, h)?;
    let fine = christoffel(metric, use_gr, x, h / 2.0)?;
    Ok(coarse.values.max_abs_diff(&reference.values) / fine.values.max_abs_diff(&reference.values))
}

/// Diagonal frame: `frame[(a, μ)] = e_a^μ`, `coframe[(a, μ)] = e^a_μ`.
#[derive(Clone, Debug, PartialEq)]
pub struct Vielbein {
    pub frame: RMat,
    pub coframe: RMat,
    /// Flat signature `η_a` the frame is orthonormal for.
    pub eta: Vec<f64>,
}

pub fn vielbein(metric: &MetricField, use_gr: bool, x: &[f64]) -> Result<Vielbein> {
    metric.validate_at(x)?;
    if !metric.is_diagonal_at(x) {
        return Err(Error::NonDiagonalUnsupported);
    }
    Ok(diagonal_frame(&metric.select(use_gr, x)))
}

fn diagonal_frame(g: &RMat) -> Vielbein {
    let n = g.nrows();
    let root: Vec<f64> = (0..n).map(|m| g[(m, m)].abs().sqrt()).collect();
    Vielbein {
        frame: RMat::from_fn(n, n, |a, m| if a == m { 1.0 / root[m] } else { 0.0 }),
        coframe: RMat::from_fn(n, n, |a, m| if a == m { root[m] } else { 0.0 }),
        eta: (0..n).map(|m| g[(m, m)].signum()).collect(),
    }
}

/// Worst violation of frame duality and of orthonormality for both `g` and `g_R`.
pub fn vielbein_residual(metric: &MetricField, x: &[f64]) -> Result<f64> {
    let vb = vielbein(metric, false, x)?;
    let n = metric.dim();
    let dual = (&vb.frame * vb.coframe.transpose() - RMat::identity(n, n)).amax();
    let eta = RMat::from_diagonal(&nalgebra::DVector::from_vec(vb.eta.clone()));
    let g_inv = inverse_checked(&metric.g(x))?;
    let gr_inv = inverse_checked(&metric.g_r(x))?;
    let ortho = (&vb.coframe * g_inv * vb.coframe.transpose() - eta).amax();
    let ortho_r = (&vb.coframe * gr_inv * vb.coframe.transpose() - RMat::identity(n, n)).amax();
    Ok(dual.max(ortho).max(ortho_r))
}

fn coframe_derivatives(metric: &MetricField, x: &[f64], h: f64) -> Vec<RMat> {
    (0..metric.dim())
        .map(|m| partial_mat(|y| diagonal_frame(&metric.g(y)).coframe, x, m, h, Stencil::Second))
        .collect()
}

/// `Γ^b_{μa} = e_a^ν Γ^λ_{μν} e^b_λ − e_a^ν ∂_μ e^b_ν`.
fn frame_coefficients(chr: &Tensor3, vb: &Vielbein, dcoframe: &[RMat]) -> Tensor3 {
    let n = chr.dim();
    let mut w = Tensor3::zeros(n);
    for b in 0..n {
        for m in 0..n {
            for a in 0..n {
                let mut acc = 0.0;
                for v in 0..n {
                    let ea = vb.frame[(a, v)];
                    if ea == 0.0 {
                        continue;
                    }
                    acc += ea * (0..n).map(|l| chr[(l, m, v)] * vb.coframe[(b, l)]).sum::<f64>();
                    acc -= ea * dcoframe[m][(b, v)];
                }
                w[(b, m, a)] = acc;
            }
        }
    }
    w
}

fn require_diagonal(metric: &MetricField, x: &[f64], h: f64) -> Result<Vielbein> {
    prepare(metric, x, Stencil::Second.margin(h))?;
    for m in 0..metric.dim() {
        let lo = shifted(x, m, -h);
        let hi = shifted(x, m, h);
        if !metric.is_diagonal_at(&lo) || !metric.is_diagonal_at(&hi) {
            return Err(Error::NonDiagonalUnsupported);
        }
    }
    vielbein(metric, false, x)
}

/// Frame coefficients of `g` (or `g_R`) with the shared diagonal vielbein.
pub fn frame_connection(metric: &MetricField, use_gr: bool, x: &[f64], h: f64) -> Result<Tensor3> {
    let vb = require_diagonal(metric, x, h)?;
    let chr = christoffel(metric, use_gr, x, h)?;
    Ok(frame_coefficients(&chr.values, &vb, &coframe_derivatives(metric, x, h)))
}

/// Frame coefficients built from the reflected Christoffels, `Γ^{rb}_{μ ra}`.
pub fn reflected_frame_connection(metric: &MetricField, x: &[f64], h: f64) -> Result<Tensor3> {
    let vb = require_diagonal(metric, x, h)?;
    let chr = reflected_christoffel(metric, x, h)?;
    Ok(frame_coefficients(&chr.values, &vb, &coframe_derivatives(metric, x, h)))
}

/// `Γ^{rb}_{μ ra} = g^b g_a Γ^b_{μa} + g^b ∂_μ g_a`, max-abs residual.
pub fn rewrite_check(metric: &MetricField, x: &[f64], h: f64, tol: f64) -> Result<Residual> {
    let reflected = reflected_frame_connection(metric, x, h)?;
    let plain = frame_connection(metric, false, x, h)?;
    let s = metric.r_signs();
    let n = metric.dim();
    // The reflection is constant, so every ∂_μ g_a vanishes.
    let d_sign = 0.0;
    let mut worst: f64 = 0.0;
    for b in 0..n {
        for m in 0..n {
            for a in 0..n {
                let rhs = s[b] * s[a] * plain[(b, m, a)] + s[b] * d_sign;
                worst = worst.max((reflected[(b, m, a)] - rhs).abs());
            }
        }
    }
    Ok(Residual::new(worst, tol))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpinConnection {
    /// `Γ^b_{μa}` of `g`.
    pub gamma: Tensor3,
    /// `Γ^b_{R μa}` of `g_R`.
    pub gamma_r: Tensor3,
    /// `K^b_{μa}`.
    pub k: Tensor3,
}

/// Frame coefficients of `g` and `g_R` and the correction `K^b_{μa}`:
/// `K^b_{μa} = g^b(½ g^{bκ}(∂_{ra} g_{μκ} − ∂_a g^R_{μκ}) − ∂_μ g_a)` with
/// `g^{bκ} = e^b_λ g^{λκ}`, `∂_a = e_a^ν ∂_ν` and `∂_{ra} = s_a ∂_a`.
pub fn spin_connection_coeffs(metric: &MetricField, x: &[f64], h: f64) -> Result<SpinConnection> {
    let vb = require_diagonal(metric, x, h)?;
    let n = metric.dim();
    let dcof = coframe_derivatives(metric, x, h);
    let gamma = frame_coefficients(&christoffel(metric, false, x, h)?.values, &vb, &dcof);
    let gamma_r = frame_coefficients(&christoffel(metric, true, x, h)?.values, &vb, &dcof);
    let g_inv = inverse_checked(&metric.g(x))?;
    let dg = metric_derivatives(metric, false, x, h, Stencil::Second);
    let dgr = metric_derivatives(metric, true, x, h, Stencil::Second);
    let s = metric.r_signs();
    let frame_d = |d: &[RMat], a: usize| -> RMat {
        (0..n).fold(RMat::zeros(n, n), |acc, v| acc + &d[v] * vb.frame[(a, v)])
    };
    let d_sign = 0.0;
    let mut k = Tensor3::zeros(n);
    for a in 0..n {
        let da_g = frame_d(&dg, a);
        let da_gr = frame_d(&dgr, a);
        for b in 0..n {
            for m in 0..n {
                let mut acc = 0.0;
                for l in 0..n {
                    for kk in 0..n {
                        acc += vb.coframe[(b, l)] * g_inv[(l, kk)] * (s[a] * da_g[(m, kk)] - da_gr[(m, kk)]);
                    }
                }
                k[(b, m, a)] = vb.eta[b] * (0.5 * acc - d_sign);
            }
        }
    }
    Ok(SpinConnection { gamma, gamma_r, k })
}

/// Spinor field sampled pointwise on the chart.
#[derive(Clone)]
pub struct SpinorFieldSample {
    dim: usize,
    f: SpinorFn,
}

impl fmt::Debug for SpinorFieldSample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpinorFieldSample").field("dim", &self.dim).finish()
    }
}

impl SpinorFieldSample {
    pub fn new(dim: usize, f: impl Fn(&[f64]) -> Vec<C64> + Send + Sync + 'static) -> Self {
        Self { dim, f: Arc::new(f) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, x: &[f64]) -> Vec<C64> {
        (self.f)(x)
    }

    /// `e^{i k·x} ψ₀`.
    pub fn plane_wave(k: Vec<f64>, psi0: Vec<C64>) -> Self {
        let dim = psi0.len();
        Self::new(dim, move |x| {
            let phase = x.iter().zip(&k).map(|(a, b)| a * b).sum::<f64>();
            let z = c64(phase.cos(), phase.sin());
            psi0.iter().map(|p| p * z).collect()
        })
    }

    /// Trigonometric-polynomial fixture with every component and every
    /// coordinate dependence switched on.
    pub fn trig_fixture(dim: usize) -> Self {
        Self::new(dim, move |x| {
            let n = x.len();
            (0..dim)
                .map(|i| {
                    let t = i as f64;
                    let wave = (x[0] + 2.0 * x[1 % n] + 0.3 * t).cos();
                    let poly = x[n - 2] * x[n - 1] * (0.1 + 0.1 * t);
                    c64(1.0 - 0.3 * t, 0.5 * t - 0.2) * wave + c64(poly, 0.2 * poly) + c64(0.0, 0.1 * (x[2 % n] * t).sin())
                })
                .collect()
        })
    }

    /// Pointwise product with a real scalar function.
    pub fn weighted(&self, w: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        let f = self.f.clone();
        Self::new(self.dim, move |x| {
            let s = w(x);
            f(x).into_iter().map(|z| z * s).collect()
        })
    }
}

fn require_frame_signature(vb: &Vielbein, rep: &CliffordRep) -> Result<()> {
    if vb.eta != rep.signs() {
        return Err(Error::InvalidMetric(format!(
            "frame signature {:?} does not match the representation {}",
            vb.eta,
            rep.sig()
        )));
    }
    Ok(())
}

fn add_scaled(acc: &mut [C64], v: &[C64], z: C64) {
    for (a, b) in acc.iter_mut().zip(v) {
        *a += b * z;
    }
}

/// `i γ^μ ∇_μ ψ` with `∇_μ = ∂_μ − ¼ Γ^b_{μa} γ^a γ_b` and `γ^μ = e_a^μ γ^a`.
pub fn dirac_apply_pseudo(
    metric: &MetricField,
    rep: &CliffordRep,
    psi: &SpinorFieldSample,
    x: &[f64],
    h: f64,
) -> Result<Vec<C64>> {
    let vb = require_diagonal(metric, x, h)?;
    require_frame_signature(&vb, rep)?;
    if psi.dim() != rep.spinor_dim() {
        return Err(Error::Shape(format!("spinor of dimension {} for {}", psi.dim(), rep.sig())));
    }
    let n = metric.dim();
    let w = frame_connection(metric, false, x, h)?;
    let upper = rep.gammas();
    let lower: Vec<CMat> = upper.iter().zip(&vb.eta).map(|(g, s)| g.scale(c64(*s, 0.0))).collect();
    let pair: Vec<Vec<CMat>> = upper.iter().map(|ga| lower.iter().map(|gb| ga * gb).collect()).collect();
    let at = psi.eval(x);
    let mut out = vec![c64(0.0, 0.0); psi.dim()];
    for m in 0..n {
        let mut cov = partial_vec(|y| psi.eval(y), x, m, h, Stencil::Second);
        for a in 0..n {
            for b in 0..n {
                let coef = w[(b, m, a)];
                if coef != 0.0 {
                    add_scaled(&mut cov, &pair[a][b].apply(&at), c64(-0.25 * coef, 0.0));
                }
            }
        }
        let gmu = (0..n).fold(CMat::zeros(psi.dim(), psi.dim()), |acc, a| &acc + &upper[a].scale(c64(vb.frame[(a, m)], 0.0)));
        add_scaled(&mut out, &gmu.apply(&cov), IM);
    }
    Ok(out)
}

/// Outcome of comparing `K D^K ψ` with `−i γ̃^μ ∇̃_μ ψ`.
#[derive(Clone, Copy, Debug)]
pub struct Decomposition {
    pub residual: Residual,
    /// The unit phase `σ` with `K D^K ψ ≈ σ (−i γ̃^μ ∇̃_μ ψ)`.
    pub phase: i8,
}

/// Twisted-side assembly with `∇̃_μ = ∂_μ − ¼ (Γ_R + K)^b_{μa} γ̃^a γ̃_b`,
/// `γ̃^a = K γ^a` and `γ̃_b = γ̃^b`, compared against `K` times the pseudo Dirac operator.
pub fn dirac_decomposition_check(
    metric: &MetricField,
    rep: &CliffordRep,
    ops: &StructuralOps,
    psi: &SpinorFieldSample,
    x: &[f64],
    h: f64,
    tol: f64,
) -> Result<Decomposition> {
    let lhs = ops.k.apply(&dirac_apply_pseudo(metric, rep, psi, x, h)?);
    let vb = require_diagonal(metric, x, h)?;
    let sc = spin_connection_coeffs(metric, x, h)?;
    let n = metric.dim();
    let tilde: Vec<CMat> = rep.gammas().iter().map(|g| &ops.k * g).collect();
    let at = psi.eval(x);
    let mut rhs = vec![c64(0.0, 0.0); psi.dim()];
    for m in 0..n {
        let mut cov = partial_vec(|y| psi.eval(y), x, m, h, Stencil::Second);
        for a in 0..n {
            for b in 0..n {
                let coef = sc.gamma_r[(b, m, a)] + sc.k[(b, m, a)];
                if coef != 0.0 {
                    add_scaled(&mut cov, &(&tilde[a] * &tilde[b]).apply(&at), c64(-0.25 * coef, 0.0));
                }
            }
        }
        let gmu = (0..n).fold(CMat::zeros(psi.dim(), psi.dim()), |acc, a| &acc + &tilde[a].scale(c64(vb.frame[(a, m)], 0.0)));
        add_scaled(&mut rhs, &gmu.apply(&cov), -IM);
    }
    let diff = |s: f64| -> f64 {
        let d: Vec<C64> = lhs.iter().zip(&rhs).map(|(l, r)| l - r * s).collect();
        vec_norm(&d)
    };
    let (plus, minus) = (diff(1.0), diff(-1.0));
    let (phase, value) = if plus <= minus { (1, plus) } else { (-1, minus) };
    Ok(Decomposition { residual: Residual::new(value, tol), phase })
}
