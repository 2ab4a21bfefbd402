//! General finite-dimensional operators with an optional mass-weighted inner
//! product: λ-hyponormality, minimal λ, orbit growth and Douglas factors.
//!
//! Every spectral computation runs in standard coordinates `f̃_k = f_k√m_k`,
//! where the weighted adjoint becomes the conjugate transpose. Complex
//! Hermitian and general matrices are handled through the real embedding
//! `X + iY ↦ [[X, −Y], [Y, X]]`, which preserves adjoints, products and
//! (doubled) spectra.

use num_complex::Complex;

use crate::analysis::LambdaBound;
use crate::certificate::{witness_matches, Certificate, CertificateKind, Scope, Theorem, Witnesses};
use crate::error::{Error, Result};
use crate::linalg::{norm2, residual_after_projection, svd, symmetric_eigen, Mat};
use crate::scalar::{Field, Real};

pub type C<S> = Complex<S>;

/// Square complex matrix acting by `(Tf)_i = Σ_j T_ij f_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixOperator<S> {
    entries: Mat<C<S>>,
    masses: Option<Vec<S>>,
}

impl<S: Real> MatrixOperator<S> {
    /// Row-major entries; `masses` (if present) define `⟨a,b⟩ = Σ a_k conj(b_k) m_k`.
    pub fn new(dim: usize, entries: Vec<C<S>>, masses: Option<Vec<S>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::EmptySpace);
        }
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        if let Some(m) = &masses {
            if m.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: m.len(),
                });
            }
            if let Some(index) = m.iter().position(|x| !(*x > S::zero()) || !x.is_finite()) {
                return Err(Error::NonPositiveMass { index });
            }
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidArgument("matrix entries must be finite".into()));
        }
        Ok(Self {
            entries: Mat::from_rows(dim, dim, entries)?,
            masses,
        })
    }

    pub fn from_real(dim: usize, entries: Vec<S>, masses: Option<Vec<S>>) -> Result<Self> {
        Self::new(dim, entries.into_iter().map(|x| C::new(x, S::zero())).collect(), masses)
    }

    pub fn diagonal(values: &[S]) -> Result<Self> {
        let n = values.len();
        let mut e = vec![S::zero(); n * n];
        for (i, v) in values.iter().enumerate() {
            e[i * n + i] = *v;
        }
        Self::from_real(n, e, None)
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::diagonal(&vec![S::one(); dim])
    }

    pub fn zero(dim: usize) -> Result<Self> {
        Self::diagonal(&vec![S::zero(); dim])
    }

    pub fn dim(&self) -> usize {
        self.entries.rows()
    }

    pub fn entry(&self, i: usize, j: usize) -> C<S> {
        self.entries[(i, j)]
    }

    pub fn entries(&self) -> &Mat<C<S>> {
        &self.entries
    }

    pub fn masses(&self) -> Option<&[S]> {
        self.masses.as_deref()
    }

    fn mass(&self, k: usize) -> S {
        self.masses.as_ref().map_or(S::one(), |m| m[k])
    }

    pub fn is_zero(&self) -> bool {
        self.entries.data().iter().all(|z| z.re.is_zero() && z.im.is_zero())
    }

    pub fn with_masses(&self, masses: Option<Vec<S>>) -> Result<Self> {
        Self::new(self.dim(), self.entries.data().to_vec(), masses)
    }

    pub fn apply(&self, f: &[C<S>]) -> Result<Vec<C<S>>> {
        self.check(f)?;
        Ok(self.entries.mul_vec(f))
    }

    pub fn inner(&self, a: &[C<S>], b: &[C<S>]) -> Result<C<S>> {
        self.check(a)?;
        self.check(b)?;
        Ok(a.iter()
            .zip(b)
            .enumerate()
            .fold(C::new(S::zero(), S::zero()), |acc, (k, (x, y))| {
                acc + *x * y.conj() * self.mass(k)
            }))
    }

    pub fn norm(&self, f: &[C<S>]) -> Result<S> {
        self.check(f)?;
        Ok(f.iter()
            .enumerate()
            .fold(S::zero(), |acc, (k, z)| acc + z.norm_sqr() * self.mass(k))
            .sqrt())
    }

    /// Adjoint for the weighted inner product: `M⁻¹ Aᴴ M`.
    pub fn adjoint(&self) -> Self {
        let n = self.dim();
        Self {
            entries: Mat::from_fn(n, n, |i, j| self.entries[(j, i)].conj() * (self.mass(j) / self.mass(i))),
            masses: self.masses.clone(),
        }
    }

    pub fn compose(&self, other: &Self) -> Result<Self> {
        if other.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(Self {
            entries: self.entries.matmul(&other.entries),
            masses: self.masses.clone(),
        })
    }

    /// `D A D⁻¹` with `D = diag(√m)`: the same operator in coordinates where
    /// the inner product is the standard one.
    pub fn standard_form(&self) -> Mat<C<S>> {
        let n = self.dim();
        Mat::from_fn(n, n, |i, j| self.entries[(i, j)] * (self.mass(i) / self.mass(j)).sqrt())
    }

    /// Inverse of [`Self::standard_form`].
    fn transport_back(&self, b: &Mat<C<S>>) -> Self {
        let n = self.dim();
        Self {
            entries: Mat::from_fn(n, n, |i, j| b[(i, j)] * (self.mass(j) / self.mass(i)).sqrt()),
            masses: self.masses.clone(),
        }
    }

    fn check(&self, f: &[C<S>]) -> Result<()> {
        if f.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: f.len(),
            });
        }
        Ok(())
    }
}

/// Tolerances for dense decisions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DenseTolerances<S> {
    /// PSD slack, relative to the spectral radius of `T*T`.
    pub psd: S,
    /// Singular values at or below `rank · σ_max` count as zero.
    pub rank: S,
    /// Relative width at which bisection stops.
    pub width: S,
    /// Slack on `λ ≤ 1` and `‖C‖ ≤ 1`.
    pub certificate: S,
}

impl<S: Real> Default for DenseTolerances<S> {
    fn default() -> Self {
        Self {
            psd: S::lit(1e-10),
            rank: S::lit(1e-10),
            width: S::lit(1e-12),
            certificate: S::lit(1e-9),
        }
    }
}

impl<S: Real> DenseTolerances<S> {
    /// Residual allowed when testing membership of a unit vector in a subspace.
    fn inclusion(&self) -> S {
        self.rank.sqrt()
    }
}

fn conj_transpose<S: Real>(m: &Mat<C<S>>) -> Mat<C<S>> {
    Mat::from_fn(m.cols(), m.rows(), |i, j| m[(j, i)].conj())
}

fn embed<S: Real>(m: &Mat<C<S>>) -> Mat<S> {
    let (r, c) = (m.rows(), m.cols());
    Mat::from_fn(2 * r, 2 * c, |i, j| {
        let z = m[(i % r, j % c)];
        match (i < r, j < c) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

fn unembed<S: Real>(m: &Mat<S>) -> Mat<C<S>> {
    let (r, c) = (m.rows() / 2, m.cols() / 2);
    Mat::from_fn(r, c, |i, j| C::new(m[(i, j)], m[(i + r, j)]))
}

fn unembed_vec<S: Real>(v: &[S]) -> Vec<C<S>> {
    let n = v.len() / 2;
    (0..n).map(|k| C::new(v[k], v[k + n])).collect()
}

/// Eigenvalues (ascending, each once) of a Hermitian matrix given up to
/// rounding; the input is symmetrized first.
fn hermitian_spectrum<S: Real>(h: &Mat<C<S>>) -> Result<Vec<S>> {
    let n = h.rows();
    let scale = h.data().iter().fold(S::zero(), |acc, z| acc.max(z.norm()));
    let mut residual = S::zero();
    for i in 0..n {
        for j in 0..n {
            residual = residual.max((h[(i, j)] - h[(j, i)].conj()).norm());
        }
    }
    if residual > S::lit(1e3) * S::epsilon() * S::lit(n as f64) * scale {
        return Err(Error::Consistency(format!(
            "Hermitian part has symmetrization residual {residual:?} at scale {scale:?}"
        )));
    }
    let sym = Mat::from_fn(n, n, |i, j| (h[(i, j)] + h[(j, i)].conj()) * S::lit(0.5));
    let eig = symmetric_eigen(&embed(&sym))?;
    Ok(eig.values.iter().step_by(2).copied().collect())
}

/// `(T*T, TT*)` in standard coordinates.
fn gram_pair<S: Real>(b: &Mat<C<S>>) -> (Mat<C<S>>, Mat<C<S>>) {
    let bh = conj_transpose(b);
    (bh.matmul(b), b.matmul(&bh))
}

fn pencil<S: Real>(g: &Mat<C<S>>, k: &Mat<C<S>>, lambda: S) -> Mat<C<S>> {
    g.zip_with(k, |x, y| x * lambda - y)
}

/// Slack on the smallest eigenvalue of `λ·T*T − TT*`, relative to `‖T*T‖`:
/// `tol`, but never below the rounding error of the eigensolver on the pencil.
fn psd_slack<S: Real>(tol: S, lambda: S, dim: usize) -> S {
    let rounding = S::lit(8.0) * S::epsilon() * S::lit(dim as f64) * (lambda + S::one());
    tol.max(rounding)
}

/// Whether `λ·T*T − TT*` is PSD up to `tol` times the spectral radius of `T*T`
/// (or the rounding floor of the pencil, when larger).
pub fn is_lambda_hyponormal<S: Real>(t: &MatrixOperator<S>, lambda: S, tol: S) -> Result<bool> {
    if !(lambda > S::zero()) {
        return Err(Error::InvalidArgument("lambda must be positive".into()));
    }
    let (g, k) = gram_pair(&t.standard_form());
    let scale = hermitian_spectrum(&g)?.last().copied().unwrap_or_else(S::zero).abs();
    if scale.is_zero() {
        return Ok(true);
    }
    let min = hermitian_spectrum(&pencil(&g, &k, lambda))?[0];
    Ok(min >= -psd_slack(tol, lambda, t.dim()) * scale)
}

/// Outcome of the minimal-λ search.
#[derive(Debug, Clone, PartialEq)]
pub struct MinimalLambda<S> {
    pub bound: LambdaBound<S>,
    /// Final bracket `[lo, hi]` when bisection ran.
    pub bracket: Option<(S, S)>,
    pub iterations: usize,
    pub diagnostic: Option<String>,
}

const MAX_BISECTION: usize = 60;

/// Smallest λ with `λ·T*T − TT*` PSD, or `Infinite` when `R(T) ⊄ R(T*)`.
///
/// Feasibility is first decided by `Ker(T) ⊆ Ker(T*)` on a singular value
/// decomposition; then λ is bisected between `1` (trace bound) and
/// `1 + ‖TT*‖/σ⁺_min(T*T)`, returning the upper (feasible) end.
pub fn minimal_lambda<S: Real>(t: &MatrixOperator<S>, tol: &DenseTolerances<S>) -> Result<MinimalLambda<S>> {
    let b = t.standard_form();
    if t.is_zero() {
        return Ok(MinimalLambda {
            bound: LambdaBound::Any,
            bracket: None,
            iterations: 0,
            diagnostic: None,
        });
    }
    let a = embed(&b);
    let dec = svd(&a)?;
    let smax = dec.largest();
    let at = a.transpose();
    for v in dec.null_space(tol.rank) {
        let image = norm2(&at.mul_vec(&v));
        if image > tol.inclusion() * smax {
            return Ok(MinimalLambda {
                bound: LambdaBound::Infinite,
                bracket: None,
                iterations: 0,
                diagnostic: Some(format!(
                    "kernel vector of T is moved by T* (|T* v| = {:?}, sigma_max = {smax:?})",
                    image
                )),
            });
        }
    }
    let rank = dec.rank(tol.rank);
    let smin = dec.singular[rank - 1];
    let (g, k) = gram_pair(&b);
    let scale = smax * smax;
    let n = t.dim();
    let feasible = |lambda: S| -> Result<bool> {
        let min = hermitian_spectrum(&pencil(&g, &k, lambda))?[0];
        Ok(min >= -psd_slack(tol.psd, lambda, n) * scale)
    };

    let mut lo = S::one();
    let mut hi = S::one() + scale / (smin * smin);
    if !feasible(hi)? {
        return Ok(MinimalLambda {
            bound: LambdaBound::Infinite,
            bracket: Some((lo, hi)),
            iterations: 0,
            diagnostic: Some(format!(
                "bisection bracket [{lo:?}, {hi:?}] does not contain a feasible point"
            )),
        });
    }
    let mut iterations = 0;
    let mut diagnostic = None;
    if feasible(lo)? {
        hi = lo;
    } else {
        while hi - lo > tol.width * hi {
            if iterations == MAX_BISECTION {
                diagnostic = Some(format!("bisection stopped after {MAX_BISECTION} iterations"));
                break;
            }
            iterations += 1;
            let mid = (lo + hi) * S::lit(0.5);
            if feasible(mid)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
    }
    if hi < S::one() - S::lit(1e-10) {
        return Err(Error::Consistency(format!(
            "nonzero finite operator reports minimal lambda {hi:?} < 1"
        )));
    }
    Ok(MinimalLambda {
        bound: LambdaBound::Finite(hi),
        bracket: Some((lo, hi)),
        iterations,
        diagnostic,
    })
}

/// `λ_0 = λ_1 = 1`, `λ_{n+1} = λ_n·(1/√λ)ⁿ`.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaSequence<S> {
    pub lambda: S,
    /// Multiplicative recursion; may overflow to `∞` or underflow to `0` for
    /// large `n`.
    pub values: Vec<S>,
    /// The same recursion run on natural logarithms.
    pub log_values: Vec<S>,
}

impl<S: Real> LambdaSequence<S> {
    /// `t_n = n(n−1)/2`, the exponent of `1/√λ` in `λ_n`.
    pub fn exponent(n: usize) -> usize {
        n * n.saturating_sub(1) / 2
    }

    pub fn closed_form(lambda: S, n: usize) -> S {
        (S::one() / lambda.sqrt()).powf(S::lit(Self::exponent(n) as f64))
    }
}

pub fn lambda_sequence<S: Real>(lambda: S, n: usize) -> Result<LambdaSequence<S>> {
    if !(lambda > S::zero()) || !lambda.is_finite() {
        return Err(Error::InvalidArgument("lambda must be positive and finite".into()));
    }
    let base = S::one() / lambda.sqrt();
    let log_base = base.ln();
    let mut values = vec![S::one()];
    let mut log_values = vec![S::zero()];
    for k in 0..n {
        let next = if k == 0 {
            S::one()
        } else {
            values[k] * base.powi(k as i32)
        };
        values.push(next);
        log_values.push(log_values[k] + log_base * S::lit(k as f64));
    }
    Ok(LambdaSequence {
        lambda,
        values,
        log_values,
    })
}

/// `‖Tⁿh‖` for `n = 0..=steps` in the operator's inner product.
pub fn orbit_norms<S: Real>(t: &MatrixOperator<S>, h: &[C<S>], steps: usize) -> Result<Vec<S>> {
    let first = t.norm(h)?;
    if first.is_zero() {
        return Err(Error::ZeroVector);
    }
    let mut out = Vec::with_capacity(steps + 1);
    out.push(first);
    let mut x = h.to_vec();
    for _ in 0..steps {
        x = t.apply(&x)?;
        out.push(t.norm(&x)?);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrbitRow<S> {
    pub n: usize,
    pub norm: S,
    /// `‖h‖·λ_n·(‖Th‖/‖h‖)ⁿ`.
    pub bound: S,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrbitBoundTable<S> {
    pub lambda: S,
    pub rows: Vec<OrbitRow<S>>,
    /// A row failed although `T` is λ-hyponormal: a bug, not a finding.
    pub contradiction: bool,
}

/// Multiplicative slack on each orbit bound.
pub const ORBIT_SLACK: f64 = 1e-8;

/// Checks `‖Tⁿh‖ ≥ ‖h‖·λ_n·(‖Th‖/‖h‖)ⁿ` for `n ≤ steps`.
pub fn orbit_bound_check<S: Real>(
    t: &MatrixOperator<S>,
    h: &[C<S>],
    lambda: S,
    steps: usize,
    tol: &DenseTolerances<S>,
) -> Result<OrbitBoundTable<S>> {
    if !is_lambda_hyponormal(t, lambda, tol.psd)? {
        let minimal = match minimal_lambda(t, tol)?.bound {
            LambdaBound::Finite(v) => format!("{v:?}"),
            LambdaBound::Infinite => "infinity".into(),
            LambdaBound::Any => "any".into(),
        };
        return Err(Error::NotLambdaHyponormal {
            lambda: lambda.to_f64_lossy(),
            minimal,
        });
    }
    let norms = orbit_norms(t, h, steps.max(1))?;
    let seq = lambda_sequence(lambda, steps)?;
    let ratio = norms[1] / norms[0];
    let slack = S::one() - S::lit(ORBIT_SLACK);
    let rows: Vec<OrbitRow<S>> = (0..=steps)
        .map(|n| {
            let bound = norms[0] * seq.values[n] * ratio.powi(n as i32);
            OrbitRow {
                n,
                norm: norms[n],
                bound,
                holds: norms[n] >= bound * slack,
            }
        })
        .collect();
    let contradiction = rows.iter().any(|r| !r.holds);
    Ok(OrbitBoundTable {
        lambda,
        rows,
        contradiction,
    })
}

/// Geometric growth test on `x_1, x_2, …` (the slice starts at `n = 1`).
///
/// With `c = None` the largest admissible constant `min_n x_n^{1/n}` is used.
pub fn growth_certificate<S: Real>(norms: &[S], c: Option<S>, tol: S) -> Option<Certificate> {
    if norms.is_empty() {
        return None;
    }
    let c = c.unwrap_or_else(|| {
        norms
            .iter()
            .enumerate()
            .map(|(i, x)| x.powf(S::one() / S::lit((i + 1) as f64)))
            .fold(S::infinity(), |a, b| a.min(b))
    });
    if !(c > S::one()) {
        return None;
    }
    let holds = norms
        .iter()
        .enumerate()
        .all(|(i, x)| *x >= c.powi((i + 1) as i32) * (S::one() - tol));
    holds.then(|| {
        Certificate::new(
            CertificateKind::WeaklyClosedOrbit,
            Theorem::GeometricGrowthWeaklyClosed,
            Witnesses {
                growth_constant: Some(c.to_f64_lossy()),
                ..Default::default()
            },
            Scope::PrefixEvidence,
        )
    })
}

/// Orbit of an expanding vector under a hyponormal (`λ ≤ 1`) operator.
pub fn weakly_closed_orbit_certificate<S: Real>(
    t: &MatrixOperator<S>,
    h: &[C<S>],
    tol: &DenseTolerances<S>,
) -> Result<Option<Certificate>> {
    let norms = orbit_norms(t, h, 1)?;
    let min = minimal_lambda(t, tol)?;
    let lambda = match min.bound {
        LambdaBound::Finite(v) if v <= S::one() + tol.certificate => v,
        _ => return Ok(None),
    };
    if !(norms[1] > norms[0] * (S::one() + tol.certificate)) {
        return Ok(None);
    }
    Ok(Some(Certificate::new(
        CertificateKind::WeaklyClosedOrbit,
        Theorem::ExpandingOrbitWeaklyClosed,
        Witnesses {
            lambda: Some(lambda.to_f64_lossy()),
            growth_constant: Some((norms[1] / norms[0]).to_f64_lossy()),
            ..Default::default()
        },
        Scope::ExactFinite,
    )))
}

/// Hyponormal (`λ ≤ 1 + tol`) operators are not weakly hypercyclic.
pub fn not_weakly_hypercyclic_certificate<S: Real>(
    t: &MatrixOperator<S>,
    tol: &DenseTolerances<S>,
) -> Result<Option<Certificate>> {
    let min = minimal_lambda(t, tol)?;
    Ok(certificate_from_bound(&min.bound, tol.certificate))
}

fn certificate_from_bound<S: Real>(bound: &LambdaBound<S>, tol: S) -> Option<Certificate> {
    bound.within_unit(tol).then(|| {
        Certificate::new(
            CertificateKind::NotWeaklyHypercyclic,
            Theorem::HyponormalNotWeaklyHypercyclic,
            Witnesses {
                lambda: bound.value().map(Field::to_f64_lossy),
                ..Default::default()
            },
            Scope::ExactFinite,
        )
    })
}

/// Minimal-norm solution of `T = T*C`.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorizationResult<S> {
    pub feasible: bool,
    pub factor: Option<MatrixOperator<S>>,
    pub norm: Option<S>,
    /// `‖C‖²`.
    pub implied_lambda: Option<S>,
    /// `‖T*C − T‖_F / ‖T‖_F`.
    pub residual: Option<S>,
    /// A vector of `R(T)` outside `R(T*)` when infeasible.
    pub violating_vector: Option<Vec<C<S>>>,
    pub certificate: Option<Certificate>,
}

pub fn douglas_factor<S: Real>(t: &MatrixOperator<S>, tol: &DenseTolerances<S>) -> Result<FactorizationResult<S>> {
    let n = t.dim();
    if t.is_zero() {
        return Ok(FactorizationResult {
            feasible: true,
            factor: Some(t.with_masses(t.masses().map(<[S]>::to_vec))?),
            norm: Some(S::zero()),
            implied_lambda: Some(S::zero()),
            residual: Some(S::zero()),
            violating_vector: None,
            certificate: Some(Certificate::new(
                CertificateKind::NotWeaklyHypercyclic,
                Theorem::ContractiveFactorNotWeaklyHypercyclic,
                Witnesses {
                    factor_norm: Some(0.0),
                    ..Default::default()
                },
                Scope::ExactFinite,
            )),
        });
    }
    let b = t.standard_form();
    let a = embed(&b);
    let dec = svd(&a)?;
    let corange = dec.corange(tol.rank);
    for u in dec.range(tol.rank) {
        if norm2(&residual_after_projection(&u, &corange)) > tol.inclusion() {
            let v = unembed_vec(&u);
            let weighted = (0..n).map(|k| v[k] / t.mass(k).sqrt()).collect();
            return Ok(FactorizationResult {
                feasible: false,
                factor: None,
                norm: None,
                implied_lambda: None,
                residual: None,
                violating_vector: Some(weighted),
                certificate: None,
            });
        }
    }
    let c_embedded = dec.pseudoinverse(tol.rank).transpose().matmul(&a);
    let c_std = unembed(&c_embedded);
    let norm = svd(&embed(&c_std))?.largest();
    let bh = conj_transpose(&b);
    let diff = bh.matmul(&c_std).zip_with(&b, |x, y| x - y);
    let fro = |m: &Mat<C<S>>| m.data().iter().fold(S::zero(), |acc, z| acc + z.norm_sqr()).sqrt();
    let residual = fro(&diff) / fro(&b);
    let implied = norm * norm;
    if !is_lambda_hyponormal(t, implied.max(S::min_positive_value()), tol.psd)? {
        return Err(Error::Consistency(format!(
            "T is not lambda-hyponormal at lambda = |C|^2 = {implied:?}"
        )));
    }
    let certificate = (norm <= S::one() + tol.certificate).then(|| {
        Certificate::new(
            CertificateKind::NotWeaklyHypercyclic,
            Theorem::ContractiveFactorNotWeaklyHypercyclic,
            Witnesses {
                lambda: Some(implied.to_f64_lossy()),
                factor_norm: Some(norm.to_f64_lossy()),
                ..Default::default()
            },
            Scope::ExactFinite,
        )
    });
    Ok(FactorizationResult {
        feasible: true,
        factor: Some(t.transport_back(&c_std)),
        norm: Some(norm),
        implied_lambda: Some(implied),
        residual: Some(residual),
        violating_vector: None,
        certificate,
    })
}

/// Dense analysis of a single operator.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixReport<S> {
    pub minimal: MinimalLambda<S>,
    pub factor: FactorizationResult<S>,
    pub certificates: Vec<Certificate>,
}

impl<S: Real> MatrixReport<S> {
    pub fn lambda_min(&self) -> LambdaBound<S> {
        self.minimal.bound
    }
}

pub fn analyze_matrix<S: Real>(t: &MatrixOperator<S>, tol: &DenseTolerances<S>) -> Result<MatrixReport<S>> {
    let minimal = minimal_lambda(t, tol)?;
    let factor = douglas_factor(t, tol)?;
    if factor.feasible != minimal.bound.is_finite() {
        return Err(Error::Consistency(
            "Douglas feasibility and minimal lambda finiteness disagree".into(),
        ));
    }
    let mut certificates = Vec::new();
    match minimal.bound {
        LambdaBound::Infinite => certificates.push(Certificate::new(
            CertificateKind::NoLambdaExists,
            Theorem::RangeInclusion,
            Witnesses::default(),
            Scope::ExactFinite,
        )),
        bound => certificates.push(Certificate::new(
            CertificateKind::LambdaHyponormal,
            Theorem::RangeInclusion,
            Witnesses {
                lambda: bound.value().map(Field::to_f64_lossy),
                ..Default::default()
            },
            Scope::ExactFinite,
        )),
    }
    certificates.extend(certificate_from_bound(&minimal.bound, tol.certificate));
    certificates.extend(factor.certificate.clone());
    Ok(MatrixReport {
        minimal,
        factor,
        certificates,
    })
}

/// Replays a dense certificate. Orbit certificates need the vector; see
/// [`verify_orbit_certificate`].
pub fn verify_certificate<S: Real>(
    cert: &Certificate,
    t: &MatrixOperator<S>,
    tol: &DenseTolerances<S>,
) -> Result<bool> {
    if cert.scope != Scope::ExactFinite {
        return Ok(false);
    }
    let w = &cert.witnesses;
    let rel = 1e-6;
    Ok(match (cert.kind, cert.theorem) {
        (CertificateKind::LambdaHyponormal, Theorem::RangeInclusion) => match minimal_lambda(t, tol)?.bound {
            LambdaBound::Any => w.lambda.is_none(),
            LambdaBound::Finite(v) => witness_matches(w.lambda, v.to_f64_lossy(), rel),
            LambdaBound::Infinite => false,
        },
        (CertificateKind::NoLambdaExists, Theorem::RangeInclusion) => !minimal_lambda(t, tol)?.bound.is_finite(),
        (CertificateKind::NotWeaklyHypercyclic, Theorem::HyponormalNotWeaklyHypercyclic) => {
            let bound = minimal_lambda(t, tol)?.bound;
            bound.within_unit(tol.certificate)
                && match bound {
                    LambdaBound::Any => w.lambda.is_none(),
                    LambdaBound::Finite(v) => witness_matches(w.lambda, v.to_f64_lossy(), rel),
                    LambdaBound::Infinite => false,
                }
        }
        (CertificateKind::NotWeaklyHypercyclic, Theorem::ContractiveFactorNotWeaklyHypercyclic) => {
            let f = douglas_factor(t, tol)?;
            match f.norm {
                Some(n) => n <= S::one() + tol.certificate && witness_matches(w.factor_norm, n.to_f64_lossy(), rel),
                None => false,
            }
        }
        _ => false,
    })
}

pub fn verify_orbit_certificate<S: Real>(
    cert: &Certificate,
    t: &MatrixOperator<S>,
    h: &[C<S>],
    tol: &DenseTolerances<S>,
) -> Result<bool> {
    if (cert.kind, cert.theorem) != (CertificateKind::WeaklyClosedOrbit, Theorem::ExpandingOrbitWeaklyClosed) {
        return verify_certificate(cert, t, tol);
    }
    Ok(match weakly_closed_orbit_certificate(t, h, tol)? {
        Some(fresh) => witness_matches(
            cert.witnesses.growth_constant,
            fresh.witnesses.growth_constant.unwrap_or(f64::NAN),
            1e-9,
        ),
        None => false,
    })
}
