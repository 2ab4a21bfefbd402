//! Small dense linear algebra: row-major matrices, a cyclic Jacobi
//! eigensolver for real symmetric matrices, and a one-sided (Hestenes) Jacobi
//! SVD. Sizes here are a few dozen at most, so plain `O(n³)` sweeps are fine.

use std::ops::{Index, IndexMut};

use num_traits::Num;

use crate::error::{Error, Result};
use crate::scalar::Real;

const MAX_SWEEPS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Num + Copy> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { T::one() } else { T::zero() })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn diagonal(values: &[T]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |i, j| if i == j { values[i] } else { T::zero() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions must agree");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] = out[(i, j)] + a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(self.cols, x.len(), "vector length must match columns");
        (0..self.rows)
            .map(|i| (0..self.cols).fold(T::zero(), |acc, j| acc + self[(i, j)] * x[j]))
            .collect()
    }

    pub fn map<U: Num + Copy>(&self, f: impl Fn(T) -> U) -> Mat<U> {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| f(*x)).collect(),
        }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| f(*a, *b)).collect(),
        }
    }
}

impl<T> Index<(usize, usize)> for Mat<T> {
    type Output = T;

    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Mat<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

impl<S: Real> Mat<S> {
    pub fn frobenius(&self) -> S {
        self.data.iter().fold(S::zero(), |acc, x| acc + *x * *x).sqrt()
    }

    pub fn max_abs(&self) -> S {
        self.data.iter().fold(S::zero(), |acc, x| acc.max(x.abs()))
    }

    /// `max |a_ij − a_ji|`.
    pub fn asymmetry(&self) -> S {
        let mut worst = S::zero();
        for i in 0..self.rows {
            for j in 0..i {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }
}

pub(crate) fn norm2<S: Real>(x: &[S]) -> S {
    x.iter().fold(S::zero(), |acc, v| acc + *v * *v).sqrt()
}

/// Eigenvalues in ascending order with matching eigenvector columns.
#[derive(Debug, Clone)]
pub struct SymmetricEigen<S> {
    pub values: Vec<S>,
    pub vectors: Mat<S>,
    pub sweeps: usize,
}

impl<S: Real> SymmetricEigen<S> {
    pub fn min(&self) -> S {
        self.values[0]
    }

    pub fn max(&self) -> S {
        *self.values.last().expect("nonempty spectrum")
    }

    pub fn spectral_radius(&self) -> S {
        self.min().abs().max(self.max().abs())
    }
}

/// Cyclic Jacobi diagonalization of a real symmetric matrix.
///
/// The input must be symmetric to within `64·ε·max|a|`.
pub fn symmetric_eigen<S: Real>(a: &Mat<S>) -> Result<SymmetricEigen<S>> {
    if !a.is_square() {
        return Err(Error::InvalidArgument(
            "eigen-decomposition needs a square matrix".into(),
        ));
    }
    let n = a.rows();
    if n == 0 {
        return Err(Error::InvalidArgument("empty matrix".into()));
    }
    let scale = a.max_abs();
    if a.asymmetry() > S::lit(64.0) * S::epsilon() * scale {
        return Err(Error::Consistency(
            "matrix passed to the symmetric solver is not symmetric".into(),
        ));
    }
    let mut m = a.clone();
    let mut v = Mat::identity(n);
    let total = m.frobenius();
    let target = S::epsilon() * total;
    let mut sweeps = 0;
    loop {
        let mut off = S::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                off = off + m[(p, q)] * m[(p, q)];
            }
        }
        if off.sqrt() <= target || total.is_zero() {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(Error::Consistency(format!(
                "Jacobi eigensolver did not converge in {MAX_SWEEPS} sweeps"
            )));
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq.abs() <= S::min_positive_value() {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (S::lit(2.0) * apq);
                let t = if theta.abs() > S::lit(1e150) {
                    S::one() / (S::lit(2.0) * theta)
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + S::one()).sqrt())
                };
                let c = S::one() / (t * t + S::one()).sqrt();
                let s = t * c;
                rotate_symmetric(&mut m, p, q, c, s);
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].partial_cmp(&m[(j, j)]).expect("finite eigenvalues"));
    let values = order.iter().map(|&i| m[(i, i)]).collect();
    let vectors = Mat::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(SymmetricEigen {
        values,
        vectors,
        sweeps,
    })
}

/// `m ← Pᵀ m P` for the plane rotation in `(p, q)`, then clears `m_pq`.
fn rotate_symmetric<S: Real>(m: &mut Mat<S>, p: usize, q: usize, c: S, s: S) {
    let n = m.rows();
    for k in 0..n {
        let mkp = m[(k, p)];
        let mkq = m[(k, q)];
        m[(k, p)] = c * mkp - s * mkq;
        m[(k, q)] = s * mkp + c * mkq;
    }
    for k in 0..n {
        let mpk = m[(p, k)];
        let mqk = m[(q, k)];
        m[(p, k)] = c * mpk - s * mqk;
        m[(q, k)] = s * mpk + c * mqk;
    }
    m[(p, q)] = S::zero();
    m[(q, p)] = S::zero();
}

/// `A = U Σ Vᵀ` with singular values in descending order. `U` is `m×n` and
/// its columns for zero singular values are zero.
#[derive(Debug, Clone)]
pub struct Svd<S> {
    pub u: Mat<S>,
    pub singular: Vec<S>,
    pub v: Mat<S>,
}

impl<S: Real> Svd<S> {
    pub fn largest(&self) -> S {
        self.singular.first().copied().unwrap_or_else(S::zero)
    }

    /// Absolute cut-off `rel · σ_max`.
    pub fn threshold(&self, rel: S) -> S {
        rel * self.largest()
    }

    pub fn rank(&self, rel: S) -> usize {
        let cut = self.threshold(rel);
        self.singular.iter().filter(|s| **s > cut).count()
    }

    /// Orthonormal basis of `ker(A)`.
    pub fn null_space(&self, rel: S) -> Vec<Vec<S>> {
        let r = self.rank(rel);
        (r..self.v.cols()).map(|j| self.v.column(j)).collect()
    }

    /// Orthonormal basis of `R(A)`.
    pub fn range(&self, rel: S) -> Vec<Vec<S>> {
        (0..self.rank(rel)).map(|j| self.u.column(j)).collect()
    }

    /// Orthonormal basis of `R(Aᵀ)`.
    pub fn corange(&self, rel: S) -> Vec<Vec<S>> {
        (0..self.rank(rel)).map(|j| self.v.column(j)).collect()
    }

    /// Moore–Penrose pseudoinverse, dropping singular values at or below
    /// `rel · σ_max`.
    pub fn pseudoinverse(&self, rel: S) -> Mat<S> {
        let r = self.rank(rel);
        let (m, n) = (self.u.rows(), self.v.rows());
        Mat::from_fn(n, m, |i, j| {
            (0..r).fold(S::zero(), |acc, k| {
                acc + self.v[(i, k)] * self.u[(j, k)] / self.singular[k]
            })
        })
    }
}

/// One-sided Jacobi SVD. Requires `rows ≥ cols`.
pub fn svd<S: Real>(a: &Mat<S>) -> Result<Svd<S>> {
    let (m, n) = (a.rows(), a.cols());
    if m < n || n == 0 {
        return Err(Error::InvalidArgument(
            "SVD needs a nonempty matrix with rows >= cols".into(),
        ));
    }
    let mut u = a.clone();
    let mut v = Mat::identity(n);
    let tol = S::epsilon() * S::lit(m as f64);
    // Columns this small are rounding noise; rotating them never settles.
    let negligible = {
        let floor = tol * a.frobenius();
        floor * floor
    };
    let mut sweeps = 0;
    loop {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let (mut alpha, mut beta, mut gamma) = (S::zero(), S::zero(), S::zero());
                for i in 0..m {
                    let up = u[(i, p)];
                    let uq = u[(i, q)];
                    alpha = alpha + up * up;
                    beta = beta + uq * uq;
                    gamma = gamma + up * uq;
                }
                if gamma.abs() <= tol * (alpha * beta).sqrt() || gamma.is_zero() || alpha.min(beta) <= negligible {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (S::lit(2.0) * gamma);
                let t = if zeta.abs() > S::lit(1e150) {
                    S::one() / (S::lit(2.0) * zeta)
                } else {
                    zeta.signum() / (zeta.abs() + (S::one() + zeta * zeta).sqrt())
                };
                let c = S::one() / (S::one() + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let up = u[(i, p)];
                    let uq = u[(i, q)];
                    u[(i, p)] = c * up - s * uq;
                    u[(i, q)] = s * up + c * uq;
                }
                for i in 0..n {
                    let vp = v[(i, p)];
                    let vq = v[(i, q)];
                    v[(i, p)] = c * vp - s * vq;
                    v[(i, q)] = s * vp + c * vq;
                }
            }
        }
        if !rotated {
            break;
        }
        sweeps += 1;
        if sweeps == MAX_SWEEPS {
            return Err(Error::Consistency(format!(
                "Jacobi SVD did not converge in {MAX_SWEEPS} sweeps"
            )));
        }
    }
    let norms: Vec<S> = (0..n).map(|j| norm2(&u.column(j))).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).expect("finite singular values"));
    let singular: Vec<S> = order.iter().map(|&j| norms[j]).collect();
    let u_sorted = Mat::from_fn(m, n, |i, k| {
        let s = norms[order[k]];
        if s > S::zero() {
            u[(i, order[k])] / s
        } else {
            S::zero()
        }
    });
    let v_sorted = Mat::from_fn(n, n, |i, k| v[(i, order[k])]);
    Ok(Svd {
        u: u_sorted,
        singular,
        v: v_sorted,
    })
}

/// Removes from `x` its projection onto the span of an orthonormal `basis`.
pub(crate) fn residual_after_projection<S: Real>(x: &[S], basis: &[Vec<S>]) -> Vec<S> {
    let mut r = x.to_vec();
    for b in basis {
        let coeff = b.iter().zip(&r).fold(S::zero(), |acc, (p, q)| acc + *p * *q);
        for (ri, bi) in r.iter_mut().zip(b) {
            *ri = *ri - coeff * *bi;
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn symmetric(n: usize, seed: &[f64]) -> Mat<f64> {
        let mut m = Mat::zeros(n, n);
        let mut k = 0;
        for i in 0..n {
            for j in 0..=i {
                m[(i, j)] = seed[k % seed.len()];
                m[(j, i)] = seed[k % seed.len()];
                k += 1;
            }
        }
        m
    }

    #[test]
    fn eigen_of_known_two_by_two() {
        // [[2, 1], [1, 2]] has eigenvalues 1 and 3.
        let a = Mat::<f64>::from_rows(2, 2, vec![2.0, 1.0, 1.0, 2.0]).unwrap();
        let e = symmetric_eigen(&a).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14);
        assert!((e.values[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn eigen_rejects_asymmetric_input() {
        let a = Mat::from_rows(2, 2, vec![1.0, 2.0, 0.0, 1.0]).unwrap();
        assert!(matches!(symmetric_eigen(&a), Err(Error::Consistency(_))));
    }

    #[test]
    fn eigen_handles_zero_and_f32() {
        let e = symmetric_eigen(&Mat::<f64>::zeros(3, 3)).unwrap();
        assert_eq!(e.values, vec![0.0; 3]);
        let a = Mat::<f32>::from_rows(2, 2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        let e = symmetric_eigen(&a).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-6 && (e.values[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn svd_of_rank_one() {
        // [[1, 2], [2, 4]] = [1, 2]ᵀ [1, 2]: σ = (5, 0).
        let a = Mat::<f64>::from_rows(2, 2, vec![1.0, 2.0, 2.0, 4.0]).unwrap();
        let s = svd(&a).unwrap();
        assert!((s.singular[0] - 5.0).abs() < 1e-14);
        assert!(s.singular[1].abs() < 1e-14);
        assert_eq!(s.rank(1e-10), 1);
        let null = s.null_space(1e-10);
        assert_eq!(null.len(), 1);
        assert!(norm2(&a.mul_vec(&null[0])) < 1e-14);
        let pinv = s.pseudoinverse(1e-10);
        // pinv = A / 25 for this symmetric rank-one matrix.
        for i in 0..2 {
            for j in 0..2 {
                assert!((pinv[(i, j)] - a[(i, j)] / 25.0).abs() < 1e-15);
            }
        }
    }

    fn square_strategy() -> impl Strategy<Value = Mat<f64>> {
        (1usize..8).prop_flat_map(|n| {
            prop::collection::vec(-3.0f64..3.0, n * n).prop_map(move |d| Mat::from_rows(n, n, d).unwrap())
        })
    }

    proptest! {
        #[test]
        fn eigen_reconstructs(n in 1usize..9, seed in prop::collection::vec(-5.0f64..5.0, 1..40)) {
            let a = symmetric(n, &seed);
            let e = symmetric_eigen(&a).unwrap();
            let scale = a.max_abs().max(1.0);
            for k in 0..n {
                let x = e.vectors.column(k);
                let ax = a.mul_vec(&x);
                for i in 0..n {
                    prop_assert!((ax[i] - e.values[k] * x[i]).abs() < 1e-12 * scale);
                }
            }
            let vtv = e.vectors.transpose().matmul(&e.vectors);
            for i in 0..n {
                for j in 0..n {
                    let expected = if i == j { 1.0 } else { 0.0 };
                    prop_assert!((vtv[(i, j)] - expected).abs() < 1e-12);
                }
            }
            prop_assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        }

        #[test]
        fn svd_reconstructs(a in square_strategy(), drop in 0usize..3) {
            let n = a.rows();
            // Force some rank deficiency by duplicating a column.
            let a = if drop > 0 && n > 1 {
                Mat::from_fn(n, n, |i, j| if j == n - 1 { a[(i, 0)] } else { a[(i, j)] })
            } else {
                a
            };
            let s = svd(&a).unwrap();
            let rebuilt = Mat::from_fn(n, n, |i, j| {
                (0..n).fold(0.0, |acc, k| acc + s.u[(i, k)] * s.singular[k] * s.v[(j, k)])
            });
            let scale = a.max_abs().max(1.0);
            for i in 0..n {
                for j in 0..n {
                    prop_assert!((rebuilt[(i, j)] - a[(i, j)]).abs() < 1e-12 * scale);
                }
            }
            for x in s.null_space(1e-10) {
                prop_assert!(norm2(&a.mul_vec(&x)) < 1e-10 * s.largest().max(1e-300));
            }
            // Penrose condition A A⁺ A = A.
            let pinv = s.pseudoinverse(1e-10);
            let apa = a.matmul(&pinv).matmul(&a);
            for i in 0..n {
                for j in 0..n {
                    prop_assert!((apa[(i, j)] - a[(i, j)]).abs() < 1e-8 * scale);
                }
            }
        }
    }
}
