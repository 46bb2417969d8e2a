//! Order-3 and order-4 dense tensors and the multilinear primitives: mode-n
//! products, inner product, Frobenius norm, and mode-n unfolding.
//!
//! Storage is slice-major: the last mode is outermost, and each frontal
//! slice is a contiguous row-major matrix. A [`SemiSymmetricTensor`] is an
//! order-3 tensor whose every frontal slice is symmetric — a stack of
//! per-subject network adjacency matrices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::scalar::Scalar;

/// Asymmetry below this is treated as exact and silently averaged away.
pub const SYMMETRY_CHECK_TOL: f64 = 1e-12;
/// Asymmetry above this rejects the input instead of symmetrizing it.
pub const SYMMETRY_REJECT_TOL: f64 = 1e-6;

// ---------------------------------------------------------------------------
// Order-3 tensor
// ---------------------------------------------------------------------------

/// General dense order-3 tensor with extents `(d1, d2, d3)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor3<F> {
    d1: usize,
    d2: usize,
    d3: usize,
    data: Vec<F>,
}

impl<F: Scalar> Tensor3<F> {
    pub fn zeros(d1: usize, d2: usize, d3: usize) -> Self {
        Self {
            d1,
            d2,
            d3,
            data: vec![F::zero(); d1 * d2 * d3],
        }
    }

    /// Builds from slice-major data (`data[n*d1*d2 + i*d2 + j] = X[i,j,n]`).
    pub fn from_values(d1: usize, d2: usize, d3: usize, data: Vec<F>) -> Result<Self> {
        if data.len() != d1 * d2 * d3 {
            return Err(Error::Shape(format!(
                "{} values cannot fill a {d1}x{d2}x{d3} tensor",
                data.len()
            )));
        }
        Ok(Self { d1, d2, d3, data })
    }

    pub fn from_fn(d1: usize, d2: usize, d3: usize, mut f: impl FnMut(usize, usize, usize) -> F) -> Self {
        let mut t = Self::zeros(d1, d2, d3);
        for n in 0..d3 {
            for i in 0..d1 {
                for j in 0..d2 {
                    t[(i, j, n)] = f(i, j, n);
                }
            }
        }
        t
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.d1, self.d2, self.d3)
    }

    pub fn data(&self) -> &[F] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [F] {
        &mut self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    #[inline]
    fn offset(&self, i: usize, j: usize, n: usize) -> usize {
        (n * self.d1 + i) * self.d2 + j
    }

    /// Contiguous data of frontal slice `n` (row-major `d1 x d2`).
    pub fn slice_data(&self, n: usize) -> &[F] {
        let len = self.d1 * self.d2;
        &self.data[n * len..(n + 1) * len]
    }

    /// Frontal slice `n` as a matrix.
    pub fn slice_matrix(&self, n: usize) -> DenseMatrix<F> {
        DenseMatrix::from_vec(self.d1, self.d2, self.slice_data(n).to_vec())
            .expect("slice dims always consistent")
    }

    /// Mean of the frontal slices.
    pub fn mean_slice(&self) -> DenseMatrix<F> {
        let mut m = DenseMatrix::zeros(self.d1, self.d2);
        for n in 0..self.d3 {
            let s = self.slice_data(n);
            for i in 0..self.d1 {
                for j in 0..self.d2 {
                    m[(i, j)] = m[(i, j)] + s[i * self.d2 + j];
                }
            }
        }
        m.scale(F::one() / F::of(self.d3 as f64))
    }

    pub fn frobenius_norm(&self) -> F {
        self.data
            .iter()
            .map(|&v| v * v)
            .fold(F::zero(), |a, b| a + b)
            .sqrt()
    }

    /// Scalar product `<A, B>`: sum of elementwise products.
    pub fn inner_product(&self, other: &Self) -> Result<F> {
        if self.dims() != other.dims() {
            return Err(Error::Shape(format!(
                "inner product of {:?} vs {:?}",
                self.dims(),
                other.dims()
            )));
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| a * b)
            .sum())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.dims() != other.dims() {
            return Err(Error::Shape(format!(
                "subtract {:?} from {:?}",
                other.dims(),
                self.dims()
            )));
        }
        Ok(Self {
            d1: self.d1,
            d2: self.d2,
            d3: self.d3,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| a - b)
                .collect(),
        })
    }

    fn extent(&self, mode: usize) -> Result<usize> {
        match mode {
            1 => Ok(self.d1),
            2 => Ok(self.d2),
            3 => Ok(self.d3),
            _ => Err(Error::InvalidMode { mode, order: 3 }),
        }
    }

    /// Mode-n product with a matrix `A` (`J x I_n`): contracts mode-n fibers
    /// against the rows of `A`, replacing the extent along `mode` with `J`.
    pub fn mode_mul_mat(&self, mode: usize, a: &DenseMatrix<F>) -> Result<Self> {
        let extent = self.extent(mode)?;
        if a.cols() != extent {
            return Err(Error::ModeMismatch {
                mode,
                extent,
                operand: a.cols(),
            });
        }
        let j_dim = a.rows();
        let out = match mode {
            1 => {
                let mut out = Self::zeros(j_dim, self.d2, self.d3);
                for n in 0..self.d3 {
                    for r in 0..j_dim {
                        for i in 0..self.d1 {
                            let c = a[(r, i)];
                            if c == F::zero() {
                                continue;
                            }
                            let src = self.offset(i, 0, n);
                            let dst = out.offset(r, 0, n);
                            for j in 0..self.d2 {
                                out.data[dst + j] = out.data[dst + j] + c * self.data[src + j];
                            }
                        }
                    }
                }
                out
            }
            2 => {
                let mut out = Self::zeros(self.d1, j_dim, self.d3);
                for n in 0..self.d3 {
                    for i in 0..self.d1 {
                        let src = self.offset(i, 0, n);
                        for r in 0..j_dim {
                            let mut s = F::zero();
                            for j in 0..self.d2 {
                                s = s + a[(r, j)] * self.data[src + j];
                            }
                            let dst = out.offset(i, r, n);
                            out.data[dst] = s;
                        }
                    }
                }
                out
            }
            3 => {
                let mut out = Self::zeros(self.d1, self.d2, j_dim);
                let len = self.d1 * self.d2;
                for r in 0..j_dim {
                    for n in 0..self.d3 {
                        let c = a[(r, n)];
                        if c == F::zero() {
                            continue;
                        }
                        let src = &self.data[n * len..(n + 1) * len];
                        let dst = &mut out.data[r * len..(r + 1) * len];
                        for (d, &s) in dst.iter_mut().zip(src) {
                            *d = *d + c * s;
                        }
                    }
                }
                out
            }
            _ => unreachable!(),
        };
        Ok(out)
    }

    /// Mode-n product with a vector: the contracted mode is dropped and the
    /// result is a matrix over the two remaining modes (in mode order).
    pub fn mode_mul_vec(&self, mode: usize, a: &[F]) -> Result<DenseMatrix<F>> {
        let extent = self.extent(mode)?;
        if a.len() != extent {
            return Err(Error::ModeMismatch {
                mode,
                extent,
                operand: a.len(),
            });
        }
        let out = match mode {
            1 => {
                // result[(j, n)] = sum_i a[i] X[i,j,n]
                let mut m = DenseMatrix::zeros(self.d2, self.d3);
                for n in 0..self.d3 {
                    for (i, &ai) in a.iter().enumerate() {
                        if ai == F::zero() {
                            continue;
                        }
                        let src = self.offset(i, 0, n);
                        for j in 0..self.d2 {
                            m[(j, n)] = m[(j, n)] + ai * self.data[src + j];
                        }
                    }
                }
                m
            }
            2 => {
                // result[(i, n)] = sum_j a[j] X[i,j,n]
                let mut m = DenseMatrix::zeros(self.d1, self.d3);
                for n in 0..self.d3 {
                    for i in 0..self.d1 {
                        let src = self.offset(i, 0, n);
                        let mut s = F::zero();
                        for (j, &aj) in a.iter().enumerate() {
                            s = s + aj * self.data[src + j];
                        }
                        m[(i, n)] = s;
                    }
                }
                m
            }
            3 => {
                // result[(i, j)] = sum_n a[n] X[i,j,n]
                let mut m = DenseMatrix::zeros(self.d1, self.d2);
                let len = self.d1 * self.d2;
                for (n, &an) in a.iter().enumerate() {
                    if an == F::zero() {
                        continue;
                    }
                    let src = &self.data[n * len..(n + 1) * len];
                    for i in 0..self.d1 {
                        for j in 0..self.d2 {
                            m[(i, j)] = m[(i, j)] + an * src[i * self.d2 + j];
                        }
                    }
                }
                m
            }
            _ => unreachable!(),
        };
        Ok(out)
    }

    /// `X x1 v x2 v`: quadratic form of every frontal slice against `v`.
    pub fn contract_vv(&self, v: &[F]) -> Result<Vec<F>> {
        if v.len() != self.d1 || self.d1 != self.d2 {
            return Err(Error::ModeMismatch {
                mode: 1,
                extent: self.d1,
                operand: v.len(),
            });
        }
        let mut out = vec![F::zero(); self.d3];
        for (n, o) in out.iter_mut().enumerate() {
            let s = self.slice_data(n);
            let mut acc = F::zero();
            for (i, &vi) in v.iter().enumerate() {
                if vi == F::zero() {
                    continue;
                }
                let row = &s[i * self.d2..(i + 1) * self.d2];
                let mut inner = F::zero();
                for (&xj, &vj) in row.iter().zip(v) {
                    inner = inner + xj * vj;
                }
                acc = acc + vi * inner;
            }
            *o = acc;
        }
        Ok(out)
    }

    /// `X x1 v x2 v x3 u`: the full trilinear form.
    pub fn contract_vvu(&self, v: &[F], u: &[F]) -> Result<F> {
        if u.len() != self.d3 {
            return Err(Error::ModeMismatch {
                mode: 3,
                extent: self.d3,
                operand: u.len(),
            });
        }
        let vv = self.contract_vv(v)?;
        Ok(vv.iter().zip(u).map(|(&a, &b)| a * b).sum())
    }

    /// In-place rank-one deflation: `X -= d * v o v o u`.
    pub fn subtract_rank_one(&mut self, d: F, v: &[F], u: &[F]) {
        debug_assert_eq!(v.len(), self.d1);
        debug_assert_eq!(v.len(), self.d2);
        debug_assert_eq!(u.len(), self.d3);
        let len = self.d1 * self.d2;
        for (n, &un) in u.iter().enumerate() {
            let c = d * un;
            if c == F::zero() {
                continue;
            }
            let slice = &mut self.data[n * len..(n + 1) * len];
            for (i, &vi) in v.iter().enumerate() {
                let cvi = c * vi;
                let row = &mut slice[i * self.d2..(i + 1) * self.d2];
                for (x, &vj) in row.iter_mut().zip(v) {
                    *x = *x - cvi * vj;
                }
            }
        }
    }

    /// Mode-n matricization. Rows are indexed by the chosen mode; columns by
    /// the remaining modes with the lower-numbered one varying fastest.
    pub fn unfold(&self, mode: usize) -> Result<DenseMatrix<F>> {
        self.extent(mode)?;
        let (d1, d2, d3) = self.dims();
        let m = match mode {
            1 => DenseMatrix::from_fn(d1, d2 * d3, |i, c| self[(i, c % d2, c / d2)]),
            2 => DenseMatrix::from_fn(d2, d1 * d3, |j, c| self[(c % d1, j, c / d1)]),
            3 => DenseMatrix::from_fn(d3, d1 * d2, |n, c| self[(c % d1, c / d1, n)]),
            _ => unreachable!(),
        };
        Ok(m)
    }

    /// Inverse of [`Tensor3::unfold`] for the given target dims.
    pub fn fold(mat: &DenseMatrix<F>, mode: usize, dims: (usize, usize, usize)) -> Result<Self> {
        let (d1, d2, d3) = dims;
        let expected = match mode {
            1 => (d1, d2 * d3),
            2 => (d2, d1 * d3),
            3 => (d3, d1 * d2),
            _ => return Err(Error::InvalidMode { mode, order: 3 }),
        };
        if mat.shape() != expected {
            return Err(Error::Shape(format!(
                "fold mode-{mode} expects {expected:?}, got {:?}",
                mat.shape()
            )));
        }
        let t = match mode {
            1 => Self::from_fn(d1, d2, d3, |i, j, n| mat[(i, n * d2 + j)]),
            2 => Self::from_fn(d1, d2, d3, |i, j, n| mat[(j, n * d1 + i)]),
            3 => Self::from_fn(d1, d2, d3, |i, j, n| mat[(n, j * d1 + i)]),
            _ => unreachable!(),
        };
        Ok(t)
    }

    /// Largest `|X[i,j,n] - X[j,i,n]|` over all slices (square modes 1-2).
    pub fn max_slice_asymmetry(&self) -> F {
        debug_assert_eq!(self.d1, self.d2);
        let mut worst = F::zero();
        for n in 0..self.d3 {
            let s = self.slice_data(n);
            for i in 0..self.d1 {
                for j in (i + 1)..self.d2 {
                    let d = (s[i * self.d2 + j] - s[j * self.d2 + i]).abs();
                    worst = worst.max(d);
                }
            }
        }
        worst
    }
}

impl<F: Scalar> std::ops::Index<(usize, usize, usize)> for Tensor3<F> {
    type Output = F;
    #[inline]
    fn index(&self, (i, j, n): (usize, usize, usize)) -> &F {
        &self.data[(n * self.d1 + i) * self.d2 + j]
    }
}

impl<F: Scalar> std::ops::IndexMut<(usize, usize, usize)> for Tensor3<F> {
    #[inline]
    fn index_mut(&mut self, (i, j, n): (usize, usize, usize)) -> &mut F {
        &mut self.data[(n * self.d1 + i) * self.d2 + j]
    }
}

// ---------------------------------------------------------------------------
// Semi-symmetric tensor
// ---------------------------------------------------------------------------

/// A `P x P x N` stack of symmetric matrices.
///
/// Construction validates that every frontal slice is symmetric: violations
/// beyond [`SYMMETRY_REJECT_TOL`] are rejected (naming the worst entry),
/// smaller ones are averaged away so the invariant holds exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemiSymmetricTensor<F> {
    inner: Tensor3<F>,
}

impl<F: Scalar> SemiSymmetricTensor<F> {
    /// Builds from slice-major values with the default tolerance policy.
    pub fn from_values(p: usize, n: usize, values: Vec<F>) -> Result<Self> {
        Self::from_tensor(Tensor3::from_values(p, p, n, values)?)
    }

    pub fn from_tensor(t: Tensor3<F>) -> Result<Self> {
        Self::from_tensor_with_tolerance(t, F::of(SYMMETRY_REJECT_TOL))
    }

    pub fn from_tensor_with_tolerance(mut t: Tensor3<F>, reject_tol: F) -> Result<Self> {
        let (d1, d2, d3) = t.dims();
        if d1 != d2 {
            return Err(Error::Shape(format!(
                "semi-symmetric tensor needs square slices, got {d1}x{d2}x{d3}"
            )));
        }
        if d1 == 0 || d3 == 0 {
            return Err(Error::Shape("empty tensor".into()));
        }
        if !t.is_finite() {
            return Err(Error::NonFinite("tensor values".into()));
        }
        // Locate the worst violation for the error message, then symmetrize.
        let mut worst = (F::zero(), 0usize, 0usize, 0usize);
        for n in 0..d3 {
            for i in 0..d1 {
                for j in (i + 1)..d2 {
                    let d = (t[(i, j, n)] - t[(j, i, n)]).abs();
                    if d > worst.0 {
                        worst = (d, i, j, n);
                    }
                }
            }
        }
        if worst.0 > reject_tol {
            return Err(Error::Asymmetric {
                slice: worst.3,
                i: worst.1,
                j: worst.2,
                violation: worst.0.to64(),
                tol: reject_tol.to64(),
            });
        }
        if worst.0 > F::zero() {
            let half = F::of(0.5);
            for n in 0..d3 {
                for i in 0..d1 {
                    for j in (i + 1)..d2 {
                        let avg = (t[(i, j, n)] + t[(j, i, n)]) * half;
                        t[(i, j, n)] = avg;
                        t[(j, i, n)] = avg;
                    }
                }
            }
        }
        Ok(Self { inner: t })
    }

    pub fn from_slices(slices: &[DenseMatrix<F>]) -> Result<Self> {
        if slices.is_empty() {
            return Err(Error::Shape("no slices".into()));
        }
        let p = slices[0].rows();
        let mut data = Vec::with_capacity(p * p * slices.len());
        for (n, s) in slices.iter().enumerate() {
            if s.shape() != (p, p) {
                return Err(Error::Shape(format!(
                    "slice {n} is {:?}, expected ({p}, {p})",
                    s.shape()
                )));
            }
            data.extend_from_slice(s.data());
        }
        Self::from_values(p, slices.len(), data)
    }

    /// Node count `P`.
    pub fn node_count(&self) -> usize {
        self.inner.dims().0
    }

    /// Slice (subject) count `N`.
    pub fn slice_count(&self) -> usize {
        self.inner.dims().2
    }

    pub fn tensor(&self) -> &Tensor3<F> {
        &self.inner
    }

    pub fn into_tensor(self) -> Tensor3<F> {
        self.inner
    }
}

impl<F: Scalar> std::ops::Deref for SemiSymmetricTensor<F> {
    type Target = Tensor3<F>;
    fn deref(&self) -> &Tensor3<F> {
        &self.inner
    }
}

// ---------------------------------------------------------------------------
// Order-4 tensor
// ---------------------------------------------------------------------------

/// Dense order-4 tensor `P x P x M x N`, symmetric in the first two modes
/// for every `(feature, subject)` pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor4<F> {
    p: usize,
    m: usize,
    n: usize,
    data: Vec<F>,
}

impl<F: Scalar> Tensor4<F> {
    pub fn zeros(p: usize, m: usize, n: usize) -> Self {
        Self {
            p,
            m,
            n,
            data: vec![F::zero(); p * p * m * n],
        }
    }

    /// Builds from values indexed `[(l*M + k)*P + i]*P + j` for `X[i,j,k,l]`,
    /// applying the same symmetry policy as the order-3 constructor.
    pub fn from_values(p: usize, m: usize, n: usize, values: Vec<F>) -> Result<Self> {
        if values.len() != p * p * m * n {
            return Err(Error::Shape(format!(
                "{} values cannot fill a {p}x{p}x{m}x{n} tensor",
                values.len()
            )));
        }
        let mut t = Self { p, m, n, data: values };
        if !t.data.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("tensor values".into()));
        }
        let reject = F::of(SYMMETRY_REJECT_TOL);
        let mut worst = (F::zero(), 0usize, 0usize, 0usize);
        for s in 0..(m * n) {
            for i in 0..p {
                for j in (i + 1)..p {
                    let d = (t.data[(s * p + i) * p + j] - t.data[(s * p + j) * p + i]).abs();
                    if d > worst.0 {
                        worst = (d, i, j, s);
                    }
                }
            }
        }
        if worst.0 > reject {
            return Err(Error::Asymmetric {
                slice: worst.3,
                i: worst.1,
                j: worst.2,
                violation: worst.0.to64(),
                tol: reject.to64(),
            });
        }
        if worst.0 > F::zero() {
            let half = F::of(0.5);
            for s in 0..(m * n) {
                for i in 0..p {
                    for j in (i + 1)..p {
                        let a = t.data[(s * p + i) * p + j];
                        let b = t.data[(s * p + j) * p + i];
                        let avg = (a + b) * half;
                        t.data[(s * p + i) * p + j] = avg;
                        t.data[(s * p + j) * p + i] = avg;
                    }
                }
            }
        }
        Ok(t)
    }

    pub fn dims(&self) -> (usize, usize, usize, usize) {
        (self.p, self.p, self.m, self.n)
    }

    #[inline]
    fn offset(&self, i: usize, j: usize, k: usize, l: usize) -> usize {
        (((l * self.m + k) * self.p) + i) * self.p + j
    }

    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> F {
        self.data[self.offset(i, j, k, l)]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, l: usize, v: F) {
        let o = self.offset(i, j, k, l);
        self.data[o] = v;
    }

    pub fn frobenius_norm(&self) -> F {
        self.data
            .iter()
            .map(|&v| v * v)
            .fold(F::zero(), |a, b| a + b)
            .sqrt()
    }

    /// `X x1 v x2 v`: an `M x N` matrix of per-(feature, subject) quadratic
    /// forms.
    pub fn contract_vv(&self, v: &[F]) -> Result<DenseMatrix<F>> {
        if v.len() != self.p {
            return Err(Error::ModeMismatch {
                mode: 1,
                extent: self.p,
                operand: v.len(),
            });
        }
        let mut out = DenseMatrix::zeros(self.m, self.n);
        let pp = self.p * self.p;
        for l in 0..self.n {
            for k in 0..self.m {
                let base = (l * self.m + k) * pp;
                let slice = &self.data[base..base + pp];
                let mut acc = F::zero();
                for (i, &vi) in v.iter().enumerate() {
                    if vi == F::zero() {
                        continue;
                    }
                    let row = &slice[i * self.p..(i + 1) * self.p];
                    let mut inner = F::zero();
                    for (&x, &vj) in row.iter().zip(v) {
                        inner = inner + x * vj;
                    }
                    acc = acc + vi * inner;
                }
                out[(k, l)] = acc;
            }
        }
        Ok(out)
    }

    /// `X x3 w x4 u`: the weighted sum of frontal slices, a `P x P` matrix.
    pub fn contract_wu(&self, w: &[F], u: &[F]) -> Result<DenseMatrix<F>> {
        if w.len() != self.m {
            return Err(Error::ModeMismatch {
                mode: 3,
                extent: self.m,
                operand: w.len(),
            });
        }
        if u.len() != self.n {
            return Err(Error::ModeMismatch {
                mode: 4,
                extent: self.n,
                operand: u.len(),
            });
        }
        let mut out = DenseMatrix::zeros(self.p, self.p);
        let pp = self.p * self.p;
        for (l, &ul) in u.iter().enumerate() {
            for (k, &wk) in w.iter().enumerate() {
                let c = ul * wk;
                if c == F::zero() {
                    continue;
                }
                let base = (l * self.m + k) * pp;
                let slice = &self.data[base..base + pp];
                for i in 0..self.p {
                    for j in 0..self.p {
                        out[(i, j)] = out[(i, j)] + c * slice[i * self.p + j];
                    }
                }
            }
        }
        Ok(out)
    }

    /// Full contraction `X x1 v x2 v x3 w x4 u`.
    pub fn contract_all(&self, v: &[F], w: &[F], u: &[F]) -> Result<F> {
        let vv = self.contract_vv(v)?;
        let mut acc = F::zero();
        for (l, &ul) in u.iter().enumerate() {
            for (k, &wk) in w.iter().enumerate() {
                acc = acc + ul * wk * vv[(k, l)];
            }
        }
        Ok(acc)
    }

    /// In-place rank-one deflation `X -= d * v o v o w o u`.
    pub fn subtract_rank_one(&mut self, d: F, v: &[F], w: &[F], u: &[F]) {
        let pp = self.p * self.p;
        for (l, &ul) in u.iter().enumerate() {
            for (k, &wk) in w.iter().enumerate() {
                let c = d * ul * wk;
                if c == F::zero() {
                    continue;
                }
                let base = (l * self.m + k) * pp;
                let slice = &mut self.data[base..base + pp];
                for (i, &vi) in v.iter().enumerate() {
                    let cvi = c * vi;
                    let row = &mut slice[i * self.p..(i + 1) * self.p];
                    for (x, &vj) in row.iter_mut().zip(v) {
                        *x = *x - cvi * vj;
                    }
                }
            }
        }
    }

    /// Drops a singleton feature mode, yielding the order-3 stack.
    pub fn squeeze_feature(&self) -> Result<SemiSymmetricTensor<F>> {
        if self.m != 1 {
            return Err(Error::Shape(format!(
                "squeeze needs a singleton feature mode, got M = {}",
                self.m
            )));
        }
        SemiSymmetricTensor::from_values(self.p, self.n, self.data.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::norm2;
    use approx::assert_relative_eq;
    use rand::Rng as _;

    fn random_tensor(d1: usize, d2: usize, d3: usize, seed: u64) -> Tensor3<f64> {
        let mut rng = crate::rng::rng_from_seed(seed);
        Tensor3::from_fn(d1, d2, d3, |_, _, _| rng.gen_range(-1.0..1.0))
    }

    fn random_semisym(p: usize, n: usize, seed: u64) -> SemiSymmetricTensor<f64> {
        let mut rng = crate::rng::rng_from_seed(seed);
        let t = Tensor3::from_fn(p, p, n, |_, _, _| rng.gen_range(-1.0..1.0));
        let sym = Tensor3::from_fn(p, p, n, |i, j, n_| 0.5 * (t[(i, j, n_)] + t[(j, i, n_)]));
        SemiSymmetricTensor::from_tensor(sym).unwrap()
    }

    #[test]
    fn mode3_vector_on_all_ones() {
        let t = Tensor3::from_fn(2, 2, 2, |_, _, _| 1.0);
        let m = t.mode_mul_vec(3, &[1.0, 1.0]).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_relative_eq!(m[(i, j)], 2.0);
            }
        }
    }

    #[test]
    fn mode1_identity_leaves_tensor_unchanged() {
        let t = random_tensor(3, 4, 2, 1);
        let out = t.mode_mul_mat(1, &DenseMatrix::identity(3)).unwrap();
        assert_eq!(out, t);
    }

    #[test]
    fn mode_products_match_triple_loop_oracle() {
        let t = random_tensor(3, 3, 2, 2);
        let mut rng = crate::rng::rng_from_seed(3);
        let a = DenseMatrix::from_fn(4, 3, |_, _| rng.gen_range(-1.0..1.0));
        for mode in 1..=3usize {
            let a_sized = if mode == 3 {
                DenseMatrix::from_fn(4, 2, |_, _| rng.gen_range(-1.0..1.0))
            } else {
                a.clone()
            };
            let got = t.mode_mul_mat(mode, &a_sized).unwrap();
            // naive contraction
            let (d1, d2, d3) = t.dims();
            let dims_out = match mode {
                1 => (a_sized.rows(), d2, d3),
                2 => (d1, a_sized.rows(), d3),
                _ => (d1, d2, a_sized.rows()),
            };
            for i in 0..dims_out.0 {
                for j in 0..dims_out.1 {
                    for n in 0..dims_out.2 {
                        let mut want = 0.0;
                        match mode {
                            1 => {
                                for s in 0..d1 {
                                    want += a_sized[(i, s)] * t[(s, j, n)];
                                }
                            }
                            2 => {
                                for s in 0..d2 {
                                    want += a_sized[(j, s)] * t[(i, s, n)];
                                }
                            }
                            _ => {
                                for s in 0..d3 {
                                    want += a_sized[(n, s)] * t[(i, j, s)];
                                }
                            }
                        }
                        assert_relative_eq!(got[(i, j, n)], want, epsilon = 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn mode_mismatch_names_mode_and_extents() {
        let t = random_tensor(3, 3, 2, 4);
        let err = t.mode_mul_vec(3, &[1.0; 5]).unwrap_err();
        match err {
            Error::ModeMismatch { mode, extent, operand } => {
                assert_eq!((mode, extent, operand), (3, 2, 5));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn inner_product_definitions() {
        let t = random_tensor(4, 4, 3, 5);
        let z = Tensor3::zeros(4, 4, 3);
        assert_relative_eq!(
            t.inner_product(&t).unwrap(),
            t.frobenius_norm().powi(2),
            epsilon = 1e-12
        );
        assert_relative_eq!(t.inner_product(&z).unwrap(), 0.0);
        // flatten-and-dot oracle
        let s = random_tensor(4, 4, 3, 6);
        let flat: f64 = t.data().iter().zip(s.data()).map(|(a, b)| a * b).sum();
        assert_relative_eq!(t.inner_product(&s).unwrap(), flat, epsilon = 1e-12);
    }

    #[test]
    fn frobenius_examples() {
        let ones = Tensor3::from_fn(2, 2, 2, |_, _, _| 1.0);
        assert_relative_eq!(ones.frobenius_norm(), 8.0f64.sqrt(), epsilon = 1e-12);
        assert_relative_eq!(Tensor3::<f64>::zeros(3, 3, 3).frobenius_norm(), 0.0);
        let t = random_tensor(3, 2, 4, 7);
        assert_relative_eq!(t.frobenius_norm(), norm2(t.data()), epsilon = 1e-12);
    }

    #[test]
    fn unfold_of_single_symmetric_slice_is_that_slice() {
        let x = random_semisym(4, 1, 8);
        let unf = x.unfold(1).unwrap();
        assert_eq!(unf.shape(), (4, 4));
        for i in 0..4 {
            for j in 0..4 {
                assert_relative_eq!(unf[(i, j)], x[(i, j, 0)]);
            }
        }
    }

    #[test]
    fn unfold_fold_round_trip_is_exact() {
        let t = random_tensor(3, 4, 5, 9);
        for mode in 1..=3 {
            let unf = t.unfold(mode).unwrap();
            let back = Tensor3::fold(&unf, mode, t.dims()).unwrap();
            assert_eq!(back, t, "mode {mode}");
        }
    }

    #[test]
    fn unfold_matches_index_arithmetic_oracle() {
        let t = random_tensor(3, 3, 2, 10);
        // Mode-1: column index j2 + j3 * d2 (lower-numbered remaining mode fastest)
        let u1 = t.unfold(1).unwrap();
        for i in 0..3 {
            for j2 in 0..3 {
                for j3 in 0..2 {
                    assert_relative_eq!(u1[(i, j2 + j3 * 3)], t[(i, j2, j3)]);
                }
            }
        }
        // Mode-3: column index i1 + i2 * d1
        let u3 = t.unfold(3).unwrap();
        for n in 0..2 {
            for i1 in 0..3 {
                for i2 in 0..3 {
                    assert_relative_eq!(u3[(n, i1 + i2 * 3)], t[(i1, i2, n)]);
                }
            }
        }
        assert!(matches!(
            t.unfold(4),
            Err(Error::InvalidMode { mode: 4, order: 3 })
        ));
    }

    #[test]
    fn construction_rejects_large_asymmetry_naming_entry() {
        let mut t = Tensor3::zeros(3, 3, 2);
        t[(0, 1, 1)] = 1e-3;
        let err = SemiSymmetricTensor::from_tensor(t).unwrap_err();
        match err {
            Error::Asymmetric { slice, i, j, violation, .. } => {
                assert_eq!((slice, i, j), (1, 0, 1));
                assert_relative_eq!(violation, 1e-3);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn construction_symmetrizes_small_asymmetry() {
        let mut t = Tensor3::zeros(2, 2, 1);
        t[(0, 1, 0)] = 1.0 + 1e-9;
        t[(1, 0, 0)] = 1.0 - 1e-9;
        let x = SemiSymmetricTensor::from_tensor(t).unwrap();
        assert_relative_eq!(x[(0, 1, 0)], 1.0, epsilon = 1e-15);
        assert_relative_eq!(x[(0, 1, 0)], x[(1, 0, 0)]);
    }

    #[test]
    fn construction_rejects_non_finite() {
        let mut t = Tensor3::zeros(2, 2, 1);
        t[(0, 0, 0)] = f64::NAN;
        assert!(matches!(
            SemiSymmetricTensor::from_tensor(t),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn mode3_contraction_of_semisym_is_symmetric() {
        let x = random_semisym(5, 3, 11);
        let mut rng = crate::rng::rng_from_seed(12);
        let a: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let m = x.mode_mul_vec(3, &a).unwrap();
        let (asym, _, _) = m.max_asymmetry();
        assert!(asym <= 1e-12);
    }

    #[test]
    fn orthogonal_mode_product_preserves_frobenius_norm() {
        let t = random_tensor(4, 5, 3, 13);
        // Orthogonal Q from QR of a random square matrix.
        let mut rng = crate::rng::rng_from_seed(14);
        for mode in 1..=3usize {
            let d = [t.dims().0, t.dims().1, t.dims().2][mode - 1];
            let g = DenseMatrix::from_fn(d, d, |_, _| rng.gen_range(-1.0..1.0));
            let (q, _) = crate::linalg::qr_thin(&g).unwrap();
            let rotated = t.mode_mul_mat(mode, &q).unwrap();
            assert_relative_eq!(
                rotated.frobenius_norm(),
                t.frobenius_norm(),
                max_relative = 1e-10
            );
        }
    }

    #[test]
    fn mode_product_is_linear_in_operand() {
        let t = random_tensor(3, 4, 2, 15);
        let mut rng = crate::rng::rng_from_seed(16);
        let a = DenseMatrix::from_fn(2, 4, |_, _| rng.gen_range(-1.0..1.0));
        let b = DenseMatrix::from_fn(2, 4, |_, _| rng.gen_range(-1.0..1.0));
        let sum = t.mode_mul_mat(2, &a.add(&b).unwrap()).unwrap();
        let ta = t.mode_mul_mat(2, &a).unwrap();
        let tb = t.mode_mul_mat(2, &b).unwrap();
        for i in 0..3 {
            for j in 0..2 {
                for n in 0..2 {
                    assert_relative_eq!(
                        sum[(i, j, n)],
                        ta[(i, j, n)] + tb[(i, j, n)],
                        epsilon = 1e-12
                    );
                }
            }
        }
    }

    #[test]
    fn tensor4_contractions_match_naive_loops() {
        let mut rng = crate::rng::rng_from_seed(21);
        let (p, m, n) = (3, 2, 4);
        let mut t = Tensor4::zeros(p, m, n);
        for l in 0..n {
            for k in 0..m {
                for i in 0..p {
                    for j in 0..=i {
                        let v = rng.gen_range(-1.0..1.0);
                        t.set(i, j, k, l, v);
                        t.set(j, i, k, l, v);
                    }
                }
            }
        }
        let v: Vec<f64> = (0..p).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let w: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let u: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();

        let vv = t.contract_vv(&v).unwrap();
        let mut want_scalar = 0.0;
        for k in 0..m {
            for l in 0..n {
                let mut acc = 0.0;
                for i in 0..p {
                    for j in 0..p {
                        acc += t.get(i, j, k, l) * v[i] * v[j];
                    }
                }
                assert_relative_eq!(vv[(k, l)], acc, epsilon = 1e-12);
                want_scalar += acc * w[k] * u[l];
            }
        }
        assert_relative_eq!(t.contract_all(&v, &w, &u).unwrap(), want_scalar, epsilon = 1e-12);

        let wu = t.contract_wu(&w, &u).unwrap();
        for i in 0..p {
            for j in 0..p {
                let mut acc = 0.0;
                for k in 0..m {
                    for l in 0..n {
                        acc += t.get(i, j, k, l) * w[k] * u[l];
                    }
                }
                assert_relative_eq!(wu[(i, j)], acc, epsilon = 1e-12);
            }
        }
    }
}
