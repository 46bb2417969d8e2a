//! Dense matrix storage and the factorizations the decompositions need:
//! symmetric eigensolve (Householder tridiagonalization + implicit QL),
//! Householder QR, LU and Cholesky solves, and a PSD pseudo-inverse.
//!
//! Matrices here are small (a few hundred rows at most), so everything is
//! plain row-major storage with direct O(n^3) algorithms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Vector of scalars; kept as a plain `Vec` throughout.
pub type DenseVector<F> = Vec<F>;

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix<F> {
    rows: usize,
    cols: usize,
    data: Vec<F>,
}

impl<F: Scalar> DenseMatrix<F> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![F::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = F::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> F) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds from row-major data; `data.len()` must equal `rows * cols`.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<F>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} values cannot fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<F>]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != ncols {
                return Err(Error::Shape(format!(
                    "ragged rows: row 0 has {ncols} entries, row {i} has {}",
                    r.len()
                )));
            }
        }
        Ok(Self {
            rows: nrows,
            cols: ncols,
            data: rows.concat(),
        })
    }

    /// Column vector from a slice.
    pub fn column(values: &[F]) -> Self {
        Self {
            rows: values.len(),
            cols: 1,
            data: values.to_vec(),
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn data(&self) -> &[F] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[F] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [F] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<F> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_col(&mut self, j: usize, values: &[F]) {
        debug_assert_eq!(values.len(), self.rows);
        for (i, &v) in values.iter().enumerate() {
            self[(i, j)] = v;
        }
    }

    /// Copy of the first `k` columns.
    pub fn leading_cols(&self, k: usize) -> Self {
        Self::from_fn(self.rows, k, |i, j| self[(i, j)])
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn scale(&self, s: F) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| v * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(F, F) -> F) -> Result<Self> {
        if self.shape() != other.shape() {
            return Err(Error::Shape(format!(
                "elementwise op on {:?} vs {:?}",
                self.shape(),
                other.shape()
            )));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Shape(format!(
                "matmul {:?} x {:?}",
                self.shape(),
                other.shape()
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == F::zero() {
                    continue;
                }
                let orow = other.row(k);
                let dst = out.row_mut(i);
                for (d, &o) in dst.iter_mut().zip(orow) {
                    *d = *d + a * o;
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, x: &[F]) -> Result<Vec<F>> {
        if self.cols != x.len() {
            return Err(Error::Shape(format!(
                "matvec {:?} x len-{}",
                self.shape(),
                x.len()
            )));
        }
        Ok((0..self.rows).map(|i| dot(self.row(i), x)).collect())
    }

    /// `self^T * other`.
    pub fn t_matmul(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows {
            return Err(Error::Shape(format!(
                "t_matmul {:?}^T x {:?}",
                self.shape(),
                other.shape()
            )));
        }
        let mut out = Self::zeros(self.cols, other.cols);
        for k in 0..self.rows {
            let srow = self.row(k);
            let orow = other.row(k);
            for (i, &a) in srow.iter().enumerate() {
                if a == F::zero() {
                    continue;
                }
                let dst = out.row_mut(i);
                for (d, &o) in dst.iter_mut().zip(orow) {
                    *d = *d + a * o;
                }
            }
        }
        Ok(out)
    }

    /// `self^T * x`.
    pub fn t_matvec(&self, x: &[F]) -> Result<Vec<F>> {
        if self.rows != x.len() {
            return Err(Error::Shape(format!(
                "t_matvec {:?}^T x len-{}",
                self.shape(),
                x.len()
            )));
        }
        let mut out = vec![F::zero(); self.cols];
        for (i, &xi) in x.iter().enumerate() {
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o = *o + a * xi;
            }
        }
        Ok(out)
    }

    /// Gram matrix `self^T * self`.
    pub fn gram(&self) -> Self {
        self.t_matmul(self).expect("gram shapes always agree")
    }

    pub fn frobenius_norm(&self) -> F {
        self.data
            .iter()
            .map(|&v| v * v)
            .fold(F::zero(), |a, b| a + b)
            .sqrt()
    }

    /// Largest absolute deviation from symmetry, with its position.
    pub fn max_asymmetry(&self) -> (F, usize, usize) {
        let mut worst = (F::zero(), 0, 0);
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                let d = (self[(i, j)] - self[(j, i)]).abs();
                if d > worst.0 {
                    worst = (d, i, j);
                }
            }
        }
        worst
    }

    /// `(A + A^T) / 2`.
    pub fn symmetrized(&self) -> Self {
        let half = F::of(0.5);
        Self::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)] + self[(j, i)]) * half
        })
    }

    /// Rank-one update `self + s * x y^T`.
    pub fn add_outer(&mut self, s: F, x: &[F], y: &[F]) {
        debug_assert_eq!(x.len(), self.rows);
        debug_assert_eq!(y.len(), self.cols);
        for (i, &xi) in x.iter().enumerate() {
            let sxi = s * xi;
            for (d, &yj) in self.row_mut(i).iter_mut().zip(y) {
                *d = *d + sxi * yj;
            }
        }
    }
}

impl<F: Scalar> std::ops::Index<(usize, usize)> for DenseMatrix<F> {
    type Output = F;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &F {
        &self.data[i * self.cols + j]
    }
}

impl<F: Scalar> std::ops::IndexMut<(usize, usize)> for DenseMatrix<F> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut F {
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot<F: Scalar>(a: &[F], b: &[F]) -> F {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

pub fn norm2<F: Scalar>(a: &[F]) -> F {
    dot(a, a).sqrt()
}

/// Normalizes in place; returns the original norm.
pub fn normalize<F: Scalar>(a: &mut [F]) -> F {
    let n = norm2(a);
    if n > F::zero() {
        for v in a.iter_mut() {
            *v = *v / n;
        }
    }
    n
}

/// Flips the sign so the entry of largest magnitude is positive.
///
/// Applied everywhere an eigenvector or factor column is returned, so
/// sign-ambiguous factors come out deterministic.
pub fn fix_sign<F: Scalar>(v: &mut [F]) {
    let mut best = F::zero();
    let mut sign = F::one();
    for &x in v.iter() {
        if x.abs() > best {
            best = x.abs();
            sign = if x < F::zero() { -F::one() } else { F::one() };
        }
    }
    if sign < F::zero() {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
}

// ---------------------------------------------------------------------------
// Symmetric eigendecomposition
// ---------------------------------------------------------------------------

/// Eigendecomposition of a real symmetric matrix: `A = V diag(values) V^T`.
///
/// Eigenvalues ascending, eigenvectors in the matching columns of `vectors`.
#[derive(Debug, Clone)]
pub struct SymEigen<F> {
    pub values: Vec<F>,
    pub vectors: DenseMatrix<F>,
}

/// Full symmetric eigensolve: Householder tridiagonalization followed by
/// implicit-shift QL (the classic EISPACK tred2/tql2 pair).
pub fn sym_eigen<F: Scalar>(a: &DenseMatrix<F>) -> Result<SymEigen<F>> {
    if a.rows() != a.cols() {
        return Err(Error::Shape(format!("eigensolve on {:?}", a.shape())));
    }
    if !a.is_finite() {
        return Err(Error::NonFinite("eigensolve input".into()));
    }
    let n = a.rows();
    let mut v = a.symmetrized();
    let mut d = vec![F::zero(); n];
    let mut e = vec![F::zero(); n];
    if n == 0 {
        return Ok(SymEigen {
            values: d,
            vectors: v,
        });
    }
    tred2(&mut v, &mut d, &mut e);
    tql2(&mut v, &mut d, &mut e)?;
    sort_eigen_ascending(&mut d, &mut v);
    Ok(SymEigen {
        values: d,
        vectors: v,
    })
}

fn tred2<F: Scalar>(v: &mut DenseMatrix<F>, d: &mut [F], e: &mut [F]) {
    let n = v.rows();
    for j in 0..n {
        d[j] = v[(n - 1, j)];
    }

    for i in (1..n).rev() {
        let mut scale = F::zero();
        let mut h = F::zero();
        for &dk in d.iter().take(i) {
            scale = scale + dk.abs();
        }
        if scale == F::zero() {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[(i - 1, j)];
                v[(i, j)] = F::zero();
                v[(j, i)] = F::zero();
            }
        } else {
            for dk in d.iter_mut().take(i) {
                *dk = *dk / scale;
                h = h + *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > F::zero() {
                g = -g;
            }
            e[i] = scale * g;
            h = h - f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = F::zero();
            }
            for j in 0..i {
                f = d[j];
                v[(j, i)] = f;
                g = e[j] + v[(j, j)] * f;
                for k in (j + 1)..i {
                    g = g + v[(k, j)] * d[k];
                    e[k] = e[k] + v[(k, j)] * f;
                }
                e[j] = g;
            }
            f = F::zero();
            for j in 0..i {
                e[j] = e[j] / h;
                f = f + e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] = e[j] - hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[(k, j)] = v[(k, j)] - (f * e[k] + g * d[k]);
                }
                d[j] = v[(i - 1, j)];
                v[(i, j)] = F::zero();
            }
        }
        d[i] = h;
    }

    // Accumulate transformations.
    for i in 0..n.saturating_sub(1) {
        v[(n - 1, i)] = v[(i, i)];
        v[(i, i)] = F::one();
        let h = d[i + 1];
        if h != F::zero() {
            for k in 0..=i {
                d[k] = v[(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = F::zero();
                for k in 0..=i {
                    g = g + v[(k, i + 1)] * v[(k, j)];
                }
                for k in 0..=i {
                    v[(k, j)] = v[(k, j)] - g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[(k, i + 1)] = F::zero();
        }
    }
    for j in 0..n {
        d[j] = v[(n - 1, j)];
        v[(n - 1, j)] = F::zero();
    }
    v[(n - 1, n - 1)] = F::one();
    e[0] = F::zero();
}

fn tql2<F: Scalar>(v: &mut DenseMatrix<F>, d: &mut [F], e: &mut [F]) -> Result<()> {
    let n = v.rows();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = F::zero();

    let mut f = F::zero();
    let mut tst1 = F::zero();
    let eps = F::epsilon();
    let two = F::of(2.0);

    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m == n {
            m = n - 1;
        }

        if m > l {
            for iter in 0.. {
                if iter > 100 {
                    return Err(Error::Singular("QL iteration failed to converge".into()));
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (two * e[l]);
                let mut r = p.hypot(F::one());
                if p < F::zero() {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di = *di - h;
                }
                f = f + h;

                p = d[m];
                let mut c = F::one();
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = F::zero();
                let mut s2 = F::zero();
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        h = v[(k, i + 1)];
                        v[(k, i + 1)] = s * v[(k, i)] + c * h;
                        v[(k, i)] = c * v[(k, i)] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;

                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] = d[l] + f;
        e[l] = F::zero();
    }
    Ok(())
}

fn sort_eigen_ascending<F: Scalar>(d: &mut [F], v: &mut DenseMatrix<F>) {
    let n = d.len();
    for i in 0..n.saturating_sub(1) {
        let mut k = i;
        let mut p = d[i];
        for j in (i + 1)..n {
            if d[j] < p {
                k = j;
                p = d[j];
            }
        }
        if k != i {
            d.swap(k, i);
            for r in 0..n {
                let tmp = v[(r, i)];
                v[(r, i)] = v[(r, k)];
                v[(r, k)] = tmp;
            }
        }
    }
}

/// Result of [`symmetric_top_eigenvector`].
#[derive(Debug, Clone)]
pub struct TopEigen<F> {
    pub value: F,
    pub vector: Vec<F>,
    /// True when the spectral gap below the top eigenvalue is under 1e-12;
    /// the vector is then one arbitrary member of the leading eigenspace.
    pub degenerate: bool,
}

/// Dimension above which the top eigenpair switches from a full solve to
/// shifted power iteration.
pub const DIRECT_EIGEN_LIMIT: usize = 512;

const DEGENERACY_GAP: f64 = 1e-12;

/// Algebraically largest eigenvalue and its unit eigenvector.
///
/// The input is symmetrized as `(A + A^T)/2` first. Sign convention: the
/// entry of largest magnitude is positive. Dimensions up to
/// [`DIRECT_EIGEN_LIMIT`] use the full tridiagonal solve; larger matrices
/// use power iteration on a spectrum shift (tolerance 1e-12, at most
/// 10,000 iterations).
pub fn symmetric_top_eigenvector<F: Scalar>(a: &DenseMatrix<F>) -> Result<TopEigen<F>> {
    if a.rows() != a.cols() {
        return Err(Error::Shape(format!("top eigenvector of {:?}", a.shape())));
    }
    if !a.is_finite() {
        return Err(Error::NonFinite("top eigenvector input".into()));
    }
    let n = a.rows();
    if n == 0 {
        return Err(Error::Shape("top eigenvector of empty matrix".into()));
    }
    if n <= DIRECT_EIGEN_LIMIT {
        let eig = sym_eigen(a)?;
        let mut vector = eig.vectors.col(n - 1);
        fix_sign(&mut vector);
        let value = eig.values[n - 1];
        let gap = if n >= 2 {
            (value - eig.values[n - 2]).to64()
        } else {
            f64::INFINITY
        };
        Ok(TopEigen {
            value,
            vector,
            degenerate: gap < DEGENERACY_GAP,
        })
    } else {
        power_top_eigen(&a.symmetrized())
    }
}

fn power_top_eigen<F: Scalar>(a: &DenseMatrix<F>) -> Result<TopEigen<F>> {
    let n = a.rows();
    // Shift so the algebraically largest eigenvalue dominates in magnitude.
    let shift = (0..n)
        .map(|i| a.row(i).iter().map(|v| v.abs()).fold(F::zero(), |x, y| x + y))
        .fold(F::zero(), F::max);
    let tol = F::of(1e-12);
    let (mu1, v1) = power_iterate(a, shift, None, tol)?;
    // Second eigenvalue via deflation, only to estimate the gap.
    let (mu2, _) = power_iterate(a, shift, Some(&v1), tol)?;
    let value = mu1 - shift;
    let gap = (mu1 - mu2).to64();
    let mut vector = v1;
    fix_sign(&mut vector);
    Ok(TopEigen {
        value,
        vector,
        degenerate: gap < DEGENERACY_GAP,
    })
}

/// Power iteration on `A + shift*I`, optionally deflating against `deflate`.
fn power_iterate<F: Scalar>(
    a: &DenseMatrix<F>,
    shift: F,
    deflate: Option<&[F]>,
    tol: F,
) -> Result<(F, Vec<F>)> {
    let n = a.rows();
    let mut v: Vec<F> = (0..n)
        .map(|i| F::of(((i * 2654435761 + 1013904223) % 1000) as f64 / 1000.0 - 0.5))
        .collect();
    if let Some(d) = deflate {
        let c = dot(&v, d);
        for (vi, &di) in v.iter_mut().zip(d) {
            *vi = *vi - c * di;
        }
    }
    normalize(&mut v);
    let mut mu = F::zero();
    for _ in 0..10_000 {
        let mut w = a.matvec(&v)?;
        for (wi, &vi) in w.iter_mut().zip(&v) {
            *wi = *wi + shift * vi;
        }
        if let Some(d) = deflate {
            let c = dot(&w, d);
            for (wi, &di) in w.iter_mut().zip(d) {
                *wi = *wi - c * di;
            }
        }
        let new_mu = dot(&w, &v);
        if normalize(&mut w) == F::zero() {
            return Ok((shift, v)); // annihilated: eigenvalue 0 of shifted op
        }
        let delta = (new_mu - mu).abs();
        mu = new_mu;
        v = w;
        if delta <= tol * mu.abs().max(F::one()) {
            break;
        }
    }
    Ok((mu, v))
}

// ---------------------------------------------------------------------------
// QR, least squares, LU, Cholesky, pseudo-inverse
// ---------------------------------------------------------------------------

/// Thin Householder QR of an `m x n` matrix with `m >= n`:
/// `A = Q R` with `Q` of shape `m x n` (orthonormal columns) and `R` upper
/// triangular `n x n`.
pub fn qr_thin<F: Scalar>(a: &DenseMatrix<F>) -> Result<(DenseMatrix<F>, DenseMatrix<F>)> {
    let (m, n) = a.shape();
    if m < n {
        return Err(Error::Shape(format!(
            "thin QR needs rows >= cols, got {m}x{n}"
        )));
    }
    let mut r_work = a.clone();
    // Householder vectors, one per column (zeros above the pivot row).
    let mut vs = DenseMatrix::zeros(m, n);
    let mut betas = vec![F::zero(); n];

    for j in 0..n {
        let mut norm_x = F::zero();
        for i in j..m {
            norm_x = norm_x + r_work[(i, j)] * r_work[(i, j)];
        }
        norm_x = norm_x.sqrt();
        if norm_x == F::zero() {
            continue;
        }
        let alpha = if r_work[(j, j)] >= F::zero() {
            -norm_x
        } else {
            norm_x
        };
        vs[(j, j)] = r_work[(j, j)] - alpha;
        for i in (j + 1)..m {
            vs[(i, j)] = r_work[(i, j)];
        }
        let mut vnorm2 = F::zero();
        for i in j..m {
            vnorm2 = vnorm2 + vs[(i, j)] * vs[(i, j)];
        }
        if vnorm2 == F::zero() {
            continue;
        }
        betas[j] = F::of(2.0) / vnorm2;
        // Apply the reflector to the remaining columns of R.
        for c in j..n {
            let mut s = F::zero();
            for i in j..m {
                s = s + vs[(i, j)] * r_work[(i, c)];
            }
            s = s * betas[j];
            for i in j..m {
                r_work[(i, c)] = r_work[(i, c)] - s * vs[(i, j)];
            }
        }
    }

    let mut r = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            r[(i, j)] = r_work[(i, j)];
        }
    }

    // Form thin Q by applying reflectors in reverse to identity columns.
    let mut q = DenseMatrix::zeros(m, n);
    for j in 0..n {
        q[(j, j)] = F::one();
    }
    for j in (0..n).rev() {
        if betas[j] == F::zero() {
            continue;
        }
        for c in 0..n {
            let mut s = F::zero();
            for i in j..m {
                s = s + vs[(i, j)] * q[(i, c)];
            }
            s = s * betas[j];
            for i in j..m {
                q[(i, c)] = q[(i, c)] - s * vs[(i, j)];
            }
        }
    }
    Ok((q, r))
}

/// Solves the least-squares problem `min ||A x - b||` via thin QR.
/// Requires `A` of full column rank; near-singular `R` is reported.
pub fn lstsq_qr<F: Scalar>(a: &DenseMatrix<F>, b: &[F]) -> Result<Vec<F>> {
    let (m, n) = a.shape();
    if b.len() != m {
        return Err(Error::Shape(format!("lstsq {m}x{n} vs rhs {}", b.len())));
    }
    let (q, r) = qr_thin(a)?;
    let qtb = q.t_matvec(b)?;
    back_substitute(&r, &qtb)
}

fn back_substitute<F: Scalar>(r: &DenseMatrix<F>, y: &[F]) -> Result<Vec<F>> {
    let n = r.rows();
    let mut x = vec![F::zero(); n];
    let scale = (0..n).map(|i| r[(i, i)].abs()).fold(F::zero(), F::max);
    let tiny = scale * F::of(1e-13) + F::min_positive_value();
    for i in (0..n).rev() {
        let mut s = y[i];
        for j in (i + 1)..n {
            s = s - r[(i, j)] * x[j];
        }
        if r[(i, i)].abs() <= tiny {
            return Err(Error::Singular(format!(
                "R[{i},{i}] = {:.3e} in triangular solve",
                r[(i, i)].to64()
            )));
        }
        x[i] = s / r[(i, i)];
    }
    Ok(x)
}

/// LU solve with partial pivoting: returns `x` with `A x = b`.
pub fn solve_lu<F: Scalar>(a: &DenseMatrix<F>, b: &[F]) -> Result<Vec<F>> {
    let n = a.rows();
    if a.cols() != n || b.len() != n {
        return Err(Error::Shape(format!(
            "LU solve on {:?} with rhs {}",
            a.shape(),
            b.len()
        )));
    }
    let mut lu = a.clone();
    let mut x = b.to_vec();
    let mut perm: Vec<usize> = (0..n).collect();

    for k in 0..n {
        let mut p = k;
        let mut best = lu[(k, k)].abs();
        for i in (k + 1)..n {
            if lu[(i, k)].abs() > best {
                best = lu[(i, k)].abs();
                p = i;
            }
        }
        if best == F::zero() {
            return Err(Error::Singular(format!("zero pivot at column {k}")));
        }
        if p != k {
            for j in 0..n {
                let t = lu[(k, j)];
                lu[(k, j)] = lu[(p, j)];
                lu[(p, j)] = t;
            }
            x.swap(k, p);
            perm.swap(k, p);
        }
        for i in (k + 1)..n {
            let f = lu[(i, k)] / lu[(k, k)];
            lu[(i, k)] = f;
            for j in (k + 1)..n {
                lu[(i, j)] = lu[(i, j)] - f * lu[(k, j)];
            }
            x[i] = x[i] - f * x[k];
        }
    }
    for i in (0..n).rev() {
        let mut s = x[i];
        for j in (i + 1)..n {
            s = s - lu[(i, j)] * x[j];
        }
        x[i] = s / lu[(i, i)];
    }
    Ok(x)
}

/// Determinant via LU with partial pivoting.
pub fn determinant<F: Scalar>(a: &DenseMatrix<F>) -> Result<F> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::Shape(format!("determinant of {:?}", a.shape())));
    }
    let mut lu = a.clone();
    let mut det = F::one();
    for k in 0..n {
        let mut p = k;
        let mut best = lu[(k, k)].abs();
        for i in (k + 1)..n {
            if lu[(i, k)].abs() > best {
                best = lu[(i, k)].abs();
                p = i;
            }
        }
        if best == F::zero() {
            return Ok(F::zero());
        }
        if p != k {
            for j in 0..n {
                let t = lu[(k, j)];
                lu[(k, j)] = lu[(p, j)];
                lu[(p, j)] = t;
            }
            det = -det;
        }
        det = det * lu[(k, k)];
        for i in (k + 1)..n {
            let f = lu[(i, k)] / lu[(k, k)];
            for j in (k + 1)..n {
                lu[(i, j)] = lu[(i, j)] - f * lu[(k, j)];
            }
        }
    }
    Ok(det)
}

/// Explicit inverse via LU column solves. Small matrices only.
pub fn inverse<F: Scalar>(a: &DenseMatrix<F>) -> Result<DenseMatrix<F>> {
    let n = a.rows();
    let mut out = DenseMatrix::zeros(n, n);
    for j in 0..n {
        let mut e = vec![F::zero(); n];
        e[j] = F::one();
        let col = solve_lu(a, &e)?;
        out.set_col(j, &col);
    }
    Ok(out)
}

/// Cholesky solve for symmetric positive-definite systems.
pub fn solve_cholesky<F: Scalar>(a: &DenseMatrix<F>, b: &[F]) -> Result<Vec<F>> {
    let n = a.rows();
    if a.cols() != n || b.len() != n {
        return Err(Error::Shape(format!(
            "Cholesky solve on {:?} with rhs {}",
            a.shape(),
            b.len()
        )));
    }
    let mut l = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[(i, j)];
            for k in 0..j {
                s = s - l[(i, k)] * l[(j, k)];
            }
            if i == j {
                if s <= F::zero() {
                    return Err(Error::Singular(format!(
                        "non-positive pivot {:.3e} at {i}",
                        s.to64()
                    )));
                }
                l[(i, j)] = s.sqrt();
            } else {
                l[(i, j)] = s / l[(j, j)];
            }
        }
    }
    // Forward then backward substitution.
    let mut y = vec![F::zero(); n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s = s - l[(i, k)] * y[k];
        }
        y[i] = s / l[(i, i)];
    }
    let mut x = vec![F::zero(); n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s = s - l[(k, i)] * x[k];
        }
        x[i] = s / l[(i, i)];
    }
    Ok(x)
}

/// Pseudo-inverse of a symmetric PSD matrix via its eigendecomposition.
///
/// Eigenvalues below `tol * max_eigenvalue` are treated as zero. The flag
/// reports whether any were dropped.
pub fn pinv_sym<F: Scalar>(a: &DenseMatrix<F>, tol: F) -> Result<(DenseMatrix<F>, bool)> {
    let eig = sym_eigen(a)?;
    let n = a.rows();
    let max_ev = eig
        .values
        .iter()
        .map(|v| v.abs())
        .fold(F::zero(), F::max);
    let cutoff = tol * max_ev;
    let mut dropped = false;
    let mut out = DenseMatrix::zeros(n, n);
    for k in 0..n {
        let ev = eig.values[k];
        if ev.abs() <= cutoff || ev == F::zero() {
            dropped = true;
            continue;
        }
        let col = eig.vectors.col(k);
        out.add_outer(F::one() / ev, &col, &col);
    }
    Ok((out, dropped))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng as _;

    fn random_symmetric(n: usize, seed: u64) -> DenseMatrix<f64> {
        let mut rng = crate::rng::rng_from_seed(seed);
        let raw = DenseMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        raw.symmetrized()
    }

    #[test]
    fn eigen_of_diagonal_matrix() {
        let a = DenseMatrix::<f64>::from_rows(&[
            vec![3.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 2.0],
        ])
        .unwrap();
        let top = symmetric_top_eigenvector(&a).unwrap();
        assert_relative_eq!(top.value, 3.0, epsilon = 1e-12);
        assert_relative_eq!(top.vector[0].abs(), 1.0, epsilon = 1e-12);
        assert!(top.vector[0] > 0.0, "sign convention");
        assert!(!top.degenerate);
    }

    #[test]
    fn eigen_identity_is_degenerate() {
        let a = DenseMatrix::<f64>::identity(4);
        let top = symmetric_top_eigenvector(&a).unwrap();
        assert_relative_eq!(top.value, 1.0, epsilon = 1e-12);
        assert_relative_eq!(norm2(&top.vector), 1.0, epsilon = 1e-12);
        assert!(top.degenerate);
    }

    #[test]
    fn eigen_reconstructs_random_symmetric() {
        for seed in 0..5u64 {
            let n = 12;
            let a = random_symmetric(n, seed);
            let eig = sym_eigen(&a).unwrap();
            // A v_k = lambda_k v_k
            for k in 0..n {
                let v = eig.vectors.col(k);
                let av = a.matvec(&v).unwrap();
                for i in 0..n {
                    assert_relative_eq!(av[i], eig.values[k] * v[i], epsilon = 1e-10);
                }
            }
            // V^T V = I
            let vtv = eig.vectors.gram();
            for i in 0..n {
                for j in 0..n {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert_relative_eq!(vtv[(i, j)], want, epsilon = 1e-10);
                }
            }
            // ascending
            for k in 1..n {
                assert!(eig.values[k] >= eig.values[k - 1]);
            }
        }
    }

    #[test]
    fn top_eigen_is_maximal_and_satisfies_definition() {
        let mut rng = crate::rng::rng_from_seed(42);
        let a = random_symmetric(5, 9);
        let top = symmetric_top_eigenvector(&a).unwrap();
        let av = a.matvec(&top.vector).unwrap();
        for i in 0..5 {
            assert_relative_eq!(av[i], top.value * top.vector[i], epsilon = 1e-10);
        }
        // Rayleigh quotient of any unit vector never exceeds the top value.
        for _ in 0..1000 {
            let mut probe: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
            normalize(&mut probe);
            let q = dot(&probe, &a.matvec(&probe).unwrap());
            assert!(q <= top.value + 1e-10);
        }
    }

    #[test]
    fn power_route_agrees_with_direct_route() {
        let a = random_symmetric(40, 3);
        let direct = symmetric_top_eigenvector(&a).unwrap();
        let power = power_top_eigen(&a).unwrap();
        assert_relative_eq!(direct.value, power.value, epsilon = 1e-9);
        assert!(dot(&direct.vector, &power.vector).abs() >= 1.0 - 1e-9);
    }

    #[test]
    fn qr_reproduces_input_and_orthogonality() {
        let mut rng = crate::rng::rng_from_seed(5);
        let a = DenseMatrix::from_fn(8, 5, |_, _| rng.gen_range(-1.0..1.0));
        let (q, r) = qr_thin(&a).unwrap();
        let qr = q.matmul(&r).unwrap();
        for i in 0..8 {
            for j in 0..5 {
                assert_relative_eq!(qr[(i, j)], a[(i, j)], epsilon = 1e-12);
            }
        }
        let qtq = q.gram();
        for i in 0..5 {
            for j in 0..5 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert_relative_eq!(qtq[(i, j)], want, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn lstsq_recovers_exact_solution() {
        let mut rng = crate::rng::rng_from_seed(8);
        let a = DenseMatrix::from_fn(10, 4, |_, _| rng.gen_range(-1.0..1.0));
        let x_true: Vec<f64> = (0..4).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let b = a.matvec(&x_true).unwrap();
        let x = lstsq_qr(&a, &b).unwrap();
        for i in 0..4 {
            assert_relative_eq!(x[i], x_true[i], epsilon = 1e-10);
        }
    }

    #[test]
    fn lu_and_cholesky_solve_agree() {
        let mut rng = crate::rng::rng_from_seed(4);
        let g = DenseMatrix::from_fn(6, 6, |_, _| rng.gen_range(-1.0..1.0));
        let spd = g.gram().add(&DenseMatrix::identity(6)).unwrap();
        let b: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x1 = solve_lu(&spd, &b).unwrap();
        let x2 = solve_cholesky(&spd, &b).unwrap();
        for i in 0..6 {
            assert_relative_eq!(x1[i], x2[i], epsilon = 1e-10);
        }
    }

    #[test]
    fn singular_lu_is_reported() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert!(matches!(solve_lu(&a, &[1.0, 1.0]), Err(Error::Singular(_))));
    }

    #[test]
    fn pinv_of_rank_deficient_gram() {
        let v = DenseMatrix::from_rows(&[vec![1.0], vec![2.0], vec![2.0]]).unwrap();
        let g = v.matmul(&v.transpose()).unwrap(); // rank 1, 3x3
        let (pinv, dropped) = pinv_sym(&g, 1e-10).unwrap();
        assert!(dropped);
        // G pinv(G) G = G
        let gpg = g.matmul(&pinv).unwrap().matmul(&g).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_relative_eq!(gpg[(i, j)], g[(i, j)], epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn fix_sign_flips_to_positive_dominant_entry() {
        let mut v = vec![0.1, -0.9, 0.2];
        fix_sign(&mut v);
        assert_relative_eq!(v[1], 0.9);
        let mut w = vec![0.5, 0.4];
        fix_sign(&mut w);
        assert_relative_eq!(w[0], 0.5);
    }
}
