//! Decompositions for semi-symmetric tensor stacks.
//!
//! The main entry point is [`tn_pca`]: a greedy semi-symmetric CP
//! decomposition computed one rank-one component at a time by a tensor
//! power method. Each component solves
//!
//! ```text
//!   maximize   X x1 (P v) x2 (P v) x3 u    s.t.  |v| = |u| = 1,
//! ```
//!
//! where `P = I - V V^T` projects out the previously extracted network
//! factors (a Gram-Schmidt scheme that keeps the columns of `V`
//! orthonormal while leaving `U` unconstrained). Both block updates are
//! closed-form: `u` is the normalized quadratic-form fiber
//! `X x1 v x2 v`, and `v` is the top eigenvector of the projected slice
//! mixture `P (X x3 u) P`. After a component converges it is removed by
//! subtraction deflation.
//!
//! [`hosvd_semisym`] and [`hooi_semisym`] implement the Tucker baselines
//! with the first two factors tied, for method comparison.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    dot, fix_sign, normalize, sym_eigen, symmetric_top_eigenvector, DenseMatrix,
};
use crate::rng::{rng_substream, Rng};
use crate::scalar::Scalar;
use crate::tensor::{SemiSymmetricTensor, Tensor3, Tensor4};

/// Options for the greedy rank-one fits.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TnPcaOpts {
    /// Relative objective-change threshold per component.
    pub tol: f64,
    /// Maximum alternations per component.
    pub max_iter: usize,
    /// Initializations per component (first from the mean slice, rest random).
    pub restarts: usize,
    /// Seed for restart initialization.
    pub seed: u64,
}

impl Default for TnPcaOpts {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iter: 500,
            restarts: 3,
            seed: 0,
        }
    }
}

/// Result of [`tn_pca`]: `X ~ sum_k d_k v_k o v_k o u_k` with orthonormal
/// network factors `V` and unit-norm, unconstrained subject factors `U`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TnDecomposition<F> {
    /// Positive scaling values, one per extracted component.
    pub d: Vec<F>,
    /// `P x K` orthonormal network factors.
    pub v: DenseMatrix<F>,
    /// `N x K` subject factors, each column unit norm.
    pub u: DenseMatrix<F>,
    /// Per-component objective values, one entry per alternation.
    pub objective_trace: Vec<Vec<F>>,
    /// Per-component flag: the projected eigenproblem had a (near-)tied top
    /// eigenvalue at the final iterate.
    pub degenerate: Vec<bool>,
    /// Per-component convergence flag (objective change under tolerance).
    pub converged: Vec<bool>,
    /// Rank originally requested; fewer components are returned when the
    /// input deflates to zero early.
    pub k_requested: usize,
}

impl<F: Scalar> TnDecomposition<F> {
    /// Decomposition with no components (reconstructs to zero).
    pub fn empty(p: usize, n: usize) -> Self {
        Self {
            d: Vec::new(),
            v: DenseMatrix::zeros(p, 0),
            u: DenseMatrix::zeros(n, 0),
            objective_trace: Vec::new(),
            degenerate: Vec::new(),
            converged: Vec::new(),
            k_requested: 0,
        }
    }

    pub fn components(&self) -> usize {
        self.d.len()
    }

    pub fn node_count(&self) -> usize {
        self.v.rows()
    }

    pub fn subject_count(&self) -> usize {
        self.u.rows()
    }

    /// First `k` columns of `(V, U)`.
    pub fn factor_prefix(&self, k: usize) -> Result<(DenseMatrix<F>, DenseMatrix<F>)> {
        if k > self.components() {
            return Err(Error::Rank {
                requested: k,
                max: self.components(),
            });
        }
        Ok((self.v.leading_cols(k), self.u.leading_cols(k)))
    }

    /// Network reconstruction for one subject: `sum_k d_k U[i,k] v_k v_k^T`.
    pub fn reconstruct_subject(&self, subject: usize) -> Result<DenseMatrix<F>> {
        let n = self.subject_count();
        if subject >= n {
            return Err(Error::IndexOutOfRange {
                index: subject,
                len: n,
            });
        }
        let p = self.node_count();
        let mut out = DenseMatrix::zeros(p, p);
        for k in 0..self.components() {
            let vk = self.v.col(k);
            out.add_outer(self.d[k] * self.u[(subject, k)], &vk, &vk);
        }
        Ok(out)
    }

    /// Full tensor reconstruction.
    pub fn reconstruct(&self) -> Tensor3<F> {
        let (p, n) = (self.node_count(), self.subject_count());
        let mut out = Tensor3::zeros(p, p, n);
        for k in 0..self.components() {
            let vk = self.v.col(k);
            let uk = self.u.col(k);
            out.subtract_rank_one(-self.d[k], &vk, &uk);
        }
        out
    }
}

/// Tucker decomposition with tied first factors:
/// `X ~ core x1 V x2 V x3 U` with `V`, `U` orthonormal.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TuckerDecomposition<F> {
    pub core: Tensor3<F>,
    /// `P x K_V`, orthonormal columns.
    pub v: DenseMatrix<F>,
    /// `N x K_U`, orthonormal columns.
    pub u: DenseMatrix<F>,
    /// For HOOI: whether the fit change dropped under tolerance.
    pub converged: bool,
    pub iterations: usize,
}

impl<F: Scalar> TuckerDecomposition<F> {
    /// `core x1 V x2 V x3 U`.
    pub fn reconstruct(&self) -> Result<Tensor3<F>> {
        self.core
            .mode_mul_mat(1, &self.v)?
            .mode_mul_mat(2, &self.v)?
            .mode_mul_mat(3, &self.u)
    }

    /// Superdiagonal magnitudes `|core[k,k,k]|` for `k < min(K_V, K_U)`,
    /// the Tucker analogue of CP scaling values.
    pub fn superdiagonal(&self) -> Vec<F> {
        let (d1, _, d3) = self.core.dims();
        (0..d1.min(d3)).map(|k| self.core[(k, k, k)].abs()).collect()
    }
}

/// 4-mode variant: `X ~ sum_k d_k v_k o v_k o w_k o u_k` with orthogonality
/// on `V` only; `W` (features) and `U` (subjects) have unit-norm columns.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Tn4Decomposition<F> {
    pub d: Vec<F>,
    pub v: DenseMatrix<F>,
    pub w: DenseMatrix<F>,
    pub u: DenseMatrix<F>,
    pub objective_trace: Vec<Vec<F>>,
    pub converged: Vec<bool>,
    pub k_requested: usize,
}

/// Outcome of a single rank-one fit.
#[derive(Debug, Clone)]
pub struct RankOneFit<F> {
    pub d: F,
    pub v: Vec<F>,
    pub u: Vec<F>,
    /// Objective value after each alternation; nondecreasing.
    pub trace: Vec<F>,
    pub converged: bool,
    pub degenerate: bool,
}

// ---------------------------------------------------------------------------
// TN-PCA
// ---------------------------------------------------------------------------

/// Greedy semi-symmetric CP decomposition of rank `k`.
///
/// Components are extracted one at a time (best of `opts.restarts`
/// initializations each) and removed by subtraction deflation. Extraction
/// stops early if the working tensor deflates to numerical zero; the result
/// then carries fewer than `k` components.
pub fn tn_pca<F: Scalar>(
    x: &SemiSymmetricTensor<F>,
    k: usize,
    opts: &TnPcaOpts,
) -> Result<TnDecomposition<F>> {
    let p = x.node_count();
    let n = x.slice_count();
    if k < 1 || k > p {
        return Err(Error::Rank {
            requested: k,
            max: p,
        });
    }
    let mut work = x.tensor().clone();
    let scale = work.frobenius_norm();
    let zero_thresh = scale * F::epsilon() * F::of(32.0);

    let mut dec = TnDecomposition::empty(p, n);
    dec.k_requested = k;
    let mut v_mat = DenseMatrix::zeros(p, 0);

    for comp in 0..k {
        let mut best: Option<RankOneFit<F>> = None;
        for restart in 0..opts.restarts.max(1) {
            let mut rng = rng_substream(opts.seed, &[comp as u64, restart as u64]);
            let init = if restart == 0 {
                mean_slice_init(&work, &v_mat).unwrap_or_else(|| random_unit(p, &mut rng))
            } else {
                random_unit(p, &mut rng)
            };
            let fit = rank_one_step(&work, &v_mat, &init, opts, &mut rng)?;
            if best.as_ref().map_or(true, |b| fit.d > b.d) {
                best = Some(fit);
            }
        }
        let fit = best.expect("at least one restart ran");
        if fit.d <= zero_thresh {
            break; // fully deflated: do not emit noise components
        }

        work.subtract_rank_one(fit.d, &fit.v, &fit.u);
        let next = dec.components() + 1;
        let mut v_new = DenseMatrix::zeros(p, next);
        let mut u_new = DenseMatrix::zeros(n, next);
        for c in 0..next - 1 {
            v_new.set_col(c, &dec.v.col(c));
            u_new.set_col(c, &dec.u.col(c));
        }
        v_new.set_col(next - 1, &fit.v);
        u_new.set_col(next - 1, &fit.u);
        dec.v = v_new;
        dec.u = u_new;
        v_mat = dec.v.clone();
        dec.d.push(fit.d);
        dec.objective_trace.push(fit.trace);
        dec.degenerate.push(fit.degenerate);
        dec.converged.push(fit.converged);
    }
    Ok(dec)
}

/// Single rank-one fit against `xhat` with previously extracted factors
/// `v_prev` projected out.
///
/// Alternates the two closed-form updates until the relative objective
/// change falls under `opts.tol` or `opts.max_iter` alternations pass. A
/// zero quadratic-form fiber triggers reinitialization from a fresh random
/// vector; after `opts.restarts` such failures the fit reports `d = 0`.
pub fn rank_one_step<F: Scalar>(
    xhat: &Tensor3<F>,
    v_prev: &DenseMatrix<F>,
    init: &[F],
    opts: &TnPcaOpts,
    rng: &mut Rng,
) -> Result<RankOneFit<F>> {
    let (p, p2, _) = xhat.dims();
    if p != p2 {
        return Err(Error::Shape(format!(
            "rank-one step needs square frontal slices, got {:?}",
            xhat.dims()
        )));
    }
    if init.len() != p {
        return Err(Error::Shape(format!(
            "init length {} vs node count {p}",
            init.len()
        )));
    }
    let scale = xhat.frobenius_norm();
    let fiber_thresh = scale * F::epsilon() * F::of(32.0);

    let mut v = init.to_vec();
    let mut failures = 0usize;
    loop {
        if project_out(&mut v, v_prev) <= F::of(1e-8) {
            // Init lies (numerically) inside the extracted subspace.
            failures += 1;
            if failures > opts.restarts {
                return Ok(zero_fit(p, xhat.dims().2));
            }
            v = random_unit(p, rng);
            continue;
        }

        match alternate(xhat, v_prev, &v, opts, fiber_thresh)? {
            AlternationOutcome::Fit(fit) => return Ok(fit),
            AlternationOutcome::ZeroFiber => {
                failures += 1;
                if failures > opts.restarts {
                    return Ok(zero_fit(p, xhat.dims().2));
                }
                v = random_unit(p, rng);
            }
        }
    }
}

enum AlternationOutcome<F> {
    Fit(RankOneFit<F>),
    ZeroFiber,
}

fn alternate<F: Scalar>(
    xhat: &Tensor3<F>,
    v_prev: &DenseMatrix<F>,
    v0: &[F],
    opts: &TnPcaOpts,
    fiber_thresh: F,
) -> Result<AlternationOutcome<F>> {
    let tol = F::of(opts.tol);
    let mut v = v0.to_vec();
    let mut u = vec![F::zero(); xhat.dims().2];
    let mut trace: Vec<F> = Vec::new();
    let mut degenerate = false;
    let mut converged = false;

    for _ in 0..opts.max_iter {
        // u-update: normalized quadratic-form fiber.
        let fiber = xhat.contract_vv(&v)?;
        let mut u_new = fiber;
        let norm = normalize(&mut u_new);
        if norm <= fiber_thresh {
            return Ok(AlternationOutcome::ZeroFiber);
        }
        u = u_new;

        // v-update: top eigenvector of the projected slice mixture.
        let mixed = xhat.mode_mul_vec(3, &u)?;
        let projected = project_matrix(&mixed, v_prev);
        let top = symmetric_top_eigenvector(&projected)?;
        degenerate = top.degenerate;
        let mut v_new = top.vector;
        if project_out(&mut v_new, v_prev) <= F::of(1e-8) {
            // Leading eigenspace collapsed into the extracted subspace.
            return Ok(AlternationOutcome::ZeroFiber);
        }
        v = v_new;

        let objective = xhat.contract_vvu(&v, &u)?;
        let improved = trace
            .last()
            .map_or(true, |&prev| (objective - prev).abs() > tol * objective.abs());
        trace.push(objective);
        if !improved {
            converged = true;
            break;
        }
    }

    let mut d = xhat.contract_vvu(&v, &u)?;
    if d < F::zero() {
        for x in u.iter_mut() {
            *x = -*x;
        }
        d = -d;
    }
    fix_sign(&mut v);
    Ok(AlternationOutcome::Fit(RankOneFit {
        d,
        v,
        u,
        trace,
        converged,
        degenerate,
    }))
}

fn zero_fit<F: Scalar>(p: usize, n: usize) -> RankOneFit<F> {
    RankOneFit {
        d: F::zero(),
        v: vec![F::zero(); p],
        u: vec![F::zero(); n],
        trace: Vec::new(),
        converged: false,
        degenerate: false,
    }
}

/// Removes the `v_prev` components from `v` and renormalizes; returns the
/// norm of the projection before normalization.
fn project_out<F: Scalar>(v: &mut Vec<F>, v_prev: &DenseMatrix<F>) -> F {
    if v_prev.cols() > 0 {
        // Two classical Gram-Schmidt passes keep orthogonality at 1e-14.
        for _ in 0..2 {
            let coeffs = v_prev.t_matvec(v).expect("prefix shapes agree");
            let corr = v_prev.matvec(&coeffs).expect("prefix shapes agree");
            for (vi, ci) in v.iter_mut().zip(corr) {
                *vi = *vi - ci;
            }
        }
    }
    normalize(v)
}

/// `P M P` with `P = I - v_prev v_prev^T`, computed without forming `P`.
fn project_matrix<F: Scalar>(m: &DenseMatrix<F>, v_prev: &DenseMatrix<F>) -> DenseMatrix<F> {
    if v_prev.cols() == 0 {
        return m.symmetrized();
    }
    // P M P = M - Q(Q^T M) - (M Q)Q^T + Q(Q^T M Q)Q^T  with Q = v_prev
    let qtm = v_prev.t_matmul(m).expect("shapes agree"); // K x P
    let qtmq = qtm.matmul(v_prev).expect("shapes agree"); // K x K
    let mut out = m.clone();
    // out -= Q * qtm
    let q_qtm = v_prev.matmul(&qtm).expect("shapes agree");
    out = out.sub(&q_qtm).expect("shapes agree");
    // out -= (qtm^T) * Q^T   (= M Q Q^T)
    let mq_qt = qtm.transpose().matmul(&v_prev.transpose()).expect("shapes agree");
    out = out.sub(&mq_qt).expect("shapes agree");
    // out += Q * qtmq * Q^T
    let q_qtmq = v_prev.matmul(&qtmq).expect("shapes agree");
    let add = q_qtmq.matmul(&v_prev.transpose()).expect("shapes agree");
    out = out.add(&add).expect("shapes agree");
    out.symmetrized()
}

fn mean_slice_init<F: Scalar>(x: &Tensor3<F>, v_prev: &DenseMatrix<F>) -> Option<Vec<F>> {
    let mean = x.mean_slice();
    let projected = project_matrix(&mean, v_prev);
    let top = symmetric_top_eigenvector(&projected).ok()?;
    let mut v = top.vector;
    let norm = normalize(&mut v);
    (norm > F::zero()).then_some(v)
}

fn random_unit<F: Scalar>(len: usize, rng: &mut Rng) -> Vec<F> {
    use rand_distr::{Distribution, StandardNormal};
    loop {
        let mut v: Vec<F> = (0..len)
            .map(|_| F::of(<StandardNormal as Distribution<f64>>::sample(
                &StandardNormal,
                rng,
            )))
            .collect();
        if normalize(&mut v) > F::zero() {
            return v;
        }
    }
}

// ---------------------------------------------------------------------------
// Tucker baselines
// ---------------------------------------------------------------------------

/// Semi-symmetric HOSVD: `V` from the top `k_v` eigenvectors of the mode-1
/// Gram matrix (mode 2 is identical by symmetry), `U` from the top `k_u`
/// eigenvectors of the mode-3 Gram, core by projection.
pub fn hosvd_semisym<F: Scalar>(
    x: &SemiSymmetricTensor<F>,
    k_v: usize,
    k_u: usize,
) -> Result<TuckerDecomposition<F>> {
    let p = x.node_count();
    let n = x.slice_count();
    check_tucker_ranks(p, n, k_v, k_u)?;

    let v = top_eigvecs(&mode1_gram(x.tensor()), k_v)?;
    let u = top_eigvecs(&mode3_gram(x.tensor()), k_u)?;
    let core = x
        .tensor()
        .mode_mul_mat(1, &v.transpose())?
        .mode_mul_mat(2, &v.transpose())?
        .mode_mul_mat(3, &u.transpose())?;
    Ok(TuckerDecomposition {
        core,
        v,
        u,
        converged: true,
        iterations: 0,
    })
}

/// Options for [`hooi_semisym`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HooiOpts {
    /// Relative fit-change threshold.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for HooiOpts {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iter: 100,
        }
    }
}

/// Higher-order orthogonal iteration for the tied-factor Tucker model.
///
/// Initialized from HOSVD; each sweep recomputes `V` from the mode-1 Gram of
/// `X x3 U^T` (one-sided update for the tied modes) and `U` from the mode-3
/// Gram of `X x1 V^T x2 V^T`. The best factors seen are returned, so the
/// fit never drops below the HOSVD initialization.
pub fn hooi_semisym<F: Scalar>(
    x: &SemiSymmetricTensor<F>,
    k_v: usize,
    k_u: usize,
    opts: &HooiOpts,
) -> Result<TuckerDecomposition<F>> {
    let init = hosvd_semisym(x, k_v, k_u)?;
    let tol = F::of(opts.tol);

    let mut v = init.v;
    let mut u = init.u;
    let mut best_fit = init.core.frobenius_norm();
    let mut best = (v.clone(), u.clone(), init.core);
    let mut prev_fit = best_fit;
    let mut converged = false;
    let mut iterations = 0;

    for it in 0..opts.max_iter {
        iterations = it + 1;
        // V step: one-sided tied update.
        let y = x.tensor().mode_mul_mat(3, &u.transpose())?;
        v = top_eigvecs(&mode1_gram(&y), k_v)?;
        // U step.
        let z = x
            .tensor()
            .mode_mul_mat(1, &v.transpose())?
            .mode_mul_mat(2, &v.transpose())?;
        u = top_eigvecs(&mode3_gram(&z), k_u)?;
        let core = z.mode_mul_mat(3, &u.transpose())?;
        let fit = core.frobenius_norm();

        if fit > best_fit {
            best = (v.clone(), u.clone(), core);
            best_fit = fit;
        }
        let change = (fit - prev_fit).abs();
        prev_fit = fit;
        if change <= tol * fit.max(F::min_positive_value()) {
            converged = true;
            break;
        }
    }

    Ok(TuckerDecomposition {
        core: best.2,
        v: best.0,
        u: best.1,
        converged,
        iterations,
    })
}

fn check_tucker_ranks(p: usize, n: usize, k_v: usize, k_u: usize) -> Result<()> {
    if k_v < 1 || k_v > p {
        return Err(Error::Rank {
            requested: k_v,
            max: p,
        });
    }
    if k_u < 1 || k_u > n {
        return Err(Error::Rank {
            requested: k_u,
            max: n,
        });
    }
    Ok(())
}

/// Mode-1 Gram `X_(1) X_(1)^T`, accumulated slice by slice.
fn mode1_gram<F: Scalar>(x: &Tensor3<F>) -> DenseMatrix<F> {
    let (p, _, n) = x.dims();
    let mut g = DenseMatrix::zeros(p, p);
    for s in 0..n {
        let m = x.slice_matrix(s);
        let mm = m.matmul(&m.transpose()).expect("square slices");
        g = g.add(&mm).expect("same shape");
    }
    g
}

/// Mode-3 Gram `X_(3) X_(3)^T`: pairwise slice inner products.
fn mode3_gram<F: Scalar>(x: &Tensor3<F>) -> DenseMatrix<F> {
    let (d1, d2, n) = x.dims();
    let len = d1 * d2;
    let mut g = DenseMatrix::zeros(n, n);
    for a in 0..n {
        let sa = x.slice_data(a);
        for b in a..n {
            let sb = x.slice_data(b);
            let mut acc = F::zero();
            for i in 0..len {
                acc = acc + sa[i] * sb[i];
            }
            g[(a, b)] = acc;
            g[(b, a)] = acc;
        }
    }
    g
}

/// Top `k` eigenvectors (descending eigenvalue) of a symmetric PSD matrix,
/// sign-fixed columns.
fn top_eigvecs<F: Scalar>(g: &DenseMatrix<F>, k: usize) -> Result<DenseMatrix<F>> {
    let eig = sym_eigen(g)?;
    let n = g.rows();
    let mut out = DenseMatrix::zeros(n, k);
    for c in 0..k {
        let mut col = eig.vectors.col(n - 1 - c);
        fix_sign(&mut col);
        out.set_col(c, &col);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// 4-mode extension
// ---------------------------------------------------------------------------

/// Greedy rank-one decomposition of a joint-feature stack
/// `P x P x M x N`: adds one feature factor `w_k` to each outer product.
/// Orthogonality is imposed on `V` only; all non-`v` updates are normalized
/// contractions and the `v` update is the projected top eigenvector.
pub fn tn_pca_4mode<F: Scalar>(
    x4: &Tensor4<F>,
    k: usize,
    opts: &TnPcaOpts,
) -> Result<Tn4Decomposition<F>> {
    let (p, _, m, n) = x4.dims();
    if k < 1 || k > p {
        return Err(Error::Rank {
            requested: k,
            max: p,
        });
    }
    let mut work = x4.clone();
    let scale = work.frobenius_norm();
    let zero_thresh = scale * F::epsilon() * F::of(32.0);
    let tol = F::of(opts.tol);

    let mut dec = Tn4Decomposition {
        d: Vec::new(),
        v: DenseMatrix::zeros(p, 0),
        w: DenseMatrix::zeros(m, 0),
        u: DenseMatrix::zeros(n, 0),
        objective_trace: Vec::new(),
        converged: Vec::new(),
        k_requested: k,
    };

    for comp in 0..k {
        let v_prev = dec.v.clone();
        let mut best: Option<(F, Vec<F>, Vec<F>, Vec<F>, Vec<F>, bool)> = None;

        for restart in 0..opts.restarts.max(1) {
            let mut rng = rng_substream(opts.seed, &[0x4d0de, comp as u64, restart as u64]);
            let mut v = if restart == 0 {
                mean_feature_slice_init(&work, &v_prev).unwrap_or_else(|| random_unit(p, &mut rng))
            } else {
                random_unit(p, &mut rng)
            };
            if project_out(&mut v, &v_prev) <= F::of(1e-8) {
                v = random_unit(p, &mut rng);
                if project_out(&mut v, &v_prev) <= F::of(1e-8) {
                    continue;
                }
            }
            let mut w = vec![F::one() / F::of(m as f64).sqrt(); m];
            let mut u;
            let mut trace: Vec<F> = Vec::new();
            let mut converged = false;
            let mut dead = false;

            for _ in 0..opts.max_iter {
                // u-update from (v, w), then w-update from (v, u).
                let vv = work.contract_vv(&v)?; // M x N
                let mut u_new = vv.t_matvec(&w)?;
                if normalize(&mut u_new) <= zero_thresh {
                    dead = true;
                    break;
                }
                u = u_new;
                let mut w_new = vv.matvec(&u)?;
                if normalize(&mut w_new) <= zero_thresh {
                    dead = true;
                    break;
                }
                w = w_new;

                // v-update: projected top eigenvector of X x3 w x4 u.
                let mixed = work.contract_wu(&w, &u)?;
                let projected = project_matrix(&mixed, &v_prev);
                let top = symmetric_top_eigenvector(&projected)?;
                let mut v_new = top.vector;
                if project_out(&mut v_new, &v_prev) <= F::of(1e-8) {
                    dead = true;
                    break;
                }
                v = v_new;

                let objective = work.contract_all(&v, &w, &u)?;
                let improved = trace
                    .last()
                    .map_or(true, |&prev| (objective - prev).abs() > tol * objective.abs());
                trace.push(objective);
                if !improved {
                    converged = true;
                    break;
                }
            }
            if dead {
                continue;
            }

            // Final factors with deterministic signs: d > 0 pins u, the
            // (w, u) pair flips jointly.
            let vv = work.contract_vv(&v)?;
            let mut u_fin = vv.t_matvec(&w)?;
            if normalize(&mut u_fin) <= zero_thresh {
                continue;
            }
            let mut d = work.contract_all(&v, &w, &u_fin)?;
            let mut u = u_fin;
            if d < F::zero() {
                for x in u.iter_mut() {
                    *x = -*x;
                }
                d = -d;
            }
            let mut w_fixed = w.clone();
            fix_sign(&mut w_fixed);
            if dot(&w_fixed, &w) < F::zero() {
                for x in u.iter_mut() {
                    *x = -*x;
                }
            }
            fix_sign(&mut v);
            if best.as_ref().map_or(true, |b| d > b.0) {
                best = Some((d, v, w_fixed, u, trace, converged));
            }
        }

        let Some((d, v, w, u, trace, converged)) = best else {
            break;
        };
        if d <= zero_thresh {
            break;
        }
        work.subtract_rank_one(d, &v, &w, &u);

        let next = dec.d.len() + 1;
        let mut v_new = DenseMatrix::zeros(p, next);
        let mut w_new = DenseMatrix::zeros(m, next);
        let mut u_new = DenseMatrix::zeros(n, next);
        for c in 0..next - 1 {
            v_new.set_col(c, &dec.v.col(c));
            w_new.set_col(c, &dec.w.col(c));
            u_new.set_col(c, &dec.u.col(c));
        }
        v_new.set_col(next - 1, &v);
        w_new.set_col(next - 1, &w);
        u_new.set_col(next - 1, &u);
        dec.v = v_new;
        dec.w = w_new;
        dec.u = u_new;
        dec.d.push(d);
        dec.objective_trace.push(trace);
        dec.converged.push(converged);
    }
    Ok(dec)
}

fn mean_feature_slice_init<F: Scalar>(
    x4: &Tensor4<F>,
    v_prev: &DenseMatrix<F>,
) -> Option<Vec<F>> {
    let (_, _, m, n) = x4.dims();
    let w = vec![F::one() / F::of(m as f64); m];
    let u = vec![F::one() / F::of(n as f64); n];
    let mean = x4.contract_wu(&w, &u).ok()?;
    let projected = project_matrix(&mean, v_prev);
    let top = symmetric_top_eigenvector(&projected).ok()?;
    let mut v = top.vector;
    (normalize(&mut v) > F::zero()).then_some(v)
}
