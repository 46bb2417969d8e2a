//! Statistical layer on top of the embedding: extreme-group construction,
//! kernel two-sample testing with FDR control, trait directions (CCA and
//! LDA closed forms) with their edge-space back-mapping, and the principal
//! network summary.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decompose::TnDecomposition;
use crate::error::{Error, Result};
use crate::linalg::{dot, lstsq_qr, norm2, normalize, solve_cholesky, solve_lu, DenseMatrix};
use crate::rng::Rng;
use crate::scalar::Scalar;

/// Subject PC scores (`N x K`) together with the decomposition pieces
/// `(d, V)` they came from, so directions can be mapped back to edge space.
/// Row `i` reconstructs that subject's network as
/// `sum_k d_k * scores[i,k] * v_k v_k^T`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EmbeddingMatrix<F> {
    pub scores: DenseMatrix<F>,
    pub d: Vec<F>,
    pub v: DenseMatrix<F>,
}

impl<F: Scalar> EmbeddingMatrix<F> {
    pub fn from_decomposition(dec: &TnDecomposition<F>) -> Self {
        Self {
            scores: dec.u.clone(),
            d: dec.d.clone(),
            v: dec.v.clone(),
        }
    }

    pub fn new(scores: DenseMatrix<F>, d: Vec<F>, v: DenseMatrix<F>) -> Result<Self> {
        let k = scores.cols();
        if d.len() != k || v.cols() != k {
            return Err(Error::Shape(format!(
                "embedding with {k} score columns but {} scales and {} network factors",
                d.len(),
                v.cols()
            )));
        }
        Ok(Self { scores, d, v })
    }

    pub fn subjects(&self) -> usize {
        self.scores.rows()
    }

    pub fn components(&self) -> usize {
        self.scores.cols()
    }

    /// Projection scores `<scores[i,:], w>` for every subject.
    pub fn project(&self, w: &[F]) -> Result<Vec<F>> {
        self.scores.matvec(w)
    }
}

/// Per-subject trait values; `None` marks missing entries, which are
/// excluded pairwise from every computation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraitVector<F> {
    pub values: Vec<Option<F>>,
    pub kind: TraitKind,
    pub name: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraitKind {
    Continuous,
    Ordinal,
    Categorical,
}

impl std::str::FromStr for TraitKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "continuous" => Ok(Self::Continuous),
            "ordinal" => Ok(Self::Ordinal),
            "categorical" => Ok(Self::Categorical),
            other => Err(Error::Config(format!("unknown trait kind '{other}'"))),
        }
    }
}

impl<F: Scalar> TraitVector<F> {
    pub fn new(values: Vec<Option<F>>, kind: TraitKind, name: impl Into<String>) -> Result<Self> {
        if values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("trait values".into()));
        }
        Ok(Self {
            values,
            kind,
            name: name.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Indices with an observed value.
    pub fn present_indices(&self) -> Vec<usize> {
        (0..self.values.len())
            .filter(|&i| self.values[i].is_some())
            .collect()
    }
}

/// Mean, covariance (unbiased), and size of one group's embedded rows.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupEmbedding<F> {
    pub mean: Vec<F>,
    pub covariance: DenseMatrix<F>,
    pub count: usize,
}

impl<F: Scalar> GroupEmbedding<F> {
    pub fn from_rows(scores: &DenseMatrix<F>, indices: &[usize]) -> Result<Self> {
        let k = scores.cols();
        let count = indices.len();
        if count < 2 {
            return Err(Error::InsufficientData(format!(
                "group needs at least 2 subjects, got {count}"
            )));
        }
        for &i in indices {
            if i >= scores.rows() {
                return Err(Error::IndexOutOfRange {
                    index: i,
                    len: scores.rows(),
                });
            }
        }
        let nf = F::of(count as f64);
        let mut mean = vec![F::zero(); k];
        for &i in indices {
            for (m, &x) in mean.iter_mut().zip(scores.row(i)) {
                *m = *m + x;
            }
        }
        for m in mean.iter_mut() {
            *m = *m / nf;
        }
        let mut cov = DenseMatrix::zeros(k, k);
        for &i in indices {
            let row = scores.row(i);
            let centered: Vec<F> = row.iter().zip(&mean).map(|(&x, &m)| x - m).collect();
            cov.add_outer(F::one(), &centered, &centered);
        }
        let cov = cov.scale(F::one() / (nf - F::one()));
        Ok(Self {
            mean,
            covariance: cov,
            count,
        })
    }
}

/// Result of an MMD permutation test.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TestResult<F> {
    /// Biased (V-statistic) squared maximum mean discrepancy.
    pub statistic: F,
    /// `(1 + #{permuted >= observed}) / (1 + permutations)`.
    pub p_value: F,
    pub permutations: usize,
    /// Gaussian kernel width (median pairwise distance over the pool).
    pub bandwidth: F,
}

/// Which closed form produced a [`Direction`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DirectionMethod {
    Cca,
    Lda,
}

/// A unit direction in embedding space with its scale and edge-space image.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Direction<F> {
    /// Unit vector in embedding space.
    pub w: Vec<F>,
    /// Norm of the group mean difference in embedding space.
    pub s: F,
    /// `s * sum_k d_k w[k] v_k v_k^T`, symmetric `P x P`.
    pub delta_net: DenseMatrix<F>,
    pub trait_name: String,
    pub method: DirectionMethod,
    /// For LDA: classification cut at the midpoint of projected group means.
    pub lda_threshold: Option<F>,
}

impl<F: Scalar> Direction<F> {
    /// Inner product of a subject's score row with the direction.
    pub fn project(&self, row: &[F]) -> Result<F> {
        project_onto(&self.w, row)
    }
}

// ---------------------------------------------------------------------------
// Groups and two-sample testing
// ---------------------------------------------------------------------------

/// Bottom-`n` and top-`n` subjects by trait value. Ties at either boundary
/// are resolved by uniform random selection; the groups never overlap.
pub fn extreme_groups<F: Scalar>(
    trait_: &TraitVector<F>,
    n_per_group: usize,
    rng: &mut Rng,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if n_per_group == 0 {
        return Err(Error::Config("n_per_group must be positive".into()));
    }
    let mut present: Vec<(usize, F)> = trait_
        .values
        .iter()
        .enumerate()
        .filter_map(|(i, v)| v.map(|x| (i, x)))
        .collect();
    if present.len() < 2 * n_per_group {
        return Err(Error::InsufficientData(format!(
            "need {} observed values for two groups of {n_per_group}, have {}",
            2 * n_per_group,
            present.len()
        )));
    }
    present.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
    let len = present.len();
    let low_cut = present[n_per_group - 1].1;
    let high_cut = present[len - n_per_group].1;

    let mut low: Vec<usize> = present
        .iter()
        .filter(|(_, v)| *v < low_cut)
        .map(|(i, _)| *i)
        .collect();
    let mut low_ties: Vec<usize> = present
        .iter()
        .filter(|(_, v)| *v == low_cut)
        .map(|(i, _)| *i)
        .collect();
    low_ties.shuffle(rng);
    low.extend(low_ties.iter().take(n_per_group - low.len()).copied());

    let mut high: Vec<usize> = present
        .iter()
        .filter(|(_, v)| *v > high_cut)
        .map(|(i, _)| *i)
        .collect();
    let mut high_ties: Vec<usize> = present
        .iter()
        .filter(|(i, v)| *v == high_cut && !low.contains(i))
        .map(|(i, _)| *i)
        .collect();
    high_ties.shuffle(rng);
    high.extend(high_ties.iter().take(n_per_group - high.len()).copied());

    low.sort_unstable();
    high.sort_unstable();
    Ok((low, high))
}

/// Two-sample MMD^2 permutation test with a Gaussian RBF kernel.
///
/// Biased (V-statistic) estimator; kernel width from the median pairwise
/// distance over the pooled sample; p-value by label permutation with
/// add-one smoothing. The pooled sample is put in a canonical order first,
/// so the test is symmetric in its arguments.
pub fn mmd_test<F: Scalar>(
    a: &DenseMatrix<F>,
    b: &DenseMatrix<F>,
    permutations: usize,
    rng: &mut Rng,
) -> Result<TestResult<F>> {
    let (m, n) = (a.rows(), b.rows());
    if m < 2 || n < 2 {
        return Err(Error::InsufficientData(format!(
            "MMD needs at least 2 rows per group, got {m} and {n}"
        )));
    }
    if a.cols() != b.cols() {
        return Err(Error::Shape(format!(
            "MMD groups with {} vs {} columns",
            a.cols(),
            b.cols()
        )));
    }
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::NonFinite("MMD input rows".into()));
    }

    // Canonical pool: rows sorted lexicographically, labels carried along.
    let total = m + n;
    let mut pool: Vec<(&[F], bool)> = (0..m)
        .map(|i| (a.row(i), true))
        .chain((0..n).map(|i| (b.row(i), false)))
        .collect();
    pool.sort_by(|x, y| {
        for (p, q) in x.0.iter().zip(y.0) {
            match p.partial_cmp(q) {
                Some(std::cmp::Ordering::Equal) | None => continue,
                Some(ord) => return ord,
            }
        }
        std::cmp::Ordering::Equal
    });
    let labels: Vec<bool> = pool.iter().map(|(_, l)| *l).collect();

    // Bandwidth: median pairwise distance (mean of positives as fallback).
    let mut dists = Vec::with_capacity(total * (total - 1) / 2);
    for i in 0..total {
        for j in (i + 1)..total {
            let mut acc = F::zero();
            for (&x, &y) in pool[i].0.iter().zip(pool[j].0) {
                acc = acc + (x - y) * (x - y);
            }
            dists.push(acc.sqrt());
        }
    }
    let mut sorted = dists.clone();
    sorted.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    let mut bandwidth = if sorted.len() % 2 == 1 {
        sorted[sorted.len() / 2]
    } else {
        (sorted[sorted.len() / 2 - 1] + sorted[sorted.len() / 2]) * F::of(0.5)
    };
    if bandwidth <= F::zero() {
        let positives: Vec<F> = sorted.iter().copied().filter(|&d| d > F::zero()).collect();
        if positives.is_empty() {
            // Every point identical: no discrepancy by definition.
            return Ok(TestResult {
                statistic: F::zero(),
                p_value: F::one(),
                permutations,
                bandwidth: F::zero(),
            });
        }
        bandwidth = positives.iter().copied().sum::<F>() / F::of(positives.len() as f64);
    }

    // Kernel matrix on the pool.
    let denom = F::of(2.0) * bandwidth * bandwidth;
    let mut kernel = DenseMatrix::zeros(total, total);
    let mut idx = 0;
    for i in 0..total {
        kernel[(i, i)] = F::one();
        for j in (i + 1)..total {
            let kij = (-dists[idx] * dists[idx] / denom).exp();
            kernel[(i, j)] = kij;
            kernel[(j, i)] = kij;
            idx += 1;
        }
    }

    let observed = mmd_statistic(&kernel, &labels, m, n);

    // Permutation labels are drawn sequentially (reproducible stream), the
    // statistics evaluate in parallel.
    let mut permuted_labels = Vec::with_capacity(permutations);
    let mut work = labels.clone();
    for _ in 0..permutations {
        work.shuffle(rng);
        permuted_labels.push(work.clone());
    }
    let exceed = permuted_labels
        .par_iter()
        .filter(|perm| mmd_statistic(&kernel, perm, m, n) >= observed)
        .count();

    Ok(TestResult {
        statistic: observed,
        p_value: F::of((1 + exceed) as f64) / F::of((1 + permutations) as f64),
        permutations,
        bandwidth,
    })
}

fn mmd_statistic<F: Scalar>(kernel: &DenseMatrix<F>, labels: &[bool], m: usize, n: usize) -> F {
    let mut saa = F::zero();
    let mut sbb = F::zero();
    let mut sab = F::zero();
    let total = labels.len();
    for i in 0..total {
        let krow = kernel.row(i);
        let li = labels[i];
        for (j, &lj) in labels.iter().enumerate() {
            let k = krow[j];
            match (li, lj) {
                (true, true) => saa = saa + k,
                (false, false) => sbb = sbb + k,
                _ => sab = sab + k,
            }
        }
    }
    let mf = F::of(m as f64);
    let nf = F::of(n as f64);
    // sab accumulated both (A,B) and (B,A) ordered pairs, i.e. twice the
    // cross sum, which absorbs the factor 2 of the estimator.
    saa / (mf * mf) + sbb / (nf * nf) - sab / (mf * nf)
}

/// Benjamini-Hochberg step-up decision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FdrOutcome<F> {
    /// Rejection flag per input p-value (input order).
    pub rejected: Vec<bool>,
    /// Largest rejected p-value, if any rejection happened.
    pub threshold: Option<F>,
}

/// Standard step-up rule: with sorted p-values, find the largest rank `i`
/// with `p_(i) <= alpha * i / m` and reject every smaller-or-equal rank.
pub fn fdr_bh<F: Scalar>(p_values: &[F], alpha: F) -> Result<FdrOutcome<F>> {
    if p_values.is_empty() {
        return Ok(FdrOutcome {
            rejected: Vec::new(),
            threshold: None,
        });
    }
    for &p in p_values {
        if !(p >= F::zero() && p <= F::one()) {
            return Err(Error::Config(format!("p-value {p} outside [0, 1]")));
        }
    }
    let m = p_values.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| {
        p_values[i]
            .partial_cmp(&p_values[j])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mf = F::of(m as f64);
    let mut threshold = None;
    for (rank0, &i) in order.iter().enumerate().rev() {
        let rank = F::of((rank0 + 1) as f64);
        if p_values[i] <= alpha * rank / mf {
            threshold = Some(p_values[i]);
            break;
        }
    }
    let rejected = match threshold {
        Some(t) => p_values.iter().map(|&p| p <= t).collect(),
        None => vec![false; m],
    };
    Ok(FdrOutcome {
        rejected,
        threshold,
    })
}

// ---------------------------------------------------------------------------
// Trait directions
// ---------------------------------------------------------------------------

/// Ridge policy for the LDA pooled covariance.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub enum LdaRidge<F> {
    /// `1e-6 * trace(S0 + S1) / K`, always added.
    Auto,
    Fixed(F),
}

/// CCA direction for a continuous or ordinal trait: the closed-form
/// maximizer `w ∝ U_K^T Y` of the covariance between trait scores and
/// projection scores, after centering (and optional residualization of `Y`
/// on the covariates). The scale `s` comes from the extreme groups of the
/// same trait.
pub fn cca_direction<F: Scalar>(
    emb: &EmbeddingMatrix<F>,
    trait_: &TraitVector<F>,
    covariates: Option<&DenseMatrix<F>>,
    n_per_group: usize,
    rng: &mut Rng,
) -> Result<Direction<F>> {
    if trait_.kind == TraitKind::Categorical {
        return Err(Error::Config(
            "CCA direction needs a continuous or ordinal trait; use LDA for categorical".into(),
        ));
    }
    if trait_.len() != emb.subjects() {
        return Err(Error::Shape(format!(
            "trait has {} entries for {} subjects",
            trait_.len(),
            emb.subjects()
        )));
    }
    let rows = trait_.present_indices();
    let k = emb.components();
    if rows.len() < k + 2 {
        return Err(Error::InsufficientData(format!(
            "CCA needs at least K + 2 = {} observed rows, have {}",
            k + 2,
            rows.len()
        )));
    }
    let y_raw: Vec<F> = rows.iter().map(|&i| trait_.values[i].unwrap()).collect();
    let y_scale = norm2(&y_raw);

    // Residualize on [1 | covariates] (confounders are regressed out of the
    // trait only), or plain centering when no covariates are given.
    let y = match covariates {
        Some(cov) => {
            if cov.rows() != emb.subjects() {
                return Err(Error::Shape(format!(
                    "covariates have {} rows for {} subjects",
                    cov.rows(),
                    emb.subjects()
                )));
            }
            let design = DenseMatrix::from_fn(rows.len(), cov.cols() + 1, |r, c| {
                if c == 0 {
                    F::one()
                } else {
                    cov[(rows[r], c - 1)]
                }
            });
            let beta = lstsq_qr(&design, &y_raw)?;
            let fitted = design.matvec(&beta)?;
            y_raw
                .iter()
                .zip(&fitted)
                .map(|(&y, &f)| y - f)
                .collect::<Vec<F>>()
        }
        None => {
            let mean = y_raw.iter().copied().sum::<F>() / F::of(rows.len() as f64);
            y_raw.iter().map(|&v| v - mean).collect()
        }
    };
    if norm2(&y) <= F::of(1e-12) * y_scale.max(F::one()) {
        return Err(Error::UndefinedDirection(
            "trait is constant or fully explained by the covariates".into(),
        ));
    }

    // Center the used score rows columnwise, then w = normalize(U^T y).
    let nf = F::of(rows.len() as f64);
    let mut col_means = vec![F::zero(); k];
    for &i in &rows {
        for (m, &x) in col_means.iter_mut().zip(emb.scores.row(i)) {
            *m = *m + x;
        }
    }
    for m in col_means.iter_mut() {
        *m = *m / nf;
    }
    let mut w = vec![F::zero(); k];
    for (r, &i) in rows.iter().enumerate() {
        let yr = y[r];
        for (c, wc) in w.iter_mut().enumerate() {
            *wc = *wc + (emb.scores[(i, c)] - col_means[c]) * yr;
        }
    }
    if normalize(&mut w) == F::zero() {
        return Err(Error::UndefinedDirection(
            "trait is orthogonal to every embedding component".into(),
        ));
    }

    let (low, high) = extreme_groups(trait_, n_per_group, rng)?;
    let s = direction_scale(emb, &low, &high)?;
    let delta = delta_net(&emb.d, &emb.v, &w, s)?;
    Ok(Direction {
        w,
        s,
        delta_net: delta,
        trait_name: trait_.name.clone(),
        method: DirectionMethod::Cca,
        lda_threshold: None,
    })
}

/// LDA direction between two groups of embedded subjects:
/// `w ∝ (S0 + S1 + λI)^{-1} (μ1 - μ0)`, with the classification threshold
/// at the midpoint of the projected group means.
pub fn lda_direction<F: Scalar>(
    emb: &EmbeddingMatrix<F>,
    group0: &[usize],
    group1: &[usize],
    ridge: LdaRidge<F>,
    trait_name: &str,
) -> Result<Direction<F>> {
    let g0 = GroupEmbedding::from_rows(&emb.scores, group0)?;
    let g1 = GroupEmbedding::from_rows(&emb.scores, group1)?;
    let w = lda_weights(&g0, &g1, ridge)?;
    let threshold = (dot(&w, &g0.mean) + dot(&w, &g1.mean)) * F::of(0.5);
    let s = direction_scale(emb, group0, group1)?;
    let delta = delta_net(&emb.d, &emb.v, &w, s)?;
    Ok(Direction {
        w,
        s,
        delta_net: delta,
        trait_name: trait_name.to_string(),
        method: DirectionMethod::Lda,
        lda_threshold: Some(threshold),
    })
}

/// The LDA closed form on explicit group moments.
pub fn lda_weights<F: Scalar>(
    g0: &GroupEmbedding<F>,
    g1: &GroupEmbedding<F>,
    ridge: LdaRidge<F>,
) -> Result<Vec<F>> {
    let k = g0.mean.len();
    if g1.mean.len() != k {
        return Err(Error::Shape(format!(
            "group dimensions {k} vs {}",
            g1.mean.len()
        )));
    }
    let pooled = g0.covariance.add(&g1.covariance)?;
    let lambda = match ridge {
        LdaRidge::Auto => {
            let trace = (0..k).map(|i| pooled[(i, i)]).fold(F::zero(), |a, b| a + b);
            F::of(1e-6) * trace / F::of(k as f64)
        }
        LdaRidge::Fixed(l) => l,
    };
    let mut system = pooled;
    for i in 0..k {
        system[(i, i)] = system[(i, i)] + lambda;
    }
    let diff: Vec<F> = g1
        .mean
        .iter()
        .zip(&g0.mean)
        .map(|(&a, &b)| a - b)
        .collect();
    let mut w = solve_cholesky(&system, &diff).or_else(|_| solve_lu(&system, &diff))?;
    if normalize(&mut w) == F::zero() {
        return Err(Error::UndefinedDirection("identical group means".into()));
    }
    Ok(w)
}

/// Norm of the mean difference of embedded rows: the scale attached to a
/// direction so that edge-space changes are comparable across traits.
pub fn direction_scale<F: Scalar>(
    emb: &EmbeddingMatrix<F>,
    group0: &[usize],
    group1: &[usize],
) -> Result<F> {
    if group0.is_empty() || group1.is_empty() {
        return Err(Error::InsufficientData("empty group".into()));
    }
    let k = emb.components();
    let mut diff = vec![F::zero(); k];
    for &i in group0 {
        if i >= emb.subjects() {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: emb.subjects(),
            });
        }
        for (d, &x) in diff.iter_mut().zip(emb.scores.row(i)) {
            *d = *d + x / F::of(group0.len() as f64);
        }
    }
    for &i in group1 {
        if i >= emb.subjects() {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: emb.subjects(),
            });
        }
        for (d, &x) in diff.iter_mut().zip(emb.scores.row(i)) {
            *d = *d - x / F::of(group1.len() as f64);
        }
    }
    Ok(norm2(&diff))
}

/// Maps an embedding-space direction back to edge space:
/// `s * sum_k d_k w[k] v_k v_k^T`.
pub fn delta_net<F: Scalar>(
    d: &[F],
    v: &DenseMatrix<F>,
    w: &[F],
    s: F,
) -> Result<DenseMatrix<F>> {
    let k = d.len();
    if w.len() != k || v.cols() != k {
        return Err(Error::Shape(format!(
            "direction of length {} for {} components",
            w.len(),
            k
        )));
    }
    let p = v.rows();
    let mut out = DenseMatrix::zeros(p, p);
    // Upper triangle then mirror, so symmetry is bit-exact.
    for c in 0..k {
        let col = v.col(c);
        let scale = s * d[c] * w[c];
        for i in 0..p {
            for j in i..p {
                out[(i, j)] = out[(i, j)] + scale * (col[i] * col[j]);
            }
        }
    }
    for i in 0..p {
        for j in (i + 1)..p {
            out[(j, i)] = out[(i, j)];
        }
    }
    Ok(out)
}

/// One ranked edge of a symmetric network.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge<F> {
    pub i: usize,
    pub j: usize,
    pub value: F,
}

/// The `n_edges` upper-triangle entries with the largest magnitudes
/// (self-loops excluded; the sign of each entry is preserved). Ties break
/// lexicographically on `(i, j)`, so the output is a deterministic function
/// of the input.
pub fn top_edges<F: Scalar>(net: &DenseMatrix<F>, n_edges: usize) -> Result<Vec<Edge<F>>> {
    let p = net.rows();
    if net.cols() != p {
        return Err(Error::Shape(format!("edge ranking on {:?}", net.shape())));
    }
    let max_edges = p * (p.saturating_sub(1)) / 2;
    if n_edges > max_edges {
        return Err(Error::Config(format!(
            "{n_edges} edges requested, matrix has {max_edges} off-diagonal pairs"
        )));
    }
    let mut edges: Vec<Edge<F>> = Vec::with_capacity(max_edges);
    for i in 0..p {
        for j in (i + 1)..p {
            edges.push(Edge {
                i,
                j,
                value: net[(i, j)],
            });
        }
    }
    edges.sort_by(|a, b| {
        b.value
            .abs()
            .partial_cmp(&a.value.abs())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| (a.i, a.j).cmp(&(b.i, b.j)))
    });
    edges.truncate(n_edges);
    Ok(edges)
}

/// Weighted sum of the first `k` basis networks, `sum_k d_k v_k v_k^T`: the
/// one-network summary of dominant population variation.
pub fn principal_network<F: Scalar>(dec: &TnDecomposition<F>, k: usize) -> Result<DenseMatrix<F>> {
    if k > dec.components() {
        return Err(Error::Rank {
            requested: k,
            max: dec.components(),
        });
    }
    let p = dec.node_count();
    let mut out = DenseMatrix::zeros(p, p);
    for c in 0..k {
        let col = dec.v.col(c);
        out.add_outer(dec.d[c], &col, &col);
    }
    Ok(out)
}

/// Inner product of two equal-length vectors.
pub fn project_onto<F: Scalar>(w: &[F], row: &[F]) -> Result<F> {
    if w.len() != row.len() {
        return Err(Error::Shape(format!(
            "projection of length-{} row onto length-{} direction",
            row.len(),
            w.len()
        )));
    }
    Ok(dot(w, row))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::qr_thin;
    use crate::rng::rng_from_seed;
    use approx::assert_relative_eq;
    use rand::Rng as _;
    use rand_distr::{Distribution, StandardNormal};

    fn trait_from(values: Vec<f64>, kind: TraitKind) -> TraitVector<f64> {
        TraitVector::new(values.into_iter().map(Some).collect(), kind, "t").unwrap()
    }

    fn gaussian_rows(n: usize, k: usize, shift: &[f64], rng: &mut crate::rng::Rng) -> DenseMatrix<f64> {
        DenseMatrix::from_fn(n, k, |_, c| {
            let z: f64 = StandardNormal.sample(rng);
            z + shift.get(c).copied().unwrap_or(0.0)
        })
    }

    /// Embedding with centered orthonormal score columns (so the CCA closed
    /// form is exact) and a matching random (d, V) source.
    fn centered_orthonormal_embedding(n: usize, k: usize, seed: u64) -> EmbeddingMatrix<f64> {
        let mut rng = rng_from_seed(seed);
        let raw = DenseMatrix::from_fn(n, k, |_, _| rng.gen_range(-1.0..1.0));
        // Center columns, then orthonormalize: the span stays zero-mean.
        let mut centered = raw;
        for c in 0..k {
            let col = centered.col(c);
            let mean: f64 = col.iter().sum::<f64>() / n as f64;
            let adjusted: Vec<f64> = col.iter().map(|v| v - mean).collect();
            centered.set_col(c, &adjusted);
        }
        let (q, _) = qr_thin(&centered).unwrap();
        let g = DenseMatrix::from_fn(6, k, |_, _| rng.gen_range(-1.0..1.0));
        let (v, _) = qr_thin(&g).unwrap();
        let d: Vec<f64> = (0..k).map(|c| 3.0 - 0.5 * c as f64).collect();
        EmbeddingMatrix::new(q, d, v).unwrap()
    }

    #[test]
    fn extreme_groups_on_distinct_values() {
        let t = trait_from((1..=300).map(|v| v as f64).collect(), TraitKind::Continuous);
        let mut rng = rng_from_seed(1);
        let (low, high) = extreme_groups(&t, 100, &mut rng).unwrap();
        assert_eq!(low, (0..100).collect::<Vec<_>>());
        assert_eq!(high, (200..300).collect::<Vec<_>>());
    }

    #[test]
    fn extreme_groups_all_equal_are_random_and_disjoint() {
        let t = trait_from(vec![7.0; 50], TraitKind::Continuous);
        let mut rng = rng_from_seed(2);
        let (low, high) = extreme_groups(&t, 20, &mut rng).unwrap();
        assert_eq!(low.len(), 20);
        assert_eq!(high.len(), 20);
        assert!(low.iter().all(|i| !high.contains(i)));
    }

    #[test]
    fn extreme_groups_tied_boundary_is_seeded() {
        // 10 zeros, 20 ones, 10 twos; n = 15 forces boundary randomization.
        let mut values = vec![0.0; 10];
        values.extend(vec![1.0; 20]);
        values.extend(vec![2.0; 10]);
        let t = trait_from(values, TraitKind::Ordinal);
        let (l1, h1) = extreme_groups(&t, 15, &mut rng_from_seed(3)).unwrap();
        let (l2, h2) = extreme_groups(&t, 15, &mut rng_from_seed(3)).unwrap();
        let (l3, _) = extreme_groups(&t, 15, &mut rng_from_seed(4)).unwrap();
        assert_eq!(l1, l2);
        assert_eq!(h1, h2);
        assert_ne!(l1, l3, "different seeds should break ties differently");
        assert_eq!(l1.len(), 15);
        assert_eq!(h1.len(), 15);
        assert!(l1.iter().all(|i| !h1.contains(i)));
    }

    #[test]
    fn extreme_groups_insufficient_subjects() {
        let t = trait_from(vec![1.0, 2.0, 3.0], TraitKind::Continuous);
        assert!(matches!(
            extreme_groups(&t, 2, &mut rng_from_seed(5)),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn mmd_identical_groups_give_zero_and_p_one() {
        let mut rng = rng_from_seed(6);
        let a = gaussian_rows(10, 3, &[], &mut rng);
        let res = mmd_test(&a, &a, 200, &mut rng_from_seed(7)).unwrap();
        assert_relative_eq!(res.statistic, 0.0, epsilon = 1e-12);
        assert_relative_eq!(res.p_value, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn mmd_all_identical_points_short_circuit() {
        let a = DenseMatrix::from_fn(5, 2, |_, _| 1.0);
        let b = DenseMatrix::from_fn(4, 2, |_, _| 1.0);
        let res = mmd_test(&a, &b, 100, &mut rng_from_seed(8)).unwrap();
        assert_eq!(res.statistic, 0.0);
        assert_eq!(res.p_value, 1.0);
        assert_eq!(res.bandwidth, 0.0);
    }

    #[test]
    fn mmd_separated_gaussians_reject() {
        let mut rng = rng_from_seed(9);
        let a = gaussian_rows(30, 3, &[0.0], &mut rng);
        let b = gaussian_rows(30, 3, &[5.0], &mut rng);
        let res = mmd_test(&a, &b, 1000, &mut rng_from_seed(10)).unwrap();
        assert!(res.p_value <= 0.001, "p = {}", res.p_value);
        assert!(res.statistic > 0.0);
    }

    #[test]
    fn mmd_is_symmetric_in_groups() {
        let mut rng = rng_from_seed(11);
        let a = gaussian_rows(12, 2, &[0.0], &mut rng);
        let b = gaussian_rows(12, 2, &[0.7], &mut rng);
        let r1 = mmd_test(&a, &b, 300, &mut rng_from_seed(12)).unwrap();
        let r2 = mmd_test(&b, &a, 300, &mut rng_from_seed(12)).unwrap();
        assert_eq!(r1.statistic, r2.statistic);
        assert_eq!(r1.p_value, r2.p_value);
        assert_eq!(r1.bandwidth, r2.bandwidth);
    }

    #[test]
    fn fdr_manual_step_up_example() {
        let out = fdr_bh(&[0.01, 0.02, 0.5], 0.05).unwrap();
        assert_eq!(out.rejected, vec![true, true, false]);
        assert_relative_eq!(out.threshold.unwrap(), 0.02);
    }

    #[test]
    fn fdr_extremes() {
        let ones = fdr_bh(&[1.0, 1.0, 1.0], 0.05).unwrap();
        assert!(ones.rejected.iter().all(|&r| !r));
        assert!(ones.threshold.is_none());
        let zeros = fdr_bh(&[0.0, 0.0], 0.05).unwrap();
        assert!(zeros.rejected.iter().all(|&r| r));
        let empty = fdr_bh::<f64>(&[], 0.05).unwrap();
        assert!(empty.rejected.is_empty());
    }

    #[test]
    fn fdr_rejections_are_monotone_in_rank() {
        let mut rng = rng_from_seed(13);
        for _ in 0..50 {
            let p: Vec<f64> = (0..20).map(|_| rng.gen_range(0.0..1.0)).collect();
            let out = fdr_bh(&p, 0.2).unwrap();
            let mut order: Vec<usize> = (0..p.len()).collect();
            order.sort_by(|&i, &j| p[i].partial_cmp(&p[j]).unwrap());
            let flags: Vec<bool> = order.iter().map(|&i| out.rejected[i]).collect();
            let first_accept = flags.iter().position(|&f| !f).unwrap_or(flags.len());
            assert!(
                flags[first_accept..].iter().all(|&f| !f),
                "non-monotone rejection pattern {flags:?}"
            );
        }
    }

    #[test]
    fn cca_recovers_unit_direction_on_orthonormal_scores() {
        let emb = centered_orthonormal_embedding(40, 3, 14);
        let y: Vec<f64> = emb.scores.col(0);
        let t = trait_from(y, TraitKind::Continuous);
        let dir = cca_direction(&emb, &t, None, 10, &mut rng_from_seed(15)).unwrap();
        assert_relative_eq!(dir.w[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(dir.w[1], 0.0, epsilon = 1e-12);
        assert_relative_eq!(dir.w[2], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn cca_flips_sign_with_negated_trait() {
        let emb = centered_orthonormal_embedding(40, 3, 16);
        let mut rng = rng_from_seed(17);
        let y: Vec<f64> = (0..40).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let t_pos = trait_from(y.clone(), TraitKind::Continuous);
        let t_neg = trait_from(y.iter().map(|v| -v).collect(), TraitKind::Continuous);
        let d_pos = cca_direction(&emb, &t_pos, None, 10, &mut rng_from_seed(18)).unwrap();
        let d_neg = cca_direction(&emb, &t_neg, None, 10, &mut rng_from_seed(18)).unwrap();
        for (a, b) in d_pos.w.iter().zip(&d_neg.w) {
            assert_relative_eq!(*a, -b, epsilon = 1e-12);
        }
    }

    #[test]
    fn cca_errors_when_covariate_explains_trait() {
        let emb = centered_orthonormal_embedding(40, 3, 19);
        let mut rng = rng_from_seed(20);
        let y: Vec<f64> = (0..40).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let cov = DenseMatrix::from_fn(40, 1, |r, _| y[r]);
        let t = trait_from(y, TraitKind::Continuous);
        assert!(matches!(
            cca_direction(&emb, &t, Some(&cov), 10, &mut rng_from_seed(21)),
            Err(Error::UndefinedDirection(_))
        ));
    }

    #[test]
    fn cca_maximizes_the_covariance_objective() {
        let emb = centered_orthonormal_embedding(50, 4, 22);
        let mut rng = rng_from_seed(23);
        let y: Vec<f64> = (0..50).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let t = trait_from(y.clone(), TraitKind::Continuous);
        let dir = cca_direction(&emb, &t, None, 12, &mut rng_from_seed(24)).unwrap();
        // Objective w^T U^T y with centered quantities.
        let mean = y.iter().sum::<f64>() / 50.0;
        let yc: Vec<f64> = y.iter().map(|v| v - mean).collect();
        let uty = emb.scores.t_matvec(&yc).unwrap();
        let best = dot(&dir.w, &uty);
        for _ in 0..1000 {
            let mut probe: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
            normalize(&mut probe);
            assert!(dot(&probe, &uty) <= best + 1e-12);
        }
    }

    #[test]
    fn lda_isotropic_case_points_along_mean_difference() {
        let g0 = GroupEmbedding {
            mean: vec![0.0, 0.0],
            covariance: DenseMatrix::identity(2),
            count: 10,
        };
        let g1 = GroupEmbedding {
            mean: vec![2.0, 1.0],
            covariance: DenseMatrix::identity(2),
            count: 10,
        };
        let w = lda_weights(&g0, &g1, LdaRidge::Fixed(0.0)).unwrap();
        let mut expected = vec![2.0, 1.0];
        normalize(&mut expected);
        assert_relative_eq!(w[0], expected[0], epsilon = 1e-12);
        assert_relative_eq!(w[1], expected[1], epsilon = 1e-12);
    }

    #[test]
    fn lda_label_swap_flips_direction() {
        let mut rng = rng_from_seed(25);
        let scores = gaussian_rows(30, 3, &[], &mut rng);
        let v = qr_thin(&gaussian_rows(6, 3, &[], &mut rng)).unwrap().0;
        let emb = EmbeddingMatrix::new(scores, vec![1.0, 1.0, 1.0], v).unwrap();
        let g0: Vec<usize> = (0..15).collect();
        let g1: Vec<usize> = (15..30).collect();
        let d01 = lda_direction(&emb, &g0, &g1, LdaRidge::Auto, "t").unwrap();
        let d10 = lda_direction(&emb, &g1, &g0, LdaRidge::Auto, "t").unwrap();
        for (a, b) in d01.w.iter().zip(&d10.w) {
            assert_relative_eq!(*a, -b, epsilon = 1e-12);
        }
        assert_relative_eq!(d01.s, d10.s, epsilon = 1e-12);
    }

    #[test]
    fn lda_matches_explicit_inverse_oracle() {
        let mut rng = rng_from_seed(26);
        // Planted anisotropic 2-D groups.
        let a = DenseMatrix::from_fn(40, 2, |_, c| {
            let z: f64 = StandardNormal.sample(&mut rng);
            if c == 0 {
                3.0 * z
            } else {
                0.5 * z
            }
        });
        let b = DenseMatrix::from_fn(40, 2, |_, c| {
            let z: f64 = StandardNormal.sample(&mut rng);
            if c == 0 {
                3.0 * z + 1.0
            } else {
                0.5 * z + 2.0
            }
        });
        let mut all = DenseMatrix::zeros(80, 2);
        for i in 0..40 {
            all.row_mut(i).copy_from_slice(a.row(i));
            all.row_mut(40 + i).copy_from_slice(b.row(i));
        }
        let g0 = GroupEmbedding::from_rows(&all, &(0..40).collect::<Vec<_>>()).unwrap();
        let g1 = GroupEmbedding::from_rows(&all, &(40..80).collect::<Vec<_>>()).unwrap();
        let w = lda_weights(&g0, &g1, LdaRidge::Fixed(0.0)).unwrap();
        // Oracle: explicit inverse of the pooled covariance.
        let pooled = g0.covariance.add(&g1.covariance).unwrap();
        let inv = crate::linalg::inverse(&pooled).unwrap();
        let diff = vec![g1.mean[0] - g0.mean[0], g1.mean[1] - g0.mean[1]];
        let mut oracle = inv.matvec(&diff).unwrap();
        normalize(&mut oracle);
        for (a, b) in w.iter().zip(&oracle) {
            assert_relative_eq!(*a, *b, epsilon = 1e-10);
        }
    }

    #[test]
    fn lda_is_equivariant_under_affine_maps() {
        // Mapping scores by x -> A x + b transports the lambda = 0 solution
        // as w -> A^{-T} w (projections, hence classifications, invariant).
        let mut rng = rng_from_seed(27);
        let scores = gaussian_rows(40, 2, &[], &mut rng);
        let g0: Vec<usize> = (0..20).collect();
        let g1: Vec<usize> = (20..40).collect();
        let mut shifted = scores.clone();
        for i in 20..40 {
            shifted[(i, 0)] += 2.0;
        }
        let a_map = DenseMatrix::from_rows(&[vec![2.0, 0.3], vec![-0.4, 1.1]]).unwrap();
        let b_shift = [0.7, -1.2];
        let mapped = DenseMatrix::from_fn(40, 2, |i, c| {
            dot(a_map.row(c), shifted.row(i)) + b_shift[c]
        });

        let e0 = GroupEmbedding::from_rows(&shifted, &g0).unwrap();
        let e1 = GroupEmbedding::from_rows(&shifted, &g1).unwrap();
        let w = lda_weights(&e0, &e1, LdaRidge::Fixed(0.0)).unwrap();
        let m0 = GroupEmbedding::from_rows(&mapped, &g0).unwrap();
        let m1 = GroupEmbedding::from_rows(&mapped, &g1).unwrap();
        let w_mapped = lda_weights(&m0, &m1, LdaRidge::Fixed(0.0)).unwrap();

        let a_inv_t = crate::linalg::inverse(&a_map).unwrap().transpose();
        let mut transported = a_inv_t.matvec(&w).unwrap();
        normalize(&mut transported);
        let sign = if dot(&transported, &w_mapped) < 0.0 { -1.0 } else { 1.0 };
        for (t, m) in transported.iter().zip(&w_mapped) {
            assert_relative_eq!(sign * t, *m, epsilon = 1e-8);
        }
    }

    #[test]
    fn direction_scale_examples() {
        let mut scores = DenseMatrix::zeros(4, 2);
        scores.set_col(0, &[1.0, 1.0, -1.0, -1.0]);
        let v = DenseMatrix::identity(2);
        let emb = EmbeddingMatrix::new(scores, vec![1.0, 1.0], v).unwrap();
        // identical groups
        assert_relative_eq!(direction_scale(&emb, &[0, 1], &[0, 1]).unwrap(), 0.0);
        // groups at e1 and -e1
        assert_relative_eq!(direction_scale(&emb, &[0, 1], &[2, 3]).unwrap(), 2.0);
        // random groups vs direct computation
        let mut rng = rng_from_seed(28);
        let scores = gaussian_rows(10, 2, &[], &mut rng);
        let emb =
            EmbeddingMatrix::new(scores.clone(), vec![1.0, 1.0], DenseMatrix::identity(2)).unwrap();
        let g0 = [0usize, 2, 4];
        let g1 = [1usize, 3, 5, 7];
        let mut mean0 = [0.0; 2];
        let mut mean1 = [0.0; 2];
        for &i in &g0 {
            mean0[0] += scores[(i, 0)] / 3.0;
            mean0[1] += scores[(i, 1)] / 3.0;
        }
        for &i in &g1 {
            mean1[0] += scores[(i, 0)] / 4.0;
            mean1[1] += scores[(i, 1)] / 4.0;
        }
        let want = ((mean0[0] - mean1[0]).powi(2) + (mean0[1] - mean1[1]).powi(2)).sqrt();
        assert_relative_eq!(direction_scale(&emb, &g0, &g1).unwrap(), want, epsilon = 1e-14);
    }

    #[test]
    fn delta_net_examples_and_oddness() {
        let mut rng = rng_from_seed(29);
        let (v, _) = qr_thin(&gaussian_rows(5, 3, &[], &mut rng)).unwrap();
        let d = vec![4.0, 2.0, 1.0];
        // K = 1 slice of the sum
        let single = delta_net(&d[..1], &v.leading_cols(1), &[1.0], 1.0).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                assert_relative_eq!(single[(i, j)], 4.0 * v[(i, 0)] * v[(j, 0)], epsilon = 1e-14);
            }
        }
        // w = e_k picks out component k, scaled by s
        let ek = delta_net(&d, &v, &[0.0, 1.0, 0.0], 2.5).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                assert_relative_eq!(ek[(i, j)], 2.5 * 2.0 * v[(i, 1)] * v[(j, 1)], epsilon = 1e-14);
            }
        }
        // random w vs naive elementwise loop
        let mut w: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
        normalize(&mut w);
        let got = delta_net(&d, &v, &w, 1.7).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                let mut want = 0.0;
                for k in 0..3 {
                    want += 1.7 * d[k] * w[k] * v[(i, k)] * v[(j, k)];
                }
                assert_relative_eq!(got[(i, j)], want, epsilon = 1e-12);
            }
        }
        // delta_net(-w) = -delta_net(w) exactly
        let neg_w: Vec<f64> = w.iter().map(|x| -x).collect();
        let neg = delta_net(&d, &v, &neg_w, 1.7).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                assert_eq!(neg[(i, j)], -got[(i, j)]);
            }
        }
        // symmetry by construction
        let (asym, _, _) = got.max_asymmetry();
        assert_eq!(asym, 0.0);
    }

    #[test]
    fn top_edges_excludes_diagonal() {
        let mut net = DenseMatrix::zeros(4, 4);
        for i in 0..4 {
            net[(i, i)] = 10.0;
        }
        let edges = top_edges(&net, 3).unwrap();
        assert_eq!(edges.len(), 3);
        assert!(edges.iter().all(|e| e.i != e.j && e.value == 0.0));
    }

    #[test]
    fn top_edges_single_nonzero() {
        let mut net = DenseMatrix::zeros(4, 4);
        net[(1, 3)] = -2.0;
        net[(3, 1)] = -2.0;
        let edges = top_edges(&net, 1).unwrap();
        assert_eq!(edges.len(), 1);
        assert_eq!((edges[0].i, edges[0].j), (1, 3));
        assert_eq!(edges[0].value, -2.0);
    }

    #[test]
    fn top_edges_matches_full_sort_oracle() {
        let mut rng = rng_from_seed(30);
        let raw = gaussian_rows(6, 6, &[], &mut rng);
        let net = raw.symmetrized();
        let edges = top_edges(&net, 15).unwrap();
        // Oracle: collect every off-diagonal pair and sort.
        let mut oracle: Vec<(usize, usize, f64)> = Vec::new();
        for i in 0..6 {
            for j in (i + 1)..6 {
                oracle.push((i, j, net[(i, j)]));
            }
        }
        oracle.sort_by(|a, b| {
            b.2.abs()
                .partial_cmp(&a.2.abs())
                .unwrap()
                .then_with(|| (a.0, a.1).cmp(&(b.0, b.1)))
        });
        for (e, o) in edges.iter().zip(&oracle) {
            assert_eq!((e.i, e.j), (o.0, o.1));
            assert_eq!(e.value, o.2);
        }
        assert!(top_edges(&net, 16).is_err());
    }

    #[test]
    fn principal_network_is_low_rank_sum() {
        let mut rng = rng_from_seed(31);
        let (v, _) = qr_thin(&gaussian_rows(6, 3, &[], &mut rng)).unwrap();
        let dec = TnDecomposition {
            d: vec![3.0, 2.0, 1.0],
            v: v.clone(),
            u: DenseMatrix::zeros(4, 3),
            objective_trace: vec![],
            degenerate: vec![false; 3],
            converged: vec![true; 3],
            k_requested: 3,
        };
        let net1 = principal_network(&dec, 1).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                assert_relative_eq!(net1[(i, j)], 3.0 * v[(i, 0)] * v[(j, 0)], epsilon = 1e-14);
            }
        }
        // direct-sum oracle at k = 2 and the rank bound
        let net2 = principal_network(&dec, 2).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                let want = 3.0 * v[(i, 0)] * v[(j, 0)] + 2.0 * v[(i, 1)] * v[(j, 1)];
                assert_relative_eq!(net2[(i, j)], want, epsilon = 1e-12);
            }
        }
        let eig = crate::linalg::sym_eigen(&net2).unwrap();
        let nonzero = eig.values.iter().filter(|v| v.abs() > 1e-10).count();
        assert!(nonzero <= 2);
    }

    #[test]
    fn project_onto_examples() {
        assert_relative_eq!(project_onto(&[1.0, 0.0], &[1.0, 0.0]).unwrap(), 1.0);
        assert_relative_eq!(project_onto(&[0.3, -0.8], &[0.0, 0.0]).unwrap(), 0.0);
        let mut rng = rng_from_seed(32);
        let a: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
        assert_relative_eq!(project_onto(&a, &b).unwrap(), dot(&a, &b), epsilon = 1e-15);
        assert!(project_onto(&a, &b[..3]).is_err());
    }
}
