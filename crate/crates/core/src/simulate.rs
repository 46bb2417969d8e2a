//! Synthetic study harness: planted semi-symmetric models with Wishart
//! noise, swept over signal-to-noise ratios, scored on relative core error
//! and cumulative variance explained.
//!
//! The generative model is
//!
//! ```text
//!   X = sum_k D_k v_k o v_k o u_k  +  c * E,      D_k = (2 - 0.1 k) sqrt(P N),
//! ```
//!
//! with `V` sampled from the Stiefel manifold, `U` either Stiefel or
//! unit-norm Gaussian columns, and every noise slice drawn iid
//! `Wishart(I, P)`. The noise multiplier `c` is chosen so the realized
//! signal-to-noise ratio `|S| / |cE|` equals the configured value exactly.

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decompose::{
    hooi_semisym, hosvd_semisym, tn_pca, HooiOpts, TnDecomposition, TnPcaOpts,
    TuckerDecomposition,
};
use crate::error::{Error, Result};
use crate::linalg::{dot, fix_sign, normalize, pinv_sym, qr_thin, solve_cholesky, DenseMatrix};
use crate::rng::{rng_substream, Rng};
use crate::scalar::Scalar;
use crate::tensor::{SemiSymmetricTensor, Tensor3};

/// How the subject factors of the planted model are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UMode {
    /// Orthonormal columns (Stiefel draw).
    OrthogonalStiefel,
    /// Independent Gaussian columns, each normalized to unit length.
    GaussianUnitNorm,
}

impl std::str::FromStr for UMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stiefel" | "orthogonal" | "orthogonal-stiefel" => Ok(Self::OrthogonalStiefel),
            "gaussian" | "gaussian-unit-norm" | "non-orthogonal" => Ok(Self::GaussianUnitNorm),
            other => Err(Error::Config(format!("unknown u-mode '{other}'"))),
        }
    }
}

/// Decomposition method under comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    TnPca,
    Hosvd,
    Hooi,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::TnPca => "tnpca",
            Method::Hosvd => "hosvd",
            Method::Hooi => "hooi",
        })
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tnpca" | "tn-pca" => Ok(Self::TnPca),
            "hosvd" => Ok(Self::Hosvd),
            "hooi" => Ok(Self::Hooi),
            other => Err(Error::Config(format!("unknown method '{other}'"))),
        }
    }
}

/// Generative parameters for one simulation cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    /// Node count `P`.
    pub p: usize,
    /// Subject count `N`.
    pub n: usize,
    /// True rank `K`.
    pub k: usize,
    /// Target signal-to-noise ratio.
    pub snr: f64,
    pub u_mode: UMode,
    pub seed: u64,
    pub replicates: usize,
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.p < 1 || self.n < 1 {
            return Err(Error::Config("P and N must be at least 1".into()));
        }
        if self.k < 1 || self.k > self.p.min(self.n) {
            return Err(Error::Config(format!(
                "K = {} must satisfy 1 <= K <= min(P, N) = {}",
                self.k,
                self.p.min(self.n)
            )));
        }
        if self.k >= 20 {
            return Err(Error::Config(
                "K must be below 20: the core scale (2 - 0.1 K) must stay positive".into(),
            ));
        }
        if !(self.snr > 0.0) {
            return Err(Error::Config(format!("snr must be positive, got {}", self.snr)));
        }
        if self.replicates < 1 {
            return Err(Error::Config("replicates must be at least 1".into()));
        }
        Ok(())
    }
}

/// One generated tensor together with its ground truth.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulationDraw<F> {
    pub x: SemiSymmetricTensor<F>,
    /// Planted diagonal core values `D_k = (2 - 0.1 k) sqrt(P N)`.
    pub d_true: Vec<F>,
    pub v_true: DenseMatrix<F>,
    pub u_true: DenseMatrix<F>,
    /// Multiplier applied to the raw Wishart noise.
    pub noise_scale: F,
}

/// Planted core value for 1-based component `k`.
pub fn core_scale<F: Scalar>(k: usize, p: usize, n: usize) -> F {
    (F::of(2.0) - F::of(0.1) * F::of(k as f64)) * F::of((p * n) as f64).sqrt()
}

/// Random matrix with orthonormal columns, invariant under left rotation:
/// QR of a standard Gaussian matrix with the R-diagonal signs folded into Q.
pub fn sample_stiefel<F: Scalar>(p: usize, k: usize, rng: &mut Rng) -> Result<DenseMatrix<F>> {
    if k > p {
        return Err(Error::Rank {
            requested: k,
            max: p,
        });
    }
    let g = DenseMatrix::from_fn(p, k, |_, _| {
        F::of(<StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng))
    });
    let (mut q, r) = qr_thin(&g)?;
    for c in 0..k {
        if r[(c, c)] < F::zero() {
            for i in 0..p {
                q[(i, c)] = -q[(i, c)];
            }
        }
    }
    Ok(q)
}

/// Stack of `n` iid `Wishart(I, P)` slices: each is `G G^T` for a `P x P`
/// standard Gaussian `G`.
pub fn sample_wishart_noise<F: Scalar>(p: usize, n: usize, rng: &mut Rng) -> SemiSymmetricTensor<F> {
    let mut t = Tensor3::zeros(p, p, n);
    let mut g = DenseMatrix::<F>::zeros(p, p);
    for s in 0..n {
        for i in 0..p {
            for j in 0..p {
                g[(i, j)] = F::of(<StandardNormal as Distribution<f64>>::sample(
                    &StandardNormal,
                    rng,
                ));
            }
        }
        for i in 0..p {
            for j in 0..=i {
                let val = dot(g.row(i), g.row(j));
                t[(i, j, s)] = val;
                t[(j, i, s)] = val;
            }
        }
    }
    SemiSymmetricTensor::from_tensor(t).expect("G G^T slices are symmetric")
}

/// Draws one tensor from the planted model.
///
/// The noise (not the signal) is rescaled to hit the target ratio, so the
/// planted core values are preserved exactly.
pub fn generate<F: Scalar>(cfg: &SimulationConfig, rng: &mut Rng) -> Result<SimulationDraw<F>> {
    cfg.validate()?;
    let (p, n, k) = (cfg.p, cfg.n, cfg.k);

    let v_true = sample_stiefel::<F>(p, k, rng)?;
    let u_true = match cfg.u_mode {
        UMode::OrthogonalStiefel => sample_stiefel::<F>(n, k, rng)?,
        UMode::GaussianUnitNorm => {
            let mut u = DenseMatrix::from_fn(n, k, |_, _| {
                F::of(<StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng))
            });
            for c in 0..k {
                let mut col = u.col(c);
                normalize(&mut col);
                fix_sign(&mut col);
                u.set_col(c, &col);
            }
            u
        }
    };
    let d_true: Vec<F> = (1..=k).map(|kk| core_scale(kk, p, n)).collect();

    let mut signal = Tensor3::zeros(p, p, n);
    for c in 0..k {
        signal.subtract_rank_one(-d_true[c], &v_true.col(c), &u_true.col(c));
    }
    let noise = sample_wishart_noise::<F>(p, n, rng);

    let signal_norm = signal.frobenius_norm();
    let noise_norm = noise.frobenius_norm();
    if noise_norm == F::zero() {
        return Err(Error::Config("degenerate zero noise draw".into()));
    }
    let c = signal_norm / (F::of(cfg.snr) * noise_norm);

    let mut data = signal;
    for (x, &e) in data.data_mut().iter_mut().zip(noise.data()) {
        *x = *x + c * e;
    }
    let x = SemiSymmetricTensor::from_tensor(data).expect("sum of symmetric slices");
    Ok(SimulationDraw {
        x,
        d_true,
        v_true,
        u_true,
        noise_scale: c,
    })
}

/// Relative core error with component matching.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoreError<F> {
    pub value: F,
    /// Fewer estimated than true components: compared on the matched subset.
    pub rank_mismatch: bool,
}

/// `|D_true - D_hat| / |D_true|` after greedily matching estimated to true
/// components by largest `|<v_hat, v_true>|`.
pub fn relative_core_error<F: Scalar>(
    d_true: &[F],
    v_true: &DenseMatrix<F>,
    d_hat: &[F],
    v_hat: &DenseMatrix<F>,
) -> Result<CoreError<F>> {
    let k_true = d_true.len();
    let k_hat = d_hat.len();
    if v_true.cols() != k_true || v_hat.cols() != k_hat || v_true.rows() != v_hat.rows() {
        return Err(Error::Shape(format!(
            "core error: true {}x{} / est {}x{} with {k_true} / {k_hat} values",
            v_true.rows(),
            v_true.cols(),
            v_hat.rows(),
            v_hat.cols()
        )));
    }
    let matched = k_true.min(k_hat);
    let rank_mismatch = k_hat < k_true;

    // Greedy assignment on |cosine| between network factors.
    let mut scores = Vec::with_capacity(k_true * k_hat);
    for j in 0..k_true {
        let vt = v_true.col(j);
        for k in 0..k_hat {
            let c = dot(&vt, &v_hat.col(k)).abs();
            scores.push((c, j, k));
        }
    }
    scores.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));
    let mut used_true = vec![false; k_true];
    let mut used_hat = vec![false; k_hat];
    let mut assignment: Vec<(usize, usize)> = Vec::with_capacity(matched);
    for (_, j, k) in scores {
        if assignment.len() == matched {
            break;
        }
        if used_true[j] || used_hat[k] {
            continue;
        }
        used_true[j] = true;
        used_hat[k] = true;
        assignment.push((j, k));
    }

    // On rank mismatch both sums run over the matched subset only.
    let mut num = F::zero();
    let mut den = F::zero();
    for &(j, k) in &assignment {
        let diff = d_true[j] - d_hat[k];
        num = num + diff * diff;
        den = den + d_true[j] * d_true[j];
    }
    if den == F::zero() {
        return Err(Error::Config("all matched true core values are zero".into()));
    }
    Ok(CoreError {
        value: (num / den).sqrt(),
        rank_mismatch,
    })
}

pub fn relative_core_error_tn<F: Scalar>(
    d_true: &[F],
    v_true: &DenseMatrix<F>,
    dec: &TnDecomposition<F>,
) -> Result<CoreError<F>> {
    relative_core_error(d_true, v_true, &dec.d, &dec.v)
}

/// For Tucker estimates the matched scaling values are the absolute core
/// superdiagonal entries of the matched components.
pub fn relative_core_error_tucker<F: Scalar>(
    d_true: &[F],
    v_true: &DenseMatrix<F>,
    dec: &TuckerDecomposition<F>,
) -> Result<CoreError<F>> {
    let d_hat = dec.superdiagonal();
    let k = d_hat.len();
    relative_core_error(d_true, v_true, &d_hat, &dec.v.leading_cols(k))
}

/// Cumulative variance explained by factor prefixes.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct VarianceExplained<F> {
    pub value: F,
    /// The subject-factor Gram matrix was singular and a tolerance
    /// pseudo-inverse was used.
    pub pseudo_inverse_used: bool,
}

/// `|X x1 Pv x2 Pv x3 Pu|^2 / |X|^2` with `Pv = V (V^T V)^{-1} V^T` built
/// from the first `k` columns (and `Pu` analogously). The Gram inverse
/// matters when `U` is not orthonormal; a singular Gram falls back to a
/// tolerance pseudo-inverse (1e-10) and is flagged.
pub fn variance_explained<F: Scalar>(
    x: &SemiSymmetricTensor<F>,
    v: &DenseMatrix<F>,
    u: &DenseMatrix<F>,
    k: usize,
) -> Result<VarianceExplained<F>> {
    if k > v.cols() || k > u.cols() {
        return Err(Error::Rank {
            requested: k,
            max: v.cols().min(u.cols()),
        });
    }
    if k == 0 {
        return Ok(VarianceExplained {
            value: F::zero(),
            pseudo_inverse_used: false,
        });
    }
    let vk = v.leading_cols(k);
    let uk = u.leading_cols(k);
    let (pv, used_v) = projector(&vk)?;
    let (pu, used_u) = projector(&uk)?;

    let projected = x
        .tensor()
        .mode_mul_mat(1, &pv)?
        .mode_mul_mat(2, &pv)?
        .mode_mul_mat(3, &pu)?;
    let num = projected.frobenius_norm();
    let den = x.frobenius_norm();
    if den == F::zero() {
        return Err(Error::Config("variance explained of a zero tensor".into()));
    }
    Ok(VarianceExplained {
        value: (num / den) * (num / den),
        pseudo_inverse_used: used_v || used_u,
    })
}

/// `A (A^T A)^{-1} A^T`, with a flagged pseudo-inverse fallback.
fn projector<F: Scalar>(a: &DenseMatrix<F>) -> Result<(DenseMatrix<F>, bool)> {
    let gram = a.gram();
    let k = gram.rows();
    // Solve G W = A^T column by column; Cholesky first, pinv on failure.
    let at = a.transpose();
    let mut w = DenseMatrix::zeros(k, at.cols());
    let mut used_pinv = false;
    let mut chol_ok = true;
    for c in 0..at.cols() {
        let rhs = at.col(c);
        match solve_cholesky(&gram, &rhs) {
            Ok(col) => w.set_col(c, &col),
            Err(_) => {
                chol_ok = false;
                break;
            }
        }
    }
    if !chol_ok {
        let (pinv, _) = pinv_sym(&gram, F::of(1e-10))?;
        w = pinv.matmul(&at)?;
        used_pinv = true;
    }
    Ok((a.matmul(&w)?, used_pinv))
}

// ---------------------------------------------------------------------------
// Study runner
// ---------------------------------------------------------------------------

/// Sweep definition: every `(snr, k, method)` combination is one cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyGrid {
    pub snrs: Vec<f64>,
    pub ks: Vec<usize>,
    pub methods: Vec<Method>,
}

/// Per-method statistics inside one grid cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodStats<F> {
    pub method: Method,
    pub replicates_ok: usize,
    pub failures: usize,
    pub core_error_mean: F,
    pub core_error_std: F,
    /// Per-replicate core errors (paired across methods within a cell).
    pub core_errors: Vec<F>,
    /// Mean cumulative variance explained for prefixes `1..=k`.
    pub varexp_mean: Vec<F>,
    pub varexp_std: Vec<F>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport<F> {
    pub snr: f64,
    pub k: usize,
    pub methods: Vec<MethodStats<F>>,
}

/// Aggregated study results, mirroring the four-panel simulation figure:
/// one row per `(snr, k)` cell with per-method error and variance curves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport<F> {
    pub config: SimulationConfig,
    pub grid: StudyGrid,
    pub cells: Vec<CellReport<F>>,
}

/// Runs the full sweep. Replicates are independent and execute in parallel;
/// every replicate derives its own RNG substream from
/// `(seed, cell index, replicate index)`, so results do not depend on the
/// execution schedule. Failures inside a cell are counted, never fatal.
pub fn run_study<F: Scalar>(grid: &StudyGrid, base: &SimulationConfig) -> Result<SimulationReport<F>> {
    if grid.snrs.is_empty() || grid.ks.is_empty() || grid.methods.is_empty() {
        return Err(Error::Config("empty study grid".into()));
    }
    let mut cells = Vec::new();
    for (ci, &snr) in grid.snrs.iter().enumerate() {
        for (cj, &k) in grid.ks.iter().enumerate() {
            let mut cfg = base.clone();
            cfg.snr = snr;
            cfg.k = k;
            cfg.validate()?;
            let cell_tag = (ci * grid.ks.len() + cj) as u64;

            // Per-replicate outcomes, computed in parallel, order-stable.
            let outcomes: Vec<Result<Vec<ReplicateScore<F>>>> = (0..cfg.replicates)
                .into_par_iter()
                .map(|rep| run_replicate(&cfg, &grid.methods, cell_tag, rep as u64))
                .collect();

            let mut methods: Vec<MethodStats<F>> = grid
                .methods
                .iter()
                .map(|&method| MethodStats {
                    method,
                    replicates_ok: 0,
                    failures: 0,
                    core_error_mean: F::zero(),
                    core_error_std: F::zero(),
                    core_errors: Vec::new(),
                    varexp_mean: vec![F::zero(); k],
                    varexp_std: vec![F::zero(); k],
                })
                .collect();
            let mut varexp_samples: Vec<Vec<Vec<F>>> =
                vec![Vec::new(); grid.methods.len()];

            for outcome in outcomes {
                match outcome {
                    Ok(scores) => {
                        for (mi, score) in scores.into_iter().enumerate() {
                            match score {
                                ReplicateScore::Ok { core_error, varexp } => {
                                    methods[mi].core_errors.push(core_error);
                                    varexp_samples[mi].push(varexp);
                                    methods[mi].replicates_ok += 1;
                                }
                                ReplicateScore::Failed => methods[mi].failures += 1,
                            }
                        }
                    }
                    Err(_) => {
                        for m in methods.iter_mut() {
                            m.failures += 1;
                        }
                    }
                }
            }

            for (mi, m) in methods.iter_mut().enumerate() {
                let (mean, std) = mean_std(&m.core_errors);
                m.core_error_mean = mean;
                m.core_error_std = std;
                for prefix in 0..k {
                    let vals: Vec<F> = varexp_samples[mi]
                        .iter()
                        .map(|curve| curve[prefix])
                        .collect();
                    let (vm, vs) = mean_std(&vals);
                    m.varexp_mean[prefix] = vm;
                    m.varexp_std[prefix] = vs;
                }
            }

            cells.push(CellReport { snr, k, methods });
        }
    }
    Ok(SimulationReport {
        config: base.clone(),
        grid: grid.clone(),
        cells,
    })
}

enum ReplicateScore<F> {
    Ok { core_error: F, varexp: Vec<F> },
    Failed,
}

fn run_replicate<F: Scalar>(
    cfg: &SimulationConfig,
    methods: &[Method],
    cell_tag: u64,
    rep: u64,
) -> Result<Vec<ReplicateScore<F>>> {
    let mut rng = rng_substream(cfg.seed, &[cell_tag, rep]);
    let draw = generate::<F>(cfg, &mut rng)?;
    let mut out = Vec::with_capacity(methods.len());
    for &method in methods {
        out.push(score_method(cfg, &draw, method, cell_tag, rep).unwrap_or(ReplicateScore::Failed));
    }
    Ok(out)
}

fn score_method<F: Scalar>(
    cfg: &SimulationConfig,
    draw: &SimulationDraw<F>,
    method: Method,
    cell_tag: u64,
    rep: u64,
) -> Result<ReplicateScore<F>> {
    let k = cfg.k;
    let (core_error, v, u) = match method {
        Method::TnPca => {
            let opts = TnPcaOpts {
                seed: crate::rng::derive_seed(cfg.seed, &[cell_tag, rep, 0x7]),
                ..TnPcaOpts::default()
            };
            let dec = tn_pca(&draw.x, k, &opts)?;
            let err = relative_core_error_tn(&draw.d_true, &draw.v_true, &dec)?;
            (err.value, dec.v, dec.u)
        }
        Method::Hosvd => {
            let dec = hosvd_semisym(&draw.x, k, k)?;
            let err = relative_core_error_tucker(&draw.d_true, &draw.v_true, &dec)?;
            (err.value, dec.v, dec.u)
        }
        Method::Hooi => {
            let dec = hooi_semisym(&draw.x, k, k, &HooiOpts::default())?;
            let err = relative_core_error_tucker(&draw.d_true, &draw.v_true, &dec)?;
            (err.value, dec.v, dec.u)
        }
    };
    let mut varexp = Vec::with_capacity(k);
    for prefix in 1..=k.min(v.cols()) {
        varexp.push(variance_explained(&draw.x, &v, &u, prefix)?.value);
    }
    // Early-stopped decompositions: pad with the last value so curves keep
    // their length (projection cannot shrink as columns are appended).
    while varexp.len() < k {
        let last = *varexp.last().unwrap_or(&F::zero());
        varexp.push(last);
    }
    Ok(ReplicateScore::Ok {
        core_error,
        varexp,
    })
}

fn mean_std<F: Scalar>(values: &[F]) -> (F, F) {
    if values.is_empty() {
        return (F::zero(), F::zero());
    }
    let n = F::of(values.len() as f64);
    let mean = values.iter().copied().sum::<F>() / n;
    if values.len() < 2 {
        return (mean, F::zero());
    }
    let ss = values
        .iter()
        .map(|&v| (v - mean) * (v - mean))
        .sum::<F>();
    (mean, (ss / (n - F::one())).sqrt())
}
