//! Prediction harness: seeded train/validation/test splits, linear and
//! logistic models, the baseline-vs-full improvement ratio, and
//! nearest-neighbor subject identification for test-retest embeddings.
//!
//! The improvement ratio for a trait is `rho = (psi_b - psi_f) / psi_b`,
//! where `psi` is RMSE for continuous/ordinal traits and one minus
//! classification accuracy for categorical ones; the baseline model sees
//! only the covariates, the full model also sees the leading PC-score
//! columns. The component count is tuned on the validation part; test rows
//! are touched exactly once, by the final scorer.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::infer::{EmbeddingMatrix, TraitKind, TraitVector};
use crate::linalg::{dot, lstsq_qr, solve_cholesky, solve_lu, DenseMatrix};
use crate::rng::rng_substream;
use crate::scalar::Scalar;

/// Disjoint train/validation/test partition of `0..n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
    pub fractions: [f64; 3],
    pub seed: u64,
}

/// Seeded uniform partition with largest-remainder rounding of the part
/// sizes. Deterministic per `(n, fractions, seed)`.
pub fn make_split(n: usize, fractions: [f64; 3], seed: u64) -> Result<SplitPlan> {
    if fractions.iter().any(|&f| f <= 0.0) {
        return Err(Error::Config("split fractions must be positive".into()));
    }
    let sum: f64 = fractions.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::Config(format!(
            "split fractions must sum to 1, got {sum}"
        )));
    }
    let quotas: Vec<f64> = fractions.iter().map(|f| f * n as f64).collect();
    let mut sizes: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let mut remainder = n - sizes.iter().sum::<usize>();
    let mut frac_order: Vec<usize> = (0..3).collect();
    frac_order.sort_by(|&a, &b| {
        let fa = quotas[a] - quotas[a].floor();
        let fb = quotas[b] - quotas[b].floor();
        fb.partial_cmp(&fa).unwrap().then(a.cmp(&b))
    });
    for &i in frac_order.iter().cycle().take(3 * 2) {
        if remainder == 0 {
            break;
        }
        sizes[i] += 1;
        remainder -= 1;
    }
    if sizes.iter().any(|&s| s == 0) {
        return Err(Error::InsufficientData(format!(
            "{n} subjects cannot fill three nonempty parts at {fractions:?}"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = rng_substream(seed, &[0x5117]);
    order.shuffle(&mut rng);
    let train = order[..sizes[0]].to_vec();
    let validation = order[sizes[0]..sizes[0] + sizes[1]].to_vec();
    let test = order[sizes[0] + sizes[1]..].to_vec();
    Ok(SplitPlan {
        train,
        validation,
        test,
        fractions,
        seed,
    })
}

// ---------------------------------------------------------------------------
// Models
// ---------------------------------------------------------------------------

/// Least-squares linear model with intercept.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinearModel<F> {
    pub intercept: F,
    pub coefficients: Vec<F>,
    /// Degenerate design: the ridge fallback was used.
    pub ridge_used: bool,
}

impl<F: Scalar> LinearModel<F> {
    pub fn predict_row(&self, features: &[F]) -> F {
        self.intercept + dot(&self.coefficients, features)
    }

    pub fn predict(&self, x: &DenseMatrix<F>) -> Vec<F> {
        (0..x.rows()).map(|i| self.predict_row(x.row(i))).collect()
    }
}

/// Ordinary least squares on `[1 | X]`; rank-deficient or underdetermined
/// designs fall back to ridge with `lambda = 1e-6 * trace(X^T X) / p`
/// (intercept unpenalized) and are flagged.
pub fn fit_linear<F: Scalar>(x: &DenseMatrix<F>, y: &[F]) -> Result<LinearModel<F>> {
    let rows = x.rows();
    if y.len() != rows {
        return Err(Error::Shape(format!(
            "{rows} design rows vs {} responses",
            y.len()
        )));
    }
    if rows == 0 {
        return Err(Error::InsufficientData("empty design".into()));
    }
    let p = x.cols();
    let design = DenseMatrix::from_fn(rows, p + 1, |i, j| {
        if j == 0 {
            F::one()
        } else {
            x[(i, j - 1)]
        }
    });
    if rows >= p + 1 {
        if let Ok(beta) = lstsq_qr(&design, y) {
            return Ok(LinearModel {
                intercept: beta[0],
                coefficients: beta[1..].to_vec(),
                ridge_used: false,
            });
        }
    }
    // Ridge fallback on the normal equations.
    let mut gram = design.gram();
    let trace_x = (1..=p).map(|i| gram[(i, i)]).fold(F::zero(), |a, b| a + b);
    let lambda = if p > 0 {
        F::of(1e-6) * trace_x / F::of(p as f64)
    } else {
        F::zero()
    };
    for i in 1..=p {
        gram[(i, i)] = gram[(i, i)] + lambda;
    }
    let rhs = design.t_matvec(y)?;
    let beta = solve_cholesky(&gram, &rhs).or_else(|_| solve_lu(&gram, &rhs))?;
    Ok(LinearModel {
        intercept: beta[0],
        coefficients: beta[1..].to_vec(),
        ridge_used: true,
    })
}

/// Logistic model fit by damped Newton iterations.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LogisticModel<F> {
    pub intercept: F,
    pub coefficients: Vec<F>,
    pub converged: bool,
    pub iterations: usize,
}

impl<F: Scalar> LogisticModel<F> {
    pub fn probability(&self, features: &[F]) -> F {
        sigmoid(self.intercept + dot(&self.coefficients, features))
    }

    /// Class decision at probability threshold 0.5.
    pub fn predict_class(&self, features: &[F]) -> bool {
        self.probability(features) >= F::of(0.5)
    }
}

#[derive(Debug, Clone)]
pub struct LogisticOpts {
    pub max_iter: usize,
    /// Gradient sup-norm threshold.
    pub tol: f64,
    /// L2 penalty on non-intercept coefficients (separation safety).
    pub l2: f64,
}

impl Default for LogisticOpts {
    fn default() -> Self {
        Self {
            max_iter: 100,
            tol: 1e-8,
            l2: 1e-6,
        }
    }
}

fn sigmoid<F: Scalar>(z: F) -> F {
    if z >= F::zero() {
        F::one() / (F::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (F::one() + e)
    }
}

fn log_sigmoid<F: Scalar>(z: F) -> F {
    // -softplus(-z), stable on both tails
    if z >= F::zero() {
        -(-z).exp().ln_1p()
    } else {
        z - z.exp().ln_1p()
    }
}

/// Maximum-likelihood logistic regression with a small L2 penalty.
pub fn fit_logistic<F: Scalar>(
    x: &DenseMatrix<F>,
    y: &[bool],
    opts: &LogisticOpts,
) -> Result<LogisticModel<F>> {
    let rows = x.rows();
    if y.len() != rows {
        return Err(Error::Shape(format!(
            "{rows} design rows vs {} labels",
            y.len()
        )));
    }
    let positives = y.iter().filter(|&&l| l).count();
    if positives == 0 || positives == rows {
        return Err(Error::InsufficientData(
            "logistic regression needs both classes present".into(),
        ));
    }
    let p = x.cols();
    let design = DenseMatrix::from_fn(rows, p + 1, |i, j| {
        if j == 0 {
            F::one()
        } else {
            x[(i, j - 1)]
        }
    });
    let lambda = F::of(opts.l2);
    let tol = F::of(opts.tol);
    let mut beta = vec![F::zero(); p + 1];

    let penalized_ll = |beta: &[F]| -> F {
        let mut ll = F::zero();
        for i in 0..rows {
            let z = dot(design.row(i), beta);
            ll = ll + if y[i] { log_sigmoid(z) } else { log_sigmoid(-z) };
        }
        let penalty: F = beta[1..].iter().map(|&b| b * b).sum();
        ll - lambda * penalty
    };

    let mut iterations = 0;
    let mut converged = false;
    for _ in 0..opts.max_iter {
        iterations += 1;
        // Gradient and Hessian of the penalized log-likelihood.
        let mut grad = vec![F::zero(); p + 1];
        let mut hess = DenseMatrix::zeros(p + 1, p + 1);
        for i in 0..rows {
            let row = design.row(i);
            let prob = sigmoid(dot(row, &beta));
            let resid = if y[i] { F::one() - prob } else { -prob };
            let weight = prob * (F::one() - prob);
            for (g, &d) in grad.iter_mut().zip(row) {
                *g = *g + resid * d;
            }
            for a in 0..=p {
                let wa = weight * row[a];
                for b in a..=p {
                    hess[(a, b)] = hess[(a, b)] + wa * row[b];
                }
            }
        }
        for a in 0..=p {
            for b in 0..a {
                hess[(a, b)] = hess[(b, a)];
            }
        }
        let two = F::of(2.0);
        for j in 1..=p {
            grad[j] = grad[j] - two * lambda * beta[j];
            hess[(j, j)] = hess[(j, j)] + two * lambda;
        }
        let grad_norm = grad.iter().map(|g| g.abs()).fold(F::zero(), F::max);
        if grad_norm <= tol {
            converged = true;
            break;
        }
        let step = match solve_cholesky(&hess, &grad).or_else(|_| solve_lu(&hess, &grad)) {
            Ok(s) => s,
            Err(_) => break,
        };
        // Damping: halve until the penalized likelihood does not decrease.
        let current = penalized_ll(&beta);
        let mut alpha = F::one();
        let mut accepted = false;
        for _ in 0..30 {
            let candidate: Vec<F> = beta
                .iter()
                .zip(&step)
                .map(|(&b, &s)| b + alpha * s)
                .collect();
            if penalized_ll(&candidate) >= current {
                beta = candidate;
                accepted = true;
                break;
            }
            alpha = alpha * F::of(0.5);
        }
        if !accepted {
            break;
        }
    }
    Ok(LogisticModel {
        intercept: beta[0],
        coefficients: beta[1..].to_vec(),
        converged,
        iterations,
    })
}

// ---------------------------------------------------------------------------
// Trait evaluation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PredictionMetric {
    Rmse,
    OneMinusAccuracy,
}

/// Outcome of one split evaluation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport<F> {
    pub best_k: usize,
    pub psi_baseline: F,
    pub psi_full: F,
    pub rho: F,
    /// Full-model predictions on the test rows, aligned with `test_indices`.
    pub test_predictions: Vec<F>,
    pub test_indices: Vec<usize>,
}

/// Aggregate over repeated splits.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PredictionReport<F> {
    pub trait_name: String,
    pub metric: PredictionMetric,
    /// Most frequently selected component count (ties to the smaller K).
    pub best_k: usize,
    /// Means over the repeated runs; `rho = (psi_b - psi_f) / psi_b` holds
    /// for these aggregates and within every run.
    pub psi_baseline: F,
    pub psi_full: F,
    pub rho: F,
    pub runs: Vec<RunReport<F>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalOpts {
    pub k_grid: Vec<usize>,
    pub repeats: usize,
    pub fractions: [f64; 3],
    pub seed: u64,
}

impl Default for EvalOpts {
    fn default() -> Self {
        Self {
            k_grid: vec![5, 10, 20, 30, 40, 60],
            repeats: 10,
            fractions: [0.66, 0.17, 0.17],
            seed: 0,
        }
    }
}

/// Evaluates one trait over repeated random splits; see [`evaluate_trait_split`].
pub fn evaluate_trait<F: Scalar>(
    emb: &EmbeddingMatrix<F>,
    trait_: &TraitVector<F>,
    covariates: Option<&DenseMatrix<F>>,
    opts: &EvalOpts,
) -> Result<PredictionReport<F>> {
    if opts.repeats == 0 {
        return Err(Error::Config("repeats must be positive".into()));
    }
    let mut runs = Vec::with_capacity(opts.repeats);
    for rep in 0..opts.repeats {
        let split = make_split(
            emb.subjects(),
            opts.fractions,
            crate::rng::derive_seed(opts.seed, &[rep as u64]),
        )?;
        runs.push(evaluate_trait_split(
            emb,
            trait_,
            covariates,
            &split,
            &opts.k_grid,
        )?);
    }
    let nf = F::of(runs.len() as f64);
    let psi_baseline = runs.iter().map(|r| r.psi_baseline).sum::<F>() / nf;
    let psi_full = runs.iter().map(|r| r.psi_full).sum::<F>() / nf;
    if psi_baseline == F::zero() {
        return Err(Error::Config(
            "baseline error is zero; improvement ratio undefined".into(),
        ));
    }
    let rho = (psi_baseline - psi_full) / psi_baseline;
    // Modal selected K, ties to the smaller value.
    let mut counts: Vec<(usize, usize)> = Vec::new();
    for r in &runs {
        match counts.iter_mut().find(|(k, _)| *k == r.best_k) {
            Some((_, c)) => *c += 1,
            None => counts.push((r.best_k, 1)),
        }
    }
    counts.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    Ok(PredictionReport {
        trait_name: trait_.name.clone(),
        metric: metric_for(trait_.kind),
        best_k: counts[0].0,
        psi_baseline,
        psi_full,
        rho,
        runs,
    })
}

fn metric_for(kind: TraitKind) -> PredictionMetric {
    match kind {
        // Ordinal traits are scored as continuous.
        TraitKind::Continuous | TraitKind::Ordinal => PredictionMetric::Rmse,
        TraitKind::Categorical => PredictionMetric::OneMinusAccuracy,
    }
}

/// One baseline-vs-full evaluation on a fixed split.
///
/// Both models are fit on the train part; the component count is selected
/// on the validation part (ascending grid, strict improvement, so ties go
/// to the smaller K); the test part is used exactly once, to score the two
/// final models.
pub fn evaluate_trait_split<F: Scalar>(
    emb: &EmbeddingMatrix<F>,
    trait_: &TraitVector<F>,
    covariates: Option<&DenseMatrix<F>>,
    split: &SplitPlan,
    k_grid: &[usize],
) -> Result<RunReport<F>> {
    if trait_.len() != emb.subjects() {
        return Err(Error::Shape(format!(
            "trait has {} entries for {} subjects",
            trait_.len(),
            emb.subjects()
        )));
    }
    if let Some(cov) = covariates {
        if cov.rows() != emb.subjects() {
            return Err(Error::Shape(format!(
                "covariates have {} rows for {} subjects",
                cov.rows(),
                emb.subjects()
            )));
        }
    }
    let k_grid: Vec<usize> = {
        let mut g: Vec<usize> = k_grid
            .iter()
            .copied()
            .filter(|&k| k <= emb.components())
            .collect();
        g.sort_unstable();
        g.dedup();
        g
    };
    if k_grid.is_empty() {
        return Err(Error::Config(
            "no usable K in the grid (all exceed the embedding rank)".into(),
        ));
    }

    let keep = |part: &[usize]| -> Vec<usize> {
        part.iter()
            .copied()
            .filter(|&i| trait_.values[i].is_some())
            .collect()
    };
    let train = keep(&split.train);
    let validation = keep(&split.validation);
    let test = keep(&split.test);
    if train.len() < 2 || validation.is_empty() || test.is_empty() {
        return Err(Error::InsufficientData(format!(
            "split parts after missing-value removal: train {}, validation {}, test {}",
            train.len(),
            validation.len(),
            test.len()
        )));
    }

    match metric_for(trait_.kind) {
        PredictionMetric::Rmse => {
            evaluate_numeric(emb, trait_, covariates, &train, &validation, &test, &k_grid)
        }
        PredictionMetric::OneMinusAccuracy => {
            evaluate_binary(emb, trait_, covariates, &train, &validation, &test, &k_grid)
        }
    }
}

/// Feature matrix `[covariates | leading k score columns]` on given rows.
fn features<F: Scalar>(
    emb: &EmbeddingMatrix<F>,
    covariates: Option<&DenseMatrix<F>>,
    rows: &[usize],
    k: usize,
) -> DenseMatrix<F> {
    let c = covariates.map_or(0, DenseMatrix::cols);
    DenseMatrix::from_fn(rows.len(), c + k, |r, j| {
        let i = rows[r];
        if j < c {
            covariates.unwrap()[(i, j)]
        } else {
            emb.scores[(i, j - c)]
        }
    })
}

fn trait_values<F: Scalar>(trait_: &TraitVector<F>, rows: &[usize]) -> Vec<F> {
    rows.iter().map(|&i| trait_.values[i].unwrap()).collect()
}

fn rmse<F: Scalar>(pred: &[F], actual: &[F]) -> F {
    let n = F::of(pred.len() as f64);
    let ss: F = pred
        .iter()
        .zip(actual)
        .map(|(&p, &a)| (p - a) * (p - a))
        .sum();
    (ss / n).sqrt()
}

fn evaluate_numeric<F: Scalar>(
    emb: &EmbeddingMatrix<F>,
    trait_: &TraitVector<F>,
    covariates: Option<&DenseMatrix<F>>,
    train: &[usize],
    validation: &[usize],
    test: &[usize],
    k_grid: &[usize],
) -> Result<RunReport<F>> {
    let y_train = trait_values(trait_, train);
    let y_val = trait_values(trait_, validation);
    let y_test = trait_values(trait_, test);

    // Baseline: covariates only.
    let baseline = fit_linear(&features(emb, covariates, train, 0), &y_train)?;
    let psi_baseline = rmse(
        &baseline.predict(&features(emb, covariates, test, 0)),
        &y_test,
    );

    // Full model: K tuned on validation error; test rows never touched.
    let mut best: Option<(usize, F, LinearModel<F>)> = None;
    for &k in k_grid {
        let model = fit_linear(&features(emb, covariates, train, k), &y_train)?;
        let err = rmse(&model.predict(&features(emb, covariates, validation, k)), &y_val);
        if best.as_ref().map_or(true, |(_, e, _)| err < *e) {
            best = Some((k, err, model));
        }
    }
    let (best_k, _, model) = best.expect("grid verified nonempty");
    let test_predictions = model.predict(&features(emb, covariates, test, best_k));
    let psi_full = rmse(&test_predictions, &y_test);
    if psi_baseline == F::zero() {
        return Err(Error::Config(
            "baseline error is zero; improvement ratio undefined".into(),
        ));
    }
    Ok(RunReport {
        best_k,
        psi_baseline,
        psi_full,
        rho: (psi_baseline - psi_full) / psi_baseline,
        test_predictions,
        test_indices: test.to_vec(),
    })
}

fn evaluate_binary<F: Scalar>(
    emb: &EmbeddingMatrix<F>,
    trait_: &TraitVector<F>,
    covariates: Option<&DenseMatrix<F>>,
    train: &[usize],
    validation: &[usize],
    test: &[usize],
    k_grid: &[usize],
) -> Result<RunReport<F>> {
    // Binary encoding: the larger of the two observed levels is class 1.
    let mut levels: Vec<F> = Vec::new();
    for i in train.iter().chain(validation).chain(test) {
        let v = trait_.values[*i].unwrap();
        if !levels.contains(&v) {
            levels.push(v);
        }
    }
    if levels.len() != 2 {
        return Err(Error::Config(format!(
            "categorical prediction requires exactly 2 levels, found {}",
            levels.len()
        )));
    }
    levels.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let hi = levels[1];
    let labels = |rows: &[usize]| -> Vec<bool> {
        rows.iter().map(|&i| trait_.values[i].unwrap() == hi).collect()
    };
    let y_train = labels(train);
    let y_test = labels(test);
    let y_val = labels(validation);
    let opts = LogisticOpts::default();

    let accuracy = |model: &LogisticModel<F>, x: &DenseMatrix<F>, y: &[bool]| -> F {
        let hits = (0..x.rows())
            .filter(|&i| model.predict_class(x.row(i)) == y[i])
            .count();
        F::of(hits as f64) / F::of(y.len() as f64)
    };

    let baseline = fit_logistic(&features(emb, covariates, train, 0), &y_train, &opts)?;
    let psi_baseline = F::one()
        - accuracy(
            &baseline,
            &features(emb, covariates, test, 0),
            &y_test,
        );

    let mut best: Option<(usize, F, LogisticModel<F>)> = None;
    for &k in k_grid {
        let model = fit_logistic(&features(emb, covariates, train, k), &y_train, &opts)?;
        let err = F::one() - accuracy(&model, &features(emb, covariates, validation, k), &y_val);
        if best.as_ref().map_or(true, |(_, e, _)| err < *e) {
            best = Some((k, err, model));
        }
    }
    let (best_k, _, model) = best.expect("grid verified nonempty");
    let test_x = features(emb, covariates, test, best_k);
    let test_predictions: Vec<F> = (0..test_x.rows())
        .map(|i| {
            if model.predict_class(test_x.row(i)) {
                levels[1]
            } else {
                levels[0]
            }
        })
        .collect();
    let hits = test_predictions
        .iter()
        .zip(&y_test)
        .filter(|(&p, &y)| (p == hi) == y)
        .count();
    let psi_full = F::one() - F::of(hits as f64) / F::of(y_test.len() as f64);
    if psi_baseline == F::zero() {
        return Err(Error::Config(
            "baseline error is zero; improvement ratio undefined".into(),
        ));
    }
    Ok(RunReport {
        best_k,
        psi_baseline,
        psi_full,
        rho: (psi_baseline - psi_full) / psi_baseline,
        test_predictions,
        test_indices: test.to_vec(),
    })
}

/// Mean full-model test prediction per observed trait level, ascending.
pub fn predicted_group_means<F: Scalar>(predictions: &[F], levels: &[F]) -> Result<Vec<(F, F)>> {
    if predictions.len() != levels.len() {
        return Err(Error::Shape(format!(
            "{} predictions vs {} levels",
            predictions.len(),
            levels.len()
        )));
    }
    if predictions.is_empty() {
        return Err(Error::InsufficientData("no predictions to group".into()));
    }
    let mut distinct: Vec<F> = Vec::new();
    for &l in levels {
        if !distinct.contains(&l) {
            distinct.push(l);
        }
    }
    distinct.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let mut out = Vec::with_capacity(distinct.len());
    for level in distinct {
        let group: Vec<F> = predictions
            .iter()
            .zip(levels)
            .filter(|(_, &l)| l == level)
            .map(|(&p, _)| p)
            .collect();
        let mean = group.iter().copied().sum::<F>() / F::of(group.len() as f64);
        out.push((level, mean));
    }
    Ok(out)
}

/// Convenience: group means of a run's test predictions by the actual trait
/// level of each test subject.
pub fn run_group_means<F: Scalar>(
    run: &RunReport<F>,
    trait_: &TraitVector<F>,
) -> Result<Vec<(F, F)>> {
    let levels: Vec<F> = run
        .test_indices
        .iter()
        .map(|&i| {
            trait_.values[i].ok_or_else(|| {
                Error::InsufficientData(format!("test subject {i} has no trait value"))
            })
        })
        .collect::<Result<_>>()?;
    predicted_group_means(&run.test_predictions, &levels)
}

// ---------------------------------------------------------------------------
// Identification
// ---------------------------------------------------------------------------

/// Nearest-neighbor identification outcome.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IdentificationReport {
    pub accuracy: f64,
    pub k_used: usize,
    /// Chosen gallery row per probe.
    pub assignments: Vec<usize>,
}

/// 1-nearest-neighbor matching of probe score rows against a gallery on
/// the first `k` PC-score coordinates (Euclidean distance; distance ties
/// resolve to the smaller gallery index).
pub fn identify_subjects<F: Scalar, L: PartialEq>(
    gallery: &DenseMatrix<F>,
    gallery_labels: &[L],
    probes: &DenseMatrix<F>,
    probe_labels: &[L],
    k: usize,
) -> Result<IdentificationReport> {
    if gallery.rows() == 0 {
        return Err(Error::InsufficientData("empty gallery".into()));
    }
    if gallery_labels.len() != gallery.rows() || probe_labels.len() != probes.rows() {
        return Err(Error::Shape("labels must match row counts".into()));
    }
    if k == 0 || k > gallery.cols() || k > probes.cols() {
        return Err(Error::Rank {
            requested: k,
            max: gallery.cols().min(probes.cols()),
        });
    }
    let mut assignments = Vec::with_capacity(probes.rows());
    let mut correct = 0usize;
    for p in 0..probes.rows() {
        let prow = &probes.row(p)[..k];
        let mut best = (F::infinity(), 0usize);
        for g in 0..gallery.rows() {
            let grow = &gallery.row(g)[..k];
            let mut d2 = F::zero();
            for (&a, &b) in prow.iter().zip(grow) {
                d2 = d2 + (a - b) * (a - b);
            }
            if d2 < best.0 {
                best = (d2, g);
            }
        }
        assignments.push(best.1);
        if gallery_labels[best.1] == probe_labels[p] {
            correct += 1;
        }
    }
    Ok(IdentificationReport {
        accuracy: correct as f64 / probes.rows().max(1) as f64,
        k_used: k,
        assignments,
    })
}
