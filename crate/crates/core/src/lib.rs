//! Tensor-network PCA for populations of symmetric weighted networks.
//!
//! A population of `N` weighted networks on `P` nodes forms a semi-symmetric
//! `P x P x N` tensor. This crate decomposes such stacks into orthonormal
//! basis networks and per-subject scores (a greedy semi-symmetric CP
//! decomposition), provides Tucker baselines (HOSVD, HOOI), a simulation
//! harness for method comparison, and the downstream statistics: two-sample
//! permutation testing, trait directions in the embedding space with their
//! edge-space back-mapping, and a prediction-improvement harness.
//!
//! Everything numeric is generic over the [`Scalar`] floating-point type;
//! the `*F64`/`*F32` aliases below pin the common instantiations.

pub mod decompose;
pub mod error;
pub mod infer;
pub mod linalg;
pub mod predict;
pub mod rng;
pub mod scalar;
pub mod simulate;
pub mod tensor;

pub use decompose::{
    hooi_semisym, hosvd_semisym, tn_pca, tn_pca_4mode, HooiOpts, Tn4Decomposition,
    TnDecomposition, TnPcaOpts, TuckerDecomposition,
};
pub use error::{Error, Result};
pub use infer::{
    cca_direction, delta_net, direction_scale, extreme_groups, fdr_bh, lda_direction, mmd_test,
    principal_network, project_onto, top_edges, Direction, DirectionMethod, Edge,
    EmbeddingMatrix, FdrOutcome, GroupEmbedding, LdaRidge, TestResult, TraitKind, TraitVector,
};
pub use linalg::{symmetric_top_eigenvector, DenseMatrix, DenseVector, SymEigen, TopEigen};
pub use predict::{
    evaluate_trait, evaluate_trait_split, fit_linear, fit_logistic, identify_subjects,
    make_split, predicted_group_means, EvalOpts, IdentificationReport, LinearModel,
    LogisticModel, LogisticOpts, PredictionMetric, PredictionReport, RunReport, SplitPlan,
};
pub use scalar::Scalar;
pub use simulate::{
    generate, relative_core_error, run_study, sample_stiefel, sample_wishart_noise,
    variance_explained, Method, SimulationConfig, SimulationDraw, SimulationReport, StudyGrid,
    UMode,
};
pub use tensor::{SemiSymmetricTensor, Tensor3, Tensor4};

/// `f64` instantiations (the default precision for all tooling).
pub type SemiSymmetricTensorF64 = SemiSymmetricTensor<f64>;
pub type Tensor3F64 = Tensor3<f64>;
pub type Tensor4F64 = Tensor4<f64>;
pub type DenseMatrixF64 = DenseMatrix<f64>;

/// `f32` instantiations.
pub type SemiSymmetricTensorF32 = SemiSymmetricTensor<f32>;
pub type Tensor3F32 = Tensor3<f32>;
pub type Tensor4F32 = Tensor4<f32>;
pub type DenseMatrixF32 = DenseMatrix<f32>;
