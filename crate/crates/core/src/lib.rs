//! Higher-order principal components analysis for dense third-order tensors.
//!
//! The crate covers the classic decompositions (CP-ALS, HOSVD, HOOI and the
//! greedy Tensor Power Algorithm), their sparse counterparts (Sparse CP-TPA,
//! Sparse CP-ALS, Sparse HOSVD/HOOI), general and non-negative penalties,
//! Generalized CP under three-way quadratic norms, multi-way functional PCA,
//! and the evaluation tools around them: projected variance explained, BIC
//! selection of penalty levels, support recovery metrics and a simulation
//! harness.

pub mod classic;
pub mod error;
pub mod functional;
pub mod generalized;
pub mod io;
pub mod linalg;
pub mod metrics;
pub mod model;
mod power;
pub mod select;
pub mod sim;
pub mod sparse;
pub mod tensor;

pub use classic::{cp_als, hooi, hosvd, project_core, tpa, tpa_rank_one};
pub use error::{HopcaError, Result};
pub use model::{ComponentRecord, CpModel, Diagnostics, FittedModel, Init, RankOne, SolverConfig, TuckerModel};
pub use tensor::{khatri_rao, matricize, mode_mult, outer3, Matrix, Mode, Tensor3, Vector};
pub use functional::{fpca, fpca_half_smoothing, fpca_rank_one, second_diff_penalty, Smoother, SmootherSet};
pub use generalized::{
    gcp, gcp_rank_one, general_cp_tpa, general_cp_tpa_rank_one, qnorm_lasso_solve, sparse_gcp_rank_one, GroupLasso,
    ModePenaltyFn, NonnegL1, PenaltyFn, QuadOperators, L1,
};
pub use metrics::{signal_mse, support_metrics, RecoveryMetrics, RocMethod, RocPoint};
pub use select::{bic_select, cp_variance_explained, variance_explained, BicSelection, VarianceReport};
pub use sim::{simulate, Method, Scenario, SimScenarioSpec, SimTruth};
pub use sparse::{
    soft_threshold, sparse_cp_als, sparse_cp_tpa, sparse_cp_tpa_rank_one, sparse_hooi, sparse_hosvd, sparse_pca_rank_one,
    LambdaChoice, ModePenalty, PenaltyKind, PenaltySpec,
};
